//! End-to-end protocol runner.
//!
//! For every grid point `alpha` the initial state is displaced, damped for
//! the protocol time, probed, and the quasiprobability is reconstructed from
//! the probed statistics. Grid points are independent and are evaluated in
//! parallel; the output order is always row-major (imaginary part selects the
//! row, real part the column).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dissipation::{dissipate, DecayParams};
use crate::error::Error;
use crate::fock::{
    cat_state, coherent_state, fock_state, DensityMatrix, DisplacementBasis, FockCutoff,
    PhaseSpacePoint, DEFAULT_TAIL_BUDGET,
};
use crate::probe::{
    inversion_sigma, invert_fourier, propagate_inversion_sigma, required_tau_points,
    sample_inversion, signal_full, signal_strongfield, AtomProbeParams, InversionSignal,
};
use crate::reconstruction::{
    chi_weight, noise_amplification, reconstruct_point, report_truncation_warnings,
    wigner_direct_with, QuasiProbPoint, SParameter,
};

pub const CSV_HEADER: [&str; 5] = ["re_alpha", "im_alpha", "F", "trunc_bound", "noise_amp"];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse configuration: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error(transparent)]
    Model(#[from] Error),

    #[error("grid point {index} (alpha = {alpha}): {source}")]
    Point {
        index: usize,
        alpha: C64,
        #[source]
        source: Error,
    },

    #[error("grid is empty")]
    EmptyGrid,

    #[error("state does not match the grid descriptor: {0}")]
    DescriptorMismatch(String),

    #[error("grid files are not comparable: {0}")]
    LayoutMismatch(String),

    #[error("malformed grid file: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// Process exit code: 1 for I/O failures, 2 for invalid input.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type PipelineResult<T> = std::result::Result<T, PipelineError>;

/// Initial field state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Fock {
        n: usize,
    },
    Coherent {
        beta: C64,
    },
    Cat {
        beta: C64,
        #[serde(default)]
        phase: f64,
    },
}

impl StateSpec {
    pub fn prepare(&self, cutoff: FockCutoff) -> crate::Result<DensityMatrix> {
        match *self {
            StateSpec::Fock { n } => fock_state(n, cutoff),
            StateSpec::Coherent { beta } => coherent_state(beta, cutoff),
            StateSpec::Cat { beta, phase } => cat_state(beta, phase, cutoff),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub re_count: usize,
    pub im_count: usize,
}

fn axis(range: [f64; 2], count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (range[0] + range[1])];
    }
    let step = (range[1] - range[0]) / (count - 1) as f64;
    (0..count).map(|k| range[0] + k as f64 * step).collect()
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.re_count * self.im_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major points; a count of 1 places the point at the range midpoint.
    pub fn points(&self) -> Vec<PhaseSpacePoint> {
        let re = axis(self.re, self.re_count);
        let im = axis(self.im, self.im_count);
        im.iter()
            .flat_map(|&y| re.iter().map(move |&x| PhaseSpacePoint::new(x, y)))
            .collect()
    }

    /// Area of one grid cell, zero along a collapsed axis.
    pub fn cell_area(&self) -> f64 {
        let step = |r: [f64; 2], n: usize| {
            if n > 1 {
                (r[1] - r[0]) / (n - 1) as f64
            } else {
                0.0
            }
        };
        step(self.re, self.re_count) * step(self.im, self.im_count)
    }

    fn validate(&self) -> PipelineResult<()> {
        if self.re_count < 1 || self.im_count < 1 {
            return Err(PipelineError::Config(
                "grid counts must be at least 1".into(),
            ));
        }
        for (name, r) in [("re", self.re), ("im", self.im)] {
            if !r.iter().all(|v| v.is_finite()) || r[0] > r[1] {
                return Err(PipelineError::Config(format!(
                    "grid range {name} = {r:?} must be finite and ordered"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeMode {
    /// Exact diagonal elements.
    #[default]
    Ideal,
    /// Strong-field cosine signal, then Fourier inversion.
    Strongfield,
    /// Full cascade-atom signal with detuning and Stark shift, then Fourier
    /// inversion.
    Full,
    /// Strong-field signal with binomial shot noise, then Fourier inversion.
    Sampled,
}

fn default_lambda() -> f64 {
    1000.0
}
fn default_tau_points() -> usize {
    4097
}
fn default_min_coupling_ratio() -> f64 {
    100.0
}
fn default_min_mean_photons() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default)]
    pub mode: ProbeMode,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub stark: f64,
    #[serde(default = "default_tau_points")]
    pub tau_points: usize,
    /// Atoms per interaction time; required in sampled mode.
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Highest photon number recovered by the Fourier inversion; defaults to
    /// `n_max`.
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default = "default_min_coupling_ratio")]
    pub min_coupling_ratio: f64,
    /// Mean photon number below which full-mode points are flagged as outside
    /// the strong-field approximation.
    #[serde(default = "default_min_mean_photons")]
    pub min_mean_photons: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self {
            mode: ProbeMode::Ideal,
            lambda: default_lambda(),
            delta: 0.0,
            stark: 0.0,
            tau_points: default_tau_points(),
            shots: None,
            seed: 0,
            levels: None,
            min_coupling_ratio: default_min_coupling_ratio(),
            min_mean_photons: default_min_mean_photons(),
        }
    }
}

fn default_tail_budget() -> f64 {
    DEFAULT_TAIL_BUDGET
}
fn default_max_gamma_t() -> f64 {
    0.5
}
fn default_oracle_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub state: StateSpec,
    pub n_max: usize,
    #[serde(default = "default_tail_budget")]
    pub tail_budget: f64,
    pub gamma: f64,
    /// Time between displacement and measurement.
    pub t: f64,
    #[serde(default)]
    pub s: f64,
    /// Upper limit on `gamma * t`.
    #[serde(default = "default_max_gamma_t")]
    pub max_gamma_t: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub probe: ProbeSpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub reflect_axes: bool,
    /// Largest accepted deviation from the direct oracle.
    #[serde(default = "default_oracle_tolerance")]
    pub oracle_tolerance: f64,
}

impl ScanConfig {
    pub fn from_json(text: &str) -> PipelineResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> PipelineResult<Self> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    pub fn cutoff(&self) -> PipelineResult<FockCutoff> {
        Ok(FockCutoff::new(self.n_max)?.with_tail_budget(self.tail_budget)?)
    }

    pub fn initial_state(&self) -> PipelineResult<DensityMatrix> {
        Ok(self.state.prepare(self.cutoff()?)?)
    }

    pub fn protocol(&self) -> PipelineResult<Protocol> {
        self.grid.validate()?;
        let cutoff = self.cutoff()?;
        let rho0 = self.state.prepare(cutoff)?;
        let decay = DecayParams::new(self.gamma, self.t)?;
        if decay.gamma_t() > self.max_gamma_t {
            return Err(PipelineError::Config(format!(
                "gamma*t = {} exceeds the protocol limit max_gamma_t = {}",
                decay.gamma_t(),
                self.max_gamma_t
            )));
        }
        let s = SParameter::new(self.s)?;
        let probe = self.resolve_probe(decay)?;
        Ok(Protocol {
            rho0,
            decay,
            s,
            probe,
            basis: DisplacementBasis::new(cutoff),
            points: self.grid.points(),
        })
    }

    fn resolve_probe(&self, decay: DecayParams) -> PipelineResult<Probe> {
        let spec = &self.probe;
        if spec.mode == ProbeMode::Ideal {
            return Ok(Probe::Ideal);
        }
        let levels = spec.levels.unwrap_or(self.n_max);
        if levels > self.n_max {
            return Err(PipelineError::Config(format!(
                "probe levels {levels} exceed n_max {}",
                self.n_max
            )));
        }
        let params = AtomProbeParams::new(spec.lambda, spec.delta, spec.stark, spec.tau_points)?;
        params.check_strong_coupling(decay.gamma(), spec.min_coupling_ratio)?;
        let required = required_tau_points(levels);
        if spec.tau_points < required || spec.tau_points.is_multiple_of(2) {
            return Err(PipelineError::Config(format!(
                "tau_points = {} must be odd and at least {required} to resolve {levels} levels",
                spec.tau_points
            )));
        }
        Ok(match spec.mode {
            ProbeMode::Ideal => unreachable!(),
            ProbeMode::Strongfield => Probe::Strongfield { params, levels },
            ProbeMode::Full => Probe::Full {
                params,
                levels,
                min_mean_photons: spec.min_mean_photons,
            },
            ProbeMode::Sampled => {
                let shots = spec.shots.filter(|&s| s > 0).ok_or_else(|| {
                    PipelineError::Config("sampled mode requires shots > 0".into())
                })?;
                Probe::Sampled {
                    params,
                    levels,
                    shots,
                    seed: spec.seed,
                }
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum Probe {
    Ideal,
    Strongfield {
        params: AtomProbeParams,
        levels: usize,
    },
    Full {
        params: AtomProbeParams,
        levels: usize,
        min_mean_photons: f64,
    },
    Sampled {
        params: AtomProbeParams,
        levels: usize,
        shots: u64,
        seed: u64,
    },
}

/// Validated, ready-to-run form of a [`ScanConfig`].
#[derive(Debug, Clone)]
pub struct Protocol {
    pub rho0: DensityMatrix,
    pub decay: DecayParams,
    pub s: SParameter,
    pub probe: Probe,
    pub basis: DisplacementBasis,
    pub points: Vec<PhaseSpacePoint>,
}

/// Seed for one grid point, independent of evaluation order.
fn point_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed
        ^ (index as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointOutcome {
    pub point: QuasiProbPoint,
    /// Propagated shot-noise sigma of `F` (sampled mode only).
    pub stat_sigma: Option<f64>,
    /// Full-mode point whose mean photon number is below the strong-field
    /// threshold.
    pub approximation_warning: bool,
}

impl Protocol {
    /// Probed statistics at one point; the signal is taken at time `t` for the
    /// whole interaction window.
    pub fn measure(&self, index: usize, alpha: PhaseSpacePoint) -> crate::Result<PointOutcome> {
        let displaced = self.basis.operator(alpha).apply(&self.rho0)?;
        let decayed = dissipate(&displaced, self.decay);
        let exact = decayed.photon_statistics();
        let mut stat_sigma = None;
        let mut approximation_warning = false;
        let stats = match &self.probe {
            Probe::Ideal => exact,
            Probe::Strongfield { params, levels } => {
                let signal = signal_strongfield(&exact, params.lambda(), params.tau_points());
                invert_fourier(&signal, params.lambda(), *levels)?
            }
            Probe::Full {
                params,
                levels,
                min_mean_photons,
            } => {
                approximation_warning = exact.mean_photon_number() < *min_mean_photons;
                invert_fourier(&signal_full(&exact, params), params.lambda(), *levels)?
            }
            Probe::Sampled {
                params,
                levels,
                shots,
                seed,
            } => {
                let clean = signal_strongfield(&exact, params.lambda(), params.tau_points());
                let noisy = sample_inversion(&clean, *shots, point_seed(*seed, index))?;
                let sigma_w = inversion_sigma(&noisy, *shots);
                let sigma_p =
                    propagate_inversion_sigma(&noisy, &sigma_w, params.lambda(), *levels)?;
                stat_sigma = Some(noise_amplification(
                    &sigma_p,
                    &chi_weight(self.decay, self.s),
                ));
                invert_fourier(&noisy, params.lambda(), *levels)?
            }
        };
        Ok(PointOutcome {
            point: reconstruct_point(alpha, &stats, self.decay, self.s),
            stat_sigma,
            approximation_warning,
        })
    }

    /// Inversion signal a probe atom would record at `alpha`.
    pub fn probe_signal(
        &self,
        alpha: PhaseSpacePoint,
        seed_index: usize,
    ) -> crate::Result<InversionSignal> {
        let displaced = self.basis.operator(alpha).apply(&self.rho0)?;
        let stats = dissipate(&displaced, self.decay).photon_statistics();
        Ok(match &self.probe {
            Probe::Ideal => signal_strongfield(&stats, default_lambda(), default_tau_points()),
            Probe::Strongfield { params, .. } => {
                signal_strongfield(&stats, params.lambda(), params.tau_points())
            }
            Probe::Full { params, .. } => signal_full(&stats, params),
            Probe::Sampled {
                params,
                shots,
                seed,
                ..
            } => {
                let clean = signal_strongfield(&stats, params.lambda(), params.tau_points());
                sample_inversion(&clean, *shots, point_seed(*seed, seed_index))?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub config: ScanConfig,
    pub version: String,
    pub wall_time_s: f64,
    pub points: usize,
    pub truncation_warnings: usize,
    pub approximation_warnings: usize,
    pub max_stat_sigma: Option<f64>,
}

/// Reconstructed grid plus run metadata.
#[derive(Debug, Clone)]
pub struct QuasiProbGrid {
    pub points: Vec<QuasiProbPoint>,
    pub metadata: ScanMetadata,
}

impl QuasiProbGrid {
    pub fn config(&self) -> &ScanConfig {
        &self.metadata.config
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Riemann sum of the values times the cell area.
    pub fn integral(&self) -> f64 {
        self.points.iter().map(|p| p.value).sum::<f64>() * self.config().grid.cell_area()
    }

    pub fn max_abs_deviation(&self, other: &QuasiProbGrid) -> PipelineResult<f64> {
        if self.points.len() != other.points.len() {
            return Err(PipelineError::LayoutMismatch(format!(
                "{} vs {} points",
                self.points.len(),
                other.points.len()
            )));
        }
        Ok(self
            .points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| (a.value - b.value).abs())
            .fold(0.0, f64::max))
    }
}

fn collect_in_order<T: Send>(
    points: &[PhaseSpacePoint],
    f: impl Fn(usize, PhaseSpacePoint) -> crate::Result<T> + Sync,
) -> PipelineResult<Vec<T>> {
    points
        .par_iter()
        .enumerate()
        .map(|(index, &alpha)| {
            f(index, alpha).map_err(|source| PipelineError::Point {
                index,
                alpha: alpha.alpha(),
                source,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Runs the full protocol over the configured grid.
pub fn run_scan(config: &ScanConfig) -> PipelineResult<QuasiProbGrid> {
    let start = Instant::now();
    let protocol = config.protocol()?;
    let outcomes = collect_in_order(&protocol.points, |i, a| protocol.measure(i, a))?;
    let points: Vec<QuasiProbPoint> = outcomes.iter().map(|o| o.point).collect();
    let truncation_warnings = report_truncation_warnings(&points);
    let approximation_warnings = outcomes.iter().filter(|o| o.approximation_warning).count();
    if approximation_warnings > 0 {
        log::warn!(
            "{approximation_warnings} points have mean photon number below {} where the strong-field \
             inversion is inaccurate",
            config.probe.min_mean_photons
        );
    }
    let max_stat_sigma = outcomes
        .iter()
        .filter_map(|o| o.stat_sigma)
        .fold(None, |acc: Option<f64>, s| {
            Some(acc.map_or(s, |a| a.max(s)))
        });
    Ok(QuasiProbGrid {
        metadata: ScanMetadata {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: start.elapsed().as_secs_f64(),
            points: points.len(),
            truncation_warnings,
            approximation_warnings,
            max_stat_sigma,
        },
        points,
    })
}

/// Direct quasiprobability of the configured state over the configured grid.
pub fn oracle_grid(config: &ScanConfig) -> PipelineResult<QuasiProbGrid> {
    let start = Instant::now();
    config.grid.validate()?;
    let rho0 = config.initial_state()?;
    let s = SParameter::new(config.s)?;
    let basis = DisplacementBasis::new(rho0.cutoff());
    let points = collect_in_order(&config.grid.points(), |_, alpha| {
        Ok(QuasiProbPoint {
            alpha,
            value: wigner_direct_with(&rho0, &basis.operator(alpha), s)?,
            trunc_error_bound: 0.0,
            noise_amp: 1.0,
            truncation_warning: false,
        })
    })?;
    Ok(QuasiProbGrid {
        metadata: ScanMetadata {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: start.elapsed().as_secs_f64(),
            points: points.len(),
            truncation_warnings: 0,
            approximation_warnings: 0,
            max_stat_sigma: None,
        },
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub worst_index: usize,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passes(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// Per-point deviation of a scanned grid from the direct evaluation on
/// `rho0`, which must be the state the grid was scanned from.
pub fn compare_with_oracle(
    grid: &QuasiProbGrid,
    rho0: &DensityMatrix,
) -> PipelineResult<OracleReport> {
    if grid.points.is_empty() {
        return Err(PipelineError::EmptyGrid);
    }
    let config = grid.config();
    if rho0.cutoff().n_max() != config.n_max {
        return Err(PipelineError::DescriptorMismatch(format!(
            "state has n_max = {}, grid was scanned with n_max = {}",
            rho0.cutoff().n_max(),
            config.n_max
        )));
    }
    let described = config.initial_state()?;
    let gap = described.max_abs_diff(rho0);
    if gap > 1e-12 {
        return Err(PipelineError::DescriptorMismatch(format!(
            "state differs from the descriptor {:?} by {gap:e}",
            config.state
        )));
    }
    let s = SParameter::new(config.s)?;
    let basis = DisplacementBasis::new(rho0.cutoff());
    let alphas: Vec<PhaseSpacePoint> = grid.points.iter().map(|p| p.alpha).collect();
    let direct = collect_in_order(&alphas, |_, alpha| {
        wigner_direct_with(rho0, &basis.operator(alpha), s)
    })?;
    let deviations: Vec<f64> = grid
        .points
        .iter()
        .zip(&direct)
        .map(|(p, d)| (p.value - d).abs())
        .collect();
    let (worst_index, max_deviation) =
        deviations
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, 0.0),
                |best, (i, d)| if d > best.1 { (i, d) } else { best },
            );
    Ok(OracleReport {
        deviations,
        max_deviation,
        worst_index,
        tolerance: config.oracle_tolerance,
    })
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub re_alpha: f64,
    #[serde(rename = "im_alpha")]
    pub im_alpha: f64,
    #[serde(rename = "F")]
    pub value: f64,
    pub trunc_bound: f64,
    pub noise_amp: f64,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with 17 significant digits; `reflect_axes` labels each row with
/// `-alpha`.
pub fn write_grid_csv<W: Write>(
    grid: &QuasiProbGrid,
    reflect_axes: bool,
    out: W,
) -> PipelineResult<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    let sign = if reflect_axes { -1.0 } else { 1.0 };
    for p in &grid.points {
        let a = p.alpha.alpha() * sign;
        writer.write_record([
            fmt(a.re + 0.0),
            fmt(a.im + 0.0),
            fmt(p.value),
            fmt(p.trunc_error_bound),
            fmt(p.noise_amp),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_grid_csv(path: &Path) -> PipelineResult<Vec<GridRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(PipelineError::LayoutMismatch(format!(
            "{} has header {:?}",
            path.display(),
            headers
        )));
    }
    Ok(reader.deserialize().collect::<Result<Vec<GridRow>, _>>()?)
}

/// `out.csv` -> `out.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Writes the CSV and its JSON metadata sidecar.
pub fn write_outputs(
    grid: &QuasiProbGrid,
    reflect_axes: bool,
    csv_path: &Path,
) -> PipelineResult<()> {
    write_grid_csv(grid, reflect_axes, BufWriter::new(File::create(csv_path)?))?;
    let mut meta = BufWriter::new(File::create(sidecar_path(csv_path))?);
    serde_json::to_writer_pretty(&mut meta, &grid.metadata)?;
    meta.write_all(b"\n")?;
    meta.flush()?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> PipelineResult<ScanMetadata> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffReport {
    pub points: usize,
    pub max_deviation: f64,
    pub worst_index: usize,
}

/// Largest `|F_a - F_b|` over two grids sampled at the same coordinates.
pub fn diff_grids(a: &[GridRow], b: &[GridRow]) -> PipelineResult<DiffReport> {
    if a.is_empty() || b.is_empty() {
        return Err(PipelineError::EmptyGrid);
    }
    if a.len() != b.len() {
        return Err(PipelineError::LayoutMismatch(format!(
            "{} vs {} points",
            a.len(),
            b.len()
        )));
    }
    let mut report = DiffReport {
        points: a.len(),
        max_deviation: 0.0,
        worst_index: 0,
    };
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if (x.re_alpha - y.re_alpha).abs() > 1e-12 || (x.im_alpha - y.im_alpha).abs() > 1e-12 {
            return Err(PipelineError::LayoutMismatch(format!(
                "row {i}: ({}, {}) vs ({}, {})",
                x.re_alpha, x.im_alpha, y.re_alpha, y.im_alpha
            )));
        }
        let d = (x.value - y.value).abs();
        if d > report.max_deviation || d.is_nan() {
            report.max_deviation = d;
            report.worst_index = i;
        }
    }
    Ok(report)
}
