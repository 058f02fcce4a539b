//! Truncated Fock-space states of a single cavity mode.
//!
//! A [`DensityMatrix`] is a dense complex matrix in the photon-number basis
//! `|0>, ..., |n_max>`. Preparation functions refuse states whose probability
//! mass reaches the top of the basis; see [`FockCutoff::tail_budget`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TAIL_BUDGET: f64 = 1e-10;

/// Dimension of the truncated basis plus the truncation-adequacy budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockCutoff {
    n_max: usize,
    tail_budget: f64,
}

impl FockCutoff {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter(format!(
                "n_max must be at least 1, got {n_max}"
            )));
        }
        Ok(Self {
            n_max,
            tail_budget: DEFAULT_TAIL_BUDGET,
        })
    }

    pub fn with_tail_budget(mut self, tail_budget: f64) -> Result<Self> {
        if !(tail_budget > 0.0 && tail_budget.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tail budget must be positive and finite, got {tail_budget}"
            )));
        }
        self.tail_budget = tail_budget;
        Ok(self)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Largest probability mass tolerated in the top tenth of the levels.
    pub fn tail_budget(&self) -> f64 {
        self.tail_budget
    }

    /// First level of the top 10% band used by the adequacy rule.
    pub fn top_band_start(&self) -> usize {
        top_band_start(self.dim())
    }
}

fn top_band_start(dim: usize) -> usize {
    dim - dim.div_ceil(10)
}

/// A coherent amplitude alpha labelling a point of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint(pub C64);

impl PhaseSpacePoint {
    pub fn new(re: f64, im: f64) -> Self {
        Self(C64::new(re, im))
    }

    pub fn alpha(&self) -> C64 {
        self.0
    }
}

impl From<C64> for PhaseSpacePoint {
    fn from(alpha: C64) -> Self {
        Self(alpha)
    }
}

/// Photon-number distribution `P_m`, `m = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStatistics {
    values: Vec<f64>,
}

impl PhotonStatistics {
    /// Checked constructor for exact statistics: every entry must be
    /// nonnegative up to 1e-12.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty photon statistics".into()));
        }
        if let Some((m, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < -1e-12)
        {
            return Err(Error::InvalidParameter(format!(
                "photon probability P_{m} = {v} is negative or not finite"
            )));
        }
        Ok(Self { values })
    }

    /// Statistics estimated from a noisy measurement. Entries may be
    /// slightly negative; they are kept as measured so the reconstruction
    /// stays unbiased.
    pub fn from_estimate(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(m, p)| m as f64 * p)
            .sum()
    }

    /// Checks `1 - tail_tolerance <= sum P_m <= 1 + 1e-9`.
    pub fn is_normalized(&self, tail_tolerance: f64) -> bool {
        let total = self.total();
        total >= 1.0 - tail_tolerance && total <= 1.0 + 1e-9
    }

    /// Mass in the top 10% of levels.
    pub fn top_band_mass(&self) -> f64 {
        let start = top_band_start(self.values.len());
        self.values[start..].iter().map(|p| p.max(0.0)).sum()
    }
}

/// Density operator in the truncated number basis; element `(m, n)` is
/// `<m|rho|n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    cutoff: FockCutoff,
    entries: Array2<C64>,
}

impl DensityMatrix {
    /// Wraps a matrix of the right shape. Physicality is not checked here;
    /// see [`DensityMatrix::hermiticity_error`] and friends.
    pub fn from_entries(cutoff: FockCutoff, entries: Array2<C64>) -> Result<Self> {
        let dim = cutoff.dim();
        if entries.dim() != (dim, dim) {
            return Err(Error::InvalidParameter(format!(
                "density matrix shape {:?} does not match cutoff dimension {dim}",
                entries.dim()
            )));
        }
        Ok(Self { cutoff, entries })
    }

    /// `|psi><psi|` for a normalized amplitude vector.
    pub fn from_pure(cutoff: FockCutoff, amplitudes: &Array1<C64>) -> Result<Self> {
        let dim = cutoff.dim();
        if amplitudes.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "amplitude vector length {} does not match cutoff dimension {dim}",
                amplitudes.len()
            )));
        }
        let entries =
            Array2::from_shape_fn((dim, dim), |(m, n)| amplitudes[m] * amplitudes[n].conj());
        Ok(Self { cutoff, entries })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff.dim()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.entries[[m, n]]
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diag().iter().map(|z| z.re).collect()
    }

    /// Diagonal as photon statistics (unchecked; roundoff can leave entries
    /// a few ulp below zero).
    pub fn photon_statistics(&self) -> PhotonStatistics {
        PhotonStatistics::from_estimate(self.diagonal())
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.entries
            .diag()
            .iter()
            .enumerate()
            .map(|(m, z)| m as f64 * z.re)
            .sum()
    }

    pub fn top_band_mass(&self) -> f64 {
        let start = self.cutoff.top_band_start();
        (start..self.dim())
            .map(|m| self.entries[[m, m]].re.max(0.0))
            .sum()
    }

    /// `max |rho(m,n) - conj(rho(n,m))|`.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for m in 0..dim {
            for n in m..dim {
                worst = worst.max((self.entries[[m, n]] - self.entries[[n, m]].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let h = DMatrix::from_fn(dim, dim, |m, n| {
            0.5 * (self.entries[[m, n]] + self.entries[[n, m]].conj())
        });
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `Re Tr(rho sigma)`; equals the fidelity when either state is pure.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        let dim = self.dim().min(other.dim());
        let mut acc = 0.0;
        for m in 0..dim {
            for n in 0..dim {
                acc += (self.entries[[m, n]] * other.entries[[n, m]]).re;
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Replaces the matrix by its Hermitian part `(rho + rho^dagger) / 2`.
    pub fn hermitize(&mut self) {
        let adjoint = self.entries.t().mapv(|z| z.conj());
        self.entries = (&self.entries + &adjoint).mapv(|z| z * 0.5);
    }

    pub fn check_adequate(&self) -> Result<()> {
        let tail = self.top_band_mass();
        if tail > self.cutoff.tail_budget {
            return Err(Error::TruncationInadequate {
                tail,
                budget: self.cutoff.tail_budget,
                required: suggested_cutoff(self.mean_photon_number().max(0.0)),
            });
        }
        Ok(())
    }
}

/// Rough cutoff suggestion for a state with the given mean photon number.
fn suggested_cutoff(mean: f64) -> usize {
    let spread = 10.0 * (mean + 1.0).sqrt();
    ((mean + spread + 10.0) / 0.9).ceil() as usize
}

/// `sum_{n >= start} e^{-mu} mu^n / n!`, evaluated term by term in log space.
pub(crate) fn poisson_tail(mu: f64, start: usize) -> f64 {
    if mu == 0.0 {
        return if start == 0 { 1.0 } else { 0.0 };
    }
    let ln_mu = mu.ln();
    let mut ln_fact = 0.0;
    for k in 2..=start {
        ln_fact += (k as f64).ln();
    }
    let mut n = start;
    let mut ln_term = -mu + n as f64 * ln_mu - ln_fact;
    let mut acc = 0.0;
    loop {
        let term = ln_term.exp();
        acc += term;
        if n as f64 > mu && term < 1e-30 * acc.max(1e-300) {
            break;
        }
        n += 1;
        ln_term += ln_mu - (n as f64).ln();
        if n > start + 100_000 {
            break;
        }
    }
    acc
}

/// Top-band mass of a Poisson distribution of mean `mu` including the mass
/// beyond the cutoff, plus the smallest `n_max` that would satisfy `budget`.
fn poisson_adequacy(mu: f64, cutoff: FockCutoff, weight: f64) -> Result<()> {
    let tail = weight * poisson_tail(mu, cutoff.top_band_start());
    if tail <= cutoff.tail_budget {
        return Ok(());
    }
    let mut required = cutoff.n_max + 1;
    while weight * poisson_tail(mu, top_band_start(required + 1)) > cutoff.tail_budget {
        required += 1;
    }
    Err(Error::TruncationInadequate {
        tail,
        budget: cutoff.tail_budget,
        required,
    })
}

/// `c_n = e^{-|beta|^2/2} beta^n / sqrt(n!)` for `n <= n_max`.
fn coherent_amplitudes(beta: C64, dim: usize) -> Array1<C64> {
    let mut amps = Array1::zeros(dim);
    amps[0] = C64::from((-0.5 * beta.norm_sqr()).exp());
    for n in 1..dim {
        amps[n] = amps[n - 1] * beta / (n as f64).sqrt();
    }
    amps
}

fn normalize(amps: &mut Array1<C64>) -> Result<()> {
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm.is_nan() || norm <= 1e-12 {
        return Err(Error::InvalidParameter(
            "state vector vanishes in the truncated basis".into(),
        ));
    }
    amps.mapv_inplace(|c| c / norm);
    Ok(())
}

/// Number state `|n><n|`.
pub fn fock_state(n: usize, cutoff: FockCutoff) -> Result<DensityMatrix> {
    if n > cutoff.n_max {
        return Err(Error::CutoffViolation {
            level: n,
            n_max: cutoff.n_max,
        });
    }
    let dim = cutoff.dim();
    let mut entries = Array2::zeros((dim, dim));
    entries[[n, n]] = C64::from(1.0);
    DensityMatrix::from_entries(cutoff, entries)
}

/// Coherent state `|beta>`, renormalized over the truncated basis.
pub fn coherent_state(beta: C64, cutoff: FockCutoff) -> Result<DensityMatrix> {
    poisson_adequacy(beta.norm_sqr(), cutoff, 1.0)?;
    let mut amps = coherent_amplitudes(beta, cutoff.dim());
    normalize(&mut amps)?;
    DensityMatrix::from_pure(cutoff, &amps)
}

/// Cat state proportional to `|beta> + e^{i phase} |-beta>`.
pub fn cat_state(beta: C64, phase: f64, cutoff: FockCutoff) -> Result<DensityMatrix> {
    let mu = beta.norm_sqr();
    // Each level's weight is at most 2 p_n / (1 + cos(phase) e^{-2 mu}) of
    // the Poisson weight p_n.
    let norm = 1.0 + phase.cos() * (-2.0 * mu).exp();
    if norm > 1e-12 {
        poisson_adequacy(mu, cutoff, 2.0 / norm)?;
    }
    let rel = C64::from_polar(1.0, phase);
    let mut amps = coherent_amplitudes(beta, cutoff.dim());
    for (n, c) in amps.iter_mut().enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        *c *= C64::from(1.0) + rel * sign;
    }
    normalize(&mut amps)?;
    DensityMatrix::from_pure(cutoff, &amps)
}

/// `sum_n (-1)^n <n|rho|n>`.
pub fn parity_expectation(rho: &DensityMatrix) -> f64 {
    let mut acc = 0.0;
    for (n, z) in rho.entries.diag().iter().enumerate() {
        if n % 2 == 0 {
            acc += z.re;
        } else {
            acc -= z.re;
        }
    }
    acc
}

/// Spectral data of the truncated quadrature `a + a^dagger` for one cutoff,
/// from which every displacement operator of that cutoff is assembled.
///
/// With `alpha = r e^{i theta}` and `phi = theta - pi/2`,
/// `alpha a^dagger - alpha^* a = R(phi) (i r (a + a^dagger)) R(phi)^dagger`
/// where `R(phi) = diag(e^{i n phi})`, so
/// `D(alpha) = R(phi) V diag(e^{i r lambda_k}) V^T R(phi)^dagger`.
#[derive(Debug, Clone)]
pub struct DisplacementBasis {
    cutoff: FockCutoff,
    eigenvalues: Vec<f64>,
    eigenvectors: Array2<f64>,
}

impl DisplacementBasis {
    pub fn new(cutoff: FockCutoff) -> Self {
        let dim = cutoff.dim();
        let quadrature = DMatrix::from_fn(dim, dim, |m, n| {
            if m + 1 == n {
                (n as f64).sqrt()
            } else if n + 1 == m {
                (m as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(quadrature);
        let eigenvectors = Array2::from_shape_fn((dim, dim), |(m, k)| eig.eigenvectors[(m, k)]);
        Self {
            cutoff,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors,
        }
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    /// Truncated `D(alpha) = exp(alpha a^dagger - alpha^* a)`.
    pub fn operator(&self, alpha: PhaseSpacePoint) -> Displacement {
        let dim = self.cutoff.dim();
        let alpha = alpha.alpha();
        if alpha == C64::from(0.0) {
            return Displacement {
                alpha,
                matrix: None,
                dim,
            };
        }
        let r = alpha.norm();
        let phi = alpha.arg() - 0.5 * PI;
        let phases: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&l| C64::from_polar(1.0, r * l))
            .collect();
        let v = &self.eigenvectors;
        let mut scaled = Array2::<C64>::zeros((dim, dim));
        for m in 0..dim {
            for k in 0..dim {
                scaled[[m, k]] = phases[k] * v[[m, k]];
            }
        }
        let vt = v.t().mapv(C64::from);
        let mut matrix = scaled.dot(&vt);
        let rot: Vec<C64> = (0..dim)
            .map(|n| C64::from_polar(1.0, n as f64 * phi))
            .collect();
        for m in 0..dim {
            for n in 0..dim {
                matrix[[m, n]] *= rot[m] * rot[n].conj();
            }
        }
        Displacement {
            alpha,
            matrix: Some(matrix),
            dim,
        }
    }
}

/// A displacement operator built for one phase-space point. `None` stands
/// for the identity at `alpha = 0`.
#[derive(Debug, Clone)]
pub struct Displacement {
    alpha: C64,
    matrix: Option<Array2<C64>>,
    dim: usize,
}

impl Displacement {
    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn matrix(&self) -> Array2<C64> {
        match &self.matrix {
            Some(m) => m.clone(),
            None => Array2::eye(self.dim),
        }
    }

    /// `D rho D^dagger`, re-Hermitized and checked for truncation adequacy.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "state dimension {} does not match displacement dimension {}",
                rho.dim(),
                self.dim
            )));
        }
        let Some(d) = &self.matrix else {
            return Ok(rho.clone());
        };
        let d_adj = d.t().mapv(|z| z.conj());
        let entries = d.dot(&rho.entries).dot(&d_adj);
        let mut out = DensityMatrix {
            cutoff: rho.cutoff,
            entries,
        };
        out.hermitize();
        out.check_adequate()?;
        Ok(out)
    }
}

/// `D(alpha) rho D^dagger(alpha)` in the truncated basis of `rho`.
pub fn displace(rho: &DensityMatrix, alpha: PhaseSpacePoint) -> Result<DensityMatrix> {
    if alpha.alpha() == C64::from(0.0) {
        return Ok(rho.clone());
    }
    DisplacementBasis::new(rho.cutoff)
        .operator(alpha)
        .apply(rho)
}
