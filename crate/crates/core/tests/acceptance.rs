//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::{FRAC_2_PI, PI};
use std::process::ExitCode;
use std::time::Instant;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use wigner_recon::dissipation::{
    binomial_map, dissipate, evolve_diagonals, integrate_master_equation, DecayParams,
};
use wigner_recon::fock::{cat_state, coherent_state, DisplacementBasis, FockCutoff};
use wigner_recon::pipeline::{
    compare_with_oracle, run_scan, GridSpec, ProbeMode, ProbeSpec, QuasiProbGrid, ScanConfig,
    StateSpec,
};
use wigner_recon::probe::{invert_fourier, sample_inversion, signal_strongfield};
use wigner_recon::reconstruction::{reconstruct_point, reconstruct_wigner, SParameter};

const N_MAX: usize = 60;
// Corner points of the [-3, 3] grid push displaced states against the cutoff;
// the default budget of 1e-10 would reject them.
const TAIL_BUDGET: f64 = 1e-3;

fn states() -> Vec<(&'static str, StateSpec)> {
    vec![
        ("vacuum", StateSpec::Fock { n: 0 }),
        ("fock(1)", StateSpec::Fock { n: 1 }),
        (
            "coherent(1.5)",
            StateSpec::Coherent {
                beta: C64::new(1.5, 0.0),
            },
        ),
        (
            "cat(2)",
            StateSpec::Cat {
                beta: C64::new(2.0, 0.0),
                phase: 0.0,
            },
        ),
    ]
}

fn square_grid() -> GridSpec {
    GridSpec {
        re: [-3.0, 3.0],
        im: [-3.0, 3.0],
        re_count: 41,
        im_count: 41,
    }
}

fn config(state: &StateSpec, gamma_t: f64, s: f64) -> ScanConfig {
    ScanConfig {
        state: state.clone(),
        n_max: N_MAX,
        tail_budget: TAIL_BUDGET,
        gamma: 1.0,
        t: gamma_t,
        s,
        max_gamma_t: 0.5,
        grid: square_grid(),
        probe: ProbeSpec::default(),
        output: None,
        reflect_axes: false,
        oracle_tolerance: 1e-8,
    }
}

fn cutoff(n_max: usize) -> FockCutoff {
    FockCutoff::new(n_max)
        .unwrap()
        .with_tail_budget(TAIL_BUDGET)
        .unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn below(value: f64, limit: f64, what: &str) -> Self {
        Outcome {
            pass: value < limit,
            detail: format!("{what} = {value:.3e} (limit {limit:.0e})"),
        }
    }

    fn and(self, other: Outcome) -> Self {
        Outcome {
            pass: self.pass && other.pass,
            detail: format!("{}; {}", self.detail, other.detail),
        }
    }
}

fn time_cancellation(scans: &[QuasiProbGrid]) -> Outcome {
    let (mut worst, mut which) = (0.0f64, "");
    for (grid, (name, state)) in scans.iter().zip(states()) {
        let rho0 = state.prepare(cutoff(N_MAX)).unwrap();
        let dev = compare_with_oracle(grid, &rho0).unwrap().max_deviation;
        if dev >= worst {
            (worst, which) = (dev, name);
        }
    }
    Outcome::below(worst, 1e-8, &format!("max |F - F_oracle| ({which})"))
}

fn t_independence(at_01: &[QuasiProbGrid]) -> Outcome {
    let mut worst = 0.0f64;
    for (grid_01, (_, state)) in at_01.iter().zip(states()) {
        let a = run_scan(&config(&state, 0.02, 0.0)).unwrap();
        let c = run_scan(&config(&state, 0.3, 0.0)).unwrap();
        for (x, y) in [(&a, grid_01), (&a, &c), (grid_01, &c)] {
            worst = worst.max(x.max_abs_deviation(y).unwrap());
        }
    }
    Outcome::below(worst, 1e-6, "max pairwise deviation")
}

fn dissipation_oracle() -> Outcome {
    let rho = cat_state(C64::new(2.0, 0.0), 0.0, FockCutoff::new(N_MAX).unwrap()).unwrap();
    let params = DecayParams::new(1.0, 0.1).unwrap();
    let exact = dissipate(&rho, params);
    let integrated = integrate_master_equation(&rho, params, 1000).unwrap();
    let diag = evolve_diagonals(&rho.photon_statistics(), params);
    let diag_err = exact
        .diagonal()
        .iter()
        .zip(diag.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Outcome::below(exact.max_abs_diff(&integrated), 1e-6, "max |exact - RK4|").and(Outcome::below(
        diag_err,
        1e-10,
        "diagonal vs binomial map",
    ))
}

fn fourier_round_trip() -> Outcome {
    let p = coherent_state(C64::new(1.0, 0.0), FockCutoff::new(N_MAX).unwrap())
        .unwrap()
        .photon_statistics();
    let lambda = 1000.0;
    let signal = signal_strongfield(&p, lambda, 4097);
    let back = invert_fourier(&signal, lambda, 30).unwrap();
    let err = back
        .values()
        .iter()
        .zip(p.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Outcome::below(err, 1e-6, "max |dP_n|, n <= 30")
}

fn coherent_amplitudes(beta: C64, dim: usize) -> Array1<C64> {
    let mut amp = Array1::zeros(dim);
    amp[0] = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 1..dim {
        amp[n] = amp[n - 1] * beta / (n as f64).sqrt();
    }
    amp
}

fn s_parametrization() -> Outcome {
    let mut worst = 0.0f64;
    let mut identical = true;
    let basis = DisplacementBasis::new(cutoff(N_MAX));
    let at_zero = DecayParams::new(1.0, 0.0).unwrap();
    let decayed = DecayParams::new(1.0, 0.1).unwrap();
    for (_, state) in states() {
        let rho0 = state.prepare(cutoff(N_MAX)).unwrap();
        for alpha in square_grid().points() {
            let displaced = basis.operator(alpha).apply(&rho0).unwrap();
            let husimi = reconstruct_point(
                alpha,
                &displaced.photon_statistics(),
                at_zero,
                SParameter::HUSIMI,
            );
            let ket = coherent_amplitudes(-alpha.alpha(), rho0.dim());
            let bra = ket.mapv(|z| z.conj());
            let expectation = bra.dot(&rho0.entries().dot(&ket)).re / PI;
            worst = worst.max((husimi.value - expectation).abs());

            let p = dissipate(&displaced, decayed).photon_statistics();
            let general = reconstruct_point(alpha, &p, decayed, SParameter::WIGNER);
            let dedicated = reconstruct_wigner(alpha, &p, decayed);
            identical &= general.value.to_bits() == dedicated.value.to_bits();
        }
    }
    Outcome::below(worst, 1e-8, "max |Q - <-a|rho|-a>/pi|").and(Outcome {
        pass: identical,
        detail: format!("s = 0 bit-identical to Wigner path: {identical}"),
    })
}

fn physicality(scans: &[QuasiProbGrid]) -> Outcome {
    let basis = DisplacementBasis::new(cutoff(N_MAX));
    let params = DecayParams::new(1.0, 0.1).unwrap();
    let coarse = GridSpec {
        re: [-3.0, 3.0],
        im: [-3.0, 3.0],
        re_count: 13,
        im_count: 13,
    };
    let (mut trace_err, mut herm_err) = (0.0f64, 0.0f64);
    for (_, state) in states() {
        let rho0 = state.prepare(cutoff(N_MAX)).unwrap();
        for alpha in coarse.points() {
            let rho = dissipate(&basis.operator(alpha).apply(&rho0).unwrap(), params);
            trace_err = trace_err.max((rho.trace() - 1.0).norm());
            herm_err = herm_err.max(rho.hermiticity_error());
        }
    }

    let bound_excess = scans
        .iter()
        .flat_map(|g| g.points.iter())
        .map(|p| p.value.abs() - FRAC_2_PI)
        .fold(f64::NEG_INFINITY, f64::max);

    // Cat lobes sit at +-2 on the real axis, so integrate over a wider window.
    let wide = GridSpec {
        re: [-5.0, 5.0],
        im: [-3.0, 3.0],
        re_count: 51,
        im_count: 31,
    };
    let mut norm_err = 0.0f64;
    for (_, state) in states() {
        let mut cfg = config(&state, 0.1, 0.0);
        cfg.n_max = 100;
        cfg.grid = wide.clone();
        norm_err = norm_err.max((run_scan(&cfg).unwrap().integral() - 1.0).abs());
    }

    let mut column_err = 0.0f64;
    for gt in [0.02, 0.1, 0.3, 0.5] {
        let b = binomial_map(301, DecayParams::new(1.0, gt).unwrap());
        for col in b.columns() {
            column_err = column_err.max((col.sum() - 1.0).abs());
        }
    }

    Outcome::below(trace_err, 1e-9, "trace error")
        .and(Outcome::below(herm_err, 1e-12, "hermiticity error"))
        .and(Outcome {
            pass: bound_excess <= 1e-9,
            detail: format!("max |F| - 2/pi = {bound_excess:.3e} (limit 1e-9)"),
        })
        .and(Outcome::below(norm_err, 1e-2, "|integral - 1|"))
        .and(Outcome::below(column_err, 1e-12, "column-sum error"))
}

fn stochastic_robustness() -> Outcome {
    let cat = StateSpec::Cat {
        beta: C64::new(2.0, 0.0),
        phase: 0.0,
    };
    let mut cfg = config(&cat, 0.1, 0.0);
    cfg.grid = GridSpec {
        re: [0.0, 0.0],
        im: [0.0, 0.0],
        re_count: 1,
        im_count: 1,
    };
    cfg.probe = ProbeSpec {
        mode: ProbeMode::Sampled,
        shots: Some(10_000),
        seed: 2024,
        levels: Some(20),
        ..ProbeSpec::default()
    };
    let f0 = run_scan(&cfg).unwrap().points[0].value;

    let params = DecayParams::new(1.0, 0.1).unwrap();
    let rho = cat.prepare(cutoff(N_MAX)).unwrap();
    let exact = dissipate(&rho, params).photon_statistics();
    let lambda = cfg.probe.lambda;
    let clean = signal_strongfield(&exact, lambda, cfg.probe.tau_points);
    let rms = |shots: u64| -> f64 {
        let seeds = 0..8u64;
        let mut sq = 0.0;
        let mut count = 0usize;
        for seed in seeds {
            let noisy = sample_inversion(&clean, shots, seed).unwrap();
            let est = invert_fourier(&noisy, lambda, 20).unwrap();
            for (a, b) in est.values().iter().zip(exact.values()) {
                sq += (a - b).powi(2);
                count += 1;
            }
        }
        (sq / count as f64).sqrt()
    };
    let ratio = rms(1_000) / rms(100_000);
    Outcome::below((f0 - FRAC_2_PI).abs(), 0.1, "|F(0) - 2/pi|").and(Outcome {
        pass: (5.0..=20.0).contains(&ratio),
        detail: format!("RMS ratio 1e3/1e5 shots = {ratio:.2} (range [5, 20])"),
    })
}

fn main() -> ExitCode {
    let start = Instant::now();
    let scans: Vec<QuasiProbGrid> = states()
        .iter()
        .map(|(_, s)| run_scan(&config(s, 0.1, 0.0)).unwrap())
        .collect();
    println!("reference scans: {:.1} s", start.elapsed().as_secs_f64());

    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        (
            "time-cancellation identity",
            Box::new(|| time_cancellation(&scans)),
        ),
        (
            "independence from decay time",
            Box::new(|| t_independence(&scans)),
        ),
        (
            "dissipation oracle equivalence",
            Box::new(dissipation_oracle),
        ),
        ("Fourier round trip", Box::new(fourier_round_trip)),
        ("s-parametrization", Box::new(s_parametrization)),
        ("physicality", Box::new(|| physicality(&scans))),
        ("stochastic robustness", Box::new(stochastic_robustness)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = check();
        failures += usize::from(!outcome.pass);
        println!(
            "{} [{}] {name}: {} ({:.1} s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
