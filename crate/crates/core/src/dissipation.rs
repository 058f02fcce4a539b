//! Zero-temperature amplitude damping of the cavity mode.
//!
//! The generator `d rho/dt = J rho + L rho` splits into the jump part
//! `J rho = gamma a rho a^dagger` and the drift part
//! `L rho = -(gamma/2)(a^dagger a rho + rho a^dagger a)`. The exact map
//! factorizes as `exp(L t) exp[(J/gamma) q]` with `q = 1 - e^{-gamma t}`;
//! [`dissipate`] evaluates it directly and [`integrate_master_equation`]
//! is an independent fixed-step RK4 integration of the generator.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, PhotonStatistics};

/// Largest `gamma * dt` accepted by the RK4 oracle.
pub const MAX_RK4_STEP: f64 = 1e-2;

const SERIES_CUTOFF: f64 = 1e-18;

/// Decay rate `gamma` and elapsed time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    gamma: f64,
    t: f64,
}

impl DecayParams {
    pub fn new(gamma: f64, t: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay constant gamma must be positive and finite, got {gamma}"
            )));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay time t must be nonnegative and finite, got {t}"
            )));
        }
        Ok(Self { gamma, t })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma_t(&self) -> f64 {
        self.gamma * self.t
    }

    /// `q = 1 - e^{-gamma t}`.
    pub fn q(&self) -> f64 {
        -(-self.gamma_t()).exp_m1()
    }

    /// `e^{-gamma t}`.
    pub fn survival(&self) -> f64 {
        (-self.gamma_t()).exp()
    }
}

/// `gamma a rho a^dagger`.
pub fn apply_jump(rho: &DensityMatrix, gamma: f64) -> Array2<C64> {
    jump(rho.entries(), gamma)
}

/// `-(gamma/2)(a^dagger a rho + rho a^dagger a)`.
pub fn apply_drift(rho: &DensityMatrix, gamma: f64) -> Array2<C64> {
    drift(rho.entries(), gamma)
}

fn jump(x: &Array2<C64>, gamma: f64) -> Array2<C64> {
    let dim = x.nrows();
    Array2::from_shape_fn((dim, dim), |(m, n)| {
        if m + 1 < dim && n + 1 < dim {
            x[[m + 1, n + 1]] * (gamma * (((m + 1) * (n + 1)) as f64).sqrt())
        } else {
            C64::from(0.0)
        }
    })
}

fn drift(x: &Array2<C64>, gamma: f64) -> Array2<C64> {
    Array2::from_shape_fn(x.dim(), |(m, n)| {
        x[[m, n]] * (-0.5 * gamma * (m + n) as f64)
    })
}

fn generator(x: &Array2<C64>, gamma: f64) -> Array2<C64> {
    let dim = x.nrows();
    Array2::from_shape_fn((dim, dim), |(m, n)| {
        let mut v = x[[m, n]] * (-0.5 * gamma * (m + n) as f64);
        if m + 1 < dim && n + 1 < dim {
            v += x[[m + 1, n + 1]] * (gamma * (((m + 1) * (n + 1)) as f64).sqrt());
        }
        v
    })
}

/// Exact damped state `exp(L t) exp[(J/gamma) q] rho`.
///
/// The jump series `sum_k (q^k / k!) a^k rho a^dagger^k` is built with the
/// term recurrence `T_k(m,n) = (q/k) sqrt((m+1)(n+1)) T_{k-1}(m+1,n+1)`; it
/// terminates at `k = n_max` and stops earlier once a term falls below 1e-18.
pub fn dissipate(rho: &DensityMatrix, params: DecayParams) -> DensityMatrix {
    if params.t == 0.0 {
        return rho.clone();
    }
    let dim = rho.dim();
    let q = params.q();
    let mut acc = rho.entries().clone();
    let mut term = rho.entries().clone();
    for k in 1..dim {
        let scale = q / k as f64;
        let next = Array2::from_shape_fn((dim, dim), |(m, n)| {
            if m + 1 < dim && n + 1 < dim {
                term[[m + 1, n + 1]] * (scale * (((m + 1) * (n + 1)) as f64).sqrt())
            } else {
                C64::from(0.0)
            }
        });
        term = next;
        acc += &term;
        let largest = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if largest < SERIES_CUTOFF {
            break;
        }
    }
    let half_rate = 0.5 * params.gamma_t();
    let decay: Vec<f64> = (0..dim).map(|m| (-half_rate * m as f64).exp()).collect();
    for ((m, n), z) in acc.indexed_iter_mut() {
        *z *= decay[m] * decay[n];
    }
    DensityMatrix::from_entries(rho.cutoff(), acc).expect("shape preserved")
}

/// Column-stochastic matrix `B(m,n) = C(n,m) e^{-m gamma t} q^{n-m}` for
/// `m <= n`, zero otherwise.
///
/// Each row is built by the recurrence
/// `B(m,n+1) = B(m,n) q (n+1)/(n+1-m)` starting from `B(m,m) = e^{-m gamma t}`,
/// so `t = 0` is regular and no factorial is ever formed.
pub fn binomial_map(dim: usize, params: DecayParams) -> Array2<f64> {
    let q = params.q();
    let p = params.survival();
    let mut b = Array2::zeros((dim, dim));
    for m in 0..dim {
        let mut w = p.powi(m as i32);
        b[[m, m]] = w;
        for n in m..dim - 1 {
            w *= q * (n + 1) as f64 / (n + 1 - m) as f64;
            b[[m, n + 1]] = w;
        }
    }
    b
}

/// Diagonal evolution `P_m(t) = sum_{n >= m} C(n,m) e^{-m gamma t} q^{n-m} P_n(0)`.
pub fn evolve_diagonals(p0: &PhotonStatistics, params: DecayParams) -> PhotonStatistics {
    let dim = p0.values().len();
    let b = binomial_map(dim, params);
    let values = (0..dim)
        .map(|m| (m..dim).map(|n| b[[m, n]] * p0.values()[n]).sum::<f64>())
        .collect();
    PhotonStatistics::from_estimate(values)
}

/// Fixed-step classical RK4 integration of `d rho/dt = J rho + L rho`.
pub fn integrate_master_equation(
    rho: &DensityMatrix,
    params: DecayParams,
    steps: usize,
) -> Result<DensityMatrix> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    let ratio = params.gamma_t() / steps as f64;
    if ratio > MAX_RK4_STEP {
        return Err(Error::StepSize {
            ratio,
            limit: MAX_RK4_STEP,
        });
    }
    let gamma = params.gamma;
    let h = params.t / steps as f64;
    let mut x = rho.entries().clone();
    for _ in 0..steps {
        let k1 = generator(&x, gamma);
        let k2 = generator(&(&x + &k1.mapv(|z| z * (0.5 * h))), gamma);
        let k3 = generator(&(&x + &k2.mapv(|z| z * (0.5 * h))), gamma);
        let k4 = generator(&(&x + &k3.mapv(|z| z * h)), gamma);
        let incr = (k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (h / 6.0));
        x += &incr;
    }
    DensityMatrix::from_entries(rho.cutoff(), x)
}
