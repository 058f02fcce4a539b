//! Photon statistics measured through a three-level cascade probe atom.
//!
//! Detuning and Stark shift are expressed in units of the coupling `lambda`,
//! so `Gamma_n = (delta + stark (n+1)) / 2` and
//! `delta_n^2 = Gamma_n^2 + (n+1)(n+2)` are dimensionless and the inversion
//! oscillates as `cos(2 delta_n lambda tau)`. At zero detuning and Stark
//! shift with `sqrt((n+1)(n+2)) ~ n + 3/2` this becomes the cosine series
//! `sum_n P_n cos((2n+3) lambda tau)`, which [`invert_fourier`] inverts over
//! `tau in [0, pi/lambda]`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::PhotonStatistics;

const TAU_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomProbeParams {
    lambda: f64,
    delta: f64,
    stark: f64,
    tau_points: usize,
}

impl AtomProbeParams {
    pub fn new(lambda: f64, delta: f64, stark: f64, tau_points: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coupling lambda must be positive and finite, got {lambda}"
            )));
        }
        if !delta.is_finite() || !stark.is_finite() {
            return Err(Error::InvalidParameter(
                "detuning and Stark coefficient must be finite".into(),
            ));
        }
        if tau_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "tau_points must be at least 2, got {tau_points}"
            )));
        }
        Ok(Self {
            lambda,
            delta,
            stark,
            tau_points,
        })
    }

    /// Resonant probe without Stark shift.
    pub fn resonant(lambda: f64, tau_points: usize) -> Result<Self> {
        Self::new(lambda, 0.0, 0.0, tau_points)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn stark(&self) -> f64 {
        self.stark
    }

    pub fn tau_points(&self) -> usize {
        self.tau_points
    }

    /// `pi / lambda`.
    pub fn tau_max(&self) -> f64 {
        PI / self.lambda
    }

    /// `Gamma_n = (delta + stark (n+1)) / 2`.
    pub fn gamma_n(&self, n: usize) -> f64 {
        0.5 * (self.delta + self.stark * (n + 1) as f64)
    }

    /// `delta_n^2 = Gamma_n^2 + (n+1)(n+2)`.
    pub fn delta_n_sq(&self, n: usize) -> f64 {
        let g = self.gamma_n(n);
        g * g + ((n + 1) * (n + 2)) as f64
    }

    /// Requires `lambda / gamma >= min_ratio` so a full sweep finishes well
    /// inside the cavity lifetime.
    pub fn check_strong_coupling(&self, gamma: f64, min_ratio: f64) -> Result<()> {
        let ratio = self.lambda / gamma;
        if ratio < min_ratio {
            return Err(Error::InvalidParameter(format!(
                "lambda/gamma = {ratio} is below the strong-coupling requirement {min_ratio}"
            )));
        }
        Ok(())
    }
}

/// Inversion `W(tau)` sampled on a grid starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionSignal {
    tau: Vec<f64>,
    values: Vec<f64>,
}

impl InversionSignal {
    pub fn new(tau: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if tau.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} times but {} values",
                tau.len(),
                values.len()
            )));
        }
        if tau.len() < 2 {
            return Err(Error::InvalidGrid("fewer than two points".into()));
        }
        if tau[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "grid starts at {} instead of 0",
                tau[0]
            )));
        }
        if tau
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidGrid(
                "times are not strictly increasing".into(),
            ));
        }
        Ok(Self { tau, values })
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

/// `points` uniformly spaced times over `[0, pi/lambda]`, endpoints exact.
pub fn uniform_tau_grid(lambda: f64, points: usize) -> Vec<f64> {
    let tau_max = PI / lambda;
    let h = tau_max / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|k| k as f64 * h).collect();
    grid[points - 1] = tau_max;
    grid
}

fn check_tau(tau: f64, lambda: f64) -> Result<()> {
    let tau_max = PI / lambda;
    if !(tau >= 0.0 && tau <= tau_max * (1.0 + TAU_SLACK)) {
        return Err(Error::TauOutOfRange { tau, tau_max });
    }
    Ok(())
}

/// Cascade-atom inversion after interaction time `tau`.
pub fn population_inversion(
    p: &PhotonStatistics,
    params: &AtomProbeParams,
    tau: f64,
) -> Result<f64> {
    check_tau(tau, params.lambda)?;
    Ok(p.values()
        .iter()
        .enumerate()
        .map(|(n, pn)| {
            let d2 = params.delta_n_sq(n);
            let rabi = ((n + 1) * (n + 2)) as f64;
            pn * (params.gamma_n(n) / d2
                + rabi / d2 * (2.0 * d2.sqrt() * params.lambda * tau).cos())
        })
        .sum())
}

/// Strong-field inversion `sum_n P_n cos((2n+3) lambda tau)`.
pub fn inversion_strongfield(p: &PhotonStatistics, lambda: f64, tau: f64) -> Result<f64> {
    check_tau(tau, lambda)?;
    Ok(p.values()
        .iter()
        .enumerate()
        .map(|(n, pn)| pn * ((2 * n + 3) as f64 * lambda * tau).cos())
        .sum())
}

/// [`population_inversion`] over the uniform grid of `params`.
pub fn signal_full(p: &PhotonStatistics, params: &AtomProbeParams) -> InversionSignal {
    let tau = uniform_tau_grid(params.lambda, params.tau_points);
    let values = tau
        .iter()
        .map(|&t| population_inversion(p, params, t).expect("grid lies in range"))
        .collect();
    InversionSignal { tau, values }
}

/// [`inversion_strongfield`] over a uniform grid of `points` times.
pub fn signal_strongfield(p: &PhotonStatistics, lambda: f64, points: usize) -> InversionSignal {
    let tau = uniform_tau_grid(lambda, points);
    let values = tau
        .iter()
        .map(|&t| inversion_strongfield(p, lambda, t).expect("grid lies in range"))
        .collect();
    InversionSignal { tau, values }
}

/// Composite Simpson weights (without the step factor) for an odd number of
/// points: `1/3, 4/3, 2/3, ..., 4/3, 1/3`.
fn simpson_weights(points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| {
            if k == 0 || k == points - 1 {
                1.0 / 3.0
            } else if k % 2 == 1 {
                4.0 / 3.0
            } else {
                2.0 / 3.0
            }
        })
        .collect()
}

/// Smallest admissible grid size for recovering levels `0..=n_max`.
pub fn required_tau_points(n_max: usize) -> usize {
    8 * (n_max + 2)
}

fn check_inversion_grid(signal: &InversionSignal, lambda: f64, n_max: usize) -> Result<f64> {
    let points = signal.len();
    let required = required_tau_points(n_max);
    if points < required {
        return Err(Error::GridTooCoarse { points, required });
    }
    if points.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "Simpson quadrature needs an odd number of points, got {points}"
        )));
    }
    let tau_max = PI / lambda;
    let last = signal.tau[points - 1];
    if (last - tau_max).abs() > 1e-12 * tau_max {
        return Err(Error::InvalidGrid(format!(
            "grid ends at {last} instead of pi/lambda = {tau_max}"
        )));
    }
    let h = tau_max / (points - 1) as f64;
    if let Some(k) = (0..points).find(|&k| (signal.tau[k] - k as f64 * h).abs() > 1e-9 * h) {
        return Err(Error::InvalidGrid(format!(
            "grid is not uniform at index {k}"
        )));
    }
    Ok(h)
}

/// `P_n = (2 lambda / pi) int_0^{pi/lambda} W(tau) cos((2n+3) lambda tau) d tau`
/// by composite Simpson quadrature, for `n = 0..=n_max`.
pub fn invert_fourier(
    signal: &InversionSignal,
    lambda: f64,
    n_max: usize,
) -> Result<PhotonStatistics> {
    let h = check_inversion_grid(signal, lambda, n_max)?;
    let weights = simpson_weights(signal.len());
    let scale = 2.0 * lambda / PI * h;
    let values = (0..=n_max)
        .map(|n| {
            let freq = (2 * n + 3) as f64 * lambda;
            scale
                * signal
                    .tau
                    .iter()
                    .zip(&signal.values)
                    .zip(&weights)
                    .map(|((t, w), wk)| wk * w * (freq * t).cos())
                    .sum::<f64>()
        })
        .collect();
    Ok(PhotonStatistics::from_estimate(values))
}

/// Standard deviation of each inverted `P_n` for independent errors
/// `sigma_w` on the signal samples, propagated linearly through the
/// quadrature.
pub fn propagate_inversion_sigma(
    signal: &InversionSignal,
    sigma_w: &[f64],
    lambda: f64,
    n_max: usize,
) -> Result<Vec<f64>> {
    let h = check_inversion_grid(signal, lambda, n_max)?;
    if sigma_w.len() != signal.len() {
        return Err(Error::InvalidGrid(format!(
            "{} uncertainties for {} samples",
            sigma_w.len(),
            signal.len()
        )));
    }
    let weights = simpson_weights(signal.len());
    let scale = 2.0 * lambda / PI * h;
    Ok((0..=n_max)
        .map(|n| {
            let freq = (2 * n + 3) as f64 * lambda;
            let var: f64 = signal
                .tau
                .iter()
                .zip(sigma_w)
                .zip(&weights)
                .map(|((t, s), wk)| {
                    let c = wk * s * (freq * t).cos();
                    c * c
                })
                .sum();
            scale * var.sqrt()
        })
        .collect())
}

/// Finite-atom measurement: at each time, `shots` atoms are found up with
/// probability `(1 + W)/2`; the empirical inversion is returned.
pub fn sample_inversion(
    signal: &InversionSignal,
    shots: u64,
    seed: u64,
) -> Result<InversionSignal> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(signal.len());
    for (index, &w) in signal.values.iter().enumerate() {
        if w.is_nan() || w.abs() > 1.0 + 1e-9 {
            return Err(Error::InvalidSignal { index, value: w });
        }
        let up_probability = (0.5 * (1.0 + w.clamp(-1.0, 1.0))).clamp(0.0, 1.0);
        let up = Binomial::new(shots, up_probability)
            .expect("probability in [0, 1]")
            .sample(&mut rng);
        values.push(2.0 * up as f64 / shots as f64 - 1.0);
    }
    Ok(InversionSignal {
        tau: signal.tau.clone(),
        values,
    })
}

/// Binomial standard deviation of an inversion estimated from `shots` atoms.
pub fn inversion_sigma(signal: &InversionSignal, shots: u64) -> Vec<f64> {
    signal
        .values
        .iter()
        .map(|w| ((1.0 - w * w).max(0.0) / shots as f64).sqrt())
        .collect()
}
