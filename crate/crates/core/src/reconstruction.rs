//! Quasiprobability reconstruction from decayed photon statistics.
//!
//! With `chi(s;t) = 1 + 2 e^{gamma t}/(s - 1)`, the binomial decay map sends
//! `chi^m` back to `((s+1)/(s-1))^n` level by level, so
//!
//! ```text
//! -2/(pi (s-1)) sum_m chi^m P_m(alpha; t) = -2/(pi (s-1)) sum_n ((s+1)/(s-1))^n <n|rho_alpha|n>
//! ```
//!
//! for every `t`. The left side is [`reconstruct_point`]; the right side is
//! the direct evaluation [`wigner_direct`], used as the oracle. The two share
//! no summation code.
//!
//! For `t > 0` and `s = 0`, `|chi| > 1`, so any error in `P_m` is amplified by
//! `|chi|^m`. Each reconstructed point reports a truncation bound and the
//! amplification factor `sum_m |chi|^m` alongside the value.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::dissipation::DecayParams;
use crate::error::{Error, Result};
use crate::fock::{
    DensityMatrix, Displacement, DisplacementBasis, PhaseSpacePoint, PhotonStatistics,
};
use crate::summation::NeumaierSum;

/// `|chi|^{n_max} * (largest top-band probability)` above which a point is
/// flagged.
pub const TRUNCATION_WARNING_LEVEL: f64 = 1e-6;

/// Ordering parameter `s < 1` of the quasiprobability family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SParameter(f64);

impl SParameter {
    pub const WIGNER: SParameter = SParameter(0.0);
    pub const HUSIMI: SParameter = SParameter(-1.0);

    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s >= 1.0 {
            return Err(Error::SingularParameter(s));
        }
        Ok(Self(s))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// `-2 / (pi (s - 1))`.
    pub fn prefactor(&self) -> f64 {
        -2.0 / (PI * (self.0 - 1.0))
    }

    /// `(s + 1) / (s - 1)`, the per-level ratio of the direct series.
    pub fn level_ratio(&self) -> f64 {
        (self.0 + 1.0) / (self.0 - 1.0)
    }
}

/// The reconstruction weight `chi` with the parameters it was built for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionWeight {
    pub chi: f64,
    pub prefactor: f64,
    pub decay: DecayParams,
    pub s: SParameter,
}

/// `chi(s; t) = 1 + 2 e^{gamma t} / (s - 1)`.
pub fn chi_weight(params: DecayParams, s: SParameter) -> ReconstructionWeight {
    let growth = params.gamma_t().exp();
    ReconstructionWeight {
        chi: 1.0 + 2.0 * growth / (s.value() - 1.0),
        prefactor: s.prefactor(),
        decay: params,
        s,
    }
}

/// Wigner weight `chi(t) = 1 - 2 e^{gamma t}` with prefactor `2/pi`.
pub fn wigner_weight(params: DecayParams) -> ReconstructionWeight {
    let growth = params.gamma_t().exp();
    ReconstructionWeight {
        chi: 1.0 - 2.0 * growth,
        prefactor: 2.0 / PI,
        decay: params,
        s: SParameter::WIGNER,
    }
}

/// One reconstructed phase-space value with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiProbPoint {
    pub alpha: PhaseSpacePoint,
    pub value: f64,
    /// `prefactor * |chi|^{n_max+1} * (top-band mass)`.
    pub trunc_error_bound: f64,
    /// `sum_m |chi|^m`.
    pub noise_amp: f64,
    /// Set when `|chi|^{n_max} * max top-band P_m` exceeds
    /// [`TRUNCATION_WARNING_LEVEL`].
    pub truncation_warning: bool,
}

/// Reconstruct `F(alpha; s)` from statistics measured at time `t`.
///
/// `p` must be the diagonal of the displaced state after decay by `params`.
pub fn reconstruct_point(
    alpha: PhaseSpacePoint,
    p: &PhotonStatistics,
    params: DecayParams,
    s: SParameter,
) -> QuasiProbPoint {
    weighted_sum(alpha, p, chi_weight(params, s))
}

/// Dedicated `s = 0` path.
pub fn reconstruct_wigner(
    alpha: PhaseSpacePoint,
    p: &PhotonStatistics,
    params: DecayParams,
) -> QuasiProbPoint {
    weighted_sum(alpha, p, wigner_weight(params))
}

fn weighted_sum(
    alpha: PhaseSpacePoint,
    p: &PhotonStatistics,
    w: ReconstructionWeight,
) -> QuasiProbPoint {
    let values = p.values();
    let chi_abs = w.chi.abs();
    let mut sum = NeumaierSum::new();
    let mut amp = NeumaierSum::new();
    let mut power = 1.0;
    let mut power_abs = 1.0;
    for &pm in values {
        sum.add(power * pm);
        amp.add(power_abs);
        power *= w.chi;
        power_abs *= chi_abs;
    }
    let n_max = p.n_max();
    let top_mass = p.top_band_mass();
    let top_start = n_max + 1 - (n_max + 1).div_ceil(10);
    let top_max = values[top_start..].iter().copied().fold(0.0, f64::max);
    let chi_top = chi_abs.powi(n_max as i32);
    let truncation_warning = chi_top * top_max > TRUNCATION_WARNING_LEVEL;
    QuasiProbPoint {
        alpha,
        value: w.prefactor * sum.value(),
        trunc_error_bound: w.prefactor.abs() * chi_top * chi_abs * top_mass,
        noise_amp: amp.value(),
        truncation_warning,
    }
}

/// One-sigma uncertainty of `F` for independent errors `sigma_m` on `P_m`:
/// `prefactor * sqrt(sum_m chi^{2m} sigma_m^2)`.
pub fn noise_amplification(p_sigma: &[f64], weight: &ReconstructionWeight) -> f64 {
    let chi2 = weight.chi * weight.chi;
    let mut power = 1.0;
    let mut acc = NeumaierSum::new();
    for sigma in p_sigma {
        acc.add(power * sigma * sigma);
        power *= chi2;
    }
    weight.prefactor.abs() * acc.value().sqrt()
}

/// `prefactor * sum_n r^n <n|rho_alpha|n>` for an already displaced state.
pub fn quasiprob_of_displaced(rho_alpha: &DensityMatrix, s: SParameter) -> f64 {
    let r = s.level_ratio();
    let mut acc = 0.0;
    for (n, z) in rho_alpha.entries().diag().iter().enumerate() {
        acc += r.powi(n as i32) * z.re;
    }
    s.prefactor() * acc
}

/// Direct evaluation of `F(alpha; s)` on the undamped displaced state.
pub fn wigner_direct(rho0: &DensityMatrix, alpha: PhaseSpacePoint, s: SParameter) -> Result<f64> {
    let displaced = DisplacementBasis::new(rho0.cutoff())
        .operator(alpha)
        .apply(rho0)?;
    Ok(quasiprob_of_displaced(&displaced, s))
}

/// As [`wigner_direct`] with a prebuilt displacement operator.
pub fn wigner_direct_with(
    rho0: &DensityMatrix,
    displacement: &Displacement,
    s: SParameter,
) -> Result<f64> {
    Ok(quasiprob_of_displaced(&displacement.apply(rho0)?, s))
}

/// Logs a single summary line for flagged points.
pub fn report_truncation_warnings(points: &[QuasiProbPoint]) -> usize {
    let flagged = points.iter().filter(|p| p.truncation_warning).count();
    if flagged > 0 {
        warn!(
            "{flagged} of {} points exceed the truncation warning level {TRUNCATION_WARNING_LEVEL:e}",
            points.len()
        );
    }
    flagged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::dissipate;
    use crate::fock::{
        cat_state, coherent_state, displace, fock_state, parity_expectation, FockCutoff,
    };
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C64;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_2_PI;

    fn decay(gt: f64) -> DecayParams {
        DecayParams::new(1.0, gt).unwrap()
    }

    fn cutoff(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    fn origin() -> PhaseSpacePoint {
        PhaseSpacePoint::new(0.0, 0.0)
    }

    fn protocol(
        rho0: &DensityMatrix,
        alpha: PhaseSpacePoint,
        gt: f64,
        s: SParameter,
    ) -> QuasiProbPoint {
        let displaced = displace(rho0, alpha).unwrap();
        let decayed = dissipate(&displaced, decay(gt));
        reconstruct_point(alpha, &decayed.photon_statistics(), decay(gt), s)
    }

    #[test]
    fn s_parameter_validation() {
        assert_eq!(SParameter::new(1.0), Err(Error::SingularParameter(1.0)));
        assert!(SParameter::new(1.5).is_err());
        assert!(SParameter::new(f64::NAN).is_err());
        assert!(SParameter::new(-0.5).is_ok());
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi_weight(decay(0.0), SParameter::WIGNER).chi, -1.0);
        assert_abs_diff_eq!(
            chi_weight(decay(2f64.ln()), SParameter::WIGNER).chi,
            -3.0,
            epsilon = 1e-15
        );
        assert_eq!(chi_weight(decay(0.0), SParameter::HUSIMI).chi, 0.0);
        for gt in [0.0, 0.013, 0.1, 0.3, 0.5, 1.7] {
            let general = chi_weight(decay(gt), SParameter::WIGNER);
            let dedicated = wigner_weight(decay(gt));
            assert_eq!(general.chi.to_bits(), dedicated.chi.to_bits());
            assert_eq!(general.prefactor.to_bits(), dedicated.prefactor.to_bits());
        }
    }

    #[test]
    fn chi_decreases_with_time() {
        let mut last = chi_weight(decay(0.0), SParameter::WIGNER).chi;
        for k in 1..50 {
            let chi = chi_weight(decay(k as f64 * 0.02), SParameter::WIGNER).chi;
            assert!(chi < last && chi <= -1.0);
            last = chi;
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn vacuum_reconstructs_to_two_over_pi() {
        let vac = fock_state(0, cutoff(10)).unwrap();
        for gt in [0.0, 0.1, 0.5] {
            let point = protocol(&vac, origin(), gt, SParameter::WIGNER);
            assert_abs_diff_eq!(point.value, 0.6366198, epsilon = 1e-7);
            assert_abs_diff_eq!(point.value, 2.0 / PI, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_photon_time_cancellation() {
        let gt = 0.1f64;
        let e = (-gt).exp();
        let p = PhotonStatistics::new(vec![1.0 - e, e]).unwrap();
        let point = reconstruct_point(origin(), &p, decay(gt), SParameter::WIGNER);
        // (1 - e^{-gt}) + (1 - 2e^{gt}) e^{-gt} = -1
        assert_abs_diff_eq!(point.value, -2.0 / PI, epsilon = 1e-15);
        let via_protocol = protocol(
            &fock_state(1, cutoff(10)).unwrap(),
            origin(),
            gt,
            SParameter::WIGNER,
        );
        assert_abs_diff_eq!(via_protocol.value, -2.0 / PI, epsilon = 1e-14);
    }

    #[test]
    fn husimi_at_zero_time_keeps_only_vacuum_term() {
        let p = PhotonStatistics::new(vec![0.3, 0.5, 0.2]).unwrap();
        let point = reconstruct_point(origin(), &p, decay(0.0), SParameter::HUSIMI);
        assert_abs_diff_eq!(point.value, 0.3 / PI, epsilon = 1e-16);
        assert_eq!(point.noise_amp, 1.0);
    }

    #[test]
    fn direct_examples() {
        let vac = fock_state(0, cutoff(10)).unwrap();
        assert_eq!(
            wigner_direct(&vac, origin(), SParameter::WIGNER).unwrap(),
            2.0 / PI
        );
        let one = fock_state(1, cutoff(10)).unwrap();
        assert_eq!(
            wigner_direct(&one, origin(), SParameter::WIGNER).unwrap(),
            -2.0 / PI
        );

        let coh = coherent_state(C64::from(1.0), cutoff(40)).unwrap();
        let at_minus_beta =
            wigner_direct(&coh, PhaseSpacePoint::new(-1.0, 0.0), SParameter::WIGNER).unwrap();
        assert_abs_diff_eq!(at_minus_beta, 2.0 / PI, epsilon = 1e-10);
        // closed form (2/pi) exp(-2|alpha + beta|^2)
        for (re, im) in [(0.0, 0.0), (-0.5, 0.3), (0.4, -0.8)] {
            let alpha = C64::new(re, im);
            let w = wigner_direct(&coh, alpha.into(), SParameter::WIGNER).unwrap();
            let closed = FRAC_2_PI * (-2.0 * (alpha + 1.0).norm_sqr()).exp();
            assert_abs_diff_eq!(w, closed, epsilon = 1e-10);
        }
    }

    #[test]
    fn direct_wigner_is_scaled_displaced_parity() {
        let rho = cat_state(C64::new(1.0, 0.5), 0.4, cutoff(40)).unwrap();
        let alpha = PhaseSpacePoint::new(0.3, -0.7);
        let direct = wigner_direct(&rho, alpha, SParameter::WIGNER).unwrap();
        let parity = parity_expectation(&displace(&rho, alpha).unwrap());
        assert_eq!(direct.to_bits(), (2.0 / PI * parity).to_bits());
    }

    #[test]
    fn husimi_is_coherent_overlap() {
        let rho = cat_state(C64::new(1.5, 0.0), 0.0, cutoff(50)).unwrap();
        for (re, im) in [(0.0, 0.0), (0.7, 0.2), (-1.4, 0.5)] {
            let alpha = PhaseSpacePoint::new(re, im);
            let point = protocol(&rho, alpha, 0.0, SParameter::HUSIMI);
            let probe = coherent_state(-alpha.alpha(), cutoff(50)).unwrap();
            assert_abs_diff_eq!(PI * point.value, rho.overlap(&probe), epsilon = 1e-8);
        }
    }

    #[test]
    fn noise_amplification_examples() {
        let w = wigner_weight(decay(0.1));
        assert_eq!(noise_amplification(&[0.0; 21], &w), 0.0);
        let mut single = vec![0.0; 21];
        single[0] = 0.01;
        assert_abs_diff_eq!(
            noise_amplification(&single, &w),
            2.0 / PI * 0.01,
            epsilon = 1e-18
        );

        let uniform = vec![1e-3; 21];
        let direct = |gt: f64| {
            let chi = 1.0 - 2.0 * gt.exp();
            let s: f64 = (0..21).map(|m| chi.powi(2 * m) * 1e-6).sum();
            2.0 / PI * s.sqrt()
        };
        assert_abs_diff_eq!(
            noise_amplification(&uniform, &w),
            direct(0.1),
            epsilon = 1e-12 * direct(0.1)
        );
        let mut last = 0.0;
        for gt in [0.0, 0.05, 0.1, 0.2, 0.4] {
            let v = noise_amplification(&uniform, &wigner_weight(decay(gt)));
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn even_cat_parity_at_origin_survives_decay() {
        let cat = cat_state(C64::from(2.0), 0.0, cutoff(60)).unwrap();
        for gt in [0.0, 0.05, 0.2, 0.5] {
            let point = protocol(&cat, origin(), gt, SParameter::WIGNER);
            assert_abs_diff_eq!(point.value, 2.0 / PI, epsilon = 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn time_cancellation_identity(
            re in -1.5f64..1.5,
            im in -1.5f64..1.5,
            gt in 0.0f64..0.5,
            s_index in 0usize..3,
            beta in 0.0f64..1.5,
            phase in 0.0f64..3.0,
        ) {
            let s = SParameter::new([0.0, -0.5, -1.0][s_index]).unwrap();
            let rho = cat_state(C64::new(beta, 0.3), phase, cutoff(50)).unwrap();
            let alpha = PhaseSpacePoint::new(re, im);
            let point = protocol(&rho, alpha, gt, s);
            let direct = wigner_direct(&rho, alpha, s).unwrap();
            prop_assert!((point.value - direct).abs() < 1e-8 + point.trunc_error_bound);
            if s == SParameter::WIGNER {
                prop_assert!(point.value.abs() <= 2.0 / PI + 1e-9);
            }
            prop_assert!(point.noise_amp >= 1.0);
            prop_assert!(point.trunc_error_bound >= 0.0);
        }
    }
}
