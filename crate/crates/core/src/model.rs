//! Truncated-photocounting receiver model: optimized `nu`, tuned receiver gain,
//! and the predicted quantum advantage over parameter grids.

use serde::{Deserialize, Serialize};

use crate::analytic::{advantage, classical_bound};
use crate::detector::{optimize_nu, outcome_distribution, NuAssignment, NuOptimum, PhotocountModel};
use crate::error::{Error, Result};
use crate::gaussian::{receiver_mean_photons, Hypothesis, RadarParams};
use crate::optim::golden_section_max;
use crate::scalar::Scalar;

/// Default receiver-gain search bracket and tolerance.
pub const GAIN_BRACKET: (f64, f64) = (1.0, 1.2);
pub const GAIN_TOL: f64 = 1e-5;

/// Best exponent of the truncated counting receiver at fixed parameters.
pub fn truncated_exponent<T: Scalar>(params: &RadarParams<T>, model: &PhotocountModel<T>) -> Result<NuOptimum<T>> {
    let mu_yes = receiver_mean_photons(params, Hypothesis::Present)?;
    let mu_no = receiver_mean_photons(params, Hypothesis::Absent)?;
    Ok(optimize_nu(&outcome_distribution(mu_yes, model), &outcome_distribution(mu_no, model)))
}

/// Model prediction at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint<T = f64> {
    pub g_rx: T,
    pub exponent: T,
    pub nu: NuAssignment<T>,
    pub e_cl: T,
    pub q: T,
    /// False when the requested signal photon number is below the thermal
    /// floor `nth_S` and cannot be produced by any squeeze; `exponent` and
    /// `q` are then zero.
    pub reachable: bool,
}

/// Maximizes the truncated exponent over the receiver gain in `[lo, hi]`.
pub fn tune_gain<T: Scalar>(
    params: &RadarParams<T>,
    model: &PhotocountModel<T>,
    lo: T,
    hi: T,
    tol: T,
) -> Result<ModelPoint<T>> {
    params.validate()?;
    let objective = |g: T| {
        truncated_exponent(&params.with_gain(g), model)
            .map(|o| o.exponent)
            .unwrap_or(T::neg_infinity())
    };
    let (g, _) = golden_section_max(objective, lo, hi, tol);
    let best = truncated_exponent(&params.with_gain(g), model)?;
    let e_cl = classical_bound(params.kappa_yes, params.n_signal(), params.n_noise)?;
    Ok(ModelPoint {
        g_rx: g,
        exponent: best.exponent,
        nu: best.nu,
        e_cl,
        q: advantage(best.exponent, e_cl)?,
        reachable: true,
    })
}

/// Model advantage at signal photon number `n_sig` given the thermal floors,
/// with `nu` and `G` optimized.
pub fn advantage_at<T: Scalar>(
    template: &RadarParams<T>,
    n_sig: T,
    model: &PhotocountModel<T>,
) -> Result<ModelPoint<T>> {
    match template.with_signal_photons(n_sig) {
        Ok(p) => tune_gain(&p, model, T::lit(GAIN_BRACKET.0), T::lit(GAIN_BRACKET.1), T::lit(GAIN_TOL)),
        Err(Error::Domain { name: "n_signal", .. }) => Ok(ModelPoint {
            g_rx: T::one(),
            exponent: T::zero(),
            nu: NuAssignment::counting(),
            e_cl: classical_bound(template.kappa_yes, n_sig, template.n_noise)?,
            q: T::zero(),
            reachable: false,
        }),
        Err(e) => Err(e),
    }
}

/// `n` points spaced evenly in `log10` between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ideal_error_exponent;

    #[test]
    fn truncated_stays_below_ideal_counting() {
        let p = RadarParams::<f64>::reference();
        let t = truncated_exponent(&p, &PhotocountModel::ideal()).unwrap();
        let ideal = ideal_error_exponent(&p).unwrap();
        assert!(t.exponent <= ideal && t.exponent > 0.9 * ideal, "{} vs {ideal}", t.exponent);
    }

    #[test]
    fn reference_point_advantage() {
        let p = RadarParams::<f64>::reference();
        let m = tune_gain(&p, &PhotocountModel::ideal(), 1.0, 1.2, 1e-5).unwrap();
        assert!((m.g_rx - 1.015).abs() < 3e-3, "{}", m.g_rx);
        assert!(m.exponent > 3.0e-5 && m.exponent < 3.2e-5, "{}", m.exponent);
        assert!(m.q > 1.2 && m.q < 1.3, "{}", m.q);
    }

    #[test]
    fn below_thermal_floor_is_unreachable() {
        let p = RadarParams::<f64>::new(1.0, 3.02e-2, 10.0, 1.0).with_thermal(5e-3, 2.5e-3);
        let m = advantage_at(&p, 1e-3, &PhotocountModel::ideal()).unwrap();
        assert!(!m.reachable && m.q == 0.0);
        let m = advantage_at(&p, 1e-2, &PhotocountModel::ideal()).unwrap();
        assert!(m.reachable && m.q > 0.0);
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-3, 1e-1, 30);
        assert_eq!(v.len(), 30);
        assert!((v[0] - 1e-3).abs() < 1e-18 && (v[29] - 1e-1).abs() < 1e-15);
        assert!((v[1] / v[0] - v[2] / v[1]).abs() < 1e-12);
    }
}
