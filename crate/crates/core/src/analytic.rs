//! Closed-form error exponents, receiver gain, and quantum advantage.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::gaussian::{receiver_mean_photons, Hypothesis, RadarParams};
use crate::scalar::Scalar;

/// Asymptotic exponents for a target of reflectivity `kappa` probed with
/// `n_sig` photons in `n_noise` background photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet<T = f64> {
    /// Best classical (coherent-state) strategy.
    pub e_cl: T,
    /// Pairwise joint measurements on entangled probes.
    pub e_pair: T,
    /// Quantum Chernoff bound for entangled probes.
    pub e_max: T,
    pub q_max: T,
}

/// Which expression is used for the classical coherent-state exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalBoundForm {
    /// `kappa N_S / (4 N_N)`, the low-signal high-noise limit.
    #[default]
    Asymptotic,
    /// Chernoff exponent between a displaced and an undisplaced thermal state,
    /// `kappa N_S (sqrt(N_N + 1) - sqrt(N_N))^2`.
    CoherentChernoff,
}

fn check_bound_inputs<T: Scalar>(kappa: T, n_sig: T, n_noise: T) -> Result<()> {
    ensure(kappa >= T::zero() && kappa <= T::one(), "kappa", kappa.as_f64(), "in [0, 1]")?;
    ensure(n_sig >= T::zero(), "n_sig", n_sig.as_f64(), ">= 0")?;
    ensure(n_noise > T::zero(), "n_noise", n_noise.as_f64(), "> 0")
}

pub fn classical_bound<T: Scalar>(kappa: T, n_sig: T, n_noise: T) -> Result<T> {
    classical_bound_with(kappa, n_sig, n_noise, ClassicalBoundForm::Asymptotic)
}

pub fn classical_bound_with<T: Scalar>(kappa: T, n_sig: T, n_noise: T, form: ClassicalBoundForm) -> Result<T> {
    check_bound_inputs(kappa, n_sig, n_noise)?;
    Ok(match form {
        ClassicalBoundForm::Asymptotic => kappa * n_sig / (T::lit(4.0) * n_noise),
        ClassicalBoundForm::CoherentChernoff => {
            let gap = (n_noise + T::one()).sqrt() - n_noise.sqrt();
            kappa * n_sig * gap * gap
        }
    })
}

pub fn quantum_bounds<T: Scalar>(kappa: T, n_sig: T, n_noise: T) -> Result<BoundSet<T>> {
    let e_cl = classical_bound(kappa, n_sig, n_noise)?;
    let e_max = kappa * n_sig / n_noise;
    Ok(BoundSet {
        e_cl,
        e_pair: e_max / T::lit(2.0),
        e_max,
        q_max: T::lit(4.0),
    })
}

/// Central-limit error exponent of a threshold test on a scalar statistic with
/// the given means and standard deviations under each hypothesis.
///
/// Returns `+inf` when both deviations vanish but the means differ, and zero
/// whenever the means coincide.
pub fn exponent_from_moments<T: Scalar>(mean_yes: T, sd_yes: T, mean_no: T, sd_no: T) -> T {
    let diff = mean_yes - mean_no;
    if diff == T::zero() {
        return T::zero();
    }
    let spread = sd_yes + sd_no;
    if spread == T::zero() {
        return T::infinity();
    }
    diff * diff / (T::lit(2.0) * spread * spread)
}

/// Error exponent of the OPA receiver followed by ideal photon counting of the
/// idler. The counts are thermal, so `sigma = sqrt(mu^2 + mu)`.
pub fn ideal_error_exponent<T: Scalar>(params: &RadarParams<T>) -> Result<T> {
    let mu_yes = receiver_mean_photons(params, Hypothesis::Present)?;
    let mu_no = receiver_mean_photons(params, Hypothesis::Absent)?;
    let sd = |mu: T| (mu * mu + mu).sqrt();
    Ok(exponent_from_moments(mu_yes, sd(mu_yes), mu_no, sd(mu_no)))
}

/// Receiver gain maximizing the Fisher information of the OPA receiver,
/// `max(1, G*)`.
pub fn optimal_gain<T: Scalar>(n_sig: T, n_noise: T, kappa: T) -> Result<T> {
    ensure(n_sig >= T::zero(), "n_sig", n_sig.as_f64(), ">= 0")?;
    ensure(n_noise >= T::zero(), "n_noise", n_noise.as_f64(), ">= 0")?;
    let one = T::one();
    let b = n_noise + kappa * n_sig;
    let numer = (n_sig * (n_sig + one) * b * (b + one)).sqrt() + n_sig * (n_sig + one);
    let denom = (n_noise + (kappa - one) * n_sig) * (n_noise + (kappa + one) * n_sig + one);
    if !(denom > T::zero()) {
        return Err(Error::Domain {
            name: "n_noise",
            value: n_noise.as_f64(),
            expected: "large enough that (N_N + (kappa-1) N_S)(N_N + (kappa+1) N_S + 1) > 0",
        });
    }
    Ok((one + numer / denom).max(one))
}

/// Quantum advantage `E / E_cl`.
pub fn advantage<T: Scalar>(e_quantum: T, e_cl: T) -> Result<T> {
    ensure(e_cl > T::zero(), "e_cl", e_cl.as_f64(), "> 0")?;
    Ok(e_quantum / e_cl)
}

#[cfg(test)]
mod tests {
    use super::*;

    const KAPPA: f64 = 3.02e-2;
    const NS: f64 = 3.53e-2;
    const NN: f64 = 10.8;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn classical_bound_cases() {
        assert!(rel(classical_bound(KAPPA, NS, NN).unwrap(), 2.4677e-5) < 1e-4);
        assert_eq!(classical_bound(0.0, NS, NN).unwrap(), 0.0);
        let one = classical_bound(KAPPA, NS, NN).unwrap();
        let two = classical_bound(KAPPA, 2.0 * NS, NN).unwrap();
        assert!(rel(two, 2.0 * one) < 1e-15);
        assert!(matches!(classical_bound(KAPPA, NS, 0.0), Err(Error::Domain { name: "n_noise", .. })));
    }

    #[test]
    fn coherent_chernoff_form_approaches_asymptote_at_high_noise() {
        let exact = classical_bound_with(0.01, 1e-3, 1e4, ClassicalBoundForm::CoherentChernoff).unwrap();
        let asym = classical_bound(0.01, 1e-3, 1e4).unwrap();
        assert!(rel(exact, asym) < 1e-3);
        let at_ref = classical_bound_with(KAPPA, NS, NN, ClassicalBoundForm::CoherentChernoff).unwrap();
        assert!(at_ref < classical_bound(KAPPA, NS, NN).unwrap());
    }

    #[test]
    fn quantum_bound_ratios() {
        let b = quantum_bounds(KAPPA, NS, NN).unwrap();
        assert!(rel(b.e_pair, 4.93546e-5) < 1e-5);
        assert!(rel(b.e_max, 9.87093e-5) < 1e-5);
        assert_eq!(b.e_max / b.e_cl, 4.0);
        assert_eq!(b.e_pair / b.e_cl, 2.0);
        assert!(b.e_cl <= b.e_pair && b.e_pair <= b.e_max);
    }

    #[test]
    fn ideal_exponent_reference_point() {
        // mu_yes = 0.2210440, mu_no = 0.2128295 evaluated in the formula
        let e = ideal_error_exponent(&RadarParams::<f64>::reference()).unwrap();
        assert!(rel(e, 3.195162e-5) < 1e-5, "{e}");
    }

    #[test]
    fn ideal_exponent_vanishes_without_contrast() {
        let mut p = RadarParams::<f64>::reference();
        p.kappa_no = p.kappa_yes;
        assert_eq!(ideal_error_exponent(&p).unwrap(), 0.0);
        let p = RadarParams::<f64>::reference().with_gain(1.0);
        assert_eq!(ideal_error_exponent(&p).unwrap(), 0.0);
    }

    #[test]
    fn optimal_gain_cases() {
        let g = optimal_gain(NS, NN, KAPPA).unwrap();
        assert!((g - 1.017224).abs() < 1e-6, "{g}");
        assert!((optimal_gain(1e-12, NN, KAPPA).unwrap() - 1.0).abs() < 1e-6);
        assert!(optimal_gain(NS, 20.0, KAPPA).unwrap() < g);
        // the closed form grows with N_S at fixed N_N
        assert!(optimal_gain(0.1, NN, KAPPA).unwrap() > optimal_gain(0.05, NN, KAPPA).unwrap());
        assert!(optimal_gain(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn scanned_argmax_sits_near_optimal_gain() {
        let p = RadarParams::<f64>::reference();
        let (mut best_g, mut best_e) = (1.0, 0.0);
        for i in 0..=1000 {
            let g = 1.0 + 1e-4 * i as f64;
            let e = ideal_error_exponent(&p.with_gain(g)).unwrap();
            if e > best_e {
                best_g = g;
                best_e = e;
            }
        }
        assert!((best_g - optimal_gain(NS, NN, KAPPA).unwrap()).abs() < 3e-3, "{best_g}");
    }

    #[test]
    fn low_signal_high_noise_reaches_pairwise_bound() {
        let (ns, nn, kappa) = (1e-3, 100.0, 0.01);
        let p = RadarParams::new(1.0, kappa, nn, optimal_gain(ns, nn, kappa).unwrap())
            .with_signal_photons(ns)
            .unwrap();
        let ratio = ideal_error_exponent(&p).unwrap() / quantum_bounds(kappa, ns, nn).unwrap().e_pair;
        assert!((0.9..=1.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn advantage_cases() {
        assert!(rel(advantage(2.9e-5, 2.468e-5).unwrap(), 1.175) < 1e-3);
        assert_eq!(advantage(1.3, 1.3).unwrap(), 1.0);
        assert_eq!(advantage(0.0, 1.3).unwrap(), 0.0);
        assert!(advantage(1.0, 0.0).is_err());
    }

    #[test]
    fn exponent_from_moments_edge_cases() {
        assert_eq!(exponent_from_moments(1.0, 0.0, 0.0, 0.0), f64::INFINITY);
        assert_eq!(exponent_from_moments(1.0, 0.0, 1.0, 0.0), 0.0);
        assert_eq!(exponent_from_moments(2.0, 0.5, 0.0, 0.5), 2.0);
    }
}
