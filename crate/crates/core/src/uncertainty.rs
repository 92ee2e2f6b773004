//! First-order propagation of measurement uncertainties into `E_cl`, `E` and `Q`.

use serde::{Deserialize, Serialize};

use crate::analytic::classical_bound;
use crate::error::{ensure, Error, Result};
use crate::scalar::Scalar;

/// A value with its one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured<T = f64> {
    pub value: T,
    pub sigma: T,
}

impl<T: Scalar> Measured<T> {
    pub fn new(value: T, sigma: T) -> Self {
        debug_assert!(!(sigma < T::zero()), "negative uncertainty");
        Measured { value, sigma }
    }

    pub fn exact(value: T) -> Self {
        Measured { value, sigma: T::zero() }
    }

    pub fn relative(&self) -> T {
        self.sigma / self.value.abs()
    }
}

/// `Delta(X / Y)` with Pearson coefficient `r` between `X` and `Y`.
pub fn ratio<T: Scalar>(x: Measured<T>, y: Measured<T>, r: T) -> Measured<T> {
    let q = x.value / y.value;
    let rx = x.sigma / x.value;
    let ry = y.sigma / y.value;
    let var = rx * rx + ry * ry - T::lit(2.0) * r * rx * ry;
    Measured::new(q, q.abs() * var.max(T::zero()).sqrt())
}

/// `Delta(X + Y)` with Pearson coefficient `r`.
pub fn sum<T: Scalar>(x: Measured<T>, y: Measured<T>, r: T) -> Measured<T> {
    let var = x.sigma * x.sigma + y.sigma * y.sigma + T::lit(2.0) * r * x.sigma * y.sigma;
    Measured::new(x.value + y.value, var.max(T::zero()).sqrt())
}

/// `Delta(X - Y)` with Pearson coefficient `r`.
pub fn difference<T: Scalar>(x: Measured<T>, y: Measured<T>, r: T) -> Measured<T> {
    let var = x.sigma * x.sigma + y.sigma * y.sigma - T::lit(2.0) * r * x.sigma * y.sigma;
    Measured::new(x.value - y.value, var.max(T::zero()).sqrt())
}

/// Correlations assumed between the estimated quantities entering `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonAssumptions<T = f64> {
    /// Between the squared mean difference and the squared summed deviation.
    pub numerator_denominator: T,
    /// Between the two mean estimates.
    pub means: T,
    /// Between the two deviation estimates.
    pub deviations: T,
}

impl<T: Scalar> Default for PearsonAssumptions<T> {
    /// Worst case for the variance of `E`: `(0, 0, 1)`.
    fn default() -> Self {
        PearsonAssumptions {
            numerator_denominator: T::zero(),
            means: T::zero(),
            deviations: T::one(),
        }
    }
}

/// Sample moments of `nu` under both hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuMoments<T = f64> {
    pub mean_yes: T,
    pub sd_yes: T,
    pub mean_no: T,
    pub sd_no: T,
}

pub fn delta_ecl<T: Scalar>(kappa: Measured<T>, n_sig: Measured<T>, n_noise: Measured<T>) -> Result<Measured<T>> {
    for (name, m) in [("kappa", kappa), ("n_sig", n_sig), ("n_noise", n_noise)] {
        ensure(m.value > T::zero(), name, m.value.as_f64(), "> 0")?;
    }
    let value = classical_bound(kappa.value, n_sig.value, n_noise.value)?;
    let rel = [kappa, n_sig, n_noise]
        .iter()
        .map(|m| m.relative() * m.relative())
        .sum::<T>()
        .sqrt();
    Ok(Measured::new(value, value * rel))
}

pub fn delta_e<T: Scalar>(moments: &NuMoments<T>, m: u64) -> Result<Measured<T>> {
    delta_e_with(moments, m, &PearsonAssumptions::default())
}

/// Uncertainty of the plug-in exponent from `m` attempts per hypothesis,
/// using `Delta<nu> = sigma / sqrt(M)` and `Delta sigma = sigma / sqrt(2M)`.
pub fn delta_e_with<T: Scalar>(moments: &NuMoments<T>, m: u64, r: &PearsonAssumptions<T>) -> Result<Measured<T>> {
    ensure(m >= 2, "m", m as f64, ">= 2")?;
    let NuMoments { mean_yes, sd_yes, mean_no, sd_no } = *moments;
    ensure(sd_yes > T::zero(), "sd_yes", sd_yes.as_f64(), "> 0")?;
    ensure(sd_no > T::zero(), "sd_no", sd_no.as_f64(), "> 0")?;
    if mean_yes == mean_no {
        return Err(Error::Degenerate("equal means under both hypotheses".into()));
    }
    let two = T::lit(2.0);
    let root_m = T::from_u64(m).unwrap().sqrt();
    let root_2m = (two * T::from_u64(m).unwrap()).sqrt();

    let diff = difference(
        Measured::new(mean_yes, sd_yes / root_m),
        Measured::new(mean_no, sd_no / root_m),
        r.means,
    );
    let spread = sum(Measured::new(sd_yes, sd_yes / root_2m), Measured::new(sd_no, sd_no / root_2m), r.deviations);

    // numerator D^2 and denominator 2 S^2
    let numer = Measured::new(diff.value * diff.value, two * diff.value.abs() * diff.sigma);
    let denom = Measured::new(two * spread.value * spread.value, T::lit(4.0) * spread.value * spread.sigma);
    Ok(ratio(numer, denom, r.numerator_denominator))
}

/// `Q = E / E_cl` assuming independent estimates.
pub fn delta_q<T: Scalar>(e: Measured<T>, e_cl: Measured<T>) -> Result<Measured<T>> {
    ensure(e_cl.value > T::zero(), "e_cl", e_cl.value.as_f64(), "> 0")?;
    let q = e.value / e_cl.value;
    let re = if e.value == T::zero() { T::zero() } else { e.sigma / e.value };
    let rc = e_cl.sigma / e_cl.value;
    Ok(Measured::new(q, q.abs() * (re * re + rc * rc).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_inputs() -> (Measured, Measured, Measured) {
        (Measured::<f64>::new(3.02e-2, 0.08e-2), Measured::<f64>::new(3.53e-2, 0.04e-2), Measured::<f64>::new(10.8, 0.3))
    }

    #[test]
    fn classical_uncertainty_at_reference() {
        let (k, s, n) = reference_inputs();
        let e = delta_ecl(k, s, n).unwrap();
        assert!((e.relative() - 0.0400).abs() < 1e-3, "{}", e.relative());
        assert!((e.sigma - 9.9e-7).abs() < 1e-8);
    }

    #[test]
    fn classical_uncertainty_edges() {
        let (k, s, n) = reference_inputs();
        let exact = delta_ecl(Measured::<f64>::exact(k.value), Measured::<f64>::exact(s.value), Measured::<f64>::exact(n.value)).unwrap();
        assert_eq!(exact.sigma, 0.0);
        let wider = delta_ecl(Measured::<f64>::new(k.value, 2.0 * k.sigma), s, n).unwrap();
        assert!(wider.relative() > delta_ecl(k, s, n).unwrap().relative());
        assert!(delta_ecl(Measured::<f64>::exact(0.0), s, n).is_err());
    }

    #[test]
    fn exponent_uncertainty_closed_form() {
        // sigma_y = sigma_n, mean gap 2 sigma -> Delta E = 1 / sqrt(M)
        let m = NuMoments::<f64> { mean_yes: 2.0, sd_yes: 1.0, mean_no: 0.0, sd_no: 1.0 };
        let d = delta_e(&m, 10_000).unwrap();
        assert!((d.sigma - 0.01).abs() < 1e-15);
        assert!((d.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponent_uncertainty_scales_as_inverse_root_m() {
        let m = NuMoments::<f64> { mean_yes: 0.3, sd_yes: 0.5, mean_no: 0.28, sd_no: 0.48 };
        let a = delta_e(&m, 1000).unwrap().sigma;
        let b = delta_e(&m, 4000).unwrap().sigma;
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_uncertainty_matches_printed_upper_bound() {
        let m = NuMoments::<f64> { mean_yes: 0.31, sd_yes: 0.52, mean_no: 0.29, sd_no: 0.47 };
        let big_m = 7_500_000u64;
        let d = m.mean_yes - m.mean_no;
        let s = m.sd_yes + m.sd_no;
        let printed = (d / s).powi(2) / (big_m as f64).sqrt()
            * (0.5 + (m.sd_yes.powi(2) + m.sd_no.powi(2)) / (d * d)).sqrt();
        let got = delta_e(&m, big_m).unwrap().sigma;
        assert!((got - printed).abs() < 1e-12 * printed);
    }

    #[test]
    fn exponent_uncertainty_errors() {
        let m = NuMoments::<f64> { mean_yes: 0.3, sd_yes: 0.5, mean_no: 0.3, sd_no: 0.48 };
        assert!(matches!(delta_e(&m, 100), Err(Error::Degenerate(_))));
        assert!(delta_e(&NuMoments::<f64> { sd_no: 0.0, mean_no: 0.1, ..m }, 100).is_err());
        assert!(delta_e(&NuMoments::<f64> { mean_no: 0.1, ..m }, 1).is_err());
    }

    #[test]
    fn advantage_uncertainty() {
        let (k, s, n) = reference_inputs();
        let e_cl = delta_ecl(k, s, n).unwrap();
        let q = delta_q(Measured::<f64>::new(2.9e-5, 0.2e-5), e_cl).unwrap();
        assert!((q.value - 1.175).abs() < 2e-3);
        assert!((q.sigma - 0.094).abs() < 2e-3, "{}", q.sigma);
        let z = delta_q(Measured::<f64>::exact(2.0), Measured::<f64>::exact(1.0)).unwrap();
        assert_eq!(z.sigma, 0.0);
        let only_e = delta_q(Measured::<f64>::new(2.0, 0.1), Measured::<f64>::exact(1.0)).unwrap();
        assert!((only_e.sigma - 0.1).abs() < 1e-15);
        assert!(delta_q(Measured::<f64>::exact(1.0), Measured::<f64>::exact(0.0)).is_err());
    }

    #[test]
    fn propagation_rules() {
        let a = Measured::<f64>::new(3.0, 0.3);
        let b = Measured::<f64>::new(2.0, 0.4);
        assert!((sum(a, b, 1.0).sigma - 0.7).abs() < 1e-15);
        assert!((difference(a, b, 1.0).sigma - 0.1).abs() < 1e-15);
        assert!((ratio(a, b, 0.0).sigma - 1.5 * (0.01f64 + 0.04).sqrt()).abs() < 1e-15);
    }
}
