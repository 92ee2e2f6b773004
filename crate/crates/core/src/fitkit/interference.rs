//! Cosine fit of the receiver output against the pump phase.

use serde::{Deserialize, Serialize};

use super::lsq::{lsq_fit, solve_dense, FitResult, LsqOptions};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceFit<T = f64> {
    pub offset: T,
    /// Non-negative; the sign is absorbed into `phi0`.
    pub amplitude: T,
    /// `None` when the data show no oscillation.
    pub phi0: Option<T>,
    pub offset_stderr: T,
    pub amplitude_stderr: T,
    pub phi0_stderr: Option<T>,
    pub fit: Option<FitResult<T>>,
}

pub fn cosine_model<T: Scalar>(phi: T, offset: T, amplitude: T, phi0: T) -> T {
    offset + amplitude * (phi - phi0).cos()
}

/// Wraps into `(-pi, pi]`.
pub fn wrap_phase<T: Scalar>(phi: T) -> T {
    let pi = T::lit(std::f64::consts::PI);
    let two_pi = pi + pi;
    let mut w = phi - two_pi * (phi / two_pi).round();
    if w <= -pi {
        w += two_pi;
    }
    w
}

/// Fits `A + B cos(phi - phi0)`. The linear model `a + b cos(phi) + c sin(phi)`
/// supplies the starting point; a nonlinear polish gives the stderrs.
pub fn fit_interference<T: Scalar>(phases: &[T], ratios: &[T], sigma: Option<&[T]>) -> Result<InterferenceFit<T>> {
    if phases.len() != ratios.len() {
        return Err(Error::Table("phase and value columns differ in length".into()));
    }
    if phases.len() < 3 {
        return Err(Error::Underdetermined(format!("{} samples for 3 parameters", phases.len())));
    }
    let (lo, hi) = phases.iter().fold((T::infinity(), T::neg_infinity()), |(l, h), p| (l.min(*p), h.max(*p)));
    if !(hi - lo > T::lit(std::f64::consts::PI)) {
        return Err(Error::Underdetermined(format!("phase span {} does not exceed pi", (hi - lo).as_f64())));
    }

    let w: Vec<T> = match sigma {
        Some(s) => s.iter().map(|v| T::one() / (*v * *v)).collect(),
        None => vec![T::one(); phases.len()],
    };
    let mut a = vec![vec![T::zero(); 3]; 3];
    let mut b = vec![T::zero(); 3];
    for ((&p, &y), &wi) in phases.iter().zip(ratios).zip(&w) {
        let f = [T::one(), p.cos(), p.sin()];
        for i in 0..3 {
            b[i] += wi * f[i] * y;
            for j in 0..3 {
                a[i][j] += wi * f[i] * f[j];
            }
        }
    }
    let c = solve_dense(a, b).ok_or(Error::SingularJacobian)?;
    let amp = (c[1] * c[1] + c[2] * c[2]).sqrt();
    let scale = ratios.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::min_positive_value());
    if amp <= T::lit(1e-12) * scale {
        return Ok(InterferenceFit {
            offset: c[0],
            amplitude: T::zero(),
            phi0: None,
            offset_stderr: T::zero(),
            amplitude_stderr: T::zero(),
            phi0_stderr: None,
            fit: None,
        });
    }
    let phi0 = c[2].atan2(c[1]);
    let fit = lsq_fit(
        |p, q| cosine_model(p, q[0], q[1], q[2]),
        phases,
        ratios,
        sigma,
        &[c[0], amp, phi0],
        &LsqOptions::default(),
    )?;
    let (mut amplitude, mut phi0) = (fit.params[1], fit.params[2]);
    if amplitude < T::zero() {
        amplitude = -amplitude;
        phi0 += T::lit(std::f64::consts::PI);
    }
    Ok(InterferenceFit {
        offset: fit.params[0],
        amplitude,
        phi0: Some(wrap_phase(phi0)),
        offset_stderr: fit.stderr[0],
        amplitude_stderr: fit.stderr[1],
        phi0_stderr: Some(fit.stderr[2]),
        fit: Some(fit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phases(n: usize) -> Vec<f64> {
        (0..n).map(|i| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / n as f64).collect()
    }

    #[test]
    fn exact_cosine() {
        let p = phases(40);
        let y: Vec<f64> = p.iter().map(|&x| cosine_model(x, 1.0, 0.3, -1.898)).collect();
        let f = fit_interference(&p, &y, None).unwrap();
        assert!((f.phi0.unwrap() + 1.898).abs() < 1e-9);
        assert!((f.amplitude - 0.3).abs() < 1e-9 && (f.offset - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_data_has_no_phase() {
        let p = phases(20);
        let f = fit_interference(&p, &[0.7; 20], None).unwrap();
        assert_eq!(f.amplitude, 0.0);
        assert!(f.phi0.is_none());
    }

    #[test]
    fn narrow_span_rejected() {
        let p: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y = vec![1.0; 10];
        assert!(matches!(fit_interference(&p, &y, None), Err(Error::Underdetermined(_))));
    }

    #[test]
    fn wrap() {
        assert!((wrap_phase(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_phase(-1.898 - std::f64::consts::TAU) + 1.898).abs() < 1e-12);
    }
}
