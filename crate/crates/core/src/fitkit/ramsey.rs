//! Ramsey oscillations of a qubit dispersively coupled to a thermal idler.

use serde::{Deserialize, Serialize};

use super::lsq::{lsq_fit, solve_dense, FitResult, LsqOptions};
use crate::error::{ensure, Error, Result};
use crate::scalar::Scalar;

const TAIL_TOL: f64 = 1e-6;
const KMAX_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyModel<T = f64> {
    /// Dispersive shift per photon, rad/s.
    pub chi: T,
    /// Second-order shift, rad/s.
    pub beta: T,
    /// Qubit coherence time, s.
    pub t2: T,
    /// Minimum Fock truncation; extended as needed.
    pub kmax: usize,
}

impl<T: Scalar> RamseyModel<T> {
    /// `chi / 2 pi = 4.75 MHz`, `beta / 2 pi = 70 kHz`, `T2 = 12 us`.
    pub fn reference() -> Self {
        let two_pi = T::lit(std::f64::consts::TAU);
        RamseyModel { chi: two_pi * T::lit(4.75e6), beta: two_pi * T::lit(70e3), t2: T::lit(12e-6), kmax: 30 }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.chi > T::zero(), "chi", self.chi.as_f64(), "> 0")?;
        ensure(self.t2 > T::zero(), "t2", self.t2.as_f64(), "> 0")?;
        ensure(self.kmax >= 1, "kmax", self.kmax as f64, ">= 1")
    }

    /// Truncation index whose tail weight `q^(K + 1)` is below 1e-6, never
    /// smaller than `kmax`.
    pub fn truncation(&self, n_i: T) -> usize {
        let q = thermal_ratio(n_i);
        if q == T::zero() {
            return self.kmax;
        }
        let need = (T::lit(TAIL_TOL).ln() / q.ln()).ceil().to_usize().unwrap_or(KMAX_CAP);
        let k = self.kmax.max(need.saturating_sub(1));
        if k > KMAX_CAP {
            log::warn!("ramsey: N_I = {n_i} needs {k} Fock terms, truncated at {KMAX_CAP}");
            return KMAX_CAP;
        }
        k
    }
}

fn thermal_ratio<T: Scalar>(n: T) -> T {
    n / (n + T::one())
}

/// Thermal Fock weights `N^k / (N + 1)^(k + 1)` for `k = 0..=kmax`.
pub fn fock_weights<T: Scalar>(n_i: T, kmax: usize) -> Vec<T> {
    let q = thermal_ratio(n_i);
    let mut w = Vec::with_capacity(kmax + 1);
    let mut cur = T::one() / (n_i + T::one());
    for _ in 0..=kmax {
        w.push(cur);
        cur *= q;
    }
    w
}

/// Ramsey signal, normalized to `s(0) = 1`.
pub fn ramsey_signal<T: Scalar>(t: T, n_i: T, model: &RamseyModel<T>) -> T {
    let n_i = n_i.max(T::zero());
    let kmax = model.truncation(n_i);
    let w = fock_weights(n_i, kmax);
    let norm: T = w.iter().copied().sum();
    let s: T = w
        .iter()
        .enumerate()
        .map(|(k, wk)| {
            let k = T::lit(k as f64);
            *wk * (t * (model.chi * k + model.beta * k * k)).cos()
        })
        .sum();
    (-t / model.t2).exp() * s / norm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyFit<T = f64> {
    pub amplitude: T,
    pub n_i: T,
    pub fit: FitResult<T>,
}

impl<T: Scalar> RamseyFit<T> {
    pub fn n_i_stderr(&self) -> T {
        self.fit.stderr[1]
    }
}

/// Starting guess: project the data onto the decaying `k = 0, 1, 2` tones
/// and read `N / (N + 1)` off the ratio of the first two components.
fn initial_guess<T: Scalar>(t: &[T], y: &[T], model: &RamseyModel<T>) -> (T, T) {
    let basis = |ti: T, k: f64| {
        let k = T::lit(k);
        (-ti / model.t2).exp() * (ti * (model.chi * k + model.beta * k * k)).cos()
    };
    let mut a = vec![vec![T::zero(); 3]; 3];
    let mut b = vec![T::zero(); 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let phi = [basis(ti, 0.0), basis(ti, 1.0), basis(ti, 2.0)];
        for i in 0..3 {
            b[i] += phi[i] * yi;
            for j in 0..3 {
                a[i][j] += phi[i] * phi[j];
            }
        }
    }
    match solve_dense(a, b) {
        Some(c) if c[0] > T::zero() => {
            let q = (c[1] / c[0]).max(T::zero()).min(T::lit(0.9));
            let amp = c[0] / (T::one() - q);
            (amp, q / (T::one() - q))
        }
        _ => (y.first().copied().unwrap_or(T::one()), T::lit(0.1)),
    }
}

/// Fits `amplitude * s(t; N_I)` with `chi`, `beta`, `T2` held fixed.
pub fn fit_ramsey<T: Scalar>(t: &[T], y: &[T], sigma: Option<&[T]>, model: &RamseyModel<T>) -> Result<RamseyFit<T>> {
    model.validate()?;
    if t.iter().any(|v| *v < T::zero()) {
        return Err(Error::Degenerate("Ramsey delays must be >= 0".into()));
    }
    let (amp0, n0) = initial_guess(t, y, model);
    let opts = LsqOptions { lower: Some(vec![T::neg_infinity(), T::zero()]), ..Default::default() };
    let m = *model;
    let fit = lsq_fit(move |ti, p| p[0] * ramsey_signal(ti, p[1], &m), t, y, sigma, &[amp0, n0], &opts)?;
    Ok(RamseyFit { amplitude: fit.params[0], n_i: fit.params[1], fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_gives_bare_decay() {
        let m = RamseyModel::<f64>::reference();
        for t in [0.0, 1e-6, 5e-6] {
            assert!((ramsey_signal(t, 0.0, &m) - (-t / m.t2).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_are_thermal() {
        let w = fock_weights(0.104f64, 40);
        for k in 0..40 {
            assert!((w[k + 1] / w[k] - 0.104 / 1.104).abs() < 1e-14);
        }
        let m = RamseyModel::<f64>::reference();
        let full: f64 = fock_weights(2.0, m.truncation(2.0)).iter().sum();
        assert!((full - 1.0).abs() < 1e-6);
    }

    #[test]
    fn truncation_extends_for_hot_idler() {
        let m = RamseyModel::<f64>::reference();
        assert_eq!(m.truncation(0.104), 30);
        let k = m.truncation(5.0);
        assert!((5.0f64 / 6.0).powi(k as i32 + 1) < 1e-6 && k > 30);
    }

    #[test]
    fn noise_free_recovery() {
        let m = RamseyModel::<f64>::reference();
        let t: Vec<f64> = (0..=600).map(|i| i as f64 * 20e-9).collect();
        let y: Vec<f64> = t.iter().map(|&ti| 0.8 * ramsey_signal(ti, 0.104, &m)).collect();
        let fit = fit_ramsey(&t, &y, None, &m).unwrap();
        assert!(fit.fit.converged);
        assert!((fit.n_i - 0.104).abs() < 1e-8 && (fit.amplitude - 0.8).abs() < 1e-8);
    }
}
