//! Recovery of the idler vacuum probability after a thermal population is loaded.

use serde::{Deserialize, Serialize};

use super::lsq::{lsq_fit, FitResult, LsqOptions};
use crate::error::{ensure, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationModel<T = f64> {
    /// Idler energy relaxation time, s.
    pub t1: T,
    /// Population the idler relaxes to.
    pub nth: T,
}

impl<T: Scalar> RelaxationModel<T> {
    /// `T1 = 4.1 us` relaxing towards the idler equilibrium population.
    pub fn reference() -> Self {
        RelaxationModel { t1: T::lit(4.1e-6), nth: T::lit(crate::gaussian::IDLER_EQUILIBRIUM_POPULATION) }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.t1 > T::zero(), "t1", self.t1.as_f64(), "> 0")?;
        ensure(self.nth >= T::zero(), "nth", self.nth.as_f64(), ">= 0")
    }
}

/// Vacuum probability of a thermal state whose population relaxes from
/// `n_init` towards `model.nth`.
pub fn relaxation_signal<T: Scalar>(t: T, n_init: T, model: &RelaxationModel<T>) -> T {
    let decay = (-t / model.t1).exp();
    T::one() / (n_init * decay + (T::one() - decay) * model.nth + T::one())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationFit<T = f64> {
    pub n_init: T,
    pub fit: FitResult<T>,
}

impl<T: Scalar> RelaxationFit<T> {
    pub fn stderr(&self) -> T {
        self.fit.stderr[0]
    }
}

/// Fits the initial population with `T1` and the final population held fixed.
pub fn fit_relaxation<T: Scalar>(
    t: &[T],
    p: &[T],
    sigma: Option<&[T]>,
    model: &RelaxationModel<T>,
) -> Result<RelaxationFit<T>> {
    model.validate()?;
    // invert the earliest sample for the starting point
    let n0 = match t.iter().zip(p).min_by(|a, b| a.0.partial_cmp(b.0).unwrap()) {
        Some((&t0, &p0)) if p0 > T::zero() => {
            let decay = (-t0 / model.t1).exp();
            ((T::one() / p0 - T::one() - (T::one() - decay) * model.nth) / decay).max(T::zero())
        }
        _ => T::one(),
    };
    let m = *model;
    let opts = LsqOptions { lower: Some(vec![T::zero()]), ..Default::default() };
    let fit = lsq_fit(move |ti, q| relaxation_signal(ti, q[0], &m), t, p, sigma, &[n0], &opts)?;
    Ok(RelaxationFit { n_init: fit.params[0], fit })
}
