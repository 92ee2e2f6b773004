//! Truncated photocounting of the idler with two selective pi pulses.
//!
//! Photon numbers are resolved into three classes `{0, 1, >=2}` and reported as
//! one of four qubit outcomes. Ideally `0 -> ee`, `1 -> ge`, `>=2 -> gg` and
//! `eg` never occurs; a [`PhotocountModel`] carries the confusion matrix that
//! departs from this. Each outcome is assigned an effective photon number
//! `nu`, and the receiver statistic is the mean of `nu` over attempts.

use serde::{Deserialize, Serialize};

use crate::analytic::exponent_from_moments;
use crate::error::{ensure, Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Gg,
    Ge,
    Eg,
    Ee,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::Gg, Outcome::Ge, Outcome::Eg, Outcome::Ee];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Gg => "gg",
            Outcome::Ge => "ge",
            Outcome::Eg => "eg",
            Outcome::Ee => "ee",
        }
    }
}

/// Photon-number class resolved by the two-pulse scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhotonClass {
    Zero,
    One,
    TwoOrMore,
}

impl PhotonClass {
    pub const ALL: [PhotonClass; 3] = [PhotonClass::Zero, PhotonClass::One, PhotonClass::TwoOrMore];

    pub fn of_count(k: u64) -> Self {
        match k {
            0 => PhotonClass::Zero,
            1 => PhotonClass::One,
            _ => PhotonClass::TwoOrMore,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Outcome reported by a perfect detector.
    pub fn ideal_outcome(self) -> Outcome {
        match self {
            PhotonClass::Zero => Outcome::Ee,
            PhotonClass::One => Outcome::Ge,
            PhotonClass::TwoOrMore => Outcome::Gg,
        }
    }
}

/// Row-stochastic map `P(outcome | photon class)`; rows follow
/// [`PhotonClass::ALL`], columns follow [`Outcome::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotocountModel<T = f64> {
    confusion: [[T; 4]; 3],
}

const ROW_TOL: f64 = 1e-12;

impl<T: Scalar> PhotocountModel<T> {
    pub fn new(confusion: [[T; 4]; 3]) -> Result<Self> {
        for (r, row) in confusion.iter().enumerate() {
            if row.iter().any(|&p| !(p >= T::zero() && p <= T::one())) {
                return Err(Error::InvalidModel(format!("row {r} has an entry outside [0, 1]")));
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs().as_f64() > ROW_TOL {
                return Err(Error::InvalidModel(format!("row {r} sums to {sum}, not 1")));
            }
        }
        Ok(PhotocountModel { confusion })
    }

    pub fn ideal() -> Self {
        Self::with_errors(T::zero(), T::zero()).expect("zero error rates are valid")
    }

    /// Ideal mapping degraded by a pi-pulse selectivity error and a readout
    /// error. Each class is misreported with probability
    /// `1 - (1 - eps_pi)(1 - eps_ro)`, shared evenly among the three wrong outcomes.
    pub fn with_errors(eps_pi: T, eps_ro: T) -> Result<Self> {
        ensure(eps_pi >= T::zero() && eps_pi <= T::one(), "eps_pi", eps_pi.as_f64(), "in [0, 1]")?;
        ensure(eps_ro >= T::zero() && eps_ro <= T::one(), "eps_ro", eps_ro.as_f64(), "in [0, 1]")?;
        let miss = T::one() - (T::one() - eps_pi) * (T::one() - eps_ro);
        let wrong = miss / T::lit(3.0);
        let mut confusion = [[wrong; 4]; 3];
        for class in PhotonClass::ALL {
            confusion[class.index()][class.ideal_outcome().index()] = T::one() - miss;
        }
        Self::new(confusion)
    }

    /// Every class reported uniformly at random.
    pub fn fully_mixing() -> Self {
        PhotocountModel { confusion: [[T::lit(0.25); 4]; 3] }
    }

    pub fn confusion(&self) -> &[[T; 4]; 3] {
        &self.confusion
    }

    pub fn row(&self, class: PhotonClass) -> &[T; 4] {
        &self.confusion[class.index()]
    }

    pub fn is_ideal(&self) -> bool {
        PhotonClass::ALL
            .iter()
            .all(|c| self.row(*c)[c.ideal_outcome().index()] == T::one())
    }
}

impl<T: Scalar> Default for PhotocountModel<T> {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Effective photon number per outcome, in [`Outcome::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuAssignment<T = f64> {
    pub nu: [T; 4],
}

impl<T: Scalar> NuAssignment<T> {
    pub fn new(gg: T, ge: T, eg: T, ee: T) -> Self {
        NuAssignment { nu: [gg, ge, eg, ee] }
    }

    /// Photon-number-like labels `(2, 1, 1, 0)`.
    pub fn counting() -> Self {
        Self::new(T::lit(2.0), T::one(), T::one(), T::zero())
    }

    pub fn get(&self, outcome: Outcome) -> T {
        self.nu[outcome.index()]
    }

    pub fn affine(&self, a: T, b: T) -> Self {
        NuAssignment { nu: self.nu.map(|v| a * v + b) }
    }

    pub fn is_constant(&self) -> bool {
        self.nu.iter().all(|&v| v == self.nu[0])
    }

    /// Representative with `nu_ee = 0` whose largest-magnitude entry equals 1.
    /// The exponent is invariant under this map.
    pub fn normalized(&self) -> Self {
        let shifted = self.nu.map(|v| v - self.nu[Outcome::Ee.index()]);
        let pivot = shifted
            .iter()
            .copied()
            .fold(T::zero(), |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot == T::zero() {
            return NuAssignment { nu: shifted };
        }
        NuAssignment { nu: shifted.map(|v| v / pivot) }
    }
}

/// Probability of each outcome for one attempt, in [`Outcome::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution<T = f64> {
    pub p: [T; 4],
}

impl<T: Scalar> OutcomeDistribution<T> {
    pub fn new(p: [T; 4]) -> Result<Self> {
        if p.iter().any(|&x| !(x >= T::zero())) {
            return Err(Error::Degenerate(format!("negative probability in {p:?}")));
        }
        let sum: T = p.iter().copied().sum();
        if (sum - T::one()).abs().as_f64() > ROW_TOL {
            return Err(Error::Degenerate(format!("probabilities sum to {sum}")));
        }
        Ok(OutcomeDistribution { p })
    }

    /// Empirical frequencies of a tally.
    pub fn from_counts(counts: &[u64; 4]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Degenerate("empty tally".into()));
        }
        let n = T::from_u64(total).unwrap();
        Ok(OutcomeDistribution { p: counts.map(|c| T::from_u64(c).unwrap() / n) })
    }

    pub fn get(&self, outcome: Outcome) -> T {
        self.p[outcome.index()]
    }

    /// Mean and standard deviation of `nu` under this distribution.
    pub fn moments(&self, nu: &NuAssignment<T>) -> (T, T) {
        let mean: T = self.p.iter().zip(&nu.nu).map(|(p, v)| *p * *v).sum();
        let var: T = self
            .p
            .iter()
            .zip(&nu.nu)
            .map(|(p, v)| *p * (*v - mean) * (*v - mean))
            .sum();
        (mean, var.max(T::zero()).sqrt())
    }
}

/// Thermal occupation of the classes `{0, 1, >=2}` for mean photon number `mu`.
pub fn thermal_class_probs<T: Scalar>(mu: T) -> [T; 3] {
    let one = T::one();
    let p0 = one / (mu + one);
    let p1 = mu / ((mu + one) * (mu + one));
    // P(k >= 2) = (mu / (mu + 1))^2, written without cancellation
    let q = mu / (mu + one);
    [p0, p1, q * q]
}

pub fn outcome_distribution<T: Scalar>(mu: T, model: &PhotocountModel<T>) -> OutcomeDistribution<T> {
    let classes = thermal_class_probs(mu);
    let mut p = [T::zero(); 4];
    for (class_p, row) in classes.iter().zip(model.confusion()) {
        for (acc, c) in p.iter_mut().zip(row) {
            *acc += *class_p * *c;
        }
    }
    OutcomeDistribution { p }
}

pub fn error_exponent_categorical<T: Scalar>(
    dist_yes: &OutcomeDistribution<T>,
    dist_no: &OutcomeDistribution<T>,
    nu: &NuAssignment<T>,
) -> T {
    let (mean_y, sd_y) = dist_yes.moments(nu);
    let (mean_n, sd_n) = dist_no.moments(nu);
    exponent_from_moments(mean_y, sd_y, mean_n, sd_n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuOptimum<T = f64> {
    pub nu: NuAssignment<T>,
    pub exponent: T,
    /// Set when both distributions coincide and every assignment gives zero.
    pub flat: bool,
}

/// Starting points `(x, y)` of the restarts; the first one is the counting
/// assignment `(2, 1, 1, 0)` in the gg chart.
const SEEDS: [[f64; 2]; 5] = [[0.5, 0.5], [0.0, 0.0], [0.9, -0.4], [-0.6, 0.3], [0.2, 0.95]];

/// Which entry is pinned to one in a chart; the other two are free.
const CHARTS: [Outcome; 3] = [Outcome::Gg, Outcome::Ge, Outcome::Eg];

fn chart_point<T: Scalar>(pinned: Outcome, x: &[T]) -> NuAssignment<T> {
    let mut nu = [T::zero(); 4];
    nu[pinned.index()] = T::one();
    let mut free = CHARTS.iter().filter(|o| **o != pinned);
    nu[free.next().unwrap().index()] = x[0];
    nu[free.next().unwrap().index()] = x[1];
    NuAssignment { nu }
}

/// Maximizes the categorical error exponent over `nu`.
///
/// Affine invariance leaves two real degrees of freedom. Every assignment with
/// some entry different from `nu_ee` is, up to an affine map, a point of one of
/// three charts (`nu_ee = 0`, one of gg/ge/eg pinned to 1). Each seed is
/// polished with Nelder-Mead in every chart; the best result wins, earlier seeds
/// winning ties.
pub fn optimize_nu<T: Scalar>(dist_yes: &OutcomeDistribution<T>, dist_no: &OutcomeDistribution<T>) -> NuOptimum<T> {
    let start = NuAssignment::counting().normalized();
    let start_e = error_exponent_categorical(dist_yes, dist_no, &start);
    if dist_yes.p == dist_no.p {
        log::debug!("optimize_nu: identical outcome distributions, exponent is zero for every assignment");
        return NuOptimum { nu: start, exponent: T::zero(), flat: true };
    }

    let opts = NelderMeadOptions {
        initial_step: T::lit(0.25),
        x_tol: T::lit(1e-9),
        max_iter: 4000,
        ..Default::default()
    };
    let mut best = (start, start_e);
    for seed in SEEDS {
        let x0 = [T::lit(seed[0]), T::lit(seed[1])];
        for chart in CHARTS {
            let objective = |x: &[T]| -error_exponent_categorical(dist_yes, dist_no, &chart_point(chart, x));
            let m = nelder_mead(objective, &x0, &opts);
            let e = -m.f;
            if e > best.1 {
                best = (chart_point(chart, &m.x), e);
            }
        }
    }
    let nu = best.0.normalized();
    NuOptimum {
        exponent: error_exponent_categorical(dist_yes, dist_no, &nu).max(best.1),
        nu,
        flat: false,
    }
}
