//! Monte Carlo emulation of repeated detection attempts.
//!
//! Every attempt draws a thermal photon number for the recombined idler,
//! reduces it to a photon class, and reports an outcome through the
//! confusion matrix. Work is split into chunks, each with its own ChaCha
//! stream derived from `(seed, hypothesis, chunk index)`, so tallies do not
//! depend on how chunks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{
    error_exponent_categorical, outcome_distribution, NuAssignment, OutcomeDistribution, PhotocountModel, PhotonClass,
};
use crate::error::{ensure, Result};
use crate::gaussian::{receiver_mean_photons, Hypothesis, RadarParams};
use crate::uncertainty::{delta_e, Measured, NuMoments};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// Attempts per hypothesis.
    pub m_trials: u64,
    pub seed: u64,
    /// Attempts per independent random stream.
    pub chunk: u64,
}

impl TrialConfig {
    /// 15 series of 5e5 attempts.
    pub fn reference(seed: u64) -> Self {
        TrialConfig { m_trials: 7_500_000, seed, chunk: 500_000 }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.m_trials >= 1, "m_trials", self.m_trials as f64, ">= 1")?;
        ensure(self.chunk >= 1, "chunk", self.chunk as f64, ">= 1")
    }
}

/// Outcome counts under both hypotheses, in [`Outcome::ALL`](crate::detector::Outcome::ALL) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrialTally {
    pub counts_yes: [u64; 4],
    pub counts_no: [u64; 4],
}

impl TrialTally {
    /// Tally with the expected (real-valued) counts rounded to integers.
    pub fn expected(dist_yes: &OutcomeDistribution, dist_no: &OutcomeDistribution, m: u64) -> Self {
        let round = |d: &OutcomeDistribution| d.p.map(|p| (p * m as f64).round() as u64);
        TrialTally { counts_yes: round(dist_yes), counts_no: round(dist_no) }
    }

    pub fn counts(&self, hypothesis: Hypothesis) -> &[u64; 4] {
        match hypothesis {
            Hypothesis::Present => &self.counts_yes,
            Hypothesis::Absent => &self.counts_no,
        }
    }

    pub fn trials(&self, hypothesis: Hypothesis) -> u64 {
        self.counts(hypothesis).iter().sum()
    }

    pub fn distribution(&self, hypothesis: Hypothesis) -> Result<OutcomeDistribution> {
        OutcomeDistribution::from_counts(self.counts(hypothesis))
    }

    /// Sample mean and standard deviation of `nu` under each hypothesis.
    pub fn moments(&self, nu: &NuAssignment) -> Result<NuMoments> {
        let (mean_yes, sd_yes) = self.distribution(Hypothesis::Present)?.moments(nu);
        let (mean_no, sd_no) = self.distribution(Hypothesis::Absent)?.moments(nu);
        Ok(NuMoments { mean_yes, sd_yes, mean_no, sd_no })
    }

    fn add(mut self, other: &TrialTally) -> Self {
        for i in 0..4 {
            self.counts_yes[i] += other.counts_yes[i];
            self.counts_no[i] += other.counts_no[i];
        }
        self
    }
}

/// Inverse-CDF sampler of the thermal (geometric) photon-number law
/// `P(k) = mu^k / (mu + 1)^(k + 1)`.
#[derive(Debug, Clone, Copy)]
pub struct ThermalSampler {
    q: f64,
    q2: f64,
    ln_q: f64,
}

impl ThermalSampler {
    pub fn new(mu: f64) -> Self {
        let q = if mu > 0.0 { mu / (mu + 1.0) } else { 0.0 };
        ThermalSampler { q, q2: q * q, ln_q: q.ln() }
    }

    /// `K = floor(ln U / ln q)` with `U` uniform on `(0, 1]`, so `P(K >= k) = q^k`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = 1.0 - rng.random::<f64>();
        if self.q == 0.0 {
            return 0;
        }
        (u.ln() / self.ln_q).floor() as u64
    }

    /// Photon class of one draw; uses the same uniform as [`sample`](Self::sample)
    /// and compares it against `q` and `q^2` instead of taking a logarithm.
    pub fn sample_class<R: Rng + ?Sized>(&self, rng: &mut R) -> PhotonClass {
        let u = 1.0 - rng.random::<f64>();
        if u > self.q {
            PhotonClass::Zero
        } else if u > self.q2 {
            PhotonClass::One
        } else {
            PhotonClass::TwoOrMore
        }
    }
}

pub fn sample_thermal<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    ThermalSampler::new(mu).sample(rng)
}

/// 64-bit finalizer of SplitMix64.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream for a position in the work decomposition.
pub fn stream_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let key = path
        .iter()
        .fold(mix(seed ^ 0x9e37_79b9_7f4a_7c15), |acc, &p| mix(acc ^ mix(p.wrapping_add(0x632b_e59b_d9b4_e019))));
    ChaCha8Rng::seed_from_u64(key)
}

fn hypothesis_tag(h: Hypothesis) -> u64 {
    match h {
        Hypothesis::Present => 1,
        Hypothesis::Absent => 2,
    }
}

/// Draws `n` attempts and returns their outcome counts.
fn draw_outcomes<R: Rng>(sampler: &ThermalSampler, model: &PhotocountModel, n: u64, rng: &mut R) -> [u64; 4] {
    let mut counts = [0u64; 4];
    if model.is_ideal() {
        let mut classes = [0u64; 3];
        for _ in 0..n {
            classes[sampler.sample_class(rng).index()] += 1;
        }
        for class in PhotonClass::ALL {
            counts[class.ideal_outcome().index()] += classes[class.index()];
        }
        return counts;
    }
    let cumulative: Vec<[f64; 4]> = model
        .confusion()
        .iter()
        .map(|row| {
            let mut acc = 0.0;
            row.map(|p| {
                acc += p;
                acc
            })
        })
        .collect();
    for _ in 0..n {
        let row = &cumulative[sampler.sample_class(rng).index()];
        let u: f64 = rng.random();
        let idx = row.iter().position(|&c| u < c).unwrap_or(3);
        counts[idx] += 1;
    }
    counts
}

/// Mean receiver photon numbers `(present, absent)`.
pub fn receiver_means(params: &RadarParams) -> Result<(f64, f64)> {
    Ok((
        receiver_mean_photons(params, Hypothesis::Present)?,
        receiver_mean_photons(params, Hypothesis::Absent)?,
    ))
}

pub fn run_trials(params: &RadarParams, model: &PhotocountModel, cfg: &TrialConfig) -> Result<TrialTally> {
    cfg.validate()?;
    let (mu_yes, mu_no) = receiver_means(params)?;
    let n_chunks = cfg.m_trials.div_ceil(cfg.chunk);
    let jobs: Vec<(Hypothesis, u64)> = Hypothesis::BOTH
        .iter()
        .flat_map(|&h| (0..n_chunks).map(move |c| (h, c)))
        .collect();
    let tally = jobs
        .par_iter()
        .map(|&(h, c)| {
            let mu = if h == Hypothesis::Present { mu_yes } else { mu_no };
            let n = cfg.chunk.min(cfg.m_trials - c * cfg.chunk);
            let mut rng = stream_rng(cfg.seed, &[hypothesis_tag(h), c]);
            let counts = draw_outcomes(&ThermalSampler::new(mu), model, n, &mut rng);
            let mut t = TrialTally::default();
            match h {
                Hypothesis::Present => t.counts_yes = counts,
                Hypothesis::Absent => t.counts_no = counts,
            }
            t
        })
        .reduce(TrialTally::default, |a, b| a.add(&b));
    Ok(tally)
}

/// Plug-in exponent of a tally with its propagated uncertainty.
pub fn estimate_error_exponent(tally: &TrialTally, nu: &NuAssignment) -> Result<Measured> {
    let moments = tally.moments(nu)?;
    let m = tally.trials(Hypothesis::Present).min(tally.trials(Hypothesis::Absent));
    let sigma = delta_e(&moments, m)?.sigma;
    let value = error_exponent_categorical(
        &tally.distribution(Hypothesis::Present)?,
        &tally.distribution(Hypothesis::Absent)?,
        nu,
    );
    Ok(Measured::new(value, sigma))
}

/// Empirical error rate of campaigns of `m` attempts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub m: u64,
    pub p_error: f64,
    /// Wrong decisions summed over both hypotheses.
    pub errors: u64,
    /// Campaigns run per hypothesis.
    pub campaigns: u64,
    /// At least [`MIN_ERROR_EVENTS`] wrong decisions were observed.
    pub sufficient: bool,
}

pub const MIN_ERROR_EVENTS: u64 = 30;

const CAMPAIGNS_PER_STREAM: u64 = 512;

/// Runs `reps` campaigns of each length in `m_list` under each hypothesis
/// (equal priors) and decides by thresholding the campaign mean of `nu` at the
/// midpoint of the two expected means.
pub fn error_probability_scaling(
    params: &RadarParams,
    model: &PhotocountModel,
    nu: &NuAssignment,
    m_list: &[u64],
    reps: u64,
    seed: u64,
) -> Result<Vec<ScalingPoint>> {
    ensure(reps >= 1, "reps", reps as f64, ">= 1")?;
    ensure(
        m_list.windows(2).all(|w| w[0] <= w[1]),
        "m_list",
        m_list.first().copied().unwrap_or(0) as f64,
        "sorted ascending",
    )?;
    let (mu_yes, mu_no) = receiver_means(params)?;
    let dist_yes = outcome_distribution(mu_yes, model);
    let dist_no = outcome_distribution(mu_no, model);
    let (mean_yes, _) = dist_yes.moments(nu);
    let (mean_no, _) = dist_no.moments(nu);
    let threshold = 0.5 * (mean_yes + mean_no);
    let yes_above = mean_yes >= mean_no;

    let mut out = Vec::with_capacity(m_list.len());
    for (mi, &m) in m_list.iter().enumerate() {
        ensure(m >= 1, "m_list", m as f64, "entries >= 1")?;
        let n_streams = reps.div_ceil(CAMPAIGNS_PER_STREAM);
        let jobs: Vec<(Hypothesis, u64)> = Hypothesis::BOTH
            .iter()
            .flat_map(|&h| (0..n_streams).map(move |s| (h, s)))
            .collect();
        let errors: u64 = jobs
            .par_iter()
            .map(|&(h, s)| {
                let mu = if h == Hypothesis::Present { mu_yes } else { mu_no };
                let sampler = ThermalSampler::new(mu);
                let mut rng = stream_rng(seed, &[0x5ca1e, mi as u64, hypothesis_tag(h), s]);
                let campaigns = CAMPAIGNS_PER_STREAM.min(reps - s * CAMPAIGNS_PER_STREAM);
                let mut wrong = 0u64;
                for _ in 0..campaigns {
                    let counts = draw_outcomes(&sampler, model, m, &mut rng);
                    let mean: f64 =
                        counts.iter().zip(&nu.nu).map(|(c, v)| *c as f64 * v).sum::<f64>() / m as f64;
                    let says_present = if mean == threshold {
                        rng.random::<bool>()
                    } else {
                        (mean > threshold) == yes_above
                    };
                    if says_present != (h == Hypothesis::Present) {
                        wrong += 1;
                    }
                }
                wrong
            })
            .sum();
        let p_error = errors as f64 / (2 * reps) as f64;
        let sufficient = errors >= MIN_ERROR_EVENTS;
        if !sufficient {
            log::warn!("M = {m}: only {errors} error events in {} campaigns; P_error is unreliable", 2 * reps);
        }
        out.push(ScalingPoint { m, p_error, errors, campaigns: reps, sufficient });
    }
    Ok(out)
}

/// How the sub-exponential prefactor of `P_error(M)` is treated in the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// Fit `-ln P = E M + c`.
    Exponential,
    /// Fit `-ln P - ln(M) / 2 = E M + c`, the Gaussian-tail form
    /// `P ~ exp(-E M) / sqrt(4 pi E M)`.
    GaussianTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Weighted straight-line fit of the error decay over the points with enough
/// error events; weights are the event counts (`Var ln P ~ 1 / errors`).
pub fn fit_error_decay(points: &[ScalingPoint], model: DecayModel) -> Option<DecayFit> {
    let used: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|p| p.sufficient && p.p_error > 0.0)
        .map(|p| {
            let m = p.m as f64;
            let mut y = -p.p_error.ln();
            if model == DecayModel::GaussianTail {
                y -= 0.5 * m.ln();
            }
            (m, y, p.errors as f64)
        })
        .collect();
    if used.len() < 2 {
        return None;
    }
    let sw: f64 = used.iter().map(|u| u.2).sum();
    let mx = used.iter().map(|u| u.2 * u.0).sum::<f64>() / sw;
    let my = used.iter().map(|u| u.2 * u.1).sum::<f64>() / sw;
    let sxx: f64 = used.iter().map(|u| u.2 * (u.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|u| u.2 * (u.0 - mx) * (u.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(DecayFit { slope, intercept: my - slope * mx, points: used.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::Outcome;

    #[test]
    fn vacuum_always_gives_zero() {
        let mut rng = stream_rng(1, &[]);
        assert!((0..1000).all(|_| sample_thermal(0.0, &mut rng) == 0));
    }

    #[test]
    fn class_sampler_agrees_with_count_sampler() {
        let s = ThermalSampler::new(0.7);
        let mut a = stream_rng(9, &[3]);
        let mut b = stream_rng(9, &[3]);
        for _ in 0..10_000 {
            assert_eq!(PhotonClass::of_count(s.sample(&mut a)), s.sample_class(&mut b));
        }
    }

    #[test]
    fn unit_mean_vacuum_probability() {
        let mut rng = stream_rng(2, &[]);
        let n = 1_000_000;
        let zeros = (0..n).filter(|_| sample_thermal(1.0, &mut rng) == 0).count() as f64;
        let sd = (0.25 / n as f64).sqrt();
        assert!((zeros / n as f64 - 0.5).abs() < 3.0 * sd);
    }

    #[test]
    fn sample_mean_matches_mu() {
        let mu = 0.221;
        let mut rng = stream_rng(3, &[]);
        let n = 1_000_000;
        let total: u64 = (0..n).map(|_| sample_thermal(mu, &mut rng)).sum();
        let sd = ((mu * mu + mu) / n as f64).sqrt();
        assert!((total as f64 / n as f64 - mu).abs() < 3.0 * sd);
    }

    #[test]
    fn single_trial_tally_is_one_hot() {
        let cfg = TrialConfig { m_trials: 1, seed: 5, chunk: 10 };
        let t = run_trials(&RadarParams::reference(), &PhotocountModel::ideal(), &cfg).unwrap();
        assert_eq!(t.trials(Hypothesis::Present), 1);
        assert_eq!(t.counts_yes.iter().filter(|&&c| c == 1).count(), 1);
        assert_eq!(t.counts_no.iter().filter(|&&c| c == 1).count(), 1);
    }

    #[test]
    fn chunking_is_deterministic() {
        let p = RadarParams::reference();
        let m = PhotocountModel::with_errors(0.02, 0.01).unwrap();
        let cfg = TrialConfig { m_trials: 100_003, seed: 77, chunk: 10_000 };
        let a = run_trials(&p, &m, &cfg).unwrap();
        let b = run_trials(&p, &m, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials(Hypothesis::Absent), 100_003);
        assert!(a.counts_yes[Outcome::Eg.index()] > 0);
    }

    #[test]
    fn expected_tally_reproduces_categorical_exponent() {
        let p = RadarParams::reference();
        let model = PhotocountModel::ideal();
        let (y, n) = receiver_means(&p).unwrap();
        let (dy, dn) = (outcome_distribution(y, &model), outcome_distribution(n, &model));
        let tally = TrialTally::expected(&dy, &dn, 1_000_000_000_000);
        let nu = NuAssignment::counting();
        let est = estimate_error_exponent(&tally, &nu).unwrap();
        let exact = error_exponent_categorical(&dy, &dn, &nu);
        assert!((est.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn decay_fit_recovers_synthetic_line() {
        let pts: Vec<ScalingPoint> = (1..=5)
            .map(|i| {
                let m = 100 * i;
                ScalingPoint { m, p_error: (-0.01 * m as f64 - 0.3).exp(), errors: 100, campaigns: 1000, sufficient: true }
            })
            .collect();
        let fit = fit_error_decay(&pts, DecayModel::Exponential).unwrap();
        assert!((fit.slope - 0.01).abs() < 1e-12 && fit.points == 5);
        assert!(fit_error_decay(&pts[..1], DecayModel::Exponential).is_none());
    }
}
