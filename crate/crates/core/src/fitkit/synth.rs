//! Seeded synthetic calibration data and closed-loop recovery runs.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::interference::{cosine_model, fit_interference};
use super::ramsey::{fit_ramsey, ramsey_signal, RamseyModel};
use super::relaxation::{fit_relaxation, relaxation_signal, RelaxationModel};
use super::table::SampleTable;
use super::wigner::{coherent_wigner, kappa_with_uncertainty, pixel_noise, Window, WignerGrid};
use crate::error::{Error, Result};
use crate::montecarlo::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibration {
    Ramsey,
    Relaxation,
    Cosine,
    Kappa,
}

impl Calibration {
    pub const ALL: [Calibration; 4] = [Calibration::Ramsey, Calibration::Relaxation, Calibration::Cosine, Calibration::Kappa];

    /// Default truth: idler population 0.104, loaded population 8.6,
    /// phase -1.898 rad, reflectivity 3.02e-2.
    pub fn reference_truth(self) -> f64 {
        match self {
            Calibration::Ramsey => 0.104,
            Calibration::Relaxation => 8.6,
            Calibration::Cosine => -1.898,
            Calibration::Kappa => 3.02e-2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Calibration::Ramsey => "ramsey",
            Calibration::Relaxation => "relaxation",
            Calibration::Cosine => "cosine",
            Calibration::Kappa => "kappa",
        }
    }

    /// Name of the recovered quantity.
    pub fn quantity(self) -> &'static str {
        match self {
            Calibration::Ramsey => "n_idler",
            Calibration::Relaxation => "n_init",
            Calibration::Cosine => "phi0",
            Calibration::Kappa => "kappa",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Calibration::Ramsey => 11,
            Calibration::Relaxation => 12,
            Calibration::Cosine => 13,
            Calibration::Kappa => 14,
        }
    }
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Calibration {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Calibration::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown calibration `{s}` (expected ramsey, relaxation, cosine or kappa)"))
    }
}

/// Noise and sampling settings of the synthetic experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    /// Additive Gaussian noise on the unit-amplitude Ramsey signal.
    pub ramsey_noise: f64,
    pub ramsey_points: usize,
    pub relaxation_shots: u64,
    pub relaxation_points: usize,
    /// Additive Gaussian noise relative to the cosine offset.
    pub cosine_noise: f64,
    pub cosine_offset: f64,
    pub cosine_amplitude: f64,
    pub cosine_points: usize,
    pub wigner_noise: f64,
    pub wigner_nodes: usize,
    pub wigner_half_width: f64,
}

impl Default for SynthSettings {
    fn default() -> Self {
        SynthSettings {
            ramsey_noise: 0.01,
            ramsey_points: 601,
            relaxation_shots: 10_000,
            relaxation_points: 51,
            cosine_noise: 0.02,
            cosine_offset: 1.0,
            cosine_amplitude: 0.3,
            cosine_points: 61,
            wigner_noise: 0.01,
            wigner_nodes: 101,
            wigner_half_width: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CalibrationData {
    /// Samples and the fitted model at the same abscissae.
    Curve { samples: SampleTable, fitted: Vec<f64> },
    Grids { reference: WignerGrid, reflected: WignerGrid, window: Window },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoop {
    pub kind: Calibration,
    pub truth: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub converged: bool,
    pub data: CalibrationData,
}

impl ClosedLoop {
    /// Deviation from the truth in units of the fitted stderr.
    pub fn z_score(&self) -> f64 {
        (self.estimate - self.truth) / self.stderr
    }

    pub fn within(&self, k: f64) -> bool {
        self.converged && (self.estimate - self.truth).abs() <= k * self.stderr
    }
}

fn gaussian(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("finite, non-negative noise")
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Ramsey trace over `0 <= t <= T2` with additive noise.
pub fn synth_ramsey<R: Rng>(n_i: f64, model: &RamseyModel, s: &SynthSettings, rng: &mut R) -> SampleTable {
    let t = linspace(0.0, model.t2, s.ramsey_points);
    let noise = gaussian(s.ramsey_noise);
    let y = t.iter().map(|&ti| ramsey_signal(ti, n_i, model) + noise.sample(rng)).collect();
    SampleTable { abscissa: "t".into(), x: t, y, sigma: Some(vec![s.ramsey_noise; s.ramsey_points]) }
}

/// Vacuum-probability recovery over `0 <= t <= 5 T1` estimated from binomial shots.
pub fn synth_relaxation<R: Rng>(n_init: f64, model: &RelaxationModel, s: &SynthSettings, rng: &mut R) -> SampleTable {
    let t = linspace(0.0, 5.0 * model.t1, s.relaxation_points);
    let shots = s.relaxation_shots as f64;
    let mut y = Vec::with_capacity(t.len());
    let mut sigma = Vec::with_capacity(t.len());
    for &ti in &t {
        let p = relaxation_signal(ti, n_init, model);
        let k = Binomial::new(s.relaxation_shots, p).expect("probability in [0, 1]").sample(rng) as f64;
        let p_hat = k / shots;
        let p_est = p_hat.clamp(0.5 / shots, 1.0 - 0.5 / shots);
        y.push(p_hat);
        sigma.push((p_est * (1.0 - p_est) / shots).sqrt());
    }
    SampleTable { abscissa: "t".into(), x: t, y, sigma: Some(sigma) }
}

/// Cosine over one full period with additive noise.
pub fn synth_cosine<R: Rng>(phi0: f64, s: &SynthSettings, rng: &mut R) -> SampleTable {
    let n = s.cosine_points;
    let phi: Vec<f64> = (0..n)
        .map(|i| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / n as f64)
        .collect();
    let sd = s.cosine_noise * s.cosine_offset;
    let noise = gaussian(sd);
    let y = phi
        .iter()
        .map(|&p| cosine_model(p, s.cosine_offset, s.cosine_amplitude, phi0) + noise.sample(rng))
        .collect();
    SampleTable { abscissa: "phi".into(), x: phi, y, sigma: Some(vec![sd; n]) }
}

/// Coherent-state Wigner grid with additive pixel noise.
pub fn synth_wigner<R: Rng>(alpha: (f64, f64), s: &SynthSettings, rng: &mut R) -> WignerGrid {
    let noise = gaussian(s.wigner_noise);
    let w = coherent_wigner(alpha.0, alpha.1);
    let mut g = WignerGrid::square(s.wigner_nodes, s.wigner_half_width, w);
    g.values.iter_mut().for_each(|v| *v += noise.sample(rng));
    g
}

/// Window reaching five coherent-state widths (2.5 in amplitude units) past
/// both the reference and the reflected amplitudes.
pub fn kappa_window(alpha_ref: (f64, f64), alpha_refl: (f64, f64)) -> Window {
    Window::around(alpha_ref, 2.5).union(&Window::around(alpha_refl, 2.5))
}

/// Generates data at `truth`, fits it, and reports the recovery.
pub fn closed_loop(kind: Calibration, truth: f64, seed: u64, s: &SynthSettings) -> Result<ClosedLoop> {
    let mut rng = stream_rng(seed, &[kind.tag()]);
    match kind {
        Calibration::Ramsey => {
            let model = RamseyModel::reference();
            let samples = synth_ramsey(truth, &model, s, &mut rng);
            let fit = fit_ramsey(&samples.x, &samples.y, samples.sigma.as_deref(), &model)?;
            let fitted = samples.x.iter().map(|&t| fit.amplitude * ramsey_signal(t, fit.n_i, &model)).collect();
            Ok(ClosedLoop {
                kind,
                truth,
                estimate: fit.n_i,
                stderr: fit.n_i_stderr(),
                converged: fit.fit.converged,
                data: CalibrationData::Curve { samples, fitted },
            })
        }
        Calibration::Relaxation => {
            let model = RelaxationModel::reference();
            let samples = synth_relaxation(truth, &model, s, &mut rng);
            let fit = fit_relaxation(&samples.x, &samples.y, samples.sigma.as_deref(), &model)?;
            let fitted = samples.x.iter().map(|&t| relaxation_signal(t, fit.n_init, &model)).collect();
            Ok(ClosedLoop {
                kind,
                truth,
                estimate: fit.n_init,
                stderr: fit.stderr(),
                converged: fit.fit.converged,
                data: CalibrationData::Curve { samples, fitted },
            })
        }
        Calibration::Cosine => {
            let samples = synth_cosine(truth, s, &mut rng);
            let fit = fit_interference(&samples.x, &samples.y, samples.sigma.as_deref())?;
            let (phi0, sd) = match (fit.phi0, fit.phi0_stderr) {
                (Some(p), Some(sd)) => (p, sd),
                _ => return Err(Error::Degenerate("no oscillation found in cosine data".into())),
            };
            let fitted = samples.x.iter().map(|&p| cosine_model(p, fit.offset, fit.amplitude, phi0)).collect();
            Ok(ClosedLoop {
                kind,
                truth,
                // compare on the branch nearest the truth
                estimate: truth + super::interference::wrap_phase(phi0 - truth),
                stderr: sd,
                converged: fit.fit.as_ref().is_some_and(|f| f.converged),
                data: CalibrationData::Curve { samples, fitted },
            })
        }
        Calibration::Kappa => {
            if !(0.0..=1.0).contains(&truth) {
                return Err(Error::Domain { name: "kappa", value: truth, expected: "in [0, 1]" });
            }
            let a_ref = (1.0, 0.0);
            let a_refl = (truth.sqrt(), 0.0);
            let reference = synth_wigner(a_ref, s, &mut rng);
            let reflected = synth_wigner(a_refl, s, &mut rng);
            let window = kappa_window(a_ref, a_refl);
            let sigma = match (pixel_noise(&reference, &window), pixel_noise(&reflected, &window)) {
                (Some(a), Some(b)) => (0.5 * (a * a + b * b)).sqrt(),
                _ => return Err(Error::EmptyWindow),
            };
            let k = kappa_with_uncertainty(&reference, &reflected, &window, sigma)?;
            Ok(ClosedLoop {
                kind,
                truth,
                estimate: k.value,
                stderr: k.sigma,
                converged: true,
                data: CalibrationData::Grids { reference, reflected, window },
            })
        }
    }
}
