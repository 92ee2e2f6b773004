//! Run configuration: a JSON document, command-line overrides, and validation.

use std::path::{Path, PathBuf};

use qradar::analytic::ClassicalBoundForm;
use qradar::detector::{NuAssignment, PhotocountModel};
use qradar::fitkit::{Calibration, SynthSettings};
use qradar::gaussian::{RadarParams, IDLER_EQUILIBRIUM_POPULATION};
use qradar::model::log_space;
use qradar::montecarlo::TrialConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    /// Emitted signal photon number `N_S`; sets the squeeze gain.
    pub n_signal: f64,
    pub n_noise: f64,
    pub kappa_yes: f64,
    #[serde(default)]
    pub kappa_no: f64,
    #[serde(default)]
    pub nth_signal: f64,
    #[serde(default)]
    pub nth_idler: f64,
    #[serde(default = "default_gain")]
    pub g_rx: f64,
    #[serde(default)]
    pub delta_phi: f64,
    #[serde(default = "one")]
    pub eta_idler: f64,
    #[serde(default = "default_bath")]
    pub idler_bath: f64,
    #[serde(default = "one")]
    pub mode_overlap: f64,
}

fn default_gain() -> f64 {
    1.015
}
fn default_bath() -> f64 {
    IDLER_EQUILIBRIUM_POPULATION
}
fn one() -> f64 {
    1.0
}

impl Default for RadarConfig {
    /// Gain-sweep operating point with a pure two-mode squeezed probe.
    fn default() -> Self {
        RadarConfig {
            n_signal: 3.53e-2,
            n_noise: 10.8,
            kappa_yes: 3.02e-2,
            kappa_no: 0.0,
            nth_signal: 0.0,
            nth_idler: 0.0,
            g_rx: default_gain(),
            delta_phi: 0.0,
            eta_idler: 1.0,
            idler_bath: default_bath(),
            mode_overlap: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default)]
    pub eps_pi: f64,
    #[serde(default)]
    pub eps_ro: f64,
    /// Full confusion matrix, rows `{0, 1, >=2}` photons, columns gg, ge, eg, ee.
    /// Overrides the error knobs.
    #[serde(default)]
    pub confusion: Option<[[f64; 4]; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialsConfig {
    #[serde(default = "default_m")]
    pub m_trials: u64,
    #[serde(default = "default_chunk")]
    pub chunk: u64,
}

fn default_m() -> u64 {
    7_500_000
}
fn default_chunk() -> u64 {
    500_000
}

impl Default for TrialsConfig {
    fn default() -> Self {
        TrialsConfig { m_trials: default_m(), chunk: default_chunk() }
    }
}

/// Explicit values or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        num: usize,
        #[serde(default)]
        log: bool,
    },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Values(v) => v.clone(),
            Axis::Range { start, stop, num, log: true } => log_space(*start, *stop, *num),
            Axis::Range { start, stop, num, log: false } => match num {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Receiver gains of the gain sweep.
    #[serde(default = "default_gains")]
    pub gains: Axis,
    /// Signal photon numbers of the advantage map.
    #[serde(default = "default_signal_axis")]
    pub n_signal: Axis,
    #[serde(default = "default_noise_axis")]
    pub n_noise: Axis,
    #[serde(default = "default_nth_axis")]
    pub nth_signal: Axis,
}

fn default_gains() -> Axis {
    Axis::Range { start: 1.005, stop: 1.05, num: 10, log: false }
}
fn default_signal_axis() -> Axis {
    Axis::Range { start: 1e-3, stop: 1e-1, num: 30, log: true }
}
fn default_noise_axis() -> Axis {
    Axis::Values(vec![10.0])
}
fn default_nth_axis() -> Axis {
    Axis::Values(vec![0.0, 5e-3])
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            gains: default_gains(),
            n_signal: default_signal_axis(),
            n_noise: default_noise_axis(),
            nth_signal: default_nth_axis(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub m_list: Vec<u64>,
    pub reps: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(default)]
    pub kind: Option<Calibration>,
    /// Injected value of the recovered quantity; defaults per kind.
    #[serde(default)]
    pub truth: Option<f64>,
    #[serde(default)]
    pub synth: SynthSettings,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub radar: RadarConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub trials: TrialsConfig,
    /// Fixed effective photon numbers (gg, ge, eg, ee); optimized when absent.
    #[serde(default)]
    pub nu: Option<[f64; 4]>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub scaling: Option<ScalingConfig>,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub classical_form: ClassicalBoundForm,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub n_signal: Option<f64>,
    pub n_noise: Option<f64>,
    pub kappa: Option<f64>,
    pub g_rx: Option<f64>,
    pub nth_signal: Option<f64>,
    pub nth_idler: Option<f64>,
    pub eta_idler: Option<f64>,
    pub m_trials: Option<u64>,
    pub gains: Option<Vec<f64>>,
    pub calibration: Option<Calibration>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: Overrides) {
        set(&mut self.seed, o.seed);
        if o.out.is_some() {
            self.out = o.out;
        }
        set(&mut self.radar.n_signal, o.n_signal);
        set(&mut self.radar.n_noise, o.n_noise);
        set(&mut self.radar.kappa_yes, o.kappa);
        set(&mut self.radar.g_rx, o.g_rx);
        set(&mut self.radar.nth_signal, o.nth_signal);
        set(&mut self.radar.nth_idler, o.nth_idler);
        set(&mut self.radar.eta_idler, o.eta_idler);
        set(&mut self.trials.m_trials, o.m_trials);
        if let Some(g) = o.gains {
            self.sweep.gains = Axis::Values(g);
        }
        if o.calibration.is_some() {
            self.calibration.kind = o.calibration;
        }
    }

    /// Checks every range constraint and names the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        let r = &self.radar;
        let bad = |field: &str, value: f64, expected: &str| {
            Err(CliError::Config(format!("`{field}` = {value}: expected {expected}")))
        };
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        for (field, v) in [
            ("radar.n_signal", r.n_signal),
            ("radar.nth_signal", r.nth_signal),
            ("radar.nth_idler", r.nth_idler),
            ("radar.idler_bath", r.idler_bath),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(field, v, "a finite value >= 0");
            }
        }
        if !(r.n_noise.is_finite() && r.n_noise > 0.0) {
            return bad("radar.n_noise", r.n_noise, "a finite value > 0");
        }
        for (field, v) in [
            ("radar.kappa_yes", r.kappa_yes),
            ("radar.kappa_no", r.kappa_no),
            ("radar.eta_idler", r.eta_idler),
            ("radar.mode_overlap", r.mode_overlap),
        ] {
            if !unit(v) {
                return bad(field, v, "a value in [0, 1]");
            }
        }
        if r.kappa_no > r.kappa_yes {
            return bad("radar.kappa_no", r.kappa_no, "<= radar.kappa_yes");
        }
        if !(r.g_rx >= 1.0 && r.g_rx.is_finite()) {
            return bad("radar.g_rx", r.g_rx, ">= 1");
        }
        if !r.delta_phi.is_finite() {
            return bad("radar.delta_phi", r.delta_phi, "a finite phase");
        }
        if r.n_signal < r.nth_signal {
            return bad("radar.n_signal", r.n_signal, ">= radar.nth_signal");
        }
        for (field, v) in [("detector.eps_pi", self.detector.eps_pi), ("detector.eps_ro", self.detector.eps_ro)] {
            if !unit(v) {
                return bad(field, v, "a value in [0, 1]");
            }
        }
        if self.trials.m_trials < 2 {
            return bad("trials.m_trials", self.trials.m_trials as f64, ">= 2");
        }
        if self.trials.chunk < 1 {
            return bad("trials.chunk", self.trials.chunk as f64, ">= 1");
        }
        for (field, axis, min) in [
            ("sweep.gains", &self.sweep.gains, 1.0),
            ("sweep.n_signal", &self.sweep.n_signal, 0.0),
            ("sweep.nth_signal", &self.sweep.nth_signal, 0.0),
        ] {
            let v = axis.values();
            if v.is_empty() {
                return Err(CliError::Config(format!("`{field}` is empty")));
            }
            if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x >= min)) {
                return bad(field, *x, &format!("entries >= {min}"));
            }
        }
        let nn = self.sweep.n_noise.values();
        if nn.is_empty() {
            return Err(CliError::Config("`sweep.n_noise` is empty".into()));
        }
        if let Some(x) = nn.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return bad("sweep.n_noise", *x, "entries > 0");
        }
        if let Some(s) = &self.scaling {
            if s.m_list.is_empty() || s.m_list.contains(&0) || !s.m_list.windows(2).all(|w| w[0] <= w[1]) {
                return Err(CliError::Config("`scaling.m_list` must be nonempty, positive and ascending".into()));
            }
            if s.reps == 0 {
                return bad("scaling.reps", 0.0, ">= 1");
            }
        }
        if let Some(nu) = &self.nu {
            if nu.iter().any(|v| !v.is_finite()) || nu.iter().all(|v| *v == nu[0]) {
                return Err(CliError::Config("`nu` must be finite and not all equal".into()));
            }
        }
        self.photocount_model()?;
        self.radar_params()?;
        Ok(())
    }

    pub fn radar_params(&self) -> Result<RadarParams, CliError> {
        let r = &self.radar;
        let mut p = RadarParams::new(1.0, r.kappa_yes, r.n_noise, r.g_rx)
            .with_thermal(r.nth_signal, r.nth_idler)
            .with_signal_photons(r.n_signal)
            .map_err(|e| CliError::Config(format!("`radar.n_signal`: {e}")))?;
        p.kappa_no = r.kappa_no;
        p.delta_phi = r.delta_phi;
        p.eta_idler = r.eta_idler;
        p.idler_bath = r.idler_bath;
        p.mode_overlap = r.mode_overlap;
        p.validate().map_err(|e| CliError::Config(format!("radar: {e}")))?;
        Ok(p)
    }

    pub fn photocount_model(&self) -> Result<PhotocountModel, CliError> {
        match self.detector.confusion {
            Some(c) => PhotocountModel::new(c).map_err(|e| CliError::Config(format!("`detector.confusion`: {e}"))),
            None => PhotocountModel::with_errors(self.detector.eps_pi, self.detector.eps_ro)
                .map_err(|e| CliError::Config(format!("detector: {e}"))),
        }
    }

    pub fn fixed_nu(&self) -> Option<NuAssignment> {
        self.nu.map(|[a, b, c, d]| NuAssignment::new(a, b, c, d))
    }

    pub fn trial_config(&self) -> TrialConfig {
        TrialConfig { m_trials: self.trials.m_trials, seed: self.seed, chunk: self.trials.chunk }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
