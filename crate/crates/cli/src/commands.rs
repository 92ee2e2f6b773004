//! One function per subcommand. Each returns the tables and summary to write.

use qradar::analytic::{classical_bound_with, ideal_error_exponent, optimal_gain, quantum_bounds};
use qradar::detector::{error_exponent_categorical, outcome_distribution, NuAssignment, Outcome};
use qradar::fitkit::synth::CalibrationData;
use qradar::fitkit::closed_loop;
use qradar::model::{advantage_at, truncated_exponent, tune_gain, ModelPoint, GAIN_BRACKET, GAIN_TOL};
use qradar::montecarlo::{
    error_probability_scaling, estimate_error_exponent, fit_error_decay, receiver_means, run_trials, stream_rng,
    DecayModel, TrialConfig,
};
use qradar::uncertainty::{delta_q, Measured};
use qradar::Hypothesis;
use rand::RngCore;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bounds,
    Fig3,
    Fig4,
    Simulate,
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Simulate => "simulate",
            Command::Calibrate => "calibrate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    /// Additional CSV files by name.
    pub extra: Vec<(String, Table)>,
    pub results: Value,
    /// Short human-readable digest printed to stdout.
    pub text: String,
}

impl Report {
    pub fn summary(&self, command: Command, config: &RunConfig) -> Value {
        json!({
            "command": command.name(),
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "results": self.results,
        })
    }
}

pub fn run(command: Command, config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    match command {
        Command::Bounds => cmd_bounds(config),
        Command::Fig3 => cmd_fig3(config),
        Command::Fig4 => cmd_fig4(config),
        Command::Simulate => cmd_simulate(config),
        Command::Calibrate => cmd_calibrate(config),
    }
}

const NU_COLUMNS: [(&str, &str); 4] = [
    ("nu_gg", "effective photon number of outcome gg"),
    ("nu_ge", "effective photon number of outcome ge"),
    ("nu_eg", "effective photon number of outcome eg"),
    ("nu_ee", "effective photon number of outcome ee"),
];

fn nu_cells(nu: &NuAssignment) -> Vec<Cell> {
    nu.nu.iter().map(|v| Cell::Num(*v)).collect()
}

fn columns(head: &[(&'static str, &'static str)], with_nu: bool) -> Vec<(&'static str, &'static str)> {
    let mut c = head.to_vec();
    if with_nu {
        c.extend_from_slice(&NU_COLUMNS);
    }
    c
}

fn measured(m: &Measured) -> Value {
    json!({"value": m.value, "sigma": m.sigma})
}

pub fn cmd_bounds(config: &RunConfig) -> Result<Report, CliError> {
    let r = &config.radar;
    let b = quantum_bounds(r.kappa_yes, r.n_signal, r.n_noise)?;
    let e_cl = classical_bound_with(r.kappa_yes, r.n_signal, r.n_noise, config.classical_form)?;
    let g_opt = optimal_gain(r.n_signal, r.n_noise, r.kappa_yes)?;
    let mut table = Table::new(
        "qradar bounds",
        &[
            ("kappa", "target reflectivity"),
            ("n_signal", "signal photons per mode"),
            ("n_noise", "thermal noise photons per mode"),
            ("e_cl", "classical coherent-state exponent"),
            ("e_pair", "exponent reachable with pairwise joint measurements"),
            ("e_max", "quantum-illumination optimum"),
            ("q_max", "e_max / asymptotic e_cl"),
            ("g_opt", "receiver gain maximizing the ideal counting exponent"),
        ],
    );
    table.note(format!("classical form: {:?}", config.classical_form));
    table.push(vec![
        r.kappa_yes.into(),
        r.n_signal.into(),
        r.n_noise.into(),
        e_cl.into(),
        b.e_pair.into(),
        b.e_max.into(),
        b.q_max.into(),
        g_opt.into(),
    ]);
    let text = format!(
        "E_cl   = {e_cl:.4e}\nE_pair = {:.4e}\nE_max  = {:.4e}\nQ_max  = {}\nG_opt  = {g_opt:.5}\n",
        b.e_pair, b.e_max, b.q_max
    );
    Ok(Report {
        table,
        extra: Vec::new(),
        results: json!({"e_cl": e_cl, "e_pair": b.e_pair, "e_max": b.e_max, "q_max": b.q_max, "g_opt": g_opt}),
        text,
    })
}

/// Seed of the `index`-th point of a sweep.
pub fn point_seed(seed: u64, tag: u64, index: u64) -> u64 {
    stream_rng(seed, &[tag, index]).next_u64()
}

const FIG3_TAG: u64 = 0xf163;

pub fn cmd_fig3(config: &RunConfig) -> Result<Report, CliError> {
    let base = config.radar_params()?;
    let model = config.photocount_model()?;
    let e_cl = classical_bound_with(base.kappa_yes, base.n_signal(), base.n_noise, config.classical_form)?;
    let gains = config.sweep.gains.values();
    let mut table = Table::new(
        "qradar fig3: error exponent versus receiver gain",
        &columns(
            &[
                ("g_rx", "receiver gain"),
                ("e_ideal", "exponent of untruncated ideal photon counting"),
                ("e_model", "exponent of the truncated four-outcome receiver with the nu below"),
                ("e_mc", "Monte Carlo plug-in exponent with the nu below"),
                ("e_mc_sigma", "propagated uncertainty of e_mc"),
                ("e_cl", "classical exponent"),
                ("q_model", "e_model / e_cl"),
                ("q_mc", "e_mc / e_cl"),
                ("q_mc_sigma", "uncertainty of q_mc"),
            ],
            true,
        ),
    );
    table.note(format!("trials per hypothesis: {}; seed: {}", config.trials.m_trials, config.seed));
    table.note(match config.nu {
        Some(_) => "nu fixed by the configuration".to_string(),
        None => "nu optimized on the model distributions at each gain".to_string(),
    });

    let mut peak: Option<(f64, f64, Measured)> = None;
    let mut points = Vec::new();
    for (i, &g) in gains.iter().enumerate() {
        let p = base.with_gain(g);
        let e_ideal = ideal_error_exponent(&p)?;
        let opt = truncated_exponent(&p, &model)?;
        let (nu, e_model) = match config.fixed_nu() {
            Some(nu) => {
                let (my, mn) = receiver_means(&p)?;
                (nu, error_exponent_categorical(&outcome_distribution(my, &model), &outcome_distribution(mn, &model), &nu))
            }
            None => (opt.nu, opt.exponent),
        };
        let cfg = TrialConfig { seed: point_seed(config.seed, FIG3_TAG, i as u64), ..config.trial_config() };
        let tally = run_trials(&p, &model, &cfg)?;
        let e_mc = estimate_error_exponent(&tally, &nu)?;
        let q_mc = delta_q(e_mc, Measured::exact(e_cl))?;
        if peak.as_ref().is_none_or(|(_, e, _)| e_model > *e) {
            peak = Some((g, e_model, e_mc));
        }
        let mut row: Vec<Cell> = vec![
            g.into(),
            e_ideal.into(),
            e_model.into(),
            e_mc.value.into(),
            e_mc.sigma.into(),
            e_cl.into(),
            (e_model / e_cl).into(),
            q_mc.value.into(),
            q_mc.sigma.into(),
        ];
        row.extend(nu_cells(&nu));
        table.push(row);
        points.push(json!({"g_rx": g, "e_model": e_model, "e_mc": measured(&e_mc)}));
    }
    let (g_peak, e_peak, e_mc_peak) = peak.expect("nonempty gain axis");
    let g_opt = optimal_gain(base.n_signal(), base.n_noise, base.kappa_yes)?;
    let text = format!(
        "model peak at G = {g_peak:.4}: E = {e_peak:.4e} (Q = {:.3}); MC there {:.4e} +/- {:.1e}; E_cl = {e_cl:.4e}\n",
        e_peak / e_cl,
        e_mc_peak.value,
        e_mc_peak.sigma
    );
    Ok(Report {
        table,
        extra: Vec::new(),
        results: json!({
            "e_cl": e_cl,
            "g_opt_ideal": g_opt,
            "peak": {"g_rx": g_peak, "e_model": e_peak, "q_model": e_peak / e_cl, "e_mc": measured(&e_mc_peak)},
            "points": points,
        }),
        text,
    })
}

fn model_point_json(p: &ModelPoint) -> Value {
    json!({
        "kind": "model",
        "g_rx": p.g_rx,
        "exponent": p.exponent,
        "e_cl": p.e_cl,
        "q": p.q,
        "nu": p.nu.nu,
        "reachable": p.reachable,
    })
}

pub fn cmd_fig4(config: &RunConfig) -> Result<Report, CliError> {
    let base = config.radar_params()?;
    let model = config.photocount_model()?;
    let nth_axis = config.sweep.nth_signal.values();
    let nn_axis = config.sweep.n_noise.values();
    let ns_axis = config.sweep.n_signal.values();
    let mut jobs = Vec::with_capacity(nth_axis.len() * nn_axis.len() * ns_axis.len());
    for &nth in &nth_axis {
        for &nn in &nn_axis {
            jobs.extend(ns_axis.iter().map(|&ns| (nth, nn, ns)));
        }
    }
    let results: Vec<Result<ModelPoint, qradar::Error>> = jobs
        .par_iter()
        .map(|&(nth, nn, ns)| {
            let mut t = base;
            t.nth_signal = nth;
            t.n_noise = nn;
            advantage_at(&t, ns, &model)
        })
        .collect();

    let mut table = Table::new(
        "qradar fig4: model quantum advantage",
        &columns(
            &[
                ("nth_signal", "thermal population of the signal mode before squeezing"),
                ("n_noise", "thermal noise photons per mode"),
                ("n_signal", "signal photons per mode"),
                ("g_rx", "receiver gain maximizing e_model"),
                ("e_model", "exponent of the truncated four-outcome receiver"),
                ("e_cl", "classical exponent"),
                ("q_model", "e_model / e_cl; zero when unreachable"),
                ("reachable", "false when n_signal is below nth_signal"),
            ],
            true,
        ),
    );
    table.note(format!(
        "model values, not measurements; nth_idler = {}; kappa = {}; gain tuned on [{}, {}] to {}",
        base.nth_idler, base.kappa_yes, GAIN_BRACKET.0, GAIN_BRACKET.1, GAIN_TOL
    ));
    table.note("long layout: one row per (nth_signal, n_noise, n_signal) in that nesting order");

    let mut curves = Vec::new();
    let mut curve_best: Option<(f64, f64, f64, f64)> = None;
    for (&(nth, nn, ns), res) in jobs.iter().zip(results) {
        let p = res?;
        let e_cl = classical_bound_with(base.kappa_yes, ns, nn, config.classical_form)?;
        let q = if p.reachable { p.exponent / e_cl } else { 0.0 };
        let mut row: Vec<Cell> =
            vec![nth.into(), nn.into(), ns.into(), p.g_rx.into(), p.exponent.into(), e_cl.into(), q.into(), p.reachable.into()];
        row.extend(nu_cells(&p.nu));
        table.push(row);
        match curve_best {
            Some((a, b, _, best)) if a == nth && b == nn => {
                if q > best {
                    curve_best = Some((nth, nn, ns, q));
                }
            }
            prev => {
                if let Some(c) = prev {
                    curves.push(c);
                }
                curve_best = Some((nth, nn, ns, q));
            }
        }
    }
    curves.extend(curve_best);

    let reference = tune_gain(&base, &model, GAIN_BRACKET.0, GAIN_BRACKET.1, GAIN_TOL)?;
    let mut text = String::new();
    for (nth, nn, ns, q) in &curves {
        text.push_str(&format!("nth_S = {nth:.1e}, N_N = {nn}: max Q = {q:.3} at N_S = {ns:.3e}\n"));
    }
    text.push_str(&format!(
        "model at configured point: G = {:.4}, Q = {:.3}\n",
        reference.g_rx, reference.q
    ));
    let curves_json: Vec<Value> = curves
        .iter()
        .map(|(nth, nn, ns, q)| json!({"nth_signal": nth, "n_noise": nn, "best_n_signal": ns, "max_q_model": q}))
        .collect();
    Ok(Report {
        table,
        extra: Vec::new(),
        results: json!({"curves": curves_json, "configured_point": model_point_json(&reference)}),
        text,
    })
}

pub fn cmd_simulate(config: &RunConfig) -> Result<Report, CliError> {
    let params = config.radar_params()?;
    let model = config.photocount_model()?;
    let (mu_yes, mu_no) = receiver_means(&params)?;
    let dist_yes = outcome_distribution(mu_yes, &model);
    let dist_no = outcome_distribution(mu_no, &model);
    let opt = truncated_exponent(&params, &model)?;
    let nu = config.fixed_nu().unwrap_or(opt.nu);
    let e_model = error_exponent_categorical(&dist_yes, &dist_no, &nu);
    let e_cl = classical_bound_with(params.kappa_yes, params.n_signal(), params.n_noise, config.classical_form)?;
    let tally = run_trials(&params, &model, &config.trial_config())?;
    let e_mc = estimate_error_exponent(&tally, &nu)?;
    let q_mc = delta_q(e_mc, Measured::exact(e_cl))?;
    let m_yes = tally.trials(Hypothesis::Present) as f64;
    let m_no = tally.trials(Hypothesis::Absent) as f64;

    let mut table = Table::new(
        "qradar simulate: outcome tallies",
        &[
            ("outcome", "two-qubit readout outcome"),
            ("count_yes", "occurrences with the target present"),
            ("count_no", "occurrences with the target absent"),
            ("p_yes", "empirical frequency, target present"),
            ("p_no", "empirical frequency, target absent"),
            ("p_model_yes", "model probability, target present"),
            ("p_model_no", "model probability, target absent"),
            ("nu", "effective photon number"),
        ],
    );
    table.note(format!("trials per hypothesis: {}; seed: {}", config.trials.m_trials, config.seed));
    for o in Outcome::ALL {
        let i = o.index();
        let (cy, cn) = (tally.counts_yes[i], tally.counts_no[i]);
        table.push(vec![
            o.label().into(),
            cy.into(),
            cn.into(),
            (cy as f64 / m_yes).into(),
            (cn as f64 / m_no).into(),
            dist_yes.p[i].into(),
            dist_no.p[i].into(),
            nu.nu[i].into(),
        ]);
    }

    let mut extra = Vec::new();
    let mut scaling_json = Value::Null;
    if let Some(s) = &config.scaling {
        let pts = error_probability_scaling(&params, &model, &nu, &s.m_list, s.reps, config.seed)?;
        let mut t = Table::new(
            "qradar simulate: error probability versus number of attempts",
            &[
                ("m", "attempts per decision"),
                ("p_error", "fraction of wrong decisions, equal priors"),
                ("errors", "wrong decisions"),
                ("campaigns", "decisions per hypothesis"),
                ("sufficient", "at least 30 wrong decisions"),
            ],
        );
        for p in &pts {
            t.push(vec![p.m.into(), p.p_error.into(), p.errors.into(), p.campaigns.into(), p.sufficient.into()]);
        }
        let fit = |m| fit_error_decay(&pts, m).map(|f| json!({"slope": f.slope, "intercept": f.intercept, "points": f.points}));
        scaling_json = json!({
            "exponent_model": e_model,
            "fit_exponential": fit(DecayModel::Exponential),
            "fit_gaussian_tail": fit(DecayModel::GaussianTail),
        });
        extra.push(("scaling.csv".to_string(), t));
    }

    let text = format!(
        "E_mc = {:.4e} +/- {:.1e}; E_model = {e_model:.4e}; E_cl = {e_cl:.4e}; Q_mc = {:.3} +/- {:.3}\n",
        e_mc.value, e_mc.sigma, q_mc.value, q_mc.sigma
    );
    Ok(Report {
        table,
        extra,
        results: json!({
            "mu_yes": mu_yes,
            "mu_no": mu_no,
            "nu": nu.nu,
            "e_ideal": ideal_error_exponent(&params)?,
            "e_model": e_model,
            "e_mc": measured(&e_mc),
            "e_cl": e_cl,
            "q_mc": measured(&q_mc),
            "counts_yes": tally.counts_yes,
            "counts_no": tally.counts_no,
            "scaling": scaling_json,
        }),
        text,
    })
}

pub fn cmd_calibrate(config: &RunConfig) -> Result<Report, CliError> {
    let kind = config
        .calibration
        .kind
        .ok_or_else(|| CliError::Config("`calibration.kind` is required (ramsey, relaxation, cosine or kappa)".into()))?;
    let truth = config.calibration.truth.unwrap_or(kind.reference_truth());
    let fit = closed_loop(kind, truth, config.seed, &config.calibration.synth)?;
    if !fit.converged {
        return Err(CliError::Numerical(format!("{kind} fit did not converge")));
    }
    let table = match &fit.data {
        CalibrationData::Curve { samples, fitted } => {
            let abscissa: &'static str = if samples.abscissa == "phi" { "phi" } else { "t" };
            let mut t = Table::new(
                &format!("qradar calibrate {kind}: synthetic data and fitted model"),
                &[
                    (abscissa, if abscissa == "phi" { "phase, rad" } else { "time, s" }),
                    ("value", "synthetic measurement"),
                    ("sigma", "standard deviation of value"),
                    ("fitted", "fitted model"),
                ],
            );
            for i in 0..samples.x.len() {
                let s = samples.sigma.as_ref().map_or(0.0, |s| s[i]);
                t.push(vec![samples.x[i].into(), samples.y[i].into(), s.into(), fitted[i].into()]);
            }
            t
        }
        CalibrationData::Grids { reference, reflected, window } => {
            let mut t = Table::new(
                "qradar calibrate kappa: synthetic Wigner functions",
                &[
                    ("x", "real part of alpha"),
                    ("y", "imaginary part of alpha"),
                    ("w_reference", "Wigner function of the reference pulse"),
                    ("w_reflected", "Wigner function of the reflected pulse"),
                    ("in_window", "node used for the mean amplitude"),
                ],
            );
            for (iy, &y) in reference.ys.iter().enumerate() {
                for (ix, &x) in reference.xs.iter().enumerate() {
                    t.push(vec![
                        x.into(),
                        y.into(),
                        reference.at(ix, iy).into(),
                        reflected.at(ix, iy).into(),
                        window.contains(x, y).into(),
                    ]);
                }
            }
            t
        }
    };
    let z = fit.z_score();
    let text = format!(
        "{} = {:.6e} +/- {:.2e} (truth {truth}, z = {z:.2})\n",
        kind.quantity(),
        fit.estimate,
        fit.stderr
    );
    Ok(Report {
        table,
        extra: Vec::new(),
        results: json!({
            "kind": kind,
            "quantity": kind.quantity(),
            "truth": truth,
            "estimate": fit.estimate,
            "stderr": fit.stderr,
            "z": z,
            "within_2_sigma": fit.within(2.0),
        }),
        text,
    })
}
