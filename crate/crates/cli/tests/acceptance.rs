//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::Instant;

use qradar::detector::{error_exponent_categorical, NuAssignment, OutcomeDistribution};
use qradar::fitkit::{closed_loop, Calibration, SynthSettings};
use qradar::model::{advantage_at, log_space, tune_gain, GAIN_BRACKET, GAIN_TOL};
use qradar::montecarlo::{
    error_probability_scaling, estimate_error_exponent, fit_error_decay, run_trials, DecayModel, TrialConfig,
};
use qradar::uncertainty::{delta_e, delta_ecl, Measured, NuMoments};
use qradar::{
    classical_bound, ideal_error_exponent, optimal_gain, quantum_bounds, PhotocountModel, RadarParams,
};
use qradar_cli::{run_with_threads, Command, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn optimal_gain_check() -> Outcome {
    let g = optimal_gain(3.53e-2, 10.8, 3.02e-2).unwrap();
    outcome((1.014..=1.019).contains(&g), format!("G_opt = {g:.5}, required [1.014, 1.019]"))
}

fn sig4(x: f64) -> f64 {
    let scale = 10f64.powi(3 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

fn same4(x: f64, lit: f64) -> bool {
    (sig4(x) - lit).abs() <= 1e-9 * lit.abs()
}

fn bounds_check() -> Outcome {
    let (k, s, n) = (3.02e-2, 3.53e-2, 10.8);
    let e_cl = classical_bound(k, s, n).unwrap();
    let b = quantum_bounds(k, s, n).unwrap();
    // formula values at 4 significant digits
    let want = [(e_cl, k * s / (4.0 * n)), (b.e_pair, k * s / (2.0 * n)), (b.e_max, k * s / n)];
    let formula_ok = want.iter().all(|(got, exp)| same4(*got, sig4(*exp)));
    let e_cl_literal = same4(e_cl, 2.468e-5);
    let ratios_ok = b.e_max / e_cl == 4.0 && b.e_pair / e_cl == 2.0;
    let literal = |x: f64, lit: f64| if same4(x, lit) { "matches" } else { "differs from" };
    outcome(
        formula_ok && e_cl_literal && ratios_ok,
        format!(
            "E_cl = {:.4e}, E_pair = {:.4e} ({} stated 4.937e-5), E_max = {:.4e} ({} stated 9.873e-5); \
             E_max/E_cl = {}, E_pair/E_cl = {}",
            sig4(e_cl),
            sig4(b.e_pair),
            literal(b.e_pair, 4.937e-5),
            sig4(b.e_max),
            literal(b.e_max, 9.873e-5),
            b.e_max / e_cl,
            b.e_pair / e_cl
        ),
    )
}

fn advantage_check() -> Outcome {
    let p = RadarParams::reference();
    let model = PhotocountModel::ideal();
    let best = tune_gain(&p, &model, GAIN_BRACKET.0, GAIN_BRACKET.1, GAIN_TOL).unwrap();
    let tuned = p.with_gain(best.g_rx);
    let tally = run_trials(&tuned, &model, &TrialConfig::reference(2023)).unwrap();
    let mc = estimate_error_exponent(&tally, &best.nu).unwrap();
    let dev = (mc.value - best.exponent).abs() / mc.sigma;
    outcome(
        best.exponent >= 2.7e-5 && (1.05..=1.45).contains(&best.q) && dev <= 3.0,
        format!(
            "peak E = {:.4e} at G = {:.4}, Q = {:.3}; MC (M = 7.5e6) {:.4e} +/- {:.2e}, {dev:.2} sigma from model",
            best.exponent, best.g_rx, best.q, mc.value, mc.sigma
        ),
    )
}

fn idler_loss_check() -> Outcome {
    let p = RadarParams::reference();
    let mut lossy = p;
    lossy.eta_idler = (-2.0 * std::f64::consts::PI * 40e3 * 86e-9).exp();
    let e0 = ideal_error_exponent(&p).unwrap();
    let e1 = ideal_error_exponent(&lossy).unwrap();
    let cut = 1.0 - e1 / e0;
    outcome(
        (0.018..=0.025).contains(&cut),
        format!("eta = {:.5}, exponent reduced by {:.2}% (bath {})", lossy.eta_idler, 100.0 * cut, p.idler_bath),
    )
}

fn fig4b_check() -> Outcome {
    let model = PhotocountModel::ideal();
    let ns = log_space(1e-3, 1e-1, 30);
    let mut details = Vec::new();
    let mut pass = true;
    for nth_idler in [0.0, 2.5e-3] {
        let curve = |nth_s: f64| -> Vec<f64> {
            let t = RadarParams::new(1.0, 3.02e-2, 10.0, 1.0).with_thermal(nth_s, nth_idler);
            ns.iter().map(|&n| advantage_at(&t, n, &model).unwrap().q).collect()
        };
        let (q0, q5) = (curve(0.0), curve(5e-3));
        let above = q0.iter().zip(&q5).all(|(a, b)| a > b);
        // the small-signal side ends where the impure curve peaks
        let peak = (0..ns.len()).max_by(|&i, &j| q5[i].total_cmp(&q5[j])).unwrap();
        let dirty_below = q5[..peak].iter().any(|&q| q < 1.0);
        let pure_above = q0[..=peak].iter().all(|&q| q > 1.0);
        pass &= above && dirty_below && pure_above;
        details.push(format!(
            "nth_I = {nth_idler}: Q0 > Q5 everywhere {above}; Q5 < 1 below N_S = {:.2e} {dirty_below}; \
             Q0 > 1 there {pure_above} (Q0 from {:.3} to {:.3})",
            ns[peak], q0[0], q0[ns.len() - 1]
        ));
    }
    outcome(pass, details.join("; "))
}

fn scaling_check() -> Outcome {
    let g = optimal_gain(0.5, 1.0, 0.5).unwrap();
    let p = RadarParams::new(1.0, 0.5, 1.0, g).with_signal_photons(0.5).unwrap();
    let model = PhotocountModel::ideal();
    let best = qradar::model::truncated_exponent(&p, &model).unwrap();
    let m_list: Vec<u64> = (1..=10).map(|i| 200 * i).collect();
    let pts = error_probability_scaling(&p, &model, &best.nu, &m_list, 50_000, 17).unwrap();
    let fit = fit_error_decay(&pts, DecayModel::GaussianTail).unwrap();
    let raw = fit_error_decay(&pts, DecayModel::Exponential).unwrap();
    let rel = fit.slope / best.exponent - 1.0;
    outcome(
        rel.abs() < 0.15,
        format!(
            "E = {:.4e}; slope of -ln P - ln(M)/2 = {:.4e} ({:+.1}%, {} points); uncorrected slope {:.4e} ({:+.1}%)",
            best.exponent,
            fit.slope,
            100.0 * rel,
            fit.points,
            raw.slope,
            100.0 * (raw.slope / best.exponent - 1.0)
        ),
    )
}

fn affine_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut dist = || {
            let w: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.01..1.0));
            let s: f64 = w.iter().sum();
            OutcomeDistribution::new(w.map(|x| x / s)).unwrap()
        };
        let (dy, dn) = (dist(), dist());
        let nu = NuAssignment::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        );
        let a = rng.random_range(0.1..10.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let b = rng.random_range(-10.0..10.0);
        let e = error_exponent_categorical(&dy, &dn, &nu);
        let e2 = error_exponent_categorical(&dy, &dn, &nu.affine(a, b));
        worst = worst.max((e - e2).abs() / e.abs().max(1e-300));
    }
    outcome(worst <= 1e-10, format!("1000 cases, worst relative deviation {worst:.2e}"))
}

fn calibration_check() -> Outcome {
    let s = SynthSettings::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in Calibration::ALL {
        let hits =
            (0..100).filter(|&seed| closed_loop(kind, kind.reference_truth(), seed, &s).is_ok_and(|c| c.within(2.0))).count();
        pass &= hits >= 95;
        parts.push(format!("{kind} {hits}/100"));
    }
    outcome(pass, format!("within 2 stderr: {}", parts.join(", ")))
}

fn uncertainty_check() -> Outcome {
    let e: Measured = delta_ecl(Measured::new(3.02e-2, 0.08e-2), Measured::new(3.53e-2, 0.04e-2), Measured::new(10.8, 0.3)).unwrap();
    let rel = e.relative();
    let m: NuMoments = NuMoments { mean_yes: 0.3, sd_yes: 0.5, mean_no: 0.28, sd_no: 0.48 };
    let ratio: f64 = delta_e(&m, 1_000_000).unwrap().sigma / delta_e(&m, 4_000_000).unwrap().sigma;
    outcome(
        (rel - 0.040).abs() <= 0.001 && (ratio - 2.0).abs() <= 1e-12,
        format!("dE_cl/E_cl = {:.2}%; dE(M)/dE(4M) = {ratio}", 100.0 * rel),
    )
}

fn determinism_check() -> Outcome {
    let config = RunConfig { seed: 99, ..RunConfig::default() };
    let csv = |threads| run_with_threads(Command::Fig3, &config, Some(threads)).unwrap().table.to_csv_string();
    let a = csv(1);
    let same = [csv(1), csv(2), csv(4)].iter().all(|b| *b == a);
    outcome(same, format!("fig3 CSV ({} bytes) identical over 2 runs at 1 thread and at 2 and 4 threads", a.len()))
}

fn main() {
    let checks: [Check; 10] = [
        ("optimal gain", optimal_gain_check),
        ("bounds arithmetic", bounds_check),
        ("quantum advantage reproduction", advantage_check),
        ("idler-loss penalty", idler_loss_check),
        ("fig4b thermal impurity", fig4b_check),
        ("error-probability scaling", scaling_check),
        ("affine invariance", affine_check),
        ("calibration closed loops", calibration_check),
        ("uncertainty formulas", uncertainty_check),
        ("determinism", determinism_check),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
