//! Simulation toolkit for microwave quantum-illumination radar.
//!
//! The modules follow the signal chain: [`gaussian`] propagates the two-mode
//! state, [`analytic`] gives closed-form exponents and bounds, [`detector`]
//! models truncated photocounting, [`montecarlo`] emulates repeated attempts,
//! [`model`] tunes the receiver, [`fitkit`] holds the calibration fits and
//! [`uncertainty`] propagates measurement errors.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision.

// range checks are negated so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod detector;
pub mod error;
pub mod fitkit;
pub mod gaussian;
pub mod model;
pub mod montecarlo;
pub mod optim;
pub mod scalar;
pub mod uncertainty;

pub use analytic::{
    advantage, classical_bound, classical_bound_with, ideal_error_exponent, optimal_gain, quantum_bounds, BoundSet,
    ClassicalBoundForm,
};
pub use detector::{
    error_exponent_categorical, optimize_nu, outcome_distribution, thermal_class_probs, NuAssignment, NuOptimum,
    Outcome, OutcomeDistribution, PhotocountModel, PhotonClass,
};
pub use error::{Error, Result};
pub use gaussian::{
    receiver_mean_photons, received_state, tmsv_generate, Hypothesis, RadarParams, TwoModeState,
};
pub use montecarlo::{
    error_probability_scaling, estimate_error_exponent, run_trials, sample_thermal, ScalingPoint, TrialConfig,
    TrialTally,
};
pub use scalar::Scalar;
pub use uncertainty::{delta_e, delta_ecl, delta_q, Measured, NuMoments};

pub type RadarParams32 = RadarParams<f32>;
pub type RadarParams64 = RadarParams<f64>;
pub type TwoModeState32 = TwoModeState<f32>;
pub type TwoModeState64 = TwoModeState<f64>;
pub type PhotocountModel32 = PhotocountModel<f32>;
pub type PhotocountModel64 = PhotocountModel<f64>;
pub type NuAssignment32 = NuAssignment<f32>;
pub type NuAssignment64 = NuAssignment<f64>;
pub type Measured32 = Measured<f32>;
pub type Measured64 = Measured<f64>;
