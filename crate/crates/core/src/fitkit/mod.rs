//! Curve fitting for the calibration measurements.

pub mod interference;
pub mod lsq;
pub mod ramsey;
pub mod relaxation;
pub mod synth;
pub mod table;
pub mod wigner;

pub use interference::{fit_interference, InterferenceFit};
pub use lsq::{lsq_fit, FitResult, LsqOptions};
pub use ramsey::{fit_ramsey, ramsey_signal, RamseyFit, RamseyModel};
pub use relaxation::{fit_relaxation, relaxation_signal, RelaxationFit, RelaxationModel};
pub use synth::{closed_loop, Calibration, ClosedLoop, SynthSettings};
pub use table::SampleTable;
pub use wigner::{kappa_from_wigner, kappa_from_wigner_split, kappa_with_uncertainty, RingArtifact, Window, WignerGrid};
