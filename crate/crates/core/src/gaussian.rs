//! Zero-mean two-mode Gaussian state of the signal and idler resonators.
//!
//! The state is carried as the moment triple `(N_S, N_I, N_C)`: the signal and
//! idler mean photon numbers plus the phase-insensitive cross-correlation
//! `<a_S a_I>`. For zero-mean two-mode squeezed thermal states these three
//! numbers determine the whole covariance matrix, see
//! [`TwoModeState::covariance_matrix`].
//!
//! A radar attempt is modelled as
//! generation -> target channel -> idler storage -> mode overlap -> recombination,
//! and [`receiver_mean_photons`] runs that chain for one hypothesis.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::scalar::Scalar;

/// Target hypothesis of one detection attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    Present,
    Absent,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::Present, Hypothesis::Absent];
}

/// Physical parameters of one radar configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarParams<T = f64> {
    /// Gain of the entangling two-mode squeeze (>= 1).
    pub g0: T,
    /// Signal resonator thermal population before squeezing.
    pub nth_signal: T,
    /// Idler resonator thermal population after cooling.
    pub nth_idler: T,
    pub kappa_yes: T,
    pub kappa_no: T,
    /// Injected noise photon number `N_N`.
    pub n_noise: T,
    /// Gain of the recombining squeeze (>= 1).
    pub g_rx: T,
    /// Pump phase offset between the two squeezes, radians.
    pub delta_phi: T,
    /// Idler storage transmissivity `exp(-gamma_I tau_d)`.
    pub eta_idler: T,
    /// Population of the bath the idler relaxes towards while stored.
    pub idler_bath: T,
    /// Temporal overlap between the returning signal and the recombination pump.
    pub mode_overlap: T,
}

impl<T: Scalar> RadarParams<T> {
    /// Lossless, pure configuration with the given squeeze, target and receiver settings.
    pub fn new(g0: T, kappa_yes: T, n_noise: T, g_rx: T) -> Self {
        RadarParams {
            g0,
            nth_signal: T::zero(),
            nth_idler: T::zero(),
            kappa_yes,
            kappa_no: T::zero(),
            n_noise,
            g_rx,
            delta_phi: T::zero(),
            eta_idler: T::one(),
            idler_bath: T::zero(),
            mode_overlap: T::one(),
        }
    }

    /// Operating point of the gain sweep: `N_S = 3.53e-2`, `N_N = 10.8`,
    /// `kappa = 3.02e-2`, pure squeezed vacuum, receiver gain 1.015.
    ///
    /// The idler storage bath is set to the measured idler equilibrium
    /// population (1.5e-2); storage loss itself is off (`eta_idler = 1`).
    pub fn reference() -> Self {
        let mut p = Self::new(T::one(), T::lit(3.02e-2), T::lit(10.8), T::lit(1.015));
        p.g0 = squeeze_gain_for_signal(T::lit(3.53e-2), T::zero(), T::zero())
            .expect("reference signal photon number is reachable");
        p.idler_bath = T::lit(IDLER_EQUILIBRIUM_POPULATION);
        p
    }

    /// Re-derives `g0` so that the generated signal holds `n_signal` photons
    /// given the current thermal populations.
    pub fn with_signal_photons(mut self, n_signal: T) -> Result<Self> {
        self.g0 = squeeze_gain_for_signal(n_signal, self.nth_signal, self.nth_idler)?;
        Ok(self)
    }

    /// Sets the thermal populations, keeping the bath tied to the idler population.
    pub fn with_thermal(mut self, nth_signal: T, nth_idler: T) -> Self {
        self.nth_signal = nth_signal;
        self.nth_idler = nth_idler;
        self.idler_bath = nth_idler;
        self
    }

    pub fn with_gain(mut self, g_rx: T) -> Self {
        self.g_rx = g_rx;
        self
    }

    /// Mean photon number of the emitted signal, `N_S`.
    pub fn n_signal(&self) -> T {
        self.g0 * self.nth_signal + (self.g0 - T::one()) * (self.nth_idler + T::one())
    }

    pub fn kappa(&self, hypothesis: Hypothesis) -> T {
        match hypothesis {
            Hypothesis::Present => self.kappa_yes,
            Hypothesis::Absent => self.kappa_no,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: T| x >= T::zero() && x <= T::one();
        ensure(self.g0 >= T::one(), "g0", self.g0.as_f64(), ">= 1")?;
        ensure(self.g_rx >= T::one(), "g_rx", self.g_rx.as_f64(), ">= 1")?;
        for (name, v) in [
            ("nth_signal", self.nth_signal),
            ("nth_idler", self.nth_idler),
            ("n_noise", self.n_noise),
            ("idler_bath", self.idler_bath),
        ] {
            ensure(v >= T::zero() && v.is_finite(), name, v.as_f64(), "finite and >= 0")?;
        }
        for (name, v) in [
            ("kappa_yes", self.kappa_yes),
            ("kappa_no", self.kappa_no),
            ("eta_idler", self.eta_idler),
            ("mode_overlap", self.mode_overlap),
        ] {
            ensure(unit(v), name, v.as_f64(), "in [0, 1]")?;
        }
        ensure(
            self.kappa_no <= self.kappa_yes,
            "kappa_no",
            self.kappa_no.as_f64(),
            "<= kappa_yes",
        )?;
        ensure(self.delta_phi.is_finite(), "delta_phi", self.delta_phi.as_f64(), "finite")
    }
}

/// Thermal equilibrium population of the idler resonator without active cooling.
pub const IDLER_EQUILIBRIUM_POPULATION: f64 = 1.5e-2;

/// Mean photon numbers and correlation of the signal/idler pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeState<T = f64> {
    pub n_sig: T,
    pub n_idl: T,
    pub n_corr: T,
    /// Thermal background already added onto the signal arm.
    pub n_bg: T,
}

/// Two-mode squeezed thermal state produced by a squeeze of gain `g0` acting on
/// thermal signal and idler populations.
pub fn tmsv_generate<T: Scalar>(g0: T, nth_signal: T, nth_idler: T) -> Result<TwoModeState<T>> {
    ensure(g0 >= T::one(), "g0", g0.as_f64(), ">= 1")?;
    ensure(nth_signal >= T::zero(), "nth_signal", nth_signal.as_f64(), ">= 0")?;
    ensure(nth_idler >= T::zero(), "nth_idler", nth_idler.as_f64(), ">= 0")?;
    let one = T::one();
    Ok(TwoModeState {
        n_sig: g0 * nth_signal + (g0 - one) * (nth_idler + one),
        n_idl: (g0 - one) * (nth_signal + one) + g0 * nth_idler,
        n_corr: (g0 * (g0 - one)).sqrt() * (one + nth_signal + nth_idler),
        n_bg: T::zero(),
    })
}

/// Inverts the generation formula for `N_S`.
pub fn squeeze_gain_for_signal<T: Scalar>(n_signal: T, nth_signal: T, nth_idler: T) -> Result<T> {
    ensure(
        n_signal >= nth_signal,
        "n_signal",
        n_signal.as_f64(),
        ">= nth_signal (a squeeze cannot cool the signal)",
    )?;
    let one = T::one();
    Ok((n_signal + one + nth_idler) / (one + nth_signal + nth_idler))
}

/// Signal photon number inferred from the idler population measured right
/// after generation: `N_S = N_I - nth_I + nth_S`.
pub fn signal_from_idler_population<T: Scalar>(n_idler: T, nth_signal: T, nth_idler: T) -> T {
    n_idler - nth_idler + nth_signal
}

/// Squeeze gain inferred from the idler population it produces:
/// `G = (1 + N_I + nth_S) / (1 + nth_I + nth_S)`.
pub fn gain_from_idler_population<T: Scalar>(n_idler: T, nth_signal: T, nth_idler: T) -> T {
    let one = T::one();
    (one + n_idler + nth_signal) / (one + nth_idler + nth_signal)
}

impl<T: Scalar> TwoModeState<T> {
    /// Beam splitter of transmissivity `kappa` mixing the signal with a thermal
    /// field that contributes `n_noise` photons at the receiver.
    pub fn target_channel(&self, kappa: T, n_noise: T) -> Result<Self> {
        ensure(kappa >= T::zero() && kappa <= T::one(), "kappa", kappa.as_f64(), "in [0, 1]")?;
        ensure(n_noise >= T::zero(), "n_noise", n_noise.as_f64(), ">= 0")?;
        Ok(TwoModeState {
            n_sig: kappa * self.n_sig + n_noise,
            n_idl: self.n_idl,
            n_corr: kappa.sqrt() * self.n_corr,
            n_bg: n_noise,
        })
    }

    /// Idler storage loss: beam splitter of transmissivity `eta` towards a
    /// thermal bath of population `nth_bath`.
    pub fn idler_decay(&self, eta: T, nth_bath: T) -> Result<Self> {
        ensure(eta >= T::zero() && eta <= T::one(), "eta", eta.as_f64(), "in [0, 1]")?;
        ensure(nth_bath >= T::zero(), "nth_bath", nth_bath.as_f64(), ">= 0")?;
        Ok(TwoModeState {
            n_idl: eta * self.n_idl + (T::one() - eta) * nth_bath,
            n_corr: eta.sqrt() * self.n_corr,
            ..*self
        })
    }

    /// Scales the correlation by the temporal overlap of the two modes.
    pub fn with_mode_overlap(&self, overlap: T) -> Result<Self> {
        ensure(
            overlap >= T::zero() && overlap <= T::one(),
            "mode_overlap",
            overlap.as_f64(),
            "in [0, 1]",
        )?;
        Ok(TwoModeState { n_corr: overlap * self.n_corr, ..*self })
    }

    /// Idler photon number after the recombining squeeze of gain `g_rx`:
    /// `G N_I + (G-1)(1 + N_S) + 2 sqrt(G(G-1)) N_C cos(dphi)`.
    pub fn recombine_mean_photons(&self, g_rx: T, delta_phi: T) -> Result<T> {
        ensure(g_rx >= T::one(), "g_rx", g_rx.as_f64(), ">= 1")?;
        let one = T::one();
        let cross = T::lit(2.0) * (g_rx * (g_rx - one)).sqrt() * self.n_corr * delta_phi.cos();
        let mu = g_rx * self.n_idl + (g_rx - one) * (one + self.n_sig) + cross;
        Ok(mu.max(T::zero()))
    }

    /// Covariance matrix `<x^dag x>` over `x = (a_S^dag, a_I^dag, a_S, a_I)`.
    pub fn covariance_matrix(&self) -> [[T; 4]; 4] {
        let (s, i, c, o, z) = (self.n_sig, self.n_idl, self.n_corr, T::one(), T::zero());
        [
            [s + o, z, z, c],
            [z, i + o, c, z],
            [z, c, s, z],
            [c, z, z, i],
        ]
    }

    /// Reads the moment triple back from a covariance matrix in the
    /// [`covariance_matrix`](Self::covariance_matrix) layout.
    pub fn from_covariance(v: &[[T; 4]; 4]) -> Self {
        TwoModeState {
            n_sig: v[2][2],
            n_idl: v[3][3],
            n_corr: v[0][3],
            n_bg: T::zero(),
        }
    }

    /// Necessary positivity condition `N_C^2 <= (N_S + 1)(N_I + 1)`.
    pub fn is_physical(&self) -> bool {
        let one = T::one();
        self.n_sig >= T::zero()
            && self.n_idl >= T::zero()
            && self.n_corr * self.n_corr <= (self.n_sig + one) * (self.n_idl + one) * (one + T::epsilon())
    }
}

/// Receiver-side idler photon number from the covariance matrix entries,
/// independent of the closed form in [`TwoModeState::recombine_mean_photons`].
pub fn recombine_from_covariance<T: Scalar>(v: &[[T; 4]; 4], g_rx: T, delta_phi: T) -> T {
    let one = T::one();
    // <c^dag c> = G <a_I^dag a_I> + (G-1) <a_R a_R^dag> + sqrt(G(G-1)) (<a_I^dag a_R^dag> e^{i dphi} + c.c.)
    let cross = (g_rx * (g_rx - one)).sqrt() * (v[3][0] + v[0][3]) * delta_phi.cos();
    g_rx * v[3][3] + (g_rx - one) * v[0][0] + cross
}

/// Signal/idler state at the receiver input for one hypothesis.
pub fn received_state<T: Scalar>(params: &RadarParams<T>, hypothesis: Hypothesis) -> Result<TwoModeState<T>> {
    params.validate()?;
    tmsv_generate(params.g0, params.nth_signal, params.nth_idler)?
        .target_channel(params.kappa(hypothesis), params.n_noise)?
        .idler_decay(params.eta_idler, params.idler_bath)?
        .with_mode_overlap(params.mode_overlap)
}

/// Mean photon number measured in the idler after recombination.
pub fn receiver_mean_photons<T: Scalar>(params: &RadarParams<T>, hypothesis: Hypothesis) -> Result<T> {
    received_state(params, hypothesis)?.recombine_mean_photons(params.g_rx, params.delta_phi)
}

/// Overlap of a pump envelope with the returning signal as a function of the
/// delay error `tau_d - tau_opt`.
pub trait OverlapProfile<T: Scalar> {
    fn overlap(&self, delay_error: T) -> T;
}

/// Normalized overlap of two identical `sech(t / width)` envelopes:
/// `a / sinh(a)` with `a = offset / width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechOverlap<T> {
    pub width: T,
}

impl<T: Scalar> SechOverlap<T> {
    /// Envelope whose full width at half maximum is `fwhm`.
    pub fn from_fwhm(fwhm: T) -> Self {
        // sech(x) = 1/2 at x = acosh(2)
        SechOverlap { width: fwhm / (T::lit(2.0) * T::lit(2.0).acosh()) }
    }
}

impl<T: Scalar> OverlapProfile<T> for SechOverlap<T> {
    fn overlap(&self, delay_error: T) -> T {
        let a = (delay_error / self.width).abs();
        if a < T::lit(1e-4) {
            T::one() - a * a / T::lit(6.0)
        } else {
            a / a.sinh()
        }
    }
}

impl<T: Scalar, F: Fn(T) -> T> OverlapProfile<T> for F {
    fn overlap(&self, delay_error: T) -> T {
        self(delay_error)
    }
}

/// Mode overlap for a pump delay `tau_d` against the round-trip optimum `tau_opt`.
pub fn delay_overlap<T: Scalar, P: OverlapProfile<T>>(tau_d: T, tau_opt: T, profile: &P) -> T {
    profile.overlap(tau_d - tau_opt).max(T::zero()).min(T::one())
}
