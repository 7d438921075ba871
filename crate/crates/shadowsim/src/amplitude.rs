//! Complex probability amplitudes and the four composition rules.
//!
//! Everything downstream (interferometer paths, shadow streams, the sliced
//! propagator) is built out of four operations on amplitudes:
//!
//! * [`probability_of`] — probability is the squared modulus,
//! * [`sum_alternatives`] — indistinguishable alternatives add,
//! * [`chain_route`] — successive legs of one route multiply,
//! * [`product_independent`] — independent subsystems multiply.
//!
//! Amplitudes are stored in rectangular form; [`Clock`] is a polar *view*
//! (phase in `[0, 2π)`, non-negative magnitude), not a second store of truth,
//! so repeated conversions cannot accumulate phase wrapping.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

/// Absolute tolerance used by exact-math assertions throughout the crate.
pub const EXACT_TOL: f64 = 1e-12;

/// A complex probability amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplitude {
    pub re: f64,
    pub im: f64,
}

/// Polar view of an [`Amplitude`]: Feynman's rotating-clock picture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clock {
    /// Phase in radians, normalized to `[0, 2π)`.
    pub phase: f64,
    /// Non-negative magnitude.
    pub magnitude: f64,
}

/// Errors from amplitude arithmetic.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AmplitudeError {
    #[error("non-finite amplitude in {context}: {re} + {im}i")]
    NonFinite { context: &'static str, re: f64, im: f64 },
    #[error("empty amplitude list passed to {context}")]
    Empty { context: &'static str },
}

impl Amplitude {
    pub const ZERO: Amplitude = Amplitude { re: 0.0, im: 0.0 };
    pub const ONE: Amplitude = Amplitude { re: 1.0, im: 0.0 };
    pub const I: Amplitude = Amplitude { re: 0.0, im: 1.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Amplitude { re, im }
    }

    /// Unit-magnitude amplitude `e^{iθ}`.
    pub fn phase_factor(theta: f64) -> Self {
        Amplitude::new(theta.cos(), theta.sin())
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Squared modulus `|φ|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Argument in `(−π, π]`.
    pub fn arg(&self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn conj(&self) -> Self {
        Amplitude::new(self.re, -self.im)
    }

    pub fn scale(&self, s: f64) -> Self {
        Amplitude::new(self.re * s, self.im * s)
    }

    /// Polar view of this amplitude.
    pub fn clock(&self) -> Clock {
        Clock::new(self.arg(), self.modulus())
    }
}

impl Clock {
    /// Builds a clock, normalizing the phase into `[0, 2π)`.
    pub fn new(phase: f64, magnitude: f64) -> Self {
        Clock { phase: wrap_phase(phase), magnitude }
    }

    /// Rectangular form of this clock.
    pub fn amplitude(&self) -> Amplitude {
        Amplitude::new(
            self.magnitude * self.phase.cos(),
            self.magnitude * self.phase.sin(),
        )
    }
}

/// Normalizes an angle into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let r = theta.rem_euclid(two_pi);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if r >= two_pi {
        0.0
    } else {
        r
    }
}

fn ensure_finite(phi: &Amplitude, context: &'static str) -> Result<(), AmplitudeError> {
    if phi.is_finite() {
        Ok(())
    } else {
        Err(AmplitudeError::NonFinite { context, re: phi.re, im: phi.im })
    }
}

/// Probability of an outcome with amplitude `phi`: `P = φ*φ = |φ|²`.
pub fn probability_of(phi: Amplitude) -> Result<f64, AmplitudeError> {
    ensure_finite(&phi, "probability_of")?;
    Ok(phi.norm_sqr())
}

/// Combined amplitude of an event that can happen in several
/// indistinguishable ways: the component-wise sum.
pub fn sum_alternatives(phis: &[Amplitude]) -> Result<Amplitude, AmplitudeError> {
    if phis.is_empty() {
        return Err(AmplitudeError::Empty { context: "sum_alternatives" });
    }
    let mut acc = Amplitude::ZERO;
    for phi in phis {
        ensure_finite(phi, "sum_alternatives")?;
        acc = acc + *phi;
    }
    Ok(acc)
}

/// Amplitude of one particular route: the ordered product of the amplitudes
/// of its legs.
pub fn chain_route(phis: &[Amplitude]) -> Result<Amplitude, AmplitudeError> {
    if phis.is_empty() {
        return Err(AmplitudeError::Empty { context: "chain_route" });
    }
    let mut acc = Amplitude::ONE;
    for phi in phis {
        ensure_finite(phi, "chain_route")?;
        acc = acc * *phi;
    }
    Ok(acc)
}

/// Joint amplitude for two non-interacting subsystems doing two things
/// independently: the product of the separate amplitudes.
pub fn product_independent(
    phi_left: Amplitude,
    phi_right: Amplitude,
) -> Result<Amplitude, AmplitudeError> {
    ensure_finite(&phi_left, "product_independent")?;
    ensure_finite(&phi_right, "product_independent")?;
    Ok(phi_left * phi_right)
}

impl Add for Amplitude {
    type Output = Amplitude;
    fn add(self, rhs: Amplitude) -> Amplitude {
        Amplitude::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for Amplitude {
    type Output = Amplitude;
    fn sub(self, rhs: Amplitude) -> Amplitude {
        Amplitude::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for Amplitude {
    type Output = Amplitude;
    fn neg(self) -> Amplitude {
        Amplitude::new(-self.re, -self.im)
    }
}

impl Mul for Amplitude {
    type Output = Amplitude;
    fn mul(self, rhs: Amplitude) -> Amplitude {
        Amplitude::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl Mul<f64> for Amplitude {
    type Output = Amplitude;
    fn mul(self, rhs: f64) -> Amplitude {
        self.scale(rhs)
    }
}

impl From<Complex64> for Amplitude {
    fn from(z: Complex64) -> Self {
        Amplitude::new(z.re, z.im)
    }
}

impl From<Amplitude> for Complex64 {
    fn from(a: Amplitude) -> Self {
        Complex64::new(a.re, a.im)
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im >= 0.0 {
            write!(f, "{}+{}i", self.re, self.im)
        } else {
            write!(f, "{}{}i", self.re, self.im)
        }
    }
}

/// `|a − b|` as a convergence/defect measure between two amplitudes.
pub fn distance(a: Amplitude, b: Amplitude) -> f64 {
    (a - b).modulus()
}
