//! Shadow-stream simulator for one- and two-particle interferometry.
//!
//! The crate models interferometer paths as explicit amplitude bookkeeping:
//! on every trial one *tangible* particle takes a random path while *shadow*
//! particles fill every alternative, and all observable statistics follow
//! from sums and products of the accumulated path amplitudes. On top of that
//! sit closed-form coincidence statistics with a CHSH estimator, a seeded
//! Monte Carlo sampler with reproducible substreams, and a time-sliced
//! path-integral propagator for wavefunctions on a 1-D grid.
//!
//! Modules:
//!
//! * [`amplitude`] — complex amplitudes and the four composition rules.
//! * [`layout`] — interferometer descriptions, builders, and a text format.
//! * [`streams`] — tangible/shadow assignment and the locality verifiers.
//! * [`experiment`] — joint distributions, CHSH, coincidence sampling.
//! * [`pathint`] — sliced propagator, kernels, and consistency residuals.
//! * [`rng`] — counter-based substreams for partition-invariant sampling.
//! * [`parse`] — small CLI-facing parsers (grids, potentials, angles).
//! * [`textio`] — canonical text output formats.

pub mod amplitude;
pub mod experiment;
pub mod layout;
pub mod parse;
pub mod pathint;
pub mod rng;
pub mod streams;
pub mod textio;

pub use amplitude::{Amplitude, Clock};
pub use layout::{build_mach_zehnder, build_rarity_tapster, Layout, Wing};
pub use streams::{SourceAssignment, Stream};
