//! Polar-code constructions for quantum relay channels.
//!
//! The crate covers classical polarization and successive-cancellation
//! decoding ([`polar`]), the index-set bookkeeping that turns amplitude and
//! phase polarization into quantum codeword sets ([`codeword_sets`]),
//! relay capacity formulas and Monte Carlo ([`relay`]), the flag-channel
//! superactivation construction ([`superactivation`]) and the
//! configuration-driven experiment runner behind the `qrelay` binary
//! ([`experiment`]). Dense state and channel algebra lives in [`quantum`].

pub mod codeword_sets;
pub mod experiment;
pub mod index_set;
pub mod polar;
pub mod quantum;
pub mod relay;
pub mod rng;
pub mod superactivation;

/// Fixed-width float formatting for CSV output (12 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}
