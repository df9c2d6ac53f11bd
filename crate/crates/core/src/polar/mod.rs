//! Classical polar coding: generator matrices, channel combining,
//! Bhattacharyya tracking, good/bad index selection and successive
//! cancellation decoding.
//!
//! # Index convention
//!
//! Synthesized channel `i` of a length `n = 2^k` code is reached by reading
//! the `k` bits of `i` most-significant first; bit `0` takes the "bad"
//! split and bit `1` the "good" split. With the encoder in [`polar_encode`]
//! this is exactly the order in which [`ScDecoder`] estimates message bits.

mod bdmc;
mod construct;
mod decoder;
mod generator;
mod simulate;

pub use bdmc::{
    bhattacharyya, combine_bad, combine_good, merge_equal_ratios, quantize, symmetric_capacity,
    Bdmc,
};
pub use construct::{
    error_bound, good_threshold, polarize, polarize_bec, polarize_tables, select_sets,
    write_polarization_csv, GoodBadSets, PolarizationResult, PolarizeOptions,
};
pub use decoder::{sc_decode, DecoderState, ScDecoder};
pub use generator::{
    beta_from_partial_distances, generator_matrix, polar_encode, GeneratorMatrix,
    PartialDistanceReport,
};
pub use simulate::{
    monte_carlo_block_error, BecSampler, BlockErrorEstimate, BscSampler, ChannelSampler,
    CodeConfig, TableSampler,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarError {
    #[error("recursion level k = {0} is not supported (need {1})")]
    InvalidLevel(u32, &'static str),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid channel table: {0}")]
    InvalidChannel(String),
    #[error("output alphabet of size {size} exceeds cap {cap}")]
    AlphabetOverflow { size: usize, cap: usize },
    #[error("beta = {0} rejected: the good-set threshold requires 0 < beta < 0.5")]
    InvalidBeta(f64),
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("missing frozen values: {needed} frozen positions, {given} values supplied")]
    MissingFrozenValues { needed: usize, given: usize },
    #[error("likelihood ratio at position {index} is not usable ({value})")]
    InvalidLikelihood { index: usize, value: f64 },
    #[error("trial count must be at least 1")]
    NoTrials,
}
