use std::io::Write;

use serde::Serialize;

use super::bdmc::{bhattacharyya, combine_bad, combine_good, merge_equal_ratios, quantize, Bdmc};
use super::PolarError;
use crate::fmt_f64;
use crate::index_set::IndexSet;

/// Largest table materialized before merging, per input row.
const MAX_RAW_ALPHABET: usize = 1 << 22;

/// Bhattacharyya parameters of the `n` synthesized channels.
///
/// Entry `i` belongs to the channel whose split sequence is the binary
/// expansion of `i`, most significant bit first (0 = bad, 1 = good).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarizationResult {
    pub n: usize,
    pub z: Vec<f64>,
}

impl PolarizationResult {
    pub fn k(&self) -> u32 {
        self.n.trailing_zeros()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarizeOptions {
    /// Largest output alphabet tracked for any synthesized channel.
    pub alphabet_cap: usize,
    /// Merge symbols with identical likelihood ratio after every split.
    pub merge_equal_ratios: bool,
    /// Fall back to lossy posterior bucketing with this many bins when
    /// exact merging is not enough. Off by default.
    pub quantize_bins: Option<usize>,
}

impl Default for PolarizeOptions {
    fn default() -> Self {
        Self {
            alphabet_cap: 4096,
            merge_equal_ratios: true,
            quantize_bins: None,
        }
    }
}

fn check_level(k: u32) -> Result<usize, PolarError> {
    if k == 0 || k > 24 {
        return Err(PolarError::InvalidLevel(k, "1 <= k <= 24"));
    }
    Ok(1usize << k)
}

/// Polarizes `w` over `k` levels. Erasure channels take the closed-form
/// route; everything else is tracked as explicit tables.
pub fn polarize(
    w: &Bdmc,
    k: u32,
    opts: &PolarizeOptions,
) -> Result<PolarizationResult, PolarError> {
    match w.erasure_probability() {
        Some(eps) => polarize_bec(eps, k),
        None => polarize_tables(w, k, opts),
    }
}

/// `Z- = 2Z - Z^2`, `Z+ = Z^2` for the erasure channel.
pub fn polarize_bec(eps: f64, k: u32) -> Result<PolarizationResult, PolarError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(PolarError::InvalidParameter {
            name: "epsilon",
            value: eps,
        });
    }
    let n = check_level(k)?;
    let mut z = vec![eps];
    for _ in 0..k {
        z = z.iter().flat_map(|&v| [2.0 * v - v * v, v * v]).collect();
    }
    debug_assert_eq!(z.len(), n);
    Ok(PolarizationResult { n, z })
}

/// Polarization with explicit transition tables.
pub fn polarize_tables(
    w: &Bdmc,
    k: u32,
    opts: &PolarizeOptions,
) -> Result<PolarizationResult, PolarError> {
    let n = check_level(k)?;
    let mut level = vec![reduce(w.clone(), opts)?];
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() * 2);
        for ch in &level {
            let raw = 2 * ch.output_size() * ch.output_size();
            let coarse;
            let ch = match (raw > MAX_RAW_ALPHABET, opts.quantize_bins) {
                (false, _) => ch,
                (true, Some(bins)) => {
                    coarse = quantize(ch, bins.min(opts.alphabet_cap));
                    &coarse
                }
                (true, None) => {
                    return Err(PolarError::AlphabetOverflow {
                        size: raw,
                        cap: opts.alphabet_cap,
                    })
                }
            };
            next.push(reduce(combine_bad(ch), opts)?);
            next.push(reduce(combine_good(ch), opts)?);
        }
        level = next;
    }
    Ok(PolarizationResult {
        n,
        z: level.iter().map(bhattacharyya).collect(),
    })
}

fn reduce(w: Bdmc, opts: &PolarizeOptions) -> Result<Bdmc, PolarError> {
    let size = w.output_size();
    let w = if opts.merge_equal_ratios {
        merge_equal_ratios(&w)
    } else {
        w
    };
    if w.output_size() <= opts.alphabet_cap {
        return Ok(w);
    }
    match opts.quantize_bins {
        Some(bins) => Ok(quantize(&w, bins.min(opts.alphabet_cap))),
        None => Err(PolarError::AlphabetOverflow {
            size,
            cap: opts.alphabet_cap,
        }),
    }
}

/// `(1/n) 2^(-n^beta)`.
pub fn good_threshold(n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    (-nf.powf(beta)).exp2() / nf
}

/// `n 2^(-n^beta)`.
pub fn error_bound(n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    nf * (-nf.powf(beta)).exp2()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodBadSets {
    pub n: usize,
    pub good: IndexSet,
    pub bad: IndexSet,
    pub beta: f64,
    pub threshold: f64,
}

/// `good = {i : z_i < threshold}`; a value sitting exactly on the
/// threshold is bad.
pub fn select_sets(pr: &PolarizationResult, beta: f64) -> Result<GoodBadSets, PolarError> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(PolarError::InvalidBeta(beta));
    }
    let threshold = good_threshold(pr.n, beta);
    let good = IndexSet::from_predicate(pr.n, |i| pr.z[i] < threshold);
    let bad = good.complement();
    Ok(GoodBadSets {
        n: pr.n,
        good,
        bad,
        beta,
        threshold,
    })
}

/// CSV with columns `index,z,set`.
pub fn write_polarization_csv<W: Write>(
    out: &mut W,
    pr: &PolarizationResult,
    sets: &GoodBadSets,
) -> std::io::Result<()> {
    writeln!(out, "index,z,set")?;
    for (i, z) in pr.z.iter().enumerate() {
        let set = if sets.good.contains(i) { "good" } else { "bad" };
        writeln!(out, "{i},{},{set}", fmt_f64(*z))?;
    }
    Ok(())
}
