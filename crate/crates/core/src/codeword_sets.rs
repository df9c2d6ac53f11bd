//! Amplitude/phase codeword sets and the rates they determine.
//!
//! A quantum codeword position is usable for private transmission when it is
//! good for both the amplitude and the phase channel. Crossing the two
//! good/bad splits gives four disjoint classes:
//!
//! | class  | amplitude | phase |
//! |--------|-----------|-------|
//! | `S_in` | good      | good  |
//! | `P1`   | good      | bad   |
//! | `P2`   | bad       | good  |
//! | `B`    | bad       | bad   |
//!
//! Every rate below is a finite-`n` fraction of class sizes.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::index_set::IndexSet;
use crate::polar::{
    good_threshold, polarize, select_sets, Bdmc, PolarError, PolarizationResult, PolarizeOptions,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetError {
    #[error("index sets live in universes of size {0} and {1}")]
    UniverseMismatch(usize, usize),
    #[error("vectors have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("beta = {0} rejected: the threshold requires 0 < beta < 0.5")]
    InvalidBeta(f64),
    #[error("Pauli probabilities ({px}, {py}, {pz}) are not a distribution")]
    InvalidPauli { px: f64, py: f64, pz: f64 },
    #[error(transparent)]
    Polar(#[from] PolarError),
}

/// Good sets of the amplitude and phase channels over a common `[n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPolarization {
    pub n: usize,
    pub good_amp: IndexSet,
    pub good_phase: IndexSet,
}

impl DualPolarization {
    pub fn new(good_amp: IndexSet, good_phase: IndexSet) -> Result<Self, SetError> {
        if good_amp.universe() != good_phase.universe() {
            return Err(SetError::UniverseMismatch(
                good_amp.universe(),
                good_phase.universe(),
            ));
        }
        Ok(Self {
            n: good_amp.universe(),
            good_amp,
            good_phase,
        })
    }
}

/// Classical channels seen by the amplitude (Z basis) and phase (X basis)
/// of a qubit Pauli channel: bit errors come from `X` and `Y`, phase errors
/// from `Z` and `Y`.
pub fn pauli_induced_channels(px: f64, py: f64, pz: f64) -> Result<(Bdmc, Bdmc), SetError> {
    let ok = [px, py, pz].iter().all(|p| (0.0..=1.0).contains(p)) && px + py + pz <= 1.0 + 1e-12;
    if !ok {
        return Err(SetError::InvalidPauli { px, py, pz });
    }
    Ok((Bdmc::bsc(px + py)?, Bdmc::bsc(pz + py)?))
}

/// Both polarizations together with the resulting good sets.
#[derive(Clone, Debug)]
pub struct DualPolarizationRun {
    pub amp: PolarizationResult,
    pub phase: PolarizationResult,
    pub sets: DualPolarization,
}

pub fn dual_polarize(
    amp: &Bdmc,
    phase: &Bdmc,
    k: u32,
    beta: f64,
    opts: &PolarizeOptions,
) -> Result<DualPolarizationRun, SetError> {
    let amp_pr = polarize(amp, k, opts)?;
    let phase_pr = polarize(phase, k, opts)?;
    let good_amp = select_sets(&amp_pr, beta)?.good;
    let good_phase = select_sets(&phase_pr, beta)?.good;
    Ok(DualPolarizationRun {
        amp: amp_pr,
        phase: phase_pr,
        sets: DualPolarization::new(good_amp, good_phase)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PartitionClass {
    #[serde(rename = "S_in")]
    SIn,
    P1,
    P2,
    B,
}

impl PartitionClass {
    pub fn label(self) -> &'static str {
        match self {
            PartitionClass::SIn => "S_in",
            PartitionClass::P1 => "P1",
            PartitionClass::P2 => "P2",
            PartitionClass::B => "B",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexSetPartition {
    pub n: usize,
    pub s_in: IndexSet,
    pub p1: IndexSet,
    pub p2: IndexSet,
    pub b: IndexSet,
}

impl IndexSetPartition {
    pub fn good_amp(&self) -> IndexSet {
        self.s_in.union(&self.p1)
    }

    pub fn bad_amp(&self) -> IndexSet {
        self.p2.union(&self.b)
    }

    pub fn good_phase(&self) -> IndexSet {
        self.s_in.union(&self.p2)
    }

    pub fn bad_phase(&self) -> IndexSet {
        self.p1.union(&self.b)
    }

    pub fn class_of(&self, i: usize) -> PartitionClass {
        if self.s_in.contains(i) {
            PartitionClass::SIn
        } else if self.p1.contains(i) {
            PartitionClass::P1
        } else if self.p2.contains(i) {
            PartitionClass::P2
        } else {
            PartitionClass::B
        }
    }

    /// Pairwise disjoint classes covering `[n]`.
    pub fn is_partition(&self) -> bool {
        let parts = [&self.s_in, &self.p1, &self.p2, &self.b];
        for (i, a) in parts.iter().enumerate() {
            for b in &parts[i + 1..] {
                if !a.is_disjoint(b) {
                    return false;
                }
            }
        }
        let total: usize = parts.iter().map(|p| p.len()).sum();
        total == self.n
    }
}

pub fn build_partition(dp: &DualPolarization) -> IndexSetPartition {
    let bad_amp = dp.good_amp.complement();
    let bad_phase = dp.good_phase.complement();
    IndexSetPartition {
        n: dp.n,
        s_in: dp.good_amp.intersection(&dp.good_phase),
        p1: dp.good_amp.intersection(&bad_phase),
        p2: bad_amp.intersection(&dp.good_phase),
        b: bad_amp.intersection(&bad_phase),
    }
}

fn frac(count: i64, n: usize) -> f64 {
    count as f64 / n as f64
}

/// Private rate against a degraded eavesdropper: `|S_in| / n`.
pub fn p_sym_degraded(part: &IndexSetPartition) -> f64 {
    frac(part.s_in.len() as i64, part.n)
}

/// Private rate against a non-degraded eavesdropper: `(|S_in| - |B|) / n`.
/// Negative values are returned as they are.
pub fn p_sym_nondegraded(part: &IndexSetPartition) -> f64 {
    frac(part.s_in.len() as i64 - part.b.len() as i64, part.n)
}

/// The same rate written through the good sets:
/// `(|good_amp| + |good_phase| - n) / n`.
pub fn p_sym_nondegraded_from_good_sets(dp: &DualPolarization) -> f64 {
    frac(
        dp.good_amp.len() as i64 + dp.good_phase.len() as i64 - dp.n as i64,
        dp.n,
    )
}

/// `(|S_in| + |B| - |bad_amp| + |P2|) / n`, which collapses to `|S_in| / n`.
pub fn r_sym_nondegraded(part: &IndexSetPartition) -> f64 {
    let bad_amp = part.bad_amp().len() as i64;
    frac(
        part.s_in.len() as i64 + part.b.len() as i64 - bad_amp + part.p2.len() as i64,
        part.n,
    )
}

/// `|S_in| - |bad_phase|`.
pub fn secrecy_gap(part: &IndexSetPartition) -> i64 {
    part.s_in.len() as i64 - part.bad_phase().len() as i64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub n: usize,
    pub p_sym_degraded: f64,
    pub p_sym_nondegraded: f64,
    pub r_sym: f64,
    /// `1 - |P1| / n`.
    pub c_bob: f64,
    /// `|S_in ∪ P2| / n`; equal to `c_bob` exactly when `B` is empty.
    pub c_bob_alt: f64,
    pub bob_consistent: bool,
    /// `(|P1| + |P2|) / n`.
    pub c_eve: f64,
    pub c_eve_p1: f64,
    /// Eve's share on the first relay hop, codewords `P2 ∪ S_in`.
    pub c_eve_e1e2: f64,
    /// Eve's share on the second relay hop, codewords `S_in`.
    pub c_eve_e2d: f64,
    /// `(|S_in| - |bad_phase|) / n`.
    pub secrecy_gap: f64,
    /// Set when a rate came out negative.
    pub negative_rate_warning: bool,
}

pub fn eve_capacity(part: &IndexSetPartition) -> RateReport {
    let n = part.n;
    let c_bob = 1.0 - frac(part.p1.len() as i64, n);
    let bob_alt = part.s_in.union(&part.p2).len();
    let c_bob_alt = frac(bob_alt as i64, n);
    let p_sym_nondegraded = p_sym_nondegraded(part);
    let gap = frac(secrecy_gap(part), n);
    RateReport {
        n,
        p_sym_degraded: p_sym_degraded(part),
        p_sym_nondegraded,
        r_sym: r_sym_nondegraded(part),
        c_bob,
        c_bob_alt,
        bob_consistent: n - part.p1.len() == bob_alt,
        c_eve: frac((part.p1.len() + part.p2.len()) as i64, n),
        c_eve_p1: frac(part.p1.len() as i64, n),
        c_eve_e1e2: frac(part.good_phase().len() as i64, n),
        c_eve_e2d: frac(part.s_in.len() as i64, n),
        secrecy_gap: gap,
        negative_rate_warning: p_sym_nondegraded < 0.0 || gap < 0.0,
    }
}

/// Positions reliable for Bob (`z_bob < t`) and fully scrambled for Eve
/// (`z_eve >= 1 - t`), with `t = (1/n) 2^(-n^beta)`.
pub fn codeword_threshold_sets(
    z_bob: &[f64],
    z_eve: &[f64],
    beta: f64,
) -> Result<(IndexSet, IndexSet), SetError> {
    if z_bob.len() != z_eve.len() {
        return Err(SetError::LengthMismatch(z_bob.len(), z_eve.len()));
    }
    if !(beta > 0.0 && beta < 0.5) {
        return Err(SetError::InvalidBeta(beta));
    }
    let n = z_bob.len();
    let t = good_threshold(n, beta);
    Ok((
        IndexSet::from_predicate(n, |i| z_bob[i] < t),
        IndexSet::from_predicate(n, |i| z_eve[i] >= 1.0 - t),
    ))
}

/// CSV with columns `index,set`.
pub fn write_partition_csv<W: Write>(out: &mut W, part: &IndexSetPartition) -> std::io::Result<()> {
    writeln!(out, "index,set")?;
    for i in 0..part.n {
        writeln!(out, "{i},{}", part.class_of(i).label())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::polarize_bec;
    use proptest::prelude::*;

    fn dual(n: usize, amp: u64, phase: u64) -> DualPolarization {
        DualPolarization::new(IndexSet::from_mask(n, amp), IndexSet::from_mask(n, phase)).unwrap()
    }

    /// Classes recomputed bit by bit from the two masks.
    fn mask_oracle(n: usize, amp: u64, phase: u64) -> [u64; 4] {
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        [
            amp & phase,
            amp & !phase & full,
            !amp & phase & full,
            !amp & !phase & full,
        ]
    }

    fn to_mask(s: &IndexSet) -> u64 {
        s.iter().fold(0u64, |m, i| m | 1 << i)
    }

    #[test]
    fn extreme_partitions() {
        let all = build_partition(&dual(8, 0xff, 0xff));
        assert_eq!(all.s_in.len(), 8);
        assert!(all.p1.is_empty() && all.p2.is_empty() && all.b.is_empty());
        assert_eq!(p_sym_degraded(&all), 1.0);

        let disjoint = build_partition(&dual(8, 0x0f, 0x30));
        assert!(disjoint.s_in.is_empty());
        assert_eq!(to_mask(&disjoint.p1), 0x0f);
        assert_eq!(to_mask(&disjoint.p2), 0x30);
        assert_eq!(p_sym_degraded(&disjoint), 0.0);

        let none = build_partition(&dual(8, 0, 0));
        assert_eq!(p_sym_nondegraded(&none), -1.0);
        let r = eve_capacity(&none);
        assert!(r.negative_rate_warning);
    }

    #[test]
    fn rates_without_bad_class() {
        let part = build_partition(&dual(8, 0b1111_0111, 0b0000_1111));
        assert!(part.b.is_empty());
        assert_eq!(p_sym_nondegraded(&part), p_sym_degraded(&part));
        let r = eve_capacity(&part);
        assert!(r.bob_consistent);
        assert_eq!(r.r_sym, r.p_sym_degraded);
    }

    #[test]
    fn eve_capacity_examples() {
        let r = eve_capacity(&build_partition(&dual(8, 0xff, 0xff)));
        assert_eq!((r.c_eve, r.c_bob), (0.0, 1.0));
        let r = eve_capacity(&build_partition(&dual(8, 0xff, 0)));
        assert_eq!(r.c_bob, 0.0);
        assert_eq!(r.c_eve_p1, 1.0);
    }

    #[test]
    fn exhaustive_small_universes() {
        for n in 1..=6usize {
            for amp in 0..1u64 << n {
                for phase in 0..1u64 << n {
                    let dp = dual(n, amp, phase);
                    let part = build_partition(&dp);
                    let oracle = mask_oracle(n, amp, phase);
                    let got = [&part.s_in, &part.p1, &part.p2, &part.b].map(to_mask);
                    assert_eq!(got, oracle);
                    assert!(part.is_partition());
                    assert_eq!(
                        p_sym_nondegraded(&part),
                        p_sym_nondegraded_from_good_sets(&dp)
                    );
                    assert_eq!(r_sym_nondegraded(&part), p_sym_degraded(&part));
                    let r = eve_capacity(&part);
                    assert_eq!(r.bob_consistent, part.b.is_empty());
                }
            }
        }
    }

    #[test]
    fn dual_bec_against_plain_recursion() {
        let beta = 0.45;
        let n = 1024usize;
        let thr = 2f64.powf(-(n as f64).powf(beta)) / n as f64;
        let z_of = |eps: f64, i: usize| {
            let mut z = eps;
            for level in (0..10).rev() {
                z = if i >> level & 1 == 1 {
                    z * z
                } else {
                    2.0 * z - z * z
                };
            }
            z
        };
        let expected = (0..n)
            .filter(|&i| z_of(0.3, i) < thr && z_of(0.4, i) < thr)
            .count() as f64
            / n as f64;
        let run = dual_polarize(
            &Bdmc::bec(0.3).unwrap(),
            &Bdmc::bec(0.4).unwrap(),
            10,
            beta,
            &Default::default(),
        )
        .unwrap();
        let part = build_partition(&run.sets);
        assert_eq!(p_sym_degraded(&part), expected);
    }

    #[test]
    fn pauli_channels() {
        let (amp, phase) = pauli_induced_channels(0.05, 0.02, 0.1).unwrap();
        assert!((amp.prob(1, 0) - 0.07).abs() < 1e-15);
        assert!((phase.prob(1, 0) - 0.12).abs() < 1e-15);
        assert!(pauli_induced_channels(0.5, 0.3, 0.3).is_err());
    }

    #[test]
    fn threshold_sets() {
        let (bob, eve) = codeword_threshold_sets(&[0.0; 8], &[1.0; 8], 0.3).unwrap();
        assert_eq!((bob.len(), eve.len()), (8, 8));
        let (bob, _) = codeword_threshold_sets(&[0.5; 8], &[0.0; 8], 0.3).unwrap();
        assert!(bob.is_empty());
        assert!(codeword_threshold_sets(&[0.0; 3], &[0.0; 4], 0.3).is_err());
        assert!(codeword_threshold_sets(&[0.0; 4], &[0.0; 4], 0.6).is_err());

        // degraded Eve: z_eve = 1 - (1 - z_bob)^2
        let z_bob = polarize_bec(0.2, 8).unwrap().z;
        let z_eve: Vec<f64> = z_bob.iter().map(|z| 1.0 - (1.0 - z).powi(2)).collect();
        let (bob, eve) = codeword_threshold_sets(&z_bob, &z_eve, 0.2).unwrap();
        let t = 2f64.powf(-(256f64).powf(0.2)) / 256.0;
        let both = (0..256)
            .filter(|&i| z_bob[i] < t && z_eve[i] >= 1.0 - t)
            .count();
        assert_eq!(bob.intersection(&eve).len(), both);
    }

    #[test]
    fn csv_labels() {
        let part = build_partition(&dual(4, 0b0011, 0b0101));
        let mut buf = Vec::new();
        write_partition_csv(&mut buf, &part).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,set\n0,S_in\n1,P1\n2,P2\n3,B\n"
        );
    }

    proptest! {
        #[test]
        fn identities_hold(amp in any::<u64>(), phase in any::<u64>(), n in 1usize..=64) {
            let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let dp = dual(n, amp & full, phase & full);
            let part = build_partition(&dp);
            prop_assert!(part.is_partition());
            prop_assert_eq!(part.good_phase(), part.p2.union(&part.s_in));
            prop_assert!(part.p2.is_disjoint(&part.s_in));
            prop_assert_eq!(
                part.s_in.len() as i64 - part.b.len() as i64,
                dp.good_amp.len() as i64 + dp.good_phase.len() as i64 - n as i64
            );
            prop_assert_eq!(r_sym_nondegraded(&part), part.s_in.len() as f64 / n as f64);
            let r = eve_capacity(&part);
            for v in [r.p_sym_degraded, r.p_sym_nondegraded, r.r_sym, r.c_bob, r.c_eve] {
                prop_assert!((-1.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn enlarging_good_amp_keeps_s_in(amp in any::<u64>(), extra in any::<u64>(), phase in any::<u64>()) {
            let small = build_partition(&dual(64, amp, phase));
            let big = build_partition(&dual(64, amp | extra, phase));
            prop_assert!(small.s_in.is_subset(&big.s_in));
        }
    }
}
