//! Two-hop relay channel: sender `E1`, probabilistic relay encoder `E2`,
//! receiver `D`.
//!
//! Link capacities, the cut-set style `min` formula, the joint-input mutual
//! informations with a lattice maximizer, and a Monte Carlo model of the
//! relay encoder that succeeds with probability `p_e2`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codeword_sets::IndexSetPartition;
use crate::fmt_f64;
use crate::polar::Bdmc;
use crate::quantum::{symmetric_cq_capacity, BinaryCqChannel, KrausChannel, QuantumError};
use crate::rng::trial_rng;

/// Largest alphabet accepted for the sender and relay inputs.
pub const MAX_RELAY_ALPHABET: usize = 4;
/// Lattice resolution of the joint-input maximizer.
pub const LATTICE_STEPS: usize = 32;
/// Above this many lattice points the maximizer switches to hill climbing.
const EXHAUSTIVE_LIMIT: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelayError {
    #[error("success probability p_e2 = {0} must lie strictly between 0 and 1")]
    InvalidSuccessProbability(f64),
    #[error(
        "links do not compose: first link has {first_out} outputs, second accepts {second_in}"
    )]
    NotComposable { first_out: usize, second_in: usize },
    #[error("cannot compose a quantum link with a classical one")]
    MixedLinks,
    #[error("invalid transition table: {0}")]
    InvalidTable(String),
    #[error("alphabet of size {0} exceeds the limit of {MAX_RELAY_ALPHABET}")]
    AlphabetTooLarge(usize),
    #[error("capacity {name} = {value} must be nonnegative")]
    NegativeCapacity { name: &'static str, value: f64 },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

const TABLE_TOL: f64 = 1e-12;

/// Row-stochastic matrix, `rows[x][y] = P(y | x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, RelayError> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if width == 0 {
            return Err(RelayError::InvalidTable("empty table".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(RelayError::InvalidTable(format!(
                    "row {x} has wrong length"
                )));
            }
            if row.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
                return Err(RelayError::InvalidTable(format!(
                    "row {x} has an invalid entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > TABLE_TOL {
                return Err(RelayError::InvalidTable(format!("row {x} sums to {s}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn from_bdmc(w: &Bdmc) -> Self {
        Self {
            rows: vec![w.row(0).to_vec(), w.row(1).to_vec()],
        }
    }

    /// Erasure channel that also forwards an incoming erasure symbol:
    /// inputs and outputs are `(0, 1, e)`.
    pub fn erasure_propagating(eps: f64) -> Result<Self, RelayError> {
        Self::new(vec![
            vec![1.0 - eps, 0.0, eps],
            vec![0.0, 1.0 - eps, eps],
            vec![0.0, 0.0, 1.0],
        ])
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &TransitionMatrix) -> Result<TransitionMatrix, RelayError> {
        if self.outputs() != next.inputs() {
            return Err(RelayError::NotComposable {
                first_out: self.outputs(),
                second_in: next.inputs(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                (0..next.outputs())
                    .map(|z| {
                        row.iter()
                            .enumerate()
                            .map(|(y, p)| p * next.rows[y][z])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(TransitionMatrix { rows })
    }

    /// Mutual information in bits at the uniform input distribution.
    pub fn symmetric_capacity(&self) -> f64 {
        let px = 1.0 / self.inputs() as f64;
        let mut i = 0.0;
        for y in 0..self.outputs() {
            let py: f64 = self.rows.iter().map(|r| px * r[y]).sum();
            for r in &self.rows {
                if r[y] > 0.0 {
                    i += px * r[y] * (r[y] * px / (px * py)).log2();
                }
            }
        }
        i.max(0.0)
    }
}

/// One hop of the relay network.
#[derive(Clone, Debug)]
pub enum LinkChannel {
    Quantum(KrausChannel),
    Classical(TransitionMatrix),
}

impl LinkChannel {
    pub fn input_size(&self) -> usize {
        match self {
            LinkChannel::Quantum(k) => k.in_dim(),
            LinkChannel::Classical(t) => t.inputs(),
        }
    }

    pub fn output_size(&self) -> usize {
        match self {
            LinkChannel::Quantum(k) => k.out_dim(),
            LinkChannel::Classical(t) => t.outputs(),
        }
    }

    pub fn then(&self, next: &LinkChannel) -> Result<LinkChannel, RelayError> {
        if self.output_size() != next.input_size() {
            return Err(RelayError::NotComposable {
                first_out: self.output_size(),
                second_in: next.input_size(),
            });
        }
        match (self, next) {
            (LinkChannel::Quantum(a), LinkChannel::Quantum(b)) => {
                Ok(LinkChannel::Quantum(a.then(b)?))
            }
            (LinkChannel::Classical(a), LinkChannel::Classical(b)) => {
                Ok(LinkChannel::Classical(a.then(b)?))
            }
            _ => Err(RelayError::MixedLinks),
        }
    }

    /// Symmetric capacity: uniform-input mutual information for classical
    /// links, the Holevo quantity of the `{|0>, |1>}` ensemble for quantum
    /// ones.
    pub fn symmetric_capacity(&self) -> Result<f64, RelayError> {
        match self {
            LinkChannel::Quantum(k) => {
                Ok(symmetric_cq_capacity(&BinaryCqChannel::from_channel_z(k)?))
            }
            LinkChannel::Classical(t) => Ok(t.symmetric_capacity()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RelayChannelSpec {
    pub n_e1e2: LinkChannel,
    pub n_e2d: LinkChannel,
    /// Direct sender-to-receiver link, when modeled.
    pub n_e1d: Option<LinkChannel>,
    pub p_e2: f64,
    pub partition: IndexSetPartition,
}

impl RelayChannelSpec {
    pub fn new(
        n_e1e2: LinkChannel,
        n_e2d: LinkChannel,
        n_e1d: Option<LinkChannel>,
        p_e2: f64,
        partition: IndexSetPartition,
    ) -> Result<Self, RelayError> {
        if !(p_e2 > 0.0 && p_e2 < 1.0) {
            return Err(RelayError::InvalidSuccessProbability(p_e2));
        }
        if n_e1e2.output_size() != n_e2d.input_size() {
            return Err(RelayError::NotComposable {
                first_out: n_e1e2.output_size(),
                second_in: n_e2d.input_size(),
            });
        }
        Ok(Self {
            n_e1e2,
            n_e2d,
            n_e1d,
            p_e2,
            partition,
        })
    }
}

pub fn compose_relay(spec: &RelayChannelSpec) -> Result<LinkChannel, RelayError> {
    spec.n_e1e2.then(&spec.n_e2d)
}

/// `C(E1D) <= C(E1E2D)`, i.e. the direct link is the noisier one.
/// `None` without a direct link.
pub fn direct_link_is_degraded(spec: &RelayChannelSpec) -> Result<Option<bool>, RelayError> {
    let Some(direct) = &spec.n_e1d else {
        return Ok(None);
    };
    let relayed = compose_relay(spec)?.symmetric_capacity()?;
    Ok(Some(direct.symmetric_capacity()? <= relayed + 1e-12))
}

/// `min{c_12, c_1d + c_2d}`.
pub fn relay_capacity_min(c_12: f64, c_1d: f64, c_2d: f64) -> Result<f64, RelayError> {
    for (name, value) in [("c_12", c_12), ("c_1d", c_1d), ("c_2d", c_2d)] {
        if value.is_nan() || value < 0.0 {
            return Err(RelayError::NegativeCapacity { name, value });
        }
    }
    Ok(c_12.min(c_1d + c_2d))
}

/// Link capacities read off the codeword sets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetCapacities {
    /// `|good_phase| / n`.
    pub c_12: f64,
    /// `|P2| / n`.
    pub c_1d: f64,
    /// `|S_in| / n`.
    pub c_2d: f64,
    pub relay: f64,
}

pub fn set_capacities(part: &IndexSetPartition) -> SetCapacities {
    let n = part.n as f64;
    let c_12 = part.good_phase().len() as f64 / n;
    let c_1d = part.p2.len() as f64 / n;
    let c_2d = part.s_in.len() as f64 / n;
    SetCapacities {
        c_12,
        c_1d,
        c_2d,
        relay: c_12.min(c_1d + c_2d),
    }
}

/// `(|good_phase| - |P2|) / n`.
pub fn relay_private_capacity(part: &IndexSetPartition) -> f64 {
    (part.good_phase().len() as f64 - part.p2.len() as f64) / part.n as f64
}

/// `p(a, a')` over sender and relay alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    na: usize,
    na2: usize,
    p: Vec<f64>,
}

impl JointDistribution {
    /// `p[a * na2 + a2]`.
    pub fn new(na: usize, na2: usize, p: Vec<f64>) -> Result<Self, RelayError> {
        for size in [na, na2] {
            if size == 0 || size > MAX_RELAY_ALPHABET {
                return Err(RelayError::AlphabetTooLarge(size));
            }
        }
        if p.len() != na * na2 {
            return Err(RelayError::InvalidTable(format!(
                "expected {} cells, got {}",
                na * na2,
                p.len()
            )));
        }
        if p.iter().any(|&v| v.is_nan() || v < 0.0)
            || (p.iter().sum::<f64>() - 1.0).abs() > TABLE_TOL
        {
            return Err(RelayError::InvalidTable(
                "not a probability distribution".into(),
            ));
        }
        Ok(Self { na, na2, p })
    }

    pub fn uniform(na: usize, na2: usize) -> Result<Self, RelayError> {
        let cells = na * na2;
        Self::new(na, na2, vec![1.0 / cells as f64; cells])
    }

    pub fn prob(&self, a: usize, a2: usize) -> f64 {
        self.p[a * self.na2 + a2]
    }

    pub fn cells(&self) -> &[f64] {
        &self.p
    }
}

/// Discrete memoryless relay channel `p(b, b' | a, a')`: `b` reaches the
/// receiver, `b'` the relay.
#[derive(Clone, Debug)]
pub struct RelayDmcModel {
    na: usize,
    na2: usize,
    nb: usize,
    nb2: usize,
    /// Indexed `[(a * na2 + a2) * nb * nb2 + b * nb2 + b2]`.
    w: Vec<f64>,
}

impl RelayDmcModel {
    pub fn from_fn(
        (na, na2): (usize, usize),
        (nb, nb2): (usize, usize),
        f: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Result<Self, RelayError> {
        for size in [na, na2] {
            if size == 0 || size > MAX_RELAY_ALPHABET {
                return Err(RelayError::AlphabetTooLarge(size));
            }
        }
        let mut w = Vec::with_capacity(na * na2 * nb * nb2);
        for a in 0..na {
            for a2 in 0..na2 {
                let mut s = 0.0;
                for b in 0..nb {
                    for b2 in 0..nb2 {
                        let v = f(a, a2, b, b2);
                        if v.is_nan() || v < 0.0 {
                            return Err(RelayError::InvalidTable(format!(
                                "negative entry at ({a}, {a2}, {b}, {b2})"
                            )));
                        }
                        s += v;
                        w.push(v);
                    }
                }
                if (s - 1.0).abs() > TABLE_TOL {
                    return Err(RelayError::InvalidTable(format!(
                        "conditional distribution for ({a}, {a2}) sums to {s}"
                    )));
                }
            }
        }
        Ok(Self {
            na,
            na2,
            nb,
            nb2,
            w,
        })
    }

    fn w(&self, a: usize, a2: usize, b: usize, b2: usize) -> f64 {
        self.w[(a * self.na2 + a2) * self.nb * self.nb2 + b * self.nb2 + b2]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelayMutualInfo {
    /// `I(A, A' : B)`.
    pub i_joint: f64,
    /// `I(A : B' | A')`.
    pub i_cond: f64,
    /// `I(A : B, B' | A')`.
    pub i_cond_full: f64,
    /// `min{I(A, A' : B), I(A : B' | A')}`.
    pub min_term: f64,
}

fn xlogx_ratio(pxy: f64, px: f64, py: f64) -> f64 {
    if pxy > 0.0 {
        pxy * (pxy / (px * py)).log2()
    } else {
        0.0
    }
}

/// Mutual information of a joint table `t[x][y]`.
fn table_mi(t: &[Vec<f64>]) -> f64 {
    let px: Vec<f64> = t.iter().map(|r| r.iter().sum()).collect();
    let ny = t.first().map(Vec::len).unwrap_or(0);
    let py: Vec<f64> = (0..ny).map(|y| t.iter().map(|r| r[y]).sum()).collect();
    let mut i = 0.0;
    for (x, row) in t.iter().enumerate() {
        for (y, &v) in row.iter().enumerate() {
            i += xlogx_ratio(v, px[x], py[y]);
        }
    }
    i.max(0.0)
}

pub fn relay_mutual_info(
    jd: &JointDistribution,
    model: &RelayDmcModel,
) -> Result<RelayMutualInfo, RelayError> {
    if jd.na != model.na || jd.na2 != model.na2 {
        return Err(RelayError::NotComposable {
            first_out: jd.na * jd.na2,
            second_in: model.na * model.na2,
        });
    }
    let (na, na2, nb, nb2) = (model.na, model.na2, model.nb, model.nb2);

    // I(A, A' : B) with the pair (a, a') as one input symbol
    let joint: Vec<Vec<f64>> = (0..na * na2)
        .map(|x| {
            let (a, a2) = (x / na2, x % na2);
            (0..nb)
                .map(|b| jd.prob(a, a2) * (0..nb2).map(|b2| model.w(a, a2, b, b2)).sum::<f64>())
                .collect()
        })
        .collect();
    let i_joint = table_mi(&joint);

    let mut i_cond = 0.0;
    let mut i_cond_full = 0.0;
    for a2 in 0..na2 {
        let pa2: f64 = (0..na).map(|a| jd.prob(a, a2)).sum();
        if pa2 <= 0.0 {
            continue;
        }
        let relay_view: Vec<Vec<f64>> = (0..na)
            .map(|a| {
                let pa = jd.prob(a, a2) / pa2;
                (0..nb2)
                    .map(|b2| pa * (0..nb).map(|b| model.w(a, a2, b, b2)).sum::<f64>())
                    .collect()
            })
            .collect();
        let both_views: Vec<Vec<f64>> = (0..na)
            .map(|a| {
                let pa = jd.prob(a, a2) / pa2;
                (0..nb * nb2)
                    .map(|y| pa * model.w(a, a2, y / nb2, y % nb2))
                    .collect()
            })
            .collect();
        i_cond += pa2 * table_mi(&relay_view);
        i_cond_full += pa2 * table_mi(&both_views);
    }
    Ok(RelayMutualInfo {
        i_joint,
        i_cond,
        i_cond_full,
        min_term: i_joint.min(i_cond),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeMaximum {
    pub best_value: f64,
    pub best: JointDistribution,
    pub uniform_value: f64,
    /// Whether every lattice point was visited.
    pub exhaustive: bool,
}

fn lattice_points(cells: usize, steps: usize) -> usize {
    // C(steps + cells - 1, cells - 1), saturating
    let mut c: usize = 1;
    for i in 0..cells - 1 {
        c = c.saturating_mul(steps + 1 + i) / (i + 1);
    }
    c
}

fn units_to_jd(na: usize, na2: usize, units: &[usize]) -> JointDistribution {
    let p = units
        .iter()
        .map(|&u| u as f64 / LATTICE_STEPS as f64)
        .collect();
    JointDistribution { na, na2, p }
}

/// Lower bound on `max_{p(a,a')} min{I(A,A':B), I(A:B'|A')}` by searching
/// distributions whose cells are multiples of `1/32`.
pub fn maximize_relay_lattice(model: &RelayDmcModel) -> Result<LatticeMaximum, RelayError> {
    let (na, na2) = (model.na, model.na2);
    let cells = na * na2;
    let eval = |units: &[usize]| -> Result<f64, RelayError> {
        Ok(relay_mutual_info(&units_to_jd(na, na2, units), model)?.min_term)
    };
    let uniform = JointDistribution::uniform(na, na2)?;
    let uniform_value = relay_mutual_info(&uniform, model)?.min_term;

    let (mut best_units, mut best_value, exhaustive) =
        if lattice_points(cells, LATTICE_STEPS) <= EXHAUSTIVE_LIMIT {
            let mut best = (Vec::new(), f64::NEG_INFINITY);
            let mut units = vec![0usize; cells];
            enumerate_compositions(&mut units, 0, LATTICE_STEPS, &mut |u| {
                let v = eval(u)?;
                if v > best.1 {
                    best = (u.to_vec(), v);
                }
                Ok(())
            })?;
            (best.0, best.1, true)
        } else {
            let mut units: Vec<usize> = (0..cells)
                .map(|i| LATTICE_STEPS / cells + usize::from(i < LATTICE_STEPS % cells))
                .collect();
            let mut value = eval(&units)?;
            loop {
                let mut step: Option<(usize, usize, f64)> = None;
                for from in 0..cells {
                    if units[from] == 0 {
                        continue;
                    }
                    for to in 0..cells {
                        if to == from {
                            continue;
                        }
                        units[from] -= 1;
                        units[to] += 1;
                        let v = eval(&units)?;
                        units[from] += 1;
                        units[to] -= 1;
                        if v > step.map_or(value, |s| s.2) + 1e-15 {
                            step = Some((from, to, v));
                        }
                    }
                }
                match step {
                    Some((from, to, v)) => {
                        units[from] -= 1;
                        units[to] += 1;
                        value = v;
                    }
                    None => break,
                }
            }
            (units, value, false)
        };

    let best = if uniform_value > best_value {
        best_value = uniform_value;
        best_units.clear();
        uniform
    } else {
        units_to_jd(na, na2, &best_units)
    };
    Ok(LatticeMaximum {
        best_value,
        best,
        uniform_value,
        exhaustive,
    })
}

fn enumerate_compositions(
    units: &mut [usize],
    pos: usize,
    remaining: usize,
    visit: &mut dyn FnMut(&[usize]) -> Result<(), RelayError>,
) -> Result<(), RelayError> {
    if pos == units.len() - 1 {
        units[pos] = remaining;
        return visit(units);
    }
    for take in 0..=remaining {
        units[pos] = take;
        enumerate_compositions(units, pos + 1, remaining - take, visit)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelayTrialResult {
    pub trials: u64,
    pub successes: u64,
    pub empirical_success_rate: f64,
    /// Decodable indices per successful block (`|S_in|`); zero when no
    /// trial succeeded.
    pub mean_codeword_size_b: f64,
    /// Decodable indices per block averaged over all trials; failures
    /// count as zero.
    pub mean_throughput: f64,
}

/// Each trial succeeds with probability `p_e2`, delivering the `S_in`
/// codewords; a failed trial delivers nothing. Trial `t` uses the random
/// stream keyed by `(seed, t)`.
pub fn simulate_relay(
    spec: &RelayChannelSpec,
    trials: u64,
    seed: u64,
) -> Result<RelayTrialResult, RelayError> {
    if trials == 0 {
        return Err(RelayError::NoTrials);
    }
    let p = spec.p_e2;
    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|t| u64::from(trial_rng(seed, t).random::<f64>() < p))
        .sum();
    let size = spec.partition.s_in.len() as f64;
    Ok(RelayTrialResult {
        trials,
        successes,
        empirical_success_rate: successes as f64 / trials as f64,
        mean_codeword_size_b: if successes > 0 { size } else { 0.0 },
        mean_throughput: successes as f64 * size / trials as f64,
    })
}

/// `p_e2 |S_in|`.
pub fn expected_throughput(spec: &RelayChannelSpec) -> f64 {
    spec.p_e2 * spec.partition.s_in.len() as f64
}

/// CSV with columns `p_e2,trials,successes,rate,expected_throughput,b_star_throughput`.
pub fn write_relay_csv<W: Write>(
    out: &mut W,
    rows: &[(f64, RelayTrialResult, f64, f64)],
) -> std::io::Result<()> {
    writeln!(
        out,
        "p_e2,trials,successes,rate,expected_throughput,b_star_throughput"
    )?;
    for (p, r, expected, b_star) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(*p),
            r.trials,
            r.successes,
            fmt_f64(r.empirical_success_rate),
            fmt_f64(*expected),
            fmt_f64(*b_star)
        )?;
    }
    Ok(())
}
