//! Superactivation-assisted relaying.
//!
//! The switch channel `M` applies the main relay channel with probability
//! `p` and a 50% erasure channel otherwise, writing which branch fired into
//! a flag qubit appended to the output. Two uses of `M` fed a shared input
//! `rho_AC` split into four branch pairs; because the flags are orthogonal
//! in both the output and the environment, the coherent information of
//! `M (x) M` is exactly the weighted sum of the four branch values.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codeword_sets::IndexSetPartition;
use crate::fmt_f64;
use crate::quantum::{
    c, coherent_information, mutual_information, symmetric_cq_capacity, trace_out, BinaryCqChannel,
    CMatrix, DensityMatrix, KrausChannel, QuantumError,
};

/// Largest output or environment dimension of `M (x) M` that is evaluated.
pub const JOINT_DIM_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuperactivationError {
    #[error("switch probability p = {0} must lie in [0, 1]")]
    InvalidSwitchProbability(f64),
    #[error("p = {0} must lie strictly between 0 and 1")]
    OpenIntervalRequired(f64),
    #[error("input has dimension {got}, the doubled channel expects {expected}")]
    InputDimension { expected: usize, got: usize },
    #[error("fit needs at least three distinct p values")]
    UnderdeterminedFit,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// `M = p N (x) |0><0| + (1-p) A_e (x) |1><1|`, flag qubit last.
#[derive(Clone, Debug)]
pub struct SwitchChannel {
    p: f64,
    main: KrausChannel,
    erasure: KrausChannel,
    /// Main branch with its flag, as a channel of its own.
    main_flagged: KrausChannel,
    erasure_flagged: KrausChannel,
    channel: KrausChannel,
}

fn flag_ket(bit: usize) -> CMatrix {
    let mut v = CMatrix::zeros(2, 1);
    v[(bit, 0)] = c(1.0);
    v
}

fn attach_flag(
    ch: &KrausChannel,
    signal_dim: usize,
    bit: usize,
) -> Result<KrausChannel, QuantumError> {
    let padded = ch.pad_output(signal_dim)?;
    KrausChannel::new(
        padded
            .kraus_ops()
            .iter()
            .map(|k| k.kronecker(&flag_ket(bit)))
            .collect(),
    )
}

pub fn build_switch_channel(
    p: f64,
    main: &KrausChannel,
) -> Result<SwitchChannel, SuperactivationError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SuperactivationError::InvalidSwitchProbability(p));
    }
    let erasure = KrausChannel::erasure(0.5, main.in_dim())?;
    let signal_dim = main.out_dim().max(erasure.out_dim());
    let main_flagged = attach_flag(main, signal_dim, 0)?;
    let erasure_flagged = attach_flag(&erasure, signal_dim, 1)?;
    let mut ops: Vec<CMatrix> = main_flagged
        .kraus_ops()
        .iter()
        .map(|k| k * c(p.sqrt()))
        .collect();
    ops.extend(
        erasure_flagged
            .kraus_ops()
            .iter()
            .map(|k| k * c((1.0 - p).sqrt())),
    );
    // zero-weight operators add nothing but environment dimensions
    ops.retain(|k| k.iter().any(|v| v.norm() > 0.0));
    let channel = KrausChannel::new(ops)?;
    Ok(SwitchChannel {
        p,
        main: main.clone(),
        erasure,
        main_flagged,
        erasure_flagged,
        channel,
    })
}

impl SwitchChannel {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn main(&self) -> &KrausChannel {
        &self.main
    }

    pub fn erasure(&self) -> &KrausChannel {
        &self.erasure
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    /// Output dimension without the flag qubit.
    pub fn signal_dim(&self) -> usize {
        self.channel.out_dim() / 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FlagVariant {
    /// Both flag terms `|00><00|`, as the construction is usually printed.
    Literal,
    /// Flag terms `|00><00|` and `|11><11|`.
    Alternating,
}

#[derive(Clone, Debug)]
pub enum InputMode {
    /// Flag register pair `(A1, C1)` with `|Psi+>` on `(A2, C2)`; the side
    /// systems are `A = A1 A2` and `C = C1 C2`.
    EntangledFlagged(FlagVariant),
    /// `rho (x) rho` for a caller-supplied state.
    PhaseSetState(DensityMatrix),
}

#[derive(Clone, Debug)]
pub struct JointInputState {
    pub rho_ac: DensityMatrix,
    /// Dimension of each of `A` and `C`.
    pub side_dim: usize,
    pub mode: InputMode,
}

impl JointInputState {
    /// Reduced state on `A`.
    pub fn side_a(&self) -> Result<DensityMatrix, QuantumError> {
        trace_out(&self.rho_ac, &[self.side_dim, self.side_dim], &[0])
    }
}

/// Unitary that reorders tensor factors: factor `perm[k]` of the input
/// becomes factor `k` of the output.
fn permutation_unitary(dims: &[usize], perm: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut u = CMatrix::zeros(total, total);
    let mut digits = vec![0usize; dims.len()];
    for idx in 0..total {
        let mut rem = idx;
        for slot in (0..dims.len()).rev() {
            digits[slot] = rem % dims[slot];
            rem /= dims[slot];
        }
        let mut out = 0;
        for (k, &p) in perm.iter().enumerate() {
            out = out * out_dims[k] + digits[p];
        }
        u[(out, idx)] = c(1.0);
    }
    u
}

fn psi_plus() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(&[c(s), c(0.0), c(0.0), c(s)]).expect("normalized")
}

pub fn make_rho_ac(mode: InputMode) -> Result<JointInputState, QuantumError> {
    match &mode {
        InputMode::EntangledFlagged(variant) => {
            // flags on (A1, C1): 1/2 (|00><00| + |ff><ff|), f = 0 or 1
            let second = match variant {
                FlagVariant::Literal => 0,
                FlagVariant::Alternating => 3,
            };
            let flags = DensityMatrix::mixture(&[
                (0.5, &DensityMatrix::basis(4, 0)),
                (0.5, &DensityMatrix::basis(4, second)),
            ])?;
            // factors (A1, C1, A2, C2) -> (A1, A2, C1, C2)
            let raw = flags.tensor(&psi_plus());
            let u = permutation_unitary(&[2, 2, 2, 2], &[0, 2, 1, 3]);
            Ok(JointInputState {
                rho_ac: raw.conjugate(&u)?,
                side_dim: 4,
                mode,
            })
        }
        InputMode::PhaseSetState(rho) => Ok(JointInputState {
            rho_ac: rho.tensor(rho),
            side_dim: rho.dim(),
            mode,
        }),
    }
}

/// `id_2 (x) N`, passing the flag register of the entangled input through
/// untouched.
pub fn lift_for_flagged_input(main: &KrausChannel) -> KrausChannel {
    KrausChannel::identity(2).tensor(main)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchTerm {
    pub branches: &'static str,
    pub weight: f64,
    pub i_coh: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperactivationReport {
    pub p: f64,
    /// `I_coh(M (x) M, rho_AC)` evaluated on the full doubled channel.
    pub i_coh_joint: f64,
    /// Branch pairs in the order main·main, main·erasure, erasure·main,
    /// erasure·erasure.
    pub branch_terms: [BranchTerm; 4],
    /// `sum_b w_b I_coh(branch_b, rho_AC)`.
    pub decomposition_sum: f64,
    /// `I_coh(N, rho_A)` for the main channel alone.
    pub i_coh_main: f64,
    /// `2p(1-p) I_coh(N)`.
    pub bound_2p1p: f64,
    /// `I_coh(N) / 2`.
    pub p_sym_star_lower: f64,
}

impl SuperactivationReport {
    pub fn term(&self, idx: usize) -> f64 {
        self.branch_terms[idx].i_coh
    }
}

fn check_dims(ch: &KrausChannel) -> Result<(), QuantumError> {
    for dim in [ch.out_dim(), ch.num_ops()] {
        if dim > JOINT_DIM_CAP {
            return Err(QuantumError::DimensionOverflow {
                dim,
                cap: JOINT_DIM_CAP,
            });
        }
    }
    Ok(())
}

pub fn joint_coherent_info(
    sc: &SwitchChannel,
    input: &JointInputState,
) -> Result<SuperactivationReport, SuperactivationError> {
    let expected = sc.channel.in_dim() * sc.channel.in_dim();
    if input.rho_ac.dim() != expected || input.side_dim != sc.channel.in_dim() {
        return Err(SuperactivationError::InputDimension {
            expected,
            got: input.rho_ac.dim(),
        });
    }
    let doubled = sc.channel.tensor(&sc.channel);
    check_dims(&doubled)?;
    let i_coh_joint = coherent_information(&doubled, &input.rho_ac)?;

    let p = sc.p;
    let pairs: [(&'static str, &KrausChannel, &KrausChannel, f64); 4] = [
        ("main*main", &sc.main_flagged, &sc.main_flagged, p * p),
        (
            "main*erasure",
            &sc.main_flagged,
            &sc.erasure_flagged,
            p * (1.0 - p),
        ),
        (
            "erasure*main",
            &sc.erasure_flagged,
            &sc.main_flagged,
            (1.0 - p) * p,
        ),
        (
            "erasure*erasure",
            &sc.erasure_flagged,
            &sc.erasure_flagged,
            (1.0 - p) * (1.0 - p),
        ),
    ];
    let mut terms = Vec::with_capacity(4);
    for (branches, x, y, weight) in pairs {
        let branch = x.tensor(y);
        check_dims(&branch)?;
        terms.push(BranchTerm {
            branches,
            weight,
            i_coh: coherent_information(&branch, &input.rho_ac)?,
        });
    }
    let decomposition_sum = terms.iter().map(|t| t.weight * t.i_coh).sum();
    let i_coh_main = coherent_information(&sc.main, &input.side_a()?)?;
    let branch_terms: [BranchTerm; 4] = terms.try_into().expect("four branch pairs");
    Ok(SuperactivationReport {
        p,
        i_coh_joint,
        branch_terms,
        decomposition_sum,
        i_coh_main,
        bound_2p1p: 2.0 * p * (1.0 - p) * i_coh_main,
        p_sym_star_lower: 0.5 * i_coh_main,
    })
}

/// The 99-point grid `0.01, 0.02, .., 0.99`.
pub fn p_grid() -> Vec<f64> {
    (1..=99).map(|k| k as f64 / 100.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperactivatedBound {
    pub bound: f64,
    /// Grid point maximizing the bound; the first one on ties.
    pub p_star: f64,
    pub bound_at_p_star: f64,
}

/// `2p(1-p) i_coh_main` and its maximizer over [`p_grid`].
pub fn superactivated_bound(
    p: f64,
    i_coh_main: f64,
) -> Result<SuperactivatedBound, SuperactivationError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SuperactivationError::OpenIntervalRequired(p));
    }
    let f = |q: f64| 2.0 * q * (1.0 - q) * i_coh_main;
    let mut p_star = f64::NAN;
    let mut best = f64::NEG_INFINITY;
    for q in p_grid() {
        let v = f(q);
        if v > best {
            best = v;
            p_star = q;
        }
    }
    Ok(SuperactivatedBound {
        bound: f(p),
        p_star,
        bound_at_p_star: best,
    })
}

/// `(C_sym(bob_phase) - I(A:E)) / 2`.
pub fn assisted_single_use_capacity(
    bob_phase: &BinaryCqChannel,
    eve: &BinaryCqChannel,
) -> Result<f64, QuantumError> {
    let i_ae = mutual_information(&eve.joint_state(), (2, eve.dim()))?;
    Ok(0.5 * (symmetric_cq_capacity(bob_phase) - i_ae))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssistedComparison {
    pub p_e2: f64,
    pub s_in: usize,
    /// `|S_in| / 2`.
    pub b_star: f64,
    /// `p_e2 |S_in|`.
    pub b: f64,
    /// `b_star > b`; equality is not an advantage.
    pub advantage: bool,
}

pub fn compare_assisted(
    p_e2: f64,
    part: &IndexSetPartition,
) -> Result<AssistedComparison, SuperactivationError> {
    if !(p_e2 > 0.0 && p_e2 < 1.0) {
        return Err(SuperactivationError::OpenIntervalRequired(p_e2));
    }
    let s_in = part.s_in.len();
    let b_star = 0.5 * s_in as f64;
    let b = p_e2 * s_in as f64;
    Ok(AssistedComparison {
        p_e2,
        s_in,
        b_star,
        b,
        advantage: b_star > b,
    })
}

/// Least-squares coefficients of `v(p) = mm p^2 + cross 2p(1-p) + ee (1-p)^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchFit {
    pub mm: f64,
    pub cross: f64,
    pub ee: f64,
    /// Largest absolute residual over the samples.
    pub residual: f64,
}

pub fn fit_branch_terms(ps: &[f64], values: &[f64]) -> Result<BranchFit, SuperactivationError> {
    let mut distinct: Vec<f64> = ps.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 || ps.len() != values.len() {
        return Err(SuperactivationError::UnderdeterminedFit);
    }
    let a = DMatrix::from_fn(ps.len(), 3, |i, j| {
        let p = ps[i];
        match j {
            0 => p * p,
            1 => 2.0 * p * (1.0 - p),
            _ => (1.0 - p) * (1.0 - p),
        }
    });
    let b = DVector::from_column_slice(values);
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|_| SuperactivationError::UnderdeterminedFit)?;
    let residual = (&a * &x - &b).amax();
    Ok(BranchFit {
        mm: x[0],
        cross: x[1],
        ee: x[2],
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub report: SuperactivationReport,
    pub comparison: AssistedComparison,
}

/// Evaluates the switch construction at each `p`, reusing `p` as the relay
/// success probability for the `B` versus `B*` comparison.
pub fn sweep(
    main: &KrausChannel,
    input: &JointInputState,
    part: &IndexSetPartition,
    ps: &[f64],
) -> Result<Vec<SweepRow>, SuperactivationError> {
    ps.par_iter()
        .map(|&p| {
            let sc = build_switch_channel(p, main)?;
            Ok(SweepRow {
                report: joint_coherent_info(&sc, input)?,
                comparison: compare_assisted(p, part)?,
            })
        })
        .collect()
}

/// CSV with columns
/// `p,i_coh_joint,term_mm,term_me,term_em,term_ee,bound_2p1p,b,b_star,advantage`.
pub fn write_sweep_csv<W: Write>(out: &mut W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(
        out,
        "p,i_coh_joint,term_mm,term_me,term_em,term_ee,bound_2p1p,b,b_star,advantage"
    )?;
    for row in rows {
        let r = &row.report;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.p),
            fmt_f64(r.i_coh_joint),
            fmt_f64(r.term(0)),
            fmt_f64(r.term(1)),
            fmt_f64(r.term(2)),
            fmt_f64(r.term(3)),
            fmt_f64(r.bound_2p1p),
            fmt_f64(row.comparison.b),
            fmt_f64(row.comparison.b_star),
            row.comparison.advantage
        )?;
    }
    Ok(())
}

/// Swap of the two tensor factors of a `d x d` bipartite system.
pub fn swap_unitary(d: usize) -> CMatrix {
    permutation_unitary(&[d, d], &[1, 0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codeword_sets::{build_partition, DualPolarization};
    use crate::index_set::IndexSet;
    use crate::quantum::{isometric_extension, von_neumann_entropy};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn switch_extremes() {
        let main = KrausChannel::dephasing(0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::random(2, &mut rng);
        for p in [0.0, 1.0] {
            let sc = build_switch_channel(p, &main).unwrap();
            assert!(sc.channel().completeness_deviation() < 1e-9);
            let out = sc.channel().apply(&rho).unwrap();
            let flag = trace_out(&out, &[sc.signal_dim(), 2], &[1]).unwrap();
            let expect_zero = if p == 1.0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(flag.matrix()[(0, 0)].re, expect_zero, epsilon = 1e-12);
            let signal = trace_out(&out, &[sc.signal_dim(), 2], &[0]).unwrap();
            let branch = if p == 1.0 { &main } else { sc.erasure() };
            let expected = branch
                .pad_output(sc.signal_dim())
                .unwrap()
                .apply(&rho)
                .unwrap();
            assert!(max_diff(signal.matrix(), expected.matrix()) < 1e-12);
        }
        assert!(build_switch_channel(1.2, &main).is_err());
    }

    #[test]
    fn switch_half_flag_marginal() {
        let sc = build_switch_channel(0.5, &KrausChannel::bit_flip(0.3).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = sc
            .channel()
            .apply(&DensityMatrix::random(2, &mut rng))
            .unwrap();
        assert_abs_diff_eq!(out.matrix().trace().re, 1.0, epsilon = 1e-9);
        let flag = trace_out(&out, &[sc.signal_dim(), 2], &[1]).unwrap();
        assert_abs_diff_eq!(flag.matrix()[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(flag.matrix()[(1, 1)].re, 0.5, epsilon = 1e-12);
    }

    /// Explicit swap built entry by entry: |i j> -> |j i>.
    fn swap_oracle(d: usize) -> CMatrix {
        let mut s = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                s[(j * d + i, i * d + j)] = c(1.0);
            }
        }
        s
    }

    #[test]
    fn entangled_inputs() {
        for variant in [FlagVariant::Literal, FlagVariant::Alternating] {
            let input = make_rho_ac(InputMode::EntangledFlagged(variant)).unwrap();
            let rho = &input.rho_ac;
            assert_eq!(rho.dim(), 16);
            assert_abs_diff_eq!(rho.matrix().trace().re, 1.0, epsilon = 1e-12);
            assert!(rho.eigenvalues().iter().all(|&l| l >= 0.0));
            // the |Psi+> halves sit on factors 1 and 3 of (A1, A2, C1, C2)
            for keep in [1, 3] {
                let r = trace_out(rho, &[2, 2, 2, 2], &[keep]).unwrap();
                assert!(max_diff(r.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-12);
            }
            let s = swap_oracle(4);
            let swapped = &s * rho.matrix() * s.adjoint();
            assert!(max_diff(&swapped, rho.matrix()) < 1e-12);
            assert!(max_diff(&swap_unitary(4), &s) < 1e-15);
        }
        let lit = make_rho_ac(InputMode::EntangledFlagged(FlagVariant::Literal)).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&lit.rho_ac), 0.0, epsilon = 1e-9);
        let alt = make_rho_ac(InputMode::EntangledFlagged(FlagVariant::Alternating)).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&alt.rho_ac), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn product_input_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::random(2, &mut rng);
        let input = make_rho_ac(InputMode::PhaseSetState(rho)).unwrap();
        let s = swap_oracle(2);
        assert!(
            max_diff(
                &(&s * input.rho_ac.matrix() * s.adjoint()),
                input.rho_ac.matrix()
            ) < 1e-12
        );
    }

    fn flagged_setup(main: &KrausChannel, p: f64) -> (SwitchChannel, JointInputState) {
        let sc = build_switch_channel(p, &lift_for_flagged_input(main)).unwrap();
        let input = make_rho_ac(InputMode::EntangledFlagged(FlagVariant::Alternating)).unwrap();
        (sc, input)
    }

    #[test]
    fn decomposition_identity() {
        let mains = [
            KrausChannel::identity(2),
            KrausChannel::dephasing(0.2).unwrap(),
        ];
        for main in &mains {
            for p in [0.1, 0.5, 0.9] {
                let (sc, input) = flagged_setup(main, p);
                let r = joint_coherent_info(&sc, &input).unwrap();
                assert_abs_diff_eq!(r.i_coh_joint, r.decomposition_sum, epsilon = 1e-9);
                let w: f64 = r.branch_terms.iter().map(|t| t.weight).sum();
                assert_abs_diff_eq!(w, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(r.term(3), 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn single_branch_limits() {
        let main = KrausChannel::dephasing(0.2).unwrap();
        let (sc, input) = flagged_setup(&main, 0.0);
        let r = joint_coherent_info(&sc, &input).unwrap();
        assert_abs_diff_eq!(r.i_coh_joint, 0.0, epsilon = 1e-9);
        let (sc, input) = flagged_setup(&main, 1.0);
        let r = joint_coherent_info(&sc, &input).unwrap();
        let lifted = lift_for_flagged_input(&main);
        let direct = coherent_information(&lifted.tensor(&lifted), &input.rho_ac).unwrap();
        assert_abs_diff_eq!(r.i_coh_joint, direct, epsilon = 1e-9);
    }

    #[test]
    fn joint_value_matches_full_dilation() {
        // qubit input keeps the dilated system at 36 x 16 levels
        let sc = build_switch_channel(0.5, &KrausChannel::identity(2)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&[c(s), c(s)]).unwrap();
        let input = make_rho_ac(InputMode::PhaseSetState(plus)).unwrap();
        let r = joint_coherent_info(&sc, &input).unwrap();
        assert_abs_diff_eq!(r.i_coh_joint, r.decomposition_sum, epsilon = 1e-9);
        let doubled = sc.channel().tensor(sc.channel());
        let v = isometric_extension(&doubled).unwrap();
        let joint = v.apply(&input.rho_ac).unwrap();
        let (dout, denv) = (v.out_dim(), v.env_dim());
        let b = trace_out(&joint, &[dout, denv], &[0]).unwrap();
        let e = trace_out(&joint, &[dout, denv], &[1]).unwrap();
        let brute = von_neumann_entropy(&b) - von_neumann_entropy(&e);
        assert_abs_diff_eq!(r.i_coh_joint, brute, epsilon = 1e-9);
    }

    #[test]
    fn input_dimension_is_checked() {
        let sc = build_switch_channel(0.5, &KrausChannel::identity(2)).unwrap();
        let input = make_rho_ac(InputMode::EntangledFlagged(FlagVariant::Literal)).unwrap();
        assert!(matches!(
            joint_coherent_info(&sc, &input),
            Err(SuperactivationError::InputDimension { .. })
        ));
    }

    #[test]
    fn bound_and_grid() {
        let b = superactivated_bound(0.5, 1.0).unwrap();
        assert_eq!(b.bound, 0.5);
        assert_eq!(b.p_star, 0.5);
        assert_eq!(b.bound_at_p_star, 0.5);
        assert!(superactivated_bound(1e-9, 1.0).unwrap().bound < 1e-8);
        assert!(superactivated_bound(0.0, 1.0).is_err());
        assert!(superactivated_bound(1.0, 1.0).is_err());
        for i in [0.01, 0.3, 2.0] {
            let b = superactivated_bound(0.2, i).unwrap();
            assert_eq!(b.p_star, 0.5);
            assert_abs_diff_eq!(b.bound_at_p_star, 0.5 * i, epsilon = 1e-15);
        }
        // concave with a unique grid maximum
        let vals: Vec<f64> = p_grid()
            .iter()
            .map(|&p| superactivated_bound(p, 1.0).unwrap().bound)
            .collect();
        for w in vals.windows(3) {
            assert!(w[1] * 2.0 >= w[0] + w[2] - 1e-15);
        }
        assert_eq!(vals.iter().filter(|&&v| v == 0.5).count(), 1);
    }

    fn pure(re0: f64, re1: f64) -> DensityMatrix {
        DensityMatrix::pure(&[c(re0), c(re1)]).unwrap()
    }

    #[test]
    fn single_use_capacity_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bob = BinaryCqChannel::new(pure(1.0, 0.0), pure(0.0, 1.0)).unwrap();
        let useless = BinaryCqChannel::new(pure(1.0, 0.0), pure(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(
            assisted_single_use_capacity(&bob, &bob).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            assisted_single_use_capacity(&bob, &useless).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        // squared overlap 1/2: Holevo quantity h((1 + 1/sqrt 2) / 2)
        let overlap = BinaryCqChannel::new(pure(1.0, 0.0), pure(s, s)).unwrap();
        let lam = (1.0 + s) / 2.0;
        let h = -lam * lam.log2() - (1.0 - lam) * (1.0 - lam).log2();
        let v = assisted_single_use_capacity(&overlap, &useless).unwrap();
        assert_abs_diff_eq!(v, 0.5 * h, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.300438, epsilon = 1e-6);
    }

    fn part_with_s_in(n: usize, s_in: usize) -> IndexSetPartition {
        let good = IndexSet::from_predicate(n, |i| i < s_in);
        build_partition(&DualPolarization::new(good.clone(), good).unwrap())
    }

    #[test]
    fn comparison_examples() {
        let part = part_with_s_in(128, 100);
        let c = compare_assisted(0.3, &part).unwrap();
        assert_eq!((c.b_star, c.advantage), (50.0, true));
        assert_abs_diff_eq!(c.b, 30.0, epsilon = 1e-12);
        let c = compare_assisted(0.5, &part).unwrap();
        assert_eq!(c.b, c.b_star);
        assert!(!c.advantage);
        assert!(!compare_assisted(0.7, &part).unwrap().advantage);
        assert!(compare_assisted(1.0, &part).is_err());
        for p in p_grid() {
            let c = compare_assisted(p, &part).unwrap();
            assert_eq!(c.advantage, p < 0.5);
            assert_eq!(c.advantage, c.b_star > c.b);
        }
    }

    #[test]
    fn fit_recovers_branch_terms() {
        let main = KrausChannel::dephasing(0.2).unwrap();
        let ps = [0.1, 0.3, 0.5, 0.7, 0.9];
        let reports: Vec<SuperactivationReport> = ps
            .iter()
            .map(|&p| {
                let (sc, input) = flagged_setup(&main, p);
                joint_coherent_info(&sc, &input).unwrap()
            })
            .collect();
        let values: Vec<f64> = reports.iter().map(|r| r.i_coh_joint).collect();
        let fit = fit_branch_terms(&ps, &values).unwrap();
        assert!(fit.residual <= 1e-9);
        let r = &reports[0];
        assert_abs_diff_eq!(fit.mm, r.term(0), epsilon = 1e-8);
        assert_abs_diff_eq!(fit.cross, 0.5 * (r.term(1) + r.term(2)), epsilon = 1e-8);
        assert_abs_diff_eq!(fit.ee, r.term(3), epsilon = 1e-8);
        assert!(fit_branch_terms(&[0.1, 0.1, 0.2], &[0.0; 3]).is_err());
    }

    #[test]
    fn sweep_csv_shape() {
        let input = make_rho_ac(InputMode::EntangledFlagged(FlagVariant::Alternating)).unwrap();
        let rows = sweep(
            &lift_for_flagged_input(&KrausChannel::identity(2)),
            &input,
            &part_with_s_in(16, 8),
            &[0.25, 0.75],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",true"));
        assert!(lines[2].ends_with(",false"));
        assert_eq!(lines[1].split(',').count(), 10);
    }
}
