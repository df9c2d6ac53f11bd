use serde::Serialize;

use super::{trace_out, von_neumann_entropy, CMatrix, DensityMatrix, KrausChannel, QuantumError};

/// Binary-input classical-quantum channel `x -> sigma_x`.
#[derive(Clone, Debug)]
pub struct BinaryCqChannel {
    sigma0: DensityMatrix,
    sigma1: DensityMatrix,
}

impl BinaryCqChannel {
    pub fn new(sigma0: DensityMatrix, sigma1: DensityMatrix) -> Result<Self, QuantumError> {
        if sigma0.dim() != sigma1.dim() {
            return Err(QuantumError::DimensionMismatch {
                expected: sigma0.dim(),
                got: sigma1.dim(),
            });
        }
        Ok(Self { sigma0, sigma1 })
    }

    /// Output states of `channel` on the computational basis inputs.
    pub fn from_channel_z(channel: &KrausChannel) -> Result<Self, QuantumError> {
        Self::new(
            channel.apply(&DensityMatrix::basis(channel.in_dim(), 0))?,
            channel.apply(&DensityMatrix::basis(channel.in_dim(), 1))?,
        )
    }

    /// Output states of `channel` on `|+>` and `|->`.
    pub fn from_channel_x(channel: &KrausChannel) -> Result<Self, QuantumError> {
        let (plus, minus) = plus_minus(channel.in_dim())?;
        Self::new(channel.apply(&plus)?, channel.apply(&minus)?)
    }

    /// Environment states of `channel` on the computational basis inputs.
    pub fn complementary_z(channel: &KrausChannel) -> Result<Self, QuantumError> {
        Self::new(
            channel.complementary(&DensityMatrix::basis(channel.in_dim(), 0))?,
            channel.complementary(&DensityMatrix::basis(channel.in_dim(), 1))?,
        )
    }

    /// Environment states of `channel` on `|+>` and `|->`.
    pub fn complementary_x(channel: &KrausChannel) -> Result<Self, QuantumError> {
        let (plus, minus) = plus_minus(channel.in_dim())?;
        Self::new(
            channel.complementary(&plus)?,
            channel.complementary(&minus)?,
        )
    }

    pub fn sigma0(&self) -> &DensityMatrix {
        &self.sigma0
    }

    pub fn sigma1(&self) -> &DensityMatrix {
        &self.sigma1
    }

    pub fn dim(&self) -> usize {
        self.sigma0.dim()
    }

    /// Joint classical-quantum state with a uniform input,
    /// `1/2 |0><0| (x) sigma0 + 1/2 |1><1| (x) sigma1`, register first.
    pub fn joint_state(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(2 * d, 2 * d);
        let half = super::c(0.5);
        m.view_mut((0, 0), (d, d))
            .copy_from(&(self.sigma0.matrix() * half));
        m.view_mut((d, d), (d, d))
            .copy_from(&(self.sigma1.matrix() * half));
        DensityMatrix::new(m).expect("block mixture of valid states")
    }

    fn average(&self) -> DensityMatrix {
        DensityMatrix::mixture(&[(0.5, &self.sigma0), (0.5, &self.sigma1)])
            .expect("equal dimensions checked at construction")
    }
}

fn plus_minus(dim: usize) -> Result<(DensityMatrix, DensityMatrix), QuantumError> {
    if dim < 2 {
        return Err(QuantumError::DimensionMismatch {
            expected: 2,
            got: dim,
        });
    }
    let mut p = vec![super::c(0.0); dim];
    let mut m = vec![super::c(0.0); dim];
    p[0] = super::c(1.0);
    p[1] = super::c(1.0);
    m[0] = super::c(1.0);
    m[1] = super::c(-1.0);
    Ok((DensityMatrix::pure(&p)?, DensityMatrix::pure(&m)?))
}

/// Information quantities for a binary-input scenario, all in bits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityReport {
    pub c_sym: f64,
    pub p_sym_single_use: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub i_coh: Option<f64>,
}

/// Holevo quantity at the uniform input:
/// `S((sigma0 + sigma1)/2) - S(sigma0)/2 - S(sigma1)/2`.
pub fn symmetric_cq_capacity(ch: &BinaryCqChannel) -> f64 {
    let avg = von_neumann_entropy(&ch.average());
    let v = avg - 0.5 * von_neumann_entropy(&ch.sigma0) - 0.5 * von_neumann_entropy(&ch.sigma1);
    v.clamp(0.0, 1.0)
}

/// `S(A) + S(B) - S(AB)` for a bipartite state with factor dimensions `dims`.
pub fn mutual_information(
    rho_ab: &DensityMatrix,
    dims: (usize, usize),
) -> Result<f64, QuantumError> {
    let d = [dims.0, dims.1];
    let a = trace_out(rho_ab, &d, &[0])?;
    let b = trace_out(rho_ab, &d, &[1])?;
    Ok(von_neumann_entropy(&a) + von_neumann_entropy(&b) - von_neumann_entropy(rho_ab))
}

/// Single-use symmetric private information `I(A:B) - I(A:E)`, each term
/// evaluated on the uniform-input joint state. Negative values are kept.
pub fn private_information(
    bob: &BinaryCqChannel,
    eve: &BinaryCqChannel,
) -> Result<CapacityReport, QuantumError> {
    let i_ab = mutual_information(&bob.joint_state(), (2, bob.dim()))?;
    let i_ae = mutual_information(&eve.joint_state(), (2, eve.dim()))?;
    Ok(CapacityReport {
        c_sym: symmetric_cq_capacity(bob),
        p_sym_single_use: i_ab - i_ae,
        i_ab,
        i_ae,
        i_coh: None,
    })
}

/// `S(B) - S(E)` where `B` is the channel output and `E` the environment
/// of its Stinespring dilation.
pub fn coherent_information(
    channel: &KrausChannel,
    input: &DensityMatrix,
) -> Result<f64, QuantumError> {
    let out = channel.apply(input)?;
    let env = channel.complementary(input)?;
    Ok(von_neumann_entropy(&out) - von_neumann_entropy(&env))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{c, isometric_extension, shannon_entropy_bits};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ket0() -> DensityMatrix {
        DensityMatrix::basis(2, 0)
    }

    fn ket_plus() -> DensityMatrix {
        DensityMatrix::pure(&[c(1.0), c(1.0)]).unwrap()
    }

    /// Entropy of `(|0><0| + |+><+|)/2` from its closed-form spectrum.
    fn overlap_half_capacity() -> f64 {
        let s = 1.0 / 2f64.sqrt();
        shannon_entropy_bits(&[(1.0 + s) / 2.0, (1.0 - s) / 2.0])
    }

    #[test]
    fn cq_capacity_examples() {
        let orth = BinaryCqChannel::new(ket0(), DensityMatrix::basis(2, 1)).unwrap();
        assert_abs_diff_eq!(symmetric_cq_capacity(&orth), 1.0, epsilon = 1e-12);
        let same = BinaryCqChannel::new(ket_plus(), ket_plus()).unwrap();
        assert_abs_diff_eq!(symmetric_cq_capacity(&same), 0.0, epsilon = 1e-12);
        let tilted = BinaryCqChannel::new(ket0(), ket_plus()).unwrap();
        let expected = overlap_half_capacity();
        assert_abs_diff_eq!(expected, 0.600_876, epsilon = 1e-6);
        assert_abs_diff_eq!(symmetric_cq_capacity(&tilted), expected, epsilon = 1e-12);
    }

    #[test]
    fn cq_dimension_mismatch() {
        assert!(BinaryCqChannel::new(ket0(), DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let prod = DensityMatrix::diagonal(&[0.3, 0.7])
            .unwrap()
            .tensor(&ket_plus());
        assert_abs_diff_eq!(
            mutual_information(&prod, (2, 2)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let s = 1.0 / 2f64.sqrt();
        let bell = DensityMatrix::pure(&[c(s), c(0.0), c(0.0), c(s)]).unwrap();
        assert_abs_diff_eq!(
            mutual_information(&bell, (2, 2)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert!(mutual_information(&bell, (2, 3)).is_err());
    }

    #[test]
    fn cq_capacity_matches_joint_state_mutual_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 3] {
            for _ in 0..20 {
                let ch = BinaryCqChannel::new(
                    DensityMatrix::random(dim, &mut rng),
                    DensityMatrix::random(dim, &mut rng),
                )
                .unwrap();
                let mi = mutual_information(&ch.joint_state(), (2, dim)).unwrap();
                assert_abs_diff_eq!(symmetric_cq_capacity(&ch), mi, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn private_information_examples() {
        let bob = BinaryCqChannel::new(ket0(), DensityMatrix::basis(2, 1)).unwrap();
        let r = private_information(&bob, &bob).unwrap();
        assert_abs_diff_eq!(r.p_sym_single_use, 0.0, epsilon = 1e-12);

        let blind = BinaryCqChannel::new(ket_plus(), ket_plus()).unwrap();
        let r = private_information(&bob, &blind).unwrap();
        assert_abs_diff_eq!(r.p_sym_single_use, r.i_ab, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_sym_single_use, r.i_ab - r.i_ae, epsilon = 1e-12);

        // Eve sees |0> and |+> passed through a half-strength dephasing
        let deph = KrausChannel::dephasing(0.25).unwrap();
        let eve = BinaryCqChannel::new(
            deph.apply(&ket0()).unwrap(),
            deph.apply(&ket_plus()).unwrap(),
        )
        .unwrap();
        // dephased |+><+| has off-diagonal 1/4; average with |0><0| has
        // entries [[3/4, 1/8], [1/8, 1/4]]
        let avg_eigs = {
            let (a, d, b) = (0.75f64, 0.25f64, 0.125f64);
            let mid = (a + d) / 2.0;
            let r = (((a - d) / 2.0).powi(2) + b * b).sqrt();
            [mid + r, mid - r]
        };
        let plus_eigs = [0.75, 0.25];
        let i_ae = shannon_entropy_bits(&avg_eigs) - 0.5 * shannon_entropy_bits(&plus_eigs);
        let r = private_information(&bob, &eve).unwrap();
        assert_abs_diff_eq!(r.i_ae, i_ae, epsilon = 1e-10);
        assert_abs_diff_eq!(r.p_sym_single_use, 1.0 - i_ae, epsilon = 1e-10);
    }

    #[test]
    fn coherent_information_examples() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let id = KrausChannel::identity(2);
        assert_abs_diff_eq!(
            coherent_information(&id, &mixed).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let ae = KrausChannel::erasure(0.5, 2).unwrap();
        assert_abs_diff_eq!(
            coherent_information(&ae, &mixed).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let d0 = KrausChannel::dephasing(0.0).unwrap();
        assert_abs_diff_eq!(
            coherent_information(&d0, &mixed).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert!(coherent_information(&id, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn coherent_information_matches_full_dilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let ch = KrausChannel::random(2, 2, 3, &mut rng);
            let rho = DensityMatrix::random(2, &mut rng);
            let iso = isometric_extension(&ch).unwrap();
            let joint = iso.apply(&rho).unwrap();
            let dims = [ch.out_dim(), iso.env_dim()];
            let sb = von_neumann_entropy(&trace_out(&joint, &dims, &[0]).unwrap());
            let se = von_neumann_entropy(&trace_out(&joint, &dims, &[1]).unwrap());
            assert_abs_diff_eq!(
                coherent_information(&ch, &rho).unwrap(),
                sb - se,
                epsilon = 1e-10
            );
        }
    }
}
