use nalgebra::SymmetricEigen;
use rand::Rng;

use super::{c, CMatrix, DensityMatrix, QuantumError, C64, VALIDATION_TOL};

/// A CPTP map in Kraus form, `rho -> sum_i K_i rho K_i^dag`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    ops: Vec<CMatrix>,
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<(), QuantumError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(QuantumError::InvalidParameter {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

fn pauli_y() -> CMatrix {
    let i = C64::new(0.0, 1.0);
    CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)])
}

fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

impl KrausChannel {
    /// Builds a channel, checking shapes and `sum K^dag K = I` to 1e-9.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self, QuantumError> {
        let first = ops.first().ok_or(QuantumError::EmptyKraus)?;
        let (out_dim, in_dim) = (first.nrows(), first.ncols());
        if ops
            .iter()
            .any(|k| k.nrows() != out_dim || k.ncols() != in_dim)
        {
            return Err(QuantumError::ShapeMismatch);
        }
        let dev = completeness_deviation(&ops, in_dim);
        if dev > VALIDATION_TOL {
            return Err(QuantumError::Incomplete(dev));
        }
        Ok(Self {
            in_dim,
            out_dim,
            ops,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            in_dim: dim,
            out_dim: dim,
            ops: vec![CMatrix::identity(dim, dim)],
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self, QuantumError> {
        Self::new(vec![u])
    }

    /// Phase flip with probability `q`: `{sqrt(1-q) I, sqrt(q) Z}`.
    pub fn dephasing(q: f64) -> Result<Self, QuantumError> {
        check_unit_interval("q", q)?;
        Self::new(vec![
            CMatrix::identity(2, 2) * c((1.0 - q).sqrt()),
            pauli_z() * c(q.sqrt()),
        ])
    }

    /// Bit flip with probability `q`: `{sqrt(1-q) I, sqrt(q) X}`.
    pub fn bit_flip(q: f64) -> Result<Self, QuantumError> {
        check_unit_interval("q", q)?;
        Self::new(vec![
            CMatrix::identity(2, 2) * c((1.0 - q).sqrt()),
            pauli_x() * c(q.sqrt()),
        ])
    }

    /// `rho -> (1-q) rho + q I/2`.
    pub fn depolarizing(q: f64) -> Result<Self, QuantumError> {
        check_unit_interval("q", q)?;
        Self::new(vec![
            CMatrix::identity(2, 2) * c((1.0 - 0.75 * q).sqrt()),
            pauli_x() * c((q / 4.0).sqrt()),
            pauli_y() * c((q / 4.0).sqrt()),
            pauli_z() * c((q / 4.0).sqrt()),
        ])
    }

    /// General qubit Pauli channel with flip probabilities `(px, py, pz)`.
    pub fn pauli(px: f64, py: f64, pz: f64) -> Result<Self, QuantumError> {
        for (name, v) in [("px", px), ("py", py), ("pz", pz)] {
            check_unit_interval(name, v)?;
        }
        let pi = 1.0 - px - py - pz;
        check_unit_interval("1 - px - py - pz", pi)?;
        Self::new(vec![
            CMatrix::identity(2, 2) * c(pi.sqrt()),
            pauli_x() * c(px.sqrt()),
            pauli_y() * c(py.sqrt()),
            pauli_z() * c(pz.sqrt()),
        ])
    }

    /// Erasure channel on a `dim`-level input.
    ///
    /// The output has `dim + 1` levels; level `dim` is the erasure flag.
    /// Kraus set: `sqrt(1-eps)` times the embedding, plus `sqrt(eps) |e><k|`
    /// for every input basis state `k`.
    pub fn erasure(eps: f64, dim: usize) -> Result<Self, QuantumError> {
        check_unit_interval("epsilon", eps)?;
        let mut ops = Vec::with_capacity(dim + 1);
        let keep = CMatrix::from_fn(dim + 1, dim, |i, j| {
            if i == j {
                c((1.0 - eps).sqrt())
            } else {
                c(0.0)
            }
        });
        ops.push(keep);
        for k in 0..dim {
            let mut e = CMatrix::zeros(dim + 1, dim);
            e[(dim, k)] = c(eps.sqrt());
            ops.push(e);
        }
        Self::new(ops)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    /// Max deviation of `sum K^dag K` from the identity.
    pub fn completeness_deviation(&self) -> f64 {
        completeness_deviation(&self.ops, self.in_dim)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, QuantumError> {
        apply_kraus(self, rho)
    }

    /// State handed to the environment of the Stinespring dilation,
    /// `[Tr(K_i rho K_j^dag)]_{ij}`; equal to tracing the channel output out
    /// of `U rho U^dag` for `U = sum_i K_i (x) |i>`.
    pub fn complementary(&self, rho: &DensityMatrix) -> Result<DensityMatrix, QuantumError> {
        self.check_input(rho)?;
        let r = self.ops.len();
        let images: Vec<CMatrix> = self.ops.iter().map(|k| k * rho.matrix()).collect();
        let mut env = CMatrix::zeros(r, r);
        for i in 0..r {
            for j in i..r {
                // Tr(K_i rho K_j^dag) = sum_ab (K_i rho)_{ab} conj(K_j)_{ab}
                let v: C64 = images[i]
                    .iter()
                    .zip(self.ops[j].iter())
                    .map(|(x, y)| x * y.conj())
                    .sum();
                env[(i, j)] = v;
                env[(j, i)] = v.conj();
            }
        }
        DensityMatrix::new(env)
    }

    /// `self (x) other`, acting on the tensor product of the inputs.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(a.kronecker(b));
            }
        }
        KrausChannel {
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
            ops,
        }
    }

    /// Serial composition: apply `self` first, then `next`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel, QuantumError> {
        if next.in_dim != self.out_dim {
            return Err(QuantumError::DimensionMismatch {
                expected: self.out_dim,
                got: next.in_dim,
            });
        }
        let mut ops = Vec::with_capacity(self.ops.len() * next.ops.len());
        for b in &next.ops {
            for a in &self.ops {
                ops.push(b * a);
            }
        }
        KrausChannel::new(ops)
    }

    /// Embeds the output into the first `out_dim` levels of a larger space.
    pub fn pad_output(&self, out_dim: usize) -> Result<KrausChannel, QuantumError> {
        if out_dim < self.out_dim {
            return Err(QuantumError::DimensionMismatch {
                expected: self.out_dim,
                got: out_dim,
            });
        }
        let ops = self
            .ops
            .iter()
            .map(|k| {
                let mut p = CMatrix::zeros(out_dim, self.in_dim);
                p.view_mut((0, 0), (self.out_dim, self.in_dim)).copy_from(k);
                p
            })
            .collect();
        Ok(KrausChannel {
            in_dim: self.in_dim,
            out_dim,
            ops,
        })
    }

    /// Random channel with `num_ops` Kraus operators, drawn by orthonormalizing
    /// a random `(num_ops * out_dim) x in_dim` stack.
    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        num_ops: usize,
        rng: &mut R,
    ) -> KrausChannel {
        let rows = num_ops * out_dim;
        assert!(
            rows >= in_dim,
            "stack must be at least as tall as the input"
        );
        let v = CMatrix::from_fn(rows, in_dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let gram = v.adjoint() * &v;
        let eig = SymmetricEigen::new(gram);
        let inv_sqrt = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(1.0 / l.sqrt())));
        let q = &v * (&eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint());
        let ops = (0..num_ops)
            .map(|i| q.rows(i * out_dim, out_dim).into_owned())
            .collect();
        KrausChannel::new(ops).expect("orthonormalized stack is complete")
    }

    fn check_input(&self, rho: &DensityMatrix) -> Result<(), QuantumError> {
        if rho.dim() != self.in_dim {
            Err(QuantumError::DimensionMismatch {
                expected: self.in_dim,
                got: rho.dim(),
            })
        } else {
            Ok(())
        }
    }
}

fn completeness_deviation(ops: &[CMatrix], in_dim: usize) -> f64 {
    let mut sum = CMatrix::zeros(in_dim, in_dim);
    for k in ops {
        sum += k.adjoint() * k;
    }
    (sum - CMatrix::identity(in_dim, in_dim)).camax()
}

/// `sum_i K_i rho K_i^dag`.
pub fn apply_kraus(
    channel: &KrausChannel,
    rho: &DensityMatrix,
) -> Result<DensityMatrix, QuantumError> {
    channel.check_input(rho)?;
    let mut out = CMatrix::zeros(channel.out_dim, channel.out_dim);
    for k in &channel.ops {
        out += k * rho.matrix() * k.adjoint();
    }
    DensityMatrix::new(out)
}

/// Stinespring isometry `V = sum_i K_i (x) |i>_E` from input to output (x) environment.
///
/// Rows are indexed `b * env_dim + i`, so the output system is the first factor.
#[derive(Clone, Debug)]
pub struct Isometry {
    matrix: CMatrix,
    in_dim: usize,
    out_dim: usize,
    env_dim: usize,
}

impl Isometry {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    /// Checks `V^dag V = I` and that `V V^dag` is idempotent.
    pub fn check(&self) -> Result<(), QuantumError> {
        let vtv = self.matrix.adjoint() * &self.matrix;
        let dev = (vtv - CMatrix::identity(self.in_dim, self.in_dim)).camax();
        if dev > VALIDATION_TOL {
            return Err(QuantumError::NotIsometry(format!(
                "V^dag V deviates from I by {dev:.3e}"
            )));
        }
        let p = &self.matrix * self.matrix.adjoint();
        let dev = (&p * &p - &p).camax();
        if dev > VALIDATION_TOL {
            return Err(QuantumError::NotIsometry(format!(
                "V V^dag is not a projector (deviation {dev:.3e})"
            )));
        }
        Ok(())
    }

    /// `V rho V^dag` on output (x) environment.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, QuantumError> {
        if rho.dim() != self.in_dim {
            return Err(QuantumError::DimensionMismatch {
                expected: self.in_dim,
                got: rho.dim(),
            });
        }
        DensityMatrix::new(&self.matrix * rho.matrix() * self.matrix.adjoint())
    }
}

pub fn isometric_extension(channel: &KrausChannel) -> Result<Isometry, QuantumError> {
    let env_dim = channel.ops.len();
    let mut v = CMatrix::zeros(channel.out_dim * env_dim, channel.in_dim);
    for (i, k) in channel.ops.iter().enumerate() {
        for b in 0..channel.out_dim {
            for a in 0..channel.in_dim {
                v[(b * env_dim + i, a)] = k[(b, a)];
            }
        }
    }
    let iso = Isometry {
        matrix: v,
        in_dim: channel.in_dim,
        out_dim: channel.out_dim,
        env_dim,
    };
    iso.check()?;
    Ok(iso)
}
