use nalgebra::SymmetricEigen;

use super::{c, CMatrix, QuantumError, C64, VALIDATION_TOL};

/// A validated density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates `m` as a density matrix: square, Hermitian, unit trace and
    /// no eigenvalue below `-1e-9`.
    pub fn new(m: CMatrix) -> Result<Self, QuantumError> {
        if m.nrows() != m.ncols() {
            return Err(QuantumError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let dev = hermitian_deviation(&m);
        if dev > VALIDATION_TOL {
            return Err(QuantumError::NotHermitian(dev));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > VALIDATION_TOL || tr.im.abs() > VALIDATION_TOL {
            return Err(QuantumError::BadTrace(tr.re));
        }
        let min = raw_eigenvalues(&m)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -VALIDATION_TOL {
            return Err(QuantumError::NegativeEigenvalue(min));
        }
        Ok(Self { m })
    }

    /// `|psi><psi|`, normalizing `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self, QuantumError> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || norm == 0.0 {
            return Err(QuantumError::InvalidParameter {
                name: "norm",
                value: norm,
                range: "(0, inf)",
            });
        }
        let n = psi.len();
        let m = CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(m)
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = c(1.0);
        Self { m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim) / c(dim as f64),
        }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self, QuantumError> {
        let n = probs.len();
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { c(probs[i]) } else { c(0.0) });
        Self::new(m)
    }

    /// Convex combination `sum w_i rho_i`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self, QuantumError> {
        let dim = parts.first().map(|(_, r)| r.dim()).unwrap_or(0);
        let mut m = CMatrix::zeros(dim, dim);
        for (w, r) in parts {
            if r.dim() != dim {
                return Err(QuantumError::DimensionMismatch {
                    expected: dim,
                    got: r.dim(),
                });
            }
            m += &r.m * c(*w);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            m: self.m.kronecker(&other.m),
        }
    }

    /// Conjugation `U rho U^dag` by a unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix, QuantumError> {
        if u.ncols() != self.dim() {
            return Err(QuantumError::DimensionMismatch {
                expected: self.dim(),
                got: u.ncols(),
            });
        }
        DensityMatrix::new(u * &self.m * u.adjoint())
    }

    /// Spectrum with jitter in `[-1e-9, 0)` clipped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        raw_eigenvalues(&self.m)
            .into_iter()
            .map(|l| l.max(0.0))
            .collect()
    }

    /// Random full-rank state `G G^dag / Tr(G G^dag)` with uniform entries.
    pub fn random<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        DensityMatrix::new(m / tr).expect("Gram matrix is a valid state")
    }

    pub fn to_json(&self) -> serde_json::Value {
        super::matrix_to_json(&self.m)
    }
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn raw_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * c(0.5);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy_bits(&rho.eigenvalues()).max(0.0)
}

/// Partial trace keeping the subsystems listed in `keep`.
///
/// `subsystem_dims` gives the tensor factorization of `rho` in order; the
/// kept subsystems appear in the result in their original order.
pub fn trace_out(
    rho: &DensityMatrix,
    subsystem_dims: &[usize],
    keep: &[usize],
) -> Result<DensityMatrix, QuantumError> {
    let total: usize = subsystem_dims.iter().product();
    if total != rho.dim() || subsystem_dims.is_empty() {
        return Err(QuantumError::DimensionMismatch {
            expected: rho.dim(),
            got: total,
        });
    }
    let mut kept = vec![false; subsystem_dims.len()];
    for &k in keep {
        if k >= subsystem_dims.len() {
            return Err(QuantumError::InvalidSubsystem(format!(
                "subsystem {k} out of range for {} factors",
                subsystem_dims.len()
            )));
        }
        if kept[k] {
            return Err(QuantumError::InvalidSubsystem(format!(
                "subsystem {k} listed twice"
            )));
        }
        kept[k] = true;
    }

    let kept_dim: usize = subsystem_dims
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d)
        .product();
    let traced_dim = total / kept_dim;

    // split each full index into (kept index, traced index)
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); traced_dim];
    for full in 0..total {
        let mut rem = full;
        let mut digits = vec![0usize; subsystem_dims.len()];
        for (slot, &d) in subsystem_dims.iter().enumerate().rev() {
            digits[slot] = rem % d;
            rem /= d;
        }
        let (mut ki, mut ti) = (0usize, 0usize);
        for (slot, &d) in subsystem_dims.iter().enumerate() {
            if kept[slot] {
                ki = ki * d + digits[slot];
            } else {
                ti = ti * d + digits[slot];
            }
        }
        groups[ti].push((full, ki));
    }

    let m = rho.matrix();
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &(fa, ka) in group {
            for &(fb, kb) in group {
                out[(ka, kb)] += m[(fa, fb)];
            }
        }
    }
    DensityMatrix::new(out)
}
