use super::PolarError;

/// Largest level for which the dense matrix is materialized.
pub const MAX_MATRIX_LEVEL: u32 = 12;
/// Largest level for exact partial-distance computation.
pub const MAX_PARTIAL_DISTANCE_LEVEL: u32 = 5;

/// The `n x n` polar generator matrix over GF(2), `n = 2^k`.
///
/// Built from `G_k = (I_{n/2} (x) G_2) R_n (I_2 (x) G_{k-1})` with
/// `G_2 = [[1, 1], [0, 1]]` and `R_n` the permutation sending entry `j` of
/// the first half to position `2j` and entry `j` of the second half to
/// `2j + 1`. Codewords are `x = G m` with column vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorMatrix {
    k: u32,
    rows: Vec<Vec<u8>>,
}

impl GeneratorMatrix {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.rows[i][j]
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(v).fold(0u8, |acc, (a, b)| acc ^ (a & b)))
            .collect()
    }

    /// Gaussian elimination over GF(2).
    pub fn is_invertible(&self) -> bool {
        let n = self.n();
        let mut m: Vec<Vec<u8>> = self.rows.clone();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| m[r][col] == 1) else {
                return false;
            };
            m.swap(col, pivot);
            for r in 0..n {
                if r != col && m[r][col] == 1 {
                    for c in col..n {
                        m[r][c] ^= m[col][c];
                    }
                }
            }
        }
        true
    }
}

pub fn generator_matrix(k: u32) -> Result<GeneratorMatrix, PolarError> {
    if k == 0 || k > MAX_MATRIX_LEVEL {
        return Err(PolarError::InvalidLevel(k, "1 <= k <= 12"));
    }
    let mut rows = vec![vec![1u8, 1], vec![0, 1]];
    for _ in 1..k {
        let half = rows.len();
        let mut next = Vec::with_capacity(2 * half);
        // row 2t = [g_t, g_t], row 2t+1 = [0, g_t]
        for g in &rows {
            let mut top = g.clone();
            top.extend_from_slice(g);
            let mut bottom = vec![0u8; half];
            bottom.extend_from_slice(g);
            next.push(top);
            next.push(bottom);
        }
        rows = next;
    }
    Ok(GeneratorMatrix { k, rows })
}

/// Encodes `message` (length `2^k`) as `G_k m` in `O(n log n)`.
pub fn polar_encode(message: &[u8], k: u32) -> Result<Vec<u8>, PolarError> {
    if k == 0 || k >= usize::BITS {
        return Err(PolarError::InvalidLevel(k, "k >= 1"));
    }
    let n = 1usize << k;
    if message.len() != n {
        return Err(PolarError::LengthMismatch {
            expected: n,
            got: message.len(),
        });
    }
    Ok(encode_rec(message))
}

pub(crate) fn encode_rec(m: &[u8]) -> Vec<u8> {
    let n = m.len();
    if n == 1 {
        return vec![m[0] & 1];
    }
    let a = encode_rec(&m[..n / 2]);
    let b = encode_rec(&m[n / 2..]);
    let mut x = vec![0u8; n];
    for t in 0..n / 2 {
        x[2 * t] = a[t] ^ b[t];
        x[2 * t + 1] = b[t];
    }
    x
}

/// Partial distances of the generator rows and the exponent they imply.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialDistanceReport {
    pub d: Vec<u32>,
    pub beta_hat: f64,
}

/// `d_i` = Hamming distance from row `i` to the span of rows `i+1..n`;
/// `beta_hat = (1/n) sum_i log_n d_i`.
pub fn beta_from_partial_distances(k: u32) -> Result<PartialDistanceReport, PolarError> {
    if k == 0 || k > MAX_PARTIAL_DISTANCE_LEVEL {
        return Err(PolarError::InvalidLevel(k, "1 <= k <= 5"));
    }
    let g = generator_matrix(k)?;
    let n = g.n();
    let masks: Vec<u64> = g
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(0u64, |acc, (j, &b)| acc | (u64::from(b) << j))
        })
        .collect();
    let d: Vec<u32> = (0..n)
        .map(|i| coset_min_weight(masks[i], &masks[i + 1..], n))
        .collect();
    let ln_n = (n as f64).ln();
    let beta_hat = d.iter().map(|&di| (di as f64).ln() / ln_n).sum::<f64>() / n as f64;
    Ok(PartialDistanceReport { d, beta_hat })
}

/// Minimum weight of `target + span(basis)` over vectors of length `n`.
///
/// Works by reducing against an echelon basis and enumerating candidate
/// error patterns by increasing weight.
fn coset_min_weight(target: u64, basis: &[u64], n: usize) -> u32 {
    let mut echelon: Vec<(u32, u64)> = Vec::new();
    for &v in basis {
        let r = reduce(v, &echelon);
        if r != 0 {
            let pivot = 63 - r.leading_zeros();
            // keep the basis fully reduced so `reduce` is a canonical form
            for (p, b) in echelon.iter_mut() {
                if *b >> pivot & 1 == 1 {
                    *b ^= r;
                }
                debug_assert!(*b >> *p & 1 == 1);
            }
            echelon.push((pivot, r));
        }
    }
    let syndrome = reduce(target, &echelon);
    for w in 0..=n as u32 {
        if has_pattern_with_syndrome(n, w, syndrome, &echelon) {
            return w;
        }
    }
    unreachable!("target itself has weight <= n")
}

fn reduce(mut v: u64, echelon: &[(u32, u64)]) -> u64 {
    for &(p, b) in echelon {
        if v >> p & 1 == 1 {
            v ^= b;
        }
    }
    v
}

fn has_pattern_with_syndrome(n: usize, w: u32, syndrome: u64, echelon: &[(u32, u64)]) -> bool {
    if w == 0 {
        return syndrome == 0;
    }
    if w as usize > n {
        return false;
    }
    // Gosper's hack over n-bit words of popcount w
    let limit = 1u64 << n;
    let mut v: u64 = (1u64 << w) - 1;
    while v < limit {
        if reduce(v, echelon) == syndrome {
            return true;
        }
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    false
}
