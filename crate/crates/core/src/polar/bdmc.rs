use rand::Rng;

use super::PolarError;

/// Tolerance on row sums of a transition table.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Binary-input discrete memoryless channel, stored as the two rows
/// `W(.|0)` and `W(.|1)` over a shared output alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Bdmc {
    w0: Vec<f64>,
    w1: Vec<f64>,
}

impl Bdmc {
    pub fn new(w0: Vec<f64>, w1: Vec<f64>) -> Result<Self, PolarError> {
        if w0.len() != w1.len() || w0.is_empty() {
            return Err(PolarError::InvalidChannel(format!(
                "rows have lengths {} and {}",
                w0.len(),
                w1.len()
            )));
        }
        for (x, row) in [&w0, &w1].into_iter().enumerate() {
            if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(PolarError::InvalidChannel(format!(
                    "row {x} has a negative or non-finite entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(PolarError::InvalidChannel(format!("row {x} sums to {s}")));
            }
        }
        Ok(Self { w0, w1 })
    }

    /// Binary erasure channel with outputs `(0, 1, e)`.
    pub fn bec(eps: f64) -> Result<Self, PolarError> {
        check_prob("epsilon", eps)?;
        Self::new(vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps])
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self, PolarError> {
        check_prob("p", p)?;
        Self::new(vec![1.0 - p, p], vec![p, 1.0 - p])
    }

    pub fn noiseless() -> Self {
        Self {
            w0: vec![1.0, 0.0],
            w1: vec![0.0, 1.0],
        }
    }

    /// Random channel with `outputs` symbols and strictly positive entries.
    pub fn random<R: Rng + ?Sized>(outputs: usize, rng: &mut R) -> Self {
        let mut row = || {
            let raw: Vec<f64> = (0..outputs).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / s).collect::<Vec<_>>()
        };
        let w0 = row();
        let w1 = row();
        let mut ch = Self { w0, w1 };
        ch.renormalize();
        ch
    }

    pub fn output_size(&self) -> usize {
        self.w0.len()
    }

    pub fn row(&self, x: u8) -> &[f64] {
        if x == 0 {
            &self.w0
        } else {
            &self.w1
        }
    }

    pub fn prob(&self, y: usize, x: u8) -> f64 {
        self.row(x)[y]
    }

    /// `W(y|0) / W(y|1)`, possibly infinite.
    pub fn likelihood_ratio(&self, y: usize) -> f64 {
        let (a, b) = (self.w0[y], self.w1[y]);
        if b == 0.0 {
            if a == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            a / b
        }
    }

    /// Erasure probability if the channel has erasure structure: every
    /// output symbol is either ambiguous (`W(y|0) = W(y|1)`) or reveals
    /// the input outright.
    pub fn erasure_probability(&self) -> Option<f64> {
        let mut eps = 0.0;
        for (&a, &b) in self.w0.iter().zip(&self.w1) {
            if a == b {
                eps += a;
            } else if a != 0.0 && b != 0.0 {
                return None;
            }
        }
        // both inputs must be erased with the same total probability
        let reveal0: f64 = self
            .w0
            .iter()
            .zip(&self.w1)
            .filter(|(a, b)| a != b)
            .map(|(a, _)| a)
            .sum();
        let reveal1: f64 = self
            .w0
            .iter()
            .zip(&self.w1)
            .filter(|(a, b)| a != b)
            .map(|(_, b)| b)
            .sum();
        if (reveal0 - reveal1).abs() > ROW_SUM_TOL {
            return None;
        }
        Some(eps.clamp(0.0, 1.0))
    }

    fn renormalize(&mut self) {
        for row in [&mut self.w0, &mut self.w1] {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                for p in row.iter_mut() {
                    *p /= s;
                }
            }
        }
    }
}

fn check_prob(name: &'static str, v: f64) -> Result<(), PolarError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(PolarError::InvalidParameter { name, value: v })
    }
}

/// `W-(y1, y2 | u1) = 1/2 sum_{u2} W(y1 | u1 ^ u2) W(y2 | u2)`.
///
/// Output `(y1, y2)` is stored at index `y1 * m + y2`.
pub fn combine_bad(w: &Bdmc) -> Bdmc {
    let m = w.output_size();
    let mut out = [vec![0.0; m * m], vec![0.0; m * m]];
    for u1 in 0..2u8 {
        for y1 in 0..m {
            for y2 in 0..m {
                out[u1 as usize][y1 * m + y2] = 0.5
                    * (0..2u8)
                        .map(|u2| w.prob(y1, u1 ^ u2) * w.prob(y2, u2))
                        .sum::<f64>();
            }
        }
    }
    let [w0, w1] = out;
    let mut ch = Bdmc { w0, w1 };
    ch.renormalize();
    ch
}

/// `W+(u1, y1, y2 | u2) = 1/2 W(y1 | u1 ^ u2) W(y2 | u2)`.
///
/// Output `(u1, y1, y2)` is stored at index `u1 * m^2 + y1 * m + y2`.
pub fn combine_good(w: &Bdmc) -> Bdmc {
    let m = w.output_size();
    let mut out = [vec![0.0; 2 * m * m], vec![0.0; 2 * m * m]];
    for u2 in 0..2u8 {
        for u1 in 0..2u8 {
            for y1 in 0..m {
                for y2 in 0..m {
                    out[u2 as usize][u1 as usize * m * m + y1 * m + y2] =
                        0.5 * w.prob(y1, u1 ^ u2) * w.prob(y2, u2);
                }
            }
        }
    }
    let [w0, w1] = out;
    let mut ch = Bdmc { w0, w1 };
    ch.renormalize();
    ch
}

/// `Z(W) = sum_y sqrt(W(y|0) W(y|1))`.
pub fn bhattacharyya(w: &Bdmc) -> f64 {
    w.w0.iter()
        .zip(&w.w1)
        .map(|(a, b)| (a * b).sqrt())
        .sum::<f64>()
        .min(1.0)
}

/// Mutual information in bits at the uniform input.
pub fn symmetric_capacity(w: &Bdmc) -> f64 {
    let mut i = 0.0;
    for (&a, &b) in w.w0.iter().zip(&w.w1) {
        let q = 0.5 * (a + b);
        for p in [a, b] {
            if p > 0.0 {
                i += 0.5 * p * (p / q).log2();
            }
        }
    }
    i
}

/// Posterior of input 0 given the symbol; a sufficient statistic.
fn posterior0(a: f64, b: f64) -> f64 {
    a / (a + b)
}

/// Relative gap below which two posteriors count as the same ratio.
const RATIO_EQ_TOL: f64 = 1e-13;

/// Lossless reduction: drops zero-mass symbols and merges symbols with the
/// same likelihood ratio. Bhattacharyya parameter and capacity are unchanged.
pub fn merge_equal_ratios(w: &Bdmc) -> Bdmc {
    let mut syms: Vec<(f64, f64, f64)> =
        w.w0.iter()
            .zip(&w.w1)
            .filter(|(a, b)| **a + **b > 0.0)
            .map(|(&a, &b)| (posterior0(a, b), a, b))
            .collect();
    syms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut w0 = Vec::new();
    let mut w1 = Vec::new();
    let mut last_key = f64::NAN;
    for (key, a, b) in syms {
        if !w0.is_empty() && (key - last_key).abs() <= RATIO_EQ_TOL {
            *w0.last_mut().unwrap() += a;
            *w1.last_mut().unwrap() += b;
        } else {
            w0.push(a);
            w1.push(b);
            last_key = key;
        }
    }
    Bdmc { w0, w1 }
}

/// Lossy reduction into at most `bins` symbols by bucketing the posterior.
/// Merging symbols degrades the channel, so Bhattacharyya values can only
/// grow.
pub fn quantize(w: &Bdmc, bins: usize) -> Bdmc {
    let bins = bins.max(2);
    let mut w0 = vec![0.0; bins];
    let mut w1 = vec![0.0; bins];
    for (&a, &b) in w.w0.iter().zip(&w.w1) {
        if a + b == 0.0 {
            continue;
        }
        let slot = ((posterior0(a, b) * bins as f64) as usize).min(bins - 1);
        w0[slot] += a;
        w1[slot] += b;
    }
    merge_equal_ratios(&Bdmc { w0, w1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(Bdmc::new(vec![0.5, 0.5], vec![1.0]).is_err());
        assert!(Bdmc::new(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(Bdmc::new(vec![1.5, -0.5], vec![0.5, 0.5]).is_err());
        assert!(Bdmc::bec(1.2).is_err());
    }

    #[test]
    fn bhattacharyya_limits() {
        assert_eq!(bhattacharyya(&Bdmc::noiseless()), 0.0);
        let useless = Bdmc::new(vec![0.3, 0.7], vec![0.3, 0.7]).unwrap();
        assert_abs_diff_eq!(bhattacharyya(&useless), 1.0, epsilon = 1e-15);
        for eps in [0.0, 0.1, 0.5, 0.93] {
            // sqrt(0) + sqrt(0) + sqrt(eps * eps)
            assert_abs_diff_eq!(
                bhattacharyya(&Bdmc::bec(eps).unwrap()),
                eps,
                epsilon = 1e-15
            );
        }
    }

    /// `Z` of the combined channels, enumerated straight from the
    /// combining rule without the table layout used above.
    fn enumerated_z(w: &Bdmc) -> (f64, f64) {
        let m = w.output_size();
        let mut z_bad = 0.0;
        let mut z_good = 0.0;
        for y1 in 0..m {
            for y2 in 0..m {
                let bad = |u1: u8| {
                    0.5 * (w.prob(y1, u1) * w.prob(y2, 0) + w.prob(y1, u1 ^ 1) * w.prob(y2, 1))
                };
                z_bad += (bad(0) * bad(1)).sqrt();
                for u1 in 0..2u8 {
                    let good = |u2: u8| 0.5 * w.prob(y1, u1 ^ u2) * w.prob(y2, u2);
                    z_good += (good(0) * good(1)).sqrt();
                }
            }
        }
        (z_bad, z_good)
    }

    #[test]
    fn bec_combining() {
        for eps in [0.1, 0.3, 0.5, 0.8] {
            let w = Bdmc::bec(eps).unwrap();
            let (zb, zg) = enumerated_z(&w);
            assert_abs_diff_eq!(zb, 2.0 * eps - eps * eps, epsilon = 1e-14);
            assert_abs_diff_eq!(zg, eps * eps, epsilon = 1e-14);
            assert_abs_diff_eq!(bhattacharyya(&combine_bad(&w)), zb, epsilon = 1e-14);
            assert_abs_diff_eq!(bhattacharyya(&combine_good(&w)), zg, epsilon = 1e-14);
        }
    }

    #[test]
    fn noiseless_stays_noiseless() {
        let w = Bdmc::noiseless();
        assert_eq!(bhattacharyya(&combine_bad(&w)), 0.0);
        assert_eq!(bhattacharyya(&combine_good(&w)), 0.0);
    }

    #[test]
    fn combined_rows_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = Bdmc::random(5, &mut rng);
        for ch in [combine_bad(&w), combine_good(&w)] {
            for x in 0..2 {
                assert_abs_diff_eq!(ch.row(x).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn capacity_conservation_and_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let m = rng.random_range(2..=8);
            let w = Bdmc::random(m, &mut rng);
            let (i, ib, ig) = (
                symmetric_capacity(&w),
                symmetric_capacity(&combine_bad(&w)),
                symmetric_capacity(&combine_good(&w)),
            );
            assert_abs_diff_eq!(ib + ig, 2.0 * i, epsilon = 1e-10);
            assert!(ib <= i + 1e-12 && i <= ig + 1e-12);
            let (zb, zg) = enumerated_z(&w);
            let z = bhattacharyya(&w);
            assert!(zb >= z - 1e-12 && z >= zg - 1e-12);
        }
    }

    #[test]
    fn merging_is_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = Bdmc::bsc(0.11).unwrap();
        let big = combine_good(&combine_bad(&w));
        let merged = merge_equal_ratios(&big);
        assert!(merged.output_size() < big.output_size());
        assert_abs_diff_eq!(bhattacharyya(&merged), bhattacharyya(&big), epsilon = 1e-13);
        assert_abs_diff_eq!(
            symmetric_capacity(&merged),
            symmetric_capacity(&big),
            epsilon = 1e-13
        );
        let r = Bdmc::random(6, &mut rng);
        let q = quantize(&combine_bad(&r), 4);
        assert!(q.output_size() <= 4);
        assert!(bhattacharyya(&q) >= bhattacharyya(&combine_bad(&r)) - 1e-12);
    }

    #[test]
    fn erasure_detection() {
        assert_eq!(Bdmc::bec(0.25).unwrap().erasure_probability(), Some(0.25));
        assert_eq!(Bdmc::noiseless().erasure_probability(), Some(0.0));
        assert_eq!(Bdmc::bsc(0.1).unwrap().erasure_probability(), None);
        let merged = merge_equal_ratios(&combine_bad(&Bdmc::bec(0.5).unwrap()));
        assert_eq!(merged.output_size(), 3);
        assert_abs_diff_eq!(merged.erasure_probability().unwrap(), 0.75, epsilon = 1e-15);
    }
}
