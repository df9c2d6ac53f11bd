use super::construct::GoodBadSets;
use super::PolarError;
use crate::index_set::IndexSet;

/// Log-likelihood magnitude treated as certainty.
pub const LLR_SATURATION: f64 = 700.0;

fn saturate(x: f64) -> f64 {
    x.clamp(-LLR_SATURATION, LLR_SATURATION)
}

fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Log of `(1 + L1 L2) / (L1 + L2)`.
fn bad_llr(a: f64, b: f64) -> f64 {
    saturate(logaddexp(0.0, a + b) - logaddexp(a, b))
}

/// Log of `L1 L2` when the upper bit is 0 and `L2 / L1` when it is 1.
fn good_llr(a: f64, b: f64, upper: u8) -> f64 {
    saturate(if upper == 0 { b + a } else { b - a })
}

/// Per-node trace of one decoding pass.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderState {
    /// Channel log-likelihood ratios fed to the decoder.
    pub channel_llr: Vec<f64>,
    /// Log-likelihood ratio of each synthesized channel at decision time.
    pub decision_llr: Vec<f64>,
    /// Forced value per position, `None` for information positions.
    pub frozen: Vec<Option<u8>>,
}

/// Successive-cancellation decoder for a fixed frozen pattern.
#[derive(Clone, Debug)]
pub struct ScDecoder {
    k: u32,
    frozen: Vec<Option<u8>>,
}

impl ScDecoder {
    /// `frozen_values` lists the forced bits of the non-information
    /// positions in ascending index order.
    pub fn new(k: u32, info: &IndexSet, frozen_values: &[u8]) -> Result<Self, PolarError> {
        if k == 0 || k > 30 {
            return Err(PolarError::InvalidLevel(k, "1 <= k <= 30"));
        }
        let n = 1usize << k;
        if info.universe() != n {
            return Err(PolarError::LengthMismatch {
                expected: n,
                got: info.universe(),
            });
        }
        let needed = n - info.len();
        if frozen_values.len() != needed {
            return Err(PolarError::MissingFrozenValues {
                needed,
                given: frozen_values.len(),
            });
        }
        let mut values = frozen_values.iter();
        let frozen = (0..n)
            .map(|i| {
                if info.contains(i) {
                    None
                } else {
                    values.next().map(|&b| b & 1)
                }
            })
            .collect();
        Ok(Self { k, frozen })
    }

    pub fn n(&self) -> usize {
        self.frozen.len()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Decodes from per-position likelihood ratios `W(y|0)/W(y|1)`.
    /// Erasures are `1.0`; `0` and `+inf` are accepted as certain.
    pub fn decode(&self, likelihoods: &[f64]) -> Result<Vec<u8>, PolarError> {
        self.decode_with_state(likelihoods).map(|(u, _)| u)
    }

    pub fn decode_with_state(
        &self,
        likelihoods: &[f64],
    ) -> Result<(Vec<u8>, DecoderState), PolarError> {
        let n = self.n();
        if likelihoods.len() != n {
            return Err(PolarError::LengthMismatch {
                expected: n,
                got: likelihoods.len(),
            });
        }
        let mut llr = Vec::with_capacity(n);
        for (index, &l) in likelihoods.iter().enumerate() {
            if l.is_nan() || l < 0.0 {
                return Err(PolarError::InvalidLikelihood { index, value: l });
            }
            llr.push(saturate(l.ln()));
        }
        let mut u = vec![0u8; n];
        let mut decision = vec![0.0; n];
        self.decode_llr(&llr, &mut u, &mut decision);
        let state = DecoderState {
            channel_llr: llr,
            decision_llr: decision,
            frozen: self.frozen.clone(),
        };
        Ok((u, state))
    }

    /// Decodes from log-likelihood ratios, writing the estimate into `u`.
    /// Returns the re-encoded codeword estimate.
    pub(crate) fn decode_llr(&self, llr: &[f64], u: &mut [u8], decision: &mut [f64]) -> Vec<u8> {
        self.node(llr, 0, u, decision)
    }

    fn node(&self, llr: &[f64], offset: usize, u: &mut [u8], decision: &mut [f64]) -> Vec<u8> {
        let len = llr.len();
        if len == 1 {
            let bit = match self.frozen[offset] {
                Some(b) => b,
                None => u8::from(llr[0] < 0.0),
            };
            u[offset] = bit;
            decision[offset] = llr[0];
            return vec![bit];
        }
        let half = len / 2;
        let upper_llr: Vec<f64> = (0..half)
            .map(|t| bad_llr(llr[2 * t], llr[2 * t + 1]))
            .collect();
        let a = self.node(&upper_llr, offset, u, decision);
        let lower_llr: Vec<f64> = (0..half)
            .map(|t| good_llr(llr[2 * t], llr[2 * t + 1], a[t]))
            .collect();
        let b = self.node(&lower_llr, offset + half, u, decision);
        let mut x = vec![0u8; len];
        for t in 0..half {
            x[2 * t] = a[t] ^ b[t];
            x[2 * t + 1] = b[t];
        }
        x
    }
}

/// One-shot decode with `sets.good` as the information positions.
pub fn sc_decode(
    likelihoods: &[f64],
    sets: &GoodBadSets,
    frozen_values: &[u8],
) -> Result<Vec<u8>, PolarError> {
    let k = sets.n.trailing_zeros();
    if !sets.n.is_power_of_two() || k == 0 {
        return Err(PolarError::LengthMismatch {
            expected: sets.n.next_power_of_two().max(2),
            got: sets.n,
        });
    }
    ScDecoder::new(k, &sets.good, frozen_values)?.decode(likelihoods)
}
