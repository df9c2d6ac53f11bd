use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bdmc::Bdmc;
use super::decoder::ScDecoder;
use super::generator::encode_rec;
use super::PolarError;
use crate::index_set::IndexSet;
use crate::rng::trial_rng;

/// Draws a channel output for one input bit and reports its likelihood
/// ratio `W(y|0)/W(y|1)`.
pub trait ChannelSampler: Sync {
    fn transmit(&self, bit: u8, rng: &mut ChaCha8Rng) -> f64;
}

#[derive(Clone, Copy, Debug)]
pub struct BecSampler {
    pub epsilon: f64,
}

impl ChannelSampler for BecSampler {
    fn transmit(&self, bit: u8, rng: &mut ChaCha8Rng) -> f64 {
        if rng.random::<f64>() < self.epsilon {
            1.0
        } else if bit == 0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BscSampler {
    pub p: f64,
}

impl ChannelSampler for BscSampler {
    fn transmit(&self, bit: u8, rng: &mut ChaCha8Rng) -> f64 {
        let flipped = rng.random::<f64>() < self.p;
        let y = bit ^ u8::from(flipped);
        let r = (1.0 - self.p) / self.p;
        if y == 0 {
            r
        } else {
            1.0 / r
        }
    }
}

#[derive(Clone, Debug)]
pub struct TableSampler {
    pub channel: Bdmc,
}

impl ChannelSampler for TableSampler {
    fn transmit(&self, bit: u8, rng: &mut ChaCha8Rng) -> f64 {
        let row = self.channel.row(bit);
        let mut target = rng.random::<f64>();
        let mut y = row.len() - 1;
        for (j, &p) in row.iter().enumerate() {
            if target < p {
                y = j;
                break;
            }
            target -= p;
        }
        self.channel.likelihood_ratio(y)
    }
}

/// Information positions and frozen bits of a code of length `2^k`.
#[derive(Clone, Debug)]
pub struct CodeConfig {
    pub k: u32,
    pub info: IndexSet,
    /// Frozen bits in ascending order of the non-information positions.
    pub frozen_values: Vec<u8>,
}

impl CodeConfig {
    /// All frozen bits zero.
    pub fn with_zero_frozen(k: u32, info: IndexSet) -> Self {
        let frozen_values = vec![0; info.universe() - info.len()];
        Self {
            k,
            info,
            frozen_values,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockErrorEstimate {
    pub trials: u64,
    pub errors: u64,
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub std_error: f64,
}

/// Average block error over uniformly random messages. Trial `t` draws
/// from the stream keyed by `(seed, t)`, so the estimate does not depend
/// on the thread count.
pub fn monte_carlo_block_error<S: ChannelSampler>(
    code: &CodeConfig,
    sampler: &S,
    trials: u64,
    seed: u64,
) -> Result<BlockErrorEstimate, PolarError> {
    if trials == 0 {
        return Err(PolarError::NoTrials);
    }
    let decoder = ScDecoder::new(code.k, &code.info, &code.frozen_values)?;
    let n = decoder.n();
    let mut template = vec![0u8; n];
    let mut frozen = code.frozen_values.iter();
    for (i, slot) in template.iter_mut().enumerate() {
        if !code.info.contains(i) {
            *slot = *frozen.next().expect("checked by decoder") & 1;
        }
    }
    let info: Vec<usize> = code.info.iter().collect();
    let errors: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mut m = template.clone();
            for &i in &info {
                m[i] = rng.random_range(0..2);
            }
            let x = encode_rec(&m);
            let l: Vec<f64> = x.iter().map(|&b| sampler.transmit(b, &mut rng)).collect();
            let decoded = decoder
                .decode(&l)
                .expect("sampler produced invalid likelihood");
            u64::from(info.iter().any(|&i| decoded[i] != m[i]))
        })
        .sum();
    let rate = errors as f64 / trials as f64;
    Ok(BlockErrorEstimate {
        trials,
        errors,
        rate,
        std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::{polarize_bec, select_sets};

    fn bec_code(k: u32, eps: f64) -> (CodeConfig, f64) {
        let pr = polarize_bec(eps, k).unwrap();
        let sets = select_sets(&pr, 0.2).unwrap();
        let sum_z: f64 = sets.good.iter().map(|i| pr.z[i]).sum();
        (CodeConfig::with_zero_frozen(k, sets.good), sum_z)
    }

    #[test]
    fn noiseless_has_no_errors() {
        let code = CodeConfig::with_zero_frozen(6, IndexSet::full(64));
        let est = monte_carlo_block_error(&code, &BecSampler { epsilon: 0.0 }, 200, 1).unwrap();
        assert_eq!(est.errors, 0);
    }

    #[test]
    fn single_message_never_errs() {
        let code = CodeConfig::with_zero_frozen(5, IndexSet::empty(32));
        let est = monte_carlo_block_error(&code, &BscSampler { p: 0.4 }, 200, 1).unwrap();
        assert_eq!(est.rate, 0.0);
    }

    #[test]
    fn same_seed_same_estimate() {
        let (code, _) = bec_code(7, 0.4);
        let s = BecSampler { epsilon: 0.4 };
        let a = monte_carlo_block_error(&code, &s, 500, 99).unwrap();
        let b = monte_carlo_block_error(&code, &s, 500, 99).unwrap();
        assert_eq!(a, b);
        assert!(monte_carlo_block_error(&code, &s, 0, 99).is_err());
    }

    #[test]
    fn bec_rate_within_union_bound() {
        let (code, sum_z) = bec_code(8, 0.3);
        let est = monte_carlo_block_error(&code, &BecSampler { epsilon: 0.3 }, 2000, 7).unwrap();
        let sigma = (sum_z * (1.0 - sum_z) / 2000.0).sqrt();
        assert!(
            est.rate <= sum_z + 3.0 * sigma + 1e-12,
            "{} vs {}",
            est.rate,
            sum_z
        );
    }

    #[test]
    fn table_sampler_matches_bsc() {
        let w = Bdmc::bsc(0.05).unwrap();
        let mut rng = trial_rng(1, 0);
        let t = TableSampler { channel: w };
        let mut flips = 0;
        for _ in 0..20000 {
            if t.transmit(0, &mut rng) < 1.0 {
                flips += 1;
            }
        }
        let rate = flips as f64 / 20000.0;
        assert!((rate - 0.05).abs() < 0.01);
    }
}
