//! Multinomial sampling of outcome counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};

/// Generator used for every simulated trial.
pub type TrialRng = ChaCha8Rng;

const NORMALIZATION_TOL: f64 = 1e-9;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed for trial `index` of a run seeded with `master`.
pub fn sub_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn trial_rng(master: u64, index: u64) -> TrialRng {
    TrialRng::seed_from_u64(sub_seed(master, index))
}

/// Draws `n` outcomes from `probs` with a fresh generator seeded by `seed`.
pub fn sample_counts(probs: &[f64], n: u64, seed: u64) -> Result<Vec<u64>> {
    sample_counts_with_rng(probs, n, &mut TrialRng::seed_from_u64(seed))
}

/// Multinomial draw by sequential conditional binomials.
///
/// `probs` must sum to one within `1e-9`; the returned counts sum to `n`.
pub fn sample_counts_with_rng<R: Rng + ?Sized>(probs: &[f64], n: u64, rng: &mut R) -> Result<Vec<u64>> {
    if probs.is_empty() {
        return Err(invalid("cannot sample from an empty distribution"));
    }
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid("probabilities must be finite and non-negative"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Unnormalized(sum));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass = sum;
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == last {
            counts[i] = remaining;
            break;
        }
        let share = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if share == 0.0 {
            0
        } else if share == 1.0 {
            remaining
        } else {
            Binomial::new(remaining, share)
                .map_err(|e| Error::Numerical(e.to_string()))?
                .sample(rng)
        };
        counts[i] = draw;
        remaining -= draw;
        mass -= p;
    }
    Ok(counts)
}
