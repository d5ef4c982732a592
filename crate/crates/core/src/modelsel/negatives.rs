use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelSelError;

/// Out-of-range margin for uniformly sampled negatives, in scaled units.
pub const UNIFORM_MARGIN: f64 = 1.0;

/// Pseudo-anomalies for validation-time F1.
///
/// The first `count − count/2` rows are feature shuffles: each dimension
/// draws from an independent permutation of the training values, which keeps
/// every marginal but breaks the joint structure. The remaining `count/2`
/// rows are uniform over `[min − 1, max + 1]` per dimension.
pub fn synthesize_negatives(
    train: &[Vec<f64>],
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, ModelSelError> {
    if count == 0 {
        return Err(ModelSelError::ZeroNegatives);
    }
    if train.is_empty() {
        return Err(ModelSelError::EmptyTraining);
    }
    let n = train.len();
    let dim = train[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_shuffled = count - count / 2;
    let mut out = Vec::with_capacity(count);

    let mut perms: Vec<Vec<usize>> = Vec::new();
    for k in 0..n_shuffled {
        if k % n == 0 {
            perms = (0..dim)
                .map(|_| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.shuffle(&mut rng);
                    p
                })
                .collect();
        }
        out.push((0..dim).map(|d| train[perms[d][k % n]][d]).collect());
    }

    let bounds: Vec<(f64, f64)> = (0..dim)
        .map(|d| {
            let (lo, hi) = train.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r[d]), hi.max(r[d]))
            });
            (lo - UNIFORM_MARGIN, hi + UNIFORM_MARGIN)
        })
        .collect();
    for _ in n_shuffled..count {
        out.push(
            bounds
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..hi))
                .collect(),
        );
    }
    Ok(out)
}
