use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DatasetIndex, ModelSelError};

/// Row indices (into the source [`DatasetIndex`]) of one fold, each sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Painting-level train/test split. The test side gets
/// `ceil(n × test_fraction)` paintings (clamped so both sides are non-empty),
/// which turns 24 paintings at 0.2 into 19 train / 5 test.
pub fn split_train_test(
    index: &DatasetIndex,
    test_fraction: f64,
    seed: u64,
) -> Result<(DatasetIndex, DatasetIndex), ModelSelError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(ModelSelError::Fraction(test_fraction));
    }
    let n = index.len();
    if n < 2 {
        return Err(ModelSelError::TooFewPaintings { needed: 2, got: n });
    }
    // guard against 20 × 0.2 = 4.000000000000001 style products
    let n_test = ((n as f64 * test_fraction) - 1e-9).ceil() as usize;
    let n_test = n_test.clamp(1, n - 1);
    let order = shuffled_indices(n, seed);
    let mut test: Vec<usize> = order[..n_test].to_vec();
    let mut train: Vec<usize> = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((index.subset(&train), index.subset(&test)))
}

/// Grouped k-fold: seeded shuffle of paintings, then contiguous chunks whose
/// sizes differ by at most one (the first `n mod k` folds are larger).
pub fn grouped_kfold(index: &DatasetIndex, k: usize, seed: u64) -> Result<Vec<Fold>, ModelSelError> {
    let n = index.len();
    if k < 2 || k > n {
        return Err(ModelSelError::FoldCount { k, paintings: n });
    }
    let order = shuffled_indices(n, seed);
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut validation = order[start..start + size].to_vec();
        let mut train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + size..])
            .copied()
            .collect();
        validation.sort_unstable();
        train.sort_unstable();
        folds.push(Fold { train, validation });
        start += size;
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelsel::{Label, Sample};
    use std::collections::HashSet;

    fn index(n: usize) -> DatasetIndex {
        DatasetIndex::new(
            (0..n)
                .map(|i| Sample {
                    id: format!("p{i:02}"),
                    values: vec![i as f64],
                    label: Label::Positive,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn nineteen_five_split() {
        let (train, test) = split_train_test(&index(24), 0.2, 3).unwrap();
        assert_eq!((train.len(), test.len()), (19, 5));
        let a: HashSet<_> = train.ids().into_iter().collect();
        assert!(test.ids().iter().all(|id| !a.contains(id)));
        let (train2, test2) = split_train_test(&index(24), 0.2, 3).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
        let (_, other) = split_train_test(&index(24), 0.2, 4).unwrap();
        assert_ne!(test, other);
    }

    #[test]
    fn exact_products_do_not_round_up() {
        let (_, test) = split_train_test(&index(20), 0.2, 0).unwrap();
        assert_eq!(test.len(), 4);
        let (_, test) = split_train_test(&index(10), 0.3, 0).unwrap();
        assert_eq!(test.len(), 3);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            split_train_test(&index(1), 0.2, 0),
            Err(ModelSelError::TooFewPaintings { .. })
        ));
        assert!(matches!(
            split_train_test(&index(5), 1.0, 0),
            Err(ModelSelError::Fraction(_))
        ));
        // tiny fractions still leave one painting for testing
        let (train, test) = split_train_test(&index(2), 0.01, 0).unwrap();
        assert_eq!((train.len(), test.len()), (1, 1));
    }

    #[test]
    fn nineteen_into_ten_folds() {
        let folds = grouped_kfold(&index(19), 10, 11).unwrap();
        let mut sizes: Vec<_> = folds.iter().map(|f| f.validation.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, [1, 2, 2, 2, 2, 2, 2, 2, 2, 2]);
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.validation.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..19).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.train.len() + f.validation.len(), 19);
            assert!(f.train.iter().all(|t| !f.validation.contains(t)));
        }
        assert_eq!(folds, grouped_kfold(&index(19), 10, 11).unwrap());
    }

    #[test]
    fn leave_one_out() {
        let folds = grouped_kfold(&index(6), 6, 0).unwrap();
        assert!(folds.iter().all(|f| f.validation.len() == 1));
    }

    #[test]
    fn too_many_folds() {
        assert!(matches!(
            grouped_kfold(&index(3), 4, 0),
            Err(ModelSelError::FoldCount { k: 4, paintings: 3 })
        ));
        assert!(grouped_kfold(&index(1), 1, 0).is_err());
    }
}
