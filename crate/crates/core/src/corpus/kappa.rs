use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KappaError {
    #[error("rating table is empty")]
    Empty,
    #[error("need at least 2 categories, got {0}")]
    TooFewCategories(usize),
    #[error("row {row} has {got} categories, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("row {row} sums to {got} raters, expected {expected}")]
    InconsistentRaters { row: usize, got: u64, expected: u64 },
    #[error("need at least 2 raters per item, got {0}")]
    TooFewRaters(u64),
}

/// Fleiss' kappa for a table of `items x categories` rater counts.
///
/// Every row must sum to the same rater count. Returns `Ok(None)` when chance
/// agreement is 1 (every rating falls in one category), where kappa is
/// undefined.
pub fn fleiss_kappa(table: &[Vec<u32>]) -> Result<Option<f64>, KappaError> {
    let first = table.first().ok_or(KappaError::Empty)?;
    let k = first.len();
    if k < 2 {
        return Err(KappaError::TooFewCategories(k));
    }
    let n: u64 = first.iter().map(|&c| c as u64).sum();
    if n < 2 {
        return Err(KappaError::TooFewRaters(n));
    }
    let mut column_totals = vec![0u64; k];
    let mut agreement_sum = 0.0f64;
    for (row, counts) in table.iter().enumerate() {
        if counts.len() != k {
            return Err(KappaError::RaggedRow {
                row,
                got: counts.len(),
                expected: k,
            });
        }
        let raters: u64 = counts.iter().map(|&c| c as u64).sum();
        if raters != n {
            return Err(KappaError::InconsistentRaters {
                row,
                got: raters,
                expected: n,
            });
        }
        let squares: u64 = counts.iter().map(|&c| (c as u64) * (c as u64)).sum();
        agreement_sum += (squares - n) as f64 / (n * (n - 1)) as f64;
        for (total, &c) in column_totals.iter_mut().zip(counts) {
            *total += c as u64;
        }
    }
    let items = table.len() as f64;
    let all = items * n as f64;
    let p_bar = agreement_sum / items;
    let p_e: f64 = column_totals
        .iter()
        .map(|&t| {
            let p = t as f64 / all;
            p * p
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(None);
    }
    Ok(Some((p_bar - p_e) / (1.0 - p_e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_agreement_balanced() {
        assert_eq!(fleiss_kappa(&[vec![2, 0], vec![0, 2]]).unwrap(), Some(1.0));
    }

    #[test]
    fn single_category_is_undefined() {
        assert_eq!(fleiss_kappa(&[vec![3, 0], vec![3, 0]]).unwrap(), None);
    }

    #[test]
    fn hand_computed_ten_by_three() {
        // Column proportions 2/5, 4/15, 1/3; mean item agreement 17/30;
        // chance agreement 77/225; kappa = 101/296.
        let table = vec![
            vec![3, 0, 0],
            vec![2, 1, 0],
            vec![0, 3, 0],
            vec![1, 1, 1],
            vec![0, 0, 3],
            vec![0, 2, 1],
            vec![3, 0, 0],
            vec![1, 0, 2],
            vec![0, 1, 2],
            vec![2, 0, 1],
        ];
        let k = fleiss_kappa(&table).unwrap().unwrap();
        assert!((k - 101.0 / 296.0).abs() < 1e-9, "{k}");
    }

    #[test]
    fn errors() {
        assert_eq!(fleiss_kappa(&[]), Err(KappaError::Empty));
        assert_eq!(fleiss_kappa(&[vec![2]]), Err(KappaError::TooFewCategories(1)));
        assert!(matches!(
            fleiss_kappa(&[vec![2, 0], vec![1, 2]]),
            Err(KappaError::InconsistentRaters { row: 1, .. })
        ));
        assert_eq!(fleiss_kappa(&[vec![1, 0]]), Err(KappaError::TooFewRaters(1)));
    }

    fn table_strategy() -> impl Strategy<Value = Vec<Vec<u32>>> {
        (2usize..5, 2u32..6).prop_flat_map(|(k, n)| {
            let row = prop::collection::vec(0u32..=n, k - 1).prop_map(move |mut v| {
                // turn arbitrary values into a composition of n
                let mut left = n;
                for x in v.iter_mut() {
                    *x = (*x).min(left);
                    left -= *x;
                }
                v.push(left);
                v
            });
            prop::collection::vec(row, 1..12)
        })
    }

    proptest! {
        #[test]
        fn invariant_under_row_and_column_permutation(table in table_strategy(), rot in 0usize..4) {
            let base = fleiss_kappa(&table).unwrap();
            let mut rows = table.clone();
            rows.reverse();
            let k = table[0].len();
            let cols: Vec<Vec<u32>> = rows.iter().map(|r| {
                let mut r = r.clone();
                r.rotate_left(rot % k);
                r
            }).collect();
            let permuted = fleiss_kappa(&cols).unwrap();
            match (base, permuted) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (None, None) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }
}
