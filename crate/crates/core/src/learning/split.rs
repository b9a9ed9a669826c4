use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub warnings: Vec<String>,
}

/// Seeded train/test split, stratified on `class_col`.
///
/// Per-stratum train quotas use largest-remainder allocation of `round(ratio * n)`.
/// Rows keep their original order inside each part.
pub fn split(d: &Dataset, class_col: &str, ratio: f64, seed: u64) -> Result<Split> {
    if d.len() < 4 {
        return Err(Error::InvalidDataset(format!(
            "need at least 4 rows to split, got {}",
            d.len()
        )));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split ratio {ratio} leaves an empty part"
        )));
    }
    let n = d.len();
    let n_train = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
    let j = d.column_index(class_col)?;
    let labels = d.domain(j);
    let mut strata: Vec<Vec<usize>> = labels
        .iter()
        .map(|l| d.column(j).enumerate().filter(|(_, v)| v == l).map(|(i, _)| i).collect())
        .collect();
    strata.retain(|s| !s.is_empty());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    let mut train = Vec::with_capacity(n_train);
    if let Some(small) = strata.iter().position(|s| s.len() < 2) {
        warnings.push(format!(
            "stratum `{}` has fewer than 2 rows; split is unstratified",
            d.rows()[strata[small][0]][j]
        ));
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        train.extend_from_slice(&all[..n_train]);
    } else {
        let quotas: Vec<f64> = strata
            .iter()
            .map(|s| s.len() as f64 * n_train as f64 / n as f64)
            .collect();
        let mut take: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut order: Vec<usize> = (0..strata.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let mut remaining = n_train - take.iter().sum::<usize>();
        for &s in order.iter().cycle() {
            if remaining == 0 {
                break;
            }
            if take[s] < strata[s].len() {
                take[s] += 1;
                remaining -= 1;
            }
        }
        for (s, k) in strata.iter_mut().zip(&take) {
            s.shuffle(&mut rng);
            train.extend_from_slice(&s[..*k]);
        }
    }
    train.sort_unstable();
    let test: Vec<usize> = (0..n).filter(|i| train.binary_search(i).is_err()).collect();
    if test.is_empty() {
        return Err(Error::InvalidConfig("split leaves an empty test set".into()));
    }
    Ok(Split {
        train: d.select(&train),
        test: d.select(&test),
        warnings,
    })
}
