//! Shipped example classifiers.

use crate::learning::{self, Dataset, Hyperparams, LearnConfig};
use crate::model::{Classifier, ClassifierBuilder};

pub const PLAY_OUTSIDE_CSV: &str = include_str!("../fixtures/play_outside.csv");
pub const PLAY_OUTSIDE_CONFIG: &str = include_str!("../fixtures/play_outside.toml");
/// Expected relation sets for every play-outside input, one letter per variable.
pub const PLAY_OUTSIDE_EXPLANATIONS_CSV: &str =
    include_str!("../fixtures/play_outside_explanations.csv");

pub fn play_outside_data() -> Dataset {
    Dataset::from_csv_str(PLAY_OUTSIDE_CSV).expect("valid fixture")
}

pub fn play_outside_config() -> LearnConfig {
    LearnConfig::from_toml(PLAY_OUTSIDE_CONFIG).expect("valid fixture")
}

/// Chain classifier with observations w, t, p and classifications r, o.
pub fn play_outside() -> Classifier {
    learning::fit(&play_outside_data(), &play_outside_config()).expect("valid fixture")
}

/// Naive Bayes classifier for o over w, t, p, fitted on the same rows.
pub fn play_outside_nbc() -> Classifier {
    let cfg = play_outside_config();
    let (data, _) = learning::prepare(&play_outside_data(), &cfg).expect("valid fixture");
    let data = data.project(&["w", "t", "p", "o"]).expect("valid fixture");
    learning::fit_nbc(&data, "o", &Hyperparams::with_alpha(cfg.alpha)).expect("valid fixture")
}

/// Binary class `y` over a ternary observation `x` and a binary observation `z`.
///
/// At the input `x=a, z=z0`, changing `x` to the frequent value `b` lowers the
/// posterior of the decided class while the rare value `c` raises it: the
/// prior-weighted mean and perturbation-based attributions both report `x` as a
/// supporter although one change increases the decided class's posterior.
pub fn non_monotone() -> Classifier {
    ClassifierBuilder::new()
        .classification("y", &["yes", "no"])
        .and_then(|b| b.observation("x", &["a", "b", "c"]))
        .and_then(|b| b.observation("z", &["z0", "z1"]))
        .expect("valid fixture")
        .prior("y", &[0.5, 0.5])
        .prior("x", &[0.2, 0.6, 0.2])
        .prior("z", &[0.5, 0.5])
        .conditional("y", "x", &[&[0.4, 0.2, 0.4], &[0.3, 0.6, 0.1]])
        .conditional("y", "z", &[&[0.6, 0.4], &[0.4, 0.6]])
        .build()
        .expect("valid fixture")
}

/// The input at which [`non_monotone`] misleads stochastic and attribution kits.
pub const NON_MONOTONE_INPUT: &str = "x=a,z=z0";
