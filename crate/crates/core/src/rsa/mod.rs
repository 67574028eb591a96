//! Repeated-sample RSA: score every hypothesis against the reference on the
//! same `m` samples of `n` sentences, then compare hypotheses pairwise with
//! the exact sign test.

mod report;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{scores_csv, DifferenceHistogram, HypothesisSummary, PairwiseComparison, RsaReport};

use crate::error::{Error, Result};
use crate::geometry::{compute_geometry_ranked, geometry_similarity, ConstantPolicy, RankedModel};
use crate::grammar::Corpus;
use crate::models::RepresentationalModel;
use crate::seed::stream_rng;
use crate::stats::{mean, sign_test_p_value};

/// Sample `j` draws from stream `SAMPLE_STREAM_BASE + j` of the master seed.
pub const SAMPLE_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsaConfig {
    /// Sentences per sample.
    pub n: usize,
    /// Number of samples.
    pub m: usize,
    pub seed: u64,
    #[serde(default)]
    pub policy: ConstantPolicy,
}

impl RsaConfig {
    pub fn validate(&self, corpus_size: usize) -> Result<()> {
        if self.n < 3 {
            return Err(Error::config(format!("sample size n = {} is below 3", self.n)));
        }
        if self.n > corpus_size {
            return Err(Error::config(format!(
                "sample size n = {} exceeds the {corpus_size} available sentences",
                self.n
            )));
        }
        if self.m == 0 {
            return Err(Error::config("sample count m must be at least 1"));
        }
        Ok(())
    }
}

/// `m` similarity scores for one hypothesis plus the samples they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub hypothesis: String,
    pub scores: Vec<f64>,
    pub samples: Vec<Vec<u32>>,
}

impl ScoreSeries {
    pub fn mean(&self) -> f64 {
        mean(&self.scores)
    }
}

/// The `m` samples for a run: each is `n` distinct ids in corpus order.
pub fn draw_samples(ids: &[u32], config: &RsaConfig) -> Result<Vec<Vec<u32>>> {
    config.validate(ids.len())?;
    Ok((0..config.m)
        .map(|j| {
            let mut rng = stream_rng(config.seed, SAMPLE_STREAM_BASE + j as u64);
            let mut picked = index::sample(&mut rng, ids.len(), config.n).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|p| ids[p]).collect()
        })
        .collect())
}

/// Fails unless every model indexes exactly the corpus sentences in corpus order.
pub fn check_corpus_alignment(corpus: &Corpus, models: &[&RepresentationalModel]) -> Result<()> {
    let ids: Vec<u32> = corpus.sentences().iter().map(|s| s.id).collect();
    for m in models {
        if m.ids() != ids.as_slice() {
            return Err(Error::Alignment(format!("model {} is not aligned to the corpus", m.name())));
        }
    }
    Ok(())
}

/// Scores each hypothesis against the reference. Samples run in parallel;
/// the output does not depend on the thread count.
pub fn run_rsa(
    reference: &RepresentationalModel,
    hypotheses: &[&RepresentationalModel],
    config: &RsaConfig,
) -> Result<Vec<ScoreSeries>> {
    if hypotheses.is_empty() {
        return Err(Error::config("no hypothesis models to score"));
    }
    for h in hypotheses {
        reference.check_aligned(h)?;
    }
    let samples = draw_samples(reference.ids(), config)?;
    let ranked_ref = RankedModel::new(reference)?;
    let ranked_hyps: Vec<RankedModel> = hypotheses.iter().map(|h| RankedModel::new(h)).collect::<Result<_>>()?;

    let per_sample: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|sample| {
            let g_ref = compute_geometry_ranked(&ranked_ref, sample, config.policy)?;
            ranked_hyps
                .iter()
                .map(|h| {
                    let g = compute_geometry_ranked(h, sample, config.policy)?;
                    geometry_similarity(&g_ref, &g, config.policy)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(hypotheses
        .iter()
        .enumerate()
        .map(|(k, h)| ScoreSeries {
            hypothesis: h.name().to_string(),
            scores: per_sample.iter().map(|row| row[k]).collect(),
            samples: samples.clone(),
        })
        .collect())
}

/// Which side of a comparison the median difference favours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    First,
    Second,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub first: String,
    pub second: String,
    pub mean_first: f64,
    pub mean_second: f64,
    pub positive: u64,
    pub negative: u64,
    pub zero: u64,
    pub p_value: f64,
    pub median_difference: f64,
    pub direction: Direction,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}

/// Paired differences `first − second`.
pub fn differences(a: &ScoreSeries, b: &ScoreSeries) -> Result<Vec<f64>> {
    if a.scores.len() != b.scores.len() || a.samples != b.samples {
        return Err(Error::Pairing(format!(
            "{} and {} were not scored on the same samples",
            a.hypothesis, b.hypothesis
        )));
    }
    if a.scores.is_empty() {
        return Err(Error::Pairing("empty score series".into()));
    }
    Ok(a.scores.iter().zip(&b.scores).map(|(x, y)| x - y).collect())
}

/// Two-sided exact sign test on the paired differences; zeros are dropped.
pub fn compare(a: &ScoreSeries, b: &ScoreSeries) -> Result<ComparisonResult> {
    let d = differences(a, b)?;
    let positive = d.iter().filter(|&&x| x > 0.0).count() as u64;
    let negative = d.iter().filter(|&&x| x < 0.0).count() as u64;
    let zero = d.len() as u64 - positive - negative;
    let median_difference = median(&d);
    let direction = if median_difference > 0.0 {
        Direction::First
    } else if median_difference < 0.0 {
        Direction::Second
    } else {
        Direction::Neither
    };
    Ok(ComparisonResult {
        first: a.hypothesis.clone(),
        second: b.hypothesis.clone(),
        mean_first: a.mean(),
        mean_second: b.mean(),
        positive,
        negative,
        zero,
        p_value: sign_test_p_value(positive, negative),
        median_difference,
        direction,
    })
}
