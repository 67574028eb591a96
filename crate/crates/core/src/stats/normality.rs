use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{shapiro_wilk, subsample_with, z_normalize, ShapiroWilk};
use crate::error::Result;
use crate::role::Role;
use crate::seed::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingNormality {
    pub sentence: u32,
    pub role: Role,
    pub full: ShapiroWilk,
    pub sampled: Option<ShapiroWilk>,
}

/// Shapiro-Wilk verdicts over a set of embeddings, each treated as a sample
/// of a scalar variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub alpha: f64,
    pub subsample: Option<usize>,
    pub seed: u64,
    pub count: usize,
    pub full_non_normal: usize,
    pub full_fraction: f64,
    pub sampled_non_normal: Option<usize>,
    pub sampled_fraction: Option<f64>,
    pub embeddings: Vec<EmbeddingNormality>,
}

impl NormalityReport {
    /// `embedding id,W,p` rows; subsampled columns are empty when absent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sentence,role,w_full,p_full,w_sampled,p_sampled\n");
        for e in &self.embeddings {
            let (ws, ps) = match e.sampled {
                Some(s) => (format!("{}", s.w), format!("{}", s.p_value)),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.sentence, e.role, e.full.w, e.full.p_value, ws, ps
            ));
        }
        out
    }
}

/// Z-normalizes each embedding, tests it in full and, when `subsample` is
/// set, on a without-replacement subsample. Embedding `i` draws its subsample
/// from RNG stream `i` of `seed`.
pub fn normality_report<'a, I>(
    embeddings: I,
    subsample: Option<usize>,
    alpha: f64,
    seed: u64,
) -> Result<NormalityReport>
where
    I: IntoIterator<Item = (u32, Role, &'a [f32])>,
{
    let items: Vec<(u32, Role, &[f32])> = embeddings.into_iter().collect();
    let embeddings: Vec<EmbeddingNormality> = items
        .par_iter()
        .enumerate()
        .map(|(i, &(sentence, role, v))| {
            let v: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
            let z = z_normalize(&v)?;
            let full = shapiro_wilk(&z)?;
            let sampled = match subsample {
                Some(k) => {
                    let mut rng = stream_rng(seed, i as u64);
                    Some(shapiro_wilk(&subsample_with(&z, k, &mut rng)?)?)
                }
                None => None,
            };
            Ok(EmbeddingNormality { sentence, role, full, sampled })
        })
        .collect::<Result<_>>()?;

    let count = embeddings.len();
    let frac = |k: usize| if count == 0 { 0.0 } else { k as f64 / count as f64 };
    let full_non_normal = embeddings.iter().filter(|e| e.full.is_non_normal(alpha)).count();
    let sampled_non_normal = subsample.map(|_| {
        embeddings
            .iter()
            .filter(|e| e.sampled.is_some_and(|s| s.is_non_normal(alpha)))
            .count()
    });
    Ok(NormalityReport {
        alpha,
        subsample,
        seed,
        count,
        full_non_normal,
        full_fraction: frac(full_non_normal),
        sampled_non_normal,
        sampled_fraction: sampled_non_normal.map(frac),
        embeddings,
    })
}

#[cfg(test)]
mod tests {
    use rand::Rng;
    use rand_distr::StandardNormal;

    use super::*;

    fn normal_vectors(count: usize, dim: usize, seed: u64) -> Vec<Vec<f32>> {
        let mut rng = stream_rng(seed, 0);
        (0..count)
            .map(|_| (0..dim).map(|_| rng.sample::<f32, _>(StandardNormal)).collect())
            .collect()
    }

    #[test]
    fn calibrated_on_normal_data() {
        let vs = normal_vectors(400, 768, 5);
        let r = normality_report(
            vs.iter().enumerate().map(|(i, v)| (i as u32, Role::Verb, v.as_slice())),
            Some(300),
            0.05,
            1,
        )
        .unwrap();
        assert_eq!(r.count, 400);
        assert!((r.full_fraction - 0.05).abs() < 0.035, "{}", r.full_fraction);
        assert!((r.sampled_fraction.unwrap() - 0.05).abs() < 0.035);
        assert_eq!(r.to_csv().lines().count(), 401);
    }

    #[test]
    fn heavy_tails_flagged() {
        let mut vs = normal_vectors(50, 768, 6);
        for v in &mut vs {
            v[3] = 40.0;
            v[100] = -25.0;
        }
        let r = normality_report(
            vs.iter().enumerate().map(|(i, v)| (i as u32, Role::Pronoun, v.as_slice())),
            None,
            0.05,
            0,
        )
        .unwrap();
        assert_eq!(r.full_non_normal, 50);
        assert!(r.sampled_fraction.is_none());
    }

    #[test]
    fn deterministic_per_seed() {
        let vs = normal_vectors(20, 64, 8);
        let run = |seed| {
            normality_report(
                vs.iter().enumerate().map(|(i, v)| (i as u32, Role::Verb, v.as_slice())),
                Some(30),
                0.05,
                seed,
            )
            .unwrap()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn subsample_larger_than_dim_fails() {
        let vs = normal_vectors(2, 10, 1);
        let r = normality_report(
            vs.iter().map(|v| (0, Role::Verb, v.as_slice())),
            Some(11),
            0.05,
            0,
        );
        assert!(r.is_err());
    }
}
