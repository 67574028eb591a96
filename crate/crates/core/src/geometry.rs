//! Representational geometries (pairwise `1 − ρ` matrices) and the
//! second-order similarity between two of them.
//!
//! Spearman's ρ is computed from integer centred ranks (see
//! [`stats::centered_double_ranks`](crate::stats::centered_double_ranks)), so
//! every matrix entry is independent of summation order, thread count and any
//! permutation of vector dimensions.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::RepresentationalModel;
use crate::stats::{centered_double_ranks, rank_dot, rank_sum_squares, MAX_RANK_LEN};

/// What to do when a vector has zero rank variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantPolicy {
    /// Fail with [`Error::UndefinedCorrelation`].
    #[default]
    Error,
    /// Treat the correlation as 0.
    Zero,
}

/// A vector in centred-rank form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranked {
    ranks: Vec<i32>,
    sum_squares: i64,
}

impl Ranked {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.len() > MAX_RANK_LEN {
            return Err(Error::config(format!("cannot rank {} values", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite value at index {i}")));
        }
        let ranks = centered_double_ranks(values);
        let sum_squares = rank_sum_squares(&ranks);
        Ok(Ranked { ranks, sum_squares })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.sum_squares == 0
    }
}

/// ρ of two ranked vectors of equal length.
pub fn rho_ranked(a: &Ranked, b: &Ranked, policy: ConstantPolicy, what: impl FnOnce() -> String) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::config(format!(
            "Spearman correlation needs two vectors of equal length ≥ 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_constant() || b.is_constant() {
        return match policy {
            ConstantPolicy::Error => Err(Error::UndefinedCorrelation(what())),
            ConstantPolicy::Zero => Ok(0.0),
        };
    }
    let dot = rank_dot(&a.ranks, &b.ranks) as f64;
    // equal sums give sqrt(fl(s²)) = s, hence exactly 1 for identical rankings
    let denom = ((a.sum_squares as f64) * (b.sum_squares as f64)).sqrt();
    Ok((dot / denom).clamp(-1.0, 1.0))
}

/// Spearman's ρ with average ranks for ties; errors on a constant input.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    spearman_rho_with(x, y, ConstantPolicy::Error)
}

pub fn spearman_rho_with(x: &[f64], y: &[f64], policy: ConstantPolicy) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::config(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    rho_ranked(&Ranked::new(x)?, &Ranked::new(y)?, policy, || "input vector".into())
}

/// Every vector of a model in rank form, computed once and reused across samples.
#[derive(Debug, Clone)]
pub struct RankedModel<'m> {
    model: &'m RepresentationalModel,
    rows: Vec<Ranked>,
}

impl<'m> RankedModel<'m> {
    pub fn new(model: &'m RepresentationalModel) -> Result<Self> {
        let rows = (0..model.len())
            .into_par_iter()
            .map(|i| Ranked::new(model.row(i)))
            .collect::<Result<_>>()?;
        Ok(RankedModel { model, rows })
    }

    pub fn model(&self) -> &RepresentationalModel {
        self.model
    }
}

/// Symmetric `n × n` dissimilarity matrix over a sample of sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    ids: Vec<u32>,
    matrix: Vec<f64>,
}

impl Geometry {
    /// From a full row-major matrix; checks shape, symmetry and a zero diagonal.
    pub fn from_matrix(ids: Vec<u32>, matrix: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if matrix.len() != n * n {
            return Err(Error::config(format!("{} entries for a {n}×{n} geometry", matrix.len())));
        }
        for i in 0..n {
            if matrix[i * n + i] != 0.0 {
                return Err(Error::Numeric(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                if matrix[i * n + j] != matrix[j * n + i] {
                    return Err(Error::Numeric(format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        Ok(Geometry { ids, matrix })
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n() + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Row-major strict upper triangle: `(0,1), (0,2), …, (n−2,n−1)`.
    pub fn upper_triangle(&self) -> Vec<f64> {
        upper_triangle(self)
    }

    /// First line: the sample's sentence ids; then one line per matrix row.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        let ids: Vec<String> = self.ids.iter().map(u32::to_string).collect();
        out.push_str(&ids.join(","));
        out.push('\n');
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{}", self.get(i, j)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn upper_triangle(g: &Geometry) -> Vec<f64> {
    let n = g.n();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        out.extend_from_slice(&g.matrix[i * n + i + 1..(i + 1) * n]);
    }
    out
}

/// `D(M, c)`: entry `(i, j)` is `1 − ρ(vec_i, vec_j)` over the sampled ids.
pub fn compute_geometry(model: &RepresentationalModel, sample: &[u32], policy: ConstantPolicy) -> Result<Geometry> {
    let positions = sample_positions(model, sample)?;
    let rows: Vec<Ranked> = positions
        .par_iter()
        .map(|&p| Ranked::new(model.row(p)))
        .collect::<Result<_>>()?;
    let refs: Vec<&Ranked> = rows.iter().collect();
    assemble(model.name(), sample, &refs, policy)
}

/// Same as [`compute_geometry`] but reusing precomputed ranks.
pub fn compute_geometry_ranked(ranked: &RankedModel, sample: &[u32], policy: ConstantPolicy) -> Result<Geometry> {
    let positions = sample_positions(ranked.model, sample)?;
    let refs: Vec<&Ranked> = positions.iter().map(|&p| &ranked.rows[p]).collect();
    assemble(ranked.model.name(), sample, &refs, policy)
}

fn sample_positions(model: &RepresentationalModel, sample: &[u32]) -> Result<Vec<usize>> {
    if sample.len() < 3 {
        return Err(Error::config(format!("a geometry needs at least 3 sentences, got {}", sample.len())));
    }
    sample
        .iter()
        .map(|&id| {
            model
                .position(id)
                .ok_or_else(|| Error::Alignment(format!("sentence {id} is not in model {}", model.name())))
        })
        .collect()
}

fn assemble(name: &str, sample: &[u32], rows: &[&Ranked], policy: ConstantPolicy) -> Result<Geometry> {
    let n = rows.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    let rho = rho_ranked(rows[i], rows[j], policy, || {
                        let which = if rows[i].is_constant() { sample[i] } else { sample[j] };
                        format!("model {name}, sentence {which}")
                    })?;
                    Ok(1.0 - rho)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut matrix = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (k, &d) in row.iter().enumerate() {
            let j = i + 1 + k;
            matrix[i * n + j] = d;
            matrix[j * n + i] = d;
        }
    }
    Ok(Geometry { ids: sample.to_vec(), matrix })
}

/// One second-order similarity value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub hypothesis: String,
    pub sample: usize,
    pub value: f64,
}

/// ρ between the upper triangles of two geometries over the same sample.
pub fn geometry_similarity(reference: &Geometry, hypothesis: &Geometry, policy: ConstantPolicy) -> Result<f64> {
    if reference.ids != hypothesis.ids {
        return Err(Error::Alignment(
            "geometries were computed over different samples or sample orders".into(),
        ));
    }
    let a = Ranked::new(&reference.upper_triangle())?;
    let b = Ranked::new(&hypothesis.upper_triangle())?;
    rho_ranked(&a, &b, policy, || "geometry upper triangle".into())
}
