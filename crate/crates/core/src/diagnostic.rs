//! Diagnostic probe baseline: a binary logistic-regression classifier that
//! tries to pick out the word filling one role from the contextual vector of
//! another token.
//!
//! Each instance is `[static vector of a candidate word ∥ contextual vector of
//! the target token]`, labelled positive when the candidate fills the
//! positive role.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::embedstore::{EmbeddingDataset, StaticLexicon};
use crate::error::{Error, Result};
use crate::grammar::Corpus;
use crate::role::Role;
use crate::seed::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeInstance {
    pub sentence: u32,
    pub word: String,
    pub features: Vec<f64>,
    pub label: bool,
}

/// One instance per token other than the target token.
pub fn build_probe_dataset(
    corpus: &Corpus,
    dataset: &EmbeddingDataset,
    lexicon: &StaticLexicon,
    target: Role,
    positive: Role,
) -> Result<Vec<ProbeInstance>> {
    if target == positive {
        return Err(Error::Probe("target and positive roles must differ".into()));
    }
    dataset.check_fingerprint(corpus)?;
    let mut out = Vec::new();
    for s in corpus.sentences() {
        let t = s.roles.get(&target).ok_or(Error::MissingRole { sentence: s.id, role: target })?;
        let p = s.roles.get(&positive).ok_or(Error::MissingRole { sentence: s.id, role: positive })?;
        let context = dataset
            .get(s.id, target)
            .ok_or(Error::MissingRecord { sentence: s.id, role: target })?;
        for (i, word) in s.tokens.iter().enumerate() {
            if i == t.index as usize {
                continue;
            }
            let mut features: Vec<f64> = lexicon.lookup(word, s.id)?.iter().map(|&x| x as f64).collect();
            features.extend(context.iter().map(|&x| x as f64));
            out.push(ProbeInstance {
                sentence: s.id,
                word: word.clone(),
                features,
                label: i == p.index as usize,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub split_seed: u64,
    /// Inverse L2 strength; the intercept is not penalised.
    pub c: f64,
    pub test_fraction: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { split_seed: 0, c: 1.0, test_fraction: 0.2, max_iterations: 1000, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub accuracy: f64,
    /// 0 when nothing is predicted positive; see `no_positive_predictions`.
    pub precision: f64,
    pub recall: f64,
    pub no_positive_predictions: bool,
    /// Negative-class frequency in the test split.
    pub majority_accuracy: f64,
    pub train_instances: usize,
    pub test_instances: usize,
    pub train_sentences: Vec<u32>,
    pub test_sentences: Vec<u32>,
    pub iterations: usize,
    pub converged: bool,
}

/// Sentence-level split: shuffles the distinct sentence ids with the seed
/// and puts the first `round(fraction · count)` (at least one) in the test side.
pub fn split_sentences(instances: &[ProbeInstance], seed: u64, test_fraction: f64) -> Result<(Vec<u32>, Vec<u32>)> {
    let ids: BTreeSet<u32> = instances.iter().map(|i| i.sentence).collect();
    let mut ids: Vec<u32> = ids.into_iter().collect();
    if ids.len() < 2 {
        return Err(Error::Probe("need at least two sentences to split".into()));
    }
    if !(0.0 < test_fraction && test_fraction < 1.0) {
        return Err(Error::config(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    ids.shuffle(&mut stream_rng(seed, 0));
    let k = ((ids.len() as f64 * test_fraction).round() as usize).clamp(1, ids.len() - 1);
    let mut test = ids[..k].to_vec();
    let mut train = ids[k..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

pub fn train_probe(instances: &[ProbeInstance], config: &ProbeConfig) -> Result<ProbeReport> {
    let dim = instances.first().map(|i| i.features.len()).ok_or_else(|| Error::Probe("no instances".into()))?;
    if let Some(bad) = instances.iter().find(|i| i.features.len() != dim) {
        return Err(Error::Probe(format!("sentence {} has a feature vector of a different length", bad.sentence)));
    }
    if !(config.c > 0.0 && config.c.is_finite()) {
        return Err(Error::config("regularization C must be positive"));
    }
    let (train_ids, test_ids) = split_sentences(instances, config.split_seed, config.test_fraction)?;
    let test_set: HashSet<u32> = test_ids.iter().copied().collect();
    let (test, train): (Vec<&ProbeInstance>, Vec<&ProbeInstance>) =
        instances.iter().partition(|i| test_set.contains(&i.sentence));

    let positives = train.iter().filter(|i| i.label).count();
    if positives == 0 || positives == train.len() {
        return Err(Error::Probe("training split contains a single class".into()));
    }

    let fit = fit_logistic(&train, config);
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    let mut correct = 0usize;
    for inst in &test {
        let predicted = fit.score(&inst.features) > 0.0;
        match (predicted, inst.label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
        if predicted == inst.label {
            correct += 1;
        }
    }
    let n_test = test.len() as f64;
    let negatives = test.iter().filter(|i| !i.label).count() as f64;
    Ok(ProbeReport {
        accuracy: correct as f64 / n_test,
        precision: if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 },
        recall: if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 },
        no_positive_predictions: tp + fp == 0,
        majority_accuracy: negatives / n_test,
        train_instances: train.len(),
        test_instances: test.len(),
        train_sentences: train_ids,
        test_sentences: test_ids,
        iterations: fit.iterations,
        converged: fit.converged,
    })
}

struct Fit {
    weights: Vec<f64>,
    bias: f64,
    iterations: usize,
    converged: bool,
}

impl Fit {
    fn score(&self, x: &[f64]) -> f64 {
        self.bias + dot(&self.weights, x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// log(1 + e^z) without overflow
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Minimises `(1/N) Σ logloss + ‖w‖² / (2 C N)` (same optimum as the
/// unscaled `C Σ logloss + ‖w‖²/2`) with L-BFGS. Parameter layout: `[w…, b]`.
fn fit_logistic(train: &[&ProbeInstance], config: &ProbeConfig) -> Fit {
    let d = train[0].features.len();
    let lambda = 1.0 / (config.c * train.len() as f64);
    let objective = |p: &[f64], grad: &mut [f64]| logistic_objective(train, lambda, p, grad);
    let (p, iterations, converged) = lbfgs(objective, vec![0.0; d + 1], config.max_iterations, config.tolerance);
    Fit { bias: p[d], weights: p[..d].to_vec(), iterations, converged }
}

fn logistic_objective(train: &[&ProbeInstance], lambda: f64, p: &[f64], grad: &mut [f64]) -> f64 {
    let d = p.len() - 1;
    let n = train.len() as f64;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let (w, b) = (&p[..d], p[d]);
    let mut loss = 0.0;
    for inst in train {
        let z = b + dot(w, &inst.features);
        let y = if inst.label { 1.0 } else { 0.0 };
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, x) in grad[..d].iter_mut().zip(&inst.features) {
            *g += r * x;
        }
        grad[d] += r;
    }
    grad.iter_mut().for_each(|g| *g /= n);
    for (g, wi) in grad[..d].iter_mut().zip(w) {
        *g += lambda * wi;
    }
    loss / n + 0.5 * lambda * dot(w, w)
}

/// Limited-memory BFGS with a backtracking Armijo line search. Stops when the
/// gradient's Euclidean norm drops below `tol`.
fn lbfgs(
    mut f: impl FnMut(&[f64], &mut [f64]) -> f64,
    mut x: Vec<f64>,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, usize, bool) {
    const HISTORY: usize = 10;
    let k = x.len();
    let mut g = vec![0.0; k];
    let mut fx = f(&x, &mut g);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut x_new = vec![0.0; k];
    let mut g_new = vec![0.0; k];

    for iter in 0..max_iter {
        if dot(&g, &g).sqrt() < tol {
            return (x, iter, true);
        }
        // two-loop recursion for d = −H g
        let mut q = g.clone();
        let mut alpha = vec![0.0; s_hist.len()];
        for i in (0..s_hist.len()).rev() {
            alpha[i] = rho_hist[i] * dot(&s_hist[i], &q);
            for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
                *qj -= alpha[i] * yj;
            }
        }
        let gamma = match (s_hist.last(), y_hist.last()) {
            (Some(s), Some(y)) => dot(s, y) / dot(y, y),
            _ => 1.0 / dot(&g, &g).sqrt().max(1.0),
        };
        q.iter_mut().for_each(|v| *v *= gamma);
        for i in 0..s_hist.len() {
            let beta = rho_hist[i] * dot(&y_hist[i], &q);
            for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
                *qj += (alpha[i] - beta) * sj;
            }
        }
        let mut dir: Vec<f64> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // not a descent direction: restart from steepest descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }

        let mut step = 1.0;
        let mut fx_new;
        loop {
            for j in 0..k {
                x_new[j] = x[j] + step * dir[j];
            }
            fx_new = f(&x_new, &mut g_new);
            if fx_new <= fx + 1e-4 * step * slope || step < 1e-20 {
                break;
            }
            step *= 0.5;
        }
        if step < 1e-20 {
            return (x, iter + 1, false);
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).max(f64::MIN_POSITIVE) {
            if s_hist.len() == HISTORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        fx = fx_new;
    }
    let converged = dot(&g, &g).sqrt() < tol;
    (x, max_iter, converged)
}
