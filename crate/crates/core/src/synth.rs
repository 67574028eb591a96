//! Synthetic embeddings for fixtures, smoke runs and calibration: Gaussian
//! lexicons and datasets, and datasets with a planted dependence on one role.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::embedstore::{EmbeddingDataset, StaticLexicon};
use crate::error::{Error, Result};
use crate::grammar::Corpus;
use crate::role::Role;
use crate::seed::stream_rng;

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f32> {
    (0..dim).map(|_| rng.sample::<f32, _>(StandardNormal)).collect()
}

/// Every distinct token in the corpus, sorted.
pub fn corpus_vocabulary(corpus: &Corpus) -> Vec<String> {
    let words: BTreeSet<&str> = corpus.sentences().iter().flat_map(|s| s.tokens.iter().map(String::as_str)).collect();
    words.into_iter().map(str::to_string).collect()
}

/// One standard-normal vector per word, drawn in the order given.
pub fn gaussian_lexicon<S: AsRef<str>>(words: &[S], dim: usize, seed: u64) -> Result<StaticLexicon> {
    let mut rng = stream_rng(seed, 0);
    let mut lex = StaticLexicon::new(format!("synthetic:{seed}"), dim);
    for w in words {
        lex.insert(w.as_ref(), &gaussian_vector(&mut rng, dim))?;
    }
    Ok(lex)
}

/// Independent standard-normal records for every sentence and every role in
/// `dims`. Records are drawn in (sentence, role) order.
pub fn gaussian_dataset(corpus: &Corpus, dims: &BTreeMap<Role, u32>, seed: u64) -> Result<EmbeddingDataset> {
    let mut rng = stream_rng(seed, 0);
    let mut ds = EmbeddingDataset::new(corpus.fingerprint(), dims.clone());
    for s in corpus.sentences() {
        for (&role, &dim) in dims {
            if role != Role::Sentence && !s.roles.contains_key(&role) {
                return Err(Error::MissingRole { sentence: s.id, role });
            }
            ds.insert(s.id, role, gaussian_vector(&mut rng, dim as usize))?;
        }
    }
    Ok(ds)
}

/// Records for `target` equal to `[lexicon(word filling source) ∥ ε·noise]`,
/// with `noise_dim` standard-normal noise components.
pub fn planted_dataset(
    corpus: &Corpus,
    lexicon: &StaticLexicon,
    source: Role,
    target: Role,
    epsilon: f32,
    noise_dim: usize,
    seed: u64,
) -> Result<EmbeddingDataset> {
    let mut rng = stream_rng(seed, 0);
    let dim = (lexicon.dim() + noise_dim) as u32;
    let mut ds = EmbeddingDataset::new(corpus.fingerprint(), BTreeMap::from([(target, dim)]));
    for s in corpus.sentences() {
        if target != Role::Sentence && !s.roles.contains_key(&target) {
            return Err(Error::MissingRole { sentence: s.id, role: target });
        }
        let mut v = lexicon.lookup(s.role_word(source)?, s.id)?.to_vec();
        v.extend(gaussian_vector(&mut rng, noise_dim).into_iter().map(|x| epsilon * x));
        ds.insert(s.id, target, v)?;
    }
    Ok(ds)
}
