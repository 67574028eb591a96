//! Storage for per-(sentence, role) embedding vectors and static word vectors.
//!
//! [`EmbeddingDataset`] is persisted in the EMB1 binary format (see [`emb1`]),
//! [`StaticLexicon`] in the common `word v1 … vd` text format.

pub mod emb1;
mod lexicon;

use std::collections::BTreeMap;

pub use emb1::{load_dataset, read_dataset, save_dataset, write_dataset, DatasetReader, IndexEntry};
pub use lexicon::{load_static_lexicon, parse_lexicon, write_lexicon, StaticLexicon};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::grammar::Corpus;
use crate::role::Role;

/// Embedding vectors keyed by (sentence id, role), one dimension per role.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset {
    fingerprint: Fingerprint,
    dims: BTreeMap<Role, u32>,
    records: BTreeMap<(u32, Role), Vec<f32>>,
}

impl EmbeddingDataset {
    pub fn new(corpus_fingerprint: Fingerprint, dims: BTreeMap<Role, u32>) -> Self {
        EmbeddingDataset { fingerprint: corpus_fingerprint, dims, records: BTreeMap::new() }
    }

    /// Adds a record. The role must be declared, the length must match its
    /// dim, every component must be finite and the key must be new.
    pub fn insert(&mut self, sentence: u32, role: Role, vector: Vec<f32>) -> Result<()> {
        let key = format!("(sentence {sentence}, {role})");
        let dim = *self
            .dims
            .get(&role)
            .ok_or_else(|| Error::Alignment(format!("{key}: role has no declared dimension")))?;
        if vector.len() != dim as usize {
            return Err(Error::Alignment(format!(
                "{key}: {} components, role declares {dim}",
                vector.len()
            )));
        }
        if let Some(i) = vector.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("{key}: non-finite component {i}")));
        }
        if self.records.insert((sentence, role), vector).is_some() {
            return Err(Error::Alignment(format!("{key}: duplicate record")));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn dims(&self) -> &BTreeMap<Role, u32> {
        &self.dims
    }

    pub fn dim(&self, role: Role) -> Option<u32> {
        self.dims.get(&role).copied()
    }

    pub fn get(&self, sentence: u32, role: Role) -> Option<&[f32]> {
        self.records.get(&(sentence, role)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in (sentence, role) order.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, Role), &[f32])> {
        self.records.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    /// Fails unless the dataset was built for exactly this corpus.
    pub fn check_fingerprint(&self, corpus: &Corpus) -> Result<()> {
        let expected = corpus.fingerprint();
        if expected != self.fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: expected.to_hex(),
                found: self.fingerprint.to_hex(),
            });
        }
        Ok(())
    }

    /// Fingerprint check plus: every record names a corpus sentence and a
    /// role that sentence carries (the `sentence` role needs only the sentence).
    pub fn validate_against(&self, corpus: &Corpus) -> Result<()> {
        self.check_fingerprint(corpus)?;
        for &(sentence, role) in self.records.keys() {
            let s = corpus
                .get(sentence)
                .ok_or_else(|| Error::Alignment(format!("record for unknown sentence {sentence}")))?;
            if role != Role::Sentence && !s.roles.contains_key(&role) {
                return Err(Error::Alignment(format!(
                    "record (sentence {sentence}, {role}) but the sentence has no such role"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{enumerate_corpus, TemplateGrammar};

    #[test]
    fn insert_checks() {
        let mut ds = EmbeddingDataset::new(Fingerprint::default(), [(Role::Verb, 2)].into());
        ds.insert(0, Role::Verb, vec![1.0, 2.0]).unwrap();
        assert!(ds.insert(0, Role::Verb, vec![1.0, 2.0]).is_err());
        assert!(ds.insert(1, Role::Verb, vec![1.0]).is_err());
        assert!(ds.insert(1, Role::Subject, vec![1.0, 2.0]).is_err());
        assert!(ds.insert(1, Role::Verb, vec![f32::NAN, 2.0]).is_err());
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.get(0, Role::Verb), Some(&[1.0, 2.0][..]));
    }

    #[test]
    fn validates_against_corpus() {
        let g = TemplateGrammar::load(std::path::Path::new("builtin:intransitive")).unwrap();
        let corpus = enumerate_corpus(&g, 1000).unwrap();
        let dims = [(Role::Verb, 1), (Role::Sentence, 1), (Role::Object, 1)].into();
        let mut ds = EmbeddingDataset::new(corpus.fingerprint(), dims);
        ds.insert(0, Role::Verb, vec![1.0]).unwrap();
        ds.insert(0, Role::Sentence, vec![1.0]).unwrap();
        ds.validate_against(&corpus).unwrap();

        let mut bad = ds.clone();
        bad.insert(500, Role::Verb, vec![1.0]).unwrap();
        assert!(bad.validate_against(&corpus).is_err());
        let mut bad = ds.clone();
        bad.insert(1, Role::Object, vec![1.0]).unwrap();
        assert!(bad.validate_against(&corpus).is_err());

        let other = EmbeddingDataset::new(Fingerprint::of(b"x"), BTreeMap::new());
        assert!(matches!(
            other.validate_against(&corpus),
            Err(Error::FingerprintMismatch { .. })
        ));
    }
}
