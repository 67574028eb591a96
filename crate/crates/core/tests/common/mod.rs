//! Helpers shared by several test targets: an independent corpus checker
//! and a strategy for arbitrary embedding datasets.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use ctxrsa::embedstore::EmbeddingDataset;
use ctxrsa::grammar::{Corpus, Number, TemplateGrammar};
use ctxrsa::{Fingerprint, Role};
use proptest::prelude::*;
use regex::Regex;

fn template_regex(g: &TemplateGrammar, id: &str) -> Regex {
    let t = g.template(id).unwrap();
    let parts: Vec<String> = t
        .slots
        .iter()
        .map(|s| match (&s.literal, &s.class) {
            (Some(lit), _) => regex::escape(lit),
            (None, Some(class)) => {
                let words: Vec<String> = g.class_words(class).iter().map(|w| regex::escape(w)).collect();
                format!("(?:{})", words.join("|"))
            }
            _ => unreachable!(),
        })
        .collect();
    Regex::new(&format!("^{}$", parts.join(" "))).unwrap()
}

fn number_of(g: &TemplateGrammar, word: &str) -> Option<Number> {
    g.vocabularies.values().flatten().find(|w| w.word == word).and_then(|w| w.number)
}

/// Template mismatches, agreement and distinctness violations, and repeats.
pub fn violations(g: &TemplateGrammar, c: &Corpus) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for s in c.sentences() {
        let text = s.text();
        if !seen.insert(s.tokens.clone()) {
            out.push(format!("repeat: {text}"));
        }
        let Some(t) = g.template(&s.template_id) else {
            out.push(format!("unknown template {}: {text}", s.template_id));
            continue;
        };
        if !template_regex(g, &s.template_id).is_match(&text) {
            out.push(format!("template mismatch: {text}"));
        }
        let slot = |h: &String| t.slots.iter().position(|sl| sl.handle().as_deref() == Some(h)).unwrap();
        for group in &t.agree {
            let numbers: HashSet<_> = group.iter().filter_map(|h| number_of(g, &s.tokens[slot(h)])).collect();
            if numbers.len() > 1 {
                out.push(format!("agreement: {text}"));
            }
        }
        for group in &t.distinct {
            let words: Vec<&String> = group.iter().map(|h| &s.tokens[slot(h)]).collect();
            if words.iter().collect::<HashSet<_>>().len() != words.len() {
                out.push(format!("distinct: {text}"));
            }
        }
    }
    out
}

pub fn finite_f32() -> impl Strategy<Value = f32> {
    any::<u32>().prop_map(f32::from_bits).prop_filter("finite", |x| x.is_finite())
}

pub fn dataset() -> impl Strategy<Value = EmbeddingDataset> {
    let roles = prop::sample::subsequence(Role::ALL.to_vec(), 1..4);
    (roles, any::<[u8; 32]>()).prop_flat_map(|(roles, fp)| {
        let dims = prop::collection::vec(1u32..12, roles.len());
        (Just(roles), dims, Just(fp)).prop_flat_map(|(roles, dims, fp)| {
            let role_dims: Vec<(Role, u32)> = roles.into_iter().zip(dims).collect();
            let keys = prop::collection::btree_set((0u32..50, 0..role_dims.len()), 0..30);
            (Just(role_dims), keys, Just(fp)).prop_flat_map(|(role_dims, keys, fp)| {
                let vectors: Vec<_> = keys
                    .iter()
                    .map(|&(_, r)| prop::collection::vec(finite_f32(), role_dims[r].1 as usize))
                    .collect();
                (Just(role_dims), Just(keys), vectors, Just(fp)).prop_map(|(role_dims, keys, vectors, fp)| {
                    let dims: BTreeMap<Role, u32> = role_dims.iter().copied().collect();
                    let mut ds = EmbeddingDataset::new(Fingerprint(fp), dims);
                    for ((s, r), v) in keys.into_iter().zip(vectors) {
                        ds.insert(s, role_dims[r].0, v).unwrap();
                    }
                    ds
                })
            })
        })
    })
}
