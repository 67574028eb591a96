use std::collections::{BTreeMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::corpus::{AnnotatedSentence, Corpus, RoleSlot};
use super::{Number, Template, TemplateGrammar, Word};
use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// Cap on the number of raw combinations [`enumerate_corpus`] will visit.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 20_000_000;

fn compatible(word: &Word, number: Option<Number>) -> bool {
    match (word.number, number) {
        (Some(a), Some(b)) => a == b,
        _ => true,
    }
}

/// Numbers for which every slot of an agreement group has a usable word.
pub(super) fn feasible_numbers(g: &TemplateGrammar, t: &Template, slots: &[usize]) -> Vec<Number> {
    [Number::Singular, Number::Plural]
        .into_iter()
        .filter(|&n| {
            slots.iter().all(|&i| {
                let class = t.slots[i].class.as_deref().unwrap_or_default();
                g.vocabularies
                    .get(class)
                    .is_some_and(|ws| ws.iter().any(|w| compatible(w, Some(n))))
            })
        })
        .collect()
}

fn handle_index(t: &Template, handle: &str) -> usize {
    t.slots
        .iter()
        .position(|s| s.handle().as_deref() == Some(handle))
        .expect("validated handle")
}

/// Per-template sampling plan: agreement groups and per-slot candidate lists.
struct Plan<'g> {
    template: &'g Template,
    groups: Vec<(Vec<usize>, Vec<Number>)>,
    group_of: Vec<Option<usize>>,
    distinct: Vec<Vec<usize>>,
    // (slot, number) -> candidate word list and weights
    candidates: BTreeMap<(usize, Option<Number>), (Vec<&'g str>, Option<WeightedIndex<f64>>)>,
}

impl<'g> Plan<'g> {
    fn new(g: &'g TemplateGrammar, t: &'g Template) -> Result<Self> {
        let mut group_of = vec![None; t.slots.len()];
        let mut groups = Vec::new();
        for (gi, group) in t.agree.iter().enumerate() {
            let slots: Vec<usize> = group.iter().map(|h| handle_index(t, h)).collect();
            for &i in &slots {
                group_of[i] = Some(gi);
            }
            let numbers = feasible_numbers(g, t, &slots);
            groups.push((slots, numbers));
        }
        let distinct = t
            .distinct
            .iter()
            .map(|grp| grp.iter().map(|h| handle_index(t, h)).collect())
            .collect();

        let mut candidates = BTreeMap::new();
        for (i, slot) in t.slots.iter().enumerate() {
            let Some(class) = &slot.class else { continue };
            let words = &g.vocabularies[class];
            let numbers: Vec<Option<Number>> = match group_of[i] {
                Some(gi) => groups[gi].1.iter().copied().map(Some).collect(),
                None => vec![None],
            };
            for number in numbers {
                let chosen: Vec<&Word> = words.iter().filter(|w| compatible(w, number)).collect();
                let dist = WeightedIndex::new(chosen.iter().map(|w| w.weight))
                    .map_err(|e| Error::Grammar(format!("template {}: {e}", t.id)))?;
                candidates.insert(
                    (i, number),
                    (chosen.iter().map(|w| w.word.as_str()).collect(), Some(dist)),
                );
            }
        }
        Ok(Plan { template: t, groups, group_of, distinct, candidates })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Vec<&'g str> {
        let numbers: Vec<Number> = self
            .groups
            .iter()
            .map(|(_, feasible)| feasible[rng.random_range(0..feasible.len())])
            .collect();
        self.template
            .slots
            .iter()
            .enumerate()
            .map(|(i, slot)| match &slot.literal {
                Some(lit) => lit.as_str(),
                None => {
                    let number = self.group_of[i].map(|gi| numbers[gi]);
                    let (words, dist) = &self.candidates[&(i, number)];
                    words[dist.as_ref().expect("weights").sample(rng)]
                }
            })
            .collect()
    }

    fn satisfies(&self, g: &TemplateGrammar, tokens: &[&str]) -> bool {
        let agree_ok = self.groups.iter().all(|(slots, _)| {
            let mut seen: Option<Number> = None;
            slots.iter().all(|&i| {
                let class = self.template.slots[i].class.as_deref().unwrap();
                let number = g.vocabularies[class]
                    .iter()
                    .find(|w| w.word == tokens[i])
                    .and_then(|w| w.number);
                match (seen, number) {
                    (Some(a), Some(b)) if a != b => false,
                    (None, Some(b)) => {
                        seen = Some(b);
                        true
                    }
                    _ => true,
                }
            })
        });
        let distinct_ok = self.distinct.iter().all(|slots| {
            let mut words = HashSet::new();
            slots.iter().all(|&i| words.insert(tokens[i]))
        });
        agree_ok && distinct_ok
    }

    fn annotate(&self, id: u32, tokens: &[&str]) -> AnnotatedSentence {
        let roles = self
            .template
            .slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                s.role.map(|r| (r, RoleSlot { index: i as u32, word: tokens[i].to_string() }))
            })
            .collect();
        AnnotatedSentence {
            id,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            roles,
            template_id: self.template.id.clone(),
        }
    }
}

fn finish(
    g: &TemplateGrammar,
    seed: Option<u64>,
    raw: impl Iterator<Item = (usize, Vec<String>)>,
    plans: &[Plan<'_>],
) -> Result<Corpus> {
    let mut seen = HashSet::new();
    let mut sentences = Vec::new();
    for (ti, tokens) in raw {
        if seen.contains(&tokens) {
            continue;
        }
        let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let id = sentences.len() as u32;
        sentences.push(plans[ti].annotate(id, &refs));
        seen.insert(tokens);
    }
    Corpus::new(g.fingerprint(), seed, sentences)
}

/// Draws `target_count` raw sentences (template by weight, then slot words by
/// weight within the agreement number drawn for each group), drops those that
/// violate a constraint and removes repeated token sequences.
pub fn generate_corpus(g: &TemplateGrammar, target_count: usize, seed: u64) -> Result<Corpus> {
    g.validate()?;
    let plans: Vec<Plan> = g.templates.iter().map(|t| Plan::new(g, t)).collect::<Result<_>>()?;
    let template_dist = WeightedIndex::new(g.templates.iter().map(|t| t.weight))
        .map_err(|e| Error::Grammar(e.to_string()))?;
    let mut rng = stream_rng(seed, 0);

    let mut raw = Vec::with_capacity(target_count);
    for _ in 0..target_count {
        let ti = template_dist.sample(&mut rng);
        let tokens = plans[ti].draw(&mut rng);
        if plans[ti].satisfies(g, &tokens) {
            raw.push((ti, tokens.into_iter().map(String::from).collect::<Vec<_>>()));
        }
    }
    finish(g, Some(seed), raw.into_iter(), &plans)
}

/// Every constraint-satisfying sentence of every template, in template order
/// with the last slot varying fastest.
pub fn enumerate_corpus(g: &TemplateGrammar, limit: u64) -> Result<Corpus> {
    g.validate()?;
    let plans: Vec<Plan> = g.templates.iter().map(|t| Plan::new(g, t)).collect::<Result<_>>()?;
    let mut raw = Vec::new();
    let mut visited: u64 = 0;
    for (ti, t) in g.templates.iter().enumerate() {
        let choices: Vec<Vec<&str>> = t
            .slots
            .iter()
            .map(|s| match (&s.literal, &s.class) {
                (Some(lit), _) => vec![lit.as_str()],
                (None, Some(class)) => g.vocabularies[class].iter().map(|w| w.word.as_str()).collect(),
                _ => unreachable!("validated slot"),
            })
            .collect();
        let total = choices
            .iter()
            .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))
            .unwrap_or(u64::MAX);
        visited = visited.saturating_add(total);
        if visited > limit {
            return Err(Error::config(format!(
                "exhaustive enumeration of {} exceeds {limit} combinations",
                g.name
            )));
        }
        let mut odometer = vec![0usize; choices.len()];
        loop {
            let tokens: Vec<&str> = odometer.iter().zip(&choices).map(|(&k, c)| c[k]).collect();
            if plans[ti].satisfies(g, &tokens) {
                raw.push((ti, tokens.into_iter().map(String::from).collect::<Vec<_>>()));
            }
            let mut pos = choices.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                odometer[pos] += 1;
                if odometer[pos] < choices[pos].len() {
                    break;
                }
                odometer[pos] = 0;
            }
            if odometer.iter().all(|&k| k == 0) {
                break;
            }
        }
    }
    finish(g, None, raw.into_iter(), &plans)
}
