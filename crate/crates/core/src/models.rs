//! Reference and hypothesis representational models: one vector per corpus
//! sentence, in corpus order.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embedstore::{EmbeddingDataset, StaticLexicon};
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::grammar::{AnnotatedSentence, Corpus};
use crate::role::Role;
use crate::seed::stream_rng;

/// Where null-model distractor words come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DistractorPool {
    /// An explicit word list.
    Words(Vec<String>),
    /// Every distinct word that fills one of these roles somewhere in the corpus.
    Roles(Vec<Role>),
}

impl DistractorPool {
    /// Resolved, sorted and deduplicated word list.
    pub fn resolve(&self, corpus: &Corpus) -> Result<Vec<String>> {
        let words: BTreeSet<String> = match self {
            DistractorPool::Words(ws) => ws.iter().cloned().collect(),
            DistractorPool::Roles(roles) => corpus
                .sentences()
                .iter()
                .flat_map(|s| roles.iter().filter_map(|r| s.roles.get(r).map(|slot| slot.word.clone())))
                .collect(),
        };
        if words.is_empty() {
            return Err(Error::config("distractor pool is empty"));
        }
        Ok(words.into_iter().collect())
    }
}

/// How a model's vectors are composed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelRecipe {
    /// The dataset vector of one role.
    ContextualRole { role: Role },
    /// `[lexicon(anchor word) ∥ lexicon(context word)]`.
    StaticConcat { anchor: Role, context: Role },
    /// `lexicon(role word)`.
    StaticSingle { role: Role },
    /// `[lexicon(anchor word) ∥ lexicon(random pool word absent from the sentence)]`.
    NullConcat {
        anchor: Role,
        pool: DistractorPool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// `lexicon(random pool word absent from the sentence)`.
    NullSingle {
        pool: DistractorPool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl ModelRecipe {
    /// Fails with `MissingRole` when some sentence lacks a role the recipe reads.
    pub fn check_roles(&self, corpus: &Corpus) -> Result<()> {
        let roles: &[Role] = match self {
            ModelRecipe::ContextualRole { role: Role::Sentence } | ModelRecipe::NullSingle { .. } => &[],
            ModelRecipe::ContextualRole { role } | ModelRecipe::StaticSingle { role } => std::slice::from_ref(role),
            ModelRecipe::NullConcat { anchor, .. } => std::slice::from_ref(anchor),
            ModelRecipe::StaticConcat { anchor, context } => &[*anchor, *context],
        };
        for &role in roles {
            if let Some(s) = corpus.sentences().iter().find(|s| !s.roles.contains_key(&role)) {
                return Err(Error::MissingRole { sentence: s.id, role });
            }
        }
        Ok(())
    }
}

/// A named recipe, as written in run specifications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(flatten)]
    pub recipe: ModelRecipe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationalModel {
    name: String,
    ids: Vec<u32>,
    dim: usize,
    data: Vec<f64>,
    position: HashMap<u32, usize>,
    recipe: Option<ModelRecipe>,
}

impl RepresentationalModel {
    /// `data` holds `ids.len()` rows of `dim` values, row-major.
    pub fn new(name: impl Into<String>, ids: Vec<u32>, dim: usize, data: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if dim == 0 {
            return Err(Error::Alignment(format!("model {name}: zero dimension")));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::Alignment(format!(
                "model {name}: {} values for {} vectors of dim {dim}",
                data.len(),
                ids.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!(
                "model {name}: non-finite component in sentence {}",
                ids[i / dim]
            )));
        }
        let mut position = HashMap::with_capacity(ids.len());
        for (i, &id) in ids.iter().enumerate() {
            if position.insert(id, i).is_some() {
                return Err(Error::Alignment(format!("model {name}: sentence {id} appears twice")));
            }
        }
        Ok(RepresentationalModel { name, ids, dim, data, position, recipe: None })
    }

    pub fn with_recipe(mut self, recipe: ModelRecipe) -> Self {
        self.recipe = Some(recipe);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn recipe(&self) -> Option<&ModelRecipe> {
        self.recipe.as_ref()
    }

    /// Vector at corpus position `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, id: u32) -> Option<&[f64]> {
        self.position(id).map(|i| self.row(i))
    }

    /// Corpus position of sentence `id`.
    pub fn position(&self, id: u32) -> Option<usize> {
        self.position.get(&id).copied()
    }

    /// Checks that `other` covers the same sentences in the same order.
    pub fn check_aligned(&self, other: &RepresentationalModel) -> Result<()> {
        if self.ids != other.ids {
            return Err(Error::Alignment(format!(
                "models {} and {} do not index the same sentences in the same order",
                self.name, other.name
            )));
        }
        Ok(())
    }

    /// Debug dump: one `sentence` record per vector, rounded to `f32`.
    pub fn to_dataset(&self, corpus_fingerprint: Fingerprint) -> Result<EmbeddingDataset> {
        let mut ds = EmbeddingDataset::new(corpus_fingerprint, [(Role::Sentence, self.dim as u32)].into());
        for (i, &id) in self.ids.iter().enumerate() {
            ds.insert(id, Role::Sentence, self.row(i).iter().map(|&x| x as f32).collect())?;
        }
        Ok(ds)
    }
}

fn collect(
    name: &str,
    corpus: &Corpus,
    dim: usize,
    mut row: impl FnMut(&AnnotatedSentence, &mut Vec<f64>) -> Result<()>,
) -> Result<RepresentationalModel> {
    let mut data = Vec::with_capacity(corpus.len() * dim);
    for s in corpus.sentences() {
        row(s, &mut data)?;
    }
    let ids = corpus.sentences().iter().map(|s| s.id).collect();
    RepresentationalModel::new(name, ids, dim, data)
}

fn require_role(corpus: &Corpus, role: Role) -> Result<()> {
    if role == Role::Sentence {
        return Err(Error::config("the sentence role has no word for a lexicon lookup"));
    }
    match corpus.sentences().iter().find(|s| !s.roles.contains_key(&role)) {
        Some(s) => Err(Error::MissingRole { sentence: s.id, role }),
        None => Ok(()),
    }
}

/// Vector `i` is the dataset record for (sentence `i`, `role`).
pub fn build_reference(
    name: &str,
    corpus: &Corpus,
    dataset: &EmbeddingDataset,
    role: Role,
) -> Result<RepresentationalModel> {
    dataset.check_fingerprint(corpus)?;
    let first = corpus.sentences().first().map(|s| s.id).unwrap_or(0);
    let dim = dataset.dim(role).ok_or(Error::MissingRecord { sentence: first, role })? as usize;
    let model = collect(name, corpus, dim, |s, out| {
        let v = dataset.get(s.id, role).ok_or(Error::MissingRecord { sentence: s.id, role })?;
        out.extend(v.iter().map(|&x| x as f64));
        Ok(())
    })?;
    Ok(model.with_recipe(ModelRecipe::ContextualRole { role }))
}

pub fn build_concat_hypothesis(
    name: &str,
    corpus: &Corpus,
    lexicon: &StaticLexicon,
    anchor: Role,
    context: Role,
) -> Result<RepresentationalModel> {
    require_role(corpus, anchor)?;
    require_role(corpus, context)?;
    let model = collect(name, corpus, 2 * lexicon.dim(), |s, out| {
        for role in [anchor, context] {
            let v = lexicon.lookup(&s.roles[&role].word, s.id)?;
            out.extend(v.iter().map(|&x| x as f64));
        }
        Ok(())
    })?;
    Ok(model.with_recipe(ModelRecipe::StaticConcat { anchor, context }))
}

pub fn build_single_hypothesis(
    name: &str,
    corpus: &Corpus,
    lexicon: &StaticLexicon,
    role: Role,
) -> Result<RepresentationalModel> {
    require_role(corpus, role)?;
    let model = collect(name, corpus, lexicon.dim(), |s, out| {
        let v = lexicon.lookup(&s.roles[&role].word, s.id)?;
        out.extend(v.iter().map(|&x| x as f64));
        Ok(())
    })?;
    Ok(model.with_recipe(ModelRecipe::StaticSingle { role }))
}

/// A pool word not among the sentence's tokens, chosen uniformly.
pub fn draw_distractor<'p, R: Rng + ?Sized>(
    pool: &'p [String],
    sentence: &AnnotatedSentence,
    rng: &mut R,
) -> Result<&'p str> {
    let eligible: Vec<&String> = pool.iter().filter(|w| !sentence.tokens.contains(w)).collect();
    if eligible.is_empty() {
        return Err(Error::PoolExhausted { sentence: sentence.id });
    }
    Ok(eligible[rng.random_range(0..eligible.len())])
}

/// Distractor word per sentence, drawn in corpus order from one stream of `seed`.
pub fn draw_distractors(corpus: &Corpus, pool: &[String], seed: u64) -> Result<Vec<String>> {
    let mut rng = stream_rng(seed, 0);
    corpus
        .sentences()
        .iter()
        .map(|s| draw_distractor(pool, s, &mut rng).map(String::from))
        .collect()
}

/// `anchor = None` gives the single-word null model.
pub fn build_null_hypothesis(
    name: &str,
    corpus: &Corpus,
    lexicon: &StaticLexicon,
    anchor: Option<Role>,
    pool: &DistractorPool,
    seed: u64,
) -> Result<RepresentationalModel> {
    if let Some(a) = anchor {
        require_role(corpus, a)?;
    }
    let words = pool.resolve(corpus)?;
    let distractors = draw_distractors(corpus, &words, seed)?;
    let dim = lexicon.dim() * if anchor.is_some() { 2 } else { 1 };
    let mut i = 0;
    let model = collect(name, corpus, dim, |s, out| {
        if let Some(a) = anchor {
            out.extend(lexicon.lookup(&s.roles[&a].word, s.id)?.iter().map(|&x| x as f64));
        }
        out.extend(lexicon.lookup(&distractors[i], s.id)?.iter().map(|&x| x as f64));
        i += 1;
        Ok(())
    })?;
    let recipe = match anchor {
        Some(anchor) => ModelRecipe::NullConcat { anchor, pool: pool.clone(), seed: Some(seed) },
        None => ModelRecipe::NullSingle { pool: pool.clone(), seed: Some(seed) },
    };
    Ok(model.with_recipe(recipe))
}

/// Inputs a recipe may draw on.
pub struct ModelInputs<'a> {
    pub corpus: &'a Corpus,
    pub dataset: Option<&'a EmbeddingDataset>,
    pub lexicon: Option<&'a StaticLexicon>,
}

/// Builds a model from its spec. Null recipes without their own seed use
/// `default_seed`.
pub fn build_model(spec: &ModelSpec, inputs: &ModelInputs, default_seed: u64) -> Result<RepresentationalModel> {
    let lexicon = || {
        inputs
            .lexicon
            .ok_or_else(|| Error::config(format!("model {} needs a static lexicon", spec.name)))
    };
    match &spec.recipe {
        ModelRecipe::ContextualRole { role } => {
            let dataset = inputs
                .dataset
                .ok_or_else(|| Error::config(format!("model {} needs an embedding dataset", spec.name)))?;
            build_reference(&spec.name, inputs.corpus, dataset, *role)
        }
        ModelRecipe::StaticConcat { anchor, context } => {
            build_concat_hypothesis(&spec.name, inputs.corpus, lexicon()?, *anchor, *context)
        }
        ModelRecipe::StaticSingle { role } => {
            build_single_hypothesis(&spec.name, inputs.corpus, lexicon()?, *role)
        }
        ModelRecipe::NullConcat { anchor, pool, seed } => build_null_hypothesis(
            &spec.name,
            inputs.corpus,
            lexicon()?,
            Some(*anchor),
            pool,
            seed.unwrap_or(default_seed),
        ),
        ModelRecipe::NullSingle { pool, seed } => build_null_hypothesis(
            &spec.name,
            inputs.corpus,
            lexicon()?,
            None,
            pool,
            seed.unwrap_or(default_seed),
        ),
    }
}
