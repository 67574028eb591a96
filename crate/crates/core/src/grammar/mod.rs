//! Weighted template grammars and the role-annotated corpora they generate.
//!
//! A grammar is a list of flat templates. Each slot is either a literal
//! token or a draw from a named vocabulary class, optionally tagged with a
//! [`Role`]. Templates carry two kinds of constraint: number agreement
//! between slots (enforced while drawing) and slot inequality (filtered
//! after drawing).

mod builtin;
mod corpus;
mod generate;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use builtin::{builtin_grammar, BUILTIN_GRAMMARS};
pub use corpus::{load_corpus, read_corpus, save_corpus, write_corpus, AnnotatedSentence, Corpus, RoleSlot};
pub use generate::{enumerate_corpus, generate_corpus, DEFAULT_ENUMERATION_LIMIT};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::role::Role;

/// Syntactic number carried by a vocabulary word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Number {
    #[serde(rename = "sg")]
    Singular,
    #[serde(rename = "pl")]
    Plural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "WordEntry")]
pub struct Word {
    pub word: String,
    pub number: Option<Number>,
    pub weight: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WordEntry {
    Plain(String),
    Full {
        word: String,
        #[serde(default)]
        number: Option<Number>,
        #[serde(default = "one")]
        weight: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl From<WordEntry> for Word {
    fn from(e: WordEntry) -> Self {
        match e {
            WordEntry::Plain(word) => Word { word, number: None, weight: 1.0 },
            WordEntry::Full { word, number, weight } => Word { word, number, weight },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slot {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    /// Handle used by constraints; defaults to the role name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
}

impl Slot {
    pub fn handle(&self) -> Option<String> {
        self.name
            .clone()
            .or_else(|| self.role.map(|r| r.as_str().to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub id: String,
    #[serde(default = "one")]
    pub weight: f64,
    pub slots: Vec<Slot>,
    /// Groups of slot handles whose number-marked words must share a number.
    #[serde(default)]
    pub agree: Vec<Vec<String>>,
    /// Groups of slot handles that must hold pairwise distinct words.
    #[serde(default)]
    pub distinct: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateGrammar {
    pub name: String,
    pub templates: Vec<Template>,
    pub vocabularies: BTreeMap<String, Vec<Word>>,
}

impl TemplateGrammar {
    pub fn from_json(text: &str) -> Result<Self> {
        let g: TemplateGrammar =
            serde_json::from_str(text).map_err(|e| Error::Grammar(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    /// Reads a grammar file, or a shipped grammar given as `builtin:<name>`.
    pub fn load(path: &Path) -> Result<Self> {
        if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("builtin:")) {
            let text = builtin_grammar(name)
                .ok_or_else(|| Error::config(format!("no builtin grammar named {name:?}")))?;
            return Self::from_json(text);
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Hash of the canonical JSON form.
    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::of(&serde_json::to_vec(self).expect("grammar serializes"))
    }

    pub fn template(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }

    /// Distinct words of `class`, in vocabulary order.
    pub fn class_words(&self, class: &str) -> Vec<String> {
        self.vocabularies
            .get(class)
            .map(|ws| ws.iter().map(|w| w.word.clone()).collect())
            .unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Grammar(format!("{}: {msg}", self.name)));

        if self.templates.is_empty() {
            return bad("no templates".into());
        }
        let mut owner: HashMap<&str, &str> = HashMap::new();
        for (class, words) in &self.vocabularies {
            for w in words {
                if w.word.is_empty() || w.word.chars().any(char::is_whitespace) {
                    return bad(format!("class {class}: invalid word {:?}", w.word));
                }
                if !(w.weight.is_finite() && w.weight > 0.0) {
                    return bad(format!("word {:?} has non-positive weight", w.word));
                }
                if let Some(prev) = owner.insert(&w.word, class) {
                    return bad(format!("word {:?} appears in {prev} and {class}", w.word));
                }
            }
        }

        let mut ids = HashSet::new();
        for t in &self.templates {
            if !ids.insert(&t.id) {
                return bad(format!("duplicate template id {:?}", t.id));
            }
            if !(t.weight.is_finite() && t.weight > 0.0) {
                return bad(format!("template {} has non-positive weight", t.id));
            }
            if t.slots.is_empty() {
                return bad(format!("template {} has no slots", t.id));
            }
            let mut handles: HashMap<String, usize> = HashMap::new();
            let mut roles = HashSet::new();
            for (i, s) in t.slots.iter().enumerate() {
                match (&s.literal, &s.class) {
                    (Some(lit), None) => {
                        if s.role.is_some() || lit.is_empty() || lit.chars().any(char::is_whitespace) {
                            return bad(format!("template {} slot {i}: invalid literal", t.id));
                        }
                    }
                    (None, Some(class)) => match self.vocabularies.get(class) {
                        Some(words) if !words.is_empty() => {}
                        _ => return bad(format!("template {}: class {class:?} has no words", t.id)),
                    },
                    _ => {
                        return bad(format!(
                            "template {} slot {i}: exactly one of literal/class required",
                            t.id
                        ))
                    }
                }
                if let Some(role) = s.role {
                    if role == Role::Sentence {
                        return bad(format!("template {}: sentence role cannot tag a slot", t.id));
                    }
                    if !roles.insert(role) {
                        return bad(format!("template {}: role {role} used twice", t.id));
                    }
                }
                if let Some(h) = s.handle() {
                    if handles.insert(h.clone(), i).is_some() {
                        return bad(format!("template {}: slot handle {h:?} used twice", t.id));
                    }
                }
            }
            let resolve = |h: &String| -> Result<usize> {
                match handles.get(h) {
                    Some(&i) if t.slots[i].class.is_some() => Ok(i),
                    _ => Err(Error::Grammar(format!(
                        "{}: template {}: constraint names unknown slot {h:?}",
                        self.name, t.id
                    ))),
                }
            };
            let mut in_group = HashSet::new();
            for group in &t.agree {
                let slots: Vec<usize> = group.iter().map(resolve).collect::<Result<_>>()?;
                for &i in &slots {
                    if !in_group.insert(i) {
                        return bad(format!("template {}: slot {i} in two agreement groups", t.id));
                    }
                }
                if generate::feasible_numbers(self, t, &slots).is_empty() {
                    return bad(format!("template {}: agreement group {group:?} unsatisfiable", t.id));
                }
            }
            for group in &t.distinct {
                for h in group {
                    resolve(h)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const TOY: &str = r#"{
        "name": "toy",
        "templates": [{
            "id": "pair",
            "slots": [
                {"literal": "the"},
                {"class": "noun", "role": "subject"},
                {"literal": "and"},
                {"literal": "the"},
                {"class": "noun", "role": "non_argument"}
            ],
            "agree": [["subject", "non_argument"]],
            "distinct": [["subject", "non_argument"]]
        }],
        "vocabularies": {
            "noun": [
                {"word": "cat", "number": "sg"},
                {"word": "dog", "number": "sg"},
                {"word": "cats", "number": "pl"}
            ]
        }
    }"#;

    #[test]
    fn parses_and_fingerprints() {
        let g = TemplateGrammar::from_json(TOY).unwrap();
        assert_eq!(g.templates[0].slots.len(), 5);
        assert_eq!(g.fingerprint(), TemplateGrammar::from_json(TOY).unwrap().fingerprint());
        let mut g2 = g.clone();
        g2.vocabularies.get_mut("noun").unwrap()[0].weight = 2.0;
        assert_ne!(g.fingerprint(), g2.fingerprint());
    }

    #[test]
    fn plain_word_shorthand() {
        let text = TOY.replace(
            r#""noun": ["#,
            r#""extra": ["x", "y"], "noun": ["#,
        );
        let g = TemplateGrammar::from_json(&text).unwrap();
        assert_eq!(g.class_words("extra"), vec!["x", "y"]);
        assert_eq!(g.vocabularies["extra"][0].number, None);
    }

    #[test]
    fn rejects_empty_class() {
        let text = TOY.replace(r#""class": "noun", "role": "subject""#, r#""class": "verb", "role": "subject""#);
        let err = TemplateGrammar::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("verb"), "{err}");
    }

    #[test]
    fn rejects_shared_word_and_bad_weight() {
        let text = TOY.replace(r#""noun": ["#, r#""other": ["cat"], "noun": ["#);
        assert!(TemplateGrammar::from_json(&text).is_err());
        let text = TOY.replace(r#""id": "pair","#, r#""id": "pair", "weight": 0,"#);
        assert!(TemplateGrammar::from_json(&text).is_err());
        let text = TOY.replace(r#"{"word": "cat", "number": "sg"}"#, r#"{"word": "cat", "number": "sg", "weight": -1}"#);
        assert!(TemplateGrammar::from_json(&text).is_err());
    }

    #[test]
    fn rejects_unknown_constraint_handle_and_duplicate_role() {
        let text = TOY.replace(r#""distinct": [["subject", "non_argument"]]"#, r#""distinct": [["subject", "object"]]"#);
        assert!(TemplateGrammar::from_json(&text).is_err());
        let text = TOY.replace(r#""role": "non_argument""#, r#""role": "subject""#);
        assert!(TemplateGrammar::from_json(&text).is_err());
    }

    #[test]
    fn builtin_prefix_loads() {
        let g = TemplateGrammar::load(Path::new("builtin:intransitive")).unwrap();
        assert_eq!(g.name, "intransitive");
        assert!(TemplateGrammar::load(Path::new("builtin:nope")).is_err());
    }
}
