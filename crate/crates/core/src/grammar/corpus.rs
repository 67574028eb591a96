use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::role::Role;

const FORMAT: &str = "ctxrsa-corpus";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleSlot {
    pub index: u32,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedSentence {
    pub id: u32,
    pub tokens: Vec<String>,
    pub roles: BTreeMap<Role, RoleSlot>,
    pub template_id: String,
}

impl AnnotatedSentence {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn role_word(&self, role: Role) -> Result<&str> {
        self.roles
            .get(&role)
            .map(|s| s.word.as_str())
            .ok_or(Error::MissingRole { sentence: self.id, role })
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.tokens.is_empty() {
            return Err(format!("sentence {} has no tokens", self.id));
        }
        for (role, slot) in &self.roles {
            if *role == Role::Sentence {
                return Err(format!("sentence {}: the sentence role cannot index a token", self.id));
            }
            match self.tokens.get(slot.index as usize) {
                None => {
                    return Err(format!(
                        "sentence {}: role {role} index {} is past the end ({} tokens)",
                        self.id,
                        slot.index,
                        self.tokens.len()
                    ))
                }
                Some(tok) if *tok != slot.word => {
                    return Err(format!(
                        "sentence {}: role {role} word {:?} does not match token {tok:?}",
                        self.id, slot.word
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// An immutable list of annotated sentences tied to the grammar that made them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    grammar_fingerprint: Fingerprint,
    seed: Option<u64>,
    sentences: Vec<AnnotatedSentence>,
    index: BTreeMap<u32, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    grammar_fingerprint: Fingerprint,
    seed: Option<u64>,
    count: usize,
}

impl Corpus {
    pub fn new(
        grammar_fingerprint: Fingerprint,
        seed: Option<u64>,
        sentences: Vec<AnnotatedSentence>,
    ) -> Result<Self> {
        Self::build(grammar_fingerprint, seed, sentences)
            .map_err(|(pos, message)| Error::Corpus { line: pos + 2, message })
    }

    // errors carry the position of the offending sentence
    fn build(
        grammar_fingerprint: Fingerprint,
        seed: Option<u64>,
        sentences: Vec<AnnotatedSentence>,
    ) -> std::result::Result<Self, (usize, String)> {
        let mut index = BTreeMap::new();
        let mut seen = HashSet::new();
        for (pos, s) in sentences.iter().enumerate() {
            s.check().map_err(|m| (pos, m))?;
            if index.insert(s.id, pos).is_some() {
                return Err((pos, format!("duplicate sentence id {}", s.id)));
            }
            if !seen.insert(&s.tokens) {
                return Err((pos, format!("sentence {} repeats an earlier token sequence", s.id)));
            }
        }
        Ok(Corpus { grammar_fingerprint, seed, sentences, index })
    }

    pub fn grammar_fingerprint(&self) -> Fingerprint {
        self.grammar_fingerprint
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn sentences(&self) -> &[AnnotatedSentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&AnnotatedSentence> {
        self.index.get(&id).map(|&i| &self.sentences[i])
    }

    /// Position of sentence `id` in corpus order.
    pub fn position(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Roles present in at least one sentence.
    pub fn roles(&self) -> Vec<Role> {
        let set: std::collections::BTreeSet<Role> =
            self.sentences.iter().flat_map(|s| s.roles.keys().copied()).collect();
        set.into_iter().collect()
    }

    /// Keeps the first sentence of every token sequence. Loaded and generated
    /// corpora are already free of repeats, so this returns an equal corpus.
    pub fn deduplicated(&self) -> Corpus {
        let mut seen = HashSet::new();
        let kept: Vec<AnnotatedSentence> = self
            .sentences
            .iter()
            .filter(|s| seen.insert(s.tokens.clone()))
            .cloned()
            .collect();
        Corpus::new(self.grammar_fingerprint, self.seed, kept).expect("subset of a valid corpus")
    }

    /// Canonical file bytes: the header line then one line per sentence.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        write_corpus(self, &mut out).expect("writing to memory");
        out
    }

    /// Hash of the canonical file bytes; embedding datasets are keyed by it.
    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::of(&self.to_bytes())
    }
}

pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    let header = Header {
        format: FORMAT.into(),
        version: VERSION,
        grammar_fingerprint: corpus.grammar_fingerprint,
        seed: corpus.seed,
        count: corpus.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for s in &corpus.sentences {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_corpus<R: Read>(input: R) -> Result<Corpus> {
    let err = |line: usize, message: String| Error::Corpus { line, message };
    let mut lines = BufReader::new(input).lines();
    let header_text = match lines.next() {
        Some(l) => l.map_err(|e| err(1, e.to_string()))?,
        None => return Err(err(1, "empty file, expected a header record".into())),
    };
    let header: Header =
        serde_json::from_str(&header_text).map_err(|e| err(1, format!("header: {e}")))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(err(
            1,
            format!("unsupported format {:?} version {}", header.format, header.version),
        ));
    }

    let mut sentences = Vec::with_capacity(header.count);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let text = line.map_err(|e| err(lineno, e.to_string()))?;
        if text.trim().is_empty() {
            continue;
        }
        let s: AnnotatedSentence = serde_json::from_str(&text).map_err(|e| err(lineno, e.to_string()))?;
        sentences.push((lineno, s));
    }
    if sentences.len() != header.count {
        return Err(err(
            1,
            format!("header declares {} sentences, file has {}", header.count, sentences.len()),
        ));
    }
    let linenos: Vec<usize> = sentences.iter().map(|(l, _)| *l).collect();
    let sentences = sentences.into_iter().map(|(_, s)| s).collect();
    Corpus::build(header.grammar_fingerprint, header.seed, sentences)
        .map_err(|(pos, message)| err(linenos[pos], message))
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(corpus, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(file)
}
