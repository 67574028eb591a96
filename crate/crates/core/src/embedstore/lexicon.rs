use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Word vectors of one fixed dimension, looked up by exact word.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticLexicon {
    source: String,
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

impl StaticLexicon {
    pub fn new(source: impl Into<String>, dim: usize) -> Self {
        StaticLexicon {
            source: source.into(),
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    /// Adds a row; returns false (and keeps the old row) if the word exists.
    pub fn insert(&mut self, word: &str, vector: &[f32]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::config(format!(
                "vector for {word:?} has {} components, lexicon dim is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("non-finite component in vector for {word:?}")));
        }
        if self.index.contains_key(word) {
            return Ok(false);
        }
        self.index.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        self.data.extend_from_slice(vector);
        Ok(true)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Words in file order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, word: &str) -> Result<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
            .ok_or_else(|| Error::MissingWord { word: word.to_string(), sentence: None })
    }

    /// Like [`get`](Self::get), with the sentence id attached to a miss.
    pub fn lookup(&self, word: &str, sentence: u32) -> Result<&[f32]> {
        self.get(word).map_err(|_| Error::MissingWord {
            word: word.to_string(),
            sentence: Some(sentence),
        })
    }
}

/// Parses `word v1 … vd` lines. A leading `count dim` line (word2vec style)
/// is skipped, blank lines are ignored, and a repeated word keeps its first
/// row. With `keep`, only the listed words are stored.
pub fn parse_lexicon<R: Read>(
    input: R,
    source: &str,
    expected_dim: usize,
    keep: Option<&HashSet<String>>,
) -> Result<StaticLexicon> {
    let mut lex = StaticLexicon::new(source, expected_dim);
    let mut row = Vec::with_capacity(expected_dim);
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::LexiconParse { line: lineno, message: e.to_string() })?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();

        if lineno == 1 && rest.len() == 1 && word.parse::<u64>().is_ok() {
            match rest[0].parse::<usize>() {
                Ok(d) if d == expected_dim => continue,
                Ok(d) => {
                    return Err(Error::LexiconParse {
                        line: 1,
                        message: format!("header declares dim {d}, expected {expected_dim}"),
                    })
                }
                Err(_) => {}
            }
        }
        if rest.len() != expected_dim {
            return Err(Error::LexiconParse {
                line: lineno,
                message: format!("{word:?} has {} values, expected {expected_dim}", rest.len()),
            });
        }
        if keep.is_some_and(|k| !k.contains(word)) || lex.contains(word) {
            continue;
        }
        row.clear();
        for v in rest {
            let x: f32 = v.parse().map_err(|_| Error::LexiconParse {
                line: lineno,
                message: format!("bad number {v:?}"),
            })?;
            if !x.is_finite() {
                return Err(Error::LexiconParse {
                    line: lineno,
                    message: format!("non-finite value {v:?}"),
                });
            }
            row.push(x);
        }
        lex.insert(word, &row)?;
    }
    Ok(lex)
}

pub fn load_static_lexicon(
    path: &Path,
    expected_dim: usize,
    keep: Option<&HashSet<String>>,
) -> Result<StaticLexicon> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(file, &path.display().to_string(), expected_dim, keep)
}

/// Writes rows in the text format. Values use the shortest representation
/// that parses back to the same `f32`.
pub fn write_lexicon<W: Write>(lex: &StaticLexicon, mut out: W) -> std::io::Result<()> {
    for word in lex.words() {
        out.write_all(word.as_bytes())?;
        for x in lex.get(word).expect("listed word") {
            write!(out, " {x}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_lines_dim_three() {
        let text = "cat 0.1 0.2 0.3\ndog -1 2.5e-3 4\n";
        let lex = parse_lexicon(text.as_bytes(), "t", 3, None).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.get("dog").unwrap(), &[-1.0, 0.0025, 4.0]);
    }

    #[test]
    fn ragged_line_reports_line_number() {
        let good: String = (0..300).map(|i| format!(" {i}")).collect();
        let short: String = (0..299).map(|i| format!(" {i}")).collect();
        let text = format!("a{good}\nb{short}\n");
        match parse_lexicon(text.as_bytes(), "t", 300, None).unwrap_err() {
            Error::LexiconParse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("299"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn missing_word_is_named() {
        let lex = parse_lexicon("cat 1 2\n".as_bytes(), "t", 2, None).unwrap();
        let err = lex.get("zyzzyva").unwrap_err();
        assert!(err.to_string().contains("zyzzyva"));
        let err = lex.lookup("zyzzyva", 12).unwrap_err();
        assert!(err.to_string().contains("sentence 12"));
    }

    #[test]
    fn header_duplicates_filter_and_blank_lines() {
        let text = "3 2\ncat 1 2\n\ncat 9 9\ndog 3 4\nowl 5 6\n";
        let keep: HashSet<String> = ["cat", "owl"].iter().map(|s| s.to_string()).collect();
        let lex = parse_lexicon(text.as_bytes(), "t", 2, Some(&keep)).unwrap();
        assert_eq!(lex.words(), &["cat", "owl"]);
        assert_eq!(lex.get("cat").unwrap(), &[1.0, 2.0]);
        assert!(parse_lexicon("3 5\ncat 1 2\n".as_bytes(), "t", 2, None).is_err());
        assert!(parse_lexicon("cat 1 nan\n".as_bytes(), "t", 2, None).is_err());
        assert!(parse_lexicon("cat 1 x\n".as_bytes(), "t", 2, None).is_err());
    }

    #[test]
    fn write_then_parse_is_exact() {
        let mut lex = StaticLexicon::new("t", 3);
        lex.insert("a", &[0.1, f32::MIN_POSITIVE, -3.4028235e38]).unwrap();
        lex.insert("b", &[1e-45, 0.333_333_34, 7.0]).unwrap();
        let mut out = Vec::new();
        write_lexicon(&lex, &mut out).unwrap();
        let back = parse_lexicon(out.as_slice(), "t", 3, None).unwrap();
        for w in lex.words() {
            let a: Vec<u32> = lex.get(w).unwrap().iter().map(|x| x.to_bits()).collect();
            let b: Vec<u32> = back.get(w).unwrap().iter().map(|x| x.to_bits()).collect();
            assert_eq!(a, b);
        }
    }
}
