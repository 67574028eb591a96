use std::collections::HashSet;
use std::path::{Path, PathBuf};

use ctxrsa::geometry::ConstantPolicy;
use ctxrsa::models::ModelSpec;
use ctxrsa::rsa::RsaConfig;
use ctxrsa::{Error, Result};
use serde::Deserialize;

/// A run specification. Relative paths resolve against the spec file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub corpus: PathBuf,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    /// Inferred from the first row when absent.
    #[serde(default)]
    pub lexicon_dim: Option<usize>,
    /// When set, the corpus must have been generated from this grammar.
    #[serde(default)]
    pub grammar: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub reference: ModelSpec,
    pub hypotheses: Vec<ModelSpec>,
    pub rsa: RsaSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsaSection {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub policy: ConstantPolicy,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec: ExperimentSpec =
            toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() && !p.starts_with("builtin:") {
                *p = base.join(&*p);
            }
        };
        resolve(&mut spec.corpus);
        spec.dataset.as_mut().map(resolve);
        spec.lexicon.as_mut().map(resolve);
        spec.grammar.as_mut().map(resolve);
        spec.out.as_mut().map(resolve);
        spec.check_names()?;
        Ok(spec)
    }

    fn check_names(&self) -> Result<()> {
        if self.hypotheses.is_empty() {
            return Err(Error::config("spec lists no hypotheses"));
        }
        let mut seen = HashSet::new();
        for h in &self.hypotheses {
            if h.name.is_empty() || !seen.insert(h.name.as_str()) {
                return Err(Error::config(format!("hypothesis name {:?} is empty or repeated", h.name)));
            }
        }
        Ok(())
    }

    pub fn rsa_config(&self, o: Overrides) -> Result<RsaConfig> {
        let need = |v: Option<usize>, what: &str| v.ok_or_else(|| Error::config(format!("rsa.{what} is not set")));
        Ok(RsaConfig {
            n: need(o.n.or(self.rsa.n), "n")?,
            m: need(o.m.or(self.rsa.m), "m")?,
            seed: o.seed.or(self.rsa.seed).ok_or_else(|| Error::config("rsa.seed is not set"))?,
            policy: self.rsa.policy,
        })
    }
}
