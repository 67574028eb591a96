use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Annotated position labels shared by every sentence family.
///
/// `Sentence` is synthetic: it names the whole-sentence ([CLS]) vector and
/// never points at a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Verb,
    Subject,
    NonArgument,
    Pronoun,
    Antecedent,
    NonAntecedent,
    Object,
    SubjAdj,
    ObjAdj,
    Sentence,
}

impl Role {
    pub const ALL: [Role; 10] = [
        Role::Verb,
        Role::Subject,
        Role::NonArgument,
        Role::Pronoun,
        Role::Antecedent,
        Role::NonAntecedent,
        Role::Object,
        Role::SubjAdj,
        Role::ObjAdj,
        Role::Sentence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Verb => "verb",
            Role::Subject => "subject",
            Role::NonArgument => "non_argument",
            Role::Pronoun => "pronoun",
            Role::Antecedent => "antecedent",
            Role::NonAntecedent => "non_antecedent",
            Role::Object => "object",
            Role::SubjAdj => "subj_adj",
            Role::ObjAdj => "obj_adj",
            Role::Sentence => "sentence",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown role {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for role in Role::ALL {
            assert_eq!(role.as_str().parse::<Role>().unwrap(), role);
            let json = serde_json::to_string(&role).unwrap();
            assert_eq!(json, format!("\"{}\"", role.as_str()));
        }
        assert!("cls".parse::<Role>().is_err());
    }
}
