/// Grammars shipped with the crate, addressable as `builtin:<name>`.
pub const BUILTIN_GRAMMARS: &[(&str, &str)] = &[
    ("pp", include_str!("../../grammars/pp.json")),
    ("rc", include_str!("../../grammars/rc.json")),
    ("reflexive", include_str!("../../grammars/reflexive.json")),
    ("pronominal", include_str!("../../grammars/pronominal.json")),
    ("intransitive", include_str!("../../grammars/intransitive.json")),
    ("intransitive_adj", include_str!("../../grammars/intransitive_adj.json")),
    ("transitive", include_str!("../../grammars/transitive.json")),
    ("transitive_adj", include_str!("../../grammars/transitive_adj.json")),
];

pub fn builtin_grammar(name: &str) -> Option<&'static str> {
    BUILTIN_GRAMMARS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
