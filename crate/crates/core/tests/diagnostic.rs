use std::collections::BTreeMap;

use ctxrsa::diagnostic::{build_probe_dataset, train_probe, ProbeConfig, ProbeInstance};
use ctxrsa::grammar::{generate_corpus, Corpus, TemplateGrammar};
use ctxrsa::seed::stream_rng;
use ctxrsa::synth::{corpus_vocabulary, gaussian_dataset, gaussian_lexicon};
use ctxrsa::{Error, Role};
use rand::seq::SliceRandom;

fn corpus(name: &str, count: usize) -> Corpus {
    let g = TemplateGrammar::load(format!("builtin:{name}").as_ref()).unwrap();
    generate_corpus(&g, count, 11).unwrap()
}

fn instances(c: &Corpus, target: Role, positive: Role) -> Vec<ProbeInstance> {
    let lex = gaussian_lexicon(&corpus_vocabulary(c), 16, 1).unwrap();
    let ds = gaussian_dataset(c, &BTreeMap::from([(target, 24)]), 2).unwrap();
    build_probe_dataset(c, &ds, &lex, target, positive).unwrap()
}

fn check_shape(c: &Corpus, inst: &[ProbeInstance], per_sentence: usize) {
    assert_eq!(inst.len(), c.len() * per_sentence);
    for s in c.sentences() {
        let mine: Vec<_> = inst.iter().filter(|i| i.sentence == s.id).collect();
        assert_eq!(mine.len(), per_sentence);
        assert_eq!(mine.iter().filter(|i| i.label).count(), 1);
        assert!(mine.iter().all(|i| i.features.len() == 40));
    }
}

#[test]
fn pp_verb_probe_has_six_candidates() {
    let c = corpus("pp", 300);
    let inst = instances(&c, Role::Verb, Role::Subject);
    check_shape(&c, &inst, 6);
    for s in c.sentences() {
        let pos = inst.iter().find(|i| i.sentence == s.id && i.label).unwrap();
        assert_eq!(pos.word, s.role_word(Role::Subject).unwrap());
        assert!(inst.iter().filter(|i| i.sentence == s.id).all(|i| i.word != s.role_word(Role::Verb).unwrap()));
    }
    let r = train_probe(&inst, &ProbeConfig::default()).unwrap();
    assert!((r.majority_accuracy - 5.0 / 6.0).abs() < 1e-12);
    assert_eq!(r.test_instances, (c.len() as f64 * 0.2).round() as usize * 6);
}

#[test]
fn rc_and_coreference_probes_have_seven_candidates() {
    for (name, target, positive) in [
        ("rc", Role::Verb, Role::NonArgument),
        ("reflexive", Role::Pronoun, Role::Antecedent),
        ("pronominal", Role::Pronoun, Role::NonAntecedent),
    ] {
        let c = corpus(name, 200);
        let inst = instances(&c, target, positive);
        check_shape(&c, &inst, 7);
        let r = train_probe(&inst, &ProbeConfig::default()).unwrap();
        assert!((r.majority_accuracy - 6.0 / 7.0).abs() < 1e-12, "{name}");
    }
}

#[test]
fn shuffled_labels_stay_at_majority() {
    let c = corpus("pp", 400);
    let base = instances(&c, Role::Verb, Role::Subject);
    for seed in 0..20 {
        let mut labels: Vec<bool> = base.iter().map(|i| i.label).collect();
        labels.shuffle(&mut stream_rng(seed, 1));
        let shuffled: Vec<ProbeInstance> =
            base.iter().zip(labels).map(|(i, label)| ProbeInstance { label, ..i.clone() }).collect();
        let r = train_probe(&shuffled, &ProbeConfig { split_seed: seed, ..Default::default() }).unwrap();
        assert!((r.accuracy - r.majority_accuracy).abs() <= 0.03, "seed {seed}: {r:?}");
    }
}

#[test]
fn missing_inputs_are_reported() {
    let c = corpus("pp", 20);
    let mut words = corpus_vocabulary(&c);
    words.retain(|w| w != "the");
    let lex = gaussian_lexicon(&words, 4, 1).unwrap();
    let ds = gaussian_dataset(&c, &BTreeMap::from([(Role::Verb, 4)]), 2).unwrap();
    match build_probe_dataset(&c, &ds, &lex, Role::Verb, Role::Subject) {
        Err(Error::MissingWord { word, sentence }) => {
            assert_eq!(word, "the");
            assert_eq!(sentence, Some(c.sentences()[0].id));
        }
        other => panic!("{other:?}"),
    }
    let full = gaussian_lexicon(&corpus_vocabulary(&c), 4, 1).unwrap();
    let subj_only = gaussian_dataset(&c, &BTreeMap::from([(Role::Subject, 4)]), 2).unwrap();
    assert!(matches!(
        build_probe_dataset(&c, &subj_only, &full, Role::Verb, Role::Subject),
        Err(Error::MissingRecord { role: Role::Verb, .. })
    ));
    assert!(matches!(
        build_probe_dataset(&c, &ds, &full, Role::Pronoun, Role::Subject),
        Err(Error::MissingRole { role: Role::Pronoun, .. })
    ));
}
