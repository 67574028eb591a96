use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ctxrsa::embedstore::{save_dataset, EmbeddingDataset};
use ctxrsa::grammar::load_corpus;
use ctxrsa::seed::stream_rng;
use ctxrsa::Role;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde_json::Value;

fn ctxrsa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxrsa")).args(args).current_dir(dir).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// PP corpus, planted verb dataset (subject word + 0.5 noise) and lexicon.
fn planted_fixture(dir: &Path) {
    ok(&ctxrsa(&["generate", "--grammar", "builtin:pp", "--count", "600", "--seed", "2", "--out", "corpus.jsonl"], dir));
    ok(&ctxrsa(
        &[
            "synth", "--corpus", "corpus.jsonl", "--out", "planted.emb1", "--lexicon-out", "lexicon.txt",
            "--planted", "subject:verb", "--lexicon-dim", "60", "--noise-dim", "60", "--seed", "5",
        ],
        dir,
    ));
}

const SPEC: &str = r#"
corpus = "corpus.jsonl"
dataset = "planted.emb1"
lexicon = "lexicon.txt"
grammar = "builtin:pp"
out = "results"
reference = { name = "verb", kind = "contextual_role", role = "verb" }

[rsa]
n = 50
m = 50
seed = 11

[[hypotheses]]
name = "subject"
kind = "static_single"
role = "subject"

[[hypotheses]]
name = "non_argument"
kind = "static_single"
role = "non_argument"

[[hypotheses]]
name = "null"
kind = "null_single"
pool = { roles = ["subject", "non_argument"] }

[[hypotheses]]
name = "self"
kind = "contextual_role"
role = "verb"
"#;

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ctxrsa(&["generate", "--grammar", "builtin:rc", "--count", "0", "--out", "empty.jsonl"], d);
    ok(&out);
    assert!(load_corpus(&d.join("empty.jsonl")).unwrap().is_empty());

    let out = ctxrsa(&["generate", "--grammar", "no/such/grammar.json", "--out", "x.jsonl"], d);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("no/such/grammar.json"));

    let out = ok(&ctxrsa(&["generate", "--grammar", "builtin:intransitive", "--exhaustive", "--out", "i.jsonl"], d));
    assert!(out.starts_with("200 sentences"), "{out}");
    assert_eq!(load_corpus(&d.join("i.jsonl")).unwrap().len(), 200);

    let out = ctxrsa(&["generate", "--count", "5"], d);
    assert_eq!(code(&out), 1);
}

#[test]
fn planted_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    planted_fixture(d);
    std::fs::write(d.join("spec.toml"), SPEC).unwrap();
    let table = ok(&ctxrsa(&["run", "--spec", "spec.toml"], d));
    assert!(table.contains("subject vs non_argument"));

    let results = read_json(d.join("results/results.json"));
    let hyps = results["hypotheses"].as_array().unwrap();
    let mean = |name: &str| hyps.iter().find(|h| h["name"] == name).unwrap()["mean"].as_f64().unwrap();
    assert_eq!(mean("self"), 1.0);
    for c in results["comparisons"].as_array().unwrap() {
        if c["first"] == "subject" && c["second"] != "self" {
            assert!(c["p_value"].as_f64().unwrap() < 1e-6, "{c}");
            assert_eq!(c["direction"], "first");
        }
    }
    assert_eq!(results["comparisons"].as_array().unwrap().len(), 6);
    let hist = std::fs::read_to_string(d.join("results/histograms/subject_vs_null.csv")).unwrap();
    assert_eq!(hist.lines().count(), 31);
    assert!(d.join("results/histograms/subject_vs_null.svg").exists());
    let scores = std::fs::read_to_string(d.join("results/scores.csv")).unwrap();
    assert_eq!(scores.lines().count(), 51);
    let log = std::fs::read_to_string(d.join("results/run.log")).unwrap();
    assert!(log.contains("started:"));

    // reruns are byte-identical apart from the log
    let first = std::fs::read(d.join("results/results.json")).unwrap();
    ok(&ctxrsa(&["run", "--spec", "spec.toml", "--out", "again"], d));
    assert_eq!(first, std::fs::read(d.join("again/results.json")).unwrap());
    assert_eq!(scores, std::fs::read_to_string(d.join("again/scores.csv")).unwrap());

    let other = ok(&ctxrsa(&["run", "--spec", "spec.toml", "--out", "seed12", "--seed", "12", "--m", "10"], d));
    assert!(other.contains("m = 10, seed = 12"));
}

#[test]
fn run_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    planted_fixture(d);

    let absent = SPEC.replace("role = \"non_argument\"", "role = \"pronoun\"");
    std::fs::write(d.join("absent.toml"), absent).unwrap();
    let out = ctxrsa(&["run", "--spec", "absent.toml"], d);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("pronoun"), "{}", stderr(&out));

    let wrong_grammar = SPEC.replace("builtin:pp", "builtin:rc");
    std::fs::write(d.join("grammar.toml"), wrong_grammar).unwrap();
    assert_eq!(code(&ctxrsa(&["run", "--spec", "grammar.toml"], d)), 2);

    ok(&ctxrsa(&["generate", "--grammar", "builtin:pp", "--count", "600", "--seed", "3", "--out", "other.jsonl"], d));
    let mismatch = SPEC.replace("corpus.jsonl", "other.jsonl");
    std::fs::write(d.join("mismatch.toml"), mismatch).unwrap();
    let out = ctxrsa(&["run", "--spec", "mismatch.toml"], d);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("fingerprint"));

    std::fs::write(d.join("spec.toml"), SPEC).unwrap();
    assert_eq!(code(&ctxrsa(&["run", "--spec", "spec.toml", "--n", "5000"], d)), 1);
}

fn write_dataset(dir: &Path, name: &str, draw: impl Fn(&mut dyn RngCore) -> f32) {
    let corpus = load_corpus(&dir.join("corpus.jsonl")).unwrap();
    let mut rng = stream_rng(99, 0);
    let mut ds = EmbeddingDataset::new(corpus.fingerprint(), BTreeMap::from([(Role::Verb, 768)]));
    for s in corpus.sentences() {
        ds.insert(s.id, Role::Verb, (0..768).map(|_| draw(&mut rng)).collect()).unwrap();
    }
    save_dataset(&ds, &dir.join(name)).unwrap();
}

#[test]
fn normality_calibration_and_heavy_tails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&ctxrsa(&["generate", "--grammar", "builtin:pp", "--count", "700", "--seed", "4", "--out", "corpus.jsonl"], d));
    write_dataset(d, "normal.emb1", |r| r.sample(StandardNormal));
    write_dataset(d, "heavy.emb1", |r| {
        let x: f32 = r.sample(StandardNormal);
        if r.random::<f32>() < 0.05 { 12.0 * x } else { x }
    });

    ok(&ctxrsa(&["normality", "--dataset", "normal.emb1", "--corpus", "corpus.jsonl", "--out", "n"], d));
    let normal = read_json(d.join("n/normality.json"));
    let f = normal["full_fraction"].as_f64().unwrap();
    assert!((f - 0.05).abs() <= 0.03, "{f}");

    ok(&ctxrsa(&["normality", "--dataset", "heavy.emb1", "--roles", "verb", "--subsample", "200", "--out", "h"], d));
    let heavy = read_json(d.join("h/normality.json"));
    assert!(heavy["full_fraction"].as_f64().unwrap() > 0.95);
    let csv = std::fs::read_to_string(d.join("h/normality.csv")).unwrap();
    assert_eq!(csv.lines().count(), heavy["count"].as_u64().unwrap() as usize + 1);

    let out = ctxrsa(&["normality", "--dataset", "normal.emb1", "--subsample", "769"], d);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("769"));
    assert_eq!(code(&ctxrsa(&["normality", "--dataset", "normal.emb1", "--roles", "subject"], d)), 1);
}

#[test]
fn qq_and_probe_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&ctxrsa(&["generate", "--grammar", "builtin:pp", "--count", "300", "--seed", "6", "--out", "corpus.jsonl"], d));
    ok(&ctxrsa(
        &[
            "synth", "--corpus", "corpus.jsonl", "--out", "g.emb1", "--lexicon-out", "lex.txt",
            "--roles", "verb:48,sentence:48", "--lexicon-dim", "16",
        ],
        d,
    ));
    let csv = ok(&ctxrsa(&["qq", "--dataset", "g.emb1", "--sentence", "0", "--role", "sentence"], d));
    assert_eq!(csv.lines().count(), 49);
    assert_eq!(csv.lines().next().unwrap(), "theoretical,sample");
    ok(&ctxrsa(&["qq", "--dataset", "g.emb1", "--sentence", "0", "--role", "verb", "--out", "qq"], d));
    assert!(d.join("qq/qq_0_verb.svg").exists());
    assert_eq!(code(&ctxrsa(&["qq", "--dataset", "g.emb1", "--sentence", "999999", "--role", "verb"], d)), 2);

    let table = ok(&ctxrsa(
        &[
            "probe", "--corpus", "corpus.jsonl", "--dataset", "g.emb1", "--lexicon", "lex.txt",
            "--target", "verb", "--positive", "subject,non_argument", "--out", "probe",
        ],
        d,
    ));
    assert!(table.contains("majority class"));
    let report = read_json(d.join("probe/probe.json"));
    let entries = report.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        assert!((e["majority_accuracy"].as_f64().unwrap() - 5.0 / 6.0).abs() < 1e-12);
    }
}
