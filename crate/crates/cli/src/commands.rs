use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use ctxrsa::diagnostic::{build_probe_dataset, train_probe, ProbeConfig, ProbeReport};
use ctxrsa::embedstore::{load_dataset, load_static_lexicon, save_dataset, write_lexicon, StaticLexicon};
use ctxrsa::grammar::{enumerate_corpus, generate_corpus, load_corpus, save_corpus, Corpus, TemplateGrammar};
use ctxrsa::models::{build_model, DistractorPool, ModelInputs, ModelRecipe, ModelSpec};
use ctxrsa::rsa::{check_corpus_alignment, run_rsa, scores_csv, RsaConfig, RsaReport};
use ctxrsa::stats::{normality_report, qq_points, z_normalize, NormalityReport};
use ctxrsa::synth::{corpus_vocabulary, gaussian_dataset, gaussian_lexicon, planted_dataset};
use ctxrsa::{Error, Fingerprint, Result, Role};
use serde::Serialize;

use crate::spec::{ExperimentSpec, Overrides};

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn file_safe(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn generate(grammar: &Path, count: usize, seed: u64, exhaustive: bool, limit: u64, out: &Path) -> Result<()> {
    let g = TemplateGrammar::load(grammar)?;
    let corpus = if exhaustive { enumerate_corpus(&g, limit)? } else { generate_corpus(&g, count, seed)? };
    save_corpus(&corpus, out)?;
    if exhaustive {
        println!("{} sentences (exhaustive) written to {}", corpus.len(), out.display());
    } else {
        println!("{} sentences ({count} requested) written to {}", corpus.len(), out.display());
    }
    Ok(())
}

/// Reads the first data row to find the vector length; a word2vec
/// `count dim` header answers directly.
fn sniff_lexicon_dim(path: &Path) -> Result<usize> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.len() {
            0 => continue,
            2 if fields[0].parse::<u64>().is_ok() => {
                if let Ok(d) = fields[1].parse() {
                    return Ok(d);
                }
            }
            _ => {}
        }
        return Ok(fields.len() - 1);
    }
    Err(Error::config(format!("{}: lexicon is empty", path.display())))
}

/// Loads only the words a run can touch: the corpus vocabulary plus any
/// explicitly listed pool words.
fn load_lexicon_for(path: &Path, dim: Option<usize>, corpus: &Corpus, extra: &[String]) -> Result<StaticLexicon> {
    let dim = match dim {
        Some(d) => d,
        None => sniff_lexicon_dim(path)?,
    };
    let mut keep: HashSet<String> = corpus_vocabulary(corpus).into_iter().collect();
    keep.extend(extra.iter().cloned());
    load_static_lexicon(path, dim, Some(&keep))
}

#[derive(Serialize)]
struct RunResults<'a> {
    corpus_fingerprint: Fingerprint,
    dataset_fingerprint: Option<Fingerprint>,
    models: Vec<ModelEcho<'a>>,
    #[serde(flatten)]
    report: &'a RsaReport,
}

#[derive(Serialize)]
struct ModelEcho<'a> {
    name: &'a str,
    dim: usize,
    #[serde(flatten)]
    recipe: Option<&'a ModelRecipe>,
}

pub fn run(spec_path: &Path, overrides: Overrides, out: Option<PathBuf>) -> Result<PathBuf> {
    let spec = ExperimentSpec::load(spec_path)?;
    let config: RsaConfig = spec.rsa_config(overrides)?;
    let out = out.or(spec.out.clone()).ok_or_else(|| Error::config("no output directory (set `out` or pass --out)"))?;

    let corpus = load_corpus(&spec.corpus)?;
    if let Some(g) = &spec.grammar {
        let g = TemplateGrammar::load(g)?;
        if g.fingerprint() != corpus.grammar_fingerprint() {
            return Err(Error::FingerprintMismatch {
                expected: g.fingerprint().to_hex(),
                found: corpus.grammar_fingerprint().to_hex(),
            });
        }
    }
    config.validate(corpus.len())?;

    let all: Vec<&ModelSpec> = std::iter::once(&spec.reference).chain(&spec.hypotheses).collect();
    for m in &all {
        m.recipe.check_roles(&corpus)?;
    }
    let dataset = spec.dataset.as_deref().map(load_dataset).transpose()?;
    if let Some(ds) = &dataset {
        ds.validate_against(&corpus)?;
    }
    let pool_words: Vec<String> = all
        .iter()
        .flat_map(|m| match &m.recipe {
            ModelRecipe::NullConcat { pool: DistractorPool::Words(w), .. }
            | ModelRecipe::NullSingle { pool: DistractorPool::Words(w), .. } => w.clone(),
            _ => Vec::new(),
        })
        .collect();
    let lexicon = spec
        .lexicon
        .as_deref()
        .map(|p| load_lexicon_for(p, spec.lexicon_dim, &corpus, &pool_words))
        .transpose()?;

    let inputs = ModelInputs { corpus: &corpus, dataset: dataset.as_ref(), lexicon: lexicon.as_ref() };
    let reference = build_model(&spec.reference, &inputs, config.seed)?;
    let hypotheses = spec.hypotheses.iter().map(|h| build_model(h, &inputs, config.seed)).collect::<Result<Vec<_>>>()?;
    let hyp_refs: Vec<_> = hypotheses.iter().collect();
    let mut aligned = vec![&reference];
    aligned.extend(&hyp_refs);
    check_corpus_alignment(&corpus, &aligned)?;

    let series = run_rsa(&reference, &hyp_refs, &config)?;
    let report = RsaReport::build(reference.name(), &series, config)?;

    create_dir(&out)?;
    let hist_dir = out.join("histograms");
    create_dir(&hist_dir)?;
    let models = aligned.iter().map(|m| ModelEcho { name: m.name(), dim: m.dim(), recipe: m.recipe() }).collect();
    let results = RunResults {
        corpus_fingerprint: corpus.fingerprint(),
        dataset_fingerprint: dataset.as_ref().map(|d| d.fingerprint()),
        models,
        report: &report,
    };
    write(&out.join("results.json"), to_json(&results))?;
    write(&out.join("scores.csv"), scores_csv(&series))?;
    let table = report.table();
    write(&out.join("table.txt"), &table)?;
    for c in &report.comparisons {
        let stem = format!("{}_vs_{}", file_safe(&c.result.first), file_safe(&c.result.second));
        write(&hist_dir.join(format!("{stem}.csv")), c.histogram.to_csv())?;
        let title = format!("{} − {}", c.result.first, c.result.second);
        write(&hist_dir.join(format!("{stem}.svg")), c.histogram.to_svg(&title))?;
    }
    print!("{table}");
    Ok(out)
}

pub struct NormalityArgs {
    pub dataset: PathBuf,
    pub corpus: Option<PathBuf>,
    pub roles: Vec<Role>,
    pub subsample: Option<usize>,
    pub seed: u64,
    pub alpha: f64,
    pub out: Option<PathBuf>,
}

fn normality_summary(report: &NormalityReport, roles: &[Role]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "alpha {}  (non-normal fraction; full / subsampled)", report.alpha);
    for &role in roles {
        let rows: Vec<_> = report.embeddings.iter().filter(|e| e.role == role).collect();
        let full = rows.iter().filter(|e| e.full.is_non_normal(report.alpha)).count();
        let _ = write!(s, "  {:<16} {:>6} embeddings  {:.4}", role.as_str(), rows.len(), full as f64 / rows.len().max(1) as f64);
        if report.subsample.is_some() {
            let sampled = rows.iter().filter(|e| e.sampled.is_some_and(|x| x.is_non_normal(report.alpha))).count();
            let _ = write!(s, " / {:.4}", sampled as f64 / rows.len().max(1) as f64);
        }
        s.push('\n');
    }
    let _ = write!(s, "  {:<16} {:>6} embeddings  {:.4}", "all", report.count, report.full_fraction);
    if let Some(f) = report.sampled_fraction {
        let _ = write!(s, " / {f:.4}");
    }
    s.push('\n');
    s
}

pub fn normality(args: NormalityArgs) -> Result<Option<PathBuf>> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::config(format!("alpha {} outside (0, 1)", args.alpha)));
    }
    let dataset = load_dataset(&args.dataset)?;
    if let Some(c) = &args.corpus {
        dataset.validate_against(&load_corpus(c)?)?;
    }
    let roles: Vec<Role> = if args.roles.is_empty() { dataset.dims().keys().copied().collect() } else { args.roles };
    for &role in &roles {
        let dim = dataset
            .dim(role)
            .ok_or_else(|| Error::config(format!("dataset has no {role} embeddings")))?;
        if let Some(k) = args.subsample {
            if k as u32 > dim {
                return Err(Error::config(format!("subsample size {k} exceeds the {dim} dimensions of {role}")));
            }
        }
    }
    let wanted: HashSet<Role> = roles.iter().copied().collect();
    let report = normality_report(
        dataset.iter().filter(|((_, r), _)| wanted.contains(r)).map(|((s, r), v)| (s, r, v)),
        args.subsample,
        args.alpha,
        args.seed,
    )?;
    print!("{}", normality_summary(&report, &roles));
    if let Some(out) = &args.out {
        create_dir(out)?;
        write(&out.join("normality.json"), to_json(&report))?;
        write(&out.join("normality.csv"), report.to_csv())?;
    }
    Ok(args.out)
}

pub struct ProbeArgs {
    pub corpus: PathBuf,
    pub dataset: PathBuf,
    pub lexicon: PathBuf,
    pub lexicon_dim: Option<usize>,
    pub target: Role,
    pub positives: Vec<Role>,
    pub config: ProbeConfig,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ProbeEntry {
    target: Role,
    positive: Role,
    #[serde(flatten)]
    report: ProbeReport,
}

pub fn probe(args: ProbeArgs) -> Result<Option<PathBuf>> {
    if args.positives.is_empty() {
        return Err(Error::config("no positive roles given"));
    }
    let corpus = load_corpus(&args.corpus)?;
    let dataset = load_dataset(&args.dataset)?;
    dataset.validate_against(&corpus)?;
    let lexicon = load_lexicon_for(&args.lexicon, args.lexicon_dim, &corpus, &[])?;
    let entries = args
        .positives
        .iter()
        .map(|&positive| {
            let instances = build_probe_dataset(&corpus, &dataset, &lexicon, args.target, positive)?;
            let report = train_probe(&instances, &args.config)?;
            Ok(ProbeEntry { target: args.target, positive, report })
        })
        .collect::<Result<Vec<_>>>()?;

    println!("{:<28} {:>9} {:>9} {:>9}", format!("probe on {}", args.target), "accuracy", "precision", "recall");
    for e in &entries {
        let flag = if e.report.no_positive_predictions { "  (no positive predictions)" } else { "" };
        println!(
            "{:<28} {:>9.3} {:>9.3} {:>9.3}{flag}",
            e.positive.as_str(),
            e.report.accuracy,
            e.report.precision,
            e.report.recall
        );
    }
    println!("{:<28} {:>9.3}", "majority class", entries[0].report.majority_accuracy);
    if let Some(out) = &args.out {
        create_dir(out)?;
        write(&out.join("probe.json"), to_json(&entries))?;
    }
    Ok(args.out)
}

fn qq_svg(points: &[(f64, f64)], title: &str) -> String {
    let (w, h, pad) = (480.0, 480.0, 40.0);
    let lo = points.iter().flat_map(|&(a, b)| [a, b]).fold(f64::INFINITY, f64::min);
    let hi = points.iter().flat_map(|&(a, b)| [a, b]).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = |v: f64| pad + (w - 2.0 * pad) * (v - lo) / span;
    let y = |v: f64| h - pad - (h - 2.0 * pad) * (v - lo) / span;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"#, w / 2.0);
    let _ = writeln!(s, r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c44e52"/>"##, x(lo), y(lo), x(hi), y(hi));
    for &(t, v) in points {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="#4c72b0"/>"##, x(t), y(v));
    }
    s.push_str("</svg>\n");
    s
}

/// Q-Q data for one z-normalized embedding.
pub fn qq(dataset: &Path, sentence: u32, role: Role, out: Option<PathBuf>) -> Result<Option<PathBuf>> {
    let ds = load_dataset(dataset)?;
    let v = ds.get(sentence, role).ok_or(Error::MissingRecord { sentence, role })?;
    let z = z_normalize(&v.iter().map(|&x| f64::from(x)).collect::<Vec<_>>())?;
    let points = qq_points(&z)?;
    let mut csv = String::from("theoretical,sample\n");
    for (t, s) in &points {
        let _ = writeln!(csv, "{t},{s}");
    }
    match &out {
        Some(dir) => {
            create_dir(dir)?;
            let stem = format!("qq_{sentence}_{role}");
            write(&dir.join(format!("{stem}.csv")), &csv)?;
            write(&dir.join(format!("{stem}.svg")), qq_svg(&points, &format!("sentence {sentence}, {role}")))?;
            println!("wrote {} points to {}", points.len(), dir.display());
        }
        None => print!("{csv}"),
    }
    Ok(out)
}

pub struct SynthArgs {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub lexicon_out: Option<PathBuf>,
    pub lexicon_dim: usize,
    pub roles: Vec<(Role, u32)>,
    pub planted: Option<(Role, Role)>,
    pub epsilon: f32,
    pub noise_dim: usize,
    pub seed: u64,
}

/// Gaussian lexicon over the corpus vocabulary plus either independent
/// Gaussian records or a planted dataset.
pub fn synth(args: SynthArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus)?;
    let lexicon = gaussian_lexicon(&corpus_vocabulary(&corpus), args.lexicon_dim, args.seed)?;
    let data_seed = args.seed.wrapping_add(1);
    let dataset = match (args.planted, args.roles.is_empty()) {
        (Some((source, target)), true) => {
            planted_dataset(&corpus, &lexicon, source, target, args.epsilon, args.noise_dim, data_seed)?
        }
        (None, false) => {
            let dims: BTreeMap<Role, u32> = args.roles.iter().copied().collect();
            gaussian_dataset(&corpus, &dims, data_seed)?
        }
        _ => return Err(Error::config("give exactly one of --roles or --planted")),
    };
    save_dataset(&dataset, &args.out)?;
    if let Some(p) = &args.lexicon_out {
        let file = std::fs::File::create(p).map_err(|e| Error::io(p, e))?;
        write_lexicon(&lexicon, std::io::BufWriter::new(file)).map_err(|e| Error::io(p, e))?;
    }
    println!("{} records for {} sentences written to {}", dataset.len(), corpus.len(), args.out.display());
    Ok(())
}
