//! Command-line front end. Settings resolve as flags, then the `--config`
//! file section, then built-in defaults; the effective configuration is
//! written next to every output.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::eval::{entanglement_report, run_task, EntanglementReport, ModelSpec, SimilarityDataset, TaskResult};
use crate::semspace::{build_space, phrase_token, Corpus, SemanticSpace, SpaceConfig};
use crate::tensors::{
    build_relational, build_separable, train_regression, ArgumentPairs, Init, RegressionConfig, RegressionExample,
    VerbStore,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "compdist", version, about = "Compositional distributional semantics toolkit")]
pub struct Cli {
    /// JSON configuration file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for randomized initialization.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a semantic space from a tokenized corpus.
    BuildSpace(BuildSpaceArgs),
    /// Build verb matrices from argument pairs or holistic phrase vectors.
    BuildVerbs(BuildVerbsArgs),
    /// Report how close each stored verb matrix is to its rank-1 approximation.
    Analyze(AnalyzeArgs),
    /// Evaluate composition models on a sentence-similarity dataset.
    RunTask(RunTaskArgs),
}

#[derive(Debug, Args)]
pub struct BuildSpaceArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// One stopword per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// `verb<TAB>object` bigrams to merge into phrase tokens.
    #[arg(long)]
    pub phrases: Option<PathBuf>,
    #[arg(long)]
    pub basis_size: Option<usize>,
    #[arg(long)]
    pub skip_top: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub normalize: Option<bool>,
    #[arg(long)]
    pub min_count: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildMethod {
    Relational,
    Separable,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Zeros,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct BuildVerbsArgs {
    /// `verb<TAB>subject<TAB>object` per line.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<BuildMethod>,
    /// `verb<TAB>object[<TAB>phrase-token]` per line (regression only).
    #[arg(long)]
    pub examples: Option<PathBuf>,
    /// Store directory; defaults to `<output>/verbs`.
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub verbs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunTaskArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long)]
    pub verbs: Option<PathBuf>,
    /// Comma-separated model ids; prefix with `rank1:` to use rank-1
    /// approximations of the verb matrices.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    /// Comma-separated subset of `cos,eucl`.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<String>>,
    /// Also write every pair's scores to `results.json`.
    #[arg(long)]
    pub per_pair: bool,
}

/// Sections of the `--config` file. Relative paths are resolved against the
/// file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Option<Format>,
    build_space: BuildSpaceSection,
    build_verbs: BuildVerbsSection,
    analyze: AnalyzeSection,
    run_task: RunTaskSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BuildSpaceSection {
    corpus: Option<PathBuf>,
    stopwords: Option<Vec<String>>,
    stopwords_file: Option<PathBuf>,
    phrases_file: Option<PathBuf>,
    basis_size: Option<usize>,
    skip_top: Option<usize>,
    window: Option<usize>,
    svd_rank: Option<usize>,
    normalize: Option<bool>,
    min_count: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BuildVerbsSection {
    pairs: Option<PathBuf>,
    space: Option<PathBuf>,
    method: Option<BuildMethod>,
    examples: Option<PathBuf>,
    store: Option<PathBuf>,
    learning_rate: Option<f64>,
    max_epochs: Option<usize>,
    tolerance: Option<f64>,
    init: Option<InitArg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AnalyzeSection {
    verbs: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunTaskSection {
    dataset: Option<PathBuf>,
    space: Option<PathBuf>,
    verbs: Option<PathBuf>,
    models: Option<Vec<String>>,
    metrics: Option<Vec<String>>,
    per_pair: Option<bool>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::UnknownModel(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

struct Globals {
    seed: u64,
    output: PathBuf,
    format: Format,
}

fn resolve(base: &Path, p: Option<PathBuf>) -> Option<PathBuf> {
    p.map(|p| if p.is_absolute() { p } else { base.join(p) })
}

fn required(name: &str, v: Option<PathBuf>) -> CliResult<PathBuf> {
    v.ok_or_else(|| CliError::usage(format!("missing --{name} (flag or config file)")))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let (file, base) = match &cli.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            let cfg: FileConfig =
                serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, base)
        }
        None => (FileConfig::default(), PathBuf::new()),
    };
    let globals = Globals {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        output: cli
            .output
            .or_else(|| resolve(&base, file.output))
            .unwrap_or_else(|| PathBuf::from(".")),
        format: cli.format.or(file.format).unwrap_or(Format::Table),
    };
    std::fs::create_dir_all(&globals.output).map_err(|e| Error::io(&globals.output, e))?;

    match cli.command {
        Command::BuildSpace(args) => cmd_build_space(args, file.build_space, &base, &globals),
        Command::BuildVerbs(args) => cmd_build_verbs(args, file.build_verbs, &base, &globals),
        Command::Analyze(args) => cmd_analyze(args, file.analyze, &base, &globals),
        Command::RunTask(args) => cmd_run_task(args, file.run_task, &base, &globals),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let json = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_lines(path: &Path) -> CliResult<Vec<(usize, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r').to_string()))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .collect())
}

fn read_columns(path: &Path, min: usize, max: usize) -> CliResult<Vec<Vec<String>>> {
    read_lines(path)?
        .into_iter()
        .map(|(lineno, line)| {
            let cols: Vec<String> = line.split('\t').map(|c| c.trim().to_lowercase()).collect();
            if cols.len() < min || cols.len() > max || cols.iter().any(String::is_empty) {
                return Err(Error::parse(path, lineno, format!("expected {min} to {max} tab-separated fields")).into());
            }
            Ok(cols)
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct BuildSpaceEffective {
    corpus: PathBuf,
    seed: u64,
    space: SpaceConfig,
}

fn cmd_build_space(args: BuildSpaceArgs, file: BuildSpaceSection, base: &Path, g: &Globals) -> CliResult<()> {
    let corpus_path = required("corpus", args.corpus.or_else(|| resolve(base, file.corpus)))?;
    let defaults = SpaceConfig::default();

    let mut stopwords: BTreeSet<String> = file.stopwords.unwrap_or_default().into_iter().collect();
    if let Some(path) = args.stopwords.or_else(|| resolve(base, file.stopwords_file)) {
        for (_, line) in read_lines(&path)? {
            stopwords.insert(line.trim().to_lowercase());
        }
    }
    let mut phrases = Vec::new();
    if let Some(path) = args.phrases.or_else(|| resolve(base, file.phrases_file)) {
        for cols in read_columns(&path, 2, 3)? {
            phrases.push((cols[0].clone(), cols[1].clone()));
        }
        phrases.sort();
        phrases.dedup();
    }

    let config = SpaceConfig {
        basis_size: args.basis_size.or(file.basis_size).unwrap_or(defaults.basis_size),
        skip_top: args.skip_top.or(file.skip_top).unwrap_or(defaults.skip_top),
        stopwords,
        window: args.window.or(file.window).unwrap_or(defaults.window),
        svd_rank: args.rank.or(file.svd_rank).unwrap_or(defaults.svd_rank),
        normalize: args.normalize.or(file.normalize).unwrap_or(defaults.normalize),
        min_count: args.min_count.or(file.min_count).unwrap_or(defaults.min_count),
        phrases,
    };

    let start = Instant::now();
    let corpus = Corpus::load(&corpus_path)?;
    let space = build_space(&corpus, &config)?;
    let space_path = g.output.join("space.tsv");
    space.save(&space_path)?;
    write_json(
        &g.output.join("build-space.config.json"),
        &BuildSpaceEffective {
            corpus: corpus_path,
            seed: g.seed,
            space: config,
        },
    )?;
    println!(
        "wrote {}: {} words, dimension {}, {} basis words ({:.2?})",
        space_path.display(),
        space.len(),
        space.dim(),
        space.meta.basis.len(),
        start.elapsed()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct BuildVerbsEffective {
    method: BuildMethod,
    pairs: Option<PathBuf>,
    examples: Option<PathBuf>,
    space: PathBuf,
    store: PathBuf,
    seed: u64,
    regression: Option<RegressionConfig>,
}

#[derive(Debug, Serialize)]
struct BuildOutcome {
    verb: String,
    used: usize,
    loss: Option<f64>,
    epochs: Option<usize>,
    converged: Option<bool>,
}

fn cmd_build_verbs(args: BuildVerbsArgs, file: BuildVerbsSection, base: &Path, g: &Globals) -> CliResult<()> {
    let method = args
        .method
        .or(file.method)
        .ok_or_else(|| CliError::usage("missing --method (relational, separable or regression)"))?;
    let space_path = required("space", args.space.or_else(|| resolve(base, file.space)))?;
    let store_dir = args
        .store
        .or_else(|| resolve(base, file.store))
        .unwrap_or_else(|| g.output.join("verbs"));
    let pairs_path = args.pairs.or_else(|| resolve(base, file.pairs));
    let examples_path = args.examples.or_else(|| resolve(base, file.examples));

    let regression = (method == BuildMethod::Regression).then(|| {
        let defaults = RegressionConfig::default();
        RegressionConfig {
            learning_rate: args.learning_rate.or(file.learning_rate).or(defaults.learning_rate),
            max_epochs: args.max_epochs.or(file.max_epochs).unwrap_or(defaults.max_epochs),
            tolerance: args.tolerance.or(file.tolerance).unwrap_or(defaults.tolerance),
            init: match args.init.or(file.init).unwrap_or(InitArg::Zeros) {
                InitArg::Zeros => Init::Zeros,
                InitArg::Gaussian => Init::ScaledGaussian { seed: g.seed },
            },
        }
    });

    let space = SemanticSpace::load(&space_path)?;
    let mut store = VerbStore::load(&store_dir)?;
    if let Some(d) = store.dim() {
        if d != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: space.dim(),
            }
            .into());
        }
    }

    let mut outcomes = Vec::new();
    let mut skipped = Vec::new();
    match method {
        BuildMethod::Relational | BuildMethod::Separable => {
            let path = pairs_path
                .clone()
                .ok_or_else(|| CliError::usage(format!("--method {method:?} needs --pairs").to_lowercase()))?;
            let mut by_verb: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
            for cols in read_columns(&path, 3, 3)? {
                by_verb
                    .entry(cols[0].clone())
                    .or_default()
                    .push((cols[1].clone(), cols[2].clone()));
            }
            for (verb, pairs) in by_verb {
                let args = ArgumentPairs::resolve(&verb, &pairs, &space);
                if args.is_empty() {
                    skipped.push(verb);
                    continue;
                }
                let m = match method {
                    BuildMethod::Relational => build_relational(&args)?,
                    _ => build_separable(&args)?,
                };
                outcomes.push(BuildOutcome {
                    verb,
                    used: args.resolved.len(),
                    loss: None,
                    epochs: None,
                    converged: None,
                });
                store.insert(m)?;
            }
        }
        BuildMethod::Regression => {
            let path = examples_path
                .clone()
                .ok_or_else(|| CliError::usage("--method regression needs --examples"))?;
            let cfg = regression.clone().expect("regression config");
            let mut by_verb: BTreeMap<String, Vec<RegressionExample>> = BTreeMap::new();
            let mut all_verbs = BTreeSet::new();
            for cols in read_columns(&path, 2, 3)? {
                let (verb, object) = (&cols[0], &cols[1]);
                all_verbs.insert(verb.clone());
                let phrase = cols.get(2).cloned().unwrap_or_else(|| phrase_token(verb, object));
                match (space.get(object), space.get(&phrase)) {
                    (Some(x), Some(y)) => by_verb.entry(verb.clone()).or_default().push(RegressionExample {
                        input: x.clone(),
                        target: y.clone(),
                    }),
                    (None, _) => log::warn!("{verb}: `{object}` not in space; example dropped"),
                    (_, None) => log::warn!("{verb}: phrase `{phrase}` not in space; example dropped"),
                }
            }
            skipped.extend(all_verbs.into_iter().filter(|v| !by_verb.contains_key(v)));
            let fits: Vec<_> = by_verb
                .par_iter()
                .map(|(verb, examples)| train_regression(verb, examples, &cfg).map(|fit| (examples.len(), fit)))
                .collect::<Result<_, _>>()?;
            for (used, fit) in fits {
                outcomes.push(BuildOutcome {
                    verb: fit.matrix.verb.clone(),
                    used,
                    loss: Some(fit.final_loss),
                    epochs: Some(fit.epochs),
                    converged: Some(fit.converged),
                });
                store.insert(fit.matrix)?;
            }
        }
    }

    if outcomes.is_empty() {
        return Err(Error::Empty("no verb had any resolvable training data".into()).into());
    }
    store.save(&store_dir)?;
    write_json(
        &g.output.join("build-verbs.config.json"),
        &BuildVerbsEffective {
            method,
            pairs: pairs_path,
            examples: examples_path,
            space: space_path,
            store: store_dir.clone(),
            seed: g.seed,
            regression,
        },
    )?;

    let mut out = String::new();
    match g.format {
        Format::Json => {
            let report = serde_json::json!({ "built": outcomes, "skipped": skipped });
            out = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
        }
        Format::Csv => {
            out.push_str("verb,used,loss,epochs,converged\n");
            for o in &outcomes {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    o.verb,
                    o.used,
                    opt(o.loss),
                    o.epochs.map(|e| e.to_string()).unwrap_or_default(),
                    o.converged.map(|c| c.to_string()).unwrap_or_default()
                )
                .unwrap();
            }
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.verb.clone(),
                        o.used.to_string(),
                        o.loss.map(|l| format!("{l:.6}")).unwrap_or_else(|| "-".into()),
                        o.epochs.map(|e| e.to_string()).unwrap_or_else(|| "-".into()),
                    ]
                })
                .collect();
            out = table(&["verb", "examples", "loss", "epochs"], &rows);
            writeln!(out, "stored {} matrices in {}", outcomes.len(), store_dir.display()).unwrap();
            if !skipped.is_empty() {
                writeln!(out, "skipped (no resolvable data): {}", skipped.join(", ")).unwrap();
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        padded.join(" | ").trim_end().to_string() + "\n"
    };
    let mut out = line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

fn report_csv(report: &EntanglementReport) -> String {
    let mut out = String::from("verb,method,score\n");
    for r in &report.rows {
        writeln!(out, "{},{},{}", r.verb, r.method, r.score).unwrap();
    }
    out
}

fn cmd_analyze(args: AnalyzeArgs, file: AnalyzeSection, base: &Path, g: &Globals) -> CliResult<()> {
    let dir = required("verbs", args.verbs.or_else(|| resolve(base, file.verbs)))?;
    let store = VerbStore::load(&dir)?;
    let report = entanglement_report(&store)?;
    write_text(&g.output.join("entanglement.csv"), &report_csv(&report))?;
    write_json(&g.output.join("entanglement.json"), &report)?;

    let out = match g.format {
        Format::Csv => report_csv(&report),
        Format::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
        Format::Table => {
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| vec![r.verb.clone(), r.method.clone(), format!("{:.4}", r.score)])
                .collect();
            let mut out = table(&["verb", "method", "cos(M, rank-1)"], &rows);
            writeln!(out, "mean: {:.4} over {} matrices", report.mean, report.rows.len()).unwrap();
            for b in report.histogram.iter().filter(|b| b.count > 0) {
                writeln!(out, "  [{:.1}, {:.1}): {}", b.lower, b.upper, b.count).unwrap();
            }
            if !report.skipped.is_empty() {
                writeln!(out, "skipped zero matrices: {}", report.skipped.join(", ")).unwrap();
            }
            out
        }
    };
    print!("{out}");
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Metric {
    Cos,
    Eucl,
}

#[derive(Debug, Serialize)]
struct RunTaskEffective {
    dataset: PathBuf,
    space: PathBuf,
    verbs: Option<PathBuf>,
    models: Vec<String>,
    metrics: Vec<Metric>,
    per_pair: bool,
    seed: u64,
}

fn results_csv(results: &[TaskResult], metrics: &[Metric]) -> String {
    let mut out = String::from("model");
    for m in metrics {
        out.push_str(match m {
            Metric::Cos => ",rho_cos",
            Metric::Eucl => ",rho_eucl",
        });
    }
    out.push_str(",n_pairs_used,excluded\n");
    for r in results {
        out.push_str(&r.model);
        for m in metrics {
            let v = match m {
                Metric::Cos => r.rho_cosine,
                Metric::Eucl => r.rho_euclidean,
            };
            write!(out, ",{}", opt(v)).unwrap();
        }
        writeln!(out, ",{},{}", r.n_pairs_used, r.excluded).unwrap();
    }
    out
}

fn cmd_run_task(args: RunTaskArgs, file: RunTaskSection, base: &Path, g: &Globals) -> CliResult<()> {
    let models = args
        .models
        .or(file.models)
        .ok_or_else(|| CliError::usage("missing --models"))?;
    let specs: Vec<ModelSpec> = models.iter().map(|m| m.trim().parse()).collect::<Result<_, Error>>()?;
    let metrics: Vec<Metric> = args
        .metrics
        .or(file.metrics)
        .unwrap_or_else(|| vec!["cos".into(), "eucl".into()])
        .iter()
        .map(|m| match m.trim() {
            "cos" => Ok(Metric::Cos),
            "eucl" => Ok(Metric::Eucl),
            other => Err(CliError::usage(format!(
                "unknown metric `{other}` (expected cos or eucl)"
            ))),
        })
        .collect::<CliResult<_>>()?;
    if specs.is_empty() || metrics.is_empty() {
        return Err(CliError::usage("need at least one model and one metric"));
    }
    let dataset_path = required("dataset", args.dataset.or_else(|| resolve(base, file.dataset)))?;
    let space_path = required("space", args.space.or_else(|| resolve(base, file.space)))?;
    let verbs_dir = args.verbs.or_else(|| resolve(base, file.verbs));
    let per_pair = args.per_pair || file.per_pair.unwrap_or(false);

    let dataset = SimilarityDataset::load(&dataset_path)?;
    let space = SemanticSpace::load(&space_path)?;
    let store = match &verbs_dir {
        Some(dir) => VerbStore::load(dir)?,
        None => VerbStore::new(),
    };
    if let Some(d) = store.dim() {
        if d != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: d,
            }
            .into());
        }
    }

    let results = specs
        .iter()
        .map(|spec| run_task(&dataset, spec, &space, &store))
        .collect::<Result<Vec<_>, _>>()?;

    let csv = results_csv(&results, &metrics);
    write_text(&g.output.join("results.csv"), &csv)?;
    if per_pair {
        write_json(&g.output.join("results.json"), &results)?;
    }
    write_json(
        &g.output.join("run-task.config.json"),
        &RunTaskEffective {
            dataset: dataset_path,
            space: space_path,
            verbs: verbs_dir,
            models: specs.iter().map(ModelSpec::to_string).collect(),
            metrics: metrics.clone(),
            per_pair,
            seed: g.seed,
        },
    )?;

    let out = match g.format {
        Format::Csv => csv,
        Format::Json => {
            let value: Vec<serde_json::Value> = results
                .iter()
                .map(|r| {
                    let mut v = serde_json::to_value(r).expect("serializable");
                    if !per_pair {
                        v.as_object_mut().expect("object").remove("pairs");
                    }
                    v
                })
                .collect();
            serde_json::to_string_pretty(&value).expect("serializable") + "\n"
        }
        Format::Table => {
            let mut header = vec!["Model"];
            for m in &metrics {
                header.push(match m {
                    Metric::Cos => "ρ with cos",
                    Metric::Eucl => "ρ with Eucl.",
                });
            }
            header.extend(["pairs", "excluded"]);
            let fmt = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "n/a".into());
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    let mut row = vec![r.model.clone()];
                    for m in &metrics {
                        row.push(fmt(match m {
                            Metric::Cos => r.rho_cosine,
                            Metric::Eucl => r.rho_euclidean,
                        }));
                    }
                    row.push(r.n_pairs_used.to_string());
                    row.push(r.excluded.to_string());
                    row
                })
                .collect();
            table(&header, &rows)
        }
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    Ok(())
}
