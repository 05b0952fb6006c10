use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use mteval::combine::{
    evaluate_combination, mbr_select, oracle_select, CandidatePool, CandidateScores, CombinationOutput, Utility,
};
use mteval::corpus::{load_corpus, EvaluationCorpus};
use mteval::diagnostics::diagnostics_table;
use mteval::external_scores::{load_pairwise_utilities, load_segment_scores, SegmentScoreTable};
use mteval::metrics::{BleuConfig, ChrfConfig};
use mteval::normalize::{normalization_impact, normalize_stream, NormalizationConfig, ScorePair, Stage};
use mteval::report::{
    render_combination, render_matching, render_model_comparison, render_ranking, render_significance, Format,
    MatchingRow, ModelScores, ScoredSystem, VariantCounts,
};
use mteval::significance::{make_plan, significance_matrix, ScoredSystems, DEFAULT_ALPHA, DEFAULT_RESAMPLES};

#[derive(Parser)]
#[command(name = "mteval", version, about = "Machine translation evaluation: scoring, significance, combination")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank systems by corpus-level metrics.
    Score(ScoreArgs),
    /// Paired bootstrap significance matrix for one metric.
    Sigtest(SigtestArgs),
    /// Combine systems per segment by MBR or oracle selection.
    Combine(CombineArgs),
    /// Exact-match, self-mismatch and normalization diagnostics.
    Stats(StatsArgs),
    /// Moses-style punctuation normalization from stdin to stdout.
    Normalize(NormalizeArgs),
}

#[derive(Args)]
struct Output {
    /// Report format: md, tex, csv or json.
    #[arg(long, default_value = "md", value_parser = parse_format)]
    format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Corpus manifest (direction, source, references, systems).
    #[arg(long)]
    manifest: PathBuf,
    /// Metrics to rank by: bleu, chrf. Repeatable.
    #[arg(long = "metric", value_parser = ["bleu", "chrf"])]
    metrics: Vec<String>,
    /// Learned-metric segment scores as MODEL=PATH or PATH. Repeatable.
    #[arg(long = "comet-scores")]
    comet_scores: Vec<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SigtestArgs {
    /// Corpus manifest (direction, source, references, systems).
    #[arg(long)]
    manifest: PathBuf,
    /// bleu, chrf, or the model id of a --comet-scores table.
    #[arg(long, default_value = "chrf")]
    metric: String,
    /// Learned-metric segment scores as MODEL=PATH or PATH. Repeatable.
    #[arg(long = "comet-scores")]
    comet_scores: Vec<String>,
    /// Seed of the resampling plan.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of bootstrap resamples.
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    /// Differences with p below this are underlined.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CombineArgs {
    /// Corpus manifest (direction, source, references, systems).
    #[arg(long)]
    manifest: PathBuf,
    /// Combination methods to run. Repeatable (default: mbr).
    #[arg(long, value_parser = ["mbr", "oracle"])]
    method: Vec<String>,
    /// MBR utility: chrf or file:PATH with pairwise scores.
    #[arg(long, default_value = "chrf")]
    utility: String,
    /// Segment scores (MODEL=PATH or PATH) used for oracle selection
    /// instead of reference chrF.
    #[arg(long = "segment-scores")]
    segment_scores: Option<String>,
    /// Learned-metric scores shown in the evaluation table.
    #[arg(long = "comet-scores")]
    comet_scores: Option<String>,
    /// Where to write the combined system output (one line per segment).
    /// Provenance goes to the same path with a .provenance.json suffix.
    #[arg(long = "system-out")]
    system_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct StatsArgs {
    /// Corpus manifest (direction, source, references, systems).
    #[arg(long)]
    manifest: PathBuf,
    /// Normalization language (default: the manifest's target language).
    #[arg(long)]
    lang: Option<String>,
    /// Learned-metric scores of the original outputs (MODEL=PATH or PATH).
    #[arg(long = "comet-scores")]
    comet_scores: Option<String>,
    /// Learned-metric scores of the normalized outputs.
    #[arg(long = "normalized-comet-scores", requires = "comet_scores")]
    normalized_comet_scores: Option<String>,
    /// Add variant counts (extra distinct translations of repeated sources).
    #[arg(long)]
    variants: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NormalizeArgs {
    #[arg(long, short = 'l', default_value = "en")]
    lang: String,
    /// Stages to run, comma separated: unicode_punct, punct_norm, strip_nonprint.
    #[arg(long, value_delimiter = ',')]
    stages: Vec<String>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

/// Errors caused by the user's input exit with 2, everything else with 1.
enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

type CmdResult = Result<(), Failure>;

trait InputContext<T> {
    fn input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
}

fn internal<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Internal(e.into())
}

fn input_error(msg: String) -> Failure {
    Failure::Input(anyhow::anyhow!(msg))
}

fn emit(output: &Output, document: &str) -> CmdResult {
    match &output.out {
        Some(path) => {
            fs::write(path, document).with_context(|| format!("writing {}", path.display())).map_err(internal)
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(document.as_bytes()).map_err(internal)?;
            out.flush().map_err(internal)
        }
    }
}

/// Joins several documents of one format into one output.
fn join_documents(format: Format, docs: Vec<String>) -> String {
    match format {
        Format::Json => {
            let values: Vec<serde_json::Value> =
                docs.iter().map(|d| serde_json::from_str(d).expect("renderers emit valid JSON")).collect();
            let mut s = serde_json::to_string_pretty(&values).expect("JSON values serialize");
            s.push('\n');
            s
        }
        _ => docs.join("\n"),
    }
}

fn split_model_spec(spec: &str) -> (Option<&str>, &Path) {
    match spec.split_once('=') {
        Some((model, path)) if !model.is_empty() => (Some(model), Path::new(path)),
        _ => (None, Path::new(spec)),
    }
}

fn load_table(spec: &str, corpus: &EvaluationCorpus) -> Result<SegmentScoreTable, Failure> {
    let (model, path) = split_model_spec(spec);
    load_segment_scores(path, model, corpus)
        .with_context(|| format!("loading segment scores from {}", path.display()))
        .input()
}

fn load(manifest: &Path) -> Result<EvaluationCorpus, Failure> {
    let corpus = load_corpus(manifest).with_context(|| format!("loading manifest {}", manifest.display())).input()?;
    info!(
        "{}: {} segments, {} systems, {} references",
        corpus.direction(),
        corpus.segment_count(),
        corpus.systems().len(),
        corpus.references().len()
    );
    Ok(corpus)
}

fn ranking_entries(corpus: &EvaluationCorpus, scores: &[f64]) -> Vec<ScoredSystem> {
    corpus
        .systems()
        .iter()
        .zip(scores)
        .map(|(s, &score)| ScoredSystem { system_id: s.system_id.clone(), score, constrained: s.constrained })
        .collect()
}

fn cmd_score(args: ScoreArgs) -> CmdResult {
    let corpus = load(&args.manifest)?;
    let tables = args.comet_scores.iter().map(|spec| load_table(spec, &corpus)).collect::<Result<Vec<_>, _>>()?;
    let metrics = if args.metrics.is_empty() { vec!["chrf".to_string(), "bleu".to_string()] } else { args.metrics };
    let refs = corpus.references_by_segment();
    let target = corpus.direction().target_lang().to_string();
    let format = args.output.format;
    let mut docs = Vec::new();
    for m in &metrics {
        let (name, scored) = match m.as_str() {
            "bleu" => ("BLEU", BleuConfig::for_target(&target).corpus_score_all(&corpus, &refs)),
            _ => ("chrF", ChrfConfig::default().corpus_score_all(&corpus, &refs)),
        };
        let (signature, values) = scored.input()?;
        let systems = ranking_entries(&corpus, &values);
        docs.push(render_ranking(name, &signature, &systems, format));
    }
    for t in &tables {
        let models = ModelScores::from(t);
        // Tables list systems in manifest order.
        let systems = ranking_entries(&corpus, &models.scores);
        let signature = format!("model:{}|agg:mean|scale:100", t.model_id());
        docs.push(render_ranking(t.model_id(), &signature, &systems, format));
    }
    if tables.len() > 1 {
        let models: Vec<ModelScores> = tables.iter().map(ModelScores::from).collect();
        docs.push(render_model_comparison(&models, format));
    }
    emit(&args.output, &join_documents(format, docs))
}

/// Corpus scores for every system plus the shared signature.
trait CorpusScoreAll {
    fn corpus_score_all(&self, corpus: &EvaluationCorpus, refs: &[Vec<&str>]) -> anyhow::Result<(String, Vec<f64>)>;
}

impl CorpusScoreAll for BleuConfig {
    fn corpus_score_all(&self, corpus: &EvaluationCorpus, refs: &[Vec<&str>]) -> anyhow::Result<(String, Vec<f64>)> {
        collect_scores(corpus, |h| Ok(self.corpus_score(h, refs)?))
    }
}

impl CorpusScoreAll for ChrfConfig {
    fn corpus_score_all(&self, corpus: &EvaluationCorpus, refs: &[Vec<&str>]) -> anyhow::Result<(String, Vec<f64>)> {
        collect_scores(corpus, |h| Ok(self.corpus_score(h, refs)?))
    }
}

fn collect_scores(
    corpus: &EvaluationCorpus,
    score: impl Fn(&[String]) -> anyhow::Result<mteval::metrics::MetricScore>,
) -> anyhow::Result<(String, Vec<f64>)> {
    let mut signature = String::new();
    let mut values = Vec::new();
    for s in corpus.systems() {
        let m = score(&s.segments).with_context(|| format!("scoring {}", s.system_id))?;
        signature = m.signature;
        values.push(m.value);
    }
    Ok((signature, values))
}

fn cmd_sigtest(args: SigtestArgs) -> CmdResult {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(input_error(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    if args.resamples == 0 {
        return Err(input_error("--resamples must be at least 1".into()));
    }
    let corpus = load(&args.manifest)?;
    let tables = args.comet_scores.iter().map(|spec| load_table(spec, &corpus)).collect::<Result<Vec<_>, _>>()?;
    let target = corpus.direction().target_lang().to_string();
    let systems = match args.metric.as_str() {
        "bleu" => ScoredSystems::bleu(&corpus, &BleuConfig::for_target(&target)).input()?,
        "chrf" => ScoredSystems::chrf(&corpus, &ChrfConfig::default()).input()?,
        other => match tables.iter().find(|t| t.model_id() == other) {
            Some(t) => ScoredSystems::from_table(t),
            None => {
                return Err(input_error(format!(
                    "unknown metric {other:?}: use bleu, chrf, or the model id of a --comet-scores table"
                )))
            }
        },
    };
    let plan = make_plan(args.seed, args.resamples, corpus.segment_count()).input()?;
    info!("{} resamples of {} segments, seed {}", args.resamples, corpus.segment_count(), args.seed);
    let matrix = significance_matrix(&systems, &plan, args.alpha).input()?;
    emit(&args.output, &render_significance(&matrix, args.output.format))
}

fn cmd_combine(args: CombineArgs) -> CmdResult {
    let corpus = load(&args.manifest)?;
    let pool = CandidatePool::from_corpus(&corpus).input()?;
    let methods = if args.method.is_empty() { vec!["mbr".to_string()] } else { args.method };
    let chrf = ChrfConfig::default();
    let bleu = BleuConfig::for_target(corpus.direction().target_lang());
    let learned = args.comet_scores.as_deref().map(|s| load_table(s, &corpus)).transpose()?;
    let mut outputs: Vec<CombinationOutput> = Vec::new();
    for m in &methods {
        let out = if m == "mbr" {
            let table;
            let utility = match args.utility.as_str() {
                "chrf" => Utility::Chrf(chrf.clone()),
                spec => {
                    let Some(path) = spec.strip_prefix("file:") else {
                        return Err(input_error(format!("unknown utility {spec:?}: use chrf or file:PATH")));
                    };
                    table = load_pairwise_utilities(Path::new(path), &corpus)
                        .with_context(|| format!("loading pairwise utilities from {path}"))
                        .input()?;
                    Utility::Table(&table)
                }
            };
            mbr_select(&pool, &utility).input()?
        } else {
            let table = args.segment_scores.as_deref().map(|s| load_table(s, &corpus)).transpose()?;
            let refs = corpus.references_by_segment();
            let scores = match &table {
                Some(t) => CandidateScores::Table(t),
                None => CandidateScores::Chrf { config: chrf.clone(), references: &refs },
            };
            oracle_select(&pool, &scores).input()?
        };
        outputs.push(out);
    }
    if let Some(path) = &args.system_out {
        if outputs.len() > 1 {
            warn!("several methods requested; {} receives the first ({})", path.display(), methods[0]);
        }
        let first = &outputs[0];
        let mut text = first.lines().join("\n");
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(internal)?;
        let mut prov = path.clone().into_os_string();
        prov.push(".provenance.json");
        fs::write(&prov, first.provenance_json())
            .with_context(|| format!("writing {}", Path::new(&prov).display()))
            .map_err(internal)?;
    }
    let refs: Vec<&CombinationOutput> = outputs.iter().collect();
    let table = evaluate_combination(&corpus, &refs, learned.as_ref(), &chrf, &bleu).input()?;
    emit(&args.output, &render_combination(&table, args.output.format))
}

fn cmd_stats(args: StatsArgs) -> CmdResult {
    let corpus = load(&args.manifest)?;
    let lang = args.lang.unwrap_or_else(|| corpus.direction().target_lang().to_string());
    let norm = NormalizationConfig::new(&lang);
    if norm.warn_if_unsupported() {
        warn!("normalization rules are not designed for {lang:?}; results may be meaningless");
    }
    let original = args.comet_scores.as_deref().map(|s| load_table(s, &corpus)).transpose()?;
    let normalized = args.normalized_comet_scores.as_deref().map(|s| load_table(s, &corpus)).transpose()?;
    let learned_pair = |system: &str| -> Result<Option<ScorePair>, Failure> {
        match (&original, &normalized) {
            (Some(o), Some(n)) => {
                let avg = |t: &SegmentScoreTable| mteval::external_scores::corpus_average(t, system).map(|m| m.value);
                Ok(Some(ScorePair { original: avg(o).input()?, normalized: avg(n).input()? }))
            }
            _ => Ok(None),
        }
    };
    let bleu = BleuConfig::for_target(corpus.direction().target_lang());
    let chrf = ChrfConfig::default();
    let mut rows = Vec::new();
    for rec in diagnostics_table(&corpus) {
        let impact = normalization_impact(&corpus, &rec.system_id, &norm, &bleu, &chrf).input()?;
        rows.push(MatchingRow {
            learned: learned_pair(&rec.system_id)?,
            system_id: rec.system_id,
            exact_match: rec.exact_match,
            self_mismatch: rec.self_mismatch,
            bleu: impact.bleu,
            variants: args
                .variants
                .then_some(VariantCounts { system: rec.system_variants, reference: rec.reference_variants }),
        });
    }
    emit(&args.output, &render_matching(&rows, args.output.format))
}

fn cmd_normalize(args: NormalizeArgs) -> CmdResult {
    let mut config = NormalizationConfig::new(&args.lang);
    if !args.stages.is_empty() {
        config.stages =
            args.stages.iter().map(|s| s.parse::<Stage>()).collect::<Result<_, _>>().map_err(input_error)?;
    }
    if config.warn_if_unsupported() {
        warn!("normalization rules are not designed for {:?}", args.lang);
    }
    let stdin = io::stdin().lock();
    let stdout = BufWriter::new(io::stdout().lock());
    let lines = normalize_stream(stdin, stdout, &config).map_err(|e| match e.kind() {
        io::ErrorKind::InvalidData => Failure::Input(e.into()),
        _ => internal(e),
    })?;
    info!("normalized {lines} lines");
    Ok(())
}

/// The error chain on one line. Library errors already quote their cause, so
/// causes whose text is already present are skipped.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if out.is_empty() {
            out = text;
        } else if !out.ends_with(&text) {
            out = format!("{out}: {text}");
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    // The log level comes from the flags only, never from the environment.
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Score(a) => cmd_score(a),
        Command::Sigtest(a) => cmd_sigtest(a),
        Command::Combine(a) => cmd_combine(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Normalize(a) => cmd_normalize(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {}", describe(&e));
            eprintln!("run `mteval --help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {}", describe(&e));
            ExitCode::from(1)
        }
    }
}
