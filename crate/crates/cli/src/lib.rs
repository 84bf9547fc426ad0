//! Command implementations behind the `clozegen` binary.

pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use clozegen::evaluation::{
    evaluate, grid_search, load_dataset, prediction_position_histogram, split_dataset, EvalOptions,
    Expect, Grid, Metric, Scheme,
};
use clozegen::pipeline::ClozeQuestion;

use config::PipelineConfig;

/// Exit status for a run that produced nothing.
pub const EXIT_EMPTY: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "clozegen", version, about = "Generate and evaluate cloze questions")]
pub struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Print the effective configuration, defaults included, and exit.
    #[arg(long)]
    pub print_config: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate questions from an article.
    Generate(GenerateArgs),
    /// Generate for each dataset entry and score against its distractors.
    Evaluate(EvaluateArgs),
    /// Grid-search alpha, beta and gamma on a training split.
    Tune(TuneArgs),
    /// Show the pipeline's intermediate results for one question.
    Inspect(InspectArgs),
    /// Positions of ground-truth distractors among the predictions.
    Histogram(HistogramArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub article: PathBuf,
    /// Output file for line-delimited questions; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub num_questions: usize,
    /// Reserved for tie-breaking randomness; the default pipeline has none.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include filter traces and scores in each record.
    #[arg(long)]
    pub diagnostics: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Machine-readable report (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated metric names; `bleu` and `rouge` select families.
    #[arg(long, default_value = "all")]
    pub metrics: String,
    /// unigram, multigram or any.
    #[arg(long, default_value = "any")]
    pub expect: Expect,
    /// multi-reference or pairwise.
    #[arg(long, default_value = "multi-reference")]
    pub scheme: Scheme,
    /// Ranked items MRR looks at; all when omitted.
    #[arg(long)]
    pub mrr_cutoff: Option<usize>,
    /// Per-entry results (line-delimited JSON).
    #[arg(long)]
    pub per_entry: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// e.g. `alpha=0.1:30:0.1;beta=0:2:0.1`; omitted parameters stay fixed.
    #[arg(long)]
    pub grid: String,
    /// train:test ratio.
    #[arg(long, default_value = "3:1")]
    pub split: String,
    #[arg(long, default_value_t = 3)]
    pub folds: usize,
    /// Shuffle before splitting; file order when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Best parameters and the full score table (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Stem holding one `**blank**`; needs --answer.
    #[arg(long, conflicts_with = "questions")]
    pub stem: Option<String>,
    #[arg(long, requires = "stem")]
    pub answer: Option<String>,
    /// Questions written by `generate`; needs --id.
    #[arg(long, requires = "id")]
    pub questions: Option<PathBuf>,
    /// 0-based record index in --questions.
    #[arg(long)]
    pub id: Option<usize>,
    /// Print the diagnostics as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Predictions per entry; the configured k when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Run a parsed command line, reporting errors on stderr.
pub fn run(cli: Cli) -> ExitCode {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let config = PipelineConfig::load(cli.config.as_deref())?;
    if cli.print_config {
        print!("{}", config.to_toml()?);
        return Ok(ExitCode::SUCCESS);
    }
    let Some(command) = cli.command else {
        bail!("no command given; see --help");
    };
    match command {
        Command::Generate(a) => generate(&config, &a),
        Command::Evaluate(a) => cmd_evaluate(&config, &a),
        Command::Tune(a) => tune(&config, &a),
        Command::Inspect(a) => inspect(&config, &a),
        Command::Histogram(a) => histogram(&config, &a),
    }
}

/// Write to `path`, or stdout when `None`.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn jsonl<T: serde::Serialize>(records: impl IntoIterator<Item = T>) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&r)?);
        out.push('\n');
    }
    Ok(out)
}

fn generate(config: &PipelineConfig, a: &GenerateArgs) -> Result<ExitCode> {
    let article = std::fs::read_to_string(&a.article)
        .with_context(|| format!("cannot read {}", a.article.display()))?;
    log::debug!("seed {}", a.seed);
    let generator = config.generator()?;
    let generation = generator.generate(&article, a.num_questions)?;
    if generation.stem_shortfall {
        log::warn!("fewer eligible stems than requested questions");
    }
    let questions: Vec<ClozeQuestion> = generation
        .questions
        .into_iter()
        .map(|mut q| {
            if !a.diagnostics {
                q.diagnostics = None;
            }
            q
        })
        .collect();
    emit(a.out.as_deref(), &jsonl(&questions)?)?;
    if questions.is_empty() {
        eprintln!("no questions generated");
        return Ok(ExitCode::from(EXIT_EMPTY));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(config: &PipelineConfig, a: &EvaluateArgs) -> Result<ExitCode> {
    let metrics = Metric::parse_list(&a.metrics).map_err(|e| anyhow!(e))?;
    let entries = load_dataset(&a.dataset, a.expect)?;
    let generator = config.generator()?;
    let opts = EvalOptions {
        metrics,
        scheme: a.scheme,
        mrr_cutoff: a.mrr_cutoff,
        ..EvalOptions::default()
    };
    let (report, results) = evaluate(&generator, &entries, &opts)?;
    if let Some(path) = &a.per_entry {
        emit(Some(path), &jsonl(&results)?)?;
    }
    if let Some(path) = &a.out {
        emit(Some(path), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    print!("{}", report.table());
    Ok(ExitCode::SUCCESS)
}

fn parse_split(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("split must look like 3:1, got {s:?}"))?;
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    if a == 0 {
        bail!("split {s:?} leaves no training data");
    }
    Ok((a, b))
}

#[derive(serde::Serialize)]
struct TuneReport {
    train: usize,
    test: usize,
    folds: usize,
    best: clozegen::evaluation::GridPoint,
    /// Mean F1 of the best point on the held-out split.
    test_f1: Option<f64>,
    table: Vec<clozegen::evaluation::GridPoint>,
}

fn tune(config: &PipelineConfig, a: &TuneArgs) -> Result<ExitCode> {
    let grid = Grid::parse(&a.grid, &config.generator).map_err(|e| anyhow!("bad grid: {e}"))?;
    let (tr, te) = parse_split(&a.split)?;
    let entries = load_dataset(&a.dataset, Expect::Any)?;
    let (train, test) = split_dataset(&entries, tr, te, a.seed)?;
    let generator = config.generator()?;
    let result = grid_search(&generator, &train, &grid, a.folds)?;
    let best = &result.best;
    let test_f1 = if test.is_empty() {
        None
    } else {
        let mut tuned = generator.config().clone();
        tuned.alpha = best.alpha;
        tuned.beta = best.beta;
        tuned.gamma = best.gamma;
        let g = generator.with_config(tuned)?;
        let opts = EvalOptions {
            metrics: [Metric::F1].into(),
            ..EvalOptions::default()
        };
        evaluate(&g, &test, &opts)?.0.metrics.get(&Metric::F1).copied()
    };
    println!(
        "best alpha={} beta={} gamma={} f1={:.4} (train={}, test={})",
        best.alpha,
        best.beta,
        best.gamma,
        best.f1,
        train.len(),
        test.len()
    );
    if let Some(f1) = test_f1 {
        println!("test f1={f1:.4}");
    }
    let report = TuneReport {
        train: train.len(),
        test: test.len(),
        folds: a.folds,
        best: result.best.clone(),
        test_f1,
        table: result.table,
    };
    if let Some(path) = &a.out {
        emit(Some(path), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn inspect(config: &PipelineConfig, a: &InspectArgs) -> Result<ExitCode> {
    let (stem, answer) = match (&a.stem, &a.answer, &a.questions, a.id) {
        (Some(stem), Some(answer), _, _) => (stem.clone(), answer.clone()),
        (Some(_), None, _, _) => bail!("--stem needs --answer"),
        (None, _, Some(path), Some(id)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let line = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .nth(id)
                .ok_or_else(|| anyhow!("no question with id {id} in {}", path.display()))?;
            let q: ClozeQuestion = serde_json::from_str(line)
                .with_context(|| format!("{}: record {id} is not a question", path.display()))?;
            (q.stem, q.answer)
        }
        _ => bail!("give --stem and --answer, or --questions and --id"),
    };
    if stem.trim().is_empty() {
        bail!("stem is empty");
    }
    let generator = config.generator()?;
    let prepared = generator.prepare_entry(&stem, &answer)?;
    let q = generator.finalize(&prepared, &generator.config().score_params())?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&q)?);
    } else {
        print!("{}", render_trace(&q));
    }
    Ok(ExitCode::SUCCESS)
}

/// Plain-text rendering of a question's diagnostics.
pub fn render_trace(q: &ClozeQuestion) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "stem: {}", q.stem);
    let _ = writeln!(out, "answer: {}", q.answer);
    let Some(d) = &q.diagnostics else {
        return out;
    };
    for inst in &d.instances {
        let info = &inst.info;
        let _ = writeln!(
            out,
            "\ninstance {:?} pos={:?} ner={} label={} synset={}",
            info.instance.surface,
            info.pos,
            info.ner.as_deref().unwrap_or("-"),
            info.lexical_label.as_deref().unwrap_or("-"),
            info.synset.map_or("-".to_string(), |s| s.to_string()),
        );
        for s in &inst.in_stem {
            let _ = writeln!(out, "  {s:<28} removed: appears in stem");
        }
        for t in &inst.traces {
            let verdict = match t.removed_by {
                Some(c) => format!("removed by {}", c.name()),
                None => "kept".to_string(),
            };
            let _ = writeln!(out, "  {:<28} {verdict:<20} {}", t.idc.surface, t.detail);
        }
        for s in &inst.unscorable {
            let _ = writeln!(out, "  {s:<28} dropped: unscorable");
        }
        let _ = writeln!(out, "  ranked:");
        for r in &inst.ranked {
            let _ = writeln!(
                out,
                "    {:<26} E={:.4} W={:.4} P={:.4} L={:.4} R={:.4}",
                r.idc.surface, r.e_score, r.w_score, r.p_score, r.l_score, r.r_score
            );
        }
    }
    let _ = writeln!(out, "\ncandidates:");
    for c in &d.candidates {
        let _ = writeln!(
            out,
            "  {:<32} n-gram {}",
            c.phrase,
            if c.ngram_verified { "found" } else { "missing" }
        );
    }
    let _ = writeln!(out, "\ndistractors: {}", q.distractors.join(" | "));
    out
}

fn histogram(config: &PipelineConfig, a: &HistogramArgs) -> Result<ExitCode> {
    let entries = load_dataset(&a.dataset, Expect::Any)?;
    let kb = config.load_wordnet()?;
    let backends = match config.cache()? {
        Some(store) => config.backends(&kb)?.cached(store),
        None => config.backends(&kb)?,
    };
    let k = a.k.unwrap_or(config.generator.k);
    let hist = prediction_position_histogram(&entries, backends.predictor.as_ref(), k)?;
    emit(a.out.as_deref(), &hist.table())?;
    Ok(ExitCode::SUCCESS)
}
