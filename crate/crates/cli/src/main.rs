use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use grounding::dialogue::{
    load_dialogues, load_gold, load_predictions, AnnotationMap, AnnotationRecord, Dialogue,
};
use grounding::engine::{process_dialogue, AnnotationSource, TurnTrace};
use grounding::eval::{render_report, score, ReportFormat};
use grounding::knowledge::GroundedKnowledge;
use grounding::llm::{
    build_classification_prompt, build_extraction_prompt, Annotator, CacheMode, ChatClient,
    ChatMessage, ClientConfig, ResponseCache, DEFAULT_MODEL,
};

#[derive(Parser)]
#[command(name = "grounding", version, about = "Track conversational grounding in information-seeking dialogues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify grounding acts and extract grounded knowledge with a chat model.
    Annotate(AnnotateArgs),
    /// Replay labels and knowledge through the grounding engine.
    Ground(GroundArgs),
    /// Score predictions against gold annotations.
    Evaluate(EvaluateArgs),
    /// Print the prompts that would be sent for one turn.
    Prompts(PromptsArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Line-delimited dialogue corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// Dialogues processed concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Record,
    Replay,
    Live,
}

impl From<Mode> for CacheMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Record => CacheMode::Record,
            Mode::Replay => CacheMode::Replay,
            Mode::Live => CacheMode::Live,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Machine,
}

#[derive(Args)]
struct AnnotateArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Gold annotations; their turns are the default annotation scope.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Annotate every turn instead of the gold-annotated ones.
    #[arg(long)]
    all_turns: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "replay")]
    mode: Mode,
    #[arg(long, default_value = DEFAULT_MODEL)]
    model: String,
    #[arg(long, env = "GROUNDING_LLM_ENDPOINT")]
    endpoint: Option<String>,
    /// Give the extractor the knowledge grounded so far plus only the
    /// recent turns.
    #[arg(long)]
    incremental_kb: bool,
    /// Predictions file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    Gold,
    Predictions,
}

#[derive(Args)]
struct GroundArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Where labels come from (defaults to gold when given).
    #[arg(long, value_enum)]
    labels_from: Option<Source>,
    /// Where knowledge comes from (defaults to gold when given).
    #[arg(long, value_enum)]
    knowledge_from: Option<Source>,
    /// Per-turn trace (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Final grounded knowledge per dialogue.
    #[arg(long)]
    final_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    /// Machine-readable report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format printed to stdout.
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
}

#[derive(Args)]
struct PromptsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    dialogue: String,
    #[arg(long)]
    turn: usize,
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
}

fn write_lines<T: Serialize>(out: Option<&Path>, records: &[T]) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?)
}

fn load_corpus(path: &Path) -> Result<Vec<Dialogue>> {
    load_dialogues(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn annotate(args: AnnotateArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus.corpus)?;
    let gold = match &args.gold {
        Some(p) => Some(load_gold(p, &corpus).with_context(|| format!("loading gold {}", p.display()))?),
        None => None,
    };
    if gold.is_none() && !args.all_turns {
        bail!("pass --gold to annotate the gold turns, or --all-turns");
    }
    let mode: CacheMode = args.mode.into();
    let cache = match &args.cache {
        Some(p) => Some(ResponseCache::open(p)?),
        None => None,
    };
    let config = ClientConfig {
        endpoint: args.endpoint.clone(),
        api_key: std::env::var("GROUNDING_LLM_API_KEY").ok(),
        mode,
        ..ClientConfig::default()
    };
    let client = ChatClient::new(config, cache)?;
    let annotator = Annotator::new(&client, args.model.clone()).incremental(args.incremental_kb);

    let scope = |d: &Dialogue| -> Vec<usize> {
        if args.all_turns {
            d.turns.iter().map(|t| t.index).collect()
        } else {
            gold.as_ref()
                .and_then(|g| g.get(&d.id))
                .map(|a| a.iter().map(|a| a.turn_index).collect())
                .unwrap_or_default()
        }
    };
    let results: Vec<_> = pool(args.corpus.jobs)?
        .install(|| corpus.par_iter().map(|d| annotator.annotate_dialogue(d, &scope(d))).collect());

    let mut records: Vec<AnnotationRecord> = Vec::new();
    let mut failures = Vec::new();
    for (d, r) in corpus.iter().zip(results) {
        records.extend(r.records);
        failures.extend(r.failures.into_iter().map(|e| format!("{}: {e}", d.id)));
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("{f}");
        }
        bail!("{} model requests failed", failures.len());
    }
    let soft = records.iter().filter(|r| r.error.is_some()).count();
    if soft > 0 {
        log::warn!("{soft} turns produced unparseable output");
    }
    write_lines(args.out.as_deref(), &records)
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    dialogue_id: &'a str,
    #[serde(flatten)]
    trace: &'a TurnTrace,
}

#[derive(Serialize)]
struct FinalRecord<'a> {
    dialogue_id: &'a str,
    knowledge: &'a GroundedKnowledge,
}

fn ground(args: GroundArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus.corpus)?;
    let gold = match &args.gold {
        Some(p) => Some(load_gold(p, &corpus).with_context(|| format!("loading gold {}", p.display()))?),
        None => None,
    };
    let preds = match &args.predictions {
        Some(p) => Some(
            load_predictions(p, &corpus).with_context(|| format!("loading predictions {}", p.display()))?,
        ),
        None => None,
    };
    let default = if gold.is_some() { Source::Gold } else { Source::Predictions };
    let pick = |s: Option<Source>, what: &str| -> Result<&AnnotationMap> {
        let s = s.unwrap_or(default);
        let m = match s {
            Source::Gold => gold.as_ref(),
            Source::Predictions => preds.as_ref(),
        };
        m.with_context(|| format!("no file given for {what}"))
    };
    let labels = pick(args.labels_from, "labels")?;
    let knowledge = pick(args.knowledge_from, "knowledge")?;

    let runs: Vec<_> = pool(args.corpus.jobs)?.install(|| {
        corpus
            .par_iter()
            .map(|d| {
                let none = Vec::new();
                let mut l = AnnotationSource::new(labels.get(&d.id).unwrap_or(&none));
                let mut k = AnnotationSource::new(knowledge.get(&d.id).unwrap_or(&none));
                process_dialogue(d, &mut l, &mut k)
            })
            .collect()
    });

    let mut traces = Vec::new();
    let mut finals = Vec::new();
    for (d, (state, trace)) in corpus.iter().zip(&runs) {
        for t in trace {
            if let Some(w) = &t.warning {
                log::warn!("{} turn {}: {w}", d.id, t.turn);
            }
            traces.push(TraceRecord { dialogue_id: &d.id, trace: t });
        }
        finals.push(FinalRecord {
            dialogue_id: &d.id,
            knowledge: &state.grounded,
        });
    }
    write_lines(args.out.as_deref(), &traces)?;
    if let Some(p) = &args.final_out {
        write_lines(Some(p), &finals)?;
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus)?;
    let gold = load_gold(&args.gold, &corpus).with_context(|| format!("loading gold {}", args.gold.display()))?;
    let preds = load_predictions(&args.predictions, &corpus)
        .with_context(|| format!("loading predictions {}", args.predictions.display()))?;
    let report = score(&gold, &preds)?;
    if let Some(p) = &args.out {
        let mut text = render_report(&report, ReportFormat::Machine);
        text.push('\n');
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    match args.format {
        Format::Md => {
            print!("{}", render_report(&report, ReportFormat::Markdown));
            println!();
            println!("{}", report.summary());
        }
        Format::Machine => println!("{}", render_report(&report, ReportFormat::Machine)),
    }
    Ok(())
}

fn prompts(args: PromptsArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus)?;
    let d = corpus
        .iter()
        .find(|d| d.id == args.dialogue)
        .with_context(|| format!("no dialogue '{}'", args.dialogue))?;
    if d.turn(args.turn).is_none() {
        bail!("dialogue '{}' has no turn {}", d.id, args.turn);
    }
    let history = d.history_through(args.turn);
    let sets = [
        ("classification", build_classification_prompt(history)),
        ("extraction", build_extraction_prompt(history)),
    ];
    let mut out = String::new();
    for (name, messages) in &sets {
        match args.format {
            Format::Machine => {
                #[derive(Serialize)]
                struct Prompt<'a> {
                    prompt: &'a str,
                    messages: &'a [ChatMessage],
                }
                out.push_str(&serde_json::to_string(&Prompt { prompt: name, messages })?);
                out.push('\n');
            }
            Format::Md => {
                out.push_str(&format!("## {name}\n\n"));
                for m in messages {
                    let role = serde_json::to_value(m.role)?;
                    out.push_str(&format!("{}:\n{}\n\n", role.as_str().unwrap_or_default().to_uppercase(), m.content));
                }
            }
        }
    }
    io::stdout().write_all(out.as_bytes())?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Annotate(a) => annotate(a),
        Command::Ground(a) => ground(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Prompts(a) => prompts(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
