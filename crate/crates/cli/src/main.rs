//! seqlab command line: train, predict, evaluate, cv, compare.
//!
//! Exit codes: 0 success, 2 configuration error, 3 parse/alignment error,
//! 4 model checksum mismatch, 1 anything else. Stdout carries data;
//! diagnostics go to stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seqlab::corpus::{decode_span_names, parse_conll, ParseOptions};
use seqlab::error::Error;
use seqlab::evaluation::micro_prf;
use seqlab::harness::{render_report, run_cv, summarize_config, ExperimentConfig};
use seqlab::learners::{train, Algorithm, TrainConfig};
use seqlab::violation::GammaScheme;
use seqlab::{model_io, MarkovOrder, Scheme, Sentence, Span};

#[derive(Parser)]
#[command(name = "seqlab", about = "Sequence labeling with online structured learners", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a CoNLL corpus
    Train(TrainArgs),
    /// Append predicted labels to a CoNLL file
    Predict(PredictArgs),
    /// Span-level micro P/R/F1 of a prediction file against gold
    Evaluate(EvaluateArgs),
    /// Run the cross-validation protocol described by an experiment config
    Cv(CvArgs),
    /// Cross-validate two or more algorithms and test the top pair
    Compare(CvArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Training corpus (CoNLL columns, blank-line separated)
    #[arg(long)]
    corpus: PathBuf,
    /// csp | swvp | mira | swvm
    #[arg(long)]
    algorithm: String,
    /// Where to write the model file
    #[arg(long)]
    output: PathBuf,
    /// uniform | wm | softmin | optimization (SWVP/SWVM only)
    #[arg(long)]
    set_gamma: Option<String>,
    /// Filter non-violating templates before weighting (SWVP/SWVM only)
    #[arg(long)]
    aggressive: Option<bool>,
    /// Constraints per example from the K best labelings (MIRA/SWVM only)
    #[arg(long)]
    k_best: Option<usize>,
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    /// 1 | 2
    #[arg(long, default_value_t = 2)]
    markov_order: u8,
    /// Override the per-algorithm averaging default
    #[arg(long)]
    averaging: Option<bool>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// iob1 | iob2 (recorded corpus convention)
    #[arg(long, default_value = "iob2")]
    scheme: String,
    /// Gold label column (default: last)
    #[arg(long)]
    label_col: Option<usize>,
    /// Assert the γ conditions on every update; abort on failure
    #[arg(long)]
    check_conditions: bool,
    /// Shuffle example order each epoch (seeded)
    #[arg(long)]
    shuffle: bool,
    /// Add extra observation columns as supplementary templates
    #[arg(long)]
    use_extra_columns: bool,
    /// Suppress the per-epoch progress log
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Input CoNLL file; every non-blank line gets a predicted label
    #[arg(long)]
    input: PathBuf,
    /// Output path (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// iob1 | iob2
    #[arg(long, default_value = "iob2")]
    scheme: String,
}

#[derive(Args)]
struct CvArgs {
    /// Experiment config file (key = value lines)
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Cv(args) => cmd_cv(args, false),
        Command::Compare(args) => cmd_cv(args, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("seqlab: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Parse { .. } => 3,
        Error::ChecksumMismatch { .. } => 4,
        _ => 1,
    }
}

fn parse_scheme(raw: &str) -> Result<Scheme, Error> {
    raw.parse()
}

fn cmd_train(args: TrainArgs) -> Result<(), Error> {
    let algorithm = Algorithm::parse(&args.algorithm)
        .ok_or_else(|| Error::Config(format!("unknown algorithm '{}'", args.algorithm)))?;
    let set_gamma = match &args.set_gamma {
        Some(raw) => GammaScheme::parse(raw)
            .ok_or_else(|| Error::Config(format!("unknown set-gamma value '{raw}'")))?,
        None => GammaScheme::Uniform,
    };
    parse_scheme(&args.scheme)?;
    let markov_order = MarkovOrder::from_u8(args.markov_order)
        .ok_or_else(|| Error::Config("markov-order must be 1 or 2".into()))?;

    if !algorithm.uses_gamma() {
        if args.set_gamma.is_some() {
            eprintln!("warning: --set-gamma is ignored by {}", algorithm.name());
        }
        if args.aggressive.is_some() {
            eprintln!("warning: --aggressive is ignored by {}", algorithm.name());
        }
    }
    if !algorithm.uses_k_best() && args.k_best.is_some() {
        eprintln!("warning: --k-best is ignored by {}", algorithm.name());
    }

    let text = std::fs::read_to_string(&args.corpus)?;
    let corpus = parse_conll(
        &text,
        &ParseOptions { label_col: args.label_col, ..ParseOptions::default() },
    )?;
    let config = TrainConfig {
        algorithm,
        set_gamma,
        aggressive: args.aggressive.unwrap_or(true),
        k_best: args.k_best.unwrap_or(1),
        max_epochs: args.epochs,
        averaging: args.averaging,
        markov_order,
        seed: args.seed,
        shuffle: args.shuffle,
        check_conditions: args.check_conditions,
        use_extra_columns: args.use_extra_columns,
        ..TrainConfig::default()
    };
    let model = train(&corpus, &config)?;
    if !args.quiet {
        for stats in &model.epoch_stats {
            eprintln!(
                "epoch {} mistakes {} updates {} fallbacks {} mean_templates {:.2} cumulative_violations {}",
                stats.epoch,
                stats.mistakes,
                stats.updates,
                stats.fallbacks,
                stats.mean_templates,
                stats.cumulative_violations
            );
        }
    }
    model_io::save(&model, &args.output)?;
    eprintln!(
        "trained {} on {} sentences in {} epoch(s); model written to {}",
        algorithm.name(),
        corpus.len(),
        model.epochs_run,
        args.output.display()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), Error> {
    let model = model_io::load(&args.model)?;
    let text = std::fs::read_to_string(&args.input)?;

    let mut out = String::new();
    let mut block: Vec<&str> = Vec::new();
    let flush = |block: &mut Vec<&str>, out: &mut String| {
        if block.is_empty() {
            return;
        }
        let sentence = Sentence {
            tokens: block
                .iter()
                .map(|line| {
                    let mut cols = line.split_whitespace().map(str::to_string);
                    let surface = cols.next().unwrap_or_default();
                    seqlab::Token { surface, extra_columns: cols.collect() }
                })
                .collect(),
        };
        let labels = model.predict(&sentence);
        for (line, &id) in block.iter().zip(&labels.0) {
            out.push_str(line);
            out.push(' ');
            out.push_str(model.label_alphabet.name(id));
            out.push('\n');
        }
        out.push('\n');
        block.clear();
    };
    for line in text.lines() {
        if line.trim().is_empty() {
            flush(&mut block, &mut out);
        } else {
            block.push(line);
        }
    }
    flush(&mut block, &mut out);

    match &args.output {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let scheme = parse_scheme(&args.scheme)?;
    let gold_text = std::fs::read_to_string(&args.gold)?;
    let pred_text = std::fs::read_to_string(&args.pred)?;
    let opts = ParseOptions::default();
    let gold = parse_conll(&gold_text, &opts)?;
    let pred = parse_conll(&pred_text, &opts)?;
    if gold.len() != pred.len() {
        return Err(Error::Parse {
            line: 0,
            msg: format!("gold has {} sentences, predictions have {}", gold.len(), pred.len()),
        });
    }
    let mut gold_spans: Vec<Vec<Span>> = Vec::with_capacity(gold.len());
    let mut pred_spans: Vec<Vec<Span>> = Vec::with_capacity(pred.len());
    for (i, (g, p)) in gold.labels.iter().zip(&pred.labels).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("sentence {i}: gold has {} tokens, prediction {}", g.len(), p.len()),
            });
        }
        let g_names: Vec<&str> = g.0.iter().map(|&id| gold.label_alphabet.name(id)).collect();
        let p_names: Vec<&str> = p.0.iter().map(|&id| pred.label_alphabet.name(id)).collect();
        let _ = scheme; // lenient decoding treats both conventions alike
        gold_spans.push(decode_span_names(&g_names));
        pred_spans.push(decode_span_names(&p_names));
    }
    let score = micro_prf(&gold_spans, &pred_spans);
    println!(
        "precision {:.4} recall {:.4} f1 {:.4} (tp {} fp {} fn {})",
        score.precision, score.recall, score.f1, score.true_pos, score.false_pos, score.false_neg
    );
    println!("PRF\t{:.6}\t{:.6}\t{:.6}", score.precision, score.recall, score.f1);
    Ok(())
}

fn cmd_cv(args: CvArgs, compare: bool) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let config = ExperimentConfig::parse(&text)?;
    if compare && config.grid.algorithms.len() < 2 {
        return Err(Error::Config("compare needs at least two algorithms".into()));
    }
    let corpus_text = std::fs::read_to_string(&config.corpus_path)?;
    let corpus = parse_conll(
        &corpus_text,
        &ParseOptions { label_col: config.label_col, ..ParseOptions::default() },
    )?;
    let settings = config.settings();
    let report = run_cv(&corpus, &config.grid, &settings)?;
    let (txt, csv) = render_report(&report);

    std::fs::create_dir_all(&config.output_dir)?;
    std::fs::write(config.output_dir.join("report.txt"), &txt)?;
    std::fs::write(config.output_dir.join("report.csv"), &csv)?;
    for result in &report.results {
        for (fold, model) in result.models.iter().enumerate() {
            let stem = format!("{}_fold{}", result.algorithm.name(), fold);
            model_io::save(model, &config.output_dir.join(format!("{stem}.model")))?;
            let mut log = String::new();
            for stats in &model.epoch_stats {
                use std::fmt::Write as _;
                let _ = writeln!(
                    log,
                    "epoch {} mistakes {} updates {} fallbacks {} mean_templates {:.2} cumulative_violations {}",
                    stats.epoch,
                    stats.mistakes,
                    stats.updates,
                    stats.fallbacks,
                    stats.mean_templates,
                    stats.cumulative_violations
                );
            }
            std::fs::write(config.output_dir.join(format!("{stem}.log")), log)?;
        }
    }

    print!("{txt}");
    if compare {
        print_comparison(&report);
    }
    eprintln!("reports written to {}", config.output_dir.display());
    Ok(())
}

fn print_comparison(report: &seqlab::harness::ExperimentReport) {
    let Some(sig) = &report.significance else {
        return;
    };
    let first = &report.results[report.ranking[0]];
    let second = &report.results[report.ranking[1]];
    println!("comparison: {} vs {}", first.algorithm.name(), second.algorithm.name());
    println!(
        "  {} mean test F1 {:.4} ({})",
        first.algorithm.name(),
        first.mean_f1,
        summarize_config(&first.best_config)
    );
    println!(
        "  {} mean test F1 {:.4} ({})",
        second.algorithm.name(),
        second.mean_f1,
        summarize_config(&second.best_config)
    );
    for fold in &sig.folds {
        println!(
            "  fold p={:.4} mean_diff={:+.4}{}",
            fold.p_value,
            fold.mean_diff,
            if fold.degenerate { " (degenerate)" } else { "" }
        );
    }
    println!(
        "  verdict: {} ({}/{} folds rejected at alpha/k)",
        if sig.significant { "significant" } else { "not significant" },
        sig.rejected,
        report.k_folds
    );
}
