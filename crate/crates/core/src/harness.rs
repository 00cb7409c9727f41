//! The experimental protocol: k-fold cross-validation over a hyperparameter
//! grid, dev-set config selection, test evaluation, significance between the
//! top two algorithms, and report rendering.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::corpus::{decode_spans, make_folds, Corpus, Scheme};
use crate::error::{Error, Result};
use crate::evaluation::{
    micro_prf, paired_significance, sentence_f1, PrfScore, SignificanceReport,
};
use crate::features::MarkovOrder;
use crate::learners::{train, Algorithm, Model, TrainConfig};
use crate::violation::GammaScheme;

/// The hyperparameter grid. Scheme and aggressiveness attach to SWVP/SWVM
/// only, K to MIRA/SWVM only; CSP has no hyperparameters.
#[derive(Debug, Clone)]
pub struct Grid {
    pub algorithms: Vec<Algorithm>,
    pub set_gamma: Vec<GammaScheme>,
    pub aggressive: Vec<bool>,
    pub k_best: Vec<usize>,
    pub max_epochs: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            algorithms: Algorithm::all().to_vec(),
            set_gamma: GammaScheme::all().to_vec(),
            aggressive: vec![true, false],
            k_best: vec![1, 3, 5],
            max_epochs: 15,
        }
    }
}

impl Grid {
    /// The configurations an algorithm explores, in deterministic order
    /// (aggressive, then scheme, then K; ties in selection resolve to the
    /// first).
    pub fn configs_for(
        &self,
        algorithm: Algorithm,
        seed: u64,
        markov_order: MarkovOrder,
    ) -> Vec<TrainConfig> {
        let base = TrainConfig {
            algorithm,
            max_epochs: self.max_epochs,
            seed,
            markov_order,
            ..TrainConfig::default()
        };
        match algorithm {
            Algorithm::Csp => vec![base],
            Algorithm::Swvp => {
                let mut out = Vec::new();
                for &aggressive in &self.aggressive {
                    for &set_gamma in &self.set_gamma {
                        out.push(TrainConfig { aggressive, set_gamma, ..base.clone() });
                    }
                }
                out
            }
            Algorithm::Mira => self
                .k_best
                .iter()
                .map(|&k_best| TrainConfig { k_best, ..base.clone() })
                .collect(),
            Algorithm::Swvm => {
                let mut out = Vec::new();
                for &aggressive in &self.aggressive {
                    for &set_gamma in &self.set_gamma {
                        for &k_best in &self.k_best {
                            out.push(TrainConfig {
                                aggressive,
                                set_gamma,
                                k_best,
                                ..base.clone()
                            });
                        }
                    }
                }
                out
            }
        }
    }
}

/// Renders a config as the (aggressive/balanced, setGamma, K) triple.
pub fn summarize_config(config: &TrainConfig) -> String {
    match config.algorithm {
        Algorithm::Csp => "no hyper-parameters".to_string(),
        Algorithm::Swvp => format!(
            "{}, {}, -",
            if config.aggressive { "agg." } else { "bal." },
            config.set_gamma.name()
        ),
        Algorithm::Mira => format!("-, -, {}", config.k_best),
        Algorithm::Swvm => format!(
            "{}, {}, {}",
            if config.aggressive { "agg." } else { "bal." },
            config.set_gamma.name(),
            config.k_best
        ),
    }
}

/// Protocol settings shared by every run in an experiment.
#[derive(Debug, Clone)]
pub struct CvSettings {
    pub folds: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub dataset: String,
    pub markov_order: MarkovOrder,
    pub alpha: f64,
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings {
            folds: 5,
            seed: 1,
            scheme: Scheme::Iob2,
            dataset: "corpus".into(),
            markov_order: MarkovOrder::Second,
            alpha: 0.05,
        }
    }
}

/// One fold's scores under an algorithm's selected configuration.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub fold_id: usize,
    pub dev: PrfScore,
    pub test: PrfScore,
    pub per_sentence_test_f1: Vec<f64>,
}

/// An algorithm's selected configuration and its fold scores.
#[derive(Debug, Clone)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    pub best_config: TrainConfig,
    pub mean_dev_f1: f64,
    pub folds: Vec<FoldOutcome>,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    /// Per-fold models retrained under the selected configuration.
    pub models: Vec<Model>,
}

/// Everything the reports are rendered from.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub dataset: String,
    pub k_folds: usize,
    pub seed: u64,
    pub alpha: f64,
    pub results: Vec<AlgorithmResult>,
    /// Indices into `results`, best mean test F1 first.
    pub ranking: Vec<usize>,
    /// Paired test between the best and second-best algorithms.
    pub significance: Option<SignificanceReport>,
}

/// Argmax over mean dev F1; ties resolve to the earliest (grid-order)
/// configuration.
pub fn select_best(mean_dev_f1: &[f64]) -> usize {
    let mut best = 0;
    for (i, &score) in mean_dev_f1.iter().enumerate().skip(1) {
        if score > mean_dev_f1[best] {
            best = i;
        }
    }
    best
}

fn evaluate_on(
    corpus: &Corpus,
    indices: &[usize],
    model: &Model,
    scheme: Scheme,
) -> (PrfScore, Vec<f64>) {
    let mut gold_spans = Vec::with_capacity(indices.len());
    let mut pred_spans = Vec::with_capacity(indices.len());
    let mut per_sentence = Vec::with_capacity(indices.len());
    for &i in indices {
        let gold = decode_spans(&corpus.labels[i], &corpus.label_alphabet, scheme);
        let predicted = model.predict(&corpus.sentences[i]);
        let pred = decode_spans(&predicted, &model.label_alphabet, scheme);
        per_sentence.push(sentence_f1(&gold, &pred));
        gold_spans.push(gold);
        pred_spans.push(pred);
    }
    (micro_prf(&gold_spans, &pred_spans), per_sentence)
}

/// Runs the full protocol: per config and fold, train on the train split
/// and score dev; per algorithm, select the config with the best mean dev
/// F1; retrain it per fold and score test; rank algorithms and test the top
/// two for significance on per-sentence test F1.
pub fn run_cv(corpus: &Corpus, grid: &Grid, settings: &CvSettings) -> Result<ExperimentReport> {
    let folds = make_folds(corpus.len(), settings.folds, settings.seed)?;

    let mut results = Vec::with_capacity(grid.algorithms.len());
    for &algorithm in &grid.algorithms {
        let configs = grid.configs_for(algorithm, settings.seed, settings.markov_order);
        if configs.is_empty() {
            return Err(Error::Config(format!("empty grid for {}", algorithm.name())));
        }

        // tuning: dev F1 for every (config, fold)
        let jobs: Vec<(usize, usize)> = (0..configs.len())
            .flat_map(|c| (0..folds.len()).map(move |f| (c, f)))
            .collect();
        let dev_scores: Vec<Result<PrfScore>> = jobs
            .par_iter()
            .map(|&(c, f)| {
                let fold = &folds[f];
                let train_corpus = corpus.subset(&fold.train);
                let model = train(&train_corpus, &configs[c]).map_err(|e| {
                    Error::Config(format!(
                        "fold {f}, {} ({}): {e}",
                        algorithm.name(),
                        summarize_config(&configs[c])
                    ))
                })?;
                Ok(evaluate_on(corpus, &fold.dev, &model, settings.scheme).0)
            })
            .collect();
        let mut per_config_dev = vec![vec![PrfScore::default(); folds.len()]; configs.len()];
        for (&(c, f), score) in jobs.iter().zip(dev_scores) {
            per_config_dev[c][f] = score?;
        }
        let mean_devs: Vec<f64> = per_config_dev
            .iter()
            .map(|fold_scores| {
                fold_scores.iter().map(|s| s.f1).sum::<f64>() / folds.len() as f64
            })
            .collect();
        let best_idx = select_best(&mean_devs);
        let best_config = configs[best_idx].clone();

        // final: retrain the selected config per fold and score test
        let per_fold: Vec<Result<(Model, FoldOutcome)>> = folds
            .par_iter()
            .map(|fold| {
                let train_corpus = corpus.subset(&fold.train);
                let model = train(&train_corpus, &best_config).map_err(|e| {
                    Error::Config(format!(
                        "fold {}, {} ({}): {e}",
                        fold.fold_id,
                        algorithm.name(),
                        summarize_config(&best_config)
                    ))
                })?;
                let (dev, _) = evaluate_on(corpus, &fold.dev, &model, settings.scheme);
                let (test, per_sentence_test_f1) =
                    evaluate_on(corpus, &fold.test, &model, settings.scheme);
                let outcome =
                    FoldOutcome { fold_id: fold.fold_id, dev, test, per_sentence_test_f1 };
                Ok((model, outcome))
            })
            .collect();
        let mut models = Vec::with_capacity(folds.len());
        let mut outcomes = Vec::with_capacity(folds.len());
        for item in per_fold {
            let (model, outcome) = item?;
            models.push(model);
            outcomes.push(outcome);
        }
        let n = outcomes.len() as f64;
        let mean_precision = outcomes.iter().map(|o| o.test.precision).sum::<f64>() / n;
        let mean_recall = outcomes.iter().map(|o| o.test.recall).sum::<f64>() / n;
        let mean_f1 = outcomes.iter().map(|o| o.test.f1).sum::<f64>() / n;
        results.push(AlgorithmResult {
            algorithm,
            best_config,
            mean_dev_f1: mean_devs[best_idx],
            folds: outcomes,
            mean_precision,
            mean_recall,
            mean_f1,
            models,
        });
    }

    let mut ranking: Vec<usize> = (0..results.len()).collect();
    ranking.sort_by(|&a, &b| {
        results[b].mean_f1.partial_cmp(&results[a].mean_f1).unwrap().then(a.cmp(&b))
    });
    let significance = (results.len() >= 2).then(|| {
        let first = &results[ranking[0]];
        let second = &results[ranking[1]];
        let a: Vec<Vec<f64>> =
            first.folds.iter().map(|f| f.per_sentence_test_f1.clone()).collect();
        let b: Vec<Vec<f64>> =
            second.folds.iter().map(|f| f.per_sentence_test_f1.clone()).collect();
        paired_significance(&a, &b, settings.alpha)
    });

    Ok(ExperimentReport {
        dataset: settings.dataset.clone(),
        k_folds: settings.folds,
        seed: settings.seed,
        alpha: settings.alpha,
        results,
        ranking,
        significance,
    })
}

/// Renders the aligned-text table and the CSV
/// (`algorithm,dataset,fold,split,P,R,F1`).
pub fn render_report(report: &ExperimentReport) -> (String, String) {
    let mut txt = String::new();
    let _ = writeln!(
        txt,
        "dataset: {}   folds: {}   seed: {}",
        report.dataset, report.k_folds, report.seed
    );
    txt.push('\n');
    let _ = writeln!(
        txt,
        "{:<10} {:>8} {:>8} {:>9}   best configuration",
        "algorithm", "P", "R", "F1"
    );
    let starred = report
        .significance
        .as_ref()
        .is_some_and(|s| s.significant)
        .then(|| report.ranking[0]);
    for &idx in &report.ranking {
        let r = &report.results[idx];
        let f1_cell = format!(
            "{:.2}{}",
            100.0 * r.mean_f1,
            if starred == Some(idx) { "*" } else { "" }
        );
        let _ = writeln!(
            txt,
            "{:<10} {:>8.2} {:>8.2} {:>9}   {}",
            r.algorithm.name(),
            100.0 * r.mean_precision,
            100.0 * r.mean_recall,
            f1_cell,
            summarize_config(&r.best_config),
        );
    }
    txt.push('\n');
    if let Some(sig) = &report.significance {
        let first = &report.results[report.ranking[0]];
        let second = &report.results[report.ranking[1]];
        let _ = writeln!(
            txt,
            "significance ({} vs {}, alpha {}, Bonferroni k={}): {} ({}/{} folds rejected)",
            first.algorithm.name(),
            second.algorithm.name(),
            sig.alpha,
            report.k_folds,
            if sig.significant { "significant" } else { "not significant" },
            sig.rejected,
            report.k_folds,
        );
        let p_values: Vec<String> =
            sig.folds.iter().map(|f| format!("{:.4}", f.p_value)).collect();
        let _ = writeln!(txt, "per-fold p-values: {}", p_values.join(", "));
        txt.push('\n');
    }
    let _ = writeln!(txt, "best configurations (aggressive/balanced, setGamma, K):");
    for r in &report.results {
        let _ = writeln!(txt, "  {}: {}", r.algorithm.name(), summarize_config(&r.best_config));
    }

    let mut csv = String::from("algorithm,dataset,fold,split,P,R,F1\n");
    for r in &report.results {
        for fold in &r.folds {
            for (split, score) in [("dev", &fold.dev), ("test", &fold.test)] {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{:.6},{:.6},{:.6}",
                    r.algorithm.name(),
                    report.dataset,
                    fold.fold_id,
                    split,
                    score.precision,
                    score.recall,
                    score.f1,
                );
            }
        }
    }
    (txt, csv)
}

/// An experiment description parsed from `key = value` text. Lines starting
/// with `#` are comments.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub corpus_path: PathBuf,
    pub dataset: Option<String>,
    pub scheme: Scheme,
    pub label_col: Option<usize>,
    pub folds: usize,
    pub seed: u64,
    pub grid: Grid,
    pub markov_order: MarkovOrder,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut corpus_path: Option<PathBuf> = None;
        let mut output_dir: Option<PathBuf> = None;
        let mut dataset = None;
        let mut scheme = Scheme::Iob2;
        let mut label_col = None;
        let mut folds = 5usize;
        let mut seed = 1u64;
        let mut grid = Grid::default();
        let mut markov_order = MarkovOrder::Second;

        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| Error::Config(format!("bad value for '{key}': {what}"));
            match key {
                "corpus" => corpus_path = Some(PathBuf::from(value)),
                "output_dir" => output_dir = Some(PathBuf::from(value)),
                "dataset" => dataset = Some(value.to_string()),
                "scheme" => scheme = value.parse()?,
                "label_col" => {
                    label_col = Some(value.parse().map_err(|_| bad("not an index"))?)
                }
                "folds" => folds = value.parse().map_err(|_| bad("not a count"))?,
                "seed" => seed = value.parse().map_err(|_| bad("not an integer"))?,
                "epochs" => grid.max_epochs = value.parse().map_err(|_| bad("not a count"))?,
                "markov_order" => {
                    let raw: u8 = value.parse().map_err(|_| bad("not 1 or 2"))?;
                    markov_order = MarkovOrder::from_u8(raw).ok_or_else(|| bad("not 1 or 2"))?;
                }
                "algorithms" => {
                    grid.algorithms = split_list(value)
                        .map(|s| Algorithm::parse(s).ok_or_else(|| bad(s)))
                        .collect::<Result<_>>()?;
                }
                "set_gamma" => {
                    grid.set_gamma = split_list(value)
                        .map(|s| GammaScheme::parse(s).ok_or_else(|| bad(s)))
                        .collect::<Result<_>>()?;
                }
                "aggressive" => {
                    grid.aggressive = split_list(value)
                        .map(|s| match s {
                            "on" | "true" => Ok(true),
                            "off" | "false" => Ok(false),
                            other => Err(bad(other)),
                        })
                        .collect::<Result<_>>()?;
                }
                "k_best" => {
                    grid.k_best = split_list(value)
                        .map(|s| s.parse::<usize>().map_err(|_| bad(s)))
                        .collect::<Result<_>>()?;
                }
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        Ok(ExperimentConfig {
            corpus_path: corpus_path
                .ok_or_else(|| Error::Config("missing required key 'corpus'".into()))?,
            dataset,
            scheme,
            label_col,
            folds,
            seed,
            grid,
            markov_order,
            output_dir: output_dir
                .ok_or_else(|| Error::Config("missing required key 'output_dir'".into()))?,
        })
    }

    pub fn settings(&self) -> CvSettings {
        let dataset = self.dataset.clone().unwrap_or_else(|| {
            self.corpus_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "corpus".into())
        });
        CvSettings {
            folds: self.folds,
            seed: self.seed,
            scheme: self.scheme,
            dataset,
            markov_order: self.markov_order,
            alpha: 0.05,
        }
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}
