//! The four online learners: CSP, SWVP, MIRA, and SWVM.
//!
//! All four share the decoding, violation-weighting, and QP machinery and an
//! epoch loop that stops at the first epoch with zero decoding mistakes (or
//! at the epoch cap). Weight averaging keeps the running sums needed to
//! return the arithmetic mean of the per-example weight iterates without
//! touching every coordinate at every step.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::Alphabet;
use crate::chain::Scorer;
use crate::corpus::{Corpus, LabelSequence, Sentence};
use crate::error::{Error, Result};
use crate::features::{delta_phi, global_phi, FeatureConfig, MarkovOrder};
use crate::qp::{hildreth, UpdateConstraint, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::sparse::{SparseVector, WeightVector};
use crate::violation::{
    build_templates, check_conditions, full_only, weighted_direction, GammaScheme, TemplateSet,
    UpdateDirection,
};

/// The training algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Csp,
    Swvp,
    Mira,
    Swvm,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Csp => "csp",
            Algorithm::Swvp => "swvp",
            Algorithm::Mira => "mira",
            Algorithm::Swvm => "swvm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csp" => Some(Algorithm::Csp),
            "swvp" => Some(Algorithm::Swvp),
            "mira" => Some(Algorithm::Mira),
            "swvm" => Some(Algorithm::Swvm),
            _ => None,
        }
    }

    pub fn all() -> [Algorithm; 4] {
        [Algorithm::Csp, Algorithm::Swvp, Algorithm::Mira, Algorithm::Swvm]
    }

    /// Whether the weighting-scheme hyperparameters apply.
    pub fn uses_gamma(self) -> bool {
        matches!(self, Algorithm::Swvp | Algorithm::Swvm)
    }

    /// Whether the K-best constraint count applies.
    pub fn uses_k_best(self) -> bool {
        matches!(self, Algorithm::Mira | Algorithm::Swvm)
    }
}

/// Which modification-template set updates decompose over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TemplateChoice {
    /// Size-1 templates, one per position.
    #[default]
    Singletons,
    /// Only the full template; SWVP reduces to CSP and SWVM to MIRA.
    FullOnly,
}

/// Training configuration.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub set_gamma: GammaScheme,
    pub aggressive: bool,
    pub k_best: usize,
    pub max_epochs: usize,
    /// `None` picks the per-algorithm default: off for CSP/SWVP, on for
    /// MIRA/SWVM.
    pub averaging: Option<bool>,
    pub markov_order: MarkovOrder,
    pub seed: u64,
    pub shuffle: bool,
    pub templates: TemplateChoice,
    /// Assert the γ conditions on every update and abort on failure.
    pub check_conditions: bool,
    pub use_extra_columns: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algorithm: Algorithm::Csp,
            set_gamma: GammaScheme::Uniform,
            aggressive: true,
            k_best: 1,
            max_epochs: 15,
            averaging: None,
            markov_order: MarkovOrder::Second,
            seed: 1,
            shuffle: false,
            templates: TemplateChoice::Singletons,
            check_conditions: false,
            use_extra_columns: false,
        }
    }
}

impl TrainConfig {
    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            markov_order: self.markov_order,
            use_extra_columns: self.use_extra_columns,
        }
    }

    pub fn averaging_on(&self) -> bool {
        self.averaging.unwrap_or(self.algorithm.uses_k_best())
    }
}

/// One epoch's progress counters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mistakes: usize,
    pub updates: usize,
    pub fallbacks: usize,
    /// Mean retained-template count per weighted direction (0 when none).
    pub mean_templates: f64,
    /// Violating derived labels / constraints seen so far, across epochs.
    pub cumulative_violations: usize,
}

/// A trained model: frozen alphabets, final and (optionally) averaged
/// weights, and training metadata.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: TrainConfig,
    pub feature_config: FeatureConfig,
    pub label_alphabet: Alphabet,
    pub feature_alphabet: Alphabet,
    pub weights: WeightVector,
    pub averaged_weights: Option<WeightVector>,
    pub epochs_run: usize,
    pub epoch_stats: Vec<EpochStats>,
}

impl Model {
    /// Averaged weights when averaging was on, the final vector otherwise.
    pub fn decode_weights(&self) -> &WeightVector {
        self.averaged_weights.as_ref().unwrap_or(&self.weights)
    }

    pub fn scorer(&self) -> Scorer<'_> {
        Scorer::new(
            self.decode_weights(),
            &self.label_alphabet,
            &self.feature_alphabet,
            &self.feature_config,
        )
    }

    /// Decodes a sentence; unseen features are ignored.
    pub fn predict(&self, x: &Sentence) -> LabelSequence {
        self.scorer().viterbi(x).labeling
    }
}

/// Positions at which two aligned label sequences disagree.
pub fn hamming_loss(y: &LabelSequence, z: &LabelSequence) -> usize {
    assert_eq!(y.len(), z.len(), "label sequences differ in length");
    y.0.iter().zip(&z.0).filter(|(a, b)| a != b).count()
}

struct OnlineState {
    weights: WeightVector,
    /// Σ step·delta over all updates, for the averaging identity
    /// mean = ((N+1)·w_final − u) / N.
    u: WeightVector,
    step: u64,
    feats: Alphabet,
}

impl OnlineState {
    fn apply(&mut self, delta: &SparseVector, coeff: f64) {
        self.weights.add_scaled(delta, coeff);
        self.u.add_scaled(delta, coeff * self.step as f64);
    }
}

#[derive(Default)]
struct EpochAccum {
    mistakes: usize,
    updates: usize,
    fallbacks: usize,
    directions: usize,
    template_total: usize,
    violations: usize,
}

/// Trains a model on a corpus. Dispatches on `config.algorithm`.
pub fn train(corpus: &Corpus, config: &TrainConfig) -> Result<Model> {
    if corpus.is_empty() {
        return Err(Error::Config("empty training data".into()));
    }
    if config.max_epochs < 1 {
        return Err(Error::Config("max_epochs must be at least 1".into()));
    }
    if config.k_best < 1 {
        return Err(Error::Config("k_best must be at least 1".into()));
    }
    let fcfg = config.feature_config();
    let mut labels = corpus.label_alphabet.clone();

    // pre-pass: gold labelings populate the feature alphabet; derived
    // labels grow it lazily during training
    let mut feats = Alphabet::new();
    for (x, y) in corpus.sentences.iter().zip(&corpus.labels) {
        global_phi(x, y, &labels, &mut feats, &fcfg);
    }

    let mut state = OnlineState {
        weights: WeightVector::zeros(feats.len()),
        u: WeightVector::zeros(feats.len()),
        step: 0,
        feats,
    };
    let mut epoch_stats: Vec<EpochStats> = Vec::new();
    let mut cumulative_violations = 0usize;
    let mut epochs_run = 0usize;

    for epoch in 1..=config.max_epochs {
        epochs_run = epoch;
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        if config.shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(
                config.seed.wrapping_add((epoch as u64).wrapping_mul(0x9E3779B97F4A7C15)),
            );
            order.shuffle(&mut rng);
        }
        let mut acc = EpochAccum::default();
        for &i in &order {
            let x = &corpus.sentences[i];
            let y = &corpus.labels[i];
            state.step += 1;
            match config.algorithm {
                Algorithm::Csp => step_csp(&mut state, x, y, &labels, &fcfg, &mut acc),
                Algorithm::Swvp => step_swvp(&mut state, x, y, &labels, &fcfg, config, &mut acc)?,
                Algorithm::Mira => step_mira(&mut state, x, y, &labels, &fcfg, config, &mut acc),
                Algorithm::Swvm => step_swvm(&mut state, x, y, &labels, &fcfg, config, &mut acc)?,
            }
        }
        cumulative_violations += acc.violations;
        epoch_stats.push(EpochStats {
            epoch,
            mistakes: acc.mistakes,
            updates: acc.updates,
            fallbacks: acc.fallbacks,
            mean_templates: if acc.directions == 0 {
                0.0
            } else {
                acc.template_total as f64 / acc.directions as f64
            },
            cumulative_violations,
        });
        if acc.mistakes == 0 {
            break;
        }
    }

    let averaged_weights = config.averaging_on().then(|| {
        let n = state.step as f64;
        let mut avg = WeightVector::zeros(state.weights.len());
        for i in 0..state.weights.len() {
            let id = i as u32;
            avg.set(id, ((n + 1.0) * state.weights.get(id) - state.u.get(id)) / n);
        }
        avg
    });

    labels.freeze();
    state.feats.freeze();
    Ok(Model {
        config: config.clone(),
        feature_config: fcfg,
        label_alphabet: labels,
        feature_alphabet: state.feats,
        weights: state.weights,
        averaged_weights,
        epochs_run,
        epoch_stats,
    })
}

fn templates_for(config: &TrainConfig, len: usize) -> TemplateSet {
    match config.templates {
        TemplateChoice::Singletons => build_templates(len, false),
        TemplateChoice::FullOnly => full_only(len),
    }
}

fn verify_conditions(dir: &UpdateDirection, config: &TrainConfig) -> Result<()> {
    let (cond1, cond2) = check_conditions(&dir.gamma, &dir.bundle);
    if !cond1 {
        return Err(Error::ConditionViolated(format!(
            "gamma off the simplex: {:?}",
            dir.gamma.0
        )));
    }
    // the fallback direction for a non-violating K-best candidate is the
    // plain margin constraint and is exempt from condition 2
    if !dir.fell_back && !cond2 {
        return Err(Error::ConditionViolated(format!(
            "weighted violation positive: gamma {:?}, violations {:?} (aggressive={})",
            dir.gamma.0,
            dir.bundle.violations(),
            config.aggressive,
        )));
    }
    Ok(())
}

fn step_csp(
    state: &mut OnlineState,
    x: &Sentence,
    y: &LabelSequence,
    labels: &Alphabet,
    fcfg: &FeatureConfig,
    acc: &mut EpochAccum,
) {
    let best = Scorer::new(&state.weights, labels, &state.feats, fcfg).viterbi(x);
    if best.labeling == *y {
        return;
    }
    acc.mistakes += 1;
    let delta = delta_phi(x, y, &best.labeling, labels, &mut state.feats, fcfg);
    if state.weights.dot(&delta) <= 0.0 {
        acc.violations += 1;
    }
    state.apply(&delta, 1.0);
    acc.updates += 1;
}

fn step_swvp(
    state: &mut OnlineState,
    x: &Sentence,
    y: &LabelSequence,
    labels: &Alphabet,
    fcfg: &FeatureConfig,
    config: &TrainConfig,
    acc: &mut EpochAccum,
) -> Result<()> {
    let best = Scorer::new(&state.weights, labels, &state.feats, fcfg).viterbi(x);
    if best.labeling == *y {
        return Ok(());
    }
    acc.mistakes += 1;
    let templates = templates_for(config, x.len());
    let dir = weighted_direction(
        &state.weights,
        x,
        y,
        &best.labeling,
        &templates,
        config.set_gamma,
        config.aggressive,
        labels,
        &mut state.feats,
        fcfg,
    );
    if config.check_conditions {
        verify_conditions(&dir, config)?;
    }
    acc.fallbacks += usize::from(dir.fell_back);
    acc.directions += 1;
    acc.template_total += dir.bundle.len();
    acc.violations += dir.bundle.entries.iter().filter(|e| e.violation <= 0.0).count();
    let combined = dir.combined_delta();
    state.apply(&combined, 1.0);
    acc.updates += 1;
    Ok(())
}

fn step_mira(
    state: &mut OnlineState,
    x: &Sentence,
    y: &LabelSequence,
    labels: &Alphabet,
    fcfg: &FeatureConfig,
    config: &TrainConfig,
    acc: &mut EpochAccum,
) {
    let kbest = Scorer::new(&state.weights, labels, &state.feats, fcfg).kbest(x, config.k_best);
    if kbest[0].labeling != *y {
        acc.mistakes += 1;
    }
    let mut constraints = Vec::with_capacity(kbest.len());
    for cand in &kbest {
        if cand.labeling == *y {
            continue;
        }
        let delta = delta_phi(x, y, &cand.labeling, labels, &mut state.feats, fcfg);
        if state.weights.dot(&delta) <= 0.0 {
            acc.violations += 1;
        }
        let loss = hamming_loss(y, &cand.labeling) as f64;
        constraints.push(UpdateConstraint { delta, loss });
    }
    apply_constraints(state, &constraints, acc);
}

fn step_swvm(
    state: &mut OnlineState,
    x: &Sentence,
    y: &LabelSequence,
    labels: &Alphabet,
    fcfg: &FeatureConfig,
    config: &TrainConfig,
    acc: &mut EpochAccum,
) -> Result<()> {
    let kbest = Scorer::new(&state.weights, labels, &state.feats, fcfg).kbest(x, config.k_best);
    if kbest[0].labeling != *y {
        acc.mistakes += 1;
    }
    let templates = templates_for(config, x.len());
    let mut constraints = Vec::with_capacity(kbest.len());
    for cand in &kbest {
        if cand.labeling == *y {
            continue;
        }
        // γ is computed against the pre-update vector; the QP then treats
        // the weighted combination as a fixed constraint direction
        let dir = weighted_direction(
            &state.weights,
            x,
            y,
            &cand.labeling,
            &templates,
            config.set_gamma,
            config.aggressive,
            labels,
            &mut state.feats,
            fcfg,
        );
        if config.check_conditions {
            verify_conditions(&dir, config)?;
        }
        acc.fallbacks += usize::from(dir.fell_back);
        acc.directions += 1;
        acc.template_total += dir.bundle.len();
        acc.violations += dir.bundle.entries.iter().filter(|e| e.violation <= 0.0).count();
        let loss = hamming_loss(y, &cand.labeling) as f64;
        constraints.push(UpdateConstraint { delta: dir.combined_delta(), loss });
    }
    apply_constraints(state, &constraints, acc);
    Ok(())
}

fn apply_constraints(state: &mut OnlineState, constraints: &[UpdateConstraint], acc: &mut EpochAccum) {
    if constraints.is_empty() {
        return;
    }
    let sol = hildreth(&state.weights, constraints, DEFAULT_MAX_ITER, DEFAULT_TOL);
    let mut any = false;
    for (constraint, &tau) in constraints.iter().zip(&sol.dual) {
        if tau != 0.0 {
            state.apply(&constraint.delta, tau);
            any = true;
        }
    }
    if any {
        acc.updates += 1;
    }
}
