//! Online structured-prediction learners for sequence labeling.
//!
//! This crate implements four online learners over linear-chain models with
//! trigram label potentials:
//!
//! - **CSP** — the Collins structured perceptron,
//! - **SWVP** — the structured weighted violations perceptron, which replaces
//!   the perceptron's single update direction with a simplex-weighted
//!   combination of labels derived from the inferred one,
//! - **MIRA** — the margin-infused relaxed algorithm, solving a small QP per
//!   example over K-best constraints,
//! - **SWVM** — MIRA with SWVP-style weighted-violation constraints.
//!
//! Around the learners sit CoNLL corpus ingestion, feature extraction over a
//! fixed template set, exact second-order Viterbi / K-best decoding, span
//! evaluation (micro-averaged P/R/F1), fold-based significance testing, and a
//! cross-validation harness with a hyperparameter grid.

pub mod alphabet;
pub mod chain;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod harness;
pub mod learners;
pub mod model_io;
pub mod qp;
pub mod sparse;
pub mod synthetic;
pub mod violation;

pub use alphabet::Alphabet;
pub use chain::{DecodeResult, Scorer};
pub use corpus::{Corpus, FoldSplit, LabelSequence, Scheme, Sentence, Span, Token};
pub use error::{Error, Result};
pub use features::{FeatureAlphabet, FeatureConfig, MarkovOrder};
pub use learners::{Algorithm, Model, TrainConfig};
pub use sparse::{SparseVector, WeightVector};
pub use violation::GammaScheme;
