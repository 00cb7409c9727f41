//! Span-level micro-averaged P/R/F1, token accuracy, and per-fold paired
//! significance with the all-folds Bonferroni rule.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::{LabelSequence, Span};
use crate::error::{Error, Result};

/// Micro-averaged precision/recall/F1 with the underlying counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

impl PrfScore {
    /// Applies the 0-conventions: P (resp. R, F1) is 0 when its denominator
    /// is 0.
    pub fn from_counts(true_pos: usize, false_pos: usize, false_neg: usize) -> Self {
        let precision = ratio(true_pos, true_pos + false_pos);
        let recall = ratio(true_pos, true_pos + false_neg);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        PrfScore { precision, recall, f1, true_pos, false_pos, false_neg }
    }
}

fn ratio(num: usize, denom: usize) -> f64 {
    if denom == 0 {
        0.0
    } else {
        num as f64 / denom as f64
    }
}

/// Micro-averaged span P/R/F1: exact (start, end, kind) matches, summed
/// over aligned sentences.
pub fn micro_prf(gold: &[Vec<Span>], pred: &[Vec<Span>]) -> PrfScore {
    assert_eq!(gold.len(), pred.len(), "gold/pred sentence counts differ");
    let (mut tp, mut fp, mut fneg) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        let gset: std::collections::HashSet<&Span> = g.iter().collect();
        let matched = p.iter().filter(|s| gset.contains(s)).count();
        tp += matched;
        fp += p.len() - matched;
        fneg += g.len() - matched;
    }
    PrfScore::from_counts(tp, fp, fneg)
}

/// Span F1 of a single sentence with the 0-convention (used as the
/// per-sentence score for significance pairing).
pub fn sentence_f1(gold: &[Span], pred: &[Span]) -> f64 {
    let gset: std::collections::HashSet<&Span> = gold.iter().collect();
    let tp = pred.iter().filter(|s| gset.contains(s)).count();
    PrfScore::from_counts(tp, pred.len() - tp, gold.len() - tp).f1
}

/// Fraction of positions labeled correctly. Errors on an empty corpus
/// (no positions); panics on misaligned inputs.
pub fn token_accuracy(gold: &[LabelSequence], pred: &[LabelSequence]) -> Result<f64> {
    assert_eq!(gold.len(), pred.len(), "gold/pred sentence counts differ");
    let (mut hits, mut total) = (0usize, 0usize);
    for (g, p) in gold.iter().zip(pred) {
        assert_eq!(g.len(), p.len(), "gold/pred sentence lengths differ");
        hits += g.0.iter().zip(&p.0).filter(|(a, b)| a == b).count();
        total += g.len();
    }
    if total == 0 {
        return Err(Error::Config("token accuracy over zero positions".into()));
    }
    Ok(hits as f64 / total as f64)
}

/// One fold's paired t-test outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldTest {
    pub p_value: f64,
    pub t_stat: f64,
    pub mean_diff: f64,
    /// True when the difference vector had zero variance (p reported as 1).
    pub degenerate: bool,
}

/// Cross-fold significance verdict under the all-folds Bonferroni rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceReport {
    pub folds: Vec<FoldTest>,
    pub alpha: f64,
    /// Folds whose p-value passes the Bonferroni-corrected threshold α/k.
    pub rejected: usize,
    /// Significant only when every fold rejects.
    pub significant: bool,
}

/// Paired two-sided t-tests on per-sentence score differences, one per
/// fold. The verdict is significant only when every fold's p-value passes
/// α/k. A zero-variance difference vector yields p = 1 with a degeneracy
/// flag.
pub fn paired_significance(
    scores_a: &[Vec<f64>],
    scores_b: &[Vec<f64>],
    alpha: f64,
) -> SignificanceReport {
    assert_eq!(scores_a.len(), scores_b.len(), "fold counts differ");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0,1)");
    let k = scores_a.len();
    let mut folds = Vec::with_capacity(k);
    for (a, b) in scores_a.iter().zip(scores_b) {
        assert_eq!(a.len(), b.len(), "per-sentence vectors differ in length");
        folds.push(fold_t_test(a, b));
    }
    let threshold = alpha / k as f64;
    let rejected = folds.iter().filter(|f| f.p_value <= threshold).count();
    SignificanceReport { folds, alpha, rejected, significant: rejected == k }
}

fn fold_t_test(a: &[f64], b: &[f64]) -> FoldTest {
    let n = a.len();
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return FoldTest { p_value: 1.0, t_stat: 0.0, mean_diff: mean, degenerate: true };
    }
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    if var == 0.0 {
        return FoldTest { p_value: 1.0, t_stat: 0.0, mean_diff: mean, degenerate: true };
    }
    let se = (var / n as f64).sqrt();
    let t = mean / se;
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid t distribution");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    FoldTest { p_value: p.clamp(0.0, 1.0), t_stat: t, mean_diff: mean, degenerate: false }
}
