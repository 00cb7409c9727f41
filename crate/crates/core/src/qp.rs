//! Constrained updates min ‖w − w₀‖² s.t. w·Δ_c ≥ L_c.
//!
//! The single-constraint case has a closed form; the multi-constraint case
//! runs Hildreth's procedure, a cyclic nonnegative dual-coordinate ascent.

use crate::error::{Error, Result};
use crate::sparse::{SparseVector, WeightVector};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// One margin constraint: w·delta ≥ loss.
#[derive(Debug, Clone)]
pub struct UpdateConstraint {
    pub delta: SparseVector,
    pub loss: f64,
}

/// Result of a constrained update, in representer form
/// w_next = w + Σ_c τ_c · delta_c with τ_c ≥ 0.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub w_next: WeightVector,
    /// Dual multiplier per constraint, aligned with the input order.
    pub dual: Vec<f64>,
    /// Full passes used (1 for the closed form).
    pub iterations: usize,
    /// False when the pass budget was exhausted before the dual settled.
    pub converged: bool,
    /// Constraints skipped because their delta was all-zero with positive
    /// loss (unsatisfiable by any w).
    pub skipped: usize,
}

/// Closed-form single-constraint update:
/// τ = max(0, (loss − w·delta)/‖delta‖²), w_next = w + τ·delta.
///
/// An empty delta with positive loss is infeasible; with loss ≤ 0 the
/// constraint is vacuous and w is returned unchanged.
pub fn closed_form_update(w: &WeightVector, c: &UpdateConstraint) -> Result<QpSolution> {
    let norm_sq = c.delta.l2_norm_sq();
    if norm_sq == 0.0 {
        if c.loss > 0.0 {
            return Err(Error::Infeasible(format!(
                "empty constraint direction with required margin {}",
                c.loss
            )));
        }
        return Ok(QpSolution {
            w_next: w.clone(),
            dual: vec![0.0],
            iterations: 1,
            converged: true,
            skipped: 0,
        });
    }
    let tau = ((c.loss - w.dot(&c.delta)) / norm_sq).max(0.0);
    let mut w_next = w.clone();
    w_next.add_scaled(&c.delta, tau);
    Ok(QpSolution { w_next, dual: vec![tau], iterations: 1, converged: true, skipped: 0 })
}

/// Hildreth's procedure: cyclically set
/// τ_c ← max(0, τ_c + (loss_c − w_cur·delta_c)/‖delta_c‖²),
/// carrying w_cur = w + Σ τ·delta incrementally. Stops when the largest
/// dual change in a full pass drops below `tol` or after `max_iter` passes
/// (then the best iterate is returned with `converged = false`).
pub fn hildreth(
    w: &WeightVector,
    constraints: &[UpdateConstraint],
    max_iter: usize,
    tol: f64,
) -> QpSolution {
    assert!(max_iter >= 1, "need at least one pass");
    let norms: Vec<f64> = constraints.iter().map(|c| c.delta.l2_norm_sq()).collect();
    let skipped =
        constraints.iter().zip(&norms).filter(|(c, &n)| n == 0.0 && c.loss > 0.0).count();

    let mut w_cur = w.clone();
    let mut dual = vec![0.0; constraints.len()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut max_change = 0.0f64;
        for (c, (constraint, &norm_sq)) in constraints.iter().zip(&norms).enumerate() {
            if norm_sq == 0.0 {
                continue;
            }
            let step = (constraint.loss - w_cur.dot(&constraint.delta)) / norm_sq;
            let new_tau = (dual[c] + step).max(0.0);
            let change = new_tau - dual[c];
            if change != 0.0 {
                w_cur.add_scaled(&constraint.delta, change);
                dual[c] = new_tau;
                max_change = max_change.max(change.abs());
            }
        }
        if max_change < tol {
            converged = true;
            break;
        }
    }
    QpSolution { w_next: w_cur, dual, iterations, converged, skipped }
}
