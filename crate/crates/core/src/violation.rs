//! Modification templates, derived labels, and violation weighting.
//!
//! An update against an inferred label `y*` is decomposed over a set of
//! templates `J`: each derives a label `m^J` copying `y*` on `J` and the
//! gold `y` elsewhere, with violation value `v^J = w·ΔΦ(x,y,m^J)`. A
//! weighting scheme then places simplex weights γ over the derived labels.
//! `m^J` is a violation when `v^J ≤ 0`.

use crate::alphabet::Alphabet;
use crate::corpus::{LabelSequence, Sentence};
use crate::features::{delta_phi, FeatureConfig, FeatureLookup};
use crate::sparse::{SparseVector, WeightVector};

/// A set of positions at which the derived label copies the inferred one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModificationTemplate {
    indices: Vec<usize>,
}

impl ModificationTemplate {
    /// Builds from positions; sorts and deduplicates. Panics when empty.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        assert!(!indices.is_empty(), "template must be non-empty");
        ModificationTemplate { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An ordered, duplicate-free collection of templates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemplateSet {
    templates: Vec<ModificationTemplate>,
}

impl TemplateSet {
    pub fn iter(&self) -> impl Iterator<Item = &ModificationTemplate> {
        self.templates.iter()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// The size-1 templates {0}, {1}, …, {L−1}; with `include_full`, the full
/// template {0..L−1} is appended (it coincides with {0} at L = 1 and is not
/// duplicated).
pub fn build_templates(len: usize, include_full: bool) -> TemplateSet {
    assert!(len >= 1, "sentence length must be positive");
    let mut templates: Vec<ModificationTemplate> =
        (0..len).map(|i| ModificationTemplate::new(vec![i])).collect();
    if include_full && len > 1 {
        templates.push(full_template(len));
    }
    TemplateSet { templates }
}

/// The template covering every position.
pub fn full_template(len: usize) -> ModificationTemplate {
    ModificationTemplate::new((0..len).collect())
}

/// The set containing only the full template (the CSP/MIRA reduction mode).
pub fn full_only(len: usize) -> TemplateSet {
    TemplateSet { templates: vec![full_template(len)] }
}

/// m^J: the inferred label on J's positions, the gold label elsewhere.
pub fn derive_label(
    y: &LabelSequence,
    y_star: &LabelSequence,
    template: &ModificationTemplate,
) -> LabelSequence {
    assert_eq!(y.len(), y_star.len(), "label sequences differ in length");
    let mut out = y.0.clone();
    for &i in template.indices() {
        assert!(i < out.len(), "template index out of range");
        out[i] = y_star.0[i];
    }
    LabelSequence(out)
}

/// One derived label with its update direction and violation value.
#[derive(Debug, Clone)]
pub struct BundleEntry {
    pub template: ModificationTemplate,
    pub derived: LabelSequence,
    pub delta: SparseVector,
    pub violation: f64,
}

/// Derived labels for a template set, in template order. Templates whose
/// derived label equals the gold label carry no signal and are dropped.
#[derive(Debug, Clone, Default)]
pub struct DerivedLabelBundle {
    pub entries: Vec<BundleEntry>,
}

impl DerivedLabelBundle {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn violations(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.violation).collect()
    }

    /// A bundle with prescribed violation values and placeholder labels,
    /// for exercising weighting schemes directly.
    pub fn from_violations(violations: &[f64]) -> Self {
        DerivedLabelBundle {
            entries: violations
                .iter()
                .enumerate()
                .map(|(i, &v)| BundleEntry {
                    template: ModificationTemplate::new(vec![i]),
                    derived: LabelSequence::default(),
                    delta: SparseVector::new(),
                    violation: v,
                })
                .collect(),
        }
    }
}

/// Computes m^J, Δ^J = ΔΦ(x,y,m^J) and v^J = w·Δ^J for every template.
/// Callers pass a distinct `y_star` (an update happens only on a mismatch).
pub fn compute_bundle(
    w: &WeightVector,
    x: &Sentence,
    y: &LabelSequence,
    y_star: &LabelSequence,
    templates: &TemplateSet,
    labels: &Alphabet,
    mut feats: impl FeatureLookup,
    config: &FeatureConfig,
) -> DerivedLabelBundle {
    let mut entries = Vec::with_capacity(templates.len());
    for template in templates.iter() {
        if template.indices().iter().all(|&i| y.0[i] == y_star.0[i]) {
            continue; // m^J = y, zero delta
        }
        let derived = derive_label(y, y_star, template);
        let delta = delta_phi(x, y, &derived, labels, &mut feats, config);
        let violation = w.dot(&delta);
        entries.push(BundleEntry { template: template.clone(), derived, delta, violation });
    }
    DerivedLabelBundle { entries }
}

/// Retains exactly the violating templates (v^J ≤ 0). `None` signals
/// fallback: nothing violates.
pub fn filter_aggressive(bundle: DerivedLabelBundle) -> Option<DerivedLabelBundle> {
    let entries: Vec<BundleEntry> =
        bundle.entries.into_iter().filter(|e| e.violation <= 0.0).collect();
    if entries.is_empty() {
        None
    } else {
        Some(DerivedLabelBundle { entries })
    }
}

/// Simplex weights over a bundle's derived labels, aligned with its entries.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaWeights(pub Vec<f64>);

/// The weighting schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaScheme {
    #[default]
    Uniform,
    /// Weight proportional to the violation magnitude.
    WeightedMargin,
    /// Exponentially larger weights for stronger violations.
    Softmin,
    /// Maximize Σ γ v over the simplex subject to Σ γ v ≤ 0.
    Optimization,
}

impl GammaScheme {
    pub fn name(self) -> &'static str {
        match self {
            GammaScheme::Uniform => "uniform",
            GammaScheme::WeightedMargin => "wm",
            GammaScheme::Softmin => "softmin",
            GammaScheme::Optimization => "optimization",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Some(GammaScheme::Uniform),
            "wm" | "weighted-margin" | "weighted_margin" => Some(GammaScheme::WeightedMargin),
            "softmin" => Some(GammaScheme::Softmin),
            "optimization" | "opt" => Some(GammaScheme::Optimization),
            _ => None,
        }
    }

    pub fn all() -> [GammaScheme; 4] {
        [
            GammaScheme::Uniform,
            GammaScheme::WeightedMargin,
            GammaScheme::Softmin,
            GammaScheme::Optimization,
        ]
    }
}

/// Computes γ under a scheme. `None` signals fallback: WM with no violating
/// template, or an infeasible Optimization problem. Panics on an empty
/// bundle (contract violation).
pub fn set_gamma(bundle: &DerivedLabelBundle, scheme: GammaScheme) -> Option<GammaWeights> {
    assert!(!bundle.is_empty(), "set_gamma on empty bundle");
    let v = bundle.violations();
    let m = v.len();
    let gamma = match scheme {
        GammaScheme::Uniform => vec![1.0 / m as f64; m],
        GammaScheme::WeightedMargin => {
            let mags: Vec<f64> = v.iter().map(|&x| x.min(0.0).abs()).collect();
            let denom: f64 = mags.iter().sum();
            if denom == 0.0 {
                return None;
            }
            mags.iter().map(|&x| x / denom).collect()
        }
        GammaScheme::Softmin => {
            // softmax of −v with max-shift for overflow safety
            let shift = v.iter().map(|&x| -x).fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = v.iter().map(|&x| (-x - shift).exp()).collect();
            let denom: f64 = exps.iter().sum();
            exps.iter().map(|&e| e / denom).collect()
        }
        GammaScheme::Optimization => {
            // maximize Σ γ v over the simplex s.t. Σ γ v ≤ 0; ties break by
            // template order. Solved at the vertices / a two-vertex mix.
            let (mut p, mut vmax) = (0usize, v[0]);
            let (mut nk, mut vmin) = (0usize, v[0]);
            for (i, &x) in v.iter().enumerate().skip(1) {
                if x > vmax {
                    vmax = x;
                    p = i;
                }
                if x < vmin {
                    vmin = x;
                    nk = i;
                }
            }
            if vmax <= 0.0 {
                let mut g = vec![0.0; m];
                g[p] = 1.0;
                g
            } else if vmin > 0.0 {
                return None; // every mix has Σ γ v ≥ vmin > 0
            } else {
                // mix the most positive and most negative vertices to land
                // on the boundary Σ γ v = 0, the best feasible objective
                let lambda = -vmin / (vmax - vmin);
                let mut g = vec![0.0; m];
                g[p] = lambda;
                g[nk] += 1.0 - lambda;
                g
            }
        }
    };
    Some(GammaWeights(gamma))
}

const SIMPLEX_TOL: f64 = 1e-9;

/// Tests the two convergence conditions: (1) γ on the simplex, (2) the
/// γ-weighted violation non-positive (to 1e-9).
pub fn check_conditions(gamma: &GammaWeights, bundle: &DerivedLabelBundle) -> (bool, bool) {
    assert_eq!(gamma.0.len(), bundle.len(), "gamma/bundle misaligned");
    let sum: f64 = gamma.0.iter().sum();
    let cond1 = (sum - 1.0).abs() <= SIMPLEX_TOL && gamma.0.iter().all(|&g| g >= -SIMPLEX_TOL);
    let weighted: f64 =
        gamma.0.iter().zip(&bundle.entries).map(|(&g, e)| g * e.violation).sum();
    let cond2 = weighted <= SIMPLEX_TOL;
    (cond1, cond2)
}

/// A resolved update direction: the retained bundle, its γ, and whether the
/// engine fell back to the full template.
#[derive(Debug, Clone)]
pub struct UpdateDirection {
    pub bundle: DerivedLabelBundle,
    pub gamma: GammaWeights,
    pub fell_back: bool,
}

impl UpdateDirection {
    /// Σ_J γ(m^J) ΔΦ(x,y,m^J).
    pub fn combined_delta(&self) -> SparseVector {
        SparseVector::weighted_sum(
            self.bundle.entries.iter().zip(&self.gamma.0).map(|(e, &g)| (&e.delta, g)),
        )
    }
}

/// Full weighting pipeline with the fallback rule: build the bundle, apply
/// aggressive filtering if requested, compute γ, and verify condition 2.
/// Whenever a step signals fallback the direction degrades to the single
/// full template {0..L−1} with γ = 1 (whose derived label is y* itself).
pub fn weighted_direction(
    w: &WeightVector,
    x: &Sentence,
    y: &LabelSequence,
    y_star: &LabelSequence,
    templates: &TemplateSet,
    scheme: GammaScheme,
    aggressive: bool,
    labels: &Alphabet,
    mut feats: impl FeatureLookup,
    config: &FeatureConfig,
) -> UpdateDirection {
    let bundle = compute_bundle(w, x, y, y_star, templates, labels, &mut feats, config);
    let full = full_template(y.len());
    let full_entry = bundle.entries.iter().find(|e| e.template == full).cloned();

    let mut fall_back = |full_entry: Option<BundleEntry>| -> UpdateDirection {
        let entry = full_entry.unwrap_or_else(|| {
            let delta = delta_phi(x, y, y_star, labels, &mut feats, config);
            let violation = w.dot(&delta);
            BundleEntry { template: full_template(y.len()), derived: y_star.clone(), delta, violation }
        });
        UpdateDirection {
            bundle: DerivedLabelBundle { entries: vec![entry] },
            gamma: GammaWeights(vec![1.0]),
            fell_back: true,
        }
    };

    let kept = if aggressive {
        match filter_aggressive(bundle) {
            Some(kept) => kept,
            None => return fall_back(full_entry),
        }
    } else {
        bundle
    };
    let gamma = match set_gamma(&kept, scheme) {
        Some(g) => g,
        None => return fall_back(full_entry),
    };
    let (_, cond2) = check_conditions(&gamma, &kept);
    if !cond2 {
        return fall_back(full_entry);
    }
    UpdateDirection { bundle: kept, gamma, fell_back: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::global_phi;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn size_one_templates() {
        let set = build_templates(3, false);
        let expect: Vec<Vec<usize>> = vec![vec![0], vec![1], vec![2]];
        assert_eq!(set.iter().map(|t| t.indices().to_vec()).collect::<Vec<_>>(), expect);
    }

    #[test]
    fn include_full_appends_the_full_template() {
        let set = build_templates(3, true);
        assert_eq!(set.len(), 4);
        assert_eq!(set.iter().last().unwrap().indices(), &[0, 1, 2]);
    }

    #[test]
    fn length_one_single_template_is_already_full() {
        let set = build_templates(1, true);
        assert_eq!(set.len(), 1);
        assert_eq!(set.iter().next().unwrap().indices(), &[0]);
    }

    #[test]
    fn derive_label_splices_inferred_positions() {
        // gold [Person,None,None], inferred [Person,Person,Person], J={3rd}
        let y = LabelSequence(vec![0, 1, 1]);
        let y_star = LabelSequence(vec![0, 0, 0]);
        let m = derive_label(&y, &y_star, &ModificationTemplate::new(vec![2]));
        assert_eq!(m.0, vec![0, 1, 0]);
    }

    #[test]
    fn full_template_derives_y_star_and_noop_derives_y() {
        let y = LabelSequence(vec![0, 1, 2]);
        let y_star = LabelSequence(vec![2, 1, 0]);
        assert_eq!(derive_label(&y, &y_star, &full_template(3)), y_star);
        assert_eq!(derive_label(&y, &y.clone(), &ModificationTemplate::new(vec![1])), y);
    }

    fn tiny_setup() -> (Sentence, Alphabet, Alphabet, FeatureConfig) {
        let x = Sentence::from_surfaces(["a", "b", "c"]);
        let mut labels = Alphabet::new();
        labels.intern("P").unwrap();
        labels.intern("Q").unwrap();
        (x, labels, Alphabet::new(), FeatureConfig::default())
    }

    #[test]
    fn single_mismatch_keeps_only_that_template() {
        let (x, labels, mut feats, config) = tiny_setup();
        let y = LabelSequence(vec![0, 0, 0]);
        let y_star = LabelSequence(vec![0, 1, 0]);
        let mut w = WeightVector::new();
        // give weight to some gold features so v is non-trivial
        let phi = global_phi(&x, &y, &labels, &mut feats, &config);
        for (id, _) in phi.iter() {
            w.set(id, 0.5);
        }
        let set = build_templates(3, false);
        let bundle = compute_bundle(&w, &x, &y, &y_star, &set, &labels, &mut feats, &config);
        assert_eq!(bundle.len(), 1);
        assert_eq!(bundle.entries[0].template.indices(), &[1]);
        let full_delta = delta_phi(&x, &y, &y_star, &labels, &mut feats, &config);
        assert!((bundle.entries[0].violation - w.dot(&full_delta)).abs() < 1e-9);
    }

    #[test]
    fn zero_weights_make_every_template_a_weak_violation() {
        let (x, labels, mut feats, config) = tiny_setup();
        let y = LabelSequence(vec![0, 0, 0]);
        let y_star = LabelSequence(vec![1, 1, 1]);
        let w = WeightVector::new();
        let set = build_templates(3, false);
        let bundle = compute_bundle(&w, &x, &y, &y_star, &set, &labels, &mut feats, &config);
        assert_eq!(bundle.len(), 3);
        assert!(bundle.violations().iter().all(|&v| v == 0.0));
        assert!(filter_aggressive(bundle).is_some());
    }

    #[test]
    fn aggressive_filter_keeps_nonpositive_violations() {
        let bundle = DerivedLabelBundle::from_violations(&[-2.0, 1.0, 0.0]);
        let kept = filter_aggressive(bundle).unwrap();
        assert_eq!(kept.violations(), vec![-2.0, 0.0]);

        assert!(filter_aggressive(DerivedLabelBundle::from_violations(&[0.5, 2.0])).is_none());

        let all_violating = DerivedLabelBundle::from_violations(&[-1.0, 0.0]);
        assert_eq!(filter_aggressive(all_violating).unwrap().violations(), vec![-1.0, 0.0]);
    }

    #[test]
    fn uniform_gamma() {
        let bundle = DerivedLabelBundle::from_violations(&[-1.0, 2.0, 0.0, -3.0]);
        let g = set_gamma(&bundle, GammaScheme::Uniform).unwrap();
        assert_eq!(g.0, vec![0.25; 4]);
    }

    #[test]
    fn weighted_margin_gamma() {
        let bundle = DerivedLabelBundle::from_violations(&[-2.0, -1.0, 3.0]);
        let g = set_gamma(&bundle, GammaScheme::WeightedMargin).unwrap();
        assert!((g.0[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((g.0[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(g.0[2], 0.0);

        let none = DerivedLabelBundle::from_violations(&[1.0, 2.0]);
        assert!(set_gamma(&none, GammaScheme::WeightedMargin).is_none());
    }

    #[test]
    fn softmin_gamma() {
        let bundle = DerivedLabelBundle::from_violations(&[0.0, 0.0]);
        let g = set_gamma(&bundle, GammaScheme::Softmin).unwrap();
        assert!((g.0[0] - 0.5).abs() < 1e-12);

        let bundle = DerivedLabelBundle::from_violations(&[-(2.0f64.ln()), 0.0]);
        let g = set_gamma(&bundle, GammaScheme::Softmin).unwrap();
        assert!((g.0[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((g.0[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn softmin_handles_extreme_values() {
        let bundle = DerivedLabelBundle::from_violations(&[-800.0, 0.0, 900.0]);
        let g = set_gamma(&bundle, GammaScheme::Softmin).unwrap();
        assert!(g.0.iter().all(|x| x.is_finite()));
        assert!((g.0.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((g.0[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn optimization_gamma_all_nonpositive_picks_argmax_vertex() {
        let bundle = DerivedLabelBundle::from_violations(&[-3.0, -1.0]);
        let g = set_gamma(&bundle, GammaScheme::Optimization).unwrap();
        assert_eq!(g.0, vec![0.0, 1.0]);
    }

    #[test]
    fn optimization_gamma_mixes_to_zero_objective() {
        let bundle = DerivedLabelBundle::from_violations(&[2.0, -2.0]);
        let g = set_gamma(&bundle, GammaScheme::Optimization).unwrap();
        assert_eq!(g.0, vec![0.5, 0.5]);
        let objective: f64 =
            g.0.iter().zip(bundle.violations()).map(|(&a, b)| a * b).sum();
        assert!(objective.abs() < 1e-12);
    }

    #[test]
    fn optimization_gamma_infeasible_when_all_positive() {
        let bundle = DerivedLabelBundle::from_violations(&[0.5, 2.0]);
        assert!(set_gamma(&bundle, GammaScheme::Optimization).is_none());
    }

    #[test]
    fn conditions_on_aggressive_bundles_hold_for_all_schemes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let m = rng.random_range(1..8);
            let v: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
            let Some(kept) = filter_aggressive(DerivedLabelBundle::from_violations(&v)) else {
                continue;
            };
            for scheme in GammaScheme::all() {
                let Some(gamma) = set_gamma(&kept, scheme) else {
                    assert_eq!(scheme, GammaScheme::WeightedMargin);
                    continue;
                };
                let (c1, c2) = check_conditions(&gamma, &kept);
                assert!(c1, "{scheme:?} broke the simplex on {v:?}");
                assert!(c2, "{scheme:?} broke condition 2 on {v:?}");
            }
        }
    }

    #[test]
    fn condition2_fails_for_uniform_on_net_positive_bundle() {
        let bundle = DerivedLabelBundle::from_violations(&[-1.0, 5.0]);
        let gamma = set_gamma(&bundle, GammaScheme::Uniform).unwrap();
        let (c1, c2) = check_conditions(&gamma, &bundle);
        assert!(c1);
        assert!(!c2); // Σ γ v = 2 > 0
    }

    #[test]
    fn condition1_fails_off_simplex() {
        let bundle = DerivedLabelBundle::from_violations(&[-1.0, -2.0]);
        let (c1, _) = check_conditions(&GammaWeights(vec![0.7, 0.2]), &bundle);
        assert!(!c1);
    }

    #[test]
    fn wm_and_softmin_are_permutation_equivariant() {
        let v = [-2.5, -0.5, 1.0, -1.0];
        let perm = [2usize, 0, 3, 1];
        for scheme in [GammaScheme::WeightedMargin, GammaScheme::Softmin] {
            let g = set_gamma(&DerivedLabelBundle::from_violations(&v), scheme).unwrap();
            let vp: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
            let gp = set_gamma(&DerivedLabelBundle::from_violations(&vp), scheme).unwrap();
            for (k, &i) in perm.iter().enumerate() {
                assert!((gp.0[k] - g.0[i]).abs() < 1e-12, "{scheme:?}");
            }
        }
    }

    #[test]
    fn softmin_with_equal_violations_is_uniform() {
        let bundle = DerivedLabelBundle::from_violations(&[-1.5; 5]);
        let softmin = set_gamma(&bundle, GammaScheme::Softmin).unwrap();
        let uniform = set_gamma(&bundle, GammaScheme::Uniform).unwrap();
        for (a, b) in softmin.0.iter().zip(&uniform.0) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn optimization_beats_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let m = rng.random_range(2..7);
            let v: Vec<f64> = (0..m).map(|_| rng.random_range(-4.0..4.0)).collect();
            let bundle = DerivedLabelBundle::from_violations(&v);
            let Some(gamma) = set_gamma(&bundle, GammaScheme::Optimization) else {
                assert!(v.iter().all(|&x| x > 0.0));
                continue;
            };
            let best: f64 = gamma.0.iter().zip(&v).map(|(&g, &x)| g * x).sum();
            assert!(best <= 1e-9);
            for _ in 0..200 {
                // random simplex point via normalized exponentials
                let raw: Vec<f64> = (0..m).map(|_| -(rng.random::<f64>().ln())).collect();
                let total: f64 = raw.iter().sum();
                let point: Vec<f64> = raw.iter().map(|&r| r / total).collect();
                let obj: f64 = point.iter().zip(&v).map(|(&g, &x)| g * x).sum();
                if obj <= 0.0 {
                    assert!(best >= obj - 1e-9);
                }
            }
        }
    }

    #[test]
    fn weighted_direction_falls_back_to_full_template() {
        let (x, labels, mut feats, config) = tiny_setup();
        let y = LabelSequence(vec![0, 0, 0]);
        let y_star = LabelSequence(vec![1, 1, 1]);
        // make every size-1 template non-violating: weight gold features up
        let mut w = WeightVector::new();
        let phi = global_phi(&x, &y, &labels, &mut feats, &config);
        for (id, _) in phi.iter() {
            w.set(id, 1.0);
        }
        let set = build_templates(3, false);
        let dir = weighted_direction(
            &w, &x, &y, &y_star, &set, GammaScheme::Uniform, true, &labels, &mut feats, &config,
        );
        assert!(dir.fell_back);
        assert_eq!(dir.bundle.len(), 1);
        assert_eq!(dir.gamma.0, vec![1.0]);
        assert_eq!(dir.bundle.entries[0].derived, y_star);
        let expect = delta_phi(&x, &y, &y_star, &labels, &mut feats, &config);
        assert_eq!(dir.combined_delta(), expect);
    }
}
