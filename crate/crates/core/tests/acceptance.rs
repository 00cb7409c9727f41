//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Criterion 8 is a soft gate: it must complete and emit a well-formed
//! report, and it prints the SWVM/MIRA comparison instead of asserting a
//! direction.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use seqlab::alphabet::Alphabet;
use seqlab::chain::{DecodeResult, Scorer};
use seqlab::corpus::{decode_span_names, LabelSequence, Sentence};
use seqlab::evaluation::{micro_prf, paired_significance, PrfScore};
use seqlab::features::global_phi;
use seqlab::harness::{render_report, run_cv, CvSettings, Grid};
use seqlab::learners::{train, Algorithm, TemplateChoice, TrainConfig};
use seqlab::qp::{closed_form_update, hildreth, UpdateConstraint, DEFAULT_MAX_ITER, DEFAULT_TOL};
use seqlab::synthetic::{ner_corpus, random_corpus, separable_corpus};
use seqlab::violation::{check_conditions, filter_aggressive, set_gamma, DerivedLabelBundle, GammaScheme};
use seqlab::{FeatureConfig, SparseVector, WeightVector};

fn random_instance(
    rng: &mut ChaCha8Rng,
    max_len: usize,
    max_labels: usize,
    config: &FeatureConfig,
) -> (Sentence, Alphabet, Alphabet, WeightVector) {
    let len = rng.random_range(1..=max_len);
    let n = rng.random_range(1..=max_labels);
    let vocab = ["alpha", "beta", "gamma", "delta", "eps"];
    let x = Sentence::from_surfaces((0..len).map(|_| *vocab.choose(rng).unwrap()));
    let mut labels = Alphabet::new();
    for i in 0..n {
        labels.intern(&format!("L{i}")).unwrap();
    }
    let mut feats = Alphabet::new();
    for _ in 0..4 {
        let y = LabelSequence((0..len).map(|_| rng.random_range(0..n as u32)).collect());
        global_phi(&x, &y, &labels, &mut feats, config);
    }
    feats.freeze();
    let mut w = WeightVector::zeros(feats.len());
    for id in 0..feats.len() {
        w.set(id as u32, rng.random_range(-1.0..1.0));
    }
    (x, labels, feats, w)
}

fn enumerate_all(scorer: &Scorer<'_>, x: &Sentence) -> Vec<DecodeResult> {
    let n = scorer.labels.len() as u32;
    let mut all = Vec::new();
    let mut labeling = vec![0u32; x.len()];
    loop {
        let seq = LabelSequence(labeling.clone());
        all.push(DecodeResult { score: scorer.score(x, &seq), labeling: seq });
        let mut advanced = false;
        for slot in labeling.iter_mut().rev() {
            if *slot + 1 < n {
                *slot += 1;
                advanced = true;
                break;
            }
            *slot = 0;
        }
        if !advanced {
            break;
        }
    }
    all.sort_by(|a, b| {
        b.score.partial_cmp(&a.score).unwrap().then_with(|| a.labeling.0.cmp(&b.labeling.0))
    });
    all
}

#[test]
fn criterion_1_oracle_decoding() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let config = FeatureConfig::default();
    for round in 0..500 {
        let (x, labels, feats, w) = random_instance(&mut rng, 6, 4, &config);
        let scorer = Scorer::new(&w, &labels, &feats, &config);
        let all = enumerate_all(&scorer, &x);

        let fast = scorer.viterbi(&x);
        assert_eq!(fast.labeling, all[0].labeling, "round {round}: viterbi argmax");
        assert!((fast.score - all[0].score).abs() < 1e-9, "round {round}: viterbi score");
        let brute = scorer.brute_force_argmax(&x).unwrap();
        assert_eq!(brute.labeling, all[0].labeling, "round {round}: brute-force tie rule");

        let k = rng.random_range(1..=5usize);
        let kbest = scorer.kbest(&x, k);
        let expect = &all[..k.min(all.len())];
        assert_eq!(kbest.len(), expect.len(), "round {round}: kbest length");
        for (got, want) in kbest.iter().zip(expect) {
            assert_eq!(got.labeling, want.labeling, "round {round}: kbest labels");
            assert!((got.score - want.score).abs() < 1e-9, "round {round}: kbest score");
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}, budget 30 s");
    println!("criterion 1 (oracle decoding, 500 instances in {elapsed:?}): PASS");
}

#[test]
fn criterion_2_special_case_collapse() {
    let started = Instant::now();
    let corpus = random_corpus(50, 3, 20_240_502);
    for epochs in 1..=3usize {
        let csp = train(
            &corpus,
            &TrainConfig { algorithm: Algorithm::Csp, max_epochs: epochs, ..Default::default() },
        )
        .unwrap();
        let swvp = train(
            &corpus,
            &TrainConfig {
                algorithm: Algorithm::Swvp,
                templates: TemplateChoice::FullOnly,
                max_epochs: epochs,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(csp.weights, swvp.weights, "CSP/SWVP diverged at epoch {epochs}");

        let mira = train(
            &corpus,
            &TrainConfig {
                algorithm: Algorithm::Mira,
                k_best: 3,
                max_epochs: epochs,
                ..Default::default()
            },
        )
        .unwrap();
        let swvm = train(
            &corpus,
            &TrainConfig {
                algorithm: Algorithm::Swvm,
                templates: TemplateChoice::FullOnly,
                k_best: 3,
                max_epochs: epochs,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(mira.weights.len(), swvm.weights.len(), "epoch {epochs}");
        for id in 0..mira.weights.len() as u32 {
            assert!(
                (mira.weights.get(id) - swvm.weights.get(id)).abs() < 1e-9,
                "MIRA/SWVM coordinate {id} diverged at epoch {epochs}"
            );
        }
        let (ma, sa) =
            (mira.averaged_weights.as_ref().unwrap(), swvm.averaged_weights.as_ref().unwrap());
        for id in 0..ma.len().max(sa.len()) as u32 {
            assert!((ma.get(id) - sa.get(id)).abs() < 1e-9, "averaged diverged at {epochs}");
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 60 s");
    println!("criterion 2 (full-template collapse over 3 epochs in {elapsed:?}): PASS");
}

#[test]
fn criterion_3_set_gamma_contracts() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_503);
    let mut aggressive_checked = 0;
    for _ in 0..1000 {
        let m = rng.random_range(1..10usize);
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
        let bundle = DerivedLabelBundle::from_violations(&v);

        for scheme in GammaScheme::all() {
            if let Some(gamma) = set_gamma(&bundle, scheme) {
                let (c1, _) = check_conditions(&gamma, &bundle);
                assert!(c1, "{scheme:?} broke condition 1 on {v:?}");
            }
        }
        if let Some(kept) = filter_aggressive(bundle) {
            aggressive_checked += 1;
            for scheme in GammaScheme::all() {
                let Some(gamma) = set_gamma(&kept, scheme) else {
                    // WM signals fallback only when no strict violation exists
                    assert_eq!(scheme, GammaScheme::WeightedMargin);
                    assert!(kept.violations().iter().all(|&x| x == 0.0));
                    continue;
                };
                let (c1, c2) = check_conditions(&gamma, &kept);
                assert!(c1 && c2, "{scheme:?} broke conditions on filtered {v:?}");
            }
        }
    }
    assert!(aggressive_checked > 500, "sampler starved the aggressive branch");

    let wm = set_gamma(
        &DerivedLabelBundle::from_violations(&[-2.0, -1.0, 3.0]),
        GammaScheme::WeightedMargin,
    )
    .unwrap();
    assert_eq!(wm.0, vec![2.0 / 3.0, 1.0 / 3.0, 0.0]);

    let softmin = set_gamma(
        &DerivedLabelBundle::from_violations(&[-(2.0f64.ln()), 0.0]),
        GammaScheme::Softmin,
    )
    .unwrap();
    assert!((softmin.0[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((softmin.0[1] - 1.0 / 3.0).abs() < 1e-12);
    println!("criterion 3 (SetGamma contracts on 1000 bundles): PASS");
}

#[test]
fn criterion_4_optimization_gamma_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_504);
    let mut solved = 0;
    for _ in 0..200 {
        let m = rng.random_range(2..9usize);
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-4.0..4.0)).collect();
        let bundle = DerivedLabelBundle::from_violations(&v);
        let Some(gamma) = set_gamma(&bundle, GammaScheme::Optimization) else {
            assert!(v.iter().all(|&x| x > 0.0), "fallback only when infeasible");
            continue;
        };
        solved += 1;
        let best: f64 = gamma.0.iter().zip(&v).map(|(&g, &x)| g * x).sum();
        assert!(best <= 1e-9, "solution violates the feasibility constraint");
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..m).map(|_| -(rng.random::<f64>().ln())).collect();
            let total: f64 = raw.iter().sum();
            let obj: f64 = raw.iter().zip(&v).map(|(&r, &x)| (r / total) * x).sum();
            if obj <= 0.0 {
                assert!(best >= obj - 1e-9, "random feasible point beat the solution");
            }
        }
    }
    assert!(solved >= 150, "sampler starved the feasible branch");
    println!("criterion 4 (optimization-gamma optimality on {solved} instances): PASS");
}

#[test]
fn criterion_5_qp_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_505);

    // K = 1: Hildreth agrees with the closed form
    for _ in 0..1000 {
        let d = rng.random_range(1..8usize);
        let delta = SparseVector::from_pairs(
            (0..d).map(|i| (i as u32, rng.random_range(-2.0..2.0))),
        );
        if delta.is_empty() {
            continue;
        }
        let mut w = WeightVector::zeros(d);
        for i in 0..d {
            w.set(i as u32, rng.random_range(-1.0..1.0));
        }
        let c = UpdateConstraint { delta, loss: rng.random_range(0.0..3.0) };
        let closed = closed_form_update(&w, &c).unwrap();
        let iterative = hildreth(&w, std::slice::from_ref(&c), DEFAULT_MAX_ITER, DEFAULT_TOL);
        assert!((closed.dual[0] - iterative.dual[0]).abs() < 1e-9);
        for i in 0..d as u32 {
            assert!((closed.w_next.get(i) - iterative.w_next.get(i)).abs() < 1e-9);
        }
    }

    // multi-constraint: feasibility and minimal distance among samples
    for _ in 0..25 {
        let dim = rng.random_range(2..12usize);
        let k = rng.random_range(2..=5usize);
        let z: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut w = WeightVector::zeros(dim);
        for i in 0..dim {
            w.set(i as u32, rng.random_range(-1.0..1.0));
        }
        let mut constraints = Vec::new();
        while constraints.len() < k {
            let mut d: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let along: f64 = d.iter().zip(&z).map(|(a, b)| a * b).sum();
            if along.abs() < 1e-6 {
                continue;
            }
            if along < 0.0 {
                for v in &mut d {
                    *v = -*v;
                }
            }
            let margin: f64 = d.iter().zip(&z).map(|(a, b)| a * b).sum();
            constraints.push(UpdateConstraint {
                delta: SparseVector::from_pairs(d.iter().enumerate().map(|(i, &v)| (i as u32, v))),
                loss: margin * rng.random::<f64>(),
            });
        }
        let sol = hildreth(&w, &constraints, DEFAULT_MAX_ITER, DEFAULT_TOL);
        assert!(sol.converged);
        for c in &constraints {
            assert!(sol.w_next.dot(&c.delta) >= c.loss - 1e-6, "constraint violated");
        }
        let sol_point: Vec<f64> = (0..dim).map(|i| sol.w_next.get(i as u32)).collect();
        let dist = |p: &[f64]| -> f64 {
            p.iter().enumerate().map(|(i, &v)| (v - w.get(i as u32)).powi(2)).sum()
        };
        let sol_dist = dist(&sol_point);
        let feasible = |p: &[f64]| {
            constraints.iter().all(|c| {
                c.delta.iter().map(|(id, v)| p[id as usize] * v).sum::<f64>() >= c.loss - 1e-9
            })
        };
        let mut checked = 0;
        for _ in 0..1000 {
            let lambda: f64 = rng.random();
            let mut p: Vec<f64> =
                (0..dim).map(|i| lambda * sol_point[i] + (1.0 - lambda) * z[i]).collect();
            if rng.random::<bool>() {
                for v in &mut p {
                    *v += rng.random_range(-0.5..0.5);
                }
            }
            if feasible(&p) {
                checked += 1;
                assert!(dist(&p) >= sol_dist - 1e-6, "feasible point closer than the QP solution");
            }
        }
        assert!(checked > 0);
    }
    println!("criterion 5 (QP closed form and Hildreth): PASS");
}

#[test]
fn criterion_6_convergence_on_separable_data() {
    let started = Instant::now();
    // one entity class: labels {O, B-PER, I-PER}
    let corpus = separable_corpus(100, 1, 20_240_506);
    assert_eq!(corpus.label_alphabet.len(), 3);

    let mut runs: Vec<(String, TrainConfig)> = Algorithm::all()
        .into_iter()
        .map(|algorithm| {
            (
                algorithm.name().to_string(),
                TrainConfig { algorithm, k_best: 1, ..Default::default() },
            )
        })
        .collect();
    for scheme in GammaScheme::all() {
        runs.push((
            format!("swvm/{}", scheme.name()),
            TrainConfig {
                algorithm: Algorithm::Swvm,
                set_gamma: scheme,
                aggressive: true,
                k_best: 1,
                check_conditions: true,
                ..Default::default()
            },
        ));
    }
    for (name, config) in &runs {
        let model = train(&corpus, config).unwrap();
        let last = model.epoch_stats.last().unwrap();
        assert_eq!(last.mistakes, 0, "{name} had {} mistakes at epoch cap", last.mistakes);
        assert!(model.epochs_run <= 15, "{name} exceeded the epoch budget");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget 2 min");
    println!(
        "criterion 6 (convergence of {} runs within 15 epochs in {elapsed:?}): PASS",
        runs.len()
    );
}

#[test]
fn criterion_7_evaluation_fidelity() {
    // hand-counted micro example
    let gold = vec![vec![seqlab::Span { start: 1, end: 2, kind: "PER".into() }]];
    let pred = vec![vec![
        seqlab::Span { start: 1, end: 2, kind: "PER".into() },
        seqlab::Span { start: 4, end: 5, kind: "LOC".into() },
    ]];
    let score = micro_prf(&gold, &pred);
    assert_eq!(score.precision, 0.5);
    assert_eq!(score.recall, 1.0);
    assert!((score.f1 - 2.0 / 3.0).abs() < 1e-12);

    // 20-sentence IOB fixture; per-sentence counts (tp, gold, pred) tallied
    // beside each row by applying the conlleval chunking rules by hand
    let fixture: [(&[&str], &[&str], (usize, usize, usize)); 20] = [
        (&["B-PER", "I-PER", "O"], &["B-PER", "I-PER", "O"], (1, 1, 1)),
        (&["O", "O", "O"], &["O", "O", "O"], (0, 0, 0)),
        (&["B-LOC"], &["B-LOC"], (1, 1, 1)),
        (&["B-PER", "I-PER"], &["B-PER", "O"], (0, 1, 1)),
        (&["B-PER", "O"], &["B-PER", "I-PER"], (0, 1, 1)),
        (&["I-LOC", "I-LOC"], &["B-LOC", "I-LOC"], (1, 1, 1)),
        (&["B-PER", "B-PER"], &["B-PER", "I-PER"], (0, 2, 1)),
        (&["O", "B-ORG", "I-ORG", "O"], &["O", "B-ORG", "I-ORG", "I-ORG"], (0, 1, 1)),
        (&["B-MISC", "O", "B-MISC"], &["B-MISC", "O", "O"], (1, 2, 1)),
        (&["I-PER", "I-LOC"], &["I-PER", "I-PER"], (0, 2, 1)),
        (&["O", "B-LOC", "O"], &["B-LOC", "O", "O"], (0, 1, 1)),
        (&["B-PER", "I-PER", "I-PER", "O"], &["B-PER", "I-PER", "I-PER", "O"], (1, 1, 1)),
        (&["O"], &["B-PER"], (0, 0, 1)),
        (&["B-LOC"], &["O"], (0, 1, 0)),
        (&["B-ORG", "I-ORG"], &["B-ORG", "I-ORG"], (1, 1, 1)),
        (&["B-MISC", "I-MISC", "B-MISC"], &["B-MISC", "B-MISC", "B-MISC"], (1, 2, 3)),
        (&["O", "O", "B-PER", "I-PER"], &["O", "B-PER", "I-PER", "I-PER"], (0, 1, 1)),
        (&["B-LOC", "O", "B-LOC"], &["B-LOC", "O", "B-LOC"], (2, 2, 2)),
        (&["I-ORG"], &["I-ORG"], (1, 1, 1)),
        (&["B-PER", "I-PER", "O", "B-LOC"], &["B-PER", "O", "O", "B-LOC"], (1, 2, 2)),
    ];
    let mut gold_spans = Vec::new();
    let mut pred_spans = Vec::new();
    let (mut tp, mut gold_total, mut pred_total) = (0, 0, 0);
    for (gold_tags, pred_tags, (t, g, p)) in fixture {
        let gs = decode_span_names(gold_tags);
        let ps = decode_span_names(pred_tags);
        assert_eq!(gs.len(), g, "gold span count for {gold_tags:?}");
        assert_eq!(ps.len(), p, "pred span count for {pred_tags:?}");
        tp += t;
        gold_total += g;
        pred_total += p;
        gold_spans.push(gs);
        pred_spans.push(ps);
    }
    assert_eq!((tp, gold_total, pred_total), (11, 24, 22));
    let score = micro_prf(&gold_spans, &pred_spans);
    assert_eq!(score.true_pos, 11);
    assert_eq!(score.false_pos, 22 - 11);
    assert_eq!(score.false_neg, 24 - 11);
    assert_eq!(score.precision, 11.0 / 22.0);
    assert_eq!(score.recall, 11.0 / 24.0);
    assert_eq!(score.f1, 2.0 * 11.0 / 46.0);

    // mean-of-fold F1 is not the harmonic mean of mean P and mean R
    let fold1 = PrfScore::from_counts(8, 2, 0);
    let fold2 = PrfScore::from_counts(5, 0, 5);
    let mean_f1 = (fold1.f1 + fold2.f1) / 2.0;
    let mean_p = (fold1.precision + fold2.precision) / 2.0;
    let mean_r = (fold1.recall + fold2.recall) / 2.0;
    let harmonic = 2.0 * mean_p * mean_r / (mean_p + mean_r);
    assert!((mean_f1 - harmonic).abs() > 1e-3);
    println!("criterion 7 (evaluation fidelity on the IOB fixture): PASS");
}

#[test]
fn criterion_8_desk_scale_cv_trend_report() {
    let started = Instant::now();
    let corpus = ner_corpus(500, 20_240_508);
    let grid = Grid::default(); // aggressive on/off × 4 schemes × K ∈ {1,3,5}
    let settings = CvSettings { dataset: "synth-ner".into(), seed: 11, ..Default::default() };
    let report = run_cv(&corpus, &grid, &settings).unwrap();
    let (txt, csv) = render_report(&report);
    assert!(csv.starts_with("algorithm,dataset,fold,split,P,R,F1\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 5 * 2);
    assert!(txt.contains("significance ("));
    assert!(txt.contains("best configurations"));

    let f1_of = |algorithm: Algorithm| {
        report
            .results
            .iter()
            .find(|r| r.algorithm == algorithm)
            .map(|r| (r.mean_f1, seqlab::harness::summarize_config(&r.best_config)))
            .unwrap()
    };
    let (swvm_f1, swvm_cfg) = f1_of(Algorithm::Swvm);
    let (mira_f1, mira_cfg) = f1_of(Algorithm::Mira);
    println!("criterion 8 (desk-scale trend, reported not asserted): PASS in {:?}", started.elapsed());
    println!("  swvm mean test F1 {:.4} ({swvm_cfg})", swvm_f1);
    println!("  mira mean test F1 {:.4} ({mira_cfg})", mira_f1);
    println!(
        "  direction {} the full-corpus finding (swvm > mira)",
        if swvm_f1 > mira_f1 { "matches" } else { "does not match" }
    );
    println!("--- report ---\n{txt}");
}

#[test]
fn criterion_9_significance_machinery() {
    // identical systems: every fold degenerate, not significant
    let scores = vec![vec![0.4, 0.6, 0.8, 0.5]; 5];
    let identical = paired_significance(&scores, &scores.clone(), 0.05);
    assert!(identical.folds.iter().all(|f| f.p_value == 1.0 && f.degenerate));
    assert!(!identical.significant);

    // constant positive shift with tiny noise: significant
    let mut a_folds = Vec::new();
    let mut b_folds = Vec::new();
    for f in 0..5 {
        let a: Vec<f64> = (0..40).map(|i| 0.7 + 0.002 * ((i * 7 + f) % 5) as f64).collect();
        let b: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, &v)| v - 0.05 + 1e-4 * (((i * 3) % 7) as f64 - 3.0))
            .collect();
        a_folds.push(a);
        b_folds.push(b);
    }
    let shifted = paired_significance(&a_folds, &b_folds, 0.05);
    assert_eq!(shifted.rejected, 5);
    assert!(shifted.significant);

    // better on only 4 of 5 folds: not significant
    b_folds[4] = a_folds[4].clone();
    let partial = paired_significance(&a_folds, &b_folds, 0.05);
    assert_eq!(partial.rejected, 4);
    assert!(!partial.significant);
    println!("criterion 9 (replicability rule): PASS");
}
