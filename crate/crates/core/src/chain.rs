//! Scoring and exact decoding for the trigram-potential chain.
//!
//! Decoding works off per-sentence factor tables: the factor at position `i`
//! reads `(t[i-1], t[i], t[i+1])` (second order) or `(t[i-1], t[i])` (first
//! order), with BOS/EOS sentinels at the boundaries. Viterbi runs a backward
//! max pass and reconstructs forward, picking the smallest label id at every
//! tie so the argmax is the lexicographically smallest maximizer.

use crate::alphabet::Alphabet;
use crate::corpus::{LabelSequence, Sentence};
use crate::error::{Error, Result};
use crate::features::{
    emit_label_features, emit_word_features, local_score, FeatureAlphabet, FeatureConfig,
    LocalContext, MarkovOrder, PositionWords, Window, BOS_LABEL, EOS_LABEL,
};
use crate::sparse::WeightVector;

/// A decoded labeling and its model score.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub labeling: LabelSequence,
    pub score: f64,
}

/// Bound on exhaustive enumeration, |Y|^L.
const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// Read-only scoring/decoding view over a weight vector and alphabets.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    pub weights: &'a WeightVector,
    pub labels: &'a Alphabet,
    pub features: &'a FeatureAlphabet,
    pub config: &'a FeatureConfig,
}

impl<'a> Scorer<'a> {
    pub fn new(
        weights: &'a WeightVector,
        labels: &'a Alphabet,
        features: &'a FeatureAlphabet,
        config: &'a FeatureConfig,
    ) -> Self {
        Scorer { weights, labels, features, config }
    }

    fn n(&self) -> usize {
        self.labels.len()
    }

    /// w·Φ(x,y), computed via local factors without materializing Φ.
    pub fn score(&self, x: &Sentence, y: &LabelSequence) -> f64 {
        assert_eq!(x.len(), y.len(), "sentence/label length mismatch");
        (0..x.len())
            .map(|i| {
                local_score(
                    &LocalContext::at(x, y, i),
                    self.labels,
                    self.features,
                    self.config,
                    self.weights,
                )
            })
            .sum()
    }

    /// Exact argmax labeling; ties break toward the lexicographically
    /// smallest label-id sequence.
    pub fn viterbi(&self, x: &Sentence) -> DecodeResult {
        assert!(self.n() >= 1, "need at least one label");
        match self.config.markov_order {
            MarkovOrder::Second => self.viterbi_second(x),
            MarkovOrder::First => self.viterbi_first(x),
        }
    }

    /// Top `min(k, |Y|^L)` labelings, scores non-increasing, the same tie
    /// rule as `viterbi`; the first element equals the viterbi result.
    pub fn kbest(&self, x: &Sentence, k: usize) -> Vec<DecodeResult> {
        assert!(k >= 1, "k must be positive");
        match self.config.markov_order {
            MarkovOrder::Second => self.kbest_second(x, k),
            MarkovOrder::First => self.kbest_first(x, k),
        }
    }

    /// Exhaustive argmax with the same tie rule; guards against instances
    /// over 10^6 labelings.
    pub fn brute_force_argmax(&self, x: &Sentence) -> Result<DecodeResult> {
        let n = self.n() as u64;
        let mut total: u64 = 1;
        for _ in 0..x.len() {
            total = total.saturating_mul(n);
            if total > BRUTE_FORCE_LIMIT {
                return Err(Error::Guard(format!(
                    "brute force over {} labelings (limit {BRUTE_FORCE_LIMIT})",
                    format_pow(n, x.len())
                )));
            }
        }
        let mut best: Option<DecodeResult> = None;
        let mut labeling = LabelSequence(vec![0; x.len()]);
        loop {
            let score = self.score(x, &labeling);
            // strict > keeps the first (lexicographically smallest) maximum
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(DecodeResult { labeling: labeling.clone(), score });
            }
            if !increment(&mut labeling.0, self.n() as u32) {
                break;
            }
        }
        Ok(best.expect("at least one labeling"))
    }

    // ---- factor tables ------------------------------------------------

    fn ext_name(&self, id: usize) -> &str {
        let n = self.n();
        if id == n {
            BOS_LABEL
        } else if id == n + 1 {
            EOS_LABEL
        } else {
            self.labels.name(id as u32)
        }
    }

    fn label_group(&self, group: Window, tp: &str, tc: &str, tn: &str, buf: &mut String) -> f64 {
        let mut total = 0.0;
        emit_label_features(group, tp, tc, tn, buf, &mut |name| {
            if let Some(id) = self.features.get(name) {
                total += self.weights.get(id);
            }
        });
        total
    }

    fn word_group(
        &self,
        group: Window,
        words: &PositionWords<'_>,
        tp: &str,
        tc: &str,
        tn: &str,
        buf: &mut String,
    ) -> f64 {
        let mut total = 0.0;
        emit_word_features(group, words, tp, tc, tn, buf, &mut |name| {
            if let Some(id) = self.features.get(name) {
                total += self.weights.get(id);
            }
        });
        total
    }

    /// Second-order factor table: `f[i][a][b][c]` with a/c in the extended
    /// space (BOS = n at i = 0, EOS = n+1 at i = L−1). Invalid combinations
    /// are left at 0 and never read. Pure-label templates are position
    /// independent, so their tables are built once per call.
    fn factors_second(&self, x: &Sentence) -> Vec<f64> {
        let (len, n) = (x.len(), self.n());
        let ext = n + 2;
        let bos = n;
        let eos = n + 1;
        let idx = |i: usize, a: usize, b: usize, c: usize| ((i * ext + a) * n + b) * ext + c;
        let mut f = vec![0.0; len * ext * n * ext];
        let mut buf = String::with_capacity(64);

        let a_all: Vec<usize> = (0..n).chain([bos]).collect();
        let c_all: Vec<usize> = (0..n).chain([eos]).collect();
        let mut l_cur = vec![0.0; n];
        let mut l_prev = vec![0.0; ext];
        let mut l_next = vec![0.0; ext];
        let mut l_pc = vec![0.0; ext * n];
        let mut l_cn = vec![0.0; n * ext];
        let mut l_pn = vec![0.0; ext * ext];
        let mut l_tri = vec![0.0; ext * n * ext];
        for b in 0..n {
            l_cur[b] = self.label_group(Window::Cur, "", self.ext_name(b), "", &mut buf);
        }
        for &a in &a_all {
            l_prev[a] = self.label_group(Window::Prev, self.ext_name(a), "", "", &mut buf);
        }
        for &c in &c_all {
            l_next[c] = self.label_group(Window::Next, "", "", self.ext_name(c), &mut buf);
        }
        for &a in &a_all {
            let ta = self.ext_name(a).to_string();
            for b in 0..n {
                let tb = self.ext_name(b);
                l_pc[a * n + b] = self.label_group(Window::PrevCur, &ta, tb, "", &mut buf);
            }
            for &c in &c_all {
                let tc_name = self.ext_name(c);
                l_pn[a * ext + c] =
                    self.label_group(Window::PrevNext, &ta, "", tc_name, &mut buf);
            }
        }
        for b in 0..n {
            let tb = self.ext_name(b).to_string();
            for &c in &c_all {
                let tc_name = self.ext_name(c);
                l_cn[b * ext + c] = self.label_group(Window::CurNext, "", &tb, tc_name, &mut buf);
            }
        }
        for &a in &a_all {
            let ta = self.ext_name(a).to_string();
            for b in 0..n {
                let tb = self.ext_name(b).to_string();
                for &c in &c_all {
                    l_tri[(a * n + b) * ext + c] = self.label_group(
                        Window::PrevCurNext,
                        &ta,
                        &tb,
                        self.ext_name(c),
                        &mut buf,
                    );
                }
            }
        }

        let mut w_cur = vec![0.0; n];
        let mut w_prev = vec![0.0; ext];
        let mut w_next = vec![0.0; ext];
        let mut w_pc = vec![0.0; ext * n];
        let mut w_cn = vec![0.0; n * ext];
        let mut w_pn = vec![0.0; ext * ext];
        for i in 0..len {
            let words = PositionWords::at(x, i, self.config);
            let a_range: &[usize] = if i == 0 { &a_all[n..] } else { &a_all[..n] };
            let c_range: &[usize] = if i + 1 == len { &c_all[n..] } else { &c_all[..n] };
            for b in 0..n {
                w_cur[b] =
                    self.word_group(Window::Cur, &words, "", self.ext_name(b), "", &mut buf);
            }
            for &a in a_range {
                w_prev[a] =
                    self.word_group(Window::Prev, &words, self.ext_name(a), "", "", &mut buf);
            }
            for &c in c_range {
                w_next[c] =
                    self.word_group(Window::Next, &words, "", "", self.ext_name(c), &mut buf);
            }
            for &a in a_range {
                let ta = self.ext_name(a).to_string();
                for b in 0..n {
                    let tb = self.ext_name(b);
                    w_pc[a * n + b] =
                        self.word_group(Window::PrevCur, &words, &ta, tb, "", &mut buf);
                }
                for &c in c_range {
                    let tc_name = self.ext_name(c);
                    w_pn[a * ext + c] =
                        self.word_group(Window::PrevNext, &words, &ta, "", tc_name, &mut buf);
                }
            }
            for b in 0..n {
                let tb = self.ext_name(b).to_string();
                for &c in c_range {
                    let tc_name = self.ext_name(c);
                    w_cn[b * ext + c] =
                        self.word_group(Window::CurNext, &words, "", &tb, tc_name, &mut buf);
                }
            }
            for &a in a_range {
                for b in 0..n {
                    let base = l_cur[b]
                        + w_cur[b]
                        + l_prev[a]
                        + w_prev[a]
                        + l_pc[a * n + b]
                        + w_pc[a * n + b];
                    for &c in c_range {
                        f[idx(i, a, b, c)] = base
                            + l_next[c]
                            + w_next[c]
                            + l_cn[b * ext + c]
                            + w_cn[b * ext + c]
                            + l_pn[a * ext + c]
                            + w_pn[a * ext + c]
                            + l_tri[(a * n + b) * ext + c];
                    }
                }
            }
        }
        f
    }

    /// First-order factor table: `g[i][a][b]` with a in the extended space.
    fn factors_first(&self, x: &Sentence) -> Vec<f64> {
        let (len, n) = (x.len(), self.n());
        let ext = n + 1; // BOS = n; first-order templates never read t[i+1]
        let bos = n;
        let idx = |i: usize, a: usize, b: usize| (i * ext + a) * n + b;
        let mut g = vec![0.0; len * ext * n];
        let mut buf = String::with_capacity(64);

        let a_all: Vec<usize> = (0..n).chain([bos]).collect();
        let mut l_cur = vec![0.0; n];
        let mut l_prev = vec![0.0; ext];
        let mut l_pc = vec![0.0; ext * n];
        for b in 0..n {
            l_cur[b] = self.label_group(Window::Cur, "", self.ext_name(b), "", &mut buf);
        }
        for &a in &a_all {
            let ta = self.ext_name(a).to_string();
            l_prev[a] = self.label_group(Window::Prev, &ta, "", "", &mut buf);
            for b in 0..n {
                l_pc[a * n + b] =
                    self.label_group(Window::PrevCur, &ta, self.ext_name(b), "", &mut buf);
            }
        }

        for i in 0..len {
            let words = PositionWords::at(x, i, self.config);
            let a_range: &[usize] = if i == 0 { &a_all[n..] } else { &a_all[..n] };
            for b in 0..n {
                let w_cur =
                    self.word_group(Window::Cur, &words, "", self.ext_name(b), "", &mut buf);
                for &a in a_range {
                    let ta = self.ext_name(a).to_string();
                    let w_prev =
                        self.word_group(Window::Prev, &words, &ta, "", "", &mut buf);
                    let w_pc = self.word_group(
                        Window::PrevCur,
                        &words,
                        &ta,
                        self.ext_name(b),
                        "",
                        &mut buf,
                    );
                    g[idx(i, a, b)] = l_cur[b]
                        + w_cur
                        + l_prev[a]
                        + w_prev
                        + l_pc[a * n + b]
                        + w_pc;
                }
            }
        }
        g
    }

    // ---- second-order decoding ----------------------------------------

    fn viterbi_second(&self, x: &Sentence) -> DecodeResult {
        let (len, n) = (x.len(), self.n());
        let ext = n + 2;
        let bos = n;
        let eos = n + 1;
        let f = self.factors_second(x);
        let fidx = |i: usize, a: usize, b: usize, c: usize| ((i * ext + a) * n + b) * ext + c;

        if len == 1 {
            let (mut best_b, mut best) = (0usize, f[fidx(0, bos, 0, eos)]);
            for b in 1..n {
                let s = f[fidx(0, bos, b, eos)];
                if s > best {
                    best = s;
                    best_b = b;
                }
            }
            return DecodeResult { labeling: LabelSequence(vec![best_b as u32]), score: best };
        }

        // suffix[i][a][b]: best score of factors i..L-1 given y[i-1]=a, y[i]=b
        let sidx = |i: usize, a: usize, b: usize| (i * ext + a) * n + b;
        let mut suffix = vec![f64::NEG_INFINITY; len * ext * n];
        for a in 0..n {
            for b in 0..n {
                suffix[sidx(len - 1, a, b)] = f[fidx(len - 1, a, b, eos)];
            }
        }
        for i in (0..len - 1).rev() {
            let a_range: Vec<usize> = if i == 0 { vec![bos] } else { (0..n).collect() };
            for &a in &a_range {
                for b in 0..n {
                    let mut best = f64::NEG_INFINITY;
                    for c in 0..n {
                        let s = f[fidx(i, a, b, c)] + suffix[sidx(i + 1, b, c)];
                        if s > best {
                            best = s;
                        }
                    }
                    suffix[sidx(i, a, b)] = best;
                }
            }
        }

        // forward greedy reconstruction: smallest label at each tie gives
        // the lexicographically smallest argmax sequence
        let mut labeling = Vec::with_capacity(len);
        let (mut best_b, mut best) = (0usize, suffix[sidx(0, bos, 0)]);
        for b in 1..n {
            let s = suffix[sidx(0, bos, b)];
            if s > best {
                best = s;
                best_b = b;
            }
        }
        let total = best;
        labeling.push(best_b as u32);
        for i in 1..len {
            let a = if i >= 2 { labeling[i - 2] as usize } else { bos };
            let b = labeling[i - 1] as usize;
            let (mut best_c, mut best) = (0usize, f64::NEG_INFINITY);
            for c in 0..n {
                let s = f[fidx(i - 1, a, b, c)] + suffix[sidx(i, b, c)];
                if s > best {
                    best = s;
                    best_c = c;
                }
            }
            labeling.push(best_c as u32);
        }
        DecodeResult { labeling: LabelSequence(labeling), score: total }
    }

    fn kbest_second(&self, x: &Sentence, k: usize) -> Vec<DecodeResult> {
        let (len, n) = (x.len(), self.n());
        let ext = n + 2;
        let bos = n;
        let eos = n + 1;
        let f = self.factors_second(x);
        let fidx = |i: usize, a: usize, b: usize, c: usize| ((i * ext + a) * n + b) * ext + c;

        if len == 1 {
            let mut all: Vec<Hyp> = (0..n)
                .map(|b| Hyp { score: f[fidx(0, bos, b, eos)], seq: vec![b as u32] })
                .collect();
            return take_top(all.drain(..), k);
        }

        // hypotheses keyed by (y[i-1], y[i]); each keeps its full prefix so
        // ties order by the final sequence
        let mut states: Vec<Vec<Hyp>> = vec![Vec::new(); n * n];
        for b0 in 0..n {
            for b1 in 0..n {
                states[b0 * n + b1] = vec![Hyp {
                    score: f[fidx(0, bos, b0, b1)],
                    seq: vec![b0 as u32, b1 as u32],
                }];
            }
        }
        for i in 1..len - 1 {
            let mut next_states: Vec<Vec<Hyp>> = vec![Vec::new(); n * n];
            for a in 0..n {
                for b in 0..n {
                    for hyp in &states[a * n + b] {
                        for c in 0..n {
                            let mut seq = hyp.seq.clone();
                            seq.push(c as u32);
                            next_states[b * n + c].push(Hyp {
                                score: hyp.score + f[fidx(i, a, b, c)],
                                seq,
                            });
                        }
                    }
                }
            }
            for bucket in &mut next_states {
                let hyps = std::mem::take(bucket);
                *bucket = take_top_hyps(hyps, k);
            }
            states = next_states;
        }
        let mut finals = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for hyp in &states[a * n + b] {
                    finals.push(Hyp {
                        score: hyp.score + f[fidx(len - 1, a, b, eos)],
                        seq: hyp.seq.clone(),
                    });
                }
            }
        }
        take_top(finals, k)
    }

    // ---- first-order decoding -----------------------------------------

    fn viterbi_first(&self, x: &Sentence) -> DecodeResult {
        let (len, n) = (x.len(), self.n());
        let ext = n + 1;
        let bos = n;
        let g = self.factors_first(x);
        let gidx = |i: usize, a: usize, b: usize| (i * ext + a) * n + b;

        // suffix[i][b]: best score of factors i+1..L-1 given y[i]=b
        let mut suffix = vec![0.0; len * n];
        for i in (0..len - 1).rev() {
            for b in 0..n {
                let mut best = f64::NEG_INFINITY;
                for c in 0..n {
                    let s = g[gidx(i + 1, b, c)] + suffix[(i + 1) * n + c];
                    if s > best {
                        best = s;
                    }
                }
                suffix[i * n + b] = best;
            }
        }
        let mut labeling = Vec::with_capacity(len);
        let (mut best_b, mut best) = (0usize, f64::NEG_INFINITY);
        for b in 0..n {
            let s = g[gidx(0, bos, b)] + suffix[b];
            if s > best {
                best = s;
                best_b = b;
            }
        }
        let total = best;
        labeling.push(best_b as u32);
        for i in 1..len {
            let a = labeling[i - 1] as usize;
            let (mut best_c, mut best) = (0usize, f64::NEG_INFINITY);
            for c in 0..n {
                let s = g[gidx(i, a, c)] + suffix[i * n + c];
                if s > best {
                    best = s;
                    best_c = c;
                }
            }
            labeling.push(best_c as u32);
        }
        DecodeResult { labeling: LabelSequence(labeling), score: total }
    }

    fn kbest_first(&self, x: &Sentence, k: usize) -> Vec<DecodeResult> {
        let (len, n) = (x.len(), self.n());
        let ext = n + 1;
        let bos = n;
        let g = self.factors_first(x);
        let gidx = |i: usize, a: usize, b: usize| (i * ext + a) * n + b;

        let mut states: Vec<Vec<Hyp>> = (0..n)
            .map(|b| vec![Hyp { score: g[gidx(0, bos, b)], seq: vec![b as u32] }])
            .collect();
        for i in 1..len {
            let mut next_states: Vec<Vec<Hyp>> = vec![Vec::new(); n];
            for (a, bucket) in states.iter().enumerate() {
                for hyp in bucket {
                    for c in 0..n {
                        let mut seq = hyp.seq.clone();
                        seq.push(c as u32);
                        next_states[c].push(Hyp { score: hyp.score + g[gidx(i, a, c)], seq });
                    }
                }
            }
            for bucket in &mut next_states {
                let hyps = std::mem::take(bucket);
                *bucket = take_top_hyps(hyps, k);
            }
            states = next_states;
        }
        take_top(states.into_iter().flatten(), k)
    }
}

#[derive(Debug, Clone)]
struct Hyp {
    score: f64,
    seq: Vec<u32>,
}

fn hyp_order(a: &Hyp, b: &Hyp) -> std::cmp::Ordering {
    b.score.partial_cmp(&a.score).unwrap().then_with(|| a.seq.cmp(&b.seq))
}

fn take_top_hyps(mut hyps: Vec<Hyp>, k: usize) -> Vec<Hyp> {
    hyps.sort_by(hyp_order);
    hyps.truncate(k);
    hyps
}

fn take_top(hyps: impl IntoIterator<Item = Hyp>, k: usize) -> Vec<DecodeResult> {
    let mut hyps: Vec<Hyp> = hyps.into_iter().collect();
    hyps.sort_by(hyp_order);
    hyps.truncate(k);
    hyps.into_iter()
        .map(|h| DecodeResult { labeling: LabelSequence(h.seq), score: h.score })
        .collect()
}

/// Advances `seq` to the lexicographically next labeling; false at the end.
fn increment(seq: &mut [u32], n: u32) -> bool {
    for slot in seq.iter_mut().rev() {
        if *slot + 1 < n {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

fn format_pow(base: u64, exp: usize) -> String {
    format!("{base}^{exp}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::global_phi;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tiny_labels(n: usize) -> Alphabet {
        let mut a = Alphabet::new();
        for i in 0..n {
            a.intern(&format!("L{i}")).unwrap();
        }
        a
    }

    /// Grows the alphabet over a handful of random labelings and assigns
    /// random weights, so decodes see a mix of known and unknown features.
    fn random_instance(
        rng: &mut ChaCha8Rng,
        max_len: usize,
        max_labels: usize,
        config: &FeatureConfig,
    ) -> (Sentence, Alphabet, Alphabet, WeightVector) {
        let len = rng.random_range(1..=max_len);
        let n = rng.random_range(1..=max_labels);
        let vocab = ["uno", "dos", "tres", "quattro"];
        let x = Sentence::from_surfaces((0..len).map(|_| *vocab.choose(rng).unwrap()));
        let labels = tiny_labels(n);
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

    fn brute_force_kbest(scorer: &Scorer<'_>, x: &Sentence, k: usize) -> Vec<DecodeResult> {
        let n = scorer.labels.len() as u32;
        let mut all = Vec::new();
        let mut labeling = LabelSequence(vec![0; x.len()]);
        loop {
            all.push(DecodeResult {
                labeling: labeling.clone(),
                score: scorer.score(x, &labeling),
            });
            if !increment(&mut labeling.0, n) {
                break;
            }
        }
        all.sort_by(|a, b| {
            b.score.partial_cmp(&a.score).unwrap().then_with(|| a.labeling.0.cmp(&b.labeling.0))
        });
        all.truncate(k);
        all
    }

    #[test]
    fn zero_weights_score_zero_and_decode_all_zero_labels() {
        let x = Sentence::from_surfaces(["a", "b", "c"]);
        let labels = tiny_labels(3);
        let feats = Alphabet::new();
        let w = WeightVector::new();
        let config = FeatureConfig::default();
        let scorer = Scorer::new(&w, &labels, &feats, &config);
        let y = LabelSequence(vec![2, 1, 0]);
        assert_eq!(scorer.score(&x, &y), 0.0);
        let best = scorer.viterbi(&x);
        assert_eq!(best.labeling.0, vec![0, 0, 0]);
        assert_eq!(best.score, 0.0);
        let brute = scorer.brute_force_argmax(&x).unwrap();
        assert_eq!(brute.labeling, best.labeling);
    }

    #[test]
    fn score_equals_dot_with_global_phi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let config = FeatureConfig::default();
        for _ in 0..40 {
            let (x, labels, feats, w) = random_instance(&mut rng, 6, 4, &config);
            let n = labels.len() as u32;
            let y = LabelSequence((0..x.len()).map(|_| rng.random_range(0..n)).collect());
            let scorer = Scorer::new(&w, &labels, &feats, &config);
            let phi = global_phi(&x, &y, &labels, &feats, &config);
            assert!((scorer.score(&x, &y) - w.dot(&phi)).abs() < 1e-9);
        }
    }

    #[test]
    fn single_feature_weight_scores_its_count() {
        let x = Sentence::from_surfaces(["a", "b"]);
        let labels = tiny_labels(2);
        let mut feats = Alphabet::new();
        let config = FeatureConfig::default();
        let y = LabelSequence(vec![0, 1]);
        global_phi(&x, &y, &labels, &mut feats, &config);
        let id = feats.get("T_t3|BOS|L0|L1").unwrap();
        let mut w = WeightVector::new();
        w.set(id, 2.0);
        let scorer = Scorer::new(&w, &labels, &feats, &config);
        assert_eq!(scorer.score(&x, &y), 2.0);
    }

    #[test]
    fn viterbi_matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let config = FeatureConfig::default();
        for _ in 0..60 {
            let (x, labels, feats, w) = random_instance(&mut rng, 6, 4, &config);
            let scorer = Scorer::new(&w, &labels, &feats, &config);
            let fast = scorer.viterbi(&x);
            let brute = scorer.brute_force_argmax(&x).unwrap();
            assert_eq!(fast.labeling, brute.labeling);
            assert!((fast.score - brute.score).abs() < 1e-9);
        }
    }

    #[test]
    fn first_order_viterbi_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let config = FeatureConfig { markov_order: MarkovOrder::First, ..Default::default() };
        for _ in 0..40 {
            let (x, labels, feats, w) = random_instance(&mut rng, 6, 4, &config);
            let scorer = Scorer::new(&w, &labels, &feats, &config);
            let fast = scorer.viterbi(&x);
            let brute = scorer.brute_force_argmax(&x).unwrap();
            assert_eq!(fast.labeling, brute.labeling);
            assert!((fast.score - brute.score).abs() < 1e-9);
        }
    }

    #[test]
    fn length_one_argmax_over_single_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let config = FeatureConfig::default();
        for _ in 0..10 {
            let (mut x, labels, feats, w) = random_instance(&mut rng, 3, 4, &config);
            x.tokens.truncate(1);
            let scorer = Scorer::new(&w, &labels, &feats, &config);
            let fast = scorer.viterbi(&x);
            let brute = scorer.brute_force_argmax(&x).unwrap();
            assert_eq!(fast.labeling, brute.labeling);
        }
    }

    #[test]
    fn kbest_first_element_is_viterbi_and_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let config = FeatureConfig::default();
        for _ in 0..40 {
            let (x, labels, feats, w) = random_instance(&mut rng, 5, 3, &config);
            let scorer = Scorer::new(&w, &labels, &feats, &config);
            let fast = scorer.kbest(&x, 5);
            let brute = brute_force_kbest(&scorer, &x, 5);
            assert_eq!(fast.len(), brute.len());
            assert_eq!(fast[0].labeling, scorer.viterbi(&x).labeling);
            for (f, b) in fast.iter().zip(&brute) {
                assert_eq!(f.labeling, b.labeling);
                assert!((f.score - b.score).abs() < 1e-9);
            }
            for pair in fast.windows(2) {
                assert!(pair[0].score >= pair[1].score - 1e-12);
                assert_ne!(pair[0].labeling, pair[1].labeling);
            }
        }
    }

    #[test]
    fn kbest_saturates_at_all_labelings() {
        let x = Sentence::from_surfaces(["a", "b"]);
        let labels = tiny_labels(2);
        let feats = Alphabet::new();
        let w = WeightVector::new();
        let config = FeatureConfig::default();
        let scorer = Scorer::new(&w, &labels, &feats, &config);
        let all = scorer.kbest(&x, 100);
        assert_eq!(all.len(), 4);
        let unique: std::collections::HashSet<_> = all.iter().map(|r| r.labeling.clone()).collect();
        assert_eq!(unique.len(), 4);
    }

    #[test]
    fn brute_force_guards_large_instances() {
        let x = Sentence::from_surfaces((0..12).map(|i| format!("w{i}")));
        let labels = tiny_labels(4);
        let feats = Alphabet::new();
        let w = WeightVector::new();
        let config = FeatureConfig::default();
        let scorer = Scorer::new(&w, &labels, &feats, &config);
        assert!(matches!(scorer.brute_force_argmax(&x), Err(Error::Guard(_))));
    }
}
