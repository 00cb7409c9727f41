//! Feature templates over a label-trigram factorization.
//!
//! Each position emits 19 template instantiations built from the word window
//! `w[i-1..i+1]` and the label window `t[i-1..i+1]`. Observation-only
//! templates are conjoined with `t[i]` so every feature discriminates
//! labels; the conjoined `w[i]` unigram and the literal `(w[i],t[i])` bigram
//! then produce the same string, which the alphabet maps to a single id (the
//! count at that position becomes 2).
//!
//! Feature strings are `templateName|field|field|...`, with literal `|` and
//! `\` in field values escaped.

use crate::alphabet::Alphabet;
use crate::corpus::{LabelSequence, Sentence};
use crate::sparse::{SparseVector, WeightVector};

/// Alphabet specialised to feature strings.
pub type FeatureAlphabet = Alphabet;

/// Sentinel word read at out-of-range positions.
pub const BOS_WORD: &str = "<BOS>";
pub const EOS_WORD: &str = "<EOS>";
/// Sentinel label names used in feature strings at the boundaries.
pub const BOS_LABEL: &str = "BOS";
pub const EOS_LABEL: &str = "EOS";

/// Label window order: 2 uses the full trigram templates (second-order
/// decoding); 1 restricts to templates reading `t[i-1], t[i]` only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarkovOrder {
    First,
    #[default]
    Second,
}

impl MarkovOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            MarkovOrder::First => 1,
            MarkovOrder::Second => 2,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(MarkovOrder::First),
            2 => Some(MarkovOrder::Second),
            _ => None,
        }
    }
}

/// Extraction configuration.
#[derive(Debug, Clone, Default)]
pub struct FeatureConfig {
    pub markov_order: MarkovOrder,
    /// Add supplementary unigram templates over extra observation columns
    /// (off for parity runs).
    pub use_extra_columns: bool,
}

/// A label as seen from a template: a real id or a boundary sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtxLabel {
    Bos,
    Eos,
    Label(u32),
}

/// The template arguments at one position: the sentence, the position, and
/// the label window around it. Sentinels appear only at the boundaries.
#[derive(Debug, Clone, Copy)]
pub struct LocalContext<'a> {
    pub sentence: &'a Sentence,
    pub pos: usize,
    pub prev: CtxLabel,
    pub cur: u32,
    pub next: CtxLabel,
}

impl<'a> LocalContext<'a> {
    /// Context at position `i` of a fully labeled sentence.
    pub fn at(sentence: &'a Sentence, labels: &LabelSequence, i: usize) -> Self {
        assert_eq!(sentence.len(), labels.len(), "sentence/label length mismatch");
        assert!(i < sentence.len(), "position out of range");
        let prev = if i == 0 { CtxLabel::Bos } else { CtxLabel::Label(labels.get(i - 1)) };
        let next =
            if i + 1 >= sentence.len() { CtxLabel::Eos } else { CtxLabel::Label(labels.get(i + 1)) };
        LocalContext { sentence, pos: i, prev, cur: labels.get(i), next }
    }
}

/// Resolves feature strings to ids, either by lookup only (`&Alphabet`) or
/// by interning (`&mut Alphabet`); a frozen alphabet never grows.
pub trait FeatureLookup {
    fn resolve(&mut self, name: &str) -> Option<u32>;
}

impl FeatureLookup for &Alphabet {
    fn resolve(&mut self, name: &str) -> Option<u32> {
        self.get(name)
    }
}

impl FeatureLookup for &mut Alphabet {
    fn resolve(&mut self, name: &str) -> Option<u32> {
        self.intern(name)
    }
}

/// Which part of the label window a template group reads. Groups let the
/// decoder build factored score tables instead of re-extracting per label
/// triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Cur,
    Prev,
    Next,
    PrevCur,
    CurNext,
    PrevNext,
    PrevCurNext,
}

impl Window {
    /// Groups active under an extraction config, in emission order.
    pub fn active(config: &FeatureConfig) -> &'static [Window] {
        match config.markov_order {
            MarkovOrder::Second => &[
                Window::Cur,
                Window::Prev,
                Window::Next,
                Window::PrevCur,
                Window::CurNext,
                Window::PrevNext,
                Window::PrevCurNext,
            ],
            MarkovOrder::First => &[Window::Cur, Window::Prev, Window::PrevCur],
        }
    }
}

/// Word-window strings for one position, with boundary sentinels resolved.
#[derive(Debug, Clone)]
pub struct PositionWords<'a> {
    pub w_prev: &'a str,
    pub w_cur: &'a str,
    pub w_next: &'a str,
    /// Per extra column: (prev, cur, next) values.
    pub extras: Vec<[&'a str; 3]>,
}

impl<'a> PositionWords<'a> {
    pub fn at(sentence: &'a Sentence, i: usize, config: &FeatureConfig) -> Self {
        let word = |j: isize| -> &'a str {
            if j < 0 {
                BOS_WORD
            } else if j as usize >= sentence.len() {
                EOS_WORD
            } else {
                &sentence.tokens[j as usize].surface
            }
        };
        let i = i as isize;
        let mut extras = Vec::new();
        if config.use_extra_columns {
            let ncols = sentence.tokens[0].extra_columns.len();
            let extra = |j: isize, c: usize| -> &'a str {
                if j < 0 {
                    BOS_WORD
                } else if j as usize >= sentence.len() {
                    EOS_WORD
                } else {
                    &sentence.tokens[j as usize].extra_columns[c]
                }
            };
            for c in 0..ncols {
                extras.push([extra(i - 1, c), extra(i, c), extra(i + 1, c)]);
            }
        }
        PositionWords { w_prev: word(i - 1), w_cur: word(i), w_next: word(i + 1), extras }
    }
}

fn push_escaped(buf: &mut String, field: &str) {
    if field.contains(['|', '\\']) {
        for ch in field.chars() {
            if ch == '|' || ch == '\\' {
                buf.push('\\');
            }
            buf.push(ch);
        }
    } else {
        buf.push_str(field);
    }
}

fn feat(buf: &mut String, name: &str, fields: &[&str], sink: &mut impl FnMut(&str)) {
    buf.clear();
    buf.push_str(name);
    for field in fields {
        buf.push('|');
        push_escaped(buf, field);
    }
    sink(buf);
}

/// Emits the position-independent (pure-label) templates of a group. The
/// decoder computes these once per sentence instead of once per position.
pub fn emit_label_features(
    group: Window,
    tp: &str,
    tc: &str,
    tn: &str,
    buf: &mut String,
    sink: &mut impl FnMut(&str),
) {
    match group {
        Window::Cur => feat(buf, "U_t[i]", &[tc], sink),
        Window::Prev => feat(buf, "U_t[i-1]", &[tp], sink),
        Window::Next => feat(buf, "U_t[i+1]", &[tn], sink),
        Window::PrevCur => feat(buf, "B_t[i]t[i-1]", &[tc, tp], sink),
        Window::CurNext => feat(buf, "B_t[i]t[i+1]", &[tc, tn], sink),
        Window::PrevNext => feat(buf, "B_t[i-1]t[i+1]", &[tp, tn], sink),
        Window::PrevCurNext => feat(buf, "T_t3", &[tp, tc, tn], sink),
    }
}

/// Emits the word-bearing templates of a group at one position.
pub fn emit_word_features(
    group: Window,
    words: &PositionWords<'_>,
    tp: &str,
    tc: &str,
    tn: &str,
    buf: &mut String,
    sink: &mut impl FnMut(&str),
) {
    let (wp, wc, wn) = (words.w_prev, words.w_cur, words.w_next);
    match group {
        Window::Cur => {
            // The literal (w[i],t[i]) bigram coincides with the conjoined
            // w[i] unigram, so this string is emitted twice.
            feat(buf, "U_w[i]:t[i]", &[wc, tc], sink);
            feat(buf, "U_w[i]:t[i]", &[wc, tc], sink);
            feat(buf, "U_w[i-1]:t[i]", &[wp, tc], sink);
            feat(buf, "U_w[i+1]:t[i]", &[wn, tc], sink);
            feat(buf, "B_w[i]w[i-1]:t[i]", &[wc, wp, tc], sink);
            feat(buf, "B_w[i]w[i+1]:t[i]", &[wc, wn, tc], sink);
            feat(buf, "B_w[i-1]w[i+1]:t[i]", &[wp, wn, tc], sink);
            for (c, cols) in words.extras.iter().enumerate() {
                let [pp, pc, pn] = *cols;
                feat(buf, &format!("X{c}_p[i]:t[i]"), &[pc, tc], sink);
                feat(buf, &format!("X{c}_p[i-1]:t[i]"), &[pp, tc], sink);
                feat(buf, &format!("X{c}_p[i+1]:t[i]"), &[pn, tc], sink);
            }
        }
        Window::Prev => feat(buf, "B_w[i]t[i-1]", &[wc, tp], sink),
        Window::Next => feat(buf, "B_w[i]t[i+1]", &[wc, tn], sink),
        Window::PrevCur => feat(buf, "T_w[i]t[i]t[i-1]", &[wc, tc, tp], sink),
        Window::CurNext => feat(buf, "T_w[i]t[i]t[i+1]", &[wc, tc, tn], sink),
        Window::PrevNext => feat(buf, "T_w[i]t[i-1]t[i+1]", &[wc, tp, tn], sink),
        Window::PrevCurNext => {}
    }
}

/// Emits one template group's feature strings. `tp`/`tc`/`tn` are the label
/// names for `t[i-1]`, `t[i]`, `t[i+1]`; only those the group reads are used.
pub fn emit_group(
    group: Window,
    words: &PositionWords<'_>,
    tp: &str,
    tc: &str,
    tn: &str,
    buf: &mut String,
    sink: &mut impl FnMut(&str),
) {
    emit_label_features(group, tp, tc, tn, buf, sink);
    emit_word_features(group, words, tp, tc, tn, buf, sink);
}

fn ctx_label_name<'a>(label: CtxLabel, labels: &'a Alphabet) -> &'a str {
    match label {
        CtxLabel::Bos => BOS_LABEL,
        CtxLabel::Eos => EOS_LABEL,
        CtxLabel::Label(id) => labels.name(id),
    }
}

/// All template instantiations at one position as a count vector. Unseen
/// strings grow the alphabet when a `&mut Alphabet` is passed (and it is not
/// frozen); otherwise they are skipped.
pub fn local_features(
    ctx: &LocalContext<'_>,
    labels: &Alphabet,
    mut feats: impl FeatureLookup,
    config: &FeatureConfig,
) -> SparseVector {
    let words = PositionWords::at(ctx.sentence, ctx.pos, config);
    let tp = ctx_label_name(ctx.prev, labels);
    let tc = labels.name(ctx.cur);
    let tn = ctx_label_name(ctx.next, labels);
    let mut ids = Vec::with_capacity(24);
    let mut buf = String::with_capacity(64);
    for &group in Window::active(config) {
        emit_group(group, &words, tp, tc, tn, &mut buf, &mut |name| {
            if let Some(id) = feats.resolve(name) {
                ids.push(id);
            }
        });
    }
    SparseVector::from_counts(ids)
}

/// Φ(x,y): the sum of local features over all positions, with boundary
/// sentinels at the ends. Values are occurrence counts.
pub fn global_phi(
    x: &Sentence,
    y: &LabelSequence,
    labels: &Alphabet,
    mut feats: impl FeatureLookup,
    config: &FeatureConfig,
) -> SparseVector {
    assert_eq!(x.len(), y.len(), "sentence/label length mismatch");
    let mut ids = Vec::with_capacity(x.len() * 24);
    let mut buf = String::with_capacity(64);
    for i in 0..x.len() {
        let ctx = LocalContext::at(x, y, i);
        let words = PositionWords::at(x, i, config);
        let tp = ctx_label_name(ctx.prev, labels);
        let tc = labels.name(ctx.cur);
        let tn = ctx_label_name(ctx.next, labels);
        for &group in Window::active(config) {
            emit_group(group, &words, tp, tc, tn, &mut buf, &mut |name| {
                if let Some(id) = feats.resolve(name) {
                    ids.push(id);
                }
            });
        }
    }
    SparseVector::from_counts(ids)
}

/// ΔΦ(x,y,z) = Φ(x,y) − Φ(x,z), with exact cancellation of shared features.
pub fn delta_phi(
    x: &Sentence,
    y: &LabelSequence,
    z: &LabelSequence,
    labels: &Alphabet,
    mut feats: impl FeatureLookup,
    config: &FeatureConfig,
) -> SparseVector {
    assert_eq!(y.len(), z.len(), "label sequences differ in length");
    let changed: Vec<usize> =
        (0..y.len()).filter(|&i| y.get(i) != z.get(i)).collect();
    delta_phi_windowed(x, y, z, &changed, labels, &mut feats, config)
}

/// ΔΦ(x,y,z) for sequences that agree outside `changed`. Local vectors at
/// positions whose label window misses every change cancel exactly, so only
/// positions within one step of a change are extracted.
pub fn delta_phi_windowed(
    x: &Sentence,
    y: &LabelSequence,
    z: &LabelSequence,
    changed: &[usize],
    labels: &Alphabet,
    mut feats: impl FeatureLookup,
    config: &FeatureConfig,
) -> SparseVector {
    assert_eq!(y.len(), z.len(), "label sequences differ in length");
    let mut affected = vec![false; x.len()];
    for &p in changed {
        for q in p.saturating_sub(1)..=(p + 1).min(x.len() - 1) {
            affected[q] = true;
        }
    }
    let mut pairs: Vec<(u32, f64)> = Vec::new();
    for i in (0..x.len()).filter(|&i| affected[i]) {
        let plus = local_features(&LocalContext::at(x, y, i), labels, &mut feats, config);
        let minus = local_features(&LocalContext::at(x, z, i), labels, &mut feats, config);
        pairs.extend(plus.iter());
        pairs.extend(minus.iter().map(|(id, v)| (id, -v)));
    }
    SparseVector::from_pairs(pairs)
}

impl<T: FeatureLookup> FeatureLookup for &mut T {
    fn resolve(&mut self, name: &str) -> Option<u32> {
        (**self).resolve(name)
    }
}

/// Convenience: score contribution of one position under weights `w`.
pub fn local_score(
    ctx: &LocalContext<'_>,
    labels: &Alphabet,
    feats: &Alphabet,
    config: &FeatureConfig,
    w: &WeightVector,
) -> f64 {
    let words = PositionWords::at(ctx.sentence, ctx.pos, config);
    let tp = ctx_label_name(ctx.prev, labels);
    let tc = labels.name(ctx.cur);
    let tn = ctx_label_name(ctx.next, labels);
    let mut total = 0.0;
    let mut buf = String::with_capacity(64);
    for &group in Window::active(config) {
        emit_group(group, &words, tp, tc, tn, &mut buf, &mut |name| {
            if let Some(id) = feats.get(name) {
                total += w.get(id);
            }
        });
    }
    total
}
