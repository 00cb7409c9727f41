//! CoNLL column corpora: parsing, span decoding, and cross-validation folds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

/// One input position: the surface form plus any extra observation columns
/// (e.g. the POS column of chunking data).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub extra_columns: Vec<String>,
}

/// An input sentence; always non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Builds a sentence from bare surfaces (no extra columns).
    pub fn from_surfaces<S: Into<String>>(surfaces: impl IntoIterator<Item = S>) -> Self {
        Sentence {
            tokens: surfaces
                .into_iter()
                .map(|s| Token { surface: s.into(), extra_columns: Vec::new() })
                .collect(),
        }
    }
}

/// Per-position label ids, aligned with a sentence of the same length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LabelSequence(pub Vec<u32>);

impl LabelSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }
}

/// A maximal typed span, inclusive on both ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub kind: String,
}

/// IOB tagging convention of a corpus.
///
/// Decoding is lenient (an I-X with no valid predecessor opens a span),
/// which makes the two schemes decode identically; the flag records the
/// corpus convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Iob1,
    #[default]
    Iob2,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iob1" => Ok(Scheme::Iob1),
            "iob2" => Ok(Scheme::Iob2),
            other => Err(Error::Config(format!("unknown scheme '{other}' (expected iob1|iob2)"))),
        }
    }
}

/// One cross-validation fold: disjoint sentence-index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold_id: usize,
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// A parsed corpus: sentences, aligned gold labels, and the label alphabet
/// they index into.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub labels: Vec<LabelSequence>,
    pub label_alphabet: Alphabet,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Interns a labeled sentence, growing the label alphabet.
    pub fn push(&mut self, sentence: Sentence, label_names: &[&str]) {
        assert_eq!(sentence.len(), label_names.len(), "sentence/label length mismatch");
        let ids = label_names
            .iter()
            .map(|name| self.label_alphabet.intern(name).expect("label alphabet frozen"))
            .collect();
        self.sentences.push(sentence);
        self.labels.push(LabelSequence(ids));
    }

    /// The subset of the corpus at `indices`, sharing the label alphabet.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            sentences: indices.iter().map(|&i| self.sentences[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            label_alphabet: self.label_alphabet.clone(),
        }
    }
}

/// How to read a CoNLL column file.
#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Column holding the gold label; `None` means the last column.
    pub label_col: Option<usize>,
    /// Drop blocks whose first surface is a document separator.
    pub drop_docstart: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { label_col: None, drop_docstart: true }
    }
}

const DOCSTART: &str = "-DOCSTART-";

/// Parses CoNLL column text: one token per line, whitespace-separated
/// columns, blank line terminating a sentence. The designated column becomes
/// the label; remaining columns beyond the surface become `extra_columns`.
///
/// Empty input yields an empty corpus. A row whose column count differs from
/// the first row of its sentence is a parse error naming the line.
pub fn parse_conll(text: &str, opts: &ParseOptions) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    let mut block: Vec<(usize, Vec<String>)> = Vec::new();

    let flush = |block: &mut Vec<(usize, Vec<String>)>, corpus: &mut Corpus| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        let width = block[0].1.len();
        for &(line_no, ref cols) in block.iter() {
            if cols.len() != width {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("row has {} columns, sentence started with {width}", cols.len()),
                });
            }
        }
        let label_col = match opts.label_col {
            Some(c) if c < width => c,
            Some(c) => {
                return Err(Error::Parse {
                    line: block[0].0,
                    msg: format!("label column {c} out of range for {width}-column sentence"),
                })
            }
            None => width - 1,
        };
        if width < 2 {
            return Err(Error::Parse {
                line: block[0].0,
                msg: "need at least a surface column and a label column".into(),
            });
        }
        let dropped = opts.drop_docstart && block[0].1[0] == DOCSTART;
        if !dropped {
            let mut tokens = Vec::with_capacity(block.len());
            let mut label_names = Vec::with_capacity(block.len());
            for (_, cols) in block.iter() {
                let mut extra = Vec::new();
                for (c, col) in cols.iter().enumerate() {
                    if c != 0 && c != label_col {
                        extra.push(col.clone());
                    }
                }
                tokens.push(Token { surface: cols[0].clone(), extra_columns: extra });
                label_names.push(cols[label_col].as_str());
            }
            let label_names: Vec<&str> = label_names;
            corpus.push(Sentence { tokens }, &label_names);
        }
        block.clear();
        Ok(())
    };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            flush(&mut block, &mut corpus)?;
        } else {
            let cols: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            block.push((line_no, cols));
        }
    }
    flush(&mut block, &mut corpus)?;
    Ok(corpus)
}

/// Writes a corpus back to CoNLL text: surface, extra columns, label.
pub fn write_conll(corpus: &Corpus) -> String {
    let mut out = String::new();
    for (sentence, labels) in corpus.sentences.iter().zip(&corpus.labels) {
        for (token, &label) in sentence.tokens.iter().zip(&labels.0) {
            out.push_str(&token.surface);
            for col in &token.extra_columns {
                out.push(' ');
                out.push_str(col);
            }
            out.push(' ');
            out.push_str(corpus.label_alphabet.name(label));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Decodes a label sequence into maximal typed spans under lenient IOB rules:
/// B-X always opens a span; I-X continues an open span of type X and
/// otherwise opens one (repair); O closes. Never fails.
pub fn decode_spans(labels: &LabelSequence, alphabet: &Alphabet, _scheme: Scheme) -> Vec<Span> {
    let names: Vec<&str> = labels.0.iter().map(|&id| alphabet.name(id)).collect();
    decode_span_names(&names)
}

/// Span decoding over raw tag strings (`O`, `B-X`, `I-X`).
pub fn decode_span_names(tags: &[&str]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, String)> = None;
    for (i, tag) in tags.iter().enumerate() {
        let (prefix, kind) = split_tag(tag);
        match prefix {
            TagPrefix::Outside => {
                if let Some((start, kind)) = open.take() {
                    spans.push(Span { start, end: i - 1, kind });
                }
            }
            TagPrefix::Begin => {
                if let Some((start, kind)) = open.take() {
                    spans.push(Span { start, end: i - 1, kind });
                }
                open = Some((i, kind.to_string()));
            }
            TagPrefix::Inside => match &open {
                Some((_, open_kind)) if open_kind == kind => {}
                _ => {
                    if let Some((start, kind)) = open.take() {
                        spans.push(Span { start, end: i - 1, kind });
                    }
                    open = Some((i, kind.to_string()));
                }
            },
        }
    }
    if let Some((start, kind)) = open {
        spans.push(Span { start, end: tags.len() - 1, kind });
    }
    spans
}

enum TagPrefix {
    Outside,
    Begin,
    Inside,
}

fn split_tag(tag: &str) -> (TagPrefix, &str) {
    if let Some(kind) = tag.strip_prefix("B-") {
        (TagPrefix::Begin, kind)
    } else if let Some(kind) = tag.strip_prefix("I-") {
        (TagPrefix::Inside, kind)
    } else {
        // Anything that is not B-/I- closes like O; covers plain "O".
        (TagPrefix::Outside, "")
    }
}

/// Produces `k` deterministic folds over `size` sentences.
///
/// The seeded shuffle is cut into `2k` near-equal blocks; fold `f` takes
/// block `2f` as test and block `2f+1` as dev, training on the rest. Test
/// sets are therefore pairwise disjoint (as are dev sets), test and dev
/// blocks jointly partition the corpus, and proportions are
/// (k−1)/k : 1/(2k) : 1/(2k) — 80/10/10 at k = 5.
pub fn make_folds(size: usize, k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if size < k * 10 {
        return Err(Error::Config(format!(
            "corpus too small for {k}-fold splits: {size} sentences (need ≥ {})",
            k * 10
        )));
    }
    let mut order: Vec<usize> = (0..size).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    // 2k blocks; the first (size mod 2k) blocks take one extra element.
    let blocks = 2 * k;
    let base = size / blocks;
    let extra = size % blocks;
    let mut bounds = Vec::with_capacity(blocks + 1);
    let mut pos = 0;
    bounds.push(0);
    for b in 0..blocks {
        pos += base + usize::from(b < extra);
        bounds.push(pos);
    }

    let block = |b: usize| -> Vec<usize> {
        let mut ids = order[bounds[b]..bounds[b + 1]].to_vec();
        ids.sort_unstable();
        ids
    };

    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let test = block(2 * f);
        let dev = block(2 * f + 1);
        let mut train: Vec<usize> = (0..blocks)
            .filter(|&b| b != 2 * f && b != 2 * f + 1)
            .flat_map(block)
            .collect();
        train.sort_unstable();
        folds.push(FoldSplit { fold_id: f, train, dev, test });
    }
    Ok(folds)
}
