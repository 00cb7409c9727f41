//! Text model format with a trailing content checksum.
//!
//! Layout (UTF-8, LF newlines):
//!
//! ```text
//! seqlab-model v1 fnv1a64
//! algorithm <csp|swvp|mira|swvm>
//! markov_order <1|2>
//! averaging <true|false>
//! use_extra_columns <true|false>
//! labels <n>            — n label names, one per line, id = order
//! features <n>          — n lines "name<TAB>id"
//! weights decode <nnz>  — nnz lines "id:value" (averaged when averaging on)
//! weights raw <nnz>     — the final (unaveraged) vector
//! checksum <16 hex digits>  — FNV-1a 64 over every preceding byte
//! ```

use std::fmt::Write as _;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, MarkovOrder};
use crate::learners::{Algorithm, Model, TrainConfig};
use crate::sparse::WeightVector;

const MAGIC: &str = "seqlab-model v1 fnv1a64";

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Serializes a model. The decode section holds the averaged vector when
/// averaging is on, otherwise the final vector; the raw section always
/// holds the final vector.
pub fn to_string(model: &Model) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(out, "algorithm {}", model.config.algorithm.name());
    let _ = writeln!(out, "markov_order {}", model.feature_config.markov_order.as_u8());
    let _ = writeln!(out, "averaging {}", model.averaged_weights.is_some());
    let _ = writeln!(out, "use_extra_columns {}", model.feature_config.use_extra_columns);
    let _ = writeln!(out, "labels {}", model.label_alphabet.len());
    for name in model.label_alphabet.names() {
        out.push_str(name);
        out.push('\n');
    }
    let _ = writeln!(out, "features {}", model.feature_alphabet.len());
    for (id, name) in model.feature_alphabet.names().iter().enumerate() {
        let _ = writeln!(out, "{name}\t{id}");
    }
    let write_weights = |out: &mut String, section: &str, w: &WeightVector| {
        let entries: Vec<(u32, f64)> = w.iter_nonzero().collect();
        let _ = writeln!(out, "weights {section} {}", entries.len());
        for (id, value) in entries {
            let _ = writeln!(out, "{id}:{value}");
        }
    };
    write_weights(&mut out, "decode", model.decode_weights());
    write_weights(&mut out, "raw", &model.weights);
    let checksum = fnv1a64(out.as_bytes());
    let _ = writeln!(out, "checksum {checksum:016x}");
    out
}

pub fn save(model: &Model, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, to_string(model))?;
    Ok(())
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.line_no += 1;
        self.inner
            .next()
            .ok_or(Error::Parse { line: self.line_no, msg: "unexpected end of model file".into() })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line_no, msg: msg.into() }
    }
}

/// Parses a model, verifying the checksum first.
pub fn from_str(text: &str) -> Result<Model> {
    // checksum covers everything before its own line
    let body_end = text
        .rfind("checksum ")
        .ok_or(Error::Parse { line: 0, msg: "missing checksum line".into() })?;
    let stored = text[body_end..]
        .trim_end()
        .strip_prefix("checksum ")
        .unwrap_or("")
        .to_string();
    let computed = format!("{:016x}", fnv1a64(text[..body_end].as_bytes()));
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    let mut lines = Lines { inner: text.lines(), line_no: 0 };
    if lines.next()? != MAGIC {
        return Err(lines.err(format!("expected header '{MAGIC}'")));
    }
    let algorithm = Algorithm::parse(field(&mut lines, "algorithm")?)
        .ok_or_else(|| lines.err("unknown algorithm"))?;
    let order_raw: u8 =
        field(&mut lines, "markov_order")?.parse().map_err(|_| lines.err("bad markov_order"))?;
    let markov_order =
        MarkovOrder::from_u8(order_raw).ok_or_else(|| lines.err("markov_order must be 1 or 2"))?;
    let averaging: bool =
        field(&mut lines, "averaging")?.parse().map_err(|_| lines.err("bad averaging flag"))?;
    let use_extra_columns: bool = field(&mut lines, "use_extra_columns")?
        .parse()
        .map_err(|_| lines.err("bad use_extra_columns flag"))?;

    let n_labels: usize =
        field(&mut lines, "labels")?.parse().map_err(|_| lines.err("bad label count"))?;
    let mut label_alphabet = Alphabet::new();
    for _ in 0..n_labels {
        let name = lines.next()?;
        label_alphabet.intern(name);
    }
    if label_alphabet.len() != n_labels {
        return Err(lines.err("duplicate label names"));
    }
    label_alphabet.freeze();

    let n_feats: usize =
        field(&mut lines, "features")?.parse().map_err(|_| lines.err("bad feature count"))?;
    let mut feature_alphabet = Alphabet::new();
    for _ in 0..n_feats {
        let row = lines.next()?;
        let (name, id_str) =
            row.rsplit_once('\t').ok_or_else(|| lines.err("feature row missing tab"))?;
        let id: usize = id_str.parse().map_err(|_| lines.err("bad feature id"))?;
        let assigned = feature_alphabet.intern(name).unwrap();
        if assigned as usize != id {
            return Err(lines.err(format!("feature id {id} out of order (expected {assigned})")));
        }
    }
    feature_alphabet.freeze();

    let read_weights = |lines: &mut Lines<'_>, section: &str| -> Result<WeightVector> {
        let header = lines.next()?;
        let rest = header
            .strip_prefix(&format!("weights {section} "))
            .ok_or_else(|| lines.err(format!("expected 'weights {section}' header")))?;
        let nnz: usize = rest.parse().map_err(|_| lines.err("bad weight count"))?;
        let mut w = WeightVector::zeros(n_feats);
        for _ in 0..nnz {
            let row = lines.next()?;
            let (id_str, value_str) =
                row.split_once(':').ok_or_else(|| lines.err("weight row missing ':'"))?;
            let id: u32 = id_str.parse().map_err(|_| lines.err("bad weight id"))?;
            if id as usize >= n_feats {
                return Err(lines.err(format!("weight id {id} outside feature alphabet")));
            }
            let value: f64 = value_str.parse().map_err(|_| lines.err("bad weight value"))?;
            w.set(id, value);
        }
        Ok(w)
    };
    let decode = read_weights(&mut lines, "decode")?;
    let raw = read_weights(&mut lines, "raw")?;

    let config = TrainConfig {
        algorithm,
        markov_order,
        averaging: Some(averaging),
        use_extra_columns,
        ..TrainConfig::default()
    };
    let feature_config = FeatureConfig { markov_order, use_extra_columns };
    Ok(Model {
        config,
        feature_config,
        label_alphabet,
        feature_alphabet,
        weights: raw,
        averaged_weights: averaging.then_some(decode),
        epochs_run: 0,
        epoch_stats: Vec::new(),
    })
}

pub fn load(path: &std::path::Path) -> Result<Model> {
    let text = std::fs::read_to_string(path)?;
    from_str(&text)
}

fn field<'a>(lines: &mut Lines<'a>, key: &str) -> Result<&'a str> {
    let row = lines.next()?;
    row.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| lines.err(format!("expected '{key} <value>'")))
}
