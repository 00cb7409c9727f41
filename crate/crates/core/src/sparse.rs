//! Sparse feature vectors and the dense learned parameter vector.

/// A sparse vector with strictly increasing ids and no explicit zeros.
///
/// Houses feature counts Φ(x,y) and differences ΔΦ(x,y,z).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from unsorted (id, value) pairs, summing duplicates and
    /// dropping exact zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut entries: Vec<(u32, f64)> = pairs.into_iter().collect();
        entries.sort_unstable_by_key(|&(id, _)| id);
        let mut out: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (id, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == id => last.1 += v,
                _ => out.push((id, v)),
            }
        }
        out.retain(|&(_, v)| v != 0.0);
        Self { entries: out }
    }

    /// Builds a count vector from feature ids (each occurrence adds 1).
    pub fn from_counts(ids: impl IntoIterator<Item = u32>) -> Self {
        Self::from_pairs(ids.into_iter().map(|id| (id, 1.0)))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, id: u32) -> f64 {
        match self.entries.binary_search_by_key(&id, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    /// Sum of values (the total mass of a count vector).
    pub fn mass(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    /// self − other, with exact cancellation of shared entries.
    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (ia, va) = self.entries[i];
            let (ib, vb) = other.entries[j];
            if ia < ib {
                out.push((ia, va));
                i += 1;
            } else if ia > ib {
                out.push((ib, -vb));
                j += 1;
            } else {
                let v = va - vb;
                if v != 0.0 {
                    out.push((ia, v));
                }
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&self.entries[i..]);
        out.extend(other.entries[j..].iter().map(|&(id, v)| (id, -v)));
        SparseVector { entries: out }
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        SparseVector {
            entries: self
                .entries
                .iter()
                .filter_map(|&(id, v)| {
                    let s = v * factor;
                    (s != 0.0).then_some((id, s))
                })
                .collect(),
        }
    }

    /// Σ coeff_k · vec_k over a weighted set of sparse vectors.
    pub fn weighted_sum<'a>(terms: impl IntoIterator<Item = (&'a SparseVector, f64)>) -> Self {
        Self::from_pairs(terms.into_iter().flat_map(|(vec, coeff)| {
            vec.entries
                .iter()
                .map(move |&(id, v)| (id, v * coeff))
                .collect::<Vec<_>>()
        }))
    }

    pub fn dot_sparse(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (ia, va) = self.entries[i];
            let (ib, vb) = other.entries[j];
            if ia < ib {
                i += 1;
            } else if ia > ib {
                j += 1;
            } else {
                acc += va * vb;
                i += 1;
                j += 1;
            }
        }
        acc
    }
}

/// Dense parameter vector w ∈ R^d, growable as the feature alphabet grows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self { w: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Missing entries read as 0 so a stale (shorter) vector is usable
    /// against a grown alphabet.
    pub fn get(&self, id: u32) -> f64 {
        self.w.get(id as usize).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, id: u32, value: f64) {
        self.ensure_len(id as usize + 1);
        self.w[id as usize] = value;
    }

    pub fn ensure_len(&mut self, len: usize) {
        if self.w.len() < len {
            self.w.resize(len, 0.0);
        }
    }

    pub fn dot(&self, v: &SparseVector) -> f64 {
        v.iter().map(|(id, value)| self.get(id) * value).sum()
    }

    /// w += factor · v, growing as needed.
    pub fn add_scaled(&mut self, v: &SparseVector, factor: f64) {
        for (id, value) in v.iter() {
            self.ensure_len(id as usize + 1);
            self.w[id as usize] += factor * value;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.w
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != 0.0)
            .map(|(i, &v)| (i as u32, v))
    }

    pub fn from_dense(w: Vec<f64>) -> Self {
        Self { w }
    }
}
