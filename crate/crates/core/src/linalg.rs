//! Deterministic linear algebra over GF(2).
//!
//! [`SparseBitMatrix`] is the public façade; elimination runs on dense
//! bit-packed columns, which is the right trade for slice-sized matrices.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
}

/// A fixed-length vector over GF(2), packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitVec{:?}", self.ones().collect::<Vec<_>>())
    }
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        BitVec::from_ones(bits.len(), bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        if self.get(i) != b {
            self.flip(i);
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Highest set index.
    pub fn last_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(wi * 64 + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    /// Lowest set index at or after `from`.
    pub fn next_one(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut wi = from / 64;
        let mut w = self.words[wi] & (!0u64 << (from % 64));
        loop {
            if w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
            wi += 1;
            if wi == self.words.len() {
                return None;
            }
            w = self.words[wi];
        }
    }

    /// Lowest set index.
    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2 == 1
    }
}

/// A GF(2) matrix stored as a set of nonzero positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBitMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeSet<(usize, usize)>,
}

impl SparseBitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseBitMatrix { rows, cols, entries: BTreeSet::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseBitMatrix::zeros(n, n);
        for i in 0..n {
            m.entries.insert((i, i));
        }
        m
    }

    /// Builds from positions; repeated positions cancel in pairs.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, LinalgError> {
        let mut m = SparseBitMatrix::zeros(rows, cols);
        for (r, c) in entries {
            m.toggle(r, c)?;
        }
        Ok(m)
    }

    pub fn from_columns(rows: usize, columns: &[BitVec]) -> Self {
        let mut m = SparseBitMatrix::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            for r in col.ones() {
                m.entries.insert((r, c));
            }
        }
        m
    }

    pub fn toggle(&mut self, row: usize, col: usize) -> Result<(), LinalgError> {
        if row >= self.rows || col >= self.cols {
            return Err(LinalgError::OutOfBounds { row, col, rows: self.rows, cols: self.cols });
        }
        if !self.entries.remove(&(row, col)) {
            self.entries.insert((row, col));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.entries.contains(&(row, col))
    }

    pub fn columns(&self) -> Vec<BitVec> {
        let mut cols = vec![BitVec::zeros(self.rows); self.cols];
        for &(r, c) in &self.entries {
            cols[c].flip(r);
        }
        cols
    }

    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        let mut out = BitVec::zeros(self.rows);
        for &(r, c) in &self.entries {
            if v.get(c) {
                out.flip(r);
            }
        }
        Ok(out)
    }
}

/// Incremental column echelon form with combination tracking.
///
/// Each stored pivot vector is keyed by its lowest set row and remembers which
/// input columns were summed to produce it.
#[derive(Debug, Clone)]
pub struct Echelon {
    rows: usize,
    inputs: usize,
    pivot_of_row: Vec<Option<usize>>,
    basis: Vec<(BitVec, BitVec)>,
}

impl Echelon {
    pub fn new(rows: usize) -> Self {
        Echelon { rows, inputs: 0, pivot_of_row: vec![None; rows], basis: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Fully reduces `v` against the stored pivots, returning the canonical
    /// remainder and the combination of inputs that was subtracted.
    fn reduce(&self, mut v: BitVec, track: usize) -> (BitVec, BitVec) {
        let mut combo = BitVec::zeros(track);
        let mut from = 0;
        while let Some(r) = v.next_one(from) {
            match self.pivot_of_row[r] {
                Some(p) => {
                    v.xor_assign(&self.basis[p].0);
                    xor_prefix(&mut combo, &self.basis[p].1);
                }
                None => from = r + 1,
            }
        }
        (v, combo)
    }

    /// Adds a column; returns true when it increased the rank.
    pub fn push(&mut self, v: &BitVec) -> Result<bool, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimensionMismatch { expected: self.rows, got: v.len() });
        }
        let idx = self.inputs;
        self.inputs += 1;
        let (rem, mut combo) = self.reduce(v.clone(), self.inputs);
        if rem.is_zero() {
            return Ok(false);
        }
        combo = grow(combo, self.inputs);
        combo.flip(idx);
        let lead = rem.first_one().unwrap();
        self.pivot_of_row[lead] = Some(self.basis.len());
        self.basis.push((rem, combo));
        Ok(true)
    }

    pub fn contains(&self, v: &BitVec) -> Result<bool, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimensionMismatch { expected: self.rows, got: v.len() });
        }
        Ok(self.reduce(v.clone(), 0).0.is_zero())
    }

    /// Combination of pushed inputs summing to `v`, if one exists.
    pub fn express(&self, v: &BitVec) -> Result<Option<BitVec>, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimensionMismatch { expected: self.rows, got: v.len() });
        }
        let (rem, combo) = self.reduce(v.clone(), self.inputs);
        Ok(rem.is_zero().then_some(combo))
    }
}

fn xor_prefix(acc: &mut BitVec, other: &BitVec) {
    for (a, b) in acc.words.iter_mut().zip(&other.words) {
        *a ^= b;
    }
}

fn grow(v: BitVec, len: usize) -> BitVec {
    if v.len() == len {
        return v;
    }
    let mut out = BitVec::zeros(len);
    for i in v.ones() {
        out.flip(i);
    }
    out
}

/// GF(2) rank. Columns are eliminated left to right; each pivot is the lowest
/// remaining row index.
pub fn rank(m: &SparseBitMatrix) -> usize {
    let mut e = Echelon::new(m.rows);
    for c in m.columns() {
        e.push(&c).expect("dimensions agree");
    }
    e.rank()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub in_span: bool,
    pub witness: Option<BitVec>,
}

/// Decides whether `v` lies in the column span of `m`, with a witness `w`
/// satisfying `m·w = v` when it does.
pub fn solve_membership(m: &SparseBitMatrix, v: &BitVec) -> Result<Membership, LinalgError> {
    if v.len() != m.rows {
        return Err(LinalgError::DimensionMismatch { expected: m.rows, got: v.len() });
    }
    let mut e = Echelon::new(m.rows);
    for c in m.columns() {
        e.push(&c)?;
    }
    let witness = e.express(v)?;
    Ok(Membership { in_span: witness.is_some(), witness })
}

/// A basis of the null space of `m`, one vector per non-pivot column.
pub fn kernel_basis(m: &SparseBitMatrix) -> Vec<BitVec> {
    let mut e = Echelon::new(m.rows);
    let cols = m.columns();
    let mut out = Vec::new();
    for (i, c) in cols.iter().enumerate() {
        let (rem, combo) = e.reduce(c.clone(), e.inputs);
        if rem.is_zero() {
            let mut k = grow(combo, m.cols);
            k.flip(i);
            out.push(k);
            e.inputs += 1;
        } else {
            e.push(c).expect("dimensions agree");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero() {
        assert_eq!(rank(&SparseBitMatrix::identity(5)), 5);
        assert_eq!(rank(&SparseBitMatrix::zeros(4, 6)), 0);
        assert!(kernel_basis(&SparseBitMatrix::identity(5)).is_empty());
        assert_eq!(kernel_basis(&SparseBitMatrix::zeros(3, 3)).len(), 3);
        let v = BitVec::from_ones(5, [1, 3]);
        let r = solve_membership(&SparseBitMatrix::identity(5), &v).unwrap();
        assert_eq!(r.witness, Some(v));
        let r = solve_membership(&SparseBitMatrix::zeros(3, 3), &BitVec::from_ones(3, [0])).unwrap();
        assert!(!r.in_span);
    }

    #[test]
    fn dimension_mismatch() {
        let e = solve_membership(&SparseBitMatrix::identity(3), &BitVec::zeros(4));
        assert_eq!(e, Err(LinalgError::DimensionMismatch { expected: 3, got: 4 }));
    }

    #[test]
    fn entries_cancel_in_pairs() {
        let m = SparseBitMatrix::from_entries(2, 2, [(0, 0), (0, 0), (1, 1)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert!(SparseBitMatrix::from_entries(2, 2, [(2, 0)]).is_err());
    }

    #[test]
    fn bitvec_ops() {
        let mut v = BitVec::from_ones(130, [0, 64, 129]);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(v.last_one(), Some(129));
        assert_eq!(v.first_one(), Some(0));
        v.flip(0);
        assert_eq!(v.first_one(), Some(64));
        assert_eq!(v.count_ones(), 2);
    }
}
