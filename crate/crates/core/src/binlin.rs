//! Linear algebra over GF(2).
//!
//! Bit strings are written most-significant-first: in `"10101"` the bit at
//! index 0 is the leftmost character. The same convention is used for
//! state-vector indices in [`crate::qsim`], so a classical string and the
//! computational basis state it labels always line up.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Fixed-length vector over GF(2). Ordering is by length, then
/// lexicographic on the written string.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    /// Builds a vector from 0/1 values; any nonzero entry counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b != 0);
        }
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Interprets the low `len` bits of `value` with the most significant
    /// of them at index 0.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, (value >> (len - 1 - i)) & 1 == 1);
        }
        v
    }

    /// Inverse of [`BitVector::from_u64`].
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | u64::from(self.get(i)))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Elementwise XOR.
    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::Dimension {
                expected: self.len,
                found: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> Result<bool> {
        if self.len != other.len {
            return Err(Error::Dimension {
                expected: self.len,
                found: other.len,
            });
        }
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones % 2 == 1)
    }

    /// Picks the listed positions, in order.
    pub fn select(&self, positions: &[usize]) -> BitVector {
        BitVector::from_bools(positions.iter().map(|&i| self.get(i)))
    }

    /// Returns bits `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> BitVector {
        BitVector::from_bools((start..end).map(|i| self.get(i)))
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a BitVector>>(parts: I) -> BitVector {
        BitVector::from_bools(parts.into_iter().flat_map(|p| p.iter().collect::<Vec<_>>()))
    }

    pub fn hamming_distance(&self, other: &BitVector) -> Result<usize> {
        Ok(self.xor(other)?.weight())
    }
}

impl Ord for BitVector {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for BitVector {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(Error::Parse(other)),
            }
        }
        Ok(BitVector::from_bools(bits))
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense GF(2) matrix stored as a list of row vectors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    /// An empty row list with `cols` columns, e.g. the null space of a
    /// full-rank square matrix.
    pub fn empty(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Dimension {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    /// Parses rows written as bit strings, e.g. `["1010101", "0110011"]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.parse::<BitVector>())
            .collect::<Result<Vec<_>>>()?;
        let cols = parsed.first().map_or(0, BitVector::len);
        Self::from_rows(cols, parsed)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].get(col)
    }

    pub fn set(&mut self, row: usize, col: usize, bit: bool) {
        self.rows[row].set(col, bit);
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            for j in 0..self.cols {
                if row.get(j) {
                    t.rows[j].set(i, true);
                }
            }
        }
        t
    }

    /// `self · v`, i.e. `result[i] = ⊕_j self[i][j]·v[j]`.
    pub fn mat_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                found: v.len(),
            });
        }
        let bits = self
            .rows
            .iter()
            .map(|r| r.dot(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitVector::from_bools(bits))
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.num_rows() {
            return Err(Error::Dimension {
                expected: self.cols,
                found: other.num_rows(),
            });
        }
        let ot = other.transpose();
        let rows = self
            .rows
            .iter()
            .map(|r| ot.mat_vec(r))
            .collect::<Result<Vec<_>>>()?;
        BitMatrix::from_rows(other.cols, rows)
    }

    /// Reduced row echelon form with leftmost pivots.
    pub fn echelon(&self) -> RowEchelon {
        RowEchelon::new(self)
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    /// Basis of `{v : self · v = 0}`; one row per free column, in column
    /// order.
    pub fn null_space(&self) -> BitMatrix {
        let ech = self.echelon();
        let mut is_pivot = vec![false; self.cols];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        let basis = (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = BitVector::zeros(self.cols);
                v.set(free, true);
                for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
                    if row.get(free) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        BitMatrix {
            cols: self.cols,
            rows: basis,
        }
    }

    /// True when both matrices span the same row space.
    pub fn same_row_space(&self, other: &BitMatrix) -> bool {
        self.cols == other.cols && self.echelon() == other.echelon()
    }
}

/// Reduced row echelon form. The nonzero rows are kept in pivot order, so
/// two matrices span the same row space exactly when their echelon forms
/// compare equal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RowEchelon {
    cols: usize,
    rows: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl RowEchelon {
    fn new(m: &BitMatrix) -> Self {
        let mut rows: Vec<BitVector> = m.rows.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..m.cols {
            let Some(found) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(next, found);
            let pivot_row = rows[next].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && row.get(col) {
                    row.xor_assign(&pivot_row).expect("rows share a width");
                }
            }
            pivots.push(col);
            next += 1;
        }
        rows.truncate(next);
        Self {
            cols: m.cols,
            rows,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical remainder of `v` modulo the row space: every pivot column
    /// of the result is zero.
    pub fn reduce(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if out.get(p) {
                out.xor_assign(row)?;
            }
        }
        Ok(out)
    }

    pub fn contains(&self, v: &BitVector) -> Result<bool> {
        Ok(self.reduce(v)?.is_zero())
    }

    pub fn to_matrix(&self) -> BitMatrix {
        BitMatrix {
            cols: self.cols,
            rows: self.rows.clone(),
        }
    }
}

/// Canonical labelling of the cosets of an inner row space inside an outer
/// one.
///
/// A vector is first reduced modulo the inner space; the remainder is then
/// expressed in the echelon basis of the reduced outer generators. The
/// coefficient vector is the label, so labels are linear, the inner space
/// gets the all-zero label, and the result does not depend on which
/// generators were supplied.
#[derive(Clone, Debug)]
pub struct CosetLabeler {
    inner: RowEchelon,
    quotient: RowEchelon,
}

impl CosetLabeler {
    pub fn new(outer: &BitMatrix, inner: &BitMatrix) -> Result<Self> {
        if outer.num_cols() != inner.num_cols() {
            return Err(Error::Dimension {
                expected: outer.num_cols(),
                found: inner.num_cols(),
            });
        }
        let outer_ech = outer.echelon();
        for row in inner.rows() {
            if !outer_ech.contains(row)? {
                return Err(Error::NotNested);
            }
        }
        let inner = inner.echelon();
        let reduced = outer
            .rows()
            .iter()
            .map(|r| inner.reduce(r))
            .collect::<Result<Vec<_>>>()?;
        let quotient = BitMatrix::from_rows(outer.num_cols(), reduced)?.echelon();
        Ok(Self { inner, quotient })
    }

    /// Number of label bits, `dim(outer) − dim(inner)`.
    pub fn label_len(&self) -> usize {
        self.quotient.rank()
    }

    /// Label of the coset containing `v`; errors when `v` is outside the
    /// outer space.
    pub fn label(&self, v: &BitVector) -> Result<BitVector> {
        let r = self.inner.reduce(v)?;
        let label = BitVector::from_bools(self.quotient.pivots.iter().map(|&p| r.get(p)));
        let rest = self.quotient.reduce(&r)?;
        if !rest.is_zero() {
            return Err(Error::NotCodeword(v.to_string()));
        }
        Ok(label)
    }

    /// Canonical representative for a label: the matching combination of
    /// reduced quotient rows.
    pub fn representative(&self, label: &BitVector) -> Result<BitVector> {
        if label.len() != self.label_len() {
            return Err(Error::Dimension {
                expected: self.label_len(),
                found: label.len(),
            });
        }
        let mut v = BitVector::zeros(self.inner.cols);
        for (i, row) in self.quotient.rows.iter().enumerate() {
            if label.get(i) {
                v.xor_assign(row)?;
            }
        }
        Ok(v)
    }

    /// All representatives, ordered by label value (label bit 0 most
    /// significant).
    pub fn representatives(&self) -> Result<Vec<BitVector>> {
        let len = self.label_len();
        if len > 20 {
            return Err(Error::Unsupported(format!(
                "enumerating 2^{len} coset representatives"
            )));
        }
        (0..1u64 << len)
            .map(|i| self.representative(&BitVector::from_u64(i, len)))
            .collect()
    }
}

/// One representative per coset of `inner` in `outer` (both given by
/// generator rows), ordered by coset label.
pub fn coset_representatives(outer: &BitMatrix, inner: &BitMatrix) -> Result<Vec<BitVector>> {
    CosetLabeler::new(outer, inner)?.representatives()
}
