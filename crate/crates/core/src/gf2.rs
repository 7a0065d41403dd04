//! Dense GF(2) linear algebra on bit-packed rows.
//!
//! Rows are stored row-major, one `u64` word per 64 columns, least significant
//! bit first. Bits past the last column are kept at zero after every
//! operation so that popcounts over whole words are always exact.

use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

pub const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("malformed hex row {0:?}")]
    BadHex(String),
    #[error("malformed bit row {0:?}")]
    BadBits(String),
}

/// XOR `nbits` bits of `src` into `dst` starting at bit `offset`.
fn xor_bits_at(dst: &mut [u64], offset: usize, src: &[u64], nbits: usize) {
    if nbits == 0 {
        return;
    }
    let word = offset / WORD_BITS;
    let shift = offset % WORD_BITS;
    let nwords = words_for(nbits);
    for (k, &w) in src.iter().take(nwords).enumerate() {
        let w = if k + 1 == nwords { w & tail_mask(nbits) } else { w };
        if w == 0 {
            continue;
        }
        dst[word + k] ^= w << shift;
        if shift != 0 {
            let hi = w >> (WORD_BITS - shift);
            if hi != 0 {
                dst[word + k + 1] ^= hi;
            }
        }
    }
}

fn bytes_to_hex(words: &[u64], nbits: usize) -> String {
    let nbytes = nbits.div_ceil(8);
    let bytes: Vec<u8> = (0..nbytes)
        .map(|b| (words[b / 8] >> ((b % 8) * 8)) as u8)
        .collect();
    hex::encode(bytes)
}

fn hex_to_words(s: &str, nbits: usize) -> Result<Vec<u64>, Gf2Error> {
    let bytes = hex::decode(s).map_err(|_| Gf2Error::BadHex(s.to_string()))?;
    if bytes.len() != nbits.div_ceil(8) {
        return Err(Gf2Error::BadHex(s.to_string()));
    }
    let mut words = vec![0u64; words_for(nbits)];
    for (b, &byte) in bytes.iter().enumerate() {
        words[b / 8] |= (byte as u64) << ((b % 8) * 8);
    }
    if let Some(last) = words.last() {
        if last & !tail_mask(nbits) != 0 {
            return Err(Gf2Error::BadHex(s.to_string()));
        }
    }
    Ok(words)
}

/// A packed vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_indices(len: usize, ones: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in ones {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Build from raw words; bits past `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    /// Parse a `0`/`1` string, ignoring spaces and `|` separators.
    pub fn parse_bits(s: &str) -> Result<Self, Gf2Error> {
        let bits: Vec<bool> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '|')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Gf2Error::BadBits(s.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self::from_bools(&bits))
    }

    pub fn from_hex(len: usize, s: &str) -> Result<Self, Gf2Error> {
        Ok(Self {
            len,
            words: hex_to_words(s, len)?,
        })
    }

    pub fn to_hex(&self) -> String {
        bytes_to_hex(&self.words, self.len)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            & 1
            == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Concatenate two vectors.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        xor_bits_at(&mut out.words, 0, &self.words, self.len);
        xor_bits_at(&mut out.words, self.len, &other.words, other.len);
        out
    }

    /// Bits `start..start+len` as a new vector.
    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        assert!(start + len <= self.len);
        let mut out = BitVector::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Reduced row echelon form of a matrix's row space.
#[derive(Clone, Debug)]
pub struct EchelonForm {
    cols: usize,
    stride: usize,
    /// Reduced basis rows, one per pivot, in increasing pivot order.
    rows: Vec<u64>,
    pivots: Vec<usize>,
}

impl EchelonForm {
    fn new(m: &BitMatrix) -> Self {
        let stride = m.stride;
        let mut data = m.data.clone();
        let mut pivots = Vec::new();
        let mut top = 0;
        for col in 0..m.cols {
            if top == m.rows {
                break;
            }
            let w = col / WORD_BITS;
            let bit = 1u64 << (col % WORD_BITS);
            let Some(p) = (top..m.rows).find(|&r| data[r * stride + w] & bit != 0) else {
                continue;
            };
            if p != top {
                for k in 0..stride {
                    data.swap(p * stride + k, top * stride + k);
                }
            }
            for r in 0..m.rows {
                if r != top && data[r * stride + w] & bit != 0 {
                    for k in 0..stride {
                        data[r * stride + k] ^= data[top * stride + k];
                    }
                }
            }
            pivots.push(col);
            top += 1;
        }
        data.truncate(top * stride);
        Self {
            cols: m.cols,
            stride,
            rows: data,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.stride..(i + 1) * self.stride]
    }

    /// Reduce `words` against the basis in place; returns true if the residue is zero.
    pub fn reduce(&self, words: &mut [u64]) -> bool {
        for (i, &p) in self.pivots.iter().enumerate() {
            if words[p / WORD_BITS] >> (p % WORD_BITS) & 1 == 1 {
                for (w, r) in words.iter_mut().zip(self.row(i)) {
                    *w ^= r;
                }
            }
        }
        words.iter().all(|&w| w == 0)
    }

    /// The reduced basis as a matrix (rank × cols).
    pub fn to_matrix(&self) -> BitMatrix {
        BitMatrix::from_raw(self.pivots.len(), self.cols, self.rows.clone())
    }
}

/// Dense matrix over GF(2).
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
    echelon: OnceLock<Arc<EchelonForm>>,
}

impl Clone for BitMatrix {
    fn clone(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            stride: self.stride,
            data: self.data.clone(),
            echelon: self.echelon.clone(),
        }
    }
}

impl PartialEq for BitMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for BitMatrix {}

impl std::hash::Hash for BitMatrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.data.hash(state);
    }
}

impl BitMatrix {
    fn from_raw(rows: usize, cols: usize, data: Vec<u64>) -> Self {
        let stride = words_for(cols);
        debug_assert_eq!(data.len(), rows * stride);
        Self {
            rows,
            cols,
            stride,
            data,
            echelon: OnceLock::new(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![0; rows * words_for(cols)])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// The all-ones matrix J.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| true)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Stack equal-length vectors as rows. `cols` is needed for the zero-row case.
    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Result<Self, Gf2Error> {
        let stride = words_for(cols);
        let mut data = Vec::with_capacity(rows.len() * stride);
        for r in rows {
            if r.len() != cols {
                return Err(Gf2Error::LengthMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r.words());
        }
        Ok(Self::from_raw(rows.len(), cols, data))
    }

    /// Parse rows written as `0`/`1` strings (spaces and `|` ignored).
    pub fn parse_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, Gf2Error> {
        let vecs: Vec<BitVector> = rows
            .iter()
            .map(|r| BitVector::parse_bits(r.as_ref()))
            .collect::<Result<_, _>>()?;
        let cols = vecs.first().map_or(0, BitVector::len);
        Self::from_rows(cols, &vecs)
    }

    pub fn from_hex_rows<S: AsRef<str>>(cols: usize, rows: &[S]) -> Result<Self, Gf2Error> {
        let vecs: Vec<BitVector> = rows
            .iter()
            .map(|r| BitVector::from_hex(cols, r.as_ref()))
            .collect::<Result<_, _>>()?;
        Self::from_rows(cols, &vecs)
    }

    /// Each row as little-endian-bit hex (bit j lives in byte j/8 at position j%8).
    pub fn to_hex_rows(&self) -> Vec<String> {
        (0..self.rows)
            .map(|i| bytes_to_hex(self.row_words(i), self.cols))
            .collect()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols);
        self.data[i * self.stride + j / WORD_BITS] >> (j % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols);
        self.echelon = OnceLock::new();
        let idx = i * self.stride + j / WORD_BITS;
        let mask = 1u64 << (j % WORD_BITS);
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(i).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<BitVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row_words(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Entrywise XOR.
    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.shape() != other.shape() {
            return Err(Gf2Error::ShapeMismatch {
                op: "add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a ^ b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::ShapeMismatch {
                op: "mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let stride = out.stride;
        for i in 0..self.rows {
            let dst = &mut out.data[i * stride..(i + 1) * stride];
            for (wi, &word) in self.row_words(i).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let k = wi * WORD_BITS + w.trailing_zeros() as usize;
                    w &= w - 1;
                    for (d, s) in dst.iter_mut().zip(other.row_words(k)) {
                        *d ^= s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix product over the integers, treating entries as 0/1.
    pub fn mul_int(&self, other: &BitMatrix) -> Result<IntMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::ShapeMismatch {
                op: "mul_int",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let t = other.transpose();
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            let a = self.row_words(i);
            for j in 0..other.cols {
                let count: u32 = a
                    .iter()
                    .zip(t.row_words(j))
                    .map(|(x, y)| (x & y).count_ones())
                    .sum();
                data.push(count);
            }
        }
        Ok(IntMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// Square-matrix power over GF(2).
    pub fn pow(&self, mut exp: usize) -> Result<BitMatrix, Gf2Error> {
        if self.rows != self.cols {
            return Err(Gf2Error::ShapeMismatch {
                op: "pow",
                left: self.shape(),
                right: self.shape(),
            });
        }
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (wi, &word) in self.row_words(i).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let j = wi * WORD_BITS + w.trailing_zeros() as usize;
                    w &= w - 1;
                    out.data[j * out.stride + i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
                }
            }
        }
        out
    }

    /// Kronecker (tensor) product.
    pub fn kron(&self, other: &BitMatrix) -> BitMatrix {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        let stride = out.stride;
        for i1 in 0..self.rows {
            for i2 in 0..other.rows {
                let r = i1 * other.rows + i2;
                let dst = &mut out.data[r * stride..(r + 1) * stride];
                for j1 in 0..self.cols {
                    if self.get(i1, j1) {
                        xor_bits_at(dst, j1 * other.cols, other.row_words(i2), other.cols);
                    }
                }
            }
        }
        out
    }

    /// Place `other` to the right of `self`.
    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.rows != other.rows {
            return Err(Gf2Error::ShapeMismatch {
                op: "hstack",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        let stride = out.stride;
        for i in 0..self.rows {
            let dst = &mut out.data[i * stride..(i + 1) * stride];
            xor_bits_at(dst, 0, self.row_words(i), self.cols);
            xor_bits_at(dst, self.cols, other.row_words(i), other.cols);
        }
        Ok(out)
    }

    /// Columns `start..start+width` as a new matrix.
    pub fn column_block(&self, start: usize, width: usize) -> BitMatrix {
        assert!(start + width <= self.cols);
        Self::from_fn(self.rows, width, |i, j| self.get(i, start + j))
    }

    /// The listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> BitMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.stride);
        for &r in rows {
            data.extend_from_slice(self.row_words(r));
        }
        Self::from_raw(rows.len(), self.cols, data)
    }

    /// Cached reduced row echelon form.
    pub fn echelon(&self) -> &EchelonForm {
        self.echelon.get_or_init(|| Arc::new(EchelonForm::new(self)))
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    /// Greedy top-down maximal independent row subset.
    pub fn independent_rows(&self) -> Vec<usize> {
        let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
        let mut kept = Vec::new();
        for i in 0..self.rows {
            let mut v = self.row_words(i).to_vec();
            for (p, b) in &basis {
                if v[p / WORD_BITS] >> (p % WORD_BITS) & 1 == 1 {
                    for (x, y) in v.iter_mut().zip(b) {
                        *x ^= y;
                    }
                }
            }
            if let Some(wi) = v.iter().position(|&w| w != 0) {
                let p = wi * WORD_BITS + v[wi].trailing_zeros() as usize;
                basis.push((p, v));
                kept.push(i);
            }
        }
        kept
    }

    /// Basis of the right null space {v : A v = 0}.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        let ech = self.echelon();
        let mut is_pivot = vec![false; self.cols];
        for &p in ech.pivots() {
            is_pivot[p] = true;
        }
        let mut basis = Vec::with_capacity(self.cols - ech.rank());
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVector::zeros(self.cols);
            v.set(free, true);
            for (i, &p) in ech.pivots().iter().enumerate() {
                if ech.row(i)[free / WORD_BITS] >> (free % WORD_BITS) & 1 == 1 {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Whether `v` is a GF(2) combination of the rows.
    pub fn in_rowspace(&self, v: &BitVector) -> Result<bool, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut w = v.words().to_vec();
        Ok(self.echelon().reduce(&mut w))
    }

    /// A · v over GF(2).
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            let parity: u32 = self
                .row_words(i)
                .iter()
                .zip(v.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            out.set(i, parity & 1 == 1);
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose()
    }

    /// Whether each row has exactly one 1 and so does each column.
    pub fn is_permutation(&self) -> bool {
        if self.rows != self.cols || (0..self.rows).any(|i| self.row_weight(i) != 1) {
            return false;
        }
        let t = self.transpose();
        (0..t.rows).all(|i| t.row_weight(i) == 1)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        write!(f, "{self}")
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            writeln!(f, "{}", self.row(i))?;
        }
        Ok(())
    }
}

/// Integer-valued matrix, used for products of 0/1 matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    /// Add `coeff` times a 0/1 matrix.
    pub fn add_scaled(&mut self, coeff: u32, m: &BitMatrix) {
        assert_eq!((self.rows, self.cols), m.shape());
        for i in 0..self.rows {
            for j in 0..self.cols {
                if m.get(i, j) {
                    self.data[i * self.cols + j] += coeff;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(m: &BitMatrix) -> Vec<Vec<bool>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    fn arb_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BitMatrix> {
        (0..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
            proptest::collection::vec(any::<bool>(), r * c)
                .prop_map(move |bits| BitMatrix::from_fn(r, c, |i, j| bits[i * c + j]))
        })
    }

    fn cyclic_shift(n: usize) -> BitMatrix {
        BitMatrix::from_fn(n, n, |i, j| i == (j + 1) % n)
    }

    #[test]
    fn add_self_is_zero() {
        let a = BitMatrix::parse_rows(&["10110", "01101", "11111"]).unwrap();
        assert!(a.add(&a).unwrap().is_zero());
    }

    #[test]
    fn identity_plus_ones_is_complement() {
        let c = BitMatrix::identity(5).add(&BitMatrix::ones(5, 5)).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(c.get(i, j), i != j);
            }
        }
    }

    #[test]
    fn add_shape_mismatch() {
        let err = BitMatrix::zeros(2, 3).add(&BitMatrix::zeros(3, 2)).unwrap_err();
        assert!(matches!(err, Gf2Error::ShapeMismatch { op: "add", .. }));
        assert!(BitMatrix::zeros(2, 3).mul(&BitMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn shift_has_period_nu() {
        for nu in 2..9 {
            let s = cyclic_shift(nu);
            let prod = s.mul(&s.pow(nu - 1).unwrap()).unwrap();
            assert_eq!(prod, BitMatrix::identity(nu));
        }
    }

    #[test]
    fn kron_identities() {
        assert_eq!(
            BitMatrix::identity(2).kron(&BitMatrix::identity(3)),
            BitMatrix::identity(6)
        );
        let x = BitMatrix::parse_rows(&["01", "10"]).unwrap();
        let k = x.kron(&BitMatrix::identity(2));
        let expect = BitMatrix::parse_rows(&["0010", "0001", "1000", "0100"]).unwrap();
        assert_eq!(k, expect);
    }

    #[test]
    fn kron_across_word_boundary() {
        let a = BitMatrix::identity(3);
        let b = BitMatrix::ones(2, 40);
        let k = a.kron(&b);
        assert_eq!(k.shape(), (6, 120));
        for i in 0..6 {
            for j in 0..120 {
                assert_eq!(k.get(i, j), i / 2 == j / 40);
            }
        }
    }

    #[test]
    fn rank_and_independent_rows() {
        assert_eq!(BitMatrix::identity(7).rank(), 7);
        assert_eq!(BitMatrix::identity(3).independent_rows(), vec![0, 1, 2]);
        let dup = BitMatrix::parse_rows(&["110", "110", "011", "101", "011"]).unwrap();
        assert_eq!(dup.independent_rows(), vec![0, 2]);
        assert_eq!(BitMatrix::zeros(0, 4).rank(), 0);
        assert_eq!(BitMatrix::zeros(3, 0).rank(), 0);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        assert!(BitMatrix::identity(6).kernel_basis().is_empty());
        assert_eq!(BitMatrix::zeros(2, 5).kernel_basis().len(), 5);
    }

    #[test]
    fn rowspace_membership() {
        let a = BitMatrix::parse_rows(&["1100", "0110"]).unwrap();
        assert!(a.in_rowspace(&BitVector::zeros(4)).unwrap());
        assert!(a.in_rowspace(&BitVector::parse_bits("1010").unwrap()).unwrap());
        assert!(!a.in_rowspace(&BitVector::parse_bits("0001").unwrap()).unwrap());
        assert!(a.in_rowspace(&BitVector::zeros(3)).is_err());
    }

    #[test]
    fn hex_round_trip() {
        let m = BitMatrix::parse_rows(&["1000000011", "0100000000"]).unwrap();
        let hex = m.to_hex_rows();
        assert_eq!(hex, vec!["0103".to_string(), "0200".to_string()]);
        assert_eq!(BitMatrix::from_hex_rows(10, &hex).unwrap(), m);
        assert!(BitMatrix::from_hex_rows(10, &["0107"]).is_err());
        assert!(BitMatrix::from_hex_rows(10, &["zz00"]).is_err());
    }

    #[test]
    fn echelon_cache_survives_clone_and_resets_on_set() {
        let mut m = BitMatrix::identity(4);
        assert_eq!(m.rank(), 4);
        let c = m.clone();
        m.set(3, 3, false);
        assert_eq!(m.rank(), 3);
        assert_eq!(c.rank(), 4);
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(m in arb_matrix(20, 70)) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn rank_nullity(m in arb_matrix(20, 70)) {
            let kernel = m.kernel_basis();
            prop_assert_eq!(kernel.len() + m.rank(), m.cols());
            for v in &kernel {
                prop_assert!(m.mul_vec(v).unwrap().is_zero());
            }
            let k = BitMatrix::from_rows(m.cols(), &kernel).unwrap();
            prop_assert_eq!(k.rank(), kernel.len());
        }

        #[test]
        fn rows_lie_in_rowspace(m in arb_matrix(12, 70)) {
            for i in 0..m.rows() {
                prop_assert!(m.in_rowspace(&m.row(i)).unwrap());
            }
        }

        #[test]
        fn independent_rows_span_everything(m in arb_matrix(16, 40)) {
            let kept = m.independent_rows();
            let sub = m.select_rows(&kept);
            prop_assert_eq!(sub.rank(), kept.len());
            prop_assert_eq!(kept.len(), m.rank());
        }

        #[test]
        fn add_mul_match_naive(
            (a, b, c) in (1usize..8, 1usize..65, 1usize..65).prop_flat_map(|(r, k, c)| {
                let cells = |n| proptest::collection::vec(any::<bool>(), n);
                (cells(r * k), cells(r * k), cells(k * c)).prop_map(move |(x, y, z)| {
                    (
                        BitMatrix::from_fn(r, k, |i, j| x[i * k + j]),
                        BitMatrix::from_fn(r, k, |i, j| y[i * k + j]),
                        BitMatrix::from_fn(k, c, |i, j| z[i * c + j]),
                    )
                })
            })
        ) {
            let (na, nb, nc) = (naive(&a), naive(&b), naive(&c));
            let sum = a.add(&b).unwrap();
            let prod = a.mul(&c).unwrap();
            let iprod = a.mul_int(&c).unwrap();
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    prop_assert_eq!(sum.get(i, j), na[i][j] ^ nb[i][j]);
                }
                for j in 0..c.cols() {
                    let count = (0..a.cols()).filter(|&k| na[i][k] && nc[k][j]).count() as u32;
                    prop_assert_eq!(iprod.get(i, j), count);
                    prop_assert_eq!(prod.get(i, j), count % 2 == 1);
                }
            }
        }

        #[test]
        fn kron_mixed_product(
            (a, b, c, d) in (1usize..4, 1usize..4, 1usize..4, 1usize..4, 1usize..4, 1usize..4)
                .prop_flat_map(|(p, q, r, s, t, u)| {
                    let m = |rows: usize, cols: usize| {
                        proptest::collection::vec(any::<bool>(), rows * cols).prop_map(
                            move |bits| BitMatrix::from_fn(rows, cols, |i, j| bits[i * cols + j]),
                        )
                    };
                    (m(p, q), m(s, t), m(q, r), m(t, u))
                })
        ) {
            let lhs = a.kron(&b).mul(&c.kron(&d)).unwrap();
            let rhs = a.mul(&c).unwrap().kron(&b.mul(&d).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn hex_rows_round_trip(m in arb_matrix(6, 90)) {
            let back = BitMatrix::from_hex_rows(m.cols(), &m.to_hex_rows()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
