//! Minimum distance: the least OR-weight of an operator in N(S) \ S.
//!
//! Three independent routes:
//! - [`distance_exact`] walks the whole normalizer in Gray-code order,
//! - [`distance_bounded`] enumerates errors by weight up to a budget,
//! - [`distance_oracle`] brute-forces all 4^n Paulis for tiny codes.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector};
use crate::stabilizer::{PauliString, StabilizerCode};

/// Largest normalizer dimension n+k that [`distance_exact`] accepts by default.
pub const DEFAULT_EXACT_CEILING: usize = 28;

/// Qubit limit for [`distance_oracle`].
pub const ORACLE_MAX_QUBITS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistanceError {
    #[error("normalizer dimension {dimension} exceeds the exact ceiling {ceiling}")]
    CeilingExceeded { dimension: usize, ceiling: usize },
    #[error("code has k = 0, so N(S) \\ S is empty")]
    NoLogicalOperators,
    #[error("{n} qubits exceeds the limit of {limit}")]
    TooManyQubits { n: usize, limit: usize },
    #[error("weight budget must be at least 1")]
    ZeroWeightBudget,
    #[error("worker pool: {0}")]
    Pool(String),
}

/// An error operator as X-part `a` and Z-part `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ErrorVector {
    pub a: BitVector,
    pub b: BitVector,
}

impl ErrorVector {
    pub fn new(a: BitVector, b: BitVector) -> Self {
        Self { a, b }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// popcount(a | b): qubits acted on non-trivially.
    pub fn or_weight(&self) -> usize {
        self.a
            .words()
            .iter()
            .zip(self.b.words())
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// `(a | b)`, laid out like a check-matrix row.
    pub fn to_row(&self) -> BitVector {
        self.a.concat(&self.b)
    }

    pub fn from_row(row: &BitVector) -> Self {
        let n = row.len() / 2;
        Self::new(row.slice(0, n), row.slice(n, n))
    }

    pub fn to_pauli(&self) -> PauliString {
        PauliString::from_bits(&self.a, &self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Exact,
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CosetEnumeration,
    WeightEnumeration,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceCertificate {
    pub kind: CertificateKind,
    pub d: usize,
    pub method: Method,
    pub witness: Option<ErrorVector>,
    pub elapsed_ms: u64,
}

impl DistanceCertificate {
    pub fn is_exact(&self) -> bool {
        self.kind == CertificateKind::Exact
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            kind: self.kind,
            d: self.d,
            method: self.method,
            witness_a_hex: self.witness.as_ref().map(|w| w.a.to_hex()),
            witness_b_hex: self.witness.as_ref().map(|w| w.b.to_hex()),
            elapsed_ms: Some(self.elapsed_ms),
        }
    }

    pub fn from_json(n: usize, j: &CertificateJson) -> Result<Self, crate::gf2::Gf2Error> {
        let witness = match (&j.witness_a_hex, &j.witness_b_hex) {
            (Some(a), Some(b)) => Some(ErrorVector::new(
                BitVector::from_hex(n, a)?,
                BitVector::from_hex(n, b)?,
            )),
            _ => None,
        };
        Ok(Self {
            kind: j.kind,
            d: j.d,
            method: j.method,
            witness,
            elapsed_ms: j.elapsed_ms.unwrap_or(0),
        })
    }
}

/// Certificate JSON layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub kind: CertificateKind,
    pub d: usize,
    pub method: Method,
    pub witness_a_hex: Option<String>,
    pub witness_b_hex: Option<String>,
    /// Wall time; left out of catalog records so they stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Largest n+k accepted by the exact search.
    pub ceiling: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self {
            workers: None,
            ceiling: DEFAULT_EXACT_CEILING,
        }
    }
}

fn run_in_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, DistanceError> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| DistanceError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// `(n−k) × 2n` system whose kernel is the normalizer: row i is generator i
/// with its halves swapped, so it multiplies `(a | b)` as `z·a + x·b`.
pub fn syndrome_matrix(code: &StabilizerCode) -> BitMatrix {
    let g = code.generators();
    g.z_part().hstack(&g.x_part()).expect("halves share a row count")
}

/// True iff `(a | b)` commutes with every generator.
pub fn in_normalizer(code: &StabilizerCode, e: &ErrorVector) -> bool {
    syndrome_matrix(code)
        .mul_vec(&e.to_row())
        .map(|s| s.is_zero())
        .unwrap_or(false)
}

/// True iff `(a | b)` commutes with every generator and is not itself a stabilizer.
pub fn is_logical(code: &StabilizerCode, e: &ErrorVector) -> bool {
    in_normalizer(code, e)
        && !code
            .generators()
            .matrix()
            .in_rowspace(&e.to_row())
            .unwrap_or(true)
}

fn check_has_logicals(code: &StabilizerCode) -> Result<(), DistanceError> {
    if code.k() == 0 {
        Err(DistanceError::NoLogicalOperators)
    } else {
        Ok(())
    }
}

/// Normalizer basis with the stabilizer generators first.
fn normalizer_basis(code: &StabilizerCode) -> Vec<BitVector> {
    let gens = code.generators().matrix();
    let kernel = syndrome_matrix(code).kernel_basis();
    let stacked = BitMatrix::from_rows(gens.cols(), &[gens.row_vectors(), kernel].concat())
        .expect("kernel vectors have width 2n");
    stacked
        .independent_rows()
        .into_iter()
        .map(|i| stacked.row(i))
        .collect()
}

struct Packed {
    stride: usize,
    /// For basis vector j: X words then Z words.
    words: Vec<u64>,
}

impl Packed {
    fn new(n: usize, basis: &[BitVector]) -> Self {
        let stride = n.div_ceil(64).max(1);
        let mut words = Vec::with_capacity(basis.len() * 2 * stride);
        for v in basis {
            let mut a = v.slice(0, n).words().to_vec();
            let mut b = v.slice(n, n).words().to_vec();
            a.resize(stride, 0);
            b.resize(stride, 0);
            words.extend(a);
            words.extend(b);
        }
        Self { stride, words }
    }

    fn vector(&self, j: usize) -> &[u64] {
        &self.words[j * 2 * self.stride..(j + 1) * 2 * self.stride]
    }
}

fn or_weight_words(cur: &[u64], stride: usize) -> u32 {
    (0..stride).map(|w| (cur[w] | cur[stride + w]).count_ones()).sum()
}

/// Scan Gray-code indices `start..end` and return the lightest `(weight, index)`.
fn scan_chunk(packed: &Packed, start: u64, end: u64) -> (u32, u64) {
    let stride = packed.stride;
    let mut cur = vec![0u64; 2 * stride];
    let gray = start ^ (start >> 1);
    let mut bits = gray;
    while bits != 0 {
        let j = bits.trailing_zeros() as usize;
        for (c, v) in cur.iter_mut().zip(packed.vector(j)) {
            *c ^= v;
        }
        bits &= bits - 1;
    }
    let mut best = (or_weight_words(&cur, stride), start);
    if stride == 1 {
        let (mut a, mut b) = (cur[0], cur[1]);
        for i in start + 1..end {
            let j = i.trailing_zeros() as usize;
            a ^= packed.words[2 * j];
            b ^= packed.words[2 * j + 1];
            let w = (a | b).count_ones();
            if w < best.0 {
                best = (w, i);
            }
        }
    } else {
        for i in start + 1..end {
            let j = i.trailing_zeros() as usize;
            for (c, v) in cur.iter_mut().zip(packed.vector(j)) {
                *c ^= v;
            }
            let w = or_weight_words(&cur, stride);
            if w < best.0 {
                best = (w, i);
            }
        }
    }
    best
}

fn vector_at(basis: &[BitVector], index: u64) -> BitVector {
    let gray = index ^ (index >> 1);
    let mut v = BitVector::zeros(basis[0].len());
    for (j, b) in basis.iter().enumerate() {
        if gray >> j & 1 == 1 {
            v.xor_assign(b);
        }
    }
    v
}

/// Exact distance with default options.
pub fn distance_exact(code: &StabilizerCode) -> Result<DistanceCertificate, DistanceError> {
    distance_exact_with(code, &DistanceOptions::default())
}

/// Exact distance by enumerating every element of N(S) outside S.
///
/// The normalizer basis starts with the n−k generators, so in Gray-code order
/// index i lies in S exactly when `i < 2^(n−k)`; only the indices above that
/// are visited. The witness is the lightest vector with the smallest index,
/// which does not depend on how the range is split between workers.
pub fn distance_exact_with(
    code: &StabilizerCode,
    opts: &DistanceOptions,
) -> Result<DistanceCertificate, DistanceError> {
    check_has_logicals(code)?;
    let n = code.n();
    let dimension = n + code.k();
    let ceiling = opts.ceiling.min(63);
    if dimension > ceiling {
        return Err(DistanceError::CeilingExceeded { dimension, ceiling });
    }
    let started = Instant::now();
    let basis = normalizer_basis(code);
    debug_assert_eq!(basis.len(), dimension);
    let packed = Packed::new(n, &basis);
    let r = n - code.k();
    let (lo, hi) = (1u64 << r, 1u64 << dimension);
    let chunk = ((hi - lo) / 1024).max(1 << 12);
    let starts: Vec<u64> = (lo..hi).step_by(chunk as usize).collect();
    let (weight, index) = run_in_pool(opts.workers, || {
        starts
            .par_iter()
            .map(|&s| scan_chunk(&packed, s, (s + chunk).min(hi)))
            .min()
            .expect("at least one chunk")
    })?;
    let witness = ErrorVector::from_row(&vector_at(&basis, index));
    debug_assert_eq!(witness.or_weight(), weight as usize);
    debug_assert!(is_logical(code, &witness));
    Ok(DistanceCertificate {
        kind: CertificateKind::Exact,
        d: weight as usize,
        method: Method::CosetEnumeration,
        witness: Some(witness),
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

/// Pauli on one qubit as (x, z) bits: X, Z, Y.
const PATTERNS: [(bool, bool); 3] = [(true, false), (false, true), (true, true)];

struct WeightSearch<'a> {
    code: &'a StabilizerCode,
    n: usize,
    /// Syndrome of X, Z, Y on each qubit.
    single: Vec<[u128; 3]>,
    /// Two-qubit errors on p < q keyed by syndrome, in (p, q, patterns) order.
    pairs: HashMap<u128, Vec<(u8, u8, u8, u8)>>,
}

impl<'a> WeightSearch<'a> {
    fn new(code: &'a StabilizerCode) -> Self {
        let n = code.n();
        let g = code.generators();
        let (x, z) = (g.x_part(), g.z_part());
        let column = |m: &BitMatrix, j: usize| -> u128 {
            (0..m.rows()).filter(|&i| m.get(i, j)).fold(0, |s, i| s | 1 << i)
        };
        let single: Vec<[u128; 3]> = (0..n)
            .map(|j| {
                let sx = column(&z, j);
                let sz = column(&x, j);
                [sx, sz, sx ^ sz]
            })
            .collect();
        let mut pairs: HashMap<u128, Vec<(u8, u8, u8, u8)>> = HashMap::new();
        for p in 0..n {
            for q in p + 1..n {
                for (pp, sp) in single[p].iter().enumerate() {
                    for (pq, sq) in single[q].iter().enumerate() {
                        pairs
                            .entry(sp ^ sq)
                            .or_default()
                            .push((p as u8, q as u8, pp as u8, pq as u8));
                    }
                }
            }
        }
        Self {
            code,
            n,
            single,
            pairs,
        }
    }

    fn error(&self, terms: &[(usize, usize)]) -> ErrorVector {
        let mut a = BitVector::zeros(self.n);
        let mut b = BitVector::zeros(self.n);
        for &(q, p) in terms {
            let (x, z) = PATTERNS[p];
            a.set(q, x);
            b.set(q, z);
        }
        ErrorVector::new(a, b)
    }

    fn qualifies(&self, terms: &[(usize, usize)]) -> Option<ErrorVector> {
        let e = self.error(terms);
        let in_s = self
            .code
            .generators()
            .matrix()
            .in_rowspace(&e.to_row())
            .expect("width 2n");
        (!in_s).then_some(e)
    }

    /// First logical of weight exactly `w` whose lowest qubit is `lead`.
    fn search_lead(&self, w: usize, lead: usize) -> Option<ErrorVector> {
        let mut terms = Vec::with_capacity(w);
        (0..3).find_map(|p| {
            terms.clear();
            terms.push((lead, p));
            self.extend(w, self.single[lead][p], &mut terms)
        })
    }

    fn extend(&self, w: usize, syn: u128, terms: &mut Vec<(usize, usize)>) -> Option<ErrorVector> {
        let last = terms.last().map(|t| t.0);
        let remaining = w - terms.len();
        match remaining {
            0 => (syn == 0).then(|| self.qualifies(terms)).flatten(),
            1 => {
                let from = last.map_or(0, |l| l + 1);
                for q in from..self.n {
                    for p in 0..3 {
                        if self.single[q][p] == syn {
                            terms.push((q, p));
                            let hit = self.qualifies(terms);
                            terms.pop();
                            if hit.is_some() {
                                return hit;
                            }
                        }
                    }
                }
                None
            }
            2 => {
                let list = self.pairs.get(&syn)?;
                for &(p, q, pp, pq) in list {
                    if last.is_some_and(|l| p as usize <= l) {
                        continue;
                    }
                    terms.push((p as usize, pp as usize));
                    terms.push((q as usize, pq as usize));
                    let hit = self.qualifies(terms);
                    terms.truncate(terms.len() - 2);
                    if hit.is_some() {
                        return hit;
                    }
                }
                None
            }
            _ => {
                let from = last.map_or(0, |l| l + 1);
                // Leave room for the remaining positions.
                for q in from..=self.n - remaining {
                    for p in 0..3 {
                        terms.push((q, p));
                        let hit = self.extend(w, syn ^ self.single[q][p], terms);
                        terms.pop();
                        if hit.is_some() {
                            return hit;
                        }
                    }
                }
                None
            }
        }
    }

    fn search_weight(&self, w: usize) -> Option<ErrorVector> {
        if w > self.n {
            return None;
        }
        if w <= 2 {
            let mut terms = Vec::new();
            return self.extend(w, 0, &mut terms);
        }
        (0..=self.n - w)
            .into_par_iter()
            .find_map_first(|lead| self.search_lead(w, lead))
    }
}

/// Weight-limited distance with default options.
pub fn distance_bounded(code: &StabilizerCode, w_max: usize) -> Result<DistanceCertificate, DistanceError> {
    distance_bounded_with(code, w_max, &DistanceOptions::default())
}

/// Try every error of weight 1, 2, ..., `w_max`.
///
/// Supports are visited in lexicographic order, with the last two qubits
/// resolved through a table of two-qubit syndromes. Workers split each
/// weight by the lowest support position, and the hit reported is the first
/// in that order, so the witness does not depend on the worker count.
pub fn distance_bounded_with(
    code: &StabilizerCode,
    w_max: usize,
    opts: &DistanceOptions,
) -> Result<DistanceCertificate, DistanceError> {
    check_has_logicals(code)?;
    if w_max == 0 {
        return Err(DistanceError::ZeroWeightBudget);
    }
    let rows = code.n() - code.k();
    if rows > 128 {
        return Err(DistanceError::TooManyQubits { n: code.n(), limit: 128 + code.k() });
    }
    let started = Instant::now();
    let search = WeightSearch::new(code);
    let found = run_in_pool(opts.workers, || {
        (1..=w_max.min(code.n())).find_map(|w| search.search_weight(w).map(|e| (w, e)))
    })?;
    let elapsed_ms = started.elapsed().as_millis() as u64;
    Ok(match found {
        Some((w, e)) => DistanceCertificate {
            kind: CertificateKind::Exact,
            d: w,
            method: Method::WeightEnumeration,
            witness: Some(e),
            elapsed_ms,
        },
        None => DistanceCertificate {
            kind: CertificateKind::LowerBound,
            d: w_max + 1,
            method: Method::WeightEnumeration,
            witness: None,
            elapsed_ms,
        },
    })
}

/// Definition-level check over all 4^n Pauli operators (n ≤ 8).
///
/// Stabilizer membership is decided by listing every product of generators,
/// and normalizer membership by direct symplectic products, so this shares
/// no code with the other two searches.
pub fn distance_oracle(code: &StabilizerCode) -> Result<DistanceCertificate, DistanceError> {
    let n = code.n();
    if n > ORACLE_MAX_QUBITS {
        return Err(DistanceError::TooManyQubits {
            n,
            limit: ORACLE_MAX_QUBITS,
        });
    }
    check_has_logicals(code)?;
    let started = Instant::now();
    let m = code.generators().matrix();
    let mask = |i: usize, off: usize| (0..n).filter(|&j| m.get(i, off + j)).fold(0u32, |s, j| s | 1 << j);
    let gens: Vec<(u32, u32)> = (0..m.rows()).map(|i| (mask(i, 0), mask(i, n))).collect();
    let mut group = HashSet::new();
    for combo in 0u32..1 << gens.len() {
        let (mut x, mut z) = (0, 0);
        for (i, g) in gens.iter().enumerate() {
            if combo >> i & 1 == 1 {
                x ^= g.0;
                z ^= g.1;
            }
        }
        group.insert((x, z));
    }
    let mut best: Option<(u32, u32, u32)> = None;
    for a in 0u32..1 << n {
        for b in 0u32..1 << n {
            let w = (a | b).count_ones();
            if best.is_some_and(|(bw, _, _)| w >= bw) {
                continue;
            }
            let commutes = gens
                .iter()
                .all(|&(gx, gz)| ((a & gz).count_ones() + (b & gx).count_ones()) % 2 == 0);
            if commutes && !group.contains(&(a, b)) {
                best = Some((w, a, b));
            }
        }
    }
    let (w, a, b) = best.expect("k > 0 leaves N(S) larger than S");
    let bits = |v: u32| BitVector::from_indices(n, &(0..n).filter(|&j| v >> j & 1 == 1).collect::<Vec<_>>());
    Ok(DistanceCertificate {
        kind: CertificateKind::Exact,
        d: w as usize,
        method: Method::Oracle,
        witness: Some(ErrorVector::new(bits(a), bits(b))),
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

/// Quantum Hamming bound: Σ_{j ≤ ⌊(d−1)/2⌋} C(n, j) 3^j 2^k ≤ 2^n.
pub fn hamming_bound_ok(n: usize, k: usize, d: usize) -> bool {
    let t = d.saturating_sub(1) / 2;
    let mut binom = BigUint::from(1u32);
    let mut pow3 = BigUint::from(1u32);
    let mut total = BigUint::from(0u32);
    for j in 0..=t.min(n) {
        if j > 0 {
            binom = binom * BigUint::from(n - j + 1) / BigUint::from(j);
            pow3 *= 3u32;
        }
        total += &binom * &pow3;
    }
    (total << k) <= (BigUint::from(1u32) << n)
}

/// Knill-Laflamme bound: n ≥ k + 2d − 2.
pub fn kl_bound_ok(n: usize, k: usize, d: usize) -> bool {
    n + 2 >= k + 2 * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::cyclic_scheme;
    use crate::stabilizer::{build_check_matrix, from_pauli, select_generators, StabilizerCode};

    fn code(nu: usize, b1: &[usize], b2: &[usize], drop: usize) -> StabilizerCode {
        let s = cyclic_scheme(nu).unwrap();
        select_generators(&build_check_matrix(&s, b1, b2).unwrap(), drop).unwrap()
    }

    fn five() -> StabilizerCode {
        code(5, &[1], &[2], 1)
    }

    #[test]
    fn syndrome_rows_swap_halves() {
        let m = syndrome_matrix(&five());
        assert_eq!(m.row(0), BitVector::parse_bits("00110|01001").unwrap());
        assert_eq!(m.kernel_basis().len(), 6);
    }

    #[test]
    fn five_qubit_distance_three_ways() {
        let c = five();
        let e = distance_exact(&c).unwrap();
        let o = distance_oracle(&c).unwrap();
        assert_eq!((e.d, o.d), (3, 3));
        assert!(is_logical(&c, e.witness.as_ref().unwrap()));
        assert!(is_logical(&c, o.witness.as_ref().unwrap()));
        let lb = distance_bounded(&c, 2).unwrap();
        assert_eq!((lb.kind, lb.d), (CertificateKind::LowerBound, 3));
        assert!(lb.witness.is_none());
        let ex = distance_bounded(&c, 3).unwrap();
        assert_eq!((ex.kind, ex.d), (CertificateKind::Exact, 3));
        assert_eq!(ex.witness.as_ref().unwrap().or_weight(), 3);
    }

    #[test]
    fn stabilizer_state_has_no_distance() {
        let c = StabilizerCode::from_check_matrix(
            crate::stabilizer::CheckMatrix::from_parts(&BitMatrix::identity(2), &BitMatrix::zeros(2, 2)).unwrap(),
        )
        .unwrap();
        assert_eq!(syndrome_matrix(&c).kernel_basis().len(), 2);
        assert_eq!(distance_exact(&c), Err(DistanceError::NoLogicalOperators));
        assert_eq!(distance_bounded(&c, 2), Err(DistanceError::NoLogicalOperators));
        assert_eq!(distance_oracle(&c), Err(DistanceError::NoLogicalOperators));
    }

    #[test]
    fn weight_one_logicals() {
        // Stabilizer ZZ on two qubits: Z on qubit 0 is logical.
        let c = StabilizerCode::from_check_matrix(from_pauli(&["ZZI".parse().unwrap()]).unwrap()).unwrap();
        assert_eq!(distance_exact(&c).unwrap().d, 1);
        assert_eq!(distance_bounded(&c, 4).unwrap().d, 1);
        assert_eq!(distance_oracle(&c).unwrap().d, 1);
    }

    #[test]
    fn worker_count_does_not_change_witness() {
        let c = code(13, &[1, 3, 4, 5], &[2, 3, 5], 0);
        let one = distance_exact_with(&c, &DistanceOptions { workers: Some(1), ..Default::default() }).unwrap();
        let four = distance_exact_with(&c, &DistanceOptions { workers: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one.d, 5);
        assert_eq!(one.witness, four.witness);
        let b1 = distance_bounded_with(&c, 5, &DistanceOptions { workers: Some(1), ..Default::default() }).unwrap();
        let b3 = distance_bounded_with(&c, 5, &DistanceOptions { workers: Some(3), ..Default::default() }).unwrap();
        assert_eq!(b1, DistanceCertificate { elapsed_ms: b1.elapsed_ms, ..b3.clone() });
    }

    #[test]
    fn ceiling_is_enforced() {
        let c = five();
        let opts = DistanceOptions { workers: None, ceiling: 5 };
        assert_eq!(
            distance_exact_with(&c, &opts),
            Err(DistanceError::CeilingExceeded { dimension: 6, ceiling: 5 })
        );
        assert_eq!(distance_bounded(&c, 0), Err(DistanceError::ZeroWeightBudget));
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = distance_exact(&five()).unwrap();
        let j = cert.to_json();
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"kind\":\"exact\""));
        assert!(text.contains("\"method\":\"coset-enumeration\""));
        let back = DistanceCertificate::from_json(5, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn bounds() {
        assert!(hamming_bound_ok(5, 1, 3));
        assert!(!hamming_bound_ok(5, 2, 3));
        assert!(!hamming_bound_ok(4, 1, 3));
        assert!(kl_bound_ok(5, 1, 3));
        assert!(kl_bound_ok(21, 5, 7));
        assert!(kl_bound_ok(11, 1, 6));
        assert!(!kl_bound_ok(10, 1, 6));
    }

    #[test]
    fn oracle_refuses_large_codes() {
        let c = code(11, &[1, 4, 5], &[2, 5], 1);
        assert!(matches!(distance_oracle(&c), Err(DistanceError::TooManyQubits { .. })));
    }
}
