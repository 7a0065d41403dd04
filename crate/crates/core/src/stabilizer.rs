//! Check matrices, generator selection and Pauli-string rendering.
//!
//! A check matrix row is `(x | z)` over 2n columns: column `j < n` flags an X
//! on qubit j, column `n + j` a Z, and both together a Y. Phases are not
//! tracked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector, Gf2Error};
use crate::schemes::AssociationScheme;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabilizerError {
    #[error("adjacency index {index} out of range (basis has {len} matrices)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("both B1 and B2 selections are empty")]
    EmptySelection,
    #[error("rows {0} and {1} anticommute")]
    NotCommuting(usize, usize),
    #[error("cannot drop {drop} of {rows} rows")]
    DropTooLarge { drop: usize, rows: usize },
    #[error("no independent rows remain")]
    NoIndependentRows,
    #[error("keep-set is empty")]
    EmptyKeep,
    #[error("row {row} out of range ({rows} rows)")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("check matrix width {0} is odd")]
    OddWidth(usize),
    #[error("B1 is {0:?} but B2 is {1:?}")]
    PartShape((usize, usize), (usize, usize)),
    #[error("invalid Pauli symbol {0:?}")]
    BadSymbol(char),
    #[error("Pauli strings have lengths {0} and {1}")]
    RaggedPauli(usize, usize),
    #[error("no generators given")]
    NoGenerators,
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// How B1 or B2 was formed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selection {
    /// Sum of the basis matrices with these indices.
    Indices(Vec<usize>),
    /// Tensor-shorthand expression such as `I_2A_2+XA_1`.
    Expression(String),
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selection::Indices(ix) => {
                let parts: Vec<String> = ix.iter().map(|i| format!("A_{i}")).collect();
                f.write_str(&parts.join("+"))
            }
            Selection::Expression(e) => f.write_str(e),
        }
    }
}

/// Where a check matrix came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Source {
    pub scheme: String,
    pub label: String,
    pub b1: Selection,
    pub b2: Selection,
}

/// A `rows × 2n` matrix `(B1 | B2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckMatrix {
    n: usize,
    m: BitMatrix,
    source: Option<Source>,
}

impl CheckMatrix {
    pub fn new(m: BitMatrix) -> Result<Self, StabilizerError> {
        if !m.cols().is_multiple_of(2) {
            return Err(StabilizerError::OddWidth(m.cols()));
        }
        Ok(Self {
            n: m.cols() / 2,
            m,
            source: None,
        })
    }

    /// Place X-part `b1` and Z-part `b2` side by side.
    pub fn from_parts(b1: &BitMatrix, b2: &BitMatrix) -> Result<Self, StabilizerError> {
        if b1.shape() != b2.shape() {
            return Err(StabilizerError::PartShape(b1.shape(), b2.shape()));
        }
        Self::new(b1.hstack(b2)?)
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = Some(source);
        self
    }

    pub fn source(&self) -> Option<&Source> {
        self.source.as_ref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.m
    }

    pub fn x_part(&self) -> BitMatrix {
        self.m.column_block(0, self.n)
    }

    pub fn z_part(&self) -> BitMatrix {
        self.m.column_block(self.n, self.n)
    }

    /// First anticommuting row pair, if any.
    pub fn anticommuting_pair(&self) -> Option<(usize, usize)> {
        let x = self.x_part();
        let z = self.z_part();
        for i in 0..self.rows() {
            for j in i + 1..self.rows() {
                if symplectic_words(x.row_words(i), z.row_words(i), x.row_words(j), z.row_words(j)) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn commutes(&self) -> bool {
        self.anticommuting_pair().is_none()
    }

    pub fn pauli_row(&self, i: usize) -> PauliString {
        let row = self.m.row(i);
        PauliString::from_bits(&row.slice(0, self.n), &row.slice(self.n, self.n))
    }

    pub fn to_pauli(&self) -> Vec<PauliString> {
        (0..self.rows()).map(|i| self.pauli_row(i)).collect()
    }

    pub fn to_json(&self) -> CheckMatrixJson {
        CheckMatrixJson {
            n: self.n,
            rows: self.m.to_hex_rows(),
        }
    }

    pub fn from_json(j: &CheckMatrixJson) -> Result<Self, StabilizerError> {
        Self::new(BitMatrix::from_hex_rows(2 * j.n, &j.rows)?)
    }
}

/// Check-matrix JSON: `{n, rows}` with each 2n-bit row hex-packed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckMatrixJson {
    pub n: usize,
    pub rows: Vec<String>,
}

fn symplectic_words(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> bool {
    let mut ones = 0u32;
    for w in 0..x1.len() {
        ones += (x1[w] & z2[w]).count_ones() + (z1[w] & x2[w]).count_ones();
    }
    ones & 1 == 1
}

/// Symplectic product of two `(x | z)` rows of length 2n; true means they anticommute.
pub fn symplectic_product(u: &BitVector, v: &BitVector) -> bool {
    let n = u.len() / 2;
    let (ux, uz) = (u.slice(0, n), u.slice(n, n));
    let (vx, vz) = (v.slice(0, n), v.slice(n, n));
    ux.dot(&vz) ^ uz.dot(&vx)
}

/// True iff `B1 B2ᵀ + B2 B1ᵀ = 0`.
pub fn commutes(c: &CheckMatrix) -> bool {
    c.commutes()
}

fn selection_sum(s: &AssociationScheme, sel: &[usize]) -> Result<BitMatrix, StabilizerError> {
    let nu = s.order();
    let mut acc = BitMatrix::zeros(nu, nu);
    for &i in sel {
        let a = s.matrix(i).ok_or(StabilizerError::IndexOutOfRange {
            index: i,
            len: s.adjacency().len(),
        })?;
        acc = acc.add(a)?;
    }
    Ok(acc)
}

/// `(B1 | B2)` with B1, B2 the GF(2) sums of the selected basis matrices.
pub fn build_check_matrix(
    s: &AssociationScheme,
    sel1: &[usize],
    sel2: &[usize],
) -> Result<CheckMatrix, StabilizerError> {
    if sel1.is_empty() && sel2.is_empty() {
        return Err(StabilizerError::EmptySelection);
    }
    let b1 = selection_sum(s, sel1)?;
    let b2 = selection_sum(s, sel2)?;
    Ok(CheckMatrix::from_parts(&b1, &b2)?.with_source(Source {
        scheme: s.spec().to_string(),
        label: s.label().to_string(),
        b1: Selection::Indices(sel1.to_vec()),
        b2: Selection::Indices(sel2.to_vec()),
    }))
}

/// Which rows of the check matrix were offered to generator selection.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowChoice {
    DropLast(usize),
    Keep(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<Source>,
    pub rows: RowChoice,
    /// Indices into the original check matrix of the surviving generators.
    pub kept: Vec<usize>,
}

/// An [[n, k]] stabilizer code with independent, commuting generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    n: usize,
    k: usize,
    gens: CheckMatrix,
    provenance: Provenance,
}

impl StabilizerCode {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generators(&self) -> &CheckMatrix {
        &self.gens
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn to_pauli(&self) -> Vec<PauliString> {
        self.gens.to_pauli()
    }

    /// Reduced row-echelon rows, hex-packed; equal iff the stabilizer groups are equal.
    pub fn canonical_rows(&self) -> Vec<String> {
        self.gens.matrix().echelon().to_matrix().to_hex_rows()
    }

    /// Take a check matrix as a whole, keeping its independent rows.
    pub fn from_check_matrix(c: CheckMatrix) -> Result<Self, StabilizerError> {
        let all: Vec<usize> = (0..c.rows()).collect();
        select_rows(c, all, RowChoice::Keep(Vec::new()))
    }
}

fn select_rows(
    c: CheckMatrix,
    offered: Vec<usize>,
    rows: RowChoice,
) -> Result<StabilizerCode, StabilizerError> {
    if let Some((i, j)) = c.anticommuting_pair() {
        return Err(StabilizerError::NotCommuting(i, j));
    }
    let sub = c.matrix().select_rows(&offered);
    let kept: Vec<usize> = sub.independent_rows().into_iter().map(|i| offered[i]).collect();
    if kept.is_empty() {
        return Err(StabilizerError::NoIndependentRows);
    }
    let n = c.n();
    let gens = CheckMatrix {
        n,
        m: c.matrix().select_rows(&kept),
        source: c.source.clone(),
    };
    let rows = match rows {
        RowChoice::Keep(v) if v.is_empty() => RowChoice::Keep(offered),
        other => other,
    };
    Ok(StabilizerCode {
        n,
        k: n - kept.len(),
        provenance: Provenance {
            source: c.source,
            rows,
            kept,
        },
        gens,
    })
}

/// Remove the last `drop_last` rows, then any dependent rows (earliest kept).
pub fn select_generators(c: &CheckMatrix, drop_last: usize) -> Result<StabilizerCode, StabilizerError> {
    if drop_last >= c.rows() {
        return Err(StabilizerError::DropTooLarge {
            drop: drop_last,
            rows: c.rows(),
        });
    }
    let offered: Vec<usize> = (0..c.rows() - drop_last).collect();
    select_rows(c.clone(), offered, RowChoice::DropLast(drop_last))
}

/// Keep only the listed rows (sorted, duplicates ignored), then drop dependent ones.
pub fn select_generators_subset(c: &CheckMatrix, keep: &[usize]) -> Result<StabilizerCode, StabilizerError> {
    if keep.is_empty() {
        return Err(StabilizerError::EmptyKeep);
    }
    let mut offered = keep.to_vec();
    offered.sort_unstable();
    offered.dedup();
    if let Some(&row) = offered.iter().find(|&&r| r >= c.rows()) {
        return Err(StabilizerError::RowOutOfRange { row, rows: c.rows() });
    }
    select_rows(c.clone(), offered.clone(), RowChoice::Keep(offered))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = StabilizerError;

    fn try_from(c: char) -> Result<Self, Self::Error> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(StabilizerError::BadSymbol(other)),
        }
    }
}

/// A phase-free n-qubit Pauli operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(symbols: Vec<Pauli>) -> Self {
        Self(symbols)
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn from_bits(x: &BitVector, z: &BitVector) -> Self {
        Self((0..x.len()).map(|j| Pauli::from_bits(x.get(j), z.get(j))).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Pauli] {
        &self.0
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// The `(x | z)` row of length 2n.
    pub fn to_row(&self) -> BitVector {
        let n = self.0.len();
        let mut v = BitVector::zeros(2 * n);
        for (j, p) in self.0.iter().enumerate() {
            let (x, z) = p.bits();
            v.set(j, x);
            v.set(n + j, z);
        }
        v
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = StabilizerError;

    /// Whitespace between symbols is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>, _>>()
            .map(PauliString)
    }
}

pub fn to_pauli(code: &StabilizerCode) -> Vec<PauliString> {
    code.to_pauli()
}

pub fn from_pauli(gens: &[PauliString]) -> Result<CheckMatrix, StabilizerError> {
    let first = gens.first().ok_or(StabilizerError::NoGenerators)?;
    let n = first.len();
    if let Some(g) = gens.iter().find(|g| g.len() != n) {
        return Err(StabilizerError::RaggedPauli(n, g.len()));
    }
    let rows: Vec<BitVector> = gens.iter().map(PauliString::to_row).collect();
    CheckMatrix::new(BitMatrix::from_rows(2 * n, &rows)?)
}

/// One generator per line; blank lines and `#` comments are skipped.
pub fn parse_pauli_text(text: &str) -> Result<CheckMatrix, StabilizerError> {
    let gens = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect::<Result<Vec<PauliString>, _>>()?;
    from_pauli(&gens)
}

pub fn format_pauli_text(gens: &[PauliString]) -> String {
    let mut out = String::new();
    for g in gens {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{cyclic_scheme, shift_power};
    use proptest::prelude::*;

    fn c5_code() -> StabilizerCode {
        let s = cyclic_scheme(5).unwrap();
        select_generators(&build_check_matrix(&s, &[1], &[2]).unwrap(), 1).unwrap()
    }

    #[test]
    fn five_qubit_code() {
        let code = c5_code();
        assert_eq!((code.n(), code.k()), (5, 1));
        let text: Vec<String> = code.to_pauli().iter().map(ToString::to_string).collect();
        assert_eq!(text, ["IXZZX", "XIXZZ", "ZXIXZ", "ZZXIX"]);
        assert_eq!(code.provenance().kept, vec![0, 1, 2, 3]);
    }

    #[test]
    fn keep_subsets() {
        let s = cyclic_scheme(5).unwrap();
        let c = build_check_matrix(&s, &[1], &[2]).unwrap();
        let all = select_generators_subset(&c, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(all.k(), 1);
        let first4 = select_generators_subset(&c, &[3, 1, 0, 2]).unwrap();
        assert_eq!(first4.generators(), c5_code().generators());
        assert_eq!(select_generators_subset(&c, &[]), Err(StabilizerError::EmptyKeep));
        assert!(matches!(
            select_generators_subset(&c, &[5]),
            Err(StabilizerError::RowOutOfRange { .. })
        ));
    }

    #[test]
    fn stabilizer_state() {
        let b1 = BitMatrix::identity(3);
        let c = CheckMatrix::from_parts(&b1, &BitMatrix::zeros(3, 3)).unwrap();
        let code = select_generators(&c, 0).unwrap();
        assert_eq!(code.k(), 0);
        assert!(matches!(select_generators(&c, 3), Err(StabilizerError::DropTooLarge { .. })));
    }

    #[test]
    fn symmetric_scheme_pairs_all_commute() {
        // Every subset pair of C_5 commutes: symmetric commuting B1, B2 give 2·B1B2 ≡ 0.
        let s = cyclic_scheme(5).unwrap();
        for m1 in 0u32..8 {
            for m2 in 0u32..8 {
                if m1 == 0 && m2 == 0 {
                    continue;
                }
                let sel = |m: u32| (0..3).filter(|i| m >> i & 1 == 1).collect::<Vec<usize>>();
                let c = build_check_matrix(&s, &sel(m1), &sel(m2)).unwrap();
                assert!(commutes(&c), "{m1} {m2}");
            }
        }
        // A non-symmetric X-part breaks it: S·I + I·Sᵀ = S + S⁻¹ ≠ 0.
        let c = CheckMatrix::from_parts(&shift_power(5, 1), &BitMatrix::identity(5)).unwrap();
        assert!(!commutes(&c));
        assert!(matches!(select_generators(&c, 0), Err(StabilizerError::NotCommuting(..))));
    }

    #[test]
    fn equal_halves_commute() {
        let m = BitMatrix::from_fn(4, 4, |i, j| (i * 3 + j * 5) % 7 < 3);
        assert!(commutes(&CheckMatrix::from_parts(&m, &m).unwrap()));
    }

    #[test]
    fn selection_errors() {
        let s = cyclic_scheme(5).unwrap();
        assert_eq!(build_check_matrix(&s, &[], &[]), Err(StabilizerError::EmptySelection));
        assert!(matches!(
            build_check_matrix(&s, &[3], &[1]),
            Err(StabilizerError::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn pauli_parsing() {
        let p: PauliString = "I X Z Z X".parse().unwrap();
        assert_eq!(p.to_string(), "IXZZX");
        assert_eq!(p.weight(), 4);
        assert_eq!(p.to_row(), BitVector::parse_bits("01001|00110").unwrap());
        assert_eq!("IXQ".parse::<PauliString>(), Err(StabilizerError::BadSymbol('Q')));
        assert_eq!(PauliString::identity(3).to_string(), "III");
        let c = parse_pauli_text("# five\nIXZZX\n\nXIXZZ\n").unwrap();
        assert_eq!(c.rows(), 2);
        assert!(matches!(
            parse_pauli_text("IX\nIXZ"),
            Err(StabilizerError::RaggedPauli(2, 3))
        ));
        assert_eq!(from_pauli(&[]), Err(StabilizerError::NoGenerators));
    }

    #[test]
    fn json_round_trip() {
        let c = c5_code().generators().clone();
        let j = c.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back = CheckMatrix::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.matrix(), c.matrix());
    }

    #[test]
    fn canonical_rows_ignore_generator_choice() {
        let s = cyclic_scheme(5).unwrap();
        let c = build_check_matrix(&s, &[1], &[2]).unwrap();
        let a = select_generators_subset(&c, &[0, 1, 2, 3]).unwrap();
        let b = select_generators_subset(&c, &[1, 2, 3, 4]).unwrap();
        assert_ne!(a.generators(), b.generators());
        assert_eq!(a.canonical_rows(), b.canonical_rows());
    }

    fn pauli_strategy() -> impl Strategy<Value = PauliString> {
        prop::collection::vec(0u8..4, 1..80).prop_map(|v| {
            PauliString::new(
                v.into_iter()
                    .map(|c| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][c as usize])
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn pauli_round_trip(p in pauli_strategy()) {
            let c = from_pauli(std::slice::from_ref(&p)).unwrap();
            prop_assert_eq!(c.pauli_row(0), p.clone());
            let text = p.to_string();
            prop_assert_eq!(text.parse::<PauliString>().unwrap(), p);
        }

        #[test]
        fn row_round_trip(bits in prop::collection::vec(any::<bool>(), 2..120)) {
            let bits = if bits.len() % 2 == 1 { &bits[1..] } else { &bits[..] };
            let row = BitVector::from_bools(bits);
            let c = CheckMatrix::new(BitMatrix::from_rows(row.len(), std::slice::from_ref(&row)).unwrap()).unwrap();
            let back = from_pauli(&c.to_pauli()).unwrap();
            prop_assert_eq!(back.matrix().row(0), row);
        }

        #[test]
        fn symplectic_matches_pauli_anticommutation(p in pauli_strategy(), seed in any::<u64>()) {
            let q = PauliString::new(p.symbols().iter().enumerate().map(|(j, _)| {
                [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][((seed >> ((j * 2) % 64)) & 3) as usize]
            }).collect());
            // Single-qubit Paulis anticommute iff both non-identity and different.
            let clashes = p.symbols().iter().zip(q.symbols())
                .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
                .count();
            prop_assert_eq!(symplectic_product(&p.to_row(), &q.to_row()), clashes % 2 == 1);
        }
    }
}
