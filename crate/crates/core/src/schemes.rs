//! Association schemes as ordered lists of adjacency matrices.
//!
//! Every constructor here returns a basis `A_0, ..., A_d` of ν×ν 0/1 matrices.
//! Group schemes are assembled from explicit regular-representation block
//! matrices for the generators, so basis indices follow the class lists of
//! each family directly. Nothing is assumed: [`verify_scheme`] checks the
//! axioms on the matrices themselves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter { family: &'static str, reason: String },
    #[error("product of an empty list of schemes")]
    EmptyProduct,
    #[error("class-sum terms overlap in {0}; the sum is not a 0/1 matrix")]
    OverlappingTerms(String),
    #[error("A_{i} A_{j} does not expand in the basis (cell ({row}, {col}))")]
    NotClosed {
        i: usize,
        j: usize,
        row: usize,
        col: usize,
    },
    #[error("basis does not partition the all-ones matrix")]
    NotPartition,
    #[error("cannot parse scheme spec {0:?}")]
    Parse(String),
    #[error("there are no groups of order 0")]
    ZeroOrder,
}

/// The 2×2 swap matrix, written σ_x or X in tensor shorthand.
pub fn sigma_x() -> BitMatrix {
    BitMatrix::from_fn(2, 2, |i, j| i != j)
}

/// ν×ν cyclic shift S with S^ν = I; column j maps to row j+1 (mod ν).
pub fn cyclic_shift(nu: usize) -> BitMatrix {
    BitMatrix::from_fn(nu, nu, |i, j| i == (j + 1) % nu)
}

/// S^k for the ν-cycle, with k taken mod ν (negative powers allowed).
pub fn shift_power(nu: usize, k: i64) -> BitMatrix {
    let k = k.rem_euclid(nu as i64) as usize;
    BitMatrix::from_fn(nu, nu, |i, j| i == (j + k) % nu)
}

/// Sum a list of 0/1 matrices, requiring disjoint supports.
fn class_sum(what: &str, terms: &[BitMatrix]) -> Result<BitMatrix, SchemeError> {
    let (r, c) = terms[0].shape();
    let mut acc = BitMatrix::zeros(r, c);
    let mut expected = 0;
    for t in terms {
        expected += t.count_ones();
        acc = acc.add(t).expect("class-sum terms share a shape");
    }
    if acc.count_ones() != expected {
        return Err(SchemeError::OverlappingTerms(what.to_string()));
    }
    Ok(acc)
}

/// Square block matrix with `nblocks`×`nblocks` blocks of side `size`.
fn block_matrix(nblocks: usize, size: usize, blocks: &[(usize, usize, &BitMatrix)]) -> BitMatrix {
    let mut m = BitMatrix::zeros(nblocks * size, nblocks * size);
    for &(br, bc, b) in blocks {
        for i in 0..size {
            for j in 0..size {
                if b.get(i, j) {
                    m.set(br * size + i, bc * size + j, true);
                }
            }
        }
    }
    m
}

fn mul(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    a.mul(b).expect("square matrices of equal order")
}

/// A scheme: ν vertices and the ordered adjacency basis `A_0..A_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociationScheme {
    label: String,
    spec: String,
    adjacency: Vec<BitMatrix>,
}

impl AssociationScheme {
    /// Wrap a hand-built basis. No axioms are checked here.
    pub fn from_basis(label: impl Into<String>, adjacency: Vec<BitMatrix>) -> Self {
        let label = label.into();
        Self {
            spec: label.clone(),
            label,
            adjacency,
        }
    }

    /// Vertex count ν.
    pub fn order(&self) -> usize {
        self.adjacency.first().map_or(0, BitMatrix::rows)
    }

    /// Number of classes d (one less than the basis size).
    pub fn classes(&self) -> usize {
        self.adjacency.len().saturating_sub(1)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The spec string that rebuilds this scheme, e.g. `cyclic:12`.
    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn adjacency(&self) -> &[BitMatrix] {
        &self.adjacency
    }

    pub fn matrix(&self, i: usize) -> Option<&BitMatrix> {
        self.adjacency.get(i)
    }

    /// Row sums of row 0 of each basis matrix.
    pub fn valencies(&self) -> Vec<usize> {
        self.adjacency.iter().map(|a| a.row_weight(0)).collect()
    }

    /// Export in the stable JSON layout (rows as little-endian-bit hex).
    pub fn export(&self) -> SchemeExport {
        SchemeExport {
            label: self.label.clone(),
            spec: self.spec.clone(),
            nu: self.order(),
            classes: self.classes(),
            valencies: self.valencies(),
            adjacency: self.adjacency.iter().map(BitMatrix::to_hex_rows).collect(),
        }
    }

    /// Plain-text export carrying the same fields as [`SchemeExport`].
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scheme {} ({})\n", self.label, self.spec));
        out.push_str(&format!("nu {}\n", self.order()));
        out.push_str(&format!("classes {}\n", self.classes()));
        let vals: Vec<String> = self.valencies().iter().map(usize::to_string).collect();
        out.push_str(&format!("valencies {}\n", vals.join(" ")));
        for (i, a) in self.adjacency.iter().enumerate() {
            out.push_str(&format!("A_{i} {}\n", a.to_hex_rows().join(" ")));
        }
        out
    }
}

/// Serialized scheme dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeExport {
    pub label: String,
    pub spec: String,
    pub nu: usize,
    pub classes: usize,
    pub valencies: Vec<usize>,
    pub adjacency: Vec<Vec<String>>,
}

impl SchemeExport {
    /// Rebuild the matrices from the hex rows.
    pub fn to_scheme(&self) -> Result<AssociationScheme, crate::gf2::Gf2Error> {
        let adjacency = self
            .adjacency
            .iter()
            .map(|rows| BitMatrix::from_hex_rows(self.nu, rows))
            .collect::<Result<_, _>>()?;
        Ok(AssociationScheme {
            label: self.label.clone(),
            spec: self.spec.clone(),
            adjacency,
        })
    }
}

/// The symmetric scheme of the ν-cycle: `I`, `S^i + S^-i`, and `S^m` when ν = 2m.
pub fn cyclic_scheme(nu: usize) -> Result<AssociationScheme, SchemeError> {
    if nu < 2 {
        return Err(SchemeError::InvalidParameter {
            family: "cyclic",
            reason: format!("need at least 2 vertices, got {nu}"),
        });
    }
    let m = nu / 2;
    let mut adjacency = vec![BitMatrix::identity(nu)];
    let last_pair = if nu.is_multiple_of(2) { m - 1 } else { m };
    for i in 1..=last_pair {
        let a = shift_power(nu, i as i64)
            .add(&shift_power(nu, -(i as i64)))
            .expect("same shape");
        adjacency.push(a);
    }
    if nu.is_multiple_of(2) {
        adjacency.push(shift_power(nu, m as i64));
    }
    Ok(AssociationScheme {
        label: format!("C_{nu}"),
        spec: format!("cyclic:{nu}"),
        adjacency,
    })
}

/// Direct product: Kronecker products of basis matrices over all index
/// tuples, in lexicographic order (first factor most significant).
pub fn product_scheme(factors: &[AssociationScheme]) -> Result<AssociationScheme, SchemeError> {
    let (first, rest) = factors.split_first().ok_or(SchemeError::EmptyProduct)?;
    let mut adjacency = first.adjacency.clone();
    for f in rest {
        adjacency = adjacency
            .iter()
            .flat_map(|a| f.adjacency.iter().map(move |b| a.kron(b)))
            .collect();
    }
    let label = factors
        .iter()
        .map(|f| f.label.as_str())
        .collect::<Vec<_>>()
        .join("×");
    let spec = format!(
        "product:{}",
        factors.iter().map(|f| f.spec.as_str()).collect::<Vec<_>>().join(",")
    );
    Ok(AssociationScheme {
        label,
        spec,
        adjacency,
    })
}

/// Generator matrices `[a]`, `[b]` of U_6n on the basis `{a^j, ba^j, b²a^j}`.
pub fn u6n_generators(n: usize) -> (BitMatrix, BitMatrix) {
    let s = cyclic_shift(2 * n);
    let id = BitMatrix::identity(2 * n);
    let a = block_matrix(3, 2 * n, &[(0, 0, &s), (1, 2, &s), (2, 1, &s)]);
    let b = block_matrix(3, 2 * n, &[(0, 1, &id), (1, 2, &id), (2, 0, &id)]);
    (a, b)
}

/// Group scheme of U_6n = ⟨a, b | a^2n = b³ = 1, a⁻¹ba = b⁻¹⟩ (3n classes).
pub fn u6n_scheme(n: usize) -> Result<AssociationScheme, SchemeError> {
    if n < 1 {
        return Err(SchemeError::InvalidParameter {
            family: "u6n",
            reason: "n must be at least 1".into(),
        });
    }
    let (a, b) = u6n_generators(n);
    let b2 = mul(&b, &b);
    let mut adjacency = Vec::with_capacity(3 * n);
    for r in 0..n {
        adjacency.push(a.pow(2 * r).expect("square"));
    }
    for r in 0..n {
        let a2r = a.pow(2 * r).expect("square");
        adjacency.push(class_sum(
            &format!("U_{} A_{}", 6 * n, n + r),
            &[mul(&b, &a2r), mul(&b2, &a2r)],
        )?);
    }
    for r in 0..n {
        let a_odd = a.pow(2 * r + 1).expect("square");
        adjacency.push(class_sum(
            &format!("U_{} A_{}", 6 * n, 2 * n + r),
            &[a_odd.clone(), mul(&b, &a_odd), mul(&b2, &a_odd)],
        )?);
    }
    Ok(AssociationScheme {
        label: format!("U_{}", 6 * n),
        spec: format!("u6n:{n}"),
        adjacency,
    })
}

/// Generator matrices `[a]` (two 2n-blocks) and `[b]` (four n-blocks) of T_4n.
pub fn t4n_generators(n: usize) -> (BitMatrix, BitMatrix) {
    let s = cyclic_shift(2 * n);
    let s_inv = shift_power(2 * n, -1);
    let id = BitMatrix::identity(n);
    let a = block_matrix(2, 2 * n, &[(0, 0, &s), (1, 1, &s_inv)]);
    let b = block_matrix(4, n, &[(0, 2, &id), (1, 3, &id), (2, 1, &id), (3, 0, &id)]);
    (a, b)
}

fn t4n_basis(n: usize, classes: bool) -> Result<Vec<BitMatrix>, SchemeError> {
    if n < 2 {
        return Err(SchemeError::InvalidParameter {
            family: "t4n",
            reason: "n must be at least 2".into(),
        });
    }
    let (a, b) = t4n_generators(n);
    let ap = |k: usize| a.pow(k).expect("square");
    let b2 = mul(&b, &b);
    let b3 = mul(&b2, &b);
    let mut adjacency = vec![BitMatrix::identity(4 * n), ap(n)];
    for j in 1..n {
        adjacency.push(class_sum(
            &format!("T_{} A_{}", 4 * n, j + 1),
            &[ap(j), mul(&b2, &ap(n - j))],
        )?);
    }
    for parity in 0..2 {
        let terms: Vec<BitMatrix> = if classes {
            (0..n).map(|j| mul(&b, &ap(2 * j + parity))).collect()
        } else {
            (0..n)
                .filter(|j| 2 * j + parity < n)
                .flat_map(|j| [mul(&b, &ap(2 * j + parity)), mul(&b3, &ap(2 * j + parity))])
                .collect()
        };
        adjacency.push(class_sum(&format!("T_{} A_{}", 4 * n, n + 1 + parity), &terms)?);
    }
    Ok(adjacency)
}

/// Scheme of T_4n = ⟨a, b | a^2n = 1, a^n = b², b⁻¹ab = a⁻¹⟩ (n+3 matrices).
///
/// The last two matrices are the class sums of `{ba^k : k even}` and
/// `{ba^k : k odd}`, n elements each.
pub fn t4n_scheme(n: usize) -> Result<AssociationScheme, SchemeError> {
    Ok(AssociationScheme {
        label: format!("T_{}", 4 * n),
        spec: format!("t4n:{n}"),
        adjacency: t4n_basis(n, true)?,
    })
}

/// T_4n with the last two matrices taken as
/// `Σ ([b][a]^2j + [b]³[a]^2j)` over `2j < n` and
/// `Σ ([b][a]^(2j+1) + [b]³[a]^(2j+1))` over `2j+1 < n`.
///
/// For even n this is [`t4n_scheme`]. For odd n the split has sizes n+1 and
/// n−1; it is an association scheme for n = 3 but not for n = 5, 7.
pub fn t4n_literal_scheme(n: usize) -> Result<AssociationScheme, SchemeError> {
    Ok(AssociationScheme {
        label: format!("T_{}", 4 * n),
        spec: format!("t4n-literal:{n}"),
        adjacency: t4n_basis(n, false)?,
    })
}

/// Generator matrices `[a]`, `[b]` of V_8n on the basis `{a^j, ba^j, b²a^j, b³a^j}`.
pub fn v8n_generators(n: usize) -> (BitMatrix, BitMatrix) {
    let s = cyclic_shift(2 * n);
    let s_inv = shift_power(2 * n, -1);
    let id = BitMatrix::identity(2 * n);
    let a = block_matrix(4, 2 * n, &[(0, 0, &s), (1, 3, &s_inv), (2, 2, &s), (3, 1, &s_inv)]);
    let b = block_matrix(4, 2 * n, &[(0, 1, &id), (1, 2, &id), (2, 3, &id), (3, 0, &id)]);
    (a, b)
}

/// Group scheme of V_8n for odd n (2n+3 classes).
pub fn v8n_scheme(n: usize) -> Result<AssociationScheme, SchemeError> {
    if n < 1 || n.is_multiple_of(2) {
        return Err(SchemeError::InvalidParameter {
            family: "v8n",
            reason: format!("n must be odd and at least 1, got {n}"),
        });
    }
    let (a, b) = v8n_generators(n);
    let ap = |k: usize| a.pow(k).expect("square");
    let b2 = mul(&b, &b);
    let b3 = mul(&b2, &b);
    let label = format!("V_{}", 8 * n);
    let mut adjacency = vec![BitMatrix::identity(8 * n), b2.clone()];
    for j in 0..n {
        adjacency.push(class_sum(
            &format!("{label} A_{}", 2 + j),
            &[ap(2 * j + 1), mul(&b2, &ap(2 * n - 2 * j - 1))],
        )?);
    }
    let half = (n - 1) / 2;
    for j in 1..=half {
        adjacency.push(class_sum(
            &format!("{label} A_{}", n + 1 + j),
            &[ap(2 * j), ap(2 * n - 2 * j)],
        )?);
    }
    for j in 1..=half {
        adjacency.push(class_sum(
            &format!("{label} A_{}", n + 1 + half + j),
            &[mul(&b2, &ap(2 * j)), mul(&b2, &ap(2 * n - 2 * j))],
        )?);
    }
    for parity in 0..2 {
        let terms: Vec<BitMatrix> = (0..n)
            .flat_map(|j| {
                let p = ap(2 * j + parity);
                [mul(&b, &p), mul(&b3, &p)]
            })
            .collect();
        adjacency.push(class_sum(&format!("{label} A_{}", 2 * n + 1 + parity), &terms)?);
    }
    Ok(AssociationScheme {
        label,
        spec: format!("v8n:{n}"),
        adjacency,
    })
}

/// Scheme of the dihedral family D_2n built from `I_2 ⊗ S^j` and `σ_x ⊗ S^j` blocks.
///
/// Even n = 2m gives m+3 matrices; odd n = 2m+1 gives m+2, with all
/// reflections merged into `σ_x ⊗ J_n`.
pub fn d2n_scheme(n: usize) -> Result<AssociationScheme, SchemeError> {
    if n < 2 {
        return Err(SchemeError::InvalidParameter {
            family: "d2n",
            reason: "n must be at least 2".into(),
        });
    }
    let id2 = BitMatrix::identity(2);
    let x = sigma_x();
    let sp = |k: i64| shift_power(n, k);
    let m = n / 2;
    let mut adjacency = vec![BitMatrix::identity(2 * n)];
    let last_pair = if n.is_multiple_of(2) { m - 1 } else { m };
    for j in 1..=last_pair {
        let pair = sp(j as i64).add(&sp(-(j as i64))).expect("same shape");
        adjacency.push(id2.kron(&pair));
    }
    if n.is_multiple_of(2) {
        adjacency.push(id2.kron(&sp(m as i64)));
        for parity in 0..2 {
            let terms: Vec<BitMatrix> = (0..m).map(|j| sp((2 * j + parity) as i64)).collect();
            let sum = class_sum(&format!("D_{} A_{}", 2 * n, m + 1 + parity), &terms)?;
            adjacency.push(x.kron(&sum));
        }
    } else {
        adjacency.push(x.kron(&BitMatrix::ones(n, n)));
    }
    Ok(AssociationScheme {
        label: format!("D_{}", 2 * n),
        spec: format!("d2n:{n}"),
        adjacency,
    })
}

/// One scheme family with its parameter; parses and prints as `family:param`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SchemeSpec {
    Cyclic(usize),
    Product(Vec<SchemeSpec>),
    U6n(usize),
    T4n(usize),
    T4nLiteral(usize),
    V8n(usize),
    D2n(usize),
}

impl SchemeSpec {
    pub fn build(&self) -> Result<AssociationScheme, SchemeError> {
        match self {
            SchemeSpec::Cyclic(nu) => cyclic_scheme(*nu),
            SchemeSpec::Product(parts) => {
                let schemes = parts
                    .iter()
                    .map(SchemeSpec::build)
                    .collect::<Result<Vec<_>, _>>()?;
                product_scheme(&schemes)
            }
            SchemeSpec::U6n(n) => u6n_scheme(*n),
            SchemeSpec::T4n(n) => t4n_scheme(*n),
            SchemeSpec::T4nLiteral(n) => t4n_literal_scheme(*n),
            SchemeSpec::V8n(n) => v8n_scheme(*n),
            SchemeSpec::D2n(n) => d2n_scheme(*n),
        }
    }

    /// Factor orders for a product of cyclic schemes, or the single order for
    /// a cyclic one. Used to interpret tensor shorthand like `I_2A_1`.
    pub fn cyclic_factors(&self) -> Option<Vec<usize>> {
        match self {
            SchemeSpec::Cyclic(nu) => Some(vec![*nu]),
            SchemeSpec::Product(parts) => parts
                .iter()
                .map(|p| match p {
                    SchemeSpec::Cyclic(nu) => Some(*nu),
                    _ => None,
                })
                .collect(),
            _ => None,
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::Cyclic(n) => write!(f, "cyclic:{n}"),
            SchemeSpec::Product(parts) => {
                let inner: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "product:{}", inner.join(","))
            }
            SchemeSpec::U6n(n) => write!(f, "u6n:{n}"),
            SchemeSpec::T4n(n) => write!(f, "t4n:{n}"),
            SchemeSpec::T4nLiteral(n) => write!(f, "t4n-literal:{n}"),
            SchemeSpec::V8n(n) => write!(f, "v8n:{n}"),
            SchemeSpec::D2n(n) => write!(f, "d2n:{n}"),
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SchemeError::Parse(s.to_string());
        let s = s.trim();
        let (family, rest) = s.split_once(':').ok_or_else(bad)?;
        if family == "product" {
            let parts = rest
                .split(',')
                .map(|p| match p.parse::<SchemeSpec>()? {
                    SchemeSpec::Product(_) => Err(bad()),
                    leaf => Ok(leaf),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if parts.is_empty() {
                return Err(bad());
            }
            return Ok(SchemeSpec::Product(parts));
        }
        let n: usize = rest.parse().map_err(|_| bad())?;
        match family {
            "cyclic" => Ok(SchemeSpec::Cyclic(n)),
            "u6n" => Ok(SchemeSpec::U6n(n)),
            "t4n" => Ok(SchemeSpec::T4n(n)),
            "t4n-literal" => Ok(SchemeSpec::T4nLiteral(n)),
            "v8n" => Ok(SchemeSpec::V8n(n)),
            "d2n" => Ok(SchemeSpec::D2n(n)),
            _ => Err(bad()),
        }
    }
}

/// p^l_ij for l, i, j in 0..=d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionTensor {
    size: usize,
    data: Vec<u32>,
}

impl IntersectionTensor {
    /// Number of basis matrices, d + 1.
    pub fn size(&self) -> usize {
        self.size
    }

    /// p^l_ij.
    pub fn get(&self, l: usize, i: usize, j: usize) -> u32 {
        self.data[(l * self.size + i) * self.size + j]
    }

    /// Σ_l p^l_ij A_l as an integer matrix.
    pub fn reconstruct(&self, s: &AssociationScheme, i: usize, j: usize) -> IntMatrix {
        let nu = s.order();
        let mut out = IntMatrix::zeros(nu, nu);
        for (l, a) in s.adjacency().iter().enumerate() {
            let c = self.get(l, i, j);
            if c != 0 {
                out.add_scaled(c, a);
            }
        }
        out
    }

    /// Total absolute difference between every reconstructed product and the
    /// direct integer product.
    pub fn residual(&self, s: &AssociationScheme) -> u64 {
        let basis = s.adjacency();
        let mut total = 0u64;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let direct = basis[i].mul_int(&basis[j]).expect("square");
                let rebuilt = self.reconstruct(s, i, j);
                for r in 0..direct.rows() {
                    for c in 0..direct.cols() {
                        total += direct.get(r, c).abs_diff(rebuilt.get(r, c)) as u64;
                    }
                }
            }
        }
        total
    }

    /// Sorted flat copy, for comparing schemes up to relabeling of classes.
    pub fn sorted_entries(&self) -> Vec<u32> {
        let mut v = self.data.clone();
        v.sort_unstable();
        v
    }
}

/// Which relation each cell belongs to, if the basis partitions J.
fn relation_index(s: &AssociationScheme) -> Result<Vec<usize>, (usize, usize)> {
    let nu = s.order();
    let mut rel = vec![usize::MAX; nu * nu];
    for (l, a) in s.adjacency().iter().enumerate() {
        for x in 0..nu {
            for y in 0..nu {
                if a.get(x, y) {
                    if rel[x * nu + y] != usize::MAX {
                        return Err((x, y));
                    }
                    rel[x * nu + y] = l;
                }
            }
        }
    }
    match rel.iter().position(|&l| l == usize::MAX) {
        Some(cell) => Err((cell / nu, cell % nu)),
        None => Ok(rel),
    }
}

/// Read p^l_ij off the integer products `A_i A_j`, checking that each product
/// is constant on every relation.
pub fn intersection_numbers(s: &AssociationScheme) -> Result<IntersectionTensor, SchemeError> {
    let rel = relation_index(s).map_err(|_| SchemeError::NotPartition)?;
    let nu = s.order();
    let size = s.adjacency().len();
    let mut data = vec![0u32; size * size * size];
    for (i, ai) in s.adjacency().iter().enumerate() {
        for (j, aj) in s.adjacency().iter().enumerate() {
            let prod = ai.mul_int(aj).expect("square");
            let mut seen = vec![false; size];
            for x in 0..nu {
                for y in 0..nu {
                    let l = rel[x * nu + y];
                    let idx = (l * size + i) * size + j;
                    let v = prod.get(x, y);
                    if !seen[l] {
                        seen[l] = true;
                        data[idx] = v;
                    } else if data[idx] != v {
                        return Err(SchemeError::NotClosed { i, j, row: x, col: y });
                    }
                }
            }
        }
    }
    Ok(IntersectionTensor { size, data })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// A_0 = I.
    Identity,
    /// Σ A_i = J with disjoint supports.
    Partition,
    /// Each A_i is nonzero with a constant row sum.
    ConstantValency,
    /// Each transpose A_iᵀ is again a basis matrix.
    TransposeClosure,
    /// Each A_i A_j expands with nonnegative integer coefficients.
    ProductClosure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub label: String,
    pub nu: usize,
    pub classes: usize,
    pub checks: Vec<AxiomCheck>,
    /// Recorded, not required: all A_i A_j = A_j A_i.
    pub commutative: bool,
    /// Recorded, not required: every A_i is symmetric.
    pub symmetric: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: Axiom) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

fn check(axiom: Axiom, witness: Option<String>) -> AxiomCheck {
    AxiomCheck {
        axiom,
        passed: witness.is_none(),
        witness,
    }
}

/// Check every scheme axiom on the matrices; failures carry a witness.
pub fn verify_scheme(s: &AssociationScheme) -> VerificationReport {
    let nu = s.order();
    let basis = s.adjacency();
    let mut checks = Vec::with_capacity(5);

    let identity = match basis.first() {
        None => Some("empty basis".to_string()),
        Some(a0) if *a0 != BitMatrix::identity(nu) => Some("A_0 differs from I".to_string()),
        _ => None,
    };
    checks.push(check(Axiom::Identity, identity));

    let shape = basis
        .iter()
        .position(|a| a.shape() != (nu, nu))
        .map(|i| format!("A_{i} is not {nu}x{nu}"));
    if let Some(w) = shape {
        checks.push(check(Axiom::Partition, Some(w.clone())));
        checks.push(check(Axiom::ConstantValency, Some(w.clone())));
        checks.push(check(Axiom::TransposeClosure, Some(w.clone())));
        checks.push(check(Axiom::ProductClosure, Some(w)));
        return VerificationReport {
            label: s.label().to_string(),
            nu,
            classes: s.classes(),
            checks,
            commutative: false,
            symmetric: false,
        };
    }

    let partition = relation_index(s);
    checks.push(check(
        Axiom::Partition,
        partition.as_ref().err().map(|(x, y)| {
            let count = basis.iter().filter(|a| a.get(*x, *y)).count();
            format!("cell ({x}, {y}) is covered {count} times")
        }),
    ));

    let valency = basis.iter().enumerate().find_map(|(i, a)| {
        let k = a.row_weight(0);
        if k == 0 {
            return Some(format!("A_{i} is zero"));
        }
        (1..nu)
            .find(|&r| a.row_weight(r) != k)
            .map(|r| format!("A_{i} row {r} sums to {} not {k}", a.row_weight(r)))
    });
    checks.push(check(Axiom::ConstantValency, valency));

    let transposes = basis.iter().enumerate().find_map(|(i, a)| {
        let t = a.transpose();
        (!basis.contains(&t)).then(|| format!("transpose of A_{i} is not in the basis"))
    });
    checks.push(check(Axiom::TransposeClosure, transposes));

    let closure = if partition.is_err() {
        Some("not evaluated: basis does not partition J".to_string())
    } else {
        match intersection_numbers(s) {
            Ok(_) => None,
            Err(SchemeError::NotClosed { i, j, row, col }) => Some(format!(
                "A_{i} A_{j} is not constant on the relation of cell ({row}, {col})"
            )),
            Err(e) => Some(e.to_string()),
        }
    };
    checks.push(check(Axiom::ProductClosure, closure));

    let commutative = basis.iter().enumerate().all(|(i, a)| {
        basis[i + 1..]
            .iter()
            .all(|b| a.mul_int(b).ok() == b.mul_int(a).ok())
    });
    let symmetric = basis.iter().all(BitMatrix::is_symmetric);

    VerificationReport {
        label: s.label().to_string(),
        nu,
        classes: s.classes(),
        checks,
        commutative,
        symmetric,
    }
}

/// Partitions of `e` into positive parts, each written in nonincreasing order,
/// listed in reverse lexicographic order (`[e]` first, `[1, ..., 1]` last).
pub fn partitions(e: u32) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            rec(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(e, e, &mut Vec::new(), &mut out);
    out
}

/// Prime factorization as (prime, exponent) pairs in increasing prime order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Every Abelian group of order `n` up to isomorphism, each as its list of
/// prime-power cyclic factor orders.
///
/// Primes vary slowest in increasing order; within a prime, exponent
/// partitions follow [`partitions`]. For n = 1 the single entry is the empty
/// list (the trivial group).
pub fn abelian_groups_of_order(n: u64) -> Result<Vec<Vec<u64>>, SchemeError> {
    if n == 0 {
        return Err(SchemeError::ZeroOrder);
    }
    let mut groups: Vec<Vec<u64>> = vec![Vec::new()];
    for (p, e) in factorize(n) {
        let choices: Vec<Vec<u64>> = partitions(e)
            .into_iter()
            .map(|parts| parts.into_iter().map(|k| p.pow(k)).collect())
            .collect();
        groups = groups
            .iter()
            .flat_map(|g| {
                choices.iter().map(move |c| {
                    let mut g = g.clone();
                    g.extend(c);
                    g
                })
            })
            .collect();
    }
    Ok(groups)
}

/// The product scheme of the cyclic factors of one Abelian group.
pub fn abelian_scheme(factors: &[u64]) -> Result<AssociationScheme, SchemeError> {
    let parts = factors
        .iter()
        .map(|&k| cyclic_scheme(k as usize))
        .collect::<Result<Vec<_>, _>>()?;
    product_scheme(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_pass(s: &AssociationScheme) {
        let r = verify_scheme(s);
        assert!(r.passed(), "{}: {:?}", s.label(), r.checks);
    }

    #[test]
    fn c5_matches_worked_example() {
        let s = cyclic_scheme(5).unwrap();
        assert_eq!(s.adjacency().len(), 3);
        let shift = BitMatrix::parse_rows(&["00001", "10000", "01000", "00100", "00010"]).unwrap();
        assert_eq!(cyclic_shift(5), shift);
        let a1 = BitMatrix::parse_rows(&["01001", "10100", "01010", "00101", "10010"]).unwrap();
        let a2 = BitMatrix::parse_rows(&["00110", "00011", "10001", "11000", "01100"]).unwrap();
        assert_eq!(s.adjacency()[1], a1);
        assert_eq!(s.adjacency()[2], a2);
        let sum = a1.add(&a2).unwrap();
        assert_eq!(sum, BitMatrix::ones(5, 5).add(&BitMatrix::identity(5)).unwrap());
    }

    #[test]
    fn c6_has_half_turn() {
        let s = cyclic_scheme(6).unwrap();
        assert_eq!(s.adjacency().len(), 4);
        assert_eq!(s.adjacency()[3], shift_power(6, 3));
        assert_eq!(s.valencies(), vec![1, 2, 2, 1]);
    }

    #[test]
    fn c2_is_identity_and_swap() {
        let s = cyclic_scheme(2).unwrap();
        assert_eq!(s.adjacency(), &[BitMatrix::identity(2), sigma_x()]);
        assert!(cyclic_scheme(1).is_err());
        assert!(cyclic_scheme(0).is_err());
    }

    #[test]
    fn c5_square_of_a1() {
        // Brute force: A_1² counted entry by entry, then matched to 2A_0 + A_2.
        let s = cyclic_scheme(5).unwrap();
        let a1 = &s.adjacency()[1];
        for x in 0..5 {
            for y in 0..5 {
                let walks = (0..5).filter(|&z| a1.get(x, z) && a1.get(z, y)).count() as u32;
                let expect = if x == y { 2 } else if s.adjacency()[2].get(x, y) { 1 } else { 0 };
                assert_eq!(walks, expect);
            }
        }
        let p = intersection_numbers(&s).unwrap();
        assert_eq!((p.get(0, 1, 1), p.get(1, 1, 1), p.get(2, 1, 1)), (2, 0, 1));
    }

    #[test]
    fn products_of_small_cyclics() {
        let c2 = cyclic_scheme(2).unwrap();
        let p = product_scheme(&[c2.clone(), c2.clone()]).unwrap();
        let x = sigma_x();
        let id = BitMatrix::identity(2);
        assert_eq!(
            p.adjacency(),
            &[id.kron(&id), id.kron(&x), x.kron(&id), x.kron(&x)]
        );
        assert_eq!(p.label(), "C_2×C_2");

        let c3 = cyclic_scheme(3).unwrap();
        let p33 = product_scheme(&[c3.clone(), c3.clone()]).unwrap();
        assert_eq!(p33.order(), 9);
        assert_eq!(p33.adjacency()[1], BitMatrix::identity(3).kron(&c3.adjacency()[1]));

        let p28 = product_scheme(&[c2, cyclic_scheme(8).unwrap()]).unwrap();
        assert_eq!(p28.adjacency()[1].row_weight(0), 2);
        assert!(product_scheme(&[]).is_err());

        let k = c3.adjacency()[1].kron(&c3.adjacency()[1]);
        assert!((0..9).all(|r| k.row_weight(r) == 4));
    }

    #[test]
    fn u6n_valencies() {
        let s = u6n_scheme(1).unwrap();
        assert_eq!(s.valencies(), vec![1, 2, 3]);
        let s = u6n_scheme(2).unwrap();
        assert_eq!(s.adjacency().len(), 6);
        assert_eq!(s.valencies()[2], 2);
        assert_eq!(s.valencies()[4], 3);
        all_pass(&s);
        assert!(u6n_scheme(0).is_err());
    }

    #[test]
    fn u6n_one_matches_s3_classes() {
        // Brute-force S_3: conjugacy classes of permutations of 3 points.
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0],
        ];
        let compose = |p: &[usize; 3], q: &[usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
        let inverse = |p: &[usize; 3]| {
            let mut r = [0; 3];
            for i in 0..3 {
                r[p[i]] = i;
            }
            r
        };
        let mut sizes: Vec<usize> = Vec::new();
        let mut seen = [false; 6];
        for i in 0..6 {
            if seen[i] {
                continue;
            }
            let mut class = std::collections::BTreeSet::new();
            for g in &perms {
                class.insert(compose(&compose(g, &perms[i]), &inverse(g)));
            }
            for c in &class {
                seen[perms.iter().position(|p| p == c).unwrap()] = true;
            }
            sizes.push(class.len());
        }
        sizes.sort();
        let mut vals = u6n_scheme(1).unwrap().valencies();
        vals.sort();
        assert_eq!(sizes, vals);
    }

    #[test]
    fn t4n_classes() {
        let s = t4n_scheme(3).unwrap();
        assert_eq!(s.adjacency().len(), 6);
        assert!(s.adjacency()[1].is_permutation());
        assert_eq!(s.valencies()[4..], [3, 3]);
        all_pass(&s);
        let lit = t4n_literal_scheme(3).unwrap();
        assert_eq!(lit.valencies()[4..], [4, 2]);
        all_pass(&lit);
        let s = t4n_scheme(4).unwrap();
        assert_eq!(s.adjacency().len(), 7);
        assert_eq!(s.valencies().iter().sum::<usize>(), 16);
        assert_eq!(s, AssociationScheme { spec: "t4n:4".into(), ..t4n_literal_scheme(4).unwrap() });
        for n in [5, 7] {
            assert!(!verify_scheme(&t4n_literal_scheme(n).unwrap()).passed());
            all_pass(&t4n_scheme(n).unwrap());
        }
        assert!(t4n_scheme(1).is_err());
    }

    #[test]
    fn t4n_generators_satisfy_relations() {
        for n in 2..6 {
            let (a, b) = t4n_generators(n);
            let id = BitMatrix::identity(4 * n);
            assert_eq!(a.pow(2 * n).unwrap(), id);
            assert_eq!(a.pow(n).unwrap(), b.pow(2).unwrap());
            // b⁻¹ a b = a⁻¹  <=>  a b = b a⁻¹
            let lhs = a.mul(&b).unwrap();
            let rhs = b.mul(&a.pow(2 * n - 1).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn v8n_classes() {
        let s = v8n_scheme(3).unwrap();
        assert_eq!(s.adjacency().len(), 9);
        assert_eq!(s.valencies()[7], 6);
        assert!(s.adjacency()[1].is_permutation());
        all_pass(&s);
        let s1 = v8n_scheme(1).unwrap();
        assert_eq!(s1.adjacency().len(), 5);
        assert_eq!(s1.valencies().iter().sum::<usize>(), 8);
        assert!(v8n_scheme(2).is_err());
        assert!(v8n_scheme(0).is_err());
    }

    #[test]
    fn d2n_classes() {
        let s = d2n_scheme(6).unwrap();
        assert_eq!(s.adjacency().len(), 6);
        assert_eq!(s.valencies()[4], 3);
        let s5 = d2n_scheme(5).unwrap();
        assert_eq!(s5.valencies()[3], 5);
        let s4 = d2n_scheme(4).unwrap();
        let am = &s4.adjacency()[2];
        assert!(am.is_permutation());
        assert_eq!(am.mul(am).unwrap(), BitMatrix::identity(8));
        assert!(d2n_scheme(1).is_err());
    }

    #[test]
    fn missing_matrix_breaks_partition() {
        let s = cyclic_scheme(7).unwrap();
        let broken = AssociationScheme::from_basis("broken", s.adjacency()[..3].to_vec());
        let r = verify_scheme(&broken);
        let part = r.check(Axiom::Partition).unwrap();
        assert!(!part.passed);
        assert!(part.witness.as_ref().unwrap().contains("covered 0 times"));
        assert!(!r.passed());
    }

    #[test]
    fn symmetric_scheme_diagonal_intersections() {
        let s = cyclic_scheme(9).unwrap();
        let p = intersection_numbers(&s).unwrap();
        let vals = s.valencies();
        for i in 0..vals.len() {
            for j in 0..vals.len() {
                let expect = if i == j { vals[i] as u32 } else { 0 };
                assert_eq!(p.get(0, i, j), expect);
                let total: usize = (0..vals.len()).map(|l| p.get(l, i, j) as usize * vals[l]).sum();
                assert_eq!(total, vals[i] * vals[j]);
            }
        }
        assert_eq!(p.residual(&s), 0);
    }

    #[test]
    fn spec_strings_round_trip() {
        for text in ["cyclic:12", "product:cyclic:2,cyclic:4", "u6n:2", "t4n:3", "t4n-literal:3", "v8n:3", "d2n:6"] {
            let spec: SchemeSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
            assert_eq!(spec.build().unwrap().spec(), text);
        }
        for bad in ["cyclic", "cyclic:x", "foo:3", "product:", "product:product:cyclic:2"] {
            assert!(bad.parse::<SchemeSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn export_round_trip() {
        let s = u6n_scheme(2).unwrap();
        let e = s.export();
        assert_eq!(e.valencies, s.valencies());
        let json = serde_json::to_string(&e).unwrap();
        let back: SchemeExport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_scheme().unwrap(), s);
        assert!(s.export_text().starts_with("scheme U_12 (u6n:2)\nnu 12\nclasses 5\n"));
    }

    #[test]
    fn abelian_groups_of_32() {
        let groups = abelian_groups_of_order(32).unwrap();
        let expect: Vec<Vec<u64>> = vec![
            vec![32],
            vec![16, 2],
            vec![8, 4],
            vec![8, 2, 2],
            vec![4, 4, 2],
            vec![4, 2, 2, 2],
            vec![2, 2, 2, 2, 2],
        ];
        assert_eq!(groups, expect);
        assert_eq!(abelian_groups_of_order(5).unwrap(), vec![vec![5]]);
        assert_eq!(partitions(5).len(), 7);
        assert_eq!(abelian_groups_of_order(1).unwrap(), vec![Vec::<u64>::new()]);
        assert!(abelian_groups_of_order(0).is_err());
    }
}
