//! Search over subset pairs, table reproduction and the code catalog.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distance::{
    distance_bounded_with, distance_exact_with, hamming_bound_ok, kl_bound_ok, CertificateJson,
    CertificateKind, DistanceCertificate, DistanceError, DistanceOptions, DEFAULT_EXACT_CEILING,
};
use crate::expr::{evaluate, ExprError};
use crate::gf2::BitMatrix;
use crate::schemes::{AssociationScheme, SchemeError, SchemeSpec};
use crate::stabilizer::{
    build_check_matrix, select_generators, select_generators_subset, CheckMatrix, RowChoice,
    Selection, Source, StabilizerCode, StabilizerError,
};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("unknown table {0}; expected 4, 5 or 10")]
    UnknownTable(u8),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error("catalog {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("catalog {0}: unsupported header")]
    Header(PathBuf),
    #[error("record does not rebuild to its stored generators")]
    Provenance,
    #[error("Hamming bound violated by [[{n},{k},{d}]]")]
    HammingViolation { n: usize, k: usize, d: usize },
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Build `(B1 | B2)` from either index lists or shorthand expressions.
pub fn build_from_selections(
    spec: &SchemeSpec,
    scheme: &AssociationScheme,
    b1: &Selection,
    b2: &Selection,
) -> Result<CheckMatrix, SearchError> {
    if let (Selection::Indices(s1), Selection::Indices(s2)) = (b1, b2) {
        return Ok(build_check_matrix(scheme, s1, s2)?);
    }
    let part = |sel: &Selection| -> Result<BitMatrix, SearchError> {
        Ok(match sel {
            Selection::Expression(e) => evaluate(spec, scheme, e)?,
            Selection::Indices(ix) => build_check_matrix(scheme, ix, &[0])?.x_part(),
        })
    };
    Ok(CheckMatrix::from_parts(&part(b1)?, &part(b2)?)?.with_source(Source {
        scheme: spec.to_string(),
        label: scheme.label().to_string(),
        b1: b1.clone(),
        b2: b2.clone(),
    }))
}

/// One discovered code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRecord {
    pub scheme: String,
    pub label: String,
    pub b1: Selection,
    pub b2: Selection,
    pub rows: RowChoice,
    pub n: usize,
    pub k: usize,
    pub certificate: CertificateJson,
    pub hamming_ok: bool,
    pub kl_ok: bool,
    pub discovered_at: u64,
    /// Reduced row-echelon generator rows, hex-packed.
    pub canonical: Vec<String>,
}

impl CodeRecord {
    pub fn from_code(code: &StabilizerCode, cert: &DistanceCertificate, discovered_at: u64) -> Self {
        let source = code.provenance().source.clone();
        let (scheme, label, b1, b2) = match source {
            Some(s) => (s.scheme, s.label, s.b1, s.b2),
            None => (String::new(), String::new(), Selection::Indices(vec![]), Selection::Indices(vec![])),
        };
        let (n, k, d) = (code.n(), code.k(), cert.d);
        Self {
            scheme,
            label,
            b1,
            b2,
            rows: code.provenance().rows.clone(),
            n,
            k,
            certificate: CertificateJson {
                elapsed_ms: None,
                ..cert.to_json()
            },
            hamming_ok: hamming_bound_ok(n, k, d),
            kl_ok: kl_bound_ok(n, k, d),
            discovered_at,
            canonical: code.canonical_rows(),
        }
    }

    pub fn d(&self) -> usize {
        self.certificate.d
    }

    pub fn is_exact(&self) -> bool {
        self.certificate.kind == CertificateKind::Exact
    }

    /// Recompute the bound flags from n, k, d.
    pub fn refresh_bounds(&mut self) {
        self.hamming_ok = hamming_bound_ok(self.n, self.k, self.d());
        self.kl_ok = kl_bound_ok(self.n, self.k, self.d());
    }

    /// Rebuild the code from scheme, selections and rows alone, and check
    /// it matches the stored canonical generators.
    pub fn rebuild(&self) -> Result<StabilizerCode, SearchError> {
        let spec: SchemeSpec = self.scheme.parse()?;
        let scheme = spec.build()?;
        let c = build_from_selections(&spec, &scheme, &self.b1, &self.b2)?;
        let code = match &self.rows {
            RowChoice::DropLast(r) => select_generators(&c, *r)?,
            RowChoice::Keep(rows) => select_generators_subset(&c, rows)?,
        };
        if code.canonical_rows() != self.canonical || code.n() != self.n || code.k() != self.k {
            return Err(SearchError::Provenance);
        }
        Ok(code)
    }

    fn sort_key(&self) -> (usize, std::cmp::Reverse<usize>, usize, u64, u64) {
        let mask = |s: &Selection| match s {
            Selection::Indices(ix) => ix.iter().fold(0u64, |m, &i| m | 1 << i.min(63)),
            Selection::Expression(_) => u64::MAX,
        };
        (self.n, std::cmp::Reverse(self.k), self.d(), mask(&self.b1), mask(&self.b2))
    }
}

/// Sort records by (n, −k, d, masks).
pub fn sort_records(records: &mut [CodeRecord]) {
    records.sort_by_key(CodeRecord::sort_key);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest number of basis matrices in each of B1, B2.
    pub max_subset_size: Option<usize>,
    /// Trailing-row drop counts to try; `None` means every count.
    pub drops: Option<std::ops::RangeInclusive<usize>>,
    /// Weight budget when a code is above the exact ceiling.
    pub w_max: usize,
    /// Only emit codes with d at least this (lower bounds count).
    pub min_d: usize,
    pub time_budget: Duration,
    pub workers: Option<usize>,
    pub exact_ceiling: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_subset_size: None,
            drops: None,
            w_max: 7,
            min_d: 1,
            time_budget: Duration::from_secs(600),
            workers: None,
            exact_ceiling: DEFAULT_EXACT_CEILING,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Records in discovery order.
    pub records: Vec<CodeRecord>,
    /// True when the time budget ran out before every pair was examined.
    pub truncated: bool,
    pub pairs_examined: usize,
}

fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Distance for search: reject early if lighter than `min_d`, otherwise exact
/// below the ceiling and weight-bounded above it.
fn certify_for_search(code: &StabilizerCode, cfg: &SearchConfig) -> Result<Option<DistanceCertificate>, DistanceError> {
    let opts = DistanceOptions {
        workers: None,
        ceiling: cfg.exact_ceiling,
    };
    if cfg.min_d > 1 {
        let pre = distance_bounded_with(code, cfg.min_d - 1, &opts)?;
        if pre.is_exact() {
            return Ok(None);
        }
    }
    let cert = if code.n() + code.k() <= cfg.exact_ceiling {
        distance_exact_with(code, &opts)?
    } else {
        distance_bounded_with(code, cfg.w_max.max(cfg.min_d.saturating_sub(1)).max(1), &opts)?
    };
    Ok((cert.d >= cfg.min_d).then_some(cert))
}

/// Every (B1, B2) pair of nonempty index sets, in lexicographic mask order,
/// yielding commuting check matrices and their codes.
pub fn enumerate_codes(s: &AssociationScheme, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    let basis = s.adjacency().len();
    let size_ok = |m: u64| cfg.max_subset_size.is_none_or(|k| m.count_ones() as usize <= k);
    let masks: Vec<u64> = (1u64..1 << basis).filter(|&m| size_ok(m)).collect();
    let pairs: Vec<(u64, u64)> = masks
        .iter()
        .flat_map(|&a| masks.iter().map(move |&b| (a, b)))
        .collect();
    let deadline = Instant::now() + cfg.time_budget;
    let rows = s.order();
    let drops: Vec<usize> = match &cfg.drops {
        Some(r) => r.clone().filter(|&d| d < rows).collect(),
        None => (0..rows).collect(),
    };

    let work = |&(m1, m2): &(u64, u64)| -> Option<Result<Vec<(StabilizerCode, DistanceCertificate)>, SearchError>> {
        if Instant::now() > deadline {
            return None;
        }
        let run = || -> Result<Vec<(StabilizerCode, DistanceCertificate)>, SearchError> {
            let c = build_check_matrix(s, &mask_indices(m1), &mask_indices(m2))?;
            if !c.commutes() {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            let mut seen = HashSet::new();
            for &drop in &drops {
                let code = match select_generators(&c, drop) {
                    Ok(code) => code,
                    Err(StabilizerError::NoIndependentRows) => continue,
                    Err(e) => return Err(e.into()),
                };
                if code.k() == 0 || !kl_bound_ok(code.n(), code.k(), cfg.min_d) {
                    continue;
                }
                if !seen.insert(code.canonical_rows()) {
                    continue;
                }
                if let Some(cert) = certify_for_search(&code, cfg)? {
                    out.push((code, cert));
                }
            }
            Ok(out)
        };
        Some(run())
    };

    let pool = match cfg.workers {
        Some(w) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| SearchError::Pool(e.to_string()))?,
        ),
        None => None,
    };
    let results: Vec<_> = match &pool {
        Some(p) => p.install(|| pairs.par_iter().map(work).collect()),
        None => pairs.par_iter().map(work).collect(),
    };

    let mut truncated = false;
    let mut examined = 0;
    let mut seen: HashSet<(usize, usize, usize, Vec<String>)> = HashSet::new();
    let mut records = Vec::new();
    for r in results {
        let Some(found) = r else {
            truncated = true;
            continue;
        };
        examined += 1;
        for (code, cert) in found? {
            let key = (code.n(), code.k(), cert.d, code.canonical_rows());
            if !seen.insert(key) {
                continue;
            }
            if cert.is_exact() && (cert.d == 3 || cert.d == 5) && !hamming_bound_ok(code.n(), code.k(), cert.d) {
                return Err(SearchError::HammingViolation {
                    n: code.n(),
                    k: code.k(),
                    d: cert.d,
                });
            }
            records.push(CodeRecord::from_code(&code, &cert, records.len() as u64));
        }
    }
    Ok(SearchOutcome {
        records,
        truncated,
        pairs_examined: examined,
    })
}

/// One transcribed table row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub table: u8,
    pub label: String,
    pub scheme: String,
    pub b1: String,
    pub b2: String,
    pub n: usize,
    pub n_minus_k: usize,
    pub k: usize,
    pub d: usize,
    /// Footnote markers: `l` best known, `u` highest rate.
    pub marks: String,
}

type RowData = (&'static str, &'static str, &'static str, &'static str, usize, usize, usize, usize, &'static str);

const C21_B1: &str = "A_3+A_4+A_6+A_9+A_10";
const C21_B2: &str = "A_3+A_5+A_6+A_7+A_8";
const C40_B1: &str = "A_3+A_4+A_6+A_9+A_10+A_12+A_14+A_15+A_16+A_18+A_19";
const C40_B2: &str = "A_3+A_5+A_6+A_7+A_8+A_12+A_15+A_16+A_17+A_18+A_20";

const TABLE_4: &[RowData] = &[
    ("C_8", "cyclic:8", "A_3+A_4", "A_2+A_3", 8, 6, 2, 3, ""),
    ("C_2×C_4", "product:cyclic:2,cyclic:4", "I_2A_2+XA_1", "I_2A_1+XA_1+XA_2", 8, 6, 2, 3, ""),
    (
        "C_2×C_2×C_2",
        "product:cyclic:2,cyclic:2,cyclic:2",
        "I_2I_2X+XI_2I_2+XI_2X+XXX",
        "I_2I_2X+I_2XI_2+XXI_2+XXX",
        8, 5, 3, 3, "l",
    ),
    ("C_9", "cyclic:9", "A_1+A_2", "A_2+A_4", 9, 6, 3, 3, ""),
    ("C_3×C_3", "product:cyclic:3,cyclic:3", "I_3A_1+SS+S^2S^2", "I_3A_1+SS^2+S^2S", 9, 6, 3, 3, ""),
    ("C_10", "cyclic:10", "A_2+A_4+A_5", "A_0+A_2+A_3", 10, 6, 4, 3, ""),
    ("C_10", "cyclic:10", "A_4", "A_0+A_3+A_5", 10, 9, 1, 4, ""),
    ("C_11", "cyclic:11", "A_1+A_3+A_4+A_5", "A_2+A_5", 11, 7, 4, 3, ""),
    ("C_11", "cyclic:11", "A_1+A_4+A_5", "A_2+A_5", 11, 10, 1, 5, ""),
    ("C_12", "cyclic:12", "A_2+A_4+A_5+A_6", "A_2+A_3+A_5", 12, 6, 6, 3, "l"),
    ("C_12", "cyclic:12", "A_2+A_4+A_5+A_6", "A_2+A_3+A_5+A_6", 12, 7, 5, 3, ""),
    ("C_3×C_4", "product:cyclic:3,cyclic:4", "I_12+I_3A_1+A_1I_4", "A_1A_1+A_1I_4", 12, 10, 2, 3, ""),
    (
        "C_3×C_2×C_2",
        "product:cyclic:3,cyclic:2,cyclic:2",
        "A_1I_2I_2+A_1I_2X+A_1XX",
        "I_3XI_2+I_3XX+A_1I_2X",
        12, 8, 4, 3, "",
    ),
    ("C_13", "cyclic:13", "A_1+A_3+A_4+A_5", "A_2+A_3+A_5", 13, 8, 5, 3, ""),
    ("C_13", "cyclic:13", "A_1+A_3+A_4+A_5", "A_2+A_3+A_5", 13, 12, 1, 5, ""),
    ("C_14", "cyclic:14", "A_0+A_3+A_4+A_6+A_7", "A_2+A_3+A_5", 14, 8, 6, 3, ""),
    ("C_14", "cyclic:14", "A_0+A_3+A_4+A_6+A_7", "A_2+A_3+A_5", 14, 11, 3, 4, ""),
    ("C_15", "cyclic:15", "A_3+A_4+A_6+A_7", "A_1+A_2+A_3+A_5", 15, 9, 6, 3, ""),
    ("C_16", "cyclic:16", "A_3+A_4+A_6", "A_2+A_3+A_5", 16, 11, 5, 3, ""),
    ("C_16", "cyclic:16", "A_0+A_3+A_4+A_8", "A_0+A_1+A_2+A_5", 16, 8, 8, 3, ""),
    (
        "C_2×C_8",
        "product:cyclic:2,cyclic:8",
        "I_2A_2+XA_2+XA_4+I_2A_3+I_2A_4+XA_1",
        "I_2A_2+XA_3+I_2A_1+I_2A_3+I_2I_8",
        16, 7, 9, 3, "",
    ),
    (
        "C_2×C_2×C_4",
        "product:cyclic:2,cyclic:2,cyclic:4",
        "I_2I_2A_2+A_1I_2A_1+A_1A_1I_4+I_2A_1I_4+I_2A_1A_1+A_1A_1A_1",
        "I_2I_2A_2+A_1I_2A_2+I_2I_2A_1+I_2A_1A_2+I_2A_1I_4+I_2A_1A_1+A_1A_1A_1",
        16, 8, 8, 3, "",
    ),
    (
        "C_4×C_4",
        "product:cyclic:4,cyclic:4",
        "I_4A_1+A_1A_1+A_1A_2+A_2A_2",
        "I_4A_2+A_1I_4+A_1A_2+A_2I_4+A_2A_1",
        16, 12, 4, 3, "",
    ),
    (
        "C_2×C_2×C_2×C_2",
        "product:cyclic:2,cyclic:2,cyclic:2,cyclic:2",
        "XI_2I_2X+XI_2XX+XXXX+I_2XXX",
        "I_2I_2I_2X+I_2I_2XI_2+I_2I_2XX+I_2XI_2X+I_2XXI_2+XI_2I_2X+XXI_2I_2+XXXI_2",
        16, 9, 7, 3, "",
    ),
    ("C_17", "cyclic:17", "A_3+A_4+A_6+A_7+A_8", "A_2+A_3+A_5", 17, 10, 7, 3, ""),
    ("C_17", "cyclic:17", "A_3+A_4+A_6+A_7+A_8", "A_2+A_3+A_5", 17, 14, 3, 4, ""),
    ("C_18", "cyclic:18", "A_0+A_3+A_4+A_5+A_6", "A_3+A_5+A_6+A_7+A_8+A_9", 18, 10, 8, 3, ""),
    ("C_19", "cyclic:19", "A_3+A_4+A_6+A_9", "A_3+A_5+A_6+A_7", 19, 10, 9, 3, ""),
    ("C_20", "cyclic:20", C21_B1, C21_B2, 20, 8, 12, 3, ""),
    ("C_21", "cyclic:21", C21_B1, C21_B2, 21, 8, 13, 3, ""),
    ("C_21", "cyclic:21", C21_B1, C21_B2, 21, 11, 10, 4, ""),
    ("C_21", "cyclic:21", C21_B1, C21_B2, 21, 12, 9, 5, ""),
    ("C_21", "cyclic:21", C21_B1, C21_B2, 21, 16, 5, 7, "l"),
];

const TABLE_5: &[RowData] = &[
    ("C_25", "cyclic:25", C21_B1, C21_B2, 25, 8, 17, 3, ""),
    ("C_25", "cyclic:25", C21_B1, C21_B2, 25, 12, 13, 4, ""),
    ("C_30", "cyclic:30", "A_3+A_4+A_6+A_9+A_10+A_14", "A_3+A_5+A_6+A_7+A_8+A_13+A_15", 30, 8, 22, 3, ""),
    ("C_30", "cyclic:30", "A_3+A_4+A_6+A_9+A_10+A_14", "A_3+A_5+A_6+A_7+A_8+A_13+A_15", 30, 18, 12, 5, ""),
    ("C_40", "cyclic:40", C40_B1, C40_B2, 40, 10, 30, 3, "u"),
    ("C_40", "cyclic:40", C40_B1, C40_B2, 40, 14, 26, 5, "u"),
    ("C_40", "cyclic:40", C40_B1, C40_B2, 40, 19, 21, 7, "l,u"),
];

const TABLE_10: &[RowData] = &[
    ("U_12", "u6n:2", "A_1+A_2+A_4", "A_3", 12, 8, 4, 3, ""),
    ("U_12", "u6n:2", "A_1+A_2+A_5", "A_0+A_4", 12, 8, 4, 3, ""),
    ("U_12", "u6n:2", "A_2", "A_3+A_5", 12, 8, 4, 3, ""),
    ("U_12", "u6n:2", "A_1+A_2+A_5", "A_0+A_4", 12, 11, 1, 4, ""),
    ("U_18", "u6n:3", "A_1+A_2+A_3+A_7+A_8", "A_0+A_1+A_2+A_4+A_5", 18, 12, 6, 3, ""),
    ("U_18", "u6n:3", "A_1+A_2+A_3+A_7", "A_0+A_1+A_2+A_4", 18, 13, 5, 3, ""),
    ("U_18", "u6n:3", "A_1+A_2+A_3+A_7", "A_0+A_1+A_2+A_4", 18, 16, 2, 4, ""),
    ("U_24", "u6n:4", "A_0+A_1+A_2+A_3+A_4+A_8+A_10", "A_0+A_3+A_5+A_6+A_11", 24, 12, 12, 3, ""),
    ("U_24", "u6n:4", "A_0+A_1+A_2+A_3+A_4+A_8+A_10", "A_0+A_3+A_5+A_6+A_11", 24, 16, 8, 5, ""),
    ("T_12", "t4n-literal:3", "A_2+A_4", "A_0+A_5", 12, 9, 3, 3, ""),
    ("T_12", "t4n-literal:3", "A_0+A_4", "A_1+A_2+A_5", 12, 10, 2, 3, ""),
    ("T_16", "t4n:4", "A_0+A_1+A_2+A_6", "A_0+A_2+A_3", 16, 14, 2, 3, ""),
    ("V_24", "v8n:3", "A_0+A_3+A_6+A_7", "A_0+A_2+A_4", 24, 20, 4, 3, ""),
    ("D_12", "d2n:6", "A_3+A_5", "A_2+A_3+A_5", 12, 10, 2, 3, ""),
];

/// The transcribed rows of table 4, 5 or 10.
pub fn table_rows(table: u8) -> Result<Vec<TableRow>, SearchError> {
    let data = match table {
        4 => TABLE_4,
        5 => TABLE_5,
        10 => TABLE_10,
        other => return Err(SearchError::UnknownTable(other)),
    };
    Ok(data
        .iter()
        .map(|&(label, scheme, b1, b2, n, n_minus_k, k, d, marks)| TableRow {
            table,
            label: label.into(),
            scheme: scheme.into(),
            b1: b1.into(),
            b2: b2.into(),
            n,
            n_minus_k,
            k,
            d,
            marks: marks.into(),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Reproduced,
    ParametersMetByAlternateRows,
    BoundOnly,
    Discrepant,
}

impl std::fmt::Display for RowStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RowStatus::Reproduced => "reproduced",
            RowStatus::ParametersMetByAlternateRows => "parameters-met-by-alternate-rows",
            RowStatus::BoundOnly => "bound-only",
            RowStatus::Discrepant => "discrepant",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowReport {
    pub row: TableRow,
    pub status: RowStatus,
    /// Every trailing drop count whose code has the stated n − k.
    pub matching_drops: Vec<usize>,
    /// Rows of the code reported in `obtained`.
    pub rows: Option<RowChoice>,
    /// (n, k, d) of the code reported.
    pub obtained: Option<(usize, usize, usize)>,
    pub certificate: Option<CertificateJson>,
    /// True when a weight-d logical operator was exhibited.
    pub upper_verified: bool,
    pub evidence: String,
    pub record: Option<CodeRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub table: u8,
    pub rows: Vec<RowReport>,
}

impl ReproductionReport {
    pub fn count(&self, status: RowStatus) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    /// Column layout of the source tables plus status and findings.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:<44} {:>3} {:>4}  {:<14} {:<32} {:<14} rows",
            "group", "B_i", "n", "n-k", "stated", "status", "obtained"
        );
        for r in &self.rows {
            let b = format!("B1={}, B2={}", r.row.b1, r.row.b2);
            let stated = format!(
                "{}[[{},{},{}]]",
                if r.row.marks.is_empty() { String::new() } else { format!("{} ", r.row.marks) },
                r.row.n,
                r.row.k,
                r.row.d
            );
            let obtained = match (&r.obtained, &r.certificate) {
                (Some((n, k, d)), Some(c)) => {
                    let ge = if c.kind == CertificateKind::LowerBound { "≥" } else { "" };
                    format!("[[{n},{k},{ge}{d}]]")
                }
                _ => "-".into(),
            };
            let rows = match &r.rows {
                Some(RowChoice::DropLast(d)) => format!("drop {d}"),
                Some(RowChoice::Keep(k)) => format!("keep {k:?}"),
                None => "-".into(),
            };
            let _ = writeln!(
                out,
                "{:<16} {:<44} {:>3} {:>4}  {:<14} {:<32} {:<14} {}",
                r.row.label, b, r.row.n, r.row.n_minus_k, stated, r.status.to_string(), obtained, rows
            );
            if !r.evidence.is_empty() {
                let _ = writeln!(out, "    {}", r.evidence);
            }
        }
        let _ = writeln!(
            out,
            "reproduced {}, alternate rows {}, bound-only {}, discrepant {} of {}",
            self.count(RowStatus::Reproduced),
            self.count(RowStatus::ParametersMetByAlternateRows),
            self.count(RowStatus::BoundOnly),
            self.count(RowStatus::Discrepant),
            self.rows.len()
        );
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReproduceOptions {
    pub workers: Option<usize>,
    pub exact_ceiling: usize,
    /// Random keep-sets tried when trailing drops miss the stated parameters.
    pub alternate_trials: usize,
    pub seed: u64,
    /// Largest number of syndrome-table lookups spent looking for a weight-d
    /// logical above the exact ceiling.
    pub probe_budget: u64,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            workers: None,
            exact_ceiling: DEFAULT_EXACT_CEILING,
            alternate_trials: 64,
            seed: 0x5eed,
            probe_budget: 400_000_000,
        }
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Lookups needed by a weight-w bounded search.
fn probe_cost(n: usize, w: usize) -> u64 {
    let free = w.saturating_sub(2);
    binomial(n, free).saturating_mul(3u64.saturating_pow(free as u32))
}

/// Distance evidence for a claimed d: exact below the ceiling; above it, all
/// weights below d, then weight d itself when affordable.
fn certify_claim(
    code: &StabilizerCode,
    claimed: usize,
    opts: &ReproduceOptions,
) -> Result<DistanceCertificate, DistanceError> {
    let dopts = DistanceOptions {
        workers: opts.workers,
        ceiling: opts.exact_ceiling,
    };
    if code.n() + code.k() <= opts.exact_ceiling {
        return distance_exact_with(code, &dopts);
    }
    let w = if probe_cost(code.n(), claimed) <= opts.probe_budget {
        claimed
    } else {
        claimed.saturating_sub(1)
    };
    distance_bounded_with(code, w.max(1), &dopts)
}

fn describe(code: &StabilizerCode, cert: &DistanceCertificate) -> String {
    let d = match cert.kind {
        CertificateKind::Exact => format!("{}", cert.d),
        CertificateKind::LowerBound => format!("≥{}", cert.d),
    };
    let witness = cert
        .witness
        .as_ref()
        .map(|w| format!(" (logical {})", w.to_pauli()))
        .unwrap_or_default();
    format!("[[{},{},{}]]{}", code.n(), code.k(), d, witness)
}

/// Random independent row sets of the stated size.
fn alternate_codes(
    c: &CheckMatrix,
    target: usize,
    trials: usize,
    seed: u64,
) -> Vec<StabilizerCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut order: Vec<usize> = (0..c.rows()).collect();
    for _ in 0..trials {
        order.shuffle(&mut rng);
        let shuffled = c.matrix().select_rows(&order);
        let indep = shuffled.independent_rows();
        if indep.len() < target {
            break;
        }
        let mut keep: Vec<usize> = indep[..target].iter().map(|&i| order[i]).collect();
        keep.sort_unstable();
        if !seen.insert(keep.clone()) {
            continue;
        }
        if let Ok(code) = select_generators_subset(c, &keep) {
            out.push(code);
        }
    }
    out
}

/// Rebuild one row, look for the stated n − k among trailing drops, certify d,
/// then fall back to random keep-sets.
pub fn reproduce_row(row: &TableRow, opts: &ReproduceOptions) -> Result<RowReport, SearchError> {
    let spec: SchemeSpec = row.scheme.parse()?;
    let scheme = spec.build()?;
    let c = build_from_selections(
        &spec,
        &scheme,
        &Selection::Expression(row.b1.clone()),
        &Selection::Expression(row.b2.clone()),
    )?;
    let mut report = RowReport {
        row: row.clone(),
        status: RowStatus::Discrepant,
        matching_drops: Vec::new(),
        rows: None,
        obtained: None,
        certificate: None,
        upper_verified: false,
        evidence: String::new(),
        record: None,
    };
    if let Some((i, j)) = c.anticommuting_pair() {
        report.evidence = format!("B1, B2 do not commute: rows {i} and {j} anticommute");
        return Ok(report);
    }
    let rank = c.matrix().rank();
    if row.n_minus_k > rank || row.n != c.n() {
        report.evidence = format!("check matrix has n = {} and rank {rank}; n − k = {} is unreachable", c.n(), row.n_minus_k);
        return Ok(report);
    }
    for drop in 0..c.rows() {
        if let Ok(code) = select_generators(&c, drop) {
            if code.n() - code.k() == row.n_minus_k {
                report.matching_drops.push(drop);
            }
        }
    }
    let mut notes = Vec::new();
    // All matching drops give the same rowspace, so the smallest one stands for them.
    if let Some(&drop) = report.matching_drops.first() {
        let code = select_generators(&c, drop)?;
        let cert = certify_claim(&code, row.d, opts)?;
        let met = cert.is_exact() && cert.d == row.d;
        let bound_only = !cert.is_exact() && cert.d == row.d;
        report.rows = Some(RowChoice::DropLast(drop));
        report.obtained = Some((code.n(), code.k(), cert.d));
        report.certificate = Some(cert.to_json());
        report.upper_verified = cert.is_exact();
        report.record = Some(CodeRecord::from_code(&code, &cert, 0));
        if met {
            report.status = RowStatus::Reproduced;
            return Ok(report);
        }
        if bound_only {
            report.status = RowStatus::BoundOnly;
            report.evidence = format!(
                "no logical operator below weight {}; weight {} not searched (over budget)",
                row.d, row.d
            );
            return Ok(report);
        }
        notes.push(format!("drop {drop} gives {}", describe(&code, &cert)));
    } else {
        let ranks: Vec<String> = (0..c.rows())
            .filter_map(|d| select_generators(&c, d).ok().map(|code| format!("{}", code.n() - code.k())))
            .collect();
        notes.push(format!("trailing drops give n − k ∈ {{{}}}", ranks.join(",")));
    }

    let dopts = DistanceOptions {
        workers: opts.workers,
        ceiling: opts.exact_ceiling,
    };
    let mut best: Option<(StabilizerCode, DistanceCertificate)> = None;
    let candidates = alternate_codes(&c, row.n_minus_k, opts.alternate_trials, opts.seed);
    let tried = candidates.len();
    for code in candidates {
        if row.d > 1 {
            let pre = distance_bounded_with(&code, row.d - 1, &dopts)?;
            if pre.is_exact() {
                if best.as_ref().is_none_or(|(_, b)| pre.d > b.d) {
                    best = Some((code, pre));
                }
                continue;
            }
        }
        let cert = certify_claim(&code, row.d, opts)?;
        if cert.d >= row.d && (cert.is_exact() || cert.d > row.d) {
            report.status = RowStatus::ParametersMetByAlternateRows;
            report.rows = Some(code.provenance().rows.clone());
            report.obtained = Some((code.n(), code.k(), cert.d));
            report.upper_verified = cert.is_exact();
            report.certificate = Some(cert.to_json());
            report.record = Some(CodeRecord::from_code(&code, &cert, 0));
            notes.push(format!("keep-set found after {tried} candidates"));
            report.evidence = notes.join("; ");
            return Ok(report);
        }
        if best.as_ref().is_none_or(|(_, b)| cert.d > b.d) {
            best = Some((code, cert));
        }
    }
    match best {
        Some((code, cert)) => notes.push(format!(
            "{tried} random keep-sets of {} rows, best {}",
            row.n_minus_k,
            describe(&code, &cert)
        )),
        None => notes.push(format!("{tried} random keep-sets of {} rows tried", row.n_minus_k)),
    }
    report.evidence = notes.join("; ");
    Ok(report)
}

/// Reproduce a whole table; `filter` keeps rows whose group label is listed
/// (comma-separated, e.g. `C_21` or `U_12,T_12`).
pub fn reproduce_table(
    table: u8,
    filter: Option<&str>,
    opts: &ReproduceOptions,
) -> Result<ReproductionReport, SearchError> {
    let wanted: Option<Vec<&str>> = filter.map(|f| f.split(',').map(str::trim).collect());
    let rows = table_rows(table)?
        .into_iter()
        .filter(|r| wanted.as_ref().is_none_or(|w| w.contains(&r.label.as_str())))
        .map(|r| reproduce_row(&r, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReproductionReport { table, rows })
}

/// First line of every catalog file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogHeader {
    pub schema: String,
    pub version: u32,
}

pub const CATALOG_SCHEMA: &str = "assoc-codes-catalog";
pub const CATALOG_VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SearchError + '_ {
    move |source| SearchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Appends records to one catalog file, writing the header first if needed.
pub struct CatalogWriter {
    path: PathBuf,
    file: File,
}

impl CatalogWriter {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, SearchError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let len = file.metadata().map_err(io_err(&path))?.len();
        if len == 0 {
            let header = CatalogHeader {
                schema: CATALOG_SCHEMA.into(),
                version: CATALOG_VERSION,
            };
            let line = serde_json::to_string(&header).expect("header serializes");
            writeln!(file, "{line}").map_err(io_err(&path))?;
        }
        Ok(Self { path, file })
    }

    pub fn append(&mut self, record: &CodeRecord) -> Result<(), SearchError> {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(self.file, "{line}").map_err(io_err(&self.path))?;
        self.file.flush().map_err(io_err(&self.path))
    }
}

pub fn catalog_append(path: impl AsRef<Path>, record: &CodeRecord) -> Result<(), SearchError> {
    CatalogWriter::open(path)?.append(record)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CatalogFilter {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub min_d: Option<usize>,
    pub max_d: Option<usize>,
    /// Matches the scheme label or spec string.
    pub scheme: Option<String>,
    pub kind: Option<CertificateKind>,
}

impl CatalogFilter {
    pub fn matches(&self, r: &CodeRecord) -> bool {
        self.n.is_none_or(|n| r.n == n)
            && self.k.is_none_or(|k| r.k == k)
            && self.min_d.is_none_or(|d| r.d() >= d)
            && self.max_d.is_none_or(|d| r.d() <= d)
            && self.scheme.as_ref().is_none_or(|s| &r.label == s || &r.scheme == s)
            && self.kind.is_none_or(|k| r.certificate.kind == k)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CatalogQuery {
    pub records: Vec<CodeRecord>,
    /// One message per skipped line.
    pub warnings: Vec<String>,
}

/// Read matching records, skipping malformed lines and duplicate codes.
pub fn catalog_query(path: impl AsRef<Path>, filter: &CatalogFilter) -> Result<CatalogQuery, SearchError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = CatalogQuery::default();
    let mut seen: HashMap<(usize, usize, usize, Vec<String>), ()> = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if i == 0 {
            match serde_json::from_str::<CatalogHeader>(&line) {
                Ok(h) if h.schema == CATALOG_SCHEMA && h.version == CATALOG_VERSION => continue,
                _ => return Err(SearchError::Header(path.to_path_buf())),
            }
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut record: CodeRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                let msg = format!("{}:{}: skipped: {e}", path.display(), i + 1);
                log::warn!("{msg}");
                out.warnings.push(msg);
                continue;
            }
        };
        record.refresh_bounds();
        let key = (record.n, record.k, record.d(), record.canonical.clone());
        if seen.insert(key, ()).is_some() || !filter.matches(&record) {
            continue;
        }
        out.records.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::cyclic_scheme;

    #[test]
    fn tables_have_expected_sizes() {
        assert_eq!(table_rows(4).unwrap().len(), 33);
        assert_eq!(table_rows(5).unwrap().len(), 7);
        assert_eq!(table_rows(10).unwrap().len(), 14);
        assert!(matches!(table_rows(3), Err(SearchError::UnknownTable(3))));
        for t in [4, 5, 10] {
            for r in table_rows(t).unwrap() {
                assert_eq!(r.n, r.n_minus_k + r.k, "{r:?}");
            }
        }
    }

    #[test]
    fn every_table_row_builds_a_square_check_matrix() {
        for t in [4, 5, 10] {
            for r in table_rows(t).unwrap() {
                let spec: SchemeSpec = r.scheme.parse().unwrap();
                let s = spec.build().unwrap();
                let c = build_from_selections(
                    &spec,
                    &s,
                    &Selection::Expression(r.b1.clone()),
                    &Selection::Expression(r.b2.clone()),
                )
                .unwrap_or_else(|e| panic!("{} {}: {e}", r.label, r.b1));
                assert_eq!((c.rows(), c.n()), (r.n, r.n), "{}", r.label);
            }
        }
    }

    #[test]
    fn five_qubit_code_is_found() {
        let s = cyclic_scheme(5).unwrap();
        let cfg = SearchConfig {
            min_d: 3,
            ..Default::default()
        };
        let out = enumerate_codes(&s, &cfg).unwrap();
        assert!(!out.truncated);
        assert_eq!(out.pairs_examined, 49);
        let hit = out.records.iter().find(|r| {
            r.b1 == Selection::Indices(vec![1]) && r.b2 == Selection::Indices(vec![2]) && (r.n, r.k, r.d()) == (5, 1, 3)
        });
        assert!(hit.is_some());
        for r in &out.records {
            assert!(r.kl_ok);
            assert_eq!(r.rebuild().unwrap().canonical_rows(), r.canonical);
        }
    }

    #[test]
    fn two_vertices_give_no_distance_three() {
        let s = cyclic_scheme(2).unwrap();
        let cfg = SearchConfig {
            min_d: 3,
            ..Default::default()
        };
        assert!(enumerate_codes(&s, &cfg).unwrap().records.is_empty());
    }

    #[test]
    fn zero_budget_truncates() {
        let s = cyclic_scheme(5).unwrap();
        let cfg = SearchConfig {
            time_budget: Duration::ZERO,
            ..Default::default()
        };
        let out = enumerate_codes(&s, &cfg).unwrap();
        assert!(out.truncated);
        assert!(out.records.is_empty());
    }

    #[test]
    fn first_row_of_table_4() {
        let row = &table_rows(4).unwrap()[0];
        let rep = reproduce_row(row, &ReproduceOptions::default()).unwrap();
        assert_eq!(rep.status, RowStatus::Reproduced);
        assert_eq!(rep.obtained, Some((8, 2, 3)));
        assert_eq!(rep.rows, Some(RowChoice::DropLast(2)));
    }

    #[test]
    fn probe_costs() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(probe_cost(40, 7), binomial(40, 5) * 243);
        assert_eq!(probe_cost(10, 2), 1);
    }
}
