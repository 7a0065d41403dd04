use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use assoc_codes::distance::{
    distance_bounded_with, distance_exact_with, distance_oracle, hamming_bound_ok, kl_bound_ok,
    CertificateKind, DistanceCertificate, DistanceOptions, DEFAULT_EXACT_CEILING, ORACLE_MAX_QUBITS,
};
use assoc_codes::schemes::{verify_scheme, SchemeError, SchemeSpec};
use assoc_codes::search::{
    build_from_selections, catalog_query, reproduce_table, sort_records, CatalogFilter,
    CatalogWriter, CodeRecord, ReproduceOptions, RowStatus, SearchConfig, SearchError,
};
use assoc_codes::stabilizer::{
    format_pauli_text, parse_pauli_text, select_generators, select_generators_subset, CheckMatrixJson,
    Provenance, Selection, StabilizerCode,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const CATALOG_ENV: &str = "ASSOC_CODES_CATALOG";

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ASSERTION: u8 = 3;

/// Quantum stabilizer codes from association schemes of finite groups.
#[derive(Parser, Debug)]
#[command(name = "assoc-codes", version)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for distance and search.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Include wall-clock timings in the output.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a scheme, optionally verifying axioms and dumping matrices.
    Scheme {
        /// e.g. cyclic:12, product:cyclic:2,cyclic:4, u6n:2, t4n:3, v8n:3, d2n:6
        spec: String,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        dump: bool,
    },
    /// Build a stabilizer code and print its generators.
    Code {
        #[command(flatten)]
        source: CodeSource,
        #[arg(long, value_enum, default_value_t = Format::Pauli)]
        format: Format,
    },
    /// Certify the minimum distance of a code.
    Distance {
        #[command(flatten)]
        source: CodeSource,
        /// auto, exact, oracle or bounded:W
        #[arg(long, default_value = "auto")]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_EXACT_CEILING)]
        ceiling: usize,
    },
    /// Enumerate subset pairs of a scheme and report the codes found.
    Search {
        spec: String,
        #[arg(long, default_value_t = 1)]
        min_d: usize,
        #[arg(long)]
        max_size: Option<usize>,
        /// Drop counts as A..B (inclusive).
        #[arg(long)]
        drops: Option<String>,
        #[arg(long, default_value_t = 7)]
        w_max: usize,
        /// Time budget in seconds.
        #[arg(long, default_value_t = 600)]
        budget: u64,
        #[arg(long, default_value_t = DEFAULT_EXACT_CEILING)]
        ceiling: usize,
        /// Append records here (defaults to $ASSOC_CODES_CATALOG).
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Rebuild the rows of a published table and report each status.
    Reproduce {
        #[arg(long)]
        table: u8,
        /// Group labels to keep, comma-separated (e.g. C_21).
        #[arg(long)]
        rows: Option<String>,
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EXACT_CEILING)]
        ceiling: usize,
        /// Exit nonzero when any row is discrepant.
        #[arg(long)]
        strict: bool,
    },
    /// Query a catalog file.
    Catalog {
        /// Defaults to $ASSOC_CODES_CATALOG.
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        min_d: Option<usize>,
        #[arg(long)]
        max_d: Option<usize>,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
}

#[derive(Args, Debug)]
struct CodeSource {
    /// Scheme spec; omit when reading --pauli.
    spec: Option<String>,
    /// Comma-separated basis indices, or shorthand like I_2A_2+XA_1.
    #[arg(long)]
    b1: Option<String>,
    #[arg(long)]
    b2: Option<String>,
    /// Drop this many trailing rows before picking independent ones.
    #[arg(long, default_value_t = 0, conflicts_with = "keep")]
    drop: usize,
    /// Keep exactly these rows (comma-separated).
    #[arg(long)]
    keep: Option<String>,
    /// Read generators from a file of Pauli strings instead.
    #[arg(long, conflicts_with_all = ["spec", "b1", "b2"])]
    pauli: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Pauli,
    Json,
    Matrix,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Exact,
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MethodArg {
    Auto,
    Exact,
    Oracle,
    Bounded(usize),
}

impl std::str::FromStr for MethodArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(MethodArg::Auto),
            "exact" => Ok(MethodArg::Exact),
            "oracle" => Ok(MethodArg::Oracle),
            _ => s
                .strip_prefix("bounded:")
                .and_then(|w| w.parse().ok())
                .map(MethodArg::Bounded)
                .ok_or_else(|| format!("unknown method {s:?}; expected auto, exact, oracle or bounded:W")),
        }
    }
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn assertion(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_ASSERTION,
            message: message.into(),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        let code = match &e {
            SearchError::Scheme(SchemeError::Parse(_) | SchemeError::InvalidParameter { .. })
            | SearchError::Expr(_)
            | SearchError::UnknownTable(_) => EXIT_USAGE,
            SearchError::Stabilizer(assoc_codes::stabilizer::StabilizerError::NotCommuting(..)) => EXIT_ASSERTION,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                SearchError::from(e).into()
            }
        }
    )*};
}
failure_from!(
    SchemeError,
    assoc_codes::stabilizer::StabilizerError,
    assoc_codes::distance::DistanceError,
    assoc_codes::expr::ExprError
);

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn parse_list(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("expected comma-separated indices, got {s:?}")))
}

fn parse_selection(s: &str) -> Selection {
    match s.split(',').map(|p| p.trim().parse::<usize>()).collect::<Result<Vec<_>, _>>() {
        Ok(ix) => Selection::Indices(ix),
        Err(_) => Selection::Expression(s.to_string()),
    }
}

fn parse_spec(s: &str) -> Result<SchemeSpec, Failure> {
    s.parse().map_err(|e: SchemeError| Failure::usage(e.to_string()))
}

fn build_code(src: &CodeSource) -> Result<StabilizerCode, Failure> {
    if let Some(path) = &src.pauli {
        let text = std::fs::read_to_string(path).map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: format!("{}: {e}", path.display()),
        })?;
        let c = parse_pauli_text(&text).map_err(|e| Failure::usage(e.to_string()))?;
        return Ok(StabilizerCode::from_check_matrix(c)?);
    }
    let spec_text = src.spec.as_deref().ok_or_else(|| Failure::usage("a scheme spec or --pauli is required"))?;
    let spec = parse_spec(spec_text)?;
    let (b1, b2) = match (&src.b1, &src.b2) {
        (Some(a), Some(b)) => (parse_selection(a), parse_selection(b)),
        _ => return Err(Failure::usage("--b1 and --b2 are required with a scheme spec")),
    };
    let scheme = spec.build()?;
    let c = build_from_selections(&spec, &scheme, &b1, &b2)?;
    Ok(match &src.keep {
        Some(keep) => select_generators_subset(&c, &parse_list(keep)?)?,
        None => select_generators(&c, src.drop)?,
    })
}

fn cmd_scheme(cli: &Cli, spec: &str, verify: bool, dump: bool) -> Result<(), Failure> {
    let scheme = parse_spec(spec)?.build()?;
    let report = verify.then(|| verify_scheme(&scheme));
    if cli.json {
        #[derive(Serialize)]
        struct Out {
            label: String,
            spec: String,
            nu: usize,
            classes: usize,
            valencies: Vec<usize>,
            verification: Option<assoc_codes::schemes::VerificationReport>,
            adjacency: Option<Vec<Vec<String>>>,
        }
        print_json(&Out {
            label: scheme.label().into(),
            spec: scheme.spec().into(),
            nu: scheme.order(),
            classes: scheme.classes(),
            valencies: scheme.valencies(),
            verification: report.clone(),
            adjacency: dump.then(|| scheme.export().adjacency),
        });
    } else {
        println!(
            "{} ({}): ν = {}, {} classes ({} basis matrices), valencies {:?}",
            scheme.label(),
            scheme.spec(),
            scheme.order(),
            scheme.classes(),
            scheme.adjacency().len(),
            scheme.valencies()
        );
        if let Some(r) = &report {
            for c in &r.checks {
                let status = if c.passed { "pass" } else { "FAIL" };
                match &c.witness {
                    Some(w) => println!("  {:?}: {status} ({w})", c.axiom),
                    None => println!("  {:?}: {status}", c.axiom),
                }
            }
            println!("  commutative: {}, symmetric: {}", r.commutative, r.symmetric);
            println!("verify: {}", if r.passed() { "pass" } else { "FAIL" });
        }
        if dump {
            print!("{}", scheme.export_text());
        }
    }
    match report {
        Some(r) if !r.passed() => Err(Failure::assertion(format!("{} fails the scheme axioms", scheme.label()))),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct CodeOut {
    n: usize,
    k: usize,
    provenance: Provenance,
    generators: CheckMatrixJson,
    pauli: Vec<String>,
}

fn cmd_code(cli: &Cli, src: &CodeSource, format: Format) -> Result<(), Failure> {
    let code = build_code(src)?;
    let pauli = code.to_pauli();
    if cli.json || matches!(format, Format::Json) {
        print_json(&CodeOut {
            n: code.n(),
            k: code.k(),
            provenance: code.provenance().clone(),
            generators: code.generators().to_json(),
            pauli: pauli.iter().map(ToString::to_string).collect(),
        });
        return Ok(());
    }
    println!("# [[{},{}]] with {} generators", code.n(), code.k(), pauli.len());
    match format {
        Format::Pauli => print!("{}", format_pauli_text(&pauli)),
        Format::Matrix => {
            let n = code.n();
            for row in code.generators().matrix().row_vectors() {
                let bits: String = (0..2 * n).map(|j| if row.get(j) { '1' } else { '0' }).collect();
                println!("{}|{}", &bits[..n], &bits[n..]);
            }
        }
        Format::Json => unreachable!(),
    }
    Ok(())
}

fn certify(code: &StabilizerCode, method: MethodArg, opts: &DistanceOptions) -> Result<DistanceCertificate, Failure> {
    let method = match method {
        MethodArg::Auto if code.n() <= ORACLE_MAX_QUBITS => MethodArg::Oracle,
        MethodArg::Auto if code.n() + code.k() <= opts.ceiling => MethodArg::Exact,
        MethodArg::Auto => MethodArg::Bounded(7),
        m => m,
    };
    Ok(match method {
        MethodArg::Oracle => distance_oracle(code)?,
        MethodArg::Exact => distance_exact_with(code, opts)?,
        MethodArg::Bounded(w) => distance_bounded_with(code, w, opts)?,
        MethodArg::Auto => unreachable!(),
    })
}

fn cmd_distance(cli: &Cli, src: &CodeSource, method: MethodArg, ceiling: usize) -> Result<(), Failure> {
    let code = build_code(src)?;
    let opts = DistanceOptions {
        workers: cli.workers,
        ceiling,
    };
    let cert = certify(&code, method, &opts)?;
    let (n, k, d) = (code.n(), code.k(), cert.d);
    if cli.json {
        #[derive(Serialize)]
        struct Out {
            n: usize,
            k: usize,
            certificate: assoc_codes::distance::CertificateJson,
            witness: Option<String>,
            hamming_ok: bool,
            kl_ok: bool,
        }
        let mut certificate = cert.to_json();
        if !cli.timing {
            certificate.elapsed_ms = None;
        }
        print_json(&Out {
            n,
            k,
            certificate,
            witness: cert.witness.as_ref().map(|w| w.to_pauli().to_string()),
            hamming_ok: hamming_bound_ok(n, k, d),
            kl_ok: kl_bound_ok(n, k, d),
        });
        return Ok(());
    }
    match cert.kind {
        CertificateKind::Exact => println!("[[{n},{k},{d}]] exact ({:?})", cert.method),
        CertificateKind::LowerBound => println!(
            "[[{n},{k},≥{d}]] lower bound ({:?}); no logical operator of weight < {d}",
            cert.method
        ),
    }
    if let Some(w) = &cert.witness {
        println!("witness {}", w.to_pauli());
    }
    println!("hamming_ok {}, kl_ok {}", hamming_bound_ok(n, k, d), kl_bound_ok(n, k, d));
    if cli.timing {
        println!("elapsed_ms {}", cert.elapsed_ms);
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>, Failure> {
    let bad = || Failure::usage(format!("expected A..B, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    Ok(a..=b)
}

fn catalog_path(explicit: Option<&PathBuf>) -> Option<PathBuf> {
    explicit.cloned().or_else(|| std::env::var_os(CATALOG_ENV).map(PathBuf::from))
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    cli: &Cli,
    spec: &str,
    min_d: usize,
    max_size: Option<usize>,
    drops: Option<&str>,
    w_max: usize,
    budget: u64,
    ceiling: usize,
    catalog: Option<&PathBuf>,
) -> Result<(), Failure> {
    if budget == 0 {
        return Err(Failure::usage("--budget must be positive"));
    }
    let spec = parse_spec(spec)?;
    let scheme = spec.build()?;
    let report = verify_scheme(&scheme);
    if !report.passed() {
        return Err(Failure::assertion(format!("{} fails the scheme axioms", scheme.label())));
    }
    let cfg = SearchConfig {
        max_subset_size: max_size,
        drops: drops.map(parse_range).transpose()?,
        w_max,
        min_d,
        time_budget: Duration::from_secs(budget),
        workers: cli.workers,
        exact_ceiling: ceiling,
    };
    let outcome = assoc_codes::search::enumerate_codes(&scheme, &cfg)?;
    if let Some(path) = catalog_path(catalog) {
        let mut w = CatalogWriter::open(&path)?;
        for r in &outcome.records {
            w.append(r)?;
        }
    }
    let mut records = outcome.records.clone();
    sort_records(&mut records);
    if cli.json {
        #[derive(Serialize)]
        struct Out<'a> {
            scheme: String,
            truncated: bool,
            pairs_examined: usize,
            records: &'a [CodeRecord],
        }
        print_json(&Out {
            scheme: spec.to_string(),
            truncated: outcome.truncated,
            pairs_examined: outcome.pairs_examined,
            records: &records,
        });
    } else {
        for r in &records {
            let ge = if r.is_exact() { "" } else { "≥" };
            println!(
                "[[{},{},{ge}{}]]  B1={}  B2={}  {:?}",
                r.n,
                r.k,
                r.d(),
                r.b1,
                r.b2,
                r.rows
            );
        }
        println!(
            "{} codes from {} pairs{}",
            records.len(),
            outcome.pairs_examined,
            if outcome.truncated { " (truncated: time budget exhausted)" } else { "" }
        );
    }
    Ok(())
}

fn cmd_reproduce(
    cli: &Cli,
    table: u8,
    rows: Option<&str>,
    opts: ReproduceOptions,
    strict: bool,
) -> Result<(), Failure> {
    let report = reproduce_table(table, rows, &opts)?;
    if cli.json {
        let mut report = report.clone();
        if !cli.timing {
            for r in &mut report.rows {
                if let Some(c) = &mut r.certificate {
                    c.elapsed_ms = None;
                }
            }
        }
        print_json(&report);
    } else {
        print!("{}", report.to_text());
    }
    let bad = report.count(RowStatus::Discrepant);
    if strict && bad > 0 {
        return Err(Failure::assertion(format!("{bad} discrepant rows")));
    }
    Ok(())
}

fn cmd_catalog(cli: &Cli, path: Option<&PathBuf>, filter: CatalogFilter) -> Result<(), Failure> {
    let path = catalog_path(path).ok_or_else(|| Failure::usage(format!("--path or ${CATALOG_ENV} is required")))?;
    let q = catalog_query(&path, &filter)?;
    if cli.json {
        print_json(&q.records);
    } else {
        for r in &q.records {
            let ge = if r.is_exact() { "" } else { "≥" };
            println!("[[{},{},{ge}{}]]  {}  B1={}  B2={}", r.n, r.k, r.d(), r.label, r.b1, r.b2);
        }
        println!("{} records", q.records.len());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Scheme { spec, verify, dump } => cmd_scheme(cli, spec, *verify, *dump),
        Command::Code { source, format } => cmd_code(cli, source, *format),
        Command::Distance { source, method, ceiling } => cmd_distance(cli, source, *method, *ceiling),
        Command::Search {
            spec,
            min_d,
            max_size,
            drops,
            w_max,
            budget,
            ceiling,
            catalog,
        } => cmd_search(
            cli,
            spec,
            *min_d,
            *max_size,
            drops.as_deref(),
            *w_max,
            *budget,
            *ceiling,
            catalog.as_ref(),
        ),
        Command::Reproduce {
            table,
            rows,
            trials,
            seed,
            ceiling,
            strict,
        } => cmd_reproduce(
            cli,
            *table,
            rows.as_deref(),
            ReproduceOptions {
                workers: cli.workers,
                exact_ceiling: *ceiling,
                alternate_trials: *trials,
                seed: *seed,
                ..Default::default()
            },
            *strict,
        ),
        Command::Catalog {
            path,
            n,
            k,
            min_d,
            max_d,
            scheme,
            kind,
        } => cmd_catalog(
            cli,
            path.as_ref(),
            CatalogFilter {
                n: *n,
                k: *k,
                min_d: *min_d,
                max_d: *max_d,
                scheme: scheme.clone(),
                kind: kind.map(|k| match k {
                    KindArg::Exact => CertificateKind::Exact,
                    KindArg::LowerBound => CertificateKind::LowerBound,
                }),
            },
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
