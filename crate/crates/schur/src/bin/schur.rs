//! Command-line front end: axiom verification, enumeration, orbit queries,
//! difference-set search, and the theorem lab.
//!
//! Every run writes exactly one certificate document to standard output;
//! diagnostics and timing go to standard error. Certificates embed the tool
//! version and the effective parameters and contain no timestamps, so a
//! repeated invocation produces byte-identical output.
//!
//! Exit status: 0 on success, 1 when a computed verdict fails (the witness
//! is inside the certificate), 2 on usage errors including malformed input.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use thiserror::Error;

use schur::aut::{AffineAut, AffineAutRecord, AutSubgroup};
use schur::diffset::{
    admissible_sizes, enumerate_difference_sets, find_difference_partitions, is_difference_set,
    paley_set, SearchMode,
};
use schur::finite::{
    classify_traditional, enumerate_schur_rings, verify_partition, FinitePartition,
    PartitionCheck,
};
use schur::group::{GroupContext, GroupElement};
use schur::lab::{
    lab_all_jobs, lab_census, lab_coprime_product, lab_frobenius_sweep, lab_safe_prime_counting,
    lab_size_lemma, lab_wedge_sweep, lab_z2_forms, LabJob, LabReport, Verdict,
};
use schur::oracle::{verify_on_window, OracleCheck, OracleSpec, SchurOracle, Window};

#[derive(Parser)]
#[command(name = "schur", version, about = "Exact Schur-ring toolkit for Z_n and Z x Z_n")]
struct Cli {
    /// Certificate format written to standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for independent checks; 0 picks one per core.
    /// Certificates do not depend on this value.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Schur axioms for a partition of Z_n read from JSON.
    VerifyZn(VerifyZnArgs),
    /// Enumerate every Schur ring over Z_n.
    EnumZn(EnumZnArgs),
    /// Classify a verified partition of Z_n into the classical families.
    ClassifyZn(ClassifyZnArgs),
    /// Compute the orbit of z^t a^k under a generated automorphism subgroup.
    Orbit(OrbitArgs),
    /// Verify a class oracle over Z x Z_n on a window of free exponents.
    OracleVerify(OracleVerifyArgs),
    /// Enumerate or certify difference sets of Z_v.
    Diffsets(DiffsetsArgs),
    /// Search for difference partitions of Z_v.
    Diffpart(DiffpartArgs),
    /// Run theorem-lab consistency checks.
    Lab(LabArgs),
}

#[derive(Args)]
struct VerifyZnArgs {
    /// Partition file, e.g. {"n": 7, "classes": [[0], [1, 2, 4], [3, 5, 6]]}.
    #[arg(long)]
    file: PathBuf,
}

#[derive(Args)]
struct EnumZnArgs {
    /// Modulus.
    #[arg(long)]
    n: u64,

    /// Run past the default budget n <= 12.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ClassifyZnArgs {
    /// Partition file in the verify-zn format.
    #[arg(long)]
    file: PathBuf,
}

#[derive(Args)]
struct OrbitArgs {
    /// Torsion order of Z x Z_n.
    #[arg(long)]
    n: u64,

    /// Inline JSON generator list, e.g. '[{"eps": -1, "m": 1, "i": 0}]'.
    #[arg(long, conflicts_with = "gens_file", required_unless_present = "gens_file")]
    gens: Option<String>,

    /// File holding the generator list.
    #[arg(long)]
    gens_file: Option<PathBuf>,

    /// Exponent of the free generator z.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    t: i64,

    /// Exponent of the torsion generator a.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    k: i64,
}

#[derive(Args)]
struct OracleVerifyArgs {
    /// Oracle file, e.g. {"n": 5, "family": "automorphic", "generators": [...]}.
    #[arg(long)]
    file: PathBuf,

    /// Window radius: axioms are checked on products with |t| within it.
    #[arg(long, default_value_t = 4)]
    window: i64,
}

#[derive(Args)]
struct DiffsetsArgs {
    /// Modulus.
    #[arg(long)]
    v: u64,

    /// Certify one candidate set given as inline JSON, e.g. '[1, 2, 4]'.
    #[arg(long, conflicts_with = "paley")]
    set: Option<String>,

    /// Certify the Paley construction (v prime, v = 3 mod 4).
    #[arg(long)]
    paley: bool,

    /// Run past the default budget v <= 31 when enumerating.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct DiffpartArgs {
    /// Modulus.
    #[arg(long)]
    v: u64,

    /// Report only partitions that use at least one non-trivial block.
    #[arg(long)]
    non_trivial_only: bool,

    /// Run past the default budget v <= 31.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct LabArgs {
    /// One named check.
    #[arg(long, value_enum, required_unless_present = "all", conflicts_with = "all")]
    check: Option<CheckName>,

    /// The full default suite at standard parameters.
    #[arg(long, conflicts_with_all = ["p", "n", "window", "bound"])]
    all: bool,

    /// Torsion prime for census, sweep, and counting checks.
    #[arg(long, default_value_t = 3)]
    p: u64,

    /// Modulus for the finite-table checks.
    #[arg(long, default_value_t = 6)]
    n: u64,

    /// Window radius for oracle-backed checks.
    #[arg(long, default_value_t = 4)]
    window: i64,

    /// Free-index bound for census wedge scales.
    #[arg(long, default_value_t = 3)]
    bound: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckName {
    Census,
    CoprimeProduct,
    FrobeniusPrimitivity,
    SafePrimeCounting,
    SizeLemma,
    WedgeStructure,
    Z2Forms,
}

impl CheckName {
    fn as_str(self) -> &'static str {
        match self {
            CheckName::Census => "census",
            CheckName::CoprimeProduct => "coprime-product",
            CheckName::FrobeniusPrimitivity => "frobenius-primitivity",
            CheckName::SafePrimeCounting => "safe-prime-counting",
            CheckName::SizeLemma => "size-lemma",
            CheckName::WedgeStructure => "wedge-structure",
            CheckName::Z2Forms => "z2-forms",
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON in {origin}: {source}")]
    Json {
        origin: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn domain(err: impl std::fmt::Display) -> CliError {
    CliError::Invalid(err.to_string())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text)
        .map_err(|source| CliError::Json { origin: path.display().to_string(), source })
}

fn parse_inline<T: DeserializeOwned>(origin: &str, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text)
        .map_err(|source| CliError::Json { origin: origin.to_string(), source })
}

fn check_budget(name: &str, value: u64, cap: u64, force: bool) -> Result<(), CliError> {
    if value > cap && !force {
        return Err(CliError::Invalid(format!(
            "{name} = {value} exceeds the default budget {name} <= {cap}; pass --force to run anyway"
        )));
    }
    Ok(())
}

/// Envelope shared by every certificate: tool version, subcommand, and the
/// effective parameters, with the command-specific payload under `result`.
fn certificate(command: &str, params: Value, result: Value) -> Value {
    json!({
        "tool": schur::TOOL_VERSION,
        "command": command,
        "params": params,
        "result": result,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("warning: thread pool already initialized: {err}");
        }
    }
    let started = Instant::now();
    match run(&cli) {
        Ok((cert, code)) => {
            emit(cli.format, &cert);
            eprintln!("timing: {:.3?} total", started.elapsed());
            code
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(Value, ExitCode), CliError> {
    match &cli.command {
        Command::VerifyZn(args) => verify_zn(args),
        Command::EnumZn(args) => enum_zn(args),
        Command::ClassifyZn(args) => classify_zn(args),
        Command::Orbit(args) => orbit(args),
        Command::OracleVerify(args) => oracle_verify(args),
        Command::Diffsets(args) => diffsets(args),
        Command::Diffpart(args) => diffpart(args),
        Command::Lab(args) => lab(args),
    }
}

fn verify_zn(args: &VerifyZnArgs) -> Result<(Value, ExitCode), CliError> {
    let partition: FinitePartition = read_json(&args.file)?;
    let params = json!({
        "file": args.file.display().to_string(),
        "n": partition.n(),
    });
    let (result, code) = match verify_partition(&partition) {
        PartitionCheck::Verified(table) => (
            json!({ "verdict": "verified", "table": table }),
            ExitCode::SUCCESS,
        ),
        PartitionCheck::Refuted(witness) => (
            json!({ "verdict": "refuted", "witness": witness }),
            ExitCode::from(1),
        ),
    };
    Ok((certificate("verify-zn", params, result), code))
}

fn enum_zn(args: &EnumZnArgs) -> Result<(Value, ExitCode), CliError> {
    check_budget("n", args.n, 12, args.force)?;
    let rings = enumerate_schur_rings(args.n).map_err(domain)?;
    let entries: Vec<Value> = rings
        .iter()
        .map(|ring| {
            json!({
                "classes": ring.blocks(),
                "kind": classify_traditional(ring).kind_name(),
            })
        })
        .collect();
    let params = json!({ "n": args.n, "force": args.force });
    let result = json!({ "count": rings.len(), "rings": entries });
    Ok((certificate("enum-zn", params, result), ExitCode::SUCCESS))
}

fn classify_zn(args: &ClassifyZnArgs) -> Result<(Value, ExitCode), CliError> {
    let partition: FinitePartition = read_json(&args.file)?;
    let params = json!({
        "file": args.file.display().to_string(),
        "n": partition.n(),
    });
    let (result, code) = match verify_partition(&partition) {
        PartitionCheck::Verified(_) => {
            let tag = classify_traditional(&partition);
            (
                json!({ "verdict": "verified", "classification": tag }),
                ExitCode::SUCCESS,
            )
        }
        PartitionCheck::Refuted(witness) => (
            json!({ "verdict": "refuted", "witness": witness }),
            ExitCode::from(1),
        ),
    };
    Ok((certificate("classify-zn", params, result), code))
}

fn orbit(args: &OrbitArgs) -> Result<(Value, ExitCode), CliError> {
    let ctx = GroupContext::new(args.n).map_err(domain)?;
    let records: Vec<AffineAutRecord> = match (&args.gens, &args.gens_file) {
        (Some(inline), None) => parse_inline("--gens", inline)?,
        (None, Some(path)) => read_json(path)?,
        _ => return Err(CliError::Invalid("pass exactly one of --gens and --gens-file".into())),
    };
    let gens = records
        .iter()
        .map(|record| AffineAut::from_record(ctx, record))
        .collect::<Result<Vec<_>, _>>()
        .map_err(domain)?;
    let subgroup = AutSubgroup::closure(ctx, gens).map_err(domain)?;
    let element = ctx.element(args.t, args.k);
    let members: Vec<GroupElement> = subgroup.orbit(element).iter().copied().collect();
    let display: Vec<String> = members.iter().map(ToString::to_string).collect();
    let params = json!({
        "n": args.n,
        "generators": records,
        "t": args.t,
        "k": args.k,
    });
    let result = json!({
        "element": element,
        "element_display": element.to_string(),
        "subgroup_order": subgroup.order(),
        "orbit_size": members.len(),
        "orbit": members,
        "orbit_display": display,
    });
    Ok((certificate("orbit", params, result), ExitCode::SUCCESS))
}

fn oracle_verify(args: &OracleVerifyArgs) -> Result<(Value, ExitCode), CliError> {
    let spec: OracleSpec = read_json(&args.file)?;
    let oracle = SchurOracle::from_spec(&spec).map_err(domain)?;
    let window = Window::new(args.window).map_err(domain)?;
    let params = json!({
        "file": args.file.display().to_string(),
        "window": args.window,
        "spec": spec,
    });
    let (result, code) = match verify_on_window(&oracle, window) {
        OracleCheck::Verified(table) => (
            json!({
                "verdict": "verified",
                "family": oracle.kind_name(),
                "free_image": oracle.free_image(),
                "table": table,
            }),
            ExitCode::SUCCESS,
        ),
        OracleCheck::Refuted(witness) => (
            json!({ "verdict": "refuted", "witness": witness }),
            ExitCode::from(1),
        ),
    };
    Ok((certificate("oracle-verify", params, result), code))
}

fn diffsets(args: &DiffsetsArgs) -> Result<(Value, ExitCode), CliError> {
    let params = json!({
        "v": args.v,
        "set": args.set,
        "paley": args.paley,
        "force": args.force,
    });
    let (result, code) = if let Some(text) = &args.set {
        let set: Vec<u64> = parse_inline("--set", text)?;
        match is_difference_set(args.v, &set).map_err(domain)? {
            Some(cert) => (
                json!({ "verdict": "difference-set", "certificate": cert }),
                ExitCode::SUCCESS,
            ),
            None => (
                json!({ "verdict": "not-difference-set", "set": set }),
                ExitCode::from(1),
            ),
        }
    } else if args.paley {
        let set = paley_set(args.v).map_err(domain)?;
        match is_difference_set(args.v, &set).map_err(domain)? {
            Some(cert) => (
                json!({ "verdict": "difference-set", "construction": "paley", "certificate": cert }),
                ExitCode::SUCCESS,
            ),
            None => (
                json!({ "verdict": "not-difference-set", "construction": "paley", "set": set }),
                ExitCode::from(1),
            ),
        }
    } else {
        check_budget("v", args.v, 31, args.force)?;
        let certs = enumerate_difference_sets(args.v).map_err(domain)?;
        (
            json!({
                "admissible_sizes": admissible_sizes(args.v),
                "count": certs.len(),
                "sets": certs,
            }),
            ExitCode::SUCCESS,
        )
    };
    Ok((certificate("diffsets", params, result), code))
}

fn diffpart(args: &DiffpartArgs) -> Result<(Value, ExitCode), CliError> {
    check_budget("v", args.v, 31, args.force)?;
    let mode = if args.non_trivial_only { SearchMode::NonTrivialOnly } else { SearchMode::All };
    let search = find_difference_partitions(args.v, mode).map_err(domain)?;
    let verdict = if !search.partitions.is_empty() {
        "found"
    } else if search.exhaustive {
        "none-exist"
    } else {
        "none-found"
    };
    let params = json!({
        "v": args.v,
        "non_trivial_only": args.non_trivial_only,
        "force": args.force,
    });
    let result = json!({
        "verdict": verdict,
        "count": search.partitions.len(),
        "search": search,
    });
    Ok((certificate("diffpart", params, result), ExitCode::SUCCESS))
}

fn lab(args: &LabArgs) -> Result<(Value, ExitCode), CliError> {
    let (params, reports) = if args.all {
        (json!({ "all": true }), run_jobs(lab_all_jobs()))
    } else {
        let check = args.check.expect("clap requires --check without --all");
        let window = Window::new(args.window).map_err(domain)?;
        let report = match check {
            CheckName::Census => lab_census(args.p, args.bound, window),
            CheckName::CoprimeProduct => lab_coprime_product(args.n),
            CheckName::FrobeniusPrimitivity => lab_frobenius_sweep(args.p, args.bound, window),
            CheckName::SafePrimeCounting => lab_safe_prime_counting(args.p),
            CheckName::SizeLemma => lab_size_lemma(args.n),
            CheckName::WedgeStructure => lab_wedge_sweep(args.p, args.bound, window),
            CheckName::Z2Forms => lab_z2_forms(window),
        };
        let mut params = serde_json::Map::new();
        params.insert("check".into(), check.as_str().into());
        match check {
            CheckName::CoprimeProduct | CheckName::SizeLemma => {
                params.insert("n".into(), args.n.into());
            }
            CheckName::SafePrimeCounting => {
                params.insert("p".into(), args.p.into());
            }
            CheckName::Z2Forms => {
                params.insert("window".into(), args.window.into());
            }
            CheckName::Census | CheckName::FrobeniusPrimitivity | CheckName::WedgeStructure => {
                params.insert("p".into(), args.p.into());
                params.insert("bound".into(), args.bound.into());
                params.insert("window".into(), args.window.into());
            }
        }
        (Value::Object(params), vec![report])
    };
    for report in &reports {
        eprintln!(
            "lab {}: {} in {:.3?}",
            report.check,
            verdict_str(report.verdict),
            report.elapsed
        );
    }
    let failed = reports.iter().filter(|report| !report.passed()).count();
    let result = json!({
        "reports": reports,
        "failed": failed,
    });
    let code = if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) };
    Ok((certificate("lab", params, result), code))
}

/// Run independent jobs on the rayon pool. Collection preserves job order,
/// so the merged report list is the canonical one regardless of schedule.
fn run_jobs(jobs: Vec<LabJob>) -> Vec<LabReport> {
    use rayon::prelude::*;
    jobs.into_par_iter().map(|job| job()).collect()
}

fn verdict_str(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inapplicable => "inapplicable",
    }
}

fn emit(format: Format, cert: &Value) {
    match format {
        Format::Json => {
            let doc = serde_json::to_string_pretty(cert).expect("certificate serializes");
            println!("{doc}");
        }
        Format::Table => print!("{}", render_table(cert)),
    }
}

/// Deterministic human-readable rendering of a certificate. Objects become
/// indented `key: value` lines, arrays of uniform flat objects become
/// aligned column tables, and other arrays become dashed lists.
fn render_table(value: &Value) -> String {
    let mut out = String::new();
    render(&mut out, value, 0);
    out
}

fn render(out: &mut String, value: &Value, indent: usize) {
    match value {
        Value::Object(map) => {
            for (key, val) in map {
                if let Some(text) = scalar(val) {
                    push_line(out, indent, &format!("{key}: {text}"));
                } else if let Some(items) = scalar_list(val) {
                    push_line(out, indent, &format!("{key}: [{}]", items.join(", ")));
                } else {
                    push_line(out, indent, &format!("{key}:"));
                    render(out, val, indent + 1);
                }
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                push_line(out, indent, "(none)");
            } else if let Some(rows) = column_table(items) {
                for row in rows {
                    push_line(out, indent, &row);
                }
            } else {
                for item in items {
                    if let Some(text) = scalar(item) {
                        push_line(out, indent, &format!("- {text}"));
                    } else if let Some(cells) = scalar_list(item) {
                        push_line(out, indent, &format!("- [{}]", cells.join(", ")));
                    } else {
                        push_line(out, indent, "-");
                        render(out, item, indent + 1);
                    }
                }
            }
        }
        other => {
            let text = scalar(other).unwrap_or_default();
            push_line(out, indent, &text);
        }
    }
}

fn push_line(out: &mut String, indent: usize, text: &str) {
    for _ in 0..indent {
        out.push_str("  ");
    }
    out.push_str(text);
    out.push('\n');
}

fn scalar(value: &Value) -> Option<String> {
    match value {
        Value::Null => Some("-".to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(num) => Some(num.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Flat array of scalars, rendered inline. Lists whose own entries contain
/// separators, and long lists, fall through to the dashed form.
fn scalar_list(value: &Value) -> Option<Vec<String>> {
    let items: Vec<String> = value.as_array()?.iter().map(scalar).collect::<Option<_>>()?;
    let joined: usize = items.iter().map(String::len).sum();
    if items.iter().any(|item| item.contains(", ")) || joined > 72 {
        return None;
    }
    Some(items)
}

/// Aligned rows for an array of flat objects sharing one key set.
fn column_table(items: &[Value]) -> Option<Vec<String>> {
    if items.len() < 2 {
        return None;
    }
    let first = items.first()?.as_object()?;
    let keys: Vec<&String> = first.keys().collect();
    let mut rows: Vec<Vec<String>> = vec![keys.iter().map(|k| k.to_string()).collect()];
    for item in items {
        let map = item.as_object()?;
        if map.len() != keys.len() {
            return None;
        }
        let mut row = Vec::with_capacity(keys.len());
        for &key in &keys {
            row.push(scalar(map.get(key)?)?);
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..keys.len())
        .map(|col| rows.iter().map(|row| row[col].len()).max().unwrap_or(0))
        .collect();
    let lines = rows
        .iter()
        .map(|row| {
            let mut line = String::new();
            for (col, cell) in row.iter().enumerate() {
                if col > 0 {
                    line.push_str("  ");
                }
                let _ = write!(line, "{cell:<width$}", width = widths[col]);
            }
            line.trim_end().to_string()
        })
        .collect();
    Some(lines)
}
