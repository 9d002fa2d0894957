//! The `circmds` command line. [`run`] does all the work so tests can drive
//! it without spawning a process.

use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::circulant::Circulant;
use crate::error::{Error, Result};
use crate::exec::default_jobs;
use crate::field::{Element, Field};
use crate::matrix::Matrix;
use crate::props::{classify, classify_matrix, Classification, SemiResult};
use crate::verify::{
    run_suite, search, verify_all, Mode, Requirement, Scale, ScanConfig, SearchConfig, Suite,
    DEFAULT_BUDGET, DEFAULT_SEED, SCHEMA_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "circmds", version, about = "MDS and semi-orthogonal circulant matrices over GF(2^m)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Describe a field given as m:POLY
    FieldInfo {
        #[arg(long)]
        field: String,
    },
    /// Classify one circulant or square matrix
    Check(CheckArgs),
    /// Run theorem suites over circulant first rows
    Scan(ScanArgs),
    /// Find circulants meeting a conjunction of properties
    Search(SearchArgs),
    /// Reproduce the published examples and the desk-scale suite matrix
    VerifyPaper(VerifyArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    field: String,
    /// First row, e.g. 0x02,0x03,0x06
    #[arg(long, conflicts_with = "matrix")]
    circulant: Option<String>,
    /// Row-major entries, used with --rows and --cols
    #[arg(long, requires_all = ["rows", "cols"])]
    matrix: Option<String>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Random,
}

#[derive(Args, Debug)]
struct SamplingArgs {
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_u64)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = parse_u64)]
    budget: u64,
    /// Worker threads; defaults to the available parallelism
    #[arg(long)]
    jobs: Option<usize>,
}

impl SamplingArgs {
    fn mode(&self) -> Mode {
        match self.mode {
            ModeArg::Exhaustive => Mode::Exhaustive,
            ModeArg::Random => Mode::Random {
                seed: self.seed,
                samples: self.samples,
            },
        }
    }

    fn jobs(&self) -> usize {
        self.jobs.unwrap_or_else(default_jobs).max(1)
    }
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    field: String,
    #[arg(long)]
    order: usize,
    /// Comma-separated suite ids; defaults to every suite for the order
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    /// Extra first row examined ahead of a random sample
    #[arg(long)]
    include: Vec<String>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    field: String,
    #[arg(long)]
    order: usize,
    /// Comma-separated: nonsingular, mds, involutory, orthogonal,
    /// semi-involutory, semi-orthogonal, nonzero-trace, zero-trace
    #[arg(long, value_delimiter = ',')]
    require: Vec<String>,
    #[arg(long, default_value_t = 1)]
    limit: usize,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScaleArg {
    Small,
    Full,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "full")]
    scale: ScaleArg,
    #[arg(long)]
    jobs: Option<usize>,
    /// Corrupt one product A*B in every field (negative control)
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

fn parse_u64(s: &str) -> std::result::Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| e.to_string())
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
                return EXIT_USAGE;
            }
            let _ = out.write_all(rendered.as_bytes());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::FieldInfo { field } => field_info(&field, out),
        Command::Check(args) => check(&args, out),
        Command::Scan(args) => scan(&args, out, err),
        Command::Search(args) => search_cmd(&args, out, err),
        Command::VerifyPaper(args) => verify_paper(&args, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(out, "{text}").map_err(|e| Error::BadSyntax(e.to_string()))
}

fn emit_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string(value).expect("serializable");
    writeln!(out, "{text}").map_err(|e| Error::BadSyntax(e.to_string()))
}

#[derive(Serialize)]
struct FieldInfo {
    schema_version: u32,
    field: String,
    m: u32,
    polynomial: String,
    irreducible: bool,
    x_primitive: bool,
    x_order: u32,
    group_order: u32,
    generator: String,
}

fn field_info(spec: &str, out: &mut dyn Write) -> Result<i32> {
    let field: Field = spec.parse()?;
    let x = Element::from_bits(0x02);
    let x = if field.contains(x) { x } else { Element::ONE };
    emit(
        out,
        &FieldInfo {
            schema_version: SCHEMA_VERSION,
            field: field.to_string(),
            m: field.degree(),
            polynomial: format!("{:#X}", field.poly()),
            irreducible: true,
            x_primitive: field.is_primitive(x),
            x_order: field.order_of(x)?,
            group_order: field.size() - 1,
            generator: field.format_element(field.generator()),
        },
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
pub struct SemiJson {
    pub found: bool,
    pub d1: Option<Vec<String>>,
    pub d2: Option<Vec<String>>,
    pub k1: Option<String>,
    pub k2: Option<String>,
    pub trace_d1: Option<String>,
    pub trace_d2: Option<String>,
}

#[derive(Serialize)]
pub struct MdsWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// JSON form of a [`Classification`], hex strings throughout.
#[derive(Serialize)]
pub struct ClassificationJson {
    pub schema_version: u32,
    pub order: usize,
    pub field: String,
    pub first_row: Option<Vec<String>>,
    pub category: &'static str,
    pub nonsingular: bool,
    pub mds: bool,
    pub mds_witness: Option<MdsWitness>,
    pub involutory: bool,
    pub orthogonal: bool,
    pub semi_involutory: SemiJson,
    pub semi_orthogonal: SemiJson,
    pub nonperiodic_d1: Option<bool>,
    pub nonperiodic_d2: Option<bool>,
}

impl ClassificationJson {
    pub fn new(c: &Classification) -> Self {
        let f = &c.field;
        let semi = |s: &SemiResult| SemiJson {
            found: s.found(),
            d1: s.pair.as_ref().map(|p| f.format_list(p.d1.entries())),
            d2: s.pair.as_ref().map(|p| f.format_list(p.d2.entries())),
            k1: s.k1.map(|k| f.format_element(k)),
            k2: s.k2.map(|k| f.format_element(k)),
            trace_d1: s.trace_d1().map(|t| f.format_element(t)),
            trace_d2: s.trace_d2().map(|t| f.format_element(t)),
        };
        ClassificationJson {
            schema_version: SCHEMA_VERSION,
            order: c.order,
            field: f.to_string(),
            first_row: c.first_row.as_ref().map(|r| f.format_list(r)),
            category: c.category.as_str(),
            nonsingular: c.nonsingular,
            mds: c.mds.is_mds,
            mds_witness: c
                .mds
                .witness
                .clone()
                .map(|(rows, cols)| MdsWitness { rows, cols }),
            involutory: c.involutory,
            orthogonal: c.orthogonal,
            semi_involutory: semi(&c.semi_involutory),
            semi_orthogonal: semi(&c.semi_orthogonal),
            nonperiodic_d1: c.nonperiodic_d1,
            nonperiodic_d2: c.nonperiodic_d2,
        }
    }
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let field: Field = args.field.parse()?;
    let class = match (&args.circulant, &args.matrix) {
        (Some(row), None) => classify(&Circulant::from_hex(&field, row)?)?,
        (None, Some(list)) => {
            let (rows, cols) = (args.rows.unwrap_or(0), args.cols.unwrap_or(0));
            if rows != cols {
                return Err(Error::DimensionMismatch(format!(
                    "a {rows}x{cols} matrix is not square"
                )));
            }
            classify_matrix(&Matrix::from_hex(&field, rows, cols, list)?)?
        }
        _ => {
            return Err(Error::BadSyntax(
                "give either --circulant or --matrix".into(),
            ))
        }
    };
    emit(out, &ClassificationJson::new(&class))?;
    Ok(EXIT_OK)
}

fn scan(args: &ScanArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let field: Field = args.field.parse()?;
    let suites = if args.suite.is_empty() {
        Suite::for_order(args.order)
    } else {
        args.suite
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Suite>>>()?
    };
    let mut config = ScanConfig::new(&field, args.order, suites)
        .jobs(args.sampling.jobs())
        .budget(args.sampling.budget);
    config.mode = args.sampling.mode();
    for row in &args.include {
        config = config.include(field.parse_list(row)?);
    }
    let report = run_suite(&config)?;
    emit(out, &report)?;
    for suite in &report.suites {
        let _ = writeln!(
            err,
            "{}: {} hypothesis, {} conclusion, {} counterexamples",
            suite.suite, suite.hypothesis, suite.conclusion, suite.counterexample_count
        );
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
}

fn search_cmd(args: &SearchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let field: Field = args.field.parse()?;
    let require = args
        .require
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<Requirement>>>()?;
    let outcome = search(&SearchConfig {
        field,
        order: args.order,
        require,
        mode: args.sampling.mode(),
        jobs: args.sampling.jobs(),
        budget: args.sampling.budget,
        limit: args.limit,
    })?;
    for found in &outcome.found {
        emit_line(out, &ClassificationJson::new(found))?;
    }
    let _ = writeln!(
        err,
        "found {}, examined {}, exhausted {}",
        outcome.found.len(),
        outcome.examined,
        outcome.exhausted
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    schema_version: u32,
    scale: &'static str,
    passed: bool,
    checks: &'a [crate::verify::PaperCheck],
}

fn verify_paper(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let fault = match &args.inject_fault {
        Some(spec) => {
            let parts: Vec<&str> = spec.split(',').collect();
            let [a, b] = parts[..] else {
                return Err(Error::BadSyntax(spec.clone()));
            };
            let bits = |s: &str| parse_u64(s.trim()).ok().and_then(|v| u16::try_from(v).ok());
            match (bits(a), bits(b)) {
                (Some(a), Some(b)) => Some((Element::from_bits(a), Element::from_bits(b))),
                _ => return Err(Error::BadSyntax(spec.clone())),
            }
        }
        None => None,
    };
    let adjust = move |f: Field| match fault {
        Some((a, b)) => f.with_injected_fault(a, b),
        None => f,
    };
    let (scale, label) = match args.scale {
        ScaleArg::Small => (Scale::Small, "small"),
        ScaleArg::Full => (Scale::Full, "full"),
    };
    let jobs = args.jobs.unwrap_or_else(default_jobs).max(1);
    let start = Instant::now();
    let checks = verify_all(scale, jobs, &adjust);
    for c in &checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(err, "{verdict} {} ({} ms)", c.name, c.elapsed_ms);
    }
    let passed = checks.iter().all(|c| c.passed);
    let _ = writeln!(
        err,
        "{} of {} checks passed in {} ms",
        checks.iter().filter(|c| c.passed).count(),
        checks.len(),
        start.elapsed().as_millis()
    );
    emit(
        out,
        &VerifySummary {
            schema_version: SCHEMA_VERSION,
            scale: label,
            passed,
            checks: &checks,
        },
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}
