//! Theorem scans over circulant first rows.
//!
//! Each [`Suite`] is an implication "hypothesis => conclusion" checked on
//! every candidate of a scan; a candidate meeting the hypothesis but not the
//! conclusion is a counterexample. Every scan also checks two side
//! invariants: each semi-involutory or semi-orthogonal instance admits
//! associated diagonals with scalar `n`-th powers, and each even-order MDS
//! instance has both interleaved row sums nonzero.
//!
//! Exhaustive mode enumerates first rows as base-`q` counters with `c_0` the
//! least significant digit. Random mode draws rows from SplitMix64 seeded
//! with the given seed: each entry, `c_0` first, is the top `m` bits of the
//! next 64-bit output. Candidates are cut into fixed-size chunks that are
//! processed independently and merged in chunk order, so a report does not
//! depend on the worker count.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Serialize;

use crate::circulant::Circulant;
use crate::error::{Error, Result};
use crate::exec::{default_jobs, map_indexed};
use crate::field::{Element, Field};
use crate::matrix::{DiagonalMatrix, Matrix};
use crate::props::{
    classify, is_involutory, is_mds, is_nonperiodic, is_orthogonal, power_scalar,
    semi_involutory_with_inverse, semi_orthogonal_with_inverse, Classification, DiagonalPair,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BUDGET: u64 = 1 << 24;
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const MAX_ORDER: usize = 16;
const CHUNK: u64 = 2048;
/// Cap on rows listed per finding list; counts stay exact.
const MAX_LISTED: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    /// involutory => not MDS, `n >= 3`
    InvNone,
    /// orthogonal => not MDS, `n = 2^d >= 4`
    OrthNone,
    /// semi-orthogonal => zero traces, `n = 2^d >= 2`
    SoPow2,
    /// semi-orthogonal and MDS => zero traces, `n = 0 mod 4` not a power of two
    SoMod4,
    /// semi-orthogonal, MDS, non-periodic diagonal => that diagonal has zero
    /// trace, `n = 2 mod 4`, `n >= 6`
    SoMod2,
    /// semi-involutory => zero traces, `n = 2^d >= 2`
    SiPow2,
    /// semi-involutory and MDS => zero traces, `n >= 3` not a power of two
    SiGen,
    /// counts semi-orthogonal MDS instances with a nonzero trace, odd `n >= 3`
    SoOddExist,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::InvNone,
        Suite::OrthNone,
        Suite::SoPow2,
        Suite::SoMod4,
        Suite::SoMod2,
        Suite::SiPow2,
        Suite::SiGen,
        Suite::SoOddExist,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::InvNone => "INV-NONE",
            Suite::OrthNone => "ORTH-NONE",
            Suite::SoPow2 => "SO-POW2",
            Suite::SoMod4 => "SO-MOD4",
            Suite::SoMod2 => "SO-MOD2",
            Suite::SiPow2 => "SI-POW2",
            Suite::SiGen => "SI-GEN",
            Suite::SoOddExist => "SO-ODD-EXIST",
        }
    }

    pub fn applies_to(self, n: usize) -> bool {
        let pow2 = n.is_power_of_two();
        match self {
            Suite::InvNone => n >= 3,
            Suite::OrthNone => n >= 4 && pow2,
            Suite::SoPow2 | Suite::SiPow2 => n >= 2 && pow2,
            Suite::SoMod4 => n.is_multiple_of(4) && !pow2,
            Suite::SoMod2 => n % 4 == 2 && n >= 6,
            Suite::SiGen => n >= 3 && !pow2,
            Suite::SoOddExist => n % 2 == 1 && n >= 3,
        }
    }

    /// Suites that apply to order `n`.
    pub fn for_order(n: usize) -> Vec<Suite> {
        Suite::ALL.into_iter().filter(|s| s.applies_to(n)).collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.id().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::BadSyntax(format!("unknown suite {s}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Random { seed: u64, samples: u64 },
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub field: Field,
    pub order: usize,
    pub mode: Mode,
    pub suites: Vec<Suite>,
    pub jobs: usize,
    pub budget: u64,
    /// Rows examined ahead of the random sample; ignored when exhaustive.
    pub include: Vec<Vec<Element>>,
}

impl ScanConfig {
    pub fn new(field: &Field, order: usize, suites: Vec<Suite>) -> Self {
        ScanConfig {
            field: field.clone(),
            order,
            mode: Mode::Exhaustive,
            suites,
            jobs: default_jobs(),
            budget: DEFAULT_BUDGET,
            include: Vec::new(),
        }
    }

    pub fn random(mut self, seed: u64, samples: u64) -> Self {
        self.mode = Mode::Random { seed, samples };
        self
    }

    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn include(mut self, row: Vec<Element>) -> Self {
        self.include.push(row);
        self
    }
}

/// `q^n`, or `None` past `u128`.
pub fn space_size(field: &Field, n: usize) -> Option<u128> {
    u128::from(field.size()).checked_pow(n as u32)
}

/// Draws `samples` rows of length `n`.
pub fn random_rows(field: &Field, n: usize, seed: u64, samples: u64) -> Vec<Vec<Element>> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let shift = 64 - field.degree();
    (0..samples)
        .map(|_| {
            (0..n)
                .map(|_| Element::from_bits((rng.next_u64() >> shift) as u16))
                .collect()
        })
        .collect()
}

enum Source {
    Exhaustive { q: u64, n: usize, count: u64 },
    Listed(Vec<Vec<Element>>),
}

impl Source {
    fn build(field: &Field, order: usize, mode: Mode, budget: u64, include: &[Vec<Element>]) -> Result<Source> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::BadOrder(order));
        }
        match mode {
            Mode::Exhaustive => {
                let space = space_size(field, order);
                match space {
                    Some(s) if s <= u128::from(budget) => Ok(Source::Exhaustive {
                        q: u64::from(field.size()),
                        n: order,
                        count: s as u64,
                    }),
                    _ => Err(Error::BudgetExceeded {
                        space: space.map_or_else(
                            || format!("2^{}", field.degree() as usize * order),
                            |s| s.to_string(),
                        ),
                        budget,
                    }),
                }
            }
            Mode::Random { seed, samples } => {
                for row in include {
                    if row.len() != order {
                        return Err(Error::DimensionMismatch(format!(
                            "included row has {} entries, order is {order}",
                            row.len()
                        )));
                    }
                    if row.iter().any(|&x| !field.contains(x)) {
                        return Err(Error::OutOfRange {
                            value: format!("{row:?}"),
                            m: field.degree(),
                        });
                    }
                }
                let mut rows = include.to_vec();
                rows.extend(random_rows(field, order, seed, samples));
                Ok(Source::Listed(rows))
            }
        }
    }

    fn len(&self) -> u64 {
        match self {
            Source::Exhaustive { count, .. } => *count,
            Source::Listed(rows) => rows.len() as u64,
        }
    }

    fn row(&self, mut idx: u64) -> Vec<Element> {
        match self {
            Source::Exhaustive { q, n, .. } => (0..*n)
                .map(|_| {
                    let digit = idx % q;
                    idx /= q;
                    Element::from_bits(digit as u16)
                })
                .collect(),
            Source::Listed(rows) => rows[idx as usize].clone(),
        }
    }

    fn chunks(&self) -> usize {
        self.len().div_ceil(CHUNK) as usize
    }

    fn chunk_range(&self, c: usize) -> std::ops::Range<u64> {
        let start = c as u64 * CHUNK;
        start..(start + CHUNK).min(self.len())
    }
}

/// Associated diagonals as used by the trace suites.
#[derive(Clone)]
struct Semi {
    pair: DiagonalPair,
    /// whether `D1^n` and `D2^n` are scalar for `pair`
    power_ok: bool,
}

impl Semi {
    fn from_canonical(pair: DiagonalPair) -> Semi {
        let n = pair.d1.len() as u64;
        match pair.power_normalized() {
            Some(p) => Semi {
                power_ok: power_scalar(&p.d1, n).is_some() && power_scalar(&p.d2, n).is_some(),
                pair: p,
            },
            None => Semi {
                pair,
                power_ok: false,
            },
        }
    }

    fn traces(&self) -> (Element, Element) {
        (self.pair.d1.trace(), self.pair.d2.trace())
    }
}

/// Facts about one candidate, computed on first use.
struct Probe {
    circ: Circulant,
    a: Matrix,
    inv: Option<Option<Matrix>>,
    mds: Option<bool>,
    so: Option<Option<Semi>>,
    si: Option<Option<Semi>>,
}

impl Probe {
    fn new(field: &Field, row: Vec<Element>) -> Probe {
        let circ = Circulant::new(field, row).expect("row validated by source");
        let a = circ.build();
        Probe {
            circ,
            a,
            inv: None,
            mds: None,
            so: None,
            si: None,
        }
    }

    fn inverse(&mut self) -> Option<&Matrix> {
        let a = &self.a;
        self.inv.get_or_insert_with(|| a.inverse().ok()).as_ref()
    }

    fn mds(&mut self) -> bool {
        let a = &self.a;
        *self
            .mds
            .get_or_insert_with(|| is_mds(a).expect("square").is_mds)
    }

    fn semi_orthogonal(&mut self) -> Option<&Semi> {
        if self.so.is_none() {
            let found = self.inverse().cloned().and_then(|inv| {
                semi_orthogonal_with_inverse(&self.a, &inv)
                    .expect("same shape")
                    .map(Semi::from_canonical)
            });
            self.so = Some(found);
        }
        self.so.as_ref().and_then(Option::as_ref)
    }

    fn semi_involutory(&mut self) -> Option<&Semi> {
        if self.si.is_none() {
            let found = self.inverse().cloned().and_then(|inv| {
                semi_involutory_with_inverse(&self.a, &inv)
                    .expect("same shape")
                    .map(Semi::from_canonical)
            });
            self.si = Some(found);
        }
        self.si.as_ref().and_then(Option::as_ref)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub row: Vec<String>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Existence {
    pub instances: u64,
    pub nonzero_trace: u64,
    pub witnesses: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub hypothesis: u64,
    pub conclusion: u64,
    pub counterexample_count: u64,
    pub counterexamples: Vec<Finding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub existence: Option<Existence>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite: suite.id().to_string(),
            existence: (suite == Suite::SoOddExist).then(Existence::default),
            ..Default::default()
        }
    }

    fn record(&mut self, holds: bool, row: impl FnOnce() -> Vec<String>, reason: impl FnOnce() -> String) {
        self.hypothesis += 1;
        if holds {
            self.conclusion += 1;
        } else {
            self.counterexample_count += 1;
            if self.counterexamples.len() < MAX_LISTED {
                self.counterexamples.push(Finding {
                    row: row(),
                    reason: reason(),
                });
            }
        }
    }

    fn merge(&mut self, other: SuiteReport) {
        self.hypothesis += other.hypothesis;
        self.conclusion += other.conclusion;
        self.counterexample_count += other.counterexample_count;
        extend_capped(&mut self.counterexamples, other.counterexamples);
        if let (Some(mine), Some(theirs)) = (self.existence.as_mut(), other.existence) {
            mine.instances += theirs.instances;
            mine.nonzero_trace += theirs.nonzero_trace;
            extend_capped(&mut mine.witnesses, theirs.witnesses);
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SideInvariant {
    pub checked: u64,
    pub failures: u64,
    pub counterexamples: Vec<Finding>,
}

impl SideInvariant {
    fn record(&mut self, holds: bool, row: impl FnOnce() -> Vec<String>, reason: &str) {
        self.checked += 1;
        if !holds {
            self.failures += 1;
            if self.counterexamples.len() < MAX_LISTED {
                self.counterexamples.push(Finding {
                    row: row(),
                    reason: reason.to_string(),
                });
            }
        }
    }

    fn merge(&mut self, other: SideInvariant) {
        self.checked += other.checked;
        self.failures += other.failures;
        extend_capped(&mut self.counterexamples, other.counterexamples);
    }
}

fn extend_capped<T>(dst: &mut Vec<T>, src: Vec<T>) {
    let room = MAX_LISTED.saturating_sub(dst.len());
    dst.extend(src.into_iter().take(room));
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub field: String,
    pub order: usize,
    pub mode: String,
    pub seed: Option<u64>,
    /// `q^n` in decimal; may exceed every JSON integer type.
    #[serde(serialize_with = "decimal")]
    pub space_size: Option<u128>,
    pub examined: u64,
    pub suites: Vec<SuiteReport>,
    pub power_scalar: SideInvariant,
    pub interleaved_sums: SideInvariant,
    pub elapsed_ms: u64,
}

impl ScanReport {
    /// No counterexamples and no side-invariant failures.
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.counterexample_count == 0)
            && self.power_scalar.failures == 0
            && self.interleaved_sums.failures == 0
    }

    pub fn suite(&self, suite: Suite) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == suite.id())
    }

    /// The report with its timing zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> ScanReport {
        ScanReport {
            elapsed_ms: 0,
            ..self.clone()
        }
    }
}

struct Tally {
    examined: u64,
    suites: Vec<SuiteReport>,
    power: SideInvariant,
    interleaved: SideInvariant,
}

impl Tally {
    fn new(suites: &[Suite]) -> Tally {
        Tally {
            examined: 0,
            suites: suites.iter().map(|&s| SuiteReport::new(s)).collect(),
            power: SideInvariant::default(),
            interleaved: SideInvariant::default(),
        }
    }

    fn merge(&mut self, other: Tally) {
        self.examined += other.examined;
        for (a, b) in self.suites.iter_mut().zip(other.suites) {
            a.merge(b);
        }
        self.power.merge(other.power);
        self.interleaved.merge(other.interleaved);
    }

    fn examine(&mut self, field: &Field, suites: &[Suite], row: Vec<Element>) {
        self.examined += 1;
        let mut p = Probe::new(field, row);
        let fmt_row = |p: &Probe| field.format_list(p.circ.first_row());
        let fmt = |x: Element| field.format_element(x);
        for (k, &suite) in suites.iter().enumerate() {
            let report = &mut self.suites[k];
            match suite {
                Suite::InvNone | Suite::OrthNone => {
                    let hyp = if suite == Suite::InvNone {
                        is_involutory(&p.a)
                    } else {
                        is_orthogonal(&p.a)
                    };
                    if hyp {
                        let mds = p.mds();
                        report.record(!mds, || fmt_row(&p), || "also MDS".into());
                    }
                }
                Suite::SoPow2 | Suite::SiPow2 => {
                    let semi = if suite == Suite::SoPow2 {
                        p.semi_orthogonal()
                    } else {
                        p.semi_involutory()
                    };
                    if let Some((t1, t2)) = semi.map(Semi::traces) {
                        let ok = t1.is_zero() && t2.is_zero();
                        report.record(ok, || fmt_row(&p), || {
                            format!("trace(D1) = {}, trace(D2) = {}", fmt(t1), fmt(t2))
                        });
                    }
                }
                Suite::SoMod4 | Suite::SiGen => {
                    let traces = if suite == Suite::SoMod4 {
                        p.semi_orthogonal().map(Semi::traces)
                    } else {
                        p.semi_involutory().map(Semi::traces)
                    };
                    if let Some((t1, t2)) = traces {
                        if p.mds() {
                            let ok = t1.is_zero() && t2.is_zero();
                            report.record(ok, || fmt_row(&p), || {
                                format!("MDS with trace(D1) = {}, trace(D2) = {}", fmt(t1), fmt(t2))
                            });
                        }
                    }
                }
                Suite::SoMod2 => {
                    let Some(semi) = p.semi_orthogonal() else { continue };
                    let d1 = semi.pair.d1.clone();
                    let d2 = semi.pair.d2.clone();
                    let np1 = is_nonperiodic(&d1).unwrap_or(false);
                    let np2 = is_nonperiodic(&d2).unwrap_or(false);
                    if (np1 || np2) && p.mds() {
                        let bad1 = np1 && !d1.trace().is_zero();
                        let bad2 = np2 && !d2.trace().is_zero();
                        report.record(!bad1 && !bad2, || fmt_row(&p), || {
                            format!(
                                "non-periodic ({np1}, {np2}) with trace(D1) = {}, trace(D2) = {}",
                                fmt(d1.trace()),
                                fmt(d2.trace())
                            )
                        });
                    }
                }
                Suite::SoOddExist => {
                    let Some((t1, t2)) = p.semi_orthogonal().map(Semi::traces) else {
                        continue;
                    };
                    if p.mds() {
                        let ex = report.existence.as_mut().expect("existence suite");
                        ex.instances += 1;
                        if !t1.is_zero() || !t2.is_zero() {
                            ex.nonzero_trace += 1;
                            if ex.witnesses.len() < MAX_LISTED {
                                ex.witnesses.push(fmt_row(&p));
                            }
                        }
                        report.hypothesis += 1;
                        report.conclusion += 1;
                    }
                }
            }
        }

        for semi in [p.so.as_ref(), p.si.as_ref()].into_iter().flatten().flatten() {
            self.power
                .record(semi.power_ok, || fmt_row(&p), "no associated pair with scalar n-th powers");
        }
        if p.circ.order().is_multiple_of(2) && p.mds() {
            let (even, odd) = p.circ.interleaved_sums().expect("even order");
            self.interleaved.record(
                !even.is_zero() && !odd.is_zero(),
                || fmt_row(&p),
                "MDS with a vanishing interleaved row sum",
            );
        }
    }
}

fn validate_suites(order: usize, suites: &[Suite]) -> Result<()> {
    match suites.iter().find(|s| !s.applies_to(order)) {
        Some(s) => Err(Error::IncompatibleSuite {
            suite: s.id().to_string(),
            order,
        }),
        None => Ok(()),
    }
}

/// Runs the configured suites with `config.jobs` workers.
pub fn run_suite(config: &ScanConfig) -> Result<ScanReport> {
    run_with_jobs(config, config.jobs)
}

/// Same as [`run_suite`] on the calling thread only.
pub fn run_suite_sequential(config: &ScanConfig) -> Result<ScanReport> {
    run_with_jobs(config, 1)
}

fn run_with_jobs(config: &ScanConfig, jobs: usize) -> Result<ScanReport> {
    let start = Instant::now();
    validate_suites(config.order, &config.suites)?;
    let source = Source::build(
        &config.field,
        config.order,
        config.mode,
        config.budget,
        &config.include,
    )?;
    let field = &config.field;
    let suites = &config.suites;
    let parts = map_indexed(jobs, source.chunks(), |c| {
        let mut tally = Tally::new(suites);
        for idx in source.chunk_range(c) {
            tally.examine(field, suites, source.row(idx));
        }
        tally
    });
    let mut total = Tally::new(suites);
    for part in parts {
        total.merge(part);
    }
    let (mode, seed) = match config.mode {
        Mode::Exhaustive => ("exhaustive", None),
        Mode::Random { seed, .. } => ("random", Some(seed)),
    };
    Ok(ScanReport {
        schema_version: SCHEMA_VERSION,
        field: field.to_string(),
        order: config.order,
        mode: mode.to_string(),
        seed,
        space_size: space_size(field, config.order),
        examined: total.examined,
        suites: total.suites,
        power_scalar: total.power,
        interleaved_sums: total.interleaved,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// Predicates accepted by [`search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Requirement {
    Nonsingular,
    Mds,
    Involutory,
    Orthogonal,
    SemiInvolutory,
    SemiOrthogonal,
    /// trace(D1) or trace(D2) nonzero for the required semi-properties
    /// (semi-orthogonal when neither is required)
    NonzeroTrace,
    /// both traces zero, same diagonals as `NonzeroTrace`
    ZeroTrace,
}

impl FromStr for Requirement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "nonsingular" => Requirement::Nonsingular,
            "mds" => Requirement::Mds,
            "involutory" => Requirement::Involutory,
            "orthogonal" => Requirement::Orthogonal,
            "semi-involutory" => Requirement::SemiInvolutory,
            "semi-orthogonal" => Requirement::SemiOrthogonal,
            "nonzero-trace" => Requirement::NonzeroTrace,
            "zero-trace" => Requirement::ZeroTrace,
            other => return Err(Error::BadSyntax(format!("unknown requirement {other}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub field: Field,
    pub order: usize,
    pub require: Vec<Requirement>,
    pub mode: Mode,
    pub jobs: usize,
    pub budget: u64,
    pub limit: usize,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub found: Vec<Classification>,
    /// candidates examined up to and including the last match kept
    pub examined: u64,
    /// true when every candidate was examined
    pub exhausted: bool,
}

fn meets(p: &mut Probe, require: &[Requirement]) -> bool {
    let wants_si = require.contains(&Requirement::SemiInvolutory);
    let wants_so = require.contains(&Requirement::SemiOrthogonal) || !wants_si;
    for &r in require {
        let ok = match r {
            Requirement::Nonsingular => p.inverse().is_some(),
            Requirement::Mds => p.mds(),
            Requirement::Involutory => is_involutory(&p.a),
            Requirement::Orthogonal => is_orthogonal(&p.a),
            Requirement::SemiInvolutory => p.semi_involutory().is_some(),
            Requirement::SemiOrthogonal => p.semi_orthogonal().is_some(),
            Requirement::NonzeroTrace | Requirement::ZeroTrace => {
                let mut traces = Vec::new();
                if wants_so {
                    traces.push(p.semi_orthogonal().map(Semi::traces));
                }
                if wants_si {
                    traces.push(p.semi_involutory().map(Semi::traces));
                }
                traces.into_iter().all(|t| match t {
                    None => false,
                    Some((t1, t2)) => {
                        let zero = t1.is_zero() && t2.is_zero();
                        zero == (r == Requirement::ZeroTrace)
                    }
                })
            }
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Finds up to `limit` circulants meeting every requirement, in candidate
/// order.
pub fn search(config: &SearchConfig) -> Result<SearchOutcome> {
    let source = Source::build(&config.field, config.order, config.mode, config.budget, &[])?;
    let mut found = Vec::new();
    if config.limit == 0 {
        return Ok(SearchOutcome {
            found,
            examined: 0,
            exhausted: false,
        });
    }
    let chunks = source.chunks();
    let batch = config.jobs.max(1) * 4;
    let mut next = 0;
    while next < chunks {
        let end = (next + batch).min(chunks);
        let hits = map_indexed(config.jobs, end - next, |k| {
            source
                .chunk_range(next + k)
                .filter_map(|idx| {
                    let mut p = Probe::new(&config.field, source.row(idx));
                    meets(&mut p, &config.require).then_some((idx, p.circ))
                })
                .collect::<Vec<_>>()
        });
        for (idx, circ) in hits.into_iter().flatten() {
            found.push(classify(&circ)?);
            if found.len() == config.limit {
                return Ok(SearchOutcome {
                    found,
                    examined: idx + 1,
                    exhausted: idx + 1 == source.len(),
                });
            }
        }
        next = end;
    }
    Ok(SearchOutcome {
        found,
        examined: source.len(),
        exhausted: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemiKind {
    Involutory,
    Orthogonal,
}

/// Brute-force search over every pair of nonsingular diagonals for
/// `target = D1 A D2`, where the target is `A^-1` or `A^-T`. Limited to
/// `q <= 8` and `n <= 3`. Singular input has no associated pair.
pub fn oracle_semi_search(a: &Matrix, kind: SemiKind) -> Result<Option<(DiagonalMatrix, DiagonalMatrix)>> {
    let f = a.field();
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch("oracle needs a square matrix".into()));
    }
    let units = u64::from(f.size() - 1);
    if f.size() > 8 || n > 3 {
        return Err(Error::BudgetExceeded {
            space: format!("{}", units.pow(2 * n as u32)),
            budget: 7u64.pow(6),
        });
    }
    let inv = match a.inverse() {
        Ok(inv) => inv,
        Err(Error::Singular) => return Ok(None),
        Err(e) => return Err(e),
    };
    let target = match kind {
        SemiKind::Involutory => inv,
        SemiKind::Orthogonal => inv.transpose(),
    };
    let decode = |mut code: u64| -> Vec<Element> {
        (0..n)
            .map(|_| {
                let d = code % units;
                code /= units;
                Element::from_bits(d as u16 + 1)
            })
            .collect()
    };
    let per_side = units.pow(n as u32);
    for c1 in 0..per_side {
        let d1 = decode(c1);
        for c2 in 0..per_side {
            let d2 = decode(c2);
            let hit = (0..n).all(|i| {
                (0..n).all(|j| f.mul(f.mul(d1[i], a.get(i, j)), d2[j]) == target.get(i, j))
            });
            if hit {
                return Ok(Some((DiagonalMatrix::new(f, d1)?, DiagonalMatrix::new(f, d2)?)));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub field: String,
    pub order: usize,
    pub matrices: u64,
    pub agreements: u64,
    pub semi_orthogonal: u64,
    pub semi_involutory: u64,
    pub power_scalar: SideInvariant,
    pub disagreements: Vec<Finding>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.agreements == self.matrices && self.power_scalar.failures == 0
    }
}

/// Compares the graph solver against [`oracle_semi_search`] on every
/// circulant of order `n`, for both semi-properties.
pub fn oracle_equivalence(field: &Field, n: usize, jobs: usize) -> Result<EquivalenceReport> {
    let source = Source::build(field, n, Mode::Exhaustive, DEFAULT_BUDGET, &[])?;
    let total = source.len() as usize;
    let outcomes = map_indexed(jobs, total, |idx| -> Result<_> {
        let mut p = Probe::new(field, source.row(idx as u64));
        let mut agree = true;
        let mut kinds = Vec::new();
        let mut power = Vec::new();
        for kind in [SemiKind::Orthogonal, SemiKind::Involutory] {
            let oracle = oracle_semi_search(&p.a, kind)?;
            let solved = match kind {
                SemiKind::Orthogonal => p.semi_orthogonal(),
                SemiKind::Involutory => p.semi_involutory(),
            }
            .cloned();
            let solved_found = solved.is_some();
            if let Some(semi) = solved {
                power.push(semi.power_ok);
                let inv = p.inv.clone().flatten().expect("nonsingular");
                let target = match kind {
                    SemiKind::Orthogonal => inv.transpose(),
                    SemiKind::Involutory => inv,
                };
                agree &= semi.pair.relates(&p.a, &target);
            }
            agree &= oracle.is_some() == solved_found;
            kinds.push((kind, solved_found));
        }
        Ok((field.format_list(p.circ.first_row()), agree, kinds, power))
    });
    let mut report = EquivalenceReport {
        field: field.to_string(),
        order: n,
        ..Default::default()
    };
    for outcome in outcomes {
        let (row, agree, kinds, power) = outcome?;
        report.matrices += 1;
        if agree {
            report.agreements += 1;
        } else if report.disagreements.len() < MAX_LISTED {
            report.disagreements.push(Finding {
                row: row.clone(),
                reason: "graph solver and brute force disagree".into(),
            });
        }
        for (kind, found) in kinds {
            match (kind, found) {
                (SemiKind::Orthogonal, true) => report.semi_orthogonal += 1,
                (SemiKind::Involutory, true) => report.semi_involutory += 1,
                _ => {}
            }
        }
        for ok in power {
            report
                .power_scalar
                .record(ok, || row.clone(), "no associated pair with scalar n-th powers");
        }
    }
    Ok(report)
}

/// A published circulant with its stated semi-orthogonal diagonals, all in
/// hex over `8:0x11D` with the generator taken as the class of `x`.
#[derive(Clone, Copy, Debug)]
pub struct PublishedExample {
    pub id: u8,
    pub first_row: &'static str,
    pub d1: &'static str,
    pub d2: &'static str,
}

/// `circulant(a, a+1, a^2+a)`.
pub const EXAMPLE_1: PublishedExample = PublishedExample {
    id: 1,
    first_row: "0x02,0x03,0x06",
    d1: "0xE2,0xE2,0xE2",
    d2: "0x5A,0x5A,0x5A",
};

/// `circulant(1, 1+a+a^3, 1+a+a^3, a+a^3, 1+a^3+a^4+a^7)`.
pub const EXAMPLE_2: PublishedExample = PublishedExample {
    id: 2,
    first_row: "0x01,0x0B,0x0B,0x0A,0x99",
    d1: "0x06,0x85,0xF4,0x3C,0x4B",
    d2: "0xCF,0xA8,0xB5,0x64,0xB6",
};

pub const AES_ROW: &str = "0x02,0x03,0x01,0x01";

pub fn example_field() -> Field {
    Field::new(8, 0x11D).expect("x^8+x^4+x^3+x^2+1 is irreducible")
}

pub fn aes_field() -> Field {
    Field::new(8, 0x11B).expect("x^8+x^4+x^3+x+1 is irreducible")
}

pub fn published_example(id: u8) -> Option<PublishedExample> {
    match id {
        1 => Some(EXAMPLE_1),
        2 => Some(EXAMPLE_2),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExampleRecord {
    pub example: u8,
    pub field: String,
    pub checks: Vec<Check>,
}

impl ExampleRecord {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks a published example over its own field.
pub fn verify_example(id: u8) -> Result<ExampleRecord> {
    verify_example_in(id, &example_field())
}

/// Checks a published example with its hex data read in `field`:
/// nonsingular, MDS, semi-orthogonal, the stated diagonals reproduce
/// `A^-T` exactly, the solver's pair is a scalar multiple of them, and
/// both traces are nonzero.
pub fn verify_example_in(id: u8, field: &Field) -> Result<ExampleRecord> {
    let ex = published_example(id).ok_or_else(|| Error::BadSyntax(format!("no example {id}")))?;
    let circ = Circulant::from_hex(field, ex.first_row)?;
    let a = circ.build();
    let d1 = DiagonalMatrix::from_hex(field, ex.d1)?;
    let d2 = DiagonalMatrix::from_hex(field, ex.d2)?;
    let fmt = |x: Element| field.format_element(x);
    let mut checks = Vec::new();

    let inv = a.inverse().ok();
    checks.push(Check::new(
        "nonsingular",
        inv.is_some(),
        format!("det = {}", fmt(a.det()?)),
    ));
    let mds = is_mds(&a)?;
    checks.push(Check::new(
        "mds",
        mds.is_mds,
        match &mds.witness {
            Some((r, c)) => format!("singular submatrix rows {r:?} cols {c:?}"),
            None => "all square submatrices nonsingular".into(),
        },
    ));

    let Some(inv) = inv else {
        for name in ["semi_orthogonal", "stated_diagonals", "scalar_multiple", "nonzero_traces"] {
            checks.push(Check::new(name, false, "matrix is singular"));
        }
        return Ok(ExampleRecord {
            example: id,
            field: field.to_string(),
            checks,
        });
    };
    let target = inv.transpose();
    let solved = semi_orthogonal_with_inverse(&a, &inv)?;
    checks.push(Check::new(
        "semi_orthogonal",
        solved.is_some(),
        match &solved {
            Some(p) => format!("canonical D1 = {:?}", field.format_list(p.d1.entries())),
            None => "no diagonal pair relates A to A^-T".into(),
        },
    ));

    let sandwich = a.sandwich(&d1, &d2)?;
    let mismatch = (0..a.rows())
        .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
        .find(|&(i, j)| sandwich.get(i, j) != target.get(i, j));
    checks.push(match mismatch {
        None => Check::new("stated_diagonals", true, "A^-T = D1 A D2 entrywise"),
        Some((i, j)) => Check::new(
            "stated_diagonals",
            false,
            format!(
                "entry ({i}, {j}): D1 A D2 has {}, A^-T has {}",
                fmt(sandwich.get(i, j)),
                fmt(target.get(i, j))
            ),
        ),
    });

    checks.push(match &solved {
        None => Check::new("scalar_multiple", false, "solver found no pair"),
        Some(p) => {
            let c = field.div(d1.get(0), p.d1.get(0))?;
            let c_inv = field.inv(c)?;
            let d1_ok = (0..d1.len()).all(|i| d1.get(i) == field.mul(c, p.d1.get(i)));
            let d2_ok = (0..d2.len()).all(|j| d2.get(j) == field.mul(c_inv, p.d2.get(j)));
            Check::new(
                "scalar_multiple",
                d1_ok && d2_ok,
                format!("stated D1 = {} * canonical D1", fmt(c)),
            )
        }
    });

    let (t1, t2) = (d1.trace(), d2.trace());
    checks.push(Check::new(
        "nonzero_traces",
        !t1.is_zero() && !t2.is_zero(),
        format!("trace(D1) = {}, trace(D2) = {}", fmt(t1), fmt(t2)),
    ));
    Ok(ExampleRecord {
        example: id,
        field: field.to_string(),
        checks,
    })
}

/// Exhaustive table-versus-schoolbook and inverse check for `m <= 8`,
/// sampled triples for larger fields.
pub fn field_self_test(field: &Field) -> Check {
    let name = format!("field {field}");
    let mut bad = None;
    if field.degree() <= 8 {
        'outer: for a in field.elements() {
            if !a.is_zero() && field.mul(a, field.inv(a).expect("nonzero")) != Element::ONE {
                bad = Some(format!("{} * inv != 1", field.format_element(a)));
                break;
            }
            for b in field.elements() {
                if field.mul(a, b) != field.mul_schoolbook(a, b) {
                    bad = Some(format!(
                        "{} * {} disagrees with shift-and-reduce",
                        field.format_element(a),
                        field.format_element(b)
                    ));
                    break 'outer;
                }
            }
        }
    } else {
        let rows = random_rows(field, 2, DEFAULT_SEED, 100_000);
        bad = rows
            .iter()
            .find(|r| field.mul(r[0], r[1]) != field.mul_schoolbook(r[0], r[1]))
            .map(|r| format!("{:?} disagrees with shift-and-reduce", field.format_list(r)));
    }
    match bad {
        None => Check::new(&name, true, "multiplication and inverses consistent"),
        Some(d) => Check::new(&name, false, d),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// GF(4) and GF(8) suites only
    Small,
    /// everything, including the published examples and order-6 scans
    Full,
}

#[derive(Clone, Debug, Serialize)]
pub struct PaperCheck {
    pub name: String,
    pub passed: bool,
    pub detail: serde_json::Value,
    pub elapsed_ms: u64,
}

/// Runs the standing verification set. `adjust` is applied to every field
/// before use; the identity in normal operation.
pub fn verify_all(scale: Scale, jobs: usize, adjust: &dyn Fn(Field) -> Field) -> Vec<PaperCheck> {
    let gf4 = adjust(Field::new(2, 0x7).expect("irreducible"));
    let gf8 = adjust(Field::new(3, 0xB).expect("irreducible"));
    let f11d = adjust(example_field());
    let f11b = adjust(aes_field());
    let mut out = Vec::new();
    let mut timed = |name: String, run: &mut dyn FnMut() -> (bool, serde_json::Value)| {
        let start = Instant::now();
        let (passed, detail) = run();
        out.push(PaperCheck {
            name,
            passed,
            detail,
            elapsed_ms: start.elapsed().as_millis() as u64,
        });
    };

    let mut fields = vec![gf4.clone(), gf8.clone()];
    if scale == Scale::Full {
        fields.extend([f11d.clone(), f11b.clone()]);
    }
    for f in &fields {
        let check = field_self_test(f);
        timed(check.name.clone(), &mut || (check.passed, serde_json::json!(check.detail)));
    }

    if scale == Scale::Full {
        for id in [1u8, 2] {
            timed(format!("example {id}"), &mut || match verify_example_in(id, &f11d) {
                Ok(rec) => (rec.passed(), to_json(&rec)),
                Err(e) => (false, serde_json::json!(e.to_string())),
            });
        }
        timed("aes circulant".into(), &mut || {
            let a = Circulant::from_hex(&f11b, AES_ROW).expect("valid row").build();
            let mds = is_mds(&a).map(|v| v.is_mds).unwrap_or(false);
            let inv = is_involutory(&a);
            let orth = is_orthogonal(&a);
            (
                mds && !inv && !orth,
                serde_json::json!({"mds": mds, "involutory": inv, "orthogonal": orth}),
            )
        });
    }

    let mut scans: Vec<ScanConfig> = Vec::new();
    for f in [&gf4, &gf8] {
        scans.push(ScanConfig::new(f, 2, vec![Suite::SoPow2, Suite::SiPow2]));
        scans.push(ScanConfig::new(f, 3, vec![Suite::InvNone]));
        scans.push(ScanConfig::new(
            f,
            4,
            vec![Suite::InvNone, Suite::OrthNone, Suite::SoPow2, Suite::SiPow2],
        ));
        scans.push(ScanConfig::new(f, 5, vec![Suite::InvNone]));
    }
    if scale == Scale::Full {
        scans.push(ScanConfig::new(&gf8, 3, vec![Suite::SiGen]));
        scans.push(ScanConfig::new(&gf8, 5, vec![Suite::SiGen]));
        scans.push(ScanConfig::new(&gf8, 6, vec![Suite::SoMod2, Suite::SiGen]));
        let ex1 = f11d.parse_list(EXAMPLE_1.first_row).expect("valid row");
        scans.push(
            ScanConfig::new(&f11d, 3, vec![Suite::SoOddExist])
                .random(DEFAULT_SEED, 4096)
                .include(ex1),
        );
        scans.push(ScanConfig::new(&f11d, 12, vec![Suite::SoMod4]).random(DEFAULT_SEED, 2000));
    }
    for cfg in scans {
        let cfg = cfg.jobs(jobs);
        let ids: Vec<&str> = cfg.suites.iter().map(|s| s.id()).collect();
        let name = format!("scan {} n={} {}", cfg.field, cfg.order, ids.join(","));
        timed(name, &mut || match run_suite(&cfg) {
            Ok(report) => {
                let mut ok = report.passed();
                if let Some(s) = report.suite(Suite::SoOddExist) {
                    ok &= s.existence.as_ref().is_some_and(|e| e.nonzero_trace > 0);
                }
                (ok, to_json(&report))
            }
            Err(e) => (false, serde_json::json!(e.to_string())),
        });
    }

    for (f, n) in [(gf4.clone(), 2), (gf4.clone(), 3), (gf8.clone(), 3)] {
        timed(format!("oracle {f} n={n}"), &mut || match oracle_equivalence(&f, n, jobs) {
            Ok(r) => (r.passed(), to_json(&r)),
            Err(e) => (false, serde_json::json!(e.to_string())),
        });
    }
    out
}

fn decimal<S: serde::Serializer>(v: &Option<u128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}
