//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use circmds::circulant::Circulant;
use circmds::props::{diagonal_scaling_solve_anchored, is_involutory, is_mds, is_orthogonal, Anchor};
use circmds::verify::{
    aes_field, oracle_equivalence, run_suite, run_suite_sequential, search, verify_example,
    Mode, Requirement, ScanConfig, ScanReport, SearchConfig, SideInvariant, Suite, AES_ROW,
    DEFAULT_BUDGET, DEFAULT_SEED,
};
use circmds::{DiagonalMatrix, Element, Field, Matrix};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn criterion(id: u32, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let passed = outcome.passed && in_time;
    println!(
        "criterion {id:>2} {} {title} [{} ms, limit {} ms] {}{}",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_millis(),
        limit.as_millis(),
        outcome.detail,
        if in_time { "" } else { " (over time limit)" },
    );
    passed
}

fn gf4() -> Field {
    Field::new(2, 0x7).unwrap()
}

fn gf8() -> Field {
    Field::new(3, 0xB).unwrap()
}

fn scan(field: &Field, n: usize, suites: &[Suite], jobs: usize) -> ScanReport {
    run_suite(&ScanConfig::new(field, n, suites.to_vec()).jobs(jobs)).expect("scan in budget")
}

fn summarize(r: &ScanReport) -> String {
    let suites: Vec<String> = r
        .suites
        .iter()
        .map(|s| format!("{} {}/{}/{}", s.suite, s.hypothesis, s.conclusion, s.counterexample_count))
        .collect();
    format!("{} n={} [{}]", r.field, r.order, suites.join(", "))
}

/// Runs the scans, checks every listed suite came back clean, and folds the
/// power-scalar side invariant into `power`.
fn clean_scans(
    cases: &[(Field, usize, Vec<Suite>)],
    jobs: usize,
    per_scan: Option<Duration>,
    power: &mut SideInvariant,
) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (field, n, suites) in cases {
        let start = Instant::now();
        let r = scan(field, *n, suites, jobs);
        let slow = per_scan.is_some_and(|limit| start.elapsed() > limit);
        ok &= r.passed() && !slow && r.examined as u128 == r.space_size.unwrap_or(0);
        power.checked += r.power_scalar.checked;
        power.failures += r.power_scalar.failures;
        notes.push(summarize(&r) + if slow { " slow" } else { "" });
    }
    Outcome::new(ok, notes.join("; "))
}

fn example(id: u8) -> Outcome {
    let record = verify_example(id).expect("published example parses");
    let failed: Vec<String> = record
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    if failed.is_empty() {
        Outcome::new(true, format!("{} checks exact", record.checks.len()))
    } else {
        Outcome::new(false, failed.join("; "))
    }
}

fn random_element(rng: &mut SplitMix64, f: &Field) -> Element {
    Element::from_bits((rng.next_u64() >> (64 - f.degree())) as u16)
}

fn random_nonzero(rng: &mut SplitMix64, f: &Field) -> Element {
    loop {
        let x = random_element(rng, f);
        if !x.is_zero() {
            return x;
        }
    }
}

fn random_matrix(rng: &mut SplitMix64, f: &Field, n: usize) -> Matrix {
    let entries = (0..n * n).map(|_| random_element(rng, f)).collect();
    Matrix::new(f, n, n, entries).unwrap()
}

fn random_diagonal(rng: &mut SplitMix64, f: &Field, n: usize) -> DiagonalMatrix {
    DiagonalMatrix::new(f, (0..n).map(|_| random_nonzero(rng, f)).collect()).unwrap()
}

fn field_axioms(f: &Field, rng: &mut SplitMix64, triples: u32) -> bool {
    for _ in 0..triples {
        let (a, b, c) = (random_element(rng, f), random_element(rng, f), random_element(rng, f));
        let ok = f.mul(a, b) == f.mul(b, a)
            && f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
            && f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
            && f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
            && f.add(a, a).is_zero()
            && f.mul(a, Element::ONE) == a
            && f.mul(a, b) == f.mul_schoolbook(a, b)
            && f.square(f.add(a, b)) == f.add(f.square(a), f.square(b))
            && (a.is_zero() || f.mul(a, f.inv(a).unwrap()) == Element::ONE);
        if !ok {
            return false;
        }
    }
    true
}

fn sandwich_exactness(rng: &mut SplitMix64) -> bool {
    let f = Field::new(8, 0x11D).unwrap();
    (0..2000).all(|i| {
        let n = 1 + i % 6;
        let a = random_matrix(rng, &f, n);
        let (d1, d2) = (random_diagonal(rng, &f, n), random_diagonal(rng, &f, n));
        let full = d1.to_matrix().mul(&a).unwrap().mul(&d2.to_matrix()).unwrap();
        a.sandwich(&d1, &d2).unwrap() == full
    })
}

/// Every semi-orthogonal circulant of order 3 over GF(8): the reported pair
/// satisfies the relation exactly, every rescaling does too, and the solution
/// anchored at the last index is a rescaling of the first-anchored one.
fn scalar_freedom_orbit() -> (bool, usize) {
    let f = gf8();
    let found = search(&SearchConfig {
        field: f.clone(),
        order: 3,
        require: vec![Requirement::SemiOrthogonal],
        mode: Mode::Exhaustive,
        jobs: 1,
        budget: DEFAULT_BUDGET,
        limit: usize::MAX,
    })
    .unwrap()
    .found;
    let ok = found.iter().all(|c| {
        let a = Circulant::new(&f, c.first_row.clone().unwrap()).unwrap().build();
        let target = a.inverse().unwrap().transpose();
        let pair = c.semi_orthogonal.pair.as_ref().unwrap();
        let orbit = f
            .nonzero_elements()
            .all(|k| pair.rescaled(k).unwrap().relates(&a, &target));
        let last = diagonal_scaling_solve_anchored(&a, &target, Anchor::Last)
            .unwrap()
            .unwrap();
        let ratio = f.div(last.d1.get(0), pair.d1.get(0)).unwrap();
        let same_orbit = last.d1.entries() == pair.d1.scale(ratio).entries()
            && last.d2.entries() == pair.d2.scale(f.inv(ratio).unwrap()).entries();
        pair.relates(&a, &target) && orbit && same_orbit
    });
    (ok, found.len())
}

fn mds_scaling_invariance(rng: &mut SplitMix64) -> (bool, usize) {
    let mut mds_seen = 0;
    let fields = [gf8(), Field::new(8, 0x11D).unwrap()];
    let ok = (0..3000).all(|i| {
        let f = &fields[i % 2];
        let n = 2 + i % 3;
        let a = random_matrix(rng, f, n);
        let (d1, d2) = (random_diagonal(rng, f, n), random_diagonal(rng, f, n));
        let base = is_mds(&a).unwrap().is_mds;
        mds_seen += usize::from(base);
        base == is_mds(&a.sandwich(&d1, &d2).unwrap()).unwrap().is_mds
            && base == is_mds(&a.transpose()).unwrap().is_mds
    });
    (ok, mds_seen)
}

fn deterministic_reports() -> bool {
    let configs = [
        ScanConfig::new(&gf8(), 4, Suite::for_order(4)),
        ScanConfig::new(&Field::new(8, 0x11D).unwrap(), 3, vec![Suite::SoOddExist])
            .random(DEFAULT_SEED, 5000),
    ];
    configs.iter().all(|config| {
        let reference = run_suite_sequential(config).unwrap().without_timing();
        let text = serde_json::to_string(&reference).unwrap();
        [1, 2, 3, 4].into_iter().all(|jobs| {
            let r = run_suite(&config.clone().jobs(jobs)).unwrap().without_timing();
            r == reference && serde_json::to_string(&r).unwrap() == text
        })
    })
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    let mut power = SideInvariant::default();

    results.push(criterion(1, "example 1 golden test", secs(1), || example(1)));
    results.push(criterion(2, "example 2 golden test", secs(1), || example(2)));
    results.push(criterion(3, "AES circulant sanity", secs(1), || {
        let a = Circulant::from_hex(&aes_field(), AES_ROW).unwrap().build();
        let mds = is_mds(&a).unwrap().is_mds;
        let (inv, orth) = (is_involutory(&a), is_orthogonal(&a));
        Outcome::new(
            mds && !inv && !orth,
            format!("mds {mds}, involutory {inv}, orthogonal {orth}"),
        )
    }));

    let small = [gf4(), gf8()];
    let cases = |orders: &[usize], suites: &[Suite]| -> Vec<(Field, usize, Vec<Suite>)> {
        small
            .iter()
            .flat_map(|f| orders.iter().map(move |&n| (f.clone(), n, suites.to_vec())))
            .collect()
    };
    let jobs = 4;
    let mut scratch = SideInvariant::default();
    results.push(criterion(4, "INV-NONE exhaustive", secs(60), || {
        clean_scans(&cases(&[3, 4, 5], &[Suite::InvNone]), jobs, Some(secs(10)), &mut scratch)
    }));
    results.push(criterion(5, "ORTH-NONE exhaustive", secs(20), || {
        clean_scans(&cases(&[4], &[Suite::OrthNone]), jobs, Some(secs(10)), &mut scratch)
    }));
    results.push(criterion(6, "SO-POW2 and SI-POW2 exhaustive", secs(30), || {
        clean_scans(&cases(&[2, 4], &[Suite::SoPow2, Suite::SiPow2]), jobs, None, &mut power)
    }));
    results.push(criterion(7, "SO-MOD2 exhaustive over GF(8), order 6", secs(300), || {
        clean_scans(&[(gf8(), 6, vec![Suite::SoMod2])], jobs, None, &mut power)
    }));
    results.push(criterion(8, "SI-GEN exhaustive over GF(8), orders 3, 5, 6", secs(300), || {
        let cases: Vec<_> = [3, 5, 6].iter().map(|&n| (gf8(), n, vec![Suite::SiGen])).collect();
        clean_scans(&cases, jobs, None, &mut power)
    }));
    results.push(criterion(9, "oracle equivalence", secs(120), || {
        let mut ok = true;
        let mut notes = Vec::new();
        for (f, n) in [(gf4(), 2), (gf4(), 3), (gf8(), 3)] {
            let r = oracle_equivalence(&f, n, jobs).unwrap();
            ok &= r.passed() && r.matrices == u64::from(f.size()).pow(n as u32);
            power.checked += r.power_scalar.checked;
            power.failures += r.power_scalar.failures;
            notes.push(format!("{} n={} {}/{}", r.field, n, r.agreements, r.matrices));
        }
        Outcome::new(ok, notes.join("; "))
    }));
    results.push(criterion(10, "power-scalar side invariant", secs(1), || {
        Outcome::new(
            power.failures == 0 && power.checked > 0,
            format!("{} instances, {} failures", power.checked, power.failures),
        )
    }));
    results.push(criterion(11, "property suites", secs(300), || {
        let mut rng = SplitMix64::seed_from_u64(DEFAULT_SEED);
        let fields = [
            (2, 0x7),
            (3, 0xB),
            (4, 0x13),
            (8, 0x11B),
            (8, 0x11D),
            (13, 0x201B),
            (16, 0x1100B),
        ];
        let axioms = fields
            .iter()
            .all(|&(m, p)| field_axioms(&Field::new(m, p).unwrap(), &mut rng, 100_000));
        let sandwich = sandwich_exactness(&mut rng);
        let (orbit, orbit_rows) = scalar_freedom_orbit();
        let (mds, mds_seen) = mds_scaling_invariance(&mut rng);
        let determinism = deterministic_reports();
        Outcome::new(
            axioms && sandwich && orbit && mds && determinism && orbit_rows > 0 && mds_seen > 0,
            format!(
                "field axioms {axioms}, sandwich {sandwich}, orbit {orbit} ({orbit_rows} rows), \
                 MDS scaling {mds} ({mds_seen} MDS), determinism {determinism}"
            ),
        )
    }));

    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed} of {} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
