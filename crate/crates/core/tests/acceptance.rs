//! End-to-end acceptance suite. Runs every criterion, prints one PASS/FAIL
//! line each and exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schur_core::calculus::delta_report;
use schur_core::pingpong::{self, Case, Mode, Outcome, SurveyMode, VolleyParams};
use schur_core::search::{self, Rule};
use schur_core::{
    certify_local_min, count_fast, count_naive, make_extension, make_zinf, make_zs, Objective,
    RColoring,
};

/// Largest `|F(Z_0) - n^2/22| / n` over the criterion-1 sizes, from the first
/// oracle run (observed 0.31818 at every size).
const WINNER_LINEAR_BOUND: f64 = 0.32;
/// `F(Z_0(n))` for n = 1100, 2200, 4400, 8800, from an independent evaluator.
const WINNER_F: [(usize, u64); 4] = [
    (1100, 54_650),
    (2200, 219_300),
    (4400, 878_600),
    (8800, 3_517_200),
];
/// Band half-widths of `22 F / n^2` around 1, tightening from n = 1100 to 8800.
const WINNER_BAND: [f64; 4] = [0.10, 0.0733, 0.0467, 0.02];

const FAMILY_BAND: f64 = 0.05;
/// `F(Z_s)` at n = (12s+11) 800, from an independent evaluator.
const FAMILY_F: [u64; 5] = [3_517_200, 18_394_400, 44_791_200, 82_708_400, 132_145_200];
const MATCHED_N: usize = 10_000;
/// `F(Z_s(10000))` for s = 0..4.
const MATCHED_F: [u64; 5] = [4_542_273, 5_431_740, 5_711_142, 5_847_980, 5_929_069];

/// `F(Z_inf^t)` at n = 1000 t for t = 3, 7, 11.
const PLATEAU_F: [(usize, u64); 3] = [(3, 561_750), (7, 3_060_750), (11, 7_559_750)];

/// Linear constants `B_r` of the extension bound for r = 2, 3, 4; the first
/// oracle run found every total below the quadratic term.
const EXTENSION_LINEAR_BOUND: [f64; 3] = [0.0, 0.0, 0.0];

const RANDOM_DERIVATIVE_CHECKS: usize = 10_000;
const RANDOM_COUNTS_PER_PALETTE: usize = 200;
const RESTARTS: usize = 500;
const SEED: u64 = search::DEFAULT_SEED;

const FAST_LIMIT: Duration = Duration::from_secs(10);
const NAIVE_LIMIT: Duration = Duration::from_secs(5);
const BRUTE_LIMIT: Duration = Duration::from_secs(300);

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn f_of(c: &RColoring) -> u64 {
    count_fast(c).total
}

fn random_coloring(rng: &mut ChaCha8Rng, r: usize, n: usize) -> RColoring {
    let colors = (0..n).map(|_| rng.gen_range(0..r as u8)).collect();
    RColoring::new(r, colors).unwrap()
}

fn winner_constant() -> Verdict {
    let mut worst = 0f64;
    for (&(n, expected), band) in WINNER_F.iter().zip(WINNER_BAND) {
        let f = f_of(&make_zs(0, n).map_err(|e| e.to_string())?);
        check(
            f == expected,
            format!("F(Z_0({n})) = {f}, oracle {expected}"),
        )?;
        let nf = n as f64;
        let residual = (f as f64 - nf * nf / 22.0).abs() / nf;
        worst = worst.max(residual);
        check(
            residual <= WINNER_LINEAR_BOUND,
            format!("n={n}: residual/n = {residual:.5} > {WINNER_LINEAR_BOUND}"),
        )?;
        let coeff = 22.0 * f as f64 / (nf * nf);
        check(
            (coeff - 1.0).abs() <= band,
            format!("n={n}: 22F/n^2 = {coeff:.5} outside 1 +- {band}"),
        )?;
    }
    Ok(format!(
        "max residual/n = {worst:.5} <= {WINNER_LINEAR_BOUND}"
    ))
}

fn family_coefficients() -> Verdict {
    let mut coeffs = Vec::new();
    for s in 0..5u64 {
        let n = (12 * s as usize + 11) * 800;
        let f = f_of(&make_zs(s, n).map_err(|e| e.to_string())?);
        check(f == FAMILY_F[s as usize], format!("F(Z_{s}({n})) = {f}"))?;
        let nf = n as f64;
        let coeff = 16.0 * (12 * s + 11) as f64 * f as f64 / ((12 * s + 8) as f64 * nf * nf);
        check(
            (coeff - 1.0).abs() <= FAMILY_BAND,
            format!("s={s}: coefficient {coeff:.5} outside the band"),
        )?;
        coeffs.push(coeff);
    }
    let mut previous = 0u64;
    for s in 0..5u64 {
        let f = f_of(&make_zs(s, MATCHED_N).map_err(|e| e.to_string())?);
        check(
            f == MATCHED_F[s as usize],
            format!("F(Z_{s}({MATCHED_N})) = {f}"),
        )?;
        check(f > previous, format!("F/n^2 not increasing at s={s}"))?;
        previous = f;
    }
    let shown: Vec<String> = coeffs.iter().map(|c| format!("{c:.5}")).collect();
    Ok(format!(
        "coefficients [{}], increasing at n={MATCHED_N}",
        shown.join(", ")
    ))
}

fn plateau() -> Verdict {
    let mut shown = Vec::new();
    for (t, expected) in PLATEAU_F {
        let n = 2 * t * 500;
        let f = f_of(&make_zinf(t, n).map_err(|e| e.to_string())?);
        check(
            f == expected,
            format!("F(Z_inf^{t}({n})) = {f}, oracle {expected}"),
        )?;
        let coeff = 16.0 * f as f64 / (n as f64).powi(2);
        check(
            (coeff - 1.0).abs() <= FAMILY_BAND,
            format!("t={t}: 16F/n^2 = {coeff:.5}"),
        )?;
        shown.push(format!("t={t}:{coeff:.5}"));
    }
    Ok(shown.join(" "))
}

fn extension_bound() -> Verdict {
    let mut shown = Vec::new();
    for (i, r) in (2..=4usize).enumerate() {
        let n = (1 << (r - 2)) * 11 * 400;
        let total = f_of(&make_extension(r, n).map_err(|e| e.to_string())?);
        let nf = n as f64;
        let bound = nf * nf / ((1u64 << (2 * r - 3)) as f64 * 11.0);
        let limit = bound + EXTENSION_LINEAR_BOUND[i] * nf;
        check(
            total as f64 <= limit,
            format!("r={r} n={n}: {total} > {limit:.1}"),
        )?;
        shown.push(format!("r={r}:{total}<={bound:.0}"));
    }
    Ok(shown.join(" "))
}

fn derivative_closed_forms() -> Verdict {
    let mut checks = 0usize;
    for n in 1..=12 {
        for mask in 0u64..(1 << n) {
            let c = RColoring::from_mask(mask, n).unwrap();
            for r in 1..=n {
                let report = delta_report(&c, r).unwrap();
                check(report.agree, format!("{c} r={r}: {report:?}"))?;
                checks += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..RANDOM_DERIVATIVE_CHECKS {
        let n = rng.gen_range(1..=2000);
        let c = random_coloring(&mut rng, 2, n);
        let r = rng.gen_range(1..=n);
        let report = delta_report(&c, r).unwrap();
        check(report.agree, format!("random n={n} r={r}: {report:?}"))?;
        checks += 1;
    }
    Ok(format!("{checks} exact agreements"))
}

fn recurrence_equivalence() -> Verdict {
    let mut pairs = 0usize;
    for n in 1..=14 {
        let minima = search::brute_local_minima(n, Objective::G).map_err(|e| e.to_string())?;
        let minima = minima.local_minima.expect("local minima requested");
        for k in 0..=n {
            let expected: BTreeSet<Vec<u8>> = minima
                .iter()
                .filter(|c| c.ones() == k)
                .map(|c| c.colors().to_vec())
                .collect();
            let params = VolleyParams::new(n, k).map_err(|e| e.to_string())?;
            let e = pingpong::solve(params, u64::MAX, Mode::ConsistentOnly)
                .map_err(|e| e.to_string())?;
            check(
                e.outcome == Outcome::Complete,
                format!("n={n} k={k} truncated"),
            )?;
            let found: BTreeSet<Vec<u8>> = e
                .solutions
                .iter()
                .map(|s| s.bits.colors().to_vec())
                .collect();
            check(
                found == expected,
                format!(
                    "n={n} k={k}: {} solutions vs {} minima",
                    found.len(),
                    expected.len()
                ),
            )?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (n, k) pairs match"))
}

fn counter_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for r in 2..=4 {
        for _ in 0..RANDOM_COUNTS_PER_PALETTE {
            let n = rng.gen_range(1..=2000);
            let c = random_coloring(&mut rng, r, n);
            check(
                count_fast(&c) == count_naive(&c, false),
                format!("r={r} n={n}"),
            )?;
        }
    }
    Ok(format!("{} colorings", 3 * RANDOM_COUNTS_PER_PALETTE))
}

fn small_n_ground_truth() -> Verdict {
    let mut values = Vec::new();
    for n in 1..=22 {
        let brute = search::brute_global_min(n).map_err(|e| e.to_string())?;
        let multi = search::multistart(n, RESTARTS, SEED, Rule::BestImprovement)
            .map_err(|e| e.to_string())?;
        check(
            brute.min_value == multi.value,
            format!(
                "n={n}: brute {} vs multistart {}",
                brute.min_value, multi.value
            ),
        )?;
        let cert = certify_local_min(&multi.best, Objective::F).map_err(|e| e.to_string())?;
        check(
            cert.is_local_min,
            format!("n={n}: endpoint {} not certified", multi.best),
        )?;
        values.push(brute.min_value.to_string());
    }
    // descents under both rules from seeded random starts
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..200 {
        let n = rng.gen_range(1..=300);
        let start = random_coloring(&mut rng, 2, n);
        for rule in [Rule::BestImprovement, Rule::FirstImprovement] {
            let end = search::descend(&start, rule).map_err(|e| e.to_string())?;
            let cert = certify_local_min(&end.best, Objective::F).map_err(|e| e.to_string())?;
            check(
                cert.is_local_min,
                format!("descent from {start} ({rule:?}) not certified"),
            )?;
        }
    }
    Ok(format!("minima n=1..22: {}", values.join(",")))
}

fn survey_clustering() -> Verdict {
    let mut shown = Vec::new();
    for m in [4usize, 8] {
        let n = 11 * m;
        let rows = pingpong::survey_w(
            n,
            SurveyMode::Exhaustive {
                budget: pingpong::DEFAULT_BUDGET,
            },
            pingpong::DEFAULT_SLACK,
        )
        .map_err(|e| e.to_string())?;
        let row = rows
            .iter()
            .find(|row| row.w == m as i64)
            .ok_or(format!("n={n}: no row at w={m}"))?;
        check(
            row.consistent_count > 0,
            format!("n={n}: no consistent solutions at w={m}"),
        )?;
        let label = row.representative_label.as_ref().expect("non-empty row");
        check(
            label.case == Case::III && label.s == Some(0),
            format!("n={n}: representative labelled {label}"),
        )?;
        let truncated = rows.iter().filter(|row| row.truncated).count();
        shown.push(format!(
            "n={n} w={m}: {} solutions, representative {} ({truncated} rows truncated)",
            row.consistent_count,
            label.tag()
        ));
    }
    Ok(shown.join("; "))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn performance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let big = random_coloring(&mut rng, 2, 1_000_000);
    let (_, fast) = timed(|| count_fast(&big));
    check(
        fast <= FAST_LIMIT,
        format!("count_fast(10^6) took {fast:?}"),
    )?;
    let mid = random_coloring(&mut rng, 2, 20_000);
    let (_, naive) = timed(|| count_naive(&mid, false));
    check(
        naive <= NAIVE_LIMIT,
        format!("count_naive(2*10^4) took {naive:?}"),
    )?;
    let (brute, elapsed) = timed(|| search::brute_global_min(24));
    brute.map_err(|e| e.to_string())?;
    check(
        elapsed <= BRUTE_LIMIT,
        format!("brute_global_min(24) took {elapsed:?}"),
    )?;
    Ok(format!(
        "count_fast {fast:.2?}, count_naive {naive:.2?}, brute(24) {elapsed:.2?}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("winner constant", winner_constant),
        ("family coefficients", family_coefficients),
        ("plateau", plateau),
        ("extension bound", extension_bound),
        ("derivative closed forms", derivative_closed_forms),
        ("recurrence equivalence", recurrence_equivalence),
        ("counter equivalence", counter_equivalence),
        ("small-n ground truth", small_n_ground_truth),
        ("survey clustering", survey_clustering),
        ("performance", performance),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
