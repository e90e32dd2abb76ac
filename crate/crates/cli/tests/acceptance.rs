//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use sdrdu_cli::theorem;
use sdrdu_core::dominance::{dominates_n, grid_oracle, DEFAULT_TOL};
use sdrdu_core::indices::{greediness, pessimism, q_index, Extended};
use sdrdu_core::lab::{
    counterexample_sweep, falsify, random_distribution, random_nsd_pair_with, trial_rng,
    FalsifyConfig, SweepConfig, DEFAULT_TRIAL_CAP,
};
use sdrdu_core::rdu::{rdu_eval, Preference, RduModel};
use sdrdu_core::utility::is_n_monotone;
use sdrdu_core::{Distribution, UtilityFunction as U, WeightingFunction as H};

const TOL: f64 = DEFAULT_TOL;
const ORACLE_GRID: usize = 10_000;
const BRUTE_GRID: usize = 200;

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!("{}; {:.2?}", out.detail, elapsed);
    if let Some(limit) = limit {
        if elapsed >= limit {
            out.passed = false;
            out.detail = format!("{} exceeds {:?}", out.detail, limit);
        }
    }
    out
}

fn sym() -> sdrdu_core::Domain {
    theorem::domain()
}

// Expectation and minimum computed straight from the atoms.
fn mixture_by_hand(u: &U, lambda: f64, x: &Distribution) -> f64 {
    let mean: f64 = x.atoms().map(|(v, p)| p * u.value(v).unwrap()).sum();
    let worst = x
        .support()
        .iter()
        .map(|&v| u.value(v).unwrap())
        .fold(f64::INFINITY, f64::min);
    lambda * mean + (1.0 - lambda) * worst
}

fn c1_lambda_identity() -> Outcome {
    let mut max_gap: f64 = 0.0;
    for t in 0..10_000u64 {
        let mut rng = trial_rng(101, t);
        let u = theorem::random_utility(&mut rng);
        let lambda: f64 = rng.gen();
        let x = random_distribution(sym(), theorem::MAX_ATOMS, &mut rng).unwrap();
        let model = RduModel::new(u.clone(), H::lambda_jump(lambda).unwrap());
        let value = rdu_eval(&model, &x).unwrap();
        max_gap = max_gap.max((value - mixture_by_hand(&u, lambda, &x)).abs());
    }
    outcome(
        max_gap <= 1e-10,
        format!("10000 triples, max gap {max_gap:.3e}"),
    )
}

fn c2_indicator_identity() -> Outcome {
    let mut mismatches = 0;
    for t in 0..1_000u64 {
        let mut rng = trial_rng(202, t);
        let u = theorem::random_utility(&mut rng);
        let x = random_distribution(sym(), theorem::MAX_ATOMS, &mut rng).unwrap();
        let value = rdu_eval(&RduModel::new(u.clone(), H::indicator_one()), &x).unwrap();
        let worst = u.value(x.support()[0]).unwrap();
        if value.to_bits() != worst.to_bits() {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("1000 pairs, {mismatches} not bit-equal"),
    )
}

fn c3_sufficiency() -> Outcome {
    let d = sym();
    let utilities = [U::identity(d), U::exponential(d, 1.0).unwrap()];
    let config = FalsifyConfig {
        trials: 10_000,
        seed: 303,
        ..FalsifyConfig::default()
    };
    let mut runs = 0;
    let mut failures = Vec::new();
    for u in &utilities {
        for n in theorem::ORDERS {
            if !is_n_monotone(u, n).unwrap().holds {
                failures.push(format!("{:?} not {n}-monotone", u.form()));
            }
        }
        for lambda in theorem::LAMBDAS {
            let model = RduModel::new(u.clone(), H::lambda_jump(lambda).unwrap());
            for n in theorem::ORDERS {
                runs += 1;
                let report = falsify(&model, d, n, &config).unwrap();
                if let Some(v) = report.violation {
                    failures.push(format!(
                        "{:?} lambda={lambda} n={n}: gap {:.3e}",
                        u.form(),
                        v.gap
                    ));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{runs} falsify runs of 10000 trials, {} failures {failures:?}",
            failures.len()
        ),
    )
}

fn c4_necessity() -> Outcome {
    let model = RduModel::dual(H::power(2.0).unwrap(), sym());
    let report = counterexample_sweep(
        &model,
        sym(),
        3,
        &SweepConfig::default(),
        theorem::NECESSITY_GAP,
        TOL,
    )
    .unwrap();
    let Some(v) = report.violation else {
        return outcome(
            false,
            format!("no violation in {} points", report.points_examined),
        );
    };
    // Re-derive everything from the returned pair.
    let exact = dominates_n(&v.dominant, &v.dominated, 3, TOL)
        .unwrap()
        .holds;
    let grid = grid_oracle(&v.dominant, &v.dominated, 3, ORACLE_GRID, TOL)
        .unwrap()
        .holds;
    let gap = model.evaluate(&v.dominated).unwrap() - model.evaluate(&v.dominant).unwrap();
    let passed = exact && grid && gap > 1e-6 && report.points_examined <= 1_000;
    outcome(
        passed,
        format!(
            "violation at sweep point {}, gap {gap:.3e}",
            report.points_examined
        ),
    )
}

fn c5_oracle_equivalence() -> Outcome {
    let mut compared = 0;
    let mut excluded = 0;
    let mut disagreements = Vec::new();
    for n in 1..=5u32 {
        let mut pairs: Vec<(Distribution, Distribution)> = Vec::with_capacity(1_000);
        for t in 0..500u64 {
            let mut rng = trial_rng(500 + u64::from(n), t);
            let x = random_distribution(sym(), 6, &mut rng).unwrap();
            let y = random_distribution(sym(), 6, &mut rng).unwrap();
            pairs.push((x, y));
        }
        for t in 0..250u64 {
            let mut rng = trial_rng(550 + u64::from(n), t);
            let pair =
                random_nsd_pair_with(sym(), n, 4, DEFAULT_TRIAL_CAP * 10, TOL, &mut rng).unwrap();
            pairs.push((pair.better.clone(), pair.worse.clone()));
            pairs.push((pair.worse, pair.better));
        }
        for (x, y) in &pairs {
            let exact = dominates_n(x, y, n, TOL).unwrap();
            let grid = grid_oracle(x, y, n, ORACLE_GRID, TOL).unwrap();
            compared += 1;
            if exact.holds != grid.holds {
                if exact.marginal && grid.marginal {
                    excluded += 1;
                } else {
                    disagreements.push((n, exact.max_gap, grid.max_gap));
                }
            }
        }
    }
    outcome(
        disagreements.is_empty(),
        format!(
            "{compared} pairs, {} disagreements, {excluded} inside the marginal band {:?}",
            disagreements.len(),
            &disagreements[..disagreements.len().min(5)]
        ),
    )
}

fn c6_chain() -> Outcome {
    let mut checked = 0;
    let mut exceptions = Vec::new();
    for n in 1..=4u32 {
        let mut t = 0u64;
        let mut verified = 0;
        while verified < 1_000 {
            let mut rng = trial_rng(600 + u64::from(n), t);
            t += 1;
            let pair =
                random_nsd_pair_with(sym(), n, 4, DEFAULT_TRIAL_CAP * 10, TOL, &mut rng).unwrap();
            if !grid_oracle(&pair.better, &pair.worse, n, ORACLE_GRID, TOL)
                .unwrap()
                .holds
            {
                continue;
            }
            verified += 1;
            checked += 1;
            let next = dominates_n(&pair.better, &pair.worse, n + 1, TOL).unwrap();
            if !next.holds {
                exceptions.push((n, next.max_gap));
            }
        }
    }
    outcome(
        exceptions.is_empty(),
        format!(
            "{checked} oracle-verified pairs, {} exceptions {exceptions:?}",
            exceptions.len()
        ),
    )
}

fn c7_generators() -> Outcome {
    let config = FalsifyConfig {
        trials: 10_000,
        seed: 707,
        ..FalsifyConfig::default()
    };
    let mut runs = 0;
    let mut failures = Vec::new();
    for n in [3u32, 4] {
        for i in 0..20 {
            let eta = -1.0 + 0.1 * f64::from(i + 1);
            let u = U::negative_power(sym(), eta, n - 1).unwrap();
            let model = RduModel::new(u, H::identity());
            runs += 1;
            if let Some(v) = falsify(&model, sym(), n, &config).unwrap().violation {
                failures.push((n, eta, v.gap));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{runs} falsify runs, violations {failures:?}"),
    )
}

fn brute_grid(lo: f64, hi: f64) -> Vec<f64> {
    (0..BRUTE_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (BRUTE_GRID - 1) as f64)
        .collect()
}

/// Extremal chord(x3, x4) / chord(x1, x2) over grid quadruples
/// x1 < x2 <= x3 < x4.
fn brute_chord_ratio(f: impl Fn(f64) -> f64, lo: f64, hi: f64, sup: bool) -> f64 {
    let xs = brute_grid(lo, hi);
    let v: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let chord = |i: usize, j: usize| (v[j] - v[i]) / (xs[j] - xs[i]);
    let mut best = if sup {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    for i in 0..BRUTE_GRID {
        for j in i + 1..BRUTE_GRID {
            let den = chord(i, j);
            for k in j..BRUTE_GRID {
                for l in k + 1..BRUTE_GRID {
                    let r = chord(k, l) / den;
                    if (sup && r > best) || (!sup && r < best) {
                        best = r;
                    }
                }
            }
        }
    }
    best
}

fn brute_pessimism(h: &H) -> f64 {
    brute_grid(0.0, 1.0)[1..BRUTE_GRID - 1]
        .iter()
        .map(|&s| {
            let v = h.eval(s).unwrap();
            (1.0 - v) * s / ((1.0 - s) * v)
        })
        .fold(f64::INFINITY, f64::min)
}

fn c8_indices() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |name: &str,
                     value: Extended<f64>,
                     expected: f64,
                     tol: f64,
                     oracle: f64,
                     oracle_tol: f64| {
        let v = value.finite().unwrap_or(f64::INFINITY);
        let pass = (v - expected).abs() <= tol && (oracle - expected).abs() <= oracle_tol;
        ok &= pass;
        notes.push(format!("{name}={v} (oracle {oracle:.6})"));
    };

    let u = U::piecewise_linear(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
    let oracle = brute_chord_ratio(|x| u.value(x).unwrap(), 0.0, 2.0, true);
    check(
        "G(slopes 1,2)",
        greediness(&u).unwrap().value,
        2.0,
        1e-12,
        oracle,
        1e-9,
    );

    let id = H::identity();
    check(
        "P(identity)",
        pessimism(&id).unwrap().value,
        1.0,
        0.0,
        brute_pessimism(&id),
        1e-12,
    );

    // The grid infimum (1 + s) / s sits above 2 by about 1 / 198.
    let sq = H::power(2.0).unwrap();
    check(
        "P(power 2)",
        pessimism(&sq).unwrap().value,
        2.0,
        1e-5,
        brute_pessimism(&sq),
        6e-3,
    );

    // Slopes 2 and 1 on equal halves, normalized: values 0, 2/3, 1.
    let h = H::piecewise_linear(vec![0.0, 0.5, 1.0], vec![0.0, 2.0 / 3.0, 1.0]).unwrap();
    let oracle = brute_chord_ratio(|s| h.eval(s).unwrap(), 0.0, 1.0, false);
    check(
        "Q(slopes 2,1)",
        q_index(&h).unwrap().value,
        0.5,
        1e-12,
        oracle,
        1e-9,
    );

    outcome(ok, notes.join(", "))
}

fn c9_determinism() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let mut notes = Vec::new();
    let mut ok = true;
    for weighting in ["sq.json", "indicator.json"] {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_sdrdu"))
                .env_remove(sdrdu_cli::TOL_ENV)
                .args([
                    "falsify", "--n", "3", "--trials", "10000", "--seed", "7", "--domain", "-1,1",
                ])
                .arg("--weighting")
                .arg(data.join(weighting))
                .output()
                .unwrap()
        };
        let (a, b) = (run(), run());
        let same =
            a.stdout == b.stdout && !a.stdout.is_empty() && a.status.code() == b.status.code();
        ok &= same;
        notes.push(format!(
            "{weighting}: exit {:?}, {} bytes, identical={same}",
            a.status.code(),
            a.stdout.len()
        ));
    }
    outcome(ok, notes.join("; "))
}

fn main() -> ExitCode {
    // Keep the harness flags of `cargo test` from being misread.
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    if filter.iter().any(|f| !"acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }

    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [Criterion; 9] = [
        ("lambda-jump identity", secs(5), c1_lambda_identity),
        ("indicator identity", None, c2_indicator_identity),
        ("sufficiency", secs(60), c3_sufficiency),
        ("necessity sweep", secs(10), c4_necessity),
        (
            "dominance oracle equivalence",
            secs(30),
            c5_oracle_equivalence,
        ),
        ("chain property", None, c6_chain),
        ("generator spot check", None, c7_generators),
        ("index fixtures", None, c8_indices),
        ("determinism", None, c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let out = timed(limit, f);
        let verdict = if out.passed { "PASS" } else { "FAIL" };
        println!("criterion {} {verdict} {name}: {}", i + 1, out.detail);
        failed += usize::from(!out.passed);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
