//! The two consistency cases for rank-dependent utility at orders `n >= 3`:
//!
//! * (i) increasing `u` with `h = 1{s = 1}`, where `R(X) = min u(X)`;
//! * (ii) n-monotone `u` with `h(s) = lambda s 1{s < 1} + 1{s = 1}`, where
//!   `R(X) = lambda E[u(X)] + (1 - lambda) min u(X)`.
//!
//! Each case is checked through its closed form on random inputs and
//! through the falsifier; case (ii) also checks that a smooth convex
//! weighting other than the identity is caught by the construction sweep.

use rand::Rng;
use sdrdu_core::lab::{
    counterexample_sweep, falsify, random_distribution, trial_rng, FalsifyConfig, SweepConfig,
    Violation,
};
use sdrdu_core::rdu::{closed_form_lambda, rdu_eval, RduModel};
use sdrdu_core::{Domain, UtilityFunction, WeightingFunction};
use serde::{Deserialize, Serialize};

use crate::input::hash;
use crate::report::Row;
use crate::CliError;

pub const IDENTITY_TOL: f64 = 1e-10;
pub const MAX_ATOMS: usize = 50;
pub const NECESSITY_GAP: f64 = 1e-6;
pub const LAMBDAS: [f64; 4] = [0.0, 0.3, 0.7, 1.0];
pub const ORDERS: [u32; 3] = [3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    I,
    Ii,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub case_id: String,
    pub inputs_hash: String,
    pub lambda: f64,
    pub atoms: usize,
    pub value: f64,
    pub reference: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentitySuite {
    pub checked: usize,
    pub max_gap: f64,
    /// `0` in case (i): the values must agree bit for bit.
    pub threshold: f64,
    pub passed: bool,
    pub records: Vec<IdentityRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyRecord {
    pub case_id: String,
    pub inputs_hash: String,
    pub utility: String,
    pub lambda: f64,
    pub order: u32,
    pub random_pairs: usize,
    pub sweep_points: usize,
    pub violation: Option<Violation<f64>>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NecessityRecord {
    pub case_id: String,
    pub inputs_hash: String,
    pub weighting: WeightingFunction,
    pub points_examined: usize,
    pub violation: Option<Violation<f64>>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub case: Case,
    pub trials: usize,
    pub seed: u64,
    pub identity: IdentitySuite,
    pub consistency: Vec<ConsistencyRecord>,
    pub necessity: Option<NecessityRecord>,
    pub passed: bool,
}

impl TheoremSummary {
    pub fn rows(&self) -> Vec<Row> {
        let mut rows: Vec<Row> = self
            .identity
            .records
            .iter()
            .map(|r| Row {
                case_id: r.case_id.clone(),
                inputs_hash: r.inputs_hash.clone(),
                result: r.value.to_string(),
                gap: Some(r.gap),
                seed: self.seed,
            })
            .collect();
        for c in &self.consistency {
            rows.push(Row {
                case_id: c.case_id.clone(),
                inputs_hash: c.inputs_hash.clone(),
                result: if c.passed { "none" } else { "violation" }.into(),
                gap: c.violation.as_ref().map(|v| v.gap),
                seed: self.seed,
            });
        }
        if let Some(n) = &self.necessity {
            rows.push(Row {
                case_id: n.case_id.clone(),
                inputs_hash: n.inputs_hash.clone(),
                result: if n.violation.is_some() {
                    "violation"
                } else {
                    "none"
                }
                .into(),
                gap: n.violation.as_ref().map(|v| v.gap),
                seed: self.seed,
            });
        }
        rows
    }
}

pub fn domain() -> Domain {
    Domain::new(-1.0, 1.0).expect("valid domain")
}

/// Identity, exponential with `theta` in `[0.1, 3]`, or `-(eta - x)_+^m`
/// with `eta` in `(-1, 1]` and `m` in `1..=5`.
pub fn random_utility<R: Rng>(rng: &mut R) -> UtilityFunction {
    let d = domain();
    match rng.gen_range(0..3) {
        0 => UtilityFunction::identity(d),
        1 => UtilityFunction::exponential(d, 0.1 + 2.9 * rng.gen::<f64>()).expect("theta > 0"),
        _ => {
            let eta = 1.0 - 2.0 * rng.gen::<f64>();
            let m = rng.gen_range(1..=5);
            UtilityFunction::negative_power(d, eta, m).expect("eta > a")
        }
    }
}

/// Random `(u, lambda, X)` triples checked against the closed form.
pub fn identity_suite(case: Case, trials: usize, seed: u64) -> Result<IdentitySuite, CliError> {
    let mut records = Vec::with_capacity(trials);
    let mut max_gap: f64 = 0.0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let u = random_utility(&mut rng);
        let lambda = match case {
            Case::I => 0.0,
            Case::Ii => rng.gen::<f64>(),
        };
        let x = random_distribution(domain(), MAX_ATOMS, &mut rng)?;
        let (h, reference) = match case {
            Case::I => (WeightingFunction::indicator_one(), u.value(x.min())?),
            Case::Ii => (
                WeightingFunction::lambda_jump(lambda)?,
                closed_form_lambda(&u, lambda, &x)?,
            ),
        };
        let value = rdu_eval(&RduModel::new(u.clone(), h), &x)?;
        let gap = (value - reference).abs();
        max_gap = max_gap.max(gap);
        records.push(IdentityRecord {
            case_id: format!("identity-{t:05}"),
            inputs_hash: hash(&(&u, lambda, &x)),
            lambda,
            atoms: x.len(),
            value,
            reference,
            gap,
        });
    }
    let threshold = match case {
        Case::I => 0.0,
        Case::Ii => IDENTITY_TOL,
    };
    Ok(IdentitySuite {
        checked: trials,
        max_gap,
        threshold,
        passed: max_gap <= threshold,
        records,
    })
}

/// Utilities for the consistency runs with their labels.
pub fn consistency_utilities(case: Case) -> Vec<(String, UtilityFunction)> {
    let d = domain();
    let mut out = vec![
        ("identity".to_string(), UtilityFunction::identity(d)),
        (
            "exponential(theta=1)".to_string(),
            UtilityFunction::exponential(d, 1.0).expect("theta > 0"),
        ),
    ];
    if case == Case::I {
        // Increasing but not concave.
        out.push((
            "power(gamma=3)".to_string(),
            UtilityFunction::power(d, 3.0).expect("integer gamma"),
        ));
        out.push((
            "piecewise_linear(convex)".to_string(),
            UtilityFunction::piecewise_linear(vec![-1.0, 0.0, 1.0], vec![-1.0, -0.8, 1.0])
                .expect("increasing"),
        ));
    }
    out
}

pub fn consistency_suite(
    case: Case,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<ConsistencyRecord>, CliError> {
    let lambdas: &[f64] = match case {
        Case::I => &[0.0],
        Case::Ii => &LAMBDAS,
    };
    let config = FalsifyConfig {
        trials,
        seed,
        tol,
        ..FalsifyConfig::default()
    };
    let mut out = Vec::new();
    for (label, u) in consistency_utilities(case) {
        for &lambda in lambdas {
            let h = match case {
                Case::I => WeightingFunction::indicator_one(),
                Case::Ii => WeightingFunction::lambda_jump(lambda)?,
            };
            let model = RduModel::new(u.clone(), h);
            for n in ORDERS {
                let report = falsify(&model, domain(), n, &config)?;
                out.push(ConsistencyRecord {
                    case_id: format!("consistency/{label}/lambda={lambda}/n={n}"),
                    inputs_hash: hash(&(&model, n, trials)),
                    utility: label.clone(),
                    lambda,
                    order: n,
                    random_pairs: report.random_pairs,
                    sweep_points: report.sweep_points,
                    passed: report.violation.is_none(),
                    violation: report.violation,
                });
            }
        }
    }
    Ok(out)
}

/// Dual utility with `h(s) = s^2` must be caught within the default sweep.
pub fn necessity_check(tol: f64) -> Result<NecessityRecord, CliError> {
    let h = WeightingFunction::power(2.0)?;
    let model = RduModel::dual(h.clone(), domain());
    let report = counterexample_sweep(
        &model,
        domain(),
        3,
        &SweepConfig::default(),
        NECESSITY_GAP,
        tol,
    )?;
    Ok(NecessityRecord {
        case_id: "necessity/power(gamma=2)/n=3".into(),
        inputs_hash: hash(&(&model, 3)),
        weighting: h,
        points_examined: report.points_examined,
        passed: report.violation.is_some(),
        violation: report.violation,
    })
}

pub fn verify(case: Case, trials: usize, seed: u64, tol: f64) -> Result<TheoremSummary, CliError> {
    let identity = identity_suite(case, trials, seed)?;
    let consistency = if trials > 0 {
        consistency_suite(case, trials, seed, tol)?
    } else {
        Vec::new()
    };
    let necessity = match case {
        Case::I => None,
        Case::Ii => Some(necessity_check(tol)?),
    };
    let passed = identity.passed
        && consistency.iter().all(|c| c.passed)
        && necessity.as_ref().is_none_or(|n| n.passed);
    Ok(TheoremSummary {
        case,
        trials,
        seed,
        identity,
        consistency,
        necessity,
        passed,
    })
}
