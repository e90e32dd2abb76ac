//! Generators of dominance-ordered pairs and a search for consistency
//! violations of a preference functional.
//!
//! Every generated pair is checked with [`dominates_n`] before it is used;
//! no generator assumes a direction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDistribution, Domain};
use crate::dominance::{dominates_n, DominanceVerdict, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::rdu::Preference;
use crate::scalar::Scalar;

/// Smallest functional gap reported as a violation.
pub const VIOLATION_GAP: f64 = 1e-8;
/// Default number of draws per ordered pair before giving up.
pub const DEFAULT_TRIAL_CAP: usize = 1000;
pub const DEFAULT_ATOM_BUDGET: usize = 4;

/// Parameters of the two-state construction with attached zero-mean noise
/// `(1 - 1/n) delta_{n eps} + (1/n) delta_{-n(n-1) eps}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct LemmaParams<S: Scalar> {
    pub n_param: u32,
    pub alpha: S,
    pub epsilon: S,
    pub y: S,
    pub z: S,
    pub domain: Domain<S>,
}

impl<S: Scalar> LemmaParams<S> {
    /// Checks `b >= y + n eps > n eps > y > 0 > y - n(n-1) eps > -n(n-1) eps > z >= a`
    /// together with `alpha in (0, 1)` and `y <= eps`.
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| {
            Err(Error::validation(
                "lemma params",
                format!("{what} does not hold"),
            ))
        };
        let (a, b) = (self.domain.lo(), self.domain.hi());
        let n = S::from_u32(self.n_param).unwrap();
        let (eps, y, z) = (self.epsilon, self.y, self.z);
        let spread = n * (n - S::one()) * eps;
        if self.n_param < 1 {
            return fail("n >= 1");
        }
        if !(self.alpha > S::zero() && self.alpha < S::one()) {
            return fail("0 < alpha < 1");
        }
        if !(eps > S::zero()) {
            return fail("eps > 0");
        }
        if !(y <= eps) {
            return fail("y <= eps");
        }
        if !(b >= y + n * eps) {
            return fail("b >= y + n eps");
        }
        if !(y + n * eps > n * eps) {
            return fail("y + n eps > n eps");
        }
        if !(n * eps > y) {
            return fail("n eps > y");
        }
        if !(y > S::zero()) {
            return fail("y > 0");
        }
        if !(S::zero() > y - spread) {
            return fail("0 > y - n(n-1) eps");
        }
        if !(y - spread > -spread) {
            return fail("y - n(n-1) eps > -n(n-1) eps");
        }
        if !(-spread > z) {
            return fail("-n(n-1) eps > z");
        }
        if !(z >= a) {
            return fail("z >= a");
        }
        Ok(())
    }

    /// The attached noise as `[(outcome, probability); 2]`.
    pub fn noise(&self) -> [(S, S); 2] {
        let n = S::from_u32(self.n_param).unwrap();
        let inv = S::one() / n;
        [
            (n * self.epsilon, S::one() - inv),
            (-(n * (n - S::one()) * self.epsilon), inv),
        ]
    }
}

/// Builds `(X, Y)` with `Y >=_3 X`:
/// `X` carries the noise on the state `0` and `Y` carries it on the state `y`.
pub fn lemma_pair<S: Scalar>(
    params: &LemmaParams<S>,
) -> Result<(DiscreteDistribution<S>, DiscreteDistribution<S>)> {
    params.validate()?;
    let n = S::from_u32(params.n_param).unwrap();
    let half = S::lit(0.5);
    let (alpha, eps, y, z) = (params.alpha, params.epsilon, params.y, params.z);
    let hi_p = (half - half / n) * alpha;
    let lo_p = half / n * alpha;
    let up = n * eps;
    let down = -(n * (n - S::one()) * eps);
    let x = DiscreteDistribution::new(
        params.domain,
        vec![up, down, y, z],
        vec![hi_p, lo_p, half * alpha, S::one() - alpha],
    )?;
    let yd = DiscreteDistribution::new(
        params.domain,
        vec![y + up, y + down, S::zero(), z],
        vec![hi_p, lo_p, half * alpha, S::one() - alpha],
    )?;
    let verdict = dominates_n(&yd, &x, 3, S::lit(DEFAULT_TOL))?;
    if !verdict.holds {
        return Err(Error::Invariant(format!(
            "constructed pair is not third-order ordered (gap {})",
            verdict.max_gap
        )));
    }
    Ok((x, yd))
}

/// A pair with `better >=_n worse`, as confirmed by `verdict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct OrderedPair<S: Scalar> {
    pub better: DiscreteDistribution<S>,
    pub worse: DiscreteDistribution<S>,
    pub verdict: DominanceVerdict<S>,
    /// Number of candidate pairs drawn.
    pub attempts: usize,
}

impl<S: Scalar> OrderedPair<S> {
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / self.attempts as f64
    }
}

/// Noise `N` attached to the high state `B + k` versus the low state `B`,
/// each with probability one half; ordered at third order by the oracle.
pub fn apportionment_pair<S: Scalar>(
    base: &DiscreteDistribution<S>,
    k: S,
    noise: &DiscreteDistribution<S>,
) -> Result<OrderedPair<S>> {
    if !(k > S::zero()) {
        return Err(Error::validation("k", format!("{k} must be positive")));
    }
    if noise.mean().abs() > S::tol_floor(1e-12) {
        return Err(Error::validation(
            "noise",
            format!("mean {} is not zero", noise.mean()),
        ));
    }
    let high = base.translate(k)?;
    let half = S::lit(0.5);
    let noisy_high = DiscreteDistribution::mix(&[(half, &high.convolve(noise)?), (half, base)])?;
    let noisy_low = DiscreteDistribution::mix(&[(half, &high), (half, &base.convolve(noise)?)])?;
    let tol = S::lit(DEFAULT_TOL);
    let forward = dominates_n(&noisy_high, &noisy_low, 3, tol)?;
    if forward.holds {
        return Ok(OrderedPair {
            better: noisy_high,
            worse: noisy_low,
            verdict: forward,
            attempts: 1,
        });
    }
    let backward = dominates_n(&noisy_low, &noisy_high, 3, tol)?;
    if backward.holds {
        return Ok(OrderedPair {
            better: noisy_low,
            worse: noisy_high,
            verdict: backward,
            attempts: 1,
        });
    }
    Err(Error::Rejected(
        "neither candidate dominates the other at third order".into(),
    ))
}

/// Random discrete distribution: `2..=atom_budget` atoms uniform on the
/// domain, flat Dirichlet probabilities.
pub fn random_distribution<S: Scalar, R: Rng>(
    domain: Domain<S>,
    atom_budget: usize,
    rng: &mut R,
) -> Result<DiscreteDistribution<S>> {
    let m = rng.gen_range(2..=atom_budget.max(2));
    let (a, w) = (domain.lo().as_f64(), domain.width().as_f64());
    let support: Vec<S> = (0..m)
        .map(|_| S::lit(a + w * rng.gen::<f64>()).min(domain.hi()))
        .collect();
    let raw: Vec<f64> = (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let probs = raw.iter().map(|&e| S::lit(e / total)).collect();
    DiscreteDistribution::new(domain, support, probs)
}

/// Rejection-samples a pair ordered at order `n`, drawing at most
/// `trial_cap` candidate pairs.
pub fn random_nsd_pair<S: Scalar>(
    domain: Domain<S>,
    n: u32,
    atom_budget: usize,
    seed: u64,
    trial_cap: usize,
) -> Result<OrderedPair<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_nsd_pair_with(
        domain,
        n,
        atom_budget,
        trial_cap,
        S::lit(DEFAULT_TOL),
        &mut rng,
    )
}

pub fn random_nsd_pair_with<S: Scalar, R: Rng>(
    domain: Domain<S>,
    n: u32,
    atom_budget: usize,
    trial_cap: usize,
    tol: S,
    rng: &mut R,
) -> Result<OrderedPair<S>> {
    if atom_budget < 2 {
        return Err(Error::validation("atom_budget", "must be at least 2"));
    }
    for attempt in 1..=trial_cap {
        let x = random_distribution(domain, atom_budget, rng)?;
        let y = random_distribution(domain, atom_budget, rng)?;
        for (better, worse) in [(&x, &y), (&y, &x)] {
            if !moments_ordered(better, worse, n, tol) {
                continue;
            }
            let verdict = dominates_n(better, worse, n, tol)?;
            if verdict.holds {
                return Ok(OrderedPair {
                    better: better.clone(),
                    worse: worse.clone(),
                    verdict,
                    attempts: attempt,
                });
            }
        }
    }
    Err(Error::Exhausted {
        attempts: trial_cap,
    })
}

// Cheap necessary condition: the boundary moments alone.
fn moments_ordered<S: Scalar>(
    x: &DiscreteDistribution<S>,
    y: &DiscreteDistribution<S>,
    n: u32,
    tol: S,
) -> bool {
    (1..n).all(|k| x.boundary_moment(k) - y.boundary_moment(k) <= tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", tag = "kind", rename_all = "snake_case")]
pub enum PairSource<S: Scalar> {
    Sweep {
        index: usize,
        params: LemmaParams<S>,
    },
    Random {
        trial: u64,
        attempts: usize,
    },
}

/// A pair with `dominant >=_n dominated` on which the functional prefers
/// `dominated` by `gap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Violation<S: Scalar> {
    pub order: u32,
    pub dominated: DiscreteDistribution<S>,
    pub dominant: DiscreteDistribution<S>,
    pub value_dominated: S,
    pub value_dominant: S,
    pub gap: S,
    pub dominance: DominanceVerdict<S>,
    pub source: PairSource<S>,
}

/// Grid of construction parameters; `y = eps` and
/// `z = -n(n-1) eps - 0.01 (b - a)` at every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SweepConfig<S: Scalar> {
    pub alphas: Vec<S>,
    pub epsilons: Vec<S>,
    pub n_params: Vec<u32>,
}

impl<S: Scalar> Default for SweepConfig<S> {
    fn default() -> Self {
        SweepConfig {
            alphas: (1..=9).map(|i| S::lit(i as f64 / 10.0)).collect(),
            epsilons: [1e-1, 1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&e| S::lit(e))
                .collect(),
            n_params: (1..=20).collect(),
        }
    }
}

impl<S: Scalar> SweepConfig<S> {
    /// All grid points in sweep order, including those that break the
    /// ordering chain.
    pub fn points(&self, domain: Domain<S>) -> Vec<LemmaParams<S>> {
        let margin = S::lit(0.01) * domain.width();
        let mut out =
            Vec::with_capacity(self.alphas.len() * self.epsilons.len() * self.n_params.len());
        for &epsilon in &self.epsilons {
            for &n_param in &self.n_params {
                let n = S::from_u32(n_param).unwrap();
                let z = -(n * (n - S::one()) * epsilon) - margin;
                for &alpha in &self.alphas {
                    out.push(LemmaParams {
                        n_param,
                        alpha,
                        epsilon,
                        y: epsilon,
                        z,
                        domain,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SweepReport<S: Scalar> {
    /// Grid points visited, valid or not, up to and including a violation.
    pub points_examined: usize,
    pub points_skipped: usize,
    pub violation: Option<Violation<S>>,
}

/// Walks the construction grid and returns the first pair the functional
/// ranks against order-`n` dominance by more than `gap_threshold`.
pub fn counterexample_sweep<S: Scalar, P: Preference<S> + ?Sized>(
    pref: &P,
    domain: Domain<S>,
    n: u32,
    config: &SweepConfig<S>,
    gap_threshold: S,
    tol: S,
) -> Result<SweepReport<S>> {
    let mut skipped = 0;
    let points = config.points(domain);
    for (index, params) in points.iter().enumerate() {
        let (x, y) = match lemma_pair(params) {
            Ok(pair) => pair,
            Err(Error::Validation { .. }) | Err(Error::Domain(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let verdict = dominates_n(&y, &x, n, tol)?;
        if !verdict.holds {
            skipped += 1;
            continue;
        }
        let source = PairSource::Sweep {
            index,
            params: params.clone(),
        };
        if let Some(v) = check_pair(pref, n, &y, &x, verdict, gap_threshold, source)? {
            return Ok(SweepReport {
                points_examined: index + 1,
                points_skipped: skipped,
                violation: Some(v),
            });
        }
    }
    Ok(SweepReport {
        points_examined: points.len(),
        points_skipped: skipped,
        violation: None,
    })
}

fn check_pair<S: Scalar, P: Preference<S> + ?Sized>(
    pref: &P,
    n: u32,
    better: &DiscreteDistribution<S>,
    worse: &DiscreteDistribution<S>,
    verdict: DominanceVerdict<S>,
    gap_threshold: S,
    source: PairSource<S>,
) -> Result<Option<Violation<S>>> {
    let vb = pref.evaluate(better)?;
    let vw = pref.evaluate(worse)?;
    let gap = vw - vb;
    Ok((gap > gap_threshold).then(|| Violation {
        order: n,
        dominated: worse.clone(),
        dominant: better.clone(),
        value_dominated: vw,
        value_dominant: vb,
        gap,
        dominance: verdict,
        source,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct FalsifyConfig<S: Scalar> {
    /// Random pairs to draw (the structured sweep comes on top).
    pub trials: usize,
    pub seed: u64,
    pub atom_budget: usize,
    pub trial_cap: usize,
    pub gap_threshold: S,
    pub tol: S,
    /// Run the construction sweep first when `n >= 3`.
    pub sweep: bool,
}

impl<S: Scalar> Default for FalsifyConfig<S> {
    fn default() -> Self {
        FalsifyConfig {
            trials: 10_000,
            seed: 0,
            atom_budget: DEFAULT_ATOM_BUDGET,
            trial_cap: DEFAULT_TRIAL_CAP,
            gap_threshold: S::lit(VIOLATION_GAP),
            tol: S::lit(DEFAULT_TOL),
            sweep: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct FalsifyReport<S: Scalar> {
    pub order: u32,
    pub seed: u64,
    pub trials: usize,
    pub sweep_points: usize,
    pub random_pairs: usize,
    /// Trials whose sampler hit the cap without an ordered pair.
    pub exhausted: usize,
    pub violation: Option<Violation<S>>,
}

/// Searches for a pair `Y >=_n X` with `pref(X) > pref(Y) + gap_threshold`.
///
/// Trial `t` draws from its own ChaCha stream `(seed, t)`, so the outcome
/// depends only on the inputs and the first violating trial index.
pub fn falsify<S: Scalar, P: Preference<S> + ?Sized>(
    pref: &P,
    domain: Domain<S>,
    n: u32,
    config: &FalsifyConfig<S>,
) -> Result<FalsifyReport<S>> {
    if config.trials < 1 {
        return Err(Error::validation("trials", "must be at least 1"));
    }
    let mut report = FalsifyReport {
        order: n,
        seed: config.seed,
        trials: config.trials,
        sweep_points: 0,
        random_pairs: 0,
        exhausted: 0,
        violation: None,
    };
    if config.sweep && n >= 3 {
        let sweep = counterexample_sweep(
            pref,
            domain,
            n,
            &SweepConfig::default(),
            config.gap_threshold,
            config.tol,
        )?;
        report.sweep_points = sweep.points_examined;
        if sweep.violation.is_some() {
            report.violation = sweep.violation;
            return Ok(report);
        }
    }
    for trial in 0..config.trials as u64 {
        let mut rng = trial_rng(config.seed, trial);
        // Exact ties have probability zero here, so random pairs are held to
        // a zero tolerance and only the sweep pairs rely on `config.tol`.
        let pair = match random_nsd_pair_with(
            domain,
            n,
            config.atom_budget,
            config.trial_cap,
            S::zero(),
            &mut rng,
        ) {
            Ok(p) => p,
            Err(Error::Exhausted { .. }) => {
                report.exhausted += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        report.random_pairs += 1;
        let source = PairSource::Random {
            trial,
            attempts: pair.attempts,
        };
        if let Some(v) = check_pair(
            pref,
            n,
            &pair.better,
            &pair.worse,
            pair.verdict,
            config.gap_threshold,
            source,
        )? {
            report.violation = Some(v);
            break;
        }
    }
    Ok(report)
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdu::RduModel;
    use crate::weighting::WeightingFunction;

    fn sym() -> Domain<f64> {
        Domain::new(-1.0, 1.0).unwrap()
    }

    fn params(n_param: u32) -> LemmaParams<f64> {
        LemmaParams {
            n_param,
            alpha: 0.5,
            epsilon: 0.1,
            y: 0.1,
            z: -0.5,
            domain: sym(),
        }
    }

    fn atoms(d: &DiscreteDistribution<f64>) -> Vec<(f64, f64)> {
        d.atoms().collect()
    }

    fn close(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(p, q)| (p.0 - q.0).abs() < 1e-15 && (p.1 - q.1).abs() < 1e-15)
    }

    #[test]
    fn lemma_pair_at_n_two() {
        let (x, y) = lemma_pair(&params(2)).unwrap();
        assert!(close(
            &atoms(&x),
            &[(-0.5, 0.5), (-0.2, 0.125), (0.1, 0.25), (0.2, 0.125)]
        ));
        assert!(close(
            &atoms(&y),
            &[(-0.5, 0.5), (-0.1, 0.125), (0.0, 0.25), (0.3, 0.125)]
        ));
        let noise = params(2).noise();
        assert_eq!(noise[0].0 * noise[0].1 + noise[1].0 * noise[1].1, 0.0);
    }

    #[test]
    fn broken_chain_is_named() {
        match lemma_pair(&params(1)) {
            Err(Error::Validation { reason, .. }) => assert!(reason.contains("n eps > y")),
            other => panic!("{other:?}"),
        }
        let mut p = params(3);
        p.z = -0.55;
        assert!(lemma_pair(&p).is_err());
        p.z = -1.5;
        match lemma_pair(&p) {
            Err(Error::Validation { reason, .. }) => assert!(reason.contains("z >= a")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn apportionment_examples() {
        let base = DiscreteDistribution::point_mass(sym(), 0.0).unwrap();
        let noise = DiscreteDistribution::new(sym(), vec![0.2, -0.2], vec![0.5, 0.5]).unwrap();
        let pair = apportionment_pair(&base, 0.1, &noise).unwrap();
        assert!(pair.verdict.holds);
        // Noise is better attached to the high state.
        assert!(pair
            .better
            .support()
            .iter()
            .any(|&x| (x - 0.3).abs() < 1e-12));

        let none = DiscreteDistribution::point_mass(sym(), 0.0).unwrap();
        let pair = apportionment_pair(&base, 0.1, &none).unwrap();
        assert_eq!(pair.better, pair.worse);

        let biased = DiscreteDistribution::new(sym(), vec![0.2, -0.1], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            apportionment_pair(&base, 0.1, &biased),
            Err(Error::Validation { field: "noise", .. })
        ));
        let wide = DiscreteDistribution::new(sym(), vec![0.95, -0.95], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            apportionment_pair(&base, 0.1, &wide),
            Err(Error::Rejected(_))
        ));
    }

    #[test]
    fn random_pairs_are_reproducible() {
        let a = random_nsd_pair::<f64>(sym(), 3, 4, 42, 1000).unwrap();
        let b = random_nsd_pair::<f64>(sym(), 3, 4, 42, 1000).unwrap();
        assert_eq!(a, b);
        assert!(dominates_n(&a.better, &a.worse, 3, 1e-10).unwrap().holds);
        assert!(a.acceptance_rate() > 0.0 && a.acceptance_rate() <= 1.0);
    }

    #[test]
    fn translated_pair_is_first_order_ordered() {
        let x = DiscreteDistribution::new(sym(), vec![-0.5, 0.2], vec![0.3, 0.7]).unwrap();
        let shifted = x.translate(0.3).unwrap();
        assert!(dominates_n(&shifted, &x, 1, 1e-10).unwrap().holds);
    }

    #[test]
    fn exhaustion_is_reported() {
        let r = random_nsd_pair::<f64>(sym(), 1, 2, 1, 0);
        assert_eq!(r, Err(Error::Exhausted { attempts: 0 }));
    }

    #[test]
    fn square_weighting_is_caught_by_the_sweep() {
        let model = RduModel::dual(WeightingFunction::power(2.0).unwrap(), sym());
        let report =
            counterexample_sweep(&model, sym(), 3, &SweepConfig::default(), 1e-6, 1e-10).unwrap();
        let v = report.violation.unwrap();
        assert!(report.points_examined <= 1000);
        assert!(v.gap > 1e-6);
        assert!(
            dominates_n(&v.dominant, &v.dominated, 3, 1e-10)
                .unwrap()
                .holds
        );
        // Closed form of the gap for s^2: y alpha^2 (1/2 - 1/n).
        if let PairSource::Sweep { params, .. } = &v.source {
            let n = params.n_param as f64;
            let expect = params.y * params.alpha * params.alpha * (0.5 - 1.0 / n);
            assert!((v.gap - expect).abs() < 1e-12);
        } else {
            panic!("expected a sweep pair");
        }
    }

    #[test]
    fn identity_weighting_survives() {
        let model = RduModel::dual(WeightingFunction::identity(), sym());
        let config = FalsifyConfig {
            trials: 300,
            seed: 7,
            ..FalsifyConfig::default()
        };
        let report = falsify(&model, sym(), 3, &config).unwrap();
        assert!(report.violation.is_none());
        assert_eq!(report.random_pairs + report.exhausted, 300);
        assert_eq!(report, falsify(&model, sym(), 3, &config).unwrap());
    }
}
