//! Utility functions with derivative access and an n-monotonicity checker.
//!
//! `f` is n-monotone (`n >= 2`) when `(-1)^(k-1) f^(k) >= 0` for
//! `k = 1..=n-2` and `(-1)^(n-1) f^(n-2)` is decreasing and convex;
//! 1-monotone means increasing. For `n = 2` this reads "`-f` decreasing
//! and convex", i.e. `f` increasing and concave.

use serde::{Deserialize, Serialize};

use crate::distributions::Domain;
use crate::error::{Error, Result};
use crate::numerics::{piecewise_inf, piecewise_sup, PiecewisePolynomial, Polynomial};
use crate::scalar::Scalar;

/// Highest derivative order served by [`UtilityFunction::eval`].
pub const MAX_DERIVATIVE: u32 = 8;

pub const DEFAULT_GRID: usize = 1001;
pub const DEFAULT_MONOTONE_TOL: f64 = 1e-9;

/// Relative mismatch allowed when checking that piecewise forms join up.
const JOIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "S: Scalar",
    tag = "form",
    content = "params",
    rename_all = "snake_case"
)]
pub enum UtilityForm<S> {
    Identity,
    /// `x^gamma`.
    Power {
        gamma: S,
    },
    /// `-exp(-theta x)`.
    Exponential {
        theta: S,
    },
    /// `-(eta_hat - x)_+^m`.
    NegativePower {
        eta_hat: S,
        m: u32,
    },
    /// Linear interpolation of `values` at `breakpoints`.
    PiecewiseLinear {
        breakpoints: Vec<S>,
        values: Vec<S>,
    },
    /// Pieces in the local coordinate of their left breakpoint.
    PiecewisePoly(PiecewisePolynomial<S>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", try_from = "RawUtility<S>")]
pub struct UtilityFunction<S> {
    #[serde(flatten)]
    form: UtilityForm<S>,
    domain: Domain<S>,
}

#[derive(Deserialize)]
#[serde(bound = "S: Scalar")]
struct RawUtility<S> {
    #[serde(flatten)]
    form: UtilityForm<S>,
    domain: Domain<S>,
}

impl<S: Scalar> TryFrom<RawUtility<S>> for UtilityFunction<S> {
    type Error = Error;
    fn try_from(raw: RawUtility<S>) -> Result<Self> {
        Self::new(raw.form, raw.domain)
    }
}

/// Which condition of n-monotonicity failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `f` itself not increasing (n = 1).
    Increasing,
    /// `(-1)^(k-1) f^(k) < 0`.
    DerivativeSign,
    /// `(-1)^(n-1) f^(n-2)` not decreasing.
    Decreasing,
    /// `(-1)^(n-1) f^(n-2)` not convex.
    Convex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct MonotonicityFailure<S> {
    pub order: u32,
    pub location: S,
    pub condition: Condition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct MonotonicityReport<S> {
    pub order: u32,
    pub holds: bool,
    pub failing: Option<MonotonicityFailure<S>>,
    pub method: Method,
}

fn falling_factorial<S: Scalar>(x: S, k: u32) -> S {
    (0..k).fold(S::one(), |acc, i| acc * (x - S::from_u32(i).unwrap()))
}

fn sign_pow<S: Scalar>(k: u32) -> S {
    if k.is_multiple_of(2) {
        S::one()
    } else {
        -S::one()
    }
}

impl<S: Scalar> UtilityFunction<S> {
    pub fn new(form: UtilityForm<S>, domain: Domain<S>) -> Result<Self> {
        let (a, b) = (domain.lo(), domain.hi());
        match &form {
            UtilityForm::Identity => {}
            UtilityForm::Power { gamma } => {
                if !(gamma.is_finite() && *gamma > S::zero()) {
                    return Err(Error::validation("gamma", "must be positive"));
                }
                if a < S::zero() && gamma.fract() != S::zero() {
                    return Err(Error::validation(
                        "domain",
                        "non-integer power needs a nonnegative domain",
                    ));
                }
            }
            UtilityForm::Exponential { theta } => {
                if !(theta.is_finite() && !theta.is_zero()) {
                    return Err(Error::validation("theta", "must be finite and nonzero"));
                }
            }
            UtilityForm::NegativePower { eta_hat, m } => {
                if *m < 1 || *m > MAX_DERIVATIVE {
                    return Err(Error::validation(
                        "m",
                        format!("{m} not in 1..={MAX_DERIVATIVE}"),
                    ));
                }
                if !eta_hat.is_finite() || *eta_hat <= a {
                    return Err(Error::validation(
                        "eta_hat",
                        "must exceed the domain's lower end (otherwise constant)",
                    ));
                }
            }
            UtilityForm::PiecewiseLinear {
                breakpoints,
                values,
            } => {
                if breakpoints.len() < 2 || breakpoints.len() != values.len() {
                    return Err(Error::validation(
                        "values",
                        "need at least two breakpoints and one value per breakpoint",
                    ));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::validation(
                        "breakpoints",
                        "must be strictly increasing",
                    ));
                }
                if breakpoints[0] != a || *breakpoints.last().unwrap() != b {
                    return Err(Error::validation(
                        "breakpoints",
                        "must span the domain exactly",
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::validation("values", "must be finite"));
                }
                if values.iter().all(|&v| v == values[0]) {
                    return Err(Error::validation("values", "utility is constant"));
                }
            }
            UtilityForm::PiecewisePoly(pp) => {
                if pp.span() != (a, b) {
                    return Err(Error::validation(
                        "breakpoints",
                        "must span the domain exactly",
                    ));
                }
                check_joins(pp, 0)?;
                let constant = pp.pieces().iter().all(|p| {
                    p.degree() == 0 && p.eval(S::zero()) == pp.pieces()[0].eval(S::zero())
                });
                if constant {
                    return Err(Error::validation("pieces", "utility is constant"));
                }
            }
        }
        Ok(UtilityFunction { form, domain })
    }

    pub fn identity(domain: Domain<S>) -> Self {
        UtilityFunction {
            form: UtilityForm::Identity,
            domain,
        }
    }

    pub fn power(domain: Domain<S>, gamma: S) -> Result<Self> {
        Self::new(UtilityForm::Power { gamma }, domain)
    }

    pub fn exponential(domain: Domain<S>, theta: S) -> Result<Self> {
        Self::new(UtilityForm::Exponential { theta }, domain)
    }

    pub fn negative_power(domain: Domain<S>, eta_hat: S, m: u32) -> Result<Self> {
        Self::new(UtilityForm::NegativePower { eta_hat, m }, domain)
    }

    /// Domain taken from the first and last breakpoint.
    pub fn piecewise_linear(breakpoints: Vec<S>, values: Vec<S>) -> Result<Self> {
        let (a, b) = match (breakpoints.first(), breakpoints.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::validation("breakpoints", "must not be empty")),
        };
        Self::new(
            UtilityForm::PiecewiseLinear {
                breakpoints,
                values,
            },
            Domain::new(a, b)?,
        )
    }

    /// Domain taken from the span of the breakpoints.
    pub fn piecewise_poly(pp: PiecewisePolynomial<S>) -> Result<Self> {
        let (a, b) = pp.span();
        Self::new(UtilityForm::PiecewisePoly(pp), Domain::new(a, b)?)
    }

    pub fn form(&self) -> &UtilityForm<S> {
        &self.form
    }

    pub fn domain(&self) -> Domain<S> {
        self.domain
    }

    fn check_args(&self, x: S, order: u32) -> Result<()> {
        if !self.domain.contains(x) {
            return Err(Error::domain(format!(
                "{x} outside utility domain [{}, {}]",
                self.domain.lo(),
                self.domain.hi()
            )));
        }
        if order > MAX_DERIVATIVE {
            return Err(Error::domain(format!(
                "derivative order {order} exceeds {MAX_DERIVATIVE}"
            )));
        }
        Ok(())
    }

    /// `u^(order)(x)`; at breakpoints of piecewise forms (and at the kink of
    /// `negative_power`) this is the right derivative.
    pub fn eval(&self, x: S, order: u32) -> Result<S> {
        self.eval_sided(x, order, false)
    }

    /// Left derivative counterpart of [`eval`](Self::eval).
    pub fn eval_left(&self, x: S, order: u32) -> Result<S> {
        self.eval_sided(x, order, true)
    }

    /// `u(x)`.
    pub fn value(&self, x: S) -> Result<S> {
        self.eval(x, 0)
    }

    fn eval_sided(&self, x: S, order: u32, left: bool) -> Result<S> {
        self.check_args(x, order)?;
        let k = order;
        Ok(match &self.form {
            UtilityForm::Identity => match k {
                0 => x,
                1 => S::one(),
                _ => S::zero(),
            },
            UtilityForm::Power { gamma } => {
                let c = falling_factorial(*gamma, k);
                if c.is_zero() {
                    S::zero()
                } else {
                    c * x.powf(*gamma - S::from_u32(k).unwrap())
                }
            }
            UtilityForm::Exponential { theta } => -(-*theta).powi(k as i32) * (-*theta * x).exp(),
            UtilityForm::NegativePower { eta_hat, m } => {
                if k > *m {
                    S::zero()
                } else {
                    let d = *eta_hat - x;
                    let base = if k == *m {
                        let inside = if left { d >= S::zero() } else { d > S::zero() };
                        if inside {
                            S::one()
                        } else {
                            S::zero()
                        }
                    } else {
                        d.max(S::zero()).powi((*m - k) as i32)
                    };
                    if base == S::zero() {
                        // A positive zero, so flat regions compare bit-equal.
                        S::zero()
                    } else {
                        -sign_pow::<S>(k) * falling_factorial(S::from_u32(*m).unwrap(), k) * base
                    }
                }
            }
            UtilityForm::PiecewiseLinear {
                breakpoints,
                values,
            } => {
                let last = breakpoints.len() - 2;
                let i = if left {
                    breakpoints.partition_point(|&t| t < x).saturating_sub(1)
                } else {
                    breakpoints.partition_point(|&t| t <= x).saturating_sub(1)
                }
                .min(last);
                let slope = (values[i + 1] - values[i]) / (breakpoints[i + 1] - breakpoints[i]);
                match k {
                    0 if x == breakpoints[i + 1] => values[i + 1],
                    0 => values[i] + slope * (x - breakpoints[i]),
                    1 => slope,
                    _ => S::zero(),
                }
            }
            UtilityForm::PiecewisePoly(pp) => {
                if left {
                    pp.eval_derivative_left(x, k)?
                } else {
                    pp.eval_derivative(x, k)?
                }
            }
        })
    }

    /// Piecewise-polynomial view of the piecewise forms.
    pub fn as_piecewise(&self) -> Option<PiecewisePolynomial<S>> {
        match &self.form {
            UtilityForm::PiecewiseLinear {
                breakpoints,
                values,
            } => {
                let pieces = breakpoints
                    .windows(2)
                    .zip(values.windows(2))
                    .map(|(t, v)| {
                        Polynomial::new(vec![v[0], (v[1] - v[0]) / (t[1] - t[0])])
                            .expect("degree one")
                    })
                    .collect();
                PiecewisePolynomial::new(breakpoints.clone(), pieces).ok()
            }
            UtilityForm::PiecewisePoly(pp) => Some(pp.clone()),
            _ => None,
        }
    }

    /// Largest `k` such that derivatives of orders `0..=k` exist and are
    /// continuous on the whole domain; `None` when every order exists.
    pub fn smoothness(&self) -> Option<u32> {
        match &self.form {
            UtilityForm::Identity | UtilityForm::Power { .. } | UtilityForm::Exponential { .. } => {
                None
            }
            UtilityForm::NegativePower { eta_hat, m } => {
                if *eta_hat > self.domain.lo() && *eta_hat < self.domain.hi() {
                    Some(m - 1)
                } else {
                    None
                }
            }
            UtilityForm::PiecewiseLinear { .. } | UtilityForm::PiecewisePoly(_) => {
                let pp = self.as_piecewise()?;
                let top = pp.max_degree() as u32;
                (1..=top)
                    .find(|&k| check_joins(&pp, k).is_err())
                    .map(|k| k - 1)
            }
        }
    }

    /// `u^(order)` (right derivative) at each point of `xs`.
    fn grid_values(&self, xs: &[S], order: u32) -> Result<Vec<S>> {
        xs.iter().map(|&x| self.eval(x, order)).collect()
    }
}

/// Fails if the `k`-th derivatives of adjacent pieces disagree at an
/// interior breakpoint.
fn check_joins<S: Scalar>(pp: &PiecewisePolynomial<S>, k: u32) -> Result<()> {
    let bps = pp.breakpoints();
    for i in 1..bps.len() - 1 {
        let left = pp.pieces()[i - 1].derivative_n(k).eval(bps[i] - bps[i - 1]);
        let right = pp.pieces()[i].derivative_n(k).eval(S::zero());
        let scale = S::one().max(left.abs()).max(right.abs());
        if (left - right).abs() > S::tol_floor(JOIN_TOL) * scale {
            return Err(Error::validation(
                "pieces",
                format!(
                    "derivative of order {k} jumps at {} ({left} vs {right})",
                    bps[i]
                ),
            ));
        }
    }
    Ok(())
}

/// n-monotonicity with the default grid and tolerance.
pub fn is_n_monotone<S: Scalar>(u: &UtilityFunction<S>, n: u32) -> Result<MonotonicityReport<S>> {
    is_n_monotone_with(u, n, DEFAULT_GRID, S::lit(DEFAULT_MONOTONE_TOL))
}

/// Decides n-monotonicity of `u`.
///
/// Piecewise forms are checked exactly, piece by piece, through extrema of
/// the relevant derivatives; the convexity of `(-1)^(n-1) u^(n-2)` across
/// a breakpoint is checked by comparing its one-sided slopes there.
/// Closed forms are checked on a grid of `grid_size` points: derivative
/// signs pointwise, and monotonicity and convexity through first and second
/// differences.
pub fn is_n_monotone_with<S: Scalar>(
    u: &UtilityFunction<S>,
    n: u32,
    grid_size: usize,
    tol: S,
) -> Result<MonotonicityReport<S>> {
    if !(1..=MAX_DERIVATIVE + 2).contains(&n) {
        return Err(Error::domain(format!(
            "order {n} not in 1..={}",
            MAX_DERIVATIVE + 2
        )));
    }
    if grid_size < 3 {
        return Err(Error::domain("grid needs at least three points"));
    }
    if n >= 3 {
        if let Some(s) = u.smoothness() {
            if s < n - 2 {
                return Err(Error::Capability(format!(
                    "order {n} needs a continuous derivative of order {}, \
                     but derivatives beyond order {s} jump",
                    n - 2
                )));
            }
        }
    }
    let failing = match u.as_piecewise() {
        Some(pp) => exact_check(&pp, n, tol)?,
        None => grid_check(u, n, grid_size, tol)?,
    };
    Ok(MonotonicityReport {
        order: n,
        holds: failing.is_none(),
        failing,
        method: if u.as_piecewise().is_some() {
            Method::Exact
        } else {
            Method::Numeric
        },
    })
}

fn fail<S>(order: u32, location: S, condition: Condition) -> Option<MonotonicityFailure<S>> {
    Some(MonotonicityFailure {
        order,
        location,
        condition,
    })
}

fn exact_check<S: Scalar>(
    pp: &PiecewisePolynomial<S>,
    n: u32,
    tol: S,
) -> Result<Option<MonotonicityFailure<S>>> {
    let (a, b) = pp.span();
    if n == 1 {
        let (m, x) = piecewise_inf(&pp.derivative(), a, b)?;
        return Ok(if m < -tol {
            fail(0, x, Condition::Increasing)
        } else {
            None
        });
    }
    let mut deriv = pp.clone();
    for k in 1..=n - 2 {
        deriv = deriv.derivative();
        let signed = deriv.scale(sign_pow(k - 1));
        let (m, x) = piecewise_inf(&signed, a, b)?;
        if m < -tol {
            return Ok(fail(k, x, Condition::DerivativeSign));
        }
    }
    let g = deriv.scale(sign_pow(n - 1));
    let g1 = g.derivative();
    let (m, x) = piecewise_sup(&g1, a, b)?;
    if m > tol {
        return Ok(fail(n - 2, x, Condition::Decreasing));
    }
    let (m, x) = piecewise_inf(&g1.derivative(), a, b)?;
    if m < -tol {
        return Ok(fail(n - 2, x, Condition::Convex));
    }
    for &t in &pp.breakpoints()[1..pp.breakpoints().len() - 1] {
        if g1.eval_derivative_left(t, 0)? > g1.eval(t)? + tol {
            return Ok(fail(n - 2, t, Condition::Convex));
        }
    }
    Ok(None)
}

fn grid_check<S: Scalar>(
    u: &UtilityFunction<S>,
    n: u32,
    grid_size: usize,
    tol: S,
) -> Result<Option<MonotonicityFailure<S>>> {
    let xs = u.domain().grid(grid_size);
    if n == 1 {
        let v = u.grid_values(&xs, 0)?;
        for i in 0..v.len() - 1 {
            if !(v[i + 1] - v[i] >= -tol) {
                return Ok(fail(0, xs[i], Condition::Increasing));
            }
        }
        return Ok(None);
    }
    for k in 1..=n - 2 {
        let sgn = sign_pow::<S>(k - 1);
        for &x in &xs {
            if !(sgn * u.eval(x, k)? >= -tol) {
                return Ok(fail(k, x, Condition::DerivativeSign));
            }
        }
    }
    let sgn = sign_pow::<S>(n - 1);
    let g: Vec<S> = u
        .grid_values(&xs, n - 2)?
        .into_iter()
        .map(|v| sgn * v)
        .collect();
    for i in 0..g.len() - 1 {
        if !(g[i + 1] - g[i] <= tol) {
            return Ok(fail(n - 2, xs[i], Condition::Decreasing));
        }
    }
    for i in 1..g.len() - 1 {
        if !(g[i + 1] - g[i] - g[i] + g[i - 1] >= -tol) {
            return Ok(fail(n - 2, xs[i], Condition::Convex));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(a: f64, b: f64) -> Domain<f64> {
        Domain::new(a, b).unwrap()
    }

    #[test]
    fn identity_derivatives() {
        let u = UtilityFunction::identity(dom(-1.0, 1.0));
        assert_eq!(u.eval(0.3, 0).unwrap(), 0.3);
        assert_eq!(u.eval(0.3, 1).unwrap(), 1.0);
        assert_eq!(u.eval(0.3, 5).unwrap(), 0.0);
        assert!(u.eval(2.0, 0).is_err());
        assert!(u.eval(0.0, 9).is_err());
    }

    #[test]
    fn exponential_derivatives_alternate() {
        let u = UtilityFunction::exponential(dom(-1.0, 1.0), 1.0).unwrap();
        assert_eq!(u.eval(0.0, 0).unwrap(), -1.0);
        assert_eq!(u.eval(0.0, 1).unwrap(), 1.0);
        assert_eq!(u.eval(0.0, 2).unwrap(), -1.0);
        assert_eq!(u.eval(0.0, 3).unwrap(), 1.0);
    }

    #[test]
    fn negative_power_values() {
        let u = UtilityFunction::negative_power(dom(0.0, 2.0), 1.0, 2).unwrap();
        assert_eq!(u.eval(0.0, 0).unwrap(), -1.0);
        assert_eq!(u.eval(0.0, 1).unwrap(), 2.0);
        assert_eq!(u.eval(0.0, 2).unwrap(), -2.0);
        assert_eq!(u.eval(1.5, 0).unwrap().to_bits(), 0.0f64.to_bits());
        // kink at eta_hat: second derivative jumps from -2 to 0
        assert_eq!(u.eval(1.0, 2).unwrap(), 0.0);
        assert_eq!(u.eval_left(1.0, 2).unwrap(), -2.0);
        assert_eq!(u.smoothness(), Some(1));
    }

    #[test]
    fn piecewise_linear_one_sided_slopes() {
        let u =
            UtilityFunction::piecewise_linear(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0]).unwrap();
        assert_eq!(u.eval(1.0, 0).unwrap(), 2.0);
        assert_eq!(u.eval(1.0, 1).unwrap(), 1.0);
        assert_eq!(u.eval_left(1.0, 1).unwrap(), 2.0);
        assert_eq!(u.eval(2.0, 1).unwrap(), 1.0);
        assert_eq!(u.eval(0.0, 2).unwrap(), 0.0);
        assert_eq!(u.smoothness(), Some(0));
    }

    #[test]
    fn constant_utilities_rejected() {
        assert!(UtilityFunction::piecewise_linear(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(UtilityFunction::exponential(dom(0.0, 1.0), 0.0).is_err());
        assert!(UtilityFunction::negative_power(dom(0.0, 1.0), 0.0, 2).is_err());
        let pp = PiecewisePolynomial::single(0.0, 1.0, Polynomial::constant(2.0)).unwrap();
        assert!(UtilityFunction::piecewise_poly(pp).is_err());
    }

    #[test]
    fn discontinuous_piecewise_poly_rejected() {
        let pp = PiecewisePolynomial::new(
            vec![0.0, 1.0, 2.0],
            vec![
                Polynomial::new(vec![0.0, 1.0]).unwrap(),
                Polynomial::constant(3.0),
            ],
        )
        .unwrap();
        assert!(UtilityFunction::piecewise_poly(pp).is_err());
    }

    #[test]
    fn identity_is_n_monotone_for_all_n() {
        let u = UtilityFunction::identity(dom(-1.0, 1.0));
        for n in 1..=8 {
            let r = is_n_monotone(&u, n).unwrap();
            assert!(r.holds, "n = {n}: {r:?}");
            assert_eq!(r.method, Method::Numeric);
        }
    }

    #[test]
    fn exponential_is_n_monotone() {
        for theta in [0.1, 1.0, 3.0] {
            let u = UtilityFunction::exponential(dom(-1.0, 1.0), theta).unwrap();
            for n in 1..=8 {
                assert!(is_n_monotone(&u, n).unwrap().holds, "theta={theta} n={n}");
            }
        }
    }

    #[test]
    fn convex_power_is_not_concave() {
        let u = UtilityFunction::power(dom(0.0, 1.0), 2.0).unwrap();
        assert!(is_n_monotone(&u, 1).unwrap().holds);
        let r = is_n_monotone(&u, 2).unwrap();
        assert!(!r.holds);
        let f = r.failing.unwrap();
        assert_eq!(f.order, 0);
        assert_eq!(f.condition, Condition::Convex);
    }

    #[test]
    fn negated_generators_pass_at_their_order() {
        for n in 2..=6 {
            for eta_hat in [-0.5, 0.0, 0.7, 1.0] {
                let u = UtilityFunction::negative_power(dom(-1.0, 1.0), eta_hat, n - 1).unwrap();
                let r = is_n_monotone(&u, n).unwrap();
                assert!(r.holds, "n={n} eta_hat={eta_hat}: {r:?}");
            }
        }
    }

    #[test]
    fn generator_lacks_smoothness_one_order_up() {
        let u = UtilityFunction::negative_power(dom(-1.0, 1.0), 0.2, 2).unwrap();
        assert!(matches!(is_n_monotone(&u, 4), Err(Error::Capability(_))));
    }

    #[test]
    fn piecewise_linear_concave_is_two_monotone_exactly() {
        let u =
            UtilityFunction::piecewise_linear(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0]).unwrap();
        let r = is_n_monotone(&u, 2).unwrap();
        assert!(r.holds);
        assert_eq!(r.method, Method::Exact);
        assert!(matches!(is_n_monotone(&u, 3), Err(Error::Capability(_))));

        let convex =
            UtilityFunction::piecewise_linear(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        let r = is_n_monotone(&convex, 2).unwrap();
        assert_eq!(
            r.failing,
            Some(MonotonicityFailure {
                order: 0,
                location: 1.0,
                condition: Condition::Convex
            })
        );
    }

    #[test]
    fn piecewise_poly_exact_sign_analysis() {
        // C^1 quadratic spline: u = 2x - x^2 on [0, 1], then 1 on [1, 2].
        let pp = PiecewisePolynomial::from_global(
            vec![0.0, 1.0, 2.0],
            vec![
                Polynomial::new(vec![0.0, 2.0, -1.0]).unwrap(),
                Polynomial::constant(1.0),
            ],
        )
        .unwrap();
        let u = UtilityFunction::piecewise_poly(pp).unwrap();
        assert_eq!(u.smoothness(), Some(1));
        assert!(is_n_monotone(&u, 2).unwrap().holds);
        // u' = 2 - 2x then 0: decreasing and convex across the join.
        assert!(is_n_monotone(&u, 3).unwrap().holds);
    }

    #[test]
    fn decreasing_utility_fails_order_one() {
        let u = UtilityFunction::exponential(dom(0.0, 1.0), -1.0).unwrap();
        let r = is_n_monotone(&u, 1).unwrap();
        assert_eq!(r.failing.unwrap().condition, Condition::Increasing);
    }

    #[test]
    fn json_shape() {
        let u: UtilityFunction<f64> = serde_json::from_str(
            r#"{"form":"exponential","params":{"theta":1.0},"domain":[-1,1]}"#,
        )
        .unwrap();
        assert_eq!(u.form(), &UtilityForm::Exponential { theta: 1.0 });
        let u: UtilityFunction<f64> =
            serde_json::from_str(r#"{"form":"identity","domain":[0,1]}"#).unwrap();
        assert_eq!(u.form(), &UtilityForm::Identity);
        let text = serde_json::to_string(&u).unwrap();
        let back: UtilityFunction<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, u);
        let bad = serde_json::from_str::<UtilityFunction<f64>>(
            r#"{"form":"negative_power","params":{"eta_hat":-2,"m":2},"domain":[-1,1]}"#,
        );
        assert!(bad.is_err());
    }
}
