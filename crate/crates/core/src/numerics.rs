//! Polynomial and piecewise-polynomial primitives.
//!
//! Root isolation works by recursion on the derivative: the roots of `p'`
//! split `[lo, hi]` into monotone runs, and each run holds at most one root,
//! found by bisection on a sign change. Tangential roots (extrema touching
//! zero) are caught by testing the critical points themselves against the
//! rounding bound of the evaluation.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{binomial, Scalar};

/// Largest polynomial degree accepted anywhere in the crate.
pub const MAX_DEGREE: usize = 8;

/// Default absolute accuracy for root isolation.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

const MAX_BISECTIONS: usize = 400;

pub(crate) fn sort_scalars<S: Scalar>(xs: &mut [S]) {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
}

/// Dense univariate polynomial with coefficients in ascending degree.
///
/// Trailing zero coefficients are trimmed, so the leading coefficient is
/// nonzero unless the polynomial is identically zero (empty coefficient list).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", try_from = "Vec<S>", into = "Vec<S>")]
pub struct Polynomial<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> TryFrom<Vec<S>> for Polynomial<S> {
    type Error = Error;
    fn try_from(coeffs: Vec<S>) -> Result<Self> {
        Self::new(coeffs)
    }
}

impl<S: Scalar> From<Polynomial<S>> for Vec<S> {
    fn from(p: Polynomial<S>) -> Self {
        p.coeffs
    }
}

impl<S: Scalar> Polynomial<S> {
    pub fn new(coeffs: Vec<S>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("coefficients", "must be finite"));
        }
        let p = Self::trimmed(coeffs);
        if p.coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::UnsupportedDegree {
                degree: p.coeffs.len() - 1,
                max: MAX_DEGREE,
            });
        }
        Ok(p)
    }

    fn trimmed(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::trimmed(vec![c])
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * S::from_count(k))
            .collect();
        Self::trimmed(coeffs)
    }

    /// `k`-th derivative.
    pub fn derivative_n(&self, k: u32) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }

    pub fn scale(&self, s: S) -> Self {
        Self::trimmed(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or_else(S::zero)
                    + other.coeffs.get(i).copied().unwrap_or_else(S::zero)
            })
            .collect();
        Self::trimmed(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let mut coeffs = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j] + a * b;
            }
        }
        Self::new(coeffs)
    }

    /// Coefficients of `x -> p(x + shift)`.
    pub fn taylor_shift(&self, shift: S) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![S::zero(); n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            // c * (x + shift)^k
            let mut pow = S::one();
            for r in (0..=k).rev() {
                out[r] = out[r] + c * binomial::<S>(k as u32, r as u32) * pow;
                pow = pow * shift;
            }
        }
        Self::trimmed(out)
    }

    /// Upper bound on `sum |a_k| R^k` for `R = max(|lo|, |hi|, 1)`.
    fn magnitude_bound(&self, lo: S, hi: S) -> S {
        let r = lo.abs().max(hi.abs()).max(S::one());
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, &c| acc * r + c.abs())
    }
}

/// Every real root of `p` in `[lo, hi]` to absolute accuracy `tol`, sorted,
/// multiple roots reported once. The zero polynomial has no isolated roots.
pub fn roots_in_interval<S: Scalar>(p: &Polynomial<S>, lo: S, hi: S, tol: S) -> Result<Vec<S>> {
    if p.coeffs.len() > MAX_DEGREE + 1 {
        return Err(Error::UnsupportedDegree {
            degree: p.degree(),
            max: MAX_DEGREE,
        });
    }
    if !(lo < hi) {
        return Err(Error::domain(format!("empty interval [{lo}, {hi}]")));
    }
    if !(tol > S::zero()) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut roots = roots_rec(p, lo, hi, tol);
    sort_scalars(&mut roots);
    let two_tol = tol + tol;
    roots.dedup_by(|b, a| (*b - *a).abs() <= two_tol);
    Ok(roots)
}

fn roots_rec<S: Scalar>(p: &Polynomial<S>, lo: S, hi: S, tol: S) -> Vec<S> {
    match p.coeffs.len() {
        0 | 1 => Vec::new(),
        2 => {
            let r = -p.coeffs[0] / p.coeffs[1];
            if r >= lo - tol && r <= hi + tol {
                vec![r.max(lo).min(hi)]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut crit = roots_rec(&p.derivative(), lo, hi, tol);
            sort_scalars(&mut crit);
            crit.dedup();
            let touch = p.magnitude_bound(lo, hi) * S::epsilon() * S::lit(16.0);
            let mut roots = Vec::new();
            let mut knots = Vec::with_capacity(crit.len() + 2);
            knots.push(lo);
            knots.extend(crit.iter().copied().filter(|&c| c > lo && c < hi));
            knots.push(hi);
            for &c in &crit {
                if p.eval(c).abs() <= touch {
                    roots.push(c);
                }
            }
            for w in knots.windows(2) {
                let (u, v) = (w[0], w[1]);
                if !(u < v) {
                    continue;
                }
                let (fu, fv) = (p.eval(u), p.eval(v));
                if fu.is_zero() {
                    roots.push(u);
                } else if !fv.is_zero() && (fu < S::zero()) != (fv < S::zero()) {
                    roots.push(bisect(p, u, v, fu, tol));
                }
            }
            if p.eval(hi).is_zero() {
                roots.push(hi);
            }
            roots
        }
    }
}

fn bisect<S: Scalar>(p: &Polynomial<S>, mut u: S, mut v: S, mut fu: S, tol: S) -> S {
    let half = S::lit(0.5);
    for _ in 0..MAX_BISECTIONS {
        if v - u <= tol {
            break;
        }
        let m = (u + v) * half;
        if m <= u || m >= v {
            break;
        }
        let fm = p.eval(m);
        if fm.is_zero() {
            return m;
        }
        if (fm < S::zero()) == (fu < S::zero()) {
            u = m;
            fu = fm;
        } else {
            v = m;
        }
    }
    (u + v) * half
}

/// Piecewise polynomial on `t_0 < ... < t_m`.
///
/// Piece `i` is valid on `[t_i, t_{i+1}]` and is stored in the local
/// coordinate `x - t_i`, which keeps the expansion well conditioned far
/// from the origin. [`PiecewisePolynomial::from_global`] accepts pieces
/// written in `x` directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", try_from = "RawPiecewise<S>")]
pub struct PiecewisePolynomial<S> {
    breakpoints: Vec<S>,
    pieces: Vec<Polynomial<S>>,
}

#[derive(Deserialize)]
#[serde(bound = "S: Scalar")]
struct RawPiecewise<S> {
    breakpoints: Vec<S>,
    pieces: Vec<Polynomial<S>>,
}

impl<S: Scalar> TryFrom<RawPiecewise<S>> for PiecewisePolynomial<S> {
    type Error = Error;
    fn try_from(raw: RawPiecewise<S>) -> Result<Self> {
        Self::new(raw.breakpoints, raw.pieces)
    }
}

impl<S: Scalar> PiecewisePolynomial<S> {
    /// Pieces in local coordinates.
    pub fn new(breakpoints: Vec<S>, pieces: Vec<Polynomial<S>>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::validation("breakpoints", "need at least two"));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("breakpoints", "must be finite"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation(
                "breakpoints",
                "must be strictly increasing",
            ));
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::validation(
                "pieces",
                format!(
                    "expected {} pieces for {} breakpoints, got {}",
                    breakpoints.len() - 1,
                    breakpoints.len(),
                    pieces.len()
                ),
            ));
        }
        Ok(PiecewisePolynomial {
            breakpoints,
            pieces,
        })
    }

    /// Pieces written in the global coordinate `x`.
    pub fn from_global(breakpoints: Vec<S>, pieces: Vec<Polynomial<S>>) -> Result<Self> {
        if pieces.len() + 1 != breakpoints.len() {
            return Self::new(breakpoints, pieces);
        }
        let local = pieces
            .iter()
            .zip(&breakpoints)
            .map(|(p, &t)| p.taylor_shift(t))
            .collect();
        Self::new(breakpoints, local)
    }

    pub fn single(lo: S, hi: S, global: Polynomial<S>) -> Result<Self> {
        Self::from_global(vec![lo, hi], vec![global])
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Polynomial<S>] {
        &self.pieces
    }

    pub fn span(&self) -> (S, S) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn max_degree(&self) -> usize {
        self.pieces
            .iter()
            .map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    fn check_in_span(&self, x: S) -> Result<()> {
        let (lo, hi) = self.span();
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::domain(format!("{x} outside [{lo}, {hi}]")))
        }
    }

    /// Index of the piece whose half-open interval `[t_i, t_{i+1})` holds `x`;
    /// the right end belongs to the last piece.
    fn right_piece(&self, x: S) -> usize {
        let idx = self.breakpoints.partition_point(|&t| t <= x);
        idx.saturating_sub(1).min(self.pieces.len() - 1)
    }

    /// Index of the piece whose half-open interval `(t_i, t_{i+1}]` holds `x`.
    fn left_piece(&self, x: S) -> usize {
        let idx = self.breakpoints.partition_point(|&t| t < x);
        idx.saturating_sub(1).min(self.pieces.len() - 1)
    }

    /// Value at `x`; at a breakpoint the piece to the right is used.
    pub fn eval(&self, x: S) -> Result<S> {
        self.eval_derivative(x, 0)
    }

    /// `k`-th derivative from the right (the last piece at the right end).
    pub fn eval_derivative(&self, x: S, k: u32) -> Result<S> {
        self.check_in_span(x)?;
        let i = self.right_piece(x);
        Ok(self.pieces[i].derivative_n(k).eval(x - self.breakpoints[i]))
    }

    /// `k`-th derivative from the left (the first piece at the left end).
    pub fn eval_derivative_left(&self, x: S, k: u32) -> Result<S> {
        self.check_in_span(x)?;
        let i = self.left_piece(x);
        Ok(self.pieces[i].derivative_n(k).eval(x - self.breakpoints[i]))
    }

    pub fn derivative(&self) -> Self {
        PiecewisePolynomial {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(Polynomial::derivative).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        PiecewisePolynomial {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(Polynomial::neg).collect(),
        }
    }

    pub fn scale(&self, s: S) -> Self {
        PiecewisePolynomial {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(s)).collect(),
        }
    }
}

/// Supremum of `f` over `[lo, hi]` and the leftmost point attaining it.
///
/// Candidates are the interval ends, the breakpoints inside, and the
/// stationary points of every piece; at a breakpoint both adjacent pieces
/// are evaluated.
pub fn piecewise_sup<S: Scalar>(f: &PiecewisePolynomial<S>, lo: S, hi: S) -> Result<(S, S)> {
    let (a, b) = f.span();
    if !(lo >= a && hi <= b && lo <= hi) {
        return Err(Error::domain(format!(
            "interval [{lo}, {hi}] not within span [{a}, {b}]"
        )));
    }
    let tol = S::lit(DEFAULT_ROOT_TOL);
    let mut best: Option<(S, S)> = None;
    let mut consider = |x: S, v: S| {
        if best.is_none_or(|(bv, bx)| v > bv || (v == bv && x < bx)) {
            best = Some((v, x));
        }
    };
    for (i, piece) in f.pieces.iter().enumerate() {
        let (t0, t1) = (f.breakpoints[i], f.breakpoints[i + 1]);
        let u = lo.max(t0);
        let v = hi.min(t1);
        if u > v {
            continue;
        }
        consider(u, piece.eval(u - t0));
        consider(v, piece.eval(v - t0));
        if u < v && piece.degree() >= 2 {
            for r in roots_in_interval(&piece.derivative(), u - t0, v - t0, tol)? {
                consider(r + t0, piece.eval(r));
            }
        }
    }
    let (value, arg) = best.expect("span contains at least one piece");
    Ok((value, arg))
}

/// Infimum of `f` over `[lo, hi]` and the leftmost point attaining it.
pub fn piecewise_inf<S: Scalar>(f: &PiecewisePolynomial<S>, lo: S, hi: S) -> Result<(S, S)> {
    let (v, x) = piecewise_sup(&f.neg(), lo, hi)?;
    Ok((-v, x))
}
