//! Greediness of a utility, pessimism of a weighting function, and the
//! chord-ratio index `Q_h`.
//!
//! ```text
//! G_u = sup_{x1 < x2 <= x3 < x4} [u(x4) - u(x3)]/(x4 - x3) / [u(x2) - u(x1)]/(x2 - x1)
//! P_h = inf_{0 < s < 1} [(1 - h(s))/(1 - s)] / [h(s)/s]
//! Q_h = inf_{s1 < s2 <= s3 < s4} chord(s3, s4) / chord(s1, s2)
//! ```
//!
//! Ratios `c/0` with `c > 0` are `+inf`; `0/0` ratios (two flat chords) are
//! left out. The pessimism objective is `+inf` wherever `h(s) = 0`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{roots_in_interval, Polynomial, DEFAULT_ROOT_TOL};
use crate::scalar::Scalar;
use crate::utility::{is_n_monotone, UtilityForm, UtilityFunction};
use crate::weighting::{WeightingForm, WeightingFunction};

pub const DEFAULT_INDEX_GRID: usize = 10_000;
const GOLDEN_ITERS: usize = 80;

/// A nonnegative real or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> Extended<S> {
    pub fn finite(self) -> Option<S> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// `num / den` for `num, den >= 0`; `None` for `0/0`.
    fn ratio(num: S, den: S) -> Option<Self> {
        if den > S::zero() {
            Some(Extended::Finite(num / den))
        } else if num > S::zero() {
            Some(Extended::Infinite)
        } else {
            None
        }
    }
}

impl<S: Scalar> PartialOrd for Extended<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Some(Ordering::Less),
            (Extended::Infinite, Extended::Finite(_)) => Some(Ordering::Greater),
            (Extended::Infinite, Extended::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl<S: Scalar> fmt::Display for Extended<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("+inf"),
        }
    }
}

const INFINITY_MARKER: &str = "+inf";

// A number, or the string "+inf".
impl<S: Scalar> Serialize for Extended<S> {
    fn serialize<Ser: Serializer>(
        &self,
        serializer: Ser,
    ) -> std::result::Result<Ser::Ok, Ser::Error> {
        match self {
            Extended::Finite(v) => v.serialize(serializer),
            Extended::Infinite => serializer.serialize_str(INFINITY_MARKER),
        }
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Extended<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged, bound = "S: Scalar")]
        enum Repr<S> {
            Num(S),
            Marker(String),
        }
        match Repr::<S>::deserialize(deserializer)? {
            Repr::Num(v) => Ok(Extended::Finite(v)),
            Repr::Marker(m) if m == INFINITY_MARKER => Ok(Extended::Infinite),
            Repr::Marker(m) => Err(serde::de::Error::custom(format!(
                "expected a number or \"{INFINITY_MARKER}\", got \"{m}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexMethod {
    ExactPiecewise,
    GridRefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct IndexValue<S: Scalar> {
    pub value: Extended<S>,
    /// `[x1, x2, x3, x4]` for chord ratios, `[s]` for pessimism. Equal
    /// neighbours stand for a one-sided derivative.
    pub attainers: Vec<S>,
    pub method: IndexMethod,
}

/// Greediness `G_u` with the default grid.
pub fn greediness<S: Scalar>(u: &UtilityFunction<S>) -> Result<IndexValue<S>> {
    greediness_with(u, DEFAULT_INDEX_GRID)
}

/// Greediness `G_u`.
///
/// Exact for piecewise-linear `u`: the largest ratio `s_j / s_i` of segment
/// slopes with `i <= j`. Other forms use a grid in which the best later
/// chord from `x3` is taken as the larger of `u'_+(x3)` and the chord to
/// `b`, and the worst earlier chord into `x2` as the smaller of `u'_-(x2)`
/// and the chord from `a`. This is exact for convex or concave `u` and a
/// lower bound otherwise.
pub fn greediness_with<S: Scalar>(
    u: &UtilityFunction<S>,
    grid_size: usize,
) -> Result<IndexValue<S>> {
    if !is_n_monotone(u, 1)?.holds {
        return Err(Error::validation("utility", "must be increasing"));
    }
    if let UtilityForm::PiecewiseLinear {
        breakpoints,
        values,
    } = u.form()
    {
        return Ok(slope_ratio_exact(breakpoints, values, Mode::Sup));
    }
    let d = u.domain();
    let f = |x: S| u.value(x);
    let fr = |x: S| u.eval(x, 1);
    let fl = |x: S| u.eval_left(x, 1);
    chord_grid(f, fr, fl, d.lo(), d.hi(), grid_size, Mode::Sup)
}

/// `Q_h` with the default grid.
pub fn q_index<S: Scalar>(h: &WeightingFunction<S>) -> Result<IndexValue<S>> {
    q_index_with(h, DEFAULT_INDEX_GRID)
}

/// `Q_h`; exact for piecewise-linear `h`, grid-refined otherwise.
pub fn q_index_with<S: Scalar>(
    h: &WeightingFunction<S>,
    grid_size: usize,
) -> Result<IndexValue<S>> {
    if let WeightingForm::PiecewiseLinear {
        breakpoints,
        values,
    } = h.form()
    {
        return Ok(slope_ratio_exact(breakpoints, values, Mode::Inf));
    }
    let f = |s: S| Ok(h.eval_unchecked(s));
    let fr = |s: S| Ok(h.derivative_right(s));
    let fl = |s: S| Ok(h.derivative_left(s));
    chord_grid(f, fr, fl, S::zero(), S::one(), grid_size, Mode::Inf)
}

/// Pessimism `P_h` with the default grid.
pub fn pessimism<S: Scalar>(h: &WeightingFunction<S>) -> Result<IndexValue<S>> {
    pessimism_with(h, DEFAULT_INDEX_GRID)
}

/// Pessimism `P_h`.
///
/// The endpoint limits are `1/h'_+(0)` at zero and, when `h` is continuous
/// at one, `h'_-(1)` at one (`+inf` across a jump). Piecewise-linear `h` is
/// handled exactly through the stationary points of the objective on each
/// piece; other forms on a grid with golden-section refinement.
pub fn pessimism_with<S: Scalar>(
    h: &WeightingFunction<S>,
    grid_size: usize,
) -> Result<IndexValue<S>> {
    if grid_size < 3 {
        return Err(Error::domain("grid needs at least three points"));
    }
    let mut best = Best::new(Mode::Inf);
    let d0 = h.derivative_right(S::zero());
    if let Some(v) = Extended::ratio(S::one(), d0) {
        best.offer(v, vec![S::zero()]);
    }
    if h.left_limit_at_one() == S::one() {
        best.offer(
            Extended::Finite(h.derivative_left(S::one())),
            vec![S::one()],
        );
    }
    let objective = |s: S| pessimism_objective(h, s);

    if let WeightingForm::PiecewiseLinear {
        breakpoints,
        values,
    } = h.form()
    {
        for i in 0..breakpoints.len() - 1 {
            let (p, q) = (breakpoints[i], breakpoints[i + 1]);
            if i > 0 {
                best.offer(objective(p), vec![p]);
            }
            let slope = (values[i + 1] - values[i]) / (q - p);
            let c0 = values[i] - slope * p;
            let num = Polynomial::new(vec![S::zero(), S::one() - c0, -slope])?;
            let den = Polynomial::new(vec![c0, slope - c0, -slope])?;
            let stationary = num
                .derivative()
                .mul(&den)?
                .sub(&num.mul(&den.derivative())?);
            if stationary.is_zero() {
                continue;
            }
            for s in roots_in_interval(&stationary, p, q, S::lit(DEFAULT_ROOT_TOL))? {
                if s > S::zero() && s < S::one() {
                    best.offer(objective(s), vec![s]);
                }
            }
        }
        return Ok(best.finish(IndexMethod::ExactPiecewise));
    }

    let n = grid_size - 1;
    let step = S::one() / S::from_count(n);
    let mut cell: Option<(usize, Extended<S>)> = None;
    for i in 1..n {
        let s = step * S::from_count(i);
        let v = objective(s);
        if cell.is_none_or(|(_, c)| v < c) {
            cell = Some((i, v));
        }
        best.offer(v, vec![s]);
    }
    if let Some((i, Extended::Finite(_))) = cell {
        let lo = step * S::from_count(i - 1);
        let hi = step * S::from_count(i + 1);
        let s = golden(lo, hi, |s| {
            objective(s).finite().map_or(S::infinity(), |v| v)
        });
        if s > S::zero() && s < S::one() {
            best.offer(objective(s), vec![s]);
        }
    }
    Ok(best.finish(IndexMethod::GridRefined))
}

fn pessimism_objective<S: Scalar>(h: &WeightingFunction<S>, s: S) -> Extended<S> {
    let hs = h.eval_unchecked(s);
    if hs <= S::zero() {
        return Extended::Infinite;
    }
    Extended::Finite(((S::one() - hs) * s) / ((S::one() - s) * hs))
}

/// `G_u <= P_h`, with `x <= +inf` for every `x`.
pub fn monotone_ra_condition<S: Scalar>(
    u: &UtilityFunction<S>,
    h: &WeightingFunction<S>,
) -> Result<bool> {
    let g = greediness(u)?.value;
    let p = pessimism(h)?.value;
    Ok(p.is_infinite() || g <= p)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Sup,
    Inf,
}

impl Mode {
    fn better<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            Mode::Sup => a > b,
            Mode::Inf => a < b,
        }
    }

    /// The outer chord extremum combines with the opposite inner one.
    fn pick<S: Scalar>(self, a: S, b: S, numerator: bool) -> S {
        match (self, numerator) {
            (Mode::Sup, true) | (Mode::Inf, false) => a.max(b),
            _ => a.min(b),
        }
    }
}

struct Best<S: Scalar> {
    mode: Mode,
    value: Option<Extended<S>>,
    attainers: Vec<S>,
}

impl<S: Scalar> Best<S> {
    fn new(mode: Mode) -> Self {
        Best {
            mode,
            value: None,
            attainers: Vec::new(),
        }
    }

    fn offer(&mut self, v: Extended<S>, at: Vec<S>) {
        if self.value.is_none_or(|cur| self.mode.better(v, cur)) {
            self.value = Some(v);
            self.attainers = at;
        }
    }

    fn finish(self, method: IndexMethod) -> IndexValue<S> {
        IndexValue {
            // An empty candidate set means every ratio was 0/0 or the
            // objective was infinite throughout.
            value: self.value.unwrap_or(Extended::Infinite),
            attainers: self.attainers,
            method,
        }
    }
}

fn slope_ratio_exact<S: Scalar>(breakpoints: &[S], values: &[S], mode: Mode) -> IndexValue<S> {
    let slopes: Vec<S> = (0..breakpoints.len() - 1)
        .map(|i| (values[i + 1] - values[i]) / (breakpoints[i + 1] - breakpoints[i]))
        .collect();
    let mut best = Best::new(mode);
    let mut inner: Option<usize> = None;
    for j in 0..slopes.len() {
        // Worst earlier slope for the ratio: smallest for a sup, largest
        // for an inf.
        if inner.is_none_or(|i| mode.better(slopes[i], slopes[j])) {
            inner = Some(j);
        }
        let i = inner.unwrap();
        // Flat earlier segments only enter through `c / 0`.
        for k in [i, j] {
            if let Some(v) = Extended::ratio(slopes[j], slopes[k]) {
                let at = if k == j {
                    let mid = (breakpoints[j] + breakpoints[j + 1]) * S::lit(0.5);
                    vec![breakpoints[j], mid, mid, breakpoints[j + 1]]
                } else {
                    vec![
                        breakpoints[k],
                        breakpoints[k + 1],
                        breakpoints[j],
                        breakpoints[j + 1],
                    ]
                };
                best.offer(v, at);
            }
        }
    }
    best.finish(IndexMethod::ExactPiecewise)
}

fn chord_grid<S, F, R, L>(
    f: F,
    fr: R,
    fl: L,
    lo: S,
    hi: S,
    grid_size: usize,
    mode: Mode,
) -> Result<IndexValue<S>>
where
    S: Scalar,
    F: Fn(S) -> Result<S>,
    R: Fn(S) -> Result<S>,
    L: Fn(S) -> Result<S>,
{
    if grid_size < 3 {
        return Err(Error::domain("grid needs at least three points"));
    }
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    // Extremal chord starting at t (numerator side) and ending at s
    // (denominator side); the partner is either adjacent or the endpoint.
    let outer = |t: S| -> Result<(S, S)> {
        if t >= hi {
            return Ok((fl(hi)?, hi));
        }
        let d = fr(t)?;
        let c = (f_hi - f(t)?) / (hi - t);
        let v = mode.pick(d, c, true);
        Ok((v, if v == c && c != d { hi } else { t }))
    };
    let inner = |s: S| -> Result<(S, S)> {
        if s <= lo {
            return Ok((fr(lo)?, lo));
        }
        let d = fl(s)?;
        let c = (f(s)? - f_lo) / (s - lo);
        let v = mode.pick(d, c, false);
        Ok((v, if v == c && c != d { lo } else { s }))
    };

    let n = grid_size - 1;
    let step = (hi - lo) / S::from_count(n);
    let point = |j: usize| {
        if j == n {
            hi
        } else {
            lo + step * S::from_count(j)
        }
    };
    let mut best = Best::new(mode);
    let mut cell: Option<(usize, usize)> = None;
    let mut running: Option<(S, usize)> = None;
    for j in 0..=n {
        let (b, _) = inner(point(j))?;
        let flip = match mode {
            Mode::Sup => Mode::Inf,
            Mode::Inf => Mode::Sup,
        };
        if running.is_none_or(|(r, _)| flip.better(b, r)) {
            running = Some((b, j));
        }
        let (den, i) = running.unwrap();
        let (num, _) = outer(point(j))?;
        if let Some(v) = Extended::ratio(num, den) {
            let before = best.value;
            best.offer(v, vec![]);
            if best.value != before {
                cell = Some((i, j));
            }
        }
    }

    let Some((i, j)) = cell else {
        return Ok(best.finish(IndexMethod::GridRefined));
    };
    // Refine each side within its neighbouring cells.
    let t = if j == n {
        hi
    } else {
        let (a, b) = (point(j.saturating_sub(1)), point(j + 1).min(hi));
        let sign = if mode == Mode::Sup {
            -S::one()
        } else {
            S::one()
        };
        let t = golden(a, b, |t| outer(t).map_or(S::infinity(), |(v, _)| sign * v));
        let keep = |x: S| outer(x).map(|(v, _)| v);
        if mode.better(keep(t)?, keep(point(j))?) {
            t
        } else {
            point(j)
        }
    };
    let s = if i == 0 {
        lo
    } else {
        let (a, b) = (point(i - 1), point(i + 1).min(t));
        let sign = if mode == Mode::Sup {
            S::one()
        } else {
            -S::one()
        };
        let s = golden(a, b, |s| inner(s).map_or(S::infinity(), |(v, _)| sign * v));
        let keep = |x: S| inner(x).map(|(v, _)| sign * v);
        if keep(s)? < keep(point(i))? {
            s
        } else {
            point(i)
        }
    };
    let (num, x4) = outer(t)?;
    let (den, x1) = inner(s)?;
    let refined = Extended::ratio(num, den);
    let grid_value = best.value;
    let mut out = best.finish(IndexMethod::GridRefined);
    if let Some(v) = refined {
        if grid_value.is_none_or(|g| !mode.better(g, v)) {
            out.value = v;
        }
    }
    out.attainers = vec![x1, s, t, x4];
    Ok(out)
}

/// Minimizer of `g` on `[lo, hi]` by golden-section search.
fn golden<S: Scalar, G: Fn(S) -> S>(lo: S, hi: S, g: G) -> S {
    let ratio = S::lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..GOLDEN_ITERS {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - ratio * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + ratio * (b - a);
            gd = g(d);
        }
    }
    let mid = (a + b) * S::lit(0.5);
    [lo, hi, mid]
        .into_iter()
        .fold(mid, |acc, x| if g(x) < g(acc) { x } else { acc })
}
