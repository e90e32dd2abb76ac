//! Probability weighting functions `h: [0, 1] -> [0, 1]`, increasing, with
//! `h(0) = 0` and `h(1) = 1`.
//!
//! Among the built-in forms only `lambda_jump` and `indicator_one` are
//! discontinuous, and only at `s = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance of the `h(s) / s` constancy test in [`classify_weighting`].
pub const LAMBDA_FORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "S: Scalar",
    tag = "form",
    content = "params",
    rename_all = "snake_case"
)]
pub enum WeightingForm<S> {
    Identity,
    /// `s^gamma`, `gamma >= 1`.
    Power {
        gamma: S,
    },
    /// `lambda s` below one, `1` at one.
    LambdaJump {
        lambda: S,
    },
    /// `0` below one, `1` at one.
    IndicatorOne,
    /// Continuous linear interpolation; breakpoints run from 0 to 1.
    PiecewiseLinear {
        breakpoints: Vec<S>,
        values: Vec<S>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "S: Scalar",
    try_from = "WeightingForm<S>",
    into = "WeightingForm<S>"
)]
pub struct WeightingFunction<S: Scalar> {
    form: WeightingForm<S>,
}

impl<S: Scalar> TryFrom<WeightingForm<S>> for WeightingFunction<S> {
    type Error = Error;
    fn try_from(form: WeightingForm<S>) -> Result<Self> {
        Self::new(form)
    }
}

impl<S: Scalar> From<WeightingFunction<S>> for WeightingForm<S> {
    fn from(h: WeightingFunction<S>) -> Self {
        h.form
    }
}

impl<S: Scalar> WeightingFunction<S> {
    pub fn new(form: WeightingForm<S>) -> Result<Self> {
        match &form {
            WeightingForm::Identity | WeightingForm::IndicatorOne => {}
            WeightingForm::Power { gamma } => {
                if !(gamma.is_finite() && *gamma >= S::one()) {
                    return Err(Error::validation("gamma", format!("{gamma} must be >= 1")));
                }
            }
            WeightingForm::LambdaJump { lambda } => {
                if !(*lambda >= S::zero() && *lambda <= S::one()) {
                    return Err(Error::validation(
                        "lambda",
                        format!("{lambda} not in [0, 1]"),
                    ));
                }
            }
            WeightingForm::PiecewiseLinear {
                breakpoints,
                values,
            } => {
                if breakpoints.len() < 2 || breakpoints.len() != values.len() {
                    return Err(Error::validation(
                        "values",
                        "need at least two breakpoints and one value per breakpoint",
                    ));
                }
                if breakpoints[0] != S::zero() || *breakpoints.last().unwrap() != S::one() {
                    return Err(Error::validation(
                        "breakpoints",
                        "must start at 0 and end at 1",
                    ));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::validation(
                        "breakpoints",
                        "must be strictly increasing",
                    ));
                }
                if values[0] != S::zero() || *values.last().unwrap() != S::one() {
                    return Err(Error::validation("values", "need h(0) = 0 and h(1) = 1"));
                }
                if values.windows(2).any(|w| !(w[0] <= w[1])) {
                    return Err(Error::validation("values", "must be increasing"));
                }
            }
        }
        Ok(WeightingFunction { form })
    }

    pub fn identity() -> Self {
        WeightingFunction {
            form: WeightingForm::Identity,
        }
    }

    pub fn power(gamma: S) -> Result<Self> {
        Self::new(WeightingForm::Power { gamma })
    }

    pub fn lambda_jump(lambda: S) -> Result<Self> {
        Self::new(WeightingForm::LambdaJump { lambda })
    }

    pub fn indicator_one() -> Self {
        WeightingFunction {
            form: WeightingForm::IndicatorOne,
        }
    }

    pub fn piecewise_linear(breakpoints: Vec<S>, values: Vec<S>) -> Result<Self> {
        Self::new(WeightingForm::PiecewiseLinear {
            breakpoints,
            values,
        })
    }

    pub fn form(&self) -> &WeightingForm<S> {
        &self.form
    }

    pub fn eval(&self, s: S) -> Result<S> {
        if !(s >= S::zero() && s <= S::one()) {
            return Err(Error::domain(format!("probability {s} not in [0, 1]")));
        }
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: S) -> S {
        match &self.form {
            WeightingForm::Identity => s,
            WeightingForm::Power { gamma } => s.powf(*gamma),
            WeightingForm::LambdaJump { lambda } => {
                if s < S::one() {
                    *lambda * s
                } else {
                    S::one()
                }
            }
            WeightingForm::IndicatorOne => {
                if s < S::one() {
                    S::zero()
                } else {
                    S::one()
                }
            }
            WeightingForm::PiecewiseLinear {
                breakpoints,
                values,
            } => {
                let i = segment(breakpoints, s, false);
                if s == breakpoints[i + 1] {
                    return values[i + 1];
                }
                let slope = (values[i + 1] - values[i]) / (breakpoints[i + 1] - breakpoints[i]);
                values[i] + slope * (s - breakpoints[i])
            }
        }
    }

    /// `lim_{s -> 1^-} h(s)`.
    pub fn left_limit_at_one(&self) -> S {
        match &self.form {
            WeightingForm::LambdaJump { lambda } => *lambda,
            WeightingForm::IndicatorOne => S::zero(),
            _ => S::one(),
        }
    }

    /// Right derivative on `[0, 1)`.
    pub fn derivative_right(&self, s: S) -> S {
        self.derivative(s, false)
    }

    /// Left derivative on `(0, 1]` of the restriction of `h` to `[0, 1)`
    /// (extended continuously to 1), so jumps at one are not included.
    pub fn derivative_left(&self, s: S) -> S {
        self.derivative(s, true)
    }

    fn derivative(&self, s: S, left: bool) -> S {
        match &self.form {
            WeightingForm::Identity => S::one(),
            WeightingForm::Power { gamma } => *gamma * s.powf(*gamma - S::one()),
            WeightingForm::LambdaJump { lambda } => *lambda,
            WeightingForm::IndicatorOne => S::zero(),
            WeightingForm::PiecewiseLinear {
                breakpoints,
                values,
            } => {
                let i = segment(breakpoints, s, left);
                (values[i + 1] - values[i]) / (breakpoints[i + 1] - breakpoints[i])
            }
        }
    }

    /// Breakpoints of the piecewise-linear form.
    pub fn segments(&self) -> Option<(&[S], &[S])> {
        match &self.form {
            WeightingForm::PiecewiseLinear {
                breakpoints,
                values,
            } => Some((breakpoints, values)),
            _ => None,
        }
    }
}

fn segment<S: Scalar>(breakpoints: &[S], s: S, left: bool) -> usize {
    let idx = if left {
        breakpoints.partition_point(|&t| t < s)
    } else {
        breakpoints.partition_point(|&t| t <= s)
    };
    idx.saturating_sub(1).min(breakpoints.len() - 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct WeightingClass<S> {
    pub convex: bool,
    pub continuous_below_one: bool,
    pub continuous_at_one: bool,
    /// `lambda` when `h(s) = lambda s` on `(0, 1)` and `h(1) = 1`.
    pub lambda_form: Option<S>,
}

/// Classifies `h` on a grid of `grid_size` points (plus any breakpoints).
///
/// Convexity is read off the chord slopes between consecutive grid points,
/// with the value at one included: a terminal upward jump keeps `h` convex,
/// since the left limit at one never exceeds `h(1) = 1`. Every built-in form
/// is continuous on `[0, 1)`.
pub fn classify_weighting<S: Scalar>(
    h: &WeightingFunction<S>,
    grid_size: usize,
) -> Result<WeightingClass<S>> {
    if grid_size < 3 {
        return Err(Error::domain("grid needs at least three points"));
    }
    let step = S::one() / S::from_count(grid_size - 1);
    let mut pts: Vec<S> = (0..grid_size)
        .map(|i| {
            if i + 1 == grid_size {
                S::one()
            } else {
                step * S::from_count(i)
            }
        })
        .collect();
    if let Some((bps, _)) = h.segments() {
        pts.extend_from_slice(bps);
        crate::numerics::sort_scalars(&mut pts);
        pts.dedup();
    }
    let vals: Vec<S> = pts.iter().map(|&s| h.eval_unchecked(s)).collect();
    let slopes: Vec<S> = (0..pts.len() - 1)
        .map(|i| (vals[i + 1] - vals[i]) / (pts[i + 1] - pts[i]))
        .collect();
    let slack = S::tol_floor(1e-9);
    let convex = slopes
        .windows(2)
        .all(|w| w[1] >= w[0] - slack * S::one().max(w[0].abs()));

    let continuous_at_one = (h.left_limit_at_one() - S::one()).abs() <= S::tol_floor(1e-15);

    let ratios: Vec<S> = pts
        .iter()
        .zip(&vals)
        .filter(|(&s, _)| s > S::zero() && s < S::one())
        .map(|(&s, &v)| v / s)
        .collect();
    let lambda_tol = S::tol_floor(LAMBDA_FORM_TOL);
    let lambda_form = match ratios.first() {
        Some(&r0)
            if h.eval_unchecked(S::one()) == S::one()
                && ratios.iter().all(|&r| (r - r0).abs() <= lambda_tol) =>
        {
            Some(r0)
        }
        _ => None,
    };

    Ok(WeightingClass {
        convex,
        continuous_below_one: true,
        continuous_at_one,
        lambda_form,
    })
}
