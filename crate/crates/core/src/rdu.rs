//! Rank-dependent utility `R_{u,h}` and dual utility `I_h` on discrete
//! distributions.

use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::utility::UtilityFunction;
use crate::weighting::WeightingFunction;

/// A numerical representation of preferences over distributions: larger is
/// better.
pub trait Preference<S: Scalar> {
    fn evaluate(&self, x: &DiscreteDistribution<S>) -> Result<S>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct RduModel<S: Scalar> {
    pub utility: UtilityFunction<S>,
    pub weighting: WeightingFunction<S>,
}

impl<S: Scalar> RduModel<S> {
    pub fn new(utility: UtilityFunction<S>, weighting: WeightingFunction<S>) -> Self {
        RduModel { utility, weighting }
    }

    /// Dual utility: the identity utility on `domain`.
    pub fn dual(weighting: WeightingFunction<S>, domain: crate::distributions::Domain<S>) -> Self {
        RduModel::new(UtilityFunction::identity(domain), weighting)
    }
}

impl<S: Scalar> Preference<S> for RduModel<S> {
    fn evaluate(&self, x: &DiscreteDistribution<S>) -> Result<S> {
        rdu_eval(self, x)
    }
}

/// `sum_i (h(c_i) - h(c_{i-1})) u(x_i)` over outcomes in decreasing order,
/// with `c_i` the probability of the `i` best outcomes.
///
/// The last cumulative probability is set to exactly one and the earlier
/// ones are kept strictly below one, so a jump of `h` at one is charged to
/// the worst outcome only.
pub fn rdu_eval<S: Scalar>(model: &RduModel<S>, x: &DiscreteDistribution<S>) -> Result<S> {
    rank_weighted(&model.weighting, x, |v| model.utility.value(v))
}

/// `I_h(X)`, the rank-dependent functional with identity utility.
pub fn dual_eval<S: Scalar>(h: &WeightingFunction<S>, x: &DiscreteDistribution<S>) -> Result<S> {
    rank_weighted(h, x, Ok)
}

fn rank_weighted<S, F>(h: &WeightingFunction<S>, x: &DiscreteDistribution<S>, mut u: F) -> Result<S>
where
    S: Scalar,
    F: FnMut(S) -> Result<S>,
{
    let m = x.len();
    let below = S::one_below();
    let mut cum = S::zero();
    let mut prev = S::zero();
    let mut total = S::zero();
    for (i, (v, p)) in x.atoms().rev().enumerate() {
        cum = cum + p;
        let c = if i + 1 == m { S::one() } else { cum.min(below) };
        let w = h.eval_unchecked(c);
        total = total + (w - prev) * u(v)?;
        prev = w;
    }
    Ok(total)
}

/// `lambda E[u(X)] + (1 - lambda) u(min X)`.
pub fn closed_form_lambda<S: Scalar>(
    u: &UtilityFunction<S>,
    lambda: S,
    x: &DiscreteDistribution<S>,
) -> Result<S> {
    check_lambda(lambda)?;
    let eu = x.expect(|v| u.value(v))?;
    Ok(lambda * eu + (S::one() - lambda) * u.value(x.min())?)
}

fn check_lambda<S: Scalar>(lambda: S) -> Result<()> {
    if lambda >= S::zero() && lambda <= S::one() {
        Ok(())
    } else {
        Err(Error::validation(
            "lambda",
            format!("{lambda} not in [0, 1]"),
        ))
    }
}

/// `lambda E[u(X)] + (1 - lambda) min v(X)`: a mixture of an expected
/// utility and a worst-case criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ExpectationMinMixture<S: Scalar> {
    pub expectation: UtilityFunction<S>,
    pub worst_case: UtilityFunction<S>,
    pub lambda: S,
}

impl<S: Scalar> ExpectationMinMixture<S> {
    pub fn new(
        expectation: UtilityFunction<S>,
        worst_case: UtilityFunction<S>,
        lambda: S,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(ExpectationMinMixture {
            expectation,
            worst_case,
            lambda,
        })
    }
}

impl<S: Scalar> Preference<S> for ExpectationMinMixture<S> {
    fn evaluate(&self, x: &DiscreteDistribution<S>) -> Result<S> {
        let eu = x.expect(|v| self.expectation.value(v))?;
        let worst = self.worst_case.value(x.min())?;
        Ok(self.lambda * eu + (S::one() - self.lambda) * worst)
    }
}
