//! Finitely supported distributions on a closed interval `[a, b]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::sort_scalars;
use crate::scalar::Scalar;

/// Largest exponent accepted by [`DiscreteDistribution::lower_partial_moment`].
pub const MAX_MOMENT_ORDER: u32 = 8;

/// Tolerance on total mass when validating mixture weights.
pub const MASS_TOL: f64 = 1e-12;

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", try_from = "[S; 2]", into = "[S; 2]")]
pub struct Domain<S> {
    lo: S,
    hi: S,
}

impl<S: Scalar> Domain<S> {
    pub fn new(lo: S, hi: S) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::validation("domain", "bounds must be finite"));
        }
        if !(lo < hi) {
            return Err(Error::validation(
                "domain",
                format!("need a < b, got [{lo}, {hi}]"),
            ));
        }
        Ok(Domain { lo, hi })
    }

    pub fn lo(&self) -> S {
        self.lo
    }

    pub fn hi(&self) -> S {
        self.hi
    }

    pub fn width(&self) -> S {
        self.hi - self.lo
    }

    pub fn contains(&self, x: S) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// `n >= 2` equally spaced points from `lo` to `hi` inclusive.
    pub fn grid(&self, n: usize) -> Vec<S> {
        let n = n.max(2);
        let step = self.width() / S::from_count(n - 1);
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.hi
                } else {
                    self.lo + step * S::from_count(i)
                }
            })
            .collect()
    }
}

impl<S: Scalar> TryFrom<[S; 2]> for Domain<S> {
    type Error = Error;
    fn try_from(v: [S; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }
}

impl<S: Scalar> From<Domain<S>> for [S; 2] {
    fn from(d: Domain<S>) -> Self {
        [d.lo, d.hi]
    }
}

/// Distribution with finitely many atoms inside a bounded domain.
///
/// Support is strictly increasing, every probability is positive, and the
/// probabilities sum to one within [`MASS_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", try_from = "RawDistribution<S>")]
pub struct DiscreteDistribution<S> {
    domain: Domain<S>,
    support: Vec<S>,
    probs: Vec<S>,
}

#[derive(Deserialize)]
#[serde(bound = "S: Scalar")]
struct RawDistribution<S> {
    domain: [S; 2],
    support: Vec<S>,
    probs: Vec<S>,
}

impl<S: Scalar> TryFrom<RawDistribution<S>> for DiscreteDistribution<S> {
    type Error = Error;
    fn try_from(raw: RawDistribution<S>) -> Result<Self> {
        let domain = Domain::new(raw.domain[0], raw.domain[1])?;
        Self::new(domain, raw.support, raw.probs)
    }
}

/// Scalar functionals of a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Query<S> {
    Cdf(S),
    Survival(S),
    LeftQuantile(S),
    Min,
    Max,
    Mean,
}

impl<S: Scalar> DiscreteDistribution<S> {
    /// Sorts the atoms, merges duplicates by summing mass, drops zero-mass
    /// atoms, and normalizes.
    pub fn new(domain: Domain<S>, support: Vec<S>, probs: Vec<S>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::validation("support", "must not be empty"));
        }
        if support.len() != probs.len() {
            return Err(Error::validation(
                "probs",
                format!(
                    "length {} does not match support length {}",
                    probs.len(),
                    support.len()
                ),
            ));
        }
        if let Some(x) = support.iter().find(|&&x| !domain.contains(x)) {
            return Err(Error::validation(
                "support",
                format!("{x} outside domain [{}, {}]", domain.lo, domain.hi),
            ));
        }
        if probs.iter().any(|&p| !(p >= S::zero()) || !p.is_finite()) {
            return Err(Error::validation("probs", "must be finite and nonnegative"));
        }
        let total: S = probs.iter().copied().sum();
        if !(total > S::zero()) {
            return Err(Error::validation("probs", "total mass is zero"));
        }

        let mut atoms: Vec<(S, S)> = support
            .into_iter()
            .zip(probs)
            .filter(|&(_, p)| p > S::zero())
            .collect();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut support: Vec<S> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<S> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            if support.last() == Some(&x) {
                let last = probs.last_mut().unwrap();
                *last = *last + p;
            } else {
                support.push(x);
                probs.push(p);
            }
        }
        for p in &mut probs {
            *p = *p / total;
        }
        Ok(DiscreteDistribution {
            domain,
            support,
            probs,
        })
    }

    /// Convenience constructor taking the domain as a pair.
    pub fn from_parts(domain: (S, S), support: Vec<S>, probs: Vec<S>) -> Result<Self> {
        Self::new(Domain::new(domain.0, domain.1)?, support, probs)
    }

    pub fn point_mass(domain: Domain<S>, c: S) -> Result<Self> {
        if !domain.contains(c) {
            return Err(Error::domain(format!(
                "point {c} outside domain [{}, {}]",
                domain.lo, domain.hi
            )));
        }
        Ok(DiscreteDistribution {
            domain,
            support: vec![c],
            probs: vec![S::one()],
        })
    }

    /// Weight-mixture of distributions sharing one domain.
    pub fn mix(components: &[(S, &Self)]) -> Result<Self> {
        let (_, first) = components
            .first()
            .ok_or_else(|| Error::validation("components", "must not be empty"))?;
        let domain = first.domain;
        let mut total = S::zero();
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for &(w, d) in components {
            if !(w > S::zero() && w <= S::one()) {
                return Err(Error::validation("weights", format!("{w} not in (0, 1]")));
            }
            if d.domain != domain {
                return Err(Error::validation("domain", "mixture components disagree"));
            }
            total = total + w;
            for (&x, &p) in d.support.iter().zip(&d.probs) {
                support.push(x);
                probs.push(w * p);
            }
        }
        if (total - S::one()).abs() > S::tol_floor(MASS_TOL) {
            return Err(Error::validation(
                "weights",
                format!("sum to {total}, expected 1"),
            ));
        }
        Self::new(domain, support, probs)
    }

    pub fn domain(&self) -> Domain<S> {
        self.domain
    }

    pub fn support(&self) -> &[S] {
        &self.support
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn atoms(&self) -> impl DoubleEndedIterator<Item = (S, S)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    /// Right-continuous distribution function.
    pub fn cdf(&self, eta: S) -> S {
        let k = self.support.partition_point(|&x| x <= eta);
        if k == self.len() {
            S::one()
        } else {
            self.probs[..k].iter().copied().sum()
        }
    }

    /// `lim_{x -> eta^-} F(x)`.
    pub fn cdf_left(&self, eta: S) -> S {
        let k = self.support.partition_point(|&x| x < eta);
        if k == self.len() {
            S::one()
        } else {
            self.probs[..k].iter().copied().sum()
        }
    }

    pub fn survival(&self, eta: S) -> S {
        S::one() - self.cdf(eta)
    }

    /// `inf { x : F(x) >= s }` for `s` in `(0, 1]`.
    pub fn left_quantile(&self, s: S) -> Result<S> {
        if !(s > S::zero() && s <= S::one()) {
            return Err(Error::domain(format!("quantile level {s} not in (0, 1]")));
        }
        let last = self.len() - 1;
        let mut acc = S::zero();
        for (i, (x, p)) in self.atoms().enumerate() {
            acc = acc + p;
            if i == last || acc >= s {
                return Ok(x);
            }
        }
        unreachable!("distribution has at least one atom")
    }

    pub fn min(&self) -> S {
        self.support[0]
    }

    pub fn max(&self) -> S {
        *self.support.last().unwrap()
    }

    pub fn mean(&self) -> S {
        self.atoms().map(|(x, p)| x * p).sum()
    }

    pub fn query(&self, q: Query<S>) -> Result<S> {
        Ok(match q {
            Query::Cdf(eta) => self.cdf(eta),
            Query::Survival(eta) => self.survival(eta),
            Query::LeftQuantile(s) => self.left_quantile(s)?,
            Query::Min => self.min(),
            Query::Max => self.max(),
            Query::Mean => self.mean(),
        })
    }

    /// `E[(eta - X)_+^k]`, with `(eta - x)_+^0` read as `1` when `eta > x`
    /// and `0` otherwise.
    pub fn lower_partial_moment(&self, eta: S, k: u32) -> Result<S> {
        if k > MAX_MOMENT_ORDER {
            return Err(Error::domain(format!(
                "moment order {k} exceeds {MAX_MOMENT_ORDER}"
            )));
        }
        let below = self.support.partition_point(|&x| x < eta);
        Ok(self.support[..below]
            .iter()
            .zip(&self.probs[..below])
            .map(|(&x, &p)| p * (eta - x).powi(k as i32))
            .sum())
    }

    /// `E[(b - X)^k]` where `b` is the upper end of the domain.
    pub fn boundary_moment(&self, k: u32) -> S {
        let b = self.domain.hi;
        self.atoms().map(|(x, p)| p * (b - x).powi(k as i32)).sum()
    }

    /// `E[u(X)]` for a fallible integrand.
    pub fn expect<F>(&self, mut f: F) -> Result<S>
    where
        F: FnMut(S) -> Result<S>,
    {
        let mut acc = S::zero();
        for (x, p) in self.atoms() {
            acc = acc + p * f(x)?;
        }
        Ok(acc)
    }

    /// Distribution of `X + c`; fails if an atom leaves the domain.
    pub fn translate(&self, c: S) -> Result<Self> {
        let support: Vec<S> = self.support.iter().map(|&x| x + c).collect();
        if let Some(x) = support.iter().find(|&&x| !self.domain.contains(x)) {
            return Err(Error::Rejected(format!(
                "translated atom {x} leaves the domain"
            )));
        }
        Self::new(self.domain, support, self.probs.clone())
    }

    /// Distribution of `X + N` for independent `N`, kept in this domain.
    pub fn convolve(&self, noise: &Self) -> Result<Self> {
        let mut support = Vec::with_capacity(self.len() * noise.len());
        let mut probs = Vec::with_capacity(self.len() * noise.len());
        for (x, p) in self.atoms() {
            for (e, q) in noise.atoms() {
                let z = x + e;
                if !self.domain.contains(z) {
                    return Err(Error::Rejected(format!("atom {z} leaves the domain")));
                }
                support.push(z);
                probs.push(p * q);
            }
        }
        Self::new(self.domain, support, probs)
    }

    /// Merged, sorted support of two distributions.
    pub fn merged_support(&self, other: &Self) -> Vec<S> {
        let mut pts: Vec<S> = self.support.iter().chain(&other.support).copied().collect();
        sort_scalars(&mut pts);
        pts.dedup();
        pts
    }
}
