//! Sampling plans: how the universally quantified definitions are
//! discretized.
//!
//! Every check in this crate replaces quantifiers like "for all s, t in S and
//! alpha, lambda in [0,1]" with a finite, fully deterministic sample set:
//! a per-axis grid over the box, all ordered grid pairs (the diagonal s = t
//! included), a seeded batch of random pairs, and explicit alpha/lambda value
//! lists. Two runs with the same plan and the same inputs enumerate the same
//! samples in the same indexed order, which is what makes reports
//! byte-reproducible.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Base relative tolerance for inequality checks. An inequality `lhs <= rhs`
/// only counts as violated when `lhs - rhs > BASE_TOLERANCE * max(1, |lhs|,
/// |rhs|)`.
pub const BASE_TOLERANCE: f64 = 1e-9;

/// Slack used when refuting *strict* inequalities: `lhs < rhs` is treated as
/// violated once `lhs >= rhs - STRICTNESS_MARGIN`.
pub const STRICTNESS_MARGIN: f64 = 1e-6;

/// Scale-aware tolerance for a two-sided inequality.
pub fn inequality_tolerance(base: f64, lhs: f64, rhs: f64) -> f64 {
    base * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Scale-aware tolerance for a single quantity compared against zero.
pub fn value_tolerance(base: f64, value: f64) -> f64 {
    base * value.abs().max(1.0)
}

/// A deterministic discretization of the quantifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingPlan {
    /// Seed for the random pair batch.
    pub seed: u64,
    /// Grid resolution per axis (endpoints always included).
    pub grid_per_axis: usize,
    /// Number of uniformly drawn member pairs added on top of the grid pairs.
    pub random_pairs: usize,
    /// Values of the shift parameter alpha, sorted ascending.
    pub alpha_values: Vec<f64>,
    /// Values of the path parameter lambda, sorted ascending.
    pub lambda_values: Vec<f64>,
    /// Base relative tolerance used by every inequality comparison run
    /// under this plan; [`BASE_TOLERANCE`] unless overridden.
    pub base_tolerance: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            seed: 42,
            grid_per_axis: 21,
            random_pairs: 2000,
            alpha_values: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            lambda_values: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            base_tolerance: BASE_TOLERANCE,
        }
    }
}

impl SamplingPlan {
    /// Builds a validated plan. The alpha and lambda lists are augmented with
    /// {0, 1/2, 1}, sorted and deduplicated, so every plan exercises both
    /// endpoints and an interior value of each parameter.
    pub fn new(
        seed: u64,
        grid_per_axis: usize,
        random_pairs: usize,
        alpha_values: Vec<f64>,
        lambda_values: Vec<f64>,
    ) -> Result<Self> {
        let plan = SamplingPlan {
            seed,
            grid_per_axis,
            random_pairs,
            alpha_values: augment(alpha_values)?,
            lambda_values: augment(lambda_values)?,
            base_tolerance: BASE_TOLERANCE,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Checks the plan invariants: grid resolution at least 2, parameter
    /// values inside [0,1] containing 0, 1 and an interior value.
    pub fn validate(&self) -> Result<()> {
        if self.grid_per_axis < 2 {
            return Err(Error::InvalidPlan(format!(
                "grid_per_axis must be at least 2, got {}",
                self.grid_per_axis
            )));
        }
        for (name, values) in [
            ("alpha_values", &self.alpha_values),
            ("lambda_values", &self.lambda_values),
        ] {
            if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidPlan(format!(
                    "{} must lie in [0, 1], got {:?}",
                    name, values
                )));
            }
            let has0 = values.contains(&0.0);
            let has1 = values.contains(&1.0);
            let interior = values.iter().any(|v| *v > 0.0 && *v < 1.0);
            if !(has0 && has1 && interior) {
                return Err(Error::InvalidPlan(format!(
                    "{} must contain 0, 1 and an interior value, got {:?}",
                    name, values
                )));
            }
        }
        if !self.base_tolerance.is_finite() || self.base_tolerance <= 0.0 {
            return Err(Error::InvalidPlan(format!(
                "base_tolerance must be positive and finite, got {}",
                self.base_tolerance
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_grid(mut self, grid_per_axis: usize) -> Self {
        self.grid_per_axis = grid_per_axis;
        self
    }

    pub fn with_random_pairs(mut self, random_pairs: usize) -> Self {
        self.random_pairs = random_pairs;
        self
    }

    pub fn with_base_tolerance(mut self, base_tolerance: f64) -> Self {
        self.base_tolerance = base_tolerance;
        self
    }

    /// Replaces the alpha list without re-validation. This is how the
    /// definitional reductions are run: pinning alpha to {0} turns a strong
    /// E-invexity quantifier into the plain E-invexity one. Not meant for
    /// user-facing plans.
    pub fn restrict_alphas(&self, alphas: &[f64]) -> Self {
        let mut plan = self.clone();
        plan.alpha_values = alphas.to_vec();
        plan
    }

    /// Replaces the lambda list without re-validation; see
    /// [`SamplingPlan::restrict_alphas`].
    pub fn restrict_lambdas(&self, lambdas: &[f64]) -> Self {
        let mut plan = self.clone();
        plan.lambda_values = lambdas.to_vec();
        plan
    }
}

fn augment(mut values: Vec<f64>) -> Result<Vec<f64>> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidPlan("parameter values must not be NaN".into()));
    }
    for v in [0.0, 0.5, 1.0] {
        if !values.contains(&v) {
            values.push(v);
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    Ok(values)
}
