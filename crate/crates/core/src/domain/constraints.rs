use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};

/// Feasibility tolerance used by [`ConstraintSet::contains`].
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// Two samples closer than this in the ∞-norm, measured on the unit-rescaled
/// box, are considered the same sample.
pub const DUPLICATE_TOL: f64 = 1e-9;

/// A vector-valued constraint function `g(x)`.
#[derive(Clone)]
pub struct NonlinearConstraint(Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>);

impl NonlinearConstraint {
    pub fn new(g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self(Arc::new(g))
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.0)(x)
    }
}

impl fmt::Debug for NonlinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("NonlinearConstraint(..)")
    }
}

/// Linear constraints `A·x (<= | =) b`, stored row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraints {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl LinearConstraints {
    fn residuals<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.a
            .iter()
            .zip(&self.b)
            .map(move |(row, b)| row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b)
    }
}

/// The feasible region: bounds, optionally intersected with linear and
/// nonlinear (in)equality constraints.
///
/// Bounds are mandatory and every other constraint group is optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawConstraintSet")]
pub struct ConstraintSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linear_ineq: Option<LinearConstraints>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linear_eq: Option<LinearConstraints>,
    #[serde(skip)]
    nonlinear_ineq: Option<NonlinearConstraint>,
    #[serde(skip)]
    nonlinear_eq: Option<NonlinearConstraint>,
}

#[derive(Deserialize)]
struct RawConstraintSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(default)]
    linear_ineq: Option<LinearConstraints>,
    #[serde(default)]
    linear_eq: Option<LinearConstraints>,
}

impl TryFrom<RawConstraintSet> for ConstraintSet {
    type Error = crate::GmrsError;

    fn try_from(raw: RawConstraintSet) -> Result<Self> {
        let mut cs = ConstraintSet::new(raw.lower, raw.upper)?;
        if let Some(lin) = raw.linear_ineq {
            cs = cs.with_linear_ineq(lin.a, lin.b)?;
        }
        if let Some(lin) = raw.linear_eq {
            cs = cs.with_linear_eq(lin.a, lin.b)?;
        }
        Ok(cs)
    }
}

impl ConstraintSet {
    /// Box `lower <= x <= upper`. Requires `lower < upper` component-wise.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(invalid("bounds must have at least one coordinate"));
        }
        for (d, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(invalid(format!(
                    "bounds for coordinate {d} must be finite with lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            linear_ineq: None,
            linear_eq: None,
            nonlinear_ineq: None,
            nonlinear_eq: None,
        })
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n], vec![1.0; n])
    }

    pub fn with_linear_ineq(mut self, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        self.linear_ineq = Some(self.checked_linear(a, b)?);
        Ok(self)
    }

    pub fn with_linear_eq(mut self, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        self.linear_eq = Some(self.checked_linear(a, b)?);
        Ok(self)
    }

    pub fn with_nonlinear_ineq(mut self, g: NonlinearConstraint) -> Self {
        self.nonlinear_ineq = Some(g);
        self
    }

    pub fn with_nonlinear_eq(mut self, g: NonlinearConstraint) -> Self {
        self.nonlinear_eq = Some(g);
        self
    }

    fn checked_linear(&self, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<LinearConstraints> {
        check_dim(a.len(), b.len())?;
        for row in &a {
            check_dim(self.dim(), row.len())?;
        }
        Ok(LinearConstraints { a, b })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    /// True when anything beyond the bounds restricts the region.
    pub fn has_extra_constraints(&self) -> bool {
        self.linear_ineq.is_some()
            || self.linear_eq.is_some()
            || self.nonlinear_ineq.is_some()
            || self.nonlinear_eq.is_some()
    }

    /// Membership test with tolerance [`FEASIBILITY_TOL`].
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        let in_box = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (l, u))| *x >= l - FEASIBILITY_TOL && *x <= u + FEASIBILITY_TOL);
        Ok(in_box && self.satisfies_extra(x))
    }

    /// Checks every constraint group except the bounds.
    pub fn satisfies_extra(&self, x: &[f64]) -> bool {
        if let Some(lin) = &self.linear_ineq {
            if lin.residuals(x).any(|r| r > FEASIBILITY_TOL) {
                return false;
            }
        }
        if let Some(lin) = &self.linear_eq {
            if lin.residuals(x).any(|r| r.abs() > FEASIBILITY_TOL) {
                return false;
            }
        }
        if let Some(g) = &self.nonlinear_ineq {
            if g.eval(x).iter().any(|v| *v > FEASIBILITY_TOL) {
                return false;
            }
        }
        if let Some(g) = &self.nonlinear_eq {
            if g.eval(x).iter().any(|v| v.abs() > FEASIBILITY_TOL) {
                return false;
            }
        }
        true
    }

    /// Maps `x` from the box onto `[0, 1]^n`.
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(d, v)| (v - self.lower[d]) / self.width(d))
            .collect()
    }

    /// Inverse of [`ConstraintSet::to_unit`].
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(d, v)| self.lower[d] + v * self.width(d))
            .collect()
    }

    /// Membership of a point given in unit-box coordinates. Panics on a
    /// dimension mismatch.
    pub fn contains_unit(&self, u: &[f64]) -> bool {
        assert_eq!(u.len(), self.dim(), "point dimension");
        let in_box = u.iter().all(|v| (0.0..=1.0).contains(v));
        in_box && (!self.has_extra_constraints() || self.satisfies_extra(&self.from_unit(u)))
    }

    /// Clamps `x` onto the bounds.
    pub fn project(&self, x: &mut [f64]) {
        for (d, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[d], self.upper[d]);
        }
    }

    /// Per-coordinate duplicate tolerance: [`DUPLICATE_TOL`] times the box width.
    pub fn duplicate_tolerance(&self) -> DupTolerance {
        DupTolerance((0..self.dim()).map(|d| DUPLICATE_TOL * self.width(d)).collect())
    }
}

/// Absolute per-coordinate tolerance for sample identity.
#[derive(Debug, Clone, PartialEq)]
pub struct DupTolerance(pub Vec<f64>);

impl DupTolerance {
    pub fn uniform(n: usize, tol: f64) -> Self {
        Self(vec![tol; n])
    }

    pub fn same(&self, a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).zip(&self.0).all(|((a, b), t)| (a - b).abs() <= *t)
    }
}
