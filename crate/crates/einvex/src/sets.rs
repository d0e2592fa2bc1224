//! Feasible sets: axis-aligned boxes refined by scalar inequality
//! predicates, and the sample-based set certifications.
//!
//! A [`SetSpec`] always carries a box. What the box *means* depends on the
//! flavor:
//!
//! * a **bounded** set is the box intersected with the predicates; points
//!   outside the box are outside the set, full stop;
//! * a **window** set is defined by the predicates alone (no predicate means
//!   the whole space) and the box is only the region in which samples are
//!   drawn.
//!
//! The distinction matters for the invexity checks: the combination point
//! `alpha*t + E(t) + lambda*Psi(..)` frequently leaves any finite sampling
//! window even when the underlying set is the whole space, and treating that
//! as a membership failure would refute sets that are perfectly well behaved.

use crate::error::{Error, Result};
use crate::maps::{ScalarFn, VectorFn};
use crate::plan::{value_tolerance, SamplingPlan, BASE_TOLERANCE};
use crate::report::{CertReport, Witness};
use crate::scan::{max_margin_scan, path_point, SampleSpace};

/// An axis-aligned box. An axis with `lo > hi` makes the box empty, which is
/// how intersections report disjointness.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    axes: Vec<[f64; 2]>,
}

impl BoxBounds {
    pub fn new(axes: Vec<[f64; 2]>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidPlan("box bounds need at least one axis".into()));
        }
        if axes.iter().any(|[lo, hi]| lo.is_nan() || hi.is_nan() || lo.is_infinite() || hi.is_infinite()) {
            return Err(Error::InvalidPlan("box bounds must be finite".into()));
        }
        Ok(BoxBounds { axes })
    }

    /// Convenience constructor for the common hypercube case.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        BoxBounds::new(vec![[lo, hi]; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> [f64; 2] {
        self.axes[i]
    }

    pub fn axes(&self) -> &[[f64; 2]] {
        &self.axes
    }

    pub fn is_empty(&self) -> bool {
        self.axes.iter().any(|[lo, hi]| lo > hi)
    }

    pub fn width(&self, i: usize) -> f64 {
        let [lo, hi] = self.axes[i];
        (hi - lo).max(0.0)
    }

    pub fn max_width(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).fold(0.0, f64::max)
    }

    pub fn center(&self) -> Vec<f64> {
        self.axes.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect()
    }

    /// Worst excess of `p` over the box faces; nonpositive inside.
    pub fn excess(&self, p: &[f64]) -> f64 {
        self.axes
            .iter()
            .zip(p)
            .map(|([lo, hi], x)| (lo - x).max(x - hi))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let e = self.excess(p);
        e <= value_tolerance(BASE_TOLERANCE, e)
    }

    /// `n` evenly spaced values along axis `i`, endpoints exact.
    pub fn linspace(&self, i: usize, n: usize) -> Vec<f64> {
        let [lo, hi] = self.axes[i];
        if lo > hi {
            return Vec::new();
        }
        if n <= 1 || lo == hi {
            return vec![lo];
        }
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * (k as f64) / ((n - 1) as f64)
                }
            })
            .collect()
    }

    pub fn intersect(&self, other: &BoxBounds) -> Result<BoxBounds> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: "box intersection".into(),
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let axes = self
            .axes
            .iter()
            .zip(&other.axes)
            .map(|([alo, ahi], [blo, bhi])| [alo.max(*blo), ahi.min(*bhi)])
            .collect();
        BoxBounds::new(axes)
    }
}

/// A feasible set: box plus scalar predicates `g_k(x) <= 0`.
#[derive(Debug, Clone)]
pub struct SetSpec {
    bounds: BoxBounds,
    predicates: Vec<ScalarFn>,
    bounded: bool,
}

impl SetSpec {
    /// A set that *is* the box (intersected with any predicates added later).
    pub fn bounded(bounds: BoxBounds) -> Self {
        SetSpec {
            bounds,
            predicates: Vec::new(),
            bounded: true,
        }
    }

    /// A set defined by predicates only; the box is just a sampling window.
    pub fn window(bounds: BoxBounds) -> Self {
        SetSpec {
            bounds,
            predicates: Vec::new(),
            bounded: false,
        }
    }

    /// Adds a predicate `g(x) <= 0`.
    pub fn with_predicate(mut self, g: ScalarFn) -> Result<Self> {
        if g.arity() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: format!("predicate `{}`", g.name()),
                expected: self.dim(),
                got: g.arity(),
            });
        }
        self.predicates.push(g);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    pub fn predicates(&self) -> &[ScalarFn] {
        &self.predicates
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "set membership query".into(),
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Membership used when *drawing samples*: inside the box and satisfying
    /// every predicate, each within its scale-aware tolerance.
    pub fn is_member(&self, p: &[f64]) -> Result<bool> {
        self.check_dim(p)?;
        let be = self.bounds.excess(p);
        if be > value_tolerance(BASE_TOLERANCE, be) {
            return Ok(false);
        }
        for g in &self.predicates {
            let v = g.eval(p)?;
            if v > value_tolerance(BASE_TOLERANCE, v) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Worst constraint value of the set's *definition* at `p`: box excess
    /// and predicates for a bounded set, predicates alone for a window set.
    /// `NEG_INFINITY` means nothing constrains the point.
    pub fn membership_violation(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p)?;
        let mut worst = f64::NEG_INFINITY;
        if self.bounded {
            worst = self.bounds.excess(p);
        }
        for g in &self.predicates {
            worst = worst.max(g.eval(p)?);
        }
        Ok(worst)
    }

    /// Whether the set, by its definition, contains `p` (within tolerance).
    pub fn contains_by_definition(&self, p: &[f64]) -> Result<bool> {
        let v = self.membership_violation(p)?;
        Ok(v <= value_tolerance(BASE_TOLERANCE, v))
    }

    /// Intersection: boxes intersect, predicates concatenate. The result is
    /// bounded if either operand is.
    pub fn intersect(&self, other: &SetSpec) -> Result<SetSpec> {
        let bounds = self.bounds.intersect(&other.bounds)?;
        let mut predicates = self.predicates.clone();
        predicates.extend(other.predicates.iter().cloned());
        Ok(SetSpec {
            bounds,
            predicates,
            bounded: self.bounded || other.bounded,
        })
    }
}

/// The sublevel set `{x in universe : h(x) <= r}`, built by adjoining the
/// predicate `h(x) - r <= 0` to the universe.
pub fn sublevel_set(h: &ScalarFn, r: f64, universe: &SetSpec) -> Result<SetSpec> {
    if h.arity() != universe.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("sublevel function `{}`", h.name()),
            expected: universe.dim(),
            got: h.arity(),
        });
    }
    let h = h.clone();
    let g = ScalarFn::from_fn(
        format!("({}) - {}", h.name(), r),
        h.arity(),
        move |x| Ok(h.eval(x)? - r),
    );
    universe.clone().with_predicate(g)
}

pub(crate) fn check_map_dims(set: &SetSpec, map_e: &VectorFn, psi: Option<&VectorFn>) -> Result<()> {
    let n = set.dim();
    if map_e.in_dim() != n || map_e.out_dim() != n {
        return Err(Error::DimensionMismatch {
            context: format!("map `{}` must send the set's space to itself", map_e.name()),
            expected: n,
            got: if map_e.in_dim() != n { map_e.in_dim() } else { map_e.out_dim() },
        });
    }
    if let Some(psi) = psi {
        if psi.in_dim() != 2 * n || psi.out_dim() != n {
            return Err(Error::DimensionMismatch {
                context: format!("kernel `{}` must map two points to a direction", psi.name()),
                expected: 2 * n,
                got: if psi.in_dim() != 2 * n { psi.in_dim() } else { psi.out_dim() },
            });
        }
    }
    Ok(())
}

fn membership_mode_note(set: &SetSpec) -> String {
    if set.is_bounded() {
        format!(
            "membership: box and {} predicate(s); the box is part of the set definition",
            set.predicates().len()
        )
    } else {
        format!(
            "membership: {} predicate(s); the box is a sampling window only",
            set.predicates().len()
        )
    }
}

/// Certifies or refutes closure of `set` under the two-parameter family of
/// combination points `alpha*t + E(t) + lambda*Psi(alpha*s + E(s), alpha*t +
/// E(t))` over all sampled member pairs.
pub fn check_strongly_e_invex(
    set: &SetSpec,
    map_e: &VectorFn,
    psi: &VectorFn,
    plan: &SamplingPlan,
) -> Result<CertReport> {
    check_map_dims(set, map_e, Some(psi))?;
    let space = SampleSpace::build(set, plan)?;
    let images: Vec<Vec<f64>> = space
        .points
        .iter()
        .map(|p| map_e.eval(p).map_err(|e| Error::sample_eval(p, p, 0.0, 0.0, e)))
        .collect::<Result<_>>()?;

    let total = space.total();
    let eval = |index: u64| -> Result<Option<f64>> {
        let (si, ti, alpha, lambda) = space.decode(index);
        let wrap =
            |e: crate::expr::EvalError| Error::sample_eval(&space.points[si], &space.points[ti], alpha, lambda, e);
        let path = path_point(
            &space.points[si],
            &space.points[ti],
            &images[si],
            &images[ti],
            alpha,
            lambda,
            psi,
        )
        .map_err(wrap)?;
        let v = set.membership_violation(&path.c)?;
        if !v.is_finite() && v != f64::NEG_INFINITY {
            let e = crate::expr::EvalError {
                message: "membership violation is not finite".to_string(),
                inputs: path.c.clone(),
            };
            return Err(Error::sample_eval(&space.points[si], &space.points[ti], alpha, lambda, e));
        }
        Ok((v > value_tolerance(plan.base_tolerance, v)).then_some(v))
    };

    let best = max_margin_scan(total, eval)?;
    let mut report = match best {
        None => CertReport::certified("strongly_e_invex_set", total, plan.base_tolerance, plan.clone()),
        Some(best) => {
            let (si, ti, alpha, lambda) = space.decode(best.index);
            let path = path_point(
                &space.points[si],
                &space.points[ti],
                &images[si],
                &images[ti],
                alpha,
                lambda,
                psi,
            )
            .map_err(|e| Error::sample_eval(&space.points[si], &space.points[ti], alpha, lambda, e))?;
            let v = set.membership_violation(&path.c)?;
            let witness = Witness {
                s: space.points[si].clone(),
                t: space.points[ti].clone(),
                alpha,
                lambda,
                lhs: v,
                rhs: 0.0,
                margin: best.margin,
                sample_index: best.index,
            };
            CertReport::refuted("strongly_e_invex_set", witness, total, plan.base_tolerance, plan.clone()).with_note(
                "a combination point left the set: the set is not strongly E-invex as sampled, or a bounded box is cutting it off",
            )
        }
    };
    report.push_note(membership_mode_note(set));
    for n in &space.notes {
        report.push_note(n.clone());
    }
    if total == 0 {
        report.push_note("no samples were available; the certification is vacuous".to_string());
    }
    Ok(report)
}

/// Certifies or refutes `E(S) subset of S` over the sampled members.
pub fn check_e_image_subset(set: &SetSpec, map_e: &VectorFn, plan: &SamplingPlan) -> Result<CertReport> {
    check_map_dims(set, map_e, None)?;
    let space = SampleSpace::build(set, plan)?;
    let total = space.points.len() as u64;
    let eval = |index: u64| -> Result<Option<f64>> {
        let p = &space.points[index as usize];
        let image = map_e.eval(p).map_err(|e| Error::sample_eval(p, p, 0.0, 0.0, e))?;
        let v = set.membership_violation(&image)?;
        Ok((v > value_tolerance(plan.base_tolerance, v)).then_some(v))
    };
    let best = max_margin_scan(total, eval)?;
    let mut report = match best {
        None => CertReport::certified("e_image_subset", total, plan.base_tolerance, plan.clone()),
        Some(best) => {
            let p = space.points[best.index as usize].clone();
            let witness = Witness {
                s: p.clone(),
                t: p,
                alpha: 0.0,
                lambda: 0.0,
                lhs: best.margin,
                rhs: 0.0,
                margin: best.margin,
                sample_index: best.index,
            };
            CertReport::refuted("e_image_subset", witness, total, plan.base_tolerance, plan.clone())
                .with_note("the image E(s) of the witness point s leaves the set")
        }
    };
    report.push_note(membership_mode_note(set));
    for n in &space.notes {
        report.push_note(n.clone());
    }
    if total == 0 {
        report.push_note("no samples were available; the certification is vacuous".to_string());
    }
    Ok(report)
}
