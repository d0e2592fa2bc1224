//! Sample-based checks for the generalized convexity classes of a problem
//! triple `(h, E, Psi)` over a feasible set.
//!
//! Every check discretizes the universally quantified defining inequality of
//! one property, scans the samples in a deterministic order, and returns a
//! [`CertReport`]: certified when no sampled instance is violated beyond
//! tolerance, refuted with a maximum-margin [`Witness`] otherwise. The
//! per-sample formulas live in [`evaluate_sample`] so that scan results,
//! reported witnesses and any external recomputation always agree bit for
//! bit.
//!
//! Throughout, for member points `s` and `t` and parameters `alpha, lambda
//! in [0, 1]`, write `a = alpha*s + E(s)`, `b = alpha*t + E(t)` and
//! `c = b + lambda*Psi(a, b)` for the combination point. The checked
//! inequalities are:
//!
//! * `sep`: `h(c) <= lambda*h(E(s)) + (1 - lambda)*h(E(t))`,
//! * `qsep`: `h(c) <= max(h(E(s)), h(E(t)))`,
//! * `strict_qsep`: the `qsep` inequality strict when `lambda` is interior
//!   and `h(E(s)) != h(E(t))`,
//! * `e_preinvex` and `e_prequasi_invex`: the `sep` and `qsep` inequalities
//!   with the shift pinned to `alpha = 0`,
//! * `sei`: `grad h(E(t)) . Psi(a, b) <= h(E(s)) - h(E(t))`,
//! * `qsei`: `h(E(s)) <= h(E(t))` implies `grad h(E(t)) . Psi(a, b) <= 0`,
//! * `psei`: `grad h(E(t)) . Psi(a, b) > 0` implies `h(E(s)) >= h(E(t))`,
//! * `condition_a`: the two kernel identities that relate `Psi` at the
//!   combination point back to `Psi(a, b)`.

use crate::error::{Error, Result};
use crate::expr::EvalError;
use crate::maps::{ScalarFn, VectorFn};
use crate::plan::{
    inequality_tolerance, value_tolerance, SamplingPlan, BASE_TOLERANCE, STRICTNESS_MARGIN,
};
use crate::report::{CertReport, Status, Witness};
use crate::scan::{max_margin_scan, path_point, PathPoint, SampleSpace};
use crate::sets::SetSpec;
use serde::{Deserialize, Serialize};

/// A function together with the maps and the set that its generalized
/// convexity is judged against.
#[derive(Debug, Clone)]
pub struct ProblemTriple {
    pub h: ScalarFn,
    pub grad_h: Option<VectorFn>,
    pub map_e: VectorFn,
    pub psi: VectorFn,
    pub e_inverse: Option<VectorFn>,
    pub set: SetSpec,
    /// Result of [`ProblemTriple::certify_set`], if it was run. Checks note
    /// whether this domain hypothesis report is attached.
    pub set_report: Option<Box<CertReport>>,
}

impl ProblemTriple {
    pub fn new(h: ScalarFn, map_e: VectorFn, psi: VectorFn, set: SetSpec) -> Result<Self> {
        crate::sets::check_map_dims(&set, &map_e, Some(&psi))?;
        if h.arity() != set.dim() {
            return Err(Error::DimensionMismatch {
                context: format!("function `{}`", h.name()),
                expected: set.dim(),
                got: h.arity(),
            });
        }
        Ok(ProblemTriple {
            h,
            grad_h: None,
            map_e,
            psi,
            e_inverse: None,
            set,
            set_report: None,
        })
    }

    /// Attaches an analytic gradient for `h`, used instead of finite
    /// differences by the gradient-based checks.
    pub fn with_gradient(mut self, grad_h: VectorFn) -> Result<Self> {
        let n = self.dim();
        if grad_h.in_dim() != n || grad_h.out_dim() != n {
            return Err(Error::GradientShape {
                name: grad_h.name().to_string(),
                got: if grad_h.in_dim() != n { grad_h.in_dim() } else { grad_h.out_dim() },
                expected: n,
            });
        }
        self.grad_h = Some(grad_h);
        Ok(self)
    }

    /// Attaches an explicit inverse of the map `E`, used by the kernel
    /// identity check instead of the numeric componentwise inversion.
    pub fn with_e_inverse(mut self, e_inverse: VectorFn) -> Result<Self> {
        let n = self.dim();
        if e_inverse.in_dim() != n || e_inverse.out_dim() != n {
            return Err(Error::DimensionMismatch {
                context: format!("inverse map `{}`", e_inverse.name()),
                expected: n,
                got: if e_inverse.in_dim() != n { e_inverse.in_dim() } else { e_inverse.out_dim() },
            });
        }
        self.e_inverse = Some(e_inverse);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Runs the strong E-invexity certification of the feasible set and
    /// stores the report; the function checks only sample pairs from the
    /// set, so this is the domain half of every hypothesis.
    pub fn certify_set(&mut self, plan: &SamplingPlan) -> Result<&CertReport> {
        let report = crate::sets::check_strongly_e_invex(&self.set, &self.map_e, &self.psi, plan)?;
        self.set_report = Some(Box::new(report));
        Ok(self.set_report.as_deref().unwrap())
    }
}

/// The checkable properties of a problem triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Sep,
    Qsep,
    StrictQsep,
    EPreinvex,
    EPrequasiInvex,
    Sei,
    Qsei,
    Psei,
    ConditionA,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Sep => "sep",
            CheckKind::Qsep => "qsep",
            CheckKind::StrictQsep => "strict_qsep",
            CheckKind::EPreinvex => "e_preinvex",
            CheckKind::EPrequasiInvex => "e_prequasi_invex",
            CheckKind::Sei => "sei",
            CheckKind::Qsei => "qsei",
            CheckKind::Psei => "psei",
            CheckKind::ConditionA => "condition_a",
        }
    }

    pub fn all() -> [CheckKind; 9] {
        [
            CheckKind::Sep,
            CheckKind::Qsep,
            CheckKind::StrictQsep,
            CheckKind::EPreinvex,
            CheckKind::EPrequasiInvex,
            CheckKind::Sei,
            CheckKind::Qsei,
            CheckKind::Psei,
            CheckKind::ConditionA,
        ]
    }

    /// Whether the defining inequality quantifies over the path parameter.
    pub fn uses_lambda(self) -> bool {
        !matches!(self, CheckKind::Sei | CheckKind::Qsei | CheckKind::Psei)
    }

    /// Whether the property is defined with the shift pinned to zero.
    pub fn pins_alpha_zero(self) -> bool {
        matches!(self, CheckKind::EPreinvex | CheckKind::EPrequasiInvex)
    }

    /// Whether the check needs a gradient of `h`.
    pub fn needs_gradient(self) -> bool {
        matches!(self, CheckKind::Sei | CheckKind::Qsei | CheckKind::Psei)
    }
}

impl std::str::FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<CheckKind> {
        CheckKind::all()
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = CheckKind::all().iter().map(|k| k.name()).collect();
                Error::Usage(format!("unknown property `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

impl std::fmt::Display for CheckKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything the defining inequality of one property says about one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleCheck {
    /// Left side of the inequality (what must be small, or the worst kernel
    /// identity residual).
    pub lhs: f64,
    /// Right side of the inequality (or the residual's tolerance).
    pub rhs: f64,
    /// How badly the sample violates the property; positive means violated.
    pub margin: f64,
    /// Whether the sample satisfies the property's precondition (strictness
    /// eligibility or gradient antecedent). Always true for unconditional
    /// inequalities.
    pub eligible: bool,
    /// Whether the sample refutes the property within tolerance.
    pub violated: bool,
}

/// Gradient of `h` at `x`: the attached analytic gradient if present,
/// otherwise central finite differences (see [`gradient_fd`]).
pub fn gradient(p: &ProblemTriple, x: &[f64]) -> Result<Vec<f64>> {
    if let Some(g) = &p.grad_h {
        return Ok(g.eval(x)?);
    }
    gradient_fd(p, x)
}

/// Finite-difference gradient of `h` at `x` with per-axis step
/// `cbrt(machine epsilon) * max(1, |x_i|)`, central where the stencil stays
/// in the box and one-sided at a face. Both stencil points falling outside
/// the box on some axis is an error rather than a silent extrapolation.
pub fn gradient_fd(p: &ProblemTriple, x: &[f64]) -> Result<Vec<f64>> {
    let n = p.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            context: "gradient point".into(),
            expected: n,
            got: x.len(),
        });
    }
    let mut grad = vec![0.0; n];
    let mut probe = x.to_vec();
    for i in 0..n {
        let step = f64::EPSILON.cbrt() * x[i].abs().max(1.0);
        let [lo, hi] = p.set.bounds().axis(i);
        let inside = x[i] >= lo && x[i] <= hi;
        let up_ok = !inside || x[i] + step <= hi;
        let down_ok = !inside || x[i] - step >= lo;
        grad[i] = match (up_ok, down_ok) {
            (true, true) => {
                probe[i] = x[i] + step;
                let f_up = p.h.eval(&probe)?;
                probe[i] = x[i] - step;
                let f_down = p.h.eval(&probe)?;
                (f_up - f_down) / (2.0 * step)
            }
            (true, false) => {
                probe[i] = x[i] + step;
                let f_up = p.h.eval(&probe)?;
                let f_at = p.h.eval(x)?;
                (f_up - f_at) / step
            }
            (false, true) => {
                let f_at = p.h.eval(x)?;
                probe[i] = x[i] - step;
                let f_down = p.h.eval(&probe)?;
                (f_at - f_down) / step
            }
            (false, false) => {
                return Err(Error::GradientStencil {
                    axis: i,
                    point: x.to_vec(),
                })
            }
        };
        probe[i] = x[i];
    }
    Ok(grad)
}

fn wrap_sample<'a>(s: &'a [f64], t: &'a [f64], alpha: f64, lambda: f64) -> impl Fn(EvalError) -> Error + 'a {
    move |e| Error::sample_eval(s, t, alpha, lambda, e)
}

/// Evaluates the defining inequality of `kind` at one sample with the
/// default base tolerance; see [`evaluate_sample_tol`].
pub fn evaluate_sample(
    kind: CheckKind,
    p: &ProblemTriple,
    s: &[f64],
    t: &[f64],
    alpha: f64,
    lambda: f64,
) -> Result<SampleCheck> {
    evaluate_sample_tol(kind, p, s, t, alpha, lambda, BASE_TOLERANCE)
}

/// Evaluates the defining inequality of `kind` at one sample. This is the
/// single source of the per-sample formulas: scans, witness reconstruction,
/// refinement and tests all call it. `base_tol` is the relative base
/// tolerance of the comparisons, normally the plan's.
pub fn evaluate_sample_tol(
    kind: CheckKind,
    p: &ProblemTriple,
    s: &[f64],
    t: &[f64],
    alpha: f64,
    lambda: f64,
    base_tol: f64,
) -> Result<SampleCheck> {
    let wrap = wrap_sample(s, t, alpha, lambda);
    let es = p.map_e.eval(s).map_err(&wrap)?;
    let et = p.map_e.eval(t).map_err(&wrap)?;
    let path = path_point(s, t, &es, &et, alpha, lambda, &p.psi).map_err(&wrap)?;

    let check = match kind {
        CheckKind::Sep | CheckKind::Qsep | CheckKind::StrictQsep | CheckKind::EPreinvex | CheckKind::EPrequasiInvex => {
            let h_es = p.h.eval(&es).map_err(&wrap)?;
            let h_et = p.h.eval(&et).map_err(&wrap)?;
            let lhs = p.h.eval(&path.c).map_err(&wrap)?;
            match kind {
                CheckKind::Sep | CheckKind::EPreinvex => {
                    let rhs = lambda * h_es + (1.0 - lambda) * h_et;
                    let margin = lhs - rhs;
                    SampleCheck {
                        lhs,
                        rhs,
                        margin,
                        eligible: true,
                        violated: margin > inequality_tolerance(base_tol, lhs, rhs),
                    }
                }
                CheckKind::Qsep | CheckKind::EPrequasiInvex => {
                    let rhs = h_es.max(h_et);
                    let margin = lhs - rhs;
                    SampleCheck {
                        lhs,
                        rhs,
                        margin,
                        eligible: true,
                        violated: margin > inequality_tolerance(base_tol, lhs, rhs),
                    }
                }
                CheckKind::StrictQsep => {
                    let rhs = h_es.max(h_et);
                    let eligible = lambda > 0.0
                        && lambda < 1.0
                        && (h_es - h_et).abs() > inequality_tolerance(base_tol, h_es, h_et);
                    let margin = lhs - rhs + STRICTNESS_MARGIN;
                    SampleCheck {
                        lhs,
                        rhs,
                        margin,
                        eligible,
                        violated: eligible && margin >= 0.0,
                    }
                }
                _ => unreachable!(),
            }
        }
        CheckKind::Sei | CheckKind::Qsei | CheckKind::Psei => {
            let h_es = p.h.eval(&es).map_err(&wrap)?;
            let h_et = p.h.eval(&et).map_err(&wrap)?;
            let grad = gradient(p, &et)?;
            let dot: f64 = grad.iter().zip(&path.psi_ab).map(|(g, d)| g * d).sum();
            match kind {
                CheckKind::Sei => {
                    let rhs = h_es - h_et;
                    let margin = dot - rhs;
                    SampleCheck {
                        lhs: dot,
                        rhs,
                        margin,
                        eligible: true,
                        violated: margin > inequality_tolerance(base_tol, dot, rhs),
                    }
                }
                CheckKind::Qsei => {
                    let eligible = h_es <= h_et + inequality_tolerance(base_tol, h_es, h_et);
                    let margin = dot;
                    SampleCheck {
                        lhs: dot,
                        rhs: 0.0,
                        margin,
                        eligible,
                        violated: eligible && dot > value_tolerance(base_tol, dot),
                    }
                }
                CheckKind::Psei => {
                    let eligible = dot > value_tolerance(base_tol, dot);
                    let margin = h_et - h_es;
                    SampleCheck {
                        lhs: h_es,
                        rhs: h_et,
                        margin,
                        eligible,
                        violated: eligible && margin > inequality_tolerance(base_tol, h_es, h_et),
                    }
                }
                _ => unreachable!(),
            }
        }
        CheckKind::ConditionA => {
            let first =
                kernel_identity_residual(p, s, t, alpha, lambda, &path, KernelIdentity::First, base_tol)?;
            let second =
                kernel_identity_residual(p, s, t, alpha, lambda, &path, KernelIdentity::Second, base_tol)?;
            if second.margin > first.margin {
                second
            } else {
                first
            }
        }
    };

    if !(check.lhs.is_finite() && check.rhs.is_finite()) {
        let e = EvalError {
            message: format!("the `{}` inequality produced a non-finite value", kind.name()),
            inputs: path.c,
        };
        return Err(wrap(e));
    }
    Ok(check)
}

/// Which of the two kernel identities of the path condition to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KernelIdentity {
    /// `Psi(b, alpha*v + E(v)) = -lambda * (alpha*v + Psi(a, b))`
    First,
    /// `Psi(a, alpha*v + E(v)) = (1 - lambda) * (alpha*v + Psi(a, b))`
    Second,
}

impl KernelIdentity {
    fn label(self) -> &'static str {
        match self {
            KernelIdentity::First => "condition_a:first_identity",
            KernelIdentity::Second => "condition_a:second_identity",
        }
    }
}

/// Recovers the point `v` with `E(v) = target` inside the sampled box, via
/// the attached inverse when there is one and a componentwise
/// scan-and-bisect otherwise. The recovered point is verified to reproduce
/// `target` within tolerance on every component.
pub fn recover_vbar(p: &ProblemTriple, target: &[f64]) -> Result<Vec<f64>> {
    let n = p.dim();
    let v = if let Some(inv) = &p.e_inverse {
        inv.eval(target)?
    } else {
        let mut v = p.set.bounds().center();
        for axis in 0..n {
            v[axis] = invert_component(p, axis, target[axis], &v)?;
        }
        v
    };
    let image = p.map_e.eval(&v)?;
    for i in 0..n {
        if (image[i] - target[i]).abs() > value_tolerance(BASE_TOLERANCE, target[i]) {
            return Err(Error::VbarRecovery {
                target: target.to_vec(),
                reason: format!(
                    "E(v) = {:?} at the recovered v = {:?} misses the target on component {} \
                     (the map may not be onto, or may not act componentwise)",
                    image, v, i
                ),
            });
        }
    }
    if !p.set.contains_by_definition(&v)? {
        return Err(Error::VbarRecovery {
            target: target.to_vec(),
            reason: format!("the recovered v = {:?} lies outside the set", v),
        });
    }
    Ok(v)
}

/// Solves `E(x)_axis = target` for the coordinate `x_axis`, holding the
/// other coordinates of `base` fixed: a coarse sign scan followed by
/// bisection, falling back to the best scanned value when the residual never
/// changes sign. The scan interval is the box axis inflated to cover the
/// target, since combination points routinely land outside the sampling
/// window.
fn invert_component(p: &ProblemTriple, axis: usize, target: f64, base: &[f64]) -> Result<f64> {
    const SCAN: usize = 64;
    let [blo, bhi] = p.set.bounds().axis(axis);
    let pad = (bhi - blo).abs().max(1.0);
    let lo = blo.min(target) - pad;
    let hi = bhi.max(target) + pad;
    let mut probe = base.to_vec();
    let residual = |xi: f64, probe: &mut Vec<f64>| -> Result<f64> {
        probe[axis] = xi;
        Ok(p.map_e.eval(probe)?[axis] - target)
    };

    let mut best = (f64::INFINITY, lo);
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=SCAN {
        let xi = lo + (hi - lo) * (k as f64) / (SCAN as f64);
        let r = residual(xi, &mut probe)?;
        if r.abs() < best.0 {
            best = (r.abs(), xi);
        }
        if let Some((pxi, pr)) = prev {
            if pr == 0.0 {
                return Ok(pxi);
            }
            if (pr < 0.0) != (r < 0.0) {
                bracket = Some((pxi, xi, pr));
                break;
            }
        }
        prev = Some((xi, r));
    }

    let Some((mut a, mut b, mut ra)) = bracket else {
        return Ok(best.1);
    };
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        let rm = residual(mid, &mut probe)?;
        if rm == 0.0 {
            return Ok(mid);
        }
        if (ra < 0.0) != (rm < 0.0) {
            b = mid;
        } else {
            a = mid;
            ra = rm;
        }
    }
    Ok(0.5 * (a + b))
}

#[allow(clippy::too_many_arguments)]
fn kernel_identity_residual(
    p: &ProblemTriple,
    s: &[f64],
    t: &[f64],
    alpha: f64,
    lambda: f64,
    path: &PathPoint,
    identity: KernelIdentity,
    base_tol: f64,
) -> Result<SampleCheck> {
    let n = p.dim();
    let vbar = recover_vbar(p, &path.c)?;
    let wrap = wrap_sample(s, t, alpha, lambda);
    // The shifted image of the recovered point; its E-image is the
    // combination point by construction.
    let bbar: Vec<f64> = (0..n).map(|i| alpha * vbar[i] + path.c[i]).collect();
    let anchor = match identity {
        KernelIdentity::First => &path.b,
        KernelIdentity::Second => &path.a,
    };
    let mut args = Vec::with_capacity(2 * n);
    args.extend_from_slice(anchor);
    args.extend_from_slice(&bbar);
    let actual = p.psi.eval(&args).map_err(&wrap)?;
    let factor = match identity {
        KernelIdentity::First => -lambda,
        KernelIdentity::Second => 1.0 - lambda,
    };
    let mut worst = SampleCheck {
        lhs: 0.0,
        rhs: 0.0,
        margin: f64::NEG_INFINITY,
        eligible: true,
        violated: false,
    };
    for i in 0..n {
        let expected = factor * (alpha * vbar[i] + path.psi_ab[i]);
        let residual = (actual[i] - expected).abs();
        let tol = inequality_tolerance(base_tol, actual[i], expected);
        let margin = residual - tol;
        if margin > worst.margin {
            worst = SampleCheck {
                lhs: residual,
                rhs: tol,
                margin,
                eligible: true,
                violated: margin > 0.0,
            };
        }
    }
    Ok(worst)
}

fn effective_plan(kind: CheckKind, plan: &SamplingPlan) -> SamplingPlan {
    let mut effective = plan.clone();
    if kind.pins_alpha_zero() {
        effective = effective.restrict_alphas(&[0.0]);
    }
    if !kind.uses_lambda() {
        effective = effective.restrict_lambdas(&[0.0]);
    }
    effective
}

fn attachment_note(p: &ProblemTriple) -> String {
    match &p.set_report {
        Some(r) => format!("set certification attached: {}", r.status),
        None => "set certification attached: none".to_string(),
    }
}

fn scan_property(
    property: &str,
    p: &ProblemTriple,
    plan: &SamplingPlan,
    space: &SampleSpace,
    sample: impl Fn(&[f64], &[f64], f64, f64) -> Result<SampleCheck> + Sync,
) -> Result<CertReport> {
    let total = space.total();
    let best = max_margin_scan(total, |index| {
        let (si, ti, alpha, lambda) = space.decode(index);
        let check = sample(&space.points[si], &space.points[ti], alpha, lambda)?;
        Ok(check.violated.then_some(check.margin))
    })?;

    let mut report = match best {
        None => CertReport::certified(property, total, plan.base_tolerance, plan.clone()),
        Some(best) => {
            let (si, ti, alpha, lambda) = space.decode(best.index);
            let s = &space.points[si];
            let t = &space.points[ti];
            let check = sample(s, t, alpha, lambda)?;
            let witness = Witness {
                s: s.clone(),
                t: t.clone(),
                alpha,
                lambda,
                lhs: check.lhs,
                rhs: check.rhs,
                margin: check.margin,
                sample_index: best.index,
            };
            CertReport::refuted(property, witness, total, plan.base_tolerance, plan.clone())
        }
    };
    report.push_note(attachment_note(p));
    for n in &space.notes {
        report.push_note(n.clone());
    }
    if total == 0 {
        report.push_note("no samples were available; the certification is vacuous".to_string());
    }
    Ok(report)
}

/// Runs the check for `kind` under `plan`. Definitional parameter pins are
/// applied automatically: the plain E-preinvexity kinds run with
/// `alpha = 0`, the gradient kinds do not quantify over `lambda`.
pub fn run_check(kind: CheckKind, p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    if kind == CheckKind::ConditionA {
        return check_condition_a(p, plan);
    }
    let effective = effective_plan(kind, plan);
    let space = SampleSpace::build(&p.set, &effective)?;
    let base_tol = effective.base_tolerance;
    let mut report = scan_property(kind.name(), p, &effective, &space, |s, t, alpha, lambda| {
        evaluate_sample_tol(kind, p, s, t, alpha, lambda, base_tol)
    })?;
    if kind == CheckKind::StrictQsep {
        report.push_note(format!(
            "strict inequalities are refuted when they fail to hold by more than {STRICTNESS_MARGIN:e}"
        ));
    }
    if kind.needs_gradient() && p.grad_h.is_none() {
        report.push_note("gradient: central finite differences (no analytic gradient attached)".to_string());
    }
    Ok(report)
}

pub fn check_sep(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    run_check(CheckKind::Sep, p, plan)
}

pub fn check_qsep(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    run_check(CheckKind::Qsep, p, plan)
}

pub fn check_strict_qsep(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    run_check(CheckKind::StrictQsep, p, plan)
}

pub fn check_e_preinvex(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    run_check(CheckKind::EPreinvex, p, plan)
}

pub fn check_e_prequasi_invex(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    run_check(CheckKind::EPrequasiInvex, p, plan)
}

pub fn check_sei(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    run_check(CheckKind::Sei, p, plan)
}

pub fn check_qsei(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    run_check(CheckKind::Qsei, p, plan)
}

pub fn check_psei(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    run_check(CheckKind::Psei, p, plan)
}

/// Checks both kernel identities of the path condition and reports them as
/// staged sub-results. The parent is certified only when both identities
/// hold on every sample.
pub fn check_condition_a(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let space = SampleSpace::build(&p.set, plan)?;
    let mut subs = Vec::with_capacity(2);
    for identity in [KernelIdentity::First, KernelIdentity::Second] {
        let sub = scan_property(identity.label(), p, plan, &space, |s, t, alpha, lambda| {
            let wrap = wrap_sample(s, t, alpha, lambda);
            let es = p.map_e.eval(s).map_err(&wrap)?;
            let et = p.map_e.eval(t).map_err(&wrap)?;
            let path = path_point(s, t, &es, &et, alpha, lambda, &p.psi).map_err(&wrap)?;
            kernel_identity_residual(p, s, t, alpha, lambda, &path, identity, plan.base_tolerance)
        })?;
        subs.push(sub);
    }

    let worst = subs
        .iter()
        .filter(|r| r.status == Status::Refuted)
        .max_by(|a, b| {
            let ma = a.witness.as_ref().map(|w| w.margin).unwrap_or(f64::NEG_INFINITY);
            let mb = b.witness.as_ref().map(|w| w.margin).unwrap_or(f64::NEG_INFINITY);
            ma.partial_cmp(&mb).unwrap()
        });

    let total = 2 * space.total();
    let mut report = match worst {
        None => CertReport::certified("condition_a", total, BASE_TOLERANCE, plan.clone()),
        Some(failing) => CertReport::refuted(
            "condition_a",
            failing.witness.clone().expect("refuted identity carries a witness"),
            total,
            BASE_TOLERANCE,
            plan.clone(),
        )
        .with_note(format!("failing identity: {}", failing.property)),
    };
    report.push_note(attachment_note(p));
    report.sub_reports = subs;
    Ok(report)
}

/// Searches for a violating sample of `kind` and optionally sharpens it by
/// coordinate ascent on the violation margin. Returns `None` when the scan
/// certifies the property.
pub fn find_counterexample(
    kind: CheckKind,
    p: &ProblemTriple,
    plan: &SamplingPlan,
    refine: bool,
) -> Result<Option<Witness>> {
    let report = run_check(kind, p, plan)?;
    let Some(mut witness) = report.witness else {
        return Ok(None);
    };
    if refine {
        refine_witness(kind, p, &mut witness, plan.base_tolerance)?;
    }
    Ok(Some(witness))
}

/// Coordinate ascent on the violation margin, moving the witness points
/// inside the set and the parameters inside [0, 1]. The sample index keeps
/// identifying the scan sample the refinement started from.
fn refine_witness(kind: CheckKind, p: &ProblemTriple, witness: &mut Witness, base_tol: f64) -> Result<()> {
    let n = p.dim();
    let margin_at = |s: &[f64], t: &[f64], alpha: f64, lambda: f64| -> Result<Option<f64>> {
        let check = evaluate_sample_tol(kind, p, s, t, alpha, lambda, base_tol)?;
        Ok(check.eligible.then_some(check.margin))
    };

    let mut s = witness.s.clone();
    let mut t = witness.t.clone();
    let mut alpha = witness.alpha;
    let mut lambda = witness.lambda;
    let Some(mut current) = margin_at(&s, &t, alpha, lambda)? else {
        return Ok(());
    };

    let mut coord_steps: Vec<f64> = (0..n).map(|i| p.set.bounds().width(i) / 20.0).collect();
    let mut param_step = 0.125;
    let tune_alpha = !kind.pins_alpha_zero();
    let tune_lambda = kind.uses_lambda();

    for _ in 0..256 {
        let mut improved = false;
        for which in 0..2 {
            for i in 0..n {
                if coord_steps[i] == 0.0 {
                    continue;
                }
                for dir in [1.0, -1.0] {
                    let point = if which == 0 { &s } else { &t };
                    let mut cand = point.clone();
                    cand[i] += dir * coord_steps[i];
                    if !p.set.is_member(&cand)? {
                        continue;
                    }
                    let (cs, ct) = if which == 0 { (&cand, &t) } else { (&s, &cand) };
                    if let Some(m) = margin_at(cs, ct, alpha, lambda)? {
                        if m > current {
                            current = m;
                            if which == 0 {
                                s = cand.clone();
                            } else {
                                t = cand.clone();
                            }
                            improved = true;
                        }
                    }
                }
            }
        }
        for dir in [1.0, -1.0] {
            if tune_alpha {
                let cand = (alpha + dir * param_step).clamp(0.0, 1.0);
                if cand != alpha {
                    if let Some(m) = margin_at(&s, &t, cand, lambda)? {
                        if m > current {
                            current = m;
                            alpha = cand;
                            improved = true;
                        }
                    }
                }
            }
            if tune_lambda {
                let cand = (lambda + dir * param_step).clamp(0.0, 1.0);
                if cand != lambda {
                    if let Some(m) = margin_at(&s, &t, alpha, cand)? {
                        if m > current {
                            current = m;
                            lambda = cand;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            for st in coord_steps.iter_mut() {
                *st *= 0.5;
            }
            param_step *= 0.5;
            let step_scale = coord_steps.iter().cloned().fold(param_step, f64::max);
            if step_scale < 1e-10 {
                break;
            }
        }
    }

    let check = evaluate_sample_tol(kind, p, &s, &t, alpha, lambda, base_tol)?;
    witness.s = s;
    witness.t = t;
    witness.alpha = alpha;
    witness.lambda = lambda;
    witness.lhs = check.lhs;
    witness.rhs = check.rhs;
    witness.margin = check.margin;
    Ok(())
}
