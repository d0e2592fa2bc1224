//! Verification suites for the closure and implication statements that tie
//! the function classes together.
//!
//! Every suite follows the same discipline: each hypothesis of the statement
//! is re-verified on the given plan and embedded as a sub-report, and the
//! conclusion is only asserted when every hypothesis certified. Three
//! outcomes are possible:
//!
//! * all stages certify: the suite is certified on the samples;
//! * some hypothesis is refuted: the suite reports `Refuted` and does not
//!   evaluate the conclusion (the statement says nothing about this input);
//! * every hypothesis certifies but the conclusion is refuted on the very
//!   same samples: the suite reports `TheoremViolation`, which signals a
//!   sampling inconsistency or an implementation bug and maps to its own
//!   process exit code.

use crate::classifiers::{
    check_condition_a, check_psei, check_qsei, check_qsep, check_sei, check_sep, gradient, ProblemTriple,
};
use crate::error::{Error, Result};
use crate::expr::EvalError;
use crate::maps::{ScalarFn, VectorFn};
use crate::plan::{inequality_tolerance, value_tolerance, SamplingPlan};
use crate::report::{CertReport, Status, Witness};
use crate::scan::{max_margin_scan, member_grid, path_point, SampleSpace};
use crate::sets::{check_e_image_subset, check_strongly_e_invex, sublevel_set, SetSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A finite family of scalar functions standing in for an arbitrary index
/// set, with optional nonnegative weights (for linear combinations) and an
/// optional outer scalar function (for compositions).
#[derive(Debug, Clone)]
pub struct FamilySpec {
    members: Vec<ScalarFn>,
    weights: Option<Vec<f64>>,
    outer: Option<ScalarFn>,
}

impl FamilySpec {
    pub fn new(members: Vec<ScalarFn>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Usage("a function family needs at least one member".into()));
        }
        let arity = members[0].arity();
        if members.iter().any(|m| m.arity() != arity) {
            return Err(Error::Usage("all family members must share one arity".into()));
        }
        Ok(FamilySpec {
            members,
            weights: None,
            outer: None,
        })
    }

    /// A family that only carries an outer composition function.
    pub fn outer_only(g: ScalarFn) -> Result<Self> {
        if g.arity() != 1 {
            return Err(Error::Usage("the outer function must take a single scalar".into()));
        }
        Ok(FamilySpec {
            members: Vec::new(),
            weights: None,
            outer: Some(g),
        })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.members.len() {
            return Err(Error::Usage(format!(
                "{} weights for {} members",
                weights.len(),
                self.members.len()
            )));
        }
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::Usage("weights must be nonnegative".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn with_outer(mut self, g: ScalarFn) -> Result<Self> {
        if g.arity() != 1 {
            return Err(Error::Usage("the outer function must take a single scalar".into()));
        }
        self.outer = Some(g);
        Ok(self)
    }

    pub fn members(&self) -> &[ScalarFn] {
        &self.members
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn outer(&self) -> Option<&ScalarFn> {
        self.outer.as_ref()
    }
}

/// A scalar function of two stacked points, `F(s, t)` with `s, t` of equal
/// dimension.
#[derive(Debug, Clone)]
pub struct BivariateFn {
    f: ScalarFn,
}

impl BivariateFn {
    pub fn new(f: ScalarFn) -> Result<Self> {
        if f.arity() < 2 || !f.arity().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                context: format!("bivariate function `{}` needs an even arity", f.name()),
                expected: 2,
                got: f.arity(),
            });
        }
        Ok(BivariateFn { f })
    }

    pub fn scalar(&self) -> &ScalarFn {
        &self.f
    }

    pub fn half_dim(&self) -> usize {
        self.f.arity() / 2
    }
}

fn with_h(base: &ProblemTriple, h: ScalarFn) -> Result<ProblemTriple> {
    let mut p = ProblemTriple::new(h, base.map_e.clone(), base.psi.clone(), base.set.clone())?;
    p.set_report = base.set_report.clone();
    Ok(p)
}

/// Collects the stage reports into the suite verdict described in the module
/// docs. `conclusion` is `None` exactly when it was skipped because a
/// hypothesis failed.
fn assemble_suite(
    name: &str,
    plan: &SamplingPlan,
    hypotheses: Vec<CertReport>,
    conclusion: Option<CertReport>,
) -> CertReport {
    let samples: u64 = hypotheses
        .iter()
        .chain(conclusion.iter())
        .map(|r| r.samples_checked)
        .sum();
    let failed = hypotheses.iter().find(|r| !r.is_certified());
    let mut report = match (failed, &conclusion) {
        (Some(h), _) => {
            let mut r = CertReport {
                property: name.to_string(),
                status: Status::Refuted,
                witness: h.witness.clone(),
                samples_checked: samples,
                tolerance: plan.base_tolerance,
                plan: plan.clone(),
                notes: Vec::new(),
                sub_reports: Vec::new(),
            };
            r.push_note(format!(
                "hypothesis `{}` was not certified, so the statement asserts nothing here; the conclusion was {}",
                h.property,
                if conclusion.is_some() { "evaluated for reference only" } else { "not evaluated" },
            ));
            r
        }
        (None, Some(c)) if c.is_certified() => CertReport {
            property: name.to_string(),
            status: Status::CertifiedOnSamples,
            witness: None,
            samples_checked: samples,
            tolerance: plan.base_tolerance,
            plan: plan.clone(),
            notes: Vec::new(),
            sub_reports: Vec::new(),
        },
        (None, Some(c)) => {
            let mut r = CertReport {
                property: name.to_string(),
                status: Status::TheoremViolation,
                witness: c.witness.clone(),
                samples_checked: samples,
                tolerance: plan.base_tolerance,
                plan: plan.clone(),
                notes: Vec::new(),
                sub_reports: Vec::new(),
            };
            r.push_note(format!(
                "every hypothesis certified on this plan, yet the conclusion `{}` was refuted on the same \
                 samples: either the sampled hypotheses miss the failure region or there is an implementation bug",
                c.property
            ));
            r
        }
        (None, None) => unreachable!("a suite with certified hypotheses always evaluates its conclusion"),
    };
    report.sub_reports = hypotheses;
    if let Some(c) = conclusion {
        report.sub_reports.push(c);
    }
    report
}

/// Serial max-margin fold for the small custom stage scans.
fn fold_best(best: &mut Option<(f64, u64)>, margin: f64, index: u64) {
    match best {
        Some((m, _)) if margin <= *m => {}
        _ => *best = Some((margin, index)),
    }
}

/// Stage: `h(alpha*t + E(t)) <= h(E(t))` over sampled points and shifts,
/// which is the lambda = 0, s = t slice of the quasi inequality.
fn shift_inequality_stage(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let space = SampleSpace::build(&p.set, plan)?;
    let n_a = plan.alpha_values.len() as u64;
    let total = space.points.len() as u64 * n_a;
    let eval_at = |index: u64| -> Result<(Vec<f64>, f64, f64, f64)> {
        let t = &space.points[(index / n_a) as usize];
        let alpha = plan.alpha_values[(index % n_a) as usize];
        let wrap = |e: EvalError| Error::sample_eval(t, t, alpha, 0.0, e);
        let et = p.map_e.eval(t).map_err(wrap)?;
        let shifted: Vec<f64> = t.iter().zip(&et).map(|(ti, ei)| alpha * ti + ei).collect();
        let lhs = p.h.eval(&shifted).map_err(wrap)?;
        let rhs = p.h.eval(&et).map_err(wrap)?;
        Ok((t.clone(), alpha, lhs, rhs))
    };

    let best = max_margin_scan(total, |index| {
        let (_, _, lhs, rhs) = eval_at(index)?;
        let margin = lhs - rhs;
        Ok((margin > inequality_tolerance(plan.base_tolerance, lhs, rhs)).then_some(margin))
    })?;

    let mut report = match best {
        None => CertReport::certified("conclusion:shift_inequality", total, plan.base_tolerance, plan.clone()),
        Some(best) => {
            let (t, alpha, lhs, rhs) = eval_at(best.index)?;
            let witness = Witness {
                s: t.clone(),
                t,
                alpha,
                lambda: 0.0,
                lhs,
                rhs,
                margin: best.margin,
                sample_index: best.index,
            };
            CertReport::refuted("conclusion:shift_inequality", witness, total, plan.base_tolerance, plan.clone())
        }
    };
    report.push_note("samples enumerate (point, alpha); lambda plays no role in this inequality".to_string());
    Ok(report)
}

/// Stage: `h(E(s)) <= h(E(t))` over all ordered sampled pairs; since both
/// orders are sampled this certifies exactly when `h` is level on the image
/// of `E`.
fn h_e_level_stage(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let space = SampleSpace::build(&p.set, plan)?;
    let total = space.pairs.len() as u64;
    let sides = |index: u64| -> Result<(usize, usize, f64, f64)> {
        let (si, ti) = space.pairs[index as usize];
        let (s, t) = (&space.points[si as usize], &space.points[ti as usize]);
        let wrap = |e: EvalError| Error::sample_eval(s, t, 0.0, 0.0, e);
        let h_es = p.h.eval(&p.map_e.eval(s).map_err(wrap)?).map_err(wrap)?;
        let h_et = p.h.eval(&p.map_e.eval(t).map_err(wrap)?).map_err(wrap)?;
        Ok((si as usize, ti as usize, h_es, h_et))
    };

    let best = max_margin_scan(total, |index| {
        let (_, _, h_es, h_et) = sides(index)?;
        let margin = h_es - h_et;
        Ok((margin > inequality_tolerance(plan.base_tolerance, h_es, h_et)).then_some(margin))
    })?;

    let mut report = match best {
        None => CertReport::certified("hypothesis:h_e_level", total, plan.base_tolerance, plan.clone()),
        Some(best) => {
            let (si, ti, h_es, h_et) = sides(best.index)?;
            let witness = Witness {
                s: space.points[si].clone(),
                t: space.points[ti].clone(),
                alpha: 0.0,
                lambda: 0.0,
                lhs: h_es,
                rhs: h_et,
                margin: best.margin,
                sample_index: best.index,
            };
            CertReport::refuted("hypothesis:h_e_level", witness, total, plan.base_tolerance, plan.clone())
        }
    };
    report.push_note(
        "requires h(E(s)) <= h(E(t)) on every ordered pair, i.e. h is level on the sampled image of E".to_string(),
    );
    Ok(report)
}

/// Stage: `grad h(E(t)) . Psi(a, b) >= 0` over sampled pairs and shifts.
fn nonneg_dot_stage(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let space = SampleSpace::build(&p.set, plan)?;
    let n_a = plan.alpha_values.len() as u64;
    let total = space.pairs.len() as u64 * n_a;
    let dot_at = |index: u64| -> Result<(usize, usize, f64, f64)> {
        let (si, ti) = space.pairs[(index / n_a) as usize];
        let alpha = plan.alpha_values[(index % n_a) as usize];
        let (s, t) = (&space.points[si as usize], &space.points[ti as usize]);
        let wrap = |e: EvalError| Error::sample_eval(s, t, alpha, 0.0, e);
        let es = p.map_e.eval(s).map_err(wrap)?;
        let et = p.map_e.eval(t).map_err(wrap)?;
        let path = path_point(s, t, &es, &et, alpha, 0.0, &p.psi).map_err(wrap)?;
        let grad = gradient(p, &et)?;
        let dot: f64 = grad.iter().zip(&path.psi_ab).map(|(g, d)| g * d).sum();
        Ok((si as usize, ti as usize, alpha, dot))
    };

    let best = max_margin_scan(total, |index| {
        let (_, _, _, dot) = dot_at(index)?;
        Ok((dot < -value_tolerance(plan.base_tolerance, dot)).then_some(-dot))
    })?;

    let mut report = match best {
        None => CertReport::certified("hypothesis:nonneg_dot", total, plan.base_tolerance, plan.clone()),
        Some(best) => {
            let (si, ti, alpha, dot) = dot_at(best.index)?;
            let witness = Witness {
                s: space.points[si].clone(),
                t: space.points[ti].clone(),
                alpha,
                lambda: 0.0,
                lhs: dot,
                rhs: 0.0,
                margin: best.margin,
                sample_index: best.index,
            };
            CertReport::refuted("hypothesis:nonneg_dot", witness, total, plan.base_tolerance, plan.clone())
        }
    };
    report.push_note("requires the directional term to be nonnegative on every sampled (s, t, alpha)".to_string());
    Ok(report)
}

/// Stage: every sampled point and its E-image have `h >= 0`.
fn nonnegative_stage(label: String, h: &ScalarFn, p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let space = SampleSpace::build(&p.set, plan)?;
    let total = space.points.len() as u64;
    let worst_at = |index: u64| -> Result<(usize, f64)> {
        let x = &space.points[index as usize];
        let wrap = |e: EvalError| Error::sample_eval(x, x, 0.0, 0.0, e);
        let at_x = h.eval(x).map_err(wrap)?;
        let at_ex = h.eval(&p.map_e.eval(x).map_err(wrap)?).map_err(wrap)?;
        Ok((index as usize, at_x.min(at_ex)))
    };
    let best = max_margin_scan(total, |index| {
        let (_, v) = worst_at(index)?;
        Ok((v < -value_tolerance(plan.base_tolerance, v)).then_some(-v))
    })?;
    let report = match best {
        None => CertReport::certified(label, total, plan.base_tolerance, plan.clone()),
        Some(best) => {
            let (i, v) = worst_at(best.index)?;
            let witness = Witness {
                s: space.points[i].clone(),
                t: space.points[i].clone(),
                alpha: 0.0,
                lambda: 0.0,
                lhs: v,
                rhs: 0.0,
                margin: best.margin,
                sample_index: best.index,
            };
            CertReport::refuted(label, witness, total, plan.base_tolerance, plan.clone())
        }
    };
    Ok(report.with_note("requires h >= 0 at every sampled point and its E-image".to_string()))
}

/// Verifies that a quasi-certified function cannot increase along the pure
/// shift `t -> alpha*t + E(t)`: hypothesis `qsep`, conclusion the shift
/// inequality `h(alpha*t + E(t)) <= h(E(t))` on all sampled `(t, alpha)`.
pub fn verify_shift_property(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let qsep = check_qsep(p, plan)?.labeled("hypothesis:qsep");
    let conclusion = if qsep.is_certified() {
        Some(shift_inequality_stage(p, plan)?)
    } else {
        None
    };
    Ok(assemble_suite("suite:shift_property", plan, vec![qsep], conclusion))
}

/// Verifies closure of the quasi class under nonnegative linear
/// combinations: every member must be quasi-certified and nonnegative on the
/// samples, and then the weighted sum is asserted quasi on the same plan.
pub fn verify_linear_combination(fam: &FamilySpec, base: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let weights = fam
        .weights()
        .ok_or_else(|| Error::Usage("a linear combination needs weights on the family".into()))?
        .to_vec();
    let mut hypotheses = Vec::new();
    for (j, member) in fam.members().iter().enumerate() {
        let member_triple = with_h(base, member.clone())?;
        hypotheses.push(check_qsep(&member_triple, plan)?.labeled(format!("hypothesis:member[{j}]:qsep")));
        hypotheses.push(nonnegative_stage(
            format!("hypothesis:member[{j}]:nonnegative"),
            member,
            base,
            plan,
        )?);
    }

    let conclusion = if hypotheses.iter().all(CertReport::is_certified) {
        let members: Vec<ScalarFn> = fam.members().to_vec();
        let ws = weights.clone();
        let name = members
            .iter()
            .zip(&ws)
            .map(|(m, w)| format!("{w}*({})", m.name()))
            .collect::<Vec<_>>()
            .join(" + ");
        let combo = ScalarFn::from_fn(name, base.dim(), move |x| {
            let mut acc = 0.0;
            for (m, w) in members.iter().zip(&ws) {
                acc += w * m.eval(x)?;
            }
            Ok(acc)
        });
        Some(check_qsep(&with_h(base, combo)?, plan)?.labeled("conclusion:qsep"))
    } else {
        None
    };
    Ok(assemble_suite("suite:linear_combination", plan, hypotheses, conclusion))
}

/// Verifies closure under pointwise maxima: each member quasi-certified,
/// then the max of the family asserted quasi.
pub fn verify_sup_family(fam: &FamilySpec, base: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let mut hypotheses = Vec::new();
    for (j, member) in fam.members().iter().enumerate() {
        let member_triple = with_h(base, member.clone())?;
        hypotheses.push(check_qsep(&member_triple, plan)?.labeled(format!("hypothesis:member[{j}]:qsep")));
    }

    let conclusion = if hypotheses.iter().all(CertReport::is_certified) {
        let members: Vec<ScalarFn> = fam.members().to_vec();
        let name = format!(
            "max({})",
            members.iter().map(|m| m.name().to_string()).collect::<Vec<_>>().join(", ")
        );
        let sup = ScalarFn::from_fn(name, base.dim(), move |x| {
            let mut best = f64::NEG_INFINITY;
            for m in &members {
                best = best.max(m.eval(x)?);
            }
            Ok(best)
        });
        Some(check_qsep(&with_h(base, sup)?, plan)?.labeled("conclusion:qsep"))
    } else {
        None
    };
    Ok(assemble_suite("suite:sup_family", plan, hypotheses, conclusion))
}

/// Spot checks for the outer composition function: positive homogeneity
/// `g(c*x) = c*g(x)` at `c in {0.5, 1, 2, 10}` over 50 seeded values, and
/// monotonicity over 200 seeded ordered pairs. Values are drawn from the
/// range of `h` over the sampled points, widened to cover [-1, 1].
fn outer_spot_checks(g: &ScalarFn, p: &ProblemTriple, plan: &SamplingPlan) -> Result<(CertReport, CertReport)> {
    const FACTORS: [f64; 4] = [0.5, 1.0, 2.0, 10.0];
    let points = member_grid(&p.set, plan.grid_per_axis)?;
    let mut lo = -1.0f64;
    let mut hi = 1.0f64;
    for x in &points {
        let v = p.h.eval(x)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let xs: Vec<f64> = (0..50).map(|_| rng.gen_range(lo..=hi)).collect();

    let mut best: Option<(f64, u64)> = None;
    let mut homo_witness = None;
    for (i, &x) in xs.iter().enumerate() {
        for (k, &c) in FACTORS.iter().enumerate() {
            let lhs = g.eval(&[c * x])?;
            let rhs = c * g.eval(&[x])?;
            let margin = (lhs - rhs).abs() - inequality_tolerance(plan.base_tolerance, lhs, rhs);
            if margin > 0.0 {
                let index = (i * FACTORS.len() + k) as u64;
                let before = best;
                fold_best(&mut best, margin, index);
                if best != before {
                    homo_witness = Some(Witness {
                        s: vec![x],
                        t: vec![c * x],
                        alpha: c,
                        lambda: 0.0,
                        lhs,
                        rhs,
                        margin,
                        sample_index: index,
                    });
                }
            }
        }
    }
    let homo_total = (xs.len() * FACTORS.len()) as u64;
    let homogeneous = match homo_witness {
        None => CertReport::certified("hypothesis:outer_homogeneous", homo_total, plan.base_tolerance, plan.clone()),
        Some(w) => CertReport::refuted("hypothesis:outer_homogeneous", w, homo_total, plan.base_tolerance, plan.clone()),
    }
    .with_note("witness fields: s = [x], t = [c*x], alpha = c, comparing g(c*x) with c*g(x)".to_string());

    let mut best: Option<(f64, u64)> = None;
    let mut mono_witness = None;
    for i in 0..200u64 {
        let a = rng.gen_range(lo..=hi);
        let b = rng.gen_range(lo..=hi);
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        let gx = g.eval(&[x])?;
        let gy = g.eval(&[y])?;
        let margin = gx - gy - inequality_tolerance(plan.base_tolerance, gx, gy);
        if margin > 0.0 {
            let before = best;
            fold_best(&mut best, margin, i);
            if best != before {
                mono_witness = Some(Witness {
                    s: vec![x],
                    t: vec![y],
                    alpha: 0.0,
                    lambda: 0.0,
                    lhs: gx,
                    rhs: gy,
                    margin,
                    sample_index: i,
                });
            }
        }
    }
    let monotone = match mono_witness {
        None => CertReport::certified("hypothesis:outer_monotone", 200, plan.base_tolerance, plan.clone()),
        Some(w) => CertReport::refuted("hypothesis:outer_monotone", w, 200, plan.base_tolerance, plan.clone()),
    }
    .with_note("witness fields: s = [x], t = [y] with x <= y, comparing g(x) with g(y)".to_string());

    Ok((homogeneous, monotone))
}

/// Verifies closure under composition with a positively homogeneous,
/// nondecreasing outer function: spot checks on `g` first (a failure skips
/// the expensive stages), then `h` quasi-certified, then `g o h` asserted
/// quasi.
pub fn verify_composition(fam: &FamilySpec, base: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let g = fam
        .outer()
        .ok_or_else(|| Error::Usage("composition needs an outer function on the family".into()))?;
    let (homogeneous, monotone) = outer_spot_checks(g, base, plan)?;
    if !(homogeneous.is_certified() && monotone.is_certified()) {
        return Ok(assemble_suite(
            "suite:composition",
            plan,
            vec![homogeneous, monotone],
            None,
        ));
    }

    let qsep = check_qsep(base, plan)?.labeled("hypothesis:qsep");
    let hypotheses = vec![homogeneous, monotone, qsep];
    let conclusion = if hypotheses.iter().all(CertReport::is_certified) {
        let gc = g.clone();
        let hc = base.h.clone();
        let name = format!("({}) o ({})", gc.name(), hc.name());
        let composed = ScalarFn::from_fn(name, base.dim(), move |x| gc.eval(&[hc.eval(x)?]));
        Some(check_qsep(&with_h(base, composed)?, plan)?.labeled("conclusion:qsep"))
    } else {
        None
    };
    Ok(assemble_suite("suite:composition", plan, hypotheses, conclusion))
}

/// Verifies that convexity along paths plus levelness of `h` on the image of
/// `E` forces the quasi inequality: hypotheses `sep` and the pairwise level
/// condition, conclusion `qsep`.
pub fn verify_sep_implies_qsep(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let hypotheses = vec![
        check_sep(p, plan)?.labeled("hypothesis:sep"),
        h_e_level_stage(p, plan)?,
    ];
    let conclusion = if hypotheses.iter().all(CertReport::is_certified) {
        Some(check_qsep(p, plan)?.labeled("conclusion:qsep"))
    } else {
        None
    };
    Ok(assemble_suite("suite:sep_implies_qsep", plan, hypotheses, conclusion))
}

/// Verifies the gradient analogue of [`verify_sep_implies_qsep`]:
/// hypotheses `sei` and the level condition, conclusion `qsei`.
pub fn verify_sei_implies_qsei(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let hypotheses = vec![
        check_sei(p, plan)?.labeled("hypothesis:sei"),
        h_e_level_stage(p, plan)?,
    ];
    let conclusion = if hypotheses.iter().all(CertReport::is_certified) {
        Some(check_qsei(p, plan)?.labeled("conclusion:qsei"))
    } else {
        None
    };
    Ok(assemble_suite("suite:sei_implies_qsei", plan, hypotheses, conclusion))
}

/// Verifies that the gradient inequality together with the kernel path
/// identities forces convexity along paths: hypotheses `sei` and
/// `condition_a`, conclusion `sep`.
pub fn verify_sei_conda_implies_sep(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let hypotheses = vec![
        check_sei(p, plan)?.labeled("hypothesis:sei"),
        check_condition_a(p, plan)?.labeled("hypothesis:condition_a"),
    ];
    let conclusion = if hypotheses.iter().all(CertReport::is_certified) {
        Some(check_sep(p, plan)?.labeled("conclusion:sep"))
    } else {
        None
    };
    Ok(assemble_suite("suite:sei_conda_implies_sep", plan, hypotheses, conclusion))
}

/// Verifies that the gradient inequality with a nonnegative directional term
/// forces the pseudo property: hypotheses `sei` and the nonnegative dot
/// stage, conclusion `psei`.
pub fn verify_sei_nonneg_dot_implies_psei(p: &ProblemTriple, plan: &SamplingPlan) -> Result<CertReport> {
    let hypotheses = vec![
        check_sei(p, plan)?.labeled("hypothesis:sei"),
        nonneg_dot_stage(p, plan)?,
    ];
    let conclusion = if hypotheses.iter().all(CertReport::is_certified) {
        Some(check_psei(p, plan)?.labeled("conclusion:psei"))
    } else {
        None
    };
    Ok(assemble_suite("suite:sei_nonneg_dot_implies_psei", plan, hypotheses, conclusion))
}

fn product_set(base: &SetSpec) -> Result<SetSpec> {
    let n = base.dim();
    let mut axes = base.bounds().axes().to_vec();
    axes.extend_from_slice(base.bounds().axes());
    let bounds = crate::sets::BoxBounds::new(axes)?;
    let mut set = if base.is_bounded() {
        SetSpec::bounded(bounds)
    } else {
        SetSpec::window(bounds)
    };
    for offset in [0, n] {
        for g in base.predicates() {
            let gc = g.clone();
            let name = format!("{} on coordinates {}..{}", g.name(), offset, offset + n);
            set = set.with_predicate(ScalarFn::from_fn(name, 2 * n, move |x| gc.eval(&x[offset..offset + n])))?;
        }
    }
    Ok(set)
}

fn product_map(e: &VectorFn, n: usize) -> VectorFn {
    let ec = e.clone();
    VectorFn::from_fn(format!("({}) x ({})", e.name(), e.name()), 2 * n, 2 * n, move |x| {
        let mut out = ec.eval(&x[..n])?;
        out.extend(ec.eval(&x[n..])?);
        Ok(out)
    })
}

fn product_kernel(psi: &VectorFn, n: usize) -> VectorFn {
    let pc = psi.clone();
    VectorFn::from_fn(format!("({}) x ({})", psi.name(), psi.name()), 4 * n, 2 * n, move |args| {
        // args = [a (2n) | b (2n)], each half stacking two n-dim points.
        let (a, b) = args.split_at(2 * n);
        let mut block = Vec::with_capacity(2 * n);
        block.extend_from_slice(&a[..n]);
        block.extend_from_slice(&b[..n]);
        let mut out = pc.eval(&block)?;
        block.clear();
        block.extend_from_slice(&a[n..]);
        block.extend_from_slice(&b[n..]);
        out.extend(pc.eval(&block)?);
        Ok(out)
    })
}

/// Verifies that marginal infima preserve the quasi property: the
/// hypothesis runs the quasi check for `F` on the doubled triple (product
/// set, blockwise maps), and the conclusion checks the grid infimum
/// `g(s) = min over sampled t of F(s, t)` on the base triple. The infimum is
/// a finite-grid approximation and the report says so.
pub fn verify_inf_marginal(
    f: &BivariateFn,
    base: &ProblemTriple,
    t_grid: &SamplingPlan,
    plan: &SamplingPlan,
) -> Result<CertReport> {
    let n = base.dim();
    if f.half_dim() != n {
        return Err(Error::DimensionMismatch {
            context: format!("bivariate function `{}`", f.scalar().name()),
            expected: 2 * n,
            got: f.scalar().arity(),
        });
    }

    let product = ProblemTriple::new(
        f.scalar().clone(),
        product_map(&base.map_e, n),
        product_kernel(&base.psi, n),
        product_set(&base.set)?,
    )?;
    let hypothesis = check_qsep(&product, plan)?.labeled("hypothesis:product_qsep");

    let conclusion = if hypothesis.is_certified() {
        let t_points = member_grid(&base.set, t_grid.grid_per_axis)?;
        if t_points.is_empty() {
            return Err(Error::EmptyFeasibleSet);
        }
        let n_t = t_points.len();
        let fc = f.scalar().clone();
        let name = format!("min over {} grid points t of {}", n_t, fc.name());
        let marginal = ScalarFn::from_fn(name, n, move |s| {
            let mut args = vec![0.0; 2 * n];
            args[..n].copy_from_slice(s);
            let mut best = f64::INFINITY;
            for t in &t_points {
                args[n..].copy_from_slice(t);
                best = best.min(fc.eval(&args)?);
            }
            Ok(best)
        });
        Some(
            check_qsep(&with_h(base, marginal)?, plan)?
                .labeled("conclusion:qsep")
                .with_note(format!(
                    "the marginal is a finite approximation: the infimum over t ranges over {n_t} grid members"
                )),
        )
    } else {
        None
    };
    Ok(assemble_suite("suite:inf_marginal", plan, vec![hypothesis], conclusion))
}

/// Verifies that closure of the sampled sublevel sets forces the quasi
/// property: each `K_r` (for `r` in `r_values`) is certified strongly
/// E-invex as a hypothesis, and `h` is asserted quasi as the conclusion.
/// The hypothesis quantifies over finitely many levels, so a violated
/// conclusion is reported as a theorem violation with a note pointing at the
/// coarse level grid.
pub fn check_levelsets_imply_qsep(
    h: &ScalarFn,
    set: &SetSpec,
    map_e: &VectorFn,
    psi: &VectorFn,
    r_values: &[f64],
    plan: &SamplingPlan,
) -> Result<CertReport> {
    if r_values.is_empty() {
        return Err(Error::Usage("at least one level r is needed".into()));
    }
    let mut hypotheses = Vec::with_capacity(r_values.len());
    for r in r_values {
        let level = sublevel_set(h, *r, set)?;
        hypotheses.push(
            check_strongly_e_invex(&level, map_e, psi, plan)?.labeled(format!("hypothesis:levelset[r={r}]")),
        );
    }
    let conclusion = if hypotheses.iter().all(CertReport::is_certified) {
        let triple = ProblemTriple::new(h.clone(), map_e.clone(), psi.clone(), set.clone())?;
        Some(check_qsep(&triple, plan)?.labeled("conclusion:qsep"))
    } else {
        None
    };
    Ok(assemble_suite("suite:levelsets_imply_qsep", plan, hypotheses, conclusion))
}

/// Verifies that zero-sublevel sets of quasi-certified functions are
/// strongly E-invex: each `h_j` quasi-certified on the universe, the
/// E-image of the intersection `S = {x : h_j(x) <= 0 for all j}` contained
/// in `S`, and then `S` itself certified strongly E-invex.
pub fn qsep_sublevel_sei(
    h_list: &[ScalarFn],
    map_e: &VectorFn,
    psi: &VectorFn,
    universe: &SetSpec,
    plan: &SamplingPlan,
) -> Result<CertReport> {
    if h_list.is_empty() {
        return Err(Error::Usage("at least one function is needed to cut out the set".into()));
    }
    let mut hypotheses = Vec::new();
    for (j, h) in h_list.iter().enumerate() {
        let triple = ProblemTriple::new(h.clone(), map_e.clone(), psi.clone(), universe.clone())?;
        hypotheses.push(check_qsep(&triple, plan)?.labeled(format!("hypothesis:member[{j}]:qsep")));
    }
    let mut s = sublevel_set(&h_list[0], 0.0, universe)?;
    for h in &h_list[1..] {
        s = s.intersect(&sublevel_set(h, 0.0, universe)?)?;
    }
    hypotheses.push(check_e_image_subset(&s, map_e, plan)?.labeled("hypothesis:e_image"));

    let conclusion = if hypotheses.iter().all(CertReport::is_certified) {
        Some(check_strongly_e_invex(&s, map_e, psi, plan)?.labeled("conclusion:sei_set"))
    } else {
        None
    };
    Ok(assemble_suite("suite:qsep_sublevel_sei", plan, hypotheses, conclusion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::sets::BoxBounds;

    fn scalar(src: &str, vars: &[&str]) -> ScalarFn {
        ScalarFn::from_expr(Expr::parse(src, vars).unwrap()).unwrap()
    }

    fn vector(src: &str, vars: &[&str]) -> VectorFn {
        VectorFn::from_expr(Expr::parse(src, vars).unwrap())
    }

    fn indicator_triple() -> ProblemTriple {
        ProblemTriple::new(
            scalar("if s > 0 then 1 else -s", &["s"]),
            vector("abs(s)", &["s"]),
            vector("if a1 != b1 then -b1 else 0", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[-2.0, 2.0]]).unwrap()),
        )
        .unwrap()
    }

    fn mirror_triple() -> ProblemTriple {
        ProblemTriple::new(
            scalar("if s > 0 then 1 else -s", &["s"]),
            vector("-s^2", &["s"]),
            vector("if a1 != b1 then -b1 else 0", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[-2.0, 2.0]]).unwrap()),
        )
        .unwrap()
    }

    fn quick_plan() -> SamplingPlan {
        SamplingPlan::default().with_grid(9).with_random_pairs(100)
    }

    #[test]
    fn quasi_functions_never_increase_under_the_shift() {
        let report = verify_shift_property(&indicator_triple(), &quick_plan()).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
        assert_eq!(report.sub_reports.len(), 2);
    }

    #[test]
    fn shift_suite_refuses_when_the_quasi_hypothesis_fails() {
        let p = ProblemTriple::new(
            scalar("s^2", &["s"]),
            VectorFn::identity(1),
            vector("a1 - b1", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[-1.0, 1.0]]).unwrap()),
        )
        .unwrap();
        let report = verify_shift_property(&p, &quick_plan()).unwrap();
        assert_eq!(report.status, Status::Refuted);
        assert_eq!(report.sub_reports.len(), 1);
        assert!(report.notes[0].contains("hypothesis:qsep"));
    }

    #[test]
    fn weighted_sums_of_nonnegative_quasi_members_stay_quasi() {
        let base = indicator_triple();
        let h = base.h.clone();
        let fam = FamilySpec::new(vec![h.clone(), h]).unwrap().with_weights(vec![1.0, 2.0]).unwrap();
        let report = verify_linear_combination(&fam, &base, &quick_plan()).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
        assert_eq!(report.sub_reports.len(), 5);

        let zero = FamilySpec::new(vec![base.h.clone()]).unwrap().with_weights(vec![0.0]).unwrap();
        let report = verify_linear_combination(&zero, &base, &quick_plan()).unwrap();
        assert!(report.is_certified());

        assert!(FamilySpec::new(vec![base.h.clone()]).unwrap().with_weights(vec![-1.0]).is_err());
    }

    #[test]
    fn negative_members_fail_the_nonnegativity_hypothesis() {
        let base = indicator_triple();
        let fam = FamilySpec::new(vec![scalar("s", &["s"])]).unwrap().with_weights(vec![1.0]).unwrap();
        let report = verify_linear_combination(&fam, &base, &quick_plan()).unwrap();
        assert_eq!(report.status, Status::Refuted);
        assert!(report.notes[0].contains("nonnegative") || report.notes[0].contains("qsep"));
    }

    #[test]
    fn suprema_of_quasi_families_stay_quasi() {
        let base = indicator_triple();
        let fam = FamilySpec::new(vec![base.h.clone(), ScalarFn::constant(1, 0.5)]).unwrap();
        let report = verify_sup_family(&fam, &base, &quick_plan()).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
    }

    #[test]
    fn sup_suite_names_the_offending_member() {
        let base = mirror_triple();
        let fam = FamilySpec::new(vec![base.h.clone()]).unwrap();
        let report = verify_sup_family(&fam, &base, &quick_plan()).unwrap();
        assert_eq!(report.status, Status::Refuted);
        assert!(report.notes[0].contains("member[0]"), "{:?}", report.notes);
    }

    #[test]
    fn monotone_homogeneous_outer_functions_preserve_the_quasi_class() {
        let base = indicator_triple();
        for g in ["max(x, 0)", "2*x"] {
            let fam = FamilySpec::outer_only(scalar(g, &["x"])).unwrap();
            let report = verify_composition(&fam, &base, &quick_plan()).unwrap();
            assert!(report.is_certified(), "g = {g}: {}", report.render_text());
            assert_eq!(report.sub_reports.len(), 4);
        }
    }

    #[test]
    fn affine_outer_functions_fail_the_homogeneity_spot_check() {
        let base = indicator_triple();
        let fam = FamilySpec::outer_only(scalar("x + 1", &["x"])).unwrap();
        let report = verify_composition(&fam, &base, &quick_plan()).unwrap();
        assert_eq!(report.status, Status::Refuted);
        // The expensive stages are skipped: only the two spot checks ran.
        assert_eq!(report.sub_reports.len(), 2);
        assert!(report.notes[0].contains("outer_homogeneous"));
        let g_report = &report.sub_reports[0];
        assert_eq!(g_report.status, Status::Refuted);
    }

    #[test]
    fn constant_functions_pass_the_sep_to_qsep_bridge() {
        let base = indicator_triple();
        let p = with_h(&base, ScalarFn::constant(1, 1.0)).unwrap();
        let report = verify_sep_implies_qsep(&p, &quick_plan()).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
        assert_eq!(report.sub_reports.len(), 3);
    }

    #[test]
    fn nonlevel_functions_fail_the_bridge_hypotheses() {
        let p = ProblemTriple::new(
            scalar("s", &["s"]),
            VectorFn::identity(1),
            vector("a1 - b1", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[-1.0, 1.0]]).unwrap()),
        )
        .unwrap();
        let report = verify_sep_implies_qsep(&p, &quick_plan()).unwrap();
        assert_eq!(report.status, Status::Refuted);
        let level = report.sub_reports.iter().find(|r| r.property == "hypothesis:h_e_level").unwrap();
        assert_eq!(level.status, Status::Refuted);
        let w = level.witness.as_ref().unwrap();
        assert!(w.lhs > w.rhs);
    }

    #[test]
    fn marginal_infima_of_quasi_bivariate_functions_stay_quasi() {
        let base = indicator_triple();
        // F(s, t) = max(h(s), h(t)) in expression form over stacked
        // variables (s, t).
        let f = BivariateFn::new(scalar(
            "max(if s > 0 then 1 else -s, if t > 0 then 1 else -t)",
            &["s", "t"],
        ))
        .unwrap();
        let plan = SamplingPlan::default().with_grid(7).with_random_pairs(50);
        let report = verify_inf_marginal(&f, &base, &plan, &plan).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
        let conclusion = report.sub_reports.last().unwrap();
        assert!(conclusion.notes.iter().any(|n| n.contains("finite approximation")));

        // F ignoring its second argument reduces to h itself.
        let f = BivariateFn::new(scalar("if s > 0 then 1 else -s", &["s", "t"])).unwrap();
        let report = verify_inf_marginal(&f, &base, &plan, &plan).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
    }

    #[test]
    fn gradient_bridge_certifies_level_functions_and_refuses_nonlevel_ones() {
        let base = indicator_triple();
        let level = with_h(&base, ScalarFn::constant(1, 2.0)).unwrap();
        let plan = quick_plan();
        let report = verify_sei_implies_qsei(&level, &plan).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());

        // h(E(s)) nonconstant: with the shift pinned to zero the gradient
        // inequality itself holds with equality, so the level hypothesis is
        // the one that fails.
        let p = ProblemTriple::new(
            scalar("s", &["s"]),
            VectorFn::identity(1),
            vector("a1 - b1", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[-1.0, 1.0]]).unwrap()),
        )
        .unwrap();
        let pinned = plan.restrict_alphas(&[0.0]);
        let report = verify_sei_implies_qsei(&p, &pinned).unwrap();
        assert_eq!(report.status, Status::Refuted);
        assert!(report.notes[0].contains("h_e_level"));
    }

    #[test]
    fn convex_quadratics_pass_the_gradient_to_path_bridge_without_shift() {
        let p = ProblemTriple::new(
            scalar("s^2", &["s"]),
            VectorFn::identity(1),
            vector("a1 - b1", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[-1.0, 1.0]]).unwrap()),
        )
        .unwrap()
        .with_gradient(vector("2*s", &["s"]))
        .unwrap();
        let plan = SamplingPlan::default()
            .with_grid(7)
            .with_random_pairs(30)
            .restrict_alphas(&[0.0]);
        let report = verify_sei_conda_implies_sep(&p, &plan).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());

        let cubic = ProblemTriple::new(
            scalar("s^3", &["s"]),
            VectorFn::identity(1),
            vector("a1 - b1", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[-1.0, 1.0]]).unwrap()),
        )
        .unwrap()
        .with_gradient(vector("3*s^2", &["s"]))
        .unwrap();
        let report = verify_sei_conda_implies_sep(&cubic, &plan).unwrap();
        assert_eq!(report.status, Status::Refuted);
        assert!(report.notes[0].contains("hypothesis:sei"));
    }

    #[test]
    fn nonnegative_directional_terms_force_the_pseudo_property() {
        // grad h vanishes on the (constant) image of E, so the directional
        // term is identically zero and all stages certify.
        let p = ProblemTriple::new(
            scalar("(s - 1)^2", &["s"]),
            vector("1", &["s"]),
            vector("a1 - b1", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[0.0, 2.0]]).unwrap()),
        )
        .unwrap()
        .with_gradient(vector("2*(s - 1)", &["s"]))
        .unwrap();
        let report = verify_sei_nonneg_dot_implies_psei(&p, &quick_plan()).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());

        // The absolute-value kernel makes the directional term positive on
        // both sides, which breaks the gradient inequality itself.
        let p = ProblemTriple::new(
            scalar("2*s", &["s"]),
            VectorFn::identity(1),
            vector("abs(a1 - b1)", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[0.0, 1.0]]).unwrap()),
        )
        .unwrap()
        .with_gradient(vector("2", &["s"]))
        .unwrap();
        let report = verify_sei_nonneg_dot_implies_psei(&p, &quick_plan()).unwrap();
        assert_eq!(report.status, Status::Refuted);
        assert!(report.notes[0].contains("hypothesis:sei"));

        // The difference kernel keeps the gradient inequality exact but the
        // directional term goes negative for s < t.
        let p = ProblemTriple::new(
            scalar("s", &["s"]),
            VectorFn::identity(1),
            vector("a1 - b1", &["a1", "b1"]),
            SetSpec::window(BoxBounds::new(vec![[0.0, 1.0]]).unwrap()),
        )
        .unwrap()
        .with_gradient(vector("1", &["s"]))
        .unwrap();
        let pinned = quick_plan().restrict_alphas(&[0.0]);
        let report = verify_sei_nonneg_dot_implies_psei(&p, &pinned).unwrap();
        assert_eq!(report.status, Status::Refuted);
        assert!(report.notes[0].contains("nonneg_dot"));
    }

    #[test]
    fn sublevel_closure_implies_the_quasi_property_on_good_levels() {
        let p = indicator_triple();
        let plan = quick_plan();
        let report =
            check_levelsets_imply_qsep(&p.h, &p.set, &p.map_e, &p.psi, &[0.0, 1.0, 2.0], &plan).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
        assert_eq!(report.sub_reports.len(), 4);

        // The sublevel set at r = 0.5 is the interval [-1/2, 0], which the
        // combination points escape, so that hypothesis is refuted.
        let report = check_levelsets_imply_qsep(&p.h, &p.set, &p.map_e, &p.psi, &[0.5], &plan).unwrap();
        assert_eq!(report.status, Status::Refuted);
        assert!(report.notes[0].contains("levelset[r=0.5]"));

        // Constant functions have only trivial levelsets.
        let c = ScalarFn::constant(1, 1.0);
        let report = check_levelsets_imply_qsep(&c, &p.set, &p.map_e, &p.psi, &[0.0, 2.0], &plan).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
    }

    #[test]
    fn coarse_level_grids_can_miss_the_failure_and_report_a_violation() {
        // The mirrored-parabola triple is not quasi, but its sublevel set at
        // r = 0 is the single point {0}, which is trivially closed. The
        // implication then fails on the sampled levels and the suite says so
        // loudly.
        let p = mirror_triple();
        let report =
            check_levelsets_imply_qsep(&p.h, &p.set, &p.map_e, &p.psi, &[0.0], &quick_plan()).unwrap();
        assert_eq!(report.status, Status::TheoremViolation);
        assert!(report.witness.is_some());
        assert!(report.notes[0].contains("miss the failure region"), "{:?}", report.notes);

        // A level that does sample the failure turns the verdict into an
        // ordinary hypothesis refutation, with the quasi stage still shown.
        let report =
            check_levelsets_imply_qsep(&p.h, &p.set, &p.map_e, &p.psi, &[2.0], &quick_plan()).unwrap();
        assert_eq!(report.status, Status::Refuted);
    }

    #[test]
    fn zero_sublevel_sets_of_quasi_functions_are_invex_sets() {
        let universe = SetSpec::window(BoxBounds::cube(2, -2.0, 0.0).unwrap());
        let map_e = vector("[0, t]", &["s", "t"]);
        let psi = vector("[a1 - b1, a2 - b2]", &["a1", "a2", "b1", "b2"]);
        let plan = SamplingPlan::default().with_grid(7).with_random_pairs(50);

        let hmax = scalar("max(s, t)", &["s", "t"]);
        let report =
            qsep_sublevel_sei(std::slice::from_ref(&hmax), &map_e, &psi, &universe, &plan).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
        assert_eq!(report.sub_reports.len(), 3);

        let report = qsep_sublevel_sei(&[ScalarFn::constant(2, -1.0)], &map_e, &psi, &universe, &plan).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());

        let hsum = scalar("s + t", &["s", "t"]);
        let report = qsep_sublevel_sei(&[hmax, hsum], &map_e, &psi, &universe, &plan).unwrap();
        assert!(report.is_certified(), "{}", report.render_text());
        assert_eq!(report.sub_reports.len(), 4);
    }

    #[test]
    fn empty_inputs_are_usage_errors() {
        let p = indicator_triple();
        assert!(matches!(
            check_levelsets_imply_qsep(&p.h, &p.set, &p.map_e, &p.psi, &[], &quick_plan()),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            qsep_sublevel_sei(&[], &p.map_e, &p.psi, &p.set, &quick_plan()),
            Err(Error::Usage(_))
        ));
        assert!(FamilySpec::new(vec![]).is_err());
    }
}
