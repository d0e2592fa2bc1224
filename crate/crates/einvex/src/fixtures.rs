//! Built-in example problems.
//!
//! Each fixture is a complete problem file (the same TOML text ships in
//! `examples/problems/`) together with its published outcomes: which checks
//! certify, which refute, and hand-picked violating samples whose left and
//! right hand sides are exact in floating point. The fixtures double as
//! regression anchors; their outcomes are reproduced verbatim by the test
//! suite and by `einvex examples <name> --check <property>`.

use crate::classifiers::{evaluate_sample, CheckKind};
use crate::error::{Error, Result};
use crate::problem_file::ProblemFile;
use crate::report::Status;

const EX1: &str = include_str!("../examples/problems/ex1.toml");
const EX2: &str = include_str!("../examples/problems/ex2.toml");
const EX_QSEI: &str = include_str!("../examples/problems/ex_qsei.toml");
const EX_PSEI: &str = include_str!("../examples/problems/ex_psei.toml");
const VEE: &str = include_str!("../examples/problems/vee.toml");
const DOUBLE_WELL: &str = include_str!("../examples/problems/double_well.toml");
const NARROW_WELL: &str = include_str!("../examples/problems/narrow_well.toml");

/// What a fixture exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    /// A (h, E, Psi, set) bundle for the classification checks.
    Classification,
    /// A constrained minimization problem for the solver.
    Optimization,
}

/// A violating sample published with a fixture. The stored `lhs` and `rhs`
/// are exact: re-evaluating the check at `(s, t, alpha, lambda)` reproduces
/// them bit for bit.
#[derive(Debug, Clone)]
pub struct CanonicalSample {
    pub kind: CheckKind,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub alpha: f64,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// A built-in problem plus its published outcomes.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub kind: FixtureKind,
    /// One-line description for listings.
    pub summary: &'static str,
    /// The parsed problem file.
    pub file: ProblemFile,
    /// Expected check outcomes under the fixture's own plan.
    pub expected: Vec<(CheckKind, Status)>,
    /// Hand-picked violating samples with exact sides.
    pub canonical: Vec<CanonicalSample>,
    /// For optimization fixtures: the expected solver status and a note on
    /// what the run demonstrates.
    pub expected_solve: Option<(Status, &'static str)>,
}

/// The names accepted by [`load_builtin`] and [`builtin`].
pub fn builtin_names() -> &'static [&'static str] {
    &["ex1", "ex2", "ex_qsei", "ex_psei", "vee", "double_well", "narrow_well"]
}

/// Loads a built-in problem file by name.
pub fn load_builtin(name: &str) -> Result<ProblemFile> {
    let text = match name {
        "ex1" => EX1,
        "ex2" => EX2,
        "ex_qsei" => EX_QSEI,
        "ex_psei" => EX_PSEI,
        "vee" => VEE,
        "double_well" => DOUBLE_WELL,
        "narrow_well" => NARROW_WELL,
        _ => {
            return Err(Error::Usage(format!(
                "unknown example `{name}`; the built-ins are {}",
                builtin_names().join(", ")
            )))
        }
    };
    ProblemFile::from_toml(text)
}

/// Loads a built-in fixture with its published outcomes.
pub fn builtin(name: &str) -> Result<Fixture> {
    let file = load_builtin(name)?;
    let fixture = match name {
        "ex1" => Fixture {
            name: "ex1",
            kind: FixtureKind::Classification,
            summary: "piecewise indicator with the fold map: quasi along paths, not convex along them",
            file,
            expected: vec![
                (CheckKind::Qsep, Status::CertifiedOnSamples),
                (CheckKind::EPrequasiInvex, Status::CertifiedOnSamples),
                (CheckKind::Sep, Status::Refuted),
                (CheckKind::StrictQsep, Status::Refuted),
                (CheckKind::EPreinvex, Status::Refuted),
            ],
            canonical: vec![CanonicalSample {
                kind: CheckKind::Sep,
                s: vec![0.0],
                t: vec![1.0],
                alpha: 0.5,
                lambda: 0.5,
                lhs: 1.0,
                rhs: 0.5,
            }],
            expected_solve: None,
        },
        "ex2" => Fixture {
            name: "ex2",
            kind: FixtureKind::Classification,
            summary: "the mirror map -s^2: quasi at alpha = 0 yet refuted across the shifted family",
            file,
            expected: vec![
                (CheckKind::EPrequasiInvex, Status::CertifiedOnSamples),
                (CheckKind::Qsep, Status::Refuted),
            ],
            canonical: vec![CanonicalSample {
                kind: CheckKind::Qsep,
                s: vec![0.0],
                t: vec![-1.0],
                alpha: 1.0,
                lambda: 0.0,
                lhs: 2.0,
                rhs: 1.0,
            }],
            expected_solve: None,
        },
        "ex_qsei" => Fixture {
            name: "ex_qsei",
            kind: FixtureKind::Classification,
            summary: "sum of cubes under the projection map: quasi gradient form holds, strong form fails",
            file,
            expected: vec![
                (CheckKind::Qsei, Status::CertifiedOnSamples),
                (CheckKind::Sei, Status::Refuted),
            ],
            canonical: vec![CanonicalSample {
                kind: CheckKind::Sei,
                s: vec![0.0, -0.5],
                t: vec![0.0, -0.25],
                alpha: 1.0,
                lambda: 0.0,
                lhs: -0.09375,
                rhs: -0.109375,
            }],
            expected_solve: None,
        },
        "ex_psei" => Fixture {
            name: "ex_psei",
            kind: FixtureKind::Classification,
            summary: "negative squares under the projection map: pseudo gradient form holds, strong form fails",
            file,
            expected: vec![
                (CheckKind::Psei, Status::CertifiedOnSamples),
                (CheckKind::Sei, Status::Refuted),
            ],
            canonical: vec![CanonicalSample {
                kind: CheckKind::Sei,
                s: vec![0.0, 1.0],
                t: vec![0.0, 2.0],
                alpha: 0.0,
                lambda: 0.0,
                lhs: 4.0,
                rhs: 3.0,
            }],
            expected_solve: None,
        },
        "vee" => Fixture {
            name: "vee",
            kind: FixtureKind::Optimization,
            summary: "tilted V on [0, 1]: assumptions certify and every start reaches the global minimizer",
            file,
            expected: Vec::new(),
            canonical: Vec::new(),
            expected_solve: Some((
                Status::CertifiedOnSamples,
                "all starts land on s = 0.6 with value -0.06, matching the dense scan",
            )),
        },
        "double_well" => Fixture {
            name: "double_well",
            kind: FixtureKind::Optimization,
            summary: "two symmetric wells: strictness is refuted, both minimizers are found",
            file,
            expected: Vec::new(),
            canonical: Vec::new(),
            expected_solve: Some((
                Status::CertifiedOnSamples,
                "the strictness assumption is refuted, so no local-is-global claim is made; starts split between s = -1 and s = 1",
            )),
        },
        "narrow_well" => Fixture {
            name: "narrow_well",
            kind: FixtureKind::Optimization,
            summary: "a needle well the local searches miss: certified assumptions with a positive gap",
            file,
            expected: Vec::new(),
            canonical: Vec::new(),
            expected_solve: Some((
                Status::TheoremViolation,
                "sampled assumptions certify (the constant map makes strictness vacuous), yet the dense scan beats every local search",
            )),
        },
        _ => unreachable!("load_builtin accepted the name"),
    };
    Ok(fixture)
}

impl Fixture {
    /// Re-evaluates every canonical sample and confirms the stored sides.
    /// Returns the recomputed `(lhs, rhs, margin)` per sample.
    pub fn recompute_canonical(&self) -> Result<Vec<(f64, f64, f64)>> {
        let triple = self.file.to_triple()?;
        let mut out = Vec::with_capacity(self.canonical.len());
        for c in &self.canonical {
            let at = evaluate_sample(c.kind, &triple, &c.s, &c.t, c.alpha, c.lambda)?;
            if at.lhs != c.lhs || at.rhs != c.rhs {
                return Err(Error::Usage(format!(
                    "fixture `{}`: the canonical `{}` sample recomputed to ({}, {}), published ({}, {})",
                    self.name,
                    c.kind.name(),
                    at.lhs,
                    at.rhs,
                    c.lhs,
                    c.rhs
                )));
            }
            out.push((at.lhs, at.rhs, at.margin));
        }
        Ok(out)
    }
}
