//! Declarative problem files.
//!
//! A problem file is a single TOML document that names everything a check
//! needs: the dimension, the sampled box, the defining maps as expression
//! strings, and optional sections for the sampling plan, constraints,
//! families, and suite parameters. The same file feeds every entry point;
//! builders pull out the parts a given check uses and complain by field name
//! when something is missing or malformed.
//!
//! ```toml
//! dimension = 1
//!
//! [box]
//! lower = [-2.0]
//! upper = [2.0]
//!
//! [functions]
//! h = "if s > 0 then 1 else -s"
//! e = "abs(s)"
//! psi = "if a1 != b1 then -b1 else 0"
//! ```
//!
//! Expressions over the space use the declared `variables` (defaulting to
//! `s` in one dimension, `s, t` in two, and `x1..xn` beyond). The kernel
//! `psi` and a `bivariate` function always use `a1..an, b1..bn` for their
//! two point blocks, and the `outer` function of a composition uses the
//! single variable `x`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::ProblemTriple;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::maps::{ScalarFn, VectorFn};
use crate::nlpp::NlppProblem;
use crate::plan::SamplingPlan;
use crate::sets::{BoxBounds, SetSpec};
use crate::theorems::{BivariateFn, FamilySpec};

/// A parsed problem file. Field names mirror the TOML schema; unknown keys
/// anywhere in the document are rejected so typos fail loudly instead of
/// silently changing the problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    /// Number of variables of the sampled space.
    pub dimension: usize,
    /// Variable names for expressions over the space. Defaults to `["s"]`,
    /// `["s", "t"]`, or `["x1", ..]` by dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
    /// The axis-aligned box that is sampled (and, when `set.bounded` is
    /// true, the set itself).
    #[serde(rename = "box")]
    pub bounds: BoxSection,
    /// Expression strings for the maps of the problem.
    #[serde(default)]
    pub functions: FunctionsSection,
    /// How the box relates to the set, plus extra membership predicates.
    #[serde(default)]
    pub set: SetSection,
    /// Sampling plan. Missing fields take the documented defaults; command
    /// line flags may override individual fields afterwards.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<SamplingPlan>,
    /// Parameters consumed by specific verification suites.
    #[serde(default)]
    pub checks: ChecksSection,
}

/// Lower and upper corners of the sampled box.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Expression strings for every map a check might need. All fields are
/// optional here; each builder states which ones it requires.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionsSection {
    /// The classified function `h`, in the space variables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    /// Analytic gradient of `h` as a vector expression `[..]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_h: Option<String>,
    /// The map `E`, in the space variables; vector-valued when n > 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<String>,
    /// The kernel `Psi(a, b)`, in the variables `a1..an, b1..bn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    /// Analytic inverse of `E`, in the space variables. Optional; without
    /// it inverse points are recovered numerically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_inverse: Option<String>,
    /// Objective of an optimization problem. Falls back to `h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    /// Constraint functions, feasible where every one is `<= 0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<String>,
    /// Family members for the family suites, in the space variables.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<String>,
    /// Nonnegative weights paired with `members`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Outer function for composition, in the single variable `x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<String>,
    /// Two-block function `F(s, t)`, in the variables `a1..an, b1..bn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bivariate: Option<String>,
}

/// How the box relates to the set being sampled.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSection {
    /// When true, the box is the set and leaving it is a membership
    /// violation. When false (the default), the box is only a sampling
    /// window over a set assumed to continue beyond it.
    #[serde(default)]
    pub bounded: bool,
    /// Extra membership predicates `g(x) <= 0`, in the space variables.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predicates: Vec<String>,
}

/// Parameters for specific verification suites.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    /// Levels `r` for the sublevel-set suites.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<f64>,
    /// Grid per axis for the inner minimization of the marginal suite.
    /// Defaults to the plan grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<usize>,
}

fn field_err(field: &str, detail: impl std::fmt::Display) -> Error {
    Error::ProblemFile(format!("functions.{field}: {detail}"))
}

impl ProblemFile {
    /// Reads and parses a problem file, prefixing every failure with the
    /// path so the message names its source.
    pub fn load(path: impl AsRef<Path>) -> Result<ProblemFile> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ProblemFile(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::ProblemFile(m) => Error::ProblemFile(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses a problem file from TOML text and validates the schema-level
    /// invariants (dimension, box shape, variable names).
    pub fn from_toml(text: &str) -> Result<ProblemFile> {
        let file: ProblemFile =
            toml::from_str(text).map_err(|e| Error::ProblemFile(e.message().to_string()))?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::ProblemFile("dimension must be at least 1".into()));
        }
        if self.bounds.lower.len() != self.dimension || self.bounds.upper.len() != self.dimension {
            return Err(Error::ProblemFile(format!(
                "box: lower has {} entries and upper has {}, expected {} each",
                self.bounds.lower.len(),
                self.bounds.upper.len(),
                self.dimension
            )));
        }
        if let Some(vars) = &self.variables {
            if vars.len() != self.dimension {
                return Err(Error::ProblemFile(format!(
                    "variables: {} names for dimension {}",
                    vars.len(),
                    self.dimension
                )));
            }
            for (i, a) in vars.iter().enumerate() {
                if a.is_empty() {
                    return Err(Error::ProblemFile(format!("variables[{i}] is empty")));
                }
                if vars[..i].contains(a) {
                    return Err(Error::ProblemFile(format!("variables: `{a}` appears twice")));
                }
            }
        }
        Ok(())
    }

    /// The variable names expressions over the space are parsed with.
    pub fn variables(&self) -> Vec<String> {
        match (&self.variables, self.dimension) {
            (Some(v), _) => v.clone(),
            (None, 1) => vec!["s".to_string()],
            (None, 2) => vec!["s".to_string(), "t".to_string()],
            (None, n) => (1..=n).map(|i| format!("x{i}")).collect(),
        }
    }

    /// The sampled box.
    pub fn bounds(&self) -> Result<BoxBounds> {
        let axes: Vec<[f64; 2]> = self
            .bounds
            .lower
            .iter()
            .zip(&self.bounds.upper)
            .map(|(&l, &u)| [l, u])
            .collect();
        BoxBounds::new(axes)
    }

    /// The set carved out by the box, the `bounded` flag, and the
    /// predicates.
    pub fn set_spec(&self) -> Result<SetSpec> {
        let bounds = self.bounds()?;
        let mut set = if self.set.bounded {
            SetSpec::bounded(bounds)
        } else {
            SetSpec::window(bounds)
        };
        for (j, src) in self.set.predicates.iter().enumerate() {
            let g = self
                .space_scalar(src)
                .map_err(|e| Error::ProblemFile(format!("set.predicates[{j}]: {e}")))?;
            set = set.with_predicate(g)?;
        }
        Ok(set)
    }

    /// The sampling plan from the file, or the default plan when the file
    /// has none. Callers validate after applying any overrides.
    pub fn plan(&self) -> SamplingPlan {
        self.plan.clone().unwrap_or_default()
    }

    /// The plan for the inner grid of the marginal-infimum suite.
    pub fn t_plan(&self) -> SamplingPlan {
        let mut plan = self.plan();
        if let Some(g) = self.checks.t_grid {
            plan = plan.with_grid(g);
        }
        plan
    }

    fn space_scalar(&self, src: &str) -> Result<ScalarFn> {
        let vars = self.variables();
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        let expr = Expr::parse(src, &refs)?;
        Ok(ScalarFn::from_expr(expr)?)
    }

    fn space_vector(&self, src: &str) -> Result<VectorFn> {
        let vars = self.variables();
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        Ok(VectorFn::from_expr(Expr::parse(src, &refs)?))
    }

    fn kernel_vector(&self, src: &str) -> Result<VectorFn> {
        let mut vars: Vec<String> = (1..=self.dimension).map(|i| format!("a{i}")).collect();
        vars.extend((1..=self.dimension).map(|i| format!("b{i}")));
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        Ok(VectorFn::from_expr(Expr::parse(src, &refs)?))
    }

    fn required<'a>(&self, field: &str, value: &'a Option<String>) -> Result<&'a str> {
        value
            .as_deref()
            .ok_or_else(|| field_err(field, "missing, but required by this check"))
    }

    /// Builds the (h, E, Psi, set) bundle most checks run on. Requires
    /// `functions.h`, `functions.e`, and `functions.psi`; attaches
    /// `grad_h` and `e_inverse` when present.
    pub fn to_triple(&self) -> Result<ProblemTriple> {
        let h_src = self.required("h", &self.functions.h)?;
        self.triple_with_h(self.space_scalar(h_src).map_err(|e| field_err("h", e))?)
    }

    fn triple_with_h(&self, h: ScalarFn) -> Result<ProblemTriple> {
        let e_src = self.required("e", &self.functions.e)?;
        let psi_src = self.required("psi", &self.functions.psi)?;
        let map_e = self.space_vector(e_src).map_err(|e| field_err("e", e))?;
        let psi = self.kernel_vector(psi_src).map_err(|e| field_err("psi", e))?;
        let mut triple = ProblemTriple::new(h, map_e, psi, self.set_spec()?)?;
        if let Some(src) = &self.functions.grad_h {
            let g = self.space_vector(src).map_err(|e| field_err("grad_h", e))?;
            triple = triple.with_gradient(g)?;
        }
        if let Some(src) = &self.functions.e_inverse {
            let inv = self.space_vector(src).map_err(|e| field_err("e_inverse", e))?;
            triple = triple.with_e_inverse(inv)?;
        }
        Ok(triple)
    }

    /// The map `E` alone, for the set checks.
    pub fn e_map(&self) -> Result<VectorFn> {
        let src = self.required("e", &self.functions.e)?;
        self.space_vector(src).map_err(|e| field_err("e", e))
    }

    /// The kernel `Psi` alone, for the set checks.
    pub fn psi_map(&self) -> Result<VectorFn> {
        let src = self.required("psi", &self.functions.psi)?;
        self.kernel_vector(src).map_err(|e| field_err("psi", e))
    }

    /// The (E, Psi, set) bundle with `h` when present and the zero function
    /// otherwise, for suites that substitute their own functions per stage.
    pub fn to_base_triple(&self) -> Result<ProblemTriple> {
        match &self.functions.h {
            Some(src) => self.triple_with_h(self.space_scalar(src).map_err(|e| field_err("h", e))?),
            None => self.triple_with_h(ScalarFn::constant(self.dimension, 0.0)),
        }
    }

    /// Builds the family (members, weights, outer) plus the base bundle its
    /// suites run against. When the file has no `h`, the first member
    /// stands in as the base function; the family suites replace it per
    /// member anyway.
    pub fn to_family(&self) -> Result<(FamilySpec, ProblemTriple)> {
        let mut members = Vec::with_capacity(self.functions.members.len());
        for (j, src) in self.functions.members.iter().enumerate() {
            members.push(
                self.space_scalar(src)
                    .map_err(|e| field_err(&format!("members[{j}]"), e))?,
            );
        }
        let outer = match &self.functions.outer {
            Some(src) => {
                let expr = Expr::parse(src, &["x"]).map_err(|e| field_err("outer", e))?;
                Some(ScalarFn::from_expr(expr).map_err(|e| field_err("outer", e))?)
            }
            None => None,
        };

        let mut fam = if members.is_empty() {
            let g = outer
                .clone()
                .ok_or_else(|| field_err("members", "missing, and no outer function is given either"))?;
            FamilySpec::outer_only(g)?
        } else {
            FamilySpec::new(members.clone())?
        };
        if let Some(w) = &self.functions.weights {
            fam = fam.with_weights(w.clone())?;
        }
        if !members.is_empty() {
            if let Some(g) = outer {
                fam = fam.with_outer(g)?;
            }
        }

        let base_h = match &self.functions.h {
            Some(src) => self.space_scalar(src).map_err(|e| field_err("h", e))?,
            None => members
                .first()
                .cloned()
                .ok_or_else(|| field_err("h", "missing, and there are no members to fall back to"))?,
        };
        let base = self.triple_with_h(base_h)?;
        Ok((fam, base))
    }

    /// Builds the optimization problem. The objective falls back to `h`;
    /// `functions.e` and `functions.psi` are required, and the box is the
    /// feasible region together with the constraints.
    pub fn to_nlpp(&self) -> Result<NlppProblem> {
        let obj_src = match (&self.functions.objective, &self.functions.h) {
            (Some(src), _) => src.as_str(),
            (None, Some(src)) => src.as_str(),
            (None, None) => return Err(field_err("objective", "missing, but required by this check")),
        };
        let objective = self.space_scalar(obj_src).map_err(|e| field_err("objective", e))?;
        let mut constraints = Vec::with_capacity(self.functions.constraints.len());
        for (j, src) in self.functions.constraints.iter().enumerate() {
            constraints.push(
                self.space_scalar(src)
                    .map_err(|e| field_err(&format!("constraints[{j}]"), e))?,
            );
        }
        let e_src = self.required("e", &self.functions.e)?;
        let psi_src = self.required("psi", &self.functions.psi)?;
        let map_e = self.space_vector(e_src).map_err(|e| field_err("e", e))?;
        let psi = self.kernel_vector(psi_src).map_err(|e| field_err("psi", e))?;
        NlppProblem::new(objective, constraints, map_e, psi, self.bounds()?)
    }

    /// Builds the two-block function `F(s, t)` of the marginal suite.
    pub fn to_bivariate(&self) -> Result<BivariateFn> {
        let src = self.required("bivariate", &self.functions.bivariate)?;
        let n = self.dimension;
        let mut vars: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
        vars.extend((1..=n).map(|i| format!("b{i}")));
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        let expr = Expr::parse(src, &refs).map_err(|e| field_err("bivariate", e))?;
        let f = ScalarFn::from_expr(expr).map_err(|e| field_err("bivariate", e))?;
        BivariateFn::new(f)
    }

    /// The scalar functions named by `members`, for the sublevel suites.
    pub fn member_functions(&self) -> Result<Vec<ScalarFn>> {
        let mut members = Vec::with_capacity(self.functions.members.len());
        for (j, src) in self.functions.members.iter().enumerate() {
            members.push(
                self.space_scalar(src)
                    .map_err(|e| field_err(&format!("members[{j}]"), e))?,
            );
        }
        Ok(members)
    }

    /// The bare `h` as a scalar function, for checks that need it without
    /// the rest of the bundle.
    pub fn h_function(&self) -> Result<ScalarFn> {
        let src = self.required("h", &self.functions.h)?;
        self.space_scalar(src).map_err(|e| field_err("h", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"
dimension = 1

[box]
lower = [-2.0]
upper = [2.0]

[functions]
h = "if s > 0 then 1 else -s"
e = "abs(s)"
psi = "if a1 != b1 then -b1 else 0"
"#;

    #[test]
    fn a_minimal_file_parses_and_builds_the_triple() {
        let file = ProblemFile::from_toml(EX1).unwrap();
        assert_eq!(file.dimension, 1);
        assert_eq!(file.variables(), vec!["s".to_string()]);
        let triple = file.to_triple().unwrap();
        assert_eq!(triple.dim(), 1);
        assert_eq!(triple.h.eval(&[0.75]).unwrap(), 1.0);
        assert_eq!(triple.map_e.eval(&[-2.0]).unwrap(), vec![2.0]);
        assert_eq!(triple.psi.eval(&[0.0, 1.5]).unwrap(), vec![-1.5]);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let text = EX1.replace("[functions]", "colour = \"red\"\n\n[functions]");
        let err = ProblemFile::from_toml(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("colour"), "unhelpful message: {msg}");
    }

    #[test]
    fn unknown_function_keys_are_rejected() {
        let text = EX1.replace("psi = ", "kernel_typo = \"0\"\npsi = ");
        let err = ProblemFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("kernel_typo"));
    }

    #[test]
    fn missing_required_fields_are_named() {
        let text = EX1.replace("psi = \"if a1 != b1 then -b1 else 0\"\n", "");
        let file = ProblemFile::from_toml(&text).unwrap();
        let err = file.to_triple().unwrap_err();
        assert!(err.to_string().contains("functions.psi"), "got: {err}");
    }

    #[test]
    fn box_shape_must_match_the_dimension() {
        let text = EX1.replace("lower = [-2.0]", "lower = [-2.0, 0.0]");
        let err = ProblemFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("box"), "got: {err}");
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let text = EX1.replace("dimension = 1", "dimension = 0");
        let err = ProblemFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("dimension"));
    }

    #[test]
    fn variable_names_must_be_distinct_and_sized() {
        let text = EX1.replace("dimension = 1", "dimension = 1\nvariables = [\"s\", \"s\"]");
        let err = ProblemFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("variables"));

        let text = EX1.replace("dimension = 1", "dimension = 1\nvariables = [\"u\"]");
        let file = ProblemFile::from_toml(&text).unwrap();
        assert!(file.to_triple().is_err(), "h still uses `s`, which no longer exists");
    }

    #[test]
    fn two_dimensional_defaults_use_s_and_t() {
        let text = r#"
dimension = 2

[box]
lower = [-2.0, -2.0]
upper = [0.0, 0.0]

[functions]
h = "s^3 + t^3"
grad_h = "[3*s^2, 3*t^2]"
e = "[0, t]"
psi = "[a1 - b1, a2 - b2]"
"#;
        let file = ProblemFile::from_toml(text).unwrap();
        assert_eq!(file.variables(), vec!["s".to_string(), "t".to_string()]);
        let triple = file.to_triple().unwrap();
        assert!(triple.grad_h.is_some());
        assert_eq!(triple.map_e.eval(&[-1.0, -0.5]).unwrap(), vec![0.0, -0.5]);
    }

    #[test]
    fn bad_expressions_name_their_field() {
        let text = EX1.replace("e = \"abs(s)\"", "e = \"abs(q)\"");
        let file = ProblemFile::from_toml(&text).unwrap();
        let err = file.to_triple().unwrap_err();
        assert!(err.to_string().contains("functions.e"), "got: {err}");
    }

    #[test]
    fn plans_deserialize_with_partial_fields() {
        let text = EX1.to_string() + "\n[plan]\nseed = 7\ngrid_per_axis = 5\n";
        let file = ProblemFile::from_toml(&text).unwrap();
        let plan = file.plan();
        assert_eq!(plan.seed, 7);
        assert_eq!(plan.grid_per_axis, 5);
        assert_eq!(plan.random_pairs, SamplingPlan::default().random_pairs);
        assert_eq!(plan.base_tolerance, SamplingPlan::default().base_tolerance);
    }

    #[test]
    fn predicates_carve_the_set() {
        let text = EX1.to_string() + "\n[set]\nbounded = true\npredicates = [\"s - 1\"]\n";
        let file = ProblemFile::from_toml(&text).unwrap();
        let set = file.set_spec().unwrap();
        assert!(set.is_member(&[0.5]).unwrap());
        assert!(!set.is_member(&[1.5]).unwrap());
    }

    #[test]
    fn families_parse_members_weights_and_outer() {
        let text = r#"
dimension = 1

[box]
lower = [0.0]
upper = [1.0]

[functions]
e = "s"
psi = "a1 - b1"
members = ["s", "2*s"]
weights = [1.0, 0.5]
outer = "2*x"
"#;
        let file = ProblemFile::from_toml(text).unwrap();
        let (fam, base) = file.to_family().unwrap();
        assert_eq!(fam.members().len(), 2);
        assert_eq!(fam.weights(), Some(&[1.0, 0.5][..]));
        assert!(fam.outer().is_some());
        assert_eq!(base.h.eval(&[0.25]).unwrap(), 0.25);
    }

    #[test]
    fn optimization_problems_build_with_constraints() {
        let text = r#"
dimension = 1

[box]
lower = [0.0]
upper = [1.0]

[functions]
objective = "abs(s - 0.6) - 0.1*s"
constraints = ["s - 0.9"]
e = "0"
psi = "-b1"
"#;
        let file = ProblemFile::from_toml(text).unwrap();
        let nlpp = file.to_nlpp().unwrap();
        assert_eq!(nlpp.constraints.len(), 1);
        let feasible = nlpp.feasible_set();
        assert!(feasible.is_member(&[0.5]).unwrap());
        assert!(!feasible.is_member(&[0.95]).unwrap());
    }

    #[test]
    fn bivariate_functions_use_block_variables() {
        let text = r#"
dimension = 1

[box]
lower = [0.0]
upper = [1.0]

[functions]
e = "s"
psi = "a1 - b1"
bivariate = "max(a1, b1)"

[checks]
t_grid = 4
"#;
        let file = ProblemFile::from_toml(text).unwrap();
        let f = file.to_bivariate().unwrap();
        assert_eq!(f.half_dim(), 1);
        assert_eq!(f.scalar().eval(&[0.3, 0.8]).unwrap(), 0.8);
        assert_eq!(file.t_plan().grid_per_axis, 4);
    }

    #[test]
    fn serialized_files_round_trip() {
        let file = ProblemFile::from_toml(EX1).unwrap();
        let text = toml::to_string(&file).unwrap();
        let back = ProblemFile::from_toml(&text).unwrap();
        assert_eq!(back.dimension, file.dimension);
        assert_eq!(back.functions.h, file.functions.h);
        assert_eq!(back.bounds.lower, file.bounds.lower);
    }
}
