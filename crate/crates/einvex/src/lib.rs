//! Sample-based certification and counterexample search for strongly
//! E-invex sets, quasi strongly E-preinvex functions and their relatives,
//! plus a derivative-free solver for constrained programs built from them.

pub mod classifiers;
pub mod cli;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod maps;
pub mod nlpp;
pub mod plan;
pub mod problem_file;
pub mod report;
mod scan;
pub mod sets;
pub mod theorems;

pub use classifiers::{
    check_condition_a, check_e_preinvex, check_e_prequasi_invex, check_psei, check_qsei, check_qsep,
    check_sei, check_sep, check_strict_qsep, evaluate_sample, evaluate_sample_tol, find_counterexample,
    gradient, gradient_fd, recover_vbar, run_check, CheckKind, ProblemTriple, SampleCheck,
};
pub use error::{Error, Result};
pub use expr::{EvalError, Expr, ParseError, Value};
pub use fixtures::{builtin, builtin_names, load_builtin, CanonicalSample, Fixture, FixtureKind};
pub use maps::{ScalarFn, VectorFn};
pub use nlpp::{NlppProblem, NlppResult, StartRecord, GAP_TOLERANCE};
pub use plan::{inequality_tolerance, value_tolerance, SamplingPlan, BASE_TOLERANCE, STRICTNESS_MARGIN};
pub use problem_file::ProblemFile;
pub use report::{CertReport, Status, Witness};
pub use sets::{check_e_image_subset, check_strongly_e_invex, sublevel_set, BoxBounds, SetSpec};
pub use theorems::{
    check_levelsets_imply_qsep, qsep_sublevel_sei, verify_composition, verify_inf_marginal,
    verify_linear_combination, verify_sei_conda_implies_sep, verify_sei_implies_qsei,
    verify_sei_nonneg_dot_implies_psei, verify_sep_implies_qsep, verify_shift_property, verify_sup_family,
    BivariateFn, FamilySpec,
};
