//! Command line interface.
//!
//! Each subcommand maps onto one library entry point and reports through
//! the same [`CertReport`] or solver result the library returns. The exit
//! code is the machine-readable verdict: `0` when the run certified (or the
//! solver found nothing wrong), `2` when a property was refuted, `3` when
//! every hypothesis of a verified statement certified and its conclusion
//! still failed, and `1` for usage or evaluation errors. Stdout is a human
//! summary and is not meant to be parsed; pass `--json <path>` to write the
//! full report as JSON.
//!
//! Problem inputs are paths to TOML problem files; wherever a file is
//! expected, the name of a built-in example (`einvex examples` lists them)
//! also works.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::classifiers::{evaluate_sample, find_counterexample, run_check, CheckKind};
use crate::error::{Error, Result};
use crate::fixtures::{builtin, builtin_names, load_builtin, Fixture, FixtureKind};
use crate::nlpp::NlppResult;
use crate::plan::SamplingPlan;
use crate::problem_file::ProblemFile;
use crate::report::CertReport;
use crate::sets::{check_e_image_subset, check_strongly_e_invex};
use crate::theorems::{
    check_levelsets_imply_qsep, qsep_sublevel_sei, verify_composition, verify_inf_marginal,
    verify_linear_combination, verify_sei_conda_implies_sep, verify_sei_implies_qsei,
    verify_sei_nonneg_dot_implies_psei, verify_sep_implies_qsep, verify_shift_property, verify_sup_family,
};

const SUITE_NAMES: &[&str] = &[
    "shift_property",
    "linear_combination",
    "sup_family",
    "composition",
    "sep_implies_qsep",
    "sei_implies_qsei",
    "sei_conda_implies_sep",
    "sei_nonneg_dot_implies_psei",
    "inf_marginal",
    "levelsets_imply_qsep",
    "qsep_sublevel_sei",
];

#[derive(Debug, Parser)]
#[command(
    name = "einvex",
    version,
    about = "Sample-based certification, counterexample search, and solving for problems with invex structure",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Plan fields that can be overridden from the command line. Anything not
/// overridden comes from the problem file's `[plan]` section or the
/// documented defaults.
#[derive(Debug, Args)]
struct PlanOverrides {
    /// Seed for the random pair draws.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Base relative tolerance for every inequality comparison.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify or refute one property of a problem on its sampling plan.
    Certify {
        /// Property to check: sep, qsep, strict_qsep, e_preinvex,
        /// e_prequasi_invex, sei, qsei, psei, condition_a, invex_set, or
        /// e_image.
        property: String,
        /// Problem file (or the name of a built-in example).
        file: PathBuf,
        #[command(flatten)]
        overrides: PlanOverrides,
        /// Write the full report as JSON to this path.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Search for a violating sample of a property and print it.
    Counterexample {
        /// Property to search: sep, qsep, strict_qsep, e_preinvex,
        /// e_prequasi_invex, sei, qsei, psei, or condition_a.
        property: String,
        /// Problem file (or the name of a built-in example).
        file: PathBuf,
        /// Sharpen the witness by coordinate ascent on its margin.
        #[arg(long)]
        refine: bool,
        #[command(flatten)]
        overrides: PlanOverrides,
        /// Write the full report as JSON to this path.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Verify a statement: certify its hypotheses, then its conclusion.
    Suite {
        /// Statement to verify; one of shift_property, linear_combination,
        /// sup_family, composition, sep_implies_qsep, sei_implies_qsei,
        /// sei_conda_implies_sep, sei_nonneg_dot_implies_psei,
        /// inf_marginal, levelsets_imply_qsep, qsep_sublevel_sei.
        theorem: String,
        /// Problem file (or the name of a built-in example).
        file: PathBuf,
        #[command(flatten)]
        overrides: PlanOverrides,
        /// Write the full report as JSON to this path.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Solve a constrained minimization problem by certified multi-start
    /// local search, cross-checked against a dense scan.
    Solve {
        /// Problem file (or the name of a built-in example).
        file: PathBuf,
        /// Number of local searches from low-discrepancy starts.
        #[arg(long, default_value_t = 32)]
        starts: usize,
        #[command(flatten)]
        overrides: PlanOverrides,
        /// Write the full result as JSON to this path.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Describe a built-in example, or run one of its checks.
    Examples {
        /// Name of the example; omit to list them all.
        name: Option<String>,
        /// Run this property check on the example and reproduce its
        /// published violating samples.
        #[arg(long, value_name = "PROPERTY")]
        check: Option<String>,
        #[command(flatten)]
        overrides: PlanOverrides,
        /// Write the full report as JSON to this path.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
}

/// Parses the arguments, runs the selected command, and returns the process
/// exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Like [`run`], from explicit arguments (the first is the program name).
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version exit cleanly; everything else is usage.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Certify {
            property,
            file,
            overrides,
            json,
        } => {
            let file = load_input(&file)?;
            let plan = resolved_plan(&file, &overrides)?;
            let report = run_property(&property, &file, &plan)?;
            println!("{}", report.render_text());
            write_json(json.as_deref(), report.to_json_pretty())?;
            Ok(report.status.exit_code())
        }
        Command::Counterexample {
            property,
            file,
            refine,
            overrides,
            json,
        } => {
            let file = load_input(&file)?;
            let plan = resolved_plan(&file, &overrides)?;
            let kind = CheckKind::from_str(&property)?;
            let triple = file.to_triple()?;
            let witness = find_counterexample(kind, &triple, &plan, refine)?;
            let mut report = run_check(kind, &triple, &plan)?;
            match witness {
                Some(w) => {
                    println!(
                        "counterexample to {}: s = {:?}, t = {:?}, alpha = {}, lambda = {}",
                        kind.name(),
                        w.s,
                        w.t,
                        w.alpha,
                        w.lambda
                    );
                    println!("  lhs = {}, rhs = {}, margin = {:.6e}", w.lhs, w.rhs, w.margin);
                    if refine {
                        println!("  (sharpened from scan sample {})", w.sample_index);
                        report.push_note("the witness was sharpened by coordinate ascent after the scan".to_string());
                    }
                    report.witness = Some(w);
                }
                None => println!(
                    "no counterexample to {} in {} samples",
                    kind.name(),
                    report.samples_checked
                ),
            }
            write_json(json.as_deref(), report.to_json_pretty())?;
            Ok(report.status.exit_code())
        }
        Command::Suite {
            theorem,
            file,
            overrides,
            json,
        } => {
            let file = load_input(&file)?;
            let plan = resolved_plan(&file, &overrides)?;
            let report = run_suite(&theorem, &file, &plan)?;
            println!("{}", report.render_text());
            write_json(json.as_deref(), report.to_json_pretty())?;
            Ok(report.status.exit_code())
        }
        Command::Solve {
            file,
            starts,
            overrides,
            json,
        } => {
            let file = load_input(&file)?;
            let plan = resolved_plan(&file, &overrides)?;
            let problem = file.to_nlpp()?;
            let result = problem.solve(&plan, starts)?;
            println!("{}", render_solve(&result));
            write_json(
                json.as_deref(),
                serde_json::to_string_pretty(&result).expect("result serialization cannot fail"),
            )?;
            Ok(result.status.exit_code())
        }
        Command::Examples {
            name,
            check,
            overrides,
            json,
        } => {
            let Some(name) = name else {
                println!("built-in examples:");
                for n in builtin_names() {
                    let fx = builtin(n)?;
                    println!("  {:<12} {}", n, fx.summary);
                }
                return Ok(0);
            };
            let fx = builtin(&name)?;
            match check {
                None => {
                    describe_fixture(&fx)?;
                    Ok(0)
                }
                Some(property) => {
                    let plan = resolved_plan(&fx.file, &overrides)?;
                    let report = run_property(&property, &fx.file, &plan)?;
                    println!("{}", report.render_text());
                    reproduce_canonical(&fx, &property)?;
                    write_json(json.as_deref(), report.to_json_pretty())?;
                    Ok(report.status.exit_code())
                }
            }
        }
    }
}

/// Reads a problem file from a path, falling back to the built-in example
/// of that name when no such file exists.
fn load_input(path: &Path) -> Result<ProblemFile> {
    if path.exists() {
        return ProblemFile::load(path);
    }
    if let Some(name) = path.to_str() {
        if builtin_names().contains(&name) {
            return load_builtin(name);
        }
    }
    Err(Error::ProblemFile(format!(
        "{}: no such file, and not the name of a built-in example",
        path.display()
    )))
}

fn resolved_plan(file: &ProblemFile, overrides: &PlanOverrides) -> Result<SamplingPlan> {
    let mut plan = file.plan();
    if let Some(seed) = overrides.seed {
        plan = plan.with_seed(seed);
    }
    if let Some(grid) = overrides.grid {
        plan = plan.with_grid(grid);
    }
    if let Some(tol) = overrides.tol {
        plan = plan.with_base_tolerance(tol);
    }
    plan.validate()?;
    Ok(plan)
}

/// Dispatches a property name to its check. Covers the nine function
/// properties plus the two set checks.
fn run_property(property: &str, file: &ProblemFile, plan: &SamplingPlan) -> Result<CertReport> {
    match property {
        "invex_set" => check_strongly_e_invex(&file.set_spec()?, &file.e_map()?, &file.psi_map()?, plan),
        "e_image" => check_e_image_subset(&file.set_spec()?, &file.e_map()?, plan),
        _ => {
            let kind = CheckKind::from_str(property).map_err(|_| {
                let names: Vec<&str> = CheckKind::all().iter().map(|k| k.name()).collect();
                Error::Usage(format!(
                    "unknown property `{property}`; expected one of {}, invex_set, e_image",
                    names.join(", ")
                ))
            })?;
            run_check(kind, &file.to_triple()?, plan)
        }
    }
}

fn run_suite(theorem: &str, file: &ProblemFile, plan: &SamplingPlan) -> Result<CertReport> {
    match theorem {
        "shift_property" => verify_shift_property(&file.to_triple()?, plan),
        "linear_combination" => {
            let (fam, base) = file.to_family()?;
            verify_linear_combination(&fam, &base, plan)
        }
        "sup_family" => {
            let (fam, base) = file.to_family()?;
            verify_sup_family(&fam, &base, plan)
        }
        "composition" => {
            let (fam, base) = file.to_family()?;
            verify_composition(&fam, &base, plan)
        }
        "sep_implies_qsep" => verify_sep_implies_qsep(&file.to_triple()?, plan),
        "sei_implies_qsei" => verify_sei_implies_qsei(&file.to_triple()?, plan),
        "sei_conda_implies_sep" => verify_sei_conda_implies_sep(&file.to_triple()?, plan),
        "sei_nonneg_dot_implies_psei" => verify_sei_nonneg_dot_implies_psei(&file.to_triple()?, plan),
        "inf_marginal" => {
            let mut t_plan = plan.clone();
            if let Some(g) = file.checks.t_grid {
                t_plan = t_plan.with_grid(g);
            }
            verify_inf_marginal(&file.to_bivariate()?, &file.to_base_triple()?, &t_plan, plan)
        }
        "levelsets_imply_qsep" => check_levelsets_imply_qsep(
            &file.h_function()?,
            &file.set_spec()?,
            &file.e_map()?,
            &file.psi_map()?,
            &file.checks.levels,
            plan,
        ),
        "qsep_sublevel_sei" => {
            let members = file.member_functions()?;
            let h_list = if members.is_empty() {
                vec![file.h_function()?]
            } else {
                members
            };
            qsep_sublevel_sei(&h_list, &file.e_map()?, &file.psi_map()?, &file.set_spec()?, plan)
        }
        _ => Err(Error::Usage(format!(
            "unknown statement `{theorem}`; expected one of {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

fn write_json(path: Option<&Path>, json: String) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, json + "\n")?;
    }
    Ok(())
}

fn render_solve(result: &NlppResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("solve: {}\n", result.status));
    out.push_str(&format!(
        "minimizer {:?} with value {} (feasibility residual {:.3e})\n",
        result.minimizer, result.value, result.feasibility_residual
    ));
    out.push_str(&format!(
        "{} starts; dense scan best {}; gap {:.3e}; local ball radius {:.3e}\n",
        result.starts_used, result.global_scan_best, result.global_gap, result.local_ball_radius
    ));
    if let Some(assumptions) = &result.assumptions {
        out.push_str(&format!("assumptions: {}\n", assumptions.status));
        for sub in &assumptions.sub_reports {
            out.push_str(&format!("  {:<36} {}\n", sub.property, sub.status));
        }
    }
    for note in &result.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    out.trim_end().to_string()
}

fn describe_fixture(fx: &Fixture) -> Result<()> {
    println!("{}: {}", fx.name, fx.summary);
    let bounds = fx.file.bounds()?;
    let axes: Vec<String> = bounds.axes().iter().map(|a| format!("[{}, {}]", a[0], a[1])).collect();
    println!("dimension {}; box {}", fx.file.dimension, axes.join(" x "));
    match fx.kind {
        FixtureKind::Classification => {
            println!("published outcomes under the fixture plan (not run now):");
            for (kind, status) in &fx.expected {
                println!("  {:<18} {status}", kind.name());
            }
            for c in &fx.canonical {
                println!(
                    "published violating sample for {}: s = {:?}, t = {:?}, alpha = {}, lambda = {} (lhs {}, rhs {})",
                    c.kind.name(),
                    c.s,
                    c.t,
                    c.alpha,
                    c.lambda,
                    c.lhs,
                    c.rhs
                );
            }
            println!("run `einvex examples {} --check <property>` to reproduce", fx.name);
        }
        FixtureKind::Optimization => {
            if let Some((status, note)) = &fx.expected_solve {
                println!("expected solve outcome (not run now): {status}");
                println!("  {note}");
            }
            println!("run `einvex solve {}` to reproduce", fx.name);
        }
    }
    Ok(())
}

/// After an `examples --check`, re-evaluates the published violating
/// samples for that property so their sides are visibly reproduced.
fn reproduce_canonical(fx: &Fixture, property: &str) -> Result<()> {
    let Ok(kind) = CheckKind::from_str(property) else {
        return Ok(());
    };
    let samples: Vec<_> = fx.canonical.iter().filter(|c| c.kind == kind).collect();
    if samples.is_empty() {
        return Ok(());
    }
    let triple = fx.file.to_triple()?;
    for c in samples {
        let at = evaluate_sample(kind, &triple, &c.s, &c.t, c.alpha, c.lambda)?;
        println!(
            "published sample recomputed: s = {:?}, t = {:?}, alpha = {}, lambda = {}: lhs = {}, rhs = {} (published {}, {})",
            c.s, c.t, c.alpha, c.lambda, at.lhs, at.rhs, c.lhs, c.rhs
        );
    }
    if let Some((_, status)) = fx.expected.iter().find(|(k, _)| *k == kind) {
        println!("published outcome under the fixture plan: {status}");
    }
    Ok(())
}
