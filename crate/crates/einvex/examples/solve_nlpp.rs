//! Solve constrained problems by certified multi-start local search.
//!
//! The solver first certifies the structural assumptions under which a
//! local minimum must be global (feasible set invex under the map and
//! kernel, objective strictly quasi along paths, shifts staying feasible),
//! then runs derivative-free compass searches from low-discrepancy starts
//! and cross-checks the best against a dense scan. A positive gap with
//! certified assumptions is reported as a violation of the statement; the
//! `narrow_well` fixture manufactures exactly that by hiding a needle the
//! searches cannot see.
//!
//! Run with `cargo run --example solve_nlpp`.

use einvex::{builtin, Status};

fn main() -> einvex::Result<()> {
    // Well-behaved: assumptions certify and all starts agree with the scan.
    let vee = builtin("vee")?.file.to_nlpp()?;
    let plan = einvex::SamplingPlan::default();
    let result = vee.solve(&plan, 32)?;
    println!(
        "vee: {} at {:?} with value {} (gap {:.2e})",
        result.status, result.minimizer, result.value, result.global_gap
    );
    assert_eq!(result.status, Status::CertifiedOnSamples);
    assert!((result.minimizer[0] - 0.6).abs() < 1e-6);

    // Control: two tied wells refute the strictness assumption, so the
    // local-is-global statement asserts nothing. The starts split between
    // the minimizers; no violation is reported.
    let wells = builtin("double_well")?.file.to_nlpp()?;
    let result = wells.solve(&plan, 32)?;
    let assumptions = result.assumptions.as_ref().expect("solve records its assumption checks");
    println!(
        "double_well: {} with assumptions {} ({} starts)",
        result.status, assumptions.status, result.starts_used
    );
    assert_eq!(result.status, Status::CertifiedOnSamples);
    assert_eq!(assumptions.status, Status::Refuted);
    let lo = result.starts.iter().map(|r| r.minimizer[0]).fold(f64::INFINITY, f64::min);
    let hi = result.starts.iter().map(|r| r.minimizer[0]).fold(f64::NEG_INFINITY, f64::max);
    println!("  minimizers span [{lo:.3}, {hi:.3}]");
    assert!(hi - lo > 0.5, "both wells are visited");

    // The needle: every sampled assumption certifies (the constant map
    // makes strictness vacuous), yet the dense scan finds a point every
    // local search missed. The positive gap is reported loudly.
    let needle = builtin("narrow_well")?.file.to_nlpp()?;
    let result = needle.solve(&plan, 32)?;
    println!(
        "narrow_well: {} (local best {}, scan best {}, gap {:.3})",
        result.status, result.value, result.global_scan_best, result.global_gap
    );
    assert_eq!(result.status, Status::TheoremViolation);
    for note in &result.notes {
        println!("  note: {note}");
    }
    Ok(())
}
