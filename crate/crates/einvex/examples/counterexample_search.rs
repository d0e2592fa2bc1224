//! Search for a violating sample and sharpen it.
//!
//! `ex2` mirrors the axis with E(s) = -s^2, which drags combination points
//! into the region where h grows: the full quasi check is refuted even
//! though its alpha = 0 restriction certifies. The counterexample search
//! returns the scan's worst violation; `refine` then walks it uphill by
//! coordinate ascent to enlarge the margin.
//!
//! Run with `cargo run --example counterexample_search`.

use einvex::{builtin, evaluate_sample, find_counterexample, CheckKind};

fn main() -> einvex::Result<()> {
    let fx = builtin("ex2")?;
    let triple = fx.file.to_triple()?;
    let plan = fx.file.plan();

    let raw = find_counterexample(CheckKind::Qsep, &triple, &plan, false)?
        .expect("the quasi check is refuted on ex2");
    println!(
        "scan witness:    s = {:?}, t = {:?}, alpha = {}, lambda = {}, margin = {}",
        raw.s, raw.t, raw.alpha, raw.lambda, raw.margin
    );

    let refined = find_counterexample(CheckKind::Qsep, &triple, &plan, true)?
        .expect("refinement starts from the same scan");
    println!(
        "refined witness: s = {:?}, t = {:?}, alpha = {}, lambda = {}, margin = {}",
        refined.s, refined.t, refined.alpha, refined.lambda, refined.margin
    );
    assert!(refined.margin >= raw.margin, "refinement never loses margin");

    // Witnesses are self-contained: re-evaluating the sample reproduces the
    // recorded sides. This is the invariant JSON consumers rely on.
    let again = evaluate_sample(CheckKind::Qsep, &triple, &refined.s, &refined.t, refined.alpha, refined.lambda)?;
    assert_eq!((again.lhs, again.rhs), (refined.lhs, refined.rhs));
    println!("witness recomputes to lhs = {}, rhs = {}", again.lhs, again.rhs);

    // The certified direction comes back as None.
    let none = find_counterexample(CheckKind::EPrequasiInvex, &triple, &plan, false)?;
    assert!(none.is_none());
    println!("no counterexample to e_prequasi_invex on this plan");
    Ok(())
}
