//! Certify properties of the built-in examples and reproduce their
//! published violating samples.
//!
//! `ex1` is quasi along every shifted path but not convex along them, so
//! the quasi check certifies while the convexity check refutes with a
//! concrete witness. Both verdicts hold only on the sampled plan; that is
//! what "certified on samples" means everywhere in this crate.
//!
//! Run with `cargo run --example certify_fixture`.

use einvex::{builtin, check_qsep, check_sep, evaluate_sample, CheckKind, Status};

fn main() -> einvex::Result<()> {
    let fx = builtin("ex1")?;
    let triple = fx.file.to_triple()?;
    let plan = fx.file.plan();

    let qsep = check_qsep(&triple, &plan)?;
    println!("{}", qsep.render_text());
    assert_eq!(qsep.status, Status::CertifiedOnSamples);

    let sep = check_sep(&triple, &plan)?;
    println!("{}", sep.render_text());
    assert_eq!(sep.status, Status::Refuted);

    // The scan returns its worst violation; the fixture also publishes a
    // hand-picked sample whose sides are exact in floating point.
    let w = sep.witness.as_ref().expect("refutations carry a witness");
    println!(
        "scan witness: s = {:?}, t = {:?}, alpha = {}, lambda = {} with margin {:.3}",
        w.s, w.t, w.alpha, w.lambda, w.margin
    );
    for c in &fx.canonical {
        let at = evaluate_sample(c.kind, &triple, &c.s, &c.t, c.alpha, c.lambda)?;
        println!(
            "published {} sample: lhs = {} (expected {}), rhs = {} (expected {})",
            c.kind.name(),
            at.lhs,
            c.lhs,
            at.rhs,
            c.rhs
        );
        assert_eq!((at.lhs, at.rhs), (c.lhs, c.rhs));
    }

    // Every check shares one entry point if you prefer dispatching by kind.
    for kind in CheckKind::all() {
        if !kind.needs_gradient() {
            let report = einvex::run_check(kind, &triple, &plan)?;
            println!("{:<18} {}", kind.name(), report.status);
        }
    }
    Ok(())
}
