//! Tour of the expression language used by problem files.
//!
//! Expressions are plain text over named variables with arithmetic,
//! comparisons feeding `if .. then .. else ..`, integer powers, `abs`,
//! `min`, `max`, and vector literals `[..]` at the top level. Parsed
//! expressions print back in a form that reparses to the same function.
//!
//! Run with `cargo run --example parse_and_eval`.

use einvex::{Expr, ScalarFn, VectorFn};

fn main() -> einvex::Result<()> {
    // A piecewise scalar: flat on the positive axis, linear growth on the
    // negative one.
    let h = Expr::parse("if s > 0 then 1 else -s", &["s"])?;
    println!("h(s) = {h}");
    for s in [-2.0, -0.5, 0.0, 0.75] {
        println!("  h({s}) = {}", h.eval_scalar(&[s])?);
    }

    // Vector expressions produce one component per bracket entry. This is
    // the projection map used by the two-dimensional examples.
    let e = Expr::parse("[0, t]", &["s", "t"])?;
    println!("E(s, t) = {e}");
    println!("  E(-1.5, -0.25) = {:?}", e.eval_vector(&[-1.5, -0.25])?);

    // Kernels take two point blocks; the convention is a1..an then b1..bn.
    let psi = Expr::parse("if a1 != b1 then -b1 else 0", &["a1", "b1"])?;
    println!("psi(a, b) = {psi}");
    println!("  psi(0, 1.5) = {:?}", psi.eval_vector(&[0.0, 1.5])?);

    // Display output reparses to the same function.
    let pretty = format!("{h}");
    let again = Expr::parse(&pretty, &["s"])?;
    assert_eq!(again.eval_scalar(&[-2.0])?, h.eval_scalar(&[-2.0])?);
    println!("display round-trips: `{pretty}`");

    // ScalarFn and VectorFn wrap expressions (or native closures) behind a
    // uniform call interface; the rest of the crate works with these.
    let f = ScalarFn::from_expr(Expr::parse("min(s^2, abs(s))", &["s"])?)?;
    println!("{} at 0.5 = {}", f.name(), f.eval(&[0.5])?);
    let m = VectorFn::from_expr(Expr::parse("[s + t, s - t]", &["s", "t"])?);
    println!("{} at (2, 1) = {:?}", m.name(), m.eval(&[2.0, 1.0])?);

    // Evaluation failures carry the offending inputs instead of panicking.
    let div = Expr::parse("1 / s", &["s"])?;
    match div.eval_scalar(&[0.0]) {
        Err(e) => println!("division by zero reports: {e}"),
        Ok(v) => unreachable!("expected an evaluation error, got {v}"),
    }
    Ok(())
}
