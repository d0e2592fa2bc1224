//! Certify sets: invexity under a map and kernel, image containment, and
//! sublevel sets.
//!
//! A set S is strongly E-invex for (E, psi) when every combination point
//! alpha*t + E(t) + lambda*psi(alpha*s + E(s), alpha*t + E(t)) stays in S.
//! The checks sample members of S and test the combination points for
//! membership; bounded boxes enforce the box itself, windows enforce only
//! the predicates.
//!
//! Run with `cargo run --example set_certification`.

use einvex::{
    check_e_image_subset, check_strongly_e_invex, load_builtin, sublevel_set, BoxBounds, Expr, SamplingPlan,
    ScalarFn, SetSpec, Status, VectorFn,
};

fn main() -> einvex::Result<()> {
    let plan = SamplingPlan::default();

    // The whole window of ex1 is invex under its fold map and kernel.
    let file = load_builtin("ex1")?;
    let set = file.set_spec()?;
    let e = file.e_map()?;
    let psi = file.psi_map()?;
    let whole = check_strongly_e_invex(&set, &e, &psi, &plan)?;
    println!("{}", whole.render_text());
    assert_eq!(whole.status, Status::CertifiedOnSamples);

    // Sublevel sets restrict membership by h(x) <= r. The zero level of
    // ex1's function is the single point {0}, which still certifies; a
    // fractional level cuts an interval that the fold map escapes.
    let h = file.h_function()?;
    let k0 = sublevel_set(&h, 0.0, &set)?;
    let r0 = check_strongly_e_invex(&k0, &e, &psi, &plan)?;
    println!("level 0:   {}", r0.status);
    assert_eq!(r0.status, Status::CertifiedOnSamples);

    let khalf = sublevel_set(&h, 0.5, &set)?;
    let rhalf = check_strongly_e_invex(&khalf, &e, &psi, &plan)?;
    println!("level 0.5: {}", rhalf.status);
    assert_eq!(rhalf.status, Status::Refuted);
    let w = rhalf.witness.as_ref().expect("refuted set checks carry the escaping sample");
    println!(
        "  the combination point from s = {:?}, t = {:?}, alpha = {}, lambda = {} leaves the level set",
        w.s, w.t, w.alpha, w.lambda
    );

    // Image containment: E(S) inside S. The fold map keeps the window, a
    // translation walks out of a bounded box.
    let image_ok = check_e_image_subset(&set, &e, &plan)?;
    println!("E(S) in S for ex1: {}", image_ok.status);
    assert_eq!(image_ok.status, Status::CertifiedOnSamples);

    let unit = SetSpec::bounded(BoxBounds::new(vec![[0.0, 1.0]])?);
    let shift = VectorFn::from_expr(Expr::parse("s + 1", &["s"])?);
    let escaped = check_e_image_subset(&unit, &shift, &plan)?;
    println!("E(S) in S for a translation on [0, 1]: {}", escaped.status);
    assert_eq!(escaped.status, Status::Refuted);

    // Predicates carve subsets out of a window; the same checks apply.
    let half_line = SetSpec::window(BoxBounds::new(vec![[-2.0, 2.0]])?)
        .with_predicate(ScalarFn::from_expr(Expr::parse("-s", &["s"])?)?)?;
    let identity = VectorFn::identity(1);
    let diff = VectorFn::from_expr(Expr::parse("a1 - b1", &["a1", "b1"])?);
    let cone = check_strongly_e_invex(&half_line, &identity, &diff, &plan)?;
    println!("s >= 0 under the identity map and difference kernel: {}", cone.status);
    Ok(())
}
