//! Run verification suites: certify the hypotheses of a statement, then its
//! conclusion, and aggregate honestly.
//!
//! A suite certifies only when everything certifies. When a hypothesis
//! fails, the statement asserts nothing and the suite refutes without
//! blaming the conclusion. When every hypothesis certifies and the
//! conclusion still fails, the suite reports the loudest status there is,
//! because on the sampled evidence the statement itself looks broken; the
//! `ex2` level-set run below shows how a too-coarse hypothesis grid
//! produces exactly that outcome.
//!
//! Run with `cargo run --example theorem_suites`.

use einvex::{
    builtin, check_levelsets_imply_qsep, verify_composition, verify_linear_combination,
    verify_sep_implies_qsep, verify_shift_property, verify_sup_family, FamilySpec, ProblemFile, Status,
};

fn main() -> einvex::Result<()> {
    // The shift property: a quasi-certified function never increases when
    // its argument moves to the shifted image alpha*s + E(s).
    let ex1 = builtin("ex1")?;
    let triple = ex1.file.to_triple()?;
    let plan = ex1.file.plan();
    let shift = verify_shift_property(&triple, &plan)?;
    println!("{}\n", shift.render_text());
    assert_eq!(shift.status, Status::CertifiedOnSamples);

    // Convexity along paths implies the quasi inequality (with the pairwise
    // level hypothesis). ex1 refutes the convexity hypothesis, so the suite
    // refutes and skips the conclusion.
    let bridge = verify_sep_implies_qsep(&triple, &plan)?;
    println!("{}\n", bridge.render_text());
    assert_eq!(bridge.status, Status::Refuted);

    // Families: nonnegative weighted sums and pointwise maxima of quasi
    // members stay quasi. The members here are ex1's function and a scaled
    // copy, both nonnegative and quasi under the same fold map.
    let family_file = ProblemFile::from_toml(
        r#"
dimension = 1

[box]
lower = [-2.0]
upper = [2.0]

[functions]
h = "if s > 0 then 1 else -s"
e = "abs(s)"
psi = "if a1 != b1 then -b1 else 0"
members = ["if s > 0 then 1 else -s", "if s > 0 then 2 else -2*s"]
weights = [1.0, 0.5]
outer = "2*x"
"#,
    )?;
    let (fam, base) = family_file.to_family()?;
    let combo = verify_linear_combination(&fam, &base, &plan)?;
    println!("linear combination: {}", combo.status);
    assert_eq!(combo.status, Status::CertifiedOnSamples);

    let sup = verify_sup_family(&fam, &base, &plan)?;
    println!("pointwise maximum:  {}", sup.status);
    assert_eq!(sup.status, Status::CertifiedOnSamples);

    // Composition with a homogeneous nondecreasing outer function. The
    // outer checks are spot checks on sampled values, reported as their own
    // hypothesis stages.
    let outer = FamilySpec::outer_only(fam.outer().expect("the file declares an outer function").clone())?;
    let composed = verify_composition(&outer, &triple, &plan)?;
    println!("composition:        {}", composed.status);
    assert_eq!(composed.status, Status::CertifiedOnSamples);

    // Level sets: certifying finitely many levels can miss the failure.
    // ex2's level 0 cuts the single point {0}, which certifies, while the
    // full quasi conclusion is refuted: the suite reports the violation and
    // points at the coarse level grid.
    let ex2 = builtin("ex2")?;
    let coarse = check_levelsets_imply_qsep(
        &ex2.file.h_function()?,
        &ex2.file.set_spec()?,
        &ex2.file.e_map()?,
        &ex2.file.psi_map()?,
        &ex2.file.checks.levels,
        &plan,
    )?;
    println!("\n{}", coarse.render_text());
    assert_eq!(coarse.status, Status::TheoremViolation);
    Ok(())
}
