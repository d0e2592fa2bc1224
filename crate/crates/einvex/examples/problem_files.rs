//! Write, load, and validate declarative problem files.
//!
//! A problem file is one TOML document: the dimension, the sampled box,
//! expression strings for the maps, and optional sections for the plan,
//! the set, constraints, families, and suite parameters. The files under
//! `examples/problems/` are the shipped fixtures; this example builds one
//! from scratch, round-trips it through disk, and shows the error messages
//! for the common mistakes.
//!
//! Run with `cargo run --example problem_files`.

use einvex::{check_e_prequasi_invex, ProblemFile, Status};

fn main() -> einvex::Result<()> {
    let text = r#"
dimension = 1
variables = ["u"]

[box]
lower = [-1.0]
upper = [1.0]

[functions]
h = "u^2"
e = "u"
psi = "a1 - b1"

[plan]
seed = 7
grid_per_axis = 9
random_pairs = 200
"#;

    let file = ProblemFile::from_toml(text)?;
    println!(
        "parsed: dimension {}, variables {:?}, seed {}",
        file.dimension,
        file.variables(),
        file.plan().seed
    );

    // The builders hand out exactly what each check needs. The square is
    // quasiconvex along segments, which is the alpha = 0 check.
    let triple = file.to_triple()?;
    let report = check_e_prequasi_invex(&triple, &file.plan())?;
    println!("u^2 quasi along segments on [-1, 1]: {}", report.status);
    assert_eq!(report.status, Status::CertifiedOnSamples);

    // Files round-trip through disk unchanged.
    let dir = std::env::temp_dir().join("einvex_problem_files_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("square.toml");
    std::fs::write(&path, text)?;
    let loaded = ProblemFile::load(&path)?;
    assert_eq!(loaded.functions.h, file.functions.h);
    println!("reloaded from {}", path.display());

    // Mistakes fail loudly and name their location.
    let typo = ProblemFile::from_toml(&text.replace("psi = ", "kernel = "));
    println!("unknown key:     {}", typo.unwrap_err());

    let wrong_dim = ProblemFile::from_toml(&text.replace("lower = [-1.0]", "lower = [-1.0, 0.0]"));
    println!("box mismatch:    {}", wrong_dim.unwrap_err());

    let bad_expr = ProblemFile::from_toml(&text.replace("h = \"u^2\"", "h = \"v^2\""))?;
    println!("unknown var:     {}", bad_expr.to_triple().unwrap_err());

    let missing = ProblemFile::load(dir.join("no_such_file.toml"));
    println!("missing file:    {}", missing.unwrap_err());

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
