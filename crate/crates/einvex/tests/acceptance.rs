//! End-to-end acceptance checks for the crate. Each test pins one published
//! behavior of the toolkit: the frozen classification outcomes of the
//! built-in fixtures, agreement with independent oracles, theorem-suite
//! green paths, solver quality, determinism, and gradient accuracy. The
//! test names double as the pass/fail report: one line per criterion.

use std::process::Command;
use std::time::Instant;

use einvex::{
    builtin, check_e_prequasi_invex, check_psei, check_qsei, check_qsep, check_sei, check_sep,
    evaluate_sample, gradient, gradient_fd, run_check, verify_composition, verify_inf_marginal,
    verify_linear_combination, verify_shift_property, verify_sup_family, BivariateFn, BoxBounds,
    CheckKind, Expr, FamilySpec, ProblemTriple, SamplingPlan, ScalarFn, SetSpec, Status, VectorFn,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar(src: &str, vars: &[&str]) -> ScalarFn {
    ScalarFn::from_expr(Expr::parse(src, vars).unwrap()).unwrap()
}

fn vector(src: &str, vars: &[&str]) -> VectorFn {
    VectorFn::from_expr(Expr::parse(src, vars).unwrap())
}

/// Criterion 1: the indicator fixture refutes the convexity-style property
/// with the published exact sample and certifies the quasi property, fast.
#[test]
fn criterion_1_ex1_refutes_sep_exactly_and_certifies_qsep_under_5s() {
    let clock = Instant::now();
    let fx = builtin("ex1").unwrap();
    let triple = fx.file.to_triple().unwrap();
    let plan = fx.file.plan();

    let sep = check_sep(&triple, &plan).unwrap();
    assert_eq!(sep.status, Status::Refuted, "{}", sep.render_text());
    let w = sep.witness.as_ref().expect("refutation must carry a witness");
    assert!(w.margin > 0.0);

    let at = evaluate_sample(CheckKind::Sep, &triple, &[0.0], &[1.0], 0.5, 0.5).unwrap();
    assert_eq!(at.lhs, 1.0, "lhs at the canonical sample must be exactly 1");
    assert_eq!(at.rhs, 0.5, "rhs at the canonical sample must be exactly 1/2");
    assert!(at.violated);

    let qsep = check_qsep(&triple, &plan).unwrap();
    assert_eq!(qsep.status, Status::CertifiedOnSamples, "{}", qsep.render_text());
    assert!(qsep.witness.is_none(), "a certification must not carry a witness");

    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 1 took {elapsed:?}, budget is 5s");
    println!("criterion 1 ok: sep refuted at (0, 1, 1/2, 1/2) with lhs 1 > rhs 1/2, qsep certified, {elapsed:?}");
}

/// Criterion 2: the mirror fixture keeps the alpha = 0 quasi property but
/// loses the full shifted family, again with an exact published sample.
#[test]
fn criterion_2_ex2_certifies_prequasi_and_refutes_qsep_exactly_under_5s() {
    let clock = Instant::now();
    let fx = builtin("ex2").unwrap();
    let triple = fx.file.to_triple().unwrap();
    let plan = fx.file.plan();

    let quasi = check_e_prequasi_invex(&triple, &plan).unwrap();
    assert_eq!(quasi.status, Status::CertifiedOnSamples, "{}", quasi.render_text());

    let qsep = check_qsep(&triple, &plan).unwrap();
    assert_eq!(qsep.status, Status::Refuted, "{}", qsep.render_text());

    let at = evaluate_sample(CheckKind::Qsep, &triple, &[0.0], &[-1.0], 1.0, 0.0).unwrap();
    assert_eq!(at.lhs, 2.0, "lhs at the canonical sample must be exactly 2");
    assert_eq!(at.rhs, 1.0, "rhs at the canonical sample must be exactly 1");
    assert!(at.violated);

    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 2 took {elapsed:?}, budget is 5s");
    println!("criterion 2 ok: prequasi certified, qsep refuted at (0, -1, 1, 0) with lhs 2 > rhs 1, {elapsed:?}");
}

/// Criterion 3: the cubic fixture separates the quasi gradient property
/// (certified) from the strong one (refuted), and the strong inequality is
/// slack by exactly -1/64 at the published sample, using the analytic
/// gradient.
#[test]
fn criterion_3_qsei_certifies_while_sei_fails_by_exactly_one_64th() {
    let fx = builtin("ex_qsei").unwrap();
    let triple = fx.file.to_triple().unwrap();
    assert!(triple.grad_h.is_some(), "fixture must carry an analytic gradient");
    let plan = fx.file.plan();

    let qsei = check_qsei(&triple, &plan).unwrap();
    assert_eq!(qsei.status, Status::CertifiedOnSamples, "{}", qsei.render_text());

    let sei = check_sei(&triple, &plan).unwrap();
    assert_eq!(sei.status, Status::Refuted, "{}", sei.render_text());

    let at = evaluate_sample(
        CheckKind::Sei,
        &triple,
        &[0.0, -0.5],
        &[0.0, -0.25],
        1.0,
        0.0,
    )
    .unwrap();
    let slack = at.rhs - at.lhs;
    assert!(
        (slack - (-1.0 / 64.0)).abs() < 1e-10,
        "slack at the published sample should be -1/64, got {slack}"
    );
    assert!(at.violated);
    println!("criterion 3 ok: qsei certified, sei refuted, slack at the published sample is -1/64");
}

/// Criterion 4: the pseudo fixture certifies psei and refutes sei, and at
/// alpha = 0 the strong inequality's slack equals -(s2 - t2)^2 on every
/// sampled pair, not just one.
#[test]
fn criterion_4_psei_certifies_and_sei_slack_is_minus_square_of_second_gap() {
    let fx = builtin("ex_psei").unwrap();
    let triple = fx.file.to_triple().unwrap();
    let plan = fx.file.plan();

    let psei = check_psei(&triple, &plan).unwrap();
    assert_eq!(psei.status, Status::CertifiedOnSamples, "{}", psei.render_text());

    let sei = check_sei(&triple, &plan).unwrap();
    assert_eq!(sei.status, Status::Refuted, "{}", sei.render_text());

    let axis: Vec<f64> = (0..5).map(|i| 0.5 * i as f64).collect();
    let mut points = Vec::new();
    for &x in &axis {
        for &y in &axis {
            points.push([x, y]);
        }
    }
    let mut checked = 0usize;
    for s in &points {
        for t in &points {
            let at = evaluate_sample(CheckKind::Sei, &triple, s, t, 0.0, 0.0).unwrap();
            let predicted = -(s[1] - t[1]) * (s[1] - t[1]);
            let slack = at.rhs - at.lhs;
            assert!(
                (slack - predicted).abs() <= 1e-9,
                "slack at s={s:?} t={t:?} should be {predicted}, got {slack}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 625);
    println!("criterion 4 ok: psei certified, sei refuted, alpha = 0 slack matched -(s2 - t2)^2 on 625 pairs");
}

/// Criterion 5: with alpha pinned to zero, the identity map, and the
/// difference kernel, the qsep check is ordinary quasiconvexity along
/// segments. An independent brute-force oracle over the same grid must
/// agree with the classifier on 20 seeded random cubics.
#[test]
fn criterion_5_qsep_matches_brute_force_quasiconvexity_on_random_cubics() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let plan = SamplingPlan::default()
        .with_random_pairs(0)
        .restrict_alphas(&[0.0]);
    let window = SetSpec::window(BoxBounds::cube(1, -1.0, 1.0).unwrap());

    let mut certified = 0usize;
    for case in 0..20 {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let src = format!("{} * s^3 + {} * s^2 + {} * s + {}", c[0], c[1], c[2], c[3]);
        let h = scalar(&src, &["s"]);
        let triple = ProblemTriple::new(
            h.clone(),
            VectorFn::identity(1),
            vector("a1 - b1", &["a1", "b1"]),
            window.clone(),
        )
        .unwrap();
        let report = check_qsep(&triple, &plan).unwrap();

        // Brute-force oracle: enumerate the same grid pairs and lambda
        // values with independent arithmetic and test quasiconvexity of h
        // along segments directly.
        let n = plan.grid_per_axis;
        let grid: Vec<f64> = (0..n)
            .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
            .collect();
        let mut oracle_quasi = true;
        'outer: for &s in &grid {
            for &t in &grid {
                for &lam in &plan.lambda_values {
                    let cpt = t + lam * (s - t);
                    let lhs = h.eval(&[cpt]).unwrap();
                    let rhs = h.eval(&[s]).unwrap().max(h.eval(&[t]).unwrap());
                    let tol = plan.base_tolerance * 1f64.max(lhs.abs()).max(rhs.abs());
                    if lhs > rhs + tol {
                        oracle_quasi = false;
                        break 'outer;
                    }
                }
            }
        }

        assert_eq!(
            report.status == Status::CertifiedOnSamples,
            oracle_quasi,
            "case {case}: classifier said {:?} but the oracle said quasi={oracle_quasi} for {src}",
            report.status
        );
        if oracle_quasi {
            certified += 1;
        }
    }
    assert!(certified > 0 && certified < 20, "the seed should produce a mix, got {certified}/20 quasi");
    println!("criterion 5 ok: 20 of 20 random cubics agree with the brute-force oracle ({certified} quasi)");
}

/// Criterion 6: the five preservation suites report no violation when their
/// hypotheses certify, across the shift, weighted-sum, supremum,
/// composition, and marginal-infimum statements.
#[test]
fn criterion_6_preservation_suites_stay_green_on_certified_hypotheses() {
    let fx = builtin("ex1").unwrap();
    let base = fx.file.to_triple().unwrap();
    let plan = SamplingPlan::default().with_grid(9).with_random_pairs(200);

    let shift = verify_shift_property(&base, &plan).unwrap();
    let scaled = scalar("if s > 0 then 2 else -2*s", &["s"]);
    let fam = FamilySpec::new(vec![base.h.clone(), scaled])
        .unwrap()
        .with_weights(vec![1.0, 0.5])
        .unwrap();
    let combo = verify_linear_combination(&fam, &base, &plan).unwrap();
    let sup = verify_sup_family(&fam, &base, &plan).unwrap();
    let comp_fam = FamilySpec::outer_only(scalar("2*x", &["x"])).unwrap();
    let comp = verify_composition(&comp_fam, &base, &plan).unwrap();
    let f = BivariateFn::new(scalar(
        "max(if s > 0 then 1 else -s, if t > 0 then 1 else -t)",
        &["s", "t"],
    ))
    .unwrap();
    let t_plan = SamplingPlan::default().with_grid(7).with_random_pairs(50);
    let marginal = verify_inf_marginal(&f, &base, &t_plan, &plan).unwrap();

    for (name, report) in [
        ("shift_property", &shift),
        ("linear_combination", &combo),
        ("sup_family", &sup),
        ("composition", &comp),
        ("inf_marginal", &marginal),
    ] {
        assert_ne!(
            report.status,
            Status::TheoremViolation,
            "suite {name} reported a violation:\n{}",
            report.render_text()
        );
        assert_eq!(
            report.status,
            Status::CertifiedOnSamples,
            "suite {name} did not certify:\n{}",
            report.render_text()
        );
    }
    println!("criterion 6 ok: all five preservation suites certified with zero violations");
}

/// Criterion 7: multistart local search on the vee problem lands every
/// start within the gap tolerance of the dense-scan optimum, and the
/// double-well problem exposes two separated minimizers.
#[test]
fn criterion_7_solver_matches_dense_scan_and_finds_separated_wells_under_30s() {
    let clock = Instant::now();

    let vee = builtin("vee").unwrap().file.to_nlpp().unwrap();
    let plan = SamplingPlan::default();
    let result = vee.solve(&plan, 32).unwrap();
    assert_eq!(result.status, Status::CertifiedOnSamples, "vee should solve cleanly");
    assert_eq!(result.starts_used, 32);
    for (i, start) in result.starts.iter().enumerate() {
        let gap = (start.value - result.global_scan_best).abs()
            / 1f64.max(result.global_scan_best.abs());
        assert!(
            gap <= 1e-6,
            "start {i} stalled at value {} while the dense scan found {}",
            start.value,
            result.global_scan_best
        );
    }

    let well = builtin("double_well").unwrap().file.to_nlpp().unwrap();
    let spread = well.solve(&plan, 32).unwrap();
    let lo = spread
        .starts
        .iter()
        .map(|s| s.minimizer[0])
        .fold(f64::INFINITY, f64::min);
    let hi = spread
        .starts
        .iter()
        .map(|s| s.minimizer[0])
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        hi - lo > 0.5,
        "double well should expose two separated minimizers, span was {}",
        hi - lo
    );

    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "criterion 7 took {elapsed:?}, budget is 30s");
    println!("criterion 7 ok: all 32 vee starts within 1e-6 of the scan optimum, well span {:.3}, {elapsed:?}", hi - lo);
}

/// Criterion 8: reports are deterministic. The same seed yields
/// byte-identical JSON in-process, and the command-line binary agrees with
/// itself when forced onto a single thread.
#[test]
fn criterion_8_reports_are_byte_identical_across_runs_and_thread_counts() {
    let fx = builtin("ex1").unwrap();
    let triple = fx.file.to_triple().unwrap();
    let plan = fx.file.plan();
    let first = run_check(CheckKind::Sep, &triple, &plan).unwrap().to_json_pretty();
    let second = run_check(CheckKind::Sep, &triple, &plan).unwrap().to_json_pretty();
    assert_eq!(first, second, "two in-process runs diverged");

    let dir = tempfile::tempdir().unwrap();
    let parallel_path = dir.path().join("parallel.json");
    let serial_path = dir.path().join("serial.json");
    let bin = env!("CARGO_BIN_EXE_einvex");

    let parallel = Command::new(bin)
        .args(["certify", "qsep", "ex1", "--json"])
        .arg(&parallel_path)
        .output()
        .unwrap();
    assert_eq!(parallel.status.code(), Some(0));
    let serial = Command::new(bin)
        .args(["certify", "qsep", "ex1", "--json"])
        .arg(&serial_path)
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(serial.status.code(), Some(0));

    let parallel_bytes = std::fs::read(&parallel_path).unwrap();
    let serial_bytes = std::fs::read(&serial_path).unwrap();
    assert!(!parallel_bytes.is_empty());
    assert_eq!(
        parallel_bytes, serial_bytes,
        "parallel and single-threaded runs wrote different reports"
    );
    println!("criterion 8 ok: reports byte-identical in-process and across thread counts");
}

/// Criterion 9: the finite-difference gradient fallback matches the
/// analytic gradients of both smooth fixtures to 1e-5 relative error at
/// 100 seeded interior points each.
#[test]
fn criterion_9_finite_difference_gradients_match_analytic_to_1e5() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for name in ["ex_qsei", "ex_psei"] {
        let fx = builtin(name).unwrap();
        let triple = fx.file.to_triple().unwrap();
        let bounds = triple.set.bounds().clone();
        for _ in 0..100 {
            let x: Vec<f64> = (0..2)
                .map(|i| {
                    let [lo, hi] = bounds.axis(i);
                    let width = hi - lo;
                    rng.gen_range(lo + 0.05 * width..hi - 0.05 * width)
                })
                .collect();
            let exact = gradient(&triple, &x).unwrap();
            let approx = gradient_fd(&triple, &x).unwrap();
            for (k, (e, a)) in exact.iter().zip(&approx).enumerate() {
                let rel = (e - a).abs() / 1f64.max(e.abs());
                assert!(
                    rel <= 1e-5,
                    "{name}: component {k} at {x:?} differs, analytic {e} vs stencil {a} (rel {rel:.3e})"
                );
            }
        }
    }
    println!("criterion 9 ok: stencil gradients within 1e-5 of analytic on 200 interior points");
}
