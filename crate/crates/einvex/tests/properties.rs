//! Property-based invariants. These complement the frozen-value tests: the
//! exact numbers live next to the modules, while the laws that must hold
//! for arbitrary inputs live here under proptest.

use proptest::prelude::*;

use einvex::{
    evaluate_sample, run_check, sublevel_set, BoxBounds, CheckKind, Expr, ProblemTriple,
    SamplingPlan, ScalarFn, SetSpec, Status, VectorFn,
};

fn scalar(src: &str, vars: &[&str]) -> ScalarFn {
    ScalarFn::from_expr(Expr::parse(src, vars).unwrap()).unwrap()
}

fn identity_triple(h: ScalarFn, lo: f64, hi: f64) -> ProblemTriple {
    let dim = h.arity();
    let psi_vars: Vec<String> = (1..=dim)
        .map(|i| format!("a{i}"))
        .chain((1..=dim).map(|i| format!("b{i}")))
        .collect();
    let psi_refs: Vec<&str> = psi_vars.iter().map(String::as_str).collect();
    let body = if dim == 1 {
        "a1 - b1".to_string()
    } else {
        let comps: Vec<String> = (1..=dim).map(|i| format!("a{i} - b{i}")).collect();
        format!("[{}]", comps.join(", "))
    };
    let psi = VectorFn::from_expr(Expr::parse(&body, &psi_refs).unwrap());
    ProblemTriple::new(
        h,
        VectorFn::identity(dim),
        psi,
        SetSpec::window(BoxBounds::cube(dim, lo, hi).unwrap()),
    )
    .unwrap()
}

/// A small recursive grammar of expression sources over one variable.
fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (-4i32..=4).prop_map(|k| k.to_string()),
        (-20i32..=20).prop_map(|k| format!("{:.2}", k as f64 / 8.0)),
        Just("s".to_string()),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) / ({b})")),
            (inner.clone(), 2u32..=3).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("abs({a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("min({a}, {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("max({a}, {b})")),
            (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(c, a, b)| format!("if ({c}) > 0 then ({a}) else ({b})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    /// Printing an expression and parsing it back must not change what it
    /// computes, including where it fails (division by zero).
    #[test]
    fn display_round_trips_through_the_parser(src in expr_source(), xs in prop::collection::vec(-3.0f64..3.0, 5)) {
        let parsed = Expr::parse(&src, &["s"]).unwrap();
        let printed = parsed.to_string();
        let reparsed = Expr::parse(&printed, &["s"])
            .unwrap_or_else(|e| panic!("display `{printed}` failed to reparse: {e}"));
        for &x in &xs {
            let a = parsed.eval(&[x]);
            let b = reparsed.eval(&[x]);
            match (a, b) {
                (Ok(u), Ok(v)) => prop_assert_eq!(u, v, "value changed at {}", x),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "outcome changed at {}: {:?} vs {:?}", x, a, b),
            }
        }
    }

    /// Growing the level can only grow the sublevel set.
    #[test]
    fn sublevel_sets_are_monotone_in_the_level(
        c2 in -2.0f64..2.0,
        c1 in -2.0f64..2.0,
        c0 in -2.0f64..2.0,
        r1 in -3.0f64..3.0,
        gap in 0.0f64..3.0,
        x in -2.0f64..2.0,
    ) {
        let h = scalar(&format!("{c2} * s^2 + {c1} * s + {c0}"), &["s"]);
        let universe = SetSpec::window(BoxBounds::cube(1, -2.0, 2.0).unwrap());
        let small = sublevel_set(&h, r1, &universe).unwrap();
        let large = sublevel_set(&h, r1 + gap, &universe).unwrap();
        if small.is_member(&[x]).unwrap() {
            prop_assert!(
                large.is_member(&[x]).unwrap(),
                "x={} is in the level-{} set but not the level-{} set",
                x, r1, r1 + gap
            );
        }
    }

    /// Every witness a scan reports must reproduce its margin when the
    /// sample is re-evaluated directly.
    #[test]
    fn reported_witnesses_reproduce_their_margins(
        c3 in -2.0f64..2.0,
        c1 in -2.0f64..2.0,
        seed in 0u64..1000,
    ) {
        let h = scalar(&format!("{c3} * s^3 + {c1} * s"), &["s"]);
        let triple = identity_triple(h, -1.0, 1.0);
        let plan = SamplingPlan::default()
            .with_seed(seed)
            .with_grid(5)
            .with_random_pairs(20);
        for kind in [CheckKind::Sep, CheckKind::Qsep, CheckKind::EPrequasiInvex] {
            let report = run_check(kind, &triple, &plan).unwrap();
            if let Some(w) = &report.witness {
                prop_assert_eq!(report.status, Status::Refuted);
                let again = evaluate_sample(kind, &triple, &w.s, &w.t, w.alpha, w.lambda).unwrap();
                let rel = (again.margin - w.margin).abs() / 1f64.max(w.margin.abs());
                prop_assert!(rel <= 1e-12, "margin drifted: {} vs {}", again.margin, w.margin);
                prop_assert!(again.violated);
            }
        }
    }

    /// The quasi bound dominates the convexity-style bound on every sample:
    /// max{h(A), h(B)} is at least the lambda average, with the same left
    /// side. So refuting qsep at a sample always refutes sep there too.
    #[test]
    fn qsep_right_side_dominates_sep_right_side(
        c3 in -2.0f64..2.0,
        c2 in -2.0f64..2.0,
        s in -1.0f64..1.0,
        t in -1.0f64..1.0,
        alpha in 0.0f64..1.0,
        lambda in 0.0f64..1.0,
    ) {
        let h = scalar(&format!("{c3} * s^3 + {c2} * s^2"), &["s"]);
        let triple = identity_triple(h, -1.0, 1.0);
        let sep = evaluate_sample(CheckKind::Sep, &triple, &[s], &[t], alpha, lambda).unwrap();
        let qsep = evaluate_sample(CheckKind::Qsep, &triple, &[s], &[t], alpha, lambda).unwrap();
        prop_assert_eq!(sep.lhs, qsep.lhs, "both properties bound the same combination value");
        prop_assert!(
            qsep.rhs >= sep.rhs - 1e-12 * 1f64.max(sep.rhs.abs()),
            "max bound {} fell below the average bound {}",
            qsep.rhs, sep.rhs
        );
        if qsep.violated {
            prop_assert!(sep.violated, "a qsep violation must also violate sep");
        }
    }

    /// Pinning alpha to zero turns the shifted quasi property into the
    /// plain one, sample by sample and bit for bit.
    #[test]
    fn alpha_zero_reduces_qsep_to_the_plain_quasi_property(
        c3 in -2.0f64..2.0,
        c1 in -2.0f64..2.0,
        s in -1.0f64..1.0,
        t in -1.0f64..1.0,
        lambda in 0.0f64..1.0,
    ) {
        let h = scalar(&format!("{c3} * s^3 + {c1} * s"), &["s"]);
        let triple = identity_triple(h, -1.0, 1.0);
        let shifted = evaluate_sample(CheckKind::Qsep, &triple, &[s], &[t], 0.0, lambda).unwrap();
        let plain =
            evaluate_sample(CheckKind::EPrequasiInvex, &triple, &[s], &[t], 0.0, lambda).unwrap();
        prop_assert_eq!(shifted.lhs, plain.lhs);
        prop_assert_eq!(shifted.rhs, plain.rhs);
        prop_assert_eq!(shifted.margin, plain.margin);
        prop_assert_eq!(shifted.violated, plain.violated);
    }
}
