use proptest::prelude::*;
use umbilic_core::chart::ChartBox;
use umbilic_core::expr::Expression;
use umbilic_core::par::Execution;
use umbilic_core::quadrature::integrate;

/// Smooth expressions in `x1..x3` that stay moderate on `[-1, 1]^3`.
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (1usize..=3).prop_map(|i| format!("x{i}")),
        (-2.0f64..2.0).prop_map(|c| format!("({c:.4})")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(2 + sin({b}))")),
            (inner.clone(), 2i32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("atan({a})")),
            inner.clone().prop_map(|a| format!("tanh({a})")),
            inner.clone().prop_map(|a| format!("exp(0.5*sin({a}))")),
            inner.prop_map(|a| format!("sqrt(1 + ({a})^2)")),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences(text in smooth_expr(), p in point()) {
        let e = Expression::parse(&text, 3).unwrap();
        let jet = e.eval_jet(&p, 1).unwrap();
        let h = 1e-5;
        for (k, ad) in jet.gradient().into_iter().enumerate() {
            let (mut a, mut b) = (p.clone(), p.clone());
            a[k] += h;
            b[k] -= h;
            let fd = (e.eval(&a).unwrap() - e.eval(&b).unwrap()) / (2.0 * h);
            prop_assert!((ad - fd).abs() <= 1e-6 * (1.0 + ad.abs()), "{text} d/dx{}: {ad} vs {fd}", k + 1);
        }
    }

    #[test]
    fn mixed_partials_are_symmetric(text in smooth_expr(), p in point()) {
        let e = Expression::parse(&text, 3).unwrap();
        let hess = e.eval_jet(&p, 2).unwrap().hessian();
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = (hess[i][j], hess[j][i]);
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_then_parsing_preserves_values(text in smooth_expr(), pts in prop::collection::vec(point(), 50)) {
        let e = Expression::parse(&text, 3).unwrap();
        let printed = e.to_string();
        let back = Expression::parse(&printed, 3).unwrap();
        for p in &pts {
            let (a, b) = (e.eval(p).unwrap(), back.eval(p).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{text} printed as {printed}");
        }
    }

    #[test]
    fn doubling_the_order_shrinks_the_error_estimate(a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..3.0) {
        let chart = ChartBox::new(vec![(0.0, 1.0), (-1.0, 1.0)]).unwrap();
        let f = |p: &[f64]| Ok((a * p[0] + b * p[1]).exp() * (c * p[0]).cos());
        let coarse = integrate(&f, &chart, 4, Execution::Sequential).unwrap();
        let fine = integrate(&f, &chart, 8, Execution::Sequential).unwrap();
        prop_assert!(fine.error * 10.0 <= coarse.error, "{:e} then {:e}", coarse.error, fine.error);
        prop_assert!((fine.value - coarse.value).abs() <= coarse.error * 1.01 + 1e-15);
    }
}
