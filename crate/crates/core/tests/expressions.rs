use proptest::prelude::*;
use spikeloc::exprfield::{parse, ExprError};
use spikeloc::model::*;

/// Smooth expressions in `x1, x2` that never leave their domain.
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x1".to_string()),
        Just("x2".to_string()),
        (-3.0f64..3.0).prop_map(|c| format!("{c:.3}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (1 + ({b})^2))")),
            inner.clone().prop_map(|a| format!("exp(-({a})^2)")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("tanh({a})")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.prop_map(|a| format!("log(2 + sin({a}))")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gradient_matches_central_differences(text in smooth_expr(), x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let e = parse(&text, 2).unwrap();
        let (value, grad) = e.eval_with_grad(&[x, y]).unwrap();
        prop_assert!(value.is_finite());
        prop_assert!((e.eval(&[x, y]).unwrap() - value).abs() <= 1e-14 * (1.0 + value.abs()));
        prop_assert!(!grad.nonsmooth);
        let h = 1e-6;
        for i in 0..2 {
            let mut a = [x, y];
            let mut b = [x, y];
            a[i] += h;
            b[i] -= h;
            let fd = (e.eval(&a).unwrap() - e.eval(&b).unwrap()) / (2.0 * h);
            let scale = 1.0 + fd.abs() + grad.values[i].abs();
            prop_assert!((fd - grad.values[i]).abs() <= 1e-5 * scale, "{}: {} vs {}", text, fd, grad.values[i]);
        }
    }

    #[test]
    fn printing_is_a_parse_fixed_point(text in smooth_expr(), x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let e = parse(&text, 2).unwrap();
        let printed = e.to_string();
        let again = parse(&printed, 2).unwrap();
        prop_assert_eq!(again.to_string(), printed);
        prop_assert_eq!(again.eval(&[x, y]).unwrap(), e.eval(&[x, y]).unwrap());
    }

    #[test]
    fn validity_is_the_sign_of_the_margin(n in 1usize..=3, p in 1.01f64..12.0, q in 1.01f64..12.0) {
        let nf = n as f64;
        let margin = 1.0 / (p + 1.0) + 1.0 / (q + 1.0) - (nf - 2.0) / nf;
        match validate_params(n, p, q) {
            Ok(pr) => {
                prop_assert!(margin > -1e-12);
                prop_assert!((pr.margin() - margin).abs() <= 1e-12);
                prop_assert_eq!(pr.swapped().swapped(), pr);
                prop_assert!((pr.swapped().theta_k() - pr.theta_q()).abs() <= 1e-12);
            }
            Err(ModelError::SupercriticalPair { .. }) => prop_assert!(margin < 1e-12),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn energy_exponents_balance(p in 1.1f64..8.0, q in 1.1f64..8.0) {
        // θV = θK + θQ + 1 - n/2 when d = pq - 1 is shared
        let pr = validate_params(1, p, q).unwrap();
        let lhs = pr.theta_v();
        let rhs = (p + 1.0) * (q + 1.0) / (p * q - 1.0) - 0.5;
        prop_assert!((lhs - rhs).abs() <= 1e-12);
        prop_assert!((pr.theta_k() + pr.theta_q() + 1.0 - 0.5 - lhs).abs() <= 1e-12);
    }

    #[test]
    fn lattice_stays_in_box(lo in -5.0f64..0.0, width in 0.1f64..5.0, per_axis in 2usize..9) {
        let b = SearchBox::new(vec![lo, lo], vec![lo + width, lo + width]);
        let pts = b.lattice(per_axis);
        prop_assert_eq!(pts.len(), per_axis * per_axis);
        prop_assert!(pts.iter().all(|z| b.contains(z)));
    }
}

#[test]
fn documented_parse_examples() {
    assert_eq!(parse("1+0.5*exp(-x1^2)", 1).unwrap().eval(&[0.0]).unwrap(), 1.5);
    assert_eq!(parse("x1*x2", 2).unwrap().eval(&[2.0, 3.0]).unwrap(), 6.0);
    assert!(matches!(parse("x3", 2), Err(ExprError::VariableOutOfRange { .. })));
    assert_eq!(parse("exp(0)", 1).unwrap().eval(&[0.0]).unwrap(), 1.0);
    assert!(matches!(parse("sqrt(-1)", 1).unwrap().eval(&[0.0]), Err(ExprError::EvalDomain(_))));
    let bump = parse("1+0.5*exp(-x1^2)", 1).unwrap();
    assert!((bump.eval(&[1.0]).unwrap() - 1.1839397).abs() < 1e-7);
    assert_eq!(bump.grad(&[0.0]).unwrap().values[0], 0.0);
    assert!((bump.grad(&[1.0]).unwrap().values[0] + 0.3678794).abs() < 1e-7);
    assert_eq!(parse("x1*x2", 2).unwrap().grad(&[2.0, 3.0]).unwrap().values, vec![3.0, 2.0]);
}

#[test]
fn documented_bounds_examples() {
    let region = SearchBox::cube(1, 5.0);
    let unit = check_potential_bounds(&PotentialTriple::unit(1), &region, 1001).unwrap();
    assert_eq!((unit.alpha_hat, unit.beta_hat), (1.0, 1.0));
    let bump = PotentialTriple::parse("1+0.5*exp(-x1^2)", "1", None, 1).unwrap();
    let b = check_potential_bounds(&bump, &region, 1001).unwrap();
    assert!((b.alpha_hat - 1.0).abs() < 1e-10);
    assert!((b.beta_hat - 1.5).abs() < 1e-12);
    let vanishing = PotentialTriple::parse("x1", "1", None, 1).unwrap();
    assert!(matches!(
        check_potential_bounds(&vanishing, &SearchBox::cube(1, 1.0), 1001),
        Err(ModelError::NonpositivePotential { .. })
    ));
}

#[test]
fn documented_hyperbola_examples() {
    let pr = validate_params(3, 3.0, 3.0).unwrap();
    assert!((pr.margin() - 1.0 / 6.0).abs() < 1e-15);
    assert!(validate_params(1, 2.0, 5.0).unwrap().margin() > 1.0);
    assert!(matches!(validate_params(3, 5.0, 5.0), Err(ModelError::SupercriticalPair { .. })));
}
