use super::*;
use proptest::prelude::*;

fn s(name: &str) -> Symbol {
    match ["rho", "tau", "gamma"].iter().position(|p| *p == name) {
        Some(i) => Symbol::param(i as u32, name),
        None => Symbol::generic(name),
    }
}

fn e(name: &str) -> Expr {
    Expr::sym(&s(name))
}

fn lagrangian() -> Expr {
    let (rho, tau, gamma) = (e("rho"), e("tau"), e("gamma"));
    let half = Expr::frac(1, 2);
    &half * &rho * e("y_t").pow(2).unwrap() - &half * &tau * e("y_x").pow(2).unwrap()
        - gamma * e("s_t")
}

#[test]
fn diff_of_string_lagrangian_in_velocity() {
    assert_eq!(lagrangian().diff(&s("y_t")), e("rho") * e("y_t"));
}

#[test]
fn diff_of_constant_and_product() {
    assert_eq!(Expr::int(7).diff(&s("x")), Expr::zero());
    assert_eq!((e("y") * e("y_x")).diff(&s("y_x")), e("y"));
}

#[test]
fn substitute_velocity_by_momentum() {
    let m: SubstMap = [(s("y_t"), &e("p_t") / &e("rho"))].into_iter().collect();
    let got = e("y_t").pow(2).unwrap().substitute(&m).unwrap();
    let want = e("p_t").pow(2).unwrap() * e("rho").pow(-2).unwrap();
    assert_eq!(got, want);
    assert_eq!(got.to_string(), "p_t^2/rho^2");
}

#[test]
fn substitution_is_simultaneous() {
    let m: SubstMap = [(s("x"), e("y")), (s("y"), e("x"))].into_iter().collect();
    let x_plus_y = e("x") + e("y");
    assert_eq!(x_plus_y.substitute(&m).unwrap(), x_plus_y);
    assert_eq!(x_plus_y.substitute(&SubstMap::new()).unwrap(), x_plus_y);
}

#[test]
fn eval_examples() {
    let b = Bindings::new().with("rho", 2.0).with("y_t", 3.0);
    assert_eq!((e("rho") * e("y_t")).eval(&b).unwrap(), 6.0);
    assert_eq!((Expr::zero() * e("x")).eval(&Bindings::<f64>::new()).unwrap(), 0.0);

    // E_L = (dL/dy_t) y_t + (dL/dy_x) y_x - L
    let l = lagrangian();
    let el = l.diff(&s("y_t")) * e("y_t") + l.diff(&s("y_x")) * e("y_x") - &l;
    let b = Bindings::new()
        .with("rho", 1.0)
        .with("tau", 1.0)
        .with("gamma", 0.1)
        .with("y_t", 1.0)
        .with("y_x", 0.0)
        .with("s_t", 2.0);
    let v: f64 = el.eval(&b).unwrap();
    assert!((v - 0.7).abs() < 1e-15);
}

#[test]
fn eval_errors() {
    assert!(matches!(
        e("x").eval(&Bindings::<f64>::new()),
        Err(EvalError::Unbound(_))
    ));
    let inv = e("x").recip().unwrap();
    assert!(matches!(
        inv.eval(&Bindings::new().with("x", 0.0)),
        Err(EvalError::Domain(_))
    ));
}

#[test]
fn zero_tests() {
    assert_eq!((e("x") * e("y") - e("y") * e("x")).is_zero(), ZeroTest::Zero);
    let x = e("x");
    let pythag = x.sin().pow(2).unwrap() + x.cos().pow(2).unwrap() - Expr::one();
    assert_eq!(pythag.is_zero(), ZeroTest::ProbablyZero);
    assert_eq!(e("x").is_zero(), ZeroTest::NonZero);
    assert_eq!((x.sin() - x.cos()).is_zero(), ZeroTest::NonZero);
}

#[test]
fn rational_functions_decide_exactly() {
    // 1/(a+b) + 1/(a-b) - 2a/(a^2-b^2) is zero but not structurally so
    let (a, b) = (e("a"), e("b"));
    let lhs = (&a + &b).recip().unwrap() + (&a - &b).recip().unwrap();
    let rhs = (Expr::int(2) * &a)
        .checked_div(&(a.pow(2).unwrap() - b.pow(2).unwrap()))
        .unwrap();
    let d = &lhs - &rhs;
    assert!(!d.is_structurally_zero());
    assert_eq!(d.is_zero(), ZeroTest::Zero);
    assert_eq!((&lhs - &a).is_zero(), ZeroTest::NonZero);
}

#[test]
fn recip_of_sum_is_normalized() {
    let (a, b) = (e("a"), e("b"));
    let g1 = (Expr::int(2) * &a + Expr::int(2) * &b).recip().unwrap();
    let g2 = (&a + &b).recip().unwrap();
    assert_eq!(g1, Expr::frac(1, 2) * &g2);
    assert_eq!(g2.recip().unwrap(), &a + &b);
    assert_eq!((&g2 * (&a + &b) - Expr::one()).is_zero(), ZeroTest::Zero);
}

#[test]
fn display_forms() {
    assert_eq!(lagrangian().to_string(), "rho*y_t^2/2 - tau*y_x^2/2 - gamma*s_t");
    let h = e("p_t").pow(2).unwrap() / (Expr::int(2) * e("rho"));
    assert_eq!(h.to_string(), "p_t^2/(2*rho)");
    assert_eq!(Expr::zero().to_string(), "0");
    assert_eq!(Expr::frac(-3, 4).to_string(), "-3/4");
    assert_eq!((e("a") + e("b")).recip().unwrap().to_string(), "1/(a + b)");
}

#[test]
fn compiled_matches_eval() {
    let l = lagrangian();
    let slots = [s("rho"), s("tau"), s("gamma"), s("y_t"), s("y_x"), s("s_t")];
    let c = l.compile::<f64>(&slots).unwrap();
    let vals = [1.5, 0.5, 0.1, 0.3, -0.2, 2.0];
    let b: Bindings<f64> = slots.iter().map(|x| x.name().to_string()).zip(vals).collect();
    assert!((c.eval(&vals) - l.eval(&b).unwrap()).abs() < 1e-15);
}

// random expressions over three symbols with small integer coefficients
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        Just(e("a")),
        Just(e("b")),
        Just(e("c")),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x + y),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x * y),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x - y),
            inner.clone().prop_map(|x| x.sin()),
            inner.clone().prop_map(|x| x.exp()),
            (inner.clone(), 0i32..3).prop_map(|(x, k)| x.pow(k).unwrap()),
            inner.prop_map(|x| {
                let d = &x * &x + Expr::one();
                Expr::one().checked_div(&d).unwrap()
            }),
        ]
    })
}

fn bindings(v: [f64; 3]) -> Bindings<f64> {
    Bindings::new().with("a", v[0]).with("b", v[1]).with("c", v[2])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_idempotent(x in arb_expr()) {
        prop_assert_eq!(x.substitute(&SubstMap::new()).unwrap(), x.clone());
        prop_assert_eq!(&x + &Expr::zero(), x.clone());
        prop_assert_eq!(&x * &Expr::one(), x);
    }

    #[test]
    fn leibniz_rule(x in arb_expr(), y in arb_expr()) {
        let v = s("a");
        let lhs = (&x * &y).diff(&v);
        let rhs = x.diff(&v) * &y + &x * y.diff(&v);
        prop_assert!((lhs - rhs).is_zero().holds());
    }

    #[test]
    fn diff_is_linear(x in arb_expr(), y in arb_expr()) {
        let v = s("b");
        let lhs = (Expr::int(3) * &x - &y).diff(&v);
        let rhs = Expr::int(3) * x.diff(&v) - y.diff(&v);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn diff_matches_finite_differences(
        x in arb_expr(),
        p in prop::array::uniform3(-1.5f64..1.5),
    ) {
        let v = s("a");
        let h = 1e-5;
        let d = x.diff(&v);
        let mut lo = p; lo[0] -= h;
        let mut hi = p; hi[0] += h;
        if let (Ok(fd), Ok(f0), Ok(f1)) = (d.eval(&bindings(p)), x.eval(&bindings(lo)), x.eval(&bindings(hi))) {
            let fdiff = (f1 - f0) / (2.0 * h);
            if fd.is_finite() && fdiff.is_finite() && fd.abs() < 1e6 {
                prop_assert!((fd - fdiff).abs() <= 1e-6 * fd.abs().max(1.0) + 1e-5 * fd.abs().max(1.0),
                    "{} vs {}", fd, fdiff);
            }
        }
    }

    #[test]
    fn substitute_commutes_with_eval(
        x in arb_expr(),
        ra in arb_expr(),
        p in prop::array::uniform3(-1.5f64..1.5),
    ) {
        // a -> ra, evaluated at b, c
        let m: SubstMap = [(s("a"), ra.clone())].into_iter().collect();
        let b = bindings(p);
        if let Ok(av) = ra.eval(&b) {
            let b2 = bindings([av, p[1], p[2]]);
            if let (Ok(sub), Ok(lhs_direct)) = (x.substitute(&m), x.eval(&b2)) {
                if let Ok(lhs) = sub.eval(&b) {
                    let scale = lhs.abs().max(1.0);
                    prop_assert!((lhs - lhs_direct).abs() <= 1e-9 * scale, "{} vs {}", lhs, lhs_direct);
                }
            }
        }
    }
}
