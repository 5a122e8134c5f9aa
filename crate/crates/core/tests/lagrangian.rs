use mcft_core::exterior::{second_jet_symbol, partial_symbol, Chart, Form, VectorField};
use mcft_core::expr::{Expr, ProbeConfig, ZeroTest};
use mcft_core::lagrangian::{unknown_symbol, LagrangianSystem, Regularity};
use mcft_core::models::DampedString;

const T: usize = 0;
const X: usize = 1;
const Y: usize = 2;
const YT: usize = 3;
const YX: usize = 4;
const ST: usize = 5;
const SX: usize = 6;

fn d(c: &Chart, i: usize) -> Form {
    Form::d(c, i)
}

fn w(c: &Chart, idx: &[usize]) -> Form {
    idx.iter().skip(1).fold(d(c, idx[0]), |acc, &i| acc.wedge(&d(c, i)).unwrap())
}

struct Fixture {
    m: DampedString,
    sys: LagrangianSystem,
    rho: Expr,
    tau: Expr,
    gamma: Expr,
}

fn fixture() -> Fixture {
    let m = DampedString::new();
    let sys = m.system();
    Fixture {
        rho: Expr::sym(&m.rho),
        tau: Expr::sym(&m.tau),
        gamma: Expr::sym(&m.gamma),
        m,
        sys,
    }
}

#[test]
fn theta_l_matches_coordinate_display() {
    let f = fixture();
    let c = &f.m.chart;
    let (yt, yx, st) = (f.m.var("y_t"), f.m.var("y_x"), f.m.var("s_t"));
    let half = Expr::frac(1, 2);
    let energy = &half * &f.rho * &yt * &yt - &half * &f.tau * &yx * &yx + &f.gamma * &st;
    let expected = &(&(&(&w(c, &[Y, X]).scale(&-(&f.rho * &yt))
        - &w(c, &[Y, T]).scale(&(&f.tau * &yx)))
        + &w(c, &[T, X]).scale(&energy))
        + &w(c, &[ST, X]))
        - &w(c, &[SX, T]);
    assert_eq!(f.sys.theta(), &expected);
    assert_eq!(
        f.sys.theta().to_paper_string(),
        "-rho*y_t dy^dx - tau*y_x dy^dt + (rho*y_t^2/2 - tau*y_x^2/2 + gamma*s_t) dt^dx + ds_t^dx - ds_x^dt"
    );
}

#[test]
fn omega_is_base_volume() {
    let f = fixture();
    assert_eq!(f.sys.omega(), &w(&f.m.chart, &[T, X]));
}

#[test]
fn sigma_follows_the_coordinate_formula() {
    // sigma_L = -(dL/ds^mu) dx^mu = +gamma dt for L = ... - gamma s^t.
    let f = fixture();
    assert_eq!(f.sys.sigma(), &d(&f.m.chart, T).scale(&f.gamma));
    assert_ne!(f.sys.sigma(), &d(&f.m.chart, T).scale(&-f.gamma.clone()));
}

#[test]
fn energy_includes_tau() {
    let f = fixture();
    let (yt, yx, st) = (f.m.var("y_t"), f.m.var("y_x"), f.m.var("s_t"));
    let half = Expr::frac(1, 2);
    let expected = &half * &f.rho * &yt * &yt - &half * &f.tau * &yx * &yx + &f.gamma * &st;
    assert_eq!(f.sys.energy(), &expected);
}

#[test]
fn d_theta_and_bar_d_theta_displays() {
    let f = fixture();
    let c = &f.m.chart;
    let (yt, yx) = (f.m.var("y_t"), f.m.var("y_x"));
    let dtheta = &(&(&(&w(c, &[YT, Y, X]).scale(&-f.rho.clone())
        - &w(c, &[YX, Y, T]).scale(&f.tau))
        + &w(c, &[YT, T, X]).scale(&(&f.rho * &yt)))
        - &w(c, &[YX, T, X]).scale(&(&f.tau * &yx)))
        + &w(c, &[ST, T, X]).scale(&f.gamma);
    assert_eq!(f.sys.structure().d_theta(), dtheta);

    let bar = &(&(&(&w(c, &[T, X, Y]).scale(&(&f.gamma * &f.rho * &yt))
        - &w(c, &[YT, Y, X]).scale(&f.rho))
        - &w(c, &[YX, Y, T]).scale(&f.tau))
        + &w(c, &[YT, T, X]).scale(&(&f.rho * &yt)))
        - &w(c, &[YX, T, X]).scale(&(&f.tau * &yx));
    assert_eq!(f.sys.structure().bar_d_theta(), bar);

    let sigma_theta = &w(c, &[T, Y, X]).scale(&-(&f.gamma * &f.rho * &yt)) + &w(c, &[T, ST, X]).scale(&f.gamma);
    assert_eq!(f.sys.sigma().wedge(f.sys.theta()).unwrap(), sigma_theta);
}

#[test]
fn regularity_is_generic_with_determinant() {
    let f = fixture();
    assert_eq!(f.sys.regularity(), &Regularity::RegularGenerically(-(&f.rho * &f.tau)));
    let c = Chart::jet(&["t"], &["q"]).unwrap();
    let qt = c.var(c.index_of("q_t").unwrap());
    let free = LagrangianSystem::new(&c, &[], Expr::frac(1, 2) * &qt * &qt).unwrap();
    assert_eq!(free.regularity(), &Regularity::Regular);
    let q = c.var(c.index_of("q").unwrap());
    let singular = LagrangianSystem::new(&c, &[], &qt * &q).unwrap();
    assert_eq!(singular.regularity(), &Regularity::Singular);
    assert!(singular.solve_sopde_family().is_err());
}

#[test]
fn regularity_agrees_with_numeric_hessian() {
    let f = fixture();
    let h = f.sys.hessian();
    let b = mcft_core::Bindings64::new().with("rho", 1.3).with("tau", 0.7);
    let det = h[0][0].eval(&b).unwrap() * h[1][1].eval(&b).unwrap()
        - h[0][1].eval(&b).unwrap() * h[1][0].eval(&b).unwrap();
    assert!((det + 1.3 * 0.7).abs() < 1e-12);
}

#[test]
fn unknown_symbols_are_rejected() {
    let m = DampedString::new();
    let err = LagrangianSystem::new(&m.chart, &[], m.lagrangian()).unwrap_err();
    assert_eq!(err.to_string(), "unknown symbol `rho`");
}

#[test]
fn herglotz_residual_is_the_damped_string() {
    let f = fixture();
    let c = &f.m.chart;
    let r = f.sys.herglotz_el_residuals();
    let ytt = Expr::sym(&second_jet_symbol(c, 0, 0, 0));
    let yxx = Expr::sym(&second_jet_symbol(c, 0, 1, 1));
    let yt = f.m.var("y_t");
    assert_eq!(r.fields, vec![&f.rho * &ytt - &f.tau * &yxx + &f.gamma * &f.rho * &yt]);
    let action = Expr::sym(&partial_symbol(c, ST, 0)) + Expr::sym(&partial_symbol(c, SX, 1)) - f.m.lagrangian();
    assert_eq!(r.action, action);

    let undamped = f.m.undamped().herglotz_el_residuals();
    assert_eq!(undamped.fields, vec![&f.rho * &ytt - &f.tau * &yxx]);
}

#[test]
fn sopde_family_matches_solved_display() {
    let f = fixture();
    let c = &f.m.chart;
    let fam = f.sys.solve_sopde_family().unwrap();
    let u = |mu, i| Expr::sym(&unknown_symbol(c, mu, i));
    let x1 = VectorField::new(
        c,
        [
            (T, Expr::one()),
            (Y, f.m.var("y_t")),
            (YT, &f.tau / &f.rho * u(1, YX) - &f.gamma * &f.m.var("y_t")),
            (YX, u(0, YX)),
            (ST, f.m.lagrangian() - u(1, SX)),
            (SX, u(0, SX)),
        ],
    );
    let x2 = VectorField::new(
        c,
        [
            (X, Expr::one()),
            (Y, f.m.var("y_x")),
            (YT, u(1, YT)),
            (YX, u(1, YX)),
            (ST, u(1, ST)),
            (SX, u(1, SX)),
        ],
    );
    assert_eq!(fam.factors, vec![x1, x2]);
    let names: Vec<&str> = fam.free.iter().map(|s| s.name()).collect();
    assert_eq!(names, ["A5", "A7", "B4", "B5", "B6", "B7"]);
    let solved: Vec<&str> = fam.solved.iter().map(|s| s.0.name()).collect();
    assert_eq!(solved, ["A4", "A6"]);

    let x = fam.multivector();
    assert!(x.contract(f.sys.theta()).unwrap().is_structurally_zero());
    assert_eq!(x.contract(&f.sys.structure().bar_d_theta()).unwrap().is_zero(), ZeroTest::Zero);
    assert_eq!(x.contract(f.sys.omega()).unwrap().as_scalar(), Some(Expr::one()));
}

#[test]
fn sopde_family_for_mechanics() {
    // m = 1: contact Herglotz mechanics, q_tt = -k q - g q_t.
    let c = Chart::jet(&["t"], &["q"]).unwrap();
    let (q, qt, s) = (c.var(1), c.var(2), c.var(3));
    let l = Expr::frac(1, 2) * &qt * &qt - Expr::frac(1, 2) * &q * &q - Expr::int(3) * &s;
    let sys = LagrangianSystem::new(&c, &[], l.clone()).unwrap();
    let fam = sys.solve_sopde_family().unwrap();
    assert!(fam.free.is_empty());
    let f = &fam.factors[0];
    assert_eq!(f.component(2), -&q - Expr::int(3) * &qt);
    assert_eq!(f.component(3), l);
}

#[test]
fn sopde_family_rejects_three_bases() {
    let c = Chart::jet(&["t", "x", "z"], &["y"]).unwrap();
    let l = Expr::frac(1, 2) * c.var(c.index_of("y_t").unwrap()).pow(2).unwrap();
    let sys = LagrangianSystem::new(&c, &[], l).unwrap();
    assert!(sys.solve_sopde_family().is_err());
}

#[test]
fn sigma_property_for_reeb_candidates() {
    let f = fixture();
    let c = &f.m.chart;
    let cfg = ProbeConfig::default();
    let v = f.sys.verify_sigma_property(&VectorField::coordinate(c, ST), &cfg).unwrap();
    assert!(v.holds() && v.is_exact());
    let v = f.sys.verify_sigma_property(&VectorField::coordinate(c, Y), &cfg).unwrap();
    assert!(!v.holds());
    assert!(!v.witnesses.is_empty());
    let v = f.m.undamped().verify_sigma_property(&VectorField::coordinate(c, ST), &cfg).unwrap();
    assert!(v.holds());
}

#[test]
fn theta_is_variational() {
    let f = fixture();
    let c = &f.m.chart;
    let vertical = [Y, YT, YX, ST, SX];
    for &a in &vertical {
        for &b in &vertical {
            let ya = VectorField::coordinate(c, a);
            let yb = VectorField::coordinate(c, b);
            let r = yb.interior(&ya.interior(f.sys.theta()).unwrap()).unwrap();
            assert!(r.is_structurally_zero(), "{a} {b}");
        }
    }
}
