use mcft_core::exterior::{partial_symbol, Chart, Form};
use mcft_core::expr::{Expr, ZeroTest};
use mcft_core::hamiltonian::{legendre, HamiltonianError, HamiltonianSystem};
use mcft_core::lagrangian::LagrangianSystem;
use mcft_core::models::DampedString;

struct Fx {
    m: DampedString,
    rho: Expr,
    tau: Expr,
    gamma: Expr,
}

fn fx() -> Fx {
    let m = DampedString::new();
    Fx { rho: Expr::sym(&m.rho), tau: Expr::sym(&m.tau), gamma: Expr::sym(&m.gamma), m }
}

fn ham_var(h: &HamiltonianSystem, name: &str) -> Expr {
    h.chart().var(h.chart().index_of(name).unwrap())
}

#[test]
fn legendre_map_of_the_string() {
    let f = fx();
    let (lg, _) = legendre(&f.m.system()).unwrap();
    let fw: Vec<(String, Expr)> = lg.forward().iter().map(|(s, e)| (s.name().to_string(), e.clone())).collect();
    assert_eq!(
        fw,
        vec![
            ("p_t".to_string(), &f.rho * &f.m.var("y_t")),
            ("p_x".to_string(), -(&f.tau * &f.m.var("y_x"))),
        ]
    );
}

#[test]
fn hamiltonian_of_the_string() {
    let f = fx();
    let (_, h) = legendre(&f.m.system()).unwrap();
    let (pt, px, st) = (ham_var(&h, "p_t"), ham_var(&h, "p_x"), ham_var(&h, "s_t"));
    let expected = &pt * &pt / (Expr::int(2) * &f.rho) - &px * &px / (Expr::int(2) * &f.tau) + &f.gamma * &st;
    assert_eq!(h.hamiltonian(), &expected);
    assert_eq!(h.hamiltonian().to_string(), "p_t^2/(2*rho) - p_x^2/(2*tau) + gamma*s_t");
    assert_eq!(h.sigma(), &Form::d(h.chart(), 0).scale(&f.gamma));
}

#[test]
fn free_particle_hamiltonian() {
    let c = Chart::jet(&["t"], &["q"]).unwrap();
    let qt = c.var(2);
    let sys = LagrangianSystem::new(&c, &[], Expr::frac(1, 2) * &qt * &qt).unwrap();
    let (_, h) = legendre(&sys).unwrap();
    let p = ham_var(&h, "p_t");
    assert_eq!(h.hamiltonian(), &(Expr::frac(1, 2) * &p * &p));
    assert!(h.sigma().is_structurally_zero());
}

#[test]
fn legendre_rejects_singular_and_nonlinear() {
    let c = Chart::jet(&["t"], &["q"]).unwrap();
    let (q, qt) = (c.var(1), c.var(2));
    let singular = LagrangianSystem::new(&c, &[], &q * &qt).unwrap();
    assert_eq!(legendre(&singular).unwrap_err(), HamiltonianError::Singular);
    let quartic = LagrangianSystem::new(&c, &[], qt.pow(4).unwrap() + &qt * &qt).unwrap();
    assert!(matches!(legendre(&quartic), Err(HamiltonianError::NonInvertible(_))));
}

#[test]
fn legendre_round_trip() {
    let f = fx();
    let (lg, h) = legendre(&f.m.system()).unwrap();
    for name in ["y_t", "y_x"] {
        let v = f.m.var(name);
        assert_eq!(lg.to_velocities(&lg.to_momenta(&v).unwrap()).unwrap(), v);
    }
    for name in ["p_t", "p_x"] {
        let p = ham_var(&h, name);
        assert_eq!(lg.to_momenta(&lg.to_velocities(&p).unwrap()).unwrap(), p);
    }
}

#[test]
fn theta_h_display_and_pullback() {
    let f = fx();
    let sys = f.m.system();
    let (lg, h) = legendre(&sys).unwrap();
    assert_eq!(
        h.theta().to_paper_string(),
        "-p_t dy^dx + p_x dy^dt + (p_t^2/(2*rho) - p_x^2/(2*tau) + gamma*s_t) dt^dx + ds_t^dx - ds_x^dt"
    );
    assert_eq!(lg.pullback(h.theta()).unwrap(), *sys.theta());
    assert_eq!(lg.pullback(h.sigma()).unwrap(), *sys.sigma());
    assert_eq!(lg.pullback(h.omega()).unwrap(), *sys.omega());

    // H with -gamma*s_t does not pull back to Theta_L.
    let flipped = h.hamiltonian() - Expr::int(2) * &f.gamma * ham_var(&h, "s_t");
    let wrong = HamiltonianSystem::new(h.chart(), h.params(), flipped).unwrap();
    assert_ne!(lg.pullback(wrong.theta()).unwrap(), *sys.theta());
}

#[test]
fn hdw_multivector_shape_and_equations() {
    let f = fx();
    let (_, h) = legendre(&f.m.system()).unwrap();
    let c = h.chart();
    let (x, free) = h.hdw_multivector();
    let fs = x.factors().unwrap();
    let (pt, px, st) = (ham_var(&h, "p_t"), ham_var(&h, "p_x"), ham_var(&h, "s_t"));
    let (iy, ipt, ipx, ist, isx) = (2, 3, 4, 5, 6);
    assert_eq!(c.name(ipt), "p_t");
    assert_eq!(fs[0].component(iy), &pt / &f.rho);
    assert_eq!(fs[1].component(iy), -(&px / &f.tau));
    let momentum_trace = fs[0].component(ipt) + fs[1].component(ipx);
    assert_eq!(momentum_trace, -(&f.gamma * &pt));
    let s_trace = fs[0].component(ist) + fs[1].component(isx);
    let expected = &pt * &pt / (Expr::int(2) * &f.rho) - &px * &px / (Expr::int(2) * &f.tau) - &f.gamma * &st;
    assert_eq!(s_trace, expected);
    assert_eq!(free.len(), 6);

    assert!(x.contract(h.theta()).unwrap().is_structurally_zero());
    assert_eq!(x.contract(&h.structure().bar_d_theta()).unwrap().is_zero(), ZeroTest::Zero);
    assert_eq!(x.contract(h.omega()).unwrap().as_scalar(), Some(Expr::one()));
}

#[test]
fn hdw_residuals_of_the_string() {
    let f = fx();
    let (lg, h) = legendre(&f.m.system()).unwrap();
    let c = h.chart();
    let r = h.hdw_residuals();
    let pt = ham_var(&h, "p_t");
    let d = |i, mu| Expr::sym(&partial_symbol(c, i, mu));
    assert_eq!(r.velocity[0], d(2, 0) - &pt / &f.rho);
    assert_eq!(r.momentum[0], d(3, 0) + d(4, 1) + &f.gamma * &pt);

    // Equivalence with the Lagrangian side for holonomic sections.
    let lag = f.m.system().herglotz_el_residuals();
    assert_eq!(lg.eliminate_momenta(&r.momentum[0]).unwrap(), lag.fields[0]);
    assert_eq!(lg.eliminate_momenta(&r.action).unwrap(), lag.action);
    for v in &r.velocity {
        assert!(lg.eliminate_momenta(v).unwrap().is_structurally_zero());
    }
}

#[test]
fn hdw_without_action_dependence() {
    let f = fx();
    let (_, h) = legendre(&f.m.undamped()).unwrap();
    let c = h.chart();
    let r = h.hdw_residuals();
    let d = |i, mu| Expr::sym(&partial_symbol(c, i, mu));
    assert_eq!(r.momentum[0], d(3, 0) + d(4, 1));
    assert!(h.sigma().is_structurally_zero());
}
