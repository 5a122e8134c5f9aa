use std::fmt::Write as _;

use serde_json::{json, Value};

use mcft_core::dsl::{Candidate, Scenario};
use mcft_core::exterior::{Form, VectorField};
use mcft_core::expr::Expr;
use mcft_core::hamiltonian::{legendre, HamiltonianError};
use mcft_core::lagrangian::{LagrangianError, LagrangianSystem, Regularity};
use mcft_core::numeric::{
    convergence_study, damped_wave_params, integrate_damped_wave, relative_drift, staggered_energy,
    staggered_momentum, write_csv, Boundary, Convergence, Grid1p1, NumericError, Summary, WaveParams,
};
use mcft_core::symmetry::{
    classify, current_components, divergence, jet_lift, noether_current, verify_noether, NoetherError,
};
use mcft_core::verdict::Verdict;
use mcft_core::Bindings64;

use crate::{exit, Command, Context, Failure, Outcome};

/// Acceptance thresholds of `verify-law`.
pub const RATIO_RANGE: (f64, f64) = (3.2, 4.8);
pub const DECAY_TOL: f64 = 1e-3;
pub const DRIFT_TOL: f64 = 1e-6;

pub(crate) fn dispatch(cmd: &Command, ctx: &Context<'_>) -> Result<Outcome, Failure> {
    match cmd {
        Command::Derive { hamiltonian, .. } => derive(ctx, *hamiltonian),
        Command::CheckSymmetry { name, .. } => check_symmetry(ctx, name),
        Command::Current { name, .. } => current(ctx, name),
        Command::Sopde { .. } => sopde(ctx),
        Command::VerifyLaw { name, scenario, .. } => verify_law(ctx, name, scenario),
        Command::Simulate { scenario, nx, out, .. } => simulate(ctx, scenario, *nx, out.as_deref()),
    }
}

fn form(f: &Form) -> Value {
    json!({ "paper": f.to_paper_string(), "terms": f.to_json() })
}

fn lagrangian_failure(e: LagrangianError) -> Failure {
    match e {
        LagrangianError::Singular | LagrangianError::UnsupportedDimension(_) => Failure::refused(e.to_string()),
        other => Failure::input(other.to_string()),
    }
}

fn system(ctx: &Context<'_>) -> Result<LagrangianSystem, Failure> {
    ctx.model.system().map_err(lagrangian_failure)
}

fn candidate<'a>(ctx: &'a Context<'_>, name: &str) -> Result<&'a Candidate, Failure> {
    ctx.model.candidate(name).ok_or_else(|| {
        let known: Vec<&str> = ctx.model.symmetries.iter().map(|c| c.name.as_str()).collect();
        Failure::input(format!("no symmetry named `{name}` (declared: {})", known.join(", ")))
    })
}

fn lifted(ctx: &Context<'_>, sys: &LagrangianSystem, name: &str) -> Result<VectorField, Failure> {
    let c = candidate(ctx, name)?;
    jet_lift(&c.field, sys.chart(), ctx.global.paper_sign).map_err(|e| Failure::input(e.to_string()))
}

fn verdict_line(label: &str, v: &Verdict) -> String {
    let mut s = format!("{label}: {}", if v.holds() { "holds" } else { "fails" });
    if v.holds() {
        s.push_str(if v.is_exact() { " (exact)" } else { " (probably zero)" });
    }
    for w in &v.witnesses {
        write!(s, "\n  witness {}: {}", w.basis, w.coefficient).unwrap();
    }
    s
}

fn regularity(r: &Regularity) -> Value {
    match r {
        Regularity::Regular => json!({ "kind": "regular" }),
        Regularity::RegularGenerically(det) => json!({ "kind": "regular-generically", "determinant": det.to_string() }),
        Regularity::Singular => json!({ "kind": "singular" }),
    }
}

fn derive(ctx: &Context<'_>, hamiltonian: bool) -> Result<Outcome, Failure> {
    let sys = system(ctx)?;
    let s = sys.structure();
    let chart = sys.chart();
    let sigma_theta = s.sigma.wedge(&s.theta).map_err(|e| Failure::input(e.to_string()))?;
    let el = sys.herglotz_el_residuals();
    let mut t = String::new();
    writeln!(t, "L = {}", sys.lagrangian()).unwrap();
    writeln!(t, "Theta_L = {}", s.theta.to_paper_string()).unwrap();
    writeln!(t, "omega = {}", s.omega.to_paper_string()).unwrap();
    writeln!(t, "sigma_L = {}", s.sigma.to_paper_string()).unwrap();
    writeln!(t, "E_L = {}", sys.energy()).unwrap();
    writeln!(t, "dTheta_L = {}", s.d_theta().to_paper_string()).unwrap();
    writeln!(t, "sigma_L^Theta_L = {}", sigma_theta.to_paper_string()).unwrap();
    writeln!(t, "dbar Theta_L = {}", s.bar_d_theta().to_paper_string()).unwrap();
    let reg = regularity(sys.regularity());
    writeln!(t, "regularity: {}", reg["kind"].as_str().unwrap()).unwrap();
    for (a, r) in el.fields.iter().enumerate() {
        writeln!(t, "EL[{}] = {r}", chart.field_names()[a]).unwrap();
    }
    writeln!(t, "action = {}", el.action).unwrap();

    let mut out = json!({
        "lagrangian": sys.lagrangian().to_string(),
        "theta_l": form(&s.theta),
        "omega": form(&s.omega),
        "sigma_l": form(&s.sigma),
        "energy": sys.energy().to_string(),
        "d_theta_l": form(&s.d_theta()),
        "sigma_wedge_theta_l": form(&sigma_theta),
        "bar_d_theta_l": form(&s.bar_d_theta()),
        "regularity": reg,
        "el_residuals": {
            "fields": el.fields.iter().map(Expr::to_string).collect::<Vec<_>>(),
            "action": el.action.to_string(),
        },
    });

    if hamiltonian {
        if matches!(sys.regularity(), Regularity::Singular) {
            return Err(Failure::refused("singular Lagrangian: the Legendre map is not invertible"));
        }
        let (lg, h) = legendre(&sys).map_err(|e| match e {
            HamiltonianError::Singular | HamiltonianError::NonInvertible(_) => Failure::refused(e.to_string()),
            other => Failure::input(other.to_string()),
        })?;
        let pairs = |v: &[(mcft_core::expr::Symbol, Expr)]| -> Vec<Value> {
            v.iter().map(|(s, e)| json!({ "symbol": s.name(), "value": e.to_string() })).collect()
        };
        for (s, e) in lg.forward() {
            writeln!(t, "{} = {e}", s.name()).unwrap();
        }
        for (s, e) in lg.inverse() {
            writeln!(t, "{} = {e}", s.name()).unwrap();
        }
        let hdw = h.hdw_residuals();
        writeln!(t, "H = {}", h.hamiltonian()).unwrap();
        writeln!(t, "Theta_H = {}", h.theta().to_paper_string()).unwrap();
        writeln!(t, "sigma_H = {}", h.sigma().to_paper_string()).unwrap();
        for r in &hdw.velocity {
            writeln!(t, "HDW velocity: {r}").unwrap();
        }
        for r in &hdw.momentum {
            writeln!(t, "HDW momentum: {r}").unwrap();
        }
        writeln!(t, "HDW action: {}", hdw.action).unwrap();
        let ham = out.as_object_mut().unwrap();
        ham.insert("legendre".into(), json!({ "forward": pairs(lg.forward()), "inverse": pairs(lg.inverse()) }));
        ham.insert("hamiltonian".into(), h.hamiltonian().to_string().into());
        ham.insert("theta_h".into(), form(h.theta()));
        ham.insert("sigma_h".into(), form(h.sigma()));
        ham.insert(
            "hdw_residuals".into(),
            json!({
                "velocity": hdw.velocity.iter().map(Expr::to_string).collect::<Vec<_>>(),
                "momentum": hdw.momentum.iter().map(Expr::to_string).collect::<Vec<_>>(),
                "action": hdw.action.to_string(),
            }),
        );
    }
    Ok(Outcome { code: exit::OK, outputs: out, text: t })
}

fn check_symmetry(ctx: &Context<'_>, name: &str) -> Result<Outcome, Failure> {
    let sys = system(ctx)?;
    let y = lifted(ctx, &sys, name)?;
    let report = classify(&y, sys.structure(), &ctx.probe).map_err(|e| Failure::input(e.to_string()))?;
    let mut t = String::new();
    writeln!(t, "{name} = {}", candidate(ctx, name)?.field.to_paper_string()).unwrap();
    writeln!(t, "lift: {}", y.to_paper_string()).unwrap();
    writeln!(t, "classification: {}", report.classification.as_str()).unwrap();
    writeln!(t, "sigma invariant: {}", report.sigma_invariant).unwrap();
    writeln!(t, "current: xi = {}", report.current.to_paper_string()).unwrap();
    for w in &report.witnesses {
        writeln!(t, "witness {}: {}", w.basis, w.coefficient).unwrap();
    }
    if report.numerically_certified {
        writeln!(t, "note: some checks were decided by numeric probing").unwrap();
    }
    let code = if report.classification.is_noether() { exit::OK } else { exit::NEGATIVE };
    let outputs = json!({ "name": name, "lift": y.to_paper_string(), "report": report.to_json() });
    Ok(Outcome { code, outputs, text: t })
}

fn current(ctx: &Context<'_>, name: &str) -> Result<Outcome, Failure> {
    let sys = system(ctx)?;
    let y = lifted(ctx, &sys, name)?;
    let chart = sys.chart();
    let xi = noether_current(&y, sys.structure()).map_err(|e| Failure::input(e.to_string()))?;
    let comps = current_components(&xi);
    let div = divergence(chart, &comps);
    let check = verify_noether(&sys, &y, &ctx.probe).map_err(|e| match e {
        NoetherError::Lagrangian(l) => lagrangian_failure(l),
        other => Failure::input(other.to_string()),
    })?;
    let mut t = String::new();
    writeln!(t, "xi = {}", xi.to_paper_string()).unwrap();
    for (mu, f) in comps.iter().enumerate() {
        writeln!(t, "f^{} = {f}", chart.base_names()[mu]).unwrap();
    }
    writeln!(t, "D_mu f^mu = {div}").unwrap();
    writeln!(t, "classification: {}", check.report.classification.as_str()).unwrap();
    writeln!(t, "{}", verdict_line("dissipation law i_X dbar xi = 0", &check.law)).unwrap();
    writeln!(t, "{}", verdict_line("conservation law i_X d xi = 0", &check.conserved)).unwrap();
    let code = if check.law.holds() { exit::OK } else { exit::NEGATIVE };
    let outputs = json!({
        "name": name,
        "current": form(&xi),
        "components": comps.iter().map(Expr::to_string).collect::<Vec<_>>(),
        "divergence": div.to_string(),
        "classification": check.report.classification,
        "dissipation_law": check.law.to_json(),
        "conservation_law": check.conserved.to_json(),
    });
    Ok(Outcome { code, outputs, text: t })
}

fn sopde(ctx: &Context<'_>) -> Result<Outcome, Failure> {
    let sys = system(ctx)?;
    let fam = sys.solve_sopde_family().map_err(lagrangian_failure)?;
    let chart = sys.chart();
    let mut t = String::new();
    for (mu, x) in fam.factors.iter().enumerate() {
        writeln!(t, "X_{} = {}", chart.base_names()[mu], x.to_paper_string()).unwrap();
    }
    for (s, e) in &fam.solved {
        writeln!(t, "{} = {e}", s.name()).unwrap();
    }
    let free: Vec<&str> = fam.free.iter().map(|s| s.name()).collect();
    writeln!(t, "free: {}", free.join(" ")).unwrap();
    let outputs = json!({
        "factors": fam.factors.iter().map(VectorField::to_paper_string).collect::<Vec<_>>(),
        "solved": fam.solved.iter().map(|(s, e)| json!({ "symbol": s.name(), "value": e.to_string() })).collect::<Vec<_>>(),
        "free": free,
    });
    Ok(Outcome { code: exit::OK, outputs, text: t })
}

fn numeric_failure(e: NumericError) -> Failure {
    match e {
        NumericError::Cfl { .. } | NumericError::BlowUp { .. } | NumericError::Unsupported(_) | NumericError::Absent(_) => {
            Failure::refused(e.to_string())
        }
        other => Failure::input(other.to_string()),
    }
}

fn scenario<'a>(ctx: &'a Context<'_>, name: &str) -> Result<&'a Scenario, Failure> {
    ctx.model.scenario(name).ok_or_else(|| Failure::input(format!("no scenario named `{name}`")))
}

/// Initial data as functions of the spatial coordinate, checked on `xs`.
fn initial_data(
    ctx: &Context<'_>,
    sc: &Scenario,
    xs: &[f64],
) -> Result<(impl Fn(f64) -> f64 + Sync, impl Fn(f64) -> f64 + Sync), Failure> {
    let mut b = ctx.model.bindings();
    b.set(ctx.model.coords[0].clone(), 0.0);
    let space = ctx.model.coords[1].clone();
    let make = |e: &Expr| {
        let (e, b, space) = (e.clone(), b.clone(), space.clone());
        move |x: f64| e.eval(&b.clone().with(space.clone(), x)).unwrap_or(f64::NAN)
    };
    let (y0, v0) = (make(&sc.y0), make(&sc.v0));
    for (what, e) in [("y", &sc.y0), ("v", &sc.v0)] {
        let probe: Bindings64 = b.clone().with(space.clone(), xs.first().copied().unwrap_or(0.0));
        e.eval(&probe).map_err(|err| Failure::input(format!("initial {what}: {err}")))?;
    }
    if xs.iter().any(|&x| !y0(x).is_finite() || !v0(x).is_finite()) {
        return Err(Failure::input("initial data is not finite on the grid"));
    }
    Ok((y0, v0))
}

fn wave_params(ctx: &Context<'_>, sys: &LagrangianSystem) -> Result<WaveParams<f64>, Failure> {
    if ctx.model.coords.len() != 2 {
        return Err(Failure::refused("numerics need exactly two base coordinates (t, x)"));
    }
    damped_wave_params(sys, &ctx.model.bindings()).map_err(numeric_failure)
}

#[derive(serde::Serialize)]
struct Check {
    applicable: bool,
    passed: bool,
    value: Option<f64>,
    bound: String,
}

impl Check {
    fn skipped(why: &str) -> Self {
        Check { applicable: false, passed: true, value: None, bound: why.into() }
    }
}

fn law_checks(conv: &Convergence<f64>, p: &WaveParams<f64>, bc: Boundary) -> Vec<(&'static str, Check)> {
    let all_zero = conv.levels.iter().all(|l| l.residual.l2 == 0.0 && l.residual.max == 0.0);
    let (lo, hi) = RATIO_RANGE;
    let convergence = if all_zero {
        Check { applicable: true, passed: true, value: Some(0.0), bound: "all residual norms exactly 0".into() }
    } else if conv.ratios.is_empty() {
        Check::skipped("needs at least two grid levels")
    } else {
        let worst = conv.ratios.iter().copied().fold(f64::NAN, |w, r| if w.is_nan() || (r - 4.0).abs() > (w - 4.0).abs() { r } else { w });
        Check {
            applicable: true,
            passed: conv.ratios.iter().all(|r| (lo..=hi).contains(r)),
            value: Some(worst),
            bound: format!("every L2 ratio in [{lo}, {hi}]"),
        }
    };
    let finest = conv.levels.last().expect("at least one level");
    let decay = match (bc, finest.decay) {
        (Boundary::Periodic, Some(fit)) => Check {
            applicable: true,
            passed: (fit.gamma_hat - p.gamma).abs() <= DECAY_TOL,
            value: Some(fit.gamma_hat),
            bound: format!("|gamma_hat - {}| <= {DECAY_TOL}", p.gamma),
        },
        (Boundary::Periodic, None) => Check::skipped("momentum vanishes or changes sign"),
        _ => Check::skipped("momentum balance needs periodic boundaries"),
    };
    let conservation = match (bc, finest.decay.is_some()) {
        (Boundary::Periodic, true) if p.gamma == 0.0 => Check {
            applicable: true,
            passed: finest.momentum_drift <= DRIFT_TOL,
            value: Some(finest.momentum_drift),
            bound: format!("relative momentum drift <= {DRIFT_TOL}"),
        },
        _ => Check::skipped("only for gamma = 0 with nonzero periodic momentum"),
    };
    vec![("convergence", convergence), ("decay", decay), ("conservation", conservation)]
}

fn verify_law(ctx: &Context<'_>, name: &str, scen: &str) -> Result<Outcome, Failure> {
    let sys = system(ctx)?;
    let sc = scenario(ctx, scen)?;
    let p = wave_params(ctx, &sys)?;
    let y = lifted(ctx, &sys, name)?;
    let xi = noether_current(&y, sys.structure()).map_err(|e| Failure::input(e.to_string()))?;
    let g = &sc.grid;
    let coarse = Grid1p1::from_cfl(g.lx, g.nx[0], g.t_final, g.cfl, p.speed(), sc.bc).map_err(numeric_failure)?;
    let (y0, v0) = initial_data(ctx, sc, &coarse.xs())?;
    let conv = convergence_study(&p, &y0, &v0, g.lx, &g.nx, g.t_final, g.cfl, sc.bc, &xi, sys.sigma(), &ctx.model.bindings())
        .map_err(numeric_failure)?;
    let checks = law_checks(&conv, &p, sc.bc);
    let passed = checks.iter().all(|(_, c)| c.passed);

    let mut t = String::new();
    writeln!(t, "scenario {scen}: rho={} tau={} gamma={} bc={}", p.rho, p.tau, p.gamma, sc.bc.as_str()).unwrap();
    writeln!(t, "current: xi = {}", xi.to_paper_string()).unwrap();
    for l in &conv.levels {
        let fit = l.decay.map_or("-".to_string(), |f| format!("{:.6}", f.gamma_hat));
        writeln!(
            t,
            "nx={} nt={} dt={:.3e} residual l2={:.3e} max={:.3e} gamma_hat={fit} momentum drift={:.3e}",
            l.nx, l.nt, l.dt, l.residual.l2, l.residual.max, l.momentum_drift
        )
        .unwrap();
    }
    let ratios: Vec<String> = conv.ratios.iter().map(|r| format!("{r:.3}")).collect();
    writeln!(t, "ratios: {}", ratios.join(" ")).unwrap();
    for (k, c) in &checks {
        let status = if !c.applicable { "SKIP" } else if c.passed { "PASS" } else { "FAIL" };
        let v = c.value.map_or(String::new(), |v| format!(" value={v:.6e}"));
        writeln!(t, "{status} {k}:{v} ({})", c.bound).unwrap();
    }
    let outputs = json!({
        "name": name,
        "scenario": scen,
        "params": { "rho": p.rho, "tau": p.tau, "gamma": p.gamma },
        "current": form(&xi),
        "levels": conv.levels,
        "summary": Summary::from(&conv),
        "checks": checks.into_iter().map(|(k, c)| (k.to_string(), serde_json::to_value(c).unwrap())).collect::<serde_json::Map<_, _>>(),
        "passed": passed,
    });
    Ok(Outcome { code: if passed { exit::OK } else { exit::NEGATIVE }, outputs, text: t })
}

fn simulate(ctx: &Context<'_>, scen: &str, nx: Option<usize>, out: Option<&std::path::Path>) -> Result<Outcome, Failure> {
    let sys = system(ctx)?;
    let sc = scenario(ctx, scen)?;
    let p = wave_params(ctx, &sys)?;
    let g = &sc.grid;
    let grid = Grid1p1::from_cfl(g.lx, nx.unwrap_or(g.nx[0]), g.t_final, g.cfl, p.speed(), sc.bc).map_err(numeric_failure)?;
    let xs = grid.xs();
    let (y0, v0) = initial_data(ctx, sc, &xs)?;
    let a: Vec<f64> = xs.iter().map(|&x| y0(x)).collect();
    let b: Vec<f64> = xs.iter().map(|&x| v0(x)).collect();
    let traj = integrate_damped_wave(&p, &a, &b, &grid).map_err(numeric_failure)?;
    let q = staggered_momentum(&traj, p.rho);
    let e = staggered_energy(&traj, &p);
    let mut csv = Vec::new();
    write_csv(&mut csv, &grid, &traj.y, 0).map_err(|e| Failure::input(e.to_string()))?;
    let csv = String::from_utf8(csv).expect("CSV is ASCII");
    if let Some(path) = out {
        std::fs::write(path, &csv).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    let first_last = |s: &[(f64, f64)]| json!({ "initial": s[0].1, "final": s[s.len() - 1].1, "relative_drift": relative_drift(s) });
    let outputs = json!({
        "scenario": scen,
        "nx": grid.nx,
        "nt": grid.nt,
        "dt": grid.dt,
        "cfl": grid.cfl(p.speed()),
        "momentum": first_last(&q),
        "energy": first_last(&e),
        "csv": out.map(|p| p.display().to_string()),
    });
    let text = match out {
        Some(path) => format!(
            "wrote {} ({} x {} samples)\nmomentum {:.6e} -> {:.6e}\nenergy {:.6e} -> {:.6e}\n",
            path.display(),
            grid.nt + 1,
            grid.nx,
            q[0].1,
            q[q.len() - 1].1,
            e[0].1,
            e[e.len() - 1].1
        ),
        None => csv,
    };
    Ok(Outcome { code: exit::OK, outputs, text })
}
