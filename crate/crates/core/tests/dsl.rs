use mcft_core::dsl::{parse, render, Candidate, GridSpec, ModelFile, ParamDecl, Scenario};
use mcft_core::exterior::VectorField;
use mcft_core::expr::Expr;
use mcft_core::models::DampedString;
use mcft_core::numeric::Boundary;
use proptest::prelude::*;

const STRING: &str = include_str!("../../../models/string.mcft");
const PAIR: &str = include_str!("../../../models/pair.mcft");
const ZERO: &str = include_str!("../../../models/zero.mcft");

#[test]
fn reference_file_parses() {
    let m = parse(STRING).unwrap();
    assert_eq!(m.coords, ["t", "x"]);
    assert_eq!(m.fields, ["y"]);
    let names: Vec<_> = m.params.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names, ["rho", "tau", "gamma"]);
    assert_eq!(m.params[2].default, Some(0.1));
    let s = DampedString::new();
    assert_eq!(m.lagrangian, s.lagrangian());
    assert_eq!(m.jet_chart().dim(), 7);
    let y = m.candidate("Y").unwrap();
    let config = m.configuration_chart();
    assert_eq!(y.field, VectorField::coordinate(&config, config.index_of("y").unwrap()));
    let sc = m.scenario("decay").unwrap();
    assert_eq!(sc.grid.nx, [128, 256, 512]);
    assert_eq!(sc.bc, Boundary::Periodic);
    assert_eq!(m.scenario("rest").unwrap().grid.cfl, 0.5);
    assert!(m.scenario("rest").unwrap().v0.is_structurally_zero());
}

#[test]
fn spec_reference_text() {
    let src = "coords t x\nfields y\nparams rho=1 tau=1 gamma=0.1\n\
               lagrangian 0.5*(rho*dy[t]^2 - tau*dy[x]^2) - gamma*s[t]\nsymmetry Y: d/dy\n";
    let m = parse(src).unwrap();
    assert_eq!(m.lagrangian, DampedString::new().lagrangian());
    let once = render(&m);
    assert_eq!(render(&parse(&once).unwrap()), once);
    assert!(once.contains("symmetry Y: d/dy\n"));
}

#[test]
fn empty_field_list() {
    let e = parse("coords t x\nfields\nlagrangian 0").unwrap_err();
    assert_eq!(e.message, "at least one field required");
    assert_eq!((e.line, e.col), (2, 1));
    let e = parse("coords t x\nlagrangian 0").unwrap_err();
    assert_eq!(e.message, "at least one field required");
}

#[test]
fn jet_symbols_resolve_against_bases() {
    let m = parse("coords t\nfields y\nlagrangian 0.5*dy[t]^2").unwrap();
    let c = m.jet_chart();
    let yt = c.var(c.index_of("y_t").unwrap());
    assert_eq!(m.lagrangian, yt.pow(2).unwrap() * Expr::frac(1, 2));

    let src = "coords x\nfields y\nlagrangian 0.5*dy[t]^2";
    let e = parse(src).unwrap_err();
    assert_eq!(e.message, "unresolved symbol `dy[t]`");
    assert_eq!((e.line, e.col), (3, 16));
    assert_eq!(&src[e.span.start..e.span.end], "dy[t]");
}

#[test]
fn unresolved_and_duplicate() {
    let e = parse("coords t x\nfields y\nlagrangian k*dy[t]").unwrap_err();
    assert_eq!(e.message, "unresolved symbol `k`");
    assert_eq!((e.line, e.col), (3, 12));
    let e = parse("coords t x\nfields y\nlagrangian y_t^2").unwrap_err();
    assert!(e.message.contains("write `dy[t]`"), "{e}");

    let e = parse("coords t x\nfields y x\nlagrangian 0").unwrap_err();
    assert_eq!(e.message, "duplicate declaration of `x`");
    assert_eq!((e.line, e.col), (2, 10));
    let e = parse("coords t\nfields y\nparams a a\nlagrangian 0").unwrap_err();
    assert_eq!((e.line, e.col), (3, 10));
    let e = parse("coords t\nfields y\nlagrangian 0\nlagrangian 1").unwrap_err();
    assert!(e.message.starts_with("duplicate declaration"));
    let e = parse("coords t\nfields y\nlagrangian 0\nsymmetry A: d/dy\nsymmetry A: d/dt").unwrap_err();
    assert_eq!((e.line, e.col), (5, 10));
    let e = parse("coords t\nfields s\nlagrangian 0").unwrap_err();
    assert_eq!(e.message, "`s` is reserved");
}

#[test]
fn candidates_reference_declared_axes() {
    let e = parse("coords t x\nfields y\nlagrangian 0\nsymmetry Z: d/dz").unwrap_err();
    assert_eq!((e.line, e.col), (4, 13));
    assert!(e.message.contains("d/dz"));
    let e = parse("coords t x\nfields y\nlagrangian 0\nsymmetry Z: d/dy[t]").unwrap_err();
    assert!(e.message.contains("d/dy[t]"));
    let e = parse("coords t x\nfields y\nlagrangian 0\nsymmetry Z: dy[t]*d/dy").unwrap_err();
    assert!(e.message.contains("not allowed"));
    let m = parse("coords t x\nfields y\nparams k\nlagrangian 0\nsymmetry Z: -k*x*d/dy + d/ds[t]/2*3").unwrap_err();
    assert!(m.message.contains("divide"));
    let m = parse("coords t x\nfields y\nparams k\nlagrangian 0\nsymmetry Z: -k*x*d/dy + 3/2*d/ds[t] + d/dy").unwrap();
    let z = &m.candidate("Z").unwrap().field;
    let c = m.configuration_chart();
    let k = Expr::sym(&m.param_symbols()[0]);
    let x = c.var(1);
    assert_eq!(z.components()[&c.index_of("y").unwrap()], Expr::one() - k * x);
    assert_eq!(z.components()[&c.index_of("s_t").unwrap()], Expr::frac(3, 2));
}

#[test]
fn syntax_errors_have_positions() {
    let cases = [
        ("coords t\nfields y\nlagrangian (dy[t]", "expected `)`"),
        ("coords t\nfields y\nlagrangian 2 $ 3", "unexpected character `$`"),
        ("coords t\nfields y\nlagrangian dy[t]^x", "integer exponent"),
        ("coords t\nfields y\nlagrangian foo(t)", "unknown function `foo`"),
        ("coords t\nfields y\nlagrangian 0\nbanana", "expected a declaration"),
        ("coords t\nfields y\nlagrangian 0\nscenario a { grid lx=1 t=1; init y=0; bc periodic; }", "grid needs `nx`"),
        ("coords t x\nfields y\nlagrangian 0\nscenario a { grid lx=1 nx=8 t=1; init y=dy[x]; bc periodic; }", "not allowed"),
        ("coords t x\nfields y\nlagrangian 0\nscenario a { grid lx=1 nx=8 t=1; init y=0; bc open; }", "unknown boundary"),
    ];
    for (src, msg) in cases {
        let e = parse(src).unwrap_err();
        assert!(e.message.contains(msg), "{src:?}: {e}");
        assert!(e.span.start < e.span.end && e.span.end <= src.len(), "{src:?}: {:?}", e.span);
        let tok = &src[e.span.start..e.span.end];
        assert!(!tok.trim().is_empty(), "{src:?}");
        assert!(e.to_string().starts_with(&format!("{}:{}:", e.line, e.col)));
    }
}

#[test]
fn shipped_corpus_is_a_fixpoint() {
    for src in [STRING, PAIR, ZERO] {
        let m = parse(src).unwrap();
        let once = render(&m);
        assert!(!once.contains('#'));
        let back = parse(&once).unwrap();
        assert_eq!(back, m);
        assert_eq!(render(&back), once);
    }
}

#[test]
fn programmatic_model_round_trips() {
    let s = DampedString::new();
    let config = mcft_core::exterior::Chart::configuration(&["t", "x"], &["y"]).unwrap();
    let m = ModelFile {
        coords: vec!["t".into(), "x".into()],
        fields: vec!["y".into()],
        params: ["rho", "tau", "gamma"]
            .iter()
            .map(|n| ParamDecl { name: n.to_string(), default: Some(0.25) })
            .collect(),
        lagrangian: s.lagrangian(),
        symmetries: vec![Candidate {
            name: "W".into(),
            field: VectorField::new(&config, [(0, config.var(1) * Expr::frac(-1, 3)), (2, Expr::one())]),
        }],
        scenarios: vec![Scenario {
            name: "w".into(),
            grid: GridSpec { lx: 2.0, nx: vec![16, 32], t_final: 0.5, cfl: 0.25 },
            y0: config.var(1).sin(),
            v0: Expr::zero(),
            bc: Boundary::DirichletZero,
        }],
        spans: Default::default(),
    };
    assert_eq!(parse(&render(&m)).unwrap(), m);
}

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        (1u32..20).prop_map(|n| n.to_string()),
        (1u32..9, 1u32..9).prop_map(|(a, b)| format!("{a}.{b}")),
        prop::sample::select(vec!["t", "x", "u", "k", "m", "du[t]", "du[x]", "dw[t]", "s[t]", "s[x]", "w"])
            .prop_map(str::to_string),
    ]
}

fn expr_text() -> impl Strategy<Value = String> {
    atom().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}*{b}")),
            (inner.clone(), 1u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            (inner.clone(), 1u32..5).prop_map(|(a, n)| format!("{a}/{n}")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.prop_map(|a| format!("sin({a})")),
        ]
    })
}

fn config_text() -> impl Strategy<Value = String> {
    prop_oneof![
        (1u32..9).prop_map(|n| n.to_string()),
        prop::sample::select(vec!["t", "x", "u", "w", "k", "s[t]"]).prop_map(str::to_string),
    ]
}

fn vf_text() -> impl Strategy<Value = String> {
    let term = (config_text(), prop::sample::select(vec!["d/dt", "d/dx", "d/du", "d/dw", "d/ds[t]", "d/ds[x]"]))
        .prop_map(|(c, b)| format!("{c}*{b}"));
    prop::collection::vec(term, 1..4).prop_map(|v| v.join(" - "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn parse_render_identity(
        l in expr_text(),
        vfs in prop::collection::vec(vf_text(), 0..3),
        k in prop::option::of(-5.0f64..5.0),
        init in expr_text().prop_filter("initial data", |s| !s.contains('[') && !s.contains('u') && !s.contains('w')),
        nx in prop::collection::vec(8usize..600, 1..4),
    ) {
        let kdecl = k.map_or("k".to_string(), |v| format!("k={v}"));
        let mut src = format!("coords t x\nfields u w\nparams {kdecl} m=2\nlagrangian {l}\n");
        for (i, v) in vfs.iter().enumerate() {
            src.push_str(&format!("symmetry V{i}: {v}\n"));
        }
        let nx: Vec<String> = nx.iter().map(usize::to_string).collect();
        src.push_str(&format!("scenario z {{ grid lx=1.5 nx={} t=0.75; init y={init}, v=pi*x; bc dirichlet; }}\n", nx.join(",")));
        let m = match parse(&src) {
            Ok(m) => m,
            // Random text may divide by an expression that cancels to zero.
            Err(e) => {
                prop_assert!(e.message.contains("zero"), "{}\n{}", e, src);
                return Ok(());
            }
        };
        let text = render(&m);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(render(&back), text);
    }
}
