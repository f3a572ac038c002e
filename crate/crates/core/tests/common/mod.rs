#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use fieldcalc_core::ast::Program;
use fieldcalc_core::eval::SensorState;
use fieldcalc_core::network::random::{device_ids, random_topology};
use fieldcalc_core::network::{Environment, Topology};
use fieldcalc_core::oracle::relaxation_fixpoint;
use fieldcalc_core::parser::{parse_sort, parse_sources};
use fieldcalc_core::{SensorCatalog, Value};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn corpus(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn catalog() -> SensorCatalog {
    let mut c = SensorCatalog::default();
    for (n, s) in [("free", "bool"), ("zone", "bool"), ("flag", "bool"), ("tag", "real"), ("dst", "zpr"), ("width", "zpr")] {
        c.declare(n, parse_sort(s).unwrap());
    }
    c
}

/// The library followed by the named main file.
pub fn with_lib(main: &str) -> Program {
    let lib = corpus("lib.scf");
    let m = corpus(main);
    let (p, d) = parse_sources(&[("lib.scf", &lib), (main, &m)]);
    assert!(d.is_empty(), "{d:?}");
    p
}

pub fn hop() -> Program {
    let (p, d) = parse_sources(&[("hop_main.scf", &corpus("hop_main.scf"))]);
    assert!(d.is_empty(), "{d:?}");
    p
}

pub fn sensors(pairs: &[(&str, Value)]) -> SensorState {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Random environment for the gradient-family mains. Rejects environments
/// where some device that listens to neighbours has no finite source
/// reachable: there stale low values would climb forever, since the reals
/// admit infinite ascending chains.
pub fn random_gradient_env<R: Rng>(rng: &mut R, max_devices: usize) -> Environment {
    loop {
        let n = rng.gen_range(2..=max_devices);
        let ids = device_ids(n);
        let topology = random_topology(&ids, 0.35, rng);
        let mut env = Environment { topology, sensors: Default::default() };
        for d in &ids {
            let src = if rng.gen_bool(0.35) { Value::real(*[0.0, 1.0, 2.0, 4.0].choose(rng).unwrap()) } else { Value::posinf() };
            let s = sensors(&[
                ("src", src),
                ("dist", Value::real(*[1.0, 2.0].choose(rng).unwrap())),
                ("free", Value::bool(rng.gen_bool(0.8))),
                ("zone", Value::bool(rng.gen_bool(0.3))),
                ("tag", Value::real(*[-1.0, 0.0, 1.0, 2.0, 3.0].choose(rng).unwrap())),
            ]);
            env.sensors.insert(d.clone(), s);
        }
        if gradient_safe(&env, false) && gradient_safe(&env, true) {
            return env;
        }
    }
}

fn gradient_safe(env: &Environment, blocking: bool) -> bool {
    let mut eff = env.clone();
    if blocking {
        let blocked: Vec<String> =
            env.sensors.iter().filter(|(_, s)| s["free"] == Value::bool(false)).map(|(d, _)| d.clone()).collect();
        for d in blocked {
            eff.topology.insert(d, Default::default());
        }
    }
    let fix = relaxation_fixpoint(&hop(), &eff, 100_000).unwrap();
    eff.topology.iter().all(|(d, ns)| ns.is_empty() || fix.field[d].root != Value::posinf())
}

pub fn line(n: usize, left: f64, right: f64) -> Environment {
    let ids = device_ids(2 * n);
    let mut topology = Topology::new();
    for (i, d) in ids.iter().enumerate() {
        let mut ns = std::collections::BTreeSet::new();
        if i > 0 {
            ns.insert(ids[i - 1].clone());
        }
        if i + 1 < ids.len() {
            ns.insert(ids[i + 1].clone());
        }
        topology.insert(d.clone(), ns);
    }
    let sensors = ids
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let src = if i < n { left } else { right };
            (d.clone(), sensors(&[("src", Value::real(src)), ("dist", Value::real(1.0))]))
        })
        .collect();
    Environment { topology, sensors }
}

use fieldcalc_core::ast::Expr;
use fieldcalc_core::TypeExpr;

const LITERALS: [f64; 8] = [f64::NEG_INFINITY, -2.0, -1.0, 0.0, 0.5, 1.0, 2.0, f64::INFINITY];

fn random_ground_type<R: Rng>(rng: &mut R) -> TypeExpr {
    if rng.gen_bool(0.6) {
        TypeExpr::Real
    } else {
        TypeExpr::Bool
    }
}

/// A random closed expression of type `ty` over the sensors `src`, `dist`,
/// `tag`, `flag` and the library functions. Always well typed; sort
/// correctness is left to the checker.
pub fn random_expr<R: Rng>(rng: &mut R, ty: &TypeExpr, depth: usize) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    match ty {
        TypeExpr::Real if leaf => match rng.gen_range(0..4) {
            0 => Expr::real(*LITERALS.choose(rng).unwrap()),
            1 => Expr::sensor("src"),
            2 => Expr::sensor("dist"),
            _ => Expr::sensor("tag"),
        },
        TypeExpr::Bool if leaf => match rng.gen_range(0..3) {
            0 => Expr::lit(fieldcalc_core::GroundValue::TRUE),
            1 => Expr::lit(fieldcalc_core::GroundValue::FALSE),
            _ => Expr::sensor("flag"),
        },
        TypeExpr::Pair(a, b) if leaf || rng.gen_bool(0.5) => {
            Expr::pair(random_expr(rng, a, depth.saturating_sub(1)), random_expr(rng, b, depth.saturating_sub(1)))
        }
        _ => {
            let d = depth - 1;
            let r = TypeExpr::Real;
            let b = TypeExpr::Bool;
            let choice = rng.gen_range(0..8);
            match (ty, choice) {
                (_, 0) => Expr::cond(random_expr(rng, &b, d), random_expr(rng, ty, d), random_expr(rng, ty, d)),
                (_, 1) => {
                    let other = random_ground_type(rng);
                    Expr::fst(random_expr(rng, &TypeExpr::pair(ty.clone(), other), d))
                }
                (_, 2) => {
                    let other = random_ground_type(rng);
                    Expr::snd(random_expr(rng, &TypeExpr::pair(other, ty.clone()), d))
                }
                (TypeExpr::Real, 3) => Expr::apply("+", vec![random_expr(rng, &r, d), random_expr(rng, &r, d)]),
                (TypeExpr::Real, 4) => Expr::spread(random_expr(rng, &r, d), "+", vec![random_expr(rng, &r, d)]),
                (TypeExpr::Real, 5) => match rng.gen_range(0..4) {
                    0 => Expr::apply("-", vec![random_expr(rng, &r, d)]),
                    1 => Expr::apply("grad", vec![random_expr(rng, &r, d)]),
                    2 => Expr::apply("restrict", vec![random_expr(rng, &r, d), random_expr(rng, &b, d)]),
                    _ => Expr::apply("gradobs", vec![random_expr(rng, &r, d), random_expr(rng, &b, d)]),
                },
                (TypeExpr::Bool, 3) => match rng.gen_range(0..3) {
                    0 => Expr::apply("not", vec![random_expr(rng, &b, d)]),
                    1 => Expr::apply("or", vec![random_expr(rng, &b, d), random_expr(rng, &b, d)]),
                    _ => Expr::apply("sector", vec![random_expr(rng, &r, d), random_expr(rng, &b, d)]),
                },
                (TypeExpr::Bool, 4) => Expr::spread(random_expr(rng, &b, d), "or", vec![random_expr(rng, &b, d)]),
                (TypeExpr::Bool, 5) => {
                    let op = if rng.gen_bool(0.5) { "<" } else { "=" };
                    Expr::apply(op, vec![random_expr(rng, &r, d), random_expr(rng, &r, d)])
                }
                (TypeExpr::Pair(x, y), 3) if **x == r && **y == r => {
                    Expr::apply("gradcast", vec![random_expr(rng, &r, d), random_expr(rng, &r, d)])
                }
                _ => random_expr(rng, ty, d),
            }
        }
    }
}

pub fn random_type<R: Rng>(rng: &mut R) -> TypeExpr {
    if rng.gen_bool(0.25) {
        TypeExpr::pair(random_ground_type(rng), random_ground_type(rng))
    } else {
        random_ground_type(rng)
    }
}
