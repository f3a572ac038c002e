//! Program sanity and standard type checking.

use std::collections::{BTreeSet, HashMap};

use crate::ast::{Diagnostic, Expr, ExprKind, FunctionDef, Program, SourceLocation};
use crate::registry::SignatureRegistry;
use crate::value::TypeExpr;

pub type TypeEnv = HashMap<String, TypeExpr>;

/// Every referenced name resolves, the call graph is acyclic and, unless
/// `library`, a zero-argument `main` exists.
pub fn check_sanity(program: &Program, registry: &SignatureRegistry, library: bool) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for def in program.defs.values() {
        let mut called = BTreeSet::new();
        def.body.called_functions(&mut called);
        for f in called {
            if registry.get(&f).is_none() {
                diags.push(Diagnostic::error(
                    def.location.clone(),
                    "sanity",
                    format!("`{}` calls undefined function `{f}`", def.name),
                ));
            }
        }
    }
    if let Some(cycle) = find_cycle(program) {
        let loc = program.get(&cycle[0]).map(|d| d.location.clone()).unwrap_or_else(SourceLocation::unknown);
        diags.push(Diagnostic::error(loc, "sanity", format!("recursive definitions: {}", cycle.join(" -> "))));
    }
    if !library {
        match program.main() {
            None => diags.push(Diagnostic::error(SourceLocation::unknown(), "sanity", "no `main` definition")),
            Some(m) if !m.params.is_empty() => {
                diags.push(Diagnostic::error(m.location.clone(), "sanity", "`main` must take no parameters"))
            }
            _ => {}
        }
    }
    diags
}

fn find_cycle(program: &Program) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn dfs(n: &str, p: &Program, marks: &mut HashMap<String, Mark>, path: &mut Vec<String>) -> Option<Vec<String>> {
        match marks.get(n) {
            Some(Mark::Done) => return None,
            Some(Mark::Active) => {
                let start = path.iter().position(|x| x == n).unwrap_or(0);
                let mut cyc = path[start..].to_vec();
                cyc.push(n.to_string());
                return Some(cyc);
            }
            None => {}
        }
        let def = p.get(n)?;
        marks.insert(n.to_string(), Mark::Active);
        path.push(n.to_string());
        let mut called = BTreeSet::new();
        def.body.called_functions(&mut called);
        for g in called {
            if let Some(c) = dfs(&g, p, marks, path) {
                return Some(c);
            }
        }
        path.pop();
        marks.insert(n.to_string(), Mark::Done);
        None
    }
    let mut marks = HashMap::new();
    for n in program.defs.keys() {
        if let Some(c) = dfs(n, program, &mut marks, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

pub struct TypeError {
    pub rule: &'static str,
    pub message: String,
    pub expr: Expr,
}

pub fn type_of_expr(env: &TypeEnv, e: &Expr, reg: &SignatureRegistry) -> Result<TypeExpr, TypeError> {
    let fail = |rule: &'static str, message: String| Err(TypeError { rule, message, expr: e.clone() });
    match &e.kind {
        ExprKind::Var(x) => match env.get(x) {
            Some(t) => Ok(t.clone()),
            None => fail("T-VAR", format!("unbound variable `{x}`")),
        },
        ExprKind::Sensor(s) => match reg.sensors.type_of(s) {
            Some(t) => Ok(t),
            None => fail("T-SNS", format!("sensor `#{s}` has no declared sort")),
        },
        ExprKind::Lit(g) => Ok(g.type_of()),
        ExprKind::Pair(a, b) => Ok(TypeExpr::pair(type_of_expr(env, a, reg)?, type_of_expr(env, b, reg)?)),
        ExprKind::Fst(a) | ExprKind::Snd(a) => {
            let rule = if matches!(e.kind, ExprKind::Fst(_)) { "T-FST" } else { "T-SND" };
            match type_of_expr(env, a, reg)? {
                TypeExpr::Pair(l, r) => Ok(if rule == "T-FST" { *l } else { *r }),
                t => fail(rule, format!("projection of non-pair type {t}")),
            }
        }
        ExprKind::Cond(c, a, b) => {
            let tc = type_of_expr(env, c, reg)?;
            if tc != TypeExpr::Bool {
                return fail("T-COND", format!("condition has type {tc}, expected bool"));
            }
            let ta = type_of_expr(env, a, reg)?;
            let tb = type_of_expr(env, b, reg)?;
            if ta != tb {
                return fail("T-COND", format!("branches have types {ta} and {tb}"));
            }
            Ok(ta)
        }
        ExprKind::Apply(f, args) => {
            let rule = if reg.get(f).is_some_and(|x| x.is_builtin()) { "T-BLT" } else { "T-FUN" };
            apply_type(env, f, args, reg, rule, e)
        }
        ExprKind::Spread { source, diffusion, args } => {
            if reg.get(diffusion).is_some() && !reg.is_diffusion(diffusion) {
                return fail("T-SPR", format!("`{diffusion}` is not a diffusion (pure, result type = first argument type)"));
            }
            let mut all = vec![(**source).clone()];
            all.extend(args.iter().cloned());
            apply_type(env, diffusion, &all, reg, "T-SPR", e)
        }
    }
}

fn apply_type(
    env: &TypeEnv,
    f: &str,
    args: &[Expr],
    reg: &SignatureRegistry,
    rule: &'static str,
    e: &Expr,
) -> Result<TypeExpr, TypeError> {
    let Some(entry) = reg.get(f) else {
        return Err(TypeError { rule, message: format!("undefined function `{f}`"), expr: e.clone() });
    };
    if entry.params.len() != args.len() {
        return Err(TypeError {
            rule,
            message: format!("`{f}` expects {} arguments, got {}", entry.params.len(), args.len()),
            expr: e.clone(),
        });
    }
    for (i, (a, t)) in args.iter().zip(&entry.params).enumerate() {
        let ta = type_of_expr(env, a, reg)?;
        if ta != *t {
            return Err(TypeError {
                rule,
                message: format!("argument {} of `{f}` has type {ta}, expected {t}", i + 1),
                expr: a.clone(),
            });
        }
    }
    Ok(entry.result.clone())
}

fn located(def: &FunctionDef, err: TypeError) -> Diagnostic {
    let loc = SourceLocation::new(&def.location.file, err.expr.pos);
    Diagnostic::error(loc, err.rule, format!("in `{}`: {}", def.name, err.message))
}

pub fn check_def_types(def: &FunctionDef, reg: &SignatureRegistry) -> Result<(), Diagnostic> {
    let env: TypeEnv = def.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect();
    let t = type_of_expr(&env, &def.body, reg).map_err(|e| located(def, e))?;
    if t != def.result {
        return Err(Diagnostic::error(
            def.location.clone(),
            "T-DEF",
            format!("body of `{}` has type {t}, declared {}", def.name, def.result),
        ));
    }
    Ok(())
}

pub fn check_program_types(program: &Program, reg: &SignatureRegistry) -> Vec<Diagnostic> {
    program.defs.values().filter_map(|d| check_def_types(d, reg).err()).collect()
}
