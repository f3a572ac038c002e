//! Well-formedness of the declared signature sets of user functions.

use std::collections::HashMap;

use crate::ast::{Diagnostic, Expr, ExprKind, FunctionDef, Program, SortSignature};
use crate::registry::{
    check_deterministic, check_deterministic_annotated, check_minimal, check_minimal_annotated,
    least_progressive_result, FunctionEntry, SignatureRegistry,
};
use crate::sort::Sort;
use crate::value::GroundValue;

fn key_projection(e: &Expr, var: &str, depth: usize) -> bool {
    if depth == 0 {
        return matches!(&e.kind, ExprKind::Var(x) if x == var);
    }
    matches!(&e.kind, ExprKind::Fst(inner) if key_projection(inner, var, depth - 1))
}

fn key_test(c: &Expr, var: &str, s: &Sort) -> bool {
    let depth = s.key_depth();
    let top = s.key().top();
    match (&c.kind, top) {
        (ExprKind::Apply(op, args), GroundValue::Real(_)) if op == "=" && args.len() == 2 => {
            let lit = |e: &Expr| matches!(&e.kind, ExprKind::Lit(g) if *g == top);
            (key_projection(&args[0], var, depth) && lit(&args[1]))
                || (lit(&args[0]) && key_projection(&args[1], var, depth))
        }
        (_, GroundValue::Bool(true)) => key_projection(c, var, depth),
        (ExprKind::Apply(op, args), GroundValue::Bool(false)) if op == "not" && args.len() == 1 => {
            key_projection(&args[0], var, depth)
        }
        _ => false,
    }
}

/// Does `body` (with parameter `var`) compute the canonical top for `s`?
pub fn matches_canonical_template(body: &Expr, var: &str, s: &Sort) -> bool {
    if s.is_ground() {
        return matches!(&body.kind, ExprKind::Var(x) if x == var);
    }
    match &body.kind {
        ExprKind::Cond(c, t, e) => {
            key_test(c, var, s)
                && t.as_value(&HashMap::new()) == Some(s.top())
                && matches!(&e.kind, ExprKind::Var(x) if x == var)
        }
        _ => false,
    }
}

/// Checks that `def` has the form `g(f(x1, ..., xn))` where `g` computes
/// the canonical top for `result` and `f` is a diffusion. Returns `f`.
pub fn is_canonical_top<'a>(
    def: &'a FunctionDef,
    result: &Sort,
    program: &Program,
    reg: &SignatureRegistry,
) -> Result<&'a str, String> {
    let shape = "body must have the form g(f(x1,...,xn)) with g the canonical top";
    let ExprKind::Apply(g, outer) = &def.body.kind else { return Err(shape.into()) };
    let [inner] = outer.as_slice() else { return Err(shape.into()) };
    let ExprKind::Apply(f, args) = &inner.kind else { return Err(shape.into()) };
    let params_in_order = args.len() == def.params.len()
        && args.iter().zip(&def.params).all(|(a, p)| matches!(&a.kind, ExprKind::Var(x) if *x == p.name));
    if !params_in_order {
        return Err(format!("`{f}` must be applied to the parameters in order"));
    }
    let Some(gdef) = program.get(g) else { return Err(format!("`{g}` is not a user function")) };
    let [gp] = gdef.params.as_slice() else { return Err(format!("`{g}` must take one parameter")) };
    if gp.ty != result.base_type() || gdef.result != result.base_type() {
        return Err(format!("`{g}` must have type {0}({0})", result.base_type()));
    }
    if !reg.is_pure(g) || !matches_canonical_template(&gdef.body, &gp.name, result) {
        return Err(format!("`{g}` does not compute the canonical top of {result}"));
    }
    let Some(fe) = reg.get(f) else { return Err(format!("undefined function `{f}`")) };
    if !fe.is_diffusion() {
        return Err(format!("`{f}` is not a diffusion"));
    }
    if !fe.is_builtin() && !fe.stab.is_empty() {
        return Err(format!("`{f}` is user-defined so it must not declare stabilising signatures"));
    }
    Ok(f.as_str())
}

fn same_set(a: &[SortSignature], b: &[SortSignature]) -> bool {
    a.iter().all(|x| b.contains(x)) && b.iter().all(|x| a.contains(x))
}

fn show(set: &[SortSignature]) -> String {
    format!("{{{}}}", set.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "))
}

fn check_entry(def: &FunctionDef, e: &FunctionEntry, program: &Program, reg: &SignatureRegistry) -> Vec<String> {
    let mut problems = Vec::new();
    let type_sig = e.type_signature();
    if e.sorts.is_empty() {
        problems.push("has no sort signature".to_string());
    }
    if !e.sorts.iter().any(|s| s.leq(&type_sig)) {
        problems.push(format!("no sort signature is below the type signature {type_sig}"));
    }
    if let Err(p) = check_minimal(&e.sorts) {
        problems.push(format!("sort signatures: {p}"));
    }
    if let Err(p) = check_deterministic(&e.sorts, &e.params) {
        problems.push(format!("sort signatures: {p}"));
    }
    if !e.is_diffusion() && (!e.stab.is_empty() || !e.ann.is_empty()) {
        problems.push("declares stabilising or annotated signatures but is not a diffusion".to_string());
        return problems;
    }
    if let Err(p) = check_minimal(&e.stab) {
        problems.push(format!("stabilising signatures: {p}"));
    }
    if let Err(p) = check_deterministic(&e.stab, &e.params) {
        problems.push(format!("stabilising signatures: {p}"));
    }
    for s in &e.stab {
        if !s.is_progressive() {
            problems.push(format!("stabilising signature {s} is not progressive"));
        }
        if !e.sorts.iter().any(|o| o.leq(s)) {
            problems.push(format!("stabilising signature {s} is not implied by the sort signatures"));
        }
    }
    for a in &e.ann {
        if !a.support.is_progressive() {
            problems.push(format!("annotated signature {a} is not progressive"));
        }
    }
    if let Err(p) = check_minimal_annotated(&e.ann) {
        problems.push(format!("annotated signatures: {p}"));
    }
    if let Err(p) = check_deterministic_annotated(&e.ann, &e.params) {
        problems.push(format!("annotated signatures: {p}"));
    }
    if e.stab.is_empty() {
        if e.result.is_ground() && !e.certain_supports().is_empty() {
            problems.push(format!(
                "stabilising signatures {{}} differ from the certain annotated supports {}",
                show(&e.certain_supports())
            ));
        }
        return problems;
    }
    let Some(least) = least_progressive_result(&e.stab) else {
        problems.push("stabilising signatures have no progressively least result sort".to_string());
        return problems;
    };
    if e.result.is_ground() {
        if !same_set(&e.stab, &e.certain_supports()) {
            problems.push(format!(
                "stabilising signatures {} differ from the certain annotated supports {}",
                show(&e.stab),
                show(&e.certain_supports())
            ));
        }
        return problems;
    }
    match is_canonical_top(def, &least, program, reg) {
        Err(msg) => problems.push(format!("pair-valued stabilising diffusion: {msg}")),
        Ok(f) => {
            let inner = reg.get(f).map(|x| x.certain_supports()).unwrap_or_default();
            let builtin = reg.get(f).is_some_and(|x| x.is_builtin());
            let ok = if builtin { e.stab.iter().all(|s| inner.contains(s)) } else { same_set(&e.stab, &inner) };
            if !ok {
                problems.push(format!(
                    "stabilising signatures {} do not match the certain annotated supports {} of `{f}`",
                    show(&e.stab),
                    show(&inner)
                ));
            }
        }
    }
    problems
}

pub fn validate_signature_sets(program: &Program, reg: &SignatureRegistry) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for def in program.defs.values() {
        let Some(entry) = reg.get(&def.name) else { continue };
        for p in check_entry(def, entry, program, reg) {
            out.push(Diagnostic::error(def.location.clone(), "signatures", format!("`{}` {p}", def.name)));
        }
    }
    out
}
