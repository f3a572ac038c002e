//! Sort checking: refinement sorts over the standard types, with spreading
//! expressions resolved against stabilising signatures.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::ast::{Diagnostic, Expr, ExprKind, FunctionDef, Program, SortSignature, SourceLocation};
use crate::parser::print_expr;
use crate::registry::{most_specific, SignatureRegistry};
use crate::sort::{GroundSort, Sort};

pub type SortEnv = HashMap<String, Sort>;

/// One node of a derivation tree: the rule applied, the expression and
/// the conclusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub rule: String,
    pub expr: String,
    pub conclusion: String,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn new(rule: &str, e: &Expr, conclusion: impl fmt::Display, premises: Vec<Derivation>) -> Self {
        Derivation { rule: rule.to_string(), expr: print_expr(e), conclusion: conclusion.to_string(), premises }
    }

    /// Rule names in pre-order.
    pub fn rules(&self) -> Vec<String> {
        let mut out = vec![self.rule.clone()];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{:indent$}{}: {} : {}", "", self.rule, self.expr, self.conclusion, indent = depth * 2)?;
        for p in &self.premises {
            p.write_indented(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

#[derive(Debug, Clone)]
pub struct SortError {
    pub rule: &'static str,
    pub message: String,
    pub expr: Expr,
}

pub struct SortChecker<'a> {
    pub registry: &'a SignatureRegistry,
    pub warnings: Vec<(Expr, String)>,
}

impl<'a> SortChecker<'a> {
    pub fn new(registry: &'a SignatureRegistry) -> Self {
        SortChecker { registry, warnings: Vec::new() }
    }

    fn fail<T>(rule: &'static str, e: &Expr, message: String) -> Result<T, SortError> {
        Err(SortError { rule, message, expr: e.clone() })
    }

    pub fn sort_of(&mut self, env: &SortEnv, e: &Expr) -> Result<(Sort, Derivation), SortError> {
        match &e.kind {
            ExprKind::Var(x) => match env.get(x) {
                Some(s) => Ok((s.clone(), Derivation::new("S-VAR", e, s, vec![]))),
                None => Self::fail("S-VAR", e, format!("unbound variable `{x}`")),
            },
            ExprKind::Sensor(name) => {
                let s = match self.registry.sensors.sort_of(name) {
                    Some(s) => s.clone(),
                    None => {
                        self.warnings.push((e.clone(), format!("sensor `#{name}` has no declared sort, using real")));
                        Sort::Ground(GroundSort::Real)
                    }
                };
                Ok((s.clone(), Derivation::new("S-SNS", e, s, vec![])))
            }
            ExprKind::Lit(g) => {
                let s = Sort::Ground(GroundSort::min_of(*g));
                Ok((s.clone(), Derivation::new("S-GVAL", e, s, vec![])))
            }
            ExprKind::Pair(a, b) => {
                let (sa, da) = self.sort_of(env, a)?;
                let (sb, db) = self.sort_of(env, b)?;
                let s = Sort::pair(sa, sb);
                Ok((s.clone(), Derivation::new("S-PAIR", e, s, vec![da, db])))
            }
            ExprKind::Fst(a) | ExprKind::Snd(a) => {
                let first = matches!(e.kind, ExprKind::Fst(_));
                let rule = if first { "S-FST" } else { "S-SND" };
                let (sa, da) = self.sort_of(env, a)?;
                match sa {
                    Sort::Pair(l, r) => {
                        let s = if first { *l } else { *r };
                        Ok((s.clone(), Derivation::new(rule, e, s, vec![da])))
                    }
                    other => Self::fail(rule, e, format!("projection of non-pair sort {other}")),
                }
            }
            ExprKind::Cond(c, a, b) => {
                let (sc, dc) = self.sort_of(env, c)?;
                let (sa, da) = self.sort_of(env, a)?;
                let (sb, db) = self.sort_of(env, b)?;
                let (rule, s) = match sc {
                    Sort::Ground(GroundSort::True) => ("S-COND-TRUE", sa),
                    Sort::Ground(GroundSort::False) => ("S-COND-FALSE", sb),
                    Sort::Ground(GroundSort::Bool) => match sa.lub(&sb) {
                        Some(s) => ("S-COND", s),
                        None => return Self::fail("S-COND", e, format!("branches {sa} and {sb} have no lub")),
                    },
                    other => return Self::fail("S-COND", e, format!("condition has sort {other}")),
                };
                Ok((s.clone(), Derivation::new(rule, e, s, vec![dc, da, db])))
            }
            ExprKind::Apply(f, args) => {
                let mut sorts = Vec::new();
                let mut prem = Vec::new();
                for a in args {
                    let (s, d) = self.sort_of(env, a)?;
                    sorts.push(s);
                    prem.push(d);
                }
                let Some(entry) = self.registry.get(f) else {
                    return Self::fail("S-FUN", e, format!("undefined function `{f}`"));
                };
                match most_specific(&entry.sorts, &sorts) {
                    Some(sig) => {
                        let s = sig.result.clone();
                        Ok((s.clone(), Derivation::new("S-FUN", e, format!("{s} by {f}: {sig}"), prem)))
                    }
                    None => Self::fail(
                        "S-FUN",
                        e,
                        format!("no signature of `{f}` applicable to ({})", show_sorts(&sorts)),
                    ),
                }
            }
            ExprKind::Spread { source, diffusion, args } => {
                let (s0, d0) = self.sort_of(env, source)?;
                let mut sorts = vec![s0.clone()];
                let mut prem = vec![d0];
                for a in args {
                    let (s, d) = self.sort_of(env, a)?;
                    sorts.push(s);
                    prem.push(d);
                }
                let Some(entry) = self.registry.get(diffusion) else {
                    return Self::fail("S-SPR", e, format!("undefined function `{diffusion}`"));
                };
                let Some(sig) = most_specific(&entry.stab, &sorts) else {
                    return Self::fail(
                        "S-SPR",
                        e,
                        format!(
                            "no stabilising signature applicable: `{diffusion}` at ({})",
                            show_sorts(&sorts)
                        ),
                    );
                };
                let Some(s) = s0.lub(&sig.result) else {
                    return Self::fail("S-SPR", e, format!("{s0} and {} have no lub", sig.result));
                };
                Ok((s.clone(), Derivation::new("S-SPR", e, format!("{s} by {diffusion}: {sig}"), prem)))
            }
        }
    }
}

fn show_sorts(s: &[Sort]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// The signatures a definition must be checked against: its sort
/// signatures, plus its stabilising signatures when it is a diffusion.
pub fn signatures_to_check(def: &FunctionDef, reg: &SignatureRegistry) -> Vec<SortSignature> {
    let Some(entry) = reg.get(&def.name) else { return vec![] };
    let mut sigs = entry.sorts.clone();
    if entry.is_diffusion() {
        for s in &entry.stab {
            if !sigs.contains(s) {
                sigs.push(s.clone());
            }
        }
    }
    sigs
}

#[derive(Debug, Clone)]
pub struct DefReport {
    pub name: String,
    pub derivations: Vec<(SortSignature, Derivation)>,
}

/// Check one definition at a single signature.
#[allow(clippy::result_large_err)]
pub fn check_at(
    def: &FunctionDef,
    sig: &SortSignature,
    checker: &mut SortChecker,
) -> Result<Derivation, (String, SortError)> {
    let env: SortEnv = def.params.iter().map(|p| p.name.clone()).zip(sig.args.iter().cloned()).collect();
    let (s, d) = checker.sort_of(&env, &def.body).map_err(|err| (sig.to_string(), err))?;
    if !s.leq(&sig.result) {
        let msg = format!("body has sort {s}, not below declared {}", sig.result);
        return Err((sig.to_string(), SortError { rule: "S-DEF", message: msg, expr: def.body.clone() }));
    }
    Ok(Derivation::new("S-DEF", &def.body, format!("{}: {sig}", def.name), vec![d]))
}

#[allow(clippy::result_large_err)]
pub fn check_function_sorts(
    def: &FunctionDef,
    reg: &SignatureRegistry,
    warnings: &mut Vec<Diagnostic>,
) -> Result<DefReport, Diagnostic> {
    let mut checker = SortChecker::new(reg);
    let mut derivations = Vec::new();
    let result = (|| {
        for sig in signatures_to_check(def, reg) {
            let d = check_at(def, &sig, &mut checker)?;
            derivations.push((sig, d));
        }
        Ok(())
    })();
    for (e, msg) in checker.warnings.drain(..) {
        let w = Diagnostic::warning(SourceLocation::new(&def.location.file, e.pos), "S-SNS", msg);
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    match result {
        Ok(()) => Ok(DefReport { name: def.name.clone(), derivations }),
        Err((sig, err)) => Err(Diagnostic::error(
            SourceLocation::new(&def.location.file, err.expr.pos),
            err.rule,
            format!("`{}` at {sig}: {}", def.name, err.message),
        )),
    }
}

pub struct SortReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
    pub defs: Vec<DefReport>,
}

pub fn check_program_sorts(program: &Program, reg: &SignatureRegistry) -> SortReport {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut defs = Vec::new();
    for def in program.defs.values() {
        match check_function_sorts(def, reg, &mut warnings) {
            Ok(r) => defs.push(r),
            Err(d) => errors.push(d),
        }
    }
    SortReport { errors, warnings, defs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;

    #[test]
    fn hop_count_is_zpr() {
        let reg = SignatureRegistry::builtins();
        let e = parse_expr("{ #src : @ + #dist }").unwrap();
        let (s, d) = SortChecker::new(&reg).sort_of(&SortEnv::new(), &e).ok().unwrap();
        assert_eq!(s.to_string(), "zpr");
        assert_eq!(d.rules(), vec!["S-SPR", "S-SNS", "S-SNS"]);
    }

    #[test]
    fn conditional_rules() {
        let reg = SignatureRegistry::builtins();
        let env: SortEnv = [("x".to_string(), Sort::Ground(GroundSort::Zr))].into();
        let e = parse_expr("TRUE ? x : 1").unwrap();
        let (s, _) = SortChecker::new(&reg).sort_of(&env, &e).ok().unwrap();
        assert_eq!(s.to_string(), "zr");
        let env: SortEnv = [("c".to_string(), Sort::Ground(GroundSort::Bool))].into();
        let e = parse_expr("c ? 0 : POSINF").unwrap();
        let (s, _) = SortChecker::new(&reg).sort_of(&env, &e).ok().unwrap();
        assert_eq!(s.to_string(), "zpr");
    }

    #[test]
    fn undeclared_sensor_warns() {
        let reg = SignatureRegistry::builtins();
        let e = parse_expr("#temp + 1").unwrap();
        let mut c = SortChecker::new(&reg);
        let (s, _) = c.sort_of(&SortEnv::new(), &e).ok().unwrap();
        assert_eq!(s.to_string(), "real");
        assert_eq!(c.warnings.len(), 1);
    }
}
