//! Annotated sort checking of diffusions: tracks how the first parameter
//! flows to the result and whether the flow is certainly progressive (`!`)
//! or only possibly so (`?`).

use crate::ast::{AnnotatedSignature, Diagnostic, Expr, ExprKind, FunctionDef, Program, SourceLocation};
use crate::registry::{most_specific_annotated, SignatureRegistry};
use crate::sort::{AnnotatedSort, Annotation, GroundSort, Sort};
use crate::sortcheck::{Derivation, SortChecker, SortEnv, SortError};

/// The tracked variable and its sort, plus plain sorts for the rest.
pub struct AnnEnv {
    pub tracked: String,
    pub tracked_sort: Sort,
    pub rest: SortEnv,
}

impl AnnEnv {
    /// Erasure: every variable with a plain sort.
    fn erased(&self) -> SortEnv {
        let mut env = self.rest.clone();
        env.insert(self.tracked.clone(), self.tracked_sort.clone());
        env
    }
}

pub struct AnnotatedChecker<'a> {
    pub registry: &'a SignatureRegistry,
}

type AResult = Result<(AnnotatedSort, Derivation), SortError>;

fn fail<T>(rule: &'static str, e: &Expr, message: String) -> Result<T, SortError> {
    Err(SortError { rule, message, expr: e.clone() })
}

impl<'a> AnnotatedChecker<'a> {
    pub fn new(registry: &'a SignatureRegistry) -> Self {
        AnnotatedChecker { registry }
    }

    fn plain(&self, env: &AnnEnv, e: &Expr) -> Result<(Sort, Derivation), SortError> {
        SortChecker::new(self.registry).sort_of(&env.erased(), e)
    }

    pub fn atype_of(&self, env: &AnnEnv, e: &Expr) -> AResult {
        match &e.kind {
            ExprKind::Var(x) if *x == env.tracked => {
                let a = AnnotatedSort::new(env.tracked_sort.clone(), Annotation::Question);
                Ok((a.clone(), Derivation::new("A-VAR", e, a, vec![])))
            }
            ExprKind::Var(x) => fail("A-VAR", e, format!("`{x}` is not the tracked parameter `{}`", env.tracked)),
            ExprKind::Lit(g) => {
                let top = env.tracked_sort.key().top();
                if *g != top {
                    return fail("A-GVAL", e, format!("literal {g} is not the top key {top} of the tracked sort"));
                }
                let a = AnnotatedSort::new(Sort::Ground(GroundSort::min_of(*g)), Annotation::Bang);
                Ok((a.clone(), Derivation::new("A-GVAL", e, a, vec![])))
            }
            ExprKind::Pair(l, r) => {
                let (al, dl) = self.atype_of(env, l)?;
                let (sr, dr) = self.plain(env, r)?;
                let a = AnnotatedSort::new(Sort::pair(al.sort, sr), al.ann);
                Ok((a.clone(), Derivation::new("A-PAIR", e, a, vec![dl, dr])))
            }
            ExprKind::Fst(inner) => {
                let (ai, di) = self.atype_of(env, inner)?;
                match ai.sort {
                    Sort::Pair(l, _) => {
                        let a = AnnotatedSort::new(*l, ai.ann);
                        Ok((a.clone(), Derivation::new("A-FST", e, a, vec![di])))
                    }
                    other => fail("A-FST", e, format!("projection of non-pair sort {other}")),
                }
            }
            ExprKind::Cond(c, l, r) => {
                let (sc, dc) = self.plain(env, c)?;
                match sc {
                    Sort::Ground(GroundSort::True) => {
                        let (al, dl) = self.atype_of(env, l)?;
                        let (_, dr) = self.plain(env, r)?;
                        Ok((al.clone(), Derivation::new("A-COND-TRUE", e, al, vec![dc, dl, dr])))
                    }
                    Sort::Ground(GroundSort::False) => {
                        let (_, dl) = self.plain(env, l)?;
                        let (ar, dr) = self.atype_of(env, r)?;
                        Ok((ar.clone(), Derivation::new("A-COND-FALSE", e, ar, vec![dc, dl, dr])))
                    }
                    Sort::Ground(GroundSort::Bool) => {
                        let (al, dl) = self.atype_of(env, l)?;
                        let (ar, dr) = self.atype_of(env, r)?;
                        let Some(a) = al.lub(&ar) else {
                            return fail("A-COND", e, format!("branches {al} and {ar} have no lub"));
                        };
                        Ok((a.clone(), Derivation::new("A-COND", e, a, vec![dc, dl, dr])))
                    }
                    other => fail("A-COND", e, format!("condition has sort {other}")),
                }
            }
            ExprKind::Apply(f, args) => {
                let Some((first, rest)) = args.split_first() else {
                    return fail("A-FUN", e, format!("`{f}` has no argument to track"));
                };
                let (a1, d1) = self.atype_of(env, first)?;
                let mut sorts = Vec::new();
                let mut prem = vec![d1];
                for a in rest {
                    let (s, d) = self.plain(env, a)?;
                    sorts.push(s);
                    prem.push(d);
                }
                let Some(entry) = self.registry.get(f) else {
                    return fail("A-FUN", e, format!("undefined function `{f}`"));
                };
                match most_specific_annotated(&entry.ann, &a1, &sorts) {
                    Some((sig, res)) => {
                        Ok((res.clone(), Derivation::new("A-FUN", e, format!("{res} by {f}: {sig}"), prem)))
                    }
                    None => fail(
                        "A-FUN",
                        e,
                        format!(
                            "no annotated signature of `{f}` applicable to ({a1}{})",
                            sorts.iter().map(|s| format!(",{s}")).collect::<String>()
                        ),
                    ),
                }
            }
            ExprKind::Snd(_) => fail("A-SND", e, "the tracked value cannot flow through `snd`".into()),
            ExprKind::Sensor(s) => fail("A-SNS", e, format!("sensor `#{s}` in a diffusion")),
            ExprKind::Spread { .. } => fail("A-SPR", e, "spreading inside a diffusion".into()),
        }
    }
}

pub fn check_at(def: &FunctionDef, sig: &AnnotatedSignature, reg: &SignatureRegistry) -> Result<Derivation, SortError> {
    let Some((first, rest)) = def.params.split_first() else {
        return fail("A-DEF", &def.body, "a diffusion needs at least one parameter".into());
    };
    let env = AnnEnv {
        tracked: first.name.clone(),
        tracked_sort: sig.support.args[0].clone(),
        rest: rest.iter().map(|p| p.name.clone()).zip(sig.support.args[1..].iter().cloned()).collect(),
    };
    let (a, d) = AnnotatedChecker::new(reg).atype_of(&env, &def.body)?;
    let declared = AnnotatedSort::new(sig.support.result.clone(), sig.ann);
    if !a.leq(&declared) {
        return fail("A-DEF", &def.body, format!("body has annotated sort {a}, not below {declared}"));
    }
    Ok(Derivation::new("A-DEF", &def.body, format!("{}: {sig}", def.name), vec![d]))
}

pub fn check_function_annotations(
    def: &FunctionDef,
    reg: &SignatureRegistry,
) -> Result<Vec<(AnnotatedSignature, Derivation)>, Diagnostic> {
    let mut out = Vec::new();
    for sig in &def.declared_ann {
        match check_at(def, sig, reg) {
            Ok(d) => out.push((sig.clone(), d)),
            Err(err) => {
                return Err(Diagnostic::error(
                    SourceLocation::new(&def.location.file, err.expr.pos),
                    err.rule,
                    format!("`{}` at {sig}: {}", def.name, err.message),
                ))
            }
        }
    }
    Ok(out)
}

pub struct AnnotationReport {
    pub errors: Vec<Diagnostic>,
    pub derivations: Vec<(String, AnnotatedSignature, Derivation)>,
}

pub fn check_program_annotations(program: &Program, reg: &SignatureRegistry) -> AnnotationReport {
    let mut errors = Vec::new();
    let mut derivations = Vec::new();
    for def in program.defs.values() {
        match check_function_annotations(def, reg) {
            Ok(ds) => derivations.extend(ds.into_iter().map(|(s, d)| (def.name.clone(), s, d))),
            Err(e) => errors.push(e),
        }
    }
    AnnotationReport { errors, derivations }
}
