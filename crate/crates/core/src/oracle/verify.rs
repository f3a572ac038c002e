//! Grid checks of the stabilising and pre-stabilising conditions.

use std::fmt;

use crate::ast::{AnnotatedSignature, SortSignature};
use crate::eval::EvalError;
use crate::sort::{key_eq, key_leq, key_lt, Annotation};
use crate::value::Value;

use super::grid::SampleGrid;

const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub clause: &'static str,
    pub args: Vec<Value>,
    /// The larger first argument, for monotonicity clauses.
    pub other: Option<Value>,
    pub detail: String,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(|v| v.to_string()).collect();
        write!(f, "{} at ({})", self.clause, args.join(","))?;
        if let Some(o) = &self.other {
            write!(f, " vs first argument {o}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    Pass { checked: usize },
    Fail(Vec<Witness>),
}

impl OracleVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, OracleVerdict::Pass { .. })
    }

    pub fn witnesses(&self) -> &[Witness] {
        match self {
            OracleVerdict::Pass { .. } => &[],
            OracleVerdict::Fail(w) => w,
        }
    }
}

struct Collector {
    witnesses: Vec<Witness>,
    checked: usize,
}

impl Collector {
    fn check(&mut self, ok: bool, w: impl FnOnce() -> Witness) {
        self.checked += 1;
        if !ok && self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w());
        }
    }

    fn finish(self) -> OracleVerdict {
        if self.witnesses.is_empty() {
            OracleVerdict::Pass { checked: self.checked }
        } else {
            OracleVerdict::Fail(self.witnesses)
        }
    }
}

fn with_first(first: &Value, rest: &[Value]) -> Vec<Value> {
    let mut v = vec![first.clone()];
    v.extend(rest.iter().cloned());
    v
}

/// Evaluates `f` on every grid point, recording evaluation failures and
/// results outside the declared result sort.
fn tabulate<F>(f: &F, sig: &SortSignature, grid: &SampleGrid, c: &mut Collector) -> Vec<(Vec<Value>, Option<Value>)>
where
    F: Fn(&[Value]) -> Result<Value, EvalError>,
{
    grid.tuples(&sig.args)
        .into_iter()
        .map(|args| match f(&args) {
            Ok(v) => {
                let inside = sig.result.contains(&v);
                c.check(inside, || Witness {
                    clause: "result sort",
                    args: args.clone(),
                    other: None,
                    detail: format!("result {v} is not in {}", sig.result),
                });
                (args, Some(v))
            }
            Err(e) => {
                c.check(false, || Witness { clause: "evaluation", args: args.clone(), other: None, detail: e.to_string() });
                (args, None)
            }
        })
        .collect()
}

fn lookup<'t>(table: &'t [(Vec<Value>, Option<Value>)], args: &[Value]) -> Option<&'t Value> {
    table.iter().find(|(a, _)| a == args).and_then(|(_, v)| v.as_ref())
}

/// Stabilising: monotone nondecreasing in the first argument, the top of
/// the first sort is a fixpoint, and every other value strictly inflates.
pub fn verify_stabilising<F>(f: F, sig: &SortSignature, grid: &SampleGrid) -> OracleVerdict
where
    F: Fn(&[Value]) -> Result<Value, EvalError>,
{
    let mut c = Collector { witnesses: vec![], checked: 0 };
    if !sig.is_progressive() {
        c.check(false, || Witness {
            clause: "progressive signature",
            args: vec![],
            other: None,
            detail: format!("{sig} is not progressive"),
        });
        return c.finish();
    }
    let table = tabulate(&f, sig, grid, &mut c);
    let firsts = grid.values(&sig.args[0]);
    let top = sig.args[0].top();
    for rest in grid.tuples(&sig.args[1..]) {
        for v in &firsts {
            let Some(fv) = lookup(&table, &with_first(v, &rest)) else { continue };
            if *v == top {
                c.check(*fv == top, || Witness {
                    clause: "top fixpoint",
                    args: with_first(v, &rest),
                    other: None,
                    detail: format!("f(top) = {fv}, expected {top}"),
                });
            } else {
                c.check(v.lt(fv), || Witness {
                    clause: "strict inflation",
                    args: with_first(v, &rest),
                    other: None,
                    detail: format!("{v} is not below f = {fv}"),
                });
            }
            for w in firsts.iter().filter(|w| v.lt(w)) {
                let Some(fw) = lookup(&table, &with_first(w, &rest)) else { continue };
                c.check(fv.leq(fw), || Witness {
                    clause: "monotonicity",
                    args: with_first(v, &rest),
                    other: Some(w.clone()),
                    detail: format!("f = {fv} exceeds {fw}"),
                });
            }
        }
    }
    c.finish()
}

/// Pre-stabilising under the key order. Both annotations require key
/// monotonicity and key inflation; `!` further requires strict key
/// monotonicity away from the top key and strict key inflation for every
/// value whose key is not the top key.
pub fn verify_prestabilising<F>(f: F, asig: &AnnotatedSignature, grid: &SampleGrid) -> OracleVerdict
where
    F: Fn(&[Value]) -> Result<Value, EvalError>,
{
    let sig = &asig.support;
    let mut c = Collector { witnesses: vec![], checked: 0 };
    if !sig.is_progressive() {
        c.check(false, || Witness {
            clause: "progressive signature",
            args: vec![],
            other: None,
            detail: format!("{sig} is not progressive"),
        });
        return c.finish();
    }
    let table = tabulate(&f, sig, grid, &mut c);
    let firsts = grid.values(&sig.args[0]);
    let top = sig.args[0].top();
    let certain = asig.ann == Annotation::Bang;
    for rest in grid.tuples(&sig.args[1..]) {
        for v in &firsts {
            let Some(fv) = lookup(&table, &with_first(v, &rest)) else { continue };
            c.check(key_leq(v, fv), || Witness {
                clause: "key inflation",
                args: with_first(v, &rest),
                other: None,
                detail: format!("key of {v} exceeds key of f = {fv}"),
            });
            if certain && !key_eq(v, &top) {
                c.check(key_lt(v, fv), || Witness {
                    clause: "strict key inflation",
                    args: with_first(v, &rest),
                    other: None,
                    detail: format!("key of {v} is not below key of f = {fv}"),
                });
            }
            for w in &firsts {
                if !key_leq(v, w) {
                    continue;
                }
                let Some(fw) = lookup(&table, &with_first(w, &rest)) else { continue };
                c.check(key_leq(fv, fw), || Witness {
                    clause: "key monotonicity",
                    args: with_first(v, &rest),
                    other: Some(w.clone()),
                    detail: format!("key of f = {fv} exceeds key of {fw}"),
                });
                if certain && key_lt(v, w) && !key_eq(fv, &top) {
                    c.check(key_lt(fv, fw), || Witness {
                        clause: "strict key monotonicity",
                        args: with_first(v, &rest),
                        other: Some(w.clone()),
                        detail: format!("key of f = {fv} is not below key of {fw}"),
                    });
                }
            }
        }
    }
    c.finish()
}
