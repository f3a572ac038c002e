//! Expressions, function definitions and programs.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::Serialize;

use crate::sort::{Annotation, Sort};
use crate::value::{GroundValue, TypeExpr, Value};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceLocation {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
}

impl SourceLocation {
    pub fn new(file: &Arc<str>, pos: Pos) -> Self {
        SourceLocation { file: file.clone(), line: pos.line, column: pos.column }
    }

    pub fn unknown() -> Self {
        SourceLocation { file: Arc::from("<unknown>"), line: 0, column: 0 }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: SourceLocation,
    pub rule_name: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(location: SourceLocation, rule: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, location, rule_name: rule.into(), message: message.into() }
    }

    pub fn warning(location: SourceLocation, rule: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, location, rule_name: rule.into(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}[{}]: {}", self.location, self.rule_name, self.message)
    }
}

/// An expression node. Equality ignores source positions.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Var(String),
    Sensor(String),
    Lit(GroundValue),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
    Apply(String, Vec<Expr>),
    /// `{ source : diffusion(@, args...) }`
    Spread { source: Box<Expr>, diffusion: String, args: Vec<Expr> },
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr { kind, pos: Pos::default() }
    }

    pub fn at(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }

    pub fn var(x: &str) -> Self {
        Expr::new(ExprKind::Var(x.to_string()))
    }

    pub fn sensor(s: &str) -> Self {
        Expr::new(ExprKind::Sensor(s.to_string()))
    }

    pub fn lit(g: GroundValue) -> Self {
        Expr::new(ExprKind::Lit(g))
    }

    pub fn real(x: f64) -> Self {
        Expr::lit(GroundValue::real(x).expect("not NaN"))
    }

    pub fn apply(f: &str, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Apply(f.to_string(), args))
    }

    pub fn pair(a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::Pair(Box::new(a), Box::new(b)))
    }

    pub fn fst(e: Expr) -> Self {
        Expr::new(ExprKind::Fst(Box::new(e)))
    }

    pub fn snd(e: Expr) -> Self {
        Expr::new(ExprKind::Snd(Box::new(e)))
    }

    pub fn cond(c: Expr, a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::Cond(Box::new(c), Box::new(a), Box::new(b)))
    }

    pub fn spread(source: Expr, diffusion: &str, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Spread { source: Box::new(source), diffusion: diffusion.to_string(), args })
    }

    /// Direct subexpressions in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Sensor(_) | ExprKind::Lit(_) => vec![],
            ExprKind::Pair(a, b) => vec![a, b],
            ExprKind::Fst(e) | ExprKind::Snd(e) => vec![e],
            ExprKind::Cond(c, a, b) => vec![c, a, b],
            ExprKind::Apply(_, args) => args.iter().collect(),
            ExprKind::Spread { source, args, .. } => std::iter::once(source.as_ref()).chain(args).collect(),
        }
    }

    /// All function names referenced, including spread diffusions.
    pub fn called_functions(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            ExprKind::Apply(f, _) => {
                out.insert(f.clone());
            }
            ExprKind::Spread { diffusion, .. } => {
                out.insert(diffusion.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.called_functions(out);
        }
    }

    pub fn contains_spread(&self) -> bool {
        matches!(self.kind, ExprKind::Spread { .. }) || self.children().iter().any(|c| c.contains_spread())
    }

    pub fn contains_sensor(&self) -> bool {
        matches!(self.kind, ExprKind::Sensor(_)) || self.children().iter().any(|c| c.contains_sensor())
    }

    pub fn sensors(&self, out: &mut BTreeSet<String>) {
        if let ExprKind::Sensor(s) = &self.kind {
            out.insert(s.clone());
        }
        for c in self.children() {
            c.sensors(out);
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        if let ExprKind::Var(x) = &self.kind {
            out.insert(x.clone());
        }
        for c in self.children() {
            c.free_vars(out);
        }
    }

    /// The value this expression denotes once variables are replaced by
    /// `env`, if it is built from values and pair constructors only.
    pub fn as_value(&self, env: &HashMap<String, Value>) -> Option<Value> {
        match &self.kind {
            ExprKind::Lit(g) => Some(Value::Ground(*g)),
            ExprKind::Var(x) => env.get(x).cloned(),
            ExprKind::Pair(a, b) => Some(Value::pair(a.as_value(env)?, b.as_value(env)?)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: TypeExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortSignature {
    pub result: Sort,
    pub args: Vec<Sort>,
}

impl SortSignature {
    pub fn new(result: impl Into<Sort>, args: Vec<Sort>) -> Self {
        SortSignature { result: result.into(), args }
    }

    /// Subsigning: covariant result, contravariant arguments.
    pub fn leq(&self, other: &SortSignature) -> bool {
        self.args.len() == other.args.len()
            && self.result.leq(&other.result)
            && other.args.iter().zip(&self.args).all(|(a, b)| a.leq(b))
    }

    /// Stabilising subsigning.
    pub fn stab_leq(&self, other: &SortSignature) -> bool {
        if self.args.len() != other.args.len() || self.args.is_empty() {
            return false;
        }
        self.result.prog_leq(&other.result)
            && other.args[0].prog_leq(&self.args[0])
            && other.args[1..].iter().zip(&self.args[1..]).all(|(a, b)| a.leq(b))
    }

    /// Result and first argument coincide and the result is progressively
    /// below the first argument.
    pub fn is_progressive(&self) -> bool {
        !self.args.is_empty() && self.result.prog_leq(&self.args[0])
    }

    pub fn args_accept(&self, actual: &[Sort]) -> bool {
        actual.len() == self.args.len() && actual.iter().zip(&self.args).all(|(a, s)| a.leq(s))
    }
}

impl fmt::Display for SortSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.result)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSignature {
    pub support: SortSignature,
    pub ann: Annotation,
}

impl AnnotatedSignature {
    pub fn new(support: SortSignature, ann: Annotation) -> Self {
        AnnotatedSignature { support, ann }
    }

    pub fn leq(&self, other: &AnnotatedSignature) -> bool {
        self.support.stab_leq(&other.support) && self.ann.leq(other.ann)
    }
}

impl fmt::Display for AnnotatedSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.support, self.ann.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub result: TypeExpr,
    pub params: Vec<Param>,
    pub body: Expr,
    pub declared_sorts: Vec<SortSignature>,
    pub declared_stab: Vec<SortSignature>,
    pub declared_ann: Vec<AnnotatedSignature>,
    pub location: SourceLocation,
}

impl FunctionDef {
    pub fn new(name: &str, result: TypeExpr, params: Vec<(&str, TypeExpr)>, body: Expr) -> Self {
        FunctionDef {
            name: name.to_string(),
            result,
            params: params.into_iter().map(|(n, ty)| Param { name: n.to_string(), ty }).collect(),
            body,
            declared_sorts: vec![],
            declared_stab: vec![],
            declared_ann: vec![],
            location: SourceLocation::unknown(),
        }
    }

    pub fn param_types(&self) -> Vec<TypeExpr> {
        self.params.iter().map(|p| p.ty.clone()).collect()
    }

    pub fn type_signature(&self) -> SortSignature {
        SortSignature {
            result: Sort::trivial(&self.result),
            args: self.params.iter().map(|p| Sort::trivial(&p.ty)).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub defs: IndexMap<String, FunctionDef>,
}

impl Program {
    pub fn get(&self, name: &str) -> Option<&FunctionDef> {
        self.defs.get(name)
    }

    pub fn main(&self) -> Option<&FunctionDef> {
        self.defs.get("main")
    }

    /// Merge several parsed units, later ones last. Names are assumed
    /// distinct (the parser reports duplicates).
    pub fn merge(parts: impl IntoIterator<Item = Program>) -> Program {
        let mut defs = IndexMap::new();
        for p in parts {
            for (k, v) in p.defs {
                defs.entry(k).or_insert(v);
            }
        }
        Program { defs }
    }
}
