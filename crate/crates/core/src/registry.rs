//! Built-in functions, declared signature sets and their resolution.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use indexmap::IndexMap;

use crate::ast::{AnnotatedSignature, FunctionDef, Program, SortSignature};
use crate::parser::{parse_annotated_signature, parse_signature};
use crate::sort::{AnnotatedSort, Sort};
use crate::value::TypeExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Not,
    Or,
    Neg,
    Add,
    Eq,
    Lt,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [Builtin::Not, Builtin::Or, Builtin::Neg, Builtin::Add, Builtin::Eq, Builtin::Lt];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Not => "not",
            Builtin::Or => "or",
            Builtin::Neg => "-",
            Builtin::Add => "+",
            Builtin::Eq => "=",
            Builtin::Lt => "<",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn type_signature(self) -> (TypeExpr, Vec<TypeExpr>) {
        use TypeExpr::{Bool, Real};
        match self {
            Builtin::Not => (Bool, vec![Bool]),
            Builtin::Or => (Bool, vec![Bool, Bool]),
            Builtin::Neg => (Real, vec![Real]),
            Builtin::Add => (Real, vec![Real, Real]),
            Builtin::Eq | Builtin::Lt => (Bool, vec![Real, Real]),
        }
    }

    fn sort_table(self) -> &'static [&'static str] {
        match self {
            Builtin::Not => &["true(false)", "false(true)", "bool(bool)"],
            Builtin::Or => &["false(false,false)", "true(true,bool)", "true(bool,true)", "bool(bool,bool)"],
            Builtin::Neg => &["nr(pr)", "znr(zpr)", "zr(zr)", "zpr(znr)", "pr(nr)", "real(real)"],
            Builtin::Add => &[
                "nr(nr,znr)",
                "nr(znr,nr)",
                "znr(znr,znr)",
                "zr(zr,zr)",
                "zpr(zpr,zpr)",
                "pr(zpr,pr)",
                "pr(pr,zpr)",
                "real(real,real)",
            ],
            Builtin::Eq => &[
                "false(znr,pr)",
                "false(nr,zpr)",
                "false(zpr,nr)",
                "false(pr,znr)",
                "true(zr,zr)",
                "bool(real,real)",
            ],
            Builtin::Lt => &[
                "false(zpr,nr)",
                "false(pr,znr)",
                "false(zr,zr)",
                "true(nr,zpr)",
                "true(znr,pr)",
                "bool(real,real)",
            ],
        }
    }

    fn stab_table(self) -> &'static [&'static str] {
        match self {
            Builtin::Or => &["false(false,false)", "true(true,bool)", "true(bool,true)"],
            Builtin::Add => &["zr(zr,zr)", "pr(zpr,pr)", "real(real,pr)"],
            _ => &[],
        }
    }

    fn ann_table(self) -> &'static [&'static str] {
        match self {
            Builtin::Or => &["false(false,false)[!]", "true(true,bool)[!]", "true(bool,true)[!]"],
            Builtin::Add => &[
                "nr(nr,zr)[?]",
                "znr(znr,zr)[?]",
                "zr(zr,zr)[!]",
                "zpr(zpr,zpr)[?]",
                "pr(zpr,pr)[!]",
                "pr(pr,zpr)[?]",
                "real(real,zpr)[?]",
                "real(real,pr)[!]",
            ],
            _ => &[],
        }
    }
}

fn sigs(table: &[&str]) -> Vec<SortSignature> {
    table.iter().map(|s| parse_signature(s).expect("built-in signature")).collect()
}

fn ann_sigs(table: &[&str]) -> Vec<AnnotatedSignature> {
    table.iter().map(|s| parse_annotated_signature(s).expect("built-in signature")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    Builtin(Builtin),
    User,
}

#[derive(Debug, Clone)]
pub struct FunctionEntry {
    pub name: String,
    pub result: TypeExpr,
    pub params: Vec<TypeExpr>,
    pub sorts: Vec<SortSignature>,
    pub stab: Vec<SortSignature>,
    pub ann: Vec<AnnotatedSignature>,
    pub kind: FunctionKind,
    pub pure: bool,
}

impl FunctionEntry {
    pub fn type_signature(&self) -> SortSignature {
        SortSignature { result: Sort::trivial(&self.result), args: self.params.iter().map(Sort::trivial).collect() }
    }

    /// Pure, with at least one argument whose type is the result type.
    pub fn is_diffusion(&self) -> bool {
        self.pure && self.params.first() == Some(&self.result)
    }

    pub fn is_builtin(&self) -> bool {
        matches!(self.kind, FunctionKind::Builtin(_))
    }

    /// Supports of the `[!]` entries.
    pub fn certain_supports(&self) -> Vec<SortSignature> {
        self.ann
            .iter()
            .filter(|a| a.ann == crate::sort::Annotation::Bang)
            .map(|a| a.support.clone())
            .collect()
    }
}

/// Declared refinement sorts of sensors. `#src` is `zpr` and `#dist` is
/// `pr` unless overridden.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorCatalog {
    pub sorts: BTreeMap<String, Sort>,
}

impl Default for SensorCatalog {
    fn default() -> Self {
        let mut sorts = BTreeMap::new();
        sorts.insert("src".to_string(), Sort::Ground(crate::sort::GroundSort::Zpr));
        sorts.insert("dist".to_string(), Sort::Ground(crate::sort::GroundSort::Pr));
        SensorCatalog { sorts }
    }
}

impl SensorCatalog {
    pub fn declare(&mut self, name: &str, sort: Sort) {
        self.sorts.insert(name.to_string(), sort);
    }

    pub fn sort_of(&self, name: &str) -> Option<&Sort> {
        self.sorts.get(name)
    }

    pub fn type_of(&self, name: &str) -> Option<TypeExpr> {
        self.sorts.get(name).map(Sort::base_type)
    }
}

#[derive(Debug, Clone)]
pub struct SignatureRegistry {
    entries: IndexMap<String, FunctionEntry>,
    pub sensors: SensorCatalog,
}

fn minimal_signatures(sigs: &[SortSignature]) -> Vec<SortSignature> {
    let mut out: Vec<SortSignature> = Vec::new();
    for s in sigs {
        if out.contains(s) {
            continue;
        }
        if !sigs.iter().any(|o| o != s && o.leq(s)) {
            out.push(s.clone());
        }
    }
    out
}

fn compute_purity(program: &Program) -> HashMap<String, bool> {
    fn visit(name: &str, program: &Program, memo: &mut HashMap<String, bool>, stack: &mut Vec<String>) -> bool {
        if let Some(p) = memo.get(name) {
            return *p;
        }
        let Some(def) = program.get(name) else {
            return Builtin::from_name(name).is_some();
        };
        if stack.iter().any(|s| s == name) {
            return false;
        }
        stack.push(name.to_string());
        let mut pure = !def.body.contains_spread() && !def.body.contains_sensor();
        if pure {
            let mut called = Default::default();
            def.body.called_functions(&mut called);
            pure = called.iter().all(|g| visit(g, program, memo, stack));
        }
        stack.pop();
        memo.insert(name.to_string(), pure);
        pure
    }
    let mut memo = HashMap::new();
    for name in program.defs.keys() {
        visit(name, program, &mut memo, &mut Vec::new());
    }
    memo
}

impl SignatureRegistry {
    pub fn builtins() -> Self {
        let mut entries = IndexMap::new();
        for b in Builtin::ALL {
            let (result, params) = b.type_signature();
            entries.insert(
                b.name().to_string(),
                FunctionEntry {
                    name: b.name().to_string(),
                    result,
                    params,
                    sorts: sigs(b.sort_table()),
                    stab: sigs(b.stab_table()),
                    ann: ann_sigs(b.ann_table()),
                    kind: FunctionKind::Builtin(b),
                    pure: true,
                },
            );
        }
        SignatureRegistry { entries, sensors: SensorCatalog::default() }
    }

    /// Built-ins plus every user definition. A user function without `@sig`
    /// gets the minimal elements of its type signature and its `@stab` set.
    pub fn new(program: &Program, sensors: SensorCatalog) -> Self {
        let mut reg = SignatureRegistry::builtins();
        reg.sensors = sensors;
        let purity = compute_purity(program);
        for def in program.defs.values() {
            reg.entries.insert(def.name.clone(), user_entry(def, purity.get(&def.name).copied().unwrap_or(false)));
        }
        reg
    }

    pub fn get(&self, name: &str) -> Option<&FunctionEntry> {
        self.entries.get(name)
    }

    pub fn entries(&self) -> impl Iterator<Item = &FunctionEntry> {
        self.entries.values()
    }

    pub fn is_pure(&self, name: &str) -> bool {
        self.get(name).is_some_and(|e| e.pure)
    }

    pub fn is_diffusion(&self, name: &str) -> bool {
        self.get(name).is_some_and(FunctionEntry::is_diffusion)
    }
}

fn user_entry(def: &FunctionDef, pure: bool) -> FunctionEntry {
    let sorts = if def.declared_sorts.is_empty() {
        let mut all = vec![def.type_signature()];
        all.extend(def.declared_stab.iter().cloned());
        minimal_signatures(&all)
    } else {
        def.declared_sorts.clone()
    };
    FunctionEntry {
        name: def.name.clone(),
        result: def.result.clone(),
        params: def.param_types(),
        sorts,
        stab: def.declared_stab.clone(),
        ann: def.declared_ann.clone(),
        kind: FunctionKind::User,
        pure,
    }
}

/// The applicable signature whose result is below every other applicable
/// result, if any.
pub fn most_specific<'a>(set: &'a [SortSignature], args: &[Sort]) -> Option<&'a SortSignature> {
    let applicable: Vec<&SortSignature> = set.iter().filter(|s| s.args_accept(args)).collect();
    applicable
        .iter()
        .copied()
        .find(|s| applicable.iter().all(|o| s.result.leq(&o.result)))
}

/// Annotated resolution: the first argument carries an annotated sort, the
/// rest plain sorts. Returns the chosen entry and the resulting annotated
/// sort of the application.
pub fn most_specific_annotated<'a>(
    set: &'a [AnnotatedSignature],
    first: &AnnotatedSort,
    rest: &[Sort],
) -> Option<(&'a AnnotatedSignature, AnnotatedSort)> {
    let applicable: Vec<(&AnnotatedSignature, AnnotatedSort)> = set
        .iter()
        .filter(|a| {
            let s = &a.support;
            s.args.len() == rest.len() + 1
                && first.sort.key().prog_leq(s.args[0].key())
                && first.sort.leq(&s.args[0])
                && rest.iter().zip(&s.args[1..]).all(|(x, y)| x.leq(y))
        })
        .map(|a| (a, AnnotatedSort::new(a.support.result.clone(), a.ann.compose(first.ann))))
        .collect();
    applicable
        .iter()
        .find(|(_, r)| applicable.iter().all(|(_, o)| r.leq(o)))
        .cloned()
}

/// Every tuple of sorts refining the given types.
pub fn refining_tuples(types: &[TypeExpr]) -> Vec<Vec<Sort>> {
    let mut out = vec![vec![]];
    for t in types {
        let choices = Sort::all_refining(t);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c.clone());
                    v
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetProblem {
    NotMinimal(String, String),
    NotDeterministic(String),
}

impl fmt::Display for SetProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetProblem::NotMinimal(a, b) => write!(f, "{a} is below {b}, so the set is not minimised"),
            SetProblem::NotDeterministic(args) => write!(f, "no most specific signature for arguments ({args})"),
        }
    }
}

pub fn check_minimal(set: &[SortSignature]) -> Result<(), SetProblem> {
    for a in set {
        for b in set {
            if a != b && a.leq(b) {
                return Err(SetProblem::NotMinimal(a.to_string(), b.to_string()));
            }
        }
    }
    Ok(())
}

pub fn check_minimal_annotated(set: &[AnnotatedSignature]) -> Result<(), SetProblem> {
    for a in set {
        for b in set {
            if a != b && a.leq(b) {
                return Err(SetProblem::NotMinimal(a.to_string(), b.to_string()));
            }
        }
    }
    Ok(())
}

fn show_tuple(args: &[Sort]) -> String {
    args.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

pub fn check_deterministic(set: &[SortSignature], params: &[TypeExpr]) -> Result<(), SetProblem> {
    for args in refining_tuples(params) {
        let any = set.iter().any(|s| s.args_accept(&args));
        if any && most_specific(set, &args).is_none() {
            return Err(SetProblem::NotDeterministic(show_tuple(&args)));
        }
    }
    Ok(())
}

pub fn check_deterministic_annotated(set: &[AnnotatedSignature], params: &[TypeExpr]) -> Result<(), SetProblem> {
    use crate::sort::Annotation;
    if params.is_empty() {
        return Ok(());
    }
    for args in refining_tuples(params) {
        for ann in [Annotation::Bang, Annotation::Question] {
            let first = AnnotatedSort::new(args[0].clone(), ann);
            let any = set.iter().any(|a| {
                let s = &a.support;
                first.sort.key().prog_leq(s.args[0].key())
                    && first.sort.leq(&s.args[0])
                    && args[1..].iter().zip(&s.args[1..]).all(|(x, y)| x.leq(y))
            });
            if any && most_specific_annotated(set, &first, &args[1..]).is_none() {
                return Err(SetProblem::NotDeterministic(format!("{first},{}", show_tuple(&args[1..]))));
            }
        }
    }
    Ok(())
}

/// The progressively least result among a set of signatures, if there is one.
pub fn least_progressive_result(set: &[SortSignature]) -> Option<Sort> {
    set.iter()
        .map(|s| &s.result)
        .find(|r| set.iter().all(|o| r.prog_leq(&o.result)))
        .cloned()
}
