//! Sorts (refinement types), the subsort lattice, progressive subsorting,
//! tops, keys and annotated sorts.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::value::{GroundValue, TypeExpr, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundSort {
    Nr,
    Zr,
    Pr,
    Znr,
    Zpr,
    Real,
    False,
    True,
    Bool,
}

use GroundSort::*;

pub const REAL_SORTS: [GroundSort; 6] = [Nr, Zr, Pr, Znr, Zpr, Real];
pub const BOOL_SORTS: [GroundSort; 3] = [False, True, Bool];

/// Largest negative finite `f64`, used as the top of `nr`.
pub const NR_TOP: f64 = -5e-324;

impl GroundSort {
    pub fn name(self) -> &'static str {
        match self {
            Nr => "nr",
            Zr => "zr",
            Pr => "pr",
            Znr => "znr",
            Zpr => "zpr",
            Real => "real",
            False => "false",
            True => "true",
            Bool => "bool",
        }
    }

    pub fn base_type(self) -> TypeExpr {
        match self {
            False | True | Bool => TypeExpr::Bool,
            _ => TypeExpr::Real,
        }
    }

    pub fn all_of(t: &TypeExpr) -> &'static [GroundSort] {
        match t {
            TypeExpr::Real => &REAL_SORTS,
            TypeExpr::Bool => &BOOL_SORTS,
            TypeExpr::Pair(..) => &[],
        }
    }

    fn direct_supers(self) -> &'static [GroundSort] {
        match self {
            Nr => &[Znr],
            Zr => &[Znr, Zpr],
            Pr => &[Zpr],
            Znr | Zpr => &[Real],
            False | True => &[Bool],
            Real | Bool => &[],
        }
    }

    pub fn leq(self, other: GroundSort) -> bool {
        self == other || self.direct_supers().iter().any(|s| s.leq(other))
    }

    fn direct_prog_supers(self) -> &'static [GroundSort] {
        match self {
            True => &[Bool],
            Zpr => &[Real],
            Zr => &[Znr],
            Pr => &[Zpr],
            _ => &[],
        }
    }

    pub fn prog_leq(self, other: GroundSort) -> bool {
        self == other || self.direct_prog_supers().iter().any(|s| s.prog_leq(other))
    }

    pub fn top(self) -> GroundValue {
        match self {
            Nr => GroundValue::Real(NR_TOP),
            Zr | Znr => GroundValue::Real(0.0),
            Pr | Zpr | Real => GroundValue::POSINF,
            False => GroundValue::FALSE,
            True | Bool => GroundValue::TRUE,
        }
    }

    pub fn contains(self, g: GroundValue) -> bool {
        match (self, g) {
            (Nr, GroundValue::Real(x)) => x < 0.0,
            (Zr, GroundValue::Real(x)) => x == 0.0,
            (Pr, GroundValue::Real(x)) => x > 0.0,
            (Znr, GroundValue::Real(x)) => x <= 0.0,
            (Zpr, GroundValue::Real(x)) => x >= 0.0,
            (Real, GroundValue::Real(_)) => true,
            (False, GroundValue::Bool(b)) => !b,
            (True, GroundValue::Bool(b)) => b,
            (Bool, GroundValue::Bool(_)) => true,
            _ => false,
        }
    }

    /// Least ground sort containing `g`.
    pub fn min_of(g: GroundValue) -> GroundSort {
        match g {
            GroundValue::Bool(true) => True,
            GroundValue::Bool(false) => False,
            GroundValue::Real(x) if x < 0.0 => Nr,
            GroundValue::Real(0.0) => Zr,
            GroundValue::Real(_) => Pr,
        }
    }

    pub fn lub(self, other: GroundSort) -> Option<GroundSort> {
        if self.base_type() != other.base_type() {
            return None;
        }
        let ups: Vec<GroundSort> = GroundSort::all_of(&self.base_type())
            .iter()
            .copied()
            .filter(|u| self.leq(*u) && other.leq(*u))
            .collect();
        ups.iter().copied().find(|u| ups.iter().all(|w| u.leq(*w)))
    }
}

impl fmt::Display for GroundSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroundSort {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        REAL_SORTS
            .iter()
            .chain(BOOL_SORTS.iter())
            .copied()
            .find(|g| g.name() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Ground(GroundSort),
    Pair(Box<Sort>, Box<Sort>),
}

impl Sort {
    pub fn pair(a: Sort, b: Sort) -> Self {
        Sort::Pair(Box::new(a), Box::new(b))
    }

    /// The trivial refinement of a type: the whole type.
    pub fn trivial(t: &TypeExpr) -> Sort {
        match t {
            TypeExpr::Real => Sort::Ground(Real),
            TypeExpr::Bool => Sort::Ground(Bool),
            TypeExpr::Pair(a, b) => Sort::pair(Sort::trivial(a), Sort::trivial(b)),
        }
    }

    pub fn base_type(&self) -> TypeExpr {
        match self {
            Sort::Ground(g) => g.base_type(),
            Sort::Pair(a, b) => TypeExpr::pair(a.base_type(), b.base_type()),
        }
    }

    pub fn refines(&self, t: &TypeExpr) -> bool {
        self.base_type() == *t
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Sort::Ground(_))
    }

    /// Every sort refining `t`.
    pub fn all_refining(t: &TypeExpr) -> Vec<Sort> {
        match t {
            TypeExpr::Pair(a, b) => {
                let left = Sort::all_refining(a);
                let right = Sort::all_refining(b);
                left.iter()
                    .flat_map(|l| right.iter().map(move |r| Sort::pair(l.clone(), r.clone())))
                    .collect()
            }
            _ => GroundSort::all_of(t).iter().map(|g| Sort::Ground(*g)).collect(),
        }
    }

    pub fn leq(&self, other: &Sort) -> bool {
        match (self, other) {
            (Sort::Ground(a), Sort::Ground(b)) => a.leq(*b),
            (Sort::Pair(a1, b1), Sort::Pair(a2, b2)) => a1.leq(a2) && b1.leq(b2),
            _ => false,
        }
    }

    /// Progressive subsorting: subsort with the same top.
    pub fn prog_leq(&self, other: &Sort) -> bool {
        match (self, other) {
            (Sort::Ground(a), Sort::Ground(b)) => a.prog_leq(*b),
            (Sort::Pair(a1, b1), Sort::Pair(a2, b2)) => a1.prog_leq(a2) && b1.prog_leq(b2),
            _ => false,
        }
    }

    pub fn lub(&self, other: &Sort) -> Option<Sort> {
        match (self, other) {
            (Sort::Ground(a), Sort::Ground(b)) => a.lub(*b).map(Sort::Ground),
            (Sort::Pair(a1, b1), Sort::Pair(a2, b2)) => Some(Sort::pair(a1.lub(a2)?, b1.lub(b2)?)),
            _ => None,
        }
    }

    pub fn top(&self) -> Value {
        match self {
            Sort::Ground(g) => Value::Ground(g.top()),
            Sort::Pair(a, b) => Value::pair(a.top(), b.top()),
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Sort::Ground(s), Value::Ground(g)) => s.contains(*g),
            (Sort::Pair(sa, sb), Value::Pair(a, b)) => sa.contains(a) && sb.contains(b),
            _ => false,
        }
    }

    /// Least sort containing `v`.
    pub fn min_of(v: &Value) -> Sort {
        match v {
            Value::Ground(g) => Sort::Ground(GroundSort::min_of(*g)),
            Value::Pair(a, b) => Sort::pair(Sort::min_of(a), Sort::min_of(b)),
        }
    }

    /// Leftmost ground component.
    pub fn key(&self) -> GroundSort {
        match self {
            Sort::Ground(g) => *g,
            Sort::Pair(a, _) => a.key(),
        }
    }

    /// Nesting depth of the key: how many `fst` reach it.
    pub fn key_depth(&self) -> usize {
        match self {
            Sort::Ground(_) => 0,
            Sort::Pair(a, _) => 1 + a.key_depth(),
        }
    }

    pub fn minimal_of(sorts: &[Sort]) -> Vec<Sort> {
        sorts
            .iter()
            .filter(|s| !sorts.iter().any(|o| o != *s && o.leq(s)))
            .cloned()
            .collect()
    }
}

impl From<GroundSort> for Sort {
    fn from(g: GroundSort) -> Self {
        Sort::Ground(g)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Ground(g) => write!(f, "{g}"),
            Sort::Pair(a, b) => write!(f, "<{a},{b}>"),
        }
    }
}

/// Compare two values by their keys only.
pub fn key_compare(a: &Value, b: &Value) -> Option<Ordering> {
    a.key().partial_cmp(&b.key())
}

pub fn key_lt(a: &Value, b: &Value) -> bool {
    key_compare(a, b) == Some(Ordering::Less)
}

pub fn key_leq(a: &Value, b: &Value) -> bool {
    matches!(key_compare(a, b), Some(Ordering::Less | Ordering::Equal))
}

pub fn key_eq(a: &Value, b: &Value) -> bool {
    key_compare(a, b) == Some(Ordering::Equal)
}

/// Canonical top: values whose key reaches the top key of `s` are
/// collapsed onto the top of `s`.
pub fn canonical_top(s: &Sort, v: &Value) -> Value {
    if s.is_ground() {
        return v.clone();
    }
    if v.key() == s.key().top() {
        s.top()
    } else {
        v.clone()
    }
}

/// `!` (certainly progressive) or `?` (possibly not).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Annotation {
    Bang,
    Question,
}

impl Annotation {
    pub fn leq(self, other: Annotation) -> bool {
        self == Annotation::Bang || other == Annotation::Question
    }

    pub fn lub(self, other: Annotation) -> Annotation {
        if self == Annotation::Question || other == Annotation::Question {
            Annotation::Question
        } else {
            Annotation::Bang
        }
    }

    /// Annotation of `f(e, ...)` where `f` carries `self` and `e` carries
    /// `arg`: certain as soon as either side is.
    pub fn compose(self, arg: Annotation) -> Annotation {
        if self == Annotation::Bang || arg == Annotation::Bang {
            Annotation::Bang
        } else {
            Annotation::Question
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Annotation::Bang => '!',
            Annotation::Question => '?',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnnotatedSort {
    pub sort: Sort,
    pub ann: Annotation,
}

impl AnnotatedSort {
    pub fn new(sort: Sort, ann: Annotation) -> Self {
        AnnotatedSort { sort, ann }
    }

    pub fn leq(&self, other: &AnnotatedSort) -> bool {
        self.sort.key().prog_leq(other.sort.key())
            && self.sort.leq(&other.sort)
            && self.ann.leq(other.ann)
    }

    pub fn lub(&self, other: &AnnotatedSort) -> Option<AnnotatedSort> {
        Some(AnnotatedSort::new(self.sort.lub(&other.sort)?, self.ann.lub(other.ann)))
    }
}

impl fmt::Display for AnnotatedSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.sort, self.ann.symbol())
    }
}
