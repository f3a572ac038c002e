//! Types, ground values, values and value-trees.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Real,
    Bool,
    Pair(Box<TypeExpr>, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn pair(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Pair(Box::new(a), Box::new(b))
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, TypeExpr::Pair(..))
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Real => write!(f, "real"),
            TypeExpr::Bool => write!(f, "bool"),
            TypeExpr::Pair(a, b) => write!(f, "<{a},{b}>"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ValueError {
    #[error("NaN is not a value")]
    NaN,
}

/// A ground value. Reals never hold NaN and `-0.0` is normalised to `0.0`,
/// so bitwise equality coincides with numeric equality.
#[derive(Debug, Clone, Copy)]
pub enum GroundValue {
    Bool(bool),
    Real(f64),
}

impl GroundValue {
    pub const TRUE: GroundValue = GroundValue::Bool(true);
    pub const FALSE: GroundValue = GroundValue::Bool(false);
    pub const POSINF: GroundValue = GroundValue::Real(f64::INFINITY);
    pub const NEGINF: GroundValue = GroundValue::Real(f64::NEG_INFINITY);

    pub fn real(x: f64) -> Result<Self, ValueError> {
        if x.is_nan() {
            return Err(ValueError::NaN);
        }
        Ok(GroundValue::Real(if x == 0.0 { 0.0 } else { x }))
    }

    pub fn type_of(&self) -> TypeExpr {
        match self {
            GroundValue::Bool(_) => TypeExpr::Bool,
            GroundValue::Real(_) => TypeExpr::Real,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            GroundValue::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            GroundValue::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl PartialEq for GroundValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (GroundValue::Bool(a), GroundValue::Bool(b)) => a == b,
            (GroundValue::Real(a), GroundValue::Real(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for GroundValue {}

impl PartialOrd for GroundValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (GroundValue::Bool(a), GroundValue::Bool(b)) => Some(a.cmp(b)),
            (GroundValue::Real(a), GroundValue::Real(b)) => a.partial_cmp(b),
            _ => None,
        }
    }
}

impl fmt::Display for GroundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundValue::Bool(true) => write!(f, "TRUE"),
            GroundValue::Bool(false) => write!(f, "FALSE"),
            GroundValue::Real(x) if *x == f64::INFINITY => write!(f, "POSINF"),
            GroundValue::Real(x) if *x == f64::NEG_INFINITY => write!(f, "NEGINF"),
            GroundValue::Real(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Ground(GroundValue),
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    pub fn real(x: f64) -> Self {
        Value::Ground(GroundValue::real(x).expect("finite or infinite real"))
    }

    pub fn bool(b: bool) -> Self {
        Value::Ground(GroundValue::Bool(b))
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn posinf() -> Self {
        Value::Ground(GroundValue::POSINF)
    }

    pub fn neginf() -> Self {
        Value::Ground(GroundValue::NEGINF)
    }

    pub fn type_of(&self) -> TypeExpr {
        match self {
            Value::Ground(g) => g.type_of(),
            Value::Pair(a, b) => TypeExpr::pair(a.type_of(), b.type_of()),
        }
    }

    pub fn has_type(&self, t: &TypeExpr) -> bool {
        match (self, t) {
            (Value::Ground(GroundValue::Real(_)), TypeExpr::Real) => true,
            (Value::Ground(GroundValue::Bool(_)), TypeExpr::Bool) => true,
            (Value::Pair(a, b), TypeExpr::Pair(ta, tb)) => a.has_type(ta) && b.has_type(tb),
            _ => false,
        }
    }

    pub fn as_ground(&self) -> Option<GroundValue> {
        match self {
            Value::Ground(g) => Some(*g),
            _ => None,
        }
    }

    pub fn fst(&self) -> Option<&Value> {
        match self {
            Value::Pair(a, _) => Some(a),
            _ => None,
        }
    }

    pub fn snd(&self) -> Option<&Value> {
        match self {
            Value::Pair(_, b) => Some(b),
            _ => None,
        }
    }

    /// Leftmost ground component.
    pub fn key(&self) -> GroundValue {
        match self {
            Value::Ground(g) => *g,
            Value::Pair(a, _) => a.key(),
        }
    }

    /// Total order `<=_T` on values of one type: FALSE < TRUE, numeric order
    /// on reals, lexicographic on pairs. Values of different types are
    /// incomparable.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Ground(a), Value::Ground(b)) => a.partial_cmp(b),
            (Value::Pair(a1, b1), Value::Pair(a2, b2)) => match a1.compare(a2)? {
                Ordering::Equal => b1.compare(b2),
                o => Some(o),
            },
            _ => None,
        }
    }

    pub fn leq(&self, other: &Value) -> bool {
        matches!(self.compare(other), Some(Ordering::Less | Ordering::Equal))
    }

    pub fn lt(&self, other: &Value) -> bool {
        matches!(self.compare(other), Some(Ordering::Less))
    }

    /// Greatest value of a type.
    pub fn top_of(t: &TypeExpr) -> Value {
        match t {
            TypeExpr::Real => Value::posinf(),
            TypeExpr::Bool => Value::bool(true),
            TypeExpr::Pair(a, b) => Value::pair(Value::top_of(a), Value::top_of(b)),
        }
    }
}

impl From<GroundValue> for Value {
    fn from(g: GroundValue) -> Self {
        Value::Ground(g)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Ground(g) => write!(f, "{g}"),
            Value::Pair(a, b) => write!(f, "<{a},{b}>"),
        }
    }
}

/// Minimum of a nonempty collection under `<=_T`.
pub fn min_value<'a>(values: impl IntoIterator<Item = &'a Value>) -> Option<Value> {
    let mut best: Option<&Value> = None;
    for v in values {
        best = match best {
            Some(b) if b.leq(v) => Some(b),
            _ => Some(v),
        };
    }
    best.cloned()
}

/// A value-tree: the root is the computed value, children mirror the
/// evaluation of the subexpressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTree {
    pub root: Value,
    pub children: Vec<ValueTree>,
}

impl ValueTree {
    pub fn leaf(root: Value) -> Self {
        ValueTree { root, children: Vec::new() }
    }

    pub fn node(root: Value, children: Vec<ValueTree>) -> Self {
        ValueTree { root, children }
    }

    pub fn same_shape(&self, other: &ValueTree) -> bool {
        self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| a.same_shape(b))
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ValueTree::size).sum::<usize>()
    }
}

impl fmt::Display for ValueTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.root)?;
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
