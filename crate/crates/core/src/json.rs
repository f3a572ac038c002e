//! JSON encodings. Reals are numbers except the infinities, which are the
//! strings `"POSINF"` and `"NEGINF"`; booleans are booleans; pairs are
//! two-element arrays. A value-tree is `[root, [child, ...]]`.

use serde_json::{json, Value as J};
use thiserror::Error;

use crate::value::{GroundValue, Value, ValueTree};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("cannot read a value from {0}")]
    BadValue(String),
    #[error("cannot read a value-tree from {0}")]
    BadTree(String),
    #[error("malformed environment: {0}")]
    BadEnvironment(String),
    #[error(transparent)]
    Syntax(#[from] serde_json::Error),
}

pub fn value_to_json(v: &Value) -> J {
    match v {
        Value::Ground(GroundValue::Bool(b)) => J::Bool(*b),
        Value::Ground(GroundValue::Real(x)) if *x == f64::INFINITY => json!("POSINF"),
        Value::Ground(GroundValue::Real(x)) if *x == f64::NEG_INFINITY => json!("NEGINF"),
        Value::Ground(GroundValue::Real(x)) => json!(x),
        Value::Pair(a, b) => J::Array(vec![value_to_json(a), value_to_json(b)]),
    }
}

pub fn value_from_json(j: &J) -> Result<Value, JsonError> {
    let bad = || JsonError::BadValue(j.to_string());
    match j {
        J::Bool(b) => Ok(Value::bool(*b)),
        J::Number(n) => {
            let x = n.as_f64().ok_or_else(bad)?;
            Ok(Value::Ground(GroundValue::real(x).map_err(|_| bad())?))
        }
        J::String(s) if s == "POSINF" => Ok(Value::posinf()),
        J::String(s) if s == "NEGINF" => Ok(Value::neginf()),
        J::Array(items) if items.len() == 2 => Ok(Value::pair(value_from_json(&items[0])?, value_from_json(&items[1])?)),
        _ => Err(bad()),
    }
}

pub fn tree_to_json(t: &ValueTree) -> J {
    J::Array(vec![value_to_json(&t.root), J::Array(t.children.iter().map(tree_to_json).collect())])
}

pub fn tree_from_json(j: &J) -> Result<ValueTree, JsonError> {
    let bad = || JsonError::BadTree(j.to_string());
    let J::Array(items) = j else { return Err(bad()) };
    let [root, J::Array(children)] = items.as_slice() else { return Err(bad()) };
    Ok(ValueTree {
        root: value_from_json(root)?,
        children: children.iter().map(tree_from_json).collect::<Result<_, _>>()?,
    })
}
