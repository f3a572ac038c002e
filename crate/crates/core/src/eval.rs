//! Device-level big-step evaluation producing value-trees.
//!
//! Neighbour trees are aligned with the expression being evaluated: when a
//! subexpression is the i-th child of its parent, each neighbour tree is
//! replaced by its i-th child.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::ast::{Expr, ExprKind, Program};
use crate::registry::Builtin;
use crate::value::{min_value, GroundValue, Value, ValueTree};

pub type SensorState = BTreeMap<String, Value>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("sensor `#{0}` has no value on this device")]
    MissingSensor(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("undefined function `{0}`")]
    UnknownFunction(String),
    #[error("POSINF + NEGINF is undefined")]
    InfiniteSum,
    #[error("ill-typed operands for `{0}`")]
    IllTyped(String),
    #[error("neighbour value-tree does not match the expression shape")]
    ShapeMismatch,
}

pub fn apply_builtin(b: Builtin, args: &[Value]) -> Result<Value, EvalError> {
    let real = |v: &Value| v.as_ground().and_then(|g| g.as_real());
    let boolean = |v: &Value| v.as_ground().and_then(|g| g.as_bool());
    let ill = || EvalError::IllTyped(b.name().to_string());
    let out = match (b, args) {
        (Builtin::Not, [a]) => Value::bool(!boolean(a).ok_or_else(ill)?),
        (Builtin::Or, [a, c]) => Value::bool(boolean(a).ok_or_else(ill)? || boolean(c).ok_or_else(ill)?),
        (Builtin::Neg, [a]) => Value::real(-real(a).ok_or_else(ill)?),
        (Builtin::Add, [a, c]) => {
            let (x, y) = (real(a).ok_or_else(ill)?, real(c).ok_or_else(ill)?);
            if x.is_infinite() && y.is_infinite() && x != y {
                return Err(EvalError::InfiniteSum);
            }
            Value::real(x + y)
        }
        (Builtin::Eq, [a, c]) => Value::bool(real(a).ok_or_else(ill)? == real(c).ok_or_else(ill)?),
        (Builtin::Lt, [a, c]) => Value::bool(real(a).ok_or_else(ill)? < real(c).ok_or_else(ill)?),
        _ => return Err(ill()),
    };
    Ok(out)
}

type Env = HashMap<String, Value>;

#[derive(Clone, Copy)]
pub struct Evaluator<'a> {
    pub program: &'a Program,
}

fn align<'t>(nbrs: &[&'t ValueTree], i: usize) -> Result<Vec<&'t ValueTree>, EvalError> {
    nbrs.iter().map(|t| t.children.get(i).ok_or(EvalError::ShapeMismatch)).collect()
}

impl<'a> Evaluator<'a> {
    pub fn new(program: &'a Program) -> Self {
        Evaluator { program }
    }

    /// Evaluate `main` on a device.
    pub fn eval_main(&self, sensors: &SensorState, nbrs: &[&ValueTree]) -> Result<ValueTree, EvalError> {
        let main = self.program.main().ok_or_else(|| EvalError::UnknownFunction("main".into()))?;
        self.eval(sensors, nbrs, &main.body, &Env::new())
    }

    pub fn eval_expr(&self, sensors: &SensorState, nbrs: &[&ValueTree], e: &Expr) -> Result<ValueTree, EvalError> {
        self.eval(sensors, nbrs, e, &Env::new())
    }

    /// Apply a function to values with no neighbours; only the root matters.
    pub fn apply(&self, f: &str, args: &[Value], sensors: &SensorState) -> Result<Value, EvalError> {
        if let Some(b) = Builtin::from_name(f) {
            return apply_builtin(b, args);
        }
        let def = self.program.get(f).ok_or_else(|| EvalError::UnknownFunction(f.to_string()))?;
        if def.params.len() != args.len() {
            return Err(EvalError::IllTyped(f.to_string()));
        }
        let env: Env = def.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
        Ok(self.eval(sensors, &[], &def.body, &env)?.root)
    }

    fn eval(&self, sensors: &SensorState, nbrs: &[&ValueTree], e: &Expr, env: &Env) -> Result<ValueTree, EvalError> {
        if let Some(v) = e.as_value(env) {
            return Ok(ValueTree::leaf(v));
        }
        match &e.kind {
            ExprKind::Var(x) => Err(EvalError::UnboundVariable(x.clone())),
            ExprKind::Lit(g) => Ok(ValueTree::leaf(Value::Ground(*g))),
            ExprKind::Sensor(s) => {
                let v = sensors.get(s).ok_or_else(|| EvalError::MissingSensor(s.clone()))?;
                Ok(ValueTree::leaf(v.clone()))
            }
            ExprKind::Pair(a, b) => {
                let ta = self.eval(sensors, &align(nbrs, 0)?, a, env)?;
                let tb = self.eval(sensors, &align(nbrs, 1)?, b, env)?;
                Ok(ValueTree::node(Value::pair(ta.root.clone(), tb.root.clone()), vec![ta, tb]))
            }
            ExprKind::Fst(a) | ExprKind::Snd(a) => {
                let t = self.eval(sensors, &align(nbrs, 0)?, a, env)?;
                let v = match (&e.kind, &t.root) {
                    (ExprKind::Fst(_), Value::Pair(l, _)) => (**l).clone(),
                    (ExprKind::Snd(_), Value::Pair(_, r)) => (**r).clone(),
                    _ => return Err(EvalError::IllTyped("projection".into())),
                };
                Ok(ValueTree::node(v, vec![t]))
            }
            ExprKind::Cond(c, a, b) => {
                let tc = self.eval(sensors, &align(nbrs, 0)?, c, env)?;
                let ta = self.eval(sensors, &align(nbrs, 1)?, a, env)?;
                let tb = self.eval(sensors, &align(nbrs, 2)?, b, env)?;
                let pick = match tc.root {
                    Value::Ground(GroundValue::Bool(true)) => ta.root.clone(),
                    Value::Ground(GroundValue::Bool(false)) => tb.root.clone(),
                    _ => return Err(EvalError::IllTyped("?:".into())),
                };
                Ok(ValueTree::node(pick, vec![tc, ta, tb]))
            }
            ExprKind::Apply(f, args) => {
                let mut children = Vec::with_capacity(args.len() + 1);
                for (i, a) in args.iter().enumerate() {
                    children.push(self.eval(sensors, &align(nbrs, i)?, a, env)?);
                }
                let vals: Vec<Value> = children.iter().map(|t| t.root.clone()).collect();
                if let Some(b) = Builtin::from_name(f) {
                    let v = apply_builtin(b, &vals)?;
                    return Ok(ValueTree::node(v, children));
                }
                let def = self.program.get(f).ok_or_else(|| EvalError::UnknownFunction(f.clone()))?;
                let body_env: Env = def.params.iter().map(|p| p.name.clone()).zip(vals).collect();
                let body = self.eval(sensors, &align(nbrs, args.len())?, &def.body, &body_env)?;
                let root = body.root.clone();
                children.push(body);
                Ok(ValueTree::node(root, children))
            }
            ExprKind::Spread { source, diffusion, args } => {
                let mut children = Vec::with_capacity(args.len() + 1);
                children.push(self.eval(sensors, &align(nbrs, 0)?, source, env)?);
                for (i, a) in args.iter().enumerate() {
                    children.push(self.eval(sensors, &align(nbrs, i + 1)?, a, env)?);
                }
                let mut candidates = vec![children[0].root.clone()];
                let mut call: Vec<Value> = children.iter().map(|t| t.root.clone()).collect();
                for n in nbrs {
                    call[0] = n.root.clone();
                    candidates.push(self.apply(diffusion, &call, sensors)?);
                }
                let root = min_value(&candidates).expect("source value present");
                Ok(ValueTree::node(root, children))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn hop() -> Program {
        parse_program("def real main() is { #src : @ + #dist }", "t.scf").0
    }

    fn sensors(src: f64, dist: f64) -> SensorState {
        [("src".to_string(), Value::real(src)), ("dist".to_string(), Value::real(dist))].into()
    }

    #[test]
    fn isolated_device_keeps_source() {
        let p = hop();
        let t = Evaluator::new(&p).eval_main(&sensors(0.0, 1.0), &[]).unwrap();
        assert_eq!(t.to_string(), "0(0(),1())");
    }

    #[test]
    fn neighbours_lower_the_source() {
        let p = hop();
        let ev = Evaluator::new(&p);
        let t1 = ev.eval_main(&sensors(0.0, 1.0), &[]).unwrap();
        let t2 = ev.eval_main(&sensors(8.0, 1.0), &[]).unwrap();
        let t3 = ev.eval_main(&sensors(4.0, 1.0), &[&t1, &t2]).unwrap();
        assert_eq!(t3.to_string(), "1(4(),1())");
    }

    #[test]
    fn infinite_sum_rejected() {
        assert_eq!(apply_builtin(Builtin::Add, &[Value::posinf(), Value::neginf()]), Err(EvalError::InfiniteSum));
        assert_eq!(apply_builtin(Builtin::Add, &[Value::posinf(), Value::real(3.0)]), Ok(Value::posinf()));
    }

    #[test]
    fn pair_of_values_is_a_leaf() {
        let p = parse_program("def <real,bool> f(real x) is <x, TRUE>\ndef <real,bool> main() is f(1)", "t.scf").0;
        let t = Evaluator::new(&p).eval_main(&SensorState::new(), &[]).unwrap();
        assert_eq!(t.to_string(), "<1,TRUE>(1(),<1,TRUE>())");
    }

    #[test]
    fn shape_mismatch_detected() {
        let p = hop();
        let bad = ValueTree::leaf(Value::real(0.0));
        let err = Evaluator::new(&p).eval_main(&sensors(0.0, 1.0), &[&bad]).unwrap_err();
        assert_eq!(err, EvalError::ShapeMismatch);
    }
}
