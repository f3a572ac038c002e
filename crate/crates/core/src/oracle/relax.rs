//! Stable field by chaotic relaxation with a FIFO worklist: start from the
//! isolated evaluation of every device and recompute a device whenever a
//! neighbour it reads has changed.

use std::collections::{BTreeSet, VecDeque};

use crate::ast::Program;
use crate::eval::{EvalError, Evaluator};
use crate::network::{Environment, Field, NetError};

#[derive(Debug)]
pub struct Relaxation {
    pub field: Field,
    pub steps: usize,
    pub converged: bool,
}

fn err(d: &str) -> impl Fn(EvalError) -> NetError + '_ {
    move |source| NetError::Eval { device: d.to_string(), source }
}

pub fn relaxation_fixpoint(program: &Program, env: &Environment, max_steps: usize) -> Result<Relaxation, NetError> {
    env.validate()?;
    let ev = Evaluator::new(program);
    let mut field = Field::new();
    for (d, s) in &env.sensors {
        field.insert(d.clone(), ev.eval_main(s, &[]).map_err(err(d))?);
    }
    let mut queue: VecDeque<String> = env.devices().into();
    let mut queued: BTreeSet<String> = queue.iter().cloned().collect();
    let mut steps = 0;
    while let Some(d) = queue.pop_front() {
        queued.remove(&d);
        if steps == max_steps {
            return Ok(Relaxation { field, steps, converged: false });
        }
        steps += 1;
        let nbrs: Vec<_> = env.topology[&d].iter().map(|n| &field[n]).collect();
        let t = ev.eval_main(&env.sensors[&d], &nbrs).map_err(err(&d))?;
        if field[&d] != t {
            field.insert(d.clone(), t);
            for r in env.readers(&d) {
                if queued.insert(r.clone()) {
                    queue.push_back(r);
                }
            }
        }
    }
    Ok(Relaxation { field, steps, converged: true })
}
