//! Finite sample grids per sort.

use crate::sort::{GroundSort, Sort};
use crate::value::{GroundValue, Value};

pub const GRID_ENV: &str = "FIELDCALC_GRID";

pub fn default_reals() -> Vec<f64> {
    vec![f64::NEG_INFINITY, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, f64::INFINITY]
}

/// Reals from `FIELDCALC_GRID` (comma separated, `POSINF`/`NEGINF`
/// allowed) or the default grid.
pub fn reals_from_env() -> Vec<f64> {
    std::env::var(GRID_ENV).ok().and_then(|s| parse_reals(&s)).unwrap_or_else(default_reals)
}

pub fn parse_reals(s: &str) -> Option<Vec<f64>> {
    s.split(',')
        .map(|t| match t.trim() {
            "POSINF" => Some(f64::INFINITY),
            "NEGINF" => Some(f64::NEG_INFINITY),
            x => x.parse::<f64>().ok().filter(|v| !v.is_nan()),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub reals: Vec<f64>,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid { reals: default_reals() }
    }
}

impl SampleGrid {
    pub fn from_env() -> Self {
        SampleGrid { reals: reals_from_env() }
    }

    /// Grid values inside the sort, always including its top, ascending.
    pub fn ground(&self, s: GroundSort) -> Vec<Value> {
        let mut out: Vec<GroundValue> = match s.base_type() {
            crate::value::TypeExpr::Bool => vec![GroundValue::FALSE, GroundValue::TRUE],
            _ => self.reals.iter().filter_map(|x| GroundValue::real(*x).ok()).collect(),
        };
        out.retain(|g| s.contains(*g));
        if !out.contains(&s.top()) {
            out.push(s.top());
        }
        out.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
        out.dedup();
        out.into_iter().map(Value::Ground).collect()
    }

    pub fn values(&self, s: &Sort) -> Vec<Value> {
        match s {
            Sort::Ground(g) => self.ground(*g),
            Sort::Pair(a, b) => {
                let left = self.values(a);
                let right = self.values(b);
                left.iter().flat_map(|l| right.iter().map(move |r| Value::pair(l.clone(), r.clone()))).collect()
            }
        }
    }

    pub fn tuples(&self, sorts: &[Sort]) -> Vec<Vec<Value>> {
        let mut out = vec![vec![]];
        for s in sorts {
            let vals = self.values(s);
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    vals.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(v.clone());
                        p
                    })
                })
                .collect();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_respect_sorts() {
        let g = SampleGrid::default();
        assert_eq!(g.ground(GroundSort::Zr), vec![Value::real(0.0)]);
        let pr = g.ground(GroundSort::Pr);
        assert_eq!(pr.len(), 4);
        assert_eq!(pr.last(), Some(&Value::posinf()));
        let nr = g.ground(GroundSort::Nr);
        assert_eq!(nr.last().unwrap().key(), GroundSort::Nr.top());
        assert_eq!(g.values(&Sort::pair(GroundSort::Pr.into(), GroundSort::Bool.into())).len(), 8);
    }

    #[test]
    fn parse_override() {
        assert_eq!(parse_reals("0, 1 ,POSINF"), Some(vec![0.0, 1.0, f64::INFINITY]));
        assert_eq!(parse_reals("x"), None);
    }
}
