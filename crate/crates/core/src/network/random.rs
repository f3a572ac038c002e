//! Random environments for testing and for the self-stabilisation harness.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DeviceId, Environment, Topology};
use crate::eval::SensorState;
use crate::oracle::grid::SampleGrid;
use crate::registry::SensorCatalog;
use crate::value::Value;

/// Symmetric random graph where each pair is linked with probability `p`.
pub fn random_topology<R: Rng>(ids: &[DeviceId], p: f64, rng: &mut R) -> Topology {
    let mut t: Topology = ids.iter().map(|d| (d.clone(), Default::default())).collect();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            if rng.gen_bool(p) {
                t.get_mut(a).unwrap().insert(b.clone());
                t.get_mut(b).unwrap().insert(a.clone());
            }
        }
    }
    t
}

/// Sensor values drawn uniformly from per-sensor choices.
pub fn random_sensors<R: Rng>(choices: &[(String, Vec<Value>)], rng: &mut R) -> SensorState {
    choices
        .iter()
        .map(|(name, vals)| (name.clone(), vals.choose(rng).expect("nonempty choices").clone()))
        .collect()
}

/// For each sensor used by `env`, the grid of its declared sort.
pub fn grid_choices(env: &Environment, catalog: &SensorCatalog, grid: &SampleGrid) -> Vec<(String, Vec<Value>)> {
    let mut names: Vec<String> = env.sensors.values().flat_map(|s| s.keys().cloned()).collect();
    names.sort();
    names.dedup();
    names
        .into_iter()
        .map(|n| {
            let vals = match catalog.sort_of(&n) {
                Some(s) => grid.values(s),
                None => {
                    let sample = env.sensors.values().find_map(|s| s.get(&n)).expect("sensor present");
                    grid.values(&crate::sort::Sort::trivial(&sample.type_of()))
                }
            };
            (n, vals)
        })
        .collect()
}

pub fn random_environment<R: Rng>(
    ids: &[DeviceId],
    link_probability: f64,
    choices: &[(String, Vec<Value>)],
    rng: &mut R,
) -> Environment {
    let topology = random_topology(ids, link_probability, rng);
    let sensors = ids.iter().map(|d| (d.clone(), random_sensors(choices, rng))).collect();
    Environment { topology, sensors }
}

pub fn device_ids(n: usize) -> Vec<DeviceId> {
    (1..=n).map(|i| format!("d{i:02}")).collect()
}
