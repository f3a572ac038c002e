//! Network semantics: environments, fields, firings, environment changes
//! and fair schedules.

pub mod random;
pub mod selfstab;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value as J;
use thiserror::Error;

use crate::eval::{EvalError, Evaluator, SensorState};
use crate::json::{tree_to_json, value_from_json, value_to_json, JsonError};
use crate::parser::parse_sort;
use crate::registry::SensorCatalog;
use crate::value::ValueTree;

pub type DeviceId = String;
pub type Topology = BTreeMap<DeviceId, BTreeSet<DeviceId>>;
pub type Field = BTreeMap<DeviceId, ValueTree>;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("device `{device}`: {source}")]
    Eval { device: DeviceId, source: EvalError },
    #[error("device `{0}` is not in the environment")]
    UnknownDevice(DeviceId),
    #[error("device `{0}` lists neighbour `{1}` which is not in the environment")]
    DanglingNeighbour(DeviceId, DeviceId),
    #[error("device `{0}` has no value-tree")]
    MissingTree(DeviceId),
    #[error(transparent)]
    Json(#[from] JsonError),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Environment {
    pub topology: Topology,
    pub sensors: BTreeMap<DeviceId, SensorState>,
}

impl Environment {
    pub fn devices(&self) -> Vec<DeviceId> {
        self.topology.keys().cloned().collect()
    }

    pub fn add_device(&mut self, id: &str, sensors: SensorState, neighbours: &[&str]) {
        self.topology.insert(id.to_string(), neighbours.iter().map(|s| s.to_string()).collect());
        self.sensors.insert(id.to_string(), sensors);
    }

    /// Same device set in topology and sensors, and every neighbour exists.
    pub fn validate(&self) -> Result<(), NetError> {
        for d in self.sensors.keys() {
            if !self.topology.contains_key(d) {
                return Err(NetError::UnknownDevice(d.clone()));
            }
        }
        for (d, ns) in &self.topology {
            if !self.sensors.contains_key(d) {
                return Err(NetError::UnknownDevice(d.clone()));
            }
            if let Some(n) = ns.iter().find(|n| !self.topology.contains_key(*n)) {
                return Err(NetError::DanglingNeighbour(d.clone(), n.clone()));
            }
        }
        Ok(())
    }

    /// Devices that list `d` as a neighbour, so read its value-tree.
    pub fn readers(&self, d: &str) -> Vec<DeviceId> {
        self.topology.iter().filter(|(_, ns)| ns.contains(d)).map(|(k, _)| k.clone()).collect()
    }

    /// Remove the link between two devices in both directions.
    pub fn unlink(&mut self, a: &str, b: &str) {
        if let Some(ns) = self.topology.get_mut(a) {
            ns.remove(b);
        }
        if let Some(ns) = self.topology.get_mut(b) {
            ns.remove(a);
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DeviceJson {
    id: String,
    #[serde(default)]
    sensors: BTreeMap<String, J>,
    #[serde(default)]
    neighbors: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct EnvJson {
    devices: Vec<DeviceJson>,
    #[serde(default)]
    sensor_sorts: BTreeMap<String, String>,
}

/// Read an environment file. Declared sensor sorts are added to `catalog`;
/// sensors with neither a declaration nor a default get the trivial sort of
/// their value's type, and their names are returned for warnings.
pub fn environment_from_json(text: &str, catalog: &mut SensorCatalog) -> Result<(Environment, Vec<String>), NetError> {
    let parsed: EnvJson = serde_json::from_str(text).map_err(JsonError::from)?;
    for (name, sort) in &parsed.sensor_sorts {
        let s = parse_sort(sort).ok_or_else(|| JsonError::BadEnvironment(format!("unknown sort `{sort}`")))?;
        catalog.declare(name, s);
    }
    let mut env = Environment::default();
    let mut undeclared = BTreeSet::new();
    for d in parsed.devices {
        let mut state = SensorState::new();
        for (k, v) in d.sensors {
            let v = value_from_json(&v)?;
            if catalog.sort_of(&k).is_none() {
                catalog.declare(&k, crate::sort::Sort::trivial(&v.type_of()));
                undeclared.insert(k.clone());
            }
            state.insert(k, v);
        }
        if env.topology.contains_key(&d.id) {
            return Err(JsonError::BadEnvironment(format!("device `{}` listed twice", d.id)).into());
        }
        env.topology.insert(d.id.clone(), d.neighbors.into_iter().collect());
        env.sensors.insert(d.id, state);
    }
    env.validate()?;
    Ok((env, undeclared.into_iter().collect()))
}

pub fn environment_to_json(env: &Environment, catalog: &SensorCatalog) -> J {
    let devices: Vec<J> = env
        .topology
        .iter()
        .map(|(id, ns)| {
            let sensors: serde_json::Map<String, J> = env.sensors[id]
                .iter()
                .map(|(k, v)| (k.clone(), value_to_json(v)))
                .collect();
            serde_json::json!({ "id": id, "sensors": sensors, "neighbors": ns })
        })
        .collect();
    let sorts: serde_json::Map<String, J> =
        catalog.sorts.iter().map(|(k, s)| (k.clone(), J::String(s.to_string()))).collect();
    serde_json::json!({ "devices": devices, "sensorSorts": sorts })
}

pub fn field_to_json(field: &Field) -> J {
    let m: serde_json::Map<String, J> = field
        .iter()
        .map(|(id, t)| (id.clone(), serde_json::json!({ "value": value_to_json(&t.root), "tree": tree_to_json(t) })))
        .collect();
    J::Object(m)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkConfig {
    pub env: Environment,
    pub field: Field,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: u64,
    pub action: &'static str,
    pub device: Option<DeviceId>,
    pub root: Option<J>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOutcome {
    /// Rounds executed, including the final unchanged one.
    pub rounds: usize,
    /// The last round that changed the field; zero if none did.
    pub last_change: usize,
    pub stable: bool,
}

/// A network running one program.
pub struct Network<'a> {
    pub evaluator: Evaluator<'a>,
    pub config: NetworkConfig,
    pub trace: Option<Vec<TraceEvent>>,
    step: u64,
}

impl<'a> Network<'a> {
    pub fn new(evaluator: Evaluator<'a>) -> Self {
        Network { evaluator, config: NetworkConfig::default(), trace: None, step: 0 }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    fn record(&mut self, action: &'static str, device: Option<&str>, root: Option<J>) {
        if let Some(t) = &mut self.trace {
            t.push(TraceEvent { step: self.step, action, device: device.map(str::to_string), root });
        }
        self.step += 1;
    }

    fn eval_device(&self, d: &str, field: &Field) -> Result<ValueTree, NetError> {
        let env = &self.config.env;
        let sensors = env.sensors.get(d).ok_or_else(|| NetError::UnknownDevice(d.to_string()))?;
        let mut nbrs = Vec::new();
        for n in &env.topology[d] {
            nbrs.push(field.get(n).ok_or_else(|| NetError::MissingTree(n.clone()))?);
        }
        self.evaluator
            .eval_main(sensors, &nbrs)
            .map_err(|source| NetError::Eval { device: d.to_string(), source })
    }

    /// Fire one device; returns whether its value-tree changed.
    pub fn fire(&mut self, d: &str) -> Result<bool, NetError> {
        if !self.config.env.topology.contains_key(d) {
            return Err(NetError::UnknownDevice(d.to_string()));
        }
        let t = self.eval_device(d, &self.config.field)?;
        let root = value_to_json(&t.root);
        let changed = self.config.field.get(d) != Some(&t);
        self.config.field.insert(d.to_string(), t);
        self.record("fire", Some(d), Some(root));
        Ok(changed)
    }

    /// Replace the environment. Every device is first evaluated in
    /// isolation; devices that already had a value-tree keep it.
    pub fn env_change(&mut self, env: Environment) -> Result<(), NetError> {
        env.validate()?;
        let old = std::mem::take(&mut self.config.field);
        self.config.env = env;
        let mut field = Field::new();
        for d in self.config.env.devices() {
            let sensors = &self.config.env.sensors[&d];
            let t = match old.get(&d) {
                Some(t) => t.clone(),
                None => self
                    .evaluator
                    .eval_main(sensors, &[])
                    .map_err(|source| NetError::Eval { device: d.clone(), source })?,
            };
            field.insert(d, t);
        }
        self.config.field = field;
        self.record("env", None, None);
        Ok(())
    }

    /// Fire every device once in a random order.
    pub fn round<R: Rng>(&mut self, rng: &mut R) -> Result<bool, NetError> {
        let mut order = self.config.env.devices();
        order.shuffle(rng);
        let mut changed = false;
        for d in order {
            changed |= self.fire(&d)?;
        }
        Ok(changed)
    }

    /// Run 1-fair rounds until a whole round changes nothing.
    pub fn run_until_stable<R: Rng>(&mut self, max_rounds: usize, rng: &mut R) -> Result<RunOutcome, NetError> {
        let mut last_change = 0;
        for r in 1..=max_rounds {
            if !self.round(rng)? {
                return Ok(RunOutcome { rounds: r, last_change, stable: true });
            }
            last_change = r;
        }
        Ok(RunOutcome { rounds: max_rounds, last_change, stable: false })
    }

    /// Like `run_until_stable` but each step is a k-fair block of `k`
    /// permutations. With `k = 1` this is exactly `run_until_stable`.
    pub fn run_k_fair_until_stable<R: Rng>(&mut self, k: usize, max_blocks: usize, rng: &mut R) -> Result<RunOutcome, NetError> {
        let devices = self.config.env.devices();
        let mut last_change = 0;
        for r in 1..=max_blocks {
            let mut changed = false;
            for d in make_k_fair_schedule(&devices, k.max(1), rng) {
                changed |= self.fire(&d)?;
            }
            if !changed {
                return Ok(RunOutcome { rounds: r, last_change, stable: true });
            }
            last_change = r;
        }
        Ok(RunOutcome { rounds: max_blocks, last_change, stable: false })
    }

    pub fn roots(&self) -> BTreeMap<DeviceId, crate::value::Value> {
        self.config.field.iter().map(|(k, t)| (k.clone(), t.root.clone())).collect()
    }

    /// Is every device already consistent with its neighbours?
    pub fn is_stable(&self) -> Result<bool, NetError> {
        for d in self.config.env.devices() {
            if self.eval_device(&d, &self.config.field)? != self.config.field[&d] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn trace_lines(&self) -> String {
        let mut s = String::new();
        for e in self.trace.iter().flatten() {
            s.push_str(&serde_json::to_string(e).expect("trace serialises"));
            s.push('\n');
        }
        s
    }
}

pub fn default_max_rounds(devices: usize) -> usize {
    10 * devices.max(1)
}

/// Switch an empty network to `env` and run k-fair blocks until stable,
/// recording a trace. The run is a function of the seed.
pub fn simulate<'a>(
    program: &'a crate::ast::Program,
    env: Environment,
    seed: u64,
    k: usize,
    max_rounds: Option<usize>,
) -> Result<(Network<'a>, RunOutcome), NetError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let max = max_rounds.unwrap_or_else(|| default_max_rounds(env.topology.len()));
    let mut net = Network::new(Evaluator::new(program)).with_trace();
    net.env_change(env)?;
    let out = net.run_k_fair_until_stable(k, max, &mut rng)?;
    Ok((net, out))
}

/// Concatenation of `k` random permutations of the devices.
pub fn make_k_fair_schedule<R: Rng>(devices: &[DeviceId], k: usize, rng: &mut R) -> Vec<DeviceId> {
    let mut out = Vec::with_capacity(devices.len() * k);
    for _ in 0..k {
        let mut p = devices.to_vec();
        p.shuffle(rng);
        out.extend(p);
    }
    out
}

/// Every device fires at least `k` times, and its h-th fire is followed by
/// at least `k - h` fires of every other device.
pub fn is_k_fair(seq: &[DeviceId], devices: &[DeviceId], k: usize) -> bool {
    for d in devices {
        let positions: Vec<usize> = seq.iter().enumerate().filter(|(_, x)| *x == d).map(|(i, _)| i).collect();
        if positions.len() < k {
            return false;
        }
        for h in 1..=k {
            let after = &seq[positions[h - 1] + 1..];
            for other in devices.iter().filter(|o| *o != d) {
                if after.iter().filter(|x| *x == other).count() < k - h {
                    return false;
                }
            }
        }
    }
    true
}
