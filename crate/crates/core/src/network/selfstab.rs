//! Empirical self-stabilisation: from several random reachable
//! configurations, switch to the target environment, run to stability and
//! compare the resulting fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::random::{grid_choices, random_environment};
use super::{default_max_rounds, DeviceId, Environment, Field, NetError, Network};
use crate::ast::Program;
use crate::eval::Evaluator;
use crate::oracle::grid::SampleGrid;
use crate::registry::SensorCatalog;

#[derive(Debug, Clone)]
pub struct SelfStabOptions {
    pub trials: usize,
    pub seed: u64,
    pub max_rounds: Option<usize>,
    /// Upper bound on the number of random environments visited before the
    /// target one.
    pub max_prefix_envs: usize,
}

impl Default for SelfStabOptions {
    fn default() -> Self {
        SelfStabOptions { trials: 5, seed: 0, max_rounds: None, max_prefix_envs: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelfStabOutcome {
    Unique(Field),
    Counterexample { trial_a: usize, trial_b: usize, device: DeviceId },
    NoConvergence { trial: usize },
}

/// Reach a random configuration: random environments over the same
/// devices, each followed by random firings, then the target environment.
pub fn random_reachable<'a, R: Rng>(
    program: &'a Program,
    target: &Environment,
    catalog: &SensorCatalog,
    max_prefix_envs: usize,
    rng: &mut R,
) -> Result<Network<'a>, NetError> {
    let ids = target.devices();
    let choices = grid_choices(target, catalog, &SampleGrid::default());
    let mut net = Network::new(Evaluator::new(program));
    for _ in 0..rng.gen_range(1..=max_prefix_envs.max(1)) {
        net.env_change(random_environment(&ids, 0.4, &choices, rng))?;
        for _ in 0..rng.gen_range(0..=2 * ids.len()) {
            let d = &ids[rng.gen_range(0..ids.len())];
            net.fire(d)?;
        }
    }
    net.env_change(target.clone())?;
    Ok(net)
}

pub fn check_self_stabilisation(
    program: &Program,
    env: &Environment,
    catalog: &SensorCatalog,
    opts: &SelfStabOptions,
) -> Result<SelfStabOutcome, NetError> {
    let max_rounds = opts.max_rounds.unwrap_or_else(|| default_max_rounds(env.topology.len()));
    let mut fields: Vec<Field> = Vec::new();
    for trial in 0..opts.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(1_000_003).wrapping_add(trial as u64));
        let mut net = random_reachable(program, env, catalog, opts.max_prefix_envs, &mut rng)?;
        if !net.run_until_stable(max_rounds, &mut rng)?.stable {
            return Ok(SelfStabOutcome::NoConvergence { trial });
        }
        let field = net.config.field;
        for (a, other) in fields.iter().enumerate() {
            if let Some(d) = field.keys().find(|d| other.get(*d) != field.get(*d)) {
                return Ok(SelfStabOutcome::Counterexample { trial_a: a, trial_b: trial, device: d.clone() });
            }
        }
        fields.push(field);
    }
    Ok(SelfStabOutcome::Unique(fields.pop().unwrap_or_default()))
}
