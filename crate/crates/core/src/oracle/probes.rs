//! Runtime probes for the convergence properties of a single spreading main:
//!
//! * a not yet self-stable device holding the minimum value strictly
//!   increases after a fair round and never returns to that value;
//! * devices with the minimum source value eventually become self-stable
//!   while every other device settles strictly above them;
//! * once a set of self-stable devices is below all the others for the
//!   rest of the run, their frontier becomes self-stable after one round.
//!
//! A device is self-stable at round `r` when its value equals its final
//! value at every round from `r` on.

use std::collections::BTreeMap;

use rand::Rng;

use crate::ast::{ExprKind, Program};
use crate::network::selfstab::random_reachable;
use crate::network::{DeviceId, Environment, NetError};
use crate::registry::SensorCatalog;
use crate::value::{min_value, Value};

#[derive(Debug, Default)]
pub struct ProbeReport {
    pub rounds: usize,
    pub minimum_checks: usize,
    pub frontier_checks: usize,
    /// First round from which the minimum-source devices are self-stable.
    pub sources_stable_from: Option<usize>,
    pub violations: Vec<String>,
}

type Snapshot = BTreeMap<DeviceId, Value>;

pub fn run_probes<R: Rng>(
    program: &Program,
    env: &Environment,
    catalog: &SensorCatalog,
    max_rounds: usize,
    rng: &mut R,
) -> Result<ProbeReport, NetError> {
    let main = program.main().expect("program has main");
    assert!(matches!(main.body.kind, ExprKind::Spread { .. }), "probes need a spreading main");
    let mut net = random_reachable(program, env, catalog, 2, rng)?;
    // One round makes every subexpression current: a pre-self-stable state.
    net.round(rng)?;
    let mut snaps: Vec<Snapshot> = vec![net.roots()];
    let mut quiet = false;
    for _ in 0..max_rounds {
        let changed = net.round(rng)?;
        snaps.push(net.roots());
        if !changed {
            quiet = true;
            break;
        }
    }
    let mut report = ProbeReport { rounds: snaps.len() - 1, ..Default::default() };
    if !quiet {
        report.violations.push(format!("no stability within {max_rounds} rounds"));
        return Ok(report);
    }
    let last = snaps.last().unwrap().clone();
    let devices: Vec<DeviceId> = last.keys().cloned().collect();
    let stable_from: BTreeMap<&DeviceId, usize> = devices
        .iter()
        .map(|d| {
            let mut r = snaps.len() - 1;
            while r > 0 && snaps[r - 1][d] == last[d] {
                r -= 1;
            }
            (d, r)
        })
        .collect();
    let is_stable = |d: &DeviceId, r: usize| stable_from[d] <= r;

    for r in 0..snaps.len() - 1 {
        let m = min_value(snaps[r].values()).unwrap();
        for d in devices.iter().filter(|d| snaps[r][*d] == m && !is_stable(d, r)) {
            report.minimum_checks += 1;
            if let Some(later) = snaps[r + 1..].iter().position(|s| !m.lt(&s[d])) {
                report.violations.push(format!(
                    "minimum probe: {d} held minimum {m} at round {r} but was {} at round {}",
                    snaps[r + 1 + later][d],
                    r + 1 + later
                ));
            }
        }
    }

    let sources: BTreeMap<&DeviceId, Value> =
        devices.iter().map(|d| (d, net.config.field[d].children[0].root.clone())).collect();
    let m0 = min_value(sources.values()).unwrap();
    let s1: Vec<&DeviceId> = devices.iter().filter(|d| sources[d] == m0).collect();
    let settled = |r: usize| {
        s1.iter().all(|d| is_stable(d, r))
            && snaps[r..].iter().all(|s| devices.iter().filter(|d| !s1.contains(d)).all(|d| m0.leq(&s[d])))
    };
    report.sources_stable_from = (0..snaps.len()).find(|r| settled(*r));
    if report.sources_stable_from.is_none() {
        report.violations.push("minimum-source devices never settled below the others".into());
    }
    let top = Value::top_of(&m0.type_of());
    for d in devices.iter().filter(|d| !s1.contains(d)) {
        if m0 != top && !m0.lt(&last[d]) {
            report.violations.push(format!("source probe: {d} ends at {} not above {m0}", last[d]));
        }
    }

    for r in 0..snaps.len() - 1 {
        let stable: Vec<&DeviceId> = devices.iter().filter(|d| is_stable(d, r)).collect();
        if stable.is_empty() || stable.len() == devices.len() {
            continue;
        }
        let ceiling = stable.iter().map(|d| &snaps[r][*d]).fold(None::<&Value>, |acc, v| match acc {
            Some(a) if v.leq(a) => Some(a),
            _ => Some(v),
        });
        let ceiling = ceiling.unwrap();
        let below_rest = snaps[r..]
            .iter()
            .all(|s| devices.iter().filter(|d| !stable.contains(d)).all(|d| ceiling.leq(&s[d])));
        if !below_rest {
            continue;
        }
        for d in devices.iter().filter(|d| !stable.contains(d)) {
            if env.topology[d].iter().any(|n| stable.contains(&n)) {
                report.frontier_checks += 1;
                if !is_stable(d, r + 1) {
                    report.violations.push(format!("frontier probe: {d} not self-stable after round {r}"));
                }
            }
        }
    }
    Ok(report)
}
