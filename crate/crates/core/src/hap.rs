//! Greedy placement of hybrid access points (co-located EN + AP).
//!
//! HAPs are placed one at a time. When the i-th HAP goes down, each device
//! either keeps its current HAP (`Keep`) or switches to the new one
//! (`Switch`). Under a fixed assumption every constraint is a disk around
//! the device, so the i-th location is found by bisection. Wrong
//! assumptions are flipped and the solve repeats until all hold.

use serde::{Deserialize, Serialize};

use crate::bisection::{bisect, SIGMA};
use crate::clustering::{kmeans, order_clusters};
use crate::error::{Error, Result};
use crate::geometry::{intersect_in_box, root_theta, Disk, RadiusBound, EPS_FEAS};
use crate::model::{consumption_rate, evaluate, harvest, Placement, Point2, Scenario};
use crate::separated::SolveReport;

/// Hard cap on assumption update rounds per HAP.
pub const MAX_ASSUMPTION_ROUNDS: usize = 50;

/// Harvesting and consumption of every device under the HAPs placed so far.
#[derive(Debug, Clone, PartialEq)]
pub struct HapState {
    pub placed: Vec<Point2>,
    /// Harvested power from the placed HAPs, watts.
    pub lambda_prev: Vec<f64>,
    /// Consumption at the nearest placed HAP; `+inf` before the first.
    pub mu_prev: Vec<f64>,
    /// Planned number of HAPs, used to size the bisection bracket.
    pub planned: usize,
}

impl HapState {
    pub fn new(num_devices: usize, planned: usize) -> Self {
        HapState {
            placed: Vec::new(),
            lambda_prev: vec![0.0; num_devices],
            mu_prev: vec![f64::INFINITY; num_devices],
            planned: planned.max(1),
        }
    }

    /// Adds a HAP and updates the per-device rates incrementally.
    pub fn push(&mut self, scenario: &Scenario, location: Point2) {
        let ch = &scenario.channel;
        self.placed.push(location);
        for (k, dev) in scenario.devices.iter().enumerate() {
            self.lambda_prev[k] = harvest(&self.placed, &dev.location, ch);
            self.mu_prev[k] = self.mu_prev[k].min(consumption_rate(&location, dev, ch.ul_exponent()));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    /// The device stays with its current HAP.
    Keep,
    /// The device switches to the new HAP.
    Switch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintCase {
    /// Keep, positive required harvest: disk.
    KeepDisk,
    /// Keep, already satisfied by earlier HAPs: no constraint.
    KeepDropped,
    /// Switch with a non-negative polynomial coefficient.
    SwitchMonotone,
    /// Switch with a negative coefficient; the root lies beyond the dip.
    SwitchDip,
}

/// Which of the four constraint shapes applies to device `k` at level `t`.
pub fn classify(k: usize, assumption: Assumption, t: f64, state: &HapState, scenario: &Scenario) -> ConstraintCase {
    match assumption {
        Assumption::Keep => {
            if t + state.mu_prev[k] - state.lambda_prev[k] > 0.0 {
                ConstraintCase::KeepDisk
            } else {
                ConstraintCase::KeepDropped
            }
        }
        Assumption::Switch => {
            if t + scenario.devices[k].circuit_power - state.lambda_prev[k] >= 0.0 {
                ConstraintCase::SwitchMonotone
            } else {
                ConstraintCase::SwitchDip
            }
        }
    }
}

/// The set of HAP locations meeting device `k`'s constraint at level `t`
/// under `assumption`: a disk around the device, or no constraint.
pub fn constraint_to_disk(
    k: usize,
    assumption: Assumption,
    t: f64,
    state: &HapState,
    scenario: &Scenario,
) -> Result<RadiusBound> {
    let ch = &scenario.channel;
    let dev = scenario.devices.get(k).ok_or_else(|| Error::invalid(format!("device index {k} out of range")))?;
    let floor = ch.min_distance();
    match assumption {
        Assumption::Keep => {
            let need = t + state.mu_prev[k] - state.lambda_prev[k];
            if need <= 0.0 {
                return Ok(RadiusBound::Dropped);
            }
            let r = (ch.phi() / need).powf(1.0 / ch.dl_exponent());
            Ok(if r < floor { RadiusBound::Unattainable } else { RadiusBound::Radius(r) })
        }
        Assumption::Switch => {
            let coeff = (t + dev.circuit_power - state.lambda_prev[k]) / dev.tx_coeff;
            let ratio = ch.phi() / dev.tx_coeff;
            let theta = root_theta(coeff, ratio, ch.ul_exponent(), ch.dl_exponent())?;
            if theta >= floor {
                return Ok(RadiusBound::Radius(theta));
            }
            // Inside the minimum distance only the uplink term still varies.
            let slack = state.lambda_prev[k] + ch.phi() * floor.powf(-ch.dl_exponent()) - dev.circuit_power - t;
            Ok(if slack < 0.0 {
                RadiusBound::Unattainable
            } else {
                RadiusBound::Radius((slack / dev.tx_coeff).powf(1.0 / ch.ul_exponent()))
            })
        }
    }
}

/// Whether device `k` would actually switch to a HAP at `u`. Ties keep.
pub fn actual_assumption(k: usize, u: &Point2, state: &HapState, scenario: &Scenario) -> Assumption {
    let dev = &scenario.devices[k];
    if state.mu_prev[k] > consumption_rate(u, dev, scenario.channel.ul_exponent()) {
        Assumption::Switch
    } else {
        Assumption::Keep
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleHap {
    pub location: Point2,
    pub t_star: f64,
    /// Final assumption of each considered device, in input order.
    pub assumptions: Vec<(usize, Assumption)>,
    pub rounds: usize,
    pub probes: usize,
    /// Bisection optimum of each assumption round.
    pub round_values: Vec<f64>,
}

/// Best location of the next HAP for the devices in `covered` (earlier
/// clusters, initially assumed to keep their HAP) and `newest` (the cluster
/// being added, initially assumed to switch). Before the first HAP every
/// device switches.
pub fn place_single_hap(scenario: &Scenario, state: &HapState, covered: &[usize], newest: &[usize]) -> Result<SingleHap> {
    let k_total = scenario.num_devices();
    if covered.is_empty() && newest.is_empty() {
        return Err(Error::invalid("HAP placement needs at least one device"));
    }
    if state.lambda_prev.len() != k_total || state.mu_prev.len() != k_total {
        return Err(Error::invalid("HAP state does not match the scenario"));
    }
    if let Some(&bad) = covered.iter().chain(newest).find(|&&k| k >= k_total) {
        return Err(Error::invalid(format!("device index {bad} out of range")));
    }
    let first = state.placed.is_empty();
    let mut assumptions: Vec<(usize, Assumption)> = covered
        .iter()
        .map(|&k| (k, if first { Assumption::Switch } else { Assumption::Keep }))
        .chain(newest.iter().map(|&k| (k, Assumption::Switch)))
        .collect();

    let ch = &scenario.channel;
    let a1_max = scenario.devices.iter().map(|d| d.circuit_power).fold(0.0, f64::max);
    let a2_max = scenario.devices.iter().map(|d| d.tx_coeff).fold(0.0, f64::max);
    let delta = state.planned as f64 * ch.p0() + a1_max + a2_max * scenario.region.diameter().powf(ch.ul_exponent());

    let mut disks = Vec::with_capacity(assumptions.len());
    let mut round_values = Vec::new();
    let mut probes = 0;
    let mut seen: Vec<Vec<(usize, Assumption)>> = Vec::new();
    for round in 1..=MAX_ASSUMPTION_ROUNDS {
        let mut failure = None;
        let b = bisect(-delta, delta, SIGMA, scenario.region.center(), |t| {
            disks.clear();
            for &(k, a) in &assumptions {
                match constraint_to_disk(k, a, t, state, scenario) {
                    Ok(RadiusBound::Radius(r)) => disks.push(Disk::new(scenario.devices[k].location, r)),
                    Ok(RadiusBound::Dropped) => {}
                    Ok(RadiusBound::Unattainable) => return None,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return None;
                    }
                }
            }
            intersect_in_box(&disks, &scenario.region, EPS_FEAS)
        });
        if let Some(e) = failure {
            return Err(e);
        }
        probes += b.probes();
        round_values.push(b.lb);
        let u = b.witness;
        let validated: Vec<(usize, Assumption)> = assumptions
            .iter()
            .map(|&(k, _)| (k, actual_assumption(k, &u, state, scenario)))
            .collect();
        // Round values never decrease, so returning to an earlier set means
        // every round since then had the same optimum; stop there.
        let revisited = seen.contains(&validated);
        if validated == assumptions || revisited {
            return Ok(SingleHap {
                location: u,
                t_star: b.lb,
                assumptions,
                rounds: round,
                probes,
                round_values,
            });
        }
        seen.push(std::mem::replace(&mut assumptions, validated));
    }
    Err(Error::AssumptionCycling {
        rounds: MAX_ASSUMPTION_ROUNDS,
    })
}

/// Greedy placement of `m` HAPs. Devices are clustered into `m` groups and
/// the i-th HAP maximizes the minimum net rate over clusters `1..=i`.
pub fn greedy_hap_placement(scenario: &Scenario, m: usize, seed: u64) -> Result<(Vec<Point2>, SolveReport)> {
    let k = scenario.num_devices();
    if m < 1 || m > k {
        return Err(Error::invalid(format!("HAP count must lie in [1, {k}], got {m}")));
    }
    let clusters = order_clusters(kmeans(&scenario.device_points(), m, seed)?).members_in_order();
    let mut state = HapState::new(k, m);
    let mut covered: Vec<usize> = Vec::with_capacity(k);
    let mut report = SolveReport::default();
    for cluster in &clusters {
        let sol = place_single_hap(scenario, &state, &covered, cluster)?;
        report.rounds += sol.rounds;
        report.probes += sol.probes;
        report.round_values.push(sol.t_star);
        state.push(scenario, sol.location);
        covered.extend_from_slice(cluster);
    }
    let placement = Placement::hap(state.placed.clone(), &scenario.devices)?;
    report.t_star = evaluate(&placement, scenario)?.p_r;
    Ok((state.placed, report))
}
