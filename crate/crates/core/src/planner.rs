//! Minimum-cost deployment search over node counts.
//!
//! Candidate counts are tried in order of increasing cost and the first
//! feasible one wins. The inner solvers are heuristics, so the achieved
//! rate is not monotone in the counts and nothing is pruned.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hap::greedy_hap_placement;
use crate::model::{evaluate, Placement, Scenario};
use crate::separated::alternating_joint;

pub const DEFAULT_CAP: usize = 30;
pub const DEFAULT_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Separated,
    Hap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub mode: Mode,
    pub m: usize,
    /// AP count; absent for HAP deployments.
    pub n: Option<usize>,
    pub cost: f64,
    /// Minimum net rate of `placement`, freshly evaluated, watts.
    pub t_star: f64,
    pub placement: Placement,
    pub feasible: bool,
}

/// One evaluated candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub m: usize,
    pub n: Option<usize>,
    pub cost: f64,
    pub t_star: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchOutcome {
    /// Cheapest feasible plan.
    pub plan: Option<DeploymentPlan>,
    /// Highest-rate plan among the infeasible ones, for reporting.
    pub best_infeasible: Option<DeploymentPlan>,
    pub evaluated: Vec<Candidate>,
}

impl SearchOutcome {
    pub fn cycled(&self) -> bool {
        self.evaluated.iter().any(|c| c.error.as_deref().is_some_and(|e| e.contains("cycling")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub max_m: usize,
    pub max_n: usize,
    /// Alternating iterations per candidate.
    pub iterations: usize,
    pub seed: u64,
    /// Candidates evaluated concurrently.
    pub workers: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_m: DEFAULT_CAP,
            max_n: DEFAULT_CAP,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            workers: 1,
        }
    }
}

/// Candidate `(M, N)` pairs by increasing `c1 M + c2 N`, ties by `M`.
pub fn cost_order(scenario: &Scenario, max_m: usize, max_n: usize) -> Vec<(usize, usize, f64)> {
    let c = &scenario.costs;
    let mut pairs: Vec<(usize, usize, f64)> = (1..=max_m)
        .flat_map(|m| (1..=max_n).map(move |n| (m, n, c.c1 * m as f64 + c.c2 * n as f64)))
        .collect();
    pairs.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    pairs
}

/// Cheapest separated deployment using the alternating method per pair.
pub fn min_cost_separated(scenario: &Scenario, opts: &SearchOptions) -> Result<SearchOutcome> {
    let (l, seed) = (opts.iterations, opts.seed);
    min_cost_separated_with(scenario, opts, |s, m, n| alternating_joint(s, m, n, l, seed).map(|(p, _)| p))
}

/// Cheapest separated deployment with an arbitrary per-pair solver.
pub fn min_cost_separated_with<F>(scenario: &Scenario, opts: &SearchOptions, solver: F) -> Result<SearchOutcome>
where
    F: Fn(&Scenario, usize, usize) -> Result<Placement> + Sync,
{
    if opts.max_m < 1 || opts.max_n < 1 {
        return Err(Error::invalid("search caps must be >= 1"));
    }
    let k = scenario.num_devices();
    let order = cost_order(scenario, opts.max_m.min(k), opts.max_n.min(k));
    let workers = opts.workers.max(1);
    let mut results: Vec<Result<DeploymentPlan>> = Vec::with_capacity(order.len());
    let run = |&(m, n, cost): &(usize, usize, f64)| -> Result<DeploymentPlan> {
        let placement = solver(scenario, m, n)?;
        plan(scenario, Mode::Separated, m, Some(n), cost, placement)
    };

    let mut done = None;
    for chunk in order.chunks(workers) {
        if workers == 1 {
            results.extend(chunk.iter().map(run));
        } else {
            let run = &run;
            let chunk_results: Vec<Result<DeploymentPlan>> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunk.iter().map(|pair| scope.spawn(move || run(pair))).collect();
                handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
            });
            results.extend(chunk_results);
        }
        // Stop once the cost group of the first feasible pair is complete.
        if let Some(first) = results.iter().position(|r| r.as_ref().is_ok_and(|p| p.feasible)) {
            let group_cost = order[first].2;
            let group_end = order.iter().position(|p| p.2 > group_cost).unwrap_or(order.len());
            if results.len() >= group_end {
                done = Some((first, group_end));
                break;
            }
        }
    }

    let mut outcome = SearchOutcome::default();
    for (r, &(m, n, cost)) in results.iter().zip(&order) {
        outcome.evaluated.push(Candidate {
            m,
            n: Some(n),
            cost,
            t_star: r.as_ref().ok().map(|p| p.t_star),
            error: r.as_ref().err().map(|e| e.to_string()),
        });
    }
    if let Some((first, end)) = done {
        let mut best: Option<&DeploymentPlan> = None;
        for p in results[first..end].iter().flatten().filter(|p| p.feasible) {
            if best.map_or(true, |b| p.t_star > b.t_star) {
                best = Some(p);
            }
        }
        outcome.plan = best.cloned();
    } else {
        outcome.best_infeasible = best_of(results.into_iter().flatten());
    }
    Ok(outcome)
}

/// Cheapest HAP deployment: `M = 1, 2, ...` up to `cap` with the greedy
/// placement.
pub fn min_cost_hap(scenario: &Scenario, cap: usize, seed: u64) -> Result<SearchOutcome> {
    min_cost_hap_with(scenario, cap, |s, m| greedy_hap_placement(s, m, seed).and_then(|(h, _)| Placement::hap(h, &s.devices)))
}

pub fn min_cost_hap_with<F>(scenario: &Scenario, cap: usize, solver: F) -> Result<SearchOutcome>
where
    F: Fn(&Scenario, usize) -> Result<Placement>,
{
    if cap < 1 {
        return Err(Error::invalid("search cap must be >= 1"));
    }
    let mut outcome = SearchOutcome::default();
    let mut infeasible = Vec::new();
    for m in 1..=cap.min(scenario.num_devices()) {
        let cost = scenario.costs.c3 * m as f64;
        let result = solver(scenario, m).and_then(|p| plan(scenario, Mode::Hap, m, None, cost, p));
        outcome.evaluated.push(Candidate {
            m,
            n: None,
            cost,
            t_star: result.as_ref().ok().map(|p| p.t_star),
            error: result.as_ref().err().map(|e| e.to_string()),
        });
        match result {
            Ok(p) if p.feasible => {
                outcome.plan = Some(p);
                return Ok(outcome);
            }
            Ok(p) => infeasible.push(p),
            Err(_) => {}
        }
    }
    outcome.best_infeasible = best_of(infeasible.into_iter());
    Ok(outcome)
}

fn plan(scenario: &Scenario, mode: Mode, m: usize, n: Option<usize>, cost: f64, placement: Placement) -> Result<DeploymentPlan> {
    let t_star = evaluate(&placement, scenario)?.p_r;
    Ok(DeploymentPlan {
        mode,
        m,
        n,
        cost,
        t_star,
        placement,
        feasible: t_star >= scenario.gamma,
    })
}

fn best_of(plans: impl Iterator<Item = DeploymentPlan>) -> Option<DeploymentPlan> {
    plans.fold(None, |best: Option<DeploymentPlan>, p| match best {
        Some(b) if b.t_star >= p.t_star => Some(b),
        _ => Some(p),
    })
}
