//! Reference placements: cluster centers and simulated annealing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clustering::kmeans;
use crate::error::{Error, Result};
use crate::model::{min_net_rate, Placement, Point2, Scenario};

/// Node layout: separate ENs and APs, or co-located HAPs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Layout {
    Separated { m: usize, n: usize },
    Hap { m: usize },
}

impl Layout {
    pub fn node_count(&self) -> usize {
        match *self {
            Layout::Separated { m, n } => m + n,
            Layout::Hap { m } => m,
        }
    }

    fn validate(&self, k: usize) -> Result<()> {
        let ok = |c: usize| (1..=k).contains(&c);
        let valid = match *self {
            Layout::Separated { m, n } => ok(m) && ok(n),
            Layout::Hap { m } => ok(m),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::invalid(format!("node counts {self:?} must lie in [1, {k}]")))
        }
    }
}

/// Nodes at k-means cluster centers. ENs and APs use separate clusterings
/// with the same seed; HAPs sit at the `m` centers.
pub fn cluster_center_placement(scenario: &Scenario, layout: Layout, seed: u64) -> Result<Placement> {
    layout.validate(scenario.num_devices())?;
    let points = scenario.device_points();
    match layout {
        Layout::Separated { m, n } => {
            let ens = kmeans(&points, m, seed)?.centers;
            let aps = kmeans(&points, n, seed)?.centers;
            Placement::separated(ens, aps, &scenario.devices)
        }
        Layout::Hap { m } => Placement::hap(kmeans(&points, m, seed)?.centers, &scenario.devices),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    /// Budget on the total squared displacement of one move, m^2.
    pub sigma3: f64,
    /// Starting temperature, watts.
    pub initial_temp: f64,
    /// Multiplicative cooling per step.
    pub cooling: f64,
    pub steps: usize,
    pub seed: u64,
}

impl SaConfig {
    /// Defaults scaled to the region and node count.
    pub fn for_scenario(scenario: &Scenario, layout: Layout, seed: u64) -> Self {
        let nodes = layout.node_count() as f64;
        SaConfig {
            sigma3: (0.02 * scenario.region.diameter()).powi(2) * nodes,
            initial_temp: 1e-4,
            cooling: 0.995,
            steps: 5000 * layout.node_count(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma3 > 0.0) || !self.sigma3.is_finite() {
            return Err(Error::invalid(format!("move budget must be > 0, got {}", self.sigma3)));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::invalid(format!("cooling must lie in (0, 1), got {}", self.cooling)));
        }
        if !(self.initial_temp > 0.0) || !self.initial_temp.is_finite() {
            return Err(Error::invalid(format!("temperature must be > 0, got {}", self.initial_temp)));
        }
        Ok(())
    }
}

/// Simulated annealing from `init`. Each step moves every node jointly by a
/// Gaussian perturbation whose total squared length stays below `sigma3`,
/// then clips to the region. Worse moves are accepted with probability
/// `exp(delta / temperature)`. Returns the best placement seen and its
/// minimum net rate.
pub fn simulated_annealing(scenario: &Scenario, init: &Placement, config: &SaConfig) -> Result<(Placement, f64)> {
    config.validate()?;
    if init.en_locations.is_empty() || init.ap_locations.is_empty() {
        return Err(Error::invalid("annealing needs a placement with ENs and APs"));
    }
    let colocated = init.colocated;
    let mut nodes: Vec<Point2> = if colocated {
        init.en_locations.clone()
    } else {
        init.en_locations.iter().chain(&init.ap_locations).copied().collect()
    };
    let m = init.en_locations.len();
    let objective = |nodes: &[Point2]| {
        if colocated {
            min_net_rate(nodes, nodes, scenario)
        } else {
            min_net_rate(&nodes[..m], &nodes[m..], scenario)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // Two coordinates per node; expected total squared move is sigma3 / 2.
    let std = (config.sigma3 / (4.0 * nodes.len() as f64)).sqrt();
    let normal = Normal::new(0.0, std).map_err(|e| Error::invalid(e.to_string()))?;
    let mut current = objective(&nodes);
    let mut best = (nodes.clone(), current);
    let mut temp = config.initial_temp;
    let mut step = vec![(0.0, 0.0); nodes.len()];
    let mut candidate = nodes.clone();
    for _ in 0..config.steps {
        loop {
            let mut total = 0.0;
            for s in step.iter_mut() {
                *s = (normal.sample(&mut rng), normal.sample(&mut rng));
                total += s.0 * s.0 + s.1 * s.1;
            }
            if total <= config.sigma3 {
                break;
            }
        }
        for ((c, p), s) in candidate.iter_mut().zip(&nodes).zip(&step) {
            *c = scenario.region.clamp(Point2::new(p.x + s.0, p.y + s.1));
        }
        let value = objective(&candidate);
        let delta = value - current;
        if delta >= 0.0 || rng.gen::<f64>() < (delta / temp).exp() {
            std::mem::swap(&mut nodes, &mut candidate);
            current = value;
            if current > best.1 {
                best = (nodes.clone(), current);
            }
        }
        temp *= config.cooling;
    }
    let (nodes, value) = best;
    let placement = if colocated {
        Placement::hap(nodes, &scenario.devices)?
    } else {
        let aps = nodes[m..].to_vec();
        let mut ens = nodes;
        ens.truncate(m);
        Placement::separated(ens, aps, &scenario.devices)?
    };
    Ok((placement, value))
}
