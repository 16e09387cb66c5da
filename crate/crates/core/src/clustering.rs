//! Seeded k-means partitioning of devices into geographic clusters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Point2;

/// Independent k-means++ restarts; the lowest-objective run wins.
const RESTARTS: u64 = 4;
const MAX_LLOYD_ITERS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster index of every point.
    pub assignment: Vec<usize>,
    pub centers: Vec<Point2>,
    /// Processing order of the clusters (a permutation of `0..m`).
    pub order: Vec<usize>,
}

impl Clustering {
    pub fn num_clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centers.len()];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }

    /// Member indices of each cluster, listed in processing order.
    pub fn members_in_order(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.centers.len()];
        for (i, &a) in self.assignment.iter().enumerate() {
            members[a].push(i);
        }
        self.order.iter().map(|&c| members[c].clone()).collect()
    }

    /// Sum of squared distances of points to their cluster centers.
    pub fn objective(&self, points: &[Point2]) -> f64 {
        objective(points, &self.assignment, &self.centers)
    }
}

/// Lloyd's algorithm from k-means++ seeding, refined by single-point
/// Hartigan moves, over a few seeded restarts. Deterministic in `seed`.
pub fn kmeans(points: &[Point2], m: usize, seed: u64) -> Result<Clustering> {
    kmeans_traced(points, m, seed).map(|(c, _)| c)
}

/// As [`kmeans`], also returning the objective after every iteration of the
/// winning restart.
pub fn kmeans_traced(points: &[Point2], m: usize, seed: u64) -> Result<(Clustering, Vec<f64>)> {
    if m < 1 || m > points.len() {
        return Err(Error::invalid(format!(
            "cluster count must lie in [1, {}], got {m}",
            points.len()
        )));
    }
    let mut best: Option<(Clustering, Vec<f64>, f64)> = None;
    for r in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let centers = seed_centers(points, m, &mut rng);
        let (assignment, centers, trace) = refine(points, centers);
        let obj = objective(points, &assignment, &centers);
        if best.as_ref().map_or(true, |b| obj < b.2) {
            let order = (0..m).collect();
            best = Some((
                Clustering {
                    assignment,
                    centers,
                    order,
                },
                trace,
                obj,
            ));
        }
    }
    let (c, trace, _) = best.expect("at least one restart");
    Ok((c, trace))
}

/// Reorders clusters by decreasing size, ties by increasing center x then y.
pub fn order_clusters(clustering: Clustering) -> Clustering {
    let sizes = clustering.sizes();
    let mut order: Vec<usize> = (0..clustering.centers.len()).collect();
    order.sort_by(|&a, &b| {
        sizes[b]
            .cmp(&sizes[a])
            .then(clustering.centers[a].x.total_cmp(&clustering.centers[b].x))
            .then(clustering.centers[a].y.total_cmp(&clustering.centers[b].y))
    });
    Clustering { order, ..clustering }
}

fn seed_centers(points: &[Point2], m: usize, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points[first]];
    let mut d2: Vec<f64> = points.iter().map(|p| p.dist_sq(&points[first])).collect();
    while centers.len() < m {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
            pick.expect("positive total weight")
        } else {
            // All remaining points coincide with chosen centers.
            (0..n).find(|&i| !chosen[i]).expect("m <= n")
        };
        chosen[idx] = true;
        centers.push(points[idx]);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(p.dist_sq(&points[idx]));
        }
    }
    centers
}

fn objective(points: &[Point2], assignment: &[usize], centers: &[Point2]) -> f64 {
    points
        .iter()
        .zip(assignment)
        .map(|(p, &a)| p.dist_sq(&centers[a]))
        .sum()
}

fn assign(points: &[Point2], centers: &[Point2]) -> Vec<usize> {
    points.iter().map(|p| crate::model::nearest(centers, p)).collect()
}

fn centroids(points: &[Point2], assignment: &[usize], m: usize, old: &[Point2]) -> Vec<Point2> {
    let mut sum = vec![(0.0, 0.0, 0usize); m];
    for (p, &a) in points.iter().zip(assignment) {
        sum[a].0 += p.x;
        sum[a].1 += p.y;
        sum[a].2 += 1;
    }
    sum.iter()
        .zip(old)
        .map(|(&(x, y, n), o)| {
            if n == 0 {
                *o
            } else {
                Point2::new(x / n as f64, y / n as f64)
            }
        })
        .collect()
}

/// Moves the point farthest from its center into each empty cluster.
fn repair_empty(points: &[Point2], assignment: &mut [usize], centers: &mut [Point2]) {
    let m = centers.len();
    loop {
        let mut sizes = vec![0usize; m];
        for &a in assignment.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut donor = None;
        let mut far = -1.0;
        for (i, p) in points.iter().enumerate() {
            let a = assignment[i];
            if sizes[a] < 2 {
                continue;
            }
            let d = p.dist_sq(&centers[a]);
            if d > far {
                far = d;
                donor = Some(i);
            }
        }
        let i = donor.expect("m <= n guarantees a cluster with two members");
        assignment[i] = empty;
        centers[empty] = points[i];
    }
}

fn lloyd(points: &[Point2], centers: &mut Vec<Point2>, assignment: &mut Vec<usize>, trace: &mut Vec<f64>) {
    let m = centers.len();
    for _ in 0..MAX_LLOYD_ITERS {
        let mut next = assign(points, centers);
        repair_empty(points, &mut next, centers);
        let changed = next != *assignment;
        *assignment = next;
        *centers = centroids(points, assignment, m, centers);
        trace.push(objective(points, assignment, centers));
        if !changed {
            break;
        }
    }
}

/// Single-point Hartigan moves; returns true if any point moved.
fn hartigan(points: &[Point2], centers: &mut [Point2], assignment: &mut [usize]) -> bool {
    let m = centers.len();
    let mut sizes = vec![0usize; m];
    for &a in assignment.iter() {
        sizes[a] += 1;
    }
    let mut moved = false;
    for i in 0..points.len() {
        let a = assignment[i];
        if sizes[a] < 2 {
            continue;
        }
        let p = points[i];
        let na = sizes[a] as f64;
        let removal = na / (na - 1.0) * p.dist_sq(&centers[a]);
        let mut best = None;
        let mut best_gain = 1e-12 * (1.0 + removal);
        for b in 0..m {
            if b == a {
                continue;
            }
            let nb = sizes[b] as f64;
            let gain = removal - nb / (nb + 1.0) * p.dist_sq(&centers[b]);
            if gain > best_gain {
                best_gain = gain;
                best = Some(b);
            }
        }
        if let Some(b) = best {
            let (na_u, nb_u) = (sizes[a], sizes[b]);
            let nb = nb_u as f64;
            centers[a] = Point2::new(
                (centers[a].x * na - p.x) / (na - 1.0),
                (centers[a].y * na - p.y) / (na - 1.0),
            );
            centers[b] = Point2::new(
                (centers[b].x * nb + p.x) / (nb + 1.0),
                (centers[b].y * nb + p.y) / (nb + 1.0),
            );
            sizes[a] = na_u - 1;
            sizes[b] = nb_u + 1;
            assignment[i] = b;
            moved = true;
        }
    }
    moved
}

fn refine(points: &[Point2], mut centers: Vec<Point2>) -> (Vec<usize>, Vec<Point2>, Vec<f64>) {
    let m = centers.len();
    let mut assignment = vec![usize::MAX; points.len()];
    let mut trace = Vec::new();
    for _ in 0..MAX_LLOYD_ITERS {
        lloyd(points, &mut centers, &mut assignment, &mut trace);
        if !hartigan(points, &mut centers, &mut assignment) {
            break;
        }
        // Exact centroids after the incremental updates.
        centers = centroids(points, &assignment, m, &centers);
        trace.push(objective(points, &assignment, &centers));
    }
    (assignment, centers, trace)
}
