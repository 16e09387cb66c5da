//! Bisection over the epigraph level `t`.

use crate::model::Point2;

/// Default bisection precision on `t`, watts.
pub const SIGMA: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Bisection {
    /// Last level found feasible.
    pub lb: f64,
    /// Smallest level found infeasible (or the initial cap).
    pub ub: f64,
    /// Feasible point at `lb`.
    pub witness: Point2,
    /// Every probed level and its verdict, in order.
    pub steps: Vec<(f64, bool)>,
}

impl Bisection {
    pub fn probes(&self) -> usize {
        self.steps.len()
    }
}

/// Bisects `[lb, ub)` until the bracket is no wider than `sigma`, which takes
/// exactly `ceil(log2((ub - lb) / sigma))` probes.
///
/// `lb` must be feasible with `initial_witness` as a feasible point;
/// `probe(t)` returns a feasible point at level `t` or `None`.
pub fn bisect<F>(mut lb: f64, mut ub: f64, sigma: f64, initial_witness: Point2, mut probe: F) -> Bisection
where
    F: FnMut(f64) -> Option<Point2>,
{
    let mut witness = initial_witness;
    let mut steps = Vec::new();
    while ub - lb > sigma {
        let t = 0.5 * (lb + ub);
        if t <= lb || t >= ub {
            break;
        }
        match probe(t) {
            Some(p) => {
                lb = t;
                witness = p;
                steps.push((t, true));
            }
            None => {
                ub = t;
                steps.push((t, false));
            }
        }
    }
    Bisection {
        lb,
        ub,
        witness,
        steps,
    }
}
