//! Disk-intersection feasibility inside a box, the radius algebra that turns
//! each constraint family into a disk, and a brute-force grid oracle.
//!
//! Every placement subproblem, once the epigraph level `t` is fixed, asks
//! whether a point exists in the box within given radii of a set of centers.
//! The decision is answered by slicing along x: for a fixed abscissa the
//! feasible ordinates form an interval, and its length is a concave function
//! of x, so a golden-section search over x settles the question exactly up
//! to floating-point resolution.

use crate::error::{Error, Result};
use crate::model::{Device, Point2, Region};

/// Default feasibility threshold on the max-violation value, meters.
pub const EPS_FEAS: f64 = 1e-6;
/// Default additive accuracy of [`min_max_violation`], meters.
pub const DEFAULT_TOL: f64 = 1e-7;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point2, radius: f64) -> Self {
        Disk { center, radius }
    }

    /// Signed distance from `p` to the disk boundary (negative inside).
    #[inline]
    pub fn excess(&self, p: &Point2) -> f64 {
        p.dist(&self.center) - self.radius
    }
}

/// Outcome of turning one per-device constraint into a disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusBound {
    /// The constraint is the disk of this radius around the device.
    Radius(f64),
    /// The constraint holds everywhere and can be ignored.
    Dropped,
    /// No location satisfies the constraint at this level.
    Unattainable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityResult {
    pub status: Status,
    /// Minimizer of the max-violation function, always inside the box.
    pub witness: Point2,
    /// `max_k(|witness - c_k| - r_k)`.
    pub violation: f64,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }
}

/// Downlink constraint `(t + mu_eff) * d^{d_D} <= phi` as a disk radius.
pub fn disk_radius_dl(t: f64, mu_eff: f64, phi: f64, dl_exponent: f64) -> RadiusBound {
    let s = t + mu_eff;
    if s > 0.0 {
        RadiusBound::Radius((phi / s).powf(1.0 / dl_exponent))
    } else {
        RadiusBound::Dropped
    }
}

/// Uplink constraint `lambda - a1 - a2 * d^{d_U} >= t` as a disk radius.
pub fn disk_radius_ul(t: f64, lambda: f64, device: &Device, ul_exponent: f64) -> RadiusBound {
    let slack = lambda - device.circuit_power - t;
    if slack >= 0.0 {
        RadiusBound::Radius((slack / device.tx_coeff).powf(1.0 / ul_exponent))
    } else {
        RadiusBound::Unattainable
    }
}

/// Max-violation function `g(u) = max_k(|u - c_k| - r_k)`.
pub fn max_violation(disks: &[Disk], p: &Point2) -> f64 {
    disks
        .iter()
        .map(|d| d.excess(p))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Finds a point of the box lying in every disk inflated by `slack`, or
/// `None` when there is none. Equivalent to asking whether the minimum of
/// the max-violation function over the box is at most `slack`.
pub fn intersect_in_box(disks: &[Disk], region: &Region, slack: f64) -> Option<Point2> {
    if disks.is_empty() {
        return Some(region.center());
    }
    let mut x_lo = region.lo.x;
    let mut x_hi = region.hi.x;
    for d in disks {
        let r = d.radius + slack;
        if r < 0.0 {
            return None;
        }
        x_lo = x_lo.max(d.center.x - r);
        x_hi = x_hi.min(d.center.x + r);
    }
    if x_lo > x_hi {
        return None;
    }

    // Feasible y-interval of the slice at abscissa x.
    let slice = |x: f64| -> (f64, f64) {
        let mut lo = region.lo.y;
        let mut hi = region.hi.y;
        for d in disks {
            let r = d.radius + slack;
            let dx = x - d.center.x;
            let h = (r * r - dx * dx).max(0.0).sqrt();
            lo = lo.max(d.center.y - h);
            hi = hi.min(d.center.y + h);
        }
        (lo, hi)
    };
    let width = |x: f64| {
        let (lo, hi) = slice(x);
        hi - lo
    };

    // The slice width is concave in x; golden-section search for its maximum.
    let mut a = x_lo;
    let mut b = x_hi;
    let mut best_x = a;
    let mut best_w = width(a);
    let wb = width(b);
    if wb > best_w {
        best_x = b;
        best_w = wb;
    }
    if best_w >= 0.0 {
        let (lo, hi) = slice(best_x);
        return Some(Point2::new(best_x, 0.5 * (lo + hi)));
    }
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut wc = width(c);
    let mut wd = width(d);
    let scale = 1.0 + x_lo.abs().max(x_hi.abs());
    for _ in 0..200 {
        let (x, w) = if wc > wd { (c, wc) } else { (d, wd) };
        if w > best_w {
            best_w = w;
            best_x = x;
        }
        if best_w >= 0.0 || b - a <= 1e-13 * scale {
            break;
        }
        if wc > wd {
            b = d;
            d = c;
            wd = wc;
            c = b - GOLDEN * (b - a);
            wc = width(c);
        } else {
            a = c;
            c = d;
            wc = wd;
            d = a + GOLDEN * (b - a);
            wd = width(d);
        }
    }
    if best_w >= 0.0 {
        let (lo, hi) = slice(best_x);
        Some(Point2::new(best_x, 0.5 * (lo + hi)))
    } else {
        None
    }
}

/// Minimizes `g(u) = max_k(|u - c_k| - r_k)` over the box to additive
/// accuracy `tol`, by bisection over the inflation level of the disks.
pub fn min_max_violation(disks: &[Disk], region: &Region, tol: f64) -> Result<FeasibilityResult> {
    min_max_violation_with(disks, region, tol, EPS_FEAS)
}

pub fn min_max_violation_with(
    disks: &[Disk],
    region: &Region,
    tol: f64,
    eps_feas: f64,
) -> Result<FeasibilityResult> {
    if disks.is_empty() {
        return Err(Error::invalid("min_max_violation needs at least one disk"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be > 0, got {tol}")));
    }
    // g >= -r_k for every k, and the box center gives a feasible level.
    let mut lo = disks.iter().map(|d| -d.radius).fold(f64::NEG_INFINITY, f64::max);
    let center = region.center();
    let mut hi = max_violation(disks, &center);
    let mut witness = center;
    if let Some(p) = intersect_in_box(disks, region, lo) {
        witness = p;
        hi = lo;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match intersect_in_box(disks, region, mid) {
            Some(p) => {
                hi = mid;
                witness = p;
            }
            None => lo = mid,
        }
    }
    let witness = region.clamp(witness);
    let violation = max_violation(disks, &witness);
    let status = if violation <= eps_feas {
        Status::Feasible
    } else {
        Status::Infeasible
    };
    Ok(FeasibilityResult {
        status,
        witness,
        violation,
    })
}

/// Exhaustive minimum of `objective` over a uniform grid covering the box.
/// Test oracle; slow by construction.
pub fn grid_oracle<F>(objective: F, region: &Region, resolution: f64) -> Result<(Point2, f64)>
where
    F: Fn(&Point2) -> f64,
{
    if !(resolution > 0.0) {
        return Err(Error::invalid(format!("grid resolution must be > 0, got {resolution}")));
    }
    if resolution > region.width() || resolution > region.height() {
        return Err(Error::invalid(format!(
            "grid resolution {resolution} exceeds the box extent"
        )));
    }
    let nx = (region.width() / resolution + 1e-9).floor() as usize;
    let ny = (region.height() / resolution + 1e-9).floor() as usize;
    let mut best = (region.lo, f64::INFINITY);
    for i in 0..=nx {
        let x = (region.lo.x + i as f64 * resolution).min(region.hi.x);
        for j in 0..=ny {
            let y = (region.lo.y + j as f64 * resolution).min(region.hi.y);
            let p = Point2::new(x, y);
            let v = objective(&p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    Ok(best)
}

/// Unique positive root of
/// `z(x) = x^{d_U + d_D} + coeff * x^{d_D} - ratio`.
///
/// For `coeff < 0`, z decreases on `[0, tau]` with
/// `tau = (-coeff * d_D / (d_U + d_D))^{1/d_U}` and increases afterwards, so
/// the root is bracketed in `(tau, inf)`.
pub fn root_theta(coeff: f64, ratio: f64, ul_exponent: f64, dl_exponent: f64) -> Result<f64> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Domain(format!("ratio must be > 0, got {ratio}")));
    }
    if !coeff.is_finite() {
        return Err(Error::Domain(format!("coefficient must be finite, got {coeff}")));
    }
    let sum = ul_exponent + dl_exponent;
    let z = |x: f64| x.powf(sum) + coeff * x.powf(dl_exponent) - ratio;
    let dz = |x: f64| sum * x.powf(sum - 1.0) + coeff * dl_exponent * x.powf(dl_exponent - 1.0);

    let upper_base = ratio.powf(1.0 / sum);
    let (mut lo, mut hi) = if coeff >= 0.0 {
        let mut hi = upper_base;
        if coeff > 0.0 {
            hi = hi.min((ratio / coeff).powf(1.0 / dl_exponent));
        }
        (0.0, hi)
    } else {
        let a = -coeff;
        let tau = (a * dl_exponent / sum).powf(1.0 / ul_exponent);
        (tau, a.powf(1.0 / ul_exponent) + upper_base)
    };
    // Safeguarded Newton on the bracket [lo, hi], z(lo) < 0 <= z(hi).
    let target = 1e-10 * ratio;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = z(x);
        if fx.abs() <= target {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = fx / dz(x);
        let newton = x - step;
        x = if step.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(x)
}
