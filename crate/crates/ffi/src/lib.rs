//! C ABI over `wpcn-core`.
//!
//! Scenarios and placements are opaque handles created by this library and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`WpcnStatus`]; on failure [`wpcn_last_error`] describes the cause.
//! Handles are not synchronized: do not share one handle between threads
//! while a call that mutates it is running.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wpcn_core::baselines::{cluster_center_placement, Layout};
use wpcn_core::hap::greedy_hap_placement;
use wpcn_core::io::{generate_scenario, parse_scenario, scenario_to_json};
use wpcn_core::model::evaluate;
use wpcn_core::planner::{min_cost_hap, min_cost_separated, SearchOptions};
use wpcn_core::separated::alternating_joint;
use wpcn_core::{Error, Placement, Scenario};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WpcnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Parse = 3,
    Domain = 4,
    Cycling = 5,
    /// No deployment within the caps meets the target; the best infeasible
    /// one is returned.
    Infeasible = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WpcnMode {
    Separated = 0,
    Hap = 1,
}

/// Opaque problem instance.
pub struct WpcnScenario(Scenario);

/// Opaque placement of ENs and APs (or HAPs).
pub struct WpcnPlacement(Placement);

/// Result of a minimum-cost search.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpcnPlan {
    pub m: usize,
    /// AP count; 0 for HAP deployments.
    pub n: usize,
    pub cost: f64,
    /// Minimum net rate of the plan, watts.
    pub t_star: f64,
    pub feasible: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(e: Error) -> WpcnStatus {
    let status = match &e {
        Error::InvalidParameter(_) => WpcnStatus::InvalidParameter,
        Error::Parse { .. } => WpcnStatus::Parse,
        Error::Domain(_) => WpcnStatus::Domain,
        Error::Io(_) => WpcnStatus::Io,
        Error::AssociationCycling { .. } | Error::AssumptionCycling { .. } => WpcnStatus::Cycling,
    };
    set_error(e.to_string());
    status
}

fn null(what: &str) -> WpcnStatus {
    set_error(format!("{what} must not be null"));
    WpcnStatus::NullPointer
}

fn guard<F: FnOnce() -> WpcnStatus>(f: F) -> WpcnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            WpcnStatus::Panic
        }
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wpcn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a scenario from NUL-terminated JSON text.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wpcn_scenario_from_json(json: *const c_char, out: *mut *mut WpcnScenario) -> WpcnStatus {
    guard(|| {
        if json.is_null() {
            return null("json");
        }
        if out.is_null() {
            return null("out");
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(e) => {
                set_error(format!("scenario text is not UTF-8: {e}"));
                return WpcnStatus::Parse;
            }
        };
        match parse_scenario(text) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(WpcnScenario(s)));
                WpcnStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// `k` devices uniform in a square of side `side` meters, default
/// parameters.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wpcn_scenario_generate(k: usize, side: f64, seed: u64, out: *mut *mut WpcnScenario) -> WpcnStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match generate_scenario(k, side, seed) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(WpcnScenario(s)));
                WpcnStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Serializes a scenario to JSON. Release the string with
/// [`wpcn_string_free`].
///
/// # Safety
/// `scenario` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wpcn_scenario_to_json(scenario: *const WpcnScenario, out: *mut *mut c_char) -> WpcnStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else { return null("scenario") };
        if out.is_null() {
            return null("out");
        }
        let text = CString::new(scenario_to_json(&s.0)).expect("JSON has no interior nul");
        *out = text.into_raw();
        WpcnStatus::Ok
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn wpcn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `scenario` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wpcn_scenario_free(scenario: *mut WpcnScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of devices; 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wpcn_scenario_num_devices(scenario: *const WpcnScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.num_devices())
}

/// Sets the target net rate, watts.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wpcn_scenario_set_gamma(scenario: *mut WpcnScenario, gamma: f64) -> WpcnStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else { return null("scenario") };
        if !gamma.is_finite() {
            set_error(format!("target rate must be finite, got {gamma}"));
            return WpcnStatus::InvalidParameter;
        }
        s.0.gamma = gamma;
        WpcnStatus::Ok
    })
}

unsafe fn emit_placement(
    result: wpcn_core::Result<Placement>,
    scenario: &Scenario,
    out: *mut *mut WpcnPlacement,
    p_r: *mut f64,
) -> WpcnStatus {
    let placement = match result {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    if !p_r.is_null() {
        match evaluate(&placement, scenario) {
            Ok(m) => *p_r = m.p_r,
            Err(e) => return fail(e),
        }
    }
    *out = Box::into_raw(Box::new(WpcnPlacement(placement)));
    WpcnStatus::Ok
}

/// Joint EN/AP placement with `l` alternating iterations. `p_r` may be
/// null; otherwise it receives the minimum net rate.
///
/// # Safety
/// `scenario` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wpcn_place_joint(
    scenario: *const WpcnScenario,
    m: usize,
    n: usize,
    l: usize,
    seed: u64,
    out: *mut *mut WpcnPlacement,
    p_r: *mut f64,
) -> WpcnStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else { return null("scenario") };
        if out.is_null() {
            return null("out");
        }
        emit_placement(alternating_joint(&s.0, m, n, l, seed).map(|(p, _)| p), &s.0, out, p_r)
    })
}

/// Greedy placement of `m` HAPs.
///
/// # Safety
/// `scenario` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wpcn_place_hap(
    scenario: *const WpcnScenario,
    m: usize,
    seed: u64,
    out: *mut *mut WpcnPlacement,
    p_r: *mut f64,
) -> WpcnStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else { return null("scenario") };
        if out.is_null() {
            return null("out");
        }
        let result = greedy_hap_placement(&s.0, m, seed).and_then(|(h, _)| Placement::hap(h, &s.0.devices));
        emit_placement(result, &s.0, out, p_r)
    })
}

/// Nodes at cluster centers; `n` is ignored when `hap` is true.
///
/// # Safety
/// `scenario` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wpcn_cluster_centers(
    scenario: *const WpcnScenario,
    m: usize,
    n: usize,
    hap: bool,
    seed: u64,
    out: *mut *mut WpcnPlacement,
    p_r: *mut f64,
) -> WpcnStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else { return null("scenario") };
        if out.is_null() {
            return null("out");
        }
        let layout = if hap { Layout::Hap { m } } else { Layout::Separated { m, n } };
        emit_placement(cluster_center_placement(&s.0, layout, seed), &s.0, out, p_r)
    })
}

/// Cheapest deployment meeting the scenario's target. Returns
/// `Infeasible` with the best infeasible plan when none qualifies.
/// `max_n` and `l` apply to separated mode only.
///
/// # Safety
/// `scenario` must be a live handle; `plan` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wpcn_min_cost(
    scenario: *const WpcnScenario,
    mode: WpcnMode,
    max_m: usize,
    max_n: usize,
    l: usize,
    seed: u64,
    plan: *mut WpcnPlan,
    out: *mut *mut WpcnPlacement,
) -> WpcnStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else { return null("scenario") };
        if plan.is_null() {
            return null("plan");
        }
        if out.is_null() {
            return null("out");
        }
        let search = match mode {
            WpcnMode::Separated => {
                let opts = SearchOptions {
                    max_m,
                    max_n,
                    iterations: l,
                    seed,
                    workers: 1,
                };
                min_cost_separated(&s.0, &opts)
            }
            WpcnMode::Hap => min_cost_hap(&s.0, max_m, seed),
        };
        let search = match search {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        let (status, found) = match (search.plan, search.best_infeasible) {
            (Some(p), _) => (WpcnStatus::Ok, p),
            (None, Some(p)) => {
                set_error("no deployment within the caps meets the target");
                (WpcnStatus::Infeasible, p)
            }
            (None, None) => {
                set_error("no candidate deployment could be evaluated");
                return WpcnStatus::Domain;
            }
        };
        *plan = WpcnPlan {
            m: found.m,
            n: found.n.unwrap_or(0),
            cost: found.cost,
            t_star: found.t_star,
            feasible: found.feasible,
        };
        *out = Box::into_raw(Box::new(WpcnPlacement(found.placement)));
        status
    })
}

/// # Safety
/// `placement` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wpcn_placement_free(placement: *mut WpcnPlacement) {
    if !placement.is_null() {
        drop(Box::from_raw(placement));
    }
}

/// Builds a placement from coordinate arrays `xs[i], ys[i]`. With
/// `colocated` set, the EN arrays give the HAP sites and the AP arrays are
/// ignored.
///
/// # Safety
/// Arrays must hold the stated number of elements.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn wpcn_placement_new(
    scenario: *const WpcnScenario,
    en_xs: *const f64,
    en_ys: *const f64,
    num_ens: usize,
    ap_xs: *const f64,
    ap_ys: *const f64,
    num_aps: usize,
    colocated: bool,
    out: *mut *mut WpcnPlacement,
) -> WpcnStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else { return null("scenario") };
        if out.is_null() {
            return null("out");
        }
        let points = |xs: *const f64, ys: *const f64, len: usize| {
            if len == 0 {
                return Some(Vec::new());
            }
            if xs.is_null() || ys.is_null() {
                return None;
            }
            let xs = std::slice::from_raw_parts(xs, len);
            let ys = std::slice::from_raw_parts(ys, len);
            Some(xs.iter().zip(ys).map(|(&x, &y)| wpcn_core::Point2::new(x, y)).collect::<Vec<_>>())
        };
        let Some(ens) = points(en_xs, en_ys, num_ens) else { return null("EN coordinates") };
        let result = if colocated {
            Placement::hap(ens, &s.0.devices)
        } else {
            let Some(aps) = points(ap_xs, ap_ys, num_aps) else { return null("AP coordinates") };
            Placement::separated(ens, aps, &s.0.devices)
        };
        emit_placement(result, &s.0, out, ptr::null_mut())
    })
}

/// Number of ENs (HAPs when co-located); 0 for a null handle.
///
/// # Safety
/// `placement` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wpcn_placement_num_ens(placement: *const WpcnPlacement) -> usize {
    placement.as_ref().map_or(0, |p| p.0.en_locations.len())
}

/// Number of APs (HAPs when co-located); 0 for a null handle.
///
/// # Safety
/// `placement` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wpcn_placement_num_aps(placement: *const WpcnPlacement) -> usize {
    placement.as_ref().map_or(0, |p| p.0.ap_locations.len())
}

/// # Safety
/// `placement` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wpcn_placement_is_colocated(placement: *const WpcnPlacement) -> bool {
    placement.as_ref().is_some_and(|p| p.0.colocated)
}

unsafe fn node(list: &[wpcn_core::Point2], index: usize, x: *mut f64, y: *mut f64) -> WpcnStatus {
    if x.is_null() || y.is_null() {
        return null("x and y");
    }
    match list.get(index) {
        Some(p) => {
            *x = p.x;
            *y = p.y;
            WpcnStatus::Ok
        }
        None => {
            set_error(format!("node index {index} out of range for {} nodes", list.len()));
            WpcnStatus::InvalidParameter
        }
    }
}

/// Coordinates of EN `index`, meters.
///
/// # Safety
/// `placement` must be a live handle; `x`, `y` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wpcn_placement_en(placement: *const WpcnPlacement, index: usize, x: *mut f64, y: *mut f64) -> WpcnStatus {
    guard(|| match placement.as_ref() {
        Some(p) => node(&p.0.en_locations, index, x, y),
        None => null("placement"),
    })
}

/// Coordinates of AP `index`, meters.
///
/// # Safety
/// `placement` must be a live handle; `x`, `y` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wpcn_placement_ap(placement: *const WpcnPlacement, index: usize, x: *mut f64, y: *mut f64) -> WpcnStatus {
    guard(|| match placement.as_ref() {
        Some(p) => node(&p.0.ap_locations, index, x, y),
        None => null("placement"),
    })
}

/// Evaluates a placement. `omega` may be null; otherwise it must hold
/// `len >= number of devices` entries and receives each device's net rate.
///
/// # Safety
/// Handles must be live; `p_r` valid; `omega` null or `len` long.
#[no_mangle]
pub unsafe extern "C" fn wpcn_evaluate(
    scenario: *const WpcnScenario,
    placement: *const WpcnPlacement,
    p_r: *mut f64,
    omega: *mut f64,
    len: usize,
) -> WpcnStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else { return null("scenario") };
        let Some(p) = placement.as_ref() else { return null("placement") };
        if p_r.is_null() {
            return null("p_r");
        }
        let k = s.0.num_devices();
        if !omega.is_null() && len < k {
            set_error(format!("omega buffer holds {len} entries, {k} needed"));
            return WpcnStatus::InvalidParameter;
        }
        match evaluate(&p.0, &s.0) {
            Ok(m) => {
                *p_r = m.p_r;
                if !omega.is_null() {
                    std::slice::from_raw_parts_mut(omega, k).copy_from_slice(&m.omega);
                }
                WpcnStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
