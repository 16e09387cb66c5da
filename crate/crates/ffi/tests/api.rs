use std::ffi::{CStr, CString};
use std::ptr;

use wpcn::*;

fn last_error() -> String {
    let p = wpcn_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn generated(k: usize, seed: u64) -> *mut WpcnScenario {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { wpcn_scenario_generate(k, 24.0, seed, &mut s) }, WpcnStatus::Ok);
    s
}

#[test]
fn joint_placement_matches_the_library() {
    let s = generated(40, 3);
    let mut p = ptr::null_mut();
    let mut p_r = 0.0;
    assert_eq!(unsafe { wpcn_place_joint(s, 3, 4, 5, 3, &mut p, &mut p_r) }, WpcnStatus::Ok);
    let scenario = wpcn_core::io::generate_scenario(40, 24.0, 3).unwrap();
    let (expected, report) = wpcn_core::separated::alternating_joint(&scenario, 3, 4, 5, 3).unwrap();
    assert_eq!(p_r, report.t_star);
    unsafe {
        assert_eq!(wpcn_placement_num_ens(p), 3);
        assert_eq!(wpcn_placement_num_aps(p), 4);
        assert!(!wpcn_placement_is_colocated(p));
        for i in 0..4 {
            let (mut x, mut y) = (0.0, 0.0);
            assert_eq!(wpcn_placement_ap(p, i, &mut x, &mut y), WpcnStatus::Ok);
            assert_eq!((x, y), (expected.ap_locations[i].x, expected.ap_locations[i].y));
        }
        let mut omega = vec![0.0; 40];
        let mut again = 0.0;
        assert_eq!(wpcn_evaluate(s, p, &mut again, omega.as_mut_ptr(), 40), WpcnStatus::Ok);
        assert_eq!(again, p_r);
        assert_eq!(omega.iter().copied().fold(f64::INFINITY, f64::min), p_r);
        assert_eq!(wpcn_evaluate(s, p, &mut again, omega.as_mut_ptr(), 39), WpcnStatus::InvalidParameter);
        wpcn_placement_free(p);
        wpcn_scenario_free(s);
    }
}

#[test]
fn errors_are_reported() {
    let mut s = ptr::null_mut();
    let bad = CString::new("{\"devices\": [{\"x\": 1, \"y\": 99}]}").unwrap();
    assert_eq!(unsafe { wpcn_scenario_from_json(bad.as_ptr(), &mut s) }, WpcnStatus::Parse);
    assert!(s.is_null());
    assert!(last_error().contains("outside"), "{}", last_error());

    assert_eq!(unsafe { wpcn_scenario_from_json(ptr::null(), &mut s) }, WpcnStatus::NullPointer);

    let s = generated(5, 1);
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { wpcn_place_hap(s, 6, 0, &mut p, ptr::null_mut()) }, WpcnStatus::InvalidParameter);
    assert!(p.is_null());
    assert_eq!(unsafe { wpcn_scenario_set_gamma(s, f64::NAN) }, WpcnStatus::InvalidParameter);
    unsafe { wpcn_scenario_free(s) };
}

#[test]
fn json_round_trip_through_handles() {
    let s = generated(12, 9);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { wpcn_scenario_to_json(s, &mut text) }, WpcnStatus::Ok);
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { wpcn_scenario_from_json(text, &mut copy) }, WpcnStatus::Ok);
    let mut text2 = ptr::null_mut();
    assert_eq!(unsafe { wpcn_scenario_to_json(copy, &mut text2) }, WpcnStatus::Ok);
    unsafe {
        assert_eq!(CStr::from_ptr(text), CStr::from_ptr(text2));
        wpcn_string_free(text);
        wpcn_string_free(text2);
        wpcn_scenario_free(copy);
        wpcn_scenario_free(s);
    }
}

#[test]
fn min_cost_reports_infeasible_plans() {
    let s = generated(10, 4);
    unsafe {
        assert_eq!(wpcn_scenario_set_gamma(s, 1.0), WpcnStatus::Ok);
        let mut plan = WpcnPlan { m: 0, n: 0, cost: 0.0, t_star: 0.0, feasible: true };
        let mut p = ptr::null_mut();
        let st = wpcn_min_cost(s, WpcnMode::Separated, 1, 2, 2, 0, &mut plan, &mut p);
        assert_eq!(st, WpcnStatus::Infeasible);
        assert!(!plan.feasible);
        assert!(!p.is_null());
        let mut p_r = 0.0;
        assert_eq!(wpcn_evaluate(s, p, &mut p_r, ptr::null_mut(), 0), WpcnStatus::Ok);
        assert_eq!(p_r, plan.t_star);
        wpcn_placement_free(p);

        assert_eq!(wpcn_scenario_set_gamma(s, -1e6), WpcnStatus::Ok);
        let mut p = ptr::null_mut();
        assert_eq!(wpcn_min_cost(s, WpcnMode::Separated, 3, 3, 2, 0, &mut plan, &mut p), WpcnStatus::Ok);
        assert_eq!((plan.m, plan.n), (1, 1));
        assert!((plan.cost - 1.7).abs() < 1e-12);
        wpcn_placement_free(p);
        wpcn_scenario_free(s);
    }
}

#[test]
fn explicit_placements() {
    let s = generated(6, 2);
    let xs = [2.0, 20.0];
    let ys = [2.0, 20.0];
    let mut p = ptr::null_mut();
    unsafe {
        let st = wpcn_placement_new(s, xs.as_ptr(), ys.as_ptr(), 2, ptr::null(), ptr::null(), 0, true, &mut p);
        assert_eq!(st, WpcnStatus::Ok);
        assert!(wpcn_placement_is_colocated(p));
        assert_eq!(wpcn_placement_num_aps(p), 2);
        wpcn_placement_free(p);
        let mut q = ptr::null_mut();
        let st = wpcn_placement_new(s, xs.as_ptr(), ys.as_ptr(), 2, ptr::null(), ptr::null(), 1, false, &mut q);
        assert_eq!(st, WpcnStatus::NullPointer);
        let mut cc = ptr::null_mut();
        assert_eq!(wpcn_cluster_centers(s, 2, 2, false, 0, &mut cc, ptr::null_mut()), WpcnStatus::Ok);
        wpcn_placement_free(cc);
        wpcn_scenario_free(s);
    }
}
