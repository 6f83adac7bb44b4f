use std::ffi::{CStr, CString};
use std::ptr;

use evac_core::engine::run_evacuation;
use evac_core::io::scenario_file::load_scenario;
use evac_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = evac_last_error_message();
    assert!(!p.is_null(), "no error message recorded");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(name: &str) -> *mut EvacScenario {
    let mut s = ptr::null_mut();
    let status = unsafe { evac_scenario_load(cstr(name).as_ptr(), &mut s) };
    assert_eq!(status, EvacStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn run_matches_the_library() {
    let s = load("cafeteria_B");
    unsafe {
        assert_eq!(evac_scenario_agent_count(s), 20);
        assert_eq!(evac_scenario_exit_count(s), 4);
        assert_eq!(evac_scenario_seed(s), 2020);

        let mut r = ptr::null_mut();
        assert_eq!(evac_run(s, 5, &mut r), EvacStatus::Ok);
        let expected = run_evacuation(&load_scenario("cafeteria_B").unwrap().scenario, None, 5).unwrap();
        assert_eq!(evac_run_result_len(r), expected.len());
        assert_eq!(evac_run_result_average_s(r), expected.average_s);
        for i in 0..expected.len() {
            let (mut ms, mut exit, mut waits) = (0u64, 0u32, 0u32);
            assert_eq!(evac_run_result_agent(r, i, &mut ms, &mut exit, &mut waits), EvacStatus::Ok);
            assert_eq!(ms, expected.durations_ms[i]);
            assert_eq!(exit, expected.exit_ids[i]);
            assert_eq!(waits, expected.wait_events[i]);
        }
        let status = evac_run_result_agent(r, 20, ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(status, EvacStatus::OutOfRange);
        assert!(last_error().contains("20"));
        evac_run_result_free(r);
        evac_scenario_free(s);
    }
}

#[test]
fn optimize_through_handles() {
    let s = load("cafeteria_A");
    unsafe {
        let mut rep = ptr::null_mut();
        assert_eq!(evac_optimize(s, 3, 0, 2, &mut rep), EvacStatus::Ok);
        assert_eq!(evac_report_candidate_count(rep), 5);
        let best = evac_report_best_index(rep);
        let mut averages = Vec::new();
        for i in 0..5 {
            let (mut x, mut y, mut avg) = (0, 0, 0.0);
            assert_eq!(evac_report_candidate(rep, i, &mut x, &mut y, &mut avg), EvacStatus::Ok);
            assert_eq!(x, 70);
            assert!((35..=83).contains(&y));
            averages.push(avg);
        }
        assert!(averages.iter().all(|a| *a >= averages[best]));
        assert_eq!(evac_report_candidate(rep, 5, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), EvacStatus::OutOfRange);
        evac_report_free(rep);
        evac_scenario_free(s);
    }
}

#[test]
fn failures_report_status_and_message() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(evac_scenario_load(ptr::null(), &mut s), EvacStatus::NullPointer);
        assert!(s.is_null());
        assert_eq!(evac_scenario_load(cstr("/nonexistent/x.scn").as_ptr(), &mut s), EvacStatus::Io);
        assert!(last_error().contains("x.scn"));
        assert_eq!(evac_scenario_parse(cstr("[area]\nwidth = oops\n").as_ptr(), &mut s), EvacStatus::Parse);
        assert!(s.is_null());

        let mut r = ptr::null_mut();
        assert_eq!(evac_run(ptr::null(), 0, &mut r), EvacStatus::NullPointer);
        assert!(evac_run_result_average_s(ptr::null()).is_nan());
        assert_eq!(evac_run_result_len(ptr::null()), 0);
        assert_eq!(evac_scenario_agent_count(ptr::null()), 0);
        evac_scenario_free(ptr::null_mut());
        evac_run_result_free(ptr::null_mut());
        evac_report_free(ptr::null_mut());
    }
}

#[test]
fn timeouts_surface_as_timeout() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/cafeteria_A.scn"))
        .unwrap()
        .replace("max_ticks = 2400", "max_ticks = 3");
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(evac_scenario_parse(cstr(&text).as_ptr(), &mut s), EvacStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(evac_run(s, 1, &mut r), EvacStatus::Timeout);
        assert!(r.is_null());
        evac_scenario_free(s);
    }
}

#[test]
fn duration_text_round_trip() {
    unsafe {
        let mut ms = 0u64;
        assert_eq!(evac_parse_duration(cstr("0:18:225").as_ptr(), &mut ms), EvacStatus::Ok);
        assert_eq!(ms, 18_225);
        assert_eq!(evac_parse_duration(cstr("18.225").as_ptr(), &mut ms), EvacStatus::Parse);

        let mut needed = 0usize;
        assert_eq!(evac_format_duration(18_225, ptr::null_mut(), 0, &mut needed), EvacStatus::BufferTooSmall);
        assert_eq!(needed, "0:18:225".len() + 1);
        let mut small = [0 as std::ffi::c_char; 4];
        assert_eq!(evac_format_duration(18_225, small.as_mut_ptr(), small.len(), ptr::null_mut()), EvacStatus::BufferTooSmall);
        let mut buf = vec![0 as std::ffi::c_char; needed];
        assert_eq!(evac_format_duration(18_225, buf.as_mut_ptr(), buf.len(), ptr::null_mut()), EvacStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "0:18:225");
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/evac.h")).unwrap();
    for symbol in [
        "evac_last_error_message",
        "evac_scenario_load",
        "evac_scenario_parse",
        "evac_scenario_free",
        "evac_run",
        "evac_run_result_agent",
        "evac_optimize",
        "evac_report_candidate",
        "evac_parse_duration",
        "evac_format_duration",
        "EVAC_STATUS_BUFFER_TOO_SMALL",
        "struct EvacScenario",
    ] {
        assert!(header.contains(symbol), "{symbol}");
    }
}
