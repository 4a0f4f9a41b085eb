use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use stoclot_ffi::*;

const INSTANCE: &str = r#"{
  "k": 1,
  "scc": true,
  "metric": {"type": "matrix", "labels": ["a", "b", "c"],
             "d": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]},
  "facilities": ["a", "b", "c"],
  "clients": ["a", "b", "c"]
}"#;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { stoclot_string_free(s) };
    text
}

fn last_error() -> String {
    let p = stoclot_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn load() -> *mut StoclotInstance {
    let json = CString::new(INSTANCE).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { stoclot_instance_from_json(json.as_ptr(), true, &mut inst) }, StoclotStatus::Ok);
    inst
}

#[test]
fn instance_round_trip() {
    let inst = load();
    unsafe {
        assert_eq!(stoclot_instance_n_clients(inst), 3);
        assert_eq!(stoclot_instance_n_facilities(inst), 3);
        assert_eq!(stoclot_instance_k(inst), 1);
        let mut out = ptr::null_mut();
        assert_eq!(stoclot_instance_to_json(inst, &mut out), StoclotStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["k"], 1);
        stoclot_instance_free(inst);
        stoclot_instance_free(ptr::null_mut());
        assert_eq!(stoclot_instance_k(ptr::null()), 0);
    }
}

#[test]
fn bad_documents_give_input_status() {
    let json = CString::new("{not json").unwrap();
    let mut inst = ptr::null_mut();
    let st = unsafe { stoclot_instance_from_json(json.as_ptr(), true, &mut inst) };
    assert_eq!(st, StoclotStatus::Input);
    assert!(inst.is_null());
    assert!(last_error().contains("instance json"));
    let st = unsafe { stoclot_instance_from_json(ptr::null(), true, &mut inst) };
    assert_eq!(st, StoclotStatus::NullArgument);
}

#[test]
fn dep_round_through_abi() {
    let y = [0.5, 0.5, 1.0, 0.0];
    let mut idx = [usize::MAX; 4];
    let mut len = 0;
    let st = unsafe { stoclot_dep_round(y.as_ptr(), y.len(), 3, idx.as_mut_ptr(), &mut len) };
    assert_eq!(st, StoclotStatus::Ok);
    assert_eq!(len, 2);
    assert!(idx[..len].contains(&2));
    let bad = [1.5];
    let st = unsafe { stoclot_dep_round(bad.as_ptr(), 1, 3, idx.as_mut_ptr(), &mut len) };
    assert_eq!(st, StoclotStatus::Input);
    // same seed, same answer as the library
    let lib = stoclot::dep_round(&y, &mut stoclot::RandomSource::new(3)).unwrap();
    unsafe { stoclot_dep_round(y.as_ptr(), y.len(), 3, idx.as_mut_ptr(), &mut len) };
    assert_eq!(&idx[..len], lib.as_slice());
}

#[test]
fn sampling_and_verification() {
    let inst = load();
    let demand = CString::new(
        r#"{"chance": [{"client": "a", "p": 1, "r": 1}, {"client": "b", "p": 1, "r": 1}, {"client": "c", "p": 1, "r": 1}]}"#,
    )
    .unwrap();
    let algo = CString::new("general").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(stoclot_sample(inst, algo.as_ptr(), demand.as_ptr(), 5, &mut out), StoclotStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["set"].as_array().unwrap().len(), 1);

        assert_eq!(stoclot_verify(inst, algo.as_ptr(), demand.as_ptr(), 2000, 5, &mut out), StoclotStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(v["samples"], 2000);

        let unknown = CString::new("nope").unwrap();
        assert_eq!(stoclot_sample(inst, unknown.as_ptr(), demand.as_ptr(), 5, &mut out), StoclotStatus::Input);

        // radius 0.1 leaves every ball without enough mass for k = 1
        let tight = CString::new(
            r#"{"chance": [{"client": "a", "p": 1, "r": 0}, {"client": "b", "p": 1, "r": 0}, {"client": "c", "p": 1, "r": 0}]}"#,
        )
        .unwrap();
        let st = stoclot_sample(inst, algo.as_ptr(), tight.as_ptr(), 5, &mut out);
        assert_eq!(st, StoclotStatus::Infeasible);
        let cert: serde_json::Value = serde_json::from_str(&last_error()).unwrap();
        assert!(cert["kind"].is_string());
        stoclot_instance_free(inst);
    }
}

#[test]
fn certification_entry_points() {
    let mut b = 0.0;
    assert_eq!(unsafe { stoclot_certify_scc(1.0, 256, &mut b) }, StoclotStatus::Ok);
    assert!((b - 2.0).abs() < 1e-9);
    assert_eq!(unsafe { stoclot_certify_scc(2.0, 256, &mut b) }, StoclotStatus::Input);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { stoclot_certify_partial(2, 10, 4, ptr::null(), false, &mut out) },
        StoclotStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert!(v["bound"].as_f64().unwrap() > 1.5);
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(stoclot_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/stoclot.h");
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(status) = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header])
            .status()
        else {
            eprintln!("{compiler} not available; skipping");
            continue;
        };
        assert!(status.success(), "{compiler} rejected the header");
    }
}
