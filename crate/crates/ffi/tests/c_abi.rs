use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use subtrend_ffi::*;

fn last_error() -> String {
    let p = st_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn dataset(csv: &str) -> *mut StDataset {
    let csv = CString::new(csv).unwrap();
    let mut ds = ptr::null_mut();
    let status = unsafe { st_dataset_from_csv(csv.as_ptr(), 0, &mut ds) };
    assert_eq!(status, StStatus::Ok, "{}", last_error());
    ds
}

const CSV: &str = "group,level,value\n\
    A,1,1.0\nA,1,2.0\nA,2,3.0\nA,2,0.5\nA,3,2.5\n\
    B,1,0.7\nB,1,1.1\nB,2,2.9\nB,2,3.3\nB,3,0.1\n";

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(st_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn csv_dataset_round_trip_through_test() {
    let ds = dataset(CSV);
    let mut levels = 0;
    assert_eq!(
        unsafe { st_dataset_num_levels(ds, &mut levels) },
        StStatus::Ok
    );
    assert_eq!(levels, 3);

    let mut opts = st_test_options_default();
    opts.n_boot = 500;
    opts.seed = 9;
    opts.keep_sample = true;
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { st_bootstrap_test(ds, &opts, &mut res) },
        StStatus::Ok
    );

    let mut summary = std::mem::MaybeUninit::<StTestSummary>::uninit();
    assert_eq!(
        unsafe { st_result_summary(res, summary.as_mut_ptr()) },
        StStatus::Ok
    );
    let summary = unsafe { summary.assume_init() };
    assert!(summary.has_critical_value);
    assert_eq!(summary.n_boot, 500);
    assert_eq!(summary.num_columns, 2);

    let mut data = ptr::null();
    let mut len = 0;
    assert_eq!(
        unsafe { st_result_bootstrap_sample(res, &mut data, &mut len) },
        StStatus::Ok
    );
    assert_eq!(len, 500);
    let sample = unsafe { std::slice::from_raw_parts(data, len) };
    let exceed = sample.iter().filter(|&&m| m >= summary.m_observed).count();
    assert_eq!(exceed as f64 / 500.0, summary.p_value);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { st_result_to_json(res, &mut json) }, StStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { st_string_free(json) };
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["p_value"].as_f64().unwrap(), summary.p_value);
    assert_eq!(value["seed"].as_u64().unwrap(), 9);

    unsafe {
        st_result_free(res);
        st_dataset_free(ds);
    }
}

#[test]
fn arrays_match_csv() {
    let a = [1.0, 2.0, 3.0, 0.5, 2.5];
    let b = [0.7, 1.1, 2.9, 3.3, 0.1];
    let sizes = [2usize, 2, 1];
    let mut from_arrays = ptr::null_mut();
    let status = unsafe {
        st_dataset_from_arrays(
            a.as_ptr(),
            sizes.as_ptr(),
            b.as_ptr(),
            sizes.as_ptr(),
            3,
            &mut from_arrays,
        )
    };
    assert_eq!(status, StStatus::Ok, "{}", last_error());
    let from_csv = dataset(CSV);

    let mut opts = st_test_options_default();
    opts.n_boot = 300;
    let mut json = [ptr::null_mut(); 2];
    for (i, ds) in [from_arrays, from_csv].into_iter().enumerate() {
        let mut res = ptr::null_mut();
        assert_eq!(
            unsafe { st_bootstrap_test(ds, &opts, &mut res) },
            StStatus::Ok
        );
        assert_eq!(
            unsafe { st_result_to_json(res, &mut json[i]) },
            StStatus::Ok
        );
        unsafe {
            st_result_free(res);
            st_dataset_free(ds);
        }
    }
    let texts: Vec<String> = json
        .iter()
        .map(|&p| {
            let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
            unsafe { st_string_free(p) };
            s
        })
        .collect();
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn m_statistic_of_real_table() {
    let o_x = [12.5, 6.5, 13.0, 0.0];
    let o_y = [5.0, 9.0, 5.0, 2.0];
    let t_x = [25u64, 25, 15, 3];
    let t_y = [9u64, 12, 20, 5];
    let mut m = 0.0;
    let status = unsafe {
        st_m_statistic(
            o_x.as_ptr(),
            o_y.as_ptr(),
            t_x.as_ptr(),
            t_y.as_ptr(),
            4,
            &mut m,
        )
    };
    assert_eq!(status, StStatus::Ok);
    assert!((m - 31.598).abs() < 1e-3, "{m}");
}

#[test]
fn fixed_table_with_dropped_pairs() {
    let o_x = [12.5, 6.5, 13.0, 0.0];
    let o_y = [5.0, 9.0, 5.0, 2.0];
    let t_x = [25u64, 25, 15, 3];
    let t_y = [9u64, 12, 20, 5];
    let pairs = [1usize, 2, 3, 4];
    let sx = [5usize, 5, 5, 3, 1, 0, 2, 0];
    let sy = [3usize, 3, 4, 5, 1, 0, 1, 0];
    let mut opts = st_test_options_default();
    opts.n_boot = 200;
    let mut res = ptr::null_mut();
    let status = unsafe {
        st_fixed_table_test(
            o_x.as_ptr(),
            o_y.as_ptr(),
            t_x.as_ptr(),
            t_y.as_ptr(),
            pairs.as_ptr(),
            4,
            sx.as_ptr(),
            sy.as_ptr(),
            8,
            &opts,
            &mut res,
        )
    };
    assert_eq!(status, StStatus::Ok, "{}", last_error());
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { st_result_to_json(res, &mut json) }, StStatus::Ok);
    let value: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert_eq!(value["dropped_pairs"], serde_json::json!([5, 6, 7]));
    unsafe {
        st_string_free(json);
        st_result_free(res);
    }

    // totals that the sizes cannot produce
    let bad = [25u64, 25, 15, 4];
    let status = unsafe {
        st_fixed_table_test(
            o_x.as_ptr(),
            o_y.as_ptr(),
            bad.as_ptr(),
            t_y.as_ptr(),
            pairs.as_ptr(),
            4,
            sx.as_ptr(),
            sy.as_ptr(),
            8,
            &opts,
            &mut res,
        )
    };
    assert_eq!(status, StStatus::MalformedInput);
    assert!(last_error().contains("pair 4"), "{}", last_error());
}

#[test]
fn exact_pmf_buffer_protocol() {
    let mut len = 0;
    let status = unsafe { st_exact_pmf(2, 2, 0.5, ptr::null_mut(), 0, &mut len) };
    assert_eq!(status, StStatus::BufferTooSmall);
    assert_eq!(len, 5);
    let mut mass = vec![0.0; len];
    let status = unsafe { st_exact_pmf(2, 2, 0.5, mass.as_mut_ptr(), mass.len(), &mut len) };
    assert_eq!(status, StStatus::Ok);
    assert_eq!(mass, [0.125, 0.25, 0.25, 0.25, 0.125]);

    let status = unsafe { st_exact_pmf(2, 2, 1.5, mass.as_mut_ptr(), mass.len(), &mut len) };
    assert_eq!(status, StStatus::InvalidArgument);
}

#[test]
fn error_codes() {
    let mut ds = ptr::null_mut();
    assert_eq!(
        unsafe { st_dataset_from_csv(ptr::null(), 0, &mut ds) },
        StStatus::NullArgument
    );
    let bad = CString::new("group,value\nA,1\n").unwrap();
    assert_eq!(
        unsafe { st_dataset_from_csv(bad.as_ptr(), 0, &mut ds) },
        StStatus::MalformedInput
    );
    assert!(last_error().contains("level"));

    let bytes = b"group,level,value\nA,1,\xff\n\0";
    let status = unsafe { st_dataset_from_csv(bytes.as_ptr().cast(), 0, &mut ds) };
    assert_eq!(status, StStatus::InvalidUtf8);

    // both pairs touch the empty middle level of group A
    let ds = dataset("group,level,value\nA,1,1\nA,1,2\nA,3,1\nA,3,2\nB,1,1\nB,2,1\nB,3,1\n");
    let opts = st_test_options_default();
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { st_bootstrap_test(ds, &opts, &mut res) },
        StStatus::NoComparablePairs
    );
    let mut opts_bad = opts;
    opts_bad.n_boot = 10;
    let ok = dataset(CSV);
    assert_eq!(
        unsafe { st_bootstrap_test(ok, &opts_bad, &mut res) },
        StStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { st_bootstrap_test(ok, ptr::null(), &mut res) },
        StStatus::NullArgument
    );
    unsafe {
        st_dataset_free(ds);
        st_dataset_free(ok);
        st_dataset_free(ptr::null_mut());
        st_result_free(ptr::null_mut());
        st_string_free(ptr::null_mut());
    }
}

#[test]
fn simulation_from_json() {
    let config = CString::new(
        r#"{"k":1,"sizes_x":[5,5],"sizes_y":[5,5],"true_p":[0.6],
            "n_rep":20,"n_boot":100,"alpha":1.0,"seed":3}"#,
    )
    .unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { st_simulate_json(config.as_ptr(), &mut out) };
    assert_eq!(status, StStatus::Ok, "{}", last_error());
    let report: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    unsafe { st_string_free(out) };
    assert_eq!(report["err"].as_f64().unwrap(), 1.0);

    let broken = CString::new("{").unwrap();
    let status = unsafe { st_simulate_json(broken.as_ptr(), &mut out) };
    assert_eq!(status, StStatus::MalformedInput);
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/subtrend.h"))
            .unwrap();
    let source =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15, "{exports:?}");
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
}

#[test]
fn c_client_compiles_against_header() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let compiler = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = std::env::temp_dir().join(format!("subtrend_smoke_{}.o", std::process::id()));
    let status = Command::new(&compiler)
        .args(["-std=c11", "-Wall", "-Wextra", "-Werror", "-c"])
        .arg("-I")
        .arg(dir.join("include"))
        .arg(dir.join("examples/smoke.c"))
        .arg("-o")
        .arg(&out)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "C compilation failed"),
        Err(e) => panic!("could not run C compiler `{compiler}`: {e}"),
    }
    let _ = std::fs::remove_file(out);
}
