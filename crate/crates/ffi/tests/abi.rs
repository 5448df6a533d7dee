use std::ffi::{CStr, CString};
use std::ptr;

use imc_dse::space::SearchSpace;
use imc_dse_ffi::*;

fn last_error() -> String {
    let p = imc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_options(seed: u64) -> ImcOptions {
    ImcOptions {
        p_h: 40,
        p_e: 20,
        p_ga: 8,
        generations: 2,
        seed,
        ..imc_options_default()
    }
}

#[test]
fn default_spaces_and_json_round_trip() {
    unsafe {
        let s = imc_space_default(ImcMode::WeightStationary);
        assert_eq!(imc_space_size(s), 2_520_000);
        imc_space_free(s);

        let json = CString::new(SearchSpace::reduced_rram().to_json()).unwrap();
        let mut parsed = ptr::null_mut();
        assert_eq!(imc_space_from_json(json.as_ptr(), &mut parsed), ImcStatus::Ok);
        assert_eq!(imc_space_size(parsed), 375);
        assert_eq!(imc_space_gene_count(parsed), 10);
        imc_space_free(parsed);

        assert_eq!(imc_space_size(ptr::null()), 0);
        imc_space_free(ptr::null_mut());
    }
}

#[test]
fn bad_inputs_report_status_and_message() {
    unsafe {
        let mut s = ptr::null_mut();
        let bad = CString::new(r#"{"mode": "weight_stationary", "domains": [}"#).unwrap();
        assert_eq!(imc_space_from_json(bad.as_ptr(), &mut s), ImcStatus::ParseError);
        assert!(s.is_null());
        assert!(last_error().contains("line 1"));

        assert_eq!(imc_space_from_json(ptr::null(), &mut s), ImcStatus::NullPointer);

        let mut w = ptr::null_mut();
        let neg = CString::new(
            r#"{"name":"x","layers":[{"name":"l","kind":"fc","fan_in":-4,"fan_out":2,"in_activations":4,"out_activations":2}]}"#,
        )
        .unwrap();
        assert_eq!(imc_workloads_from_json(neg.as_ptr(), &mut w), ImcStatus::ParseError);
        assert!(last_error().contains("negative"));

        let mut c = 0.0;
        assert_eq!(imc_cost(1.0, 28, &mut c), ImcStatus::InvalidArgument);
        assert_eq!(imc_cost(100.0, 32, &mut c), ImcStatus::Ok);
        assert_eq!(c, 100.0);
    }
}

#[test]
fn optimize_and_inspect_result() {
    unsafe {
        let space = imc_space_reduced();
        let workloads = imc_workloads_default();
        assert_eq!(imc_workloads_len(workloads), 4);
        let opts = small_options(5);
        let mut r = ptr::null_mut();
        assert_eq!(imc_optimize(space, workloads, &opts, &mut r), ImcStatus::Ok);
        assert!(imc_result_best_feasible(r));
        assert!(imc_result_best_score(r).is_finite());
        assert!(imc_result_eval_count(r) > 0);

        let mut written = 0;
        let mut small = [0usize; 3];
        assert_eq!(
            imc_result_best_genes(r, small.as_mut_ptr(), small.len(), &mut written),
            ImcStatus::InvalidArgument
        );
        assert_eq!(written, 10);
        let mut genes = [0usize; 10];
        assert_eq!(
            imc_result_best_genes(r, genes.as_mut_ptr(), genes.len(), &mut written),
            ImcStatus::Ok
        );

        let json = imc_result_to_json(r);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        imc_string_free(json);
        let record: serde_json::Value = serde_json::from_str(&text).unwrap();
        let best: Vec<usize> = serde_json::from_value(record["best"]["design"].clone()).unwrap();
        assert_eq!(best, genes.to_vec());

        // same seed, same record
        let mut again = ptr::null_mut();
        assert_eq!(imc_optimize(space, workloads, &opts, &mut again), ImcStatus::Ok);
        let json2 = imc_result_to_json(again);
        assert_eq!(CStr::from_ptr(json2).to_str().unwrap(), text);
        imc_string_free(json2);

        imc_result_free(again);
        imc_result_free(r);
        imc_workloads_free(workloads);
        imc_space_free(space);
    }
}

#[test]
fn invalid_options_are_config_errors() {
    unsafe {
        let space = imc_space_reduced();
        let workloads = imc_workloads_default();
        let mut opts = small_options(0);
        opts.p_e = 100;
        let mut r = ptr::null_mut();
        assert_eq!(imc_optimize(space, workloads, &opts, &mut r), ImcStatus::ConfigError);
        let name = CString::new("speed").unwrap();
        let mut opts = small_options(0);
        opts.objective = name.as_ptr();
        assert_eq!(imc_optimize(space, workloads, &opts, &mut r), ImcStatus::ConfigError);
        assert!(r.is_null());
        assert_eq!(imc_optimize(ptr::null(), workloads, &opts, &mut r), ImcStatus::NullPointer);
        imc_workloads_free(workloads);
        imc_space_free(space);
    }
}

#[test]
fn hamming_distance() {
    let a = [0usize, 1, 2, 3];
    let b = [1usize, 1, 2, 0];
    let mut d = 0;
    unsafe {
        assert_eq!(imc_hamming(a.as_ptr(), b.as_ptr(), 4, &mut d), ImcStatus::Ok);
        assert_eq!(d, 2);
        assert_eq!(imc_hamming(a.as_ptr(), ptr::null(), 4, &mut d), ImcStatus::NullPointer);
    }
}
