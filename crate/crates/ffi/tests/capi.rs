use std::ffi::{CStr, CString};
use std::ptr;

use mixcurv_ffi::*;

fn preset(name: &str, params: Option<&str>) -> (MixcurvStatus, *mut MixcurvScenario) {
    let name = CString::new(name).unwrap();
    let params = params.map(|p| CString::new(p).unwrap());
    let mut out = ptr::null_mut();
    let st = unsafe {
        mixcurv_scenario_from_preset(name.as_ptr(), params.as_ref().map_or(ptr::null(), |p| p.as_ptr()), &mut out)
    };
    (st, out)
}

fn last_error() -> String {
    let p = mixcurv_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn preset_roundtrip_and_pointwise_value() {
    let (st, scn) = preset("warped_torus", None);
    assert_eq!(st, MixcurvStatus::Ok);
    let (mut d, mut n) = (0, 0);
    assert_eq!(unsafe { mixcurv_scenario_dims(scn, &mut d, &mut n) }, MixcurvStatus::Ok);
    assert_eq!((d, n), (2, 1));
    let id = CString::new("PW").unwrap();
    let x = [std::f64::consts::FRAC_PI_2, 0.4];
    let (mut l, mut r) = (0.0, 0.0);
    let st = unsafe { mixcurv_evaluate_pointwise(scn, id.as_ptr(), x.as_ptr(), 2, &mut l, &mut r) };
    assert_eq!(st, MixcurvStatus::Ok);
    assert!((l - 1.0 / 3.0).abs() < 1e-9 && (r - 1.0 / 3.0).abs() < 1e-9);
    let (mut s, mut sb) = (0.0, 0.0);
    let st = unsafe { mixcurv_mixed_scalar_curvatures(scn, x.as_ptr(), 2, &mut s, &mut sb) };
    assert_eq!(st, MixcurvStatus::Ok);
    // S_mix = -u''/u with u = 2 + sin x1
    assert!((s - 1.0 / 3.0).abs() < 1e-12 && (sb - s).abs() < 1e-12);
    unsafe { mixcurv_scenario_free(scn) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let (st, scn) = preset("no_such_preset", None);
    assert_eq!(st, MixcurvStatus::UnknownPreset);
    assert!(scn.is_null());
    assert!(last_error().contains("no_such_preset"));

    let (st, scn) = preset("skew_contorsion_t3", Some("c=0.5"));
    assert_eq!(st, MixcurvStatus::Ok);
    let id = CString::new("RICHH").unwrap();
    let x = [0.1, 0.2, 0.3];
    let (mut l, mut r) = (0.0, 0.0);
    let st = unsafe { mixcurv_evaluate_pointwise(scn, id.as_ptr(), x.as_ptr(), 3, &mut l, &mut r) };
    assert_eq!(st, MixcurvStatus::Precondition);
    assert!(last_error().contains("cond4"));
    let st = unsafe { mixcurv_evaluate_pointwise(scn, id.as_ptr(), x.as_ptr(), 2, &mut l, &mut r) };
    assert_eq!(st, MixcurvStatus::InvalidArgument);
    let st = unsafe { mixcurv_evaluate_pointwise(scn, ptr::null(), x.as_ptr(), 3, &mut l, &mut r) };
    assert_eq!(st, MixcurvStatus::NullPointer);
    unsafe { mixcurv_scenario_free(scn) };

    let bad = CString::new("{ not json").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { mixcurv_scenario_from_json(bad.as_ptr(), &mut out) };
    assert_ne!(st, MixcurvStatus::Ok);
    assert!(out.is_null());
}

#[test]
fn report_handle() {
    let (_, scn) = preset("flat_torus", None);
    let mut rep = ptr::null_mut();
    let st = unsafe { mixcurv_check(scn, ptr::null(), 8, 1e-9, &mut rep) };
    assert_eq!(st, MixcurvStatus::Ok);
    assert_eq!(unsafe { mixcurv_report_passed(rep) }, 1);
    let json = unsafe { mixcurv_report_json(rep) };
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"verdict\": \"splits\""));
    unsafe {
        mixcurv_string_free(json);
        mixcurv_report_free(rep);
        mixcurv_scenario_free(scn);
        mixcurv_report_free(ptr::null_mut());
    }
    assert_eq!(unsafe { mixcurv_report_passed(ptr::null()) }, -1);
}
