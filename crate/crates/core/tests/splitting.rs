//! Whenever a theorem's hypotheses are met, its conclusion must be observed.

use mixcurv::quadrature::build_grid;
use mixcurv::scenario::Scenario;
use mixcurv::splitting::{check_hypotheses, Verdict};
use mixcurv::zoo::{build_preset, params, PRESETS};

fn zoo() -> Vec<(String, Scenario)> {
    let mut v: Vec<(String, Scenario)> =
        PRESETS.iter().map(|(n, _)| (n.to_string(), build_preset(n, &params(&[])).unwrap())).collect();
    for ps in [
        vec![("u", 1.5), ("v", 0.5)],
        vec![("n", 2.0), ("p", 1.0), ("u", 1.0), ("v", 1.0)],
        vec![("n", 1.0), ("p", 2.0), ("tb", 0.3), ("tf", 0.2)],
    ] {
        v.push((format!("doubly_twisted{ps:?}"), build_preset("doubly_twisted", &params(&ps)).unwrap()));
    }
    v.push(("statistical_torus/c".into(), build_preset("statistical_torus", &params(&[("c111", 0.4)])).unwrap()));
    v
}

#[test]
fn applicable_theorems_are_sound() {
    for (name, scn) in zoo() {
        let grid = build_grid(&scn.chart, if scn.dim() == 2 { 16 } else { 8 }).unwrap();
        let r = check_hypotheses(&scn, &grid).unwrap();
        assert_eq!(r.theorems.len(), 10);
        for t in &r.theorems {
            assert_eq!(t.applicable, t.failing.is_empty(), "{name}/{}", t.id);
            if t.applicable {
                assert_eq!(t.conclusion_holds, Some(true), "{name}: {} applies but its conclusion fails", t.id);
            } else {
                assert_eq!(t.conclusion_holds, None, "{name}/{}", t.id);
            }
        }
        match &r.verdict {
            Verdict::Splits => {
                let c = &r.conclusion;
                let worst = [c.h_top, c.h_bot, c.t_top, c.t_bot].into_iter().fold(0.0, f64::max);
                assert!(worst <= r.tolerance, "{name}: splits but {worst:e}");
            }
            Verdict::Obstructed { by } => assert!(!by.is_empty(), "{name}"),
        }
        assert!(r.bar_s_mix_min <= r.bar_s_mix_max, "{name}");
    }
}

#[test]
fn hopf_has_positive_mixed_curvature_and_twisted_complement() {
    let scn = build_preset("hopf_s3", &params(&[])).unwrap();
    let r = check_hypotheses(&scn, &build_grid(&scn.chart, 8).unwrap()).unwrap();
    assert!((r.bar_s_mix_min - 2.0).abs() < 1e-9 && (r.bar_s_mix_max - 2.0).abs() < 1e-9);
    assert_eq!(r.verdict, Verdict::Obstructed { by: vec!["T⊥".into()] });
}

#[test]
fn closed_scenarios_imply_integrability_assumptions() {
    let scn = build_preset("flat_torus", &params(&[])).unwrap();
    let r = check_hypotheses(&scn, &build_grid(&scn.chart, 8).unwrap()).unwrap();
    assert_eq!(r.verdict, Verdict::Splits);
    assert!(r.theorem("harmonic-splitting").unwrap().applicable);
}
