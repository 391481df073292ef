//! Re-derived forms hold on every scenario; the forms as printed fail
//! exactly where they differ.

use mixcurv::catalog::{descriptor, list_identities, pointwise_sides, EvalOptions, Kind, RESOLVED_VARIANT};
use mixcurv::error::GeomError;
use mixcurv::invariants::Reading;
use mixcurv::scenario::{ParamValue, Scenario};
use mixcurv::zoo::{build_preset, contorsion_preset, params, preset_doc};

fn preset(name: &str, ps: &[(&str, f64)]) -> Scenario {
    build_preset(name, &params(ps)).unwrap()
}

/// `name` with its contorsion replaced by the generic field of class `class`.
fn with_generic(name: &str, ps: &[(&str, f64)], class: &str) -> Scenario {
    let mut doc = preset_doc(name, &params(ps)).unwrap();
    let d = Scenario::from_doc(&doc).unwrap().dim();
    let mut cp = params(&[("k", 0.2)]);
    cp.insert("class".into(), ParamValue::Text(class.into()));
    doc.contorsion = contorsion_preset("generic", d, &cp).unwrap();
    doc.params.insert("k".into(), ParamValue::Num(0.2));
    Scenario::from_doc(&doc).unwrap()
}

fn scenarios() -> Vec<(String, Scenario)> {
    let mut v = Vec::new();
    let bases: [(&str, Vec<(&str, f64)>); 4] = [
        ("warped_torus", vec![]),
        ("hopf_s3", vec![]),
        ("doubly_twisted", vec![("n", 1.0), ("p", 2.0)]),
        ("doubly_twisted", vec![("n", 2.0), ("p", 1.0)]),
    ];
    for (name, ps) in &bases {
        let tag = format!("{name}{ps:?}");
        v.push((tag.clone(), preset(name, ps)));
        for class in ["statistical", "metric_compatible", "general"] {
            v.push((format!("{tag}+{class}"), with_generic(name, ps, class)));
        }
    }
    v.push(("flat".into(), preset("flat_torus", &[])));
    v.push(("lorentz_flat".into(), preset("lorentz_flat", &[])));
    v.push(("skew".into(), preset("skew_contorsion_t3", &[("c", 0.5)])));
    v.push(("statistical".into(), preset("statistical_torus", &[("c111", 0.2), ("c112", 0.3), ("c222", -0.1)])));
    v.push((
        "doubly_twisted+tb".into(),
        preset("doubly_twisted", &[("n", 1.0), ("p", 2.0), ("tb", 0.3), ("tf", 0.2)]),
    ));
    v
}

/// Worst relative residual of `id` on `scn`, or `None` if a hypothesis fails.
fn worst(scn: &Scenario, id: &str, reading: Reading) -> Option<f64> {
    let desc = descriptor(id).unwrap();
    let mut w = 0.0_f64;
    for x in scn.random_points(8, 1) {
        match pointwise_sides(scn, &desc, &x, EvalOptions { reading }) {
            Ok((l, r)) => w = w.max((l - r).abs() / l.abs().max(r.abs()).max(1.0)),
            Err(GeomError::Precondition { .. }) => return None,
            Err(e) => panic!("{id}: {e}"),
        }
    }
    Some(w)
}

#[test]
fn resolved_forms_hold_everywhere() {
    let cases = scenarios();
    for d in list_identities() {
        if d.variant().is_some_and(|v| v != RESOLVED_VARIANT) {
            continue;
        }
        let mut applied = 0;
        for (name, scn) in &cases {
            if let Some(w) = worst(scn, d.id, Reading::Resolved) {
                assert!(w < 1e-12, "{} on {name}: {w:e}", d.id);
                applied += 1;
            }
        }
        assert!(applied > 0, "{} never applicable", d.id);
    }
}

fn literal_fails(id: &str, scenario: &str) {
    let (_, scn) = scenarios().into_iter().find(|(n, _)| n == scenario).unwrap();
    let w = worst(&scn, id, Reading::Literal).expect("applicable");
    assert!(w > 1e-4, "{id} as printed unexpectedly holds on {scenario}: {w:e}");
}

#[test]
fn printed_forms_fail_where_they_differ() {
    for (id, scenario) in [
        ("IF1-RC", "warped_torus[]+metric_compatible"),
        ("IF1-RC", "hopf_s3[]+metric_compatible"),
        ("IF-LEAF-STAT", "warped_torus[]+statistical"),
        ("IF-LEAF-STAT", "statistical"),
        ("RIC-N", "warped_torus[]+general"),
        ("RIC-N-IF", "doubly_twisted[(\"n\", 2.0), (\"p\", 1.0)]"),
        ("AHH", "doubly_twisted[(\"n\", 1.0), (\"p\", 2.0)]"),
        ("AHH-IF", "doubly_twisted[(\"n\", 2.0), (\"p\", 1.0)]"),
        ("RICHH", "doubly_twisted+tb"),
        ("IF01B", "doubly_twisted[(\"n\", 1.0), (\"p\", 2.0)]"),
        ("UMB-T6", "warped_torus[]"),
        ("TWIST", "doubly_twisted[(\"n\", 1.0), (\"p\", 2.0)]"),
    ] {
        literal_fails(id, scenario);
    }
}

#[test]
fn printed_and_resolved_agree_elsewhere() {
    for id in ["PW", "QQ", "QQ-STAT", "QQ-RC", "IF1", "IF1-STAT", "IF-LEAF", "IF-LEAF-RC", "TH4", "UMB-C5"] {
        for (name, scn) in scenarios() {
            if let Some(w) = worst(&scn, id, Reading::Literal) {
                assert!(w < 1e-12, "{id} on {name}: {w:e}");
            }
        }
    }
}

#[test]
fn only_one_variant_is_resolved() {
    let variants: Vec<_> = list_identities().iter().filter_map(|d| d.variant()).collect();
    assert_eq!(variants.len(), 4);
    let dt = preset("doubly_twisted", &[("n", 1.0), ("p", 2.0), ("tb", 0.3), ("tf", 0.2)]);
    for v in variants {
        let w = worst(&dt, v.id(), Reading::Resolved).unwrap();
        assert_eq!(w < 1e-12, v == RESOLVED_VARIANT, "{v:?}: {w:e}");
    }
}

#[test]
fn kinds_are_consistent() {
    for d in list_identities() {
        let integral = d.id.ends_with("-IF") || d.id.starts_with("IF");
        assert_eq!(d.kind != Kind::Pointwise, integral, "{}", d.id);
    }
}
