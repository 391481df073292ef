//! Acceptance criteria 1-10. Each criterion prints one `PASS`/`FAIL` line
//! and the test fails if any criterion does.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::{Duration, Instant};

use mixcurv::catalog::{
    evaluate_integral, evaluate_leaf, evaluate_pointwise, resolve_sign_variant, SignVariant, RESOLVED_VARIANT,
};
use mixcurv::contorsion::{bar_riemann, bar_riemann_direct};
use mixcurv::expr::Expr;
use mixcurv::extrinsic::Which;
use mixcurv::frame::FrameRotation;
use mixcurv::invariants::{bar_ricci_nn, invariants, Reading};
use mixcurv::linalg::Mat;
use mixcurv::point::{fd_divergence, Field, PointData};
use mixcurv::predicates::mixed_ai_deviation;
use mixcurv::quadrature::{build_grid, integrate, LeafSlice};
use mixcurv::report::{run_check, RunConfig};
use mixcurv::scenario::Scenario;
use mixcurv::splitting::{check_hypotheses, Verdict};
use mixcurv::zoo::{build_preset, params, PRESETS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn preset(name: &str, ps: &[(&str, f64)]) -> Scenario {
    build_preset(name, &params(ps)).unwrap()
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(|o| o.ok);
    let detail = parts.iter().map(|o| o.detail.as_str()).collect::<Vec<_>>().join("; ");
    Outcome { ok, detail }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let scn = preset("warped_torus", &[]);
    let grid = build_grid(&scn.chart, 64).unwrap();
    let worst = grid
        .nodes
        .iter()
        .map(|x| evaluate_pointwise(&scn, "PW", x).unwrap().relative())
        .fold(0.0, f64::max);
    let spot = evaluate_pointwise(&scn, "PW", &[FRAC_PI_2, 1.0]).unwrap();
    let dt = t.elapsed();
    all(vec![
        check(worst < 1e-7, format!("max rel {worst:.2e}")),
        check(
            (spot.lhs - 1.0 / 3.0).abs() < 1e-8 && (spot.rhs - 1.0 / 3.0).abs() < 1e-8,
            format!("spot lhs {:.12} rhs {:.12}", spot.lhs, spot.rhs),
        ),
        check(dt < Duration::from_secs(5), format!("{dt:.2?}")),
    ])
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let w = preset("warped_torus", &[]);
    let iw = evaluate_integral(&w, "PW-IF", &build_grid(&w.chart, 64).unwrap()).unwrap();
    let h = preset("hopf_s3", &[]);
    let hg = build_grid(&h.chart, 24).unwrap();
    let ih = evaluate_integral(&h, "PW-IF", &hg).unwrap();
    let point_max = hg.nodes[..200]
        .iter()
        .map(|x| evaluate_pointwise(&h, "PW-IF", x).unwrap().rhs.abs())
        .fold(0.0, f64::max);
    let dt = t.elapsed();
    all(vec![
        check(iw.lhs.abs() < 1e-9, format!("warped ∫ {:.2e}", iw.lhs)),
        check(ih.lhs.abs() < 1e-9, format!("hopf ∫ {:.2e}", ih.lhs)),
        check(point_max < 1e-12, format!("hopf integrand max {point_max:.2e}")),
        check(dt < Duration::from_secs(60), format!("{dt:.2?}")),
    ])
}

fn criterion_3() -> Outcome {
    let scn = preset("statistical_torus", &[("c", 0.3)]);
    let (mut res, mut anchor) = (0.0_f64, 0.0_f64);
    for x in scn.random_points(50, 3) {
        res = res.max(evaluate_pointwise(&scn, "QQ-STAT", &x).unwrap().residual);
        let inv = invariants(&PointData::new(&scn, &x).unwrap());
        anchor = anchor.max((inv.bar_s_mix - inv.s_mix + 0.09).abs());
    }
    all(vec![
        check(res < 1e-9, format!("residual {res:.2e}")),
        check(anchor < 1e-9, format!("|S̄−S + 0.09| {anchor:.2e}")),
    ])
}

fn criterion_4() -> Outcome {
    let scn = preset("skew_contorsion_t3", &[("c", 0.5)]);
    let (mut res, mut anchor) = (0.0_f64, 0.0_f64);
    for x in scn.random_points(50, 4) {
        res = res.max(evaluate_pointwise(&scn, "QQ-RC", &x).unwrap().relative());
        let inv = invariants(&PointData::new(&scn, &x).unwrap());
        anchor = anchor.max((inv.bar_s_mix + 0.5).abs());
    }
    all(vec![
        check(res < 1e-7, format!("residual {res:.2e}")),
        check(anchor < 1e-8, format!("|S̄_mix + 0.5| {anchor:.2e}")),
    ])
}

fn contorsion_presets() -> Vec<(String, Scenario)> {
    let mut v = vec![
        ("skew".to_string(), preset("skew_contorsion_t3", &[("c", 0.5)])),
        ("statistical".to_string(), preset("statistical_torus", &[("c111", 0.2), ("c122", -0.1)])),
        ("doubly_twisted".to_string(), preset("doubly_twisted", &[("n", 1.0), ("p", 2.0), ("tb", 0.3), ("tf", 0.2), ("tf2", 0.1)])),
    ];
    for class in ["general", "statistical", "metric_compatible"] {
        let mut ps = params(&[("n", 1.0), ("k", 0.3)]);
        ps.insert("class".into(), mixcurv::scenario::ParamValue::Text(class.into()));
        v.push((format!("generic_t3/{class}"), build_preset("generic_t3", &ps).unwrap()));
    }
    v
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0_f64;
    let mut names = Vec::new();
    for (name, scn) in contorsion_presets() {
        for x in scn.random_points(200, 5) {
            let pd = PointData::new(&scn, &x).unwrap();
            worst = worst.max(bar_riemann(&pd).max_abs_diff(&bar_riemann_direct(&pd)));
        }
        names.push(name);
    }
    check(worst < 1e-7, format!("max component diff {worst:.2e} over {}", names.join(", ")))
}

fn criterion_6() -> Outcome {
    let base = [("n", 1.0), ("p", 2.0)];
    let bare = preset("doubly_twisted", &base);
    let twisted = preset("doubly_twisted", &[("n", 1.0), ("p", 2.0), ("tb", 0.3), ("tf", 0.2), ("tf2", 0.1)]);
    let cases = vec![
        (bare.clone(), bare.random_points(40, 6)),
        (twisted.clone(), twisted.random_points(40, 6)),
    ];
    let r = resolve_sign_variant(&cases, 1e-6).unwrap();
    let per: Vec<String> = r.residuals.iter().map(|(v, x)| format!("{v:?} {x:.1e}")).collect();
    all(vec![
        check(r.unique() == Some(SignVariant::V1), format!("passing {:?}", r.passing)),
        check(RESOLVED_VARIANT == SignVariant::V1, per.join(" ")),
    ])
}

fn criterion_7() -> Outcome {
    let w = preset("warped_torus", &[]);
    let grid = build_grid(&w.chart, 64).unwrap();
    let integral = integrate(
        &w,
        &|x| {
            let r = bar_ricci_nn(&PointData::new(&w, x)?, Reading::Resolved)?;
            Ok(2.0 * r.sigma2 - r.ric_nn)
        },
        &grid,
    )
    .unwrap();
    let mut q = 0.0_f64;
    for scn in [w.clone(), preset("doubly_twisted", &[("n", 2.0), ("p", 1.0)])] {
        for x in scn.random_points(50, 7) {
            q = q.max(bar_ricci_nn(&PointData::new(&scn, &x).unwrap(), Reading::Resolved).unwrap().q.abs());
        }
    }
    let stat = preset("statistical_torus", &[("c111", 0.2), ("c112", 0.3), ("c222", -0.1)]);
    let ric = stat
        .random_points(50, 7)
        .iter()
        .map(|x| evaluate_pointwise(&stat, "RIC-N", x).unwrap().relative())
        .fold(0.0, f64::max);
    all(vec![
        check(integral.abs() < 1e-9, format!("∫(2σ₂ − Ric_NN) {integral:.2e}")),
        check(q < 1e-14, format!("max |Q| for 𝒯=0 {q:.1e}")),
        check(ric < 1e-6, format!("RIC-N statistical {ric:.2e}")),
    ])
}

fn criterion_8() -> Outcome {
    let w = preset("warped_torus", &[]);
    let grid = build_grid(&w.chart, 64).unwrap();
    let ai = grid
        .nodes
        .iter()
        .map(|x| mixed_ai_deviation(&PointData::new(&w, x).unwrap()))
        .fold(0.0, f64::max);
    if ai >= 1e-12 {
        return check(false, format!("mixed-ai {ai:.2e}"));
    }
    // D⊤ = span{∂₁}; leaves are x2 = const
    let mut worst = 0.0_f64;
    let m = 64;
    for k in 0..m {
        let leaf = LeafSlice::top(vec![0.0, TAU * k as f64 / m as f64]);
        assert_eq!(leaf.which, Which::Top);
        worst = worst.max(evaluate_leaf(&w, "IF-LEAF", &leaf, 64).unwrap().lhs.abs());
    }
    check(worst < 1e-9, format!("mixed-ai {ai:.1e}, max leaf ∫ {worst:.2e} over {m} leaves"))
}

fn rotation(theta: f64, n: usize, p: usize) -> FrameRotation {
    let rot = |k: usize| {
        let mut m = Mat::identity(k);
        if k >= 2 {
            let (s, c) = theta.sin_cos();
            m.set(0, 0, c);
            m.set(0, 1, -s);
            m.set(1, 0, s);
            m.set(1, 1, c);
        }
        m
    };
    FrameRotation { top: rot(n), bot: rot(p) }
}

fn gauge_invariance() -> Outcome {
    let mut worst = 0.0_f64;
    for (name, ps) in [("generic_t3", vec![("n", 2.0)]), ("hopf_s3", vec![]), ("generic_t3", vec![("n", 1.0)])] {
        let scn = preset(name, &ps);
        let rotated = scn.with_rotation(rotation(0.7, scn.n(), scn.p()));
        for x in scn.random_points(20, 9) {
            let a = invariants(&PointData::new(&scn, &x).unwrap());
            let b = invariants(&PointData::new(&rotated, &x).unwrap());
            for (u, v) in [
                (a.s_mix, b.s_mix),
                (a.bar_s_mix, b.bar_s_mix),
                (a.h_top_sq, b.h_top_sq),
                (a.h_bot_sq, b.h_bot_sq),
                (a.t_top_sq, b.t_top_sq),
                (a.t_bot_sq, b.t_bot_sq),
                (a.mean_top_sq, b.mean_top_sq),
                (a.mean_bot_sq, b.mean_bot_sq),
            ] {
                worst = worst.max((u - v).abs());
            }
            for id in ["PW", "QQ", "AHH", "IF1"] {
                let (ra, rb) = (evaluate_pointwise(&scn, id, &x).unwrap(), evaluate_pointwise(&rotated, id, &x).unwrap());
                worst = worst.max((ra.lhs - rb.lhs).abs()).max((ra.rhs - rb.rhs).abs());
            }
        }
    }
    check(worst < 1e-9, format!("gauge {worst:.2e}"))
}

fn ad_vs_fd() -> Outcome {
    let mut worst = 0.0_f64;
    for (name, ps) in [("generic_t3", vec![("n", 1.0)]), ("generic_t3", vec![]), ("hopf_s3", vec![]), ("warped_torus", vec![])] {
        let scn = preset(name, &ps);
        let h: Vec<f64> = scn.chart.widths().iter().map(|w| 1e-4 * w).collect();
        for x in scn.random_points(5, 10) {
            let pd = PointData::new(&scn, &x).unwrap();
            for f in [Field::MeanSum, Field::GlobalXi, Field::ContorsionMix, Field::Shape, Field::LeafXi] {
                let fd = fd_divergence(&scn, f, &x, &h).unwrap();
                worst = worst.max((pd.divergence(f) - fd).abs() / fd.abs().max(1.0));
            }
        }
    }
    check(worst < 1e-5, format!("AD vs FD {worst:.2e}"))
}

fn random_field(rng: &mut ChaCha8Rng, d: usize) -> Vec<Expr> {
    (0..d)
        .map(|_| {
            let terms: Vec<String> = (0..2)
                .map(|_| {
                    let ks: Vec<String> = (0..d).map(|s| format!("{}*x{}", rng.gen_range(-2..=2), s + 1)).collect();
                    format!("{:.6}*sin({} + {:.6})", rng.gen_range(-1.0..1.0), ks.join(" + "), rng.gen_range(0.0..TAU))
                })
                .collect();
            Expr::parse(&terms.join(" + ")).unwrap()
        })
        .collect()
}

fn divergence_theorem() -> Outcome {
    let mut worst = 0.0_f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut count = 0;
    for (name, _) in PRESETS {
        let scn = preset(name, &[]);
        if !scn.closed {
            continue;
        }
        let grid = build_grid(&scn.chart, if scn.dim() == 2 { 48 } else { 24 }).unwrap();
        let fields: Vec<Vec<Expr>> = (0..20).map(|_| random_field(&mut rng, scn.dim())).collect();
        for f in &fields {
            let v = integrate(&scn, &|x| Ok(PointData::new(&scn, x)?.divergence(Field::Coord(f))), &grid).unwrap();
            worst = worst.max(v.abs());
            count += 1;
        }
    }
    check(worst < 1e-9, format!("max |∫div V| {worst:.2e} over {count} fields"))
}

fn lorentz_flat() -> Outcome {
    let scn = preset("lorentz_flat", &[]);
    let mut worst = 0.0_f64;
    let mut eps_ok = true;
    for x in scn.random_points(20, 11) {
        let pd = PointData::new(&scn, &x).unwrap();
        eps_ok &= pd.base.eps[0] == -1.0 && pd.base.eps[1] == 1.0;
        for d in mixcurv::catalog::list_identities() {
            match evaluate_pointwise(&scn, d.id, &x) {
                Ok(r) => worst = worst.max(r.residual).max(r.lhs.abs()).max(r.rhs.abs()),
                Err(mixcurv::error::GeomError::Precondition { .. }) => {}
                Err(e) => return check(false, format!("{}: {e}", d.id)),
            }
        }
    }
    check(eps_ok && worst == 0.0, format!("ε = (−1, +1): {eps_ok}, max |value| {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    all(vec![gauge_invariance(), ad_vs_fd(), divergence_theorem(), lorentz_flat()])
}

fn criterion_10() -> Outcome {
    let verdict = |name: &str, ps: &[(&str, f64)]| {
        let scn = preset(name, ps);
        check_hypotheses(&scn, &build_grid(&scn.chart, 16).unwrap()).unwrap()
    };
    let flat = verdict("flat_torus", &[]).verdict;
    let dt = verdict("doubly_twisted", &[("u", 1.5), ("v", 0.5)]).verdict;
    let warped = verdict("warped_torus", &[]).verdict;
    let skew = verdict("skew_contorsion_t3", &[("c", 0.5)]);
    let cond4 = skew.predicates["cond4"];

    let t = Instant::now();
    let mut failures = Vec::new();
    for (name, _) in PRESETS {
        let report = run_check(&preset(name, &[]), &RunConfig::default()).unwrap();
        for r in report.identities.iter().filter(|r| !r.status_ok()) {
            failures.push(format!("{name}/{}", r.id));
        }
    }
    let dt_suite = t.elapsed();
    all(vec![
        check(flat == Verdict::Splits && dt == Verdict::Splits, format!("flat {flat}, constant doubly_twisted {dt}")),
        check(warped == Verdict::Obstructed { by: vec!["h⊥".into()] }, format!("warped {warped}")),
        check(
            (cond4 - 0.5).abs() < 1e-12 && skew.theorem("harmonic-splitting").unwrap().failing.contains(&"cond4".into()),
            format!("skew cond4 deviation {cond4}"),
        ),
        check(failures.is_empty(), format!("suite failures {failures:?}")),
        check(dt_suite < Duration::from_secs(300), format!("full suite {dt_suite:.2?}")),
    ])
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("pointwise Walczak formula", criterion_1),
        ("Walczak integral formula", criterion_2),
        ("mixed curvature difference, statistical", criterion_3),
        ("mixed curvature difference, Riemann-Cartan", criterion_4),
        ("two-route curvature agreement", criterion_5),
        ("sign variant uniqueness", criterion_6),
        ("normal Ricci remark", criterion_7),
        ("leafwise integral formula", criterion_8),
        ("structural properties", criterion_9),
        ("splitting analyzer and full suite", criterion_10),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        println!(
            "criterion {:>2} {} {name}: {} [{:.2?}]",
            k + 1,
            if o.ok { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed()
        );
        if !o.ok {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
