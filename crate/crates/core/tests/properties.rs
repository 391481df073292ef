use mixcurv::catalog::evaluate_pointwise;
use mixcurv::expr::Expr;
use mixcurv::frame::FrameRotation;
use mixcurv::invariants::invariants;
use mixcurv::linalg::Mat;
use mixcurv::point::{Field, PointData};
use mixcurv::scenario::Scenario;
use mixcurv::zoo::{build_preset, params};
use proptest::prelude::*;

fn generic(n: f64, k: f64) -> Scenario {
    build_preset("generic_t3", &params(&[("n", n), ("k", k)])).unwrap()
}

fn rot(k: usize, theta: f64) -> Mat<f64> {
    let mut m = Mat::identity(k);
    if k >= 2 {
        let (s, c) = theta.sin_cos();
        m.set(0, 0, c);
        m.set(0, 1, -s);
        m.set(1, 0, s);
        m.set(1, 1, c);
    }
    m
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..std::f64::consts::TAU, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_ignore_frame_choice(x in point(), a in -3.0..3.0f64, n in 1usize..=2) {
        let scn = generic(n as f64, 0.3);
        let rotated = scn.with_rotation(FrameRotation { top: rot(scn.n(), a), bot: rot(scn.p(), -0.5 * a) });
        let u = invariants(&PointData::new(&scn, &x).unwrap());
        let v = invariants(&PointData::new(&rotated, &x).unwrap());
        for (p, q) in [
            (u.s_mix, v.s_mix),
            (u.bar_s_mix, v.bar_s_mix),
            (u.h_top_sq, v.h_top_sq),
            (u.h_bot_sq, v.h_bot_sq),
            (u.t_top_sq, v.t_top_sq),
            (u.t_bot_sq, v.t_bot_sq),
        ] {
            prop_assert!((p - q).abs() < 1e-10, "{p} vs {q}");
        }
    }

    #[test]
    fn mixed_curvature_gap_is_quadratic_in_contorsion(x in point(), t in -2.0..2.0f64) {
        let scn = generic(1.0, 0.3);
        let gap = |s: f64| {
            let i = invariants(&PointData::new(&scn.with_contorsion_scale(s), &x).unwrap());
            i.bar_s_mix - i.s_mix
        };
        let (plus, minus) = (gap(1.0), gap(-1.0));
        let expect = 0.5 * (plus + minus) * t * t + 0.5 * (plus - minus) * t;
        prop_assert!((gap(t) - expect).abs() < 1e-10 * (1.0 + expect.abs()));
    }

    #[test]
    fn identities_hold_at_any_contorsion_strength(x in point(), t in -1.5..1.5f64) {
        let scn = generic(2.0, 0.3).with_contorsion_scale(t);
        for id in ["PW", "QQ", "IF1", "AHH", "RICHH-V1", "RIC-N"] {
            match evaluate_pointwise(&scn, id, &x) {
                Ok(r) => prop_assert!(r.relative() < 1e-11, "{id}: {}", r.relative()),
                Err(mixcurv::error::GeomError::Precondition { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(format!("{id}: {e}"))),
            }
        }
    }

    #[test]
    fn divergence_is_linear(
        x in point(),
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        k in prop::collection::vec(-2i32..=2, 3),
    ) {
        let scn = build_preset("hopf_s3", &params(&[])).unwrap();
        let x = vec![0.2 + 0.35 * x[0] / std::f64::consts::TAU * 3.0, x[1], x[2]];
        let v = [format!("sin({}*x2 + {}*x3)", k[0], k[1]), "cos(x1)".to_string(), format!("x1*sin({}*x3)", k[2])];
        let w = ["cos(x2)".to_string(), "x1^2".to_string(), "sin(x1 + x2)".to_string()];
        let parse = |f: &[String]| -> Vec<Expr> { f.iter().map(|s| Expr::parse(s).unwrap()).collect() };
        let combo: Vec<String> = v.iter().zip(&w).map(|(p, q)| format!("{a}*({p}) + {b}*({q})")).collect();
        let pd = PointData::new(&scn, &x).unwrap();
        let lhs = pd.divergence(Field::Coord(&parse(&combo)));
        let rhs = a * pd.divergence(Field::Coord(&parse(&v))) + b * pd.divergence(Field::Coord(&parse(&w)));
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }
}
