//! Preset scenarios. Every preset expands into an explicit
//! [`ScenarioDoc`], so presets and documents share one construction path.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::contorsion::ConnectionClass;
use crate::error::{GeomError, Result};
use crate::scenario::{
    ChartDoc, ContorsionDoc, ContorsionSpec, Dims, ExprText, MetricDoc, ParamValue, Scenario, ScenarioDoc, WarpingDoc,
};

pub type Params = BTreeMap<String, ParamValue>;

/// `(name, summary)` of every preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("flat_torus", "flat T^(n+p), first q axes timelike; params n, p, q"),
    ("warped_torus", "g = dx1^2 + u^2 dx2^2 on T^2; param u (default 2+sin(x1))"),
    (
        "doubly_twisted",
        "g = v^2 g_B + u^2 g_F on T^(n+p) with contorsion u^2 T_B + v^2 T_F; params n, p, u, v, tb, tf, tf2",
    ),
    ("hopf_s3", "round unit S^3 in Hopf coordinates, D_top = Hopf fibres"),
    ("skew_contorsion_t3", "flat T^3, D_top = span{e1,e2}, T_X Y = c X x Y; param c"),
    (
        "statistical_torus",
        "flat T^2 with totally symmetric cubic form; params c111, c112, c122, c222",
    ),
    ("lorentz_flat", "g = -dx1^2 + dx2^2 on T^2, D_top = span{d/dx1}"),
    (
        "generic_t3",
        "curved T^3 with non-constant contorsion; params n (1|2), k, class (general|statistical|metric_compatible)",
    ),
];

fn num(p: &Params, key: &str, default: f64) -> Result<f64> {
    match p.get(key) {
        None => Ok(default),
        Some(ParamValue::Num(v)) => Ok(*v),
        Some(ParamValue::Text(t)) => t.trim().parse().map_err(|_| GeomError::Schema {
            path: format!("params.{key}"),
            message: format!("expected a number, got `{t}`"),
        }),
    }
}

fn count(p: &Params, key: &str, default: usize) -> Result<usize> {
    let v = num(p, key, default as f64)?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(GeomError::Schema {
            path: format!("params.{key}"),
            message: format!("expected a non-negative integer, got {v}"),
        });
    }
    Ok(v as usize)
}

fn text(p: &Params, key: &str, default: &str) -> String {
    match p.get(key) {
        Some(ParamValue::Text(t)) => t.clone(),
        Some(ParamValue::Num(v)) => format!("{v:?}"),
        None => default.into(),
    }
}

fn t(s: impl Into<String>) -> ExprText {
    ExprText::Text(s.into())
}

fn zero() -> ExprText {
    ExprText::Num(0.0)
}

fn diag(entries: Vec<ExprText>) -> Vec<Vec<ExprText>> {
    let d = entries.len();
    entries
        .into_iter()
        .enumerate()
        .map(|(k, e)| {
            let mut row = vec![zero(); d];
            row[k] = e;
            row
        })
        .collect()
}

fn axis(d: usize, k: usize) -> Vec<ExprText> {
    let mut v = vec![zero(); d];
    v[k] = ExprText::Num(1.0);
    v
}

fn torus_chart(d: usize) -> ChartDoc {
    ChartDoc {
        ranges: vec![(0.0, TAU); d],
        periodic: vec![true; d],
    }
}

fn cube_zero(d: usize) -> Vec<Vec<Vec<ExprText>>> {
    vec![vec![vec![zero(); d]; d]; d]
}

/// Torus chart, coordinate `D⊤` on the first `n` axes, no contorsion.
fn base_doc(name: &str, n: usize, p: usize, q: usize, params: &Params) -> ScenarioDoc {
    ScenarioDoc {
        name: name.into(),
        dims: Some(Dims { top: n, bot: p }),
        signature_index: q,
        chart: Some(torus_chart(n + p)),
        metric: MetricDoc::default(),
        distribution_top: Some((0..n).map(|k| axis(n + p, k)).collect()),
        contorsion: ContorsionDoc::default(),
        params: params.clone(),
        closed: None,
        warping: None,
    }
}

/// Expands a preset into an explicit document.
pub fn preset_doc(name: &str, params: &Params) -> Result<ScenarioDoc> {
    match name {
        "flat_torus" => {
            let (n, p, q) = (count(params, "n", 1)?, count(params, "p", 1)?, count(params, "q", 0)?);
            let d = n + p;
            if q > d {
                return Err(GeomError::Schema {
                    path: "params.q".into(),
                    message: format!("index {q} exceeds dimension {d}"),
                });
            }
            let mut doc = base_doc(name, n, p, q, params);
            doc.metric.components = Some(diag(
                (0..d).map(|k| ExprText::Num(if k < q { -1.0 } else { 1.0 })).collect(),
            ));
            Ok(doc)
        }
        "lorentz_flat" => {
            let mut doc = base_doc(name, 1, 1, 1, params);
            doc.metric.components = Some(diag(vec![ExprText::Num(-1.0), ExprText::Num(1.0)]));
            Ok(doc)
        }
        "warped_torus" => {
            let u = text(params, "u", "2 + sin(x1)");
            let mut doc = base_doc(name, 1, 1, 0, params);
            doc.metric.components = Some(diag(vec![ExprText::Num(1.0), t(format!("({u})^2"))]));
            doc.warping = Some(WarpingDoc {
                u: t(u),
                v: ExprText::Num(1.0),
            });
            Ok(doc)
        }
        "doubly_twisted" => doubly_twisted(params),
        "hopf_s3" => {
            let mut doc = base_doc(name, 1, 2, 0, params);
            doc.chart = Some(ChartDoc {
                ranges: vec![(0.0, FRAC_PI_2), (0.0, TAU), (0.0, TAU)],
                periodic: vec![false, true, true],
            });
            doc.metric.components = Some(diag(vec![
                ExprText::Num(1.0),
                t("cos(x1)^2"),
                t("sin(x1)^2"),
            ]));
            doc.distribution_top = Some(vec![vec![zero(), ExprText::Num(1.0), ExprText::Num(1.0)]]);
            doc.closed = Some(true);
            Ok(doc)
        }
        "skew_contorsion_t3" => {
            let mut doc = base_doc(name, 2, 1, 0, params);
            doc.params.entry("c".into()).or_insert(ParamValue::Num(0.5));
            doc.metric.components = Some(diag(vec![ExprText::Num(1.0); 3]));
            doc.contorsion = contorsion_preset("skew", 3, &doc.params)?;
            Ok(doc)
        }
        "statistical_torus" => {
            let mut doc = base_doc(name, 1, 1, 0, params);
            if let Some(c) = params.get("c") {
                doc.params.entry("c112".into()).or_insert(c.clone());
            }
            for (k, v) in [("c111", 0.0), ("c112", 0.3), ("c122", 0.0), ("c222", 0.0)] {
                doc.params.entry(k.into()).or_insert(ParamValue::Num(v));
            }
            doc.metric.components = Some(diag(vec![ExprText::Num(1.0); 2]));
            doc.contorsion = contorsion_preset("statistical", 2, &doc.params)?;
            Ok(doc)
        }
        "generic_t3" => {
            let n = count(params, "n", 2)?;
            if !(1..=2).contains(&n) {
                return Err(GeomError::Schema {
                    path: "params.n".into(),
                    message: "generic_t3 supports n = 1 or 2".into(),
                });
            }
            let mut doc = base_doc(name, n, 3 - n, 0, params);
            doc.params.entry("k".into()).or_insert(ParamValue::Num(0.1));
            let g = [
                ["1.5 + 0.3*sin(x3)", "0.2*cos(x1)", "0.1*sin(x2)"],
                ["0.2*cos(x1)", "1.4 + 0.25*sin(x1 + x2)", "0.15*cos(x3)"],
                ["0.1*sin(x2)", "0.15*cos(x3)", "1.3 + 0.2*cos(x1)"],
            ];
            doc.metric.components = Some(g.iter().map(|r| r.iter().map(|s| t(*s)).collect()).collect());
            doc.distribution_top = Some(if n == 2 {
                vec![
                    vec![ExprText::Num(1.0), zero(), t("0.3*sin(x3)")],
                    vec![zero(), ExprText::Num(1.0), t("0.25*cos(x1)")],
                ]
            } else {
                vec![vec![ExprText::Num(1.0), t("0.2*cos(x3)"), t("0.3*sin(x2)")]]
            });
            doc.contorsion = contorsion_preset("generic", 3, &doc.params)?;
            Ok(doc)
        }
        other => Err(GeomError::UnknownPreset(other.into())),
    }
}

fn doubly_twisted(params: &Params) -> Result<ScenarioDoc> {
    let (n, p) = (count(params, "n", 1)?, count(params, "p", 1)?);
    if n == 0 || p == 0 {
        return Err(GeomError::Schema {
            path: "params".into(),
            message: "n and p must be at least 1".into(),
        });
    }
    let d = n + p;
    let sum: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    let alt: Vec<String> = (1..=d)
        .map(|k| if k == 1 { "x1".to_string() } else { format!(" - x{k}") })
        .collect();
    let u = text(params, "u", &format!("2 + sin({})/2", sum.join(" + ")));
    let v = text(params, "v", &format!("2 + cos({})/2", alt.concat()));
    let (tb, tf, tf2) = (num(params, "tb", 0.0)?, num(params, "tf", 0.0)?, num(params, "tf2", 0.0)?);
    let mut doc = base_doc("doubly_twisted", n, p, 0, params);
    doc.metric.components = Some(diag(
        (0..d)
            .map(|k| t(if k < n { format!("({v})^2") } else { format!("({u})^2") }))
            .collect(),
    ));
    doc.warping = Some(WarpingDoc { u: t(u.clone()), v: t(v.clone()) });
    if tb != 0.0 || tf != 0.0 || tf2 != 0.0 {
        // 𝒯_B: (𝒯_B)^{x1}_{x_a x_a} = tb; 𝒯_F: (𝒯_F)^{y1}_{y_i y_i} = tf,
        // (𝒯_F)^{y1}_{y1 y2} = tf2
        let mut c = cube_zero(d);
        for a in 0..n {
            c[0][a][a] = t(format!("({u})^2*tb"));
        }
        for i in n..d {
            c[n][i][i] = t(format!("({v})^2*tf"));
        }
        if p >= 2 {
            c[n][n][n + 1] = t(format!("({v})^2*tf2"));
        }
        doc.contorsion = ContorsionDoc::Spec(ContorsionSpec {
            components: Some(c),
            ..Default::default()
        });
        for (k, val) in [("tb", tb), ("tf", tf), ("tf2", tf2)] {
            doc.params.insert(k.into(), ParamValue::Num(val));
        }
    }
    Ok(doc)
}

/// Contorsion presets usable inside any document: `skew` (3D, param `c`),
/// `statistical` (params `c<ijk>`), `generic` (params `k`, `class`).
pub fn contorsion_preset(name: &str, d: usize, params: &Params) -> Result<ContorsionDoc> {
    match name {
        "none" => Ok(ContorsionDoc::default()),
        "skew" => {
            if d != 3 {
                return Err(GeomError::Schema {
                    path: "contorsion.preset".into(),
                    message: "skew contorsion needs dimension 3".into(),
                });
            }
            let mut c = cube_zero(3);
            // 𝒯^λ_{μν} = c ε_{λμν}
            for (l, m, nu, s) in [
                (0, 1, 2, 1.0),
                (1, 2, 0, 1.0),
                (2, 0, 1, 1.0),
                (0, 2, 1, -1.0),
                (2, 1, 0, -1.0),
                (1, 0, 2, -1.0),
            ] {
                c[l][m][nu] = t(if s > 0.0 { "c" } else { "-c" });
            }
            Ok(ContorsionDoc::Spec(ContorsionSpec {
                components: Some(c),
                class: ConnectionClass::MetricCompatible,
                ..Default::default()
            }))
        }
        "statistical" => {
            let mut c = cube_zero(d);
            for l in 0..d {
                for m in 0..d {
                    for nu in 0..d {
                        let mut idx = [l + 1, m + 1, nu + 1];
                        idx.sort_unstable();
                        let key = format!("c{}{}{}", idx[0], idx[1], idx[2]);
                        if params.contains_key(&key) {
                            c[l][m][nu] = t(key);
                        }
                    }
                }
            }
            Ok(ContorsionDoc::Spec(ContorsionSpec {
                lower_components: Some(c),
                class: ConnectionClass::Statistical,
                ..Default::default()
            }))
        }
        "generic" => {
            let class = match text(params, "class", "general").as_str() {
                "general" => ConnectionClass::General,
                "statistical" => ConnectionClass::Statistical,
                "metric_compatible" => ConnectionClass::MetricCompatible,
                other => {
                    return Err(GeomError::Schema {
                        path: "params.class".into(),
                        message: format!("unknown class `{other}`"),
                    })
                }
            };
            let wave = |l: usize, m: usize, nu: usize| -> String {
                let terms: Vec<String> = (0..d)
                    .map(|s| format!("{}*x{}", (l + 2 * m + 3 * nu + s) % 3, s + 1))
                    .collect();
                let phase = 0.7 * (l + 1) as f64 + 1.3 * (m + 1) as f64 + 0.4 * (nu + 1) as f64;
                format!("sin({} + {phase:?})", terms.join(" + "))
            };
            let mut c = cube_zero(d);
            for l in 0..d {
                for m in 0..d {
                    for nu in 0..d {
                        c[l][m][nu] = match class {
                            ConnectionClass::General => t(format!("k*{}", wave(l, m, nu))),
                            ConnectionClass::Statistical => {
                                let mut idx = [l, m, nu];
                                idx.sort_unstable();
                                t(format!("k*{}", wave(idx[0], idx[1], idx[2])))
                            }
                            // lower 𝒯_{λμν} antisymmetric in (λ, ν)
                            ConnectionClass::MetricCompatible => {
                                if l == nu {
                                    zero()
                                } else {
                                    t(format!("k*({} - {})", wave(l, m, nu), wave(nu, m, l)))
                                }
                            }
                        };
                    }
                }
            }
            let spec = match class {
                ConnectionClass::General => ContorsionSpec {
                    components: Some(c),
                    class,
                    ..Default::default()
                },
                _ => ContorsionSpec {
                    lower_components: Some(c),
                    class,
                    ..Default::default()
                },
            };
            Ok(ContorsionDoc::Spec(spec))
        }
        other => Err(GeomError::UnknownPreset(format!("contorsion `{other}`"))),
    }
}

pub fn build_preset(name: &str, params: &Params) -> Result<Scenario> {
    Scenario::from_doc(&preset_doc(name, params)?)
}

/// Convenience for tests and the CLI: numeric parameters from pairs.
pub fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), ParamValue::Num(*v))).collect()
}

/// Parses `k=v` CLI pairs; values that parse as numbers become numeric.
pub fn parse_param_pairs(pairs: &[String]) -> Result<Params> {
    let mut out = Params::new();
    for pair in pairs {
        let (k, v) = pair.split_once('=').ok_or_else(|| GeomError::Schema {
            path: "--param".into(),
            message: format!("expected k=v, got `{pair}`"),
        })?;
        let val = match v.trim().parse::<f64>() {
            Ok(x) => ParamValue::Num(x),
            Err(_) => ParamValue::Text(v.to_string()),
        };
        out.insert(k.trim().to_string(), val);
    }
    Ok(out)
}
