//! Scenarios: chart + metric + distribution + contorsion + parameters, and
//! their JSON document form.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chart::{Chart, MetricField};
use crate::contorsion::{classify_connection, ConnectionClass, ContorsionField, ContorsionStorage};
use crate::dual::Scalar;
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::frame::FrameRotation;

/// Seed of the pseudo-random part of the probe set.
pub const PROBE_SEED: u64 = 0x5EED;
pub const PROBE_RANDOM: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub top: usize,
    pub bot: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartDoc {
    pub ranges: Vec<(f64, f64)>,
    pub periodic: Vec<bool>,
}

/// An expression given either as text or as a bare number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExprText {
    Num(f64),
    Text(String),
}

impl ExprText {
    fn parse(&self, path: &str) -> Result<Expr> {
        match self {
            ExprText::Num(v) => Ok(Expr::num(*v)),
            ExprText::Text(s) => Expr::parse(s).map_err(|e| GeomError::Schema {
                path: path.into(),
                message: e.to_string(),
            }),
        }
    }
}

impl From<&str> for ExprText {
    fn from(s: &str) -> Self {
        ExprText::Text(s.into())
    }
}

impl From<String> for ExprText {
    fn from(s: String) -> Self {
        ExprText::Text(s)
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<ExprText>>>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ContorsionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// `components[λ][μ][ν] = 𝒯^λ_{μν}`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<Vec<ExprText>>>>,
    /// `lower_components[λ][μ][ν] = g(𝒯_{∂μ}∂ν, ∂λ)`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_components: Option<Vec<Vec<Vec<ExprText>>>>,
    #[serde(default)]
    pub class: ConnectionClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ContorsionDoc {
    /// The string `"none"`.
    Tag(String),
    Spec(ContorsionSpec),
}

impl Default for ContorsionDoc {
    fn default() -> Self {
        ContorsionDoc::Tag("none".into())
    }
}

/// Warping functions of a doubly-twisted product: `g = v²g_B + u²g_F`, with
/// `D⊤` tangent to the `g_B` factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpingDoc {
    pub u: ExprText,
    pub v: ExprText,
}

/// Parameter value: numbers bind into expressions, strings are preset
/// arguments such as warping functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Dims>,
    #[serde(default)]
    pub signature_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartDoc>,
    #[serde(default)]
    pub metric: MetricDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution_top: Option<Vec<Vec<ExprText>>>,
    #[serde(default)]
    pub contorsion: ContorsionDoc,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    /// Closedness certified by the document even if some chart axis is not
    /// periodic (e.g. Hopf coordinates on S³).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warping: Option<WarpingDoc>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub chart: Chart,
    pub metric: MetricField,
    /// Spanning fields of `D⊤`, coordinate components.
    pub top_fields: Vec<Vec<Expr>>,
    pub contorsion: ContorsionField,
    pub params: BTreeMap<String, f64>,
    pub closed: bool,
    /// `(u, v)` when the scenario is a doubly-twisted product.
    pub warping: Option<(Expr, Expr)>,
    /// Optional constant recombination of the adapted frame.
    pub rotation: Option<FrameRotation>,
    pub doc: ScenarioDoc,
}

fn numeric_params(p: &BTreeMap<String, ParamValue>) -> BTreeMap<String, f64> {
    p.iter()
        .filter_map(|(k, v)| match v {
            ParamValue::Num(x) => Some((k.clone(), *x)),
            ParamValue::Text(_) => None,
        })
        .collect()
}

fn bound(text: &ExprText, path: &str, params: &BTreeMap<String, f64>, d: usize) -> Result<Expr> {
    let e = text.parse(path)?.bind(params).map_err(|e| GeomError::Schema {
        path: path.into(),
        message: e.to_string(),
    })?;
    if let Some(k) = e.max_var() {
        if k >= d {
            return Err(GeomError::Schema {
                path: path.into(),
                message: format!("references x{} but the chart has dimension {d}", k + 1),
            });
        }
    }
    Ok(e)
}

fn cube(
    c: &[Vec<Vec<ExprText>>],
    path: &str,
    params: &BTreeMap<String, f64>,
    d: usize,
) -> Result<Vec<Expr>> {
    if c.len() != d || c.iter().any(|r| r.len() != d || r.iter().any(|s| s.len() != d)) {
        return Err(GeomError::Schema {
            path: path.into(),
            message: format!("expected a {d}x{d}x{d} array"),
        });
    }
    let mut out = Vec::with_capacity(d * d * d);
    for (l, plane) in c.iter().enumerate() {
        for (m, row) in plane.iter().enumerate() {
            for (nu, t) in row.iter().enumerate() {
                out.push(bound(t, &format!("{path}[{l}][{m}][{nu}]"), params, d)?);
            }
        }
    }
    Ok(out)
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn n(&self) -> usize {
        self.chart.dim_top
    }

    pub fn p(&self) -> usize {
        self.chart.dim_bot
    }

    pub fn eval_top_fields<T: Scalar>(&self, x: &[T]) -> Vec<Vec<T>> {
        self.top_fields
            .iter()
            .map(|f| f.iter().map(|e| e.eval(x)).collect())
            .collect()
    }

    /// Builds and verifies a scenario from a document. Documents whose metric
    /// names a preset are expanded through the zoo first.
    pub fn from_doc(doc: &ScenarioDoc) -> Result<Self> {
        if let Some(name) = &doc.metric.preset {
            let mut expanded = crate::zoo::preset_doc(name, &doc.params)?;
            if !doc.name.is_empty() {
                expanded.name = doc.name.clone();
            }
            if !matches!(&doc.contorsion, ContorsionDoc::Tag(t) if t == "none") {
                expanded.contorsion = doc.contorsion.clone();
            }
            return Self::from_explicit(&expanded);
        }
        Self::from_explicit(doc)
    }

    fn from_explicit(doc: &ScenarioDoc) -> Result<Self> {
        let schema = |path: &str, message: String| GeomError::Schema {
            path: path.into(),
            message,
        };
        let dims = doc.dims.as_ref().ok_or_else(|| schema("dims", "missing".into()))?;
        let cd = doc.chart.as_ref().ok_or_else(|| schema("chart", "missing".into()))?;
        let chart = Chart::new(dims.top, dims.bot, cd.ranges.clone(), cd.periodic.clone()).map_err(|e| match e {
            GeomError::InvalidChart(m) => schema("chart", m),
            other => other,
        })?;
        let d = chart.dim();
        let params = numeric_params(&doc.params);

        let comps = doc
            .metric
            .components
            .as_ref()
            .ok_or_else(|| schema("metric", "needs `preset` or `components`".into()))?;
        if comps.len() != d {
            return Err(schema("metric.components", format!("expected {d} rows, got {}", comps.len())));
        }
        let mut table = Vec::with_capacity(d);
        for (mu, row) in comps.iter().enumerate() {
            if row.len() != d {
                return Err(schema(
                    &format!("metric.components[{mu}]"),
                    format!("expected {d} entries, got {}", row.len()),
                ));
            }
            let mut r = Vec::with_capacity(d);
            for (nu, t) in row.iter().enumerate() {
                r.push(bound(t, &format!("metric.components[{mu}][{nu}]"), &params, d)?);
            }
            table.push(r);
        }
        let metric = MetricField::new(table, doc.signature_index)?;

        let dt = doc
            .distribution_top
            .as_ref()
            .ok_or_else(|| schema("distribution_top", "missing".into()))?;
        if dt.len() != dims.top {
            return Err(schema(
                "distribution_top",
                format!("expected {} spanning fields, got {}", dims.top, dt.len()),
            ));
        }
        let mut top_fields = Vec::with_capacity(dt.len());
        for (k, f) in dt.iter().enumerate() {
            if f.len() != d {
                return Err(schema(
                    &format!("distribution_top[{k}]"),
                    format!("expected {d} components, got {}", f.len()),
                ));
            }
            let mut v = Vec::with_capacity(d);
            for (l, t) in f.iter().enumerate() {
                v.push(bound(t, &format!("distribution_top[{k}][{l}]"), &params, d)?);
            }
            top_fields.push(v);
        }

        let contorsion = match &doc.contorsion {
            ContorsionDoc::Tag(t) if t == "none" => ContorsionField::zero(d),
            ContorsionDoc::Tag(t) => return Err(schema("contorsion", format!("unknown tag `{t}`"))),
            ContorsionDoc::Spec(spec) => {
                let storage = match (&spec.preset, &spec.components, &spec.lower_components) {
                    (Some(p), None, None) => {
                        let expanded = crate::zoo::contorsion_preset(p, d, &doc.params)?;
                        match expanded {
                            ContorsionDoc::Spec(s) => {
                                contorsion_storage(&s, &params, d, &schema)?.with_class(spec.class.max_class(s.class))
                            }
                            ContorsionDoc::Tag(_) => ContorsionField::zero(d),
                        }
                    }
                    (None, _, _) => contorsion_storage(spec, &params, d, &schema)?,
                    _ => {
                        return Err(schema(
                            "contorsion",
                            "give exactly one of `preset`, `components`, `lower_components`".into(),
                        ))
                    }
                };
                storage
            }
        };

        let warping = match &doc.warping {
            None => None,
            Some(w) => Some((bound(&w.u, "warping.u", &params, d)?, bound(&w.v, "warping.v", &params, d)?)),
        };
        let closed = chart.all_periodic() || doc.closed.unwrap_or(false);
        let scn = Scenario {
            name: doc.name.clone(),
            chart,
            metric,
            top_fields,
            contorsion,
            params,
            closed,
            warping,
            rotation: None,
            doc: doc.clone(),
        };
        scn.verify()?;
        Ok(scn)
    }

    /// Construction-time checks on the probe set: metric nondegenerate with
    /// the declared index, frames exist, declared contorsion class holds.
    pub fn verify(&self) -> Result<()> {
        let probes = self.probe_points();
        for x in &probes {
            self.metric.check_at(x)?;
            crate::point::local::<f64>(self, x)?;
        }
        classify_connection(self, &probes)?;
        Ok(())
    }

    /// `3^d` lattice at cell centres plus [`PROBE_RANDOM`] seeded points.
    /// Non-periodic axes keep 5% away from their ends.
    pub fn probe_points(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::new();
        let total = 3usize.pow(d as u32);
        for k in 0..total {
            let mut idx = k;
            let mut x = Vec::with_capacity(d);
            for &(lo, hi) in &self.chart.ranges {
                let j = idx % 3;
                idx /= 3;
                x.push(lo + (j as f64 + 0.5) / 3.0 * (hi - lo));
            }
            out.push(x);
        }
        out.extend(self.random_points(PROBE_RANDOM, PROBE_SEED));
        out
    }

    /// Seeded pseudo-random interior points.
    pub fn random_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.chart
                    .ranges
                    .iter()
                    .zip(&self.chart.periodic)
                    .map(|(&(lo, hi), &per)| {
                        let w = hi - lo;
                        let (a, b) = if per { (lo, hi) } else { (lo + 0.05 * w, hi - 0.05 * w) };
                        rng.gen_range(a..b)
                    })
                    .collect()
            })
            .collect()
    }

    /// Same scenario with the adapted frame recombined by `r`.
    pub fn with_rotation(&self, r: FrameRotation) -> Self {
        let mut s = self.clone();
        s.rotation = Some(r);
        s
    }

    /// Same scenario with the contorsion multiplied by `t`.
    pub fn with_contorsion_scale(&self, t: f64) -> Self {
        let mut s = self.clone();
        let scale = |c: &Vec<Expr>| -> Vec<Expr> {
            c.iter()
                .map(|e| {
                    if e.is_zero_literal() {
                        e.clone()
                    } else {
                        Expr::Bin(crate::expr::BinOp::Mul, Box::new(Expr::num(t)), Box::new(e.clone()))
                    }
                })
                .collect()
        };
        s.contorsion.storage = match &self.contorsion.storage {
            ContorsionStorage::Zero => ContorsionStorage::Zero,
            ContorsionStorage::Mixed(c) => ContorsionStorage::Mixed(scale(c)),
            ContorsionStorage::Lower(c) => ContorsionStorage::Lower(scale(c)),
        };
        s
    }

    /// Hex SHA-256 of the canonical document.
    pub fn descriptor_hash(&self) -> String {
        let text = serde_json::to_string(&self.doc).unwrap_or_default();
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The explicit document this scenario was built from.
    pub fn to_doc(&self) -> ScenarioDoc {
        self.doc.clone()
    }
}

impl ContorsionField {
    fn with_class(mut self, c: ConnectionClass) -> Self {
        self.declared_class = c;
        self
    }
}

impl ConnectionClass {
    /// The more specific of two declarations (a preset's own class wins over
    /// the default `general`).
    fn max_class(self, other: ConnectionClass) -> ConnectionClass {
        if self == ConnectionClass::General {
            other
        } else {
            self
        }
    }
}

fn contorsion_storage(
    spec: &ContorsionSpec,
    params: &BTreeMap<String, f64>,
    d: usize,
    schema: &dyn Fn(&str, String) -> GeomError,
) -> Result<ContorsionField> {
    let storage = match (&spec.components, &spec.lower_components) {
        (Some(c), None) => ContorsionStorage::Mixed(cube(c, "contorsion.components", params, d)?),
        (None, Some(c)) => ContorsionStorage::Lower(cube(c, "contorsion.lower_components", params, d)?),
        (None, None) => return Err(schema("contorsion", "needs `components` or `lower_components`".into())),
        (Some(_), Some(_)) => {
            return Err(schema(
                "contorsion",
                "give only one of `components`, `lower_components`".into(),
            ))
        }
    };
    Ok(ContorsionField {
        dim: d,
        storage,
        declared_class: spec.class,
    })
}

/// Parses a JSON scenario document.
pub fn parse_doc(text: &str) -> Result<ScenarioDoc> {
    serde_json::from_str(text).map_err(|e| GeomError::Schema {
        path: format!("<document> line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Loads a scenario from JSON text.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    Scenario::from_doc(&parse_doc(text)?)
}

/// Loads a scenario from a file path.
pub fn load_scenario_file(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))?;
    load_scenario(&text)
}
