//! Tensor-product quadrature over a chart box and over coordinate-slice
//! leaves.
//!
//! Periodic axes use the trapezoid rule, non-periodic axes Gauss–Legendre.
//! Node values are computed in parallel and reduced by pairwise summation in
//! node order, so results do not depend on the thread count.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::Chart;
use crate::error::{GeomError, Result};
use crate::extrinsic::Which;
use crate::frame::build_frame;
use crate::linalg::Mat;
use crate::scenario::Scenario;

pub const MIN_RESOLUTION: usize = 4;

/// Tolerance for a coordinate axis to count as tangent to a distribution.
const SLICE_TOL: f64 = 1e-10;

/// Scalar field evaluated at a coordinate point.
pub type ScalarField<'a> = dyn Fn(&[f64]) -> Result<f64> + Sync + 'a;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    PeriodicTrapezoid,
    GaussLegendreProduct,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureGrid {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `GaussLegendreProduct` as soon as one axis is non-periodic.
    pub kind: GridKind,
    pub resolution: Vec<usize>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn axis_rule(range: (f64, f64), periodic: bool, m: usize) -> Vec<(f64, f64)> {
    let (a, b) = range;
    if periodic {
        let h = (b - a) / m as f64;
        (0..m).map(|k| (a + k as f64 * h, h)).collect()
    } else {
        let rule = GaussLegendre::new(NonZeroUsize::new(m).expect("m >= 4"));
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut pts: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (mid + half * x, half * w))
            .collect();
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        pts
    }
}

/// Product grid with `resolution` nodes on every axis.
pub fn build_grid(chart: &Chart, resolution: usize) -> Result<QuadratureGrid> {
    build_grid_axes(chart, &vec![resolution; chart.dim()])
}

pub fn build_grid_axes(chart: &Chart, resolution: &[usize]) -> Result<QuadratureGrid> {
    if resolution.len() != chart.dim() {
        return Err(GeomError::RankMismatch(format!(
            "{} resolutions for a {}-dimensional chart",
            resolution.len(),
            chart.dim()
        )));
    }
    if let Some(&m) = resolution.iter().find(|&&m| m < MIN_RESOLUTION) {
        return Err(GeomError::Quadrature(format!(
            "resolution {m} below the minimum of {MIN_RESOLUTION} nodes per axis"
        )));
    }
    let rules: Vec<Vec<(f64, f64)>> = (0..chart.dim())
        .map(|k| axis_rule(chart.ranges[k], chart.periodic[k], resolution[k]))
        .collect();
    let total: usize = resolution.iter().product();
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; chart.dim()];
    for _ in 0..total {
        nodes.push(idx.iter().enumerate().map(|(k, &i)| rules[k][i].0).collect());
        weights.push(idx.iter().enumerate().map(|(k, &i)| rules[k][i].1).product());
        // last axis fastest
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < resolution[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    let kind = if chart.all_periodic() {
        GridKind::PeriodicTrapezoid
    } else {
        GridKind::GaussLegendreProduct
    };
    Ok(QuadratureGrid {
        nodes,
        weights,
        kind,
        resolution: resolution.to_vec(),
    })
}

/// Sum with pairwise splitting; deterministic for a fixed input order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if v.len() <= BLOCK {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Evaluates `term` at every node in parallel; the first failing node (in
/// node order) is reported.
fn weighted_terms(n: usize, term: impl Fn(usize) -> Result<f64> + Sync + Send) -> Result<Vec<f64>> {
    let vals: Vec<Result<f64>> = (0..n).into_par_iter().map(&term).collect();
    vals.into_iter()
        .enumerate()
        .map(|(node, r)| {
            r.and_then(|v| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(GeomError::NonFinite {
                        what: "integrand".into(),
                        point: vec![],
                    })
                }
            })
            .map_err(|e| GeomError::AtNode {
                node,
                source: Box::new(e),
            })
        })
        .collect()
}

fn volume_factor(g: &Mat<f64>) -> f64 {
    g.det().abs().sqrt()
}

/// `Σ w · f · √|det g|` over the grid.
/// `√|det g|` at `x`.
pub fn volume_element(scn: &Scenario, x: &[f64]) -> f64 {
    volume_factor(&scn.metric.eval(x))
}

pub fn integrate(scn: &Scenario, f: &ScalarField<'_>, grid: &QuadratureGrid) -> Result<f64> {
    let terms = weighted_terms(grid.len(), |k| {
        let x = &grid.nodes[k];
        let g: Mat<f64> = scn.metric.eval(x);
        Ok(grid.weights[k] * f(x)? * volume_factor(&g))
    })?;
    Ok(pairwise_sum(&terms))
}

/// A leaf of `D⊤` or `D⊥` through `base`, required to be a coordinate slice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeafSlice {
    pub which: Which,
    pub base: Vec<f64>,
}

impl LeafSlice {
    pub fn top(base: Vec<f64>) -> Self {
        Self { which: Which::Top, base }
    }

    pub fn bot(base: Vec<f64>) -> Self {
        Self { which: Which::Bot, base }
    }
}

/// Coordinate axes tangent to the chosen distribution at `x`.
pub(crate) fn tangent_axes(scn: &Scenario, which: Which, x: &[f64]) -> Result<Vec<usize>> {
    let d = scn.dim();
    let g: Mat<f64> = scn.metric.eval(x);
    let fields = scn.eval_top_fields(x);
    let fv = build_frame(&g, &fields, scn.p(), None, x)?;
    let block: Vec<usize> = match which {
        Which::Top => (0..fv.n).collect(),
        Which::Bot => (fv.n..d).collect(),
    };
    let mut axes = Vec::new();
    for k in 0..d {
        let mut resid: Vec<f64> = (0..d).map(|l| if l == k { 1.0 } else { 0.0 }).collect();
        for &a in &block {
            let e = &fv.vecs[a];
            let c = fv.eps[a] * (0..d).map(|l| g.at(k, l) * e[l]).sum::<f64>();
            for l in 0..d {
                resid[l] -= c * e[l];
            }
        }
        if resid.iter().map(|r| r * r).sum::<f64>().sqrt() < SLICE_TOL {
            axes.push(k);
        }
    }
    Ok(axes)
}

fn unsupported(leaf: &LeafSlice, why: &str) -> GeomError {
    GeomError::UnsupportedLeaf(format!("{:?} leaf through {:?}: {why}", leaf.which, leaf.base))
}

/// Integral over the leaf through `leaf.base` with the induced volume form.
pub fn leaf_integrate(scn: &Scenario, f: &ScalarField<'_>, leaf: &LeafSlice, resolution: usize) -> Result<f64> {
    let d = scn.dim();
    if leaf.base.len() != d {
        return Err(GeomError::RankMismatch(format!(
            "leaf base point of length {} in dimension {d}",
            leaf.base.len()
        )));
    }
    let k = match leaf.which {
        Which::Top => scn.n(),
        Which::Bot => scn.p(),
    };
    let axes = tangent_axes(scn, leaf.which, &leaf.base)?;
    if axes.len() != k {
        return Err(unsupported(leaf, "distribution is not spanned by coordinate axes"));
    }
    let sub = Chart {
        dim_top: k,
        dim_bot: 0,
        ranges: axes.iter().map(|&a| scn.chart.ranges[a]).collect(),
        periodic: axes.iter().map(|&a| scn.chart.periodic[a]).collect(),
    };
    let grid = build_grid(&sub, resolution)?;
    let embed = |y: &[f64]| {
        let mut x = leaf.base.clone();
        for (j, &a) in axes.iter().enumerate() {
            x[a] = y[j];
        }
        x
    };
    let terms = weighted_terms(grid.len(), |node| {
        let x = embed(&grid.nodes[node]);
        if tangent_axes(scn, leaf.which, &x)? != axes {
            return Err(unsupported(leaf, "leaf leaves the coordinate slice"));
        }
        let g: Mat<f64> = scn.metric.eval(&x);
        let mut gi = Mat::zeros(k);
        for (i, &a) in axes.iter().enumerate() {
            for (j, &b) in axes.iter().enumerate() {
                gi.set(i, j, g.at(a, b));
            }
        }
        Ok(grid.weights[node] * f(&x)? * volume_factor(&gi))
    })?;
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build_preset, params};
    use std::f64::consts::{PI, TAU};

    #[test]
    fn flat_torus_grid_is_uniform() {
        let grid = build_grid(&Chart::torus(1, 1), 64).unwrap();
        assert_eq!(grid.len(), 4096);
        assert_eq!(grid.kind, GridKind::PeriodicTrapezoid);
        let w = (TAU / 64.0).powi(2);
        assert!(grid.weights.iter().all(|&v| (v - w).abs() < 1e-15));
    }

    #[test]
    fn low_resolution_rejected() {
        assert!(matches!(build_grid(&Chart::torus(1, 1), 3), Err(GeomError::Quadrature(_))));
    }

    #[test]
    fn volumes() {
        let flat = build_preset("flat_torus", &params(&[])).unwrap();
        let grid = build_grid(&flat.chart, 16).unwrap();
        assert!((integrate(&flat, &|_| Ok(1.0), &grid).unwrap() - TAU * TAU).abs() < 1e-12);
        assert!(integrate(&flat, &|x| Ok(x[0].sin()), &grid).unwrap().abs() < 1e-12);

        let warped = build_preset("warped_torus", &params(&[])).unwrap();
        let grid = build_grid(&warped.chart, 32).unwrap();
        assert!((integrate(&warped, &|_| Ok(1.0), &grid).unwrap() - 8.0 * PI * PI).abs() < 1e-9);

        let hopf = build_preset("hopf_s3", &params(&[])).unwrap();
        let grid = build_grid(&hopf.chart, 24).unwrap();
        assert_eq!(grid.kind, GridKind::GaussLegendreProduct);
        assert!((integrate(&hopf, &|_| Ok(1.0), &grid).unwrap() - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn node_errors_carry_index() {
        let flat = build_preset("flat_torus", &params(&[])).unwrap();
        let grid = build_grid(&flat.chart, 4).unwrap();
        let err = integrate(&flat, &|x| if x[1] > 1.0 { Err(GeomError::EmptySample) } else { Ok(0.0) }, &grid)
            .unwrap_err();
        assert!(matches!(err, GeomError::AtNode { node: 1, .. }), "{err:?}");
    }

    #[test]
    fn leaf_of_warped_torus() {
        let warped = build_preset("warped_torus", &params(&[])).unwrap();
        let leaf = LeafSlice::top(vec![0.0, 1.3]);
        assert!((leaf_integrate(&warped, &|_| Ok(1.0), &leaf, 32).unwrap() - TAU).abs() < 1e-12);
        let dlog = |x: &[f64]| Ok(x[0].cos() / (2.0 + x[0].sin()));
        assert!(leaf_integrate(&warped, &dlog, &leaf, 64).unwrap().abs() < 1e-12);
        // the y-circle has length 2π u(x)
        let fibre = LeafSlice::bot(vec![0.7, 0.0]);
        let len = leaf_integrate(&warped, &|_| Ok(1.0), &fibre, 16).unwrap();
        assert!((len - TAU * (2.0 + 0.7f64.sin())).abs() < 1e-12);
    }

    #[test]
    fn non_slice_leaf_rejected() {
        let hopf = build_preset("hopf_s3", &params(&[])).unwrap();
        let err = leaf_integrate(&hopf, &|_| Ok(1.0), &LeafSlice::top(vec![0.4, 0.0, 0.0]), 8).unwrap_err();
        assert!(matches!(err, GeomError::UnsupportedLeaf(_)));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }
}
