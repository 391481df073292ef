//! Periodic coordinate charts, metrics, the Levi-Civita connection and its
//! curvature.
//!
//! Curvature follows the convention `R_{X,Y} = [∇_Y, ∇_X] + ∇_{[X,Y]}`,
//! the negative of the usual `∇_X∇_Y − ∇_Y∇_X − ∇_{[X,Y]}`. With it the
//! mixed sectional sums are positive on round spheres.

use serde::{Deserialize, Serialize};

use crate::dual::{seed, Dual, Scalar};
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::linalg::{negative_index, Mat};

/// Pivot floor used when inverting the metric.
pub const METRIC_PIVOT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub dim_top: usize,
    pub dim_bot: usize,
    pub ranges: Vec<(f64, f64)>,
    pub periodic: Vec<bool>,
}

impl Chart {
    pub fn new(dim_top: usize, dim_bot: usize, ranges: Vec<(f64, f64)>, periodic: Vec<bool>) -> Result<Self> {
        let c = Self {
            dim_top,
            dim_bot,
            ranges,
            periodic,
        };
        c.validate()?;
        Ok(c)
    }

    /// Torus `[0, 2π)^d`, all directions periodic.
    pub fn torus(dim_top: usize, dim_bot: usize) -> Self {
        let d = dim_top + dim_bot;
        Self {
            dim_top,
            dim_bot,
            ranges: vec![(0.0, std::f64::consts::TAU); d],
            periodic: vec![true; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim_top + self.dim_bot
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_top < 1 || self.dim_bot < 1 {
            return Err(GeomError::InvalidChart("both distributions need rank >= 1".into()));
        }
        let d = self.dim();
        if self.ranges.len() != d || self.periodic.len() != d {
            return Err(GeomError::InvalidChart(format!(
                "expected {d} ranges and periodic flags, got {} and {}",
                self.ranges.len(),
                self.periodic.len()
            )));
        }
        for (k, &(lo, hi)) in self.ranges.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GeomError::InvalidChart(format!("range {k} = ({lo}, {hi}) is not a finite interval")));
            }
        }
        Ok(())
    }

    pub fn all_periodic(&self) -> bool {
        self.periodic.iter().all(|&p| p)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.ranges.iter().map(|(lo, hi)| hi - lo).collect()
    }
}

/// Metric components `g_{μν}(x)` as expressions, plus the declared index.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    pub dim: usize,
    pub components: Vec<Expr>,
    pub signature_index: usize,
}

impl MetricField {
    /// Builds a metric from a full `d×d` component table; asymmetric entries
    /// are rejected by (μ, ν).
    pub fn new(components: Vec<Vec<Expr>>, signature_index: usize) -> Result<Self> {
        let d = components.len();
        for (mu, row) in components.iter().enumerate() {
            if row.len() != d {
                return Err(GeomError::Schema {
                    path: format!("metric.components[{mu}]"),
                    message: format!("expected {d} entries, got {}", row.len()),
                });
            }
        }
        for mu in 0..d {
            for nu in mu + 1..d {
                if components[mu][nu] != components[nu][mu] {
                    return Err(GeomError::Schema {
                        path: format!("metric.components[{mu}][{nu}]"),
                        message: format!("metric is not symmetric at (μ,ν) = ({mu},{nu})"),
                    });
                }
            }
        }
        Ok(Self {
            dim: d,
            components: components.into_iter().flatten().collect(),
            signature_index,
        })
    }

    pub fn diagonal(diag: Vec<Expr>, signature_index: usize) -> Self {
        let d = diag.len();
        let mut components = vec![Expr::num(0.0); d * d];
        for (k, e) in diag.into_iter().enumerate() {
            components[k * d + k] = e;
        }
        Self {
            dim: d,
            components,
            signature_index,
        }
    }

    pub fn component(&self, mu: usize, nu: usize) -> &Expr {
        &self.components[mu * self.dim + nu]
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Mat<T> {
        let d = self.dim;
        let mut m = Mat::zeros(d);
        for mu in 0..d {
            for nu in mu..d {
                let e = self.component(mu, nu);
                if e.is_zero_literal() {
                    continue;
                }
                let v = e.eval(x);
                m.set(mu, nu, v);
                m.set(nu, mu, v);
            }
        }
        m
    }

    /// Metric and its coordinate derivatives `∂_σ g_{μν}`, the latter indexed
    /// by `σ`.
    pub fn eval_jet<T: Scalar>(&self, x: &[T]) -> (Mat<T>, Vec<Mat<T>>) {
        let d = self.dim;
        let mut g = Mat::zeros(d);
        let mut dg = vec![Mat::zeros(d); d];
        for sigma in 0..d {
            let xs = seed(x, sigma);
            let m: Mat<Dual<T>> = self.eval(&xs);
            for k in 0..d * d {
                if sigma == 0 {
                    g.a[k] = m.a[k].v;
                }
                dg[sigma].a[k] = m.a[k].d;
            }
        }
        (g, dg)
    }

    /// Checks nondegeneracy and the declared index at `x`.
    pub fn check_at(&self, x: &[f64]) -> Result<()> {
        let g = self.eval(x);
        if g.a.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite {
                what: "metric".into(),
                point: x.to_vec(),
            });
        }
        if g.inverse(METRIC_PIVOT_FLOOR).is_none() {
            return Err(GeomError::DegenerateMetric { point: x.to_vec() });
        }
        let q = negative_index(&g);
        if q != self.signature_index {
            return Err(GeomError::Schema {
                path: "signature_index".into(),
                message: format!("metric has {q} negative eigenvalues at {x:?}, declared {}", self.signature_index),
            });
        }
        Ok(())
    }
}

/// Index helper for `d×d×d` arrays: `[i][j][k]`.
#[inline]
pub fn i3(d: usize, i: usize, j: usize, k: usize) -> usize {
    (i * d + j) * d + k
}

/// Index helper for `d×d×d×d` arrays.
#[inline]
pub fn i4(d: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * d + j) * d + k) * d + l
}

/// Connection coefficients `Γ^λ_{μν}` stored at `[λ][μ][ν]`, meaning
/// `∇_{∂μ} ∂ν = Γ^λ_{μν} ∂λ`.
pub fn christoffel_from<T: Scalar>(ginv: &Mat<T>, dg: &[Mat<T>]) -> Vec<T> {
    let d = ginv.n;
    // lowered: Γ_{σμν} = ½(∂μ g_{νσ} + ∂ν g_{μσ} − ∂σ g_{μν})
    let mut low = vec![T::zero(); d * d * d];
    for s in 0..d {
        for mu in 0..d {
            for nu in mu..d {
                let v = (dg[mu].at(nu, s) + dg[nu].at(mu, s) - dg[s].at(mu, nu)).scale(0.5);
                low[i3(d, s, mu, nu)] = v;
                low[i3(d, s, nu, mu)] = v;
            }
        }
    }
    let mut gamma = vec![T::zero(); d * d * d];
    for l in 0..d {
        for mu in 0..d {
            for nu in mu..d {
                let mut acc = T::zero();
                for s in 0..d {
                    acc += ginv.at(l, s) * low[i3(d, s, mu, nu)];
                }
                gamma[i3(d, l, mu, nu)] = acc;
                gamma[i3(d, l, nu, mu)] = acc;
            }
        }
    }
    gamma
}

fn checked_inverse<T: Scalar>(g: &Mat<T>, x: &[T]) -> Result<Mat<T>> {
    g.inverse(METRIC_PIVOT_FLOOR).ok_or_else(|| GeomError::DegenerateMetric {
        point: x.iter().map(|v| v.re()).collect(),
    })
}

/// Levi-Civita coefficients at `x`.
pub fn christoffel<T: Scalar>(metric: &MetricField, x: &[T]) -> Result<Vec<T>> {
    let (g, dg) = metric.eval_jet(x);
    let ginv = checked_inverse(&g, x)?;
    Ok(christoffel_from(&ginv, &dg))
}

/// Riemann tensor at a point, `R^λ_{σμν}` stored at `[λ][σ][μ][ν]`, meaning
/// `(R_{∂μ,∂ν} ∂σ)^λ` in the `[∇_Y,∇_X] + ∇_{[X,Y]}` convention.
#[derive(Clone, Debug, PartialEq)]
pub struct RiemannValue {
    pub dim: usize,
    pub comp: Vec<f64>,
}

impl RiemannValue {
    /// Assembles curvature of an arbitrary (possibly torsionful) connection
    /// from its coefficients `Γ^λ_{μν}` and their derivatives `∂_σ Γ`
    /// (indexed `[σ]`). Coefficients follow `∇_{∂μ}∂ν = Γ^λ_{μν}∂λ`.
    pub fn from_connection(gamma: &[f64], dgamma: &[Vec<f64>]) -> Self {
        let d = dgamma.len();
        let mut comp = vec![0.0; d * d * d * d];
        for r in 0..d {
            for s in 0..d {
                for mu in 0..d {
                    for nu in 0..d {
                        // standard ∇_μ∇_ν − ∇_ν∇_μ applied to ∂σ
                        let mut v = dgamma[mu][i3(d, r, nu, s)] - dgamma[nu][i3(d, r, mu, s)];
                        for l in 0..d {
                            v += gamma[i3(d, r, mu, l)] * gamma[i3(d, l, nu, s)]
                                - gamma[i3(d, r, nu, l)] * gamma[i3(d, l, mu, s)];
                        }
                        comp[i4(d, r, s, mu, nu)] = -v;
                    }
                }
            }
        }
        Self { dim: d, comp }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            dim: d,
            comp: vec![0.0; d * d * d * d],
        }
    }

    /// `R_{X,Y} Z` as coordinate components.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for mu in 0..d {
            if x[mu] == 0.0 {
                continue;
            }
            for nu in 0..d {
                let xy = x[mu] * y[nu];
                if xy == 0.0 {
                    continue;
                }
                for s in 0..d {
                    let c = xy * z[s];
                    if c == 0.0 {
                        continue;
                    }
                    for (l, o) in out.iter_mut().enumerate() {
                        *o += c * self.comp[i4(d, l, s, mu, nu)];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comp
            .iter()
            .zip(&other.comp)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Levi-Civita curvature at `x`, with `∂Γ` from differentiating the
/// closed-form `Γ` through the dual carrier.
pub fn riemann(metric: &MetricField, x: &[f64]) -> Result<RiemannValue> {
    let d = metric.dim;
    let gamma = christoffel(metric, x)?;
    let mut dgamma = Vec::with_capacity(d);
    for sigma in 0..d {
        let xs = seed(x, sigma);
        let gs = christoffel(metric, &xs)?;
        dgamma.push(gs.iter().map(|v| v.d).collect::<Vec<f64>>());
    }
    Ok(RiemannValue::from_connection(&gamma, &dgamma))
}

/// Sectional-type quantity `g(R_{X,Y} X, Y)` divided by `g(X,X)g(Y,Y) − g(X,Y)²`.
/// In this sign convention it equals the usual sectional curvature of the
/// plane spanned by `X, Y`.
pub fn sectional(metric: &MetricField, rm: &RiemannValue, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let g = metric.eval(x);
    let num = g.form(&rm.apply(u, v, u), v);
    let den = g.form(u, u) * g.form(v, v) - g.form(u, v).powi(2);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warped() -> MetricField {
        MetricField::diagonal(
            vec![Expr::num(1.0), Expr::parse("(2 + sin(x1))^2").unwrap()],
            0,
        )
    }

    /// Independent Γ oracle: central differences of the sampled metric.
    fn gamma_fd(metric: &MetricField, x: &[f64]) -> Vec<f64> {
        let d = metric.dim;
        let h = 1e-5;
        let dg: Vec<Mat<f64>> = (0..d)
            .map(|s| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[s] += h;
                xm[s] -= h;
                let (gp, gm) = (metric.eval(&xp), metric.eval(&xm));
                Mat {
                    n: d,
                    a: gp.a.iter().zip(&gm.a).map(|(p, m)| (p - m) / (2.0 * h)).collect(),
                }
            })
            .collect();
        let ginv = metric.eval(x).inverse(1e-14).unwrap();
        christoffel_from(&ginv, &dg)
    }

    #[test]
    fn flat_metrics_have_zero_connection() {
        let flat = MetricField::diagonal(vec![Expr::num(1.0), Expr::num(1.0)], 0);
        assert!(christoffel(&flat, &[0.3, 0.4]).unwrap().iter().all(|v| *v == 0.0));
        let lorentz = MetricField::diagonal(vec![Expr::num(-1.0), Expr::num(1.0)], 1);
        assert!(christoffel(&lorentz, &[0.3, 0.4]).unwrap().iter().all(|v| *v == 0.0));
        assert!(riemann(&lorentz, &[0.3, 0.4]).unwrap().comp.iter().all(|v| *v == 0.0));
        lorentz.check_at(&[0.0, 0.0]).unwrap();
    }

    #[test]
    fn warped_torus_christoffel() {
        let m = warped();
        let g = christoffel(&m, &[0.0, 0.0]).unwrap();
        // Γ^x_{yy} = −u u′ = −2, Γ^y_{xy} = u′/u = 1/2
        assert!((g[i3(2, 0, 1, 1)] + 2.0).abs() < 1e-14);
        assert!((g[i3(2, 1, 0, 1)] - 0.5).abs() < 1e-14);
        assert!((g[i3(2, 1, 1, 0)] - 0.5).abs() < 1e-14);
        let fd = gamma_fd(&m, &[0.0, 0.0]);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn warped_torus_gauss_curvature() {
        let m = warped();
        let x = [std::f64::consts::FRAC_PI_2, 1.0];
        let rm = riemann(&m, &x).unwrap();
        let k = sectional(&m, &rm, &x, &[1.0, 0.0], &[0.0, 1.0]);
        // −u″/u at π/2 with u = 3, u″ = −1
        assert!((k - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let m = MetricField::diagonal(vec![Expr::num(1.0), Expr::parse("sin(x1)").unwrap()], 0);
        assert!(matches!(christoffel(&m, &[0.0, 0.0]), Err(GeomError::DegenerateMetric { .. })));
    }

    #[test]
    fn asymmetric_components_rejected() {
        let comps = vec![
            vec![Expr::num(1.0), Expr::num(0.1)],
            vec![Expr::num(0.2), Expr::num(1.0)],
        ];
        match MetricField::new(comps, 0) {
            Err(GeomError::Schema { message, .. }) => assert!(message.contains("(0,1)")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::new(1, 1, vec![(0.0, 1.0), (1.0, 1.0)], vec![true, true]).is_err());
        assert!(Chart::new(0, 2, vec![(0.0, 1.0); 2], vec![true; 2]).is_err());
        assert!(Chart::new(1, 1, vec![(0.0, 1.0); 2], vec![true; 2]).is_ok());
    }
}
