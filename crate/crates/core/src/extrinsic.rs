//! Extrinsic geometry of the pair `(D⊤, D⊥)`: second fundamental forms,
//! integrability tensors, mean curvature vectors, Weingarten operators, and
//! classification of each distribution.

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::point::{derived, Derived, Field, FrameTensor, PointData};
use crate::scenario::Scenario;

/// Tolerance for "constant mean curvature".
pub const CMC_TOLERANCE: f64 = 1e-6;

/// Extrinsic tensors at one point, in adapted-frame covariant components.
///
/// `h_top[a][b][c] = g(h⊤(e_a, e_b), e_c)`; `a_top[z][x][y] = g(A⊤_z x, y)`;
/// `ts_top[z][x][y] = g(T⊤♯_z x, y)`. Vectors are `g(v, e_c)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtrinsicData {
    pub n: usize,
    pub eps: Vec<f64>,
    /// Frame vectors in coordinates.
    pub frame: Vec<Vec<f64>>,
    pub h_top: FrameTensor<f64>,
    pub h_bot: FrameTensor<f64>,
    pub t_top: FrameTensor<f64>,
    pub t_bot: FrameTensor<f64>,
    pub mean_top: Vec<f64>,
    pub mean_bot: Vec<f64>,
    pub a_top: FrameTensor<f64>,
    pub a_bot: FrameTensor<f64>,
    pub ts_top: FrameTensor<f64>,
    pub ts_bot: FrameTensor<f64>,
}

impl From<&Derived<f64>> for ExtrinsicData {
    fn from(b: &Derived<f64>) -> Self {
        Self {
            n: b.n,
            eps: b.eps.clone(),
            frame: b.local.frame.clone(),
            h_top: b.h_top.clone(),
            h_bot: b.h_bot.clone(),
            t_top: b.t_top.clone(),
            t_bot: b.t_bot.clone(),
            mean_top: b.mean_top.clone(),
            mean_bot: b.mean_bot.clone(),
            a_top: b.a_top.clone(),
            a_bot: b.a_bot.clone(),
            ts_top: b.ts_top.clone(),
            ts_bot: b.ts_bot.clone(),
        }
    }
}

impl ExtrinsicData {
    /// Coordinate components of a vector given covariantly.
    pub fn coord(&self, cov: &[f64]) -> Vec<f64> {
        let d = self.eps.len();
        let mut out = vec![0.0; d];
        for (c, e) in self.frame.iter().enumerate() {
            for l in 0..d {
                out[l] += cov[c] * self.eps[c] * e[l];
            }
        }
        out
    }
}

pub fn extrinsic_at(scn: &Scenario, x: &[f64]) -> Result<ExtrinsicData> {
    Ok(ExtrinsicData::from(&derived::<f64>(scn, x)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Top,
    Bot,
}

/// `v⊤` or `v⊥` of a coordinate vector, in coordinates.
pub fn project(scn: &Scenario, v: &[f64], which: Which, x: &[f64]) -> Result<Vec<f64>> {
    let b = derived::<f64>(scn, x)?;
    if v.len() != b.d {
        return Err(GeomError::RankMismatch(format!(
            "vector of length {} in dimension {}",
            v.len(),
            b.d
        )));
    }
    let cov = b.cov(v);
    let part = match which {
        Which::Top => b.top(&cov),
        Which::Bot => b.bot(&cov),
    };
    Ok(b.coord(&part))
}

/// Maximum deviations from each class over a sample set.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DistributionClass {
    /// `‖h − (1/dim) H g‖`
    pub umbilical_deviation: f64,
    /// `‖H‖`
    pub harmonic_deviation: f64,
    /// `‖h‖`
    pub geodesic_deviation: f64,
    /// `‖T‖`
    pub integrability_deviation: f64,
    /// `‖∇⊥H‖` for `D⊤` (`‖∇⊤H‖` for `D⊥`)
    pub cmc_deviation: f64,
}

impl DistributionClass {
    pub fn is_umbilical(&self, tol: f64) -> bool {
        self.umbilical_deviation <= tol
    }
    pub fn is_integrable(&self, tol: f64) -> bool {
        self.integrability_deviation <= tol
    }
    pub fn is_cmc(&self) -> bool {
        self.cmc_deviation <= CMC_TOLERANCE
    }
}

pub(crate) fn umbilical_norm(h: &FrameTensor<f64>, mean: &[f64], eps: &[f64], block: &[usize]) -> f64 {
    let k = block.len() as f64;
    let mut s = 0.0;
    for &a in block {
        for &bb in block {
            for c in 0..h.d {
                let want = if a == bb { eps[a] * mean[c] / k } else { 0.0 };
                s += (h.get(a, bb, c) - want).powi(2);
            }
        }
    }
    s.sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Normal-connection derivatives of the mean curvature vectors:
/// `[A][i] = g(∇_{e_A} H⊤, ℰ_i)` and `[A][a] = g(∇_{e_A} H⊥, E_a)`,
/// full rows indexed by frame position (the other block is zero).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanGradient {
    pub nabla_bot_mean_top: Vec<Vec<f64>>,
    pub nabla_top_mean_bot: Vec<Vec<f64>>,
}

impl MeanGradient {
    pub fn norms(&self) -> (f64, f64) {
        let f = |m: &Vec<Vec<f64>>| m.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>()).sum::<f64>().sqrt();
        (f(&self.nabla_bot_mean_top), f(&self.nabla_top_mean_bot))
    }
}

pub fn mean_gradient_at(pd: &PointData) -> MeanGradient {
    let b = &pd.base;
    let rows = |f: Field<'_>, top: bool| -> Vec<Vec<f64>> {
        (0..b.d)
            .map(|a| {
                let w = pd.nabla_cov(f, &b.unit(a));
                if top {
                    b.top(&w)
                } else {
                    b.bot(&w)
                }
            })
            .collect()
    };
    MeanGradient {
        nabla_bot_mean_top: rows(Field::MeanTop, false),
        nabla_top_mean_bot: rows(Field::MeanBot, true),
    }
}

pub fn mean_curvature_gradient(scn: &Scenario, x: &[f64]) -> Result<MeanGradient> {
    Ok(mean_gradient_at(&PointData::new(scn, x)?))
}

/// Classifies `D⊤` and `D⊥` over the samples.
pub fn classify(scn: &Scenario, samples: &[Vec<f64>]) -> Result<(DistributionClass, DistributionClass)> {
    if samples.is_empty() {
        return Err(GeomError::EmptySample);
    }
    let mut top = DistributionClass::default();
    let mut bot = DistributionClass::default();
    for x in samples {
        let pd = PointData::new(scn, x)?;
        let b = &pd.base;
        let tb: Vec<usize> = (0..b.n).collect();
        let bb: Vec<usize> = (b.n..b.d).collect();
        let (gt, gb) = mean_gradient_at(&pd).norms();
        let upd = |c: &mut DistributionClass, h: &FrameTensor<f64>, t: &FrameTensor<f64>, m: &[f64], blk: &[usize], cmc: f64| {
            c.umbilical_deviation = c.umbilical_deviation.max(umbilical_norm(h, m, &b.eps, blk));
            c.harmonic_deviation = c.harmonic_deviation.max(norm(m));
            c.geodesic_deviation = c.geodesic_deviation.max(h.frame_norm());
            c.integrability_deviation = c.integrability_deviation.max(t.frame_norm());
            c.cmc_deviation = c.cmc_deviation.max(cmc);
        };
        upd(&mut top, &b.h_top, &b.t_top, &b.mean_top, &tb, gt);
        upd(&mut bot, &b.h_bot, &b.t_bot, &b.mean_bot, &bb, gb);
    }
    Ok((top, bot))
}
