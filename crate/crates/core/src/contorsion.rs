//! The contorsion field `𝒯 = ∇̄ − ∇`, its adjoint `𝒯*` and transpose `𝒯̂`,
//! the mean-curvature-type vectors `H_𝒯`, connection-class detection, and
//! curvature of `∇̄` by two independent routes.

use serde::{Deserialize, Serialize};

use crate::chart::{i3, RiemannValue};
use crate::dual::{seed, Dual, Scalar};
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::linalg::Mat;
use crate::point::{FrameTensor, PointData};
use crate::scenario::Scenario;

/// Tolerance beyond which a declared class counts as contradicted.
pub const CLASS_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionClass {
    #[default]
    General,
    MetricCompatible,
    Statistical,
}

impl ConnectionClass {
    pub fn name(self) -> &'static str {
        match self {
            ConnectionClass::General => "general",
            ConnectionClass::MetricCompatible => "metric_compatible",
            ConnectionClass::Statistical => "statistical",
        }
    }
}

/// Component storage. Canonical form is mixed `𝒯^λ_{μν}` at `[λ][μ][ν]`,
/// meaning `(𝒯_{∂μ} ∂ν)^λ`; the lower form `𝒯_{λμν} = g(𝒯_{∂μ}∂ν, ∂λ)`
/// is raised on evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum ContorsionStorage {
    Zero,
    Mixed(Vec<Expr>),
    Lower(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContorsionField {
    pub dim: usize,
    pub storage: ContorsionStorage,
    pub declared_class: ConnectionClass,
}

impl ContorsionField {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            storage: ContorsionStorage::Zero,
            declared_class: ConnectionClass::General,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.storage {
            ContorsionStorage::Zero => true,
            ContorsionStorage::Mixed(c) | ContorsionStorage::Lower(c) => c.iter().all(Expr::is_zero_literal),
        }
    }

    fn eval_raw<T: Scalar>(comps: &[Expr], x: &[T]) -> Vec<T> {
        comps
            .iter()
            .map(|e| if e.is_zero_literal() { T::zero() } else { e.eval(x) })
            .collect()
    }

    /// Mixed components at `x`; `ginv` is used only for lower storage.
    pub fn eval_mixed<T: Scalar>(&self, x: &[T], ginv: &Mat<T>) -> Vec<T> {
        let d = self.dim;
        match &self.storage {
            ContorsionStorage::Zero => vec![T::zero(); d * d * d],
            ContorsionStorage::Mixed(c) => Self::eval_raw(c, x),
            ContorsionStorage::Lower(c) => {
                let low = Self::eval_raw(c, x);
                let mut out = vec![T::zero(); d * d * d];
                for l in 0..d {
                    for mu in 0..d {
                        for nu in 0..d {
                            let mut acc = T::zero();
                            for k in 0..d {
                                acc += ginv.at(l, k) * low[i3(d, k, mu, nu)];
                            }
                            out[i3(d, l, mu, nu)] = acc;
                        }
                    }
                }
                out
            }
        }
    }
}

/// Mixed components of `𝒯` and their derivatives `∂_σ 𝒯` at `x`.
pub fn contorsion_jet<T: Scalar>(scn: &Scenario, x: &[T]) -> (Vec<T>, Vec<Vec<T>>) {
    let d = scn.dim();
    let field = &scn.contorsion;
    if field.is_zero() {
        return (vec![T::zero(); d * d * d], vec![vec![T::zero(); d * d * d]; d]);
    }
    let mut value = Vec::new();
    let mut derivs = Vec::with_capacity(d);
    for sigma in 0..d {
        let xs = seed(x, sigma);
        let ginv = match field.storage {
            ContorsionStorage::Lower(_) => scn
                .metric
                .eval(&xs)
                .inverse(crate::chart::METRIC_PIVOT_FLOOR)
                .unwrap_or_else(|| Mat::identity(d)),
            _ => Mat::identity(d),
        };
        let t: Vec<Dual<T>> = field.eval_mixed(&xs, &ginv);
        if sigma == 0 {
            value = t.iter().map(|c| c.v).collect();
        }
        derivs.push(t.iter().map(|c| c.d).collect());
    }
    (value, derivs)
}

/// Frame components `g(𝒯*_{e_A} e_B, e_C) = g(𝒯_{e_A} e_C, e_B)`.
pub fn star<T: Scalar>(t: &FrameTensor<T>) -> FrameTensor<T> {
    t.permuted(|a, b, c| (a, c, b))
}

/// Frame components `g(𝒯̂_{e_A} e_B, e_C) = g(𝒯_{e_B} e_A, e_C)`.
pub fn hat<T: Scalar>(t: &FrameTensor<T>) -> FrameTensor<T> {
    t.permuted(|a, b, c| (b, a, c))
}

/// `H⊤_𝒯, H⊥_𝒯, H⊤_𝒯*, H⊥_𝒯*` in frame covariant components.
#[derive(Clone, Debug, PartialEq)]
pub struct ContorsionMeans<T> {
    pub top: Vec<T>,
    pub bot: Vec<T>,
    pub top_star: Vec<T>,
    pub bot_star: Vec<T>,
}

/// `Σ_a ε_a F_{E_a} E_a` (top) and `Σ_i ε_i F_{ℰ_i} ℰ_i` (bot).
pub fn trace_means<T: Scalar>(f: &FrameTensor<T>, eps: &[f64], n: usize) -> (Vec<T>, Vec<T>) {
    let d = f.d;
    let mut top = vec![T::zero(); d];
    let mut bot = vec![T::zero(); d];
    for a in 0..d {
        let target = if a < n { &mut top } else { &mut bot };
        for (c, t) in target.iter_mut().enumerate() {
            *t += f.get(a, a, c).scale(eps[a]);
        }
    }
    (top, bot)
}

pub fn contorsion_means<T: Scalar>(tau: &FrameTensor<T>, eps: &[f64], n: usize) -> ContorsionMeans<T> {
    let (top, bot) = trace_means(tau, eps, n);
    let (top_star, bot_star) = trace_means(&star(tau), eps, n);
    ContorsionMeans {
        top,
        bot,
        top_star,
        bot_star,
    }
}

/// Maximum class deviations over a sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport {
    /// `max ‖𝒯* + 𝒯‖`
    pub metric_compatible_deviation: f64,
    /// `max ‖𝒯̂ − 𝒯‖`
    pub hat_deviation: f64,
    /// `max ‖𝒯* − 𝒯‖`
    pub star_deviation: f64,
    pub metric_compatible: bool,
    pub statistical: bool,
}

impl ClassReport {
    pub fn statistical_deviation(&self) -> f64 {
        self.hat_deviation.max(self.star_deviation)
    }
}

/// Scans the contorsion over sample points and checks the declared class.
pub fn classify_connection(scn: &Scenario, samples: &[Vec<f64>]) -> Result<ClassReport> {
    let report = class_deviations(scn, samples)?;
    let declared = scn.contorsion.declared_class;
    let dev = match declared {
        ConnectionClass::General => 0.0,
        ConnectionClass::MetricCompatible => report.metric_compatible_deviation,
        ConnectionClass::Statistical => report.statistical_deviation(),
    };
    if dev > CLASS_TOLERANCE {
        return Err(GeomError::MisdeclaredClass {
            declared: declared.name().into(),
            deviation: dev,
        });
    }
    Ok(report)
}

/// Deviation scan without checking the declared class.
pub fn class_deviations(scn: &Scenario, samples: &[Vec<f64>]) -> Result<ClassReport> {
    if samples.is_empty() {
        return Err(GeomError::EmptySample);
    }
    let (mut mc, mut hd, mut sd) = (0.0_f64, 0.0_f64, 0.0_f64);
    for x in samples {
        let dv = crate::point::derived::<f64>(scn, x)?;
        let tau = &dv.tau;
        let s = star(tau);
        let h = hat(tau);
        mc = mc.max(tau.combine(&s, 1.0, 1.0).frame_norm());
        hd = hd.max(h.combine(tau, 1.0, -1.0).frame_norm());
        sd = sd.max(s.combine(tau, 1.0, -1.0).frame_norm());
    }
    Ok(ClassReport {
        metric_compatible_deviation: mc,
        hat_deviation: hd,
        star_deviation: sd,
        metric_compatible: mc <= CLASS_TOLERANCE,
        statistical: hd.max(sd) <= CLASS_TOLERANCE,
    })
}

/// `R̄` assembled from `R`, `∇𝒯` and `[𝒯, 𝒯]`:
/// `R̄_{X,Y} = R_{X,Y} + (∇_Y𝒯)_X − (∇_X𝒯)_Y + [𝒯_Y, 𝒯_X]`.
pub fn bar_riemann(pd: &PointData) -> RiemannValue {
    let d = pd.dim();
    let r = pd.riemann();
    let nt = pd.nabla_contorsion();
    let t = &pd.base.local.tors;
    let mut comp = r.comp.clone();
    // component form: R̄^λ_{σμν} − R^λ_{σμν}
    //   = (∇_ν𝒯)^λ_{μσ} − (∇_μ𝒯)^λ_{νσ} + 𝒯^λ_{νκ}𝒯^κ_{μσ} − 𝒯^λ_{μκ}𝒯^κ_{νσ}
    for l in 0..d {
        for s in 0..d {
            for mu in 0..d {
                for nu in 0..d {
                    let mut v = nt[nu][i3(d, l, mu, s)] - nt[mu][i3(d, l, nu, s)];
                    for k in 0..d {
                        v += t[i3(d, l, nu, k)] * t[i3(d, k, mu, s)] - t[i3(d, l, mu, k)] * t[i3(d, k, nu, s)];
                    }
                    comp[crate::chart::i4(d, l, s, mu, nu)] += v;
                }
            }
        }
    }
    RiemannValue { dim: d, comp }
}

/// `R̄` computed directly as the curvature of the coefficient field `Γ + 𝒯`.
pub fn bar_riemann_direct(pd: &PointData) -> RiemannValue {
    let d = pd.dim();
    let bar: Vec<f64> = pd.base.local.gamma.iter().zip(&pd.base.local.tors).map(|(a, b)| a + b).collect();
    let dbar: Vec<Vec<f64>> = pd
        .dirs
        .iter()
        .map(|dl| dl.local.gamma.iter().zip(&dl.local.tors).map(|(a, b)| a.d + b.d).collect())
        .collect();
    debug_assert_eq!(dbar.len(), d);
    RiemannValue::from_connection(&bar, &dbar)
}

/// Second fundamental form and mean curvature of `D⊤` with respect to `∇̄`:
/// `h̄⊤(X,Y) = h⊤(X,Y) + ½(𝒯_X Y + 𝒯_Y X)⊥`, `H̄⊤ = H⊤ + (H⊤_𝒯)⊥`, and the
/// `⊥` analogues. Frame covariant components.
#[derive(Clone, Debug)]
pub struct BarExtrinsic {
    pub h_top: FrameTensor<f64>,
    pub h_bot: FrameTensor<f64>,
    pub mean_top: Vec<f64>,
    pub mean_bot: Vec<f64>,
}

pub fn bar_extrinsic(pd: &PointData) -> BarExtrinsic {
    let b = &pd.base;
    let d = b.d;
    let n = b.n;
    let sym = |a: usize, bb: usize, c: usize| 0.5 * (b.tau.get(a, bb, c) + b.tau.get(bb, a, c));
    let mut h_top = b.h_top.clone();
    let mut h_bot = b.h_bot.clone();
    for a in 0..d {
        for bb in 0..d {
            for c in 0..d {
                let (a_top, b_top, c_top) = (a < n, bb < n, c < n);
                if a_top && b_top && !c_top {
                    h_top.add(a, bb, c, sym(a, bb, c));
                }
                if !a_top && !b_top && c_top {
                    h_bot.add(a, bb, c, sym(a, bb, c));
                }
            }
        }
    }
    let mut mean_top = b.mean_top.clone();
    let mut mean_bot = b.mean_bot.clone();
    for c in 0..d {
        if c >= n {
            mean_top[c] += b.means.top[c];
        } else {
            mean_bot[c] += b.means.bot[c];
        }
    }
    BarExtrinsic {
        h_top,
        h_bot,
        mean_top,
        mean_bot,
    }
}
