//! Everything the catalog needs at one point.
//!
//! [`Local`] holds the metric, Levi-Civita coefficients, adapted frame with
//! its first derivatives, and the contorsion with its first derivatives.
//! [`Derived`] turns that into frame-level tensors (`h`, `T`, `A`, `T♯`,
//! contorsion components, mean vectors). Both are generic over the scalar
//! carrier, so [`PointData`] evaluates `Derived` once on `f64` and once per
//! coordinate direction on `Dual<f64>`; the dual parts give `∂_σ` of any
//! quantity built from a `Derived`.

use crate::chart::{christoffel_from, i3, RiemannValue, METRIC_PIVOT_FLOOR};
use crate::contorsion::{contorsion_jet, contorsion_means, ContorsionMeans};
use crate::dual::{seed, Dual, Scalar};
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::frame::build_frame;
use crate::linalg::Mat;
use crate::scenario::Scenario;

/// A (1,2)-tensor in the adapted frame: `[A][B][C] = g(F(e_A, e_B), e_C)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FrameTensor<T> {
    pub d: usize,
    pub c: Vec<T>,
}

impl<T: Scalar> FrameTensor<T> {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            c: vec![T::zero(); d * d * d],
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> T {
        self.c[i3(self.d, a, b, c)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: T) {
        self.c[i3(self.d, a, b, c)] = v;
    }

    #[inline]
    pub fn add(&mut self, a: usize, b: usize, c: usize, v: T) {
        self.c[i3(self.d, a, b, c)] += v;
    }

    /// `out[a][b][c] = self[f(a, b, c)]`.
    pub fn permuted(&self, f: impl Fn(usize, usize, usize) -> (usize, usize, usize)) -> Self {
        let d = self.d;
        let mut out = Self::zeros(d);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let (x, y, z) = f(a, b, c);
                    out.set(a, b, c, self.get(x, y, z));
                }
            }
        }
        out
    }

    /// `α·self + β·other`.
    pub fn combine(&self, other: &Self, alpha: f64, beta: f64) -> Self {
        Self {
            d: self.d,
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(x, y)| x.scale(alpha) + y.scale(beta))
                .collect(),
        }
    }

    /// `F(X, Y)` for covariant frame components of `X`, `Y`; result covariant.
    pub fn apply(&self, x: &[T], y: &[T], eps: &[f64]) -> Vec<T> {
        let d = self.d;
        let mut out = vec![T::zero(); d];
        for a in 0..d {
            if x[a].is_const() && x[a].re() == 0.0 {
                continue;
            }
            for b in 0..d {
                if y[b].is_const() && y[b].re() == 0.0 {
                    continue;
                }
                let w = (x[a] * y[b]).scale(eps[a] * eps[b]);
                for (c, o) in out.iter_mut().enumerate() {
                    *o += w * self.get(a, b, c);
                }
            }
        }
        out
    }

    /// Full ε-weighted inner product `Σ ε_A ε_B ε_C F_{ABC} G_{ABC}`.
    pub fn inner(&self, other: &Self, eps: &[f64]) -> T {
        self.inner_where(other, eps, |_, _| true)
    }

    /// Inner product over ordered argument pairs `(e_A, e_B)` with one leg in
    /// each distribution.
    pub fn inner_mixed(&self, other: &Self, eps: &[f64], n: usize) -> T {
        self.inner_where(other, eps, |a, b| (a < n) != (b < n))
    }

    pub fn inner_where(&self, other: &Self, eps: &[f64], keep: impl Fn(usize, usize) -> bool) -> T {
        let d = self.d;
        let mut s = T::zero();
        for a in 0..d {
            for b in 0..d {
                if !keep(a, b) {
                    continue;
                }
                for c in 0..d {
                    s += (self.get(a, b, c) * other.get(a, b, c)).scale(eps[a] * eps[b] * eps[c]);
                }
            }
        }
        s
    }
}

impl FrameTensor<f64> {
    /// Euclidean norm of the frame components.
    pub fn frame_norm(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Point-local raw data.
#[derive(Clone, Debug)]
pub struct Local<T> {
    pub x: Vec<T>,
    pub d: usize,
    pub n: usize,
    pub g: Mat<T>,
    pub ginv: Mat<T>,
    /// `Γ^λ_{μν}` at `[λ][μ][ν]`.
    pub gamma: Vec<T>,
    /// `e_A^λ`.
    pub frame: Vec<Vec<T>>,
    /// `∂_σ e_A^λ` at `[σ][A][λ]`.
    pub dframe: Vec<Vec<Vec<T>>>,
    pub eps: Vec<f64>,
    /// `𝒯^λ_{μν}` at `[λ][μ][ν]`.
    pub tors: Vec<T>,
    /// `∂_σ 𝒯^λ_{μν}` indexed `[σ]`.
    pub dtors: Vec<Vec<T>>,
}

fn point_re<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.re()).collect()
}

pub fn local<T: Scalar>(scn: &Scenario, x: &[T]) -> Result<Local<T>> {
    let d = scn.dim();
    let n = scn.n();
    let pt = point_re(x);
    let (g, dg) = scn.metric.eval_jet(x);
    if g.a.iter().any(|v| !v.re().is_finite()) {
        return Err(GeomError::NonFinite {
            what: "metric".into(),
            point: pt,
        });
    }
    let ginv = g
        .inverse(METRIC_PIVOT_FLOOR)
        .ok_or_else(|| GeomError::DegenerateMetric { point: pt.clone() })?;
    let gamma = christoffel_from(&ginv, &dg);

    let mut frame = Vec::new();
    let mut eps = Vec::new();
    let mut dframe = Vec::with_capacity(d);
    for sigma in 0..d {
        let xs = seed(x, sigma);
        let gs: Mat<Dual<T>> = scn.metric.eval(&xs);
        let fields = scn.eval_top_fields(&xs);
        let fv = build_frame(&gs, &fields, scn.p(), scn.rotation.as_ref(), &pt)?;
        if sigma == 0 {
            frame = fv.vecs.iter().map(|v| v.iter().map(|c| c.v).collect()).collect();
            eps = fv.eps.clone();
        }
        dframe.push(
            fv.vecs
                .iter()
                .map(|v| v.iter().map(|c| c.d).collect())
                .collect::<Vec<Vec<T>>>(),
        );
    }
    let (tors, dtors) = contorsion_jet(scn, x);
    if tors.iter().any(|v| !v.re().is_finite()) {
        return Err(GeomError::NonFinite {
            what: "contorsion".into(),
            point: pt,
        });
    }
    Ok(Local {
        x: x.to_vec(),
        d,
        n,
        g,
        ginv,
        gamma,
        frame,
        dframe,
        eps,
        tors,
        dtors,
    })
}

/// Frame-level tensors at a point. Vectors are covariant frame components
/// `v_C = g(v, e_C)`.
#[derive(Clone, Debug)]
pub struct Derived<T> {
    pub local: Local<T>,
    pub d: usize,
    pub n: usize,
    pub eps: Vec<f64>,
    /// `g(∇_{e_A} e_B, e_C)`.
    pub omega: FrameTensor<T>,
    /// `g(𝒯_{e_A} e_B, e_C)`.
    pub tau: FrameTensor<T>,
    pub h_top: FrameTensor<T>,
    pub t_top: FrameTensor<T>,
    pub h_bot: FrameTensor<T>,
    pub t_bot: FrameTensor<T>,
    /// `[Z][X][Y] = g(A⊤_Z X, Y)`.
    pub a_top: FrameTensor<T>,
    pub a_bot: FrameTensor<T>,
    /// `[Z][X][Y] = g(T⊤♯_Z X, Y)`.
    pub ts_top: FrameTensor<T>,
    pub ts_bot: FrameTensor<T>,
    pub mean_top: Vec<T>,
    pub mean_bot: Vec<T>,
    pub means: ContorsionMeans<T>,
}

impl<T: Scalar> Derived<T> {
    pub fn is_top(&self, a: usize) -> bool {
        a < self.n
    }

    /// Coordinate components of a vector given by covariant frame components.
    pub fn coord(&self, cov: &[T]) -> Vec<T> {
        let d = self.d;
        let mut out = vec![T::zero(); d];
        for (c, e) in self.local.frame.iter().enumerate() {
            let w = cov[c].scale(self.eps[c]);
            for l in 0..d {
                out[l] += w * e[l];
            }
        }
        out
    }

    /// Covariant frame components of a coordinate vector.
    pub fn cov(&self, v: &[T]) -> Vec<T> {
        self.local.frame.iter().map(|e| self.local.g.form(v, e)).collect()
    }

    pub fn top(&self, cov: &[T]) -> Vec<T> {
        cov.iter()
            .enumerate()
            .map(|(c, v)| if c < self.n { *v } else { T::zero() })
            .collect()
    }

    pub fn bot(&self, cov: &[T]) -> Vec<T> {
        cov.iter()
            .enumerate()
            .map(|(c, v)| if c >= self.n { *v } else { T::zero() })
            .collect()
    }

    /// `g(u, v)` for covariant frame components.
    pub fn g(&self, u: &[T], v: &[T]) -> T {
        let mut s = T::zero();
        for c in 0..self.d {
            s += (u[c] * v[c]).scale(self.eps[c]);
        }
        s
    }

    /// `𝒯_X Y`.
    pub fn t_apply(&self, x: &[T], y: &[T]) -> Vec<T> {
        self.tau.apply(x, y, &self.eps)
    }

    /// Covariant components of the frame vector `e_A`.
    pub fn unit(&self, a: usize) -> Vec<T> {
        let mut v = vec![T::zero(); self.d];
        v[a] = T::cst(self.eps[a]);
        v
    }
}

pub fn derived<T: Scalar>(scn: &Scenario, x: &[T]) -> Result<Derived<T>> {
    let lc = local(scn, x)?;
    Ok(derive(lc))
}

pub fn derive<T: Scalar>(lc: Local<T>) -> Derived<T> {
    let d = lc.d;
    let n = lc.n;
    let eps = lc.eps.clone();
    // ∇_{e_A} e_B in coordinates, then lowered against e_C
    let mut nab = vec![vec![vec![T::zero(); d]; d]; d];
    let mut tvec = vec![vec![vec![T::zero(); d]; d]; d];
    for a in 0..d {
        for b in 0..d {
            for l in 0..d {
                let mut s = T::zero();
                let mut t = T::zero();
                for mu in 0..d {
                    let ea = lc.frame[a][mu];
                    let mut inner = lc.dframe[mu][b][l];
                    let mut tin = T::zero();
                    for nu in 0..d {
                        inner += lc.gamma[i3(d, l, mu, nu)] * lc.frame[b][nu];
                        tin += lc.tors[i3(d, l, mu, nu)] * lc.frame[b][nu];
                    }
                    s += ea * inner;
                    t += ea * tin;
                }
                nab[a][b][l] = s;
                tvec[a][b][l] = t;
            }
        }
    }
    let mut omega = FrameTensor::zeros(d);
    let mut tau = FrameTensor::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                omega.set(a, b, c, lc.g.form(&nab[a][b], &lc.frame[c]));
                tau.set(a, b, c, lc.g.form(&tvec[a][b], &lc.frame[c]));
            }
        }
    }
    let mut h_top = FrameTensor::zeros(d);
    let mut t_top = FrameTensor::zeros(d);
    let mut h_bot = FrameTensor::zeros(d);
    let mut t_bot = FrameTensor::zeros(d);
    let mut a_top = FrameTensor::zeros(d);
    let mut a_bot = FrameTensor::zeros(d);
    let mut ts_top = FrameTensor::zeros(d);
    let mut ts_bot = FrameTensor::zeros(d);
    for a in 0..d {
        for b in 0..d {
            let same = (a < n) == (b < n);
            if !same {
                continue;
            }
            for c in 0..d {
                if (c < n) == (a < n) {
                    continue;
                }
                let s = (omega.get(a, b, c) + omega.get(b, a, c)).scale(0.5);
                let t = (omega.get(a, b, c) - omega.get(b, a, c)).scale(0.5);
                if a < n {
                    h_top.set(a, b, c, s);
                    t_top.set(a, b, c, t);
                    a_top.set(c, a, b, s);
                    ts_top.set(c, a, b, t);
                } else {
                    h_bot.set(a, b, c, s);
                    t_bot.set(a, b, c, t);
                    a_bot.set(c, a, b, s);
                    ts_bot.set(c, a, b, t);
                }
            }
        }
    }
    let mut mean_top = vec![T::zero(); d];
    let mut mean_bot = vec![T::zero(); d];
    for a in 0..d {
        for c in 0..d {
            if a < n {
                mean_top[c] += h_top.get(a, a, c).scale(eps[a]);
            } else {
                mean_bot[c] += h_bot.get(a, a, c).scale(eps[a]);
            }
        }
    }
    let means = contorsion_means(&tau, &eps, n);
    Derived {
        local: lc,
        d,
        n,
        eps,
        omega,
        tau,
        h_top,
        t_top,
        h_bot,
        t_bot,
        a_top,
        a_bot,
        ts_top,
        ts_bot,
        mean_top,
        mean_bot,
        means,
    }
}

/// Frame tensors that can be differentiated covariantly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorId {
    HTop,
    TTop,
    HBot,
    TBot,
    Contorsion,
}

pub fn tensor_of<T: Scalar>(id: TensorId, dv: &Derived<T>) -> &FrameTensor<T> {
    match id {
        TensorId::HTop => &dv.h_top,
        TensorId::TTop => &dv.t_top,
        TensorId::HBot => &dv.h_bot,
        TensorId::TBot => &dv.t_bot,
        TensorId::Contorsion => &dv.tau,
    }
}

/// Coordinate components `F^λ_{μν} = F(∂μ, ∂ν)^λ` of a frame tensor.
pub fn tensor_coord<T: Scalar>(f: &FrameTensor<T>, dv: &Derived<T>) -> Vec<T> {
    let d = dv.d;
    let fr = &dv.local.frame;
    // coframe θ^A_μ = ε_A g(∂μ, e_A)
    let theta: Vec<Vec<T>> = (0..d)
        .map(|a| {
            let low = dv.local.g.mul_vec(&fr[a]);
            low.into_iter().map(|c| c.scale(dv.eps[a])).collect()
        })
        .collect();
    let mut out = vec![T::zero(); d * d * d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let fabc = f.get(a, b, c);
                if fabc.is_const() && fabc.re() == 0.0 {
                    continue;
                }
                let w = fabc.scale(dv.eps[c]);
                for mu in 0..d {
                    for nu in 0..d {
                        let k = w * theta[a][mu] * theta[b][nu];
                        for l in 0..d {
                            out[i3(d, l, mu, nu)] += k * fr[c][l];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Frame components of a (1,3)-type object, `[D][A][B][C]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame4 {
    pub d: usize,
    pub c: Vec<f64>,
}

impl Frame4 {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            c: vec![0.0; d * d * d * d],
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, e: usize) -> f64 {
        self.c[crate::chart::i4(self.d, a, b, c, e)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, e: usize, v: f64) {
        let d = self.d;
        self.c[crate::chart::i4(d, a, b, c, e)] = v;
    }

    /// Contracts the first three slots with covariant frame vectors,
    /// returning covariant components.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64], eps: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d];
        for a in 0..d {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..d {
                if y[b] == 0.0 {
                    continue;
                }
                for c in 0..d {
                    let w = x[a] * y[b] * z[c] * eps[a] * eps[b] * eps[c];
                    if w == 0.0 {
                        continue;
                    }
                    for (e, o) in out.iter_mut().enumerate() {
                        *o += w * self.get(a, b, c, e);
                    }
                }
            }
        }
        out
    }
}

/// Vector fields whose divergences and derivatives the catalog uses.
#[derive(Clone, Copy, Debug)]
pub enum Field<'a> {
    MeanTop,
    MeanBot,
    /// `H⊤ + H⊥`
    MeanSum,
    /// `(H⊤_𝒯 − H⊤_𝒯*)⊥ + (H⊥_𝒯 − H⊥_𝒯*)⊤`
    ContorsionMix,
    /// `(H⊤_𝒯)⊥ + (H⊥_𝒯)⊤`
    ContorsionMixRc,
    /// `H⊤ + H⊥ + ½((H⊤_𝒯 − H⊤_𝒯*)⊥ + (H⊥_𝒯 − H⊥_𝒯*)⊤)`
    GlobalXi,
    /// `H⊥ + ½(H⊥_𝒯 − H⊥_𝒯*)⊤`
    LeafXi,
    /// `H⊤ + ½(H⊤_𝒯 − H⊤_𝒯*)⊥`
    LeafXiBot,
    /// `(𝒯_N N)⊤ − (H⊤_𝒯*)⊥` with `N` the last frame vector
    RicciN,
    /// `A⊤_{H⊤}H⊥ + A⊥_{H⊥}H⊤`
    Shape,
    /// `𝒯_{H⊥}H⊤ + 𝒯_{H⊤}H⊥`
    ContorsionHH,
    /// `H⊤_𝒯`, `H⊥_𝒯`, `H⊤_𝒯*`, `H⊥_𝒯*` unprojected
    MeanT { top: bool, star: bool },
    /// A frame vector `e_A`
    FrameVec(usize),
    /// Coordinate components given by expressions
    Coord(&'a [Expr]),
}

/// Coordinate components of `f` at the point of `dv`.
pub fn field<T: Scalar>(f: Field<'_>, dv: &Derived<T>) -> Vec<T> {
    dv.coord(&field_cov(f, dv))
}

/// Covariant frame components of `f`.
pub fn field_cov<T: Scalar>(f: Field<'_>, dv: &Derived<T>) -> Vec<T> {
    let m = &dv.means;
    let diff = |x: &[T], y: &[T]| -> Vec<T> { x.iter().zip(y).map(|(a, b)| *a - *b).collect() };
    let sum = |x: &[T], y: &[T]| -> Vec<T> { x.iter().zip(y).map(|(a, b)| *a + *b).collect() };
    let half = |x: &[T]| -> Vec<T> { x.iter().map(|a| a.scale(0.5)).collect() };
    match f {
        Field::MeanTop => dv.mean_top.clone(),
        Field::MeanBot => dv.mean_bot.clone(),
        Field::MeanSum => sum(&dv.mean_top, &dv.mean_bot),
        Field::ContorsionMix => sum(
            &dv.bot(&diff(&m.top, &m.top_star)),
            &dv.top(&diff(&m.bot, &m.bot_star)),
        ),
        Field::ContorsionMixRc => sum(&dv.bot(&m.top), &dv.top(&m.bot)),
        Field::GlobalXi => sum(
            &sum(&dv.mean_top, &dv.mean_bot),
            &half(&field_cov(Field::ContorsionMix, dv)),
        ),
        Field::LeafXi => sum(&dv.mean_bot, &half(&dv.top(&diff(&m.bot, &m.bot_star)))),
        Field::LeafXiBot => sum(&dv.mean_top, &half(&dv.bot(&diff(&m.top, &m.top_star)))),
        Field::RicciN => {
            let nn = dv.unit(dv.d - 1);
            let tnn = dv.t_apply(&nn, &nn);
            diff(&dv.top(&tnn), &dv.bot(&m.top_star))
        }
        Field::Shape => sum(
            &dv.a_top.apply(&dv.mean_top, &dv.mean_bot, &dv.eps),
            &dv.a_bot.apply(&dv.mean_bot, &dv.mean_top, &dv.eps),
        ),
        Field::ContorsionHH => sum(
            &dv.t_apply(&dv.mean_bot, &dv.mean_top),
            &dv.t_apply(&dv.mean_top, &dv.mean_bot),
        ),
        Field::MeanT { top, star } => match (top, star) {
            (true, false) => m.top.clone(),
            (false, false) => m.bot.clone(),
            (true, true) => m.top_star.clone(),
            (false, true) => m.bot_star.clone(),
        },
        Field::FrameVec(a) => dv.unit(a),
        Field::Coord(exprs) => {
            let v: Vec<T> = exprs.iter().map(|e| e.eval(&dv.local.x)).collect();
            dv.cov(&v)
        }
    }
}

/// Point data with first derivatives of every frame-level quantity.
#[derive(Clone, Debug)]
pub struct PointData {
    pub x: Vec<f64>,
    pub base: Derived<f64>,
    /// `Derived` evaluated on `x` seeded along coordinate `σ`.
    pub dirs: Vec<Derived<Dual<f64>>>,
}

impl PointData {
    pub fn new(scn: &Scenario, x: &[f64]) -> Result<Self> {
        let base = derived::<f64>(scn, x)?;
        let dirs = (0..scn.dim())
            .map(|s| derived::<Dual<f64>>(scn, &seed(x, s)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x: x.to_vec(),
            base,
            dirs,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.d
    }

    pub fn gamma(&self) -> &[f64] {
        &self.base.local.gamma
    }

    /// Levi-Civita curvature from `Γ` and its AD derivatives.
    pub fn riemann(&self) -> RiemannValue {
        let dgamma: Vec<Vec<f64>> = self
            .dirs
            .iter()
            .map(|dl| dl.local.gamma.iter().map(|c| c.d).collect())
            .collect();
        RiemannValue::from_connection(&self.base.local.gamma, &dgamma)
    }

    /// Levi-Civita covariant derivative of the contorsion,
    /// `(∇_μ𝒯)^λ_{νσ}` indexed `[μ][i3(λ,ν,σ)]`.
    pub fn nabla_contorsion(&self) -> Vec<Vec<f64>> {
        let lc = &self.base.local;
        self.covariant_from_jet(&lc.tors, &lc.dtors)
    }

    /// `∇F` of a frame tensor field, coordinate components indexed like
    /// [`Self::nabla_contorsion`].
    pub fn nabla_tensor(&self, id: TensorId) -> Vec<Vec<f64>> {
        let v = tensor_coord(tensor_of(id, &self.base), &self.base);
        let dv: Vec<Vec<f64>> = self
            .dirs
            .iter()
            .map(|dl| tensor_coord(tensor_of(id, dl), dl).iter().map(|c| c.d).collect())
            .collect();
        self.covariant_from_jet(&v, &dv)
    }

    /// Frame components `[D][A][B][C] = g((∇_{e_D}F)(e_A, e_B), e_C)` of a
    /// coordinate covariant derivative.
    pub fn frame_nabla(&self, nt: &[Vec<f64>]) -> Frame4 {
        let b = &self.base;
        let d = b.d;
        let fr = &b.local.frame;
        let mut out = Frame4::zeros(d);
        for dd in 0..d {
            for a in 0..d {
                for bb in 0..d {
                    let mut v = vec![0.0; d];
                    for mu in 0..d {
                        for nu in 0..d {
                            for s in 0..d {
                                let w = fr[dd][mu] * fr[a][nu] * fr[bb][s];
                                if w == 0.0 {
                                    continue;
                                }
                                for (l, o) in v.iter_mut().enumerate() {
                                    *o += w * nt[mu][i3(d, l, nu, s)];
                                }
                            }
                        }
                    }
                    for c in 0..d {
                        out.set(dd, a, bb, c, b.local.g.form(&v, &fr[c]));
                    }
                }
            }
        }
        out
    }

    fn covariant_from_jet(&self, t: &[f64], dt: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let lc = &self.base.local;
        let d = lc.d;
        let gm = &lc.gamma;
        (0..d)
            .map(|mu| {
                let mut out = dt[mu].clone();
                for l in 0..d {
                    for nu in 0..d {
                        for s in 0..d {
                            let mut v = 0.0;
                            for k in 0..d {
                                v += gm[i3(d, l, mu, k)] * t[i3(d, k, nu, s)]
                                    - gm[i3(d, k, mu, nu)] * t[i3(d, l, k, s)]
                                    - gm[i3(d, k, mu, s)] * t[i3(d, l, nu, k)];
                            }
                            out[i3(d, l, nu, s)] += v;
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// `(V^λ, ∂_σ V^λ)` in coordinates, the derivative indexed `[σ][λ]`.
    pub fn field_jet(&self, f: Field<'_>) -> (Vec<f64>, Vec<Vec<f64>>) {
        let v = field(f, &self.base);
        let dv = self
            .dirs
            .iter()
            .map(|dl| field(f, dl).iter().map(|c| c.d).collect())
            .collect();
        (v, dv)
    }

    /// `(∇_X V)^λ` for coordinate `X`.
    pub fn nabla(&self, f: Field<'_>, x: &[f64]) -> Vec<f64> {
        let (v, dv) = self.field_jet(f);
        self.nabla_from_jet(&v, &dv, x)
    }

    pub fn nabla_from_jet(&self, v: &[f64], dv: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let gm = self.gamma();
        let mut out = vec![0.0; d];
        for mu in 0..d {
            if x[mu] == 0.0 {
                continue;
            }
            for l in 0..d {
                let mut s = dv[mu][l];
                for nu in 0..d {
                    s += gm[i3(d, l, mu, nu)] * v[nu];
                }
                out[l] += x[mu] * s;
            }
        }
        out
    }

    /// Full divergence `∂_μV^μ + Γ^μ_{μν}V^ν`.
    pub fn divergence(&self, f: Field<'_>) -> f64 {
        let (v, dv) = self.field_jet(f);
        let d = self.dim();
        let gm = self.gamma();
        let mut s = 0.0;
        for mu in 0..d {
            s += dv[mu][mu];
            for nu in 0..d {
                s += gm[i3(d, mu, mu, nu)] * v[nu];
            }
        }
        s
    }

    /// `Σ ε_A g(∇_{e_A}V, e_A)` over one block of the frame.
    fn partial_div(&self, f: Field<'_>, top: bool) -> f64 {
        let (v, dv) = self.field_jet(f);
        let b = &self.base;
        let mut s = 0.0;
        for a in 0..b.d {
            if b.is_top(a) != top {
                continue;
            }
            let e = &b.local.frame[a];
            let w = self.nabla_from_jet(&v, &dv, e);
            s += b.eps[a] * b.local.g.form(&w, e);
        }
        s
    }

    /// `div⊤ V = Σ_a ε_a g(∇_{E_a}V, E_a)`.
    pub fn div_top(&self, f: Field<'_>) -> f64 {
        self.partial_div(f, true)
    }

    /// `div⊥ V = Σ_i ε_i g(∇_{ℰ_i}V, ℰ_i)`.
    pub fn div_bot(&self, f: Field<'_>) -> f64 {
        self.partial_div(f, false)
    }

    /// `∇_X V` for `X` and the result in covariant frame components.
    pub fn nabla_cov(&self, f: Field<'_>, x_cov: &[f64]) -> Vec<f64> {
        let x = self.base.coord(x_cov);
        let w = self.nabla(f, &x);
        self.base.cov(&w)
    }
}

/// `(1/√|g|) ∂_k(√|g| V^k)` by a fourth-order central stencil with step
/// `h[k]` on axis `k`. Independent of the Christoffel symbols and of AD.
pub fn fd_divergence(scn: &Scenario, f: Field<'_>, x: &[f64], h: &[f64]) -> Result<f64> {
    let d = scn.dim();
    if x.len() != d || h.len() != d {
        return Err(GeomError::RankMismatch(format!("point/step of length {}/{} in dimension {d}", x.len(), h.len())));
    }
    let density = |y: &[f64], k: usize| -> Result<f64> {
        let dv = derived::<f64>(scn, y)?;
        Ok(dv.local.g.det().abs().sqrt() * field(f, &dv)[k])
    };
    let mut s = 0.0;
    for k in 0..d {
        let at = |t: f64| -> Result<f64> {
            let mut y = x.to_vec();
            y[k] += t * h[k];
            density(&y, k)
        };
        s += (-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h[k]);
    }
    let g = derived::<f64>(scn, x)?.local.g;
    Ok(s / g.det().abs().sqrt())
}
