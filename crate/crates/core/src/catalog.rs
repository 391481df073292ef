//! Registry of divergence identities and integral formulas.
//!
//! Every entry has a pointwise form `lhs = rhs` where `lhs` is the divergence
//! of a vector field computed by AD, and `rhs` is assembled from invariants.
//! For integral entries `rhs` is the integrand, which integrates to zero.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::contorsion::{hat, star};
use crate::dual::seed;
use crate::error::{GeomError, Result};
use crate::extrinsic::Which;
use crate::invariants::{bar_ricci_nn, invariants, q1_terms, q2, ricci_hh_curvature, InvariantSet, Reading};
use crate::point::{Derived, Field, FrameTensor, PointData};
use crate::predicates::{deviation, Predicate, PREDICATE_TOLERANCE};
use crate::quadrature::{integrate, leaf_integrate, GridKind, LeafSlice, QuadratureGrid};
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Pointwise,
    Integral,
    LeafwiseIntegral,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Pointwise => "pointwise",
            Kind::Integral => "integral",
            Kind::LeafwiseIntegral => "leafwise-integral",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Anchor {
    pub citation: &'static str,
    pub quote: &'static str,
}

/// Sign choice for the combined `Z₁ + 𝒯_{H⊥}H⊤ + 𝒯_{H⊤}H⊥` divergence:
/// `div = σ_A Ric + Q₁ + σ_B (R̄ic − Ric) + Q₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SignVariant {
    /// `−R̄ic + Q₁ + Q₂`
    V1,
    /// `−R̄ic + 2Ric + Q₁ + Q₂`, the two printed identities summed
    V2,
    /// `R̄ic − 2Ric + Q₁ + Q₂`
    V3,
    /// `R̄ic + Q₁ + Q₂`
    V4,
}

impl SignVariant {
    pub const ALL: [SignVariant; 4] = [SignVariant::V1, SignVariant::V2, SignVariant::V3, SignVariant::V4];

    /// `(σ_A, σ_B)`
    pub fn signs(self) -> (f64, f64) {
        match self {
            SignVariant::V1 => (-1.0, -1.0),
            SignVariant::V2 => (1.0, -1.0),
            SignVariant::V3 => (-1.0, 1.0),
            SignVariant::V4 => (1.0, 1.0),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            SignVariant::V1 => "RICHH-V1",
            SignVariant::V2 => "RICHH-V2",
            SignVariant::V3 => "RICHH-V3",
            SignVariant::V4 => "RICHH-V4",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Formula {
    Pw,
    PwIf,
    Qq,
    QqStat,
    QqRc,
    If1,
    If1Stat,
    If1Rc,
    IfLeaf,
    IfLeafStat,
    IfLeafRc,
    RicN,
    RicNIf,
    Ahh,
    AhhIf,
    Richh,
    Variant(SignVariant),
    If01b,
    If01bUmb,
    Th4,
    UmbT6,
    UmbC5,
    Twist,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityDescriptor {
    pub id: &'static str,
    pub kind: Kind,
    pub requires: &'static [Predicate],
    pub paper_anchor: Anchor,
    pub summary: &'static str,
    #[serde(skip)]
    formula: Formula,
}

use Predicate as P;

macro_rules! entry {
    ($id:expr, $kind:ident, $req:expr, $cit:expr, $quote:expr, $sum:expr, $f:expr) => {
        IdentityDescriptor {
            id: $id,
            kind: Kind::$kind,
            requires: $req,
            paper_anchor: Anchor {
                citation: $cit,
                quote: $quote,
            },
            summary: $sum,
            formula: $f,
        }
    };
}

/// The catalog in its stable order.
pub fn list_identities() -> Vec<IdentityDescriptor> {
    let mut v = vec![
        entry!("PW", Pointwise, &[], "Sec. 1, Walczak's formula", "has found many applications",
            "div(H⊥+H⊤) = S_mix + ⟨h⊥,h⊥⟩ − |H⊥|² − ⟨T⊥,T⊥⟩ + ⟨h⊤,h⊤⟩ − |H⊤|² − ⟨T⊤,T⊤⟩", Formula::Pw),
        entry!("PW-IF", Integral, &[P::Closed], "Sec. 2.1", "was obtained for a closed",
            "∫(S_mix − |T⊤|² − |T⊥|² + |h⊤|² + |h⊥|² − |H⊤|² − |H⊥|²) = 0", Formula::PwIf),
        entry!("QQ", Pointwise, &[], "Sec. 2.1, Lemma 2",
            "the inner product of tensors $B,C$ restricted on the subbundle",
            "div((H⊤_𝒯 − H⊤_𝒯*)⊥ + (H⊥_𝒯 − H⊥_𝒯*)⊤) = 2(S̄_mix − S_mix) + …", Formula::Qq),
        entry!("QQ-STAT", Pointwise, &[P::Statistical], "Sec. 2.1, Lemma 2", "For statistical manifolds",
            "S̄_mix − S_mix = g(H⊤_𝒯,H⊥_𝒯) − ½⟨𝒯,𝒯⟩|V", Formula::QqStat),
        entry!("QQ-RC", Pointwise, &[P::MetricCompatible], "Sec. 2.1, Lemma 2", "For Riemann-Cartan manifolds",
            "div((H⊤_𝒯)⊥ + (H⊥_𝒯)⊤) = S̄_mix − S_mix + …", Formula::QqRc),
        entry!("IF1", Integral, &[P::Closed], "Sec. 2.1, Theorem 1", "then the following integral formula holds",
            "∫(S̄_mix − |T|² + |h|² − |H|² + contorsion terms) = 0", Formula::If1),
        entry!("IF1-STAT", Integral, &[P::Closed, P::Statistical], "Sec. 2.1, corollary",
            "be a closed statistical manifold",
            "statistical form of IF1", Formula::If1Stat),
        entry!("IF1-RC", Integral, &[P::Closed, P::MetricCompatible], "Sec. 2.1, corollary",
            "be a closed Riemann-Cartan manifold",
            "Riemann–Cartan form of IF1", Formula::If1Rc),
        entry!("IF-LEAF", LeafwiseIntegral, &[P::IntegrableTop, P::MixedAi], "Sec. 2.1, Theorem 2",
            "integral formula along the leaf",
            "∫_{M'}(S̄_mix − |T⊥|² + |h⊥|² + |h⊤|² + ½[…]) = 0", Formula::IfLeaf),
        entry!("IF-LEAF-STAT", LeafwiseIntegral, &[P::IntegrableTop, P::MixedAi, P::Statistical],
            "Sec. 2.1, corollary", "admits a compact leaf",
            "statistical form of IF-LEAF", Formula::IfLeafStat),
        entry!("IF-LEAF-RC", LeafwiseIntegral, &[P::IntegrableTop, P::MixedAi, P::MetricCompatible],
            "Sec. 2.1, corollary", "admits a compact leaf",
            "Riemann–Cartan form of IF-LEAF", Formula::IfLeafRc),
        entry!("RIC-N", Pointwise, &[P::CodimOne], "Sec. 2.1, Remark", "spanned by a unit vector field",
            "div((𝒯_N N)⊤ − (H⊤_𝒯*)⊥) = R̄ic_NN − Ric_NN + Q", Formula::RicN),
        entry!("RIC-N-IF", Integral, &[P::Closed, P::CodimOne, P::IntegrableTop], "Sec. 2.1, Remark",
            "spanned by a unit vector field",
            "∫(2σ₂ − R̄ic_NN − Q) = 0", Formula::RicNIf),
        entry!("AHH", Pointwise, &[], "Sec. 2.2", "has been calculated in",
            "div(A⊤_{H⊤}H⊥ + A⊥_{H⊥}H⊤) = −Ric(H⊤,H⊥) + Q₁", Formula::Ahh),
        entry!("AHH-IF", Integral, &[P::Closed], "Sec. 2.2",
            "on a closed manifold $(M,g)$ one has the integral formula",
            "∫(−Ric(H⊤,H⊥) + Q₁) = 0", Formula::AhhIf),
        entry!("RICHH", Pointwise, &[P::Cond4], "Sec. 2.2, Lemma 3", "For the metric-affine case we have",
            "div(𝒯_{H⊥}H⊤ + 𝒯_{H⊤}H⊥) = −(R̄ic − Ric)(H⊤,H⊥) + Q₂", Formula::Richh),
    ];
    for s in SignVariant::ALL {
        v.push(IdentityDescriptor {
            id: s.id(),
            kind: Kind::Pointwise,
            requires: &[P::Cond4],
            paper_anchor: Anchor {
                citation: "Sec. 2.2, proof of Theorem 3",
                quote: "be a closed metric-affine space and",
            },
            summary: match s {
                SignVariant::V1 => "div(Z₁ + ξ) = −R̄ic + Q₁ + Q₂",
                SignVariant::V2 => "div(Z₁ + ξ) = −R̄ic + 2Ric + Q₁ + Q₂",
                SignVariant::V3 => "div(Z₁ + ξ) = R̄ic − 2Ric + Q₁ + Q₂",
                SignVariant::V4 => "div(Z₁ + ξ) = R̄ic + Q₁ + Q₂",
            },
            formula: Formula::Variant(s),
        });
    }
    v.extend([
        entry!("IF01B", Integral, &[P::Closed, P::Cond4], "Sec. 2.2, Theorem 3",
            "be a closed metric-affine space and",
            "∫(−R̄ic(H⊤,H⊥) + Q₁ + Q₂) = 0", Formula::If01b),
        entry!("IF01B-UMB", Integral,
            &[P::Closed, P::Cond4, P::UmbilicalTop, P::UmbilicalBot, P::IntegrableTop, P::IntegrableBot, P::CmcTop, P::CmcBot],
            "Sec. 2.2, corollary", "umbilical, integrable and have constant",
            "∫(−R̄ic − (1/n + 1/p)|H⊤|²|H⊥|² + Q₂) = 0", Formula::If01bUmb),
        entry!("TH4", Pointwise, &[P::IntegrableTop, P::IntegrableBot, P::MixedAi, P::Cond4, P::Cond5],
            "Sec. 3.1, Theorem 4", "then $M$ splits",
            "div⊤ξ = S̄_mix + ⟨h⊥,h⊥⟩ + ⟨h⊤,h⊤⟩", Formula::Th4),
        entry!("UMB-T6", Pointwise,
            &[P::IntegrableTop, P::UmbilicalTop, P::UmbilicalBot, P::MixedAi, P::Cond4, P::Cond5],
            "Sec. 3.2, Theorem 6", "a complete open umbilical leaf",
            "div ξ = S̄_mix − ⟨T⊥,T⊥⟩ − (p−1)/p |H⊥|² − (n−1)/n |H⊤|²", Formula::UmbT6),
        entry!("UMB-C5", Pointwise, &[P::UmbilicalTop, P::UmbilicalBot, P::Cond4, P::Hht],
            "Sec. 3.2, Theorem 7", "complementary orthogonal umbilical distributions",
            "div(H⊥+H⊤) = S̄_mix − ⟨T⊤,T⊤⟩ − ⟨T⊥,T⊥⟩ − (p−1)/p |H⊥|² − (n−1)/n |H⊤|²", Formula::UmbC5),
        entry!("TWIST", Pointwise, &[P::Warped], "Sec. 3.2, doubly-twisted products",
            "The second fundamental forms and the mean curvature vectors",
            "h⊤ = −∇⊥(log v) g⊤, h⊥ = −∇⊤(log u) g⊥, H⊤ = −n∇⊥ log v, H⊥ = −p∇⊤ log u", Formula::Twist),
    ]);
    v
}

impl IdentityDescriptor {
    /// The sign variant this entry tests, if it is one.
    pub fn variant(&self) -> Option<SignVariant> {
        match self.formula {
            Formula::Variant(v) => Some(v),
            _ => None,
        }
    }
}

/// The variant that holds on every scenario with and without contorsion.
pub const RESOLVED_VARIANT: SignVariant = SignVariant::V1;

pub fn descriptor(id: &str) -> Result<IdentityDescriptor> {
    list_identities()
        .into_iter()
        .find(|d| d.id == id)
        .ok_or_else(|| GeomError::UnknownIdentity(id.into()))
}

/// Where an identity was evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Location {
    Point { x: Vec<f64> },
    Grid { kind: GridKind, resolution: Vec<usize>, nodes: usize },
    Leaf { which: Which, base: Vec<f64>, resolution: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityResult {
    pub id: String,
    pub at: Location,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub scale: f64,
}

impl IdentityResult {
    fn new(id: &str, at: Location, lhs: f64, rhs: f64) -> Self {
        Self {
            id: id.into(),
            at,
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            scale: lhs.abs().max(rhs.abs()).max(1.0),
        }
    }

    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

/// Switch between the printed and the re-derived forms of terms that
/// disagree. Only entries with a known discrepancy react to it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EvalOptions {
    pub reading: Reading,
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// Contorsion pieces of the mixed-curvature identities.
struct ContorsionTerms {
    /// `g(H⊤_𝒯, H⊥_𝒯*) + g(H⊥_𝒯, H⊤_𝒯*)`
    cross: f64,
    /// `g(H⊤_𝒯 − H⊥_𝒯 + H⊥_𝒯* − H⊤_𝒯*, H⊤ − H⊥)`
    mean_mix: f64,
    /// `⟨𝒯 − 𝒯* + 𝒯̂ − 𝒯̂*, A⊥ − T⊥♯ + A⊤ − T⊤♯⟩`
    shape: f64,
    /// same with `A⊥ − T⊥♯ + A⊤`
    shape_leaf: f64,
    /// `⟨𝒯*, 𝒯̂⟩|V`
    star_hat_v: f64,
    /// `⟨𝒯, 𝒯⟩|V`
    tt_v: f64,
    /// `⟨𝒯, 𝒯̂⟩|V`
    t_hat_v: f64,
    /// `⟨𝒯 + 𝒯̂, A⊥ − T⊥♯ + A⊤ − T⊤♯⟩` and the same with `−` between `𝒯`, `𝒯̂`
    rc_shape: (f64, f64),
    /// `⟨𝒯 + 𝒯̂, A⊥ − T⊥♯ + A⊤⟩`
    rc_shape_leaf: f64,
}

fn contorsion_terms(b: &Derived<f64>) -> ContorsionTerms {
    let (n, eps) = (b.n, &b.eps);
    let m = &b.means;
    let tau = &b.tau;
    let ts = star(tau);
    let th = hat(tau);
    let bb = tau.combine(&ts, 1.0, -1.0);
    let b_full = bb.combine(&hat(&bb), 1.0, 1.0);
    let leaf: FrameTensor<f64> = b.a_bot.combine(&b.ts_bot, 1.0, -1.0).combine(&b.a_top, 1.0, 1.0);
    let c = leaf.combine(&b.ts_top, 1.0, -1.0);
    let (hm, hp) = (sub(&b.mean_top, &b.mean_bot), tau.combine(&th, 1.0, 1.0));
    ContorsionTerms {
        cross: b.g(&m.top, &m.bot_star) + b.g(&m.bot, &m.top_star),
        mean_mix: b.g(&sub(&add(&sub(&m.top, &m.bot), &m.bot_star), &m.top_star), &hm),
        shape: b_full.inner(&c, eps),
        shape_leaf: b_full.inner(&leaf, eps),
        star_hat_v: ts.inner_mixed(&th, eps, n),
        tt_v: tau.inner_mixed(tau, eps, n),
        t_hat_v: tau.inner_mixed(&th, eps, n),
        rc_shape: (hp.inner(&c, eps), tau.combine(&th, 1.0, -1.0).inner(&c, eps)),
        rc_shape_leaf: hp.inner(&leaf, eps),
    }
}

/// `S − |T⊤|² − |T⊥|² + |h⊤|² + |h⊥|² − |H⊤|² − |H⊥|²` for the given `S`.
fn walczak(inv: &InvariantSet, s: f64) -> f64 {
    s - inv.t_top_sq - inv.t_bot_sq + inv.h_top_sq + inv.h_bot_sq - inv.mean_top_sq - inv.mean_bot_sq
}

fn leaf_lhs(pd: &PointData) -> f64 {
    pd.div_top(Field::LeafXi) + pd.div_bot(Field::LeafXiBot)
}

/// `(predicted − computed)` norm for doubly-twisted `h` and `H`.
fn twist_deviation(scn: &Scenario, pd: &PointData, reading: Reading) -> Result<f64> {
    let (u, v) = scn
        .warping
        .as_ref()
        .ok_or_else(|| GeomError::Schema {
            path: "warping".into(),
            message: "scenario has no warping functions".into(),
        })?;
    let b = &pd.base;
    let (d, n, eps) = (b.d, b.n, &b.eps);
    let p = d - n;
    // covariant frame components of ∇ log f: e_C(log f)
    let dlog = |f: &crate::expr::Expr| -> Vec<f64> {
        let val: f64 = f.eval(&pd.x);
        let grad: Vec<f64> = (0..d).map(|s| f.eval(&seed(&pd.x, s)).d / val).collect();
        (0..d)
            .map(|c| b.local.frame[c].iter().zip(&grad).map(|(e, g)| e * g).sum())
            .collect()
    };
    let (lu, lv) = (dlog(u), dlog(v));
    let mut dev = 0.0;
    for a in 0..d {
        for bb in 0..d {
            for c in 0..d {
                let same = a == bb;
                let want_top = if same && a < n && c >= n { -eps[a] * lv[c] } else { 0.0 };
                let want_bot = if same && a >= n && c < n { -eps[a] * lu[c] } else { 0.0 };
                dev += (b.h_top.get(a, bb, c) - want_top).powi(2) + (b.h_bot.get(a, bb, c) - want_bot).powi(2);
            }
        }
    }
    let (kt, kb) = match reading {
        Reading::Resolved => (n as f64, p as f64),
        Reading::Literal => (p as f64, n as f64),
    };
    for c in 0..d {
        let want_top = if c >= n { -kt * lv[c] } else { 0.0 };
        let want_bot = if c < n { -kb * lu[c] } else { 0.0 };
        dev += (b.mean_top[c] - want_top).powi(2) + (b.mean_bot[c] - want_bot).powi(2);
    }
    Ok(dev.sqrt())
}

/// `div(Z₁ + 𝒯_{H⊥}H⊤ + 𝒯_{H⊤}H⊥)`
fn combined_div(pd: &PointData) -> f64 {
    pd.divergence(Field::Shape) + pd.divergence(Field::ContorsionHH)
}

fn sides(f: Formula, scn: &Scenario, pd: &PointData, reading: Reading) -> Result<(f64, f64)> {
    let b = &pd.base;
    let literal = reading == Reading::Literal;
    let (n, p) = (b.n as f64, (b.d - b.n) as f64);
    let q1 = |pd: &PointData| -> f64 { q1_terms(pd, reading).iter().sum() };
    Ok(match f {
        Formula::Pw | Formula::PwIf => {
            let inv = invariants(pd);
            (pd.divergence(Field::MeanSum), walczak(&inv, inv.s_mix))
        }
        Formula::Qq => {
            let inv = invariants(pd);
            let c = contorsion_terms(b);
            let rhs = 2.0 * (inv.bar_s_mix - inv.s_mix) - c.cross - c.mean_mix - c.shape + c.star_hat_v;
            (pd.divergence(Field::ContorsionMix), rhs)
        }
        Formula::QqStat => {
            let inv = invariants(pd);
            let c = contorsion_terms(b);
            let m = &b.means;
            (inv.bar_s_mix - inv.s_mix, b.g(&m.top, &m.bot) - 0.5 * c.tt_v)
        }
        Formula::QqRc => {
            let inv = invariants(pd);
            let c = contorsion_terms(b);
            let m = &b.means;
            let rhs = inv.bar_s_mix - inv.s_mix + b.g(&m.top, &m.bot)
                - b.g(&sub(&m.top, &m.bot), &sub(&b.mean_top, &b.mean_bot))
                - c.rc_shape.0
                - 0.5 * c.t_hat_v;
            (pd.divergence(Field::ContorsionMixRc), rhs)
        }
        Formula::If1 => {
            let inv = invariants(pd);
            let c = contorsion_terms(b);
            let rhs = walczak(&inv, inv.bar_s_mix) - 0.5 * (c.cross + c.mean_mix) - 0.5 * c.shape + 0.5 * c.star_hat_v;
            (pd.divergence(Field::GlobalXi), rhs)
        }
        Formula::If1Stat => {
            let inv = invariants(pd);
            let c = contorsion_terms(b);
            let m = &b.means;
            (pd.divergence(Field::MeanSum), walczak(&inv, inv.bar_s_mix) - b.g(&m.top, &m.bot) + 0.5 * c.tt_v)
        }
        Formula::If1Rc => {
            let inv = invariants(pd);
            let c = contorsion_terms(b);
            let m = &b.means;
            let shape = if literal { c.rc_shape.1 } else { c.rc_shape.0 };
            let rhs = walczak(&inv, inv.bar_s_mix) + b.g(&m.top, &m.bot)
                - b.g(&sub(&m.top, &m.bot), &sub(&b.mean_top, &b.mean_bot))
                - shape
                - 0.5 * c.t_hat_v;
            (pd.divergence(Field::MeanSum) + pd.divergence(Field::ContorsionMixRc), rhs)
        }
        Formula::IfLeaf => {
            let inv = invariants(pd);
            let c = contorsion_terms(b);
            let m = &b.means;
            let bracket = b.g(&sub(&m.top, &m.top_star), &b.mean_bot) + b.g(&sub(&m.bot, &m.bot_star), &b.mean_top)
                - c.cross
                - c.shape_leaf
                + c.star_hat_v;
            let rhs = inv.bar_s_mix + inv.h_bot_sq + inv.h_top_sq - inv.t_bot_sq + 0.5 * bracket;
            (leaf_lhs(pd), rhs)
        }
        Formula::IfLeafStat => {
            let inv = invariants(pd);
            let c = contorsion_terms(b);
            let m = &b.means;
            let k = if literal { -1.0 } else { 0.5 };
            let rhs = inv.bar_s_mix - inv.t_bot_sq + inv.h_bot_sq + inv.h_top_sq - b.g(&m.top, &m.bot) + k * c.tt_v;
            (leaf_lhs(pd), rhs)
        }
        Formula::IfLeafRc => {
            let inv = invariants(pd);
            let c = contorsion_terms(b);
            let m = &b.means;
            let rhs = inv.bar_s_mix - inv.t_bot_sq + inv.h_bot_sq + inv.h_top_sq
                + b.g(&m.top, &m.bot)
                + b.g(&m.top, &b.mean_bot)
                + b.g(&m.bot, &b.mean_top)
                - c.rc_shape_leaf
                - 0.5 * c.t_hat_v;
            (leaf_lhs(pd), rhs)
        }
        Formula::RicN => {
            let r = bar_ricci_nn(pd, reading)?;
            (pd.divergence(Field::RicciN), r.bar_ric_nn - r.ric_nn + r.q)
        }
        Formula::RicNIf => {
            let r = bar_ricci_nn(pd, reading)?;
            let s2 = if literal { r.tr_a_sq } else { r.sigma2 };
            let lhs = -(pd.divergence(Field::MeanSum) + pd.divergence(Field::RicciN));
            (lhs, 2.0 * s2 - r.bar_ric_nn - r.q)
        }
        Formula::Ahh | Formula::AhhIf => {
            let (_, ric) = ricci_hh_curvature(pd);
            let s = if literal { 1.0 } else { -1.0 };
            (pd.divergence(Field::Shape), s * ric + q1(pd))
        }
        Formula::Richh => {
            let (bar, ric) = ricci_hh_curvature(pd);
            (pd.divergence(Field::ContorsionHH), -(bar - ric) + q2(pd, reading))
        }
        Formula::Variant(s) => {
            let (bar, ric) = ricci_hh_curvature(pd);
            let (sa, sb) = s.signs();
            let rhs = sa * ric + sb * (bar - ric) + q1_terms(pd, Reading::Resolved).iter().sum::<f64>()
                + q2(pd, Reading::Resolved);
            (combined_div(pd), rhs)
        }
        Formula::If01b => {
            let (bar, _) = ricci_hh_curvature(pd);
            let s = if literal { 1.0 } else { -1.0 };
            (combined_div(pd), s * bar + q1(pd) + q2(pd, reading))
        }
        Formula::If01bUmb => {
            let (bar, _) = ricci_hh_curvature(pd);
            let inv = invariants(pd);
            let s = if literal { 1.0 } else { -1.0 };
            let q1u = -(1.0 / n + 1.0 / p) * inv.mean_top_sq * inv.mean_bot_sq;
            (combined_div(pd), s * bar + q1u + q2(pd, reading))
        }
        Formula::Th4 => {
            let inv = invariants(pd);
            (pd.div_top(Field::LeafXi), inv.bar_s_mix + inv.h_bot_sq + inv.h_top_sq)
        }
        Formula::UmbT6 => {
            let inv = invariants(pd);
            let lhs = if literal { pd.div_top(Field::LeafXi) } else { pd.divergence(Field::LeafXi) };
            let rhs = inv.bar_s_mix - inv.t_bot_sq - (p - 1.0) / p * inv.mean_bot_sq - (n - 1.0) / n * inv.mean_top_sq;
            (lhs, rhs)
        }
        Formula::UmbC5 => {
            let inv = invariants(pd);
            let rhs = inv.bar_s_mix - inv.t_top_sq - inv.t_bot_sq
                - (p - 1.0) / p * inv.mean_bot_sq
                - (n - 1.0) / n * inv.mean_top_sq;
            (pd.divergence(Field::MeanSum), rhs)
        }
        Formula::Twist => (twist_deviation(scn, pd, reading)?, 0.0),
    })
}

/// First failing predicate among `requires` at a point.
fn check_requires(desc: &IdentityDescriptor, scn: &Scenario, pd: &PointData, skip_closed: bool) -> Result<()> {
    for &pred in desc.requires {
        if skip_closed && pred == P::Closed {
            continue;
        }
        let dev = deviation(pred, scn, pd);
        if dev > PREDICATE_TOLERANCE {
            return Err(GeomError::Precondition {
                id: desc.id.into(),
                predicate: pred.name().into(),
                deviation: dev,
            });
        }
    }
    Ok(())
}

/// `(lhs, rhs)` of the pointwise form at `x`, after checking the
/// point-dependent preconditions.
pub fn pointwise_sides(scn: &Scenario, desc: &IdentityDescriptor, x: &[f64], opts: EvalOptions) -> Result<(f64, f64)> {
    sides_at(scn, desc, &PointData::new(scn, x)?, opts)
}

/// Same as [`pointwise_sides`] on precomputed point data.
pub fn sides_at(scn: &Scenario, desc: &IdentityDescriptor, pd: &PointData, opts: EvalOptions) -> Result<(f64, f64)> {
    check_requires(desc, scn, pd, true)?;
    sides(desc.formula, scn, pd, opts.reading)
}

pub fn evaluate_pointwise(scn: &Scenario, id: &str, x: &[f64]) -> Result<IdentityResult> {
    evaluate_pointwise_with(scn, id, x, EvalOptions::default())
}

/// Pointwise evaluation of any entry; for integral entries this checks the
/// divergence identity whose right side is the integrand.
pub fn evaluate_pointwise_with(scn: &Scenario, id: &str, x: &[f64], opts: EvalOptions) -> Result<IdentityResult> {
    let desc = descriptor(id)?;
    let (lhs, rhs) = pointwise_sides(scn, &desc, x, opts)?;
    Ok(IdentityResult::new(desc.id, Location::Point { x: x.to_vec() }, lhs, rhs))
}

/// Worst pointwise result over grid nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSummary {
    pub id: String,
    pub nodes: usize,
    pub max_relative: f64,
    pub worst: IdentityResult,
}

pub fn evaluate_on_grid(scn: &Scenario, id: &str, grid: &QuadratureGrid, opts: EvalOptions) -> Result<GridSummary> {
    let desc = descriptor(id)?;
    let results: Vec<Result<IdentityResult>> = grid
        .nodes
        .par_iter()
        .map(|x| {
            let (lhs, rhs) = pointwise_sides(scn, &desc, x, opts)?;
            Ok(IdentityResult::new(desc.id, Location::Point { x: x.clone() }, lhs, rhs))
        })
        .collect();
    let mut worst: Option<IdentityResult> = None;
    for (node, r) in results.into_iter().enumerate() {
        let r = r.map_err(|e| GeomError::AtNode {
            node,
            source: Box::new(e),
        })?;
        if worst.as_ref().is_none_or(|w| r.relative() > w.relative()) {
            worst = Some(r);
        }
    }
    let worst = worst.ok_or(GeomError::EmptySample)?;
    Ok(GridSummary {
        id: desc.id.into(),
        nodes: grid.len(),
        max_relative: worst.relative(),
        worst,
    })
}

pub fn evaluate_integral(scn: &Scenario, id: &str, grid: &QuadratureGrid) -> Result<IdentityResult> {
    evaluate_integral_with(scn, id, grid, EvalOptions::default())
}

/// `∫ integrand dvol` compared with zero.
pub fn evaluate_integral_with(scn: &Scenario, id: &str, grid: &QuadratureGrid, opts: EvalOptions) -> Result<IdentityResult> {
    let desc = descriptor(id)?;
    if desc.kind != Kind::Integral {
        return Err(GeomError::WrongKind {
            id: desc.id.into(),
            kind: desc.kind.to_string(),
        });
    }
    if !scn.closed {
        return Err(GeomError::NotClosed);
    }
    let value = integrate(scn, &|x| Ok(pointwise_sides(scn, &desc, x, opts)?.1), grid)?;
    Ok(IdentityResult::new(
        desc.id,
        Location::Grid {
            kind: grid.kind,
            resolution: grid.resolution.clone(),
            nodes: grid.len(),
        },
        value,
        0.0,
    ))
}

pub fn evaluate_leaf(scn: &Scenario, id: &str, leaf: &LeafSlice, resolution: usize) -> Result<IdentityResult> {
    evaluate_leaf_with(scn, id, leaf, resolution, EvalOptions::default())
}

/// Integral of the integrand over one compact leaf of `D⊤`.
pub fn evaluate_leaf_with(
    scn: &Scenario,
    id: &str,
    leaf: &LeafSlice,
    resolution: usize,
    opts: EvalOptions,
) -> Result<IdentityResult> {
    let desc = descriptor(id)?;
    if desc.kind != Kind::LeafwiseIntegral {
        return Err(GeomError::WrongKind {
            id: desc.id.into(),
            kind: desc.kind.to_string(),
        });
    }
    if leaf.which != Which::Top {
        return Err(GeomError::UnsupportedLeaf("leafwise formulas integrate over leaves of D⊤".into()));
    }
    let value = leaf_integrate(scn, &|x| Ok(pointwise_sides(scn, &desc, x, opts)?.1), leaf, resolution)?;
    Ok(IdentityResult::new(
        desc.id,
        Location::Leaf {
            which: leaf.which,
            base: leaf.base.clone(),
            resolution,
        },
        value,
        0.0,
    ))
}

/// Outcome of testing the four sign variants on a set of scenarios.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantResolution {
    /// Max relative residual per variant, in `SignVariant::ALL` order.
    pub residuals: Vec<(SignVariant, f64)>,
    pub passing: Vec<SignVariant>,
    pub tolerance: f64,
}

impl VariantResolution {
    pub fn unique(&self) -> Option<SignVariant> {
        match self.passing.as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }
}

/// Evaluates every variant at every sample of every scenario.
pub fn resolve_sign_variant(cases: &[(Scenario, Vec<Vec<f64>>)], tolerance: f64) -> Result<VariantResolution> {
    let mut residuals = Vec::new();
    for v in SignVariant::ALL {
        let mut worst = 0.0_f64;
        for (scn, pts) in cases {
            for x in pts {
                worst = worst.max(evaluate_pointwise(scn, v.id(), x)?.relative());
            }
        }
        residuals.push((v, worst));
    }
    let passing = residuals.iter().filter(|(_, r)| *r < tolerance).map(|(v, _)| *v).collect();
    Ok(VariantResolution {
        residuals,
        passing,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build_preset, params};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn catalog_is_complete_and_stable() {
        let ids: Vec<&str> = list_identities().iter().map(|d| d.id).collect();
        assert!(ids.len() >= 12);
        assert_eq!(ids[0], "PW");
        assert_eq!(descriptor("PW").unwrap().kind, Kind::Pointwise);
        assert!(descriptor("PW-IF").unwrap().requires.contains(&P::Closed));
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
    }

    #[test]
    fn pw_spot_value_on_warped_torus() {
        let scn = build_preset("warped_torus", &params(&[])).unwrap();
        let r = evaluate_pointwise(&scn, "PW", &[FRAC_PI_2, 0.4]).unwrap();
        assert!((r.lhs - 1.0 / 3.0).abs() < 1e-8, "{r:?}");
        assert!((r.rhs - 1.0 / 3.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn unknown_and_unmet() {
        let scn = build_preset("skew_contorsion_t3", &params(&[])).unwrap();
        assert!(matches!(evaluate_pointwise(&scn, "NOPE", &[0.0; 3]), Err(GeomError::UnknownIdentity(_))));
        match evaluate_pointwise(&scn, "RICHH", &[0.1, 0.2, 0.3]) {
            Err(GeomError::Precondition { predicate, deviation, .. }) => {
                assert_eq!(predicate, "cond4");
                assert!((deviation - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
