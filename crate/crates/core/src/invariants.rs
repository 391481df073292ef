//! Curvature invariants of the pair `(D⊤, D⊥)`: mixed scalar curvature for
//! `∇` and `∇̄`, tensor norms, restricted inner products, and the two Ricci
//! contractions with their correction terms `Q`, `Q₁`, `Q₂`.

use serde::Serialize;

use crate::chart::RiemannValue;
use crate::contorsion::{bar_riemann_direct, hat, star};
use crate::error::{GeomError, Result};
use crate::point::{Derived, Field, Frame4, FrameTensor, PointData, TensorId};

/// Frame components `[A][B][C][D] = g(R_{e_A,e_B} e_C, e_D)`.
pub fn frame_curvature(rv: &RiemannValue, b: &Derived<f64>) -> Frame4 {
    let d = b.d;
    let fr = &b.local.frame;
    let mut out = Frame4::zeros(d);
    for a in 0..d {
        for bb in 0..d {
            for c in 0..d {
                let r = rv.apply(&fr[a], &fr[bb], &fr[c]);
                for e in 0..d {
                    out.set(a, bb, c, e, b.local.g.form(&r, &fr[e]));
                }
            }
        }
    }
    out
}

/// `Σ_{a,i} ε_a ε_i g(R_{E_a,ℰ_i} E_a, ℰ_i)`.
pub fn s_mix(rf: &Frame4, eps: &[f64], n: usize) -> f64 {
    let d = rf.d;
    let mut s = 0.0;
    for a in 0..n {
        for i in n..d {
            s += eps[a] * eps[i] * rf.get(a, i, a, i);
        }
    }
    s
}

/// `½ Σ_{a,i} ε_a ε_i (g(R̄_{a,i} E_a, ℰ_i) + g(R̄_{i,a} ℰ_i, E_a))`.
pub fn bar_s_mix_of(rf: &Frame4, eps: &[f64], n: usize) -> f64 {
    let d = rf.d;
    let mut s = 0.0;
    for a in 0..n {
        for i in n..d {
            s += 0.5 * eps[a] * eps[i] * (rf.get(a, i, a, i) + rf.get(i, a, i, a));
        }
    }
    s
}

/// `S̄_mix − S_mix` assembled from `∇𝒯` and commutators of `𝒯`, split into
/// the part linear in `𝒯` and the quadratic part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixedDelta {
    pub derivative: f64,
    pub commutator: f64,
}

impl MixedDelta {
    pub fn total(&self) -> f64 {
        self.derivative + self.commutator
    }
}

pub fn mixed_delta(pd: &PointData) -> MixedDelta {
    let b = &pd.base;
    let (d, n, eps) = (b.d, b.n, &b.eps);
    let nt = pd.frame_nabla(&pd.nabla_contorsion());
    let t = &b.tau;
    // g(𝒯_X 𝒯_Y e_B, e_C)
    let tt = |x: usize, y: usize, bb: usize, c: usize| -> f64 {
        let mut s = 0.0;
        for k in 0..d {
            s += eps[k] * t.get(y, bb, k) * t.get(x, k, c);
        }
        s
    };
    let (mut der, mut com) = (0.0, 0.0);
    for a in 0..n {
        for i in n..d {
            let w = 0.5 * eps[a] * eps[i];
            der += w
                * (nt.get(i, a, a, i) - nt.get(a, i, a, i) + nt.get(a, i, i, a) - nt.get(i, a, i, a));
            com += w * (tt(i, a, a, i) - tt(a, i, a, i) + tt(a, i, i, a) - tt(i, a, i, a));
        }
    }
    MixedDelta {
        derivative: der,
        commutator: com,
    }
}

/// Which ordered argument pairs an inner product of (1,2)-tensors sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Restriction {
    Full,
    /// one argument in each distribution
    Mixed,
    Top,
    Bot,
}

pub fn restricted_inner(
    f: &FrameTensor<f64>,
    g: &FrameTensor<f64>,
    eps: &[f64],
    n: usize,
    which: Restriction,
) -> Result<f64> {
    if f.d != g.d || f.d != eps.len() {
        return Err(GeomError::RankMismatch(format!(
            "tensors of dimension {} and {} with {} signs",
            f.d,
            g.d,
            eps.len()
        )));
    }
    Ok(match which {
        Restriction::Full => f.inner(g, eps),
        Restriction::Mixed => f.inner_mixed(g, eps, n),
        Restriction::Top => f.inner_where(g, eps, |a, b| a < n && b < n),
        Restriction::Bot => f.inner_where(g, eps, |a, b| a >= n && b >= n),
    })
}

/// Pointwise invariants used across the catalog.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantSet {
    pub s_mix: f64,
    pub bar_s_mix: f64,
    /// `S_mix + (S̄_mix − S_mix)` via the contorsion expansion
    pub bar_s_mix_expanded: f64,
    pub h_top_sq: f64,
    pub h_bot_sq: f64,
    pub t_top_sq: f64,
    pub t_bot_sq: f64,
    pub mean_top_sq: f64,
    pub mean_bot_sq: f64,
}

pub fn invariants(pd: &PointData) -> InvariantSet {
    let b = &pd.base;
    let (n, eps) = (b.n, &b.eps);
    let rf = frame_curvature(&pd.riemann(), b);
    let rbf = frame_curvature(&bar_riemann_direct(pd), b);
    let s = s_mix(&rf, eps, n);
    InvariantSet {
        s_mix: s,
        bar_s_mix: bar_s_mix_of(&rbf, eps, n),
        bar_s_mix_expanded: s + mixed_delta(pd).total(),
        h_top_sq: b.h_top.inner(&b.h_top, eps),
        h_bot_sq: b.h_bot.inner(&b.h_bot, eps),
        t_top_sq: b.t_top.inner(&b.t_top, eps),
        t_bot_sq: b.t_bot.inner(&b.t_bot, eps),
        mean_top_sq: b.g(&b.mean_top, &b.mean_top),
        mean_bot_sq: b.g(&b.mean_bot, &b.mean_bot),
    }
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn scale(x: &[f64], s: f64) -> Vec<f64> {
    x.iter().map(|a| a * s).collect()
}

/// Ricci-type trace `Σ_{A in block} ε_A g(R_{X,e_A} Y, e_A)`.
fn ricci_trace(rf: &Frame4, eps: &[f64], x: &[f64], y: &[f64], block: impl Fn(usize) -> bool) -> f64 {
    let d = rf.d;
    let mut s = 0.0;
    for a in (0..d).filter(|&a| block(a)) {
        let mut e = vec![0.0; d];
        e[a] = eps[a];
        let r = rf.apply(x, &e, y, eps);
        s += eps[a] * r[a];
    }
    s
}

/// `Ric(X, Y) = Σ_A ε_A g(R_{X,e_A} Y, e_A)`.
pub fn ricci(rf: &Frame4, eps: &[f64], x: &[f64], y: &[f64]) -> f64 {
    ricci_trace(rf, eps, x, y, |_| true)
}

/// Codimension-one Ricci data along the unit normal `N = e_d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciN {
    pub bar_ric_nn: f64,
    pub ric_nn: f64,
    /// `Σ_{a<b} k_a k_b` over the principal curvatures of `A⊤_N`
    pub sigma2: f64,
    /// `(Tr A⊤_N)²`
    pub tr_a_sq: f64,
    /// `Tr((A⊤_N)²)`
    pub tr_a2: f64,
    pub q: f64,
}

/// `R̄ic_{N,N}`, `Ric_{N,N}`, `σ₂` and `Q` along the unit normal.
///
/// The resolved `Q` flips the sign of the first term and adds
/// `g((𝒯̂)*_N N, (𝒯_N N)⊤)`, which makes
/// `div((𝒯_N N)⊤ − (H⊤_𝒯*)⊥) = R̄ic_{N,N} − Ric_{N,N} + Q` hold.
pub fn bar_ricci_nn(pd: &PointData, reading: Reading) -> Result<RicciN> {
    let b = &pd.base;
    let (d, n, eps) = (b.d, b.n, &b.eps);
    if d - n != 1 {
        return Err(GeomError::NotCodimensionOne(d - n));
    }
    let nn = d - 1;
    if eps[nn] != 1.0 {
        return Err(GeomError::NotCodimensionOne(1));
    }
    let rf = frame_curvature(&pd.riemann(), b);
    let rbf = frame_curvature(&bar_riemann_direct(pd), b);
    let nv = b.unit(nn);
    let top = |a: usize| a < n;
    let bar_ric_nn = ricci_trace(&rbf, eps, &nv, &nv, top);
    let ric_nn = ricci_trace(&rf, eps, &nv, &nv, top);

    // A⊤_N as a matrix on D⊤: m[a][b] = g(A⊤_N E_a, E_b)
    let m = |a: usize, bb: usize| b.a_top.get(nn, a, bb);
    let mut tr = 0.0;
    let mut tr2 = 0.0;
    for a in 0..n {
        tr += eps[a] * m(a, a);
        for bb in 0..n {
            tr2 += eps[a] * eps[bb] * m(a, bb) * m(bb, a);
        }
    }
    let sigma2 = 0.5 * (tr * tr - tr2);

    let tau = &b.tau;
    let ts = star(tau);
    let tsh = star(&hat(tau));
    let th = hat(tau);
    let m_ = &b.means;
    let tnn = b.t_apply(&nv, &nv);
    let tr_n = scale(&nv, tr);
    // ⟨B_N, C_N⟩|D⊤ for operators given by frame tensors, slot N first
    let op_inner = |f: &dyn Fn(usize, usize) -> f64, g: &dyn Fn(usize, usize) -> f64| -> f64 {
        let mut s = 0.0;
        for a in 0..n {
            for bb in 0..n {
                s += eps[a] * eps[bb] * f(a, bb) * g(a, bb);
            }
        }
        s
    };
    let first = b.g(&add(&m_.top_star, &tnn), &sub(&b.mean_bot, &tr_n));
    let tsh_nn = tsh.apply(&nv, &nv, eps);
    let (s_first, extra) = match reading {
        Reading::Literal => (1.0, 0.0),
        Reading::Resolved => (-1.0, b.g(&tsh_nn, &b.top(&tnn))),
    };
    let q = s_first * first + extra
        - op_inner(
            &|a, bb| tsh.get(nn, a, bb) + ts.get(nn, a, bb),
            &|a, bb| b.a_top.get(nn, a, bb) + b.ts_top.get(nn, a, bb),
        )
        + b.g(&add(&tsh_nn, &tnn), &b.mean_bot)
        - b.g(&m_.top_star, &tnn)
        + op_inner(&|a, bb| th.get(nn, a, bb), &|a, bb| ts.get(nn, a, bb));
    Ok(RicciN {
        bar_ric_nn,
        ric_nn,
        sigma2,
        tr_a_sq: tr * tr,
        tr_a2: tr2,
        q,
    })
}

/// How to read a correction term whose printed form does not satisfy its
/// identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    /// Every term exactly as printed.
    Literal,
    /// Signs, slots and coefficients as re-derived; see the README.
    #[default]
    Resolved,
}

/// The twelve terms of `Q₁` in printed order, each with its coefficient.
///
/// The resolved reading traces `∇T⊤` over `D⊤` (and `∇T⊥` over `D⊥`),
/// swaps the shape-operator slots in the two cubic terms to
/// `−g(A⊤_{H⊤}H⊥, H⊥) − g(A⊥_{H⊥}H⊤, H⊤)`, and takes the last two pairs with
/// coefficients `1` and `−2`. With it, `div Z₁ = −Ric_{H⊤,H⊥} + Q₁`.
pub fn q1_terms(pd: &PointData, reading: Reading) -> [f64; 12] {
    let b = &pd.base;
    let (d, n, eps) = (b.d, b.n, &b.eps);
    let ht = &b.mean_top;
    let hb = &b.mean_bot;
    let nab_top: Vec<Vec<f64>> = (0..d).map(|a| pd.nabla_cov(Field::MeanTop, &b.unit(a))).collect();
    let nab_bot: Vec<Vec<f64>> = (0..d).map(|a| pd.nabla_cov(Field::MeanBot, &b.unit(a))).collect();
    // ∇_V H for covariant V
    let along = |tab: &[Vec<f64>], v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; d];
        for a in 0..d {
            let w = eps[a] * v[a];
            for c in 0..d {
                out[c] += w * tab[a][c];
            }
        }
        out
    };
    // g(∇_V e_A, W)
    let nabla_frame = |v: &[f64], a: usize, w: &[f64]| -> f64 {
        let mut s = 0.0;
        for bb in 0..d {
            for c in 0..d {
                s += eps[bb] * v[bb] * b.omega.get(bb, a, c) * eps[c] * w[c];
            }
        }
        s
    };
    let top_block = |a: usize| a < n;
    let ntt = pd.frame_nabla(&pd.nabla_tensor(TensorId::TTop));
    let ntb = pd.frame_nabla(&pd.nabla_tensor(TensorId::TBot));
    let trace_nt = |nt: &Frame4, y: &[f64], z: &[f64], top: bool| -> f64 {
        let mut s = 0.0;
        for a in (0..d).filter(|&a| top_block(a) == top) {
            let e = b.unit(a);
            s += eps[a] * b.g(&nt.apply(&e, &e, y, eps), z);
        }
        s
    };
    let (t3, t4) = match reading {
        Reading::Literal => (trace_nt(&ntt, hb, ht, false), trace_nt(&ntb, ht, hb, true)),
        Reading::Resolved => (trace_nt(&ntt, hb, ht, true), trace_nt(&ntb, ht, hb, false)),
    };
    let (c_shape, c_twist) = match reading {
        Reading::Literal => (2.0, 2.0),
        Reading::Resolved => (1.0, -2.0),
    };
    let mut t5 = 0.0;
    let mut t6 = 0.0;
    let mut t9 = 0.0;
    let mut t10 = 0.0;
    let mut t11 = 0.0;
    let mut t12 = 0.0;
    for a in 0..d {
        let e = b.unit(a);
        if a < n {
            t5 += eps[a] * b.g(&b.a_top.apply(ht, &e, eps), &nab_bot[a]);
            let z = b.bot(&nab_top[a]);
            t9 += c_shape * eps[a] * b.g(&b.a_top.apply(&z, hb, eps), &e);
            let v = b.t_top.apply(hb, &e, eps);
            t10 += c_twist * eps[a] * nabla_frame(&v, a, ht);
        } else {
            t6 += eps[a] * b.g(&b.a_bot.apply(hb, &e, eps), &nab_top[a]);
            let z = b.top(&nab_bot[a]);
            t11 += c_shape * eps[a] * b.g(&b.a_bot.apply(&z, ht, eps), &e);
            let v = b.t_bot.apply(ht, &e, eps);
            t12 += c_twist * eps[a] * nabla_frame(&v, a, hb);
        }
    }
    let (t7, t8) = match reading {
        Reading::Literal => (
            -b.g(&b.a_top.apply(hb, ht, eps), ht),
            -b.g(&b.a_bot.apply(ht, hb, eps), hb),
        ),
        Reading::Resolved => (
            -b.g(&b.a_top.apply(ht, hb, eps), hb),
            -b.g(&b.a_bot.apply(hb, ht, eps), ht),
        ),
    };
    [
        b.g(ht, &along(&nab_top, hb)),
        b.g(hb, &along(&nab_bot, ht)),
        t3,
        t4,
        t5,
        t6,
        t7,
        t8,
        t9,
        t10,
        t11,
        t12,
    ]
}

/// Curvature-side data for the `(H⊤, H⊥)` Ricci contraction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciHH {
    /// symmetrized `R̄ic_{H⊤,H⊥}`
    pub bar_ric: f64,
    pub ric: f64,
    pub q1: f64,
    pub q2: f64,
}

/// Context shared by the two orderings in `Q₂`.
struct Q2Ctx<'a> {
    b: &'a Derived<f64>,
    nt: Frame4,
    nab_top: Vec<Vec<f64>>,
    nab_bot: Vec<Vec<f64>>,
    sign: f64,
}

impl Q2Ctx<'_> {
    /// `∇_V Y` where `Y` is `H⊤` (`top`) or `H⊥`.
    fn nab(&self, top: bool, v: &[f64]) -> Vec<f64> {
        let b = self.b;
        let tab = if top { &self.nab_top } else { &self.nab_bot };
        let mut out = vec![0.0; b.d];
        for a in 0..b.d {
            let w = b.eps[a] * v[a];
            for c in 0..b.d {
                out[c] += w * tab[a][c];
            }
        }
        out
    }

    /// One half of the displayed expression: the first-slot vector `x` is
    /// differentiated along, `y` is the argument; `x_top`/`y_top` say which
    /// mean-curvature vector each is. The sum runs over the block `block_top`.
    fn sum(&self, x_top: bool, y_top: bool, block_top: bool) -> f64 {
        let b = self.b;
        let (d, n, eps) = (b.d, b.n, &b.eps);
        let vec_of = |top: bool| if top { &b.mean_top } else { &b.mean_bot };
        let (x, y) = (vec_of(x_top), vec_of(y_top));
        let nab_x_y = self.nab(y_top, x);
        let mut s = 0.0;
        for a in (0..d).filter(|&a| (a < n) == block_top) {
            let e = b.unit(a);
            // ∇_X(𝒯_a Y) − 𝒯_{(h+T)(X,e_a)} Y read tensorially
            let mut v = self.nt.apply(x, &e, y, eps);
            v = add(&v, &b.t_apply(&e, &nab_x_y));
            // ⊥/⊤ part of ∇_X e_a not covered by (h + T)(X, e_a)
            let mut w = vec![0.0; d];
            for bb in (0..d).filter(|&bb| (bb < n) != block_top) {
                for c in (0..d).filter(|&c| (c < n) != block_top) {
                    w[c] += eps[bb] * x[bb] * b.omega.get(bb, a, c);
                }
            }
            v = add(&v, &b.t_apply(&w, y));
            let nab_a_x = self.nab(x_top, &e);
            v = add(&v, &scale(&b.t_apply(&nab_a_x, y), self.sign));
            let bar_a_y = add(&self.nab(y_top, &e), &b.t_apply(&e, y));
            v = add(&v, &b.t_apply(x, &bar_a_y));
            s += eps[a] * b.g(&v, &e);
        }
        s
    }

    /// The displayed expression with `(H⊤, H⊥)` in the given roles.
    fn expr(&self, swap: bool) -> f64 {
        let b = self.b;
        let m = &b.means;
        // p plays H⊤, q plays H⊥
        let (p_top, q_top) = if swap { (false, true) } else { (true, false) };
        let vec_of = |top: bool| if top { &b.mean_top } else { &b.mean_bot };
        let (p, q) = (vec_of(p_top), vec_of(q_top));
        let bar = |x: &[f64], y_top: bool| {
            let y = vec_of(y_top);
            add(&self.nab(y_top, x), &b.t_apply(x, y))
        };
        b.g(&bar(q, p_top), &m.top_star) + b.g(&bar(p, q_top), &m.bot_star)
            - b.g(&b.t_apply(q, p), q)
            - b.g(&b.t_apply(p, q), p)
            - self.sum(q_top, p_top, true)
            - self.sum(p_top, q_top, false)
    }
}

pub fn q2(pd: &PointData, reading: Reading) -> f64 {
    let b = &pd.base;
    let d = b.d;
    let ctx = Q2Ctx {
        b,
        nt: pd.frame_nabla(&pd.nabla_contorsion()),
        nab_top: (0..d).map(|a| pd.nabla_cov(Field::MeanTop, &b.unit(a))).collect(),
        nab_bot: (0..d).map(|a| pd.nabla_cov(Field::MeanBot, &b.unit(a))).collect(),
        sign: match reading {
            Reading::Literal => -1.0,
            Reading::Resolved => 1.0,
        },
    };
    0.5 * (ctx.expr(false) + ctx.expr(true))
}

/// Symmetrized `R̄ic_{H⊤,H⊥}` and `Ric_{H⊤,H⊥}`.
pub fn ricci_hh_curvature(pd: &PointData) -> (f64, f64) {
    let b = &pd.base;
    let (n, eps) = (b.n, &b.eps);
    let rf = frame_curvature(&pd.riemann(), b);
    let rbf = frame_curvature(&bar_riemann_direct(pd), b);
    let (ht, hb) = (&b.mean_top, &b.mean_bot);
    let top = |a: usize| a < n;
    let bot = |a: usize| a >= n;
    let ordered = |p: &[f64], q: &[f64]| {
        ricci_trace(&rbf, eps, q, p, top) + ricci_trace(&rbf, eps, p, q, bot)
    };
    let bar = 0.5 * (ordered(ht, hb) + ordered(hb, ht));
    (bar, ricci(&rf, eps, ht, hb))
}

pub fn bar_ricci_hh(pd: &PointData, q1r: Reading, q2r: Reading) -> RicciHH {
    let (bar_ric, ric) = ricci_hh_curvature(pd);
    RicciHH {
        bar_ric,
        ric,
        q1: q1_terms(pd, q1r).iter().sum(),
        q2: q2(pd, q2r),
    }
}
