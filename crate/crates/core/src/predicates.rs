//! Machine-checkable hypotheses used by identities and splitting theorems.
//! Each predicate reports a nonnegative deviation at a point; it holds when
//! the deviation is at most [`PREDICATE_TOLERANCE`].

use std::fmt;

use serde::Serialize;

use crate::contorsion::{hat, star};
use crate::extrinsic::{mean_gradient_at, umbilical_norm};
use crate::point::{Field, PointData};
use crate::scenario::Scenario;

pub const PREDICATE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    /// Closed manifold (periodic chart or certified by the preset).
    Closed,
    /// `𝒯* = 𝒯 = 𝒯̂`
    Statistical,
    /// `𝒯* = −𝒯`
    MetricCompatible,
    /// `p = 1` with spacelike normal
    CodimOne,
    /// `2H⊤ = (H⊤_𝒯* − H⊤_𝒯)⊥` together with its first derivatives
    MixedAi,
    /// `𝒯` has no components mixing the two distributions
    Cond4,
    /// `g(H⊤_𝒯 − H⊤_𝒯*, H⊥) = 0`
    Cond5,
    /// all four contorsion mean vectors vanish
    Hht,
    IntegrableTop,
    IntegrableBot,
    UmbilicalTop,
    UmbilicalBot,
    CmcTop,
    CmcBot,
    /// Doubly-twisted product with known warping functions.
    Warped,
}

impl Predicate {
    pub const ALL: [Predicate; 15] = [
        Predicate::Closed,
        Predicate::Statistical,
        Predicate::MetricCompatible,
        Predicate::CodimOne,
        Predicate::MixedAi,
        Predicate::Cond4,
        Predicate::Cond5,
        Predicate::Hht,
        Predicate::IntegrableTop,
        Predicate::IntegrableBot,
        Predicate::UmbilicalTop,
        Predicate::UmbilicalBot,
        Predicate::CmcTop,
        Predicate::CmcBot,
        Predicate::Warped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Closed => "closed",
            Predicate::Statistical => "statistical",
            Predicate::MetricCompatible => "metric-compatible",
            Predicate::CodimOne => "codim-one",
            Predicate::MixedAi => "mixed-ai",
            Predicate::Cond4 => "cond4",
            Predicate::Cond5 => "cond5",
            Predicate::Hht => "hht",
            Predicate::IntegrableTop => "integrable-top",
            Predicate::IntegrableBot => "integrable-bot",
            Predicate::UmbilicalTop => "umbilical-top",
            Predicate::UmbilicalBot => "umbilical-bot",
            Predicate::CmcTop => "cmc-top",
            Predicate::CmcBot => "cmc-bot",
            Predicate::Warped => "warped",
        }
    }

    /// Whether the predicate depends only on the scenario, not the point.
    pub fn is_global(self) -> bool {
        matches!(self, Predicate::Closed | Predicate::Warped)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Deviation of a predicate that does not need point data.
pub fn global_deviation(pred: Predicate, scn: &Scenario) -> Option<f64> {
    match pred {
        Predicate::Closed => Some(flag(scn.closed)),
        Predicate::Warped => Some(flag(scn.warping.is_some())),
        _ => None,
    }
}

/// Largest contorsion component whose indices are not all in one block.
pub fn cond4_deviation(pd: &PointData) -> f64 {
    let b = &pd.base;
    let tau = &b.tau;
    let mut m = 0.0_f64;
    for a in 0..b.d {
        for bb in 0..b.d {
            for c in 0..b.d {
                let tops = [a, bb, c].iter().filter(|&&k| k < b.n).count();
                if tops != 0 && tops != 3 {
                    m = m.max(tau.get(a, bb, c).abs());
                }
            }
        }
    }
    m
}

/// `2H⊤ − (H⊤_𝒯* − H⊤_𝒯)⊥` and its coordinate derivatives, as one norm.
pub fn mixed_ai_deviation(pd: &PointData) -> f64 {
    let (v, dv) = pd.field_jet(Field::LeafXiBot);
    let mut m = 2.0 * norm(&v);
    for row in &dv {
        m = m.max(2.0 * norm(row));
    }
    m
}

pub fn deviation(pred: Predicate, scn: &Scenario, pd: &PointData) -> f64 {
    if let Some(d) = global_deviation(pred, scn) {
        return d;
    }
    let b = &pd.base;
    let (n, eps) = (b.n, &b.eps);
    let tau = &b.tau;
    let m = &b.means;
    match pred {
        Predicate::Statistical => {
            let s = star(tau).combine(tau, 1.0, -1.0).frame_norm();
            s.max(hat(tau).combine(tau, 1.0, -1.0).frame_norm())
        }
        Predicate::MetricCompatible => star(tau).combine(tau, 1.0, 1.0).frame_norm(),
        Predicate::CodimOne => flag(b.d - n == 1 && eps[b.d - 1] == 1.0),
        Predicate::MixedAi => mixed_ai_deviation(pd),
        Predicate::Cond4 => cond4_deviation(pd),
        Predicate::Cond5 => {
            let diff: Vec<f64> = m.top.iter().zip(&m.top_star).map(|(x, y)| x - y).collect();
            b.g(&diff, &b.mean_bot).abs()
        }
        Predicate::Hht => norm(&m.top).max(norm(&m.bot)).max(norm(&m.top_star)).max(norm(&m.bot_star)),
        Predicate::IntegrableTop => b.t_top.frame_norm(),
        Predicate::IntegrableBot => b.t_bot.frame_norm(),
        Predicate::UmbilicalTop => {
            let blk: Vec<usize> = (0..n).collect();
            umbilical_norm(&b.h_top, &b.mean_top, eps, &blk)
        }
        Predicate::UmbilicalBot => {
            let blk: Vec<usize> = (n..b.d).collect();
            umbilical_norm(&b.h_bot, &b.mean_bot, eps, &blk)
        }
        Predicate::CmcTop => mean_gradient_at(pd).norms().0,
        Predicate::CmcBot => mean_gradient_at(pd).norms().1,
        Predicate::Closed | Predicate::Warped => unreachable!("global predicates handled above"),
    }
}

pub fn holds(pred: Predicate, scn: &Scenario, pd: &PointData) -> bool {
    deviation(pred, scn, pd) <= PREDICATE_TOLERANCE
}
