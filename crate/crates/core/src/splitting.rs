//! Hypothesis sweep and conclusion check for the splitting and
//! leaf-nonexistence theorems.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::extrinsic::Which;
use crate::invariants::invariants;
use crate::point::PointData;
use crate::predicates::{deviation, global_deviation, Predicate, PREDICATE_TOLERANCE};
use crate::quadrature::{tangent_axes, QuadratureGrid};
use crate::scenario::Scenario;

/// `max(‖h⊤‖,‖h⊥‖,‖T⊤‖,‖T⊥‖)` below this counts as a product.
pub const SPLIT_TOLERANCE: f64 = 1e-7;

/// Conditions that are not catalog predicates.
pub const HARMONIC_TOP: &str = "harmonic-top";
pub const HARMONIC_BOT: &str = "harmonic-bot";
/// `g(H⊤_𝒯, H⊥_𝒯*) + g(H⊥_𝒯, H⊤_𝒯*) = 0`
pub const MEAN_CROSS: &str = "mean-cross";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignCondition {
    NonNegative,
    Positive,
    NonPositive,
    Negative,
}

impl SignCondition {
    fn holds(self, min: f64, max: f64, tol: f64) -> bool {
        match self {
            SignCondition::NonNegative => min >= -tol,
            SignCondition::Positive => min > tol,
            SignCondition::NonPositive => max <= tol,
            SignCondition::Negative => max < -tol,
        }
    }

    fn label(self) -> &'static str {
        match self {
            SignCondition::NonNegative => "S̄_mix ≥ 0",
            SignCondition::Positive => "S̄_mix > 0",
            SignCondition::NonPositive => "S̄_mix ≤ 0",
            SignCondition::Negative => "S̄_mix < 0",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    /// `M` is locally a product.
    Splits,
    /// `D⊤` has no compact leaves.
    NoCompactLeaves,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssumptionStatus {
    ImpliedByClosed,
    Unverified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assumption {
    pub theorem: &'static str,
    pub assumption: &'static str,
    pub status: AssumptionStatus,
}

struct Theorem {
    id: &'static str,
    quote: &'static str,
    requires: &'static [&'static str],
    sign: SignCondition,
    conclusion: Conclusion,
    assumptions: &'static [&'static str],
}

const L1_LEAF: &str = "‖ξ‖ ∈ L¹ on each leaf";
const L1_M: &str = "‖ξ‖ ∈ L¹(M)";
const COMPLETE: &str = "completeness of M or of the leaves";

const THEOREMS: &[Theorem] = &[
    Theorem {
        id: "harmonic-splitting",
        quote: "then $M$ splits",
        requires: &["integrable-top", "integrable-bot", "mixed-ai", "cond4", "cond5"],
        sign: SignCondition::NonNegative,
        conclusion: Conclusion::Splits,
        assumptions: &[L1_LEAF, COMPLETE],
    },
    Theorem {
        id: "no-leaves-positive",
        quote: "has no complete open leaves",
        requires: &["integrable-bot", "mixed-ai", "cond4", "cond5"],
        sign: SignCondition::Positive,
        conclusion: Conclusion::NoCompactLeaves,
        assumptions: &[L1_LEAF, COMPLETE],
    },
    Theorem {
        id: "codim-one-positive",
        quote: "has no compact leaves",
        requires: &["codim-one", "mixed-ai", "cond4", "cond5"],
        sign: SignCondition::Positive,
        conclusion: Conclusion::NoCompactLeaves,
        assumptions: &["R̄ic > 0 is checked on N only (ε_N R̄ic_NN = S̄_mix)"],
    },
    Theorem {
        id: "harmonic-foliations",
        quote: "endowed with complementary orthogonal harmonic foliations",
        requires: &["integrable-top", "integrable-bot", HARMONIC_TOP, HARMONIC_BOT, "cond4", MEAN_CROSS],
        sign: SignCondition::NonNegative,
        conclusion: Conclusion::Splits,
        assumptions: &[L1_M, COMPLETE],
    },
    Theorem {
        id: "no-umbilical-leaves-negative",
        quote: "has no complete open umbilical leaves",
        requires: &["umbilical-top", "mixed-ai", "cond4", "cond5"],
        sign: SignCondition::Negative,
        conclusion: Conclusion::NoCompactLeaves,
        assumptions: &[L1_LEAF, COMPLETE],
    },
    Theorem {
        id: "codim-one-negative",
        quote: "has no compact umbilical leaves",
        requires: &["codim-one", "umbilical-top", "mixed-ai", "cond4", "cond5"],
        sign: SignCondition::Negative,
        conclusion: Conclusion::NoCompactLeaves,
        assumptions: &["R̄ic < 0 is checked on N only (ε_N R̄ic_NN = S̄_mix)"],
    },
    Theorem {
        id: "conformal-submersion",
        quote: "is conformal map",
        requires: &["integrable-top", "umbilical-top", "umbilical-bot", "mixed-ai", "cond4", "cond5"],
        sign: SignCondition::NonPositive,
        conclusion: Conclusion::Splits,
        assumptions: &[L1_LEAF, COMPLETE, "D⊤ is the fibre distribution of a global submersion"],
    },
    Theorem {
        id: "umbilical-splitting",
        quote: "complementary orthogonal umbilical distributions",
        requires: &["umbilical-top", "umbilical-bot", "cond4", "hht"],
        sign: SignCondition::NonPositive,
        conclusion: Conclusion::Splits,
        assumptions: &[L1_M, COMPLETE],
    },
    Theorem {
        id: "twisted-fibres",
        quote: "along the fibres of",
        requires: &["warped", "mixed-ai", "cond4", "cond5"],
        sign: SignCondition::NonPositive,
        conclusion: Conclusion::Splits,
        assumptions: &[L1_LEAF, COMPLETE],
    },
    Theorem {
        id: "twisted-hht",
        quote: "Let $M=B\\times_{(v,u)} F$ be complete open",
        requires: &["warped", "cond4", "cond5", "hht"],
        sign: SignCondition::NonPositive,
        conclusion: Conclusion::Splits,
        assumptions: &[L1_M, COMPLETE],
    },
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub id: &'static str,
    pub quote: &'static str,
    pub sign: SignCondition,
    pub conclusion: Conclusion,
    pub applicable: bool,
    /// Conditions that exceed tolerance, including the curvature sign.
    pub failing: Vec<String>,
    /// Whether the conclusion is observed; `None` when not applicable.
    pub conclusion_holds: Option<bool>,
}

/// Grid maxima of the tensors whose vanishing certifies a product.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConclusionNorms {
    pub h_top: f64,
    pub h_bot: f64,
    pub t_top: f64,
    pub t_bot: f64,
    pub mean_top: f64,
    pub mean_bot: f64,
}

impl ConclusionNorms {
    fn obstructions(&self) -> Vec<String> {
        [("h⊤", self.h_top), ("h⊥", self.h_bot), ("T⊤", self.t_top), ("T⊥", self.t_bot)]
            .iter()
            .filter(|(_, v)| *v >= SPLIT_TOLERANCE)
            .map(|(k, _)| k.to_string())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Splits,
    Obstructed { by: Vec<String> },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Splits => f.write_str("splits"),
            Verdict::Obstructed { by } => write!(f, "obstructed({})", by.join(", ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplittingReport {
    pub nodes: usize,
    pub tolerance: f64,
    /// Max deviation per condition over the grid.
    pub predicates: BTreeMap<String, f64>,
    pub bar_s_mix_min: f64,
    pub bar_s_mix_max: f64,
    pub theorems: Vec<TheoremCheck>,
    pub conclusion: ConclusionNorms,
    pub verdict: Verdict,
    pub unverifiable: Vec<Assumption>,
}

impl SplittingReport {
    pub fn theorem(&self, id: &str) -> Option<&TheoremCheck> {
        self.theorems.iter().find(|t| t.id == id)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

struct NodeSample {
    devs: Vec<f64>,
    bar_s: f64,
    norms: ConclusionNorms,
}

fn condition_names() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = Predicate::ALL.iter().map(|p| p.name()).collect();
    v.extend([HARMONIC_TOP, HARMONIC_BOT, MEAN_CROSS]);
    v
}

fn sample(scn: &Scenario, x: &[f64]) -> Result<NodeSample> {
    let pd = PointData::new(scn, x)?;
    let b = &pd.base;
    let m = &b.means;
    let mut devs: Vec<f64> = Predicate::ALL
        .iter()
        .map(|&p| if p.is_global() { 0.0 } else { deviation(p, scn, &pd) })
        .collect();
    devs.push(norm(&b.mean_top));
    devs.push(norm(&b.mean_bot));
    devs.push((b.g(&m.top, &m.bot_star) + b.g(&m.bot, &m.top_star)).abs());
    Ok(NodeSample {
        devs,
        bar_s: invariants(&pd).bar_s_mix,
        norms: ConclusionNorms {
            h_top: b.h_top.frame_norm(),
            h_bot: b.h_bot.frame_norm(),
            t_top: b.t_top.frame_norm(),
            t_bot: b.t_bot.frame_norm(),
            mean_top: norm(&b.mean_top),
            mean_bot: norm(&b.mean_bot),
        },
    })
}

/// Whether some leaf of `D⊤` through a chart point is a closed coordinate slice.
fn has_compact_coordinate_leaf(scn: &Scenario) -> bool {
    if !scn.closed {
        return false;
    }
    let base: Vec<f64> = scn.chart.ranges.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    match tangent_axes(scn, Which::Top, &base) {
        Ok(axes) => axes.len() == scn.n() && axes.iter().all(|&k| scn.chart.periodic[k]),
        Err(_) => false,
    }
}

/// Evaluates every condition and conclusion norm over the grid nodes.
pub fn check_hypotheses(scn: &Scenario, grid: &QuadratureGrid) -> Result<SplittingReport> {
    if grid.is_empty() {
        return Err(GeomError::EmptySample);
    }
    let names = condition_names();
    let samples: Vec<Result<NodeSample>> = grid.nodes.par_iter().map(|x| sample(scn, x)).collect();
    let mut maxdev = vec![0.0_f64; names.len()];
    let (mut smin, mut smax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut cn = ConclusionNorms::default();
    for (node, s) in samples.into_iter().enumerate() {
        let s = s.map_err(|e| GeomError::AtNode {
            node,
            source: Box::new(e),
        })?;
        for (m, d) in maxdev.iter_mut().zip(&s.devs) {
            *m = m.max(*d);
        }
        smin = smin.min(s.bar_s);
        smax = smax.max(s.bar_s);
        cn.h_top = cn.h_top.max(s.norms.h_top);
        cn.h_bot = cn.h_bot.max(s.norms.h_bot);
        cn.t_top = cn.t_top.max(s.norms.t_top);
        cn.t_bot = cn.t_bot.max(s.norms.t_bot);
        cn.mean_top = cn.mean_top.max(s.norms.mean_top);
        cn.mean_bot = cn.mean_bot.max(s.norms.mean_bot);
    }
    for (i, p) in Predicate::ALL.iter().enumerate() {
        if let Some(d) = global_deviation(*p, scn) {
            maxdev[i] = d;
        }
    }
    let predicates: BTreeMap<String, f64> = names.iter().map(|s| s.to_string()).zip(maxdev).collect();

    let obstructions = cn.obstructions();
    let verdict = if obstructions.is_empty() {
        Verdict::Splits
    } else {
        Verdict::Obstructed { by: obstructions }
    };
    let compact_leaf = has_compact_coordinate_leaf(scn);
    let mut unverifiable = Vec::new();
    let theorems = THEOREMS
        .iter()
        .map(|t| {
            let mut failing: Vec<String> = t
                .requires
                .iter()
                .filter(|r| predicates[**r] > PREDICATE_TOLERANCE)
                .map(|r| r.to_string())
                .collect();
            if !t.sign.holds(smin, smax, PREDICATE_TOLERANCE) {
                failing.push(t.sign.label().into());
            }
            let applicable = failing.is_empty();
            for a in t.assumptions {
                let status = if scn.closed && (*a == L1_LEAF || *a == L1_M || *a == COMPLETE) {
                    AssumptionStatus::ImpliedByClosed
                } else {
                    AssumptionStatus::Unverified
                };
                unverifiable.push(Assumption {
                    theorem: t.id,
                    assumption: a,
                    status,
                });
            }
            let conclusion_holds = applicable.then(|| match t.conclusion {
                Conclusion::Splits => verdict == Verdict::Splits,
                Conclusion::NoCompactLeaves => !compact_leaf,
            });
            TheoremCheck {
                id: t.id,
                quote: t.quote,
                sign: t.sign,
                conclusion: t.conclusion,
                applicable,
                failing,
                conclusion_holds,
            }
        })
        .collect();
    Ok(SplittingReport {
        nodes: grid.len(),
        tolerance: PREDICATE_TOLERANCE,
        predicates,
        bar_s_mix_min: smin,
        bar_s_mix_max: smax,
        theorems,
        conclusion: cn,
        verdict,
        unverifiable,
    })
}

pub fn verify_splitting(scn: &Scenario, grid: &QuadratureGrid) -> Result<Verdict> {
    Ok(check_hypotheses(scn, grid)?.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_grid;
    use crate::zoo::{build_preset, params};

    fn report(name: &str, ps: &[(&str, f64)]) -> SplittingReport {
        let scn = build_preset(name, &params(ps)).unwrap();
        check_hypotheses(&scn, &build_grid(&scn.chart, 6).unwrap()).unwrap()
    }

    #[test]
    fn flat_torus_splits_and_every_splitting_theorem_applies() {
        let r = report("flat_torus", &[]);
        assert_eq!(r.verdict, Verdict::Splits);
        assert_eq!(r.bar_s_mix_min, 0.0);
        for id in ["harmonic-splitting", "harmonic-foliations", "umbilical-splitting"] {
            let t = r.theorem(id).unwrap();
            assert!(t.applicable, "{t:?}");
            assert_eq!(t.conclusion_holds, Some(true));
        }
    }

    #[test]
    fn warped_torus_is_obstructed_by_h_bot() {
        let r = report("warped_torus", &[]);
        assert_eq!(r.verdict, Verdict::Obstructed { by: vec!["h⊥".into()] });
        assert!(r.predicates["mixed-ai"] < 1e-12);
        assert!(r.bar_s_mix_min < 0.0 && r.bar_s_mix_max > 0.0);
    }

    #[test]
    fn skew_fails_cond4_by_c() {
        let r = report("skew_contorsion_t3", &[("c", 0.5)]);
        assert!((r.predicates["cond4"] - 0.5).abs() < 1e-12);
        assert!(r.theorem("harmonic-splitting").unwrap().failing.contains(&"cond4".to_string()));
    }
}
