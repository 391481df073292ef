//! Run reports for the command line and the FFI.
//!
//! A report is a pure function of the scenario and the run configuration:
//! nodes are evaluated in parallel but every reduction runs in node order,
//! and wall-clock time is kept out of the document.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{
    descriptor, list_identities, sides_at, EvalOptions, IdentityDescriptor, Kind, SignVariant, RESOLVED_VARIANT,
};
use crate::error::{GeomError, Result};
use crate::invariants::Reading;
use crate::point::PointData;
use crate::quadrature::{build_grid, leaf_integrate, pairwise_sum, volume_element, GridKind, LeafSlice, QuadratureGrid};
use crate::scenario::Scenario;
use crate::splitting::{check_hypotheses, SplittingReport};

pub const DEFAULT_GRID: usize = 32;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// `None` runs every identity.
    pub identity: Option<String>,
    pub grid: usize,
    pub tol: f64,
    pub reading: Reading,
    pub splitting: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            identity: None,
            grid: DEFAULT_GRID,
            tol: DEFAULT_TOL,
            reading: Reading::Resolved,
            splitting: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    /// A sign variant other than the resolved one that does not hold here.
    Rejected,
    Error,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::NotApplicable => "n/a",
            Status::Rejected => "reject",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityRecord {
    pub id: String,
    pub kind: Kind,
    pub status: Status,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_relative_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub descriptor_hash: String,
    pub dim: usize,
    pub n: usize,
    pub p: usize,
    pub closed: bool,
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub grid: usize,
    pub grid_kind: GridKind,
    pub tol: f64,
    pub reading: Reading,
    pub resolved_sign_variant: SignVariant,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioInfo,
    pub identities: Vec<IdentityRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splitting: Option<SplittingReport>,
    pub meta: Meta,
}

impl IdentityRecord {
    pub fn status_ok(&self) -> bool {
        matches!(self.status, Status::Pass | Status::NotApplicable | Status::Rejected)
    }
}

impl RunReport {
    /// No identity failed or errored.
    pub fn passed(&self) -> bool {
        self.identities.iter().all(IdentityRecord::status_ok)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fixed-width summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<14} {:<18} {:<6} {:>12}  note", "identity", "kind", "status", "residual");
        for r in &self.identities {
            let res = match (r.integral_value, r.max_relative_residual) {
                (Some(i), Some(p)) => format!("{:.2e}", i.abs().max(p)),
                (None, Some(p)) => format!("{p:.2e}"),
                (Some(i), None) => format!("{:.2e}", i.abs()),
                (None, None) => "-".into(),
            };
            let note = match (&r.reason, &r.worst_point) {
                (Some(why), _) => why.clone(),
                (None, Some(x)) if r.status == Status::Fail => format!("worst at {x:?}"),
                _ => String::new(),
            };
            let _ = writeln!(
                out,
                "{:<14} {:<18} {:<6} {:>12}  {}",
                r.id,
                r.kind.to_string(),
                r.status.label(),
                res,
                note
            );
        }
        if let Some(s) = &self.splitting {
            let _ = writeln!(out, "splitting: {}", s.verdict);
        }
        out
    }
}

/// Whether an error means "hypotheses not met" rather than a broken run.
fn is_inapplicable(e: &GeomError) -> bool {
    match e {
        GeomError::Precondition { .. } | GeomError::NotClosed | GeomError::UnsupportedLeaf(_) => true,
        GeomError::AtNode { source, .. } => is_inapplicable(source),
        _ => false,
    }
}

fn record(desc: &IdentityDescriptor, nodes: usize, status: Status) -> IdentityRecord {
    IdentityRecord {
        id: desc.id.into(),
        kind: desc.kind,
        status,
        nodes,
        max_relative_residual: None,
        worst_point: None,
        integral_value: None,
        reason: None,
    }
}

fn failed(desc: &IdentityDescriptor, nodes: usize, e: &GeomError) -> IdentityRecord {
    let status = if is_inapplicable(e) {
        Status::NotApplicable
    } else {
        Status::Error
    };
    IdentityRecord {
        reason: Some(e.to_string()),
        ..record(desc, nodes, status)
    }
}

type NodeSides = std::result::Result<Vec<Result<(f64, f64)>>, GeomError>;

/// Evaluates the selected identities on one grid and collects the records.
fn evaluate_all(scn: &Scenario, descs: &[IdentityDescriptor], grid: &QuadratureGrid, cfg: &RunConfig) -> Vec<IdentityRecord> {
    let opts = EvalOptions { reading: cfg.reading };
    let per_node: Vec<NodeSides> = grid
        .nodes
        .par_iter()
        .map(|x| {
            let pd = PointData::new(scn, x)?;
            Ok(descs.iter().map(|d| sides_at(scn, d, &pd, opts)).collect())
        })
        .collect();
    let vol: Vec<f64> = grid.nodes.iter().map(|x| volume_element(scn, x)).collect();

    descs
        .iter()
        .enumerate()
        .map(|(k, desc)| {
            let mut worst = (0.0_f64, 0usize);
            let mut rhs = Vec::with_capacity(grid.len());
            for (node, entry) in per_node.iter().enumerate() {
                let sides = match entry {
                    Ok(v) => v[k].as_ref().map_err(Clone::clone),
                    Err(e) => Err(e.clone()),
                };
                let (l, r) = match sides {
                    Ok(s) => *s,
                    Err(e) => {
                        let e = GeomError::AtNode {
                            node,
                            source: Box::new(e),
                        };
                        return failed(desc, grid.len(), &e);
                    }
                };
                let rel = (l - r).abs() / l.abs().max(r.abs()).max(1.0);
                if rel > worst.0 || !rel.is_finite() {
                    worst = (rel, node);
                }
                rhs.push(r);
            }
            let mut rec = record(desc, grid.len(), Status::Pass);
            rec.max_relative_residual = Some(worst.0);
            rec.worst_point = Some(grid.nodes[worst.1].clone());
            let mut ok = worst.0 <= cfg.tol;
            match desc.kind {
                Kind::Pointwise => {}
                Kind::Integral => {
                    if !scn.closed {
                        return failed(desc, grid.len(), &GeomError::NotClosed);
                    }
                    let terms: Vec<f64> = (0..grid.len()).map(|i| grid.weights[i] * rhs[i] * vol[i]).collect();
                    let value = pairwise_sum(&terms);
                    ok &= value.abs() <= cfg.tol;
                    rec.integral_value = Some(value);
                }
                Kind::LeafwiseIntegral => {
                    let base: Vec<f64> = scn.chart.ranges.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
                    let leaf = LeafSlice::top(base);
                    let f = |x: &[f64]| -> Result<f64> { Ok(sides_at(scn, desc, &PointData::new(scn, x)?, opts)?.1) };
                    match leaf_integrate(scn, &f, &leaf, cfg.grid) {
                        Ok(value) => {
                            ok &= value.abs() <= cfg.tol;
                            rec.integral_value = Some(value);
                        }
                        Err(e) => return failed(desc, grid.len(), &e),
                    }
                }
            }
            if !ok {
                rec.status = match desc.variant() {
                    Some(v) if v != RESOLVED_VARIANT => Status::Rejected,
                    _ => Status::Fail,
                };
            }
            rec
        })
        .collect()
}

pub fn scenario_info(scn: &Scenario) -> ScenarioInfo {
    ScenarioInfo {
        name: scn.name.clone(),
        descriptor_hash: scn.descriptor_hash(),
        dim: scn.dim(),
        n: scn.n(),
        p: scn.p(),
        closed: scn.closed,
        params: scn.params.clone(),
    }
}

/// Runs the identity suite (and the splitting sweep) on `scn`.
///
/// Errors only for configuration problems: unknown identity, bad grid.
pub fn run_check(scn: &Scenario, cfg: &RunConfig) -> Result<RunReport> {
    if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
        return Err(GeomError::Quadrature(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let descs = match cfg.identity.as_deref() {
        None | Some("all") => list_identities(),
        Some(id) => vec![descriptor(id)?],
    };
    let grid = build_grid(&scn.chart, cfg.grid)?;
    let identities = evaluate_all(scn, &descs, &grid, cfg);
    let splitting = if cfg.splitting {
        Some(check_hypotheses(scn, &grid)?)
    } else {
        None
    };
    Ok(RunReport {
        scenario: scenario_info(scn),
        identities,
        splitting,
        meta: Meta {
            tool: "mixcurv",
            version: env!("CARGO_PKG_VERSION"),
            grid: cfg.grid,
            grid_kind: grid.kind,
            tol: cfg.tol,
            reading: cfg.reading,
            resolved_sign_variant: RESOLVED_VARIANT,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build_preset, params};

    #[test]
    fn warped_suite_passes_and_is_deterministic() {
        let scn = build_preset("warped_torus", &params(&[])).unwrap();
        let cfg = RunConfig {
            grid: 16,
            ..Default::default()
        };
        let a = run_check(&scn, &cfg).unwrap();
        assert!(a.passed(), "{}", a.table());
        let b = run_check(&scn, &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let pw = a.identities.iter().find(|r| r.id == "PW-IF").unwrap();
        assert_eq!(pw.status, Status::Pass);
        assert!(pw.integral_value.unwrap().abs() < 1e-9);
    }

    #[test]
    fn literal_reading_fails_somewhere() {
        let scn = build_preset("warped_torus", &params(&[])).unwrap();
        let cfg = RunConfig {
            grid: 8,
            reading: Reading::Literal,
            splitting: false,
            ..Default::default()
        };
        let r = run_check(&scn, &cfg).unwrap();
        assert!(!r.passed());
        let umb = r.identities.iter().find(|r| r.id == "UMB-T6").unwrap();
        assert_eq!(umb.status, Status::Fail);
    }

    #[test]
    fn unknown_identity_is_a_config_error() {
        let scn = build_preset("flat_torus", &params(&[])).unwrap();
        let cfg = RunConfig {
            identity: Some("NOPE".into()),
            ..Default::default()
        };
        assert!(matches!(run_check(&scn, &cfg), Err(GeomError::UnknownIdentity(_))));
    }
}
