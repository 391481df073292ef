//! Adapted orthonormal frames `{E_a, ℰ_i}` by modified Gram–Schmidt with
//! signature bookkeeping.
//!
//! `D⊤` is spanned by the scenario's fields, processed in input order.
//! `D⊥` is its `g`-orthogonal complement, built from the coordinate basis
//! `∂_1 .. ∂_d` in order; candidates that collapse below the degeneracy floor
//! are skipped.

use crate::dual::Scalar;
use crate::error::{GeomError, Result};
use crate::linalg::{axpy, Mat};

/// Minimum `|g(w,w)|` after orthogonalizing an input normalized to unit
/// coordinate length.
pub const DEGENERACY_FLOOR: f64 = 1e-10;

/// Orthonormal vectors (coordinate components) and their signs; the first
/// `n` span `D⊤`.
#[derive(Clone, Debug)]
pub struct FrameVectors<T> {
    pub vecs: Vec<Vec<T>>,
    pub eps: Vec<f64>,
    pub n: usize,
}

/// Constant ε-orthogonal recombination of an orthonormal frame, applied
/// after Gram–Schmidt. Used to probe frame-gauge independence.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRotation {
    pub top: Mat<f64>,
    pub bot: Mat<f64>,
}

impl FrameRotation {
    /// Checks `Rᵀ diag(ε) R = diag(ε)` for the given sign blocks.
    pub fn preserves(&self, eps_top: &[f64], eps_bot: &[f64]) -> bool {
        fn ok(r: &Mat<f64>, eps: &[f64]) -> bool {
            let n = r.n;
            if n != eps.len() {
                return false;
            }
            for a in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for c in 0..n {
                        s += r.at(a, c) * eps[c] * r.at(b, c);
                    }
                    let want = if a == b { eps[a] } else { 0.0 };
                    if (s - want).abs() > 1e-12 {
                        return false;
                    }
                }
            }
            true
        }
        ok(&self.top, eps_top) && ok(&self.bot, eps_bot)
    }
}

fn unit_coordinate<T: Scalar>(v: &[T]) -> Vec<T> {
    let norm = v.iter().map(|c| c.re() * c.re()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|c| c.scale(1.0 / norm)).collect()
}

/// Orthogonalizes `v` against `basis` (modified Gram–Schmidt with signs).
fn orthogonalize<T: Scalar>(g: &Mat<T>, basis: &[Vec<T>], eps: &[f64], v: &[T]) -> Vec<T> {
    let mut w = v.to_vec();
    for (e, &s) in basis.iter().zip(eps) {
        let c = g.form(&w, e).scale(s);
        axpy(-c, e, &mut w);
    }
    w
}

fn normalize<T: Scalar>(g: &Mat<T>, w: Vec<T>) -> (Vec<T>, f64, f64) {
    let q = g.form(&w, &w);
    let sign = if q.re() < 0.0 { -1.0 } else { 1.0 };
    let inv = T::one() / (q.scale(sign)).sqrt();
    (w.into_iter().map(|c| c * inv).collect(), sign, q.re().abs())
}

/// Builds the adapted frame at a point. `point` is only used for error
/// reporting.
pub fn build_frame<T: Scalar>(
    g: &Mat<T>,
    top_fields: &[Vec<T>],
    dim_bot: usize,
    rotation: Option<&FrameRotation>,
    point: &[f64],
) -> Result<FrameVectors<T>> {
    let d = g.n;
    let n = top_fields.len();
    let mut vecs: Vec<Vec<T>> = Vec::with_capacity(d);
    let mut eps: Vec<f64> = Vec::with_capacity(d);
    for f in top_fields {
        let w = orthogonalize(g, &vecs, &eps, &unit_coordinate(f));
        let (e, s, q) = normalize(g, w);
        if !(q >= DEGENERACY_FLOOR) {
            return Err(GeomError::DegenerateDistribution {
                point: point.to_vec(),
                norm: q,
            });
        }
        vecs.push(e);
        eps.push(s);
    }
    for k in 0..d {
        if vecs.len() == n + dim_bot {
            break;
        }
        let mut cand = vec![T::zero(); d];
        cand[k] = T::one();
        let w = orthogonalize(g, &vecs, &eps, &cand);
        // second pass for stability
        let w = orthogonalize(g, &vecs, &eps, &w);
        let q = g.form(&w, &w).re().abs();
        if q < DEGENERACY_FLOOR {
            continue;
        }
        let (e, s, _) = normalize(g, w);
        vecs.push(e);
        eps.push(s);
    }
    if vecs.len() != n + dim_bot {
        return Err(GeomError::DegenerateDistribution {
            point: point.to_vec(),
            norm: 0.0,
        });
    }
    if let Some(r) = rotation {
        let (top, bot) = vecs.split_at(n);
        let mix = |m: &Mat<f64>, block: &[Vec<T>]| -> Vec<Vec<T>> {
            (0..block.len())
                .map(|a| {
                    let mut out = vec![T::zero(); d];
                    for (b, e) in block.iter().enumerate() {
                        axpy(T::cst(m.at(a, b)), e, &mut out);
                    }
                    out
                })
                .collect()
        };
        let mut rotated = mix(&r.top, top);
        rotated.extend(mix(&r.bot, bot));
        vecs = rotated;
    }
    Ok(FrameVectors { vecs, eps, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentz_signs() {
        let g = Mat {
            n: 2,
            a: vec![-1.0, 0.0, 0.0, 1.0],
        };
        let f = build_frame(&g, &[vec![1.0, 0.0]], 1, None, &[0.0, 0.0]).unwrap();
        assert_eq!(f.eps, vec![-1.0, 1.0]);
        assert_eq!(f.vecs[0], vec![1.0, 0.0]);
        assert_eq!(f.vecs[1], vec![0.0, 1.0]);
    }

    #[test]
    fn warped_normalization() {
        let u: f64 = 2.0 + 0.3_f64.sin();
        let g = Mat {
            n: 2,
            a: vec![1.0, 0.0, 0.0, u * u],
        };
        let f = build_frame(&g, &[vec![1.0, 0.0]], 1, None, &[0.3, 0.0]).unwrap();
        assert!((f.vecs[1][1] - 1.0 / u).abs() < 1e-15);
        assert!((g.form(&f.vecs[1], &f.vecs[1]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn null_direction_is_degenerate() {
        let g = Mat {
            n: 2,
            a: vec![-1.0, 0.0, 0.0, 1.0],
        };
        let err = build_frame(&g, &[vec![1.0, 1.0]], 1, None, &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, GeomError::DegenerateDistribution { .. }));
    }

    #[test]
    fn oblique_metric_orthonormality() {
        let g = Mat {
            n: 3,
            a: vec![2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0],
        };
        let f = build_frame(&g, &[vec![1.0, 1.0, 0.0]], 2, None, &[0.0; 3]).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { f.eps[a] } else { 0.0 };
                assert!((g.form(&f.vecs[a], &f.vecs[b]) - want).abs() < 1e-14);
            }
        }
    }
}
