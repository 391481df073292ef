//! Small dense helpers over any [`Scalar`] carrier. Matrices are row-major
//! `Vec<T>` of side `d`; the geometry here never exceeds a handful of
//! dimensions.

use crate::dual::Scalar;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub n: usize,
    pub a: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = T::one();
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..self.n {
                    s += self.at(i, j) * v[j];
                }
                s
            })
            .collect()
    }

    /// Bilinear form `u^T M v`.
    pub fn form(&self, u: &[T], v: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            if u[i].re() == 0.0 && u[i].is_const() {
                continue;
            }
            let mut r = T::zero();
            for j in 0..self.n {
                r += self.at(i, j) * v[j];
            }
            s += u[i] * r;
        }
        s
    }

    /// Gauss-Jordan inverse with partial pivoting on the real part.
    /// Returns `None` when a pivot falls below `tol` relative to the largest
    /// entry.
    pub fn inverse(&self, tol: f64) -> Option<Self> {
        let n = self.n;
        let scale = self.a.iter().fold(0.0_f64, |m, v| m.max(v.re().abs()));
        if scale == 0.0 {
            return None;
        }
        let mut m = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| m.at(i, col).re().abs().total_cmp(&m.at(j, col).re().abs()))
                .unwrap_or(col);
            if m.at(piv, col).re().abs() <= tol * scale {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    m.a.swap(piv * n + j, col * n + j);
                    inv.a.swap(piv * n + j, col * n + j);
                }
            }
            let p = m.at(col, col);
            for j in 0..n {
                m.set(col, j, m.at(col, j) / p);
                inv.set(col, j, inv.at(col, j) / p);
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = m.at(i, col);
                if f.re() == 0.0 && f.is_const() {
                    continue;
                }
                for j in 0..n {
                    m.set(i, j, m.at(i, j) - f * m.at(col, j));
                    inv.set(i, j, inv.at(i, j) - f * inv.at(col, j));
                }
            }
        }
        Some(inv)
    }

    /// Determinant by elimination with partial pivoting.
    pub fn det(&self) -> T {
        let n = self.n;
        let mut m = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| m.at(i, col).re().abs().total_cmp(&m.at(j, col).re().abs()))
                .unwrap_or(col);
            if m.at(piv, col).re() == 0.0 {
                return T::zero();
            }
            if piv != col {
                for j in 0..n {
                    m.a.swap(piv * n + j, col * n + j);
                }
                det = -det;
            }
            let p = m.at(col, col);
            det *= p;
            for i in col + 1..n {
                let f = m.at(i, col) / p;
                for j in col..n {
                    m.set(i, j, m.at(i, j) - f * m.at(col, j));
                }
            }
        }
        det
    }
}

pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    let mut s = T::zero();
    for (a, b) in u.iter().zip(v) {
        s += *a * *b;
    }
    s
}

pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Number of negative eigenvalues of a symmetric real matrix, via the
/// inertia of an LDL^T factorization with symmetric pivoting fallback to
/// cyclic Jacobi rotations.
pub fn negative_index(m: &Mat<f64>) -> usize {
    let n = m.n;
    let mut a = m.a.clone();
    // cyclic Jacobi; matrices here are tiny
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).filter(|&i| a[i * n + i] < 0.0).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m = Mat {
            n: 3,
            a: vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0],
        };
        let inv = m.inverse(1e-14).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += m.at(i, k) * inv.at(k, j);
                }
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!((m.det() - 18.0).abs() < 1e-12);
    }

    #[test]
    fn singular_rejected() {
        let m = Mat {
            n: 2,
            a: vec![1.0, 2.0, 2.0, 4.0],
        };
        assert!(m.inverse(1e-12).is_none());
    }

    #[test]
    fn inertia() {
        let m = Mat {
            n: 3,
            a: vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0],
        };
        assert_eq!(negative_index(&m), 1);
        assert_eq!(negative_index(&Mat::<f64>::identity(4)), 0);
    }
}
