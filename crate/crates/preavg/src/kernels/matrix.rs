//! Dense symmetric matrices of small dimension (weight families are small),
//! with a Jacobi eigendecomposition and the symmetric PSD square root.

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = SymMatrix::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n);
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Maximum absolute difference between M and its transpose.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn matmul(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.set(i, j, out.get(i, j) + a * other.get(k, j));
                }
            }
        }
        out
    }

    /// M v for a vector v.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Eigenvalues and eigenvectors (columns) by cyclic Jacobi rotations.
    /// The matrix must be symmetric to tolerance; this is not checked here.
    pub fn jacobi_eigen(&self) -> (Vec<f64>, SymMatrix) {
        let n = self.n;
        let mut a = self.clone();
        // Work on the symmetrized matrix so that tiny quadrature asymmetries
        // do not break the rotations.
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (a.get(i, j) + a.get(j, i));
                a.set(i, j, s);
                a.set(j, i, s);
            }
        }
        let mut v = SymMatrix::identity(n);
        let scale: f64 = (0..n)
            .map(|i| (0..n).map(|j| a.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(1e-300);
        for _sweep in 0..100 {
            let mut off: f64 = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a.get(i, j).abs());
                }
            }
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= 1e-18 * scale {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        let eig = (0..n).map(|i| a.get(i, i)).collect();
        (eig, v)
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        let (eig, _) = self.jacobi_eigen();
        eig.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Nearest PSD matrix: negative eigenvalues clipped to zero.
    pub fn psd_projection(&self) -> SymMatrix {
        let (eig, v) = self.jacobi_eigen();
        let n = self.dim();
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for (k, &l) in eig.iter().enumerate() {
                    acc += v.get(i, k) * l.max(0.0) * v.get(j, k);
                }
                out.set(i, j, acc);
            }
        }
        // exact symmetry regardless of roundoff
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (out.get(i, j) + out.get(j, i));
                out.set(i, j, s);
                out.set(j, i, s);
            }
        }
        out
    }
}

/// Symmetric PSD square root via spectral decomposition. Eigenvalues in
/// [-tol, 0) are clipped to zero; more negative ones are rejected, as is an
/// asymmetric input.
pub fn psd_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    let scale: f64 = (0..m.dim())
        .map(|i| m.get(i, i).abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    if m.asymmetry() > 1e-9 * scale.max(1.0) {
        return Err(Error::Numerical(format!(
            "psd_sqrt: matrix asymmetry {} beyond tolerance",
            m.asymmetry()
        )));
    }
    let (eig, v) = m.jacobi_eigen();
    let tol = 1e-10 * scale.max(1.0);
    let mut sqrt_eig = Vec::with_capacity(eig.len());
    for &l in &eig {
        if l < -tol {
            return Err(Error::Numerical(format!(
                "psd_sqrt: eigenvalue {l} below -{tol:e}; matrix is not PSD"
            )));
        }
        sqrt_eig.push(l.max(0.0).sqrt());
    }
    let n = m.dim();
    let mut out = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for (k, &se) in sqrt_eig.iter().enumerate() {
                acc += v.get(i, k) * se * v.get(j, k);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}
