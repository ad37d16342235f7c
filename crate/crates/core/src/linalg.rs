//! Small dense complex matrices and a cyclic Jacobi eigensolver for
//! Hermitian input.
//!
//! Everything here is sized for operators on at most a handful of qubits
//! (dimension ≤ 64) and for the Gram matrices of modest regression problems.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C1;
        }
        m
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails if the length is not a square.
    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::validation(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(CMatrix { n, data })
    }

    pub fn from_real_row_major(n: usize, data: &[f64]) -> Result<Self> {
        Self::from_row_major(n, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len(), "matvec dimension mismatch");
        let n = self.n;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`; the left factor owns the most significant index bits.
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let (n, m) = (self.n, rhs.n);
        let dim = n * m;
        let mut out = Self::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a == C0 {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * dim + j * m + l] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation `|a_ij − conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .sub(&CMatrix::identity(self.n))
            .frobenius_norm()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub sweeps: usize,
}

impl HermitianEigen {
    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C0;
                for k in 0..n {
                    acc += self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.values.len()).map(|i| self.vectors[(i, k)]).collect()
    }
}

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_RTOL: f64 = 1e-12;

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver with native complex rotations.
///
/// Stops once the off-diagonal Frobenius norm falls below `1e-12·‖H‖_F`.
/// The caller is responsible for Hermiticity; only the upper triangle
/// drives the rotations.
pub fn hermitian_eigen(h: &CMatrix) -> Result<HermitianEigen> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::validation("empty matrix"));
    }
    let mut a = h.clone();
    // Symmetrize so round-off in the input cannot break the invariant.
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    let threshold = OFF_DIAGONAL_RTOL * scale;

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);
    while off > threshold && scale > 0.0 {
        if sweeps == MAX_SWEEPS {
            return Err(Error::numeric(
                format!("Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"),
                off / scale,
            ));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -s * phase.conj();
                let u_qq = c * phase.conj();

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = C0;
                a[(q, p)] = C0;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, new_col)] = v[(row, old_col)];
        }
    }
    Ok(HermitianEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Eigen-decomposition of a real symmetric matrix given row-major; returns
/// ascending eigenvalues and real eigenvectors as columns (row-major `n×n`).
pub fn symmetric_eigen(n: usize, a: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = CMatrix::from_real_row_major(n, a)?;
    let eig = hermitian_eigen(&m)?;
    // Real symmetric input only ever produces real phases (±1), so the
    // eigenvectors stay real up to round-off.
    let vecs = eig.vectors.as_slice().iter().map(|z| z.re).collect();
    Ok((eig.values, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.random_range(-2.0..2.0), 0.0);
            for j in (i + 1)..n {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        for seed in 0..20 {
            let h = random_hermitian(8, seed);
            let eig = hermitian_eigen(&h).unwrap();
            let resid = h.sub(&eig.reconstruct()).frobenius_norm();
            assert!(resid <= 1e-11 * h.frobenius_norm(), "residual {resid}");
            assert!(eig.vectors.unitarity_defect() < 1e-11);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn trace_and_frobenius_identities() {
        let h = random_hermitian(8, 99);
        let eig = hermitian_eigen(&h).unwrap();
        let tr: f64 = eig.values.iter().sum();
        let sq: f64 = eig.values.iter().map(|x| x * x).sum();
        assert!((tr - h.trace().re).abs() < 1e-9);
        assert!((sq - h.frobenius_norm().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let eig = hermitian_eigen(&CMatrix::from_diagonal(&[9.0, 0.0, 3.0])).unwrap();
        assert_eq!(eig.values, vec![0.0, 3.0, 9.0]);
        assert_eq!(eig.sweeps, 0);
    }

    #[test]
    fn kron_of_diagonals() {
        let z = CMatrix::from_diagonal(&[1.0, -1.0]);
        let zz = z.kron(&z);
        let d: Vec<f64> = (0..4).map(|i| zz[(i, i)].re).collect();
        assert_eq!(d, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn symmetric_eigen_real_vectors() {
        let a = [2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let (vals, vecs) = symmetric_eigen(3, &a).unwrap();
        let s2 = 2f64.sqrt();
        assert!((vals[0] - (2.0 - s2)).abs() < 1e-12);
        assert!((vals[2] - (2.0 + s2)).abs() < 1e-12);
        // A v = λ v for each column
        for k in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * vecs[j * 3 + k]).sum();
                assert!((av - vals[k] * vecs[i * 3 + k]).abs() < 1e-12);
            }
        }
    }
}
