//! Small dense complex matrices.
//!
//! Two concrete types cover everything the engine needs: [`CMatrix`] holds
//! plain complex scalars and provides the Hermitian eigensolver (cyclic Jacobi
//! with complex rotations) and the eigen-based inverse; [`JetMatrix`] holds
//! jet-valued entries and provides Gauss-Jordan inversion and determinants,
//! which is what derivative-carrying matrices like the inverse metric need.
//! All matrices here are at most 8 x 8.

use num_complex::Complex64;
use thiserror::Error;

use crate::jet::{Jet, JetError};

/// Absolute tolerance on off-diagonal Hermitian asymmetry. All inputs are
/// machine-exact symmetrizations of jet outputs, so anything above this is a
/// logic error upstream.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues below this are treated as a definiteness failure when a
/// positive definite matrix is required.
pub const POSITIVE_DEFINITE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: off-diagonal asymmetry {asymmetry:.3e} exceeds {tol:.1e}")]
    NotHermitian { asymmetry: f64, tol: f64 },
    #[error("matrix is not positive definite: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("dimension mismatch: ({0}, {1}) vs ({2}, {3})")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("matrix must be square, got {0} x {1}")]
    NotSquare(usize, usize),
    #[error("Jacobi iteration failed to converge")]
    NoConvergence,
    #[error("jet matrix pivot has vanishing constant term (singular to working precision)")]
    SingularJetMatrix,
    #[error(transparent)]
    Jet(#[from] JetError),
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of the elementwise difference.
    pub fn max_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |a_ij - conj(a_ji)| over all entries.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn require_hermitian(&self) -> Result<(), LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare(self.rows, self.cols));
        }
        let asymmetry = self.hermitian_asymmetry();
        if asymmetry > HERMITIAN_TOL {
            return Err(LinalgError::NotHermitian { asymmetry, tol: HERMITIAN_TOL });
        }
        Ok(())
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn herm_eig(&self) -> Result<Vec<f64>, LinalgError> {
        Ok(self.herm_eig_full()?.0)
    }

    /// Eigenvalues (ascending) and a unitary matrix of eigenvectors (columns)
    /// of a Hermitian matrix, by cyclic Jacobi with complex rotations.
    pub fn herm_eig_full(&self) -> Result<(Vec<f64>, CMatrix), LinalgError> {
        self.require_hermitian()?;
        let n = self.rows;
        // Symmetrize to kill the sub-tolerance asymmetry.
        let mut a = CMatrix::from_fn(n, n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)].conj()));
        let mut v = CMatrix::identity(n);

        let scale = a.max_abs().max(1.0);
        let mut converged = false;
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a[(i, j)].norm());
                }
            }
            if off <= 1e-15 * scale {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let h = apq.norm();
                    if h <= 1e-18 * scale {
                        continue;
                    }
                    // Phase factor turning the 2x2 block real, then a real
                    // Givens rotation annihilating it.
                    let phase = apq / h;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * h);
                    let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                    let t = sign / (tau.abs() + (tau * tau + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;

                    let mut j_rot = CMatrix::identity(n);
                    j_rot[(p, p)] = Complex64::new(c, 0.0);
                    j_rot[(p, q)] = Complex64::new(s, 0.0);
                    j_rot[(q, p)] = -Complex64::new(s, 0.0) * phase.conj();
                    j_rot[(q, q)] = Complex64::new(c, 0.0) * phase.conj();

                    a = j_rot.adjoint().mul(&a).mul(&j_rot);
                    v = v.mul(&j_rot);
                }
            }
        }
        if !converged {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a[(i, j)].norm());
                }
            }
            if off > 1e-12 * scale {
                return Err(LinalgError::NoConvergence);
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("NaN eigenvalue"));
        let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
        Ok((values, vectors))
    }

    /// Inverse of a Hermitian positive definite matrix via the eigensystem.
    /// With the convention used throughout: the entry `(a, b)` of the inverse
    /// is the component with barred index `a` and unbarred index `b`, so
    /// `G_{i l^bar} G^{l^bar k} = delta_i^k` reads `self.mul(&inv) == I`.
    pub fn herm_inverse(&self) -> Result<CMatrix, LinalgError> {
        let (vals, vecs) = self.herm_eig_full()?;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= POSITIVE_DEFINITE_TOL {
            return Err(LinalgError::NotPositiveDefinite { min_eigenvalue: min });
        }
        let n = self.rows;
        let inv_diag = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0 / vals[i], 0.0)
            } else {
                ZERO
            }
        });
        Ok(vecs.mul(&inv_diag).mul(&vecs.adjoint()))
    }

    /// Minimum eigenvalue of a Hermitian matrix.
    pub fn min_eigenvalue(&self) -> Result<f64, LinalgError> {
        Ok(self.herm_eig()?[0])
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense matrix with jet entries (derivative-carrying matrices).
#[derive(Clone)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Jet,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn try_from_fn<E>(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<Jet, E>,
    ) -> Result<Self, E> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j)?);
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: Jet) {
        self.data[i * self.cols + j] = v;
    }

    /// Matrix of the constant terms.
    pub fn constant_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).constant_term())
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JetMatrix {
        JetMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, rhs: &JetMatrix) -> Result<JetMatrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch(self.rows, self.cols, rhs.rows, rhs.cols));
        }
        let mut out: Option<JetMatrix> = None;
        let mut data = Vec::with_capacity(self.rows * rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = self.get(i, 0).try_mul(rhs.get(0, j))?;
                for k in 1..self.cols {
                    acc = &acc + &self.get(i, k).try_mul(rhs.get(k, j))?;
                }
                data.push(acc);
            }
        }
        out.replace(JetMatrix { rows: self.rows, cols: rhs.cols, data });
        Ok(out.expect("just set"))
    }

    /// Gauss-Jordan inverse with partial pivoting on the constant-term
    /// magnitude. Requires every pivot's constant term to be nonzero, which
    /// holds for the positive definite matrices this engine inverts.
    pub fn inverse(&self) -> Result<JetMatrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let proto = self.get(0, 0);
        let one = Jet::constant(ONE, proto.num_vars(), proto.degree());
        let zero = Jet::constant(ZERO, proto.num_vars(), proto.degree());
        let mut a = self.clone();
        let mut inv = JetMatrix::from_fn(n, n, |i, j| if i == j { one.clone() } else { zero.clone() });

        for col in 0..n {
            let (pivot_row, pivot_mag) = (col..n)
                .map(|r| (r, a.get(r, col).constant_term().norm()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).expect("NaN pivot"))
                .expect("non-empty range");
            if pivot_mag < 1e-13 {
                return Err(LinalgError::SingularJetMatrix);
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = a.get(col, j).clone();
                    a.set(col, j, a.get(pivot_row, j).clone());
                    a.set(pivot_row, j, tmp);
                    let tmp = inv.get(col, j).clone();
                    inv.set(col, j, inv.get(pivot_row, j).clone());
                    inv.set(pivot_row, j, tmp);
                }
            }
            let pivot_recip = a.get(col, col).recip()?;
            for j in 0..n {
                a.set(col, j, a.get(col, j).try_mul(&pivot_recip)?);
                inv.set(col, j, inv.get(col, j).try_mul(&pivot_recip)?);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col).clone();
                if factor.max_coeff_abs() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, &a.get(r, j).clone() - &factor.try_mul(a.get(col, j))?);
                    inv.set(r, j, &inv.get(r, j).clone() - &factor.try_mul(inv.get(col, j))?);
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by LU elimination with partial pivoting.
    pub fn det(&self) -> Result<Jet, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut sign = 1.0;
        for col in 0..n {
            let (pivot_row, pivot_mag) = (col..n)
                .map(|r| (r, a.get(r, col).constant_term().norm()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).expect("NaN pivot"))
                .expect("non-empty range");
            if pivot_mag < 1e-13 {
                return Err(LinalgError::SingularJetMatrix);
            }
            if pivot_row != col {
                sign = -sign;
                for j in 0..n {
                    let tmp = a.get(col, j).clone();
                    a.set(col, j, a.get(pivot_row, j).clone());
                    a.set(pivot_row, j, tmp);
                }
            }
            let pivot = a.get(col, col).clone();
            for r in (col + 1)..n {
                let factor = a.get(r, col).try_div(&pivot)?;
                if factor.max_coeff_abs() == 0.0 {
                    continue;
                }
                for j in col..n {
                    a.set(r, j, &a.get(r, j).clone() - &factor.try_mul(a.get(col, j))?);
                }
            }
        }
        let mut det = a.get(0, 0).clone();
        for k in 1..n {
            det = det.try_mul(a.get(k, k))?;
        }
        Ok(det.scale(Complex64::new(sign, 0.0)))
    }
}
