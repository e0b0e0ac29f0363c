//! Hermitian eigendecomposition by cyclic Jacobi rotations, and the matrix
//! functions built on it.

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order and the unitary whose columns are the
/// corresponding eigenvectors.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermEig {
    /// `U f(Λ) U†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| u[(i, k)] * fv[k] * u[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a Hermitian matrix, checked against `tol.herm`.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermEig> {
    herm_eig_with(m, &Tolerances::default())
}

pub fn herm_eig_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::DimMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let residual = m.hermiticity_residual();
    if residual > tol.herm * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    jacobi(&m.hermitian_part())
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
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

fn jacobi(m: &ComplexMatrix) -> Result<HermEig> {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();
    let target = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut converged = off_diagonal_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
///
/// The rotation is `J = diag(1, e^{-iφ}) · R(θ)` on the (p, q) plane, where
/// `a[p][q] = r e^{iφ}`; the phase makes the pivot real, then a real
/// rotation diagonalizes the 2x2 block.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations that are below rounding relative to the diagonal.
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / r;
    let zeta = (aqq - app) / (2.0 * r);
    let t = zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt());
    let t = if zeta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = a.rows();
    // A <- A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    // A <- J† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // V <- V J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-tol.psd, 0)` are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_sqrt_with(m, &Tolerances::default())
}

pub fn psd_sqrt_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = herm_eig_with(m, tol)?;
    let floor = tol.psd * m.max_abs().max(1.0);
    if eig.min() < -floor {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Trace norm `Tr √(m† m)` of an arbitrary square matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let eig = jacobi(&m.adjoint().matmul(m).hermitian_part())?;
    Ok(eig.values.iter().map(|&x| x.max(0.0).sqrt()).sum())
}

/// Unitary factor `W` of the polar decomposition `m = W |m|`.
///
/// Built from the singular vectors of `m`; directions in the kernel are
/// completed to an orthonormal basis.
pub fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.rows();
    let eig = jacobi(&m.adjoint().matmul(m).hermitian_part())?;
    let cutoff = 1e-12 * eig.values.last().copied().unwrap_or(0.0).max(1e-300);
    let mut left: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut right: Vec<Vec<C64>> = Vec::with_capacity(n);
    // Largest singular values first so the kernel is filled last.
    for k in (0..n).rev() {
        let vk = eig.vectors.column(k);
        let sigma = eig.values[k].max(0.0).sqrt();
        if eig.values[k] > cutoff {
            let u: Vec<C64> = m.apply(&vk).iter().map(|z| z / sigma).collect();
            left.push(u);
            right.push(vk);
        }
    }
    complete_basis(&mut left, n);
    for k in (0..n).rev() {
        if right.len() == n {
            break;
        }
        if eig.values[k] <= cutoff {
            right.push(eig.vectors.column(k));
        }
    }
    let u = ComplexMatrix::from_columns(&left);
    let v = ComplexMatrix::from_columns(&right);
    Ok(u.matmul(&v.adjoint()))
}

/// Extends an orthonormal family to a basis of `C^n` with Gram–Schmidt over
/// the standard basis.
pub fn complete_basis(vectors: &mut Vec<Vec<C64>>, n: usize) {
    let mut k = 0;
    while vectors.len() < n && k < n {
        let mut cand: Vec<C64> = (0..n).map(|i| if i == k { ONE } else { ZERO }).collect();
        for _ in 0..2 {
            for u in vectors.iter() {
                let overlap = super::matrix::inner(u, &cand);
                for (c, ui) in cand.iter_mut().zip(u) {
                    *c -= overlap * ui;
                }
            }
        }
        let nrm = super::matrix::norm(&cand);
        if nrm > 1e-6 {
            vectors.push(cand.iter().map(|z| z / nrm).collect());
        }
        k += 1;
    }
}
