use serde::{Deserialize, Serialize};

use super::eig::{herm_eig_with, HermEig};
use super::matrix::{
    basis_vector, kron_vec, norm, pauli_x, pauli_y, pauli_z, ComplexMatrix, C64, ZERO,
};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Positive, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let eig = herm_eig_with(&matrix, tol)?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol.tr || trace.im.abs() > tol.tr {
            return Err(Error::NotUnitTrace { trace: trace.re });
        }
        if eig.min() < -tol.psd {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.min(),
            });
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Skips validation; for matrices that are density operators by construction.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let n = norm(psi);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(Self {
            matrix: ComplexMatrix::projector(psi),
        })
    }

    pub fn basis_state(d: usize, k: usize) -> Self {
        Self {
            matrix: ComplexMatrix::projector(&basis_vector(d, k)),
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    /// `Σ_i w_i ρ_i`; weights must be a probability vector.
    pub fn mixture(weights: &[f64], states: &[DensityOperator]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::DimMismatch("mixture weights vs states".into()));
        }
        let d = states[0].dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimMismatch("mixture of different dimensions".into()));
            }
            m = &m + &s.matrix.scale_real(*w);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eig(&self) -> Result<HermEig> {
        herm_eig_with(&self.matrix, &Tolerances::default())
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    /// `Tr(ρ a)`.
    pub fn expectation(&self, a: &ComplexMatrix) -> C64 {
        self.matrix.matmul(a).trace()
    }

    /// Purification `ψ = Σ_i √p_i |i⟩ ⊗ |i_a⟩` on `H ⊗ H`, with the ancilla
    /// basis equal to the computational basis and `|i⟩` the eigenvectors.
    pub fn purify(&self) -> Result<Vec<C64>> {
        let eig = self.eig()?;
        let d = self.dim();
        let mut psi = vec![ZERO; d * d];
        for (k, &p) in eig.values.iter().enumerate() {
            let w = p.max(0.0).sqrt();
            if w == 0.0 {
                continue;
            }
            let term = kron_vec(&eig.vectors.column(k), &basis_vector(d, k));
            for (acc, t) in psi.iter_mut().zip(term) {
                *acc += t * w;
            }
        }
        let n = norm(&psi);
        Ok(psi.iter().map(|z| z / n).collect())
    }

    /// Bloch vector `r_i = Tr(ρ σ_i)`.
    pub fn to_bloch(&self) -> Result<BlochVector> {
        if self.dim() != 2 {
            return Err(Error::NotQubit(self.dim()));
        }
        let r = [pauli_x(), pauli_y(), pauli_z()].map(|s| self.expectation(&s).re);
        Ok(BlochVector { r })
    }

    /// `ρ = (I + r·σ) / 2`.
    pub fn from_bloch(b: &BlochVector) -> Result<Self> {
        let len = b.length();
        if len > 1.0 + Tolerances::default().psd {
            return Err(Error::OutOfRange {
                name: "|r|",
                value: len,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let [x, y, z] = b.r;
        let m = &(&ComplexMatrix::identity(2) + &pauli_x().scale_real(x))
            + &(&pauli_y().scale_real(y) + &pauli_z().scale_real(z));
        Ok(Self {
            matrix: m.scale_real(0.5),
        })
    }
}

/// Real 3-vector parametrizing a qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub r: [f64; 3],
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { r: [x, y, z] }
    }

    pub fn length(&self) -> f64 {
        self.r.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
