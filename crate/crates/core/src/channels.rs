//! The one-parameter family of unitarily covariant qudit channels
//!
//! `T_α(a) = (1 − αd²/(d²−1)) a + (αd/(d²−1)) Tr(a) I`,
//!
//! its Stinespring isometry, Kraus operators and Choi matrix.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::haar::{ginibre, haar_unitary, Rng};
use crate::matcore::{herm_eig, ComplexMatrix, Subsystem, C64};

/// Sign of `c₂ = ±√α` in the dilation. Both signs give the same channel but
/// different joint states of the ancillas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovariantChannel {
    d: usize,
    alpha: f64,
    c1: f64,
    c2: f64,
    branch: Branch,
}

impl CovariantChannel {
    /// `c₁ = √(1−α)`, `c₂ = ±√α`, so `|c₁|² + |c₂|² = 1`.
    pub fn new(d: usize, alpha: f64, branch: Branch) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimMismatch(format!("covariant channel needs d ≥ 2, got {d}")));
        }
        check_range("alpha", alpha, 0.0, 1.0)?;
        Ok(Self {
            d,
            alpha,
            c1: (1.0 - alpha).sqrt(),
            c2: branch.sign() * alpha.sqrt(),
            branch,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Coefficients `(x, y)` with `T(a) = x a + y Tr(a) I`.
    pub fn coefficients(&self) -> (f64, f64) {
        let d = self.d as f64;
        let n = d * d - 1.0;
        (1.0 - self.alpha * d * d / n, self.alpha * d / n)
    }

    /// Heisenberg-picture action on observables.
    pub fn apply_heisenberg(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.rows() != self.d || a.cols() != self.d {
            return Err(Error::DimMismatch(format!(
                "channel on C^{} applied to a {}x{} matrix",
                self.d,
                a.rows(),
                a.cols()
            )));
        }
        let (x, y) = self.coefficients();
        Ok(&a.scale_real(x) + &ComplexMatrix::identity(self.d).scale(a.trace() * y))
    }

    /// Schrödinger-picture action on states. The family is self-dual under
    /// the Hilbert–Schmidt pairing, so this is the same formula.
    pub fn apply_schrodinger(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.apply_heisenberg(rho)
    }

    /// Superoperator matrix on row-major vectorized operators:
    /// `S[(i,j),(k,l)] = T(E_kl)[i,j]`.
    pub fn superoperator(&self) -> ComplexMatrix {
        let d = self.d;
        let (x, y) = self.coefficients();
        ComplexMatrix::from_fn(d * d, d * d, |r, c| {
            let (i, j) = (r / d, r % d);
            let (k, l) = (c / d, c % d);
            let mut v = 0.0;
            if i == k && j == l {
                v += x;
            }
            if k == l && i == j {
                v += y;
            }
            C64::new(v, 0.0)
        })
    }

    /// `(I ⊗ T)(|Ω⟩⟨Ω|)` with `Ω = Σ e_i⊗e_i / √d`.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let d = self.d;
        let (x, y) = self.coefficients();
        ComplexMatrix::from_fn(d * d, d * d, |r, c| {
            let (i, k) = (r / d, r % d);
            let (j, l) = (c / d, c % d);
            // Block (i, j) is T(E_ij) / d.
            let mut v = 0.0;
            if i == k && j == l {
                v += x;
            }
            if i == j && k == l {
                v += y;
            }
            C64::new(v / d as f64, 0.0)
        })
    }

    /// Smallest eigenvalue of the Choi matrix; complete positivity means it
    /// is non-negative.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        Ok(herm_eig(&self.choi_matrix())?.min())
    }

    /// Worst-case fidelity `1 − αd/(d+1)`. Covariance makes every pure input
    /// equivalent, so this is the fidelity at any single pure state.
    pub fn wc_fidelity_closed(&self) -> f64 {
        let d = self.d as f64;
        1.0 - self.alpha * d / (d + 1.0)
    }
}

/// Isometry `V : C^d → C^d ⊗ C^d ⊗ C^d` with
/// `Vψ = c₁ ψ⊗ψ₀ + (c₂/√(d²−1)) (ψ⊗ψ₀ − d ψ₀⊗ψ)`, `ψ₀ = Σ e_i⊗e_i / √d`.
///
/// Output factors are ordered system, first ancilla, second ancilla, with
/// row index `s·d² + j·d + k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StinespringIsometry {
    d: usize,
    matrix: ComplexMatrix,
}

impl StinespringIsometry {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `V† (a ⊗ I_{d²}) V`.
    pub fn heisenberg(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let d = self.d;
        let lifted = a.kron(&ComplexMatrix::identity(d * d));
        self.matrix.adjoint().matmul(&lifted).matmul(&self.matrix)
    }

    /// `Tr_{E}(V ρ V†)`, tracing out both ancillas.
    pub fn schrodinger(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.d;
        self.matrix
            .matmul(rho)
            .matmul(&self.matrix.adjoint())
            .partial_trace(Subsystem::A, (d, d * d))
    }

    /// `‖V†V − I‖_F`.
    pub fn isometry_residual(&self) -> f64 {
        self.matrix
            .adjoint()
            .matmul(&self.matrix)
            .distance(&ComplexMatrix::identity(self.d))
    }
}

pub fn build_isometry(ch: &CovariantChannel) -> StinespringIsometry {
    let d = ch.d;
    let df = d as f64;
    let c2n = ch.c2 / (df * df - 1.0).sqrt();
    let direct = (ch.c1 + c2n) / df.sqrt();
    let swapped = c2n * df / df.sqrt();
    let matrix = ComplexMatrix::from_fn(d * d * d, d, |row, m| {
        let (s, j, k) = (row / (d * d), (row / d) % d, row % d);
        let mut v = 0.0;
        if s == m && j == k {
            v += direct;
        }
        if s == j && k == m {
            v -= swapped;
        }
        C64::new(v, 0.0)
    });
    StinespringIsometry { d, matrix }
}

/// Kraus operators `K_e[i][j] = V[i·d² + e, j]` in the computational basis
/// of the ancilla pair; operators with Frobenius norm below `1e-12` are dropped.
pub fn kraus_from_isometry(v: &StinespringIsometry) -> Vec<ComplexMatrix> {
    let d = v.d;
    let env = d * d;
    (0..env)
        .map(|e| ComplexMatrix::from_fn(d, d, |i, j| v.matrix[(i * env + e, j)]))
        .filter(|k| k.frobenius_norm() >= 1e-12)
        .collect()
}

/// `Σ_i K_i† a K_i`.
pub fn kraus_heisenberg(kraus: &[ComplexMatrix], a: &ComplexMatrix) -> ComplexMatrix {
    let d = a.rows();
    kraus.iter().fold(ComplexMatrix::zeros(d, d), |acc, k| {
        &acc + &k.adjoint().matmul(a).matmul(k)
    })
}

/// `Σ_i K_i ρ K_i†`.
pub fn kraus_schrodinger(kraus: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.rows();
    kraus.iter().fold(ComplexMatrix::zeros(d, d), |acc, k| {
        &acc + &k.matmul(rho).matmul(&k.adjoint())
    })
}

/// `max ‖u T(a) u† − T(u a u†)‖_F` over `n` Haar unitaries and Ginibre `a`.
pub fn covariance_residual(ch: &CovariantChannel, rng: &mut Rng, n: usize) -> Result<f64> {
    let d = ch.d;
    let mut worst = 0.0f64;
    for _ in 0..n {
        let u = haar_unitary(rng, d);
        let a = ginibre(rng, d, d);
        let lhs = ch.apply_heisenberg(&a)?.conjugate_by(&u);
        let rhs = ch.apply_heisenberg(&a.conjugate_by(&u))?;
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::DensityOperator;

    fn ch(d: usize, alpha: f64) -> CovariantChannel {
        CovariantChannel::new(d, alpha, Branch::Plus).unwrap()
    }

    #[test]
    fn qubit_half_alpha_closed_form() {
        let c = ch(2, 0.5);
        let (x, y) = c.coefficients();
        assert!((x - 1.0 / 3.0).abs() < 1e-15 && (y - 1.0 / 3.0).abs() < 1e-15);
        let out = c
            .apply_schrodinger(DensityOperator::basis_state(2, 0).matrix())
            .unwrap();
        let expect = ComplexMatrix::real_diag(&[2.0 / 3.0, 1.0 / 3.0]);
        assert!(out.distance(&expect) < 1e-15);
        assert!((c.wc_fidelity_closed() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_alpha_is_identity_and_plain_embedding() {
        let c = ch(3, 0.0);
        let mut rng = Rng::new(1);
        let a = ginibre(&mut rng, 3, 3);
        assert!(c.apply_heisenberg(&a).unwrap().distance(&a) < 1e-15);
        let v = build_isometry(&c);
        let kraus = kraus_from_isometry(&v);
        assert_eq!(kraus.len(), 3);
        for k in &kraus {
            assert!(k.distance(&ComplexMatrix::identity(3).scale_real(1.0 / 3f64.sqrt())) < 1e-15);
        }
    }

    #[test]
    fn dilation_matches_closed_form() {
        let mut rng = Rng::new(2);
        for d in [2, 3, 4] {
            for step in 0..=10 {
                let c = ch(d, step as f64 / 10.0);
                let v = build_isometry(&c);
                assert!(v.isometry_residual() < 1e-12);
                let a = ginibre(&mut rng, d, d);
                let e = v.heisenberg(&a).distance(&c.apply_heisenberg(&a).unwrap());
                assert!(e < 1e-12, "d={d} step={step}: {e}");
                let s = v.schrodinger(&a).unwrap().distance(&c.apply_schrodinger(&a).unwrap());
                assert!(s < 1e-12);
            }
        }
    }

    #[test]
    fn kraus_completeness_and_action() {
        let mut rng = Rng::new(3);
        let c = ch(3, 0.37);
        let kraus = kraus_from_isometry(&build_isometry(&c));
        assert!(kraus.len() <= 9);
        let sum = kraus_heisenberg(&kraus, &ComplexMatrix::identity(3));
        assert!(sum.distance(&ComplexMatrix::identity(3)) < 1e-12);
        let a = ginibre(&mut rng, 3, 3);
        assert!(kraus_heisenberg(&kraus, &a).distance(&c.apply_heisenberg(&a).unwrap()) < 1e-12);
        assert!(kraus_schrodinger(&kraus, &a).distance(&c.apply_schrodinger(&a).unwrap()) < 1e-12);
    }

    #[test]
    fn superoperator_matches_action() {
        let mut rng = Rng::new(4);
        let c = ch(3, 0.6);
        let a = ginibre(&mut rng, 3, 3);
        let vec_out = c.superoperator().apply(a.as_slice());
        let direct = c.apply_heisenberg(&a).unwrap();
        let err: f64 = vec_out
            .iter()
            .zip(direct.as_slice())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-14);
    }

    #[test]
    fn choi_spectrum() {
        for d in [2, 3] {
            let c = ch(d, 0.4);
            let eig = herm_eig(&c.choi_matrix()).unwrap();
            let n = (d * d - 1) as f64;
            // Unit-trace Choi state: 1−α on Ω, α/(d²−1) on its complement.
            let hi = eig.values.last().copied().unwrap();
            assert!((hi - 0.6).abs() < 1e-12, "{:?}", eig.values);
            assert!((eig.values[0] - 0.4 / n).abs() < 1e-12);
        }
        assert!(ch(2, 1.0).choi_min_eigenvalue().unwrap() >= -1e-12);
    }

    #[test]
    fn covariance_holds() {
        let mut rng = Rng::new(5);
        assert!(covariance_residual(&ch(4, 0.9), &mut rng, 100).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CovariantChannel::new(2, 1.5, Branch::Plus).is_err());
        assert!(CovariantChannel::new(1, 0.5, Branch::Plus).is_err());
        assert!(ch(2, 0.5).apply_heisenberg(&ComplexMatrix::identity(3)).is_err());
    }
}
