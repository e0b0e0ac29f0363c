//! Fidelity in its pure and Uhlmann forms, worst-case fidelity of a map, and
//! randomized probes of the standard fidelity and uncertainty inequalities.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::haar::{haar_pure_state, haar_unitary, random_density, random_hermitian, random_isometry, Rng};
use crate::matcore::{
    basis_vector, complete_basis, herm_eig, inner, normalized, polar_unitary, psd_sqrt,
    ComplexMatrix, DensityOperator, Subsystem, C64,
};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::tolerance::Tolerances;

/// Fidelity between two states, a number in `[0, 1]` up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Fidelity(pub f64);

impl Fidelity {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `F(ρ, σ) = (Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<Fidelity> {
    fidelity_matrices(rho.matrix(), sigma.matrix()).map(Fidelity)
}

/// Uhlmann fidelity on raw PSD matrices.
pub(crate) fn fidelity_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != sigma.rows() || !rho.is_square() || !sigma.is_square() {
        return Err(Error::DimMismatch(format!(
            "fidelity of {}x{} and {}x{} operators",
            rho.rows(),
            rho.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    let s = psd_sqrt(rho)?;
    let s_eig = herm_eig(&s)?;
    let s = s_eig.reconstruct_with(|x| truncate(x, &s_eig.values));
    let inner_op = s.matmul(sigma).matmul(&s).hermitian_part();
    let eig = herm_eig(&inner_op)?;
    let root_trace: f64 = eig
        .values
        .iter()
        .map(|&x| truncate(x, &eig.values).sqrt())
        .sum();
    Ok(root_trace * root_trace)
}

/// Drops eigenvalues at rounding level relative to the largest one.
///
/// Square roots amplify rounding noise (`√1e-16 = 1e-8`), so without this a
/// rank-deficient argument loses half of the available digits.
fn truncate(x: f64, spectrum: &[f64]) -> f64 {
    let scale = spectrum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 64.0 * f64::EPSILON * spectrum.len() as f64 * scale;
    if x <= floor {
        0.0
    } else {
        x
    }
}

/// `|⟨ψ|φ⟩|²` for unit vectors.
pub fn pure_fidelity(psi: &[C64], phi: &[C64]) -> Result<Fidelity> {
    if psi.len() != phi.len() {
        return Err(Error::DimMismatch(format!(
            "vectors of length {} and {}",
            psi.len(),
            phi.len()
        )));
    }
    for v in [psi, phi] {
        let n = crate::matcore::norm(v);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm: n });
        }
    }
    Ok(Fidelity(inner(psi, phi).norm_sqr()))
}

/// `⟨ψ| O(|ψ⟩⟨ψ|) |ψ⟩` for a pure input.
pub fn pure_input_fidelity(op: &dyn Fn(&ComplexMatrix) -> ComplexMatrix, psi: &[C64]) -> f64 {
    op(&ComplexMatrix::projector(psi)).sandwich(psi, psi).re
}

#[derive(Debug, Clone, Serialize)]
pub struct UhlmannReport {
    pub fidelity: f64,
    /// Largest `|⟨ψ|(I⊗W)φ⟩|²` over the random ancilla unitaries tried.
    pub best_random_overlap: f64,
    /// Overlap at the polar-decomposition maximizer.
    pub optimized_overlap: f64,
    pub gap: f64,
    /// No trial overlap exceeded the fidelity by more than the tolerance.
    pub upper_bound_holds: bool,
    pub trials: usize,
}

/// Maximizes the purification overlap over ancilla unitaries and compares it
/// with the fidelity.
///
/// With purifications `ψ = vec(Ψ)` and `φ = vec(Φ)` on `H ⊗ H_a`, rotating the
/// ancilla of `φ` by `W` gives overlap `Tr(Ψ† Φ Wᵀ)`, whose maximum modulus is
/// the trace norm of `Ψ† Φ` and is attained at the polar factor.
pub fn uhlmann_check(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    rng: &mut Rng,
    n_trials: usize,
    tol: &Tolerances,
) -> Result<UhlmannReport> {
    let d = rho.dim();
    if sigma.dim() != d {
        return Err(Error::DimMismatch("Uhlmann check on different dimensions".into()));
    }
    let f = fidelity(rho, sigma)?.value();
    let psi_mat = coefficient_matrix(&rho.purify()?, d);
    let phi_mat = coefficient_matrix(&sigma.purify()?, d);
    let cross = psi_mat.adjoint().matmul(&phi_mat);
    let overlap = |w: &ComplexMatrix| cross.matmul(&w.transpose()).trace().norm_sqr();

    let mut best = 0.0f64;
    let mut upper_bound_holds = true;
    for _ in 0..n_trials {
        let w = haar_unitary(rng, d);
        let o = overlap(&w);
        upper_bound_holds &= o <= f + tol.eig;
        best = best.max(o);
    }
    let w_opt = polar_unitary(&cross)?.adjoint().transpose();
    let optimized = overlap(&w_opt);
    upper_bound_holds &= optimized <= f + tol.eig;
    Ok(UhlmannReport {
        fidelity: f,
        best_random_overlap: best,
        optimized_overlap: optimized,
        gap: f - optimized,
        upper_bound_holds,
        trials: n_trials,
    })
}

/// `Ψ[i][k] = ψ[i·d + k]` for a vector on `C^d ⊗ C^d`.
fn coefficient_matrix(psi: &[C64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, k| psi[i * d + k])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorstCaseMethod {
    /// Caller declared the map covariant; evaluated at `|e₁⟩` only.
    CovariantShortcut,
    /// Best of the random probes; refinement made no improvement.
    Sampled,
    /// Nelder–Mead refinement improved on the best probe.
    Refined,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstCaseReport {
    pub value: f64,
    pub argmin_state: DensityOperator,
    pub method: WorstCaseMethod,
    pub evaluations: usize,
    /// The refinement stopped on its evaluation budget rather than converging.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct WorstCaseOptions {
    pub probes: usize,
    pub refine_evals: usize,
    pub tol_opt: f64,
    /// Declares the map covariant, which makes every pure input equivalent.
    pub covariant: bool,
}

impl Default for WorstCaseOptions {
    fn default() -> Self {
        Self {
            probes: 512,
            refine_evals: 4000,
            tol_opt: Tolerances::default().opt,
            covariant: false,
        }
    }
}

/// `inf_ψ ⟨ψ| O(|ψ⟩⟨ψ|) |ψ⟩` over pure inputs.
///
/// Haar-random probes locate a basin; Nelder–Mead then refines on the
/// `(2d−2)`-real chart `ψ(x) ∝ ψ* + Σ_j (x_{2j} + i x_{2j+1}) w_j`, where the
/// `w_j` span the orthogonal complement of the best probe `ψ*`.
pub fn worst_case_fidelity(
    op: &dyn Fn(&ComplexMatrix) -> ComplexMatrix,
    d: usize,
    rng: &mut Rng,
    opts: &WorstCaseOptions,
) -> WorstCaseReport {
    if opts.covariant {
        let e1 = basis_vector(d, 0);
        return WorstCaseReport {
            value: pure_input_fidelity(op, &e1),
            argmin_state: DensityOperator::basis_state(d, 0),
            method: WorstCaseMethod::CovariantShortcut,
            evaluations: 1,
            budget_exhausted: false,
        };
    }

    let mut best_psi = basis_vector(d, 0);
    let mut best = pure_input_fidelity(op, &best_psi);
    let mut evaluations = 1;
    for _ in 0..opts.probes {
        let psi = haar_pure_state(rng, d);
        let v = pure_input_fidelity(op, &psi);
        evaluations += 1;
        if v < best {
            best = v;
            best_psi = psi;
        }
    }
    if d == 1 {
        return WorstCaseReport {
            value: best,
            argmin_state: DensityOperator::from_matrix_unchecked(ComplexMatrix::projector(&best_psi)),
            method: WorstCaseMethod::Sampled,
            evaluations,
            budget_exhausted: false,
        };
    }

    let mut frame = vec![best_psi.clone()];
    complete_basis(&mut frame, d);
    let tangent = frame.split_off(1);
    let chart = |x: &[f64]| -> Vec<C64> {
        let mut v = best_psi.clone();
        for (j, w) in tangent.iter().enumerate() {
            let coef = C64::new(x[2 * j], x[2 * j + 1]);
            for (vi, wi) in v.iter_mut().zip(w) {
                *vi += coef * wi;
            }
        }
        normalized(&v)
    };
    let nm = nelder_mead(
        |x| pure_input_fidelity(op, &chart(x)),
        &vec![0.0; 2 * (d - 1)],
        &NelderMeadOptions {
            max_evals: opts.refine_evals,
            f_tol: opts.tol_opt * 1e-4,
            x_tol: 1e-9,
            initial_step: 0.1,
        },
    );
    evaluations += nm.evals;
    let (value, psi, method) = if nm.value < best {
        (nm.value, chart(&nm.x), WorstCaseMethod::Refined)
    } else {
        (best, best_psi.clone(), WorstCaseMethod::Sampled)
    };
    WorstCaseReport {
        value,
        argmin_state: DensityOperator::from_matrix_unchecked(ComplexMatrix::projector(&psi)),
        method,
        evaluations,
        budget_exhausted: !nm.converged,
    }
}

/// Outcome of a randomized inequality check.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest `lhs − rhs` seen; negative values beyond the tolerance are violations.
    pub worst_margin: f64,
}

impl ProbeReport {
    fn from_margins(margins: &[f64], tol: f64) -> Self {
        Self {
            trials: margins.len(),
            violations: margins.iter().filter(|&&m| m < -tol).count(),
            worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// `ρ ↦ Tr_E(V ρ V†)` for an isometry `V : C^d → C^d ⊗ C^k`.
pub fn stinespring_apply(v: &ComplexMatrix, rho: &ComplexMatrix, d: usize) -> Result<ComplexMatrix> {
    let k = v.rows() / d;
    v.matmul(rho).matmul(&v.adjoint()).partial_trace(Subsystem::A, (d, k))
}

/// Checks `F(T(ρ), T(σ)) ≥ F(ρ, σ)` for random channels built from random
/// Stinespring isometries with a `d`-dimensional environment.
pub fn monotonicity_probe(rng: &Rng, d: usize, n_trials: usize, tol: &Tolerances) -> Result<ProbeReport> {
    let margins = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.child(t as u64);
            let v = random_isometry(&mut r, d, d * d);
            let rho = random_density(&mut r, d);
            let sigma = random_density(&mut r, d);
            let before = fidelity_matrices(rho.matrix(), sigma.matrix())?;
            let after = fidelity_matrices(
                &stinespring_apply(&v, rho.matrix(), d)?,
                &stinespring_apply(&v, sigma.matrix(), d)?,
            )?;
            Ok(after - before)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ProbeReport::from_margins(&margins, tol.eig))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    /// `F(Σp_iρ_i, Σq_iσ_i) ≥ Σ p_i q_i F(ρ_i, σ_i)`.
    pub printed: ProbeReport,
    /// `F(Σp_iρ_i, Σq_iσ_i) ≥ (Σ √(p_i q_i F(ρ_i, σ_i)))²`.
    pub standard: ProbeReport,
    /// `F(Σp_iρ_i, Σp_iσ_i) ≥ Σ p_i F(ρ_i, σ_i)`.
    pub joint: ProbeReport,
}

/// Random ensembles of `k` states in dimension `d`, tested against three
/// lower bounds for the fidelity of mixtures.
pub fn strong_concavity_probe(
    rng: &Rng,
    d: usize,
    k: usize,
    n_trials: usize,
    tol: &Tolerances,
) -> Result<ConcavityReport> {
    let rows = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.child(t as u64);
            let p = random_probabilities(&mut r, k);
            let q = random_probabilities(&mut r, k);
            let rhos: Vec<_> = (0..k).map(|_| random_density(&mut r, d)).collect();
            let sigmas: Vec<_> = (0..k).map(|_| random_density(&mut r, d)).collect();
            let fs = rhos
                .iter()
                .zip(&sigmas)
                .map(|(a, b)| fidelity_matrices(a.matrix(), b.matrix()))
                .collect::<Result<Vec<f64>>>()?;
            let mix = |w: &[f64], states: &[DensityOperator]| {
                states
                    .iter()
                    .zip(w)
                    .fold(ComplexMatrix::zeros(d, d), |acc, (s, &wi)| {
                        &acc + &s.matrix().scale_real(wi)
                    })
            };
            let rho = mix(&p, &rhos);
            let f_pq = fidelity_matrices(&rho, &mix(&q, &sigmas))?;
            let f_pp = fidelity_matrices(&rho, &mix(&p, &sigmas))?;
            let printed: f64 = (0..k).map(|i| p[i] * q[i] * fs[i]).sum();
            let standard: f64 = (0..k).map(|i| (p[i] * q[i] * fs[i]).sqrt()).sum::<f64>().powi(2);
            let joint: f64 = (0..k).map(|i| p[i] * fs[i]).sum();
            Ok([f_pq - printed, f_pq - standard, f_pp - joint])
        })
        .collect::<Result<Vec<[f64; 3]>>>()?;
    let column = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    Ok(ConcavityReport {
        printed: ProbeReport::from_margins(&column(0), tol.eig),
        standard: ProbeReport::from_margins(&column(1), tol.eig),
        joint: ProbeReport::from_margins(&column(2), tol.eig),
    })
}

/// Uniform point of the probability simplex (normalized exponentials).
pub fn random_probabilities(rng: &mut Rng, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct UncertaintyReport {
    /// `Δa · Δb` with `Δx = √(⟨x²⟩ − ⟨x⟩²)`.
    pub lhs: f64,
    /// `½ |⟨[a, b]⟩|`.
    pub rhs: f64,
}

impl UncertaintyReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs >= self.rhs - tol
    }
}

pub fn uncertainty_probe(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    rho: &DensityOperator,
) -> Result<UncertaintyReport> {
    let tol = Tolerances::default();
    for m in [a, b] {
        if m.rows() != rho.dim() || !m.is_square() {
            return Err(Error::DimMismatch("observable and state dimensions differ".into()));
        }
        let residual = m.hermiticity_residual();
        if residual > tol.herm * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
    }
    let spread = |x: &ComplexMatrix| {
        let mean = rho.expectation(x).re;
        (rho.expectation(&x.matmul(x)).re - mean * mean).max(0.0).sqrt()
    };
    Ok(UncertaintyReport {
        lhs: spread(a) * spread(b),
        rhs: 0.5 * rho.expectation(&a.commutator(b)).norm(),
    })
}

/// Random Hermitian pairs and random mixed states.
pub fn uncertainty_suite(rng: &Rng, d: usize, n_trials: usize, tol: &Tolerances) -> Result<ProbeReport> {
    let margins = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.child(t as u64);
            let a = random_hermitian(&mut r, d);
            let b = random_hermitian(&mut r, d);
            let rho = random_density(&mut r, d);
            let rep = uncertainty_probe(&a, &b, &rho)?;
            Ok(rep.lhs - rep.rhs)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ProbeReport::from_margins(&margins, tol.eig))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{pauli_x, pauli_y, pauli_z};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fidelity_basic_values() {
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!(close(fidelity(&zero, &zero).unwrap().value(), 1.0, 1e-12));
        assert!(close(fidelity(&zero, &one).unwrap().value(), 0.0, 1e-12));
        assert!(close(fidelity(&zero, &mixed).unwrap().value(), 0.5, 1e-12));
        assert!(fidelity(&zero, &DensityOperator::maximally_mixed(3)).is_err());
    }

    #[test]
    fn fidelity_is_symmetric_and_matches_pure_form() {
        let mut rng = Rng::new(21);
        for _ in 0..20 {
            let a = random_density(&mut rng, 3);
            let b = random_density(&mut rng, 3);
            let fab = fidelity(&a, &b).unwrap().value();
            let fba = fidelity(&b, &a).unwrap().value();
            assert!(close(fab, fba, 1e-9) && (0.0..=1.0 + 1e-9).contains(&fab));
        }
        for _ in 0..20 {
            let psi = haar_pure_state(&mut rng, 4);
            let phi = haar_pure_state(&mut rng, 4);
            let fp = pure_fidelity(&psi, &phi).unwrap().value();
            let fm = fidelity(
                &DensityOperator::pure(&psi).unwrap(),
                &DensityOperator::pure(&phi).unwrap(),
            )
            .unwrap()
            .value();
            assert!(close(fp, fm, 1e-10), "{fp} vs {fm}");
        }
    }

    #[test]
    fn pure_fidelity_rejects_unnormalized() {
        let v = vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)];
        assert!(matches!(
            pure_fidelity(&v, &basis_vector(2, 0)),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn uhlmann_reaches_fidelity() {
        let mut rng = Rng::new(4);
        let tol = Tolerances::default();
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        let rep = uhlmann_check(&rho, &sigma, &mut rng, 200, &tol).unwrap();
        assert!(rep.upper_bound_holds);
        assert!(rep.gap.abs() < 1e-10, "{rep:?}");
        let same = uhlmann_check(&rho, &rho, &mut rng, 10, &tol).unwrap();
        assert!((same.optimized_overlap - 1.0).abs() < 1e-10);
        let p = DensityOperator::basis_state(2, 0);
        let q = DensityOperator::pure(&normalized(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)])).unwrap();
        let pure = uhlmann_check(&p, &q, &mut rng, 10, &tol).unwrap();
        assert!(pure.gap.abs() < 1e-12);
    }

    #[test]
    fn worst_case_of_simple_maps() {
        let mut rng = Rng::new(8);
        let opts = WorstCaseOptions::default();
        let id = |m: &ComplexMatrix| m.clone();
        let rep = worst_case_fidelity(&id, 3, &mut rng, &opts);
        assert!(close(rep.value, 1.0, 1e-12));
        let dep = |_: &ComplexMatrix| ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        let rep = worst_case_fidelity(&dep, 3, &mut rng, &opts);
        assert!(close(rep.value, 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn worst_case_finds_a_non_covariant_minimum() {
        // Dephasing in the z basis: worst inputs lie on the equator with F = 1/2.
        let deph = |m: &ComplexMatrix| {
            let z = pauli_z();
            (m + &z.matmul(m).matmul(&z)).scale_real(0.5)
        };
        let mut rng = Rng::new(13);
        let rep = worst_case_fidelity(&deph, 2, &mut rng, &WorstCaseOptions::default());
        assert!(close(rep.value, 0.5, 1e-6), "{rep:?}");
        assert_eq!(rep.method, WorstCaseMethod::Refined);
    }

    #[test]
    fn uncertainty_equality_case() {
        let rep =
            uncertainty_probe(&pauli_x(), &pauli_y(), &DensityOperator::basis_state(2, 0)).unwrap();
        assert!(close(rep.lhs, 1.0, 1e-12) && close(rep.rhs, 1.0, 1e-12));
        let same = uncertainty_probe(&pauli_x(), &pauli_x(), &DensityOperator::maximally_mixed(2))
            .unwrap();
        assert!(same.rhs == 0.0 && same.holds(0.0));
        let not_herm = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(uncertainty_probe(&not_herm, &pauli_x(), &DensityOperator::maximally_mixed(2)).is_err());
    }

    #[test]
    fn unitary_channel_preserves_fidelity() {
        let mut rng = Rng::new(2);
        let u = haar_unitary(&mut rng, 3);
        let rho = random_density(&mut rng, 3);
        let sigma = random_density(&mut rng, 3);
        let f0 = fidelity(&rho, &sigma).unwrap().value();
        let f1 = fidelity_matrices(&rho.matrix().conjugate_by(&u), &sigma.matrix().conjugate_by(&u)).unwrap();
        assert!(close(f0, f1, 1e-9));
    }

    #[test]
    fn probes_report_no_violations() {
        let rng = Rng::new(99);
        let tol = Tolerances::default();
        assert_eq!(monotonicity_probe(&rng, 2, 200, &tol).unwrap().violations, 0);
        let c = strong_concavity_probe(&rng, 2, 3, 200, &tol).unwrap();
        assert_eq!(c.printed.violations + c.standard.violations + c.joint.violations, 0);
        assert_eq!(uncertainty_suite(&rng, 3, 200, &tol).unwrap().violations, 0);
    }
}
