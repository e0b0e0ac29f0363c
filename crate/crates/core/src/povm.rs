//! Covariant POVMs generated from a seed operator, the instruments that
//! pair them with a covariant channel, and the rotating-polarizer family.
//!
//! Outcomes are pure states `p = u e₁`, so a POVM is fixed by its seed `Q₀`
//! through `Q(dp) = u Q₀ u* dp`. On the instrument ancilla `C^d ⊗ C^d` the
//! group acts as `W_u = ū ⊗ u`, the representation that makes the dilation
//! covariant: `V u = (u ⊗ W_u) V`.

use serde::Serialize;

use crate::channels::{build_isometry, CovariantChannel, StinespringIsometry};
use crate::error::{check_range, Error, Result};
use crate::haar::{haar_unitary, mc_average_conjugation, MatrixAccumulator, MatrixEstimate, Rng};
use crate::matcore::{
    basis_vector, complete_basis, herm_eig, inner, norm, ComplexMatrix, C64, ONE, ZERO,
};
use crate::tolerance::Tolerances;

/// Seed `P₀ = γd P_{e₁} + (1−γ) d/(d−1) P⊥_{e₁}` on `C^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedCd {
    d: usize,
    gamma: f64,
}

impl SeedCd {
    pub fn new(d: usize, gamma: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimMismatch(format!("seed needs d ≥ 2, got {d}")));
        }
        check_range("gamma", gamma, 0.0, 1.0)?;
        Ok(Self { d, gamma })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(λ, μ)`, the weights on `P_{e₁}` and its complement.
    pub fn weights(&self) -> (f64, f64) {
        let d = self.d as f64;
        (self.gamma * d, (1.0 - self.gamma) * d / (d - 1.0))
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let (lambda, mu) = self.weights();
        let mut diag = vec![mu; self.d];
        diag[0] = lambda;
        ComplexMatrix::real_diag(&diag)
    }
}

/// Closed form of `Tr(q Q(dp)) / dp` for pure `q` and `p`, as a function of
/// the overlap `Tr(pq)`.
pub fn response_density(s: &SeedCd, overlap: f64) -> f64 {
    let d = s.d as f64;
    let g = s.gamma;
    d * (d * g - 1.0) / (d - 1.0) * overlap + d * (1.0 - g) / (d - 1.0)
}

/// `Tr(q u P₀ u*)` evaluated with matrices, for any unitary with `u e₁ = p`.
pub fn response_density_matrix(s: &SeedCd, q: &[C64], p: &[C64]) -> f64 {
    let u = unitary_with_first_column(p);
    s.matrix().conjugate_by(&u).sandwich(q, q).re
}

/// A unitary whose first column is the unit vector `p`.
pub fn unitary_with_first_column(p: &[C64]) -> ComplexMatrix {
    let mut cols = vec![p.to_vec()];
    complete_basis(&mut cols, p.len());
    ComplexMatrix::from_columns(&cols)
}

/// Orthonormal basis of `C^d ⊗ C^d` adapted to the decomposition
/// `span{ψ₀} ⊕ span{ψ₀⊥} ⊕ e₁⊗C^{d−1} ⊕ C^{d−1}⊗e₁ ⊕ Ad(d−1)`.
///
/// `ψ₀ = Σ e_i⊗e_i / √d`, `ψ₀⊥ = (ψ₀ − √d e₁⊗e₁)/√(d−1)`, and `Ad(d−1)` is the
/// complement of `w = Σ_{i>1} e_i⊗e_i / √(d−1)` inside `span{e_i⊗e_j : i,j > 1}`.
#[derive(Debug, Clone)]
pub struct AdaptedBasis {
    d: usize,
    /// Columns are the basis vectors, in the block order above.
    pub matrix: ComplexMatrix,
}

impl AdaptedBasis {
    pub fn new(d: usize) -> Self {
        let n = d * d;
        let df = d as f64;
        let e = |i: usize, j: usize| basis_vector(n, i * d + j);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);

        let psi0: Vec<C64> = (0..n)
            .map(|r| if r / d == r % d { ONE / df.sqrt() } else { ZERO })
            .collect();
        let e11 = e(0, 0);
        let perp: Vec<C64> = psi0
            .iter()
            .zip(&e11)
            .map(|(a, b)| (a - b * df.sqrt()) / (df - 1.0).sqrt())
            .collect();
        cols.push(psi0);
        cols.push(perp);
        for j in 1..d {
            cols.push(e(0, j));
        }
        for i in 1..d {
            cols.push(e(i, 0));
        }

        // Ad(d−1): off-diagonal products first, then the traceless diagonal
        // combinations obtained by orthogonalizing e_i⊗e_i against w.
        for i in 1..d {
            for j in 1..d {
                if i != j {
                    cols.push(e(i, j));
                }
            }
        }
        let w: Vec<C64> = (0..n)
            .map(|r| {
                let (i, j) = (r / d, r % d);
                if i == j && i > 0 {
                    ONE / (df - 1.0).sqrt()
                } else {
                    ZERO
                }
            })
            .collect();
        let mut diag_family = vec![w];
        for i in 2..d {
            let mut v = e(i, i);
            for _ in 0..2 {
                for u in &diag_family {
                    let ov = inner(u, &v);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= ov * ui;
                    }
                }
            }
            let nv = norm(&v);
            let v: Vec<C64> = v.iter().map(|z| z / nv).collect();
            diag_family.push(v.clone());
            cols.push(v);
        }
        debug_assert_eq!(cols.len(), n);
        Self {
            d,
            matrix: ComplexMatrix::from_columns(&cols),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Column ranges of the blocks `(ψ₀, ψ₀⊥)`, `e₁⊗C^{d−1}`, `C^{d−1}⊗e₁`, `Ad(d−1)`.
    pub fn blocks(&self) -> [std::ops::Range<usize>; 4] {
        let d = self.d;
        [0..2, 2..d + 1, d + 1..2 * d, 2 * d..d * d]
    }

    /// Projector onto the span of a column range.
    pub fn projector(&self, cols: std::ops::Range<usize>) -> ComplexMatrix {
        let n = self.d * self.d;
        let mut p = ComplexMatrix::zeros(n, n);
        for k in cols {
            p = &p + &ComplexMatrix::projector(&self.matrix.column(k));
        }
        p
    }
}

/// Seed on the ancilla `C^d ⊗ C^d`:
///
/// `P₀ = (1 c; c̄ b) ⊕ e P_{e₁⊗C^{d−1}} ⊕ f P_{C^{d−1}⊗e₁} ⊕ g P_{Ad(d−1)}`,
///
/// where the 2×2 block acts on `(ψ₀, ψ₀⊥)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedP0 {
    d: usize,
    pub b: f64,
    pub c: C64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl SeedP0 {
    /// Validates `b/(d²−1) + (e+f)/(d+1) + g d(d−2)/(d²−1) = 1`, `|c|² ≤ b`,
    /// non-negativity, and `g = 0` when `d = 2`.
    pub fn new(d: usize, b: f64, c: C64, e: f64, f: f64, g: f64) -> Result<Self> {
        Self::with_tolerance(d, b, c, e, f, g, Tolerances::default().eig)
    }

    pub fn with_tolerance(d: usize, b: f64, c: C64, e: f64, f: f64, g: f64, tol: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimMismatch(format!("ancilla seed needs d ≥ 2, got {d}")));
        }
        let seed = Self { d, b, c, e, f, g };
        if [b, e, f, g].iter().any(|x| !x.is_finite()) || !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::NonFinite);
        }
        if [b, e, f, g].iter().any(|&x| x < -tol) {
            return Err(Error::ConstraintViolation(format!(
                "b, e, f, g must be non-negative (b={b}, e={e}, f={f}, g={g})"
            )));
        }
        if d == 2 && g.abs() > tol {
            return Err(Error::ConstraintViolation(
                "g must vanish for d = 2 (the Ad(d−1) block is empty)".into(),
            ));
        }
        if c.norm_sqr() > b + tol {
            return Err(Error::ConstraintViolation(format!(
                "|c|² = {} exceeds b = {b}",
                c.norm_sqr()
            )));
        }
        let r = seed.constraint_residual();
        if r.abs() > tol {
            return Err(Error::ConstraintViolation(format!(
                "normalization residual {r:.3e}"
            )));
        }
        Ok(seed)
    }

    /// Solves the normalization for `b` given the other parameters.
    pub fn solve_b(d: usize, c: C64, e: f64, f: f64, g: f64) -> Result<Self> {
        let df = d as f64;
        let n = df * df - 1.0;
        let b = n * (1.0 - (e + f) / (df + 1.0) - g * df * (df - 2.0) / n);
        Self::new(d, b, c, e, f, g)
    }

    /// Seed maximizing the estimation fidelity for the channel `ch`.
    ///
    /// `e = g = 0`, `b = c²`, `f = (d+1) − b/(d−1)`, and `c` takes the sign of
    /// `c₂` with magnitude `min(c*, √(d²−1))`, `c* = (d²−1)√(α−α²)/(α√(d+1))`.
    pub fn optimal(ch: &CovariantChannel) -> Self {
        let d = ch.d() as f64;
        let alpha = ch.alpha();
        let cap = (d * d - 1.0).sqrt();
        let mag = if alpha == 0.0 {
            cap
        } else {
            let star = (d * d - 1.0) * (alpha - alpha * alpha).sqrt() / (alpha * (d + 1.0).sqrt());
            star.min(cap)
        };
        let b = mag * mag;
        Self {
            d: ch.d(),
            b,
            c: C64::new(ch.branch().sign() * mag, 0.0),
            e: 0.0,
            f: ((d + 1.0) - b / (d - 1.0)).max(0.0),
            g: 0.0,
        }
    }

    /// Seed minimizing the estimation fidelity for the channel `ch`.
    ///
    /// `f = g = 0`, `b = c²`, `c` opposite in sign to `c₂` with magnitude
    /// `min(√(d+1)√(α−α²)/α, √(d²−1))`; `e` absorbs the normalization.
    pub fn minimizing(ch: &CovariantChannel) -> Self {
        let d = ch.d() as f64;
        let alpha = ch.alpha();
        let cap = (d * d - 1.0).sqrt();
        let mag = if alpha == 0.0 {
            cap
        } else {
            ((d + 1.0).sqrt() * (alpha - alpha * alpha).sqrt() / alpha).min(cap)
        };
        let b = mag * mag;
        Self {
            d: ch.d(),
            b,
            c: C64::new(-ch.branch().sign() * mag, 0.0),
            e: ((d + 1.0) * (1.0 - b / (d * d - 1.0))).max(0.0),
            f: 0.0,
            g: 0.0,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Left side of the normalization minus one.
    pub fn constraint_residual(&self) -> f64 {
        let d = self.d as f64;
        let n = d * d - 1.0;
        self.b / n + (self.e + self.f) / (d + 1.0) + self.g * d * (d - 2.0) / n - 1.0
    }
}

/// `P₀` in the standard product basis of `C^d ⊗ C^d`.
pub fn seed_p0_matrix(s: &SeedP0) -> ComplexMatrix {
    let basis = AdaptedBasis::new(s.d);
    seed_p0_matrix_in(s, &basis)
}

fn seed_p0_matrix_in(s: &SeedP0, basis: &AdaptedBasis) -> ComplexMatrix {
    let n = s.d * s.d;
    let [_, e_block, f_block, g_block] = basis.blocks();
    let mut block = ComplexMatrix::zeros(n, n);
    block[(0, 0)] = ONE;
    block[(0, 1)] = s.c;
    block[(1, 0)] = s.c.conj();
    block[(1, 1)] = C64::new(s.b, 0.0);
    for k in e_block {
        block[(k, k)] = C64::new(s.e, 0.0);
    }
    for k in f_block {
        block[(k, k)] = C64::new(s.f, 0.0);
    }
    for k in g_block {
        block[(k, k)] = C64::new(s.g, 0.0);
    }
    block.conjugate_by(&basis.matrix)
}

/// `W_u = ū ⊗ u`, the action on the instrument ancilla.
pub fn ancilla_rep(u: &ComplexMatrix) -> ComplexMatrix {
    u.conj().kron(u)
}

/// Exact group average `∫ W_u X W_u* du`.
///
/// `ū ⊗ u` splits into the trivial representation on `ψ₀` and an irreducible
/// one on its complement, so the average is `⟨ψ₀|X|ψ₀⟩ P_{ψ₀} + Tr(X P⊥)/(d²−1) P⊥`.
pub fn twirl_ancilla(x: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let n = d * d;
    let psi0 = AdaptedBasis::new(d).matrix.column(0);
    let p = ComplexMatrix::projector(&psi0);
    let perp = &ComplexMatrix::identity(n) - &p;
    let on_psi0 = x.sandwich(&psi0, &psi0);
    let rest = x.matmul(&perp).trace() / (n as f64 - 1.0);
    &p.scale(on_psi0) + &perp.scale(rest)
}

/// `Q₀ = V* (I ⊗ P₀) V`.
pub fn q0_from_seed(ch: &CovariantChannel, s: &SeedP0) -> Result<ComplexMatrix> {
    if ch.d() != s.d {
        return Err(Error::DimMismatch(format!(
            "channel on C^{} with ancilla seed for d = {}",
            ch.d(),
            s.d
        )));
    }
    Ok(q0_with(&build_isometry(ch), &seed_p0_matrix(s)))
}

fn q0_with(v: &StinespringIsometry, p0: &ComplexMatrix) -> ComplexMatrix {
    let lifted = ComplexMatrix::identity(v.d()).kron(p0);
    v.matrix().adjoint().matmul(&lifted).matmul(v.matrix())
}

/// Random unitary fixing the ray of `e₁`: a phase on `e₁` and a Haar unitary
/// on its complement.
pub fn random_stabilizer(rng: &mut Rng, d: usize) -> ComplexMatrix {
    let phase = C64::from_polar(1.0, rng.uniform_in(0.0, std::f64::consts::TAU));
    let rest = haar_unitary(rng, d - 1);
    ComplexMatrix::from_fn(d, d, |i, j| match (i, j) {
        (0, 0) => phase,
        (0, _) | (_, 0) => ZERO,
        _ => rest[(i - 1, j - 1)],
    })
}

/// `max ‖[P₀, W_u]‖_F` over `n` random stabilizer elements.
pub fn stabilizer_commutator(s: &SeedP0, rng: &mut Rng, n: usize) -> f64 {
    let p0 = seed_p0_matrix(s);
    (0..n)
        .map(|_| {
            let w = ancilla_rep(&random_stabilizer(rng, s.d));
            p0.commutator(&w).frobenius_norm()
        })
        .fold(0.0, f64::max)
}

/// A covariant channel and an ancilla seed sharing one dilation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Instrument {
    pub channel: CovariantChannel,
    pub seed: SeedP0,
}

impl Instrument {
    pub fn new(channel: CovariantChannel, seed: SeedP0) -> Result<Self> {
        if channel.d() != seed.d {
            return Err(Error::DimMismatch("instrument channel and seed dimensions differ".into()));
        }
        Ok(Self { channel, seed })
    }

    /// `M(a, du) / du = V* (a ⊗ W_u P₀ W_u*) V` at outcome `p = u e₁`.
    pub fn density(&self, a: &ComplexMatrix, u: &ComplexMatrix) -> ComplexMatrix {
        let v = build_isometry(&self.channel);
        let w = ancilla_rep(u);
        let f = seed_p0_matrix(&self.seed).conjugate_by(&w);
        let lifted = a.kron(&f);
        v.matrix().adjoint().matmul(&lifted).matmul(v.matrix())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstrumentReport {
    /// `‖V*(a ⊗ F_Ω)V − T(a)‖_F` with `F_Ω` the exact ancilla twirl of `P₀`.
    pub channel_residual: f64,
    /// `‖F_Ω − I‖_F`.
    pub twirl_residual: f64,
    /// `max ‖M(I, du)/du − u Q₀ u*‖_F` over the sampled outcomes.
    pub povm_residual: f64,
    /// `max ‖V u − (u ⊗ W_u) V‖_F` over the sampled unitaries.
    pub dilation_covariance_residual: f64,
    /// Monte Carlo `∫ u Q₀ u* du`.
    pub normalization: MatrixEstimate,
    pub normalization_within_3se: bool,
    /// Smallest Choi eigenvalue of `a ↦ M(a, A_k)` over a partition of the
    /// outcome space into `d` cells.
    pub partition_min_choi_eigenvalue: f64,
    pub passed: bool,
}

/// Reconstructs the channel and the POVM from the same dilation and seed and
/// checks that they agree with the direct definitions.
pub fn instrument_consistency(
    m: &Instrument,
    rng: &mut Rng,
    n: usize,
    tol: &Tolerances,
) -> Result<InstrumentReport> {
    let d = m.channel.d();
    let v = build_isometry(&m.channel);
    let p0 = seed_p0_matrix(&m.seed);
    let q0 = q0_with(&v, &p0);
    let f_omega = twirl_ancilla(&p0, d);
    let twirl_residual = f_omega.distance(&ComplexMatrix::identity(d * d));

    let mut channel_residual = 0.0f64;
    for _ in 0..8 {
        let a = crate::haar::ginibre(rng, d, d);
        let lifted = a.kron(&f_omega);
        let via_dilation = v.matrix().adjoint().matmul(&lifted).matmul(v.matrix());
        channel_residual = channel_residual.max(via_dilation.distance(&m.channel.apply_heisenberg(&a)?));
    }

    // Partition outcomes p = u e₁ by the basis vector with the largest overlap.
    let mut cells: Vec<MatrixAccumulator> = (0..d).map(|_| MatrixAccumulator::new(d * d, d * d)).collect();
    let mut povm_residual = 0.0f64;
    let mut covariance = 0.0f64;
    for _ in 0..n {
        let u = haar_unitary(rng, d);
        let w = ancilla_rep(&u);
        let f_u = p0.conjugate_by(&w);
        let lifted = ComplexMatrix::identity(d).kron(&f_u);
        let m_identity = v.matrix().adjoint().matmul(&lifted).matmul(v.matrix());
        povm_residual = povm_residual.max(m_identity.distance(&q0.conjugate_by(&u)));
        let lhs = v.matrix().matmul(&u);
        let rhs = u.kron(&w).matmul(v.matrix());
        covariance = covariance.max(lhs.distance(&rhs));
        let cell = (0..d)
            .max_by(|&i, &j| u[(i, 0)].norm().total_cmp(&u[(j, 0)].norm()))
            .unwrap_or(0);
        cells[cell].push(&f_u);
    }
    let mut min_choi = f64::INFINITY;
    for cell in &cells {
        let est = cell.estimate();
        // Sum over the cell, weighted by its share of the samples.
        let f_cell = est.mean.scale_real(est.n_samples as f64 / n.max(1) as f64);
        let choi = instrument_choi(&v, &f_cell);
        min_choi = min_choi.min(herm_eig(&choi)?.min());
    }

    let normalization = mc_average_conjugation(rng, &q0, n);
    let within = normalization.within(&ComplexMatrix::identity(d), 3.0);
    let passed = channel_residual <= tol.eig
        && twirl_residual <= tol.eig
        && povm_residual <= tol.eig
        && covariance <= tol.eig
        && within
        && min_choi >= -tol.psd;
    Ok(InstrumentReport {
        channel_residual,
        twirl_residual,
        povm_residual,
        dilation_covariance_residual: covariance,
        normalization,
        normalization_within_3se: within,
        partition_min_choi_eigenvalue: min_choi,
        passed,
    })
}

/// Choi matrix `Σ_ij E_ij ⊗ M(E_ij)` of `a ↦ V*(a ⊗ F)V`.
fn instrument_choi(v: &StinespringIsometry, f: &ComplexMatrix) -> ComplexMatrix {
    let d = v.d();
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let eij = ComplexMatrix::outer(&basis_vector(d, i), &basis_vector(d, j));
            let image = v.matrix().adjoint().matmul(&eij.kron(f)).matmul(v.matrix());
            choi = &choi + &eij.kron(&image);
        }
    }
    choi.hermitian_part()
}

/// Qubit instrument that, with probability `λ`, measures the polarization
/// along a uniformly random direction and otherwise leaves the state alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotatingPolarizer {
    lambda_mix: f64,
}

impl RotatingPolarizer {
    pub fn new(lambda_mix: f64) -> Result<Self> {
        check_range("lambda", lambda_mix, 0.0, 1.0)?;
        Ok(Self { lambda_mix })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_mix
    }

    /// POVM seed `Q₀ = 2λ P_{e₁} + (1−λ) I = diag(1+λ, 1−λ)`.
    pub fn seed(&self) -> ComplexMatrix {
        let l = self.lambda_mix;
        ComplexMatrix::real_diag(&[1.0 + l, 1.0 - l])
    }

    /// `T(a) = 2λ ∫ p a p dp + (1−λ) a`, with the integral evaluated exactly
    /// on the six states of three mutually unbiased bases (a 2-design).
    pub fn apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let l = self.lambda_mix;
        let design = qubit_two_design();
        let mut avg = ComplexMatrix::zeros(2, 2);
        for p in &design {
            let proj = ComplexMatrix::projector(p);
            avg = &avg + &proj.matmul(a).matmul(&proj);
        }
        let avg = avg.scale_real(1.0 / design.len() as f64);
        &avg.scale_real(2.0 * l) + &a.scale_real(1.0 - l)
    }

    /// `T(a) = (1 − 2λ/3) a + (λ/3) Tr(a) I`.
    pub fn apply_closed(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let l = self.lambda_mix;
        &a.scale_real(1.0 - 2.0 * l / 3.0) + &ComplexMatrix::identity(2).scale(a.trace() * (l / 3.0))
    }

    /// The covariant channel with the same action; `α = λ/2`.
    pub fn equivalent_channel(&self) -> CovariantChannel {
        CovariantChannel::new(2, self.lambda_mix / 2.0, crate::channels::Branch::Plus)
            .expect("λ/2 lies in [0, 1/2]")
    }

    /// `γ = Tr(P_{e₁} Q₀) / d = (1+λ)/2`.
    pub fn gamma(&self) -> f64 {
        self.seed()[(0, 0)].re / 2.0
    }
}

/// `(F_T, F_E) = (1 − λ/3, (3+λ)/6)`.
pub fn rotating_polarizer_point(r: &RotatingPolarizer) -> (f64, f64) {
    let l = r.lambda_mix;
    (1.0 - l / 3.0, (3.0 + l) / 6.0)
}

/// Eigenvectors of σ_x, σ_y, σ_z.
pub fn qubit_two_design() -> Vec<Vec<C64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    vec![
        vec![ONE, ZERO],
        vec![ZERO, ONE],
        vec![r(h), r(h)],
        vec![r(h), r(-h)],
        vec![r(h), C64::new(0.0, h)],
        vec![r(h), C64::new(0.0, -h)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::Branch;
    use crate::haar::haar_pure_state;

    fn ch(d: usize, alpha: f64) -> CovariantChannel {
        CovariantChannel::new(d, alpha, Branch::Plus).unwrap()
    }

    #[test]
    fn seed_cd_special_values() {
        let s = SeedCd::new(3, 1.0 / 3.0).unwrap();
        assert!(s.matrix().distance(&ComplexMatrix::identity(3)) < 1e-15);
        assert_eq!(SeedCd::new(2, 1.0).unwrap().matrix(), ComplexMatrix::real_diag(&[2.0, 0.0]));
        assert_eq!(
            SeedCd::new(3, 1.0).unwrap().matrix(),
            ComplexMatrix::real_diag(&[3.0, 0.0, 0.0])
        );
        assert!(SeedCd::new(2, 1.1).is_err());
        assert!((response_density(&s, 0.3) - 1.0).abs() < 1e-15);
        assert!((response_density(&SeedCd::new(2, 1.0).unwrap(), 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn response_density_closed_matches_matrix() {
        let mut rng = Rng::new(1);
        for d in [2, 3, 4] {
            let s = SeedCd::new(d, 0.7).unwrap();
            for _ in 0..10 {
                let q = haar_pure_state(&mut rng, d);
                let p = haar_pure_state(&mut rng, d);
                let ov = inner(&p, &q).norm_sqr();
                let a = response_density(&s, ov);
                let b = response_density_matrix(&s, &q, &p);
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn adapted_basis_is_unitary() {
        for d in 2..=5 {
            let b = AdaptedBasis::new(d);
            let e = b.matrix.adjoint().matmul(&b.matrix).distance(&ComplexMatrix::identity(d * d));
            assert!(e < 1e-13, "d={d}: {e}");
        }
    }

    #[test]
    fn optimal_qubit_seed_standard_basis() {
        let s = SeedP0::optimal(&ch(2, 0.25));
        assert!((s.b - 3.0).abs() < 1e-12 && (s.c.re - 3f64.sqrt()).abs() < 1e-12);
        let r3 = 3f64.sqrt();
        let golden = ComplexMatrix::from_real_rows(&[
            &[2.0 - r3, 0.0, 0.0, -1.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[-1.0, 0.0, 0.0, 2.0 + r3],
        ]);
        assert!(seed_p0_matrix(&s).distance(&golden) < 1e-12);
    }

    #[test]
    fn seed_constraints() {
        let d = 3usize;
        // b = 1, c = 0, e = f = g = t with the normalization solved for t.
        let t = (1.0 - 1.0 / 8.0) / (2.0 / 4.0 + 3.0 / 8.0);
        let s = SeedP0::new(d, 1.0, ZERO, t, t, t).unwrap();
        assert!(herm_eig(&seed_p0_matrix(&s)).unwrap().min() > -1e-12);
        assert!(SeedP0::new(2, 1.0, C64::new(1.5, 0.0), 1.0, 1.0, 0.0).is_err());
        assert!(SeedP0::new(2, 3.0, ZERO, 0.0, 0.0, 0.5).is_err());
        assert!(SeedP0::new(2, 1.0, ZERO, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn seed_commutes_with_stabilizer_and_twirls_to_identity() {
        let mut rng = Rng::new(7);
        for d in [2, 3] {
            let s = SeedP0::solve_b(d, C64::new(0.3, 0.4), 0.5, 0.7, if d > 2 { 0.2 } else { 0.0 })
                .unwrap();
            assert!(stabilizer_commutator(&s, &mut rng, 20) < 1e-12);
            let tw = twirl_ancilla(&seed_p0_matrix(&s), d);
            assert!(tw.distance(&ComplexMatrix::identity(d * d)) < 1e-12);
        }
    }

    #[test]
    fn q0_qubit_diagonal_closed_form() {
        let (b, e, f) = (1.2, 0.3, 0.0);
        let f = f + 3.0 - b - e;
        let c = 0.8;
        let s = SeedP0::new(2, b, C64::new(c, 0.0), e, f, 0.0).unwrap();
        for alpha in [0.0, 0.2, 0.5, 0.9] {
            let q0 = q0_from_seed(&ch(2, alpha), &s).unwrap();
            let root = (alpha - alpha * alpha).sqrt();
            let r3 = 3f64.sqrt();
            let expect = ComplexMatrix::real_diag(&[
                1.0 - alpha + 2.0 * c * root / r3 + alpha * (b + 2.0 * f) / 3.0,
                1.0 - alpha - 2.0 * c * root / r3 + alpha * (b + 2.0 * e) / 3.0,
            ]);
            assert!(q0.distance(&expect) < 1e-12, "alpha={alpha}");
        }
    }

    #[test]
    fn optimal_qubit_q0() {
        for k in 0..=10 {
            let alpha = 0.05 * k as f64;
            let c = ch(2, alpha);
            let q0 = q0_from_seed(&c, &SeedP0::optimal(&c)).unwrap();
            let r = 2.0 * (alpha - alpha * alpha).sqrt();
            assert!(q0.distance(&ComplexMatrix::real_diag(&[1.0 + r, 1.0 - r])) < 1e-12);
        }
    }

    #[test]
    fn instrument_is_consistent() {
        let mut rng = Rng::new(3);
        let tol = Tolerances::default();
        for d in [2, 3] {
            let c = ch(d, 0.3);
            let m = Instrument::new(c, SeedP0::optimal(&c)).unwrap();
            let rep = instrument_consistency(&m, &mut rng, 2000, &tol).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn rotating_polarizer_channel_and_points() {
        let mut rng = Rng::new(4);
        for l in [0.0, 0.3, 0.5, 1.0] {
            let r = RotatingPolarizer::new(l).unwrap();
            let a = crate::haar::ginibre(&mut rng, 2, 2);
            assert!(r.apply(&a).distance(&r.apply_closed(&a)) < 1e-12);
            let t = r.equivalent_channel();
            assert!(r.apply(&a).distance(&t.apply_heisenberg(&a).unwrap()) < 1e-12);
            let (ft, fe) = rotating_polarizer_point(&r);
            assert!((ft - t.wc_fidelity_closed()).abs() < 1e-15);
            assert!((fe - (r.gamma() + 1.0) / 3.0).abs() < 1e-15);
        }
        let (ft, fe) = rotating_polarizer_point(&RotatingPolarizer::new(0.5).unwrap());
        assert!((ft - 5.0 / 6.0).abs() < 1e-15 && (fe - 7.0 / 12.0).abs() < 1e-15);
        assert!((fe - (1.0 - ft / 2.0)).abs() < 1e-15);
        assert!(RotatingPolarizer::new(-0.1).is_err());
    }
}
