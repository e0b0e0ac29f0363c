//! Two applications of the covariant qubit dilation: asymmetric Pauli
//! cloning, and sending a qubit through a lossy line with a classical backup.

use serde::Serialize;

use crate::channels::{build_isometry, Branch, CovariantChannel};
use crate::error::{check_range, Error, Result};
use crate::matcore::{pauli_x, pauli_z, ComplexMatrix, DensityOperator, Subsystem, C64, ZERO};
use crate::optim::{bisect, golden_section};
use crate::povm::{qubit_two_design, SeedP0};
use crate::tradeoff::{estimation_fidelity, gamma_from_matrices, gamma_max, transmission_fidelity};

/// Bell basis in the fixed order `(φ⁺, φ⁻, ψ⁺, ψ⁻)` with
/// `ψ⁻ = (|01⟩ − |10⟩)/√2`.
pub fn bell_basis() -> [Vec<C64>; 4] {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [
        vec![h, ZERO, ZERO, h],
        vec![h, ZERO, ZERO, -h],
        vec![ZERO, h, h, ZERO],
        vec![ZERO, h, -h, ZERO],
    ]
}

pub const BELL_LABELS: [&str; 4] = ["phi+", "phi-", "psi+", "psi-"];

/// Two-qubit state diagonal in the Bell basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellMixture {
    pub weights: [f64; 4],
    /// Largest off-diagonal Bell-basis element of the state it was read from.
    pub off_diagonal: f64,
}

impl BellMixture {
    pub fn from_state(rho: &ComplexMatrix) -> Result<Self> {
        if rho.rows() != 4 || rho.cols() != 4 {
            return Err(Error::DimMismatch("Bell mixture needs a 4x4 state".into()));
        }
        let basis = bell_basis();
        let mut weights = [0.0; 4];
        let mut off = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let v = rho.sandwich(&basis[i], &basis[j]);
                if i == j {
                    weights[i] = v.re;
                } else {
                    off = off.max(v.norm());
                }
            }
        }
        Ok(Self {
            weights,
            off_diagonal: off,
        })
    }
}

/// `ρ ↦ (1−p)ρ + p_x σ_x ρ σ_x + p_y (σ_xσ_z) ρ (σ_zσ_x) + p_z σ_z ρ σ_z`.
pub fn pauli_channel_apply(rho: &DensityOperator, probs: (f64, f64, f64)) -> Result<DensityOperator> {
    if rho.dim() != 2 {
        return Err(Error::NotQubit(rho.dim()));
    }
    let (px, py, pz) = probs;
    for (name, v) in [("p_x", px), ("p_y", py), ("p_z", pz)] {
        check_range(name, v, 0.0, 1.0)?;
    }
    check_range("p_x+p_y+p_z", px + py + pz, 0.0, 1.0 + 1e-12)?;
    let x = pauli_x();
    let z = pauli_z();
    let xz = x.matmul(&z);
    let m = rho.matrix();
    let out = &(&m.scale_real(1.0 - px - py - pz) + &m.conjugate_by(&x).scale_real(px))
        + &(&m.conjugate_by(&xz).scale_real(py) + &m.conjugate_by(&z).scale_real(pz));
    DensityOperator::new(out)
}

/// Asymmetric `1 → 2` qubit cloner realized by the covariant dilation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PauliCloner {
    pub alpha: f64,
    pub branch: Branch,
}

impl PauliCloner {
    pub fn new(alpha: f64, branch: Branch) -> Result<Self> {
        check_range("alpha", alpha, 0.0, 1.0)?;
        Ok(Self { alpha, branch })
    }

    pub fn channel(&self) -> CovariantChannel {
        CovariantChannel::new(2, self.alpha, self.branch).expect("validated alpha")
    }

    /// `(ν, μ) = (c₁ + c₂/√3, −2c₂/√3)`.
    pub fn nu_mu(&self) -> (f64, f64) {
        let ch = self.channel();
        let r3 = 3f64.sqrt();
        (ch.c1() + ch.c2() / r3, -2.0 * ch.c2() / r3)
    }

    /// `μ² + μν + ν² − 1`.
    pub fn normalization_residual(&self) -> f64 {
        let (nu, mu) = self.nu_mu();
        mu * mu + mu * nu + nu * nu - 1.0
    }
}

/// `|Φ⟩ = (I_R ⊗ V)|φ⁺⟩` on `R ⊗ A ⊗ B ⊗ C`, index `8r + 4a + 2b + c`.
///
/// `A` is the system output of the dilation, `C` its first ancilla slot and
/// `B` its second, so that `V` maps `ψ` to `ν ψ⊗φ⁺_{BC}`-type terms plus
/// `μ φ⁺_{AC} ⊗ ψ_B` terms.
pub fn cloner_output_state(c: &PauliCloner) -> Vec<C64> {
    let v = build_isometry(&c.channel());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut phi = vec![ZERO; 16];
    for r in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    // Dilation row index s·4 + j·2 + k with s = a, j = c, k = b.
                    phi[8 * r + 4 * a + 2 * b + cc] = v.matrix()[(a * 4 + cc * 2 + b, r)] * h;
                }
            }
        }
    }
    phi
}

/// Reorders qubits: output qubit `i` is input qubit `order[i]`.
pub fn permute_qubits(state: &[C64], order: [usize; 4]) -> Vec<C64> {
    let mut out = vec![ZERO; 16];
    for (idx, amp) in state.iter().enumerate() {
        let bits = [(idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1];
        let new_idx = (0..4).fold(0, |acc, i| (acc << 1) | bits[order[i]]);
        out[new_idx] = *amp;
    }
    out
}

/// Qubit positions in `|Φ⟩_RABC`.
pub const R: usize = 0;
pub const A: usize = 1;
pub const B: usize = 2;
pub const C: usize = 3;

/// Amplitudes `⟨β_i ⊗ β_j | Φ⟩` for the split `(R, x) ; (y, z)`, as a 4×4
/// table over the Bell basis.
pub fn double_bell_amplitudes(phi: &[C64], x: usize, y: usize, z: usize) -> [[f64; 4]; 4] {
    let reordered = permute_qubits(phi, [R, x, y, z]);
    let basis = bell_basis();
    let mut table = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut amp = ZERO;
            for p in 0..4 {
                for q in 0..4 {
                    amp += (basis[i][p] * basis[j][q]).conj() * reordered[4 * p + q];
                }
            }
            // The dilation is real, so every amplitude is real.
            table[i][j] = amp.re;
        }
    }
    table
}

/// Reduced state of qubits `(x, y)` of `|Φ⟩_RABC`.
pub fn pair_state(phi: &[C64], x: usize, y: usize) -> Result<ComplexMatrix> {
    let others: Vec<usize> = (0..4).filter(|q| *q != x && *q != y).collect();
    let reordered = permute_qubits(phi, [x, y, others[0], others[1]]);
    ComplexMatrix::projector(&reordered).partial_trace(Subsystem::A, (4, 4))
}

/// Published amplitude rows for the three splits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeRows {
    pub rabc: [f64; 4],
    pub rbac: [f64; 4],
    pub rcab: [f64; 4],
}

pub fn table_rows_printed(nu: f64, mu: f64) -> AmplitudeRows {
    AmplitudeRows {
        rabc: [nu + mu / 2.0, mu / 2.0, mu / 2.0, mu / 2.0],
        rbac: [0.5 * (nu + 2.0 * mu), nu / 2.0, nu / 2.0, nu / 2.0],
        rcab: [0.5 * (nu + mu), 0.5 * (nu + mu), 0.5 * (nu + mu), 0.5 * (nu - mu)],
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CloneFidelities {
    pub alpha: f64,
    pub branch: Branch,
    pub f_a: f64,
    pub f_b: f64,
    pub f_a_state: f64,
    pub f_b_state: f64,
}

/// `F_A = 1 − 2α/3`, `F_B = ½ + α/3 − sgn(c₂)·√(α−α²)/√3`.
pub fn clone_fidelities_closed(c: &PauliCloner) -> (f64, f64) {
    let a = c.alpha;
    let f_a = 1.0 - 2.0 * a / 3.0;
    let f_b = 0.5 + a / 3.0 - c.branch.sign() * (a - a * a).max(0.0).sqrt() / 3f64.sqrt();
    (f_a, f_b)
}

/// Clone fidelities from explicit states: each input of a qubit 2-design is
/// pushed through the dilation, the output qubit is isolated by partial
/// trace and compared with the input. The minimum over inputs is returned;
/// covariance makes all inputs agree.
pub fn clone_fidelities_from_state(c: &PauliCloner) -> Result<(f64, f64)> {
    let v = build_isometry(&c.channel());
    let mut f_a = f64::INFINITY;
    let mut f_b = f64::INFINITY;
    for psi in qubit_two_design() {
        let out = ComplexMatrix::projector(&v.matrix().apply(&psi));
        // Dilation output order is (A, C, B).
        let rho_a = out.partial_trace(Subsystem::A, (2, 4))?;
        let rho_cb = out.partial_trace(Subsystem::B, (2, 4))?;
        let rho_b = rho_cb.partial_trace(Subsystem::B, (2, 2))?;
        f_a = f_a.min(rho_a.sandwich(&psi, &psi).re);
        f_b = f_b.min(rho_b.sandwich(&psi, &psi).re);
    }
    Ok((f_a, f_b))
}

pub fn clone_fidelities(c: &PauliCloner) -> Result<CloneFidelities> {
    let (f_a, f_b) = clone_fidelities_closed(c);
    let (f_a_state, f_b_state) = clone_fidelities_from_state(c)?;
    Ok(CloneFidelities {
        alpha: c.alpha,
        branch: c.branch,
        f_a,
        f_b,
        f_a_state,
        f_b_state,
    })
}

/// Full record of one cloner, including the printed intermediate forms and
/// their residuals against the explicit state.
#[derive(Debug, Clone, Serialize)]
pub struct ClonerReport {
    pub alpha: f64,
    pub branch: Branch,
    pub nu: f64,
    pub mu: f64,
    pub normalization_residual: f64,
    pub fidelities: CloneFidelities,
    pub rho_ra: BellMixture,
    pub rho_rb: BellMixture,
    pub rho_rc: BellMixture,
    pub rho_bc: BellMixture,
    /// Amplitudes on `β_k ⊗ β_k` for each split, from the explicit state.
    pub computed_rows: AmplitudeRows,
    /// Largest `|⟨β_i ⊗ β_j|Φ⟩|` with `i ≠ j` over the three splits.
    pub off_diagonal_amplitude: f64,
    /// Largest signed difference between the printed and computed rows.
    pub row_residual_signed: AmplitudeRows,
    /// Same with absolute values on both sides (Bell-state phase conventions).
    pub row_residual_unsigned: AmplitudeRows,
    /// `½(ν+2μ)²` as printed for the `φ⁺` weight of `ρ_RB`, minus the computed weight.
    pub printed_rb_weight_residual: f64,
    /// `¾ − α/2 ± (√3/2)√(α−α²)` as printed for `1−p'`, minus the computed weight,
    /// for both signs.
    pub printed_one_minus_p_prime_residual: [f64; 2],
}

pub fn cloner_report(c: &PauliCloner) -> Result<ClonerReport> {
    let (nu, mu) = c.nu_mu();
    let phi = cloner_output_state(c);
    let splits = [(A, B, C), (B, A, C), (C, A, B)];
    let tables: Vec<[[f64; 4]; 4]> = splits
        .iter()
        .map(|&(x, y, z)| double_bell_amplitudes(&phi, x, y, z))
        .collect();
    let diag = |t: &[[f64; 4]; 4]| [t[0][0], t[1][1], t[2][2], t[3][3]];
    let mut off = 0.0f64;
    for t in &tables {
        for (i, row) in t.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    off = off.max(v.abs());
                }
            }
        }
    }
    let computed = AmplitudeRows {
        rabc: diag(&tables[0]),
        rbac: diag(&tables[1]),
        rcab: diag(&tables[2]),
    };
    let printed = table_rows_printed(nu, mu);
    let diff = |p: [f64; 4], q: [f64; 4], abs: bool| {
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = if abs { p[k].abs() - q[k].abs() } else { p[k] - q[k] };
        }
        out
    };
    let residual = |abs: bool| AmplitudeRows {
        rabc: diff(printed.rabc, computed.rabc, abs),
        rbac: diff(printed.rbac, computed.rbac, abs),
        rcab: diff(printed.rcab, computed.rcab, abs),
    };

    let rho_rb = BellMixture::from_state(&pair_state(&phi, R, B)?)?;
    let a = c.alpha;
    let root = (a - a * a).max(0.0).sqrt();
    let printed_1mp = [
        0.75 - 0.5 * a + 0.5 * 3f64.sqrt() * root,
        0.75 - 0.5 * a - 0.5 * 3f64.sqrt() * root,
    ];
    Ok(ClonerReport {
        alpha: c.alpha,
        branch: c.branch,
        nu,
        mu,
        normalization_residual: c.normalization_residual(),
        fidelities: clone_fidelities(c)?,
        rho_ra: BellMixture::from_state(&pair_state(&phi, R, A)?)?,
        rho_rb,
        rho_rc: BellMixture::from_state(&pair_state(&phi, R, C)?)?,
        rho_bc: BellMixture::from_state(&pair_state(&phi, B, C)?)?,
        computed_rows: computed,
        off_diagonal_amplitude: off,
        row_residual_signed: residual(false),
        row_residual_unsigned: residual(true),
        printed_rb_weight_residual: 0.5 * (nu + 2.0 * mu).powi(2) - rho_rb.weights[0],
        printed_one_minus_p_prime_residual: printed_1mp.map(|v| v - rho_rb.weights[0]),
    })
}

/// `α` in `[0, ½]` where `F_A = F_B` on the given branch, by bisection on the
/// closed forms. `None` when the branch never crosses.
pub fn symmetric_point(branch: Branch, tol: f64) -> Option<f64> {
    let gap = |a: f64| {
        let (fa, fb) = clone_fidelities_closed(&PauliCloner { alpha: a, branch });
        fa - fb
    };
    bisect(gap, 0.0, 0.5, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransmissionReport {
    pub p: f64,
    /// `½(1 − 2p/√(1+p(5p−2)))`, the stationary point of `F_cl(α)`.
    pub alpha_star: f64,
    /// `½(1 − p/√(1+p(5p−2)))`, the form printed alongside the closed `F_cl`.
    pub alpha_star_printed: f64,
    /// Numeric maximizer of `F_cl(α)` over `[0, ½]`.
    pub alpha_star_numeric: f64,
    /// `(3 + p + √(1+p(5p−2)))/6`.
    pub f_cl: f64,
    pub f_cl_numeric: f64,
    /// `F_cl(α)` at the printed `α*`.
    pub f_cl_at_printed_alpha: f64,
    /// `p F_T + (1−p) F_E` from the optimal instrument built with matrices at `α*`.
    pub f_cl_instrument: f64,
    /// `(1+p)/2`: send the qubit unprotected.
    pub f_dir: f64,
    /// `2/3 + p/3`: with quantum memory on the sender side.
    pub f_qm: f64,
    /// `2/3`: measure and send only the classical estimate.
    pub f_meas: f64,
}

/// `F_cl(α) = p(1 − 2α/3) + (1−p)(3/2 + √(α−α²))/3` for the optimal qubit
/// instrument at strength `α ≤ ½`.
pub fn transmission_objective(p: f64, alpha: f64) -> f64 {
    p * transmission_fidelity(alpha, 2) + (1.0 - p) * estimation_fidelity(gamma_max(alpha, 2), 2)
}

/// `dF_cl/dα` on `(0, ½]`.
fn transmission_slope(p: f64, alpha: f64) -> f64 {
    let root = (alpha - alpha * alpha).max(0.0).sqrt();
    -2.0 * p / 3.0 + (1.0 - p) / 3.0 * (1.0 - 2.0 * alpha) / (2.0 * root)
}

pub fn transmission_optimize(p: f64) -> Result<TransmissionReport> {
    check_range("p", p, 0.0, 1.0)?;
    let s = (1.0 + p * (5.0 * p - 2.0)).sqrt();
    let alpha_star = 0.5 * (1.0 - 2.0 * p / s);
    let alpha_star_printed = 0.5 * (1.0 - p / s);
    let f_cl = (3.0 + p + s) / 6.0;

    // Maximizer as the root of the derivative. The objective is concave, so
    // the root is unique. The slope is unbounded at 0 unless p = 1.
    let alpha_star_numeric = if p >= 1.0 {
        0.0
    } else if transmission_slope(p, 0.5) >= 0.0 {
        0.5
    } else {
        bisect(|a| transmission_slope(p, a), f64::MIN_POSITIVE, 0.5, 1e-15).unwrap_or(0.0)
    };
    let (_, neg) = golden_section(|a| -transmission_objective(p, a), 0.0, 0.5, 1e-12);
    let f_cl_numeric = (-neg).max(transmission_objective(p, alpha_star_numeric));

    let ch = CovariantChannel::new(2, alpha_star.clamp(0.0, 0.5), Branch::Plus)?;
    let gamma = gamma_from_matrices(&ch, &SeedP0::optimal(&ch))?;
    let f_cl_instrument = p * ch.wc_fidelity_closed() + (1.0 - p) * estimation_fidelity(gamma, 2);

    Ok(TransmissionReport {
        p,
        alpha_star,
        alpha_star_printed,
        alpha_star_numeric,
        f_cl,
        f_cl_numeric,
        f_cl_at_printed_alpha: transmission_objective(p, alpha_star_printed),
        f_cl_instrument,
        f_dir: (1.0 + p) / 2.0,
        f_qm: 2.0 / 3.0 + p / 3.0,
        f_meas: 2.0 / 3.0,
    })
}

pub fn strategy_table(p_grid: &[f64]) -> Result<Vec<TransmissionReport>> {
    p_grid.iter().map(|&p| transmission_optimize(p)).collect()
}

/// Identity of the qubit depolarizing Pauli channel and `T_α` at `α = p`.
pub fn depolarizing_matches_covariant(rho: &DensityOperator, p: f64) -> Result<f64> {
    let pauli = pauli_channel_apply(rho, (p / 3.0, p / 3.0, p / 3.0))?;
    let cov = CovariantChannel::new(2, p, Branch::Plus)?.apply_schrodinger(rho.matrix())?;
    Ok(pauli.matrix().distance(&cov))
}
