//! Verification suites that turn each module's identities into named checks
//! with a value, a target and a tolerance. The CLI serializes these reports.

use serde::Serialize;

use crate::apps::{
    clone_fidelities, cloner_report, strategy_table, symmetric_point, PauliCloner,
};
use crate::channels::{build_isometry, kraus_from_isometry, kraus_heisenberg, Branch, CovariantChannel};
use crate::error::Result;
use crate::haar::{
    haar_pure_state, haar_unitary, mc_average_conjugation, overlap, par_streams, random_hermitian,
    McEstimate, Rng, ScalarAccumulator,
};
use crate::matcore::{basis_vector, ComplexMatrix, DensityOperator, C64};
use crate::metrics::{
    fidelity, monotonicity_probe, pure_fidelity, random_probabilities, strong_concavity_probe,
    uhlmann_check, uncertainty_suite, worst_case_fidelity, ProbeReport, WorstCaseOptions,
};
use crate::povm::{
    instrument_consistency, q0_from_seed, rotating_polarizer_point, seed_p0_matrix, Instrument,
    RotatingPolarizer, SeedP0,
};
use crate::tolerance::Tolerances;
use crate::tradeoff::{
    alpha_from_ft, estimation_fidelity, gamma_extreme_unreduced, gamma_from_matrices, gamma_max,
    gamma_min, gamma_of, region2_lhs, region2_lhs_qubit, region2_rhs, tradeoff_curves_to,
    werner_bound, Extreme, GammaParams,
};

/// Child streams used by every Monte Carlo estimate. Fixed so that results
/// do not depend on the worker count.
pub const STREAMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// `|value − target| ≤ tolerance`.
    pub fn close(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target,
            tolerance,
            passed: (value - target).abs() <= tolerance,
        }
    }

    /// A residual or error that must stay at or below `bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: 0.0,
            tolerance: bound,
            passed: value <= bound,
        }
    }

    /// A quantity that must stay at or above `target − tolerance`.
    pub fn at_least(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target,
            tolerance,
            passed: value >= target - tolerance,
        }
    }

    /// Monte Carlo estimate within `k` standard errors of the target.
    pub fn mc(name: impl Into<String>, est: &McEstimate, target: f64, k: f64) -> Self {
        Self {
            name: name.into(),
            value: est.mean,
            target,
            tolerance: k * est.std_error,
            passed: est.within(target, k),
        }
    }

    /// Randomized property with zero allowed violations.
    pub fn probe(name: impl Into<String>, rep: &ProbeReport) -> Self {
        Self {
            name: name.into(),
            value: rep.violations as f64,
            target: 0.0,
            tolerance: 0.0,
            passed: rep.violations == 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub d: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SuiteReport {
    pub fn new(suite: &str, d: usize, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            suite: suite.to_string(),
            d,
            seed,
            checks,
            passed,
            error: None,
        }
    }

    /// A suite that stopped on an error before finishing its checks.
    pub fn errored(suite: &str, d: usize, seed: u64, err: &crate::Error) -> Self {
        Self {
            suite: suite.to_string(),
            d,
            seed,
            checks: Vec::new(),
            passed: false,
            error: Some(err.to_string()),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// `n` equally spaced points on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn merged(parts: Vec<ScalarAccumulator>) -> McEstimate {
    let mut acc = ScalarAccumulator::default();
    for p in &parts {
        acc.merge(p);
    }
    acc.estimate()
}

/// Haar estimates of `d·E Tr(pq)` and `d·E Tr(pq)²` for a fixed pure `q`.
pub fn overlap_moments(rng: &Rng, d: usize, samples: usize) -> (McEstimate, McEstimate) {
    let q = basis_vector(d, 0);
    let parts = par_streams(rng, samples, STREAMS, |r, count| {
        let mut first = ScalarAccumulator::default();
        let mut second = ScalarAccumulator::default();
        for _ in 0..count {
            let t = overlap(&haar_pure_state(r, d), &q);
            first.push(d as f64 * t);
            second.push(d as f64 * t * t);
        }
        (first, second)
    });
    let (first, second): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    (merged(first), merged(second))
}

pub fn haar_suite(d: usize, samples: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let rng = Rng::new(seed);
    let (first, second) = overlap_moments(&rng.child(0), d, samples);
    let df = d as f64;
    let mut checks = vec![
        Check::mc("d*E[Tr(pq)]", &first, 1.0, 3.0),
        Check::mc("d*E[Tr(pq)^2]", &second, 2.0 / (df + 1.0), 3.0),
    ];

    let mut r = rng.child(1);
    let mut unitarity = 0.0f64;
    for _ in 0..64 {
        let u = haar_unitary(&mut r, d);
        unitarity = unitarity.max(u.adjoint().matmul(&u).distance(&ComplexMatrix::identity(d)));
    }
    checks.push(Check::at_most("haar unitarity residual", unitarity, tol.eig));

    let a = random_hermitian(&mut r, d);
    let avg = mc_average_conjugation(&mut r, &a, samples.min(20_000));
    let target = ComplexMatrix::identity(d).scale(a.trace() / df);
    checks.push(Check {
        name: "E[u a u*] = Tr(a)/d I (Frobenius 3 SE)".into(),
        value: avg.mean.distance(&target),
        target: 0.0,
        tolerance: 3.0 * avg.frobenius_std_error(),
        passed: avg.within(&target, 3.0),
    });
    Ok(SuiteReport::new("haar", d, seed, checks))
}

pub fn fidelity_suite(d: usize, trials: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let rng = Rng::new(seed);
    let mut checks = vec![
        Check::probe("monotonicity under channels", &monotonicity_probe(&rng.child(0), d, trials, tol)?),
    ];
    let conc = strong_concavity_probe(&rng.child(1), d, 3, trials, tol)?;
    checks.push(Check::probe("joint concavity", &conc.joint));
    checks.push(Check::probe("strong concavity", &conc.standard));
    checks.push(Check::probe("strong concavity, product weights", &conc.printed));
    checks.push(Check::probe("uncertainty relation", &uncertainty_suite(&rng.child(2), d, trials, tol)?));

    let mut r = rng.child(3);
    let mut upper_violations = 0usize;
    let mut worst_gap = 0.0f64;
    let mut symmetry = 0.0f64;
    let mut pure_gap = 0.0f64;
    let mut range_violations = 0usize;
    for _ in 0..trials {
        let rho = crate::haar::random_density(&mut r, d);
        let sigma = crate::haar::random_density(&mut r, d);
        let rep = uhlmann_check(&rho, &sigma, &mut r, 4, tol)?;
        if !rep.upper_bound_holds {
            upper_violations += 1;
        }
        worst_gap = worst_gap.max(rep.gap.abs());
        let f = rep.fidelity;
        if !(-tol.eig..=1.0 + tol.eig).contains(&f) {
            range_violations += 1;
        }
        symmetry = symmetry.max((fidelity(&sigma, &rho)?.value() - f).abs());
        let psi = haar_pure_state(&mut r, d);
        let phi = haar_pure_state(&mut r, d);
        let mixed = fidelity(&DensityOperator::pure(&psi)?, &DensityOperator::pure(&phi)?)?.value();
        pure_gap = pure_gap.max((mixed - pure_fidelity(&psi, &phi)?.value()).abs());
    }
    checks.push(Check::at_most("Uhlmann upper-bound violations", upper_violations as f64, 0.0));
    checks.push(Check::at_most("Uhlmann optimized overlap gap", worst_gap, tol.eig));
    checks.push(Check::at_most("fidelity outside [0,1]", range_violations as f64, 0.0));
    checks.push(Check::at_most("fidelity symmetry residual", symmetry, tol.eig));
    checks.push(Check::at_most("pure vs mixed fidelity residual", pure_gap, tol.eig));
    Ok(SuiteReport::new("fidelity", d, seed, checks))
}

/// Dilation of the qubit channel as printed in closed form, with columns
/// `V e₁` and `V e₂` in the row order `(s, j, k) ↦ 4s + 2j + k`.
pub fn printed_isometry_d2(alpha: f64) -> ComplexMatrix {
    let c1 = (1.0 - alpha).sqrt();
    let s = alpha.sqrt() / 3f64.sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(8, 2);
    m[(0, 0)] = C64::new(h * (c1 - s), 0.0);
    m[(3, 0)] = C64::new(h * (c1 + s), 0.0);
    m[(6, 0)] = C64::new(-h * 2.0 * s, 0.0);
    m[(1, 1)] = C64::new(h * 2.0 * s, 0.0);
    m[(4, 1)] = C64::new(h * (c1 + s), 0.0);
    m[(7, 1)] = C64::new(h * (c1 - s), 0.0);
    m
}

/// Largest entrywise difference between the generated qubit dilation and the
/// printed one over an `α` grid.
pub fn printed_isometry_residual(alphas: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &a in alphas {
        let v = build_isometry(&CovariantChannel::new(2, a, Branch::Plus)?);
        worst = worst.max((v.matrix() - &printed_isometry_d2(a)).max_abs());
    }
    Ok(worst)
}

/// Entries `(row, col)` where the generated qubit dilation and the printed one
/// differ by more than `tol` at strength `alpha`.
pub fn printed_isometry_mismatches(alpha: f64, tol: f64) -> Result<Vec<(usize, usize)>> {
    let v = build_isometry(&CovariantChannel::new(2, alpha, Branch::Plus)?);
    let printed = printed_isometry_d2(alpha);
    let mut out = Vec::new();
    for i in 0..8 {
        for j in 0..2 {
            if (v.matrix()[(i, j)] - printed[(i, j)]).norm() > tol {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Largest `||V_ij| − |P_ij||` between the generated and printed qubit
/// dilations, and largest `‖P*(a⊗I)P − T(a)‖_F` (plus `‖P*P − I‖_F`) for the
/// printed `P`. Both vanish when the two differ only by ancilla phases.
pub fn printed_isometry_consistency(alphas: &[f64]) -> Result<(f64, f64)> {
    let mut moduli = 0.0f64;
    let mut induced = 0.0f64;
    let mut rng = Rng::new(0);
    for &a in alphas {
        let ch = CovariantChannel::new(2, a, Branch::Plus)?;
        let v = build_isometry(&ch);
        let p = printed_isometry_d2(a);
        for i in 0..8 {
            for j in 0..2 {
                moduli = moduli.max((v.matrix()[(i, j)].norm() - p[(i, j)].norm()).abs());
            }
        }
        induced = induced.max(p.adjoint().matmul(&p).distance(&ComplexMatrix::identity(2)));
        let op = crate::haar::ginibre(&mut rng, 2, 2);
        let lifted = op.kron(&ComplexMatrix::identity(4));
        induced = induced.max(p.adjoint().matmul(&lifted).matmul(&p).distance(&ch.apply_heisenberg(&op)?));
    }
    Ok((moduli, induced))
}

/// `max ‖V*(a⊗I)V − T(a)‖_F` over `alphas × n_ops` random operators.
pub fn dilation_residual(d: usize, alphas: &[f64], n_ops: usize, rng: &mut Rng) -> Result<f64> {
    let mut worst = 0.0f64;
    for &a in alphas {
        for branch in [Branch::Plus, Branch::Minus] {
            let ch = CovariantChannel::new(d, a, branch)?;
            let v = build_isometry(&ch);
            for _ in 0..n_ops {
                let op = crate::haar::ginibre(rng, d, d);
                worst = worst.max(v.heisenberg(&op).distance(&ch.apply_heisenberg(&op)?));
            }
        }
    }
    Ok(worst)
}

pub fn channels_suite(d: usize, trials: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let rng = Rng::new(seed);
    let alphas = grid(0.0, 1.0, 21);
    let mut r = rng.child(0);
    let mut checks = vec![Check::at_most(
        "Stinespring vs closed form (21 alpha x 20 ops)",
        dilation_residual(d, &alphas, 20, &mut r)?,
        1e-10,
    )];

    let mut iso = 0.0f64;
    let mut kraus_norm = 0.0f64;
    let mut kraus_vs_v = 0.0f64;
    let mut kraus_count = 0usize;
    for &a in &alphas {
        let ch = CovariantChannel::new(d, a, Branch::Plus)?;
        let v = build_isometry(&ch);
        iso = iso.max(v.isometry_residual());
        let kraus = kraus_from_isometry(&v);
        kraus_count = kraus_count.max(kraus.len());
        let eye = ComplexMatrix::identity(d);
        kraus_norm = kraus_norm.max(kraus_heisenberg(&kraus, &eye).distance(&eye));
        let op = crate::haar::ginibre(&mut r, d, d);
        kraus_vs_v = kraus_vs_v.max(kraus_heisenberg(&kraus, &op).distance(&v.heisenberg(&op)));
    }
    checks.push(Check::at_most("V*V = I", iso, tol.eig));
    checks.push(Check::at_most("sum K*K = I", kraus_norm, tol.eig));
    checks.push(Check::at_most("Kraus vs dilation", kraus_vs_v, tol.eig));
    checks.push(Check::at_most("Kraus count", kraus_count as f64, (d * d) as f64));

    // Complete positivity at random strengths.
    let mut min_choi = f64::INFINITY;
    for _ in 0..trials {
        let a = r.uniform();
        let ch = CovariantChannel::new(d, a, Branch::Plus)?;
        min_choi = min_choi.min(ch.choi_min_eigenvalue()?);
    }
    checks.push(Check::at_least("min Choi eigenvalue", min_choi, 0.0, tol.psd));

    let mut cov = 0.0f64;
    for &a in &[0.0, 0.3, 0.7, 1.0] {
        cov = cov.max(crate::channels::covariance_residual(&CovariantChannel::new(d, a, Branch::Plus)?, &mut r, 8)?);
    }
    checks.push(Check::at_most("covariance residual", cov, tol.eig));

    let mut wc_gap = 0.0f64;
    let opts = WorstCaseOptions {
        probes: 128,
        refine_evals: 3000,
        tol_opt: tol.opt,
        covariant: false,
    };
    for &a in &grid(0.0, 1.0, 6) {
        let ch = CovariantChannel::new(d, a, Branch::Plus)?;
        let op = |rho: &ComplexMatrix| ch.apply_schrodinger(rho).expect("square input");
        let rep = worst_case_fidelity(&op, d, &mut r, &opts);
        wc_gap = wc_gap.max((rep.value - ch.wc_fidelity_closed()).abs());
    }
    checks.push(Check::at_most("worst-case fidelity closed vs search", wc_gap, tol.opt));

    if d == 2 {
        let half = CovariantChannel::new(2, 0.5, Branch::Plus)?.wc_fidelity_closed();
        checks.push(Check::close("F_wc(alpha=1/2)", half, 2.0 / 3.0, 1e-15));
        let (moduli, induced) = printed_isometry_consistency(&alphas)?;
        checks.push(Check::at_most("qubit dilation vs printed matrix (entry moduli)", moduli, 1e-12));
        checks.push(Check::at_most("printed qubit dilation induces T_alpha", induced, 1e-12));
    }
    Ok(SuiteReport::new("channels", d, seed, checks))
}

/// Uniformly spread admissible seed: the normalization weights come from the
/// simplex and `c` from the disk `|c|² ≤ b`.
pub fn random_admissible_seed(rng: &mut Rng, d: usize) -> Result<SeedP0> {
    let df = d as f64;
    let n = df * df - 1.0;
    let k = if d >= 3 { 4 } else { 3 };
    let w = random_probabilities(rng, k);
    let b = n * w[0];
    let e = (df + 1.0) * w[1];
    let f = (df + 1.0) * w[2];
    let g = if d >= 3 { n / (df * (df - 2.0)) * w[3] } else { 0.0 };
    let c = C64::from_polar(b.sqrt() * rng.uniform().sqrt(), rng.uniform_in(-std::f64::consts::PI, std::f64::consts::PI));
    SeedP0::new(d, b, c, e, f, g)
}

/// `max |γ_closed − Tr(Q₀)/d|` over random strengths, branches and seeds.
pub fn gamma_formula_residual(d: usize, n: usize, rng: &mut Rng) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..n {
        let alpha = rng.uniform();
        let branch = if k % 2 == 0 { Branch::Plus } else { Branch::Minus };
        let ch = CovariantChannel::new(d, alpha, branch)?;
        let s = random_admissible_seed(rng, d)?;
        let closed = gamma_of(
            &GammaParams {
                alpha,
                b: s.b,
                // The closed form is written for c₂ ≥ 0 and depends on Re c only.
                c: branch.sign() * s.c.re,
                e: s.e,
                f: s.f,
                g: s.g,
            },
            d,
        )?;
        worst = worst.max((closed - gamma_from_matrices(&ch, &s)?).abs());
    }
    Ok(worst)
}

/// Printed optimal qubit seed in the standard basis of `C² ⊗ C²`.
pub fn printed_optimal_seed_d2() -> ComplexMatrix {
    let r3 = 3f64.sqrt();
    ComplexMatrix::from_real_rows(&[
        &[2.0 - r3, 0.0, 0.0, -1.0],
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0],
        &[-1.0, 0.0, 0.0, 2.0 + r3],
    ])
}

pub fn povm_suite(d: usize, samples: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let rng = Rng::new(seed);
    let mut r = rng.child(0);
    let mut checks = vec![Check::at_most(
        "gamma closed form vs Tr(Q0)/d (1000 seeds)",
        gamma_formula_residual(d, 1000, &mut r)?,
        1e-10,
    )];

    let mut r = rng.child(1);
    for &a in &[0.2, 0.5] {
        let ch = CovariantChannel::new(d, a, Branch::Plus)?;
        let inst = Instrument::new(ch, SeedP0::optimal(&ch))?;
        let rep = instrument_consistency(&inst, &mut r, samples.min(20_000), tol)?;
        let tag = format!("alpha={a}");
        checks.push(Check::at_most(format!("instrument channel residual {tag}"), rep.channel_residual, tol.eig));
        checks.push(Check::at_most(format!("instrument POVM residual {tag}"), rep.povm_residual, tol.eig));
        checks.push(Check::at_most(format!("dilation covariance {tag}"), rep.dilation_covariance_residual, tol.eig));
        checks.push(Check {
            name: format!("POVM normalization (Frobenius 3 SE) {tag}"),
            value: rep.normalization.mean.distance(&ComplexMatrix::identity(d)),
            target: 0.0,
            tolerance: 3.0 * rep.normalization.frobenius_std_error(),
            passed: rep.normalization_within_3se,
        });
        checks.push(Check::at_least(
            format!("instrument partition Choi {tag}"),
            rep.partition_min_choi_eigenvalue,
            0.0,
            tol.psd,
        ));
    }

    if d == 2 {
        let (seed_gap, q0_gap) = optimal_seed_residuals(&grid(0.0, 0.5, 21))?;
        checks.push(Check::at_most("optimal qubit seed vs printed matrix", seed_gap, 1e-12));
        checks.push(Check::at_most("Q0 = diag(1 +- 2 sqrt(a - a^2))", q0_gap, 1e-12));
        let (endpoint_gap, inside) = rotating_polarizer_residuals(&grid(0.0, 1.0, 21), tol)?;
        checks.push(Check::at_most("rotating polarizer endpoints", endpoint_gap, 1e-12));
        checks.push(Check::at_most("rotating polarizer points outside region", inside as f64, 0.0));
    }
    Ok(SuiteReport::new("povm", d, seed, checks))
}

/// Residuals of the optimal qubit seed against the printed matrix and of its
/// `Q₀` against `diag(1 ± 2√(α−α²))`.
pub fn optimal_seed_residuals(alphas: &[f64]) -> Result<(f64, f64)> {
    let golden = printed_optimal_seed_d2();
    let mut seed_gap = 0.0f64;
    let mut q0_gap = 0.0f64;
    for &a in alphas {
        let ch = CovariantChannel::new(2, a, Branch::Plus)?;
        let s = SeedP0::optimal(&ch);
        if a > 0.0 {
            seed_gap = seed_gap.max((&seed_p0_matrix(&s) - &golden).max_abs());
        }
        let root = 2.0 * (a - a * a).max(0.0).sqrt();
        let target = ComplexMatrix::real_diag(&[1.0 + root, 1.0 - root]);
        q0_gap = q0_gap.max((&q0_from_seed(&ch, &s)? - &target).max_abs());
    }
    Ok((seed_gap, q0_gap))
}

/// Largest endpoint residual at `λ ∈ {0, 1}` and the number of points that
/// leave the band between the lower and upper estimation fidelities.
pub fn rotating_polarizer_residuals(lambdas: &[f64], tol: &Tolerances) -> Result<(f64, usize)> {
    let mut gap = 0.0f64;
    let mut outside = 0usize;
    for &l in lambdas {
        let (ft, fe) = rotating_polarizer_point(&RotatingPolarizer::new(l)?);
        if l == 0.0 {
            gap = gap.max((ft - 1.0).abs()).max((fe - 0.5).abs());
        }
        if l == 1.0 {
            gap = gap.max((ft - 2.0 / 3.0).abs()).max((fe - 2.0 / 3.0).abs());
        }
        let a = alpha_from_ft(ft, 2)?;
        let lo = estimation_fidelity(gamma_min(a, 2), 2);
        let hi = estimation_fidelity(gamma_max(a, 2), 2);
        if fe < lo - tol.region || fe > hi + tol.region {
            outside += 1;
        }
    }
    Ok((gap, outside))
}

/// Largest gap between the closed `γ` extremes and the unreduced optimizer.
pub fn gamma_extreme_gaps(d: usize, alphas: &[f64], rng: &Rng, restarts: usize) -> Result<(f64, f64)> {
    let mut max_gap = 0.0f64;
    let mut min_gap = 0.0f64;
    for (k, &a) in alphas.iter().enumerate() {
        let ch = CovariantChannel::new(d, a, Branch::Plus)?;
        let child = rng.child(k as u64);
        let hi = gamma_extreme_unreduced(&ch, Extreme::Max, &child, restarts)?.gamma;
        let lo = gamma_extreme_unreduced(&ch, Extreme::Min, &child.child(1), restarts)?.gamma;
        max_gap = max_gap.max((hi - gamma_max(a, d)).abs());
        min_gap = min_gap.max((lo - gamma_min(a, d)).abs());
    }
    Ok((max_gap, min_gap))
}

/// Strength grid of `n` uniform points that also contains the two points where
/// the closed forms of `γ_max` and `γ_min` change branch.
pub fn alpha_grid_with_branch_points(d: usize, n: usize) -> Vec<f64> {
    let df = d as f64;
    let mut out = grid(0.0, 1.0, n);
    // The maximizing |c| hits its cap at α = (d−1)/d, the minimizing one at 1/d.
    out.push((df - 1.0) / df);
    out.push(1.0 / df);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    out
}

/// Largest deviation of the qubit `γ_max` and `γ_min` arcs from the ellipse,
/// and of the general region formula from its qubit form, over `n` points.
pub fn ellipse_residuals(n: usize) -> Result<(f64, f64)> {
    let mut arc = 0.0f64;
    let mut forms = 0.0f64;
    // The ellipse bounds the region for F_T ≥ 2/3, that is α ≤ 1/2.
    for p in tradeoff_curves_to(2, n, 0.5, 1e-9)? {
        arc = arc.max((region2_lhs_qubit(p.f_t, p.f_e_max) - 1.0 / 9.0).abs());
        arc = arc.max((region2_lhs_qubit(p.f_t, p.f_e_min) - 1.0 / 9.0).abs());
    }
    for p in tradeoff_curves_to(2, n, 1.0, 1e-9)? {
        for fe in [p.f_e_max, p.f_e_min] {
            let general = region2_lhs(2, p.f_t, fe) - region2_rhs(2);
            let qubit = region2_lhs_qubit(p.f_t, fe) - 1.0 / 9.0;
            forms = forms.max((general - qubit).abs());
        }
    }
    Ok((arc, forms))
}

/// Endpoints `(1, ½)`, `(2/3, 2/3)`, `(1/3, 2/3)` of the qubit optimal arc.
pub fn arc_endpoint_residual() -> Result<f64> {
    let pts = tradeoff_curves_to(2, 4, 1.0, 1e-9)?;
    let at = |alpha: f64| -> (f64, f64) {
        (1.0 - 2.0 * alpha / 3.0, estimation_fidelity(gamma_max(alpha, 2), 2))
    };
    let first = &pts[0];
    let last = &pts[pts.len() - 1];
    let mid = at(0.5);
    Ok([
        (first.f_t - 1.0).abs(),
        (first.f_e_max - 0.5).abs(),
        (mid.0 - 2.0 / 3.0).abs(),
        (mid.1 - 2.0 / 3.0).abs(),
        (last.f_t - 1.0 / 3.0).abs(),
        (last.f_e_max - 2.0 / 3.0).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

pub fn tradeoff_suite(d: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let rng = Rng::new(seed);
    let alphas = alpha_grid_with_branch_points(d, 21);
    let (max_gap, min_gap) = gamma_extreme_gaps(d, &alphas, &rng, 8)?;
    let mut checks = vec![
        Check::at_most("gamma_max closed vs unreduced optimizer", max_gap, tol.opt),
        Check::at_most("gamma_min closed vs unreduced optimizer", min_gap, tol.opt),
    ];
    let mut saturation = 0.0f64;
    for &a in &grid(0.0, 1.0, 21) {
        let ch = CovariantChannel::new(d, a, Branch::Plus)?;
        saturation = saturation.max((gamma_from_matrices(&ch, &SeedP0::optimal(&ch))? - gamma_max(a, d)).abs());
        saturation = saturation.max((gamma_from_matrices(&ch, &SeedP0::minimizing(&ch))? - gamma_min(a, d)).abs());
    }
    checks.push(Check::at_most("extreme seeds reach closed gamma", saturation, 1e-10));
    if d == 2 {
        let (arc, forms) = ellipse_residuals(201)?;
        checks.push(Check::at_most("qubit arc on ellipse", arc, 1e-9));
        checks.push(Check::at_most("general region formula vs qubit form", forms, 1e-12));
        checks.push(Check::at_most("arc endpoints", arc_endpoint_residual()?, 1e-12));
        checks.push(Check::close("Werner F(1,2,2)", werner_bound(1, 2, 2)?, 5.0 / 6.0, 1e-8));
        checks.push(Check::close("Werner F(1,1e9,2)", werner_bound(1, 1_000_000_000, 2)?, 2.0 / 3.0, 1e-8));
    }
    Ok(SuiteReport::new("tradeoff", d, seed, checks))
}

pub fn apps_suite(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut fa = 0.0f64;
    let mut fb = 0.0f64;
    let mut ra = 0.0f64;
    let mut bell = 0.0f64;
    let mut rows = 0.0f64;
    for branch in [Branch::Plus, Branch::Minus] {
        for &a in &grid(0.0, 1.0, 21) {
            let c = PauliCloner::new(a, branch)?;
            let f = clone_fidelities(&c)?;
            fa = fa.max((f.f_a - f.f_a_state).abs());
            fb = fb.max((f.f_b - f.f_b_state).abs());
            let rep = cloner_report(&c)?;
            let expect = [1.0 - a, a / 3.0, a / 3.0, a / 3.0];
            for k in 0..4 {
                ra = ra.max((rep.rho_ra.weights[k] - expect[k]).abs());
            }
            for m in [rep.rho_ra, rep.rho_rb, rep.rho_rc] {
                bell = bell.max(m.off_diagonal);
            }
            let res = rep.row_residual_signed;
            for v in res.rabc.iter().chain(&res.rbac).chain(&res.rcab) {
                rows = rows.max(v.abs());
            }
        }
    }
    checks.push(Check::at_most("F_A closed vs partial trace", fa, 1e-10));
    checks.push(Check::at_most("F_B closed vs partial trace", fb, 1e-10));
    checks.push(Check::at_most("rho_RA Bell weights", ra, 1e-10));
    checks.push(Check::at_most("pair states Bell-diagonal", bell, 1e-10));
    checks.push(Check::at_most("split amplitude rows vs printed table", rows, 1e-10));
    let sym = symmetric_point(Branch::Minus, 1e-14).unwrap_or(f64::NAN);
    checks.push(Check::close("symmetric cloner alpha", sym, 0.25, 1e-8));
    let (sa, sb) = crate::apps::clone_fidelities_closed(&PauliCloner::new(sym.clamp(0.0, 1.0), Branch::Minus)?);
    checks.push(Check::close("symmetric cloner F_A", sa, 5.0 / 6.0, 1e-8));
    checks.push(Check::close("symmetric cloner F_B", sb, 5.0 / 6.0, 1e-8));

    let mut r = Rng::new(seed);
    let rho = crate::haar::random_density(&mut r, 2);
    let mut depol = 0.0f64;
    for &p in &grid(0.0, 1.0, 11) {
        depol = depol.max(crate::apps::depolarizing_matches_covariant(&rho, p)?);
    }
    checks.push(Check::at_most("depolarizing Pauli channel = T_alpha", depol, 1e-12));

    let table = strategy_table(&grid(0.0, 1.0, 101))?;
    let f_gap = table.iter().map(|t| (t.f_cl - t.f_cl_numeric).abs()).fold(0.0, f64::max);
    let a_gap = table.iter().map(|t| (t.alpha_star - t.alpha_star_numeric).abs()).fold(0.0, f64::max);
    let inst_gap = table.iter().map(|t| (t.f_cl - t.f_cl_instrument).abs()).fold(0.0, f64::max);
    let dominance = table
        .iter()
        .filter(|t| t.f_qm < t.f_cl - tol.eig || t.f_cl < t.f_dir - tol.eig || t.f_cl < 2.0 / 3.0 - tol.eig)
        .count();
    checks.push(Check::at_most("F_cl closed vs numeric maximum", f_gap, 1e-8));
    checks.push(Check::at_most("alpha* closed vs numeric maximizer", a_gap, 1e-8));
    checks.push(Check::at_most("F_cl from saturating instrument", inst_gap, 1e-8));
    checks.push(Check::close("F_cl(p=0)", table[0].f_cl, 2.0 / 3.0, 1e-12));
    checks.push(Check::close("F_cl(p=1)", table[table.len() - 1].f_cl, 1.0, 1e-12));
    checks.push(Check::at_most("dominance violations", dominance as f64, 0.0));
    Ok(SuiteReport::new("apps", 2, seed, checks))
}

/// Every suite for every dimension, in a fixed order.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateReport {
    pub seed: u64,
    pub samples: usize,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

pub fn report_all(dims: &[usize], samples: usize, seed: u64, tol: &Tolerances) -> AggregateReport {
    let settle = |name: &str, d: usize, s: u64, r: Result<SuiteReport>| {
        r.unwrap_or_else(|e| SuiteReport::errored(name, d, s, &e))
    };
    let mut suites = Vec::new();
    for (i, &d) in dims.iter().enumerate() {
        let s = crate::haar::split_seed(seed, i as u64);
        suites.push(settle("haar", d, s, haar_suite(d, samples, s, tol)));
        suites.push(settle("fidelity", d, s, fidelity_suite(d, 1000, s, tol)));
        suites.push(settle("channels", d, s, channels_suite(d, 1000, s, tol)));
        suites.push(settle("povm", d, s, povm_suite(d, samples, s, tol)));
        suites.push(settle("tradeoff", d, s, tradeoff_suite(d, s, tol)));
    }
    suites.push(settle("apps", 2, seed, apps_suite(seed, tol)));
    let passed = suites.iter().all(|s| s.passed);
    AggregateReport {
        seed,
        samples,
        suites,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_constructors() {
        assert!(Check::close("x", 1.0, 1.0 + 1e-9, 1e-8).passed);
        assert!(!Check::at_most("x", 2.0, 1.0).passed);
        assert!(Check::at_least("x", -1e-12, 0.0, 1e-9).passed);
    }

    #[test]
    fn printed_qubit_dilation_is_a_dilation_of_the_same_channel() {
        for &a in &grid(0.0, 1.0, 11) {
            let printed = printed_isometry_d2(a);
            let iso = printed.adjoint().matmul(&printed).distance(&ComplexMatrix::identity(2));
            assert!(iso < 1e-12);
            let ch = CovariantChannel::new(2, a, Branch::Plus).unwrap();
            let v = build_isometry(&ch);
            let mut r = Rng::new(4);
            let op = crate::haar::ginibre(&mut r, 2, 2);
            let lifted = op.kron(&ComplexMatrix::identity(4));
            let via_printed = printed.adjoint().matmul(&lifted).matmul(&printed);
            assert!(via_printed.distance(&ch.apply_heisenberg(&op).unwrap()) < 1e-12);
            // Every entry but one agrees; the odd one differs only in sign.
            let mut differing = Vec::new();
            for i in 0..8 {
                for j in 0..2 {
                    let (x, y) = (v.matrix()[(i, j)].re, printed[(i, j)].re);
                    if (x - y).abs() > 1e-12 {
                        assert!((x + y).abs() < 1e-12);
                        differing.push((i, j));
                    }
                }
            }
            if a > 0.0 {
                assert_eq!(differing, vec![(1, 1)]);
            }
        }
    }

    #[test]
    fn admissible_seeds_satisfy_constraints() {
        let mut r = Rng::new(9);
        for d in [2, 3, 4] {
            for _ in 0..50 {
                let s = random_admissible_seed(&mut r, d).unwrap();
                assert!(s.constraint_residual().abs() < 1e-12);
                assert!(s.c.norm_sqr() <= s.b + 1e-12);
            }
        }
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(grid(0.0, 1.0, 21).len(), 21);
        assert_eq!(grid(0.0, 1.0, 21)[20], 1.0);
        let g = alpha_grid_with_branch_points(2, 21);
        assert!(g.contains(&0.5));
        let g3 = alpha_grid_with_branch_points(3, 21);
        assert!(g3.contains(&(1.0 / 3.0)) && g3.contains(&(2.0 / 3.0)) && g3.len() == 23);
    }

    #[test]
    fn qubit_suites_pass() {
        let tol = Tolerances::default();
        for rep in [
            haar_suite(2, 20_000, 7, &tol).unwrap(),
            fidelity_suite(2, 200, 7, &tol).unwrap(),
            apps_suite(7, &tol).unwrap(),
        ] {
            assert!(rep.passed, "{:?}", rep.failures().collect::<Vec<_>>());
        }
    }
}
