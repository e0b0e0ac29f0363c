//! Seeded Haar sampling on U(d) and on projective Hilbert space, plus the
//! Monte Carlo estimators used as oracles for group-averaging identities.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{inner, norm, ComplexMatrix, DensityOperator, C64, ZERO};

/// Deterministic random stream.
///
/// Backed by ChaCha8, a counter-based generator: the same seed gives the
/// same stream on every platform.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream; `seed = splitmix64(parent ⊕ golden·(index+1))`.
    pub fn child(&self, stream: u64) -> Rng {
        Rng::new(split_seed(self.seed, stream))
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Standard complex Gaussian, `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        C64::new(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn split_seed(parent: u64, stream: u64) -> u64 {
    splitmix64(parent ^ GOLDEN.wrapping_mul(stream.wrapping_add(1)))
}

/// Complex Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rng: &mut Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_normal())
}

/// Haar-distributed unitary on U(d).
///
/// QR of a Ginibre matrix by twice-iterated Gram–Schmidt; the resulting `R`
/// has a positive real diagonal, which is the phase correction that makes
/// `Q` exactly Haar.
pub fn haar_unitary(rng: &mut Rng, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for _ in 0..2 {
            for u in &cols {
                let ov = inner(u, &v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= ov * ui;
                }
            }
        }
        let n = norm(&v);
        cols.push(v.iter().map(|z| z / n).collect());
    }
    ComplexMatrix::from_columns(&cols)
}

/// Haar unitary on SU(d): the U(d) sample with its determinant phase divided out.
pub fn haar_special_unitary(rng: &mut Rng, d: usize) -> ComplexMatrix {
    let u = haar_unitary(rng, d);
    let det = determinant(&u);
    let phase = C64::from_polar(1.0, -det.arg() / d as f64);
    u.scale(phase)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(m: &ComplexMatrix) -> C64 {
    assert!(m.is_square());
    let n = m.rows();
    let mut a = m.clone();
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
            .expect("non-empty");
        if a[(piv, k)].norm() == 0.0 {
            return ZERO;
        }
        if piv != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = t;
            }
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in (k + 1)..n {
            let factor = a[(i, k)] / pivot;
            for j in k..n {
                let t = a[(k, j)];
                a[(i, j)] -= factor * t;
            }
        }
    }
    det
}

/// Haar-random unit vector in `C^d` (normalized complex Gaussian).
pub fn haar_pure_state(rng: &mut Rng, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| rng.complex_normal()).collect();
    let n = norm(&v);
    v.iter().map(|z| z / n).collect()
}

/// `ψ = cos θ · anchor + sin θ · η` with `η` a unit vector orthogonal to `anchor`.
pub fn fubini_study_point(anchor: &[C64], theta: f64, eta: &[C64]) -> Vec<C64> {
    anchor
        .iter()
        .zip(eta)
        .map(|(a, e)| a * theta.cos() + e * theta.sin())
        .collect()
}

/// Pure state sampled through the `(θ, S_{2d-3})` chart around `anchor`.
///
/// The measure `sin^{2d-3}θ cos θ dθ` becomes `x^{d-2} dx` in `x = sin²θ`,
/// so `x = u^{1/(d-1)}`; `η` is uniform on the unit sphere of the orthogonal
/// complement of `anchor`.
pub fn fubini_study_sample(rng: &mut Rng, d: usize, anchor: &[C64]) -> Result<Vec<C64>> {
    if d < 2 || anchor.len() != d {
        return Err(Error::DimMismatch(format!(
            "Fubini–Study sampling needs d ≥ 2 and a {d}-dim anchor"
        )));
    }
    let x = rng.uniform().powf(1.0 / (d as f64 - 1.0));
    let theta = x.sqrt().asin();
    let eta = loop {
        let mut g: Vec<C64> = (0..d).map(|_| rng.complex_normal()).collect();
        let ov = inner(anchor, &g);
        for (gi, ai) in g.iter_mut().zip(anchor) {
            *gi -= ov * ai;
        }
        let n = norm(&g);
        if n > 1e-12 {
            break g.iter().map(|z| z / n).collect::<Vec<_>>();
        }
    };
    Ok(fubini_study_point(anchor, theta, &eta))
}

/// Random full-rank mixed state `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_density(rng: &mut Rng, d: usize) -> DensityOperator {
    let g = ginibre(rng, d, d);
    let m = g.matmul(&g.adjoint());
    let t = m.trace().re;
    DensityOperator::from_matrix_unchecked(m.scale_real(1.0 / t).hermitian_part())
}

/// Random Hermitian matrix `(G + G†) / 2`.
pub fn random_hermitian(rng: &mut Rng, d: usize) -> ComplexMatrix {
    ginibre(rng, d, d).hermitian_part()
}

/// First `d_in` columns of a Haar unitary on `C^{d_out}`.
pub fn random_isometry(rng: &mut Rng, d_in: usize, d_out: usize) -> ComplexMatrix {
    assert!(d_in <= d_out);
    let u = haar_unitary(rng, d_out);
    ComplexMatrix::from_fn(d_out, d_in, |i, j| u[(i, j)])
}

/// Monte Carlo estimate of a scalar expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl McEstimate {
    /// `|mean - target| ≤ k · SE`, with a rounding floor for zero-variance estimates.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + 1e-12 * target.abs().max(1.0)
    }

    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if (self.mean - target).abs() <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target) / self.std_error
        }
    }
}

/// Welford running mean and variance.
#[derive(Debug, Clone, Default)]
pub struct ScalarAccumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl ScalarAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combines two accumulators (Chan et al. parallel update).
    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn estimate(&self) -> McEstimate {
        let var = if self.n > 1 {
            self.m2 / (self.n as f64 - 1.0)
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            std_error: (var / self.n.max(1) as f64).sqrt(),
            n_samples: self.n,
        }
    }
}

/// Monte Carlo estimate of a matrix-valued expectation with entrywise
/// standard errors (`SE_ij = sqrt(E|X_ij - μ_ij|² / n)`).
#[derive(Debug, Clone, Serialize)]
pub struct MatrixEstimate {
    pub mean: ComplexMatrix,
    pub std_error: Vec<f64>,
    pub n_samples: usize,
}

impl MatrixEstimate {
    pub fn max_std_error(&self) -> f64 {
        self.std_error.iter().copied().fold(0.0, f64::max)
    }

    /// Frobenius norm of the entrywise standard errors.
    pub fn frobenius_std_error(&self) -> f64 {
        self.std_error.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// Whole-matrix band: `‖mean - target‖_F ≤ k · ‖SE‖_F`.
    pub fn within(&self, target: &ComplexMatrix, k: f64) -> bool {
        self.mean.distance(target) <= k * self.frobenius_std_error() + 1e-12
    }

    /// Largest per-entry `|mean - target| / SE`.
    pub fn max_z_score(&self, target: &ComplexMatrix) -> f64 {
        let diff = &self.mean - target;
        diff.as_slice()
            .iter()
            .zip(&self.std_error)
            .map(|(z, &se)| {
                if se == 0.0 {
                    if z.norm() <= 1e-12 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    z.norm() / se
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct MatrixAccumulator {
    n: usize,
    sum: ComplexMatrix,
    sum_sq: Vec<f64>,
}

impl MatrixAccumulator {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            n: 0,
            sum: ComplexMatrix::zeros(rows, cols),
            sum_sq: vec![0.0; rows * cols],
        }
    }

    pub fn push(&mut self, x: &ComplexMatrix) {
        self.n += 1;
        self.sum = &self.sum + x;
        for (s, z) in self.sum_sq.iter_mut().zip(x.as_slice()) {
            *s += z.norm_sqr();
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.sum = &self.sum + &other.sum;
        for (s, o) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *s += o;
        }
    }

    pub fn estimate(&self) -> MatrixEstimate {
        let n = self.n.max(1) as f64;
        let mean = self.sum.scale_real(1.0 / n);
        let std_error = mean
            .as_slice()
            .iter()
            .zip(&self.sum_sq)
            .map(|(m, &s2)| {
                let var = if self.n > 1 {
                    ((s2 - n * m.norm_sqr()) / (n - 1.0)).max(0.0)
                } else {
                    0.0
                };
                (var / n).sqrt()
            })
            .collect();
        MatrixEstimate {
            mean,
            std_error,
            n_samples: self.n,
        }
    }
}

/// Runs `n` samples split over `streams` child streams of `rng` and merges
/// the per-stream accumulators in stream order.
///
/// The result depends on `(seed, n, streams)` only, never on how many
/// threads execute the streams.
pub fn par_streams<A, F>(rng: &Rng, n: usize, streams: usize, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut Rng, usize) -> A + Sync,
{
    use rayon::prelude::*;
    let streams = streams.max(1);
    let base = n / streams;
    let extra = n % streams;
    (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut child = rng.child(s as u64);
            let count = base + usize::from(s < extra);
            f(&mut child, count)
        })
        .collect()
}

/// `E f(X)` over `n` draws.
pub fn mc_scalar(rng: &mut Rng, n: usize, mut f: impl FnMut(&mut Rng) -> f64) -> McEstimate {
    let mut acc = ScalarAccumulator::default();
    for _ in 0..n {
        acc.push(f(rng));
    }
    acc.estimate()
}

/// `∫ u A u* du` over Haar-random `u ∈ U(d)`.
pub fn mc_average_conjugation(rng: &mut Rng, seed_op: &ComplexMatrix, n: usize) -> MatrixEstimate {
    let d = seed_op.rows();
    let mut acc = MatrixAccumulator::new(d, d);
    for _ in 0..n {
        let u = haar_unitary(rng, d);
        acc.push(&seed_op.conjugate_by(&u));
    }
    acc.estimate()
}

/// `∫ D_u A D_u* du` with `D_u = ū ⊗ u` acting on `C^d ⊗ C^d`.
pub fn mc_tensor_conjugation(
    rng: &mut Rng,
    seed_op: &ComplexMatrix,
    d: usize,
    n: usize,
) -> Result<MatrixEstimate> {
    if !seed_op.is_square() || seed_op.rows() != d * d {
        return Err(Error::DimMismatch(format!(
            "ancilla operator must be {0}x{0}, got {1}x{2}",
            d * d,
            seed_op.rows(),
            seed_op.cols()
        )));
    }
    let mut acc = MatrixAccumulator::new(d * d, d * d);
    for _ in 0..n {
        let u = haar_unitary(rng, d);
        let rep = u.conj().kron(&u);
        acc.push(&seed_op.conjugate_by(&rep));
    }
    Ok(acc.estimate())
}

/// `Tr(p q) = |⟨ψ|φ⟩|²` for pure states given as vectors.
pub fn overlap(psi: &[C64], phi: &[C64]) -> f64 {
    inner(psi, phi).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{basis_vector, pauli_z};

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        let ua = haar_unitary(&mut a, 3);
        let ub = haar_unitary(&mut b, 3);
        assert_eq!(ua, ub);
        assert_ne!(Rng::new(42).child(0).seed(), Rng::new(42).child(1).seed());
    }

    #[test]
    fn one_dimensional_unitary_is_a_phase() {
        let mut rng = Rng::new(1);
        let u = haar_unitary(&mut rng, 1);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = Rng::new(3);
        for d in [2, 5, 16, 64] {
            let u = haar_unitary(&mut rng, d);
            let e = u.adjoint().matmul(&u).distance(&ComplexMatrix::identity(d));
            assert!(e < 1e-12, "d={d}: {e}");
        }
    }

    #[test]
    fn special_unitary_has_unit_determinant() {
        let mut rng = Rng::new(5);
        let u = haar_special_unitary(&mut rng, 4);
        assert!((determinant(&u) - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_angle_returns_anchor() {
        let anchor = basis_vector(3, 1);
        let eta = basis_vector(3, 0);
        assert_eq!(fubini_study_point(&anchor, 0.0, &eta), anchor);
    }

    #[test]
    fn identity_conjugation_has_zero_variance() {
        let mut rng = Rng::new(9);
        let est = mc_average_conjugation(&mut rng, &ComplexMatrix::identity(3), 200);
        assert!(est.mean.distance(&ComplexMatrix::identity(3)) < 1e-12);
        assert!(est.max_std_error() < 1e-7);
    }

    #[test]
    fn traceless_conjugation_averages_to_zero() {
        let mut rng = Rng::new(11);
        let est = mc_average_conjugation(&mut rng, &pauli_z(), 20_000);
        assert!(est.within(&ComplexMatrix::zeros(2, 2), 3.0));
    }

    #[test]
    fn accumulator_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut whole = ScalarAccumulator::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (ScalarAccumulator::default(), ScalarAccumulator::default());
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let (e1, e2) = (whole.estimate(), a.estimate());
        assert!((e1.mean - e2.mean).abs() < 1e-14);
        assert!((e1.std_error - e2.std_error).abs() < 1e-14);
    }

    #[test]
    fn tensor_conjugation_checks_dimension() {
        let mut rng = Rng::new(0);
        assert!(mc_tensor_conjugation(&mut rng, &ComplexMatrix::identity(3), 2, 10).is_err());
    }

    #[test]
    fn stream_results_do_not_depend_on_thread_count() {
        let rng = Rng::new(77);
        let run = || {
            par_streams(&rng, 1000, 8, |r, n| {
                let mut acc = ScalarAccumulator::default();
                for _ in 0..n {
                    acc.push(r.uniform());
                }
                acc
            })
        };
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(run);
        let fold = |v: Vec<ScalarAccumulator>| {
            let mut acc = ScalarAccumulator::default();
            v.iter().for_each(|a| acc.merge(a));
            acc.estimate().mean
        };
        assert_eq!(fold(one).to_bits(), fold(many).to_bits());
    }
}
