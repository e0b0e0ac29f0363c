//! Trade-off between the worst-case fidelity of the disturbed state (`F_T`)
//! and of the estimate (`F_E`) for covariant instruments, plus the
//! numerical oracles that check the closed forms.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{build_isometry, Branch, CovariantChannel};
use crate::error::{check_range, Error, Result};
use crate::haar::Rng;
use crate::matcore::{basis_vector, ComplexMatrix, Subsystem, C64};
use crate::optim::{golden_section, nelder_mead, NelderMeadOptions};
use crate::povm::{AdaptedBasis, SeedP0};
use crate::tolerance::Tolerances;

/// Channel strength together with a real-`c` ancilla seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaParams {
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl GammaParams {
    pub fn seed(&self, d: usize) -> Result<SeedP0> {
        SeedP0::new(d, self.b, C64::new(self.c, 0.0), self.e, self.f, self.g)
    }
}

/// `γ = (1/d)(1 − α + 2c√(α−α²)/√(d+1) + α(b+df)/(d+1))`, for the `c₂ = +√α`
/// dilation.
pub fn gamma_of(p: &GammaParams, d: usize) -> Result<f64> {
    check_range("alpha", p.alpha, 0.0, 1.0)?;
    p.seed(d)?;
    let df = d as f64;
    let a = p.alpha;
    Ok((1.0 - a + 2.0 * p.c * (a - a * a).sqrt() / (df + 1.0).sqrt() + a * (p.b + df * p.f) / (df + 1.0)) / df)
}

/// `γ = (1/d) Tr(P_{e₁} Q₀)` from the explicit dilation and seed matrices.
pub fn gamma_from_matrices(ch: &CovariantChannel, seed: &SeedP0) -> Result<f64> {
    let q0 = crate::povm::q0_from_seed(ch, seed)?;
    Ok(q0[(0, 0)].re / ch.d() as f64)
}

/// Upper extreme of `γ` over admissible seeds.
pub fn gamma_max(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    if alpha <= (df - 1.0) / df {
        (1.0 + (df - 2.0) * alpha + 2.0 * (df - 1.0).sqrt() * (alpha - alpha * alpha).max(0.0).sqrt()) / df
    } else {
        1.0
    }
}

/// Lower extreme of `γ` over admissible seeds.
pub fn gamma_min(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    if alpha <= 1.0 / df {
        ((1.0 + (df - 2.0) * alpha - 2.0 * (df - 1.0).sqrt() * (alpha - alpha * alpha).max(0.0).sqrt()) / df)
            .max(0.0)
    } else {
        0.0
    }
}

/// `F_E = (γ+1)/(d+1)`.
pub fn estimation_fidelity(gamma: f64, d: usize) -> f64 {
    (gamma + 1.0) / (d as f64 + 1.0)
}

/// `F_T = 1 − αd/(d+1)`.
pub fn transmission_fidelity(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    1.0 - alpha * df / (df + 1.0)
}

/// Inverse of [`transmission_fidelity`]: `α = (d+1)/d (1 − F_T)`.
pub fn alpha_from_ft(f_t: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    check_range("f_t", f_t, 1.0 / df, 1.0)?;
    Ok((df + 1.0) / df * (1.0 - f_t))
}

/// Largest channel strength with `F_T ≥ 1/d`: `(d²−1)/d²`.
pub fn alpha_range_end(d: usize) -> f64 {
    let df = d as f64;
    (df * df - 1.0) / (df * df)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Inside the box `1/d ≤ F_T, F_E ≤ 2/(d+1)`.
    Region1,
    /// Strictly inside the ellipse with `F_T > 2/(d+1)`.
    Region2Interior,
    /// Within the tolerance of the edge of the attainable set.
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub f_t: f64,
    pub f_e: f64,
    pub d: usize,
}

/// `(dF_E − (2d−2)/d + (d−2)/d F_T)² + 4(d−1)/d² (F_T − (d+2)/(2(d+1)))²`.
pub fn region2_lhs(d: usize, f_t: f64, f_e: f64) -> f64 {
    let df = d as f64;
    let lin = df * f_e - (2.0 * df - 2.0) / df + (df - 2.0) / df * f_t;
    let dev = f_t - (df + 2.0) / (2.0 * (df + 1.0));
    lin * lin + 4.0 * (df - 1.0) / (df * df) * dev * dev
}

/// `(d−1)/(d+1)²`.
pub fn region2_rhs(d: usize) -> f64 {
    let df = d as f64;
    (df - 1.0) / ((df + 1.0) * (df + 1.0))
}

/// Qubit form `4(F_E − ½)² + (F_T − ⅔)²`, compared against `1/9`.
pub fn region2_lhs_qubit(f_t: f64, f_e: f64) -> f64 {
    4.0 * (f_e - 0.5).powi(2) + (f_t - 2.0 / 3.0).powi(2)
}

/// Range of `F_E` allowed by the ellipse at a given `F_T`, ignoring the
/// `F_T ≥ 2/(d+1)` restriction. Discriminants in `[−tol, 0)` count as zero.
pub fn ellipse_interval(d: usize, f_t: f64, tol: f64) -> Option<(f64, f64)> {
    let df = d as f64;
    let offset = -(2.0 * df - 2.0) / df + (df - 2.0) / df * f_t;
    let dev = f_t - (df + 2.0) / (2.0 * (df + 1.0));
    let mut disc = region2_rhs(d) - 4.0 * (df - 1.0) / (df * df) * dev * dev;
    if disc < 0.0 {
        if disc < -tol {
            return None;
        }
        disc = 0.0;
    }
    let r = disc.sqrt();
    Some(((-offset - r) / df, (-offset + r) / df))
}

/// Classifies a point against the union of the box and the ellipse.
///
/// For each `F_T` the attainable `F_E` form an interval: the box edges for
/// `F_T < 2/(d+1)`, the ellipse chord for `F_T > 2/(d+1)`, and the union of
/// both on the seam. A point within `tol` of an interval end, of the seam
/// segment below the box, or of `F_T ∈ {1/d, 1}` is on the boundary.
pub fn region_classify(p: &TradeoffPoint, tol: f64) -> Region {
    let d = p.d;
    let df = d as f64;
    let (lo_t, seam, hi_t) = (1.0 / df, 2.0 / (df + 1.0), 1.0);
    let (ft, fe) = (p.f_t, p.f_e);
    if !(ft.is_finite() && fe.is_finite()) || ft < lo_t - tol || ft > hi_t + tol {
        return Region::Outside;
    }
    let boxed = (lo_t, seam);
    let ellipse = if ft >= seam - tol {
        ellipse_interval(d, ft.max(seam), tol)
    } else {
        None
    };
    let (lo, hi) = if ft < seam - tol {
        boxed
    } else if ft <= seam + tol {
        let (elo, ehi) = ellipse.unwrap_or(boxed);
        (elo.min(boxed.0), ehi.max(boxed.1))
    } else {
        match ellipse {
            Some(iv) => iv,
            None => return Region::Outside,
        }
    };
    if fe < lo - tol || fe > hi + tol {
        return Region::Outside;
    }
    let near = |a: f64, b: f64| (a - b).abs() <= tol;
    if near(fe, lo) || near(fe, hi) || near(ft, lo_t) || near(ft, hi_t) {
        return Region::Boundary;
    }
    if near(ft, seam) && fe < boxed.0 - tol {
        return Region::Boundary;
    }
    if ft <= seam && fe >= boxed.0 {
        Region::Region1
    } else {
        Region::Region2Interior
    }
}

/// One row of the trade-off curves at channel strength `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub f_t: f64,
    pub f_e_max: f64,
    pub f_e_min: f64,
    pub on_boundary: bool,
}

/// Curves at uniform `α` spacing over `[0, (d²−1)/d²]`, the strengths with
/// `F_T ≥ 1/d`.
pub fn tradeoff_curves(d: usize, n_points: usize, tol: f64) -> Result<Vec<CurvePoint>> {
    tradeoff_curves_to(d, n_points, alpha_range_end(d), tol)
}

/// Curves at uniform `α` spacing over `[0, alpha_end]`. With `alpha_end = 1`
/// they cover every completely positive member of the family, down to
/// `F_T = 1/(d+1)`.
pub fn tradeoff_curves_to(d: usize, n_points: usize, alpha_end: f64, tol: f64) -> Result<Vec<CurvePoint>> {
    check_range("alpha_end", alpha_end, 0.0, 1.0)?;
    if n_points < 2 {
        return Err(Error::OutOfRange {
            name: "n_points",
            value: n_points as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    Ok((0..n_points)
        .map(|k| {
            let alpha = alpha_end * k as f64 / (n_points - 1) as f64;
            let f_t = transmission_fidelity(alpha, d);
            let f_e_max = estimation_fidelity(gamma_max(alpha, d), d);
            let f_e_min = estimation_fidelity(gamma_min(alpha, d), d);
            let on_boundary = region_classify(&TradeoffPoint { f_t, f_e: f_e_max, d }, tol) == Region::Boundary;
            CurvePoint {
                alpha,
                f_t,
                f_e_max,
                f_e_min,
                on_boundary,
            }
        })
        .collect())
}

/// Upper edge `α ↦ (F_T, (γ_max+1)/(d+1))`; past `α = (d−1)/d` this is the
/// flat top `F_E = 2/(d+1)`.
pub fn boundary_curve(d: usize, n_points: usize) -> Result<Vec<TradeoffPoint>> {
    Ok(tradeoff_curves(d, n_points, Tolerances::default().region)?
        .into_iter()
        .map(|c| TradeoffPoint { f_t: c.f_t, f_e: c.f_e_max, d })
        .collect())
}

/// Lower edge `α ↦ (F_T, (γ_min+1)/(d+1))`.
pub fn lower_curve(d: usize, n_points: usize) -> Result<Vec<TradeoffPoint>> {
    Ok(tradeoff_curves(d, n_points, Tolerances::default().region)?
        .into_iter()
        .map(|c| TradeoffPoint { f_t: c.f_t, f_e: c.f_e_min, d })
        .collect())
}

/// Optimal `N → M` universal cloning fidelity `N/M + (M−N)/M · (N+1)/(d+N)`.
pub fn werner_bound(n_in: u64, m_out: u64, d: usize) -> Result<f64> {
    if n_in < 1 || m_out < n_in {
        return Err(Error::OutOfRange {
            name: "n_in",
            value: n_in as f64,
            lo: 1.0,
            hi: m_out as f64,
        });
    }
    let (n, m, df) = (n_in as f64, m_out as f64, d as f64);
    Ok(n / m + (m - n) / m * (n + 1.0) / (df + n))
}

/// `γ` as a linear function of the seed parameters, with coefficients read
/// off the reduced ancilla state `R = Tr_sys |Ve₁⟩⟨Ve₁|`:
/// `dγ = Tr(P₀ R) = k_a + b k_b + 2 Re(c k_c) + e k_e + f k_f + g k_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPipeline {
    pub d: usize,
    pub alpha: f64,
    pub k_a: f64,
    pub k_b: f64,
    pub k_c: C64,
    pub k_e: f64,
    pub k_f: f64,
    pub k_g: f64,
}

impl GammaPipeline {
    pub fn new(ch: &CovariantChannel) -> Result<Self> {
        let d = ch.d();
        let v = build_isometry(ch);
        let out = v.matrix().apply(&basis_vector(d, 0));
        let r = ComplexMatrix::projector(&out).partial_trace(Subsystem::B, (d, d * d))?;
        let basis = AdaptedBasis::new(d);
        let col = |k: usize| basis.matrix.column(k);
        let [_, eb, fb, gb] = basis.blocks();
        let block = |range: std::ops::Range<usize>| range.map(|k| r.sandwich(&col(k), &col(k)).re).sum();
        Ok(Self {
            d,
            alpha: ch.alpha(),
            k_a: r.sandwich(&col(0), &col(0)).re,
            k_b: r.sandwich(&col(1), &col(1)).re,
            k_c: r.sandwich(&col(1), &col(0)),
            k_e: block(eb),
            k_f: block(fb),
            k_g: block(gb),
        })
    }

    pub fn gamma(&self, b: f64, c: C64, e: f64, f: f64, g: f64) -> f64 {
        (self.k_a + b * self.k_b + 2.0 * (c * self.k_c).re + e * self.k_e + f * self.k_f + g * self.k_g)
            / self.d as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Max,
    Min,
}

/// Result of a numerical search for an extreme of `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaSearch {
    pub gamma: f64,
    pub b: f64,
    pub c: C64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

/// Extreme of `γ` over every admissible seed, with no reduction assumed.
///
/// The normalization is a simplex in `(b, e, f, g)` after scaling, so the
/// weights are `w_i = y_i² / Σ y²`; `c = √b · sin z · e^{iφ}` covers the disk
/// `|c|² ≤ b`. Nelder–Mead runs from `restarts` random starts.
pub fn gamma_extreme_unreduced(
    ch: &CovariantChannel,
    which: Extreme,
    rng: &Rng,
    restarts: usize,
) -> Result<GammaSearch> {
    let pipe = GammaPipeline::new(ch)?;
    let d = ch.d();
    let df = d as f64;
    let n = df * df - 1.0;
    let has_g = d >= 3;
    let n_y = if has_g { 4 } else { 3 };
    let decode = move |x: &[f64]| -> GammaSearch {
        let y = &x[..n_y];
        let s: f64 = y.iter().map(|v| v * v).sum::<f64>().max(1e-300);
        let w: Vec<f64> = y.iter().map(|v| v * v / s).collect();
        let b = n * w[0];
        let e = (df + 1.0) * w[1];
        let f = (df + 1.0) * w[2];
        let g = if has_g { n / (df * (df - 2.0)) * w[3] } else { 0.0 };
        let c = C64::from_polar(b.sqrt() * x[n_y].sin(), x[n_y + 1]);
        GammaSearch {
            gamma: pipe.gamma(b, c, e, f, g),
            b,
            c,
            e,
            f,
            g,
        }
    };
    let sign = match which {
        Extreme::Max => -1.0,
        Extreme::Min => 1.0,
    };
    let starts: Vec<Vec<f64>> = (0..restarts.max(1))
        .map(|k| {
            let mut r = rng.child(k as u64);
            let mut x: Vec<f64> = (0..n_y).map(|_| r.uniform_in(0.1, 1.0)).collect();
            x.push(r.uniform_in(-1.5, 1.5));
            x.push(r.uniform_in(-std::f64::consts::PI, std::f64::consts::PI));
            x
        })
        .collect();
    let opts = NelderMeadOptions {
        max_evals: 6000,
        f_tol: 1e-15,
        x_tol: 1e-10,
        initial_step: 0.3,
    };
    let results: Vec<GammaSearch> = starts
        .par_iter()
        .map(|x0| {
            let first = nelder_mead(|x| sign * decode(x).gamma, x0, &opts);
            // A restart from the best vertex escapes a collapsed simplex.
            let polished = nelder_mead(|x| sign * decode(x).gamma, &first.x, &opts);
            decode(&polished.x)
        })
        .collect();
    let best = results
        .into_iter()
        .min_by(|a, b| (sign * a.gamma).total_cmp(&(sign * b.gamma)))
        .expect("at least one restart");
    Ok(best)
}

/// Extreme of `γ` under the reductions `e = g = 0, f = (d+1) − b/(d−1)`
/// (maximum) or `f = g = 0` (minimum) with `b = c²`: a grid over `c`
/// followed by golden-section refinement of the best cell.
pub fn gamma_extreme_reduced(ch: &CovariantChannel, which: Extreme, grid: usize) -> Result<GammaSearch> {
    let pipe = GammaPipeline::new(ch)?;
    let df = ch.d() as f64;
    let cap = (df * df - 1.0).sqrt();
    let eval = |c: f64| -> GammaSearch {
        let b = c * c;
        let (e, f) = match which {
            Extreme::Max => (0.0, (df + 1.0) - b / (df - 1.0)),
            Extreme::Min => ((df + 1.0) * (1.0 - b / (df * df - 1.0)), 0.0),
        };
        let cz = C64::new(c, 0.0);
        GammaSearch {
            gamma: pipe.gamma(b, cz, e, f, 0.0),
            b,
            c: cz,
            e,
            f,
            g: 0.0,
        }
    };
    let sign = match which {
        Extreme::Max => -1.0,
        Extreme::Min => 1.0,
    };
    let grid = grid.max(3);
    let step = 2.0 * cap / (grid - 1) as f64;
    let best_k = (0..grid)
        .min_by(|&a, &b| {
            let ga = sign * eval(-cap + step * a as f64).gamma;
            let gb = sign * eval(-cap + step * b as f64).gamma;
            ga.total_cmp(&gb)
        })
        .expect("non-empty grid");
    let lo = (-cap + step * best_k as f64 - step).max(-cap);
    let hi = (-cap + step * best_k as f64 + step).min(cap);
    let (c, _) = golden_section(|c| sign * eval(c).gamma, lo, hi, 1e-12);
    Ok(eval(c))
}

/// Best seed and the point it reaches for the channel with `F_T = f_t`.
pub fn optimal_instrument(d: usize, f_t: f64) -> Result<(CovariantChannel, SeedP0, TradeoffPoint)> {
    let alpha = alpha_from_ft(f_t, d)?;
    let ch = CovariantChannel::new(d, alpha.min(1.0), Branch::Plus)?;
    let seed = SeedP0::optimal(&ch);
    let gamma = gamma_from_matrices(&ch, &seed)?;
    Ok((
        ch,
        seed,
        TradeoffPoint {
            f_t,
            f_e: estimation_fidelity(gamma, d),
            d,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(d: usize, alpha: f64) -> CovariantChannel {
        CovariantChannel::new(d, alpha, Branch::Plus).unwrap()
    }

    #[test]
    fn gamma_special_values() {
        let p = GammaParams { alpha: 0.0, b: 3.0, c: 1.0, e: 0.0, f: 0.0, g: 0.0 };
        assert!((gamma_of(&p, 2).unwrap() - 0.5).abs() < 1e-15);
        let p = GammaParams { alpha: 1.0, b: 0.0, c: 0.0, e: 3.0, f: 0.0, g: 0.0 };
        assert!(gamma_of(&p, 2).unwrap().abs() < 1e-15);
        let s = SeedP0::optimal(&ch(2, 0.25));
        let p = GammaParams { alpha: 0.25, b: s.b, c: s.c.re, e: s.e, f: s.f, g: s.g };
        let expect = 0.5 + 3f64.sqrt() / 4.0;
        assert!((gamma_of(&p, 2).unwrap() - expect).abs() < 1e-12);
        assert!((gamma_max(0.25, 2) - expect).abs() < 1e-15);
        assert!((gamma_min(0.125, 2) - 0.5 * (1.0 - 2.0 * 7f64.sqrt() / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn gamma_formula_matches_matrices() {
        let mut rng = Rng::new(5);
        for d in [2, 3] {
            for _ in 0..50 {
                let alpha = rng.uniform();
                let e = rng.uniform_in(0.0, 1.0);
                let f = rng.uniform_in(0.0, 1.0);
                let g = if d > 2 { rng.uniform_in(0.0, 0.5) } else { 0.0 };
                let seed = SeedP0::solve_b(d, C64::new(0.0, 0.0), e, f, g).unwrap();
                let c = seed.b.sqrt() * rng.uniform_in(-1.0, 1.0);
                let p = GammaParams { alpha, b: seed.b, c, e, f, g };
                let closed = gamma_of(&p, d).unwrap();
                let matrices = gamma_from_matrices(&ch(d, alpha), &p.seed(d).unwrap()).unwrap();
                let pipe = GammaPipeline::new(&ch(d, alpha)).unwrap().gamma(p.b, C64::new(c, 0.0), e, f, g);
                assert!((closed - matrices).abs() < 1e-12 && (pipe - matrices).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn branch_points_are_continuous() {
        for d in [2, 3, 4] {
            let df = d as f64;
            let a = (df - 1.0) / df;
            let left = (1.0 + (df - 2.0) * a + 2.0 * (df - 1.0).sqrt() * (a - a * a).sqrt()) / df;
            assert!((left - 1.0).abs() < 1e-14);
            let a = 1.0 / df;
            let left = (1.0 + (df - 2.0) * a - 2.0 * (df - 1.0).sqrt() * (a - a * a).sqrt()) / df;
            assert!(left.abs() < 1e-14);
        }
    }

    #[test]
    fn optimizers_reproduce_extremes() {
        let rng = Rng::new(17);
        for d in [2, 3] {
            for alpha in [0.0, 0.2, 1.0 / d as f64, 0.6, (d as f64 - 1.0) / d as f64, 0.95] {
                let c = ch(d, alpha);
                let hi = gamma_extreme_unreduced(&c, Extreme::Max, &rng, 8).unwrap().gamma;
                let lo = gamma_extreme_unreduced(&c, Extreme::Min, &rng, 8).unwrap().gamma;
                assert!((hi - gamma_max(alpha, d)).abs() < 1e-6, "d={d} α={alpha}: {hi}");
                assert!((lo - gamma_min(alpha, d)).abs() < 1e-6, "d={d} α={alpha}: {lo}");
                let hr = gamma_extreme_reduced(&c, Extreme::Max, 401).unwrap().gamma;
                let lr = gamma_extreme_reduced(&c, Extreme::Min, 401).unwrap().gamma;
                assert!((hr - gamma_max(alpha, d)).abs() < 1e-9);
                assert!((lr - gamma_min(alpha, d)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fidelity_conversions() {
        assert!((estimation_fidelity(1.0, 3) - 0.5).abs() < 1e-15);
        assert!((estimation_fidelity(1.0 / 3.0, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!((estimation_fidelity(0.0, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(alpha_from_ft(1.0, 2).unwrap(), 0.0);
        assert!((alpha_from_ft(2.0 / 3.0, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((alpha_from_ft(1.0 / 3.0, 3).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert!(alpha_from_ft(0.2, 3).is_err());
    }

    #[test]
    fn classification_examples() {
        let tol = 1e-9;
        let pt = |f_t, f_e| TradeoffPoint { f_t, f_e, d: 2 };
        assert_eq!(region_classify(&pt(2.0 / 3.0, 2.0 / 3.0), tol), Region::Boundary);
        assert_eq!(region_classify(&pt(1.0, 0.5), tol), Region::Boundary);
        assert_eq!(region_classify(&pt(0.9, 0.65), tol), Region::Outside);
        assert_eq!(region_classify(&pt(0.6, 0.55), tol), Region::Region1);
        assert_eq!(region_classify(&pt(0.8, 0.55), tol), Region::Region2Interior);
        assert_eq!(region_classify(&pt(0.6, 0.45), tol), Region::Outside);
        assert_eq!(region_classify(&pt(0.2, 0.5), tol), Region::Outside);
    }

    #[test]
    fn boundary_points_lie_on_the_edge() {
        for d in [2, 3, 4] {
            for c in tradeoff_curves(d, 101, 1e-9).unwrap() {
                assert!(c.on_boundary, "d={d} {c:?}");
                if c.alpha < (d as f64 - 1.0) / d as f64 {
                    let r = region2_lhs(d, c.f_t, c.f_e_max) - region2_rhs(d);
                    assert!(r.abs() < 1e-12);
                }
            }
        }
        let b = boundary_curve(2, 11).unwrap();
        assert!((b[0].f_t - 1.0).abs() < 1e-15 && (b[0].f_e - 0.5).abs() < 1e-15);
        let last = b.last().unwrap();
        assert!((last.f_t - 0.5).abs() < 1e-15 && (last.f_e - 2.0 / 3.0).abs() < 1e-15);
        let full = tradeoff_curves_to(2, 11, 1.0, 1e-9).unwrap();
        let end = full.last().unwrap();
        assert!((end.f_t - 1.0 / 3.0).abs() < 1e-15 && (end.f_e_max - 2.0 / 3.0).abs() < 1e-15);
        let l = lower_curve(2, 11).unwrap();
        assert!((l.last().unwrap().f_e - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn qubit_form_agrees_with_general_form() {
        for k in 0..=50 {
            let alpha = 0.5 * k as f64 / 50.0;
            let ft = transmission_fidelity(alpha, 2);
            let fe = estimation_fidelity(gamma_max(alpha, 2), 2);
            assert!((region2_lhs(2, ft, fe) - region2_lhs_qubit(ft, fe)).abs() < 1e-12);
            assert!((region2_rhs(2) - 1.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn werner_values() {
        assert!((werner_bound(1, 2, 2).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert!((werner_bound(3, 3, 4).unwrap() - 1.0).abs() < 1e-15);
        assert!((werner_bound(1, 1_000_000_000, 2).unwrap() - 2.0 / 3.0).abs() < 1e-8);
        assert!(werner_bound(3, 2, 2).is_err());
    }
}
