//! Expansion coefficients of `δX_p²` for the symmetric two-mode window and
//! the scaling of the relative fluctuation `δX/X̄` with `N`.
//!
//! With `d_ℓ = m₀₀(N/2+ℓ) + m₁₁(N/2-ℓ)` and couplings
//! `|A_{ℓ,ℓ+1}|² = |m₀₁|² (N/2+ℓ+1)(N/2-ℓ)`, a window `|ℓ| ≤ k` gives in
//! closed form
//!
//! ```text
//! X̄  = (N/2)(m₀₀ + m₁₁)
//! δ² = (m₁₁ - m₀₀)² k(k+1)/3 + |m₀₁|² (N²/2 + N - 2k(k+1)/3)
//! ```
//!
//! so the `N²/4` coefficient is `2|m₀₁|²` and, for even powers,
//! `δ² = (m₁₁ - m₀₀)² (n² - 1)/12` exactly.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::ensemble::Window;
use crate::fock::{build_observable, ratio_to_f64, MomentMatrix, MomentTable, TwoModeSpace};
use crate::stats::{least_squares, slope};
use crate::typicality::{exact_fluctuations, Ratio};
use crate::{Error, Result};

/// Coefficients of `N²/4` and `n²` in `δX_p²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    /// Power of `x` in the single-particle observable.
    pub power: u32,
    /// `2|m₀₁|²`
    pub d20: BigRational,
    /// `(m₁₁ - m₀₀)²/12`
    pub d02: BigRational,
    pub remainder: &'static str,
}

impl ExpansionCoefficients {
    pub fn nu(&self) -> Option<u32> {
        self.power.is_multiple_of(2).then_some(self.power / 2)
    }
}

fn positive_nu(nu: u32) -> Result<u32> {
    if nu == 0 {
        return Err(Error::InvalidParameter { name: "nu", reason: "must be at least 1".into() });
    }
    nu.checked_mul(2).ok_or(Error::Capacity { power: u32::MAX, max: MomentTable::default().p_max() })
}

/// Coefficients for `X_{2ν}`.
pub fn analytic_coefficients(nu: u32) -> Result<ExpansionCoefficients> {
    coefficients_for_power(positive_nu(nu)?)
}

/// Coefficients for `X_p` with any power, including odd ones.
pub fn coefficients_for_power(power: u32) -> Result<ExpansionCoefficients> {
    let m = MomentTable::default().matrix(power)?;
    Ok(coefficients_for_moment(power, &m))
}

fn coefficients_for_moment(power: u32, m: &MomentMatrix) -> ExpansionCoefficients {
    let (m00, m11) = m.diagonal_rationals().expect("oscillator diagonal is rational");
    let diff = m11 - m00;
    ExpansionCoefficients {
        power,
        d20: m.m01().square() * BigInt::from(2),
        d02: &diff * &diff / BigInt::from(12),
        remainder: "O(N): |m01|^2 N - 2|m01|^2 k(k+1)/3 - (m11-m00)^2/12",
    }
}

/// Exact mean and total variance of `X_p` on the window `|ℓ| ≤ k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseVariance {
    pub mean: BigRational,
    pub delta_sq: BigRational,
}

impl CaseVariance {
    pub fn ratio(&self) -> Ratio {
        if self.mean.is_zero() {
            Ratio::Undefined
        } else {
            Ratio::Defined(ratio_to_f64(&self.delta_sq).sqrt() / ratio_to_f64(&self.mean).abs())
        }
    }
}

/// Closed-form `(X̄, δ²)` for an arbitrary moment matrix; no ladder is
/// built, so `N` may be large.
pub fn closed_form_variance(moment: &MomentMatrix, particles: u64, half_width: u64) -> Result<CaseVariance> {
    let space = TwoModeSpace::new(particles)?;
    Window::new(space, half_width)?;
    let (m00, m11) = moment.diagonal_rationals().ok_or(Error::InvalidParameter {
        name: "moment",
        reason: "diagonal single-particle moments must be rational".into(),
    })?;
    let n = BigRational::from_integer(BigInt::from(particles));
    let k = BigInt::from(half_width);
    let var_ell = BigRational::new(&k * (&k + 1), BigInt::from(3));
    let diff = &m11 - &m00;
    let mean = &n / BigInt::from(2) * (&m00 + &m11);
    let coupling = moment.m01().square() * (&n * &n / BigInt::from(2) + &n - &var_ell * BigInt::from(2));
    let delta_sq = &diff * &diff * var_ell + coupling;
    Ok(CaseVariance { mean, delta_sq })
}

/// `(X̄, δ²)` for `X_{2ν}` on the window of half-width `k`, in closed form.
pub fn exact_case_variance(nu: u32, particles: u64, half_width: u64) -> Result<CaseVariance> {
    let m = MomentTable::default().matrix(positive_nu(nu)?)?;
    closed_form_variance(&m, particles, half_width)
}

/// Exact `δ²` from window traces of the explicitly built observable.
pub fn trace_variance(moment: &MomentMatrix, particles: u64, half_width: u64) -> Result<CaseVariance> {
    let space = TwoModeSpace::new(particles)?;
    let window = Window::new(space, half_width)?;
    let obs = build_observable(space, moment.clone())?;
    let e = exact_fluctuations(&window, &obs)?;
    Ok(CaseVariance { mean: e.mean, delta_sq: e.delta_sq })
}

/// One `(N, n, δ²)` data point for an expansion fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePoint {
    pub particles: u64,
    pub dimension: u64,
    pub delta_sq: f64,
}

/// Least-squares fit of `δ²` on `{N²/4, n², N, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit {
    pub d20: f64,
    pub d02: f64,
    pub linear: f64,
    pub constant: f64,
    pub max_residual: f64,
    pub points: Vec<VariancePoint>,
}

/// Fits the expansion to given data; needs at least three distinct `N` and
/// three distinct `n`.
pub fn fit_points(points: &[VariancePoint]) -> Result<ExpansionFit> {
    let distinct = |f: fn(&VariancePoint) -> u64| {
        let mut v: Vec<u64> = points.iter().map(f).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    let (ns, dims) = (distinct(|p| p.particles), distinct(|p| p.dimension));
    if ns < 3 || dims < 3 {
        return Err(Error::DegenerateGrid(format!(
            "need at least 3 distinct N and 3 distinct n, got {ns} and {dims}"
        )));
    }
    let basis = |p: &VariancePoint| {
        let n = p.particles as f64;
        let d = p.dimension as f64;
        [n * n / 4.0, d * d, n, 1.0]
    };
    let design = DMatrix::from_fn(points.len(), 4, |i, j| basis(&points[i])[j]);
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.delta_sq));
    let beta = least_squares(&design, &y)?;
    let max_residual = (&design * &beta - &y).amax();
    Ok(ExpansionFit {
        d20: beta[0],
        d02: beta[1],
        linear: beta[2],
        constant: beta[3],
        max_residual,
        points: points.to_vec(),
    })
}

/// Fits the expansion of `δX_p²` over the grid `N × k`, using exact
/// trace variances of the built observables.
pub fn fit_expansion_power(power: u32, grid_n: &[u64], grid_k: &[u64]) -> Result<ExpansionFit> {
    let moment = MomentTable::default().matrix(power)?;
    let pairs: Vec<(u64, u64)> = grid_n.iter().flat_map(|&n| grid_k.iter().map(move |&k| (n, k))).collect();
    let points = pairs
        .par_iter()
        .map(|&(n, k)| {
            let v = trace_variance(&moment, n, k)?;
            Ok(VariancePoint { particles: n, dimension: 2 * k + 1, delta_sq: ratio_to_f64(&v.delta_sq) })
        })
        .collect::<Result<Vec<_>>>()?;
    fit_points(&points)
}

/// [`fit_expansion_power`] for `X_{2ν}`.
pub fn fit_expansion(nu: u32, grid_n: &[u64], grid_k: &[u64]) -> Result<ExpansionFit> {
    fit_expansion_power(positive_nu(nu)?, grid_n, grid_k)
}

/// Default fit grid: `N ∈ {200, 400, 800}`, `k ∈ {2, 5, 10}`.
pub const DEFAULT_FIT_N: [u64; 3] = [200, 400, 800];
pub const DEFAULT_FIT_K: [u64; 3] = [2, 5, 10];

/// Window half-width `k = round_half_up(c·N^α / 2)`, clamped to `[0, N/2]`.
pub fn half_width_for(particles: u64, alpha: f64, c: f64) -> u64 {
    let raw = (c * (particles as f64).powf(alpha) / 2.0 + 0.5).floor();
    let k = if raw.is_finite() && raw > 0.0 { raw.to_u64().unwrap_or(u64::MAX) } else { 0 };
    k.min(particles / 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub nu: u32,
    pub particles: u64,
    pub half_width: u64,
    pub dimension: u64,
    pub mean: f64,
    pub delta_sq: f64,
    pub ratio: Ratio,
    pub exact: CaseVariance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub nu: u32,
    pub alpha: f64,
    pub c: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Least-squares slope of `log(δ/X̄)` against `log N`.
    pub fn log_log_slope(&self) -> Result<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .rows
            .iter()
            .filter_map(|r| r.ratio.value().filter(|v| *v > 0.0).map(|v| ((r.particles as f64).ln(), v.ln())))
            .unzip();
        if xs.len() < 2 {
            return Err(Error::DegenerateGrid("need two rows with a positive ratio".into()));
        }
        slope(&xs, &ys)
    }
}

/// Exact `(X̄, δ², δ/X̄)` of `X_{2ν}` for each `N` with `n = 2k+1`,
/// `k = round_half_up(c·N^α/2)`.
pub fn scaling_sweep(nu: u32, alpha: f64, c: f64, particle_counts: &[u64]) -> Result<SweepResult> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter { name: "alpha", reason: format!("{alpha} not in [0, 1]") });
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::InvalidParameter { name: "c", reason: format!("{c} is not a finite non-negative number") });
    }
    if particle_counts.is_empty() {
        return Err(Error::InvalidParameter { name: "N-list", reason: "empty".into() });
    }
    let moment = MomentTable::default().matrix(positive_nu(nu)?)?;
    let mut rows = particle_counts
        .par_iter()
        .map(|&n| {
            let k = half_width_for(n, alpha, c);
            let exact = closed_form_variance(&moment, n, k)?;
            Ok(SweepRow {
                nu,
                particles: n,
                half_width: k,
                dimension: 2 * k + 1,
                mean: ratio_to_f64(&exact.mean),
                delta_sq: ratio_to_f64(&exact.delta_sq),
                ratio: exact.ratio(),
                exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.nu, r.particles));
    Ok(SweepResult { nu, alpha, c, rows })
}
