//! Fluctuations of a collective observable over Haar-random states of a
//! window.
//!
//! For a random state `|Φ⟩` with `A = ⟨Φ|Â|Φ⟩`:
//!
//! - statistical variance `δ_s² = mean(A²) - mean(A)²`
//! - quantum variance `ΔA² = ⟨Φ|Â²|Φ⟩ - A²`, averaged to `δ_q²`
//! - total variance `δ² = δ_s² + δ_q² = tr(ρₙ Â²) - tr(ρₙ Â)²`
//!
//! The exact routes use traces over the window; `δ_s²` uses the second Haar
//! moment `mean(A²) = (t² + s) / (n(n+1))` with `t = tr(PÂP)` and
//! `s = tr((PÂP)²)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::ensemble::{map_samples, micro_average, RandomState, Window};
use crate::fock::{ratio_to_f64, CollectiveObservable};
use crate::stats::{jackknife, Estimate};
use crate::{Error, Result};

/// Tolerance on the imaginary part of an expectation, relative to the
/// largest matrix entry of the observable (and at least absolute).
pub const IMAGINARY_TOLERANCE: f64 = 1e-12;

/// `δ/Ā`, or undefined when `Ā = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Defined(f64),
    Undefined,
}

impl Ratio {
    fn from_parts(delta_sq: f64, mean: f64) -> Self {
        if mean == 0.0 {
            Ratio::Undefined
        } else {
            Ratio::Defined(delta_sq.max(0.0).sqrt() / mean.abs())
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Ratio::Defined(v) => Some(v),
            Ratio::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Exact rational companions of an exact report.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFluctuations {
    pub mean: BigRational,
    pub delta_sq: BigRational,
    pub delta_s_sq: BigRational,
    pub delta_q_sq: BigRational,
}

/// Jackknife standard errors of a Monte Carlo report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McErrors {
    pub mean: f64,
    pub delta_sq: f64,
    pub delta_s_sq: f64,
    pub delta_q_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationReport {
    pub mean: f64,
    pub delta_sq: f64,
    pub delta_s_sq: f64,
    pub delta_q_sq: f64,
    pub ratio: Ratio,
    pub method: Method,
    pub exact: Option<ExactFluctuations>,
    pub mc_stderr: Option<McErrors>,
    pub num_samples: usize,
}

fn check_state(state: &RandomState, observable: &CollectiveObservable) -> Result<()> {
    if state.window().space() != observable.space() {
        return Err(Error::DimensionMismatch {
            expected: observable.dimension(),
            got: state.embedded().len(),
        });
    }
    Ok(())
}

fn inner(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(a, b)| a.conj() * b).sum()
}

fn real_part(z: Complex64, observable: &CollectiveObservable) -> Result<f64> {
    let scale = observable.max_abs_entry().max(1.0);
    if z.im.abs() > IMAGINARY_TOLERANCE * scale * scale {
        return Err(Error::ImaginaryExpectation(z.im));
    }
    Ok(z.re)
}

/// `⟨Φ|A|Φ⟩`.
pub fn expectation(state: &RandomState, observable: &CollectiveObservable) -> Result<f64> {
    check_state(state, observable)?;
    let psi = state.embedded();
    real_part(inner(psi, &observable.apply(psi)?), observable)
}

/// `(⟨Φ|A|Φ⟩, ⟨Φ|A²|Φ⟩)` with `A²` applied as two band products.
pub fn first_two_moments(state: &RandomState, observable: &CollectiveObservable) -> Result<(f64, f64)> {
    check_state(state, observable)?;
    let psi = state.embedded();
    let a_psi = observable.apply(psi)?;
    let aa_psi = observable.apply(&a_psi)?;
    Ok((
        real_part(inner(psi, &a_psi), observable)?,
        real_part(inner(psi, &aa_psi), observable)?,
    ))
}

/// `ΔA² = ⟨Φ|A²|Φ⟩ - ⟨Φ|A|Φ⟩²`, clamped at zero against rounding.
pub fn quantum_variance(state: &RandomState, observable: &CollectiveObservable) -> Result<f64> {
    let (a, aa) = first_two_moments(state, observable)?;
    Ok((aa - a * a).max(0.0))
}

struct WindowTraces {
    n: BigInt,
    /// tr(P A)
    trace: BigRational,
    /// tr(P A²), including couplings that leave the window
    trace_sq: BigRational,
    /// tr((P A P)²)
    projected_trace_sq: BigRational,
}

fn window_traces(window: &Window, observable: &CollectiveObservable) -> Result<WindowTraces> {
    window.check(observable)?;
    let (lo, hi) = window.index_range();
    let diag = &observable.diagonal()[lo..=hi];
    let trace: BigRational = diag.iter().sum();
    let trace_sq: BigRational = (lo..=hi).map(|k| observable.squared_diagonal(k)).sum();
    let diag_sq: BigRational = diag.iter().map(|d| d * d).sum();
    let inner_bonds: BigRational = (lo..hi).map(|k| observable.coupling_sq(k)).sum();
    Ok(WindowTraces {
        n: BigInt::from(window.dimension()),
        trace,
        trace_sq,
        projected_trace_sq: diag_sq + inner_bonds * BigInt::from(2),
    })
}

/// Exact `Ā`, `δ²`, `δ_s²` and `δ_q² = δ² - δ_s²` from window traces.
pub fn exact_fluctuations(window: &Window, observable: &CollectiveObservable) -> Result<ExactFluctuations> {
    let t = window_traces(window, observable)?;
    let mean = &t.trace / &t.n;
    let delta_sq = &t.trace_sq / &t.n - &mean * &mean;
    let pairs: BigInt = &t.n * (&t.n + 1);
    let delta_s_sq = (&t.trace * &t.trace + &t.projected_trace_sq) / pairs - &mean * &mean;
    let delta_q_sq = &delta_sq - &delta_s_sq;
    debug_assert!(!delta_sq.is_negative() && !delta_s_sq.is_negative() && !delta_q_sq.is_negative());
    Ok(ExactFluctuations { mean, delta_sq, delta_s_sq, delta_q_sq })
}

/// `δ² = tr(ρₙA²) - [tr(ρₙA)]²` and its split, exactly.
pub fn exact_total_variance(window: &Window, observable: &CollectiveObservable) -> Result<FluctuationReport> {
    let exact = exact_fluctuations(window, observable)?;
    let mean = ratio_to_f64(&exact.mean);
    let delta_sq = ratio_to_f64(&exact.delta_sq);
    Ok(FluctuationReport {
        mean,
        delta_sq,
        delta_s_sq: ratio_to_f64(&exact.delta_s_sq),
        delta_q_sq: ratio_to_f64(&exact.delta_q_sq),
        ratio: if exact.mean.is_zero() { Ratio::Undefined } else { Ratio::from_parts(delta_sq, mean) },
        method: Method::Exact,
        exact: Some(exact),
        mc_stderr: None,
        num_samples: 0,
    })
}

/// `δ_s²` from the second Haar moment.
pub fn exact_statistical_variance(window: &Window, observable: &CollectiveObservable) -> Result<BigRational> {
    Ok(exact_fluctuations(window, observable)?.delta_s_sq)
}

/// `δ/Ā` from exact traces.
pub fn typicality_ratio(window: &Window, observable: &CollectiveObservable) -> Result<Ratio> {
    Ok(exact_total_variance(window, observable)?.ratio)
}

/// Monte Carlo estimates of `δ_s²` (variance of the per-sample expectation),
/// `δ_q²` (mean per-sample quantum variance) and their sum, with jackknife
/// errors.
///
/// When the observable acts on the window as a scalar every sampled state is
/// an eigenstate and all three estimates are returned as exact zeros.
pub fn mc_decomposition(
    window: &Window,
    observable: &CollectiveObservable,
    master_seed: u64,
    num_samples: usize,
) -> Result<FluctuationReport> {
    if num_samples < 100 {
        return Err(Error::TooFewSamples { min: 100, got: num_samples });
    }
    window.check(observable)?;
    let (lo, hi) = window.index_range();
    if observable.is_scalar_on(lo, hi) {
        let mean = ratio_to_f64(&micro_average(window, observable)?);
        return Ok(FluctuationReport {
            mean,
            delta_sq: 0.0,
            delta_s_sq: 0.0,
            delta_q_sq: 0.0,
            ratio: Ratio::from_parts(0.0, mean),
            method: Method::MonteCarlo,
            exact: None,
            mc_stderr: Some(McErrors { mean: 0.0, delta_sq: 0.0, delta_s_sq: 0.0, delta_q_sq: 0.0 }),
            num_samples,
        });
    }

    let moments = map_samples(window, master_seed, num_samples, |s| first_two_moments(s, observable));
    let moments = moments.into_iter().collect::<Result<Vec<_>>>()?;
    // Centre on the exact mean so the variance functionals do not cancel
    // catastrophically; the shift drops out of every variance.
    let shift = ratio_to_f64(&micro_average(window, observable)?);
    let features: Vec<[f64; 3]> = moments
        .iter()
        .map(|&(a, aa)| {
            let centred = a - shift;
            [centred, centred * centred, (aa - a * a).max(0.0)]
        })
        .collect();

    let mean = jackknife(&features, |m| m[0] + shift);
    let delta_s = jackknife(&features, |m| m[1] - m[0] * m[0]);
    let delta_q = jackknife(&features, |m| m[2]);
    let total = jackknife(&features, |m| m[1] - m[0] * m[0] + m[2]);
    Ok(monte_carlo_report(mean, delta_s, delta_q, total, num_samples))
}

fn monte_carlo_report(mean: Estimate, delta_s: Estimate, delta_q: Estimate, total: Estimate, num_samples: usize) -> FluctuationReport {
    FluctuationReport {
        mean: mean.value,
        delta_sq: total.value,
        delta_s_sq: delta_s.value,
        delta_q_sq: delta_q.value,
        ratio: Ratio::from_parts(total.value, mean.value),
        method: Method::MonteCarlo,
        exact: None,
        mc_stderr: Some(McErrors {
            mean: mean.stderr,
            delta_sq: total.stderr,
            delta_s_sq: delta_s.stderr,
            delta_q_sq: delta_q.stderr,
        }),
        num_samples,
    }
}
