//! Microcanonical windows and Haar-random states on them.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::fock::{CollectiveObservable, TwoModeSpace};
use crate::{Error, Result};

/// Symmetric set of imbalances `{-k, …, k}` on a ladder; `n = 2k + 1`.
///
/// The microcanonical density matrix `ρₙ = Pₙ / n` is implicit: uniform
/// weight `1/n` on every member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    space: TwoModeSpace,
    half_width: u64,
}

impl Window {
    pub fn new(space: TwoModeSpace, half_width: u64) -> Result<Self> {
        let half = space.particles() / 2;
        if half_width > half {
            return Err(Error::WindowTooWide { k: half_width, half });
        }
        Ok(Self { space, half_width })
    }

    pub fn space(&self) -> TwoModeSpace {
        self.space
    }

    pub fn half_width(&self) -> u64 {
        self.half_width
    }

    /// Window dimension `n`.
    pub fn dimension(&self) -> usize {
        2 * self.half_width as usize + 1
    }

    pub fn members(&self) -> impl Iterator<Item = i64> {
        let k = self.half_width as i64;
        -k..=k
    }

    /// Ladder positions `(lo, hi)` spanned by the window, inclusive.
    pub fn index_range(&self) -> (usize, usize) {
        let centre = self.space.half() as usize;
        let k = self.half_width as usize;
        (centre - k, centre + k)
    }

    pub(crate) fn check(&self, observable: &CollectiveObservable) -> Result<()> {
        if observable.space() != self.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.dimension(),
                got: observable.dimension(),
            });
        }
        Ok(())
    }
}

pub fn make_window(space: TwoModeSpace, half_width: u64) -> Result<Window> {
    Window::new(space, half_width)
}

/// `tr(ρₙ A) = (1/n) Σ_{ℓ ∈ window} ⟨ℓ|A|ℓ⟩`, exactly.
pub fn micro_average(window: &Window, observable: &CollectiveObservable) -> Result<BigRational> {
    window.check(observable)?;
    let (lo, hi) = window.index_range();
    let total: BigRational = observable.diagonal()[lo..=hi].iter().sum();
    Ok(total / BigInt::from(window.dimension()))
}

/// Seed material for one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SamplerConfig {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SamplerConfig {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }
}

/// Single-owner Gaussian source.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(config: SamplerConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
        rng.set_stream(config.stream_index);
        Self { rng }
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re, im)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

/// A pure state `Σ_ℓ z_ℓ |ℓ⟩` supported on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomState {
    window: Window,
    coefficients: Vec<Complex64>,
    embedded: Vec<Complex64>,
}

impl RandomState {
    /// Wraps explicit window coefficients; they are normalised here.
    pub fn from_coefficients(window: Window, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != window.dimension() {
            return Err(Error::DimensionMismatch { expected: window.dimension(), got: coefficients.len() });
        }
        let norm = coefficients.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter { name: "coefficients", reason: "zero or non-finite norm".into() });
        }
        let coefficients: Vec<Complex64> = coefficients.into_iter().map(|z| z / norm).collect();
        let mut embedded = vec![Complex64::zero(); window.space().dimension()];
        let (lo, hi) = window.index_range();
        embedded[lo..=hi].copy_from_slice(&coefficients);
        Ok(Self { window, coefficients, embedded })
    }

    /// The basis state `|ℓ⟩`, `ℓ` inside the window.
    pub fn basis(window: Window, ell: i64) -> Result<Self> {
        let k = window.half_width() as i64;
        if ell.abs() > k {
            return Err(Error::InvalidParameter { name: "ell", reason: format!("{ell} outside window ±{k}") });
        }
        let mut z = vec![Complex64::zero(); window.dimension()];
        z[(ell + k) as usize] = Complex64::new(1.0, 0.0);
        Self::from_coefficients(window, z)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Coefficients `z_ℓ`, ordered `ℓ = -k..=k`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// The state over the whole ladder.
    pub fn embedded(&self) -> &[Complex64] {
        &self.embedded
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        let z = self.coefficients.iter().map(|c| c * phase).collect();
        Self::from_coefficients(self.window, z).expect("phase keeps the norm")
    }

    /// Applies a unitary acting on the window coordinates.
    pub fn transformed(&self, unitary: &DMatrix<Complex64>) -> Result<Self> {
        let n = self.window.dimension();
        if unitary.nrows() != n || unitary.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: unitary.nrows() });
        }
        let z = unitary * nalgebra::DVector::from_column_slice(&self.coefficients);
        Self::from_coefficients(self.window, z.iter().copied().collect())
    }
}

/// Draws a Haar-uniform unit vector on the window: independent standard
/// complex Gaussians, normalised.
pub fn sample_state(window: &Window, sampler: &mut Sampler) -> RandomState {
    loop {
        let z: Vec<Complex64> = (0..window.dimension()).map(|_| sampler.complex_normal()).collect();
        if let Ok(state) = RandomState::from_coefficients(*window, z) {
            return state;
        }
    }
}

/// Haar-random `n × n` unitary from the QR decomposition of a complex
/// Gaussian matrix, with the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary(n: usize, sampler: &mut Sampler) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| sampler.complex_normal());
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Samples per random stream in parallel Monte Carlo.
pub const BLOCK_SIZE: usize = 1024;

/// Evaluates `f` on `num_samples` Haar-random states of `window`.
///
/// Sample `s` is drawn from stream `s / BLOCK_SIZE` of `master_seed`, so the
/// returned sequence does not depend on how many rayon workers run it.
pub fn map_samples<R, F>(window: &Window, master_seed: u64, num_samples: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(&RandomState) -> R + Sync,
{
    let blocks = num_samples.div_ceil(BLOCK_SIZE);
    let per_block: Vec<Vec<R>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut sampler = Sampler::new(SamplerConfig::new(master_seed, b as u64));
            let len = BLOCK_SIZE.min(num_samples - b * BLOCK_SIZE);
            (0..len).map(|_| f(&sample_state(window, &mut sampler))).collect()
        })
        .collect();
    per_block.into_iter().flatten().collect()
}

/// Empirical first and second moments of the window coefficients.
#[derive(Debug, Clone)]
pub struct CoefficientMoments {
    pub num_samples: usize,
    pub dimension: usize,
    /// Empirical `mean(z_ℓ)`.
    pub means: Vec<Complex64>,
    /// Empirical `mean(z*_{ℓ₁} z_{ℓ₂})`, row `ℓ₁`, column `ℓ₂`.
    pub covariance: DMatrix<Complex64>,
    /// Standard error of each covariance entry (modulus of the complex
    /// sample-mean error).
    pub covariance_stderr: DMatrix<f64>,
    pub max_abs_mean: f64,
    pub max_cov_deviation: f64,
    /// Largest `|cov - δ/n| / stderr` over entries with nonzero stderr.
    pub max_cov_zscore: f64,
    /// `1/√(num_samples · n)`, the scale of the mean's fluctuations.
    pub stderr_scale: f64,
}

/// Compares sampled coefficients with `mean(z) = 0`,
/// `mean(z*_{ℓ₁} z_{ℓ₂}) = δ_{ℓ₁ℓ₂}/n`.
pub fn coefficient_moment_check(window: &Window, master_seed: u64, num_samples: usize) -> Result<CoefficientMoments> {
    if num_samples < 100 {
        return Err(Error::TooFewSamples { min: 100, got: num_samples });
    }
    let n = window.dimension();
    let samples = map_samples(window, master_seed, num_samples, |s| s.coefficients().to_vec());
    let count = num_samples as f64;

    let mut means = vec![Complex64::zero(); n];
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    let mut sum_re_sq = DMatrix::<f64>::zeros(n, n);
    let mut sum_im_sq = DMatrix::<f64>::zeros(n, n);
    for z in &samples {
        for (m, zi) in means.iter_mut().zip(z) {
            *m += zi;
        }
        for a in 0..n {
            for b in 0..n {
                let v = z[a].conj() * z[b];
                sum[(a, b)] += v;
                sum_re_sq[(a, b)] += v.re * v.re;
                sum_im_sq[(a, b)] += v.im * v.im;
            }
        }
    }
    means.iter_mut().for_each(|m| *m /= count);
    let covariance = sum.map(|v| v / count);

    let target = 1.0 / n as f64;
    let mut covariance_stderr = DMatrix::<f64>::zeros(n, n);
    let mut max_cov_deviation = 0.0f64;
    let mut max_cov_zscore = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let mean = covariance[(a, b)];
            let var_re = (sum_re_sq[(a, b)] / count - mean.re * mean.re).max(0.0);
            let var_im = (sum_im_sq[(a, b)] / count - mean.im * mean.im).max(0.0);
            let se = ((var_re + var_im) / (count - 1.0)).sqrt();
            covariance_stderr[(a, b)] = se;
            let expected = if a == b { target } else { 0.0 };
            let dev = (mean - expected).norm();
            max_cov_deviation = max_cov_deviation.max(dev);
            if se > 0.0 {
                max_cov_zscore = max_cov_zscore.max(dev / se);
            }
        }
    }
    Ok(CoefficientMoments {
        num_samples,
        dimension: n,
        max_abs_mean: means.iter().map(|m| m.norm()).fold(0.0, f64::max),
        means,
        covariance,
        covariance_stderr,
        max_cov_deviation,
        max_cov_zscore,
        stderr_scale: 1.0 / (count * n as f64).sqrt(),
    })
}
