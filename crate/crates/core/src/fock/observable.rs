use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use super::band::BandMatrix;
use super::moments::{ratio_to_f64, Moment, MomentMatrix};
use super::space::TwoModeSpace;
use crate::{Error, Result};

/// Exact real number `coeff · √radicand` with a non-negative integer radicand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    coeff: BigRational,
    radicand: BigInt,
}

impl Surd {
    fn new(coeff: BigRational, radicand: BigInt) -> Self {
        if coeff.is_zero() || radicand.is_zero() {
            Self { coeff: BigRational::zero(), radicand: BigInt::zero() }
        } else {
            Self { coeff, radicand }
        }
    }

    fn from_moment_times_sqrt(m: &Moment, count: u64) -> Self {
        let (coeff, r) = m.surd_parts();
        Self::new(coeff, BigInt::from(count) * BigInt::from(r))
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// The value as a rational when the radicand is a perfect square.
    pub fn to_rational(&self) -> Option<BigRational> {
        let root = self.radicand.sqrt();
        (&root * &root == self.radicand).then(|| &self.coeff * BigRational::from(root))
    }

    /// Exact product with another surd, when it is rational.
    pub fn product(&self, other: &Self) -> Option<BigRational> {
        let r = &self.radicand * &other.radicand;
        let root = r.sqrt();
        (&root * &root == r).then(|| &self.coeff * &other.coeff * BigRational::from(root))
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.radicand.to_string().parse::<f64>().unwrap_or(f64::NAN);
        ratio_to_f64(&self.coeff) * r.sqrt()
    }
}

/// A collective one-body observable `Σ_ij m_ij a_i† a_j` on the `N`-particle
/// two-mode ladder.
///
/// Single-particle bilinears only move one boson, so the matrix is
/// tridiagonal in `ℓ`. Entries are kept exactly (diagonal as rationals,
/// off-diagonals as surds) alongside an `f64` band for vector work.
#[derive(Debug, Clone)]
pub struct CollectiveObservable {
    space: TwoModeSpace,
    moment: MomentMatrix,
    diag: Vec<BigRational>,
    // entry (k + 1, k) from m₀₁ a₀† a₁, and (k, k + 1) from m₁₀ a₁† a₀
    lower: Vec<Surd>,
    upper: Vec<Surd>,
    band: BandMatrix<f64>,
}

impl CollectiveObservable {
    pub fn new(space: TwoModeSpace, moment: MomentMatrix) -> Result<Self> {
        let (m00, m11) = moment.diagonal_rationals().ok_or(Error::InvalidParameter {
            name: "moment",
            reason: "diagonal single-particle moments must be rational".into(),
        })?;
        let dim = space.dimension();
        let mut diag = Vec::with_capacity(dim);
        let mut lower = Vec::with_capacity(dim.saturating_sub(1));
        let mut upper = Vec::with_capacity(dim.saturating_sub(1));
        for ell in space.ells() {
            let (n0, n1) = space.occupations(ell).expect("ell on ladder");
            // a₀†a₀ and a₁†a₁ count particles
            diag.push(&m00 * BigInt::from(n0) + &m11 * BigInt::from(n1));
            if ell < space.half() {
                // a₀† a₁ |n₀, n₁⟩ = √((n₀ + 1) n₁) |n₀ + 1, n₁ - 1⟩
                lower.push(Surd::from_moment_times_sqrt(moment.get(0, 1), (n0 + 1) * n1));
                // a₁† a₀ |n₀ + 1, n₁ - 1⟩ = √((n₀ + 1) n₁) |n₀, n₁⟩
                let (m0, m1) = (n0 + 1, n1 - 1);
                upper.push(Surd::from_moment_times_sqrt(moment.get(1, 0), m0 * (m1 + 1)));
            }
        }
        let band = BandMatrix::tridiagonal(
            lower.iter().map(Surd::to_f64).collect(),
            diag.iter().map(ratio_to_f64).collect(),
            upper.iter().map(Surd::to_f64).collect(),
        );
        Ok(Self { space, moment, diag, lower, upper, band })
    }

    /// The total number operator `a₀†a₀ + a₁†a₁`.
    pub fn number(space: TwoModeSpace) -> Self {
        Self::new(space, MomentMatrix::identity()).expect("identity moments are rational")
    }

    pub fn space(&self) -> TwoModeSpace {
        self.space
    }

    pub fn moment(&self) -> &MomentMatrix {
        &self.moment
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    /// Exact diagonal, indexed by ladder position.
    pub fn diagonal(&self) -> &[BigRational] {
        &self.diag
    }

    /// Exact entries `(k + 1, k)`.
    pub fn lower(&self) -> &[Surd] {
        &self.lower
    }

    /// Exact entries `(k, k + 1)`.
    pub fn upper(&self) -> &[Surd] {
        &self.upper
    }

    pub fn band(&self) -> &BandMatrix<f64> {
        &self.band
    }

    /// `true` when the observable couples no two ladder states.
    pub fn is_diagonal(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(Surd::is_zero)
    }

    pub fn is_hermitian(&self) -> bool {
        self.lower == self.upper && self.band == self.band.transpose()
    }

    /// Exact band, available when every entry is rational.
    pub fn exact_band(&self) -> Option<BandMatrix<BigRational>> {
        let lower = self.lower.iter().map(Surd::to_rational).collect::<Option<Vec<_>>>()?;
        let upper = self.upper.iter().map(Surd::to_rational).collect::<Option<Vec<_>>>()?;
        Some(BandMatrix::tridiagonal(lower, self.diag.clone(), upper))
    }

    /// Exact diagonal entry `(A²)_{kk}` at ladder position `k`.
    pub fn squared_diagonal(&self, k: usize) -> BigRational {
        let mut acc = &self.diag[k] * &self.diag[k];
        if k < self.lower.len() {
            acc += self.upper[k].product(&self.lower[k]).expect("conjugate surds share a radicand");
        }
        if k > 0 {
            acc += self.lower[k - 1].product(&self.upper[k - 1]).expect("conjugate surds share a radicand");
        }
        acc
    }

    /// Exact `|A_{k,k+1}|²`.
    pub fn coupling_sq(&self, k: usize) -> BigRational {
        self.upper[k].product(&self.lower[k]).expect("conjugate surds share a radicand")
    }

    /// `A²` as a pentadiagonal band.
    pub fn square_band(&self) -> BandMatrix<f64> {
        self.band.matmul(&self.band).expect("same dimension")
    }

    pub fn apply(&self, state: &[Complex64]) -> Result<Vec<Complex64>> {
        self.band.apply(state)
    }

    pub fn apply_real(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.band.apply(state)
    }

    /// Exact product; fails with [`Error::NotExact`] if some entry is
    /// irrational.
    pub fn apply_exact(&self, state: &[BigRational]) -> Result<Vec<BigRational>> {
        if state.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: state.len() });
        }
        self.exact_band().ok_or(Error::NotExact)?.apply(state)
    }

    /// Largest absolute entry, a scale for numerical tolerances.
    pub fn max_abs_entry(&self) -> f64 {
        self.band.entries().map(|(_, _, v)| v.abs()).fold(0.0, f64::max)
    }

    /// Exact check that the restriction to ladder positions `lo..=hi` is a
    /// multiple of the identity and no entry couples it to the outside.
    pub fn is_scalar_on(&self, lo: usize, hi: usize) -> bool {
        let first = &self.diag[lo];
        let flat = self.diag[lo..=hi].iter().all(|d| d == first);
        let bonds = self.lower.len();
        let closed = (lo.saturating_sub(1)..=hi)
            .filter(|&k| k < bonds)
            .all(|k| self.lower[k].is_zero() && self.upper[k].is_zero());
        flat && closed
    }
}

/// Builds the collective observable of a moment matrix on a ladder.
pub fn build_observable(space: TwoModeSpace, moment: MomentMatrix) -> Result<CollectiveObservable> {
    CollectiveObservable::new(space, moment)
}
