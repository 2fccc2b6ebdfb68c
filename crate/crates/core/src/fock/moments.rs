//! Exact single-particle moments `⟨φ_i|x^p|φ_j⟩` of the two lowest
//! harmonic-oscillator eigenfunctions
//!
//! ```text
//! φ₀(x) = π^{-1/4} e^{-x²/2},    φ₁(x) = √2 π^{-1/4} x e^{-x²/2}.
//! ```
//!
//! All three products reduce to Gaussian moments
//! `μ_{2m} = π^{-1/2} ∫ x^{2m} e^{-x²} dx = (2m)! / (4^m m!)`:
//!
//! - `⟨φ₀|x^{2m}|φ₀⟩ = μ_{2m}`
//! - `⟨φ₁|x^{2m}|φ₁⟩ = 2 μ_{2m+2}`
//! - `⟨φ₀|x^{2m+1}|φ₁⟩ = √2 μ_{2m+2}`
//!
//! and the remaining parity combinations vanish. The cross moments carry an
//! irrational `√2`, kept symbolic so that `|m₀₁|²` stays rational.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Default bound on the power `p` accepted by exact moment evaluation.
pub const DEFAULT_P_MAX: u32 = 64;

/// An exact real number of the form `q` or `q·√2` with `q` rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Moment {
    coeff: BigRational,
    sqrt2: bool,
}

impl Moment {
    pub fn new(coeff: BigRational, sqrt2: bool) -> Self {
        let sqrt2 = sqrt2 && !coeff.is_zero();
        Self { coeff, sqrt2 }
    }

    pub fn rational(coeff: BigRational) -> Self {
        Self::new(coeff, false)
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn zero() -> Self {
        Self::rational(BigRational::zero())
    }

    /// Rational coefficient `q`.
    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    /// `true` when the value carries a factor `√2`.
    pub fn has_sqrt2(&self) -> bool {
        self.sqrt2
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// The value as a rational, if it is one.
    pub fn as_rational(&self) -> Option<&BigRational> {
        (!self.sqrt2).then_some(&self.coeff)
    }

    /// Exact square of the value.
    pub fn square(&self) -> BigRational {
        let sq = &self.coeff * &self.coeff;
        if self.sqrt2 {
            sq * BigInt::from(2)
        } else {
            sq
        }
    }

    /// Exact value squared times the radicand factor it carries, i.e. the
    /// pair `(q, r)` with value `q·√r`, `r ∈ {1, 2}`.
    pub fn surd_parts(&self) -> (BigRational, u32) {
        (self.coeff.clone(), if self.sqrt2 { 2 } else { 1 })
    }

    pub fn to_f64(&self) -> f64 {
        let q = ratio_to_f64(&self.coeff);
        if self.sqrt2 {
            q * std::f64::consts::SQRT_2
        } else {
            q
        }
    }
}

impl fmt::Display for Moment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sqrt2 {
            write!(f, "{}*sqrt(2)", self.coeff)
        } else {
            write!(f, "{}", self.coeff)
        }
    }
}

/// Converts a big rational to the nearest-ish `f64`, also for operands whose
/// numerator and denominator individually overflow `f64`.
pub fn ratio_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let shift = q.numer().bits().max(q.denom().bits()) as i64 - 1000;
    let shift = shift.max(0) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Evaluates oscillator moments exactly, refusing powers above `p_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentTable {
    p_max: u32,
}

impl Default for MomentTable {
    fn default() -> Self {
        Self { p_max: DEFAULT_P_MAX }
    }
}

impl MomentTable {
    pub fn with_p_max(p_max: u32) -> Self {
        Self { p_max }
    }

    pub fn p_max(&self) -> u32 {
        self.p_max
    }

    /// `⟨φ_i|x^p|φ_j⟩` for mode indices `i, j ∈ {0, 1}`.
    pub fn moment(&self, i: usize, j: usize, p: u32) -> Result<Moment> {
        if i > 1 {
            return Err(Error::InvalidMode(i));
        }
        if j > 1 {
            return Err(Error::InvalidMode(j));
        }
        if p > self.p_max {
            return Err(Error::Capacity { power: p, max: self.p_max });
        }
        let even = p.is_multiple_of(2);
        Ok(match (i, j, even) {
            (0, 0, true) => Moment::rational(gaussian_moment(p / 2)),
            (1, 1, true) => Moment::rational(gaussian_moment(p / 2 + 1) * BigInt::from(2)),
            (0, 1, false) | (1, 0, false) => Moment::new(gaussian_moment(p.div_ceil(2)), true),
            _ => Moment::zero(),
        })
    }

    /// The full 2×2 matrix `m_ij = ⟨φ_i|x^p|φ_j⟩`.
    pub fn matrix(&self, p: u32) -> Result<MomentMatrix> {
        let m00 = self.moment(0, 0, p)?;
        let m01 = self.moment(0, 1, p)?;
        let m11 = self.moment(1, 1, p)?;
        Ok(MomentMatrix { power: Some(p), entries: [[m00, m01.clone()], [m01, m11]] })
    }
}

/// `⟨φ_i|x^p|φ_j⟩` under the default capacity bound.
pub fn oscillator_moment(i: usize, j: usize, p: u32) -> Result<Moment> {
    MomentTable::default().moment(i, j, p)
}

/// `μ_{2m} = (2m)! / (4^m m!) = Π_{t=1}^{m} (2t - 1)/2`.
fn gaussian_moment(m: u32) -> BigRational {
    (1..=m).fold(BigRational::one(), |acc, t| {
        acc * BigRational::new(BigInt::from(2 * t - 1), BigInt::from(2))
    })
}

/// Real symmetric 2×2 matrix of single-particle matrix elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentMatrix {
    power: Option<u32>,
    entries: [[Moment; 2]; 2],
}

impl MomentMatrix {
    /// Builds a matrix from explicit entries; they must satisfy `m₀₁ = m₁₀`.
    pub fn new(entries: [[Moment; 2]; 2]) -> Result<Self> {
        if entries[0][1] != entries[1][0] {
            return Err(Error::NotHermitian);
        }
        Ok(Self { power: None, entries })
    }

    pub fn symmetric(m00: Moment, m11: Moment, m01: Moment) -> Self {
        Self { power: None, entries: [[m00, m01.clone()], [m01, m11]] }
    }

    /// `⟨φ_i|x^p|φ_j⟩` for the default capacity bound.
    pub fn oscillator(p: u32) -> Result<Self> {
        MomentTable::default().matrix(p)
    }

    /// The unit matrix; its collective observable is the number operator.
    pub fn identity() -> Self {
        Self::symmetric(Moment::from_ratio(1, 1), Moment::from_ratio(1, 1), Moment::zero())
    }

    pub fn zero() -> Self {
        Self::symmetric(Moment::zero(), Moment::zero(), Moment::zero())
    }

    /// The oscillator power this matrix was built from, if any.
    pub fn power(&self) -> Option<u32> {
        self.power
    }

    pub fn get(&self, i: usize, j: usize) -> &Moment {
        &self.entries[i][j]
    }

    pub fn m00(&self) -> &Moment {
        &self.entries[0][0]
    }

    pub fn m11(&self) -> &Moment {
        &self.entries[1][1]
    }

    pub fn m01(&self) -> &Moment {
        &self.entries[0][1]
    }

    /// Adds `c` to both diagonal entries.
    pub fn shifted(&self, c: &BigRational) -> Self {
        let shift = |m: &Moment| {
            let q = m.as_rational().expect("diagonal moments are rational");
            Moment::rational(q + c)
        };
        Self::symmetric(shift(self.m00()), shift(self.m11()), self.m01().clone())
    }

    /// Diagonal entries as rationals. Diagonal moments never carry `√2`.
    pub(crate) fn diagonal_rationals(&self) -> Option<(BigRational, BigRational)> {
        Some((self.m00().as_rational()?.clone(), self.m11().as_rational()?.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    // Globally adaptive Gauss-Kronrod (7/15) quadrature of the defining
    // integral; independent of the closed forms above.
    #[allow(clippy::excessive_precision)]
    fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        const XK: [f64; 8] = [
            0.991455371120812639206854697526329,
            0.949107912342758524526189684047851,
            0.864864423359769072789712788640926,
            0.741531185599394439863864773280788,
            0.586087235467691130294144845693013,
            0.405845151377397166906606412076961,
            0.207784955007898467600689403773245,
            0.0,
        ];
        const WK: [f64; 8] = [
            0.022935322010529224963732008058970,
            0.063092092629978553290700663189204,
            0.104790010322250183839876322541518,
            0.140653259715525918745189590510238,
            0.169004726639267902826583426598550,
            0.190350578064785409913256402421014,
            0.204432940075298892414161999234649,
            0.209482141084727828012999174891714,
        ];
        const WG: [f64; 4] = [
            0.129484966168869693270611432679082,
            0.279705391489276667901467771423780,
            0.381830050505118944950369775488975,
            0.417959183673469387755102040816327,
        ];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut kronrod = WK[7] * fc;
        let mut gauss = WG[3] * fc;
        for i in 0..7 {
            let pair = f(c - h * XK[i]) + f(c + h * XK[i]);
            kronrod += WK[i] * pair;
            if i % 2 == 1 {
                gauss += WG[i / 2] * pair;
            }
        }
        (kronrod * h, ((kronrod - gauss) * h).abs())
    }

    fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
        let mut panels = vec![(a, b, gauss_kronrod(f, a, b))];
        for _ in 0..10_000 {
            let total: f64 = panels.iter().map(|p| p.2 .0).sum();
            let scale: f64 = panels.iter().map(|p| p.2 .0.abs()).sum();
            let err: f64 = panels.iter().map(|p| p.2 .1).sum();
            if err <= rel_tol * scale {
                return total;
            }
            let worst = (0..panels.len())
                .max_by(|&i, &j| panels[i].2 .1.total_cmp(&panels[j].2 .1))
                .unwrap();
            let (lo, hi, _) = panels.swap_remove(worst);
            let mid = 0.5 * (lo + hi);
            panels.push((lo, mid, gauss_kronrod(f, lo, mid)));
            panels.push((mid, hi, gauss_kronrod(f, mid, hi)));
        }
        panic!("quadrature did not converge");
    }

    fn quadrature_moment(i: usize, j: usize, p: u32) -> f64 {
        let pi_q = std::f64::consts::PI.powf(0.25);
        let phi = |k: usize, x: f64| -> f64 {
            let g = (-x * x / 2.0).exp() / pi_q;
            if k == 0 { g } else { std::f64::consts::SQRT_2 * x * g }
        };
        let f = move |x: f64| phi(i, x) * x.powi(p as i32) * phi(j, x);
        integrate(&f, -14.0, 14.0, 1e-13)
    }

    #[test]
    fn worked_values() {
        assert_eq!(oscillator_moment(0, 0, 2).unwrap(), Moment::rational(q(1, 2)));
        assert!(oscillator_moment(0, 1, 2).unwrap().is_zero());
        assert_eq!(oscillator_moment(1, 1, 2).unwrap(), Moment::rational(q(3, 2)));
        assert_eq!(oscillator_moment(1, 1, 4).unwrap(), Moment::rational(q(15, 4)));
        assert_eq!(oscillator_moment(0, 1, 1).unwrap(), Moment::new(q(1, 2), true));
        assert!((oscillator_moment(0, 1, 1).unwrap().to_f64() - 0.5f64.sqrt()).abs() < 1e-16);
        assert_eq!(oscillator_moment(0, 0, 0).unwrap(), Moment::rational(q(1, 1)));
        assert_eq!(oscillator_moment(1, 1, 0).unwrap(), Moment::rational(q(1, 1)));
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for p in 0..=12 {
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let exact = oscillator_moment(i, j, p).unwrap().to_f64();
                let numeric = quadrature_moment(i, j, p);
                if exact == 0.0 {
                    assert!(numeric.abs() < 1e-10, "({i},{j},{p}): {numeric}");
                } else {
                    let rel = ((numeric - exact) / exact).abs();
                    assert!(rel <= 1e-10, "({i},{j},{p}): {numeric} vs {exact}, rel {rel}");
                }
            }
        }
    }

    #[test]
    fn parity_sieve() {
        for nu in 0..=30 {
            assert!(oscillator_moment(0, 1, 2 * nu).unwrap().is_zero());
            assert!(oscillator_moment(1, 0, 2 * nu).unwrap().is_zero());
            assert!(oscillator_moment(0, 0, 2 * nu + 1).unwrap().is_zero());
            assert!(oscillator_moment(1, 1, 2 * nu + 1).unwrap().is_zero());
        }
    }

    #[test]
    fn excited_mode_relation() {
        for nu in 0..=10 {
            let lhs = oscillator_moment(1, 1, 2 * nu).unwrap();
            let rhs = oscillator_moment(0, 0, 2 * nu + 2).unwrap().coeff() * BigInt::from(2);
            assert_eq!(lhs, Moment::rational(rhs));
        }
    }

    #[test]
    fn capacity_guard() {
        assert!(oscillator_moment(0, 0, 64).is_ok());
        assert_eq!(
            oscillator_moment(0, 0, 65),
            Err(Error::Capacity { power: 65, max: 64 })
        );
        let small = MomentTable::with_p_max(4);
        assert!(small.moment(1, 1, 4).is_ok());
        assert!(small.moment(1, 1, 6).unwrap_err().is_capacity());
    }

    #[test]
    fn bad_mode_index() {
        assert_eq!(oscillator_moment(2, 0, 1), Err(Error::InvalidMode(2)));
        assert_eq!(oscillator_moment(0, 5, 1), Err(Error::InvalidMode(5)));
    }

    #[test]
    fn cross_moment_square_is_rational() {
        // |m₀₁^(1)|² = 1/2
        assert_eq!(oscillator_moment(0, 1, 1).unwrap().square(), q(1, 2));
        // m₀₁^(3) = √2·3/4, squared 9/8
        assert_eq!(oscillator_moment(0, 1, 3).unwrap().square(), q(9, 8));
    }

    #[test]
    fn matrix_symmetry_is_checked() {
        let a = Moment::from_ratio(1, 3);
        let b = Moment::from_ratio(1, 4);
        let bad = MomentMatrix::new([[a.clone(), a.clone()], [b, a.clone()]]);
        assert_eq!(bad, Err(Error::NotHermitian));
        let m = MomentMatrix::oscillator(3).unwrap();
        assert_eq!(m.power(), Some(3));
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn large_ratio_to_f64() {
        let m = oscillator_moment(0, 0, 64).unwrap();
        // μ_64 = 63!! / 2^32
        let double_fact: f64 = (1..=63).step_by(2).map(|k| k as f64).product();
        let expect = double_fact / 2f64.powi(32);
        assert!(((m.to_f64() - expect) / expect).abs() < 1e-13);
        let huge = BigRational::new(BigInt::from(3) << 2000usize, BigInt::from(2) << 2000usize);
        assert!((ratio_to_f64(&huge) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn display() {
        assert_eq!(oscillator_moment(0, 0, 4).unwrap().to_string(), "3/4");
        assert_eq!(oscillator_moment(0, 1, 1).unwrap().to_string(), "1/2*sqrt(2)");
        assert_eq!(oscillator_moment(0, 1, 2).unwrap().to_string(), "0");
    }
}
