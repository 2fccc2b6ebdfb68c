//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use typicality::fock::{Moment, MomentMatrix};

/// `X = Σ m_ij a_i† a_j` built on the truncated two-mode product space
/// (occupations 0..=N per mode) and restricted to the `N`-particle sector,
/// rows ordered by `ℓ = -N/2..=N/2`.
pub fn dense_observable(n: u64, m: &MomentMatrix) -> DMatrix<f64> {
    let d = n as usize + 1;
    let mut a = DMatrix::<f64>::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = (k as f64).sqrt();
    }
    let id = DMatrix::<f64>::identity(d, d);
    let modes = [a.kronecker(&id), id.kronecker(&a)];
    let mut x = DMatrix::<f64>::zeros(d * d, d * d);
    for i in 0..2 {
        for j in 0..2 {
            x += modes[i].transpose() * &modes[j] * m.get(i, j).to_f64();
        }
    }
    let half = n as usize / 2;
    let sector: Vec<usize> = (0..d).map(|t| {
        // t = ℓ + N/2, occupations (N/2 + ℓ, N/2 - ℓ) = (t, N - t)
        let (n0, n1) = (t, 2 * half - t);
        n0 * d + n1
    }).collect();
    DMatrix::from_fn(d, d, |r, c| x[(sector[r], sector[c])])
}

/// `(tr(ρA), tr(ρA²) - tr(ρA)²)` on the window `|ℓ| ≤ k`, from dense matrices.
pub fn dense_mean_variance(a: &DMatrix<f64>, n: u64, k: u64) -> (f64, f64) {
    let a2 = a * a;
    let centre = n as usize / 2;
    let members = (centre - k as usize)..=(centre + k as usize);
    let dim = (2 * k + 1) as f64;
    let mean = members.clone().map(|i| a[(i, i)]).sum::<f64>() / dim;
    let second = members.map(|i| a2[(i, i)]).sum::<f64>() / dim;
    (mean, second - mean * mean)
}

/// Exact dense oracle for diagonal moment matrices (`m₀₁ = 0`): the
/// observable is built entry by entry and squared by dense multiplication.
pub fn dense_rational_mean_variance(m: &MomentMatrix, n: u64, k: u64) -> (BigRational, BigRational) {
    assert!(m.m01().is_zero());
    let d = n as usize + 1;
    let m00 = m.m00().as_rational().unwrap().clone();
    let m11 = m.m11().as_rational().unwrap().clone();
    let mut a = vec![vec![BigRational::zero(); d]; d];
    for (t, row) in a.iter_mut().enumerate() {
        row[t] = &m00 * BigInt::from(t) + &m11 * BigInt::from(d - 1 - t);
    }
    let mut a2 = vec![vec![BigRational::zero(); d]; d];
    for r in 0..d {
        for c in 0..d {
            a2[r][c] = (0..d).map(|s| &a[r][s] * &a[s][c]).sum();
        }
    }
    let centre = n as usize / 2;
    let members = (centre - k as usize)..=(centre + k as usize);
    let dim = BigInt::from(2 * k + 1);
    let mean: BigRational = members.clone().map(|i| a[i][i].clone()).sum::<BigRational>() / &dim;
    let second: BigRational = members.map(|i| a2[i][i].clone()).sum::<BigRational>() / &dim;
    (mean.clone(), second - &mean * &mean)
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(rng.random_range(-20i64..=20).into(), rng.random_range(1i64..=9).into())
}

/// Seeded random symmetric moment matrix; a quarter have `m₀₁ = 0`.
pub fn random_moment(rng: &mut ChaCha8Rng) -> MomentMatrix {
    let m00 = Moment::rational(random_rational(rng));
    let m11 = Moment::rational(random_rational(rng));
    let m01 = if rng.random_bool(0.25) {
        Moment::zero()
    } else {
        Moment::new(random_rational(rng), rng.random_bool(0.5))
    };
    MomentMatrix::symmetric(m00, m11, m01)
}

pub fn moments_from_seed(seed: u64, count: usize) -> Vec<MomentMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_moment(&mut rng)).collect()
}
