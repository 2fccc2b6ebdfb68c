use crate::{Error, Result};

/// The Fock ladder of `N` bosons shared between two modes.
///
/// Ladder state `ℓ ∈ [-N/2, N/2]` holds `N/2 + ℓ` particles in mode 0 and
/// `N/2 - ℓ` in mode 1, so `2ℓ` is the particle imbalance. States are stored
/// at index `ℓ + N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoModeSpace {
    particles: u64,
}

impl TwoModeSpace {
    pub fn new(particles: u64) -> Result<Self> {
        if !particles.is_multiple_of(2) {
            return Err(Error::OddParticleNumber(particles));
        }
        Ok(Self { particles })
    }

    pub fn particles(&self) -> u64 {
        self.particles
    }

    pub fn half(&self) -> i64 {
        (self.particles / 2) as i64
    }

    pub fn dimension(&self) -> usize {
        self.particles as usize + 1
    }

    pub fn index(&self, ell: i64) -> Option<usize> {
        let half = self.half();
        (-half..=half).contains(&ell).then(|| (ell + half) as usize)
    }

    pub fn ell(&self, index: usize) -> i64 {
        index as i64 - self.half()
    }

    /// Occupations `(n₀, n₁)` of ladder state `ℓ`.
    pub fn occupations(&self, ell: i64) -> Option<(u64, u64)> {
        self.index(ell)?;
        let half = self.half();
        Some(((half + ell) as u64, (half - ell) as u64))
    }

    pub fn ells(&self) -> impl Iterator<Item = i64> {
        let half = self.half();
        -half..=half
    }
}
