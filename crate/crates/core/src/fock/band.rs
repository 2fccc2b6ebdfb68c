//! Square band matrices with independent lower and upper bandwidths.

use std::ops::{Add, Mul, Sub};

use num_traits::Zero;

use crate::{Error, Result};

/// Square matrix whose nonzero entries satisfy `-lower ≤ col - row ≤ upper`.
///
/// Diagonal at offset `o = col - row` is stored in `diags[o + lower]`, indexed
/// by `min(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix<T> {
    dim: usize,
    lower: usize,
    upper: usize,
    diags: Vec<Vec<T>>,
}

impl<T> BandMatrix<T>
where
    T: Clone + Zero,
{
    pub fn zeros(dim: usize, lower: usize, upper: usize) -> Self {
        let diags = (0..=lower + upper)
            .map(|d| {
                let off = d.abs_diff(lower);
                vec![T::zero(); dim.saturating_sub(off)]
            })
            .collect();
        Self { dim, lower, upper, diags }
    }

    /// Tridiagonal matrix from its sub-, main and super-diagonals.
    pub fn tridiagonal(sub: Vec<T>, main: Vec<T>, sup: Vec<T>) -> Self {
        let dim = main.len();
        assert_eq!(sub.len(), dim.saturating_sub(1));
        assert_eq!(sup.len(), dim.saturating_sub(1));
        Self { dim, lower: 1, upper: 1, diags: vec![sub, main, sup] }
    }

    pub fn identity_scaled(dim: usize, value: T) -> Self {
        Self { dim, lower: 0, upper: 0, diags: vec![vec![value; dim]] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    fn slot(&self, row: usize, col: usize) -> Option<(usize, usize)> {
        if row >= self.dim || col >= self.dim {
            return None;
        }
        let off = col as isize - row as isize;
        if off < -(self.lower as isize) || off > self.upper as isize {
            return None;
        }
        Some(((off + self.lower as isize) as usize, row.min(col)))
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        match self.slot(row, col) {
            Some((d, i)) => self.diags[d][i].clone(),
            None => T::zero(),
        }
    }

    /// Sets an entry inside the band.
    ///
    /// Panics if `(row, col)` lies outside the band.
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        let (d, i) = self.slot(row, col).expect("entry outside band");
        self.diags[d][i] = value;
    }

    /// Entries at offset `col - row`, ordered by `min(row, col)`.
    pub fn diagonal(&self, offset: isize) -> Option<&[T]> {
        let d = offset + self.lower as isize;
        if d < 0 || offset > self.upper as isize {
            return None;
        }
        self.diags.get(d as usize).map(Vec::as_slice)
    }

    pub fn transpose(&self) -> Self {
        let mut diags = self.diags.clone();
        diags.reverse();
        Self { dim: self.dim, lower: self.upper, upper: self.lower, diags }
    }

    pub fn map<U, F>(&self, mut f: F) -> BandMatrix<U>
    where
        F: FnMut(&T) -> U,
    {
        BandMatrix {
            dim: self.dim,
            lower: self.lower,
            upper: self.upper,
            diags: self.diags.iter().map(|d| d.iter().map(&mut f).collect()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.diags.iter().flatten().all(Zero::is_zero)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c)).collect())
            .collect()
    }

    /// Entries `(row, col, value)` inside the band, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim).flat_map(move |r| {
            let lo = r.saturating_sub(self.lower);
            let hi = (r + self.upper).min(self.dim.saturating_sub(1));
            (lo..=hi).map(move |c| (r, c, self.get(r, c)))
        })
    }
}

impl<T> BandMatrix<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    /// Band–band product; bandwidths add.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rhs.dim });
        }
        let lower = (self.lower + rhs.lower).min(self.dim.saturating_sub(1));
        let upper = (self.upper + rhs.upper).min(self.dim.saturating_sub(1));
        let mut out = Self::zeros(self.dim, lower, upper);
        for (r, k, a) in self.entries() {
            if a.is_zero() {
                continue;
            }
            let lo = k.saturating_sub(rhs.lower);
            let hi = (k + rhs.upper).min(self.dim - 1);
            for c in lo..=hi {
                let b = rhs.get(k, c);
                if b.is_zero() {
                    continue;
                }
                let acc = out.get(r, c) + a.clone() * b;
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    /// Matrix–vector product over any vector type that scales by `T`.
    pub fn apply<V>(&self, x: &[V]) -> Result<Vec<V>>
    where
        V: Clone + Zero + Mul<T, Output = V>,
    {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok((0..self.dim)
            .map(|r| {
                let lo = r.saturating_sub(self.lower);
                let hi = (r + self.upper).min(self.dim.saturating_sub(1));
                (lo..=hi).fold(V::zero(), |acc, c| acc + x[c].clone() * self.get(r, c))
            })
            .collect())
    }
}

impl<T> BandMatrix<T>
where
    T: Clone + Zero + Sub<Output = T>,
{
    /// Entrywise difference, widening to the larger band.
    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rhs.dim });
        }
        let mut out = Self::zeros(self.dim, self.lower.max(rhs.lower), self.upper.max(rhs.upper));
        let coords: Vec<(usize, usize)> = out.entries().map(|(r, c, _)| (r, c)).collect();
        for (r, c) in coords {
            out.set(r, c, self.get(r, c) - rhs.get(r, c));
        }
        Ok(out)
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self>
    where
        T: Add<Output = T> + Mul<Output = T>,
    {
        self.matmul(rhs)?.sub(&rhs.matmul(self)?)
    }
}
