//! Small statistical helpers: delete-one jackknife over sample means and
//! linear least squares.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// A point estimate with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Delete-one jackknife for a smooth function of the feature means.
///
/// `f` receives the mean of each of the `K` features; the estimate is `f`
/// at the full-sample means and the error comes from the `n` leave-one-out
/// evaluations.
pub fn jackknife<const K: usize, F>(samples: &[[f64; K]], f: F) -> Estimate
where
    F: Fn(&[f64; K]) -> f64,
{
    let n = samples.len();
    let mut total = [0.0; K];
    for s in samples {
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    let full = total.map(|t| t / n as f64);
    let value = f(&full);
    if n < 2 {
        return Estimate { value, stderr: f64::NAN };
    }
    let loo = |s: &[f64; K]| {
        let mut m = [0.0; K];
        for i in 0..K {
            m[i] = (total[i] - s[i]) / (n - 1) as f64;
        }
        f(&m)
    };
    let mean_loo = samples.iter().map(loo).sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|s| (loo(s) - mean_loo).powi(2)).sum();
    let stderr = ((n - 1) as f64 / n as f64 * ss).sqrt();
    Estimate { value, stderr }
}

/// Ordinary least squares `design · β ≈ y`.
///
/// Columns are rescaled to unit max-norm before an SVD solve; a column set
/// whose smallest singular value falls below `1e-10` of the largest is
/// reported as rank-deficient.
pub fn least_squares(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = design.shape();
    if rows < cols {
        return Err(Error::DegenerateGrid(format!("{rows} points for {cols} coefficients")));
    }
    let scales: Vec<f64> = (0..cols)
        .map(|j| design.column(j).amax())
        .map(|s| if s > 0.0 { s } else { 1.0 })
        .collect();
    let scaled = DMatrix::from_fn(rows, cols, |i, j| design[(i, j)] / scales[j]);
    let svd = scaled.svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min.is_nan() || min <= 1e-10 * max {
        return Err(Error::DegenerateGrid("design matrix is rank-deficient".into()));
    }
    let beta = svd
        .solve(y, 0.0)
        .map_err(|e| Error::DegenerateGrid(e.to_string()))?;
    Ok(DVector::from_fn(cols, |j, _| beta[j] / scales[j]))
}

/// Slope of the least-squares line through `(x, y)`.
pub fn slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    let design = DMatrix::from_fn(xs.len(), 2, |i, j| if j == 0 { xs[i] } else { 1.0 });
    Ok(least_squares(&design, &DVector::from_column_slice(ys))?[0])
}
