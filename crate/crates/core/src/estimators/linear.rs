//! Least-squares fits: single-feature R² and L1-regularized regression.

use crate::error::{Error, Result};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// R² of the OLS fit of `y` on `(1, x)`, clamped to `[0, 1]`.
///
/// For a single regressor this equals the squared Pearson correlation. A
/// constant `x` or `y` gives 0.
pub fn linear_regression_r2(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Contract(format!(
            "linear_regression_r2: length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Contract("linear_regression_r2 needs at least 2 points".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Ok(0.0);
    }
    Ok((sxy * sxy / (sxx * syy)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoConfig {
    /// L1 penalty on the standardized scale.
    pub alpha: f64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            max_iter: 1000,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    /// Weights on the standardized feature scale.
    pub coefficients: Vec<f64>,
    /// In-sample R² of the fit.
    pub r2: f64,
}

/// Lasso by cyclic coordinate descent on standardized features and a centered
/// target. Minimizes `1/(2n) ||y - Xw||² + alpha ||w||_1`; constant features
/// get weight 0.
pub fn lasso(features: &[Vec<f64>], y: &[f64], config: &LassoConfig) -> LassoFit {
    let n = y.len();
    let d = features.len();
    let nf = n as f64;
    let my = mean(y);
    let yc: Vec<f64> = y.iter().map(|v| v - my).collect();
    let cols: Vec<Option<Vec<f64>>> = features
        .iter()
        .map(|col| {
            let m = mean(col);
            let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / nf).sqrt();
            (sd > 1e-12).then(|| col.iter().map(|v| (v - m) / sd).collect())
        })
        .collect();

    let mut w = vec![0.0; d];
    let sst: f64 = yc.iter().map(|v| v * v).sum();
    let mut residual = yc;
    for _ in 0..config.max_iter {
        let mut max_step: f64 = 0.0;
        for (k, col) in cols.iter().enumerate() {
            let Some(col) = col else { continue };
            // standardized columns have unit mean square
            let rho = col.iter().zip(&residual).map(|(a, r)| a * r).sum::<f64>() / nf + w[k];
            let updated = soft_threshold(rho, config.alpha);
            let delta = updated - w[k];
            if delta != 0.0 {
                for (r, a) in residual.iter_mut().zip(col) {
                    *r -= delta * a;
                }
                w[k] = updated;
                max_step = max_step.max(delta.abs());
            }
        }
        if max_step < config.tolerance {
            break;
        }
    }
    let sse: f64 = residual.iter().map(|v| v * v).sum();
    let r2 = if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 0.0 };
    LassoFit {
        coefficients: w,
        r2,
    }
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}
