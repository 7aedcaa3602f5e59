//! Ordinary least squares for a single regressor.

use crate::error::{insufficient, Result};

/// Result of `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    /// Coefficient of determination, clamped to `[0, 1]`.
    pub r2: f64,
    pub n: usize,
}

/// Standard errors use the `n - 2` residual variance; with exactly two points
/// they are reported as zero.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return Err(insufficient!("regression needs at least 2 points, got {n}"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(insufficient!("regressor has zero spread"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    let (slope_se, intercept_se) = if n > 2 {
        let s2 = sse / (nf - 2.0);
        (
            libm::sqrt(s2 / sxx),
            libm::sqrt(s2 * (1.0 / nf + mx * mx / sxx)),
        )
    } else {
        (0.0, 0.0)
    };
    let r2 = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
        intercept_se,
        r2,
        n,
    })
}
