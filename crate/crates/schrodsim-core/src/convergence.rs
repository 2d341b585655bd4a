//! Observed-order estimation from (step size, error) tables.

use crate::error::{CoreError, Result};

/// Least-squares slope of log(error) against log(step): the empirical
/// convergence order. Steps must be strictly monotone and at least three
/// points are needed.
pub fn observed_order(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(CoreError::Parameter(format!(
            "order estimation needs at least 3 points, got {}",
            samples.len()
        )));
    }
    let increasing = samples.windows(2).all(|w| w[1].0 > w[0].0);
    let decreasing = samples.windows(2).all(|w| w[1].0 < w[0].0);
    if !increasing && !decreasing {
        return Err(CoreError::Parameter("step sizes must be strictly monotone".into()));
    }
    if samples.iter().any(|&(h, e)| !(h > 0.0) || !(e > 0.0) || !h.is_finite() || !e.is_finite()) {
        return Err(CoreError::Parameter(
            "steps and errors must be positive and finite for a log-log fit".into(),
        ));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, e) in samples {
        let x = h.ln();
        let y = e.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(CoreError::Numerical("degenerate step-size spread".into()));
    }
    Ok((n * sxy - sx * sy) / denom)
}
