//! Power-law fits `value ≈ A nᵇ` by least squares in log–log coordinates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    /// `log A`.
    pub intercept: f64,
    /// Half-width of the 95% confidence interval on the exponent.
    pub ci_half_width: f64,
    pub points: usize,
}

impl RateFit {
    pub fn ci(&self) -> (f64, f64) {
        (self.exponent - self.ci_half_width, self.exponent + self.ci_half_width)
    }
}

/// Fits `log value = intercept + exponent · log n`. Needs at least three
/// pairs with distinct positive `n` and positive values.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::InvalidFit(format!("need at least 3 points, got {}", pairs.len())));
    }
    if let Some((n, v)) = pairs.iter().find(|(n, v)| !(*n > 0.0 && *v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidFit(format!("nonpositive pair ({n}, {v})")));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidFit("all n are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum();
    let dof = k - 2.0;
    let se = (rss / dof / sxx).sqrt();
    let quantile = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::InvalidFit(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(RateFit {
        exponent,
        intercept,
        ci_half_width: quantile * se,
        points: pairs.len(),
    })
}
