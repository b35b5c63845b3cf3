use super::config::ModelConfig;
use super::disorder::{dot, Disorder};
use crate::error::{Error, Result};

/// Enriched Hamiltonian `H_n(t, h, x, y)`.
///
/// ```text
/// sqrt(2t/N) x·Wy + (2t/N)(x·X)(y·Y) − (t/N)|x|²|y|²
///   + sqrt(2h₁) U·x + 2h₁ X·x − h₁|x|²
///   + sqrt(2h₂) V·y + 2h₂ Y·y − h₂|y|²
/// ```
///
/// `|x yᵀ|²` is evaluated as `|x|²|y|²`.
pub fn hamiltonian(
    config: &ModelConfig,
    disorder: &Disorder,
    t: f64,
    h: [f64; 2],
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let (m, n) = (config.m(), config.n);
    for (what, expected, got) in [
        ("x", m, x.len()),
        ("y", n, y.len()),
        ("disorder.x", m, disorder.m()),
        ("disorder.y", n, disorder.n()),
    ] {
        if expected != got {
            return Err(Error::DimensionMismatch {
                what,
                expected,
                got,
            });
        }
    }
    if t < 0.0 || h[0] < 0.0 || h[1] < 0.0 {
        return Err(Error::InvalidConfig("t and h must be nonnegative".into()));
    }
    let big_n = config.big_n();
    let xx = dot(x, x);
    let yy = dot(y, y);
    let coupling = if t > 0.0 {
        (2.0 * t / big_n).sqrt() * dot(x, &disorder.w_times(y))
            + 2.0 * t / big_n * dot(x, &disorder.x) * dot(y, &disorder.y)
            - t / big_n * xx * yy
    } else {
        0.0
    };
    let side_x = (2.0 * h[0]).sqrt() * dot(&disorder.u, x) + 2.0 * h[0] * dot(&disorder.x, x)
        - h[0] * xx;
    let side_y = (2.0 * h[1]).sqrt() * dot(&disorder.v, y) + 2.0 * h[1] * dot(&disorder.y, y)
        - h[1] * yy;
    Ok(coupling + side_x + side_y)
}
