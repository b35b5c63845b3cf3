//! Order-stable reductions.
//!
//! Sums over replicas use a fixed pairwise tree so that a result does not
//! depend on how the work was scheduled.

pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Sample mean and standard error of the mean. A single value has zero error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    let mu = mean(values);
    if k < 2 {
        return (mu, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mu) * (v - mu)).collect();
    let var = pairwise_sum(&sq) / (k - 1) as f64;
    (mu, (var / k as f64).sqrt())
}

/// Column-wise mean and standard error over equally long rows.
pub fn column_mean_se(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let width = rows.first().map_or(0, Vec::len);
    let mut means = Vec::with_capacity(width);
    let mut errors = Vec::with_capacity(width);
    let mut column = vec![0.0; rows.len()];
    for c in 0..width {
        for (slot, row) in column.iter_mut().zip(rows) {
            *slot = row[c];
        }
        let (mu, se) = mean_se(&column);
        means.push(mu);
        errors.push(se);
    }
    (means, errors)
}

/// Numerically stable `log(Σ exp(v))`.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = LogSumExp::default();
    values.into_iter().for_each(|v| acc.push(v));
    acc.value()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    #[inline]
    pub fn push(&mut self, v: f64) {
        if v <= self.max {
            self.scaled += (v - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    pub fn value(&self) -> f64 {
        self.max + self.scaled.ln()
    }
}
