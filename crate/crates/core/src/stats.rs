//! Sample summaries used by the Monte Carlo estimators.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Standard error of the mean; zero for fewer than two samples.
    pub std_error: f64,
    pub count: usize,
}

/// Mean and standard error, summed in input order.
pub fn mean_se(samples: &[f64]) -> MeanSe {
    let count = samples.len();
    if count == 0 {
        return MeanSe {
            mean: f64::NAN,
            std_error: f64::NAN,
            count,
        };
    }
    let mean = samples.iter().sum::<f64>() / count as f64;
    let std_error = if count < 2 {
        0.0
    } else {
        (sample_variance(samples) / count as f64).sqrt()
    };
    MeanSe {
        mean,
        std_error,
        count,
    }
}

/// Unbiased sample variance.
pub fn sample_variance(samples: &[f64]) -> f64 {
    let count = samples.len();
    if count < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / count as f64;
    samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1) as f64
}

/// Standard error of the unbiased sample variance, from the empirical fourth
/// central moment: `sqrt((m4 - s^4 (m - 3)/(m - 1)) / m)`.
pub fn variance_std_error(samples: &[f64]) -> f64 {
    let m = samples.len() as f64;
    if m < 4.0 {
        return f64::NAN;
    }
    let mean = samples.iter().sum::<f64>() / m;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
    let s2 = sample_variance(samples);
    ((m4 - s2 * s2 * (m - 3.0) / (m - 1.0)) / m).max(0.0).sqrt()
}

/// Binomial standard error `sqrt(p (1 - p) / m)`.
pub fn binomial_std_error(p: f64, trials: usize) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / trials as f64).sqrt()
}
