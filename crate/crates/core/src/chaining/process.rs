//! Sampling the Gaussian process `X(I, Λ)` and the supremum experiment.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{gaussian_max_bound, ConstantsConfig};
use crate::error::{invalid, Result};
use crate::linear_code::LinearCode;
use crate::plurality::{plurality_profile, MessageSet, QValue};
use crate::rng::{self, streams};
use crate::stats::{mean_se, sample_variance, variance_std_error, MeanSe};

/// An index `(I, Λ)` of the process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessIndex {
    pub coordinates: Vec<usize>,
    pub set: MessageSet,
}

impl ProcessIndex {
    /// `([n], Λ)`.
    pub fn full(code: &LinearCode, set: MessageSet) -> Self {
        ProcessIndex {
            coordinates: (0..code.n()).collect(),
            set,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub coordinates: usize,
    pub list_size: usize,
    /// `sum_{j in I} pl_j(Λ)^2`.
    pub analytic_variance: f64,
    pub mean: f64,
    pub variance: f64,
    pub variance_std_error: f64,
    /// `(variance - analytic) / variance_std_error`; zero when both sides vanish.
    pub z_score: f64,
}

impl PairStats {
    /// Empirical and analytic variance agree within `k` standard errors.
    pub fn variance_within(&self, k: f64) -> bool {
        (self.variance - self.analytic_variance).abs() <= k * self.variance_std_error
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessSample {
    pub trials: usize,
    pub pairs: Vec<PairStats>,
    /// `E max_{(I,Λ)} |X(I, Λ)|` over the given indices.
    pub max_abs: MeanSe,
}

/// Sparse weight vector `(j, pl_j(Λ))` for `j in I`.
fn weights(code: &LinearCode, index: &ProcessIndex) -> Result<Vec<(usize, f64)>> {
    let n = code.n();
    if let Some(&j) = index.coordinates.iter().find(|&&j| j >= n) {
        return Err(invalid(format!("coordinate {j} out of range for n = {n}")));
    }
    let profile = plurality_profile(code, &index.set)?;
    Ok(index.coordinates.iter().map(|&j| (j, profile.pl_f64(j))).collect())
}

/// The standard Gaussian vector of trial `trial`, drawn from its own stream so
/// a parallel run matches a serial one.
pub(crate) fn gaussian_vector(seed: u64, trial: usize, n: usize) -> Vec<f64> {
    let mut r = rng::stream_rng(seed, streams::GAUSSIAN, trial as u64);
    (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
}

pub(crate) fn dot(w: &[(usize, f64)], g: &[f64]) -> f64 {
    w.iter().map(|&(j, p)| g[j] * p).sum()
}

/// Draws `trials` Gaussian vectors and evaluates `X` at every index.
pub fn gaussian_process_sample(
    code: &LinearCode,
    pairs: &[ProcessIndex],
    trials: usize,
    seed: u64,
) -> Result<ProcessSample> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    if pairs.is_empty() {
        return Err(invalid("need at least one process index"));
    }
    let w: Vec<Vec<(usize, f64)>> = pairs.iter().map(|p| weights(code, p)).collect::<Result<_>>()?;
    let n = code.n();
    let values: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = gaussian_vector(seed, t, n);
            w.iter().map(|wp| dot(wp, &g)).collect()
        })
        .collect();
    let stats = pairs
        .iter()
        .zip(&w)
        .enumerate()
        .map(|(p, (index, wp))| {
            let xs: Vec<f64> = values.iter().map(|row| row[p]).collect();
            let analytic: f64 = wp.iter().map(|(_, pl)| pl * pl).sum();
            let variance = sample_variance(&xs);
            let se = variance_std_error(&xs);
            let diff = variance - analytic;
            PairStats {
                coordinates: index.coordinates.len(),
                list_size: index.set.len(),
                analytic_variance: analytic,
                mean: mean_se(&xs).mean,
                variance,
                variance_std_error: se,
                z_score: if diff == 0.0 { 0.0 } else { diff / se },
            }
        })
        .collect();
    let maxima: Vec<f64> = values
        .iter()
        .map(|row| row.iter().fold(0.0, |m: f64, x| m.max(x.abs())))
        .collect();
    Ok(ProcessSample {
        trials,
        pairs: stats,
        max_abs: mean_se(&maxima),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupremumReport {
    pub list_size: usize,
    pub candidates: usize,
    pub trials: usize,
    pub q_hat: f64,
    /// Set when `q_hat` is only a lower bound on `Q`.
    pub q_lower_bound: bool,
    pub code_size: f64,
    /// `E max |X|` over the candidate family, a lower bound on the supremum
    /// over all `Λ` of size `L`.
    pub empirical: MeanSe,
    /// `sqrt(Q log N log^5 L)`.
    pub scale: f64,
    /// `C3 * scale` with the configured `C3`.
    pub bound: f64,
    /// `empirical / bound`.
    pub ratio: f64,
    /// Smallest `C3` consistent with the empirical mean.
    pub c3_min: f64,
    /// Largest standard deviation `sqrt(sum_j pl_j^2)` over the family.
    pub sigma_max: f64,
    /// `sigma sqrt(2 ln m) + sigma / sqrt(pi ln m)` for `m` candidates;
    /// absent for a single candidate.
    pub max_of_gaussians_bound: Option<f64>,
}

/// Compares the empirical supremum of `X([n], Λ)` over `candidates` with
/// `C3 sqrt(Q log N log^5 L)`.
pub fn supremum_experiment(
    code: &LinearCode,
    candidates: &[MessageSet],
    q_hat: &QValue,
    trials: usize,
    seed: u64,
    cfg: &ConstantsConfig,
) -> Result<SupremumReport> {
    let list_size = q_hat.list_size;
    if list_size < 2 {
        return Err(invalid("the supremum bound needs L >= 2"));
    }
    if let Some(c) = candidates.iter().find(|c| c.len() != list_size) {
        return Err(invalid(format!(
            "candidate of size {} does not match L = {list_size}",
            c.len()
        )));
    }
    let pairs: Vec<ProcessIndex> = candidates
        .iter()
        .map(|c| ProcessIndex::full(code, c.clone()))
        .collect();
    let sample = gaussian_process_sample(code, &pairs, trials, seed)?;
    let code_size = code.size() as f64;
    let log_l = (list_size as f64).log2();
    let q = q_hat.value_f64();
    let scale = (q * code_size.log2() * log_l.powi(5)).sqrt();
    let sigma_max = sample
        .pairs
        .iter()
        .map(|p| p.analytic_variance.sqrt())
        .fold(0.0, f64::max);
    let m = candidates.len();
    let max_of_gaussians_bound = if m >= 2 && sigma_max > 0.0 {
        Some(gaussian_max_bound(sigma_max, m)?)
    } else {
        None
    };
    let bound = cfg.gaussian_sup * scale;
    Ok(SupremumReport {
        list_size,
        candidates: m,
        trials,
        q_hat: q,
        q_lower_bound: q_hat.lower_bound,
        code_size,
        empirical: sample.max_abs,
        scale,
        bound,
        ratio: sample.max_abs.mean / bound,
        c3_min: sample.max_abs.mean / scale,
        sigma_max,
        max_of_gaussians_bound,
    })
}
