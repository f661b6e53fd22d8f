//! Symmetrization and Gaussian comparison for the plurality deviation.
//!
//! With the maximum taken over a fixed family of candidate sets `Λ`:
//!
//! * `D = E_C max |sum_j (pl_j - E pl_j)|`
//! * `R = E_C E_ξ max |sum_j ξ_j pl_j|` for Rademacher signs `ξ`
//! * `G = E_C E_g max |sum_j g_j pl_j|` for standard Gaussians `g`
//!
//! The expected inequalities are `D <= 2R` and `R <= sqrt(pi/2) G`. All three
//! are evaluated on the same code draw per trial, and each comparison is judged
//! on the paired per-trial differences.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::process::{dot, gaussian_vector};
use crate::error::{invalid, Result};
use crate::linear_code::CodeFamily;
use crate::plurality::{candidate_sets, plurality_profile};
use crate::rng::{self, streams};
use crate::stats::{mean_se, MeanSe};

/// `lhs <= factor * rhs`, judged by the paired difference `lhs - factor * rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub factor: f64,
    pub difference: MeanSe,
    /// `difference.mean <= tolerance * difference.std_error`.
    pub holds: bool,
}

impl Comparison {
    fn new(lhs: &[f64], rhs: &[f64], factor: f64, tolerance: f64) -> Self {
        let diffs: Vec<f64> = lhs.iter().zip(rhs).map(|(a, b)| a - factor * b).collect();
        let difference = mean_se(&diffs);
        Comparison {
            factor,
            holds: difference.mean <= tolerance * difference.std_error,
            difference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationReport {
    pub family: String,
    pub list_size: usize,
    pub candidates: usize,
    pub trials: usize,
    /// The maxima run over sampled candidate sets only.
    pub sampled_family: bool,
    pub d: MeanSe,
    pub r: MeanSe,
    pub g: MeanSe,
    /// `D <= 2 R`.
    pub d_vs_r: Comparison,
    /// `R <= sqrt(pi/2) G`.
    pub r_vs_g: Comparison,
}

impl SymmetrizationReport {
    pub fn holds(&self) -> bool {
        self.d_vs_r.holds && self.r_vs_g.holds
    }
}

fn max_abs(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |m, x| m.max(x.abs()))
}

/// Estimates `D`, `R` and `G` from `trials` code draws, with comparisons
/// judged at three standard errors.
pub fn symmetrization_check(
    family: &CodeFamily,
    list_size: usize,
    candidates: usize,
    trials: usize,
    seed: u64,
) -> Result<SymmetrizationReport> {
    if !family.has_independent_symbols() {
        return Err(invalid("symmetrization needs a family with independent symbols"));
    }
    if trials < 2 {
        return Err(invalid("need at least two trials"));
    }
    let sets = candidate_sets(family.parent(), list_size, candidates, seed)?;
    // E sum_j pl_j = n * (parent plurality count) / (n_parent * L); deviations
    // are formed in integer units scaled by n_parent * L so ties are exact.
    let n = family.n();
    let n_parent = family.parent().n() as i128;
    let scaled_means: Vec<i128> = sets
        .iter()
        .map(|(_, s)| Ok(n as i128 * plurality_profile(family.parent(), s)?.total_count() as i128))
        .collect::<Result<_>>()?;
    let scale = (n_parent * list_size as i128) as f64;
    let rows: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let code = family.draw_indexed(seed, t as u64)?;
            let profiles = sets
                .iter()
                .map(|(_, s)| plurality_profile(&code, s))
                .collect::<Result<Vec<_>>>()?;
            let d = max_abs(profiles.iter().zip(&scaled_means).map(|(p, m)| {
                (p.total_count() as i128 * n_parent - m) as f64 / scale
            }));
            let weights: Vec<Vec<(usize, f64)>> = profiles
                .iter()
                .map(|p| p.pl_vector().into_iter().enumerate().collect())
                .collect();
            let mut r = rng::stream_rng(seed, streams::RADEMACHER, t as u64);
            let xi: Vec<f64> = (0..n).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            let g = gaussian_vector(seed, t, n);
            let rad = max_abs(weights.iter().map(|w| dot(w, &xi)));
            let gau = max_abs(weights.iter().map(|w| dot(w, &g)));
            Ok((d, rad, gau))
        })
        .collect::<Result<_>>()?;
    let d: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let r: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let g: Vec<f64> = rows.iter().map(|r| r.2).collect();
    Ok(SymmetrizationReport {
        family: family.describe(),
        list_size,
        candidates: sets.len(),
        trials,
        sampled_family: true,
        d: mean_se(&d),
        r: mean_se(&r),
        g: mean_se(&g),
        d_vs_r: Comparison::new(&d, &r, 2.0, 3.0),
        r_vs_g: Comparison::new(&r, &g, (std::f64::consts::PI / 2.0).sqrt(), 3.0),
    })
}
