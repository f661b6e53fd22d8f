//! How far pluralities move when a set is replaced by a random half of it.
//!
//! `Λ'` keeps each member of `Λ` independently with probability 1/2. For each
//! coordinate the report gives `E[|Λ'| |pl_j(Λ) - pl_j(Λ')|]` and
//! `E[|Λ'|^2 (pl_j(Λ) - pl_j(Λ'))^2]`, computed as `| |Λ'| pl_j(Λ) - m_j(Λ') |`
//! with `m_j` the plurality count, which is also defined for empty `Λ'`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::ConstantsConfig;
use crate::error::{invalid, Result};
use crate::linear_code::{LinearCode, Word};
use crate::plurality::{plurality_profile, MessageSet};
use crate::rng::{self, streams};
use crate::stats::mean_se;

/// Sets up to this size are enumerated exactly.
const EXACT_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateConcentration {
    pub coordinate: usize,
    pub pl: f64,
    pub mean_abs: f64,
    pub mean_abs_se: f64,
    pub mean_sq: f64,
    pub mean_sq_se: f64,
    /// Smallest `C5` making both inequalities hold at this coordinate.
    pub c5_fit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub list_size: usize,
    /// Every subset was enumerated, so the means are exact.
    pub exact: bool,
    /// Subsets drawn; `2^|Λ|` when exact.
    pub samples: u64,
    pub coordinates: Vec<CoordinateConcentration>,
    pub c5_fit: f64,
    pub c5_configured: f64,
    pub holds_with_configured: bool,
    /// `2 (ln(4L) + 1) / log L`, the constant the tail-integration argument gives.
    pub c5_from_tail_bound: f64,
}

fn plurality_count(words: &[&Word], j: usize, scratch: &mut [u32]) -> u32 {
    scratch.iter_mut().for_each(|c| *c = 0);
    let mut best = 0;
    for w in words {
        let c = &mut scratch[w[j] as usize];
        *c += 1;
        best = best.max(*c);
    }
    best
}

/// Per-coordinate `(|Λ'| |Δ_j|)` for one subset given by `keep`.
fn deviations(words: &[Word], keep: &[bool], pl: &[f64], q: usize) -> Vec<f64> {
    let kept: Vec<&Word> = words.iter().zip(keep).filter(|(_, &k)| k).map(|(w, _)| w).collect();
    let size = kept.len() as f64;
    let mut scratch = vec![0u32; q];
    pl.iter()
        .enumerate()
        .map(|(j, &p)| (size * p - plurality_count(&kept, j, &mut scratch) as f64).abs())
        .collect()
}

pub fn concentration_check(
    code: &LinearCode,
    set: &MessageSet,
    trials: usize,
    seed: u64,
    cfg: &ConstantsConfig,
) -> Result<ConcentrationReport> {
    let l = set.len();
    if l < 2 {
        return Err(invalid("concentration check needs |Λ| >= 2"));
    }
    let exact = l <= EXACT_LIMIT;
    if !exact && trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let words = set.encode(code)?;
    let profile = plurality_profile(code, set)?;
    let pl = profile.pl_vector();
    let q = code.field().order() as usize;
    let n = code.n();

    let samples: Vec<Vec<f64>> = if exact {
        (0u32..1 << l)
            .into_par_iter()
            .map(|mask| {
                let keep: Vec<bool> = (0..l).map(|i| mask >> i & 1 == 1).collect();
                deviations(&words, &keep, &pl, q)
            })
            .collect()
    } else {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut r = rng::stream_rng(seed, streams::SUBSET, t as u64);
                let keep: Vec<bool> = (0..l).map(|_| r.random_bool(0.5)).collect();
                deviations(&words, &keep, &pl, q)
            })
            .collect()
    };

    let log_l = (l as f64).log2();
    let coordinates: Vec<CoordinateConcentration> = (0..n)
        .map(|j| {
            let abs: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            let sq: Vec<f64> = abs.iter().map(|x| x * x).collect();
            let a = mean_se(&abs);
            let s = mean_se(&sq);
            let (a_se, s_se) = if exact { (0.0, 0.0) } else { (a.std_error, s.std_error) };
            let denom = l as f64 * log_l * pl[j];
            CoordinateConcentration {
                coordinate: j,
                pl: pl[j],
                mean_abs: a.mean,
                mean_abs_se: a_se,
                mean_sq: s.mean,
                mean_sq_se: s_se,
                c5_fit: (a.mean * a.mean).max(s.mean) / denom,
            }
        })
        .collect();
    let c5_fit = coordinates.iter().map(|c| c.c5_fit).fold(0.0, f64::max);
    Ok(ConcentrationReport {
        list_size: l,
        exact,
        samples: if exact { 1 << l } else { trials as u64 },
        coordinates,
        c5_fit,
        c5_configured: cfg.concentration,
        holds_with_configured: c5_fit <= cfg.concentration,
        c5_from_tail_bound: 2.0 * ((4.0 * l as f64).ln() + 1.0) / log_l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Budgets;
    use crate::galois::Field;

    #[test]
    fn constant_column_does_not_move() {
        let f = Field::from_order(3).unwrap();
        // first coordinate is always 0
        let code = LinearCode::from_rows(f, &[vec![0, 1, 2], vec![0, 2, 2]]).unwrap();
        let set = MessageSet::from_indices(&code, &[0, 1, 2, 4]).unwrap();
        let r = concentration_check(&code, &set, 0, 0, &ConstantsConfig::default()).unwrap();
        assert!(r.exact);
        assert_eq!(r.coordinates[0].mean_abs, 0.0);
        assert_eq!(r.coordinates[0].mean_sq, 0.0);
    }

    #[test]
    fn two_codewords_over_gf2() {
        // Λ = {00, 11}: pl = 1/2 everywhere. The four subsets give
        // |Λ'| pl - m = 0, -1/2, -1/2, 0, so E|.| = 1/4 and E(.)^2 = 1/8.
        let f = Field::from_order(2).unwrap();
        let code = LinearCode::from_rows(f, &[vec![1, 1]]).unwrap();
        let set = MessageSet::from_indices(&code, &[0, 1]).unwrap();
        let r = concentration_check(&code, &set, 0, 0, &ConstantsConfig::default()).unwrap();
        assert_eq!(r.samples, 4);
        for c in &r.coordinates {
            assert_eq!(c.pl, 0.5);
            assert_eq!(c.mean_abs, 0.25);
            assert_eq!(c.mean_sq, 0.125);
            // C5 = max(1/16, 1/8) / (2 * 1 * 1/2)
            assert_eq!(c.c5_fit, 0.125);
        }
    }

    #[test]
    fn exact_and_sampled_agree() {
        let code = LinearCode::hadamard(&Field::from_order(3).unwrap(), 2, &Budgets::default()).unwrap();
        let set = MessageSet::from_indices(&code, &(0..9).collect::<Vec<_>>()).unwrap();
        let exact = concentration_check(&code, &set, 0, 0, &ConstantsConfig::default()).unwrap();
        assert!(exact.exact);
        assert!(exact.c5_fit <= exact.c5_from_tail_bound);
        // compare against a sampled run through the same code path
        let words = set.encode(&code).unwrap();
        let pl = plurality_profile(&code, &set).unwrap().pl_vector();
        let mut total = vec![0.0; code.n()];
        let m = 40_000;
        let mut r = rng::rng_from_seed(7);
        for _ in 0..m {
            let keep: Vec<bool> = (0..9).map(|_| r.random_bool(0.5)).collect();
            for (t, d) in total.iter_mut().zip(deviations(&words, &keep, &pl, 3)) {
                *t += d * d;
            }
        }
        for (c, t) in exact.coordinates.iter().zip(total) {
            let est = t / m as f64;
            assert!((est - c.mean_sq).abs() < 0.05 * (1.0 + c.mean_sq), "{est} vs {}", c.mean_sq);
        }
    }

    #[test]
    fn large_sets_are_sampled() {
        let code = LinearCode::hadamard(&Field::from_order(3).unwrap(), 3, &Budgets::default()).unwrap();
        let set = MessageSet::random(&code, 16, 2).unwrap();
        let r = concentration_check(&code, &set, 500, 1, &ConstantsConfig::default()).unwrap();
        assert!(!r.exact);
        assert_eq!(r.samples, 500);
        assert!(r.coordinates.iter().all(|c| c.mean_sq_se > 0.0 || c.mean_sq == 0.0));
        assert!(concentration_check(&code, &set, 0, 1, &ConstantsConfig::default()).is_err());
    }
}
