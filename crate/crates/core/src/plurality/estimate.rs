//! Monte Carlo estimates of `E` and `F` for randomized code families.
//!
//! Both quantities take a maximum over every message set of size `L`, which
//! is out of reach. The estimators maximize over a fixed family of candidate
//! sets instead, so their values are lower bounds on the true quantities and
//! are flagged as such.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{max_agreement_sum, MessageSet, PluralityProfile};
use crate::error::{invalid, Result};
use crate::galois::Symbol;
use crate::linear_code::{CodeFamily, LinearCode, Word};
use crate::rng::{self, streams};
use crate::stats::mean_se;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateEstimate {
    pub label: String,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    /// Always set: the maximum runs over sampled candidates only.
    pub lower_bound: bool,
    pub best_candidate: usize,
    pub draws: usize,
    pub candidates: Vec<CandidateEstimate>,
}

/// Message `t` of the low-degree enumeration: base-`q` digits of `t` with the
/// first coordinate least significant.
fn low_degree_message(t: u128, q: u128, k: usize) -> Word {
    let mut rest = t;
    (0..k)
        .map(|_| {
            let d = (rest % q) as Symbol;
            rest /= q;
            d
        })
        .collect()
}

fn random_subspace(parent: &LinearCode, list_size: usize, seed: u64) -> Option<MessageSet> {
    let field = parent.field();
    let q = field.order() as u128;
    let k = parent.k();
    let mut dim = 1;
    while dim < k && q.pow(dim as u32) < list_size as u128 {
        dim += 1;
    }
    let mut r = rng::rng_from_seed(seed);
    let basis: Vec<Word> = (0..dim)
        .map(|_| (0..k).map(|_| r.random_range(0..field.order()) as Symbol).collect())
        .collect();
    let mut seen = HashSet::new();
    let mut messages = Vec::with_capacity(list_size);
    for t in 0..q.pow(dim as u32) {
        let coeffs = low_degree_message(t, q, dim);
        let mut m = vec![0; k];
        for (a, u) in coeffs.iter().zip(&basis) {
            for (slot, &ui) in m.iter_mut().zip(u) {
                *slot = field.add(*slot, field.mul(*a, ui));
            }
        }
        if seen.insert(m.clone()) {
            messages.push(m);
            if messages.len() == list_size {
                return MessageSet::new(messages).ok();
            }
        }
    }
    None
}

/// Candidate message sets of size `list_size`: a low-degree bundle (messages
/// supported on the first coordinates, i.e. low-degree polynomials for RS and
/// a coordinate subspace for Hadamard), a random subspace, then uniform sets.
pub fn candidate_sets(
    parent: &LinearCode,
    list_size: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<(String, MessageSet)>> {
    if count == 0 {
        return Err(invalid("need at least one candidate set"));
    }
    if list_size == 0 || list_size as u128 > parent.message_count() {
        return Err(invalid(format!(
            "list size {list_size} must lie in [1, {}]",
            parent.message_count()
        )));
    }
    let q = parent.field().order() as u128;
    let mut out = Vec::with_capacity(count);
    let low: Vec<Word> = (0..list_size as u128)
        .map(|t| low_degree_message(t, q, parent.k()))
        .collect();
    out.push(("low-degree".to_string(), MessageSet::new(low)?));
    if count > 1 {
        let sub_seed = rng::derive_seed(seed, streams::CANDIDATES, 0);
        let set = match random_subspace(parent, list_size, sub_seed) {
            Some(set) => set,
            None => MessageSet::random(parent, list_size, sub_seed)?,
        };
        out.push(("subspace".to_string(), set));
    }
    for i in 2..count {
        let s = rng::derive_seed(seed, streams::CANDIDATES, i as u64);
        out.push((format!("uniform-{i}"), MessageSet::random(parent, list_size, s)?));
    }
    Ok(out)
}

/// `E_C sum_j pl_j(Λ)` for the family, computed exactly: every coordinate of
/// a sampled or punctured code is marginally a uniform parent column.
pub fn expected_plurality_sum(family: &CodeFamily, set: &MessageSet) -> Result<f64> {
    let parent = family.parent();
    let profile = PluralityProfile::of_words(&set.encode(parent)?)?;
    Ok(family.n() as f64 * profile.total_count() as f64
        / (parent.n() as f64 * set.len() as f64))
}

fn draw_values(
    family: &CodeFamily,
    sets: &[(String, MessageSet)],
    draws: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    (0..draws)
        .into_par_iter()
        .map(|d| {
            let code = family.draw_indexed(seed, d as u64)?;
            sets.iter()
                .map(|(_, set)| Ok(max_agreement_sum(&code, set)?.value as f64))
                .collect()
        })
        .collect()
}

fn summarize(
    sets: &[(String, MessageSet)],
    per_candidate: Vec<Vec<f64>>,
    overall: Option<Vec<f64>>,
    draws: usize,
) -> Estimate {
    let candidates: Vec<CandidateEstimate> = sets
        .iter()
        .zip(&per_candidate)
        .map(|((label, _), samples)| {
            let s = mean_se(samples);
            CandidateEstimate {
                label: label.clone(),
                mean: s.mean,
                std_error: s.std_error,
            }
        })
        .collect();
    let best_candidate = candidates
        .iter()
        .enumerate()
        .fold(0, |b, (i, c)| if c.mean > candidates[b].mean { i } else { b });
    let (value, std_error) = match overall {
        Some(samples) => {
            let s = mean_se(&samples);
            (s.mean, s.std_error)
        }
        None => (candidates[best_candidate].mean, candidates[best_candidate].std_error),
    };
    Estimate {
        value,
        std_error,
        lower_bound: true,
        best_candidate,
        draws,
        candidates,
    }
}

/// `max_Λ E_C max_z sum_{x in Λ} agr(c(x), z)` over the candidate sets.
pub fn estimate_e(
    family: &CodeFamily,
    list_size: usize,
    candidates: usize,
    draws: usize,
    seed: u64,
) -> Result<Estimate> {
    if draws == 0 {
        return Err(invalid("need at least one code draw"));
    }
    let sets = candidate_sets(family.parent(), list_size, candidates, seed)?;
    let values = draw_values(family, &sets, draws, seed)?;
    let per_candidate = (0..sets.len())
        .map(|c| values.iter().map(|row| row[c]).collect())
        .collect();
    Ok(summarize(&sets, per_candidate, None, draws))
}

/// `L E_C max_Λ |sum_j (pl_j(Λ) - E_C pl_j(Λ))|` over the candidate sets.
pub fn estimate_f(
    family: &CodeFamily,
    list_size: usize,
    candidates: usize,
    draws: usize,
    seed: u64,
) -> Result<Estimate> {
    if draws == 0 {
        return Err(invalid("need at least one code draw"));
    }
    let sets = candidate_sets(family.parent(), list_size, candidates, seed)?;
    let means: Vec<f64> = sets
        .iter()
        .map(|(_, set)| Ok(set.len() as f64 * expected_plurality_sum(family, set)?))
        .collect::<Result<_>>()?;
    let values = draw_values(family, &sets, draws, seed)?;
    let deviations: Vec<Vec<f64>> = values
        .iter()
        .map(|row| row.iter().zip(&means).map(|(v, m)| (v - m).abs()).collect())
        .collect();
    let overall = deviations
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .collect();
    let per_candidate = (0..sets.len())
        .map(|c| deviations.iter().map(|row| row[c]).collect())
        .collect();
    Ok(summarize(&sets, per_candidate, Some(overall), draws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Budgets;
    use crate::galois::Field;
    use crate::linear_code::EvaluationSet;

    fn rs_parent(q: u32, k: usize) -> LinearCode {
        let f = Field::from_order(q).unwrap();
        LinearCode::reed_solomon(&f, k, &EvaluationSet::full(&f)).unwrap()
    }

    #[test]
    fn candidates_are_valid() {
        let parent = rs_parent(5, 3);
        let sets = candidate_sets(&parent, 7, 5, 1).unwrap();
        assert_eq!(sets.len(), 5);
        assert_eq!(sets[0].0, "low-degree");
        for (_, s) in &sets {
            assert_eq!(s.len(), 7);
        }
        // low-degree bundle for L = 7 over GF(5): degree <= 1 polynomials
        assert!(sets[0].1.messages().iter().all(|m| m[2] == 0));
        assert!(candidate_sets(&parent, 126, 1, 1).is_err());
    }

    #[test]
    fn list_size_one_is_exact() {
        let family = CodeFamily::Sampled {
            parent: rs_parent(5, 2),
            n: 6,
        };
        let e = estimate_e(&family, 1, 3, 20, 9).unwrap();
        assert_eq!(e.value, 6.0);
        assert_eq!(e.std_error, 0.0);
        assert!(e.lower_bound);
    }

    #[test]
    fn single_coordinate_matches_column_average() {
        let parent = rs_parent(5, 2);
        let family = CodeFamily::Sampled {
            parent: parent.clone(),
            n: 1,
        };
        let set = MessageSet::from_indices(&parent, &[0, 1, 6, 7]).unwrap();
        // enumerate the single column's five equally likely values
        let mut total = 0.0;
        for c in 0..5 {
            let col = parent.column(c);
            let symbols: Vec<Symbol> = set
                .messages()
                .iter()
                .map(|m| parent.field().add(m[0], parent.field().mul(m[1], col[1])))
                .collect();
            let mut counts = [0u32; 5];
            for s in symbols {
                counts[s as usize] += 1;
            }
            total += *counts.iter().max().unwrap() as f64 / 4.0;
        }
        let exact = total / 5.0;
        assert!((expected_plurality_sum(&family, &set).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn constant_family_has_zero_deviation() {
        let f = Field::from_order(3).unwrap();
        let parent = LinearCode::from_rows(f, &[vec![1, 1, 1], vec![2, 2, 2]]).unwrap();
        let family = CodeFamily::Sampled { parent, n: 4 };
        let est = estimate_f(&family, 2, 2, 10, 3).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn estimates_are_reproducible() {
        let family = CodeFamily::Sampled {
            parent: LinearCode::hadamard(&Field::from_order(3).unwrap(), 2, &Budgets::default())
                .unwrap(),
            n: 8,
        };
        let a = estimate_e(&family, 4, 4, 30, 5).unwrap();
        let b = estimate_e(&family, 4, 4, 30, 5).unwrap();
        assert_eq!(a, b);
        let f = estimate_f(&family, 4, 4, 30, 5).unwrap();
        assert!(f.value >= 0.0);
    }
}
