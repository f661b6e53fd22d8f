//! Agreement counts, coordinate-wise pluralities, and the plurality mass `Q`.
//!
//! For a set `Λ` of codewords, `pl_j(Λ)` is the largest fraction of `Λ` that
//! shares one symbol at coordinate `j`. The word taking the plurality symbol at
//! every coordinate maximizes the total agreement with `Λ`, and that maximum is
//! `|Λ| * sum_j pl_j(Λ)`. Everything here is kept as integer counts; fractions
//! appear only as exact rationals or at report boundaries.

mod estimate;
pub(crate) mod search;

use std::collections::HashSet;

use num_rational::Ratio;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::config::Budgets;
use crate::error::{check_budget, invalid, Error, Result};
use crate::galois::Symbol;
use crate::linear_code::{LinearCode, Word};
use crate::rng;

pub use estimate::{
    candidate_sets, estimate_e, estimate_f, expected_plurality_sum, CandidateEstimate, Estimate,
};
pub use search::binomial;

/// An ordered, duplicate-free, non-empty list of messages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Word>", into = "Vec<Word>")]
pub struct MessageSet {
    messages: Vec<Word>,
}

impl TryFrom<Vec<Word>> for MessageSet {
    type Error = Error;
    fn try_from(messages: Vec<Word>) -> Result<Self> {
        MessageSet::new(messages)
    }
}

impl From<MessageSet> for Vec<Word> {
    fn from(set: MessageSet) -> Self {
        set.messages
    }
}

impl MessageSet {
    pub fn new(messages: Vec<Word>) -> Result<Self> {
        let Some(first) = messages.first() else {
            return Err(invalid("message set must be non-empty"));
        };
        let k = first.len();
        if let Some(m) = messages.iter().find(|m| m.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: m.len(),
            });
        }
        let mut seen = HashSet::with_capacity(messages.len());
        if messages.iter().any(|m| !seen.insert(m)) {
            return Err(invalid("message set contains a duplicate message"));
        }
        Ok(MessageSet { messages })
    }

    /// Messages given by their base-`q` indices (first coordinate most significant).
    pub fn from_indices(code: &LinearCode, indices: &[u64]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| code.message_from_index(i)).collect())
    }

    /// `size` distinct messages drawn uniformly at random.
    pub fn random(code: &LinearCode, size: usize, seed: u64) -> Result<Self> {
        let total = code.message_count();
        if size as u128 > total {
            return Err(invalid(format!("cannot draw {size} distinct messages out of {total}")));
        }
        let mut r = rng::rng_from_seed(seed);
        if total <= usize::MAX as u128 {
            let picks = index::sample(&mut r, total as usize, size);
            return Self::from_indices(code, &picks.into_iter().map(|i| i as u64).collect::<Vec<_>>());
        }
        let q = code.field().order();
        let mut seen = HashSet::new();
        let mut messages = Vec::with_capacity(size);
        while messages.len() < size {
            let m: Word = (0..code.k())
                .map(|_| rand::Rng::random_range(&mut r, 0..q) as Symbol)
                .collect();
            if seen.insert(m.clone()) {
                messages.push(m);
            }
        }
        Self::new(messages)
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn messages(&self) -> &[Word] {
        &self.messages
    }

    /// The members whose flag is set, or `None` if no flag is set.
    pub fn retain(&self, keep: &[bool]) -> Option<MessageSet> {
        let kept: Vec<Word> = self
            .messages
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(m, _)| m.clone())
            .collect();
        (!kept.is_empty()).then_some(MessageSet { messages: kept })
    }

    /// Encodes every message; fails on a length or range mismatch.
    pub fn encode(&self, code: &LinearCode) -> Result<Vec<Word>> {
        self.messages.iter().map(|m| code.encode(m)).collect()
    }
}

/// Number of coordinates where `x` and `y` agree.
pub fn agreement(x: &[Symbol], y: &[Symbol]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    Ok(x.iter().zip(y).filter(|(a, b)| a == b).count())
}

/// Number of coordinates where `x` and `y` differ.
pub fn distance_count(x: &[Symbol], y: &[Symbol]) -> Result<usize> {
    Ok(x.len() - agreement(x, y)?)
}

/// Relative Hamming distance as an exact fraction.
pub fn relative_distance(x: &[Symbol], y: &[Symbol]) -> Result<Ratio<u64>> {
    if x.is_empty() {
        return Err(invalid("words must be non-empty"));
    }
    Ok(Ratio::new(distance_count(x, y)? as u64, x.len() as u64))
}

/// Coordinate-wise plurality data of a set of codewords.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluralityProfile {
    size: usize,
    counts: Vec<u32>,
    symbols: Vec<Symbol>,
    supports: Vec<Vec<Symbol>>,
}

impl PluralityProfile {
    /// Profile of explicit words, all of length `n`.
    pub fn of_words<W: AsRef<[Symbol]>>(words: &[W]) -> Result<Self> {
        let Some(first) = words.first() else {
            return Err(invalid("plurality profile needs at least one word"));
        };
        let n = first.as_ref().len();
        if let Some(w) = words.iter().find(|w| w.as_ref().len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: w.as_ref().len(),
            });
        }
        let mut counts = Vec::with_capacity(n);
        let mut symbols = Vec::with_capacity(n);
        let mut supports = Vec::with_capacity(n);
        let mut column = Vec::with_capacity(words.len());
        for j in 0..n {
            column.clear();
            column.extend(words.iter().map(|w| w.as_ref()[j]));
            column.sort_unstable();
            let (mut best, mut best_sym) = (0u32, 0);
            let mut support = Vec::new();
            for run in column.chunk_by(|a, b| a == b) {
                support.push(run[0]);
                // strict comparison keeps the smallest symbol on ties
                if run.len() as u32 > best {
                    best = run.len() as u32;
                    best_sym = run[0];
                }
            }
            counts.push(best);
            symbols.push(best_sym);
            supports.push(support);
        }
        Ok(PluralityProfile {
            size: words.len(),
            counts,
            symbols,
            supports,
        })
    }

    /// `|Λ|`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    /// `|Λ| pl_j(Λ)`, the largest multiplicity at coordinate `j`.
    pub fn count(&self, j: usize) -> u32 {
        self.counts[j]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn pl(&self, j: usize) -> Ratio<u64> {
        Ratio::new(self.counts[j] as u64, self.size as u64)
    }

    pub fn pl_f64(&self, j: usize) -> f64 {
        self.counts[j] as f64 / self.size as f64
    }

    pub fn pl_vector(&self) -> Vec<f64> {
        (0..self.n()).map(|j| self.pl_f64(j)).collect()
    }

    /// Smallest symbol attaining the plurality at coordinate `j`.
    pub fn symbol(&self, j: usize) -> Symbol {
        self.symbols[j]
    }

    /// Distinct symbols present at coordinate `j`, ascending.
    pub fn support(&self, j: usize) -> &[Symbol] {
        &self.supports[j]
    }

    /// `|Λ| sum_j pl_j(Λ)`.
    pub fn total_count(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// `sum_j pl_j(Λ)` as an exact fraction.
    pub fn sum_pl(&self) -> Ratio<u64> {
        Ratio::new(self.total_count(), self.size as u64)
    }

    /// The plurality word.
    pub fn witness(&self) -> Word {
        self.symbols.clone()
    }
}

/// Plurality profile of the codewords of `set`.
pub fn plurality_profile(code: &LinearCode, set: &MessageSet) -> Result<PluralityProfile> {
    PluralityProfile::of_words(&set.encode(code)?)
}

/// Multiplicities `v_j(α, Λ)` of every symbol present at coordinate `j`.
pub fn symbol_counts(code: &LinearCode, set: &MessageSet, j: usize) -> Result<Vec<(Symbol, u32)>> {
    if j >= code.n() {
        return Err(invalid(format!("coordinate {j} out of range for n = {}", code.n())));
    }
    let mut column: Vec<Symbol> = set.encode(code)?.iter().map(|w| w[j]).collect();
    column.sort_unstable();
    Ok(column
        .chunk_by(|a, b| a == b)
        .map(|run| (run[0], run.len() as u32))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxAgreement {
    /// `max_z sum_{x in Λ} agr(c(x), z)`.
    pub value: u64,
    /// The plurality word, which attains the maximum.
    pub witness: Word,
}

/// The largest total agreement of any received word with the codewords of `set`.
pub fn max_agreement_sum(code: &LinearCode, set: &MessageSet) -> Result<MaxAgreement> {
    let profile = plurality_profile(code, set)?;
    Ok(MaxAgreement {
        value: profile.total_count(),
        witness: profile.witness(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum QMode {
    /// Maximum over every set of `L` distinct codewords.
    Exact,
    /// Grows a set from the zero codeword by best single additions.
    Greedy,
    /// Best of `trials` uniformly random sets.
    Sampled { trials: usize, seed: u64 },
}

/// The plurality mass `max_{|Λ| = L} sum_j pl_j(Λ)` over sets of distinct codewords.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QValue {
    pub list_size: usize,
    /// `sum_j pl_j` of the best set found.
    pub value: Ratio<u64>,
    /// `L sum_j pl_j`, the corresponding total agreement.
    pub count_sum: u64,
    /// Set when the value is only a lower bound on the maximum.
    pub lower_bound: bool,
    /// Codewords of the best set found.
    pub witness: Vec<Word>,
}

impl QValue {
    fn new(list_size: usize, count_sum: u64, lower_bound: bool, witness: Vec<Word>) -> Self {
        QValue {
            list_size,
            value: Ratio::new(count_sum, list_size as u64),
            count_sum,
            lower_bound,
            witness,
        }
    }

    pub fn value_f64(&self) -> f64 {
        self.count_sum as f64 / self.list_size as f64
    }
}

pub fn quantity_q(code: &LinearCode, list_size: usize, mode: QMode, budgets: &Budgets) -> Result<QValue> {
    if list_size == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    if list_size as u128 > code.size() {
        return Err(invalid(format!(
            "list size {list_size} exceeds the {} codewords",
            code.size()
        )));
    }
    match mode {
        QMode::Exact => {
            check_budget(
                "exact plurality mass",
                binomial(code.size(), list_size as u128),
                budgets.max_subsets as u128,
            )?;
            let table = code.codewords(budgets)?;
            let q = code.field().order() as usize;
            let (value, set) = search::max_mass(&table, q, list_size)
                .expect("list size is at most the code size");
            let witness = set.iter().map(|&i| table.get(i).to_vec()).collect();
            Ok(QValue::new(list_size, value, false, witness))
        }
        QMode::Greedy => {
            let table = code.codewords(budgets)?;
            let mut chosen: Vec<usize> = vec![0];
            let mut members: Vec<&[Symbol]> = vec![table.get(0)];
            while chosen.len() < list_size {
                let mut best: Option<(u64, usize)> = None;
                for i in 1..table.len() {
                    if chosen.contains(&i) {
                        continue;
                    }
                    members.push(table.get(i));
                    let value = PluralityProfile::of_words(&members)?.total_count();
                    members.pop();
                    if best.is_none_or(|(b, _)| value > b) {
                        best = Some((value, i));
                    }
                }
                let (_, i) = best.expect("enough codewords remain");
                chosen.push(i);
                members.push(table.get(i));
            }
            let value = PluralityProfile::of_words(&members)?.total_count();
            let witness = members.iter().map(|w| w.to_vec()).collect();
            Ok(QValue::new(list_size, value, true, witness))
        }
        QMode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(invalid("sampled mode needs at least one trial"));
            }
            let size = code.size();
            if size > usize::MAX as u128 {
                return Err(invalid("code too large to sample codeword indices"));
            }
            let mut best: Option<(u64, Vec<Word>)> = None;
            for t in 0..trials {
                let mut r = rng::stream_rng(seed, rng::streams::SUBSET, t as u64);
                let words: Vec<Word> = index::sample(&mut r, size as usize, list_size)
                    .into_iter()
                    .map(|i| code.codeword(i as u64))
                    .collect();
                let value = PluralityProfile::of_words(&words)?.total_count();
                if best.as_ref().is_none_or(|(b, _)| value > *b) {
                    best = Some((value, words));
                }
            }
            let (value, witness) = best.expect("at least one trial");
            Ok(QValue::new(list_size, value, true, witness))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::Field;
    use crate::linear_code::EvaluationSet;

    fn gf(q: u32) -> Field {
        Field::from_order(q).unwrap()
    }

    #[test]
    fn agreement_basics() {
        assert_eq!(agreement(&[0, 0, 1], &[0, 1, 1]).unwrap(), 2);
        assert_eq!(agreement(&[3, 4], &[3, 4]).unwrap(), 2);
        assert!(agreement(&[0], &[0, 1]).is_err());
        assert_eq!(relative_distance(&[0, 0, 1], &[0, 1, 1]).unwrap(), Ratio::new(1, 3));
    }

    #[test]
    fn message_set_rules() {
        assert!(MessageSet::new(vec![]).is_err());
        assert!(MessageSet::new(vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(MessageSet::new(vec![vec![0, 1], vec![0]]).is_err());
        let s = MessageSet::new(vec![vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(s.retain(&[false, true]).unwrap().messages(), &[vec![1, 1]]);
        assert!(s.retain(&[false, false]).is_none());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[[0,1],[1,1]]");
        assert!(serde_json::from_str::<MessageSet>("[[0,1],[0,1]]").is_err());
    }

    #[test]
    fn singleton_profile() {
        let f = gf(5);
        let code = LinearCode::reed_solomon(&f, 2, &EvaluationSet::full(&f)).unwrap();
        let set = MessageSet::new(vec![vec![2, 3]]).unwrap();
        let p = plurality_profile(&code, &set).unwrap();
        assert!((0..5).all(|j| p.pl(j) == Ratio::from_integer(1)));
        let m = max_agreement_sum(&code, &set).unwrap();
        assert_eq!(m.value, 5);
        assert_eq!(m.witness, code.encode(&[2, 3]).unwrap());
    }

    #[test]
    fn hand_counted_binary_profile() {
        let words = vec![vec![0, 0], vec![0, 1], vec![1, 1]];
        let p = PluralityProfile::of_words(&words).unwrap();
        assert_eq!(p.pl(0), Ratio::new(2, 3));
        assert_eq!(p.pl(1), Ratio::new(2, 3));
        assert_eq!(p.witness(), vec![0, 1]);
        assert_eq!(p.total_count(), 4);
        assert_eq!(p.support(0), &[0, 1]);
        // all four received words
        let best = [[0, 0], [0, 1], [1, 0], [1, 1]]
            .iter()
            .map(|z| words.iter().map(|w| agreement(w, z).unwrap()).sum::<usize>())
            .max()
            .unwrap();
        assert_eq!(best, 4);
    }

    #[test]
    fn tie_breaks_to_smallest_symbol() {
        let p = PluralityProfile::of_words(&[vec![2], vec![1], vec![2], vec![1]]).unwrap();
        assert_eq!(p.symbol(0), 1);
        assert_eq!(p.count(0), 2);
    }

    #[test]
    fn whole_hadamard_code_is_uniform() {
        let f = gf(3);
        let code = LinearCode::hadamard(&f, 2, &Budgets::default()).unwrap();
        let all = MessageSet::from_indices(&code, &(0..9).collect::<Vec<_>>()).unwrap();
        let p = plurality_profile(&code, &all).unwrap();
        for j in 0..9 {
            let expected = if j == 0 { Ratio::from_integer(1) } else { Ratio::new(1, 3) };
            assert_eq!(p.pl(j), expected, "coordinate {j}");
        }
        assert_eq!(symbol_counts(&code, &all, 4).unwrap(), vec![(0, 3), (1, 3), (2, 3)]);
    }

    #[test]
    fn q_for_singletons_and_whole_code() {
        let f = gf(2);
        let b = Budgets::default();
        let code = LinearCode::hadamard(&f, 2, &b).unwrap();
        let one = quantity_q(&code, 1, QMode::Exact, &b).unwrap();
        assert_eq!(one.value, Ratio::from_integer(4));
        // whole code: zero column contributes 1, the other three 1/2 each
        let all = quantity_q(&code, 4, QMode::Exact, &b).unwrap();
        assert_eq!(all.value, Ratio::new(5, 2));
        assert!(!all.lower_bound);
        assert!(quantity_q(&code, 5, QMode::Exact, &b).is_err());
    }

    #[test]
    fn q_budget_is_enforced() {
        let f = gf(7);
        let code = LinearCode::reed_solomon(&f, 2, &EvaluationSet::full(&f)).unwrap();
        let tight = Budgets {
            max_subsets: 100,
            ..Budgets::default()
        };
        assert!(matches!(
            quantity_q(&code, 3, QMode::Exact, &tight),
            Err(Error::Infeasible { .. })
        ));
    }
}
