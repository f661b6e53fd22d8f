//! Exhaustive list-decodability oracles with self-verifying certificates.
//!
//! Radii are exact fractions `num/den`; a codeword `c` lies within radius
//! `rho` of `z` when `d(z, c) <= rho`, checked as the integer comparison
//! `dist * den <= num * n`.
//!
//! Standard mode asks that every received word have at most `L` codewords
//! within radius `rho`. Average-radius mode asks that every set of `L + 1`
//! distinct codewords have average distance strictly greater than `rho` from
//! every received word; the inner maximum over received words is the
//! plurality identity, so no received words are enumerated. With this strict
//! reading an average-radius decodable code is standard decodable at the same
//! `(rho, L)` for every radius.

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Budgets;
use crate::error::{check_budget, invalid, Result};
use crate::galois::Symbol;
use crate::linear_code::{digits, CodewordTable, LinearCode, Word};
use crate::plurality::{agreement, binomial, search, PluralityProfile};
use crate::rng::{self, streams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Standard,
    AverageRadius,
}

impl std::str::FromStr for Mode {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Mode::Standard),
            "average" | "average-radius" | "average_radius" => Ok(Mode::AverageRadius),
            other => Err(invalid(format!("unknown oracle mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListDecQuery {
    radius: Ratio<u64>,
    list_size: usize,
    mode: Mode,
}

impl ListDecQuery {
    pub fn new(radius: Ratio<u64>, list_size: usize, mode: Mode) -> Result<Self> {
        if *radius.denom() == 0 || radius > Ratio::from_integer(1) {
            return Err(invalid(format!("radius {radius} outside [0, 1]")));
        }
        if list_size == 0 {
            return Err(invalid("list size must be at least 1"));
        }
        Ok(ListDecQuery {
            radius,
            list_size,
            mode,
        })
    }

    pub fn radius(&self) -> Ratio<u64> {
        self.radius
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// The exact radius equivalent to a real radius for words of length `n` in
/// both modes: `floor((L+1) n rho) / ((L+1) n)`. `None` for negative `rho`,
/// where decodability holds vacuously.
pub fn rational_radius(rho: f64, n: usize, list_size: usize) -> Option<Ratio<u64>> {
    if !(rho >= 0.0) {
        return None;
    }
    let den = ((list_size + 1) * n) as u64;
    let num = ((rho.min(1.0) * den as f64) + 1e-9).floor() as u64;
    Some(Ratio::new(num.min(den), den))
}

fn within(dist: usize, n: usize, radius: Ratio<u64>) -> bool {
    dist as u128 * *radius.denom() as u128 <= *radius.numer() as u128 * n as u128
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Decodable,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchSpace {
    Exhaustive,
    /// Only `samples` uniformly drawn received words were examined.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub received: Word,
    pub codewords: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub query: ListDecQuery,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    pub search: SearchSpace,
}

impl Certificate {
    pub fn is_decodable(&self) -> bool {
        self.verdict == Verdict::Decodable
    }
}

/// Every codeword within `radius` of `z`, in codeword-table order.
pub fn list_at(code: &LinearCode, z: &[Symbol], radius: Ratio<u64>, budgets: &Budgets) -> Result<Vec<Word>> {
    if z.len() != code.n() {
        return Err(crate::Error::DimensionMismatch {
            expected: code.n(),
            actual: z.len(),
        });
    }
    let table = code.codewords(budgets)?;
    Ok(table
        .iter()
        .filter(|c| within(c.len() - agreement(c, z).expect("equal lengths"), code.n(), radius))
        .map(<[Symbol]>::to_vec)
        .collect())
}

fn received_space(code: &LinearCode) -> u128 {
    (code.field().order() as u128)
        .checked_pow(code.n() as u32)
        .unwrap_or(u128::MAX)
}

fn check_standard_budget(code: &LinearCode, budgets: &Budgets) -> Result<u64> {
    let space = received_space(code);
    check_budget("received-word scan", space, budgets.max_received_words as u128)?;
    check_budget(
        "received-word comparisons",
        space.saturating_mul(code.size()),
        budgets.max_comparisons as u128,
    )?;
    check_budget("codeword enumeration", code.size(), budgets.max_codewords as u128)?;
    Ok(space as u64)
}

/// Codewords within `radius` of `z`, stopping after `limit` hits.
fn close_words<'a>(table: &'a CodewordTable, z: &[Symbol], radius: Ratio<u64>, limit: usize) -> Vec<&'a [Symbol]> {
    let n = z.len();
    let mut out = Vec::new();
    for c in table.iter() {
        let dist = c.iter().zip(z).filter(|(a, b)| a != b).count();
        if within(dist, n, radius) {
            out.push(c);
            if out.len() >= limit {
                break;
            }
        }
    }
    out
}

fn standard_witness(table: &CodewordTable, z: Word, radius: Ratio<u64>, list_size: usize) -> Option<Witness> {
    let hits = close_words(table, &z, radius, list_size + 1);
    (hits.len() > list_size).then(|| Witness {
        codewords: hits.into_iter().map(<[Symbol]>::to_vec).collect(),
        received: z,
    })
}

/// Exhaustive standard check; the witness is the lexicographically first
/// violating received word together with the first `L + 1` close codewords.
pub fn is_list_decodable(code: &LinearCode, query: &ListDecQuery, budgets: &Budgets) -> Result<Certificate> {
    match query.mode {
        Mode::Standard => {}
        Mode::AverageRadius => return is_avg_radius_list_decodable(code, query, budgets),
    }
    let space = check_standard_budget(code, budgets)?;
    let table = code.codewords(budgets)?;
    let q = code.field().order() as usize;
    let n = code.n();
    let witness = if query.list_size as u128 >= code.size() {
        None
    } else {
        (0..space).into_par_iter().find_map_first(|idx| {
            standard_witness(&table, digits(idx as usize, q, n), query.radius, query.list_size)
        })
    };
    Ok(Certificate {
        query: *query,
        verdict: if witness.is_some() { Verdict::Violated } else { Verdict::Decodable },
        witness,
        search: SearchSpace::Exhaustive,
    })
}

/// Standard check over `samples` uniformly drawn received words. A
/// `Decodable` verdict here only means no violation was found.
pub fn is_list_decodable_sampled(
    code: &LinearCode,
    query: &ListDecQuery,
    samples: usize,
    seed: u64,
    budgets: &Budgets,
) -> Result<Certificate> {
    if query.mode != Mode::Standard {
        return Err(invalid("received-word sampling applies to the standard mode only"));
    }
    let table = code.codewords(budgets)?;
    let q = code.field().order();
    let witness = (0..samples).into_par_iter().find_map_first(|s| {
        let mut r = rng::stream_rng(seed, streams::RECEIVED, s as u64);
        let z: Word = (0..code.n()).map(|_| r.random_range(0..q) as Symbol).collect();
        standard_witness(&table, z, query.radius, query.list_size)
    });
    Ok(Certificate {
        query: *query,
        verdict: if witness.is_some() { Verdict::Violated } else { Verdict::Decodable },
        witness,
        search: SearchSpace::Sampled { samples, seed },
    })
}

/// Smallest total agreement of an `(L+1)`-set with a received word that
/// violates average-radius decodability: `ceil((L+1) n (1 - rho))`.
fn avg_threshold(n: usize, list_size: usize, radius: Ratio<u64>) -> u64 {
    let (num, den) = (*radius.numer() as u128, *radius.denom() as u128);
    let need = (list_size as u128 + 1) * n as u128 * (den - num);
    need.div_ceil(den) as u64
}

/// Exhaustive average-radius check over all sets of `L + 1` distinct
/// codewords. The witness is the first violating set (in the order of sets
/// containing the zero codeword) with its plurality word.
pub fn is_avg_radius_list_decodable(
    code: &LinearCode,
    query: &ListDecQuery,
    budgets: &Budgets,
) -> Result<Certificate> {
    if query.mode != Mode::AverageRadius {
        return is_list_decodable(code, query, budgets);
    }
    let size = query.list_size + 1;
    check_budget(
        "average-radius subset enumeration",
        binomial(code.size(), size as u128),
        budgets.max_subsets as u128,
    )?;
    let table = code.codewords(budgets)?;
    let threshold = avg_threshold(code.n(), query.list_size, query.radius);
    let found = search::first_reaching(&table, code.field().order() as usize, size, threshold);
    let witness = found.map(|(_, set)| {
        let codewords: Vec<Word> = set.iter().map(|&i| table.get(i).to_vec()).collect();
        let received = PluralityProfile::of_words(&codewords)
            .expect("non-empty set")
            .witness();
        Witness { received, codewords }
    });
    Ok(Certificate {
        query: *query,
        verdict: if witness.is_some() { Verdict::Violated } else { Verdict::Decodable },
        witness,
        search: SearchSpace::Exhaustive,
    })
}

/// Dispatches on the query mode.
pub fn check(code: &LinearCode, query: &ListDecQuery, budgets: &Budgets) -> Result<Certificate> {
    match query.mode {
        Mode::Standard => is_list_decodable(code, query, budgets),
        Mode::AverageRadius => is_avg_radius_list_decodable(code, query, budgets),
    }
}

/// Re-checks a certificate against the code without the search path. A
/// violation witness is recomputed from its words; a decodable verdict from
/// an exhaustive search is confirmed by re-running the search.
pub fn verify_certificate(code: &LinearCode, cert: &Certificate, budgets: &Budgets) -> Result<bool> {
    let query = &cert.query;
    match (&cert.verdict, &cert.witness) {
        (Verdict::Violated, Some(w)) => Ok(witness_holds(code, query, w)),
        (Verdict::Violated, None) => Ok(false),
        (Verdict::Decodable, Some(_)) => Ok(false),
        (Verdict::Decodable, None) => match cert.search {
            SearchSpace::Exhaustive => Ok(check(code, query, budgets)?.is_decodable()),
            // a sampled search certifies nothing beyond the absence of a witness
            SearchSpace::Sampled { .. } => Ok(true),
        },
    }
}

fn witness_holds(code: &LinearCode, query: &ListDecQuery, w: &Witness) -> bool {
    let n = code.n();
    let q = code.field().order();
    if w.received.len() != n || w.received.iter().any(|&s| s as u32 >= q) {
        return false;
    }
    let mut distinct = w.codewords.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != w.codewords.len() || !w.codewords.iter().all(|c| code.contains(c)) {
        return false;
    }
    let dists: Vec<usize> = w
        .codewords
        .iter()
        .map(|c| c.iter().zip(&w.received).filter(|(a, b)| a != b).count())
        .collect();
    match query.mode {
        Mode::Standard => {
            w.codewords.len() > query.list_size && dists.iter().all(|&d| within(d, n, query.radius))
        }
        Mode::AverageRadius => {
            let total: u128 = dists.iter().map(|&d| d as u128).sum();
            let size = query.list_size as u128 + 1;
            w.codewords.len() as u128 == size
                && total * *query.radius.denom() as u128
                    <= *query.radius.numer() as u128 * n as u128 * size
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub list_size: usize,
    /// Largest `m` such that the code is `(m/n, list_size)` decodable.
    pub standard_errors: usize,
    pub standard: Ratio<u64>,
    pub average_errors: usize,
    pub average: Ratio<u64>,
}

/// Largest decodable radius `m/n` for each list size `1..=max_list`, in both modes.
pub fn decoding_radius_profile(code: &LinearCode, max_list: usize, budgets: &Budgets) -> Result<Vec<ProfileRow>> {
    if max_list == 0 {
        return Err(invalid("profile needs a list size of at least 1"));
    }
    let space = check_standard_budget(code, budgets)?;
    for l in 1..=max_list {
        check_budget(
            "average-radius subset enumeration",
            binomial(code.size(), l as u128 + 1),
            budgets.max_subsets as u128,
        )?;
    }
    let table = code.codewords(budgets)?;
    let q = code.field().order() as usize;
    let n = code.n();
    let total = table.len();

    // For each list size l, the smallest (l+1)-th nearest codeword distance over all z.
    let standard_min: Vec<usize> = (0..space)
        .into_par_iter()
        .fold(
            || vec![usize::MAX; max_list],
            |mut acc, idx| {
                let z = digits(idx as usize, q, n);
                let mut hist = vec![0usize; n + 1];
                for c in table.iter() {
                    hist[c.iter().zip(&z).filter(|(a, b)| a != b).count()] += 1;
                }
                let mut cumulative = 0;
                let mut l = 1;
                for (d, &h) in hist.iter().enumerate() {
                    cumulative += h;
                    while l <= max_list && cumulative > l {
                        acc[l - 1] = acc[l - 1].min(d);
                        l += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![usize::MAX; max_list],
            |a, b| a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect(),
        );

    (1..=max_list)
        .map(|l| {
            let standard_errors = if l >= total { n } else { standard_min[l - 1] - 1 };
            let average_errors = match search::max_mass(&table, q, l + 1) {
                None => n,
                Some((mass, _)) => n - (mass as usize / (l + 1)) - 1,
            };
            Ok(ProfileRow {
                list_size: l,
                standard_errors,
                standard: Ratio::new(standard_errors as u64, n as u64),
                average_errors,
                average: Ratio::new(average_errors as u64, n as u64),
            })
        })
        .collect()
}
