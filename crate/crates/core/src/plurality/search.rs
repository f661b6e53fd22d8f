//! Exhaustive search over fixed-size sets of codewords.
//!
//! The quantity of interest for a set `S` is its plurality mass
//! `sum_j max_α |{c in S : c_j = α}|`. Translating every member of `S` by a
//! fixed codeword permutes the symbols of each coordinate, so the mass is
//! translation invariant and every set has a translate containing the zero
//! codeword. The walkers therefore enumerate only sets that contain index 0 of
//! the codeword table (the zero word), in lexicographic order, and fan out in
//! parallel over the second member.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::linear_code::CodewordTable;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step
        match acc.checked_mul(n - i) {
            Some(v) => acc = v / (i + 1),
            None => return u128::MAX,
        }
    }
    acc
}

trait Visitor {
    fn prune(&self, sum: u64, remaining: usize, n: usize) -> bool;
    /// Returns true to stop the walk.
    fn leaf(&mut self, chosen: &[usize], sum: u64) -> bool;
}

struct Walker<'a> {
    table: &'a CodewordTable,
    q: usize,
    n: usize,
    size: usize,
    counts: Vec<u32>,
    // maxes[d * n + j] is the plurality count at coordinate j of the first d members
    maxes: Vec<u32>,
    chosen: Vec<usize>,
}

impl<'a> Walker<'a> {
    fn new(table: &'a CodewordTable, q: usize, size: usize) -> Self {
        let n = table.n();
        Walker {
            table,
            q,
            n,
            size,
            counts: vec![0; n * q],
            maxes: vec![0; (size + 1) * n],
            chosen: Vec::with_capacity(size),
        }
    }

    fn push(&mut self, i: usize) -> u64 {
        let d = self.chosen.len();
        let word = self.table.get(i);
        let mut delta = 0;
        for (j, &s) in word.iter().enumerate() {
            let c = &mut self.counts[j * self.q + s as usize];
            *c += 1;
            let old = self.maxes[d * self.n + j];
            let new = old.max(*c);
            self.maxes[(d + 1) * self.n + j] = new;
            delta += (new - old) as u64;
        }
        self.chosen.push(i);
        delta
    }

    fn pop(&mut self) {
        let i = self.chosen.pop().expect("pop on empty walker");
        for (j, &s) in self.table.get(i).iter().enumerate() {
            self.counts[j * self.q + s as usize] -= 1;
        }
    }

    fn dfs<V: Visitor>(&mut self, start: usize, sum: u64, visitor: &mut V) -> bool {
        let d = self.chosen.len();
        if d == self.size {
            return visitor.leaf(&self.chosen, sum);
        }
        let remaining = self.size - d;
        let total = self.table.len();
        for i in start..=total - remaining {
            if visitor.prune(sum, remaining, self.n) {
                return false;
            }
            let delta = self.push(i);
            let stop = self.dfs(i + 1, sum + delta, visitor);
            self.pop();
            if stop {
                return true;
            }
        }
        false
    }

    /// Walks every set containing `0` and `second`, with all other members
    /// above `second`.
    fn run_from<V: Visitor>(&mut self, second: usize, visitor: &mut V) {
        let base = self.push(0);
        let s = base + self.push(second);
        self.dfs(second + 1, s, visitor);
        self.pop();
        self.pop();
    }
}

struct MaxVisitor<'a> {
    best: Option<(u64, Vec<usize>)>,
    global: &'a AtomicU64,
}

impl Visitor for MaxVisitor<'_> {
    fn prune(&self, sum: u64, remaining: usize, n: usize) -> bool {
        let bound = sum + (remaining * n) as u64;
        // Strict comparisons keep every maximizer reachable, so the reported
        // witness does not depend on thread scheduling.
        let local = self.best.as_ref().is_some_and(|(b, _)| bound <= *b);
        local || bound < self.global.load(Ordering::Relaxed)
    }

    fn leaf(&mut self, chosen: &[usize], sum: u64) -> bool {
        if self.best.as_ref().is_none_or(|(b, _)| sum > *b) {
            self.best = Some((sum, chosen.to_vec()));
            self.global.fetch_max(sum, Ordering::Relaxed);
        }
        false
    }
}

struct ThresholdVisitor {
    threshold: u64,
    found: Option<(u64, Vec<usize>)>,
}

impl Visitor for ThresholdVisitor {
    fn prune(&self, sum: u64, remaining: usize, n: usize) -> bool {
        sum + ((remaining * n) as u64) < self.threshold
    }

    fn leaf(&mut self, chosen: &[usize], sum: u64) -> bool {
        if sum >= self.threshold {
            self.found = Some((sum, chosen.to_vec()));
            true
        } else {
            false
        }
    }
}

/// Largest plurality mass over sets of `size` distinct codewords, with the
/// lexicographically first maximizing set among those containing the zero
/// codeword. `None` if the table has fewer than `size` words.
pub(crate) fn max_mass(table: &CodewordTable, q: usize, size: usize) -> Option<(u64, Vec<usize>)> {
    let total = table.len();
    if size == 0 || size > total {
        return None;
    }
    if size == 1 {
        return Some((table.n() as u64, vec![0]));
    }
    let global = AtomicU64::new(0);
    let results: Vec<Option<(u64, Vec<usize>)>> = (1..=total - (size - 1))
        .into_par_iter()
        .map_init(
            || Walker::new(table, q, size),
            |walker, second| {
                let mut visitor = MaxVisitor {
                    best: None,
                    global: &global,
                };
                walker.run_from(second, &mut visitor);
                visitor.best
            },
        )
        .collect();
    results
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(u64, Vec<usize>)>, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        })
}

/// The lexicographically first set of `size` codewords containing the zero
/// codeword whose plurality mass is at least `threshold`.
pub(crate) fn first_reaching(
    table: &CodewordTable,
    q: usize,
    size: usize,
    threshold: u64,
) -> Option<(u64, Vec<usize>)> {
    let total = table.len();
    if size == 0 || size > total {
        return None;
    }
    if size == 1 {
        let n = table.n() as u64;
        return (n >= threshold).then(|| (n, vec![0]));
    }
    (1..=total - (size - 1))
        .into_par_iter()
        .map_init(
            || Walker::new(table, q, size),
            |walker, second| {
                let mut visitor = ThresholdVisitor {
                    threshold,
                    found: None,
                };
                walker.run_from(second, &mut visitor);
                visitor.found
            },
        )
        .find_first(Option::is_some)
        .flatten()
}
