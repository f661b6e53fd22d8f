//! Linear codes given by a generator matrix over a small finite field.
//!
//! A code is the row space of a `k x n` generator `G`; the codeword of a
//! message `x` is `x^T G`. Constructors cover Reed-Solomon codes in the monomial
//! basis, Hadamard codes, and the two ways of drawing a shorter code from a
//! parent: sampling columns with replacement and puncturing (without
//! replacement). Duplicate columns are allowed everywhere; rank and distance
//! are always computed from the actual matrix.

use num_rational::Ratio;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Budgets;
use crate::error::{check_budget, invalid, Error, Result};
use crate::galois::{Field, Symbol};
use crate::rng::{self, streams};

pub type Word = Vec<Symbol>;

/// Where a generator matrix came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Rs {
        evals: Vec<Symbol>,
    },
    Hadamard,
    Explicit,
    /// Columns drawn independently with replacement from `parent`.
    Sampled {
        parent: String,
        seed: u64,
        columns: Vec<usize>,
    },
    /// Distinct columns drawn without replacement from `parent`.
    Punctured {
        parent: String,
        seed: u64,
        columns: Vec<usize>,
    },
}

/// Evaluation points of a Reed-Solomon code. Repeats are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationSet {
    points: Vec<Symbol>,
}

impl EvaluationSet {
    pub fn new(field: &Field, points: Vec<Symbol>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("evaluation set must be non-empty"));
        }
        if let Some(&p) = points.iter().find(|&&p| !field.contains(p as u32)) {
            return Err(Error::ElementOutOfRange {
                value: p as u32,
                order: field.order(),
            });
        }
        Ok(EvaluationSet { points })
    }

    /// Every field element once, in canonical order.
    pub fn full(field: &Field) -> Self {
        EvaluationSet {
            points: field.elements().collect(),
        }
    }

    /// `n` points drawn uniformly with replacement.
    pub fn random_with_replacement(field: &Field, n: usize, seed: u64) -> Result<Self> {
        let mut rng = rng::rng_from_seed(seed);
        let q = field.order();
        Self::new(field, (0..n).map(|_| rng.random_range(0..q) as Symbol).collect())
    }

    /// `n` distinct points drawn uniformly.
    pub fn random_distinct(field: &Field, n: usize, seed: u64) -> Result<Self> {
        let q = field.order() as usize;
        if n > q {
            return Err(invalid(format!("cannot pick {n} distinct points from GF({q})")));
        }
        let mut rng = rng::rng_from_seed(seed);
        Self::new(field, index::sample(&mut rng, q, n).into_iter().map(|p| p as Symbol).collect())
    }

    pub fn points(&self) -> &[Symbol] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A linear code over `GF(q)` with generator `G in F_q^{k x n}`.
#[derive(Clone, Debug)]
pub struct LinearCode {
    field: Field,
    k: usize,
    n: usize,
    generator: Vec<Symbol>,
    rank: usize,
    // Reduced row-echelon basis of the row space, `rank x n`.
    basis: Vec<Symbol>,
    provenance: Provenance,
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.k == other.k
            && self.n == other.n
            && self.generator == other.generator
            && self.provenance == other.provenance
    }
}

impl LinearCode {
    /// Builds a code from a row-major `k x n` generator.
    pub fn new(
        field: Field,
        k: usize,
        n: usize,
        generator: Vec<Symbol>,
        provenance: Provenance,
    ) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(invalid("generator must have k >= 1 rows and n >= 1 columns"));
        }
        if generator.len() != k * n {
            return Err(Error::DimensionMismatch {
                expected: k * n,
                actual: generator.len(),
            });
        }
        if let Some(&v) = generator.iter().find(|&&v| !field.contains(v as u32)) {
            return Err(Error::ElementOutOfRange {
                value: v as u32,
                order: field.order(),
            });
        }
        let (rank, basis) = row_reduce(&field, &generator, k, n);
        Ok(LinearCode {
            field,
            k,
            n,
            generator,
            rank,
            basis,
            provenance,
        })
    }

    pub fn from_rows(field: Field, rows: &[Vec<Symbol>]) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("generator rows have unequal lengths"));
        }
        Self::new(field, k, n, rows.concat(), Provenance::Explicit)
    }

    /// Builds a code from its columns (each of length `k`).
    pub fn from_columns(
        field: Field,
        k: usize,
        columns: &[Vec<Symbol>],
        provenance: Provenance,
    ) -> Result<Self> {
        let n = columns.len();
        let mut generator = vec![0; k * n];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    actual: col.len(),
                });
            }
            for (i, &v) in col.iter().enumerate() {
                generator[i * n + j] = v;
            }
        }
        Self::new(field, k, n, generator, provenance)
    }

    /// Reed-Solomon code: message `(f_0, ..., f_{k-1})` is the polynomial
    /// `sum f_i x^i`, and its codeword is its evaluation at each point.
    pub fn reed_solomon(field: &Field, k: usize, evals: &EvaluationSet) -> Result<Self> {
        if k == 0 {
            return Err(invalid("Reed-Solomon dimension must be at least 1"));
        }
        if k as u64 > field.order() as u64 {
            return Err(invalid(format!(
                "Reed-Solomon k = {k} exceeds field size {}",
                field.order()
            )));
        }
        let n = evals.len();
        let mut generator = vec![0; k * n];
        for (j, &alpha) in evals.points().iter().enumerate() {
            let mut power: Symbol = 1;
            for i in 0..k {
                generator[i * n + j] = power;
                power = field.mul(power, alpha);
            }
        }
        Self::new(
            field.clone(),
            k,
            n,
            generator,
            Provenance::Rs {
                evals: evals.points().to_vec(),
            },
        )
    }

    /// Hadamard code: the columns enumerate `F_q^k` in canonical order, first
    /// row most significant.
    pub fn hadamard(field: &Field, k: usize, budgets: &Budgets) -> Result<Self> {
        if k == 0 {
            return Err(invalid("Hadamard dimension must be at least 1"));
        }
        let q = field.order() as u128;
        let n = q.checked_pow(k as u32).unwrap_or(u128::MAX);
        check_budget("Hadamard columns", n, budgets.max_hadamard_columns as u128)?;
        let n = n as usize;
        let mut generator = vec![0; k * n];
        for col in 0..n {
            let mut rest = col;
            for i in (0..k).rev() {
                generator[i * n + col] = (rest % q as usize) as Symbol;
                rest /= q as usize;
            }
        }
        Self::new(field.clone(), k, n, generator, Provenance::Hadamard)
    }

    /// Randomly sampled version: `n` columns chosen independently and uniformly
    /// with replacement.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("sampled block length must be at least 1"));
        }
        let mut rng = rng::rng_from_seed(seed);
        let columns: Vec<usize> = (0..n).map(|_| rng.random_range(0..self.n)).collect();
        self.select_columns(
            &columns,
            Provenance::Sampled {
                parent: self.describe(),
                seed,
                columns: columns.clone(),
            },
        )
    }

    /// Randomly punctured version: `n` distinct columns chosen uniformly.
    pub fn puncture(&self, n: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > self.n {
            return Err(invalid(format!(
                "punctured length {n} must lie in [1, {}]",
                self.n
            )));
        }
        let mut rng = rng::rng_from_seed(seed);
        let columns = index::sample(&mut rng, self.n, n).into_vec();
        self.select_columns(
            &columns,
            Provenance::Punctured {
                parent: self.describe(),
                seed,
                columns: columns.clone(),
            },
        )
    }

    fn select_columns(&self, columns: &[usize], provenance: Provenance) -> Result<Self> {
        let n = columns.len();
        let mut generator = vec![0; self.k * n];
        for i in 0..self.k {
            let row = &self.generator[i * self.n..(i + 1) * self.n];
            for (j, &c) in columns.iter().enumerate() {
                generator[i * n + j] = row[c];
            }
        }
        Self::new(self.field.clone(), self.k, n, generator, provenance)
    }

    /// Short human-readable descriptor used as the parent tag of derived codes.
    pub fn describe(&self) -> String {
        let q = self.field.order();
        let (k, n) = (self.k, self.n);
        match &self.provenance {
            Provenance::Rs { .. } => format!("rs(q={q},k={k},n={n})"),
            Provenance::Hadamard => format!("hadamard(q={q},k={k})"),
            Provenance::Explicit => format!("explicit(q={q},k={k},n={n})"),
            Provenance::Sampled { parent, seed, .. } => {
                format!("sampled({parent},n={n},seed={seed})")
            }
            Provenance::Punctured { parent, seed, .. } => {
                format!("punctured({parent},n={n},seed={seed})")
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Message length (number of generator rows).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator(&self) -> &[Symbol] {
        &self.generator
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn row(&self, i: usize) -> &[Symbol] {
        &self.generator[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Word {
        (0..self.k).map(|i| self.generator[i * self.n + j]).collect()
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.rank as u64, self.n as u64)
    }

    /// Number of distinct codewords `q^rank`, saturating.
    pub fn size(&self) -> u128 {
        (self.field.order() as u128)
            .checked_pow(self.rank as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn message_count(&self) -> u128 {
        (self.field.order() as u128)
            .checked_pow(self.k as u32)
            .unwrap_or(u128::MAX)
    }

    /// The message with the given index in base `q`, first coordinate most significant.
    pub fn message_from_index(&self, index: u64) -> Word {
        let q = self.field.order() as u64;
        let mut msg = vec![0; self.k];
        let mut rest = index;
        for slot in msg.iter_mut().rev() {
            *slot = (rest % q) as Symbol;
            rest /= q;
        }
        msg
    }

    pub fn encode(&self, message: &[Symbol]) -> Result<Word> {
        if message.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: message.len(),
            });
        }
        if let Some(&v) = message.iter().find(|&&v| !self.field.contains(v as u32)) {
            return Err(Error::ElementOutOfRange {
                value: v as u32,
                order: self.field.order(),
            });
        }
        let mut out = vec![0; self.n];
        self.encode_into(message, &mut out);
        Ok(out)
    }

    /// Unchecked encoding into a caller buffer of length `n`.
    pub fn encode_into(&self, message: &[Symbol], out: &mut [Symbol]) {
        combine_rows(&self.field, &self.generator, self.n, message, out);
    }

    /// The codeword with the given index in the enumeration order of
    /// [`LinearCode::codewords`]; indices range over `q^rank`.
    pub fn codeword(&self, index: u64) -> Word {
        let coeffs = digits(index as usize, self.field.order() as usize, self.rank);
        let mut out = vec![0; self.n];
        combine_rows(&self.field, &self.basis, self.n, &coeffs, &mut out);
        out
    }

    /// Enumerates the `q^rank` distinct codewords.
    pub fn codewords(&self, budgets: &Budgets) -> Result<CodewordTable> {
        check_budget("codeword enumeration", self.size(), budgets.max_codewords as u128)?;
        let count = self.size() as usize;
        let mut words = vec![0; count * self.n];
        let q = self.field.order() as usize;
        words
            .par_chunks_mut(self.n.max(1))
            .enumerate()
            .for_each(|(idx, out)| {
                let coeffs = digits(idx, q, self.rank);
                combine_rows(&self.field, &self.basis, self.n, &coeffs, out);
            });
        Ok(CodewordTable { n: self.n, words })
    }

    /// Exact relative minimum distance, by enumerating every nonzero codeword.
    pub fn min_distance_exact(&self, budgets: &Budgets) -> Result<Ratio<u64>> {
        if self.rank == 0 {
            return Err(Error::DegenerateCode);
        }
        check_budget("minimum distance enumeration", self.size(), budgets.max_codewords as u128)?;
        let count = self.size() as usize;
        let q = self.field.order() as usize;
        let min_weight = (1..count)
            .into_par_iter()
            .map_init(
                || vec![0; self.n],
                |buf, idx| {
                    let coeffs = digits(idx, q, self.rank);
                    combine_rows(&self.field, &self.basis, self.n, &coeffs, buf);
                    buf.iter().filter(|&&s| s != 0).count()
                },
            )
            .min()
            .expect("rank >= 1 gives a nonzero codeword");
        Ok(Ratio::new(min_weight as u64, self.n as u64))
    }

    /// Row-space membership, decided by a rank comparison.
    pub fn contains(&self, word: &[Symbol]) -> bool {
        if word.len() != self.n || word.iter().any(|&s| !self.field.contains(s as u32)) {
            return false;
        }
        let mut rows = self.basis.clone();
        rows.extend_from_slice(word);
        row_reduce(&self.field, &rows, self.rank + 1, self.n).0 == self.rank
    }
}

/// Base-`q` digits of `idx`, most significant first.
pub(crate) fn digits(mut idx: usize, q: usize, len: usize) -> Vec<Symbol> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (idx % q) as Symbol;
        idx /= q;
    }
    out
}

fn combine_rows(field: &Field, rows: &[Symbol], n: usize, coeffs: &[Symbol], out: &mut [Symbol]) {
    out.iter_mut().for_each(|s| *s = 0);
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let row = &rows[i * n..(i + 1) * n];
        for (o, &g) in out.iter_mut().zip(row) {
            *o = field.add(*o, field.mul(c, g));
        }
    }
}

/// Gauss-Jordan elimination; returns the rank and the nonzero rows of the
/// reduced echelon form.
fn row_reduce(field: &Field, matrix: &[Symbol], rows: usize, cols: usize) -> (usize, Vec<Symbol>) {
    let mut m = matrix.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
            continue;
        };
        if pivot != rank {
            for c in 0..cols {
                m.swap(pivot * cols + c, rank * cols + c);
            }
        }
        let inv = field.inv(m[rank * cols + col]).expect("pivot is nonzero");
        for c in 0..cols {
            m[rank * cols + c] = field.mul(m[rank * cols + c], inv);
        }
        for r in 0..rows {
            if r == rank {
                continue;
            }
            let factor = m[r * cols + col];
            if factor == 0 {
                continue;
            }
            for c in 0..cols {
                let sub = field.mul(factor, m[rank * cols + c]);
                m[r * cols + c] = field.sub(m[r * cols + c], sub);
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    m.truncate(rank * cols);
    (rank, m)
}

/// All codewords of a code, stored contiguously.
#[derive(Clone, Debug)]
pub struct CodewordTable {
    n: usize,
    words: Vec<Symbol>,
}

impl CodewordTable {
    pub fn len(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.words.len() / self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize) -> &[Symbol] {
        &self.words[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Symbol]> + '_ {
        self.words.chunks(self.n)
    }
}

/// A randomized construction producing codes with independent (or, for
/// puncturing, exchangeable) symbols.
#[derive(Clone, Debug)]
pub enum CodeFamily {
    Sampled { parent: LinearCode, n: usize },
    Punctured { parent: LinearCode, n: usize },
}

impl CodeFamily {
    pub fn parent(&self) -> &LinearCode {
        match self {
            CodeFamily::Sampled { parent, .. } | CodeFamily::Punctured { parent, .. } => parent,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CodeFamily::Sampled { n, .. } | CodeFamily::Punctured { n, .. } => *n,
        }
    }

    /// Whether generator columns are drawn independently.
    pub fn has_independent_symbols(&self) -> bool {
        matches!(self, CodeFamily::Sampled { .. })
    }

    pub fn draw(&self, seed: u64) -> Result<LinearCode> {
        match self {
            CodeFamily::Sampled { parent, n } => parent.sample(*n, seed),
            CodeFamily::Punctured { parent, n } => parent.puncture(*n, seed),
        }
    }

    /// The `index`-th code of the draw stream rooted at `seed`.
    pub fn draw_indexed(&self, seed: u64, index: u64) -> Result<LinearCode> {
        self.draw(rng::derive_seed(seed, streams::CODE_DRAW, index))
    }

    pub fn describe(&self) -> String {
        match self {
            CodeFamily::Sampled { parent, n } => format!("sampled({},n={n})", parent.describe()),
            CodeFamily::Punctured { parent, n } => format!("punctured({},n={n})", parent.describe()),
        }
    }
}

/// JSON document form of a code:
/// `{field: {q, poly?}, k, n, generator: [row-major], provenance}`.
#[derive(Serialize, Deserialize)]
struct CodeDocument {
    field: Field,
    k: usize,
    n: usize,
    generator: Vec<Symbol>,
    provenance: Provenance,
}

impl Serialize for LinearCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CodeDocument {
            field: self.field.clone(),
            k: self.k,
            n: self.n,
            generator: self.generator.clone(),
            provenance: self.provenance.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = CodeDocument::deserialize(d)?;
        LinearCode::new(doc.field, doc.k, doc.n, doc.generator, doc.provenance)
            .map_err(serde::de::Error::custom)
    }
}
