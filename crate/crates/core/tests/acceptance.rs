//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use listdec::bounds::{johnson_radius_gs, johnson_radius_ms, johnson_rhs_gs, johnson_rhs_ms};
use listdec::chaining::{build_nets, gaussian_process_sample, symmetrization_check, ChainParams, ProcessIndex};
use listdec::config::{Budgets, Config};
use listdec::galois::{Field, Symbol};
use listdec::harness::experiments::{experiment_beyond_johnson, ProfileTableRow};
use listdec::linear_code::{CodeFamily, EvaluationSet, LinearCode};
use listdec::oracle::{self, ListDecQuery, Mode, SearchSpace};
use listdec::plurality::{max_agreement_sum, MessageSet};
use num_rational::Ratio;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ---------- independent oracles ----------

fn all_words(q: usize, n: usize) -> Vec<Vec<Symbol>> {
    let mut out = Vec::with_capacity(q.pow(n as u32));
    for mut idx in 0..q.pow(n as u32) {
        let mut w = vec![0; n];
        for s in w.iter_mut() {
            *s = (idx % q) as Symbol;
            idx /= q;
        }
        out.push(w);
    }
    out
}

fn dist(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn agr(a: &[Symbol], b: &[Symbol]) -> usize {
    a.len() - dist(a, b)
}

/// Span of the rows over a prime field, with modular arithmetic done here.
fn prime_span(rows: &[Vec<Symbol>], p: usize) -> Vec<Vec<Symbol>> {
    let n = rows[0].len();
    let mut set = BTreeSet::new();
    for coeffs in all_words(p, rows.len()) {
        let w: Vec<Symbol> = (0..n)
            .map(|j| (rows.iter().zip(&coeffs).map(|(r, &c)| r[j] as usize * c as usize).sum::<usize>() % p) as Symbol)
            .collect();
        set.insert(w);
    }
    set.into_iter().collect()
}

/// Distinct codewords by encoding every message.
fn distinct_codewords(code: &LinearCode) -> Vec<Vec<Symbol>> {
    let set: BTreeSet<Vec<Symbol>> = (0..code.message_count() as u64).map(|i| code.codeword(i)).collect();
    set.into_iter().collect()
}

fn plurality_counts(words: &[&Vec<Symbol>], q: usize) -> Vec<u32> {
    let n = words[0].len();
    (0..n)
        .map(|j| {
            let mut c = vec![0u32; q];
            for w in words {
                c[w[j] as usize] += 1;
            }
            *c.iter().max().unwrap()
        })
        .collect()
}

fn subsets(m: usize, size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, m: usize, size: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        for i in start..m {
            if m - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, size, cur, f);
            cur.pop();
        }
    }
    rec(0, m, size, &mut Vec::new(), f);
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn random_rows(r: &mut StdRng, q: u32, k: usize, n: usize) -> Vec<Vec<Symbol>> {
    (0..k).map(|_| (0..n).map(|_| r.random_range(0..q) as Symbol).collect()).collect()
}

// ---------- criteria ----------

type Outcome = (bool, String);

fn johnson_soundness() -> Outcome {
    let mut r = StdRng::seed_from_u64(1);
    let mut violations = 0u64;
    let mut checks = 0u64;
    let codes = 210;
    for c in 0..codes {
        let q = [2usize, 3, 5][c % 3];
        let n = r.random_range(1..=4usize);
        let rows = random_rows(&mut r, q as u32, 2, n);
        let words = prime_span(&rows, q);
        let zs = all_words(q, n);
        let agreements: Vec<Vec<usize>> = words.iter().map(|w| zs.iter().map(|z| agr(w, z)).collect()).collect();
        for size in 1..=4.min(words.len()) {
            subsets(words.len(), size, &mut |s| {
                let mut pair_sum = 0.0;
                for &a in s {
                    for &b in s {
                        pair_sum += dist(&words[a], &words[b]) as f64 / n as f64;
                    }
                }
                let best = (0..zs.len())
                    .map(|z| s.iter().map(|&a| agreements[a][z]).sum::<usize>())
                    .max()
                    .unwrap() as f64;
                let ms = johnson_rhs_ms(n, size, pair_sum).unwrap();
                checks += 1;
                if best > ms + 1e-9 {
                    violations += 1;
                }
                for eps in [0.25, 0.5, 0.75] {
                    checks += 1;
                    if best > johnson_rhs_gs(n, q as u32, size, eps, pair_sum).unwrap() + 1e-9 {
                        violations += 1;
                    }
                }
            });
        }
    }
    (
        violations == 0,
        format!("{codes} codes, {checks} (set, bound) checks over all received words, {violations} violations"),
    )
}

struct Instance {
    code: LinearCode,
    set: MessageSet,
    q: usize,
    n: usize,
}

fn plurality_instances() -> Vec<Instance> {
    let mut r = StdRng::seed_from_u64(2);
    let mut out = Vec::new();
    while out.len() < 500 {
        let q = [2u32, 3, 4, 5, 7, 8][r.random_range(0..6)];
        let max_n = (12.0 / (q as f64).log2()).floor() as usize;
        let n = r.random_range(1..=max_n.min(8));
        let k = r.random_range(1..=3usize);
        let field = Field::from_order(q).unwrap();
        let code = LinearCode::from_rows(field, &random_rows(&mut r, q, k, n)).unwrap();
        let size = r.random_range(1..=5usize.min(code.message_count() as usize));
        let set = MessageSet::random(&code, size, r.random()).unwrap();
        out.push(Instance {
            code,
            set,
            q: q as usize,
            n,
        });
    }
    out
}

fn plurality_identity(instances: &[Instance]) -> Outcome {
    let mut matches = 0;
    for inst in instances {
        let words = inst.set.encode(&inst.code).unwrap();
        let brute = all_words(inst.q, inst.n)
            .iter()
            .map(|z| words.iter().map(|w| agr(w, z)).sum::<usize>())
            .max()
            .unwrap() as u64;
        if max_agreement_sum(&inst.code, &inst.set).unwrap().value == brute {
            matches += 1;
        }
    }
    (matches == instances.len(), format!("{matches}/{} exact matches", instances.len()))
}

fn proposition_soundness(instances: &[Instance]) -> Outcome {
    let budgets = Budgets::default();
    let mut checked = 0;
    let mut counterexamples = 0;
    let mut skipped = 0;
    for inst in instances {
        let l = inst.set.len();
        if l < 2 {
            continue;
        }
        let words = distinct_codewords(&inst.code);
        if words.len() < l || binom(words.len(), l) > 200_000 {
            skipped += 1;
            continue;
        }
        // max over sets of L distinct codewords of the total plurality count
        let mut best = 0u64;
        subsets(words.len(), l, &mut |s| {
            let chosen: Vec<&Vec<Symbol>> = s.iter().map(|&i| &words[i]).collect();
            best = best.max(plurality_counts(&chosen, inst.q).iter().map(|&c| c as u64).sum());
        });
        let (q, n) = (inst.q as u64, inst.n as u64);
        for a in 1..=4u64 {
            // eps = a/8 with radius 1 - 1/q - eps >= 0
            if 8 * q < 8 + a * q {
                continue;
            }
            // threshold n L (eps + 1/q) not met: best < n L (a q + 8) / (8 q)
            if best * 8 * q >= n * l as u64 * (a * q + 8) {
                continue;
            }
            let radius = Ratio::new(8 * q - 8 - a * q, 8 * q);
            let query = ListDecQuery::new(radius, l - 1, Mode::Standard).unwrap();
            let cert = oracle::is_list_decodable(&inst.code, &query, &budgets).unwrap();
            // cross-check by direct counting
            let direct = all_words(inst.q, inst.n).iter().all(|z| {
                words
                    .iter()
                    .filter(|w| dist(w, z) as u64 * *radius.denom() <= *radius.numer() * n)
                    .count()
                    < l
            });
            checked += 1;
            if !cert.is_decodable() || !direct {
                counterexamples += 1;
            }
        }
    }
    (
        counterexamples == 0 && checked > 0,
        format!("{checked} (instance, eps) pairs below threshold, {counterexamples} counterexamples, {skipped} instances too large to enumerate"),
    )
}

fn rs_distance() -> Outcome {
    let mut r = StdRng::seed_from_u64(4);
    let budgets = Budgets::default();
    let mut ok = 0;
    let total = 100;
    for i in 0..total {
        let q = [5usize, 7][i % 2];
        let k = [2usize, 3][(i / 2) % 2];
        let n = r.random_range(k..=q);
        let field = Field::from_order(q as u32).unwrap();
        let evals = EvaluationSet::random_distinct(&field, n, r.random()).unwrap();
        let code = LinearCode::reed_solomon(&field, k, &evals).unwrap();
        let expected = Ratio::new((n - k + 1) as u64, n as u64);
        // brute minimum weight over nonzero polynomials of degree < k
        let brute = all_words(q, k)
            .into_iter()
            .filter(|c| c.iter().any(|&x| x != 0))
            .map(|c| {
                evals
                    .points()
                    .iter()
                    .filter(|&&x| {
                        let v = c.iter().rev().fold(0usize, |acc, &ci| (acc * x as usize + ci as usize) % q);
                        v != 0
                    })
                    .count()
            })
            .min()
            .unwrap();
        if code.min_distance_exact(&budgets).unwrap() == expected && Ratio::new(brute as u64, n as u64) == expected {
            ok += 1;
        }
    }
    (ok == total, format!("{ok}/{total} codes at distance exactly 1 - (k-1)/n"))
}

/// Checks a violation witness using only the code's distinct codewords.
fn witness_holds(words: &BTreeSet<Vec<Symbol>>, n: usize, query: &ListDecQuery, cert: &oracle::Certificate) -> bool {
    let Some(w) = &cert.witness else { return false };
    let distinct: BTreeSet<&Vec<Symbol>> = w.codewords.iter().collect();
    if distinct.len() != w.codewords.len() || !w.codewords.iter().all(|c| words.contains(c)) {
        return false;
    }
    let (num, den) = (*query.radius().numer() as u128, *query.radius().denom() as u128);
    let dists: Vec<u128> = w.codewords.iter().map(|c| dist(c, &w.received) as u128).collect();
    match query.mode() {
        Mode::Standard => w.codewords.len() > query.list_size() && dists.iter().all(|&d| d * den <= num * n as u128),
        Mode::AverageRadius => {
            w.codewords.len() == query.list_size() + 1
                && dists.iter().sum::<u128>() * den <= num * n as u128 * (query.list_size() as u128 + 1)
        }
    }
}

fn oracle_consistency() -> Outcome {
    let mut r = StdRng::seed_from_u64(5);
    let budgets = Budgets::default();
    let mut failures = Vec::new();
    let mut violations = 0;
    let total = 200;
    for i in 0..total {
        let q = [2u32, 3, 4, 5][i % 4];
        let k = r.random_range(1..=if q <= 3 { 3 } else { 2 });
        let max_n = if q == 2 { 6 } else if q == 3 { 5 } else { 4 };
        let n = r.random_range(2..=max_n);
        let code = LinearCode::from_rows(Field::from_order(q).unwrap(), &random_rows(&mut r, q, k, n)).unwrap();
        let words: BTreeSet<Vec<Symbol>> = distinct_codewords(&code).into_iter().collect();
        let wv: Vec<&Vec<Symbol>> = words.iter().collect();
        let l = r.random_range(1..=3usize);
        let den = ((l + 1) * n) as u64;
        let radius = Ratio::new(r.random_range(0..=den), den);
        let avg_q = ListDecQuery::new(radius, l, Mode::AverageRadius).unwrap();
        let std_q = ListDecQuery::new(radius, l, Mode::Standard).unwrap();
        let avg = oracle::check(&code, &avg_q, &budgets).unwrap();
        let std = oracle::check(&code, &std_q, &budgets).unwrap();
        let (num, dn) = (*radius.numer() as usize, *radius.denom() as usize);

        // independent standard verdict
        let std_direct = all_words(q as usize, n)
            .iter()
            .all(|z| wv.iter().filter(|w| dist(w, z) * dn <= num * n).count() <= l);
        // independent average verdict: every (L+1)-set has total plurality count
        // (= max total agreement) below (L+1) n (1 - rho)
        let mut avg_direct = true;
        if wv.len() > l {
            subsets(wv.len(), l + 1, &mut |s| {
                let chosen: Vec<&Vec<Symbol>> = s.iter().map(|&i| wv[i]).collect();
                let total: usize = plurality_counts(&chosen, q as usize).iter().map(|&c| c as usize).sum();
                // total < (L+1) n (1 - num/den)  <=>  total * den < (L+1) n (den - num)
                if total * dn >= (l + 1) * n * (dn - num) {
                    avg_direct = false;
                }
            });
        }
        let mut ok = avg.is_decodable() == avg_direct && std.is_decodable() == std_direct;
        ok &= !avg.is_decodable() || std.is_decodable();
        for (cert, query) in [(&avg, &avg_q), (&std, &std_q)] {
            if !cert.is_decodable() {
                violations += 1;
                ok &= witness_holds(&words, n, query, cert);
                ok &= oracle::verify_certificate(&code, cert, &budgets).unwrap();
            }
            ok &= cert.search == SearchSpace::Exhaustive;
        }
        if !ok {
            failures.push(i);
        }
    }
    (
        failures.is_empty(),
        format!(
            "{total} instances, {violations} violation certificates re-verified, failures at {:?}",
            failures
        ),
    )
}

fn chain_nets() -> Outcome {
    let field = Field::from_order(3).unwrap();
    let code = LinearCode::hadamard(&field, 5, &Budgets::default()).unwrap();
    let cfg = Config::default();
    let params = ChainParams::new(64, &cfg).unwrap().with_t_max(3);
    let eta = params.eta;
    let log_l = 6.0f64;
    let mut accepted = 0;
    let mut total_accepted = 0;
    let mut runs = 0u64;
    let mut problems = Vec::new();
    let mut c4_max = 0.0f64;
    // per level: (successes, attempts)
    let mut retry = [(0u64, 0u64); 3];
    while accepted < 100 || runs < 200 {
        let seed = runs;
        runs += 1;
        let set = MessageSet::random(&code, 64, 1_000_000 + seed).unwrap();
        let build = build_nets(&code, &set, &params, seed).unwrap();
        for lvl in build.levels.iter().skip(1) {
            if runs <= 200 {
                retry[lvl.t - 1].0 += 1;
                retry[lvl.t - 1].1 += lvl.attempts as u64;
            }
        }
        if let Some(f) = &build.failure {
            if runs <= 200 {
                retry[f.level - 1].1 += f.attempts as u64;
            }
            continue;
        }
        total_accepted += 1;
        if accepted >= 100 {
            continue;
        }
        accepted += 1;
        let words = set.encode(&code).unwrap();
        let n = code.n();
        let pl_of = |members: &[usize]| -> Vec<f64> {
            let chosen: Vec<&Vec<Symbol>> = members.iter().map(|&i| &words[i]).collect();
            plurality_counts(&chosen, 3).iter().map(|&c| c as f64 / members.len() as f64).collect()
        };
        let pl0 = pl_of(&build.levels[0].members);
        let q_mass: f64 = pl0.iter().sum();
        let mut ok = build.levels.len() == 4 && build.levels[0].members == (0..64).collect::<Vec<_>>();
        for (t, lvl) in build.levels.iter().enumerate() {
            let pl = pl_of(&lvl.members);
            let s = lvl.members.len() as f64;
            let q_t = (1.0 + eta).powi(t as i32) * q_mass;
            let mass: f64 = lvl.heavy.iter().map(|&j| pl[j]).sum();
            ok &= mass <= q_t * (1.0 + 1e-9);
            ok &= s >= ((1.0 - eta) / 2.0).powi(t as i32) * 64.0 - 1e-9;
            ok &= s <= ((1.0 + eta) / 2.0).powi(t as i32) * 64.0 + 1e-9;
            if let Some(next) = build.levels.get(t + 1) {
                let nested = next.members.iter().all(|m| lvl.members.contains(m))
                    && next.heavy.iter().all(|j| lvl.heavy.contains(j));
                let expected_heavy: Vec<usize> = (0..n).filter(|&j| s * pl[j] >= params.gamma).collect();
                ok &= nested && next.heavy == expected_heavy;
                let pl_next = pl_of(&next.members);
                let mut d2 = 0.0;
                let mut dropped = 0.0;
                for &j in &lvl.heavy {
                    if next.heavy.contains(&j) {
                        d2 += (pl[j] - pl_next[j]).powi(2);
                    } else {
                        d2 += pl[j] * pl[j];
                        dropped += pl[j] * pl[j];
                    }
                }
                ok &= dropped.sqrt() <= (params.gamma * q_t / s).sqrt() * (1.0 + 1e-9);
                let c4 = d2.sqrt() / ((q_t * log_l).sqrt() / (eta * s.sqrt()));
                let step = lvl.step.as_ref().unwrap();
                ok &= (step.c4_min - c4).abs() <= 1e-9 * (1.0 + c4);
                ok &= step.distance <= step.width_bound * (1.0 + 1e-9);
                c4_max = c4_max.max(c4);
            }
        }
        ok &= build.postconditions_hold();
        if !ok {
            problems.push(seed);
        }
    }
    let mut rates_ok = true;
    let mut rates = Vec::new();
    for (t, &(succ, att)) in retry.iter().enumerate() {
        let p = succ as f64 / att.max(1) as f64;
        let se = (p * (1.0 - p) / att.max(1) as f64).sqrt();
        rates_ok &= p >= 1.0 / 6.0 - 3.0 * se;
        rates.push(format!("level {}: {p:.3}", t + 1));
    }
    (
        problems.is_empty() && c4_max <= 50.0 && rates_ok,
        format!(
            "{accepted} accepted builds checked ({total_accepted} of {runs} runs accepted, t_max forced to 3), postcondition failures {problems:?}, max C4 {c4_max:.3}, retry success {}",
            rates.join(", ")
        ),
    )
}

fn symmetrization() -> Outcome {
    let budgets = Budgets::default();
    let f5 = Field::from_order(5).unwrap();
    let f7 = Field::from_order(7).unwrap();
    let parents = [
        LinearCode::reed_solomon(&f5, 2, &EvaluationSet::full(&f5)).unwrap(),
        LinearCode::reed_solomon(&f7, 2, &EvaluationSet::full(&f7)).unwrap(),
        LinearCode::hadamard(&Field::from_order(3).unwrap(), 2, &budgets).unwrap(),
        LinearCode::hadamard(&Field::from_order(2).unwrap(), 3, &budgets).unwrap(),
    ];
    let mut misses = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20usize {
        let parent = parents[i % 4].clone();
        let n = 4 + (i * 3) % 9;
        let l = 2 + i % 4;
        let family = CodeFamily::Sampled { parent, n };
        let rep = symmetrization_check(&family, l, 6, 300, 700 + i as u64).unwrap();
        for c in [&rep.d_vs_r, &rep.r_vs_g] {
            worst = worst.max(c.difference.mean / c.difference.std_error.max(1e-300));
        }
        if !rep.holds() {
            misses += 1;
        }
    }
    (
        misses <= 1,
        format!("{misses}/20 instances outside 3 SE; largest paired z = {worst:.2}"),
    )
}

fn variance_exactness() -> Outcome {
    let budgets = Budgets::default();
    let mut r = StdRng::seed_from_u64(8);
    let f7 = Field::from_order(7).unwrap();
    let codes = [
        LinearCode::hadamard(&Field::from_order(3).unwrap(), 3, &budgets).unwrap(),
        LinearCode::reed_solomon(&f7, 2, &EvaluationSet::full(&f7)).unwrap(),
        LinearCode::hadamard(&Field::from_order(2).unwrap(), 4, &budgets).unwrap(),
    ];
    let mut misses = 0;
    let mut mismatched = 0;
    let mut worst = 0.0f64;
    for i in 0..50usize {
        let code = &codes[i % 3];
        let n = code.n();
        let size = r.random_range(1..=8usize);
        let set = MessageSet::random(code, size, r.random()).unwrap();
        let coords: Vec<usize> = (0..n).filter(|_| r.random_bool(0.6)).collect();
        let words = set.encode(code).unwrap();
        let chosen: Vec<&Vec<Symbol>> = words.iter().collect();
        let counts = plurality_counts(&chosen, code.field().order() as usize);
        let analytic: f64 = coords.iter().map(|&j| (counts[j] as f64 / size as f64).powi(2)).sum();
        let idx = ProcessIndex {
            coordinates: coords,
            set,
        };
        let s = gaussian_process_sample(code, &[idx], 10_000, 800 + i as u64).unwrap();
        let p = &s.pairs[0];
        if (p.analytic_variance - analytic).abs() > 1e-9 * (1.0 + analytic) {
            mismatched += 1;
        }
        if (p.variance - analytic).abs() > 5.0 * p.variance_std_error {
            misses += 1;
        }
        if p.variance_std_error > 0.0 {
            worst = worst.max((p.variance - analytic).abs() / p.variance_std_error);
        }
    }
    (
        misses <= 2 && mismatched == 0,
        format!("{misses}/50 outside 5 SE at 10^4 trials, largest |z| = {worst:.2}, analytic mismatches {mismatched}"),
    )
}

fn beyond_johnson() -> Outcome {
    let cfg = Config::default();
    let seeds: Vec<u64> = (0..20).collect();
    let grid = [0.2, 0.4, 0.6, 0.8];
    let a = experiment_beyond_johnson(7, 2, 5, &grid, 4, &seeds, &cfg).unwrap();
    let b = experiment_beyond_johnson(7, 2, 5, &grid, 4, &seeds, &cfg).unwrap();
    let identical = a.canonical_json().unwrap() == b.canonical_json().unwrap();
    let says_so = a.notes.iter().any(|n| n.contains("not visible"));
    let rows: Vec<ProfileTableRow> = serde_json::from_value(a.tables["profile"].clone()).unwrap();
    let codes: Vec<listdec::harness::experiments::CodeSummary> =
        serde_json::from_value(a.tables["codes"].clone()).unwrap();

    // independent standard profile and Johnson columns at distance 4/5
    let field = Field::from_order(7).unwrap();
    let zs = all_words(7, 5);
    let mut mismatches = 0;
    for c in &codes {
        let evals = EvaluationSet::new(&field, c.points.clone()).unwrap();
        let code = LinearCode::reed_solomon(&field, 2, &evals).unwrap();
        let words = distinct_codewords(&code);
        let mut min_kth = [usize::MAX; 4];
        for z in &zs {
            let mut d: Vec<usize> = words.iter().map(|w| dist(w, z)).collect();
            d.sort_unstable();
            for l in 1..=4 {
                min_kth[l - 1] = min_kth[l - 1].min(d[l]);
            }
        }
        if c.distance != (4, 5) {
            mismatches += 1;
        }
        for row in rows.iter().filter(|r| r.seed == c.seed) {
            let l = row.list_size;
            let lp = (l + 1) as f64;
            let ms = 1.0 - (5.0 + (25.0 + 100.0 * lp * (lp - 1.0) * (1.0 - 0.8)).sqrt()) / (2.0 * lp * 5.0);
            if row.standard_errors != min_kth[l - 1] - 1
                || (row.johnson_ms - ms).abs() > 1e-12
                || (row.johnson_gs - johnson_radius_gs(5, 7, l, 0.8).unwrap()).abs() > 1e-12
                || (johnson_radius_ms(5, l, 0.8).unwrap() - ms).abs() > 1e-12
            {
                mismatches += 1;
            }
        }
    }
    (
        identical && a.verdicts["rerun_identical"] && says_so && mismatches == 0 && rows.len() == 80,
        format!(
            "20 seeds x 4 list sizes, re-run byte-identical: {identical}, independent profile/Johnson mismatches {mismatches}, scale note present: {says_so}"
        ),
    )
}

fn cli_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_listdec");
    let commands: [&[&str]; 8] = [
        &["field", "--q", "8"],
        &["code", "info", "--code", "rs:q=7,k=2,n=5"],
        &["oracle", "profile", "--code", "rs:q=7,k=2,n=5", "--max-list", "3"],
        &["bounds", "table"],
        &["plurality", "Q", "--code", "hadamard:q=3,k=2", "--list", "3"],
        &["chain", "build", "--code", "hadamard:q=3,k=4", "--list", "16", "--t-max", "2", "--eta", "0.25"],
        &["experiment", "beyond-johnson", "--seeds", "3"],
        &["suite", "--scope", "oracle"],
    ];
    let mut bad = Vec::new();
    for args in commands {
        let run = || {
            Command::new(exe)
                .args(["--seed", "5"])
                .args(args)
                .output()
                .expect("binary runs")
        };
        let (a, b) = (run(), run());
        if a.stdout != b.stdout || a.stdout.is_empty() || a.status.code() != Some(0) || b.status.code() != Some(0) {
            bad.push(args[0]);
        }
    }
    (
        bad.is_empty(),
        format!("{} command families, non-identical or failing: {bad:?}", commands.len()),
    )
}

fn main() {
    let instances = plurality_instances();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 Johnson exhaustive soundness", Box::new(johnson_soundness)),
        ("2 plurality identity", Box::new(|| plurality_identity(&instances))),
        ("3 average-radius threshold soundness", Box::new(|| proposition_soundness(&instances))),
        ("4 Reed-Solomon exact distance", Box::new(rs_distance)),
        ("5 oracle self-consistency", Box::new(oracle_consistency)),
        ("6 chaining net postconditions", Box::new(chain_nets)),
        ("7 symmetrization and comparison", Box::new(symmetrization)),
        ("8 process variance exactness", Box::new(variance_exactness)),
        ("9 beyond-Johnson reproducibility", Box::new(beyond_johnson)),
        ("10 CLI determinism", Box::new(cli_determinism)),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let start = Instant::now();
        let (ok, detail) = f();
        let secs = start.elapsed().as_secs_f64();
        println!("{} criterion {name}: {detail} [{secs:.1}s]", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
