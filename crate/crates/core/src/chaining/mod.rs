//! Gaussian chaining for the plurality process.
//!
//! `X(I, Λ) = sum_{j in I} g_j pl_j(Λ)` with i.i.d. standard Gaussians `g_j`.
//! The net hierarchy starts from `(I_0, Λ_0) = ([n], Λ)` and repeatedly keeps
//! the heavy coordinates `I_{t+1} = {j : |Λ_t| pl_j(Λ_t) >= γ}` and a random
//! half `Λ_{t+1}` of `Λ_t`, redrawn until three concentration conditions hold.
//! Logarithms of `L` are base 2; `ln` is written out where it is meant.

mod concentration;
mod process;
mod symmetrize;

use serde::{Deserialize, Serialize};

use crate::bounds::ConstantsConfig;
use crate::config::Config;
use crate::error::{invalid, Error, Result};
use crate::linear_code::{LinearCode, Word};
use crate::plurality::{MessageSet, PluralityProfile};
use crate::rng::{self, streams};

pub use concentration::{concentration_check, ConcentrationReport, CoordinateConcentration};
pub use process::{
    gaussian_process_sample, supremum_experiment, PairStats, ProcessIndex, ProcessSample,
    SupremumReport,
};
pub use symmetrize::{symmetrization_check, Comparison, SymmetrizationReport};

/// Relative slack on floating-point comparisons of exact postconditions.
const TOL: f64 = 1e-9;

/// Parameters of the net construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub list_size: usize,
    pub eta: f64,
    pub heavy_threshold: f64,
    /// `4 c1 log L / ((1 - η)^2 η^2)`.
    pub gamma: f64,
    /// `(log L - 2 log(1/η) - 2) / log(2/(1 - η))` before rounding.
    pub t_max_real: f64,
    /// Number of chain steps actually taken.
    pub t_max: usize,
    pub t_max_overridden: bool,
    pub retry_limit: usize,
    /// Target `Q` for the mass invariant; `None` uses `sum_j pl_j(Λ_0)`.
    pub q_mass: Option<f64>,
    pub constants: ConstantsConfig,
}

fn gamma_of(c1: f64, log_l: f64, eta: f64) -> f64 {
    4.0 * c1 * log_l / ((1.0 - eta).powi(2) * eta * eta)
}

impl ChainParams {
    /// Defaults for list size `list_size`: `η` from the configured rule, `c1`
    /// from the constants, `t_max` from the formula rounded down.
    pub fn new(list_size: usize, cfg: &Config) -> Result<Self> {
        if list_size < 2 {
            return Err(invalid("chaining needs L >= 2"));
        }
        cfg.constants.validate()?;
        let eta = cfg.defaults.eta(list_size)?;
        let mut p = ChainParams {
            list_size,
            eta,
            heavy_threshold: cfg.constants.heavy_threshold,
            gamma: 0.0,
            t_max_real: 0.0,
            t_max: 0,
            t_max_overridden: false,
            retry_limit: 200,
            q_mass: None,
            constants: cfg.constants.clone(),
        };
        p.recompute();
        Ok(p)
    }

    fn recompute(&mut self) {
        let log_l = (self.list_size as f64).log2();
        self.gamma = gamma_of(self.heavy_threshold, log_l, self.eta);
        self.t_max_real =
            (log_l - 2.0 * (1.0 / self.eta).log2() - 2.0) / (2.0 / (1.0 - self.eta)).log2();
        if !self.t_max_overridden {
            self.t_max = self.t_max_real.floor().max(0.0) as usize;
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 0.5) {
            return Err(invalid(format!("eta = {eta} outside (0, 1/2]")));
        }
        self.eta = eta;
        self.recompute();
        Ok(self)
    }

    pub fn with_heavy_threshold(mut self, c1: f64) -> Result<Self> {
        if !(c1.is_finite() && c1 > 0.0) {
            return Err(invalid(format!("heavy threshold c1 = {c1} must be positive")));
        }
        self.heavy_threshold = c1;
        self.recompute();
        Ok(self)
    }

    /// Forces the number of chain steps, recorded as an override.
    pub fn with_t_max(mut self, t_max: usize) -> Self {
        self.t_max = t_max;
        self.t_max_overridden = true;
        self
    }

    pub fn with_retry_limit(mut self, limit: usize) -> Result<Self> {
        if limit == 0 {
            return Err(invalid("retry limit must be at least 1"));
        }
        self.retry_limit = limit;
        Ok(self)
    }

    pub fn with_q_mass(mut self, q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(invalid(format!("Q = {q} must be positive")));
        }
        self.q_mass = Some(q);
        Ok(self)
    }

    pub fn log_l(&self) -> f64 {
        (self.list_size as f64).log2()
    }

    /// The step-width constant that the three accepted conditions and the
    /// Hölder step imply: `2 (1 + η) sqrt(c1) / (1 - η)`.
    pub fn implied_step_width(&self) -> f64 {
        2.0 * (1.0 + self.eta) * self.heavy_threshold.sqrt() / (1.0 - self.eta)
    }
}

/// The size-ratio, heavy-mass and step-norm conditions a half subset must meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Size,
    HeavyMass,
    StepNorm,
}

impl Condition {
    fn describe(self) -> &'static str {
        match self {
            Condition::Size => "half-subset size outside [(1-eta)/2, (1+eta)/2] of the parent",
            Condition::HeavyMass => "heavy-coordinate plurality mass grew too much",
            Condition::StepNorm => "l2 change of heavy pluralities too large",
        }
    }
}

/// Quantities of the step from level `t` to level `t + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    /// `||pl_{I_t}(Λ_t) - pl_{I_{t+1}}(Λ_{t+1})||_2`.
    pub distance: f64,
    /// `C4 sqrt(Q_t log L) / (η sqrt|Λ_t|)` with the configured `C4`.
    pub width_bound: f64,
    /// Smallest `C4` for which this step meets the width bound.
    pub c4_min: f64,
    /// `||pl_{I_t \ I_{t+1}}(Λ_t)||_2`.
    pub dropped_norm: f64,
    /// `sqrt(γ Q_t / |Λ_t|)`.
    pub dropped_bound: f64,
    /// `2 (e C4 / η)^2 Q log L 2^t / L`.
    pub delta_sq: f64,
    /// `sqrt(2 ln(N_t N_{t+1})) δ_t`.
    pub a_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetLevel {
    pub t: usize,
    /// Members of `Λ_t` as positions in `Λ_0`, increasing.
    pub members: Vec<usize>,
    /// `I_t`, increasing.
    pub heavy: Vec<usize>,
    /// `sum_{j in I_t} pl_j(Λ_t)`.
    pub mass: f64,
    /// `Q_t = (1 + η)^t Q`.
    pub mass_bound: f64,
    pub size_lower: f64,
    pub size_upper: f64,
    /// Half subsets drawn to reach this level; zero at `t = 0`.
    pub attempts: usize,
    /// `ln N_t` from the binomial net-size formula.
    pub ln_net_size: f64,
    /// Present for every level except the last.
    pub step: Option<StepDiagnostics>,
}

impl NetLevel {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn mass_ok(&self) -> bool {
        self.mass <= self.mass_bound * (1.0 + TOL)
    }

    pub fn size_ok(&self) -> bool {
        let s = self.size() as f64;
        s >= self.size_lower * (1.0 - TOL) && s <= self.size_upper * (1.0 + TOL)
    }

    pub fn dropped_ok(&self) -> bool {
        self.step
            .as_ref()
            .is_none_or(|s| s.dropped_norm <= s.dropped_bound * (1.0 + TOL))
    }

    pub fn width_ok(&self) -> bool {
        self.step
            .as_ref()
            .is_none_or(|s| s.distance <= s.width_bound * (1.0 + TOL))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetryFailure {
    pub level: usize,
    pub condition: Condition,
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetBuild {
    pub params: ChainParams,
    /// The `Q` used for the mass bounds.
    pub q_mass: f64,
    pub code_size: f64,
    pub levels: Vec<NetLevel>,
    /// Set when `t_max` is zero, so there is no chain beyond level 0.
    pub degenerate: bool,
    /// Set when `L` is at most the configured applicability threshold `c0`.
    pub below_min_list_size: bool,
    pub success: bool,
    pub failure: Option<RetryFailure>,
}

impl NetBuild {
    /// Levels nest: `I_{t+1} ⊆ I_t` and `Λ_{t+1} ⊆ Λ_t`.
    pub fn nested(&self) -> bool {
        self.levels.windows(2).all(|w| {
            is_subset(&w[1].heavy, &w[0].heavy) && is_subset(&w[1].members, &w[0].members)
        })
    }

    /// Mass, size, nesting and dropped-coordinate bounds on every level.
    pub fn postconditions_hold(&self) -> bool {
        self.nested()
            && self
                .levels
                .iter()
                .all(|l| l.mass_ok() && l.size_ok() && l.dropped_ok())
    }

    /// Largest `c4_min` over the steps, zero without steps.
    pub fn c4_min(&self) -> f64 {
        self.levels
            .iter()
            .filter_map(|l| l.step.as_ref())
            .map(|s| s.c4_min)
            .fold(0.0, f64::max)
    }

    pub fn require_success(self) -> Result<Self> {
        match &self.failure {
            Some(f) => Err(Error::RetryLimit {
                level: f.level,
                condition: f.condition.describe().to_string(),
                attempts: f.attempts,
            }),
            None => Ok(self),
        }
    }

    /// One CSV row per level: `t,size,heavy,mass,mass_bound,distance,width_bound`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t,size,heavy,mass,mass_bound,distance,width_bound\n");
        for l in &self.levels {
            let (d, w) = match &l.step {
                Some(s) => (s.distance.to_string(), s.width_bound.to_string()),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                l.t,
                l.size(),
                l.heavy.len(),
                l.mass,
                l.mass_bound,
                d,
                w
            ));
        }
        out
    }
}

fn is_subset(small: &[usize], large: &[usize]) -> bool {
    // both sorted
    let mut it = large.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// `ln C(n, r)` with `r` clamped into `[0, n]`.
pub fn ln_binomial(n: f64, r: f64) -> f64 {
    let n = n.floor();
    let r = r.floor().clamp(0.0, n);
    let r = r.min(n - r);
    (0..r as u64)
        .map(|i| ((n - i as f64) / (i as f64 + 1.0)).ln())
        .sum()
}

/// `ln N_t`: `ln C(N, L)` at `t = 0`, else
/// `ln C6 + ln C(N, eL/2^t) + ln C(N, eL/2^(t-1))`.
pub fn ln_net_size(t: usize, code_size: f64, list_size: usize, c6: f64) -> f64 {
    let l = list_size as f64;
    if t == 0 {
        return ln_binomial(code_size, l);
    }
    let e = std::f64::consts::E;
    c6.ln()
        + ln_binomial(code_size, e * l / 2f64.powi(t as i32))
        + ln_binomial(code_size, e * l / 2f64.powi(t as i32 - 1))
}

struct Level {
    members: Vec<usize>,
    counts: Vec<u32>,
}

impl Level {
    fn pl(&self, j: usize) -> f64 {
        self.counts[j] as f64 / self.members.len() as f64
    }
}

fn level_of(words: &[Word], members: Vec<usize>) -> Result<Level> {
    let chosen: Vec<&Word> = members.iter().map(|&i| &words[i]).collect();
    let counts = PluralityProfile::of_words(&chosen)?.counts().to_vec();
    Ok(Level { members, counts })
}

fn heavy_set(level: &Level, gamma: f64) -> Vec<usize> {
    let size = level.members.len() as f64;
    (0..level.counts.len())
        .filter(|&j| size * level.pl(j) >= gamma)
        .collect()
}

/// First failing condition for a candidate `next`, or `None` if all hold.
fn failing_condition(
    cur: &Level,
    next: &Level,
    heavy_next: &[usize],
    params: &ChainParams,
    q_t: f64,
) -> Option<Condition> {
    let s = cur.members.len() as f64;
    let s1 = next.members.len() as f64;
    let eta = params.eta;
    if s1 < (1.0 - eta) / 2.0 * s || s1 > (1.0 + eta) / 2.0 * s {
        return Some(Condition::Size);
    }
    let c = params.heavy_threshold * s * params.log_l();
    let lhs: f64 = heavy_next.iter().map(|&j| next.pl(j)).sum();
    let rhs: f64 = heavy_next
        .iter()
        .map(|&j| cur.pl(j) + (c * cur.pl(j)).sqrt() / s1)
        .sum();
    if lhs > rhs {
        return Some(Condition::HeavyMass);
    }
    let norm: f64 = heavy_next
        .iter()
        .map(|&j| (next.pl(j) - cur.pl(j)).powi(2))
        .sum::<f64>()
        .sqrt();
    if norm > (c * q_t).sqrt() / s1 {
        return Some(Condition::StepNorm);
    }
    None
}

/// Builds the net hierarchy for one starting set `Λ_0`.
///
/// Each level's half subset is redrawn with fresh coins from the retry stream
/// until the three conditions hold or the retry limit is reached; in the
/// latter case the build stops with `success = false` and the failing
/// condition of the last attempt.
pub fn build_nets(code: &LinearCode, set: &MessageSet, params: &ChainParams, seed: u64) -> Result<NetBuild> {
    let l = set.len();
    if l != params.list_size {
        return Err(invalid(format!(
            "message set has {l} members but the parameters are for L = {}",
            params.list_size
        )));
    }
    let code_size = code.size() as f64;
    if 2.0 * l as f64 >= code_size {
        return Err(invalid(format!("net construction needs L < N/2, got L = {l}, N = {code_size}")));
    }
    let words = set.encode(code)?;
    let n = code.n();
    let eta = params.eta;
    let log_l = params.log_l();
    let c4 = params.constants.step_width;
    let c6 = params.constants.net_size;

    let mut cur = level_of(&words, (0..l).collect())?;
    let mut cur_heavy: Vec<usize> = (0..n).collect();
    let base_mass: f64 = (0..n).map(|j| cur.pl(j)).sum();
    let q_mass = match params.q_mass {
        Some(q) if q < base_mass * (1.0 - TOL) => {
            return Err(invalid(format!(
                "Q = {q} is below the starting mass {base_mass}"
            )))
        }
        Some(q) => q,
        None => base_mass,
    };

    let mut levels = Vec::with_capacity(params.t_max + 1);
    let mut attempts_here = 0;
    let mut failure = None;
    for t in 0..=params.t_max {
        let q_t = (1.0 + eta).powi(t as i32) * q_mass;
        let mut level = NetLevel {
            t,
            members: cur.members.clone(),
            heavy: cur_heavy.clone(),
            mass: cur_heavy.iter().map(|&j| cur.pl(j)).sum(),
            mass_bound: q_t,
            size_lower: ((1.0 - eta) / 2.0).powi(t as i32) * l as f64,
            size_upper: ((1.0 + eta) / 2.0).powi(t as i32) * l as f64,
            attempts: attempts_here,
            ln_net_size: ln_net_size(t, code_size, l, c6),
            step: None,
        };
        if t == params.t_max {
            levels.push(level);
            break;
        }

        let next_heavy = heavy_set(&cur, params.gamma);
        let level_seed = rng::derive_seed(seed, streams::NET_RETRY, t as u64);
        let mut accepted = None;
        let mut last_failure = Condition::Size;
        let mut attempts = 0;
        while attempts < params.retry_limit {
            let mut r = rng::stream_rng(level_seed, streams::NET_RETRY, attempts as u64);
            attempts += 1;
            let members: Vec<usize> = cur
                .members
                .iter()
                .copied()
                .filter(|_| rand::Rng::random_bool(&mut r, 0.5))
                .collect();
            if members.is_empty() {
                last_failure = Condition::Size;
                continue;
            }
            let next = level_of(&words, members)?;
            match failing_condition(&cur, &next, &next_heavy, params, q_t) {
                None => {
                    accepted = Some(next);
                    break;
                }
                Some(c) => last_failure = c,
            }
        }
        let Some(next) = accepted else {
            failure = Some(RetryFailure {
                level: t + 1,
                condition: last_failure,
                attempts,
            });
            levels.push(level);
            break;
        };

        let s = cur.members.len() as f64;
        let in_next = {
            let mut m = vec![false; n];
            for &j in &next_heavy {
                m[j] = true;
            }
            m
        };
        let mut dist_sq = 0.0;
        let mut dropped_sq = 0.0;
        for &j in &cur_heavy {
            if in_next[j] {
                dist_sq += (cur.pl(j) - next.pl(j)).powi(2);
            } else {
                dist_sq += cur.pl(j).powi(2);
                dropped_sq += cur.pl(j).powi(2);
            }
        }
        let distance = dist_sq.sqrt();
        let scale = (q_t * log_l).sqrt() / (eta * s.sqrt());
        let e = std::f64::consts::E;
        let delta_sq =
            2.0 * (e * c4 / eta).powi(2) * q_mass * log_l * 2f64.powi(t as i32) / l as f64;
        let ln_pair = level.ln_net_size + ln_net_size(t + 1, code_size, l, c6);
        level.step = Some(StepDiagnostics {
            distance,
            width_bound: c4 * scale,
            c4_min: distance / scale,
            dropped_norm: dropped_sq.sqrt(),
            dropped_bound: (params.gamma * q_t / s).sqrt(),
            delta_sq,
            a_t: (2.0 * ln_pair.max(0.0)).sqrt() * delta_sq.sqrt(),
        });
        levels.push(level);
        cur = next;
        cur_heavy = next_heavy;
        attempts_here = attempts;
    }

    Ok(NetBuild {
        params: params.clone(),
        q_mass,
        code_size,
        success: failure.is_none(),
        failure,
        degenerate: params.t_max == 0,
        below_min_list_size: (l as f64) <= params.constants.min_list_size,
        levels,
    })
}
