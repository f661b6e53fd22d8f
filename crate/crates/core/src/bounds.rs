//! Closed-form bound calculators.
//!
//! All logarithms are base 2 unless a function says otherwise. Pairwise
//! distance sums run over ordered pairs `x != y` of relative distances, so a
//! set of `L` codewords contributes `L(L-1)` terms.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// The unnamed absolute constants of the list-decoding and chaining bounds.
///
/// Every value must be strictly positive. They are knobs: experiments report
/// which values are empirically sufficient rather than asserting any of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    /// Multiplier in `Y = C0 * L * log N * log^5 L`. Default 1.
    pub y_constant: f64,
    /// Multiplier in the Gaussian supremum bound `C3 * sqrt(Q log N log^5 L)`. Default 1.
    pub gaussian_sup: f64,
    /// Multiplier in the per-level step-width bound. Default 1.
    pub step_width: f64,
    /// Constant of the half-subset concentration inequalities. Default 1.
    pub concentration: f64,
    /// Constant in the net-size bound. Default 1.
    pub net_size: f64,
    /// Slack constant for the number of chain levels. Default 1.
    pub tmax_slack: f64,
    /// Smallest list size for which the net construction applies. Default 16.
    pub min_list_size: f64,
    /// Heavy-coordinate threshold constant `c1` in `gamma`. Default 16, the
    /// smallest value compatible with the default concentration constant.
    pub heavy_threshold: f64,
    /// Replace one `log L` factor of `Y` by `min(log L, log q)`. Default off.
    pub replace_log_factor_with_log_q: bool,
    /// Enforce `heavy_threshold >= 16 * concentration`. Default on.
    pub chaining_checks: bool,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            y_constant: 1.0,
            gaussian_sup: 1.0,
            step_width: 1.0,
            concentration: 1.0,
            net_size: 1.0,
            tmax_slack: 1.0,
            min_list_size: 16.0,
            heavy_threshold: 16.0,
            replace_log_factor_with_log_q: false,
            chaining_checks: true,
        }
    }
}

impl ConstantsConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("y_constant", self.y_constant),
            ("gaussian_sup", self.gaussian_sup),
            ("step_width", self.step_width),
            ("concentration", self.concentration),
            ("net_size", self.net_size),
            ("tmax_slack", self.tmax_slack),
            ("min_list_size", self.min_list_size),
            ("heavy_threshold", self.heavy_threshold),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("constant {name} = {v} must be positive and finite")));
            }
        }
        if self.chaining_checks && self.heavy_threshold < 16.0 * self.concentration {
            return Err(invalid(format!(
                "heavy_threshold = {} must be at least 16 * concentration = {}",
                self.heavy_threshold,
                16.0 * self.concentration
            )));
        }
        Ok(())
    }
}

/// A named bound evaluation with its inputs echoed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// `value - target` when a target is present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl BoundReport {
    pub fn new(name: &str, inputs: &[(&str, f64)], value: f64) -> Self {
        BoundReport {
            name: name.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            target: None,
            margin: None,
        }
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self.margin = Some(self.value - target);
        self
    }
}

fn check_q(q: u32) -> Result<()> {
    if q < 2 {
        return Err(invalid(format!("alphabet size q = {q} must be at least 2")));
    }
    Ok(())
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// The `q`-ary entropy `H_q(x)` with `0 log 0 = 0`.
pub fn q_ary_entropy(q: u32, x: f64) -> Result<f64> {
    check_q(q)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("entropy argument {x} outside [0, 1]")));
    }
    let ln_q = (q as f64).ln();
    Ok((x * ((q - 1) as f64).ln() - xlogx(x) - xlogx(1.0 - x)) / ln_q)
}

/// The list-decoding capacity `1 - H_q(1 - 1/q - eps)`.
pub fn capacity_rate(q: u32, eps: f64) -> Result<f64> {
    check_q(q)?;
    let top = 1.0 - 1.0 / q as f64;
    if !(0.0..=top + 1e-12).contains(&eps) {
        return Err(invalid(format!("eps = {eps} outside [0, 1 - 1/q]")));
    }
    Ok(1.0 - q_ary_entropy(q, (top - eps).clamp(0.0, 1.0))?)
}

fn check_pair_sum(list_size: usize, pair_sum: f64) -> Result<()> {
    let max = (list_size * list_size.saturating_sub(1)) as f64;
    if !(pair_sum >= -1e-9 && pair_sum <= max + 1e-9) {
        return Err(invalid(format!(
            "pairwise distance sum {pair_sum} outside [0, {max}] for L = {list_size}"
        )));
    }
    Ok(())
}

/// Average-radius Johnson bound via the `R^{nq}` embedding:
/// `nL/q + (nL/2eps)(1 + eps^2)(1 - 1/q) - (n/2L eps) * pair_sum`.
pub fn johnson_rhs_gs(n: usize, q: u32, list_size: usize, eps: f64, pair_sum: f64) -> Result<f64> {
    check_q(q)?;
    if list_size == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("eps = {eps} must be positive")));
    }
    check_pair_sum(list_size, pair_sum)?;
    let (n, l, q) = (n as f64, list_size as f64, q as f64);
    Ok(n * l / q + n * l / (2.0 * eps) * (1.0 + eps * eps) * (1.0 - 1.0 / q)
        - n / (2.0 * l * eps) * pair_sum)
}

/// Average-radius Johnson bound from the quadratic inequality:
/// `(n + sqrt(n^2 + 4n^2 L(L-1) - 4n^2 pair_sum)) / 2`.
pub fn johnson_rhs_ms(n: usize, list_size: usize, pair_sum: f64) -> Result<f64> {
    if list_size == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    check_pair_sum(list_size, pair_sum)?;
    let (n, l) = (n as f64, list_size as f64);
    let radicand = n * n + 4.0 * n * n * l * (l - 1.0) - 4.0 * n * n * pair_sum;
    debug_assert!(radicand >= -1e-6 * n * n);
    Ok(0.5 * (n + radicand.max(0.0).sqrt()))
}

/// Smallest value of [`johnson_rhs_gs`] over `eps > 0` for a set of
/// `list_size` codewords with pairwise distances at least `delta`.
pub fn johnson_gs_optimized(n: usize, q: u32, list_size: usize, delta: f64) -> Result<f64> {
    check_q(q)?;
    if list_size == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    let (n, l, q) = (n as f64, list_size as f64, q as f64);
    let slack = l * (1.0 - 1.0 / q) - (l - 1.0) * delta;
    // Minimizing a/(2 eps) + b eps/2 gives sqrt(ab); for slack <= 0 the
    // infimum is approached as eps -> 0.
    Ok(n * l / q + n * (slack.max(0.0) * l * (1.0 - 1.0 / q)).sqrt())
}

/// The radius up to which a code of relative distance `delta` is guaranteed
/// `(rho, list_size)` average-radius list decodable by the quadratic Johnson
/// bound. Decodability holds for every radius strictly below the value.
pub fn johnson_radius_ms(n: usize, list_size: usize, delta: f64) -> Result<f64> {
    let l = list_size + 1;
    let bound = johnson_rhs_ms(n, l, (l * (l - 1)) as f64 * delta.clamp(0.0, 1.0))?;
    Ok(1.0 - bound / (l as f64 * n as f64))
}

/// As [`johnson_radius_ms`], using the embedding bound optimized over `eps`.
pub fn johnson_radius_gs(n: usize, q: u32, list_size: usize, delta: f64) -> Result<f64> {
    let l = list_size + 1;
    let bound = johnson_gs_optimized(n, q, l, delta)?;
    Ok(1.0 - bound / (l as f64 * n as f64))
}

/// `Y = C0 * L * log N * log^5 L`; with the alphabet flag set and `q` given,
/// one `log L` factor becomes `min(log L, log q)`.
pub fn main_theorem_y(
    list_size: usize,
    code_size: f64,
    cfg: &ConstantsConfig,
    alphabet: Option<u32>,
) -> Result<f64> {
    if list_size < 2 {
        return Err(invalid("main theorem requires L >= 2"));
    }
    if !(code_size >= 2.0) {
        return Err(invalid(format!("main theorem requires N >= 2, got {code_size}")));
    }
    let log_l = (list_size as f64).log2();
    let last = match (cfg.replace_log_factor_with_log_q, alphabet) {
        (true, Some(q)) => log_l.min((q as f64).log2()),
        _ => log_l,
    };
    Ok(cfg.y_constant * list_size as f64 * code_size.log2() * log_l.powi(4) * last)
}

/// `E + Y + sqrt(E Y)`.
pub fn main_theorem_bound(
    e: f64,
    list_size: usize,
    code_size: f64,
    cfg: &ConstantsConfig,
    alphabet: Option<u32>,
) -> Result<f64> {
    if !(e >= 0.0) {
        return Err(invalid(format!("E = {e} must be non-negative")));
    }
    let y = main_theorem_y(list_size, code_size, cfg, alphabet)?;
    Ok(e + y + (e * y).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Any alphabet; list size `2/eps^2`, radius `1 - 1/q - (2 + sqrt 2) eps`.
    SmallQ,
    /// `q > 1/eps^2`; list size `1/eps`, radius `1 - 5 eps`.
    LargeQ,
}

impl std::str::FromStr for Variant {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small-q" => Ok(Variant::SmallQ),
            "large-q" => Ok(Variant::LargeQ),
            other => Err(invalid(format!("unknown variant {other:?}"))),
        }
    }
}

/// Parameters of one corollary instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryParams {
    pub variant: Variant,
    pub q: u32,
    pub epsilon: f64,
    pub k: usize,
    pub list_size: usize,
    /// Decoding radius `rho` claimed by the corollary (may be negative for
    /// large `eps`, in which case the claim is vacuous).
    pub radius: f64,
    pub blocklength: u64,
}

impl Variant {
    pub fn list_size(self, eps: f64) -> usize {
        let raw = match self {
            Variant::SmallQ => 2.0 / (eps * eps),
            Variant::LargeQ => 1.0 / eps,
        };
        // Guard against 2/0.25^2 = 32.000000000000004 style rounding.
        (raw - 1e-9).ceil() as usize
    }

    pub fn radius(self, q: u32, eps: f64) -> f64 {
        match self {
            Variant::SmallQ => 1.0 - 1.0 / q as f64 - (2.0 + 2f64.sqrt()) * eps,
            Variant::LargeQ => 1.0 - 5.0 * eps,
        }
    }
}

/// Smallest block length satisfying the corollary's inequality with `N = q^k`.
pub fn corollary_blocklength(
    q: u32,
    eps: f64,
    variant: Variant,
    k: usize,
    cfg: &ConstantsConfig,
) -> Result<CorollaryParams> {
    check_q(q)?;
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let qf = q as f64;
    if !(eps > 0.0 && eps < 1.0 - 1.0 / qf) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1 - 1/q)")));
    }
    if variant == Variant::LargeQ && qf * eps * eps <= 1.0 {
        return Err(invalid(format!("large-q variant requires q > 1/eps^2, got q = {q}, eps = {eps}")));
    }
    let list_size = variant.list_size(eps);
    let log_n = k as f64 * qf.log2();
    let log_l = (list_size as f64).log2();
    let last = if cfg.replace_log_factor_with_log_q {
        log_l.min(qf.log2())
    } else {
        log_l
    };
    let numerator = cfg.y_constant * log_n * log_l.powi(4) * last;
    let required = match variant {
        Variant::SmallQ => numerator / eps.min(qf * eps * eps),
        Variant::LargeQ => 2.0 * numerator / eps,
    };
    let blocklength = required.ceil().max(1.0) as u64;
    Ok(CorollaryParams {
        variant,
        q,
        epsilon: eps,
        k,
        list_size,
        radius: variant.radius(q, eps),
        blocklength,
    })
}

/// Rate expressions for random RS codes, random linear codes, and the
/// Johnson-bound baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFormulas {
    /// `eps / (log q log^5(1/eps))`.
    pub rs_rate: f64,
    /// `min(eps, q eps^2) / (2 C0 log q log^5(1/eps))`.
    pub rlc_rate: f64,
    /// `eps^2`.
    pub johnson_rate: f64,
    /// Whether `rs_rate > johnson_rate`.
    pub beats_johnson: bool,
}

fn check_rate_domain(q: u32, eps: f64) -> Result<()> {
    check_q(q)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    Ok(())
}

pub fn rate_formulas(q: u32, eps: f64, cfg: &ConstantsConfig) -> Result<RateFormulas> {
    check_rate_domain(q, eps)?;
    let log_q = (q as f64).log2();
    let log5 = (1.0 / eps).log2().powi(5);
    let rs_rate = eps / (log_q * log5);
    let rlc_rate = eps.min(q as f64 * eps * eps) / (2.0 * cfg.y_constant * log_q * log5);
    let johnson_rate = eps * eps;
    Ok(RateFormulas {
        rs_rate,
        rlc_rate,
        johnson_rate,
        beats_johnson: rs_rate > johnson_rate,
    })
}

/// One row of the random-linear-code rate/list-size comparison, with
/// constants suppressed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub q: u32,
    pub epsilon: f64,
    /// `small` (q < log^5(1/eps)), `medium` (q < 1/eps), `large` (q < 1/eps^2)
    /// or `very-large`.
    pub regime: String,
    /// `eps^2 / log q`, the earlier random linear code rate.
    pub prior_rate: f64,
    /// `q eps^2 / (log q log^5(1/eps))`.
    pub rate_small_q: f64,
    /// `eps / (log q log^5(1/eps))`.
    pub rate_large_q: f64,
    /// The best known rate in this regime.
    pub best_rate: f64,
    /// The rate upper bound in this regime: `q eps^2 / log q` for q < 1/eps,
    /// capacity for q < 2^(1/eps), else `eps`.
    pub rate_upper_bound: f64,
    pub capacity: f64,
    /// `1/eps^2` for q < 1/eps^2, else `1/eps`.
    pub list_size: f64,
    /// `1/(q^5 eps^2)` for q < 1/eps^2; unknown above.
    pub list_size_lower_bound: Option<f64>,
}

pub const REGIME_CSV_HEADER: &str = "q,epsilon,regime,prior_rate,rate_small_q,rate_large_q,best_rate,rate_upper_bound,capacity,list_size,list_size_lower_bound";

impl RegimeRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.q,
            self.epsilon,
            self.regime,
            self.prior_rate,
            self.rate_small_q,
            self.rate_large_q,
            self.best_rate,
            self.rate_upper_bound,
            self.capacity,
            self.list_size,
            self.list_size_lower_bound.map_or(String::new(), |v| v.to_string())
        )
    }
}

pub fn regime_row(q: u32, eps: f64) -> Result<RegimeRow> {
    check_rate_domain(q, eps)?;
    let qf = q as f64;
    let log_q = qf.log2();
    let log5 = (1.0 / eps).log2().powi(5);
    let prior_rate = eps * eps / log_q;
    let rate_small_q = qf * eps * eps / (log_q * log5);
    let rate_large_q = eps / (log_q * log5);
    let capacity = if eps <= 1.0 - 1.0 / qf {
        capacity_rate(q, eps)?
    } else {
        0.0
    };
    let regime = if qf < log5 {
        "small"
    } else if qf < 1.0 / eps {
        "medium"
    } else if qf < 1.0 / (eps * eps) {
        "large"
    } else {
        "very-large"
    };
    let best_rate = match regime {
        "small" => prior_rate,
        "medium" => rate_small_q,
        _ => rate_large_q,
    };
    let rate_upper_bound = if qf < 1.0 / eps {
        qf * eps * eps / log_q
    } else if log_q < 1.0 / eps {
        capacity
    } else {
        eps
    };
    let below_square = qf < 1.0 / (eps * eps);
    Ok(RegimeRow {
        q,
        epsilon: eps,
        regime: regime.to_string(),
        prior_rate,
        rate_small_q,
        rate_large_q,
        best_rate,
        rate_upper_bound,
        capacity,
        list_size: if below_square { 1.0 / (eps * eps) } else { 1.0 / eps },
        list_size_lower_bound: below_square.then(|| 1.0 / (qf.powi(5) * eps * eps)),
    })
}

/// Hoeffding tail `2 exp(-2 v^2 / sum (b_i - a_i)^2)` for a sum of
/// independent bounded variables.
pub fn chernoff_tail(ranges: &[(f64, f64)], v: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(invalid(format!("deviation v = {v} must be non-negative")));
    }
    if ranges.iter().any(|&(a, b)| !(b >= a)) {
        return Err(invalid("every range must satisfy a <= b"));
    }
    let spread: f64 = ranges.iter().map(|(a, b)| (b - a) * (b - a)).sum();
    if spread == 0.0 {
        return Ok(if v == 0.0 { 2.0 } else { 0.0 });
    }
    Ok(2.0 * (-2.0 * v * v / spread).exp())
}

/// Upper bound on `E max_i |g_i|` for `n` centered Gaussians of standard
/// deviation at most `sigma`: `sigma sqrt(2 ln n) + sigma / sqrt(pi ln n)`.
pub fn gaussian_max_bound(sigma: f64, n: usize) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma = {sigma} must be positive")));
    }
    if n < 2 {
        return Err(invalid("Gaussian maximum bound requires n >= 2"));
    }
    let ln_n = (n as f64).ln();
    Ok(sigma * (2.0 * ln_n).sqrt() + sigma / (PI * ln_n).sqrt())
}
