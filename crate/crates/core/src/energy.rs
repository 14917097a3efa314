//! Truncated dyadic energies of conditions (iv) and (v), the chi(j,k) split,
//! and the slope-based convergence heuristic shared by every report.

use std::f64::consts::{E, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle_map::CircleHomeomorphism;
use crate::error::{check_lambda, Error, Result};
use crate::numeric::{pow_lambda, CompensatedSum};

/// Deepest level accepted by the dyadic sums.
pub const MAX_DYADIC_LEVEL: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionTag {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    Ii,
    #[serde(rename = "iii_direct")]
    IiiDirect,
    #[serde(rename = "iii_dyadic")]
    IiiDyadic,
    #[serde(rename = "iv")]
    Iv,
    #[serde(rename = "v")]
    V,
}

impl ConditionTag {
    pub const ALL: [ConditionTag; 6] = [
        ConditionTag::I,
        ConditionTag::Ii,
        ConditionTag::IiiDirect,
        ConditionTag::IiiDyadic,
        ConditionTag::Iv,
        ConditionTag::V,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionTag::I => "i",
            ConditionTag::Ii => "ii",
            ConditionTag::IiiDirect => "iii_direct",
            ConditionTag::IiiDyadic => "iii_dyadic",
            ConditionTag::Iv => "iv",
            ConditionTag::V => "v",
        }
    }
}

impl std::str::FromStr for ConditionTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConditionTag::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown condition '{s}' (expected one of i, ii, iii_direct, iii_dyadic, iv, v)")))
    }
}

impl std::fmt::Display for ConditionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Thresholds for [`classify_convergence`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub slope_epsilon: f64,
    pub min_levels: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { slope_epsilon: 0.05, min_levels: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub condition: ConditionTag,
    pub lambda: f64,
    pub levels: u32,
    /// Per-level contributions `s_j`, `j = 1..=levels`.
    pub terms: Vec<f64>,
    /// Cumulative sums `S_j`.
    pub partial_sums: Vec<f64>,
    pub total: f64,
    /// Absent when fewer than `min_levels` levels are available.
    pub classification: Option<Classification>,
    /// Fitted slope of `log2 s_j` over the last half of the levels.
    pub tail_slope: Option<f64>,
    /// `s_J / s_{J-1}`.
    pub tail_ratio: Option<f64>,
}

impl EnergyReport {
    /// Assembles a report from per-level terms, accumulating the partial sums.
    pub fn from_terms(condition: ConditionTag, lambda: f64, terms: Vec<f64>, cfg: &ClassifierConfig) -> Self {
        let mut acc = CompensatedSum::new();
        let partial_sums: Vec<f64> = terms
            .iter()
            .map(|&t| {
                acc.add(t);
                acc.value()
            })
            .collect();
        let total = partial_sums.last().copied().unwrap_or(0.0);
        let tail_ratio = match terms.len() {
            n if n >= 2 && terms[n - 2] > 0.0 => Some(terms[n - 1] / terms[n - 2]),
            _ => None,
        };
        let fit = tail_fit(&terms, cfg).ok();
        Self {
            condition,
            lambda,
            levels: terms.len() as u32,
            terms,
            partial_sums,
            total,
            classification: fit.map(|(c, _)| c),
            tail_slope: fit.and_then(|(_, s)| s),
            tail_ratio,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite() && self.terms.iter().all(|t| t.is_finite())
    }
}

/// Slope heuristic: least-squares fit of `log2 s_j` against `j` over the last
/// half of the levels.
pub fn classify_convergence(report: &EnergyReport, cfg: &ClassifierConfig) -> Result<Classification> {
    tail_fit(&report.terms, cfg).map(|(c, _)| c)
}

fn tail_fit(terms: &[f64], cfg: &ClassifierConfig) -> Result<(Classification, Option<f64>)> {
    let n = terms.len();
    if n < cfg.min_levels.max(2) {
        return Err(Error::domain(
            "classify_convergence",
            format!("insufficient data: {n} levels, need at least {}", cfg.min_levels.max(2)),
        ));
    }
    if terms.iter().any(|t| !t.is_finite()) {
        return Ok((Classification::Divergent, None));
    }
    let start = n / 2;
    let points: Vec<(f64, f64)> = terms[start..]
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(i, &s)| ((start + i + 1) as f64, s.log2()))
        .collect();
    if points.len() < 2 {
        // Vanishing tail.
        return Ok((Classification::Convergent, None));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let class = if slope < -cfg.slope_epsilon {
        Classification::Convergent
    } else if slope > cfg.slope_epsilon {
        Classification::Divergent
    } else {
        Classification::Inconclusive
    };
    Ok((class, Some(slope)))
}

fn check_levels(op: &'static str, levels: u32) -> Result<()> {
    if levels > MAX_DYADIC_LEVEL {
        return Err(Error::resource(op, format!("J = {levels} exceeds {MAX_DYADIC_LEVEL}")));
    }
    Ok(())
}

/// Image arc lengths `l(phi(Gamma_{j,k}))`, `k = 1..=2^j`, in index order.
pub fn image_lengths(map: &CircleHomeomorphism, j: u32) -> Vec<f64> {
    let n = 1u64 << j;
    let nf = n as f64;
    let mut prev = map.lift(0.0);
    (1..=n)
        .map(|k| {
            let next = map.lift(TAU * k as f64 / nf);
            let l = next - prev;
            prev = next;
            l
        })
        .collect()
}

fn level_terms<F>(map: &CircleHomeomorphism, levels: u32, term: F) -> Vec<f64>
where
    F: Fn(u32, f64) -> f64 + Sync,
{
    (1..=levels)
        .into_par_iter()
        .map(|j| image_lengths(map, j).into_iter().map(|l| term(j, l)).collect::<CompensatedSum>().value())
        .collect()
}

/// `(iv)`: `s_j = j^lambda sum_k l_{j,k}^2`.
pub fn dyadic_energy_iv(map: &CircleHomeomorphism, lambda: f64, levels: u32) -> Result<EnergyReport> {
    dyadic_energy_iv_with(map, lambda, levels, &ClassifierConfig::default())
}

pub fn dyadic_energy_iv_with(
    map: &CircleHomeomorphism,
    lambda: f64,
    levels: u32,
    cfg: &ClassifierConfig,
) -> Result<EnergyReport> {
    check_lambda("dyadic_energy_iv", lambda)?;
    check_levels("dyadic_energy_iv", levels)?;
    let terms = level_terms(map, levels, |_, l| l * l)
        .into_iter()
        .enumerate()
        .map(|(i, s)| pow_lambda((i + 1) as f64, lambda) * s)
        .collect();
    Ok(EnergyReport::from_terms(ConditionTag::Iv, lambda, terms, cfg))
}

/// `(v)`: `s_j = sum_k l^2 log^lambda(e + l 2^j)`.
pub fn dyadic_energy_v(map: &CircleHomeomorphism, lambda: f64, levels: u32) -> Result<EnergyReport> {
    dyadic_energy_v_with(map, lambda, levels, &ClassifierConfig::default())
}

pub fn dyadic_energy_v_with(
    map: &CircleHomeomorphism,
    lambda: f64,
    levels: u32,
    cfg: &ClassifierConfig,
) -> Result<EnergyReport> {
    check_lambda("dyadic_energy_v", lambda)?;
    check_levels("dyadic_energy_v", levels)?;
    let terms = level_terms(map, levels, |j, l| l * l * v_weight(l, j, lambda));
    Ok(EnergyReport::from_terms(ConditionTag::V, lambda, terms, cfg))
}

#[inline]
fn v_weight(l: f64, j: u32, lambda: f64) -> f64 {
    pow_lambda((E + l * (j as f64).exp2()).ln(), lambda)
}

/// One half of the chi(j,k) partition of a dyadic sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparabilitySplit {
    pub condition: ConditionTag,
    pub lambda: f64,
    pub levels: u32,
    /// Sum over arcs with `l > 2^{-a j}`.
    pub p1: f64,
    /// Sum over the remaining arcs.
    pub p2: f64,
    pub total: f64,
    /// Upper bound for `p2` implied by `l <= 2^{-a j}`.
    pub p2_bound: f64,
}

impl ComparabilitySplit {
    pub fn p2_within_bound(&self) -> bool {
        self.p2 <= self.p2_bound
    }
}

/// Splits (iv) and (v) by `chi(j,k) = [l_{j,k} > 2^{-3j/4}]`.
pub fn comparability_split(
    map: &CircleHomeomorphism,
    lambda: f64,
    levels: u32,
) -> Result<(ComparabilitySplit, ComparabilitySplit)> {
    comparability_split_with_exponent(map, lambda, levels, 0.75)
}

/// Same as [`comparability_split`] with threshold `2^{-a j}`, `1/2 < a < 1`.
pub fn comparability_split_with_exponent(
    map: &CircleHomeomorphism,
    lambda: f64,
    levels: u32,
    exponent: f64,
) -> Result<(ComparabilitySplit, ComparabilitySplit)> {
    const OP: &str = "comparability_split";
    check_lambda(OP, lambda)?;
    check_levels(OP, levels)?;
    if !(exponent > 0.5 && exponent < 1.0) {
        return Err(Error::domain(OP, format!("threshold exponent {exponent} outside (1/2, 1)")));
    }
    // Per level: (iv chi=1, iv chi=0, v chi=1, v chi=0), before the j^lambda factor on iv.
    let per_level: Vec<[f64; 4]> = (1..=levels)
        .into_par_iter()
        .map(|j| {
            let threshold = (-exponent * j as f64).exp2();
            let mut acc = [CompensatedSum::new(); 4];
            for l in image_lengths(map, j) {
                let sq = l * l;
                let v = sq * v_weight(l, j, lambda);
                if l > threshold {
                    acc[0].add(sq);
                    acc[2].add(v);
                } else {
                    acc[1].add(sq);
                    acc[3].add(v);
                }
            }
            [acc[0].value(), acc[1].value(), acc[2].value(), acc[3].value()]
        })
        .collect();

    let mut sums = [CompensatedSum::new(); 4];
    let mut totals = [CompensatedSum::new(); 2];
    let mut bounds = [CompensatedSum::new(); 2];
    let decay = 1.0 - exponent * 2.0;
    for (i, t) in per_level.iter().enumerate() {
        let j = (i + 1) as f64;
        let w = pow_lambda(j, lambda);
        sums[0].add(w * t[0]);
        sums[1].add(w * t[1]);
        sums[2].add(t[2]);
        sums[3].add(t[3]);
        totals[0].add(w * (t[0] + t[1]));
        totals[1].add(t[2] + t[3]);
        // sum_k l^2 <= 2^j (2^{-a j})^2 on the chi = 0 arcs.
        let mass = (decay * j).exp2();
        bounds[0].add(w * mass);
        let log_cap = (E + ((1.0 - exponent) * j).exp2()).ln();
        bounds[1].add(mass * pow_lambda(log_cap, lambda).max(1.0));
    }
    let iv = ComparabilitySplit {
        condition: ConditionTag::Iv,
        lambda,
        levels,
        p1: sums[0].value(),
        p2: sums[1].value(),
        total: totals[0].value(),
        p2_bound: bounds[0].value(),
    };
    let v = ComparabilitySplit {
        condition: ConditionTag::V,
        lambda,
        levels,
        p1: sums[2].value(),
        p2: sums[3].value(),
        total: totals[1].value(),
        p2_bound: bounds[1].value(),
    };
    Ok((iv, v))
}
