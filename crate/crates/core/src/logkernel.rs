//! Condition (iii), the double log-integral
//! `iint |log|phi^{-1}(eta) - phi^{-1}(xi)||^{lambda+1} |d eta| |d xi|`,
//! by a direct pair quadrature and by the dyadic sublevel-measure sum.
//!
//! Both schemes integrate in source angles: `|d xi|` on the image circle is
//! `d mu_f` on the source side, so no inversion is needed on a grid.

use std::f64::consts::{LN_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle_map::CircleHomeomorphism;
use crate::energy::{ClassifierConfig, ConditionTag, EnergyReport};
use crate::error::{check_lambda, Error, Result};
use crate::numeric::{composite_gauss, pow_lambda, CompensatedSum};

pub const MIN_DIRECT_RESOLUTION: usize = 64;
pub const MAX_DIRECT_RESOLUTION: usize = 1 << 14;
/// Grid used for part I inside [`log_energy_dyadic`].
pub const DYADIC_PART_I_RESOLUTION: usize = 512;
pub const MAX_DYADIC_LEVEL: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogMethod {
    Direct,
    Dyadic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogIntegralResult {
    pub lambda: f64,
    pub method: LogMethod,
    /// Pairs with chordal distance in [1, 2].
    pub part_i: f64,
    /// Pairs with chordal distance below 1.
    pub part_ii: f64,
    pub total: f64,
    /// Source-grid size (direct) or `xi`-grid size (dyadic).
    pub resolution: usize,
    /// Estimated contribution of the excluded diagonal band.
    pub excluded_estimate: f64,
    /// Per-band contributions to `part_ii` (dyadic method only).
    pub level_terms: Vec<f64>,
}

impl LogIntegralResult {
    pub fn corrected_total(&self) -> f64 {
        self.total + self.excluded_estimate
    }

    /// The per-band terms as an energy report (dyadic method).
    pub fn as_report(&self, cfg: &ClassifierConfig) -> EnergyReport {
        let tag = match self.method {
            LogMethod::Direct => ConditionTag::IiiDirect,
            LogMethod::Dyadic => ConditionTag::IiiDyadic,
        };
        EnergyReport::from_terms(tag, self.lambda, self.level_terms.clone(), cfg)
    }
}

/// `Lambda(t) = (lambda + 1) log^lambda(1/t) / t` on `(0, 1)`.
pub fn lambda_weight(t: f64, lambda: f64) -> Result<f64> {
    check_lambda("lambda_weight", lambda)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain("lambda_weight", format!("t = {t} outside (0, 1)")));
    }
    Ok((lambda + 1.0) * pow_lambda(-t.ln(), lambda) / t)
}

/// `int_{2^{-j-1}}^{2^{-j}} Lambda = log^{lambda+1}(2^{j+1}) - log^{lambda+1}(2^j)`.
pub fn band_integral(j: u32, lambda: f64) -> f64 {
    let p = lambda + 1.0;
    let hi = ((j + 1) as f64 * LN_2).powf(p);
    let lo = if j == 0 { 0.0 } else { (j as f64 * LN_2).powf(p) };
    hi - lo
}

fn check_chord(op: &'static str, t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 2.0) {
        return Err(Error::domain(op, format!("chordal distance t = {t} outside (0, 2]")));
    }
    Ok(())
}

/// `l({eta : |phi^{-1}(xi) - phi^{-1}(eta)| <= t})` for an image angle `xi_angle`.
pub fn sublevel_arc_measure(map: &CircleHomeomorphism, xi_angle: f64, t: f64) -> Result<f64> {
    check_chord("sublevel_arc_measure", t)?;
    if !xi_angle.is_finite() {
        return Err(Error::domain("sublevel_arc_measure", "non-finite angle"));
    }
    let y = (xi_angle - map.base_point_angle()).rem_euclid(TAU);
    let theta = map.invert_lift(y)?;
    Ok(sublevel_at_source(map, theta, t))
}

/// Same measure, parametrized by the source angle `theta = arg phi^{-1}(xi)`.
pub fn sublevel_arc_measure_at_source(map: &CircleHomeomorphism, theta: f64, t: f64) -> Result<f64> {
    check_chord("sublevel_arc_measure_at_source", t)?;
    Ok(sublevel_at_source(map, theta, t))
}

fn sublevel_at_source(map: &CircleHomeomorphism, theta: f64, t: f64) -> f64 {
    let delta = 2.0 * (0.5 * t).min(1.0).asin();
    if delta >= PI {
        return TAU;
    }
    map.lift_periodic(theta + delta) - map.lift_periodic(theta - delta)
}

/// Source-grid masses `w_i = f(b_i) - f(a_i)` of `n` equal cells.
fn cell_masses(map: &CircleHomeomorphism, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut prev = map.lift(0.0);
    (1..=n)
        .map(|i| {
            let next = map.lift(TAU * i as f64 / nf);
            let w = next - prev;
            prev = next;
            w
        })
        .collect()
}

/// `|log c|^{lambda+1}` tabulated by cyclic index offset `d`.
fn offset_kernel(n: usize, lambda: f64) -> Vec<(f64, bool)> {
    let p = lambda + 1.0;
    (0..n)
        .map(|d| {
            if d == 0 {
                return (0.0, false);
            }
            let c = 2.0 * (PI * d as f64 / n as f64).sin();
            (c.ln().abs().powf(p), c >= 1.0)
        })
        .collect()
}

/// Mean of `|log |u||^{lambda+1}` over a square cell of side `h` on the
/// diagonal, i.e. `(2 / h^2) int_0^h (h - u) |log u|^{lambda+1} du`.
fn diagonal_cell_mean(h: f64, lambda: f64) -> f64 {
    let p = lambda + 1.0;
    let a = -h.ln();
    // Substitution u = h e^{-v}.
    2.0 * composite_gauss(|v| ((-v).exp() - (-2.0 * v).exp()) * (v + a).powf(p), 0.0, 48.0, 96, 8)
}

/// Pair sums (part I, part II) with the diagonal cells excluded.
fn pair_sums(w: &[f64], kernel: &[(f64, bool)], transpose: bool) -> (f64, f64) {
    let n = w.len();
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut far = CompensatedSum::new();
            let mut near = CompensatedSum::new();
            for k in 0..n {
                if k == i {
                    continue;
                }
                let d = if transpose { (i + n - k) % n } else { (k + n - i) % n };
                let (g, is_far) = kernel[d];
                let term = w[i] * w[k] * g;
                if is_far {
                    far.add(term);
                } else {
                    near.add(term);
                }
            }
            (far.value(), near.value())
        })
        .collect();
    let far = rows.iter().map(|r| r.0).collect::<CompensatedSum>().value();
    let near = rows.iter().map(|r| r.1).collect::<CompensatedSum>().value();
    (far, near)
}

fn direct_impl(map: &CircleHomeomorphism, lambda: f64, resolution: usize, transpose: bool) -> Result<LogIntegralResult> {
    const OP: &str = "log_energy_direct";
    check_lambda(OP, lambda)?;
    if resolution < MIN_DIRECT_RESOLUTION {
        return Err(Error::domain(OP, format!("resolution {resolution} below {MIN_DIRECT_RESOLUTION}")));
    }
    if resolution > MAX_DIRECT_RESOLUTION {
        return Err(Error::resource(OP, format!("resolution {resolution} exceeds {MAX_DIRECT_RESOLUTION}")));
    }
    let w = cell_masses(map, resolution);
    let kernel = offset_kernel(resolution, lambda);
    let (part_i, part_ii) = pair_sums(&w, &kernel, transpose);
    let self_mass: f64 = w.iter().map(|x| x * x).collect::<CompensatedSum>().value();
    let excluded_estimate = self_mass * diagonal_cell_mean(TAU / resolution as f64, lambda);
    Ok(LogIntegralResult {
        lambda,
        method: LogMethod::Direct,
        part_i,
        part_ii,
        total: part_i + part_ii,
        resolution,
        excluded_estimate,
        level_terms: Vec::new(),
    })
}

/// Midpoint pair quadrature on a uniform source grid with Stieltjes weights.
/// The diagonal cells are excluded; `excluded_estimate` assumes a locally
/// uniform density inside each cell.
pub fn log_energy_direct(map: &CircleHomeomorphism, lambda: f64, resolution: usize) -> Result<LogIntegralResult> {
    direct_impl(map, lambda, resolution, false)
}

/// Dyadic surrogate: `part_ii = sum_{j=1}^J [int sublevel(xi, 2^{-j}) d mu_f] * band_j`.
pub fn log_energy_dyadic(map: &CircleHomeomorphism, lambda: f64, levels: u32) -> Result<LogIntegralResult> {
    const OP: &str = "log_energy_dyadic";
    check_lambda(OP, lambda)?;
    if levels == 0 {
        return Err(Error::domain(OP, "J must be >= 1"));
    }
    if levels > MAX_DYADIC_LEVEL {
        return Err(Error::resource(OP, format!("J = {levels} exceeds {MAX_DYADIC_LEVEL}")));
    }
    let n_xi = (1usize << (levels + 3)).max(1024);
    let nf = n_xi as f64;
    let w = cell_masses(map, n_xi);
    let mids: Vec<f64> = (0..n_xi).map(|i| TAU * (i as f64 + 0.5) / nf).collect();

    let level_terms: Vec<f64> = (1..=levels)
        .into_par_iter()
        .map(|j| {
            let t = (-(j as f64)).exp2();
            let integral = mids
                .iter()
                .zip(&w)
                .map(|(&s, &wi)| wi * sublevel_at_source(map, s, t))
                .collect::<CompensatedSum>()
                .value();
            integral * band_integral(j, lambda)
        })
        .collect();
    let part_ii = level_terms.iter().copied().collect::<CompensatedSum>().value();

    let grid = DYADIC_PART_I_RESOLUTION;
    let kernel: Vec<(f64, bool)> =
        offset_kernel(grid, lambda).into_iter().map(|(g, far)| if far { (g, true) } else { (0.0, false) }).collect();
    let (part_i, _) = pair_sums(&cell_masses(map, grid), &kernel, false);

    // Bands finer than 2^{-J}: geometric extrapolation of the last two terms,
    // or the last term alone when they do not decay.
    let excluded_estimate = match level_terms.as_slice() {
        [.., prev, last] if *prev > 0.0 && last < prev => last * (last / prev) / (1.0 - last / prev),
        [.., last] => *last,
        [] => 0.0,
    };

    Ok(LogIntegralResult {
        lambda,
        method: LogMethod::Dyadic,
        part_i,
        part_ii,
        total: part_i + part_ii,
        resolution: n_xi,
        excluded_estimate,
        level_terms,
    })
}
