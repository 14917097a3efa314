#![allow(dead_code)]

use std::collections::BTreeMap;

use homeo_energy::circle_map::CircleHomeomorphism;
use homeo_energy::energy::{self, Classification, ClassifierConfig, ConditionTag, EnergyReport};
use homeo_energy::logkernel;
use homeo_energy::poisson::HarmonicExtension;

pub const WINDOW_LAMBDAS: [f64; 3] = [-0.5, 0.0, 1.0];
pub const DISK_LEVELS: std::ops::RangeInclusive<u32> = 6..=10;
pub const DYADIC_LEVELS: std::ops::RangeInclusive<u32> = 8..=14;

/// Partial sums and classification of one condition in one `(family, lambda)` cell.
pub struct Series {
    pub tag: ConditionTag,
    /// `(J, S_J)` over the condition's level range.
    pub sums: Vec<(u32, f64)>,
    pub classification: Option<Classification>,
}

fn series(r: &EnergyReport, offset: f64, range: &std::ops::RangeInclusive<u32>) -> Series {
    Series {
        tag: r.condition,
        sums: range.clone().map(|j| (j, offset + r.partial_sums[j as usize - 1])).collect(),
        classification: r.classification,
    }
}

/// Conditions (i), (ii), (iii)-dyadic, (iv), (v) for every lambda in `lambdas`.
pub fn cell_series(map: &CircleHomeomorphism, lambdas: &[f64]) -> Vec<Vec<Series>> {
    let cfg = ClassifierConfig::default();
    let disk_j = *DISK_LEVELS.end();
    let dy_j = *DYADIC_LEVELS.end();
    let samples = HarmonicExtension::with_default_nodes(map.clone()).unwrap().sample_cells(disk_j).unwrap();
    lambdas
        .iter()
        .map(|&lambda| {
            let i = samples.energy_i(lambda).unwrap();
            let ii = samples.energy_ii(lambda).unwrap();
            let log = logkernel::log_energy_dyadic(map, lambda, dy_j).unwrap();
            let iii = log.as_report(&cfg);
            let iv = energy::dyadic_energy_iv(map, lambda, dy_j).unwrap();
            let v = energy::dyadic_energy_v(map, lambda, dy_j).unwrap();
            vec![
                series(&i, 0.0, &DISK_LEVELS),
                series(&ii, 0.0, &DISK_LEVELS),
                series(&iii, log.part_i, &DYADIC_LEVELS),
                series(&iv, 0.0, &DYADIC_LEVELS),
                series(&v, 0.0, &DYADIC_LEVELS),
            ]
        })
        .collect()
}

/// `"a/b" -> [min, max]` of `S_J(a) / S_J'(b)`: equal `J` within a level
/// family, all `(J, J')` combinations across families.
pub fn ratio_windows(cell: &[Series]) -> BTreeMap<String, [f64; 2]> {
    let mut out = BTreeMap::new();
    for (ai, a) in cell.iter().enumerate() {
        for b in &cell[ai + 1..] {
            let same_family = a.sums[0].0 == b.sums[0].0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &(ja, sa) in &a.sums {
                for &(jb, sb) in &b.sums {
                    if same_family && ja != jb {
                        continue;
                    }
                    let r = sa / sb;
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
            out.insert(format!("{}/{}", a.tag, b.tag), [lo, hi]);
        }
    }
    out
}

/// Tanh-sinh quadrature on `[a, b]`; tolerates integrable endpoint singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let r = 0.5 * (b - a);
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    for k in -(6 * 64)..=(6 * 64) {
        let t = k as f64 * h;
        let u = 0.5 * std::f64::consts::PI * t.sinh();
        let w = 0.5 * std::f64::consts::PI * t.cosh() / u.cosh().powi(2);
        // Distance to the nearer endpoint, computed without cancellation.
        let d = 1.0 / (u.abs().exp() * u.cosh());
        if d * r == 0.0 || w == 0.0 {
            continue;
        }
        let xv = if t >= 0.0 { b - r * d } else { a + r * d };
        let fx = f(xv);
        if fx.is_finite() {
            sum += w * fx;
        }
    }
    sum * h * r
}
