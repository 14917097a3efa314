use std::f64::consts::{LN_2, PI, TAU};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::chordarc::{self, PairSampler, PolygonDomain};
use crate::circle_map::{catalog, smooth_catalog, CircleHomeomorphism};
use crate::dyadic::{self, DyadicArc};
use crate::energy::{self, Classification};
use crate::error::{Error, Result};
use crate::logkernel;
use crate::orlicz::{self, ComplementaryPair, GridField, LogSquare, NFunction};
use crate::poisson::{self, HarmonicExtension};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Dyadic,
    Energy,
    Logkernel,
    Poisson,
    Orlicz,
    Chordarc,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 6] =
        [Suite::Dyadic, Suite::Energy, Suite::Logkernel, Suite::Poisson, Suite::Orlicz, Suite::Chordarc];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Dyadic => "dyadic",
            Suite::Energy => "energy",
            Suite::Logkernel => "logkernel",
            Suite::Poisson => "poisson",
            Suite::Orlicz => "orlicz",
            Suite::Chordarc => "chordarc",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::MODULES
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown suite '{s}' (expected dyadic, energy, logkernel, poisson, orlicz, chordarc or all)"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub boundary_nodes: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { boundary_nodes: poisson::DEFAULT_BOUNDARY_NODES, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}::{} ({})", self.suite, self.name, self.detail)
    }
}

struct Checks {
    suite: &'static str,
    out: Vec<CheckOutcome>,
}

impl Checks {
    fn new(suite: Suite) -> Self {
        Self { suite: suite.as_str(), out: Vec::new() }
    }

    /// Records `f`; an error counts as a failure.
    fn run(&mut self, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.out.push(CheckOutcome { suite: self.suite, name, passed, detail });
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<CheckOutcome> {
    match suite {
        Suite::All => Suite::MODULES.iter().flat_map(|s| run_suite(*s, opts)).collect(),
        Suite::Dyadic => dyadic_suite(),
        Suite::Energy => energy_suite(),
        Suite::Logkernel => logkernel_suite(),
        Suite::Poisson => poisson_suite(opts),
        Suite::Orlicz => orlicz_suite(),
        Suite::Chordarc => chordarc_suite(opts),
    }
}

pub fn seed_4_7_check() -> Result<bool> {
    let d = dyadic::annular_decomposition(&DyadicArc::new(4, 7)?)?;
    let mut got: Vec<(u32, u64)> = d.arcs().map(|a| (a.level_index(), a.index())).collect();
    got.sort();
    let mut want = vec![(4, 7), (4, 8), (3, 3), (3, 5), (3, 6), (2, 1), (2, 4)];
    want.sort();
    Ok(got == want)
}

/// Violations of `#inducers <= 3 * 2^(j - n)` over targets of level `n <= max_n`
/// and seed levels `j <= max_j`.
pub fn counting_bound_violations(max_j: u32, max_n: u32) -> Result<usize> {
    let mut violations = 0;
    for j in 2..=max_j {
        for (arc, count) in dyadic::inducer_counts(j)? {
            let n = arc.level_index();
            if n <= max_n && count > 3usize << (j - n) {
                violations += 1;
            }
        }
    }
    Ok(violations)
}

fn dyadic_suite() -> Vec<CheckOutcome> {
    let mut c = Checks::new(Suite::Dyadic);
    c.run("seed_4_7_exact_set", || Ok((seed_4_7_check()?, "P(Gamma(4,7))".into())));
    c.run("counting_bound", || {
        let v = counting_bound_violations(12, 6)?;
        Ok((v == 0, format!("{v} violations, j <= 12, n <= 6")))
    });
    c.run("exact_cover", || {
        let mut worst = 0.0f64;
        for j in 2..=10 {
            for arc in DyadicArc::level(j)? {
                let d = dyadic::annular_decomposition(&arc)?;
                worst = worst.max((d.total_measure() - TAU).abs());
            }
        }
        Ok((worst < 1e-12, format!("max |measure - 2pi| = {worst:e}")))
    });
    c.run("brother_parent", || {
        let mut ok = true;
        for j in 1..=8 {
            for a in DyadicArc::level(j)? {
                ok &= a.brother().brother() == a && a.brother().parent() == a.parent();
            }
        }
        Ok((ok, "levels 1..8".into()))
    });
    c.run("whitney_constant", || {
        let w = dyadic::whitney_constant(20);
        Ok((w.is_finite() && w >= 1.0 && (w - dyadic::whitney_constant(10)).abs() < 1.0, format!("C = {w}")))
    });
    c.out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn energy_suite() -> Vec<CheckOutcome> {
    let mut c = Checks::new(Suite::Energy);
    let id = CircleHomeomorphism::identity();
    c.run("identity_iv_closed_form", || {
        let r = energy::dyadic_energy_iv(&id, 0.0, 14)?;
        let want = 4.0 * PI * PI * (1.0 - (-14f64).exp2());
        let e = rel(r.total, want);
        Ok((e < 1e-12, format!("relative error {e:e}")))
    });
    c.run("rotation_invariance", || {
        let a = energy::dyadic_energy_v(&CircleHomeomorphism::rotation(1.0)?, 1.0, 14)?;
        let b = energy::dyadic_energy_v(&id, 1.0, 14)?;
        let e = rel(a.total, b.total);
        Ok((e < 1e-12, format!("relative difference {e:e}")))
    });
    c.run("partition_and_bound", || {
        let mut worst = 0.0f64;
        let mut bound_ok = true;
        for (_, map) in catalog() {
            for lambda in [-0.5, 0.0, 1.0] {
                let (iv, v) = energy::comparability_split(&map, lambda, 14)?;
                for s in [iv, v] {
                    worst = worst.max(rel(s.p1 + s.p2, s.total));
                    bound_ok &= s.p2_within_bound();
                }
            }
        }
        Ok((worst < 1e-14 && bound_ok, format!("max partition error {worst:e}")))
    });
    c.run("monotone_in_lambda", || {
        let map = CircleHomeomorphism::power(3.0)?;
        let mut prev: Option<Vec<f64>> = None;
        let mut ok = true;
        for lambda in [-0.5, 0.0, 1.0, 2.0] {
            let s = energy::dyadic_energy_iv(&map, lambda, 14)?.partial_sums;
            if let Some(p) = &prev {
                ok &= p.iter().zip(&s).all(|(a, b)| b >= a);
            }
            prev = Some(s);
        }
        Ok((ok, "power p = 3, iv".into()))
    });
    c.run("identity_convergent", || {
        let r = energy::dyadic_energy_v(&id, 2.0, 14)?;
        Ok((r.classification == Some(Classification::Convergent), format!("{:?}", r.classification)))
    });
    c.out
}

/// `2 pi * 4 Cl_2(pi / 3)`: the identity value of `int int |log|x - y|| |dx||dy|`.
pub fn identity_log_integral() -> f64 {
    // Cl_2(pi/3) = sum sin(k pi/3) / k^2.
    let cl: f64 = (1..2_000_000u64).map(|k| (k as f64 * PI / 3.0).sin() / (k as f64 * k as f64)).sum();
    TAU * 4.0 * cl
}

fn logkernel_suite() -> Vec<CheckOutcome> {
    let mut c = Checks::new(Suite::Logkernel);
    let id = CircleHomeomorphism::identity();
    c.run("sublevel_measure_identity", || {
        let mut worst = 0.0f64;
        for t in [0.01, 0.3, 1.0, 1.7, 1.99] {
            for xi in [0.0, 1.0, 4.0] {
                let m = logkernel::sublevel_arc_measure(&id, xi, t)?;
                worst = worst.max((m - 4.0 * (t / 2.0).asin()).abs());
            }
        }
        Ok((worst < 1e-9, format!("max error {worst:e}")))
    });
    c.run("identity_direct", || {
        let r = logkernel::log_energy_direct(&id, 0.0, 1024)?;
        let e = rel(r.corrected_total(), identity_log_integral());
        Ok((e < 1e-3, format!("relative error {e:e} at 1024 cells")))
    });
    c.run("identity_dyadic_bands", || {
        let r = logkernel::log_energy_dyadic(&id, 0.0, 10)?;
        let want: f64 = (1..=10).map(|j| TAU * 4.0 * (-(j as f64) - 1.0).exp2().asin() * LN_2).sum();
        let e = rel(r.part_ii, want);
        Ok((e < 1e-12, format!("relative error {e:e}")))
    });
    c.run("rotation_invariance", || {
        let a = logkernel::log_energy_direct(&CircleHomeomorphism::rotation(0.8)?, 1.0, 256)?;
        let b = logkernel::log_energy_direct(&id, 1.0, 256)?;
        let e = rel(a.total, b.total);
        Ok((e < 1e-12, format!("relative difference {e:e}")))
    });
    c.run("nonnegative_nondecreasing", || {
        let mut ok = true;
        for (_, map) in catalog() {
            let r = logkernel::log_energy_dyadic(&map, 1.0, 12)?;
            ok &= r.level_terms.iter().all(|&t| t >= 0.0) && r.part_i >= 0.0;
        }
        Ok((ok, "catalog, lambda = 1".into()))
    });
    c.out
}

/// `n` points filling the disk of radius `r_max` (sunflower layout).
pub fn disk_points(n: usize, r_max: f64) -> Vec<Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n).map(|i| Complex64::from_polar(r_max * ((i as f64 + 0.5) / n as f64).sqrt(), golden * i as f64)).collect()
}

/// Central differences of `h` at `z` with step `h`: `(h_z, h_zbar)`.
pub fn finite_difference(ext: &HarmonicExtension, z: Complex64, step: f64) -> Result<(Complex64, Complex64)> {
    let dx = (ext.extend(z + step)? - ext.extend(z - step)?) / (2.0 * step);
    let i = Complex64::i();
    let dy = (ext.extend(z + i * step)? - ext.extend(z - i * step)?) / (2.0 * step);
    Ok(((dx - i * dy) * 0.5, (dx + i * dy) * 0.5))
}

fn poisson_suite(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    let mut c = Checks::new(Suite::Poisson);
    let n_b = opts.boundary_nodes;
    c.run("identity_reproduction", || {
        let ext = HarmonicExtension::new(CircleHomeomorphism::identity(), n_b)?;
        let mut worst = 0.0f64;
        for z in disk_points(1000, 0.99) {
            worst = worst.max((ext.extend(z)? - z).norm());
        }
        Ok((worst < 1e-9, format!("max |h(z) - z| = {worst:e}, N_b = {n_b}")))
    });
    c.run("finite_difference_agreement", || {
        let mut worst = 0.0f64;
        for (_, map) in smooth_catalog() {
            let ext = HarmonicExtension::new(map, n_b)?;
            for z in disk_points(100, 0.9) {
                let d = ext.derivative(z)?;
                let (fz, fzb) = finite_difference(&ext, z, 1e-5)?;
                worst = worst.max((d.h_z - fz).norm()).max((d.h_zbar - fzb).norm());
            }
        }
        Ok((worst < 1e-6, format!("max deviation {worst:e}")))
    });
    c.run("stieltjes_bound", || {
        let mut worst = f64::INFINITY;
        for (_, map) in catalog() {
            let ext = HarmonicExtension::new(map, n_b)?;
            for z in disk_points(100, 0.95) {
                worst = worst.min(ext.derivative_bound(z)? - ext.derivative(z)?.h_z.norm());
            }
        }
        Ok((worst >= -1e-6, format!("min bound - |h_z| = {worst:e}")))
    });
    c.run("identity_energy_i", || {
        let ext = HarmonicExtension::new(CircleHomeomorphism::identity(), n_b)?;
        let r = ext.energy_i(0.0, 8)?;
        let want = PI * (1.0 - (-8f64).exp2()).powi(2);
        let e = rel(r.total, want);
        Ok((e < 1e-6, format!("relative error {e:e} at J = 8")))
    });
    c.out
}

fn orlicz_suite() -> Vec<CheckOutcome> {
    let mut c = Checks::new(Suite::Orlicz);
    let grid = orlicz::log_grid(1e-4, 1e4, 161);
    c.run("delta2_square", || {
        let f = LogSquare::new(0.0)?;
        let ok = grid.iter().all(|&t| f.eval(2.0 * t) / f.eval(t) == 4.0);
        Ok((ok, format!("{} grid points", grid.len())))
    });
    c.run("kr_criterion", || {
        let mut ok = true;
        for lambda in [0.0, 1.0, 2.0, -0.5, -0.9] {
            let l = orlicz::kr_exponent(lambda);
            ok &= orlicz::check_kr_criterion(&LogSquare::new(lambda)?, l, &grid)?;
        }
        Ok((ok, "lambda in {0, 1, 2, -0.5, -0.9}".into()))
    });
    c.run("young_inequality", || {
        let pts = orlicz::log_grid(1e-3, 1e3, 21);
        let mut worst = f64::INFINITY;
        for lambda in [-0.5, 0.0, 1.0, 2.0] {
            let pair = ComplementaryPair::new(LogSquare::new(lambda)?);
            let psi: Vec<f64> = pts.iter().map(|&t| pair.complementary(t)).collect::<Result<_>>()?;
            for &s in &pts {
                let phi = pair.primal().eval(s);
                for (&t, &q) in pts.iter().zip(&psi) {
                    let slack = (phi + q) * (1.0 + 1e-8) - s * t;
                    worst = worst.min(slack / (s * t));
                }
            }
        }
        Ok((worst >= 0.0, format!("min relative slack {worst:e}")))
    });
    c.run("maximal_constant_field", || {
        let f = GridField::constant(64, 1.0, 2.5)?;
        let m = orlicz::maximal_field(&f, &f.default_radii())?;
        let worst = m.values().iter().map(|v| (v - 2.5).abs()).fold(0.0, f64::max);
        Ok((worst < 1e-12, format!("max |M c - c| = {worst:e}")))
    });
    c.run("maximal_dominates", || {
        let f = GridField::from_fn(64, 1.0, |z| (-4.0 * z.norm_sqr()).exp())?;
        let m = orlicz::maximal_field(&f, &f.default_radii())?;
        let ok = m.values().iter().zip(f.values()).all(|(a, b)| a >= &(b * (1.0 - 1e-12)));
        Ok((ok, "M f >= f".into()))
    });
    c.out
}

fn chordarc_suite(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    let mut c = Checks::new(Suite::Chordarc);
    let sampler = PairSampler::new(opts.seed);
    c.run("square_examples", || {
        let s = chordarc::regular_polygon(4, 1.0)?;
        let a = s.point(0, 0.5)?;
        let b = s.point(1, 0.5)?;
        let side = (s.vertices()[1] - s.vertices()[0]).norm();
        let ok = (s.boundary_arc_length(&a, &b) - side).abs() < 1e-12
            && (s.boundary_arc_length(&s.vertex_point(0), &s.vertex_point(2)) - 2.0 * side).abs() < 1e-12
            && s.internal_distance(&a, &b) == (a.point - b.point).norm();
        Ok((ok, "arc length and chord on the square".into()))
    });
    c.run("l_shape_geodesic", || {
        let v = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
        let l = PolygonDomain::new(v.iter().map(|&(x, y)| Complex64::new(x, y)).collect())?;
        let d = l.internal_distance(&l.vertex_point(2), &l.vertex_point(4));
        Ok(((d - 2.0).abs() < 1e-12, format!("lambda = {d}")))
    });
    c.run("regular_256_gon", || {
        let p = chordarc::regular_polygon(256, 1.0)?;
        let a = chordarc::chordarc_constant(&p, &sampler)?;
        let b = chordarc::internal_chordarc_constant(&p, &sampler)?;
        let ok = (a - b).abs() < 1e-9 && rel(a, PI / 2.0) < 0.02;
        Ok((ok, format!("chord-arc {a}, internal {b}")))
    });
    c.run("cusp_contrast", || {
        let p = chordarc::cusp_domain(64)?;
        let a = chordarc::chordarc_constant(&p, &sampler)?;
        let b = chordarc::internal_chordarc_constant(&p, &sampler)?;
        Ok((a > 50.0 && b < 10.0, format!("chord-arc {a:.2}, internal {b:.3}")))
    });
    c.run("metric_bounds", || {
        let p = chordarc::cusp_domain(32)?;
        let pairs = sampler.sample(&p)?;
        let mut ok = true;
        for w in pairs.chunks_exact(3).take(200) {
            let (a, b, x) = (w[0].0, w[1].1, w[2].0);
            let lab = p.internal_distance(&a, &b);
            ok &= lab >= (a.point - b.point).norm() - 1e-12;
            ok &= lab <= p.boundary_arc_length(&a, &b) * (1.0 + 1e-6) + 1e-12;
            ok &= lab <= p.internal_distance(&a, &x) + p.internal_distance(&x, &b) + 1e-9;
        }
        Ok((ok, "chord <= lambda <= arc, triangle inequality".into()))
    });
    c.out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert_eq!("chordarc".parse::<Suite>().unwrap(), Suite::Chordarc);
        assert!("poisson2".parse::<Suite>().unwrap_err().is_validation());
    }

    #[test]
    fn identity_log_integral_value() {
        let v = identity_log_integral();
        assert!((v - 25.5082).abs() < 1e-3, "{v}");
    }

    #[test]
    fn fast_suites_pass() {
        for suite in [Suite::Dyadic, Suite::Energy, Suite::Logkernel, Suite::Orlicz, Suite::Chordarc] {
            for o in run_suite(suite, &VerifyOptions::default()) {
                assert!(o.passed, "{o}");
            }
        }
    }

    #[test]
    fn coarse_poisson_fails() {
        let opts = VerifyOptions { boundary_nodes: 1 << 8, seed: 0 };
        let out = run_suite(Suite::Poisson, &opts);
        assert!(out.iter().any(|o| !o.passed));
    }
}
