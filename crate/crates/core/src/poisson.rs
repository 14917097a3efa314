//! Poisson extension `h = P[phi]`, its Wirtinger derivatives, the Stieltjes
//! bound on `|h_z|`, and the disk energies of conditions (i) and (ii) over the
//! Whitney cells.

use std::f64::consts::{E, TAU};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle_map::CircleHomeomorphism;
use crate::dyadic::{whitney_cell_of, DyadicArc};
use crate::energy::{ClassifierConfig, ConditionTag, EnergyReport};
use crate::error::{check_lambda, Error, Result};
use crate::numeric::{gauss_legendre, pow_lambda, CompensatedSum};

/// Points with `|z| > 1 - 2^{-20}` are rejected.
pub const BARRIER_RADIUS: f64 = 1.0 - 1.0 / (1u64 << 20) as f64;
pub const DEFAULT_BOUNDARY_NODES: usize = 1 << 14;
pub const DEFAULT_CELL_ORDER: usize = 4;
pub const MAX_DISK_LEVEL: u32 = 12;

#[derive(Clone, Debug)]
pub struct HarmonicExtension {
    map: CircleHomeomorphism,
    zeta: Vec<Complex64>,
    values: Vec<Complex64>,
    masses: Vec<f64>,
    cell_order: usize,
}

/// Wirtinger derivatives at a point; `norm = |h_z| + |h_zbar|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativePair {
    pub h_z: Complex64,
    pub h_zbar: Complex64,
    pub norm: f64,
}

impl DerivativePair {
    fn new(h_z: Complex64, h_zbar: Complex64) -> Self {
        Self { h_z, h_zbar, norm: dh_norm(h_z, h_zbar) }
    }

    pub fn jacobian(&self) -> f64 {
        self.h_z.norm_sqr() - self.h_zbar.norm_sqr()
    }
}

/// The single definition of `|Dh|`.
#[inline]
pub fn dh_norm(h_z: Complex64, h_zbar: Complex64) -> f64 {
    h_z.norm() + h_zbar.norm()
}

fn check_point(z: Complex64) -> Result<()> {
    if !(z.norm() <= BARRIER_RADIUS) {
        return Err(Error::Proximity { re: z.re, im: z.im });
    }
    Ok(())
}

impl HarmonicExtension {
    /// Midpoint boundary rule with `n_b` nodes.
    pub fn new(map: CircleHomeomorphism, n_b: usize) -> Result<Self> {
        if n_b < 16 {
            return Err(Error::domain("HarmonicExtension::new", format!("N_b = {n_b} below 16")));
        }
        if n_b > 1 << 22 {
            return Err(Error::resource("HarmonicExtension::new", format!("N_b = {n_b} exceeds 2^22")));
        }
        let nf = n_b as f64;
        let zeta = (0..n_b).map(|m| Complex64::from_polar(1.0, TAU * (m as f64 + 0.5) / nf)).collect();
        let values = (0..n_b).map(|m| map.boundary_value(TAU * (m as f64 + 0.5) / nf)).collect();
        let masses = (0..n_b)
            .map(|m| map.lift(TAU * (m + 1) as f64 / nf) - map.lift(TAU * m as f64 / nf))
            .collect();
        Ok(Self { map, zeta, values, masses, cell_order: DEFAULT_CELL_ORDER })
    }

    pub fn with_default_nodes(map: CircleHomeomorphism) -> Result<Self> {
        Self::new(map, DEFAULT_BOUNDARY_NODES)
    }

    pub fn with_cell_order(mut self, order: usize) -> Self {
        self.cell_order = order.max(1);
        self
    }

    pub fn map(&self) -> &CircleHomeomorphism {
        &self.map
    }

    pub fn boundary_nodes(&self) -> usize {
        self.zeta.len()
    }

    pub fn cell_order(&self) -> usize {
        self.cell_order
    }

    fn extend_unchecked(&self, z: Complex64) -> Complex64 {
        let s = 1.0 - z.norm_sqr();
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (zeta, phi) in self.zeta.iter().zip(&self.values) {
            let v = phi * (s / (z - zeta).norm_sqr());
            re.add(v.re);
            im.add(v.im);
        }
        Complex64::new(re.value(), im.value()) / self.zeta.len() as f64
    }

    /// `h(z) = (1/2pi) int (1 - |z|^2) / |z - zeta|^2 phi(zeta) |d zeta|`.
    pub fn extend(&self, z: Complex64) -> Result<Complex64> {
        check_point(z)?;
        Ok(self.extend_unchecked(z))
    }

    fn derivative_unchecked(&self, z: Complex64) -> DerivativePair {
        // d/dz of the Poisson kernel is zeta / (zeta - z)^2; d/dzbar is its conjugate.
        let mut hz = [CompensatedSum::new(), CompensatedSum::new()];
        let mut hzb = [CompensatedSum::new(), CompensatedSum::new()];
        for (zeta, phi) in self.zeta.iter().zip(&self.values) {
            let d = zeta - z;
            let k = zeta / (d * d);
            let a = k * phi;
            let b = k.conj() * phi;
            hz[0].add(a.re);
            hz[1].add(a.im);
            hzb[0].add(b.re);
            hzb[1].add(b.im);
        }
        let n = self.zeta.len() as f64;
        DerivativePair::new(
            Complex64::new(hz[0].value(), hz[1].value()) / n,
            Complex64::new(hzb[0].value(), hzb[1].value()) / n,
        )
    }

    pub fn derivative(&self, z: Complex64) -> Result<DerivativePair> {
        check_point(z)?;
        Ok(self.derivative_unchecked(z))
    }

    /// `(1/2pi) int d mu_f(theta) / |z - e^{i theta}|` as a Stieltjes sum.
    pub fn derivative_bound(&self, z: Complex64) -> Result<f64> {
        check_point(z)?;
        let s = self
            .zeta
            .iter()
            .zip(&self.masses)
            .map(|(zeta, m)| m / (z - zeta).norm())
            .collect::<CompensatedSum>()
            .value();
        Ok(s / TAU)
    }

    /// Samples `|Dh|` on every Whitney cell up to level `levels`.
    pub fn sample_cells(&self, levels: u32) -> Result<CellSamples> {
        if levels > MAX_DISK_LEVEL {
            return Err(Error::resource("sample_cells", format!("J = {levels} exceeds {MAX_DISK_LEVEL}")));
        }
        let (gx, gw) = gauss_legendre(self.cell_order);
        let mut per_level = Vec::with_capacity(levels as usize);
        for j in 1..=levels {
            let arcs: Vec<DyadicArc> = DyadicArc::level(j)?.collect();
            let nodes: Vec<Vec<Node>> = arcs
                .par_iter()
                .map(|arc| {
                    let q = whitney_cell_of(*arc);
                    let hr = 0.5 * (q.r_outer - q.r_inner);
                    let cr = 0.5 * (q.r_outer + q.r_inner);
                    let ht = 0.5 * (q.theta_end - q.theta_start);
                    let ct = 0.5 * (q.theta_end + q.theta_start);
                    let mut out = Vec::with_capacity(gx.len() * gx.len());
                    for (xr, wr) in gx.iter().zip(&gw) {
                        let r = cr + hr * xr;
                        for (xt, wt) in gx.iter().zip(&gw) {
                            let theta = ct + ht * xt;
                            let z = Complex64::from_polar(r, theta);
                            let d = self.derivative_unchecked(z);
                            out.push(Node { weight: wr * wt * hr * ht * r, radius: r, dh: d.norm });
                        }
                    }
                    out
                })
                .collect();
            per_level.push(nodes);
        }
        Ok(CellSamples { per_level })
    }

    pub fn energy_i(&self, lambda: f64, levels: u32) -> Result<EnergyReport> {
        check_lambda("energy_i", lambda)?;
        self.sample_cells(levels)?.energy_i(lambda)
    }

    pub fn energy_ii(&self, lambda: f64, levels: u32) -> Result<EnergyReport> {
        check_lambda("energy_ii", lambda)?;
        self.sample_cells(levels)?.energy_ii(lambda)
    }

    /// Writes `r,theta,h_z_abs,h_zbar_abs` for every point of a polar grid.
    pub fn write_raster_csv<W: Write>(&self, radii: &[f64], thetas: &[f64], mut out: W) -> Result<()> {
        writeln!(out, "r,theta,h_z_abs,h_zbar_abs")?;
        for &r in radii {
            let rows: Vec<Result<DerivativePair>> =
                thetas.par_iter().map(|&t| self.derivative(Complex64::from_polar(r, t))).collect();
            for (&t, d) in thetas.iter().zip(rows) {
                let d = d?;
                writeln!(out, "{r},{t},{},{}", d.h_z.norm(), d.h_zbar.norm())?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    weight: f64,
    radius: f64,
    dh: f64,
}

/// `|Dh|` at the Gauss nodes of every Whitney cell, reusable across `lambda`.
#[derive(Clone, Debug)]
pub struct CellSamples {
    per_level: Vec<Vec<Vec<Node>>>,
}

impl CellSamples {
    pub fn levels(&self) -> u32 {
        self.per_level.len() as u32
    }

    fn level_sums<F: Fn(u32, &Node) -> f64 + Sync>(&self, integrand: F) -> Vec<f64> {
        self.per_level
            .iter()
            .enumerate()
            .map(|(i, cells)| {
                let j = (i + 1) as u32;
                cells
                    .iter()
                    .flat_map(|c| c.iter())
                    .map(|n| n.weight * integrand(j, n))
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect()
    }

    /// Sum of the quadrature weights, level by level (cell areas).
    pub fn level_areas(&self) -> Vec<f64> {
        self.level_sums(|_, _| 1.0)
    }

    /// Maximum of `|Dh|` over the sampled nodes.
    pub fn max_dh(&self) -> f64 {
        self.per_level.iter().flatten().flatten().map(|n| n.dh).fold(0.0, f64::max)
    }

    /// Condition (i): `int Phi(|Dh|)`, `Phi(t) = t^2 log^lambda(e + t)`.
    pub fn energy_i(&self, lambda: f64) -> Result<EnergyReport> {
        check_lambda("energy_i", lambda)?;
        let terms = self.level_sums(|_, n| n.dh * n.dh * pow_lambda((E + n.dh).ln(), lambda));
        finite_report(ConditionTag::I, lambda, terms)
    }

    /// Condition (ii): `int |Dh|^2 log^lambda(2 / (1 - |z|))`.
    pub fn energy_ii(&self, lambda: f64) -> Result<EnergyReport> {
        check_lambda("energy_ii", lambda)?;
        let (lo, hi) = self.weight_comparability();
        if !(lo >= std::f64::consts::LN_2 * (1.0 - 1e-12) && hi <= 2.0 * std::f64::consts::LN_2 * (1.0 + 1e-12)) {
            return Err(Error::Structural {
                op: "energy_ii",
                detail: format!("log(2/(1-r)) / j left [log 2, 2 log 2]: [{lo}, {hi}]"),
            });
        }
        let terms = self.level_sums(|_, n| n.dh * n.dh * pow_lambda(boundary_weight(n.radius), lambda));
        finite_report(ConditionTag::Ii, lambda, terms)
    }

    /// Range of `log(2/(1-r)) / j` over all nodes.
    pub fn weight_comparability(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (i, cells) in self.per_level.iter().enumerate() {
            let j = (i + 1) as f64;
            for n in cells.iter().flatten() {
                let ratio = boundary_weight(n.radius) / j;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        (lo, hi)
    }
}

#[inline]
fn boundary_weight(r: f64) -> f64 {
    (2.0 / (1.0 - r)).ln()
}

fn finite_report(tag: ConditionTag, lambda: f64, terms: Vec<f64>) -> Result<EnergyReport> {
    if let Some(j) = terms.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFinite { op: "disk energy", detail: format!("level {} term is {}", j + 1, terms[j]) });
    }
    Ok(EnergyReport::from_terms(tag, lambda, terms, &ClassifierConfig::default()))
}

pub fn energy_i(ext: &HarmonicExtension, lambda: f64, levels: u32) -> Result<EnergyReport> {
    ext.energy_i(lambda, levels)
}

pub fn energy_ii(ext: &HarmonicExtension, lambda: f64, levels: u32) -> Result<EnergyReport> {
    ext.energy_ii(lambda, levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_map::smooth_catalog;
    use std::f64::consts::PI;

    fn identity_ext(n: usize) -> HarmonicExtension {
        HarmonicExtension::new(CircleHomeomorphism::identity(), n).unwrap()
    }

    #[test]
    fn identity_extension_is_identity() {
        let ext = identity_ext(1 << 12);
        for z in [Complex64::new(0.3, 0.4), Complex64::new(-0.9, 0.1), Complex64::new(0.0, -0.98)] {
            assert!((ext.extend(z).unwrap() - z).norm() < 1e-9);
            let d = ext.derivative(z).unwrap();
            assert!((d.h_z - 1.0).norm() < 1e-9 && d.h_zbar.norm() < 1e-9);
        }
    }

    #[test]
    fn center_value_is_boundary_average() {
        for (name, map) in smooth_catalog() {
            let ext = HarmonicExtension::new(map.clone(), 4096).unwrap();
            let avg: Complex64 = (0..4096)
                .map(|m| map.boundary_value(TAU * (m as f64 + 0.5) / 4096.0))
                .sum::<Complex64>()
                / 4096.0;
            assert!((ext.extend(Complex64::new(0.0, 0.0)).unwrap() - avg).norm() < 1e-12, "{name}");
            assert!((ext.derivative_bound(Complex64::new(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn barrier() {
        let ext = identity_ext(64);
        assert!(matches!(ext.extend(Complex64::new(1.0, 0.0)), Err(Error::Proximity { .. })));
        assert!(ext.derivative(Complex64::new(0.0, BARRIER_RADIUS)).is_ok());
        assert!(ext.derivative_bound(Complex64::new(0.0, 0.9999999)).is_err());
        assert!(HarmonicExtension::new(CircleHomeomorphism::identity(), 8).is_err());
    }

    #[test]
    fn rotated_target_rotates_derivative() {
        let map = CircleHomeomorphism::power(2.0).unwrap();
        let a = HarmonicExtension::new(map.clone(), 2048).unwrap();
        let b = HarmonicExtension::new(map.post_rotated(0.7), 2048).unwrap();
        let z = Complex64::new(0.2, -0.5);
        let (da, db) = (a.derivative(z).unwrap(), b.derivative(z).unwrap());
        let rot = Complex64::from_polar(1.0, 0.7);
        assert!((da.h_z * rot - db.h_z).norm() < 1e-12);
        assert!((da.norm - db.norm).abs() < 1e-12);
    }

    #[test]
    fn finite_difference_agreement_at_half_i() {
        let z = Complex64::new(0.0, 0.5);
        let h = 1e-5;
        for (name, map) in smooth_catalog() {
            let ext = HarmonicExtension::new(map, 4096).unwrap();
            let dx = (ext.extend(z + h).unwrap() - ext.extend(z - h).unwrap()) / (2.0 * h);
            let dy = (ext.extend(z + Complex64::i() * h).unwrap() - ext.extend(z - Complex64::i() * h).unwrap()) / (2.0 * h);
            let fd_z = 0.5 * (dx - Complex64::i() * dy);
            let fd_zbar = 0.5 * (dx + Complex64::i() * dy);
            let d = ext.derivative(z).unwrap();
            assert!((d.h_z - fd_z).norm() < 1e-6, "{name}");
            assert!((d.h_zbar - fd_zbar).norm() < 1e-6, "{name}");
        }
    }

    #[test]
    fn jacobian_positive_for_smooth_families() {
        for (name, map) in smooth_catalog() {
            let ext = HarmonicExtension::new(map, 4096).unwrap();
            for k in 0..12 {
                let z = Complex64::from_polar(0.1 + 0.07 * k as f64, 0.5 * k as f64);
                assert!(ext.derivative(z).unwrap().jacobian() > 0.0, "{name} {z}");
            }
        }
    }

    #[test]
    fn identity_energies_are_areas() {
        let ext = identity_ext(1 << 12);
        let samples = ext.sample_cells(6).unwrap();
        let area = PI * (1.0 - 1.0 / 64.0f64).powi(2);
        let e0 = samples.energy_i(0.0).unwrap();
        assert!((e0.total - area).abs() < 1e-10 * area);
        let e1 = samples.energy_i(1.0).unwrap();
        assert!((e1.total - area * (E + 1.0).ln()).abs() < 1e-9 * area);
        assert_eq!(samples.energy_ii(0.0).unwrap().terms, e0.terms);
        let levels: f64 = samples.level_areas().iter().sum();
        assert!((levels - area).abs() < 1e-12);
    }

    #[test]
    fn boundary_weight_range() {
        let samples = identity_ext(256).sample_cells(8).unwrap();
        let (lo, hi) = samples.weight_comparability();
        assert!(lo >= std::f64::consts::LN_2 && hi <= 2.0 * std::f64::consts::LN_2);
        // Center radius of Q_{j,k}: log(2/(1-r)) = log(2^{j+2}/3).
        for j in 1..12 {
            let r = 1.0 - 3.0 * (-(j as f64) - 1.0).exp2();
            assert!((boundary_weight(r) - ((j + 2) as f64 * std::f64::consts::LN_2 - 3f64.ln())).abs() < 1e-12);
        }
    }

    #[test]
    fn level_guard() {
        assert!(matches!(identity_ext(64).sample_cells(13), Err(Error::Resource { .. })));
        assert!(identity_ext(64).energy_i(-1.0, 3).is_err());
    }

    #[test]
    fn raster_has_header_and_rows() {
        let mut out = Vec::new();
        identity_ext(256).write_raster_csv(&[0.2, 0.5], &[0.0, 1.0, 2.0], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("r,theta,h_z_abs,h_zbar_abs"));
    }
}
