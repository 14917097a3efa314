//! N-functions, complementary functions, doubling diagnostics and a discrete
//! Hardy-Littlewood maximal operator on a square grid.

use std::f64::consts::E;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_lambda, Error, Result};
use crate::numeric::{pow_lambda, CompensatedSum};

/// A convex N-function `Phi(t) = int_0^t phi_N`, given with its density.
pub trait NFunction: Sync {
    fn eval(&self, t: f64) -> f64;
    /// Right-continuous increasing density `phi_N`, `phi_N(0) = 0`.
    fn density(&self, t: f64) -> f64;
}

/// `Phi(t) = t^2 log^lambda(e + t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogSquare {
    lambda: f64,
}

impl LogSquare {
    pub fn new(lambda: f64) -> Result<Self> {
        check_lambda("LogSquare::new", lambda)?;
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl NFunction for LogSquare {
    fn eval(&self, t: f64) -> f64 {
        t * t * pow_lambda((E + t).ln(), self.lambda)
    }

    fn density(&self, t: f64) -> f64 {
        let l = (E + t).ln();
        2.0 * t * pow_lambda(l, self.lambda) + self.lambda * t * t * pow_lambda(l, self.lambda - 1.0) / (E + t)
    }
}

pub fn phi_lambda(t: f64, lambda: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("phi_lambda", format!("t = {t} is negative")));
    }
    Ok(LogSquare::new(lambda)?.eval(t))
}

/// The complementary function `Psi(t) = int_0^t psi`, `psi(t) = sup{s : phi_N(s) <= t}`.
#[derive(Clone, Copy, Debug)]
pub struct ComplementaryPair<N> {
    primal: N,
    tolerance: f64,
}

impl<N: NFunction> ComplementaryPair<N> {
    pub fn new(primal: N) -> Self {
        Self { primal, tolerance: 1e-8 }
    }

    pub fn primal(&self) -> &N {
        &self.primal
    }

    /// Generalized inverse of the density by bracket doubling and bisection.
    pub fn psi(&self, t: f64) -> Result<f64> {
        const OP: &str = "complementary";
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain(OP, format!("t = {t} outside [0, inf)")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0f64;
        let mut steps = 0;
        while self.primal.density(hi) <= t {
            hi *= 2.0;
            steps += 1;
            if steps > 2000 || !hi.is_finite() {
                return Err(Error::Convergence { op: OP, detail: format!("density never exceeds {t}") });
            }
        }
        let mut lo = 0.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let d = self.primal.density(mid);
            if d.is_nan() {
                return Err(Error::Convergence { op: OP, detail: format!("density undefined at {mid}") });
            }
            if d <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if self.primal.density(lo) > t * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::Convergence { op: OP, detail: "density is not monotone".into() });
        }
        Ok(lo)
    }

    /// `Psi(t)` by adaptive Simpson quadrature of `psi`.
    pub fn complementary(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain("complementary", format!("t = {t} outside [0, inf)")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let f0 = 0.0;
        let fm = self.psi(0.5 * t)?;
        let f1 = self.psi(t)?;
        let whole = t / 6.0 * (f0 + 4.0 * fm + f1);
        let scale = (t * f1).max(f64::MIN_POSITIVE);
        self.simpson(0.0, t, f0, fm, f1, whole, self.tolerance * scale, 48)
    }

    #[allow(clippy::too_many_arguments)]
    fn simpson(&self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.psi(lm)?;
        let frm = self.psi(rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(self.simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + self.simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
}

/// The complementary function as an N-function in its own right.
impl<N: NFunction> NFunction for ComplementaryPair<N> {
    fn eval(&self, t: f64) -> f64 {
        self.complementary(t).unwrap_or(f64::NAN)
    }

    fn density(&self, t: f64) -> f64 {
        self.psi(t).unwrap_or(f64::NAN)
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `max_t Phi(2t) / Phi(t)` over the grid (`t = 0` is skipped).
pub fn delta2_constant<N: NFunction + ?Sized>(f: &N, grid: &[f64]) -> f64 {
    grid.iter().filter(|&&t| t > 0.0).map(|&t| f.eval(2.0 * t) / f.eval(t)).fold(0.0, f64::max)
}

/// `(min, max)` of `Phi(ct) / Phi(t)` over the grid.
pub fn doubling_bounds<N: NFunction + ?Sized>(f: &N, c: f64, grid: &[f64]) -> (f64, f64) {
    grid.iter().filter(|&&t| t > 0.0).map(|&t| f.eval(c * t) / f.eval(t)).fold((f64::INFINITY, 0.0), |acc, r| {
        (acc.0.min(r), acc.1.max(r))
    })
}

/// True iff `Phi(t) <= Phi(l t) / (2 l)` at every grid point.
pub fn check_kr_criterion<N: NFunction + ?Sized>(f: &N, l: f64, grid: &[f64]) -> Result<bool> {
    if !(l > 1.0) {
        return Err(Error::domain("check_kr_criterion", format!("l = {l} must exceed 1")));
    }
    Ok(grid.iter().all(|&t| f.eval(t) <= f.eval(l * t) / (2.0 * l)))
}

/// The criterion's `l` for `Phi = t^2 log^lambda(e + t)`.
pub fn kr_exponent(lambda: f64) -> f64 {
    if lambda >= 0.0 {
        2.0
    } else {
        2f64.powf(1.0 / (1.0 + lambda))
    }
}

/// Nonnegative samples at the centers of an `n x n` grid over `[-a, a]^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    n: usize,
    half_width: f64,
    values: Vec<f64>,
}

pub const DEFAULT_GRID_CELLS: usize = 512;
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 1.25;

impl GridField {
    pub fn from_values(n: usize, half_width: f64, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != n * n || !(half_width > 0.0) {
            return Err(Error::domain("GridField", "grid must be n x n with positive extent"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain("GridField", format!("sample {v} is not finite and nonnegative")));
        }
        Ok(Self { n, half_width, values })
    }

    pub fn from_fn<F: Fn(Complex64) -> f64 + Sync>(n: usize, half_width: f64, f: F) -> Result<Self> {
        let h = 2.0 * half_width / n as f64;
        let values = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (row, col) = (idx / n, idx % n);
                f(Complex64::new(-half_width + h * (col as f64 + 0.5), -half_width + h * (row as f64 + 0.5)))
            })
            .collect();
        Self::from_values(n, half_width, values)
    }

    pub fn constant(n: usize, half_width: f64, c: f64) -> Result<Self> {
        Self::from_values(n, half_width, vec![c; n * n])
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn cell_size(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size().powi(2)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }

    pub fn center(&self, row: usize, col: usize) -> Complex64 {
        let h = self.cell_size();
        Complex64::new(-self.half_width + h * (col as f64 + 0.5), -self.half_width + h * (row as f64 + 0.5))
    }

    /// Dyadic radii `R 2^{-m}`, `m = 0..=10`, with `R` the grid half-width.
    pub fn default_radii(&self) -> Vec<f64> {
        (0..=10).map(|m| 2.0 * self.half_width * (-(m as f64)).exp2()).collect()
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::domain("maximal_on_grid", "radii must be positive and finite"));
    }
    Ok(())
}

/// Discrete maximal value at an arbitrary point: the largest mean over
/// `B(x, r)`, `r` in `radii`, of the grid cells whose centers lie in the disk.
pub fn maximal_on_grid(field: &GridField, x: Complex64, radii: &[f64]) -> Result<f64> {
    check_radii(radii)?;
    let h = field.cell_size();
    let n = field.n as i64;
    // Fractional cell indices of x, snapped onto cell centers.
    let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
    let fx = snap((x.re + field.half_width) / h - 0.5);
    let fy = snap((x.im + field.half_width) / h - 0.5);
    let mut best = f64::NEG_INFINITY;
    let mut any = false;
    for &r in radii {
        let c0 = ((fx - r / h).floor() as i64).max(0);
        let c1 = ((fx + r / h).ceil() as i64).min(n - 1);
        let r0 = ((fy - r / h).floor() as i64).max(0);
        let r1 = ((fy + r / h).ceil() as i64).min(n - 1);
        let mut sum = CompensatedSum::new();
        let mut count = 0usize;
        for row in r0..=r1 {
            for col in c0..=c1 {
                let (dx, dy) = ((col as f64 - fx) * h, (row as f64 - fy) * h);
                if dx * dx + dy * dy <= r * r {
                    count += 1;
                    sum.add(field.get(row as usize, col as usize));
                }
            }
        }
        if count > 0 {
            any = true;
            best = best.max(sum.value() / count as f64);
        }
    }
    if !any {
        return Err(Error::domain("maximal_on_grid", "no disk captures a cell center"));
    }
    Ok(best)
}

/// Maximal function at every cell center, via row prefix sums.
pub fn maximal_field(field: &GridField, radii: &[f64]) -> Result<GridField> {
    check_radii(radii)?;
    let n = field.n;
    let h = field.cell_size();
    let mut prefix = vec![0.0; n * (n + 1)];
    for row in 0..n {
        for col in 0..n {
            prefix[row * (n + 1) + col + 1] = prefix[row * (n + 1) + col] + field.get(row, col);
        }
    }
    // Half-widths per row offset, in cells, for each radius.
    let stencils: Vec<Vec<i64>> = radii
        .iter()
        .map(|&r| {
            let reach = (r / h).floor() as i64 + 1;
            let mut widths = Vec::new();
            for dy in -reach..=reach {
                let rem = r * r - (dy as f64 * h).powi(2);
                if rem < 0.0 {
                    widths.push(-1);
                    continue;
                }
                let mut w = (rem.sqrt() / h).floor() as i64;
                // Exact center-rule membership.
                while ((w + 1) as f64 * h).powi(2) + (dy as f64 * h).powi(2) <= r * r {
                    w += 1;
                }
                while w >= 0 && (w as f64 * h).powi(2) + (dy as f64 * h).powi(2) > r * r {
                    w -= 1;
                }
                widths.push(w);
            }
            widths
        })
        .collect();

    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (row, col) = ((idx / n) as i64, (idx % n) as i64);
            let mut best = 0.0f64;
            for widths in &stencils {
                let reach = (widths.len() as i64 - 1) / 2;
                let mut sum = 0.0;
                let mut count = 0usize;
                for (i, &w) in widths.iter().enumerate() {
                    let y = row + i as i64 - reach;
                    if w < 0 || y < 0 || y >= n as i64 {
                        continue;
                    }
                    let a = (col - w).max(0) as usize;
                    let b = ((col + w + 1).min(n as i64)) as usize;
                    if a < b {
                        let base = y as usize * (n + 1);
                        sum += prefix[base + b] - prefix[base + a];
                        count += b - a;
                    }
                }
                best = best.max(sum / count as f64);
            }
            best
        })
        .collect();
    GridField::from_values(n, field.half_width, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrliczMaximalTest {
    pub b: f64,
    /// `sum Phi(b M f) dA`.
    pub lhs: f64,
    /// `sum Phi(f) dA`.
    pub rhs: f64,
}

impl OrliczMaximalTest {
    pub fn holds(&self, c: f64) -> bool {
        self.lhs <= c * self.rhs
    }

    pub fn observed_constant(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs / self.rhs
        } else if self.lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

pub fn orlicz_maximal_test<N: NFunction + ?Sized>(field: &GridField, f: &N, b: f64) -> Result<OrliczMaximalTest> {
    orlicz_maximal_test_with_radii(field, f, b, &field.default_radii())
}

pub fn orlicz_maximal_test_with_radii<N: NFunction + ?Sized>(
    field: &GridField,
    f: &N,
    b: f64,
    radii: &[f64],
) -> Result<OrliczMaximalTest> {
    if !(b > 0.0) {
        return Err(Error::domain("orlicz_maximal_test", format!("b = {b} must be positive")));
    }
    let m = maximal_field(field, radii)?;
    let area = field.cell_area();
    let lhs = m.values().iter().map(|&v| f.eval(b * v) * area).collect::<CompensatedSum>().value();
    let rhs = field.values().iter().map(|&v| f.eval(v) * area).collect::<CompensatedSum>().value();
    Ok(OrliczMaximalTest { b, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        log_grid(1e-8, 1e8, 200)
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_lambda(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(phi_lambda(3.0, 0.0).unwrap(), 9.0);
        let t = E * E - E;
        assert!((phi_lambda(t, 1.0).unwrap() - 2.0 * t * t).abs() < 1e-12);
        assert!(phi_lambda(-1.0, 0.0).is_err());
        assert!(phi_lambda(1.0, -1.0).is_err());
    }

    #[test]
    fn density_matches_finite_differences() {
        for lambda in [-0.9, -0.5, 0.0, 1.0, 2.0] {
            let f = LogSquare::new(lambda).unwrap();
            for t in [1e-3, 0.1, 1.0, 7.0, 300.0] {
                let h = 1e-6 * t;
                let fd = (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
                assert!((fd - f.density(t)).abs() < 1e-6 * f.density(t), "lambda={lambda} t={t}");
            }
        }
    }

    #[test]
    fn convex_and_superlinear() {
        for lambda in [-0.9, -0.5, 0.0, 1.0, 2.0] {
            let f = LogSquare::new(lambda).unwrap();
            let g = grid();
            for w in g.windows(2) {
                let (s, t) = (w[0], w[1]);
                assert!(f.eval(0.5 * (s + t)) <= 0.5 * (f.eval(s) + f.eval(t)) * (1.0 + 1e-12));
            }
            assert!(f.eval(1e-8) / 1e-8 < 1e-6);
            assert!(f.eval(1e8) / 1e8 > 1e6);
            assert!(g.windows(2).all(|w| f.density(w[0]) < f.density(w[1])));
        }
    }

    #[test]
    fn complementary_of_square() {
        let pair = ComplementaryPair::new(LogSquare::new(0.0).unwrap());
        assert!((pair.psi(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((pair.complementary(2.0).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(pair.complementary(0.0).unwrap(), 0.0);
        // Young equality at t = 2s.
        let (s, t) = (1.0, 2.0);
        assert!((s * t - (pair.primal().eval(s) + pair.complementary(t).unwrap())).abs() < 1e-9);
    }

    #[test]
    fn complementary_matches_legendre_identity() {
        for lambda in [-0.5, 1.0, 2.0] {
            let pair = ComplementaryPair::new(LogSquare::new(lambda).unwrap());
            for t in [1e-3, 0.5, 4.0, 100.0] {
                let s = pair.psi(t).unwrap();
                let legendre = t * s - pair.primal().eval(s);
                let q = pair.complementary(t).unwrap();
                assert!((q - legendre).abs() <= 1e-8 * legendre.abs().max(1e-300), "lambda={lambda} t={t}");
            }
        }
    }

    #[test]
    fn delta2_examples() {
        let g = grid();
        for &t in &g {
            let f = LogSquare::new(0.0).unwrap();
            assert_eq!(f.eval(2.0 * t) / f.eval(t), 4.0);
        }
        let c1 = delta2_constant(&LogSquare::new(1.0).unwrap(), &g);
        assert!((4.0..=8.0).contains(&c1));
        let c2 = delta2_constant(&LogSquare::new(2.0).unwrap(), &g);
        assert!(c2 >= 4.0 && c2 <= 16.0);
        let cm = delta2_constant(&LogSquare::new(-0.5).unwrap(), &g);
        assert!(cm < 4.0);
    }

    #[test]
    fn kr_criterion_examples() {
        let g = grid();
        for lambda in [0.0, 1.0, 2.0] {
            assert!(check_kr_criterion(&LogSquare::new(lambda).unwrap(), 2.0, &g).unwrap());
        }
        for lambda in [-0.5, -0.9] {
            let l = kr_exponent(lambda);
            assert!(check_kr_criterion(&LogSquare::new(lambda).unwrap(), l, &g).unwrap());
        }
        assert_eq!(kr_exponent(-0.5), 4.0);
        // With l = 2 the criterion fails for negative lambda.
        assert!(!check_kr_criterion(&LogSquare::new(-0.5).unwrap(), 2.0, &g).unwrap());
        assert!(check_kr_criterion(&LogSquare::new(0.0).unwrap(), 1.0, &g).is_err());
    }

    #[test]
    fn doubling_sandwich() {
        let g = grid();
        for lambda in [-0.5, 0.0, 1.0, 2.0] {
            let f = LogSquare::new(lambda).unwrap();
            for c in [1.0 / 3.0, 0.5, 2.0, 3.0] {
                let (lo, hi) = doubling_bounds(&f, c, &g);
                assert!(lo > 0.0 && hi.is_finite() && lo <= hi);
            }
        }
    }

    #[test]
    fn maximal_of_constant_and_spike() {
        let f = GridField::constant(64, 1.25, 3.0).unwrap();
        let radii = [0.05, 0.1];
        for (r, c) in [(10, 10), (32, 40)] {
            assert!((maximal_on_grid(&f, f.center(r, c), &radii).unwrap() - 3.0).abs() < 1e-12);
        }
        let m = maximal_field(&f, &radii).unwrap();
        assert!(m.values().iter().all(|v| (v - 3.0).abs() < 1e-12));

        let mut vals = vec![0.0; 64 * 64];
        vals[32 * 64 + 32] = 5.0;
        let spike = GridField::from_values(64, 1.25, vals).unwrap();
        let x = spike.center(32, 32);
        let r = 0.2;
        // Counting oracle: lattice points in the disk.
        let h = spike.cell_size();
        let reach = (r / h) as i64 + 1;
        let mut count = 0;
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if ((dx * dx + dy * dy) as f64) * h * h <= r * r {
                    count += 1;
                }
            }
        }
        let got = maximal_on_grid(&spike, x, &[r]).unwrap();
        assert!((got - 5.0 / count as f64).abs() < 1e-15);
        assert!(maximal_on_grid(&spike, x, &[1e-6]).is_ok());
        assert!(maximal_on_grid(&spike, x + 0.5 * h * Complex64::new(1.0, 1.0), &[1e-6]).is_err());
    }

    #[test]
    fn fast_maximal_matches_brute_force() {
        let f = GridField::from_fn(48, 1.25, |z| if z.norm() < 1.0 { (3.0 * z.re).sin().abs() + z.im * z.im } else { 0.0 })
            .unwrap();
        let radii = f.default_radii();
        let m = maximal_field(&f, &radii).unwrap();
        for (r, c) in [(0, 0), (5, 30), (24, 24), (47, 12), (10, 47)] {
            let brute = maximal_on_grid(&f, f.center(r, c), &radii).unwrap();
            assert!((m.get(r, c) - brute).abs() < 1e-12, "({r},{c})");
            assert!(m.get(r, c) >= f.get(r, c));
        }
        let fewer = maximal_field(&f, &radii[3..]).unwrap();
        assert!(fewer.values().iter().zip(m.values()).all(|(a, b)| a <= b));
    }

    #[test]
    fn maximal_test_examples() {
        let f = LogSquare::new(1.0).unwrap();
        let zero = GridField::constant(32, 1.25, 0.0).unwrap();
        let t = orlicz_maximal_test(&zero, &f, 1.0).unwrap();
        assert_eq!((t.lhs, t.rhs), (0.0, 0.0));
        let c = GridField::constant(32, 1.25, 2.0).unwrap();
        let t = orlicz_maximal_test(&c, &f, 1.0).unwrap();
        assert!((t.lhs - t.rhs).abs() < 1e-12 * t.rhs);
        assert!(orlicz_maximal_test(&c, &f, 0.0).is_err());
    }
}
