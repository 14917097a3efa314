//! Orientation-preserving circle homeomorphisms stored as monotone lifts.
//!
//! A map `phi` is encoded by its lift `f: [0, 2pi] -> [0, 2pi]` together with the
//! base point image `phi(1)`, so that `phi(e^{i theta}) = phi(1) e^{i f(theta)}`.
//! Every downstream module consumes the lift; `phi` itself is only rebuilt when
//! complex boundary values are needed.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicArc;
use crate::error::{Error, Result};

/// Slack allowed on angle arguments before a domain error is raised.
pub const ANGLE_SLACK: f64 = 1e-12;
/// Default absolute tolerance of the numeric lift inversion.
pub const DEFAULT_INVERSE_TOLERANCE: f64 = 1e-12;
const MAX_BISECTION_STEPS: usize = 200;
const MAX_CANTOR_STAGE: u32 = 12;

/// Family tag of a circle homeomorphism together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum LiftKind {
    Identity,
    /// Post-rotation by `angle`; the lift is the identity.
    Rotation { angle: f64 },
    /// Boundary trace of the disk automorphism `(z - a) / (1 - conj(a) z)`.
    MobiusTrace { a: Complex64 },
    /// `f(theta) = 2pi (theta / 2pi)^p`.
    Power { p: f64 },
    /// `f(theta) = 2pi log(1 + beta theta) / log(1 + 2pi beta)`.
    LogSingular { beta: f64 },
    /// Piecewise-linear interpolant of the stage-`stage` Cantor function mixed
    /// with the identity at weight `slope_floor`.
    SmoothedCantor { stage: u32, slope_floor: f64 },
    /// Linear interpolation through `(theta, f(theta))` knots.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl LiftKind {
    pub fn name(&self) -> &'static str {
        match self {
            LiftKind::Identity => "identity",
            LiftKind::Rotation { .. } => "rotation",
            LiftKind::MobiusTrace { .. } => "mobius_trace",
            LiftKind::Power { .. } => "power",
            LiftKind::LogSingular { .. } => "log_singular",
            LiftKind::SmoothedCantor { .. } => "smoothed_cantor",
            LiftKind::PiecewiseLinear { .. } => "piecewise_linear",
        }
    }
}

#[derive(Clone, Debug)]
enum Lift {
    Identity,
    Mobius {
        abar: Complex64,
        /// `2 arg(1 - conj(a))`, so that `f(0) = 0`.
        offset: f64,
        /// `arg phi(1)`.
        alpha: f64,
        /// Constant of the closed-form inverse.
        inv_offset: f64,
    },
    Power { p: f64 },
    LogSingular { beta: f64, norm: f64 },
    Knots { xs: Vec<f64>, ys: Vec<f64> },
}

/// A circle homeomorphism. Immutable after construction.
#[derive(Clone, Debug)]
pub struct CircleHomeomorphism {
    kind: LiftKind,
    lift: Lift,
    base_point_angle: f64,
    inverse_tolerance: f64,
}

impl CircleHomeomorphism {
    fn from_parts(kind: LiftKind, lift: Lift, base_point_angle: f64) -> Self {
        Self { kind, lift, base_point_angle, inverse_tolerance: DEFAULT_INVERSE_TOLERANCE }
    }

    pub fn identity() -> Self {
        Self::from_parts(LiftKind::Identity, Lift::Identity, 0.0)
    }

    pub fn rotation(angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::domain("rotation", "angle must be finite"));
        }
        Ok(Self::from_parts(LiftKind::Rotation { angle }, Lift::Identity, angle))
    }

    pub fn mobius_trace(a: Complex64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::domain("mobius_trace", format!("|a| = {} must be < 1", a.norm())));
        }
        let abar = a.conj();
        let offset = 2.0 * (Complex64::new(1.0, 0.0) - abar).arg();
        let alpha = -offset;
        let inv_offset = alpha - 2.0 * (1.0 + abar * Complex64::from_polar(1.0, alpha)).arg();
        let lift = Lift::Mobius { abar, offset, alpha, inv_offset };
        Ok(Self::from_parts(LiftKind::MobiusTrace { a }, lift, alpha))
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::domain("power", format!("exponent p = {p} must be > 0")));
        }
        Ok(Self::from_parts(LiftKind::Power { p }, Lift::Power { p }, 0.0))
    }

    pub fn log_singular(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain("log_singular", format!("beta = {beta} must be > 0")));
        }
        let norm = (TAU * beta).ln_1p();
        Ok(Self::from_parts(LiftKind::LogSingular { beta }, Lift::LogSingular { beta, norm }, 0.0))
    }

    pub fn smoothed_cantor(stage: u32, slope_floor: f64) -> Result<Self> {
        if stage > MAX_CANTOR_STAGE {
            return Err(Error::resource(
                "smoothed_cantor",
                format!("stage {stage} exceeds the guard {MAX_CANTOR_STAGE}"),
            ));
        }
        if !(slope_floor > 0.0 && slope_floor <= 1.0) {
            return Err(Error::domain(
                "smoothed_cantor",
                format!("slope floor {slope_floor} must lie in (0, 1]"),
            ));
        }
        let n = 3u64.pow(stage);
        let mut xs = Vec::with_capacity(n as usize + 1);
        let mut ys = Vec::with_capacity(n as usize + 1);
        for i in 0..=n {
            let x = i as f64 / n as f64;
            let c = cantor_at_grid(i, stage);
            xs.push(TAU * x);
            ys.push(TAU * ((1.0 - slope_floor) * c + slope_floor * x));
        }
        *xs.last_mut().unwrap() = TAU;
        *ys.last_mut().unwrap() = TAU;
        Ok(Self::from_parts(
            LiftKind::SmoothedCantor { stage, slope_floor },
            Lift::Knots { xs, ys },
            0.0,
        ))
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        const OP: &str = "piecewise_linear";
        if knots.len() < 2 {
            return Err(Error::domain(OP, "at least two knots are required"));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(Error::domain(OP, "first knot must be (0, 0)"));
        }
        let last = knots[knots.len() - 1];
        if (last.0 - TAU).abs() > ANGLE_SLACK || (last.1 - TAU).abs() > ANGLE_SLACK {
            return Err(Error::domain(OP, "last knot must be (2pi, 2pi)"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::domain(OP, "knots must be strictly increasing in both coordinates"));
            }
        }
        let mut xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let mut ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        *xs.last_mut().unwrap() = TAU;
        *ys.last_mut().unwrap() = TAU;
        Ok(Self::from_parts(LiftKind::PiecewiseLinear { knots }, Lift::Knots { xs, ys }, 0.0))
    }

    /// Returns `R o phi` where `R` rotates the target circle by `angle`.
    pub fn post_rotated(mut self, angle: f64) -> Self {
        self.base_point_angle += angle;
        self
    }

    pub fn with_inverse_tolerance(mut self, tol: f64) -> Self {
        self.inverse_tolerance = tol;
        self
    }

    pub fn kind(&self) -> &LiftKind {
        &self.kind
    }

    pub fn inverse_tolerance(&self) -> f64 {
        self.inverse_tolerance
    }

    pub fn base_point_angle(&self) -> f64 {
        self.base_point_angle
    }

    /// `phi(1)`.
    pub fn base_point_image(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.base_point_angle)
    }

    /// Lift evaluation without the domain check; `theta` is clamped to [0, 2pi].
    pub fn lift(&self, theta: f64) -> f64 {
        let theta = theta.clamp(0.0, TAU);
        if theta == 0.0 {
            return 0.0;
        }
        if theta == TAU {
            return TAU;
        }
        let v = match &self.lift {
            Lift::Identity => theta,
            Lift::Mobius { abar, offset, .. } => {
                let w = 1.0 - abar * Complex64::from_polar(1.0, theta);
                theta - 2.0 * w.arg() + offset
            }
            Lift::Power { p } => TAU * (theta / TAU).powf(*p),
            Lift::LogSingular { beta, norm } => TAU * ((beta * theta).ln_1p() / norm),
            Lift::Knots { xs, ys } => interpolate(xs, ys, theta),
        };
        v.clamp(0.0, TAU)
    }

    /// Periodic extension `F(theta) = f(theta mod 2pi) + 2pi floor(theta / 2pi)`.
    pub fn lift_periodic(&self, theta: f64) -> f64 {
        let turns = (theta / TAU).floor();
        let reduced = theta - turns * TAU;
        self.lift(reduced) + turns * TAU
    }

    pub fn eval_lift(&self, theta: f64) -> Result<f64> {
        check_angle("eval_lift", theta)?;
        Ok(self.lift(theta))
    }

    /// `phi(zeta)` for a unit-modulus `zeta`.
    pub fn eval(&self, zeta: Complex64) -> Result<Complex64> {
        if (zeta.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::domain("eval", format!("|zeta| = {} is not 1", zeta.norm())));
        }
        let mut theta = zeta.arg();
        if theta < 0.0 {
            theta += TAU;
        }
        Ok(self.boundary_value(theta))
    }

    /// `phi(e^{i theta})` for a source angle `theta` in [0, 2pi].
    pub fn boundary_value(&self, theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.base_point_angle + self.lift(theta))
    }

    /// Solves `f(theta) = value`; closed forms where known, bisection otherwise.
    pub fn invert_lift(&self, value: f64) -> Result<f64> {
        check_angle("invert_lift", value)?;
        let y = value.clamp(0.0, TAU);
        if y == 0.0 {
            return Ok(0.0);
        }
        if y == TAU {
            return Ok(TAU);
        }
        let theta = match &self.lift {
            Lift::Identity => y,
            Lift::Mobius { abar, alpha, inv_offset, .. } => {
                let s = alpha + y;
                s - 2.0 * (1.0 + abar * Complex64::from_polar(1.0, s)).arg() - inv_offset
            }
            Lift::Power { p } => TAU * (y / TAU).powf(1.0 / p),
            Lift::LogSingular { beta, norm } => (y / TAU * norm).exp_m1() / beta,
            Lift::Knots { xs, ys } => interpolate(ys, xs, y),
        };
        Ok(theta.clamp(0.0, TAU))
    }

    /// Bisection inversion of the lift, independent of any closed form.
    pub fn invert_lift_bisection(&self, value: f64) -> Result<f64> {
        check_angle("invert_lift", value)?;
        let y = value.clamp(0.0, TAU);
        let tol = self.inverse_tolerance;
        let (mut lo, mut hi) = (0.0_f64, TAU);
        for _ in 0..MAX_BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            let fm = self.lift(mid);
            if (fm - y).abs() <= tol && hi - lo <= tol {
                return Ok(mid);
            }
            if mid <= lo || mid >= hi {
                // Bracket collapsed to adjacent floats.
                return if (fm - y).abs() <= tol {
                    Ok(mid)
                } else {
                    Err(Error::Convergence {
                        op: "invert_lift",
                        detail: format!("bracket collapsed at theta = {mid} with residual {}", fm - y),
                    })
                };
            }
            if fm < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Convergence {
            op: "invert_lift",
            detail: format!("no bracket within {MAX_BISECTION_STEPS} steps for value {value}"),
        })
    }

    /// `l(phi(Gamma_{j,k})) = f(theta_right) - f(theta_left)`.
    pub fn image_arc_length(&self, arc: &DyadicArc) -> f64 {
        let (a, b) = arc.interval();
        self.lift(b) - self.lift(a)
    }

    /// Lebesgue-Stieltjes mass `mu_f([a, b]) = f(b) - f(a)`.
    pub fn stieltjes_mass(&self, a: f64, b: f64) -> Result<f64> {
        check_angle("stieltjes_mass", a)?;
        check_angle("stieltjes_mass", b)?;
        if a > b {
            return Err(Error::domain("stieltjes_mass", format!("a = {a} exceeds b = {b}")));
        }
        Ok(self.lift(b) - self.lift(a))
    }

    /// Machine-readable description mirroring the map specification record.
    pub fn spec(&self) -> MapSpec {
        let intrinsic = match &self.lift {
            Lift::Mobius { alpha, .. } => *alpha,
            _ => 0.0,
        };
        let rot = match &self.kind {
            LiftKind::Rotation { angle } => *angle,
            _ => 0.0,
        };
        let params = match &self.kind {
            LiftKind::Identity => serde_json::json!({}),
            LiftKind::Rotation { angle } => serde_json::json!({ "angle": angle }),
            LiftKind::MobiusTrace { a } => serde_json::json!({ "a_re": a.re, "a_im": a.im }),
            LiftKind::Power { p } => serde_json::json!({ "p": p }),
            LiftKind::LogSingular { beta } => serde_json::json!({ "beta": beta }),
            LiftKind::SmoothedCantor { stage, slope_floor } => {
                serde_json::json!({ "stage": stage, "slope_floor": slope_floor })
            }
            LiftKind::PiecewiseLinear { knots } => {
                let k: Vec<[f64; 2]> = knots.iter().map(|&(x, y)| [x, y]).collect();
                serde_json::json!({ "knots": k })
            }
        };
        MapSpec {
            kind: self.kind.name().to_string(),
            params,
            base_point_image_angle: self.base_point_angle - intrinsic - rot,
        }
    }
}

fn check_angle(op: &'static str, theta: f64) -> Result<()> {
    if !(theta >= -ANGLE_SLACK && theta <= TAU + ANGLE_SLACK) {
        return Err(Error::domain(op, format!("angle {theta} outside [0, 2pi]")));
    }
    Ok(())
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return ys[0];
    }
    if i >= xs.len() {
        return ys[ys.len() - 1];
    }
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
}

/// Cantor function at `i / 3^stage`.
fn cantor_at_grid(i: u64, stage: u32) -> f64 {
    let n = 3u64.pow(stage);
    if i >= n {
        return 1.0;
    }
    let mut value = 0.0;
    let mut scale = 0.5;
    let mut place = n / 3;
    let mut rem = i;
    for _ in 0..stage {
        let d = rem / place;
        rem %= place;
        match d {
            0 => {}
            1 => return value + scale,
            _ => value += scale,
        }
        scale *= 0.5;
        place = (place / 3).max(1);
    }
    value
}

/// Map specification record: `{kind, params, base_point_image_angle}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub kind: String,
    #[serde(default = "empty_object")]
    pub params: serde_json::Value,
    #[serde(default)]
    pub base_point_image_angle: f64,
}

fn empty_object() -> serde_json::Value {
    serde_json::json!({})
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RotationParams {
    angle: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MobiusParams {
    a_re: f64,
    #[serde(default)]
    a_im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerParams {
    p: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogSingularParams {
    beta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CantorParams {
    stage: u32,
    slope_floor: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KnotParams {
    knots: Vec<[f64; 2]>,
}

impl MapSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_map(&self) -> Result<CircleHomeomorphism> {
        fn params<T: serde::de::DeserializeOwned>(kind: &str, v: &serde_json::Value) -> Result<T> {
            serde_json::from_value(v.clone())
                .map_err(|e| Error::Config(format!("params for kind '{kind}': {e}")))
        }
        let kind = self.kind.as_str();
        let map = match kind {
            "identity" => {
                params::<NoParams>(kind, &self.params)?;
                CircleHomeomorphism::identity()
            }
            "rotation" => CircleHomeomorphism::rotation(params::<RotationParams>(kind, &self.params)?.angle)?,
            "mobius_trace" => {
                let p: MobiusParams = params(kind, &self.params)?;
                CircleHomeomorphism::mobius_trace(Complex64::new(p.a_re, p.a_im))?
            }
            "power" => CircleHomeomorphism::power(params::<PowerParams>(kind, &self.params)?.p)?,
            "log_singular" => {
                CircleHomeomorphism::log_singular(params::<LogSingularParams>(kind, &self.params)?.beta)?
            }
            "smoothed_cantor" => {
                let p: CantorParams = params(kind, &self.params)?;
                CircleHomeomorphism::smoothed_cantor(p.stage, p.slope_floor)?
            }
            "piecewise_linear" => {
                let p: KnotParams = params(kind, &self.params)?;
                CircleHomeomorphism::piecewise_linear(p.knots.iter().map(|k| (k[0], k[1])).collect())?
            }
            other => return Err(Error::Config(format!("unknown map kind '{other}'"))),
        };
        if !self.base_point_image_angle.is_finite() {
            return Err(Error::Config("base_point_image_angle must be finite".into()));
        }
        Ok(map.post_rotated(self.base_point_image_angle))
    }
}

/// The standard test families, one representative per lift kind.
pub fn catalog() -> Vec<(&'static str, CircleHomeomorphism)> {
    use std::f64::consts::PI;
    vec![
        ("identity", CircleHomeomorphism::identity()),
        ("rotation", CircleHomeomorphism::rotation(1.0).unwrap()),
        ("mobius_trace", CircleHomeomorphism::mobius_trace(Complex64::new(0.3, 0.4)).unwrap()),
        ("power", CircleHomeomorphism::power(2.0).unwrap()),
        ("log_singular", CircleHomeomorphism::log_singular(100.0).unwrap()),
        ("smoothed_cantor", CircleHomeomorphism::smoothed_cantor(4, 1e-3).unwrap()),
        (
            "piecewise_linear",
            CircleHomeomorphism::piecewise_linear(vec![(0.0, 0.0), (PI, 1.5 * PI), (TAU, TAU)]).unwrap(),
        ),
    ]
}

/// Catalog members whose lifts are smooth on the open interval (0, 2pi).
pub fn smooth_catalog() -> Vec<(&'static str, CircleHomeomorphism)> {
    catalog()
        .into_iter()
        .filter(|(name, _)| matches!(*name, "identity" | "rotation" | "mobius_trace" | "power" | "log_singular"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pl() -> CircleHomeomorphism {
        CircleHomeomorphism::piecewise_linear(vec![(0.0, 0.0), (PI, 1.5 * PI), (TAU, TAU)]).unwrap()
    }

    #[test]
    fn eval_lift_examples() {
        let id = CircleHomeomorphism::identity();
        assert_eq!(id.eval_lift(PI).unwrap(), PI);
        let p2 = CircleHomeomorphism::power(2.0).unwrap();
        assert!((p2.eval_lift(PI).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((pl().eval_lift(PI / 2.0).unwrap() - 0.75 * PI).abs() < 1e-15);
    }

    #[test]
    fn eval_lift_endpoints_exact_and_domain() {
        for (_, m) in catalog() {
            assert_eq!(m.eval_lift(0.0).unwrap(), 0.0);
            assert_eq!(m.eval_lift(TAU).unwrap(), TAU);
            assert!(m.eval_lift(-1e-6).is_err());
            assert!(m.eval_lift(TAU + 1e-6).is_err());
            assert!(m.eval_lift(-1e-13).is_ok());
        }
    }

    #[test]
    fn eval_examples() {
        let id = CircleHomeomorphism::identity();
        let i = Complex64::new(0.0, 1.0);
        assert!((id.eval(i).unwrap() - i).norm() < 1e-15);
        let flipped = CircleHomeomorphism::identity().post_rotated(PI);
        assert!((flipped.eval(Complex64::new(1.0, 0.0)).unwrap() + 1.0).norm() < 1e-15);
        let p2 = CircleHomeomorphism::power(2.0).unwrap();
        let out = p2.eval(Complex64::from_polar(1.0, PI)).unwrap();
        assert!((out - Complex64::from_polar(1.0, PI / 2.0)).norm() < 1e-14);
        assert!(id.eval(Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn invert_examples() {
        let id = CircleHomeomorphism::identity();
        assert_eq!(id.invert_lift(PI).unwrap(), PI);
        let p2 = CircleHomeomorphism::power(2.0).unwrap();
        assert!((p2.invert_lift(PI / 2.0).unwrap() - PI).abs() < 1e-14);
        assert!((pl().invert_lift(0.75 * PI).unwrap() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_inverse_agrees_with_bisection() {
        for (name, m) in catalog() {
            for i in 1..50 {
                let y = TAU * i as f64 / 50.0;
                let a = m.invert_lift(y).unwrap();
                let b = m.invert_lift_bisection(y).unwrap();
                assert!((m.lift(a) - y).abs() < 1e-11, "{name}: closed form residual at {y}");
                assert!((m.lift(b) - y).abs() <= m.inverse_tolerance(), "{name}: bisection residual");
            }
        }
    }

    #[test]
    fn mobius_lift_has_poisson_derivative() {
        let a = Complex64::new(0.3, 0.4);
        let m = CircleHomeomorphism::mobius_trace(a).unwrap();
        let h = 1e-6;
        for i in 1..20 {
            let t = TAU * i as f64 / 20.0;
            let fd = (m.lift(t + h) - m.lift(t - h)) / (2.0 * h);
            let exact = (1.0 - a.norm_sqr()) / (Complex64::from_polar(1.0, t) - a).norm_sqr();
            assert!((fd - exact).abs() < 1e-6);
        }
        // phi = M_a on the circle.
        for i in 0..20 {
            let t = TAU * i as f64 / 20.0;
            let z = Complex64::from_polar(1.0, t);
            let direct = (z - a) / (1.0 - a.conj() * z);
            assert!((m.boundary_value(t) - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn image_arc_length_examples() {
        let id = CircleHomeomorphism::identity();
        let arc = DyadicArc::new(3, 5).unwrap();
        assert!((id.image_arc_length(&arc) - TAU / 8.0).abs() < 1e-15);
        let p2 = CircleHomeomorphism::power(2.0).unwrap();
        assert!((p2.image_arc_length(&DyadicArc::new(1, 1).unwrap()) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn level_mass_conservation() {
        for (name, m) in catalog() {
            for j in 1..=14 {
                let total: f64 = crate::numeric::compensated_sum(
                    DyadicArc::level(j).unwrap().map(|a| m.image_arc_length(&a)),
                );
                assert!((total - TAU).abs() < 1e-9, "{name} j={j}: {total}");
            }
        }
    }

    #[test]
    fn stieltjes_examples() {
        let id = CircleHomeomorphism::identity();
        assert_eq!(id.stieltjes_mass(0.0, PI).unwrap(), PI);
        assert_eq!(id.stieltjes_mass(1.0, 1.0).unwrap(), 0.0);
        let p2 = CircleHomeomorphism::power(2.0).unwrap();
        assert!((p2.stieltjes_mass(PI, TAU).unwrap() - 1.5 * PI).abs() < 1e-15);
        assert!(id.stieltjes_mass(2.0, 1.0).is_err());
    }

    #[test]
    fn cantor_grid_values() {
        assert_eq!(cantor_at_grid(0, 2), 0.0);
        assert_eq!(cantor_at_grid(3, 2), 0.5); // 1/3
        assert_eq!(cantor_at_grid(6, 2), 0.5); // 2/3
        assert_eq!(cantor_at_grid(1, 2), 0.25); // 1/9
        assert_eq!(cantor_at_grid(8, 2), 0.75); // 8/9
        assert_eq!(cantor_at_grid(9, 2), 1.0);
    }

    #[test]
    fn invalid_constructors() {
        assert!(CircleHomeomorphism::power(0.0).is_err());
        assert!(CircleHomeomorphism::mobius_trace(Complex64::new(1.0, 0.0)).is_err());
        assert!(CircleHomeomorphism::piecewise_linear(vec![(0.0, 0.0), (1.0, 2.0), (0.5, 3.0), (TAU, TAU)]).is_err());
        assert!(CircleHomeomorphism::piecewise_linear(vec![(0.1, 0.0), (TAU, TAU)]).is_err());
        assert!(CircleHomeomorphism::smoothed_cantor(3, 0.0).is_err());
        assert!(CircleHomeomorphism::smoothed_cantor(20, 0.1).is_err());
    }

    #[test]
    fn map_spec_round_trip_and_strictness() {
        for (_, m) in catalog() {
            let spec = m.spec();
            let back = spec.to_map().unwrap();
            assert_eq!(back.kind(), m.kind());
            assert!((back.base_point_angle() - m.base_point_angle()).abs() < 1e-15);
        }
        let bad = r#"{"kind":"power","params":{"p":2},"extra":1}"#;
        assert!(MapSpec::from_json(bad).is_err());
        let bad_param = MapSpec::from_json(r#"{"kind":"power","params":{"p":2,"q":1}}"#).unwrap();
        assert!(bad_param.to_map().is_err());
        let unknown = MapSpec::from_json(r#"{"kind":"spiral"}"#).unwrap();
        assert!(unknown.to_map().is_err());
        let ok = MapSpec::from_json(r#"{"kind":"identity"}"#).unwrap();
        assert_eq!(ok.to_map().unwrap().kind(), &LiftKind::Identity);
    }
}
