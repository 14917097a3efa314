//! Polygonal Jordan domains: boundary arc length, internal (geodesic)
//! distance, and sampled chord-arc / internal chord-arc constants.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_complex::Complex64;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

/// Closed simple polygon with counterclockwise vertices.
#[derive(Debug)]
pub struct PolygonDomain {
    vertices: Vec<Complex64>,
    /// `cumulative[i]` is the arc length from vertex 0 to vertex `i`.
    cumulative: Vec<f64>,
    perimeter: f64,
    reflex: Vec<usize>,
    visibility: OnceLock<UnGraph<usize, f64>>,
}

impl Clone for PolygonDomain {
    fn clone(&self) -> Self {
        Self {
            vertices: self.vertices.clone(),
            cumulative: self.cumulative.clone(),
            perimeter: self.perimeter,
            reflex: self.reflex.clone(),
            visibility: OnceLock::new(),
        }
    }
}

/// A point on the polygon boundary: `edge` runs from vertex `edge` to `edge + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub edge: usize,
    pub t: f64,
    pub point: Complex64,
}

#[inline]
fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

#[inline]
fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

fn segment_point_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (dot(p - a, ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS)) && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS)) {
        return true;
    }
    // Touching or collinear contacts.
    segment_point_distance(p1, q1, q2) <= EPS
        || segment_point_distance(p2, q1, q2) <= EPS
        || segment_point_distance(q1, p1, p2) <= EPS
        || segment_point_distance(q2, p1, p2) <= EPS
}

impl PolygonDomain {
    pub fn new(vertices: Vec<Complex64>) -> Result<Self> {
        const OP: &str = "PolygonDomain::new";
        let n = vertices.len();
        if n < 3 {
            return Err(Error::domain(OP, format!("{n} vertices; need at least 3")));
        }
        if vertices.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::domain(OP, "non-finite vertex"));
        }
        for i in 0..n {
            if (vertices[(i + 1) % n] - vertices[i]).norm() <= EPS {
                return Err(Error::domain(OP, format!("repeated vertex at index {i}")));
            }
        }
        let area: f64 = (0..n).map(|i| cross(vertices[i], vertices[(i + 1) % n])).sum::<f64>() * 0.5;
        if !(area > 0.0) {
            return Err(Error::domain(OP, format!("signed area {area} is not positive (vertices must be counterclockwise)")));
        }
        // Non-adjacent edges must not meet.
        let bad = (0..n).into_par_iter().find_any(|&i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            (i + 2..n).any(|k| {
                if i == 0 && k == n - 1 {
                    return false;
                }
                segments_intersect(a, b, vertices[k], vertices[(k + 1) % n])
            })
        });
        if let Some(i) = bad {
            return Err(Error::domain(OP, format!("polygon is not simple (edge {i} meets a non-adjacent edge)")));
        }
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for i in 0..n {
            let l = (vertices[(i + 1) % n] - vertices[i]).norm();
            cumulative.push(cumulative[i] + l);
        }
        let perimeter = cumulative[n];
        let reflex = (0..n)
            .filter(|&i| {
                let prev = vertices[(i + n - 1) % n];
                let next = vertices[(i + 1) % n];
                cross(vertices[i] - prev, next - vertices[i]) < 0.0
            })
            .collect();
        Ok(Self { vertices, cumulative, perimeter, reflex, visibility: OnceLock::new() })
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn reflex_vertices(&self) -> &[usize] {
        &self.reflex
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.len();
        (0..n).map(|i| cross(self.vertices[i], self.vertices[(i + 1) % n])).sum::<f64>() * 0.5
    }

    fn edge(&self, i: usize) -> (Complex64, Complex64) {
        (self.vertices[i], self.vertices[(i + 1) % self.len()])
    }

    /// Interior angle at vertex `i`, in `(0, 2pi)`.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.len();
        let prev = self.vertices[(i + n - 1) % n];
        let next = self.vertices[(i + 1) % n];
        let turn = ((next - self.vertices[i]) / (self.vertices[i] - prev)).arg();
        PI - turn
    }

    /// Minimum over edges of the largest vertex distance to the edge line.
    pub fn width(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                let d = (b - a) / (b - a).norm();
                self.vertices.iter().map(|&v| cross(d, v - a).abs()).fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn point(&self, edge: usize, t: f64) -> Result<BoundaryPoint> {
        if edge >= self.len() || !(0.0..=1.0).contains(&t) {
            return Err(Error::domain("BoundaryPoint", format!("edge {edge}, t = {t} out of range")));
        }
        let (a, b) = self.edge(edge);
        Ok(BoundaryPoint { edge, t, point: a + (b - a) * t })
    }

    pub fn vertex_point(&self, i: usize) -> BoundaryPoint {
        BoundaryPoint { edge: i % self.len(), t: 0.0, point: self.vertices[i % self.len()] }
    }

    /// Boundary point at arc-length position `s` (taken modulo the perimeter).
    pub fn point_at_arclength(&self, s: f64) -> BoundaryPoint {
        let s = s.rem_euclid(self.perimeter);
        let edge = match self.cumulative.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.len() - 1),
            Err(i) => i - 1,
        };
        let len = self.cumulative[edge + 1] - self.cumulative[edge];
        let t = ((s - self.cumulative[edge]) / len).clamp(0.0, 1.0);
        let (a, b) = self.edge(edge);
        BoundaryPoint { edge, t, point: a + (b - a) * t }
    }

    pub fn arclength_position(&self, w: &BoundaryPoint) -> f64 {
        let len = self.cumulative[w.edge + 1] - self.cumulative[w.edge];
        self.cumulative[w.edge] + w.t * len
    }

    /// Closed-polygon membership (boundary within `1e-12` counts as inside).
    pub fn contains(&self, p: Complex64) -> bool {
        let n = self.len();
        let mut inside = false;
        for i in 0..n {
            let (a, b) = self.edge(i);
            if segment_point_distance(p, a, b) <= EPS {
                return true;
            }
            if (a.im > p.im) != (b.im > p.im) {
                let x = a.re + (p.im - a.im) * (b.re - a.re) / (b.im - a.im);
                if x > p.re {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True when the closed segment `pq` lies in the closed polygon.
    pub fn segment_in_closure(&self, p: Complex64, q: Complex64) -> bool {
        let d = q - p;
        let len2 = d.norm_sqr();
        if len2 <= EPS * EPS {
            return self.contains(p);
        }
        let mut cuts = vec![0.0, 1.0];
        for i in 0..self.len() {
            let (a, b) = self.edge(i);
            let e = b - a;
            let denom = cross(d, e);
            let ap = a - p;
            if denom.abs() <= EPS * d.norm() * e.norm() {
                if cross(ap, d).abs() <= EPS * d.norm() {
                    for v in [a, b] {
                        let s = dot(v - p, d) / len2;
                        if (0.0..=1.0).contains(&s) {
                            cuts.push(s);
                        }
                    }
                }
                continue;
            }
            let s = cross(ap, e) / denom;
            let u = cross(ap, d) / denom;
            let su = EPS / d.norm();
            let uu = EPS / e.norm();
            if s >= -su && s <= 1.0 + su && u >= -uu && u <= 1.0 + uu {
                cuts.push(s.clamp(0.0, 1.0));
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        cuts.windows(2).all(|w| w[1] - w[0] <= 1e-15 || self.contains(p + d * (0.5 * (w[0] + w[1]))))
    }

    fn visibility_graph(&self) -> &UnGraph<usize, f64> {
        self.visibility.get_or_init(|| {
            let mut g = UnGraph::<usize, f64>::with_capacity(self.reflex.len() + 2, 0);
            for &v in &self.reflex {
                g.add_node(v);
            }
            let m = self.reflex.len();
            let edges: Vec<(usize, usize, f64)> = (0..m)
                .into_par_iter()
                .flat_map_iter(|a| {
                    (a + 1..m).filter_map(move |b| {
                        let (p, q) = (self.vertices[self.reflex[a]], self.vertices[self.reflex[b]]);
                        self.segment_in_closure(p, q).then(|| (a, b, (p - q).norm()))
                    })
                })
                .collect();
            for (a, b, w) in edges {
                g.add_edge(NodeIndex::new(a), NodeIndex::new(b), w);
            }
            g
        })
    }

    /// Shorter boundary arc length between two boundary points.
    pub fn boundary_arc_length(&self, w1: &BoundaryPoint, w2: &BoundaryPoint) -> f64 {
        let d = (self.arclength_position(w1) - self.arclength_position(w2)).abs();
        d.min(self.perimeter - d)
    }

    /// Geodesic distance through the closed polygon.
    pub fn internal_distance(&self, w1: &BoundaryPoint, w2: &BoundaryPoint) -> f64 {
        let (p, q) = (w1.point, w2.point);
        if self.segment_in_closure(p, q) {
            return (p - q).norm();
        }
        let mut g = self.visibility_graph().clone();
        let s = g.add_node(usize::MAX);
        let t = g.add_node(usize::MAX);
        for (i, &v) in self.reflex.iter().enumerate() {
            let x = self.vertices[v];
            if self.segment_in_closure(p, x) {
                g.add_edge(s, NodeIndex::new(i), (p - x).norm());
            }
            if self.segment_in_closure(x, q) {
                g.add_edge(NodeIndex::new(i), t, (x - q).norm());
            }
        }
        dijkstra(&g, s, Some(t), |e| *e.weight()).get(&t).copied().unwrap_or(f64::INFINITY)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "{} {}", v.re, v.im);
        }
        s
    }

    /// Parses one `x y` pair per line; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Config(format!("line {}: bad number '{s}'", lineno + 1)))
            };
            if parts.len() != 2 {
                return Err(Error::Config(format!("line {}: expected 'x y'", lineno + 1)));
            }
            vertices.push(Complex64::new(parse(parts[0])?, parse(parts[1])?));
        }
        Self::new(vertices)
    }
}

pub fn boundary_arc_length(p: &PolygonDomain, w1: &BoundaryPoint, w2: &BoundaryPoint) -> f64 {
    p.boundary_arc_length(w1, w2)
}

pub fn internal_distance(p: &PolygonDomain, w1: &BoundaryPoint, w2: &BoundaryPoint) -> f64 {
    p.internal_distance(w1, w2)
}

/// Stratified pair sampler: uniform pairs, antipodal pairs, and symmetric
/// pairs straddling reflex vertices (half of them at the sharpest one).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub seed: u64,
    pub uniform: usize,
    pub antipodal: usize,
    pub straddling: usize,
}

pub const MIN_PAIRS: usize = 1000;
const MIN_CHORD: f64 = 1e-9;

impl PairSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, uniform: 800, antipodal: 200, straddling: 400 }
    }

    pub fn sample(&self, p: &PolygonDomain) -> Result<Vec<(BoundaryPoint, BoundaryPoint)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let per = p.perimeter();
        let mut out = Vec::with_capacity(self.uniform + self.antipodal + self.straddling);
        for _ in 0..self.uniform {
            let a = rng.random::<f64>() * per;
            let b = rng.random::<f64>() * per;
            out.push((p.point_at_arclength(a), p.point_at_arclength(b)));
        }
        for _ in 0..self.antipodal {
            let a = rng.random::<f64>() * per;
            out.push((p.point_at_arclength(a), p.point_at_arclength(a + 0.5 * per)));
        }
        if !p.reflex.is_empty() {
            let sharpest = *p
                .reflex
                .iter()
                .max_by(|a, b| p.interior_angle(**a).partial_cmp(&p.interior_angle(**b)).unwrap())
                .unwrap();
            for k in 0..self.straddling {
                let v = if k % 2 == 0 { sharpest } else { p.reflex[rng.random_range(0..p.reflex.len())] };
                let center = p.cumulative[v];
                // Log-uniform offsets from 1e-4 to 1e-1 of the perimeter.
                let t = per * 10f64.powf(-4.0 + 3.0 * rng.random::<f64>());
                let skew = 1.0 + 0.02 * (rng.random::<f64>() - 0.5);
                out.push((p.point_at_arclength(center - t), p.point_at_arclength(center + t * skew)));
            }
        }
        out.retain(|(a, b)| (a.point - b.point).norm() >= MIN_CHORD);
        if out.len() < MIN_PAIRS {
            return Err(Error::domain(
                "PairSampler::sample",
                format!("only {} usable pairs; need at least {MIN_PAIRS}", out.len()),
            ));
        }
        Ok(out)
    }
}

/// Sampled `max l(w1, w2) / |w1 - w2|`.
pub fn chordarc_constant(p: &PolygonDomain, sampler: &PairSampler) -> Result<f64> {
    let pairs = sampler.sample(p)?;
    Ok(pairs
        .par_iter()
        .map(|(a, b)| p.boundary_arc_length(a, b) / (a.point - b.point).norm())
        .reduce(|| 0.0, f64::max))
}

/// Sampled `max l(w1, w2) / lambda(w1, w2)`.
pub fn internal_chordarc_constant(p: &PolygonDomain, sampler: &PairSampler) -> Result<f64> {
    let pairs = sampler.sample(p)?;
    Ok(pairs
        .par_iter()
        .map(|(a, b)| p.boundary_arc_length(a, b) / p.internal_distance(a, b))
        .reduce(|| 0.0, f64::max))
}

pub fn regular_polygon(n: usize, radius: f64) -> Result<PolygonDomain> {
    if n < 3 || !(radius > 0.0) {
        return Err(Error::domain("regular_polygon", "need n >= 3 and positive radius"));
    }
    PolygonDomain::new((0..n).map(|k| Complex64::from_polar(radius, TAU * k as f64 / n as f64)).collect())
}

/// Polygonal approximation of `D \ {0 <= x <= 1, |y| <= x^2}`.
pub fn cusp_domain(resolution: usize) -> Result<PolygonDomain> {
    if resolution < 16 {
        return Err(Error::domain("cusp_domain", format!("resolution {resolution} below 16")));
    }
    let res = resolution as f64;
    // y = x^2 meets the unit circle where x^2 = (sqrt 5 - 1) / 2.
    let x_star = ((5f64.sqrt() - 1.0) / 2.0).sqrt();
    let theta0 = (x_star * x_star).atan2(x_star);

    let arc_len = TAU - 2.0 * theta0;
    let arc_steps = (arc_len * res).ceil() as usize;
    let mut v: Vec<Complex64> =
        (0..=arc_steps).map(|k| Complex64::from_polar(1.0, theta0 + arc_len * k as f64 / arc_steps as f64)).collect();

    // Spacing min(1/res, x/4), graded toward the tip, down to 1/res^2.
    let x_min = 1.0 / (res * res);
    let mut xs = Vec::new();
    let mut x = x_star;
    loop {
        let step = (1.0 / res).min(x / 4.0);
        x -= step;
        if x <= x_min {
            break;
        }
        xs.push(x);
    }
    xs.push(x_min);
    for &x in &xs {
        v.push(Complex64::new(x, -x * x));
    }
    v.push(Complex64::new(0.0, 0.0));
    for &x in xs.iter().rev() {
        v.push(Complex64::new(x, x * x));
    }
    PolygonDomain::new(v)
}

/// Arc-length position of the cusp tip in [`cusp_domain`] polygons.
pub fn cusp_tip_index(p: &PolygonDomain) -> Option<usize> {
    p.vertices.iter().position(|v| v.norm() == 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    fn square() -> PolygonDomain {
        PolygonDomain::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)]).unwrap()
    }

    fn l_shape() -> PolygonDomain {
        PolygonDomain::new(vec![c(0.0, 0.0), c(2.0, 0.0), c(2.0, 1.0), c(1.0, 1.0), c(1.0, 2.0), c(0.0, 2.0)]).unwrap()
    }

    #[test]
    fn constructor_checks() {
        assert!(PolygonDomain::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).is_err());
        // Clockwise.
        assert!(PolygonDomain::new(vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(1.0, 0.0)]).is_err());
        // Bow tie.
        assert!(PolygonDomain::new(vec![c(0.0, 0.0), c(1.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)]).is_err());
        assert_eq!(square().perimeter(), 4.0);
        assert_eq!(l_shape().reflex_vertices(), &[3]);
    }

    #[test]
    fn arc_length_examples() {
        let s = square();
        let m1 = s.point(0, 0.5).unwrap();
        let m2 = s.point(1, 0.5).unwrap();
        assert!((s.boundary_arc_length(&m1, &m2) - 1.0).abs() < 1e-15);
        assert_eq!(s.boundary_arc_length(&m1, &m1), 0.0);
        let (a, b) = (s.vertex_point(0), s.vertex_point(2));
        assert!((s.boundary_arc_length(&a, &b) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn convex_internal_distance_is_chord() {
        let s = square();
        for (e1, t1, e2, t2) in [(0, 0.3, 2, 0.9), (1, 0.0, 3, 0.5), (0, 0.1, 0, 0.8)] {
            let (a, b) = (s.point(e1, t1).unwrap(), s.point(e2, t2).unwrap());
            assert_eq!(s.internal_distance(&a, &b), (a.point - b.point).norm());
        }
    }

    #[test]
    fn l_shape_goes_around_reflex_corner() {
        let l = l_shape();
        let a = l.vertex_point(2);
        let b = l.vertex_point(4);
        // Segment (2,1)-(1,2) cuts the notch.
        assert!(!l.segment_in_closure(a.point, b.point));
        assert!((l.internal_distance(&a, &b) - 2.0).abs() < 1e-12);
        let p = l.point(1, 0.5).unwrap();
        let q = l.point(4, 0.5).unwrap();
        let via = (p.point - c(1.0, 1.0)).norm() + (c(1.0, 1.0) - q.point).norm();
        assert!((l.internal_distance(&p, &q) - via).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let l = l_shape();
        let back = PolygonDomain::from_text(&format!("# L\n{}\n", l.to_text())).unwrap();
        assert_eq!(back.vertices(), l.vertices());
        assert!(PolygonDomain::from_text("0 0\n1 x\n0 1\n").is_err());
    }

    #[test]
    fn cusp_construction() {
        let p = cusp_domain(64).unwrap();
        assert!(p.signed_area() > 0.0);
        assert!(!p.contains(c(0.5, 0.0)));
        assert!(p.contains(c(-0.5, 0.0)));
        assert!(p.contains(c(0.5, 0.3)));
        let tip = cusp_tip_index(&p).unwrap();
        assert!(p.reflex_vertices().contains(&tip));
        assert!(p.interior_angle(tip) > TAU - 1e-3);
        assert!(cusp_domain(8).is_err());
    }

    #[test]
    fn regular_polygon_constants() {
        let p = regular_polygon(256, 1.0).unwrap();
        let sampler = PairSampler::new(7);
        let a = chordarc_constant(&p, &sampler).unwrap();
        let b = internal_chordarc_constant(&p, &sampler).unwrap();
        assert!((a - b).abs() < 1e-9);
        assert!((a / (PI / 2.0) - 1.0).abs() < 0.02);
        assert!(a <= p.perimeter() / (2.0 * p.width()) + 1e-12);
    }

    #[test]
    fn sampler_is_deterministic_and_validates() {
        let p = square();
        let s = PairSampler::new(3);
        assert_eq!(s.sample(&p).unwrap(), s.sample(&p).unwrap());
        let tiny = PairSampler { seed: 1, uniform: 10, antipodal: 0, straddling: 0 };
        assert!(tiny.sample(&p).is_err());
    }

    #[test]
    fn cusp_ratios() {
        let p = cusp_domain(64).unwrap();
        let sampler = PairSampler::new(11);
        assert!(chordarc_constant(&p, &sampler).unwrap() > 50.0);
        assert!(internal_chordarc_constant(&p, &sampler).unwrap() < 10.0);
    }

    #[test]
    fn internal_distance_metric_bounds() {
        let p = cusp_domain(32).unwrap();
        let pairs = PairSampler::new(5).sample(&p).unwrap();
        for w in pairs.chunks(3).take(150) {
            if w.len() < 3 {
                break;
            }
            let (a, b) = (w[0].0, w[1].1);
            let x = w[2].0;
            let lab = p.internal_distance(&a, &b);
            assert!(lab >= (a.point - b.point).norm() - 1e-12);
            assert!(lab <= p.boundary_arc_length(&a, &b) + 1e-9);
            let via = p.internal_distance(&a, &x) + p.internal_distance(&x, &b);
            assert!(lab <= via + 1e-9);
        }
    }
}
