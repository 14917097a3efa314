//! Dyadic decomposition of the circle, the matching Whitney decomposition of
//! the disk, and the annular decomposition built around a dyadic arc.
//!
//! Arc `Gamma_{j,k}` is the image of `I_{j,k} = [2pi (k-1) / 2^j, 2pi k / 2^j]`,
//! `k = 1..=2^j`; all index arithmetic is cyclic modulo `2^j`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest level accepted by [`arcs_at_level`].
pub const MAX_ENUMERATION_LEVEL: u32 = 30;
/// Largest level accepted by [`inducers`].
pub const MAX_INDUCER_LEVEL: u32 = 16;

/// The dyadic arc `Gamma_{j,k}` with `j >= 1` and `1 <= k <= 2^j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicArc {
    level: u32,
    index: u64,
}

impl DyadicArc {
    pub fn new(level: u32, index: u64) -> Result<Self> {
        if level == 0 || level > 62 {
            return Err(Error::domain("DyadicArc::new", format!("level {level} outside [1, 62]")));
        }
        if index == 0 || index > 1u64 << level {
            return Err(Error::domain(
                "DyadicArc::new",
                format!("index {index} outside [1, 2^{level}]"),
            ));
        }
        Ok(Self { level, index })
    }

    /// Cyclic constructor: any integer index is reduced modulo `2^level`.
    fn wrapped(level: u32, index: i64) -> Self {
        let n = 1i64 << level;
        let k = (index - 1).rem_euclid(n) + 1;
        Self { level, index: k as u64 }
    }

    /// All arcs of level `level` in index order (lazy; no size guard).
    pub fn level(level: u32) -> Result<impl Iterator<Item = DyadicArc>> {
        if level == 0 || level > 62 {
            return Err(Error::domain("DyadicArc::level", format!("level {level} outside [1, 62]")));
        }
        Ok((1..=(1u64 << level)).map(move |index| DyadicArc { level, index }))
    }

    pub fn level_index(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn count_at_level(&self) -> u64 {
        1u64 << self.level
    }

    /// Angular interval `I_{j,k}`.
    pub fn interval(&self) -> (f64, f64) {
        let n = (1u64 << self.level) as f64;
        (TAU * (self.index - 1) as f64 / n, TAU * self.index as f64 / n)
    }

    pub fn width(&self) -> f64 {
        TAU / (1u64 << self.level) as f64
    }

    /// Endpoints `(xi_{j,k}, xi_{j,k+1})` on the unit circle.
    pub fn endpoints(&self) -> (Complex64, Complex64) {
        let (a, b) = self.interval();
        (Complex64::from_polar(1.0, a), Complex64::from_polar(1.0, b))
    }

    /// Parent arc, `Gamma_{j-1, ceil(k/2)}`; level-1 arcs have none.
    pub fn parent(&self) -> Option<DyadicArc> {
        (self.level > 1).then(|| DyadicArc { level: self.level - 1, index: self.index.div_ceil(2) })
    }

    /// The unique other child of this arc's parent (the circle for level 1).
    pub fn brother(&self) -> DyadicArc {
        let index = if self.index % 2 == 1 { self.index + 1 } else { self.index - 1 };
        DyadicArc { level: self.level, index }
    }

    pub fn children(&self) -> [DyadicArc; 2] {
        let l = self.level + 1;
        [DyadicArc { level: l, index: 2 * self.index - 1 }, DyadicArc { level: l, index: 2 * self.index }]
    }

    /// Arc `offset` positions anticlockwise at the same level (cyclic).
    pub fn neighbor(&self, offset: i64) -> DyadicArc {
        DyadicArc::wrapped(self.level, self.index as i64 + offset)
    }

    /// True when `other` is contained in this arc.
    pub fn contains(&self, other: &DyadicArc) -> bool {
        if other.level < self.level {
            return false;
        }
        let shift = other.level - self.level;
        (other.index - 1) >> shift == self.index - 1
    }
}

impl std::fmt::Display for DyadicArc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Gamma({},{})", self.level, self.index)
    }
}

/// All `2^j` arcs of level `j`, guarded at `j <= 30`.
pub fn arcs_at_level(j: u32) -> Result<Vec<DyadicArc>> {
    if j == 0 {
        return Err(Error::domain("arcs_at_level", "level must be >= 1"));
    }
    if j > MAX_ENUMERATION_LEVEL {
        return Err(Error::resource(
            "arcs_at_level",
            format!("level {j} exceeds the enumeration guard {MAX_ENUMERATION_LEVEL}"),
        ));
    }
    Ok(DyadicArc::level(j)?.collect())
}

pub fn brother(arc: &DyadicArc) -> DyadicArc {
    arc.brother()
}

/// Whitney cell `Q_{j,k}`: the polar rectangle over `I_{j,k}` with radii in
/// `[1 - 2^{1-j}, 1 - 2^{-j}]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCell {
    pub arc: DyadicArc,
    pub r_inner: f64,
    pub r_outer: f64,
    pub theta_start: f64,
    pub theta_end: f64,
    /// `r_{j,k} = 1 - 3 / 2^{j+1}`.
    pub center_radius: f64,
    /// `theta_{j,k} = pi (2k - 1) / 2^j`.
    pub center_angle: f64,
    /// Radius of the largest disk centered at `x_{j,k}` inside the cell.
    pub inscribed_radius: f64,
    /// Radius of the smallest disk centered at `x_{j,k}` containing the cell.
    pub circumscribed_radius: f64,
}

impl WhitneyCell {
    pub fn center(&self) -> Complex64 {
        Complex64::from_polar(self.center_radius, self.center_angle)
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.r_outer * self.r_outer - self.r_inner * self.r_inner) * (self.theta_end - self.theta_start)
    }

    /// `dist(Q_{j,k}, S) = 2^{-j}`.
    pub fn distance_to_circle(&self) -> f64 {
        1.0 - self.r_outer
    }

    /// Achieved `C` in `B_{j,k} subset Q_{j,k} subset C B_{j,k}`.
    pub fn containment_ratio(&self) -> f64 {
        self.circumscribed_radius / self.inscribed_radius
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        let mut t = z.arg();
        if t < 0.0 {
            t += TAU;
        }
        r >= self.r_inner && r <= self.r_outer && t >= self.theta_start && t <= self.theta_end
    }
}

pub fn whitney_cell(j: u32, k: u64) -> Result<WhitneyCell> {
    let arc = DyadicArc::new(j, k)?;
    Ok(whitney_cell_of(arc))
}

pub fn whitney_cell_of(arc: DyadicArc) -> WhitneyCell {
    let j = arc.level;
    let scale = (-(j as f64)).exp2();
    let r_inner = 1.0 - 2.0 * scale;
    let r_outer = 1.0 - scale;
    let (theta_start, theta_end) = arc.interval();
    let center_radius = 1.0 - 1.5 * scale;
    let center_angle = PI * (2 * arc.index - 1) as f64 * scale;
    // Geometry in the frame rotated so the center lies on the positive axis.
    let half = PI * scale;
    let c = Complex64::new(center_radius, 0.0);
    let corners = [
        Complex64::from_polar(r_inner, -half),
        Complex64::from_polar(r_outer, -half),
        Complex64::from_polar(r_inner, half),
        Complex64::from_polar(r_outer, half),
    ];
    let side_a = segment_distance(c, corners[0], corners[1]);
    let side_b = segment_distance(c, corners[2], corners[3]);
    let inscribed_radius = (r_outer - center_radius)
        .min(center_radius - r_inner)
        .min(side_a)
        .min(side_b);
    let circumscribed_radius = corners.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);

    WhitneyCell {
        arc,
        r_inner,
        r_outer,
        theta_start,
        theta_end,
        center_radius,
        center_angle,
        inscribed_radius,
        circumscribed_radius,
    }
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Uniform constant `C` with `B_{j,k} subset Q_{j,k} subset C B_{j,k}` for all
/// levels up to `max_level` (the ratio does not depend on `k`).
pub fn whitney_constant(max_level: u32) -> f64 {
    (1..=max_level.max(1))
        .map(|j| whitney_cell_of(DyadicArc { level: j, index: 1 }).containment_ratio())
        .fold(0.0, f64::max)
}

/// Which step of the construction produced a member arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberRole {
    Seed,
    Brother,
    Anticlockwise { optional: bool },
    Clockwise { optional: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub arc: DyadicArc,
    pub role: MemberRole,
}

/// The cover `P(Gamma_{j,k})` of the circle around a seed arc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnularDecomposition {
    pub seed: DyadicArc,
    pub members: Vec<Member>,
    /// Level `j_0` at which the two fronts met.
    pub terminal_level: u32,
}

impl AnnularDecomposition {
    pub fn arcs(&self) -> impl Iterator<Item = DyadicArc> + '_ {
        self.members.iter().map(|m| m.arc)
    }

    pub fn contains(&self, arc: &DyadicArc) -> bool {
        self.members.iter().any(|m| m.arc == *arc)
    }

    /// Number of members at each level, finest first.
    pub fn level_counts(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for m in &self.members {
            match out.iter_mut().find(|(l, _)| *l == m.arc.level) {
                Some(e) => e.1 += 1,
                None => out.push((m.arc.level, 1)),
            }
        }
        out.sort_by(|a, b| b.0.cmp(&a.0));
        out
    }

    /// Sum of member angular widths.
    pub fn total_measure(&self) -> f64 {
        self.members.iter().map(|m| m.arc.width()).sum()
    }
}

/// Builds `P(seed)`: the seed, its brother, then at each coarser level the arc
/// adjacent to each front plus its same-parent neighbor on the outward side,
/// until the fronts meet. Arcs are clipped to the still uncovered gap, so the
/// members always form an interior-disjoint cover of the circle.
pub fn annular_decomposition(seed: &DyadicArc) -> Result<AnnularDecomposition> {
    const OP: &str = "annular_decomposition";
    let j = seed.level;
    if j < 2 {
        return Err(Error::domain(OP, "seed level must be >= 2"));
    }
    let period = 1i64 << j;
    let pair = seed.index.div_ceil(2) as i64;
    // Covered region [left, right] in units of level-j arcs, unwrapped.
    let mut left = 2 * (pair - 1);
    let mut right = 2 * pair;

    let mut members = vec![
        Member { arc: *seed, role: MemberRole::Seed },
        Member { arc: seed.brother(), role: MemberRole::Brother },
    ];
    let mut terminal_level = j;

    for n in (1..j).rev() {
        let unit = 1i64 << (j - n);
        let mut gap = (left + period - right) / unit;
        if gap <= 0 {
            break;
        }
        terminal_level = n;

        // Anticlockwise front, starting at `right`.
        let a1 = DyadicArc::wrapped(n, right / unit + 1);
        let a_count = if n == 1 || a1.index % 2 == 1 { 2 } else { 1 };
        // Clockwise front, ending at `left`.
        let c1 = DyadicArc::wrapped(n, left / unit);
        let c_count = if n == 1 || c1.index % 2 == 0 { 2 } else { 1 };

        let take_a = a_count.min(gap);
        for step in 0..take_a {
            members.push(Member {
                arc: a1.neighbor(step),
                role: MemberRole::Anticlockwise { optional: step == 1 },
            });
        }
        right += take_a * unit;
        gap -= take_a;

        let take_c = c_count.min(gap);
        for step in 0..take_c {
            members.push(Member {
                arc: c1.neighbor(-step),
                role: MemberRole::Clockwise { optional: step == 1 },
            });
        }
        left -= take_c * unit;
        gap -= take_c;

        if gap == 0 {
            break;
        }
    }

    let decomposition = AnnularDecomposition { seed: *seed, members, terminal_level };
    check_exact_cover(&decomposition).map_err(|detail| Error::Structural { op: OP, detail })?;
    Ok(decomposition)
}

/// Verifies that the members are interior-disjoint and cover the circle.
fn check_exact_cover(d: &AnnularDecomposition) -> std::result::Result<(), String> {
    let fine = d.members.iter().map(|m| m.arc.level).max().unwrap_or(1);
    let period = 1u64 << fine;
    let mut spans: Vec<(u64, u64)> = d
        .members
        .iter()
        .map(|m| {
            let shift = fine - m.arc.level;
            ((m.arc.index - 1) << shift, m.arc.index << shift)
        })
        .collect();
    spans.sort_unstable();
    let mut cursor = 0;
    for (a, b) in &spans {
        if *a != cursor {
            return Err(format!(
                "members of P({}) are not a disjoint cover (gap or overlap at {a})",
                d.seed
            ));
        }
        cursor = *b;
    }
    if cursor != period {
        return Err(format!("members of P({}) cover only {cursor}/{period}", d.seed));
    }
    Ok(())
}

/// All `j`-level arcs `Gamma_{j,l}` whose decomposition contains `target`.
pub fn inducers(target: &DyadicArc, j: u32) -> Result<Vec<DyadicArc>> {
    const OP: &str = "inducers";
    if j < target.level {
        return Err(Error::domain(OP, format!("level {j} is below the target level {}", target.level)));
    }
    if j > MAX_INDUCER_LEVEL {
        return Err(Error::resource(OP, format!("level {j} exceeds the guard {MAX_INDUCER_LEVEL}")));
    }
    if j < 2 {
        return Ok(Vec::new());
    }
    let found: Vec<Option<DyadicArc>> = (1..=(1u64 << j))
        .into_par_iter()
        .map(|l| {
            let seed = DyadicArc { level: j, index: l };
            annular_decomposition(&seed).map(|d| d.contains(target).then_some(seed))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Counts, for every arc of level `<= j`, how many `j`-level seeds induce it.
pub fn inducer_counts(j: u32) -> Result<HashMap<DyadicArc, usize>> {
    if !(2..=MAX_INDUCER_LEVEL).contains(&j) {
        return Err(Error::resource("inducer_counts", format!("level {j} outside [2, {MAX_INDUCER_LEVEL}]")));
    }
    let decompositions: Vec<AnnularDecomposition> = (1..=(1u64 << j))
        .into_par_iter()
        .map(|l| annular_decomposition(&DyadicArc { level: j, index: l }))
        .collect::<Result<_>>()?;
    let mut counts = HashMap::new();
    for d in &decompositions {
        for arc in d.arcs() {
            *counts.entry(arc).or_insert(0) += 1;
        }
    }
    Ok(counts)
}
