use std::f64::consts::PI;

use crate::error::{arg, Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Interval { a: f64, b: f64 },
    /// Simple polygon, vertices counterclockwise. Side `i` runs from vertex
    /// `i` to vertex `i + 1`.
    Polygon { vertices: Vec<Point> },
    /// Disk approximated by an inscribed polygon with `segments` sides.
    Disk { center: Point, radius: f64, segments: usize },
}

/// Which part of the boundary forms the set Γ.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSelector {
    All,
    Empty,
    /// Side indices: polygon sides, base segments of a disk, or the endpoints
    /// of an interval (0 = a, 1 = b).
    Sides(Vec<usize>),
    /// Angular ranges `(from, to)` in radians about the disk center, taken
    /// counterclockwise; a range with `from > to` wraps through 0.
    Arcs(Vec<(f64, f64)>),
}

impl GammaSelector {
    pub(crate) fn contains_angle(ranges: &[(f64, f64)], theta: f64) -> bool {
        let t = theta.rem_euclid(2.0 * PI);
        ranges.iter().any(|&(from, to)| {
            let (f, e) = (from.rem_euclid(2.0 * PI), to.rem_euclid(2.0 * PI));
            if (to - from).abs() >= 2.0 * PI {
                true
            } else if f <= e {
                f <= t && t <= e
            } else {
                t >= f || t <= e
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub gamma: GammaSelector,
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64) -> Self {
        Self { kind: DomainKind::Interval { a, b }, gamma: GammaSelector::All }
    }

    pub fn polygon(vertices: Vec<Point>) -> Self {
        Self { kind: DomainKind::Polygon { vertices }, gamma: GammaSelector::All }
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        Self::polygon(vec![[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(1.0, 1.0)
    }

    /// Right triangle (0,0), (1,0), (0,1).
    pub fn right_triangle() -> Self {
        Self::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    }

    pub fn disk(center: Point, radius: f64, segments: usize) -> Self {
        Self { kind: DomainKind::Disk { center, radius, segments }, gamma: GammaSelector::All }
    }

    pub fn with_gamma(mut self, gamma: GammaSelector) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DomainKind::Interval { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::Geometry(format!("interval needs a < b, got ({a}, {b})")));
                }
            }
            DomainKind::Polygon { vertices } => validate_polygon(vertices)?,
            DomainKind::Disk { radius, segments, center } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::Geometry(format!("disk radius must be positive, got {radius}")));
                }
                if *segments < 8 {
                    return Err(Error::Geometry(format!(
                        "disk needs at least 8 boundary segments, got {segments}"
                    )));
                }
                if !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::Geometry("disk center is not finite".into()));
                }
            }
        }
        self.validate_gamma()
    }

    fn validate_gamma(&self) -> Result<()> {
        let sides = match &self.kind {
            DomainKind::Interval { .. } => 2,
            DomainKind::Polygon { vertices } => vertices.len(),
            DomainKind::Disk { segments, .. } => *segments,
        };
        match &self.gamma {
            GammaSelector::Sides(s) => {
                if let Some(bad) = s.iter().find(|&&i| i >= sides) {
                    return arg(format!("gamma side {bad} out of range (domain has {sides} sides)"));
                }
            }
            GammaSelector::Arcs(ranges) => {
                if !matches!(self.kind, DomainKind::Disk { .. }) {
                    return arg("arc selectors apply to disks only");
                }
                if ranges.iter().any(|(f, t)| !f.is_finite() || !t.is_finite()) {
                    return arg("arc bounds must be finite");
                }
            }
            GammaSelector::All | GammaSelector::Empty => {}
        }
        Ok(())
    }

    /// Measure |Ω| of the exact domain (disk: πr², not the inscribed polygon).
    pub fn measure(&self) -> f64 {
        match &self.kind {
            DomainKind::Interval { a, b } => b - a,
            DomainKind::Polygon { vertices } => signed_area(vertices),
            DomainKind::Disk { radius, .. } => PI * radius * radius,
        }
    }

    /// Exact inradius. Polygons must be convex.
    pub fn inradius(&self) -> Result<f64> {
        Ok(self.chebyshev_center()?.1)
    }

    /// Center and radius of the largest inscribed ball.
    pub fn chebyshev_center(&self) -> Result<(Point, f64)> {
        self.validate()?;
        match &self.kind {
            DomainKind::Interval { a, b } => Ok(([0.5 * (a + b), 0.0], 0.5 * (b - a))),
            DomainKind::Disk { center, radius, .. } => Ok((*center, *radius)),
            DomainKind::Polygon { vertices } => {
                if !is_convex(vertices) {
                    return Err(Error::UnsupportedDomain(
                        "inradius is only supported for convex polygons".into(),
                    ));
                }
                Ok(chebyshev_center_convex(vertices))
            }
        }
    }
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (p, q) = (v[i], v[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

#[inline]
pub(crate) fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d == 0.0
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn validate_polygon(v: &[Point]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(Error::Geometry(format!("polygon needs at least 3 vertices, got {n}")));
    }
    if v.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Geometry("polygon vertex is not finite".into()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if v[i] == v[j] {
                return Err(Error::Geometry(format!("polygon vertices {i} and {j} coincide")));
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::Geometry(format!("polygon sides {i} and {j} intersect")));
            }
        }
    }
    if signed_area(v) <= 0.0 {
        return Err(Error::Geometry("polygon vertices must be counterclockwise".into()));
    }
    Ok(())
}

pub(crate) fn is_convex(v: &[Point]) -> bool {
    let n = v.len();
    (0..n).all(|i| cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) >= 0.0)
}

/// Clips a convex polygon to the half-plane `n·x <= c`.
fn clip(poly: &[Point], normal: Point, c: f64) -> Vec<Point> {
    let side = |p: Point| normal[0] * p[0] + normal[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (sp, sq) = (side(p), side(q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Bisection on the radius: `r` is feasible iff the polygon shrunk by `r`
/// (intersection of inward-shifted side half-planes) is nonempty.
fn chebyshev_center_convex(v: &[Point]) -> (Point, f64) {
    let n = v.len();
    let planes: Vec<(Point, f64)> = (0..n)
        .map(|i| {
            let (p, q) = (v[i], v[(i + 1) % n]);
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = dx.hypot(dy);
            // outward normal of a counterclockwise side
            let nrm = [dy / len, -dx / len];
            (nrm, nrm[0] * p[0] + nrm[1] * p[1])
        })
        .collect();
    let shrink = |r: f64| -> Vec<Point> {
        let mut poly = v.to_vec();
        for &(nrm, c) in &planes {
            poly = clip(&poly, nrm, c - r);
            if poly.is_empty() {
                break;
            }
        }
        poly
    };
    let centroid = |poly: &[Point]| {
        let k = poly.len() as f64;
        let s = poly.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        [s[0] / k, s[1] / k]
    };
    let (mut lo, mut hi) = (0.0, {
        let xs = v.iter().map(|p| p[0]);
        let ys = v.iter().map(|p| p[1]);
        let w = xs.clone().fold(f64::MIN, f64::max) - xs.fold(f64::MAX, f64::min);
        let h = ys.clone().fold(f64::MIN, f64::max) - ys.fold(f64::MAX, f64::min);
        0.5 * w.min(h)
    });
    let mut best = centroid(v);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        let poly = shrink(mid);
        if poly.is_empty() {
            hi = mid;
        } else {
            lo = mid;
            best = centroid(&poly);
        }
    }
    (best, lo)
}
