use std::collections::HashMap;

use super::domain::{cross, GammaSelector, Point};
use crate::error::{arg, Error, Result};

/// A boundary facet: an edge in 2D, a single endpoint in 1D (stored as
/// `[v, v]`, with unit counting measure).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFacet {
    pub nodes: [usize; 2],
    pub gamma: bool,
    /// Index of the domain side this facet descends from.
    pub side: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cells {
    Segments(Vec<[usize; 2]>),
    Triangles(Vec<[usize; 3]>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySubset {
    All,
    Gamma,
}

/// Conforming simplicial mesh of an interval or a planar domain.
///
/// Nodes of a coarser level keep their indices after [`Mesh::refine`], so
/// finite-element spaces on successive levels are nested.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub(crate) nodes: Vec<Point>,
    pub(crate) cells: Cells,
    pub(crate) boundary: Vec<BoundaryFacet>,
    pub(crate) level: usize,
    /// Disk meshes project new boundary nodes onto this circle.
    pub(crate) circle: Option<(Point, f64)>,
}

impl Mesh {
    /// Assembles a mesh from raw parts and checks every mesh invariant.
    pub fn from_parts(nodes: Vec<Point>, cells: Cells, boundary: Vec<BoundaryFacet>) -> Result<Mesh> {
        let m = Mesh { nodes, cells, boundary, level: 0, circle: None };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        match self.cells {
            Cells::Segments(_) => 1,
            Cells::Triangles(_) => 2,
        }
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        match &self.cells {
            Cells::Segments(s) => s.len(),
            Cells::Triangles(t) => t.len(),
        }
    }

    pub fn boundary(&self) -> &[BoundaryFacet] {
        &self.boundary
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn circle(&self) -> Option<(Point, f64)> {
        self.circle
    }

    /// Cell vertex lists, as slices, in cell order.
    pub fn cell_vertices(&self) -> Vec<&[usize]> {
        match &self.cells {
            Cells::Segments(s) => s.iter().map(|c| c.as_slice()).collect(),
            Cells::Triangles(t) => t.iter().map(|c| c.as_slice()).collect(),
        }
    }

    /// Signed measure (length or area) of cell `k`.
    pub fn cell_measure(&self, k: usize) -> f64 {
        match &self.cells {
            Cells::Segments(s) => {
                let [a, b] = s[k];
                (self.nodes[b][0] - self.nodes[a][0]).abs()
            }
            Cells::Triangles(t) => {
                let [a, b, c] = t[k];
                0.5 * cross(self.nodes[a], self.nodes[b], self.nodes[c])
            }
        }
    }

    /// Surface measure of a boundary facet (edge length, or 1 for a point).
    pub fn facet_measure(&self, f: &BoundaryFacet) -> f64 {
        if self.dim() == 1 {
            1.0
        } else {
            let [a, b] = f.nodes;
            dist(self.nodes[a], self.nodes[b])
        }
    }

    /// Largest cell diameter.
    pub fn max_diameter(&self) -> f64 {
        match &self.cells {
            Cells::Segments(s) => s
                .iter()
                .map(|&[a, b]| (self.nodes[b][0] - self.nodes[a][0]).abs())
                .fold(0.0, f64::max),
            Cells::Triangles(t) => t
                .iter()
                .map(|&[a, b, c]| {
                    let (p, q, r) = (self.nodes[a], self.nodes[b], self.nodes[c]);
                    dist(p, q).max(dist(q, r)).max(dist(r, p))
                })
                .fold(0.0, f64::max),
        }
    }

    pub fn area(&self) -> f64 {
        (0..self.num_cells()).map(|k| self.cell_measure(k)).sum()
    }

    pub fn boundary_length(&self, subset: BoundarySubset) -> f64 {
        self.boundary
            .iter()
            .filter(|f| subset == BoundarySubset::All || f.gamma)
            .map(|f| self.facet_measure(f))
            .sum()
    }

    /// Closure of Γ: sorted node indices lying on a Γ facet.
    pub fn gamma_nodes(&self) -> Vec<usize> {
        let mut on = vec![false; self.nodes.len()];
        for f in self.boundary.iter().filter(|f| f.gamma) {
            on[f.nodes[0]] = true;
            on[f.nodes[1]] = true;
        }
        (0..self.nodes.len()).filter(|&i| on[i]).collect()
    }

    /// Sorted node indices lying on the boundary.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut on = vec![false; self.nodes.len()];
        for f in &self.boundary {
            on[f.nodes[0]] = true;
            on[f.nodes[1]] = true;
        }
        (0..self.nodes.len()).filter(|&i| on[i]).collect()
    }

    /// Re-marks the boundary with a new Γ selector.
    pub fn with_gamma(&self, gamma: &GammaSelector) -> Result<Mesh> {
        let mut out = self.clone();
        for f in out.boundary.iter_mut() {
            f.gamma = match gamma {
                GammaSelector::All => true,
                GammaSelector::Empty => false,
                GammaSelector::Sides(s) => s.contains(&f.side),
                GammaSelector::Arcs(ranges) => {
                    let Some((c, _)) = self.circle else {
                        return arg("arc selectors apply to disk meshes only");
                    };
                    let [a, b] = f.nodes;
                    let mid = midpoint(self.nodes[a], self.nodes[b]);
                    GammaSelector::contains_angle(ranges, (mid[1] - c[1]).atan2(mid[0] - c[0]))
                }
            };
        }
        Ok(out)
    }

    /// Uniform refinement: bisection in 1D, red refinement (one triangle into
    /// four congruent children) in 2D. Boundary markers are inherited and, on
    /// disk meshes, new boundary nodes are projected onto the circle.
    pub fn refine(&self) -> Mesh {
        let mut nodes = self.nodes.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid_of = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                nodes.push(midpoint(nodes[a], nodes[b]));
                nodes.len() - 1
            })
        };
        let (cells, boundary) = match &self.cells {
            Cells::Segments(segs) => {
                let mut out = Vec::with_capacity(2 * segs.len());
                for &[a, b] in segs {
                    let m = mid_of(a, b, &mut nodes);
                    out.push([a, m]);
                    out.push([m, b]);
                }
                (Cells::Segments(out), self.boundary.clone())
            }
            Cells::Triangles(tris) => {
                let mut out = Vec::with_capacity(4 * tris.len());
                // boundary edges first so their midpoints are known for projection
                let mut boundary = Vec::with_capacity(2 * self.boundary.len());
                for f in &self.boundary {
                    let [a, b] = f.nodes;
                    let m = mid_of(a, b, &mut nodes);
                    if let Some((c, r)) = self.circle {
                        let p = nodes[m];
                        let d = dist(p, c);
                        nodes[m] = [c[0] + r * (p[0] - c[0]) / d, c[1] + r * (p[1] - c[1]) / d];
                    }
                    boundary.push(BoundaryFacet { nodes: [a, m], ..*f });
                    boundary.push(BoundaryFacet { nodes: [m, b], ..*f });
                }
                for &[a, b, c] in tris {
                    let ab = mid_of(a, b, &mut nodes);
                    let bc = mid_of(b, c, &mut nodes);
                    let ca = mid_of(c, a, &mut nodes);
                    out.push([a, ab, ca]);
                    out.push([ab, b, bc]);
                    out.push([ca, bc, c]);
                    out.push([ab, bc, ca]);
                }
                (Cells::Triangles(out), boundary)
            }
        };
        Mesh { nodes, cells, boundary, level: self.level + 1, circle: self.circle }
    }

    /// Refines `times` times.
    pub fn refined(&self, times: usize) -> Mesh {
        let mut m = self.clone();
        for _ in 0..times {
            m = m.refine();
        }
        m
    }

    /// Exact distance from `p` to the boundary; `p` must lie in the closed domain.
    pub fn dist_to_boundary(&self, p: Point) -> Result<f64> {
        if !self.contains(p, 1e-12) {
            return arg(format!("point ({}, {}) lies outside the mesh", p[0], p[1]));
        }
        Ok(self.boundary_distance(p))
    }

    /// Distance to the boundary facets, without an inside test.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.boundary
            .iter()
            .map(|f| {
                let [a, b] = f.nodes;
                if self.dim() == 1 {
                    (p[0] - self.nodes[a][0]).abs()
                } else {
                    point_segment_distance(p, self.nodes[a], self.nodes[b])
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `p` lies in some cell, with absolute tolerance `tol`.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        match &self.cells {
            Cells::Segments(s) => s.iter().any(|&[a, b]| {
                let (x0, x1) = (self.nodes[a][0], self.nodes[b][0]);
                p[0] >= x0.min(x1) - tol && p[0] <= x0.max(x1) + tol
            }),
            Cells::Triangles(t) => t.iter().any(|&[a, b, c]| {
                let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
                let scale = dist(pa, pb).max(dist(pb, pc)).max(dist(pc, pa));
                let eps = -tol * scale;
                cross(pa, pb, p) >= eps && cross(pb, pc, p) >= eps && cross(pc, pa, p) >= eps
            }),
        }
    }

    /// Checks orientation, conformity and boundary consistency.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        for verts in self.cell_vertices() {
            if let Some(&bad) = verts.iter().find(|&&v| v >= n) {
                return Err(Error::Geometry(format!("cell references missing node {bad}")));
            }
        }
        for f in &self.boundary {
            if f.nodes.iter().any(|&v| v >= n) {
                return Err(Error::Geometry("boundary facet references a missing node".into()));
            }
        }
        match &self.cells {
            Cells::Segments(segs) => {
                for (k, _) in segs.iter().enumerate() {
                    let len = self.cell_measure(k);
                    if !(len > 0.0) {
                        return Err(Error::DegenerateElement { element: k, measure: len });
                    }
                }
                let mut count = vec![0usize; n];
                for &[a, b] in segs {
                    count[a] += 1;
                    count[b] += 1;
                }
                if count.iter().any(|&c| c > 2) {
                    return Err(Error::Geometry("node shared by more than two segments".into()));
                }
                let mut ends: Vec<usize> = (0..n).filter(|&i| count[i] == 1).collect();
                let mut given: Vec<usize> = self.boundary.iter().map(|f| f.nodes[0]).collect();
                ends.sort_unstable();
                given.sort_unstable();
                if ends != given {
                    return Err(Error::Geometry("boundary points do not match segment ends".into()));
                }
            }
            Cells::Triangles(tris) => {
                let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
                for (k, &[a, b, c]) in tris.iter().enumerate() {
                    let area = self.cell_measure(k);
                    if !(area > 0.0) {
                        return Err(Error::DegenerateElement { element: k, measure: area });
                    }
                    for (p, q) in [(a, b), (b, c), (c, a)] {
                        *edge_count.entry((p.min(q), p.max(q))).or_insert(0) += 1;
                    }
                }
                if edge_count.values().any(|&c| c > 2) {
                    return Err(Error::Geometry("edge shared by more than two triangles".into()));
                }
                let mut open: Vec<(usize, usize)> =
                    edge_count.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
                let mut given: Vec<(usize, usize)> = self
                    .boundary
                    .iter()
                    .map(|f| (f.nodes[0].min(f.nodes[1]), f.nodes[0].max(f.nodes[1])))
                    .collect();
                open.sort_unstable();
                given.sort_unstable();
                if open != given {
                    return Err(Error::Geometry(
                        "boundary edges do not match the open edges of the triangulation (hanging node or missing facet)"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dist(p: Point, q: Point) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

#[inline]
pub(crate) fn midpoint(p: Point, q: Point) -> Point {
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}

pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * dx, a[1] + t * dy])
}
