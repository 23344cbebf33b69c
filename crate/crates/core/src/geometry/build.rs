use std::f64::consts::PI;

use super::domain::{cross, DomainKind, DomainSpec, Point};
use super::mesh::{BoundaryFacet, Cells, Mesh};
use crate::error::{arg, Error, Result};

/// Meshes `domain` so that every cell has diameter at most `target_h`.
///
/// Polygons are ear-clipped and then red-refined. Disks get a ring mesh whose
/// outer ring has the requested number of segments (more, if `target_h`
/// forces extra refinement). Γ markers come from `domain.gamma`.
pub fn build_mesh(domain: &DomainSpec, target_h: f64) -> Result<Mesh> {
    if !(target_h > 0.0) || !target_h.is_finite() {
        return arg(format!("target_h must be positive, got {target_h}"));
    }
    domain.validate()?;
    let base = match &domain.kind {
        DomainKind::Interval { a, b } => {
            let n = ((b - a) / target_h - 1e-12).ceil().max(1.0) as usize;
            interval_mesh(*a, *b, n)
        }
        DomainKind::Polygon { vertices } => ear_clip(vertices)?,
        DomainKind::Disk { center, radius, segments } => disk_mesh(*center, *radius, *segments),
    };
    let mut mesh = base.with_gamma(&domain.gamma)?;
    while mesh.max_diameter() > target_h * (1.0 + 1e-12) {
        mesh = mesh.refine();
    }
    mesh.level = 0;
    mesh.validate()?;
    Ok(mesh)
}

fn interval_mesh(a: f64, b: f64, n: usize) -> Mesh {
    let nodes: Vec<Point> = (0..=n)
        .map(|i| {
            let x = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
            [x, 0.0]
        })
        .collect();
    let segs = (0..n).map(|i| [i, i + 1]).collect();
    let boundary = vec![
        BoundaryFacet { nodes: [0, 0], gamma: true, side: 0 },
        BoundaryFacet { nodes: [n, n], gamma: true, side: 1 },
    ];
    Mesh { nodes, cells: Cells::Segments(segs), boundary, level: 0, circle: None }
}

fn point_in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
fn ear_clip(v: &[Point]) -> Result<Mesh> {
    let n = v.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let k = idx.len();
        let ear = (0..k).find(|&i| {
            let (p, c, q) = (idx[(i + k - 1) % k], idx[i], idx[(i + 1) % k]);
            if cross(v[p], v[c], v[q]) <= 0.0 {
                return false;
            }
            idx.iter()
                .filter(|&&j| j != p && j != c && j != q)
                .all(|&j| !point_in_triangle(v[j], v[p], v[c], v[q]))
        });
        let Some(i) = ear else {
            return Err(Error::Geometry("ear clipping found no ear".into()));
        };
        tris.push([idx[(i + k - 1) % k], idx[i], idx[(i + 1) % k]]);
        idx.remove(i);
    }
    tris.push([idx[0], idx[1], idx[2]]);
    let boundary = (0..n)
        .map(|i| BoundaryFacet { nodes: [i, (i + 1) % n], gamma: true, side: i })
        .collect();
    Ok(Mesh { nodes: v.to_vec(), cells: Cells::Triangles(tris), boundary, level: 0, circle: None })
}

/// Concentric-ring mesh of a disk. When the segment count is a multiple of 8
/// (or 6) ring `j` carries `8j` (or `6j`) nodes, which makes the mesh
/// invariant under rotation by 2π/8 (2π/6).
fn disk_mesh(center: Point, radius: f64, segments: usize) -> Mesh {
    let sector = [8, 6].into_iter().find(|s| segments % s == 0);
    let (rings, counts): (usize, Vec<usize>) = match sector {
        Some(s) => {
            let r = segments / s;
            (r, (1..=r).map(|j| s * j).collect())
        }
        None => {
            let r = ((segments as f64 / (2.0 * PI)).round() as usize).max(1);
            let mut c: Vec<usize> = (1..=r)
                .map(|j| ((segments * j) as f64 / r as f64).round().max(3.0) as usize)
                .collect();
            c[r - 1] = segments;
            (r, c)
        }
    };
    let mut nodes = vec![center];
    let mut ring_start = Vec::with_capacity(rings);
    for (j, &count) in counts.iter().enumerate() {
        ring_start.push(nodes.len());
        let rad = radius * (j + 1) as f64 / rings as f64;
        for k in 0..count {
            let t = 2.0 * PI * k as f64 / count as f64;
            nodes.push([center[0] + rad * t.cos(), center[1] + rad * t.sin()]);
        }
    }
    let mut tris = Vec::new();
    let c1 = counts[0];
    for k in 0..c1 {
        tris.push([0, ring_start[0] + k, ring_start[0] + (k + 1) % c1]);
    }
    for j in 0..rings - 1 {
        let (p, q) = (counts[j], counts[j + 1]);
        let (si, so) = (ring_start[j], ring_start[j + 1]);
        let (mut i, mut o) = (0usize, 0usize);
        while i < p || o < q {
            // Compare the angles of the next inner/outer nodes exactly:
            // (i+1)/p vs (o+1)/q.
            let advance_inner = o == q || (i < p && (i + 1) * q < (o + 1) * p);
            if advance_inner {
                tris.push([si + i % p, so + o % q, si + (i + 1) % p]);
                i += 1;
            } else {
                tris.push([si + i % p, so + o % q, so + (o + 1) % q]);
                o += 1;
            }
        }
    }
    let outer = ring_start[rings - 1];
    let boundary = (0..segments)
        .map(|k| BoundaryFacet {
            nodes: [outer + k, outer + (k + 1) % segments],
            gamma: true,
            side: k,
        })
        .collect();
    Mesh {
        nodes,
        cells: Cells::Triangles(tris),
        boundary,
        level: 0,
        circle: Some((center, radius)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundarySubset, GammaSelector};

    #[test]
    fn unit_square_half() {
        let m = build_mesh(&DomainSpec::unit_square(), 0.5).unwrap();
        assert!(m.max_diameter() <= 0.5);
        // every side split into at least two segments, all on Γ
        for side in 0..4 {
            let count = m.boundary().iter().filter(|f| f.side == side).count();
            assert!(count >= 2, "side {side} has {count} segments");
        }
        assert!(m.boundary().iter().all(|f| f.gamma));
        assert!((m.area() - 1.0).abs() < 1e-14);
        assert!((m.boundary_length(BoundarySubset::All) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn interval_quarter() {
        let m = build_mesh(&DomainSpec::interval(0.0, 1.0), 0.25).unwrap();
        assert_eq!(m.num_cells(), 4);
        let pts: Vec<f64> = m.boundary().iter().map(|f| m.nodes()[f.nodes[0]][0]).collect();
        assert_eq!(pts, vec![0.0, 1.0]);
        assert_eq!(m.area(), 1.0);
        assert_eq!(m.boundary_length(BoundarySubset::All), 2.0);
    }

    #[test]
    fn disk_nodes_on_circle() {
        let m = build_mesh(&DomainSpec::disk([0.0, 0.0], 1.0, 64), 0.2).unwrap();
        assert!(m.max_diameter() <= 0.2);
        for &i in &m.boundary_nodes() {
            let [x, y] = m.nodes()[i];
            assert!((x.hypot(y) - 1.0).abs() < 1e-15);
        }
        let r = m.refine();
        for &i in &r.boundary_nodes() {
            let [x, y] = r.nodes()[i];
            assert!((x.hypot(y) - 1.0).abs() < 1e-12);
        }
        r.validate().unwrap();
    }

    #[test]
    fn disk_with_irregular_segment_count() {
        let m = build_mesh(&DomainSpec::disk([1.0, -2.0], 0.5, 13), 1.0).unwrap();
        m.validate().unwrap();
        assert_eq!(m.boundary().len(), 13);
    }

    #[test]
    fn triangle_measures() {
        let m = build_mesh(&DomainSpec::right_triangle(), 1.5).unwrap();
        assert!((m.area() - 0.5).abs() < 1e-15);
        let p = m.boundary_length(BoundarySubset::All);
        assert!((p - (2.0 + 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_h() {
        assert!(build_mesh(&DomainSpec::unit_square(), 0.0).is_err());
        assert!(build_mesh(&DomainSpec::unit_square(), -1.0).is_err());
    }

    #[test]
    fn nonconvex_polygon_meshes() {
        let l = DomainSpec::polygon(vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ]);
        let m = build_mesh(&l, 0.3).unwrap();
        assert!((m.area() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn arcs_mark_by_midpoint_angle() {
        let d = DomainSpec::disk([0.0, 0.0], 1.0, 16)
            .with_gamma(GammaSelector::Arcs(vec![(0.0, PI)]));
        let m = build_mesh(&d, 1.0).unwrap();
        let g = m.boundary_length(BoundarySubset::Gamma);
        let all = m.boundary_length(BoundarySubset::All);
        assert!((g / all - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_side_gamma_closure_includes_corners() {
        let d = DomainSpec::unit_square().with_gamma(GammaSelector::Sides(vec![0]));
        let m = build_mesh(&d, 0.36).unwrap();
        let g = m.gamma_nodes();
        assert!(g.iter().all(|&i| m.nodes()[i][1] == 0.0));
        assert!(g.iter().any(|&i| m.nodes()[i] == [0.0, 0.0]));
        assert!(g.iter().any(|&i| m.nodes()[i] == [1.0, 0.0]));
        assert_eq!(g.len(), 5);
    }
}
