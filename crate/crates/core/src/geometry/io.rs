//! Plain-text mesh format.
//!
//! ```text
//! robinspec-mesh v1 <dim>
//! <N_v> <N_e> <N_b>
//! <x> [<y>]            N_v coordinate lines
//! <i> <j> [<k>]        N_e cell lines, 0-based
//! <v0> <v1> <marker>   N_b boundary lines (1D: <v> <marker>); 1 = Γ, 0 = rest
//! ```
//!
//! Coordinates are written in shortest round-trip form so a write/read cycle
//! is lossless. Side indices are not stored; a mesh read back numbers its
//! sides by boundary line.

use std::fmt::Write as _;

use super::mesh::{BoundaryFacet, Cells, Mesh};
use crate::error::{Error, Result};

const MAGIC: &str = "robinspec-mesh v1";

pub fn write_mesh(mesh: &Mesh) -> String {
    let dim = mesh.dim();
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {dim}");
    let _ = writeln!(s, "{} {} {}", mesh.num_nodes(), mesh.num_cells(), mesh.boundary().len());
    for p in mesh.nodes() {
        if dim == 1 {
            let _ = writeln!(s, "{:?}", p[0]);
        } else {
            let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
        }
    }
    for verts in mesh.cell_vertices() {
        let line: Vec<String> = verts.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    for f in mesh.boundary() {
        let marker = u8::from(f.gamma);
        if dim == 1 {
            let _ = writeln!(s, "{} {marker}", f.nodes[0]);
        } else {
            let _ = writeln!(s, "{} {} {marker}", f.nodes[0], f.nodes[1]);
        }
    }
    s
}

fn fmt_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format { line, msg: msg.into() }
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| -> Result<(usize, Vec<&str>)> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l.split_whitespace().collect()))
            .ok_or_else(|| fmt_err(0, format!("unexpected end of file, expected {what}")))
    };
    let (ln, head) = next("header")?;
    if head.len() != 3 || format!("{} {}", head[0], head[1]) != MAGIC {
        return Err(fmt_err(ln, "bad header"));
    }
    let dim: usize = head[2].parse().map_err(|_| fmt_err(ln, "bad dimension"))?;
    if dim != 1 && dim != 2 {
        return Err(fmt_err(ln, format!("unsupported dimension {dim}")));
    }
    let (ln, counts) = next("counts")?;
    let counts: Vec<usize> = counts
        .iter()
        .map(|t| t.parse().map_err(|_| fmt_err(ln, "bad count")))
        .collect::<Result<_>>()?;
    let [nv, ne, nb] = counts[..] else {
        return Err(fmt_err(ln, "expected three counts"));
    };

    fn parse<T: std::str::FromStr>(ln: usize, toks: &[&str], n: usize) -> Result<Vec<T>> {
        if toks.len() != n {
            return Err(fmt_err(ln, format!("expected {n} fields, got {}", toks.len())));
        }
        toks.iter()
            .map(|t| t.parse().map_err(|_| fmt_err(ln, format!("cannot parse '{t}'"))))
            .collect()
    }

    let mut nodes = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = next("node")?;
        let c: Vec<f64> = parse(ln, &t, dim)?;
        nodes.push([c[0], if dim == 2 { c[1] } else { 0.0 }]);
    }
    let cells = if dim == 1 {
        let mut v = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (ln, t) = next("cell")?;
            let c: Vec<usize> = parse(ln, &t, 2)?;
            v.push([c[0], c[1]]);
        }
        Cells::Segments(v)
    } else {
        let mut v = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (ln, t) = next("cell")?;
            let c: Vec<usize> = parse(ln, &t, 3)?;
            v.push([c[0], c[1], c[2]]);
        }
        Cells::Triangles(v)
    };
    let mut boundary = Vec::with_capacity(nb);
    for side in 0..nb {
        let (ln, t) = next("boundary facet")?;
        let c: Vec<usize> = parse(ln, &t, dim + 1)?;
        let (verts, marker) = if dim == 1 { ([c[0], c[0]], c[1]) } else { ([c[0], c[1]], c[2]) };
        if marker > 1 {
            return Err(fmt_err(ln, format!("marker must be 0 or 1, got {marker}")));
        }
        boundary.push(BoundaryFacet { nodes: verts, gamma: marker == 1, side });
    }
    if let Some((i, _)) = lines.next() {
        return Err(fmt_err(i + 1, "trailing content"));
    }
    Mesh::from_parts(nodes, cells, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, GammaSelector};

    #[test]
    fn roundtrip_2d_and_1d() {
        let d = DomainSpec::disk([0.0, 0.0], 1.0, 16).with_gamma(GammaSelector::Arcs(vec![(0.0, 1.0)]));
        let m = build_mesh(&d, 1.0).unwrap().refine();
        let back = read_mesh(&write_mesh(&m)).unwrap();
        assert_eq!(back.nodes(), m.nodes());
        assert_eq!(back.cells(), m.cells());
        let g1: Vec<bool> = m.boundary().iter().map(|f| f.gamma).collect();
        let g2: Vec<bool> = back.boundary().iter().map(|f| f.gamma).collect();
        assert_eq!(g1, g2);

        let d = DomainSpec::interval(-1.0, 2.0).with_gamma(GammaSelector::Sides(vec![1]));
        let m = build_mesh(&d, 0.3).unwrap();
        let text = write_mesh(&m);
        assert!(text.starts_with("robinspec-mesh v1 1\n11 10 2\n"));
        let back = read_mesh(&text).unwrap();
        assert_eq!(back.nodes(), m.nodes());
        assert_eq!(back.gamma_nodes(), m.gamma_nodes());
    }

    #[test]
    fn header_layout() {
        let m = build_mesh(&DomainSpec::right_triangle(), 2.0).unwrap();
        let text = write_mesh(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "robinspec-mesh v1 2");
        assert_eq!(lines[1], "3 1 3");
        assert_eq!(lines[5], "0 1 2");
        assert_eq!(lines[6], "0 1 1");
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_mesh("robinspec-mesh v2 2\n").is_err());
        assert!(read_mesh("robinspec-mesh v1 2\n3 1 3\n0 0\n1 0\n").is_err());
        // clockwise triangle
        let bad = "robinspec-mesh v1 2\n3 1 3\n0 0\n1 0\n0 1\n0 2 1\n0 1 1\n1 2 1\n2 0 1\n";
        assert!(read_mesh(bad).is_err());
        // boundary facet missing
        let bad = "robinspec-mesh v1 2\n3 1 2\n0 0\n1 0\n0 1\n0 1 2\n0 1 1\n1 2 1\n";
        assert!(read_mesh(bad).is_err());
    }
}
