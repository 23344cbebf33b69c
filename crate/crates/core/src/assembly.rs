//! P1 finite-element discretisation of the Robin form
//! `∫|∇u|² + ∫_{∂Ω} σu²` against `∫u²`.
//!
//! All element integrals are exact: stiffness and mass of linear elements,
//! and the boundary mass with either piecewise-constant or piecewise-linear σ.

use crate::error::{arg, Error, Result};
use crate::geometry::{Cells, Mesh};
use crate::sparse::{dot, SparseSym, TripletBuilder};

/// Nonnegative boundary coefficient σ.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaField {
    /// The same value on every boundary facet.
    Constant(f64),
    /// One value per boundary facet, in `mesh.boundary()` order. For a
    /// built interval mesh facet 0 is `a` and facet 1 is `b`.
    PerFacet(Vec<f64>),
    /// Nodal values (length = node count), interpolated linearly along Γ
    /// facets. Facets off Γ carry no σ.
    Nodal(Vec<f64>),
}

impl SigmaField {
    /// `value` on Γ facets, zero elsewhere.
    pub fn on_gamma(mesh: &Mesh, value: f64) -> SigmaField {
        Self::by_marker(mesh, value, 0.0)
    }

    /// `gamma_value` on Γ facets, `other` on the rest of the boundary.
    pub fn by_marker(mesh: &Mesh, gamma_value: f64, other: f64) -> SigmaField {
        SigmaField::PerFacet(
            mesh.boundary().iter().map(|f| if f.gamma { gamma_value } else { other }).collect(),
        )
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let check = |v: &[f64]| -> Result<()> {
            match v.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
                Some(i) => arg(format!("sigma must be finite and nonnegative, entry {i} is {}", v[i])),
                None => Ok(()),
            }
        };
        match self {
            SigmaField::Constant(c) => check(&[*c]),
            SigmaField::PerFacet(v) => {
                if v.len() != mesh.boundary().len() {
                    return arg(format!(
                        "per-facet sigma has {} values for {} facets",
                        v.len(),
                        mesh.boundary().len()
                    ));
                }
                check(v)
            }
            SigmaField::Nodal(v) => {
                if v.len() != mesh.num_nodes() {
                    return arg(format!(
                        "nodal sigma has {} values for {} nodes",
                        v.len(),
                        mesh.num_nodes()
                    ));
                }
                check(v)
            }
        }
    }

    /// `∫_{∂Ω} σ dν`.
    pub fn total(&self, mesh: &Mesh) -> Result<f64> {
        let b = assemble_boundary_mass(mesh, self)?;
        let ones = vec![1.0; mesh.num_nodes()];
        Ok(b.quad(&ones))
    }
}

fn check_cell(mesh: &Mesh, k: usize) -> Result<f64> {
    let m = mesh.cell_measure(k);
    if m > 0.0 && m.is_finite() {
        Ok(m)
    } else {
        Err(Error::DegenerateElement { element: k, measure: m })
    }
}

/// Local P1 gradients of a triangle: rows (b_i, c_i) with ∇λ_i = (b_i, c_i) / (2A).
fn triangle_gradients(p: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [p[j][1] - p[k][1], p[k][0] - p[j][0]];
    }
    g
}

pub fn assemble_stiffness(mesh: &Mesh) -> Result<SparseSym> {
    let n = mesh.num_nodes();
    let nodes = mesh.nodes();
    match mesh.cells() {
        Cells::Segments(segs) => {
            let mut b = TripletBuilder::with_capacity(n, 4 * segs.len());
            for (k, &[i, j]) in segs.iter().enumerate() {
                let w = 1.0 / check_cell(mesh, k)?;
                b.push(i, i, w);
                b.push(i, j, -w);
                b.push(j, i, -w);
                b.push(j, j, w);
            }
            Ok(b.build())
        }
        Cells::Triangles(tris) => {
            let mut b = TripletBuilder::with_capacity(n, 9 * tris.len());
            for (k, tri) in tris.iter().enumerate() {
                let area = check_cell(mesh, k)?;
                let g = triangle_gradients(tri.map(|v| nodes[v]));
                for a in 0..3 {
                    for c in 0..3 {
                        let v = (g[a][0] * g[c][0] + g[a][1] * g[c][1]) / (4.0 * area);
                        b.push(tri[a], tri[c], v);
                    }
                }
            }
            Ok(b.build())
        }
    }
}

pub fn assemble_mass(mesh: &Mesh) -> Result<SparseSym> {
    let n = mesh.num_nodes();
    match mesh.cells() {
        Cells::Segments(segs) => {
            let mut b = TripletBuilder::with_capacity(n, 4 * segs.len());
            for (k, &[i, j]) in segs.iter().enumerate() {
                let h = check_cell(mesh, k)?;
                b.push(i, i, h / 3.0);
                b.push(i, j, h / 6.0);
                b.push(j, i, h / 6.0);
                b.push(j, j, h / 3.0);
            }
            Ok(b.build())
        }
        Cells::Triangles(tris) => {
            let mut b = TripletBuilder::with_capacity(n, 9 * tris.len());
            for (k, tri) in tris.iter().enumerate() {
                let area = check_cell(mesh, k)?;
                for a in 0..3 {
                    for c in 0..3 {
                        let v = if a == c { area / 6.0 } else { area / 12.0 };
                        b.push(tri[a], tri[c], v);
                    }
                }
            }
            Ok(b.build())
        }
    }
}

/// Boundary mass `∫_{∂Ω} σ φ_i φ_j dν`. In 1D the boundary measure counts
/// points, so the matrix is diagonal.
pub fn assemble_boundary_mass(mesh: &Mesh, sigma: &SigmaField) -> Result<SparseSym> {
    sigma.validate(mesh)?;
    let n = mesh.num_nodes();
    let mut b = TripletBuilder::with_capacity(n, 4 * mesh.boundary().len());
    for (e, f) in mesh.boundary().iter().enumerate() {
        // endpoint values of σ along the facet
        let (sa, sb) = match sigma {
            SigmaField::Constant(c) => (*c, *c),
            SigmaField::PerFacet(v) => (v[e], v[e]),
            SigmaField::Nodal(v) => {
                if !f.gamma {
                    continue;
                }
                (v[f.nodes[0]], v[f.nodes[1]])
            }
        };
        let [i, j] = f.nodes;
        if mesh.dim() == 1 {
            b.push(i, i, sa);
            continue;
        }
        let len = mesh.facet_measure(f);
        // ∫λ_a³ = L/4, ∫λ_a²λ_b = L/12 on a segment
        b.push(i, i, len * (sa / 4.0 + sb / 12.0));
        b.push(j, j, len * (sa / 12.0 + sb / 4.0));
        let off = len * (sa + sb) / 12.0;
        b.push(i, j, off);
        b.push(j, i, off);
    }
    Ok(b.build())
}

/// Discrete quadratic forms of one mesh, optionally restricted to the nodes
/// off Γ.
#[derive(Debug, Clone)]
pub struct DiscreteForm<'a> {
    pub mesh: &'a Mesh,
    pub stiffness: SparseSym,
    pub mass: SparseSym,
    pub boundary: SparseSym,
    /// Node index of each remaining unknown when Γ has been eliminated.
    pub free: Option<Vec<usize>>,
}

impl<'a> DiscreteForm<'a> {
    pub fn assemble(mesh: &'a Mesh, sigma: &SigmaField) -> Result<Self> {
        Ok(Self {
            mesh,
            stiffness: assemble_stiffness(mesh)?,
            mass: assemble_mass(mesh)?,
            boundary: assemble_boundary_mass(mesh, sigma)?,
            free: None,
        })
    }

    /// Stiffness and mass only, with a zero boundary term.
    pub fn neumann(mesh: &'a Mesh) -> Result<Self> {
        Self::assemble(mesh, &SigmaField::Constant(0.0))
    }

    pub fn dim(&self) -> usize {
        self.stiffness.dim()
    }

    /// K + B, the matrix of the Robin form.
    pub fn robin_matrix(&self) -> SparseSym {
        self.stiffness.add_scaled(1.0, &self.boundary, 1.0).expect("same dimension")
    }

    /// Removes the rows and columns of Γ nodes (Dirichlet condition on Γ).
    pub fn eliminate_gamma(&self) -> Result<DiscreteForm<'a>> {
        if self.free.is_some() {
            return arg("form already has Γ eliminated");
        }
        let gamma = self.mesh.gamma_nodes();
        if gamma.is_empty() {
            return arg("Γ is empty; nothing to eliminate");
        }
        let mut on = vec![false; self.mesh.num_nodes()];
        gamma.iter().for_each(|&i| on[i] = true);
        let free: Vec<usize> = (0..self.mesh.num_nodes()).filter(|&i| !on[i]).collect();
        if free.is_empty() {
            return arg("every node lies on Γ");
        }
        Ok(DiscreteForm {
            mesh: self.mesh,
            stiffness: self.stiffness.principal_submatrix(&free),
            mass: self.mass.principal_submatrix(&free),
            boundary: self.boundary.principal_submatrix(&free),
            free: Some(free),
        })
    }

    /// Expands a vector on the free nodes to all nodes, zero on Γ.
    pub fn extend(&self, x: &[f64]) -> Vec<f64> {
        match &self.free {
            None => x.to_vec(),
            Some(free) => {
                let mut full = vec![0.0; self.mesh.num_nodes()];
                for (k, &i) in free.iter().enumerate() {
                    full[i] = x[k];
                }
                full
            }
        }
    }

    pub fn integrate(&self, u: &[f64]) -> f64 {
        dot(&vec![1.0; u.len()], &self.mass.matvec(u))
    }

    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.mass.quad(u).sqrt()
    }
}

/// `∫_Ω u`.
pub fn integrate(mesh: &Mesh, u: &[f64]) -> Result<f64> {
    check_len(mesh, u)?;
    Ok(DiscreteForm::neumann(mesh)?.integrate(u))
}

/// `‖u‖_{L²(Ω)}`.
pub fn l2_norm(mesh: &Mesh, u: &[f64]) -> Result<f64> {
    check_len(mesh, u)?;
    Ok(assemble_mass(mesh)?.quad(u).sqrt())
}

/// `∫_{∂Ω} σ u²`.
pub fn boundary_integral(mesh: &Mesh, sigma: &SigmaField, u: &[f64]) -> Result<f64> {
    check_len(mesh, u)?;
    Ok(assemble_boundary_mass(mesh, sigma)?.quad(u))
}

fn check_len(mesh: &Mesh, u: &[f64]) -> Result<()> {
    if u.len() != mesh.num_nodes() {
        return arg(format!("vector has {} entries for {} nodes", u.len(), mesh.num_nodes()));
    }
    Ok(())
}
