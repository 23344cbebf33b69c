//! Domains, meshes and geometric functionals: |Ω|, |∂Ω|, the inradius and
//! the distance to the boundary.

mod build;
mod domain;
mod io;
mod mesh;

pub use build::build_mesh;
pub use domain::{DomainKind, DomainSpec, GammaSelector, Point};
pub use io::{read_mesh, write_mesh};
pub use mesh::{BoundaryFacet, BoundarySubset, Cells, Mesh};
