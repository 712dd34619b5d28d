//! Post-processing: stream function and legacy VTK output.

use std::fmt::Write as _;
use std::path::Path;

use crate::fem::{assemble_scalar_stiffness, assemble_vorticity_load, DiscreteField, FemError, FieldKind, SpaceLayout};
use crate::sparse::{SolveError, SparseLu, SparseMatrix};

#[derive(Debug, thiserror::Error)]
pub enum PostError {
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Stream function `ψ ∈ P2`, `ψ = 0` on the boundary, solving
/// `−Δψ = ∂₂u₁ − ∂₁u₂` weakly; for `u = (−∂₂ψ, ∂₁ψ)` this recovers `ψ`.
pub fn stream_function(layout: &SpaceLayout, velocity: &DiscreteField) -> Result<DiscreteField, PostError> {
    let u = velocity.expect(FieldKind::VelocityP2)?;
    let n = layout.n_nodes();
    let rhs = assemble_vorticity_load(layout, u);
    let mut psi = vec![0.0; n];
    if rhs.iter().all(|r| *r == 0.0) {
        return Ok(DiscreteField::new(layout, FieldKind::ScalarP2, psi)?);
    }
    let tags = layout.node_tags();
    let mut index = vec![usize::MAX; n];
    let free: Vec<usize> = (0..n).filter(|&i| tags[i].is_none()).collect();
    for (k, &i) in free.iter().enumerate() {
        index[i] = k;
    }
    let k = assemble_scalar_stiffness(layout);
    let trip: Vec<(usize, usize, f64)> = k
        .triplets()
        .into_iter()
        .filter(|&(i, j, _)| index[i] != usize::MAX && index[j] != usize::MAX)
        .map(|(i, j, v)| (index[i], index[j], v))
        .collect();
    let reduced = SparseMatrix::from_triplets(free.len(), free.len(), &trip);
    let b: Vec<f64> = free.iter().map(|&i| rhs[i]).collect();
    let x = SparseLu::factorize(&reduced)?.solve(&b)?;
    for (k, &i) in free.iter().enumerate() {
        psi[i] = x[k];
    }
    Ok(DiscreteField::new(layout, FieldKind::ScalarP2, psi)?)
}

/// Nodal values of a field at every P2 node (P1 fields are interpolated
/// linearly to the edge midpoints).
fn node_values(layout: &SpaceLayout, field: &DiscreteField) -> Result<Vec<[f64; 2]>, FemError> {
    let expected = layout.field_len(field.kind);
    if field.coefficients.len() != expected {
        return Err(FemError::Length {
            expected,
            found: field.coefficients.len(),
        });
    }
    let c = &field.coefficients;
    let n = layout.n_nodes();
    Ok(match field.kind {
        FieldKind::VelocityP2 => (0..n).map(|k| [c[layout.velocity_dof(0, k)], c[layout.velocity_dof(1, k)]]).collect(),
        FieldKind::ScalarP2 => c.iter().map(|v| [*v, 0.0]).collect(),
        FieldKind::PressureP1 => {
            let mut out: Vec<[f64; 2]> = c.iter().map(|v| [*v, 0.0]).collect();
            out.extend(layout.edges().iter().map(|e| [0.5 * (c[e[0]] + c[e[1]]), 0.0]));
            out
        }
    })
}

/// Legacy ASCII VTK unstructured grid on the P2 node set: every triangle is
/// split into four at its edge midpoints, so P2 nodal values are written
/// exactly. Velocity fields become `VECTORS`, the others `SCALARS`.
pub fn vtk_string(layout: &SpaceLayout, fields: &[(&str, &DiscreteField)]) -> Result<String, FemError> {
    let points = layout.node_points();
    let nt = layout.mesh().n_triangles();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nnsls snapshot\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in points {
        let _ = writeln!(s, "{:e} {:e} 0", p.x, p.y);
    }
    let _ = writeln!(s, "CELLS {} {}", 4 * nt, 16 * nt);
    for t in 0..nt {
        let [a, b, c, ab, bc, ca] = layout.p2_nodes(t);
        for cell in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
            let _ = writeln!(s, "3 {} {} {}", cell[0], cell[1], cell[2]);
        }
    }
    let _ = writeln!(s, "CELL_TYPES {}", 4 * nt);
    for _ in 0..4 * nt {
        s.push_str("5\n");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", points.len());
    }
    for (name, field) in fields {
        let values = node_values(layout, field)?;
        if field.kind == FieldKind::VelocityP2 {
            let _ = writeln!(s, "VECTORS {name} double");
            for v in values {
                let _ = writeln!(s, "{:e} {:e} 0", v[0], v[1]);
            }
        } else {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in values {
                let _ = writeln!(s, "{:e}", v[0]);
            }
        }
    }
    Ok(s)
}

pub fn write_vtk(layout: &SpaceLayout, fields: &[(&str, &DiscreteField)], path: &Path) -> Result<(), PostError> {
    let text = vtk_string(layout, fields)?;
    std::fs::write(path, text).map_err(|source| PostError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests;
