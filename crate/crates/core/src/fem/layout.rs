use std::collections::HashMap;
use std::sync::Arc;

use super::element::{Element, EDGES};
use super::FemError;
use crate::mesh::{BoundaryTag, Mesh, Point2};

/// Degree-of-freedom layout of the P2 (velocity) / P1 (pressure) pair.
///
/// P2 nodes are the mesh vertices followed by one node per edge. Velocity
/// dof `(component, node)` has global index `component * n_nodes + node`;
/// pressure dofs are the vertices.
#[derive(Debug)]
pub struct SpaceLayout {
    mesh: Arc<Mesh>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    node_points: Vec<Point2>,
    node_tags: Vec<Option<BoundaryTag>>,
}

/// Which finite element space a coefficient vector lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    VelocityP2,
    PressureP1,
    ScalarP2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    pub kind: FieldKind,
    pub coefficients: Vec<f64>,
}

impl DiscreteField {
    pub fn new(layout: &SpaceLayout, kind: FieldKind, coefficients: Vec<f64>) -> Result<Self, FemError> {
        let expected = layout.field_len(kind);
        if coefficients.len() != expected {
            return Err(FemError::Length {
                expected,
                found: coefficients.len(),
            });
        }
        Ok(Self { kind, coefficients })
    }

    pub fn zeros(layout: &SpaceLayout, kind: FieldKind) -> Self {
        Self {
            kind,
            coefficients: vec![0.0; layout.field_len(kind)],
        }
    }

    pub fn expect(&self, kind: FieldKind) -> Result<&[f64], FemError> {
        if self.kind != kind {
            return Err(FemError::KindMismatch {
                expected: kind,
                found: self.kind,
            });
        }
        Ok(&self.coefficients)
    }
}

/// Prescribed boundary velocity per tag. A tag without a function is an
/// error if the mesh carries that tag.
#[derive(Clone, Copy, Default)]
pub struct BoundaryData<'a> {
    pub lid: Option<&'a dyn Fn(Point2) -> [f64; 2]>,
    pub wall: Option<&'a dyn Fn(Point2) -> [f64; 2]>,
}

fn zero_velocity(_: Point2) -> [f64; 2] {
    [0.0, 0.0]
}

fn lid_velocity(p: Point2) -> [f64; 2] {
    [lid_profile(p.x), 0.0]
}

impl BoundaryData<'static> {
    pub fn homogeneous() -> Self {
        Self {
            lid: Some(&zero_velocity),
            wall: Some(&zero_velocity),
        }
    }

    /// Moving lid `(g(x), 0)`, no-slip walls.
    pub fn cavity() -> Self {
        Self {
            lid: Some(&lid_velocity),
            wall: Some(&zero_velocity),
        }
    }
}

/// Tangential lid speed `g(x) = (1 − e^{100(x−1/2)})(1 − e^{−100(x+1/2)})`,
/// close to one in the middle and vanishing at `x = ±1/2`.
pub fn lid_profile(x: f64) -> f64 {
    (1.0 - (100.0 * (x - 0.5)).exp()) * (1.0 - (-100.0 * (x + 0.5)).exp())
}

impl SpaceLayout {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let nv = mesh.n_vertices();
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut triangle_edges = Vec::with_capacity(mesh.n_triangles());
        for t in mesh.triangles() {
            let mut te = [0; 3];
            for (slot, &(i, j)) in EDGES.iter().enumerate() {
                let (a, b) = (t[i].min(t[j]), t[i].max(t[j]));
                te[slot] = *edge_ids.entry((a, b)).or_insert_with(|| {
                    edges.push([a, b]);
                    edges.len() - 1
                });
            }
            triangle_edges.push(te);
        }
        let v = mesh.vertices();
        let mut node_points = v.to_vec();
        node_points.extend(edges.iter().map(|e| v[e[0]].midpoint(&v[e[1]])));
        let mut node_tags = mesh.boundary_vertex_tags();
        node_tags.resize(nv + edges.len(), None);
        for be in mesh.boundary_edges() {
            let (a, b) = (be.vertices[0].min(be.vertices[1]), be.vertices[0].max(be.vertices[1]));
            node_tags[nv + edge_ids[&(a, b)]] = Some(be.tag);
        }
        Self {
            mesh,
            edges,
            triangle_edges,
            node_points,
            node_tags,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn n_nodes(&self) -> usize {
        self.node_points.len()
    }

    pub fn n_velocity_dofs(&self) -> usize {
        2 * self.n_nodes()
    }

    pub fn n_pressure_dofs(&self) -> usize {
        self.mesh.n_vertices()
    }

    pub fn field_len(&self, kind: FieldKind) -> usize {
        match kind {
            FieldKind::VelocityP2 => self.n_velocity_dofs(),
            FieldKind::PressureP1 => self.n_pressure_dofs(),
            FieldKind::ScalarP2 => self.n_nodes(),
        }
    }

    pub fn node_points(&self) -> &[Point2] {
        &self.node_points
    }

    /// Boundary tag of each P2 node (`None` for interior nodes).
    pub fn node_tags(&self) -> &[Option<BoundaryTag>] {
        &self.node_tags
    }

    pub fn velocity_dof(&self, component: usize, node: usize) -> usize {
        component * self.n_nodes() + node
    }

    /// Global P2 node numbers of triangle `t` in local order.
    pub fn p2_nodes(&self, t: usize) -> [usize; 6] {
        let v = self.mesh.triangles()[t];
        let e = self.triangle_edges[t];
        let nv = self.mesh.n_vertices();
        [v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]]
    }

    /// Global velocity dofs of triangle `t`: x-components of the six nodes,
    /// then y-components.
    pub fn velocity_dofs(&self, t: usize) -> [usize; 12] {
        let nodes = self.p2_nodes(t);
        let mut out = [0; 12];
        for c in 0..2 {
            for k in 0..6 {
                out[6 * c + k] = self.velocity_dof(c, nodes[k]);
            }
        }
        out
    }

    pub fn element(&self, t: usize) -> Element {
        let v = self.mesh.vertices();
        let tri = self.mesh.triangles()[t];
        Element::new([v[tri[0]], v[tri[1]], v[tri[2]]])
    }

    /// Velocity dofs whose support point lies on the boundary.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_velocity_dofs()];
        for (node, tag) in self.node_tags.iter().enumerate() {
            if tag.is_some() {
                mask[self.velocity_dof(0, node)] = true;
                mask[self.velocity_dof(1, node)] = true;
            }
        }
        mask
    }

    /// Lowest-index vertex; its pressure dof is fixed to zero.
    pub fn pinned_pressure(&self) -> usize {
        0
    }

    /// Interpolates boundary data at the P2 boundary nodes. The result is a
    /// full velocity vector, zero at interior dofs.
    pub fn interpolate_dirichlet(&self, data: &BoundaryData<'_>) -> Result<Vec<f64>, FemError> {
        let mut out = vec![0.0; self.n_velocity_dofs()];
        for (node, tag) in self.node_tags.iter().enumerate() {
            let Some(tag) = tag else { continue };
            let f = match tag {
                BoundaryTag::Lid => data.lid,
                BoundaryTag::Wall => data.wall,
            }
            .ok_or(FemError::MissingBoundaryValue(*tag))?;
            let val = f(self.node_points[node]);
            out[self.velocity_dof(0, node)] = val[0];
            out[self.velocity_dof(1, node)] = val[1];
        }
        Ok(out)
    }

    /// Nodal interpolant of a velocity field.
    pub fn interpolate_velocity(&self, f: impl Fn(Point2) -> [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_velocity_dofs()];
        for (node, p) in self.node_points.iter().enumerate() {
            let v = f(*p);
            out[self.velocity_dof(0, node)] = v[0];
            out[self.velocity_dof(1, node)] = v[1];
        }
        out
    }

    pub fn interpolate_scalar(&self, f: impl Fn(Point2) -> f64) -> Vec<f64> {
        self.node_points.iter().map(|p| f(*p)).collect()
    }
}
