//! Triangulations of the computational domain with tagged boundary segments.
//!
//! A [`Mesh`] is immutable once built. Every constructor goes through
//! [`Mesh::new`], which checks orientation, index ranges and that the stored
//! boundary edges are exactly the edges owned by a single triangle.

mod generate;
mod triangle_format;

use std::collections::HashMap;
use std::fmt;

pub use triangle_format::{read_triangle_format, write_triangle_format, BoundaryTagMap};

/// Radius of the semi-disk cavity.
pub const SEMIDISK_RADIUS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(&self, other: &Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Boundary segment kind: the moving lid or a no-slip wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Lid,
    Wall,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryTag::Lid => f.write_str("lid"),
            BoundaryTag::Wall => f.write_str("wall"),
        }
    }
}

/// Boundary edge, stored with the orientation of its owning triangle
/// (domain interior on the left).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{entity} {index}: {message}")]
    Invariant {
        entity: &'static str,
        index: usize,
        message: String,
    },
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
}

fn invariant(entity: &'static str, index: usize, message: impl Into<String>) -> MeshError {
    MeshError::Invariant {
        entity,
        index,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area(p: &[Point2], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (p[t[0]], p[t[1]], p[t[2]]);
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Edges owned by exactly one triangle, in triangle order, oriented as in
/// their triangle.
fn extract_boundary(triangles: &[[usize; 3]]) -> Vec<[usize; 2]> {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            *count.entry(edge_key(t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    let mut edges = Vec::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if count[&edge_key(a, b)] == 1 {
                edges.push([a, b]);
            }
        }
    }
    edges
}

impl Mesh {
    /// Builds a mesh from explicit parts and validates every invariant.
    pub fn new(
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::InvalidParameter("mesh has no triangles".into()));
        }
        for (i, p) in vertices.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(invariant("vertex", i, "non-finite coordinate"));
            }
        }
        let nv = vertices.len();
        for (i, t) in triangles.iter().enumerate() {
            if let Some(&bad) = t.iter().find(|&&v| v >= nv) {
                return Err(invariant(
                    "triangle",
                    i,
                    format!("vertex index {bad} out of range (have {nv} vertices)"),
                ));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(invariant("triangle", i, "repeated vertex"));
            }
            let area = signed_area(&vertices, t);
            if !(area > 0.0) {
                return Err(invariant(
                    "triangle",
                    i,
                    format!("non-positive signed area {area:e}"),
                ));
            }
        }
        for (i, e) in boundary_edges.iter().enumerate() {
            if e.vertices.iter().any(|&v| v >= nv) {
                return Err(invariant("boundary edge", i, "vertex index out of range"));
            }
        }
        let expected: HashMap<(usize, usize), usize> = extract_boundary(&triangles)
            .into_iter()
            .enumerate()
            .map(|(i, e)| (edge_key(e[0], e[1]), i))
            .collect();
        let mut seen = vec![false; expected.len()];
        for (i, e) in boundary_edges.iter().enumerate() {
            match expected.get(&edge_key(e.vertices[0], e.vertices[1])) {
                Some(&j) if !seen[j] => seen[j] = true,
                Some(_) => return Err(invariant("boundary edge", i, "listed twice")),
                None => {
                    return Err(invariant(
                        "boundary edge",
                        i,
                        "not owned by exactly one triangle",
                    ))
                }
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(invariant("boundary edge", j, "boundary edge missing a tag"));
        }
        Ok(Self {
            vertices,
            triangles,
            boundary_edges,
        })
    }

    /// Builds a mesh and derives its boundary edges, tagging each one with
    /// `tagger(start, end)`.
    pub fn from_triangles(
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        tagger: impl Fn(Point2, Point2) -> BoundaryTag,
    ) -> Result<Self, MeshError> {
        if let Some((i, _)) = triangles
            .iter()
            .enumerate()
            .find(|(_, t)| t.iter().any(|&v| v >= vertices.len()))
        {
            return Err(invariant("triangle", i, "vertex index out of range"));
        }
        let boundary_edges = extract_boundary(&triangles)
            .into_iter()
            .map(|e| BoundaryEdge {
                vertices: e,
                tag: tagger(vertices[e[0]], vertices[e[1]]),
            })
            .collect();
        Self::new(vertices, triangles, boundary_edges)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| self.vertices[a].distance(&self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Tag of every boundary vertex. A vertex touching a lid edge is a lid
    /// vertex, so the two lid corners count as lid.
    pub fn boundary_vertex_tags(&self) -> Vec<Option<BoundaryTag>> {
        let mut tags = vec![None; self.vertices.len()];
        for e in &self.boundary_edges {
            for &v in &e.vertices {
                tags[v] = match (tags[v], e.tag) {
                    (Some(BoundaryTag::Lid), _) | (_, BoundaryTag::Lid) => Some(BoundaryTag::Lid),
                    _ => Some(BoundaryTag::Wall),
                };
            }
        }
        tags
    }

    /// Structured crossed mesh of the unit square: `n x n` cells, each split
    /// into four triangles around its centre. All boundary edges are walls.
    pub fn unit_square(n: usize) -> Result<Self, MeshError> {
        generate::unit_square(n)
    }

    /// Ring-structured triangulation of the lower half-disk of radius 1/2.
    /// The straight top segment is the lid, the arc is a wall.
    pub fn semidisk(h_target: f64) -> Result<Self, MeshError> {
        generate::semidisk(h_target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri_mesh() -> Mesh {
        Mesh::from_triangles(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
            |_, _| BoundaryTag::Wall,
        )
        .unwrap()
    }

    #[test]
    fn single_simplex_has_three_boundary_edges() {
        let m = tri_mesh();
        assert_eq!(m.boundary_edges().len(), 3);
        assert!((m.total_area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clockwise_triangle_is_rejected() {
        let err = Mesh::from_triangles(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            vec![[0, 2, 1]],
            |_, _| BoundaryTag::Wall,
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::Invariant { entity: "triangle", index: 0, .. }));
    }

    #[test]
    fn missing_boundary_edge_is_reported() {
        let m = tri_mesh();
        let mut edges = m.boundary_edges().to_vec();
        edges.pop();
        let err = Mesh::new(m.vertices().to_vec(), m.triangles().to_vec(), edges).unwrap_err();
        assert!(matches!(err, MeshError::Invariant { entity: "boundary edge", .. }));
    }

    #[test]
    fn interior_edge_cannot_be_tagged() {
        let m = Mesh::unit_square(1).unwrap();
        let mut edges = m.boundary_edges().to_vec();
        // edge from corner 0 to the centre vertex 4 is interior
        edges.push(BoundaryEdge {
            vertices: [0, 4],
            tag: BoundaryTag::Wall,
        });
        assert!(Mesh::new(m.vertices().to_vec(), m.triangles().to_vec(), edges).is_err());
    }
}
