use std::f64::consts::PI;

use super::{BoundaryTag, Mesh, MeshError, Point2, SEMIDISK_RADIUS};

pub(super) fn unit_square(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter(
            "unit square needs at least one cell per side".into(),
        ));
    }
    let h = 1.0 / n as f64;
    let corner = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1) + n * n);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 * h, j as f64 * h));
        }
    }
    let first_centre = vertices.len();
    for j in 0..n {
        for i in 0..n {
            vertices.push(Point2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
        }
    }
    let mut triangles = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            let c = first_centre + j * n + i;
            let (bl, br) = (corner(i, j), corner(i + 1, j));
            let (tl, tr) = (corner(i, j + 1), corner(i + 1, j + 1));
            triangles.extend_from_slice(&[[c, bl, br], [c, br, tr], [c, tr, tl], [c, tl, bl]]);
        }
    }
    Mesh::from_triangles(vertices, triangles, |_, _| BoundaryTag::Wall)
}

const MIN_ARC_SEGMENTS: usize = 16;

/// Rings of vertices at radii `i R / n_r`, each ring a polyline from angle
/// pi to 2 pi, neighbouring rings stitched by an angle-ordered zipper.
///
/// The nominal spacing is `h_target / sqrt(3)`, which makes `h_target` the
/// typical longest edge and reproduces the vertex/triangle counts of a
/// standard Delaunay mesher at the same size parameter.
pub(super) fn semidisk(h_target: f64) -> Result<Mesh, MeshError> {
    if !(h_target.is_finite() && h_target > 0.0 && h_target < SEMIDISK_RADIUS) {
        return Err(MeshError::InvalidParameter(format!(
            "semi-disk h_target must lie in (0, 0.5), got {h_target}"
        )));
    }
    let spacing = h_target / 3f64.sqrt();
    let n_rings = ((SEMIDISK_RADIUS / spacing).round() as usize).max(2);
    let mut vertices = vec![Point2::new(0.0, 0.0)];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    let mut ring_angles: Vec<Vec<f64>> = vec![vec![]];
    for i in 1..=n_rings {
        let r = if i == n_rings {
            SEMIDISK_RADIUS
        } else {
            SEMIDISK_RADIUS * i as f64 / n_rings as f64
        };
        let mut segments = ((PI * r / spacing).round() as usize).max(2);
        if i == n_rings {
            // keeps the polygonal area within 1% of the half-disk on coarse meshes
            segments = segments.max(MIN_ARC_SEGMENTS);
        }
        let mut ids = Vec::with_capacity(segments + 1);
        let mut angles = Vec::with_capacity(segments + 1);
        for j in 0..=segments {
            let theta = PI + PI * j as f64 / segments as f64;
            let p = if j == 0 {
                Point2::new(-r, 0.0)
            } else if j == segments {
                Point2::new(r, 0.0)
            } else {
                Point2::new(r * theta.cos(), r * theta.sin())
            };
            ids.push(vertices.len());
            vertices.push(p);
            angles.push(j as f64 / segments as f64);
        }
        rings.push(ids);
        ring_angles.push(angles);
    }

    let mut triangles = Vec::new();
    let mut push = |t: [usize; 3], vertices: &[Point2]| {
        let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        let area = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        triangles.push(if area > 0.0 { t } else { [t[0], t[2], t[1]] });
    };
    for w in rings[1].windows(2) {
        push([0, w[0], w[1]], &vertices);
    }
    for i in 1..n_rings {
        let (inner, outer) = (&rings[i], &rings[i + 1]);
        let (ia, oa) = (&ring_angles[i], &ring_angles[i + 1]);
        let (mut a, mut b) = (0, 0);
        while a + 1 < inner.len() || b + 1 < outer.len() {
            let advance_outer = if a + 1 == inner.len() {
                true
            } else if b + 1 == outer.len() {
                false
            } else {
                oa[b + 1] <= ia[a + 1]
            };
            if advance_outer {
                push([inner[a], outer[b], outer[b + 1]], &vertices);
                b += 1;
            } else {
                push([inner[a], outer[b], inner[a + 1]], &vertices);
                a += 1;
            }
        }
    }
    Mesh::from_triangles(vertices, triangles, |p, q| {
        if p.y == 0.0 && q.y == 0.0 {
            BoundaryTag::Lid
        } else {
            BoundaryTag::Wall
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn brute_force_boundary(mesh: &Mesh) -> Vec<(usize, usize)> {
        let mut count = HashMap::new();
        for t in mesh.triangles() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut e: Vec<_> = count.into_iter().filter(|&(_, c)| c == 1).map(|(k, _)| k).collect();
        e.sort();
        e
    }

    fn stored_boundary(mesh: &Mesh) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = mesh
            .boundary_edges()
            .iter()
            .map(|e| (e.vertices[0].min(e.vertices[1]), e.vertices[0].max(e.vertices[1])))
            .collect();
        e.sort();
        e
    }

    #[test]
    fn smallest_unit_square() {
        let m = unit_square(1).unwrap();
        assert_eq!(m.n_vertices(), 5);
        assert_eq!(m.n_triangles(), 4);
        assert_eq!(m.boundary_edges().len(), 4);
    }

    #[test]
    fn unit_square_counts_and_area() {
        let m = unit_square(2).unwrap();
        assert_eq!(m.n_triangles(), 16);
        assert_eq!(brute_force_boundary(&m).len(), 8);
        assert_eq!(stored_boundary(&m), brute_force_boundary(&m));
        for n in [1, 3, 7] {
            let m = unit_square(n).unwrap();
            assert!((m.total_area() - 1.0).abs() < 1e-12);
            assert!(m.boundary_edges().iter().all(|e| e.tag == BoundaryTag::Wall));
        }
        assert!(unit_square(0).is_err());
    }

    #[test]
    fn semidisk_matches_reference_mesh_counts() {
        let m = semidisk(1.62e-2).unwrap();
        let (nt, nv) = (m.n_triangles() as f64, m.n_vertices() as f64);
        assert!((nt / 9064.0 - 1.0).abs() <= 0.2, "triangles {nt}");
        assert!((nv / 4663.0 - 1.0).abs() <= 0.2, "vertices {nv}");
    }

    #[test]
    fn semidisk_geometry() {
        for h in [0.45, 0.3, 0.1, 0.05, 0.03] {
            let m = semidisk(h).unwrap();
            let exact = PI * 0.25 / 2.0;
            assert!((m.total_area() / exact - 1.0).abs() < 0.01, "area h={h}");
            assert!(m.max_edge_length() <= 1.5 * h, "h={h}: {}", m.max_edge_length());
            assert_eq!(stored_boundary(&m), brute_force_boundary(&m));
            for t in 0..m.n_triangles() {
                assert!(m.triangle_area(t) > 0.0);
            }
            let v = m.vertices();
            for e in m.boundary_edges() {
                match e.tag {
                    BoundaryTag::Lid => {
                        assert!(e.vertices.iter().all(|&i| v[i].y == 0.0));
                    }
                    BoundaryTag::Wall => {
                        for &i in &e.vertices {
                            assert!((v[i].norm() - 0.5).abs() <= 1e-12);
                        }
                    }
                }
            }
            assert!(m.boundary_edges().iter().any(|e| e.tag == BoundaryTag::Lid));
        }
    }

    #[test]
    fn semidisk_corners_are_lid_vertices() {
        let m = semidisk(0.1).unwrap();
        let tags = m.boundary_vertex_tags();
        for (i, p) in m.vertices().iter().enumerate() {
            if (p.x.abs() - 0.5).abs() < 1e-15 && p.y == 0.0 {
                assert_eq!(tags[i], Some(BoundaryTag::Lid));
            }
        }
    }

    #[test]
    fn semidisk_rejects_bad_sizes() {
        for h in [0.0, -1.0, 0.5, f64::NAN] {
            assert!(semidisk(h).is_err());
        }
    }
}
