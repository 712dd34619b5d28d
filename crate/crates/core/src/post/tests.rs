use std::sync::Arc;

use super::*;
use crate::fem::{element_stiffness, p2_values, P2_NODES};
use crate::mesh::Mesh;

fn layout(mesh: Mesh) -> SpaceLayout {
    SpaceLayout::new(Arc::new(mesh))
}

fn velocity(l: &SpaceLayout, f: impl Fn(crate::mesh::Point2) -> [f64; 2]) -> DiscreteField {
    DiscreteField::new(l, FieldKind::VelocityP2, l.interpolate_velocity(f)).unwrap()
}

fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        x[k] = (b[k] - (k + 1..n).map(|j| a[k][j] * x[j]).sum::<f64>()) / a[k][k];
    }
    x
}

#[test]
fn zero_velocity_has_zero_stream_function() {
    let l = layout(Mesh::semidisk(0.2).unwrap());
    let psi = stream_function(&l, &DiscreteField::zeros(&l, FieldKind::VelocityP2)).unwrap();
    assert_eq!(psi.kind, FieldKind::ScalarP2);
    assert!(psi.coefficients.iter().all(|v| *v == 0.0));
}

#[test]
fn rejects_non_velocity_input() {
    let l = layout(Mesh::unit_square(1).unwrap());
    assert!(stream_function(&l, &DiscreteField::zeros(&l, FieldKind::ScalarP2)).is_err());
}

/// Rigid rotation: `−Δψ = −2`. The load of the constant `−2` against P2
/// hat functions is `0` for vertex nodes and `−2|T|/3` for edge nodes.
#[test]
fn rigid_rotation_matches_a_dense_poisson_solve() {
    let l = layout(Mesh::unit_square(2).unwrap());
    let psi = stream_function(&l, &velocity(&l, |p| [-p.y, p.x])).unwrap();
    let n = l.n_nodes();
    let mut k = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for t in 0..l.mesh().n_triangles() {
        let e = l.element(t);
        let ke = element_stiffness(&e);
        let nodes = l.p2_nodes(t);
        for i in 0..6 {
            for j in 0..6 {
                k[nodes[i]][nodes[j]] += ke[i][j];
            }
            if i >= 3 {
                rhs[nodes[i]] += -2.0 * e.area / 3.0;
            }
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| l.node_tags()[i].is_none()).collect();
    let a: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| k[i][j]).collect()).collect();
    let x = dense_solve(a, free.iter().map(|&i| rhs[i]).collect());
    for (r, &i) in free.iter().enumerate() {
        assert!((psi.coefficients[i] - x[r]).abs() <= 1e-8, "{} vs {}", psi.coefficients[i], x[r]);
    }
    for i in (0..n).filter(|&i| l.node_tags()[i].is_some()) {
        assert_eq!(psi.coefficients[i], 0.0);
    }
    // the solution is positive inside for a negative source
    assert!(free.iter().all(|&i| psi.coefficients[i] < 0.0));
}

#[test]
fn recovers_a_smooth_stream_function() {
    use std::f64::consts::PI;
    let l = layout(Mesh::unit_square(8).unwrap());
    let exact = |p: crate::mesh::Point2| (PI * p.x).sin() * (PI * p.y).sin();
    let u = velocity(&l, |p| {
        [-PI * (PI * p.x).sin() * (PI * p.y).cos(), PI * (PI * p.x).cos() * (PI * p.y).sin()]
    });
    let psi = stream_function(&l, &u).unwrap();
    let err = l
        .node_points()
        .iter()
        .zip(&psi.coefficients)
        .fold(0.0f64, |m, (p, v)| m.max((exact(*p) - v).abs()));
    assert!(err <= 2e-3, "{err}");
}

struct Parsed {
    points: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    types: Vec<u32>,
    vectors: Vec<(String, Vec<[f64; 2]>)>,
    scalars: Vec<(String, Vec<f64>)>,
}

fn parse(text: &str) -> Parsed {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# vtk DataFile Version 3.0"));
    let mut p = Parsed {
        points: vec![],
        cells: vec![],
        types: vec![],
        vectors: vec![],
        scalars: vec![],
    };
    let num = |s: &str| s.parse::<f64>().unwrap();
    while let Some(line) = lines.next() {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.first().copied() {
            Some("POINTS") => {
                for _ in 0..tok[1].parse().unwrap() {
                    let v: Vec<f64> = lines.next().unwrap().split_whitespace().map(num).collect();
                    p.points.push([v[0], v[1]]);
                }
            }
            Some("CELLS") => {
                for _ in 0..tok[1].parse().unwrap() {
                    let v: Vec<usize> = lines.next().unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
                    assert_eq!(v[0], 3);
                    p.cells.push([v[1], v[2], v[3]]);
                }
            }
            Some("CELL_TYPES") => {
                for _ in 0..tok[1].parse().unwrap() {
                    p.types.push(lines.next().unwrap().trim().parse().unwrap());
                }
            }
            Some("VECTORS") => {
                let vals = (0..p.points.len())
                    .map(|_| {
                        let v: Vec<f64> = lines.next().unwrap().split_whitespace().map(num).collect();
                        [v[0], v[1]]
                    })
                    .collect();
                p.vectors.push((tok[1].to_string(), vals));
            }
            Some("SCALARS") => {
                assert_eq!(lines.next(), Some("LOOKUP_TABLE default"));
                let vals = (0..p.points.len()).map(|_| num(lines.next().unwrap().trim())).collect();
                p.scalars.push((tok[1].to_string(), vals));
            }
            _ => {}
        }
    }
    p
}

#[test]
fn geometry_only_file() {
    let l = layout(Mesh::semidisk(0.3).unwrap());
    let text = vtk_string(&l, &[]).unwrap();
    assert!(!text.contains("POINT_DATA"));
    let p = parse(&text);
    assert_eq!(p.points.len(), l.n_nodes());
    assert_eq!(p.cells.len(), 4 * l.mesh().n_triangles());
    assert!(p.types.iter().all(|t| *t == 5));
    // the refined cells tile the domain with positive orientation
    let area: f64 = p
        .cells
        .iter()
        .map(|c| {
            let [a, b, d] = c.map(|i| p.points[i]);
            let s = 0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]));
            assert!(s > 0.0);
            s
        })
        .sum();
    assert!((area - l.mesh().total_area()).abs() <= 1e-12);
}

#[test]
fn written_values_match_basis_evaluation() {
    let l = layout(Mesh::semidisk(0.25).unwrap());
    let u = velocity(&l, |p| [p.x * p.y + 0.3, (2.0 * p.x).cos() - p.y * p.y]);
    let pres = DiscreteField::new(&l, FieldKind::PressureP1, l.mesh().vertices().iter().map(|v| v.x - 2.0 * v.y).collect())
        .unwrap();
    let psi = stream_function(&l, &u).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snap.vtk");
    write_vtk(&l, &[("velocity", &u), ("pressure", &pres), ("psi", &psi)], &path).unwrap();
    let p = parse(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(p.points.len(), l.n_nodes());
    assert_eq!(p.vectors[0].0, "velocity");
    assert_eq!(p.scalars.iter().map(|s| s.0.as_str()).collect::<Vec<_>>(), ["pressure", "psi"]);
    let vel = &p.vectors[0].1;
    for t in 0..l.mesh().n_triangles() {
        let e = l.element(t);
        let dofs = l.velocity_dofs(t);
        let nodes = l.p2_nodes(t);
        let verts = l.mesh().triangles()[t];
        for (k, bary) in P2_NODES.iter().enumerate() {
            let phi = p2_values(bary);
            let at = e.point(bary);
            let node = nodes[k];
            assert!((p.points[node][0] - at.x).abs() <= 1e-14 && (p.points[node][1] - at.y).abs() <= 1e-14);
            for c in 0..2 {
                let direct: f64 = (0..6).map(|i| phi[i] * u.coefficients[dofs[6 * c + i]]).sum();
                assert!((vel[node][c] - direct).abs() <= 1e-14 * (1.0 + direct.abs()));
            }
            let pv: f64 = (0..3).map(|i| bary[i] * pres.coefficients[verts[i]]).sum();
            assert!((p.scalars[0].1[node] - pv).abs() <= 1e-14 * (1.0 + pv.abs()));
        }
    }
}

#[test]
fn unwritable_path_is_an_error() {
    let l = layout(Mesh::unit_square(1).unwrap());
    let err = write_vtk(&l, &[], Path::new("/nonexistent-dir/x.vtk")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x.vtk"));
}
