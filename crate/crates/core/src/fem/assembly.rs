//! Global assembly of the bilinear and trilinear forms.
//!
//! Every velocity-block matrix is assembled into one shared CSR pattern that
//! couples all velocity dofs of each triangle (both components), so any
//! linear combination of them is a value-wise sum and the saddle-point
//! factorization can reuse one symbolic analysis.

use super::element::{p2_values, Element};
use super::layout::SpaceLayout;
use super::quadrature::TriangleRule;
use crate::mesh::Point2;
use crate::sparse::SparseMatrix;

type Local = [[f64; 12]; 12];

/// Sparsity pattern of the velocity block and per-triangle scatter slots.
#[derive(Debug)]
pub struct VelocityPattern {
    template: SparseMatrix,
    slots: Vec<[[usize; 12]; 12]>,
}

impl VelocityPattern {
    pub fn new(layout: &SpaceLayout) -> Self {
        let n = layout.n_velocity_dofs();
        let nt = layout.mesh().n_triangles();
        let mut trip = Vec::with_capacity(nt * 144);
        for t in 0..nt {
            let dofs = layout.velocity_dofs(t);
            for &r in &dofs {
                for &c in &dofs {
                    trip.push((r, c, 0.0));
                }
            }
        }
        let template = SparseMatrix::from_triplets(n, n, &trip);
        let slots = (0..nt)
            .map(|t| {
                let dofs = layout.velocity_dofs(t);
                let mut s = [[0; 12]; 12];
                for (i, &r) in dofs.iter().enumerate() {
                    let lo = template.row_ptr()[r];
                    let row = &template.col_idx()[lo..template.row_ptr()[r + 1]];
                    for (j, &c) in dofs.iter().enumerate() {
                        s[i][j] = lo + row.binary_search(&c).unwrap();
                    }
                }
                s
            })
            .collect();
        Self { template, slots }
    }

    pub fn zeros(&self) -> SparseMatrix {
        self.template.clone()
    }

    /// Sums local 12x12 matrices into the pattern, triangle by triangle.
    pub fn assemble(&self, layout: &SpaceLayout, mut local: impl FnMut(usize, &Element, &mut Local)) -> SparseMatrix {
        let mut m = self.zeros();
        let vals = m.values_mut();
        let mut buf = [[0.0; 12]; 12];
        for (t, slots) in self.slots.iter().enumerate() {
            buf.iter_mut().for_each(|r| r.fill(0.0));
            local(t, &layout.element(t), &mut buf);
            for i in 0..12 {
                for j in 0..12 {
                    vals[slots[i][j]] += buf[i][j];
                }
            }
        }
        m
    }
}

/// Scalar P2 mass matrix of one element, by degree-4 quadrature.
pub fn element_mass(e: &Element) -> [[f64; 6]; 6] {
    let rule = TriangleRule::degree4();
    let mut m = [[0.0; 6]; 6];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let phi = p2_values(l);
        for i in 0..6 {
            for j in i..6 {
                m[i][j] += w * e.area * phi[i] * phi[j];
            }
        }
    }
    mirror(m)
}

/// Scalar P2 stiffness matrix `∫∇φi·∇φj` of one element.
pub fn element_stiffness(e: &Element) -> [[f64; 6]; 6] {
    let rule = TriangleRule::degree4();
    let mut k = [[0.0; 6]; 6];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let g = e.p2_gradients(l);
        for i in 0..6 {
            for j in i..6 {
                k[i][j] += w * e.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
    }
    mirror(k)
}

/// Copies the upper triangle onto the lower one, so symmetry is exact.
fn mirror(mut m: [[f64; 6]; 6]) -> [[f64; 6]; 6] {
    for i in 0..6 {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    m
}

fn block_diagonal(local: &mut Local, scalar: &[[f64; 6]; 6]) {
    for c in 0..2 {
        for i in 0..6 {
            for j in 0..6 {
                local[6 * c + i][6 * c + j] += scalar[i][j];
            }
        }
    }
}

/// `M_ij = ∫ φj · φi` on velocity dofs.
pub fn assemble_mass(layout: &SpaceLayout, pattern: &VelocityPattern) -> SparseMatrix {
    pattern.assemble(layout, |_, e, local| block_diagonal(local, &element_mass(e)))
}

/// `K_ij = ∫ ∇φj : ∇φi` on velocity dofs.
pub fn assemble_stiffness(layout: &SpaceLayout, pattern: &VelocityPattern) -> SparseMatrix {
    pattern.assemble(layout, |_, e, local| block_diagonal(local, &element_stiffness(e)))
}

/// Velocity coefficients of triangle `t` as `[component][local node]`.
fn gather(layout: &SpaceLayout, t: usize, u: &[f64]) -> [[f64; 6]; 2] {
    let dofs = layout.velocity_dofs(t);
    let mut out = [[0.0; 6]; 2];
    for c in 0..2 {
        for k in 0..6 {
            out[c][k] = u[dofs[6 * c + k]];
        }
    }
    out
}

fn eval(coef: &[[f64; 6]; 2], phi: &[f64; 6]) -> [f64; 2] {
    let mut v = [0.0; 2];
    for c in 0..2 {
        v[c] = (0..6).map(|k| coef[c][k] * phi[k]).sum();
    }
    v
}

/// `grad[c][d] = ∂_d u_c`
fn eval_grad(coef: &[[f64; 6]; 2], g: &[[f64; 2]; 6]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for c in 0..2 {
        for d in 0..2 {
            out[c][d] = (0..6).map(|k| coef[c][k] * g[k][d]).sum();
        }
    }
    out
}

fn add_convection(local: &mut Local, e: &Element, a: &[[f64; 6]; 2], rule: &TriangleRule) {
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let phi = p2_values(l);
        let g = e.p2_gradients(l);
        let av = eval(a, &phi);
        let wq = w * e.area;
        for i in 0..6 {
            for j in 0..6 {
                let v = wq * phi[i] * (av[0] * g[j][0] + av[1] * g[j][1]);
                local[i][j] += v;
                local[6 + i][6 + j] += v;
            }
        }
    }
}

fn add_newton_coupling(local: &mut Local, e: &Element, y: &[[f64; 6]; 2], rule: &TriangleRule) {
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let phi = p2_values(l);
        let grad_y = eval_grad(y, &e.p2_gradients(l));
        let wq = w * e.area;
        for c in 0..2 {
            for d in 0..2 {
                let s = wq * grad_y[c][d];
                for i in 0..6 {
                    for j in 0..6 {
                        local[6 * c + i][6 * d + j] += s * phi[i] * phi[j];
                    }
                }
            }
        }
    }
}

/// `C(a)_ij = ∫ (a·∇φj) · φi`, degree-5 quadrature.
pub fn assemble_convection(layout: &SpaceLayout, pattern: &VelocityPattern, a: &[f64]) -> SparseMatrix {
    let rule = TriangleRule::degree5();
    pattern.assemble(layout, |t, e, local| add_convection(local, e, &gather(layout, t, a), &rule))
}

/// `D(y)_ij = ∫ (φj·∇y) · φi`, the second half of the linearized convection.
pub fn assemble_newton_coupling(layout: &SpaceLayout, pattern: &VelocityPattern, y: &[f64]) -> SparseMatrix {
    let rule = TriangleRule::degree5();
    pattern.assemble(layout, |t, e, local| add_newton_coupling(local, e, &gather(layout, t, y), &rule))
}

/// `L(y) = C(y) + D(y)`: derivative of `u ↦ C(u)u` at `y`.
pub fn assemble_linearized_convection(layout: &SpaceLayout, pattern: &VelocityPattern, y: &[f64]) -> SparseMatrix {
    let rule = TriangleRule::degree5();
    pattern.assemble(layout, |t, e, local| {
        let c = gather(layout, t, y);
        add_convection(local, e, &c, &rule);
        add_newton_coupling(local, e, &c, &rule);
    })
}

/// `B_kj = ∫ λk ∇·φj`, pressure rows by velocity columns.
pub fn assemble_divergence(layout: &SpaceLayout) -> SparseMatrix {
    let rule = TriangleRule::degree4();
    let mesh = layout.mesh();
    let mut trip = Vec::with_capacity(mesh.n_triangles() * 36);
    for t in 0..mesh.n_triangles() {
        let e = layout.element(t);
        let dofs = layout.velocity_dofs(t);
        let tri = mesh.triangles()[t];
        let mut local = [[0.0; 12]; 3];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let g = e.p2_gradients(l);
            for k in 0..3 {
                for c in 0..2 {
                    for j in 0..6 {
                        local[k][6 * c + j] += w * e.area * l[k] * g[j][c];
                    }
                }
            }
        }
        for k in 0..3 {
            for (j, &dof) in dofs.iter().enumerate() {
                trip.push((tri[k], dof, local[k][j]));
            }
        }
    }
    SparseMatrix::from_triplets(layout.n_pressure_dofs(), layout.n_velocity_dofs(), &trip)
}

/// `(C(a) u)_i = ∫ (a·∇u) · φi` without forming the matrix.
pub fn convection_action(layout: &SpaceLayout, a: &[f64], u: &[f64]) -> Vec<f64> {
    let rule = TriangleRule::degree5();
    let mut out = vec![0.0; layout.n_velocity_dofs()];
    for t in 0..layout.mesh().n_triangles() {
        let e = layout.element(t);
        let (ac, uc) = (gather(layout, t, a), gather(layout, t, u));
        let dofs = layout.velocity_dofs(t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let phi = p2_values(l);
            let av = eval(&ac, &phi);
            let gu = eval_grad(&uc, &e.p2_gradients(l));
            let wq = w * e.area;
            for c in 0..2 {
                let conv = av[0] * gu[c][0] + av[1] * gu[c][1];
                for i in 0..6 {
                    out[dofs[6 * c + i]] += wq * conv * phi[i];
                }
            }
        }
    }
    out
}

/// `F_i = ∫ f · φi`, degree-5 quadrature.
pub fn assemble_load(layout: &SpaceLayout, f: impl Fn(Point2) -> [f64; 2]) -> Vec<f64> {
    let rule = TriangleRule::degree5();
    let mut out = vec![0.0; layout.n_velocity_dofs()];
    for t in 0..layout.mesh().n_triangles() {
        let e = layout.element(t);
        let dofs = layout.velocity_dofs(t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let phi = p2_values(l);
            let fv = f(e.point(l));
            for c in 0..2 {
                for i in 0..6 {
                    out[dofs[6 * c + i]] += w * e.area * fv[c] * phi[i];
                }
            }
        }
    }
    out
}

/// Scalar P2 stiffness on the node numbering of the layout.
pub fn assemble_scalar_stiffness(layout: &SpaceLayout) -> SparseMatrix {
    let nt = layout.mesh().n_triangles();
    let mut trip = Vec::with_capacity(nt * 36);
    for t in 0..nt {
        let k = element_stiffness(&layout.element(t));
        let nodes = layout.p2_nodes(t);
        for i in 0..6 {
            for j in 0..6 {
                trip.push((nodes[i], nodes[j], k[i][j]));
            }
        }
    }
    SparseMatrix::from_triplets(layout.n_nodes(), layout.n_nodes(), &trip)
}

/// `∫ (u₂ ∂₁φi − u₁ ∂₂φi)`, the weak form of `∫ (∂₂u₁ − ∂₁u₂) φi` for
/// test functions vanishing on the boundary.
pub fn assemble_vorticity_load(layout: &SpaceLayout, u: &[f64]) -> Vec<f64> {
    let rule = TriangleRule::degree4();
    let mut out = vec![0.0; layout.n_nodes()];
    for t in 0..layout.mesh().n_triangles() {
        let e = layout.element(t);
        let uc = gather(layout, t, u);
        let nodes = layout.p2_nodes(t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let uv = eval(&uc, &p2_values(l));
            let g = e.p2_gradients(l);
            for i in 0..6 {
                out[nodes[i]] += w * e.area * (uv[1] * g[i][0] - uv[0] * g[i][1]);
            }
        }
    }
    out
}

/// `∫ |∇u_h − G|²` with `G[c][d]` the exact `∂_d u_c`, by the degree-5 rule.
pub fn gradient_error_sq(layout: &SpaceLayout, u: &[f64], exact: impl Fn(Point2) -> [[f64; 2]; 2]) -> f64 {
    let rule = TriangleRule::degree5();
    let mut sum = 0.0;
    for t in 0..layout.mesh().n_triangles() {
        let e = layout.element(t);
        let uc = gather(layout, t, u);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let gh = eval_grad(&uc, &e.p2_gradients(l));
            let g = exact(e.point(l));
            let mut s = 0.0;
            for c in 0..2 {
                for d in 0..2 {
                    s += (gh[c][d] - g[c][d]).powi(2);
                }
            }
            sum += w * e.area * s;
        }
    }
    sum
}
