//! Independent dense oracles shared by the integration tests.
#![allow(dead_code)]

use nsls_core::mesh::Point2;

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        assert!(a[k][k].abs() > 1e-300, "singular dense system");
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

/// Polynomial in barycentric coordinates: `Σ c λ0^a λ1^b λ2^c`.
#[derive(Clone, Debug, Default)]
pub struct Bary(pub Vec<([u32; 3], f64)>);

impl Bary {
    fn lambda(i: usize, c: f64) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        Bary(vec![(e, c)])
    }

    pub fn mul(&self, o: &Bary) -> Bary {
        let mut out = Vec::new();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &o.0 {
                out.push(([e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]], c1 * c2));
            }
        }
        Bary(out)
    }

    pub fn add(&self, o: &Bary) -> Bary {
        Bary(self.0.iter().chain(&o.0).cloned().collect())
    }

    pub fn derivative(&self, k: usize) -> Bary {
        Bary(
            self.0
                .iter()
                .filter(|(e, _)| e[k] > 0)
                .map(|(e, c)| {
                    let mut d = *e;
                    d[k] -= 1;
                    (d, c * e[k] as f64)
                })
                .collect(),
        )
    }

    /// Exact integral over a triangle of the given area:
    /// `∫ λ0^a λ1^b λ2^c = 2|T| a! b! c! / (a+b+c+2)!`.
    pub fn integrate(&self, area: f64) -> f64 {
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        self.0
            .iter()
            .map(|(e, c)| c * 2.0 * area * fact(e[0]) * fact(e[1]) * fact(e[2]) / fact(e[0] + e[1] + e[2] + 2))
            .sum()
    }
}

/// P2 shape functions: vertices 0..3, then edges (0,1), (1,2), (2,0).
pub fn p2_basis() -> Vec<Bary> {
    let mut out = Vec::new();
    for i in 0..3 {
        out.push(Bary::lambda(i, 2.0).mul(&Bary::lambda(i, 1.0)).add(&Bary::lambda(i, -1.0)));
    }
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        out.push(Bary::lambda(i, 4.0).mul(&Bary::lambda(j, 1.0)));
    }
    out
}

/// Analytic P2 mass and stiffness matrices of a triangle.
pub fn analytic_p2_matrices(v: [Point2; 3]) -> ([[f64; 6]; 6], [[f64; 6]; 6]) {
    let det = (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y);
    let area = 0.5 * det.abs();
    // ∇λk = perpendicular of the opposite edge / det
    let grad: Vec<[f64; 2]> = (0..3)
        .map(|k| {
            let (a, b) = (v[(k + 1) % 3], v[(k + 2) % 3]);
            [(a.y - b.y) / det, (b.x - a.x) / det]
        })
        .collect();
    let basis = p2_basis();
    let mut m = [[0.0; 6]; 6];
    let mut s = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            m[i][j] = basis[i].mul(&basis[j]).integrate(area);
            let mut acc = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    let g = grad[k][0] * grad[l][0] + grad[k][1] * grad[l][1];
                    acc += g * basis[i].derivative(k).mul(&basis[j].derivative(l)).integrate(area);
                }
            }
            s[i][j] = acc;
        }
    }
    (m, s)
}

/// Minimizer of `f` over `m·i/n`, `i = 1..=n`.
pub fn grid_scan(f: impl Fn(f64) -> f64, m: f64, n: usize) -> (f64, f64) {
    let mut best = (0.0, f64::INFINITY);
    for i in 1..=n {
        let x = m * i as f64 / n as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}
