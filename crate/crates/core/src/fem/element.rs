use crate::mesh::Point2;

/// Affine triangle with constant barycentric gradients.
#[derive(Clone, Copy, Debug)]
pub struct Element {
    pub vertices: [Point2; 3],
    pub area: f64,
    /// `grad_bary[k]` = ∇λ_k.
    pub grad_bary: [[f64; 2]; 3],
}

impl Element {
    pub fn new(vertices: [Point2; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
        let grad_bary = [
            [(p1.y - p2.y) / det, (p2.x - p1.x) / det],
            [(p2.y - p0.y) / det, (p0.x - p2.x) / det],
            [(p0.y - p1.y) / det, (p1.x - p0.x) / det],
        ];
        Self {
            vertices,
            area: 0.5 * det,
            grad_bary,
        }
    }

    pub fn point(&self, bary: &[f64; 3]) -> Point2 {
        let [p0, p1, p2] = self.vertices;
        Point2::new(
            bary[0] * p0.x + bary[1] * p1.x + bary[2] * p2.x,
            bary[0] * p0.y + bary[1] * p1.y + bary[2] * p2.y,
        )
    }

    /// Gradients of the six P2 shape functions at a barycentric point.
    pub fn p2_gradients(&self, l: &[f64; 3]) -> [[f64; 2]; 6] {
        let g = &self.grad_bary;
        let mut out = [[0.0; 2]; 6];
        for d in 0..2 {
            for k in 0..3 {
                out[k][d] = (4.0 * l[k] - 1.0) * g[k][d];
            }
            for (slot, (i, j)) in EDGES.iter().enumerate() {
                out[3 + slot][d] = 4.0 * (l[*i] * g[*j][d] + l[*j] * g[*i][d]);
            }
        }
        out
    }
}

/// Local edges in P2 node order: node 3 sits on (0,1), node 4 on (1,2),
/// node 5 on (2,0).
pub const EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// The six P2 shape functions at a barycentric point.
pub fn p2_values(l: &[f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Barycentric coordinates of the six P2 nodes.
pub const P2_NODES: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];
