use std::sync::Arc;

use super::{LuPattern, SolveError, SparseLu, SparseMatrix};

/// Index bookkeeping for the block system
///
/// ```text
/// | A   Bᵀ | | u |   | f |
/// | B   0  | | p | = | 0 |
/// ```
///
/// after symmetric elimination of the constrained (Dirichlet) velocity
/// unknowns and removal of one pinned pressure unknown. Unknown order in the
/// reduced system is: free velocity dofs ascending, then kept pressure dofs
/// ascending.
#[derive(Debug)]
pub struct SaddleLayout {
    n_velocity: usize,
    n_pressure: usize,
    constrained: Vec<bool>,
    pinned_pressure: usize,
    velocity_to_reduced: Vec<Option<usize>>,
    pressure_to_reduced: Vec<Option<usize>>,
    a_row_ptr: Vec<usize>,
    a_col_idx: Vec<usize>,
    divergence: Arc<SparseMatrix>,
    pattern: SparseMatrix,
    a_slots: Vec<Option<usize>>,
    b_slots: Vec<Option<(usize, usize)>>,
    lu_pattern: LuPattern,
}

impl SaddleLayout {
    /// `velocity_pattern` fixes the sparsity of every velocity block later
    /// passed to [`SaddleLayout::factorize`].
    pub fn new(
        velocity_pattern: &SparseMatrix,
        divergence: Arc<SparseMatrix>,
        constrained: Vec<bool>,
        pinned_pressure: usize,
    ) -> Result<Self, SolveError> {
        let n_velocity = velocity_pattern.nrows();
        let n_pressure = divergence.nrows();
        if velocity_pattern.ncols() != n_velocity || divergence.ncols() != n_velocity {
            return Err(SolveError::Shape {
                expected: n_velocity,
                found: divergence.ncols(),
            });
        }
        if constrained.len() != n_velocity {
            return Err(SolveError::Shape {
                expected: n_velocity,
                found: constrained.len(),
            });
        }
        if pinned_pressure >= n_pressure {
            return Err(SolveError::Shape {
                expected: n_pressure,
                found: pinned_pressure,
            });
        }
        let mut next = 0;
        let velocity_to_reduced: Vec<Option<usize>> = constrained
            .iter()
            .map(|&c| {
                (!c).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        let pressure_to_reduced: Vec<Option<usize>> = (0..n_pressure)
            .map(|p| {
                (p != pinned_pressure).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        let n = next;

        let mut trip = Vec::with_capacity(velocity_pattern.nnz() + 2 * divergence.nnz());
        for (i, j, _) in velocity_pattern.triplets() {
            if let (Some(r), Some(c)) = (velocity_to_reduced[i], velocity_to_reduced[j]) {
                trip.push((r, c, 0.0));
            }
        }
        for (p, j, _) in divergence.triplets() {
            if let (Some(r), Some(c)) = (pressure_to_reduced[p], velocity_to_reduced[j]) {
                trip.push((r, c, 0.0));
                trip.push((c, r, 0.0));
            }
        }
        let pattern = SparseMatrix::from_triplets(n, n, &trip);
        let slot = |r: usize, c: usize| {
            let lo = pattern.row_ptr()[r];
            lo + pattern.col_idx()[lo..pattern.row_ptr()[r + 1]]
                .binary_search(&c)
                .expect("entry present in reduced pattern")
        };
        let a_slots = velocity_pattern
            .triplets()
            .into_iter()
            .map(|(i, j, _)| match (velocity_to_reduced[i], velocity_to_reduced[j]) {
                (Some(r), Some(c)) => Some(slot(r, c)),
                _ => None,
            })
            .collect();
        let b_slots = divergence
            .triplets()
            .into_iter()
            .map(|(p, j, _)| match (pressure_to_reduced[p], velocity_to_reduced[j]) {
                (Some(r), Some(c)) => Some((slot(r, c), slot(c, r))),
                _ => None,
            })
            .collect();
        let lu_pattern = LuPattern::analyze(&pattern)?;
        Ok(Self {
            n_velocity,
            n_pressure,
            constrained,
            pinned_pressure,
            velocity_to_reduced,
            pressure_to_reduced,
            a_row_ptr: velocity_pattern.row_ptr().to_vec(),
            a_col_idx: velocity_pattern.col_idx().to_vec(),
            divergence,
            pattern,
            a_slots,
            b_slots,
            lu_pattern,
        })
    }

    pub fn n_velocity(&self) -> usize {
        self.n_velocity
    }

    pub fn n_pressure(&self) -> usize {
        self.n_pressure
    }

    pub fn reduced_dim(&self) -> usize {
        self.pattern.nrows()
    }

    pub fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    pub fn pinned_pressure(&self) -> usize {
        self.pinned_pressure
    }

    pub fn divergence(&self) -> &SparseMatrix {
        &self.divergence
    }

    fn check_velocity_block(&self, a: &SparseMatrix) -> Result<(), SolveError> {
        if a.row_ptr() != self.a_row_ptr.as_slice() || a.col_idx() != self.a_col_idx.as_slice() {
            return Err(SolveError::Factorization(
                "velocity block does not match the layout's sparsity pattern".into(),
            ));
        }
        Ok(())
    }

    /// Reduced saddle matrix for velocity block `a`.
    pub fn reduce(&self, a: &SparseMatrix) -> Result<SparseMatrix, SolveError> {
        self.check_velocity_block(a)?;
        let mut m = self.pattern.clone();
        let vals = m.values_mut();
        for (slot, v) in self.a_slots.iter().zip(a.values()) {
            if let Some(s) = slot {
                vals[*s] += v;
            }
        }
        for (slot, v) in self.b_slots.iter().zip(self.divergence.values()) {
            if let Some((s, t)) = slot {
                vals[*s] += v;
                vals[*t] += v;
            }
        }
        Ok(m)
    }

    pub fn factorize(self: &Arc<Self>, a: SparseMatrix) -> Result<SaddleFactorization, SolveError> {
        let reduced = self.reduce(&a)?;
        let lu = SparseLu::factorize_with(&self.lu_pattern, reduced)?;
        Ok(SaddleFactorization {
            layout: Arc::clone(self),
            velocity_block: a,
            lu,
        })
    }
}

/// Eliminates the constrained velocity unknowns from the right-hand side:
/// returns the reduced right-hand side `[(f − A g)_free ; −(B g)_kept]`.
pub fn apply_dirichlet(
    layout: &SaddleLayout,
    velocity_block: &SparseMatrix,
    load: &[f64],
    dirichlet: &[f64],
) -> Result<Vec<f64>, SolveError> {
    for v in [load.len(), dirichlet.len()] {
        if v != layout.n_velocity {
            return Err(SolveError::Shape {
                expected: layout.n_velocity,
                found: v,
            });
        }
    }
    let lift: Vec<f64> = dirichlet
        .iter()
        .zip(&layout.constrained)
        .map(|(&g, &c)| if c { g } else { 0.0 })
        .collect();
    let mut r = load.to_vec();
    velocity_block.mul_vec_add(-1.0, &lift, &mut r);
    let bg = layout.divergence.mul_vec(&lift);
    let mut rhs = vec![0.0; layout.reduced_dim()];
    for (i, slot) in layout.velocity_to_reduced.iter().enumerate() {
        if let Some(k) = slot {
            rhs[*k] = r[i];
        }
    }
    for (p, slot) in layout.pressure_to_reduced.iter().enumerate() {
        if let Some(k) = slot {
            rhs[*k] = -bg[p];
        }
    }
    Ok(rhs)
}

/// Factorized reduced saddle system, reusable for any number of solves.
#[derive(Debug)]
pub struct SaddleFactorization {
    layout: Arc<SaddleLayout>,
    velocity_block: SparseMatrix,
    lu: SparseLu,
}

impl SaddleFactorization {
    pub fn layout(&self) -> &SaddleLayout {
        &self.layout
    }

    pub fn velocity_block(&self) -> &SparseMatrix {
        &self.velocity_block
    }

    pub fn reduced(&self) -> &SparseLu {
        &self.lu
    }

    /// Solves for `(velocity, pressure)` with momentum load `load` (tested
    /// against every velocity basis function) and prescribed values
    /// `dirichlet` at constrained dofs. Constrained velocity entries of the
    /// result equal `dirichlet` exactly; the pinned pressure is zero.
    pub fn solve(&self, load: &[f64], dirichlet: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
        let layout = &self.layout;
        let rhs = apply_dirichlet(layout, &self.velocity_block, load, dirichlet)?;
        let x = self.lu.solve(&rhs)?;
        let velocity = (0..layout.n_velocity)
            .map(|i| match layout.velocity_to_reduced[i] {
                Some(k) => x[k],
                None => dirichlet[i],
            })
            .collect();
        let pressure = (0..layout.n_pressure)
            .map(|p| layout.pressure_to_reduced[p].map_or(0.0, |k| x[k]))
            .collect();
        Ok((velocity, pressure))
    }

    /// Homogeneous-Dirichlet solve returning only the velocity.
    pub fn solve_homogeneous(&self, load: &[f64]) -> Result<Vec<f64>, SolveError> {
        let zero = vec![0.0; self.layout.n_velocity];
        Ok(self.solve(load, &zero)?.0)
    }
}
