//! Taylor-Hood P2/P1 finite elements on triangles.

mod assembly;
mod element;
mod layout;
mod quadrature;

use std::sync::Arc;

pub use assembly::{
    assemble_convection, assemble_divergence, assemble_linearized_convection, assemble_load, assemble_mass,
    assemble_newton_coupling, assemble_scalar_stiffness, assemble_stiffness, assemble_vorticity_load,
    convection_action, element_mass, element_stiffness, gradient_error_sq, VelocityPattern,
};
pub use element::{p2_values, Element, EDGES, P2_NODES};
pub use layout::{lid_profile, BoundaryData, DiscreteField, FieldKind, SpaceLayout};
pub use quadrature::TriangleRule;

use crate::mesh::{BoundaryTag, Mesh, Point2};
use crate::sparse::{SaddleLayout, SolveError, SparseMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("coefficient vector has length {found}, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("expected a {expected:?} field, got {found:?}")]
    KindMismatch { expected: FieldKind, found: FieldKind },
    #[error("no boundary value given for {0} dofs")]
    MissingBoundaryValue(BoundaryTag),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// A discretization on one mesh: dof layout, the constant matrices and the
/// saddle-point index bookkeeping shared by every solve.
#[derive(Debug)]
pub struct FemSpace {
    layout: Arc<SpaceLayout>,
    pattern: VelocityPattern,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    saddle: Arc<SaddleLayout>,
}

impl FemSpace {
    pub fn new(mesh: Arc<Mesh>) -> Result<Self, FemError> {
        let layout = Arc::new(SpaceLayout::new(mesh));
        let pattern = VelocityPattern::new(&layout);
        let mass = assemble_mass(&layout, &pattern);
        let stiffness = assemble_stiffness(&layout, &pattern);
        let divergence = Arc::new(assemble_divergence(&layout));
        let saddle = Arc::new(SaddleLayout::new(
            &mass,
            divergence,
            layout.dirichlet_mask(),
            layout.pinned_pressure(),
        )?);
        Ok(Self {
            layout,
            pattern,
            mass,
            stiffness,
            saddle,
        })
    }

    pub fn layout(&self) -> &Arc<SpaceLayout> {
        &self.layout
    }

    pub fn mesh(&self) -> &Mesh {
        self.layout.mesh()
    }

    pub fn pattern(&self) -> &VelocityPattern {
        &self.pattern
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    pub fn divergence(&self) -> &SparseMatrix {
        self.saddle.divergence()
    }

    pub fn saddle(&self) -> &Arc<SaddleLayout> {
        &self.saddle
    }

    pub fn n_velocity_dofs(&self) -> usize {
        self.layout.n_velocity_dofs()
    }

    fn velocity<'a>(&self, f: &'a DiscreteField) -> Result<&'a [f64], FemError> {
        let c = f.expect(FieldKind::VelocityP2)?;
        if c.len() != self.n_velocity_dofs() {
            return Err(FemError::Length {
                expected: self.n_velocity_dofs(),
                found: c.len(),
            });
        }
        Ok(c)
    }

    /// `C(a)` with entries `∫ (a·∇φj)·φi`.
    pub fn convection(&self, a: &DiscreteField) -> Result<SparseMatrix, FemError> {
        Ok(assemble_convection(&self.layout, &self.pattern, self.velocity(a)?))
    }

    /// `D(y)` with entries `∫ (φj·∇y)·φi`.
    pub fn newton_coupling(&self, y: &DiscreteField) -> Result<SparseMatrix, FemError> {
        Ok(assemble_newton_coupling(&self.layout, &self.pattern, self.velocity(y)?))
    }

    /// `L(y) = C(y) + D(y)`.
    pub fn linearized_convection(&self, y: &DiscreteField) -> Result<SparseMatrix, FemError> {
        Ok(assemble_linearized_convection(&self.layout, &self.pattern, self.velocity(y)?))
    }

    /// `L(y)` on raw coefficients; the caller guarantees a velocity vector.
    pub(crate) fn linearized_convection_raw(&self, y: &[f64]) -> SparseMatrix {
        assemble_linearized_convection(&self.layout, &self.pattern, y)
    }

    /// `C(a)u` as a vector.
    pub fn convection_action(&self, a: &[f64], u: &[f64]) -> Vec<f64> {
        convection_action(&self.layout, a, u)
    }

    pub fn load(&self, f: impl Fn(Point2) -> [f64; 2]) -> Vec<f64> {
        assemble_load(&self.layout, f)
    }

    /// `∫ ∇u : ∇w`
    pub fn h1_inner(&self, u: &[f64], w: &[f64]) -> f64 {
        self.stiffness.bilinear(u, w)
    }
}
