use super::{divergence, gradient, ScalarField, VectorField};
use crate::error::Result;
use crate::poisson::{solve_dirichlet_disc, PoissonProblem};

/// `f = solenoidal + grad potential`, with `potential = 0` on the boundary
/// of the support disc.
#[derive(Debug, Clone)]
pub struct HelmholtzParts {
    pub solenoidal: VectorField,
    pub potential: ScalarField,
}

impl HelmholtzParts {
    pub fn potential_gradient(&self) -> VectorField {
        gradient(&self.potential)
    }
}

/// Splits a field supported in D1 into its divergence-free part and the
/// gradient of a potential vanishing on the boundary of D1.
pub fn helmholtz_decompose(f: &VectorField) -> Result<HelmholtzParts> {
    let grid = *f.grid();
    let div = divergence(f);
    let potential = solve_dirichlet_disc(&PoissonProblem::dirichlet_disc(div, grid.r1))?.field;
    let solenoidal = f.sub(&gradient(&potential))?;
    Ok(HelmholtzParts { solenoidal, potential })
}
