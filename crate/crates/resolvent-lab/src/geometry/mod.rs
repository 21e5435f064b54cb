//! Model geometries and damping coefficients.
//!
//! Two closed model manifolds are discretised spectrally: the flat torus
//! `Tⁿ` with a full FFT mode band ([`Torus`]) and the zonal sector of the
//! round 3-sphere ([`SphereZonal`]). Both expose the same contract:
//!
//! * a finite list of Laplace eigenvalues for the retained modes;
//! * an invertible synthesis/analysis pair between mode coefficients and
//!   grid samples, exact to rounding on band-limited data;
//! * a quadrature that integrates products of retained basis functions
//!   exactly, so discrete integration by parts has no error term.
//!
//! [`DampingField`] wraps a real band-limited coefficient `a(x)` together
//! with cached samples on the product grid and exact (or grid-derived)
//! bounds `inf a`, `sup a`.

mod damping;
pub mod sphere;
pub mod torus;

pub use damping::DampingField;
pub use sphere::SphereZonal;
pub use torus::Torus;

use crate::error::{Error, Result};
use crate::C64;

/// A spectral model geometry; all higher layers are generic over this.
pub enum ModelGeometry {
    Torus(Torus),
    SphereZonal(SphereZonal),
}

impl ModelGeometry {
    pub fn torus(dim: usize, nper: usize) -> Result<Self> {
        Ok(Self::Torus(Torus::new(dim, nper)?))
    }

    pub fn sphere_zonal(kmax: usize, ntheta: Option<usize>) -> Result<Self> {
        Ok(Self::SphereZonal(SphereZonal::new(kmax, ntheta)?))
    }

    /// Manifold dimension (`n` for `Tⁿ`, 3 for the sphere sector).
    pub fn dimension(&self) -> usize {
        match self {
            Self::Torus(t) => t.dim(),
            Self::SphereZonal(_) => 3,
        }
    }

    /// Number of retained modes.
    pub fn mode_count(&self) -> usize {
        match self {
            Self::Torus(t) => t.mode_count(),
            Self::SphereZonal(s) => s.mode_count(),
        }
    }

    /// Number of grid sample points.
    pub fn grid_len(&self) -> usize {
        match self {
            Self::Torus(t) => t.mode_count(),
            Self::SphereZonal(s) => s.grid_len(),
        }
    }

    /// Laplace eigenvalues `λ_i ≥ 0` of the retained modes.
    pub fn eigenvalues(&self) -> &[f64] {
        match self {
            Self::Torus(t) => t.eigenvalues(),
            Self::SphereZonal(s) => s.eigenvalues(),
        }
    }

    /// Quadrature weight per grid point; sums to the manifold volume.
    pub fn quad_weights(&self) -> &[f64] {
        match self {
            Self::Torus(t) => t.quad_weights(),
            Self::SphereZonal(s) => s.quad_weights(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Self::Torus(t) => t.volume(),
            Self::SphereZonal(s) => s.volume(),
        }
    }

    /// Band coordinate of a mode: `|k|_∞` on the torus, the degree on the
    /// sphere. Truncations and tail-mass checks are phrased in terms of it.
    pub fn mode_order(&self, mode: usize) -> usize {
        match self {
            Self::Torus(t) => t.mode_order(mode),
            Self::SphereZonal(s) => s.mode_order(mode),
        }
    }

    /// Largest band coordinate over all retained modes.
    pub fn max_mode_order(&self) -> usize {
        match self {
            Self::Torus(t) => t.nper() / 2,
            Self::SphereZonal(s) => s.kmax(),
        }
    }

    /// Grid samples from mode coefficients (unnormalised basis).
    pub fn synthesize(&self, coeffs: &[C64]) -> Result<Vec<C64>> {
        match self {
            Self::Torus(t) => t.synthesize(coeffs),
            Self::SphereZonal(s) => s.synthesize(coeffs),
        }
    }

    /// Mode coefficients from grid samples; inverse of [`Self::synthesize`]
    /// on band-limited data.
    pub fn analyze(&self, grid: &[C64]) -> Result<Vec<C64>> {
        match self {
            Self::Torus(t) => t.analyze(grid),
            Self::SphereZonal(s) => s.analyze(grid),
        }
    }

    pub fn as_torus(&self) -> Result<&Torus> {
        match self {
            Self::Torus(t) => Ok(t),
            Self::SphereZonal(_) => Err(Error::InvalidParameter(
                "operation requires a torus geometry".into(),
            )),
        }
    }

    pub fn as_sphere(&self) -> Result<&SphereZonal> {
        match self {
            Self::SphereZonal(s) => Ok(s),
            Self::Torus(_) => Err(Error::InvalidParameter(
                "operation requires a sphere geometry".into(),
            )),
        }
    }

    /// Short human-readable label used in reports.
    pub fn label(&self) -> String {
        match self {
            Self::Torus(t) => format!("torus{}d-n{}", t.dim(), t.nper()),
            Self::SphereZonal(s) => format!("sphere-zonal-k{}", s.kmax()),
        }
    }
}
