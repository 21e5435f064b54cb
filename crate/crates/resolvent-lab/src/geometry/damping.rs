//! Real band-limited damping coefficients `a(x)`.
//!
//! A damping field owns its mode coefficients, real samples on the
//! geometry grid, cached samples on the de-aliased product grid, and the
//! bounds `inf a ≤ a ≤ sup a`. The named constructors record bounds that
//! are exact by inspection of the closed form; the generic constructor
//! falls back on grid extremes, which under-estimate the range of a trig
//! polynomial by at most the grid resolution.
//!
//! Invariants maintained here:
//!
//! * coefficients describe a real function (Hermitian symmetry on the
//!   torus, real zonal coefficients on the sphere);
//! * every grid sample lies in `[inf a, sup a]`;
//! * products `u ↦ Π_B(a·u)` computed through the cached samples equal
//!   the exact Galerkin truncation, making the multiplication operator
//!   exactly Hermitian on the retained band.

use std::collections::HashMap;
use std::sync::Arc;

use super::sphere::chebyshev_u_ladder;
use super::ModelGeometry;
use crate::error::{Error, Result};
use crate::C64;

/// Tolerance for the imaginary residue of a nominally real field.
const REALITY_TOL: f64 = 1e-10;

enum ProductCache {
    /// Samples on the torus' 3/2-oversampled grid.
    TorusOver(Vec<C64>),
    /// Samples on the sphere quadrature grid (same grid as analysis).
    SphereGrid(Vec<C64>),
}

/// Real band-limited damping coefficient on a model geometry.
pub struct DampingField {
    geom: Arc<ModelGeometry>,
    coeffs: Vec<C64>,
    /// Sparse view of `coeffs`; damping bands are tiny in practice.
    nonzero: Vec<(usize, C64)>,
    /// Real samples on the geometry grid.
    grid: Vec<f64>,
    cache: ProductCache,
    sup: f64,
    inf: f64,
    mean: f64,
    /// Max band coordinate (`|k|_∞` or degree) over nonzero coefficients.
    band: usize,
}

impl DampingField {
    /// The constant damping `a ≡ c` (any geometry).
    pub fn constant(geom: &Arc<ModelGeometry>, c: f64) -> Result<Self> {
        let mut coeffs = vec![C64::new(0.0, 0.0); geom.mode_count()];
        match geom.as_ref() {
            ModelGeometry::Torus(_) => coeffs[0] = C64::new(c, 0.0),
            ModelGeometry::SphereZonal(_) => {
                // Z_0 = 1/(√2 π), so a constant c needs coefficient c·√2·π.
                coeffs[0] = C64::new(c * std::f64::consts::SQRT_2 * std::f64::consts::PI, 0.0);
            }
        }
        Self::with_known_bounds(geom, coeffs, Some((c, c)))
    }

    /// Torus damping `a(x) = offset + Σ terms amp·cos(x_axis)`.
    ///
    /// Bounds are exact: the cosines vary independently, so
    /// `sup a = offset + Σ|amp|` and `inf a = offset - Σ|amp|`, both
    /// attained at grid points.
    pub fn cosine_sum(
        geom: &Arc<ModelGeometry>,
        offset: f64,
        terms: &[(usize, f64)],
    ) -> Result<Self> {
        let torus = geom.as_torus()?;
        let dim = torus.dim();
        let mut per_axis: HashMap<usize, f64> = HashMap::new();
        for &(axis, amp) in terms {
            if axis >= dim {
                return Err(Error::InvalidParameter(format!(
                    "cosine axis {axis} out of range for dimension {dim}"
                )));
            }
            *per_axis.entry(axis).or_insert(0.0) += amp;
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); geom.mode_count()];
        coeffs[0] = C64::new(offset, 0.0);
        let mut spread = 0.0;
        for (&axis, &amp) in &per_axis {
            if amp == 0.0 {
                continue;
            }
            spread += amp.abs();
            for sign in [1i64, -1] {
                let mut k = vec![0i64; dim];
                k[axis] = sign;
                let mode = (0..torus.mode_count())
                    .find(|&m| torus.wavevector(m) == k.as_slice())
                    .expect("unit wavevector is always inside the band");
                coeffs[mode] = C64::new(amp / 2.0, 0.0);
            }
        }
        Self::with_known_bounds(geom, coeffs, Some((offset - spread, offset + spread)))
    }

    /// Zonal damping `a(θ) = offset + amp·cos θ` on the sphere sector.
    ///
    /// `cos θ = U_1(cos θ)/2`, a degree-1 harmonic; the exact bounds
    /// `offset ± |amp|` are attained at the poles (off the open grid).
    pub fn zonal_cosine(geom: &Arc<ModelGeometry>, offset: f64, amp: f64) -> Result<Self> {
        geom.as_sphere()?;
        let mut coeffs = vec![C64::new(0.0, 0.0); geom.mode_count()];
        let s2pi = std::f64::consts::SQRT_2 * std::f64::consts::PI;
        coeffs[0] = C64::new(offset * s2pi, 0.0);
        coeffs[1] = C64::new(amp * s2pi / 2.0, 0.0);
        Self::with_known_bounds(geom, coeffs, Some((offset - amp.abs(), offset + amp.abs())))
    }

    /// Generic constructor; bounds are taken from grid extremes.
    pub fn from_coeffs(geom: &Arc<ModelGeometry>, coeffs: Vec<C64>) -> Result<Self> {
        Self::with_known_bounds(geom, coeffs, None)
    }

    fn with_known_bounds(
        geom: &Arc<ModelGeometry>,
        coeffs: Vec<C64>,
        bounds: Option<(f64, f64)>,
    ) -> Result<Self> {
        if coeffs.len() != geom.mode_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} damping coefficients for {} modes",
                coeffs.len(),
                geom.mode_count()
            )));
        }
        let complex_grid = geom.synthesize(&coeffs)?;
        let scale = complex_grid.iter().map(|g| g.norm()).fold(1.0, f64::max);
        let imag = complex_grid.iter().map(|g| g.im.abs()).fold(0.0, f64::max);
        if imag > REALITY_TOL * scale {
            return Err(Error::InvalidParameter(format!(
                "damping coefficients describe a complex field (imag residue {imag:.3e})"
            )));
        }
        let grid: Vec<f64> = complex_grid.iter().map(|g| g.re).collect();
        let grid_max = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let grid_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
        let (inf, sup) = bounds.unwrap_or((grid_min, grid_max));
        // Grid samples may never escape the declared range.
        let slack = 1e-12 * (1.0 + scale);
        if grid_max > sup + slack || grid_min < inf - slack {
            return Err(Error::InvalidParameter(format!(
                "declared bounds [{inf}, {sup}] exclude grid samples [{grid_min}, {grid_max}]"
            )));
        }

        let nonzero: Vec<(usize, C64)> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, c)| (i, *c))
            .collect();
        let band = nonzero
            .iter()
            .map(|&(i, _)| geom.mode_order(i))
            .max()
            .unwrap_or(0);
        let weights = geom.quad_weights();
        let mean = grid
            .iter()
            .zip(weights)
            .map(|(a, w)| a * w)
            .sum::<f64>()
            / geom.volume();

        let cache = match geom.as_ref() {
            ModelGeometry::Torus(t) => {
                if band >= t.nper() / 2 {
                    return Err(Error::InvalidParameter(format!(
                        "damping band {band} too wide for alias-free products on an N={} grid",
                        t.nper()
                    )));
                }
                ProductCache::TorusOver(t.oversampled_samples(&nonzero))
            }
            ModelGeometry::SphereZonal(_) => ProductCache::SphereGrid(complex_grid),
        };

        Ok(Self {
            geom: Arc::clone(geom),
            coeffs,
            nonzero,
            grid,
            cache,
            sup,
            inf,
            mean,
            band,
        })
    }

    pub fn geometry(&self) -> &Arc<ModelGeometry> {
        &self.geom
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Real samples on the geometry grid.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn inf(&self) -> f64 {
        self.inf
    }

    /// Volume average of the damping; preconditioners use it as the
    /// constant-coefficient surrogate.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Uniform norm bound `max(|sup a|, |inf a|)`.
    pub fn sup_abs(&self) -> f64 {
        self.sup.abs().max(self.inf.abs())
    }

    /// Max band coordinate over nonzero coefficients.
    pub fn band(&self) -> usize {
        self.band
    }

    /// Whether the damping is identically constant.
    pub fn is_constant(&self) -> bool {
        self.band == 0
    }

    /// Exact Galerkin product `Π_B (a · u)` on mode coefficients.
    pub fn multiply(&self, u_coeffs: &[C64]) -> Result<Vec<C64>> {
        match (&self.cache, self.geom.as_ref()) {
            (ProductCache::TorusOver(a_over), ModelGeometry::Torus(t)) => {
                t.multiply_bandlimited(a_over, self.band, u_coeffs)
            }
            (ProductCache::SphereGrid(a_grid), ModelGeometry::SphereZonal(s)) => {
                s.multiply_bandlimited(a_grid, u_coeffs)
            }
            _ => unreachable!("cache kind always matches the geometry kind"),
        }
    }

    /// Point evaluation at arbitrary torus coordinates (radians).
    pub fn eval_torus(&self, x: &[f64]) -> Result<f64> {
        let torus = self.geom.as_torus()?;
        if x.len() != torus.dim() {
            return Err(Error::ShapeMismatch(format!(
                "point has {} coordinates, torus has dimension {}",
                x.len(),
                torus.dim()
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for &(mode, c) in &self.nonzero {
            let phase: f64 = torus
                .wavevector(mode)
                .iter()
                .zip(x)
                .map(|(&k, &xi)| k as f64 * xi)
                .sum();
            acc += c * C64::new(phase.cos(), phase.sin());
        }
        Ok(acc.re)
    }

    /// Point evaluation at polar angle `θ` on the sphere sector.
    pub fn eval_theta(&self, theta: f64) -> Result<f64> {
        self.geom.as_sphere()?;
        let ladder = chebyshev_u_ladder(theta.cos(), self.band);
        let s2pi = std::f64::consts::SQRT_2 * std::f64::consts::PI;
        let mut acc = 0.0;
        for &(mode, c) in &self.nonzero {
            acc += c.re * ladder[mode] / s2pi;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus3() -> Arc<ModelGeometry> {
        Arc::new(ModelGeometry::torus(3, 8).unwrap())
    }

    #[test]
    fn cosine_sum_has_exact_bounds_and_samples_inside() {
        let geom = torus3();
        let a = DampingField::cosine_sum(&geom, 3.0, &[(0, 1.0), (1, 1.0), (2, 1.0)]).unwrap();
        assert_eq!(a.sup(), 6.0);
        assert_eq!(a.inf(), 0.0);
        assert_eq!(a.band(), 1);
        assert!((a.mean() - 3.0).abs() < 1e-12);
        for &s in a.grid() {
            assert!(s >= a.inf() - 1e-12 && s <= a.sup() + 1e-12);
        }
        // Extremes are attained on the grid for this damping.
        let max = a.grid().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = a.grid().iter().copied().fold(f64::INFINITY, f64::min);
        assert!((max - 6.0).abs() < 1e-12 && min.abs() < 1e-12);
    }

    #[test]
    fn point_evaluation_matches_closed_form() {
        let geom = torus3();
        let a = DampingField::cosine_sum(&geom, 1.0, &[(0, 1.0)]).unwrap();
        for &x0 in &[0.0, 0.3, 1.7, 4.1] {
            let got = a.eval_torus(&[x0, 0.2, 0.9]).unwrap();
            assert!((got - (1.0 + x0.cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_on_sphere_evaluates_to_constant() {
        let geom = Arc::new(ModelGeometry::sphere_zonal(10, None).unwrap());
        let a = DampingField::constant(&geom, 2.5).unwrap();
        assert_eq!(a.sup(), 2.5);
        assert!((a.mean() - 2.5).abs() < 1e-12);
        for &theta in &[0.3, 1.0, 2.8] {
            assert!((a.eval_theta(theta).unwrap() - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zonal_cosine_matches_closed_form() {
        let geom = Arc::new(ModelGeometry::sphere_zonal(10, None).unwrap());
        let a = DampingField::zonal_cosine(&geom, 1.0, 0.5).unwrap();
        assert_eq!(a.sup(), 1.5);
        assert_eq!(a.inf(), 0.5);
        for &theta in &[0.2, 1.1, 2.0, 3.0] {
            let got = a.eval_theta(theta).unwrap();
            assert!((got - (1.0 + 0.5 * theta.cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_coefficients_are_rejected() {
        let geom = torus3();
        let mut coeffs = vec![C64::new(0.0, 0.0); geom.mode_count()];
        coeffs[1] = C64::new(0.0, 1.0);
        let err = DampingField::from_coeffs(&geom, coeffs);
        assert!(err.is_err());
    }

    #[test]
    fn multiplication_by_damping_is_hermitian() {
        use rand::{Rng, SeedableRng};
        let geom = torus3();
        let a = DampingField::cosine_sum(&geom, 3.0, &[(0, 1.0), (1, 1.0), (2, 1.0)]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let field = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<C64> {
            (0..geom.mode_count())
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        let u = field(&mut rng);
        let v = field(&mut rng);
        let au = a.multiply(&u).unwrap();
        let av = a.multiply(&v).unwrap();
        let dot = |x: &[C64], y: &[C64]| -> C64 {
            x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
        };
        // ⟨a·u, v⟩ = ⟨u, a·v⟩ because the product is an exact Galerkin
        // truncation of a real multiplier.
        let lhs = dot(&au, &v);
        let rhs = dot(&u, &av);
        assert!((lhs - rhs).norm() < 1e-12 * (lhs.norm() + 1.0));
    }
}
