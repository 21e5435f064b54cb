//! Zonal (rotation-invariant) sector of the round 3-sphere.
//!
//! A zonal function on `S³` depends only on the polar angle `θ ∈ [0, π]`
//! measured from a fixed pole. The zonal spherical harmonics of degree `k`
//! are Chebyshev kernels of the second kind,
//!
//! `Z_k(θ) = U_k(cos θ) / (√2 π) = sin((k+1)θ) / (√2 π sin θ)`,
//!
//! normalised so `‖Z_k‖_{L²(S³)} = 1`, with Laplace eigenvalue
//! `λ_k = k(k+2)`. The quadrature is the Gauss rule for the weight
//! `sin²θ` (Gauss–Chebyshev of the second kind): equispaced interior
//! nodes `θ_i = iπ/(M+1)` with weights `∝ sin²θ_i`, exact for products
//! of harmonics up to combined degree `2M - 1`. Exactness makes the Gram
//! matrix of the retained basis the identity to rounding, which the
//! resolvent checks rely on.

use crate::error::{Error, Result};
use crate::C64;

use std::f64::consts::PI;

/// Spectral discretisation of the zonal sector, degrees `0..=kmax`.
pub struct SphereZonal {
    kmax: usize,
    /// Quadrature nodes `θ_i`, open at both poles.
    thetas: Vec<f64>,
    /// Surface-measure weights; they sum to `vol(S³) = 2π²` exactly.
    weights: Vec<f64>,
    /// `Z_k(θ_i)`, mode-major: row `k` holds the samples of degree `k`.
    basis: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl SphereZonal {
    /// Builds the sector with `ntheta` quadrature nodes (default `4·kmax`).
    ///
    /// The node count must satisfy `ntheta ≥ 2·kmax + 2` so that analysis
    /// of a product of two retained harmonics is exact; the default leaves
    /// additional headroom for products with a band-limited damping.
    pub fn new(kmax: usize, ntheta: Option<usize>) -> Result<Self> {
        if kmax < 2 {
            return Err(Error::InvalidParameter(format!(
                "maximal degree must be at least 2, got {kmax}"
            )));
        }
        let ntheta = ntheta.unwrap_or(4 * kmax);
        if ntheta < 2 * kmax + 2 {
            return Err(Error::InvalidParameter(format!(
                "{ntheta} nodes cannot integrate degree-{kmax} products exactly"
            )));
        }
        let m1 = (ntheta + 1) as f64;
        let thetas: Vec<f64> = (1..=ntheta).map(|i| i as f64 * PI / m1).collect();
        let weights: Vec<f64> = thetas
            .iter()
            .map(|&t| 4.0 * PI * PI / m1 * t.sin().powi(2))
            .collect();

        let mut basis = vec![0.0; (kmax + 1) * ntheta];
        for (i, &theta) in thetas.iter().enumerate() {
            for (k, z) in chebyshev_u_ladder(theta.cos(), kmax).into_iter().enumerate() {
                basis[k * ntheta + i] = z / (std::f64::consts::SQRT_2 * PI);
            }
        }
        let eigenvalues = (0..=kmax).map(|k| (k * (k + 2)) as f64).collect();
        Ok(Self {
            kmax,
            thetas,
            weights,
            basis,
            eigenvalues,
        })
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// Number of retained modes, `kmax + 1`.
    pub fn mode_count(&self) -> usize {
        self.kmax + 1
    }

    pub fn grid_len(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn volume(&self) -> f64 {
        2.0 * PI * PI
    }

    /// Degree of a mode; the mode index is the degree.
    pub fn mode_order(&self, mode: usize) -> usize {
        mode
    }

    /// Samples of `Z_k` on the quadrature grid.
    pub fn basis_row(&self, k: usize) -> &[f64] {
        &self.basis[k * self.grid_len()..(k + 1) * self.grid_len()]
    }

    /// Grid samples `u(θ_i) = Σ_k c_k Z_k(θ_i)`.
    pub fn synthesize(&self, coeffs: &[C64]) -> Result<Vec<C64>> {
        if coeffs.len() != self.mode_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for {} retained degrees",
                coeffs.len(),
                self.mode_count()
            )));
        }
        let n = self.grid_len();
        let mut grid = vec![C64::new(0.0, 0.0); n];
        for (k, &c) in coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (g, &z) in grid.iter_mut().zip(self.basis_row(k)) {
                *g += c * z;
            }
        }
        Ok(grid)
    }

    /// Quadrature projection `c_k = Σ_i W_i Z_k(θ_i) u(θ_i)`; exact (hence
    /// inverse to synthesis) whenever `u` is band-limited to `kmax`.
    pub fn analyze(&self, grid: &[C64]) -> Result<Vec<C64>> {
        if grid.len() != self.grid_len() {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for {} quadrature nodes",
                grid.len(),
                self.grid_len()
            )));
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); self.mode_count()];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let row = self.basis_row(k);
            let mut acc = C64::new(0.0, 0.0);
            for ((&w, &z), &u) in self.weights.iter().zip(row).zip(grid) {
                acc += u * (w * z);
            }
            *c = acc;
        }
        Ok(coeffs)
    }

    /// Exact Galerkin product `Π_B (a · u)` for a damping sampled on the
    /// quadrature grid with degree at most `2(ntheta) - 1 - 2·kmax`.
    pub fn multiply_bandlimited(&self, a_grid: &[C64], u_coeffs: &[C64]) -> Result<Vec<C64>> {
        if a_grid.len() != self.grid_len() {
            return Err(Error::ShapeMismatch(format!(
                "{} damping samples for {} quadrature nodes",
                a_grid.len(),
                self.grid_len()
            )));
        }
        let mut grid = self.synthesize(u_coeffs)?;
        for (g, &a) in grid.iter_mut().zip(a_grid) {
            *g *= a;
        }
        self.analyze(&grid)
    }
}

/// Values `U_0(x), ..., U_kmax(x)` by the three-term recurrence; stable on
/// `[-1, 1]`.
pub(crate) fn chebyshev_u_ladder(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut prev = 1.0;
    out.push(prev);
    if kmax == 0 {
        return out;
    }
    let mut cur = 2.0 * x;
    out.push(cur);
    for _ in 2..=kmax {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_ladder_matches_k_times_k_plus_2() {
        let s = SphereZonal::new(10, None).unwrap();
        let expect: Vec<f64> = vec![
            0.0, 3.0, 8.0, 15.0, 24.0, 35.0, 48.0, 63.0, 80.0, 99.0, 120.0,
        ];
        assert_eq!(s.eigenvalues(), expect.as_slice());
        // Consecutive gaps are 2k+1, so the top gap at kmax = 10 is 21.
        assert_eq!(s.eigenvalues()[10] - s.eigenvalues()[9], 21.0);
    }

    #[test]
    fn quadrature_weights_sum_to_sphere_volume() {
        let s = SphereZonal::new(24, None).unwrap();
        let total: f64 = s.quad_weights().iter().sum();
        let vol = 2.0 * PI * PI;
        assert!((total - vol).abs() < 1e-12 * vol, "Σ W = {total}");
    }

    #[test]
    fn gram_matrix_is_identity() {
        let s = SphereZonal::new(24, None).unwrap();
        for j in 0..s.mode_count() {
            for k in j..s.mode_count() {
                let mut acc = 0.0;
                for ((&w, &zj), &zk) in s
                    .quad_weights()
                    .iter()
                    .zip(s.basis_row(j))
                    .zip(s.basis_row(k))
                {
                    acc += w * zj * zk;
                }
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (acc - expect).abs() < 1e-10,
                    "⟨Z_{j}, Z_{k}⟩ = {acc}"
                );
            }
        }
    }

    #[test]
    fn analyze_inverts_synthesize_on_band_limited_data() {
        use rand::{Rng, SeedableRng};
        let s = SphereZonal::new(24, None).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let coeffs: Vec<C64> = (0..s.mode_count())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let back = s.analyze(&s.synthesize(&coeffs).unwrap()).unwrap();
        let err: f64 = coeffs
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round-trip error {err}");
    }

    #[test]
    fn zonal_kernel_matches_sine_quotient() {
        let s = SphereZonal::new(12, None).unwrap();
        for (i, &theta) in s.thetas().iter().enumerate() {
            for k in 0..=12usize {
                let expect =
                    (((k + 1) as f64) * theta).sin() / (theta.sin() * std::f64::consts::SQRT_2 * PI);
                let got = s.basis_row(k)[i];
                assert!((got - expect).abs() < 1e-10, "Z_{k}({theta}) = {got}");
            }
        }
    }
}
