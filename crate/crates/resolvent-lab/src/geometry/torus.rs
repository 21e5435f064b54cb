//! Flat torus `Tⁿ = (R/2πZ)ⁿ` with a full FFT mode band.
//!
//! The discretisation keeps every discrete Fourier mode of an `N`-point
//! grid per axis, `k_j ∈ {-N/2, ..., N/2-1}`, so the synthesis/analysis
//! pair is a square invertible transform: `Nⁿ` grid points correspond to
//! `Nⁿ` retained modes and `analyze ∘ synthesize` is the identity up to
//! rounding. The Laplacian acts diagonally with exact symbol `|k|²`.
//!
//! Products with a band-limited damping are evaluated on a 3/2-oversampled
//! grid and truncated back to the band. As long as the damping band is
//! below `N/2` per axis this equals the exact Galerkin product
//! `Π_B (a · u)`: no aliased frequency can fold back into the retained
//! band, so multiplication operators are exactly Hermitian in the
//! discrete model.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::C64;

/// Spectral discretisation of the flat torus.
pub struct Torus {
    dim: usize,
    nper: usize,
    /// 3/2-oversampled grid length per axis, used for de-aliased products.
    nover: usize,
    /// Wavevectors in FFT order, flattened mode-major (`dim` entries each).
    modes: Vec<i64>,
    /// `|k|²` per mode, same ordering as `modes`.
    eigenvalues: Vec<f64>,
    /// Uniform quadrature weights, one per grid point.
    weights: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd_over: Arc<dyn Fft<f64>>,
    inv_over: Arc<dyn Fft<f64>>,
}

impl Torus {
    /// Builds the discretisation with `nper` grid points per axis.
    ///
    /// `dim ≥ 3` matches the exponent theory (the target Lebesgue pair
    /// `2n/(n±2)` needs `n ≥ 3`); `nper` must be even and at least 8 so
    /// the band is symmetric and products have de-aliasing headroom.
    pub fn new(dim: usize, nper: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidParameter(format!(
                "torus dimension must be at least 3, got {dim}"
            )));
        }
        if nper < 8 || nper % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid size per axis must be even and at least 8, got {nper}"
            )));
        }
        let mode_count = nper
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidParameter(format!("grid {nper}^{dim} overflows")))?;
        if mode_count > 20_000_000 {
            return Err(Error::InvalidParameter(format!(
                "grid {nper}^{dim} = {mode_count} points is beyond the intended desk scale"
            )));
        }

        let mut modes = Vec::with_capacity(mode_count * dim);
        let mut eigenvalues = Vec::with_capacity(mode_count);
        for flat in 0..mode_count {
            let mut rem = flat;
            let mut lam = 0.0;
            let base = modes.len();
            modes.resize(base + dim, 0);
            // Row-major decomposition; the most significant digit is axis 0.
            for axis in (0..dim).rev() {
                let j = rem % nper;
                rem /= nper;
                let k = Self::index_to_wavevector(j, nper);
                modes[base + axis] = k;
                lam += (k * k) as f64;
            }
            eigenvalues.push(lam);
        }

        let cell = (2.0 * std::f64::consts::PI / nper as f64).powi(dim as i32);
        let weights = vec![cell; mode_count];

        let nover = 3 * nper / 2;
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            nper,
            nover,
            modes,
            eigenvalues,
            weights,
            fwd: planner.plan_fft_forward(nper),
            inv: planner.plan_fft_inverse(nper),
            fwd_over: planner.plan_fft_forward(nover),
            inv_over: planner.plan_fft_inverse(nover),
        })
    }

    fn index_to_wavevector(j: usize, nper: usize) -> i64 {
        if j < nper / 2 {
            j as i64
        } else {
            j as i64 - nper as i64
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nper(&self) -> usize {
        self.nper
    }

    /// Number of retained modes; equals the number of grid points.
    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.dim as i32)
    }

    /// Wavevector of a mode in flat (row-major, FFT-ordered) indexing.
    pub fn wavevector(&self, mode: usize) -> &[i64] {
        &self.modes[mode * self.dim..(mode + 1) * self.dim]
    }

    /// Max-norm `|k|_∞` of a mode; used for truncation and band masks.
    pub fn mode_order(&self, mode: usize) -> usize {
        self.wavevector(mode)
            .iter()
            .map(|k| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Grid point coordinates `x_j = 2π j / N` of a flat grid index.
    pub fn grid_point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            let j = rem % self.nper;
            rem /= self.nper;
            x[axis] = 2.0 * std::f64::consts::PI * j as f64 / self.nper as f64;
        }
        x
    }

    /// Grid samples `u(x_j) = Σ_k c_k e^{i k·x_j}` (unnormalised basis).
    pub fn synthesize(&self, coeffs: &[C64]) -> Result<Vec<C64>> {
        self.check_len(coeffs.len())?;
        let mut grid = coeffs.to_vec();
        apply_fft_along_axes(&mut grid, self.dim, self.nper, &self.inv);
        Ok(grid)
    }

    /// Inverse of [`Self::synthesize`]: `c_k = N^{-n} Σ_j u(x_j) e^{-i k·x_j}`.
    pub fn analyze(&self, grid: &[C64]) -> Result<Vec<C64>> {
        self.check_len(grid.len())?;
        let mut coeffs = grid.to_vec();
        apply_fft_along_axes(&mut coeffs, self.dim, self.nper, &self.fwd);
        let scale = 1.0 / self.mode_count() as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        Ok(coeffs)
    }

    /// Samples of a sparse coefficient set on the oversampled product grid.
    ///
    /// Used once per damping field; the result is cached and reused by
    /// every de-aliased product.
    pub fn oversampled_samples(&self, sparse: &[(usize, C64)]) -> Vec<C64> {
        let total = self.nover.pow(self.dim as u32);
        let mut big = vec![C64::new(0.0, 0.0); total];
        for &(mode, c) in sparse {
            big[self.over_flat(self.wavevector(mode))] += c;
        }
        apply_fft_along_axes(&mut big, self.dim, self.nover, &self.inv_over);
        big
    }

    /// Exact Galerkin product `Π_B (a · u)` against cached oversampled
    /// damping samples. `a_band` is the damping's max wavevector norm; it
    /// must stay below `N/2` for the 3/2 rule to be alias-free.
    pub fn multiply_bandlimited(
        &self,
        a_over: &[C64],
        a_band: usize,
        u_coeffs: &[C64],
    ) -> Result<Vec<C64>> {
        self.check_len(u_coeffs.len())?;
        if a_band >= self.nper / 2 {
            return Err(Error::InvalidParameter(format!(
                "damping band {a_band} too wide for alias-free products on an N={} grid",
                self.nper
            )));
        }
        let total = self.nover.pow(self.dim as u32);
        if a_over.len() != total {
            return Err(Error::ShapeMismatch(format!(
                "oversampled samples have length {}, expected {total}",
                a_over.len()
            )));
        }
        let mut big = vec![C64::new(0.0, 0.0); total];
        for mode in 0..self.mode_count() {
            big[self.over_flat(self.wavevector(mode))] = u_coeffs[mode];
        }
        apply_fft_along_axes(&mut big, self.dim, self.nover, &self.inv_over);
        for (b, a) in big.iter_mut().zip(a_over) {
            *b *= a;
        }
        apply_fft_along_axes(&mut big, self.dim, self.nover, &self.fwd_over);
        let scale = 1.0 / total as f64;
        let mut out = vec![C64::new(0.0, 0.0); self.mode_count()];
        for (mode, o) in out.iter_mut().enumerate() {
            *o = big[self.over_flat(self.wavevector(mode))] * scale;
        }
        Ok(out)
    }

    fn over_flat(&self, k: &[i64]) -> usize {
        let m = self.nover as i64;
        let mut flat = 0usize;
        for &kj in k {
            flat = flat * self.nover + kj.rem_euclid(m) as usize;
        }
        flat
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.mode_count() {
            return Err(Error::ShapeMismatch(format!(
                "vector length {len} does not match the {} retained modes",
                self.mode_count()
            )));
        }
        Ok(())
    }
}

/// In-place 1-D FFT along every axis of a row-major `len^n_axes` array.
fn apply_fft_along_axes(data: &mut [C64], n_axes: usize, len: usize, fft: &Arc<dyn Fft<f64>>) {
    debug_assert_eq!(data.len(), len.pow(n_axes as u32));
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut line = vec![C64::new(0.0, 0.0); len];
    let total = data.len();
    for axis in 0..n_axes {
        let stride = len.pow((n_axes - 1 - axis) as u32);
        if stride == 1 {
            // Contiguous lines: rustfft processes the whole buffer chunk-wise.
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = len * stride;
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + offset + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, value) in line.iter().enumerate() {
                    data[base + offset + j * stride] = *value;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mode_count_matches_grid() {
        let t = Torus::new(3, 8).unwrap();
        assert_eq!(t.mode_count(), 512);
        let t = Torus::new(4, 8).unwrap();
        assert_eq!(t.mode_count(), 4096);
    }

    #[test]
    fn eigenvalues_are_exact_integer_squares() {
        let t = Torus::new(3, 8).unwrap();
        // On the |k|_∞ ≤ 3 sub-band every eigenvalue is an integer in [0, 27].
        for mode in 0..t.mode_count() {
            let lam = t.eigenvalues()[mode];
            assert_eq!(lam, lam.round());
            if t.mode_order(mode) <= 3 {
                assert!((0.0..=27.0).contains(&lam), "λ = {lam} out of range");
            }
        }
        // Smallest nonzero eigenvalue of the torus Laplacian is 1.
        let min_nonzero = t
            .eigenvalues()
            .iter()
            .copied()
            .filter(|&l| l > 0.0)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min_nonzero, 1.0);
    }

    #[test]
    fn quadrature_integrates_constants_exactly() {
        let t = Torus::new(3, 8).unwrap();
        let total: f64 = t.quad_weights().iter().sum();
        let vol = (2.0 * std::f64::consts::PI).powi(3);
        assert!((total - vol).abs() < 1e-12 * vol);
        assert!((t.volume() - vol).abs() < 1e-12 * vol);
    }

    #[test]
    fn synthesize_of_zero_mode_is_constant_one() {
        let t = Torus::new(3, 8).unwrap();
        let mut coeffs = vec![c(0.0, 0.0); t.mode_count()];
        coeffs[0] = c(1.0, 0.0);
        let grid = t.synthesize(&coeffs).unwrap();
        for g in grid {
            assert!((g - c(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn analyze_recovers_cosine_coefficients() {
        let t = Torus::new(3, 8).unwrap();
        let grid: Vec<C64> = (0..t.mode_count())
            .map(|j| c(t.grid_point(j)[1].cos(), 0.0))
            .collect();
        let coeffs = t.analyze(&grid).unwrap();
        for mode in 0..t.mode_count() {
            let k = t.wavevector(mode);
            let expect = if k == [0, 1, 0] || k == [0, -1, 0] {
                c(0.5, 0.0)
            } else {
                c(0.0, 0.0)
            };
            assert!(
                (coeffs[mode] - expect).norm() < 1e-13,
                "coefficient at {k:?} is {}",
                coeffs[mode]
            );
        }
    }

    #[test]
    fn round_trip_is_identity_on_white_noise() {
        use rand::{Rng, SeedableRng};
        let t = Torus::new(3, 8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let coeffs: Vec<C64> = (0..t.mode_count())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let back = t.analyze(&t.synthesize(&coeffs).unwrap()).unwrap();
        let err: f64 = coeffs
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round-trip error {err}");
    }

    #[test]
    fn mode_basis_function_matches_plane_wave() {
        let t = Torus::new(3, 8).unwrap();
        // Pick a mode with a negative component to exercise FFT ordering.
        let mode = (0..t.mode_count())
            .find(|&m| t.wavevector(m) == [2, -3, 1])
            .unwrap();
        let mut coeffs = vec![c(0.0, 0.0); t.mode_count()];
        coeffs[mode] = c(1.0, 0.0);
        let grid = t.synthesize(&coeffs).unwrap();
        for j in (0..t.mode_count()).step_by(97) {
            let x = t.grid_point(j);
            let phase = 2.0 * x[0] - 3.0 * x[1] + x[2];
            let expect = c(phase.cos(), phase.sin());
            assert!((grid[j] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn dealiased_product_matches_dense_convolution() {
        use rand::{Rng, SeedableRng};
        let t = Torus::new(3, 8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        // Damping a = 1 + cos x₁ as sparse coefficients.
        let mode_of = |k: [i64; 3]| (0..t.mode_count()).find(|&m| t.wavevector(m) == k).unwrap();
        let sparse = vec![
            (mode_of([0, 0, 0]), c(1.0, 0.0)),
            (mode_of([1, 0, 0]), c(0.5, 0.0)),
            (mode_of([-1, 0, 0]), c(0.5, 0.0)),
        ];
        let a_over = t.oversampled_samples(&sparse);
        let u: Vec<C64> = (0..t.mode_count())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let fast = t.multiply_bandlimited(&a_over, 1, &u).unwrap();
        // Dense reference: truncated convolution over the retained band.
        let mut slow = vec![c(0.0, 0.0); t.mode_count()];
        for out in 0..t.mode_count() {
            let ko = t.wavevector(out);
            let mut acc = c(0.0, 0.0);
            for &(am, ac) in &sparse {
                let ka = t.wavevector(am);
                let kin: Vec<i64> = (0..3).map(|d| ko[d] - ka[d]).collect();
                if kin.iter().all(|&k| (-4..=3).contains(&k)) {
                    let src = (0..t.mode_count())
                        .find(|&m| t.wavevector(m) == kin.as_slice())
                        .unwrap();
                    acc += ac * u[src];
                }
            }
            slow[out] = acc;
        }
        let err: f64 = fast
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "product mismatch {err}");
    }
}
