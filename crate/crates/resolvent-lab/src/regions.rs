//! Spectral regions where uniform resolvent bounds are asserted.
//!
//! Three region families appear:
//!
//! * the parabolic exterior `R_δ = {λ : (Im λ)² ≥ 4δ²(Re λ + δ²)}`, the
//!   λ-plane home of the uniform Laplace estimate;
//! * the half-plane `Ξ_δ = {z : Im z ≥ δ}` in the square-root variable,
//!   with the exact identity `z ∈ Ξ_δ ⇒ z² ∈ R_δ`;
//! * the damped-wave region: two horizontal bands beyond the damping
//!   range plus a vertical strip with a finite exclusion set `V` of disks
//!   around eigenvalues.
//!
//! Scans walk deterministic, evenly spaced points along named boundary
//! segments; membership flags are recorded per point so a scan never
//! silently probes outside its region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Closed disk in the τ-plane, used for eigenvalue exclusion sets.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Disk {
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: C64, radius: f64) -> Self {
        Self {
            center_re: center.re,
            center_im: center.im,
            radius,
        }
    }

    pub fn contains(&self, point: C64) -> bool {
        let d = C64::new(point.re - self.center_re, point.im - self.center_im);
        d.norm() <= self.radius
    }
}

/// Region selector for scans and membership checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum RegionSpec {
    /// `R_δ` in the spectral parameter λ.
    ParabolicExterior { delta: f64 },
    /// `Ξ_δ` in the square-root parameter z (λ = z²).
    HalfPlane { delta: f64 },
    /// Damped-wave region in τ: bands beyond the damping range at
    /// `|Re τ| ≥ l`, plus the strip `|Re τ| ≤ l` minus the disks.
    DampedBands {
        delta: f64,
        l: f64,
        a_plus: f64,
        a_minus: f64,
        excluded: Vec<Disk>,
    },
}

impl RegionSpec {
    pub fn contains(&self, point: C64) -> bool {
        match self {
            Self::ParabolicExterior { delta } => in_parabolic_exterior(point, *delta),
            Self::HalfPlane { delta } => in_half_plane(point, *delta),
            Self::DampedBands {
                delta,
                l,
                a_plus,
                a_minus,
                excluded,
            } => in_damped_region(point, *delta, *l, *a_plus, *a_minus, excluded),
        }
    }
}

/// Membership in `R_δ = {(Im λ)² ≥ 4δ²(Re λ + δ²)}`.
pub fn in_parabolic_exterior(lambda: C64, delta: f64) -> bool {
    lambda.im * lambda.im >= 4.0 * delta * delta * (lambda.re + delta * delta)
}

/// Membership in the half-plane `Im z ≥ δ`.
pub fn in_half_plane(z: C64, delta: f64) -> bool {
    z.im >= delta
}

/// The square-root substitution `λ = z²`.
pub fn z_to_lambda(z: C64) -> C64 {
    z * z
}

/// Membership in the damped-wave region.
pub fn in_damped_region(
    tau: C64,
    delta: f64,
    l: f64,
    a_plus: f64,
    a_minus: f64,
    excluded: &[Disk],
) -> bool {
    let upper = tau.im >= a_plus + delta && tau.re.abs() >= l;
    let lower = tau.im <= a_minus - delta && tau.re.abs() >= l;
    let strip = tau.re.abs() <= l && !excluded.iter().any(|d| d.contains(tau));
    upper || lower || strip
}

/// Admissible Lebesgue range `[2n/(n+2), 2(n+1)/(n+3)]` for the uniform
/// estimate in dimension `n ≥ 3`.
pub fn admissible_p_range(n: usize) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "admissible exponents need dimension at least 3, got {n}"
        )));
    }
    let nf = n as f64;
    Ok((2.0 * nf / (nf + 2.0), 2.0 * (nf + 1.0) / (nf + 3.0)))
}

/// Homogeneity exponent `σ(p) = 2n(1/p - 1/2) - 2` of the resolvent bound
/// `‖R(λ)‖_{p→p'} ≈ |λ|^{σ/2}`; zero exactly at the endpoint `p = 2n/(n+2)`.
pub fn scaling_exponent(p: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "scaling exponent needs dimension at least 3, got {n}"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Lebesgue exponent must be at least 1, got {p}"
        )));
    }
    let nf = n as f64;
    Ok(2.0 * nf * (1.0 / p - 0.5) - 2.0)
}

/// Deterministic, inclusive, evenly spaced points along a named boundary
/// segment of a region.
///
/// Segments: `crucial-line` (half-plane boundary `Im z = δ`), `parabola`
/// (image of the crucial line under `z ↦ z²`), `upper-band` / `lower-band`
/// (damped band edges `Im τ = A± ± δ`), `compact` (mid-strip horizontal
/// line `Im τ = (A₊ + A₋)/2`).
pub fn boundary_scan(
    region: &RegionSpec,
    segment: &str,
    count: usize,
    range: (f64, f64),
) -> Result<Vec<C64>> {
    if count < 2 {
        return Err(Error::InvalidParameter(format!(
            "a scan needs at least 2 points, got {count}"
        )));
    }
    if !(range.1 > range.0) {
        return Err(Error::InvalidParameter(format!(
            "empty scan range [{}, {}]",
            range.0, range.1
        )));
    }
    let xs = linspace(range.0, range.1, count);
    match (region, segment) {
        (RegionSpec::HalfPlane { delta }, "crucial-line") => {
            Ok(xs.into_iter().map(|x| C64::new(x, *delta)).collect())
        }
        (RegionSpec::ParabolicExterior { delta }, "parabola") => Ok(xs
            .into_iter()
            .map(|x| z_to_lambda(C64::new(x, *delta)))
            .collect()),
        (
            RegionSpec::DampedBands {
                delta,
                a_plus,
                a_minus,
                ..
            },
            seg,
        ) => {
            let im = match seg {
                "upper-band" => a_plus + delta,
                "lower-band" => a_minus - delta,
                "compact" => (a_plus + a_minus) / 2.0,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown damped segment '{other}'"
                    )))
                }
            };
            Ok(xs.into_iter().map(|x| C64::new(x, im)).collect())
        }
        (_, other) => Err(Error::InvalidParameter(format!(
            "segment '{other}' does not belong to this region"
        ))),
    }
}

/// Inclusive evenly spaced grid.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    let step = (b - a) / (count - 1) as f64;
    (0..count).map(|i| a + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parabolic_membership_examples() {
        // Real λ beyond -δ² always fails; large imaginary part passes.
        assert!(!in_parabolic_exterior(C64::new(4.0, 0.0), 0.5));
        assert!(in_parabolic_exterior(C64::new(4.0, 3.0), 0.5));
        assert!(in_parabolic_exterior(C64::new(-1.0, 0.0), 0.5));
    }

    #[test]
    fn damped_membership_examples() {
        let delta = 0.5;
        let l = 6.0;
        let (ap, am) = (5.0, 1.0);
        let none: Vec<Disk> = Vec::new();
        assert!(in_damped_region(C64::new(8.0, 6.0), delta, l, ap, am, &none));
        assert!(in_damped_region(C64::new(-8.0, 0.4), delta, l, ap, am, &none));
        assert!(in_damped_region(C64::new(1.0, 3.0), delta, l, ap, am, &none));
        // Between the bands at large |Re τ|: excluded.
        assert!(!in_damped_region(
            C64::new(2.0 * l, ap + delta / 2.0),
            delta,
            l,
            ap,
            am,
            &none
        ));
        // Inside an exclusion disk within the strip: excluded.
        let v = vec![Disk::new(C64::new(1.0, 3.0), 0.25)];
        assert!(!in_damped_region(C64::new(1.1, 3.0), delta, l, ap, am, &v));
    }

    #[test]
    fn admissible_range_in_three_dimensions() {
        let (lo, hi) = admissible_p_range(3).unwrap();
        assert!((lo - 1.2).abs() < 1e-15);
        assert!((hi - 4.0 / 3.0).abs() < 1e-15);
        assert!(admissible_p_range(2).is_err());
    }

    #[test]
    fn scaling_exponent_endpoint_values() {
        assert_eq!(scaling_exponent(6.0 / 5.0, 3).unwrap(), 0.0);
        assert!((scaling_exponent(4.0 / 3.0, 3).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn crucial_line_scan_is_even_and_inclusive() {
        let region = RegionSpec::HalfPlane { delta: 0.5 };
        let pts = boundary_scan(&region, "crucial-line", 5, (2.0, 30.0)).unwrap();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], C64::new(2.0, 0.5));
        assert_eq!(pts[4], C64::new(30.0, 0.5));
        let gap0 = pts[1].re - pts[0].re;
        for w in pts.windows(2) {
            assert!(((w[1].re - w[0].re) - gap0).abs() < 1e-12);
            assert_eq!(w[0].im, 0.5);
        }
    }

    #[test]
    fn parabola_scan_lies_on_the_region_boundary() {
        let delta = 0.7;
        let region = RegionSpec::ParabolicExterior { delta };
        for lam in boundary_scan(&region, "parabola", 33, (0.5, 20.0)).unwrap() {
            let lhs = lam.im * lam.im;
            let rhs = 4.0 * delta * delta * (lam.re + delta * delta);
            assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn unknown_segment_is_rejected() {
        let region = RegionSpec::HalfPlane { delta: 0.5 };
        assert!(boundary_scan(&region, "equator", 4, (0.0, 1.0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        /// z ∈ Ξ_δ implies z² ∈ R_δ; an exact algebraic identity
        /// (y² ≥ δ² ⇔ 4x²y² ≥ 4δ²(x² - y² + δ²) + 4δ²y² rearranged).
        #[test]
        fn half_plane_maps_into_parabolic_exterior(
            x in -50.0f64..50.0,
            dy in 1e-9f64..10.0,
            delta in 0.05f64..3.0,
        ) {
            let z = C64::new(x, delta + dy);
            prop_assert!(in_half_plane(z, delta));
            prop_assert!(in_parabolic_exterior(z_to_lambda(z), delta));
        }

        /// Membership of the damped region is symmetric under the spectral
        /// reflection τ ↦ -conj(τ) when the exclusion set is too.
        #[test]
        fn damped_region_respects_reflection(
            re in -20.0f64..20.0,
            im in -10.0f64..10.0,
            delta in 0.05f64..1.0,
            l in 1.0f64..8.0,
        ) {
            let (ap, am) = (5.0, 1.0);
            let tau = C64::new(re, im);
            let refl = C64::new(-re, im);
            let none: Vec<Disk> = Vec::new();
            prop_assert_eq!(
                in_damped_region(tau, delta, l, ap, am, &none),
                in_damped_region(refl, delta, l, ap, am, &none)
            );
        }
    }
}
