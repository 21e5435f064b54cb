//! Geodesic-flow time averages of the damping coefficient.
//!
//! The quantities of interest are the symmetric averages
//! `⟨a⟩_T(ρ) = (1/2T)∫_{-T}^{T} a(flow_t ρ) dt` over the unit cosphere
//! bundle, and the asymptotic bounds `A₊ = inf_T sup_ρ ⟨a⟩_T`,
//! `A₋ = sup_T inf_ρ ⟨a⟩_T`. Along a doubling T-ladder the exact
//! identity `⟨a⟩_{2T}(ρ) = (⟨a⟩_T(flow_{-T}ρ) + ⟨a⟩_T(flow_T ρ))/2`
//! makes the sup-sequence nonincreasing and the inf-sequence
//! nondecreasing, so `A±` are read off the largest rung.
//!
//! Flows are exact: straight lines at speed 2 on the torus, great-circle
//! rotations on the sphere. Quadrature is Gauss-Legendre with a node
//! count scaled to the fastest oscillation of `a` along an orbit, so the
//! averages are accurate to near machine precision and the ladder
//! diagnostics are not polluted by integration error.
//!
//! Sampling on the torus must include the rational directions: frozen
//! coordinates (`ξ_d = 0`) carry the orbits that attain `A±` for
//! separable damping, and random directions miss that measure-zero set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{DampingField, ModelGeometry};
use crate::util::derive_seed;

/// A point of the unit cosphere bundle of a model geometry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PhasePoint {
    /// Torus point with a unit covector.
    Torus { x: Vec<f64>, xi: Vec<f64> },
    /// Sphere point `q ∈ S³ ⊂ R⁴` with a unit tangent `v ⊥ q`.
    Sphere { q: [f64; 4], v: [f64; 4] },
}

/// Advances a phase point by time `t` under the Hamilton flow of the
/// principal symbol (speed 2): `x + 2tξ` on the torus, the great circle
/// `(q cos 2t + v sin 2t, -q sin 2t + v cos 2t)` on the sphere.
pub fn geodesic_flow(point: &PhasePoint, t: f64) -> PhasePoint {
    match point {
        PhasePoint::Torus { x, xi } => {
            let two_pi = 2.0 * PI;
            let moved = x
                .iter()
                .zip(xi)
                .map(|(&xd, &xid)| (xd + 2.0 * t * xid).rem_euclid(two_pi))
                .collect();
            PhasePoint::Torus {
                x: moved,
                xi: xi.clone(),
            }
        }
        PhasePoint::Sphere { q, v } => {
            let (s, c) = (2.0 * t).sin_cos();
            let mut qn = [0.0; 4];
            let mut vn = [0.0; 4];
            for i in 0..4 {
                qn[i] = q[i] * c + v[i] * s;
                vn[i] = -q[i] * s + v[i] * c;
            }
            PhasePoint::Sphere { q: qn, v: vn }
        }
    }
}

/// Damping value at the base point of a phase point.
fn eval_at(a: &DampingField, point: &PhasePoint) -> Result<f64> {
    match point {
        PhasePoint::Torus { x, .. } => a.eval_torus(x),
        PhasePoint::Sphere { q, .. } => {
            let theta = q[0].clamp(-1.0, 1.0).acos();
            a.eval_theta(theta)
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration from the Chebyshev initial guess; exact for
/// polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (pnm1 - x * pn) / (1.0 - x * x);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Fastest angular frequency of `t ↦ a(flow_t ρ)` over unit covectors.
fn max_orbit_frequency(a: &DampingField) -> f64 {
    match a.geometry().as_ref() {
        // Each mode contributes frequency 2|k·ξ| ≤ 2|k|₂ ≤ 2√dim·band.
        ModelGeometry::Torus(t) => 2.0 * (a.band() as f64) * (t.dim() as f64).sqrt(),
        // cos θ(t) oscillates at frequency 2; U_k doubles it k+1 times.
        ModelGeometry::SphereZonal(_) => 2.0 * (a.band() as f64 + 1.0),
    }
}

/// Node count resolving `cycles` full oscillations with spectral margin.
fn auto_node_count(a: &DampingField, t_half: f64) -> usize {
    let cycles = max_orbit_frequency(a) * t_half / PI;
    (6.0 * cycles).ceil() as usize + 64
}

fn average_with_nodes(
    a: &DampingField,
    point: &PhasePoint,
    t_half: f64,
    nodes: &[f64],
    weights: &[f64],
) -> Result<f64> {
    // (1/2T)∫_{-T}^{T} maps to (1/2)∫_{-1}^{1} under t = T·s.
    let mut acc = 0.0;
    for (&s, &w) in nodes.iter().zip(weights) {
        acc += w * eval_at(a, &geodesic_flow(point, t_half * s))?;
    }
    Ok(0.5 * acc)
}

/// Symmetric time average `⟨a⟩_T` at a phase point.
///
/// `quad_points` overrides the automatic oscillation-scaled node count.
pub fn time_average(
    a: &DampingField,
    point: &PhasePoint,
    t_half: f64,
    quad_points: Option<usize>,
) -> Result<f64> {
    if t_half <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "averaging half-time must be positive, got {t_half}"
        )));
    }
    let n = quad_points.unwrap_or_else(|| auto_node_count(a, t_half));
    let (nodes, weights) = gauss_legendre(n);
    average_with_nodes(a, point, t_half, &nodes, &weights)
}

/// Closed-form torus average: each damping mode `c_k e^{ik·x}` averages
/// to `c_k e^{ik·x}·sinc(2(k·ξ)T)` along `x + 2tξ`.
pub fn torus_average_oracle(a: &DampingField, x: &[f64], xi: &[f64], t_half: f64) -> Result<f64> {
    let torus = a.geometry().as_torus()?;
    if x.len() != torus.dim() || xi.len() != torus.dim() {
        return Err(Error::ShapeMismatch(format!(
            "point/covector must have {} coordinates",
            torus.dim()
        )));
    }
    let mut acc = 0.0;
    for (mode, &c) in a.coeffs().iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let k = torus.wavevector(mode);
        let phase: f64 = k.iter().zip(x).map(|(&kd, &xd)| kd as f64 * xd).sum();
        let omega: f64 = k.iter().zip(xi).map(|(&kd, &xid)| kd as f64 * xid).sum();
        acc += (c * crate::C64::new(phase.cos(), phase.sin())).re * sinc(2.0 * omega * t_half);
    }
    Ok(acc)
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Sampling plan and ladder for the `A±` estimator.
#[derive(Clone, Debug)]
pub struct FlowAverageOptions {
    /// Averaging half-times, strictly increasing.
    pub t_ladder: Vec<f64>,
    /// Torus: include all rational directions `k/|k|` with `|k|_∞` up to
    /// this height (frozen-coordinate orbits live here).
    pub rational_height: i64,
    /// Extra pseudorandom unit covectors (torus) or phase points (sphere).
    pub quasi_directions: usize,
    /// Base points per axis; 4 is the 16-grid decimated by 4 and keeps
    /// the extremal points of each cosine.
    pub base_per_axis: usize,
    pub seed: u64,
    /// Allowed ladder-monotonicity slack from quadrature roundoff.
    pub monotonicity_tol: f64,
    /// Overrides the oscillation-scaled quadrature node count.
    pub quad_points: Option<usize>,
}

impl Default for FlowAverageOptions {
    fn default() -> Self {
        FlowAverageOptions {
            t_ladder: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            rational_height: 3,
            quasi_directions: 256,
            base_per_axis: 4,
            seed: 0,
            monotonicity_tol: 1e-6,
            quad_points: None,
        }
    }
}

/// Ladder of sup/inf averages with the asymptotic bounds read off the
/// final rung.
#[derive(Clone, Debug, Serialize)]
pub struct FlowAverageReport {
    pub t_ladder: Vec<f64>,
    pub sup_ladder: Vec<f64>,
    pub inf_ladder: Vec<f64>,
    pub a_plus: f64,
    pub a_minus: f64,
    /// `|sup(T_last) - sup(T_prev)|`; convergence diagnostic, not a gate.
    pub cauchy_gap_sup: f64,
    pub cauchy_gap_inf: f64,
    pub sample_count: usize,
    /// Phase points of the sampling plan, aligned with `last_rung_values`.
    pub samples: Vec<PhasePoint>,
    /// Per-sample `⟨a⟩_T` at the final rung.
    pub last_rung_values: Vec<f64>,
    /// Indices into `samples` attaining the final sup and inf.
    pub sup_witness: usize,
    pub inf_witness: usize,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Primitive integer directions up to sign with `|k|_∞ ≤ height`,
/// normalised to unit covectors. Deterministic order.
fn rational_directions(dim: usize, height: i64) -> Vec<Vec<f64>> {
    let mut set: BTreeSet<Vec<i64>> = BTreeSet::new();
    let span = (2 * height + 1) as usize;
    let total = span.pow(dim as u32);
    for flat in 0..total {
        let mut k = vec![0i64; dim];
        let mut rem = flat;
        for kd in k.iter_mut() {
            *kd = (rem % span) as i64 - height;
            rem /= span;
        }
        let g = k.iter().fold(0, |acc, &kd| gcd(acc, kd));
        if g == 0 {
            continue;
        }
        let mut prim: Vec<i64> = k.iter().map(|&kd| kd / g).collect();
        // ⟨a⟩_T is even in ξ (symmetric interval), so fold sign.
        if let Some(&first) = prim.iter().find(|&&c| c != 0) {
            if first < 0 {
                for c in prim.iter_mut() {
                    *c = -*c;
                }
            }
        }
        set.insert(prim);
    }
    set.into_iter()
        .map(|k| {
            let norm = (k.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt();
            k.into_iter().map(|c| c as f64 / norm).collect()
        })
        .collect()
}

fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

fn torus_samples(dim: usize, opts: &FlowAverageOptions) -> Vec<PhasePoint> {
    let mut directions = rational_directions(dim, opts.rational_height);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 0x51));
    for _ in 0..opts.quasi_directions {
        directions.push(random_unit_vector(&mut rng, dim));
    }

    let per = opts.base_per_axis;
    let total = per.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut x = vec![0.0; dim];
        let mut rem = flat;
        for xd in x.iter_mut() {
            *xd = 2.0 * PI * (rem % per) as f64 / per as f64;
            rem /= per;
        }
        points.push(x);
    }

    let mut samples = Vec::with_capacity(directions.len() * points.len());
    for xi in &directions {
        for x in &points {
            samples.push(PhasePoint::Torus {
                x: x.clone(),
                xi: xi.clone(),
            });
        }
    }
    samples
}

fn sphere_samples(opts: &FlowAverageOptions) -> Vec<PhasePoint> {
    let ntheta = 4 * opts.base_per_axis.max(1);
    let mut samples = Vec::new();
    for j in 0..ntheta {
        let theta = PI * (j as f64 + 0.5) / ntheta as f64;
        let q = [theta.cos(), theta.sin(), 0.0, 0.0];
        let v_mer = [-theta.sin(), theta.cos(), 0.0, 0.0];
        let v_par = [0.0, 0.0, 1.0, 0.0];
        // Tangent fan between the meridian (θ moves fastest) and the
        // parallel (θ oscillates least); the orbit of θ only depends on
        // this plane for zonal damping.
        for l in 0..8 {
            let psi = PI * l as f64 / 8.0;
            let (s, c) = psi.sin_cos();
            let mut v = [0.0; 4];
            for i in 0..4 {
                v[i] = c * v_mer[i] + s * v_par[i];
            }
            samples.push(PhasePoint::Sphere { q, v });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 0x52));
    for _ in 0..opts.quasi_directions {
        let q4 = random_unit_vector(&mut rng, 4);
        let q = [q4[0], q4[1], q4[2], q4[3]];
        // Random tangent: project a Gaussian vector orthogonal to q.
        let v = loop {
            let w4 = random_unit_vector(&mut rng, 4);
            let dot: f64 = (0..4).map(|i| w4[i] * q[i]).sum();
            let mut v = [0.0; 4];
            let mut norm2 = 0.0;
            for i in 0..4 {
                v[i] = w4[i] - dot * q[i];
                norm2 += v[i] * v[i];
            }
            if norm2.sqrt() > 1e-6 {
                let n = norm2.sqrt();
                for vi in v.iter_mut() {
                    *vi /= n;
                }
                break v;
            }
        };
        samples.push(PhasePoint::Sphere { q, v });
    }
    samples
}

/// Estimates `A₊ = inf_T sup ⟨a⟩_T` and `A₋ = sup_T inf ⟨a⟩_T` over a
/// deterministic sampling plan and a doubling T-ladder.
///
/// Fails with `SamplingInsufficiency` when the measured ladder violates
/// the monotonicity that holds for the exact sup/inf, or when a sample
/// average escapes `[inf a, sup a]` (a quadrature failure).
pub fn estimate_a_bounds(a: &DampingField, opts: &FlowAverageOptions) -> Result<FlowAverageReport> {
    if opts.t_ladder.is_empty() {
        return Err(Error::InvalidParameter("empty T-ladder".into()));
    }
    if opts
        .t_ladder
        .windows(2)
        .any(|w| !(w[1] > w[0]) || w[0] <= 0.0)
        || opts.t_ladder[0] <= 0.0
    {
        return Err(Error::InvalidParameter(
            "T-ladder must be positive and strictly increasing".into(),
        ));
    }
    if opts.rational_height < 1 {
        return Err(Error::InvalidParameter(
            "rational direction height must be at least 1".into(),
        ));
    }
    if opts.base_per_axis == 0 {
        return Err(Error::InvalidParameter(
            "base grid needs at least one point per axis".into(),
        ));
    }

    let samples = match a.geometry().as_ref() {
        ModelGeometry::Torus(t) => torus_samples(t.dim(), opts),
        ModelGeometry::SphereZonal(_) => sphere_samples(opts),
    };

    let mut sup_ladder = Vec::with_capacity(opts.t_ladder.len());
    let mut inf_ladder = Vec::with_capacity(opts.t_ladder.len());
    let mut last_values: Vec<f64> = Vec::new();
    for &t_half in &opts.t_ladder {
        let n = opts.quad_points.unwrap_or_else(|| auto_node_count(a, t_half));
        let (nodes, weights) = gauss_legendre(n);
        let values: Vec<f64> = samples
            .par_iter()
            .map(|p| average_with_nodes(a, p, t_half, &nodes, &weights))
            .collect::<Result<_>>()?;
        let sup = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let inf = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if sup > a.sup() + opts.monotonicity_tol || inf < a.inf() - opts.monotonicity_tol {
            return Err(Error::SamplingInsufficiency(format!(
                "average escaped [inf a, sup a] at T = {t_half}: sup {sup:.9}, inf {inf:.9}"
            )));
        }
        sup_ladder.push(sup);
        inf_ladder.push(inf);
        last_values = values;
    }

    for w in sup_ladder.windows(2) {
        if w[1] > w[0] + opts.monotonicity_tol {
            return Err(Error::SamplingInsufficiency(format!(
                "sup ladder increased by {:.3e}; refine the sampling plan",
                w[1] - w[0]
            )));
        }
    }
    for w in inf_ladder.windows(2) {
        if w[1] < w[0] - opts.monotonicity_tol {
            return Err(Error::SamplingInsufficiency(format!(
                "inf ladder decreased by {:.3e}; refine the sampling plan",
                w[0] - w[1]
            )));
        }
    }

    let a_plus = *sup_ladder.last().unwrap();
    let a_minus = *inf_ladder.last().unwrap();
    let sup_witness = last_values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let inf_witness = last_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let rungs = sup_ladder.len();
    let (gap_sup, gap_inf) = if rungs >= 2 {
        (
            (sup_ladder[rungs - 1] - sup_ladder[rungs - 2]).abs(),
            (inf_ladder[rungs - 1] - inf_ladder[rungs - 2]).abs(),
        )
    } else {
        (0.0, 0.0)
    };

    Ok(FlowAverageReport {
        t_ladder: opts.t_ladder.clone(),
        sup_ladder,
        inf_ladder,
        a_plus,
        a_minus,
        cauchy_gap_sup: gap_sup,
        cauchy_gap_inf: gap_inf,
        sample_count: samples.len(),
        samples,
        last_rung_values: last_values,
        sup_witness,
        inf_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn torus3() -> Arc<ModelGeometry> {
        Arc::new(ModelGeometry::torus(3, 8).unwrap())
    }

    fn cheap_opts() -> FlowAverageOptions {
        FlowAverageOptions {
            t_ladder: vec![4.0, 8.0],
            rational_height: 1,
            quasi_directions: 8,
            base_per_axis: 4,
            seed: 7,
            ..FlowAverageOptions::default()
        }
    }

    #[test]
    fn gauss_legendre_matches_known_rules() {
        let (x2, w2) = gauss_legendre(2);
        let r = 1.0 / 3.0f64.sqrt();
        assert!((x2[0] + r).abs() < 1e-14 && (x2[1] - r).abs() < 1e-14);
        assert!((w2[0] - 1.0).abs() < 1e-14 && (w2[1] - 1.0).abs() < 1e-14);

        for n in [1, 5, 20, 63, 200] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-12, "weight sum at n={n}");
            if 2 * n - 1 >= 8 {
                let m8: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(8)).sum();
                assert!((m8 - 2.0 / 9.0).abs() < 1e-12, "x^8 moment at n={n}");
            }
        }
    }

    #[test]
    fn flow_composition_is_exact() {
        let p = PhasePoint::Sphere {
            q: [1.0, 0.0, 0.0, 0.0],
            v: [0.0, 0.6, 0.8, 0.0],
        };
        let direct = geodesic_flow(&p, 0.7 + 1.9);
        let composed = geodesic_flow(&geodesic_flow(&p, 0.7), 1.9);
        match (&direct, &composed) {
            (PhasePoint::Sphere { q: q1, v: v1 }, PhasePoint::Sphere { q: q2, v: v2 }) => {
                for i in 0..4 {
                    assert!((q1[i] - q2[i]).abs() < 1e-12);
                    assert!((v1[i] - v2[i]).abs() < 1e-12);
                }
            }
            _ => unreachable!(),
        }

        let pt = PhasePoint::Torus {
            x: vec![0.3, 1.1, 5.9],
            xi: vec![0.6, 0.0, 0.8],
        };
        let d = geodesic_flow(&pt, 2.6);
        let c = geodesic_flow(&geodesic_flow(&pt, 2.0), 0.6);
        match (&d, &c) {
            (PhasePoint::Torus { x: x1, .. }, PhasePoint::Torus { x: x2, .. }) => {
                for (a, b) in x1.iter().zip(x2) {
                    let diff = (a - b).abs();
                    assert!(diff < 1e-12 || (diff - 2.0 * PI).abs() < 1e-12);
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn sphere_flow_preserves_orthonormality() {
        let p = PhasePoint::Sphere {
            q: [0.5, 0.5, 0.5, 0.5],
            v: [-0.5, 0.5, -0.5, 0.5],
        };
        for t in [0.1, 1.0, 17.3] {
            if let PhasePoint::Sphere { q, v } = geodesic_flow(&p, t) {
                let nq: f64 = q.iter().map(|c| c * c).sum();
                let nv: f64 = v.iter().map(|c| c * c).sum();
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                assert!((nq - 1.0).abs() < 1e-12);
                assert!((nv - 1.0).abs() < 1e-12);
                assert!(dot.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn torus_average_matches_sinc_oracle() {
        let geom = torus3();
        let a = DampingField::cosine_sum(&geom, 1.0, &[(0, 1.0), (2, 0.25)]).unwrap();
        let x = vec![0.4, 2.0, 5.0];
        for xi in [vec![1.0, 0.0, 0.0], vec![0.6, 0.0, 0.8], vec![0.0, 1.0, 0.0]] {
            for t in [0.5, 4.0, 16.0] {
                let p = PhasePoint::Torus {
                    x: x.clone(),
                    xi: xi.clone(),
                };
                let num = time_average(&a, &p, t, None).unwrap();
                let exact = torus_average_oracle(&a, &x, &xi, t).unwrap();
                assert!(
                    (num - exact).abs() < 1e-12,
                    "xi={xi:?} T={t}: {num} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn sphere_meridian_average_matches_closed_form() {
        let geom = Arc::new(ModelGeometry::sphere_zonal(8, None).unwrap());
        let a = DampingField::zonal_cosine(&geom, 1.0, 0.5).unwrap();
        // Meridian orbit: θ(t) = θ₀ + 2t, so ⟨cos θ⟩_T = cos θ₀ · sinc 2T.
        let theta0 = 0.9f64;
        let p = PhasePoint::Sphere {
            q: [theta0.cos(), theta0.sin(), 0.0, 0.0],
            v: [-theta0.sin(), theta0.cos(), 0.0, 0.0],
        };
        for t in [1.0, 8.0, 32.0] {
            let num = time_average(&a, &p, t, None).unwrap();
            let exact = 1.0 + 0.5 * theta0.cos() * sinc(2.0 * t);
            assert!((num - exact).abs() < 1e-12, "T={t}: {num} vs {exact}");
        }
    }

    #[test]
    fn constant_damping_gives_flat_ladder() {
        let geom = torus3();
        let a = DampingField::constant(&geom, 2.5).unwrap();
        let report = estimate_a_bounds(&a, &cheap_opts()).unwrap();
        for (&s, &i) in report.sup_ladder.iter().zip(&report.inf_ladder) {
            assert!((s - 2.5).abs() < 1e-12);
            assert!((i - 2.5).abs() < 1e-12);
        }
        assert!((report.a_plus - 2.5).abs() < 1e-12);
        assert!((report.a_minus - 2.5).abs() < 1e-12);
    }

    #[test]
    fn separable_damping_attains_frozen_orbit_bounds() {
        let geom = torus3();
        // Frozen direction e₂ keeps x₁ fixed: A₊ = 2 and A₋ = 0 are
        // attained exactly at every rung at base points with cos x₁ = ±1.
        let a = DampingField::cosine_sum(&geom, 1.0, &[(0, 1.0)]).unwrap();
        let report = estimate_a_bounds(&a, &cheap_opts()).unwrap();
        assert!((report.a_plus - 2.0).abs() < 1e-9, "A+ {}", report.a_plus);
        assert!(report.a_minus.abs() < 1e-9, "A- {}", report.a_minus);
        assert!(report.a_plus <= a.sup() + 1e-6);
        assert!(report.a_minus >= a.inf() - 1e-6);
    }

    #[test]
    fn ladders_are_monotone_for_three_cosine_damping() {
        let geom = torus3();
        let a = DampingField::cosine_sum(&geom, 3.0, &[(0, 1.0), (1, 1.0), (2, 1.0)]).unwrap();
        let opts = FlowAverageOptions {
            t_ladder: vec![4.0, 8.0, 16.0],
            ..cheap_opts()
        };
        let report = estimate_a_bounds(&a, &opts).unwrap();
        for w in report.sup_ladder.windows(2) {
            assert!(w[1] <= w[0] + 1e-6);
        }
        for w in report.inf_ladder.windows(2) {
            assert!(w[1] >= w[0] - 1e-6);
        }
        // Strict gap from the pointwise bounds: at most two coordinates
        // freeze on the unit cosphere.
        assert!(report.a_plus < 6.0 - 0.5);
        assert!(report.a_minus > 0.0 + 0.5);
        // Last-rung sup matches the frozen-orbit closed form.
        let expect = 5.0 + sinc(2.0 * opts.t_ladder.last().unwrap()).abs();
        assert!(
            (report.a_plus - expect).abs() < 1e-9,
            "A+ {} vs {expect}",
            report.a_plus
        );
    }

    #[test]
    fn sphere_bounds_contract_toward_equator_value() {
        let geom = Arc::new(ModelGeometry::sphere_zonal(8, None).unwrap());
        let a = DampingField::zonal_cosine(&geom, 1.0, 0.5).unwrap();
        let opts = FlowAverageOptions {
            t_ladder: vec![4.0, 8.0, 16.0],
            quasi_directions: 32,
            seed: 11,
            ..FlowAverageOptions::default()
        };
        let report = estimate_a_bounds(&a, &opts).unwrap();
        // Every great circle sweeps cos θ through R cos(2t - φ), so the
        // averages contract toward a(π/2) = 1 inside the sinc envelope.
        let t_last = *opts.t_ladder.last().unwrap();
        let envelope = 0.5 / (2.0 * t_last) + 1e-9;
        assert!((report.a_plus - 1.0).abs() <= envelope, "A+ {}", report.a_plus);
        assert!((report.a_minus - 1.0).abs() <= envelope, "A- {}", report.a_minus);
        assert!(report.a_plus >= 1.0 && report.a_minus <= 1.0);
    }

    #[test]
    fn rational_directions_are_primitive_and_unit() {
        let dirs = rational_directions(3, 3);
        // Height 3 in dimension 3: 171 sign-classes minus 26 collapsed
        // non-primitive vectors.
        assert_eq!(dirs.len(), 145);
        for d in &dirs {
            let norm: f64 = d.iter().map(|c| c * c).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        // Axis directions present.
        assert!(dirs.iter().any(|d| (d[0] - 1.0).abs() < 1e-15));
    }

    #[test]
    fn invalid_ladders_are_rejected() {
        let geom = torus3();
        let a = DampingField::constant(&geom, 1.0).unwrap();
        let bad = FlowAverageOptions {
            t_ladder: vec![8.0, 4.0],
            ..cheap_opts()
        };
        assert!(estimate_a_bounds(&a, &bad).is_err());
        let empty = FlowAverageOptions {
            t_ladder: vec![],
            ..cheap_opts()
        };
        assert!(estimate_a_bounds(&a, &empty).is_err());
    }
}
