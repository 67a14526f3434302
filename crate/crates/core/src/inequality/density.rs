//! Monotonicity of density ratios `μ(B_σ(ξ)) / (sin bσ)ⁿ` (and the weighted
//! version with a test function `h`), with ambient balls measured by hard
//! threshold of quadrature points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use super::field::{BandLimitedField, NodalField};
use super::{SuiteReport, DEFAULT_TOLERANCE};
use crate::curve::{gauss5, DiscreteCurve};
use crate::error::{Error, Result};
use crate::initial::{circle, perturbed_circle};
use crate::space::{Point, SpaceForm};
use crate::surface::{DiscreteSurface, Patch, SurfaceKind, V3};

/// Quadrature data of an immersed sample relative to a centre `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSample {
    /// Dimension `n` of the immersed manifold.
    pub dim: usize,
    pub weights: Vec<f64>,
    /// `|H⃗|` at each node.
    pub abs_mean: Vec<f64>,
    /// Ambient distance from `ξ` to each node.
    pub distance: Vec<f64>,
    /// Ambient `K̄` and `R̄`.
    pub ambient_curvature: f64,
    pub injectivity_radius: f64,
    /// Largest distance between neighbouring nodes.
    pub spacing: f64,
}

/// Smallest admissible `σ` in units of [`MeasureSample::spacing`]; below it
/// hard-threshold balls are dominated by single nodes.
pub const MIN_RESOLVED_RADIUS: f64 = 2.0;

impl MeasureSample {
    /// Full patch of a closed surface in flat 3-space.
    pub fn from_surface(s: &DiscreteSurface, xi: V3) -> Result<Self> {
        if !s.kind().is_closed() || s.patch() != Patch::Full {
            return Err(Error::InvalidParameter(
                "density checks need the full patch of a closed surface".into(),
            ));
        }
        let nodes = s.nodes();
        Ok(MeasureSample {
            dim: 2,
            weights: nodes.iter().map(|&k| s.area_weight(k)).collect(),
            abs_mean: nodes.iter().map(|&k| s.mean_curvature(k).abs()).collect(),
            distance: nodes
                .iter()
                .map(|&k| {
                    let p = s.position(k);
                    ((p[0] - xi[0]).powi(2) + (p[1] - xi[1]).powi(2) + (p[2] - xi[2]).powi(2)).sqrt()
                })
                .collect(),
            ambient_curvature: 0.0,
            injectivity_radius: f64::INFINITY,
            spacing: s.max_spacing(),
        })
    }

    /// Closed curve in its space form; distances are geodesic.
    pub fn from_curve(c: &DiscreteCurve, xi: Point) -> Result<Self> {
        let jet = c.curvature_jet(0)?;
        let space = c.space();
        Ok(MeasureSample {
            dim: 1,
            weights: c.induced_metric().weights,
            abs_mean: jet.kappa(0).iter().map(|k| k.abs()).collect(),
            distance: c.vertices().iter().map(|&x| space.distance(xi, x)).collect(),
            ambient_curvature: space.curvature(),
            injectivity_radius: space.injectivity_radius(),
            spacing: c.induced_metric().edge_lengths.iter().cloned().fold(0.0, f64::max),
        })
    }

    /// `μ(B_r(ξ))`: total weight of nodes at distance `< r`.
    pub fn ball(&self, r: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.distance)
            .filter(|(_, d)| **d < r)
            .map(|(w, _)| w)
            .sum()
    }

    /// `‖H⃗‖_{L^p(μ)}`.
    pub fn mean_curvature_norm(&self, p: f64) -> f64 {
        super::field::weighted_lp_norm(&self.abs_mean, &self.weights, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    /// Bound on `‖H⃗‖_p` used by the unweighted form.
    pub gamma: Option<f64>,
    pub holds: bool,
}

impl DensityReport {
    fn new(lhs: f64, rhs: f64, gamma: Option<f64>, tolerance: f64) -> Self {
        DensityReport {
            lhs,
            rhs,
            margin: rhs - lhs,
            gamma,
            holds: lhs <= rhs * (1.0 + tolerance),
        }
    }
}

/// `∫_a^b f` after the substitution `τ = eᵗ`, which resolves the
/// `τ^{−n−1}` growth at small radii.
fn log_integral(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    const PANELS: usize = 24;
    let (la, lb) = (a.ln(), b.ln());
    let h = (lb - la) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let t0 = la + i as f64 * h;
            gauss5(
                |t| {
                    let tau = t.exp();
                    f(tau) * tau
                },
                t0,
                t0 + h,
            )
        })
        .sum()
}

/// Denominator `(sin bτ)ⁿ` for real `b` or `τⁿ` for imaginary `b`.
fn radial_factor(b2: f64, n: usize, tau: f64) -> f64 {
    if b2 > 0.0 {
        (b2.sqrt() * tau).sin().powi(n as i32)
    } else {
        tau.powi(n as i32)
    }
}

fn check_radii(sample: &MeasureSample, sigma: f64, rho: f64, b2: f64) -> Result<()> {
    let k = sample.ambient_curvature;
    let in_range = b2.is_finite() && b2 != 0.0 && b2 <= 1.0 && b2 >= k;
    if !in_range {
        return Err(Error::InadmissibleB {
            b2,
            lower: k,
            upper: 1.0,
        });
    }
    let mut limit = sample.injectivity_radius;
    if b2 > 0.0 {
        limit = limit.min(PI / b2.sqrt());
    }
    if !(sigma > 0.0 && sigma <= rho && rho < limit) {
        return Err(Error::InvalidParameter(format!(
            "radii must satisfy 0 < σ ≤ ρ < {limit}, got σ = {sigma}, ρ = {rho}"
        )));
    }
    if sigma < MIN_RESOLVED_RADIUS * sample.spacing {
        return Err(Error::InvalidParameter(format!(
            "σ = {sigma} is below {MIN_RESOLVED_RADIUS} node spacings ({})",
            sample.spacing
        )));
    }
    Ok(())
}

/// Unweighted monotonicity with `Γ = ‖H⃗‖_{L^p(μ)}`:
///
/// real `b`: `[μ_σ/(sin bσ)ⁿ]^{1/p} ≤ [μ_ρ/(sin bρ)ⁿ]^{1/p} + (Γ/p)∫_σ^ρ (sin bτ)^{−n/p} dτ`;
/// imaginary `b`: `[μ_σ/σⁿ]^{1/p} ≤ [μ_ρ/ρⁿ]^{1/p} + Γ/(p−n) (ρ^{1−n/p} − σ^{1−n/p})`.
pub fn density_ratio_monotonicity(
    sample: &MeasureSample,
    sigma: f64,
    rho: f64,
    b2: f64,
    p: f64,
    tolerance: f64,
) -> Result<DensityReport> {
    check_radii(sample, sigma, rho, b2)?;
    let n = sample.dim;
    let nf = n as f64;
    if !(p > nf) {
        return Err(Error::InvalidParameter(format!("p must exceed n = {n}, got {p}")));
    }
    let gamma = sample.mean_curvature_norm(p);
    let ratio = |r: f64| (sample.ball(r) / radial_factor(b2, n, r)).powf(1.0 / p);
    let lhs = ratio(sigma);
    let tail = if b2 > 0.0 {
        gamma / p * log_integral(|t| radial_factor(b2, n, t).powf(-1.0 / p), sigma, rho)
    } else {
        let e = 1.0 - nf / p;
        gamma / (p - nf) * (rho.powf(e) - sigma.powf(e))
    };
    let rhs = if sigma == rho { lhs } else { ratio(rho) + tail };
    Ok(DensityReport::new(lhs, rhs, Some(gamma), tolerance))
}

/// Weighted monotonicity for `h ≥ 0` with `r = d(φ(x), ξ)`:
///
/// `∫_{B_σ} h / D(σ) ≤ ∫_{B_ρ} h / D(ρ) + ∫_σ^ρ τ⁻¹ D(τ)⁻¹ ∫_{B_τ} r(|∇h| + h|H⃗|) dτ`
/// with `D(τ) = (sin bτ)ⁿ` or `τⁿ`.
pub fn weighted_density_monotonicity(
    sample: &MeasureSample,
    h: &NodalField,
    sigma: f64,
    rho: f64,
    b2: f64,
    tolerance: f64,
) -> Result<DensityReport> {
    check_radii(sample, sigma, rho, b2)?;
    if h.values.len() != sample.weights.len() {
        return Err(Error::InvalidParameter("field and sample sizes differ".into()));
    }
    if h.values.iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidParameter("h must be non-negative".into()));
    }
    let n = sample.dim;
    let ball_h = |r: f64| -> f64 {
        (0..sample.weights.len())
            .filter(|&i| sample.distance[i] < r)
            .map(|i| h.values[i] * sample.weights[i])
            .sum()
    };
    let lhs = ball_h(sigma) / radial_factor(b2, n, sigma);
    if sigma == rho {
        return Ok(DensityReport::new(lhs, lhs, None, tolerance));
    }
    // ∫_σ^ρ f(τ) Σ_{d_i<τ} c_i dτ = Σ_{d_i<ρ} c_i ∫_{max(σ,d_i)}^ρ f
    let f = |t: f64| 1.0 / (t * radial_factor(b2, n, t));
    let mut tail = 0.0;
    let below_sigma = log_integral(f, sigma, rho);
    for i in 0..sample.weights.len() {
        let d = sample.distance[i];
        if d >= rho {
            continue;
        }
        let c = sample.weights[i] * d * (h.grad_norm[i] + h.values[i] * sample.abs_mean[i]);
        tail += c * if d <= sigma {
            below_sigma
        } else {
            log_integral(f, d, rho)
        };
    }
    let rhs = ball_h(rho) / radial_factor(b2, n, rho) + tail;
    Ok(DensityReport::new(lhs, rhs, None, tolerance))
}

/// Radius pairs of the curve families, scaled to the largest allowed radius.
const CURVE_RADII: [(f64, f64); 5] = [(0.2, 0.5), (0.1, 0.8), (0.3, 1.5), (0.08, 2.5), (0.5, 0.5)];
const SURFACE_RADII: [(f64, f64); 5] = [(0.3, 0.6), (0.4, 1.0), (0.5, 1.5), (0.6, 2.5), (0.5, 0.5)];
const SURFACE_GRID: usize = 128;

/// Documented sample families:
///
/// * unit sphere and `R = 2, r = 1` torus (128 × 128), `b = 10⁻³`, `p ∈ {3, 4}`,
///   four centres on the surface, five radius pairs with `σ ≥ 0.3`,
///   unweighted and with three random non-negative `h`;
/// * unit circle in the plane with `h ≡ 1` and random `h`, `b ∈ {10⁻³, 1}`;
/// * perturbed circles (amplitude 0.1) on the unit sphere with `b = 1` and
///   in the hyperbolic plane with `b² ∈ {−1, −0.5, 0.5}`, `p ∈ {2, 3}`.
pub fn density_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suite = SuiteReport::new("density".into());
    let tol = DEFAULT_TOLERANCE;

    for kind in [SurfaceKind::unit_sphere(), SurfaceKind::standard_torus()] {
        let s = DiscreteSurface::new(kind, Patch::Full, SURFACE_GRID, SURFACE_GRID)?;
        let nodes = s.nodes();
        let fields: Vec<NodalField> = (0..3)
            .map(|_| NodalField::on_surface(&s, &BandLimitedField::random_nonnegative(3, 6, 3, &mut rng)))
            .collect::<Result<_>>()?;
        for _ in 0..4 {
            let xi = s.position(nodes[rng.random_range(0..nodes.len())]);
            let sample = MeasureSample::from_surface(&s, xi)?;
            for &(sigma, rho) in &SURFACE_RADII {
                for p in [3.0, 4.0] {
                    let r = density_ratio_monotonicity(&sample, sigma, rho, 1e-6, p, tol)?;
                    suite.record(r.lhs, r.rhs, r.holds);
                }
                for h in &fields {
                    let r = weighted_density_monotonicity(&sample, h, sigma, rho, 1e-6, tol)?;
                    suite.record(r.lhs, r.rhs, r.holds);
                }
            }
        }
    }

    let mut curves: Vec<(DiscreteCurve, Vec<f64>)> = Vec::new();
    curves.push((circle(&SpaceForm::euclidean(), 1.0, 256)?, vec![1e-6, 1.0]));
    let s2 = SpaceForm::sphere(1.0);
    curves.push((perturbed_circle(&s2, 1.0, 0.1, 6, rng.random(), 256)?, vec![1.0]));
    let h2 = SpaceForm::hyperbolic(-1.0);
    curves.push((
        perturbed_circle(&h2, 1.0, 0.1, 6, rng.random(), 256)?,
        vec![-1.0, -0.5, 0.5],
    ));
    for (curve, b2s) in &curves {
        let n = curve.len();
        let mut fields = vec![NodalField::on_curve(curve, &BandLimitedField::constant(2, 1.0))?];
        for _ in 0..2 {
            fields.push(NodalField::on_curve(
                curve,
                &BandLimitedField::random_nonnegative(2, 4, 3, &mut rng),
            )?);
        }
        for _ in 0..3 {
            let xi = curve.vertices()[rng.random_range(0..n)];
            let sample = MeasureSample::from_curve(curve, xi)?;
            for &b2 in b2s {
                let mut limit = sample.injectivity_radius;
                if b2 > 0.0 {
                    limit = limit.min(PI / b2.sqrt());
                }
                let scale = limit.min(2.5) / 2.5 * 0.99;
                for &(s, r) in &CURVE_RADII {
                    let (sigma, rho) = (s * scale, r * scale);
                    for p in [2.0, 3.0] {
                        let rep = density_ratio_monotonicity(&sample, sigma, rho, b2, p, tol)?;
                        suite.record(rep.lhs, rep.rhs, rep.holds);
                    }
                    for h in &fields {
                        let rep = weighted_density_monotonicity(&sample, h, sigma, rho, b2, tol)?;
                        suite.record(rep.lhs, rep.rhs, rep.holds);
                    }
                }
            }
        }
    }
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_example_has_positive_margin() {
        let s = DiscreteSurface::new(SurfaceKind::unit_sphere(), Patch::Full, 64, 64).unwrap();
        let xi = s.position(s.nodes()[64 * 20 + 10]);
        let sample = MeasureSample::from_surface(&s, xi).unwrap();
        let r = density_ratio_monotonicity(&sample, 0.2, 0.5, 1e-6, 3.0, 0.0).unwrap();
        let gamma = 2.0 * (4.0 * PI).powf(1.0 / 3.0);
        assert!((r.gamma.unwrap() - gamma).abs() / gamma < 1e-3);
        assert!(r.holds && r.margin > 0.3 * r.lhs, "{r:?}");
    }

    #[test]
    fn equal_radii_are_an_identity() {
        let c = circle(&SpaceForm::euclidean(), 1.0, 128).unwrap();
        let sample = MeasureSample::from_curve(&c, c.vertices()[0]).unwrap();
        let r = density_ratio_monotonicity(&sample, 0.4, 0.4, 1e-6, 2.0, 0.0).unwrap();
        assert_eq!(r.lhs, r.rhs);
        let h = NodalField::on_curve(&c, &BandLimitedField::constant(2, 1.0)).unwrap();
        let w = weighted_density_monotonicity(&sample, &h, 0.4, 0.4, 1e-6, 0.0).unwrap();
        assert_eq!(w.lhs, w.rhs);
    }

    #[test]
    fn unit_circle_weighted_constant() {
        let c = circle(&SpaceForm::euclidean(), 1.0, 256).unwrap();
        let sample = MeasureSample::from_curve(&c, c.vertices()[0]).unwrap();
        let h = NodalField::on_curve(&c, &BandLimitedField::constant(2, 1.0)).unwrap();
        for (sigma, rho) in [(0.1, 0.5), (0.2, 1.9), (0.05, 1.0)] {
            let r = weighted_density_monotonicity(&sample, &h, sigma, rho, 1e-6, 0.0).unwrap();
            assert!(r.holds, "{sigma} {rho} {r:?}");
        }
    }

    #[test]
    fn log_integral_accuracy() {
        let v = log_integral(|t| t.powi(-3), 0.05, 2.5);
        let exact = 0.5 * (0.05f64.powi(-2) - 2.5f64.powi(-2));
        assert!((v - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn rejects_bad_radii_and_exponents() {
        let c = circle(&SpaceForm::sphere(1.0), 1.0, 128).unwrap();
        let sample = MeasureSample::from_curve(&c, c.vertices()[0]).unwrap();
        assert!(density_ratio_monotonicity(&sample, 0.5, 0.2, 1.0, 2.0, 0.0).is_err());
        assert!(density_ratio_monotonicity(&sample, 0.2, 3.5, 1.0, 2.0, 0.0).is_err());
        assert!(density_ratio_monotonicity(&sample, 0.2, 0.5, 1.0, 1.0, 0.0).is_err());
        // unresolved ball: 128 vertices on a circle of length ≈ 2π sin 1
        assert!(density_ratio_monotonicity(&sample, 0.05, 0.5, 1.0, 2.0, 0.0).is_err());
        // b² below K̄ = 1
        assert!(matches!(
            density_ratio_monotonicity(&sample, 0.2, 0.5, 0.5, 2.0, 0.0),
            Err(Error::InadmissibleB { .. })
        ));
    }

    #[test]
    fn suite_has_no_violations() {
        let r = density_suite(3).unwrap();
        assert!(r.samples > 500);
        assert_eq!(r.violations, 0, "{r:?}");
    }
}
