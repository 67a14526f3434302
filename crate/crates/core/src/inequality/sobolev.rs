//! Michael–Simon type Sobolev inequality
//! `(∫ h^{n/(n−1)})^{(n−1)/n} ≤ C(n) ∫ (|∇h| + h|H|)` on closed surfaces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use super::field::{BandLimitedField, NodalField};
use super::{SuiteReport, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::surface::{DiscreteSurface, Patch, SurfaceKind};

/// Volume of the unit ball in `ℝⁿ`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// `c(n, α) = ½π · 2ⁿ α⁻¹ (1−α)^{−1/n} · n/(n−1) · ω_n^{−1/n}`.
pub fn sobolev_constant_alpha(n: usize, alpha: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "the Sobolev constant has a 1/(n−1) factor and is undefined for n = {n}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let nf = n as f64;
    Ok(0.5
        * PI
        * 2f64.powi(n as i32)
        * (1.0 / alpha)
        * (1.0 - alpha).powf(-1.0 / nf)
        * (nf / (nf - 1.0))
        * unit_ball_volume(n).powf(-1.0 / nf))
}

/// `C(n) = c(n, n/(n+1))`; `C(2) = 6√(3π)`.
pub fn sobolev_constant(n: usize) -> Result<f64> {
    sobolev_constant_alpha(n, n as f64 / (n as f64 + 1.0))
}

/// Left side of the support-volume condition
/// `b² (1−α)^{−2/n} (|supp h| / ω_n)^{2/n} ≤ 1`. It is vacuous (0) for
/// imaginary `b`.
pub fn support_condition(n: usize, b2: f64, support_volume: f64) -> f64 {
    if b2 <= 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let alpha = nf / (nf + 1.0);
    b2 * (1.0 - alpha).powf(-2.0 / nf) * (support_volume / unit_ball_volume(n)).powf(2.0 / nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MichaelSimonReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub support_condition: f64,
    pub holds: bool,
}

/// Evaluates both sides for `h` on the full patch of a closed surface.
/// `holds` allows a relative slack of `tolerance` on the right side.
pub fn verify_michael_simon(
    surface: &DiscreteSurface,
    h: &BandLimitedField,
    b2: f64,
    tolerance: f64,
) -> Result<MichaelSimonReport> {
    if !surface.kind().is_closed() || surface.patch() != Patch::Full {
        return Err(Error::InvalidParameter(
            "the Sobolev check needs the full patch of a closed surface".into(),
        ));
    }
    if !(b2 > 0.0 && b2 <= 1.0) {
        return Err(Error::InadmissibleB {
            b2,
            lower: 0.0,
            upper: 1.0,
        });
    }
    let nodes = surface.nodes();
    let field = NodalField::on_surface(surface, h)?;
    if let Some(v) = field.values.iter().find(|v| **v < 0.0) {
        return Err(Error::InvalidParameter(format!("h must be non-negative, found {v}")));
    }
    let weights: Vec<f64> = nodes.iter().map(|&k| surface.area_weight(k)).collect();
    let support: f64 = weights
        .iter()
        .zip(&field.values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(w, _)| w)
        .sum();
    let cond = support_condition(2, b2, support);
    if cond > 1.0 {
        return Err(Error::SupportVolume(format!(
            "b²-weighted support measure {cond} exceeds 1"
        )));
    }
    let constant = sobolev_constant(2)?;
    let mut l2 = 0.0;
    let mut rhs = 0.0;
    for (i, &k) in nodes.iter().enumerate() {
        let v = field.values[i];
        l2 += v * v * weights[i];
        rhs += (field.grad_norm[i] + v * surface.mean_curvature(k).abs()) * weights[i];
    }
    let lhs = l2.sqrt();
    let rhs = constant * rhs;
    Ok(MichaelSimonReport {
        lhs,
        rhs,
        constant,
        support_condition: cond,
        holds: lhs <= rhs * (1.0 + tolerance),
    })
}

/// `count` random non-negative band-limited `h` on the full `grid × grid`
/// patch of `kind`, with `b = 10⁻³`.
pub fn michael_simon_suite(kind: SurfaceKind, grid: usize, count: usize, seed: u64) -> Result<SuiteReport> {
    let surface = DiscreteSurface::new(kind, Patch::Full, grid, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suite = SuiteReport::new(format!("michael_simon/{}", kind_name(&kind)));
    for _ in 0..count {
        let h = BandLimitedField::random_nonnegative(3, 6, 3, &mut rng);
        let r = verify_michael_simon(&surface, &h, 1e-6, DEFAULT_TOLERANCE)?;
        suite.record(r.lhs, r.rhs, r.holds);
    }
    Ok(suite)
}

pub(crate) fn kind_name(kind: &SurfaceKind) -> &'static str {
    match kind {
        SurfaceKind::Plane => "plane",
        SurfaceKind::Sphere { .. } => "sphere",
        SurfaceKind::Ellipsoid { .. } => "ellipsoid",
        SurfaceKind::Torus { .. } => "torus",
    }
}
