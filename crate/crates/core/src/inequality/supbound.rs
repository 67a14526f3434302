//! Empirical ratio `max|u| / (‖∇u‖_p + ‖u‖_p)` for `p > n`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::field::{weighted_lp_norm, BandLimitedField, NodalField};
use super::interp::LadderReport;
use crate::error::{Error, Result};
use crate::initial::perturbed_circle;
use crate::space::SpaceForm;
use crate::surface::{DiscreteSurface, Patch, SurfaceKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupBoundReport {
    pub max_abs: f64,
    pub grad_norm: f64,
    pub norm: f64,
    /// `None` when `u ≡ 0`.
    pub ratio: Option<f64>,
}

/// Evaluates the ratio from nodal values, gradient norms and weights of an
/// `n`-dimensional sample.
pub fn sup_bound_check(field: &NodalField, weights: &[f64], dim: usize, p: f64) -> Result<SupBoundReport> {
    if !(p > dim as f64) {
        return Err(Error::InvalidParameter(format!("p must exceed n = {dim}, got {p}")));
    }
    if field.values.len() != weights.len() {
        return Err(Error::InvalidParameter("field and weight sizes differ".into()));
    }
    let max_abs = field.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let grad_norm = weighted_lp_norm(&field.grad_norm, weights, p);
    let norm = weighted_lp_norm(&field.values, weights, p);
    let denom = grad_norm + norm;
    Ok(SupBoundReport {
        max_abs,
        grad_norm,
        norm,
        ratio: (denom > 0.0).then(|| max_abs / denom),
    })
}

fn sup_ratio(reports: impl Iterator<Item = Result<SupBoundReport>>) -> Result<f64> {
    let mut sup = 0.0f64;
    for r in reports {
        if let Some(v) = r?.ratio {
            sup = sup.max(v);
        }
    }
    Ok(sup)
}

/// 50 random signed band-limited `u` on a perturbed circle in `space`,
/// `p = 2`, at `N ∈ sizes`.
pub fn curve_sup_ladder(space: SpaceForm, sizes: &[usize], count: usize, seed: u64) -> Result<LadderReport> {
    let mut sups = Vec::new();
    for &n in sizes {
        let c = perturbed_circle(&space, 1.0, 0.1, 6, seed, n)?;
        let w = c.induced_metric().weights;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields: Vec<BandLimitedField> = (0..count)
            .map(|_| BandLimitedField::random_signed(2, 5, 4, &mut rng))
            .collect();
        sups.push(sup_ratio(fields.iter().map(|f| {
            NodalField::on_curve(&c, f).and_then(|nf| sup_bound_check(&nf, &w, 1, 2.0))
        }))?);
    }
    Ok(LadderReport::new(
        format!("supbound/curve/{:?}", space.kind()).to_lowercase(),
        sizes.to_vec(),
        sups,
    ))
}

/// Random signed `u` on the full patch of `kind`, `p = 3`, at `grid ∈ sizes`.
pub fn surface_sup_ladder(kind: SurfaceKind, sizes: &[usize], count: usize, seed: u64) -> Result<LadderReport> {
    let mut sups = Vec::new();
    for &n in sizes {
        let s = DiscreteSurface::new(kind, Patch::Full, n, n)?;
        let w: Vec<f64> = s.nodes().into_iter().map(|k| s.area_weight(k)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields: Vec<BandLimitedField> = (0..count)
            .map(|_| BandLimitedField::random_signed(3, 5, 3, &mut rng))
            .collect();
        sups.push(sup_ratio(fields.iter().map(|f| {
            NodalField::on_surface(&s, f).and_then(|nf| sup_bound_check(&nf, &w, 2, 3.0))
        }))?);
    }
    Ok(LadderReport::new(
        format!("supbound/surface/{}", super::sobolev::kind_name(&kind)),
        sizes.to_vec(),
        sups,
    ))
}

/// Curve ladders in all three spaces and surface ladders on sphere and torus.
pub fn sup_bound_suite(seed: u64) -> Result<Vec<LadderReport>> {
    let mut out = Vec::new();
    for space in [
        SpaceForm::euclidean(),
        SpaceForm::sphere(1.0),
        SpaceForm::hyperbolic(-1.0),
    ] {
        out.push(curve_sup_ladder(space, &[128, 256, 512], 50, seed)?);
    }
    for kind in [SurfaceKind::unit_sphere(), SurfaceKind::standard_torus()] {
        out.push(surface_sup_ladder(kind, &[32, 64, 128], 10, seed)?);
    }
    Ok(out)
}
