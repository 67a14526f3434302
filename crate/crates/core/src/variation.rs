//! The normal L² gradient `E_m` of the energy: a closed form for `m = 1`
//! and a discrete-variation oracle for any `m`.
//!
//! Convention: `d/dε 𝔉_m(φ + ε V ν) = ∫ E_m V ds`, with `ν` the outward
//! normal of a counter-clockwise curve. For `m = 1`
//!
//! ```text
//! E₁ = −2 κ'' − κ³ − 2 K̄ κ + κ
//! ```

use serde::Serialize;

use crate::curve::{edge_length, jet_reach, window_jets, DiscreteCurve};
use crate::energy::{density_poly, energy, required_jet_order};
use crate::error::{Error, Result};
use crate::space::Point;

/// Coefficients `(c₁, c₂, c₃, c₄)` of `E₁ = c₁κ'' + c₂κ³ + c₃K̄κ + c₄κ`.
pub const E1_COEFFICIENTS: [f64; 4] = [-2.0, -1.0, -2.0, 1.0];

/// Per-vertex normal component of the L² gradient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientField {
    pub values: Vec<f64>,
}

impl GradientField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `(Σ w_i E_i²)^{1/2}`.
    pub fn weighted_l2(&self, weights: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(weights)
            .map(|(e, w)| w * e * e)
            .sum::<f64>()
            .sqrt()
    }
}

/// `E₁` evaluated from a curvature jet of order ≥ 2.
pub fn euler_lagrange_m1_from_jet(kappa: &[f64], kappa_ss: &[f64], curvature: f64) -> Vec<f64> {
    let [c1, c2, c3, c4] = E1_COEFFICIENTS;
    kappa
        .iter()
        .zip(kappa_ss)
        .map(|(&k, &kss)| c1 * kss + c2 * k * k * k + c3 * curvature * k + c4 * k)
        .collect()
}

pub fn euler_lagrange_m1(curve: &DiscreteCurve) -> Result<GradientField> {
    let jet = curve.curvature_jet(2)?;
    Ok(GradientField {
        values: euler_lagrange_m1_from_jet(jet.kappa(0), jet.kappa(2), curve.space().curvature()),
    })
}

/// Default probe size `10⁻⁴ · L / N`.
pub fn default_step(curve: &DiscreteCurve) -> f64 {
    1e-4 * curve.length() / curve.len() as f64
}

/// Energy contributions of the vertices within `reach` of the centre of a
/// window of `2·(2·reach) + 1` positions.
fn local_energy(curve: &DiscreteCurve, pts: &[Point], reach: usize, m: usize) -> f64 {
    let space = curve.space();
    let order = required_jet_order(m);
    let jet = window_jets(space, pts, order);
    let p = density_poly(m);
    let c = pts.len() / 2;
    let mut buf = Vec::with_capacity(order + 1);
    let mut acc = 0.0;
    for j in c - reach..=c + reach {
        let w = 0.5 * (edge_length(space, pts[j - 1], pts[j]) + edge_length(space, pts[j], pts[j + 1]));
        jet.values_at(j, &mut buf);
        acc += w * (1.0 + p.eval(&buf));
    }
    acc
}

/// Fourth-order central difference quotient of the energy under hat
/// variations of metric size `±h_fd, ±2h_fd` along the normal, divided by
/// the vertex weight.
///
/// Only the densities whose stencils touch the moved vertex are
/// recomputed, so the cost per vertex is independent of `N`.
pub fn discrete_gradient(curve: &DiscreteCurve, m: usize, h_fd: f64) -> Result<GradientField> {
    if !(h_fd > 0.0 && h_fd.is_finite()) {
        return Err(Error::InvalidParameter(format!("h_fd must be positive, got {h_fd}")));
    }
    let n = curve.len();
    let space = *curve.space();
    let frame = curve.curvature_jet(0)?;
    let weights = curve.induced_metric().weights;
    let verts = curve.vertices();
    let reach = jet_reach(required_jet_order(m)).max(1);
    let half = 2 * reach;
    let local = 2 * half < n;

    let mut values = Vec::with_capacity(n);
    let mut window: Vec<Point> = vec![[0.0; 2]; 2 * half + 1];
    let mut full = verts.to_vec();
    for i in 0..n {
        let nu = frame.normals[i];
        let moved = |t: f64| {
            let s = t * h_fd / frame.lambda[i];
            [verts[i][0] + s * nu[0], verts[i][1] + s * nu[1]]
        };
        space.check_chart(i, moved(2.0))?;
        space.check_chart(i, moved(-2.0))?;

        let mut probe = |t: f64| -> Result<f64> {
            if local {
                for (k, slot) in window.iter_mut().enumerate() {
                    *slot = verts[(i + n + k - half) % n];
                }
                window[half] = moved(t);
                Ok(local_energy(curve, &window, reach, m))
            } else {
                full[i] = moved(t);
                let e = energy(&DiscreteCurve::from_trusted(space, full.clone()), m);
                full[i] = verts[i];
                e
            }
        };
        let d1 = probe(1.0)? - probe(-1.0)?;
        let d2 = probe(2.0)? - probe(-2.0)?;
        let diff = (8.0 * d1 - d2) / 6.0;
        values.push(diff / (2.0 * h_fd * weights[i]));
    }
    Ok(GradientField { values })
}

/// Discrete gradient at `h` together with the relative weighted gap to the
/// same quotient at `2h`; a large gap flags truncation, a gap that grows as
/// `h` shrinks flags cancellation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckedGradient {
    pub field: GradientField,
    pub h_fd: f64,
    pub richardson_gap: f64,
}

pub fn discrete_gradient_checked(curve: &DiscreteCurve, m: usize, h_fd: f64) -> Result<CheckedGradient> {
    let a = discrete_gradient(curve, m, h_fd)?;
    let b = discrete_gradient(curve, m, 2.0 * h_fd)?;
    let w = curve.induced_metric().weights;
    let gap = GradientField {
        values: a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
    }
    .weighted_l2(&w);
    let scale = a.weighted_l2(&w);
    Ok(CheckedGradient {
        field: a,
        h_fd,
        richardson_gap: if scale > 0.0 { gap / scale } else { gap },
    })
}

/// Below this root-mean-square discrete gradient the comparison switches
/// from relative to absolute error.
pub const STATIONARY_RMS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub n: usize,
    /// `‖E_analytic − E_discrete‖ / ‖E_discrete‖`, or the absolute gap
    /// when `relative` is false.
    pub error: f64,
    pub relative: bool,
    pub analytic_norm: f64,
    pub discrete_norm: f64,
}

/// Weighted-L² comparison of [`euler_lagrange_m1`] and
/// [`discrete_gradient`] with the default probe size.
pub fn gradient_consistency(curve: &DiscreteCurve) -> Result<ConsistencyReport> {
    let ea = euler_lagrange_m1(curve)?;
    let ed = discrete_gradient(curve, 1, default_step(curve))?;
    let m = curve.induced_metric();
    let diff = GradientField {
        values: ea.values.iter().zip(&ed.values).map(|(a, d)| a - d).collect(),
    }
    .weighted_l2(&m.weights);
    let dn = ed.weighted_l2(&m.weights);
    let relative = dn / m.length.sqrt() > STATIONARY_RMS;
    Ok(ConsistencyReport {
        n: curve.len(),
        error: if relative { diff / dn } else { diff },
        relative,
        analytic_norm: ea.weighted_l2(&m.weights),
        discrete_norm: dn,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub levels: Vec<ConsistencyReport>,
    /// Least-squares order `p` in `error ∝ N^{-p}`.
    pub order: f64,
}

/// Runs [`gradient_consistency`] on the same continuum curve sampled at
/// each size in `sizes`.
pub fn gradient_consistency_ladder(
    build: impl Fn(usize) -> Result<DiscreteCurve>,
    sizes: &[usize],
) -> Result<LadderReport> {
    let levels = sizes
        .iter()
        .map(|&n| gradient_consistency(&build(n)?))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = levels.iter().map(|r| ((r.n as f64).ln(), r.error.ln())).collect();
    Ok(LadderReport {
        order: -crate::stats::slope(&pts),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial;
    use crate::space::SpaceForm;
    use std::f64::consts::PI;

    #[test]
    fn circle_fields_match_radial_reduction() {
        let s = SpaceForm::euclidean();
        let c = initial::circle(&s, 1.5, 256).unwrap();
        let want = (1.5f64 * 1.5 - 1.0) / 1.5f64.powi(3);
        let ea = euler_lagrange_m1(&c).unwrap();
        let ed = discrete_gradient(&c, 1, default_step(&c)).unwrap();
        for i in 0..256 {
            assert!((ea.values[i] - want).abs() < 1e-4, "{}", ea.values[i]);
            assert!((ed.values[i] - want).abs() < 1e-4, "{}", ed.values[i]);
        }
        assert!((want - 0.370_370_370).abs() < 1e-6);
    }

    #[test]
    fn unit_circle_is_stationary() {
        let c = initial::circle(&SpaceForm::euclidean(), 1.0, 256).unwrap();
        assert!(euler_lagrange_m1(&c).unwrap().max_abs() < 1e-3);
        for h in [1e-5, default_step(&c)] {
            assert!(discrete_gradient(&c, 1, h).unwrap().max_abs() <= 1e-3);
        }
        let r = gradient_consistency(&c).unwrap();
        assert!(!r.relative && r.error <= 1e-3);
    }

    #[test]
    fn m2_unit_circle_field() {
        let c = initial::circle(&SpaceForm::euclidean(), 1.0, 256).unwrap();
        let ed = discrete_gradient(&c, 2, default_step(&c)).unwrap();
        for v in &ed.values {
            assert!((v + 2.0).abs() < 1e-4, "{v}");
        }
    }

    #[test]
    fn great_circle_is_stationary() {
        let c = initial::circle(&SpaceForm::sphere(1.0), PI / 2.0, 128).unwrap();
        assert!(euler_lagrange_m1(&c).unwrap().max_abs() < 1e-5);
        let d = discrete_gradient(&c, 1, default_step(&c)).unwrap().max_abs();
        assert!(d < 1e-3, "{d}");
    }

    #[test]
    fn sphere_circle_closed_form() {
        let rho = 1.0f64;
        let c = initial::circle(&SpaceForm::sphere(1.0), rho, 256).unwrap();
        let want = -rho.cos() / rho.sin().powi(3);
        for v in euler_lagrange_m1(&c).unwrap().values {
            assert!((v - want).abs() < 1e-4, "{v} vs {want}");
        }
    }

    #[test]
    fn local_window_matches_full_evaluation() {
        let s = SpaceForm::hyperbolic(-1.0);
        let c = initial::perturbed_circle(&s, 0.8, 0.1, 4, 11, 32).unwrap();
        let h = default_step(&c);
        for m in 1..=2 {
            let local = discrete_gradient(&c, m, h).unwrap();
            let e0 = energy(&c, m).unwrap();
            let frame = c.curvature_jet(0).unwrap();
            let w = c.induced_metric().weights;
            for i in [0usize, 7, 31] {
                let probe = |sgn: f64| {
                    let mut v = c.vertices().to_vec();
                    let sc = sgn * h / frame.lambda[i];
                    v[i] = [v[i][0] + sc * frame.normals[i][0], v[i][1] + sc * frame.normals[i][1]];
                    energy(&DiscreteCurve::from_trusted(s, v), m).unwrap() - e0
                };
                let full = (probe(1.0) - probe(-1.0)) / (2.0 * h * w[i]);
                let tol = 1e-6 * (1.0 + full.abs());
                assert!(
                    (local.values[i] - full).abs() < tol,
                    "m={m} i={i}: {} vs {full}",
                    local.values[i]
                );
            }
        }
    }

    #[test]
    fn orientation_flips_field() {
        let c = initial::perturbed_circle(&SpaceForm::sphere(1.0), 1.0, 0.1, 5, 2, 128).unwrap();
        let r = c.reversed();
        let a = euler_lagrange_m1(&c).unwrap();
        let b = euler_lagrange_m1(&r).unwrap();
        let da = discrete_gradient(&c, 1, default_step(&c)).unwrap();
        let db = discrete_gradient(&r, 1, default_step(&r)).unwrap();
        for i in 0..128 {
            let j = (128 - i) % 128;
            assert!((a.values[i] + b.values[j]).abs() < 1e-9);
            assert!((da.values[i] + db.values[j]).abs() < 1e-6 * (1.0 + da.values[i].abs()));
        }
    }

    #[test]
    fn richardson_gap_is_small_at_default_step() {
        let c = initial::perturbed_circle(&SpaceForm::euclidean(), 1.0, 0.1, 5, 4, 128).unwrap();
        let r = discrete_gradient_checked(&c, 1, default_step(&c)).unwrap();
        assert!(r.richardson_gap < 1e-6, "{}", r.richardson_gap);
    }

    #[test]
    fn rejects_bad_step() {
        let c = initial::circle(&SpaceForm::euclidean(), 1.0, 32).unwrap();
        assert!(discrete_gradient(&c, 1, 0.0).is_err());
        let h = initial::circle(&SpaceForm::hyperbolic(-1.0), 3.0, 64).unwrap();
        assert!(matches!(
            discrete_gradient(&h, 1, 5.0),
            Err(Error::CurveLeavesChart { .. })
        ));
    }
}
