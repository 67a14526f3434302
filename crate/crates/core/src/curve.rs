//! Closed immersed polygons in a space-form chart: induced metric,
//! curvature jets and uniform-arclength resampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::space::{Point, SpaceForm};
use crate::spline::PeriodicSpline;

pub const MIN_VERTICES: usize = 16;
pub const DEFAULT_MAX_EDGE_RATIO: f64 = 10.0;
const MIN_LENGTH: f64 = 1e-6;

/// A closed polygon with vertices in the chart of `space`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve {
    space: SpaceForm,
    vertices: Vec<Point>,
}

/// Edge lengths `ℓ_i` (edge `i` joins vertex `i` to `i + 1`) and lumped
/// vertex weights `w_i = (ℓ_{i-1} + ℓ_i) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMetric {
    pub edge_lengths: Vec<f64>,
    pub weights: Vec<f64>,
    pub length: f64,
}

/// Geodesic curvature and its arclength derivatives at every vertex,
/// together with the frame data they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureJet {
    /// `orders[j][i]` is `κ⁽ʲ⁾` at vertex `i`.
    pub orders: Vec<Vec<f64>>,
    /// Euclidean unit normal of the chart polygon (the curve normal `ν`
    /// rescaled by `λ`).
    pub normals: Vec<Point>,
    pub lambda: Vec<f64>,
    /// Metric speed `ds/du` with respect to the vertex index.
    pub speed: Vec<f64>,
}

impl CurvatureJet {
    pub fn order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn kappa(&self, j: usize) -> &[f64] {
        &self.orders[j]
    }

    /// Copies `κ⁽⁰⁾..κ⁽ᴶ⁾` at vertex `i` into `out`.
    pub fn values_at(&self, i: usize, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.orders.iter().map(|o| o[i]));
    }
}

/// Jets on a non-periodic window of vertices; entries whose stencils run
/// off the window are NaN. This is the single kernel behind both the
/// periodic jets and the localized energy probes.
pub(crate) fn window_jets(space: &SpaceForm, pts: &[Point], order: usize) -> CurvatureJet {
    let n = pts.len();
    let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    let (xu, yu) = (fd::d1_window(&xs), fd::d1_window(&ys));
    let (xuu, yuu) = (fd::d2_window(&xs), fd::d2_window(&ys));

    let mut normals = vec![[f64::NAN; 2]; n];
    let mut lambda = vec![f64::NAN; n];
    let mut speed = vec![f64::NAN; n];
    let mut k0 = vec![f64::NAN; n];
    for i in fd::RADIUS..n.saturating_sub(fd::RADIUS) {
        let e = xu[i].hypot(yu[i]);
        let t = [xu[i] / e, yu[i] / e];
        let nrm = [t[1], -t[0]];
        let kappa_e = (xu[i] * yuu[i] - yu[i] * xuu[i]) / (e * e * e);
        let corr = space.correction_unchecked(pts[i], nrm);
        normals[i] = nrm;
        lambda[i] = corr.lambda;
        speed[i] = corr.lambda * e;
        k0[i] = corr.geodesic_curvature(kappa_e);
    }
    let mut orders = Vec::with_capacity(order + 1);
    orders.push(k0);
    for j in 0..order {
        let d = fd::d1_window(&orders[j]);
        let next: Vec<f64> = d.iter().zip(&speed).map(|(a, s)| a / s).collect();
        orders.push(next);
    }
    CurvatureJet {
        orders,
        normals,
        lambda,
        speed,
    }
}

/// Half-width of the vertex neighbourhood that `κ⁽ʲ⁾` at a vertex reads.
#[inline]
pub(crate) fn jet_reach(order: usize) -> usize {
    fd::RADIUS * (order + 1)
}

/// Edge length of the chart segment `a → b` by the conformal midpoint rule.
#[inline]
pub(crate) fn edge_length(space: &SpaceForm, a: Point, b: Point) -> f64 {
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    space.conformal_factor(mid) * (b[0] - a[0]).hypot(b[1] - a[1])
}

impl DiscreteCurve {
    /// Validated constructor with the default edge-ratio bound.
    pub fn new(space: SpaceForm, vertices: Vec<Point>) -> Result<Self> {
        Self::with_edge_ratio(space, vertices, DEFAULT_MAX_EDGE_RATIO)
    }

    pub fn with_edge_ratio(space: SpaceForm, vertices: Vec<Point>, max_edge_ratio: f64) -> Result<Self> {
        let c = DiscreteCurve { space, vertices };
        c.validate(max_edge_ratio)?;
        Ok(c)
    }

    /// Skips validation; used for probe curves that differ from a valid
    /// curve by a tiny displacement.
    pub(crate) fn from_trusted(space: SpaceForm, vertices: Vec<Point>) -> Self {
        DiscreteCurve { space, vertices }
    }

    pub fn validate(&self, max_edge_ratio: f64) -> Result<()> {
        let n = self.vertices.len();
        if n < MIN_VERTICES {
            return Err(Error::InvalidParameter(format!(
                "curve needs at least {MIN_VERTICES} vertices, got {n}"
            )));
        }
        for (i, &p) in self.vertices.iter().enumerate() {
            self.space.check_chart(i, p)?;
        }
        let m = self.induced_metric();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (i, &l) in m.edge_lengths.iter().enumerate() {
            if !(l > 0.0) {
                return Err(Error::Immersion(format!("degenerate edge {i}")));
            }
            lo = lo.min(l);
            hi = hi.max(l);
        }
        if hi / lo > max_edge_ratio {
            return Err(Error::Immersion(format!(
                "edge-length ratio {:.3} exceeds {max_edge_ratio}",
                hi / lo
            )));
        }
        Ok(())
    }

    pub fn space(&self) -> &SpaceForm {
        &self.space
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Same polygon traversed in the opposite direction, keeping vertex 0.
    pub fn reversed(&self) -> Self {
        let n = self.vertices.len();
        let vertices = (0..n).map(|i| self.vertices[(n - i) % n]).collect();
        DiscreteCurve {
            space: self.space,
            vertices,
        }
    }

    /// Cyclic relabelling: new vertex `i` is old vertex `i + shift`.
    pub fn rotated(&self, shift: usize) -> Self {
        let n = self.vertices.len();
        let vertices = (0..n).map(|i| self.vertices[(i + shift) % n]).collect();
        DiscreteCurve {
            space: self.space,
            vertices,
        }
    }

    pub fn induced_metric(&self) -> InducedMetric {
        let n = self.vertices.len();
        let edge_lengths: Vec<f64> = (0..n)
            .map(|i| edge_length(&self.space, self.vertices[i], self.vertices[(i + 1) % n]))
            .collect();
        let weights = (0..n)
            .map(|i| 0.5 * (edge_lengths[(i + n - 1) % n] + edge_lengths[i]))
            .collect();
        let length = edge_lengths.iter().sum();
        InducedMetric {
            edge_lengths,
            weights,
            length,
        }
    }

    pub fn length(&self) -> f64 {
        self.induced_metric().length
    }

    /// `κ⁽⁰⁾..κ⁽ᴶ⁾` by fourth-order periodic differences in arclength.
    pub fn curvature_jet(&self, order: usize) -> Result<CurvatureJet> {
        let n = self.vertices.len();
        if order > n / 4 {
            return Err(Error::InsufficientResolution {
                order,
                needed: 4 * order,
                have: n,
            });
        }
        let pad = jet_reach(order);
        let padded: Vec<Point> = (0..n + 2 * pad)
            .map(|k| self.vertices[(k as isize - pad as isize).rem_euclid(n as isize) as usize])
            .collect();
        let w = window_jets(&self.space, &padded, order);
        let cut = |v: Vec<f64>| v[pad..pad + n].to_vec();
        Ok(CurvatureJet {
            orders: w.orders.into_iter().map(cut).collect(),
            normals: w.normals[pad..pad + n].to_vec(),
            lambda: cut(w.lambda),
            speed: cut(w.speed),
        })
    }

    /// Metric length of the periodic cubic interpolant through the vertices
    /// (Gauss–Legendre per segment). Unlike [`DiscreteCurve::length`] this is
    /// fourth-order accurate, so it measures the geometric image rather than
    /// the polygon.
    pub fn spline_length(&self) -> f64 {
        let xs: Vec<f64> = self.vertices.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = self.vertices.iter().map(|p| p[1]).collect();
        let (sx, sy) = (PeriodicSpline::new(&xs), PeriodicSpline::new(&ys));
        (0..self.vertices.len())
            .map(|i| {
                gauss5(
                    |u| self.space.conformal_factor([sx.eval(u), sy.eval(u)]) * sx.deriv(u).hypot(sy.deriv(u)),
                    i as f64,
                    i as f64 + 1.0,
                )
            })
            .sum()
    }

    /// Resamples the periodic cubic interpolant at equal metric arclength,
    /// keeping vertex 0 fixed.
    pub fn reparametrize(&self) -> Result<Self> {
        let n = self.vertices.len();
        let xs: Vec<f64> = self.vertices.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = self.vertices.iter().map(|p| p[1]).collect();
        let sx = PeriodicSpline::new(&xs);
        let sy = PeriodicSpline::new(&ys);
        let speed = |u: f64| {
            let x = [sx.eval(u), sy.eval(u)];
            self.space.conformal_factor(x) * sx.deriv(u).hypot(sy.deriv(u))
        };
        let partial = |i: usize, t: f64| gauss5(speed, i as f64, i as f64 + t);

        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for i in 0..n {
            let s = cumulative[i] + partial(i, 1.0);
            cumulative.push(s);
        }
        let total = cumulative[n];
        if !(total >= MIN_LENGTH) {
            return Err(Error::DegenerateCurve(total));
        }

        let mut out = Vec::with_capacity(n);
        out.push(self.vertices[0]);
        let mut seg = 0usize;
        for k in 1..n {
            let target = total * k as f64 / n as f64;
            while seg + 1 < n && cumulative[seg + 1] <= target {
                seg += 1;
            }
            let goal = target - cumulative[seg];
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let seg_len = cumulative[seg + 1] - cumulative[seg];
            let mut t = (goal / seg_len).clamp(0.0, 1.0);
            for _ in 0..60 {
                let r = partial(seg, t) - goal;
                if r.abs() <= 1e-15 * total {
                    break;
                }
                if r > 0.0 {
                    hi = t;
                } else {
                    lo = t;
                }
                let step = t - r / speed(seg as f64 + t);
                t = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            }
            let u = seg as f64 + t;
            out.push([sx.eval(u), sy.eval(u)]);
        }
        for (i, &p) in out.iter().enumerate() {
            self.space.check_chart(i, p)?;
        }
        Ok(DiscreteCurve {
            space: self.space,
            vertices: out,
        })
    }

    /// Ratio of longest to shortest edge.
    pub fn edge_ratio(&self) -> f64 {
        let m = self.induced_metric();
        let hi = m.edge_lengths.iter().cloned().fold(0.0, f64::max);
        let lo = m.edge_lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

/// Five-point Gauss–Legendre rule on `[a, b]`.
pub(crate) fn gauss5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for k in 0..5 {
        acc += W[k] * f(c + h * X[k]);
    }
    acc * h
}

/// Wire form of a curve snapshot: `{"space": …, "vertices": [[x, y], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSnapshot {
    pub space: SpaceForm,
    pub vertices: Vec<Point>,
}

impl From<&DiscreteCurve> for CurveSnapshot {
    fn from(c: &DiscreteCurve) -> Self {
        CurveSnapshot {
            space: c.space,
            vertices: c.vertices.clone(),
        }
    }
}

impl CurveSnapshot {
    pub fn into_curve(self) -> Result<DiscreteCurve> {
        DiscreteCurve::new(self.space, self.vertices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial;
    use std::f64::consts::{PI, TAU};

    fn ngon(n: usize, r: f64) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    #[test]
    fn circle_perimeter_converges_at_second_order() {
        let err = |n| {
            (DiscreteCurve::new(SpaceForm::euclidean(), ngon(n, 1.0))
                .unwrap()
                .length()
                - TAU)
                .abs()
        };
        assert!(err(256) <= 1e-3);
        let r = err(128) / err(256);
        assert!((r - 4.0).abs() < 0.05, "ratio {r}");
    }

    #[test]
    fn hyperbolic_circle_length() {
        let s = SpaceForm::hyperbolic(-1.0);
        let c = DiscreteCurve::new(s, ngon(512, s.chart_radius(1.0))).unwrap();
        let want = TAU * 1f64.sinh();
        assert!((c.length() - want).abs() / want < 1e-4, "{}", c.length());
    }

    #[test]
    fn weights_sum_to_length() {
        let c = initial::ellipse(&SpaceForm::euclidean(), 2.0, 1.0, 100).unwrap();
        let m = c.induced_metric();
        let sw: f64 = m.weights.iter().sum();
        assert!((sw - m.length).abs() <= 1e-13 * m.length);
    }

    #[test]
    fn unit_circle_jet() {
        let c = DiscreteCurve::new(SpaceForm::euclidean(), ngon(256, 1.0)).unwrap();
        let j = c.curvature_jet(3).unwrap();
        for i in 0..256 {
            assert!((j.kappa(0)[i] - 1.0).abs() <= 1e-3);
            assert!(j.kappa(1)[i].abs() < 1e-9);
        }
    }

    #[test]
    fn great_circle_has_zero_jet() {
        let c = DiscreteCurve::new(SpaceForm::sphere(1.0), ngon(256, 1.0)).unwrap();
        let j = c.curvature_jet(4).unwrap();
        for o in &j.orders {
            let worst = o.iter().fold(0.0f64, |a, k| a.max(k.abs()));
            assert!(worst < 1e-5, "{worst}");
        }
    }

    #[test]
    fn hyperbolic_circle_jet() {
        let s = SpaceForm::hyperbolic(-1.0);
        let c = DiscreteCurve::new(s, ngon(256, s.chart_radius(1.0))).unwrap();
        let j = c.curvature_jet(2).unwrap();
        let want = 1.0 / 1f64.tanh();
        assert!(j.kappa(0).iter().all(|k| (k - want).abs() < 1e-6));
        assert!((want - 1.3130352854993312).abs() < 1e-12);
    }

    #[test]
    fn jet_order_limit() {
        let c = DiscreteCurve::new(SpaceForm::euclidean(), ngon(16, 1.0)).unwrap();
        assert!(c.curvature_jet(4).is_ok());
        assert!(matches!(c.curvature_jet(5), Err(Error::InsufficientResolution { .. })));
    }

    #[test]
    fn jet_is_rotation_equivariant() {
        let c = initial::ellipse(&SpaceForm::sphere(1.0), 0.8, 0.5, 64).unwrap();
        let a = c.curvature_jet(3).unwrap();
        let b = c.rotated(5).curvature_jet(3).unwrap();
        for j in 0..=3 {
            for i in 0..64 {
                assert_eq!(a.kappa(j)[(i + 5) % 64], b.kappa(j)[i]);
            }
        }
    }

    #[test]
    fn curvature_refinement_order() {
        // ellipse x = 2cos t, y = sin t, exact κ(t) = 2 / (4 sin² t + cos² t)^{3/2}
        let err = |n: usize| {
            let c = initial::ellipse(&SpaceForm::euclidean(), 2.0, 1.0, n).unwrap();
            let j = c.curvature_jet(0).unwrap();
            c.vertices()
                .iter()
                .zip(j.kappa(0))
                .map(|(p, k)| {
                    let t = p[1].atan2(p[0] / 2.0);
                    let exact = 2.0 / (4.0 * t.sin().powi(2) + t.cos().powi(2)).powf(1.5);
                    (k - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        assert!(err(64) / err(128) >= 2.0);
    }

    #[test]
    fn reparametrize_fixed_point_on_uniform_circle() {
        let c = DiscreteCurve::new(SpaceForm::euclidean(), ngon(128, 1.3)).unwrap();
        let r = c.reparametrize().unwrap();
        for (a, b) in c.vertices().iter().zip(r.vertices()) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn reparametrize_equalizes_clustered_circle() {
        let n = 128;
        let v: Vec<Point> = (0..n)
            .map(|i| {
                let s = TAU * i as f64 / n as f64;
                let t = s + 0.3 * s.sin();
                [t.cos(), t.sin()]
            })
            .collect();
        let c = DiscreteCurve::new(SpaceForm::euclidean(), v).unwrap();
        assert!(c.edge_ratio() > 1.5);
        let r = c.reparametrize().unwrap();
        assert!(r.edge_ratio() <= 1.0 + 1e-3, "{}", r.edge_ratio());
    }

    #[test]
    fn reparametrize_preserves_ellipse_length() {
        let c = initial::ellipse_raw(&SpaceForm::euclidean(), 2.0, 1.0, 256).unwrap();
        let r = c.reparametrize().unwrap();
        let (a, b) = (c.spline_length(), r.spline_length());
        assert!((a - b).abs() / a <= 1e-6, "{a} vs {b}");
        // exact perimeter of the 2:1 ellipse
        assert!((b - 9.688_448_220_547_675).abs() / b <= 1e-6);
    }

    #[test]
    fn reparametrize_rejects_tiny_curve() {
        let c = DiscreteCurve::from_trusted(SpaceForm::euclidean(), ngon(32, 1e-8));
        assert!(matches!(c.reparametrize(), Err(Error::DegenerateCurve(_))));
    }

    #[test]
    fn validation_errors() {
        assert!(DiscreteCurve::new(SpaceForm::euclidean(), ngon(8, 1.0)).is_err());
        let mut v = ngon(32, 1.0);
        v[3] = v[2];
        assert!(matches!(
            DiscreteCurve::new(SpaceForm::euclidean(), v),
            Err(Error::Immersion(_))
        ));
        let far = ngon(32, 0.999_9);
        assert!(matches!(
            DiscreteCurve::new(SpaceForm::hyperbolic(-1.0), far),
            Err(Error::CurveLeavesChart { .. })
        ));
        let _ = PI;
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let c = initial::ellipse(&SpaceForm::sphere(1.0), 0.7, 0.4, 40).unwrap();
        let text = serde_json::to_string(&CurveSnapshot::from(&c)).unwrap();
        let back: CurveSnapshot = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_curve().unwrap(), c);
    }
}
