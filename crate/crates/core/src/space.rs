//! The three two-dimensional space forms, each realized in one conformal
//! chart: the flat plane, the stereographic chart of the round sphere and
//! the Poincaré disk of the hyperbolic plane.
//!
//! For curvature `K != 0` the chart metric is `λ(x)² |dx|²` with
//! `λ(x) = 2 / (1 + K |x|²)`; the plane uses `λ ≡ 1`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Euclidean,
    Sphere,
    Hyperbolic,
}

/// Limits of the admissible chart region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartMargin {
    /// Largest admissible `√K |x|` on the stereographic chart.
    pub sphere_max_radius: f64,
    /// Required gap `1 - √|K| |x|` to the boundary of the Poincaré disk.
    pub hyperbolic_boundary_gap: f64,
}

impl Default for ChartMargin {
    fn default() -> Self {
        ChartMargin {
            sphere_max_radius: 20.0,
            hyperbolic_boundary_gap: 1e-3,
        }
    }
}

/// A constant-curvature model surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceForm {
    kind: SpaceKind,
    curvature: f64,
    margin: ChartMargin,
}

/// Value of the conformal factor and its normal log-derivative at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalCorrection {
    pub lambda: f64,
    pub dn_log_lambda: f64,
}

impl ConformalCorrection {
    /// Geodesic curvature from the Euclidean chart curvature.
    ///
    /// Sign convention: `kappa_euclidean` and the normal `n` satisfy
    /// `dT/ds = -κ n`, so a counter-clockwise circle with outward normal
    /// has positive curvature. Under that convention
    /// `κ_g = (κ_e + ∂_n log λ) / λ`.
    #[inline]
    pub fn geodesic_curvature(&self, kappa_euclidean: f64) -> f64 {
        (kappa_euclidean + self.dn_log_lambda) / self.lambda
    }
}

/// Admissible values of `b²` (`K̄ ≤ b² ≤ 1`, `b² ≠ 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BInterval {
    pub lower: f64,
    pub upper: f64,
    /// `false` only for the flat case, where `b²` may approach but not reach 0.
    pub lower_closed: bool,
}

impl BInterval {
    pub fn contains(&self, b2: f64) -> bool {
        if b2 == 0.0 || !b2.is_finite() || b2 > self.upper {
            return false;
        }
        if self.lower_closed {
            b2 >= self.lower
        } else {
            b2 > self.lower
        }
    }

    /// Whether the lower endpoint corresponds to an imaginary `b`.
    pub fn lower_is_imaginary(&self) -> bool {
        self.lower < 0.0
    }

    /// Whether the upper endpoint corresponds to a real `b`.
    pub fn upper_is_real(&self) -> bool {
        self.upper > 0.0
    }
}

impl SpaceForm {
    pub fn new(kind: SpaceKind, curvature: f64) -> Result<Self> {
        if !curvature.is_finite() {
            return Err(Error::InvalidSpace("curvature must be finite".into()));
        }
        match kind {
            SpaceKind::Euclidean if curvature != 0.0 => Err(Error::InvalidSpace(format!(
                "euclidean space has curvature 0, got {curvature}"
            ))),
            SpaceKind::Sphere if curvature <= 0.0 => Err(Error::InvalidSpace(format!(
                "sphere needs positive curvature, got {curvature}"
            ))),
            SpaceKind::Sphere if curvature > 1.0 => Err(Error::InvalidSpace(format!(
                "curvature {curvature} > 1: K̄ ≤ 1 required so that an admissible b exists"
            ))),
            SpaceKind::Hyperbolic if curvature >= 0.0 => Err(Error::InvalidSpace(format!(
                "hyperbolic plane needs negative curvature, got {curvature}"
            ))),
            _ => Ok(SpaceForm {
                kind,
                curvature,
                margin: ChartMargin::default(),
            }),
        }
    }

    pub fn euclidean() -> Self {
        SpaceForm {
            kind: SpaceKind::Euclidean,
            curvature: 0.0,
            margin: ChartMargin::default(),
        }
    }

    /// Sphere of curvature `k` (panics unless `0 < k ≤ 1`).
    pub fn sphere(k: f64) -> Self {
        Self::new(SpaceKind::Sphere, k).expect("invalid sphere curvature")
    }

    /// Hyperbolic plane of curvature `k` (panics unless `k < 0`).
    pub fn hyperbolic(k: f64) -> Self {
        Self::new(SpaceKind::Hyperbolic, k).expect("invalid hyperbolic curvature")
    }

    pub fn with_margin(mut self, margin: ChartMargin) -> Self {
        self.margin = margin;
        self
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn margin(&self) -> ChartMargin {
        self.margin
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            SpaceKind::Sphere => PI / self.curvature.sqrt(),
            _ => f64::INFINITY,
        }
    }

    #[inline]
    pub fn conformal_factor(&self, x: Point) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => 1.0,
            _ => 2.0 / (1.0 + self.curvature * (x[0] * x[0] + x[1] * x[1])),
        }
    }

    /// Euclidean gradient of `log λ`.
    #[inline]
    pub fn grad_log_factor(&self, x: Point) -> Point {
        match self.kind {
            SpaceKind::Euclidean => [0.0, 0.0],
            _ => {
                let s = -2.0 * self.curvature / (1.0 + self.curvature * (x[0] * x[0] + x[1] * x[1]));
                [s * x[0], s * x[1]]
            }
        }
    }

    /// Whether `x` lies in the admissible part of the chart.
    pub fn in_chart(&self, x: Point) -> bool {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if !r.is_finite() {
            return false;
        }
        match self.kind {
            SpaceKind::Euclidean => true,
            SpaceKind::Sphere => self.curvature.sqrt() * r <= self.margin.sphere_max_radius,
            SpaceKind::Hyperbolic => (-self.curvature).sqrt() * r < 1.0 - self.margin.hyperbolic_boundary_gap,
        }
    }

    pub fn check_chart(&self, index: usize, x: Point) -> Result<()> {
        if self.in_chart(x) {
            Ok(())
        } else {
            Err(Error::CurveLeavesChart {
                index,
                radius: (x[0] * x[0] + x[1] * x[1]).sqrt(),
            })
        }
    }

    /// `λ` and `∂_n log λ` at `x` along the Euclidean unit vector `normal`.
    pub fn geodesic_curvature_correction(&self, x: Point, normal: Point) -> Result<ConformalCorrection> {
        self.check_chart(0, x)?;
        Ok(self.correction_unchecked(x, normal))
    }

    #[inline]
    pub(crate) fn correction_unchecked(&self, x: Point, normal: Point) -> ConformalCorrection {
        let g = self.grad_log_factor(x);
        ConformalCorrection {
            lambda: self.conformal_factor(x),
            dn_log_lambda: g[0] * normal[0] + g[1] * normal[1],
        }
    }

    /// Closed-form geodesic distance between two chart points.
    pub fn distance(&self, x: Point, y: Point) -> f64 {
        let dx = x[0] - y[0];
        let dy = x[1] - y[1];
        let d2 = dx * dx + dy * dy;
        let nx = x[0] * x[0] + x[1] * x[1];
        let ny = y[0] * y[0] + y[1] * y[1];
        match self.kind {
            SpaceKind::Euclidean => d2.sqrt(),
            SpaceKind::Sphere => {
                let k = self.curvature;
                let s = (k * d2 / ((1.0 + k * nx) * (1.0 + k * ny))).sqrt();
                2.0 / k.sqrt() * s.min(1.0).asin()
            }
            SpaceKind::Hyperbolic => {
                let k = -self.curvature;
                let arg = 1.0 + 2.0 * k * d2 / ((1.0 - k * nx) * (1.0 - k * ny));
                arg.max(1.0).acosh() / k.sqrt()
            }
        }
    }

    /// Chart radius of the geodesic circle of intrinsic radius `rho` about
    /// the chart origin.
    pub fn chart_radius(&self, rho: f64) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => rho,
            SpaceKind::Sphere => {
                let s = self.curvature.sqrt();
                (s * rho / 2.0).tan() / s
            }
            SpaceKind::Hyperbolic => {
                let s = (-self.curvature).sqrt();
                (s * rho / 2.0).tanh() / s
            }
        }
    }

    /// Inverse of [`SpaceForm::chart_radius`].
    pub fn intrinsic_radius(&self, r: f64) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => r,
            SpaceKind::Sphere => {
                let s = self.curvature.sqrt();
                2.0 / s * (s * r).atan()
            }
            SpaceKind::Hyperbolic => {
                let s = (-self.curvature).sqrt();
                2.0 / s * (s * r).atanh()
            }
        }
    }

    /// `{b² : K̄ ≤ b² ≤ 1, b² ≠ 0}`.
    pub fn admissible_b_interval(&self) -> BInterval {
        BInterval {
            lower: self.curvature,
            upper: 1.0,
            lower_closed: self.curvature != 0.0,
        }
    }
}

/// Wire form of a space declaration: `{"kind": "sphere", "curvature": 1.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    #[serde(default)]
    pub curvature: Option<f64>,
}

impl SpaceSpec {
    pub fn build(&self) -> Result<SpaceForm> {
        let k = match (self.kind, self.curvature) {
            (_, Some(k)) => k,
            (SpaceKind::Euclidean, None) => 0.0,
            (SpaceKind::Sphere, None) => 1.0,
            (SpaceKind::Hyperbolic, None) => -1.0,
        };
        SpaceForm::new(self.kind, k)
    }
}

impl From<&SpaceForm> for SpaceSpec {
    fn from(s: &SpaceForm) -> Self {
        SpaceSpec {
            kind: s.kind,
            curvature: Some(s.curvature),
        }
    }
}

impl Serialize for SpaceForm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpaceForm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = SpaceSpec::deserialize(deserializer)?;
        spec.build().map_err(serde::de::Error::custom)
    }
}
