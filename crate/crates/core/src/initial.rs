//! Initial curves for flow experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::PathBuf;

use crate::curve::{CurveSnapshot, DiscreteCurve};
use crate::error::{Error, Result};
use crate::space::{Point, SpaceForm};

/// Initial-curve declaration as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCurve {
    /// Geodesic circle of intrinsic radius `radius` about the chart origin.
    Circle { radius: f64 },
    /// Circle with a random radial Fourier perturbation on modes `2..=modes`;
    /// the coefficient magnitudes sum to `amplitude`.
    PerturbedCircle { radius: f64, amplitude: f64, modes: usize },
    /// Chart ellipse with semi-axes `a` (along x) and `b`.
    Ellipse { a: f64, b: f64 },
    /// Snapshot file written by a previous run.
    File { path: PathBuf },
}

impl InitialCurve {
    /// Builds the curve with `n` vertices. `File` ignores `n` and `space`
    /// must match the snapshot's.
    pub fn build(&self, space: &SpaceForm, n: usize, seed: u64) -> Result<DiscreteCurve> {
        match self {
            InitialCurve::Circle { radius } => circle(space, *radius, n),
            InitialCurve::PerturbedCircle {
                radius,
                amplitude,
                modes,
            } => perturbed_circle(space, *radius, *amplitude, *modes, seed, n),
            InitialCurve::Ellipse { a, b } => ellipse(space, *a, *b, n),
            InitialCurve::File { path } => {
                let text = std::fs::read_to_string(path)?;
                let snap =
                    match serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))? {
                        SnapshotFile::Bare(s) | SnapshotFile::Run { curve: s } => s,
                    };
                if snap.space != *space {
                    return Err(Error::InvalidParameter(format!(
                        "snapshot {} was recorded in a different space",
                        path.display()
                    )));
                }
                snap.into_curve()
            }
        }
    }
}

/// A bare curve snapshot or a flow snapshot carrying one under `curve`.
#[derive(Deserialize)]
#[serde(untagged)]
enum SnapshotFile {
    Bare(CurveSnapshot),
    Run { curve: CurveSnapshot },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn polar(n: usize, radius: impl Fn(f64) -> f64) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            let r = radius(t);
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

/// Geodesic circle of intrinsic radius `rho` centred at the chart origin.
pub fn circle(space: &SpaceForm, rho: f64, n: usize) -> Result<DiscreteCurve> {
    positive("radius", rho)?;
    let r = space.chart_radius(rho);
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius {rho} exceeds the chart of this space"
        )));
    }
    DiscreteCurve::new(*space, polar(n, |_| r))
}

/// Radial Fourier coefficients `(a_k, b_k)` for `k = 2..=modes`.
pub fn perturbation_coefficients(amplitude: f64, modes: usize, seed: u64) -> Vec<(f64, f64)> {
    if modes < 2 || amplitude == 0.0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<(f64, f64)> = (2..=modes)
        .map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
        .collect();
    let total: f64 = raw.iter().map(|(a, b)| a.abs() + b.abs()).sum();
    raw.into_iter()
        .map(|(a, b)| (amplitude * a / total, amplitude * b / total))
        .collect()
}

/// Chart curve `r(θ) = r₀ (1 + Σ a_k cos kθ + b_k sin kθ)`, resampled at
/// uniform arclength.
pub fn perturbed_circle(
    space: &SpaceForm,
    rho: f64,
    amplitude: f64,
    modes: usize,
    seed: u64,
    n: usize,
) -> Result<DiscreteCurve> {
    positive("radius", rho)?;
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::InvalidParameter(format!(
            "amplitude must lie in [0, 1), got {amplitude}"
        )));
    }
    let r0 = space.chart_radius(rho);
    let coeffs = perturbation_coefficients(amplitude, modes, seed);
    let v = polar(n, |t| {
        let mut s = 1.0;
        for (k, (a, b)) in coeffs.iter().enumerate() {
            let kt = (k + 2) as f64 * t;
            s += a * kt.cos() + b * kt.sin();
        }
        r0 * s
    });
    DiscreteCurve::new(*space, v)?.reparametrize()
}

/// Ellipse sampled at equally spaced parameter angles (not arclength).
pub fn ellipse_raw(space: &SpaceForm, a: f64, b: f64, n: usize) -> Result<DiscreteCurve> {
    positive("a", a)?;
    positive("b", b)?;
    let v = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            [a * t.cos(), b * t.sin()]
        })
        .collect();
    DiscreteCurve::new(*space, v)
}

/// Ellipse resampled at uniform arclength.
pub fn ellipse(space: &SpaceForm, a: f64, b: f64, n: usize) -> Result<DiscreteCurve> {
    ellipse_raw(space, a, b, n)?.reparametrize()
}
