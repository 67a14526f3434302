//! Test functions for the inequality checks: band-limited ambient fields
//! (sampled on curves and surfaces together with their tangential
//! gradients) and periodic arclength samples with spectral derivatives.

use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::surface::DiscreteSurface;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub amplitude: f64,
    pub frequency: Vec<f64>,
    pub phase: f64,
}

/// `u(x) = offset + Σ a_k (lift + sin(ω_k·x + φ_k))` with `lift ∈ {0, 1}`.
/// Lifted fields with non-negative amplitudes and offset are ≥ 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandLimitedField {
    pub dim: usize,
    pub offset: f64,
    pub lifted: bool,
    pub waves: Vec<Wave>,
}

impl BandLimitedField {
    pub fn constant(dim: usize, value: f64) -> Self {
        BandLimitedField {
            dim,
            offset: value,
            lifted: false,
            waves: Vec::new(),
        }
    }

    fn random(dim: usize, waves: usize, max_freq: i32, lifted: bool, rng: &mut impl Rng) -> Self {
        let waves = (0..waves)
            .map(|_| {
                let mut frequency;
                loop {
                    frequency = (0..dim)
                        .map(|_| rng.random_range(-max_freq..=max_freq) as f64)
                        .collect::<Vec<_>>();
                    if frequency.iter().any(|&w| w != 0.0) {
                        break;
                    }
                }
                Wave {
                    amplitude: if lifted {
                        rng.random::<f64>()
                    } else {
                        rng.random_range(-1.0..1.0)
                    },
                    frequency,
                    phase: rng.random_range(0.0..TAU),
                }
            })
            .collect();
        BandLimitedField {
            dim,
            offset: 0.0,
            lifted,
            waves,
        }
    }

    /// Non-negative field with `waves` lifted sine terms.
    pub fn random_nonnegative(dim: usize, waves: usize, max_freq: i32, rng: &mut impl Rng) -> Self {
        Self::random(dim, waves, max_freq, true, rng)
    }

    pub fn random_signed(dim: usize, waves: usize, max_freq: i32, rng: &mut impl Rng) -> Self {
        Self::random(dim, waves, max_freq, false, rng)
    }

    /// Value and ambient (coordinate) gradient at `x`.
    pub fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let lift = if self.lifted { 1.0 } else { 0.0 };
        let mut v = self.offset;
        let mut g = vec![0.0; self.dim];
        for w in &self.waves {
            let arg = w.phase + w.frequency.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            v += w.amplitude * (lift + arg.sin());
            let c = w.amplitude * arg.cos();
            for (gi, wi) in g.iter_mut().zip(&w.frequency) {
                *gi += c * wi;
            }
        }
        (v, g)
    }
}

/// Values of a scalar function at the sample nodes with the norm of its
/// intrinsic gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub values: Vec<f64>,
    pub grad_norm: Vec<f64>,
}

impl NodalField {
    /// Samples `f` at the physical nodes of `s`; `|∇u|` is the length of the
    /// tangential projection of the ambient gradient.
    pub fn on_surface(s: &DiscreteSurface, f: &BandLimitedField) -> Result<Self> {
        check_dim(f, 3)?;
        let (mut values, mut grad_norm) = (Vec::new(), Vec::new());
        for k in s.nodes() {
            let (v, g) = f.eval(&s.position(k));
            let n = s.normal(k);
            let gn: f64 = (0..3).map(|c| g[c] * n[c]).sum();
            let gg: f64 = g.iter().map(|x| x * x).sum();
            values.push(v);
            grad_norm.push((gg - gn * gn).max(0.0).sqrt());
        }
        Ok(NodalField { values, grad_norm })
    }

    /// Samples `f` (in chart coordinates) at the vertices of `c`. The arclength
    /// derivative is `⟨∂u, T⟩ / λ` with `T` the Euclidean unit tangent.
    pub fn on_curve(c: &DiscreteCurve, f: &BandLimitedField) -> Result<Self> {
        check_dim(f, 2)?;
        let jet = c.curvature_jet(0)?;
        let (mut values, mut grad_norm) = (Vec::new(), Vec::new());
        for (i, x) in c.vertices().iter().enumerate() {
            let (v, g) = f.eval(x);
            let nu = jet.normals[i];
            let t = [-nu[1], nu[0]];
            values.push(v);
            grad_norm.push(((g[0] * t[0] + g[1] * t[1]) / jet.lambda[i]).abs());
        }
        Ok(NodalField { values, grad_norm })
    }
}

fn check_dim(f: &BandLimitedField, dim: usize) -> Result<()> {
    if f.dim == dim {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "field has dimension {}, expected {dim}",
            f.dim
        )))
    }
}

/// Uniform samples of a periodic function of arclength on `[0, length)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSamples {
    pub length: f64,
    pub values: Vec<f64>,
}

impl PeriodicSamples {
    pub fn new(length: f64, values: Vec<f64>) -> Result<Self> {
        if !(length > 0.0) || values.len() < 8 {
            return Err(Error::InvalidParameter(format!(
                "periodic samples need positive length and ≥ 8 values (got {length}, {})",
                values.len()
            )));
        }
        Ok(PeriodicSamples { length, values })
    }

    pub fn from_fn(length: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = length / n as f64;
        Self::new(length, (0..n).map(|i| f(i as f64 * h)).collect())
    }

    /// Geodesic curvature of a curve whose vertices sit at uniform arclength.
    pub fn curvature(curve: &DiscreteCurve) -> Result<Self> {
        let jet = curve.curvature_jet(0)?;
        Self::new(curve.spline_length(), jet.kappa(0).to_vec())
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    /// `d^order/ds^order` by FFT; the Nyquist mode is dropped for odd orders.
    pub fn derivative(&self, order: usize) -> Vec<f64> {
        if order == 0 {
            return self.values.clone();
        }
        let n = self.values.len();
        let mut planner = FftPlanner::new();
        let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        planner.plan_fft_forward(n).process(&mut buf);
        for (f, z) in buf.iter_mut().enumerate() {
            let signed = if f <= n / 2 { f as i64 } else { f as i64 - n as i64 };
            if n.is_multiple_of(2) && f == n / 2 && order % 2 == 1 {
                *z = Complex64::new(0.0, 0.0);
                continue;
            }
            let k = TAU * signed as f64 / self.length;
            *z *= Complex64::new(0.0, k).powu(order as u32);
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        buf.iter().map(|z| z.re / n as f64).collect()
    }
}

/// `(Σ |f|^p h)^{1/p}`, or `max |f|` for infinite `p`.
pub fn lp_norm(values: &[f64], h: f64, p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h).powf(1.0 / p)
    }
}

/// Weighted `L^p` norm with quadrature weights.
pub fn weighted_lp_norm(values: &[f64], weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values
            .iter()
            .zip(weights)
            .map(|(v, w)| v.abs().powf(p) * w)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Random trigonometric polynomial in arclength with modes `1..=modes`,
/// coefficients uniform in `[-1, 1] / k` and a random mean.
pub fn random_series(modes: usize, rng: &mut impl Rng) -> impl Fn(f64, f64) -> f64 {
    let mean: f64 = rng.random_range(-1.0..1.0);
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|k| {
            let s = 1.0 / k as f64;
            (s * rng.random_range(-1.0..1.0), s * rng.random_range(-1.0..1.0))
        })
        .collect();
    move |s: f64, length: f64| {
        let t = TAU * s / length;
        mean + coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let kt = (k + 1) as f64 * t;
                a * kt.cos() + b * kt.sin()
            })
            .sum::<f64>()
    }
}
