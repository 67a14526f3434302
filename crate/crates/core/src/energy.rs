//! The functional `𝔉_m = ∫(1 + |∇ᵐν|²) ds`, the global-existence energy
//! threshold and the initial-condition check.

use serde::Serialize;
use std::sync::{Arc, Mutex, OnceLock};

use crate::curve::{CurvatureJet, DiscreteCurve};
use crate::error::{Error, Result};
use crate::frenet::{grad_norm_sq, CompiledPoly};
use crate::space::{SpaceForm, SpaceKind};

/// `|∇ᵐν|²` compiled for evaluation; cached per `m`.
pub fn density_poly(m: usize) -> Arc<CompiledPoly> {
    static CACHE: OnceLock<Mutex<Vec<Option<Arc<CompiledPoly>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().expect("poly cache poisoned");
    if guard.len() <= m {
        guard.resize(m + 1, None);
    }
    guard[m]
        .get_or_insert_with(|| Arc::new(grad_norm_sq(m).compile()))
        .clone()
}

/// Jet order needed to evaluate the order-`m` density.
pub fn required_jet_order(m: usize) -> usize {
    m.saturating_sub(1)
}

/// Energy of a curve whose jet and vertex weights are already known.
pub fn energy_from_jet(jet: &CurvatureJet, weights: &[f64], m: usize) -> Result<f64> {
    let need = required_jet_order(m);
    if jet.order() < need {
        return Err(Error::InsufficientJet {
            needed: need,
            available: jet.order(),
        });
    }
    let p = density_poly(m);
    let mut buf = Vec::with_capacity(jet.order() + 1);
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        jet.values_at(i, &mut buf);
        acc += w * (1.0 + p.eval(&buf));
    }
    Ok(acc)
}

/// `𝔉_m(curve) = Σ w_i (1 + |∇ᵐν|²_i)`.
pub fn energy(curve: &DiscreteCurve, m: usize) -> Result<f64> {
    let jet = curve.curvature_jet(required_jet_order(m))?;
    energy_from_jet(&jet, &curve.induced_metric().weights, m)
}

/// Value of the energy threshold for a given `b²` (negative `b²` means
/// imaginary `b`), specialised to curves (`n = 1`, `ω₁ = 2`).
pub fn threshold(space: &SpaceForm, b2: f64) -> Result<f64> {
    let iv = space.admissible_b_interval();
    if !iv.contains(b2) {
        return Err(Error::InadmissibleB {
            b2,
            lower: iv.lower,
            upper: iv.upper,
        });
    }
    let b = b2.abs().sqrt();
    let r_bar = space.injectivity_radius();
    // ω₁ / (|b|(n+1)) with ω₁ = 2, n = 1
    let first = 1.0 / b;
    let second = if b2 > 0.0 {
        b * r_bar / std::f64::consts::PI
    } else {
        r_bar / 2.0
    };
    Ok(first.min(second))
}

/// Supremum of [`threshold`] over the admissible `b²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSup {
    #[serde(with = "crate::extended_float")]
    pub value: f64,
    /// Optimal `b²`; `0` when the supremum is the limit `b → 0`.
    pub b2: f64,
    /// Whether the supremum is attained at an admissible `b`.
    pub attained: bool,
}

pub fn threshold_sup(space: &SpaceForm) -> ThresholdSup {
    match space.kind() {
        SpaceKind::Sphere => {
            // min{1/b, b/√K} peaks where the branches cross, at b² = √K
            let k = space.curvature();
            let b2 = k.sqrt();
            ThresholdSup {
                value: threshold(space, b2).expect("optimal b is admissible"),
                b2,
                attained: true,
            }
        }
        // R̄ = ∞ and b² may tend to 0: the bound 1/|b| is unbounded
        SpaceKind::Euclidean | SpaceKind::Hyperbolic => ThresholdSup {
            value: f64::INFINITY,
            b2: 0.0,
            attained: false,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialConditionReport {
    #[serde(rename = "F_m")]
    pub energy: f64,
    #[serde(with = "crate::extended_float")]
    pub threshold_sup: f64,
    pub satisfied: bool,
    pub admissible_m: bool,
}

/// Whether the curve's energy lies below the threshold and `m` is large
/// enough for the existence theorem (`m ≥ 1` for curves).
pub fn check_initial_condition(curve: &DiscreteCurve, m: usize) -> Result<InitialConditionReport> {
    let energy = energy(curve, m)?;
    let sup = threshold_sup(curve.space()).value;
    Ok(InitialConditionReport {
        energy,
        threshold_sup: sup,
        satisfied: energy <= sup,
        admissible_m: m >= 1,
    })
}
