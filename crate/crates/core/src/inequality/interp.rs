//! Empirical interpolation constants for periodic functions of arclength.
//!
//! * `gn`: `∫|∇ʲT|² ≤ C (∫|∇ˢT|²)^{j/s} (∫|T|²)^{1−j/s}`
//! * `lq`: `∫|∇ʲT|^{2s/j} ≤ C ‖T‖_∞^{2(s/j−1)} ∫|∇ˢT|²`
//! * `mixed`: `‖∇ʲT‖_p ≤ C ‖T‖_{W^{s,q}}^a ‖T‖_r^{1−a}` with
//!   `1/p = j/n + a(1/q − s/n) + (1−a)/r`, `a ∈ [j/s, 1]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;

use super::field::{lp_norm, random_series, PeriodicSamples};
use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::initial::perturbed_circle;
use crate::space::SpaceForm;

/// Derivatives below this fraction of `max|T|` count as zero.
const ZERO_DERIVATIVE: f64 = 1e-10;

/// Realized exponent sets `(j, s, q, r, a)` of the mixed inequality.
pub const MIXED_CASES: [(usize, usize, f64, f64, f64); 4] = [
    (1, 2, 2.0, 2.0, 0.5),
    (1, 2, 2.0, 2.0, 0.6),
    (1, 3, 2.0, 2.0, 0.5),
    (2, 3, 2.0, 4.0, 0.8),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Gn {
        j: usize,
        s: usize,
    },
    Lq {
        j: usize,
        s: usize,
    },
    Mixed {
        j: usize,
        s: usize,
        q: Exponent,
        r: Exponent,
        a_milli: u32,
    },
}

/// Exponent stored exactly for `Eq`; `0` encodes infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Exponent(pub u32);

impl Exponent {
    pub fn new(p: f64) -> Self {
        if p.is_infinite() {
            Exponent(0)
        } else {
            Exponent((p * 1000.0).round() as u32)
        }
    }

    pub fn value(self) -> f64 {
        if self.0 == 0 {
            f64::INFINITY
        } else {
            self.0 as f64 / 1000.0
        }
    }
}

impl Interpolation {
    pub fn mixed(j: usize, s: usize, q: f64, r: f64, a: f64) -> Self {
        Interpolation::Mixed {
            j,
            s,
            q: Exponent::new(q),
            r: Exponent::new(r),
            a_milli: (a * 1000.0).round() as u32,
        }
    }

    fn orders(&self) -> (usize, usize) {
        match *self {
            Interpolation::Gn { j, s } | Interpolation::Lq { j, s } | Interpolation::Mixed { j, s, .. } => (j, s),
        }
    }

    fn validate(&self) -> Result<()> {
        let (j, s) = self.orders();
        if !(1 <= j && j <= s && s <= 4) {
            return Err(Error::InvalidParameter(format!(
                "need 1 ≤ j ≤ s ≤ 4, got j = {j}, s = {s}"
            )));
        }
        if let Interpolation::Mixed { q, r, a_milli, .. } = *self {
            mixed_exponent(j, s, q.value(), r.value(), a_milli as f64 / 1000.0, 1)?;
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match *self {
            Interpolation::Gn { j, s } => format!("gn_j{j}_s{s}"),
            Interpolation::Lq { j, s } => format!("lq_j{j}_s{s}"),
            Interpolation::Mixed { j, s, q, r, a_milli } => format!(
                "mixed_j{j}_s{s}_q{}_r{}_a{}",
                q.value(),
                r.value(),
                a_milli as f64 / 1000.0
            ),
        }
    }
}

/// The exponent `p` from `1/p = j/n + a(1/q − s/n) + (1−a)/r`; infinite `q`
/// or `r` contribute zero. Errors if `a ∉ [j/s, 1]` or `1/p ∉ [0, 1]`.
pub fn mixed_exponent(j: usize, s: usize, q: f64, r: f64, a: f64, n: usize) -> Result<f64> {
    let (jf, sf, nf) = (j as f64, s as f64, n as f64);
    if !(a >= jf / sf - 1e-12 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!("a = {a} outside [{}, 1]", jf / sf)));
    }
    if !(q >= 1.0 && r >= 1.0) {
        return Err(Error::InvalidParameter(format!("need q, r ≥ 1, got {q}, {r}")));
    }
    let inv = jf / nf + a * (1.0 / q - sf / nf) + (1.0 - a) / r;
    if !(-1e-12..=1.0).contains(&inv) {
        return Err(Error::InvalidParameter(format!("1/p = {inv} outside [0, 1]")));
    }
    Ok(if inv <= 1e-12 { f64::INFINITY } else { 1.0 / inv })
}

/// `lhs / rhs` for one sample with the implied constant set to 1; 0 when
/// `∇ʲT` vanishes. Errors on the zero function.
pub fn interpolation_ratio(t: &PeriodicSamples, which: Interpolation) -> Result<f64> {
    which.validate()?;
    let sup = lp_norm(&t.values, 1.0, f64::INFINITY);
    if sup == 0.0 {
        return Err(Error::InvalidParameter(
            "the zero function is excluded from ratios".into(),
        ));
    }
    let (j, s) = which.orders();
    let h = t.spacing();
    let dj = t.derivative(j);
    if lp_norm(&dj, 1.0, f64::INFINITY) <= ZERO_DERIVATIVE * sup {
        return Ok(0.0);
    }
    let ds = t.derivative(s);
    let l2sq = |v: &[f64]| lp_norm(v, h, 2.0).powi(2);
    let (jf, sf) = (j as f64, s as f64);
    Ok(match which {
        Interpolation::Gn { .. } => l2sq(&dj) / (l2sq(&ds).powf(jf / sf) * l2sq(&t.values).powf(1.0 - jf / sf)),
        Interpolation::Lq { .. } => {
            let e = 2.0 * sf / jf;
            lp_norm(&dj, h, e).powf(e) / (sup.powf(2.0 * (sf / jf - 1.0)) * l2sq(&ds))
        }
        Interpolation::Mixed { q, r, a_milli, .. } => {
            let (q, r, a) = (q.value(), r.value(), a_milli as f64 / 1000.0);
            let p = mixed_exponent(j, s, q, r, a, 1)?;
            let sobolev: f64 = (0..=s).map(|i| lp_norm(&t.derivative(i), h, q)).sum();
            lp_norm(&dj, h, p) / (sobolev.powf(a) * lp_norm(&t.values, h, r).powf(1.0 - a))
        }
    })
}

/// Supremum of the ratio over a sample family at each ladder size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub name: String,
    pub sizes: Vec<usize>,
    pub sup_ratio: Vec<f64>,
    /// `max / min` of the per-size suprema.
    pub drift: f64,
}

impl LadderReport {
    pub fn new(name: String, sizes: Vec<usize>, sup_ratio: Vec<f64>) -> Self {
        let hi = sup_ratio.iter().cloned().fold(0.0, f64::max);
        let lo = sup_ratio.iter().cloned().fold(f64::INFINITY, f64::min);
        let drift = if lo > 0.0 {
            hi / lo
        } else if hi == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        LadderReport {
            name,
            sizes,
            sup_ratio,
            drift,
        }
    }

    pub fn finite(&self) -> bool {
        self.sup_ratio.iter().all(|r| r.is_finite())
    }

    pub fn stable(&self, max_drift: f64) -> bool {
        self.finite() && self.drift <= max_drift
    }
}

/// Evaluates `which` on `family(n)` for each `n` in `sizes`.
pub fn interpolation_ladder(
    which: Interpolation,
    sizes: &[usize],
    family: impl Fn(usize) -> Result<Vec<PeriodicSamples>>,
) -> Result<LadderReport> {
    let mut sups = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut sup = 0.0f64;
        for t in family(n)? {
            sup = sup.max(interpolation_ratio(&t, which)?);
        }
        sups.push(sup);
    }
    Ok(LadderReport::new(which.name(), sizes.to_vec(), sups))
}

/// `count` random trigonometric polynomials (modes 1..=8) on a unit-circle
/// arclength period, reproducible from `seed`.
pub fn random_family(count: usize, seed: u64) -> impl Fn(usize) -> Result<Vec<PeriodicSamples>> {
    move |n| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let f = random_series(8, &mut rng);
                PeriodicSamples::from_fn(TAU, n, |s| f(s, TAU))
            })
            .collect()
    }
}

/// Curvature of `count` perturbed circles (amplitude 0.1) in the plane.
pub fn curvature_family(count: usize, seed: u64) -> impl Fn(usize) -> Result<Vec<PeriodicSamples>> {
    move |n| {
        (0..count as u64)
            .map(|k| {
                let c: DiscreteCurve = perturbed_circle(&SpaceForm::euclidean(), 1.0, 0.1, 6, seed + k, n)?;
                PeriodicSamples::curvature(&c)
            })
            .collect()
    }
}

/// `sin(2π s / L)` on a unit circle.
pub fn sine_sample(n: usize) -> Result<PeriodicSamples> {
    PeriodicSamples::from_fn(TAU, n, |s| s.sin())
}

/// Exact ratio of the sine test: 1 for `gn`, `3/4` for `lq` with `j=1, s=2`.
pub fn sine_exact(which: Interpolation) -> Option<f64> {
    match which {
        Interpolation::Gn { .. } => Some(1.0),
        Interpolation::Lq { j: 1, s: 2 } => Some(0.75),
        _ => None,
    }
}

/// All interpolation ladders on `N ∈ {128, 256, 512}`: 50 random series,
/// 10 curvature samples, for every `(j, s)` with `s ≤ 4` and the mixed cases.
pub fn interpolation_suite(seed: u64) -> Result<Vec<LadderReport>> {
    let sizes = [128, 256, 512];
    let mut cases = Vec::new();
    for s in 1..=4 {
        for j in 1..=s {
            cases.push(Interpolation::Gn { j, s });
            cases.push(Interpolation::Lq { j, s });
        }
    }
    for (j, s, q, r, a) in MIXED_CASES {
        cases.push(Interpolation::mixed(j, s, q, r, a));
    }
    let random = random_family(50, seed);
    let curvature = curvature_family(10, seed);
    let mut out = Vec::new();
    for which in cases {
        let mut rep = interpolation_ladder(which, &sizes, &random)?;
        rep.name = format!("{}/random", rep.name);
        out.push(rep);
        let mut rep = interpolation_ladder(which, &sizes, &curvature)?;
        rep.name = format!("{}/curvature", rep.name);
        out.push(rep);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_equality_cases() {
        for n in [128, 256, 512] {
            let t = sine_sample(n).unwrap();
            let gn = interpolation_ratio(&t, Interpolation::Gn { j: 1, s: 2 }).unwrap();
            assert!((gn - 1.0).abs() < 1e-10);
            let lq = interpolation_ratio(&t, Interpolation::Lq { j: 1, s: 2 }).unwrap();
            assert!((lq - 0.75).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_has_zero_ratio_and_zero_is_excluded() {
        let t = PeriodicSamples::from_fn(1.0, 64, |_| 2.0).unwrap();
        assert_eq!(interpolation_ratio(&t, Interpolation::Gn { j: 1, s: 2 }).unwrap(), 0.0);
        assert_eq!(interpolation_ratio(&t, Interpolation::Lq { j: 2, s: 3 }).unwrap(), 0.0);
        let z = PeriodicSamples::from_fn(1.0, 64, |_| 0.0).unwrap();
        assert!(interpolation_ratio(&z, Interpolation::Gn { j: 1, s: 2 }).is_err());
    }

    #[test]
    fn mixed_exponents() {
        assert_eq!(mixed_exponent(1, 2, 2.0, 2.0, 0.5, 1).unwrap(), 2.0);
        assert!((mixed_exponent(1, 2, 2.0, 2.0, 0.6, 1).unwrap() - 1.0 / 0.3).abs() < 1e-12);
        assert_eq!(mixed_exponent(1, 2, 2.0, 2.0, 0.75, 1).unwrap(), f64::INFINITY);
        assert!(mixed_exponent(1, 2, 2.0, 2.0, 0.4, 1).is_err());
        assert!(mixed_exponent(1, 2, 2.0, 2.0, 0.9, 1).is_err());
        for (j, s, q, r, a) in MIXED_CASES {
            assert!(mixed_exponent(j, s, q, r, a, 1).is_ok());
        }
    }

    #[test]
    fn rejects_bad_orders() {
        let t = sine_sample(64).unwrap();
        assert!(interpolation_ratio(&t, Interpolation::Gn { j: 3, s: 2 }).is_err());
        assert!(interpolation_ratio(&t, Interpolation::Gn { j: 1, s: 5 }).is_err());
    }

    #[test]
    fn random_ladder_is_stable() {
        let r = interpolation_ladder(Interpolation::Gn { j: 1, s: 3 }, &[128, 256, 512], random_family(10, 2)).unwrap();
        assert!(r.stable(2.0), "{r:?}");
    }
}
