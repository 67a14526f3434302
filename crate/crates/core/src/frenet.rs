//! Exact differential polynomials in the curvature jet and the Frenet
//! recursion for covariant derivatives of the frame of a curve.
//!
//! Variables are `κ⁽⁰⁾, κ⁽¹⁾, …`, the curvature and its arclength
//! derivatives. The frame obeys `∇_s T = −κ ν` and `∇_s ν = κ T`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exponent vector: `exps[j]` is the power of `κ⁽ʲ⁾`. Trailing zeros are
/// trimmed so equal monomials compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    /// The single variable `κ⁽ʲ⁾`.
    pub fn var(j: usize) -> Self {
        let mut e = vec![0; j + 1];
        e[j] = 1;
        Monomial(e)
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Weight with `weight(κ⁽ʲ⁾) = j + 1`.
    pub fn weight(&self) -> u32 {
        self.0.iter().enumerate().map(|(j, &e)| (j as u32 + 1) * e).sum()
    }

    /// Highest derivative order present, if any.
    pub fn max_order(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let e = (0..n)
            .map(|j| self.0.get(j).copied().unwrap_or(0) + other.0.get(j).copied().unwrap_or(0))
            .collect();
        Monomial(e)
    }

    fn eval(&self, jet: &[f64]) -> f64 {
        let mut acc = 1.0;
        for (j, &e) in self.0.iter().enumerate() {
            if e > 0 {
                acc *= jet[j].powi(e as i32);
            }
        }
        acc
    }
}

/// Polynomial with integer coefficients in the curvature jet, kept in
/// canonical form (no zero coefficients).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, i64>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn constant(c: i64) -> Self {
        DiffPoly::term(c, Monomial::one())
    }

    /// `κ⁽ʲ⁾`.
    pub fn kappa(j: usize) -> Self {
        DiffPoly::term(1, Monomial::var(j))
    }

    pub fn term(c: i64, m: Monomial) -> Self {
        let mut p = DiffPoly::zero();
        p.add_term(c, m);
        p
    }

    fn add_term(&mut self, c: i64, m: Monomial) {
        if c == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let v = e.get().checked_add(c).expect("coefficient overflow");
                if v == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    /// Highest jet order referenced, `None` for constants.
    pub fn max_order(&self) -> Option<usize> {
        self.terms.keys().filter_map(Monomial::max_order).max()
    }

    /// `Some(w)` if every monomial has weight `w`; `None` otherwise. The
    /// zero polynomial is homogeneous of every weight and reports `None`.
    pub fn homogeneous_weight(&self) -> Option<u32> {
        let mut w = None;
        for m in self.terms.keys() {
            match w {
                None => w = Some(m.weight()),
                Some(v) if v != m.weight() => return None,
                _ => {}
            }
        }
        w
    }

    /// Formal arclength derivative: `D κ⁽ʲ⁾ = κ⁽ʲ⁺¹⁾` extended by the
    /// product rule.
    pub fn derivative(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, &c) in &self.terms {
            for (j, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut exps = m.0.clone();
                exps[j] -= 1;
                if exps.len() <= j + 1 {
                    exps.resize(j + 2, 0);
                }
                exps[j + 1] += 1;
                out.add_term(c * e as i64, Monomial::from_exponents(exps));
            }
        }
        out
    }

    /// Evaluates at `jet[j] = κ⁽ʲ⁾`.
    pub fn eval(&self, jet: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &c)| c as f64 * m.eval(jet)).sum()
    }

    /// Flattened form for repeated evaluation.
    pub fn compile(&self) -> CompiledPoly {
        let terms = self
            .terms
            .iter()
            .map(|(m, &c)| {
                let factors =
                    m.0.iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(j, &e)| (j as u16, e as u16))
                        .collect();
                (c as f64, factors)
            })
            .collect();
        CompiledPoly {
            terms,
            order: self.max_order(),
        }
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(c, m.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        self + &(-rhs)
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly {
            terms: self.terms.iter().map(|(m, &c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                out.add_term(ca.checked_mul(cb).expect("coefficient overflow"), a.mul(b));
            }
        }
        out
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // descending weight, then lexicographic
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|a, b| b.0.weight().cmp(&a.0.weight()).then(b.0.cmp(a.0)));
        for (k, (m, &c)) in items.into_iter().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            if k == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.unsigned_abs();
            let factors: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(j, &e)| {
                        let v = if j == 0 { "k".to_string() } else { format!("k{j}") };
                        if e == 1 {
                            v
                        } else {
                            format!("{v}^{e}")
                        }
                    })
                    .collect();
            match (mag, factors.is_empty()) {
                (_, true) => write!(f, "{mag}")?,
                (1, false) => write!(f, "{}", factors.join("*"))?,
                _ => write!(f, "{mag}*{}", factors.join("*"))?,
            }
        }
        Ok(())
    }
}

/// Polynomial flattened into `(coefficient, [(variable, power)])` terms.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(u16, u16)>)>,
    order: Option<usize>,
}

impl CompiledPoly {
    /// Jet order needed to evaluate (0 for constants).
    pub fn required_order(&self) -> usize {
        self.order.unwrap_or(0)
    }

    #[inline]
    pub fn eval(&self, jet: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(j, e) in factors {
                t *= jet[j as usize].powi(e as i32);
            }
            acc += t;
        }
        acc
    }
}

/// Components of `∇ˢζ` in the frame `{T, ν}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrenetVector {
    pub tangential: DiffPoly,
    pub normal: DiffPoly,
    pub order: usize,
}

impl FrenetVector {
    /// The unit normal `ν`, order 0.
    pub fn unit_normal() -> Self {
        FrenetVector {
            tangential: DiffPoly::zero(),
            normal: DiffPoly::constant(1),
            order: 0,
        }
    }

    /// The unit tangent `T = ∇φ`, order 1 as a derivative of the position.
    pub fn unit_tangent() -> Self {
        FrenetVector {
            tangential: DiffPoly::constant(1),
            normal: DiffPoly::zero(),
            order: 1,
        }
    }

    /// `∇_s` of the vector: `(a, b) ↦ (Da + κ b, Db − κ a)`.
    pub fn derivative(&self) -> FrenetVector {
        let k = DiffPoly::kappa(0);
        FrenetVector {
            tangential: &self.tangential.derivative() + &(&k * &self.normal),
            normal: &self.normal.derivative() - &(&k * &self.tangential),
            order: self.order + 1,
        }
    }

    /// `∇ˢν`.
    pub fn normal_derivative(s: usize) -> Self {
        (0..s).fold(Self::unit_normal(), |v, _| v.derivative())
    }

    /// `∇ˢφ` for `s ≥ 1`.
    pub fn position_derivative(s: usize) -> Self {
        assert!(s >= 1, "position derivatives start at order 1");
        (1..s).fold(Self::unit_tangent(), |v, _| v.derivative())
    }

    /// `|·|² = a² + b²`.
    pub fn norm_sq(&self) -> DiffPoly {
        &(&self.tangential * &self.tangential) + &(&self.normal * &self.normal)
    }

    /// Whether both components are homogeneous of the given weight
    /// (zero components pass).
    pub fn is_homogeneous(&self, weight: u32) -> bool {
        [&self.tangential, &self.normal]
            .iter()
            .all(|p| p.terms.keys().all(|m| m.weight() == weight))
    }
}

impl fmt::Display for FrenetVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) T + ({}) nu", self.tangential, self.normal)
    }
}

/// `|∇ᵐν|²` as a polynomial of weight `2m`.
pub fn grad_norm_sq(m: usize) -> DiffPoly {
    FrenetVector::normal_derivative(m).norm_sq()
}

/// Largest deviation between `|∇ˢν|²` from repeated central differences of
/// the normal of the ellipse `(a cos θ, b sin θ)` on `n` uniform nodes and
/// [`grad_norm_sq`] evaluated on a spectrally accurate curvature jet.
/// The difference is `O(n⁻²)`.
pub fn ellipse_consistency(a: f64, b: f64, s: usize, n: usize) -> crate::error::Result<f64> {
    use crate::inequality::PeriodicSamples;
    use std::f64::consts::TAU;
    if !(a > 0.0 && b > 0.0) || n < 16 {
        return Err(crate::error::Error::InvalidParameter(format!(
            "ellipse check needs positive axes and n ≥ 16, got a = {a}, b = {b}, n = {n}"
        )));
    }
    let h = TAU / n as f64;
    let theta: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let speed: Vec<f64> = theta
        .iter()
        .map(|t| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt())
        .collect();
    let mut v: Vec<[f64; 2]> = theta
        .iter()
        .zip(&speed)
        .map(|(t, sp)| [b * t.cos() / sp, a * t.sin() / sp])
        .collect();
    for _ in 0..s {
        v = (0..n)
            .map(|i| {
                let (p, q) = (v[(i + 1) % n], v[(i + n - 1) % n]);
                let d = 2.0 * h * speed[i];
                [(p[0] - q[0]) / d, (p[1] - q[1]) / d]
            })
            .collect();
    }

    let mut jet = vec![speed.iter().map(|sp| a * b / sp.powi(3)).collect::<Vec<f64>>()];
    for _ in 0..s.saturating_sub(1) {
        let d = PeriodicSamples::new(TAU, jet.last().unwrap().clone())?.derivative(1);
        jet.push(d.iter().zip(&speed).map(|(x, sp)| x / sp).collect());
    }
    let poly = grad_norm_sq(s).compile();
    let mut local = vec![0.0; jet.len()];
    let mut worst = 0.0f64;
    for i in 0..n {
        for (j, k) in jet.iter().enumerate() {
            local[j] = k[i];
        }
        let numeric = v[i][0] * v[i][0] + v[i][1] * v[i][1];
        worst = worst.max((numeric - poly.eval(&local)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(j: usize) -> DiffPoly {
        DiffPoly::kappa(j)
    }

    #[test]
    fn first_derivatives_of_normal() {
        let v1 = FrenetVector::unit_normal().derivative();
        assert_eq!(v1.tangential, k(0));
        assert!(v1.normal.is_zero());

        let v2 = v1.derivative();
        assert_eq!(v2.tangential, k(1));
        assert_eq!(v2.normal, -&(&k(0) * &k(0)));

        let v3 = v2.derivative();
        let k3 = &(&k(0) * &k(0)) * &k(0);
        assert_eq!(v3.tangential, &k(2) - &k3);
        assert_eq!(v3.normal, &DiffPoly::constant(-3) * &(&k(0) * &k(1)));
    }

    #[test]
    fn grad_norm_examples() {
        assert_eq!(grad_norm_sq(0), DiffPoly::constant(1));
        assert_eq!(grad_norm_sq(1), &k(0) * &k(0));
        let k2 = &k(0) * &k(0);
        assert_eq!(grad_norm_sq(2), &(&k(1) * &k(1)) + &(&k2 * &k2));
        assert_eq!(grad_norm_sq(2).to_string(), "k^4 + k1^2");
    }

    #[test]
    fn homogeneity_through_order_eight() {
        for s in 0..=8 {
            let v = FrenetVector::normal_derivative(s);
            assert!(v.is_homogeneous(s as u32), "order {s}: {v}");
            assert_eq!(grad_norm_sq(s).homogeneous_weight(), Some(2 * s as u32));
            let p = FrenetVector::position_derivative(s.max(1));
            assert!(p.is_homogeneous(s.max(1) as u32 - 1));
        }
    }

    #[test]
    fn derivative_obeys_product_rule() {
        let a = &(&k(0) * &k(0)) + &k(2);
        let b = &k(1) * &k(3);
        let lhs = (&a * &b).derivative();
        let rhs = &(&a.derivative() * &b) + &(&a * &b.derivative());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cancellation_keeps_canonical_form() {
        let p = &k(0) - &k(0);
        assert!(p.is_zero());
        assert_eq!(p, DiffPoly::zero());
        assert_eq!(DiffPoly::constant(0), DiffPoly::zero());
    }

    #[test]
    fn compiled_matches_direct() {
        let p = grad_norm_sq(4);
        let c = p.compile();
        assert_eq!(c.required_order(), 3);
        let jet = [0.7, -0.3, 1.1, 0.4, 2.0];
        assert!((p.eval(&jet) - c.eval(&jet)).abs() < 1e-12);
    }

    #[test]
    fn frame_norm_on_constant_curvature() {
        // on a circle every ∇ˢν has |·| = κˢ
        for s in 0..7 {
            let jet = vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
            let v = grad_norm_sq(s).eval(&jet);
            assert!((v - 0.5f64.powi(2 * s as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn ellipse_numeric_agreement_is_second_order() {
        for s in 1..=5 {
            let e: Vec<f64> = [128, 256, 512]
                .iter()
                .map(|&n| ellipse_consistency(1.0, 0.8, s, n).unwrap())
                .collect();
            assert!(e[0] / e[1] > 3.5 && e[1] / e[2] > 3.5, "s = {s}: {e:?}");
        }
        assert!(ellipse_consistency(1.0, 0.0, 1, 64).is_err());
    }
}
