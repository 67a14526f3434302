//! Periodic cubic interpolation on a unit-spaced parameter.

/// Periodic C² cubic spline through `values[i]` at parameter `i`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    values: Vec<f64>,
    second: Vec<f64>,
}

impl PeriodicSpline {
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n >= 3, "periodic spline needs at least 3 knots");
        let rhs: Vec<f64> = (0..n)
            .map(|i| 6.0 * (values[(i + 1) % n] - 2.0 * values[i] + values[(i + n - 1) % n]))
            .collect();
        PeriodicSpline {
            values: values.to_vec(),
            second: solve_cyclic(1.0, 4.0, 1.0, &rhs),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    fn locate(&self, u: f64) -> (usize, f64) {
        let n = self.values.len() as f64;
        let u = u.rem_euclid(n);
        let i = (u.floor() as usize).min(self.values.len() - 1);
        (i, u - i as f64)
    }

    /// Value at parameter `u` (taken modulo the knot count).
    pub fn eval(&self, u: f64) -> f64 {
        let (i, t) = self.locate(u);
        let j = (i + 1) % self.values.len();
        let (y0, y1, m0, m1) = (self.values[i], self.values[j], self.second[i], self.second[j]);
        let s = 1.0 - t;
        s * y0 + t * y1 + ((s * s * s - s) * m0 + (t * t * t - t) * m1) / 6.0
    }

    /// First derivative at parameter `u`.
    pub fn deriv(&self, u: f64) -> f64 {
        let (i, t) = self.locate(u);
        let j = (i + 1) % self.values.len();
        let (y0, y1, m0, m1) = (self.values[i], self.values[j], self.second[i], self.second[j]);
        let s = 1.0 - t;
        y1 - y0 + (-(3.0 * s * s - 1.0) * m0 + (3.0 * t * t - 1.0) * m1) / 6.0
    }
}

/// Solves the cyclic tridiagonal system with constant diagonals
/// `(sub, diag, sup)` by Sherman–Morrison.
fn solve_cyclic(sub: f64, diag: f64, sup: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let gamma = -diag;
    let mut b = vec![diag; n];
    b[0] = diag - gamma;
    b[n - 1] = diag - sup * sub / gamma;
    let x = thomas(sub, &b, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = sub;
    let z = thomas(sub, &b, sup, &u);
    let fact = (x[0] + sup * x[n - 1] / gamma) / (1.0 + z[0] + sup * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn thomas(sub: f64, diag: &[f64], sup: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub * c[i - 1];
        c[i] = sup / m;
        d[i] = (rhs[i] - sub * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn interpolates_knots_and_wraps() {
        let v: Vec<f64> = (0..10).map(|i| ((i * 7) % 10) as f64).collect();
        let s = PeriodicSpline::new(&v);
        for (i, &vi) in v.iter().enumerate() {
            assert!((s.eval(i as f64) - vi).abs() < 1e-12);
            assert!((s.eval(i as f64 + 10.0) - vi).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_order_on_trig() {
        let err = |n: usize| {
            let v: Vec<f64> = (0..n).map(|i| (TAU * i as f64 / n as f64).sin()).collect();
            let s = PeriodicSpline::new(&v);
            (0..4 * n)
                .map(|k| {
                    let u = k as f64 * 0.25 + 0.1;
                    (s.eval(u) - (TAU * u / n as f64).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let r = err(32) / err(64);
        assert!(r > 14.0, "ratio {r}");
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let v: Vec<f64> = (0..16).map(|i| (i as f64 * 0.4).cos()).collect();
        let s = PeriodicSpline::new(&v);
        for k in 0..40 {
            let u = 0.37 * k as f64;
            let fd = (s.eval(u + 1e-6) - s.eval(u - 1e-6)) / 2e-6;
            assert!((fd - s.deriv(u)).abs() < 1e-6);
        }
    }
}
