//! Fourth-order central finite-difference stencils.
//!
//! All stencils use unit parameter spacing; callers rescale. Periodic
//! variants wrap indices modulo the slice length.

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

/// Stencil half-width.
pub const RADIUS: usize = 2;

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

#[inline]
fn apply(stencil: &[f64; 5], f: &[f64], i: usize) -> f64 {
    let n = f.len();
    let i = i as isize;
    // fixed left-to-right order keeps the result independent of the caller
    stencil[0] * f[wrap(i - 2, n)]
        + stencil[1] * f[wrap(i - 1, n)]
        + stencil[2] * f[wrap(i, n)]
        + stencil[3] * f[wrap(i + 1, n)]
        + stencil[4] * f[wrap(i + 2, n)]
}

/// First derivative at `i` of a periodic sequence (unit spacing).
#[inline]
pub fn d1_at(f: &[f64], i: usize) -> f64 {
    apply(&D1, f, i)
}

/// Second derivative at `i` of a periodic sequence (unit spacing).
#[inline]
pub fn d2_at(f: &[f64], i: usize) -> f64 {
    apply(&D2, f, i)
}

pub fn d1_periodic(f: &[f64], h: f64) -> Vec<f64> {
    (0..f.len()).map(|i| d1_at(f, i) / h).collect()
}

pub fn d2_periodic(f: &[f64], h: f64) -> Vec<f64> {
    (0..f.len()).map(|i| d2_at(f, i) / (h * h)).collect()
}

/// Non-periodic first derivative on a window: entries closer than
/// [`RADIUS`] to either end are NaN.
pub fn d1_window(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            if i < RADIUS || i + RADIUS >= n {
                f64::NAN
            } else {
                D1[0] * f[i - 2] + D1[1] * f[i - 1] + D1[2] * f[i] + D1[3] * f[i + 1] + D1[4] * f[i + 2]
            }
        })
        .collect()
}

/// Non-periodic second derivative on a window; see [`d1_window`].
pub fn d2_window(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            if i < RADIUS || i + RADIUS >= n {
                f64::NAN
            } else {
                D2[0] * f[i - 2] + D2[1] * f[i - 1] + D2[2] * f[i] + D2[3] * f[i + 1] + D2[4] * f[i + 2]
            }
        })
        .collect()
}

/// Non-periodic first derivative along one axis of a strided buffer; see
/// [`d1_window`]. Used by the surface grids.
#[inline]
pub fn d1_strided(f: &[f64], i: usize, stride: usize) -> f64 {
    D1[0] * f[i - 2 * stride] + D1[1] * f[i - stride] + D1[3] * f[i + stride] + D1[4] * f[i + 2 * stride]
}

#[inline]
pub fn d2_strided(f: &[f64], i: usize, stride: usize) -> f64 {
    D2[0] * f[i - 2 * stride] + D2[1] * f[i - stride] + D2[2] * f[i] + D2[3] * f[i + stride] + D2[4] * f[i + 2 * stride]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn periodic_derivatives_of_sine_are_fourth_order() {
        let err = |n: usize| {
            let h = TAU / n as f64;
            let f: Vec<f64> = (0..n).map(|i| (3.0 * i as f64 * h).sin()).collect();
            let d1 = d1_periodic(&f, h);
            let d2 = d2_periodic(&f, h);
            (0..n)
                .map(|i| {
                    let x = i as f64 * h;
                    (d1[i] - 3.0 * (3.0 * x).cos())
                        .abs()
                        .max((d2[i] + 9.0 * (3.0 * x).sin()).abs())
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 / e2 > 14.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn window_derivative_marks_edges() {
        let f: Vec<f64> = (0..7).map(|i| (i * i) as f64).collect();
        let d = d1_window(&f);
        assert!(d[0].is_nan() && d[1].is_nan() && d[5].is_nan() && d[6].is_nan());
        assert!((d[3] - 6.0).abs() < 1e-12);
    }
}
