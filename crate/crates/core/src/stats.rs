//! Small fitting helpers shared by the convergence studies.

/// Least-squares slope of `y` against `x`.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Observed order `p` of `errors[k] ∝ h_k^p` where consecutive levels
/// halve `h`: the least-squares slope of `log₂ error` per halving.
pub fn halving_order(errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = errors.iter().enumerate().map(|(k, e)| (k as f64, e.log2())).collect();
    -slope(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        assert!((halving_order(&[1.0, 0.25, 0.0625]) - 2.0).abs() < 1e-12);
        assert!((slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]) - 2.0).abs() < 1e-12);
    }
}
