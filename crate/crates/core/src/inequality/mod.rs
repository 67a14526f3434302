//! Numerical checks of Sobolev-type inequalities on sampled curves and
//! surfaces. Every check is one-sided: `holds` means `lhs ≤ rhs` up to a
//! relative discretization slack.

pub mod density;
pub mod field;
pub mod interp;
pub mod sobolev;
pub mod supbound;

use serde::Serialize;

pub use density::{density_ratio_monotonicity, density_suite, weighted_density_monotonicity, MeasureSample};
pub use field::{BandLimitedField, NodalField, PeriodicSamples};
pub use interp::{interpolation_ratio, interpolation_suite, Interpolation, LadderReport};
pub use sobolev::{michael_simon_suite, sobolev_constant, verify_michael_simon};
pub use supbound::{sup_bound_check, sup_bound_suite};

/// Relative slack allowed on the right side of a one-sided check.
pub const DEFAULT_TOLERANCE: f64 = 0.01;

/// Largest allowed ratio between empirical constants on a refinement ladder.
pub const MAX_DRIFT: f64 = 2.0;

/// Outcome of a family of one-sided checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen (0 when every right side vanished).
    pub worst_ratio: f64,
}

impl SuiteReport {
    pub fn new(name: String) -> Self {
        SuiteReport {
            name,
            samples: 0,
            violations: 0,
            worst_ratio: 0.0,
        }
    }

    pub fn record(&mut self, lhs: f64, rhs: f64, holds: bool) {
        self.samples += 1;
        if !holds {
            self.violations += 1;
        }
        if rhs > 0.0 {
            self.worst_ratio = self.worst_ratio.max(lhs / rhs);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}
