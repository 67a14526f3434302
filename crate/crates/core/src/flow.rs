//! Time integration of `∂φ/∂t = −E_m ν` with an energy-decrease guard,
//! uniform-arclength remeshing and blow-up detection.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::curve::{CurvatureJet, CurveSnapshot, DiscreteCurve};
use crate::energy::{check_initial_condition, energy_from_jet, InitialConditionReport};
use crate::error::{Error, Result};
use crate::space::Point;
use crate::variation::{default_step, discrete_gradient, euler_lagrange_m1_from_jet, GradientField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Linearly implicit Euler: the displacement is preconditioned by the
    /// leading-order symbol `1 + 2 dt k^{2m+2}` of the linearized flow.
    SemiImplicit,
    /// Forward Euler under the CFL cap `dt ≤ cfl · (L/N)^{2m+2}`.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub m: usize,
    pub t_end: f64,
    pub integrator: Integrator,
    pub dt_initial: f64,
    /// Step cap for the semi-implicit integrator.
    pub dt_max: f64,
    /// CFL constant for the explicit integrator.
    pub cfl: f64,
    pub growth: f64,
    pub max_halvings: u32,
    /// Accepted steps satisfy `F_new − F ≤ energy_tolerance · |F|`.
    pub energy_tolerance: f64,
    pub max_kappa: f64,
    /// Probe size for the discrete gradient (`m ≥ 2`); default `10⁻⁴ L/N`.
    pub h_fd: Option<f64>,
    /// Highest `k` in the recorded `‖∇ᵏA‖` norms.
    pub norm_order: usize,
    pub sample_every: usize,
    /// Snapshot cadence in steps; 0 keeps only the initial and final curves.
    pub snapshot_every: usize,
    pub max_steps: Option<usize>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            m: 1,
            t_end: 1.0,
            integrator: Integrator::SemiImplicit,
            dt_initial: 1e-6,
            dt_max: 1e-3,
            cfl: 0.02,
            growth: 1.2,
            max_halvings: 40,
            energy_tolerance: 1e-10,
            max_kappa: 1e6,
            h_fd: None,
            norm_order: 3,
            sample_every: 10,
            snapshot_every: 0,
            max_steps: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.m < 1 {
            errs.push("m must be ≥ 1 for n=1".to_string());
        }
        let positive = [
            ("t_end", self.t_end),
            ("dt_initial", self.dt_initial),
            ("dt_max", self.dt_max),
            ("cfl", self.cfl),
            ("energy_tolerance", self.energy_tolerance),
            ("max_kappa", self.max_kappa),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.growth >= 1.0 && self.growth.is_finite()) {
            errs.push(format!("growth must be ≥ 1, got {}", self.growth));
        }
        if let Some(h) = self.h_fd {
            if !(h > 0.0 && h.is_finite()) {
                errs.push(format!("h_fd must be positive, got {h}"));
            }
        }
        if self.sample_every == 0 {
            errs.push("sample_every must be ≥ 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    fn jet_order(&self) -> usize {
        self.norm_order.max(2).max(self.m.saturating_sub(1))
    }
}

/// A point on the discrete trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub curve: DiscreteCurve,
    pub energy: f64,
    pub field: GradientField,
    /// Last accepted step (the initial step proposal before the first step).
    pub dt_last: f64,
    pub steps: usize,
    jet: CurvatureJet,
    weights: Vec<f64>,
}

impl FlowState {
    pub fn new(curve: DiscreteCurve, cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let jet = curve.curvature_jet(cfg.jet_order())?;
        let weights = curve.induced_metric().weights;
        let energy = energy_from_jet(&jet, &weights, cfg.m)?;
        let field = gradient_field(&curve, &jet, cfg)?;
        Ok(FlowState {
            t: 0.0,
            curve,
            energy,
            field,
            dt_last: cfg.dt_initial,
            steps: 0,
            jet,
            weights,
        })
    }

    pub fn jet(&self) -> &CurvatureJet {
        &self.jet
    }

    pub fn max_kappa(&self) -> f64 {
        self.jet.kappa(0).iter().fold(0.0, |a, k| a.max(k.abs()))
    }

    /// Diagnostics with curvature norms up to `k_max` (at most the stored
    /// jet order).
    pub fn diagnostics(&self, m: usize, k_max: usize) -> DiagnosticsRecord {
        let norms = norms_from_jet(&self.jet, &self.weights, k_max.min(self.jet.order()));
        let two_m = 2 * m as i32;
        let a_2m = self
            .jet
            .kappa(0)
            .iter()
            .zip(&self.weights)
            .map(|(k, w)| w * k.abs().powi(two_m))
            .sum::<f64>()
            .powf(1.0 / two_m as f64);
        DiagnosticsRecord {
            t: self.t,
            energy: self.energy,
            length: self.weights.iter().sum(),
            max_kappa: self.max_kappa(),
            norm_l2: norms.l2,
            norm_a_2m: a_2m,
            ratio: a_2m / self.energy.powf(1.0 / two_m as f64),
            dt: if self.steps == 0 { 0.0 } else { self.dt_last },
        }
    }
}

fn gradient_field(curve: &DiscreteCurve, jet: &CurvatureJet, cfg: &FlowConfig) -> Result<GradientField> {
    if cfg.m == 1 {
        Ok(GradientField {
            values: euler_lagrange_m1_from_jet(jet.kappa(0), jet.kappa(2), curve.space().curvature()),
        })
    } else {
        let h = cfg.h_fd.unwrap_or_else(|| default_step(curve));
        discrete_gradient(curve, cfg.m, h)
    }
}

/// One sample of the diagnostics time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    #[serde(rename = "F_m")]
    pub energy: f64,
    pub length: f64,
    pub max_kappa: f64,
    /// `‖∇ᵏA‖_{L²}` for `k = 0..=K`.
    pub norm_l2: Vec<f64>,
    /// `‖A‖_{L^{2m}}`.
    pub norm_a_2m: f64,
    /// `‖A‖_{2m} / F_m^{1/(2m)}`.
    pub ratio: f64,
    pub dt: f64,
}

/// `‖∇ᵏA‖` in `L²` and `L∞` for `k = 0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureNorms {
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
}

fn norms_from_jet(jet: &CurvatureJet, weights: &[f64], k_max: usize) -> CurvatureNorms {
    let mut l2 = Vec::with_capacity(k_max + 1);
    let mut linf = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let o = jet.kappa(k);
        l2.push(o.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt());
        linf.push(o.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    CurvatureNorms { l2, linf }
}

pub fn curvature_norms(curve: &DiscreteCurve, k_max: usize) -> Result<CurvatureNorms> {
    let jet = curve.curvature_jet(k_max)?;
    Ok(norms_from_jet(&jet, &curve.induced_metric().weights, k_max))
}

/// Bookkeeping for one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepReport {
    pub dt: f64,
    pub halvings: u32,
    pub energy_change: f64,
    /// `ΔF / |F|` of the accepted step.
    pub relative_change: f64,
}

enum Attempt {
    Accepted(Box<FlowState>, f64),
    Rejected(&'static str),
}

/// Owns the FFT plans reused across steps.
type FftPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

pub struct FlowSolver {
    cfg: FlowConfig,
    plans: Option<(usize, FftPair)>,
}

impl FlowSolver {
    pub fn new(cfg: FlowConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(FlowSolver { cfg, plans: None })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    /// Largest admissible step for the current curve.
    pub fn dt_cap(&self, curve: &DiscreteCurve) -> f64 {
        match self.cfg.integrator {
            Integrator::SemiImplicit => self.cfg.dt_max,
            Integrator::Explicit => {
                let h = curve.length() / curve.len() as f64;
                self.cfg.cfl * h.powi(2 * self.cfg.m as i32 + 2)
            }
        }
    }

    fn plans(&mut self, n: usize) -> FftPair {
        match &self.plans {
            Some((k, pair)) if *k == n => pair.clone(),
            _ => {
                let mut p = FftPlanner::new();
                let f = p.plan_fft_forward(n);
                let i = p.plan_fft_inverse(n);
                self.plans = Some((n, (f.clone(), i.clone())));
                (f, i)
            }
        }
    }

    /// Chart displacement for step `dt`.
    fn displacement(&mut self, s: &FlowState, dt: f64) -> Vec<Point> {
        let jet = &s.jet;
        let raw = (0..s.curve.len()).map(|i| {
            let c = -dt * s.field.values[i] / jet.lambda[i];
            [c * jet.normals[i][0], c * jet.normals[i][1]]
        });
        match self.cfg.integrator {
            Integrator::Explicit => raw.collect(),
            Integrator::SemiImplicit => {
                let n = s.curve.len();
                let (fwd, inv) = self.plans(n);
                let mut buf: Vec<Complex64> = raw.map(|d| Complex64::new(d[0], d[1])).collect();
                fwd.process(&mut buf);
                let length: f64 = s.weights.iter().sum();
                let p = 2 * self.cfg.m as i32 + 2;
                for (j, z) in buf.iter_mut().enumerate() {
                    let freq = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                    let k = TAU * freq / length;
                    *z /= (1.0 + 2.0 * dt * k.powi(p)) * n as f64;
                }
                inv.process(&mut buf);
                buf.iter().map(|z| [z.re, z.im]).collect()
            }
        }
    }

    fn attempt(&mut self, s: &FlowState, dt: f64) -> Result<Attempt> {
        let disp = self.displacement(s, dt);
        let space = *s.curve.space();
        let mut moved = Vec::with_capacity(disp.len());
        for (p, d) in s.curve.vertices().iter().zip(&disp) {
            let q = [p[0] + d[0], p[1] + d[1]];
            if !space.in_chart(q) {
                return Ok(Attempt::Rejected("chart exit"));
            }
            moved.push(q);
        }
        let curve = match DiscreteCurve::from_trusted(space, moved).reparametrize() {
            Ok(c) => c,
            Err(Error::DegenerateCurve(_)) | Err(Error::CurveLeavesChart { .. }) => {
                return Ok(Attempt::Rejected("degenerate remesh"))
            }
            Err(e) => return Err(e),
        };
        let jet = curve.curvature_jet(self.cfg.jet_order())?;
        let weights = curve.induced_metric().weights;
        let energy = energy_from_jet(&jet, &weights, self.cfg.m)?;
        let change = energy - s.energy;
        if !(change <= self.cfg.energy_tolerance * s.energy.abs()) {
            return Ok(Attempt::Rejected("energy increase"));
        }
        let field = gradient_field(&curve, &jet, &self.cfg)?;
        Ok(Attempt::Accepted(
            Box::new(FlowState {
                t: s.t + dt,
                curve,
                energy,
                field,
                dt_last: dt,
                steps: s.steps + 1,
                jet,
                weights,
            }),
            change,
        ))
    }

    /// Advances one accepted step, halving `dt` on rejection.
    pub fn step(&mut self, s: &FlowState) -> Result<(FlowState, StepReport)> {
        self.step_until(s, f64::INFINITY)
    }

    fn step_until(&mut self, s: &FlowState, t_stop: f64) -> Result<(FlowState, StepReport)> {
        let mut dt = (s.dt_last * self.cfg.growth).min(self.dt_cap(&s.curve));
        let remaining = t_stop - s.t;
        if remaining < dt {
            dt = remaining;
        }
        let mut halvings = 0;
        loop {
            match self.attempt(s, dt)? {
                Attempt::Accepted(next, change) => {
                    let mut next = *next;
                    if dt == remaining {
                        next.t = t_stop;
                        if halvings == 0 {
                            // a step clipped to land on t_stop keeps the proposal
                            next.dt_last = next.dt_last.max(s.dt_last);
                        }
                    }
                    if next.max_kappa() > self.cfg.max_kappa {
                        return Err(Error::BlowUp {
                            t: next.t,
                            reason: format!("max |κ| = {:e} exceeds {:e}", next.max_kappa(), self.cfg.max_kappa),
                        });
                    }
                    let report = StepReport {
                        dt,
                        halvings,
                        energy_change: change,
                        relative_change: change / s.energy.abs(),
                    };
                    return Ok((next, report));
                }
                Attempt::Rejected(why) => {
                    if halvings >= self.cfg.max_halvings {
                        return Err(Error::BlowUp {
                            t: s.t,
                            reason: format!("step size underflow at dt = {dt:e} after {halvings} halvings ({why})"),
                        });
                    }
                    halvings += 1;
                    dt *= 0.5;
                }
            }
        }
    }

    /// Integrates to `t_end`, calling `observe` on every sampled record.
    pub fn run_with(
        &mut self,
        initial: DiscreteCurve,
        mut observe: impl FnMut(&DiagnosticsRecord),
    ) -> Result<RunResult> {
        let cfg = self.cfg.clone();
        let initial_check = check_initial_condition(&initial, cfg.m)?;
        let mut state = FlowState::new(initial, &cfg)?;
        let mut out = RunResult {
            records: Vec::new(),
            snapshots: vec![Snapshot::of(&state, 0)],
            initial_check,
            termination: Termination::Completed,
            rejections: 0,
            max_relative_increase: f64::NEG_INFINITY,
            final_state: state.clone(),
        };
        let first = state.diagnostics(cfg.m, cfg.norm_order);
        observe(&first);
        out.records.push(first);

        while state.t < cfg.t_end {
            if cfg.max_steps.is_some_and(|k| state.steps >= k) {
                break;
            }
            match self.step_until(&state, cfg.t_end) {
                Ok((next, rep)) => {
                    out.rejections += rep.halvings as usize;
                    out.max_relative_increase = out.max_relative_increase.max(rep.relative_change);
                    state = next;
                }
                Err(Error::BlowUp { t, reason }) => {
                    out.termination = Termination::BlowUp { t, reason };
                    break;
                }
                Err(e) => return Err(e),
            }
            let done = state.t >= cfg.t_end;
            if state.steps % cfg.sample_every == 0 || done {
                let r = state.diagnostics(cfg.m, cfg.norm_order);
                observe(&r);
                out.records.push(r);
            }
            if cfg.snapshot_every > 0 && state.steps % cfg.snapshot_every == 0 && !done {
                out.snapshots.push(Snapshot::of(&state, out.snapshots.len()));
            }
        }
        if out.records.last().map(|r| r.t) != Some(state.t) {
            let r = state.diagnostics(cfg.m, cfg.norm_order);
            observe(&r);
            out.records.push(r);
        }
        out.snapshots.push(Snapshot::of(&state, out.snapshots.len()));
        out.final_state = state;
        Ok(out)
    }

    pub fn run(&mut self, initial: DiscreteCurve) -> Result<RunResult> {
        self.run_with(initial, |_| {})
    }
}

/// Single step with a fresh solver.
pub fn step(state: &FlowState, cfg: &FlowConfig) -> Result<(FlowState, StepReport)> {
    FlowSolver::new(cfg.clone())?.step(state)
}

/// Full run with a fresh solver.
pub fn run(initial: DiscreteCurve, cfg: &FlowConfig) -> Result<RunResult> {
    FlowSolver::new(cfg.clone())?.run(initial)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowUp { t: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub index: usize,
    pub step: usize,
    pub t: f64,
    pub curve: CurveSnapshot,
}

impl Snapshot {
    fn of(s: &FlowState, index: usize) -> Self {
        Snapshot {
            index,
            step: s.steps,
            t: s.t,
            curve: CurveSnapshot::from(&s.curve),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub initial_check: InitialConditionReport,
    pub termination: Termination,
    /// Total halvings over all accepted steps.
    pub rejections: usize,
    /// Largest `ΔF / |F|` over accepted steps.
    pub max_relative_increase: f64,
    /// Last accepted state.
    pub final_state: FlowState,
}

impl RunResult {
    pub fn blew_up(&self) -> bool {
        matches!(self.termination, Termination::BlowUp { .. })
    }

    /// Whether the sampled energies never increase beyond the step
    /// tolerance and never exceed the initial energy.
    pub fn energy_monotone(&self, tol: f64) -> bool {
        let f0 = self.records[0].energy;
        self.records
            .windows(2)
            .all(|w| w[1].energy - w[0].energy <= tol * w[0].energy.abs())
            && self.records.iter().all(|r| r.energy <= f0 * (1.0 + tol))
    }
}

/// Boundedness probe for `‖∇ᵏA‖²_{L²}` along a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallReport {
    pub k: usize,
    pub initial: f64,
    pub sup: f64,
    /// `max(initial, 10·initial + 1)`.
    pub bound: f64,
    pub exceeded: bool,
    pub blew_up: bool,
    /// Least-squares slope in `t` over the second half of the samples.
    pub late_trend: f64,
    pub unbounded: bool,
}

pub fn gronwall_monitor(run: &RunResult, k: usize) -> Result<GronwallReport> {
    let avail = run.records[0].norm_l2.len();
    if k >= avail {
        return Err(Error::InsufficientJet {
            needed: k,
            available: avail.saturating_sub(1),
        });
    }
    let sq: Vec<(f64, f64)> = run.records.iter().map(|r| (r.t, r.norm_l2[k].powi(2))).collect();
    let initial = sq[0].1;
    let sup = sq.iter().fold(0.0f64, |a, p| a.max(p.1));
    let bound = initial.max(10.0 * initial + 1.0);
    let tail = &sq[sq.len() / 2..];
    let late_trend = if tail.len() >= 2 && tail[0].0 < tail[tail.len() - 1].0 {
        crate::stats::slope(tail)
    } else {
        0.0
    };
    let exceeded = !(sup <= bound);
    let blew_up = run.blew_up();
    Ok(GronwallReport {
        k,
        initial,
        sup,
        bound,
        exceeded,
        blew_up,
        late_trend,
        unbounded: exceeded || blew_up,
    })
}

/// Algebraic least-squares circle through the chart vertices: returns the
/// centre, radius and largest radial deviation. Chart circles are geodesic
/// circles in all three models.
pub fn best_fit_circle(curve: &DiscreteCurve) -> (Point, f64, f64) {
    // minimise Σ (x² + y² + D x + E y + F)²
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for p in curve.vertices() {
        let row = [p[0], p[1], 1.0];
        let rhs = -(p[0] * p[0] + p[1] * p[1]);
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += row[r] * row[c];
            }
            b[r] += row[r] * rhs;
        }
    }
    let [d, e, f] = solve3(a, b);
    let centre = [-d / 2.0, -e / 2.0];
    let radius = (centre[0] * centre[0] + centre[1] * centre[1] - f).sqrt();
    let dev = curve
        .vertices()
        .iter()
        .map(|p| ((p[0] - centre[0]).hypot(p[1] - centre[1]) - radius).abs())
        .fold(0.0, f64::max);
    (centre, radius, dev)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}
