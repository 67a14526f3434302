//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use hoflow::energy::{energy, threshold_sup};
use hoflow::flow::{gronwall_monitor, FlowConfig, FlowSolver, RunResult};
use hoflow::frenet::{ellipse_consistency, grad_norm_sq, FrenetVector};
use hoflow::inequality::interp::{sine_exact, sine_sample};
use hoflow::inequality::{
    density_suite, interpolation_ratio, interpolation_suite, michael_simon_suite, sup_bound_suite, Interpolation,
    MAX_DRIFT,
};
use hoflow::initial::{circle, perturbed_circle};
use hoflow::output::diagnostics_csv;
use hoflow::surface::{convergence_study, TestField};
use hoflow::variation::gradient_consistency_ladder;
use hoflow::{DiscreteSurface, Patch, Result, SpaceForm, SurfaceKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn spaces() -> [(&'static str, SpaceForm); 3] {
    [
        ("euclidean", SpaceForm::euclidean()),
        ("sphere", SpaceForm::sphere(1.0)),
        ("hyperbolic", SpaceForm::hyperbolic(-1.0)),
    ]
}

fn standard_config(m: usize) -> FlowConfig {
    FlowConfig {
        m,
        t_end: if m == 1 { 0.5 } else { 0.05 },
        ..FlowConfig::default()
    }
}

fn standard_run(space: SpaceForm, m: usize) -> Result<RunResult> {
    let c = perturbed_circle(&space, 1.0, 0.1, 5, 7, 256)?;
    FlowSolver::new(standard_config(m))?.run(c)
}

struct StandardRuns {
    runs: Vec<(String, RunResult)>,
    seconds: f64,
}

fn standard_runs() -> Result<StandardRuns> {
    let start = Instant::now();
    let mut runs = Vec::new();
    for m in [1, 2] {
        for (name, space) in spaces() {
            runs.push((format!("{name}/m{m}"), standard_run(space, m)?));
        }
    }
    Ok(StandardRuns {
        runs,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn criterion_1(std: &StandardRuns) -> Result<Outcome> {
    let mut pass = std.seconds <= 300.0;
    let mut parts = Vec::new();
    for (name, run) in &std.runs {
        let ok = !run.blew_up() && run.max_relative_increase <= 1e-10;
        pass &= ok;
        parts.push(format!("{name} max dF/|F| {:.2e}", run.max_relative_increase));
    }
    Ok(Outcome {
        pass,
        detail: format!("{}; {:.1} s", parts.join(", "), std.seconds),
    })
}

fn criterion_2() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, space) in spaces() {
        let rep = gradient_consistency_ladder(|n| perturbed_circle(&space, 1.0, 0.1, 5, 13, n), &[128, 256, 512])?;
        let last = rep.levels.last().unwrap().error;
        pass &= last <= 1e-3 && rep.order >= 2.0;
        parts.push(format!("{name} err@512 {last:.2e} order {:.2}", rep.order));
    }
    Ok(Outcome {
        pass,
        detail: parts.join(", "),
    })
}

/// RK4 solution of `r' = −(r² − 1)/r³`.
fn radial_ode(r0: f64, t: f64) -> f64 {
    let f = |r: f64| -(r * r - 1.0) / r.powi(3);
    let steps = ((t / 1e-4).ceil() as usize).max(1);
    let h = t / steps as f64;
    let mut r = r0;
    for _ in 0..steps {
        let k1 = f(r);
        let k2 = f(r + 0.5 * h * k1);
        let k3 = f(r + 0.5 * h * k2);
        let k4 = f(r + h * k3);
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    r
}

fn criterion_3() -> Result<Outcome> {
    let c = circle(&SpaceForm::euclidean(), 1.5, 256)?;
    let cfg = FlowConfig {
        t_end: 5.0,
        sample_every: 5,
        ..FlowConfig::default()
    };
    let run = FlowSolver::new(cfg)?.run(c)?;
    let mut worst = 0.0f64;
    for r in run.records.iter().filter(|r| r.t <= 1.0) {
        let want = radial_ode(1.5, r.t);
        worst = worst.max((r.length / TAU - want).abs() / want);
    }
    let f_end = run.records.last().unwrap().energy;
    let gap = (f_end - 4.0 * PI).abs() / (4.0 * PI);
    Ok(Outcome {
        pass: !run.blew_up() && worst <= 0.01 && gap <= 1e-3,
        detail: format!("radius sup rel err {worst:.2e} on [0,1], F(5) = {f_end:.6} (rel gap {gap:.2e})"),
    })
}

fn criterion_4() -> Result<Outcome> {
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for s in 1..=5 {
        let e: Vec<f64> = [128, 256, 512]
            .iter()
            .map(|&n| ellipse_consistency(1.0, 0.8, s, n))
            .collect::<Result<_>>()?;
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            worst = worst.min(ratio);
            pass &= ratio >= 3.5;
        }
    }
    let mut graded = true;
    for s in 0..=8 {
        graded &= FrenetVector::normal_derivative(s).is_homogeneous(s as u32);
        graded &= grad_norm_sq(s).homogeneous_weight() == Some(2 * s as u32);
    }
    Ok(Outcome {
        pass: pass && graded,
        detail: format!("smallest error ratio under doubling {worst:.3}, homogeneity through s=8: {graded}"),
    })
}

fn criterion_5() -> Result<Outcome> {
    let sphere = SpaceForm::sphere(1.0);
    let s = threshold_sup(&sphere).value;
    let great = circle(&sphere, FRAC_PI_2, 256)?;
    let f = energy(&great, 1)?;
    let mut pass = s == 1.0 && f > s && (f - TAU).abs() < 1e-3;
    let mut parts = vec![format!("sphere sup {s}, great circle F_1 = {f:.6} unsatisfied")];
    for (name, space) in [
        ("euclidean", SpaceForm::euclidean()),
        ("hyperbolic", SpaceForm::hyperbolic(-1.0)),
    ] {
        let sup = threshold_sup(&space).value;
        let c = perturbed_circle(&space, 1.0, 0.3, 5, 3, 128)?;
        pass &= sup == f64::INFINITY && energy(&c, 2)? <= sup;
        parts.push(format!("{name} sup {sup}"));
    }
    Ok(Outcome {
        pass,
        detail: parts.join(", "),
    })
}

fn criterion_6() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [
        SurfaceKind::unit_sphere(),
        SurfaceKind::Ellipsoid { a: 1.0, b: 1.3, c: 0.7 },
        SurfaceKind::standard_torus(),
    ] {
        let st = convergence_study(kind, &[32, 64, 128])?;
        let slope = st.min_slope();
        pass &= slope >= 1.8;
        parts.push(format!("{:?} min slope {slope:.2}", st.surface));
    }
    let s = DiscreteSurface::new(SurfaceKind::unit_sphere(), Patch::Full, 128, 128)?;
    let d = s.divergence_identity(TestField::Normal)?;
    let want = 8.0 * PI;
    let (el, er) = ((d.lhs - want).abs() / want, (d.rhs - want).abs() / want);
    pass &= el <= 5e-3 && er <= 5e-3;
    parts.push(format!("divergence {:.5} / {:.5} vs 8π", d.lhs, d.rhs));
    Ok(Outcome {
        pass,
        detail: parts.join(", "),
    })
}

fn criterion_7() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [SurfaceKind::unit_sphere(), SurfaceKind::standard_torus()] {
        let r = michael_simon_suite(kind, 64, 100, 7)?;
        pass &= r.samples == 100 && r.passed();
        parts.push(format!("{} {}/{} violations", r.name, r.violations, r.samples));
    }
    let d = density_suite(7)?;
    pass &= d.samples > 0 && d.passed();
    parts.push(format!("density {}/{} violations", d.violations, d.samples));
    for l in sup_bound_suite(7)? {
        pass &= l.finite() && l.stable(MAX_DRIFT);
        parts.push(format!("{} drift {:.3}", l.name, l.drift));
    }
    Ok(Outcome {
        pass,
        detail: parts.join(", "),
    })
}

fn criterion_8() -> Result<Outcome> {
    let ladders = interpolation_suite(7)?;
    let mut pass = !ladders.is_empty();
    let mut worst = 1.0f64;
    for l in &ladders {
        pass &= l.finite() && l.stable(MAX_DRIFT);
        worst = worst.max(l.drift);
    }
    let sine = sine_sample(512)?;
    let mut sine_err = 0.0f64;
    for which in [Interpolation::Gn { j: 1, s: 2 }, Interpolation::Lq { j: 1, s: 2 }] {
        let exact = sine_exact(which).unwrap();
        sine_err = sine_err.max((interpolation_ratio(&sine, which)? - exact).abs() / exact);
    }
    pass &= sine_err <= 0.01;
    Ok(Outcome {
        pass,
        detail: format!(
            "{} ladders, worst drift {worst:.3}, sine rel err {sine_err:.2e}",
            ladders.len()
        ),
    })
}

fn criterion_9(std: &StandardRuns) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, run) in &std.runs {
        pass &= !run.blew_up();
        let mut sups = Vec::new();
        for k in 0..=3 {
            let g = gronwall_monitor(run, k)?;
            pass &= g.sup.is_finite() && !g.unbounded;
            sups.push(format!("{:.3e}", g.sup.sqrt()));
        }
        parts.push(format!("{name} sup|∇ᵏA| [{}]", sups.join(" ")));
    }
    let again = standard_run(SpaceForm::sphere(1.0), 1)?;
    let first = &std.runs.iter().find(|(n, _)| n == "sphere/m1").unwrap().1;
    let identical = diagnostics_csv(&first.records) == diagnostics_csv(&again.records);
    pass &= identical;
    parts.push(format!("rerun byte-identical: {identical}"));
    Ok(Outcome {
        pass,
        detail: parts.join(", "),
    })
}

fn report(id: usize, outcome: Result<Outcome>) -> bool {
    match outcome {
        Ok(o) => {
            println!("{} criterion {id}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            o.pass
        }
        Err(e) => {
            println!("FAIL criterion {id}: error: {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    let std = standard_runs();
    let mut ok = true;
    ok &= report(1, std.as_ref().map_err(Clone::clone).and_then(criterion_1));
    ok &= report(2, criterion_2());
    ok &= report(3, criterion_3());
    ok &= report(4, criterion_4());
    ok &= report(5, criterion_5());
    ok &= report(6, criterion_6());
    ok &= report(7, criterion_7());
    ok &= report(8, criterion_8());
    ok &= report(9, std.as_ref().map_err(Clone::clone).and_then(criterion_9));
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
