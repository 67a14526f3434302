//! Run artifacts: `diagnostics.csv`, `snapshot_<idx>.json`,
//! `final_report.json` and optionally `frames.svg`.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! identical runs produce identical bytes.

use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::energy::InitialConditionReport;
use crate::error::{Error, Result};
use crate::extended_float::display;
use crate::flow::{gronwall_monitor, DiagnosticsRecord, GronwallReport, RunResult, Termination};

pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const FINAL_REPORT: &str = "final_report.json";
pub const FRAMES: &str = "frames.svg";

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index}.json")
}

/// `t,F_m,length,max_kappa,normA_L2_k0,…,normA_L2_kK,normA_2m,ratio_5_5,dt`.
pub fn diagnostics_header(k_max: usize) -> String {
    let mut h = String::from("t,F_m,length,max_kappa");
    for k in 0..=k_max {
        write!(h, ",normA_L2_k{k}").unwrap();
    }
    h.push_str(",normA_2m,ratio_5_5,dt");
    h
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let k_max = records.first().map_or(0, |r| r.norm_l2.len().saturating_sub(1));
    let mut out = diagnostics_header(k_max);
    out.push('\n');
    for r in records {
        let mut cols = vec![display(r.t), display(r.energy), display(r.length), display(r.max_kappa)];
        cols.extend(r.norm_l2.iter().map(|&v| display(v)));
        cols.extend([display(r.norm_a_2m), display(r.ratio), display(r.dt)]);
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Summary written to `final_report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct FinalReport<'a> {
    pub config: &'a ExperimentConfig,
    pub termination: &'a Termination,
    pub initial_condition: &'a InitialConditionReport,
    pub steps: usize,
    pub t_final: f64,
    pub rejections: usize,
    #[serde(with = "crate::extended_float")]
    pub max_relative_increase: f64,
    pub energy_monotone: bool,
    pub initial: &'a DiagnosticsRecord,
    pub last: &'a DiagnosticsRecord,
    /// Suprema over the sampled records of `‖∇ᵏA‖_{L²}`.
    pub norm_suprema: Vec<f64>,
    pub boundedness: Vec<GronwallReport>,
    pub files: Vec<String>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| io_err(&p, e))
}

/// Writes every artifact of `run` into `dir` (created if missing) and
/// returns the file names in write order.
pub fn emit_outputs(run: &RunResult, cfg: &ExperimentConfig, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files = vec![DIAGNOSTICS.to_string()];
    write(dir, DIAGNOSTICS, &diagnostics_csv(&run.records))?;
    for s in &run.snapshots {
        let name = snapshot_name(s.index);
        let text = serde_json::to_string_pretty(s).map_err(|e| Error::Io(e.to_string()))?;
        write(dir, &name, &text)?;
        files.push(name);
    }
    if svg {
        write(dir, FRAMES, &frames_svg(run))?;
        files.push(FRAMES.to_string());
    }
    files.push(FINAL_REPORT.to_string());

    let k_max = run.records[0].norm_l2.len();
    let norm_suprema = (0..k_max)
        .map(|k| run.records.iter().fold(0.0f64, |a, r| a.max(r.norm_l2[k])))
        .collect();
    let boundedness = (0..k_max).map(|k| gronwall_monitor(run, k)).collect::<Result<_>>()?;
    let report = FinalReport {
        config: cfg,
        termination: &run.termination,
        initial_condition: &run.initial_check,
        steps: run.final_state.steps,
        t_final: run.final_state.t,
        rejections: run.rejections,
        max_relative_increase: run.max_relative_increase,
        energy_monotone: run.energy_monotone(cfg.solver.energy_tolerance),
        initial: &run.records[0],
        last: run.records.last().expect("a run records its initial state"),
        norm_suprema,
        boundedness,
        files: files.clone(),
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    write(dir, FINAL_REPORT, &text)?;
    Ok(files.into_iter().map(PathBuf::from).collect())
}

/// Snapshot polylines in chart coordinates, later frames darker.
pub fn frames_svg(run: &RunResult) -> String {
    let pts = run.snapshots.iter().flat_map(|s| s.curve.vertices.iter());
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let pad = 0.05 * span;
    let size = 512.0;
    let scale = size / (span + 2.0 * pad);
    let map = |p: &[f64; 2]| ((p[0] - lo[0] + pad) * scale, (hi[1] - p[1] + pad) * scale);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    let count = run.snapshots.len().max(1);
    for (i, s) in run.snapshots.iter().enumerate() {
        let shade = 200 - (200 * (i + 1) / count) as u32;
        let points: Vec<String> = s
            .curve
            .vertices
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(
            out,
            "  <polygon fill=\"none\" stroke=\"rgb({shade},{shade},{shade})\" stroke-width=\"1\" points=\"{}\"><title>t={}</title></polygon>",
            points.join(" "),
            display(s.t)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;
    use crate::flow::FlowSolver;

    fn small_run() -> (RunResult, ExperimentConfig) {
        let cfg = parse_config_str(
            r#"{"space": {"kind": "sphere"}, "N": 64, "t_end": 0.01, "sample_every": 2, "seed": 3,
                "solver": {"snapshot_every": 5}}"#,
        )
        .unwrap();
        let run = FlowSolver::new(cfg.flow_config())
            .unwrap()
            .run(cfg.initial_curve().unwrap())
            .unwrap();
        (run, cfg)
    }

    #[test]
    fn header_columns() {
        assert_eq!(
            diagnostics_header(2),
            "t,F_m,length,max_kappa,normA_L2_k0,normA_L2_k1,normA_L2_k2,normA_2m,ratio_5_5,dt"
        );
    }

    #[test]
    fn writes_documented_file_set() {
        let (run, cfg) = small_run();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_outputs(&run, &cfg, dir.path(), true).unwrap();
        let mut on_disk: Vec<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        on_disk.sort();
        let mut listed: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
        listed.sort();
        assert_eq!(on_disk, listed);
        assert!(listed.contains(&FRAMES.to_string()) && listed.contains(&"snapshot_0.json".to_string()));
        let csv = fs::read_to_string(dir.path().join(DIAGNOSTICS)).unwrap();
        assert_eq!(csv.lines().count(), run.records.len() + 1);
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(FINAL_REPORT)).unwrap()).unwrap();
        assert_eq!(report["termination"]["status"], "completed");
        assert_eq!(report["initial_condition"]["threshold_sup"], 1.0);

        let plain = tempfile::tempdir().unwrap();
        let files = emit_outputs(&run, &cfg, plain.path(), false).unwrap();
        assert!(!files.iter().any(|f| f.ends_with(FRAMES)));
        assert!(!plain.path().join(FRAMES).exists());
    }

    #[test]
    fn snapshot_files_reload_exactly() {
        let (run, _) = small_run();
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::default();
        emit_outputs(&run, &cfg, dir.path(), false).unwrap();
        let last = run.snapshots.last().unwrap();
        let init = crate::initial::InitialCurve::File {
            path: dir.path().join(snapshot_name(last.index)),
        };
        let curve = init.build(&run.final_state.curve.space().clone(), 0, 0).unwrap();
        assert_eq!(curve.vertices(), run.final_state.curve.vertices());
    }

    #[test]
    fn unwritable_directory() {
        let (run, cfg) = small_run();
        let file = tempfile::NamedTempFile::new().unwrap();
        assert!(matches!(
            emit_outputs(&run, &cfg, &file.path().join("sub"), false),
            Err(Error::Io(_))
        ));
    }
}
