//! Output writers. Every file is deterministic for a fixed resolved
//! configuration: no timestamps, fixed column orders, floats printed
//! with 17 significant digits (`{:.16e}`, round-trip exact).
//!
//! CSV files start with `#`-prefixed header lines carrying the format
//! version and the resolved configuration, so each artifact is
//! self-describing.

use crate::config::RunConfig;
use crate::dynamics::{AffineCertificate, Trajectory};
use crate::scattering::{CompletenessReport, PhaseShiftCurve};
use crate::spectrum::SpectrumReport;

pub const REPORT_FORMAT_VERSION: &str = "1";

pub fn header(kind: &str, config: &RunConfig) -> String {
    format!(
        "# format: {kind} v{REPORT_FORMAT_VERSION}\n# config: {}\n",
        config.canonical_json()
    )
}

/// `{:.16e}` everywhere: 17 significant digits round-trip f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn spectrum_csv(report: &SpectrumReport, config: &RunConfig) -> String {
    let mut out = header("spectrum-csv", config);
    out.push_str("index,energy,residual\n");
    for (i, (e, r)) in report.eigenvalues.iter().zip(&report.residuals).enumerate() {
        out.push_str(&format!("{i},{},{}\n", fmt_f64(*e), fmt_f64(*r)));
    }
    out
}

pub fn phase_curve_csv(curve: &PhaseShiftCurve, config: &RunConfig) -> String {
    let mut out = header("phase-curve-csv", config);
    out.push_str("k,delta_rad,s_re,s_im\n");
    for ((k, d), s) in curve.k_values.iter().zip(&curve.delta).zip(curve.s_matrix()) {
        out.push_str(&format!("{},{},{},{}\n", fmt_f64(*k), fmt_f64(*d), fmt_f64(s.s_re), fmt_f64(s.s_im)));
    }
    out
}

pub fn trajectory_csv(traj: &Trajectory, config: &RunConfig) -> String {
    let mut out = header("trajectory-csv", config);
    out.push_str("t,l2,kinetic,shifted_potential,x2,norm1_sq,q_energy\n");
    for r in &traj.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(r.t),
            fmt_f64(r.l2_norm),
            fmt_f64(r.kinetic),
            fmt_f64(r.shifted_potential),
            fmt_f64(r.x_moment2),
            fmt_f64(r.norm1_sq),
            fmt_f64(r.q_energy),
        ));
    }
    out
}

fn json_wrap(kind: &str, config: &RunConfig, payload: serde_json::Value) -> String {
    let doc = serde_json::json!({
        "format": kind,
        "format_version": REPORT_FORMAT_VERSION,
        "config": serde_json::from_str::<serde_json::Value>(&config.canonical_json()).unwrap(),
        "result": payload,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization cannot fail");
    s.push('\n');
    s
}

pub fn potential_json(config: &RunConfig) -> String {
    let p = config.params();
    let lm = p.landmarks();
    json_wrap(
        "potential",
        config,
        serde_json::json!({
            "x0": lm.x0,
            "x_min": lm.x_min,
            "gamma": lm.gamma,
            "moment": p.negative_part_moment(),
            "criterion": p.absence_criterion(),
        }),
    )
}

pub fn spectrum_json(
    report: &SpectrumReport,
    converged: &crate::spectrum::ConvergedCount,
    boundary: &crate::spectrum::BoundaryCheck,
    config: &RunConfig,
) -> String {
    json_wrap(
        "spectrum",
        config,
        serde_json::json!({
            "count": report.count,
            "eigenvalues": report.eigenvalues,
            "residuals": report.residuals,
            "bargmann_moment": report.bargmann_moment,
            "criterion_holds": report.criterion_holds,
            "gamma": report.gamma,
            "abs_tol": report.abs_tol,
            "convergence": converged,
            "boundary": boundary,
        }),
    )
}

pub fn scatter_json(
    curve: &PhaseShiftCurve,
    n_bound: usize,
    defect: f64,
    config: &RunConfig,
) -> String {
    json_wrap(
        "scatter",
        config,
        serde_json::json!({
            "n_bound": n_bound,
            "levinson_defect_rad": defect,
            "k_min": curve.k_values.first(),
            "k_max": curve.k_values.last(),
            "n_samples": curve.k_values.len(),
            "match_radius": curve.match_radius,
            "delta_at_k_min": curve.delta.first(),
        }),
    )
}

pub fn evolve_json(
    traj: &Trajectory,
    slacks: &[f64],
    cert: &AffineCertificate,
    config: &RunConfig,
) -> String {
    let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    let r0 = &traj.records[0];
    let rn = traj.records.last().unwrap();
    json_wrap(
        "evolve",
        config,
        serde_json::json!({
            "records": traj.records.len(),
            "t_final": rn.t,
            "l2_drift": (rn.l2_norm - r0.l2_norm).abs(),
            "energy_drift_rel": ((rn.kinetic + rn.shifted_potential)
                - (r0.kinetic + r0.shifted_potential)).abs()
                / (r0.kinetic + r0.shifted_potential),
            "min_radin_simon_slack": min_slack,
            "affine": cert,
        }),
    )
}

pub fn sweep_json(
    n_samples: usize,
    all_zero: bool,
    all_converged: bool,
    config: &RunConfig,
) -> String {
    json_wrap(
        "sweep",
        config,
        serde_json::json!({
            "n_samples": n_samples,
            "all_counts_zero": all_zero,
            "all_converged": all_converged,
        }),
    )
}

pub fn completeness_json(reports: &[CompletenessReport], config: &RunConfig) -> String {
    json_wrap(
        "completeness",
        config,
        serde_json::json!({
            "samples": reports,
        }),
    )
}

/// One line of the verify-all table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyLine {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

pub fn verify_table(lines: &[VerifyLine]) -> String {
    let mut out = String::new();
    for l in lines {
        let status = if l.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status}  {:<24}  {}\n", l.label, l.detail));
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    out.push_str(&format!(
        "{} checks, {} failed\n",
        lines.len(),
        failed
    ));
    out
}

pub fn verify_json(lines: &[VerifyLine], config: &RunConfig) -> String {
    json_wrap(
        "verify-all",
        config,
        serde_json::json!({
            "checks": lines,
            "all_passed": lines.iter().all(|l| l.passed),
        }),
    )
}
