//! Command-line front end: configuration loading, subcommand drivers,
//! file outputs, and exit-code policy.
//!
//! Exit codes: 0 success, 1 verification failure (a checked inequality
//! or count came out wrong), 2 configuration error, 3 numerical
//! non-convergence. Output directory precedence: `--out`, then the
//! `LJHL_OUT` environment variable, then `./ljhl-out`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{parse_toml, Overrides, RawConfig, RunConfig};
use crate::dynamics::{
    ballistic_guard_ok, default_dt, evolve, gaussian_packet, verify_affine_bound,
    verify_radin_simon,
};
use crate::error::{Error, Result};
use crate::grid::{build_grid, Grid, SpacingPolicy};
use crate::operator::assemble_hamiltonian;
use crate::potential::{LJParams, PotentialSpec};
use crate::report::{self, VerifyLine};
use crate::scattering::{
    auto_match_radius, completeness_probe, find_levinson_anchor, levinson_defect,
    phase_shift, phase_shift_curve,
};
use crate::spectrum::{
    boundary_behavior_check, converged_negative_count, essential_spectrum_probe,
    negative_eigenvalues,
};

#[derive(Parser, Debug)]
#[command(name = "ljhl", version, about = "Half-line 12-6 Schrodinger operator: spectra, scattering, dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides LJHL_OUT and the default ./ljhl-out).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Core strength; overrides the config file.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Well strength; overrides the config file.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Worker threads for parallel sections (0 = runtime default).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Landmarks, Bargmann moment, and the absence criterion.
    Potential,
    /// Negative eigenvalues with convergence and boundary checks.
    Spectrum,
    /// Phase-shift curve, S-matrix, and the Levinson defect.
    Scatter,
    /// Wavepacket trajectory with the moment and affine bounds.
    Evolve,
    /// Every verification on one parameter point.
    VerifyAll,
    /// Seeded parameter sweep over the absence-criterion region.
    Sweep,
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. } | Error::Config(_) | Error::Io(_) => 2,
        Error::Unconverged { .. } | Error::Numerical { .. } => 3,
    }
}

pub fn run(cli: Cli) -> i32 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn run_inner(cli: Cli) -> Result<i32> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_toml(&text)?
        }
        None => RawConfig::default(),
    };
    raw.apply_overrides(Overrides {
        alpha: cli.alpha,
        beta: cli.beta,
        seed: cli.seed,
        threads: cli.threads,
    });
    if matches!(cli.command, Command::Sweep) {
        // the sweep draws its own (alpha, beta) pairs; point values are
        // only placeholders in the embedded config
        raw.alpha.get_or_insert(1.0);
        raw.beta.get_or_insert(1.0);
    }
    let config = raw.resolve()?;

    if config.threads > 0 {
        // ignore the error when a pool already exists (tests call run()
        // repeatedly in one process)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(config.threads).build_global();
    }

    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("LJHL_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ljhl-out"));
    fs::create_dir_all(&out_dir)?;

    match cli.command {
        Command::Potential => cmd_potential(&config, &out_dir),
        Command::Spectrum => cmd_spectrum(&config, &out_dir),
        Command::Scatter => cmd_scatter(&config, &out_dir),
        Command::Evolve => cmd_evolve(&config, &out_dir),
        Command::VerifyAll => cmd_verify_all(&config, &out_dir),
        Command::Sweep => cmd_sweep(&config, &out_dir),
    }
}

fn write(out_dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::write(out_dir.join(name), content)?;
    Ok(())
}

fn config_grid(config: &RunConfig) -> Result<Grid> {
    build_grid(config.grid.eps, config.grid.l, config.grid.n, config.grid.policy)
}

fn cmd_potential(config: &RunConfig, out_dir: &Path) -> Result<i32> {
    let p = config.params();
    let lm = p.landmarks();
    write(out_dir, "potential.json", &report::potential_json(config))?;
    println!(
        "x0 = {}  x_min = {}  gamma = {}  moment = {}  criterion = {}",
        lm.x0,
        lm.x_min,
        lm.gamma,
        p.negative_part_moment(),
        p.absence_criterion()
    );
    Ok(0)
}

fn cmd_spectrum(config: &RunConfig, out_dir: &Path) -> Result<i32> {
    let grid = config_grid(config)?;
    let spec = PotentialSpec::LennardJones(config.params());
    let op = assemble_hamiltonian(&grid, spec)?;
    let rep = negative_eigenvalues(&op, config.spectrum.abs_tol)?;
    let boundary = boundary_behavior_check(&op, &rep)?;
    let conv = converged_negative_count(
        config.params(),
        config.grid.eps,
        config.grid.l,
        config.grid.n,
        config.spectrum.abs_tol,
    )?;
    write(out_dir, "spectrum.csv", &report::spectrum_csv(&rep, config))?;
    write(out_dir, "spectrum.json", &report::spectrum_json(&rep, &conv, &boundary, config))?;
    if !conv.converged {
        eprintln!(
            "count unstable: {} / {} / {} at (n, 2n, doubled box); refine the grid",
            conv.count, conv.count_refined, conv.count_extended
        );
        return Err(Error::unconverged(
            "spectrum",
            "negative-eigenvalue count not stable under refinement".to_string(),
        ));
    }
    println!("count = {} (converged), moment = {}", rep.count, rep.bargmann_moment);
    Ok(0)
}

fn cmd_scatter(config: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = PotentialSpec::LennardJones(config.params());
    // bound-state count re-derived here so the defect is a genuine
    // cross-module consistency statement
    let conv = converged_negative_count(
        config.params(),
        config.grid.eps,
        config.grid.l,
        config.grid.n,
        config.spectrum.abs_tol,
    )?;
    if !conv.converged {
        return Err(Error::unconverged(
            "scatter",
            "bound-state count not stable under refinement".to_string(),
        ));
    }
    let n_bound = conv.count;

    let k_min = config.scatter.k_min;
    let radius = match config.scatter.match_radius {
        Some(r) => r,
        None => auto_match_radius(spec, k_min)?,
    };
    let k_max = match config.scatter.k_max {
        Some(k) => k,
        None => find_levinson_anchor(spec, config.grid.eps, radius, k_min)?,
    };
    let n_k = config.scatter.n_k;
    let ks: Vec<f64> = (0..n_k)
        .map(|i| k_min + (k_max - k_min) * i as f64 / (n_k - 1) as f64)
        .collect();
    let curve = phase_shift_curve(spec, config.grid.eps, &ks, radius)?;
    let defect = levinson_defect(&curve, n_bound)?;

    write(out_dir, "phase_curve.csv", &report::phase_curve_csv(&curve, config))?;
    write(out_dir, "scatter.json", &report::scatter_json(&curve, n_bound, defect, config))?;

    let worst_s = curve
        .s_matrix()
        .iter()
        .map(|s| ((s.s_re * s.s_re + s.s_im * s.s_im).sqrt() - 1.0).abs())
        .fold(0.0f64, f64::max);
    println!(
        "n_bound = {n_bound}, levinson defect = {defect} rad, max |S|-1 = {worst_s}"
    );
    if defect >= 0.05 * std::f64::consts::PI || worst_s > 1e-10 {
        return Ok(1);
    }
    Ok(0)
}

fn cmd_evolve(config: &RunConfig, out_dir: &Path) -> Result<i32> {
    let grid = config_grid(config)?;
    let spec = PotentialSpec::LennardJones(config.params());
    let op = assemble_hamiltonian(&grid, spec)?;
    let ev = &config.evolve;
    let psi0 = gaussian_packet(&grid, ev.center, ev.k0, ev.width)?;
    let dominant = ev.k0 * ev.k0 + 1.0 / (4.0 * ev.width * ev.width);
    let dt = ev.dt.unwrap_or_else(|| default_dt(dominant));
    let t_total = dt * ev.n_steps as f64;
    if !ballistic_guard_ok(&grid, ev.center, ev.k0, ev.width, t_total) {
        return Err(Error::numerical(
            "evolve",
            format!(
                "packet would reach within five widths of the right edge before t = {t_total}; \
                 shorten the run or enlarge the box"
            ),
        ));
    }
    let traj = evolve(&op, &psi0, dt, ev.n_steps, ev.record_every)?;
    let slacks = verify_radin_simon(&traj)?;
    let cert = verify_affine_bound(&traj)?;

    write(out_dir, "trajectory.csv", &report::trajectory_csv(&traj, config))?;
    write(out_dir, "evolve.json", &report::evolve_json(&traj, &slacks, &cert, config))?;

    let slack_ok = slacks.iter().enumerate().all(|(i, s)| {
        let rhs = s + traj.records[i].x_moment2.sqrt();
        *s >= -1e-6 * rhs.max(1.0)
    });
    let affine_ok = cert.max_violation <= 1e-6;
    println!(
        "records = {}, min slack = {:.3e}, affine violation = {:.3e}",
        traj.records.len(),
        slacks.iter().copied().fold(f64::INFINITY, f64::min),
        cert.max_violation
    );
    if slack_ok && affine_ok {
        Ok(0)
    } else {
        Ok(1)
    }
}

fn push(lines: &mut Vec<VerifyLine>, label: &str, passed: bool, detail: String) {
    lines.push(VerifyLine { label: label.to_string(), passed, detail });
}

fn cmd_verify_all(config: &RunConfig, out_dir: &Path) -> Result<i32> {
    let params = config.params();
    let spec = PotentialSpec::LennardJones(params);
    let lm = params.landmarks();
    let mut lines: Vec<VerifyLine> = Vec::new();

    // continuum levels approach the free Dirichlet box levels
    match essential_spectrum_probe(params, config.grid.eps, 5e-3, &[60.0, 120.0], 3, 1e-9) {
        Err(e) => push(&mut lines, "essential-spectrum", false, format!("probe failed: {e}")),
        Ok(rows) => {
            let worst = rows.iter().map(|r| r.rel_deviation).fold(0.0f64, f64::max);
            let e_small = rows.iter().find(|r| r.l == 60.0 && r.mode == 0).unwrap().energy;
            let e_large = rows.iter().find(|r| r.l == 120.0 && r.mode == 0).unwrap().energy;
            let halving = (e_large.sqrt() / e_small.sqrt() - 0.5).abs();
            push(
                &mut lines,
                "essential-spectrum",
                worst < 0.05 && halving < 0.025,
                format!("box-level deviation {worst:.2e}, sqrt-halving defect {halving:.2e}"),
            );
        }
    }

    // finite, refinement-stable count
    let conv = converged_negative_count(
        params,
        config.grid.eps,
        config.grid.l,
        config.grid.n,
        config.spectrum.abs_tol,
    )?;
    push(
        &mut lines,
        "finite-spectrum",
        conv.converged,
        format!(
            "count {} / {} / {} at (n, 2n, doubled box)",
            conv.count, conv.count_refined, conv.count_extended
        ),
    );
    let n_bound = conv.count;

    // absence inside the criterion region, Bargmann cap outside
    let moment = params.negative_part_moment();
    if params.absence_criterion() {
        push(
            &mut lines,
            "bound-state-count",
            n_bound == 0,
            format!("criterion holds (moment {moment:.4}), count {n_bound}"),
        );
    } else {
        let cap = moment.floor() as usize;
        push(
            &mut lines,
            "bound-state-count",
            n_bound <= cap,
            format!("count {n_bound} <= Bargmann cap {cap}"),
        );
    }

    // eigenfunction decay at the origin
    let grid = config_grid(config)?;
    let op = assemble_hamiltonian(&grid, spec)?;
    let rep = negative_eigenvalues(&op, config.spectrum.abs_tol)?;
    if rep.count == 0 {
        push(&mut lines, "boundary-decay", true, "no bound states to probe".to_string());
    } else {
        let b = boundary_behavior_check(&op, &rep)?;
        let g = &b.per_state[0];
        push(
            &mut lines,
            "boundary-decay",
            g.ratio_increasing && !g.inconclusive && (0.7..=1.3).contains(&g.decay_slope),
            format!(
                "|psi|/x increasing: {}, decay slope {:.3}",
                g.ratio_increasing, g.decay_slope
            ),
        );
    }

    // Levinson consistency plus curve hygiene
    let k_min = config.scatter.k_min;
    match auto_match_radius(spec, k_min)
        .and_then(|r| Ok((r, find_levinson_anchor(spec, config.grid.eps, r, k_min)?)))
        .and_then(|(r, anchor)| {
            let ks: Vec<f64> = (0..config.scatter.n_k)
                .map(|i| k_min + (anchor - k_min) * i as f64 / (config.scatter.n_k - 1) as f64)
                .collect();
            phase_shift_curve(spec, config.grid.eps, &ks, r)
        }) {
        Err(e) => {
            push(&mut lines, "levinson", false, format!("curve failed: {e}"));
            push(&mut lines, "s-matrix-unitarity", false, "no curve".to_string());
            push(&mut lines, "radius-stability", false, "no curve".to_string());
        }
        Ok(curve) => {
            let defect = levinson_defect(&curve, n_bound)?;
            push(
                &mut lines,
                "levinson",
                defect < 0.05 * std::f64::consts::PI,
                format!("|delta(k_min) - {n_bound} pi| = {defect:.4} rad"),
            );
            let worst_s = curve
                .s_matrix()
                .iter()
                .map(|s| ((s.s_re * s.s_re + s.s_im * s.s_im).sqrt() - 1.0).abs())
                .fold(0.0f64, f64::max);
            push(&mut lines, "s-matrix-unitarity", worst_s <= 1e-10, format!("max ||S|-1| = {worst_s:.2e}"));
            let mid = curve.k_values[curve.k_values.len() / 2];
            let d1 = phase_shift(spec, mid, config.grid.eps, curve.match_radius)?;
            let d2 = phase_shift(spec, mid, config.grid.eps, curve.match_radius * 1.5)?;
            push(
                &mut lines,
                "radius-stability",
                (d1 - d2).abs() < 1e-6,
                format!("|delta(R) - delta(1.5R)| = {:.2e} rad at k = {mid:.3}", (d1 - d2).abs()),
            );
        }
    }

    // completeness probe on a purpose-built box
    {
        let width = config.evolve.width;
        let k0 = -config.evolve.k0.abs();
        let center = config.evolve.center.max(5.0 * lm.x_min + 5.0 * width + 1.0);
        let t_hit = center / (2.0 * k0.abs());
        let samples = [t_hit + 3.0, t_hit + 4.5, t_hit + 6.0];
        let probe_grid = build_grid(config.grid.eps, 120.0, 12000, SpacingPolicy::Uniform)?;
        match completeness_probe(spec, &probe_grid, center, k0, width, &samples, 1e-3) {
            Err(e) => push(&mut lines, "completeness", false, format!("probe failed: {e}")),
            Ok(reports) => {
                let min_m = reports.iter().map(|r| r.m).fold(f64::INFINITY, f64::min);
                let nondecreasing =
                    reports.windows(2).all(|w| w[1].m >= w[0].m - 1e-3);
                push(
                    &mut lines,
                    "completeness",
                    min_m >= 0.99 && nondecreasing,
                    format!("min overlap {min_m:.5}, nondecreasing: {nondecreasing}"),
                );
                write(out_dir, "completeness.json", &report::completeness_json(&reports, config))?;
            }
        }
    }

    // conservation and the two trajectory bounds
    {
        let ev = &config.evolve;
        let psi0 = gaussian_packet(&grid, ev.center, ev.k0, ev.width)?;
        let dominant = ev.k0 * ev.k0 + 1.0 / (4.0 * ev.width * ev.width);
        let dt = ev.dt.unwrap_or_else(|| default_dt(dominant));
        if !ballistic_guard_ok(&grid, ev.center, ev.k0, ev.width, dt * ev.n_steps as f64) {
            push(&mut lines, "conservation", false, "ballistic guard rejected the run".to_string());
            push(&mut lines, "moment-inequality", false, "no trajectory".to_string());
            push(&mut lines, "affine-bound", false, "no trajectory".to_string());
        } else {
            let traj = evolve(&op, &psi0, dt, ev.n_steps, ev.record_every)?;
            let r0 = &traj.records[0];
            let rn = traj.records.last().unwrap();
            let l2_drift = (rn.l2_norm - r0.l2_norm).abs();
            let k0_form = r0.kinetic + r0.shifted_potential;
            let e_drift = traj
                .records
                .iter()
                .map(|r| ((r.kinetic + r.shifted_potential) - k0_form).abs() / k0_form)
                .fold(0.0f64, f64::max);
            push(
                &mut lines,
                "conservation",
                l2_drift < 1e-10 && e_drift < 1e-8,
                format!("l2 drift {l2_drift:.2e}, energy drift {e_drift:.2e} over {} steps", ev.n_steps),
            );
            let slacks = verify_radin_simon(&traj)?;
            let slack_ok = slacks.iter().enumerate().all(|(i, s)| {
                let rhs = s + traj.records[i].x_moment2.sqrt();
                *s >= -1e-6 * rhs.max(1.0)
            });
            let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
            push(&mut lines, "moment-inequality", slack_ok, format!("min slack {min_slack:.3e}"));
            let cert = verify_affine_bound(&traj)?;
            push(
                &mut lines,
                "affine-bound",
                cert.max_violation <= 1e-6,
                format!("max violation {:.3e} (c = sqrt(2), d = {:.4})", cert.max_violation, cert.d),
            );
        }
    }

    let table = report::verify_table(&lines);
    print!("{table}");
    write(out_dir, "verify.txt", &format!("{}{table}", report::header("verify", config)))?;
    write(out_dir, "verify.json", &report::verify_json(&lines, config))?;
    if lines.iter().all(|l| l.passed) {
        Ok(0)
    } else {
        let failed: Vec<&str> =
            lines.iter().filter(|l| !l.passed).map(|l| l.label.as_str()).collect();
        eprintln!("failed: {}", failed.join(", "));
        Ok(1)
    }
}

fn cmd_sweep(config: &RunConfig, out_dir: &Path) -> Result<i32> {
    let sw = &config.sweep;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // draw all parameters first so the result is independent of the
    // parallel execution order
    let samples: Vec<(f64, f64)> = (0..sw.n_samples)
        .map(|_| {
            let ln_a = rng.gen_range(sw.alpha_min.ln()..=sw.alpha_max.ln());
            let alpha = ln_a.exp();
            // beta inside the absence region: beta^(5/3) = r * 4 alpha^(2/3)
            let r = rng.gen_range(0.05..=0.95);
            let beta = (r * 4.0 * alpha.powf(2.0 / 3.0)).powf(0.6);
            (alpha, beta)
        })
        .collect();

    let rows: Vec<Result<(f64, f64, f64, f64, bool, usize, bool)>> = samples
        .par_iter()
        .map(|&(alpha, beta)| {
            let p = LJParams::new(alpha, beta)?;
            let lm = p.landmarks();
            let eps = p.barrier_truncation_point(1e-26)?;
            let conv =
                converged_negative_count(p, eps, 50.0, 4000, crate::spectrum::default_abs_tol(lm.gamma))?;
            Ok((
                alpha,
                beta,
                lm.gamma,
                p.negative_part_moment(),
                p.absence_criterion(),
                conv.count,
                conv.converged,
            ))
        })
        .collect();

    let mut csv = report::header("sweep-csv", config);
    csv.push_str("index,alpha,beta,gamma,moment,criterion,count,converged\n");
    let mut any_positive = false;
    let mut any_unconverged = false;
    for (i, row) in rows.iter().enumerate() {
        let (alpha, beta, gamma, moment, criterion, count, converged) = match row {
            Ok(t) => *t,
            Err(e) => return Err(Error::numerical("sweep", format!("sample {i}: {e}"))),
        };
        any_positive |= count > 0;
        any_unconverged |= !converged;
        csv.push_str(&format!(
            "{i},{},{},{},{},{criterion},{count},{converged}\n",
            report::fmt_f64(alpha),
            report::fmt_f64(beta),
            report::fmt_f64(gamma),
            report::fmt_f64(moment),
        ));
    }
    write(out_dir, "sweep.csv", &csv)?;
    write(out_dir, "sweep.json", &report::sweep_json(sw.n_samples, !any_positive, !any_unconverged, config))?;
    println!(
        "{} samples inside the absence region; all counts zero: {}",
        sw.n_samples, !any_positive
    );
    if any_unconverged {
        return Err(Error::unconverged("sweep", "a sample count failed the refinement protocol".to_string()));
    }
    if any_positive {
        return Ok(1);
    }
    Ok(0)
}
