//! End-to-end acceptance checks, one per advertised guarantee. Each test
//! prints a single PASS line (visible with --nocapture) so a full run
//! doubles as a verification report.

use std::time::Instant;

use lj_halfline::dynamics::{
    evolve, gaussian_packet, verify_affine_bound, verify_radin_simon,
};
use lj_halfline::grid::{build_grid, SpacingPolicy};
use lj_halfline::operator::assemble_hamiltonian;
use lj_halfline::potential::{LJParams, PotentialSpec};
use lj_halfline::scattering::{completeness_probe, levinson_curve, levinson_defect, phase_shift};
use lj_halfline::spectrum::{
    boundary_behavior_check, converged_negative_count, default_abs_tol, essential_spectrum_probe,
    negative_eigenvalues, shooting_count, sturm_count_below,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PI: f64 = std::f64::consts::PI;

fn lj(alpha: f64, beta: f64) -> LJParams {
    LJParams::new(alpha, beta).unwrap()
}

/// Strictly inside the shallow-well region the spectrum below zero is
/// empty: 20 seeded samples, each count refinement-stable at zero.
#[test]
fn shallow_wells_have_no_bound_states() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..20 {
        let alpha = rng.gen_range(0.1f64.ln()..=10.0f64.ln()).exp();
        let r = rng.gen_range(0.05..=0.95);
        let beta = (r * 4.0 * alpha.powf(2.0 / 3.0)).powf(0.6);
        let p = lj(alpha, beta);
        assert!(p.absence_criterion(), "sample {i} left the shallow-well region");
        let eps = p.barrier_truncation_point(1e-26).unwrap();
        let abs_tol = default_abs_tol(p.landmarks().gamma);
        let conv = converged_negative_count(p, eps, 50.0, 4000, abs_tol).unwrap();
        assert!(conv.converged, "sample {i} ({alpha:.3}, {beta:.3}) did not converge");
        assert_eq!(conv.count, 0, "sample {i} ({alpha:.3}, {beta:.3}) found a bound state");
    }
    let dt = start.elapsed();
    assert!(dt.as_secs() < 120, "took {dt:?}, budget 2 min");
    println!("PASS  20 shallow-well samples, zero bound states everywhere ({dt:?})");
}

/// The weighted-moment cap bounds the count for deep wells, and the well
/// at beta = 10 really does bind (confirmed by the shooting route).
#[test]
fn moment_cap_bounds_deep_well_counts() {
    let start = Instant::now();
    for beta in [5.0, 10.0, 20.0] {
        let p = lj(1.0, beta);
        let eps = p.barrier_truncation_point(1e-26).unwrap();
        let abs_tol = default_abs_tol(p.landmarks().gamma);
        let conv = converged_negative_count(p, eps, 50.0, 4000, abs_tol).unwrap();
        assert!(conv.converged, "count at beta = {beta} not converged");
        let cap = (0.15 * beta.powf(5.0 / 3.0)).floor() as usize;
        assert!(
            conv.count <= cap,
            "beta = {beta}: count {} exceeds moment cap {cap}",
            conv.count
        );
        if beta == 10.0 {
            let spec = PotentialSpec::LennardJones(p);
            let nodes = shooting_count(spec, -1e-3, eps, 50.0).unwrap();
            assert!(nodes >= 1, "shooting found no state below -1e-3 at beta = 10");
            assert_eq!(conv.count, nodes, "matrix and shooting disagree at beta = 10");
        }
    }
    let dt = start.elapsed();
    assert!(dt.as_secs() < 60, "took {dt:?}, budget 1 min");
    println!("PASS  counts for beta in {{5, 10, 20}} under the moment cap, beta = 10 binds ({dt:?})");
}

/// Matrix Sturm counting and ODE node counting are independent routes to
/// the same integer; they must agree exactly on ten probes.
#[test]
fn matrix_and_shooting_counts_agree() {
    let start = Instant::now();
    let probes: [(f64, f64, f64); 10] = [
        (1.0, 1.0, -0.2),
        (1.0, 1.0, -0.05),
        (1.0, 10.0, -3.0),
        (1.0, 10.0, -1.0),
        (1.0, 10.0, -0.5),
        (1.0, 10.0, -0.1),
        (1.0, 20.0, -10.0),
        (1.0, 20.0, -1.0),
        (0.4, 25.0, -50.0),
        (0.4, 25.0, -5.0),
    ];
    for &(alpha, beta, e) in &probes {
        let p = lj(alpha, beta);
        let eps = p.barrier_truncation_point(1e-26).unwrap();
        let spec = PotentialSpec::LennardJones(p);
        let grid = build_grid(eps, 40.0, 6000, SpacingPolicy::Uniform).unwrap();
        let op = assemble_hamiltonian(&grid, spec).unwrap();
        let matrix = sturm_count_below(&op, e);
        let shooting = shooting_count(spec, e, eps, 40.0).unwrap();
        assert_eq!(
            matrix, shooting,
            "routes disagree at ({alpha}, {beta}), E = {e}: {matrix} vs {shooting}"
        );
    }
    let dt = start.elapsed();
    assert!(dt.as_secs() < 60, "took {dt:?}, budget 1 min");
    println!("PASS  Sturm and shooting counts identical on 10 probes ({dt:?})");
}

/// Above zero the operator looks free: low continuum levels track the
/// Dirichlet box levels and scale out with the box size.
#[test]
fn continuum_levels_track_free_box_levels() {
    let start = Instant::now();
    let p = lj(1.0, 1.0);
    let eps = p.barrier_truncation_point(1e-26).unwrap();
    let rows = essential_spectrum_probe(p, eps, 5e-3, &[100.0, 200.0], 5, 1e-9).unwrap();
    assert_eq!(rows.len(), 10);
    for row in &rows {
        assert!(
            row.rel_deviation < 0.05,
            "mode {} at L = {} deviates {:.3} from the box level",
            row.mode,
            row.l,
            row.rel_deviation
        );
    }
    for mode in 0..5 {
        let e_small = rows.iter().find(|r| r.l == 100.0 && r.mode == mode).unwrap().energy;
        let e_large = rows.iter().find(|r| r.l == 200.0 && r.mode == mode).unwrap().energy;
        let ratio = e_large.sqrt() / e_small.sqrt();
        assert!(
            (ratio - 0.5).abs() < 0.025,
            "mode {mode}: sqrt-energy ratio {ratio:.4} not a halving"
        );
    }
    let dt = start.elapsed();
    assert!(dt.as_secs() < 60, "took {dt:?}, budget 1 min");
    println!("PASS  5 continuum levels match free box levels at L = 100, 200 ({dt:?})");
}

/// The hard core forces the ground state to vanish faster than linearly
/// at the wall, with the predicted super-exponential log-slope.
#[test]
fn ground_state_decays_superexponentially_at_origin() {
    let p = lj(1.0, 10.0);
    let eps = p.barrier_truncation_point(1e-26).unwrap();
    let grid = build_grid(eps, 50.0, 20000, SpacingPolicy::Uniform).unwrap();
    let op = assemble_hamiltonian(&grid, PotentialSpec::LennardJones(p)).unwrap();
    let rep = negative_eigenvalues(&op, default_abs_tol(p.landmarks().gamma)).unwrap();
    assert_eq!(rep.count, 1);
    let check = boundary_behavior_check(&op, &rep).unwrap();
    assert!(check.applicable);
    let g = &check.per_state[0];
    assert!(!g.inconclusive, "probe amplitudes below the trust floor");
    assert!(g.ratio_increasing, "|psi|/x not increasing over the 10 smallest nodes");
    assert!(
        (0.7..=1.3).contains(&g.decay_slope),
        "log-decay slope {} outside [0.7, 1.3]",
        g.decay_slope
    );
    println!(
        "PASS  ground state: |psi|/x increasing, decay slope {:.3} in [0.7, 1.3]",
        g.decay_slope
    );
}

/// The low-momentum phase shift lands on N pi where N is the bound-state
/// count, for one binding and one non-binding parameter point.
#[test]
fn phase_at_low_momentum_counts_bound_states() {
    let start = Instant::now();
    for (alpha, beta) in [(1.0, 1.0), (1.0, 10.0)] {
        let p = lj(alpha, beta);
        let eps = p.barrier_truncation_point(1e-26).unwrap();
        let abs_tol = default_abs_tol(p.landmarks().gamma);
        let conv = converged_negative_count(p, eps, 50.0, 4000, abs_tol).unwrap();
        assert!(conv.converged);
        let curve = levinson_curve(PotentialSpec::LennardJones(p), eps, 24).unwrap();
        let defect = levinson_defect(&curve, conv.count).unwrap();
        assert!(
            defect < 0.05 * PI,
            "({alpha}, {beta}): |delta(k_min) - {} pi| = {defect:.4} rad",
            conv.count
        );
    }
    let dt = start.elapsed();
    assert!(dt.as_secs() < 120, "took {dt:?}, budget 2 min");
    println!("PASS  Levinson defect < 0.05 pi at (1, 1) and (1, 10) ({dt:?})");
}

/// S-matrix samples stay on the unit circle and the phase does not care
/// where the free-region match is made.
#[test]
fn s_matrix_unitary_and_match_radius_stable() {
    for (alpha, beta) in [(1.0, 1.0), (1.0, 10.0)] {
        let p = lj(alpha, beta);
        let eps = p.barrier_truncation_point(1e-26).unwrap();
        let spec = PotentialSpec::LennardJones(p);
        let curve = levinson_curve(spec, eps, 16).unwrap();
        for s in curve.s_matrix() {
            let modulus = (s.s_re * s.s_re + s.s_im * s.s_im).sqrt();
            assert!(
                (modulus - 1.0).abs() <= 1e-10,
                "({alpha}, {beta}): |S({})| = {modulus}",
                s.k
            );
        }
        let mid = curve.k_values[curve.k_values.len() / 2];
        let d1 = phase_shift(spec, mid, eps, curve.match_radius).unwrap();
        let d2 = phase_shift(spec, mid, eps, curve.match_radius * 1.5).unwrap();
        assert!(
            (d1 - d2).abs() < 1e-6,
            "({alpha}, {beta}): radius sensitivity {:.2e} rad at k = {mid}",
            (d1 - d2).abs()
        );
    }
    println!("PASS  |S| = 1 within 1e-10, phase radius-stable within 1e-6 rad");
}

/// A packet thrown at the core comes back free: its overlap with a
/// time-shifted free evolution exceeds 0.99 and keeps improving.
#[test]
fn reflected_packet_recovers_free_asymptote() {
    let start = Instant::now();
    let p = lj(1.0, 1.0);
    let eps = p.barrier_truncation_point(1e-26).unwrap();
    let spec = PotentialSpec::LennardJones(p);
    let grid = build_grid(eps, 200.0, 20000, SpacingPolicy::Uniform).unwrap();
    let reports = completeness_probe(spec, &grid, 30.0, -3.0, 2.0, &[12.0, 14.0, 16.0], 1e-3).unwrap();
    assert_eq!(reports.len(), 3);
    for r in &reports {
        assert!(r.m >= 0.99, "overlap {} at T = {} below 0.99", r.m, r.t);
    }
    for w in reports.windows(2) {
        assert!(
            w[1].m >= w[0].m - 1e-3,
            "overlap fell from {} to {} between T = {} and {}",
            w[0].m,
            w[1].m,
            w[0].t,
            w[1].t
        );
    }
    let dt = start.elapsed();
    assert!(dt.as_secs() < 180, "took {dt:?}, budget 3 min");
    println!(
        "PASS  free-asymptote overlap {:.5} -> {:.5} -> {:.5}, all >= 0.99 ({dt:?})",
        reports[0].m, reports[1].m, reports[2].m
    );
}

fn reflection_setup() -> (lj_halfline::operator::TridiagonalOperator, lj_halfline::dynamics::Wavepacket)
{
    let p = lj(1.0, 1.0);
    let eps = p.barrier_truncation_point(1e-26).unwrap();
    let grid = build_grid(eps, 70.0, 20000, SpacingPolicy::Uniform).unwrap();
    let op = assemble_hamiltonian(&grid, PotentialSpec::LennardJones(p)).unwrap();
    let psi0 = gaussian_packet(&grid, 25.0, -2.5, 2.0).unwrap();
    (op, psi0)
}

/// Ten thousand Cayley steps keep both the norm and the form energy.
#[test]
fn long_evolution_conserves_norm_and_energy() {
    let (op, psi0) = reflection_setup();
    let traj = evolve(&op, &psi0, 1e-3, 10_000, 500).unwrap();
    let r0 = &traj.records[0];
    let k0 = r0.kinetic + r0.shifted_potential;
    let mut norm_drift = 0.0f64;
    let mut energy_drift = 0.0f64;
    for r in &traj.records {
        norm_drift = norm_drift.max((r.l2_norm - r0.l2_norm).abs());
        energy_drift = energy_drift.max(((r.kinetic + r.shifted_potential) - k0).abs() / k0);
    }
    assert!(norm_drift < 1e-10, "norm drift {norm_drift:.2e}");
    assert!(energy_drift < 1e-8, "energy drift {energy_drift:.2e}");
    println!(
        "PASS  10^4 steps: norm drift {norm_drift:.2e} < 1e-10, energy drift {energy_drift:.2e} < 1e-8"
    );
}

fn free_setup() -> (lj_halfline::operator::TridiagonalOperator, lj_halfline::dynamics::Wavepacket) {
    let grid = build_grid(0.0, 70.0, 20000, SpacingPolicy::Uniform).unwrap();
    let op = assemble_hamiltonian(&grid, PotentialSpec::Free).unwrap();
    let psi0 = gaussian_packet(&grid, 20.0, 1.5, 2.0).unwrap();
    (op, psi0)
}

/// The root-mean-square position grows no faster than the kinetic
/// integral allows, on both a free packet and a core reflection.
#[test]
fn moment_growth_bounded_by_kinetic_integral() {
    for (name, (op, psi0), steps) in [
        ("free", free_setup(), 4000usize),
        ("reflection", reflection_setup(), 10_000),
    ] {
        let traj = evolve(&op, &psi0, 1e-3, steps, 200).unwrap();
        let slacks = verify_radin_simon(&traj).unwrap();
        for (i, s) in slacks.iter().enumerate() {
            let rhs = s + traj.records[i].x_moment2.sqrt();
            assert!(
                *s >= -1e-6 * rhs.max(1.0),
                "{name}: slack {s:.3e} at record {i} below -1e-6 of rhs {rhs:.3}"
            );
        }
        println!(
            "PASS  {name}: moment inequality slack >= -1e-6 rhs at {} records",
            slacks.len()
        );
    }
}

/// The affine envelope sqrt(x2(0)) + (c t + d) sqrt(x2(0)) with c =
/// sqrt(2) certified from the conserved energy holds on both packets.
#[test]
fn affine_spreading_certificate_holds() {
    for (name, (op, psi0), steps) in [
        ("free", free_setup(), 4000usize),
        ("reflection", reflection_setup(), 10_000),
    ] {
        let traj = evolve(&op, &psi0, 1e-3, steps, 200).unwrap();
        let cert = verify_affine_bound(&traj).unwrap();
        assert_eq!(cert.c, std::f64::consts::SQRT_2);
        assert!(cert.d > 0.0);
        assert!(
            cert.max_violation <= 1e-6,
            "{name}: affine violation {:.3e}",
            cert.max_violation
        );
        println!(
            "PASS  {name}: affine bound violation {:.3e} <= 1e-6 (c = sqrt(2), d = {:.4})",
            cert.max_violation, cert.d
        );
    }
}

/// Running the full verification twice with one config writes byte-for-
/// byte identical files: no timestamps, no iteration jitter, no thread
/// ordering leaks.
#[test]
fn verification_outputs_are_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_ljhl");
    let tmp = tempfile::tempdir().unwrap();
    let config_path = tmp.path().join("light.toml");
    std::fs::write(
        &config_path,
        r#"
alpha = 1.0
beta = 1.0
seed = 3

[grid]
l = 30.0
n = 2000

[scatter]
n_k = 8

[evolve]
center = 15.0
k0 = -2.5
width = 1.5
n_steps = 500
record_every = 100
"#,
    )
    .unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        let status = std::process::Command::new(bin)
            .args(["verify-all", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success(), "verify-all failed in {}", out.display());
    }
    let mut names: Vec<String> = std::fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"verify.txt".to_string()));
    assert!(names.contains(&"verify.json".to_string()));
    for name in &names {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    println!("PASS  verify-all outputs byte-identical across runs ({} files)", names.len());
}
