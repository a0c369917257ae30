//! Discrete spectrum of the truncated operator.
//!
//! Eigenvalue *counting* is exact for the matrix: a Sturm sequence
//! (LDL^T pivot signs of `T - lambda I`) gives the number of eigenvalues
//! below any level without computing them. Bisection on the count then
//! brackets individual eigenvalues; inverse iteration recovers vectors.
//!
//! Two cross checks keep the pipeline honest:
//!
//! * a shooting oracle integrates `psi'' = (V - E) psi` outward and counts
//!   interior nodes (Sturm oscillation), an independent route to the same
//!   integer;
//! * an essential-spectrum probe compares the low nonnegative modes
//!   against the free Dirichlet box levels `(n pi / (L - eps))^2`, which
//!   they must approach as L grows (the essential spectrum is [0, inf)).
//!
//! Counts are only reported as converged when they are stable under
//! doubling the resolution and doubling the box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_grid, SpacingPolicy};
use crate::ode::integrate_stationary;
use crate::operator::{assemble_hamiltonian, TridiagonalOperator};
use crate::potential::{LJParams, PotentialSpec};

/// Default negativity threshold: eigenvalues above `-1e-8 |gamma|` are
/// treated as numerically zero.
pub fn default_abs_tol(gamma: f64) -> f64 {
    1e-8 * gamma.abs().max(f64::MIN_POSITIVE)
}

/// Number of eigenvalues of the matrix strictly below `level`, by the
/// classic pivot-sign count. Exact up to the pivot guard.
pub fn sturm_count_below(op: &TridiagonalOperator, level: f64) -> usize {
    let d = op.diag();
    let e = op.offdiag();
    let n = d.len();
    // LAPACK-style pivot floor keeps the recurrence well defined when a
    // pivot lands exactly on zero
    let emax2 = e.iter().fold(0.0f64, |m, &x| m.max(x * x)).max(1.0);
    let pivmin = f64::MIN_POSITIVE * emax2;

    let mut count = 0usize;
    let mut q = d[0] - level;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        q = d[i] - level - e[i - 1] * e[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th eigenvalue (ascending, 0-based) by bisection on the Sturm count.
pub fn kth_eigenvalue(op: &TridiagonalOperator, k: usize) -> Result<f64> {
    let n = op.dim();
    if k >= n {
        return Err(Error::param("k", format!("matrix has {n} eigenvalues, asked for index {k}")));
    }
    let (mut lo, mut hi) = op.gershgorin_bounds();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
        if sturm_count_below(op, mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bound-state report of a discretized operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Negative eigenvalues below `-abs_tol`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Physical samples on the full grid (endpoints included, zero there),
    /// normalized in the trapezoid L2 inner product. One per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `|| H v - lambda v ||` in the discrete L2 norm, one per pair.
    pub residuals: Vec<f64>,
    pub count: usize,
    pub bargmann_moment: f64,
    pub criterion_holds: bool,
    pub gamma: f64,
    pub abs_tol: f64,
}

/// Solve `(T - sigma) x = b` by LU with partial pivoting (the shifted
/// matrix is intentionally near-singular during inverse iteration).
fn solve_shifted_tridiag(d: &[f64], e: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    // bands of the eliminated matrix: du2 appears through row swaps
    let dl: Vec<f64> = (0..n - 1).map(|i| e[i]).collect();
    let mut dd: Vec<f64> = d.iter().map(|&x| x - sigma).collect();
    let mut du: Vec<f64> = (0..n - 1).map(|i| e[i]).collect();
    let mut du2 = vec![0.0f64; n.saturating_sub(2)];
    let mut x = b.to_vec();

    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    for i in 0..n - 1 {
        if dd[i].abs() >= dl[i].abs() {
            // no swap
            let piv = if dd[i].abs() < tiny { tiny.copysign(dd[i]) } else { dd[i] };
            let m = dl[i] / piv;
            dd[i + 1] -= m * du[i];
            x[i + 1] -= m * x[i];
            if i + 2 < n {
                du2[i] = 0.0;
            }
            dd[i] = piv;
        } else {
            // swap rows i and i+1
            let m = dd[i] / dl[i];
            dd[i] = dl[i];
            let t = dd[i + 1];
            dd[i + 1] = du[i] - m * t;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -m * du[i + 1];
            }
            du[i] = t;
            x.swap(i, i + 1);
            x[i + 1] -= m * x[i];
        }
    }
    if dd[n - 1].abs() < tiny {
        dd[n - 1] = tiny.copysign(dd[n - 1]);
    }
    // back substitution
    x[n - 1] /= dd[n - 1];
    if n >= 2 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / dd[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// All eigenvalues below `-abs_tol` with eigenvectors, via Sturm
/// bisection (bracket width `abs_tol`, then a Rayleigh polish from
/// inverse iteration). Close pairs are deflated against each other.
pub fn negative_eigenvalues(op: &TridiagonalOperator, abs_tol: f64) -> Result<SpectrumReport> {
    if !(abs_tol > 0.0) || !abs_tol.is_finite() {
        return Err(Error::param("abs_tol", format!("must be finite and > 0, got {abs_tol}")));
    }
    let gamma = op.potential().gamma();
    let (moment, criterion) = match op.potential().params() {
        Some(p) => (p.negative_part_moment(), p.absence_criterion()),
        None => (0.0, true),
    };

    let level = -abs_tol;
    let count = sturm_count_below(op, level);
    let d = op.diag();
    let e = op.offdiag();
    let n = op.dim();

    let mut eigenvalues: Vec<f64> = Vec::with_capacity(count);
    let mut eigenvectors_hat: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);

    // achievable residual scale for this matrix
    let hnorm = (0..n).fold(0.0f64, |m, i| {
        let mut r = d[i].abs();
        if i > 0 {
            r += e[i - 1].abs();
        }
        if i + 1 < n {
            r += e[i].abs();
        }
        m.max(r)
    });

    let mut lo_global = gamma - 1.0 - 1e-6 * gamma.abs();
    for k in 0..count {
        // bracket the k-th eigenvalue to width abs_tol
        let (mut lo, mut hi) = (lo_global, level);
        while hi - lo > abs_tol {
            let mid = 0.5 * (lo + hi);
            if sturm_count_below(op, mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let bracket = (lo, hi);
        let sigma = 0.5 * (lo + hi);

        // deterministic start vector
        let mut state = 0x853c49e6748fea9bu64 ^ (k as u64).wrapping_mul(0x9e3779b97f4a7c15);
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);

        // deflate against neighbors closer than the bracket scale
        let near: Vec<usize> = eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| (l - sigma).abs() < 1e3 * abs_tol)
            .map(|(i, _)| i)
            .collect();

        let mut rayleigh = sigma;
        let mut residual = f64::INFINITY;
        let mut converged = false;
        for _iter in 0..50 {
            let mut w = solve_shifted_tridiag(d, e, sigma, &v);
            for &j in &near {
                let c = dot(&w, &eigenvectors_hat[j]);
                w.iter_mut().zip(&eigenvectors_hat[j]).for_each(|(x, y)| *x -= c * y);
            }
            let nw = norm(&w);
            if !nw.is_finite() || nw == 0.0 {
                break;
            }
            w.iter_mut().for_each(|x| *x /= nw);
            let hw = op.apply(&w);
            rayleigh = dot(&w, &hw);
            residual = {
                let mut acc = 0.0;
                for i in 0..n {
                    let r = hw[i] - rayleigh * w[i];
                    acc += r * r;
                }
                acc.sqrt()
            };
            v = w;
            // two iterations minimum; stop at the rounding floor
            if _iter >= 1 && residual <= 1e-13 * hnorm * (n as f64).sqrt() {
                converged = true;
                break;
            }
        }
        if !converged && residual > 1e-9 * hnorm {
            return Err(Error::unconverged(
                "negative_eigenvalues",
                format!(
                    "inverse iteration stalled in bracket [{:.17e}, {:.17e}] (residual {residual:e})",
                    bracket.0, bracket.1
                ),
            ));
        }

        // deterministic sign: largest-magnitude component positive
        let imax = (0..n).fold(0, |im, i| if v[i].abs() > v[im].abs() { i } else { im });
        if v[imax] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }

        eigenvalues.push(rayleigh);
        eigenvectors_hat.push(v);
        residuals.push(residual);
        lo_global = bracket.0; // eigenvalues come out ascending
    }

    // hat -> physical full-grid samples
    let eigenvectors = eigenvectors_hat
        .iter()
        .map(|hat| {
            let phys = op.to_physical(hat);
            let mut full = Vec::with_capacity(n + 2);
            full.push(0.0);
            full.extend_from_slice(&phys);
            full.push(0.0);
            full
        })
        .collect();

    Ok(SpectrumReport {
        eigenvalues,
        eigenvectors,
        residuals,
        count,
        bargmann_moment: moment,
        criterion_holds: criterion,
        gamma,
        abs_tol,
    })
}

/// Independent count of eigenvalues below `e`: integrate the regular
/// solution outward from the truncation point and count interior nodes.
pub fn shooting_count(spec: PotentialSpec, e: f64, eps: f64, l: f64) -> Result<usize> {
    if let PotentialSpec::LennardJones(_) = spec {
        if eps <= 0.0 {
            return Err(Error::param("eps", "shooting through a singular core needs eps > 0"));
        }
    }
    let run = integrate_stationary(&|x| spec.eval(x), e, eps, l, 0.0, 1.0, None, 1e-10)?;
    Ok(run.sign_changes)
}

/// Count stability under doubling resolution and doubling the box.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConvergedCount {
    pub count: usize,
    pub count_refined: usize,
    pub count_extended: usize,
    pub converged: bool,
}

pub fn converged_negative_count(
    params: LJParams,
    eps: f64,
    l: f64,
    n: usize,
    abs_tol: f64,
) -> Result<ConvergedCount> {
    let spec = PotentialSpec::LennardJones(params);
    let count_on = |l_: f64, n_: usize| -> Result<usize> {
        let g = build_grid(eps, l_, n_, SpacingPolicy::Uniform)?;
        let op = assemble_hamiltonian(&g, spec)?;
        Ok(sturm_count_below(&op, -abs_tol))
    };
    let count = count_on(l, n)?;
    let count_refined = count_on(l, 2 * n)?;
    let count_extended = count_on(2.0 * l, 2 * n)?;
    Ok(ConvergedCount {
        count,
        count_refined,
        count_extended,
        converged: count == count_refined && count == count_extended,
    })
}

/// Behavior of eigenvectors near the truncation point: both the value and
/// the derivative of true eigenfunctions vanish at the origin, so the
/// sampled ratio `|psi(x)|/x` must still be increasing on the smallest
/// nodes, and `log |psi|` must track the barrier decay `-sqrt(alpha)/(5 x^5)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryCheck {
    /// False for the free operator: its eigenfunctions go like sin(k x)
    /// with a nonzero derivative at the wall, and nothing is asserted.
    pub applicable: bool,
    pub per_state: Vec<BoundaryStateCheck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryStateCheck {
    pub state: usize,
    /// |psi|/x strictly increasing over the probe nodes.
    pub ratio_increasing: bool,
    /// Least-squares slope of log|psi| against -sqrt(alpha)/(5 x^5);
    /// 1.0 means exact WKB decay. Meaningful range [0.7, 1.3].
    pub decay_slope: f64,
    /// Set when the probe amplitudes are too small to trust (< 1e-30).
    pub inconclusive: bool,
}

pub const BOUNDARY_PROBE_NODES: usize = 10;

pub fn boundary_behavior_check(
    op: &TridiagonalOperator,
    report: &SpectrumReport,
) -> Result<BoundaryCheck> {
    let params = match op.potential().params() {
        None => return Ok(BoundaryCheck { applicable: false, per_state: Vec::new() }),
        Some(p) => p,
    };
    let nodes = op.grid().nodes();
    if op.dim() < BOUNDARY_PROBE_NODES {
        return Err(Error::param("grid", "too few interior nodes for the boundary probe"));
    }
    let mut per_state = Vec::with_capacity(report.count);
    for (s, vec) in report.eigenvectors.iter().enumerate() {
        // smallest interior nodes; full-grid sample index i+1
        let xs: Vec<f64> = (0..BOUNDARY_PROBE_NODES).map(|i| nodes[i + 1]).collect();
        let amps: Vec<f64> = (0..BOUNDARY_PROBE_NODES).map(|i| vec[i + 1].abs()).collect();
        if amps.iter().all(|&a| a < 1e-30) {
            per_state.push(BoundaryStateCheck {
                state: s,
                ratio_increasing: false,
                decay_slope: f64::NAN,
                inconclusive: true,
            });
            continue;
        }
        let ratios: Vec<f64> = xs.iter().zip(&amps).map(|(x, a)| a / x).collect();
        let ratio_increasing = ratios.windows(2).all(|w| w[1] > w[0]);
        // regress log|psi| on u = -sqrt(alpha)/(5 x^5)
        let us: Vec<f64> = xs.iter().map(|&x| -params.alpha.sqrt() / (5.0 * x.powi(5))).collect();
        let ys: Vec<f64> = amps.iter().map(|&a| a.max(1e-300).ln()).collect();
        let n = us.len() as f64;
        let mu = us.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = us.iter().zip(&ys).map(|(u, y)| (u - mu) * (y - my)).sum();
        let sxx: f64 = us.iter().map(|u| (u - mu) * (u - mu)).sum();
        let slope = sxy / sxx;
        per_state.push(BoundaryStateCheck {
            state: s,
            ratio_increasing,
            decay_slope: slope,
            inconclusive: false,
        });
    }
    Ok(BoundaryCheck { applicable: true, per_state })
}

/// One mode comparison of the essential-spectrum probe.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EssentialModeRow {
    pub l: f64,
    pub mode: usize,
    pub energy: f64,
    pub box_energy: f64,
    pub rel_deviation: f64,
}

/// Compare the lowest `k_modes` nonnegative eigenvalues against the free
/// Dirichlet box levels `((m+1) pi / (L - eps))^2` for each box size.
/// `h_target` fixes the resolution independently of L.
pub fn essential_spectrum_probe(
    params: LJParams,
    eps: f64,
    h_target: f64,
    l_list: &[f64],
    k_modes: usize,
    abs_tol: f64,
) -> Result<Vec<EssentialModeRow>> {
    if k_modes == 0 {
        return Err(Error::param("k_modes", "need at least one mode"));
    }
    let spec = PotentialSpec::LennardJones(params);
    let mut rows = Vec::new();
    for &l in l_list {
        let n = ((l - eps) / h_target).ceil() as usize + 1;
        let g = build_grid(eps, l, n.max(16), SpacingPolicy::Uniform)?;
        let op = assemble_hamiltonian(&g, spec)?;
        let negatives = sturm_count_below(&op, abs_tol);
        for m in 0..k_modes {
            let energy = kth_eigenvalue(&op, negatives + m)?;
            let box_energy = ((m + 1) as f64 * std::f64::consts::PI / (l - eps)).powi(2);
            rows.push(EssentialModeRow {
                l,
                mode: m,
                energy,
                box_energy,
                rel_deviation: (energy - box_energy).abs() / box_energy,
            });
        }
    }
    Ok(rows)
}
