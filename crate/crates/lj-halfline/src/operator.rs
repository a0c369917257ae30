//! Symmetric tridiagonal discretization of `-d^2/dx^2 + V` on a grid.
//!
//! Grid nodes include both truncation endpoints; the matrix acts on the
//! interior nodes with the endpoint amplitudes pinned to zero (Dirichlet).
//! On a uniform grid the stencil is the classic
//!
//! ```text
//!     diag_i = 2/h^2 + V(x_i),      offdiag = -1/h^2.
//! ```
//!
//! Nonuniform grids use the divided-difference stencil made symmetric by
//! the half-interval weighting `w_i = (h_{i-1} + h_i)/2`: conjugating by
//! `diag(sqrt(w))` gives
//!
//! ```text
//!     diag_i    = (1/h_{i-1} + 1/h_i)/w_i + V(x_i)
//!     offdiag_i = -1/(h_i sqrt(w_i w_{i+1}))
//! ```
//!
//! which keeps the matrix symmetric with the plain dot product equal to
//! the trapezoid L2 inner product of physical samples. Eigenvalues are
//! those of the divided-difference operator; eigenvectors map back to
//! physical samples through division by `sqrt(w_i)`.
//!
//! A single off-diagonal array is stored, so the two conceptual
//! off-diagonals are equal at the bit level by construction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SpacingPolicy};
use crate::potential::{LJParams, PotentialSpec};

pub const OPERATOR_FORMAT_VERSION: &str = "1";

/// Potential values above this are treated as an overflow: the node is
/// inside the hard core and the grid should have been truncated there.
pub const V_OVERFLOW_GUARD: f64 = 1e15;

#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    grid: Grid,
    potential: PotentialSpec,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    format_version: String,
    grid: serde_json::Value,
    potential: PotentialSpec,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

/// Build the interior-node matrix for `-d^2/dx^2 + V` on `grid`.
///
/// Every interior node is evaluated; a potential value above
/// [`V_OVERFLOW_GUARD`] (or non-finite) rejects the grid: such nodes sit
/// inside the core where the truncation point should have been chosen.
pub fn assemble_hamiltonian(grid: &Grid, potential: PotentialSpec) -> Result<TridiagonalOperator> {
    let interior = grid.interior();
    let m = interior.len();
    let mut v = Vec::with_capacity(m);
    for &x in interior {
        let val = potential.eval(x);
        if !val.is_finite() || val > V_OVERFLOW_GUARD {
            return Err(Error::param(
                "grid",
                format!("potential overflows at node x = {x:e} (V = {val:e}); truncate the grid outside the core"),
            ));
        }
        v.push(val);
    }

    let weights = grid.weights();
    let mut diag = Vec::with_capacity(m);
    let mut offdiag = Vec::with_capacity(m.saturating_sub(1));

    match grid.policy() {
        SpacingPolicy::Uniform => {
            // one exact h keeps the stencil identity diag - 2/h^2 = V bitwise
            let h = (grid.l() - grid.eps()) / (grid.len() - 1) as f64;
            let inv_h2 = 1.0 / (h * h);
            for i in 0..m {
                diag.push(2.0 * inv_h2 + v[i]);
            }
            for _ in 0..m - 1 {
                offdiag.push(-inv_h2);
            }
        }
        SpacingPolicy::Graded { .. } => {
            let nodes = grid.nodes();
            for i in 0..m {
                let h_left = nodes[i + 1] - nodes[i];
                let h_right = nodes[i + 2] - nodes[i + 1];
                diag.push((1.0 / h_left + 1.0 / h_right) / weights[i] + v[i]);
            }
            for i in 0..m - 1 {
                let h = nodes[i + 2] - nodes[i + 1];
                offdiag.push(-1.0 / (h * (weights[i] * weights[i + 1]).sqrt()));
            }
        }
    }

    Ok(TridiagonalOperator { grid: grid.clone(), potential, diag, offdiag, weights })
}

impl TridiagonalOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> PotentialSpec {
        self.potential
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Trapezoid weights of the interior nodes (hat-space conversion).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// y = H x on interior (hat-space) vectors.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "operator/vector dimension mismatch");
        let n = x.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    pub fn apply_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim(), "operator/vector dimension mismatch");
        let n = x.len();
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.offdiag[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.offdiag[i];
            }
            y[i] = acc;
        }
        y
    }

    /// Interval certainly containing all eigenvalues (Gershgorin).
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Physical samples (interior) -> hat space: multiply by sqrt(w_i).
    pub fn to_hat(&self, physical: &[f64]) -> Vec<f64> {
        assert_eq!(physical.len(), self.dim());
        physical.iter().zip(&self.weights).map(|(p, w)| p * w.sqrt()).collect()
    }

    /// Hat space -> physical samples (interior): divide by sqrt(w_i).
    pub fn to_physical(&self, hat: &[f64]) -> Vec<f64> {
        assert_eq!(hat.len(), self.dim());
        hat.iter().zip(&self.weights).map(|(v, w)| v / w.sqrt()).collect()
    }

    pub fn to_json(&self) -> String {
        let grid: serde_json::Value =
            serde_json::from_str(&self.grid.to_json()).expect("grid json is valid");
        serde_json::to_string(&OperatorJson {
            format_version: OPERATOR_FORMAT_VERSION.to_string(),
            grid,
            potential: self.potential,
            diag: self.diag.clone(),
            offdiag: self.offdiag.clone(),
        })
        .expect("operator serialization cannot fail")
    }

    /// Decode and validate a fixture (untrusted-input entry point).
    pub fn from_json(s: &str) -> Result<TridiagonalOperator> {
        let raw: OperatorJson =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("operator json: {e}")))?;
        if raw.format_version != OPERATOR_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "operator json: unsupported format_version {:?}",
                raw.format_version
            )));
        }
        let grid = Grid::from_json(&raw.grid.to_string())?;
        let m = grid.n_interior();
        if raw.diag.len() != m {
            return Err(Error::Config(format!(
                "operator json: diag length {} does not match {} interior nodes",
                raw.diag.len(),
                m
            )));
        }
        if raw.offdiag.len() + 1 != m {
            return Err(Error::Config(format!(
                "operator json: offdiag length {} must be diag length - 1",
                raw.offdiag.len()
            )));
        }
        if !raw.diag.iter().chain(raw.offdiag.iter()).all(|x| x.is_finite()) {
            return Err(Error::Config("operator json: entries must be finite".into()));
        }
        // serde bypasses the LJParams constructor; re-validate here
        if let Some(p) = raw.potential.params() {
            LJParams::new(p.alpha, p.beta)
                .map_err(|e| Error::Config(format!("operator json: {e}")))?;
        }
        let weights = grid.weights();
        Ok(TridiagonalOperator { grid, potential: raw.potential, diag: raw.diag, offdiag: raw.offdiag, weights })
    }
}

/// Discrete kinetic form of full-grid samples (endpoints included, treated
/// as Dirichlet data): `sum_i |psi_{i+1} - psi_i|^2 / h_i` over all links.
/// Equals the trapezoid-weighted quadratic form of the kinetic part of the
/// matrix when the endpoint samples vanish.
pub fn second_difference_energy(grid: &Grid, psi: &[Complex64]) -> Result<f64> {
    if psi.len() != grid.len() {
        return Err(Error::param(
            "psi",
            format!("expected {} samples (full grid), got {}", grid.len(), psi.len()),
        ));
    }
    let nodes = grid.nodes();
    let mut acc = 0.0;
    for i in 0..psi.len() - 1 {
        let d = psi[i + 1] - psi[i];
        acc += d.norm_sqr() / (nodes[i + 1] - nodes[i]);
    }
    Ok(acc)
}

pub fn second_difference_energy_real(grid: &Grid, psi: &[f64]) -> Result<f64> {
    if psi.len() != grid.len() {
        return Err(Error::param(
            "psi",
            format!("expected {} samples (full grid), got {}", grid.len(), psi.len()),
        ));
    }
    let nodes = grid.nodes();
    let mut acc = 0.0;
    for i in 0..psi.len() - 1 {
        let d = psi[i + 1] - psi[i];
        acc += d * d / (nodes[i + 1] - nodes[i]);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::potential::LJParams;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn lj(alpha: f64, beta: f64) -> PotentialSpec {
        PotentialSpec::LennardJones(LJParams::new(alpha, beta).unwrap())
    }

    #[test]
    fn uniform_diag_identity_is_exact() {
        let p = LJParams::new(1.0, 10.0).unwrap();
        let g = build_grid(0.33, 50.0, 2000, SpacingPolicy::Uniform).unwrap();
        let op = assemble_hamiltonian(&g, lj(1.0, 10.0)).unwrap();
        let h = (50.0 - 0.33) / 1999.0;
        let inv_h2 = 1.0 / (h * h);
        for (i, &x) in g.interior().iter().enumerate() {
            // assembly adds exactly V(x_i) to the stencil; subtracting the
            // stencil back recovers it to within one rounding of the sum
            let recovered = op.diag()[i] - 2.0 * inv_h2;
            let ulp = 2.0 * f64::EPSILON * op.diag()[i].abs();
            assert!(
                (recovered - p.eval(x)).abs() <= ulp,
                "node {x}: recovered {recovered:e} vs V {:e}",
                p.eval(x)
            );
            if i + 1 < op.dim() {
                assert_eq!(op.offdiag()[i], -inv_h2);
            }
        }
    }

    #[test]
    fn free_box_modes_are_stencil_eigenvectors() {
        // sin(k pi x) on [0,1] is an exact eigenvector of the discrete
        // stencil with eigenvalue (2 - 2 cos(k pi h))/h^2
        let n = 257;
        let g = build_grid(0.0, 1.0, n, SpacingPolicy::Uniform).unwrap();
        let op = assemble_hamiltonian(&g, PotentialSpec::Free).unwrap();
        let h = 1.0 / (n - 1) as f64;
        for k in [1, 2, 5] {
            let v: Vec<f64> =
                g.interior().iter().map(|&x| (k as f64 * PI * x).sin()).collect();
            let hv = op.apply(&v);
            let lambda = (2.0 - 2.0 * (k as f64 * PI * h).cos()) / (h * h);
            for i in 0..v.len() {
                assert_abs_diff_eq!(hv[i], lambda * v[i], epsilon = 1e-7 * lambda.abs());
            }
            // and the discrete eigenvalue approaches (k pi)^2
            assert_relative_eq!(lambda, (k as f64 * PI).powi(2), max_relative = 1e-3);
        }
    }

    #[test]
    fn overflow_guard_rejects_core_nodes() {
        // interior nodes deep inside the core must be refused
        let g = build_grid(0.01, 50.0, 2000, SpacingPolicy::Uniform).unwrap();
        assert!(assemble_hamiltonian(&g, lj(1.0, 1.0)).is_err());
        // eps = 0 grids pair only with the free operator
        let g0 = build_grid(0.0, 1.0, 64, SpacingPolicy::Uniform).unwrap();
        assert!(assemble_hamiltonian(&g0, lj(1.0, 1.0)).is_err());
        assert!(assemble_hamiltonian(&g0, PotentialSpec::Free).is_ok());
    }

    #[test]
    fn graded_with_power_one_matches_uniform() {
        let gu = build_grid(0.33, 20.0, 300, SpacingPolicy::Uniform).unwrap();
        let gg = build_grid(0.33, 20.0, 300, SpacingPolicy::Graded { power: 1.0 }).unwrap();
        let a = assemble_hamiltonian(&gu, lj(1.0, 2.0)).unwrap();
        let b = assemble_hamiltonian(&gg, lj(1.0, 2.0)).unwrap();
        for i in 0..a.dim() {
            assert_relative_eq!(a.diag()[i], b.diag()[i], max_relative = 1e-9);
        }
        for i in 0..a.dim() - 1 {
            assert_relative_eq!(a.offdiag()[i], b.offdiag()[i], max_relative = 1e-9);
        }
    }

    #[test]
    fn quadratic_form_obeys_gamma_lower_bound() {
        let g = build_grid(0.4, 30.0, 1500, SpacingPolicy::Graded { power: 2.0 }).unwrap();
        let spec = lj(1.0, 10.0);
        let op = assemble_hamiltonian(&g, spec).unwrap();
        let gamma = spec.gamma();
        // deterministic pseudo-random probe vectors
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..5 {
            let v: Vec<f64> = (0..op.dim())
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            let hv = op.apply(&v);
            let num: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
            let den: f64 = v.iter().map(|a| a * a).sum();
            assert!(num / den >= gamma - 1e-9 * gamma.abs());
        }
    }

    #[test]
    fn symmetry_of_the_form() {
        let g = build_grid(0.4, 10.0, 200, SpacingPolicy::Graded { power: 1.7 }).unwrap();
        let op = assemble_hamiltonian(&g, lj(1.0, 5.0)).unwrap();
        let u: Vec<f64> = (0..op.dim()).map(|i| ((i * 7 % 13) as f64 - 6.0) / 6.0).collect();
        let v: Vec<f64> = (0..op.dim()).map(|i| ((i * 5 % 11) as f64 - 5.0) / 5.0).collect();
        let hu = op.apply(&u);
        let hv = op.apply(&v);
        let uhv: f64 = u.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let vhu: f64 = v.iter().zip(&hu).map(|(a, b)| a * b).sum();
        assert_relative_eq!(uhv, vhu, max_relative = 1e-12);
    }

    #[test]
    fn second_difference_energy_matches_matrix_form() {
        // for full-grid samples vanishing at the endpoints the link sum
        // equals the weighted interior quadratic form of the free matrix
        let g = build_grid(0.2, 5.0, 400, SpacingPolicy::Graded { power: 2.0 }).unwrap();
        let op = assemble_hamiltonian(&g, PotentialSpec::Free).unwrap();
        let full: Vec<f64> = g
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &x)| if i == 0 || i == g.len() - 1 { 0.0 } else { (x - 0.2).sin() })
            .collect();
        let link_sum = second_difference_energy_real(&g, &full).unwrap();
        let interior_phys = &full[1..full.len() - 1];
        let hat = op.to_hat(interior_phys);
        let h_hat = op.apply(&hat);
        let form: f64 = hat.iter().zip(&h_hat).map(|(a, b)| a * b).sum();
        assert_relative_eq!(link_sum, form, max_relative = 1e-10);
    }

    #[test]
    fn second_difference_energy_constant_interior() {
        let g = build_grid(0.0, 1.0, 101, SpacingPolicy::Uniform).unwrap();
        let h = 0.01;
        let c = 0.7;
        let mut psi = vec![Complex64::new(c, 0.0); 101];
        psi[0] = Complex64::new(0.0, 0.0);
        psi[100] = Complex64::new(0.0, 0.0);
        let e = second_difference_energy(&g, &psi).unwrap();
        // only the two endpoint jumps contribute
        assert_relative_eq!(e, 2.0 * c * c / h, max_relative = 1e-9);
    }

    #[test]
    fn second_difference_energy_dimension_check() {
        let g = build_grid(0.0, 1.0, 32, SpacingPolicy::Uniform).unwrap();
        let psi = vec![Complex64::new(1.0, 0.0); 31];
        assert!(second_difference_energy(&g, &psi).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = build_grid(0.33, 20.0, 64, SpacingPolicy::Uniform).unwrap();
        let op = assemble_hamiltonian(&g, lj(1.0, 10.0)).unwrap();
        let s = op.to_json();
        let back = TridiagonalOperator::from_json(&s).unwrap();
        assert_eq!(op.diag(), back.diag());
        assert_eq!(op.offdiag(), back.offdiag());
        assert_eq!(op.potential(), back.potential());
        assert_eq!(op.grid(), back.grid());

        assert!(TridiagonalOperator::from_json("{}").is_err());
        // diag length no longer matches the interior node count
        let bad = s.replacen("\"diag\":[", "\"diag\":[1.0,", 1);
        assert!(TridiagonalOperator::from_json(&bad).is_err());
    }
}
