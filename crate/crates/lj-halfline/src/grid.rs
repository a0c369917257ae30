//! Truncated half-line grids.
//!
//! The singular direction is handled by truncation: the domain `[eps, L]`
//! carries Dirichlet conditions at both endpoints. `eps` comes from the
//! barrier decay (`LJParams::barrier_truncation_point`), `L` from the
//! bound-state tails. Nodes always include both endpoints; operators act
//! on the interior nodes.
//!
//! JSON schema (fixtures):
//!
//! ```json
//! { "format_version": "1",
//!   "nodes": [0.33, ...],
//!   "policy": { "kind": "uniform" } }
//! ```
//!
//! with `{ "kind": "graded", "power": p }` for graded grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRID_FORMAT_VERSION: &str = "1";

/// Node placement policy. `Graded { power: p }` maps the uniform
/// parameter t in [0, 1] through t^p, clustering nodes near `eps`
/// (p >= 1; p = 1 is uniform).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpacingPolicy {
    Uniform,
    Graded { power: f64 },
}

/// A strictly increasing set of nodes on `[eps, L]`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    policy: SpacingPolicy,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    format_version: String,
    nodes: Vec<f64>,
    policy: SpacingPolicy,
}

/// `eps >= 0` (0 is legitimate only for the free operator: a singular
/// potential on such a grid is rejected at assembly by the overflow
/// guard), `L > eps`, at least 16 nodes.
pub fn build_grid(eps: f64, l: f64, n: usize, policy: SpacingPolicy) -> Result<Grid> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::param("eps", format!("must be finite and >= 0, got {eps}")));
    }
    if !l.is_finite() || l <= eps {
        return Err(Error::param("L", format!("must be finite and > eps = {eps}, got {l}")));
    }
    if n < 16 {
        return Err(Error::param("n", format!("need at least 16 nodes, got {n}")));
    }
    if let SpacingPolicy::Graded { power } = policy {
        if !power.is_finite() || power < 1.0 {
            return Err(Error::param("policy.power", format!("grading power must be >= 1, got {power}")));
        }
    }
    let mut nodes = Vec::with_capacity(n);
    let span = l - eps;
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let x = match policy {
            SpacingPolicy::Uniform => eps + span * t,
            SpacingPolicy::Graded { power } => eps + span * t.powf(power),
        };
        nodes.push(x);
    }
    // endpoints exact regardless of rounding in the map
    nodes[0] = eps;
    nodes[n - 1] = l;
    Ok(Grid { nodes, policy })
}

impl Grid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn policy(&self) -> SpacingPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eps(&self) -> f64 {
        self.nodes[0]
    }

    pub fn l(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Interior nodes (the operator's degrees of freedom).
    pub fn interior(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn n_interior(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Spacing h_i = x_{i+1} - x_i, length `len() - 1`.
    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Trapezoid weight of interior node i: half the span of its two
    /// adjacent intervals. Discrete L2 norms and quadratic forms use
    /// these weights; on a uniform grid every weight equals h.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        (1..n - 1)
            .map(|i| 0.5 * (self.nodes[i + 1] - self.nodes[i - 1]))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GridJson {
            format_version: GRID_FORMAT_VERSION.to_string(),
            nodes: self.nodes.clone(),
            policy: self.policy,
        })
        .expect("grid serialization cannot fail")
    }

    /// Decode and validate a fixture. Every structural invariant is
    /// re-checked: this is an untrusted-input entry point.
    pub fn from_json(s: &str) -> Result<Grid> {
        let raw: GridJson =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("grid json: {e}")))?;
        if raw.format_version != GRID_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "grid json: unsupported format_version {:?}",
                raw.format_version
            )));
        }
        if raw.nodes.len() < 16 {
            return Err(Error::Config(format!(
                "grid json: need at least 16 nodes, got {}",
                raw.nodes.len()
            )));
        }
        if !raw.nodes.iter().all(|x| x.is_finite()) || raw.nodes[0] < 0.0 {
            return Err(Error::Config("grid json: nodes must be finite and start >= 0".into()));
        }
        if !raw.nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Config("grid json: nodes must be strictly increasing".into()));
        }
        if let SpacingPolicy::Graded { power } = raw.policy {
            if !power.is_finite() || power < 1.0 {
                return Err(Error::Config(format!(
                    "grid json: grading power must be >= 1, got {power}"
                )));
            }
        }
        Ok(Grid { nodes: raw.nodes, policy: raw.policy })
    }
}
