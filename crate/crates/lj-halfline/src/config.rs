//! Run configuration: a TOML file plus command-line overrides, resolved
//! into a fully explicit, serializable form.
//!
//! Every output file embeds the resolved configuration, so a run can be
//! reproduced from its own artifacts. Resolution order: defaults, then
//! file values, then flags. `grid.eps` and `grid.amplitude_tol` are
//! mutually exclusive ways to pick the truncation point; the latter
//! derives it from the barrier decay of the core.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpacingPolicy;
use crate::potential::LJParams;

/// Raw deserialization target; everything optional so that defaults and
/// flag overrides can be layered before validation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub grid: Option<RawGrid>,
    pub spectrum: Option<RawSpectrum>,
    pub scatter: Option<RawScatter>,
    pub evolve: Option<RawEvolve>,
    pub sweep: Option<RawSweep>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub eps: Option<f64>,
    pub amplitude_tol: Option<f64>,
    pub l: Option<f64>,
    pub n: Option<usize>,
    pub spacing: Option<String>,
    pub power: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpectrum {
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScatter {
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub n_k: Option<usize>,
    pub match_radius: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEvolve {
    pub center: Option<f64>,
    pub k0: Option<f64>,
    pub width: Option<f64>,
    pub dt: Option<f64>,
    pub n_steps: Option<usize>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub n_samples: Option<usize>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
}

/// Fully resolved configuration; all defaults applied and validated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    /// 0 leaves the thread-pool size to the runtime.
    pub threads: usize,
    pub grid: GridConfig,
    pub spectrum: SpectrumConfig,
    pub scatter: ScatterConfig,
    pub evolve: EvolveConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub eps: f64,
    /// Present when eps was derived from a barrier amplitude tolerance.
    pub amplitude_tol: Option<f64>,
    pub l: f64,
    pub n: usize,
    pub policy: SpacingPolicy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub abs_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub k_min: f64,
    /// None: end the curve at the searched phase anchor.
    pub k_max: Option<f64>,
    pub n_k: usize,
    /// None: smallest radius passing the tail-suppression precondition.
    pub match_radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub center: f64,
    pub k0: f64,
    pub width: f64,
    /// None: accuracy-chosen from the packet's dominant energy.
    pub dt: Option<f64>,
    pub n_steps: usize,
    pub record_every: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_samples: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

/// Values passed on the command line; they override file values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

pub fn parse_toml(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
}

fn require(field: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("{field}: required, not set")))
}

fn check_pos(field: &str, v: f64) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Config(format!("{field}: must be finite and > 0, got {v}")));
    }
    Ok(v)
}

impl RawConfig {
    pub fn apply_overrides(&mut self, o: Overrides) {
        if o.alpha.is_some() {
            self.alpha = o.alpha;
        }
        if o.beta.is_some() {
            self.beta = o.beta;
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.threads.is_some() {
            self.threads = o.threads;
        }
    }

    /// Validate and fill every default. Messages carry the field path.
    pub fn resolve(&self) -> Result<RunConfig> {
        let alpha = check_pos("alpha", require("alpha", self.alpha)?)?;
        let beta = check_pos("beta", require("beta", self.beta)?)?;
        let params = LJParams::new(alpha, beta)
            .map_err(|e| Error::Config(format!("alpha/beta: {e}")))?;
        let gamma = params.landmarks().gamma;

        let g = self.grid.clone().unwrap_or_default();
        let (eps, amplitude_tol) = match (g.eps, g.amplitude_tol) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "grid.eps / grid.amplitude_tol: set exactly one, not both".to_string(),
                ))
            }
            (Some(e), None) => {
                if !e.is_finite() || e < 0.0 {
                    return Err(Error::Config(format!("grid.eps: must be finite and >= 0, got {e}")));
                }
                (e, None)
            }
            (None, tol) => {
                let tol = tol.unwrap_or(1e-26);
                let eps = params
                    .barrier_truncation_point(tol)
                    .map_err(|e| Error::Config(format!("grid.amplitude_tol: {e}")))?;
                (eps, Some(tol))
            }
        };
        let l = check_pos("grid.l", g.l.unwrap_or(50.0))?;
        if l <= eps {
            return Err(Error::Config(format!("grid.l: must exceed eps = {eps}, got {l}")));
        }
        let n = g.n.unwrap_or(20000);
        if n < 16 {
            return Err(Error::Config(format!("grid.n: need at least 16 nodes, got {n}")));
        }
        let policy = match g.spacing.as_deref() {
            None | Some("uniform") => {
                if g.power.is_some() {
                    return Err(Error::Config(
                        "grid.power: only meaningful with spacing = \"graded\"".to_string(),
                    ));
                }
                SpacingPolicy::Uniform
            }
            Some("graded") => {
                let power = g.power.unwrap_or(2.0);
                if !power.is_finite() || power < 1.0 {
                    return Err(Error::Config(format!("grid.power: must be >= 1, got {power}")));
                }
                SpacingPolicy::Graded { power }
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "grid.spacing: expected \"uniform\" or \"graded\", got \"{other}\""
                )))
            }
        };

        let s = self.spectrum.clone().unwrap_or_default();
        let abs_tol = match s.abs_tol {
            None => crate::spectrum::default_abs_tol(gamma),
            Some(t) => check_pos("spectrum.abs_tol", t)?,
        };

        let sc = self.scatter.clone().unwrap_or_default();
        let k_min = match sc.k_min {
            None => 0.01 * gamma.abs().sqrt(),
            Some(k) => check_pos("scatter.k_min", k)?,
        };
        if let Some(k_max) = sc.k_max {
            check_pos("scatter.k_max", k_max)?;
            if k_max <= k_min {
                return Err(Error::Config(format!(
                    "scatter.k_max: must exceed k_min = {k_min}, got {k_max}"
                )));
            }
        }
        let n_k = sc.n_k.unwrap_or(60);
        if n_k < 8 {
            return Err(Error::Config(format!("scatter.n_k: need at least 8 samples, got {n_k}")));
        }
        if let Some(r) = sc.match_radius {
            check_pos("scatter.match_radius", r)?;
        }

        let ev = self.evolve.clone().unwrap_or_default();
        let center = check_pos("evolve.center", ev.center.unwrap_or(25.0))?;
        let k0 = ev.k0.unwrap_or(-2.5);
        if !k0.is_finite() {
            return Err(Error::Config(format!("evolve.k0: must be finite, got {k0}")));
        }
        let width = check_pos("evolve.width", ev.width.unwrap_or(2.0))?;
        if let Some(dt) = ev.dt {
            check_pos("evolve.dt", dt)?;
        }
        let n_steps = ev.n_steps.unwrap_or(8000);
        if n_steps == 0 {
            return Err(Error::Config("evolve.n_steps: must be >= 1".to_string()));
        }
        let record_every = ev.record_every.unwrap_or(100);
        if record_every == 0 {
            return Err(Error::Config("evolve.record_every: must be >= 1".to_string()));
        }

        let sw = self.sweep.clone().unwrap_or_default();
        let n_samples = sw.n_samples.unwrap_or(20);
        if n_samples == 0 {
            return Err(Error::Config("sweep.n_samples: must be >= 1".to_string()));
        }
        let alpha_min = check_pos("sweep.alpha_min", sw.alpha_min.unwrap_or(0.1))?;
        let alpha_max = check_pos("sweep.alpha_max", sw.alpha_max.unwrap_or(10.0))?;
        if alpha_max < alpha_min {
            return Err(Error::Config(format!(
                "sweep.alpha_max: must be >= alpha_min = {alpha_min}, got {alpha_max}"
            )));
        }

        Ok(RunConfig {
            alpha,
            beta,
            seed: self.seed.unwrap_or(0),
            threads: self.threads.unwrap_or(0),
            grid: GridConfig { eps, amplitude_tol, l, n, policy },
            spectrum: SpectrumConfig { abs_tol },
            scatter: ScatterConfig { k_min, k_max: sc.k_max, n_k, match_radius: sc.match_radius },
            evolve: EvolveConfig { center, k0, width, dt: ev.dt, n_steps, record_every },
            sweep: SweepConfig { n_samples, alpha_min, alpha_max },
        })
    }
}

impl RunConfig {
    pub fn params(&self) -> LJParams {
        LJParams { alpha: self.alpha, beta: self.beta }
    }

    /// Compact JSON embedded in every output file; field order is the
    /// struct declaration order, so the bytes are deterministic.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialization cannot fail")
    }
}
