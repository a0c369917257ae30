//! The 12-6 potential on the half-line and its analytic landmarks.
//!
//! ```text
//!     V(x) = alpha/x^12 - beta/x^6,        alpha, beta > 0, x > 0
//! ```
//!
//! Units: energies are inverse lengths squared, so `alpha` carries
//! length^10 and `beta` length^4. Landmarks in closed form:
//!
//! * zero crossing `x0 = (alpha/beta)^(1/6)`,
//! * minimum at `x_min = (2 alpha/beta)^(1/6)` with depth
//!   `gamma = V(x_min) = -beta^2/(4 alpha)`, which is also the form lower
//!   bound of the operator,
//! * Bargmann-type moment `int_0^inf x |V_-(x)| dx
//!   = (3/20) beta^(5/3) alpha^(-2/3)`;
//!   whenever `beta^(5/3) < 4 alpha^(2/3)` holds (strictly) the moment is
//!   below 3/5 < 1 and the operator has no bound states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the 12-6 potential. Both must be finite and positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LJParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Potential landmarks in closed form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PotentialLandmarks {
    /// Zero crossing: V < 0 exactly on (x0, inf).
    pub x0: f64,
    /// Location of the minimum, `2^(1/6) * x0`.
    pub x_min: f64,
    /// Depth of the well, `V(x_min) = -beta^2/(4 alpha) < 0`.
    pub gamma: f64,
}

impl LJParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::param("alpha", format!("must be finite and > 0, got {alpha}")));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::param("beta", format!("must be finite and > 0, got {beta}")));
        }
        Ok(LJParams { alpha, beta })
    }

    /// `V(x)` for `x > 0`. The caller guarantees the domain; use
    /// [`LJParams::eval_checked`] for untrusted input.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        let u = 1.0 / (x * x * x * x * x * x);
        (self.alpha * u - self.beta) * u
    }

    pub fn eval_checked(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::param("x", format!("potential domain is x > 0, got {x}")));
        }
        Ok(self.eval(x))
    }

    pub fn landmarks(&self) -> PotentialLandmarks {
        let x0 = (self.alpha / self.beta).powf(1.0 / 6.0);
        PotentialLandmarks {
            x0,
            x_min: x0 * 2f64.powf(1.0 / 6.0),
            gamma: -self.beta * self.beta / (4.0 * self.alpha),
        }
    }

    /// `int_0^inf x |V_-(x)| dx = (3/20) beta^(5/3) alpha^(-2/3)`.
    ///
    /// Finiteness of this moment is what makes the bound-state count
    /// finite; it also upper-bounds the count (Bargmann).
    pub fn negative_part_moment(&self) -> f64 {
        0.15 * self.beta.powf(5.0 / 3.0) * self.alpha.powf(-2.0 / 3.0)
    }

    /// Strict inequality `beta^(5/3) < 4 alpha^(2/3)`: when it holds the
    /// moment is < 3/5 < 1 and the discrete spectrum is empty.
    pub fn absence_criterion(&self) -> bool {
        self.beta.powf(5.0 / 3.0) < 4.0 * self.alpha.powf(2.0 / 3.0)
    }

    /// Truncation point below which the wavefunction amplitude is below
    /// `amplitude_tol`: solutions decay like `exp(-sqrt(alpha)/(5 x^5))`
    /// under the x^-12 barrier, so
    /// `eps = (sqrt(alpha) / (5 ln(1/amplitude_tol)))^(1/5)`.
    ///
    /// `amplitude_tol` must lie in (0, 1).
    pub fn barrier_truncation_point(&self, amplitude_tol: f64) -> Result<f64> {
        if !(amplitude_tol > 0.0 && amplitude_tol < 1.0) {
            return Err(Error::param(
                "amplitude_tol",
                format!("must lie strictly in (0, 1), got {amplitude_tol}"),
            ));
        }
        let log_inv = -amplitude_tol.ln();
        Ok((self.alpha.sqrt() / (5.0 * log_inv)).powf(0.2))
    }

    /// Scaling companion: `V_{alpha s^10, beta s^4}(s x) = s^-2 V_{alpha,beta}(x)`.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        LJParams::new(self.alpha * s.powi(10), self.beta * s.powi(4))
    }
}

/// Potential attached to a discretized operator: either the free
/// comparison operator (V = 0, Dirichlet at the left endpoint) or the
/// 12-6 potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Free,
    LennardJones(LJParams),
}

impl PotentialSpec {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::LennardJones(p) => p.eval(x),
        }
    }

    /// Form lower bound: `gamma` for the 12-6 potential, 0 for free.
    pub fn gamma(&self) -> f64 {
        match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::LennardJones(p) => p.landmarks().gamma,
        }
    }

    pub fn params(&self) -> Option<LJParams> {
        match self {
            PotentialSpec::Free => None,
            PotentialSpec::LennardJones(p) => Some(*p),
        }
    }
}
