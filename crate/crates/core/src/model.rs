//! Dimensionless mean-field model.
//!
//! The state lives on the phase cylinder `(z, phi)` where `z` is the
//! fractional population difference and `phi` the total (field plus
//! ensemble) phase. Energies are in units of `hbar * N_q * lambda / 2` and
//! time in units of `1 / lambda`.
//!
//! ```text
//! H(z, phi) = (delta + lambda_ratio * z / 2) * z + S(z) * cos(phi)
//! S(z)      = sqrt(2 (1 - z^2) (k - z))
//! ```
//!
//! `S` vanishes on the physical boundary `z = +-1` (poles of the Bloch
//! sphere) and `z = k` (field fully drained), where its derivative diverges.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Tolerance on the physical boundary. Points that overshoot `k - z >= 0` or
/// `|z| <= 1` by less than this are clamped onto the boundary.
pub const EPS_DOM: f64 = 1e-12;

fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonFinite { name, value })
    }
}

/// Physical parameters of the driven ensemble (angular frequencies in rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// Hyperfine transition frequency.
    pub omega: f64,
    /// Field frequency.
    pub omega_f: f64,
    /// Intra-ensemble coupling.
    pub eta: f64,
    /// Field-ensemble coupling; must be strictly positive.
    pub lambda: f64,
    /// Condensate size `N_q`.
    pub n_qubits: f64,
    /// Conserved total excitation number `N`.
    pub total_excitations: f64,
}

impl PhysicalConfig {
    /// Detuning `omega - omega_f`.
    pub fn detuning(&self) -> f64 {
        self.omega - self.omega_f
    }

    /// Converts to the dimensionless triple `(delta / lambda, eta / lambda, 2 N / N_q)`.
    pub fn to_model_params(&self) -> Result<ModelParams> {
        for (name, v) in [
            ("omega", self.omega),
            ("omega_f", self.omega_f),
            ("eta", self.eta),
            ("lambda", self.lambda),
            ("n_qubits", self.n_qubits),
            ("total_excitations", self.total_excitations),
        ] {
            require_finite(name, v)?;
        }
        if self.lambda <= 0.0 {
            return Err(ModelError::NonPositiveCoupling(self.lambda));
        }
        if self.n_qubits < 1.0 {
            return Err(ModelError::TooFewQubits(self.n_qubits));
        }
        ModelParams::new(
            self.detuning() / self.lambda,
            self.eta / self.lambda,
            2.0 * self.total_excitations / self.n_qubits,
        )
    }

    /// Field occupation `n = (N_q / 2) (k - z)` at population difference `z`.
    pub fn field_occupation(&self, z: f64) -> f64 {
        let k = 2.0 * self.total_excitations / self.n_qubits;
        0.5 * self.n_qubits * (k - z)
    }
}

/// Dimensionless parameters `(delta, lambda_ratio, k)` of one model instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Detuning over field-ensemble coupling.
    pub delta: f64,
    /// Intra-ensemble over field-ensemble coupling.
    pub lambda_ratio: f64,
    /// Excitation ratio `2 N / N_q`.
    pub k: f64,
}

impl ModelParams {
    pub fn new(delta: f64, lambda_ratio: f64, k: f64) -> Result<Self> {
        Ok(Self {
            delta: require_finite("delta", delta)?,
            lambda_ratio: require_finite("lambda_ratio", lambda_ratio)?,
            k: require_finite("k", k)?,
        })
    }

    /// Upper end of the admissible population range, `min(k, 1)`.
    pub fn z_upper(&self) -> f64 {
        self.k.min(1.0)
    }

    /// `delta + lambda_ratio * z`, the linear part of `dH/dz`.
    pub fn linear_drive(&self, z: f64) -> f64 {
        self.delta + self.lambda_ratio * z
    }

    /// Phase-independent part of the energy.
    pub fn potential(&self, z: f64) -> f64 {
        (self.delta + 0.5 * self.lambda_ratio * z) * z
    }

    /// Squared coupling amplitude `s(z) = 2 (1 - z^2) (k - z)`.
    pub fn amplitude_sq(&self, z: f64) -> f64 {
        2.0 * (1.0 - z * z) * (self.k - z)
    }

    /// Coupling amplitude `S(z)`; zero outside the domain.
    pub fn amplitude(&self, z: f64) -> f64 {
        self.amplitude_sq(z).max(0.0).sqrt()
    }

    /// Distance of `z` to the nearest singular boundary in `{-1, 1, k}`.
    pub fn boundary_distance(&self, z: f64) -> f64 {
        (z + 1.0).abs().min((1.0 - z).abs()).min((self.k - z).abs())
    }
}

/// A point on the phase cylinder. `phi` is stored unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub z: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(z: f64, phi: f64) -> Self {
        Self { z, phi }
    }

    /// Phase reduced into `[0, 2 pi)`.
    pub fn reduced_phi(&self) -> f64 {
        self.phi.rem_euclid(std::f64::consts::TAU)
    }
}

/// First derivatives of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub dh_dz: f64,
    pub dh_dphi: f64,
}

/// Second derivatives of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hessian {
    pub zz: f64,
    pub zphi: f64,
    pub phiphi: f64,
}

/// `|z| <= 1` and `k - z >= 0`.
pub fn admissible(p: &ModelParams, x: &PhasePoint) -> bool {
    x.z.abs() <= 1.0 && p.k - x.z >= 0.0
}

/// Admissible and at least `EPS_DOM` away from every singular boundary.
pub fn strictly_admissible(p: &ModelParams, z: f64) -> bool {
    z.is_finite() && z.abs() < 1.0 - EPS_DOM && p.k - z > EPS_DOM
}

/// Clamps `z` onto the domain if it overshoots by at most `EPS_DOM`.
fn clamp_to_domain(p: &ModelParams, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(ModelError::OutOfDomain { z, k: p.k });
    }
    let mut zc = z;
    if zc > 1.0 && zc - 1.0 <= EPS_DOM {
        zc = 1.0;
    }
    if zc < -1.0 && -1.0 - zc <= EPS_DOM {
        zc = -1.0;
    }
    if p.k - zc < 0.0 && zc - p.k <= EPS_DOM {
        zc = p.k;
    }
    if zc.abs() > 1.0 || p.k - zc < 0.0 {
        return Err(ModelError::OutOfDomain { z, k: p.k });
    }
    Ok(zc)
}

fn require_strict(p: &ModelParams, z: f64) -> Result<()> {
    clamp_to_domain(p, z)?;
    if strictly_admissible(p, z) {
        Ok(())
    } else {
        Err(ModelError::Singular { z, k: p.k })
    }
}

/// `(sin, cos)` of a phase, exact on the branches `phi = 0` and `phi = pi`
/// where the fixed points sit.
fn phase_sin_cos(phi: f64) -> (f64, f64) {
    let r = phi.rem_euclid(TAU);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == PI {
        (0.0, -1.0)
    } else {
        phi.sin_cos()
    }
}

/// Mean-field energy at `x`.
pub fn hamiltonian(p: &ModelParams, x: &PhasePoint) -> Result<f64> {
    let z = clamp_to_domain(p, x.z)?;
    Ok(p.potential(z) + p.amplitude(z) * phase_sin_cos(x.phi).1)
}

/// `S'(z)`, valid on the strict interior.
pub(crate) fn amplitude_slope(p: &ModelParams, z: f64) -> f64 {
    let s = p.amplitude_sq(z);
    // s' = -2 (1 + 2kz - 3z^2)
    -(1.0 + 2.0 * p.k * z - 3.0 * z * z) / s.sqrt()
}

/// `S''(z)`, valid on the strict interior.
pub(crate) fn amplitude_curvature(p: &ModelParams, z: f64) -> f64 {
    let s = p.amplitude_sq(z);
    let ds = -2.0 * (1.0 + 2.0 * p.k * z - 3.0 * z * z);
    let d2s = -4.0 * p.k + 12.0 * z;
    let root = s.sqrt();
    d2s / (2.0 * root) - ds * ds / (4.0 * s * root)
}

/// `dH/dz` along a phase branch with the given `cos(phi)`.
///
/// Zeros of this function in `z` at `cos_phi = +-1` are the fixed points.
pub fn stationarity_residual(p: &ModelParams, z: f64, cos_phi: f64) -> f64 {
    p.linear_drive(z) + amplitude_slope(p, z) * cos_phi
}

pub fn gradient(p: &ModelParams, x: &PhasePoint) -> Result<Gradient> {
    require_strict(p, x.z)?;
    let (sin, cos) = phase_sin_cos(x.phi);
    Ok(Gradient {
        dh_dz: stationarity_residual(p, x.z, cos),
        dh_dphi: -p.amplitude(x.z) * sin,
    })
}

pub fn hessian(p: &ModelParams, x: &PhasePoint) -> Result<Hessian> {
    require_strict(p, x.z)?;
    let (sin, cos) = phase_sin_cos(x.phi);
    Ok(Hessian {
        zz: p.lambda_ratio + amplitude_curvature(p, x.z) * cos,
        zphi: -amplitude_slope(p, x.z) * sin,
        phiphi: -p.amplitude(x.z) * cos,
    })
}
