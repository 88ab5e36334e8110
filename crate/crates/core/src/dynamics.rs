//! Trajectories of the mean-field flow.
//!
//! The flow is canonical in `(phi, z)`:
//!
//! ```text
//! dz/dtau   = -dH/dphi = S(z) sin(phi)
//! dphi/dtau =  dH/dz   = delta + lambda_ratio z + S'(z) cos(phi)
//! ```
//!
//! with `tau = lambda t`. `H` is conserved, and `(z, phi, tau) -> (z, -phi, -tau)`
//! maps solutions onto solutions.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::fixed_points::{self, FixedPoint, PhaseBranch, Stability};
use crate::integrator::{dop853_step, hermite, hermite_extrema, State};
use crate::model::{self, ModelParams, PhasePoint, EPS_DOM};

/// Minimum step before the integrator gives up.
pub const MIN_STEP: f64 = 1e-12;

/// Right-hand side of the flow.
pub fn eom(p: &ModelParams, x: &PhasePoint) -> Result<(f64, f64)> {
    let g = model::gradient(p, x)?;
    Ok((-g.dh_dphi, g.dh_dz))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Final dimensionless time.
    pub tau_max: f64,
    /// Spacing of recorded samples.
    pub output_stride: f64,
    /// Stop once `z` is this close to `-1`, `1` or `k`.
    pub boundary_margin: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            tau_max: 100.0,
            output_stride: 0.05,
            boundary_margin: 1e-9,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tau_max(mut self, tau_max: f64) -> Self {
        self.tau_max = tau_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("abs_tol", self.abs_tol)?;
        positive("rel_tol", self.rel_tol)?;
        positive("tau_max", self.tau_max)?;
        positive("output_stride", self.output_stride)?;
        positive("boundary_margin", self.boundary_margin)?;
        if self.boundary_margin < EPS_DOM {
            return Err(ModelError::InvalidConfig(format!(
                "boundary_margin {} is below the domain tolerance {EPS_DOM}",
                self.boundary_margin
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BoundaryHit,
    StepUnderflow,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::BoundaryHit => "boundary_hit",
            Termination::StepUnderflow => "step_underflow",
        }
    }
}

/// Libration (`Bounded`) or running phase (`Unbounded`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseClass {
    Bounded,
    Unbounded,
    Undetermined,
}

impl PhaseClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseClass::Bounded => "bounded",
            PhaseClass::Unbounded => "unbounded",
            PhaseClass::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub z: f64,
    /// Unwrapped phase.
    pub phi: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub samples: Vec<Sample>,
    /// `max |H(tau) - H(0)|` over every accepted step.
    pub energy_drift: f64,
    pub termination: Termination,
    /// Verdict from the phase winding of this run alone.
    pub phase_class: PhaseClass,
    /// Smallest and largest `z` reached, including turning points between steps.
    pub z_min: f64,
    pub z_max: f64,
    /// `max |phi(tau) - phi(0)|`.
    pub winding: f64,
    /// Crossings of `phi` through multiples of `pi` (turning points of `z`).
    pub half_turns: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn initial(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// Circular mean of the phase over the samples, in `(-pi, pi]`.
    pub fn mean_phase(&self) -> f64 {
        let (s, c) = self
            .samples
            .iter()
            .fold((0.0, 0.0), |(s, c), x| (s + x.phi.sin(), c + x.phi.cos()));
        s.atan2(c)
    }
}

/// Phase winding beyond which a run counts as running.
const RUNNING_WINDING: f64 = 4.0 * PI;
/// A librating run must show at least this many turning points (two full
/// oscillations and a half) before it is called bounded.
const MIN_HALF_TURNS: usize = 5;

fn winding_verdict(winding: f64, half_turns: usize) -> PhaseClass {
    if winding > RUNNING_WINDING {
        PhaseClass::Unbounded
    } else if half_turns >= MIN_HALF_TURNS {
        PhaseClass::Bounded
    } else {
        PhaseClass::Undetermined
    }
}

fn rhs(p: &ModelParams, y: &State) -> Option<State> {
    if !model::strictly_admissible(p, y[0]) {
        return None;
    }
    let (dz, dphi) = eom(p, &PhasePoint::new(y[0], y[1])).ok()?;
    (dz.is_finite() && dphi.is_finite()).then_some([dz, dphi])
}

/// Integrates from `x0` to `cfg.tau_max`.
pub fn integrate(p: &ModelParams, x0: &PhasePoint, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_until(p, x0, cfg, |_| false)
}

/// Integrates from `x0` until `tau_max`, a boundary, or until `stop` returns
/// true on the running trajectory (checked after every accepted step).
pub fn integrate_until<S>(p: &ModelParams, x0: &PhasePoint, cfg: &IntegratorConfig, mut stop: S) -> Result<Trajectory>
where
    S: FnMut(&Trajectory) -> bool,
{
    cfg.validate()?;
    if !model::strictly_admissible(p, x0.z) {
        return Err(ModelError::Singular { z: x0.z, k: p.k });
    }
    let f = |y: &State| rhs(p, y);
    let energy = |y: &State| model::hamiltonian(p, &PhasePoint::new(y[0], y[1])).unwrap_or(f64::NAN);

    let mut y: State = [x0.z, x0.phi];
    let mut dy = f(&y).ok_or(ModelError::Singular { z: x0.z, k: p.k })?;
    let e0 = energy(&y);
    let mut traj = Trajectory {
        params: *p,
        samples: vec![Sample { tau: 0.0, z: y[0], phi: y[1], energy: e0 }],
        energy_drift: 0.0,
        termination: Termination::Completed,
        phase_class: PhaseClass::Undetermined,
        z_min: y[0],
        z_max: y[0],
        winding: 0.0,
        half_turns: 0,
        accepted_steps: 0,
        rejected_steps: 0,
    };

    let near_boundary = |z: f64| p.boundary_distance(z) <= cfg.boundary_margin;
    if near_boundary(y[0]) {
        traj.termination = Termination::BoundaryHit;
        return Ok(traj);
    }

    let mut tau = 0.0;
    let mut next_out = cfg.output_stride.min(cfg.tau_max);
    let mut out_index = 1u64;
    let mut h = 1e-3f64.min(cfg.output_stride);
    let mut last_domain_failure = false;

    while tau < cfg.tau_max {
        let h_try = h.min(next_out - tau);
        let lands_on_output = h_try >= next_out - tau;
        let step = dop853_step(&f, &y, &dy, h_try);
        let (accept, factor) = match &step {
            None => {
                last_domain_failure = true;
                (false, 0.25)
            }
            Some(s) => {
                let sc_z = cfg.abs_tol + cfg.rel_tol * y[0].abs().max(s.y[0].abs());
                // the unwrapped phase grows without bound; its size says nothing about accuracy
                let sc_phi = cfg.abs_tol + cfg.rel_tol * PI;
                let norm = s.error_norm(&[sc_z, sc_phi]);
                let factor = if norm == 0.0 { 10.0 } else { (0.9 * norm.powf(-1.0 / 6.0)).clamp(0.2, 10.0) };
                (norm <= 1.0 && norm.is_finite(), if norm.is_finite() { factor } else { 0.25 })
            }
        };

        if !accept {
            traj.rejected_steps += 1;
            h = h_try * factor;
            if h < MIN_STEP {
                traj.termination = if last_domain_failure && p.boundary_distance(y[0]) < 1e-6 {
                    Termination::BoundaryHit
                } else {
                    Termination::StepUnderflow
                };
                break;
            }
            continue;
        }
        let s = step.expect("accepted step exists");
        last_domain_failure = false;
        traj.accepted_steps += 1;

        // extremes of z between the two step ends
        for theta in hermite_extrema(y[0], dy[0], s.y[0], s.dy[0], h_try) {
            let z = hermite(y[0], dy[0], s.y[0], s.dy[0], h_try, theta);
            traj.z_min = traj.z_min.min(z);
            traj.z_max = traj.z_max.max(z);
        }
        traj.z_min = traj.z_min.min(s.y[0]);
        traj.z_max = traj.z_max.max(s.y[0]);
        let turns = ((s.y[1] / PI).floor() - (y[1] / PI).floor()).abs();
        traj.half_turns += turns as usize;
        traj.winding = traj.winding.max((s.y[1] - x0.phi).abs());

        tau = if lands_on_output { next_out } else { tau + h_try };
        y = s.y;
        dy = s.dy;
        let e = energy(&y);
        traj.energy_drift = traj.energy_drift.max((e - e0).abs());
        if !lands_on_output || h_try == h {
            h = h_try * factor;
        }

        let hit = near_boundary(y[0]);
        if lands_on_output || hit {
            traj.samples.push(Sample { tau, z: y[0], phi: y[1], energy: e });
        }
        if lands_on_output {
            out_index += 1;
            next_out = (out_index as f64 * cfg.output_stride).min(cfg.tau_max);
        }
        if hit {
            traj.termination = Termination::BoundaryHit;
            break;
        }
        if stop(&traj) {
            break;
        }
    }

    if traj.last().tau < tau {
        let e = energy(&y);
        traj.samples.push(Sample { tau, z: y[0], phi: y[1], energy: e });
    }
    traj.phase_class = winding_verdict(traj.winding, traj.half_turns);
    Ok(traj)
}

/// How one end of a level-set component closes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelEnd {
    /// The two arcs `phi = +-acos(c)` meet on `phi = 0`.
    PhaseZero,
    /// They meet on `phi = pi`.
    PhasePi,
    /// The component reaches a pole of the domain.
    Pole,
}

/// The `z` extent of the connected piece of a level set `H = E` through a
/// point. On it `cos(phi) = c(z) = (E - V(z)) / S(z)`, so the curve is the
/// pair of arcs `phi = +-acos(c(z))` over `[z_lo, z_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelComponent {
    pub energy: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub lo_end: LevelEnd,
    pub hi_end: LevelEnd,
}

impl LevelComponent {
    /// Closing on different phase lines means the curve wraps the cylinder.
    pub fn wraps(&self) -> bool {
        matches!(
            (self.lo_end, self.hi_end),
            (LevelEnd::PhaseZero, LevelEnd::PhasePi) | (LevelEnd::PhasePi, LevelEnd::PhaseZero)
        )
    }
}

/// `c(z) = (E - V(z)) / S(z)`; level points exist where `|c| <= 1`.
pub fn level_cosine(p: &ModelParams, energy: f64, z: f64) -> f64 {
    (energy - p.potential(z)) / p.amplitude(z)
}

const LEVEL_SLACK: f64 = 1e-12;

/// Walks out from `z0` to both ends of its level-set component.
pub fn level_component(p: &ModelParams, energy: f64, z0: f64) -> Option<LevelComponent> {
    let lo = -1.0;
    let hi = p.z_upper();
    if !(z0 > lo && z0 < hi) {
        return None;
    }
    let excess = |z: f64| level_cosine(p, energy, z).abs() - (1.0 + LEVEL_SLACK);
    if excess(z0) > 1e-9 {
        return None;
    }
    let max_step = 1e-4 * (hi - lo);
    let walk = |dir: f64| -> (f64, LevelEnd) {
        let end = if dir > 0.0 { hi } else { lo };
        let mut z = z0;
        let mut step = 1e-10;
        loop {
            let mut next = z + dir * step;
            let at_end = (dir > 0.0 && next >= end) || (dir < 0.0 && next <= end);
            if at_end {
                next = end;
            }
            let c_next = level_cosine(p, energy, next);
            if c_next.is_nan() {
                // E equals the boundary energy: the curve runs into the pole
                return (end, LevelEnd::Pole);
            }
            if c_next.abs() > 1.0 + LEVEL_SLACK {
                let r = crate::roots::bisect(excess, z, next, -1);
                let kind = if level_cosine(p, energy, r) > 0.0 { LevelEnd::PhaseZero } else { LevelEnd::PhasePi };
                return (r, kind);
            }
            if at_end {
                return (end, LevelEnd::Pole);
            }
            z = next;
            step = (2.0 * step).min(max_step);
        }
    };
    let (z_lo, lo_end) = walk(-1.0);
    let (z_hi, hi_end) = walk(1.0);
    Some(LevelComponent { energy, z_lo, z_hi, lo_end, hi_end })
}

/// Default number of phase samples in the geometric test.
pub const PHASE_SCAN_POINTS: usize = 720;

/// Both halves of the phase classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAnalysis {
    pub geometric: PhaseClass,
    pub dynamic: PhaseClass,
    pub verdict: PhaseClass,
    pub component: Option<LevelComponent>,
}

/// Level-set test: scan `phi` over a full turn and ask whether the
/// component through `x0` has a point at each phase.
pub fn geometric_phase_class(p: &ModelParams, x0: &PhasePoint, phase_points: usize) -> (PhaseClass, Option<LevelComponent>) {
    let Ok(energy) = model::hamiltonian(p, x0) else {
        return (PhaseClass::Undetermined, None);
    };
    let Some(comp) = level_component(p, energy, x0.z) else {
        return (PhaseClass::Undetermined, None);
    };
    if comp.lo_end == LevelEnd::Pole || comp.hi_end == LevelEnd::Pole {
        return (PhaseClass::Undetermined, Some(comp));
    }
    // range of cos(phi) attained on the component
    let (mut c_min, mut c_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for end in [comp.lo_end, comp.hi_end] {
        let c = if end == LevelEnd::PhaseZero { 1.0 } else { -1.0 };
        c_min = c_min.min(c);
        c_max = c_max.max(c);
    }
    let n = 2000;
    for i in 1..n {
        let z = comp.z_lo + (comp.z_hi - comp.z_lo) * i as f64 / n as f64;
        let c = level_cosine(p, energy, z).clamp(-1.0, 1.0);
        c_min = c_min.min(c);
        c_max = c_max.max(c);
    }
    let solvable = (0..phase_points).all(|j| {
        let c = (x0.phi + TAU * j as f64 / phase_points as f64).cos();
        c >= c_min - 1e-12 && c <= c_max + 1e-12
    });
    let class = match (solvable, comp.wraps()) {
        (false, _) => PhaseClass::Bounded,
        (true, true) => PhaseClass::Unbounded,
        (true, false) => PhaseClass::Undetermined,
    };
    (class, Some(comp))
}

/// Integration length for the dynamic half of [`classify_phase`].
pub const CLASSIFY_TAU_MAX: f64 = 200.0;

/// Winding test from an actual run, stopped as soon as it is conclusive.
pub fn dynamic_phase_class(p: &ModelParams, x0: &PhasePoint, tau_max: f64) -> PhaseClass {
    let cfg = IntegratorConfig { output_stride: tau_max, ..IntegratorConfig::default() }.with_tau_max(tau_max);
    match integrate_until(p, x0, &cfg, |t| {
        t.winding > RUNNING_WINDING || t.half_turns > MIN_HALF_TURNS
    }) {
        Ok(t) if t.termination != Termination::StepUnderflow => t.phase_class,
        _ => PhaseClass::Undetermined,
    }
}

pub fn phase_analysis(p: &ModelParams, x0: &PhasePoint) -> PhaseAnalysis {
    let (geometric, component) = geometric_phase_class(p, x0, PHASE_SCAN_POINTS);
    let dynamic = dynamic_phase_class(p, x0, CLASSIFY_TAU_MAX);
    let verdict = match (geometric, dynamic) {
        (PhaseClass::Undetermined, _) => PhaseClass::Undetermined,
        // an inconclusive run cannot contradict the level set
        (g, PhaseClass::Undetermined) => g,
        (g, d) if g == d => g,
        _ => PhaseClass::Undetermined,
    };
    PhaseAnalysis { geometric, dynamic, verdict, component }
}

/// Libration or running phase of the orbit through `x0`.
pub fn classify_phase(p: &ModelParams, x0: &PhasePoint) -> PhaseClass {
    phase_analysis(p, x0).verdict
}

/// Energy of the separatrix and the saddle it passes through, if any.
pub fn separatrix_energy(p: &ModelParams) -> Option<(f64, FixedPoint)> {
    separatrix_from(&fixed_points::find_fixed_points(p))
}

pub fn separatrix_from(points: &[FixedPoint]) -> Option<(f64, FixedPoint)> {
    points
        .iter()
        .filter(|f| f.classification == Stability::Saddle)
        .min_by(|a, b| a.residual.abs().total_cmp(&b.residual.abs()))
        .map(|f| (f.energy, *f))
}

/// Centers enclosed by a librating trajectory: same phase branch as the
/// orbit's mean phase and `z` inside its excursion.
pub fn enclosed_centers(traj: &Trajectory, points: &[FixedPoint]) -> Vec<FixedPoint> {
    let mean = traj.mean_phase();
    let branch = if mean.cos() >= 0.0 { PhaseBranch::Zero } else { PhaseBranch::Pi };
    points
        .iter()
        .filter(|f| f.classification.is_center() && f.branch == branch)
        .filter(|f| f.z >= traj.z_min && f.z <= traj.z_max)
        .copied()
        .collect()
}
