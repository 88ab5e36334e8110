//! Regime reports, energy landscapes, phase-portrait bundles and
//! transition scans built on the fixed-point and trajectory solvers.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, IntegratorConfig, PhaseClass, Trajectory};
use crate::error::{ModelError, Result};
use crate::fixed_points::{self, branch_counts, CriticalParams, FixedPoint, PhaseBranch};
use crate::model::{self, ModelParams, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// One center per phase branch.
    RabiSingle,
    /// Some branch carries two centers and a saddle.
    JosephsonBistable,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::RabiSingle => "rabi_single",
            Regime::JosephsonBistable => "josephson_bistable",
        }
    }

    pub fn from_counts(counts: BranchCounts) -> Self {
        if counts.phi_zero >= 3 || counts.phi_pi >= 3 {
            Regime::JosephsonBistable
        } else {
            Regime::RabiSingle
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCounts {
    pub phi_zero: usize,
    pub phi_pi: usize,
}

impl BranchCounts {
    pub fn of(points: &[FixedPoint]) -> Self {
        let (phi_zero, phi_pi) = branch_counts(points);
        Self { phi_zero, phi_pi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub params: ModelParams,
    pub regime: Regime,
    pub fixed_point_counts: BranchCounts,
    /// `(k_c-, k_c+)` on resonance, when the fold window exists.
    pub critical_window: Option<(f64, f64)>,
    pub z_c: Option<f64>,
    pub notes: Vec<String>,
}

fn on_resonance(p: &ModelParams) -> bool {
    p.delta == 0.0
}

pub fn classify_regime(p: &ModelParams) -> RegimeReport {
    let points = fixed_points::find_fixed_points(p);
    regime_report(p, &points)
}

/// Builds the report from an existing fixed-point census.
pub fn regime_report(p: &ModelParams, points: &[FixedPoint]) -> RegimeReport {
    let counts = BranchCounts::of(points);
    let regime = Regime::from_counts(counts);
    let mut notes = Vec::new();
    let mut critical_window = None;
    let mut z_c = None;

    if on_resonance(p) && p.lambda_ratio > 0.0 {
        if let Ok(c) = fixed_points::critical_params(p.lambda_ratio) {
            z_c = Some(c.z_c);
            match c.window() {
                Some((lo, hi)) => {
                    critical_window = Some((lo, hi));
                    let inside = lo < p.k && p.k < hi;
                    if inside != (regime == Regime::JosephsonBistable) {
                        notes.push(format!(
                            "fixed-point count says {} but k = {} is {} the fold window ({lo}, {hi})",
                            regime.as_str(),
                            p.k,
                            if inside { "inside" } else { "outside" },
                        ));
                    }
                }
                None => notes.push(format!("critical root z_c = {} lies beyond z = 1; no fold window", c.z_c)),
            }
        }
    }
    if points.iter().any(|f| f.boundary) {
        notes.push("a fixed point sits within 1e-6 of the domain boundary".to_string());
    }
    for b in PhaseBranch::ALL {
        if !points.iter().any(|f| f.branch == b) {
            notes.push(format!("no fixed point on the phi = {} branch", b.phi()));
        }
    }
    RegimeReport { params: *p, regime, fixed_point_counts: counts, critical_window, z_c, notes }
}

/// `H` sampled on a `(z, phi)` grid; `None` marks cells with `k - z < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub params: ModelParams,
    pub phi_axis: Vec<f64>,
    pub z_axis: Vec<f64>,
    /// Row-major: `values[iz * phi_axis.len() + iphi]`.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridExtremum {
    Minimum,
    Maximum,
}

impl LandscapeGrid {
    pub fn get(&self, iz: usize, iphi: usize) -> Option<f64> {
        self.values[iz * self.phi_axis.len() + iphi]
    }

    fn dz(&self) -> f64 {
        self.z_axis[1] - self.z_axis[0]
    }

    fn dphi(&self) -> f64 {
        self.phi_axis[1] - self.phi_axis[0]
    }

    /// Global minimum and maximum cells among in-domain values.
    pub fn arg_extrema(&self) -> Option<((usize, usize), (usize, usize))> {
        let n_phi = self.phi_axis.len();
        let mut best: Option<((usize, f64), (usize, f64))> = None;
        for (i, v) in self.values.iter().enumerate() {
            let Some(v) = *v else { continue };
            best = Some(match best {
                None => ((i, v), (i, v)),
                Some((lo, hi)) => (if v < lo.1 { (i, v) } else { lo }, if v > hi.1 { (i, v) } else { hi }),
            });
        }
        best.map(|(lo, hi)| ((lo.0 / n_phi, lo.0 % n_phi), (hi.0 / n_phi, hi.0 % n_phi)))
    }

    /// Strict local extrema whose eight neighbours are all in the domain.
    /// The phase axis is periodic.
    pub fn local_extrema(&self) -> Vec<(usize, usize, GridExtremum)> {
        let n_phi = self.phi_axis.len();
        let n_z = self.z_axis.len();
        // the last phase column duplicates the first
        let period = if (self.phi_axis[n_phi - 1] - self.phi_axis[0] - TAU).abs() < 1e-12 { n_phi - 1 } else { n_phi };
        let mut out = Vec::new();
        for iz in 1..n_z.saturating_sub(1) {
            for iphi in 0..period {
                let Some(v) = self.get(iz, iphi) else { continue };
                let mut above = 0;
                let mut below = 0;
                let mut complete = true;
                for dz in [-1i64, 0, 1] {
                    for dp in [-1i64, 0, 1] {
                        if dz == 0 && dp == 0 {
                            continue;
                        }
                        let jz = (iz as i64 + dz) as usize;
                        let jp = (iphi as i64 + dp).rem_euclid(period as i64) as usize;
                        match self.get(jz, jp) {
                            Some(w) if w > v => above += 1,
                            Some(w) if w < v => below += 1,
                            Some(_) => {}
                            None => complete = false,
                        }
                    }
                }
                if !complete {
                    continue;
                }
                if above == 8 {
                    out.push((iz, iphi, GridExtremum::Minimum));
                } else if below == 8 {
                    out.push((iz, iphi, GridExtremum::Maximum));
                }
            }
        }
        out
    }

    /// Bilinear interpolation; `None` if any corner is out of the domain.
    pub fn interpolate(&self, z: f64, phi: f64) -> Option<f64> {
        let n_phi = self.phi_axis.len();
        let n_z = self.z_axis.len();
        let phi = phi.rem_euclid(TAU);
        let fz = ((z - self.z_axis[0]) / self.dz()).clamp(0.0, (n_z - 1) as f64);
        let fp = ((phi - self.phi_axis[0]) / self.dphi()).clamp(0.0, (n_phi - 1) as f64);
        let iz = (fz.floor() as usize).min(n_z - 2);
        let ip = (fp.floor() as usize).min(n_phi - 2);
        let tz = fz - iz as f64;
        let tp = fp - ip as f64;
        let v00 = self.get(iz, ip)?;
        let v01 = self.get(iz, ip + 1)?;
        let v10 = self.get(iz + 1, ip)?;
        let v11 = self.get(iz + 1, ip + 1)?;
        Some((1.0 - tz) * ((1.0 - tp) * v00 + tp * v01) + tz * ((1.0 - tp) * v10 + tp * v11))
    }

    /// Leading-order bilinear interpolation error at a point,
    /// `(dz^2 |H_zz| + dphi^2 |H_phiphi|) / 8`.
    pub fn interpolation_error(&self, z: f64, phi: f64) -> Option<f64> {
        let h = model::hessian(&self.params, &PhasePoint::new(z, phi)).ok()?;
        Some((self.dz().powi(2) * h.zz.abs() + self.dphi().powi(2) * h.phiphi.abs()) / 8.0)
    }
}

/// Samples `H` on `[0, 2 pi] x [-1, 1]` with `n_phi x n_z` nodes.
///
/// The `z` axis always spans the whole Bloch sphere so that the truncation
/// `z <= k` shows up as out-of-domain cells.
pub fn landscape(p: &ModelParams, n_phi: usize, n_z: usize) -> Result<LandscapeGrid> {
    if n_phi < 2 || n_z < 2 {
        return Err(ModelError::InvalidConfig(format!("landscape grid must be at least 2x2, got {n_phi}x{n_z}")));
    }
    let phi_axis = fixed_points::linspace(0.0, TAU, n_phi);
    let z_axis = fixed_points::linspace(-1.0, 1.0, n_z);
    let values = z_axis
        .par_iter()
        .flat_map_iter(|&z| {
            phi_axis.iter().map(move |&phi| {
                let x = PhasePoint::new(z, phi);
                if model::admissible(p, &x) {
                    model::hamiltonian(p, &x).ok()
                } else {
                    None
                }
            })
        })
        .collect();
    Ok(LandscapeGrid { params: *p, phi_axis, z_axis, values })
}

/// Initial conditions for a trajectory survey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SurveyGrid {
    /// `n` cell-centred points over the admissible `z` interval.
    Uniform(usize),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Survey {
    pub phi0: f64,
    pub grid: SurveyGrid,
    /// Extra initial populations, kept only when admissible.
    pub highlights: Vec<f64>,
    pub integrator: IntegratorConfig,
    /// `(n_phi, n_z)` of the landscape.
    pub landscape_size: (usize, usize),
    /// Points on the separatrix curve, in `z`.
    pub separatrix_points: usize,
}

impl Default for Survey {
    fn default() -> Self {
        Self {
            phi0: 0.0,
            grid: SurveyGrid::Uniform(41),
            highlights: vec![0.9, 0.5, -0.5, -0.9],
            integrator: IntegratorConfig::default(),
            landscape_size: (181, 201),
            separatrix_points: 2001,
        }
    }
}

impl Survey {
    /// Initial populations in survey order, with a note for each one
    /// that had to be skipped.
    pub fn initial_conditions(&self, p: &ModelParams) -> (Vec<(f64, bool)>, Vec<String>) {
        let lo = -1.0;
        let hi = p.z_upper();
        let mut notes = Vec::new();
        let mut out = Vec::new();
        let grid: Vec<f64> = match &self.grid {
            SurveyGrid::Uniform(n) => (0..*n)
                .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / *n as f64)
                .collect(),
            SurveyGrid::Explicit(zs) => zs.clone(),
        };
        let margin = self.integrator.boundary_margin;
        let mut keep = |z: f64, highlighted: bool| {
            if model::strictly_admissible(p, z) && p.boundary_distance(z) > margin {
                out.push((z, highlighted));
            } else {
                notes.push(format!("initial z = {z} is not admissible for k = {}; skipped", p.k));
            }
        };
        if hi <= lo {
            notes.push(format!("k = {} leaves no admissible population range", p.k));
            return (out, notes);
        }
        for z in grid {
            keep(z, false);
        }
        for &z in &self.highlights {
            keep(z, true);
        }
        (out, notes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyTrajectory {
    pub z0: f64,
    pub phi0: f64,
    pub highlighted: bool,
    pub phase_class: PhaseClass,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separatrix {
    pub energy: f64,
    pub saddle: FixedPoint,
    /// Points of the level set `H = energy`, phases in `[0, 2 pi]`.
    pub curve: Vec<PhasePoint>,
}

/// Points of the level set `H = energy`, traced through `cos(phi) = c(z)`.
pub fn level_curve(p: &ModelParams, energy: f64, points: usize) -> Vec<PhasePoint> {
    let lo = -1.0;
    let hi = p.z_upper();
    if hi <= lo || points < 2 {
        return Vec::new();
    }
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for z in fixed_points::linspace(lo, hi, points) {
        let c = dynamics::level_cosine(p, energy, z);
        if c.is_finite() && c.abs() <= 1.0 {
            let a = c.acos();
            upper.push(PhasePoint::new(z, a));
            lower.push(PhasePoint::new(z, TAU - a));
        }
    }
    upper.extend(lower);
    upper
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitBundle {
    pub params: ModelParams,
    pub fixed_points: Vec<FixedPoint>,
    pub trajectories: Vec<SurveyTrajectory>,
    pub separatrix: Option<Separatrix>,
    pub landscape: LandscapeGrid,
    pub regime: RegimeReport,
    pub notes: Vec<String>,
}

/// Fixed points, surveyed trajectories, separatrix and landscape for one
/// parameter set.
pub fn portrait_bundle(p: &ModelParams, survey: &Survey) -> Result<PortraitBundle> {
    survey.integrator.validate()?;
    let fixed_points = fixed_points::find_fixed_points(p);
    let regime = regime_report(p, &fixed_points);
    let (initial, mut notes) = survey.initial_conditions(p);
    let trajectories = initial
        .par_iter()
        .map(|&(z0, highlighted)| {
            let x0 = PhasePoint::new(z0, survey.phi0);
            let trajectory = dynamics::integrate(p, &x0, &survey.integrator)?;
            let phase_class = dynamics::classify_phase(p, &x0);
            Ok(SurveyTrajectory { z0, phi0: survey.phi0, highlighted, phase_class, trajectory })
        })
        .collect::<Result<Vec<_>>>()?;
    let separatrix = dynamics::separatrix_from(&fixed_points).map(|(energy, saddle)| Separatrix {
        energy,
        saddle,
        curve: level_curve(p, energy, survey.separatrix_points),
    });
    let (n_phi, n_z) = survey.landscape_size;
    let landscape = landscape(p, n_phi, n_z)?;
    let unbounded = trajectories.iter().filter(|t| t.phase_class == PhaseClass::Unbounded).count();
    if unbounded > 0 {
        notes.push(format!("{unbounded} of {} trajectories have an unbounded phase", trajectories.len()));
    }
    Ok(PortraitBundle { params: *p, fixed_points, trajectories, separatrix, landscape, regime, notes })
}

/// Count-based regime at one `k` against the fold window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSample {
    pub k: f64,
    pub counts: BranchCounts,
    pub regime: Regime,
    /// `Some(true)` when `k_c- < k < k_c+`; `None` without a window.
    pub inside_window: Option<bool>,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub lambda_ratio: f64,
    pub critical: Option<CriticalParams>,
    pub samples: Vec<TransitionSample>,
    pub disagreements: Vec<String>,
}

/// On-resonance fold windows for each coupling ratio, checked against
/// fixed-point counts at the given excitation ratios.
pub fn transition_scan(lambda_ratios: &[f64], ks: &[f64]) -> Result<Vec<TransitionRow>> {
    if lambda_ratios.is_empty() || ks.is_empty() {
        return Err(ModelError::InvalidConfig("transition scan needs at least one lambda_ratio and one k".into()));
    }
    lambda_ratios
        .par_iter()
        .map(|&lambda_ratio| {
            let critical = if lambda_ratio > 0.0 { Some(fixed_points::critical_params(lambda_ratio)?) } else { None };
            let window = critical.and_then(|c| c.window());
            let mut samples = Vec::with_capacity(ks.len());
            let mut disagreements = Vec::new();
            for &k in ks {
                let p = ModelParams::new(0.0, lambda_ratio, k)?;
                let counts = BranchCounts::of(&fixed_points::find_fixed_points(&p));
                let regime = Regime::from_counts(counts);
                let inside_window = window.map(|(lo, hi)| lo < k && k < hi);
                let agrees = inside_window.is_none_or(|inside| inside == (regime == Regime::JosephsonBistable));
                if !agrees {
                    disagreements.push(format!(
                        "lambda_ratio = {lambda_ratio}, k = {k}: counts ({}, {}) give {} but the window ({}, {}) says otherwise",
                        counts.phi_zero,
                        counts.phi_pi,
                        regime.as_str(),
                        window.map_or(f64::NAN, |w| w.0),
                        window.map_or(f64::NAN, |w| w.1),
                    ));
                }
                samples.push(TransitionSample { k, counts, regime, inside_window, agrees });
            }
            Ok(TransitionRow { lambda_ratio, critical, samples, disagreements })
        })
        .collect()
}
