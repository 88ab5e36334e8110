//! Stationary states of the mean-field flow.
//!
//! Fixed points sit on the two phase branches `phi = 0` and `phi = pi`, at the
//! zeros of `dH/dz`. They are located by a dense sign-change scan of the
//! unsquared stationarity condition. The closed-form excitation ratio
//! [`k_of_z`] (obtained by squaring that condition) is inverted separately in
//! [`invert_excitation_ratio`] and serves as an independent cross-check.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::{self, ModelParams, PhasePoint, EPS_DOM};
use crate::roots::{bisect, critical_cubic_root, sign_of};

/// Default number of interior samples of the sign-change scan.
pub const DEFAULT_SCAN_SAMPLES: usize = 100_000;

/// Roots closer than this to `z = +-1` or `z = k` carry the boundary flag.
pub const BOUNDARY_FLAG_DISTANCE: f64 = 1e-6;

/// Roots closer than this are merged.
pub const MERGE_DISTANCE: f64 = 1e-8;

/// Phase branch carrying stationary states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseBranch {
    /// `phi = 0`
    Zero,
    /// `phi = pi`
    Pi,
}

impl PhaseBranch {
    pub const ALL: [PhaseBranch; 2] = [PhaseBranch::Zero, PhaseBranch::Pi];

    pub fn phi(self) -> f64 {
        match self {
            PhaseBranch::Zero => 0.0,
            PhaseBranch::Pi => PI,
        }
    }

    pub fn cos(self) -> f64 {
        match self {
            PhaseBranch::Zero => 1.0,
            PhaseBranch::Pi => -1.0,
        }
    }

    /// Branch whose `phi` equals `phi` modulo `2 pi`, if any.
    pub fn from_phi(phi: f64) -> Option<Self> {
        let r = phi.rem_euclid(2.0 * PI);
        if r.abs() < 1e-12 || (2.0 * PI - r).abs() < 1e-12 {
            Some(PhaseBranch::Zero)
        } else if (r - PI).abs() < 1e-12 {
            Some(PhaseBranch::Pi)
        } else {
            None
        }
    }
}

/// Character of a critical point of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Minimum,
    Maximum,
    Saddle,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Minimum => "minimum",
            Stability::Maximum => "maximum",
            Stability::Saddle => "saddle",
        }
    }

    /// Extrema of `H` are centers of the flow.
    pub fn is_center(self) -> bool {
        !matches!(self, Stability::Saddle)
    }
}

/// Which root of the closed-form excitation ratio reproduces a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchSign {
    Plus,
    Minus,
    /// Found by the scan only; the closed form is singular or disagrees.
    Oracle,
}

impl BranchSign {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchSign::Plus => "plus",
            BranchSign::Minus => "minus",
            BranchSign::Oracle => "oracle",
        }
    }

    fn factor(self) -> f64 {
        match self {
            BranchSign::Minus => -1.0,
            _ => 1.0,
        }
    }
}

/// A stationary state of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub z: f64,
    pub branch: PhaseBranch,
    pub energy: f64,
    pub classification: Stability,
    pub branch_sign: BranchSign,
    /// Within [`BOUNDARY_FLAG_DISTANCE`] of `z = +-1` or `z = k`.
    pub boundary: bool,
    /// `dH/dz` at the refined root (zero for a pole).
    pub residual: f64,
}

impl FixedPoint {
    pub fn phi(&self) -> f64 {
        self.branch.phi()
    }

    pub fn point(&self) -> PhasePoint {
        PhasePoint::new(self.z, self.phi())
    }

    /// Small oscillations about a center on `phi = pi` are plasma
    /// oscillations, about a center on `phi = 0` they are pi oscillations.
    pub fn oscillation_label(&self) -> Option<&'static str> {
        if !self.classification.is_center() {
            return None;
        }
        Some(match self.branch {
            PhaseBranch::Pi => "plasma",
            PhaseBranch::Zero => "pi",
        })
    }
}

/// Closed-form excitation ratio at which `z` is stationary.
///
/// `sign` picks the `+` or `-` root. Refuses `z = 0` and negative
/// discriminants `(delta + lambda_ratio z)^2 - 4 z`.
pub fn k_of_z(delta: f64, lambda_ratio: f64, z: f64, sign: BranchSign) -> Result<f64> {
    k_of_z_inner(delta, lambda_ratio, z, sign, 0.0)
}

fn k_of_z_inner(delta: f64, lambda_ratio: f64, z: f64, sign: BranchSign, disc_slack: f64) -> Result<f64> {
    if z == 0.0 {
        return Err(ModelError::ZeroPopulation);
    }
    if !z.is_finite() || z.abs() > 1.0 {
        return Err(ModelError::OutOfDomain { z, k: f64::NAN });
    }
    let base = (3.0 * z * z - 1.0) / (2.0 * z);
    let one_minus = 1.0 - z * z;
    if one_minus == 0.0 {
        // population inversion: the correction vanishes identically
        return Ok(base);
    }
    let drive = (delta + lambda_ratio * z).abs();
    let mut disc = drive * drive - 4.0 * z;
    if disc < 0.0 {
        if disc >= -disc_slack {
            disc = 0.0;
        } else {
            return Err(ModelError::NegativeDiscriminant { z, discriminant: disc });
        }
    }
    let r = disc.sqrt();
    if sign.factor() < 0.0 {
        // both terms blow up like 1/(2z) and cancel; this form is the same
        // expression with the cancellation done by hand
        let sum = drive + r;
        return Ok((z * (drive + 3.0 * r) + 4.0 / sum) / (2.0 * sum));
    }
    Ok(base + one_minus * drive / (4.0 * z * z) * (drive + sign.factor() * r))
}

/// Roots `(z_minus, z_plus)` of the discriminant `(delta + lambda_ratio z)^2 - 4 z`.
///
/// Real excitation ratios need `z` in `[-1, z_minus] U [z_plus, 1]`.
pub fn z_bounds(delta: f64, lambda_ratio: f64) -> Result<(f64, f64)> {
    if lambda_ratio == 0.0 {
        return Err(ModelError::NoExclusionBand);
    }
    let dl = delta * lambda_ratio;
    if dl > 1.0 {
        return Err(ModelError::NoRealBounds(dl));
    }
    let root = (1.0 - dl).sqrt();
    let l2 = lambda_ratio * lambda_ratio;
    Ok(((2.0 - dl - 2.0 * root) / l2, (2.0 - dl + 2.0 * root) / l2))
}

/// A `z` interval; `*_open` marks an excluded endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl ZInterval {
    pub fn contains(&self, z: f64) -> bool {
        let above = if self.lo_open { z > self.lo } else { z >= self.lo };
        let below = if self.hi_open { z < self.hi } else { z <= self.hi };
        above && below
    }
}

/// Where the closed-form excitation ratio is real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleZRange {
    pub intervals: Vec<ZInterval>,
}

impl AdmissibleZRange {
    pub fn contains(&self, z: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(z))
    }
}

fn split_at_zero(lo: f64, hi: f64, out: &mut Vec<ZInterval>) {
    if lo < 0.0 {
        out.push(ZInterval { lo, hi: hi.min(0.0), lo_open: false, hi_open: hi >= 0.0 });
    }
    if hi > 0.0 {
        out.push(ZInterval { lo: lo.max(0.0), hi, lo_open: lo <= 0.0, hi_open: false });
    }
}

pub fn admissible_z_range(delta: f64, lambda_ratio: f64) -> AdmissibleZRange {
    let mut intervals = Vec::new();
    if lambda_ratio == 0.0 {
        // discriminant delta^2 - 4 z
        let top = (delta * delta / 4.0).min(1.0);
        split_at_zero(-1.0, top, &mut intervals);
    } else {
        match z_bounds(delta, lambda_ratio) {
            Ok((z_minus, z_plus)) => {
                split_at_zero(-1.0, z_minus.min(1.0), &mut intervals);
                if z_plus <= 1.0 {
                    intervals.push(ZInterval { lo: z_plus, hi: 1.0, lo_open: false, hi_open: false });
                }
            }
            Err(_) => split_at_zero(-1.0, 1.0, &mut intervals),
        }
    }
    intervals.retain(|i| i.lo < i.hi || (i.lo == i.hi && !i.lo_open && !i.hi_open));
    AdmissibleZRange { intervals }
}

/// `(16 + lambda^4) / (8 lambda^2)`: excitation ratio at `z_plus = 4 / lambda^2`
/// on resonance.
pub fn k_at_zplus(lambda_ratio: f64) -> Result<f64> {
    if !(lambda_ratio > 0.0) || !lambda_ratio.is_finite() {
        return Err(ModelError::NonPositiveRatio(lambda_ratio));
    }
    let l2 = lambda_ratio * lambda_ratio;
    Ok((16.0 + l2 * l2) / (8.0 * l2))
}

/// Fold parameters of the on-resonance branch structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalParams {
    pub lambda_ratio: f64,
    /// Real root of `lambda^2 z^3 - 3 z^2 - 1 = 0`.
    pub z_c: f64,
    /// `k_of_z(0, lambda, z_c, -)`; `None` when `z_c > 1` (`lambda < 2`).
    pub k_c_minus: Option<f64>,
    pub k_c_plus: Option<f64>,
}

impl CriticalParams {
    /// The window `(k_c-, k_c+)` when it exists.
    pub fn window(&self) -> Option<(f64, f64)> {
        self.k_c_minus.zip(self.k_c_plus)
    }

    /// `3 / lambda^2`, the small-root estimate sometimes quoted for large
    /// `lambda`. The true root scales as `lambda^(-2/3)`.
    pub fn quoted_estimate(&self) -> f64 {
        3.0 / (self.lambda_ratio * self.lambda_ratio)
    }

    /// `lambda^(-2/3)`, the large-`lambda` asymptote of `z_c`.
    pub fn asymptotic_estimate(&self) -> f64 {
        self.lambda_ratio.powf(-2.0 / 3.0)
    }
}

pub fn critical_params(lambda_ratio: f64) -> Result<CriticalParams> {
    if !(lambda_ratio > 0.0) || !lambda_ratio.is_finite() {
        return Err(ModelError::NonPositiveRatio(lambda_ratio));
    }
    let z_c = critical_cubic_root(lambda_ratio);
    let (k_c_minus, k_c_plus) = if z_c <= 1.0 {
        let at = |s| k_of_z_inner(0.0, lambda_ratio, z_c, s, 1e-12).ok();
        (at(BranchSign::Minus), at(BranchSign::Plus))
    } else {
        (None, None)
    };
    Ok(CriticalParams { lambda_ratio, z_c, k_c_minus, k_c_plus })
}

/// Limit of `dH/dz` on a branch as `z` approaches an end of the domain.
enum EndBehaviour {
    /// Diverges with this sign.
    Divergent(i8),
    /// Finite limit (the pole `z = 1` when `k = 1`).
    Finite(f64),
}

fn lower_end(branch: PhaseBranch) -> EndBehaviour {
    // at z = -1 the numerator 1 + 2kz - 3z^2 is -2(1 + k) < 0, so S' -> +inf
    EndBehaviour::Divergent(if branch.cos() > 0.0 { 1 } else { -1 })
}

fn upper_end(p: &ModelParams, branch: PhaseBranch) -> EndBehaviour {
    if (p.k - 1.0).abs() <= EPS_DOM {
        // S = (1 - z) sqrt(2 (1 + z)), S'(1) = -2
        EndBehaviour::Finite(p.delta + p.lambda_ratio - 2.0 * branch.cos())
    } else {
        // numerator positive at z = min(k, 1), so S' -> -inf
        EndBehaviour::Divergent(if branch.cos() > 0.0 { -1 } else { 1 })
    }
}

fn classify(p: &ModelParams, z: f64, branch: PhaseBranch) -> Stability {
    match model::hessian(p, &PhasePoint::new(z, branch.phi())) {
        Ok(h) if h.zz.is_finite() => match (h.zz > 0.0, h.phiphi > 0.0) {
            (true, true) => Stability::Minimum,
            (false, false) => Stability::Maximum,
            _ => Stability::Saddle,
        },
        // the curvature in z diverges like -cos(phi) at the boundary
        _ => match branch {
            PhaseBranch::Zero => Stability::Maximum,
            PhaseBranch::Pi => Stability::Minimum,
        },
    }
}

/// Matches a root against both closed-form branches.
pub(crate) fn closed_form_sign(p: &ModelParams, z: f64) -> BranchSign {
    let scale = p.k.abs().max(1.0);
    let mut best = (BranchSign::Oracle, f64::INFINITY);
    for sign in [BranchSign::Plus, BranchSign::Minus] {
        if let Ok(k) = k_of_z_inner(p.delta, p.lambda_ratio, z, sign, 1e-12) {
            let err = (k - p.k).abs() / scale;
            if err < best.1 {
                best = (sign, err);
            }
        }
    }
    if best.1 < 1e-6 {
        best.0
    } else {
        BranchSign::Oracle
    }
}

fn make_fixed_point(p: &ModelParams, z: f64, branch: PhaseBranch, pole: bool) -> FixedPoint {
    let x = PhasePoint::new(z, branch.phi());
    let residual = if pole || !model::strictly_admissible(p, z) {
        0.0
    } else {
        model::stationarity_residual(p, z, branch.cos())
    };
    FixedPoint {
        z,
        branch,
        energy: model::hamiltonian(p, &x).unwrap_or(f64::NAN),
        classification: classify(p, z, branch),
        branch_sign: closed_form_sign(p, z),
        boundary: pole || p.boundary_distance(z) < BOUNDARY_FLAG_DISTANCE,
        residual,
    }
}

/// Polishes a bisected root with Newton steps on `dH/dz` while they help.
fn polish(p: &ModelParams, mut z: f64, branch: PhaseBranch) -> f64 {
    let g = |z: f64| model::stationarity_residual(p, z, branch.cos());
    let mut gz = g(z);
    for _ in 0..4 {
        if gz == 0.0 || !model::strictly_admissible(p, z) {
            break;
        }
        let slope = p.lambda_ratio + model::amplitude_curvature(p, z) * branch.cos();
        let next = z - gz / slope;
        if !model::strictly_admissible(p, next) {
            break;
        }
        let gn = g(next);
        if gn.abs() < gz.abs() {
            z = next;
            gz = gn;
        } else {
            break;
        }
    }
    z
}

/// Zeros of `dH/dz` on one branch, by sign-change scan and bisection.
pub fn scan_branch(p: &ModelParams, branch: PhaseBranch, samples: usize) -> Vec<FixedPoint> {
    let lo = -1.0;
    let hi = p.z_upper();
    if !(hi > lo) || samples == 0 {
        return Vec::new();
    }
    let g = |z: f64| model::stationarity_residual(p, z, branch.cos());
    let width = hi - lo;
    let n = samples as f64 + 1.0;

    let lower = match lower_end(branch) {
        EndBehaviour::Divergent(s) => s,
        EndBehaviour::Finite(v) => sign_of(v).unwrap_or(0),
    };
    let (upper, pole) = match upper_end(p, branch) {
        EndBehaviour::Divergent(s) => (s, false),
        EndBehaviour::Finite(v) => {
            let s = sign_of(v).unwrap_or(0);
            // an interior root collapses into the pole exactly when the
            // finite limit disagrees with the divergent one nearby
            (s, s != -(branch.cos() as i8))
        }
    };

    let mut nodes: Vec<(f64, i8)> = Vec::with_capacity(samples + 2);
    nodes.push((lo, lower));
    for i in 1..=samples {
        let z = lo + width * (i as f64) / n;
        let s = sign_of(g(z)).unwrap_or(0);
        nodes.push((z, s));
    }
    nodes.push((hi, upper));

    let mut roots: Vec<f64> = Vec::new();
    for pair in nodes.windows(2) {
        let (za, sa) = pair[0];
        let (zb, sb) = pair[1];
        if sa == 0 {
            if za > lo && za < hi {
                roots.push(za);
            }
            continue;
        }
        if sb != 0 && sa != sb {
            let z = bisect(g, za, zb, sa);
            roots.push(polish(p, z, branch));
        }
    }

    let mut out: Vec<FixedPoint> = Vec::new();
    for z in roots {
        if out.last().is_some_and(|fp| (fp.z - z).abs() < MERGE_DISTANCE) {
            continue;
        }
        out.push(make_fixed_point(p, z, branch, false));
    }
    if pole {
        out.push(make_fixed_point(p, 1.0, branch, true));
    }
    out
}

/// All fixed points on both branches, sorted by `(phi, z)`.
pub fn find_fixed_points(p: &ModelParams) -> Vec<FixedPoint> {
    find_fixed_points_with(p, DEFAULT_SCAN_SAMPLES)
}

pub fn find_fixed_points_with(p: &ModelParams, samples: usize) -> Vec<FixedPoint> {
    let mut out: Vec<FixedPoint> = PhaseBranch::ALL
        .iter()
        .flat_map(|&b| scan_branch(p, b, samples))
        .collect();
    out.sort_by(|a, b| a.branch.cmp(&b.branch).then(a.z.total_cmp(&b.z)));
    out
}

/// Number of fixed points on each branch, `(phi = 0, phi = pi)`.
pub fn branch_counts(points: &[FixedPoint]) -> (usize, usize) {
    let zero = points.iter().filter(|f| f.branch == PhaseBranch::Zero).count();
    (zero, points.len() - zero)
}

/// Stationary `z` values obtained by inverting the closed-form excitation
/// ratio `k_of_z(z) = k` on both signs. Independent of the scan.
///
/// Returns sorted, merged roots. Phase branches are not assigned here.
pub fn invert_excitation_ratio(p: &ModelParams, samples: usize) -> Vec<(f64, BranchSign)> {
    let range = admissible_z_range(p.delta, p.lambda_ratio);
    let tol = 1e-6 * p.k.abs().max(1.0);
    let mut found: Vec<(f64, BranchSign)> = Vec::new();
    for interval in &range.intervals {
        for sign in [BranchSign::Plus, BranchSign::Minus] {
            let h = |z: f64| match k_of_z_inner(p.delta, p.lambda_ratio, z, sign, 1e-12) {
                Ok(k) => k - p.k,
                Err(_) => f64::NAN,
            };
            let n = samples.max(2);
            let width = interval.hi - interval.lo;
            let mut prev: Option<(f64, f64)> = None;
            for i in 0..=n {
                let mut z = interval.lo + width * (i as f64) / (n as f64);
                if (i == 0 && interval.lo_open) || (i == n && interval.hi_open) {
                    // step inside an open end at z = 0
                    z = if i == 0 { interval.lo + 1e-3 * width / n as f64 } else { interval.hi - 1e-3 * width / n as f64 };
                }
                if z == 0.0 {
                    prev = None;
                    continue;
                }
                let v = h(z);
                if !v.is_finite() {
                    prev = None;
                    continue;
                }
                if v == 0.0 {
                    found.push((z, sign));
                } else if let Some((zp, vp)) = prev {
                    if vp != 0.0 && (vp > 0.0) != (v > 0.0) {
                        let s = if vp > 0.0 { 1 } else { -1 };
                        let r = bisect(h, zp, z, s);
                        let hr = h(r);
                        // sign flips across the pole at z = 0 are not roots
                        if hr.is_finite() && hr.abs() <= tol {
                            found.push((r, sign));
                        }
                    }
                }
                prev = Some((z, v));
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, BranchSign)> = Vec::new();
    for (z, s) in found {
        if merged.last().is_some_and(|m| (m.0 - z).abs() < MERGE_DISTANCE) {
            continue;
        }
        merged.push((z, s));
    }
    merged
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    K,
    LambdaRatio,
    Delta,
}

impl SweepAxis {
    pub fn apply(self, base: &ModelParams, value: f64) -> Result<ModelParams> {
        match self {
            SweepAxis::K => ModelParams::new(base.delta, base.lambda_ratio, value),
            SweepAxis::LambdaRatio => ModelParams::new(base.delta, value, base.k),
            SweepAxis::Delta => ModelParams::new(value, base.lambda_ratio, base.k),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::K => "k",
            SweepAxis::LambdaRatio => "lambda_ratio",
            SweepAxis::Delta => "delta",
        }
    }
}

/// One row of a bifurcation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub fixed_points: Vec<FixedPoint>,
    pub error: Option<String>,
}

/// Place where the number of fixed points on a branch changes between two
/// consecutive sweep values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldPoint {
    pub branch: PhaseBranch,
    pub before: f64,
    pub after: f64,
    pub count_before: usize,
    pub count_after: usize,
}

impl FoldPoint {
    pub fn brackets(&self, value: f64) -> bool {
        self.before.min(self.after) <= value && value <= self.before.max(self.after)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSweep {
    pub axis: SweepAxis,
    pub base: ModelParams,
    pub rows: Vec<SweepRow>,
    pub folds: Vec<FoldPoint>,
}

/// Evenly spaced values from `from` to `to`, endpoints included.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    let span = to - from;
    let last = (steps - 1) as f64;
    (0..steps).map(|i| from + span * (i as f64) / last).collect()
}

/// Pointwise fixed-point census along one parameter axis.
pub fn branch_sweep(base: &ModelParams, axis: SweepAxis, from: f64, to: f64, steps: usize) -> Result<BranchSweep> {
    if !from.is_finite() || !to.is_finite() {
        return Err(ModelError::InvalidConfig(format!("sweep range [{from}, {to}] is not finite")));
    }
    if steps < 2 {
        return Err(ModelError::InvalidConfig(format!("sweep needs at least 2 steps, got {steps}")));
    }
    let rows: Vec<SweepRow> = linspace(from, to, steps)
        .into_par_iter()
        .map(|value| match axis.apply(base, value) {
            Ok(p) => SweepRow { value, fixed_points: find_fixed_points(&p), error: None },
            Err(e) => SweepRow { value, fixed_points: Vec::new(), error: Some(e.to_string()) },
        })
        .collect();

    let mut folds = Vec::new();
    for pair in rows.windows(2) {
        if pair[0].error.is_some() || pair[1].error.is_some() {
            continue;
        }
        let a = branch_counts(&pair[0].fixed_points);
        let b = branch_counts(&pair[1].fixed_points);
        for (branch, ca, cb) in [(PhaseBranch::Zero, a.0, b.0), (PhaseBranch::Pi, a.1, b.1)] {
            if ca != cb {
                folds.push(FoldPoint {
                    branch,
                    before: pair[0].value,
                    after: pair[1].value,
                    count_before: ca,
                    count_after: cb,
                });
            }
        }
    }
    Ok(BranchSweep { axis, base: *base, rows, folds })
}

/// One `(delta, lambda_ratio)` cell of a fixed-point surface at fixed `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub delta: f64,
    pub lambda_ratio: f64,
    pub fixed_points: Vec<FixedPoint>,
}

/// Fixed points over a `(delta, lambda_ratio)` grid, rows ordered by
/// `lambda_ratio` then `delta`.
pub fn surface_scan(
    k: f64,
    delta_range: (f64, f64, usize),
    lambda_range: (f64, f64, usize),
) -> Result<Vec<SurfaceCell>> {
    for (from, to, steps) in [delta_range, lambda_range] {
        if !from.is_finite() || !to.is_finite() || steps < 2 {
            return Err(ModelError::InvalidConfig(format!("bad surface axis [{from}, {to}] x {steps}")));
        }
    }
    let deltas = linspace(delta_range.0, delta_range.1, delta_range.2);
    let lambdas = linspace(lambda_range.0, lambda_range.1, lambda_range.2);
    let cells: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| deltas.iter().map(move |&d| (d, l)))
        .collect();
    cells
        .into_par_iter()
        .map(|(delta, lambda_ratio)| {
            let p = ModelParams::new(delta, lambda_ratio, k)?;
            Ok(SurfaceCell { delta, lambda_ratio, fixed_points: find_fixed_points(&p) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: f64, l: f64, k: f64) -> ModelParams {
        ModelParams::new(d, l, k).unwrap()
    }

    fn quadratic_root(k: f64) -> f64 {
        (k - (k * k + 3.0).sqrt()) / 3.0
    }

    #[test]
    fn k_of_z_endpoints() {
        for (d, l) in [(0.0, 0.0), (0.3, 6.0), (-2.0, 0.5), (0.1, 100.0)] {
            for s in [BranchSign::Plus, BranchSign::Minus] {
                assert_eq!(k_of_z(d, l, 1.0, s).unwrap(), 1.0);
                assert_eq!(k_of_z(d, l, -1.0, s).unwrap(), -1.0);
            }
        }
    }

    #[test]
    fn k_of_z_resonant_lambda_six() {
        // 7 +- 4 sqrt(8/3) at 50 digits
        let plus = k_of_z(0.0, 6.0, 1.0 / 3.0, BranchSign::Plus).unwrap();
        let minus = k_of_z(0.0, 6.0, 1.0 / 3.0, BranchSign::Minus).unwrap();
        assert!((plus - 13.531972647421808).abs() < 1e-12);
        assert!((minus - 0.46802735257819174).abs() < 1e-12);
    }

    #[test]
    fn k_of_z_errors() {
        assert_eq!(k_of_z(0.0, 6.0, 0.0, BranchSign::Plus), Err(ModelError::ZeroPopulation));
        // discriminant 36 z^2 - 4 z is negative on (0, 1/9)
        assert!(matches!(
            k_of_z(0.0, 6.0, 0.05, BranchSign::Plus),
            Err(ModelError::NegativeDiscriminant { .. })
        ));
        assert!(k_of_z(0.0, 6.0, 1.5, BranchSign::Plus).is_err());
    }

    #[test]
    fn bounds() {
        let (zm, zp) = z_bounds(0.0, 6.0).unwrap();
        assert_eq!(zm, 0.0);
        assert!((zp - 4.0 / 36.0).abs() < 1e-16);
        assert_eq!(z_bounds(0.0, 2.0).unwrap().1, 1.0);
        for l in [0.5, 3.0, 7.0] {
            let (zm, zp) = z_bounds(1.0 / l, l).unwrap();
            assert!((zm - 1.0 / (l * l)).abs() < 1e-15);
            assert!((zp - 1.0 / (l * l)).abs() < 1e-15);
        }
        assert_eq!(z_bounds(0.0, 0.0), Err(ModelError::NoExclusionBand));
        assert!(matches!(z_bounds(1.0, 2.0), Err(ModelError::NoRealBounds(_))));
    }

    #[test]
    fn admissible_range_excludes_zero_and_band() {
        let r = admissible_z_range(0.0, 6.0);
        assert!(r.contains(-0.5));
        assert!(!r.contains(0.0));
        assert!(!r.contains(0.05));
        assert!(r.contains(4.0 / 36.0));
        assert!(r.contains(1.0));
        let r = admissible_z_range(0.0, 0.0);
        assert!(r.contains(-1.0) && !r.contains(0.0) && !r.contains(0.1));
        let r = admissible_z_range(1.0, 2.0);
        assert!(r.contains(0.5) && r.contains(-0.5) && !r.contains(0.0));
    }

    #[test]
    fn k_at_zplus_values() {
        assert!((k_at_zplus(6.0).unwrap() - 1312.0 / 288.0).abs() < 1e-14);
        assert_eq!(k_at_zplus(2.0).unwrap(), 1.0);
        let big = k_at_zplus(5000.0).unwrap();
        assert!((big / (5000.0f64 * 5000.0 / 8.0) - 1.0).abs() < 1e-12);
        assert!(k_at_zplus(0.0).is_err());
        for l in [2.5, 6.0, 10.0] {
            // the discriminant vanishes at z_plus; its round-off enters through a sqrt
            let via_closed_form = k_of_z_inner(0.0, l, 4.0 / (l * l), BranchSign::Plus, 1e-12).unwrap();
            assert!((via_closed_form / k_at_zplus(l).unwrap() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn critical_values() {
        let c = critical_params(6.0).unwrap();
        assert!((c.z_c - 1.0 / 3.0).abs() < 1e-15);
        let (lo, hi) = c.window().unwrap();
        assert!((hi - 13.531972647421808).abs() < 1e-9);
        assert!((lo - 0.46802735257819174).abs() < 1e-9);
        let c = critical_params(2.0).unwrap();
        assert!((c.z_c - 1.0).abs() < 1e-15);
        assert_eq!(c.window(), Some((1.0, 1.0)));
        let c = critical_params(1.0).unwrap();
        assert!(c.z_c > 1.0 && c.window().is_none());
        assert!(critical_params(0.0).is_err());
        assert!(critical_params(-1.0).is_err());
    }

    #[test]
    fn decoupled_fixed_points_solve_the_quadratic() {
        for k in [0.1, 10.0] {
            let fps = find_fixed_points(&params(0.0, 0.0, k));
            assert_eq!(branch_counts(&fps), (1, 1));
            for fp in &fps {
                assert!((fp.z - quadratic_root(k)).abs() < 1e-9, "{} {}", fp.z, quadratic_root(k));
                assert!(fp.residual.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn josephson_census() {
        let fps = find_fixed_points(&params(0.0, 6.0, 10.0));
        assert_eq!(branch_counts(&fps), (3, 1));
        let kinds: Vec<_> = fps.iter().map(|f| f.classification).collect();
        assert_eq!(
            kinds,
            [Stability::Maximum, Stability::Saddle, Stability::Maximum, Stability::Minimum]
        );
        assert_eq!(fps[3].oscillation_label(), Some("plasma"));
        assert_eq!(fps[0].oscillation_label(), Some("pi"));
        assert_eq!(fps[1].oscillation_label(), None);
        for fp in &fps {
            assert!(fp.residual.abs() < 1e-9);
            assert!(!fp.boundary);
            assert_ne!(fp.branch_sign, BranchSign::Oracle);
        }
        assert_eq!(branch_counts(&find_fixed_points(&params(0.0, 6.0, 0.1))), (1, 1));
    }

    #[test]
    fn pole_is_kept_at_unit_excitation() {
        // for lambda = 6 the third phi = 0 root runs into z = 1 as k -> 1
        let below = find_fixed_points(&params(0.0, 6.0, 0.999));
        let at = find_fixed_points(&params(0.0, 6.0, 1.0));
        let above = find_fixed_points(&params(0.0, 6.0, 1.001));
        assert_eq!(branch_counts(&below), (3, 1));
        assert_eq!(branch_counts(&at), (3, 1));
        assert_eq!(branch_counts(&above), (3, 1));
        let pole = at.iter().find(|f| f.z == 1.0).unwrap();
        assert!(pole.boundary);
        assert_eq!(pole.branch, PhaseBranch::Zero);
        assert_eq!(pole.classification, Stability::Maximum);
        // weak coupling: no interior root collapses into the pole
        let weak = find_fixed_points(&params(0.0, 1.0, 1.0));
        assert!(weak.iter().all(|f| f.z < 1.0));
    }

    #[test]
    fn near_boundary_roots_are_flagged() {
        let fps = find_fixed_points(&params(0.0, 6.0, 1.0 - 1e-9));
        assert_eq!(branch_counts(&fps), (3, 1));
        assert!(fps.iter().any(|f| f.boundary));
    }

    #[test]
    fn empty_domain() {
        assert!(find_fixed_points(&params(0.0, 1.0, -1.5)).is_empty());
    }

    #[test]
    fn inversion_agrees_with_scan() {
        for (d, l, k) in [(0.0, 6.0, 10.0), (0.0, 0.0, 0.1), (0.2, 3.0, 2.0), (-0.5, 1.5, 0.7)] {
            let p = params(d, l, k);
            let mut scan: Vec<f64> = find_fixed_points(&p).iter().map(|f| f.z).collect();
            scan.sort_by(f64::total_cmp);
            scan.dedup_by(|a, b| (*a - *b).abs() < MERGE_DISTANCE);
            let inv: Vec<f64> = invert_excitation_ratio(&p, 20_000).iter().map(|r| r.0).collect();
            assert_eq!(scan.len(), inv.len(), "{d} {l} {k}: {scan:?} vs {inv:?}");
            for (a, b) in scan.iter().zip(&inv) {
                assert!((a - b).abs() < 1e-7, "{a} {b}");
            }
        }
    }

    #[test]
    fn sweep_folds_at_window() {
        let base = params(0.0, 6.0, 1.0);
        let sweep = branch_sweep(&base, SweepAxis::K, 0.01, 20.0, 400).unwrap();
        let zero_folds: Vec<_> = sweep.folds.iter().filter(|f| f.branch == PhaseBranch::Zero).collect();
        assert_eq!(zero_folds.len(), 2, "{zero_folds:?}");
        assert!(zero_folds[0].brackets(0.46802735257819174));
        assert!(zero_folds[1].brackets(13.531972647421808));
        assert!(branch_sweep(&base, SweepAxis::K, 0.0, 1.0, 1).is_err());
        assert!(branch_sweep(&base, SweepAxis::K, 0.0, f64::INFINITY, 10).is_err());
    }

    #[test]
    fn sweep_rows_record_errors() {
        let base = params(0.0, 6.0, 1.0);
        // the span overflows, so interior values are not finite
        let sweep = branch_sweep(&base, SweepAxis::K, -1e308, 1e308, 3).unwrap();
        assert_eq!(sweep.rows.len(), 3);
        assert!(sweep.rows.iter().any(|r| r.error.is_some()));
        assert!(sweep.folds.is_empty());
    }

    #[test]
    fn surface_has_all_cells() {
        let cells = surface_scan(10.0, (-0.5, 0.5, 3), (0.0, 6.0, 4)).unwrap();
        assert_eq!(cells.len(), 12);
        assert_eq!((cells[1].delta, cells[1].lambda_ratio), (0.0, 0.0));
        assert!(cells.iter().all(|c| !c.fixed_points.is_empty()));
    }

    #[test]
    fn branch_from_phi() {
        assert_eq!(PhaseBranch::from_phi(2.0 * PI), Some(PhaseBranch::Zero));
        assert_eq!(PhaseBranch::from_phi(-PI), Some(PhaseBranch::Pi));
        assert_eq!(PhaseBranch::from_phi(1.0), None);
    }
}
