use anyhow::Result;
use clap::CommandFactory;
use lmgd_core::analysis::{self, Survey, SurveyGrid};
use lmgd_core::dynamics::{self, IntegratorConfig};
use lmgd_core::fixed_points::{self, SweepAxis};
use lmgd_core::{FixedPoint, ModelParams, PhasePoint};

use crate::output::{Cell, Format, Table, Writer};
use crate::*;

const FIXED_POINT_COLUMNS: [&str; 5] = ["z", "phi", "energy", "classification", "branch_sign"];

fn params(m: &ModelArgs) -> Result<ModelParams> {
    Ok(ModelParams::new(m.delta, m.lambda_ratio, m.k)?)
}

fn writer(out: &OutputArgs, default: Format) -> Result<Writer> {
    Writer::new(&out.out_dir, out.format.unwrap_or(default))
}

fn integrator(a: &IntegrationArgs) -> Result<IntegratorConfig> {
    let cfg = IntegratorConfig {
        abs_tol: a.abs_tol,
        rel_tol: a.rel_tol,
        tau_max: a.tau_max,
        output_stride: a.stride,
        ..IntegratorConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn sorted(points: &[FixedPoint]) -> Vec<FixedPoint> {
    let mut v = points.to_vec();
    v.sort_by(|a, b| a.phi().total_cmp(&b.phi()).then(a.z.total_cmp(&b.z)));
    v
}

fn fixed_point_table(name: &str, points: &[FixedPoint]) -> Table {
    let mut t = Table::new(name, &FIXED_POINT_COLUMNS);
    for f in sorted(points) {
        t.push(vec![
            f.z.into(),
            f.phi().into(),
            f.energy.into(),
            f.classification.as_str().into(),
            f.branch_sign.as_str().into(),
        ]);
    }
    t
}

pub fn fixed_points(a: &FixedPointsArgs) -> Result<()> {
    let p = params(&a.model)?;
    let points = fixed_points::find_fixed_points(&p);
    let mut w = writer(&a.output, Format::Csv)?;
    if points.iter().any(|f| f.boundary) {
        w.notes.push("boundary fixed points are flagged within 1e-6 of the domain edge".into());
    }
    w.table(&fixed_point_table("fixed_points", &points))?;
    w.finish("fixed-points", a)?;
    println!("{} fixed points", points.len());
    Ok(())
}

pub fn critical(a: &CriticalArgs) -> Result<()> {
    let mut t = Table::new("critical", &["lambda_ratio", "z_c", "k_c_minus", "k_c_plus"]);
    let mut w = writer(&a.output, Format::Csv)?;
    for &l in &a.lambda_ratio {
        let c = fixed_points::critical_params(l)?;
        t.push(vec![l.into(), c.z_c.into(), c.k_c_minus.into(), c.k_c_plus.into()]);
        w.notes.push(format!(
            "lambda_ratio = {l}: z_c = {}, 3/lambda_ratio^2 = {}, lambda_ratio^(-2/3) = {}",
            c.z_c,
            c.quoted_estimate(),
            c.asymptotic_estimate()
        ));
        if c.window().is_none() {
            w.notes.push(format!("lambda_ratio = {l}: z_c > 1, so there is no fold window"));
        }
    }
    w.table(&t)?;
    w.finish("critical", a)?;
    Ok(())
}

pub fn bounds(a: &BoundsArgs) -> Result<()> {
    let (z_minus, z_plus) = fixed_points::z_bounds(a.delta, a.lambda_ratio)?;
    let mut t = Table::new("bounds", &["z_minus", "z_plus"]);
    t.push(vec![z_minus.into(), z_plus.into()]);
    let mut w = writer(&a.output, Format::Csv)?;
    w.table(&t)?;
    w.finish("bounds", a)?;
    Ok(())
}

pub fn trajectory(a: &TrajectoryArgs) -> Result<()> {
    let p = params(&a.model)?;
    let cfg = integrator(&a.integration)?;
    let traj = dynamics::integrate(&p, &PhasePoint::new(a.z0, a.phi0), &cfg)?;
    let mut t = Table::new("trajectory", &["tau", "z", "phi", "energy"]);
    for s in &traj.samples {
        t.push(vec![s.tau.into(), s.z.into(), s.phi.into(), s.energy.into()]);
    }
    let mut w = writer(&a.output, Format::Csv)?;
    w.notes.push(format!("termination: {}", traj.termination.as_str()));
    w.notes.push(format!("energy drift: {:e}", traj.energy_drift));
    w.notes.push(format!("phase: {}", traj.phase_class.as_str()));
    w.table(&t)?;
    w.finish("trajectory", a)?;
    println!(
        "{} samples, termination {}, energy drift {:e}",
        traj.samples.len(),
        traj.termination.as_str(),
        traj.energy_drift
    );
    Ok(())
}

pub fn portrait(a: &PortraitArgs) -> Result<()> {
    let p = params(&a.model)?;
    let survey = Survey {
        phi0: a.phi0,
        grid: SurveyGrid::Uniform(a.samples),
        highlights: a.highlight.clone(),
        integrator: integrator(&a.integration)?,
        landscape_size: (a.landscape_phi, a.landscape_z),
        ..Survey::default()
    };
    let bundle = analysis::portrait_bundle(&p, &survey)?;
    let mut w = writer(
        &OutputArgs { format: a.output.format, out_dir: a.output.out_dir.join("portrait") },
        Format::Csv,
    )?;
    w.notes = bundle.notes.clone();
    w.notes.extend(bundle.regime.notes.iter().cloned());

    let mut survey_t = Table::new(
        "survey",
        &["trajectory", "z0", "phi0", "highlighted", "phase_class", "z_min", "z_max", "energy_drift", "termination"],
    );
    let mut traj_t = Table::new("trajectories", &["trajectory", "tau", "z", "phi", "energy"]);
    for (i, s) in bundle.trajectories.iter().enumerate() {
        let tr = &s.trajectory;
        survey_t.push(vec![
            i.into(),
            s.z0.into(),
            s.phi0.into(),
            s.highlighted.into(),
            s.phase_class.as_str().into(),
            tr.z_min.into(),
            tr.z_max.into(),
            tr.energy_drift.into(),
            tr.termination.as_str().into(),
        ]);
        for x in &tr.samples {
            traj_t.push(vec![i.into(), x.tau.into(), x.z.into(), x.phi.into(), x.energy.into()]);
        }
    }

    let g = &bundle.landscape;
    let mut land_t = Table::new("landscape", &["z", "phi", "energy", "in_domain"]);
    for (iz, &z) in g.z_axis.iter().enumerate() {
        for (iphi, &phi) in g.phi_axis.iter().enumerate() {
            let v = g.get(iz, iphi);
            land_t.push(vec![z.into(), phi.into(), v.into(), v.is_some().into()]);
        }
    }

    let mut sep_t = Table::new("separatrix", &["z", "phi", "energy"]);
    match &bundle.separatrix {
        Some(s) => {
            for x in &s.curve {
                sep_t.push(vec![x.z.into(), x.phi.into(), s.energy.into()]);
            }
        }
        None => w.notes.push("no saddle, so no separatrix".into()),
    }

    w.table(&fixed_point_table("fixed_points", &bundle.fixed_points))?;
    w.table(&survey_t)?;
    w.table(&traj_t)?;
    w.table(&land_t)?;
    w.table(&sep_t)?;
    w.finish("portrait", a)?;
    println!("{} trajectories, regime {}", bundle.trajectories.len(), bundle.regime.regime.as_str());
    Ok(())
}

fn usage_error(msg: &str) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::MissingRequiredArgument, msg)
        .exit()
}

pub fn bifurcation(a: &BifurcationArgs) -> Result<()> {
    let (axis, swept) = match a.sweep {
        SweepParam::K => (SweepAxis::K, "--k"),
        SweepParam::LambdaRatio => (SweepAxis::LambdaRatio, "--lambda-ratio"),
        SweepParam::Delta => (SweepAxis::Delta, "--delta"),
    };
    let pick = |v: Option<f64>, flag: &str| match v {
        Some(v) => v,
        None if flag == swept => a.from,
        None => usage_error(&format!("{flag} is required when sweeping {}", axis.as_str())),
    };
    let base = ModelParams::new(
        pick(a.delta, "--delta"),
        pick(a.lambda_ratio, "--lambda-ratio"),
        pick(a.k, "--k"),
    )?;
    let sweep = fixed_points::branch_sweep(&base, axis, a.from, a.to, a.steps)?;

    let mut t = Table::new("bifurcation", &["sweep_value", "z", "phi", "classification"]);
    let mut failed = 0;
    for row in &sweep.rows {
        if let Some(e) = &row.error {
            failed += 1;
            t.push(vec![row.value.into(), Cell::Empty, Cell::Empty, format!("error:{e}").into()]);
            continue;
        }
        for f in sorted(&row.fixed_points) {
            t.push(vec![row.value.into(), f.z.into(), f.phi().into(), f.classification.as_str().into()]);
        }
    }
    if failed == sweep.rows.len() {
        anyhow::bail!("every sweep value failed");
    }
    let mut folds = Table::new("folds", &["branch_phi", "before", "after", "count_before", "count_after"]);
    for f in &sweep.folds {
        folds.push(vec![f.branch.phi().into(), f.before.into(), f.after.into(), f.count_before.into(), f.count_after.into()]);
    }
    let mut w = writer(&a.output, Format::Csv)?;
    if a.sweep == SweepParam::K && a.k.is_some()
        || a.sweep == SweepParam::Delta && a.delta.is_some()
        || a.sweep == SweepParam::LambdaRatio && a.lambda_ratio.is_some()
    {
        w.notes.push(format!("the fixed value of the swept parameter {swept} is ignored"));
    }
    if failed > 0 {
        w.notes.push(format!("{failed} sweep values failed"));
    }
    w.table(&t)?;
    w.table(&folds)?;
    w.finish("bifurcation", a)?;
    println!("{} rows, {} folds", t.rows.len(), sweep.folds.len());
    Ok(())
}

pub fn classify(a: &ClassifyArgs) -> Result<()> {
    let p = params(&a.model)?;
    let report = analysis::classify_regime(&p);
    let format = a.output.format.unwrap_or(Format::Json);
    let mut w = writer(&a.output, format)?;
    match format {
        Format::Json => w.json("regime", &report, 1)?,
        Format::Csv => {
            let mut t = Table::new(
                "regime",
                &["delta", "lambda_ratio", "k", "regime", "phi_zero_count", "phi_pi_count", "k_c_minus", "k_c_plus", "z_c", "notes"],
            );
            let (lo, hi) = report.critical_window.unzip();
            t.push(vec![
                p.delta.into(),
                p.lambda_ratio.into(),
                p.k.into(),
                report.regime.as_str().into(),
                report.fixed_point_counts.phi_zero.into(),
                report.fixed_point_counts.phi_pi.into(),
                lo.into(),
                hi.into(),
                report.z_c.into(),
                report.notes.join("; ").into(),
            ]);
            w.table(&t)?;
        }
    }
    w.finish("classify", a)?;
    println!("{}", report.regime.as_str());
    Ok(())
}

pub fn surface(a: &SurfaceArgs) -> Result<()> {
    let cells = fixed_points::surface_scan(
        a.k,
        (a.delta_from, a.delta_to, a.delta_steps),
        (a.lambda_from, a.lambda_to, a.lambda_steps),
    )?;
    let mut counts = Table::new("surface", &["delta", "lambda_ratio", "phi_zero_count", "phi_pi_count", "regime"]);
    let mut points = Table::new("surface_points", &["delta", "lambda_ratio", "z", "phi", "classification"]);
    for c in &cells {
        let n = analysis::BranchCounts::of(&c.fixed_points);
        counts.push(vec![
            c.delta.into(),
            c.lambda_ratio.into(),
            n.phi_zero.into(),
            n.phi_pi.into(),
            analysis::Regime::from_counts(n).as_str().into(),
        ]);
        for f in sorted(&c.fixed_points) {
            points.push(vec![c.delta.into(), c.lambda_ratio.into(), f.z.into(), f.phi().into(), f.classification.as_str().into()]);
        }
    }
    let mut w = writer(&a.output, Format::Csv)?;
    w.table(&counts)?;
    w.table(&points)?;
    w.finish("surface", a)?;
    Ok(())
}

fn axis(from: f64, to: f64, steps: usize, log: bool) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        anyhow::bail!("bad range [{from}, {to}] with {steps} steps");
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    if log {
        if from <= 0.0 || to <= 0.0 {
            anyhow::bail!("logarithmic range [{from}, {to}] must be positive");
        }
        Ok(fixed_points::linspace(from.ln(), to.ln(), steps).into_iter().map(f64::exp).collect())
    } else {
        Ok(fixed_points::linspace(from, to, steps))
    }
}

pub fn transition(a: &TransitionArgs) -> Result<()> {
    let lambdas = axis(a.lambda_from, a.lambda_to, a.lambda_steps, a.log)?;
    let ks = axis(a.k_from, a.k_to, a.k_steps, a.log)?;
    let rows = analysis::transition_scan(&lambdas, &ks)?;
    let mut summary = Table::new(
        "transition",
        &["lambda_ratio", "z_c", "z_c_quoted", "z_c_asymptotic", "k_c_minus", "k_c_plus", "disagreements"],
    );
    let mut samples = Table::new(
        "transition_samples",
        &["lambda_ratio", "k", "phi_zero_count", "phi_pi_count", "regime", "inside_window", "agrees"],
    );
    let mut w = writer(&a.output, Format::Csv)?;
    for r in &rows {
        let c = r.critical;
        summary.push(vec![
            r.lambda_ratio.into(),
            c.map(|c| c.z_c).into(),
            c.map(|c| c.quoted_estimate()).into(),
            c.map(|c| c.asymptotic_estimate()).into(),
            c.and_then(|c| c.k_c_minus).into(),
            c.and_then(|c| c.k_c_plus).into(),
            r.disagreements.len().into(),
        ]);
        for s in &r.samples {
            samples.push(vec![
                r.lambda_ratio.into(),
                s.k.into(),
                s.counts.phi_zero.into(),
                s.counts.phi_pi.into(),
                s.regime.as_str().into(),
                s.inside_window.map_or(Cell::Empty, Cell::Bool),
                s.agrees.into(),
            ]);
        }
        w.notes.extend(r.disagreements.iter().cloned());
    }
    w.table(&summary)?;
    w.table(&samples)?;
    w.finish("transition", a)?;
    Ok(())
}
