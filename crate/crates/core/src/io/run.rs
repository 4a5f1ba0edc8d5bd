use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::{Check, GenericConstant, RunConfig};
use super::snapshot::{load_trajectory_file, Snapshot, TrajectoryWriter};
use super::IoError;
use crate::estimates::report::{fmt, BoundBuilder};
use crate::estimates::{
    check_decay_bound, check_dissipation_bound, check_energy_identity, check_h2_bound, compute_constants,
    BoundReport, Constants, EnvelopeForm,
};
use crate::fields::random_solenoidal;
use crate::model::{lattice_ratio, simulate_observed, Forcing, ModelError, Retention, SimParams};
use crate::pathspace::{
    absorbing_check, gronwall_entry_time, path_metric, AbsorbingOutcome, PathMetricConfig, Trajectory,
};
use crate::pressure::{
    centered_momentum_residual, continuity_modulus, pressure_control, pressure_equation_residual, recover_pressure,
    ContinuityVerdict,
};
use crate::spectral::{SpectralError, SpectralVectorField};

/// Largest accepted back-substitution residual of the pressure solve.
const PRESSURE_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The window is too short to decide.
    Inconclusive,
}

impl CheckStatus {
    fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Inconclusive => "INCONCLUSIVE",
        }
    }

    fn of(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: Check,
    pub status: CheckStatus,
    /// Smallest `rhs - lhs` (or tolerance minus measured value).
    pub worst_margin: f64,
    pub detail: String,
}

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    CheckFailure = 1,
    Usage = 2,
    BlowUp = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub header: Vec<String>,
    pub outcomes: Vec<CheckOutcome>,
    /// Step and time of a detected blow-up.
    pub blow_up: Option<(usize, f64)>,
}

impl RunSummary {
    pub fn exit_status(&self) -> ExitStatus {
        if self.blow_up.is_some() {
            ExitStatus::BlowUp
        } else if self.outcomes.iter().any(|o| o.status == CheckStatus::Fail) {
            ExitStatus::CheckFailure
        } else {
            ExitStatus::Pass
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for h in &self.header {
            let _ = writeln!(s, "{h}");
        }
        if let Some((step, t)) = self.blow_up {
            let _ = writeln!(s, "blow-up at step {step} (t = {})", fmt(t));
        }
        for o in &self.outcomes {
            let _ = writeln!(
                s,
                "check {} {} worst_margin={} {}",
                o.check,
                o.status.label(),
                fmt(o.worst_margin),
                o.detail
            );
        }
        let verdict = match self.exit_status() {
            ExitStatus::Pass => "PASS",
            ExitStatus::CheckFailure => "FAIL",
            ExitStatus::BlowUp => "BLOW-UP",
            ExitStatus::Usage => "USAGE",
        };
        let _ = writeln!(s, "result {verdict}");
        s
    }

    fn write(&self, out_dir: &Path) -> Result<(), IoError> {
        fs::write(out_dir.join("summary.txt"), self.render())?;
        Ok(())
    }
}

fn csv_file(out_dir: &Path, name: &str) -> Result<BufWriter<File>, IoError> {
    Ok(BufWriter::new(File::create(out_dir.join(name))?))
}

/// Last three `(t, w)` samples and the `(t, residual)` rows so far.
type MomentumState = (VecDeque<(f64, SpectralVectorField)>, Vec<(f64, f64)>);

/// Checks that need full states, accumulated one sample at a time.
struct StateChecks {
    params: SimParams,
    forcing: Forcing,
    pressure: Option<(BoundBuilder, f64, f64)>,
    momentum: Option<MomentumState>,
}

impl StateChecks {
    fn new(cfg: &RunConfig, params: SimParams, forcing: Forcing) -> Self {
        Self {
            params,
            forcing,
            pressure: cfg
                .checks
                .contains(&Check::Pressure)
                .then(|| (BoundReport::builder(), 0.0, f64::INFINITY)),
            momentum: cfg.checks.contains(&Check::Momentum).then(|| (VecDeque::new(), Vec::new())),
        }
    }

    fn observe(&mut self, t: f64, w: &SpectralVectorField) -> Result<(), SpectralError> {
        let (p, f) = (&self.params, &self.forcing);
        if let Some((rows, residual, grad_margin)) = &mut self.pressure {
            let q = recover_pressure(w, f, p);
            *residual = f64::max(*residual, pressure_equation_residual(&q, w, f, p));
            let c = pressure_control(w, f, p);
            rows.push(t, c.filtered_pressure_hm1, c.bound, 0.0);
            *grad_margin = grad_margin.min(c.grad_h_bound - c.grad_h);
        }
        if let Some((window, rows)) = &mut self.momentum {
            window.push_back((t, w.clone()));
            if window.len() == 3 {
                let r = centered_momentum_residual(&window[0].1, &window[1].1, &window[2].1, f, p, p.sample_dt)?;
                rows.push((window[1].0, r));
                window.pop_front();
            }
        }
        Ok(())
    }

    fn finish(self, cfg: &RunConfig, out_dir: &Path, outcomes: &mut Vec<CheckOutcome>) -> Result<(), IoError> {
        if let Some((rows, residual, grad_margin)) = self.pressure {
            let report = rows.build();
            report.write_csv(csv_file(out_dir, "pressure.csv")?)?;
            let ok = report.satisfied && residual <= PRESSURE_RESIDUAL_TOL && grad_margin >= 0.0;
            outcomes.push(CheckOutcome {
                check: Check::Pressure,
                status: CheckStatus::of(ok),
                worst_margin: report.min_margin(),
                detail: format!(
                    "solve_residual={} grad_h_margin={}",
                    fmt(residual),
                    fmt(grad_margin)
                ),
            });
        }
        if let Some((_, rows)) = self.momentum {
            let mut w = csv::Writer::from_writer(csv_file(out_dir, "momentum.csv")?);
            w.write_record(["t", "residual"])?;
            for (t, r) in &rows {
                w.write_record(&[fmt(*t), fmt(*r)])?;
            }
            w.flush()?;
            let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
            outcomes.push(CheckOutcome {
                check: Check::Momentum,
                status: if rows.is_empty() {
                    CheckStatus::Inconclusive
                } else {
                    CheckStatus::of(max <= cfg.momentum_tol)
                },
                worst_margin: cfg.momentum_tol - max,
                detail: format!("max_residual={} tol={}", fmt(max), fmt(cfg.momentum_tol)),
            });
        }
        Ok(())
    }
}

fn header(cfg: &RunConfig, p: &SimParams, c: &Constants) -> Vec<String> {
    vec![
        "hfns run summary".to_string(),
        format!(
            "n={} L={} nu={} alpha={} dt={} T={} sample_dt={} dealias={}",
            p.n,
            fmt(p.period_scale),
            fmt(p.nu),
            fmt(p.alpha),
            fmt(p.dt),
            fmt(p.final_time),
            fmt(p.sample_dt),
            p.dealias
        ),
        format!("initial={:?}", cfg.initial),
        format!("forcing={:?}", cfg.forcing),
        format!(
            "lambda1={} K1={} K1_literal={} K2={}",
            fmt(c.lambda1),
            fmt(c.big_k1),
            fmt(c.big_k1_literal),
            fmt(c.big_k2)
        ),
    ]
}

fn bound_outcome(check: Check, reports: &[&BoundReport], detail: String) -> CheckOutcome {
    CheckOutcome {
        check,
        status: CheckStatus::of(reports.iter().all(|r| r.satisfied)),
        worst_margin: reports.iter().map(|r| r.min_margin()).fold(f64::INFINITY, f64::min),
        detail,
    }
}

/// Checks that only need norms and forcing work.
fn trajectory_checks(
    cfg: &RunConfig,
    traj: &Trajectory,
    f: &Forcing,
    c: &Constants,
    out_dir: &Path,
    outcomes: &mut Vec<CheckOutcome>,
) -> Result<(), IoError> {
    let t0 = traj.t0();
    for check in &cfg.checks {
        match check {
            Check::Energy => {
                let e = check_energy_identity(traj, f)?;
                e.write_csv(csv_file(out_dir, "energy.csv")?)?;
                outcomes.push(CheckOutcome {
                    check: Check::Energy,
                    status: CheckStatus::of(e.max_residual <= cfg.energy_tol),
                    worst_margin: e.margin().into_iter().fold(f64::INFINITY, f64::min),
                    detail: format!(
                        "max_residual={} tol={} alternative_form_residual={} supported={:?}",
                        fmt(e.max_residual),
                        fmt(cfg.energy_tol),
                        fmt(e.max_residual_printed),
                        e.supported
                    ),
                });
            }
            Check::Decay => {
                let (env, uni) = check_decay_bound(traj, c, t0, EnvelopeForm::FromOrigin)?;
                env.write_csv(csv_file(out_dir, "decay.csv")?)?;
                uni.write_csv(csv_file(out_dir, "decay_uniform.csv")?)?;
                outcomes.push(bound_outcome(
                    Check::Decay,
                    &[&env, &uni],
                    format!("envelope_margin={} uniform_margin={}", fmt(env.min_margin()), fmt(uni.min_margin())),
                ));
            }
            Check::Dissipation => {
                let mut reports = Vec::new();
                let mut detail = String::new();
                for &r in &cfg.dissipation_windows {
                    if r > traj.span() * (1.0 + 1e-12) {
                        let _ = write!(detail, "r={}:skipped ", fmt(r));
                        continue;
                    }
                    let rep = check_dissipation_bound(traj, c, r)?;
                    rep.write_csv(csv_file(out_dir, &format!("dissipation_r{r}.csv"))?)?;
                    let _ = write!(detail, "r={}:{} ", fmt(r), fmt(rep.min_margin()));
                    reports.push(rep);
                }
                let mut o = bound_outcome(Check::Dissipation, &reports.iter().collect::<Vec<_>>(), detail.trim_end().to_string());
                if reports.is_empty() {
                    o.status = CheckStatus::Inconclusive;
                    o.worst_margin = 0.0;
                }
                outcomes.push(o);
            }
            Check::Absorbing => {
                let nu = traj.params().nu;
                let t1 = gronwall_entry_time(traj.norm(0).vh_sq, c.big_k1, nu, c.lambda1);
                let latest = t0 + t1 + traj.sample_dt() * (1.0 - 1e-9);
                let (status, margin, detail) = match absorbing_check(traj, c) {
                    AbsorbingOutcome::Entered { time, .. } => (
                        CheckStatus::of(time <= latest),
                        t0 + t1 - time,
                        format!("entry_time={} predicted_t1={}", fmt(time), fmt(t1)),
                    ),
                    AbsorbingOutcome::NeverWithinSpan => (
                        if t1 <= traj.span() { CheckStatus::Fail } else { CheckStatus::Inconclusive },
                        t1 - traj.span(),
                        format!("not_entered_within_span predicted_t1={}", fmt(t1)),
                    ),
                    AbsorbingOutcome::DegenerateThreshold => {
                        (CheckStatus::Inconclusive, 0.0, "K1=0 degenerate_ball".to_string())
                    }
                };
                outcomes.push(CheckOutcome {
                    check: Check::Absorbing,
                    status,
                    worst_margin: margin,
                    detail,
                });
            }
            Check::H2 => {
                let calibrated = check_h2_bound(traj, c, t0, EnvelopeForm::FromOrigin)?.calibrated_c_h2;
                let used = match cfg.c_h2 {
                    GenericConstant::Calibrate => calibrated,
                    GenericConstant::Fixed(v) => v,
                };
                let mut status_ok = used.is_finite();
                let (env, uni) = if used.is_finite() {
                    let rep = check_h2_bound(traj, &Constants { c_h2: used, ..*c }, t0, EnvelopeForm::FromOrigin)?;
                    (rep.envelope, rep.uniform)
                } else {
                    (BoundReport::default(), BoundReport::default())
                };
                env.write_csv(csv_file(out_dir, "h2.csv")?)?;
                uni.write_csv(csv_file(out_dir, "h2_uniform.csv")?)?;
                status_ok &= env.satisfied && uni.satisfied;
                outcomes.push(CheckOutcome {
                    check: Check::H2,
                    status: CheckStatus::of(status_ok),
                    worst_margin: env.min_margin().min(uni.min_margin()),
                    detail: format!("C_h2={} calibrated_C_h2={}", fmt(used), fmt(calibrated)),
                });
            }
            Check::Pressure | Check::Momentum | Check::Continuity => {}
        }
    }
    Ok(())
}

fn continuity_check(
    cfg: &RunConfig,
    w0: &SpectralVectorField,
    f: &Forcing,
    p: &SimParams,
    out_dir: &Path,
) -> Result<CheckOutcome, IoError> {
    let direction = random_solenoidal(p.grid(), cfg.continuity_seed, -2.0, 3.0)
        .map_err(|e| IoError::Mismatch(e.to_string()))?;
    let r = continuity_modulus(w0, &direction, &cfg.continuity_epsilons, f, p)?;
    r.write_csv(csv_file(out_dir, "continuity.csv")?)?;
    let growth = r
        .sup_vh_ratio
        .windows(2)
        .map(|x| 2.0 * x[0] - x[1])
        .fold(f64::INFINITY, f64::min);
    Ok(CheckOutcome {
        check: Check::Continuity,
        status: CheckStatus::of(r.verdict == ContinuityVerdict::ConsistentWith),
        worst_margin: if growth.is_finite() { growth } else { 0.0 },
        detail: format!(
            "{} ratios={}",
            match r.verdict {
                ContinuityVerdict::ConsistentWith => "consistent_with_continuity",
                ContinuityVerdict::InconsistentWith => "inconsistent_with_continuity",
            },
            r.sup_vh_ratio.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join(";")
        ),
    })
}

fn generic_constant(cfg: &RunConfig) -> f64 {
    match cfg.c_h2 {
        GenericConstant::Fixed(v) => v,
        GenericConstant::Calibrate => 0.0,
    }
}

/// Simulate the configured run into `out_dir` and evaluate its checks.
///
/// Writes `trajectory.hfns`, one CSV per check and `summary.txt`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<RunSummary, IoError> {
    fs::create_dir_all(out_dir)?;
    let p = cfg.sim;
    let w0 = cfg.initial_state()?;
    let f = cfg.forcing_field()?;
    let c = compute_constants(&f, &p, generic_constant(cfg))?;
    let mut summary = RunSummary {
        header: header(cfg, &p, &c),
        outcomes: Vec::new(),
        blow_up: None,
    };

    let mut writer = TrajectoryWriter::create(&out_dir.join("trajectory.hfns"))?;
    let mut states = StateChecks::new(cfg, p, f.clone());
    let result = simulate_observed(&w0, &f, &p, Retention::Diagnostics, |j, w| -> Result<(), IoError> {
        let time = j as f64 * p.sample_dt;
        writer.append(&Snapshot {
            field: w.clone(),
            alpha: p.alpha,
            nu: p.nu,
            time,
        })?;
        states.observe(time, w)?;
        Ok(())
    });
    writer.finish()?;
    let traj = match result {
        Ok(t) => t,
        Err(IoError::Model(ModelError::BlowUp { step, time })) => {
            summary.blow_up = Some((step, time));
            summary.write(out_dir)?;
            return Ok(summary);
        }
        Err(e) => return Err(e),
    };

    trajectory_checks(cfg, &traj, &f, &c, out_dir, &mut summary.outcomes)?;
    states.finish(cfg, out_dir, &mut summary.outcomes)?;
    if cfg.checks.contains(&Check::Continuity) {
        match continuity_check(cfg, &w0, &f, &p, out_dir) {
            Ok(o) => summary.outcomes.push(o),
            Err(IoError::Pressure(crate::pressure::PressureError::Model(ModelError::BlowUp { step, time }))) => {
                summary.blow_up = Some((step, time));
            }
            Err(e) => return Err(e),
        }
    }
    summary.outcomes.sort_by_key(|o| o.check);
    summary.write(out_dir)?;
    Ok(summary)
}

/// Rebuild a trajectory from stored snapshots. Parameters not stored in the
/// file (`dt`, `dealias`) come from `base`; the header fields must agree
/// across snapshots and the times must form a uniform lattice.
pub fn trajectory_from_snapshots(
    snaps: Vec<Snapshot>,
    base: &SimParams,
    forcing: Option<Forcing>,
) -> Result<Trajectory, IoError> {
    let first = snaps.first().ok_or(IoError::ShortRead)?;
    let grid = *first.field.grid();
    let (alpha, nu, t0) = (first.alpha, first.nu, first.time);
    for s in &snaps {
        if *s.field.grid() != grid || s.alpha != alpha || s.nu != nu {
            return Err(IoError::Mismatch("snapshots disagree on n, L, alpha or nu".into()));
        }
    }
    let sample_dt = if snaps.len() > 1 { snaps[1].time - t0 } else { base.sample_dt };
    for (j, s) in snaps.iter().enumerate() {
        let expect = t0 + j as f64 * sample_dt;
        if (s.time - expect).abs() > 1e-9 * sample_dt.max(expect.abs()) {
            return Err(IoError::Mismatch(format!("snapshot {j} at t = {} is off the sample lattice", s.time)));
        }
    }
    let span = (snaps.len() - 1) as f64 * sample_dt;
    let dt = if lattice_ratio(sample_dt, base.dt).is_some_and(|k| k >= 1) { base.dt } else { sample_dt };
    let params = SimParams {
        n: grid.n(),
        period_scale: grid.period_scale(),
        alpha,
        nu,
        sample_dt,
        dt,
        final_time: span,
        dealias: base.dealias,
    };
    Ok(Trajectory::from_states(
        params,
        t0,
        snaps.into_iter().map(|s| s.field).collect(),
        forcing,
    )?)
}

/// Evaluate the configured checks on a stored trajectory file.
pub fn verify(cfg: &RunConfig, trajectory: &Path, out_dir: &Path) -> Result<RunSummary, IoError> {
    fs::create_dir_all(out_dir)?;
    let f = cfg.forcing_field()?;
    let snaps = load_trajectory_file(trajectory)?;
    let traj = trajectory_from_snapshots(snaps, &cfg.sim, Some(f.clone()))?;
    let p = *traj.params();
    let s = &cfg.sim;
    if p.n != s.n || p.period_scale != s.period_scale || p.alpha != s.alpha || p.nu != s.nu {
        return Err(IoError::Mismatch(format!(
            "file has n={} L={} alpha={} nu={}, configuration has n={} L={} alpha={} nu={}",
            p.n, p.period_scale, p.alpha, p.nu, s.n, s.period_scale, s.alpha, s.nu
        )));
    }
    if lattice_ratio(p.sample_dt, s.sample_dt) != Some(1) && traj.len() > 1 {
        return Err(IoError::Mismatch(format!(
            "file samples every {}, configuration expects {}",
            p.sample_dt, s.sample_dt
        )));
    }
    let c = compute_constants(&f, &p, generic_constant(cfg))?;
    let mut summary = RunSummary {
        header: header(cfg, &p, &c),
        outcomes: Vec::new(),
        blow_up: None,
    };
    trajectory_checks(cfg, &traj, &f, &c, out_dir, &mut summary.outcomes)?;
    let mut states = StateChecks::new(cfg, p, f.clone());
    for j in 0..traj.len() {
        let w = traj.state(j).expect("loaded trajectories hold states");
        states.observe(traj.time(j), w)?;
    }
    states.finish(cfg, out_dir, &mut summary.outcomes)?;
    if cfg.checks.contains(&Check::Continuity) {
        let w0 = traj.state(0).expect("loaded trajectories hold states").clone();
        let cp = SimParams { final_time: traj.span(), ..p };
        summary.outcomes.push(continuity_check(cfg, &w0, &f, &cp, out_dir)?);
    }
    summary.outcomes.sort_by_key(|o| o.check);
    summary.write(out_dir)?;
    Ok(summary)
}

/// Pairwise truncated path metric between named trajectories, written as
/// `a,b,distance,truncation_bound` rows.
pub fn metric_table<W: Write>(
    trajectories: &[(String, Trajectory)],
    cfg: &PathMetricConfig,
    out: W,
) -> Result<Vec<(usize, usize, f64)>, IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "b", "distance", "truncation_bound"])?;
    let mut values = Vec::new();
    for i in 0..trajectories.len() {
        for j in i + 1..trajectories.len() {
            let d = path_metric(&trajectories[i].1, &trajectories[j].1, cfg)?;
            w.write_record(&[
                trajectories[i].0.clone(),
                trajectories[j].0.clone(),
                fmt(d.value),
                fmt(d.truncation_bound),
            ])?;
            values.push((i, j, d.value));
        }
    }
    w.flush()?;
    Ok(values)
}
