//! The five studies. Members of a family run in parallel; results are
//! collected in member order so every output is deterministic.

use crate::config::{BreakingExpectation, DtRule, ExperimentConfig, InitialData, ModelKind, StudyKind};
use crate::output::{Cell, Check, Snapshot, Summary, Table};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use std::ops::ControlFlow;
use topowave::breaking::{breaking_threshold, energy_low, refinement_gate, BreakingGuards, BreakingMonitor};
use topowave::evolve::{
    evolve, evolve_observed, rhs_kdv_top, BoussinesqModel, BoussinesqState, EvolveOptions, GeneralModel,
    GeneralModelSpec, KdvTopModel, KdvTopSpec, KdvVariant, Model,
};
use topowave::params::{RegimeParams, WaveSpeedField};
use topowave::reconstruct::{pair_series, u_from_zeta, ReconstructionSpec};
use topowave::residual::{
    bouss_residuals, gn_residuals, model_error_vs_boussinesq, order_fit, OrderFit, ResidualOptions,
};
use topowave::{Error, Field64, Grid64, Trajectory64};

/// Floor on `c^2` when building the wave speed.
const C0_MIN: f64 = 0.1;

pub struct StudyOutput {
    pub summary: Summary,
    /// One row per member.
    pub members: Table,
    /// Time series, one row per member and saved time.
    pub series: Table,
    /// Log-log order fits across the family.
    pub fits: Table,
    pub snapshots: Vec<Snapshot>,
}

pub fn initial_field(grid: &Grid64, init: &InitialData, seed: u64) -> Field64 {
    match *init {
        InitialData::Gaussian { amplitude, center, width } => {
            Field64::from_fn(grid, |x: f64| amplitude * (-((x - center) / width).powi(2)).exp())
        }
        InitialData::Sech2 { amplitude, center, width } => {
            Field64::from_fn(grid, |x: f64| amplitude / ((x - center) / width).cosh().powi(2))
        }
        InitialData::RandomBumps { count, amplitude, spread, width } => {
            let mut rng = StdRng::seed_from_u64(seed);
            let bumps: Vec<(f64, f64)> = (0..count)
                .map(|_| (amplitude * rng.random_range(-1.0..=1.0), rng.random_range(-spread..=spread)))
                .collect();
            Field64::from_fn(grid, |x: f64| bumps.iter().map(|(a, c)| a * (-((x - c) / width).powi(2)).exp()).sum())
        }
    }
}

/// A scalar unidirectional model of either family.
pub enum Unidirectional {
    General(GeneralModel<f64>),
    Kdv(KdvTopModel<f64>),
}

impl Model<f64> for Unidirectional {
    type State = Field64;

    fn rhs(&self, s: &Field64) -> topowave::Result<Field64> {
        match self {
            Unidirectional::General(m) => m.rhs(s),
            Unidirectional::Kdv(m) => m.rhs(s),
        }
    }

    fn step(&self, s: &Field64, dt: f64) -> topowave::Result<Field64> {
        match self {
            Unidirectional::General(m) => m.step(s, dt),
            Unidirectional::Kdv(m) => m.step(s, dt),
        }
    }

    fn max_stable_dt(&self) -> Option<f64> {
        match self {
            Unidirectional::General(m) => m.max_stable_dt(),
            Unidirectional::Kdv(m) => m.max_stable_dt(),
        }
    }

    fn stable_dt_at(&self, s: &Field64) -> Option<f64> {
        match self {
            Unidirectional::General(m) => m.stable_dt_at(s),
            Unidirectional::Kdv(m) => m.stable_dt_at(s),
        }
    }
}

/// Grid, speed, model and initial data of one member.
pub struct Member {
    pub params: RegimeParams<f64>,
    pub grid: Grid64,
    pub speed: WaveSpeedField<f64>,
    pub model: Unidirectional,
    pub initial: Field64,
}

impl Member {
    pub fn build(cfg: &ExperimentConfig, params: RegimeParams<f64>, n: usize) -> Result<Self, Error> {
        let grid = Grid64::new(n, cfg.grid.half_length)?;
        let speed = WaveSpeedField::from_profile(&grid, &cfg.bathymetry, &params, C0_MIN)?;
        let (eps, mu) = (params.eps, params.mu);
        let cc = cfg.model.coeffs().map_err(|e| Error::InvalidInput(e.to_string()))?;
        let model = match cfg.model.kind {
            ModelKind::ChVelocity | ModelKind::ChElevation => {
                let cc = cc.expect("CH kinds carry coefficients");
                let spec = if cfg.model.kind == ModelKind::ChVelocity {
                    GeneralModelSpec::velocity(&cc, &speed, eps, mu)
                } else {
                    GeneralModelSpec::elevation(&cc, &speed, eps, mu)
                };
                Unidirectional::General(GeneralModel::new(grid.clone(), spec, speed.clone())?)
            }
            ModelKind::Breaking => Unidirectional::General(GeneralModel::new(
                grid.clone(),
                GeneralModelSpec::breaking(&speed, eps, mu),
                speed.clone(),
            )?),
            ModelKind::KdvElevation | ModelKind::KdvVelocity => {
                let variant =
                    if cfg.model.kind == ModelKind::KdvElevation { KdvVariant::Elevation } else { KdvVariant::Velocity };
                Unidirectional::Kdv(KdvTopModel::new(grid.clone(), KdvTopSpec { variant, eps, mu }, speed.clone())?)
            }
        };
        let initial = initial_field(&grid, &cfg.initial, cfg.seed);
        Ok(Member { params, grid, speed, model, initial })
    }

    pub fn horizon(&self, cfg: &ExperimentConfig) -> f64 {
        cfg.time.horizon / self.params.eps
    }

    pub fn dt(&self, rule: DtRule) -> Result<f64, Error> {
        match rule {
            DtRule::Fixed(v) => Ok(v),
            DtRule::DxFraction(f) => Ok(f * self.grid.dx()),
            DtRule::StabilityFraction(f) => self
                .model
                .stable_dt_at(&self.initial)
                .map(|b| f * b)
                .ok_or_else(|| Error::InvalidInput("model declares no stability bound; use a fixed step".into())),
        }
    }

    pub fn snapshot(&self, traj: &Trajectory64<Field64>) -> Snapshot {
        Snapshot {
            n: self.grid.n(),
            half_length: self.grid.half_length(),
            times: traj.times.clone(),
            values: traj.states.iter().map(|s| s.values().to_vec()).collect(),
        }
    }
}

/// Per-member result: a row of the member table, series rows, a snapshot
/// and study-specific numbers used by the family-level checks.
struct MemberResult {
    row: Vec<Cell>,
    series: Vec<Vec<Cell>>,
    snapshot: Option<Snapshot>,
    metrics: Vec<f64>,
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl MemberResult {
    fn new(row: Vec<Cell>, metrics: Vec<f64>) -> Self {
        MemberResult { row, series: vec![], snapshot: None, metrics, checks: vec![], notes: vec![] }
    }
}

fn param_cells(i: usize, p: &RegimeParams<f64>) -> Vec<Cell> {
    vec![i.into(), p.eps.into(), p.beta.into(), p.alpha.into(), p.mu.into()]
}

const PARAM_COLUMNS: [&str; 5] = ["member", "eps", "beta", "alpha", "mu"];

fn header(extra: &[&'static str]) -> Vec<&'static str> {
    PARAM_COLUMNS.iter().chain(extra).copied().collect()
}

pub fn run_study(cfg: &ExperimentConfig) -> Result<StudyOutput, Error> {
    let (member_cols, series_cols): (&[&'static str], &[&'static str]) = match cfg.study {
        StudyKind::Consistency => (&["raw_r1", "raw_r2", "raw_sup", "r1_normalized", "r2_normalized"], &["r1", "r2"]),
        StudyKind::Convergence => (&["dt", "diff_coarse", "diff_fine", "order", "energy_drift"], &[]),
        StudyKind::Soliton => (&["kappa", "speed", "ansatz_residual", "shape_error"], &["shape_error"]),
        StudyKind::ModelError => (&["terminal_error", "fixed_time_error"], &["zeta_diff", "u_diff"]),
        StudyKind::Breaking => (
            &["threshold_lhs", "threshold_rhs", "threshold_rhs_sum", "threshold_met", "t_detect", "energy_drift"],
            &["sup_slope", "sup_amp"],
        ),
    };
    let members = &cfg.regime.members;
    let results: Vec<MemberResult> = members
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let m = Member::build(cfg, *p, cfg.grid.n)?;
            match cfg.study {
                StudyKind::Consistency => consistency_member(cfg, i, m),
                StudyKind::Convergence => convergence_member(cfg, i, m),
                StudyKind::Soliton => soliton_member(cfg, i, m),
                StudyKind::ModelError => model_error_member(cfg, i, m),
                StudyKind::Breaking => breaking_member(cfg, i, m),
            }
        })
        .collect::<Result<_, _>>()?;

    let mut out = StudyOutput {
        summary: Summary {
            study: format!("{:?}", cfg.study),
            passed: false,
            members: members.len(),
            checks: vec![],
            notes: vec![],
        },
        members: Table::new(header(member_cols)),
        series: Table::new([&["member", "t"][..], series_cols].concat()),
        fits: Table::new(vec!["quantity", "slope", "intercept", "correlation", "lo", "hi", "pass"]),
        snapshots: vec![],
    };
    let mut metrics = vec![];
    for r in results {
        out.members.push(r.row);
        r.series.into_iter().for_each(|row| out.series.push(row));
        out.snapshots.extend(r.snapshot);
        out.summary.checks.extend(r.checks);
        out.summary.notes.extend(r.notes);
        metrics.push(r.metrics);
    }
    let (fits, checks) = family_checks(cfg, &metrics)?;
    for (name, fit, check) in fits {
        out.fits.push(vec![
            name.into(),
            fit.slope.into(),
            fit.intercept.into(),
            fit.correlation.into(),
            check.lo.into(),
            check.hi.into(),
            Cell::Int(check.pass as u64),
        ]);
    }
    out.summary.checks.extend(checks);
    out.summary.passed = out.summary.checks.iter().all(|c| c.pass);
    Ok(out)
}

type Fit = (&'static str, OrderFit, Check);

fn family_checks(cfg: &ExperimentConfig, metrics: &[Vec<f64>]) -> Result<(Vec<Fit>, Vec<Check>), Error> {
    let tol = &cfg.tolerances;
    let col = |k: usize| metrics.iter().map(|m| m[k]).collect::<Vec<f64>>();
    let mus: Vec<f64> = cfg.regime.members.iter().map(|p| p.mu).collect();
    let epss: Vec<f64> = cfg.regime.members.iter().map(|p| p.eps).collect();
    let fit = |name: &'static str, x: &[f64], y: &[f64], window: [f64; 2]| -> Result<Fit, Error> {
        let f = order_fit(x, y)?;
        let check = Check::within(name, f.slope, window[0], window[1]);
        Ok((name, f, check))
    };
    let mut fits = vec![];
    let mut checks = vec![];
    match cfg.study {
        StudyKind::Consistency => {
            fits.push(fit("residual order in mu", &mus, &col(0), tol.slope)?);
            let normalized = col(1);
            let max = normalized.iter().cloned().fold(0.0, f64::max);
            let min = normalized.iter().cloned().fold(f64::MAX, f64::min);
            checks.push(Check::at_most("normalized residual spread", max / min, tol.normalized_spread));
        }
        StudyKind::ModelError => {
            fits.push(fit("terminal error exponent in eps", &epss, &col(0), tol.terminal_slope)?);
            if cfg.fixed_time.is_some() {
                fits.push(fit("fixed-time error exponent in eps", &epss, &col(1), tol.slope)?);
            }
        }
        _ => {}
    }
    let mut all: Vec<Check> = fits.iter().map(|f| f.2.clone()).collect();
    all.append(&mut checks);
    Ok((fits, all))
}

fn run(m: &Member, cfg: &ExperimentConfig, dt: f64) -> Result<Trajectory64<Field64>, Error> {
    evolve(&m.model, m.initial.clone(), &EvolveOptions::new(m.horizon(cfg), dt, cfg.time.samples))
}

fn consistency_member(cfg: &ExperimentConfig, i: usize, m: Member) -> Result<MemberResult, Error> {
    let p = m.params;
    let traj = run(&m, cfg, m.dt(cfg.time.dt)?)?;
    let rs = ReconstructionSpec::new(cfg.model.reconstruction(), p.eps, p.mu);
    let pairs = pair_series(&m.grid, &traj, &m.model, &rs, &m.speed)?;
    let opts = ResidualOptions::mu_squared(p.mu);
    let rep = match m.model {
        Unidirectional::General(_) => gn_residuals(&m.grid, &pairs, p.eps, p.mu, &m.speed, &opts)?,
        Unidirectional::Kdv(_) => bouss_residuals(&m.grid, &pairs, p.eps, p.mu, &m.speed, &opts)?,
    };
    let normalized = rep.r1_sup.max(rep.r2_sup);
    let mut row = param_cells(i, &p);
    row.extend([rep.raw_r1(), rep.raw_r2(), rep.raw_sup(), rep.r1_sup, rep.r2_sup].map(Cell::from));
    let mut r = MemberResult::new(row, vec![rep.raw_sup(), normalized]);
    for ((t, a), b) in rep.times.iter().zip(&rep.r1_series).zip(&rep.r2_series) {
        r.series.push(vec![i.into(), (*t).into(), (*a).into(), (*b).into()]);
    }
    r.snapshot = cfg.snapshots.then(|| m.snapshot(&traj));
    Ok(r)
}

fn convergence_member(cfg: &ExperimentConfig, i: usize, m: Member) -> Result<MemberResult, Error> {
    let p = m.params;
    let dt = m.dt(cfg.time.dt)?;
    let finals: Vec<(Field64, f64)> = [1.0, 0.5, 0.25]
        .iter()
        .map(|s| {
            let e0 = energy_low(&m.grid, &m.initial, p.mu);
            let mut drift: f64 = 0.0;
            let opts = EvolveOptions::new(m.horizon(cfg), dt * s, cfg.time.samples);
            let traj = evolve_observed(&m.model, m.initial.clone(), &opts, |_, z| {
                drift = drift.max(((energy_low(&m.grid, z, p.mu) - e0) / e0).abs());
                ControlFlow::Continue(())
            })?;
            Ok((traj.states.last().expect("non-empty").clone(), drift))
        })
        .collect::<Result<_, Error>>()?;
    let coarse = finals[0].0.sub(&finals[1].0).sup_norm();
    let fine = finals[1].0.sub(&finals[2].0).sup_norm();
    let order = (coarse / fine).log2();
    let drift = finals[2].1;
    let mut row = param_cells(i, &p);
    row.extend([dt, coarse, fine, order, drift].map(Cell::from));
    let mut r = MemberResult::new(row, vec![order]);
    let tol = &cfg.tolerances;
    r.checks.push(Check::within(&format!("member {i} temporal order"), order, tol.time_order[0], tol.time_order[1]));
    if cfg.model.kind == ModelKind::Breaking {
        r.checks.push(Check::at_most(&format!("member {i} energy drift"), drift, tol.energy_drift));
    }
    Ok(r)
}

/// Width `1/kappa` of the KdV soliton of amplitude `a`.
pub fn soliton_width(a: f64, eps: f64, mu: f64) -> f64 {
    (4.0 * mu / (3.0 * eps * a)).sqrt()
}

fn soliton_member(cfg: &ExperimentConfig, i: usize, m: Member) -> Result<MemberResult, Error> {
    let p = m.params;
    let InitialData::Sech2 { amplitude: a, center: x0, .. } = cfg.initial else {
        return Err(Error::InvalidInput("soliton study needs sech2 data".into()));
    };
    let kappa = 1.0 / soliton_width(a, p.eps, p.mu);
    let v = 1.0 + p.eps * a / 2.0;
    let grid = m.grid.clone();
    let exact = |t: f64| Field64::from_fn(&grid, move |x: f64| a / (kappa * (x - x0 - v * t)).cosh().powi(2));
    let w0 = exact(0.0);
    let spec = KdvTopSpec { variant: KdvVariant::Velocity, eps: p.eps, mu: p.mu };
    let ansatz = rhs_kdv_top(&m.grid, &w0, &spec, &m.speed)?.add(&m.grid.derivative(&w0, 1).scale(v)).sup_norm();
    let m = Member { initial: w0, ..m };
    let traj = run(&m, cfg, m.dt(cfg.time.dt)?)?;
    let errors: Vec<f64> = traj.times.iter().zip(&traj.states).map(|(t, w)| w.sub(&exact(*t)).sup_norm()).collect();
    let shape = errors.iter().cloned().fold(0.0, f64::max);
    let mut row = param_cells(i, &p);
    row.extend([kappa, v, ansatz, shape].map(Cell::from));
    let mut r = MemberResult::new(row, vec![shape]);
    for (t, e) in traj.times.iter().zip(&errors) {
        r.series.push(vec![i.into(), (*t).into(), (*e).into()]);
    }
    r.checks.push(Check::at_most(&format!("member {i} soliton shape error"), shape, cfg.tolerances.shape_error));
    r.snapshot = cfg.snapshots.then(|| m.snapshot(&traj));
    Ok(r)
}

fn model_error_member(cfg: &ExperimentConfig, i: usize, m: Member) -> Result<MemberResult, Error> {
    let p = m.params;
    let bouss = BoussinesqModel::new(m.grid.clone(), p.eps, p.mu, m.speed.clone())?;
    let rs = ReconstructionSpec::new(cfg.model.reconstruction(), p.eps, p.mu);
    let u0 = u_from_zeta(&m.grid, &m.initial, None, &rs, &m.speed)?;
    let mut dt = m.dt(cfg.time.dt)?;
    if let DtRule::StabilityFraction(f) = cfg.time.dt {
        dt = dt.min(f * bouss.max_stable_dt().unwrap_or(f64::INFINITY));
    }
    let opts = EvolveOptions::new(m.horizon(cfg), dt, cfg.time.samples);
    let a = evolve(&m.model, m.initial.clone(), &opts)?;
    let b = evolve(&bouss, BoussinesqState { zeta: m.initial.clone(), u: u0 }, &opts)?;
    let pairs = pair_series(&m.grid, &a, &m.model, &rs, &m.speed)?;
    let err = model_error_vs_boussinesq(&m.grid, &pairs, &b)?;
    let terminal = *err.combined().last().expect("non-empty");
    let fixed = match cfg.fixed_time {
        Some(t) => {
            if !err.times.iter().any(|s| (s - t).abs() <= 1e-9 * t.max(1.0)) {
                return Err(Error::InvalidInput(format!(
                    "fixed_time {t} is not a saved time of member {i}; adjust time.samples"
                )));
            }
            err.at(t).expect("non-empty")
        }
        None => f64::NAN,
    };
    let mut row = param_cells(i, &p);
    row.extend([terminal, fixed].map(Cell::from));
    let mut r = MemberResult::new(row, vec![terminal, fixed]);
    for ((t, z), u) in err.times.iter().zip(&err.zeta_diff).zip(&err.u_diff) {
        r.series.push(vec![i.into(), (*t).into(), (*z).into(), (*u).into()]);
    }
    r.snapshot = cfg.snapshots.then(|| m.snapshot(&a));
    Ok(r)
}

/// Monitored run of the breaking model; returns the report and, when
/// requested, the saved trajectory.
fn breaking_run(
    cfg: &ExperimentConfig,
    m: &Member,
    dt_scale: f64,
) -> Result<(topowave::breaking::BreakingReport, Trajectory64<Field64>), Error> {
    let bc = cfg.breaking.as_ref().ok_or_else(|| Error::InvalidInput("missing [breaking] section".into()))?;
    let guards = BreakingGuards { slope_multiple: bc.slope_multiple, amp_guard: bc.amp_guard };
    let horizon = m.horizon(cfg);
    let mut mon = BreakingMonitor::new(&m.grid, &m.initial, m.params.mu, guards, horizon);
    let opts = EvolveOptions::new(horizon, m.dt(cfg.time.dt)? * dt_scale, cfg.time.samples);
    let traj = evolve_observed(&m.model, m.initial.clone(), &opts, |s, z| mon.observe(s.time, z))?;
    Ok((mon.report(), traj))
}

fn breaking_member(cfg: &ExperimentConfig, i: usize, m: Member) -> Result<MemberResult, Error> {
    let p = m.params;
    let bc = cfg.breaking.as_ref().ok_or_else(|| Error::InvalidInput("missing [breaking] section".into()))?;
    let th = breaking_threshold(&m.grid, &m.initial, p.eps, p.mu, &m.speed);
    let (rep, traj) = breaking_run(cfg, &m, 1.0)?;
    let t_detect = rep.t_detect();
    let mut row = param_cells(i, &p);
    row.extend([th.lhs, th.rhs, th.rhs_sum_convention].map(Cell::from));
    row.push(Cell::Int(th.satisfied as u64));
    row.extend([t_detect.unwrap_or(f64::NAN), rep.energy_drift].map(Cell::from));
    let mut r = MemberResult::new(row, vec![]);
    for ((t, s), a) in rep.times.iter().zip(&rep.sup_slope).zip(&rep.sup_amp) {
        r.series.push(vec![i.into(), (*t).into(), (*s).into(), (*a).into()]);
    }
    r.notes.push(format!(
        "member {i}: {:?}; threshold lhs/rhs {:.3e}{}",
        rep.classification,
        th.lhs / th.rhs,
        if th.satisfied { " (met)" } else { "" }
    ));
    let expected = match bc.expect {
        BreakingExpectation::Surging => t_detect.is_some(),
        BreakingExpectation::NoBreaking => {
            matches!(rep.classification, topowave::breaking::Classification::NoBreakingByHorizon)
        }
    };
    r.checks.push(Check::holds(&format!("member {i} classification is {:?}", bc.expect), expected));
    if bc.expect == BreakingExpectation::Surging && !bc.refine_n.is_empty() {
        let mut detections = vec![];
        for (k, &n) in bc.refine_n.iter().enumerate() {
            let fine = Member::build(cfg, p, n)?;
            detections.push(breaking_run(cfg, &fine, 1.0)?.0.t_detect());
            if k + 1 == bc.refine_n.len() {
                detections.push(breaking_run(cfg, &fine, 0.5)?.0.t_detect());
            }
        }
        let gate = refinement_gate(&detections, cfg.tolerances.refinement);
        r.checks.push(Check::at_most(
            &format!("member {i} detection time change under refinement"),
            gate.max_rel_change,
            cfg.tolerances.refinement,
        ));
    }
    r.snapshot = cfg.snapshots.then(|| m.snapshot(&traj));
    Ok(r)
}
