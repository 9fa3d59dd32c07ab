//! Pathwise adaptive simulation and Monte Carlo ensembles.
//!
//! Each path is strictly sequential. Per step: mark with the previous step's
//! element indicators and adapt the mesh, carry the state over, draw the
//! Wiener increments and solve, evaluate every indicator, pick the next step
//! size. Paths run in parallel; results are gathered in path order.

use serde::{Deserialize, Serialize};

use crate::adapt::{adjust_timestep, mark, StepBounds};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimators::{
    eta_lin, eta_space, eta_time, interior_residual, jump_residual, IndicatorRecord, NoiseEstimator,
};
use crate::exec::{map_range, Execution};
use crate::fem::{
    assemble_mass, assemble_tv_stiffness, energy, l2_norm, l2_norm_squared, transfer, FeFunction, SparseOperator,
};
use crate::mesh::Mesh;
use crate::noise::{g_perturbation, noise_term, sigma_h, wiener_increments, NoiseModel, PathRng};
use crate::solver::{cg_solve_masked, step_with_mass, StepParams};

/// Everything known about one completed step, handed to observers.
pub struct StepContext<'a> {
    pub step: usize,
    /// `t_n`.
    pub time: f64,
    pub tau: f64,
    pub mesh: &'a Mesh,
    pub mass: &'a SparseOperator,
    /// `X^{n-1}` carried over to this step's mesh.
    pub x_prev: &'a FeFunction,
    pub x: &'a FeFunction,
    /// Frozen-coefficient function of the last linear solve.
    pub frozen: &'a FeFunction,
    pub g_h: &'a FeFunction,
    /// `σ_h ΔW` of this step (amplitude included).
    pub noise: &'a FeFunction,
    /// `Σ_h^n`, including this step.
    pub sigma_acc: &'a FeFunction,
    pub record: &'a IndicatorRecord,
    pub params: &'a StepParams,
}

/// Hook called after every accepted step.
pub trait StepObserver {
    fn observe(&mut self, ctx: &StepContext<'_>) -> Result<()>;
}

impl StepObserver for () {
    fn observe(&mut self, _ctx: &StepContext<'_>) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub requested_time: f64,
    pub time: f64,
    pub mesh: Mesh,
    pub solution: FeFunction,
    pub element_indicators: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PathLog {
    pub path: usize,
    pub seed: u64,
    pub records: Vec<IndicatorRecord>,
    pub snapshots: Vec<Snapshot>,
    pub final_mesh: Mesh,
    pub final_solution: FeFunction,
    pub final_sigma: FeFunction,
    /// Steps whose fixed-point iteration hit the cap.
    pub capped_steps: usize,
    /// Steps repeated with a halved step after a linear-solver failure.
    pub retried_steps: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PathOptions {
    /// Prescribed step sizes, used instead of the controller.
    pub tau_schedule: Option<Vec<f64>>,
    /// Keep `η_T` maps on every record, not only the last one.
    pub keep_element_maps: bool,
}

/// Runs path `path` of `config`.
pub fn run_path(config: &RunConfig, path: usize) -> Result<PathLog> {
    run_path_with(config, path, &PathOptions::default(), &mut ())
}

pub fn run_path_with(
    config: &RunConfig,
    path: usize,
    options: &PathOptions,
    observer: &mut dyn StepObserver,
) -> Result<PathLog> {
    config.validate()?;
    let fail = |time: f64, reason: String| Error::PathFailed {
        path,
        seed: config.seed,
        time,
        reason,
    };

    let params = config.step_params();
    let macro_mesh = Mesh::macro_mesh(config.macro_n)?;
    let model = NoiseModel::preset(config.noise, config.sigma);
    let mut increments_rng = PathRng::increments(config.seed, path);
    let mut perturbation_rng = PathRng::perturbation(config.seed, path);
    let xi = g_perturbation(&mut perturbation_rng, &macro_mesh, config.perturbation);
    let mut noise_est = NoiseEstimator::new(&model, &macro_mesh);
    let tolerances = config.tolerances();
    let bounds = StepBounds {
        min: config.tau_min,
        max: config.tau_max(),
    };
    let final_time = config.final_time;
    let time_eps = 1e-12 * final_time;

    let mut mesh = macro_mesh.clone();
    let mut x = FeFunction::zeros(&mesh);
    let mut sigma_acc = FeFunction::zeros(&mesh);
    let mut tau = config.tau0;
    let mut t = 0.0;
    let mut n = 0;
    let mut records: Vec<IndicatorRecord> = Vec::new();
    let mut snapshots = Vec::new();
    let mut pending_snapshots: Vec<f64> = config.snapshot_times.clone();
    pending_snapshots.sort_by(f64::total_cmp);
    pending_snapshots.retain(|&s| {
        if s <= 0.0 {
            snapshots.push(Snapshot {
                requested_time: s,
                time: 0.0,
                mesh: mesh.clone(),
                solution: x.clone(),
                element_indicators: vec![0.0; mesh.num_triangles()],
            });
            false
        } else {
            true
        }
    });
    let mut prev_element_indicators: Option<Vec<f64>> = None;
    let mut capped_steps = 0;
    let mut retried_steps = 0;

    while final_time - t > time_eps {
        n += 1;
        if config.adapt_mesh {
            if let Some(eta) = prev_element_indicators.take() {
                let marks = mark(&eta, tolerances.space, mesh.num_vertices());
                if !marks.refine.is_empty() || !marks.coarsen.is_empty() {
                    let next = mesh.adapt(&marks.refine, &marks.coarsen);
                    x = transfer(&x, &mesh, &next)?;
                    sigma_acc = transfer(&sigma_acc, &mesh, &next)?;
                    mesh = next;
                }
            }
        }

        let mut g_h = FeFunction::interpolate(&mesh, |px, py| config.data.eval(px, py))
            .axpy(1.0, &transfer(&xi, &macro_mesh, &mesh)?)?;
        g_h.zero_boundary(&mesh);
        let modes = sigma_h(&model, &macro_mesh, &mesh, t)?;
        let mass = assemble_mass(&mesh);

        let mut tau_n = match &options.tau_schedule {
            Some(s) => *s
                .get(n - 1)
                .ok_or_else(|| fail(t, format!("time-step schedule exhausted at step {n}")))?,
            None => tau,
        };
        let mut last = false;
        if t + tau_n >= final_time - time_eps {
            tau_n = final_time - t;
            last = true;
        }

        let (result, noise) = loop {
            let dw = wiener_increments(&mut increments_rng, tau_n, model.num_drivers())?;
            let noise = noise_term(&mesh, model.amplitude, &modes, &dw)?;
            match step_with_mass(&mesh, &mass, &x, &g_h, &noise, tau_n, &params) {
                Ok(r) => break (r, noise),
                Err(Error::CgNotConverged { iterations, residual }) => {
                    if options.tau_schedule.is_some() || 0.5 * tau_n < config.tau_min {
                        return Err(fail(
                            t,
                            format!("linear solver failed ({iterations} iterations, residual {residual:.3e}) at τ = {tau_n:.3e}"),
                        ));
                    }
                    log::warn!("path {path}: CG failure at t = {t:.6e}, halving τ = {tau_n:.3e}");
                    tau_n *= 0.5;
                    last = false;
                    retried_steps += 1;
                }
                Err(e) => return Err(e),
            }
        };
        if result.capped {
            capped_steps += 1;
        }
        let t_new = if last { final_time } else { t + tau_n };

        let x_new = &result.solution;
        let residual = interior_residual(&mesh, x_new, &x, &g_h, &noise, tau_n, config.lambda)?;
        let jumps = jump_residual(&mesh, x_new, config.epsilon)?;
        let space = eta_space(&mesh, &residual, &jumps);
        let (eta_time1, eta_time2) = eta_time(&mesh, x_new, &x)?;
        let noise_ind = noise_est.step(t, tau_n);
        let lin = eta_lin(&mesh, x_new, &result.frozen, config.epsilon)?;
        let record = IndicatorRecord {
            step: n,
            time: t_new,
            tau: tau_n,
            ndof: mesh.num_vertices(),
            eta_time1,
            eta_time2,
            eta_space1: space.space1,
            eta_space2: space.space2,
            eta_noise1: noise_ind.noise1,
            eta_noise2: noise_ind.noise2,
            eta_noise3: noise_ind.noise3,
            eta_lin: lin,
            fp_iters: result.fp_iterations,
            element_indicators: space.per_element.clone(),
        };
        let sigma_new = sigma_acc.axpy(1.0, &noise)?;

        observer.observe(&StepContext {
            step: n,
            time: t_new,
            tau: tau_n,
            mesh: &mesh,
            mass: &mass,
            x_prev: &x,
            x: x_new,
            frozen: &result.frozen,
            g_h: &g_h,
            noise: &noise,
            sigma_acc: &sigma_new,
            record: &record,
            params: &params,
        })?;

        if config.adapt_time && options.tau_schedule.is_none() {
            let iters = if result.capped { usize::MAX } else { result.fp_iterations };
            tau = adjust_timestep(eta_time2, iters, tolerances.time, tau_n, bounds).tau;
        } else if options.tau_schedule.is_none() {
            tau = config.tau0;
        }

        x = result.solution;
        sigma_acc = sigma_new;
        t = t_new;
        while pending_snapshots.first().is_some_and(|&s| t >= s - time_eps) {
            snapshots.push(Snapshot {
                requested_time: pending_snapshots.remove(0),
                time: t,
                mesh: mesh.clone(),
                solution: x.clone(),
                element_indicators: space.per_element.clone(),
            });
        }
        if !options.keep_element_maps {
            if let Some(prev) = records.last_mut() {
                prev.element_indicators = Vec::new();
            }
        }
        prev_element_indicators = Some(space.per_element);
        records.push(record);
    }

    Ok(PathLog {
        path,
        seed: config.seed,
        records,
        snapshots,
        final_mesh: mesh,
        final_solution: x,
        final_sigma: sigma_acc,
        capped_steps,
        retried_steps,
    })
}

/// Time averages `t_n^{-1} Σ_{i≤n} τ_i η^i` of every indicator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeAveraged {
    pub time: f64,
    pub eta_time1: f64,
    pub eta_time2: f64,
    pub eta_space1: f64,
    pub eta_space2: f64,
    /// `η_h = Σ_T η_T`.
    pub eta_h: f64,
    pub eta_noise1: f64,
    pub eta_noise2: f64,
    pub eta_noise3: f64,
    pub eta_lin: f64,
}

impl TimeAveraged {
    fn fields(&self) -> [f64; 10] {
        [
            self.time,
            self.eta_time1,
            self.eta_time2,
            self.eta_space1,
            self.eta_space2,
            self.eta_h,
            self.eta_noise1,
            self.eta_noise2,
            self.eta_noise3,
            self.eta_lin,
        ]
    }

    fn from_fields(f: [f64; 10]) -> TimeAveraged {
        TimeAveraged {
            time: f[0],
            eta_time1: f[1],
            eta_time2: f[2],
            eta_space1: f[3],
            eta_space2: f[4],
            eta_h: f[5],
            eta_noise1: f[6],
            eta_noise2: f[7],
            eta_noise3: f[8],
            eta_lin: f[9],
        }
    }
}

/// The running time-averaged series of one path, one entry per step.
pub fn time_averaged_series(records: &[IndicatorRecord]) -> Vec<TimeAveraged> {
    let mut acc = [0.0; 9];
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let v = [
            r.eta_time1,
            r.eta_time2,
            r.eta_space1,
            r.eta_space2,
            r.eta_h(),
            r.eta_noise1,
            r.eta_noise2,
            r.eta_noise3,
            r.eta_lin,
        ];
        for (a, x) in acc.iter_mut().zip(v) {
            *a += r.tau * x;
        }
        let mut f = [0.0; 10];
        f[0] = r.time;
        for k in 0..9 {
            f[k + 1] = acc[k] / r.time;
        }
        out.push(TimeAveraged::from_fields(f));
    }
    out
}

/// Final time averages of one path.
pub fn time_averaged(records: &[IndicatorRecord]) -> TimeAveraged {
    time_averaged_series(records).last().copied().unwrap_or_default()
}

/// Sum of sorted values: bitwise independent of input order.
fn order_free_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathSummary {
    pub path: usize,
    pub steps: usize,
    pub final_ndof: usize,
    pub final_triangles: usize,
    pub max_depth: usize,
    pub capped_steps: usize,
    pub retried_steps: usize,
    pub min_tau: f64,
    pub max_tau: f64,
    pub time_averaged: TimeAveraged,
}

impl PathSummary {
    pub fn new(log: &PathLog) -> PathSummary {
        let taus = log.records.iter().map(|r| r.tau);
        PathSummary {
            path: log.path,
            steps: log.records.len(),
            final_ndof: log.final_mesh.num_vertices(),
            final_triangles: log.final_mesh.num_triangles(),
            max_depth: log.final_mesh.max_depth(),
            capped_steps: log.capped_steps,
            retried_steps: log.retried_steps,
            min_tau: taus.clone().fold(f64::INFINITY, f64::min),
            max_tau: taus.fold(0.0, f64::max),
            time_averaged: time_averaged(&log.records),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathFailure {
    pub path: usize,
    pub seed: u64,
    pub message: String,
}

/// Ensemble aggregates over the successful paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub paths: usize,
    pub failures: Vec<PathFailure>,
    /// Means of the final time-averaged indicators.
    pub mean_time_averaged: TimeAveraged,
    /// Means of the raw indicators of each path's last step.
    pub mean_final: TimeAveraged,
    pub mean_final_ndof: f64,
    pub mean_steps: f64,
    pub per_path: Vec<PathSummary>,
}

pub struct Ensemble {
    pub logs: Vec<PathLog>,
    pub summary: EnsembleSummary,
}

/// Runs `config.paths` paths and aggregates them.
pub fn run_mc(config: &RunConfig, exec: Execution) -> Result<Ensemble> {
    config.validate()?;
    let results = map_range(exec, config.paths, |p| run_path(config, p));
    let mut logs = Vec::new();
    let mut failures = Vec::new();
    for (p, r) in results.into_iter().enumerate() {
        match r {
            Ok(log) => logs.push(log),
            Err(e) => failures.push(PathFailure {
                path: p,
                seed: config.seed,
                message: e.to_string(),
            }),
        }
    }
    let summary = summarize(&logs, failures);
    Ok(Ensemble { logs, summary })
}

/// Aggregates completed paths; the result does not depend on their order.
pub fn summarize(logs: &[PathLog], failures: Vec<PathFailure>) -> EnsembleSummary {
    let per_path: Vec<PathSummary> = logs.iter().map(PathSummary::new).collect();
    let finals: Vec<TimeAveraged> = logs
        .iter()
        .map(|l| {
            let r = l.records.last().cloned().unwrap_or_default();
            TimeAveraged {
                time: r.time,
                eta_time1: r.eta_time1,
                eta_time2: r.eta_time2,
                eta_space1: r.eta_space1,
                eta_space2: r.eta_space2,
                eta_h: r.eta_h(),
                eta_noise1: r.eta_noise1,
                eta_noise2: r.eta_noise2,
                eta_noise3: r.eta_noise3,
                eta_lin: r.eta_lin,
            }
        })
        .collect();
    let mean_of = |items: &[TimeAveraged]| {
        if items.is_empty() {
            return TimeAveraged::default();
        }
        let mut f = [0.0; 10];
        for (k, slot) in f.iter_mut().enumerate() {
            let mut v: Vec<f64> = items.iter().map(|a| a.fields()[k]).collect();
            *slot = order_free_mean(&mut v);
        }
        TimeAveraged::from_fields(f)
    };
    let averaged: Vec<TimeAveraged> = per_path.iter().map(|s| s.time_averaged).collect();
    let mean_scalar = |mut v: Vec<f64>| if v.is_empty() { 0.0 } else { order_free_mean(&mut v) };
    EnsembleSummary {
        paths: logs.len(),
        failures,
        mean_time_averaged: mean_of(&averaged),
        mean_final: mean_of(&finals),
        mean_final_ndof: mean_scalar(per_path.iter().map(|s| s.final_ndof as f64).collect()),
        mean_steps: mean_scalar(per_path.iter().map(|s| s.steps as f64).collect()),
        per_path,
    }
}

/// Recomputes the transformed variable `Y^n` from its own recurrence,
/// `M(Y^n − Y^{n−1}) = −τ A(X*) X^n − τλ M (X^n − g_h)`, and records the
/// largest `‖Y^n − (X^n − Σ_h^n)‖`.
#[derive(Debug, Default)]
pub struct TransformationObserver {
    y: Option<(Mesh, FeFunction)>,
    pub max_defect: f64,
    pub steps: usize,
}

/// Relative CG tolerance of the mass solves in the recurrence.
const MASS_SOLVE_TOL: f64 = 1e-13;

impl StepObserver for TransformationObserver {
    fn observe(&mut self, ctx: &StepContext<'_>) -> Result<()> {
        let mesh = ctx.mesh;
        // Y^0 = X^0
        let y_prev = match self.y.take() {
            Some((m, y)) => transfer(&y, &m, mesh)?,
            None => ctx.x_prev.clone(),
        };
        let a = assemble_tv_stiffness(mesh, ctx.frozen, ctx.params.eps)?;
        let my = ctx.mass.matvec(y_prev.values());
        let ax = a.matvec(ctx.x.values());
        let diff = ctx.x.axpy(-1.0, ctx.g_h)?;
        let md = ctx.mass.matvec(diff.values());
        let rhs: Vec<f64> = (0..mesh.num_vertices())
            .map(|i| my[i] - ctx.tau * ax[i] - ctx.tau * ctx.params.lambda * md[i])
            .collect();
        let free: Vec<bool> = mesh.boundary_flags().iter().map(|b| !b).collect();
        let sol = cg_solve_masked(ctx.mass, &rhs, Some(y_prev.values()), Some(&free), MASS_SOLVE_TOL)?;
        let y = FeFunction::from_values(mesh, sol.x)?;
        let expected = ctx.x.axpy(-1.0, ctx.sigma_acc)?;
        let defect = l2_norm(mesh, &y.axpy(-1.0, &expected)?)?;
        self.max_defect = self.max_defect.max(defect);
        self.steps += 1;
        self.y = Some((mesh.clone(), y));
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransformationReport {
    pub max_defect: f64,
    pub steps: usize,
}

/// Runs `path` and checks the discrete transformation identity along it.
pub fn check_transformation(config: &RunConfig, path: usize) -> Result<TransformationReport> {
    let mut obs = TransformationObserver::default();
    run_path_with(config, path, &PathOptions::default(), &mut obs)?;
    Ok(TransformationReport {
        max_defect: obs.max_defect,
        steps: obs.steps,
    })
}

/// Tracks `E(X^n) + ‖X^n − X^{n−1}‖²/(2τ) − E(X^{n−1})`, which must stay
/// non-positive for the deterministic implicit scheme.
#[derive(Debug, Default)]
pub struct EnergyObserver {
    pub max_excess: f64,
    pub energies: Vec<f64>,
}

impl StepObserver for EnergyObserver {
    fn observe(&mut self, ctx: &StepContext<'_>) -> Result<()> {
        let p = ctx.params;
        let before = energy(ctx.mesh, ctx.x_prev, ctx.g_h, p.eps, p.lambda)?;
        let after = energy(ctx.mesh, ctx.x, ctx.g_h, p.eps, p.lambda)?;
        let d = ctx.x.axpy(-1.0, ctx.x_prev)?;
        let dissipation = l2_norm_squared(ctx.mesh, &d)? / (2.0 * ctx.tau);
        let excess = after + dissipation - before;
        if self.energies.is_empty() {
            self.energies.push(before);
            self.max_excess = f64::NEG_INFINITY;
        }
        self.energies.push(after);
        self.max_excess = self.max_excess.max(excess);
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    pub max_excess: f64,
    pub steps: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Steps whose fixed-point iteration stopped at the cap.
    pub capped_steps: usize,
}

/// Deterministic energy decay along path 0 of `config` (noise switched off).
pub fn energy_study(config: &RunConfig) -> Result<EnergyReport> {
    let mut cfg = config.clone();
    cfg.sigma = 0.0;
    let mut obs = EnergyObserver::default();
    let log = run_path_with(&cfg, 0, &PathOptions::default(), &mut obs)?;
    Ok(EnergyReport {
        max_excess: obs.max_excess,
        steps: log.records.len(),
        initial_energy: obs.energies.first().copied().unwrap_or(0.0),
        final_energy: obs.energies.last().copied().unwrap_or(0.0),
        capped_steps: log.capped_steps,
    })
}

#[derive(Default)]
struct SolutionRecorder {
    solutions: Vec<FeFunction>,
}

impl StepObserver for SolutionRecorder {
    fn observe(&mut self, ctx: &StepContext<'_>) -> Result<()> {
        self.solutions.push(ctx.x.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonGapReport {
    pub eps1: f64,
    pub eps2: f64,
    /// `sup_n ‖X^{ε1,n} − X^{ε2,n}‖²`.
    pub sup_gap_sq: f64,
    /// `2 T |O| (ε1 + ε2)`.
    pub bound: f64,
    pub steps: usize,
}

/// Runs the deterministic flow for two regularization parameters on the
/// fixed macro mesh with one shared step sequence (that of the `eps1` run).
pub fn epsilon_gap_study(config: &RunConfig, eps1: f64, eps2: f64) -> Result<EpsilonGapReport> {
    let mut cfg = config.clone();
    cfg.sigma = 0.0;
    cfg.adapt_mesh = false;
    cfg.epsilon = eps1;
    let mut first = SolutionRecorder::default();
    let log1 = run_path_with(&cfg, 0, &PathOptions::default(), &mut first)?;
    let schedule: Vec<f64> = log1.records.iter().map(|r| r.tau).collect();
    cfg.epsilon = eps2;
    let mut second = SolutionRecorder::default();
    let options = PathOptions {
        tau_schedule: Some(schedule),
        ..PathOptions::default()
    };
    let log2 = run_path_with(&cfg, 0, &options, &mut second)?;
    if log1.records.len() != log2.records.len() {
        return Err(Error::Internal("ε runs produced different step counts".into()));
    }
    let mesh = &log1.final_mesh;
    let mut sup: f64 = 0.0;
    for (a, b) in first.solutions.iter().zip(&second.solutions) {
        let d = FeFunction::from_values(mesh, a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect())?;
        sup = sup.max(l2_norm_squared(mesh, &d)?);
    }
    Ok(EpsilonGapReport {
        eps1,
        eps2,
        sup_gap_sq: sup,
        bound: 2.0 * config.final_time * 1.0 * (eps1 + eps2),
        steps: log1.records.len(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsometryReport {
    pub paths: usize,
    pub steps: usize,
    /// Sample mean of `‖Σ_h^N‖²`.
    pub mean: f64,
    /// `Σ_i τ_i Σ_k ‖σ̃ σ_h,k(t_{i−1})‖²`.
    pub expected: f64,
    pub standard_error: f64,
}

/// Monte Carlo check of the discrete Itô isometry for the noise of `config`
/// on its macro mesh with the constant step `tau0`. Uses the same per-path
/// streams as [`run_path`].
pub fn isometry_study(config: &RunConfig, exec: Execution) -> Result<IsometryReport> {
    config.validate()?;
    let mesh = Mesh::macro_mesh(config.macro_n)?;
    let model = NoiseModel::preset(config.noise, config.sigma);
    let steps = (config.final_time / config.tau0).round().max(1.0) as usize;
    let tau = config.final_time / steps as f64;
    let mut expected = 0.0;
    for i in 0..steps {
        let modes = sigma_h(&model, &mesh, &mesh, i as f64 * tau)?;
        for m in &modes {
            expected += tau * model.amplitude * model.amplitude * l2_norm_squared(&mesh, m)?;
        }
    }
    let samples: Vec<Result<f64>> = map_range(exec, config.paths, |p| {
        let mut rng = PathRng::increments(config.seed, p);
        let mut acc = FeFunction::zeros(&mesh);
        for i in 0..steps {
            let modes = sigma_h(&model, &mesh, &mesh, i as f64 * tau)?;
            let dw = wiener_increments(&mut rng, tau, model.num_drivers())?;
            acc = acc.axpy(1.0, &noise_term(&mesh, model.amplitude, &modes, &dw)?)?;
        }
        l2_norm_squared(&mesh, &acc)
    });
    let mut values = samples.into_iter().collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = order_free_mean(&mut values);
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(IsometryReport {
        paths: values.len(),
        steps,
        mean,
        expected,
        standard_error: (var / n).sqrt(),
    })
}
