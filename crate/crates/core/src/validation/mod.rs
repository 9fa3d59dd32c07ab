//! Validation suites: discrete identities the scheme satisfies exactly or up
//! to solver tolerances, and reference computations for the estimators.

pub mod oracles;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Scheme};
use crate::driver::{
    check_transformation, energy_study, epsilon_gap_study, isometry_study, run_path, time_averaged, PathLog,
};
use crate::error::Result;
use crate::exec::Execution;
use crate::mesh::Mesh;

/// Outcome of one check: `value` compared against `limit`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
            note: String::new(),
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check {
            passed: value >= limit,
            ..Check::at_most(name, value, limit)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = note.into();
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {:.6e} (limit {:.6e})", self.name, self.value, self.limit)?;
        if !self.note.is_empty() {
            write!(f, " [{}]", self.note)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Transformation,
    Energy,
    Epsilon,
    Isometry,
    Oracles,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Transformation,
        Suite::Energy,
        Suite::Epsilon,
        Suite::Isometry,
        Suite::Oracles,
    ];
}

/// Reference run, one path, adaptivity on.
pub fn transformation_config(base: &RunConfig) -> RunConfig {
    RunConfig {
        paths: 1,
        adapt_mesh: true,
        adapt_time: true,
        ..base.clone()
    }
}

/// Noise-free, `FIX(1e-10)`, uniform `n = 16`, 200 steps of `1e-4`.
pub fn energy_config(base: &RunConfig) -> RunConfig {
    RunConfig {
        sigma: 0.0,
        scheme: Scheme::Fix,
        fp_tol: 1e-10,
        macro_n: 16,
        tau0: 1e-4,
        final_time: 200.0 * 1e-4,
        adapt_mesh: false,
        adapt_time: false,
        paths: 1,
        ..base.clone()
    }
}

/// Noise-free, uniform `n = 32`.
pub fn epsilon_config(base: &RunConfig) -> RunConfig {
    RunConfig {
        sigma: 0.0,
        macro_n: 32,
        adapt_mesh: false,
        paths: 1,
        ..base.clone()
    }
}

/// 1000 paths, 50 constant steps of `1e-3`.
pub fn isometry_config(base: &RunConfig) -> RunConfig {
    RunConfig {
        paths: 1000,
        tau0: 1e-3,
        final_time: 50.0 * 1e-3,
        adapt_mesh: false,
        adapt_time: false,
        ..base.clone()
    }
}

pub const EPSILON_PAIR: (f64, f64) = (1.0 / 32.0, 1.0 / 128.0);

pub fn transformation_checks(base: &RunConfig) -> Result<Vec<Check>> {
    let rep = check_transformation(&transformation_config(base), 0)?;
    Ok(vec![Check::at_most(
        "transformation defect",
        rep.max_defect,
        rep.steps as f64 * 1e-8,
    )
    .with_note(format!("{} steps", rep.steps))])
}

pub fn energy_checks(base: &RunConfig) -> Result<Vec<Check>> {
    let rep = energy_study(&energy_config(base))?;
    Ok(vec![Check::at_most("energy increase per step", rep.max_excess, 1e-8).with_note(format!(
        "{} steps ({} capped), energy {:.6e} -> {:.6e}",
        rep.steps, rep.capped_steps, rep.initial_energy, rep.final_energy
    ))])
}

pub fn epsilon_checks(base: &RunConfig) -> Result<Vec<Check>> {
    let (e1, e2) = EPSILON_PAIR;
    let rep = epsilon_gap_study(&epsilon_config(base), e1, e2)?;
    Ok(vec![Check::at_most("epsilon gap", rep.sup_gap_sq, 2.0 * rep.bound)
        .with_note(format!("analytic bound {:.6e}, {} steps", rep.bound, rep.steps))])
}

pub fn isometry_checks(base: &RunConfig, exec: Execution) -> Result<Vec<Check>> {
    let rep = isometry_study(&isometry_config(base), exec)?;
    Ok(vec![Check::at_most(
        "isometry gap / standard error",
        (rep.mean - rep.expected).abs() / rep.standard_error,
        3.0,
    )
    .with_note(format!(
        "mean {:.6e}, expected {:.6e}, {} paths",
        rep.mean, rep.expected, rep.paths
    ))])
}

pub fn oracle_checks() -> Result<Vec<Check>> {
    let mut checks = oracles::estimator_checks("2 triangles", &oracles::two_triangle_mesh(), 1, 1e-12)?;
    checks.extend(oracles::estimator_checks("8 triangles", &oracles::eight_triangle_mesh(), 2, 1e-12)?);
    checks.push(Check::at_most(
        "energy gradient vs finite differences",
        oracles::energy_gradient_gap(&Mesh::macro_mesh(4)?, 7, 1e-6)?,
        1e-6,
    ));
    checks.push(Check::at_most("fixed point vs Newton", oracles::newton_gap(9)?, 1e-8));
    Ok(checks)
}

pub fn run_suite(suite: Suite, base: &RunConfig, exec: Execution) -> Result<Vec<Check>> {
    match suite {
        Suite::Transformation => transformation_checks(base),
        Suite::Energy => energy_checks(base),
        Suite::Epsilon => epsilon_checks(base),
        Suite::Isometry => isometry_checks(base, exec),
        Suite::Oracles => oracle_checks(),
    }
}

/// Half width of the annulus around the circle edge.
pub const ANNULUS_HALF_WIDTH: f64 = 0.05;

/// Share of the deepest leaves whose barycentre lies within
/// [`ANNULUS_HALF_WIDTH`] of the circle edge.
pub fn edge_localization(mesh: &Mesh) -> f64 {
    use crate::config::{CIRCLE_CENTER, CIRCLE_RADIUS};
    let depth = mesh.max_depth();
    let deepest: Vec<usize> = (0..mesh.num_triangles()).filter(|&t| mesh.depth(t) == depth).collect();
    let near = deepest
        .iter()
        .filter(|&&t| {
            let b = mesh.barycenter(t);
            let r = (b[0] - CIRCLE_CENTER[0]).hypot(b[1] - CIRCLE_CENTER[1]);
            (r - CIRCLE_RADIUS).abs() <= ANNULUS_HALF_WIDTH
        })
        .count();
    near as f64 / deepest.len() as f64
}

/// Localization and tolerance checks on a completed adaptive path.
pub fn adaptive_checks(config: &RunConfig, log: &PathLog) -> (Check, Vec<Check>) {
    let loc = Check::at_least("deepest leaves near the edge", edge_localization(&log.final_mesh), 0.8)
        .with_note(format!(
            "depth {}, {} nodes",
            log.final_mesh.max_depth(),
            log.final_mesh.num_vertices()
        ));
    let avg = time_averaged(&log.records);
    let tol = config.tolerances();
    let compliance = vec![
        Check::at_most("time-averaged eta_time2", avg.eta_time2, tol.time),
        Check::at_most("time-averaged sum of eta_T", avg.eta_h, tol.space),
    ];
    (loc, compliance)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeComparison {
    pub si: f64,
    pub fix3: f64,
    pub fix: f64,
    /// Time-averaged `η_time,2` of the `FIX` run.
    pub fix_eta_time2: f64,
}

/// Runs path 0 with every scheme and returns the time-averaged `η_lin`.
pub fn compare_schemes(base: &RunConfig) -> Result<SchemeComparison> {
    let run = |scheme| -> Result<_> {
        let cfg = RunConfig {
            scheme,
            paths: 1,
            ..base.clone()
        };
        Ok(time_averaged(&run_path(&cfg, 0)?.records))
    };
    let si = run(Scheme::Si)?;
    let fix3 = run(Scheme::Fix3)?;
    let fix = run(Scheme::Fix)?;
    Ok(SchemeComparison {
        si: si.eta_lin,
        fix3: fix3.eta_lin,
        fix: fix.eta_lin,
        fix_eta_time2: fix.eta_time2,
    })
}
