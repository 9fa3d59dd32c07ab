//! Pathwise space-time adaptivity: element marking by error
//! equidistribution and the time-step controller.

use serde::{Deserialize, Serialize};

/// Refinement threshold factor relative to `TOL_h / sqrt(#nodes)`.
pub const REFINE_FACTOR: f64 = 0.9;
/// Coarsening threshold factor relative to `TOL_h / sqrt(#nodes)`.
pub const COARSEN_FACTOR: f64 = 0.1;
/// Fixed-point iteration count above which the step is halved.
pub const HALVE_ITERATIONS: usize = 30;
/// Fixed-point iteration count below which the step may grow.
pub const GROW_ITERATIONS: usize = 15;

/// Space and time tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub space: f64,
    pub time: f64,
}

impl Tolerances {
    /// `TOL_k = 2^{-k} (2, 0.25)`.
    pub fn level(k: u32) -> Tolerances {
        let s = 0.5f64.powi(k as i32);
        Tolerances {
            space: 2.0 * s,
            time: 0.25 * s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Marks {
    pub refine: Vec<usize>,
    pub coarsen: Vec<usize>,
}

/// Marks `T` for refinement when `η_T > 0.9 TOL_h/√N` and for coarsening when
/// `η_T < 0.1 TOL_h/√N`, with `N` the node count of the mesh.
pub fn mark(element_indicators: &[f64], tol_space: f64, nodes: usize) -> Marks {
    let scale = tol_space / (nodes.max(1) as f64).sqrt();
    let hi = REFINE_FACTOR * scale;
    let lo = COARSEN_FACTOR * scale;
    let mut marks = Marks::default();
    for (t, &eta) in element_indicators.iter().enumerate() {
        if eta > hi {
            marks.refine.push(t);
        } else if eta < lo {
            marks.coarsen.push(t);
        }
    }
    marks
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepDecision {
    pub tau: f64,
    pub halved: bool,
    pub grew: bool,
}

/// Bounds applied after the halve/grow rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBounds {
    pub min: f64,
    pub max: f64,
}

/// Next time step from the time indicator and the fixed-point effort.
/// `fp_iters` above [`HALVE_ITERATIONS`] (or a capped iteration, reported by
/// the caller as `usize::MAX`) halves the step.
pub fn adjust_timestep(eta_time2: f64, fp_iters: usize, tol_time: f64, tau: f64, bounds: StepBounds) -> TimeStepDecision {
    let (raw, halved, grew) = if eta_time2 > tol_time || fp_iters > HALVE_ITERATIONS {
        (0.5 * tau, true, false)
    } else if eta_time2 < 0.3 * tol_time && fp_iters < GROW_ITERATIONS {
        (1.5 * tau, false, true)
    } else {
        (tau, false, false)
    };
    TimeStepDecision {
        tau: raw.clamp(bounds.min, bounds.max),
        halved,
        grew,
    }
}
