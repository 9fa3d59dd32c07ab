//! Path-level behaviour of the adaptive loop on reduced configurations.

use stvf::driver::{run_path, run_path_with, PathOptions, StepContext, StepObserver};
use stvf::{Mesh, RunConfig};

fn refining() -> RunConfig {
    RunConfig {
        final_time: 3e-3,
        tol_space: Some(0.02),
        paths: 1,
        ..RunConfig::default()
    }
}

struct MeshWatcher {
    max_nodes: usize,
    invariant_errors: usize,
}

impl StepObserver for MeshWatcher {
    fn observe(&mut self, ctx: &StepContext<'_>) -> stvf::Result<()> {
        self.max_nodes = self.max_nodes.max(ctx.mesh.num_vertices());
        if ctx.mesh.check_invariants().is_err() {
            self.invariant_errors += 1;
        }
        Ok(())
    }
}

#[test]
fn refined_meshes_stay_valid_and_concentrate_on_the_edge() {
    let cfg = refining();
    let mut w = MeshWatcher {
        max_nodes: 0,
        invariant_errors: 0,
    };
    let log = run_path_with(&cfg, 0, &PathOptions::default(), &mut w).unwrap();
    assert_eq!(w.invariant_errors, 0);
    assert!(w.max_nodes > Mesh::macro_mesh(cfg.macro_n).unwrap().num_vertices());
    assert!(log.final_mesh.max_depth() >= 1);
    assert!(stvf::validation::edge_localization(&log.final_mesh) >= 0.8);
    assert_eq!(log.records.last().unwrap().time, cfg.final_time);
}

#[test]
fn no_adapt_keeps_macro_mesh_and_constant_step() {
    let cfg = RunConfig {
        adapt_mesh: false,
        adapt_time: false,
        final_time: 1e-4,
        ..refining()
    };
    let log = run_path(&cfg, 0).unwrap();
    assert_eq!(log.records.len(), 10);
    assert!(log.records.iter().all(|r| (r.tau - 1e-5).abs() < 1e-18 && r.ndof == 2113));
}

#[test]
fn step_sizes_respect_bounds() {
    let cfg = RunConfig {
        final_time: 5e-3,
        tau_max: Some(2e-4),
        ..refining()
    };
    let log = run_path(&cfg, 1).unwrap();
    let n = log.records.len();
    for r in &log.records[..n - 1] {
        assert!(r.tau >= cfg.tau_min && r.tau <= 2e-4 * (1.0 + 1e-12));
    }
}
