//! One implicit time step of the regularized flow.
//!
//! The nonlinear system is linearized by freezing the coefficient
//! `1/|∇X*|_ε`; each linear system
//! `((1 + τλ) M + τ A(X*)) X = M (X_prev + τλ g + σΔW)` is solved by
//! Jacobi-preconditioned conjugate gradients with homogeneous Dirichlet
//! nodes eliminated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{assemble_mass, assemble_tv_stiffness, linf_diff, FeFunction, SparseOperator};
use crate::mesh::Mesh;

/// How the frozen coefficient is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SchemeVariant {
    /// Semi-implicit: one solve with the coefficient of the previous step.
    Si,
    /// Exactly three fixed-point solves.
    Fix3,
    /// Fixed-point iteration until two iterates differ by less than `tol` in
    /// the maximum norm.
    Fix { tol: f64 },
}

impl SchemeVariant {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SchemeVariant::Fix { tol } if !(tol > 0.0) => Err(Error::InvalidArgument(format!(
                "fixed-point tolerance must be positive, got {tol}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Parameters of one step that do not change along a path.
#[derive(Debug, Clone, Copy)]
pub struct StepParams {
    pub eps: f64,
    pub lambda: f64,
    pub variant: SchemeVariant,
    pub cg_tol: f64,
    /// Fixed-point iteration cap for [`SchemeVariant::Fix`].
    pub max_fp_iters: usize,
}

impl Default for StepParams {
    fn default() -> Self {
        StepParams {
            eps: 1.0 / 32.0,
            lambda: 200.0,
            variant: SchemeVariant::Fix { tol: 1e-4 },
            cg_tol: 1e-10,
            max_fp_iters: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub solution: FeFunction,
    /// Frozen-coefficient function used in the last linear solve.
    pub frozen: FeFunction,
    pub fp_iterations: usize,
    /// Max-norm distance between the last two iterates.
    pub last_update: f64,
    /// The fixed-point cap was hit before the tolerance was met.
    pub capped: bool,
    /// Final relative CG residual of every linear solve.
    pub cg_residuals: Vec<f64>,
    pub cg_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    /// Smallest Rayleigh quotient `pᵀAp / pᵀp` over the search directions.
    pub min_ritz: f64,
}

/// Solves `A x = b` to relative residual `tol`.
pub fn cg_solve(a: &SparseOperator, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    cg_solve_masked(a, b, None, None, tol).map(|o| o.x)
}

/// Preconditioned CG restricted to the nodes with `free[i] == true`; fixed
/// nodes stay zero. `x0` is the initial guess.
pub fn cg_solve_masked(
    a: &SparseOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    free: Option<&[bool]>,
    tol: f64,
) -> Result<CgOutcome> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let is_free = |i: usize| free.is_none_or(|f| f[i]);
    let restrict = |v: &mut [f64]| {
        if let Some(f) = free {
            for (x, &keep) in v.iter_mut().zip(f) {
                if !keep {
                    *x = 0.0;
                }
            }
        }
    };
    let mut rhs = b.to_vec();
    restrict(&mut rhs);
    let b_norm = norm(&rhs);
    let mut x = x0.map(|x| x.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    restrict(&mut x);
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            min_ritz: f64::INFINITY,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .enumerate()
        .map(|(i, &d)| if is_free(i) && d != 0.0 { 1.0 / d } else { 0.0 })
        .collect();

    let mut r = a.matvec(&x);
    for i in 0..n {
        r[i] = rhs[i] - r[i];
    }
    restrict(&mut r);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 10 * n.max(1);
    let mut min_ritz = f64::INFINITY;
    let mut res = norm(&r) / b_norm;
    let mut it = 0;
    while res > tol {
        if it >= max_iter {
            return Err(Error::CgNotConverged {
                iterations: it,
                residual: res,
            });
        }
        a.matvec_into(&p, &mut ap);
        restrict(&mut ap);
        let pap = dot(&p, &ap);
        let pp = dot(&p, &p);
        if pp > 0.0 {
            min_ritz = min_ritz.min(pap / pp);
        }
        if !(pap > 0.0) {
            return Err(Error::CgNotConverged {
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        res = norm(&r) / b_norm;
    }
    Ok(CgOutcome {
        x,
        iterations: it,
        relative_residual: res,
        min_ritz,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Advances one step: returns `X^n` given `X^{n-1}` (already on `mesh`).
pub fn step(
    mesh: &Mesh,
    x_prev: &FeFunction,
    g_h: &FeFunction,
    noise: &FeFunction,
    tau: f64,
    params: &StepParams,
) -> Result<StepResult> {
    let mass = assemble_mass(mesh);
    step_with_mass(mesh, &mass, x_prev, g_h, noise, tau, params)
}

/// [`step`] with a precomputed mass matrix.
pub fn step_with_mass(
    mesh: &Mesh,
    mass: &SparseOperator,
    x_prev: &FeFunction,
    g_h: &FeFunction,
    noise: &FeFunction,
    tau: f64,
    params: &StepParams,
) -> Result<StepResult> {
    if !(tau > 0.0) || !(params.eps > 0.0) || params.lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step needs τ > 0, ε > 0, λ ≥ 0 (got τ = {tau}, ε = {}, λ = {})",
            params.eps, params.lambda
        )));
    }
    params.variant.validate()?;
    for f in [x_prev, g_h, noise] {
        f.check_mesh(mesh)?;
    }
    let free: Vec<bool> = mesh.boundary_flags().iter().map(|b| !b).collect();
    let lambda = params.lambda;
    let load: Vec<f64> = x_prev
        .values()
        .iter()
        .zip(g_h.values())
        .zip(noise.values())
        .map(|((x, g), w)| x + tau * lambda * g + w)
        .collect();
    let rhs = mass.matvec(&load);

    let (max_solves, tol) = match params.variant {
        SchemeVariant::Si => (1, None),
        SchemeVariant::Fix3 => (3, None),
        SchemeVariant::Fix { tol } => (params.max_fp_iters.max(1), Some(tol)),
    };

    let mut frozen = x_prev.clone();
    let mut current = x_prev.clone();
    let mut cg_residuals = Vec::new();
    let mut cg_iterations = 0;
    let mut last_update = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = tol.is_none();
    while iterations < max_solves {
        let a = assemble_tv_stiffness(mesh, &current, params.eps)?;
        let system = mass.linear_combination(1.0 + tau * lambda, &a, tau);
        let outcome = cg_solve_masked(&system, &rhs, Some(current.values()), Some(&free), params.cg_tol)?;
        cg_residuals.push(outcome.relative_residual);
        cg_iterations += outcome.iterations;
        let next = FeFunction::from_values(mesh, outcome.x)?;
        last_update = linf_diff(&next, &current)?;
        frozen = std::mem::replace(&mut current, next);
        iterations += 1;
        if let Some(tol) = tol {
            if last_update < tol {
                converged = true;
                break;
            }
        }
    }
    Ok(StepResult {
        solution: current,
        frozen,
        fp_iterations: iterations,
        last_update,
        capped: !converged,
        cg_residuals,
        cg_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{l2_norm, FeFunction};

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    /// Dense LU with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn cg_identity_and_zero_rhs() {
        let id = SparseOperator::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let out = cg_solve_masked(&id, &b, None, None, 1e-12).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b);
        assert_eq!(cg_solve(&id, &[0.0; 5], 1e-10).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn cg_matches_dense_lu() {
        let n = 10;
        let mut s = 17;
        let b_mat: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| lcg(&mut s)).collect()).collect();
        // A = BᵀB + n I
        let mut triplets = Vec::new();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut v: f64 = (0..n).map(|k| b_mat[k][i] * b_mat[k][j]).sum();
                if i == j {
                    v += n as f64;
                }
                dense[i][j] = v;
                triplets.push((i, j, v));
            }
        }
        let a = SparseOperator::from_triplets(n, &triplets);
        let rhs: Vec<f64> = (0..n).map(|_| lcg(&mut s)).collect();
        let x = cg_solve(&a, &rhs, 1e-14).unwrap();
        let y = dense_solve(dense, rhs);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = SparseOperator::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            cg_solve(&a, &[1.0, 1.0], 1e-12),
            Err(Error::CgNotConverged { .. })
        ));
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let mesh = Mesh::macro_mesh(4).unwrap();
        let z = FeFunction::zeros(&mesh);
        let g = FeFunction::interpolate(&mesh, |x, y| x * y * (1.0 - x) * (1.0 - y));
        let params = StepParams {
            lambda: 0.0,
            ..StepParams::default()
        };
        let r = step(&mesh, &z, &g, &z, 1e-3, &params).unwrap();
        assert!(r.solution.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn small_steps_are_mass_dominated() {
        let mesh = Mesh::macro_mesh(4).unwrap();
        let mut x = FeFunction::interpolate(&mesh, |x, y| (3.0 * x).sin() * (2.0 * y).sin());
        x.zero_boundary(&mesh);
        let mut w = FeFunction::interpolate(&mesh, |x, y| 0.01 * x * (1.0 - x) * y * (1.0 - y));
        w.zero_boundary(&mesh);
        let g = FeFunction::interpolate(&mesh, |_, _| 1.0);
        let params = StepParams {
            variant: SchemeVariant::Fix { tol: 1e-12 },
            ..StepParams::default()
        };
        let mut ratios = Vec::new();
        for tau in [1e-5, 1e-6] {
            let r = step(&mesh, &x, &g, &w, tau, &params).unwrap();
            let d = r.solution.axpy(-1.0, &x).unwrap().axpy(-1.0, &w).unwrap();
            ratios.push(l2_norm(&mesh, &d).unwrap() / tau);
        }
        // ‖X − X_prev − σΔW‖ / τ stays bounded as τ shrinks
        assert!(ratios[1] < 2.0 * ratios[0] && ratios[1] > 0.5 * ratios[0], "{ratios:?}");
    }

    #[test]
    fn variants_iterate_as_specified() {
        let mesh = Mesh::macro_mesh(4).unwrap();
        let z = FeFunction::zeros(&mesh);
        let mut g = FeFunction::interpolate(&mesh, |x, y| if (x - 0.5).hypot(y - 0.5) < 0.25 { 1.0 } else { 0.0 });
        g.zero_boundary(&mesh);
        let mut p = StepParams {
            variant: SchemeVariant::Si,
            ..StepParams::default()
        };
        assert_eq!(step(&mesh, &z, &g, &z, 1e-3, &p).unwrap().fp_iterations, 1);
        p.variant = SchemeVariant::Fix3;
        assert_eq!(step(&mesh, &z, &g, &z, 1e-3, &p).unwrap().fp_iterations, 3);
        p.variant = SchemeVariant::Fix { tol: 1e-6 };
        let r = step(&mesh, &z, &g, &z, 1e-3, &p).unwrap();
        assert!(r.last_update < 1e-6 && !r.capped);
        p.variant = SchemeVariant::Fix { tol: 0.0 };
        assert!(step(&mesh, &z, &g, &z, 1e-3, &p).is_err());
    }
}
