//! Reference computations that share no code with the production
//! estimators: gradients from 2×2 solves, over-integration with the 7-point
//! rule, edge adjacency by brute force and a dense Newton solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::estimators::{eta_lin, eta_space, eta_time, interior_residual, jump_residual};
use crate::fem::{assemble_mass, assemble_tv_stiffness, energy, h1_seminorm, l2_norm, FeFunction};
use crate::mesh::Mesh;
use crate::quadrature::DEGREE5;
use crate::solver::{step, SchemeVariant, StepParams};

use super::Check;

/// Gradient of the linear function through three corner values.
fn plane_gradient(c: &[[f64; 2]; 3], v: [f64; 3]) -> [f64; 2] {
    let (a11, a12) = (c[1][0] - c[0][0], c[1][1] - c[0][1]);
    let (a21, a22) = (c[2][0] - c[0][0], c[2][1] - c[0][1]);
    let (b1, b2) = (v[1] - v[0], v[2] - v[0]);
    let det = a11 * a22 - a12 * a21;
    [(b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det]
}

fn area(c: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1])).abs()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn diameter(c: &[[f64; 2]; 3]) -> f64 {
    dist(c[0], c[1]).max(dist(c[1], c[2])).max(dist(c[2], c[0]))
}

/// `∫_T (Σ_i b_i v_i)²` with the 7-point rule.
fn integrate_sq(c: &[[f64; 2]; 3], v: [f64; 3]) -> f64 {
    area(c) * DEGREE5.iter().map(|(b, w)| w * (b[0] * v[0] + b[1] * v[1] + b[2] * v[2]).powi(2)).sum::<f64>()
}

fn corner_values(mesh: &Mesh, t: usize, f: &[f64]) -> [f64; 3] {
    mesh.triangles()[t].map(|v| f[v])
}

/// Pairs of triangles sharing two vertices, with the shared vertices.
fn interior_edges(mesh: &Mesh) -> Vec<(usize, usize, [usize; 2])> {
    let tris = mesh.triangles();
    let mut out = Vec::new();
    for a in 0..tris.len() {
        for b in a + 1..tris.len() {
            let shared: Vec<usize> = tris[a].iter().copied().filter(|v| tris[b].contains(v)).collect();
            if shared.len() == 2 {
                out.push((a, b, [shared[0], shared[1]]));
            }
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

struct Data {
    x: FeFunction,
    x_prev: FeFunction,
    frozen: FeFunction,
    g: FeFunction,
    noise: FeFunction,
    tau: f64,
    lambda: f64,
    eps: f64,
}

fn random_data(mesh: &Mesh, rng: &mut ChaCha8Rng) -> Data {
    let mut f = || {
        let v = (0..mesh.num_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        FeFunction::from_values(mesh, v).expect("length matches")
    };
    Data {
        x: f(),
        x_prev: f(),
        frozen: f(),
        g: f(),
        noise: f(),
        tau: 1e-3,
        lambda: 200.0,
        eps: 1.0 / 32.0,
    }
}

/// Compares the estimator pieces and norms with hand formulas on `mesh`.
pub fn estimator_checks(label: &str, mesh: &Mesh, seed: u64, tol: f64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_data(mesh, &mut rng);
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, oracle: f64| {
        checks.push(Check::at_most(format!("{label}: {name}"), rel(value, oracle), tol));
    };

    // production
    let residual = interior_residual(mesh, &d.x, &d.x_prev, &d.g, &d.noise, d.tau, d.lambda)?;
    let jumps = jump_residual(mesh, &d.x, d.eps)?;
    let space = eta_space(mesh, &residual, &jumps);
    let lin = eta_lin(mesh, &d.x, &d.frozen, d.eps)?;
    let (time1, time2) = eta_time(mesh, &d.x, &d.x_prev)?;

    // oracle
    let r_nodal: Vec<f64> = (0..mesh.num_vertices())
        .map(|i| {
            let x = d.x.values()[i];
            d.lambda * (d.g.values()[i] - x) - (x - d.x_prev.values()[i]) / d.tau + d.noise.values()[i] / d.tau
        })
        .collect();
    let diff: Vec<f64> = d.x.values().iter().zip(d.x_prev.values()).map(|(a, b)| a - b).collect();
    let mut space1 = 0.0;
    let mut lin_oracle = 0.0;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut time1_sq = 0.0;
    let mut time2_sq = 0.0;
    let mut grads = Vec::new();
    for t in 0..mesh.num_triangles() {
        let c = mesh.corners(t);
        let h = diameter(&c);
        space1 += h * h * integrate_sq(&c, corner_values(mesh, t, &r_nodal));
        let gx = plane_gradient(&c, corner_values(mesh, t, d.x.values()));
        let gs = plane_gradient(&c, corner_values(mesh, t, d.frozen.values()));
        let nx = (gx[0] * gx[0] + gx[1] * gx[1] + d.eps * d.eps).sqrt();
        let ns = (gs[0] * gs[0] + gs[1] * gs[1] + d.eps * d.eps).sqrt();
        // ∫_T |∇X/ns − ∇X/nx|², integrand constant
        let integrand = (gx[0] / ns - gx[0] / nx).powi(2) + (gx[1] / ns - gx[1] / nx).powi(2);
        lin_oracle += area(&c) * DEGREE5.iter().map(|(_, w)| w * integrand).sum::<f64>();
        l2 += integrate_sq(&c, corner_values(mesh, t, d.x.values()));
        h1 += area(&c) * (gx[0] * gx[0] + gx[1] * gx[1]);
        time1_sq += integrate_sq(&c, corner_values(mesh, t, &diff));
        let gd = plane_gradient(&c, corner_values(mesh, t, &diff));
        time2_sq += area(&c) * (gd[0] * gd[0] + gd[1] * gd[1]);
        grads.push([gx[0] / nx, gx[1] / nx]);
    }
    let mut space2 = 0.0;
    for (a, b, [p, q]) in interior_edges(mesh) {
        let pa = mesh.vertices()[p];
        let pb = mesh.vertices()[q];
        let len = dist(pa, pb);
        let normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
        let j = 0.5 * ((grads[a][0] - grads[b][0]) * normal[0] + (grads[a][1] - grads[b][1]) * normal[1]);
        // h_E ‖J‖²_E with ‖J‖²_E = h_E J²
        space2 += len * len * j * j;
    }

    push("eta_space1", space.space1, space1);
    push("eta_space2", space.space2, space2);
    push("eta_lin", lin, lin_oracle);
    push("L2 norm", l2_norm(mesh, &d.x)?, l2.sqrt());
    push("H1 seminorm", h1_seminorm(mesh, &d.x)?, h1.sqrt());
    push("eta_time1", time1, time1_sq.sqrt());
    push("eta_time2", time2, time2_sq.sqrt());
    push(
        "sum of eta_T",
        space.per_element.iter().sum(),
        space1 + 2.0 * space2,
    );
    Ok(checks)
}

/// The unit square cut along its diagonal.
pub fn two_triangle_mesh() -> Mesh {
    Mesh::from_triangles(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], &[[0, 1, 2], [0, 2, 3]])
        .expect("valid triangulation")
}

/// The macro mesh with one square, every triangle bisected once.
pub fn eight_triangle_mesh() -> Mesh {
    Mesh::macro_mesh(1).expect("valid").refine(&[0, 1, 2, 3])
}

/// Relative max-norm gap between `A(u)u + λM(u − g)` and central finite
/// differences (step `h`) of the discrete energy.
pub fn energy_gradient_gap(mesh: &Mesh, seed: u64, h: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_data(mesh, &mut rng);
    let (u, g, eps, lambda) = (&d.x, &d.g, d.eps, d.lambda);
    let a = assemble_tv_stiffness(mesh, u, eps)?;
    let mass = assemble_mass(mesh);
    let au = a.matvec(u.values());
    let diff = u.axpy(-1.0, g)?;
    let md = mass.matvec(diff.values());
    let grad: Vec<f64> = au.iter().zip(&md).map(|(a, m)| a + lambda * m).collect();
    let mut worst: f64 = 0.0;
    let scale = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..mesh.num_vertices() {
        let mut plus = u.clone();
        plus.values_mut()[i] += h;
        let mut minus = u.clone();
        minus.values_mut()[i] -= h;
        let fd = (energy(mesh, &plus, g, eps, lambda)? - energy(mesh, &minus, g, eps, lambda)?) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs());
    }
    Ok(worst / scale)
}

/// Solves the dense linear system `a x = b` by Gaussian elimination with
/// partial pivoting.
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
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Solves the fully nonlinear implicit step by damped Newton with a
/// finite-difference Jacobian on the interior unknowns.
pub fn newton_step(
    mesh: &Mesh,
    x_prev: &FeFunction,
    g: &FeFunction,
    noise: &FeFunction,
    tau: f64,
    eps: f64,
    lambda: f64,
) -> Result<FeFunction> {
    let mass = assemble_mass(mesh);
    let interior: Vec<usize> = (0..mesh.num_vertices()).filter(|&v| !mesh.is_boundary_vertex(v)).collect();
    let load: Vec<f64> = (0..mesh.num_vertices())
        .map(|i| x_prev.values()[i] + tau * lambda * g.values()[i] + noise.values()[i])
        .collect();
    let rhs = mass.matvec(&load);
    let residual = |x: &FeFunction| -> Result<Vec<f64>> {
        let a = assemble_tv_stiffness(mesh, x, eps)?;
        let mx = mass.matvec(x.values());
        let ax = a.matvec(x.values());
        Ok(interior
            .iter()
            .map(|&i| (1.0 + tau * lambda) * mx[i] + tau * ax[i] - rhs[i])
            .collect())
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = x_prev.clone();
    x.zero_boundary(mesh);
    let mut f = residual(&x)?;
    let fd_step = 1e-7;
    for _ in 0..100 {
        if norm(&f) < 1e-15 {
            break;
        }
        let mut jac = vec![vec![0.0; interior.len()]; interior.len()];
        for (col, &i) in interior.iter().enumerate() {
            let mut p = x.clone();
            p.values_mut()[i] += fd_step;
            let mut m = x.clone();
            m.values_mut()[i] -= fd_step;
            let (fp, fm) = (residual(&p)?, residual(&m)?);
            for row in 0..interior.len() {
                jac[row][col] = (fp[row] - fm[row]) / (2.0 * fd_step);
            }
        }
        let delta = dense_solve(jac, f.iter().map(|v| -v).collect());
        let mut damping = 1.0;
        loop {
            let mut trial = x.clone();
            for (k, &i) in interior.iter().enumerate() {
                trial.values_mut()[i] += damping * delta[k];
            }
            let ft = residual(&trial)?;
            if norm(&ft) < norm(&f) || damping < 1e-6 {
                x = trial;
                f = ft;
                break;
            }
            damping *= 0.5;
        }
    }
    Ok(x)
}

/// Max-norm gap between a tightly converged fixed-point step and the Newton
/// solution on the one-square macro mesh.
pub fn newton_gap(seed: u64) -> Result<f64> {
    let mesh = Mesh::macro_mesh(1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_data(&mesh, &mut rng);
    let mut x_prev = d.x_prev;
    x_prev.zero_boundary(&mesh);
    let mut noise = d.noise.scaled(0.1);
    noise.zero_boundary(&mesh);
    let params = StepParams {
        eps: d.eps,
        lambda: d.lambda,
        variant: SchemeVariant::Fix { tol: 1e-12 },
        cg_tol: 1e-14,
        max_fp_iters: 500,
    };
    let fixed = step(&mesh, &x_prev, &d.g, &noise, d.tau, &params)?;
    let newton = newton_step(&mesh, &x_prev, &d.g, &noise, d.tau, d.eps, d.lambda)?;
    crate::fem::linf_diff(&fixed.solution, &newton)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_meshes() {
        assert_eq!(two_triangle_mesh().num_triangles(), 2);
        assert_eq!(eight_triangle_mesh().num_triangles(), 8);
        assert_eq!(interior_edges(&eight_triangle_mesh()).len(), 8);
    }

    #[test]
    fn plane_gradient_recovers_plane() {
        let c = [[0.1, 0.2], [0.9, 0.3], [0.4, 0.8]];
        let v = c.map(|p| 3.0 * p[0] - 2.0 * p[1] + 1.0);
        let g = plane_gradient(&c, v);
        assert!((g[0] - 3.0).abs() < 1e-13 && (g[1] + 2.0).abs() < 1e-13);
    }

    #[test]
    fn dense_solver() {
        let a = vec![vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 2.0]];
        let x = dense_solve(a.clone(), vec![1.0, 2.0, 3.0]);
        for (row, b) in a.iter().zip([1.0, 2.0, 3.0]) {
            let s: f64 = row.iter().zip(&x).map(|(a, x)| a * x).sum();
            assert!((s - b).abs() < 1e-14);
        }
    }

    #[test]
    fn estimators_match_oracles() {
        for (label, mesh) in [("2 triangles", two_triangle_mesh()), ("8 triangles", eight_triangle_mesh())] {
            for c in estimator_checks(label, &mesh, 3, 1e-12).unwrap() {
                assert!(c.passed, "{c}");
            }
        }
    }

    #[test]
    fn energy_gradient() {
        let mesh = Mesh::macro_mesh(4).unwrap();
        assert!(energy_gradient_gap(&mesh, 5, 1e-6).unwrap() < 1e-6);
    }

    #[test]
    fn newton_agrees_with_fixed_point() {
        assert!(newton_gap(11).unwrap() < 1e-8);
    }
}
