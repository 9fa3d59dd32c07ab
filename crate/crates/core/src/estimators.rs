//! Residual-based a posteriori indicators: interior residual, flux jumps,
//! time, space, noise and linearization indicators.
//!
//! All values are per sample path. Expectations are taken by the Monte Carlo
//! driver.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fem::{h1_seminorm, l2_norm, l2_squared_per_element, reg_norm, FeFunction};
use crate::mesh::Mesh;
use crate::noise::NoiseModel;
use crate::quadrature::{to_cartesian, DEGREE4};

/// Every indicator of one step of one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct IndicatorRecord {
    pub step: usize,
    pub time: f64,
    pub tau: f64,
    pub ndof: usize,
    pub eta_time1: f64,
    pub eta_time2: f64,
    pub eta_space1: f64,
    pub eta_space2: f64,
    pub eta_noise1: f64,
    pub eta_noise2: f64,
    pub eta_noise3: f64,
    pub eta_lin: f64,
    pub fp_iters: usize,
    /// `η_T` per triangle of this step's mesh. Only kept where requested.
    #[serde(skip)]
    pub element_indicators: Vec<f64>,
}

impl IndicatorRecord {
    /// `η_h = Σ_T η_T`; every interior edge is counted by both neighbours.
    pub fn eta_h(&self) -> f64 {
        self.eta_space1 + 2.0 * self.eta_space2
    }
}

/// Nodal values of the interior residual
/// `R = λ(g − X) − (X − X_prev)/τ + σΔW/τ`.
pub fn residual_function(
    mesh: &Mesh,
    x: &FeFunction,
    x_prev: &FeFunction,
    g_h: &FeFunction,
    noise: &FeFunction,
    tau: f64,
    lambda: f64,
) -> Result<FeFunction> {
    for f in [x, x_prev, g_h, noise] {
        f.check_mesh(mesh)?;
    }
    let values = (0..mesh.num_vertices())
        .map(|i| {
            let xi = x.values()[i];
            lambda * (g_h.values()[i] - xi) - (xi - x_prev.values()[i]) / tau + noise.values()[i] / tau
        })
        .collect();
    FeFunction::from_values(mesh, values)
}

/// `‖R‖²_{L²(T)}` for every triangle (exact: R is P1).
pub fn interior_residual(
    mesh: &Mesh,
    x: &FeFunction,
    x_prev: &FeFunction,
    g_h: &FeFunction,
    noise: &FeFunction,
    tau: f64,
    lambda: f64,
) -> Result<Vec<f64>> {
    let r = residual_function(mesh, x, x_prev, g_h, noise, tau, lambda)?;
    Ok(l2_squared_per_element(mesh, r.values()))
}

/// Regularized flux `∇X / |∇X|_ε` per triangle.
pub fn fluxes(mesh: &Mesh, x: &FeFunction, eps: f64) -> Vec<[f64; 2]> {
    (0..mesh.num_triangles())
        .map(|t| {
            let g = x.gradient(mesh, t);
            let n = reg_norm(g, eps);
            [g[0] / n, g[1] / n]
        })
        .collect()
}

/// Signed jumps `½(q|K1 − q|K2)·ν` on every edge; zero on boundary edges.
pub fn jumps(mesh: &Mesh, x: &FeFunction, eps: f64) -> Result<Vec<f64>> {
    x.check_mesh(mesh)?;
    let q = fluxes(mesh, x, eps);
    let geo = mesh.geometry();
    Ok(mesh
        .edges()
        .iter()
        .zip(&geo.edges)
        .map(|(e, eg)| {
            if !e.interior {
                return 0.0;
            }
            let [k1, k2] = e.triangles;
            0.5 * ((q[k1][0] - q[k2][0]) * eg.normal[0] + (q[k1][1] - q[k2][1]) * eg.normal[1])
        })
        .collect())
}

/// `‖J_E‖²_{L²(E)} = h_E J_E²` for every edge.
pub fn jump_residual(mesh: &Mesh, x: &FeFunction, eps: f64) -> Result<Vec<f64>> {
    let j = jumps(mesh, x, eps)?;
    let geo = mesh.geometry();
    Ok(j.iter().zip(&geo.edges).map(|(j, eg)| eg.length * j * j).collect())
}

/// `(‖X − X_prev‖, ‖∇(X − X_prev)‖)`.
pub fn eta_time(mesh: &Mesh, x: &FeFunction, x_prev: &FeFunction) -> Result<(f64, f64)> {
    let d = x.axpy(-1.0, x_prev)?;
    Ok((l2_norm(mesh, &d)?, h1_seminorm(mesh, &d)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceIndicators {
    pub space1: f64,
    pub space2: f64,
    /// `η_T = h_T²‖R‖²_T + Σ_{E ⊂ ∂T} h_E ‖J_E‖²_E`.
    pub per_element: Vec<f64>,
}

pub fn eta_space(mesh: &Mesh, residual_sq: &[f64], jump_sq: &[f64]) -> SpaceIndicators {
    let geo = mesh.geometry();
    let edge_terms: Vec<f64> = jump_sq
        .iter()
        .zip(&geo.edges)
        .zip(mesh.edges())
        .map(|((j, eg), e)| if e.interior { eg.length * j } else { 0.0 })
        .collect();
    let element_terms: Vec<f64> = residual_sq
        .iter()
        .zip(&geo.triangles)
        .map(|(r, g)| g.diameter * g.diameter * r)
        .collect();
    let per_element = (0..mesh.num_triangles())
        .map(|t| element_terms[t] + mesh.triangle_edges(t).iter().map(|&e| edge_terms[e]).sum::<f64>())
        .collect();
    SpaceIndicators {
        space1: element_terms.iter().sum(),
        space2: edge_terms.iter().sum(),
        per_element,
    }
}

/// `‖∇X/|∇X*|_ε − ∇X/|∇X|_ε‖²`, exact per triangle.
pub fn eta_lin(mesh: &Mesh, x: &FeFunction, frozen: &FeFunction, eps: f64) -> Result<f64> {
    x.check_mesh(mesh)?;
    frozen.check_mesh(mesh)?;
    let geo = mesh.geometry();
    Ok((0..mesh.num_triangles())
        .map(|t| {
            let g = x.gradient(mesh, t);
            let gs = frozen.gradient(mesh, t);
            let c = 1.0 / reg_norm(gs, eps) - 1.0 / reg_norm(g, eps);
            geo.triangles[t].area * (g[0] * g[0] + g[1] * g[1]) * c * c
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseIndicators {
    pub noise1: f64,
    pub noise2: f64,
    pub noise3: f64,
}

/// Time subintervals per step for the trapezoid rules.
const TIME_SUBSAMPLES: usize = 8;

/// (L² part, H¹ part) pair of squared norms.
type NormPair = (f64, f64);

/// Stateful evaluator of the noise indicators along one path. It keeps the
/// running sums over earlier steps, so each call costs O(1) quadratures.
#[derive(Debug, Clone)]
pub struct NoiseEstimator {
    model: NoiseModel,
    macro_mesh: Mesh,
    constant: Option<ConstantNorms>,
    /// Σ_{i<n} ∫ ‖σ(t) − σ(t_{i−1})‖², both norms
    drift_sum: NormPair,
    /// Σ_{i<n} τ_i ‖σ(t_{i−1}) − σ_h(t_{i−1})‖², both norms
    interp_sum: NormPair,
}

#[derive(Debug, Clone, Copy)]
struct ConstantNorms {
    sigma: NormPair,
    interp: NormPair,
}

impl NoiseEstimator {
    pub fn new(model: &NoiseModel, macro_mesh: &Mesh) -> NoiseEstimator {
        let mut est = NoiseEstimator {
            model: model.clone(),
            macro_mesh: macro_mesh.clone(),
            constant: None,
            drift_sum: (0.0, 0.0),
            interp_sum: (0.0, 0.0),
        };
        if model.is_time_constant() {
            est.constant = Some(ConstantNorms {
                sigma: est.sigma_norms(0.0),
                interp: est.interpolation_error(0.0),
            });
        }
        est
    }

    /// Indicators of the step `[t_prev, t_prev + tau]`; afterwards the step
    /// joins the history.
    pub fn step(&mut self, t_prev: f64, tau: f64) -> NoiseIndicators {
        let t_next = t_prev + tau;
        let (drift, interp, double) = match self.constant {
            Some(c) => ((0.0, 0.0), c.interp, (0.5 * tau * tau * c.sigma.0, 0.5 * tau * tau * c.sigma.1)),
            None => {
                let drift = trapezoid(t_prev, t_next, |t| self.diff_norms(t, t_prev));
                let interp = self.interpolation_error(t_prev);
                let double = nested_trapezoid(t_prev, t_next, |s| self.sigma_norms(s));
                (drift, interp, double)
            }
        };
        let out = NoiseIndicators {
            noise1: tau * self.drift_sum.0 + tau * self.interp_sum.0 + double.0 + tau * tau * interp.0,
            noise2: tau * self.drift_sum.1 + tau * self.interp_sum.1 + double.1 + tau * tau * interp.1,
            noise3: drift.0 + tau * interp.0,
        };
        self.drift_sum.0 += drift.0;
        self.drift_sum.1 += drift.1;
        self.interp_sum.0 += tau * interp.0;
        self.interp_sum.1 += tau * interp.1;
        out
    }

    /// Quadrature over the macro mesh of Σ_k of `f(mode_k, point)`, returning
    /// the (value², gradient²) sums scaled by the amplitude².
    fn integrate(&self, f: impl Fn(usize, f64, f64, [f64; 3], usize) -> (f64, [f64; 2])) -> NormPair {
        let mesh = &self.macro_mesh;
        let geo = mesh.geometry();
        let a2 = self.model.amplitude * self.model.amplitude;
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for t in 0..mesh.num_triangles() {
            let c = mesh.corners(t);
            let area = geo.triangles[t].area;
            for (k, _) in self.model.modes.iter().enumerate() {
                for (b, w) in DEGREE4 {
                    let [x, y] = to_cartesian(&c, b);
                    let (v, g) = f(k, x, y, *b, t);
                    l2 += area * w * v * v;
                    h1 += area * w * (g[0] * g[0] + g[1] * g[1]);
                }
            }
        }
        (a2 * l2, a2 * h1)
    }

    fn sigma_norms(&self, s: f64) -> NormPair {
        self.integrate(|k, x, y, _, _| {
            let m = &self.model.modes[k];
            (m.value(s, x, y), m.gradient(s, x, y))
        })
    }

    fn diff_norms(&self, t: f64, s: f64) -> NormPair {
        self.integrate(|k, x, y, _, _| {
            let m = &self.model.modes[k];
            let g1 = m.gradient(t, x, y);
            let g0 = m.gradient(s, x, y);
            (m.value(t, x, y) - m.value(s, x, y), [g1[0] - g0[0], g1[1] - g0[1]])
        })
    }

    /// `Σ_k ‖σ_k(t) − I_h σ_k(t)‖²` on the macro mesh, both norms.
    fn interpolation_error(&self, t: f64) -> NormPair {
        let mesh = &self.macro_mesh;
        let geo = mesh.geometry();
        let nodal: Vec<Vec<f64>> = self
            .model
            .modes
            .iter()
            .map(|m| mesh.vertices().iter().map(|p| m.value(t, p[0], p[1])).collect())
            .collect();
        self.integrate(|k, x, y, b, tri| {
            let m = &self.model.modes[k];
            let vs = mesh.triangles()[tri].map(|v| nodal[k][v]);
            let interp = b[0] * vs[0] + b[1] * vs[1] + b[2] * vs[2];
            let bg = geo.triangles[tri].basis_gradients;
            let ig = [
                vs[0] * bg[0][0] + vs[1] * bg[1][0] + vs[2] * bg[2][0],
                vs[0] * bg[0][1] + vs[1] * bg[1][1] + vs[2] * bg[2][1],
            ];
            let g = m.gradient(t, x, y);
            (m.value(t, x, y) - interp, [g[0] - ig[0], g[1] - ig[1]])
        })
    }
}

/// Noise indicators of the last step of the time grid `times`
/// (`times[0] = 0`, strictly increasing).
pub fn eta_noise(model: &NoiseModel, macro_mesh: &Mesh, times: &[f64]) -> NoiseIndicators {
    let mut est = NoiseEstimator::new(model, macro_mesh);
    let mut last = NoiseIndicators::default();
    for w in times.windows(2) {
        last = est.step(w[0], w[1] - w[0]);
    }
    last
}

fn trapezoid(a: f64, b: f64, f: impl Fn(f64) -> NormPair) -> NormPair {
    let h = (b - a) / TIME_SUBSAMPLES as f64;
    let mut s = (0.0, 0.0);
    for j in 0..=TIME_SUBSAMPLES {
        let w = if j == 0 || j == TIME_SUBSAMPLES { 0.5 * h } else { h };
        let v = f(a + j as f64 * h);
        s.0 += w * v.0;
        s.1 += w * v.1;
    }
    s
}

/// `∫_a^b ∫_t^b f(s) ds dt` by trapezoid rules in both variables.
fn nested_trapezoid(a: f64, b: f64, f: impl Fn(f64) -> NormPair) -> NormPair {
    let n = TIME_SUBSAMPLES;
    let h = (b - a) / n as f64;
    let vals: Vec<NormPair> = (0..=n).map(|j| f(a + j as f64 * h)).collect();
    // inner[j] = ∫_{t_j}^{b} f
    let mut inner = vec![(0.0, 0.0); n + 1];
    for j in (0..n).rev() {
        inner[j].0 = inner[j + 1].0 + 0.5 * h * (vals[j].0 + vals[j + 1].0);
        inner[j].1 = inner[j + 1].1 + 0.5 * h * (vals[j].1 + vals[j + 1].1);
    }
    let mut s = (0.0, 0.0);
    for j in 0..=n {
        let w = if j == 0 || j == n { 0.5 * h } else { h };
        s.0 += w * inner[j].0;
        s.1 += w * inner[j].1;
    }
    s
}
