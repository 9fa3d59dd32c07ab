//! Finite-dimensional additive noise: spatial modes driven by independent
//! scalar Brownian motions, per-path random streams, the discrete stochastic
//! integral and the random perturbation of the data.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{transfer, FeFunction};
use crate::mesh::Mesh;

/// A spatial noise field, possibly time dependent.
pub trait SpatialMode: Send + Sync + std::fmt::Debug {
    fn value(&self, t: f64, x: f64, y: f64) -> f64;
    fn gradient(&self, t: f64, x: f64, y: f64) -> [f64; 2];
    fn is_time_constant(&self) -> bool {
        true
    }
}

/// `sin(kπx) sin(kπy)`.
#[derive(Debug, Clone, Copy)]
pub struct SineProduct {
    pub k: f64,
}

impl SpatialMode for SineProduct {
    fn value(&self, _t: f64, x: f64, y: f64) -> f64 {
        (self.k * PI * x).sin() * (self.k * PI * y).sin()
    }

    fn gradient(&self, _t: f64, x: f64, y: f64) -> [f64; 2] {
        let w = self.k * PI;
        [
            w * (w * x).cos() * (w * y).sin(),
            w * (w * x).sin() * (w * y).cos(),
        ]
    }
}

/// A mode multiplied by `t`.
#[derive(Debug, Clone)]
pub struct LinearInTime<M>(pub M);

impl<M: SpatialMode> SpatialMode for LinearInTime<M> {
    fn value(&self, t: f64, x: f64, y: f64) -> f64 {
        t * self.0.value(t, x, y)
    }

    fn gradient(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        let g = self.0.gradient(t, x, y);
        [t * g[0], t * g[1]]
    }

    fn is_time_constant(&self) -> bool {
        false
    }
}

/// Named noise configurations selectable from the run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePreset {
    /// `sin(4πx)sin(4πy)` and `sin(5πx)sin(5πy)` with independent drivers.
    Sines,
    None,
}

/// `σ(t) dW = amplitude · Σ_k mode_k(t) dβ_k`.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub modes: Vec<Arc<dyn SpatialMode>>,
    pub amplitude: f64,
}

impl NoiseModel {
    pub fn new(modes: Vec<Arc<dyn SpatialMode>>, amplitude: f64) -> NoiseModel {
        NoiseModel { modes, amplitude }
    }

    pub fn preset(preset: NoisePreset, amplitude: f64) -> NoiseModel {
        match preset {
            NoisePreset::Sines => NoiseModel::new(
                vec![Arc::new(SineProduct { k: 4.0 }), Arc::new(SineProduct { k: 5.0 })],
                amplitude,
            ),
            NoisePreset::None => NoiseModel::new(Vec::new(), amplitude),
        }
    }

    pub fn num_drivers(&self) -> usize {
        self.modes.len()
    }

    pub fn is_time_constant(&self) -> bool {
        self.modes.iter().all(|m| m.is_time_constant())
    }

    /// True when the noise term vanishes identically.
    pub fn is_silent(&self) -> bool {
        self.modes.is_empty() || self.amplitude == 0.0
    }
}

/// Stream purposes within one path.
const STREAM_INCREMENTS: u64 = 0;
const STREAM_PERTURBATION: u64 = 1;

/// Counter-based random stream of one sample path. The stream depends only
/// on (base seed, path index, purpose), never on scheduling.
#[derive(Debug, Clone)]
pub struct PathRng {
    rng: ChaCha8Rng,
}

impl PathRng {
    fn with_stream(seed: u64, path: usize, purpose: u64) -> PathRng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((path as u64) << 1 | purpose);
        PathRng { rng }
    }

    /// Stream for the Wiener increments of `path`.
    pub fn increments(seed: u64, path: usize) -> PathRng {
        PathRng::with_stream(seed, path, STREAM_INCREMENTS)
    }

    /// Stream for the data perturbation of `path`.
    pub fn perturbation(seed: u64, path: usize) -> PathRng {
        PathRng::with_stream(seed, path, STREAM_PERTURBATION)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform_symmetric(&mut self) -> f64 {
        self.rng.gen_range(-1.0..1.0)
    }
}

/// One `N(0, τ)` increment per driver.
pub fn wiener_increments(rng: &mut PathRng, tau: f64, drivers: usize) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {tau}")));
    }
    let s = tau.sqrt();
    Ok((0..drivers).map(|_| s * rng.standard_normal()).collect())
}

/// Nodal interpolants of every mode at time `t` on the macro mesh, then
/// carried over to `mesh`. Amplitude is not included.
pub fn sigma_h(model: &NoiseModel, macro_mesh: &Mesh, mesh: &Mesh, t: f64) -> Result<Vec<FeFunction>> {
    model
        .modes
        .iter()
        .map(|mode| {
            let f = FeFunction::interpolate(macro_mesh, |x, y| mode.value(t, x, y));
            transfer(&f, macro_mesh, mesh)
        })
        .collect()
}

/// `amplitude · Σ_k σ_h,k ΔW_k`.
pub fn noise_term(mesh: &Mesh, amplitude: f64, modes: &[FeFunction], increments: &[f64]) -> Result<FeFunction> {
    let mut out = FeFunction::zeros(mesh);
    for (m, dw) in modes.iter().zip(increments) {
        out = out.axpy(amplitude * dw, m)?;
    }
    Ok(out)
}

/// `Σ_h^n = Σ_h^{n-1} + amplitude · Σ_k σ_h,k ΔW_k`.
pub fn accumulate_sigma(
    previous: &FeFunction,
    amplitude: f64,
    modes: &[FeFunction],
    increments: &[f64],
) -> Result<FeFunction> {
    let mut out = previous.clone();
    for (m, dw) in modes.iter().zip(increments) {
        out = out.axpy(amplitude * dw, m)?;
    }
    Ok(out)
}

/// `ξ*_h`: i.i.d. `amplitude · U(−1, 1)` values at every macro node, with the
/// boundary values then set to zero.
pub fn g_perturbation(rng: &mut PathRng, macro_mesh: &Mesh, amplitude: f64) -> FeFunction {
    let values = (0..macro_mesh.num_vertices())
        .map(|_| amplitude * rng.uniform_symmetric())
        .collect();
    let mut f = FeFunction::from_values(macro_mesh, values).expect("length matches");
    f.zero_boundary(macro_mesh);
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::l2_norm_squared;

    #[test]
    fn increments_have_the_right_moments() {
        let mut rng = PathRng::increments(7, 0);
        let tau = 1e-3;
        let n = 100_000;
        let xs = wiener_increments(&mut rng, tau, n).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se_mean = (tau / n as f64).sqrt();
        assert!(mean.abs() < 4.0 * se_mean);
        // Var of the sample variance of a normal is 2τ²/(n−1)
        let se_var = (2.0 * tau * tau / (n - 1) as f64).sqrt();
        assert!((var - tau).abs() < 4.0 * se_var);
        assert!(wiener_increments(&mut rng, 0.0, 1).is_err());
    }

    #[test]
    fn increments_are_uncorrelated_across_steps() {
        let mut rng = PathRng::increments(3, 1);
        let n = 100_000;
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let a = wiener_increments(&mut rng, 1.0, 1).unwrap()[0];
                let b = wiener_increments(&mut rng, 1.0, 1).unwrap()[0];
                (a, b)
            })
            .collect();
        let corr = pairs.iter().map(|(a, b)| a * b).sum::<f64>() / n as f64;
        assert!(corr.abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, path| {
            let mut r = PathRng::increments(seed, path);
            wiener_increments(&mut r, 1.0, 5).unwrap()
        };
        assert_eq!(draw(42, 0), draw(42, 0));
        assert_ne!(draw(42, 0), draw(42, 1));
        assert_ne!(draw(42, 0), draw(43, 0));
        let mut p = PathRng::perturbation(42, 0);
        assert_ne!(p.standard_normal(), draw(42, 0)[0]);
    }

    #[test]
    fn sine_mode_values() {
        let m = SineProduct { k: 4.0 };
        assert!(m.value(0.0, 0.5, 0.5).abs() < 1e-14);
        assert!((m.value(0.0, 0.125, 0.125) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sigma_h_interpolates_on_macro() {
        let macro_mesh = Mesh::macro_mesh(8).unwrap();
        let fine = macro_mesh.refine(&[0, 1, 2, 3, 10]);
        let model = NoiseModel::preset(NoisePreset::Sines, 0.25);
        let s = sigma_h(&model, &macro_mesh, &fine, 0.0).unwrap();
        assert_eq!(s.len(), 2);
        for (v, p) in fine.vertices().iter().enumerate() {
            if fine.is_boundary_vertex(v) {
                assert!(s[0].values()[v].abs() < 1e-12);
            }
            if (p[0] - 0.125).abs() < 1e-15 && (p[1] - 0.125).abs() < 1e-15 {
                assert!((s[0].values()[v] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn interpolation_error_is_second_order() {
        use crate::quadrature::{to_cartesian, DEGREE4};
        let mode = SineProduct { k: 4.0 };
        let mut gaps = Vec::new();
        for n in [8, 16, 32] {
            let mesh = Mesh::macro_mesh(n).unwrap();
            let f = FeFunction::interpolate(&mesh, |x, y| mode.value(0.0, x, y));
            let mut exact = 0.0;
            for t in 0..mesh.num_triangles() {
                let c = mesh.corners(t);
                let area = mesh.geometry().triangles[t].area;
                for (b, w) in DEGREE4 {
                    let [x, y] = to_cartesian(&c, b);
                    exact += area * w * mode.value(0.0, x, y).powi(2);
                }
            }
            let approx = l2_norm_squared(&mesh, &f).unwrap();
            gaps.push(((approx.sqrt() - exact.sqrt()) / exact.sqrt()).abs());
        }
        // halving h shrinks the gap by roughly four
        assert!(gaps[1] < gaps[0] / 3.0 && gaps[2] < gaps[1] / 3.0, "{gaps:?}");
    }

    #[test]
    fn accumulation() {
        let mesh = Mesh::macro_mesh(4).unwrap();
        let model = NoiseModel::preset(NoisePreset::Sines, 1.0);
        let modes = sigma_h(&model, &mesh, &mesh, 0.0).unwrap();
        let zero = FeFunction::zeros(&mesh);
        let same = accumulate_sigma(&zero, 1.0, &modes, &[0.0, 0.0]).unwrap();
        assert_eq!(same, zero);
        let one = accumulate_sigma(&zero, 1.0, &modes[..1], &[1.0]).unwrap();
        assert_eq!(one.values(), modes[0].values());
    }

    #[test]
    fn perturbation_bounds_and_mean() {
        let mesh = Mesh::macro_mesh(4).unwrap();
        let mut rng = PathRng::perturbation(1, 0);
        let xi = g_perturbation(&mut rng, &mesh, 0.1);
        assert!(xi.values().iter().all(|v| v.abs() <= 0.1));
        for v in 0..mesh.num_vertices() {
            if mesh.is_boundary_vertex(v) {
                assert_eq!(xi.values()[v], 0.0);
            }
        }
        let mut again = PathRng::perturbation(1, 0);
        assert_eq!(g_perturbation(&mut again, &mesh, 0.1), xi);

        // nodal mean over many draws at an interior node
        let interior = (0..mesh.num_vertices()).find(|&v| !mesh.is_boundary_vertex(v)).unwrap();
        let draws = 10_000;
        let mean: f64 = (0..draws)
            .map(|p| g_perturbation(&mut PathRng::perturbation(5, p), &mesh, 0.1).values()[interior])
            .sum::<f64>()
            / draws as f64;
        let se = 0.1 / 3f64.sqrt() / (draws as f64).sqrt();
        assert!(mean.abs() < 4.0 * se);
    }
}
