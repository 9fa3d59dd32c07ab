//! Run configuration. Every key is optional in the TOML file; missing keys
//! fall back to the reference experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adapt::Tolerances;
use crate::error::{Error, Result};
use crate::noise::NoisePreset;
use crate::solver::{SchemeVariant, StepParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Si,
    Fix3,
    Fix,
}

/// The data `g` before perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataPreset {
    /// Indicator of the disc of radius 0.25 centred at (0.5, 0.5).
    Circle,
    Zero,
}

pub const CIRCLE_CENTER: [f64; 2] = [0.5, 0.5];
pub const CIRCLE_RADIUS: f64 = 0.25;

impl DataPreset {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            DataPreset::Circle => {
                if (x - CIRCLE_CENTER[0]).hypot(y - CIRCLE_CENTER[1]) <= CIRCLE_RADIUS {
                    1.0
                } else {
                    0.0
                }
            }
            DataPreset::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub final_time: f64,
    pub lambda: f64,
    pub epsilon: f64,
    /// Noise amplitude σ̃.
    pub sigma: f64,
    pub tau0: f64,
    /// Squares per side of the macro mesh.
    pub macro_n: usize,
    /// Selects `TOL_k`; ignored when both explicit tolerances are given.
    pub tol_level: u32,
    pub tol_space: Option<f64>,
    pub tol_time: Option<f64>,
    pub scheme: Scheme,
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    pub cg_tol: f64,
    pub paths: usize,
    pub seed: u64,
    pub snapshot_times: Vec<f64>,
    pub output_dir: PathBuf,
    /// Spatial refinement/coarsening.
    pub adapt_mesh: bool,
    /// Time-step control; off means a constant step `tau0`.
    pub adapt_time: bool,
    pub noise: NoisePreset,
    pub data: DataPreset,
    /// Amplitude of the nodal data perturbation.
    pub perturbation: f64,
    pub tau_min: f64,
    /// Defaults to `final_time / 10`.
    pub tau_max: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            final_time: 0.05,
            lambda: 200.0,
            epsilon: 1.0 / 32.0,
            sigma: 0.25,
            tau0: 1e-5,
            macro_n: 32,
            tol_level: 0,
            tol_space: None,
            tol_time: None,
            scheme: Scheme::Fix,
            fp_tol: 1e-4,
            fp_max_iters: 30,
            cg_tol: 1e-10,
            paths: 10,
            seed: 42,
            snapshot_times: vec![0.0, 0.0017, 0.0026, 0.0038, 0.05],
            output_dir: PathBuf::from("out"),
            adapt_mesh: true,
            adapt_time: true,
            noise: NoisePreset::Sines,
            data: DataPreset::Circle,
            perturbation: 0.1,
            tau_min: 1e-8,
            tau_max: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("final_time", self.final_time),
            ("epsilon", self.epsilon),
            ("tau0", self.tau0),
            ("fp_tol", self.fp_tol),
            ("cg_tol", self.cg_tol),
            ("tau_min", self.tau_min),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("lambda", self.lambda), ("sigma", self.sigma), ("perturbation", self.perturbation)] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.macro_n == 0 {
            return Err(Error::Config("macro_n must be at least 1".into()));
        }
        if self.paths == 0 {
            return Err(Error::Config("paths must be at least 1".into()));
        }
        if self.fp_max_iters == 0 {
            return Err(Error::Config("fp_max_iters must be at least 1".into()));
        }
        for (name, v) in [("tol_space", self.tol_space), ("tol_time", self.tol_time), ("tau_max", self.tau_max)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.tau_max() < self.tau_min {
            return Err(Error::Config("tau_max is below tau_min".into()));
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        let level = Tolerances::level(self.tol_level);
        Tolerances {
            space: self.tol_space.unwrap_or(level.space),
            time: self.tol_time.unwrap_or(level.time),
        }
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max.unwrap_or(self.final_time / 10.0)
    }

    pub fn variant(&self) -> SchemeVariant {
        match self.scheme {
            Scheme::Si => SchemeVariant::Si,
            Scheme::Fix3 => SchemeVariant::Fix3,
            Scheme::Fix => SchemeVariant::Fix { tol: self.fp_tol },
        }
    }

    pub fn step_params(&self) -> StepParams {
        StepParams {
            eps: self.epsilon,
            lambda: self.lambda,
            variant: self.variant(),
            cg_tol: self.cg_tol,
            max_fp_iters: self.fp_max_iters,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_experiment() {
        let c = RunConfig::default();
        assert_eq!(c.final_time, 0.05);
        assert_eq!(c.lambda, 200.0);
        assert_eq!(c.tau0, 1e-5);
        assert_eq!(c.epsilon, 0.5f64.powi(5));
        assert_eq!(c.sigma, 0.25);
        assert_eq!(c.macro_n, 32);
        assert_eq!(c.fp_tol, 1e-4);
        assert_eq!(c.tolerances(), Tolerances { space: 2.0, time: 0.25 });
        assert_eq!(RunConfig::from_toml_str("").unwrap(), c);
    }

    #[test]
    fn round_trip() {
        let c = RunConfig {
            scheme: Scheme::Fix3,
            tol_time: Some(0.1),
            noise: NoisePreset::None,
            ..RunConfig::default()
        };
        let s = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&s).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml_str("epsilon = -1.0").is_err());
        assert!(RunConfig::from_toml_str("paths = 0").is_err());
        assert!(RunConfig::from_toml_str("no_such_key = 1").is_err());
        assert!(RunConfig::from_toml_str("scheme = \"newton\"").is_err());
    }

    #[test]
    fn circle_data() {
        assert_eq!(DataPreset::Circle.eval(0.5, 0.5), 1.0);
        assert_eq!(DataPreset::Circle.eval(0.5, 0.76), 0.0);
        assert_eq!(DataPreset::Circle.eval(0.0, 0.0), 0.0);
    }
}
