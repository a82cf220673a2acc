//! Experiment configuration: JSON file values overlaid by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use modneat::env::{EnvKind, EnvSpec};
use modneat::map_elites::MapElitesConfig;
use modneat::neat::NeatConfig;
use modneat::objectives::QImportanceConfig;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Importances swept when none are given.
pub const DEFAULT_SWEEP: [f64; 6] = [0.0, 0.1, 0.125, 0.15, 0.175, 0.2];

/// Every field optional; absent values fall back to defaults on resolve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub env: Option<String>,
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub runs: Option<usize>,
    pub master_seed: Option<u64>,
    pub q_importance: Option<Vec<f64>>,
    pub episodes_per_eval: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub parallel_runs: Option<bool>,
    /// Reward clamp `(a, b)` of the modularity bonus.
    pub fitness_bounds: Option<(f64, f64)>,
    pub map_elites: Option<MapElitesFile>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapElitesFile {
    pub batch_size: Option<usize>,
    pub mutation_probability: Option<f64>,
    pub crossover_probability: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| LabError::format(path, e))
    }

    /// Values set in `over` replace those in `self`.
    pub fn overlay(self, over: ConfigFile) -> Self {
        Self {
            env: over.env.or(self.env),
            population_size: over.population_size.or(self.population_size),
            generations: over.generations.or(self.generations),
            runs: over.runs.or(self.runs),
            master_seed: over.master_seed.or(self.master_seed),
            q_importance: over.q_importance.or(self.q_importance),
            episodes_per_eval: over.episodes_per_eval.or(self.episodes_per_eval),
            output_dir: over.output_dir.or(self.output_dir),
            workers: over.workers.or(self.workers),
            parallel_runs: over.parallel_runs.or(self.parallel_runs),
            fitness_bounds: over.fitness_bounds.or(self.fitness_bounds),
            map_elites: over.map_elites.or(self.map_elites),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Evolve,
    Sweep,
    MapElites,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub population_size: usize,
    pub generations: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub q_importance: Vec<f64>,
    pub episodes_per_eval: usize,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub parallel_runs: bool,
    pub fitness_bounds: (f64, f64),
    pub batch_size: usize,
    pub mutation_probability: f64,
    pub crossover_probability: f64,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl ExperimentConfig {
    /// Fills defaults for `mode` and validates.
    pub fn resolve(file: ConfigFile, mode: Mode) -> Result<Self> {
        let env_name = file.env.as_deref().unwrap_or("lunar-lander-lite");
        let env = EnvKind::from_name(env_name)
            .ok_or_else(|| LabError::Config(format!("unknown environment '{env_name}'")))?;
        let spec = env.spec();
        let (default_pop, default_gens) = match (mode, env) {
            (Mode::MapElites, _) => (100, 2000),
            (_, EnvKind::Acrobot) => (150, 150),
            (_, EnvKind::LunarLanderLite) => (150, 200),
        };
        let q_importance = match (file.q_importance, mode) {
            (Some(list), _) => list,
            (None, Mode::Sweep) => DEFAULT_SWEEP.to_vec(),
            (None, _) => vec![0.0],
        };
        let me = file.map_elites.unwrap_or_default();
        let cfg = Self {
            env,
            population_size: file.population_size.unwrap_or(default_pop),
            generations: file.generations.unwrap_or(default_gens),
            runs: file.runs.unwrap_or(5),
            master_seed: file.master_seed.unwrap_or(0),
            q_importance,
            episodes_per_eval: file.episodes_per_eval.unwrap_or(spec.episodes_per_eval),
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            workers: file.workers.unwrap_or_else(default_workers),
            parallel_runs: file.parallel_runs.unwrap_or(false),
            fitness_bounds: file.fitness_bounds.unwrap_or((0.0, 300.0)),
            batch_size: me.batch_size.unwrap_or(12),
            mutation_probability: me.mutation_probability.unwrap_or(0.75),
            crossover_probability: me.crossover_probability.unwrap_or(0.3),
        };
        cfg.validate(mode)?;
        Ok(cfg)
    }

    fn validate(&self, mode: Mode) -> Result<()> {
        let fail = |m: &str| Err(LabError::Config(m.to_string()));
        if self.runs == 0 {
            return fail("runs must be at least 1");
        }
        if self.generations == 0 && mode != Mode::MapElites {
            return fail("generations must be at least 1");
        }
        if self.episodes_per_eval == 0 {
            return fail("episodes_per_eval must be at least 1");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if self.q_importance.is_empty() {
            return fail("q_importance list is empty");
        }
        if self.q_importance.iter().any(|i| !(*i >= 0.0) || !i.is_finite()) {
            return fail("importances must be finite and non-negative");
        }
        if mode == Mode::Evolve && self.q_importance.len() != 1 {
            return fail("evolve takes a single importance; use sweep for a list");
        }
        let (a, b) = self.fitness_bounds;
        if !(a <= b) {
            return fail("fitness bounds must satisfy a <= b");
        }
        if mode == Mode::MapElites && self.env.spec().actuator_count < 2 {
            return Err(LabError::Config(format!(
                "map-elites needs at least two actuators; {} has {}",
                self.env.name(),
                self.env.spec().actuator_count
            )));
        }
        let min_pop = if mode == Mode::MapElites { 1 } else { 2 };
        if self.population_size < min_pop {
            return fail("population too small");
        }
        Ok(())
    }

    pub fn env_spec(&self) -> EnvSpec {
        EnvSpec {
            episodes_per_eval: self.episodes_per_eval,
            ..self.env.spec()
        }
    }

    pub fn neat_config(&self) -> NeatConfig {
        let spec = self.env_spec();
        NeatConfig::new(spec.obs_dim, spec.output_count, self.population_size, !spec.is_recurrent())
    }

    pub fn importance(&self, importance: f64) -> Result<QImportanceConfig> {
        Ok(QImportanceConfig::new(importance, self.fitness_bounds.0, self.fitness_bounds.1)?)
    }

    pub fn map_elites_config(&self) -> MapElitesConfig {
        let mut cfg = MapElitesConfig::new(self.neat_config());
        cfg.initial_population = self.population_size;
        cfg.generations = self.generations;
        cfg.batch_size = self.batch_size;
        cfg.mutation_probability = self.mutation_probability;
        cfg.crossover_probability = self.crossover_probability;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_per_env() {
        let acro = ConfigFile {
            env: Some("acrobot".into()),
            ..Default::default()
        };
        let c = ExperimentConfig::resolve(acro, Mode::Evolve).unwrap();
        assert_eq!((c.generations, c.episodes_per_eval), (150, 20));
        let c = ExperimentConfig::resolve(ConfigFile::default(), Mode::Evolve).unwrap();
        assert_eq!((c.env, c.generations, c.episodes_per_eval), (EnvKind::LunarLanderLite, 200, 10));
        let c = ExperimentConfig::resolve(ConfigFile::default(), Mode::Sweep).unwrap();
        assert_eq!(c.q_importance, DEFAULT_SWEEP.to_vec());
    }

    #[test]
    fn overlay_prefers_flags() {
        let file: ConfigFile =
            serde_json::from_str(r#"{"env": "acrobot", "runs": 3, "master_seed": 9}"#).unwrap();
        let flags = ConfigFile {
            runs: Some(7),
            ..Default::default()
        };
        let c = ExperimentConfig::resolve(file.overlay(flags), Mode::Evolve).unwrap();
        assert_eq!((c.env, c.runs, c.master_seed), (EnvKind::Acrobot, 7, 9));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let bad = [
            r#"{"runs": 0}"#,
            r#"{"q_importance": [-0.1]}"#,
            r#"{"env": "pong"}"#,
            r#"{"episodes_per_eval": 0}"#,
        ];
        for text in bad {
            let file: ConfigFile = serde_json::from_str(text).unwrap();
            let err = ExperimentConfig::resolve(file, Mode::Sweep).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
        assert!(serde_json::from_str::<ConfigFile>(r#"{"popsize": 3}"#).is_err());
    }

    #[test]
    fn map_elites_rejects_single_actuator() {
        let file = ConfigFile {
            env: Some("acrobot".into()),
            ..Default::default()
        };
        assert!(matches!(
            ExperimentConfig::resolve(file, Mode::MapElites),
            Err(LabError::Config(_))
        ));
    }
}
