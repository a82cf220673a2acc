//! Control tasks, episode execution and actuation accounting.

pub mod acrobot;
pub mod lander;

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::neat::Genome;
use crate::phenotype::{Network, NetworkError};
use crate::seed::derive_seed;

use acrobot::{AcrobotState, TORQUES};
use lander::{FuelCosts, LanderState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("simulation produced a non-finite state")]
    NonFinite,
    #[error("network has {inputs} inputs / {outputs} outputs, task needs {obs_dim} / {expected_outputs}")]
    Arity {
        inputs: usize,
        outputs: usize,
        obs_dim: usize,
        expected_outputs: usize,
    },
    #[error("at least one episode is required")]
    NoEpisodes,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnvKind {
    Acrobot,
    LunarLanderLite,
}

impl EnvKind {
    pub const ALL: [EnvKind; 2] = [EnvKind::Acrobot, EnvKind::LunarLanderLite];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Acrobot => "acrobot",
            EnvKind::LunarLanderLite => "lunar-lander-lite",
        }
    }

    /// Accepts the canonical name or the short alias `lander`.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "acrobot" => Some(EnvKind::Acrobot),
            "lunar-lander-lite" | "lander" => Some(EnvKind::LunarLanderLite),
            _ => None,
        }
    }

    pub fn spec(self) -> EnvSpec {
        match self {
            EnvKind::Acrobot => EnvSpec {
                kind: self,
                obs_dim: 6,
                output_count: 3,
                actuator_count: 1,
                episode_limit: acrobot::STEP_LIMIT,
                network_kind: NetworkKind::Recurrent,
                episodes_per_eval: 20,
                fuel_costs: FuelCosts::default(),
            },
            EnvKind::LunarLanderLite => EnvSpec {
                kind: self,
                obs_dim: 8,
                output_count: 2,
                actuator_count: 2,
                episode_limit: lander::STEP_LIMIT,
                network_kind: NetworkKind::FeedForward,
                episodes_per_eval: 10,
                fuel_costs: FuelCosts::default(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkKind {
    FeedForward,
    Recurrent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub obs_dim: usize,
    /// Network output nodes; the acrobot decodes 3 outputs to one torque.
    pub output_count: usize,
    pub actuator_count: usize,
    pub episode_limit: usize,
    pub network_kind: NetworkKind,
    pub episodes_per_eval: usize,
    /// Lander fuel penalties; ignored by the acrobot.
    pub fuel_costs: FuelCosts,
}

impl EnvSpec {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn is_recurrent(&self) -> bool {
        self.network_kind == NetworkKind::Recurrent
    }

    pub fn build_network(&self, genome: &Genome) -> Result<Network, EnvError> {
        let net = Network::build(genome, self.is_recurrent())?;
        self.check_arity(&net)?;
        Ok(net)
    }

    fn check_arity(&self, net: &Network) -> Result<(), EnvError> {
        if net.input_count() != self.obs_dim || net.output_count() != self.output_count {
            return Err(EnvError::Arity {
                inputs: net.input_count(),
                outputs: net.output_count(),
                obs_dim: self.obs_dim,
                expected_outputs: self.output_count,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub total_reward: f64,
    pub steps: usize,
    /// Σ|applied actuation| per actuator.
    pub per_output_abs_actuation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub mean_reward: f64,
    pub mean_abs_actuation: Vec<f64>,
    pub episodes: Vec<EpisodeTrace>,
}

/// One control step as seen by an observer of [`run_episode_observed`].
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<'a> {
    pub step: usize,
    /// Observation the network acted on.
    pub observation: &'a [f64],
    /// Action passed to the simulator: torque for the acrobot, raw
    /// `[main, side]` commands for the lander.
    pub action: &'a [f64],
    pub reward: f64,
}

enum Sim {
    Acrobot(AcrobotState),
    Lander(LanderState),
}

impl Sim {
    fn reset(kind: EnvKind, rng: &mut ChaCha8Rng) -> Self {
        match kind {
            EnvKind::Acrobot => {
                let mut u = || rng.gen_range(-0.1..=0.1);
                Sim::Acrobot(AcrobotState {
                    theta1: u(),
                    theta2: u(),
                    dtheta1: u(),
                    dtheta2: u(),
                })
            }
            EnvKind::LunarLanderLite => Sim::Lander(LanderState {
                x: rng.gen_range(-0.3..=0.3),
                y: lander::START_HEIGHT,
                vx: rng.gen_range(-0.1..=0.1),
                vy: rng.gen_range(-0.1..=0.1),
                ..Default::default()
            }),
        }
    }

    fn observe(&self, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Sim::Acrobot(s) => out.extend_from_slice(&s.observation()),
            Sim::Lander(s) => out.extend_from_slice(&s.observation()),
        }
    }
}

/// Runs one episode from a seeded initial state, reporting every step.
pub fn run_episode_observed(
    net: &mut Network,
    spec: &EnvSpec,
    episode_seed: u64,
    mut observer: impl FnMut(StepRecord<'_>),
) -> Result<EpisodeTrace, EnvError> {
    spec.check_arity(net)?;
    net.reset();
    let mut rng = ChaCha8Rng::seed_from_u64(episode_seed);
    let mut sim = Sim::reset(spec.kind, &mut rng);
    let mut obs = Vec::with_capacity(spec.obs_dim);
    let mut actuation = vec![0.0; spec.actuator_count];
    let mut total = 0.0;
    let mut steps = 0;
    while steps < spec.episode_limit {
        sim.observe(&mut obs);
        let outputs = net.activate(&obs)?;
        let (action, reward, done) = match &mut sim {
            Sim::Acrobot(state) => {
                let torque = TORQUES[acrobot::decode_action(&outputs)];
                let step = acrobot::acrobot_step(state, torque)?;
                *state = step.state;
                actuation[0] += libm::fabs(torque);
                (vec![torque], step.reward, step.done)
            }
            Sim::Lander(state) => {
                let command = [outputs[0].clamp(-1.0, 1.0), outputs[1].clamp(-1.0, 1.0)];
                let step = lander::lunar_step(state, command, spec.fuel_costs)?;
                *state = step.state;
                actuation[0] += step.actuation[0];
                actuation[1] += step.actuation[1];
                (command.to_vec(), step.reward, step.done)
            }
        };
        observer(StepRecord {
            step: steps,
            observation: &obs,
            action: &action,
            reward,
        });
        total += reward;
        steps += 1;
        if done {
            break;
        }
    }
    Ok(EpisodeTrace {
        total_reward: total,
        steps,
        per_output_abs_actuation: actuation,
    })
}

pub fn run_episode(net: &mut Network, spec: &EnvSpec, episode_seed: u64) -> Result<EpisodeTrace, EnvError> {
    run_episode_observed(net, spec, episode_seed, |_| {})
}

/// Seed of episode `index` within an evaluation.
pub fn episode_seed(eval_seed: u64, index: usize) -> u64 {
    derive_seed(eval_seed, &[index as u64])
}

/// Builds the network once and averages `n_episodes` seeded episodes.
pub fn evaluate(genome: &Genome, spec: &EnvSpec, n_episodes: usize, eval_seed: u64) -> Result<EvalResult, EnvError> {
    if n_episodes == 0 {
        return Err(EnvError::NoEpisodes);
    }
    let mut net = spec.build_network(genome)?;
    let episodes = (0..n_episodes)
        .map(|i| run_episode(&mut net, spec, episode_seed(eval_seed, i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(episodes))
}

/// Averages reward and per-actuator actuation over episodes.
pub fn summarize(episodes: Vec<EpisodeTrace>) -> EvalResult {
    let n = episodes.len() as f64;
    let width = episodes.first().map_or(0, |e| e.per_output_abs_actuation.len());
    let mut mean_abs_actuation = vec![0.0; width];
    let mut total = 0.0;
    for e in &episodes {
        total += e.total_reward;
        for (m, a) in mean_abs_actuation.iter_mut().zip(&e.per_output_abs_actuation) {
            *m += a;
        }
    }
    mean_abs_actuation.iter_mut().for_each(|m| *m /= n);
    EvalResult {
        mean_reward: total / n,
        mean_abs_actuation,
        episodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neat::{ConnectionGene, NodeGene, NodeKind};

    /// Inputs wired to outputs with zero weights; outputs settle at tanh(bias).
    fn constant_genome(spec: &EnvSpec, biases: &[f64]) -> Genome {
        let ni = spec.obs_dim as u32;
        let nodes = (0..ni)
            .map(|i| NodeGene::new(i, NodeKind::Input, 0.0))
            .chain(
                biases
                    .iter()
                    .enumerate()
                    .map(|(k, &b)| NodeGene::new(ni + k as u32, NodeKind::Output, b)),
            )
            .collect();
        let conns = (0..biases.len() as u32)
            .map(|k| ConnectionGene {
                innovation: k,
                from: 0,
                to: ni + k,
                weight: 0.0,
                enabled: true,
            })
            .collect();
        Genome::new(nodes, conns)
    }

    #[test]
    fn idle_acrobot_runs_to_the_limit() {
        let spec = EnvKind::Acrobot.spec();
        let g = constant_genome(&spec, &[0.0, 1.0, 0.0]);
        let mut net = spec.build_network(&g).unwrap();
        let trace = run_episode(&mut net, &spec, 3).unwrap();
        assert_eq!(trace.per_output_abs_actuation, vec![0.0]);
        assert_eq!(trace.steps, 500);
        assert_eq!(trace.total_reward, -500.0);
    }

    #[test]
    fn episodes_are_reproducible() {
        for kind in EnvKind::ALL {
            let spec = kind.spec();
            let biases = vec![0.3; spec.output_count];
            let g = constant_genome(&spec, &biases);
            let mut net = spec.build_network(&g).unwrap();
            let a = run_episode(&mut net, &spec, 42).unwrap();
            let b = run_episode(&mut net, &spec, 42).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let spec = EnvKind::LunarLanderLite.spec();
        let g = constant_genome(&EnvKind::Acrobot.spec(), &[0.0, 0.0, 0.0]);
        assert!(matches!(spec.build_network(&g), Err(EnvError::Arity { .. })));
    }

    #[test]
    fn single_episode_mean_is_the_episode() {
        let spec = EnvKind::LunarLanderLite.spec();
        let g = constant_genome(&spec, &[0.2, 0.9]);
        let r = evaluate(&g, &spec, 1, 5).unwrap();
        assert_eq!(r.mean_reward, r.episodes[0].total_reward);
        assert_eq!(r.mean_abs_actuation, r.episodes[0].per_output_abs_actuation);
        assert_eq!(evaluate(&g, &spec, 0, 5), Err(EnvError::NoEpisodes));
    }

    #[test]
    fn names_round_trip() {
        for kind in EnvKind::ALL {
            assert_eq!(EnvKind::from_name(kind.name()), Some(kind));
        }
        assert_eq!(EnvKind::from_name("lander"), Some(EnvKind::LunarLanderLite));
        assert_eq!(EnvKind::from_name("bipedal"), None);
    }
}
