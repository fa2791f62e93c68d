use super::schedule::EpsilonSchedule;
use crate::envs::{EnvKind, ObservationKind, StateEncoder};
use crate::error::{Error, Result};
use crate::policy::{validate_epsilon, MeasurementKind};
use crate::qfunc::MlpQ;
use crate::returns::{Algorithm, TraceStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approximator {
    Tabular,
    Mlp { hidden: usize },
}

/// Everything a single trial needs besides its seed.
///
/// [`AgentConfig::for_env`] fills in per-task defaults:
///
/// | task | Q | lr | batch | F | epoch steps | budget |
/// |------|---|----|-------|---|-------------|--------|
/// | CartPole v1/v2 | MLP(64) | 1e-3 | 32 | 500 | 2000 | 100 000 steps |
/// | Mountain Car | 40×40 grid table | 0.1 | 16 | 100 | 2000 | 300 000 steps |
/// | Cliff Walking | table | 0.1 | 16 | 100 | 1000 | 500 episodes |
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub env: EnvKind,
    pub strategy: TraceStrategy,
    pub gamma: f64,
    /// Segment length k.
    pub segment_len: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Target sync period F, in environment steps.
    pub sync_period: u64,
    /// Episode budget M.
    pub episodes: Option<usize>,
    /// Environment-step budget.
    pub total_steps: Option<u64>,
    /// Per-episode horizon T; `None` keeps the environment's own.
    pub max_episode_steps: Option<usize>,
    pub epoch_steps: u64,
    /// ε of the target policy π.
    pub epsilon_pi: f64,
    /// Steps collected before the first learner update.
    pub warmup: u64,
    pub capacity: usize,
    pub schedule: EpsilonSchedule,
    pub approximator: Approximator,
    pub grid_bins: usize,
    /// Measurement logged on segment heads for every strategy (QM uses its own).
    pub diagnostic_measurement: MeasurementKind,
    /// Greedy evaluation episodes run at the end of every epoch.
    pub eval_episodes: usize,
    /// Store the acting-time Q row on every transition.
    pub debug_store_q: bool,
}

impl AgentConfig {
    pub fn for_env(env: EnvKind, strategy: TraceStrategy) -> Self {
        let mut c = AgentConfig {
            env,
            strategy,
            gamma: 0.99,
            segment_len: 10,
            batch_size: 16,
            learning_rate: 0.1,
            sync_period: 100,
            episodes: None,
            total_steps: None,
            max_episode_steps: None,
            epoch_steps: 2000,
            epsilon_pi: 0.01,
            warmup: 1000,
            capacity: 50_000,
            schedule: EpsilonSchedule::default(),
            approximator: Approximator::Tabular,
            grid_bins: 40,
            diagnostic_measurement: strategy.measurement().unwrap_or(MeasurementKind::Beta),
            eval_episodes: 5,
            debug_store_q: false,
        };
        match env {
            EnvKind::CartPoleV1 | EnvKind::CartPoleV2 => {
                c.approximator = Approximator::Mlp {
                    hidden: MlpQ::DEFAULT_HIDDEN,
                };
                c.learning_rate = 1e-3;
                c.batch_size = 32;
                c.sync_period = 500;
                c.total_steps = Some(100_000);
            }
            EnvKind::MountainCar => {
                c.total_steps = Some(300_000);
            }
            EnvKind::CliffWalking => {
                c.episodes = Some(500);
                c.epoch_steps = 1000;
                c.warmup = 100;
                c.eval_episodes = 1;
            }
        }
        c
    }

    /// One-step DQN: Watkins bootstrap with λ = 0, so every trace vanishes.
    pub fn dqn_strategy() -> TraceStrategy {
        TraceStrategy::base(Algorithm::WatkinsQ, 0.0).expect("λ = 0 is valid")
    }

    pub fn horizon(&self) -> usize {
        self.max_episode_steps
            .unwrap_or_else(|| self.env.spec().max_episode_steps)
    }

    /// Observation encoder implied by the task and approximator.
    pub fn encoder(&self) -> StateEncoder {
        match (self.env, self.approximator) {
            (EnvKind::MountainCar, Approximator::Tabular) => {
                StateEncoder::mountain_car_grid(self.grid_bins)
            }
            (EnvKind::MountainCar, Approximator::Mlp { .. }) => StateEncoder::mountain_car_minmax(),
            (EnvKind::CliffWalking, Approximator::Mlp { .. }) => StateEncoder::OneHot {
                size: match self.env.spec().observation {
                    ObservationKind::Discrete { num_states } => num_states,
                    ObservationKind::Continuous { dim } => dim,
                },
            },
            _ => StateEncoder::Identity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::domain(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        validate_epsilon(self.epsilon_pi)?;
        self.schedule.validate()?;
        let positive = [
            ("segment_length", self.segment_len as u64),
            ("batch_size", self.batch_size as u64),
            ("sync_period", self.sync_period),
            ("epoch_steps", self.epoch_steps),
            ("capacity", self.capacity as u64),
            ("grid_bins", self.grid_bins as u64),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::domain(format!("{name} must be positive")));
            }
        }
        if let Approximator::Mlp { hidden: 0 } = self.approximator {
            return Err(Error::domain("hidden must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::domain("learning_rate must be finite and >= 0"));
        }
        match (self.episodes, self.total_steps) {
            (None, None) => return Err(Error::invalid("set episodes or total_steps")),
            (Some(0), _) | (_, Some(0)) => {
                return Err(Error::domain("episode and step budgets must be positive"))
            }
            _ => {}
        }
        if self.max_episode_steps == Some(0) {
            return Err(Error::domain("max_episode_steps must be positive"));
        }
        if (self.horizon() as u64) > self.epoch_steps {
            return Err(Error::invalid(format!(
                "epoch_steps {} must be at least the episode horizon {}",
                self.epoch_steps,
                self.horizon()
            )));
        }
        self.encoder().output_kind(self.env.spec().observation)?;
        if self.approximator == Approximator::Tabular {
            if let ObservationKind::Continuous { .. } =
                self.encoder().output_kind(self.env.spec().observation)?
            {
                return Err(Error::invalid(format!(
                    "{} has continuous observations; use approximator = mlp",
                    self.env.name()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::MeasurementKind;

    fn retrace() -> TraceStrategy {
        TraceStrategy::base(Algorithm::Retrace, 0.9).unwrap()
    }

    #[test]
    fn defaults_validate_for_every_task() {
        for env in EnvKind::ALL {
            AgentConfig::for_env(env, retrace()).validate().unwrap();
        }
    }

    #[test]
    fn qm_measurement_becomes_diagnostic() {
        let s = TraceStrategy::qm(Algorithm::Retrace, MeasurementKind::Eta, 0.9).unwrap();
        let c = AgentConfig::for_env(EnvKind::CliffWalking, s);
        assert_eq!(c.diagnostic_measurement, MeasurementKind::Eta);
    }

    #[test]
    fn rejects_bad_values() {
        let base = AgentConfig::for_env(EnvKind::CliffWalking, retrace());
        let mut c = base.clone();
        c.gamma = 1.1;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.epsilon_pi = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.episodes = None;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.epoch_steps = 10;
        assert!(c.validate().is_err());
        let mut c = AgentConfig::for_env(EnvKind::CartPoleV1, retrace());
        c.approximator = Approximator::Tabular;
        assert!(c.validate().is_err());
    }
}
