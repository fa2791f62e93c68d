//! Episodic environments: CartPole (v1 / v2 horizons), Mountain Car and Cliff Walking.

pub mod cartpole;
pub mod cliff_walking;
mod encode;
pub mod mountain_car;

use rand::RngCore;

pub use cartpole::CartPole;
pub use cliff_walking::CliffWalking;
pub use encode::StateEncoder;
pub use mountain_car::MountainCar;

use crate::error::{Error, Result};
use crate::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationKind {
    Continuous { dim: usize },
    Discrete { num_states: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub observation: ObservationKind,
    pub num_actions: usize,
    pub max_episode_steps: usize,
}

/// Outcome of one step.
///
/// `terminal` means the task itself ended (pole fell, goal reached) and the
/// bootstrap is zero. `truncated` means the horizon cut the episode short;
/// the next state still bootstraps.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: State,
    pub reward: f64,
    pub terminal: bool,
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    fn reset(&mut self, rng: &mut dyn RngCore) -> State;

    /// Errors with a contract violation if the episode already ended or was
    /// never started.
    fn step(&mut self, action: usize) -> Result<StepResult>;
}

/// Shared horizon / finished-episode bookkeeping.
#[derive(Debug, Clone)]
pub(crate) struct EpisodeClock {
    steps: usize,
    active: bool,
}

impl EpisodeClock {
    pub(crate) fn new() -> Self {
        Self {
            steps: 0,
            active: false,
        }
    }

    pub(crate) fn start(&mut self) {
        self.steps = 0;
        self.active = true;
    }

    pub(crate) fn begin_step(&self, spec: &EnvSpec, action: usize) -> Result<()> {
        if !self.active {
            return Err(Error::ContractViolation(format!(
                "{}: step called on a finished or unstarted episode",
                spec.name
            )));
        }
        if action >= spec.num_actions {
            return Err(Error::invalid(format!(
                "{}: action {action} out of range for {} actions",
                spec.name, spec.num_actions
            )));
        }
        Ok(())
    }

    /// Records a completed step and returns whether the horizon truncates it.
    pub(crate) fn finish_step(&mut self, spec: &EnvSpec, terminal: bool) -> bool {
        self.steps += 1;
        let truncated = !terminal && self.steps >= spec.max_episode_steps;
        if terminal || truncated {
            self.active = false;
        }
        truncated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    CartPoleV1,
    CartPoleV2,
    MountainCar,
    CliffWalking,
}

impl EnvKind {
    pub const ALL: [EnvKind; 4] = [
        EnvKind::CartPoleV1,
        EnvKind::CartPoleV2,
        EnvKind::MountainCar,
        EnvKind::CliffWalking,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Some(match key.as_str() {
            "cartpole" | "cartpolev1" => EnvKind::CartPoleV1,
            "cartpolev2" => EnvKind::CartPoleV2,
            "mountaincar" => EnvKind::MountainCar,
            "cliffwalking" | "cliff" => EnvKind::CliffWalking,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::CartPoleV1 => "cartpole-v1",
            EnvKind::CartPoleV2 => "cartpole-v2",
            EnvKind::MountainCar => "mountaincar",
            EnvKind::CliffWalking => "cliffwalking",
        }
    }

    pub fn make(self) -> Box<dyn Environment> {
        match self {
            EnvKind::CartPoleV1 => Box::new(CartPole::v1()),
            EnvKind::CartPoleV2 => Box::new(CartPole::v2()),
            EnvKind::MountainCar => Box::new(MountainCar::new()),
            EnvKind::CliffWalking => Box::new(CliffWalking::new()),
        }
    }

    pub fn spec(self) -> EnvSpec {
        self.make().spec().clone()
    }
}
