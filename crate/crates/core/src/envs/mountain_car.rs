use rand::{Rng, RngCore};

use super::{EnvSpec, Environment, EpisodeClock, ObservationKind, StepResult};
use crate::error::Result;
use crate::State;

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;

/// Under-powered car in a valley; actions push left, coast, push right.
#[derive(Debug, Clone)]
pub struct MountainCar {
    spec: EnvSpec,
    position: f64,
    velocity: f64,
    clock: EpisodeClock,
}

impl Default for MountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl MountainCar {
    pub fn new() -> Self {
        Self::with_horizon(200)
    }

    pub fn with_horizon(max_episode_steps: usize) -> Self {
        Self {
            spec: EnvSpec {
                name: "mountaincar",
                observation: ObservationKind::Continuous { dim: 2 },
                num_actions: 3,
                max_episode_steps,
            },
            position: -0.5,
            velocity: 0.0,
            clock: EpisodeClock::new(),
        }
    }

    pub fn set_state(&mut self, position: f64, velocity: f64) {
        self.position = position;
        self.velocity = velocity;
        self.clock.start();
    }

    fn observe(&self) -> State {
        State::Continuous(vec![self.position, self.velocity])
    }
}

impl Environment for MountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> State {
        self.position = rng.gen_range(-0.6..=-0.4);
        self.velocity = 0.0;
        self.clock.start();
        self.observe()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.begin_step(&self.spec, action)?;
        self.velocity += 0.001 * (action as f64 - 1.0) - 0.0025 * (3.0 * self.position).cos();
        self.velocity = self.velocity.clamp(-MAX_SPEED, MAX_SPEED);
        self.position = (self.position + self.velocity).clamp(MIN_POSITION, MAX_POSITION);
        if self.position == MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0;
        }
        let terminal = self.position >= GOAL_POSITION;
        let truncated = self.clock.finish_step(&self.spec, terminal);
        Ok(StepResult {
            next_state: self.observe(),
            reward: -1.0,
            terminal,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    #[test]
    fn reset_velocity_is_zero() {
        let mut env = MountainCar::new();
        let s = env.reset(&mut stream(1, Stream::Environment));
        let v = s.as_features().unwrap();
        assert_eq!(v[1], 0.0);
        assert!((-0.6..=-0.4).contains(&v[0]));
    }

    #[test]
    fn coasting_from_rest() {
        let mut env = MountainCar::new();
        env.set_state(-0.5, 0.0);
        let r = env.step(1).unwrap();
        let v = r.next_state.as_features().unwrap()[1];
        assert_eq!(v, -0.0025 * (-1.5f64).cos());
        assert!((v + 0.000176843).abs() < 1e-9);
        assert_eq!(r.reward, -1.0);
        assert!(!r.terminal);
    }

    #[test]
    fn left_wall_stops_the_car() {
        let mut env = MountainCar::new();
        env.set_state(-1.19, -0.07);
        let r = env.step(0).unwrap();
        assert_eq!(r.next_state.as_features().unwrap(), &[MIN_POSITION, 0.0]);
    }

    #[test]
    fn reaching_goal_terminates() {
        let mut env = MountainCar::new();
        env.set_state(0.49, 0.05);
        assert!(env.step(2).unwrap().terminal);
    }
}
