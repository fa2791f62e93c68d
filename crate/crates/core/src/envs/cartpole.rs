use rand::{Rng, RngCore};

use super::{EnvSpec, Environment, EpisodeClock, ObservationKind, StepResult};
use crate::error::Result;
use crate::State;

const GRAVITY: f64 = 9.8;
const CART_MASS: f64 = 1.0;
const POLE_MASS: f64 = 0.1;
const TOTAL_MASS: f64 = CART_MASS + POLE_MASS;
const HALF_LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = POLE_MASS * HALF_LENGTH;
const FORCE: f64 = 10.0;
const TAU: f64 = 0.02;
const X_LIMIT: f64 = 2.4;
const THETA_LIMIT: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;

/// Classic cart-pole with explicit Euler integration.
///
/// State is `(x, ẋ, θ, θ̇)`; action 0 pushes left, 1 pushes right. Every
/// step pays +1, including the one on which the pole falls.
#[derive(Debug, Clone)]
pub struct CartPole {
    spec: EnvSpec,
    state: [f64; 4],
    clock: EpisodeClock,
}

impl CartPole {
    pub fn with_horizon(name: &'static str, max_episode_steps: usize) -> Self {
        Self {
            spec: EnvSpec {
                name,
                observation: ObservationKind::Continuous { dim: 4 },
                num_actions: 2,
                max_episode_steps,
            },
            state: [0.0; 4],
            clock: EpisodeClock::new(),
        }
    }

    pub fn v1() -> Self {
        Self::with_horizon("cartpole-v1", 500)
    }

    pub fn v2() -> Self {
        Self::with_horizon("cartpole-v2", 1000)
    }

    /// Places the system in an arbitrary state and starts an episode there.
    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.clock.start();
    }
}

impl Environment for CartPole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> State {
        for v in &mut self.state {
            *v = rng.gen_range(-0.05..=0.05);
        }
        self.clock.start();
        State::Continuous(self.state.to_vec())
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.begin_step(&self.spec, action)?;
        let [x, x_dot, theta, theta_dot] = self.state;
        let force = if action == 1 { FORCE } else { -FORCE };
        let (sin, cos) = theta.sin_cos();
        let temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin - cos * temp)
            / (HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos / TOTAL_MASS;
        self.state = [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ];
        let terminal = self.state[0].abs() > X_LIMIT || self.state[2].abs() > THETA_LIMIT;
        let truncated = self.clock.finish_step(&self.spec, terminal);
        Ok(StepResult {
            next_state: State::Continuous(self.state.to_vec()),
            reward: 1.0,
            terminal,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::rng::{stream, Stream};

    #[test]
    fn reset_is_seeded_and_small() {
        let mut env = CartPole::v1();
        let a = env.reset(&mut stream(4, Stream::Environment));
        let b = env.reset(&mut stream(4, Stream::Environment));
        assert_eq!(a, b);
        assert!(a.as_features().unwrap().iter().all(|v| v.abs() <= 0.05));
    }

    #[test]
    fn upright_step_pays_one() {
        let mut env = CartPole::v1();
        env.set_state([0.0, 0.0, 0.01, 0.0]);
        for action in [0, 1] {
            let r = env.step(action).unwrap();
            assert_eq!(r.reward, 1.0);
            assert!(!r.terminal && !r.truncated);
        }
    }

    #[test]
    fn one_euler_step_by_hand() {
        let mut env = CartPole::v1();
        env.set_state([0.0, 0.0, 0.0, 0.0]);
        let r = env.step(1).unwrap();
        let s = r.next_state.as_features().unwrap().to_vec();
        // θ = 0: temp = 10/1.1, θ̈ = −temp / (0.5·(4/3 − 0.1/1.1)), ẍ = temp − 0.05·θ̈/1.1.
        let temp = 10.0 / 1.1;
        let theta_acc = -temp / (0.5 * (4.0 / 3.0 - 0.1 / 1.1));
        let x_acc = temp - 0.05 * theta_acc / 1.1;
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 0.02 * x_acc).abs() < 1e-15);
        assert_eq!(s[2], 0.0);
        assert!((s[3] - 0.02 * theta_acc).abs() < 1e-15);
    }

    #[test]
    fn falling_pole_terminates_and_blocks_further_steps() {
        let mut env = CartPole::v1();
        env.set_state([0.0, 0.0, 0.2, 1.0]);
        let r = env.step(0).unwrap();
        assert!(r.terminal);
        assert!(matches!(env.step(0), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn horizon_truncates_without_terminal() {
        let mut env = CartPole::with_horizon("short", 3);
        env.set_state([0.0; 4]);
        let mut last = None;
        for i in 0..3 {
            let r = env.step(i % 2).unwrap();
            last = Some(r);
        }
        let r = last.unwrap();
        assert!(r.truncated && !r.terminal);
        assert!(env.step(0).is_err());
    }
}
