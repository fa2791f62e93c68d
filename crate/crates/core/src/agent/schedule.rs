use rand::Rng;

use crate::error::{Error, Result};
use crate::policy::validate_epsilon;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchPeriod {
    Episode,
    Step,
}

/// Behavior-policy exploration schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsilonSchedule {
    /// Linear interpolation from `start` to `end` over `decay_steps` global steps.
    LinearDecay {
        start: f64,
        end: f64,
        decay_steps: u64,
    },
    /// Redraws ε from `values` with probabilities `probs` at every switch.
    SwitchingRandom {
        values: Vec<f64>,
        probs: Vec<f64>,
        switch_period: SwitchPeriod,
    },
}

impl Default for EpsilonSchedule {
    /// ε ∈ {0.5, 0.1, 0.01} with probabilities {0.3, 0.4, 0.3}, redrawn per episode.
    fn default() -> Self {
        EpsilonSchedule::SwitchingRandom {
            values: vec![0.5, 0.1, 0.01],
            probs: vec![0.3, 0.4, 0.3],
            switch_period: SwitchPeriod::Episode,
        }
    }
}

impl EpsilonSchedule {
    pub fn constant(epsilon: f64) -> Self {
        EpsilonSchedule::LinearDecay {
            start: epsilon,
            end: epsilon,
            decay_steps: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EpsilonSchedule::LinearDecay {
                start,
                end,
                decay_steps,
            } => {
                validate_epsilon(*start)?;
                validate_epsilon(*end)?;
                if *decay_steps == 0 {
                    return Err(Error::domain("decay_steps must be positive"));
                }
            }
            EpsilonSchedule::SwitchingRandom { values, probs, .. } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::invalid(
                        "switching schedule needs matching, nonempty values and probs",
                    ));
                }
                for v in values {
                    validate_epsilon(*v)?;
                }
                if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::invalid("switching probabilities must be >= 0"));
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!(
                        "switching probabilities sum to {sum}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> ScheduleState {
        let mut s = ScheduleState {
            schedule: self.clone(),
            current: 0.0,
        };
        s.redraw(rng, 0);
        s
    }
}

/// Running schedule: holds the ε currently in force.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    schedule: EpsilonSchedule,
    current: f64,
}

impl ScheduleState {
    pub fn epsilon(&self) -> f64 {
        self.current
    }

    fn redraw<R: Rng + ?Sized>(&mut self, rng: &mut R, global_step: u64) {
        self.current = match &self.schedule {
            EpsilonSchedule::LinearDecay {
                start,
                end,
                decay_steps,
            } => {
                if global_step >= *decay_steps {
                    *end
                } else {
                    start + (end - start) * (global_step as f64 / *decay_steps as f64)
                }
            }
            EpsilonSchedule::SwitchingRandom { values, probs, .. } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = values.len() - 1;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                values[pick]
            }
        };
    }

    pub fn on_episode_start<R: Rng + ?Sized>(&mut self, rng: &mut R, global_step: u64) {
        match &self.schedule {
            EpsilonSchedule::SwitchingRandom {
                switch_period: SwitchPeriod::Step,
                ..
            } => {}
            _ => self.redraw(rng, global_step),
        }
    }

    /// Called before acting at `global_step`.
    pub fn on_step<R: Rng + ?Sized>(&mut self, rng: &mut R, global_step: u64) {
        match &self.schedule {
            EpsilonSchedule::LinearDecay { .. }
            | EpsilonSchedule::SwitchingRandom {
                switch_period: SwitchPeriod::Step,
                ..
            } => self.redraw(rng, global_step),
            _ => {}
        }
    }
}
