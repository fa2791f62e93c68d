use rand::RngCore;

use super::{EnvSpec, Environment, EpisodeClock, ObservationKind, StepResult};
use crate::error::Result;
use crate::State;

pub const ROWS: usize = 4;
pub const COLS: usize = 12;
pub const START: (usize, usize) = (3, 0);
pub const GOAL: (usize, usize) = (3, 11);
pub const CLIFF_PENALTY: f64 = -100.0;

pub const UP: usize = 0;
pub const RIGHT: usize = 1;
pub const DOWN: usize = 2;
pub const LEFT: usize = 3;

/// 4×12 gridworld. Cells `(3, 1..=10)` are the cliff: entering one costs
/// −100 and sends the agent back to the start without ending the episode.
/// Reaching `(3, 11)` ends it. Every other move costs −1; moves into a wall
/// leave the agent in place.
#[derive(Debug, Clone)]
pub struct CliffWalking {
    spec: EnvSpec,
    pos: (usize, usize),
    clock: EpisodeClock,
}

impl Default for CliffWalking {
    fn default() -> Self {
        Self::new()
    }
}

pub fn cell_index(row: usize, col: usize) -> usize {
    row * COLS + col
}

pub fn is_cliff(row: usize, col: usize) -> bool {
    row == 3 && (1..=10).contains(&col)
}

/// Pure transition rule: `(next cell, reward, reached goal)`.
pub fn transition(pos: (usize, usize), action: usize) -> ((usize, usize), f64, bool) {
    let (r, c) = pos;
    let moved = match action {
        UP => (r.saturating_sub(1), c),
        RIGHT => (r, (c + 1).min(COLS - 1)),
        DOWN => ((r + 1).min(ROWS - 1), c),
        _ => (r, c.saturating_sub(1)),
    };
    if is_cliff(moved.0, moved.1) {
        (START, CLIFF_PENALTY, false)
    } else {
        (moved, -1.0, moved == GOAL)
    }
}

impl CliffWalking {
    pub fn new() -> Self {
        Self::with_horizon(500)
    }

    pub fn with_horizon(max_episode_steps: usize) -> Self {
        Self {
            spec: EnvSpec {
                name: "cliffwalking",
                observation: ObservationKind::Discrete {
                    num_states: ROWS * COLS,
                },
                num_actions: 4,
                max_episode_steps,
            },
            pos: START,
            clock: EpisodeClock::new(),
        }
    }
}

impl Environment for CliffWalking {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> State {
        self.pos = START;
        self.clock.start();
        State::Discrete(cell_index(START.0, START.1))
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.begin_step(&self.spec, action)?;
        let (next, reward, terminal) = transition(self.pos, action);
        self.pos = next;
        let truncated = self.clock.finish_step(&self.spec, terminal);
        Ok(StepResult {
            next_state: State::Discrete(cell_index(next.0, next.1)),
            reward,
            terminal,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use std::collections::VecDeque;

    #[test]
    fn reset_to_start() {
        let mut env = CliffWalking::new();
        let s = env.reset(&mut stream(0, Stream::Environment));
        assert_eq!(s, State::Discrete(36));
    }

    #[test]
    fn stepping_into_cliff_returns_to_start() {
        let mut env = CliffWalking::new();
        env.reset(&mut stream(0, Stream::Environment));
        let r = env.step(RIGHT).unwrap();
        assert_eq!(r.reward, -100.0);
        assert_eq!(r.next_state, State::Discrete(36));
        assert!(!r.terminal);
    }

    #[test]
    fn always_right_never_terminates() {
        let mut env = CliffWalking::with_horizon(usize::MAX);
        env.reset(&mut stream(0, Stream::Environment));
        let mut total = 0.0;
        for _ in 0..1000 {
            let r = env.step(RIGHT).unwrap();
            assert!(!r.terminal);
            total += r.reward;
        }
        assert_eq!(total, -100_000.0);
    }

    #[test]
    fn walls_clamp() {
        assert_eq!(transition((0, 0), UP), ((0, 0), -1.0, false));
        assert_eq!(transition((0, 0), LEFT), ((0, 0), -1.0, false));
        assert_eq!(transition((0, 11), RIGHT), ((0, 11), -1.0, false));
        assert_eq!(transition((3, 0), DOWN), ((3, 0), -1.0, false));
        assert_eq!(transition((2, 11), DOWN), ((3, 11), -1.0, true));
    }

    /// Breadth-first search over the deterministic grid: with −1 per move and
    /// −100 cliff resets, the best return is the negated shortest path length.
    #[test]
    fn optimal_return_is_minus_13() {
        let mut dist = vec![usize::MAX; ROWS * COLS];
        let mut queue = VecDeque::from([START]);
        dist[cell_index(START.0, START.1)] = 0;
        while let Some(pos) = queue.pop_front() {
            let d = dist[cell_index(pos.0, pos.1)];
            if pos == GOAL {
                continue;
            }
            for a in [UP, RIGHT, DOWN, LEFT] {
                let (next, reward, _) = transition(pos, a);
                if reward == CLIFF_PENALTY {
                    continue;
                }
                let idx = cell_index(next.0, next.1);
                if dist[idx] == usize::MAX {
                    dist[idx] = d + 1;
                    queue.push_back(next);
                }
            }
        }
        assert_eq!(-(dist[cell_index(GOAL.0, GOAL.1)] as f64), -13.0);

        let mut env = CliffWalking::new();
        env.reset(&mut stream(0, Stream::Environment));
        let path = [UP].into_iter().chain([RIGHT; 11]).chain([DOWN]);
        let mut ret = 0.0;
        let mut last = None;
        for a in path {
            let r = env.step(a).unwrap();
            ret += r.reward;
            last = Some(r.terminal);
        }
        assert_eq!(ret, -13.0);
        assert_eq!(last, Some(true));
    }
}
