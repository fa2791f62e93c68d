//! Replay memory with stored behavior distributions and sequential sampling.

mod dump;

use std::collections::VecDeque;

use rand::Rng;

pub use dump::{read_dump, write_dump, DUMP_HEADER};

use crate::error::{Error, Result};
use crate::policy::PolicyDistribution;
use crate::State;

/// One environment step plus the behavior distribution `μ(·|x)` it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: State,
    pub action: usize,
    pub reward: f64,
    pub next_state: State,
    pub terminal: bool,
    pub behavior: PolicyDistribution,
    pub episode_id: u64,
    /// Acting-time `Q(x, ·)`, kept only when the agent runs in debug mode.
    pub acting_q: Option<Vec<f64>>,
}

impl Transition {
    pub fn validate(&self) -> Result<()> {
        let p = self.behavior.prob(self.action)?;
        if p <= 0.0 {
            return Err(Error::invalid(format!(
                "action {} has zero behavior probability",
                self.action
            )));
        }
        if !self.reward.is_finite() {
            return Err(Error::invalid("non-finite reward"));
        }
        if let Some(q) = &self.acting_q {
            if q.len() != self.behavior.len() {
                return Err(Error::invalid("acting-time Q row has the wrong length"));
            }
        }
        Ok(())
    }
}

/// FIFO ring of at most `capacity` transitions, oldest first.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    buffer: VecDeque<Transition>,
}

impl ReplayMemory {
    pub const DEFAULT_CAPACITY: usize = 50_000;

    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::domain("replay capacity must be positive"));
        }
        Ok(Self {
            capacity,
            buffer: VecDeque::with_capacity(capacity.min(1 << 16)),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Transition at logical position `i` (0 = oldest).
    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.buffer.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.buffer.iter()
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        t.validate()?;
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(t);
        Ok(())
    }

    /// Up to `k` consecutive transitions from `start`, cut after a terminal
    /// transition, before an episode change, or at the newest entry.
    pub fn segment_from(&self, start: usize, k: usize) -> Result<Vec<&Transition>> {
        if k == 0 {
            return Err(Error::domain("segment length must be at least 1"));
        }
        let head = self.buffer.get(start).ok_or_else(|| {
            Error::invalid(format!("start {start} out of range for {} entries", self.len()))
        })?;
        let end = start.saturating_add(k).min(self.buffer.len());
        let mut out = Vec::with_capacity(end - start);
        out.push(head);
        let mut last = head;
        for t in (start + 1..end).map(|i| &self.buffer[i]) {
            if last.terminal || t.episode_id != head.episode_id {
                break;
            }
            out.push(t);
            last = t;
        }
        Ok(out)
    }

    /// Uniform start index over the whole buffer.
    pub fn sample_start<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        if self.buffer.is_empty() {
            return Err(Error::EmptyMemory);
        }
        Ok(rng.gen_range(0..self.buffer.len()))
    }

    /// `batch` segments with independently drawn starts; overlaps are allowed.
    pub fn sample_segments<R: Rng + ?Sized>(
        &self,
        batch: usize,
        k: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<&Transition>>> {
        if self.buffer.is_empty() {
            return Err(Error::EmptyMemory);
        }
        if k == 0 {
            return Err(Error::domain("segment length must be at least 1"));
        }
        (0..batch)
            .map(|_| {
                let start = self.sample_start(rng)?;
                self.segment_from(start, k)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn step(episode: u64, i: usize, terminal: bool) -> Transition {
        Transition {
            state: State::Discrete(i),
            action: i % 2,
            reward: i as f64,
            next_state: State::Discrete(i + 1),
            terminal,
            behavior: PolicyDistribution::new(vec![0.4, 0.6]).unwrap(),
            episode_id: episode,
            acting_q: None,
        }
    }

    fn episode(mem: &mut ReplayMemory, id: u64, len: usize, offset: usize) {
        for i in 0..len {
            mem.push(step(id, offset + i, i + 1 == len)).unwrap();
        }
    }

    fn rewards(seg: &[&Transition]) -> Vec<f64> {
        seg.iter().map(|t| t.reward).collect()
    }

    #[test]
    fn push_and_evict() {
        let mut mem = ReplayMemory::new(2).unwrap();
        mem.push(step(0, 1, false)).unwrap();
        assert_eq!(mem.len(), 1);
        mem.push(step(0, 2, false)).unwrap();
        mem.push(step(0, 3, false)).unwrap();
        assert_eq!(mem.len(), 2);
        assert_eq!(mem.get(0).unwrap().reward, 2.0);
        assert_eq!(mem.get(1).unwrap().reward, 3.0);
    }

    #[test]
    fn stored_transition_is_bitwise_intact() {
        let mut mem = ReplayMemory::new(4).unwrap();
        let t = Transition {
            behavior: PolicyDistribution::new(vec![0.1 + 0.2, 1.0 - (0.1 + 0.2)]).unwrap(),
            ..step(3, 0, false)
        };
        mem.push(t.clone()).unwrap();
        let back = mem.get(0).unwrap();
        assert_eq!(back, &t);
        for (a, b) in back.behavior.probs().iter().zip(t.behavior.probs()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn push_rejects_zero_probability_action() {
        let mut mem = ReplayMemory::new(4).unwrap();
        let t = Transition {
            behavior: PolicyDistribution::new(vec![1.0, 0.0]).unwrap(),
            action: 1,
            ..step(0, 0, false)
        };
        assert!(mem.push(t).is_err());
        assert!(ReplayMemory::new(0).is_err());
    }

    #[test]
    fn segment_examples() {
        let mut mem = ReplayMemory::new(10).unwrap();
        episode(&mut mem, 0, 5, 0);
        assert_eq!(rewards(&mem.segment_from(1, 3).unwrap()), vec![1.0, 2.0, 3.0]);
        assert_eq!(mem.segment_from(4, 3).unwrap().len(), 1);
        assert_eq!(mem.segment_from(3, 10).unwrap().len(), 2);
        assert!(mem.segment_from(5, 3).is_err());
    }

    #[test]
    fn truncated_episode_boundary_stops_segment() {
        // Episode 0 ends by horizon truncation, so its last step is not terminal.
        let mut mem = ReplayMemory::new(10).unwrap();
        for i in 0..3 {
            mem.push(step(0, i, false)).unwrap();
        }
        episode(&mut mem, 1, 3, 3);
        assert_eq!(rewards(&mem.segment_from(1, 5).unwrap()), vec![1.0, 2.0]);
    }

    #[test]
    fn empty_memory_errors() {
        let mem = ReplayMemory::new(3).unwrap();
        let mut rng = stream(0, Stream::Replay);
        assert!(matches!(
            mem.sample_segments(4, 2, &mut rng),
            Err(Error::EmptyMemory)
        ));
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let mut mem = ReplayMemory::new(50).unwrap();
        episode(&mut mem, 0, 20, 0);
        episode(&mut mem, 1, 17, 20);
        let draw = |seed| {
            let mut rng = stream(seed, Stream::Replay);
            mem.sample_segments(8, 4, &mut rng)
                .unwrap()
                .iter()
                .map(|s| rewards(s))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }
}
