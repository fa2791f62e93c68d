use super::{check_learning_rate, check_target, QFunction};
use crate::error::{Error, Result};
use crate::State;

/// Dense `num_states × num_actions` table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularQ {
    table: Vec<f64>,
    num_states: usize,
    num_actions: usize,
    learning_rate: f64,
}

impl TabularQ {
    pub fn zeros(num_states: usize, num_actions: usize, learning_rate: f64) -> Result<Self> {
        Self::from_table(
            vec![0.0; num_states * num_actions],
            num_states,
            num_actions,
            learning_rate,
        )
    }

    pub fn from_table(
        table: Vec<f64>,
        num_states: usize,
        num_actions: usize,
        learning_rate: f64,
    ) -> Result<Self> {
        if num_states == 0 || num_actions < 2 {
            return Err(Error::invalid(format!(
                "tabular Q needs >= 1 state and >= 2 actions, got {num_states}x{num_actions}"
            )));
        }
        if table.len() != num_states * num_actions {
            return Err(Error::invalid("table size does not match dimensions"));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite table entry"));
        }
        check_learning_rate(learning_rate)?;
        Ok(Self {
            table,
            num_states,
            num_actions,
            learning_rate,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn index(&self, state: &State) -> Result<usize> {
        match state {
            State::Discrete(s) if *s < self.num_states => Ok(*s),
            State::Discrete(s) => Err(Error::invalid(format!(
                "state {s} out of range for {} states",
                self.num_states
            ))),
            State::Continuous(_) => Err(Error::invalid("tabular Q needs a discrete state")),
        }
    }

    fn row(&self, s: usize) -> &[f64] {
        &self.table[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn get(&self, state: usize, action: usize) -> Result<f64> {
        let s = self.index(&State::Discrete(state))?;
        self.row(s)
            .get(action)
            .copied()
            .ok_or_else(|| Error::invalid(format!("action {action} out of range")))
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) -> Result<()> {
        let s = self.index(&State::Discrete(state))?;
        if action >= self.num_actions {
            return Err(Error::invalid(format!("action {action} out of range")));
        }
        check_target(value)?;
        self.table[s * self.num_actions + action] = value;
        Ok(())
    }
}

impl QFunction for TabularQ {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn predict(&self, state: &State) -> Result<Vec<f64>> {
        let s = self.index(state)?;
        Ok(self.row(s).to_vec())
    }

    fn predict_into(&self, state: &State, out: &mut Vec<f64>) -> Result<()> {
        let s = self.index(state)?;
        out.clear();
        out.extend_from_slice(self.row(s));
        Ok(())
    }

    fn train_step(&mut self, state: &State, action: usize, target: f64) -> Result<f64> {
        check_target(target)?;
        let s = self.index(state)?;
        if action >= self.num_actions {
            return Err(Error::invalid(format!("action {action} out of range")));
        }
        let cell = &mut self.table[s * self.num_actions + action];
        let err = target - *cell;
        *cell += self.learning_rate * err;
        Ok(err * err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predict_zero_and_read_your_write() {
        let mut q = TabularQ::zeros(5, 2, 0.1).unwrap();
        assert_eq!(q.predict(&State::Discrete(4)).unwrap(), vec![0.0, 0.0]);
        q.set(3, 1, 7.5).unwrap();
        assert_eq!(q.predict(&State::Discrete(3)).unwrap()[1], 7.5);
        assert!(q.predict(&State::Discrete(5)).is_err());
        assert!(q.predict(&State::Continuous(vec![0.0])).is_err());
    }

    #[test]
    fn train_step_examples() {
        let mut q = TabularQ::zeros(2, 2, 0.5).unwrap();
        let loss = q.train_step(&State::Discrete(0), 1, 2.0).unwrap();
        assert_eq!(loss, 4.0);
        assert_eq!(q.get(0, 1).unwrap(), 1.0);

        let before = q.clone();
        assert_eq!(q.train_step(&State::Discrete(0), 1, 1.0).unwrap(), 0.0);
        assert_eq!(q, before);

        assert!(matches!(
            q.train_step(&State::Discrete(0), 1, f64::INFINITY),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn unit_learning_rate_hits_target() {
        let mut q = TabularQ::zeros(3, 3, 1.0).unwrap();
        for (s, a, y) in [(0, 2, -3.25), (1, 0, 0.125), (0, 2, 9.0)] {
            q.train_step(&State::Discrete(s), a, y).unwrap();
            assert_eq!(q.get(s, a).unwrap(), y);
        }
    }
}
