use std::fmt;

/// Input to an action-value function: either a table index or a feature vector.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Discrete(usize),
    Continuous(Vec<f64>),
}

impl State {
    pub fn as_index(&self) -> Option<usize> {
        match self {
            State::Discrete(i) => Some(*i),
            State::Continuous(_) => None,
        }
    }

    pub fn as_features(&self) -> Option<&[f64]> {
        match self {
            State::Discrete(_) => None,
            State::Continuous(v) => Some(v),
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Discrete(i) => write!(f, "#{i}"),
            State::Continuous(v) => write!(f, "{v:?}"),
        }
    }
}
