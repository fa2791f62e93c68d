use super::mountain_car::{MAX_POSITION, MAX_SPEED, MIN_POSITION};
use super::ObservationKind;
use crate::error::{Error, Result};
use crate::State;

/// Maps raw observations to what the Q-function consumes.
#[derive(Debug, Clone, PartialEq)]
pub enum StateEncoder {
    Identity,
    /// Discrete index → one-hot feature vector of length `size`.
    OneHot { size: usize },
    /// Continuous vector → cell index of a uniform grid (first dimension major).
    Grid {
        lows: Vec<f64>,
        highs: Vec<f64>,
        bins: Vec<usize>,
    },
    /// Continuous vector → each coordinate mapped linearly onto `[−1, 1]`.
    MinMax { lows: Vec<f64>, highs: Vec<f64> },
}

impl StateEncoder {
    /// `bins × bins` grid over Mountain Car's position × velocity box.
    pub fn mountain_car_grid(bins: usize) -> Self {
        StateEncoder::Grid {
            lows: vec![MIN_POSITION, -MAX_SPEED],
            highs: vec![MAX_POSITION, MAX_SPEED],
            bins: vec![bins, bins],
        }
    }

    /// Position in `[−1.2, 0.6]` and velocity in `[−0.07, 0.07]` scaled to `[−1, 1]`.
    pub fn mountain_car_minmax() -> Self {
        StateEncoder::MinMax {
            lows: vec![MIN_POSITION, -MAX_SPEED],
            highs: vec![MAX_POSITION, MAX_SPEED],
        }
    }

    pub fn output_kind(&self, input: ObservationKind) -> Result<ObservationKind> {
        match (self, input) {
            (StateEncoder::Identity, k) => Ok(k),
            (StateEncoder::OneHot { size }, ObservationKind::Discrete { num_states })
                if *size == num_states =>
            {
                Ok(ObservationKind::Continuous { dim: *size })
            }
            (StateEncoder::Grid { lows, highs, bins }, ObservationKind::Continuous { dim })
                if lows.len() == dim && highs.len() == dim && bins.len() == dim =>
            {
                if bins.iter().any(|b| *b == 0) {
                    return Err(Error::invalid("grid needs at least one bin per dimension"));
                }
                let num_states = bins
                    .iter()
                    .try_fold(1usize, |acc, b| acc.checked_mul(*b))
                    .ok_or_else(|| Error::invalid("grid too large"))?;
                Ok(ObservationKind::Discrete { num_states })
            }
            (StateEncoder::MinMax { lows, highs }, ObservationKind::Continuous { dim })
                if lows.len() == dim && highs.len() == dim =>
            {
                Ok(ObservationKind::Continuous { dim })
            }
            _ => Err(Error::invalid(format!(
                "encoder {self:?} does not fit observation {input:?}"
            ))),
        }
    }

    pub fn encode(&self, state: &State) -> Result<State> {
        match self {
            StateEncoder::Identity => Ok(state.clone()),
            StateEncoder::OneHot { size } => {
                let i = state
                    .as_index()
                    .filter(|i| i < size)
                    .ok_or_else(|| Error::invalid("one-hot encoder needs an in-range index"))?;
                let mut v = vec![0.0; *size];
                v[i] = 1.0;
                Ok(State::Continuous(v))
            }
            StateEncoder::Grid { lows, highs, bins } => {
                let x = features(state, lows.len())?;
                let mut index = 0;
                for d in 0..x.len() {
                    let frac = (x[d] - lows[d]) / (highs[d] - lows[d]);
                    let cell = (frac * bins[d] as f64).floor().clamp(0.0, (bins[d] - 1) as f64);
                    index = index * bins[d] + cell as usize;
                }
                Ok(State::Discrete(index))
            }
            StateEncoder::MinMax { lows, highs } => {
                let x = features(state, lows.len())?;
                Ok(State::Continuous(
                    x.iter()
                        .zip(lows.iter().zip(highs))
                        .map(|(v, (lo, hi))| 2.0 * (v - lo) / (hi - lo) - 1.0)
                        .collect(),
                ))
            }
        }
    }
}

fn features(state: &State, dim: usize) -> Result<&[f64]> {
    state
        .as_features()
        .filter(|x| x.len() == dim)
        .ok_or_else(|| Error::invalid(format!("expected a {dim}-dimensional feature vector")))
}
