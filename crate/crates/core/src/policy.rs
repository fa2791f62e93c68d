//! Discrete-action policies and the β / η policy-discrepancy measurements.

use crate::error::{Error, Result};

/// Tolerance on `Σ p = 1` when validating a distribution.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Index of the largest value; ties go to the lowest index.
///
/// Panics on an empty slice.
pub fn argmax(values: &[f64]) -> usize {
    assert!(!values.is_empty(), "argmax of empty slice");
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Probability vector over `n >= 2` discrete actions.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDistribution {
    probs: Vec<f64>,
}

impl PolicyDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::invalid(format!(
                "distribution needs at least 2 actions, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::invalid(format!("invalid probability {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// ε-greedy distribution over `q_values`.
    ///
    /// The greedy action (lowest index among ties) receives `1 - ε + ε/n`,
    /// every other action `ε/n`. ε must lie in `(0, 1/2]`.
    pub fn epsilon_greedy(q_values: &[f64], epsilon: f64) -> Result<Self> {
        let mut dist = Self { probs: Vec::new() };
        dist.set_epsilon_greedy(q_values, epsilon)?;
        Ok(dist)
    }

    /// Overwrites `self` with the ε-greedy distribution over `q_values`,
    /// reusing the existing allocation. `self` is unchanged on error.
    pub fn set_epsilon_greedy(&mut self, q_values: &[f64], epsilon: f64) -> Result<()> {
        let n = q_values.len();
        if n < 2 {
            return Err(Error::invalid(format!(
                "epsilon-greedy needs at least 2 actions, got {n}"
            )));
        }
        if q_values.iter().any(|q| !q.is_finite()) {
            return Err(Error::invalid("non-finite action value"));
        }
        validate_epsilon(epsilon)?;
        let explore = epsilon / n as f64;
        self.probs.clear();
        self.probs.resize(n, explore);
        self.probs[argmax(q_values)] = 1.0 - epsilon + explore;
        Ok(())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, action: usize) -> Result<f64> {
        self.probs.get(action).copied().ok_or_else(|| {
            Error::invalid(format!(
                "action {action} out of range for {} actions",
                self.probs.len()
            ))
        })
    }

    /// Most probable action, lowest index on ties.
    pub fn greedy_action(&self) -> usize {
        argmax(&self.probs)
    }

    /// Inverse-CDF draw from a uniform sample `u ∈ [0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (a, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        // u landed in the rounding gap above the last partial sum.
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }
}

pub fn validate_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::domain(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    Ok(())
}

pub fn epsilon_greedy(q_values: &[f64], epsilon: f64) -> Result<PolicyDistribution> {
    PolicyDistribution::epsilon_greedy(q_values, epsilon)
}

/// `Σ_a dist[a] · q[a]`.
pub fn expected_q(dist: &PolicyDistribution, q_values: &[f64]) -> Result<f64> {
    if dist.len() != q_values.len() {
        return Err(Error::invalid(format!(
            "distribution has {} actions but {} values were given",
            dist.len(),
            q_values.len()
        )));
    }
    Ok(dist.probs.iter().zip(q_values).map(|(p, q)| p * q).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurementKind {
    /// L1 distance between the full distributions at the sampled state.
    Beta,
    /// Absolute probability gap at the sampled action.
    Eta,
}

impl MeasurementKind {
    pub fn bound(self) -> f64 {
        match self {
            MeasurementKind::Beta => 1.0,
            MeasurementKind::Eta => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasurementKind::Beta => "beta",
            MeasurementKind::Eta => "eta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyMeasurement {
    pub kind: MeasurementKind,
    pub value: f64,
}

impl DiscrepancyMeasurement {
    pub fn bound(&self) -> f64 {
        self.kind.bound()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyCase {
    NearOnPolicy,
    NearOffPolicy,
}

fn check_lengths(pi: &PolicyDistribution, mu: &PolicyDistribution) -> Result<()> {
    if pi.len() != mu.len() {
        return Err(Error::invalid(format!(
            "policies cover {} and {} actions",
            pi.len(),
            mu.len()
        )));
    }
    Ok(())
}

/// β = ‖π(·|x) − μ(·|x)‖₁.
pub fn beta_measure(
    pi: &PolicyDistribution,
    mu: &PolicyDistribution,
) -> Result<DiscrepancyMeasurement> {
    check_lengths(pi, mu)?;
    let value = pi
        .probs
        .iter()
        .zip(&mu.probs)
        .map(|(p, m)| (p - m).abs())
        .sum();
    Ok(DiscrepancyMeasurement {
        kind: MeasurementKind::Beta,
        value,
    })
}

/// η = |π(a|x) − μ(a|x)|.
pub fn eta_measure(
    pi: &PolicyDistribution,
    mu: &PolicyDistribution,
    action: usize,
) -> Result<DiscrepancyMeasurement> {
    check_lengths(pi, mu)?;
    let value = (pi.prob(action)? - mu.prob(action)?).abs();
    Ok(DiscrepancyMeasurement {
        kind: MeasurementKind::Eta,
        value,
    })
}

pub fn measure(
    kind: MeasurementKind,
    pi: &PolicyDistribution,
    mu: &PolicyDistribution,
    action: usize,
) -> Result<DiscrepancyMeasurement> {
    match kind {
        MeasurementKind::Beta => beta_measure(pi, mu),
        MeasurementKind::Eta => eta_measure(pi, mu, action),
    }
}

/// Near off-policy iff the measurement reaches its bound (inclusive).
pub fn classify_case(m: &DiscrepancyMeasurement) -> PolicyCase {
    if m.value >= m.bound() {
        PolicyCase::NearOffPolicy
    } else {
        PolicyCase::NearOnPolicy
    }
}
