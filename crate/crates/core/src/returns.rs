//! Multi-step return targets.
//!
//! For a segment `(x_0, a_0, r_0, x'_0), …, (x_{k-1}, a_{k-1}, r_{k-1}, x'_{k-1})`
//! the target for `Q(x_0, a_0)` is
//!
//! ```text
//! Y = r_0 + γ Z(x'_0) + Σ_{s=1}^{k-1} γ^s (Π_{i=1}^{s} C_i) δ_s
//! ```
//!
//! where each algorithm picks its own bootstrap `Z`, TD error `δ` and trace
//! coefficient `C`. Action values inside `Z` and `δ` come from the target
//! network; the target policy π (ε-greedy with `ε_π`) and greedy actions come
//! from the online network.

use std::borrow::Borrow;
use std::fmt;

use crate::error::{Error, Result};
use crate::policy::{
    classify_case, epsilon_greedy, expected_q, measure, validate_epsilon, DiscrepancyMeasurement,
    MeasurementKind, PolicyCase, PolicyDistribution,
};
use crate::qfunc::QFunction;
use crate::replay::Transition;

/// The seven return-based algorithms that QM(λ) can be layered on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    WatkinsQ,
    PengWilliamsQ,
    GeneralQ,
    ImportanceSampling,
    TreeBackup,
    QPi,
    Retrace,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::WatkinsQ,
        Algorithm::PengWilliamsQ,
        Algorithm::GeneralQ,
        Algorithm::ImportanceSampling,
        Algorithm::TreeBackup,
        Algorithm::QPi,
        Algorithm::Retrace,
    ];

    pub fn bootstrap_kind(self) -> BootstrapKind {
        match self {
            Algorithm::WatkinsQ | Algorithm::PengWilliamsQ => BootstrapKind::MaxQ,
            _ => BootstrapKind::ExpectedPiQ,
        }
    }

    pub fn td_error_kind(self) -> TdErrorKind {
        match self {
            Algorithm::WatkinsQ => TdErrorKind::MaxNextMinusSampled,
            Algorithm::PengWilliamsQ => TdErrorKind::MaxNextMinusMax,
            Algorithm::GeneralQ => TdErrorKind::ExpNextMinusExp,
            Algorithm::ImportanceSampling
            | Algorithm::TreeBackup
            | Algorithm::QPi
            | Algorithm::Retrace => TdErrorKind::ExpNextMinusSampled,
        }
    }

    /// Config-file name.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::WatkinsQ => "watkins",
            Algorithm::PengWilliamsQ => "pw",
            Algorithm::GeneralQ => "general",
            Algorithm::ImportanceSampling => "is",
            Algorithm::TreeBackup => "tb",
            Algorithm::QPi => "qpi",
            Algorithm::Retrace => "retrace",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let name = name.to_ascii_lowercase();
        Some(match name.as_str() {
            "watkins" => Algorithm::WatkinsQ,
            "pw" | "peng-williams" | "pengwilliams" => Algorithm::PengWilliamsQ,
            "general" => Algorithm::GeneralQ,
            "is" => Algorithm::ImportanceSampling,
            "tb" => Algorithm::TreeBackup,
            "qpi" => Algorithm::QPi,
            "retrace" => Algorithm::Retrace,
            _ => return None,
        })
    }

    fn label(self) -> &'static str {
        match self {
            Algorithm::WatkinsQ => "Watkins",
            Algorithm::PengWilliamsQ => "PW",
            Algorithm::GeneralQ => "General",
            Algorithm::ImportanceSampling => "IS",
            Algorithm::TreeBackup => "TB",
            Algorithm::QPi => "Qpi",
            Algorithm::Retrace => "Retrace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapKind {
    /// `max_a Q(x', a)`
    MaxQ,
    /// `E_π Q(x', ·)`
    ExpectedPiQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdErrorKind {
    /// `r + γ max Q(x', ·) − Q(x, a)`
    MaxNextMinusSampled,
    /// `r + γ max Q(x', ·) − max Q(x, ·)`
    MaxNextMinusMax,
    /// `r + γ E_π Q(x', ·) − E_π Q(x, ·)`
    ExpNextMinusExp,
    /// `r + γ E_π Q(x', ·) − Q(x, a)`
    ExpNextMinusSampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Base(Algorithm),
    Qm {
        base: Algorithm,
        measurement: MeasurementKind,
    },
}

/// How trace coefficients `C_s` are computed, together with λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStrategy {
    kind: StrategyKind,
    lambda: f64,
    /// Upper clamp on importance-sampling ratios; only used by IS.
    is_ratio_cap: Option<f64>,
}

impl TraceStrategy {
    pub fn new(kind: StrategyKind, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::domain(format!("lambda {lambda} outside [0, 1]")));
        }
        Ok(Self {
            kind,
            lambda,
            is_ratio_cap: None,
        })
    }

    pub fn base(algorithm: Algorithm, lambda: f64) -> Result<Self> {
        Self::new(StrategyKind::Base(algorithm), lambda)
    }

    pub fn qm(base: Algorithm, measurement: MeasurementKind, lambda: f64) -> Result<Self> {
        Self::new(StrategyKind::Qm { base, measurement }, lambda)
    }

    pub fn with_is_ratio_cap(mut self, cap: Option<f64>) -> Result<Self> {
        if let Some(c) = cap {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::domain(format!("IS ratio cap {c} must be positive")));
            }
        }
        self.is_ratio_cap = cap;
        Ok(self)
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_ratio_cap(&self) -> Option<f64> {
        self.is_ratio_cap
    }

    /// The algorithm that fixes `Z` and `δ`; for QM this is its base.
    pub fn algorithm(&self) -> Algorithm {
        match self.kind {
            StrategyKind::Base(a) | StrategyKind::Qm { base: a, .. } => a,
        }
    }

    pub fn measurement(&self) -> Option<MeasurementKind> {
        match self.kind {
            StrategyKind::Base(_) => None,
            StrategyKind::Qm { measurement, .. } => Some(measurement),
        }
    }

    pub fn is_qm(&self) -> bool {
        matches!(self.kind, StrategyKind::Qm { .. })
    }

    pub fn bootstrap_kind(&self) -> BootstrapKind {
        self.algorithm().bootstrap_kind()
    }

    pub fn td_error_kind(&self) -> TdErrorKind {
        self.algorithm().td_error_kind()
    }

    /// True when every `C_s` is guaranteed to lie in `[0, λ]`.
    pub fn has_bounded_traces(&self) -> bool {
        match self.kind {
            StrategyKind::Qm { .. } => true,
            StrategyKind::Base(a) => matches!(
                a,
                Algorithm::WatkinsQ | Algorithm::TreeBackup | Algorithm::Retrace
            ),
        }
    }
}

impl fmt::Display for TraceStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StrategyKind::Base(a) => write!(f, "{}({})", a.label(), self.lambda),
            StrategyKind::Qm { base, measurement } => write!(
                f,
                "QM-{}-{}({})",
                base.label(),
                measurement.name(),
                self.lambda
            ),
        }
    }
}

fn ratio(pi: &PolicyDistribution, mu: &PolicyDistribution, action: usize) -> Result<f64> {
    let m = mu.prob(action)?;
    if m <= 0.0 {
        return Err(Error::DivisionDomain(format!(
            "behavior probability of action {action} is zero"
        )));
    }
    Ok(pi.prob(action)? / m)
}

/// Trace coefficient `C_s` for the sampled `action`.
///
/// `case` must be given for QM strategies and is ignored otherwise.
pub fn trace_coefficient(
    strategy: &TraceStrategy,
    pi: &PolicyDistribution,
    mu: &PolicyDistribution,
    action: usize,
    case: Option<PolicyCase>,
) -> Result<f64> {
    if pi.len() != mu.len() {
        return Err(Error::invalid("target and behavior policies differ in size"));
    }
    let lambda = strategy.lambda;
    let c = match strategy.kind {
        StrategyKind::Base(Algorithm::WatkinsQ) => {
            pi.prob(action)?;
            if action == pi.greedy_action() {
                lambda
            } else {
                0.0
            }
        }
        StrategyKind::Base(Algorithm::PengWilliamsQ | Algorithm::GeneralQ | Algorithm::QPi) => {
            pi.prob(action)?;
            lambda
        }
        StrategyKind::Base(Algorithm::ImportanceSampling) => {
            let r = ratio(pi, mu, action)?;
            lambda * strategy.is_ratio_cap.map_or(r, |cap| r.min(cap))
        }
        StrategyKind::Base(Algorithm::TreeBackup) => lambda * pi.prob(action)?,
        StrategyKind::Base(Algorithm::Retrace) => lambda * ratio(pi, mu, action)?.min(1.0),
        StrategyKind::Qm { .. } => {
            let case =
                case.ok_or_else(|| Error::invalid("QM trace coefficient requires a policy case"))?;
            let r = ratio(pi, mu, action)?;
            match case {
                PolicyCase::NearOnPolicy => lambda * r.min(1.0),
                PolicyCase::NearOffPolicy => lambda * pi.prob(action)?,
            }
        }
    };
    Ok(c)
}

fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `Z(x')`: zero at a terminal, otherwise `max Q` or `E_π Q`.
pub fn bootstrap_value(
    kind: BootstrapKind,
    q_next: &[f64],
    pi_next: &PolicyDistribution,
    terminal: bool,
) -> Result<f64> {
    if q_next.len() != pi_next.len() {
        return Err(Error::invalid("q_next and pi_next differ in length"));
    }
    if terminal {
        return Ok(0.0);
    }
    match kind {
        BootstrapKind::MaxQ => Ok(max(q_next)),
        BootstrapKind::ExpectedPiQ => expected_q(pi_next, q_next),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn td_error(
    kind: TdErrorKind,
    reward: f64,
    gamma: f64,
    q_t: &[f64],
    q_next: &[f64],
    pi_t: &PolicyDistribution,
    pi_next: &PolicyDistribution,
    action: usize,
    terminal: bool,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!("gamma {gamma} outside [0, 1]")));
    }
    if q_t.len() != pi_t.len() || q_next.len() != pi_next.len() || q_t.len() != q_next.len() {
        return Err(Error::invalid("td_error inputs differ in length"));
    }
    let q_sa = *q_t
        .get(action)
        .ok_or_else(|| Error::invalid(format!("action {action} out of range")))?;
    let (next, current) = match kind {
        TdErrorKind::MaxNextMinusSampled => (max(q_next), q_sa),
        TdErrorKind::MaxNextMinusMax => (max(q_next), max(q_t)),
        TdErrorKind::ExpNextMinusExp => (expected_q(pi_next, q_next)?, expected_q(pi_t, q_t)?),
        TdErrorKind::ExpNextMinusSampled => (expected_q(pi_next, q_next)?, q_sa),
    };
    let next = if terminal { 0.0 } else { next };
    Ok(reward + gamma * next - current)
}

/// Parameters shared by every target computed during one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetParams {
    pub gamma: f64,
    /// ε of the ε-greedy target policy π.
    pub epsilon_pi: f64,
}

impl TargetParams {
    pub fn new(gamma: f64, epsilon_pi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::domain(format!("gamma {gamma} outside [0, 1]")));
        }
        validate_epsilon(epsilon_pi)?;
        Ok(Self { gamma, epsilon_pi })
    }
}

/// The target `Y` plus the per-step terms that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTarget {
    pub y: f64,
    /// `Π_{i=1}^{s} C_i` for each correction step evaluated.
    pub per_step_traces: Vec<f64>,
    /// `δ_s` for each correction step evaluated.
    pub per_step_deltas: Vec<f64>,
    /// QM only: measurement and case for each correction step.
    pub per_step_cases: Vec<(DiscrepancyMeasurement, PolicyCase)>,
}

/// Target-network values and target policy at one state.
#[derive(Clone)]
struct Evaluated {
    target: Vec<f64>,
    pi: PolicyDistribution,
}

impl Evaluated {
    fn new<Q: QFunction + ?Sized>(
        state: &crate::State,
        online: &Q,
        target: &Q,
        epsilon_pi: f64,
    ) -> Result<Self> {
        Ok(Self {
            pi: epsilon_greedy(&online.predict(state)?, epsilon_pi)?,
            target: target.predict(state)?,
        })
    }

    /// Re-evaluates at `state`, reusing buffers; `scratch` holds online values.
    fn update<Q: QFunction + ?Sized>(
        &mut self,
        state: &crate::State,
        online: &Q,
        target: &Q,
        epsilon_pi: f64,
        scratch: &mut Vec<f64>,
    ) -> Result<()> {
        online.predict_into(state, scratch)?;
        self.pi.set_epsilon_greedy(scratch, epsilon_pi)?;
        target.predict_into(state, &mut self.target)
    }
}

/// Computes the multi-step target for the head of `segment`.
///
/// Accumulation stops after the first terminal transition, and also once the
/// running trace product reaches zero (all later terms vanish).
pub fn compute_target<T, Q>(
    segment: &[T],
    strategy: &TraceStrategy,
    online: &Q,
    target: &Q,
    params: &TargetParams,
) -> Result<ReturnTarget>
where
    T: Borrow<Transition>,
    Q: QFunction + ?Sized,
{
    let head = segment
        .first()
        .ok_or_else(|| Error::invalid("empty segment"))?
        .borrow();
    let n = online.num_actions();
    for t in segment {
        let t = t.borrow();
        if t.behavior.len() != n {
            return Err(Error::invalid(format!(
                "stored behavior distribution covers {} actions, expected {n}",
                t.behavior.len()
            )));
        }
        if t.episode_id != head.episode_id {
            return Err(Error::invalid("segment spans more than one episode"));
        }
    }
    let gamma = params.gamma;
    let eps = params.epsilon_pi;
    let bootstrap = strategy.bootstrap_kind();
    let td_kind = strategy.td_error_kind();

    let mut next_eval = Evaluated::new(&head.next_state, online, target, eps)?;
    let z = bootstrap_value(bootstrap, &next_eval.target, &next_eval.pi, head.terminal)?;
    let mut out = ReturnTarget {
        y: head.reward + gamma * z,
        per_step_traces: Vec::with_capacity(segment.len() - 1),
        per_step_deltas: Vec::with_capacity(segment.len() - 1),
        per_step_cases: Vec::with_capacity(if strategy.is_qm() { segment.len() - 1 } else { 0 }),
    };
    if head.terminal || segment.len() == 1 {
        return Ok(out);
    }

    let mut here = next_eval.clone();
    let mut scratch = Vec::with_capacity(n);
    let mut trace = 1.0;
    let mut discount = 1.0;
    let mut prev_next_state = &head.next_state;
    for t in &segment[1..] {
        let t = t.borrow();
        discount *= gamma;
        // x_s normally equals x'_{s-1}; reuse that evaluation when it does.
        if &t.state == prev_next_state {
            std::mem::swap(&mut here, &mut next_eval);
        } else {
            here.update(&t.state, online, target, eps, &mut scratch)?;
        }
        let case = match strategy.measurement() {
            Some(kind) => {
                let m = measure(kind, &here.pi, &t.behavior, t.action)?;
                let c = classify_case(&m);
                out.per_step_cases.push((m, c));
                Some(c)
            }
            None => None,
        };
        trace *= trace_coefficient(strategy, &here.pi, &t.behavior, t.action, case)?;
        out.per_step_traces.push(trace);
        if trace == 0.0 {
            break;
        }
        next_eval.update(&t.next_state, online, target, eps, &mut scratch)?;
        let delta = td_error(
            td_kind,
            t.reward,
            gamma,
            &here.target,
            &next_eval.target,
            &here.pi,
            &next_eval.pi,
            t.action,
            t.terminal,
        )?;
        out.per_step_deltas.push(delta);
        out.y += discount * trace * delta;
        if t.terminal {
            break;
        }
        prev_next_state = &t.next_state;
    }
    if !out.y.is_finite() {
        return Err(Error::domain(format!("non-finite target {}", out.y)));
    }
    Ok(out)
}
