//! Offline verification suites.
//!
//! * `oracle`: the target engine against a literal term-by-term expansion of
//!   the multi-step target, the λ = 0 reduction, and the QM equivalence classes.
//! * `bounds`: exhaustive enumeration of the β / η classification bounds.
//! * `gradients`: MLP gradients against central finite differences.
//! * `envs`: environment invariant sweeps.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envs::cliff_walking::{self, transition, COLS, GOAL, RIGHT, ROWS, START};
use crate::envs::mountain_car::{MAX_POSITION, MAX_SPEED, MIN_POSITION};
use crate::envs::{CartPole, CliffWalking, EnvKind, Environment, MountainCar};
use crate::error::{Error, Result};
use crate::policy::{classify_case, epsilon_greedy, measure, MeasurementKind, PolicyCase, PolicyDistribution};
use crate::qfunc::{MlpQ, TabularQ};
use crate::replay::Transition;
use crate::returns::{compute_target, Algorithm, StrategyKind, TargetParams, TraceStrategy};
use crate::State;

pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const GRADIENT_TOLERANCE: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Bounds,
    Gradients,
    Envs,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Oracle, Suite::Bounds, Suite::Gradients, Suite::Envs];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Bounds => "bounds",
            Suite::Gradients => "gradients",
            Suite::Envs => "envs",
        }
    }
}

/// Outcome of one suite: how many checks ran, which failed, and the largest
/// numeric deviation observed (0 where no tolerance applies).
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub max_error: f64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        Self {
            suite,
            checks: 0,
            max_error: 0.0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn merge(&mut self, other: SuiteReport) {
        self.checks += other.checks;
        self.max_error = self.max_error.max(other.max_error);
        self.failures.extend(other.failures);
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} checks, {} failures, max error {:.3e})",
            self.suite.name(),
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks,
            self.failures.len(),
            self.max_error
        )?;
        for msg in self.failures.iter().take(10) {
            write!(f, "\n  {msg}")?;
        }
        if self.failures.len() > 10 {
            write!(f, "\n  … {} more", self.failures.len() - 10)?;
        }
        Ok(())
    }
}

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    match suite {
        Suite::Oracle => {
            let mut r = oracle_suite(0, 1000)?;
            r.merge(lambda_zero_suite(1, 100)?);
            r.merge(qm_equivalence_suite(2, 1000)?);
            Ok(r)
        }
        Suite::Bounds => Ok(bounds_suite()),
        Suite::Gradients => gradients_suite(3, 20),
        Suite::Envs => envs_suite(4),
    }
}

/// Every base algorithm, followed by QM over every base with both measurements.
pub fn all_strategies(lambda: f64) -> Vec<TraceStrategy> {
    let mut out: Vec<TraceStrategy> = Algorithm::ALL
        .iter()
        .map(|a| TraceStrategy::base(*a, lambda).expect("valid λ"))
        .collect();
    for m in [MeasurementKind::Beta, MeasurementKind::Eta] {
        for a in Algorithm::ALL {
            out.push(TraceStrategy::qm(a, m, lambda).expect("valid λ"));
        }
    }
    out
}

/// A random tabular problem: online and target tables plus one segment.
#[derive(Debug, Clone)]
pub struct RandomCase {
    pub online: Vec<Vec<f64>>,
    pub target: Vec<Vec<f64>>,
    pub segment: Vec<Transition>,
    pub gamma: f64,
    pub epsilon_pi: f64,
    pub lambda: f64,
}

impl RandomCase {
    pub const NUM_STATES: usize = 6;

    /// Segment length in `1..=max_len`, `2..=max_actions` actions, rewards in
    /// `[−1, 1]`, μ either ε-greedy or an arbitrary positive distribution.
    pub fn generate<R: Rng>(rng: &mut R, max_len: usize, max_actions: usize) -> Self {
        let n = rng.gen_range(2..=max_actions);
        let s = Self::NUM_STATES;
        let mut table = |scale: f64| -> Vec<Vec<f64>> {
            (0..s)
                .map(|_| (0..n).map(|_| rng.gen_range(-scale..scale)).collect())
                .collect()
        };
        let online = table(2.0);
        let target = table(2.0);
        let k = rng.gen_range(1..=max_len);
        let mut segment = Vec::with_capacity(k);
        let mut x = rng.gen_range(0..s);
        for _ in 0..k {
            let behavior = if rng.gen_bool(0.5) {
                let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let eps = [0.5, 0.1, 0.01][rng.gen_range(0..3)];
                epsilon_greedy(&q, eps).expect("valid ε")
            } else {
                let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
                let total: f64 = w.iter().sum();
                PolicyDistribution::new(w.iter().map(|v| v / total).collect()).expect("normalised")
            };
            let action = behavior.sample_with(rng.gen());
            let next = rng.gen_range(0..s);
            let terminal = rng.gen_bool(0.15);
            segment.push(Transition {
                state: State::Discrete(x),
                action,
                reward: rng.gen_range(-1.0..1.0),
                next_state: State::Discrete(next),
                terminal,
                behavior,
                episode_id: 0,
                acting_q: None,
            });
            if terminal {
                break;
            }
            x = next;
        }
        Self {
            online,
            target,
            segment,
            gamma: rng.gen_range(0.5..=1.0),
            epsilon_pi: [0.01, 0.1, 0.25][rng.gen_range(0..3)],
            lambda: rng.gen_range(0.0..=1.0),
        }
    }

    fn as_tabular(table: &[Vec<f64>]) -> TabularQ {
        let n = table[0].len();
        TabularQ::from_table(table.concat(), table.len(), n, 0.1).expect("finite table")
    }

    /// Target from the library engine.
    pub fn engine_target(&self, strategy: &TraceStrategy) -> Result<f64> {
        let online = Self::as_tabular(&self.online);
        let target = Self::as_tabular(&self.target);
        let params = TargetParams::new(self.gamma, self.epsilon_pi)?;
        Ok(compute_target(&self.segment, strategy, &online, &target, &params)?.y)
    }
}

fn oracle_pi(q: &[f64], eps: f64) -> Vec<f64> {
    let n = q.len();
    let mut greedy = 0;
    for a in 1..n {
        if q[a] > q[greedy] {
            greedy = a;
        }
    }
    (0..n)
        .map(|a| eps / n as f64 + if a == greedy { 1.0 - eps } else { 0.0 })
        .collect()
}

fn dot(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

fn max_of(q: &[f64]) -> f64 {
    q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn oracle_uses_max(a: Algorithm) -> bool {
    matches!(a, Algorithm::WatkinsQ | Algorithm::PengWilliamsQ)
}

fn oracle_coefficient(
    strategy: &TraceStrategy,
    pi: &[f64],
    mu: &[f64],
    action: usize,
    online_q: &[f64],
) -> f64 {
    let lambda = strategy.lambda();
    let ratio = pi[action] / mu[action];
    let base = match strategy.kind() {
        StrategyKind::Base(a) => a,
        StrategyKind::Qm { measurement, .. } => {
            let (value, bound) = match measurement {
                MeasurementKind::Beta => (pi.iter().zip(mu).map(|(p, m)| (p - m).abs()).sum(), 1.0),
                MeasurementKind::Eta => ((pi[action] - mu[action]).abs(), 0.5),
            };
            return if value >= bound {
                lambda * pi[action]
            } else {
                lambda * ratio.min(1.0)
            };
        }
    };
    match base {
        Algorithm::WatkinsQ => {
            let best = max_of(online_q);
            let first_best = online_q.iter().position(|v| *v == best).unwrap_or(0);
            if action == first_best {
                lambda
            } else {
                0.0
            }
        }
        Algorithm::PengWilliamsQ | Algorithm::GeneralQ | Algorithm::QPi => lambda,
        Algorithm::ImportanceSampling => lambda * strategy.is_ratio_cap().map_or(ratio, |c| ratio.min(c)),
        Algorithm::TreeBackup => lambda * pi[action],
        Algorithm::Retrace => lambda * ratio.min(1.0),
    }
}

/// Literal expansion `Y = r_0 + γ Z(x'_0) + Σ_{s≥1} γ^s (Π_{i=1}^{s} C_i) δ_s`,
/// with every product recomputed from scratch for each `s`.
pub fn oracle_target(case: &RandomCase, strategy: &TraceStrategy) -> f64 {
    let seg = &case.segment;
    let eps = case.epsilon_pi;
    let g = case.gamma;
    let algo = strategy.algorithm();
    let idx = |s: &State| s.as_index().expect("tabular case");
    let q_on = |s: &State| case.online[idx(s)].clone();
    let q_tg = |s: &State| case.target[idx(s)].clone();
    let z = |s: &State, terminal: bool| -> f64 {
        if terminal {
            0.0
        } else if oracle_uses_max(algo) {
            max_of(&q_tg(s))
        } else {
            dot(&oracle_pi(&q_on(s), eps), &q_tg(s))
        }
    };

    let head = &seg[0];
    let mut y = head.reward + g * z(&head.next_state, head.terminal);
    for s in 1..seg.len() {
        if seg[..s].iter().any(|t| t.terminal) {
            break;
        }
        let mut product = 1.0;
        for t in &seg[1..=s] {
            let pi = oracle_pi(&q_on(&t.state), eps);
            product *= oracle_coefficient(strategy, &pi, t.behavior.probs(), t.action, &q_on(&t.state));
        }
        let t = &seg[s];
        let qt = q_tg(&t.state);
        let pi_t = oracle_pi(&q_on(&t.state), eps);
        let current = match algo {
            Algorithm::PengWilliamsQ => max_of(&qt),
            Algorithm::GeneralQ => dot(&pi_t, &qt),
            _ => qt[t.action],
        };
        let delta = t.reward + g * z(&t.next_state, t.terminal) - current;
        y += g.powi(s as i32) * product * delta;
    }
    y
}

pub fn oracle_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(Suite::Oracle);
    for i in 0..cases {
        let case = RandomCase::generate(&mut rng, 6, 4);
        for strategy in all_strategies(case.lambda) {
            let engine = case.engine_target(&strategy)?;
            let oracle = oracle_target(&case, &strategy);
            let err = (engine - oracle).abs();
            report.max_error = report.max_error.max(err);
            report.check(err < ORACLE_TOLERANCE, || {
                format!("case {i}, {strategy}: engine {engine} vs oracle {oracle}")
            });
        }
    }
    Ok(report)
}

/// With λ = 0 every strategy's target must equal `r + γ Z(x')` bit for bit.
pub fn lambda_zero_suite(seed: u64, heads: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(Suite::Oracle);
    for i in 0..heads {
        let mut case = RandomCase::generate(&mut rng, 6, 4);
        case.lambda = 0.0;
        let head = &case.segment[0];
        for strategy in all_strategies(0.0) {
            let engine = case.engine_target(&strategy)?;
            let next = &case.target[head.next_state.as_index().expect("tabular")];
            let z = if head.terminal {
                0.0
            } else if oracle_uses_max(strategy.algorithm()) {
                max_of(next)
            } else {
                let on = &case.online[head.next_state.as_index().expect("tabular")];
                dot(&oracle_pi(on, case.epsilon_pi), next)
            };
            let one_step = head.reward + case.gamma * z;
            let err = (engine - one_step).abs();
            report.max_error = report.max_error.max(err);
            report.check(engine == one_step, || {
                format!("head {i}, {strategy}: {engine} != one-step {one_step}")
            });
        }
    }
    Ok(report)
}

/// Outcome counts for the QM equivalence-class check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QmEquivalence {
    /// Inputs on which QM over IS, TB, QPi and Retrace were not all identical.
    pub class_mismatches: usize,
    /// For Watkins, P&W and General: inputs on which QM over that base differs
    /// from the shared IS/TB/QPi/Retrace target.
    pub distinct_inputs: [(Algorithm, usize); 3],
}

pub fn qm_equivalence(seed: u64, cases: usize) -> Result<QmEquivalence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let same = [
        Algorithm::ImportanceSampling,
        Algorithm::TreeBackup,
        Algorithm::QPi,
        Algorithm::Retrace,
    ];
    let other = [Algorithm::WatkinsQ, Algorithm::PengWilliamsQ, Algorithm::GeneralQ];
    let mut out = QmEquivalence {
        class_mismatches: 0,
        distinct_inputs: other.map(|a| (a, 0)),
    };
    for _ in 0..cases {
        let case = RandomCase::generate(&mut rng, 6, 4);
        let m = if rng.gen_bool(0.5) {
            MeasurementKind::Beta
        } else {
            MeasurementKind::Eta
        };
        let ys = same
            .iter()
            .map(|a| case.engine_target(&TraceStrategy::qm(*a, m, case.lambda)?))
            .collect::<Result<Vec<_>>>()?;
        if ys.iter().any(|y| y.to_bits() != ys[0].to_bits()) {
            out.class_mismatches += 1;
        }
        for (a, count) in out.distinct_inputs.iter_mut() {
            let y = case.engine_target(&TraceStrategy::qm(*a, m, case.lambda)?)?;
            if y != ys[0] {
                *count += 1;
            }
        }
    }
    Ok(out)
}

pub fn qm_equivalence_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let eq = qm_equivalence(seed, cases)?;
    let mut report = SuiteReport::new(Suite::Oracle);
    report.check(eq.class_mismatches == 0, || {
        format!("QM over IS/TB/QPi/Retrace disagreed on {} inputs", eq.class_mismatches)
    });
    for (a, count) in eq.distinct_inputs {
        report.check(count > 0, || format!("QM over {} never differed from the IS/TB/QPi/Retrace class", a.name()));
    }
    Ok(report)
}

/// Counts of bound-grid misclassifications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundsOutcome {
    pub cells: usize,
    pub beta_misclassified: usize,
    pub eta_misclassified: usize,
    pub beta_identity_failures: usize,
}

/// ε ∈ {0.01, 0.02, …, 0.50}.
pub fn epsilon_grid() -> impl Iterator<Item = f64> + Clone {
    (1..=50).map(|i| i as f64 / 100.0)
}

/// Exhaustive bound enumeration over `n ∈ 2..=10` and the ε grid squared.
pub fn bounds_outcome() -> BoundsOutcome {
    let mut out = BoundsOutcome::default();
    for n in 2..=10usize {
        let q_greedy_0: Vec<f64> = (0..n).map(|a| if a == 0 { 1.0 } else { 0.0 }).collect();
        let q_greedy_1: Vec<f64> = (0..n).map(|a| if a == 1 { 1.0 } else { 0.0 }).collect();
        for e_pi in epsilon_grid() {
            let pi = epsilon_greedy(&q_greedy_0, e_pi).expect("grid ε is valid");
            for e_mu in epsilon_grid() {
                out.cells += 1;
                let mu_same = epsilon_greedy(&q_greedy_0, e_mu).expect("grid ε is valid");
                let mu_diff = epsilon_greedy(&q_greedy_1, e_mu).expect("grid ε is valid");

                let beta = measure(MeasurementKind::Beta, &pi, &mu_same, 0).expect("same size");
                if classify_case(&beta) != PolicyCase::NearOnPolicy {
                    out.beta_misclassified += 1;
                }
                let identity = (e_mu - e_pi).abs() * (2 * n - 2) as f64 / n as f64;
                if (beta.value - identity).abs() > 1e-12 {
                    out.beta_identity_failures += 1;
                }
                let beta = measure(MeasurementKind::Beta, &pi, &mu_diff, 0).expect("same size");
                if classify_case(&beta) != PolicyCase::NearOffPolicy {
                    out.beta_misclassified += 1;
                }

                for a in 0..n {
                    // Same greedy action: `a` is greedy under both or neither.
                    let eta = measure(MeasurementKind::Eta, &pi, &mu_same, a).expect("in range");
                    if classify_case(&eta) != PolicyCase::NearOnPolicy {
                        out.eta_misclassified += 1;
                    }
                    // Different greedy actions: greedy under exactly one iff a ∈ {0, 1}.
                    let eta = measure(MeasurementKind::Eta, &pi, &mu_diff, a).expect("in range");
                    let expected = if a <= 1 {
                        PolicyCase::NearOffPolicy
                    } else {
                        PolicyCase::NearOnPolicy
                    };
                    if classify_case(&eta) != expected {
                        out.eta_misclassified += 1;
                    }
                }
            }
        }
    }
    out
}

pub fn bounds_suite() -> SuiteReport {
    let o = bounds_outcome();
    let mut report = SuiteReport::new(Suite::Bounds);
    report.checks = o.cells;
    if o.beta_misclassified > 0 {
        report.failures.push(format!("{} β misclassifications", o.beta_misclassified));
    }
    if o.eta_misclassified > 0 {
        report.failures.push(format!("{} η misclassifications", o.eta_misclassified));
    }
    if o.beta_identity_failures > 0 {
        report
            .failures
            .push(format!("{} cells break the same-greedy β identity", o.beta_identity_failures));
    }
    report
}

/// Largest relative error between analytic and central-difference gradients
/// for one network and sample. Coordinates whose ±h probes straddle a ReLU
/// kink are skipped, since the loss is not differentiable there.
pub fn gradient_check(net: &MlpQ, state: &State, action: usize, target: f64) -> Result<f64> {
    let (_, grad) = net.loss_gradient(state, action, target)?;
    let base = net.parameters();
    let x = state
        .as_features()
        .ok_or_else(|| Error::invalid("gradient check needs a feature vector"))?;
    let (inputs, hidden) = (net.input_dim(), net.hidden_dim());
    let pre = |p: &[f64], j: usize| -> f64 {
        let w = &p[j * inputs..(j + 1) * inputs];
        w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + p[hidden * inputs + j]
    };
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + FD_STEP;
        let kink_unit = if i < hidden * inputs {
            Some(i / inputs)
        } else if i < hidden * inputs + hidden {
            Some(i - hidden * inputs)
        } else {
            None
        };
        let up_pre = kink_unit.map(|j| pre(&p, j));
        probe.set_parameters(&p)?;
        let up = probe.loss(state, action, target)?;
        p[i] = base[i] - FD_STEP;
        let down_pre = kink_unit.map(|j| pre(&p, j));
        probe.set_parameters(&p)?;
        let down = probe.loss(state, action, target)?;
        if let (Some(a), Some(b)) = (up_pre, down_pre) {
            if (a > 0.0) != (b > 0.0) {
                continue;
            }
        }
        let fd = (up - down) / (2.0 * FD_STEP);
        let denom = grad[i].abs().max(fd.abs());
        if denom > 0.0 {
            worst = worst.max((grad[i] - fd).abs() / denom);
        }
    }
    Ok(worst)
}

pub fn gradients_suite(seed: u64, networks: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(Suite::Gradients);
    for i in 0..networks {
        let inputs = rng.gen_range(1..=8);
        let actions = rng.gen_range(2..=4);
        let net = MlpQ::new(inputs, MlpQ::DEFAULT_HIDDEN, actions, 1e-3, &mut rng)?;
        let x = State::Continuous((0..inputs).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let action = rng.gen_range(0..actions);
        let target = rng.gen_range(-5.0..5.0);
        let err = gradient_check(&net, &x, action, target)?;
        report.max_error = report.max_error.max(err);
        report.check(err < GRADIENT_TOLERANCE, || format!("network {i}: relative error {err:.3e}"));
    }
    Ok(report)
}

fn cliff_optimal_return() -> f64 {
    // Breadth-first search over the reward −1 moves; cliff moves only lead back
    // to the start and are never on a shortest path.
    let mut dist = vec![usize::MAX; ROWS * COLS];
    let mut queue = VecDeque::from([START]);
    dist[cliff_walking::cell_index(START.0, START.1)] = 0;
    while let Some(pos) = queue.pop_front() {
        let d = dist[cliff_walking::cell_index(pos.0, pos.1)];
        if pos == GOAL {
            return -(d as f64);
        }
        for a in 0..4 {
            let (next, reward, _) = transition(pos, a);
            let i = cliff_walking::cell_index(next.0, next.1);
            if reward == -1.0 && dist[i] == usize::MAX {
                dist[i] = d + 1;
                queue.push_back(next);
            }
        }
    }
    f64::NEG_INFINITY
}

pub fn envs_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(Suite::Envs);

    let best = cliff_optimal_return();
    report.check(best == -13.0, || format!("cliff optimal return {best}, expected -13"));

    let mut cliff = CliffWalking::with_horizon(usize::MAX);
    cliff.reset(&mut rng);
    let mut all_fall = true;
    for _ in 0..1000 {
        let r = cliff.step(RIGHT)?;
        all_fall &= r.reward == -100.0 && !r.terminal && r.next_state == State::Discrete(cliff_walking::cell_index(START.0, START.1));
    }
    report.check(all_fall, || "always-right from the start did not fall every step".into());

    let mut car = MountainCar::new();
    for _ in 0..50 {
        car.reset(&mut rng);
        loop {
            let r = car.step(rng.gen_range(0..3))?;
            let v = r.next_state.as_features().expect("continuous");
            report.check(
                (MIN_POSITION..=MAX_POSITION).contains(&v[0]) && (-MAX_SPEED..=MAX_SPEED).contains(&v[1]),
                || format!("mountain car left its box: {v:?}"),
            );
            if r.done() {
                break;
            }
        }
    }

    for kind in [EnvKind::CartPoleV1, EnvKind::CartPoleV2] {
        let horizon = kind.spec().max_episode_steps;
        let mut env = kind.make();
        for _ in 0..20 {
            env.reset(&mut rng);
            let mut len = 0;
            // Alternating pushes keep the pole up long enough to hit the cap.
            loop {
                let r = env.step(len % 2)?;
                len += 1;
                if r.done() {
                    break;
                }
            }
            report.check(len <= horizon, || format!("{} episode ran {len} > {horizon} steps", kind.name()));
        }
    }

    let mut a = CartPole::v1();
    let mut b = CartPole::v1();
    let start = [0.01, -0.02, 0.03, 0.04];
    a.reset(&mut rng);
    b.reset(&mut rng);
    a.set_state(start);
    b.set_state(start);
    for t in 0..30 {
        let ra = a.step(t % 2)?;
        let rb = b.step(t % 2)?;
        report.check(ra == rb, || "cartpole dynamics are not deterministic".into());
        if ra.done() {
            break;
        }
    }
    Ok(report)
}
