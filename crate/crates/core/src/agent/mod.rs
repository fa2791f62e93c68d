//! The training loop: act ε-greedily, store μ, sample sequential segments,
//! regress the head of each segment onto its multi-step target, and sync the
//! target network every F steps.

mod config;
mod schedule;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use config::{AgentConfig, Approximator};
pub use schedule::{EpsilonSchedule, ScheduleState, SwitchPeriod};

use crate::envs::{Environment, ObservationKind, StateEncoder};
use crate::error::{Error, Result};
use crate::policy::{classify_case, epsilon_greedy, measure, PolicyCase, PolicyDistribution};
use crate::qfunc::{MlpQ, QFunction, QNet, TabularQ, TargetPair};
use crate::replay::{ReplayMemory, Transition};
use crate::returns::{compute_target, TargetParams};
use crate::rng::{stream, Stream};
use crate::State;

/// Samples an action from the ε-greedy distribution over `q_row`.
pub fn select_action_from_q<R: Rng + ?Sized>(
    q_row: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> Result<(usize, PolicyDistribution)> {
    let dist = epsilon_greedy(q_row, epsilon)?;
    let action = dist.sample_with(rng.gen::<f64>());
    Ok((action, dist))
}

/// Returns the sampled action and the full distribution it came from.
pub fn select_action<Q: QFunction + ?Sized, R: Rng + ?Sized>(
    q_online: &Q,
    state: &State,
    epsilon: f64,
    rng: &mut R,
) -> Result<(usize, PolicyDistribution)> {
    select_action_from_q(&q_online.predict(state)?, epsilon, rng)
}

/// Result of one learner update over a minibatch of segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub mean_loss: f64,
    /// Mean head-transition measurement across the batch.
    pub mean_measurement: f64,
    pub near_on: u32,
    pub near_off: u32,
}

/// Online/target pair plus the parameters for target computation.
#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    pair: TargetPair<QNet>,
    params: TargetParams,
}

impl Agent {
    pub fn new(config: AgentConfig, q: QNet) -> Result<Self> {
        let params = TargetParams::new(config.gamma, config.epsilon_pi)?;
        let pair = TargetPair::new(q, config.sync_period)?;
        Ok(Self {
            config,
            pair,
            params,
        })
    }

    /// Builds the Q-function the config asks for, initialised from the trial seed.
    pub fn from_config(config: AgentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let input = config
            .encoder()
            .output_kind(config.env.spec().observation)?;
        let actions = config.env.spec().num_actions;
        let q = match (config.approximator, input) {
            (Approximator::Tabular, ObservationKind::Discrete { num_states }) => {
                QNet::Tabular(TabularQ::zeros(num_states, actions, config.learning_rate)?)
            }
            (Approximator::Mlp { hidden }, ObservationKind::Continuous { dim }) => {
                let mut rng = stream(seed, Stream::Init);
                QNet::Mlp(MlpQ::new(dim, hidden, actions, config.learning_rate, &mut rng)?)
            }
            (a, k) => {
                return Err(Error::invalid(format!(
                    "approximator {a:?} cannot consume observations {k:?}"
                )))
            }
        };
        Self::new(config, q)
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn pair(&self) -> &TargetPair<QNet> {
        &self.pair
    }

    pub fn pair_mut(&mut self) -> &mut TargetPair<QNet> {
        &mut self.pair
    }

    pub fn target_params(&self) -> &TargetParams {
        &self.params
    }

    /// Computes every segment's target with the current parameters, then takes
    /// one training step per segment head. Returns the mean pre-update loss.
    pub fn learner_update<T: std::borrow::Borrow<Transition>>(
        &mut self,
        segments: &[Vec<T>],
    ) -> Result<UpdateStats> {
        if segments.is_empty() {
            return Err(Error::invalid("learner update needs at least one segment"));
        }
        let kind = self
            .config
            .strategy
            .measurement()
            .unwrap_or(self.config.diagnostic_measurement);
        let mut targets = Vec::with_capacity(segments.len());
        let mut stats = UpdateStats {
            mean_loss: 0.0,
            mean_measurement: 0.0,
            near_on: 0,
            near_off: 0,
        };
        for seg in segments {
            let target = compute_target(
                seg,
                &self.config.strategy,
                self.pair.online(),
                self.pair.target(),
                &self.params,
            )?;
            let head = seg[0].borrow();
            let pi = epsilon_greedy(&self.pair.online().predict(&head.state)?, self.params.epsilon_pi)?;
            let m = measure(kind, &pi, &head.behavior, head.action)?;
            stats.mean_measurement += m.value;
            match classify_case(&m) {
                PolicyCase::NearOnPolicy => stats.near_on += 1,
                PolicyCase::NearOffPolicy => stats.near_off += 1,
            }
            targets.push(target.y);
        }
        for (seg, y) in segments.iter().zip(targets) {
            let head = seg[0].borrow();
            stats.mean_loss += self.pair.train_step(&head.state, head.action, y)?;
        }
        let n = segments.len() as f64;
        stats.mean_loss /= n;
        stats.mean_measurement /= n;
        Ok(stats)
    }
}

/// Per-epoch summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Cumulative environment steps at the end of the epoch.
    pub steps: u64,
    /// Mean return of training episodes that finished during the epoch.
    pub mean_return: f64,
    /// Mean learner loss over the epoch (NaN before the first update).
    pub mean_loss: f64,
    /// Fraction of updated segment heads classified near on-policy (NaN if none).
    pub frac_near_on_policy: f64,
    /// Mean return of greedy evaluation episodes at the end of the epoch.
    pub eval_return: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRecord {
    pub step: u64,
    pub loss: f64,
    pub measurement: f64,
    pub near_on: u32,
    pub near_off: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    pub episode_returns: Vec<f64>,
    /// Behavior ε in force at the start of each episode.
    pub episode_epsilons: Vec<f64>,
    pub updates: Vec<UpdateRecord>,
}

impl TrialLog {
    /// Mean training return over the last `window` epochs.
    pub fn final_return(&self, window: usize) -> f64 {
        tail_mean(self.epochs.iter().map(|e| e.mean_return), window)
    }

    pub fn final_eval_return(&self, window: usize) -> f64 {
        tail_mean(self.epochs.iter().map(|e| e.eval_return), window)
    }
}

fn tail_mean(values: impl DoubleEndedIterator<Item = f64>, window: usize) -> f64 {
    let tail: Vec<f64> = values.rev().take(window).collect();
    if tail.is_empty() {
        return f64::NAN;
    }
    tail.iter().sum::<f64>() / tail.len() as f64
}

#[derive(Debug, Default)]
struct EpochAccumulator {
    returns: Vec<f64>,
    loss_sum: f64,
    updates: u64,
    near_on: u64,
    near_off: u64,
}

/// What happened on one call to [`Trainer::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub global_step: u64,
    pub reward: f64,
    pub synced: bool,
    pub update: Option<UpdateStats>,
    /// Return of the episode if it ended on this step.
    pub episode_return: Option<f64>,
    pub epoch_closed: bool,
}

/// Step-by-step driver for one seeded trial.
pub struct Trainer {
    agent: Agent,
    memory: ReplayMemory,
    env: Box<dyn Environment>,
    eval_env: Box<dyn Environment>,
    encoder: StateEncoder,
    schedule: ScheduleState,
    rng_schedule: ChaCha8Rng,
    rng_act: ChaCha8Rng,
    rng_env: ChaCha8Rng,
    rng_replay: ChaCha8Rng,
    rng_eval: ChaCha8Rng,
    state: Option<State>,
    episode_id: u64,
    episode_return: f64,
    global_step: u64,
    epoch: EpochAccumulator,
    log: TrialLog,
}

fn make_env(config: &AgentConfig) -> Box<dyn Environment> {
    use crate::envs::{CartPole, CliffWalking, EnvKind, MountainCar};
    match (config.env, config.max_episode_steps) {
        (kind, None) => kind.make(),
        (EnvKind::CartPoleV1, Some(t)) => Box::new(CartPole::with_horizon("cartpole-v1", t)),
        (EnvKind::CartPoleV2, Some(t)) => Box::new(CartPole::with_horizon("cartpole-v2", t)),
        (EnvKind::MountainCar, Some(t)) => Box::new(MountainCar::with_horizon(t)),
        (EnvKind::CliffWalking, Some(t)) => Box::new(CliffWalking::with_horizon(t)),
    }
}

impl Trainer {
    pub fn new(config: AgentConfig, seed: u64) -> Result<Self> {
        let agent = Agent::from_config(config.clone(), seed)?;
        let mut rng_schedule = stream(seed, Stream::Schedule);
        let schedule = config.schedule.start(&mut rng_schedule);
        Ok(Self {
            memory: ReplayMemory::new(config.capacity)?,
            env: make_env(&config),
            eval_env: make_env(&config),
            encoder: config.encoder(),
            schedule,
            rng_schedule,
            rng_act: stream(seed, Stream::Acting),
            rng_env: stream(seed, Stream::Environment),
            rng_replay: stream(seed, Stream::Replay),
            rng_eval: stream(seed, Stream::Evaluation),
            state: None,
            episode_id: 0,
            episode_return: 0.0,
            global_step: 0,
            epoch: EpochAccumulator::default(),
            log: TrialLog {
                seed,
                epochs: Vec::new(),
                episode_returns: Vec::new(),
                episode_epsilons: Vec::new(),
                updates: Vec::new(),
            },
            agent,
        })
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn global_step(&self) -> u64 {
        self.global_step
    }

    pub fn episodes_completed(&self) -> usize {
        self.log.episode_returns.len()
    }

    pub fn log(&self) -> &TrialLog {
        &self.log
    }

    fn config(&self) -> &AgentConfig {
        &self.agent.config
    }

    fn start_episode(&mut self) -> Result<State> {
        self.schedule
            .on_episode_start(&mut self.rng_schedule, self.global_step);
        self.log.episode_epsilons.push(self.schedule.epsilon());
        let raw = self.env.reset(&mut self.rng_env);
        self.episode_return = 0.0;
        self.encoder.encode(&raw)
    }

    /// Advances one environment step, including any learner update and sync.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let state = match self.state.take() {
            Some(s) => s,
            None => self.start_episode()?,
        };
        self.schedule.on_step(&mut self.rng_schedule, self.global_step);
        let epsilon = self.schedule.epsilon();
        let q_row = self.agent.pair.online().predict(&state)?;
        let (action, behavior) = select_action_from_q(&q_row, epsilon, &mut self.rng_act)?;
        let result = self.env.step(action)?;
        let next_state = self.encoder.encode(&result.next_state)?;
        self.memory.push(Transition {
            state,
            action,
            reward: result.reward,
            next_state: next_state.clone(),
            terminal: result.terminal,
            behavior,
            episode_id: self.episode_id,
            acting_q: self.config().debug_store_q.then_some(q_row),
        })?;
        self.episode_return += result.reward;
        self.global_step += 1;

        let mut update = None;
        if self.global_step > self.config().warmup {
            let (batch, k) = (self.config().batch_size, self.config().segment_len);
            let segments = self.memory.sample_segments(batch, k, &mut self.rng_replay)?;
            let stats = self.agent.learner_update(&segments)?;
            self.epoch.loss_sum += stats.mean_loss;
            self.epoch.updates += 1;
            self.epoch.near_on += u64::from(stats.near_on);
            self.epoch.near_off += u64::from(stats.near_off);
            self.log.updates.push(UpdateRecord {
                step: self.global_step,
                loss: stats.mean_loss,
                measurement: stats.mean_measurement,
                near_on: stats.near_on,
                near_off: stats.near_off,
            });
            update = Some(stats);
        }
        let synced = self.agent.pair.maybe_sync(self.global_step);

        let mut episode_return = None;
        if result.done() {
            self.log.episode_returns.push(self.episode_return);
            self.epoch.returns.push(self.episode_return);
            episode_return = Some(self.episode_return);
            self.episode_id += 1;
        } else {
            self.state = Some(next_state);
        }

        let epoch_closed = self.global_step % self.config().epoch_steps == 0;
        if epoch_closed {
            self.close_epoch()?;
        }
        Ok(StepOutcome {
            global_step: self.global_step,
            reward: result.reward,
            synced,
            update,
            episode_return,
            epoch_closed,
        })
    }

    fn close_epoch(&mut self) -> Result<()> {
        let acc = std::mem::take(&mut self.epoch);
        if acc.returns.is_empty() {
            // Only possible for a trailing partial epoch cut mid-episode.
            return Ok(());
        }
        let mean = |sum: f64, n: u64| if n == 0 { f64::NAN } else { sum / n as f64 };
        let eval_return = self.evaluate()?;
        self.log.epochs.push(EpochRecord {
            epoch: self.log.epochs.len() + 1,
            steps: self.global_step,
            mean_return: acc.returns.iter().sum::<f64>() / acc.returns.len() as f64,
            mean_loss: mean(acc.loss_sum, acc.updates),
            frac_near_on_policy: mean(acc.near_on as f64, acc.near_on + acc.near_off),
            eval_return,
        });
        Ok(())
    }

    /// Mean return of greedy (argmax online Q) episodes on a separate env copy.
    pub fn evaluate(&mut self) -> Result<f64> {
        let episodes = self.config().eval_episodes;
        if episodes == 0 {
            return Ok(f64::NAN);
        }
        let mut total = 0.0;
        for _ in 0..episodes {
            let mut state = self.encoder.encode(&self.eval_env.reset(&mut self.rng_eval))?;
            loop {
                let q = self.agent.pair.online().predict(&state)?;
                let r = self.eval_env.step(crate::policy::argmax(&q))?;
                total += r.reward;
                if r.done() {
                    break;
                }
                state = self.encoder.encode(&r.next_state)?;
            }
        }
        Ok(total / episodes as f64)
    }

    fn budget_exhausted(&self) -> bool {
        let c = self.config();
        c.total_steps.is_some_and(|t| self.global_step >= t)
            || c.episodes.is_some_and(|m| self.episodes_completed() >= m)
    }

    /// Runs until the episode or step budget is spent and returns the log.
    pub fn run(mut self) -> Result<TrialLog> {
        while !self.budget_exhausted() {
            self.step()?;
        }
        if self.global_step % self.config().epoch_steps != 0 {
            self.close_epoch()?;
        }
        Ok(self.log)
    }
}

/// Runs one seeded trial to completion.
pub fn run_trial(config: &AgentConfig, seed: u64) -> Result<TrialLog> {
    Trainer::new(config.clone(), seed)?.run()
}
