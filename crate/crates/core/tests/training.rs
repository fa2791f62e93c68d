use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdqn_core::agent::{run_trial, Agent, AgentConfig, Trainer};
use rdqn_core::envs::EnvKind;
use rdqn_core::policy::{epsilon_greedy, MeasurementKind};
use rdqn_core::qfunc::{decode_snapshot, encode_snapshot, QFunction, QNet, TabularQ};
use rdqn_core::replay::{read_dump, write_dump, Transition};
use rdqn_core::returns::{Algorithm, TraceStrategy};
use rdqn_core::verify::all_strategies;
use rdqn_core::State;

const STATES: usize = 8;
const ACTIONS: usize = 3;

fn random_table(rng: &mut ChaCha8Rng) -> TabularQ {
    let values = (0..STATES * ACTIONS).map(|_| rng.gen_range(-1.0..1.0)).collect();
    TabularQ::from_table(values, STATES, ACTIONS, 0.5).unwrap()
}

/// Random chained segments whose stored μ is ε-greedy over `q` with `eps`.
fn segments(rng: &mut ChaCha8Rng, q: &TabularQ, eps: f64, count: usize, k: usize) -> Vec<Vec<Transition>> {
    (0..count)
        .map(|_| {
            let mut x = rng.gen_range(0..STATES);
            let mut seg = Vec::new();
            for _ in 0..k {
                let mu = epsilon_greedy(&q.predict(&State::Discrete(x)).unwrap(), eps).unwrap();
                let action = mu.sample_with(rng.gen());
                let next = rng.gen_range(0..STATES);
                seg.push(Transition {
                    state: State::Discrete(x),
                    action,
                    reward: rng.gen_range(-1.0..1.0),
                    next_state: State::Discrete(next),
                    terminal: false,
                    behavior: mu,
                    episode_id: 0,
                    acting_q: None,
                });
                x = next;
            }
            seg
        })
        .collect()
}

fn agent_with(strategy: TraceStrategy, q: &TabularQ, epsilon_pi: f64) -> Agent {
    let mut config = AgentConfig::for_env(EnvKind::CliffWalking, strategy);
    config.epsilon_pi = epsilon_pi;
    config.gamma = 0.9;
    Agent::new(config, QNet::Tabular(q.clone())).unwrap()
}

#[test]
fn lambda_zero_update_equals_one_step_update() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = random_table(&mut rng);
    let segs = segments(&mut rng, &q, 0.3, 16, 6);
    let heads: Vec<Vec<Transition>> = segs.iter().map(|s| vec![s[0].clone()]).collect();
    for strategy in all_strategies(0.0) {
        let mut long = agent_with(strategy, &q, 0.01);
        let mut short = agent_with(strategy, &q, 0.01);
        let a = long.learner_update(&segs).unwrap();
        let b = short.learner_update(&heads).unwrap();
        assert_eq!(a.mean_loss, b.mean_loss, "{strategy}");
        assert_eq!(long.pair().online(), short.pair().online(), "{strategy}");
    }

    // With the max bootstrap the one-step update is the DQN update.
    let mut dqn = agent_with(AgentConfig::dqn_strategy(), &q, 0.01);
    let head = &segs[0][0];
    dqn.learner_update(&[vec![head.clone()]]).unwrap();
    let s = head.state.as_index().unwrap();
    let next = q.predict(&head.next_state).unwrap();
    let y = head.reward + 0.9 * next.iter().cloned().fold(f64::MIN, f64::max);
    let old = q.get(s, head.action).unwrap();
    let QNet::Tabular(updated) = dqn.pair().online() else { unreachable!() };
    assert_eq!(updated.get(s, head.action).unwrap(), old + 0.5 * (y - old));
}

#[test]
fn retrace_and_qm_coincide_on_policy() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let q = random_table(&mut rng);
    let eps = 0.2;
    let segs = segments(&mut rng, &q, eps, 32, 8);
    let mut retrace = agent_with(TraceStrategy::base(Algorithm::Retrace, 0.9).unwrap(), &q, eps);
    let r = retrace.learner_update(&segs).unwrap();
    for m in [MeasurementKind::Beta, MeasurementKind::Eta] {
        let mut qm = agent_with(TraceStrategy::qm(Algorithm::Retrace, m, 0.9).unwrap(), &q, eps);
        let s = qm.learner_update(&segs).unwrap();
        assert_eq!(r.mean_loss, s.mean_loss);
        assert_eq!(s.near_off, 0);
        assert_eq!(retrace.pair().online(), qm.pair().online());
    }
}

#[test]
fn zero_learning_rate_gives_flat_returns() {
    let strategy = TraceStrategy::base(Algorithm::Retrace, 0.9).unwrap();
    let mut config = AgentConfig::for_env(EnvKind::CliffWalking, strategy);
    config.learning_rate = 0.0;
    config.episodes = Some(300);
    config.max_episode_steps = Some(200);
    let mut trainer = Trainer::new(config, 5).unwrap();
    let initial = trainer.agent().pair().online().clone();
    while trainer.episodes_completed() < 300 {
        trainer.step().unwrap();
    }
    assert_eq!(trainer.agent().pair().online(), &initial);
    let log = trainer.log().clone();
    let (first, second) = log.episode_returns.split_at(log.episode_returns.len() / 2);
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var / v.len() as f64)
    };
    let ((m1, v1), (m2, v2)) = (stats(first), stats(second));
    assert!((m1 - m2).abs() < 3.0 * (v1 + v2).sqrt(), "{m1} vs {m2}");
}

#[test]
fn cliff_retrace_escapes_the_cliff() {
    let strategy = TraceStrategy::base(Algorithm::Retrace, 0.9).unwrap();
    let mut config = AgentConfig::for_env(EnvKind::CliffWalking, strategy);
    config.episodes = Some(200);
    let log = run_trial(&config, 0).unwrap();
    let tail = &log.episode_returns[log.episode_returns.len() - 20..];
    let mean = tail.iter().sum::<f64>() / 20.0;
    assert!(mean > -100.0, "last-20 mean {mean}");
}

#[test]
fn mlp_trial_is_deterministic() {
    let strategy = TraceStrategy::qm(Algorithm::Retrace, MeasurementKind::Beta, 0.9).unwrap();
    let mut config = AgentConfig::for_env(EnvKind::CartPoleV1, strategy);
    config.total_steps = Some(3000);
    config.warmup = 500;
    config.eval_episodes = 1;
    let a = run_trial(&config, 9).unwrap();
    let b = run_trial(&config, 9).unwrap();
    assert_eq!(a, b);
    assert!(!a.epochs.is_empty());
}

#[test]
fn trained_state_round_trips_through_snapshot_and_dump() {
    let strategy = TraceStrategy::base(Algorithm::TreeBackup, 0.8).unwrap();
    for env in [EnvKind::CliffWalking, EnvKind::CartPoleV1] {
        let mut config = AgentConfig::for_env(env, strategy);
        config.warmup = 100;
        config.debug_store_q = true;
        let mut trainer = Trainer::new(config, 3).unwrap();
        for _ in 0..600 {
            trainer.step().unwrap();
        }
        let online = trainer.agent().pair().online();
        assert_eq!(&decode_snapshot(&encode_snapshot(online)).unwrap(), online);

        let mut dump = Vec::new();
        write_dump(&mut dump, trainer.memory().iter()).unwrap();
        let back = read_dump(&dump[..]).unwrap();
        assert_eq!(back.len(), trainer.memory().len());
        assert!(back.iter().zip(trainer.memory().iter()).all(|(a, b)| a == b));
    }
}
