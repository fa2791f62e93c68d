//! Plain-text experiment configs, multi-seed runs and CSV reports.
//!
//! A config is a list of `key = value` lines. `#` starts a comment. Keys:
//!
//! | key | value |
//! |-----|-------|
//! | `name` | label used in summaries (default: the strategy's label) |
//! | `env` | `cartpole-v1`, `cartpole-v2`, `mountaincar`, `cliffwalking` (required) |
//! | `strategy` | `watkins`, `pw`, `general`, `is`, `tb`, `qpi`, `retrace`, `qm` (required) |
//! | `base` | base strategy for `qm` (default `retrace`) |
//! | `measurement` | `beta` or `eta`; required for `qm`, rejected otherwise |
//! | `lambda` | λ in `[0, 1]` (default 0.9) |
//! | `is_ratio_cap` | positive cap on the importance ratio (default: none) |
//! | `gamma`, `segment_length`, `batch_size`, `learning_rate`, `sync_period` | numbers |
//! | `episodes`, `total_steps`, `max_episode_steps`, `epoch_steps`, `warmup`, `capacity` | integers |
//! | `epsilon_pi` | ε of the target policy |
//! | `schedule` | `switching` (default), `linear`, `constant` |
//! | `epsilon_values`, `epsilon_probs` | comma lists for `switching` |
//! | `switch_period` | `episode` or `step` |
//! | `epsilon_start`, `epsilon_end`, `decay_steps` | for `linear` |
//! | `epsilon` | for `constant` |
//! | `approximator` | `tabular` or `mlp` |
//! | `hidden`, `grid_bins`, `eval_episodes` | integers |
//! | `diagnostic_measurement` | `beta` or `eta` |
//! | `seeds` | comma list of seeds or ranges, e.g. `0-9` or `1,4,7` (default `0-9`) |
//! | `output_dir` | directory for CSVs, relative to `$RDQN_OUTPUT_ROOT` if set |
//!
//! Output files, written by [`run_experiment`]:
//!
//! * `trial_seed<seed>.csv`: `epoch,mean_return,mean_loss,frac_near_on_policy,eval_return`
//! * `summary.csv`: `method,mean_final_return,std_final_return,mean_final_eval,std_final_eval,trials`

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::agent::{run_trial, AgentConfig, Approximator, EpsilonSchedule, SwitchPeriod, TrialLog};
use crate::envs::EnvKind;
use crate::error::{Error, Result};
use crate::policy::MeasurementKind;
use crate::returns::{Algorithm, StrategyKind, TraceStrategy};

/// Environment variable naming the root for relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "RDQN_OUTPUT_ROOT";
/// Number of trailing epochs averaged into a trial's final score.
pub const FINAL_WINDOW: usize = 5;
pub const DEFAULT_LAMBDA: f64 = 0.9;
pub const TRIAL_CSV_HEADER: &str = "epoch,mean_return,mean_loss,frac_near_on_policy,eval_return";
pub const SUMMARY_CSV_HEADER: &str =
    "method,mean_final_return,std_final_return,mean_final_eval,std_final_eval,trials";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub agent: AgentConfig,
    pub seeds: Vec<u64>,
    /// Output directory as written in the config (or derived from the name).
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Output directory with `$RDQN_OUTPUT_ROOT` applied to relative paths.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output_dir.is_relative() => Path::new(&root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }
}

const KEYS: &[&str] = &[
    "name",
    "env",
    "strategy",
    "base",
    "measurement",
    "lambda",
    "is_ratio_cap",
    "gamma",
    "segment_length",
    "batch_size",
    "learning_rate",
    "sync_period",
    "episodes",
    "total_steps",
    "max_episode_steps",
    "epoch_steps",
    "warmup",
    "capacity",
    "epsilon_pi",
    "schedule",
    "epsilon_values",
    "epsilon_probs",
    "switch_period",
    "epsilon_start",
    "epsilon_end",
    "decay_steps",
    "epsilon",
    "approximator",
    "hidden",
    "grid_bins",
    "eval_episodes",
    "diagnostic_measurement",
    "seeds",
    "output_dir",
];

struct Entries {
    map: HashMap<&'static str, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.map.get(key).map(|(l, _)| *l)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| {
                Error::config(Some(line), format!("{key}: expected {what}, got {v:?}"))
            }),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parse(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(Error::config(
                self.line(key),
                format!("{key}: expected a finite number"),
            )),
            other => Ok(other),
        }
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some((line, v)) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| {
                        Error::config(Some(line), format!("{key}: bad number {:?}", s.trim()))
                    })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn measurement_from(name: &str) -> Option<MeasurementKind> {
    match name {
        "beta" => Some(MeasurementKind::Beta),
        "eta" => Some(MeasurementKind::Eta),
        _ => None,
    }
}

fn parse_seeds(line: usize, text: &str) -> Result<Vec<u64>> {
    let bad = |part: &str| Error::config(Some(line), format!("seeds: bad entry {part:?}"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once('-') {
            let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
            if a > b || b - a >= 1_000_000 {
                return Err(bad(part));
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        return Err(Error::config(Some(line), "seeds: duplicate seed"));
    }
    Ok(seeds)
}

/// Parses and validates a `key = value` experiment config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::config(Some(line), format!("expected `key = value`, got {content:?}")))?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| Error::config(Some(line), format!("unknown key {key:?}")))?;
        if value.is_empty() {
            return Err(Error::config(Some(line), format!("{key}: missing value")));
        }
        if let Some((first, _)) = map.insert(*known, (line, value.to_string())) {
            return Err(Error::config(
                Some(line),
                format!("duplicate key {key:?} (first set on line {first})"),
            ));
        }
    }
    let e = Entries { map };

    let (env_line, env_name) = e
        .raw("env")
        .ok_or_else(|| Error::config(None, "missing required key \"env\""))?;
    let env = EnvKind::from_name(env_name)
        .ok_or_else(|| Error::config(Some(env_line), format!("env: unknown environment {env_name:?}")))?;

    let strategy = parse_strategy(&e)?;
    let mut agent = AgentConfig::for_env(env, strategy);
    apply_overrides(&e, &mut agent)?;
    agent.validate().map_err(|err| Error::config(None, err.to_string()))?;

    let name = match e.raw("name") {
        Some((_, n)) => n.to_string(),
        None => strategy.to_string(),
    };
    let seeds = match e.raw("seeds") {
        Some((line, v)) => parse_seeds(line, v)?,
        None => (0..10).collect(),
    };
    let output_dir = match e.raw("output_dir") {
        Some((_, v)) => PathBuf::from(v),
        None => PathBuf::from(format!("runs/{}", sanitize(&name))),
    };
    Ok(ExperimentConfig {
        name,
        agent,
        seeds,
        output_dir,
    })
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn parse_strategy(e: &Entries) -> Result<TraceStrategy> {
    let (line, name) = e
        .raw("strategy")
        .ok_or_else(|| Error::config(None, "missing required key \"strategy\""))?;
    let lambda = e.float("lambda")?.unwrap_or(DEFAULT_LAMBDA);
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::config(
            e.line("lambda"),
            format!("lambda: {lambda} is outside [0, 1]"),
        ));
    }
    let measurement = match e.raw("measurement") {
        None => None,
        Some((l, m)) => Some(measurement_from(m).ok_or_else(|| {
            Error::config(Some(l), format!("measurement: expected beta or eta, got {m:?}"))
        })?),
    };
    let kind = if name == "qm" {
        let base = match e.raw("base") {
            None => Algorithm::Retrace,
            Some((l, b)) => Algorithm::from_name(b)
                .ok_or_else(|| Error::config(Some(l), format!("base: unknown strategy {b:?}")))?,
        };
        let measurement = measurement.ok_or_else(|| {
            Error::config(Some(line), "strategy qm requires the key \"measurement\"")
        })?;
        StrategyKind::Qm { base, measurement }
    } else {
        let algorithm = Algorithm::from_name(name)
            .ok_or_else(|| Error::config(Some(line), format!("strategy: unknown strategy {name:?}")))?;
        for key in ["measurement", "base"] {
            if let Some(l) = e.line(key) {
                return Err(Error::config(Some(l), format!("{key} is only valid with strategy qm")));
            }
        }
        StrategyKind::Base(algorithm)
    };
    let strategy = TraceStrategy::new(kind, lambda).map_err(|err| Error::config(Some(line), err.to_string()))?;
    let cap = e.float("is_ratio_cap")?;
    strategy
        .with_is_ratio_cap(cap)
        .map_err(|err| Error::config(e.line("is_ratio_cap"), err.to_string()))
}

fn apply_overrides(e: &Entries, c: &mut AgentConfig) -> Result<()> {
    macro_rules! set {
        ($key:literal, $field:expr, $ty:ty, $what:literal) => {
            if let Some(v) = e.parse::<$ty>($key, $what)? {
                $field = v;
            }
        };
    }
    if let Some(v) = e.float("gamma")? {
        c.gamma = v;
    }
    if let Some(v) = e.float("learning_rate")? {
        c.learning_rate = v;
    }
    if let Some(v) = e.float("epsilon_pi")? {
        c.epsilon_pi = v;
    }
    set!("segment_length", c.segment_len, usize, "a positive integer");
    set!("batch_size", c.batch_size, usize, "a positive integer");
    set!("sync_period", c.sync_period, u64, "a positive integer");
    set!("epoch_steps", c.epoch_steps, u64, "a positive integer");
    set!("warmup", c.warmup, u64, "a nonnegative integer");
    set!("capacity", c.capacity, usize, "a positive integer");
    set!("grid_bins", c.grid_bins, usize, "a positive integer");
    set!("eval_episodes", c.eval_episodes, usize, "a nonnegative integer");
    if let Some(v) = e.parse::<usize>("episodes", "a positive integer")? {
        c.episodes = Some(v);
        if e.line("total_steps").is_none() {
            c.total_steps = None;
        }
    }
    if let Some(v) = e.parse::<u64>("total_steps", "a positive integer")? {
        c.total_steps = Some(v);
        if e.line("episodes").is_none() {
            c.episodes = None;
        }
    }
    if let Some(v) = e.parse::<usize>("max_episode_steps", "a positive integer")? {
        c.max_episode_steps = Some(v);
    }
    if let Some((l, v)) = e.raw("diagnostic_measurement") {
        c.diagnostic_measurement = measurement_from(v).ok_or_else(|| {
            Error::config(Some(l), format!("diagnostic_measurement: expected beta or eta, got {v:?}"))
        })?;
    }
    if let Some((l, v)) = e.raw("approximator") {
        c.approximator = match v {
            "tabular" => Approximator::Tabular,
            "mlp" => Approximator::Mlp {
                hidden: crate::qfunc::MlpQ::DEFAULT_HIDDEN,
            },
            _ => {
                return Err(Error::config(
                    Some(l),
                    format!("approximator: expected tabular or mlp, got {v:?}"),
                ))
            }
        };
    }
    if let Some(h) = e.parse::<usize>("hidden", "a positive integer")? {
        match &mut c.approximator {
            Approximator::Mlp { hidden } => *hidden = h,
            Approximator::Tabular => {
                return Err(Error::config(e.line("hidden"), "hidden requires approximator = mlp"))
            }
        }
    }
    apply_schedule(e, c)
}

fn apply_schedule(e: &Entries, c: &mut AgentConfig) -> Result<()> {
    let kind = e.raw("schedule").map(|(_, v)| v).unwrap_or("switching");
    let allowed: &[&str] = match kind {
        "switching" => &["epsilon_values", "epsilon_probs", "switch_period"],
        "linear" => &["epsilon_start", "epsilon_end", "decay_steps"],
        "constant" => &["epsilon"],
        other => {
            return Err(Error::config(
                e.line("schedule"),
                format!("schedule: expected switching, linear or constant, got {other:?}"),
            ))
        }
    };
    for key in [
        "epsilon_values",
        "epsilon_probs",
        "switch_period",
        "epsilon_start",
        "epsilon_end",
        "decay_steps",
        "epsilon",
    ] {
        if !allowed.contains(&key) {
            if let Some(l) = e.line(key) {
                return Err(Error::config(
                    Some(l),
                    format!("{key} does not apply to schedule {kind}"),
                ));
            }
        }
    }
    let missing = |key: &str| Error::config(e.line("schedule"), format!("schedule {kind} requires {key:?}"));
    c.schedule = match kind {
        "switching" => {
            let EpsilonSchedule::SwitchingRandom {
                values,
                probs,
                switch_period,
            } = EpsilonSchedule::default()
            else {
                unreachable!("default schedule is switching")
            };
            let switch_period = match e.raw("switch_period") {
                None => switch_period,
                Some((_, "episode")) => SwitchPeriod::Episode,
                Some((_, "step")) => SwitchPeriod::Step,
                Some((l, v)) => {
                    return Err(Error::config(
                        Some(l),
                        format!("switch_period: expected episode or step, got {v:?}"),
                    ))
                }
            };
            EpsilonSchedule::SwitchingRandom {
                values: e.floats("epsilon_values")?.unwrap_or(values),
                probs: e.floats("epsilon_probs")?.unwrap_or(probs),
                switch_period,
            }
        }
        "linear" => EpsilonSchedule::LinearDecay {
            start: e.float("epsilon_start")?.ok_or_else(|| missing("epsilon_start"))?,
            end: e.float("epsilon_end")?.ok_or_else(|| missing("epsilon_end"))?,
            decay_steps: e
                .parse("decay_steps", "a positive integer")?
                .ok_or_else(|| missing("decay_steps"))?,
        },
        _ => EpsilonSchedule::constant(e.float("epsilon")?.ok_or_else(|| missing("epsilon"))?),
    };
    Ok(())
}

/// One method's aggregate over its seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub mean_final_return: f64,
    pub std_final_return: f64,
    pub mean_final_eval: f64,
    pub std_final_eval: f64,
    pub trials: usize,
}

/// Arithmetic mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl SummaryRow {
    pub fn from_logs(method: &str, logs: &[TrialLog]) -> Self {
        let finals: Vec<f64> = logs.iter().map(|l| l.final_return(FINAL_WINDOW)).collect();
        let evals: Vec<f64> = logs.iter().map(|l| l.final_eval_return(FINAL_WINDOW)).collect();
        let (mean_final_return, std_final_return) = mean_std(&finals);
        let (mean_final_eval, std_final_eval) = mean_std(&evals);
        SummaryRow {
            method: method.to_string(),
            mean_final_return,
            std_final_return,
            mean_final_eval,
            std_final_eval,
            trials: logs.len(),
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.method.replace(',', ";"),
            self.mean_final_return,
            self.std_final_return,
            self.mean_final_eval,
            self.std_final_eval,
            self.trials
        )
    }
}

pub fn trial_csv(log: &TrialLog) -> String {
    let mut out = String::from(TRIAL_CSV_HEADER);
    out.push('\n');
    for e in &log.epochs {
        writeln!(
            out,
            "{},{},{},{},{}",
            e.epoch, e.mean_return, e.mean_loss, e.frac_near_on_policy, e.eval_return
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn trial_file_name(seed: u64) -> String {
    format!("trial_seed{seed}.csv")
}

/// Runs every seed in parallel, returning logs in seed-list order.
pub fn run_trials(config: &AgentConfig, seeds: &[u64]) -> Result<Vec<TrialLog>> {
    config.validate()?;
    seeds
        .par_iter()
        .map(|&seed| {
            run_trial(config, seed).map_err(|e| Error::Trial {
                seed,
                source: Box::new(e),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: SummaryRow,
    pub logs: Vec<TrialLog>,
    pub output_dir: PathBuf,
}

/// Runs all seeds and writes one trial CSV per seed plus `summary.csv`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let dir = config.resolved_output_dir();
    fs::create_dir_all(&dir)?;
    let logs = run_trials(&config.agent, &config.seeds)?;
    for log in &logs {
        fs::write(dir.join(trial_file_name(log.seed)), trial_csv(log))?;
    }
    let summary = SummaryRow::from_logs(&config.name, &logs);
    fs::write(dir.join("summary.csv"), summary_csv(std::slice::from_ref(&summary)))?;
    Ok(ExperimentOutput {
        summary,
        logs,
        output_dir: dir,
    })
}

/// Runs several experiments and renders a fixed-width comparison table.
pub fn compare(configs: &[ExperimentConfig]) -> Result<(Vec<SummaryRow>, String)> {
    let mut rows = Vec::with_capacity(configs.len());
    for c in configs {
        rows.push(run_experiment(c)?.summary);
    }
    Ok((rows.clone(), render_table(&rows)))
}

pub fn render_table(rows: &[SummaryRow]) -> String {
    let width = rows.iter().map(|r| r.method.len()).max().unwrap_or(0).max(6);
    let mut out = format!(
        "{:<width$}  {:>22}  {:>22}  {:>6}\n",
        "method", "final return", "greedy eval", "trials"
    );
    for r in rows {
        writeln!(
            out,
            "{:<width$}  {:>10.3} ± {:>9.3}  {:>10.3} ± {:>9.3}  {:>6}",
            r.method, r.mean_final_return, r.std_final_return, r.mean_final_eval, r.std_final_eval, r.trials
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_text(text: &str) -> String {
        parse_config(text).unwrap_err().to_string()
    }

    #[test]
    fn parses_qm_example() {
        let c = parse_config(
            "env = cliffwalking\nstrategy = qm\nbase = retrace\nmeasurement = eta\nlambda = 0.9",
        )
        .unwrap();
        assert_eq!(
            c.agent.strategy,
            TraceStrategy::qm(Algorithm::Retrace, MeasurementKind::Eta, 0.9).unwrap()
        );
        assert_eq!(c.agent.env, EnvKind::CliffWalking);
        assert_eq!(c.seeds, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn qm_without_measurement_names_the_key() {
        let msg = err_text("env = cliffwalking\nstrategy = qm");
        assert!(msg.contains("measurement"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn lambda_out_of_range() {
        let msg = err_text("env = cliffwalking\nstrategy = retrace\nlambda = 1.5");
        assert!(msg.contains("lambda") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn rejects_unknown_duplicate_and_mistyped() {
        assert!(err_text("env = cliffwalking\nstrategy = tb\nfoo = 1").contains("line 3"));
        assert!(err_text("env = cliffwalking\nenv = mountaincar\nstrategy = tb").contains("duplicate"));
        assert!(err_text("env = cliffwalking\nstrategy = tb\nbatch_size = many").contains("line 3"));
        assert!(err_text("env = cliffwalking\nstrategy = tb\nmeasurement = beta").contains("only valid"));
        assert!(err_text("env = nowhere\nstrategy = tb").contains("line 1"));
        assert!(err_text("env = cliffwalking\nstrategy = tb\nepsilon = 0.1").contains("line 3"));
        assert!(err_text("strategy = tb").contains("env"));
        assert!(err_text("env = cliffwalking\nstrategy = tb\ngamma = inf").contains("finite"));
    }

    #[test]
    fn overrides_and_comments() {
        let c = parse_config(
            "# demo\nenv = mountaincar  # tabular\nstrategy = retrace\nseeds = 3, 5-6\n\
             total_steps = 4000\nschedule = constant\nepsilon = 0.2\ngrid_bins = 10\nname = demo run",
        )
        .unwrap();
        assert_eq!(c.seeds, vec![3, 5, 6]);
        assert_eq!(c.agent.total_steps, Some(4000));
        assert_eq!(c.agent.grid_bins, 10);
        assert_eq!(c.agent.schedule, EpsilonSchedule::constant(0.2));
        assert_eq!(c.output_dir, PathBuf::from("runs/demo_run"));
    }

    #[test]
    fn episodes_replace_step_budget() {
        let c = parse_config("env = cartpole-v1\nstrategy = tb\nepisodes = 30").unwrap();
        assert_eq!((c.agent.episodes, c.agent.total_steps), (Some(30), None));
    }

    #[test]
    fn mean_std_sample() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
    }
}
