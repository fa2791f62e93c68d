//! Text dump of replay contents.
//!
//! One transition per line, seven or eight comma-separated fields:
//!
//! ```text
//! episode_id,state,action,reward,next_state,terminal,mu[,acting_q]
//! ```
//!
//! * `state` / `next_state`: `d:<index>` for a discrete state, or
//!   `c:<v1>;<v2>;…` for a feature vector.
//! * `terminal`: `0` or `1`.
//! * `mu`: behavior probabilities joined by `;`.
//! * `acting_q`: optional acting-time action values joined by `;`.
//!
//! Floats are written in Rust's shortest round-trip form, so a dump reloads
//! bit-for-bit. Blank lines and lines starting with `#` are ignored.

use std::io::{BufRead, Write};

use super::Transition;
use crate::error::{Error, Result};
use crate::policy::PolicyDistribution;
use crate::State;

pub const DUMP_HEADER: &str =
    "# rdqn replay v1: episode_id,state,action,reward,next_state,terminal,mu[,acting_q]";

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn encode_state(s: &State) -> String {
    match s {
        State::Discrete(i) => format!("d:{i}"),
        State::Continuous(v) => format!("c:{}", join(v)),
    }
}

pub fn write_dump<'a, W, I>(mut out: W, transitions: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Transition>,
{
    writeln!(out, "{DUMP_HEADER}")?;
    for t in transitions {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            t.episode_id,
            encode_state(&t.state),
            t.action,
            t.reward,
            encode_state(&t.next_state),
            u8::from(t.terminal),
            join(t.behavior.probs()),
        )?;
        if let Some(q) = &t.acting_q {
            write!(out, ",{}", join(q))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn parse_floats(field: &str) -> std::result::Result<Vec<f64>, String> {
    field
        .split(';')
        .map(|s| {
            let v: f64 = s.parse().map_err(|_| format!("bad number {s:?}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite number {s:?}"))
            }
        })
        .collect()
}

fn parse_state(field: &str) -> std::result::Result<State, String> {
    if let Some(idx) = field.strip_prefix("d:") {
        idx.parse()
            .map(State::Discrete)
            .map_err(|_| format!("bad state index {idx:?}"))
    } else if let Some(v) = field.strip_prefix("c:") {
        parse_floats(v).map(State::Continuous)
    } else {
        Err(format!("state {field:?} must start with d: or c:"))
    }
}

fn parse_line(line: &str) -> std::result::Result<Transition, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if !(7..=8).contains(&fields.len()) {
        return Err(format!("expected 7 or 8 fields, got {}", fields.len()));
    }
    let episode_id = fields[0]
        .parse()
        .map_err(|_| format!("bad episode id {:?}", fields[0]))?;
    let state = parse_state(fields[1])?;
    let action = fields[2]
        .parse()
        .map_err(|_| format!("bad action {:?}", fields[2]))?;
    let reward = parse_floats(fields[3])
        .ok()
        .filter(|v| v.len() == 1)
        .map(|v| v[0])
        .ok_or_else(|| format!("bad reward {:?}", fields[3]))?;
    let next_state = parse_state(fields[4])?;
    let terminal = match fields[5] {
        "0" => false,
        "1" => true,
        other => return Err(format!("terminal must be 0 or 1, got {other:?}")),
    };
    let behavior = PolicyDistribution::new(parse_floats(fields[6])?).map_err(|e| e.to_string())?;
    let acting_q = fields.get(7).map(|f| parse_floats(f)).transpose()?;
    let t = Transition {
        state,
        action,
        reward,
        next_state,
        terminal,
        behavior,
        episode_id,
        acting_q,
    };
    t.validate().map_err(|e| e.to_string())?;
    Ok(t)
}

pub fn read_dump<R: BufRead>(input: R) -> Result<Vec<Transition>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let t = parse_line(trimmed).map_err(|e| Error::Decode(format!("line {}: {e}", i + 1)))?;
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Transition> {
        vec![
            Transition {
                state: State::Continuous(vec![0.1, -2.5e-9, 3.0]),
                action: 1,
                reward: -0.3,
                next_state: State::Continuous(vec![0.2, 1e300, -0.0]),
                terminal: false,
                behavior: PolicyDistribution::new(vec![0.1 / 3.0, 1.0 - 0.1 / 3.0]).unwrap(),
                episode_id: 7,
                acting_q: Some(vec![1.5, -2.25]),
            },
            Transition {
                state: State::Discrete(36),
                action: 0,
                reward: -100.0,
                next_state: State::Discrete(36),
                terminal: true,
                behavior: PolicyDistribution::new(vec![0.25; 4]).unwrap(),
                episode_id: 8,
                acting_q: None,
            },
        ]
    }

    #[test]
    fn round_trip_is_bitwise() {
        let ts = sample();
        let mut buf = Vec::new();
        write_dump(&mut buf, &ts).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(DUMP_HEADER));
        assert!(text.contains("8,d:36,0,-100,d:36,1,0.25;0.25;0.25;0.25\n"));
        let back = read_dump(&buf[..]).unwrap();
        assert_eq!(back, ts);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "# header\n1,d:0,0,1,d:1,0,0.5;0.5\n1,d:1,5,1,d:2,0,0.5;0.5\n";
        let err = read_dump(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");

        for bad in [
            "1,d:0,0,1,d:1,2,0.5;0.5",
            "1,x:0,0,1,d:1,0,0.5;0.5",
            "1,d:0,0,NaN,d:1,0,0.5;0.5",
            "1,d:0,0,1,d:1,0,0.7;0.7",
            "1,d:0,0,1,d:1,0",
            "1,d:0,1,1,d:1,0,1;0",
        ] {
            assert!(read_dump(bad.as_bytes()).is_err(), "{bad}");
        }
    }
}
