//! Replays the checked-in fuzz corpus through each decoder and checks the
//! same round-trip properties the fuzz targets assert.

use std::fs;
use std::path::PathBuf;

use rdqn_core::experiment::parse_config;
use rdqn_core::qfunc::{decode_snapshot, encode_snapshot};
use rdqn_core::replay::{read_dump, write_dump};

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn parse_config_seeds() {
    for (name, bytes) in corpus("parse_config") {
        let text = String::from_utf8(bytes).unwrap();
        let result = parse_config(&text);
        let expect_ok = !matches!(name.as_str(), "missing_measurement" | "bad_lambda");
        assert_eq!(result.is_ok(), expect_ok, "{name}: {result:?}");
        if let Ok(c) = result {
            c.agent.validate().unwrap();
        }
    }
}

#[test]
fn snapshot_seeds() {
    for (name, bytes) in corpus("snapshot_decode") {
        let result = decode_snapshot(&bytes);
        let expect_ok = !matches!(name.as_str(), "truncated" | "huge_dims");
        assert_eq!(result.is_ok(), expect_ok, "{name}: {result:?}");
        if let Ok(q) = result {
            assert_eq!(encode_snapshot(&q), bytes, "{name}");
        }
    }
}

#[test]
fn replay_seeds() {
    for (name, bytes) in corpus("replay_load") {
        let result = read_dump(&bytes[..]);
        assert_eq!(result.is_ok(), name != "zero_mu", "{name}: {result:?}");
        if let Ok(ts) = result {
            let mut out = Vec::new();
            write_dump(&mut out, &ts).unwrap();
            assert_eq!(read_dump(&out[..]).unwrap(), ts, "{name}");
        }
    }
}
