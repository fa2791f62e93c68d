use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rdqn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdqn"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RDQN_OUTPUT_ROOT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const SMALL_RUN: &str = "env = cliffwalking\nstrategy = qm\nmeasurement = eta\nepisodes = 40\nseeds = 0-2\n";

#[test]
fn run_writes_identical_csvs_on_repeat() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        fs::write(dir.path().join(format!("{out}.cfg")), format!("{SMALL_RUN}output_dir = {out}\n")).unwrap();
        let res = rdqn(&["run", &format!("{out}.cfg")], dir.path());
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for n in names {
        assert_eq!(
            fs::read(dir.path().join("a").join(&n)).unwrap(),
            fs::read(dir.path().join("b").join(&n)).unwrap()
        );
    }
}

#[test]
fn output_root_prefixes_relative_dirs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.cfg"), format!("{SMALL_RUN}output_dir = out\n")).unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_rdqn"))
        .args(["run", "r.cfg"])
        .current_dir(dir.path())
        .env("RDQN_OUTPUT_ROOT", dir.path().join("root"))
        .output()
        .unwrap();
    assert_eq!(code(&res), 0);
    assert!(dir.path().join("root/out/summary.csv").is_file());
}

#[test]
fn invalid_configs_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "env = cliffwalking\nstrategy = qm\n",
        "env = cliffwalking\nstrategy = retrace\nlambda = 1.5\n",
        "env = nowhere\nstrategy = tb\n",
        "env = cliffwalking\nstrategy = tb\nbogus = 1\n",
    ];
    for (i, text) in cases.iter().enumerate() {
        let path = format!("bad{i}.cfg");
        fs::write(dir.path().join(&path), text).unwrap();
        let res = rdqn(&["run", &path], dir.path());
        assert_eq!(code(&res), 1, "case {i}: {}", String::from_utf8_lossy(&res.stderr));
        assert!(!res.stderr.is_empty());
    }
}

#[test]
fn missing_config_file_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&rdqn(&["run", "absent.cfg"], dir.path())), 2);
}

#[test]
fn verify_reports_and_rejects_unknown_suites() {
    let dir = tempfile::tempdir().unwrap();
    let res = rdqn(&["verify", "bounds"], dir.path());
    assert_eq!(code(&res), 0);
    assert!(String::from_utf8_lossy(&res.stdout).starts_with("bounds: PASS"));
    assert_eq!(code(&rdqn(&["verify", "nonsense"], dir.path())), 1);
}

#[test]
fn compare_prints_a_row_per_config() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["x", "y"] {
        fs::write(
            dir.path().join(format!("{name}.cfg")),
            format!("name = {name}\nenv = cliffwalking\nstrategy = tb\nepisodes = 20\nseeds = 0\n"),
        )
        .unwrap();
    }
    let res = rdqn(&["compare", "x.cfg", "y.cfg"], dir.path());
    assert_eq!(code(&res), 0);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert_eq!(stdout.lines().count(), 3);
    assert!(stdout.lines().nth(1).unwrap().starts_with('x'));
    assert_ne!(code(&rdqn(&["compare"], dir.path())), 0);
}
