use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use levy_inventory_cli::parse_config;
use proptest::prelude::*;

const DRIFTED_POISSON: &str = "[model]\nmu = 1.0\nalpha = 1.0\nlambda = 1.0\n\n[policy]\nx = 10.0\na = 2.0\nQ = 3.0\n";

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_levy-inventory"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn moments_on_drifted_poisson_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "dp.toml", DRIFTED_POISSON);
    let o = run(&["moments", cfg.to_str().unwrap(), "--n", "1", "--analytic-only"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,quantity,closed_form,mc_estimate,mc_std_error,ci_low,ci_high,within_ci");
    assert!(lines[1].starts_with("1,mean,1,"), "{}", lines[1]);
    assert!(lines[2].starts_with("1,variance,0.25,"), "{}", lines[2]);
}

#[test]
fn longrun_drift_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.toml",
        "[model]\nmu = 2.0\n[policy]\nx = 5.0\na = 1.0\nQ = 2.0\n[rates]\nC_o = 3.0\nC_h = 1.0\n",
    );
    let o = run(&["longrun", cfg.to_str().unwrap(), "--checkpoints", "4", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["limit"], 11.0);
    assert_eq!(v["trace"][0]["t"], 4.0);
}

#[test]
fn tail_end_to_end_is_within_ci() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "dp.toml", DRIFTED_POISSON);
    let o = run(&["tail", cfg.to_str().unwrap(), "--s", "2", "--b", "4", "--paths", "1000000", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "within CI");
    assert_eq!(v["monte_carlo"]["paths_used"], 1_000_000);
}

#[test]
fn sweep_and_simulate_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "dp.toml", DRIFTED_POISSON);
    let c = cfg.to_str().unwrap();
    let o = run(&["sweep", c, "--grid-a", "1,2", "--grid-q", "1,3", "--t", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("a,Q,t,ordering,holding,stockout,total"));
    assert_eq!(text.lines().count(), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("argmin"));

    let o = run(&["simulate", c, "--paths", "3", "--t", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("path_id,time,jump_size,source"));
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",1,unit_jump"), "{line}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "dp.toml", DRIFTED_POISSON);
    let out = dir.path().join("m.json");
    let o = run(&[
        "moments",
        cfg.to_str().unwrap(),
        "--analytic-only",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["quantities"]["mean"]["closed_form"], 1.0);
}

#[test]
fn validation_errors_exit_1_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &DRIFTED_POISSON.replace("Q = 3.0", "Q = -3.0"));
    let o = run(&["cost", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"]["code"], "validation");
    assert!(v["error"]["message"].as_str().unwrap().contains("Q must be > 0"));

    let cfg = write(dir.path(), "typo.toml", &DRIFTED_POISSON.replace("[policy]", "[policy]\nreorder = 1"));
    let o = run(&["cost", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("reorder"));

    let o = run(&["cost", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = write(dir.path(), "dp.toml", DRIFTED_POISSON);
    let o = run(&["cost", cfg.to_str().unwrap(), "--paths", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("paths"));
}

#[test]
fn truncation_cap_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{DRIFTED_POISSON}\n[series]\nmax_replenishments = 2\n");
    let cfg = write(dir.path(), "cap.toml", &text);
    let o = run(&["cost", cfg.to_str().unwrap(), "--t", "20", "--analytic-only", "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"]["code"], "numerical");
}

#[test]
fn bad_thread_cap_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "dp.toml", DRIFTED_POISSON);
    let o = Command::new(bin())
        .args(["moments", cfg.to_str().unwrap(), "--analytic-only"])
        .env("LEVY_INVENTORY_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csv_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "dp.toml", &format!("{DRIFTED_POISSON}\n[mc]\npaths = 5000\nseed = 3\n"));
    let go = |threads: &str| {
        Command::new(bin())
            .args(["cost", cfg.to_str().unwrap(), "--t", "4"])
            .env("LEVY_INVENTORY_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let one = go("1");
    assert_eq!(one, go("3"));
    assert_eq!(one, go("1"));
}

const SECTIONS: &[&str] = &["model", "policy", "rates", "series", "quadrature", "mc", "output"];
const NUMERIC_KEYS: &[(&str, &str)] = &[
    ("model", "mu"),
    ("model", "alpha"),
    ("model", "lambda"),
    ("policy", "x"),
    ("policy", "a"),
    ("policy", "Q"),
    ("rates", "C_o"),
    ("rates", "C_h"),
    ("rates", "C_so"),
];

fn with_key(section: &str, line: &str) -> String {
    let base = format!("{DRIFTED_POISSON}\n[rates]\nC_o = 1.0\n");
    if base.contains(&format!("[{section}]\n")) {
        base.replace(&format!("[{section}]\n"), &format!("[{section}]\n{line}\n"))
    } else {
        format!("{base}\n[{section}]\n{line}\n")
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unknown_keys_are_named(section in 0..SECTIONS.len(), key in "[a-z]{3,10}_[a-z]{2,6}") {
        let doc = with_key(SECTIONS[section], &format!("{key} = 1"));
        let e = parse_config(&doc).unwrap_err();
        prop_assert_eq!(e.exit_code(), 1);
        prop_assert!(e.to_string().contains(&key), "{}", e);
    }

    #[test]
    fn negative_values_are_named(k in 0..NUMERIC_KEYS.len(), v in -1e6f64..-1e-6) {
        let (section, key) = NUMERIC_KEYS[k];
        let base = with_key(section, "");
        let doc = if base.contains(&format!("\n{key} = ")) {
            base.lines()
                .map(|l| if l.starts_with(&format!("{key} = ")) { format!("{key} = {v:?}") } else { l.to_string() })
                .collect::<Vec<_>>()
                .join("\n")
        } else {
            with_key(section, &format!("{key} = {v:?}"))
        };
        let e = parse_config(&doc).unwrap_err();
        prop_assert_eq!(e.exit_code(), 1);
        prop_assert!(e.to_string().contains(key), "{}", e);
    }

    #[test]
    fn garbage_never_parses(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        let text = String::from_utf8_lossy(&bytes);
        if let Err(e) = parse_config(&text) {
            prop_assert_eq!(e.exit_code(), 1);
        }
    }
}
