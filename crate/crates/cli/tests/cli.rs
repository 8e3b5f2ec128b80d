use std::path::Path;
use std::process::{Command, Output};

use pdtp_core::csv::fmt_real;
use pdtp_core::{Evaluator, PdtpParams, Route};

fn pdtp(args: &[&str]) -> Output {
    pdtp_env(args, &[])
}

fn pdtp_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pdtp"));
    cmd.args(args);
    for (k, _) in std::env::vars() {
        if k.starts_with("PDTP_") {
            cmd.env_remove(k);
        }
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Column names and data rows of a CSV with a `#` header block.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (cols, rows)
}

fn header_value(text: &str, key: &str) -> Option<String> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(String::from))
}

#[test]
fn bernoulli_states_example() {
    let text = stdout(&pdtp(&["states", "--alpha", "1", "--nu", "1", "--xi", "1", "--t", "3"]));
    let (cols, rows) = table(&text);
    assert_eq!(cols, ["t", "n", "probability"]);
    let probs: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let want = [0.125, 0.375, 0.375, 0.125];
    assert_eq!(probs.len(), 4);
    for (got, want) in probs.iter().zip(want) {
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }
}

#[test]
fn header_echoes_parameters_and_version() {
    let text = stdout(&pdtp(&[
        "pmf", "--alpha", "0.5", "--nu", "2", "--xi", "0.25", "--t", "0..8",
    ]));
    assert_eq!(
        header_value(&text, "version").as_deref(),
        Some(env!("CARGO_PKG_VERSION"))
    );
    assert_eq!(header_value(&text, "schema").as_deref(), Some("pdtp-pmf/1"));
    assert_eq!(header_value(&text, "command").as_deref(), Some("pmf"));
    for (k, v) in [
        ("alpha", "0.5"),
        ("nu", "2"),
        ("xi", "0.25"),
        ("t", "0..8"),
        ("route", "auto"),
        ("format", "csv"),
    ] {
        assert_eq!(header_value(&text, k).as_deref(), Some(v), "{k}");
    }
}

#[test]
fn csv_round_trips_library_values() {
    let p = PdtpParams::new(0.7, 1.754, 0.5).unwrap();
    let ev = Evaluator::new(Route::Auto);

    let text = stdout(&pdtp(&[
        "pmf", "--alpha", "0.7", "--nu", "1.754", "--xi", "0.5", "--t", "0..30",
    ]));
    let want = ev.interarrival_table(&p, 30).unwrap();
    let (_, rows) = table(&text);
    for row in &rows {
        let t: usize = row[0].parse().unwrap();
        let got: f64 = row[1].parse().unwrap();
        assert_eq!(got.to_bits(), want[t].to_bits(), "t = {t}");
        assert_eq!(fmt_real(got), row[1]);
    }

    let text = stdout(&pdtp(&[
        "states", "--alpha", "0.7", "--nu", "1.754", "--xi", "0.5", "--t", "12,20",
    ]));
    let (_, rows) = table(&text);
    assert_eq!(rows.len(), 13 + 21);
    let table20 = ev.state_distribution(&p, 20).unwrap();
    for row in rows.iter().filter(|r| r[0] == "20") {
        let n: usize = row[1].parse().unwrap();
        let got: f64 = row[2].parse().unwrap();
        assert_eq!(got.to_bits(), table20.prob(n).to_bits(), "n = {n}");
    }
}

#[test]
fn config_echo_reproduces_output_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("triangle.txt");
    std::fs::write(&graph, "N 3\n0 1\n1 2\n2 0\n").unwrap();
    let graph = graph.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["states", "--alpha", "0.5", "--nu", "0.5", "--xi", "2", "--t", "0..6"],
        vec![
            "ct-states",
            "--alpha",
            "0.5",
            "--nu",
            "0.5",
            "--xi0",
            "1",
            "--n",
            "1..7",
            "--t-grid",
            "log:0.01..100:8",
        ],
        vec![
            "tail",
            "--alpha",
            "0.5",
            "--nu",
            "1",
            "--xi",
            "2",
            "--t",
            "log:10..500:4",
            "--mode",
            "interarrival",
        ],
        vec![
            "walk", "--alpha", "0.7", "--nu", "1", "--xi", "0.5", "--graph", graph, "--t", "6",
        ],
        vec![
            "simulate",
            "--alpha",
            "0.7",
            "--nu",
            "1",
            "--xi",
            "0.5",
            "--walkers",
            "2000",
            "--seed",
            "3",
            "--t",
            "2,5",
        ],
        vec![
            "states", "--alpha", "1", "--nu", "1", "--xi", "0.5", "--t", "4", "--format", "json", "--route", "oracle",
        ],
    ];
    for args in runs {
        let first = stdout(&pdtp(&args));
        let saved = dir.path().join("run.out");
        let echo = if args.contains(&"json") {
            // JSON carries the same echo; feed it back as key=value lines
            let v: serde_json::Value = serde_json::from_str(&first).unwrap();
            let mut cfg = format!("command={}\n", v["command"].as_str().unwrap());
            for (k, val) in v["params"].as_object().unwrap() {
                cfg.push_str(&format!("{k}={}\n", val.as_str().unwrap()));
            }
            cfg
        } else {
            first.clone()
        };
        std::fs::write(&saved, echo).unwrap();
        let second = stdout(&pdtp(&[args[0], "--config", saved.to_str().unwrap()]));
        assert_eq!(first, second, "{args:?}");
    }
}

#[test]
fn flags_beat_environment_beats_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "alpha=0.5\nnu=1\nxi=2\nt=3\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let text = stdout(&pdtp(&["states", "--config", cfg]));
    assert_eq!(header_value(&text, "alpha").as_deref(), Some("0.5"));

    let text = stdout(&pdtp_env(&["states", "--config", cfg], &[("PDTP_ALPHA", "0.8")]));
    assert_eq!(header_value(&text, "alpha").as_deref(), Some("0.8"));

    let text = stdout(&pdtp_env(
        &["states", "--config", cfg, "--alpha", "0.9"],
        &[("PDTP_ALPHA", "0.8")],
    ));
    assert_eq!(header_value(&text, "alpha").as_deref(), Some("0.9"));
}

#[test]
fn simulation_is_independent_of_thread_count() {
    let base = [
        "simulate",
        "--alpha",
        "0.6",
        "--nu",
        "1.5",
        "--xi",
        "0.5",
        "--walkers",
        "5000",
        "--seed",
        "42",
        "--t",
        "1,8,30",
    ];
    let one = stdout(&pdtp(&[&base[..], &["--threads", "1"]].concat()));
    let three = stdout(&pdtp(&[&base[..], &["--threads", "3"]].concat()));
    assert_eq!(one, three);
    let other_seed = stdout(&pdtp(&[&base[..10], &["43", "--t", "1,8,30"]].concat()));
    assert_ne!(table(&one).1, table(&other_seed).1);
}

fn error_record(out: &Output) -> serde_json::Value {
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let v: serde_json::Value = serde_json::from_str(stderr.trim()).expect("stderr is one JSON record");
    v["error"].clone()
}

#[test]
fn band_error_names_the_oracle_flag() {
    let out = pdtp(&[
        "pmf",
        "--alpha",
        "0.5",
        "--nu",
        "0.5",
        "--xi",
        "1.0",
        "--t",
        "10",
        "--route",
        "closed-form",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = error_record(&out);
    assert_eq!(err["kind"], "oracle_only_band");
    assert!(err["message"].as_str().unwrap().contains("oracle-only band"));
    assert!(err["hint"].as_str().unwrap().contains("--route oracle"));

    let ok = stdout(&pdtp(&[
        "pmf", "--alpha", "0.5", "--nu", "0.5", "--xi", "1.0", "--t", "10", "--route", "oracle",
    ]));
    assert!(ok.contains("# info resolved_route: oracle"));
}

#[test]
fn module_errors_become_records() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("split.txt");
    std::fs::write(&graph, "N 4\n0 1\n2 3\n").unwrap();
    let out = pdtp(&[
        "walk",
        "--alpha",
        "0.5",
        "--nu",
        "1",
        "--xi",
        "0.5",
        "--t",
        "3",
        "--graph",
        graph.to_str().unwrap(),
    ]);
    let err = error_record(&out);
    assert_eq!(err["kind"], "graph");
    assert!(err["message"].as_str().unwrap().contains("disconnected"));

    let err = error_record(&pdtp(&[
        "states", "--alpha", "1.5", "--nu", "1", "--xi", "0.5", "--t", "3",
    ]));
    assert_eq!(err["kind"], "domain");

    let out = pdtp(&["states", "--alpha", "1", "--nu", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["kind"], "usage");
}

#[test]
fn continuous_states_cover_the_long_time_grid() {
    let text = stdout(&pdtp(&[
        "ct-states",
        "--alpha",
        "0.5",
        "--nu",
        "0.5",
        "--xi0",
        "1",
        "--n",
        "1..7",
        "--t-grid",
        "log:0.01..100:64",
    ]));
    let (cols, rows) = table(&text);
    assert_eq!(cols, ["t", "n", "probability", "est_error", "method", "converged"]);
    assert_eq!(rows.len(), 64 * 7);
    assert!(rows.iter().all(|r| r[5] == "true"));
    assert_eq!(header_value(&text, "n").as_deref(), Some("1..7"));
    // higher states are less occupied at small t
    let first: Vec<f64> = rows[..7].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(first.windows(2).all(|w| w[0] > w[1]), "{first:?}");
    for r in &rows {
        let p: f64 = r[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn walk_matrix_is_stochastic_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("star.txt");
    std::fs::write(&graph, "# star\nN 4\n0 1\n0 2\n0 3\n").unwrap();
    let out_path = dir.path().join("p.csv");
    let out = pdtp(&[
        "walk",
        "--alpha",
        "0.8",
        "--nu",
        "1.2",
        "--xi",
        "3",
        "--t",
        "7",
        "--graph",
        graph.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(Path::new(&out_path)).unwrap();
    let (cols, rows) = table(&text);
    assert_eq!(cols, ["from", "to_0", "to_1", "to_2", "to_3"]);
    for row in rows {
        let sum: f64 = row[1..].iter().map(|x| x.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-10);
    }
}

#[test]
fn json_output_parses() {
    let text = stdout(&pdtp(&[
        "tail", "--alpha", "0.5", "--nu", "1", "--xi", "2", "--t", "100,1000", "--format", "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], "pdtp-tail/1");
    assert_eq!(v["columns"][3], "ratio");
    let ratio = v["rows"][1][3].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
}
