use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use beergame_core::experiment::{run_single, ExperimentConfig, SEED_ENV};
use beergame_core::record::to_csv_string;
use beergame_core::GameConfig;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn beergame(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_beergame"));
    cmd.args(args).env_remove(SEED_ENV);
    cmd
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn shipped_game_file_spells_out_the_defaults() {
    let text = std::fs::read_to_string(scenarios().join("game.toml")).unwrap();
    assert_eq!(
        GameConfig::from_toml_str(&text).unwrap(),
        GameConfig::default()
    );
    for key in [
        "review_period_R",
        "shipping_delay_L",
        "order_delay",
        "rng_seed",
        "service_factor_z",
    ] {
        assert!(text.contains(key), "{key}");
    }
    for name in ["classroom.toml", "visibility_study.toml"] {
        ExperimentConfig::from_file(&scenarios().join(name)).unwrap();
    }
}

#[test]
fn simulate_prints_the_headless_csv() {
    let game = scenarios().join("game.toml");
    let out = run(&mut beergame(&[
        "simulate",
        "--config",
        game.to_str().unwrap(),
        "--seed",
        "9",
    ]));
    let expected = run_single(&GameConfig {
        rng_seed: 9,
        ..GameConfig::default()
    })
    .unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        to_csv_string(&expected.records)
    );
}

#[test]
fn seed_precedence() {
    let stdout = |cmd: &mut Command| String::from_utf8(run(cmd).stdout).unwrap();
    let env5 = stdout(beergame(&["simulate"]).env(SEED_ENV, "5"));
    let flag5 = stdout(&mut beergame(&["simulate", "--seed", "5"]));
    let flag_wins = stdout(beergame(&["simulate", "--seed", "5"]).env(SEED_ENV, "6"));
    let default = stdout(&mut beergame(&["simulate"]));
    assert_eq!(env5, flag5);
    assert_eq!(flag_wins, flag5);
    assert_ne!(default, flag5);

    let out = beergame(&["simulate"])
        .env(SEED_ENV, "many")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(SEED_ENV));
}

#[test]
fn bad_configs_are_reported_by_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "demand_std = -2.0\n").unwrap();
    let out = beergame(&["simulate", "--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("demand_std"));

    let human = dir.path().join("human.toml");
    std::fs::write(&human, "[policies]\nretailer = { kind = \"human\" }\n").unwrap();
    let out = beergame(&["simulate", "--config", human.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("serve"));
}

#[test]
fn experiment_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let cfg = scenarios().join("classroom.toml");
    let out = run(&mut beergame(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("SG1 ") && stdout.contains("SG14 "));
    assert!(String::from_utf8_lossy(&out.stderr).contains("336 week advances"));

    let text = run(&mut beergame(&[
        "report",
        "--in",
        out_dir.to_str().unwrap(),
    ]))
    .stdout;
    assert_eq!(text, std::fs::read(out_dir.join("groups.txt")).unwrap());
    let csv = run(&mut beergame(&[
        "report",
        "--in",
        out_dir.to_str().unwrap(),
        "--format",
        "csv",
    ]))
    .stdout;
    assert_eq!(csv, std::fs::read(out_dir.join("groups.csv")).unwrap());

    // the sequential path writes the same bytes
    let seq_dir = dir.path().join("seq");
    run(&mut beergame(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        seq_dir.to_str().unwrap(),
        "--sequential",
    ]));
    for f in ["groups.csv", "tables.json", "comparison.json"] {
        assert_eq!(
            std::fs::read(out_dir.join(f)).unwrap(),
            std::fs::read(seq_dir.join(f)).unwrap()
        );
    }

    // BEERGAME_SEED moves the seed plan
    let env_dir = dir.path().join("env");
    run(beergame(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        env_dir.to_str().unwrap(),
    ])
    .env(SEED_ENV, "500"));
    assert_ne!(
        std::fs::read(out_dir.join("tables.json")).unwrap(),
        std::fs::read(env_dir.join("tables.json")).unwrap()
    );

    let out = beergame(&[
        "report",
        "--in",
        out_dir.to_str().unwrap(),
        "--format",
        "xml",
    ])
    .output()
    .unwrap();
    assert!(!out.status.success());
}

#[test]
fn serve_accepts_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let game = scenarios().join("game.toml");
    let mut child = beergame(&[
        "serve",
        "--port",
        "0",
        "--config",
        game.to_str().unwrap(),
        "--log-dir",
        dir.path().to_str().unwrap(),
    ])
    .stderr(Stdio::piped())
    .spawn()
    .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let addr = loop {
        let line = lines.next().expect("server output").unwrap();
        if let Some(rest) = line.strip_prefix("listening on http://") {
            break rest.to_owned();
        }
    };
    let mut stream = std::net::TcpStream::connect(&addr).unwrap();
    write!(
        stream,
        "POST /sessions HTTP/1.1\r\nhost: {addr}\r\ncontent-length: 0\r\nconnection: close\r\n\r\n"
    )
    .unwrap();
    let mut resp = String::new();
    stream.read_to_string(&mut resp).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(resp.starts_with("HTTP/1.1 201"), "{resp}");
    let logs: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(logs.len(), 1);
}
