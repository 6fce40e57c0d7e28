use std::path::Path;
use std::process::Command;

use serde_json::Value;

use ghostcde::utility::ParametricEp;

const CONFIG: &str = r#"
seed = 3
[forests.yac]
n_trees = 40
[forests.ghost]
n_trees = 40
[ghost]
n_samples = 4
half_width_x = 3.0
half_width_y = 3.0
[synth]
n_plays = 200
"#;

fn cli(dir: &Path, args: &[&str]) -> (bool, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_ghostcde"))
        .args(args)
        .arg("--config")
        .arg(dir.join("run.toml"))
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("GHOSTS_OUT")
        .env_remove("GHOSTS_EP_TABLE")
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report: Value = serde_json::from_str(stdout.trim()).unwrap_or_else(|e| panic!("{e}: {stdout}"));
    (out.status.success(), report)
}

fn ok(dir: &Path, args: &[&str]) -> Value {
    let (success, report) = cli(dir, args);
    assert!(success, "{args:?}: {report}");
    assert_eq!(report["status"], "ok");
    report
}

fn setup(extra: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), format!("{CONFIG}{extra}")).unwrap();
    dir
}

#[test]
fn end_to_end_on_synthetic_season() {
    let dir = setup("");
    let d = dir.path();
    ok(d, &["synth"]);
    let features = ok(d, &["features"]);
    assert_eq!(features["eligible_plays"], 200);
    ok(d, &["train-yac"]);

    let (success, err) = cli(d, &["eval-season"]);
    assert!(!success);
    assert_eq!(err["status"], "error");
    assert_eq!(err["command"], "eval-season");
    assert_eq!(err["kind"], "missing_artifact");
    assert!(err["error"].as_str().unwrap().contains("train-ghost"));

    ok(d, &["train-ghost"]);
    let season = ok(d, &["eval-season"]);
    assert_eq!(season["plays"], 200);
    let out = d.join("out");
    for f in ["plays.csv", "summary.csv", "leaderboard.csv", "player_scatter.csv", "correlations.csv"] {
        assert!(out.join("season").join(f).exists(), "{f}");
    }
    assert!(out.join("run_config.toml").exists());
    let leaderboard = std::fs::read_to_string(out.join("season/leaderboard.csv")).unwrap();
    assert!(leaderboard.starts_with("player_id,display_name,position,receptions,total_delta,avg_delta,total_yac,avg_yac"));

    let plays = std::fs::read_to_string(out.join("data/plays.csv")).unwrap();
    let first: Vec<&str> = plays.lines().nth(1).unwrap().split(',').collect();
    let play = ok(d, &["eval-play", "--game", first[0], "--play", first[1]]);
    let play_dir = out.join("plays").join(format!("{}_{}", first[0], first[1]));
    for f in ["ghost_grid.csv", "ghost_samples.csv", "summary.csv"] {
        assert!(play_dir.join(f).exists(), "{f}");
    }
    let season_rows = std::fs::read_to_string(out.join("season/summary.csv")).unwrap();
    let play_row = std::fs::read_to_string(play_dir.join("summary.csv")).unwrap();
    assert!(season_rows.contains(play_row.lines().nth(1).unwrap()));
    assert!(play["percentile"].as_f64().unwrap() >= 0.0);

    let (success, err) = cli(d, &["eval-play", "--game", "1", "--play", "1"]);
    assert!(!success);
    assert_eq!(err["kind"], "unknown_play");

    ok(d, &["report"]);
    assert!(out.join("reports/leaderboard.csv").exists());
    let cv = ok(d, &["cv", "--kind", "ghost"]);
    assert_eq!(cv["folds"], 5 * 3);
    let sweep = ok(d, &["sweep", "--kind", "yac"]);
    assert_eq!(sweep["rows"], 4);
    let ingest = ok(d, &["ingest"]);
    assert_eq!(ingest["rejected_rows"], 0);
}

#[test]
fn swapping_the_expected_points_table_keeps_interfaces() {
    let dir = setup("");
    let d = dir.path();
    for cmd in ["synth", "features", "train-yac", "train-ghost"] {
        ok(d, &[cmd]);
    }
    let plays = std::fs::read_to_string(d.join("out/data/plays.csv")).unwrap();
    let first: Vec<&str> = plays.lines().nth(1).unwrap().split(',').collect();
    let args = ["eval-play", "--game", first[0], "--play", first[1]];
    let base = ok(d, &args);
    let play_dir = d.join("out/plays").join(format!("{}_{}", first[0], first[1]));
    let header = |p: &Path| std::fs::read_to_string(p).unwrap().lines().next().unwrap().to_string();
    let base_header = header(&play_dir.join("summary.csv"));

    let table = ParametricEp {
        upper: 5.0,
        midpoint: 60.0,
        ..Default::default()
    }
    .to_table();
    let table_path = d.join("ep.csv");
    table.save(&table_path).unwrap();
    std::fs::write(
        d.join("run.toml"),
        format!("{CONFIG}\n[paths]\nep_table = {:?}\n", table_path.display().to_string()),
    )
    .unwrap();
    let swapped = ok(d, &args);
    assert_eq!(header(&play_dir.join("summary.csv")), base_header);
    assert_ne!(base["epv_catch"], swapped["epv_catch"]);
}

#[test]
fn missing_inputs_and_bad_config_are_reported() {
    let dir = setup("");
    let d = dir.path();
    let (success, err) = cli(d, &["features"]);
    assert!(!success);
    assert_eq!(err["kind"], "missing_artifact");
    assert!(err["error"].as_str().unwrap().contains("synth"));

    std::fs::write(d.join("run.toml"), "seed = \"nope\"\n").unwrap();
    let (success, err) = cli(d, &["synth"]);
    assert!(!success);
    assert_eq!(err["kind"], "invalid_config");
}
