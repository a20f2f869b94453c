use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mnl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mnl-offline"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mnl(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn version_and_help() {
    assert!(ok(&["--version"]).contains(env!("CARGO_PKG_VERSION")));
    let help = ok(&["--help"]);
    for sub in ["run", "gen-instance", "gen-data", "estimate", "optimize", "mle"] {
        assert!(help.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn instance_data_estimate_optimize_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("instance.json");
    let data = dir.path().join("data.jsonl");
    let design = dir.path().join("design.jsonl");
    ok(&[
        "gen-instance", "--n-items", "20", "--capacity", "3", "--epsilon", "0.05",
        "--reward-mode", "uniform", "--n-opt", "4,2,9", "--out", path_str(&instance),
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&instance).unwrap()).unwrap();
    assert_eq!(parsed["capacity"], 3);
    assert_eq!(parsed["attractions"].as_array().unwrap().len(), 20);

    let optimum: serde_json::Value = serde_json::from_str(&ok(&["optimize", "--instance", path_str(&instance)])).unwrap();
    assert_eq!(optimum["assortment"], serde_json::json!([2, 4, 9]));
    let brute: serde_json::Value =
        serde_json::from_str(&ok(&["optimize", "--instance", path_str(&instance), "--brute-force"])).unwrap();
    assert_eq!(brute["assortment"], optimum["assortment"]);

    ok(&[
        "gen-data", "--instance", path_str(&instance), "--design", "fixed", "--reps", "30",
        "--seed", "3", "--out", path_str(&data), "--design-out", path_str(&design),
    ]);
    assert_eq!(fs::read_to_string(&data).unwrap().lines().count(), 12 * 30);
    assert_eq!(fs::read_to_string(&design).unwrap().lines().count(), 12 * 30);

    let estimates: serde_json::Value = serde_json::from_str(&ok(&[
        "estimate", "--data", path_str(&data), "--n-items", "20", "--delta", "0.1",
    ]))
    .unwrap();
    let lcb = estimates["v_lcb"].as_array().unwrap();
    assert_eq!(lcb.len(), 20);
    assert!(lcb.iter().all(|v| v.as_f64().unwrap() >= 0.0));
    // Items 15..=20 are never offered by the fixed design at K = 3.
    assert!(estimates["p_hat"][13].is_number());
    assert!(estimates["p_hat"][14].is_null());

    let fit: serde_json::Value = serde_json::from_str(&ok(&[
        "mle", "--data", path_str(&data), "--n-items", "20", "--max-iterations", "200",
    ]))
    .unwrap();
    assert_eq!(fit["v_hat"].as_array().unwrap().len(), 20);
}

#[test]
fn gen_data_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("i.json");
    ok(&["gen-instance", "--n-items", "30", "--capacity", "4", "--epsilon", "0.01", "--out", path_str(&instance)]);
    let draw = |seed: &str| {
        ok(&["gen-data", "--instance", path_str(&instance), "--reps", "5", "--seed", seed])
    };
    assert_eq!(draw("11"), draw("11"));
    assert_ne!(draw("11"), draw("12"));
    assert_eq!(draw("11").lines().count(), 16 * 5);
}

#[test]
fn rejects_bad_inputs() {
    assert!(!mnl(&["gen-instance", "--n-items", "10", "--capacity", "3", "--epsilon", "0.01"]).status.success());
    assert!(!mnl(&["gen-instance", "--n-items", "20", "--capacity", "5", "--epsilon", "0.05"]).status.success());
    assert!(mnl(&[
        "gen-instance", "--n-items", "20", "--capacity", "5", "--epsilon", "0.05", "--allow-large-gap"
    ])
    .status
    .success());
    assert!(!mnl(&["run", "--preset", "no-such-preset"]).status.success());
    assert!(!mnl(&["run"]).status.success());
}

#[test]
fn run_writes_csv_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let csv = dir.path().join("nested/out.csv");
    fs::write(
        &config,
        r#"{"experiment":"dep_on_k","n_items":60,"capacity_list":[3,6,9],"n_list":[200],
            "reward_mode":"non_uniform","epsilon_rule":{"rule":"inv_sqrt_n","value":0.1},
            "methods":["prb"],"replications":3,"delta":0.5,"master_seed":1,
            "output_path":"ignored.csv"}"#,
    )
    .unwrap();
    let out = mnl(&["run", "--config", path_str(&config), "--seed", "5", "--out", path_str(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wrote 9 rows"));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("experiment,method,reward_mode,n_items,capacity,n,epsilon,replication,seed,subopt,wall_ms\n"));
    assert_eq!(text.lines().count(), 10);

    let serial = dir.path().join("serial.csv");
    ok(&["run", "--config", path_str(&config), "--seed", "5", "--out", path_str(&serial), "--serial"]);
    let strip = |t: String| -> Vec<String> {
        t.lines().map(|l| l.rsplit_once(',').unwrap().0.to_owned()).collect()
    };
    assert_eq!(strip(text), strip(fs::read_to_string(&serial).unwrap()));

    let summary = ok(&["summarize", "--csv", path_str(&csv)]);
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with("method,capacity,n,replications,mean_subopt,std_err\n"));
    let slope = mnl(&["slope", "--csv", path_str(&csv), "--n", "200"]);
    // All-zero means are possible at this size; either a number or a clean error.
    if slope.status.success() {
        assert!(String::from_utf8(slope.stdout).unwrap().trim().parse::<f64>().is_ok());
    }
}

#[test]
fn presets_round_trip_through_run() {
    let names = ok(&["preset"]);
    assert!(names.lines().any(|l| l == "fig1-constant"));
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    let mut json: serde_json::Value = serde_json::from_str(&ok(&["preset", "coverage-check"])).unwrap();
    json["replications"] = 3.into();
    fs::write(&config, json.to_string()).unwrap();
    let csv = dir.path().join("c.csv");
    let out = mnl(&["run", "--config", path_str(&config), "--out", path_str(&csv)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("lcb_coverage K=5 n=2000"));
}
