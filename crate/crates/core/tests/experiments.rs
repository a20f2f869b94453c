use std::fs::File;
use std::path::Path;

use mnl_offline::experiments::{
    capacity_curve, loglog_slope, presets, read_csv, run_experiment_with, summarize, write_csv,
    EpsilonRule, Execution, ExperimentKind, Method, ObservedBlock, CSV_HEADER,
};
use mnl_offline::{run_experiment, ExperimentConfig, ResultRow, RewardMode};

fn tiny_config() -> ExperimentConfig {
    ExperimentConfig::from_json(
        r#"{
            "experiment": "dep_on_n",
            "n_items": 10,
            "capacity_list": [2],
            "n_list": [50],
            "reward_mode": "uniform",
            "epsilon_rule": {"rule": "constant", "value": 0.05},
            "methods": ["prb"],
            "replications": 1,
            "delta": 0.05,
            "master_seed": 7,
            "output_path": "out.csv"
        }"#,
    )
    .unwrap()
}

fn row(method: Method, capacity: usize, n: usize, replication: usize, subopt: f64) -> ResultRow {
    ResultRow {
        experiment: ExperimentKind::DepOnK,
        method,
        reward_mode: RewardMode::NonUniform,
        n_items: 200,
        capacity,
        n,
        epsilon: 0.01,
        replication,
        seed: 0,
        subopt,
        wall_ms: 1.0,
    }
}

fn csv_text(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn strip_wall_ms(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_owned() + "\n")
        .collect()
}

#[test]
fn smoke_run_emits_one_row() {
    let config = tiny_config();
    assert_eq!(config.observed_block, ObservedBlock::FourK);
    assert!(!config.union_bound);
    let run = run_experiment(&config).unwrap();
    assert!(run.failures.is_empty());
    assert_eq!(run.rows.len(), 1);
    let subopt = run.rows[0].subopt;
    assert!(subopt.is_finite() && (0.0..=1.0).contains(&subopt));
}

#[test]
fn suboptimality_never_negative() {
    let config = ExperimentConfig {
        methods: vec![Method::Prb, Method::Mle],
        n_list: vec![30, 120],
        capacity_list: vec![2, 3],
        n_items: 40,
        replications: 4,
        ..tiny_config()
    };
    let run = run_experiment(&config).unwrap();
    assert_eq!(run.rows.len(), 2 * 2 * 2 * 4);
    assert!(run.rows.iter().all(|r| r.subopt >= -1e-9));
}

#[test]
fn identical_output_across_runs_and_execution_modes() {
    let config = ExperimentConfig {
        methods: vec![Method::Mle, Method::Prb],
        n_list: vec![40, 80],
        capacity_list: vec![2, 3],
        n_items: 40,
        replications: 5,
        ..tiny_config()
    };
    let a = run_experiment_with(&config, Execution::Parallel).unwrap();
    let b = run_experiment_with(&config, Execution::Parallel).unwrap();
    let c = run_experiment_with(&config, Execution::Serial).unwrap();
    let text = strip_wall_ms(&csv_text(&a.rows));
    assert_eq!(text, strip_wall_ms(&csv_text(&b.rows)));
    assert_eq!(text, strip_wall_ms(&csv_text(&c.rows)));
    // Rows follow (K, n, method, replication) in config order.
    assert_eq!(a.rows[0].method, Method::Mle);
    assert_eq!((a.rows[0].capacity, a.rows[0].n, a.rows[0].replication), (2, 40, 0));
    assert_eq!(a.rows.last().unwrap().method, Method::Prb);
}

#[test]
fn methods_share_a_dataset_per_replication() {
    let config = ExperimentConfig {
        methods: vec![Method::Prb, Method::Mle],
        replications: 3,
        ..tiny_config()
    };
    let run = run_experiment(&config).unwrap();
    for rep in 0..3 {
        let seeds: Vec<u64> = run.rows.iter().filter(|r| r.replication == rep).map(|r| r.seed).collect();
        assert_eq!(seeds.len(), 2);
        assert_eq!(seeds[0], seeds[1]);
    }
}

#[test]
fn infeasible_cells_are_reported_and_skipped() {
    // N = 10 leaves only 10 - 4K decoys; K = 3 needs 2 of them, so it fails.
    let config = ExperimentConfig {
        capacity_list: vec![2, 3],
        replications: 2,
        ..tiny_config()
    };
    let run = run_experiment(&config).unwrap();
    assert_eq!(run.rows.len(), 2);
    assert!(run.rows.iter().all(|r| r.capacity == 2));
    assert_eq!(run.failures.len(), 2);
    assert!(run.failures.iter().all(|f| f.capacity == 3));
}

#[test]
fn coverage_check_tallies_every_replication() {
    let config = ExperimentConfig {
        replications: 10,
        ..presets::lcb_coverage()
    };
    let run = run_experiment(&config).unwrap();
    assert_eq!(run.rows.len(), 10);
    assert_eq!(run.lcb_coverage.len(), 1);
    let tally = run.lcb_coverage[0];
    assert_eq!((tally.capacity, tally.n, tally.total), (5, 2000, 10));
    assert!(tally.covered <= tally.total);
    assert!(run_experiment(&tiny_config()).unwrap().lcb_coverage.is_empty());
}

#[test]
fn csv_layout_and_round_trip() {
    let rows = vec![row(Method::Prb, 5, 100, 0, 0.125), row(Method::Mle, 5, 100, 0, 1e-17)];
    let text = csv_text(&rows);
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    assert_eq!(
        lines.next().unwrap(),
        "dep_on_k,prb,non_uniform,200,5,100,0.01,0,0,0.125,1.0"
    );
    assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    write_csv(&rows, File::create(&path).unwrap()).unwrap();
    assert_eq!(read_csv(File::open(&path).unwrap()).unwrap(), rows);
}

#[test]
fn config_parsing() {
    let config = tiny_config();
    assert_eq!(config.epsilon_rule, EpsilonRule::Constant { value: 0.05 });
    assert_eq!(config.reward_mode, RewardMode::Uniform);

    let with_defaults = r#"{"experiment":"dep_on_k","n_items":200,"capacity_list":[5,10,20],
        "n_list":[5000,10000],"reward_mode":"non_uniform",
        "epsilon_rule":{"rule":"explicit","values":[0.01,0.005]},"methods":["prb","mle"],
        "delta":0.1,"master_seed":18446744073709551615,"output_path":"x.csv"}"#;
    let parsed = ExperimentConfig::from_json(with_defaults).unwrap();
    assert_eq!(parsed.replications, 50);
    assert_eq!(parsed.master_seed, u64::MAX);
    assert_eq!(parsed.epsilon_rule.epsilon(10, 10000, 1), 0.005);

    let rule: EpsilonRule = serde_json::from_str(r#"{"rule":"inv_sqrt_kn","value":0.1}"#).unwrap();
    assert!((rule.epsilon(4, 25, 0) - 0.01).abs() < 1e-15);

    let unknown = with_defaults.replace("\"delta\"", "\"colour\":1,\"delta\"");
    assert!(ExperimentConfig::from_json(&unknown).is_err());
    for bad in ["\"delta\":1.0", "\"delta\":0.0", "\"replications\":0,\"delta\":0.1"] {
        let text = with_defaults.replace("\"delta\":0.1", bad);
        assert!(ExperimentConfig::from_json(&text).is_err(), "{text}");
    }
    let empty = with_defaults.replace("[5,10,20]", "[]");
    assert!(ExperimentConfig::from_json(&empty).is_err());
    let short = with_defaults.replace("[0.01,0.005]", "[0.01]");
    assert!(ExperimentConfig::from_json(&short).is_err());
}

#[test]
fn presets_are_valid_and_serializable() {
    for name in presets::PRESET_NAMES {
        let config = presets::preset(name).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), config);
    }
    assert!(presets::preset("fig3").is_err());
}

#[test]
fn summary_statistics() {
    let single = summarize(&[row(Method::Prb, 5, 100, 0, 0.3)]);
    assert_eq!(single.len(), 1);
    assert_eq!((single[0].mean, single[0].std_err), (0.3, 0.0));

    let constant: Vec<_> = (0..7).map(|i| row(Method::Mle, 5, 100, i, 0.125)).collect();
    let s = &summarize(&constant)[0];
    assert_eq!((s.mean, s.std_err, s.replications), (0.125, 0.0, 7));

    // Values 0.01, 0.02, ..., 0.50: mean 0.255, sample variance 212.5e-4.
    let known: Vec<_> = (1..=50).map(|i| row(Method::Prb, 5, 100, i, i as f64 / 100.0)).collect();
    let s = &summarize(&known)[0];
    assert!((s.mean - 0.255).abs() < 1e-12);
    assert!((s.std_err - (212.5e-4_f64 / 50.0).sqrt()).abs() < 1e-12);
}

#[test]
fn summary_is_keyed_and_ordered() {
    let rows = vec![
        row(Method::Mle, 10, 100, 0, 0.4),
        row(Method::Prb, 10, 100, 0, 0.2),
        row(Method::Prb, 5, 100, 0, 0.1),
        row(Method::Prb, 5, 100, 1, 0.3),
    ];
    let keys: Vec<_> = summarize(&rows).iter().map(|s| (s.method, s.capacity, s.n)).collect();
    assert_eq!(keys, vec![(Method::Prb, 5, 100), (Method::Prb, 10, 100), (Method::Mle, 10, 100)]);
}

#[test]
fn loglog_slope_on_exact_power_laws() {
    let ks = [5.0, 10.0, 20.0, 40.0];
    let linear: Vec<_> = ks.iter().map(|&k| (k, 0.003 * k)).collect();
    let root: Vec<_> = ks.iter().map(|&k: &f64| (k, 0.02 * k.sqrt())).collect();
    assert!((loglog_slope(&linear).unwrap() - 1.0).abs() < 1e-9);
    assert!((loglog_slope(&root).unwrap() - 0.5).abs() < 1e-9);
    assert!(loglog_slope(&linear[..2]).is_err());
    assert!(loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    assert!(loglog_slope(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)]).is_err());
}

#[test]
fn loglog_slope_on_golden_fixture() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/dep_on_k_golden.csv");
    let rows = read_csv(File::open(path).unwrap()).unwrap();
    let curve = capacity_curve(&summarize(&rows), Method::Prb, 5000);
    assert_eq!(curve.len(), 4);
    assert!((loglog_slope(&curve).unwrap() - 0.972990652725742).abs() < 1e-9);
}

#[test]
fn shipped_configs_match_presets() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in presets::PRESET_NAMES {
        let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), presets::preset(name).unwrap(), "{name}");
    }
}
