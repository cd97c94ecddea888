//! End-to-end tests of the `carbondse` binary: exit-code contract, run
//! directory layout, reproducibility, and report emission.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_carbondse"))
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("carbondse-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn evaluate_published_min_carbon_point_is_feasible() {
    let out = run(&[
        "evaluate",
        "--preset",
        "clip-b16",
        "--mode",
        "carbon+latency",
        "--hw",
        "1,256,8,64,128,2",
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["feasible"], true);
    assert!(json["metrics"]["latency_s"].as_f64().unwrap() > 0.0);
    assert!(json["carbon"]["total_kg"].as_f64().unwrap() > 0.0);
    assert!(json.get("graph").is_none());
}

#[test]
fn evaluate_tops_violation_exits_2_with_reason() {
    let out = run(&[
        "evaluate",
        "--preset",
        "clip-b16",
        "--mode",
        "carbon+latency",
        "--hw",
        "4,256,64,256,64,4",
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("TOPS"));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["feasible"], false);
}

#[test]
fn evaluate_dump_flags_add_graph_and_ops_table() {
    let dir = temp_dir("dump");
    let ops = dir.join("ops.csv");
    let out = run(&[
        "evaluate",
        "--preset",
        "desk",
        "--dump-graph",
        "--dump-ops",
        ops.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let operators = json["graph"]["operators"].as_array().unwrap();
    assert!(operators.len() > 20);
    let csv = fs::read_to_string(&ops).unwrap();
    assert!(csv.starts_with("op,kind,m,k,n,repeat,cycles,bound"));
    assert_eq!(csv.lines().count(), 1 + operators.len());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn search_is_byte_reproducible_and_job_count_independent() {
    let dir = temp_dir("repro");
    let (a, b, c) = (dir.join("a"), dir.join("b"), dir.join("c"));
    for (out_dir, jobs) in [(&a, "4"), (&b, "4"), (&c, "1")] {
        let out = run(&[
            "search",
            "--preset",
            "desk",
            "--mode",
            "carbon",
            "--tops",
            "20",
            "--budget",
            "128",
            "--seed",
            "7",
            "--jobs",
            jobs,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(
            code(&out),
            0,
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let pareto_a = fs::read(a.join("pareto.csv")).unwrap();
    assert_eq!(pareto_a, fs::read(b.join("pareto.csv")).unwrap());
    assert_eq!(pareto_a, fs::read(c.join("pareto.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("candidates.jsonl")).unwrap(),
        fs::read(c.join("candidates.jsonl")).unwrap()
    );
    for name in ["config.json", "run.json", "candidates.jsonl", "pareto.csv"] {
        assert!(a.join(name).exists(), "missing {name}");
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn non_empty_output_dir_requires_force() {
    let dir = temp_dir("force");
    let out_dir = dir.join("run");
    let args = |extra: &[&str]| {
        let mut v = vec![
            "search",
            "--preset",
            "desk",
            "--budget",
            "64",
            "--out",
            out_dir.to_str().unwrap(),
        ];
        v.extend_from_slice(extra);
        v.iter().map(|s| s.to_string()).collect::<Vec<_>>()
    };
    let first = bin().args(args(&[])).output().unwrap();
    assert_eq!(code(&first), 0);
    let second = bin().args(args(&[])).output().unwrap();
    assert_eq!(code(&second), 1);
    assert!(String::from_utf8_lossy(&second.stderr).contains("--force"));
    let forced = bin().args(args(&["--force"])).output().unwrap();
    assert_eq!(code(&forced), 0);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn enumerate_then_search_stores_oracle_ratio() {
    let dir = temp_dir("oracle");
    let oracle_dir = dir.join("oracle");
    let run_dir = dir.join("nsga2");
    let out = run(&[
        "enumerate",
        "--preset",
        "desk",
        "--out",
        oracle_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(&[
        "search",
        "--preset",
        "desk",
        "--budget",
        "256",
        "--seed",
        "3",
        "--out",
        run_dir.to_str().unwrap(),
        "--oracle",
        oracle_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("run.json")).unwrap()).unwrap();
    let ratio = meta["oracle_hv_ratio"].as_f64().unwrap();
    assert!(ratio > 0.5 && ratio <= 1.0 + 1e-9, "ratio {ratio}");
    fs::remove_dir_all(&dir).unwrap();
}

fn search_run(dir: &Path, mode: &str, seed: &str) -> PathBuf {
    let out_dir = dir.join(format!("{mode}-{seed}").replace('+', "_"));
    let out = run(&[
        "search",
        "--preset",
        "desk",
        "--mode",
        mode,
        "--budget",
        "128",
        "--seed",
        seed,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out_dir
}

#[test]
fn report_iso_and_breakdown_write_csvs() {
    let dir = temp_dir("reports");
    let carbon_run = search_run(&dir, "carbon", "7");
    let latency_run = search_run(&dir, "latency", "7");
    // A target both runs can hit: the desk proxy's unpruned accuracy.
    let out = run(&[
        "report",
        "iso",
        "--runs",
        &format!("{},{}", carbon_run.display(), latency_run.display()),
        "--targets",
        "0.6,0.52",
        "--tol",
        "0.02",
    ]);
    assert_eq!(code(&out), 0);
    let iso = fs::read_to_string(carbon_run.join("reports/iso.csv")).unwrap();
    assert!(iso.starts_with("target,tolerance,mode,found"));
    assert!(iso.lines().count() >= 5);
    let out = run(&["report", "breakdown", "--run", carbon_run.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let breakdown = fs::read_to_string(carbon_run.join("reports/breakdown.csv")).unwrap();
    assert!(breakdown.starts_with("candidate,embodied_kg,operational_kg"));
    assert!(breakdown.lines().count() > 10);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn report_consistency_over_three_seeds() {
    let dir = temp_dir("consistency");
    let runs: Vec<String> = ["1", "2", "3"]
        .iter()
        .map(|seed| search_run(&dir, "carbon", seed).display().to_string())
        .collect();
    let out = run(&["report", "consistency", "--runs", &runs.join(",")]);
    assert_eq!(code(&out), 0);
    let body = stdout(&out);
    assert!(body.starts_with("mode,seeds,hv_mean,hv_std,hv_cv"));
    let fields: Vec<&str> = body.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[0], "carbon");
    assert_eq!(fields[1], "3");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn region_sweep_emits_three_ordered_points() {
    let dir = temp_dir("sweep-region");
    let out = run(&[
        "report",
        "sweep",
        "--preset",
        "desk",
        "--strategy",
        "exhaustive",
        "--axis",
        "region",
        "--regions",
        "TW,CA-US,BC-CA",
        "--out",
        dir.to_str().unwrap(),
        "--force",
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("reports/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let min_carbon: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    // Dirtier grids can only raise every candidate's carbon, so the
    // minimum is ordered TW >= CA-US >= BC-CA.
    assert!(
        min_carbon[0] > min_carbon[1] && min_carbon[1] > min_carbon[2],
        "{min_carbon:?}"
    );
    for region in ["TW", "CA-US", "BC-CA"] {
        assert!(dir
            .join(format!("region_{region}"))
            .join("pareto.csv")
            .exists());
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn latency_tier_sweep_respects_feasible_region_containment() {
    let dir = temp_dir("sweep-tier");
    // The 20 us tier genuinely excludes desk candidates; 50 and 100 ms
    // are loose.
    let out = run(&[
        "report",
        "sweep",
        "--preset",
        "desk",
        "--strategy",
        "exhaustive",
        "--axis",
        "latency",
        "--tiers",
        "0.00002,0.05,0.1",
        "--out",
        dir.to_str().unwrap(),
        "--force",
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("reports/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let min_carbon: Vec<Option<f64>> = rows
        .iter()
        .map(|r| r.split(',').nth(5).unwrap().parse().ok())
        .collect();
    // Tighter tiers never beat looser ones on minimum carbon.
    if let (Some(tight), Some(loose)) = (min_carbon[0], min_carbon[1]) {
        assert!(tight >= loose);
    }
    assert_eq!(
        min_carbon[1], min_carbon[2],
        "both loose tiers see the full space"
    );
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tops_sweep_fronts_respect_each_budget() {
    let dir = temp_dir("sweep-tops");
    let out = run(&[
        "report",
        "sweep",
        "--preset",
        "desk",
        "--strategy",
        "exhaustive",
        "--axis",
        "tops",
        "--out",
        dir.to_str().unwrap(),
        "--force",
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for budget in ["20", "4", "1"] {
        let pareto =
            fs::read_to_string(dir.join(format!("tops_{budget}")).join("pareto.csv")).unwrap();
        let budget: f64 = budget.parse().unwrap();
        for line in pareto.lines().skip(1) {
            let hw = line.split(',').nth(6).unwrap();
            let parts: Vec<f64> = hw
                .trim_start_matches("hw:")
                .split('/')
                .map(|v| v.parse().unwrap())
                .collect();
            let peak = parts[0] * parts[1] * parts[2] * 2.0 * 500e6 / 1e12;
            assert!(peak <= budget, "{hw} over {budget} TOPS");
        }
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_config_exits_1_with_diagnostics() {
    let dir = temp_dir("badcfg");
    let path = dir.join("bad.json");
    fs::write(&path, "{\"model\": 42}").unwrap();
    let out = run(&[
        "search",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json"), "stderr: {err}");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_1() {
    let out = run(&["search"]);
    assert_eq!(code(&out), 1);
    let out = run(&["no-such-command"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn hv_and_spearman_utilities() {
    let out = run(&["hv", "--points", "1,3;2,2;3,1", "--ref", "4,4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "6");
    let out = run(&["spearman", "--xs", "1,2,3", "--ys", "10,20,30"]);
    assert_eq!(stdout(&out).trim(), "1");
    let out = run(&["spearman", "--xs", "1,2,3", "--ys", "3,2,1"]);
    assert_eq!(stdout(&out).trim(), "-1");
    // Constant input is a usage error, not a crash.
    let out = run(&["spearman", "--xs", "1,1,1", "--ys", "3,2,1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn env_var_supplies_the_default_config() {
    let dir = temp_dir("envcfg");
    let path = dir.join("cfg.json");
    let mut cfg = carbondse::config::RunConfig::desk();
    cfg.seed = 99;
    fs::write(&path, cfg.snapshot_json().unwrap()).unwrap();
    let out = bin()
        .env("CARBONDSE_CONFIG", path.to_str().unwrap())
        .args([
            "search",
            "--budget",
            "64",
            "--out",
            dir.join("run").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("run/run.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 99);
    fs::remove_dir_all(&dir).unwrap();
}
