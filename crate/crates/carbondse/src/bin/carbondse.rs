//! Command-line front end: config loading, single-candidate evaluation,
//! search, enumeration, reports, and the small numeric utilities. All
//! logic lives in the library; this binary parses flags and wires calls.
//!
//! Exit codes: 0 success, 1 usage or malformed input, 2 infeasible
//! candidate.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use carbondse::archspace::HardwareConfig;
use carbondse::carbon::total_carbon;
use carbondse::config::{parse_bytes, RunConfig, StrategyKind};
use carbondse::error::{Error, Result};
use carbondse::optimize::{hypervolume_points, ModeKind, Provenance, RunMeta, RunRecord};
use carbondse::perf::{graph_cost, op_cost_csv};
use carbondse::proxy::spearman;
use carbondse::report::{
    breakdown, breakdown_csv, consistency, consistency_csv, iso_accuracy, iso_accuracy_csv,
    run_sweep, sweep_csv, SweepAxis, DEFAULT_ISO_TOLERANCE,
};
use carbondse::workload::{lower_to_graph, PrunedDims};

#[derive(Parser)]
#[command(
    name = "carbondse",
    version,
    about = "Carbon-aware model/hardware co-design search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration JSON (default: $CARBONDSE_CONFIG, else the desk
    /// preset).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration: desk | clip-b16 | clip-b32.
    #[arg(long)]
    preset: Option<String>,
    /// Cost-coefficient JSON overriding the config's values.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    /// Carbon-factor JSON overriding the config's values.
    #[arg(long)]
    factors: Option<PathBuf>,
    /// Grid-intensity JSON overriding the bundled dataset.
    #[arg(long)]
    grids: Option<PathBuf>,
    /// Operating region code (e.g. CA-US, TW, BC-CA).
    #[arg(long)]
    region: Option<String>,
    /// Fabrication region code; overrides the fab grid intensity.
    #[arg(long)]
    fab_region: Option<String>,
    /// Fixed operating grid intensity in gCO2e/kWh, bypassing the dataset.
    #[arg(long, value_name = "G_PER_KWH")]
    grid_override: Option<f64>,
    #[arg(long)]
    lifetime_years: Option<f64>,
    #[arg(long)]
    duty_hours: Option<f64>,
    #[arg(long)]
    inf_per_sec: Option<f64>,
    /// Peak-compute budget in TOPS (presets: 20, 4, 1).
    #[arg(long)]
    tops: Option<f64>,
    /// Objective mode: carbon | latency | energy | carbon+latency.
    #[arg(long)]
    mode: Option<String>,
    /// Latency cap in milliseconds for capped modes (default 50).
    #[arg(long)]
    latency_cap_ms: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluation budget for the evolutionary strategy.
    #[arg(long)]
    budget: Option<usize>,
    /// Search strategy: nsga2 | exhaustive.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    population: Option<usize>,
    /// Worker threads for candidate evaluation (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

impl CommonArgs {
    fn load_config(&self) -> Result<RunConfig> {
        let mut cfg = if let Some(path) = &self.config {
            RunConfig::load(path)?
        } else if let Some(preset) = &self.preset {
            RunConfig::preset(preset)?
        } else if let Ok(path) = std::env::var("CARBONDSE_CONFIG") {
            RunConfig::load(Path::new(&path))?
        } else {
            RunConfig::desk()
        };
        if self.config.is_some() {
            if let Some(preset) = &self.preset {
                let base = RunConfig::preset(preset)?;
                cfg.model = base.model;
                cfg.prune_steps = base.prune_steps;
            }
        }
        if let Some(p) = &self.coeffs {
            cfg.coefficients = serde_json::from_str(&std::fs::read_to_string(p)?)?;
        }
        if let Some(p) = &self.factors {
            cfg.factors = serde_json::from_str(&std::fs::read_to_string(p)?)?;
        }
        if let Some(p) = &self.grids {
            cfg.grid =
                carbondse::carbon::StaticGridDataset::from_json(&std::fs::read_to_string(p)?)?;
        }
        if let Some(r) = &self.region {
            cfg.region = r.clone();
        }
        if let Some(r) = &self.fab_region {
            cfg.fab_region = Some(r.clone());
        }
        if self.grid_override.is_some() {
            cfg.grid_override_g_per_kwh = self.grid_override;
        }
        if let Some(v) = self.lifetime_years {
            cfg.schedule.lifetime_years = v;
        }
        if let Some(v) = self.duty_hours {
            cfg.schedule.active_hours_per_day = v;
        }
        if let Some(v) = self.inf_per_sec {
            cfg.schedule.inferences_per_second = v;
        }
        if let Some(v) = self.tops {
            cfg.platform.tops_budget = v;
        }
        if let Some(m) = &self.mode {
            cfg.mode = ModeKind::parse(m)?;
            if cfg.mode.has_latency_objective() {
                cfg.latency_cap_s = None;
            }
        }
        if let Some(ms) = self.latency_cap_ms {
            cfg.latency_cap_s = Some(ms / 1000.0);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.budget {
            cfg.budget = v;
        }
        if let Some(s) = &self.strategy {
            cfg.strategy = match s.as_str() {
                "nsga2" => StrategyKind::Nsga2,
                "exhaustive" => StrategyKind::Exhaustive,
                other => return Err(Error::Config(format!("unknown strategy '{other}'"))),
            };
        }
        if let Some(v) = self.population {
            cfg.population = v;
        }
        if let Some(jobs) = self.jobs {
            // Evaluation batches are order-preserving, so thread count
            // never changes results.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one (model, hardware) candidate and print JSON.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Model dims per encoder: "l,ffn,hidden,heads[;l,ffn,hidden,heads]".
        #[arg(long)]
        model: Option<String>,
        /// Hardware tuple "tc,pe_x,pe_y,l2,l2_bw,glb" (l2 in KB, glb in MB,
        /// or suffixed like 64K / 2M).
        #[arg(long)]
        hw: Option<String>,
        /// Include the lowered operator graph in the JSON output.
        #[arg(long)]
        dump_graph: bool,
        /// Write the per-operator cost table (CSV) to this path.
        #[arg(long, value_name = "PATH")]
        dump_ops: Option<PathBuf>,
    },
    /// Search the joint space and write a run directory.
    Search {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: PathBuf,
        /// Overwrite a non-empty output directory.
        #[arg(long)]
        force: bool,
        /// Oracle run directory; stores the hypervolume ratio in run.json.
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
    /// Exhaustively evaluate the joint space (the desk-scale oracle).
    Enumerate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
        /// Abort above this many candidates (default 1,000,000).
        #[arg(long)]
        cap: Option<u128>,
    },
    /// Post-run analytics over run directories.
    Report {
        #[command(subcommand)]
        report: ReportCommand,
    },
    /// Exact hypervolume of minimized points against a reference point.
    Hv {
        /// Points "1,3;2,2;3,1" or @file with one point per line.
        #[arg(long)]
        points: String,
        /// Reference point "4,4".
        #[arg(long = "ref")]
        reference: String,
    },
    /// Spearman rank correlation of two score lists.
    Spearman {
        /// Comma-separated scores or @file with one value per line.
        #[arg(long)]
        xs: String,
        #[arg(long)]
        ys: String,
    },
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum ReportCommand {
    /// Iso-accuracy comparison across run directories.
    Iso {
        /// Run directories to compare (one per mode).
        #[arg(long, value_delimiter = ',', required = true)]
        runs: Vec<PathBuf>,
        /// Accuracy targets.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_ISO_TOLERANCE)]
        tol: f64,
        /// Where to write reports/iso.csv (default: first run dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embodied/operational carbon breakdown of one run.
    Breakdown {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the configured search across an axis and emit a joined CSV.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Axis: tops | region | latency.
        #[arg(long)]
        axis: String,
        /// Region codes for --axis region.
        #[arg(long, value_delimiter = ',')]
        regions: Option<Vec<String>>,
        /// TOPS budgets for --axis tops (default 20,4,1).
        #[arg(long, value_delimiter = ',')]
        tops_list: Option<Vec<f64>>,
        /// Latency tiers in seconds for --axis latency
        /// (default 0.010,0.050,0.100).
        #[arg(long, value_delimiter = ',')]
        tiers: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Hypervolume consistency statistics across same-config runs.
    Consistency {
        #[arg(long, value_delimiter = ',', required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_hw(s: &str) -> Result<HardwareConfig> {
    let f: Vec<&str> = s.split(',').map(str::trim).collect();
    if f.len() != 6 {
        return Err(Error::Config(format!(
            "hardware tuple needs 6 fields tc,pe_x,pe_y,l2,l2_bw,glb; got '{s}'"
        )));
    }
    let uint = |s: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| Error::Config(format!("bad number '{s}' in hardware tuple")))
    };
    let sized = |s: &str, bare_unit: u64| -> Result<u64> {
        if s.ends_with(['K', 'k', 'M', 'm']) {
            parse_bytes(s)
        } else {
            Ok(uint(s)? * bare_unit)
        }
    };
    Ok(HardwareConfig {
        tc: uint(f[0])? as usize,
        pe_x: uint(f[1])? as usize,
        pe_y: uint(f[2])? as usize,
        l2_bytes: sized(f[3], 1024)?,
        l2_bw: uint(f[4])?,
        glb_bytes: sized(f[5], 1024 * 1024)?,
    })
}

fn parse_model_dims(s: &str) -> Result<Vec<PrunedDims>> {
    s.split(';')
        .map(|enc| {
            let d: Vec<&str> = enc.split(',').map(str::trim).collect();
            if d.len() != 4 {
                return Err(Error::Config(format!(
                    "encoder dims need 4 fields layers,ffn,hidden,heads; got '{enc}'"
                )));
            }
            let num = |s: &str| -> Result<usize> {
                s.parse()
                    .map_err(|_| Error::Config(format!("bad dimension '{s}'")))
            };
            Ok(PrunedDims {
                num_layers: num(d[0])?,
                ffn_dim: num(d[1])?,
                hidden_dim: num(d[2])?,
                num_heads: num(d[3])?,
            })
        })
        .collect()
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    let body = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => s.replace(',', "\n"),
    };
    body.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Config(format!("bad number '{t}'")))
        })
        .collect()
}

fn parse_points(s: &str) -> Result<Vec<Vec<f64>>> {
    let body = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => s.replace(';', "\n"),
    };
    body.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad number '{t}'")))
                })
                .collect()
        })
        .collect()
}

fn cmd_evaluate(
    common: &CommonArgs,
    model_dims: Option<&str>,
    hw: Option<&str>,
    dump_graph: bool,
    dump_ops: Option<&Path>,
) -> Result<bool> {
    let cfg = common.load_config()?;
    let space = cfg.joint_space()?;
    let ctx = cfg.eval_context()?;
    let model = match model_dims {
        Some(s) => cfg.model.base().pruned(&parse_model_dims(s)?)?,
        None => cfg.model.clone(),
    };
    let hw = match hw {
        Some(s) => parse_hw(s)?,
        None => *space
            .arch
            .enumerate()
            .first()
            .ok_or_else(|| Error::Config("hardware space is empty; pass --hw".into()))?,
    };
    let candidate =
        carbondse::optimize::evaluate_candidate(&model, &hw, &ctx, Provenance::default());

    let mut out = serde_json::Map::new();
    out.insert("feasible".into(), candidate.feasible.into());
    out.insert(
        "violations".into(),
        serde_json::to_value(&candidate.violations)?,
    );
    out.insert("metrics".into(), serde_json::to_value(candidate.metrics)?);
    let graph = lower_to_graph(&model);
    if let Ok(perf) = graph_cost(&graph, &hw, &ctx.platform, &ctx.coeffs) {
        let carbon = total_carbon(&perf, &ctx.platform, &ctx.factors, &ctx.schedule, &ctx.grid);
        if let Some(path) = dump_ops {
            std::fs::write(path, op_cost_csv(&graph, &perf))?;
        }
        let mut perf_json = serde_json::to_value(&perf)?;
        if let Some(obj) = perf_json.as_object_mut() {
            obj.remove("op_costs");
        }
        out.insert("perf".into(), perf_json);
        out.insert("carbon".into(), serde_json::to_value(carbon)?);
    }
    out.insert("model".into(), model.fingerprint().into());
    out.insert("hw".into(), hw.fingerprint().into());
    if dump_graph {
        out.insert("graph".into(), serde_json::to_value(&graph)?);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::Value::Object(out))?
    );
    if !candidate.feasible {
        for v in &candidate.violations {
            eprintln!("infeasible: {} ({v:?})", v.label());
        }
    }
    Ok(candidate.feasible)
}

fn store_oracle_ratio(run_dir: &Path, oracle_dir: &Path, record: &RunRecord) -> Result<()> {
    let oracle = RunRecord::load_dir(oracle_dir)?;
    let reference = oracle
        .front
        .ref_point
        .clone()
        .ok_or_else(|| Error::Config("oracle run has no reference point".into()))?;
    let oracle_hv = carbondse::optimize::hypervolume(&oracle.front, &reference)?;
    let run_hv = carbondse::optimize::hypervolume(&record.front, &reference)?;
    let ratio = run_hv / oracle_hv;
    let meta_path = run_dir.join("run.json");
    let mut meta: RunMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
    meta.oracle_hv_ratio = Some(ratio);
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
    eprintln!("hypervolume ratio vs oracle: {ratio:.4}");
    Ok(())
}

fn cmd_search(common: &CommonArgs, out: &Path, force: bool, oracle: Option<&Path>) -> Result<()> {
    let cfg = common.load_config()?;
    let record = cfg.run_search()?;
    record.write_dir(out, &cfg.snapshot_json()?, force)?;
    if let Some(oracle_dir) = oracle {
        store_oracle_ratio(out, oracle_dir, &record)?;
    }
    eprintln!(
        "{}: {} evaluations, front {}, hv {:?} -> {}",
        record.strategy,
        record.evaluations,
        record.front.len(),
        record.hypervolume,
        out.display()
    );
    Ok(())
}

fn cmd_enumerate(common: &CommonArgs, out: &Path, force: bool, cap: Option<u128>) -> Result<()> {
    let mut cfg = common.load_config()?;
    cfg.strategy = StrategyKind::Exhaustive;
    let space = cfg.joint_space()?;
    let ctx = cfg.eval_context()?;
    use carbondse::optimize::SearchStrategy;
    let search = carbondse::optimize::ExhaustiveSearch {
        cap: cap.unwrap_or(1_000_000),
    };
    let record = search.run(&space, &ctx, 0, cfg.seed)?;
    record.write_dir(out, &cfg.snapshot_json()?, force)?;
    eprintln!(
        "exhaustive: {} evaluations, front {} -> {}",
        record.evaluations,
        record.front.len(),
        out.display()
    );
    Ok(())
}

fn write_report(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let reports = dir.join("reports");
    std::fs::create_dir_all(&reports)?;
    let path = reports.join(name);
    std::fs::write(&path, body)?;
    Ok(path)
}

fn cmd_report(report: &ReportCommand) -> Result<()> {
    match report {
        ReportCommand::Iso {
            runs,
            targets,
            tol,
            out,
        } => {
            let records = runs
                .iter()
                .map(|d| RunRecord::load_dir(d))
                .collect::<Result<Vec<_>>>()?;
            let rows = iso_accuracy(&records, targets, *tol);
            let csv = iso_accuracy_csv(&rows);
            let dir = out.clone().unwrap_or_else(|| runs[0].clone());
            let path = write_report(&dir, "iso.csv", &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", path.display());
        }
        ReportCommand::Breakdown { run, out } => {
            let record = RunRecord::load_dir(run)?;
            let snapshot: RunConfig =
                serde_json::from_str(&std::fs::read_to_string(run.join("config.json"))?)?;
            let ctx = snapshot.eval_context()?;
            let rows = breakdown(&record, &ctx);
            let csv = breakdown_csv(&rows);
            let dir = out.clone().unwrap_or_else(|| run.clone());
            let path = write_report(&dir, "breakdown.csv", &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", path.display());
        }
        ReportCommand::Sweep {
            common,
            axis,
            regions,
            tops_list,
            tiers,
            out,
            force,
        } => {
            let cfg = common.load_config()?;
            let axis = match axis.as_str() {
                "tops" => {
                    SweepAxis::Tops(tops_list.clone().unwrap_or_else(|| vec![20.0, 4.0, 1.0]))
                }
                "region" => SweepAxis::Region(
                    regions
                        .clone()
                        .unwrap_or_else(|| vec!["TW".into(), "CA-US".into(), "BC-CA".into()]),
                ),
                "latency" => SweepAxis::LatencyTier(
                    tiers.clone().unwrap_or_else(|| vec![0.010, 0.050, 0.100]),
                ),
                other => return Err(Error::Config(format!("unknown axis '{other}'"))),
            };
            let points = run_sweep(&cfg, &axis)?;
            std::fs::create_dir_all(out)?;
            for p in &points {
                let dir = out.join(format!("{}_{}", p.axis, p.point.replace(['/', ' '], "-")));
                p.record.write_dir(&dir, &cfg.snapshot_json()?, *force)?;
            }
            let csv = sweep_csv(&points);
            let path = write_report(out, "sweep.csv", &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", path.display());
        }
        ReportCommand::Consistency { runs, out } => {
            let records = runs
                .iter()
                .map(|d| RunRecord::load_dir(d))
                .collect::<Result<Vec<_>>>()?;
            let stats = consistency(&records)?;
            let csv = consistency_csv(records[0].mode.kind, &stats);
            let dir = out.clone().unwrap_or_else(|| runs[0].clone());
            let path = write_report(&dir, "consistency.csv", &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Evaluate {
            common,
            model,
            hw,
            dump_graph,
            dump_ops,
        } => cmd_evaluate(
            common,
            model.as_deref(),
            hw.as_deref(),
            *dump_graph,
            dump_ops.as_deref(),
        ),
        Command::Search {
            common,
            out,
            force,
            oracle,
        } => {
            cmd_search(common, out, *force, oracle.as_deref())?;
            Ok(true)
        }
        Command::Enumerate {
            common,
            out,
            force,
            cap,
        } => {
            cmd_enumerate(common, out, *force, *cap)?;
            Ok(true)
        }
        Command::Report { report } => {
            cmd_report(report)?;
            Ok(true)
        }
        Command::Hv { points, reference } => {
            let points = parse_points(points)?;
            let reference = parse_values(reference)?;
            println!("{}", hypervolume_points(&points, &reference)?);
            Ok(true)
        }
        Command::Spearman { xs, ys } => {
            let xs = parse_values(xs)?;
            let ys = parse_values(ys)?;
            println!("{}", spearman(&xs, &ys)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2 on usage errors; the documented contract
            // reserves 2 for infeasible candidates, so map usage to 1.
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
