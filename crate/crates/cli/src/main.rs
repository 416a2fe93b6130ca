//! Benchmark runner: solves MovingAI map/scenario bundles or generated
//! archetype instances across agent counts, robustness radii and solver
//! variants, streaming one CSV (or JSON-lines) row per run to stdout.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;

use kcbs_core::grid::{parse_scen, GridMap};
use kcbs_core::harness::{
    generate_archetype, run_benchmark, success_rates, Archetype, BenchmarkConfig, RunRecord,
    Scenario, Variant, ALL_VARIANTS, CSV_HEADER,
};

#[derive(Parser, Debug)]
#[command(
    name = "kcbs",
    about = "k-robust multi-agent path finding benchmark runner",
    disable_help_subcommand = true
)]
struct Args {
    /// MovingAI .map file.
    #[arg(long, required_unless_present = "archetype", conflicts_with = "archetype")]
    map: Option<PathBuf>,

    /// MovingAI .scen files (repeatable).
    #[arg(long, num_args = 1.., requires = "map")]
    scen: Vec<PathBuf>,

    /// Agent counts: a single count or a..b[:step] range.
    #[arg(long, default_value = "2")]
    agents: String,

    /// Robustness radii, comma separated.
    #[arg(long, default_value = "1", value_delimiter = ',')]
    k: Vec<i32>,

    /// Solver variants, comma separated
    /// (KCBS, KCBSH, KCBSH-RM, KCBSH-RM-C, KCBSH-RM-C-T; default all).
    #[arg(long, value_delimiter = ',')]
    variants: Vec<String>,

    /// Per-run time limit in seconds.
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,

    /// Seed recorded into solver configurations.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output format for run rows on stdout.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    out: String,

    /// Generated instance instead of map/scen: kind:param with kind one of
    /// rectangle, corridor, target.
    #[arg(long)]
    archetype: Option<String>,
}

fn parse_agents(spec: &str) -> Option<Vec<usize>> {
    let spec = spec.trim();
    if let Some((range, step)) = spec.split_once(':') {
        let (a, b) = range.split_once("..")?;
        let (a, b, step): (usize, usize, usize) =
            (a.trim().parse().ok()?, b.trim().parse().ok()?, step.trim().parse().ok()?);
        if step == 0 || a > b {
            return None;
        }
        return Some((a..=b).step_by(step).collect());
    }
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        if a > b {
            return None;
        }
        return Some((a..=b).collect());
    }
    spec.parse().ok().map(|n| vec![n])
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn emit(records: &[RunRecord]) {
    let rates = success_rates(records);
    for ((agents, k, variant), rate) in rates {
        eprintln!("success-rate agents={agents} k={k} variant={variant}: {rate:.2}");
    }
}

fn main() -> ExitCode {
    let args = Args::parse();

    let agent_counts = match parse_agents(&args.agents) {
        Some(counts) if !counts.is_empty() && counts.iter().all(|&n| n > 0) => counts,
        _ => return usage_error("invalid --agents (expected N or a..b[:step] with N > 0)"),
    };
    if args.k.iter().any(|&k| k < 0) {
        return usage_error("--k values must be non-negative");
    }
    let variants: Vec<Variant> = if args.variants.is_empty() {
        ALL_VARIANTS.to_vec()
    } else {
        let mut out = Vec::new();
        for name in &args.variants {
            match Variant::parse(name) {
                Some(v) => out.push(v),
                None => return usage_error(&format!("unknown variant {name:?}")),
            }
        }
        out
    };
    if args.time_limit <= 0.0 {
        return usage_error("--time-limit must be positive");
    }

    let config = BenchmarkConfig {
        agent_counts,
        k_values: args.k.clone(),
        variants,
        time_limit: Duration::from_secs_f64(args.time_limit),
        seed: args.seed,
    };

    let (map_name, map, scenarios) = if let Some(spec) = &args.archetype {
        let Some(kind) = Archetype::parse(spec) else {
            return usage_error(&format!(
                "invalid --archetype {spec:?} (expected rectangle:N, corridor:N or target:N)"
            ));
        };
        if config.agent_counts.iter().any(|&n| n > 2) {
            return usage_error("archetype instances have exactly 2 agents");
        }
        let instance = generate_archetype(kind, config.k_values.first().copied().unwrap_or(0));
        let scen = Scenario { name: kind.label(), tasks: instance.tasks.clone() };
        (kind.label(), instance.map, vec![scen])
    } else {
        let map_path = args.map.as_ref().expect("clap enforces map without archetype");
        if args.scen.is_empty() {
            return usage_error("--scen is required with --map");
        }
        let map_text = match std::fs::read_to_string(map_path) {
            Ok(text) => text,
            Err(err) => return usage_error(&format!("cannot read {}: {err}", map_path.display())),
        };
        let map = match GridMap::parse(&map_text) {
            Ok(map) => map,
            Err(err) => return usage_error(&format!("{}: {err}", map_path.display())),
        };
        let mut scenarios = Vec::new();
        for path in &args.scen {
            let text = match std::fs::read_to_string(path) {
                Ok(text) => text,
                Err(err) => return usage_error(&format!("cannot read {}: {err}", path.display())),
            };
            let tasks = match parse_scen(&text, &map) {
                Ok(tasks) => tasks,
                Err(err) => return usage_error(&format!("{}: {err}", path.display())),
            };
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            scenarios.push(Scenario { name, tasks });
        }
        let name = map_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| map_path.display().to_string());
        (name, map, scenarios)
    };

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let csv = args.out == "csv";
    if csv && writeln!(out, "{CSV_HEADER}").is_err() {
        return ExitCode::from(1);
    }
    let mut write_row = |record: &RunRecord| -> std::io::Result<()> {
        if csv {
            writeln!(out, "{}", record.csv_row())?;
        } else {
            writeln!(out, "{}", record.json_row())?;
        }
        out.flush()
    };
    let records = match run_benchmark(&map_name, &map, &scenarios, &config, Some(&mut write_row)) {
        Ok(records) => records,
        Err(err) => return usage_error(&err.to_string()),
    };
    emit(&records);
    ExitCode::SUCCESS
}
