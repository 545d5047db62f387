use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use routing_bench::experiment::{parse_variants, read_results, write_results, ExperimentOptions};
use routing_bench::report::{write_report, GroupBy};
use routing_bench::{run_experiment, validate_plans, Violation};
use warehouse_routing::graph::ResourceDefaults;
use warehouse_routing::neighborhood::write_trace_csv;
use warehouse_routing::plan_csv::{read_plans, write_planset};
use warehouse_routing::{generate_suite, ScenarioSuite};

#[derive(Parser)]
#[command(name = "route-bench", version, about = "Route planner experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a map family and fleet assignments.
    GenSuite {
        /// Grid size as WxH.
        #[arg(long, default_value = "20x20")]
        grid: String,
        #[arg(long, default_value_t = 21)]
        maps: usize,
        #[arg(long, default_value_t = 500)]
        assignments: usize,
        #[arg(long, default_value_t = 100)]
        robots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add robots one at a time with every variant and record the outcomes.
    Run {
        #[arg(long)]
        suite: PathBuf,
        /// Comma-separated, e.g. CARP,CARP10,CARP100,LF,Proposed_4.
        #[arg(long)]
        variants: String,
        /// Robots per run; the suite's fleet size by default.
        #[arg(long)]
        fleet: Option<usize>,
        /// Comma-separated seeds; each one repeats every cell.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Comma-separated map indices; all maps by default.
        #[arg(long, value_delimiter = ',')]
        maps: Option<Vec<usize>>,
        /// Use only the first N assignments.
        #[arg(long)]
        assignments: Option<usize>,
        /// Replan with CARP100 when a Proposed addition fails.
        #[arg(long)]
        fallback: bool,
        /// Run cells one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
        /// Write the final joint plan of every successful run here.
        #[arg(long)]
        plans_dir: Option<PathBuf>,
        /// Write every plan update candidate to this CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate a results file into CSV tables.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "map")]
        by: GroupBy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a plan dump against a suite map.
    Validate {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        plans: PathBuf,
        /// Map index; taken from a `mapNN_` file name prefix when omitted.
        #[arg(long)]
        map: Option<usize>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GenSuite {
            grid,
            maps,
            assignments,
            robots,
            seed,
            out,
        } => {
            let (w, h) = grid
                .split_once(['x', 'X'])
                .and_then(|(w, h)| Some((w.parse().ok()?, h.parse().ok()?)))
                .with_context(|| format!("bad grid `{grid}`, expected WxH"))?;
            let suite = generate_suite(w, h, maps, assignments, robots, seed)?;
            suite.write(&out)?;
            eprintln!(
                "wrote {} maps and {} assignments of {} robots to {}",
                maps,
                assignments,
                robots,
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            suite,
            variants,
            fleet,
            seeds,
            maps,
            assignments,
            fallback,
            sequential,
            plans_dir,
            trace,
            out,
        } => {
            let suite = ScenarioSuite::read(&suite)
                .with_context(|| format!("reading suite {}", suite.display()))?;
            let variants = parse_variants(&variants)?;
            if variants.is_empty() {
                bail!("no variants given");
            }
            let options = ExperimentOptions {
                fleet: fleet.unwrap_or(suite.robots),
                seeds,
                maps,
                assignments,
                fallback,
                parallel: !sequential,
                keep_plans: plans_dir.is_some(),
                trace: trace.is_some(),
            };
            let cells = run_experiment(&suite, &variants, &options)?;

            if let Some(dir) = &plans_dir {
                fs::create_dir_all(dir)?;
                for c in &cells {
                    if let Some(plans) = &c.plans {
                        let r = &c.record;
                        let name = format!(
                            "map{:02}_a{:03}_{}_s{}.csv",
                            r.map, r.assignment, r.variant, r.seed
                        );
                        write_planset(plans, BufWriter::new(File::create(dir.join(name))?))?;
                    }
                }
            }
            if let Some(path) = &trace {
                write_traces(path, &cells)?;
            }
            let records: Vec<_> = cells.into_iter().map(|c| c.record).collect();
            write_results(&records, BufWriter::new(File::create(&out)?))?;

            let violations: u64 = records.iter().map(|r| r.violations).sum();
            let failed = records.iter().filter(|r| !r.succeeded()).count();
            eprintln!(
                "{} runs, {} failed, {} validation violations; results in {}",
                records.len(),
                failed,
                violations,
                out.display()
            );
            Ok(if violations > 0 {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Report { input, by, out } => {
            let records = read_results(
                File::open(&input).with_context(|| format!("opening {}", input.display()))?,
            )?;
            for path in write_report(&records, by, &out)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { suite, plans, map } => {
            let suite = ScenarioSuite::read(&suite)
                .with_context(|| format!("reading suite {}", suite.display()))?;
            let map = match map {
                Some(m) => m,
                None => map_from_name(&plans)
                    .or((suite.family.maps.len() == 1).then_some(0))
                    .context("cannot tell which map the plans are for; pass --map")?,
            };
            if map >= suite.family.maps.len() {
                bail!("map {map} is not in the suite");
            }
            let graph = suite.family.graph(map, ResourceDefaults::default())?;
            let dump = read_plans(
                File::open(&plans).with_context(|| format!("opening {}", plans.display()))?,
            )?;
            let mut violations = validate_plans(&graph, &dump.plans);
            let actions: u64 = dump.plans.iter().map(|p| p.arrival - p.depart()).sum();
            let makespan = dump.plans.iter().map(|p| p.arrival).max().unwrap_or(0);
            if let Some(recorded) = dump.total_actions.filter(|&t| t != actions) {
                violations.push(Violation::CostMismatch {
                    what: "total actions",
                    recorded,
                    actual: actions,
                });
            }
            if let Some(recorded) = dump.makespan.filter(|&m| m != makespan) {
                violations.push(Violation::CostMismatch {
                    what: "makespan",
                    recorded,
                    actual: makespan,
                });
            }
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            for v in &violations {
                writeln!(out, "{v}")?;
            }
            writeln!(
                out,
                "{} robots, total actions {actions}, makespan {makespan}: {} violations",
                dump.plans.len(),
                violations.len()
            )?;
            Ok(if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn map_from_name(path: &Path) -> Option<usize> {
    let name = path.file_name()?.to_str()?;
    let digits: String = name
        .strip_prefix("map")?
        .chars()
        .take_while(char::is_ascii_digit)
        .collect();
    digits.parse().ok()
}

fn write_traces(path: &Path, cells: &[routing_bench::CellResult]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "map,assignment,variant,seed,k,{}", trace_header())?;
    for c in cells {
        let r = &c.record;
        for (k, t) in &c.trace {
            let mut row = Vec::new();
            write_trace_csv(std::slice::from_ref(t), &mut row)?;
            let text = String::from_utf8(row)?;
            let line = text.lines().nth(1).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{k},{line}",
                r.map, r.assignment, r.variant, r.seed
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn trace_header() -> String {
    let mut buf = Vec::new();
    write_trace_csv(&[], &mut buf).expect("writing to memory");
    String::from_utf8(buf)
        .expect("ascii header")
        .trim_end()
        .to_string()
}
