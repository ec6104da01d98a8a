use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use rightsize::bench::{no_timeline_bound, run_bench, run_preset, Preset, Scenario};
use rightsize::costs::{generate_synthetic, CostModel, CostParams, GenSpec, Interval};
use rightsize::ingest::{ingest_trace, IngestOptions, SampleSpec, DEFAULT_QUANTUM_SECONDS};
use rightsize::lp::{build_lp, fractionality_report, solve_lp};
use rightsize::model::{trim_timeline, verify_solution, Instance, Solution};
use rightsize::oracle::{exact_opt, OracleLimits};
use rightsize::penmap::{HeightPolicy, MappingSource};
use rightsize::placement::{self, FitPolicy, SolveConfig};
use rightsize::Error;

#[derive(Parser)]
#[command(
    name = "rightsize",
    version,
    about = "Cost-minimal node purchasing for time-limited tasks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Penmap,
    PenmapF,
    Lpmap,
    LpmapF,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fit {
    First,
    SimDot,
    SimCos,
}

#[derive(Clone, Copy, ValueEnum)]
enum Height {
    Avg,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pricing {
    Homogeneous,
    Heterogeneous,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic instance.
    Generate {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 5)]
        dims: usize,
        #[arg(long, default_value_t = 24)]
        horizon: u32,
        /// Demand interval as `lo,hi`.
        #[arg(long, default_value = "0.01,0.1")]
        demand: String,
        /// Capacity interval as `lo,hi`.
        #[arg(long, default_value = "0.2,1.0")]
        capacity: String,
        #[arg(long, value_enum, default_value_t = Pricing::Homogeneous)]
        pricing: Pricing,
        #[arg(long, default_value_t = 1.0)]
        exponent: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Build an instance from trace CSV files.
    Ingest {
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        types: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_QUANTUM_SECONDS)]
        quantum: f64,
        /// Per-dimension price coefficients `cpu,memory` for rows without a cost.
        #[arg(long, default_value = "1,1")]
        coefficients: String,
        #[arg(long, default_value_t = 1.0)]
        exponent: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve an instance. Without --fit/--height the preset keeps the best of
    /// its policy combinations.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::LpmapF)]
        algo: Algo,
        #[arg(long, value_enum)]
        fit: Option<Fit>,
        #[arg(long, value_enum)]
        height: Option<Height>,
        /// Turn on cross filling.
        #[arg(long)]
        fill: bool,
        #[arg(long)]
        segregate_large: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check a solution against its instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// LP lower bound on the optimal cost.
    Bound {
        #[arg(long)]
        instance: PathBuf,
        /// Also report how fractional the LP optimum is.
        #[arg(long)]
        fractionality: bool,
        /// Write the LP in CPLEX LP format.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// LP bound with every task always active, and its ratio to the
    /// timeline-aware LPMapF cost.
    NoTimelineBound {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Exact optimum of a tiny instance.
    Exact {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 60)]
        budget_secs: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark scenario and write the results table.
    Bench {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Record wall-clock times (the CSV is then not reproducible).
        #[arg(long)]
        timings: bool,
    },
}

fn interval(text: &str) -> anyhow::Result<Interval> {
    let v = numbers(text)?;
    if v.len() != 2 {
        bail!("expected `lo,hi`, got {text:?}");
    }
    Ok(Interval(v[0], v[1]))
}

fn numbers(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .with_context(|| format!("not a number: {p:?}"))
        })
        .collect()
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    Instance::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Generate {
            n,
            m,
            dims,
            horizon,
            demand,
            capacity,
            pricing,
            exponent,
            seed,
            out,
        } => {
            let spec = GenSpec {
                n,
                m,
                dims,
                horizon,
                demand: interval(&demand)?,
                capacity: interval(&capacity)?,
                cost: match pricing {
                    Pricing::Homogeneous if exponent == 1.0 => CostModel::Homogeneous,
                    Pricing::Homogeneous => CostModel::Params(CostParams {
                        coefficients: vec![1.0; dims],
                        exponent,
                    }),
                    Pricing::Heterogeneous => CostModel::heterogeneous(exponent),
                },
                seed,
            };
            emit(&generate_synthetic(&spec)?.to_json()?, out.as_deref())?;
        }
        Command::Ingest {
            tasks,
            types,
            n,
            m,
            seed,
            quantum,
            coefficients,
            exponent,
            out,
        } => {
            let options = IngestOptions {
                sample: SampleSpec { n, m, seed },
                quantum_seconds: quantum,
                cost_params: CostParams {
                    coefficients: numbers(&coefficients)?,
                    exponent,
                },
            };
            let (instance, report) = ingest_trace(&tasks, &types, &options)?;
            eprintln!(
                "dropped {} task rows and {} node-type rows; {} task pairs changed overlap under quantization; horizon {} trimmed to {}",
                report.dropped_tasks,
                report.dropped_types,
                report.overlap_changes,
                report.horizon_before_trim,
                instance.horizon
            );
            emit(&instance.to_json()?, out.as_deref())?;
        }
        Command::Solve {
            instance,
            algo,
            fit,
            height,
            fill,
            segregate_large,
            out,
        } => {
            let inst = load(&instance)?;
            let (lp, preset_fill) = match algo {
                Algo::Penmap => (false, false),
                Algo::PenmapF => (false, true),
                Algo::Lpmap => (true, false),
                Algo::LpmapF => (true, true),
            };
            let cross_fill = fill || preset_fill;
            let solution = if fit.is_none() && height.is_none() && !segregate_large {
                let preset = match (lp, cross_fill) {
                    (false, false) => Preset::PenMap,
                    (false, true) => Preset::PenMapF,
                    (true, false) => Preset::LpMap,
                    (true, true) => Preset::LpMapF,
                };
                run_preset(&inst, preset, None)?
            } else {
                let mapping = if lp {
                    MappingSource::Lp
                } else {
                    MappingSource::Penalty(match height.unwrap_or(Height::Avg) {
                        Height::Avg => HeightPolicy::Avg,
                        Height::Max => HeightPolicy::Max,
                    })
                };
                let fit = match fit.unwrap_or(Fit::First) {
                    Fit::First => FitPolicy::First,
                    Fit::SimDot => FitPolicy::SimilarityDot,
                    Fit::SimCos => FitPolicy::SimilarityCosine,
                };
                let mut config = SolveConfig::new(mapping, fit, cross_fill);
                config.segregate_large = segregate_large;
                placement::solve(&inst, &config)?
            };
            eprintln!(
                "cost {:.6} with {} nodes",
                solution.cost(),
                solution.nodes.len()
            );
            emit(&solution.to_json()?, out.as_deref())?;
        }
        Command::Verify { instance, solution } => {
            let inst = load(&instance)?;
            let sol = Solution::load(&solution)
                .with_context(|| format!("loading {}", solution.display()))?;
            let report = verify_solution(&inst, &sol)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.is_feasible() {
                eprintln!("solution is infeasible");
                return Ok(1);
            }
            eprintln!("solution is feasible, cost {:.6}", sol.cost());
        }
        Command::Bound {
            instance,
            fractionality,
            dump_lp,
        } => {
            let inst = load(&instance)?;
            let model = build_lp(&trim_timeline(&inst).0);
            if let Some(path) = dump_lp {
                let mut w = BufWriter::new(File::create(&path)?);
                model.write_lp_format(&mut w)?;
                w.flush()?;
            }
            let sol = solve_lp(&model)?;
            println!("{:.9}", sol.objective_value.max(0.0));
            if fractionality {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&fractionality_report(&sol))?
                );
            }
        }
        Command::NoTimelineBound { instance } => {
            let inst = load(&instance)?;
            let bound = no_timeline_bound(&inst)?;
            let cost = run_preset(&inst, Preset::LpMapF, None)?.cost();
            println!("no_timeline_bound {bound:.6}");
            println!("lpmapf_cost {cost:.6}");
            if cost > 0.0 {
                println!("ratio {:.6}", bound / cost);
            }
        }
        Command::Exact {
            instance,
            budget_secs,
            out,
        } => {
            let inst = load(&instance)?;
            let limits = OracleLimits {
                time_budget: std::time::Duration::from_secs(budget_secs),
                ..OracleLimits::default()
            };
            let result = exact_opt(&inst, &limits)?;
            eprintln!(
                "optimal cost {:.6} ({} search nodes)",
                result.cost, result.explored
            );
            emit(&result.solution.to_json()?, out.as_deref())?;
        }
        Command::Bench {
            scenario,
            out,
            timings,
        } => {
            let text = std::fs::read_to_string(&scenario)
                .with_context(|| format!("reading {}", scenario.display()))?;
            let mut s = Scenario::from_json(&text)?;
            s.record_time |= timings;
            let report = run_bench(&s)?;
            report.write_csv(BufWriter::new(File::create(&out)?))?;
            for summary in &report.summary {
                eprintln!(
                    "{:8} mean normalized cost {:.4} over {} runs",
                    summary.algorithm.to_string(),
                    summary.mean_normalized,
                    summary.runs
                );
            }
            if report.has_errors() {
                eprintln!("some runs failed; see the error column");
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<io::Error>().is_some() {
        return 4;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InfeasibleTask { .. }) => 2,
        Some(Error::Solver(_)) => 3,
        Some(Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse { .. }) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
