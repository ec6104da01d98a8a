//! Named solver presets and the seeded benchmark harness.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::costs::{generate_synthetic, GenSpec};
use crate::error::{Error, Result};
use crate::ingest::{ingest_trace, IngestOptions};
use crate::lp::{build_lp, lower_bound, solve_lp, LpSolution};
use crate::model::{trim_timeline, verify_solution, Instance, Solution};
use crate::penmap::{HeightPolicy, MappingSource};
use crate::placement::{self, FitPolicy, SolveConfig};

/// A solver family; each preset tries several policy combinations and keeps
/// the cheapest solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preset {
    PenMap,
    PenMapF,
    #[serde(rename = "LPMap")]
    LpMap,
    #[serde(rename = "LPMapF")]
    LpMapF,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::PenMap,
        Preset::PenMapF,
        Preset::LpMap,
        Preset::LpMapF,
    ];

    pub fn uses_lp(self) -> bool {
        matches!(self, Preset::LpMap | Preset::LpMapF)
    }

    pub fn cross_fill(self) -> bool {
        matches!(self, Preset::PenMapF | Preset::LpMapF)
    }

    /// The combinations the preset minimizes over, in evaluation order.
    pub fn configs(self) -> Vec<SolveConfig> {
        let fits = [FitPolicy::First, FitPolicy::SimilarityCosine];
        let mappings: Vec<MappingSource> = if self.uses_lp() {
            vec![MappingSource::Lp]
        } else {
            vec![
                MappingSource::Penalty(HeightPolicy::Avg),
                MappingSource::Penalty(HeightPolicy::Max),
            ]
        };
        mappings
            .into_iter()
            .flat_map(|mapping| fits.map(|fit| SolveConfig::new(mapping, fit, self.cross_fill())))
            .collect()
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::PenMap => "PenMap",
            Preset::PenMapF => "PenMapF",
            Preset::LpMap => "LPMap",
            Preset::LpMapF => "LPMapF",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "penmap" => Ok(Preset::PenMap),
            "penmap-f" | "penmapf" => Ok(Preset::PenMapF),
            "lpmap" => Ok(Preset::LpMap),
            "lpmap-f" | "lpmapf" => Ok(Preset::LpMapF),
            _ => Err(Error::InvalidArgument(format!("unknown algorithm {s}"))),
        }
    }
}

/// Runs a preset. LP presets reuse `lp` when given; it must belong to the
/// trimmed form of `instance`.
pub fn run_preset(
    instance: &Instance,
    preset: Preset,
    lp: Option<&LpSolution>,
) -> Result<Solution> {
    instance.check_every_task_fits()?;
    let owned;
    let lp = match (preset.uses_lp(), lp) {
        (false, _) => None,
        (true, Some(sol)) => Some(sol),
        (true, None) => {
            owned = solve_lp(&build_lp(&trim_timeline(instance).0))?;
            Some(&owned)
        }
    };
    let started = Instant::now();
    let mut best: Option<Solution> = None;
    for config in preset.configs() {
        let sol = match lp {
            Some(lp) => placement::solve_with_lp(instance, lp, &config)?,
            None => placement::solve(instance, &config)?,
        };
        if best.as_ref().is_none_or(|b| sol.cost() < b.cost() - 1e-9) {
            best = Some(sol);
        }
    }
    let mut best = best.expect("every preset has at least one configuration");
    best.meta.algorithm = preset.to_string();
    best.meta.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(best)
}

/// LP bound with every task treated as active throughout.
pub fn no_timeline_bound(instance: &Instance) -> Result<f64> {
    instance.validate()?;
    lower_bound(&instance.without_timeline())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// Generated instance; the row seed replaces the generator seed.
    Synthetic(GenSpec),
    /// Sampled from trace files; the row seed replaces the sampling seed.
    Trace {
        tasks: PathBuf,
        node_types: PathBuf,
        #[serde(default)]
        options: IngestOptions,
    },
    /// A fixed instance JSON file, identical for every seed.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub source: InstanceSource,
    pub algorithms: Vec<Preset>,
    pub seeds: Vec<u64>,
    /// Write wall-clock times; off keeps the output reproducible byte for byte.
    #[serde(default)]
    pub record_time: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("scenario lists no algorithm".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument("scenario lists no seed".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn instance(&self, seed: u64) -> Result<Instance> {
        match &self.source {
            InstanceSource::Synthetic(spec) => generate_synthetic(&spec.clone().with_seed(seed)),
            InstanceSource::Trace {
                tasks,
                node_types,
                options,
            } => {
                let mut options = options.clone();
                options.sample.seed = seed;
                Ok(ingest_trace(tasks, node_types, &options)?.0)
            }
            InstanceSource::File(path) => Instance::load(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: String,
    pub seed: u64,
    pub algorithm: Preset,
    pub cost: Option<f64>,
    pub lb: Option<f64>,
    pub normalized: Option<f64>,
    pub time_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub algorithm: Preset,
    pub runs: usize,
    pub mean_cost: f64,
    pub mean_lb: f64,
    pub mean_normalized: f64,
    pub mean_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<BenchSummary>,
}

impl BenchReport {
    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn mean_normalized(&self, preset: Preset) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.algorithm == preset)
            .map(|s| s.mean_normalized)
    }

    /// Per-seed rows followed by one `mean` row per algorithm.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "scenario",
            "seed",
            "algorithm",
            "cost",
            "lb",
            "normalized",
            "time_ms",
            "error",
        ])?;
        let num = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.scenario.clone(),
                r.seed.to_string(),
                r.algorithm.to_string(),
                num(r.cost),
                num(r.lb),
                num(r.normalized),
                format!("{:.3}", r.time_ms),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        let scenario = self
            .rows
            .first()
            .map(|r| r.scenario.clone())
            .unwrap_or_default();
        for s in &self.summary {
            w.write_record([
                scenario.clone(),
                "mean".to_string(),
                s.algorithm.to_string(),
                format!("{:.6}", s.mean_cost),
                format!("{:.6}", s.mean_lb),
                format!("{:.6}", s.mean_normalized),
                format!("{:.3}", s.mean_time_ms),
                String::new(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn normalized(cost: f64, lb: f64) -> f64 {
    if lb > 0.0 {
        cost / lb
    } else if cost == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Runs every algorithm on every seed. Failures are recorded in the row's
/// `error` column and the run continues. Rows are ordered by seed, then by
/// algorithm as listed.
pub fn run_bench(scenario: &Scenario) -> Result<BenchReport> {
    scenario.validate()?;
    let mut rows = Vec::new();
    for &seed in &scenario.seeds {
        let row = |algorithm, error: String| BenchRow {
            scenario: scenario.name.clone(),
            seed,
            algorithm,
            cost: None,
            lb: None,
            normalized: None,
            time_ms: 0.0,
            error: Some(error),
        };
        let instance = match scenario.instance(seed).and_then(|i| {
            i.check_every_task_fits()?;
            Ok(i)
        }) {
            Ok(i) => i,
            Err(e) => {
                rows.extend(scenario.algorithms.iter().map(|&a| row(a, e.to_string())));
                continue;
            }
        };

        let lp_started = Instant::now();
        let lp = solve_lp(&build_lp(&trim_timeline(&instance).0));
        let lp_ms = lp_started.elapsed().as_secs_f64() * 1e3;
        let lb = lp.as_ref().map(|s| s.objective_value.max(0.0));

        for &algorithm in &scenario.algorithms {
            let started = Instant::now();
            let result = match (&lp, algorithm.uses_lp()) {
                (Err(e), true) => Err(Error::Solver(e.to_string())),
                (Ok(sol), true) => run_preset(&instance, algorithm, Some(sol)),
                (_, false) => run_preset(&instance, algorithm, None),
            };
            let mut time_ms = started.elapsed().as_secs_f64() * 1e3;
            if algorithm.uses_lp() {
                time_ms += lp_ms;
            }
            let mut r = match result.and_then(|sol| {
                let report = verify_solution(&instance, &sol)?;
                if report.is_feasible() {
                    Ok(sol)
                } else {
                    Err(Error::Structural(format!(
                        "{} produced an infeasible solution",
                        algorithm
                    )))
                }
            }) {
                Ok(sol) => {
                    let cost = sol.cost();
                    let mut r = row(algorithm, String::new());
                    r.error = None;
                    r.cost = Some(cost);
                    match &lb {
                        Ok(lb) => {
                            r.lb = Some(*lb);
                            r.normalized = Some(normalized(cost, *lb));
                        }
                        Err(e) => r.error = Some(format!("lower bound: {e}")),
                    }
                    r
                }
                Err(e) => row(algorithm, e.to_string()),
            };
            r.time_ms = if scenario.record_time { time_ms } else { 0.0 };
            rows.push(r);
        }
    }

    let summary = scenario
        .algorithms
        .iter()
        .map(|&algorithm| {
            let ok: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.algorithm == algorithm && r.error.is_none())
                .collect();
            let mean = |f: &dyn Fn(&BenchRow) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            BenchSummary {
                algorithm,
                runs: ok.len(),
                mean_cost: mean(&|r| r.cost.unwrap_or(0.0)),
                mean_lb: mean(&|r| r.lb.unwrap_or(0.0)),
                mean_normalized: mean(&|r| r.normalized.unwrap_or(0.0)),
                mean_time_ms: mean(&|r| r.time_ms),
            }
        })
        .collect();
    Ok(BenchReport { rows, summary })
}
