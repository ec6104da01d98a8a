//! Loading preprocessed cluster traces from flat CSV files.
//!
//! Task file columns: `id,start_seconds,end_seconds,cpu,memory`.
//! Node-type file columns: `id,cpu_capacity,memory_capacity` and an optional
//! `cost`. Resources are normalized to `[0, 1]`. A header row is required;
//! columns are matched by name. Rows with an empty field are dropped and
//! counted.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costs::{node_cost, CostParams};
use crate::error::{Error, Result};
use crate::model::{trim_timeline, Instance, NodeType, Task};

/// Default discretization step: one hour.
pub const DEFAULT_QUANTUM_SECONDS: f64 = 3600.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceTask {
    pub id: String,
    pub start_seconds: f64,
    pub end_seconds: f64,
    pub cpu: f64,
    pub memory: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceNodeType {
    pub id: String,
    pub cpu_capacity: f64,
    pub memory_capacity: f64,
    pub cost: Option<f64>,
}

/// How many rows of each file to keep. `None` keeps all of them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n: Option<usize>,
    pub m: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub sample: SampleSpec,
    pub quantum_seconds: f64,
    /// Prices for node-types without a `cost` value.
    pub cost_params: CostParams,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            sample: SampleSpec::default(),
            quantum_seconds: DEFAULT_QUANTUM_SECONDS,
            cost_params: CostParams::homogeneous(2),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub dropped_tasks: usize,
    pub dropped_types: usize,
    /// Sampled task pairs whose overlap status differs between real time and
    /// the quantized timeline.
    pub overlap_changes: usize,
    pub horizon_before_trim: u32,
}

struct Columns {
    source: String,
    index: Vec<usize>,
    optional: Vec<Option<usize>>,
}

impl Columns {
    fn new(
        headers: &csv::StringRecord,
        source: &str,
        required: &[&str],
        optional: &[&str],
    ) -> Result<Self> {
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
        };
        let mut index = Vec::new();
        for name in required {
            index.push(find(name).ok_or_else(|| Error::Parse {
                source_name: source.to_string(),
                line: 1,
                message: format!("missing column {name}"),
            })?);
        }
        Ok(Self {
            source: source.to_string(),
            index,
            optional: optional.iter().map(|n| find(n)).collect(),
        })
    }

    fn error(&self, line: u64, message: String) -> Error {
        Error::Parse {
            source_name: self.source.clone(),
            line,
            message,
        }
    }

    fn number(&self, record: &csv::StringRecord, col: usize, line: u64, name: &str) -> Result<f64> {
        let raw = record.get(col).unwrap_or("").trim();
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(line, format!("{name} is not a number: {raw:?}"))),
        }
    }
}

fn is_blank(record: &csv::StringRecord, cols: &[usize]) -> bool {
    cols.iter()
        .any(|&c| record.get(c).is_none_or(|v| v.trim().is_empty()))
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn check_unit(cols: &Columns, v: f64, line: u64, name: &str, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { v >= 0.0 } else { v > 0.0 };
    if ok && v <= 1.0 {
        Ok(())
    } else {
        Err(cols.error(line, format!("{name} {v} is outside the normalized range")))
    }
}

/// Parses a task file; returns the rows and the number of dropped rows.
pub fn read_tasks<R: Read>(input: R, source: &str) -> Result<(Vec<TraceTask>, usize)> {
    let mut rdr = reader(input);
    let names = ["id", "start_seconds", "end_seconds", "cpu", "memory"];
    let cols = Columns::new(rdr.headers()?, source, &names, &[])?;
    let mut rows = Vec::new();
    let mut dropped = 0;
    for record in rdr.records() {
        let record = record?;
        if is_blank(&record, &cols.index) {
            dropped += 1;
            continue;
        }
        let line = line_of(&record);
        let num = |k: usize| cols.number(&record, cols.index[k], line, names[k]);
        let row = TraceTask {
            id: record[cols.index[0]].to_string(),
            start_seconds: num(1)?,
            end_seconds: num(2)?,
            cpu: num(3)?,
            memory: num(4)?,
        };
        if row.start_seconds > row.end_seconds {
            return Err(cols.error(line, "start_seconds is after end_seconds".into()));
        }
        check_unit(&cols, row.cpu, line, "cpu", true)?;
        check_unit(&cols, row.memory, line, "memory", true)?;
        rows.push(row);
    }
    Ok((rows, dropped))
}

/// Parses a node-type file; returns the rows and the number of dropped rows.
/// A present but empty `cost` field counts as missing and drops the row.
pub fn read_node_types<R: Read>(input: R, source: &str) -> Result<(Vec<TraceNodeType>, usize)> {
    let mut rdr = reader(input);
    let names = ["id", "cpu_capacity", "memory_capacity"];
    let cols = Columns::new(rdr.headers()?, source, &names, &["cost"])?;
    let mut rows = Vec::new();
    let mut dropped = 0;
    let mut needed = cols.index.clone();
    needed.extend(cols.optional[0]);
    for record in rdr.records() {
        let record = record?;
        if is_blank(&record, &needed) {
            dropped += 1;
            continue;
        }
        let line = line_of(&record);
        let row = TraceNodeType {
            id: record[cols.index[0]].to_string(),
            cpu_capacity: cols.number(&record, cols.index[1], line, names[1])?,
            memory_capacity: cols.number(&record, cols.index[2], line, names[2])?,
            cost: cols.optional[0]
                .map(|c| cols.number(&record, c, line, "cost"))
                .transpose()?,
        };
        check_unit(&cols, row.cpu_capacity, line, "cpu_capacity", false)?;
        check_unit(&cols, row.memory_capacity, line, "memory_capacity", false)?;
        if let Some(c) = row.cost {
            if c <= 0.0 {
                return Err(cols.error(line, format!("cost {c} is not positive")));
            }
        }
        rows.push(row);
    }
    Ok((rows, dropped))
}

/// Indices of `k` of `len` rows drawn without replacement, in file order.
fn sample_rows(
    len: usize,
    k: Option<usize>,
    rng: &mut ChaCha8Rng,
    what: &str,
) -> Result<Vec<usize>> {
    let Some(k) = k else {
        return Ok((0..len).collect());
    };
    if k > len {
        return Err(Error::InvalidArgument(format!(
            "asked for {k} {what} but only {len} are available"
        )));
    }
    let mut picked = sample(rng, len, k).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Maps a real-time span onto 1-based slots of width `quantum` counted from
/// `origin`: every quantum that `[start, end)` intersects is occupied, and a
/// zero-length span occupies the quantum containing it.
pub fn quantize(start: f64, end: f64, origin: f64, quantum: f64) -> (u32, u32) {
    let s = ((start - origin) / quantum).floor() as u32 + 1;
    let e = ((end - origin) / quantum).ceil() as u32;
    (s, e.max(s))
}

/// Pairs whose overlap differs between the half-open real spans and the
/// quantized slots.
fn count_overlap_changes(real: &[(f64, f64)], slots: &[(u32, u32)]) -> usize {
    let mut changes = 0;
    for i in 0..real.len() {
        for j in i + 1..real.len() {
            let a = real[i].0 < real[j].1 && real[j].0 < real[i].1;
            let b = slots[i].0 <= slots[j].1 && slots[j].0 <= slots[i].1;
            if a != b {
                changes += 1;
            }
        }
    }
    changes
}

/// Builds a trimmed two-dimensional instance from parsed trace rows.
pub fn build_instance(
    tasks: &[TraceTask],
    types: &[TraceNodeType],
    options: &IngestOptions,
) -> Result<(Instance, IngestReport)> {
    if !(options.quantum_seconds.is_finite() && options.quantum_seconds > 0.0) {
        return Err(Error::InvalidArgument("quantum must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.sample.seed);
    let type_rows = sample_rows(types.len(), options.sample.m, &mut rng, "node-types")?;
    let task_rows = sample_rows(tasks.len(), options.sample.n, &mut rng, "tasks")?;

    let mut node_types = Vec::with_capacity(type_rows.len());
    for &i in &type_rows {
        let row = &types[i];
        let capacity = vec![row.cpu_capacity, row.memory_capacity];
        let cost = match row.cost {
            Some(c) => c,
            None => node_cost(&capacity, &options.cost_params)?,
        };
        node_types.push(NodeType::new(row.id.clone(), capacity, cost));
    }

    let origin = task_rows
        .iter()
        .map(|&i| tasks[i].start_seconds)
        .fold(f64::INFINITY, f64::min);
    let mut real = Vec::with_capacity(task_rows.len());
    let mut slots = Vec::with_capacity(task_rows.len());
    let mut out_tasks = Vec::with_capacity(task_rows.len());
    for &i in &task_rows {
        let row = &tasks[i];
        let span = quantize(
            row.start_seconds,
            row.end_seconds,
            origin,
            options.quantum_seconds,
        );
        real.push((row.start_seconds, row.end_seconds));
        slots.push(span);
        out_tasks.push(Task::new(
            row.id.clone(),
            vec![row.cpu, row.memory],
            span.0,
            span.1,
        ));
    }
    let horizon = slots.iter().map(|s| s.1).max().unwrap_or(1);

    let raw = Instance::new(2, horizon, node_types, out_tasks)?;
    let report = IngestReport {
        overlap_changes: count_overlap_changes(&real, &slots),
        horizon_before_trim: horizon,
        ..IngestReport::default()
    };
    Ok((trim_timeline(&raw).0, report))
}

/// Reads, samples, quantizes and trims a trace.
pub fn ingest_trace(
    tasks: impl AsRef<Path>,
    types: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<(Instance, IngestReport)> {
    let tasks_path = tasks.as_ref();
    let types_path = types.as_ref();
    let (task_rows, dropped_tasks) =
        read_tasks(File::open(tasks_path)?, &tasks_path.display().to_string())?;
    let (type_rows, dropped_types) =
        read_node_types(File::open(types_path)?, &types_path.display().to_string())?;
    let (instance, mut report) = build_instance(&task_rows, &type_rows, options)?;
    report.dropped_tasks = dropped_tasks;
    report.dropped_types = dropped_types;
    Ok((instance, report))
}

/// Writes a two-dimensional instance back as trace CSVs, slot `t` covering
/// `[(t - 1) q, t q)`. Ingesting the output with the same quantum and no
/// sampling yields the trimmed instance again.
pub fn write_trace(
    instance: &Instance,
    quantum_seconds: f64,
    tasks_out: impl Write,
    types_out: impl Write,
) -> Result<()> {
    if instance.dims != 2 {
        return Err(Error::InvalidArgument(format!(
            "trace files hold two dimensions, the instance has {}",
            instance.dims
        )));
    }
    let mut w = csv::Writer::from_writer(tasks_out);
    w.write_record(["id", "start_seconds", "end_seconds", "cpu", "memory"])?;
    for t in &instance.tasks {
        w.write_record([
            t.id.clone(),
            ((t.start - 1) as f64 * quantum_seconds).to_string(),
            (t.end as f64 * quantum_seconds).to_string(),
            t.demand[0].to_string(),
            t.demand[1].to_string(),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(types_out);
    w.write_record(["id", "cpu_capacity", "memory_capacity", "cost"])?;
    for ty in &instance.node_types {
        w.write_record([
            ty.id.clone(),
            ty.capacity[0].to_string(),
            ty.capacity[1].to_string(),
            ty.cost.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
