//! Instance builders shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use rightsize::costs::CostParams;
use rightsize::ingest::{build_instance, IngestOptions, SampleSpec, TraceNodeType, TraceTask};
use rightsize::{Instance, NodeType, Task};

/// Normalized (cpu, memory) shapes loosely following the machine mix of a
/// production cluster trace: a few big shapes, many half and quarter ones.
pub const MACHINE_SHAPES: [(f64, f64); 13] = [
    (1.0, 1.0),
    (1.0, 0.5),
    (1.0, 0.75),
    (0.75, 0.75),
    (0.75, 0.5),
    (0.5, 1.0),
    (0.5, 0.75),
    (0.5, 0.5),
    (0.5, 0.25),
    (0.5, 0.125),
    (0.25, 0.5),
    (0.25, 0.25),
    (0.25, 0.125),
];

/// Price of memory relative to cpu for trace-shaped machines.
pub fn trace_pricing() -> CostParams {
    CostParams {
        coefficients: vec![1.0, 0.4],
        exponent: 1.0,
    }
}

/// Trace rows: `tasks` jobs over a 30-day window with heavy-tailed
/// durations and small, correlated cpu/memory requests, plus the 13 machine
/// shapes without prices.
pub fn trace_rows(tasks: usize, seed: u64) -> (Vec<TraceTask>, Vec<TraceNodeType>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window: f64 = 30.0 * 86_400.0;
    // Median two hours, long tail into days.
    let duration = LogNormal::new((2.0f64 * 3600.0).ln(), 1.6).unwrap();
    let cpu = LogNormal::new(0.02f64.ln(), 0.9).unwrap();
    let ratio = LogNormal::new(0.0, 0.5).unwrap();
    let rows = (0..tasks)
        .map(|i| {
            let start = rng.gen_range(0.0..window);
            let len = duration.sample(&mut rng).min(10.0 * 86_400.0);
            let c: f64 = cpu.sample(&mut rng).clamp(0.001, 0.5);
            let m = (c * ratio.sample(&mut rng)).clamp(0.0005, 0.5);
            TraceTask {
                id: format!("job{i}"),
                start_seconds: start.floor(),
                end_seconds: (start + len).floor(),
                cpu: c,
                memory: m,
            }
        })
        .collect();
    let types = MACHINE_SHAPES
        .iter()
        .enumerate()
        .map(|(k, &(c, m))| TraceNodeType {
            id: format!("M{}", k + 1),
            cpu_capacity: c,
            memory_capacity: m,
            cost: None,
        })
        .collect();
    (rows, types)
}

/// A trace-shaped instance of `n` tasks and `m` machine shapes sampled from
/// a pool of `2n` generated rows, quantized hourly and trimmed.
pub fn trace_instance(n: usize, m: usize, seed: u64) -> Instance {
    let (rows, types) = trace_rows(2 * n, seed);
    let options = IngestOptions {
        sample: SampleSpec {
            n: Some(n),
            m: Some(m),
            seed,
        },
        cost_params: trace_pricing(),
        ..IngestOptions::default()
    };
    build_instance(&rows, &types, &options).unwrap().0
}

/// Random tiny instance: at most 6 tasks, 2 node-types, 4 slots and 2 dims.
/// With `small_only` every demand is at most half of every capacity.
pub fn tiny_instance(rng: &mut impl Rng, small_only: bool) -> Instance {
    let dims = rng.gen_range(1..=2);
    let m = rng.gen_range(1..=2);
    let horizon = rng.gen_range(1..=4);
    let n = rng.gen_range(1..=6);
    let node_types: Vec<NodeType> = (0..m)
        .map(|b| {
            let cap: Vec<f64> = (0..dims).map(|_| rng.gen_range(0.4..=1.0)).collect();
            let cost = rng.gen_range(1.0..=10.0);
            NodeType::new(format!("B{}", b + 1), cap, (cost * 4.0f64).round() / 4.0)
        })
        .collect();
    let least: Vec<f64> = (0..dims)
        .map(|d| {
            node_types
                .iter()
                .map(|t| t.capacity[d])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let tasks = (0..n)
        .map(|u| {
            // Large tasks are drawn against one node-type so that it hosts them.
            let limit: Vec<f64> = if small_only {
                least.iter().map(|c| c / 2.0).collect()
            } else {
                node_types[rng.gen_range(0..m)].capacity.clone()
            };
            let demand = limit
                .iter()
                .map(|l| rng.gen_range(0.05..=1.0) * l)
                .collect();
            let a = rng.gen_range(1..=horizon);
            let b = rng.gen_range(1..=horizon);
            Task::new(format!("u{}", u + 1), demand, a.min(b), a.max(b))
        })
        .collect();
    let inst = Instance::new(dims, horizon, node_types, tasks).unwrap();
    inst.check_every_task_fits().unwrap();
    inst
}

/// Two time-sharing large tasks plus one long small one. A single big node
/// hosts all three when spans are respected; with every task always active
/// they need far more.
pub fn time_sharing_instance(small_type_cost: f64) -> Instance {
    Instance::new(
        2,
        4,
        vec![
            NodeType::new("B1", vec![1.0, 1.0], 10.0),
            NodeType::new("B2", vec![0.6, 0.6], small_type_cost),
        ],
        vec![
            Task::new("t1", vec![0.6, 0.6], 1, 2),
            Task::new("t2", vec![0.6, 0.6], 3, 4),
            Task::new("t3", vec![0.4, 0.4], 1, 4),
        ],
    )
    .unwrap()
}

/// `k` staggered copies of the time-sharing pattern on one timeline.
pub fn time_sharing_chain(k: usize, small_type_cost: f64) -> Instance {
    let mut tasks = Vec::new();
    for j in 0..k {
        let o = 4 * j as u32;
        tasks.push(Task::new(format!("a{j}"), vec![0.6, 0.6], o + 1, o + 2));
        tasks.push(Task::new(format!("b{j}"), vec![0.6, 0.6], o + 3, o + 4));
        tasks.push(Task::new(format!("c{j}"), vec![0.4, 0.4], o + 1, o + 4));
    }
    Instance::new(
        2,
        4 * k as u32,
        vec![
            NodeType::new("B1", vec![1.0, 1.0], 10.0),
            NodeType::new("B2", vec![0.6, 0.6], small_type_cost),
        ],
        tasks,
    )
    .unwrap()
}
