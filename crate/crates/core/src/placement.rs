//! Greedy per-node-type placement (first-fit and similarity-fit), cross
//! node-type filling, and assembly of the two-phase solver.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::model::{
    trim_timeline, Instance, Node, Solution, SolutionMeta, Task, FEASIBILITY_TOLERANCE,
};
use crate::penmap::{self, HeightPolicy, Mapping, MappingSource};

/// Rule used to pick among the open nodes that can take a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitPolicy {
    /// Earliest-purchased feasible node.
    First,
    /// Feasible node maximizing the dot product of normalized demand and
    /// remaining capacity over the task's span.
    SimilarityDot,
    /// As `SimilarityDot`, divided by both vector norms.
    SimilarityCosine,
}

impl fmt::Display for FitPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitPolicy::First => "first",
            FitPolicy::SimilarityDot => "sim-dot",
            FitPolicy::SimilarityCosine => "sim-cos",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityVariant {
    Dot,
    Cosine,
}

/// Full configuration of one two-phase solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SolveConfig {
    pub mapping: MappingSource,
    pub fit: FitPolicy,
    pub cross_fill: bool,
    #[serde(default)]
    pub segregate_large: bool,
}

impl SolveConfig {
    pub fn new(mapping: MappingSource, fit: FitPolicy, cross_fill: bool) -> Self {
        Self {
            mapping,
            fit,
            cross_fill,
            segregate_large: false,
        }
    }

    fn meta(&self, algorithm: &str) -> SolutionMeta {
        SolutionMeta {
            algorithm: algorithm.to_string(),
            mapping: Some(self.mapping.to_string()),
            fit: Some(self.fit.to_string()),
            cross_fill: self.cross_fill,
            segregate_large: self.segregate_large,
            elapsed_ms: 0.0,
        }
    }
}

/// A purchased node with its remaining-capacity profile over the timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub node_type: usize,
    pub tasks: Vec<usize>,
    pub purchase_order: u32,
    dims: usize,
    /// Row-major `horizon x dims`; row `t - 1` holds slot `t`.
    remaining: Vec<f64>,
}

impl NodeState {
    pub fn new(instance: &Instance, node_type: usize, purchase_order: u32) -> Self {
        let dims = instance.dims;
        let cap = &instance.node_types[node_type].capacity;
        let mut remaining = Vec::with_capacity(instance.horizon as usize * dims);
        for _ in 0..instance.horizon {
            remaining.extend_from_slice(cap);
        }
        Self {
            node_type,
            tasks: Vec::new(),
            purchase_order,
            dims,
            remaining,
        }
    }

    /// Remaining capacity along `dim` at slot `t` (1-based).
    pub fn remaining(&self, t: u32, dim: usize) -> f64 {
        self.remaining[(t as usize - 1) * self.dims + dim]
    }

    fn span_rows<'a>(&'a self, task: &Task) -> impl Iterator<Item = &'a [f64]> + 'a {
        let lo = (task.start as usize - 1) * self.dims;
        let hi = task.end as usize * self.dims;
        self.remaining[lo..hi].chunks_exact(self.dims)
    }

    fn place(&mut self, u: usize, task: &Task) {
        let lo = (task.start as usize - 1) * self.dims;
        let hi = task.end as usize * self.dims;
        for row in self.remaining[lo..hi].chunks_exact_mut(self.dims) {
            for (r, dem) in row.iter_mut().zip(&task.demand) {
                *r -= dem;
            }
        }
        self.tasks.push(u);
    }
}

/// Whether `task` fits into the node at every slot of its span.
pub fn fits(state: &NodeState, task: &Task) -> bool {
    state.span_rows(task).all(|row| {
        row.iter()
            .zip(&task.demand)
            .all(|(rem, dem)| *dem <= rem + FEASIBILITY_TOLERANCE)
    })
}

/// Similarity between the task's capacity-normalized demand and the node's
/// capacity-normalized remaining capacity, flattened over the task's span.
pub fn similarity_score(
    state: &NodeState,
    task: &Task,
    capacity: &[f64],
    variant: SimilarityVariant,
) -> f64 {
    let mut dot = 0.0;
    let mut rem_sq = 0.0;
    let mut slots = 0usize;
    for row in state.span_rows(task) {
        for ((rem, dem), cap) in row.iter().zip(&task.demand).zip(capacity) {
            let r = rem / cap;
            dot += (dem / cap) * r;
            rem_sq += r * r;
        }
        slots += 1;
    }
    match variant {
        SimilarityVariant::Dot => dot,
        SimilarityVariant::Cosine => {
            let dem_sq: f64 = task
                .demand
                .iter()
                .zip(capacity)
                .map(|(dem, cap)| (dem / cap).powi(2))
                .sum::<f64>()
                * slots as f64;
            let norm = (dem_sq * rem_sq).sqrt();
            if norm > 0.0 {
                dot / norm
            } else {
                0.0
            }
        }
    }
}

/// Hands out purchase sequence numbers across a whole solve.
#[derive(Debug, Default)]
pub struct PurchaseCounter(u32);

impl PurchaseCounter {
    fn next(&mut self) -> u32 {
        let n = self.0;
        self.0 += 1;
        n
    }
}

fn choose_node(
    states: &[NodeState],
    node_type: usize,
    task: &Task,
    capacity: &[f64],
    fit: FitPolicy,
) -> Option<usize> {
    let variant = match fit {
        FitPolicy::First => {
            return states
                .iter()
                .position(|s| s.node_type == node_type && fits(s, task))
        }
        FitPolicy::SimilarityDot => SimilarityVariant::Dot,
        FitPolicy::SimilarityCosine => SimilarityVariant::Cosine,
    };
    let mut best: Option<(usize, f64)> = None;
    for (k, state) in states.iter().enumerate() {
        if state.node_type != node_type || !fits(state, task) {
            continue;
        }
        let score = similarity_score(state, task, capacity, variant);
        // Strict improvement keeps ties on the earlier purchase.
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((k, score));
        }
    }
    best.map(|(k, _)| k)
}

/// Places `tasks` (indices into `instance.tasks`) onto nodes of type
/// `node_type`, appending to `states`; nodes of other types are ignored.
/// Tasks are taken in the given order and a node is purchased only when no
/// open node of the type can take the task.
pub fn place_into(
    instance: &Instance,
    node_type: usize,
    tasks: &[usize],
    fit: FitPolicy,
    states: &mut Vec<NodeState>,
    counter: &mut PurchaseCounter,
) -> Result<()> {
    let ty = &instance.node_types[node_type];
    for &u in tasks {
        let task = &instance.tasks[u];
        match choose_node(states, node_type, task, &ty.capacity, fit) {
            Some(k) => states[k].place(u, task),
            None => {
                if !ty.hosts_alone(task) {
                    return Err(Error::InfeasibleTask {
                        task: task.id.clone(),
                        reason: format!("does not fit an empty node of type {}", ty.id),
                    });
                }
                let mut state = NodeState::new(instance, node_type, counter.next());
                state.place(u, task);
                states.push(state);
            }
        }
    }
    Ok(())
}

/// Sorts task indices by increasing start slot, ties by task id.
pub fn sort_by_start(instance: &Instance, tasks: &mut [usize]) {
    tasks.sort_by(|&a, &b| {
        let (ta, tb) = (&instance.tasks[a], &instance.tasks[b]);
        ta.start.cmp(&tb.start).then_with(|| ta.id.cmp(&tb.id))
    });
}

/// Greedy placement of one node-type's group. `tasks` must already be in
/// processing order (see [`sort_by_start`]).
pub fn place_group(
    instance: &Instance,
    node_type: usize,
    tasks: &[usize],
    fit: FitPolicy,
) -> Result<Vec<NodeState>> {
    let mut states = Vec::new();
    place_into(
        instance,
        node_type,
        tasks,
        fit,
        &mut states,
        &mut PurchaseCounter::default(),
    )?;
    Ok(states)
}

/// Piggy-backs remaining tasks onto the open nodes of one node-type, in
/// increasing average height relative to that type (ties by task id). Each
/// task that fits goes to the earliest-purchased feasible node; no node is
/// purchased. Returns the placed task indices in placement order.
pub fn cross_fill(
    instance: &Instance,
    open_nodes: &mut [NodeState],
    remaining: &[usize],
    node_type: usize,
) -> Vec<usize> {
    if open_nodes.is_empty() {
        return Vec::new();
    }
    let ty = &instance.node_types[node_type];
    let mut order: Vec<(f64, usize)> = remaining
        .iter()
        .map(|&u| (penmap::relative_demand_avg(&instance.tasks[u], ty), u))
        .collect();
    order.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| instance.tasks[a.1].id.cmp(&instance.tasks[b.1].id))
    });

    let mut placed = Vec::new();
    for (_, u) in order {
        let task = &instance.tasks[u];
        if let Some(state) = open_nodes.iter_mut().find(|s| fits(s, task)) {
            state.place(u, task);
            placed.push(u);
        }
    }
    placed
}

/// Node-type processing order for cross filling: decreasing total capacity
/// per unit cost, ties by input index.
pub fn fill_order(instance: &Instance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..instance.node_types.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = instance.node_types[a].capacity_per_cost();
        let rb = instance.node_types[b].capacity_per_cost();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    order
}

fn assemble(instance: &Instance, mut states: Vec<NodeState>, meta: SolutionMeta) -> Solution {
    states.sort_by_key(|s| s.purchase_order);
    let nodes = states
        .into_iter()
        .map(|s| {
            let ty = &instance.node_types[s.node_type];
            Node {
                node_type: ty.id.clone(),
                cost: ty.cost,
                tasks: s
                    .tasks
                    .iter()
                    .map(|&u| instance.tasks[u].id.clone())
                    .collect(),
                purchase_order: s.purchase_order,
            }
        })
        .collect();
    Solution::from_nodes(nodes, meta)
}

fn place_all(
    instance: &Instance,
    mapping: &Mapping,
    subset: &[usize],
    fit: FitPolicy,
    cross_fill_on: bool,
    states: &mut Vec<NodeState>,
    counter: &mut PurchaseCounter,
) -> Result<()> {
    let m = instance.node_types.len();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &u in subset {
        groups[mapping.assign[u]].push(u);
    }

    if !cross_fill_on {
        for (b, group) in groups.iter_mut().enumerate() {
            sort_by_start(instance, group);
            place_into(instance, b, group, fit, states, counter)?;
        }
        return Ok(());
    }

    let mut is_remaining = vec![false; instance.tasks.len()];
    for &u in subset {
        is_remaining[u] = true;
    }
    for b in fill_order(instance) {
        let mut own: Vec<usize> = groups[b]
            .iter()
            .copied()
            .filter(|&u| is_remaining[u])
            .collect();
        sort_by_start(instance, &mut own);
        let first_new = states.len();
        place_into(instance, b, &own, fit, states, counter)?;
        for &u in &own {
            is_remaining[u] = false;
        }
        let rest: Vec<usize> = subset
            .iter()
            .copied()
            .filter(|&u| is_remaining[u])
            .collect();
        for u in cross_fill(instance, &mut states[first_new..], &rest, b) {
            is_remaining[u] = false;
        }
    }
    Ok(())
}

/// Runs the placement phase for a given mapping.
///
/// Without cross filling every node-type's group is packed independently in
/// input order. With it, node-types are visited in [`fill_order`]; each
/// packs its still-remaining tasks and then absorbs whatever other remaining
/// tasks fit into its leftover capacity.
pub fn solve_two_phase(
    instance: &Instance,
    mapping: &Mapping,
    config: &SolveConfig,
) -> Result<Solution> {
    let started = Instant::now();
    instance.validate()?;
    mapping.check_hostable(instance)?;
    let (trimmed, _) = trim_timeline(instance);

    let mut states = Vec::new();
    let mut counter = PurchaseCounter::default();
    let all: Vec<usize> = (0..trimmed.tasks.len()).collect();
    if config.segregate_large {
        let (small, large): (Vec<usize>, Vec<usize>) = all
            .iter()
            .partition(|&&u| penmap::is_small(&trimmed.tasks[u], &trimmed));
        // Each part gets its own nodes.
        for part in [small, large] {
            let mut own = Vec::new();
            place_all(
                &trimmed,
                mapping,
                &part,
                config.fit,
                config.cross_fill,
                &mut own,
                &mut counter,
            )?;
            states.append(&mut own);
        }
    } else {
        place_all(
            &trimmed,
            mapping,
            &all,
            config.fit,
            config.cross_fill,
            &mut states,
            &mut counter,
        )?;
    }

    let mut meta = config.meta("two-phase");
    meta.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(assemble(&trimmed, states, meta))
}

/// Computes the mapping named by `config` and runs the placement phase.
/// LP mappings solve the mapping LP; use [`solve_with_lp`] to reuse one.
pub fn solve(instance: &Instance, config: &SolveConfig) -> Result<Solution> {
    instance.check_every_task_fits()?;
    match config.mapping {
        MappingSource::Penalty(policy) => {
            let pm = penmap::best_mapping(instance, policy)?;
            solve_two_phase(instance, &pm.mapping, config)
        }
        MappingSource::Lp => {
            let lp_solution = lp::solve_lp(&lp::build_lp(&trim_timeline(instance).0))?;
            solve_with_lp(instance, &lp_solution, config)
        }
    }
}

/// Placement phase on the rounded mapping of an already solved LP.
pub fn solve_with_lp(
    instance: &Instance,
    lp_solution: &lp::LpSolution,
    config: &SolveConfig,
) -> Result<Solution> {
    let mapping = lp::round_mapping(lp_solution, instance)?;
    solve_two_phase(instance, &mapping, config)
}

/// Convenience for the penalty mapping with a given height policy.
pub fn penalty_config(height: HeightPolicy, fit: FitPolicy, cross_fill: bool) -> SolveConfig {
    SolveConfig::new(MappingSource::Penalty(height), fit, cross_fill)
}
