//! Domain types: tasks on a discrete timeline, node-types, instances and
//! solutions, plus timeline trimming and solution verification.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack allowed when comparing a load against a capacity.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// A time-limited task: a demand vector that is consumed on every timeslot
/// of the closed span `[start, end]` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub demand: Vec<f64>,
    pub start: u32,
    pub end: u32,
}

impl Task {
    pub fn new(id: impl Into<String>, demand: Vec<f64>, start: u32, end: u32) -> Self {
        Self {
            id: id.into(),
            demand,
            start,
            end,
        }
    }

    /// Whether the task consumes its demand at slot `t`. No horizon check.
    #[inline]
    pub fn active_at(&self, t: u32) -> bool {
        self.start <= t && t <= self.end
    }

    /// Two tasks overlap when some slot has both active.
    #[inline]
    pub fn overlaps(&self, other: &Task) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn span_len(&self) -> u32 {
        self.end - self.start + 1
    }
}

/// A purchasable machine SKU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeType {
    pub id: String,
    pub capacity: Vec<f64>,
    pub cost: f64,
}

impl NodeType {
    pub fn new(id: impl Into<String>, capacity: Vec<f64>, cost: f64) -> Self {
        Self {
            id: id.into(),
            capacity,
            cost,
        }
    }

    /// Whether a node of this type can host `task` on its own.
    pub fn hosts_alone(&self, task: &Task) -> bool {
        task.demand
            .iter()
            .zip(&self.capacity)
            .all(|(dem, cap)| *dem <= cap + FEASIBILITY_TOLERANCE)
    }

    /// Total capacity offered per unit of cost.
    pub fn capacity_per_cost(&self) -> f64 {
        self.capacity.iter().sum::<f64>() / self.cost
    }
}

/// The unit of solving and verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub dims: usize,
    pub horizon: u32,
    pub node_types: Vec<NodeType>,
    pub tasks: Vec<Task>,
}

impl Instance {
    /// Builds an instance and checks its invariants.
    pub fn new(
        dims: usize,
        horizon: u32,
        node_types: Vec<NodeType>,
        tasks: Vec<Task>,
    ) -> Result<Self> {
        let instance = Self {
            dims,
            horizon,
            node_types,
            tasks,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.dims == 0 {
            return bad("dims must be at least 1".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.node_types.is_empty() {
            return bad("at least one node-type is required".into());
        }
        let mut seen = HashMap::new();
        for (i, ty) in self.node_types.iter().enumerate() {
            if ty.capacity.len() != self.dims {
                return bad(format!(
                    "node-type {} has {} capacity components, expected {}",
                    ty.id,
                    ty.capacity.len(),
                    self.dims
                ));
            }
            if !ty.capacity.iter().all(|c| c.is_finite() && *c > 0.0) {
                return bad(format!("node-type {} has a non-positive capacity", ty.id));
            }
            if !(ty.cost.is_finite() && ty.cost > 0.0) {
                return bad(format!("node-type {} has a non-positive cost", ty.id));
            }
            if seen.insert(ty.id.as_str(), i).is_some() {
                return bad(format!("duplicate node-type id {}", ty.id));
            }
        }
        let mut seen = HashMap::new();
        for (i, task) in self.tasks.iter().enumerate() {
            if task.demand.len() != self.dims {
                return bad(format!(
                    "task {} has {} demand components, expected {}",
                    task.id,
                    task.demand.len(),
                    self.dims
                ));
            }
            if !task.demand.iter().all(|d| d.is_finite() && *d >= 0.0) {
                return bad(format!("task {} has a negative demand", task.id));
            }
            if task.start < 1 || task.start > task.end || task.end > self.horizon {
                return bad(format!(
                    "task {} span [{}, {}] is not within [1, {}]",
                    task.id, task.start, task.end, self.horizon
                ));
            }
            if seen.insert(task.id.as_str(), i).is_some() {
                return bad(format!("duplicate task id {}", task.id));
            }
        }
        Ok(())
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_types(&self) -> usize {
        self.node_types.len()
    }

    /// Sum of the prices of all node-types.
    pub fn total_type_cost(&self) -> f64 {
        self.node_types.iter().map(|t| t.cost).sum()
    }

    pub fn task_index(&self) -> HashMap<&str, usize> {
        self.tasks
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect()
    }

    pub fn type_index(&self) -> HashMap<&str, usize> {
        self.node_types
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect()
    }

    /// Fails with the first task no node-type can host on its own.
    pub fn check_every_task_fits(&self) -> Result<()> {
        for task in &self.tasks {
            if !self.node_types.iter().any(|ty| ty.hosts_alone(task)) {
                return Err(Error::InfeasibleTask {
                    task: task.id.clone(),
                    reason: "demand exceeds the capacity of every node-type".into(),
                });
            }
        }
        Ok(())
    }

    /// Copy of the instance with every task active over the whole horizon.
    pub fn without_timeline(&self) -> Instance {
        let mut out = self.clone();
        for task in &mut out.tasks {
            task.start = 1;
            task.end = self.horizon;
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let instance: Instance = serde_json::from_str(text)?;
        instance.validate()?;
        Ok(instance)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Checked activity test: `t` must lie within the horizon.
pub fn is_active(task: &Task, t: u32, horizon: u32) -> Result<bool> {
    if t < 1 || t > horizon {
        return Err(Error::SlotOutOfHorizon { slot: t, horizon });
    }
    Ok(task.active_at(t))
}

/// A purchased replica of a node-type together with the tasks placed on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub node_type: String,
    pub cost: f64,
    pub tasks: Vec<String>,
    /// Creation sequence number, unique within a solution.
    pub purchase_order: u32,
}

/// Provenance of a solution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionMeta {
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<String>,
    #[serde(default)]
    pub cross_fill: bool,
    #[serde(default)]
    pub segregate_large: bool,
    #[serde(default)]
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub nodes: Vec<Node>,
    /// Task id to index into `nodes`.
    pub assignment: BTreeMap<String, usize>,
    #[serde(default)]
    pub meta: SolutionMeta,
}

impl Solution {
    /// Builds a solution whose assignment is derived from the node contents.
    pub fn from_nodes(nodes: Vec<Node>, meta: SolutionMeta) -> Self {
        let mut assignment = BTreeMap::new();
        for (k, node) in nodes.iter().enumerate() {
            for task in &node.tasks {
                assignment.insert(task.clone(), k);
            }
        }
        Self {
            nodes,
            assignment,
            meta,
        }
    }

    pub fn cost(&self) -> f64 {
        solution_cost(self)
    }

    /// Number of purchased nodes per node-type id.
    pub fn node_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for node in &self.nodes {
            *counts.entry(node.node_type.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Aggregate price of the purchased nodes.
pub fn solution_cost(solution: &Solution) -> f64 {
    solution.nodes.iter().map(|n| n.cost).sum()
}

/// One capacity overrun on a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub node: usize,
    pub slot: u32,
    pub dim: usize,
    pub load: f64,
    pub capacity: f64,
    /// `capacity - load`; negative beyond the tolerance.
    pub slack: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
    pub unassigned: Vec<String>,
    /// Tasks placed on more than one node.
    pub duplicated: Vec<String>,
    /// Nodes whose recorded cost differs from their node-type price.
    pub cost_mismatches: Vec<usize>,
}

impl VerificationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
            && self.unassigned.is_empty()
            && self.duplicated.is_empty()
            && self.cost_mismatches.is_empty()
    }
}

/// Checks a solution against an instance. Dangling task or node-type
/// references are a structural error; everything else is reported.
pub fn verify_solution(instance: &Instance, solution: &Solution) -> Result<VerificationReport> {
    let task_ix = instance.task_index();
    let type_ix = instance.type_index();
    let dims = instance.dims;
    let horizon = instance.horizon as usize;

    let mut report = VerificationReport::default();
    let mut placed_on: Vec<Option<usize>> = vec![None; instance.tasks.len()];

    for (k, node) in solution.nodes.iter().enumerate() {
        let &ty_ix = type_ix.get(node.node_type.as_str()).ok_or_else(|| {
            Error::Structural(format!("node {k} has unknown node-type {}", node.node_type))
        })?;
        let ty = &instance.node_types[ty_ix];
        if (node.cost - ty.cost).abs() > FEASIBILITY_TOLERANCE * ty.cost.max(1.0) {
            report.cost_mismatches.push(k);
        }

        // Difference arrays over the horizon, one per dimension.
        let mut delta = vec![0.0; (horizon + 2) * dims];
        for id in &node.tasks {
            let &u = task_ix
                .get(id.as_str())
                .ok_or_else(|| Error::Structural(format!("node {k} holds unknown task {id}")))?;
            if placed_on[u].is_some() {
                report.duplicated.push(id.clone());
            } else {
                placed_on[u] = Some(k);
            }
            let task = &instance.tasks[u];
            for d in 0..dims {
                delta[task.start as usize * dims + d] += task.demand[d];
                delta[(task.end as usize + 1) * dims + d] -= task.demand[d];
            }
        }
        let mut load = vec![0.0; dims];
        for t in 1..=horizon {
            for d in 0..dims {
                load[d] += delta[t * dims + d];
                let slack = ty.capacity[d] - load[d];
                if slack < -FEASIBILITY_TOLERANCE {
                    report.violations.push(Violation {
                        node: k,
                        slot: t as u32,
                        dim: d,
                        load: load[d],
                        capacity: ty.capacity[d],
                        slack,
                    });
                }
            }
        }
    }

    for (id, &k) in &solution.assignment {
        let &u = task_ix
            .get(id.as_str())
            .ok_or_else(|| Error::Structural(format!("assignment names unknown task {id}")))?;
        if k >= solution.nodes.len() {
            return Err(Error::Structural(format!(
                "task {id} assigned to missing node {k}"
            )));
        }
        if placed_on[u] != Some(k) {
            return Err(Error::Structural(format!(
                "assignment of task {id} to node {k} disagrees with node contents"
            )));
        }
    }

    for (u, slot) in placed_on.iter().enumerate() {
        let id = &instance.tasks[u].id;
        if slot.is_none() || !solution.assignment.contains_key(id) {
            report.unassigned.push(id.clone());
        }
    }
    report.duplicated.sort();
    report.duplicated.dedup();
    Ok(report)
}

/// Correspondence between an original timeline and its trimmed version.
///
/// Trimmed slot `k` (1-based) stands for the `k`-th smallest distinct task
/// start of the original instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrimMap {
    starts: Vec<u32>,
}

impl TrimMap {
    /// Trimmed slot representing original slot `t`: the rank of the largest
    /// start `<= t`. `None` before the first start, where no task is active.
    pub fn slot_of(&self, t: u32) -> Option<u32> {
        match self.starts.partition_point(|&s| s <= t) {
            0 => None,
            rank => Some(rank as u32),
        }
    }

    /// Representative original slot of trimmed slot `k`.
    pub fn original_of(&self, k: u32) -> Option<u32> {
        k.checked_sub(1)
            .and_then(|i| self.starts.get(i as usize))
            .copied()
    }

    pub fn trimmed_horizon(&self) -> u32 {
        (self.starts.len() as u32).max(1)
    }
}

/// Compresses the horizon to the distinct task start slots. The overlap
/// relation between tasks, and therefore the feasible set, is unchanged.
pub fn trim_timeline(instance: &Instance) -> (Instance, TrimMap) {
    let mut starts: Vec<u32> = instance.tasks.iter().map(|t| t.start).collect();
    starts.sort_unstable();
    starts.dedup();
    let map = TrimMap { starts };

    let tasks = instance
        .tasks
        .iter()
        .map(|t| {
            let start = map.slot_of(t.start).expect("start is its own start slot");
            let end = map.slot_of(t.end).expect("end follows the start");
            Task {
                start,
                end,
                ..t.clone()
            }
        })
        .collect();
    let trimmed = Instance {
        dims: instance.dims,
        horizon: map.trimmed_horizon(),
        node_types: instance.node_types.clone(),
        tasks,
    };
    (trimmed, map)
}
