//! Penalty-based task to node-type mapping, and the congestion functional
//! that lower-bounds the optimum.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, NodeType, Task};

/// How a task's demand is collapsed to a scalar height relative to a
/// node-type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightPolicy {
    Avg,
    Max,
}

impl fmt::Display for HeightPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeightPolicy::Avg => "avg",
            HeightPolicy::Max => "max",
        })
    }
}

/// Where a mapping came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingSource {
    Penalty(HeightPolicy),
    Lp,
}

impl fmt::Display for MappingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingSource::Penalty(h) => write!(f, "penalty({h})"),
            MappingSource::Lp => f.write_str("lp"),
        }
    }
}

/// A total assignment of tasks (by index) to node-types (by index).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    pub assign: Vec<usize>,
    pub source: MappingSource,
}

impl Mapping {
    /// Task indices mapped to node-type `b`, in input order.
    pub fn group(&self, b: usize) -> Vec<usize> {
        (0..self.assign.len())
            .filter(|&u| self.assign[u] == b)
            .collect()
    }

    /// `{task id -> node-type id}` view for serialization.
    pub fn to_ids(&self, instance: &Instance) -> BTreeMap<String, String> {
        self.assign
            .iter()
            .enumerate()
            .map(|(u, &b)| {
                (
                    instance.tasks[u].id.clone(),
                    instance.node_types[b].id.clone(),
                )
            })
            .collect()
    }

    /// Every task mapped to a node-type that can host it alone.
    pub fn check_hostable(&self, instance: &Instance) -> Result<()> {
        if self.assign.len() != instance.tasks.len() {
            return Err(Error::InvalidArgument(format!(
                "mapping covers {} tasks, instance has {}",
                self.assign.len(),
                instance.tasks.len()
            )));
        }
        for (u, &b) in self.assign.iter().enumerate() {
            let task = &instance.tasks[u];
            let ty = instance.node_types.get(b).ok_or_else(|| {
                Error::InvalidArgument(format!("task {} mapped to missing node-type {b}", task.id))
            })?;
            if !ty.hosts_alone(task) {
                return Err(Error::InfeasibleTask {
                    task: task.id.clone(),
                    reason: format!("mapped to node-type {} which cannot host it", ty.id),
                });
            }
        }
        Ok(())
    }
}

/// Mean over dimensions of demand relative to capacity.
pub fn relative_demand_avg(task: &Task, ty: &NodeType) -> f64 {
    let sum: f64 = task
        .demand
        .iter()
        .zip(&ty.capacity)
        .map(|(dem, cap)| dem / cap)
        .sum();
    sum / task.demand.len() as f64
}

/// Largest demand-to-capacity ratio over dimensions.
pub fn relative_demand_max(task: &Task, ty: &NodeType) -> f64 {
    task.demand
        .iter()
        .zip(&ty.capacity)
        .map(|(dem, cap)| dem / cap)
        .fold(0.0, f64::max)
}

pub fn height(task: &Task, ty: &NodeType, policy: HeightPolicy) -> f64 {
    match policy {
        HeightPolicy::Avg => relative_demand_avg(task, ty),
        HeightPolicy::Max => relative_demand_max(task, ty),
    }
}

/// Node price scaled by the task's height.
pub fn penalty(task: &Task, ty: &NodeType, policy: HeightPolicy) -> f64 {
    ty.cost * height(task, ty, policy)
}

/// The penalty mapping together with each task's minimum penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyMapping {
    pub mapping: Mapping,
    pub min_penalty: Vec<f64>,
}

/// `a` beats `b` only when strictly smaller beyond rounding noise, so equal
/// penalties keep the earlier node-type.
fn strictly_less(a: f64, b: f64) -> bool {
    a < b - 1e-12 * b.abs().max(1.0)
}

/// Maps each task to the node-type of least penalty among those that can
/// host it alone. Ties go to the lowest node-type index.
pub fn best_mapping(instance: &Instance, policy: HeightPolicy) -> Result<PenaltyMapping> {
    let mut assign = Vec::with_capacity(instance.tasks.len());
    let mut min_penalty = Vec::with_capacity(instance.tasks.len());
    for task in &instance.tasks {
        let mut best: Option<(usize, f64)> = None;
        for (b, ty) in instance.node_types.iter().enumerate() {
            if !ty.hosts_alone(task) {
                continue;
            }
            let p = penalty(task, ty, policy);
            if best.is_none_or(|(_, bp)| strictly_less(p, bp)) {
                best = Some((b, p));
            }
        }
        let (b, p) = best.ok_or_else(|| Error::InfeasibleTask {
            task: task.id.clone(),
            reason: "demand exceeds the capacity of every node-type".into(),
        })?;
        assign.push(b);
        min_penalty.push(p);
    }
    Ok(PenaltyMapping {
        mapping: Mapping {
            assign,
            source: MappingSource::Penalty(policy),
        },
        min_penalty,
    })
}

/// Maximum over timeslots of the summed penalties of the given tasks active
/// there. `penalties[i]` belongs to `tasks[i]`.
pub fn congestion(tasks: &[&Task], penalties: &[f64], horizon: u32) -> f64 {
    assert_eq!(tasks.len(), penalties.len(), "one penalty per task");
    if tasks.is_empty() {
        return 0.0;
    }
    let mut delta = vec![0.0; horizon as usize + 2];
    for (task, p) in tasks.iter().zip(penalties) {
        delta[task.start as usize] += p;
        delta[task.end as usize + 1] -= p;
    }
    let mut running = 0.0;
    let mut best: f64 = 0.0;
    for d in &delta[1..=horizon as usize] {
        running += d;
        best = best.max(running);
    }
    best
}

/// A task is small when it needs at most half of every node-type's capacity
/// in every dimension.
pub fn is_small(task: &Task, instance: &Instance) -> bool {
    instance.node_types.iter().all(|ty| {
        task.demand
            .iter()
            .zip(&ty.capacity)
            .all(|(dem, cap)| *dem <= cap / 2.0)
    })
}
