//! Exact optimum for tiny instances by depth-first branch and bound.
//!
//! Used as ground truth for the heuristics and the LP bound, so it shares no
//! code with either: bounds here are purely combinatorial.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{trim_timeline, Instance, Node, Solution, SolutionMeta, FEASIBILITY_TOLERANCE};
use crate::penmap::relative_demand_avg;

#[derive(Debug, Clone)]
pub struct OracleLimits {
    pub max_tasks: usize,
    pub max_types: usize,
    /// Nodes of one type a solution may hold; `None` leaves it at `n`.
    pub max_nodes_per_type: Option<usize>,
    pub time_budget: Duration,
    /// Skip placements into a node identical to one already tried.
    pub symmetry_pruning: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_tasks: 8,
            max_types: 3,
            max_nodes_per_type: None,
            time_budget: Duration::from_secs(10),
            symmetry_pruning: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub solution: Solution,
    pub cost: f64,
    /// Search-tree nodes visited.
    pub explored: u64,
}

#[derive(Clone)]
struct OpenNode {
    ty: usize,
    /// Row-major `horizon x dims`.
    free: Vec<f64>,
    tasks: Vec<usize>,
}

struct Search<'a> {
    inst: &'a Instance,
    order: Vec<usize>,
    /// `min_B cost(B) * dem(u, d) / cap(B, d)` at `u * dims + d`.
    weight: Vec<f64>,
    limits: &'a OracleLimits,
    per_type_cap: usize,
    started: Instant,
    explored: u64,
    best_cost: f64,
    best: Vec<OpenNode>,
    /// Cost no solution can beat; reaching it ends the search.
    floor: f64,
    done: bool,
    timed_out: bool,
}

impl Search<'_> {
    fn fits(&self, node: &OpenNode, u: usize) -> bool {
        let task = &self.inst.tasks[u];
        let dims = self.inst.dims;
        (task.start..=task.end).all(|t| {
            let row = &node.free[(t as usize - 1) * dims..t as usize * dims];
            row.iter()
                .zip(&task.demand)
                .all(|(f, dem)| *dem <= f + FEASIBILITY_TOLERANCE)
        })
    }

    fn apply(&self, node: &mut OpenNode, u: usize, sign: f64) {
        let task = &self.inst.tasks[u];
        let dims = self.inst.dims;
        for t in task.start..=task.end {
            for d in 0..dims {
                node.free[(t as usize - 1) * dims + d] -= sign * task.demand[d];
            }
        }
    }

    /// Lower bound on the price of the nodes still to be bought when the
    /// tasks from `order[depth..]` remain.
    fn remaining_bound(&self, open: &[OpenNode], depth: usize) -> f64 {
        let (dims, h) = (self.inst.dims, self.inst.horizon as usize);
        let mut need = vec![0.0; h * dims];
        for &u in &self.order[depth..] {
            let task = &self.inst.tasks[u];
            for t in task.start..=task.end {
                for d in 0..dims {
                    need[(t as usize - 1) * dims + d] += self.weight[u * dims + d];
                }
            }
        }
        let mut best: f64 = 0.0;
        for t in 0..h {
            for d in 0..dims {
                let mut v = need[t * dims + d];
                if v <= 0.0 {
                    continue;
                }
                for node in open {
                    let ty = &self.inst.node_types[node.ty];
                    v -= ty.cost * node.free[t * dims + d].max(0.0) / ty.capacity[d];
                }
                best = best.max(v);
            }
        }
        best
    }

    fn dfs(&mut self, open: &mut Vec<OpenNode>, cost: f64, depth: usize) {
        if self.done {
            return;
        }
        self.explored += 1;
        if self.explored.is_multiple_of(1024) && self.started.elapsed() > self.limits.time_budget {
            self.done = true;
            self.timed_out = true;
            return;
        }
        if depth == self.order.len() {
            if cost < self.best_cost - FEASIBILITY_TOLERANCE {
                self.best_cost = cost;
                self.best = open.clone();
                if self.best_cost <= self.floor + FEASIBILITY_TOLERANCE {
                    self.done = true;
                }
            }
            return;
        }
        if cost + self.remaining_bound(open, depth) >= self.best_cost - FEASIBILITY_TOLERANCE {
            return;
        }

        let u = self.order[depth];
        for k in 0..open.len() {
            if !self.fits(&open[k], u) {
                continue;
            }
            if self.limits.symmetry_pruning
                && open[..k]
                    .iter()
                    .any(|o| o.ty == open[k].ty && o.free == open[k].free)
            {
                continue;
            }
            self.apply(&mut open[k], u, 1.0);
            open[k].tasks.push(u);
            self.dfs(open, cost, depth + 1);
            open[k].tasks.pop();
            self.apply(&mut open[k], u, -1.0);
        }

        let task = &self.inst.tasks[u];
        for (b, ty) in self.inst.node_types.iter().enumerate() {
            if !ty.hosts_alone(task) || cost + ty.cost >= self.best_cost - FEASIBILITY_TOLERANCE {
                continue;
            }
            if open.iter().filter(|o| o.ty == b).count() >= self.per_type_cap {
                continue;
            }
            let mut node = OpenNode {
                ty: b,
                free: ty.capacity.repeat(self.inst.horizon as usize),
                tasks: vec![u],
            };
            self.apply(&mut node, u, 1.0);
            open.push(node);
            self.dfs(open, cost + ty.cost, depth + 1);
            open.pop();
        }
    }
}

/// Combinatorial lower bound: at every slot and dimension each active task
/// costs at least its cheapest per-unit share of a node.
pub fn combinatorial_bound(instance: &Instance) -> f64 {
    let dims = instance.dims;
    let h = instance.horizon as usize;
    let mut load = vec![0.0; (h + 1) * dims];
    for task in &instance.tasks {
        for d in 0..dims {
            let w = instance
                .node_types
                .iter()
                .map(|ty| ty.cost * task.demand[d] / ty.capacity[d])
                .fold(f64::INFINITY, f64::min);
            load[(task.start as usize - 1) * dims + d] += w;
            load[task.end as usize * dims + d] -= w;
        }
    }
    let mut best: f64 = 0.0;
    let mut run = vec![0.0; dims];
    for t in 0..h {
        for d in 0..dims {
            run[d] += load[t * dims + d];
            best = best.max(run[d]);
        }
    }
    best
}

/// Minimum-cost solution of a tiny instance.
pub fn exact_opt(instance: &Instance, limits: &OracleLimits) -> Result<ExactResult> {
    instance.validate()?;
    instance.check_every_task_fits()?;
    if instance.tasks.len() > limits.max_tasks || instance.node_types.len() > limits.max_types {
        return Err(Error::BudgetExceeded(format!(
            "{} tasks and {} node-types exceed the oracle limits of {} and {}",
            instance.tasks.len(),
            instance.node_types.len(),
            limits.max_tasks,
            limits.max_types
        )));
    }
    let started = Instant::now();
    let (inst, _) = trim_timeline(instance);
    let (n, dims) = (inst.tasks.len(), inst.dims);

    let cheapest = (0..inst.node_types.len())
        .min_by(|&a, &b| inst.node_types[a].cost.total_cmp(&inst.node_types[b].cost))
        .expect("validated instances have node-types");
    let size: Vec<f64> = inst
        .tasks
        .iter()
        .map(|t| relative_demand_avg(t, &inst.node_types[cheapest]))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| size[b].total_cmp(&size[a]).then(a.cmp(&b)));

    let mut weight = vec![0.0; n * dims];
    for (u, task) in inst.tasks.iter().enumerate() {
        for d in 0..dims {
            weight[u * dims + d] = inst
                .node_types
                .iter()
                .map(|ty| ty.cost * task.demand[d] / ty.capacity[d])
                .fold(f64::INFINITY, f64::min);
        }
    }

    // Every task on its own cheapest host.
    let mut best = Vec::new();
    let mut best_cost = 0.0;
    for (u, task) in inst.tasks.iter().enumerate() {
        let b = (0..inst.node_types.len())
            .filter(|&b| inst.node_types[b].hosts_alone(task))
            .min_by(|&a, &b| inst.node_types[a].cost.total_cmp(&inst.node_types[b].cost))
            .expect("every task fits somewhere");
        best.push(OpenNode {
            ty: b,
            free: Vec::new(),
            tasks: vec![u],
        });
        best_cost += inst.node_types[b].cost;
    }

    let mut search = Search {
        inst: &inst,
        order,
        weight,
        limits,
        per_type_cap: limits.max_nodes_per_type.unwrap_or(n).max(1),
        started,
        explored: 0,
        best_cost: best_cost + FEASIBILITY_TOLERANCE * 2.0,
        best,
        floor: combinatorial_bound(&inst),
        done: false,
        timed_out: false,
    };
    search.dfs(&mut Vec::new(), 0.0, 0);
    if search.timed_out {
        return Err(Error::BudgetExceeded(format!(
            "no proof of optimality within {:?}",
            limits.time_budget
        )));
    }

    let nodes: Vec<Node> = search
        .best
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let ty = &inst.node_types[o.ty];
            Node {
                node_type: ty.id.clone(),
                cost: ty.cost,
                tasks: o.tasks.iter().map(|&u| inst.tasks[u].id.clone()).collect(),
                purchase_order: k as u32,
            }
        })
        .collect();
    let meta = SolutionMeta {
        algorithm: "exact".into(),
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        ..SolutionMeta::default()
    };
    let solution = Solution::from_nodes(nodes, meta);
    Ok(ExactResult {
        cost: solution.cost(),
        solution,
        explored: search.explored,
    })
}
