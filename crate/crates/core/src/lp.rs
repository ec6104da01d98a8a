//! The mapping LP: one variable `x(u, B)` per task and node-type pair
//! giving the extent of the task mapped to the type, and one `alpha_B` per
//! node-type bounding that type's normalized load at every slot and
//! dimension. Its optimum lower-bounds the cost of every solution; rounding
//! each task to its largest `x` gives the LP mapping.
//!
//! The solve is delegated to HiGHS (dual simplex, so optima are vertices).
//! Load rows of a slot whose active set is contained in another slot's are
//! implied and never sent to the solver; the rest are added lazily while
//! they are violated.

use std::io::Write;
use std::time::{Duration, Instant};

use highs::{Col, HighsModelStatus, Model, RowProblem, Sense};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{trim_timeline, Instance};
use crate::penmap::{Mapping, MappingSource};

/// Absolute feasibility tolerance of the LP solution.
pub const LP_FEASIBILITY_TOLERANCE: f64 = 1e-6;

/// Values within this distance of 0 or 1 count as integral.
pub const FRACTIONAL_EPS: f64 = 1e-6;

/// Entries of an `x` row this close to the maximum tie with it.
const ARGMAX_TIE: f64 = 1e-9;

/// The relaxed mapping program over a (trimmed) instance.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub num_tasks: usize,
    pub num_types: usize,
    pub horizon: u32,
    pub dims: usize,
    /// Objective coefficient of each `alpha_B`: the node-type price.
    pub costs: Vec<f64>,
    spans: Vec<(u32, u32)>,
    /// `dem(u, d) / cap(B, d)` at `(u * m + b) * D + d`.
    coef: Vec<f64>,
    /// Whether node-type `b` can host task `u` alone, at `u * m + b`.
    hostable: Vec<bool>,
}

impl LpModel {
    pub fn num_vars(&self) -> usize {
        self.num_tasks * self.num_types + self.num_types
    }

    pub fn num_equalities(&self) -> usize {
        self.num_tasks
    }

    pub fn num_load_constraints(&self) -> usize {
        self.num_types * self.horizon as usize * self.dims
    }

    /// Column index of `alpha_B`.
    pub fn alpha_var(&self, b: usize) -> usize {
        b
    }

    /// Column index of `x(u, B)`.
    pub fn x_var(&self, u: usize, b: usize) -> usize {
        self.num_types + u * self.num_types + b
    }

    #[inline]
    pub fn coefficient(&self, u: usize, b: usize, d: usize) -> f64 {
        self.coef[(u * self.num_types + b) * self.dims + d]
    }

    /// Upper bound of `x(u, B)`: 1, or 0 when `B` cannot host `u` at all.
    pub fn x_upper(&self, u: usize, b: usize) -> f64 {
        if self.hostable[u * self.num_types + b] {
            1.0
        } else {
            0.0
        }
    }

    pub fn span(&self, u: usize) -> (u32, u32) {
        self.spans[u]
    }

    /// Non-zero `x` terms of the load row `(B, t, d)`; the row reads
    /// `sum(terms) - alpha_B <= 0`.
    pub fn load_row(&self, b: usize, t: u32, d: usize) -> Vec<(usize, f64)> {
        (0..self.num_tasks)
            .filter(|&u| self.spans[u].0 <= t && t <= self.spans[u].1)
            .map(|u| (self.x_var(u, b), self.coefficient(u, b, d)))
            .filter(|&(_, c)| c != 0.0)
            .collect()
    }

    /// Slots whose active task set is not contained in another slot's: the
    /// slots at which some task ends. Every other load row is implied.
    pub fn maximal_slots(&self) -> Vec<u32> {
        let mut ends: Vec<u32> = self.spans.iter().map(|s| s.1).collect();
        ends.sort_unstable();
        ends.dedup();
        ends
    }

    /// Normalized loads `sum_{u~t} x(u,B) * coef(u,B,d)` at every slot, as
    /// `[b][t - 1][d]` flattened.
    fn loads(&self, x: &[f64]) -> Vec<f64> {
        let (m, dims, horizon) = (self.num_types, self.dims, self.horizon as usize);
        let mut delta = vec![0.0; m * (horizon + 1) * dims];
        for u in 0..self.num_tasks {
            let (s, e) = self.spans[u];
            for b in 0..m {
                let xv = x[u * m + b];
                if xv == 0.0 {
                    continue;
                }
                for d in 0..dims {
                    let w = xv * self.coefficient(u, b, d);
                    delta[(b * (horizon + 1) + s as usize - 1) * dims + d] += w;
                    delta[(b * (horizon + 1) + e as usize) * dims + d] -= w;
                }
            }
        }
        let mut out = vec![0.0; m * horizon * dims];
        for b in 0..m {
            let mut run = vec![0.0; dims];
            for t in 0..horizon {
                for d in 0..dims {
                    run[d] += delta[(b * (horizon + 1) + t) * dims + d];
                    out[(b * horizon + t) * dims + d] = run[d];
                }
            }
        }
        out
    }

    /// Writes the model in CPLEX LP format. Variables are `a_B` for
    /// `alpha_B` and `x_u_B` for `x(u, B)`, all 1-based.
    pub fn write_lp_format(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "\\ mapping LP: {} tasks, {} node-types, {} slots, {} dims",
            self.num_tasks, self.num_types, self.horizon, self.dims
        )?;
        writeln!(out, "Minimize")?;
        write!(out, " obj:")?;
        for (b, c) in self.costs.iter().enumerate() {
            write!(
                out,
                " {} {:e} a_{}",
                if b == 0 { "" } else { "+" },
                c,
                b + 1
            )?;
        }
        writeln!(out)?;
        writeln!(out, "Subject To")?;
        for u in 0..self.num_tasks {
            write!(out, " assign_{}:", u + 1)?;
            for b in 0..self.num_types {
                write!(
                    out,
                    " {} x_{}_{}",
                    if b == 0 { "" } else { "+" },
                    u + 1,
                    b + 1
                )?;
            }
            writeln!(out, " = 1")?;
        }
        for b in 0..self.num_types {
            for t in 1..=self.horizon {
                for d in 0..self.dims {
                    write!(out, " load_{}_{}_{}:", b + 1, t, d + 1)?;
                    for (var, c) in self.load_row(b, t, d) {
                        let u = (var - self.num_types) / self.num_types;
                        write!(out, " + {:e} x_{}_{}", c, u + 1, b + 1)?;
                    }
                    writeln!(out, " - a_{} <= 0", b + 1)?;
                }
            }
        }
        writeln!(out, "Bounds")?;
        for u in 0..self.num_tasks {
            for b in 0..self.num_types {
                writeln!(out, " 0 <= x_{}_{} <= {}", u + 1, b + 1, self.x_upper(u, b))?;
            }
        }
        writeln!(out, "End")
    }
}

/// Builds the mapping LP. The instance should be trimmed first; the model is
/// correct either way but has one load row per original slot.
pub fn build_lp(instance: &Instance) -> LpModel {
    let (n, m, dims) = (
        instance.tasks.len(),
        instance.node_types.len(),
        instance.dims,
    );
    let mut coef = Vec::with_capacity(n * m * dims);
    let mut hostable = Vec::with_capacity(n * m);
    for task in &instance.tasks {
        for ty in &instance.node_types {
            for d in 0..dims {
                coef.push(task.demand[d] / ty.capacity[d]);
            }
            hostable.push(ty.hosts_alone(task));
        }
    }
    LpModel {
        num_tasks: n,
        num_types: m,
        horizon: instance.horizon,
        dims,
        costs: instance.node_types.iter().map(|t| t.cost).collect(),
        spans: instance.tasks.iter().map(|t| (t.start, t.end)).collect(),
        coef,
        hostable,
    }
}

/// Optimal solution of the mapping LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub num_tasks: usize,
    pub num_types: usize,
    pub horizon: u32,
    pub dims: usize,
    /// Row-major `n x m`.
    pub x_star: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub objective_value: f64,
    /// Whether the solution is certified to be an extreme point.
    pub basic: bool,
    /// Load rows handed to the solver, out of the model's full count.
    pub rows_used: usize,
    pub solve_rounds: usize,
    pub elapsed_ms: f64,
}

impl LpSolution {
    pub fn x(&self, u: usize, b: usize) -> f64 {
        self.x_star[u * self.num_types + b]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.x_star[u * self.num_types..(u + 1) * self.num_types]
    }

    /// Largest extent to which each task is mapped to a single node-type.
    pub fn x_max(&self) -> Vec<f64> {
        (0..self.num_tasks)
            .map(|u| self.row(u).iter().copied().fold(0.0, f64::max))
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct LpOptions {
    pub time_limit: Option<Duration>,
    /// Send every non-implied load row up front instead of generating rows
    /// on demand. Chosen automatically when the row count is small.
    pub all_rows: Option<bool>,
}

/// Above this many candidate load rows the solve starts from a small subset.
const EAGER_ROW_LIMIT: usize = 4000;
/// Rows added per (node-type, dimension) per separation round.
const ROWS_PER_ROUND: usize = 8;

pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    solve_lp_with(model, &LpOptions::default())
}

struct Separation {
    slots: Vec<u32>,
    /// Per `(b, slot index, d)`, whether the row is in the solver.
    in_model: Vec<bool>,
}

impl Separation {
    fn key(&self, model: &LpModel, b: usize, k: usize, d: usize) -> usize {
        (b * self.slots.len() + k) * model.dims + d
    }
}

pub fn solve_lp_with(model: &LpModel, options: &LpOptions) -> Result<LpSolution> {
    let started = Instant::now();
    let (n, m, dims) = (model.num_tasks, model.num_types, model.dims);

    if n == 0 {
        return Ok(LpSolution {
            num_tasks: 0,
            num_types: m,
            horizon: model.horizon,
            dims,
            x_star: Vec::new(),
            alpha_star: vec![0.0; m],
            objective_value: 0.0,
            basic: true,
            rows_used: 0,
            solve_rounds: 0,
            elapsed_ms: 0.0,
        });
    }

    let slots = model.maximal_slots();
    let mut sep = Separation {
        in_model: vec![false; m * slots.len() * dims],
        slots,
    };
    let candidate_rows = sep.in_model.len();
    let eager = options
        .all_rows
        .unwrap_or(candidate_rows <= EAGER_ROW_LIMIT);

    let mut problem = RowProblem::default();
    let alpha: Vec<Col> = model
        .costs
        .iter()
        .map(|&c| problem.add_column(c, 0.0..))
        .collect();
    let mut xcols = Vec::with_capacity(n * m);
    for u in 0..n {
        for b in 0..m {
            xcols.push(problem.add_column(0.0, 0.0..=model.x_upper(u, b)));
        }
    }
    for u in 0..n {
        problem.add_row(1.0..=1.0, (0..m).map(|b| (xcols[u * m + b], 1.0)));
    }

    // Active tasks of each maximal slot.
    let active: Vec<Vec<usize>> = sep
        .slots
        .iter()
        .map(|&t| {
            (0..n)
                .filter(|&u| model.spans[u].0 <= t && t <= model.spans[u].1)
                .collect()
        })
        .collect();
    let row_terms = |b: usize, k: usize, d: usize| -> Vec<(Col, f64)> {
        let mut terms: Vec<(Col, f64)> = active[k]
            .iter()
            .map(|&u| (xcols[u * m + b], model.coefficient(u, b, d)))
            .filter(|&(_, c)| c != 0.0)
            .collect();
        terms.push((alpha[b], -1.0));
        terms
    };

    let mut initial = Vec::new();
    if eager {
        for b in 0..m {
            for k in 0..sep.slots.len() {
                for d in 0..dims {
                    initial.push((b, k, d));
                }
            }
        }
    } else {
        // Seed with the heaviest slot of each (type, dimension) as if every
        // task were mapped to that type.
        let ones = vec![1.0; n * m];
        let full = model.loads(&ones);
        let h = model.horizon as usize;
        for b in 0..m {
            for d in 0..dims {
                let k = (0..sep.slots.len())
                    .max_by(|&i, &j| {
                        let li = full[(b * h + sep.slots[i] as usize - 1) * dims + d];
                        let lj = full[(b * h + sep.slots[j] as usize - 1) * dims + d];
                        li.total_cmp(&lj)
                    })
                    .expect("at least one task, so one maximal slot");
                initial.push((b, k, d));
            }
        }
    }
    for &(b, k, d) in &initial {
        problem.add_row(..=0.0, row_terms(b, k, d));
        let key = sep.key(model, b, k, d);
        sep.in_model[key] = true;
    }
    let mut rows_used = initial.len();

    let mut highs_model = problem.optimise(Sense::Minimise);
    highs_model.make_quiet();
    highs_model.set_option("solver", "simplex");
    highs_model.set_option("threads", 1);

    let mut rounds = 0;
    loop {
        rounds += 1;
        if let Some(limit) = options.time_limit {
            let left = limit.saturating_sub(started.elapsed());
            if left.is_zero() {
                return Err(Error::Solver("time limit reached".into()));
            }
            highs_model.set_option("time_limit", left.as_secs_f64());
        }
        let solved = highs_model
            .try_solve()
            .map_err(|e| Error::Solver(format!("HiGHS run failed: {e:?}")))?;
        match solved.status() {
            HighsModelStatus::Optimal => {}
            HighsModelStatus::ReachedTimeLimit => {
                return Err(Error::Solver("time limit reached".into()))
            }
            other => return Err(Error::Solver(format!("unexpected model status {other:?}"))),
        }
        let solution = solved.get_solution();
        let cols = solution.columns();
        let alpha_val: Vec<f64> = (0..m).map(|b| cols[b]).collect();
        let x: Vec<f64> = cols[m..m + n * m]
            .iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect();

        let loads = model.loads(&x);
        let h = model.horizon as usize;
        let mut added = 0;
        let mut next: Model = solved.into();
        for b in 0..m {
            let tol = 1e-7 * alpha_val[b].abs().max(1.0);
            for d in 0..dims {
                let mut violated: Vec<(f64, usize)> = (0..sep.slots.len())
                    .filter(|&k| !sep.in_model[sep.key(model, b, k, d)])
                    .map(|k| {
                        let load = loads[(b * h + sep.slots[k] as usize - 1) * dims + d];
                        (load - alpha_val[b], k)
                    })
                    .filter(|&(v, _)| v > tol)
                    .collect();
                violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                for &(_, k) in violated.iter().take(ROWS_PER_ROUND) {
                    next.add_row(..=0.0, row_terms(b, k, d));
                    let key = sep.key(model, b, k, d);
                    sep.in_model[key] = true;
                    added += 1;
                }
            }
        }
        rows_used += added;

        if added == 0 {
            let objective_value: f64 = alpha_val.iter().zip(&model.costs).map(|(a, c)| a * c).sum();
            let out = LpSolution {
                num_tasks: n,
                num_types: m,
                horizon: model.horizon,
                dims,
                x_star: x,
                alpha_star: alpha_val,
                objective_value,
                basic: true,
                rows_used,
                solve_rounds: rounds,
                elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
            };
            check_solution(model, &out)?;
            return Ok(out);
        }
        highs_model = next;
    }
}

/// Every assignment row sums to one and no load row exceeds its alpha,
/// within the LP tolerance.
fn check_solution(model: &LpModel, sol: &LpSolution) -> Result<()> {
    for u in 0..sol.num_tasks {
        let s: f64 = sol.row(u).iter().sum();
        if (s - 1.0).abs() > LP_FEASIBILITY_TOLERANCE {
            return Err(Error::Solver(format!("assignment row {u} sums to {s}")));
        }
    }
    let loads = model.loads(&sol.x_star);
    let h = model.horizon as usize;
    for b in 0..model.num_types {
        for t in 0..h {
            for d in 0..model.dims {
                let load = loads[(b * h + t) * model.dims + d];
                if load > sol.alpha_star[b] + LP_FEASIBILITY_TOLERANCE {
                    return Err(Error::Solver(format!(
                        "load row ({b}, {}, {d}) is {load} above alpha {}",
                        t + 1,
                        sol.alpha_star[b]
                    )));
                }
            }
        }
    }
    Ok(())
}

/// LP lowerbound on the optimal cost, computed on the trimmed timeline.
pub fn lower_bound(instance: &Instance) -> Result<f64> {
    instance.validate()?;
    let (trimmed, _) = trim_timeline(instance);
    let sol = solve_lp(&build_lp(&trimmed))?;
    Ok(sol.objective_value.max(0.0))
}

/// Maps every task to the node-type carrying its largest LP share; ties go to
/// the lowest node-type index.
pub fn round_mapping(sol: &LpSolution, instance: &Instance) -> Result<Mapping> {
    if sol.num_tasks != instance.tasks.len() || sol.num_types != instance.node_types.len() {
        return Err(Error::InvalidArgument(format!(
            "LP solution is {}x{}, instance is {}x{}",
            sol.num_tasks,
            sol.num_types,
            instance.tasks.len(),
            instance.node_types.len()
        )));
    }
    let assign = (0..sol.num_tasks)
        .map(|u| {
            let row = sol.row(u);
            let mut best = 0;
            for (b, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] + ARGMAX_TIE {
                    best = b;
                }
            }
            best
        })
        .collect();
    Ok(Mapping {
        assign,
        source: MappingSource::Lp,
    })
}

/// How far an LP solution is from integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalityReport {
    /// `x(u, B)` strictly inside `(eps, 1 - eps)`.
    pub fractional: usize,
    /// `n + m * T * D`, the extreme-point bound on `fractional`.
    pub bound: usize,
    pub within_bound: bool,
    /// The bound only applies to extreme points; false when not certified.
    pub bound_applies: bool,
    /// Ten equal-width bins of `x_max(u)` over `[0, 1]`.
    pub x_max_histogram: Vec<usize>,
    /// Share of tasks with `x_max(u) >= 0.99`.
    pub near_integral_share: f64,
}

pub fn fractionality_report(sol: &LpSolution) -> FractionalityReport {
    let fractional = sol
        .x_star
        .iter()
        .filter(|&&v| v > FRACTIONAL_EPS && v < 1.0 - FRACTIONAL_EPS)
        .count();
    let bound = sol.num_tasks + sol.num_types * sol.horizon as usize * sol.dims;
    let x_max = sol.x_max();
    let mut x_max_histogram = vec![0; 10];
    for &v in &x_max {
        x_max_histogram[((v * 10.0).floor() as usize).min(9)] += 1;
    }
    let near = x_max.iter().filter(|&&v| v >= 0.99).count();
    FractionalityReport {
        fractional,
        bound,
        within_bound: fractional <= bound,
        bound_applies: sol.basic,
        x_max_histogram,
        near_integral_share: if x_max.is_empty() {
            1.0
        } else {
            near as f64 / x_max.len() as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeType, Task};

    fn inst(types: Vec<NodeType>, tasks: Vec<Task>, horizon: u32, dims: usize) -> Instance {
        Instance::new(dims, horizon, types, tasks).unwrap()
    }

    #[test]
    fn counts_small_model() {
        let i = inst(
            vec![
                NodeType::new("B1", vec![1.0], 1.0),
                NodeType::new("B2", vec![2.0], 1.5),
            ],
            vec![
                Task::new("a", vec![0.5], 1, 1),
                Task::new("b", vec![0.5], 2, 2),
            ],
            2,
            1,
        );
        let model = build_lp(&i);
        assert_eq!(model.num_vars(), 6);
        assert_eq!(model.num_equalities(), 2);
        assert_eq!(model.num_load_constraints(), 4);
        assert_eq!(model.load_row(1, 2, 0), vec![(model.x_var(1, 1), 0.25)]);
    }

    #[test]
    fn empty_instance_has_zero_objective() {
        let i = inst(vec![NodeType::new("B1", vec![1.0], 3.0)], vec![], 1, 1);
        let model = build_lp(&i);
        assert_eq!(model.num_vars(), 1);
        let sol = solve_lp(&model).unwrap();
        assert_eq!(sol.objective_value, 0.0);
        assert_eq!(lower_bound(&i).unwrap(), 0.0);
    }

    #[test]
    fn single_full_task() {
        let i = inst(
            vec![NodeType::new("B1", vec![0.5, 0.8], 7.0)],
            vec![Task::new("a", vec![0.5, 0.8], 1, 1)],
            1,
            2,
        );
        let sol = solve_lp(&build_lp(&i)).unwrap();
        assert!((sol.alpha_star[0] - 1.0).abs() < 1e-9);
        assert!((sol.objective_value - 7.0).abs() < 1e-9);
        assert!((sol.x(0, 0) - 1.0).abs() < 1e-9);
        assert!((lower_bound(&i).unwrap() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn two_overlapping_full_tasks() {
        let i = inst(
            vec![NodeType::new("B1", vec![1.0], 3.0)],
            vec![
                Task::new("a", vec![1.0], 1, 2),
                Task::new("b", vec![1.0], 2, 3),
            ],
            3,
            1,
        );
        let sol = solve_lp(&build_lp(&i)).unwrap();
        assert!((sol.alpha_star[0] - 2.0).abs() < 1e-9);
        assert!((sol.objective_value - 6.0).abs() < 1e-9);
    }

    #[test]
    fn identical_types_degenerate_optimum() {
        let i = inst(
            vec![
                NodeType::new("B1", vec![1.0], 4.0),
                NodeType::new("B2", vec![1.0], 4.0),
            ],
            vec![Task::new("a", vec![0.25], 1, 1)],
            1,
            1,
        );
        let sol = solve_lp(&build_lp(&i)).unwrap();
        assert!((sol.objective_value - 1.0).abs() < 1e-9);
        let mapping = round_mapping(&sol, &i).unwrap();
        assert_eq!(mapping.assign.len(), 1);
        assert!(mapping.assign[0] < 2);
    }

    fn fake_solution(rows: &[&[f64]]) -> LpSolution {
        let m = rows[0].len();
        LpSolution {
            num_tasks: rows.len(),
            num_types: m,
            horizon: 1,
            dims: 1,
            x_star: rows.iter().flat_map(|r| r.iter().copied()).collect(),
            alpha_star: vec![0.0; m],
            objective_value: 0.0,
            basic: true,
            rows_used: 0,
            solve_rounds: 0,
            elapsed_ms: 0.0,
        }
    }

    #[test]
    fn rounding_examples() {
        let types = vec![
            NodeType::new("B1", vec![1.0], 1.0),
            NodeType::new("B2", vec![1.0], 1.0),
        ];
        let tasks = (0..3)
            .map(|i| Task::new(format!("t{i}"), vec![0.1], 1, 1))
            .collect();
        let i = inst(types, tasks, 1, 1);
        let sol = fake_solution(&[&[0.7, 0.3], &[0.0, 1.0], &[0.5, 0.5]]);
        assert_eq!(round_mapping(&sol, &i).unwrap().assign, vec![0, 1, 0]);
    }

    #[test]
    fn fractionality_counts() {
        let integral = fake_solution(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = fractionality_report(&integral);
        assert_eq!(r.fractional, 0);
        assert!(r.within_bound);
        assert_eq!(r.near_integral_share, 1.0);
        assert_eq!(r.x_max_histogram[9], 2);

        let split = fake_solution(&[&[0.5, 0.5], &[1.0 - 1e-9, 1e-9]]);
        let r = fractionality_report(&split);
        assert_eq!(r.fractional, 2);
        assert_eq!(r.bound, 2 + 2);
        assert_eq!(r.x_max_histogram[5], 1);
        assert!((r.near_integral_share - 0.5).abs() < 1e-12);
    }

    #[test]
    fn maximal_slots_are_task_ends() {
        let i = inst(
            vec![NodeType::new("B1", vec![1.0], 1.0)],
            vec![
                Task::new("a", vec![0.1], 1, 3),
                Task::new("b", vec![0.1], 2, 3),
                Task::new("c", vec![0.1], 4, 4),
            ],
            4,
            1,
        );
        assert_eq!(build_lp(&i).maximal_slots(), vec![3, 4]);
    }

    #[test]
    fn lazy_and_eager_agree() {
        let spec = crate::costs::GenSpec {
            n: 120,
            m: 4,
            dims: 3,
            horizon: 12,
            ..crate::costs::GenSpec::default()
        }
        .with_seed(5);
        let i = trim_timeline(&crate::costs::generate_synthetic(&spec).unwrap()).0;
        let model = build_lp(&i);
        let eager = solve_lp_with(
            &model,
            &LpOptions {
                all_rows: Some(true),
                ..LpOptions::default()
            },
        )
        .unwrap();
        let lazy = solve_lp_with(
            &model,
            &LpOptions {
                all_rows: Some(false),
                ..LpOptions::default()
            },
        )
        .unwrap();
        assert!(
            (eager.objective_value - lazy.objective_value).abs() <= 1e-6 * eager.objective_value,
            "{} vs {}",
            eager.objective_value,
            lazy.objective_value
        );
        assert!(lazy.rows_used <= eager.rows_used);
        assert!(lazy.solve_rounds >= 1);
    }

    #[test]
    fn unhostable_pairs_are_fixed_to_zero() {
        let i = inst(
            vec![
                NodeType::new("small", vec![0.3], 0.1),
                NodeType::new("big", vec![1.0], 5.0),
            ],
            vec![Task::new("a", vec![0.5], 1, 1)],
            1,
            1,
        );
        let sol = solve_lp(&build_lp(&i)).unwrap();
        assert!(sol.x(0, 0).abs() < 1e-9);
        assert_eq!(round_mapping(&sol, &i).unwrap().assign, vec![1]);
    }

    #[test]
    fn lp_format_dump() {
        let i = inst(
            vec![NodeType::new("B1", vec![1.0], 2.0)],
            vec![Task::new("a", vec![0.5], 1, 1)],
            1,
            1,
        );
        let mut buf = Vec::new();
        build_lp(&i).write_lp_format(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("Minimize"));
        assert!(text.contains("assign_1:  x_1_1 = 1"));
        assert!(text.contains("load_1_1_1: + 5e-1 x_1_1 - a_1 <= 0"));
        assert!(text.trim_end().ends_with("End"));
    }
}
