//! Parametric node pricing and synthetic instance generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, NodeType, Task};

/// Per-dimension coefficients `c_d` and a common exponent `e` for
/// `cost = sum_d c_d * cap_d^e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub coefficients: Vec<f64>,
    pub exponent: f64,
}

impl CostParams {
    /// All coefficients and the exponent equal to one: price is the plain
    /// sum of capacities.
    pub fn homogeneous(dims: usize) -> Self {
        Self {
            coefficients: vec![1.0; dims],
            exponent: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.coefficients.iter().all(|c| c.is_finite() && *c > 0.0) {
            return Err(Error::InvalidArgument(
                "cost coefficients must be positive".into(),
            ));
        }
        if !(self.exponent.is_finite() && self.exponent > 0.0) {
            return Err(Error::InvalidArgument(
                "cost exponent must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Price of a node with the given capacity vector.
pub fn node_cost(capacity: &[f64], params: &CostParams) -> Result<f64> {
    params.validate()?;
    if capacity.len() != params.coefficients.len() {
        return Err(Error::InvalidArgument(format!(
            "capacity has {} components but {} cost coefficients were given",
            capacity.len(),
            params.coefficients.len()
        )));
    }
    if let Some(c) = capacity.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "capacity component {c} is not positive"
        )));
    }
    Ok(capacity
        .iter()
        .zip(&params.coefficients)
        .map(|(cap, coef)| coef * cap.powf(params.exponent))
        .sum())
}

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval(pub f64, pub f64);

impl Interval {
    pub fn lo(&self) -> f64 {
        self.0
    }

    pub fn hi(&self) -> f64 {
        self.1
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.0 + self.1)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.0 <= x && x <= self.1
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.0 == self.1 {
            self.0
        } else {
            rng.gen_range(self.0..=self.1)
        }
    }

    fn check_unit(&self, what: &str, open_below: bool) -> Result<()> {
        let ok = self.0 <= self.1
            && self.1 <= 1.0
            && if open_below {
                self.0 > 0.0
            } else {
                self.0 >= 0.0
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{what} interval [{}, {}] must be ordered and lie in {}",
                self.0,
                self.1,
                if open_below { "(0, 1]" } else { "[0, 1]" }
            )))
        }
    }
}

/// How node-type prices are produced by the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    /// `c_d = 1`, `e = 1`.
    Homogeneous,
    /// Fixed coefficients and exponent.
    Params(CostParams),
    /// Coefficients drawn uniformly from `coefficient_range` once per
    /// instance (from the instance seed), with a fixed exponent.
    Heterogeneous {
        #[serde(default = "default_coefficient_range")]
        coefficient_range: Interval,
        #[serde(default = "default_exponent")]
        exponent: f64,
    },
}

fn default_coefficient_range() -> Interval {
    Interval(0.3, 1.0)
}

fn default_exponent() -> f64 {
    1.0
}

impl CostModel {
    pub fn heterogeneous(exponent: f64) -> Self {
        CostModel::Heterogeneous {
            coefficient_range: default_coefficient_range(),
            exponent,
        }
    }

    fn resolve(&self, dims: usize, rng: &mut impl Rng) -> Result<CostParams> {
        let params = match self {
            CostModel::Homogeneous => CostParams::homogeneous(dims),
            CostModel::Params(p) => p.clone(),
            CostModel::Heterogeneous {
                coefficient_range,
                exponent,
            } => CostParams {
                coefficients: (0..dims).map(|_| coefficient_range.sample(rng)).collect(),
                exponent: *exponent,
            },
        };
        params.validate()?;
        if params.coefficients.len() != dims {
            return Err(Error::InvalidArgument(format!(
                "{} cost coefficients for {dims} dimensions",
                params.coefficients.len()
            )));
        }
        Ok(params)
    }
}

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub dims: usize,
    pub horizon: u32,
    pub demand: Interval,
    pub capacity: Interval,
    pub cost: CostModel,
    #[serde(default)]
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            m: 10,
            dims: 5,
            horizon: 24,
            demand: Interval(0.01, 0.1),
            capacity: Interval(0.2, 1.0),
            cost: CostModel::Homogeneous,
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.dims == 0 || self.horizon == 0 {
            return Err(Error::InvalidArgument(
                "m, dims and horizon must be positive".into(),
            ));
        }
        self.demand.check_unit("demand", false)?;
        self.capacity.check_unit("capacity", true)?;
        Ok(())
    }
}

/// Draws an instance: every demand and capacity component is uniform in its
/// interval, spans are the sorted pair of two uniform slots, and prices
/// follow the cost model. Deterministic per seed.
pub fn generate_synthetic(spec: &GenSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let params = spec.cost.resolve(spec.dims, &mut rng)?;

    let mut node_types = Vec::with_capacity(spec.m);
    for b in 0..spec.m {
        let capacity: Vec<f64> = (0..spec.dims)
            .map(|_| spec.capacity.sample(&mut rng))
            .collect();
        let cost = node_cost(&capacity, &params)?;
        node_types.push(NodeType::new(format!("B{}", b + 1), capacity, cost));
    }

    let mut tasks = Vec::with_capacity(spec.n);
    for u in 0..spec.n {
        let demand = (0..spec.dims)
            .map(|_| spec.demand.sample(&mut rng))
            .collect();
        let a = rng.gen_range(1..=spec.horizon);
        let b = rng.gen_range(1..=spec.horizon);
        tasks.push(Task::new(format!("u{}", u + 1), demand, a.min(b), a.max(b)));
    }

    Instance::new(spec.dims, spec.horizon, node_types, tasks)
}
