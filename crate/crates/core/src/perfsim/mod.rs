//! Discrete-event model of transaction processing on a block-producing chain.
//!
//! Transactions arrive per a [`WorkloadSpec`], wait in a FIFO mempool, and
//! are packed into blocks of bounded total weight every `block_time`
//! seconds. A transaction's weight depends on which benchmark method it calls
//! and its difficulty. See [`simulate`] for the event semantics and
//! [`refine_intervals`] for feeding results back into a knowledge base.

mod refine;
mod sim;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::refine::{refine_intervals, Refinement, LATENCY_CRITERION, THROUGHPUT_CRITERION};
pub use self::sim::{simulate, BlockRecord, CommitRecord, LatencyStats, SimResult, Simulation};

use crate::bpmn::ProcessProfile;
use crate::kb::KbError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),
    #[error("invalid workload: {0}")]
    InvalidWorkload(String),
    #[error("difficulty must be at least 1, got {0}")]
    BadDifficulty(u32),
    #[error("workload has zero mean transaction weight")]
    ZeroMeanWeight,
    #[error("duration {duration}s is shorter than the warm-up minimum {minimum}s (10 block times)")]
    DurationTooShort { duration: f64, minimum: f64 },
    #[error("{method} transactions at difficulty {difficulty} weigh {weight}, more than a block holds ({capacity})")]
    TxTooHeavy {
        method: BenchMethod,
        difficulty: u32,
        weight: f64,
        capacity: f64,
    },
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("no chain parameters supplied for profile `{0}`")]
    MissingParams(String),
    #[error("knowledge base has no `{0}` criterion")]
    MissingCriterion(&'static str),
    #[error(transparent)]
    Kb(#[from] KbError),
}

/// The four methods exposed by the benchmark contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMethod {
    /// Solve a dummy computing problem.
    Compute,
    /// Increment a counter in a loop.
    Loop,
    /// Store data.
    Store,
    /// Read data.
    Read,
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Compute => "compute",
            Self::Loop => "loop",
            Self::Store => "store",
            Self::Read => "read",
        })
    }
}

/// Linear cost model: `weight = a + b * difficulty`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodCost {
    pub a: f64,
    pub b: f64,
}

impl MethodCost {
    pub fn new(a: f64, b: f64) -> Self {
        MethodCost { a, b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodCosts {
    pub compute: MethodCost,
    #[serde(rename = "loop")]
    pub loop_: MethodCost,
    pub store: MethodCost,
    pub read: MethodCost,
}

impl MethodCosts {
    pub fn get(&self, method: BenchMethod) -> MethodCost {
        match method {
            BenchMethod::Compute => self.compute,
            BenchMethod::Loop => self.loop_,
            BenchMethod::Store => self.store,
            BenchMethod::Read => self.read,
        }
    }

    /// Same cost for every method.
    pub fn uniform(cost: MethodCost) -> Self {
        MethodCosts {
            compute: cost,
            loop_: cost,
            store: cost,
            read: cost,
        }
    }
}

impl Default for MethodCosts {
    fn default() -> Self {
        MethodCosts {
            compute: MethodCost::new(5.0, 20.0),
            loop_: MethodCost::new(2.0, 5.0),
            store: MethodCost::new(10.0, 8.0),
            // reads still occupy block space in this model
            read: MethodCost::new(1.0, 0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    /// Seconds between blocks.
    pub block_time: f64,
    /// Total transaction weight a block can hold.
    pub block_capacity: f64,
    /// Blocks after inclusion before a transaction is final.
    pub finality_blocks: u32,
    /// Recorded for reporting; has no effect on the model.
    pub node_count: u32,
    #[serde(default)]
    pub method_costs: MethodCosts,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            block_time: 2.0,
            block_capacity: 10_000.0,
            finality_blocks: 1,
            node_count: 4,
            method_costs: MethodCosts::default(),
        }
    }
}

impl ChainParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidParams(msg));
        if !(self.block_time.is_finite() && self.block_time > 0.0) {
            return bad(format!("block_time must be > 0, got {}", self.block_time));
        }
        if !(self.block_capacity.is_finite() && self.block_capacity > 0.0) {
            return bad(format!("block_capacity must be > 0, got {}", self.block_capacity));
        }
        if self.node_count < 1 {
            return bad("node_count must be at least 1".to_owned());
        }
        for m in [BenchMethod::Compute, BenchMethod::Loop, BenchMethod::Store, BenchMethod::Read] {
            let c = self.method_costs.get(m);
            let finite = c.a.is_finite() && c.b.is_finite();
            if !finite || c.a < 0.0 || c.b < 0.0 || c.a + c.b <= 0.0 {
                return bad(format!("{m} cost needs a >= 0, b >= 0 and a + b > 0, got a={} b={}", c.a, c.b));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalProcess {
    /// Evenly spaced arrivals starting at t = 0.
    #[default]
    Deterministic,
    /// Exponential inter-arrival times from the workload seed.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadEntry {
    pub method: BenchMethod,
    pub difficulty: u32,
    /// Transactions per second.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSpec {
    pub entries: Vec<WorkloadEntry>,
    #[serde(default)]
    pub arrival_process: ArrivalProcess,
    #[serde(default)]
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn total_rate(&self) -> f64 {
        self.entries.iter().map(|e| e.rate).sum()
    }

    /// Entry invariants; `require_load` additionally demands a positive total rate.
    pub fn validate(&self, require_load: bool) -> Result<(), SimError> {
        if self.entries.is_empty() {
            return Err(SimError::InvalidWorkload("no entries".to_owned()));
        }
        for e in &self.entries {
            if e.difficulty < 1 {
                return Err(SimError::BadDifficulty(e.difficulty));
            }
            if !e.rate.is_finite() || e.rate < 0.0 {
                return Err(SimError::InvalidWorkload(format!("rate must be finite and >= 0, got {}", e.rate)));
            }
        }
        if require_load && self.total_rate() <= 0.0 {
            return Err(SimError::InvalidWorkload("total rate must be > 0".to_owned()));
        }
        Ok(())
    }

    /// The same mix with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> WorkloadSpec {
        WorkloadSpec {
            entries: self
                .entries
                .iter()
                .map(|e| WorkloadEntry { rate: e.rate * factor, ..*e })
                .collect(),
            ..self.clone()
        }
    }
}

/// Weight of one call: `a + b * difficulty` for the method's coefficients.
pub fn tx_weight(method: BenchMethod, difficulty: u32, params: &ChainParams) -> Result<f64, SimError> {
    if difficulty < 1 {
        return Err(SimError::BadDifficulty(difficulty));
    }
    let c = params.method_costs.get(method);
    Ok(c.a + c.b * f64::from(difficulty))
}

/// Rate-weighted mean transaction weight of a workload.
pub fn mean_weight(params: &ChainParams, workload: &WorkloadSpec) -> Result<f64, SimError> {
    workload.validate(true)?;
    let mut weighted = 0.0;
    for e in &workload.entries {
        weighted += e.rate * tx_weight(e.method, e.difficulty, params)?;
    }
    Ok(weighted / workload.total_rate())
}

/// Closed-form saturation throughput: block weight per second divided by
/// the mix's mean transaction weight.
pub fn analytic_capacity(params: &ChainParams, workload: &WorkloadSpec) -> Result<f64, SimError> {
    params.validate()?;
    let mean = mean_weight(params, workload)?;
    if mean <= 0.0 {
        return Err(SimError::ZeroMeanWeight);
    }
    Ok(params.block_capacity / params.block_time / mean)
}

/// Benchmark method and difficulty an on-chain task is mapped to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodAssignment {
    pub method: BenchMethod,
    pub difficulty: u32,
}

impl Default for MethodAssignment {
    fn default() -> Self {
        MethodAssignment {
            method: BenchMethod::Store,
            difficulty: 1,
        }
    }
}

/// One workload entry per on-chain task, at `instance_rate * visits`.
/// Unmapped tasks default to `store` at difficulty 1; zero-rate entries are
/// dropped, so an idle process yields an empty spec.
pub fn workload_from_profile(
    profile: &ProcessProfile,
    mapping: &BTreeMap<String, MethodAssignment>,
    arrival_process: ArrivalProcess,
    seed: u64,
) -> WorkloadSpec {
    let entries = profile
        .onchain_tasks
        .iter()
        .filter_map(|task| {
            let assignment = mapping.get(task).copied().unwrap_or_default();
            let rate = profile.instance_rate * profile.task_visits.get(task).copied().unwrap_or(0.0);
            (rate > 0.0).then_some(WorkloadEntry {
                method: assignment.method,
                difficulty: assignment.difficulty,
                rate,
            })
        })
        .collect();
    WorkloadSpec {
        entries,
        arrival_process,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::requirements::RequirementFragment;

    fn params(a: f64, b: f64) -> ChainParams {
        ChainParams {
            block_time: 10.0,
            block_capacity: 1000.0,
            finality_blocks: 0,
            node_count: 1,
            method_costs: MethodCosts::uniform(MethodCost::new(a, b)),
        }
    }

    fn workload(entries: &[(BenchMethod, u32, f64)]) -> WorkloadSpec {
        WorkloadSpec {
            entries: entries
                .iter()
                .map(|&(method, difficulty, rate)| WorkloadEntry { method, difficulty, rate })
                .collect(),
            arrival_process: ArrivalProcess::Deterministic,
            seed: 0,
        }
    }

    #[test]
    fn weights() {
        assert_eq!(tx_weight(BenchMethod::Loop, 5, &params(0.0, 1.0)).unwrap(), 5.0);
        assert_eq!(tx_weight(BenchMethod::Read, 1, &params(2.0, 0.0)).unwrap(), 2.0);
        assert_eq!(tx_weight(BenchMethod::Read, 99, &params(2.0, 0.0)).unwrap(), 2.0);
        assert!(matches!(tx_weight(BenchMethod::Store, 0, &params(0.0, 1.0)), Err(SimError::BadDifficulty(0))));
    }

    #[test]
    fn weight_increases_with_difficulty() {
        let p = ChainParams::default();
        for m in [BenchMethod::Compute, BenchMethod::Loop, BenchMethod::Store, BenchMethod::Read] {
            assert!(tx_weight(m, 2, &p).unwrap() > tx_weight(m, 1, &p).unwrap());
        }
    }

    #[test]
    fn capacity_examples() {
        let p = params(10.0, 0.0);
        let w = workload(&[(BenchMethod::Store, 1, 1.0)]);
        assert_eq!(analytic_capacity(&p, &w).unwrap(), 10.0);
        let doubled = ChainParams { block_capacity: 2000.0, ..p };
        assert_eq!(analytic_capacity(&doubled, &w).unwrap(), 20.0);

        let p = ChainParams {
            block_capacity: 500.0,
            method_costs: MethodCosts {
                store: MethodCost::new(10.0, 0.0),
                compute: MethodCost::new(30.0, 0.0),
                ..MethodCosts::uniform(MethodCost::new(1.0, 0.0))
            },
            ..params(0.0, 1.0)
        };
        let mix = workload(&[(BenchMethod::Store, 1, 3.0), (BenchMethod::Compute, 1, 3.0)]);
        assert_eq!(analytic_capacity(&p, &mix).unwrap(), 2.5);
    }

    #[test]
    fn capacity_rejects_idle_workload() {
        let w = workload(&[(BenchMethod::Store, 1, 0.0)]);
        assert!(analytic_capacity(&params(1.0, 0.0), &w).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ChainParams::default().validate().is_ok());
        assert!(ChainParams { block_time: 0.0, ..Default::default() }.validate().is_err());
        assert!(ChainParams { node_count: 0, ..Default::default() }.validate().is_err());
        let mut p = ChainParams::default();
        p.method_costs.read = MethodCost::new(0.0, 0.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_json_shape() {
        let p: ChainParams = serde_json::from_str(
            r#"{"block_time":5,"block_capacity":800,"finality_blocks":2,"node_count":4,
                "method_costs":{"compute":{"a":1,"b":2},"loop":{"a":1,"b":1},"store":{"a":3,"b":1},"read":{"a":1,"b":0}}}"#,
        )
        .unwrap();
        assert_eq!(p.method_costs.loop_, MethodCost::new(1.0, 1.0));
        let w: WorkloadSpec = serde_json::from_str(
            r#"{"entries":[{"method":"compute","difficulty":3,"rate":2.5}],"arrival_process":"poisson","seed":7}"#,
        )
        .unwrap();
        assert_eq!(w.arrival_process, ArrivalProcess::Poisson);
    }

    fn profile(rate: f64, visits: &[(&str, f64)], onchain: &[&str]) -> ProcessProfile {
        ProcessProfile {
            process_id: "p".into(),
            instance_rate: rate,
            task_visits: visits.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            onchain_tasks: onchain.iter().map(|s| s.to_string()).collect(),
            embedded_requirements: RequirementFragment::default(),
            tx_rate: 0.0,
            warnings: vec![],
        }
    }

    #[test]
    fn workload_mapping() {
        let w = workload_from_profile(&profile(2.0, &[("t", 1.0)], &["t"]), &BTreeMap::new(), ArrivalProcess::Deterministic, 0);
        assert_eq!(w.entries, [WorkloadEntry { method: BenchMethod::Store, difficulty: 1, rate: 2.0 }]);

        let mapping = BTreeMap::from([("t".to_owned(), MethodAssignment { method: BenchMethod::Compute, difficulty: 4 })]);
        let w = workload_from_profile(&profile(10.0, &[("t", 0.5)], &["t"]), &mapping, ArrivalProcess::Poisson, 3);
        assert_eq!(w.entries, [WorkloadEntry { method: BenchMethod::Compute, difficulty: 4, rate: 5.0 }]);

        let w = workload_from_profile(&profile(0.0, &[("t", 1.0)], &["t"]), &BTreeMap::new(), ArrivalProcess::Deterministic, 0);
        assert!(w.entries.is_empty());
        assert!(w.validate(true).is_err());
    }
}
