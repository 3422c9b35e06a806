//! Requirement-driven blockchain platform selection.
//!
//! The pipeline: load a [`kb::KnowledgeBase`], read a
//! [`requirements::RequirementSet`], drop platforms that violate strict
//! requirements, and rank the rest with TOPSIS ([`mcdm::evaluate`]).
//! Business processes in BPMN ([`bpmn`]) yield workload profiles for the
//! throughput simulator ([`perfsim`]), which can narrow the knowledge base's
//! performance intervals. [`stubgen`] turns a process and the winning
//! platform into deployment scaffolding.

pub mod bpmn;
pub mod json;
pub mod kb;
pub mod mcdm;
pub mod perfsim;
pub mod pipeline;
pub mod requirements;
pub mod scalar;
pub mod stubgen;

pub use kb::{
    fixture_knowledge_base, load_knowledge_base, merge_knowledge, AttributeValue,
    BlockchainProfile, CriterionDef, CriterionKind, Direction, Interval, KnowledgeBase,
};
pub use mcdm::{evaluate, sensitivity, RankingResult};
pub use perfsim::{analytic_capacity, refine_intervals, simulate, ChainParams, SimResult, WorkloadSpec};
pub use requirements::{parse_requirements, validate_against, RequirementSet};
pub use scalar::Scalar;
pub use stubgen::{generate_stubs, ArchitectureStub};

/// Decision matrix over `f64`, the precision used by the evaluation pipeline.
pub type DecisionMatrix = mcdm::DecisionMatrix<f64>;
/// Single-precision decision matrix.
pub type DecisionMatrixF32 = mcdm::DecisionMatrix<f32>;
