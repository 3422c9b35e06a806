//! BPMN 2.0 process models and the workload they imply.
//!
//! Only a subset of BPMN is understood: start/end events, plain, user,
//! service and script tasks, exclusive and parallel gateways, and sequence
//! flows. Annotations come from `documentation` elements, text annotations
//! associated with a node, and elements in the `blade` extension namespace.

mod parse;
mod profile;
mod visits;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::parse::{parse_bpmn, ParsedProcess, BLADE_NS, BPMN_NS};
pub use self::profile::{build_profile, extract_embedded_requirements, EmbeddedRequirements, ProcessProfile, DEFAULT_ONCHAIN_MARKER};
pub use self::visits::{expected_visits, node_visits};

/// Tolerance on exclusive-gateway probability sums.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BpmnError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("no process element")]
    NoProcess,
    #[error("process `{process}` has {count} start events, expected exactly one")]
    StartEvents { process: String, count: usize },
    #[error("process `{0}` has no end event")]
    NoEnd(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("edge references unknown node `{0}`")]
    DanglingEdge(String),
    #[error("edge {from} -> {to} has probability {probability} outside [0, 1]")]
    BadProbability { from: String, to: String, probability: f64 },
    #[error("outgoing probabilities of gateway `{gateway}` sum to {sum}, expected 1")]
    ProbabilitySum { gateway: String, sum: f64 },
    #[error("process graph is cyclic (involves `{0}`)")]
    Cyclic(String),
    #[error("instance rate must be finite and non-negative, got {0}")]
    BadRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Start,
    End,
    Task,
    ExclusiveGateway,
    ParallelGateway,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub name: String,
    #[serde(default)]
    pub annotations: Vec<String>,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: NodeKind, name: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            kind,
            name: name.into(),
            annotations: Vec::new(),
        }
    }

    /// Annotation text split into trimmed, non-empty lines.
    pub fn annotation_lines(&self) -> impl Iterator<Item = &str> {
        annotation_lines(&self.annotations)
    }
}

pub(crate) fn annotation_lines(annotations: &[String]) -> impl Iterator<Item = &str> {
    annotations
        .iter()
        .flat_map(|a| a.lines())
        .map(str::trim)
        .filter(|l| !l.is_empty())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    /// Branch probability; meaningful on exclusive-gateway outgoing edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            probability: None,
        }
    }

    pub fn with_probability(mut self, p: f64) -> Self {
        self.probability = Some(p);
        self
    }
}

/// A validated process graph: one start node, at least one end node, edges
/// between existing nodes, and consistent gateway probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessModel {
    process_id: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    /// Process-level annotations.
    #[serde(default)]
    annotations: Vec<String>,
}

impl ProcessModel {
    pub fn new(process_id: impl Into<String>, nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, BpmnError> {
        Self::with_annotations(process_id, nodes, edges, Vec::new())
    }

    pub fn with_annotations(
        process_id: impl Into<String>,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        annotations: Vec<String>,
    ) -> Result<Self, BpmnError> {
        let model = ProcessModel {
            process_id: process_id.into(),
            nodes,
            edges,
            annotations,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn process_id(&self) -> &str {
        &self.process_id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn annotations(&self) -> &[String] {
        &self.annotations
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Task)
    }

    pub fn start(&self) -> &Node {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::Start)
            .expect("validated model has a start node")
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    pub fn incoming<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> {
        self.edges.iter().filter(move |e| e.to == id)
    }

    /// Probability carried by each outgoing edge of `id`, in edge order.
    ///
    /// Exclusive gateways use the annotated probabilities; unannotated
    /// branches share whatever mass is left equally (all of it when nothing
    /// is annotated). Every other node sends probability 1 down each edge.
    pub fn branch_probabilities(&self, id: &str) -> Vec<f64> {
        let out: Vec<&Edge> = self.outgoing(id).collect();
        let exclusive = self.node(id).is_some_and(|n| n.kind == NodeKind::ExclusiveGateway);
        if !exclusive {
            return vec![1.0; out.len()];
        }
        let annotated: f64 = out.iter().filter_map(|e| e.probability).sum();
        let unannotated = out.iter().filter(|e| e.probability.is_none()).count();
        let share = if unannotated > 0 {
            ((1.0 - annotated) / unannotated as f64).max(0.0)
        } else {
            0.0
        };
        out.iter().map(|e| e.probability.unwrap_or(share)).collect()
    }

    fn validate(&self) -> Result<(), BpmnError> {
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(BpmnError::DuplicateNode(n.id.clone()));
            }
        }
        let starts = self.nodes.iter().filter(|n| n.kind == NodeKind::Start).count();
        if starts != 1 {
            return Err(BpmnError::StartEvents {
                process: self.process_id.clone(),
                count: starts,
            });
        }
        if !self.nodes.iter().any(|n| n.kind == NodeKind::End) {
            return Err(BpmnError::NoEnd(self.process_id.clone()));
        }

        let mut sums: HashMap<&str, (f64, usize, usize)> = HashMap::new();
        for e in &self.edges {
            for end in [&e.from, &e.to] {
                if !ids.contains(end.as_str()) {
                    return Err(BpmnError::DanglingEdge(end.clone()));
                }
            }
            let entry = sums.entry(e.from.as_str()).or_default();
            entry.2 += 1;
            if let Some(p) = e.probability {
                if !(0.0..=1.0).contains(&p) {
                    return Err(BpmnError::BadProbability {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        probability: p,
                    });
                }
                entry.0 += p;
                entry.1 += 1;
            }
        }

        for n in self.nodes.iter().filter(|n| n.kind == NodeKind::ExclusiveGateway) {
            let Some(&(sum, annotated, total)) = sums.get(n.id.as_str()) else {
                continue;
            };
            let ok = if annotated == 0 {
                true
            } else if annotated == total {
                (sum - 1.0).abs() <= PROBABILITY_TOLERANCE
            } else {
                sum <= 1.0 + PROBABILITY_TOLERANCE
            };
            if !ok {
                return Err(BpmnError::ProbabilitySum {
                    gateway: n.id.clone(),
                    sum,
                });
            }
        }
        Ok(())
    }
}
