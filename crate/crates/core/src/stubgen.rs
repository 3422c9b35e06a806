//! Architecture stubs for the selected platform.
//!
//! Off-chain tasks become service entries, on-chain tasks become contract
//! functions, and the chain parameters become a node list. Output is three
//! files (`architecture.json`, `contract.json`, `deploy.yaml`) whose bytes
//! depend only on the inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bpmn::{ProcessModel, ProcessProfile};
use crate::kb::BlockchainProfile;
use crate::mcdm::RankingResult;
use crate::perfsim::ChainParams;

pub const ARCHITECTURE_FILE: &str = "architecture.json";
pub const CONTRACT_FILE: &str = "contract.json";
pub const DEPLOY_FILE: &str = "deploy.yaml";

const SERVICE_PORT_BASE: u16 = 8080;
const P2P_PORT_BASE: u16 = 30303;
const RPC_PORT_BASE: u16 = 8545;

#[derive(Debug, Error)]
pub enum StubError {
    #[error("`{0}` is not among the ranked survivors")]
    WinnerNotRanked(String),
    #[error("process `{0}` has no tasks")]
    EmptyModel(String),
    #[error("chain parameters: {0}")]
    Params(String),
    #[error("writing stubs: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlatformRef {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceStub {
    pub name: String,
    pub source_task: String,
    pub operations: Vec<String>,
    pub port: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractFunction {
    pub name: String,
    pub source_task: String,
    pub task_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractManifest {
    pub name: String,
    pub platform: String,
    pub functions: Vec<ContractFunction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ports {
    pub protocol: String,
    pub p2p_base: u16,
    pub rpc_base: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub node_count: u32,
    pub block_time: f64,
    pub finality_blocks: u32,
    pub ports: Ports,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub platform: PlatformRef,
    pub process: String,
    pub services: Vec<ServiceStub>,
    pub contract: ContractManifest,
    pub network: NetworkConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureStub {
    pub descriptor: Descriptor,
    /// Relative path to file bytes.
    pub files: BTreeMap<String, Vec<u8>>,
}

impl ArchitectureStub {
    /// Writes every file under `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), StubError> {
        std::fs::create_dir_all(dir)?;
        for (path, bytes) in &self.files {
            std::fs::write(dir.join(path), bytes)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct DeployManifest<'a> {
    version: u32,
    platform: &'a str,
    services: Vec<DeployService<'a>>,
    chain: DeployChain,
}

#[derive(Serialize)]
struct DeployService<'a> {
    name: &'a str,
    source_task: &'a str,
    protocol: &'static str,
    port: u16,
}

#[derive(Serialize)]
struct DeployChain {
    block_time: f64,
    finality_blocks: u32,
    nodes: Vec<DeployNode>,
}

#[derive(Serialize)]
struct DeployNode {
    name: String,
    p2p_port: u16,
    rpc_port: u16,
}

/// Lowercases and maps every non-alphanumeric character to `_`.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

/// Hands out sanitized names, suffixing `_2`, `_3`, ... on collision.
#[derive(Default)]
struct NamePool(BTreeSet<String>);

impl NamePool {
    fn claim(&mut self, raw: &str) -> String {
        let base = sanitize(raw);
        let mut name = base.clone();
        let mut n = 2;
        while !self.0.insert(name.clone()) {
            name = format!("{base}_{n}");
            n += 1;
        }
        name
    }
}

pub fn generate_stubs(
    model: &ProcessModel,
    profile: &ProcessProfile,
    winner: &BlockchainProfile,
    ranking: &RankingResult,
    params: &ChainParams,
) -> Result<ArchitectureStub, StubError> {
    if !ranking.ranked.iter().any(|r| r.id == winner.id) {
        return Err(StubError::WinnerNotRanked(winner.id.clone()));
    }
    params.validate().map_err(|e| StubError::Params(e.to_string()))?;
    if model.tasks().next().is_none() {
        return Err(StubError::EmptyModel(model.process_id().to_owned()));
    }

    let onchain: BTreeSet<&str> = profile.onchain_tasks.iter().map(String::as_str).collect();
    let mut service_names = NamePool::default();
    let mut function_names = NamePool::default();
    let mut services = Vec::new();
    let mut functions = Vec::new();
    for task in model.tasks() {
        let label = if task.name.trim().is_empty() { &task.id } else { &task.name };
        if onchain.contains(task.id.as_str()) {
            functions.push(ContractFunction {
                name: function_names.claim(label),
                source_task: task.id.clone(),
                task_name: task.name.clone(),
            });
        } else {
            services.push(ServiceStub {
                name: service_names.claim(label),
                source_task: task.id.clone(),
                operations: vec!["execute".to_owned()],
                port: SERVICE_PORT_BASE + services.len() as u16,
            });
        }
    }

    let descriptor = Descriptor {
        platform: PlatformRef {
            id: winner.id.clone(),
            name: winner.name.clone(),
        },
        process: model.process_id().to_owned(),
        services,
        contract: ContractManifest {
            name: sanitize(model.process_id()),
            platform: winner.id.clone(),
            functions,
        },
        network: NetworkConfig {
            node_count: params.node_count,
            block_time: params.block_time,
            finality_blocks: params.finality_blocks,
            ports: Ports {
                protocol: "tcp".to_owned(),
                p2p_base: P2P_PORT_BASE,
                rpc_base: RPC_PORT_BASE,
            },
        },
    };

    let deploy = DeployManifest {
        version: 1,
        platform: &winner.id,
        services: descriptor
            .services
            .iter()
            .map(|s| DeployService {
                name: &s.name,
                source_task: &s.source_task,
                protocol: "http",
                port: s.port,
            })
            .collect(),
        chain: DeployChain {
            block_time: params.block_time,
            finality_blocks: params.finality_blocks,
            nodes: (0..params.node_count)
                .map(|i| DeployNode {
                    name: format!("node-{}", i + 1),
                    p2p_port: P2P_PORT_BASE + i as u16,
                    rpc_port: RPC_PORT_BASE + i as u16,
                })
                .collect(),
        },
    };

    let mut files = BTreeMap::new();
    files.insert(ARCHITECTURE_FILE.to_owned(), crate::json::to_pretty(&descriptor).into_bytes());
    files.insert(CONTRACT_FILE.to_owned(), crate::json::to_pretty(&descriptor.contract).into_bytes());
    files.insert(
        DEPLOY_FILE.to_owned(),
        serde_yaml::to_string(&deploy).expect("deploy manifest serializes").into_bytes(),
    );
    Ok(ArchitectureStub { descriptor, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpmn::{build_profile, Edge, Node, NodeKind, DEFAULT_ONCHAIN_MARKER};
    use crate::kb::fixture_knowledge_base;
    use crate::mcdm::{Provenance, RankedAlternative};
    use crate::requirements::ScalarizationStrategy;

    fn model(tasks: &[(&str, &str, bool)]) -> ProcessModel {
        let mut nodes = vec![Node::new("s", NodeKind::Start, "start")];
        let mut edges = vec![];
        let mut prev = "s".to_owned();
        for (id, name, onchain) in tasks {
            let mut n = Node::new(*id, NodeKind::Task, *name);
            if *onchain {
                n.annotations.push(DEFAULT_ONCHAIN_MARKER.to_owned());
            }
            nodes.push(n);
            edges.push(Edge::new(prev, *id));
            prev = id.to_string();
        }
        nodes.push(Node::new("e", NodeKind::End, "end"));
        edges.push(Edge::new(prev, "e"));
        ProcessModel::new("Order Process", nodes, edges).unwrap()
    }

    fn ranking(ids: &[&str]) -> RankingResult {
        RankingResult {
            eliminations: vec![],
            ranked: ids
                .iter()
                .map(|id| RankedAlternative {
                    id: id.to_string(),
                    score: 1.0,
                    contributions: vec![],
                })
                .collect(),
            provenance: Provenance {
                kb_version: 1,
                scalarization: ScalarizationStrategy::Midpoint,
                weights: vec![],
            },
            warnings: vec![],
        }
    }

    fn run(tasks: &[(&str, &str, bool)]) -> ArchitectureStub {
        let kb = fixture_knowledge_base();
        let m = model(tasks);
        let p = build_profile(&m, 1.0, DEFAULT_ONCHAIN_MARKER).unwrap();
        generate_stubs(&m, &p, kb.profile("besu").unwrap(), &ranking(&["besu"]), &ChainParams::default()).unwrap()
    }

    #[test]
    fn partition_counts() {
        let s = run(&[("a", "Pay", true), ("b", "Ship", false), ("c", "Record", true)]);
        assert_eq!(s.descriptor.contract.functions.len(), 2);
        assert_eq!(s.descriptor.services.len(), 1);
        assert_eq!(s.files.len(), 3);
    }

    #[test]
    fn sanitized_collisions() {
        let s = run(&[("a", "Pay!", true), ("b", "Pay?", true)]);
        let names: Vec<&str> = s.descriptor.contract.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["pay_", "pay__2"]);
    }

    #[test]
    fn deterministic_bytes() {
        let tasks = [("a", "Pay", true), ("b", "Ship", false)];
        assert_eq!(run(&tasks).files, run(&tasks).files);
    }

    #[test]
    fn deploy_lists_nodes() {
        let s = run(&[("a", "Pay", true)]);
        let yaml = String::from_utf8(s.files[DEPLOY_FILE].clone()).unwrap();
        assert!(yaml.contains("node-1") && yaml.contains("node-4") && !yaml.contains("node-5"));
    }

    #[test]
    fn winner_must_be_ranked() {
        let kb = fixture_knowledge_base();
        let m = model(&[("a", "Pay", true)]);
        let p = build_profile(&m, 1.0, DEFAULT_ONCHAIN_MARKER).unwrap();
        let err = generate_stubs(&m, &p, kb.profile("fabric").unwrap(), &ranking(&["besu"]), &ChainParams::default());
        assert!(matches!(err, Err(StubError::WinnerNotRanked(_))));
    }

    #[test]
    fn empty_model_rejected() {
        let kb = fixture_knowledge_base();
        let m = model(&[]);
        let p = build_profile(&m, 1.0, DEFAULT_ONCHAIN_MARKER).unwrap();
        let err = generate_stubs(&m, &p, kb.profile("besu").unwrap(), &ranking(&["besu"]), &ChainParams::default());
        assert!(matches!(err, Err(StubError::EmptyModel(_))));
    }
}
