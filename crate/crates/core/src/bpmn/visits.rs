use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{BpmnError, NodeKind, ProcessModel};

/// Expected executions per process instance of every node.
///
/// The start node is visited once. Any other node receives the sum over its
/// incoming edges of `visits(source) * branch probability`, except a parallel
/// gateway with several incoming edges, which synchronizes its branches and
/// fires once per arrival set: it takes the largest incoming contribution.
pub fn node_visits(model: &ProcessModel) -> Result<HashMap<String, f64>, BpmnError> {
    let order = topological_order(model)?;
    let mut visits: HashMap<&str, f64> = model.nodes().iter().map(|n| (n.id.as_str(), 0.0)).collect();
    visits.insert(model.start().id.as_str(), 1.0);

    let mut inflow: HashMap<&str, Vec<f64>> = HashMap::new();
    for id in order {
        let node = model.node(id).expect("ordered ids exist");
        if node.kind != NodeKind::Start {
            let contributions = inflow.remove(id).unwrap_or_default();
            let total = if node.kind == NodeKind::ParallelGateway && contributions.len() > 1 {
                contributions.iter().copied().fold(0.0, f64::max)
            } else {
                contributions.iter().sum()
            };
            visits.insert(id, total);
        }
        let here = visits[id];
        for (edge, p) in model.outgoing(id).zip(model.branch_probabilities(id)) {
            inflow.entry(edge.to.as_str()).or_default().push(here * p);
        }
    }

    Ok(visits.into_iter().map(|(k, v)| (k.to_owned(), v)).collect())
}

/// Expected visits per instance for every task node.
pub fn expected_visits(model: &ProcessModel) -> Result<BTreeMap<String, f64>, BpmnError> {
    let all = node_visits(model)?;
    Ok(model
        .tasks()
        .map(|t| (t.id.clone(), all[t.id.as_str()]))
        .collect())
}

/// Kahn's algorithm over node ids; a leftover node means a cycle.
fn topological_order(model: &ProcessModel) -> Result<Vec<&str>, BpmnError> {
    let mut indegree: HashMap<&str, usize> = model.nodes().iter().map(|n| (n.id.as_str(), 0)).collect();
    for e in model.edges() {
        *indegree.get_mut(e.to.as_str()).expect("validated edge") += 1;
    }
    // seed in document order so the traversal is deterministic
    let mut ready: VecDeque<&str> = model
        .nodes()
        .iter()
        .map(|n| n.id.as_str())
        .filter(|id| indegree[id] == 0)
        .collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(id) = ready.pop_front() {
        order.push(id);
        for e in model.outgoing(id) {
            let d = indegree.get_mut(e.to.as_str()).expect("validated edge");
            *d -= 1;
            if *d == 0 {
                ready.push_back(e.to.as_str());
            }
        }
    }
    if order.len() < model.nodes().len() {
        let stuck = model
            .nodes()
            .iter()
            .find(|n| indegree[n.id.as_str()] > 0)
            .map(|n| n.id.clone())
            .unwrap_or_default();
        return Err(BpmnError::Cyclic(stuck));
    }
    Ok(order)
}
