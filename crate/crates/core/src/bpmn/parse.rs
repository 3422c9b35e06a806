use std::collections::{HashMap, HashSet};

use roxmltree::{Document, Node as XmlNode};

use super::{annotation_lines, BpmnError, Edge, Node, NodeKind, ProcessModel};

/// BPMN 2.0 model namespace.
pub const BPMN_NS: &str = "http://www.omg.org/spec/BPMN/20100524/MODEL";
/// Extension namespace for annotations understood by this crate.
pub const BLADE_NS: &str = "urn:blade:bpmn:1";

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedProcess {
    pub model: ProcessModel,
    /// Elements that were skipped or adjusted while mapping the document.
    pub warnings: Vec<String>,
}

const TASK_ELEMENTS: [&str; 4] = ["task", "userTask", "serviceTask", "scriptTask"];

fn node_kind(local: &str) -> Option<NodeKind> {
    match local {
        "startEvent" => Some(NodeKind::Start),
        "endEvent" => Some(NodeKind::End),
        "exclusiveGateway" => Some(NodeKind::ExclusiveGateway),
        "parallelGateway" => Some(NodeKind::ParallelGateway),
        l if TASK_ELEMENTS.contains(&l) => Some(NodeKind::Task),
        _ => None,
    }
}

fn is_bpmn(node: &XmlNode, local: &str) -> bool {
    node.is_element() && node.tag_name().namespace() == Some(BPMN_NS) && node.tag_name().name() == local
}

fn text_of(node: &XmlNode) -> String {
    node.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect::<String>()
        .trim()
        .to_owned()
}

/// Documentation text plus the text of every `blade` extension element.
fn annotations_of(element: &XmlNode) -> Vec<String> {
    let mut out = Vec::new();
    for child in element.children().filter(XmlNode::is_element) {
        if is_bpmn(&child, "documentation") {
            let t = text_of(&child);
            if !t.is_empty() {
                out.push(t);
            }
        } else if is_bpmn(&child, "extensionElements") {
            for ext in child
                .descendants()
                .filter(|n| n.is_element() && n.tag_name().namespace() == Some(BLADE_NS))
            {
                let t = text_of(&ext);
                if !t.is_empty() {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// Reads a `blade:prob` attribute or annotation line on a sequence flow.
fn flow_probability(flow: &XmlNode, warnings: &mut Vec<String>, id: &str) -> Option<f64> {
    let raw = flow.attribute((BLADE_NS, "prob")).map(str::to_owned).or_else(|| {
        let annotations = annotations_of(flow);
        let found = annotation_lines(&annotations)
            .find_map(|l| l.strip_prefix("blade:prob").map(|rest| rest.trim().to_owned()));
        found
    })?;
    match raw.parse::<f64>() {
        Ok(p) if p.is_finite() => Some(p),
        _ => {
            warnings.push(format!("sequence flow `{id}`: unreadable probability `{raw}` ignored"));
            None
        }
    }
}

/// Maps the first BPMN process in `document` onto a [`ProcessModel`].
pub fn parse_bpmn(document: &str) -> Result<ParsedProcess, BpmnError> {
    if document.trim().is_empty() {
        return Err(BpmnError::NoProcess);
    }
    let doc = Document::parse(document).map_err(|e| BpmnError::MalformedXml(e.to_string()))?;
    let mut processes = doc.descendants().filter(|n| is_bpmn(n, "process"));
    let process = processes.next().ok_or(BpmnError::NoProcess)?;
    let mut warnings: Vec<String> = processes
        .map(|p| format!("additional process `{}` ignored", p.attribute("id").unwrap_or("?")))
        .collect();
    let process_id = process.attribute("id").unwrap_or("process").to_owned();

    let mut nodes: Vec<Node> = Vec::new();
    let mut flows = Vec::new();
    let mut text_annotations: HashMap<&str, String> = HashMap::new();
    let mut associations = Vec::new();

    for el in process.children().filter(XmlNode::is_element) {
        let local = el.tag_name().name();
        let id = el.attribute("id").unwrap_or_default();
        if el.tag_name().namespace() != Some(BPMN_NS) {
            warnings.push(format!("element `{local}` outside the BPMN namespace skipped"));
            continue;
        }
        if let Some(kind) = node_kind(local) {
            if id.is_empty() {
                warnings.push(format!("`{local}` without id skipped"));
                continue;
            }
            nodes.push(Node {
                id: id.to_owned(),
                kind,
                name: el.attribute("name").unwrap_or(id).to_owned(),
                annotations: annotations_of(&el),
            });
            continue;
        }
        match local {
            "sequenceFlow" => flows.push(el),
            "textAnnotation" => {
                let text = el
                    .children()
                    .find(|c| is_bpmn(c, "text"))
                    .map(|t| text_of(&t))
                    .unwrap_or_default();
                text_annotations.insert(id, text);
            }
            "association" => associations.push(el),
            "documentation" | "extensionElements" => {}
            other => warnings.push(format!("unsupported element `{other}` (`{id}`) skipped")),
        }
    }

    let node_ids: HashSet<String> = nodes.iter().map(|n| n.id.clone()).collect();
    for assoc in associations {
        let (Some(src), Some(dst)) = (assoc.attribute("sourceRef"), assoc.attribute("targetRef")) else {
            continue;
        };
        // associations may point either way
        let (node_id, text) = match (text_annotations.get(dst), text_annotations.get(src)) {
            (Some(t), _) => (src, t),
            (None, Some(t)) => (dst, t),
            _ => continue,
        };
        match nodes.iter_mut().find(|n| n.id == node_id) {
            Some(n) if !text.is_empty() => n.annotations.push(text.clone()),
            Some(_) => {}
            None => warnings.push(format!("text annotation attached to unknown node `{node_id}` skipped")),
        }
    }

    let kinds: HashMap<&str, NodeKind> = nodes.iter().map(|n| (n.id.as_str(), n.kind)).collect();
    let mut edges = Vec::new();
    for flow in flows {
        let id = flow.attribute("id").unwrap_or("?");
        let (Some(from), Some(to)) = (flow.attribute("sourceRef"), flow.attribute("targetRef")) else {
            warnings.push(format!("sequence flow `{id}` without source or target skipped"));
            continue;
        };
        if !node_ids.contains(from) || !node_ids.contains(to) {
            warnings.push(format!("sequence flow `{id}` ({from} -> {to}) touches a skipped element"));
            continue;
        }
        let mut probability = flow_probability(&flow, &mut warnings, id);
        if probability.is_some() && kinds.get(from) != Some(&NodeKind::ExclusiveGateway) {
            warnings.push(format!(
                "sequence flow `{id}`: probability ignored, source `{from}` is not an exclusive gateway"
            ));
            probability = None;
        }
        edges.push(Edge {
            from: from.to_owned(),
            to: to.to_owned(),
            probability,
        });
    }

    let model = ProcessModel::with_annotations(process_id, nodes, edges, annotations_of(&process))?;
    Ok(ParsedProcess { model, warnings })
}
