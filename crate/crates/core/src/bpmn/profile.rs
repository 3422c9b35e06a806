use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{annotation_lines, expected_visits, BpmnError, ProcessModel};
use crate::requirements::{Operator, Preference, RequirementFragment, StrictRequirement, Threshold};

/// Annotation token marking a task as executed on-chain.
pub const DEFAULT_ONCHAIN_MARKER: &str = "blade:onchain";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmbeddedRequirements {
    pub requirements: RequirementFragment,
    pub warnings: Vec<String>,
}

/// Collects `blade:require` and `blade:prefer` lines from the process and
/// its nodes.
///
/// Grammar, one directive per line:
///
/// ```text
/// blade:require <criterion> <equals|at-least|at-most> <literal>
/// blade:prefer <criterion> <weight in [0,1]>
/// ```
///
/// A criterion preferred more than once keeps its largest weight. Lines
/// that do not parse are returned as warnings.
pub fn extract_embedded_requirements(model: &ProcessModel) -> EmbeddedRequirements {
    let mut out = EmbeddedRequirements::default();
    let sources = std::iter::once(("process", model.process_id(), model.annotations()))
        .chain(model.nodes().iter().map(|n| ("node", n.id.as_str(), n.annotations.as_slice())));

    for (what, id, annotations) in sources {
        for line in annotation_lines(annotations) {
            let mut words = line.split_whitespace();
            match words.next() {
                Some("blade:require") => match parse_require(&mut words) {
                    Some(req) => out.requirements.strict.push(req),
                    None => out.warnings.push(format!("{what} `{id}`: malformed directive `{line}`")),
                },
                Some("blade:prefer") => match parse_prefer(&mut words) {
                    Some(pref) => merge_preference(&mut out, pref, what, id),
                    None => out.warnings.push(format!("{what} `{id}`: malformed directive `{line}`")),
                },
                _ => {}
            }
        }
    }
    out
}

fn parse_require<'a>(words: &mut impl Iterator<Item = &'a str>) -> Option<StrictRequirement> {
    let criterion = words.next()?;
    let operator = Operator::parse(words.next()?).filter(|op| *op != Operator::IncludesAll)?;
    let literal = words.next()?;
    if words.next().is_some() {
        return None;
    }
    Some(StrictRequirement::new(criterion, operator, Threshold::parse_literal(literal)))
}

fn parse_prefer<'a>(words: &mut impl Iterator<Item = &'a str>) -> Option<Preference> {
    let criterion = words.next()?;
    let weight: f64 = words.next()?.parse().ok()?;
    if words.next().is_some() || !(0.0..=1.0).contains(&weight) {
        return None;
    }
    Some(Preference::new(criterion, weight))
}

fn merge_preference(out: &mut EmbeddedRequirements, pref: Preference, what: &str, id: &str) {
    match out
        .requirements
        .preferences
        .iter_mut()
        .find(|p| p.criterion == pref.criterion)
    {
        Some(existing) => {
            let kept = existing.weight.max(pref.weight);
            out.warnings.push(format!(
                "{what} `{id}`: duplicate preference for `{}` ({} and {}), keeping {kept}",
                pref.criterion, existing.weight, pref.weight
            ));
            existing.weight = kept;
        }
        None => out.requirements.preferences.push(pref),
    }
}

/// Workload a process puts on the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessProfile {
    pub process_id: String,
    /// Process instances per second.
    pub instance_rate: f64,
    pub task_visits: BTreeMap<String, f64>,
    /// On-chain task ids, in document order.
    pub onchain_tasks: Vec<String>,
    pub embedded_requirements: RequirementFragment,
    /// Transactions per second: instance rate times expected on-chain visits.
    pub tx_rate: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn build_profile(model: &ProcessModel, instance_rate: f64, onchain_marker: &str) -> Result<ProcessProfile, BpmnError> {
    if !instance_rate.is_finite() || instance_rate < 0.0 {
        return Err(BpmnError::BadRate(instance_rate));
    }
    let task_visits = expected_visits(model)?;
    let onchain_tasks: Vec<String> = model
        .tasks()
        .filter(|t| t.annotation_lines().any(|l| l.split_whitespace().next() == Some(onchain_marker)))
        .map(|t| t.id.clone())
        .collect();
    let tx_rate = instance_rate * onchain_tasks.iter().map(|t| task_visits[t]).sum::<f64>();
    let embedded = extract_embedded_requirements(model);
    Ok(ProcessProfile {
        process_id: model.process_id().to_owned(),
        instance_rate,
        task_visits,
        onchain_tasks,
        embedded_requirements: embedded.requirements,
        tx_rate,
        warnings: embedded.warnings,
    })
}
