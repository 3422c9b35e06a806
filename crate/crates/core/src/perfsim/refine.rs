use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{analytic_capacity, simulate, ChainParams, SimError, WorkloadSpec};
use crate::kb::{AttributeValue, CriterionKind, Interval, KnowledgeBase, Source};

pub const THROUGHPUT_CRITERION: &str = "throughput-tps";
pub const LATENCY_CRITERION: &str = "latency-s";

/// Offered load of the saturation run, as a multiple of analytic capacity.
const OVERLOAD_FACTOR: f64 = 2.5;
/// Both refinement runs span this many block times.
const RUN_BLOCKS: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub kb: KnowledgeBase,
    pub profile: String,
    pub saturation_throughput: f64,
    pub throughput_band: Interval,
    /// Absent when the nominal run committed nothing.
    pub latency_band: Option<Interval>,
    pub notes: Vec<String>,
}

/// Narrows a profile's `throughput-tps` and `latency-s` intervals using two
/// simulations on the profile's chain parameters.
///
/// Throughput comes from a run overloaded to 2.5x analytic capacity, banded
/// to +/-5%. Latency comes from a run at the workload's own rates, banded to
/// `[p50 / 2, p95 * 1.5]`. Each band is intersected with the stored
/// interval; when they are disjoint the band replaces it and a conflict note
/// is added to the profile's sources. The returned KB has its version bumped.
pub fn refine_intervals(
    kb: &KnowledgeBase,
    profile_id: &str,
    mapping: &BTreeMap<String, ChainParams>,
    workload: &WorkloadSpec,
) -> Result<Refinement, SimError> {
    let profile = kb
        .profile(profile_id)
        .ok_or_else(|| SimError::UnknownProfile(profile_id.to_owned()))?;
    let params = mapping
        .get(profile_id)
        .ok_or_else(|| SimError::MissingParams(profile_id.to_owned()))?;
    for id in [THROUGHPUT_CRITERION, LATENCY_CRITERION] {
        match kb.criterion(id) {
            Some(c) if c.kind == CriterionKind::NumericInterval => {}
            _ => return Err(SimError::MissingCriterion(id)),
        }
    }

    let duration = RUN_BLOCKS * params.block_time;
    let capacity = analytic_capacity(params, workload)?;
    let overload = workload.scaled(OVERLOAD_FACTOR * capacity / workload.total_rate());
    let saturation = simulate(params, &overload, duration)?.throughput;
    let throughput_band = Interval::new(0.95 * saturation, 1.05 * saturation);

    let nominal = simulate(params, workload, duration)?;
    let latency_band = nominal.latency.map(|l| Interval::new(0.5 * l.p50, 1.5 * l.p95));

    let mut refined = profile.clone();
    let mut notes = Vec::new();
    let next_version = kb.kb_version() + 1;
    apply_band(&mut refined.attributes, THROUGHPUT_CRITERION, throughput_band, &mut notes);
    match latency_band {
        Some(band) => apply_band(&mut refined.attributes, LATENCY_CRITERION, band, &mut notes),
        None => notes.push(format!("{LATENCY_CRITERION}: nominal run committed nothing, interval left unchanged")),
    }

    refined.sources.push(Source::note(format!(
        "perfsim refinement, kb v{next_version}: block_time={}s block_capacity={} finality_blocks={} node_count={}, \
         workload seed {}, {THROUGHPUT_CRITERION} band {throughput_band}{}",
        params.block_time,
        params.block_capacity,
        params.finality_blocks,
        params.node_count,
        workload.seed,
        latency_band.map(|b| format!(", {LATENCY_CRITERION} band {b}")).unwrap_or_default(),
    )));
    for note in notes.iter().filter(|n| n.contains("conflict")) {
        refined.sources.push(Source::note(format!("perfsim {note}")));
    }

    Ok(Refinement {
        kb: kb.with_profile(refined)?,
        profile: profile_id.to_owned(),
        saturation_throughput: saturation,
        throughput_band,
        latency_band,
        notes,
    })
}

fn apply_band(attributes: &mut BTreeMap<String, AttributeValue>, criterion: &str, band: Interval, notes: &mut Vec<String>) {
    let refined = match attributes.get(criterion) {
        Some(AttributeValue::Interval(stored)) => match stored.intersect(&band) {
            Some(narrowed) => {
                notes.push(format!("{criterion}: {stored} narrowed to {narrowed}"));
                narrowed
            }
            None => {
                notes.push(format!(
                    "conflict on {criterion}: stored {stored} is disjoint from simulated band {band}, replaced by the band"
                ));
                band
            }
        },
        _ => {
            notes.push(format!("{criterion}: no stored interval, set to {band}"));
            band
        }
    };
    attributes.insert(criterion.to_owned(), AttributeValue::Interval(refined));
}
