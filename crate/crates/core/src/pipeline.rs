//! Glue shared by the command-line and HTTP front ends.

use crate::bpmn::ProcessProfile;
use crate::perfsim::THROUGHPUT_CRITERION;
use crate::requirements::{Operator, RequirementSet, StrictRequirement, Threshold};

/// Folds a process profile into a requirement set.
///
/// Embedded BPMN requirements are merged with lower precedence than `reqs`.
/// When the process generates transactions and nothing already bounds
/// `throughput-tps` from below, a strict `throughput-tps at-least <tx_rate>`
/// is added. Returns the merge warnings.
pub fn apply_process_profile(reqs: &mut RequirementSet, profile: &ProcessProfile) -> Vec<String> {
    let mut warnings = profile.warnings.clone();
    warnings.extend(reqs.merge_lower_precedence(&profile.embedded_requirements));
    let bounded = reqs
        .strict
        .iter()
        .any(|s| s.criterion == THROUGHPUT_CRITERION && s.operator == Operator::AtLeast);
    if profile.tx_rate > 0.0 && !bounded {
        reqs.strict.push(StrictRequirement::new(
            THROUGHPUT_CRITERION,
            Operator::AtLeast,
            Threshold::Number(profile.tx_rate),
        ));
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::requirements::{Preference, RequirementFragment};

    fn profile(tx_rate: f64, fragment: RequirementFragment) -> ProcessProfile {
        ProcessProfile {
            process_id: "p".into(),
            instance_rate: 1.0,
            task_visits: Default::default(),
            onchain_tasks: vec![],
            embedded_requirements: fragment,
            tx_rate,
            warnings: vec![],
        }
    }

    #[test]
    fn adds_rate_floor() {
        let mut reqs = RequirementSet::default();
        apply_process_profile(&mut reqs, &profile(7.5, RequirementFragment::default()));
        assert_eq!(
            reqs.strict,
            [StrictRequirement::new(THROUGHPUT_CRITERION, Operator::AtLeast, Threshold::Number(7.5))]
        );
    }

    #[test]
    fn existing_floor_kept() {
        let mut reqs = RequirementSet::default();
        reqs.strict.push(StrictRequirement::new(THROUGHPUT_CRITERION, Operator::AtLeast, Threshold::Number(1.0)));
        apply_process_profile(&mut reqs, &profile(7.5, RequirementFragment::default()));
        assert_eq!(reqs.strict.len(), 1);
    }

    #[test]
    fn file_wins_over_embedded() {
        let mut reqs = RequirementSet::default();
        reqs.preferences.push(Preference::new("latency-s", 0.5));
        let fragment = RequirementFragment {
            strict: vec![],
            preferences: vec![Preference::new("latency-s", 1.0), Preference::new("throughput-tps", 0.25)],
        };
        let warnings = apply_process_profile(&mut reqs, &profile(0.0, fragment));
        assert_eq!(reqs.preference("latency-s").unwrap().weight, 0.5);
        assert_eq!(reqs.preference("throughput-tps").unwrap().weight, 0.25);
        assert_eq!(warnings.len(), 1);
        assert!(reqs.strict.is_empty());
    }
}
