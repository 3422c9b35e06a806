use serde::{Deserialize, Serialize};

use crate::kb::{AttributeValue, BlockchainProfile, CriterionDef, KnowledgeBase};
use crate::requirements::{Operator, StrictRequirement, Threshold};

/// One strict requirement an alternative failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub requirement: StrictRequirement,
    pub observed: Option<AttributeValue>,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub alternative: String,
    pub violated: Vec<Violation>,
}

#[derive(Debug, Clone)]
pub struct FilterOutcome<'a> {
    pub survivors: Vec<&'a BlockchainProfile>,
    pub eliminations: Vec<Elimination>,
}

/// Splits the knowledge base's profiles into survivors and eliminations.
/// Every violated requirement is reported, not just the first.
pub fn filter_alternatives<'a>(kb: &'a KnowledgeBase, strict: &[StrictRequirement]) -> FilterOutcome<'a> {
    let mut survivors = Vec::new();
    let mut eliminations = Vec::new();
    for profile in kb.profiles() {
        let violated: Vec<Violation> = strict
            .iter()
            .filter_map(|req| check_requirement(req, kb.criterion(&req.criterion), profile.attribute(&req.criterion)))
            .collect();
        if violated.is_empty() {
            survivors.push(profile);
        } else {
            eliminations.push(Elimination {
                alternative: profile.id.clone(),
                violated,
            });
        }
    }
    FilterOutcome {
        survivors,
        eliminations,
    }
}

/// Checks one requirement under guaranteed-bound semantics: an interval
/// satisfies `at-least t` only if its lower bound does, `at-most t` only if
/// its upper bound does. Returns the violation, if any.
pub fn check_requirement(
    req: &StrictRequirement,
    criterion: Option<&CriterionDef>,
    observed: Option<&AttributeValue>,
) -> Option<Violation> {
    let violation = |explanation: String| {
        Some(Violation {
            requirement: req.clone(),
            observed: observed.cloned(),
            explanation,
        })
    };
    let Some(criterion) = criterion else {
        return violation(format!("criterion `{}` is not defined", req.criterion));
    };
    let Some(value) = observed else {
        return violation("attribute absent".to_owned());
    };

    match (req.operator, value, &req.threshold) {
        (Operator::Equals, AttributeValue::Flag(have), Threshold::Flag(want)) => {
            (have != want).then(|| format!("is {have}, required {want}"))
        }
        (Operator::Equals, AttributeValue::Level(have), Threshold::Label(want)) => {
            (have != want).then(|| format!("level `{have}`, required `{want}`"))
        }
        (Operator::Equals, AttributeValue::Set(have), t) if t.labels().is_some() => {
            let want = t.labels().unwrap_or_default();
            (*have != want).then(|| format!("is {value}, required exactly {t}"))
        }
        (Operator::AtLeast, AttributeValue::Interval(i), Threshold::Number(t)) => {
            (i.lo < *t).then(|| format!("guaranteed lower bound {} < {t}", i.lo))
        }
        (Operator::AtMost, AttributeValue::Interval(i), Threshold::Number(t)) => {
            (i.hi > *t).then(|| format!("guaranteed upper bound {} > {t}", i.hi))
        }
        (op @ (Operator::AtLeast | Operator::AtMost), AttributeValue::Level(have), Threshold::Label(want)) => {
            match (criterion.level_index(have), criterion.level_index(want)) {
                (Some(h), Some(w)) => {
                    let ok = if op == Operator::AtLeast { h >= w } else { h <= w };
                    (!ok).then(|| {
                        let rel = if op == Operator::AtLeast { "below" } else { "above" };
                        format!("level `{have}` is {rel} `{want}`")
                    })
                }
                _ => Some(format!("`{want}` is not a level of `{}`", criterion.id)),
            }
        }
        (Operator::IncludesAll, AttributeValue::Set(have), t) if t.labels().is_some() => {
            let want = t.labels().unwrap_or_default();
            let missing: Vec<&str> = want.difference(have).map(String::as_str).collect();
            (!missing.is_empty()).then(|| format!("missing {}", missing.join(", ")))
        }
        _ => Some(format!(
            "`{}` with threshold `{}` is not applicable to {} attribute",
            req.operator,
            req.threshold,
            criterion.kind
        )),
    }
    .and_then(violation)
}
