//! Decision inputs: strict constraints, Likert preferences and enterprise assets.
//!
//! The document form has four sections and is read from either TOML or JSON:
//!
//! ```toml
//! [strict]
//! smart-contracts = { equals = true }
//! throughput-tps = { at-least = 50 }
//!
//! [preferences]
//! throughput-tps = 0.75
//!
//! [assets]
//! skills = ["java"]
//! infra = ["docker"]
//! affinity = 0.5
//!
//! [options]
//! scalarization = "midpoint"
//! ```

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::kb::{BlockchainProfile, CriterionKind, KnowledgeBase};

#[derive(Debug, Error)]
pub enum RequirementsError {
    #[error("malformed requirements document: {0}")]
    Malformed(String),
    #[error("likert out of range for `{criterion}`: {weight} is not in [0, 1]")]
    LikertOutOfRange { criterion: String, weight: f64 },
    #[error("duplicate preference for `{0}`")]
    DuplicatePreference(String),
    #[error("asset affinity likert out of range: {0} is not in [0, 1]")]
    AffinityOutOfRange(f64),
    #[error("invalid asset tag `{0}`: tags are single lowercase tokens")]
    InvalidTag(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    Equals,
    AtLeast,
    AtMost,
    IncludesAll,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Self::Equals, Self::AtLeast, Self::AtMost, Self::IncludesAll];

    pub fn label(self) -> &'static str {
        match self {
            Self::Equals => "equals",
            Self::AtLeast => "at-least",
            Self::AtMost => "at-most",
            Self::IncludesAll => "includes-all",
        }
    }

    pub fn parse(label: &str) -> Option<Operator> {
        Self::ALL.into_iter().find(|op| op.label() == label)
    }

    /// Whether the operator can be applied to a criterion of `kind`.
    pub fn accepts(self, kind: CriterionKind) -> bool {
        use CriterionKind::*;
        match self {
            Self::Equals => matches!(kind, Boolean | Ordinal | Categorical),
            Self::AtLeast | Self::AtMost => matches!(kind, NumericInterval | Ordinal),
            Self::IncludesAll => kind == Categorical,
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Literal a strict requirement compares against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Threshold {
    Flag(bool),
    Number(f64),
    Label(String),
    Labels(BTreeSet<String>),
}

impl Threshold {
    /// Reads a bare literal: `true`/`false`, a number, or a label.
    pub fn parse_literal(text: &str) -> Threshold {
        match text {
            "true" => Threshold::Flag(true),
            "false" => Threshold::Flag(false),
            _ => match text.parse::<f64>() {
                Ok(n) if n.is_finite() => Threshold::Number(n),
                _ => Threshold::Label(text.to_owned()),
            },
        }
    }

    /// Label set view for categorical comparisons.
    pub fn labels(&self) -> Option<BTreeSet<String>> {
        match self {
            Threshold::Label(l) => Some(BTreeSet::from([l.clone()])),
            Threshold::Labels(s) => Some(s.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Flag(b) => write!(f, "{b}"),
            Threshold::Number(n) => write!(f, "{n}"),
            Threshold::Label(l) => f.write_str(l),
            Threshold::Labels(s) => {
                let labels: Vec<&str> = s.iter().map(String::as_str).collect();
                write!(f, "{{{}}}", labels.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictRequirement {
    pub criterion: String,
    pub operator: Operator,
    pub threshold: Threshold,
}

impl StrictRequirement {
    pub fn new(criterion: impl Into<String>, operator: Operator, threshold: Threshold) -> Self {
        StrictRequirement {
            criterion: criterion.into(),
            operator,
            threshold,
        }
    }
}

impl fmt::Display for StrictRequirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.criterion, self.operator, self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preference {
    pub criterion: String,
    /// Likert weight: 0 = indifferent, 1 = extremely desirable.
    pub weight: f64,
}

impl Preference {
    pub fn new(criterion: impl Into<String>, weight: f64) -> Self {
        Preference {
            criterion: criterion.into(),
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetProfile {
    #[serde(default)]
    pub skills: BTreeSet<String>,
    #[serde(default)]
    pub infra: BTreeSet<String>,
    /// Weight of the derived asset-affinity criterion.
    pub affinity: f64,
}

impl AssetProfile {
    pub fn tags(&self) -> BTreeSet<&str> {
        self.skills
            .iter()
            .chain(&self.infra)
            .map(String::as_str)
            .collect()
    }
}

/// How an interval collapses to a single number for ranking.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarizationStrategy {
    #[default]
    Midpoint,
    Pessimistic,
    Optimistic,
}

impl fmt::Display for ScalarizationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Midpoint => "midpoint",
            Self::Pessimistic => "pessimistic",
            Self::Optimistic => "optimistic",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    #[serde(default)]
    pub scalarization: ScalarizationStrategy,
    #[serde(default)]
    pub impute_missing_as_worst: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "RequirementsDocument", try_from = "RequirementsDocument")]
pub struct RequirementSet {
    pub strict: Vec<StrictRequirement>,
    pub preferences: Vec<Preference>,
    pub assets: Option<AssetProfile>,
    pub options: RunOptions,
}

/// Requirements embedded in some other artifact (a BPMN annotation set).
/// Unlike a [`RequirementSet`] it may carry no preferences at all.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RequirementFragment {
    pub strict: Vec<StrictRequirement>,
    pub preferences: Vec<Preference>,
}

impl RequirementSet {
    pub fn preference(&self, criterion: &str) -> Option<&Preference> {
        self.preferences.iter().find(|p| p.criterion == criterion)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&RequirementsDocument::from(self.clone()))
            .expect("requirements serialize to TOML")
    }

    /// Folds in `fragment` with lower precedence: a preference on a
    /// criterion already preferred here, or a strict requirement with the same
    /// criterion and operator, is dropped. Returns one warning per dropped
    /// entry that disagreed with what is kept.
    pub fn merge_lower_precedence(&mut self, fragment: &RequirementFragment) -> Vec<String> {
        let mut warnings = Vec::new();
        for s in &fragment.strict {
            match self
                .strict
                .iter()
                .find(|own| own.criterion == s.criterion && own.operator == s.operator)
            {
                Some(own) if own.threshold != s.threshold => warnings.push(format!(
                    "embedded requirement `{s}` overridden by `{own}`"
                )),
                Some(_) => {}
                None => self.strict.push(s.clone()),
            }
        }
        for p in &fragment.preferences {
            match self.preference(&p.criterion) {
                Some(own) if own.weight != p.weight => warnings.push(format!(
                    "embedded preference `{} {}` overridden by weight {}",
                    p.criterion, p.weight, own.weight
                )),
                Some(_) => {}
                None => self.preferences.push(p.clone()),
            }
        }
        warnings
    }

    fn check(self) -> Result<Self, RequirementsError> {
        let mut seen = HashSet::new();
        for p in &self.preferences {
            if !(0.0..=1.0).contains(&p.weight) {
                return Err(RequirementsError::LikertOutOfRange {
                    criterion: p.criterion.clone(),
                    weight: p.weight,
                });
            }
            if !seen.insert(p.criterion.as_str()) {
                return Err(RequirementsError::DuplicatePreference(p.criterion.clone()));
            }
        }
        if let Some(a) = &self.assets {
            if !(0.0..=1.0).contains(&a.affinity) {
                return Err(RequirementsError::AffinityOutOfRange(a.affinity));
            }
        }
        Ok(self)
    }
}

fn normalize_tags(tags: BTreeSet<String>) -> Result<BTreeSet<String>, RequirementsError> {
    tags.into_iter()
        .map(|t| {
            let t = t.trim().to_lowercase();
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                Err(RequirementsError::InvalidTag(t))
            } else {
                Ok(t)
            }
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequirementsDocument {
    #[serde(default)]
    strict: StrictTable,
    #[serde(default)]
    preferences: PreferenceTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    assets: Option<AssetProfile>,
    #[serde(default)]
    options: RunOptions,
}

impl From<RequirementSet> for RequirementsDocument {
    fn from(r: RequirementSet) -> Self {
        RequirementsDocument {
            strict: StrictTable(r.strict),
            preferences: PreferenceTable(r.preferences),
            assets: r.assets,
            options: r.options,
        }
    }
}

impl TryFrom<RequirementsDocument> for RequirementSet {
    type Error = RequirementsError;

    fn try_from(doc: RequirementsDocument) -> Result<Self, RequirementsError> {
        let assets = doc
            .assets
            .map(|a| -> Result<_, RequirementsError> {
                Ok(AssetProfile {
                    skills: normalize_tags(a.skills)?,
                    infra: normalize_tags(a.infra)?,
                    affinity: a.affinity,
                })
            })
            .transpose()?;
        RequirementSet {
            strict: doc.strict.0,
            preferences: doc.preferences.0,
            assets,
            options: doc.options,
        }
        .check()
    }
}

/// `criterion -> { operator -> threshold }`, in document order.
#[derive(Default)]
struct StrictTable(Vec<StrictRequirement>);

impl Serialize for StrictTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut order: Vec<&str> = Vec::new();
        for s in &self.0 {
            if !order.contains(&s.criterion.as_str()) {
                order.push(&s.criterion);
            }
        }
        let mut map = serializer.serialize_map(Some(order.len()))?;
        for criterion in order {
            let ops: Vec<(&str, &Threshold)> = self
                .0
                .iter()
                .filter(|s| s.criterion == criterion)
                .map(|s| (s.operator.label(), &s.threshold))
                .collect();
            map.serialize_entry(criterion, &OpTable(ops))?;
        }
        map.end()
    }
}

struct OpTable<'a>(Vec<(&'a str, &'a Threshold)>);

impl Serialize for OpTable<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (op, t) in &self.0 {
            map.serialize_entry(op, t)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for StrictTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct StrictVisitor;

        impl<'de> Visitor<'de> for StrictVisitor {
            type Value = StrictTable;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a table of criterion -> { operator = threshold }")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<StrictTable, A::Error> {
                let mut out = Vec::new();
                while let Some((criterion, ops)) = map.next_entry::<String, OrderedPairs<Operator, Threshold>>()? {
                    for (operator, threshold) in ops.0 {
                        out.push(StrictRequirement {
                            criterion: criterion.clone(),
                            operator,
                            threshold,
                        });
                    }
                }
                Ok(StrictTable(out))
            }
        }

        deserializer.deserialize_map(StrictVisitor)
    }
}

/// `criterion -> weight`, keeping duplicates so they can be reported.
#[derive(Default)]
struct PreferenceTable(Vec<Preference>);

impl Serialize for PreferenceTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for p in &self.0 {
            map.serialize_entry(&p.criterion, &p.weight)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for PreferenceTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs = OrderedPairs::<String, f64>::deserialize(deserializer)?;
        Ok(PreferenceTable(
            pairs.0.into_iter().map(|(c, w)| Preference::new(c, w)).collect(),
        ))
    }
}

/// A map read as an ordered list of entries, duplicates included.
struct OrderedPairs<K, V>(Vec<(K, V)>);

impl<'de, K: Deserialize<'de>, V: Deserialize<'de>> Deserialize<'de> for OrderedPairs<K, V> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairsVisitor<K, V>(std::marker::PhantomData<(K, V)>);

        impl<'de, K: Deserialize<'de>, V: Deserialize<'de>> Visitor<'de> for PairsVisitor<K, V> {
            type Value = OrderedPairs<K, V>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a table")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry()? {
                    out.push(entry);
                }
                Ok(OrderedPairs(out))
            }
        }

        deserializer.deserialize_map(PairsVisitor(std::marker::PhantomData))
    }
}

/// Parses a requirements document. JSON is detected by a leading `{`;
/// anything else is read as TOML.
pub fn parse_requirements(document: &str) -> Result<RequirementSet, RequirementsError> {
    if document.trim_start().starts_with('{') {
        let doc: RequirementsDocument = serde_json::from_str(document)
            .map_err(|e| RequirementsError::Malformed(e.to_string()))?;
        RequirementSet::try_from(doc)
    } else {
        let doc: RequirementsDocument = toml::from_str(document).map_err(|e| toml_error(document, e))?;
        RequirementSet::try_from(doc)
    }
}

/// TOML itself rejects repeated keys; a repeat inside `[preferences]` is
/// reported as a duplicate preference.
fn toml_error(document: &str, e: toml::de::Error) -> RequirementsError {
    if e.message().starts_with("duplicate key") {
        if let Some(span) = e.span() {
            let key = document[span.clone()].trim().trim_matches('"');
            let section = document[..span.start]
                .lines()
                .rev()
                .map(str::trim)
                .find(|l| l.starts_with('['));
            if section == Some("[preferences]") {
                return RequirementsError::DuplicatePreference(key.to_owned());
            }
        }
    }
    RequirementsError::Malformed(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    pub message: String,
}

impl Finding {
    fn error(criterion: Option<&str>, message: String) -> Self {
        Finding {
            severity: Severity::Error,
            criterion: criterion.map(str::to_owned),
            message,
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}", self.message)
    }
}

/// Cross-checks requirements against a knowledge base. An empty result means
/// the set can be evaluated.
pub fn validate_against(reqs: &RequirementSet, kb: &KnowledgeBase) -> Vec<Finding> {
    let mut findings = Vec::new();

    for s in &reqs.strict {
        let Some(c) = kb.criterion(&s.criterion) else {
            findings.push(Finding::error(
                Some(&s.criterion),
                format!("strict requirement references unknown criterion `{}`", s.criterion),
            ));
            continue;
        };
        if !s.operator.accepts(c.kind) {
            findings.push(Finding::error(
                Some(&c.id),
                format!("operator `{}` cannot be applied to {} criterion `{}`", s.operator, c.kind, c.id),
            ));
            continue;
        }
        let threshold_ok = match (c.kind, &s.threshold) {
            (CriterionKind::Boolean, Threshold::Flag(_)) => true,
            (CriterionKind::NumericInterval, Threshold::Number(n)) => n.is_finite(),
            (CriterionKind::Ordinal, Threshold::Label(l)) => c.level_index(l).is_some(),
            (CriterionKind::Categorical, t) => match (s.operator, t.labels()) {
                (Operator::Equals, Some(set)) => set.len() == 1,
                (Operator::IncludesAll, Some(set)) => !set.is_empty(),
                _ => false,
            },
            _ => false,
        };
        if !threshold_ok {
            findings.push(Finding::error(
                Some(&c.id),
                format!("threshold `{}` is not a valid {} literal for `{}` `{}`", s.threshold, c.kind, c.id, s.operator),
            ));
        }
    }

    for p in &reqs.preferences {
        match kb.criterion(&p.criterion) {
            None => findings.push(Finding::error(
                Some(&p.criterion),
                format!("preference references unknown criterion `{}`", p.criterion),
            )),
            Some(c) if c.kind == CriterionKind::Categorical && p.weight > 0.0 => {
                findings.push(Finding::error(
                    Some(&c.id),
                    format!("categorical criterion `{}` can only be used in strict requirements", c.id),
                ))
            }
            Some(_) => {}
        }
    }

    if !reqs.preferences.iter().any(|p| p.weight > 0.0) {
        findings.push(Finding::error(None, "no effective preferences".to_owned()));
    }

    findings
}

/// Jaccard similarity of two tag sets; 0 when both are empty.
pub fn jaccard<'a>(a: &BTreeSet<&'a str>, b: &BTreeSet<&'a str>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Overlap between an enterprise's skills/infrastructure and a platform's
/// technology tags, in [0, 1].
pub fn asset_affinity(assets: &AssetProfile, profile: &BlockchainProfile) -> f64 {
    let tech: BTreeSet<&str> = profile.tech_tags.iter().map(String::as_str).collect();
    jaccard(&assets.tags(), &tech)
}
