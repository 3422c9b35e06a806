//! Knowledge base of decision criteria and blockchain platform profiles.
//!
//! A [`KnowledgeBase`] is only ever constructed through validation, so every
//! value held by one satisfies the cross-reference and kind invariants. The
//! on-disk format is JSON; see `docs/kb.schema.json`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Criterion id reserved for the derived asset-affinity column.
pub const ASSET_AFFINITY_ID: &str = "asset-affinity";

const FIXTURE_JSON: &str = include_str!("../fixtures/kb.json");

#[derive(Debug, Error)]
pub enum KbError {
    #[error("malformed knowledge base document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unknown ISO 25010 category `{0}`")]
    UnknownCategory(String),
    #[error("duplicate criterion id `{0}`")]
    DuplicateCriterion(String),
    #[error("duplicate profile id `{0}`")]
    DuplicateProfile(String),
    #[error("criterion id `{0}` is reserved")]
    ReservedCriterion(String),
    #[error("criterion `{0}`: numeric-interval criteria require a unit")]
    MissingUnit(String),
    #[error("criterion `{0}`: ordinal levels must be present, non-empty and duplicate-free")]
    BadOrdinalLevels(String),
    #[error("criterion `{0}`: ordinal levels are only allowed on ordinal criteria")]
    UnexpectedOrdinalLevels(String),
    #[error("profile `{profile}`: attribute references unknown criterion `{criterion}`")]
    UnknownCriterion { profile: String, criterion: String },
    #[error("profile `{profile}`: attribute `{criterion}` is {found}, criterion expects {expected}")]
    KindMismatch {
        profile: String,
        criterion: String,
        expected: CriterionKind,
        found: CriterionKind,
    },
    #[error("profile `{profile}`: attribute `{criterion}` interval lo > hi ({lo} > {hi})")]
    IntervalInverted {
        profile: String,
        criterion: String,
        lo: f64,
        hi: f64,
    },
    #[error("profile `{profile}`: attribute `{criterion}` interval bounds must be finite")]
    NonFiniteInterval { profile: String, criterion: String },
    #[error("profile `{profile}`: `{level}` is not a level of ordinal criterion `{criterion}`")]
    UnknownLevel {
        profile: String,
        criterion: String,
        level: String,
    },
    #[error("criterion kind change for `{id}`: {from} -> {to}")]
    CriterionKindChange {
        id: String,
        from: CriterionKind,
        to: CriterionKind,
    },
    #[error("schema version mismatch: base {base}, delta {delta}")]
    SchemaVersionMismatch { base: u32, delta: u32 },
    #[error("unsupported schema version {0} (this build reads {SCHEMA_VERSION})")]
    UnsupportedSchema(u32),
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
}

/// The eight ISO 25010 product quality characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", try_from = "String")]
pub enum Iso25010Category {
    FunctionalSuitability,
    PerformanceEfficiency,
    Compatibility,
    Usability,
    Reliability,
    Security,
    Maintainability,
    Portability,
}

impl Iso25010Category {
    pub const ALL: [Iso25010Category; 8] = [
        Self::FunctionalSuitability,
        Self::PerformanceEfficiency,
        Self::Compatibility,
        Self::Usability,
        Self::Reliability,
        Self::Security,
        Self::Maintainability,
        Self::Portability,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::FunctionalSuitability => "functional-suitability",
            Self::PerformanceEfficiency => "performance-efficiency",
            Self::Compatibility => "compatibility",
            Self::Usability => "usability",
            Self::Reliability => "reliability",
            Self::Security => "security",
            Self::Maintainability => "maintainability",
            Self::Portability => "portability",
        }
    }
}

impl TryFrom<String> for Iso25010Category {
    type Error = KbError;

    fn try_from(label: String) -> Result<Self, Self::Error> {
        Self::ALL
            .into_iter()
            .find(|c| c.label() == label)
            .ok_or(KbError::UnknownCategory(label))
    }
}

impl fmt::Display for Iso25010Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Whether larger (benefit) or smaller (cost) values are preferable.
///
/// Boolean criteria carry a direction too: for a benefit criterion `true` is
/// the favoured pole, for a cost criterion `false` is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Benefit,
    Cost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    Boolean,
    NumericInterval,
    Ordinal,
    Categorical,
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Boolean => "boolean",
            Self::NumericInterval => "numeric-interval",
            Self::Ordinal => "ordinal",
            Self::Categorical => "categorical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionDef {
    pub id: String,
    pub name: String,
    pub category: Iso25010Category,
    pub direction: Direction,
    pub kind: CriterionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal_levels: Option<Vec<String>>,
    #[serde(default)]
    pub description: String,
}

impl CriterionDef {
    /// Position of `level` among the ordinal levels.
    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.ordinal_levels
            .as_ref()?
            .iter()
            .position(|l| l == level)
    }

    fn validate(&self) -> Result<(), KbError> {
        if self.id == ASSET_AFFINITY_ID {
            return Err(KbError::ReservedCriterion(self.id.clone()));
        }
        match self.kind {
            CriterionKind::NumericInterval
                if self.unit.as_deref().is_none_or(|u| u.trim().is_empty()) =>
            {
                return Err(KbError::MissingUnit(self.id.clone()));
            }
            CriterionKind::Ordinal => {
                let levels = self
                    .ordinal_levels
                    .as_ref()
                    .ok_or_else(|| KbError::BadOrdinalLevels(self.id.clone()))?;
                let distinct: HashSet<&String> = levels.iter().collect();
                if levels.is_empty() || distinct.len() != levels.len() {
                    return Err(KbError::BadOrdinalLevels(self.id.clone()));
                }
            }
            _ => {}
        }
        if self.kind != CriterionKind::Ordinal && self.ordinal_levels.is_some() {
            return Err(KbError::UnexpectedOrdinalLevels(self.id.clone()));
        }
        Ok(())
    }
}

/// Closed interval in a criterion's unit. `lo == hi` is a point value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn midpoint(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A profile's value for one criterion.
///
/// In JSON: a boolean, an `{"lo", "hi"}` object, a level label string, or an
/// array of labels for a categorical set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeValue {
    Flag(bool),
    Interval(Interval),
    Level(String),
    Set(BTreeSet<String>),
}

impl AttributeValue {
    pub fn kind(&self) -> CriterionKind {
        match self {
            Self::Flag(_) => CriterionKind::Boolean,
            Self::Interval(_) => CriterionKind::NumericInterval,
            Self::Level(_) => CriterionKind::Ordinal,
            Self::Set(_) => CriterionKind::Categorical,
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Flag(b) => write!(f, "{b}"),
            Self::Interval(i) => write!(f, "{i}"),
            Self::Level(l) => f.write_str(l),
            Self::Set(s) => {
                let labels: Vec<&str> = s.iter().map(String::as_str).collect();
                write!(f, "{{{}}}", labels.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub citation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieved: Option<String>,
}

impl Source {
    pub fn note(citation: impl Into<String>) -> Self {
        Source {
            citation: citation.into(),
            retrieved: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockchainProfile {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub attributes: BTreeMap<String, AttributeValue>,
    #[serde(default)]
    pub tech_tags: BTreeSet<String>,
    #[serde(default)]
    pub sources: Vec<Source>,
}

impl BlockchainProfile {
    pub fn attribute(&self, criterion: &str) -> Option<&AttributeValue> {
        self.attributes.get(criterion)
    }
}

/// Raw document shape, validated into a [`KnowledgeBase`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct KbDocument {
    schema_version: u32,
    kb_version: u64,
    criteria: Vec<CriterionDoc>,
    profiles: Vec<BlockchainProfile>,
}

/// Same as [`CriterionDef`] but with the category left as text so that an
/// unknown label maps to [`KbError::UnknownCategory`] instead of a parse error.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CriterionDoc {
    id: String,
    name: String,
    category: String,
    direction: Direction,
    kind: CriterionKind,
    #[serde(default)]
    unit: Option<String>,
    #[serde(default)]
    ordinal_levels: Option<Vec<String>>,
    #[serde(default)]
    description: String,
}

impl TryFrom<CriterionDoc> for CriterionDef {
    type Error = KbError;

    fn try_from(doc: CriterionDoc) -> Result<Self, KbError> {
        Ok(CriterionDef {
            category: Iso25010Category::try_from(doc.category)?,
            id: doc.id,
            name: doc.name,
            direction: doc.direction,
            kind: doc.kind,
            unit: doc.unit,
            ordinal_levels: doc.ordinal_levels,
            description: doc.description,
        })
    }
}

impl TryFrom<KbDocument> for KnowledgeBase {
    type Error = KbError;

    fn try_from(doc: KbDocument) -> Result<Self, KbError> {
        let criteria = doc
            .criteria
            .into_iter()
            .map(CriterionDef::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        KnowledgeBase::new(doc.schema_version, doc.kb_version, criteria, doc.profiles)
    }
}

/// Validated, immutable catalogue of criteria and platform profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KbDocument")]
pub struct KnowledgeBase {
    schema_version: u32,
    kb_version: u64,
    criteria: Vec<CriterionDef>,
    profiles: Vec<BlockchainProfile>,
}

impl KnowledgeBase {
    pub fn new(
        schema_version: u32,
        kb_version: u64,
        criteria: Vec<CriterionDef>,
        profiles: Vec<BlockchainProfile>,
    ) -> Result<Self, KbError> {
        let kb = KnowledgeBase {
            schema_version,
            kb_version,
            criteria,
            profiles,
        };
        kb.validate()?;
        Ok(kb)
    }

    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    pub fn kb_version(&self) -> u64 {
        self.kb_version
    }

    pub fn criteria(&self) -> &[CriterionDef] {
        &self.criteria
    }

    pub fn profiles(&self) -> &[BlockchainProfile] {
        &self.profiles
    }

    pub fn criterion(&self, id: &str) -> Option<&CriterionDef> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn profile(&self, id: &str) -> Option<&BlockchainProfile> {
        self.profiles.iter().find(|p| p.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("knowledge base serializes");
        out.push('\n');
        out
    }

    /// Returns a copy with `profile` replacing the same-id entry and the
    /// version bumped by one.
    pub fn with_profile(&self, profile: BlockchainProfile) -> Result<KnowledgeBase, KbError> {
        let mut profiles = self.profiles.clone();
        let slot = profiles
            .iter_mut()
            .find(|p| p.id == profile.id)
            .ok_or_else(|| KbError::UnknownProfile(profile.id.clone()))?;
        *slot = profile;
        KnowledgeBase::new(
            self.schema_version,
            self.kb_version + 1,
            self.criteria.clone(),
            profiles,
        )
    }

    fn validate(&self) -> Result<(), KbError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(KbError::UnsupportedSchema(self.schema_version));
        }
        let mut ids = HashSet::new();
        for c in &self.criteria {
            if !ids.insert(c.id.as_str()) {
                return Err(KbError::DuplicateCriterion(c.id.clone()));
            }
            c.validate()?;
        }
        let mut ids = HashSet::new();
        for p in &self.profiles {
            if !ids.insert(p.id.as_str()) {
                return Err(KbError::DuplicateProfile(p.id.clone()));
            }
            for (key, value) in &p.attributes {
                let criterion = self.criterion(key).ok_or_else(|| KbError::UnknownCriterion {
                    profile: p.id.clone(),
                    criterion: key.clone(),
                })?;
                check_value(&p.id, criterion, value)?;
            }
        }
        Ok(())
    }
}

fn check_value(profile: &str, criterion: &CriterionDef, value: &AttributeValue) -> Result<(), KbError> {
    if value.kind() != criterion.kind {
        return Err(KbError::KindMismatch {
            profile: profile.to_owned(),
            criterion: criterion.id.clone(),
            expected: criterion.kind,
            found: value.kind(),
        });
    }
    match value {
        AttributeValue::Interval(i) => {
            if !i.lo.is_finite() || !i.hi.is_finite() {
                return Err(KbError::NonFiniteInterval {
                    profile: profile.to_owned(),
                    criterion: criterion.id.clone(),
                });
            }
            if i.lo > i.hi {
                return Err(KbError::IntervalInverted {
                    profile: profile.to_owned(),
                    criterion: criterion.id.clone(),
                    lo: i.lo,
                    hi: i.hi,
                });
            }
        }
        AttributeValue::Level(level) if criterion.level_index(level).is_none() => {
            return Err(KbError::UnknownLevel {
                profile: profile.to_owned(),
                criterion: criterion.id.clone(),
                level: level.clone(),
            });
        }
        _ => {}
    }
    Ok(())
}

/// Parses and validates a knowledge base document.
pub fn load_knowledge_base(document: &str) -> Result<KnowledgeBase, KbError> {
    let doc: KbDocument = serde_json::from_str(document)?;
    KnowledgeBase::try_from(doc)
}

/// Folds `delta` into `base`.
///
/// Same-id criteria and profiles are replaced (profile source lists are
/// unioned), new ids are appended, and the result version is
/// `max(base, delta) + 1`. A criterion may never change kind.
pub fn merge_knowledge(base: &KnowledgeBase, delta: &KnowledgeBase) -> Result<KnowledgeBase, KbError> {
    if base.schema_version != delta.schema_version {
        return Err(KbError::SchemaVersionMismatch {
            base: base.schema_version,
            delta: delta.schema_version,
        });
    }

    let mut criteria = base.criteria.clone();
    for c in &delta.criteria {
        match criteria.iter_mut().find(|old| old.id == c.id) {
            Some(old) if old.kind != c.kind => {
                return Err(KbError::CriterionKindChange {
                    id: c.id.clone(),
                    from: old.kind,
                    to: c.kind,
                });
            }
            Some(old) => *old = c.clone(),
            None => criteria.push(c.clone()),
        }
    }

    let mut profiles = base.profiles.clone();
    for p in &delta.profiles {
        match profiles.iter_mut().find(|old| old.id == p.id) {
            Some(old) => {
                let mut sources = old.sources.clone();
                for s in &p.sources {
                    if !sources.contains(s) {
                        sources.push(s.clone());
                    }
                }
                *old = BlockchainProfile {
                    sources,
                    ..p.clone()
                };
            }
            None => profiles.push(p.clone()),
        }
    }

    KnowledgeBase::new(
        base.schema_version,
        base.kb_version.max(delta.kb_version) + 1,
        criteria,
        profiles,
    )
}

/// The shipped example knowledge base: four enterprise platforms plus Bitcoin.
pub fn fixture_knowledge_base() -> KnowledgeBase {
    load_knowledge_base(FIXTURE_JSON).expect("shipped fixture is valid")
}

/// Raw JSON text of the shipped fixture.
pub fn fixture_knowledge_base_json() -> &'static str {
    FIXTURE_JSON
}
