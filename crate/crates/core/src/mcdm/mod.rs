//! Filter-then-rank decision core.
//!
//! [`evaluate`] removes every profile that violates a strict requirement and
//! scores the survivors with TOPSIS. Interval attributes are collapsed to
//! numbers by [`scalarize`] according to the run's strategy.

mod filter;
mod topsis;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::filter::{check_requirement, filter_alternatives, Elimination, FilterOutcome, Violation};
pub use self::topsis::{normalize, topsis, topsis_detailed, DecisionMatrix, TopsisOutcome};

use crate::kb::{AttributeValue, BlockchainProfile, CriterionDef, CriterionKind, Direction, KnowledgeBase, ASSET_AFFINITY_ID};
use crate::requirements::{
    asset_affinity, validate_against, AssetProfile, Finding, Preference, RequirementSet, RunOptions,
    ScalarizationStrategy,
};

#[derive(Debug, Error)]
pub enum McdmError {
    #[error("decision matrix needs at least one alternative and one criterion")]
    EmptyMatrix,
    #[error("decision matrix dimensions do not agree")]
    ShapeMismatch,
    #[error("decision matrix contains non-finite values")]
    NonFinite,
    #[error("criterion weights must be finite and positive")]
    NonPositiveWeight,
    #[error("criterion weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),
    #[error("no effective preferences")]
    NoEffectivePreferences,
    #[error("categorical criterion `{0}` cannot be scalarized")]
    Categorical(String),
    #[error("attribute kind {found} does not match criterion `{criterion}` ({expected})")]
    KindMismatch {
        criterion: String,
        expected: CriterionKind,
        found: CriterionKind,
    },
    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),
    #[error("level `{level}` is not defined for `{criterion}`")]
    UnknownLevel { criterion: String, level: String },
    #[error("profile `{profile}` has no value for preferred criterion `{criterion}`")]
    MissingAttribute { profile: String, criterion: String },
}

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("requirements failed validation ({} finding(s))", .0.len())]
    Validation(Vec<Finding>),
    #[error(transparent)]
    Mcdm(#[from] McdmError),
    #[error("criterion `{0}` has no preference to vary")]
    NotAPreference(String),
    #[error("sensitivity grid is empty")]
    EmptyGrid,
    #[error("sensitivity grid weight {0} is not in [0, 1]")]
    GridOutOfRange(f64),
}

/// Collapses an attribute value to a number for ranking.
///
/// Booleans map to 1 on the favoured pole and 0 otherwise; ordinal levels to
/// `index / (levels - 1)` (1 for a single level); intervals by `strategy`.
pub fn scalarize(
    value: &AttributeValue,
    criterion: &CriterionDef,
    strategy: ScalarizationStrategy,
) -> Result<f64, McdmError> {
    if value.kind() != criterion.kind {
        return Err(McdmError::KindMismatch {
            criterion: criterion.id.clone(),
            expected: criterion.kind,
            found: value.kind(),
        });
    }
    let benefit = criterion.direction == Direction::Benefit;
    Ok(match value {
        AttributeValue::Flag(flag) => {
            if *flag == benefit {
                1.0
            } else {
                0.0
            }
        }
        AttributeValue::Interval(i) => match (strategy, benefit) {
            (ScalarizationStrategy::Midpoint, _) => i.midpoint(),
            (ScalarizationStrategy::Pessimistic, true) | (ScalarizationStrategy::Optimistic, false) => i.lo,
            (ScalarizationStrategy::Pessimistic, false) | (ScalarizationStrategy::Optimistic, true) => i.hi,
        },
        AttributeValue::Level(level) => {
            let index = criterion.level_index(level).ok_or_else(|| McdmError::UnknownLevel {
                criterion: criterion.id.clone(),
                level: level.clone(),
            })?;
            let count = criterion.ordinal_levels.as_ref().map_or(1, Vec::len);
            if count <= 1 {
                1.0
            } else {
                index as f64 / (count - 1) as f64
            }
        }
        AttributeValue::Set(_) => return Err(McdmError::Categorical(criterion.id.clone())),
    })
}

/// A criterion id with its normalized weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionWeight {
    pub criterion: String,
    pub weight: f64,
}

/// Columns that will enter the matrix, with sum-to-one weights: every
/// positive preference in order, then `asset-affinity` when assets carry a
/// positive weight.
pub fn effective_weights(preferences: &[Preference], assets: Option<&AssetProfile>) -> Vec<CriterionWeight> {
    let mut columns: Vec<(String, f64)> = preferences
        .iter()
        .filter(|p| p.weight > 0.0)
        .map(|p| (p.criterion.clone(), p.weight))
        .collect();
    if let Some(a) = assets.filter(|a| a.affinity > 0.0) {
        columns.push((ASSET_AFFINITY_ID.to_owned(), a.affinity));
    }
    let raw: Vec<f64> = columns.iter().map(|(_, w)| *w).collect();
    columns
        .into_iter()
        .zip(normalize(&raw))
        .map(|((criterion, _), weight)| CriterionWeight { criterion, weight })
        .collect()
}

#[derive(Debug, Clone)]
pub struct MatrixBuild {
    pub matrix: DecisionMatrix<f64>,
    pub warnings: Vec<String>,
}

/// Assembles the decision matrix for the surviving profiles.
///
/// A survivor without a value for a preferred criterion is an error unless
/// `options.impute_missing_as_worst` is set, in which case the cell takes the
/// worst value observed in that column and a warning is recorded.
pub fn build_matrix(
    survivors: &[&BlockchainProfile],
    preferences: &[Preference],
    assets: Option<&AssetProfile>,
    kb: &KnowledgeBase,
    options: RunOptions,
) -> Result<MatrixBuild, McdmError> {
    let columns = effective_weights(preferences, assets);
    if columns.iter().all(|c| c.criterion == ASSET_AFFINITY_ID) {
        return Err(McdmError::NoEffectivePreferences);
    }
    if survivors.is_empty() {
        return Err(McdmError::EmptyMatrix);
    }

    let mut warnings = Vec::new();
    let mut directions = Vec::with_capacity(columns.len());
    let mut cells: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(columns.len()); survivors.len()];

    for column in &columns {
        if column.criterion == ASSET_AFFINITY_ID {
            let assets = assets.expect("asset column implies assets");
            directions.push(Direction::Benefit);
            for (row, profile) in cells.iter_mut().zip(survivors) {
                row.push(Some(asset_affinity(assets, profile)));
            }
            continue;
        }
        let criterion = kb
            .criterion(&column.criterion)
            .ok_or_else(|| McdmError::UnknownCriterion(column.criterion.clone()))?;
        directions.push(criterion.direction);
        for (row, profile) in cells.iter_mut().zip(survivors) {
            let cell = profile
                .attribute(&criterion.id)
                .map(|v| scalarize(v, criterion, options.scalarization))
                .transpose()?;
            row.push(cell);
        }
    }

    for (j, column) in columns.iter().enumerate() {
        let present = cells.iter().filter_map(|row| row[j]);
        let worst = match directions[j] {
            Direction::Benefit => present.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v)))),
            Direction::Cost => present.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v)))),
        };
        for (row, profile) in cells.iter_mut().zip(survivors) {
            if row[j].is_some() {
                continue;
            }
            match worst.filter(|_| options.impute_missing_as_worst) {
                Some(w) => {
                    row[j] = Some(w);
                    warnings.push(format!(
                        "profile `{}` has no value for `{}`; imputed worst observed value {w}",
                        profile.id, column.criterion
                    ));
                }
                None => {
                    return Err(McdmError::MissingAttribute {
                        profile: profile.id.clone(),
                        criterion: column.criterion.clone(),
                    })
                }
            }
        }
    }

    let values = cells
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.expect("all cells filled")).collect())
        .collect();
    let matrix = DecisionMatrix::new(
        survivors.iter().map(|p| p.id.clone()).collect(),
        columns.iter().map(|c| c.criterion.clone()).collect(),
        values,
        directions,
        columns.iter().map(|c| c.weight).collect(),
    )?;
    Ok(MatrixBuild { matrix, warnings })
}

/// Weighted normalized value of one criterion for one alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub criterion: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAlternative {
    pub id: String,
    pub score: f64,
    pub contributions: Vec<Contribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kb_version: u64,
    pub scalarization: ScalarizationStrategy,
    pub weights: Vec<CriterionWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub eliminations: Vec<Elimination>,
    /// Sorted by score descending, ties by id ascending.
    pub ranked: Vec<RankedAlternative>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RankingResult {
    pub fn winner(&self) -> Option<&RankedAlternative> {
        self.ranked.first()
    }
}

/// Filters, scores and ranks every profile in `kb` against `reqs`.
///
/// No survivors is not an error: the result then has an empty ranking and
/// eliminations covering every profile.
pub fn evaluate(kb: &KnowledgeBase, reqs: &RequirementSet) -> Result<RankingResult, EvaluateError> {
    let findings = validate_against(reqs, kb);
    if !findings.is_empty() {
        return Err(EvaluateError::Validation(findings));
    }

    let outcome = filter_alternatives(kb, &reqs.strict);
    let provenance = Provenance {
        kb_version: kb.kb_version(),
        scalarization: reqs.options.scalarization,
        weights: effective_weights(&reqs.preferences, reqs.assets.as_ref()),
    };
    if outcome.survivors.is_empty() {
        return Ok(RankingResult {
            eliminations: outcome.eliminations,
            ranked: Vec::new(),
            provenance,
            warnings: Vec::new(),
        });
    }

    let build = build_matrix(&outcome.survivors, &reqs.preferences, reqs.assets.as_ref(), kb, reqs.options)?;
    let scores = topsis_detailed(&build.matrix);
    let criteria = build.matrix.criteria();

    let mut ranked: Vec<RankedAlternative> = build
        .matrix
        .alternatives()
        .iter()
        .enumerate()
        .map(|(i, id)| RankedAlternative {
            id: id.clone(),
            score: scores.closeness[i],
            contributions: criteria
                .iter()
                .zip(&scores.weighted[i])
                .map(|(c, v)| Contribution {
                    criterion: c.clone(),
                    value: *v,
                })
                .collect(),
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));

    Ok(RankingResult {
        eliminations: outcome.eliminations,
        ranked,
        provenance,
        warnings: build.warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub weight: f64,
    /// Ranking at this weight, truncated to the top three.
    pub result: RankingResult,
}

/// Re-evaluates with the preference on `criterion` set to each grid weight.
pub fn sensitivity(
    kb: &KnowledgeBase,
    reqs: &RequirementSet,
    criterion: &str,
    grid: &[f64],
) -> Result<Vec<SensitivityPoint>, EvaluateError> {
    let slot = reqs
        .preferences
        .iter()
        .position(|p| p.criterion == criterion)
        .ok_or_else(|| EvaluateError::NotAPreference(criterion.to_owned()))?;
    if grid.is_empty() {
        return Err(EvaluateError::EmptyGrid);
    }
    if let Some(&w) = grid.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(EvaluateError::GridOutOfRange(w));
    }
    grid.iter()
        .map(|&weight| {
            let mut varied = reqs.clone();
            varied.preferences[slot].weight = weight;
            let mut result = evaluate(kb, &varied)?;
            result.ranked.truncate(3);
            Ok(SensitivityPoint { weight, result })
        })
        .collect()
}
