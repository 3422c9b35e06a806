use serde::Serialize;

use super::McdmError;
use crate::kb::Direction;
use crate::scalar::Scalar;

/// Alternatives × criteria matrix of scalarized values, ready for TOPSIS.
///
/// Invariants: at least one row and one column, finite cells, strictly
/// positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionMatrix<T> {
    alternatives: Vec<String>,
    criteria: Vec<String>,
    values: Vec<Vec<T>>,
    directions: Vec<Direction>,
    weights: Vec<T>,
}

impl<T: Scalar> DecisionMatrix<T> {
    pub fn new(
        alternatives: Vec<String>,
        criteria: Vec<String>,
        values: Vec<Vec<T>>,
        directions: Vec<Direction>,
        weights: Vec<T>,
    ) -> Result<Self, McdmError> {
        let (m, n) = (alternatives.len(), criteria.len());
        if m == 0 || n == 0 {
            return Err(McdmError::EmptyMatrix);
        }
        if values.len() != m
            || values.iter().any(|row| row.len() != n)
            || directions.len() != n
            || weights.len() != n
        {
            return Err(McdmError::ShapeMismatch);
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(McdmError::NonFinite);
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= T::zero()) {
            return Err(McdmError::NonPositiveWeight);
        }
        let sum = weights.iter().fold(T::zero(), |acc, w| acc + *w);
        if (sum - T::one()).abs() > T::unit_sum_tolerance() {
            return Err(McdmError::WeightsNotNormalized(sum.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(DecisionMatrix {
            alternatives,
            criteria,
            values,
            directions,
            weights,
        })
    }

    /// Builds a matrix from raw Likert weights: zero-weight columns are
    /// dropped and the rest rescaled to sum to one.
    pub fn from_likert(
        alternatives: Vec<String>,
        criteria: Vec<String>,
        values: Vec<Vec<T>>,
        directions: Vec<Direction>,
        likert: &[T],
    ) -> Result<Self, McdmError> {
        if likert.len() != criteria.len() || directions.len() != criteria.len() {
            return Err(McdmError::ShapeMismatch);
        }
        if likert.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(McdmError::NonPositiveWeight);
        }
        let keep: Vec<usize> = (0..likert.len()).filter(|&j| likert[j] > T::zero()).collect();
        if keep.is_empty() {
            return Err(McdmError::NoEffectivePreferences);
        }
        let weights = normalize(&keep.iter().map(|&j| likert[j]).collect::<Vec<_>>());
        let values = values
            .into_iter()
            .map(|row| keep.iter().map(|&j| row.get(j).copied().unwrap_or_else(T::nan)).collect())
            .collect();
        DecisionMatrix::new(
            alternatives,
            keep.iter().map(|&j| criteria[j].clone()).collect(),
            values,
            keep.iter().map(|&j| directions[j]).collect(),
            weights,
        )
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn rows(&self) -> usize {
        self.alternatives.len()
    }

    pub fn cols(&self) -> usize {
        self.criteria.len()
    }
}

/// Rescales non-negative weights to sum to one.
pub fn normalize<T: Scalar>(weights: &[T]) -> Vec<T> {
    let sum = weights.iter().fold(T::zero(), |acc, w| acc + *w);
    weights.iter().map(|w| *w / sum).collect()
}

/// Intermediate TOPSIS quantities, kept for explanations.
#[derive(Debug, Clone, PartialEq)]
pub struct TopsisOutcome<T> {
    /// Weighted normalized matrix `v_ij`.
    pub weighted: Vec<Vec<T>>,
    pub ideal: Vec<T>,
    pub anti_ideal: Vec<T>,
    /// Distance to the ideal, per alternative.
    pub to_ideal: Vec<T>,
    /// Distance to the anti-ideal, per alternative.
    pub to_anti_ideal: Vec<T>,
    /// Relative closeness in [0, 1], input order.
    pub closeness: Vec<T>,
}

/// Closeness coefficients in input order.
pub fn topsis<T: Scalar>(matrix: &DecisionMatrix<T>) -> Vec<T> {
    topsis_detailed(matrix).closeness
}

pub fn topsis_detailed<T: Scalar>(matrix: &DecisionMatrix<T>) -> TopsisOutcome<T> {
    let n = matrix.cols();

    let norms: Vec<T> = (0..n)
        .map(|j| {
            matrix
                .values
                .iter()
                .map(|row| row[j] * row[j])
                .fold(T::zero(), |acc, x| acc + x)
                .sqrt()
        })
        .collect();
    // An all-zero column carries no information; leave it at zero.
    let weighted: Vec<Vec<T>> = matrix
        .values
        .iter()
        .map(|row| {
            row.iter()
                .zip(&norms)
                .zip(&matrix.weights)
                .map(|((&x, &norm), &w)| if norm > T::zero() { w * (x / norm) } else { T::zero() })
                .collect()
        })
        .collect();

    let mut ideal = Vec::with_capacity(n);
    let mut anti_ideal = Vec::with_capacity(n);
    for j in 0..n {
        let column = weighted.iter().map(|row| row[j]);
        let max = column.clone().fold(T::neg_infinity(), T::max);
        let min = column.fold(T::infinity(), T::min);
        match matrix.directions[j] {
            Direction::Benefit => {
                ideal.push(max);
                anti_ideal.push(min);
            }
            Direction::Cost => {
                ideal.push(min);
                anti_ideal.push(max);
            }
        }
    }

    let distance = |row: &[T], target: &[T]| {
        row.iter()
            .zip(target)
            .map(|(v, t)| (*v - *t) * (*v - *t))
            .fold(T::zero(), |acc, x| acc + x)
            .sqrt()
    };
    let to_ideal: Vec<T> = weighted.iter().map(|row| distance(row, &ideal)).collect();
    let to_anti_ideal: Vec<T> = weighted.iter().map(|row| distance(row, &anti_ideal)).collect();

    let closeness = to_ideal
        .iter()
        .zip(&to_anti_ideal)
        .map(|(&plus, &minus)| {
            // S- / (S+ + S-), in a form that stays monotone under rounding
            if plus + minus == T::zero() {
                T::one()
            } else {
                T::one() / (T::one() + plus / minus)
            }
        })
        .collect();

    TopsisOutcome {
        weighted,
        ideal,
        anti_ideal,
        to_ideal,
        to_anti_ideal,
        closeness,
    }
}
