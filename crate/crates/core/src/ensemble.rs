//! The degradation ensemble: candidate display operators with usage
//! probabilities.

use thiserror::Error;

use crate::operators::{BlurOperator, BoundaryMode};

/// Probability mass must match 1 to within this absolute tolerance.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("ensemble must contain at least one operator")]
    Empty,
    #[error("entry {index} has negative probability {probability}")]
    NegativeProbability { index: usize, probability: f64 },
    #[error("probabilities sum to {sum}, expected 1 within {PROBABILITY_SUM_TOLERANCE}")]
    ProbabilitySum { sum: f64 },
    #[error("entry {index} uses {found} boundaries, ensemble uses {expected}")]
    MixedBoundaries {
        index: usize,
        expected: &'static str,
        found: &'static str,
    },
}

/// One candidate reconstruction system: a display operator and the
/// probability a network user has it.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEntry {
    pub operator: BlurOperator,
    pub probability: f64,
}

/// The network model: `K` display operators with probabilities summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationEnsemble {
    entries: Vec<EnsembleEntry>,
}

impl DegradationEnsemble {
    pub fn new(entries: Vec<EnsembleEntry>) -> Result<Self, EnsembleError> {
        if entries.is_empty() {
            return Err(EnsembleError::Empty);
        }
        let boundary = entries[0].operator.boundary();
        for (index, e) in entries.iter().enumerate() {
            if e.probability < 0.0 || !e.probability.is_finite() {
                return Err(EnsembleError::NegativeProbability {
                    index,
                    probability: e.probability,
                });
            }
            if e.operator.boundary() != boundary {
                return Err(EnsembleError::MixedBoundaries {
                    index,
                    expected: boundary.as_str(),
                    found: e.operator.boundary().as_str(),
                });
            }
        }
        let sum: f64 = entries.iter().map(|e| e.probability).sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(EnsembleError::ProbabilitySum { sum });
        }
        Ok(Self { entries })
    }

    /// Convenience constructor from `(operator, probability)` pairs.
    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (BlurOperator, f64)>,
    ) -> Result<Self, EnsembleError> {
        Self::new(
            pairs
                .into_iter()
                .map(|(operator, probability)| EnsembleEntry {
                    operator,
                    probability,
                })
                .collect(),
        )
    }

    /// The degenerate ensemble `{identity, p = 1}`.
    pub fn identity(boundary: BoundaryMode) -> Self {
        Self::from_pairs([(BlurOperator::identity(boundary), 1.0)])
            .expect("identity ensemble is valid")
    }

    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }

    /// Number of reconstruction systems `K`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.entries[0].operator.boundary()
    }

    /// Index of the most probable entry; ties break to the lowest index.
    pub fn most_probable_index(&self) -> usize {
        let mut best = 0;
        for (i, e) in self.entries.iter().enumerate().skip(1) {
            if e.probability > self.entries[best].probability {
                best = i;
            }
        }
        best
    }

    /// The single-operator ensemble `{(H_k, 1.0)}` for the most probable `k`.
    pub fn reduce_to_most_probable(&self) -> Self {
        let op = self.entries[self.most_probable_index()].operator.clone();
        Self::from_pairs([(op, 1.0)]).expect("single-operator reduction is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::gaussian_kernel;

    fn blur(sigma: f64) -> BlurOperator {
        BlurOperator::new(gaussian_kernel(5, sigma).unwrap(), BoundaryMode::Periodic)
    }

    #[test]
    fn accepts_valid_ensemble() {
        let e = DegradationEnsemble::from_pairs([(blur(0.6), 0.6), (blur(0.8), 0.3), (blur(1.0), 0.1)])
            .unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.most_probable_index(), 0);
    }

    #[test]
    fn rejects_probability_sum_off_by_more_than_tolerance() {
        let err = DegradationEnsemble::from_pairs([(blur(0.6), 0.5), (blur(0.8), 0.4)]).unwrap_err();
        assert!(matches!(err, EnsembleError::ProbabilitySum { .. }));
    }

    #[test]
    fn rejects_negative_probability() {
        let err = DegradationEnsemble::from_pairs([(blur(0.6), 1.2), (blur(0.8), -0.2)]).unwrap_err();
        assert!(matches!(err, EnsembleError::NegativeProbability { index: 1, .. }));
    }

    #[test]
    fn rejects_mixed_boundaries() {
        let mixed = BlurOperator::new(gaussian_kernel(5, 0.8).unwrap(), BoundaryMode::Symmetric);
        let err = DegradationEnsemble::from_pairs([(blur(0.6), 0.5), (mixed, 0.5)]).unwrap_err();
        assert!(matches!(err, EnsembleError::MixedBoundaries { index: 1, .. }));
    }

    #[test]
    fn tie_breaks_to_lowest_index() {
        let e = DegradationEnsemble::from_pairs([(blur(0.6), 0.5), (blur(0.8), 0.5)]).unwrap();
        assert_eq!(e.most_probable_index(), 0);
    }
}
