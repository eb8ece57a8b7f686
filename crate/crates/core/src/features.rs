//! The 73-column feature registry and per-user feature extraction.

use ndarray::Array2;
use rayon::prelude::*;

use crate::data::{Corpus, FeatureMatrix};
use crate::engagement::{engagement_features, engagements_of, ENGAGEMENT_FEATURES};
use crate::error::{Error, Result};
use crate::linguistic::{linguistic_feature_names, linguistic_features};
use crate::social::{social_feature_names, social_features, SocialConfig};
use crate::temporal::{temporal_feature_names, temporal_features};

pub const FEATURE_COUNT: usize = 73;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Engagement,
    Social,
    Temporal,
    Linguistic,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Engagement,
        Dimension::Social,
        Dimension::Temporal,
        Dimension::Linguistic,
    ];

    pub fn expected_len(self) -> usize {
        match self {
            Dimension::Engagement => 7,
            Dimension::Social => 17,
            Dimension::Temporal => 25,
            Dimension::Linguistic => 24,
        }
    }
}

/// Names and order of every feature column. Constructing one validates the
/// per-dimension split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRegistry {
    names: Vec<String>,
    dims: Vec<Dimension>,
}

impl FeatureRegistry {
    pub fn new(k_grid: &[u32]) -> Result<Self> {
        let groups = [
            (
                Dimension::Engagement,
                ENGAGEMENT_FEATURES
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>(),
            ),
            (Dimension::Social, social_feature_names(k_grid)),
            (Dimension::Temporal, temporal_feature_names()),
            (Dimension::Linguistic, linguistic_feature_names()),
        ];
        let mut names = Vec::with_capacity(FEATURE_COUNT);
        let mut dims = Vec::with_capacity(FEATURE_COUNT);
        for (dim, group) in groups {
            if group.len() != dim.expected_len() {
                return Err(Error::Registry(format!(
                    "{dim:?} has {} features, expected {}",
                    group.len(),
                    dim.expected_len()
                )));
            }
            dims.extend(std::iter::repeat_n(dim, group.len()));
            names.extend(group);
        }
        let registry = FeatureRegistry { names, dims };
        registry.self_check()?;
        Ok(registry)
    }

    fn self_check(&self) -> Result<()> {
        if self.names.len() != FEATURE_COUNT {
            return Err(Error::Registry(format!(
                "{} columns, expected {FEATURE_COUNT}",
                self.names.len()
            )));
        }
        let mut sorted = self.names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.names.len() {
            return Err(Error::Registry("duplicate feature names".into()));
        }
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dimension(&self, column: usize) -> Dimension {
        self.dims[column]
    }

    pub fn count(&self, dim: Dimension) -> usize {
        self.dims.iter().filter(|&&d| d == dim).count()
    }

    /// Fails unless the matrix columns are exactly this registry, in order.
    pub fn check_matrix(&self, m: &FeatureMatrix) -> Result<()> {
        if m.names() != self.names.as_slice() {
            return Err(Error::Registry(format!(
                "matrix has {} columns that do not match the {FEATURE_COUNT}-feature registry",
                m.ncols()
            )));
        }
        Ok(())
    }
}

/// One row per user with at least one comment, ordered by user id.
pub fn extract_features(corpus: &Corpus, social: &SocialConfig) -> Result<FeatureMatrix> {
    let registry = FeatureRegistry::new(&social.k_grid)?;
    let social_rows = social_features(corpus, social)?;
    let users: Vec<String> = corpus.user_ids().map(str::to_string).collect();
    let rows = users
        .par_iter()
        .map(|user| -> Result<Vec<f64>> {
            let mut row = Vec::with_capacity(FEATURE_COUNT);
            let engagements = engagements_of(corpus, user);
            row.extend(engagement_features(user, &engagements)?.to_array());
            row.extend(social_rows.row(user));
            row.extend(temporal_features(user, corpus)?);
            row.extend(linguistic_features(user, corpus)?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Array2::zeros((users.len(), FEATURE_COUNT));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != FEATURE_COUNT {
            return Err(Error::Registry(format!(
                "row for `{}` has {} values",
                users[i],
                row.len()
            )));
        }
        for (j, v) in row.iter().enumerate() {
            values[[i, j]] = *v;
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let matrix = FeatureMatrix::new(users, registry.names().to_vec(), values)?;
    registry.check_matrix(&matrix)?;
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::social::DEFAULT_K_GRID;

    #[test]
    fn registry_split() {
        let r = FeatureRegistry::new(&DEFAULT_K_GRID).unwrap();
        assert_eq!(r.names().len(), 73);
        let split: Vec<usize> = Dimension::ALL.iter().map(|&d| r.count(d)).collect();
        assert_eq!(split, [7, 17, 25, 24]);
    }

    #[test]
    fn wrong_grid_is_a_hard_failure() {
        assert!(matches!(
            FeatureRegistry::new(&[0, 4]),
            Err(Error::Registry(_))
        ));
        assert!(matches!(
            FeatureRegistry::new(&[0, 0, 1, 2, 3]),
            Err(Error::Registry(_))
        ));
    }
}
