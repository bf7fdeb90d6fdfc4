//! Effective use and pairwise skill similarity.
//!
//! A skill is effectively used by a document when its RCA reaches the
//! threshold (inclusive). Similarity between two skills is their joint
//! effective-use count divided by the larger of their individual counts:
//! `N = EᵀE`, `q = diag(N)`, `Θ = N ⊘ max(q ⊗ 1, 1 ⊗ q)`.

use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rca::RcaMatrix;

pub const DEFAULT_THRESHOLD: f64 = 1.0;

/// Which documents shape Θ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaScope {
    /// Market documents only.
    #[default]
    Market,
    /// Every document in the corpus, education included.
    Pooled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveUseMatrix {
    pub data: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkillSimilarityMatrix {
    pub data: Array2<f64>,
    pub skill_frequencies: Array1<f64>,
}

impl SkillSimilarityMatrix {
    pub fn n_skills(&self) -> usize {
        self.data.nrows()
    }

    /// Identity similarity over `m` skills; every skill counts as used.
    pub fn identity(m: usize) -> Self {
        Self {
            data: Array2::eye(m),
            skill_frequencies: Array1::ones(m),
        }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[[a, b]]
    }
}

pub fn effective_use(rca: &RcaMatrix, threshold: f64) -> Result<EffectiveUseMatrix> {
    if !threshold.is_finite() {
        return Err(Error::InvalidThreshold(threshold));
    }
    Ok(EffectiveUseMatrix {
        data: rca.data.mapv(|r| if r >= threshold { 1.0 } else { 0.0 }),
    })
}

/// Builds Θ without materialising the tiled antecedent matrix.
pub fn skill_similarity(e: &EffectiveUseMatrix) -> SkillSimilarityMatrix {
    let joint = e.data.t().dot(&e.data);
    let q = joint.diag().to_owned();
    let mut theta = joint;
    for (i, mut row) in theta.rows_mut().into_iter().enumerate() {
        let qi = q[i];
        Zip::from(&mut row).and(&q).for_each(|v, &qk| {
            let denom = qi.max(qk);
            *v = if denom > 0.0 { *v / denom } else { 0.0 };
        });
    }
    SkillSimilarityMatrix {
        data: theta,
        skill_frequencies: q,
    }
}

/// Same result as [`skill_similarity`], forming `A = max(Qᵀ, Q)` explicitly.
pub fn skill_similarity_materialized(e: &EffectiveUseMatrix) -> SkillSimilarityMatrix {
    let joint = e.data.t().dot(&e.data);
    let q = joint.diag().to_owned();
    let m = q.len();
    let tiled = q
        .broadcast((m, m))
        .expect("square broadcast")
        .to_owned();
    let antecedent = Zip::from(&tiled)
        .and(&tiled.t())
        .map_collect(|&a, &b| a.max(b));
    let theta = Zip::from(&joint)
        .and(&antecedent)
        .map_collect(|&n, &a| if a > 0.0 { n / a } else { 0.0 });
    SkillSimilarityMatrix {
        data: theta,
        skill_frequencies: q,
    }
}

/// RCA → effective use → Θ in one call.
pub fn theta_from_rca(rca: &RcaMatrix, threshold: f64) -> Result<SkillSimilarityMatrix> {
    Ok(skill_similarity(&effective_use(rca, threshold)?))
}
