//! Weighted skill sets and the similarity measures between them.
//!
//! Two normalisations of skill-set similarity are provided:
//!
//! * [`sss_cosine`] divides the θ-weighted cross sum by the product of the
//!   two weight vectors' Euclidean norms.
//! * [`sss_weighted`] divides it by the sum of all weight products `C`,
//!   which makes the result a weighted average of θ. The certification
//!   impact algebra is built on this form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::augment::Origin;
use crate::corpus::{Corpus, SkillVocabulary};
use crate::error::{Error, Result};
use crate::rca::RcaMatrix;
use crate::simmatrix::SkillSimilarityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    DerivedFromGroup,
    Loaded,
    Combined,
}

/// Sparse skill → weight map. Only strictly positive weights are stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSkillSet {
    label: String,
    weights: BTreeMap<usize, f64>,
    provenance: Provenance,
}

impl WeightedSkillSet {
    pub fn new<I>(label: impl Into<String>, weights: I, provenance: Provenance) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let label = label.into();
        let mut map = BTreeMap::new();
        for (skill, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeight {
                    label,
                    skill,
                    weight: w,
                });
            }
            if w > 0.0 {
                *map.entry(skill).or_insert(0.0) += w;
            }
        }
        if map.is_empty() {
            return Err(Error::EmptySkillSet(label));
        }
        Ok(Self {
            label,
            weights: map,
            provenance,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn weights(&self) -> &BTreeMap<usize, f64> {
        &self.weights
    }

    pub fn get(&self, skill: usize) -> Option<f64> {
        self.weights.get(&skill).copied()
    }

    pub fn contains(&self, skill: usize) -> bool {
        self.weights.contains_key(&skill)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.values().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.values().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Uniformly rescales every weight by a positive factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.label.clone(),
            self.weights.iter().map(|(&s, &w)| (s, w * factor)),
            self.provenance,
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Checks every skill id against a vocabulary of `m` skills.
    pub fn check_ids(&self, m: usize) -> Result<()> {
        match self.weights.keys().find(|&&s| s >= m) {
            Some(&s) => Err(Error::UnknownSkill(format!("id {s} in `{}`", self.label))),
            None => Ok(()),
        }
    }

    fn gather(&self) -> (Vec<usize>, Array1<f64>) {
        let idx: Vec<usize> = self.weights.keys().copied().collect();
        let w: Array1<f64> = self.weights.values().copied().collect();
        (idx, w)
    }

    pub fn to_file(&self, vocabulary: &SkillVocabulary) -> SkillSetFile {
        SkillSetFile {
            label: self.label.clone(),
            weights: self
                .weights
                .iter()
                .map(|(&s, &w)| (skill_name(vocabulary, s), w))
                .collect(),
            origin: None,
        }
    }

    pub fn from_file(file: &SkillSetFile, vocabulary: &SkillVocabulary) -> Result<Self> {
        let weights = file
            .weights
            .iter()
            .map(|(name, &w)| {
                vocabulary
                    .id(name)
                    .map(|id| (id, w))
                    .ok_or_else(|| Error::UnknownSkill(name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.label.clone(), weights, Provenance::Loaded)
    }
}

fn skill_name(vocabulary: &SkillVocabulary, id: usize) -> String {
    vocabulary
        .name(id)
        .map(str::to_string)
        .unwrap_or_else(|| format!("#{id}"))
}

/// On-disk JSON form of a weighted skill set, keyed by skill name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillSetFile {
    pub label: String,
    pub weights: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<BTreeMap<String, Origin>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Weighted,
    Cosine,
}

impl FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "weighted" => Ok(Norm::Weighted),
            "cosine" => Ok(Norm::Cosine),
            other => Err(format!("unknown norm `{other}` (weighted|cosine)")),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Weighted => "weighted",
            Norm::Cosine => "cosine",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub skill: usize,
    pub score: f64,
}

/// Weighted similarity together with its normalisation constant `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSss {
    pub value: f64,
    pub normalization: f64,
}

/// Mean RCA over the group's documents, per skill.
pub fn skill_weights(corpus: &Corpus, rca: &RcaMatrix, group: &str) -> Result<WeightedSkillSet> {
    let rows = corpus.subset(group)?;
    if rows.is_empty() {
        return Err(Error::EmptyGroup(group.to_string()));
    }
    let mean = rca
        .data
        .select(Axis(0), rows)
        .mean_axis(Axis(0))
        .ok_or_else(|| Error::EmptyGroup(group.to_string()))?;
    WeightedSkillSet::new(
        group,
        mean.iter().enumerate().map(|(s, &w)| (s, w)),
        Provenance::DerivedFromGroup,
    )
}

fn cross_sum(a: &WeightedSkillSet, b: &WeightedSkillSet, theta: &SkillSimilarityMatrix) -> (f64, Array1<f64>, Array1<f64>) {
    let (ia, wa) = a.gather();
    let (ib, wb) = b.gather();
    let block = theta.data.select(Axis(0), &ia).select(Axis(1), &ib);
    (wa.dot(&block.dot(&wb)), wa, wb)
}

/// `Σ_{i∈A} Σ_{j∈B} w_A(i) w_B(j) θ(i,j)` without normalisation.
pub fn similarity_mass(a: &WeightedSkillSet, b: &WeightedSkillSet, theta: &SkillSimilarityMatrix) -> f64 {
    cross_sum(a, b, theta).0
}

/// `Σ_{i∈A} Σ_{j∈B} w_A(i) w_B(j)`, the weighted form's normaliser.
pub fn weight_mass(a: &WeightedSkillSet, b: &WeightedSkillSet) -> f64 {
    let sa: f64 = a.weights.values().sum();
    let sb: f64 = b.weights.values().sum();
    sa * sb
}

fn non_empty(s: &WeightedSkillSet) -> Result<()> {
    if s.is_empty() {
        Err(Error::EmptySkillSet(s.label.clone()))
    } else {
        Ok(())
    }
}

pub fn sss_cosine(a: &WeightedSkillSet, b: &WeightedSkillSet, theta: &SkillSimilarityMatrix) -> Result<f64> {
    non_empty(a)?;
    non_empty(b)?;
    let (num, wa, wb) = cross_sum(a, b, theta);
    let denom = wa.dot(&wa).sqrt() * wb.dot(&wb).sqrt();
    if denom <= 0.0 {
        return Err(Error::ZeroNormalization);
    }
    Ok(num / denom)
}

pub fn sss_weighted(a: &WeightedSkillSet, b: &WeightedSkillSet, theta: &SkillSimilarityMatrix) -> Result<WeightedSss> {
    non_empty(a)?;
    non_empty(b)?;
    let (num, wa, wb) = cross_sum(a, b, theta);
    let c = wa.sum() * wb.sum();
    if c <= 0.0 {
        return Err(Error::ZeroNormalization);
    }
    // A weighted average of values in [0, 1]; rounding may overshoot by an ulp.
    Ok(WeightedSss {
        value: (num / c).clamp(0.0, 1.0),
        normalization: c,
    })
}

pub fn sss(a: &WeightedSkillSet, b: &WeightedSkillSet, theta: &SkillSimilarityMatrix, norm: Norm) -> Result<f64> {
    match norm {
        Norm::Cosine => sss_cosine(a, b, theta),
        Norm::Weighted => sss_weighted(a, b, theta).map(|r| r.value),
    }
}

/// Contribution of the whole of `a` toward one skill of `b`:
/// `w(target, b) · Σ_{s∈a} w(s, a) θ(s, target)`.
pub fn latent_alignment(
    target: usize,
    a: &WeightedSkillSet,
    b: &WeightedSkillSet,
    theta: &SkillSimilarityMatrix,
) -> Result<f64> {
    let wt = b.get(target).ok_or(Error::TargetSkillNotInB(target))?;
    let (ia, wa) = a.gather();
    let column = theta.data.column(target).select(Axis(0), &ia);
    Ok(wt * wa.dot(&column))
}

/// Latent alignment of every skill in `b`, best first, ties by skill id.
pub fn top_alignments(
    a: &WeightedSkillSet,
    b: &WeightedSkillSet,
    theta: &SkillSimilarityMatrix,
    k: usize,
) -> Vec<AlignmentRow> {
    let (ia, wa) = a.gather();
    let (ib, wb) = b.gather();
    let block = theta.data.select(Axis(0), &ib).select(Axis(1), &ia);
    let scores = block.dot(&wa) * &wb;
    let mut rows: Vec<AlignmentRow> = ib
        .into_iter()
        .zip(scores)
        .map(|(skill, score)| AlignmentRow { skill, score })
        .collect();
    rows.sort_by(|x, y| y.score.total_cmp(&x.score).then(x.skill.cmp(&y.skill)));
    rows.truncate(k);
    rows
}

/// All-pairs similarity between `sets` as one matrix product `W Θ Wᵀ`.
pub fn pairwise_sss(sets: &[WeightedSkillSet], theta: &SkillSimilarityMatrix, norm: Norm) -> Result<Array2<f64>> {
    let m = theta.n_skills();
    let mut w = Array2::<f64>::zeros((sets.len(), m));
    for (g, set) in sets.iter().enumerate() {
        non_empty(set)?;
        set.check_ids(m)?;
        for (&s, &v) in set.weights() {
            w[[g, s]] = v;
        }
    }
    let num = w.dot(&theta.data).dot(&w.t());
    let scale: Array1<f64> = match norm {
        Norm::Weighted => w.sum_axis(Axis(1)),
        Norm::Cosine => w.map_axis(Axis(1), |row| row.dot(&row).sqrt()),
    };
    let denom = scale
        .view()
        .insert_axis(Axis(1))
        .dot(&scale.view().insert_axis(Axis(0)));
    let mut out = num / &denom;
    if norm == Norm::Weighted {
        out.mapv_inplace(|v| v.clamp(0.0, 1.0));
    }
    Ok(out)
}
