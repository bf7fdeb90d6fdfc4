//! Loop-based reference implementations.
//!
//! Every function here restates a formula as explicit nested loops over the
//! document/skill adjacency lists. Row and column totals are recomputed
//! where they are used rather than cached, matching the cost profile of a
//! straightforward transcription. Nothing in this module calls into the
//! vectorised engine; only the domain types are shared.

use ndarray::{Array1, Array2};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rca::{DegenerateColumn, RcaMatrix};
use crate::simmatrix::{EffectiveUseMatrix, SkillSimilarityMatrix};
use crate::skillset::{AlignmentRow, Norm, Provenance, WeightedSkillSet};

fn has_skill(skills: &[usize], s: usize) -> bool {
    skills.contains(&s)
}

fn indicator(corpus: &Corpus, j: usize, s: usize) -> f64 {
    if has_skill(&corpus.documents()[j].skills, s) {
        1.0
    } else {
        0.0
    }
}

pub fn naive_rca(corpus: &Corpus) -> RcaMatrix {
    let n = corpus.n_documents();
    let m = corpus.n_skills();

    let mut total = 0.0;
    for j in 0..n {
        for s in 0..m {
            total += indicator(corpus, j, s);
        }
    }

    let mut data = Array2::zeros((n, m));
    for j in 0..n {
        for s in 0..m {
            let x = indicator(corpus, j, s);
            if x == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for k in 0..m {
                row += indicator(corpus, j, k);
            }
            let mut col = 0.0;
            for k in 0..n {
                col += indicator(corpus, k, s);
            }
            if col > 0.0 {
                data[[j, s]] = (x / row) / (col / total);
            }
        }
    }

    let mut skills_per_job = Array1::zeros(n);
    for j in 0..n {
        for s in 0..m {
            skills_per_job[j] += indicator(corpus, j, s);
        }
    }
    let mut jobs_per_skill = Array1::zeros(m);
    let mut warnings = Vec::new();
    for s in 0..m {
        for j in 0..n {
            jobs_per_skill[s] += indicator(corpus, j, s);
        }
        if jobs_per_skill[s] == 0.0 {
            warnings.push(DegenerateColumn { skill: s });
        }
    }

    RcaMatrix {
        data,
        skills_per_job,
        jobs_per_skill,
        total_occurrences: total,
        warnings,
    }
}

pub fn naive_effective_use(rca: &RcaMatrix, threshold: f64) -> Result<EffectiveUseMatrix> {
    if !threshold.is_finite() {
        return Err(Error::InvalidThreshold(threshold));
    }
    let (n, m) = rca.data.dim();
    let mut data = Array2::zeros((n, m));
    for j in 0..n {
        for s in 0..m {
            if rca.data[[j, s]] >= threshold {
                data[[j, s]] = 1.0;
            }
        }
    }
    Ok(EffectiveUseMatrix { data })
}

pub fn naive_theta(e: &EffectiveUseMatrix) -> SkillSimilarityMatrix {
    let (n, m) = e.data.dim();
    let mut data = Array2::zeros((m, m));
    let mut freq = Array1::zeros(m);
    for s1 in 0..m {
        for s2 in 0..m {
            let mut joint = 0.0;
            let mut f1 = 0.0;
            let mut f2 = 0.0;
            for j in 0..n {
                joint += e.data[[j, s1]] * e.data[[j, s2]];
                f1 += e.data[[j, s1]];
                f2 += e.data[[j, s2]];
            }
            let denom = if f1 > f2 { f1 } else { f2 };
            data[[s1, s2]] = if denom > 0.0 { joint / denom } else { 0.0 };
            if s1 == s2 {
                freq[s1] = f1;
            }
        }
    }
    SkillSimilarityMatrix {
        data,
        skill_frequencies: freq,
    }
}

pub fn naive_skill_weights(corpus: &Corpus, rca: &RcaMatrix, group: &str) -> Result<WeightedSkillSet> {
    let members: Vec<usize> = corpus
        .documents()
        .iter()
        .enumerate()
        .filter(|(_, d)| d.group == group)
        .map(|(j, _)| j)
        .collect();
    if members.is_empty() {
        return Err(Error::UnknownGroup(group.to_string()));
    }
    let mut weights = Vec::new();
    for s in 0..corpus.n_skills() {
        let mut sum = 0.0;
        for &j in &members {
            sum += rca.data[[j, s]];
        }
        weights.push((s, sum / members.len() as f64));
    }
    WeightedSkillSet::new(group, weights, Provenance::DerivedFromGroup)
}

/// `Σ_{i∈A} Σ_{j∈B} w_A(i) w_B(j) θ(i,j)`.
pub fn naive_cross_sum(a: &WeightedSkillSet, b: &WeightedSkillSet, theta: &SkillSimilarityMatrix) -> f64 {
    let mut total = 0.0;
    for (&i, &wi) in a.weights() {
        for (&j, &wj) in b.weights() {
            total += wi * wj * theta.data[[i, j]];
        }
    }
    total
}

/// `Σ_{i∈A} Σ_{j∈B} w_A(i) w_B(j)`.
pub fn naive_weight_mass(a: &WeightedSkillSet, b: &WeightedSkillSet) -> f64 {
    let mut total = 0.0;
    for &wi in a.weights().values() {
        for &wj in b.weights().values() {
            total += wi * wj;
        }
    }
    total
}

pub fn naive_sss(a: &WeightedSkillSet, b: &WeightedSkillSet, theta: &SkillSimilarityMatrix, norm: Norm) -> Result<f64> {
    for s in [a, b] {
        if s.is_empty() {
            return Err(Error::EmptySkillSet(s.label().to_string()));
        }
    }
    let numerator = naive_cross_sum(a, b, theta);
    let denominator = match norm {
        Norm::Weighted => naive_weight_mass(a, b),
        Norm::Cosine => {
            let mut sa = 0.0;
            for &w in a.weights().values() {
                sa += w * w;
            }
            let mut sb = 0.0;
            for &w in b.weights().values() {
                sb += w * w;
            }
            sa.sqrt() * sb.sqrt()
        }
    };
    if denominator <= 0.0 {
        return Err(Error::ZeroNormalization);
    }
    Ok(numerator / denominator)
}

pub fn naive_latent_alignment(
    target: usize,
    a: &WeightedSkillSet,
    b: &WeightedSkillSet,
    theta: &SkillSimilarityMatrix,
) -> Result<f64> {
    let wt = b.get(target).ok_or(Error::TargetSkillNotInB(target))?;
    let mut total = 0.0;
    for (&s, &ws) in a.weights() {
        total += ws * wt * theta.data[[s, target]];
    }
    Ok(total)
}

/// Exhaustive scoring of every target skill, then a full sort.
pub fn naive_top_alignments(
    a: &WeightedSkillSet,
    b: &WeightedSkillSet,
    theta: &SkillSimilarityMatrix,
    k: usize,
) -> Vec<AlignmentRow> {
    let mut rows = Vec::new();
    for &t in b.weights().keys() {
        let score = naive_latent_alignment(t, a, b, theta).expect("target drawn from b");
        rows.push(AlignmentRow { skill: t, score });
    }
    rows.sort_by(|x, y| {
        y.score
            .partial_cmp(&x.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.skill.cmp(&y.skill))
    });
    rows.into_iter().take(k).collect()
}
