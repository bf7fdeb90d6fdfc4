//! Engine selection and the assembled skill space.
//!
//! [`Engine::Vectorised`] runs the matrix formulation; [`Engine::Naive`]
//! runs the loop oracle. Both expose the same operations so callers (the
//! CLI, the benchmark) can switch with a flag.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::Result;
use crate::oracle;
use crate::rca::{rca_matrix, RcaMatrix};
use crate::simmatrix::{effective_use, skill_similarity, SkillSimilarityMatrix, ThetaScope};
use crate::skillset::{self, AlignmentRow, Norm, WeightedSkillSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Vectorised,
    Naive,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "vectorised" | "vectorized" => Ok(Engine::Vectorised),
            "naive" => Ok(Engine::Naive),
            other => Err(format!("unknown engine `{other}` (vectorised|naive)")),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Vectorised => "vectorised",
            Engine::Naive => "naive",
        })
    }
}

impl Engine {
    pub fn rca(self, corpus: &Corpus) -> RcaMatrix {
        match self {
            Engine::Vectorised => rca_matrix(&corpus.presence_matrix()),
            Engine::Naive => oracle::naive_rca(corpus),
        }
    }

    pub fn theta_from_rca(self, rca: &RcaMatrix, threshold: f64) -> Result<SkillSimilarityMatrix> {
        Ok(match self {
            Engine::Vectorised => skill_similarity(&effective_use(rca, threshold)?),
            Engine::Naive => oracle::naive_theta(&oracle::naive_effective_use(rca, threshold)?),
        })
    }

    pub fn theta(self, corpus: &Corpus, threshold: f64) -> Result<SkillSimilarityMatrix> {
        self.theta_from_rca(&self.rca(corpus), threshold)
    }

    pub fn weights(self, corpus: &Corpus, rca: &RcaMatrix, group: &str) -> Result<WeightedSkillSet> {
        match self {
            Engine::Vectorised => skillset::skill_weights(corpus, rca, group),
            Engine::Naive => oracle::naive_skill_weights(corpus, rca, group),
        }
    }

    pub fn sss(
        self,
        a: &WeightedSkillSet,
        b: &WeightedSkillSet,
        theta: &SkillSimilarityMatrix,
        norm: Norm,
    ) -> Result<f64> {
        match self {
            Engine::Vectorised => skillset::sss(a, b, theta, norm),
            Engine::Naive => oracle::naive_sss(a, b, theta, norm),
        }
    }

    pub fn top_alignments(
        self,
        a: &WeightedSkillSet,
        b: &WeightedSkillSet,
        theta: &SkillSimilarityMatrix,
        k: usize,
    ) -> Vec<AlignmentRow> {
        match self {
            Engine::Vectorised => skillset::top_alignments(a, b, theta, k),
            Engine::Naive => oracle::naive_top_alignments(a, b, theta, k),
        }
    }
}

/// A corpus with its RCA (over every document) and Θ (over the chosen scope).
///
/// Group weights always come from the full-corpus RCA so degree and
/// certification documents receive weights; Θ defaults to market documents
/// only so the skill geometry is defined by demand.
#[derive(Debug, Clone)]
pub struct SkillSpace {
    pub corpus: Corpus,
    pub rca: RcaMatrix,
    pub theta: SkillSimilarityMatrix,
    pub engine: Engine,
}

impl SkillSpace {
    pub fn build(corpus: Corpus, engine: Engine, scope: ThetaScope, threshold: f64) -> Result<Self> {
        let rca = engine.rca(&corpus);
        let theta = match scope {
            ThetaScope::Pooled => engine.theta_from_rca(&rca, threshold)?,
            ThetaScope::Market => {
                let market = corpus.market_view();
                if market.n_documents() == corpus.n_documents() {
                    engine.theta_from_rca(&rca, threshold)?
                } else {
                    engine.theta(&market, threshold)?
                }
            }
        };
        Ok(Self {
            corpus,
            rca,
            theta,
            engine,
        })
    }

    /// Uses a precomputed Θ (e.g. loaded from cache).
    pub fn with_theta(corpus: Corpus, engine: Engine, theta: SkillSimilarityMatrix) -> Self {
        let rca = engine.rca(&corpus);
        Self {
            corpus,
            rca,
            theta,
            engine,
        }
    }

    pub fn weights(&self, group: &str) -> Result<WeightedSkillSet> {
        self.engine.weights(&self.corpus, &self.rca, group)
    }

    pub fn sss(&self, a: &WeightedSkillSet, b: &WeightedSkillSet, norm: Norm) -> Result<f64> {
        self.engine.sss(a, b, &self.theta, norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusBuilder, DocKind};

    fn mixed() -> Corpus {
        let mut b = CorpusBuilder::new();
        b.add_document("j1", "role", DocKind::Market, &["a", "b"]).unwrap();
        b.add_document("j2", "role", DocKind::Market, &["a", "c"]).unwrap();
        b.add_document("j3", "other", DocKind::Market, &["c"]).unwrap();
        b.add_document("e1", "deg", DocKind::Education, &["a", "z"]).unwrap();
        b.build()
    }

    #[test]
    fn engines_agree_on_space() {
        for scope in [ThetaScope::Market, ThetaScope::Pooled] {
            let v = SkillSpace::build(mixed(), Engine::Vectorised, scope, 1.0).unwrap();
            let n = SkillSpace::build(mixed(), Engine::Naive, scope, 1.0).unwrap();
            for (x, y) in v.theta.data.iter().zip(n.theta.data.iter()) {
                assert!((x - y).abs() <= 1e-12);
            }
            let a = v.weights("deg").unwrap();
            let b = v.weights("role").unwrap();
            let sv = v.sss(&a, &b, Norm::Weighted).unwrap();
            let sn = n.sss(&n.weights("deg").unwrap(), &n.weights("role").unwrap(), Norm::Weighted).unwrap();
            assert!((sv - sn).abs() <= 1e-12 * sv.max(1e-300));
        }
    }

    #[test]
    fn market_scope_ignores_education_cooccurrence() {
        let s = SkillSpace::build(mixed(), Engine::Vectorised, ThetaScope::Market, 1.0).unwrap();
        let z = s.corpus.vocabulary().id("z").unwrap();
        assert!(s.theta.data.row(z).iter().all(|&v| v == 0.0));
        let p = SkillSpace::build(mixed(), Engine::Vectorised, ThetaScope::Pooled, 1.0).unwrap();
        assert_eq!(p.theta.get(z, z), 1.0);
    }

    #[test]
    fn engine_names() {
        assert_eq!("naive".parse::<Engine>().unwrap(), Engine::Naive);
        assert_eq!(Engine::Vectorised.to_string(), "vectorised");
        assert!("gpu".parse::<Engine>().is_err());
    }
}
