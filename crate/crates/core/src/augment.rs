//! Merging a degree skill set with a certification skill set.
//!
//! Certification weights are mapped linearly onto the top `alpha` fraction
//! of the degree's weight range, `wᵀ = a·w + b`, so the certification's
//! lightest skill lands at `(1−α)(max₁−min₁)+min₁` and its heaviest at
//! `max₁`. The union then keeps degree-only weights, uses `wᵀ` for
//! certification-only skills and adds the two for shared skills.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::SkillVocabulary;
use crate::error::{Error, Result};
use crate::skillset::{Provenance, SkillSetFile, WeightedSkillSet};

pub const DEFAULT_ALPHA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformWarning {
    /// Every certification weight is equal; all map to the degree maximum.
    DegenerateCertRange,
    /// Every degree weight is equal; certification skills enter at that weight.
    DegenerateDegreeRange,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformParams {
    pub alpha: f64,
    pub a: f64,
    pub b_coeff: f64,
    pub min_s1: f64,
    pub max_s1: f64,
    pub min_s2: f64,
    pub max_s2: f64,
    pub warnings: Vec<TransformWarning>,
}

impl TransformParams {
    pub fn apply(&self, weight: f64) -> f64 {
        self.a * weight + self.b_coeff
    }

    /// The interval every transformed weight must fall in.
    pub fn band(&self) -> (f64, f64) {
        (
            (1.0 - self.alpha) * (self.max_s1 - self.min_s1) + self.min_s1,
            self.max_s1,
        )
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

pub fn transform_params(s1: &WeightedSkillSet, s2: &WeightedSkillSet, alpha: f64) -> Result<TransformParams> {
    check_alpha(alpha)?;
    for s in [s1, s2] {
        if s.is_empty() {
            return Err(Error::EmptySkillSet(s.label().to_string()));
        }
    }
    let (min_s1, max_s1) = (s1.min_weight(), s1.max_weight());
    let (min_s2, max_s2) = (s2.min_weight(), s2.max_weight());
    let mut warnings = Vec::new();
    let (a, b_coeff) = if max_s1 == min_s1 {
        warnings.push(TransformWarning::DegenerateDegreeRange);
        if max_s2 == min_s2 {
            warnings.push(TransformWarning::DegenerateCertRange);
        }
        (0.0, min_s1)
    } else if max_s2 == min_s2 {
        warnings.push(TransformWarning::DegenerateCertRange);
        (0.0, max_s1)
    } else {
        let a = alpha * (max_s1 - min_s1) / (max_s2 - min_s2);
        let b = (1.0 - alpha) * (max_s1 - min_s1) + min_s1 - a * min_s2;
        (a, b)
    };
    Ok(TransformParams {
        alpha,
        a,
        b_coeff,
        min_s1,
        max_s1,
        min_s2,
        max_s2,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    DegreeOnly,
    CertOnly,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedSkillSet {
    pub set: WeightedSkillSet,
    pub origin: BTreeMap<usize, Origin>,
    /// `wᵀ(s, S₂)` for every certification skill, overlap included.
    pub transformed: BTreeMap<usize, f64>,
    pub params: TransformParams,
}

impl CombinedSkillSet {
    pub fn to_file(&self, vocabulary: &SkillVocabulary) -> SkillSetFile {
        let mut file = self.set.to_file(vocabulary);
        file.origin = Some(
            self.origin
                .iter()
                .map(|(&s, &o)| {
                    let name = vocabulary
                        .name(s)
                        .map(str::to_string)
                        .unwrap_or_else(|| format!("#{s}"));
                    (name, o)
                })
                .collect(),
        );
        file
    }
}

pub fn combine(s1: &WeightedSkillSet, s2: &WeightedSkillSet, alpha: f64) -> Result<CombinedSkillSet> {
    let params = transform_params(s1, s2, alpha)?;
    let transformed: BTreeMap<usize, f64> = s2
        .weights()
        .iter()
        .map(|(&s, &w)| (s, params.apply(w)))
        .collect();

    let mut weights = s1.weights().clone();
    let mut origin: BTreeMap<usize, Origin> =
        s1.weights().keys().map(|&s| (s, Origin::DegreeOnly)).collect();
    for (&s, &wt) in &transformed {
        match weights.get_mut(&s) {
            Some(w) => {
                *w += wt;
                origin.insert(s, Origin::Both);
            }
            None => {
                weights.insert(s, wt);
                origin.insert(s, Origin::CertOnly);
            }
        }
    }
    let set = WeightedSkillSet::new(
        format!("{} + {}", s1.label(), s2.label()),
        weights,
        Provenance::Combined,
    )?;
    Ok(CombinedSkillSet {
        set,
        origin,
        transformed,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(label: &str, w: &[(usize, f64)]) -> WeightedSkillSet {
        WeightedSkillSet::new(label, w.iter().copied(), Provenance::Loaded).unwrap()
    }

    #[test]
    fn hand_evaluated_coefficients() {
        let s1 = set("deg", &[(0, 0.2), (1, 0.6), (2, 1.0)]);
        let s2 = set("cert", &[(3, 0.5), (4, 2.0)]);
        let p = transform_params(&s1, &s2, 0.2).unwrap();
        // a = 0.2 * 0.8 / 1.5, b = 0.8 * 0.8 + 0.2 - a * 0.5
        assert!((p.a - 0.106_666_666_666_666_67).abs() < 1e-15);
        assert!((p.b_coeff - 0.786_666_666_666_666_7).abs() < 1e-15);
        assert!((p.apply(0.5) - 0.84).abs() < 1e-15);
        assert!((p.apply(2.0) - 1.0).abs() < 1e-15);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn full_alpha_spans_degree_range() {
        let s1 = set("deg", &[(0, 0.2), (1, 1.0)]);
        let s2 = set("cert", &[(3, 0.5), (4, 2.0)]);
        let p = transform_params(&s1, &s2, 1.0).unwrap();
        assert!((p.apply(0.5) - 0.2).abs() < 1e-15);
        assert!((p.apply(2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_valued_cert_maps_to_degree_max() {
        let s1 = set("deg", &[(0, 0.2), (1, 1.0)]);
        let s2 = set("cert", &[(3, 0.7), (4, 0.7)]);
        let c = combine(&s1, &s2, 0.2).unwrap();
        assert_eq!(c.params.warnings, vec![TransformWarning::DegenerateCertRange]);
        assert!(c.transformed.values().all(|&w| w == 1.0));
    }

    #[test]
    fn single_valued_degree_uses_common_weight() {
        let s1 = set("deg", &[(0, 0.4), (1, 0.4)]);
        let s2 = set("cert", &[(3, 0.5), (4, 2.0)]);
        let c = combine(&s1, &s2, 0.2).unwrap();
        assert_eq!(c.params.a, 0.0);
        assert_eq!(c.params.b_coeff, 0.4);
        assert!(c.transformed.values().all(|&w| w == 0.4));
    }

    #[test]
    fn invalid_alpha() {
        let s = set("s", &[(0, 1.0)]);
        for alpha in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(combine(&s, &s, alpha), Err(Error::InvalidAlpha(_))));
        }
    }

    #[test]
    fn disjoint_union_size() {
        let s1 = set("deg", &[(0, 0.2), (1, 1.0)]);
        let s2 = set("cert", &[(3, 0.5), (4, 2.0), (5, 1.0)]);
        let c = combine(&s1, &s2, 0.2).unwrap();
        assert_eq!(c.set.len(), 5);
        assert_eq!(c.origin[&0], Origin::DegreeOnly);
        assert_eq!(c.origin[&5], Origin::CertOnly);
        assert_eq!(c.set.provenance(), Provenance::Combined);
        assert_eq!(c.set.label(), "deg + cert");
    }

    #[test]
    fn overlap_adds_transformed_weight() {
        let s1 = set("deg", &[(0, 0.2), (1, 1.0)]);
        let s2 = set("cert", &[(1, 0.5), (4, 2.0)]);
        let c = combine(&s1, &s2, 0.2).unwrap();
        let wt = c.params.apply(0.5);
        assert_eq!(c.set.get(1).unwrap(), 1.0 + wt);
        assert_eq!(c.origin[&1], Origin::Both);
        assert_eq!(c.set.get(0).unwrap(), 0.2);
    }

    #[test]
    fn identical_sets_strictly_increase() {
        let s = set("s", &[(0, 0.3), (1, 0.9), (2, 1.7)]);
        let c = combine(&s, &s, 0.2).unwrap();
        for (&k, &w) in s.weights() {
            assert!(c.set.get(k).unwrap() > w);
        }
    }

    #[test]
    fn combined_file_carries_origin() {
        let mut v = SkillVocabulary::new();
        for n in ["a", "b", "c"] {
            v.intern(n).unwrap();
        }
        let c = combine(&set("d", &[(0, 1.0), (1, 2.0)]), &set("k", &[(1, 1.0), (2, 3.0)]), 0.2).unwrap();
        let f = c.to_file(&v);
        let origin = f.origin.unwrap();
        assert_eq!(origin["a"], Origin::DegreeOnly);
        assert_eq!(origin["b"], Origin::Both);
        assert_eq!(origin["c"], Origin::CertOnly);
    }

    fn arb_weights() -> impl Strategy<Value = Vec<(usize, f64)>> {
        prop::collection::vec((0usize..30, 0.001f64..10.0), 1..12)
    }

    proptest! {
        #[test]
        fn transformed_weights_in_top_band(w1 in arb_weights(), w2 in arb_weights(),
                                          alpha in prop::sample::select(vec![0.05, 0.2, 0.5, 1.0])) {
            let s1 = WeightedSkillSet::new("d", w1, Provenance::Loaded).unwrap();
            let s2 = WeightedSkillSet::new("c", w2, Provenance::Loaded).unwrap();
            let c = combine(&s1, &s2, alpha).unwrap();
            let (lo, hi) = c.params.band();
            for &w in c.transformed.values() {
                prop_assert!(w >= lo - 1e-12 && w <= hi + 1e-12, "{w} not in [{lo}, {hi}]");
            }
        }

        #[test]
        fn input_order_does_not_matter(w1 in arb_weights(), w2 in arb_weights()) {
            let s1 = WeightedSkillSet::new("d", w1.clone(), Provenance::Loaded).unwrap();
            let s2 = WeightedSkillSet::new("c", w2.clone(), Provenance::Loaded).unwrap();
            let mut r1 = w1; r1.reverse();
            let mut r2 = w2; r2.reverse();
            let t1 = WeightedSkillSet::new("d", r1, Provenance::Loaded).unwrap();
            let t2 = WeightedSkillSet::new("c", r2, Provenance::Loaded).unwrap();
            let a = combine(&s1, &s2, 0.2).unwrap();
            let b = combine(&t1, &t2, 0.2).unwrap();
            prop_assert_eq!(a.origin, b.origin);
            for (x, y) in a.set.weights().values().zip(b.set.weights().values()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs());
            }
        }

        #[test]
        fn band_lower_edge_monotone_in_alpha(w1 in arb_weights(), w2 in arb_weights(),
                                             a1 in 0.01f64..1.0, a2 in 0.01f64..1.0) {
            let (lo_alpha, hi_alpha) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let s1 = WeightedSkillSet::new("d", w1, Provenance::Loaded).unwrap();
            let s2 = WeightedSkillSet::new("c", w2, Provenance::Loaded).unwrap();
            let p1 = transform_params(&s1, &s2, lo_alpha).unwrap();
            let p2 = transform_params(&s1, &s2, hi_alpha).unwrap();
            prop_assert!(p2.band().0 <= p1.band().0);
            prop_assert_eq!(p1.band().1, p2.band().1);
        }
    }
}
