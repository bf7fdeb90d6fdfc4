//! Revealed Comparative Advantage of every (document, skill) pair.
//!
//! `RCA(j, s) = (x(j,s) / b[j]) / (c[s] / d)` where `b` counts skills per
//! document, `c` counts documents per skill and `d` is the grand total of
//! the presence matrix. The whole matrix is produced from the three
//! marginals in one row-parallel pass.

use ndarray::{Array1, Array2, Axis, Zip};
use serde::Serialize;

use crate::corpus::PresenceMatrix;

/// A skill column with no occurrences; its RCA column is all zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegenerateColumn {
    pub skill: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcaMatrix {
    pub data: Array2<f64>,
    pub skills_per_job: Array1<f64>,
    pub jobs_per_skill: Array1<f64>,
    pub total_occurrences: f64,
    pub warnings: Vec<DegenerateColumn>,
}

impl RcaMatrix {
    pub fn n_documents(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_skills(&self) -> usize {
        self.data.ncols()
    }
}

pub fn rca_matrix(presence: &PresenceMatrix) -> RcaMatrix {
    let p = &presence.data;
    let b = p.sum_axis(Axis(1));
    let c = p.sum_axis(Axis(0));
    let d = p.sum();

    // d / (b[j] c[s]): products of integer counts are exact, so an RCA of
    // exactly 1 stays exactly 1 and the effective-use boundary is sharp.
    let mut data = Array2::zeros(p.raw_dim());
    Zip::from(data.rows_mut())
        .and(p.rows())
        .and(&b)
        .par_for_each(|mut out, row, &bj| {
            Zip::from(&mut out)
                .and(&row)
                .and(&c)
                .for_each(|o, &x, &cs| {
                    *o = if x != 0.0 && cs > 0.0 { x * (d / (bj * cs)) } else { 0.0 };
                });
        });

    let warnings = c
        .iter()
        .enumerate()
        .filter(|(_, &cs)| cs == 0.0)
        .map(|(skill, _)| DegenerateColumn { skill })
        .collect();

    RcaMatrix {
        data,
        skills_per_job: b,
        jobs_per_skill: c,
        total_occurrences: d,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Document, DocKind, SkillVocabulary};
    use ndarray::array;
    use proptest::prelude::*;

    fn pm(data: Array2<f64>) -> PresenceMatrix {
        PresenceMatrix { data }
    }

    #[test]
    fn two_by_two_hand_values() {
        // b = (1, 2), c = (2, 1), d = 3
        let r = rca_matrix(&pm(array![[1.0, 0.0], [1.0, 1.0]]));
        assert_eq!(r.skills_per_job, array![1.0, 2.0]);
        assert_eq!(r.jobs_per_skill, array![2.0, 1.0]);
        assert_eq!(r.total_occurrences, 3.0);
        let expected = array![[1.5, 0.0], [0.75, 1.5]];
        for (a, e) in r.data.iter().zip(expected.iter()) {
            assert!((a - e).abs() <= 1e-15, "{a} vs {e}");
        }
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn uniform_corpus_has_unit_rca() {
        let r = rca_matrix(&pm(Array2::ones((4, 3))));
        assert!(r.data.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn unit_boundary_is_exact() {
        // (1/49) * 49 rounds below 1; the count-product form must not.
        let r = rca_matrix(&pm(Array2::ones((1, 49))));
        assert!(r.data.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn zero_column_flagged_not_fatal() {
        let r = rca_matrix(&pm(array![[1.0, 0.0, 1.0], [1.0, 0.0, 0.0]]));
        assert_eq!(r.warnings, vec![DegenerateColumn { skill: 1 }]);
        assert!(r.data.column(1).iter().all(|&v| v == 0.0));
    }

    fn arb_presence() -> impl Strategy<Value = Array2<f64>> {
        (1usize..10, 1usize..8).prop_flat_map(|(n, m)| {
            prop::collection::vec(prop::collection::vec(prop::bool::ANY, m), n).prop_map(
                move |rows| {
                    let mut p = Array2::zeros((n, m));
                    for (j, row) in rows.iter().enumerate() {
                        for (s, &x) in row.iter().enumerate() {
                            p[[j, s]] = if x { 1.0 } else { 0.0 };
                        }
                        if !row.iter().any(|&x| x) {
                            p[[j, j % m]] = 1.0;
                        }
                    }
                    p
                },
            )
        })
    }

    proptest! {
        #[test]
        fn support_and_sign(p in arb_presence()) {
            let r = rca_matrix(&pm(p.clone()));
            for ((j, s), &x) in p.indexed_iter() {
                let v = r.data[[j, s]];
                prop_assert!(v >= 0.0);
                prop_assert_eq!(v > 0.0, x == 1.0);
            }
            prop_assert_eq!(r.skills_per_job.clone(), p.sum_axis(Axis(1)));
            prop_assert_eq!(r.jobs_per_skill.clone(), p.sum_axis(Axis(0)));
        }

        #[test]
        fn definitional_formula_entrywise(p in arb_presence()) {
            let r = rca_matrix(&pm(p.clone()));
            let (n, m) = p.dim();
            for j in 0..n {
                for s in 0..m {
                    let row: f64 = (0..m).map(|k| p[[j, k]]).sum();
                    let col: f64 = (0..n).map(|k| p[[k, s]]).sum();
                    let tot: f64 = p.iter().sum();
                    let expected = if col > 0.0 { (p[[j, s]] / row) / (col / tot) } else { 0.0 };
                    prop_assert!((r.data[[j, s]] - expected).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn duplicating_documents_leaves_rows_unchanged(p in arb_presence()) {
            let doubled = ndarray::concatenate(Axis(0), &[p.view(), p.view()]).unwrap();
            let r1 = rca_matrix(&pm(p.clone()));
            let r2 = rca_matrix(&pm(doubled));
            for j in 0..p.nrows() {
                for s in 0..p.ncols() {
                    prop_assert!((r1.data[[j, s]] - r2.data[[j, s]]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn from_corpus() {
        let mut v = SkillVocabulary::new();
        v.intern("a").unwrap();
        v.intern("b").unwrap();
        let docs = vec![
            Document { id: "1".into(), group: "g".into(), kind: DocKind::Market, skills: vec![0] },
            Document { id: "2".into(), group: "g".into(), kind: DocKind::Market, skills: vec![0, 1] },
        ];
        let c = Corpus::from_parts(v, docs).unwrap();
        let r = rca_matrix(&c.presence_matrix());
        assert!((r.data[[1, 1]] - 1.5).abs() < 1e-15);
    }
}
