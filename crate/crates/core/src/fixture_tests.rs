//! End-to-end values on a five-document corpus.
//!
//! Expected numbers were computed once with an independent NumPy script
//! (dense matrices, no shared code) and frozen here.

use approx::assert_relative_eq;

use crate::augment::combine;
use crate::corpus::{Corpus, CorpusBuilder, DocKind};
use crate::engine::{Engine, SkillSpace};
use crate::impact::impact_decompose;
use crate::simmatrix::{ThetaScope, DEFAULT_THRESHOLD};
use crate::skillset::Norm;

fn corpus() -> Corpus {
    let mut b = CorpusBuilder::new();
    for (id, group, skills) in [
        ("d1", "A", vec!["a", "b"]),
        ("d2", "A", vec!["a", "c"]),
        ("d3", "B", vec!["b", "c", "d"]),
        ("d4", "B", vec!["d"]),
        ("d5", "C", vec!["a", "d"]),
    ] {
        b.add_document(id, group, DocKind::Market, &skills).unwrap();
    }
    b.build()
}

fn space(engine: Engine) -> SkillSpace {
    SkillSpace::build(corpus(), engine, ThetaScope::Market, DEFAULT_THRESHOLD).unwrap()
}

const RCA: [[f64; 4]; 5] = [
    [1.6666666666666667, 2.5, 0.0, 0.0],
    [1.6666666666666667, 0.0, 2.5, 0.0],
    [0.0, 1.6666666666666665, 1.6666666666666665, 1.1111111111111112],
    [0.0, 0.0, 0.0, 3.3333333333333335],
    [1.6666666666666667, 0.0, 0.0, 1.6666666666666667],
];

const THETA: [[f64; 4]; 4] = [
    [1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    [1.0 / 3.0, 1.0, 0.5, 1.0 / 3.0],
    [1.0 / 3.0, 0.5, 1.0, 1.0 / 3.0],
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0],
];

#[test]
fn rca_and_theta() {
    for engine in [Engine::Vectorised, Engine::Naive] {
        let s = space(engine);
        for j in 0..5 {
            for k in 0..4 {
                assert_relative_eq!(s.rca.data[[j, k]], RCA[j][k], max_relative = 1e-14);
            }
        }
        for i in 0..4 {
            for k in 0..4 {
                assert_relative_eq!(s.theta.get(i, k), THETA[i][k], max_relative = 1e-14);
            }
        }
        assert_eq!(s.theta.skill_frequencies.to_vec(), vec![3.0, 2.0, 2.0, 3.0]);
    }
}

#[test]
fn group_weights_and_similarity() {
    let s = space(Engine::Vectorised);
    let a = s.weights("A").unwrap();
    let b = s.weights("B").unwrap();
    assert_eq!(a.weights().keys().copied().collect::<Vec<_>>(), vec![0, 1, 2]);
    assert_relative_eq!(a.get(0).unwrap(), 1.6666666666666667, max_relative = 1e-14);
    assert_relative_eq!(a.get(1).unwrap(), 1.25, max_relative = 1e-14);
    assert_relative_eq!(b.get(3).unwrap(), 2.2222222222222223, max_relative = 1e-14);
    assert_relative_eq!(s.sss(&a, &b, Norm::Weighted).unwrap(), 0.4404761904761904, max_relative = 1e-13);
    // The cosine form exceeds 1 on this corpus.
    assert_relative_eq!(s.sss(&a, &b, Norm::Cosine).unwrap(), 1.1678957794127958, max_relative = 1e-13);
}

#[test]
fn combine_and_impact() {
    let s = space(Engine::Vectorised);
    let (a, b, c) = (s.weights("A").unwrap(), s.weights("B").unwrap(), s.weights("C").unwrap());
    let combined = combine(&a, &b, 0.2).unwrap();
    assert_relative_eq!(combined.params.a, 0.06, max_relative = 1e-14);
    assert_relative_eq!(combined.params.b_coeff, 1.5333333333333334, max_relative = 1e-14);
    let expected = [1.6666666666666667, 2.8333333333333335, 2.8333333333333335, 1.6666666666666667];
    for (k, e) in expected.iter().enumerate() {
        assert_relative_eq!(combined.set.get(k).unwrap(), *e, max_relative = 1e-14);
    }

    let r = impact_decompose(&a, &b, &c, &s.theta, 0.2).unwrap();
    assert_relative_eq!(r.baseline_theta, 0.4666666666666666, max_relative = 1e-13);
    assert_relative_eq!(r.enhanced_theta, 0.4567901234567902, max_relative = 1e-13);
    assert_relative_eq!(r.percentage_improvement.unwrap(), -2.116402116402088, max_relative = 1e-10);
    assert_relative_eq!(r.c, 13.888888888888891, max_relative = 1e-14);
    assert_relative_eq!(r.c_prime, 30.0, max_relative = 1e-14);
}
