//! Certification impact on job alignment.
//!
//! For a degree `S₁`, certification `S₂` and role `T`, the augmented set
//! `S₁′` satisfies
//!
//! ```text
//! Θ(S₁′,T) = (C/C′)·Θ(S₁,T) + (1/C′)·Σ_{s∈S₂} Σ_{t∈T} wᵀ(s)·w(t)·θ(s,t)
//! C′       = C + Σ_{s∈S₂} Σ_{t∈T} wᵀ(s)·w(t)
//! ```
//!
//! [`impact_decompose`] evaluates the left side directly on `S₁′` and the
//! right side from the baseline and certification terms, and records how
//! far apart they land.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::augment::{combine, TransformWarning, DEFAULT_ALPHA};
use crate::corpus::{Corpus, CorpusBuilder, DocKind, SkillVocabulary};
use crate::engine::{Engine, SkillSpace};
use crate::error::{Error, Result};
use crate::simmatrix::{SkillSimilarityMatrix, ThetaScope, DEFAULT_THRESHOLD};
use crate::skillset::{
    similarity_mass, sss_weighted, top_alignments, weight_mass, AlignmentRow, WeightedSkillSet,
};

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactReport {
    pub degree_label: String,
    pub cert_label: String,
    pub role_label: String,
    pub alpha: f64,
    pub baseline_theta: f64,
    pub enhanced_theta: f64,
    /// `(C/C′)·Θ(S₁,T) + cert_term/C′`.
    pub enhanced_theta_decomposed: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_prime")]
    pub c_prime: f64,
    pub cert_term: f64,
    /// `None` when the baseline is zero.
    pub percentage_improvement: Option<f64>,
    pub identity_residual: f64,
    pub top_contributions: Vec<AlignmentRow>,
    pub transform_warnings: Vec<TransformWarning>,
}

impl ImpactReport {
    /// `identity_residual` relative to the direct enhanced value.
    pub fn relative_residual(&self) -> f64 {
        if self.enhanced_theta == 0.0 {
            self.identity_residual
        } else {
            self.identity_residual / self.enhanced_theta.abs()
        }
    }
}

/// Weighted-average similarity of a degree to a role, and its `C`.
pub fn baseline_similarity(
    s1: &WeightedSkillSet,
    t: &WeightedSkillSet,
    theta: &SkillSimilarityMatrix,
) -> Result<(f64, f64)> {
    let r = sss_weighted(s1, t, theta)?;
    Ok((r.value, r.normalization))
}

pub fn percentage_improvement(baseline: f64, enhanced: f64) -> Result<f64> {
    if baseline <= 0.0 {
        return Err(Error::BaselineZero);
    }
    Ok(100.0 * (enhanced - baseline) / baseline)
}

pub fn impact_decompose(
    s1: &WeightedSkillSet,
    s2: &WeightedSkillSet,
    t: &WeightedSkillSet,
    theta: &SkillSimilarityMatrix,
    alpha: f64,
) -> Result<ImpactReport> {
    impact_decompose_top_k(s1, s2, t, theta, alpha, DEFAULT_TOP_K)
}

pub fn impact_decompose_top_k(
    s1: &WeightedSkillSet,
    s2: &WeightedSkillSet,
    t: &WeightedSkillSet,
    theta: &SkillSimilarityMatrix,
    alpha: f64,
    top_k: usize,
) -> Result<ImpactReport> {
    let (baseline, c) = baseline_similarity(s1, t, theta)?;
    let combined = combine(s1, s2, alpha)?;

    let enhanced = sss_weighted(&combined.set, t, theta)?.value;

    // Certification term over all of S₂ with transformed weights, overlap
    // skills included.
    let cert_set = WeightedSkillSet::new(
        s2.label(),
        combined.transformed.iter().map(|(&s, &w)| (s, w)),
        s2.provenance(),
    )?;
    let cert_term = similarity_mass(&cert_set, t, theta);
    let c_prime = c + weight_mass(&cert_set, t);
    let decomposed = (c / c_prime) * baseline + cert_term / c_prime;

    let percentage_improvement = match percentage_improvement(baseline, enhanced) {
        Ok(p) => Some(p),
        Err(Error::BaselineZero) => None,
        Err(e) => return Err(e),
    };

    Ok(ImpactReport {
        degree_label: s1.label().to_string(),
        cert_label: s2.label().to_string(),
        role_label: t.label().to_string(),
        alpha,
        baseline_theta: baseline,
        enhanced_theta: enhanced,
        enhanced_theta_decomposed: decomposed,
        c,
        c_prime,
        cert_term,
        percentage_improvement,
        identity_residual: (enhanced - decomposed).abs(),
        top_contributions: top_alignments(&combined.set, t, theta, top_k),
        transform_warnings: combined.params.warnings.clone(),
    })
}

/// A synthetic market with one small and one large degree that both take
/// the same role-aligned certification.
#[derive(Debug, Clone)]
pub struct AnomalyScenario {
    pub corpus: Corpus,
    pub small_degree: String,
    pub large_degree: String,
    pub cert: String,
    pub role: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnomalyOutcome {
    pub small: ImpactReport,
    pub large: ImpactReport,
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [String], lo: usize, hi: usize) -> Vec<&'a String> {
    let k = rng.gen_range(lo..=hi).min(pool.len());
    pool.choose_multiple(rng, k).collect()
}

/// Builds the synthetic bundle for `seed`.
///
/// Market side: a role whose ads mix core ML skills with cloud ML tooling,
/// a mechanical engineering role over generic engineering skills, and a
/// nursing role over clinical skills with a little analytics. Education
/// side: a broad engineering degree, a narrow nursing degree, and a
/// certification teaching the cloud tooling plus some core skills.
pub fn anomaly_scenario(seed: u64) -> AnomalyScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix} {i}")).collect::<Vec<_>>();
    let core = pool("ml core", 8);
    let cloud = pool("cloud ml", 5);
    let generic = pool("engineering", 30);
    let clinical = pool("clinical", 12);
    let analytics = pool("analytics", 2);

    let role = "Machine Learning Engineer";
    let small = "Bachelor of Nursing";
    let large = "Bachelor of Engineering";
    let cert = "AI Fundamentals";

    let mut b = CorpusBuilder::new();
    let doc = |b: &mut CorpusBuilder, id: String, group: &str, kind: DocKind, skills: Vec<&String>| {
        b.add_document(&id, group, kind, &skills).expect("generated documents are valid");
    };

    for i in 0..40 {
        let mut s = pick(&mut rng, &core, 3, 5);
        s.extend(pick(&mut rng, &cloud, 1, 3));
        s.extend(pick(&mut rng, &analytics, 0, 1));
        s.extend(pick(&mut rng, &generic, 0, 1));
        doc(&mut b, format!("mle-{i}"), role, DocKind::Market, s);
    }
    for i in 0..40 {
        let mut s = pick(&mut rng, &generic, 4, 7);
        s.extend(pick(&mut rng, &core, 0, 1));
        doc(&mut b, format!("mech-{i}"), "Mechanical Engineer", DocKind::Market, s);
    }
    for i in 0..40 {
        let mut s = pick(&mut rng, &clinical, 3, 6);
        s.extend(pick(&mut rng, &analytics, 0, 1));
        doc(&mut b, format!("rn-{i}"), "Registered Nurse", DocKind::Market, s);
    }

    for i in 0..30 {
        let mut s = pick(&mut rng, &generic, 4, 8);
        if rng.gen_bool(0.3) {
            s.extend(pick(&mut rng, &core, 1, 1));
        }
        doc(&mut b, format!("beng-{i}"), large, DocKind::Education, s);
    }
    for i in 0..6 {
        let mut s = pick(&mut rng, &clinical, 2, 4);
        let lo = usize::from(i == 0);
        s.extend(pick(&mut rng, &analytics, lo, 1));
        doc(&mut b, format!("bnur-{i}"), small, DocKind::Education, s);
    }
    for i in 0..5 {
        let mut s = pick(&mut rng, &cloud, 2, 3);
        s.extend(pick(&mut rng, &core, 1, 2));
        doc(&mut b, format!("cert-{i}"), cert, DocKind::Education, s);
    }

    AnomalyScenario {
        corpus: b.build(),
        small_degree: small.into(),
        large_degree: large.into(),
        cert: cert.into(),
        role: role.into(),
    }
}

impl AnomalyScenario {
    pub fn run(&self, engine: Engine, alpha: f64) -> Result<AnomalyOutcome> {
        let space = SkillSpace::build(self.corpus.clone(), engine, ThetaScope::Market, DEFAULT_THRESHOLD)?;
        let cert = space.weights(&self.cert)?;
        let role = space.weights(&self.role)?;
        let small = impact_decompose(&space.weights(&self.small_degree)?, &cert, &role, &space.theta, alpha)?;
        let large = impact_decompose(&space.weights(&self.large_degree)?, &cert, &role, &space.theta, alpha)?;
        Ok(AnomalyOutcome { small, large })
    }

    pub fn run_default(&self) -> Result<AnomalyOutcome> {
        self.run(Engine::Vectorised, DEFAULT_ALPHA)
    }
}

/// Similarity rendered in units of 1e-4 with two decimals.
pub fn format_e4(value: f64) -> String {
    format!("{:.2}", value * 1e4)
}

pub fn format_percentage(p: Option<f64>) -> String {
    match p {
        Some(p) => format!("{p:.0}%"),
        None => "n/a".to_string(),
    }
}

/// Markdown rendering of one report, contributions named by skill.
pub fn render_report_markdown(report: &ImpactReport, vocabulary: &SkillVocabulary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "### {} + {} → {}\n",
        report.degree_label, report.cert_label, report.role_label
    );
    let _ = writeln!(out, "| quantity | value |");
    let _ = writeln!(out, "|---|---|");
    let _ = writeln!(out, "| baseline Θ (×10⁻⁴) | {} |", format_e4(report.baseline_theta));
    let _ = writeln!(out, "| enhanced Θ (×10⁻⁴) | {} |", format_e4(report.enhanced_theta));
    let _ = writeln!(out, "| improvement | {} |", format_percentage(report.percentage_improvement));
    let _ = writeln!(out, "| C | {:.6} |", report.c);
    let _ = writeln!(out, "| C′ | {:.6} |", report.c_prime);
    let _ = writeln!(out, "| certification term | {:.6} |", report.cert_term);
    let _ = writeln!(out, "| identity residual | {:.3e} |", report.identity_residual);
    let _ = writeln!(out, "| α | {} |", report.alpha);
    let _ = writeln!(out);
    let _ = writeln!(out, "| skill | alignment score |");
    let _ = writeln!(out, "|---|---|");
    for row in &report.top_contributions {
        let _ = writeln!(
            out,
            "| {} | {:.4} |",
            vocabulary.name(row.skill).unwrap_or("?"),
            row.score
        );
    }
    out
}

/// Role × degree tables: baseline, enhanced, and percentage improvement.
///
/// `reports[r][d]` is the report for role `r` and degree `d`.
pub fn render_matrix_markdown(roles: &[String], degrees: &[String], cert: &str, reports: &[Vec<ImpactReport>]) -> String {
    let mut out = String::new();
    let header = |out: &mut String, cols: &[String]| {
        let _ = writeln!(out, "| Role | {} |", cols.join(" | "));
        let _ = writeln!(out, "|---|{}", "---|".repeat(cols.len()));
    };
    let table = |out: &mut String, title: &str, cols: &[String], cell: &dyn Fn(&ImpactReport) -> String| {
        let _ = writeln!(out, "{title}\n");
        header(out, cols);
        for (role, row) in roles.iter().zip(reports) {
            let cells: Vec<String> = row.iter().map(cell).collect();
            let _ = writeln!(out, "| {role} | {} |", cells.join(" | "));
        }
        let _ = writeln!(out);
    };
    table(&mut out, "Baseline similarity (×10⁻⁴)", degrees, &|r| format_e4(r.baseline_theta));
    let enhanced_cols: Vec<String> = degrees.iter().map(|d| format!("{d} + {cert}")).collect();
    table(&mut out, &format!("Similarity with {cert} (×10⁻⁴)"), &enhanced_cols, &|r| {
        format_e4(r.enhanced_theta)
    });
    table(&mut out, &format!("Percentage increase with {cert}"), degrees, &|r| {
        format_percentage(r.percentage_improvement)
    });
    out
}
