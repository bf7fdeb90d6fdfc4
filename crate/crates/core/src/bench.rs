//! Synthetic workloads and naive-versus-vectorised timing.
//!
//! Each timed run is the full pipeline: presence → RCA → Θ → group weights
//! → one weighted SSS per unordered pair of groups. Both engines run the
//! same pipeline on the same corpus and their outputs are compared before
//! any timing is accepted.

use std::fmt::Write as _;
use std::time::Instant;

use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Corpus, CorpusBuilder, DocKind};
use crate::error::{Error, Result};
use crate::oracle;
use crate::rca::rca_matrix;
use crate::simmatrix::{effective_use, skill_similarity, DEFAULT_THRESHOLD};
use crate::skillset::{pairwise_sss, skill_weights, Norm};

pub const MIN_REPETITIONS: usize = 5;
pub const DEFAULT_DOCS_PER_GROUP: usize = 50;
const COVERAGE_RETRIES: usize = 64;

const MATRIX_TOLERANCE: f64 = 1e-12;
const SCALAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WorkloadSpec {
    pub n_groups: usize,
    pub m_skills: usize,
    pub docs_per_group: usize,
    /// Inclusive range of skills drawn per document.
    pub skills_per_doc: (usize, usize),
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.skills_per_doc;
        if self.n_groups == 0 || self.m_skills == 0 || self.docs_per_group == 0 || lo == 0 {
            return Err(Error::InvalidSpec("all counts must be at least 1".into()));
        }
        if lo > hi {
            return Err(Error::InvalidSpec(format!("skills_per_doc range {lo}..={hi} is empty")));
        }
        if hi > self.m_skills {
            return Err(Error::InvalidSpec(format!(
                "skills_per_doc max {hi} exceeds m_skills {}",
                self.m_skills
            )));
        }
        Ok(())
    }

    pub fn n_documents(&self) -> usize {
        self.n_groups * self.docs_per_group
    }
}

/// Published timings for one ladder rung, for side-by-side display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedRow {
    pub n_groups: usize,
    pub m_skills: usize,
    pub naive_ms: f64,
    pub vectorised_ms: f64,
    pub speedup: f64,
}

pub const PUBLISHED_LADDER: [PublishedRow; 6] = [
    PublishedRow { n_groups: 15, m_skills: 5, naive_ms: 11.55, vectorised_ms: 0.15, speedup: 77.0 },
    PublishedRow { n_groups: 30, m_skills: 10, naive_ms: 141.58, vectorised_ms: 0.14, speedup: 1011.0 },
    PublishedRow { n_groups: 45, m_skills: 15, naive_ms: 2206.75, vectorised_ms: 0.20, speedup: 11034.0 },
    PublishedRow { n_groups: 60, m_skills: 20, naive_ms: 5673.70, vectorised_ms: 0.20, speedup: 28369.0 },
    PublishedRow { n_groups: 75, m_skills: 25, naive_ms: 28927.69, vectorised_ms: 0.30, speedup: 96426.0 },
    PublishedRow { n_groups: 90, m_skills: 30, naive_ms: 34530.35, vectorised_ms: 0.24, speedup: 143876.0 },
];

pub fn published_row(n_groups: usize, m_skills: usize) -> Option<PublishedRow> {
    PUBLISHED_LADDER
        .iter()
        .copied()
        .find(|r| r.n_groups == n_groups && r.m_skills == m_skills)
}

/// Skills per document drawn from `1..=max(2, m/4)`.
pub fn default_skills_per_doc(m_skills: usize) -> (usize, usize) {
    (1, (m_skills / 4).max(2).min(m_skills))
}

/// The six published (groups, skills) rungs with `docs_per_group` each.
pub fn published_ladder(docs_per_group: usize, seed: u64) -> Vec<WorkloadSpec> {
    PUBLISHED_LADDER
        .iter()
        .enumerate()
        .map(|(i, r)| WorkloadSpec {
            n_groups: r.n_groups,
            m_skills: r.m_skills,
            docs_per_group,
            skills_per_doc: default_skills_per_doc(r.m_skills),
            seed: seed.wrapping_add(i as u64),
        })
        .collect()
}

/// A single overhead-dominated rung.
pub fn tiny_ladder(seed: u64) -> Vec<WorkloadSpec> {
    vec![WorkloadSpec {
        n_groups: 2,
        m_skills: 2,
        docs_per_group: 2,
        skills_per_doc: (1, 2),
        seed,
    }]
}

/// Deterministic corpus for `spec`; every skill is used by some document.
pub fn generate_workload(spec: &WorkloadSpec) -> Result<Corpus> {
    spec.validate()?;
    let (lo, hi) = spec.skills_per_doc;
    if spec.n_documents() * hi < spec.m_skills {
        return Err(Error::InfeasibleSpec(format!(
            "{} documents with at most {hi} skills each cannot cover {} skills",
            spec.n_documents(),
            spec.m_skills
        )));
    }
    let names: Vec<String> = (0..spec.m_skills).map(|s| format!("skill {s}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    for _ in 0..COVERAGE_RETRIES {
        let mut draws = Vec::with_capacity(spec.n_documents());
        let mut covered = vec![false; spec.m_skills];
        for _ in 0..spec.n_documents() {
            let k = rng.gen_range(lo..=hi);
            let picked = sample(&mut rng, spec.m_skills, k).into_vec();
            for &s in &picked {
                covered[s] = true;
            }
            draws.push(picked);
        }
        if !covered.iter().all(|&c| c) {
            continue;
        }

        let mut b = CorpusBuilder::new();
        for name in &names {
            b.add_skill(name)?;
        }
        for (i, picked) in draws.iter().enumerate() {
            let group = format!("occupation {}", i / spec.docs_per_group);
            let skills: Vec<&str> = picked.iter().map(|&s| names[s].as_str()).collect();
            b.add_document(&format!("doc {i}"), &group, DocKind::Market, &skills)?;
        }
        return Ok(b.build());
    }
    Err(Error::InfeasibleSpec(format!(
        "could not cover all {} skills in {COVERAGE_RETRIES} attempts",
        spec.m_skills
    )))
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub rca: Array2<f64>,
    pub theta: Array2<f64>,
    /// Similarity for each unordered pair of distinct groups, in group order.
    pub pair_sss: Vec<f64>,
}

pub fn run_vectorised(corpus: &Corpus) -> Result<PipelineOutput> {
    let rca = rca_matrix(&corpus.presence_matrix());
    let theta = skill_similarity(&effective_use(&rca, DEFAULT_THRESHOLD)?);
    let sets = corpus
        .group_labels()
        .iter()
        .map(|g| skill_weights(corpus, &rca, g))
        .collect::<Result<Vec<_>>>()?;
    let all = pairwise_sss(&sets, &theta, Norm::Weighted)?;
    let g = sets.len();
    let mut pair_sss = Vec::with_capacity(g * g.saturating_sub(1) / 2);
    for a in 0..g {
        for b in a + 1..g {
            pair_sss.push(all[[a, b]]);
        }
    }
    Ok(PipelineOutput {
        rca: rca.data,
        theta: theta.data,
        pair_sss,
    })
}

pub fn run_naive(corpus: &Corpus) -> Result<PipelineOutput> {
    let rca = oracle::naive_rca(corpus);
    let theta = oracle::naive_theta(&oracle::naive_effective_use(&rca, DEFAULT_THRESHOLD)?);
    let sets = corpus
        .group_labels()
        .iter()
        .map(|g| oracle::naive_skill_weights(corpus, &rca, g))
        .collect::<Result<Vec<_>>>()?;
    let mut pair_sss = Vec::new();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            pair_sss.push(oracle::naive_sss(&sets[a], &sets[b], &theta, Norm::Weighted)?);
        }
    }
    Ok(PipelineOutput {
        rca: rca.data,
        theta: theta.data,
        pair_sss,
    })
}

/// Checks two pipeline outputs against the equivalence tolerances.
pub fn check_equivalence(naive: &PipelineOutput, vectorised: &PipelineOutput) -> Result<()> {
    let matrices = [("RCA", &naive.rca, &vectorised.rca), ("theta", &naive.theta, &vectorised.theta)];
    for (name, a, b) in matrices {
        if a.dim() != b.dim() {
            return Err(Error::EngineMismatch(format!("{name} shapes {:?} vs {:?}", a.dim(), b.dim())));
        }
        if let Some(((i, j), x)) = a
            .indexed_iter()
            .find(|&(ix, x)| (x - b[ix]).abs() > MATRIX_TOLERANCE)
        {
            return Err(Error::EngineMismatch(format!("{name}[{i},{j}]: {x} vs {}", b[[i, j]])));
        }
    }
    if naive.pair_sss.len() != vectorised.pair_sss.len() {
        return Err(Error::EngineMismatch("pair counts differ".into()));
    }
    for (k, (&x, &y)) in naive.pair_sss.iter().zip(&vectorised.pair_sss).enumerate() {
        let scale = x.abs().max(y.abs());
        if (x - y).abs() > SCALAR_TOLERANCE * scale.max(f64::MIN_POSITIVE) && x != y {
            return Err(Error::EngineMismatch(format!("pair {k}: {x} vs {y}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub median_ms: f64,
    pub q1_ms: f64,
    pub q3_ms: f64,
}

impl Timing {
    pub fn iqr_ms(&self) -> f64 {
        self.q3_ms - self.q1_ms
    }

    /// Median and quartiles by linear interpolation between order statistics.
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Self {
            median_ms: q(0.5),
            q1_ms: q(0.25),
            q3_ms: q(0.75),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub spec: WorkloadSpec,
    pub n_documents: usize,
    pub naive: Timing,
    pub vectorised: Timing,
    pub speedup: f64,
    pub repetitions: usize,
    pub published: Option<PublishedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRow {
    pub spec: WorkloadSpec,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub rejected: Vec<RejectedRow>,
    pub repetitions: usize,
    pub threads: usize,
}

fn time_ms<F: FnMut() -> Result<PipelineOutput>>(reps: usize, mut f: F) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        let r = f()?;
        out.push(start.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(r);
    }
    Ok(out)
}

fn bench_one(spec: &WorkloadSpec, repetitions: usize) -> Result<BenchRow> {
    let corpus = generate_workload(spec)?;

    // Warm-up runs double as the correctness gate.
    let naive = run_naive(&corpus)?;
    let vectorised = run_vectorised(&corpus)?;
    check_equivalence(&naive, &vectorised)?;

    let naive = Timing::from_samples(&time_ms(repetitions, || run_naive(&corpus))?);
    let vectorised = Timing::from_samples(&time_ms(repetitions, || run_vectorised(&corpus))?);
    Ok(BenchRow {
        spec: *spec,
        n_documents: corpus.n_documents(),
        speedup: naive.median_ms / vectorised.median_ms,
        naive,
        vectorised,
        repetitions,
        published: published_row(spec.n_groups, spec.m_skills),
    })
}

/// Times every spec in order. Rows whose engines disagree, or whose spec
/// cannot be generated, are reported as rejected rather than timed.
pub fn run_benchmark(specs: &[WorkloadSpec], repetitions: usize) -> Result<BenchReport> {
    if repetitions < MIN_REPETITIONS {
        return Err(Error::InvalidSpec(format!(
            "at least {MIN_REPETITIONS} repetitions required, got {repetitions}"
        )));
    }
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for spec in specs {
        match bench_one(spec, repetitions) {
            Ok(row) => rows.push(row),
            Err(e @ (Error::EngineMismatch(_) | Error::InfeasibleSpec(_) | Error::InvalidSpec(_))) => {
                rejected.push(RejectedRow {
                    spec: *spec,
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(BenchReport {
        rows,
        rejected,
        repetitions,
        threads: rayon::current_num_threads(),
    })
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_default()
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "occupations,skills,docs_per_group,documents,naive_ms,naive_iqr_ms,vectorised_ms,vectorised_iqr_ms,speedup,repetitions,threads,published_naive_ms,published_vectorised_ms,published_speedup\n",
        );
        for r in &self.rows {
            let p = r.published;
            let _ = writeln!(
                out,
                "{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.2},{},{},{},{},{}",
                r.spec.n_groups,
                r.spec.m_skills,
                r.spec.docs_per_group,
                r.n_documents,
                r.naive.median_ms,
                r.naive.iqr_ms(),
                r.vectorised.median_ms,
                r.vectorised.iqr_ms(),
                r.speedup,
                r.repetitions,
                self.threads,
                opt(p.map(|p| p.naive_ms), 2),
                opt(p.map(|p| p.vectorised_ms), 2),
                opt(p.map(|p| p.speedup), 0),
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Median of {} runs after one warm-up run (published figures are means); dispersion is the interquartile range. Threads: {}.\n",
            self.repetitions, self.threads
        );
        let _ = writeln!(
            out,
            "| Occupations | Skills | Documents | Naive (ms) | Vectorised (ms) | Speedup | Published naive (ms) | Published vectorised (ms) | Published speedup |"
        );
        let _ = writeln!(out, "|---|---|---|---|---|---|---|---|---|");
        for r in &self.rows {
            let p = r.published;
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.3} ± {:.3} | {:.3} ± {:.3} | {:.1}× | {} | {} | {} |",
                r.spec.n_groups,
                r.spec.m_skills,
                r.n_documents,
                r.naive.median_ms,
                r.naive.iqr_ms(),
                r.vectorised.median_ms,
                r.vectorised.iqr_ms(),
                r.speedup,
                opt(p.map(|p| p.naive_ms), 2),
                opt(p.map(|p| p.vectorised_ms), 2),
                p.map(|p| format!("{:.0}×", p.speedup)).unwrap_or_default(),
            );
        }
        for r in &self.rejected {
            let _ = writeln!(
                out,
                "\nRejected {}×{}: {}",
                r.spec.n_groups, r.spec.m_skills, r.reason
            );
        }
        out
    }
}
