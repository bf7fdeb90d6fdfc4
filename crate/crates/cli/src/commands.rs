//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;
use skillspace::bench::{published_ladder, run_benchmark, tiny_ladder};
use skillspace::corpus::{Corpus, CorpusBuilder, DocKind, InputFormat};
use skillspace::engine::SkillSpace;
use skillspace::impact::{
    format_e4, impact_decompose_top_k, render_matrix_markdown, render_report_markdown,
    ImpactReport,
};
use skillspace::matrix_io::{load_theta, save_theta, write_matrix_csv, ThetaFiles};
use skillspace::oracle;
use skillspace::rca::rca_matrix;
use skillspace::simmatrix::{theta_from_rca, SkillSimilarityMatrix, ThetaScope};
use skillspace::skillset::{self, Norm, WeightedSkillSet};
use skillspace::Error;

use crate::output::{csv, json_with_threads, markdown_table, threads_footer};
use crate::{Cli, Command, GlobalOpts, Ladder, OutputFormat, ThetaMode, ThetaOpts};

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    skillspace::augment::check_alpha(g.alpha)?;
    let text = match &cli.command {
        Command::Ingest {
            inputs,
            education,
            out,
            input_format,
        } => ingest(g, inputs, education, out, *input_format)?,
        Command::Theta { corpus, theta, export } => theta_cmd(g, corpus, theta, export.as_deref())?,
        Command::Sss { corpus, a, b, theta } => sss_cmd(g, corpus, a, b, theta)?,
        Command::Align {
            corpus,
            a,
            b,
            top_k,
            theta,
        } => align_cmd(g, corpus, a, b, *top_k, theta)?,
        Command::Combine {
            corpus,
            degree,
            cert,
            out,
        } => combine_cmd(g, corpus, degree, cert, out.as_deref())?,
        Command::Impact {
            corpus,
            degree,
            cert,
            role,
            matrix,
            top_k,
            theta,
        } => impact_cmd(g, corpus, degree, cert, role, *matrix, *top_k, theta)?,
        Command::Bench {
            ladder,
            reps,
            docs_per_group,
        } => bench_cmd(g, *ladder, *reps, *docs_per_group)?,
        Command::Verify { corpus, theta } => verify_cmd(g, corpus, theta)?,
    };
    print!("{text}");
    Ok(())
}

fn resolve_format(path: &Path, explicit: Option<InputFormat>) -> anyhow::Result<InputFormat> {
    match explicit.or_else(|| InputFormat::from_path(path)) {
        Some(f) => Ok(f),
        None => bail!(
            "cannot infer input format of {}; pass --input-format jsonl|csv",
            path.display()
        ),
    }
}

#[derive(Serialize)]
struct IngestSummary {
    documents: usize,
    skills: usize,
    groups: usize,
    corpus_hash: String,
}

fn ingest(
    g: &GlobalOpts,
    inputs: &[PathBuf],
    education: &[PathBuf],
    out: &Path,
    input_format: Option<InputFormat>,
) -> anyhow::Result<String> {
    let mut builder = CorpusBuilder::new();
    let files = inputs
        .iter()
        .map(|p| (p, DocKind::Market))
        .chain(education.iter().map(|p| (p, DocKind::Education)));
    for (path, kind) in files {
        let format = resolve_format(path, input_format)?;
        builder
            .add_file(path, format, kind)
            .with_context(|| format!("reading {}", path.display()))?;
    }
    let corpus = builder.build();
    corpus.save_dir(out)?;
    let summary = IngestSummary {
        documents: corpus.n_documents(),
        skills: corpus.n_skills(),
        groups: corpus.group_labels().len(),
        corpus_hash: corpus.content_hash()?,
    };
    Ok(match g.format {
        OutputFormat::Json => json_with_threads(&summary)?,
        _ => format!(
            "{} documents, {} skills, {} groups\n",
            summary.documents, summary.skills, summary.groups
        ),
    })
}

fn load_corpus_dir(dir: &Path) -> anyhow::Result<Corpus> {
    Corpus::load_dir(dir).with_context(|| format!("loading corpus from {}", dir.display()))
}

fn scope(opts: &ThetaOpts) -> ThetaScope {
    if opts.pool_theta {
        ThetaScope::Pooled
    } else {
        ThetaScope::Market
    }
}

fn default_cache_base(corpus_dir: &Path, scope: ThetaScope) -> PathBuf {
    corpus_dir.join(match scope {
        ThetaScope::Market => "theta-market",
        ThetaScope::Pooled => "theta-pooled",
    })
}

/// Loads a skill space, reusing or refreshing the Θ cache.
///
/// A stale cache at the default location is rebuilt; a stale cache at an
/// explicit `--theta-cache` path is reported as an error.
fn load_space(g: &GlobalOpts, corpus_dir: &Path, opts: &ThetaOpts) -> anyhow::Result<SkillSpace> {
    let corpus = load_corpus_dir(corpus_dir)?;
    if opts.theta == ThetaMode::Identity {
        let theta = SkillSimilarityMatrix::identity(corpus.n_skills());
        return Ok(SkillSpace::with_theta(corpus, g.engine, theta));
    }
    let scope = scope(opts);
    let hash = corpus.content_hash()?;
    let explicit = opts.theta_cache.is_some();
    let files = ThetaFiles::new(
        &opts
            .theta_cache
            .clone()
            .unwrap_or_else(|| default_cache_base(corpus_dir, scope)),
    );
    if files.exists() {
        match load_theta(&files, corpus.vocabulary(), &hash, scope, opts.threshold) {
            Ok(theta) => return Ok(SkillSpace::with_theta(corpus, g.engine, theta)),
            Err(e @ Error::CacheMismatch(_)) if explicit => return Err(e.into()),
            Err(Error::CacheMismatch(reason)) => {
                eprintln!("note: rebuilding stale theta cache ({reason})");
            }
            Err(e) => return Err(e.into()),
        }
    }
    let space = SkillSpace::build(corpus, g.engine, scope, opts.threshold)?;
    save_theta(
        &files,
        &space.theta,
        space.corpus.vocabulary(),
        &hash,
        scope,
        opts.threshold,
    )?;
    Ok(space)
}

#[derive(Serialize)]
struct ThetaSummary {
    skills: usize,
    scope: ThetaScope,
    threshold: f64,
    nonzero_off_diagonal: usize,
    unused_skills: usize,
}

fn theta_cmd(g: &GlobalOpts, corpus: &Path, opts: &ThetaOpts, export: Option<&Path>) -> anyhow::Result<String> {
    let space = load_space(g, corpus, opts)?;
    let names = space.corpus.vocabulary().names();
    if let Some(path) = export {
        write_matrix_csv(fs::File::create(path)?, names, names, &space.theta.data)?;
    }
    let m = space.theta.n_skills();
    let summary = ThetaSummary {
        skills: m,
        scope: scope(opts),
        threshold: opts.threshold,
        nonzero_off_diagonal: space
            .theta
            .data
            .indexed_iter()
            .filter(|&((i, k), &v)| i != k && v != 0.0)
            .count(),
        unused_skills: space.theta.skill_frequencies.iter().filter(|&&q| q == 0.0).count(),
    };
    Ok(match g.format {
        OutputFormat::Json => json_with_threads(&summary)?,
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_matrix_csv(&mut buf, names, names, &space.theta.data)?;
            String::from_utf8(buf)?
        }
        OutputFormat::Markdown => {
            markdown_table(
                &["skills", "scope", "threshold", "non-zero off-diagonal", "unused skills"],
                &[vec![
                    summary.skills.to_string(),
                    format!("{:?}", summary.scope).to_lowercase(),
                    summary.threshold.to_string(),
                    summary.nonzero_off_diagonal.to_string(),
                    summary.unused_skills.to_string(),
                ]],
            ) + &threads_footer()
        }
    })
}

#[derive(Serialize)]
struct SssRow {
    a: String,
    b: String,
    norm: Norm,
    value: f64,
}

fn sss_cmd(g: &GlobalOpts, corpus: &Path, a: &[String], b: &[String], opts: &ThetaOpts) -> anyhow::Result<String> {
    let space = load_space(g, corpus, opts)?;
    let mut rows = Vec::new();
    for ga in a {
        let wa = space.weights(ga)?;
        for gb in b {
            let wb = space.weights(gb)?;
            rows.push(SssRow {
                a: ga.clone(),
                b: gb.clone(),
                norm: g.norm,
                value: space.sss(&wa, &wb, g.norm)?,
            });
        }
    }
    Ok(match g.format {
        OutputFormat::Json => json_with_threads(&rows)?,
        OutputFormat::Csv => csv(
            &["a", "b", "norm", "sss"],
            &rows
                .iter()
                .map(|r| vec![r.a.clone(), r.b.clone(), r.norm.to_string(), r.value.to_string()])
                .collect::<Vec<_>>(),
        ),
        OutputFormat::Markdown => {
            markdown_table(
                &["A", "B", "norm", "SSS (×10⁻⁴)"],
                &rows
                    .iter()
                    .map(|r| vec![r.a.clone(), r.b.clone(), r.norm.to_string(), format_e4(r.value)])
                    .collect::<Vec<_>>(),
            ) + &threads_footer()
        }
    })
}

#[derive(Serialize)]
struct NamedAlignment {
    skill: String,
    score: f64,
}

fn named_rows(space: &SkillSpace, rows: &[skillspace::skillset::AlignmentRow]) -> Vec<NamedAlignment> {
    rows.iter()
        .map(|r| NamedAlignment {
            skill: space.corpus.vocabulary().name(r.skill).unwrap_or("?").to_string(),
            score: r.score,
        })
        .collect()
}

fn alignment_output(g: &GlobalOpts, title: &str, rows: &[NamedAlignment]) -> anyhow::Result<String> {
    Ok(match g.format {
        OutputFormat::Json => json_with_threads(&rows)?,
        OutputFormat::Csv => csv(
            &["skill", "score"],
            &rows.iter().map(|r| vec![r.skill.clone(), r.score.to_string()]).collect::<Vec<_>>(),
        ),
        OutputFormat::Markdown => {
            format!("{title}\n\n")
                + &markdown_table(
                    &["skill", "alignment score"],
                    &rows
                        .iter()
                        .map(|r| vec![r.skill.clone(), format!("{:.4}", r.score)])
                        .collect::<Vec<_>>(),
                )
                + &threads_footer()
        }
    })
}

fn align_cmd(g: &GlobalOpts, corpus: &Path, a: &str, b: &str, k: usize, opts: &ThetaOpts) -> anyhow::Result<String> {
    let space = load_space(g, corpus, opts)?;
    let wa = space.weights(a)?;
    let wb = space.weights(b)?;
    let rows = space.engine.top_alignments(&wa, &wb, &space.theta, k);
    alignment_output(g, &format!("{a} → {b}"), &named_rows(&space, &rows))
}

fn combine_cmd(g: &GlobalOpts, corpus_dir: &Path, degree: &str, cert: &str, out: Option<&Path>) -> anyhow::Result<String> {
    let corpus = load_corpus_dir(corpus_dir)?;
    let rca = g.engine.rca(&corpus);
    let s1 = g.engine.weights(&corpus, &rca, degree)?;
    let s2 = g.engine.weights(&corpus, &rca, cert)?;
    let combined = skillspace::augment::combine(&s1, &s2, g.alpha)?;
    let file = combined.to_file(corpus.vocabulary());
    let json = serde_json::to_string_pretty(&file)? + "\n";
    if let Some(path) = out {
        fs::write(path, &json)?;
    }
    for w in &combined.params.warnings {
        eprintln!("warning: {w:?}");
    }
    Ok(match g.format {
        OutputFormat::Json => json,
        OutputFormat::Csv => csv(
            &["skill", "weight", "origin"],
            &file
                .weights
                .iter()
                .map(|(name, w)| {
                    let origin = file
                        .origin
                        .as_ref()
                        .and_then(|o| o.get(name))
                        .map(|o| serde_json::to_value(o).unwrap().as_str().unwrap_or("").to_string())
                        .unwrap_or_default();
                    vec![name.clone(), w.to_string(), origin]
                })
                .collect::<Vec<_>>(),
        ),
        OutputFormat::Markdown => {
            let p = &combined.params;
            let mut text = format!(
                "{}: {} skills (a = {:.6}, b = {:.6}, band [{:.6}, {:.6}])\n\n",
                combined.set.label(),
                combined.set.len(),
                p.a,
                p.b_coeff,
                p.band().0,
                p.band().1
            );
            text += &markdown_table(
                &["skill", "weight", "origin"],
                &file
                    .weights
                    .iter()
                    .map(|(name, w)| {
                        let origin = file
                            .origin
                            .as_ref()
                            .and_then(|o| o.get(name))
                            .map(|o| format!("{o:?}"))
                            .unwrap_or_default();
                        vec![name.clone(), format!("{w:.6}"), origin]
                    })
                    .collect::<Vec<_>>(),
            );
            text
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn impact_cmd(
    g: &GlobalOpts,
    corpus: &Path,
    degrees: &[String],
    cert: &str,
    roles: &[String],
    matrix: bool,
    k: usize,
    opts: &ThetaOpts,
) -> anyhow::Result<String> {
    let space = load_space(g, corpus, opts)?;
    let s2 = space.weights(cert)?;
    let degree_sets = degrees.iter().map(|d| space.weights(d)).collect::<Result<Vec<_>, _>>()?;
    let mut reports: Vec<Vec<ImpactReport>> = Vec::new();
    for role in roles {
        let t = space.weights(role)?;
        let row = degree_sets
            .iter()
            .map(|s1| impact_decompose_top_k(s1, &s2, &t, &space.theta, g.alpha, k))
            .collect::<Result<Vec<_>, _>>()?;
        reports.push(row);
    }
    let flat: Vec<&ImpactReport> = reports.iter().flatten().collect();
    let vocabulary = space.corpus.vocabulary();
    Ok(match g.format {
        OutputFormat::Json => json_with_threads(&flat)?,
        OutputFormat::Csv => csv(
            &["role", "degree", "cert", "baseline", "enhanced", "C", "C_prime", "cert_term", "percentage_improvement"],
            &flat
                .iter()
                .map(|r| {
                    vec![
                        r.role_label.clone(),
                        r.degree_label.clone(),
                        r.cert_label.clone(),
                        r.baseline_theta.to_string(),
                        r.enhanced_theta.to_string(),
                        r.c.to_string(),
                        r.c_prime.to_string(),
                        r.cert_term.to_string(),
                        r.percentage_improvement.map(|p| p.to_string()).unwrap_or_else(|| "n/a".into()),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        OutputFormat::Markdown => {
            let mut text = String::new();
            if matrix {
                text += &render_matrix_markdown(roles, degrees, cert, &reports);
            }
            for r in &flat {
                text += &render_report_markdown(r, vocabulary);
                text.push('\n');
            }
            text + &threads_footer()
        }
    })
}

fn bench_cmd(g: &GlobalOpts, ladder: Ladder, reps: usize, docs_per_group: usize) -> anyhow::Result<String> {
    let specs = match ladder {
        Ladder::Published => published_ladder(docs_per_group, g.seed),
        Ladder::Tiny => tiny_ladder(g.seed),
    };
    let report = run_benchmark(&specs, reps)?;
    Ok(match g.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Markdown => report.to_markdown(),
    })
}

#[derive(Serialize)]
struct VerifyLine {
    check: String,
    max_abs_diff: f64,
    tolerance: f64,
    pass: bool,
}

fn max_abs_diff(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 { 0.0 } else { (x - y).abs() / scale }
        })
        .fold(0.0, f64::max)
}

fn verify_cmd(g: &GlobalOpts, corpus_dir: &Path, opts: &ThetaOpts) -> anyhow::Result<String> {
    const TOL: f64 = 1e-12;
    let corpus = load_corpus_dir(corpus_dir)?;
    let theta_corpus = match scope(opts) {
        ThetaScope::Market => corpus.market_view(),
        ThetaScope::Pooled => corpus.clone(),
    };

    let rca_v = rca_matrix(&corpus.presence_matrix());
    let rca_n = oracle::naive_rca(&corpus);
    let theta_v = theta_from_rca(&rca_matrix(&theta_corpus.presence_matrix()), opts.threshold)?;
    let theta_n = oracle::naive_theta(&oracle::naive_effective_use(&oracle::naive_rca(&theta_corpus), opts.threshold)?);

    let labels = corpus.group_labels();
    let sets_v = labels
        .iter()
        .map(|l| skillset::skill_weights(&corpus, &rca_v, l))
        .collect::<Result<Vec<WeightedSkillSet>, _>>()?;
    let sets_n = labels
        .iter()
        .map(|l| oracle::naive_skill_weights(&corpus, &rca_n, l))
        .collect::<Result<Vec<WeightedSkillSet>, _>>()?;

    let mut lines = vec![
        VerifyLine {
            check: "rca".into(),
            max_abs_diff: max_abs_diff(rca_v.data.iter().copied(), rca_n.data.iter().copied()),
            tolerance: TOL,
            pass: false,
        },
        VerifyLine {
            check: "theta".into(),
            max_abs_diff: max_abs_diff(theta_v.data.iter().copied(), theta_n.data.iter().copied()),
            tolerance: TOL,
            pass: false,
        },
    ];
    let weight_diff = sets_v
        .iter()
        .zip(&sets_n)
        .map(|(a, b)| {
            if a.weights().keys().ne(b.weights().keys()) {
                f64::INFINITY
            } else {
                max_abs_diff(a.weights().values().copied(), b.weights().values().copied())
            }
        })
        .fold(0.0, f64::max);
    lines.push(VerifyLine {
        check: "weights".into(),
        max_abs_diff: weight_diff,
        tolerance: TOL,
        pass: false,
    });
    for norm in [Norm::Weighted, Norm::Cosine] {
        let mut v = Vec::new();
        let mut n = Vec::new();
        for i in 0..sets_v.len() {
            for k in 0..sets_v.len() {
                v.push(skillset::sss(&sets_v[i], &sets_v[k], &theta_v, norm)?);
                n.push(oracle::naive_sss(&sets_n[i], &sets_n[k], &theta_n, norm)?);
            }
        }
        lines.push(VerifyLine {
            check: format!("sss {norm} (relative)"),
            max_abs_diff: max_rel_diff(&v, &n),
            tolerance: TOL,
            pass: false,
        });
    }
    for line in &mut lines {
        line.pass = line.max_abs_diff <= line.tolerance;
    }
    let all_pass = lines.iter().all(|l| l.pass);

    let text = match g.format {
        OutputFormat::Json => json_with_threads(&lines)?,
        OutputFormat::Csv => csv(
            &["check", "max_diff", "tolerance", "pass"],
            &lines
                .iter()
                .map(|l| vec![l.check.clone(), l.max_abs_diff.to_string(), l.tolerance.to_string(), l.pass.to_string()])
                .collect::<Vec<_>>(),
        ),
        OutputFormat::Markdown => {
            markdown_table(
                &["check", "max difference", "tolerance", "result"],
                &lines
                    .iter()
                    .map(|l| {
                        vec![
                            l.check.clone(),
                            format!("{:.3e}", l.max_abs_diff),
                            format!("{:.0e}", l.tolerance),
                            if l.pass { "pass".into() } else { "FAIL".into() },
                        ]
                    })
                    .collect::<Vec<_>>(),
            ) + &threads_footer()
        }
    };
    if !all_pass {
        print!("{text}");
        return Err(Error::EngineMismatch("vectorised and naive results differ".into()).into());
    }
    Ok(text)
}
