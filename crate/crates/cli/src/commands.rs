//! Subcommand implementations. Each writes its files plus `manifest.json`
//! into the configured output directory.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use tridiag_core::closed_forms::bernoulli_limit;
use tridiag_core::eigensolve::eigenvalues;
use tridiag_core::ensembles::{normalized_word_trace, sample_deformed, sample_simple};
use tridiag_core::pathmoments::{joint_moment, limit_moment, ColoredWord};
use tridiag_core::sigmaseq::{mesh, tail_second_moment, target_profile};
use tridiag_core::stieltjes::{
    arcsine_transform, compose_transform, empirical_transform, invert_density, particle_fixpoint,
    semicircle_transform, FixpointOptions, TransformGrid,
};
use tridiag_core::{EmpiricalMeasure, MomentSequence, SeedSpec, SigmaSequence, TridiagonalMatrix};

use crate::config::{OutputFormat, RunConfig};
use crate::output::{column_csv, fmt, table_csv, OutputDir};
use crate::validate::{self, mean_se, ValidationReport};

fn replica_seed(config: &RunConfig, r: usize) -> SeedSpec {
    SeedSpec::new(config.seed, r as u64)
}

/// The matrix for replica `r`: simple model, or deformed when a profile or
/// diagonal law is configured.
fn sample_matrix(config: &RunConfig, sigma: Option<&SigmaSequence>, r: usize) -> Result<TridiagonalMatrix> {
    let law = config.entry_law()?;
    let diag = config.diagonal_law()?;
    let seed = replica_seed(config, r);
    Ok(match (sigma, diag.as_ref()) {
        (None, None) => sample_simple(config.n, &law, seed)?,
        (sigma, diag) => {
            let ones;
            let sigma = match sigma {
                Some(s) => s,
                None => {
                    ones = SigmaSequence::new(config.n, vec![1.0; config.n.saturating_sub(1)])?;
                    &ones
                }
            };
            sample_deformed(config.n, &law, diag, sigma, seed)?
        }
    })
}

fn check_replicas(config: &RunConfig) -> Result<()> {
    if config.replicas == 0 {
        bail!("replicas must be >= 1");
    }
    if config.n == 0 {
        bail!("n must be >= 1");
    }
    Ok(())
}

#[derive(Serialize)]
struct Histogram {
    bin_edges: Vec<f64>,
    counts: Vec<usize>,
}

fn histogram(values: &[f64], bins: usize) -> Histogram {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = (hi - lo) / bins as f64;
    let bin_edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0; bins];
    for v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Histogram { bin_edges, counts }
}

pub fn cmd_sample_esd(config: &RunConfig) -> Result<Vec<String>> {
    check_replicas(config)?;
    let sigma = config.sigma()?;
    let spectra: Vec<Vec<f64>> = (0..config.replicas)
        .into_par_iter()
        .map(|r| Ok(eigenvalues(&sample_matrix(config, sigma.as_ref(), r)?, config.eig_tol)?.eigenvalues))
        .collect::<Result<_>>()?;
    let mut out = OutputDir::create(&config.out)?;
    for (r, ev) in spectra.iter().enumerate() {
        match config.format {
            OutputFormat::Csv => out.write_text(&format!("eigenvalues_{r}.csv"), &column_csv("eigenvalue", ev))?,
            OutputFormat::Json => out.write_json(&format!("eigenvalues_{r}.json"), ev)?,
        }
    }
    let pooled: Vec<f64> = spectra.iter().flatten().copied().collect();
    let moments = |xs: &[f64]| -> Vec<f64> {
        (1..=8).map(|k| xs.iter().map(|x| x.powi(k)).sum::<f64>() / xs.len() as f64).collect()
    };
    let per_replica: Vec<Vec<f64>> = spectra.iter().map(|ev| moments(ev)).collect();
    out.write_json(
        "summary.json",
        &json!({
            "n": config.n,
            "replicas": config.replicas,
            "histogram": histogram(&pooled, 50),
            "moments_1_to_8": moments(&pooled),
            "replica_moments_1_to_8": per_replica,
        }),
    )?;
    out.finish("sample-esd", config)
}

#[derive(Serialize)]
struct MomentRow {
    k: usize,
    predicted: Option<f64>,
    simulated_mean: f64,
    stderr: f64,
}

pub fn cmd_moments(config: &RunConfig) -> Result<Vec<String>> {
    check_replicas(config)?;
    let law = config.entry_law()?;
    let sigma = config.sigma()?;
    let traces: Vec<Vec<f64>> = (0..config.replicas)
        .into_par_iter()
        .map(|r| Ok(sample_matrix(config, sigma.as_ref(), r)?.normalized_power_traces(config.k_max)))
        .collect::<Result<_>>()?;
    // Limit moments are known for the simple and power-profile models.
    let alpha = match (&config.sigma_csv, &config.sigma_target) {
        (None, None) if config.diag_law.is_none() => Some(config.alpha.unwrap_or(0.0)),
        _ => None,
    };
    let mut rows = BTreeMap::new();
    for k in 1..=config.k_max {
        let xs: Vec<f64> = traces.iter().map(|t| t[k]).collect();
        let (mean, se) = mean_se(&xs);
        let predicted = match alpha {
            Some(a) => Some(limit_moment(k, &law, a)?),
            None => None,
        };
        rows.insert(
            k.to_string(),
            MomentRow {
                k,
                predicted,
                simulated_mean: mean,
                stderr: se,
            },
        );
    }
    let mut out = OutputDir::create(&config.out)?;
    out.write_json("moments.json", &rows)?;
    out.finish("moments", config)
}

pub fn cmd_fixpoint(config: &RunConfig) -> Result<Vec<String>> {
    let law = config.entry_law()?;
    let zs = config.z_points()?;
    if zs.is_empty() {
        bail!("fixpoint needs at least one --z");
    }
    let opts = FixpointOptions {
        population: config.population,
        iterations: config.iters,
        ..FixpointOptions::default()
    };
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for (i, z) in zs.iter().enumerate() {
        let seed = SeedSpec::new(config.seed, i as u64);
        let a = particle_fixpoint(&law, *z, &opts, seed.child(1))?;
        let b = particle_fixpoint(&law, *z, &opts, seed.child(2))?;
        let composed = compose_transform(&a.population, &b.population, &law, config.samples, seed.child(3))?;
        let mean = a.population.mean();
        let trace: Vec<String> = a.report.w1_trace.iter().map(|d| fmt(*d)).collect();
        rows.push(vec![
            fmt(z.re()),
            fmt(z.im()),
            fmt(mean.mean.re),
            fmt(mean.mean.im),
            fmt(composed.mean.re),
            fmt(composed.mean.im),
            fmt(composed.stderr),
            fmt(a.report.last_w1()),
            a.population.generation.to_string(),
            trace.join(";"),
        ]);
        traces.push(json!({
            "z": [z.re(), z.im()],
            "w1_trace": a.report.w1_trace,
            "contraction": a.report.contraction.iter().map(|s| json!({
                "generation": s.generation, "ratio": s.ratio, "stderr": s.stderr
            })).collect::<Vec<_>>(),
            "contraction_bound": a.report.contraction_bound,
            "hypothesis_holds": a.report.hypothesis_holds,
            "converged": a.report.converged,
        }));
    }
    let mut out = OutputDir::create(&config.out)?;
    out.write_text(
        "fixpoint.csv",
        &table_csv(
            &[
                "z_re", "z_im", "particle_re", "particle_im", "composed_re", "composed_im", "composed_se", "last_w1",
                "generations", "w1_trace",
            ],
            &rows,
        ),
    )?;
    out.write_json("convergence.json", &traces)?;
    out.finish("fixpoint", config)
}

/// Transform sources for inversion.
enum Source {
    Semicircle(f64),
    Arcsine(f64),
    Bernoulli(f64),
    Esd,
}

fn parse_source(s: &str) -> Result<Source> {
    let (kind, param) = s.split_once(':').unwrap_or((s, ""));
    let num = || -> Result<f64> { param.trim().parse().with_context(|| format!("bad parameter in source {s:?}")) };
    Ok(match kind {
        "semicircle" => Source::Semicircle(num()?),
        "arcsine" => Source::Arcsine(num()?),
        "bernoulli" => Source::Bernoulli(num()?),
        "esd" => Source::Esd,
        _ => bail!("unknown density source {s:?}; use semicircle:r, arcsine:r, bernoulli:p or esd"),
    })
}

pub fn cmd_density(config: &RunConfig) -> Result<Vec<String>> {
    let source = parse_source(config.source.as_deref().unwrap_or("semicircle:2"))?;
    let grid = match source {
        Source::Semicircle(r) | Source::Arcsine(r) => {
            let (lo, hi, pts) = config.grid_spec((-1.5 * r, 1.5 * r, 6001))?;
            let eta = config.eta.unwrap_or(1e-3);
            if matches!(source, Source::Semicircle(_)) {
                TransformGrid::evaluate(lo, hi, pts, eta, |z| semicircle_transform(z, r))?
            } else {
                TransformGrid::evaluate(lo, hi, pts, eta, |z| arcsine_transform(z, r))?
            }
        }
        Source::Bernoulli(p) => {
            let limit = bernoulli_limit(p, config.trunc_k)?;
            let (lo, hi, pts) = config.grid_spec((-3.0, 3.0, 6001))?;
            let eta = config.eta.unwrap_or(0.05 * 2.0);
            TransformGrid::evaluate(lo, hi, pts, eta, |z| Ok(limit.transform(z)))?
        }
        Source::Esd => {
            let sigma = config.sigma()?;
            let m = sample_matrix(config, sigma.as_ref(), 0)?;
            let mu: EmpiricalMeasure = eigenvalues(&m, config.eig_tol)?.to_measure();
            let lo = mu.atoms()[0].0;
            let hi = mu.atoms()[mu.len() - 1].0;
            let scale = (hi - lo).max(1e-3);
            let (glo, ghi, pts) = config.grid_spec((lo - 0.25 * scale, hi + 0.25 * scale, 2001))?;
            let eta = config.eta.unwrap_or(0.05 * 0.5 * scale);
            TransformGrid::evaluate(glo, ghi, pts, eta, |z| Ok(empirical_transform(&mu, z)))?
        }
    };
    let density = invert_density(&grid)?;
    let rows: Vec<Vec<String>> = density.points.iter().map(|(x, d)| vec![fmt(*x), fmt(*d)]).collect();
    let mut out = OutputDir::create(&config.out)?;
    out.write_text("density.csv", &table_csv(&["x", "density"], &rows))?;
    out.write_json("mass.json", &json!({ "eta": grid.eta(), "trapezoid_mass": density.mass }))?;
    out.finish("density", config)
}

pub fn cmd_sigma(config: &RunConfig) -> Result<Vec<String>> {
    let target = config.target()?;
    let (sigma, construction) = match &target {
        Some(t) => {
            let prof = target_profile(config.n, t)?;
            let info = json!({
                "epsilon": prof.epsilon,
                "lower": prof.lower,
                "upper": prof.upper,
                "delta": prof.delta,
                "core": prof.core,
                "bridges": prof.bridges,
                "padding": prof.padding,
                "padding_fraction": prof.padding_fraction(),
            });
            (prof.sigma, Some(info))
        }
        None => match config.sigma()? {
            Some(s) => (s, None),
            None => bail!("sigma needs --sigma-target, --sigma-csv or --alpha"),
        },
    };
    let ms = if config.tail_m.is_empty() { vec![0.0, 5.0] } else { config.tail_m.clone() };
    let tails: BTreeMap<String, f64> = ms.iter().map(|m| (fmt(*m), tail_second_moment(&sigma, *m))).collect();
    let w1 = match &target {
        Some(t) => Some(t.wasserstein1(&sigma.measure()?)),
        None => None,
    };
    let target_tails: Option<BTreeMap<String, f64>> =
        target.as_ref().map(|t| ms.iter().map(|m| (fmt(*m), t.tail_second_moment(*m))).collect());
    let mut out = OutputDir::create(&config.out)?;
    let mut csv = Vec::new();
    sigma.write_csv(&mut csv)?;
    out.write_text("sigma.csv", std::str::from_utf8(&csv)?)?;
    out.write_json(
        "diagnostics.json",
        &json!({
            "n": sigma.dim(),
            "target": target.as_ref().map(|t| t.to_string()),
            "mesh": mesh(&sigma),
            "mesh_bound": 1.0 / ((sigma.dim() + 1) as f64).ln(),
            "sup_abs": sigma.sup_abs(),
            "w1_to_target": w1,
            "tail_second_moments": tails,
            "target_tail_second_moments": target_tails,
            "construction": construction,
        }),
    )?;
    out.finish("sigma", config)
}

pub fn cmd_bernoulli(config: &RunConfig) -> Result<Vec<String>> {
    let p = match config.entry_law()? {
        tridiag_core::EntryDistribution::Bernoulli(p) => p,
        other => bail!("bernoulli needs --law bernoulli:p, got {other}"),
    };
    let limit = bernoulli_limit(p, config.trunc_k)?;
    let rows: Vec<Vec<String>> = limit.measure.atoms().iter().map(|(x, w)| vec![fmt(*x), fmt(*w)]).collect();
    let mut out = OutputDir::create(&config.out)?;
    out.write_text("atoms.csv", &table_csv(&["x", "weight"], &rows))?;
    out.write_json(
        "summary.json",
        &json!({
            "p": p,
            "truncation": config.trunc_k,
            "atoms": limit.measure.len(),
            "total_mass": limit.measure.total_mass(),
            "remainder_mass": limit.remainder_mass,
            "zero_mass_series": limit.zero_mass_series(),
            "zero_mass_limit": limit.zero_mass_limit(),
            "second_moment": limit.measure.moment(2),
        }),
    )?;
    out.finish("bernoulli", config)
}

pub fn cmd_joint_moments(config: &RunConfig) -> Result<Vec<String>> {
    check_replicas(config)?;
    let word = ColoredWord::from_letters(config.word.as_deref().unwrap_or("XYXY"))?;
    let colors = word.number_of_colors().max(1);
    let law = config.entry_law()?;
    let ms: Vec<&dyn MomentSequence> = (0..colors).map(|_| &law as &dyn MomentSequence).collect();
    let predicted = joint_moment(&word, &ms)?;
    let letters: Vec<usize> = word.colors().iter().map(|c| c - 1).collect();
    let traces: Vec<f64> = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let mats = (0..colors)
                .map(|c| Ok(sample_simple(config.n, &law, replica_seed(config, r).child(c as u64))?))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&TridiagonalMatrix> = mats.iter().collect();
            Ok(normalized_word_trace(&refs, &letters)?)
        })
        .collect::<Result<_>>()?;
    let (mean, se) = mean_se(&traces);
    let mut out = OutputDir::create(&config.out)?;
    out.write_json(
        "joint_moments.json",
        &json!({
            "word": word.colors(),
            "predicted": predicted,
            "simulated_mean": mean,
            "stderr": se,
            "replica_values": traces,
        }),
    )?;
    out.finish("joint-moments", config)
}

/// Runs the selected scenarios, printing one line per criterion.
pub fn cmd_validate(config: &RunConfig) -> Result<ValidationReport> {
    let criteria = validate::select(&config.scenarios)?;
    let report = validate::run_criteria(&criteria, config.seed, config.tolerance, |c, rows, notes| {
        let ok = rows.iter().all(|r| r.pass);
        println!("{} criterion {:>2}: {}", if ok { "PASS" } else { "FAIL" }, c.id, c.title);
        for r in rows {
            let rel = match r.relation {
                validate::Relation::Lt => "<",
                validate::Relation::Le => "<=",
            };
            println!(
                "    [{}] {} vs {}: {} = {:.6e} {rel} {:.6e}",
                if r.pass { "ok" } else { "FAIL" },
                r.method_a,
                r.method_b,
                r.statistic,
                r.value,
                r.tolerance
            );
        }
        for n in notes {
            println!("    note: {}", n.text);
        }
    })?;
    let mut out = OutputDir::create(&config.out)?;
    out.write_json("validation.json", &report)?;
    out.finish("validate", config)?;
    Ok(report)
}
