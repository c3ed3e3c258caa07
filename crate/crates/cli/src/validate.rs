//! Cross-method validation: each criterion compares two routes to the same
//! quantity and reports one row per comparison.

use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use tridiag_core::closed_forms::{arcsine_cdf, bernoulli_limit, toeplitz_eigenvalues};
use tridiag_core::eigensolve::{char_poly_eval, eigenvalues, hoffman_wielandt_gap};
use tridiag_core::ensembles::{normalized_word_trace, sample_alpha, sample_simple};
use tridiag_core::measure::EmpiricalMeasure;
use tridiag_core::pathmoments::{central_binomial, joint_moment, limit_moment, limit_moment_exact, ColoredWord};
use tridiag_core::sigmaseq::{commutator_bound, commutator_hs_norm, mesh, power_profile, tail_second_moment, target_profile};
use tridiag_core::stieltjes::{
    self, arcsine_transform, audit, branch_sqrt, compose_transform, corner_recursion, empirical_transform,
    particle_fixpoint, scale_mixture_transform, semicircle_transform, FixpointOptions,
};
use tridiag_core::{ComplexUHP, EntryDistribution, MomentSequence, SeedSpec, TargetLaw, TridiagonalMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub criterion: u32,
    pub method_a: String,
    pub method_b: String,
    pub statistic: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Note {
    pub criterion: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub scenarios: Vec<String>,
    pub rows: Vec<ValidationRow>,
    /// Diagnostics that do not take part in pass/fail.
    pub notes: Vec<Note>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn criterion_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.rows.iter().map(|r| r.criterion).collect();
        ids.dedup();
        ids
    }

    pub fn criterion_passes(&self, id: u32) -> bool {
        self.rows.iter().filter(|r| r.criterion == id).all(|r| r.pass)
    }
}

pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub scenario: &'static str,
    run: fn(&mut Context) -> Result<()>,
}

pub struct Context {
    seed: u64,
    tolerance_override: Option<f64>,
    criterion: u32,
    rows: Vec<ValidationRow>,
    notes: Vec<Note>,
}

impl Context {
    fn check(&mut self, a: &str, b: &str, statistic: &str, value: f64, rel: Relation, tolerance: f64) {
        let tolerance = self.tolerance_override.unwrap_or(tolerance);
        let pass = match rel {
            Relation::Lt => value < tolerance,
            Relation::Le => value <= tolerance,
        };
        self.rows.push(ValidationRow {
            criterion: self.criterion,
            method_a: a.into(),
            method_b: b.into(),
            statistic: statistic.into(),
            value,
            relation: rel,
            tolerance,
            pass,
        });
    }

    fn note(&mut self, text: String) {
        self.notes.push(Note {
            criterion: self.criterion,
            text,
        });
    }

    fn seed(&self, stream: u64) -> SeedSpec {
        SeedSpec::new(self.seed, 0).child(((self.criterion as u64) << 32) | stream)
    }
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "Toeplitz eigenvalues, N=2000", scenario: "arcsine", run: toeplitz_oracle },
    Criterion { id: 2, title: "arcsine convergence, N=2000", scenario: "arcsine", run: arcsine_convergence },
    Criterion { id: 3, title: "limit moments vs simulated traces", scenario: "arcsine", run: moments_vs_simulation },
    Criterion { id: 4, title: "exact path-sum identities", scenario: "arcsine", run: exact_identities },
    Criterion { id: 5, title: "particle fixed point at z=3i", scenario: "fixpoint", run: fixed_point },
    Criterion { id: 6, title: "corner recursion vs determinant ratio", scenario: "resolvent", run: resolvent_routes },
    Criterion { id: 7, title: "scale mixture, alpha=1", scenario: "mixture", run: scale_mixture },
    Criterion { id: 8, title: "quantile profile, Exponential(1)", scenario: "sigma", run: quantile_profile_check },
    Criterion { id: 9, title: "uniform integrability of the profile", scenario: "sigma", run: uniform_integrability },
    Criterion { id: 10, title: "Bernoulli mixture limit", scenario: "bernoulli", run: bernoulli_mixture },
    Criterion { id: 11, title: "Hoffman-Wielandt inequality", scenario: "perturbation", run: hoffman_wielandt },
    Criterion { id: 12, title: "diagonal negligibility", scenario: "perturbation", run: diagonal_negligibility },
    Criterion { id: 13, title: "joint colored-path moments", scenario: "joint", run: joint_moments },
    Criterion { id: 14, title: "commutator decay", scenario: "sigma", run: commutator_decay },
    Criterion { id: 15, title: "half-plane mapping", scenario: "half-plane", run: half_plane },
];

pub const SCENARIOS: &[&str] = &[
    "arcsine",
    "fixpoint",
    "resolvent",
    "mixture",
    "sigma",
    "bernoulli",
    "perturbation",
    "joint",
    "half-plane",
    "all",
];

/// Criteria selected by scenario names, in id order.
pub fn select(scenarios: &[String]) -> Result<Vec<&'static Criterion>> {
    if scenarios.is_empty() {
        bail!("no scenarios");
    }
    for s in scenarios {
        if !SCENARIOS.contains(&s.as_str()) {
            bail!("unknown scenario {s:?}; known: {}", SCENARIOS.join(", "));
        }
    }
    let all = scenarios.iter().any(|s| s == "all");
    Ok(CRITERIA
        .iter()
        .filter(|c| all || scenarios.iter().any(|s| s == c.scenario))
        .collect())
}

/// Runs the given criteria in order. The half-plane tally is reset first so
/// criterion 15 covers exactly the evaluations of this run.
pub fn run_criteria(
    criteria: &[&Criterion],
    seed: u64,
    tolerance_override: Option<f64>,
    mut on_done: impl FnMut(&Criterion, &[ValidationRow], &[Note]),
) -> Result<ValidationReport> {
    audit::reset();
    let mut ctx = Context {
        seed,
        tolerance_override,
        criterion: 0,
        rows: vec![],
        notes: vec![],
    };
    let mut scenarios: Vec<String> = vec![];
    for c in criteria {
        if !scenarios.iter().any(|s| s == c.scenario) {
            scenarios.push(c.scenario.to_string());
        }
        ctx.criterion = c.id;
        let (r0, n0) = (ctx.rows.len(), ctx.notes.len());
        if let Err(e) = (c.run)(&mut ctx) {
            ctx.check("criterion", "error", &format!("error: {e:#}"), 1.0, Relation::Lt, 0.0);
            ctx.rows.last_mut().unwrap().pass = false;
        }
        on_done(c, &ctx.rows[r0..], &ctx.notes[n0..]);
    }
    let pass = ctx.rows.iter().all(|r| r.pass);
    Ok(ValidationReport {
        scenarios,
        rows: ctx.rows,
        notes: ctx.notes,
        pass,
    })
}

pub fn run_scenarios(scenarios: &[String], seed: u64, tolerance_override: Option<f64>) -> Result<ValidationReport> {
    let criteria = select(scenarios)?;
    run_criteria(&criteria, seed, tolerance_override, |_, _, _| {})
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn uhp(re: f64, im: f64) -> ComplexUHP {
    ComplexUHP::new(re, im).expect("point in the upper half-plane")
}

fn law(spec: &str) -> EntryDistribution {
    spec.parse().expect("built-in law spec")
}

fn esd(m: &TridiagonalMatrix, tol: f64) -> Result<EmpiricalMeasure> {
    Ok(eigenvalues(m, tol)?.to_measure())
}

const EIG_TOL: f64 = 1e-10;

fn toeplitz_oracle(ctx: &mut Context) -> Result<()> {
    let n = 2000;
    let m = sample_simple(n, &law("constant:1"), ctx.seed(0))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let start = Instant::now();
    let ev = pool.install(|| eigenvalues(&m, EIG_TOL))?;
    let seconds = start.elapsed().as_secs_f64();
    let mut want: Vec<f64> = (1..=n).map(|j| 2.0 * (j as f64 * PI / (n as f64 + 1.0)).cos()).collect();
    want.sort_by(f64::total_cmp);
    let err = ev.eigenvalues.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ctx.check("bisection", "2cos(j pi/(N+1))", "max |lambda_j - closed form|", err, Relation::Lt, 1e-8);
    ctx.check("bisection", "wall clock", "seconds, single thread", seconds, Relation::Lt, 30.0);
    Ok(())
}

fn arcsine_convergence(ctx: &mut Context) -> Result<()> {
    let m = sample_simple(2000, &law("constant:1"), ctx.seed(0))?;
    let mu = esd(&m, EIG_TOL)?;
    let ks = mu.ks_to_cdf(|x| arcsine_cdf(x, 2.0));
    ctx.check("ESD N=2000", "arcsine(-2,2) CDF", "KS", ks, Relation::Lt, 0.02);
    Ok(())
}

fn moments_vs_simulation(ctx: &mut Context) -> Result<()> {
    let (n, replicas) = (4000, 20);
    for (i, spec) in ["gaussian:0,1", "bernoulli:0.5"].into_iter().enumerate() {
        let entry = law(spec);
        let traces: Vec<Vec<f64>> = (0..replicas)
            .into_par_iter()
            .map(|r| Ok(sample_simple(n, &entry, ctx.seed(((i as u64) << 16) | r))?.normalized_power_traces(8)))
            .collect::<Result<_>>()?;
        for k in [2usize, 4, 6, 8] {
            let xs: Vec<f64> = traces.iter().map(|t| t[k]).collect();
            let (mean, se) = mean_se(&xs);
            let pred = limit_moment(k, &entry, 0.0)?;
            ctx.check(
                &format!("path sum L_{k} ({spec})"),
                &format!("mean tr X^{k}/N, {replicas} replicas N={n}"),
                "|difference| vs 3 SE",
                (pred - mean).abs(),
                Relation::Le,
                3.0 * se,
            );
        }
    }
    Ok(())
}

fn rational(n: i128, d: i128) -> num_rational::Ratio<i128> {
    num_rational::Ratio::new(n, d)
}

fn exact_identities(ctx: &mut Context) -> Result<()> {
    let (m2, m4) = (rational(3, 2), rational(7, 3));
    let table = vec![rational(1, 1), rational(0, 1), m2, rational(0, 1), m4];
    let zero = rational(0, 1);
    let two = limit_moment_exact(2, &table, zero)?;
    let four = limit_moment_exact(4, &table, zero)?;
    let bad2 = (two != rational(2, 1) * m2) as u32 as f64;
    let bad4 = (four != rational(4, 1) * m2 * m2 + rational(2, 1) * m4) as u32 as f64;
    ctx.check("L_2 path sum", "2 m_2", "mismatches (exact rational)", bad2, Relation::Le, 0.0);
    ctx.check("L_4 path sum", "4 m_2^2 + 2 m_4", "mismatches (exact rational)", bad4, Relation::Le, 0.0);
    let ones = vec![rational(1, 1); 13];
    let mut bad = 0;
    let mut tried = 0;
    for alpha in [rational(0, 1), rational(1, 2), rational(1, 1), rational(2, 1), rational(7, 3)] {
        for j in 0..=6i128 {
            let got = limit_moment_exact(2 * j as usize, &ones, alpha)?;
            let want = rational(central_binomial(j as usize) as i128, 1) / (rational(2 * j, 1) * alpha + rational(1, 1));
            bad += (got != want) as u32;
            tried += 1;
        }
    }
    ctx.check(
        "L_2j path sum, m = 1",
        &format!("C(2j,j)/(2 alpha j + 1), {tried} cases"),
        "mismatches (exact rational)",
        bad as f64,
        Relation::Le,
        0.0,
    );
    Ok(())
}

fn fixed_point(ctx: &mut Context) -> Result<()> {
    let z = uhp(0.0, 3.0);
    let entry = law("constant:1");
    let opts = FixpointOptions::default();
    let run1 = particle_fixpoint(&entry, z, &opts, ctx.seed(1))?;
    let run2 = particle_fixpoint(&entry, z, &opts, ctx.seed(2))?;
    let zv = z.value();
    let scalar = (zv - branch_sqrt(zv * zv - 4.0)) / 2.0;
    let mean = run1.population.mean().mean;
    ctx.check("particle mean", "(z - sqrt(z^2-4))/2", "|difference|", (mean - scalar).norm(), Relation::Lt, 2e-2);
    let composed = compose_transform(&run1.population, &run2.population, &entry, opts.population, ctx.seed(3))?;
    let arcsine = arcsine_transform(z, 2.0)?;
    ctx.check(
        "composed transform",
        "1/sqrt(z^2-4)",
        "|difference|",
        (composed.mean - arcsine).norm(),
        Relation::Lt,
        2e-2,
    );
    let worst = run1
        .report
        .contraction
        .iter()
        .chain(&run2.report.contraction)
        .map(|s| s.ratio - 3.0 * s.stderr)
        .fold(f64::NEG_INFINITY, f64::max);
    let steps = run1.report.contraction.len() + run2.report.contraction.len();
    if steps == 0 {
        bail!("no contraction steps were measured");
    }
    ctx.check(
        &format!("coupled W1 ratios ({steps} steps)"),
        "E b^2/(Im z)^2 = 1/9",
        "max(ratio - 3 sigma)",
        worst,
        Relation::Le,
        run1.report.contraction_bound,
    );
    let gens = run1.population.generation.max(run2.population.generation) as f64;
    ctx.check("particle iterations", "budget", "generations", gens, Relation::Le, 200.0);
    ctx.note(format!(
        "generation W1 traces: {:?} / {:?}",
        run1.report.w1_trace, run2.report.w1_trace
    ));
    Ok(())
}

fn resolvent_routes(ctx: &mut Context) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(0).master_seed);
    let gaussian = law("gaussian:0,1");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let bs = gaussian.sample_n(&mut rng, 199);
        let z = uhp(rng.random_range(-3.0..3.0), 10f64.powf(rng.random_range(-2.0..0.5)));
        let mut off = bs.clone();
        off.reverse();
        let m = TridiagonalMatrix::from_offdiag(off)?;
        let a = corner_recursion(&bs, z);
        let b = char_poly_eval(&m, z.value()).corner_ratio();
        worst = worst.max((a - b).norm() / b.norm());
    }
    ctx.check(
        "continued fraction",
        "P_{N-1}/P_N, 100 cases N=200",
        "max relative difference",
        worst,
        Relation::Le,
        1e-10,
    );
    Ok(())
}

fn scale_mixture(ctx: &mut Context) -> Result<()> {
    let (n, replicas) = (4000, 20);
    let entry = law("constant:1");
    let traces: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| Ok(sample_alpha(n, 1.0, &entry, ctx.seed(r))?.normalized_power_traces(8)))
        .collect::<Result<_>>()?;
    for k in [2usize, 4, 6, 8] {
        let xs: Vec<f64> = traces.iter().map(|t| t[k]).collect();
        let (mean, se) = mean_se(&xs);
        let pred = central_binomial(k / 2) as f64 / (k as f64 + 1.0);
        ctx.check(
            &format!("C({k},{})/{}", k / 2, k + 1),
            &format!("mean tr X^{k}/N, {replicas} replicas N={n}"),
            "|difference| vs 3 SE",
            (pred - mean).abs(),
            Relation::Le,
            3.0 * se,
        );
        if se == 0.0 {
            ctx.note(format!(
                "k={k}: constant entries make every replica identical (SE = 0); \
                 deterministic finite-N gap {:.3e} = {:.3}/N",
                (pred - mean).abs(),
                (pred - mean).abs() * n as f64
            ));
        }
    }
    let z = uhp(1.0, 1.0);
    let toeplitz = esd(&sample_simple(2000, &entry, ctx.seed(100))?, EIG_TOL)?;
    let grid: Vec<f64> = (0..2000).map(|i| (i as f64 + 0.5) / 2000.0).collect();
    let t_law = EmpiricalMeasure::from_samples(&grid)?;
    let mixture = scale_mixture_transform(&toeplitz, &t_law, z);
    let simulated = esd(&sample_alpha(n, 1.0, &entry, ctx.seed(101))?, EIG_TOL)?;
    let direct = empirical_transform(&simulated, z);
    ctx.check(
        "mixture sum (Toeplitz N=2000 x grid)",
        "ESD transform, alpha=1 N=4000",
        "|difference| at z=1+i",
        (mixture - direct).norm(),
        Relation::Lt,
        5e-3,
    );
    Ok(())
}

fn exponential_profile() -> Result<tridiag_core::sigmaseq::QuantileProfile> {
    Ok(target_profile(100_000, &TargetLaw::exponential(1.0)?)?)
}

fn quantile_profile_check(ctx: &mut Context) -> Result<()> {
    let prof = exponential_profile()?;
    let target = TargetLaw::exponential(1.0)?;
    ctx.check("profile mesh", "1/log(N+1)", "max adjacent gap", mesh(&prof.sigma), Relation::Le, prof.delta);
    let w1 = target.wasserstein1(&prof.sigma.measure()?);
    ctx.check("profile law", "Exponential(1)", "W1", w1, Relation::Lt, 0.05);
    ctx.check("profile", "slots", "padding fraction", prof.padding_fraction(), Relation::Lt, 0.05);
    ctx.note(format!(
        "eps={:.3e} L={:.4} U={:.4} core={} bridges={} padding={}",
        prof.epsilon, prof.lower, prof.upper, prof.core, prof.bridges, prof.padding
    ));
    Ok(())
}

fn uniform_integrability(ctx: &mut Context) -> Result<()> {
    let prof = exponential_profile()?;
    let tail = tail_second_moment(&prof.sigma, 5.0);
    let exact = 37.0 * (-5.0f64).exp();
    ctx.check("profile tail, M=5", "37 e^-5 + 0.01", "(1/(N-1)) sum s^2 1{s>5}", tail, Relation::Le, exact + 0.01);
    let full = tail_second_moment(&prof.sigma, 0.0);
    ctx.check("profile second moment", "E T^2 = 2", "|difference|", (full - 2.0).abs(), Relation::Le, 0.01);
    let slots = prof.sigma.len() as f64;
    let bridge_tail: f64 = prof.bridge_points.iter().filter(|v| **v > 5.0).map(|v| v * v).sum::<f64>() / slots;
    let bridge_full: f64 = prof.bridge_points.iter().map(|v| v * v).sum::<f64>() / slots;
    ctx.note(format!(
        "{} bridge points contribute {bridge_tail:.4} to the M=5 tail and {bridge_full:.4} to the second moment; \
         without them: tail {:.4}, second moment {:.4}",
        prof.bridges,
        tail - bridge_tail,
        full - bridge_full
    ));
    Ok(())
}

/// Replaces each value by the nearest atom location when they agree to
/// `resolution`, so distribution-function comparisons are made at the
/// accuracy the eigenvalues are certified to.
fn snap_to_atoms(values: &mut [f64], atoms: &[f64], resolution: f64) {
    for v in values.iter_mut() {
        let i = atoms.partition_point(|a| *a < *v);
        let mut best = None;
        for j in [i.wrapping_sub(1), i] {
            if let Some(a) = atoms.get(j) {
                if (a - *v).abs() <= resolution && best.is_none_or(|b: f64| (a - *v).abs() < (b - *v).abs()) {
                    best = Some(*a);
                }
            }
        }
        if let Some(a) = best {
            *v = a;
        }
    }
}

fn bernoulli_mixture(ctx: &mut Context) -> Result<()> {
    let (p, n, k, seeds) = (0.5, 20_000, 60, 10);
    let limit = bernoulli_limit(p, k)?;
    let atoms: Vec<f64> = limit.measure.locations().collect();
    let entry = EntryDistribution::bernoulli(p)?;
    let sims: Vec<(f64, f64)> = (0..seeds)
        .into_par_iter()
        .map(|r| {
            let m = sample_simple(n, &entry, ctx.seed(r))?;
            let mut ev = eigenvalues(&m, 1e-12)?.eigenvalues;
            snap_to_atoms(&mut ev, &atoms, 1e-9);
            let mu = EmpiricalMeasure::from_samples(&ev)?;
            Ok((mu.ks_distance(&limit.measure), mu.mass_in(-0.05, 0.05)))
        })
        .collect::<Result<_>>()?;
    let ks = sims.iter().map(|s| s.0).sum::<f64>() / seeds as f64;
    ctx.check("ESD N=2e4, 10 seeds", "truncated series K=60", "mean KS", ks, Relation::Lt, 0.03);
    let simulated = sims.iter().map(|s| s.1).sum::<f64>() / seeds as f64;
    let q = 1.0 - p;
    let zero_atom = limit.mass_in(0.0, 0.0);
    let window_rest = limit.mass_in(-0.05, 0.05) - zero_atom;
    let stated = q * q / p * p.atanh() + window_rest;
    ctx.check(
        "simulated mass in [-0.05, 0.05]",
        "(q^2/p) atanh(p) + series mass in window",
        "|difference|",
        (simulated - stated).abs(),
        Relation::Le,
        0.01,
    );
    let counted = limit.zero_mass_limit() + window_rest;
    ctx.note(format!(
        "simulated window mass {simulated:.5}; q/(1+p) + rest of window = {counted:.5} \
         (difference {:.2e}); (q^2/p) atanh(p) + rest = {stated:.5}",
        (simulated - counted).abs()
    ));
    Ok(())
}

fn random_tridiagonal(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Result<TridiagonalMatrix> {
    let g = law("gaussian:0,1");
    let diag: Vec<f64> = g.sample_n(rng, n).into_iter().map(|x| x * scale).collect();
    let off: Vec<f64> = g.sample_n(rng, n - 1).into_iter().map(|x| x * scale).collect();
    Ok(TridiagonalMatrix::new(diag, off)?)
}

fn hoffman_wielandt(ctx: &mut Context) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(0).master_seed);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..100 {
        let a = random_tridiagonal(&mut rng, 50, 1.0)?;
        let scale = 10f64.powf(rng.random_range(-6.0..0.5));
        let e = random_tridiagonal(&mut rng, 50, scale)?;
        let b = TridiagonalMatrix::new(
            a.diag().iter().zip(e.diag()).map(|(x, y)| x + y).collect(),
            a.offdiag().iter().zip(e.offdiag()).map(|(x, y)| x + y).collect(),
        )?;
        let (lhs, rhs) = hoffman_wielandt_gap(&a, &b, 1e-13)?;
        if lhs > rhs + 1e-8 {
            violations += 1;
        }
        tightest = tightest.min(rhs - lhs);
    }
    ctx.check(
        "sum (d lambda)^2",
        "||A-B||_F^2 + 1e-8, 100 pairs N=50",
        "violations",
        violations as f64,
        Relation::Le,
        0.0,
    );
    ctx.note(format!("smallest rhs - lhs: {tightest:.3e}"));
    Ok(())
}

fn diagonal_negligibility(ctx: &mut Context) -> Result<()> {
    let n = 4000;
    let base = sample_simple(n, &law("gaussian:0,1"), ctx.seed(0))?;
    let sd = (n as f64).powf(-0.25);
    let diag = EntryDistribution::gaussian(0.0, sd)?.sample_n(&mut ctx.seed(1).rng(), n);
    let deformed = base.with_diag(diag)?;
    let ks = esd(&base, EIG_TOL)?.ks_distance(&esd(&deformed, EIG_TOL)?);
    ctx.check("ESD with diagonal, E a^2 = N^-1/2", "ESD without diagonal", "KS", ks, Relation::Lt, 0.03);
    Ok(())
}

fn joint_moments(ctx: &mut Context) -> Result<()> {
    let (n, replicas) = (4000, 20);
    let g = law("gaussian:0,1");
    let words: [(&str, Vec<usize>); 2] = [("XYXY", vec![0, 1, 0, 1]), ("XY", vec![0, 1])];
    let traces: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let x = sample_simple(n, &g, ctx.seed(2 * r))?;
            let y = sample_simple(n, &g, ctx.seed(2 * r + 1))?;
            words
                .iter()
                .map(|(_, w)| Ok(normalized_word_trace(&[&x, &y], w)?))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let ms: [&dyn MomentSequence; 2] = [&g, &g];
    for (i, (name, w)) in words.iter().enumerate() {
        let word = ColoredWord::new(w.iter().map(|c| c + 1).collect(), 2)?;
        let pred = joint_moment(&word, &ms)?;
        let xs: Vec<f64> = traces.iter().map(|t| t[i]).collect();
        let (mean, se) = mean_se(&xs);
        ctx.check(
            &format!("colored paths {name} = {pred}"),
            &format!("mean tr {name}/N, {replicas} replicas N={n}"),
            "|difference| vs 3 SE",
            (mean - pred).abs(),
            Relation::Le,
            3.0 * se,
        );
    }
    Ok(())
}

fn commutator_decay(ctx: &mut Context) -> Result<()> {
    let n = 10_000;
    let profile = power_profile(n, 1.0)?;
    let m = sample_simple(n, &law("gaussian:0,1"), ctx.seed(0))?;
    let norm = commutator_hs_norm(&profile, &m)?;
    let bound = commutator_bound(&profile, &m);
    ctx.check("||[S, X]||_2", "mesh sqrt(2 mean b^2)", "norm", norm, Relation::Le, bound);
    ctx.check("||[S, X]||_2", "N = 1e4", "norm", norm, Relation::Lt, 0.01);
    Ok(())
}

fn half_plane(ctx: &mut Context) -> Result<()> {
    // A sweep of its own, so the check is meaningful when run alone.
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(0).master_seed);
    let small = sample_simple(300, &law("gaussian:0,1"), ctx.seed(1))?;
    let small_esd = esd(&small, EIG_TOL)?;
    let mixed = EmpiricalMeasure::from_samples(&toeplitz_eigenvalues(50))?;
    for _ in 0..500 {
        let z = uhp(rng.random_range(-5.0..5.0), 10f64.powf(rng.random_range(-3.0..1.0)));
        let r = rng.random_range(0.1..4.0);
        semicircle_transform(z, r)?;
        arcsine_transform(z, r)?;
        empirical_transform(&small_esd, z);
        stieltjes::normalized_resolvent_trace(&small, z);
        scale_mixture_transform(&mixed, &small_esd, z);
    }
    let z = uhp(0.3, 1.5);
    let opts = FixpointOptions {
        population: 2000,
        iterations: 50,
        tolerance: 1e-8,
    };
    let run = particle_fixpoint(&law("gaussian:0,1"), z, &opts, ctx.seed(2))?;
    for s in &run.population.particles {
        audit::record(z.value(), *s);
    }
    let counts = audit::snapshot();
    ctx.check(
        "every transform value",
        &format!("-C+ and |S| <= 1/Im z ({} evaluations)", counts.checked),
        "violations",
        counts.violations as f64,
        Relation::Le,
        0.0,
    );
    if let Some((z, s)) = counts.first_violation {
        ctx.note(format!("first violation: z = {z}, S = {s}"));
    }
    if counts.checked == 0 {
        bail!("no transform evaluations were recorded");
    }
    Ok(())
}
