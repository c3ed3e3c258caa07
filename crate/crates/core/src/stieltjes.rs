//! Stieltjes transforms: closed forms, empirical and resolvent evaluations,
//! the population-dynamics solver for `S ~ 1/(z - b^2 S)`, composition and
//! scale mixtures, and density recovery by inversion.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::ensembles::TridiagonalMatrix;
use crate::error::{Error, Result};
use crate::law::EntryDistribution;
use crate::measure::EmpiricalMeasure;
use crate::seed::SeedSpec;
use crate::uhp::ComplexUHP;

pub mod audit {
    //! Process-wide tally of the mapping property `S(C+) in -C+`.
    //!
    //! Every transform evaluated through this module is recorded; a value
    //! violates the property when `Im S > 1e-14` or `|S| > 1/Im z` beyond
    //! rounding.

    use std::sync::atomic::{AtomicU64, Ordering};
    use std::sync::Mutex;

    use num_complex::Complex64;

    pub const IMAG_TOLERANCE: f64 = 1e-14;
    const MODULUS_SLACK: f64 = 1e-12;

    static CHECKED: AtomicU64 = AtomicU64::new(0);
    static VIOLATIONS: AtomicU64 = AtomicU64::new(0);
    static FIRST: Mutex<Option<(Complex64, Complex64)>> = Mutex::new(None);

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct AuditCounts {
        pub checked: u64,
        pub violations: u64,
        /// `(z, S)` of the first violation seen.
        pub first_violation: Option<(Complex64, Complex64)>,
    }

    /// Whether `s` is an admissible transform value at `z`.
    pub fn admissible(z: Complex64, s: Complex64) -> bool {
        s.im <= IMAG_TOLERANCE && s.norm() <= (1.0 / z.im) * (1.0 + MODULUS_SLACK)
    }

    pub fn record(z: Complex64, s: Complex64) -> bool {
        CHECKED.fetch_add(1, Ordering::Relaxed);
        let ok = admissible(z, s);
        if !ok {
            VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            let mut first = FIRST.lock().unwrap_or_else(|e| e.into_inner());
            first.get_or_insert((z, s));
        }
        ok
    }

    pub fn snapshot() -> AuditCounts {
        AuditCounts {
            checked: CHECKED.load(Ordering::Relaxed),
            violations: VIOLATIONS.load(Ordering::Relaxed),
            first_violation: *FIRST.lock().unwrap_or_else(|e| e.into_inner()),
        }
    }

    pub fn reset() {
        CHECKED.store(0, Ordering::Relaxed);
        VIOLATIONS.store(0, Ordering::Relaxed);
        *FIRST.lock().unwrap_or_else(|e| e.into_inner()) = None;
    }
}

fn recorded(z: ComplexUHP, s: Complex64) -> Complex64 {
    audit::record(z.value(), s);
    s
}

/// Square root with the argument taken in `[0, 2 pi)`, so the result lies in
/// the closed upper half-plane.
pub fn branch_sqrt(w: Complex64) -> Complex64 {
    let (rho, mut theta) = w.to_polar();
    if theta < 0.0 {
        theta += std::f64::consts::TAU;
    }
    Complex64::from_polar(rho.sqrt(), 0.5 * theta)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be > 0, got {r}")));
    }
    Ok(())
}

/// Semicircle law on `[-r, r]`: `2(z - sqrt(z^2 - r^2))/r^2`, evaluated as
/// `2/(z + sqrt(z^2 - r^2))` to avoid cancellation.
pub fn semicircle_transform(z: ComplexUHP, r: f64) -> Result<Complex64> {
    check_radius(r)?;
    let z = z.value();
    let s = 2.0 / (z + branch_sqrt(z * z - r * r));
    Ok(recorded(ComplexUHP::from_complex(z)?, s))
}

/// Arcsine law on `[-r, r]`: `1/sqrt(z^2 - r^2)`.
pub fn arcsine_transform(z: ComplexUHP, r: f64) -> Result<Complex64> {
    check_radius(r)?;
    let zv = z.value();
    Ok(recorded(z, 1.0 / branch_sqrt(zv * zv - r * r)))
}

/// `sum w_i / (z - x_i)`.
pub fn empirical_transform(mu: &EmpiricalMeasure, z: ComplexUHP) -> Complex64 {
    let zv = z.value();
    let terms: Vec<Complex64> = mu.atoms().iter().map(|(x, w)| *w / (zv - x)).collect();
    recorded(z, pairwise_sum(&terms))
}

/// Corner resolvent of the simple model by `s <- 1/(z - b^2 s)` from `s = 0`.
///
/// `bs[0]` is the coupling deepest in the chain; the matrix has dimension
/// `bs.len() + 1` and `offdiag = reversed(bs)`.
pub fn corner_recursion(bs: &[f64], z: ComplexUHP) -> Complex64 {
    let zv = z.value();
    let mut s = 1.0 / zv;
    for b in bs {
        s = 1.0 / (zv - b * b * s);
    }
    recorded(z, s)
}

/// Diagonal of `(zI - X)^{-1}` in `O(N)`.
///
/// With `s_i` the corner transform of the block above row `i` and `u_i` that
/// of the block below, `G_ii = 1/(z - a_i - c_{i-1}^2 s_i - c_i^2 u_i)`.
pub fn resolvent_diagonal(m: &TridiagonalMatrix, z: ComplexUHP) -> Vec<Complex64> {
    let n = m.dim();
    let zv = z.value();
    let a = m.diag();
    let c = m.offdiag();
    let zero = Complex64::new(0.0, 0.0);
    // above[i]: bottom-corner resolvent of rows 0..i (exclusive of i).
    let mut above = vec![zero; n];
    for i in 1..n {
        let prev = if i >= 2 { c[i - 2] * c[i - 2] * above[i - 1] } else { zero };
        above[i] = 1.0 / (zv - a[i - 1] - prev);
    }
    let mut below = vec![zero; n];
    for i in (0..n.saturating_sub(1)).rev() {
        let next = if i + 2 < n { c[i + 1] * c[i + 1] * below[i + 1] } else { zero };
        below[i] = 1.0 / (zv - a[i + 1] - next);
    }
    (0..n)
        .map(|i| {
            let up = if i > 0 { c[i - 1] * c[i - 1] * above[i] } else { zero };
            let down = if i + 1 < n { c[i] * c[i] * below[i] } else { zero };
            1.0 / (zv - a[i] - up - down)
        })
        .collect()
}

/// `(1/N) tr (zI - X)^{-1}`, the transform of the ESD, without eigenvalues.
pub fn normalized_resolvent_trace(m: &TridiagonalMatrix, z: ComplexUHP) -> Complex64 {
    let d = resolvent_diagonal(m, z);
    recorded(z, pairwise_sum(&d) / m.dim() as f64)
}

/// Fixed-order pairwise sum.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean of complex samples with its standard error
/// `sqrt((Var Re + Var Im)/n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: Complex64,
    pub stderr: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    pub fn from_samples(xs: &[Complex64]) -> Self {
        let n = xs.len();
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<Complex64> = xs
            .iter()
            .map(|x| {
                let d = x - mean;
                Complex64::new(d.norm_sqr(), 0.0)
            })
            .collect();
        let var = if n > 1 { pairwise_sum(&dev).re / (n - 1) as f64 } else { 0.0 };
        MonteCarloEstimate {
            mean,
            stderr: (var / n as f64).sqrt(),
            samples: n,
        }
    }
}

/// Empirical law of the corner transform after some generations.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticlePopulation {
    pub z: ComplexUHP,
    pub particles: Vec<Complex64>,
    pub generation: usize,
}

impl ParticlePopulation {
    /// All particles at `1/z`, the law of `s_1`.
    pub fn initial(z: ComplexUHP, population: usize) -> Self {
        ParticlePopulation {
            z,
            particles: vec![1.0 / z.value(); population],
            generation: 0,
        }
    }

    pub fn mean(&self) -> MonteCarloEstimate {
        let est = MonteCarloEstimate::from_samples(&self.particles);
        recorded(self.z, est.mean);
        est
    }

    /// Whether every particle satisfies `Im s <= 0` and `|s| <= 1/Im z`.
    pub fn is_admissible(&self) -> bool {
        self.particles.iter().all(|s| audit::admissible(self.z.value(), *s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixpointOptions {
    pub population: usize,
    pub iterations: usize,
    /// Stop once the generation-to-generation distance drops below this.
    pub tolerance: f64,
}

impl Default for FixpointOptions {
    fn default() -> Self {
        FixpointOptions {
            population: 100_000,
            iterations: 200,
            tolerance: 1e-4,
        }
    }
}

/// One generation's contraction `D_{g+1} / D_g` and its Monte Carlo error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionStep {
    pub generation: usize,
    pub ratio: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `D_g`: mean coupled distance between generations `g` and `g - 1`, an
    /// upper bound for their W1 distance.
    pub w1_trace: Vec<f64>,
    pub contraction: Vec<ContractionStep>,
    /// `E b^2 / (Im z)^2`.
    pub contraction_bound: f64,
    /// `Im z > E b^2`.
    pub hypothesis_holds: bool,
    pub converged: bool,
}

impl ConvergenceReport {
    /// W1 bound between the last two generations.
    pub fn last_w1(&self) -> f64 {
        self.w1_trace.last().copied().unwrap_or(0.0)
    }

    /// Steps whose ratio exceeds `bound + sigmas * stderr`.
    pub fn violations(&self, sigmas: f64) -> Vec<ContractionStep> {
        self.contraction
            .iter()
            .filter(|s| s.ratio > self.contraction_bound + sigmas * s.stderr)
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixpointRun {
    pub population: ParticlePopulation,
    pub report: ConvergenceReport,
}

const CHUNK: usize = 4096;
/// Ratios are not formed once distances reach rounding level.
const RATIO_FLOOR: f64 = 1e-13;

/// Population dynamics for `S ~ 1/(z - b^2 S)`.
///
/// Two populations are advanced with shared randomness: the leading one
/// starts one generation ahead of the trailing one. Each generation, every
/// particle index `i` draws a fresh `b_i` and a parent index `j_i` (uniform,
/// with replacement), applied to both populations. The mean distance
/// between paired particles bounds the W1 distance between consecutive
/// generations from above and contracts by at most `b_i^2/(Im z)^2` per
/// pair.
pub fn particle_fixpoint(
    law: &EntryDistribution,
    z: ComplexUHP,
    options: &FixpointOptions,
    seed: SeedSpec,
) -> Result<FixpointRun> {
    if options.population == 0 {
        return Err(Error::InvalidParameter("population must be positive".into()));
    }
    if options.iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be positive".into()));
    }
    law.require_l2()?;
    let eb2 = law.second_moment();
    let hypothesis_holds = z.im() > eb2;
    if !hypothesis_holds {
        log::warn!("Im z = {} <= E b^2 = {eb2}: contraction is not guaranteed", z.im());
    }
    let zv = z.value();
    let pop = options.population;

    let mut trailing = vec![1.0 / zv; pop];
    let mut leading = advance(law, zv, &[&trailing], seed.child(0)).pop().expect("one population");
    let mut generation = 1;
    let mut w1_trace = vec![mean_distance(&leading, &trailing).0];
    let mut contraction = Vec::new();
    let mut converged = w1_trace[0] < options.tolerance;

    while !converged && generation < options.iterations {
        let mut next = advance(law, zv, &[&leading, &trailing], seed.child(generation as u64));
        let next_trailing = next.pop().expect("two populations");
        let next_leading = next.pop().expect("two populations");
        let (d, sd) = mean_distance(&next_leading, &next_trailing);
        let prev = *w1_trace.last().unwrap();
        if prev > RATIO_FLOOR && d > RATIO_FLOOR {
            contraction.push(ContractionStep {
                generation,
                ratio: d / prev,
                stderr: sd / (pop as f64).sqrt() / prev,
            });
        }
        leading = next_leading;
        trailing = next_trailing;
        generation += 1;
        w1_trace.push(d);
        converged = d < options.tolerance;
    }

    Ok(FixpointRun {
        population: ParticlePopulation {
            z,
            particles: leading,
            generation,
        },
        report: ConvergenceReport {
            w1_trace,
            contraction,
            contraction_bound: eb2 / (z.im() * z.im()),
            hypothesis_holds,
            converged,
        },
    })
}

/// Advances every population by one generation with identical draws.
fn advance(law: &EntryDistribution, z: Complex64, pops: &[&[Complex64]], seed: SeedSpec) -> Vec<Vec<Complex64>> {
    let pop = pops[0].len();
    let chunks: Vec<Vec<Vec<Complex64>>> = (0..pop.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.child(c as u64).rng();
            let len = CHUNK.min(pop - c * CHUNK);
            let mut out: Vec<Vec<Complex64>> = pops.iter().map(|_| Vec::with_capacity(len)).collect();
            for _ in 0..len {
                let b = law.sample(&mut rng);
                let b2 = b * b;
                let j = rng.random_range(0..pop);
                for (o, p) in out.iter_mut().zip(pops) {
                    o.push(1.0 / (z - b2 * p[j]));
                }
            }
            out
        })
        .collect();
    let mut out: Vec<Vec<Complex64>> = pops.iter().map(|_| Vec::with_capacity(pop)).collect();
    for chunk in chunks {
        for (o, c) in out.iter_mut().zip(chunk) {
            o.extend(c);
        }
    }
    out
}

/// Mean and standard deviation of `|a_i - b_i|`.
fn mean_distance(a: &[Complex64], b: &[Complex64]) -> (f64, f64) {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).norm()).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = if a.len() > 1 {
        d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Monte Carlo estimate of `E 1/(z - b1^2 S1 - b2^2 S2)` with independent
/// `b1, b2` from `law` and `S1`, `S2` drawn from the two populations.
pub fn compose_transform(
    pop1: &ParticlePopulation,
    pop2: &ParticlePopulation,
    law: &EntryDistribution,
    samples: usize,
    seed: SeedSpec,
) -> Result<MonteCarloEstimate> {
    if pop1.z != pop2.z {
        return Err(Error::InvalidParameter(format!(
            "populations built at different z: {} vs {}",
            pop1.z, pop2.z
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    if pop1.particles.is_empty() || pop2.particles.is_empty() {
        return Err(Error::EmptyInput);
    }
    let z = pop1.z.value();
    let values: Vec<Complex64> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = seed.child(c as u64).rng();
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .map(|_| {
                    let b1 = law.sample(&mut rng);
                    let b2 = law.sample(&mut rng);
                    let s1 = pop1.particles[rng.random_range(0..pop1.particles.len())];
                    let s2 = pop2.particles[rng.random_range(0..pop2.particles.len())];
                    1.0 / (z - b1 * b1 * s1 - b2 * b2 * s2)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let est = MonteCarloEstimate::from_samples(&values);
    recorded(pop1.z, est.mean);
    Ok(est)
}

/// `sum_ij w_i v_j / (z - x_i t_j)`, the transform of the law of `T X`.
pub fn scale_mixture_transform(mu_b: &EmpiricalMeasure, mu_t: &EmpiricalMeasure, z: ComplexUHP) -> Complex64 {
    let zv = z.value();
    let rows: Vec<Complex64> = mu_t
        .atoms()
        .par_iter()
        .map(|(t, v)| {
            let terms: Vec<Complex64> = mu_b.atoms().iter().map(|(x, w)| *w / (zv - x * t)).collect();
            *v * pairwise_sum(&terms)
        })
        .collect();
    recorded(z, pairwise_sum(&rows))
}

/// Transform values along the horizontal line `Im z = eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformGrid {
    eta: f64,
    xs: Vec<f64>,
    values: Vec<Complex64>,
}

impl TransformGrid {
    pub fn new(eta: f64, xs: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::NotUpperHalfPlane(eta));
        }
        if xs.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                actual: values.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::EmptyInput);
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("grid must be strictly ascending".into()));
        }
        Ok(Self { eta, xs, values })
    }

    /// Evaluates `f` at `x + i eta` on `points` equally spaced points of `[lo, hi]`.
    pub fn evaluate<F>(lo: f64, hi: f64, points: usize, eta: f64, f: F) -> Result<Self>
    where
        F: Fn(ComplexUHP) -> Result<Complex64> + Sync,
    {
        if points < 2 || !(lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "grid needs lo < hi and >= 2 points, got [{lo}, {hi}] with {points}"
            )));
        }
        let xs: Vec<f64> = (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect();
        let values = xs
            .par_iter()
            .map(|x| f(ComplexUHP::new(*x, eta)?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(eta, xs, values)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub points: Vec<(f64, f64)>,
    /// Trapezoidal integral of the density over the grid.
    pub mass: f64,
}

/// Tolerance below zero before a density value is treated as a sign error.
pub const NEGATIVE_DENSITY_TOLERANCE: f64 = 1e-10;

/// `density(x) = -Im S(x + i eta) / pi`.
pub fn invert_density(grid: &TransformGrid) -> Result<DensityEstimate> {
    let mut points = Vec::with_capacity(grid.xs.len());
    for (x, s) in grid.xs.iter().zip(&grid.values) {
        let d = -s.im / std::f64::consts::PI;
        if d < -NEGATIVE_DENSITY_TOLERANCE {
            return Err(Error::NegativeDensity { x: *x, density: d });
        }
        points.push((*x, d.max(0.0)));
    }
    let mass = points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    Ok(DensityEstimate { points, mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::char_poly_eval;
    use rand::SeedableRng;

    fn uhp(re: f64, im: f64) -> ComplexUHP {
        ComplexUHP::new(re, im).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn branch_examples() {
        assert!((branch_sqrt(c(-8.0, 0.0)) - c(0.0, 8f64.sqrt())).norm() < 1e-15);
        assert!((branch_sqrt(c(4.0, 0.0)) - c(2.0, 0.0)).norm() < 1e-15);
        // Just below the positive axis the root flips to near -sqrt.
        let w = branch_sqrt(c(4.0, -1e-9));
        assert!(w.re < 0.0 && w.im >= 0.0);
    }

    #[test]
    fn semicircle_examples() {
        let s = semicircle_transform(uhp(0.0, 2.0), 2.0).unwrap();
        assert!((s - c(0.0, 1.0 - 2f64.sqrt())).norm() < 1e-15);
        let z = uhp(0.0, 1e8);
        assert!((z.value() * semicircle_transform(z, 2.0).unwrap() - 1.0).norm() < 1e-10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let z = uhp(rng.random_range(-5.0..5.0), rng.random_range(1e-3..5.0));
            let r: f64 = rng.random_range(0.5..3.0);
            let s = semicircle_transform(z, r).unwrap();
            let resid = (s - 1.0 / (z.value() - 0.25 * r * r * s)).norm();
            assert!(resid < 1e-12, "z={z} r={r} resid={resid}");
            assert!(audit::admissible(z.value(), s));
        }
        assert!(semicircle_transform(z, 0.0).is_err());
    }

    #[test]
    fn arcsine_examples() {
        let s = arcsine_transform(uhp(0.0, 2.0), 2.0).unwrap();
        assert!((s - c(0.0, -1.0 / (2.0 * 2f64.sqrt()))).norm() < 1e-15);
        let z = uhp(0.0, 1e8);
        assert!((z.value() * arcsine_transform(z, 2.0).unwrap() - 1.0).norm() < 1e-10);
        for x in [-3.0, -1.0, 0.5, 2.5] {
            assert!(arcsine_transform(uhp(x, 0.01), 2.0).unwrap().im <= 0.0);
        }
    }

    #[test]
    fn empirical_examples() {
        let z = uhp(0.3, 0.8);
        let d0 = EmpiricalMeasure::point_mass(0.0).unwrap();
        assert!((empirical_transform(&d0, z) - 1.0 / z.value()).norm() < 1e-15);
        let da = EmpiricalMeasure::point_mass(1.7).unwrap();
        assert!((empirical_transform(&da, z) - 1.0 / (z.value() - 1.7)).norm() < 1e-15);
        let pm = EmpiricalMeasure::from_samples(&[-1.0, 1.0]).unwrap();
        assert!((empirical_transform(&pm, uhp(0.0, 1.0)) - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn corner_examples() {
        let z = uhp(0.0, 2.0);
        assert_eq!(corner_recursion(&[], z), 1.0 / z.value());
        assert!((corner_recursion(&[1.0], z) - c(0.0, -0.4)).norm() < 1e-15);
    }

    #[test]
    fn corner_matches_determinant_ratio() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 17, 200, 500] {
            let bs: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
            let z = uhp(rng.random_range(-3.0..3.0), rng.random_range(0.1..2.0));
            let mut off = bs.clone();
            off.reverse();
            let m = TridiagonalMatrix::from_offdiag(off).unwrap();
            let a = corner_recursion(&bs, z);
            let b = char_poly_eval(&m, z.value()).corner_ratio();
            assert!((a - b).norm() <= 1e-10 * b.norm(), "n={n}");
            // The resolvent diagonal agrees at the corner too.
            let g = resolvent_diagonal(&m, z);
            assert!((g[0] - a).norm() <= 1e-10 * a.norm());
        }
    }

    #[test]
    fn resolvent_trace_matches_eigenvalues() {
        let m = TridiagonalMatrix::new(vec![0.3, -0.2, 0.0, 1.0, 0.5], vec![1.0, 0.4, -0.7, 2.0]).unwrap();
        let z = uhp(0.2, 0.4);
        let ev = crate::eigensolve::eigenvalues(&m, 1e-14).unwrap();
        let a = empirical_transform(&ev.to_measure(), z);
        let b = normalized_resolvent_trace(&m, z);
        assert!((a - b).norm() < 1e-12);
        let one = TridiagonalMatrix::new(vec![0.5], vec![]).unwrap();
        assert!((normalized_resolvent_trace(&one, z) - 1.0 / (z.value() - 0.5)).norm() < 1e-15);
    }

    #[test]
    fn fixpoint_constant_law() {
        let z = uhp(0.0, 3.0);
        let law = EntryDistribution::constant(1.0).unwrap();
        let opts = FixpointOptions {
            population: 2000,
            iterations: 200,
            tolerance: 1e-10,
        };
        let run = particle_fixpoint(&law, z, &opts, SeedSpec::new(1, 0)).unwrap();
        // s solves s^2 - z s + 1 = 0 in the lower half-plane.
        let want = (z.value() - branch_sqrt(z.value() * z.value() - 4.0)) / 2.0;
        assert!((want - c(0.0, -0.302_775_637_7)).norm() < 1e-9);
        for s in &run.population.particles {
            assert!((s - want).norm() < 1e-9);
        }
        assert!(run.report.converged && run.report.hypothesis_holds);
        assert!(run.report.violations(3.0).is_empty());
        assert!((run.report.contraction_bound - 1.0 / 9.0).abs() < 1e-15);
        assert!(run.population.is_admissible());
    }

    #[test]
    fn fixpoint_zero_law() {
        let z = uhp(0.5, 0.2);
        let law = EntryDistribution::bernoulli(0.0).unwrap();
        let opts = FixpointOptions {
            population: 100,
            iterations: 50,
            tolerance: 1e-4,
        };
        let run = particle_fixpoint(&law, z, &opts, SeedSpec::default()).unwrap();
        assert_eq!(run.population.generation, 1);
        assert!(run.population.particles.iter().all(|s| *s == 1.0 / z.value()));
        let bad = FixpointOptions { population: 0, ..opts };
        assert!(particle_fixpoint(&law, z, &bad, SeedSpec::default()).is_err());
        let bad = FixpointOptions { iterations: 0, ..opts };
        assert!(particle_fixpoint(&law, z, &bad, SeedSpec::default()).is_err());
    }

    #[test]
    fn fixpoint_random_law_contracts_and_is_deterministic() {
        let z = uhp(0.4, 2.5);
        let law = EntryDistribution::gaussian(0.0, 1.0).unwrap();
        let opts = FixpointOptions {
            population: 20_000,
            iterations: 60,
            tolerance: 1e-6,
        };
        let a = particle_fixpoint(&law, z, &opts, SeedSpec::new(8, 0)).unwrap();
        let b = particle_fixpoint(&law, z, &opts, SeedSpec::new(8, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.report.violations(3.0).is_empty(), "{:?}", a.report.contraction);
        assert!(a.population.is_admissible());
        // The particle law agrees with the large-N resolvent corner.
        let m = crate::ensembles::sample_simple(4000, &law, SeedSpec::new(9, 0)).unwrap();
        let corner = resolvent_diagonal(&m, z)[0];
        let mean = a.population.mean();
        // A single corner is one draw of S, not its mean, so compare loosely.
        assert!((mean.mean - corner).norm() < 0.3);
    }

    #[test]
    fn compose_examples() {
        let z = uhp(0.0, 3.0);
        let one = EntryDistribution::constant(1.0).unwrap();
        let opts = FixpointOptions {
            population: 1000,
            iterations: 100,
            tolerance: 1e-12,
        };
        let p1 = particle_fixpoint(&one, z, &opts, SeedSpec::new(1, 0)).unwrap().population;
        let p2 = particle_fixpoint(&one, z, &opts, SeedSpec::new(2, 0)).unwrap().population;
        let s = compose_transform(&p1, &p2, &one, 500, SeedSpec::new(3, 0)).unwrap();
        assert!((s.mean - arcsine_transform(z, 2.0).unwrap()).norm() < 1e-9);
        let zero = EntryDistribution::bernoulli(0.0).unwrap();
        let q = ParticlePopulation::initial(z, 10);
        let s = compose_transform(&q, &q, &zero, 100, SeedSpec::default()).unwrap();
        assert!((s.mean - 1.0 / z.value()).norm() < 1e-15);
        let other = ParticlePopulation::initial(uhp(0.0, 1.0), 10);
        assert!(compose_transform(&q, &other, &zero, 10, SeedSpec::default()).is_err());
    }

    #[test]
    fn scale_mixture_examples() {
        let z = uhp(0.4, 0.7);
        let mu = EmpiricalMeasure::from_samples(&[-1.5, 0.0, 0.2, 2.0]).unwrap();
        let one = EmpiricalMeasure::point_mass(1.0).unwrap();
        let zero = EmpiricalMeasure::point_mass(0.0).unwrap();
        assert!((scale_mixture_transform(&mu, &one, z) - empirical_transform(&mu, z)).norm() < 1e-15);
        assert!((scale_mixture_transform(&mu, &zero, z) - 1.0 / z.value()).norm() < 1e-15);
    }

    #[test]
    fn inversion_examples() {
        let eta = 1e-3;
        let semi = TransformGrid::evaluate(-3.0, 3.0, 30_001, eta, |z| semicircle_transform(z, 2.0)).unwrap();
        let d = invert_density(&semi).unwrap();
        let at0 = d.points[15_000];
        assert_eq!(at0.0, 0.0);
        assert!((at0.1 - 1.0 / std::f64::consts::PI).abs() < 2e-3);
        assert!((0.97..=1.01).contains(&d.mass), "{}", d.mass);
        let arc = TransformGrid::evaluate(-3.0, 3.0, 30_001, eta, |z| arcsine_transform(z, 2.0)).unwrap();
        let d = invert_density(&arc).unwrap();
        assert!((d.points[15_000].1 - 0.5 / std::f64::consts::PI).abs() < 2e-3);
        assert!((0.97..=1.01).contains(&d.mass), "{}", d.mass);
        let bad = TransformGrid::new(0.1, vec![0.0, 1.0], vec![c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        assert!(matches!(invert_density(&bad), Err(Error::NegativeDensity { .. })));
        assert!(TransformGrid::new(0.0, vec![0.0], vec![c(0.0, 0.0)]).is_err());
        assert!(TransformGrid::new(0.1, vec![1.0, 0.0], vec![c(0.0, 0.0); 2]).is_err());
    }
}
