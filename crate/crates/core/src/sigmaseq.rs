//! Deterministic deformation profiles `sigma_{k,N}` and their diagnostics.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;

use crate::ensembles::TridiagonalMatrix;
use crate::error::{check_finite, Error, Result};
use crate::measure::EmpiricalMeasure;

/// `N - 1` coupling multipliers for an `N x N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSequence {
    values: Vec<f64>,
    n: usize,
}

impl SigmaSequence {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
        }
        if values.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                actual: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self { values, n })
    }

    /// Profile for the matrix whose dimension is one more than the number of values.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let n = values.len() + 1;
        Self::new(n, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Matrix dimension `N`.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Uniform measure on the values.
    pub fn measure(&self) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::from_samples(&self.values)
    }

    /// One value per line; blank lines and lines starting with `#` are skipped.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let first = t.split(',').next().unwrap_or("").trim();
            let v: f64 = first
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: not a number: {t:?}", i + 1)))?;
            values.push(v);
        }
        Self::from_values(values)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.values {
            writeln!(w, "{v:?}")?;
        }
        Ok(())
    }
}

/// `values[k] = ((k + 1) / N)^alpha` for `k = 0..N-2`.
pub fn power_profile(n: usize, alpha: f64) -> Result<SigmaSequence> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("power profile needs N >= 2, got {n}")));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    let nf = n as f64;
    let values = (0..n - 1).map(|k| ((k + 1) as f64 / nf).powf(alpha)).collect();
    SigmaSequence::new(n, values)
}

/// Largest adjacent gap; 0 for fewer than two values.
pub fn mesh(s: &SigmaSequence) -> f64 {
    s.values()
        .windows(2)
        .fold(0.0, |m, w| m.max((w[1] - w[0]).abs()))
}

/// `(1/(N-1)) sum sigma^2 1{|sigma| > M}`.
pub fn tail_second_moment(s: &SigmaSequence, m: f64) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    let sum: f64 = s.values().iter().filter(|v| v.abs() > m).map(|v| v * v).sum();
    sum / s.len() as f64
}

/// `||[Sigma, X]||_{2,N}` for the undeformed couplings `m.offdiag()`.
pub fn commutator_hs_norm(s: &SigmaSequence, m: &TridiagonalMatrix) -> Result<f64> {
    if s.len() != m.offdiag().len() {
        return Err(Error::DimensionMismatch {
            expected: m.offdiag().len(),
            actual: s.len(),
        });
    }
    let b = m.offdiag();
    let sum: f64 = s
        .values()
        .windows(2)
        .zip(b)
        .map(|(w, bk)| 2.0 * (w[1] - w[0]) * (w[1] - w[0]) * bk * bk)
        .sum();
    Ok((sum / m.dim() as f64).sqrt())
}

/// `mesh(s) * sqrt(2 (1/N) sum b_k^2)`, an upper bound for [`commutator_hs_norm`].
pub fn commutator_bound(s: &SigmaSequence, m: &TridiagonalMatrix) -> f64 {
    let mean_b2 = m.offdiag().iter().map(|b| b * b).sum::<f64>() / m.dim() as f64;
    mesh(s) * (2.0 * mean_b2).sqrt()
}

/// Target laws for profile construction, with closed-form quantiles.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetLaw {
    Constant(f64),
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    Pareto { scale: f64, shape: f64 },
    /// Sorted sample; quantiles are the left-continuous empirical ones.
    Empirical(Arc<[f64]>),
}

impl TargetLaw {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("exponential rate must be > 0, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        check_finite(&[low, high])?;
        if !(low < high) {
            return Err(Error::InvalidParameter(format!("uniform needs low < high, got {low}, {high}")));
        }
        Ok(Self::Uniform { low, high })
    }

    pub fn pareto(scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0 && shape > 0.0) || !scale.is_finite() || !shape.is_finite() {
            return Err(Error::InvalidParameter(format!("pareto needs scale, shape > 0, got {scale}, {shape}")));
        }
        Ok(Self::Pareto { scale, shape })
    }

    pub fn empirical(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        check_finite(&samples)?;
        samples.sort_by(f64::total_cmp);
        Ok(Self::Empirical(samples.into()))
    }

    /// `Q(u) = inf { x : F(x) >= u }` for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Uniform { low, high } => low + (high - low) * u,
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Pareto { scale, shape } => scale * (1.0 - u).powf(-1.0 / shape),
            Self::Empirical(s) => {
                let n = s.len();
                let idx = ((u * n as f64).ceil() as usize).clamp(1, n) - 1;
                s[idx]
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Constant(c) => (x >= *c) as u8 as f64,
            Self::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Pareto { scale, shape } => {
                if x <= *scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(*shape)
                }
            }
            Self::Empirical(s) => s.partition_point(|v| *v <= x) as f64 / s.len() as f64,
        }
    }

    /// `E T^2`; infinite when the law has no second moment.
    pub fn second_moment(&self) -> f64 {
        self.tail_second_moment(f64::NEG_INFINITY)
    }

    /// `E[T^2 1{|T| > M}]`.
    pub fn tail_second_moment(&self, m: f64) -> f64 {
        let m0 = m.max(0.0);
        match self {
            Self::Constant(c) => {
                if c.abs() > m {
                    c * c
                } else {
                    0.0
                }
            }
            Self::Uniform { low, high } => {
                // Integrate t^2 / (high - low) over {|t| > M} within [low, high].
                let cube = |a: f64, b: f64| if b > a { (b.powi(3) - a.powi(3)) / 3.0 } else { 0.0 };
                let width = high - low;
                if m < 0.0 {
                    return cube(*low, *high) / width;
                }
                (cube(m0.max(*low), *high) + cube(*low, (-m0).min(*high))) / width
            }
            Self::Exponential { rate } => {
                let l = *rate;
                (-l * m0).exp() * (m0 * m0 + 2.0 * m0 / l + 2.0 / (l * l))
            }
            Self::Pareto { scale, shape } => {
                if *shape <= 2.0 {
                    return f64::INFINITY;
                }
                let lower = m0.max(*scale);
                shape * scale.powf(*shape) * lower.powf(2.0 - shape) / (shape - 2.0)
            }
            Self::Empirical(s) => s.iter().filter(|v| v.abs() > m).map(|v| v * v).sum::<f64>() / s.len() as f64,
        }
    }

    /// `G(x) = int_{-inf}^x F`.
    fn cdf_integral(&self, x: f64) -> f64 {
        match self {
            Self::Constant(c) => (x - c).max(0.0),
            Self::Uniform { low, high } => {
                if x <= *low {
                    0.0
                } else if x <= *high {
                    (x - low) * (x - low) / (2.0 * (high - low))
                } else {
                    0.5 * (high - low) + (x - high)
                }
            }
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    x + (-rate * x).exp_m1() / rate
                }
            }
            Self::Pareto { scale, shape } => {
                if x <= *scale {
                    0.0
                } else if (*shape - 1.0).abs() < 1e-12 {
                    (x - scale) - scale * (x / scale).ln()
                } else {
                    (x - scale) - scale.powf(*shape) * (x.powf(1.0 - shape) - scale.powf(1.0 - shape)) / (1.0 - shape)
                }
            }
            Self::Empirical(s) => s.iter().map(|v| (x - v).max(0.0)).sum::<f64>() / s.len() as f64,
        }
    }

    /// `H(x) = int_x^inf (1 - F)`.
    fn survival_integral(&self, x: f64) -> f64 {
        match self {
            Self::Constant(c) => (c - x).max(0.0),
            Self::Uniform { low, high } => {
                if x <= *low {
                    (low - x) + 0.5 * (high - low)
                } else if x <= *high {
                    (high - x) * (high - x) / (2.0 * (high - low))
                } else {
                    0.0
                }
            }
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    -x + 1.0 / rate
                } else {
                    (-rate * x).exp() / rate
                }
            }
            Self::Pareto { scale, shape } => {
                if *shape <= 1.0 {
                    return f64::INFINITY;
                }
                if x <= *scale {
                    (scale - x) + scale / (shape - 1.0)
                } else {
                    scale.powf(*shape) * x.powf(1.0 - shape) / (shape - 1.0)
                }
            }
            Self::Empirical(s) => s.iter().map(|v| (v - x).max(0.0)).sum::<f64>() / s.len() as f64,
        }
    }

    /// Exact `W1(mu, target) = int |F_mu - F|`, using closed-form integrals of
    /// the target CDF between consecutive atoms.
    pub fn wasserstein1(&self, mu: &EmpiricalMeasure) -> f64 {
        if let Self::Empirical(s) = self {
            let target = EmpiricalMeasure::from_samples(s).expect("validated sample");
            return mu.wasserstein1(&target);
        }
        let atoms = mu.merged();
        let atoms = atoms.atoms();
        let mut total = self.cdf_integral(atoms[0].0);
        let mut c = 0.0;
        for i in 0..atoms.len() {
            c += atoms[i].1;
            let a = atoms[i].0;
            if i + 1 == atoms.len() {
                // F_mu = 1 from here on.
                total += self.survival_integral(a);
                break;
            }
            let b = atoms[i + 1].0;
            let c = c.min(1.0);
            let q = if c >= 1.0 { b } else { self.quantile(c).clamp(a, b) };
            let below = c * (q - a) - (self.cdf_integral(q) - self.cdf_integral(a));
            let above = (self.cdf_integral(b) - self.cdf_integral(q)) - c * (b - q);
            total += below.max(0.0) + above.max(0.0);
        }
        total
    }
}

impl fmt::Display for TargetLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "constant:{c}"),
            Self::Uniform { low, high } => write!(f, "uniform:{low},{high}"),
            Self::Exponential { rate } => write!(f, "exponential:{rate}"),
            Self::Pareto { scale, shape } => write!(f, "pareto:{scale},{shape}"),
            Self::Empirical(s) => write!(f, "empirical:<{} values>", s.len()),
        }
    }
}

impl FromStr for TargetLaw {
    type Err = Error;

    /// `constant:c`, `uniform:a,b`, `exponential:rate`, `pareto:scale,shape`.
    /// Empirical targets are built from data with [`TargetLaw::empirical`].
    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if params.trim().is_empty() {
            vec![]
        } else {
            params
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {p:?} in {s:?}"))))
                .collect::<Result<_>>()?
        };
        let want = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::Parse(format!("{kind} expects {k} parameter(s), got {}", nums.len())))
            }
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "constant" => {
                want(1)?;
                check_finite(&nums)?;
                Ok(Self::Constant(nums[0]))
            }
            "uniform" => {
                want(2)?;
                Self::uniform(nums[0], nums[1])
            }
            "exponential" | "exp" => {
                want(1)?;
                Self::exponential(nums[0])
            }
            "pareto" => {
                want(2)?;
                Self::pareto(nums[0], nums[1])
            }
            other => Err(Error::Parse(format!("unknown target law {other:?}"))),
        }
    }
}

/// Smallest window parameter tried; `1 - 2^-53` is the last double below 1.
pub const MIN_EPSILON: f64 = 1.1102230246251565e-16;
const EPSILON_BISECTIONS: usize = 60;

/// The profile together with the quantities of its construction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileProfile {
    pub sigma: SigmaSequence,
    pub epsilon: f64,
    pub lower: f64,
    pub upper: f64,
    pub delta: f64,
    pub slots: usize,
    pub core: usize,
    pub bridges: usize,
    pub padding: usize,
    /// The inserted bridge values, ascending.
    pub bridge_points: Vec<f64>,
}

impl QuantileProfile {
    /// Share of the `N - 1` values that are padding duplicates.
    pub fn padding_fraction(&self) -> f64 {
        self.padding as f64 / self.sigma.len() as f64
    }
}

fn window_width(q: &dyn Fn(f64) -> f64, eps: f64) -> f64 {
    let w = q(1.0 - eps) - q(eps);
    if w.is_finite() {
        w
    } else {
        f64::INFINITY
    }
}

/// Builds a slowly varying profile whose empirical law approaches the law
/// with quantile function `q`.
///
/// Window: `eps_N` is the smallest `eps` with `Q(1-eps) - Q(eps) <= sqrt(N)`,
/// found by bisection on `log2(eps)` over `[2^-53, 1/2]`. With
/// `delta = 1/log(N+1)`, `B = ceil(W/delta) + 2` slots are reserved and the
/// remaining `m = (N-1) - B` slots are core quantiles `Q(u_k)` at
/// `u_k = eps + k (1 - 2 eps)/(m + 1)`. Gaps wider than `delta` (including
/// the one from `L_N` to the first core point when padding is present) are
/// bridged by arithmetic progressions, and leftover slots are duplicates of
/// `L_N = Q(eps)`. Values are returned in nondecreasing order.
pub fn quantile_profile(n: usize, q: &dyn Fn(f64) -> f64) -> Result<QuantileProfile> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("quantile profile needs N >= 4, got {n}")));
    }
    let slots = n - 1;
    let root = (n as f64).sqrt();
    if !(window_width(q, 0.5) <= root) {
        return Err(Error::WindowSearch(
            "no finite central window: Q(1/2) is not finite".into(),
        ));
    }
    let epsilon = if window_width(q, MIN_EPSILON) <= root {
        MIN_EPSILON
    } else {
        let (mut lo, mut hi) = (MIN_EPSILON.log2(), -1.0f64);
        for _ in 0..EPSILON_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if window_width(q, mid.exp2()) <= root {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi.exp2()
    };
    let lower = q(epsilon);
    let upper = q(1.0 - epsilon);
    let width = upper - lower;
    let delta = 1.0 / ((n + 1) as f64).ln();
    let reserved = (width / delta).ceil() as usize + 2;
    if reserved >= slots {
        return Err(Error::InvalidParameter(format!(
            "N = {n} too small: {reserved} reserved slots leave no core points"
        )));
    }
    let core = slots - reserved;

    let points: Vec<f64> = (1..=core)
        .map(|k| q(epsilon + k as f64 / (core + 1) as f64 * (1.0 - 2.0 * epsilon)))
        .collect();
    check_finite(&points)?;
    if let Some(w) = points.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::NonMonotoneQuantile(w[0]));
    }
    if points[0] < lower || points[core - 1] > upper {
        return Err(Error::NonMonotoneQuantile(points[0]));
    }

    let mut values = Vec::with_capacity(slots);
    let mut bridges = 0;
    let mut bridge_points = Vec::new();
    let mut push_bridge = |values: &mut Vec<f64>, s: f64, t: f64| -> usize {
        let mut count = ((t - s) / delta).ceil() as usize;
        count = count.saturating_sub(1);
        // Rounding in s + (t - s) i/(l + 1) may overshoot delta by an ulp.
        loop {
            let ok = (0..=count).all(|i| {
                let a = s + (t - s) * i as f64 / (count + 1) as f64;
                let b = if i == count { t } else { s + (t - s) * (i + 1) as f64 / (count + 1) as f64 };
                b - a <= delta
            });
            if ok {
                break;
            }
            count += 1;
        }
        for i in 1..=count {
            let v = s + (t - s) * i as f64 / (count + 1) as f64;
            values.push(v);
            bridge_points.push(v);
        }
        count
    };
    // At least two padding slots always remain, so L_N joins the sorted list.
    if points[0] > lower {
        bridges += push_bridge(&mut values, lower, points[0]);
    }
    values.push(points[0]);
    for k in 1..core {
        let (s, t) = (points[k - 1], points[k]);
        if t > s {
            bridges += push_bridge(&mut values, s, t);
        }
        values.push(t);
    }
    if values.len() > slots {
        return Err(Error::InvalidParameter(format!(
            "bridges overflowed the reserved slots ({} > {reserved})",
            values.len() - core
        )));
    }
    let padding = slots - values.len();
    let mut all = vec![lower; padding];
    all.extend(values);
    let sigma = SigmaSequence::new(n, all)?;
    Ok(QuantileProfile {
        sigma,
        epsilon,
        lower,
        upper,
        delta,
        slots,
        core,
        bridges,
        padding,
        bridge_points,
    })
}

/// [`quantile_profile`] for a [`TargetLaw`].
pub fn target_profile(n: usize, target: &TargetLaw) -> Result<QuantileProfile> {
    quantile_profile(n, &|u| target.quantile(u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_profile_examples() {
        assert!(power_profile(1, 1.0).is_err());
        assert_eq!(power_profile(6, 0.0).unwrap().values(), &[1.0; 5]);
        let p = power_profile(5, 1.0).unwrap();
        assert_eq!(p.values(), &[0.2, 0.4, 0.6, 0.8]);
        assert!((mesh(&power_profile(100, 1.0).unwrap()) - 0.01).abs() < 1e-12);
        // Largest gap sits between the last two values, (998/N)^2 and (999/N)^2.
        let top = mesh(&power_profile(1000, 2.0).unwrap());
        assert!((top - 1997e-6).abs() < 1e-12);
        assert!((top - 0.002).abs() < 1e-5);
    }

    #[test]
    fn mesh_examples() {
        assert_eq!(mesh(&SigmaSequence::from_values(vec![3.0; 5]).unwrap()), 0.0);
        assert_eq!(mesh(&SigmaSequence::from_values(vec![0.0, 1.0]).unwrap()), 1.0);
        assert_eq!(mesh(&SigmaSequence::from_values(vec![]).unwrap()), 0.0);
    }

    #[test]
    fn tail_moment_examples() {
        let p = power_profile(2000, 1.0).unwrap();
        assert_eq!(tail_second_moment(&p, 2.0), 0.0);
        assert!((tail_second_moment(&p, 0.0) - 1.0 / 3.0).abs() < 1e-3);
        let e = TargetLaw::exponential(1.0).unwrap();
        assert!((e.tail_second_moment(5.0) - 37.0 * (-5.0f64).exp()).abs() < 1e-14);
        assert!((e.second_moment() - 2.0).abs() < 1e-14);
        let u = TargetLaw::uniform(-1.0, 2.0).unwrap();
        assert!((u.second_moment() - 1.0).abs() < 1e-14);
        assert!((u.tail_second_moment(1.5) - (8.0 - 3.375) / 9.0).abs() < 1e-14);
    }

    #[test]
    fn commutator_examples() {
        let m = TridiagonalMatrix::toeplitz(1000, 0.0, 1.0).unwrap();
        let flat = SigmaSequence::from_values(vec![0.7; 999]).unwrap();
        assert_eq!(commutator_hs_norm(&flat, &m).unwrap(), 0.0);
        let two = TridiagonalMatrix::toeplitz(2, 0.0, 1.0).unwrap();
        assert_eq!(commutator_hs_norm(&SigmaSequence::from_values(vec![0.4]).unwrap(), &two).unwrap(), 0.0);
        let p = power_profile(1000, 1.0).unwrap();
        let got = commutator_hs_norm(&p, &m).unwrap();
        // 998 adjacent pairs, each with gap 1/N.
        let want = (2.0 * 998.0 / 1000.0f64).sqrt() / 1000.0;
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        assert!(got <= commutator_bound(&p, &m));
        assert!(commutator_hs_norm(&p, &two).is_err());
    }

    #[test]
    fn constant_target() {
        let prof = target_profile(500, &TargetLaw::Constant(2.5)).unwrap();
        assert!(prof.sigma.values().iter().all(|v| *v == 2.5));
        assert_eq!(mesh(&prof.sigma), 0.0);
        assert_eq!(prof.bridges, 0);
    }

    #[test]
    fn uniform_target() {
        let n = 10_000;
        let t = TargetLaw::uniform(0.0, 1.0).unwrap();
        let prof = target_profile(n, &t).unwrap();
        assert_eq!(prof.sigma.len(), n - 1);
        assert!(mesh(&prof.sigma) <= 1.0 / ((n + 1) as f64).ln());
        let w1 = t.wasserstein1(&prof.sigma.measure().unwrap());
        assert!(w1 < 0.01, "w1 = {w1}");
    }

    #[test]
    fn profile_is_sorted_with_exact_mesh() {
        for t in ["exponential:1", "pareto:1,3", "uniform:-2,5"] {
            let t: TargetLaw = t.parse().unwrap();
            for n in [50usize, 1000, 20_000] {
                let prof = target_profile(n, &t).unwrap();
                let v = prof.sigma.values();
                assert!(v.windows(2).all(|w| w[0] <= w[1]));
                assert!(mesh(&prof.sigma) <= prof.delta, "{t} n={n}");
                assert_eq!(prof.core + prof.bridges + prof.padding, n - 1);
            }
        }
    }

    #[test]
    fn errors() {
        assert!(target_profile(3, &TargetLaw::Constant(1.0)).is_err());
        let bad = |u: f64| if u < 0.5 { 1.0 } else { 0.0 };
        assert!(matches!(quantile_profile(100, &bad), Err(Error::NonMonotoneQuantile(_))));
        let nan = |_u: f64| f64::NAN;
        assert!(matches!(quantile_profile(100, &nan), Err(Error::WindowSearch(_))));
    }

    #[test]
    fn wasserstein_to_closed_forms() {
        // Point mass at 0 against Exponential(1): W1 = E T = 1.
        let e = TargetLaw::exponential(1.0).unwrap();
        let d0 = EmpiricalMeasure::point_mass(0.0).unwrap();
        assert!((e.wasserstein1(&d0) - 1.0).abs() < 1e-14);
        // Point mass at the median of Uniform(0,1): W1 = 1/4.
        let u = TargetLaw::uniform(0.0, 1.0).unwrap();
        assert!((u.wasserstein1(&EmpiricalMeasure::point_mass(0.5).unwrap()) - 0.25).abs() < 1e-14);
        // Midpoint grid of n atoms: W1 = 1/(4n).
        let n = 40;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let m = EmpiricalMeasure::from_samples(&grid).unwrap();
        assert!((u.wasserstein1(&m) - 0.25 / n as f64).abs() < 1e-14);
    }

    #[test]
    fn csv_round_trip() {
        let p = power_profile(7, 0.5).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = SigmaSequence::read_csv(&buf[..]).unwrap();
        assert_eq!(back, p);
        assert!(SigmaSequence::read_csv(&b"1\nx\n"[..]).is_err());
    }
}
