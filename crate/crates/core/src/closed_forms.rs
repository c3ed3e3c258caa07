//! Closed-form laws used as oracles: Toeplitz spectra and the arcsine
//! family, Ullmann's law, and the Bernoulli-coupling limit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::pathmoments::central_binomial;
use crate::seed::SeedSpec;
use crate::stieltjes::{empirical_transform, semicircle_transform};
use crate::uhp::ComplexUHP;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `2 cos(j pi/(k+1))` computed as `2 sin(pi (k+1-2j) / (2(k+1)))` with the
/// fraction reduced, so the middle root is exactly 0, the spectrum is exactly
/// symmetric and equal angles from different `k` give equal values.
pub fn toeplitz_eigenvalue(k: usize, j: usize) -> f64 {
    let num = k as i64 + 1 - 2 * j as i64;
    let den = 2 * (k as u64 + 1);
    if num == 0 {
        return 0.0;
    }
    let g = gcd(num.unsigned_abs(), den);
    let (num, den) = (num / g as i64, den / g);
    2.0 * (PI * num as f64 / den as f64).sin()
}

/// Eigenvalues of the `k x k` Toeplitz matrix (zero diagonal, unit
/// couplings), ascending.
pub fn toeplitz_eigenvalues(k: usize) -> Vec<f64> {
    (1..=k).rev().map(|j| toeplitz_eigenvalue(k, j)).collect()
}

/// Normalized ESD of the `k x k` Toeplitz matrix.
pub fn toeplitz_esd(k: usize) -> Result<EmpiricalMeasure> {
    if k == 0 {
        return Err(Error::InvalidParameter("Toeplitz size must be >= 1".into()));
    }
    EmpiricalMeasure::from_samples(&toeplitz_eigenvalues(k))
}

/// CDF of the arcsine law on `[-r, r]`.
pub fn arcsine_cdf(x: f64, r: f64) -> f64 {
    if x <= -r {
        0.0
    } else if x >= r {
        1.0
    } else {
        0.5 + (x / r).asin() / PI
    }
}

/// Density of the arcsine law on `[-r, r]`.
pub fn arcsine_density(x: f64, r: f64) -> f64 {
    if x.abs() >= r {
        0.0
    } else {
        1.0 / (PI * (r * r - x * x).sqrt())
    }
}

/// Even moments `C(2j, j)/(2 alpha j + 1)` of `U^alpha X`, `X` arcsine on `[-2, 2]`.
pub fn ullmann_moment(k: usize, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let j = k / 2;
    Ok(central_binomial(j) as f64 / (2.0 * alpha * j as f64 + 1.0))
}

/// `n` draws of `U^alpha * 2 cos(pi V)`.
pub fn ullmann_sample(n: usize, alpha: f64, seed: SeedSpec) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    let mut rng = seed.rng();
    let xs: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            u.powf(alpha) * 2.0 * (PI * v).cos()
        })
        .collect();
    EmpiricalMeasure::from_samples(&xs)
}

/// Truncated limit law of the simple model with Bernoulli(p) couplings.
///
/// Couplings equal to 0 cut the chain into independent Toeplitz blocks; a
/// block of size `k` occurs with frequency `q^2 p^(k-1)` per site, so each of
/// its `k` eigenvalues carries weight `q^2 p^(k-1)`. Blocks up to size `K`
/// are kept and the remaining mass `p^K (1 + K q)` is placed at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliLimit {
    pub p: f64,
    pub q: f64,
    pub truncation: usize,
    pub measure: EmpiricalMeasure,
    pub remainder_mass: f64,
}

impl BernoulliLimit {
    /// Weight of atom 0 from odd blocks up to the truncation, remainder excluded.
    pub fn zero_mass_series(&self) -> f64 {
        (1..=self.truncation)
            .step_by(2)
            .map(|k| self.q * self.q * self.p.powi(k as i32 - 1))
            .sum()
    }

    /// Limit of [`Self::zero_mass_series`] as `K -> inf`: `q/(1+p)`.
    pub fn zero_mass_limit(&self) -> f64 {
        self.q / (1.0 + self.p)
    }

    /// Mass of the truncated law in `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.measure.mass_in(lo, hi)
    }

    pub fn transform(&self, z: ComplexUHP) -> Complex64 {
        empirical_transform(&self.measure, z)
    }
}

pub fn bernoulli_limit(p: f64, truncation: usize) -> Result<BernoulliLimit> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 1), got {p}")));
    }
    if truncation == 0 {
        return Err(Error::InvalidParameter("truncation K must be >= 1".into()));
    }
    let q = 1.0 - p;
    let mut atoms = Vec::new();
    for k in 1..=truncation {
        let w = q * q * p.powi(k as i32 - 1);
        if w == 0.0 {
            break;
        }
        atoms.extend(toeplitz_eigenvalues(k).into_iter().map(|x| (x, w)));
    }
    let remainder_mass = p.powi(truncation as i32) * (1.0 + truncation as f64 * q);
    if remainder_mass > 0.0 {
        atoms.push((0.0, remainder_mass));
    }
    let measure = EmpiricalMeasure::from_weighted(atoms)?.merged();
    Ok(BernoulliLimit {
        p,
        q,
        truncation,
        measure,
        remainder_mass,
    })
}

/// Experimental three-term form `q^2/z + 2qp/(z - s) + p^2/(z - 2s)` with
/// `s = 1/(z - s)`. Not a validated representation of the Bernoulli limit;
/// exposed only for comparison against [`BernoulliLimit::transform`].
pub fn bernoulli_three_term_transform(p: f64, z: ComplexUHP) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    let q = 1.0 - p;
    let s = semicircle_transform(z, 2.0)?;
    let zv = z.value();
    Ok(q * q / zv + 2.0 * q * p / (zv - s) + p * p / (zv - 2.0 * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::TridiagonalMatrix;
    use crate::eigensolve::eigenvalues;

    #[test]
    fn toeplitz_examples() {
        assert_eq!(toeplitz_eigenvalues(1), vec![0.0]);
        let two = toeplitz_eigenvalues(2);
        assert!((two[0] + 1.0).abs() < 1e-15 && (two[1] - 1.0).abs() < 1e-15);
        let three = toeplitz_eigenvalues(3);
        let r2 = 2f64.sqrt();
        assert!((three[0] + r2).abs() < 1e-15 && three[1] == 0.0 && (three[2] - r2).abs() < 1e-15);
        for k in 1..40 {
            let v = toeplitz_eigenvalues(k);
            for j in 0..k {
                assert_eq!(v[j], -v[k - 1 - j]);
            }
            assert!(v.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(toeplitz_esd(0).is_err());
    }

    #[test]
    fn toeplitz_matches_eigensolver() {
        for k in [1usize, 2, 5, 33, 200] {
            let m = TridiagonalMatrix::toeplitz(k, 0.0, 1.0).unwrap();
            let got = eigenvalues(&m, 1e-13).unwrap().eigenvalues;
            let want = toeplitz_eigenvalues(k);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ullmann_examples() {
        assert_eq!(ullmann_moment(2, 0.0).unwrap(), 2.0);
        assert_eq!(ullmann_moment(4, 0.0).unwrap(), 6.0);
        assert!((ullmann_moment(2, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ullmann_moment(5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn ullmann_sampling_matches_moments() {
        let n = 1_000_000;
        for alpha in [0.0, 1.0] {
            let mu = ullmann_sample(n, alpha, SeedSpec::new(21, 0)).unwrap();
            for k in [2usize, 4, 6, 8] {
                let want = ullmann_moment(k, alpha).unwrap();
                // Standard error from the exact 2k-th moment.
                let var = ullmann_moment(2 * k, alpha).unwrap() - want * want;
                let se = (var / n as f64).sqrt();
                let got = mu.moment(k);
                assert!((got - want).abs() < 4.0 * se, "alpha={alpha} k={k}: {got} vs {want}");
            }
            assert!(mu.moment(3).abs() < 0.02);
        }
        let big = ullmann_sample(10_000, 50.0, SeedSpec::new(2, 0)).unwrap();
        assert!(big.moment(2) < 0.05);
    }

    #[test]
    fn bernoulli_mass_and_symmetry() {
        for (p, k) in [(0.5, 60usize), (0.1, 3), (0.9, 40), (0.3, 1)] {
            let b = bernoulli_limit(p, k).unwrap();
            assert!((b.measure.total_mass() - 1.0).abs() < 1e-12, "p={p} K={k}");
            assert!(b.measure.moment(1).abs() < 1e-12);
            assert!(b.measure.moment(3).abs() < 1e-12);
        }
        let b = bernoulli_limit(0.5, 60).unwrap();
        assert!(b.remainder_mass < 1e-16);
        assert!((b.zero_mass_series() - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.zero_mass_limit() - 1.0 / 3.0).abs() < 1e-15);
        assert!(bernoulli_limit(0.0, 5).is_err());
        assert!(bernoulli_limit(1.0, 5).is_err());
        assert!(bernoulli_limit(0.5, 0).is_err());
    }

    #[test]
    fn bernoulli_small_p_is_nearly_a_point_mass() {
        let b = bernoulli_limit(1e-6, 10).unwrap();
        assert!(b.mass_in(0.0, 0.0) > 1.0 - 1e-5);
    }

    #[test]
    fn bernoulli_second_moment_is_two_p() {
        // E tr X^2 / N = 2 E b^2 = 2p for the simple model.
        for p in [0.2, 0.5, 0.8] {
            let b = bernoulli_limit(p, 200).unwrap();
            assert!((b.measure.moment(2) - 2.0 * p).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn three_term_is_a_transform_value() {
        let z = ComplexUHP::new(0.3, 0.5).unwrap();
        let s = bernoulli_three_term_transform(0.5, z).unwrap();
        assert!(s.im < 0.0);
        let s0 = bernoulli_three_term_transform(0.0, z).unwrap();
        assert!((s0 - 1.0 / z.value()).norm() < 1e-15);
    }
}
