//! Finite atomic probability measures on the real line.

use crate::error::{check_finite, Error, Result};
use crate::law::MomentSequence;

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Sorted atoms `(location, weight)` with positive weights summing to one.
///
/// Weights are explicit so mixtures with irrational weights (the Bernoulli
/// limit, scale mixtures) are represented without resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    atoms: Vec<(f64, f64)>,
}

impl EmpiricalMeasure {
    /// Each sample becomes an atom of weight `1/n`; repeats stay repeated.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        check_finite(samples)?;
        let w = 1.0 / samples.len() as f64;
        let mut atoms: Vec<(f64, f64)> = samples.iter().map(|&x| (x, w)).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { atoms })
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::from_samples(&[x])
    }

    /// Weighted atoms in any order. Weights must be positive and sum to 1
    /// within 1e-12.
    pub fn from_weighted(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, &(x, w)) in atoms.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { index: i, value: x });
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "atom {i} has non-positive weight {w}"
                )));
            }
        }
        let total = neumaier_sum(atoms.iter().map(|a| a.1));
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::WeightSum(total));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn locations(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.0)
    }

    pub fn total_mass(&self) -> f64 {
        neumaier_sum(self.atoms.iter().map(|a| a.1))
    }

    /// Combines atoms sharing exactly the same location.
    pub fn merged(&self) -> Self {
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(self.atoms.len());
        for &(x, w) in &self.atoms {
            match atoms.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => atoms.push((x, w)),
            }
        }
        Self { atoms }
    }

    /// `sum w_i x_i^k`, accumulated in ascending location order.
    pub fn moment(&self, k: usize) -> f64 {
        let k = k as i32;
        self.atoms.iter().map(|&(x, w)| w * x.powi(k)).sum()
    }

    /// Right-continuous CDF `mu((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.0 <= x);
        self.atoms[..idx].iter().map(|a| a.1).sum::<f64>().min(1.0)
    }

    /// Mass of the closed interval `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.0 >= lo && a.0 <= hi)
            .map(|a| a.1)
            .sum()
    }

    /// Sup-distance between the two right-continuous CDFs.
    pub fn ks_distance(&self, other: &Self) -> f64 {
        let mut best: f64 = 0.0;
        merge_walk(self, other, |_, _, fa, fb| best = best.max((fa - fb).abs()));
        best
    }

    /// `W_1 = int |F_a - F_b| dx`, exact for atomic measures.
    pub fn wasserstein1(&self, other: &Self) -> f64 {
        let mut total = 0.0;
        let mut prev: Option<(f64, f64, f64)> = None;
        merge_walk(self, other, |x, _, fa, fb| {
            if let Some((px, pa, pb)) = prev {
                total += (pa - pb).abs() * (x - px);
            }
            prev = Some((x, fa, fb));
        });
        total
    }

    /// Kolmogorov-Smirnov statistic against a continuous CDF, checking both
    /// sides of every jump.
    pub fn ks_to_cdf(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let mut below = 0.0;
        let mut best: f64 = 0.0;
        for (x, w) in self.merged().atoms {
            let f = cdf(x);
            let above = (below + w).min(1.0);
            best = best.max((below - f).abs()).max((above - f).abs());
            below = above;
        }
        best
    }
}

impl MomentSequence for EmpiricalMeasure {
    fn moment(&self, k: usize) -> Result<f64> {
        Ok(EmpiricalMeasure::moment(self, k))
    }
}

/// Measure built from a sample list (uniform weights).
pub fn measure_from_samples(samples: &[f64]) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::from_samples(samples)
}

pub fn ks_distance(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    a.ks_distance(b)
}

pub fn wasserstein1(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    a.wasserstein1(b)
}

/// Visits every distinct location of the union of the supports in ascending
/// order, passing both CDFs evaluated there.
fn merge_walk(a: &EmpiricalMeasure, b: &EmpiricalMeasure, mut visit: impl FnMut(f64, usize, f64, f64)) {
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let (xa, xb) = (&a.atoms, &b.atoms);
    let mut step = 0;
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i].0 == x {
            fa += xa[i].1;
            i += 1;
        }
        while j < xb.len() && xb[j].0 == x {
            fb += xb[j].1;
            j += 1;
        }
        if i == xa.len() {
            fa = 1.0;
        }
        if j == xb.len() {
            fb = 1.0;
        }
        visit(x, step, fa.min(1.0), fb.min(1.0));
        step += 1;
    }
}

pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
