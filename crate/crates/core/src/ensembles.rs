//! Symmetric tridiagonal matrices and the random ensembles built on them.
//!
//! Storage convention: `offdiag[i]` couples rows `i` and `i + 1` (0-based,
//! top to bottom). In the bottom-up labelling `b_1, ..., b_{N-1}` used for
//! the characteristic-polynomial recursion, `offdiag[i]` is `b_{N-1-i}`.
//! Reversing the row order is a similarity, so no spectral quantity depends
//! on the choice.

use crate::error::{check_finite, Error, Result};
use crate::law::EntryDistribution;
use crate::seed::SeedSpec;
use crate::sigmaseq::{power_profile, SigmaSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::EmptyInput);
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                actual: offdiag.len(),
            });
        }
        check_finite(&diag)?;
        check_finite(&offdiag)?;
        Ok(Self { diag, offdiag })
    }

    /// Zero diagonal with the given couplings.
    pub fn from_offdiag(offdiag: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0; offdiag.len() + 1], offdiag)
    }

    /// Constant diagonal `a` and constant couplings `b`.
    pub fn toeplitz(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        Self::new(vec![a; n], vec![b; n - 1])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// `||X||_F^2 = sum a_k^2 + 2 sum c_k^2`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        let d: f64 = self.diag.iter().map(|x| x * x).sum();
        let o: f64 = self.offdiag.iter().map(|x| x * x).sum();
        d + 2.0 * o
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.offdiag)
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// `self - other`, entrywise.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        let diag = self.diag.iter().zip(&other.diag).map(|(a, b)| a - b).collect();
        let offdiag = self
            .offdiag
            .iter()
            .zip(&other.offdiag)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(diag, offdiag)
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|a| a + c).collect(),
            offdiag: self.offdiag.clone(),
        }
    }

    /// Same couplings, diagonal replaced.
    pub fn with_diag(&self, diag: Vec<f64>) -> Result<Self> {
        Self::new(diag, self.offdiag.clone())
    }

    /// Normalized traces `(1/N) tr X^k` for `k = 0..=k_max`, by exact banded
    /// matrix powers (no eigenvalues involved).
    pub fn normalized_power_traces(&self, k_max: usize) -> Vec<f64> {
        let n = self.dim() as f64;
        let mut out = Vec::with_capacity(k_max + 1);
        out.push(1.0);
        if k_max == 0 {
            return out;
        }
        let mut power = Banded::from_tridiagonal(self);
        out.push(power.trace() / n);
        for _ in 2..=k_max {
            power = power.times_tridiagonal(self);
            out.push(power.trace() / n);
        }
        out
    }
}

/// `(1/N) tr(M_{w_1} M_{w_2} ... M_{w_n})` for a word of 0-based indices into
/// `mats`. All matrices must share one dimension.
pub fn normalized_word_trace(mats: &[&TridiagonalMatrix], word: &[usize]) -> Result<f64> {
    let first = *mats.first().ok_or(Error::EmptyInput)?;
    let n = first.dim();
    for m in mats {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: m.dim(),
            });
        }
    }
    let pick = |c: usize| -> Result<&TridiagonalMatrix> {
        mats.get(c).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("word letter {c} but only {} matrices", mats.len()))
        })
    };
    let Some((&head, rest)) = word.split_first() else {
        return Ok(1.0);
    };
    let mut prod = Banded::from_tridiagonal(pick(head)?);
    for &c in rest {
        prod = prod.times_tridiagonal(pick(c)?);
    }
    Ok(prod.trace() / n as f64)
}

/// Dense band storage: row `i`, column `j` with `|i - j| <= half_width`.
struct Banded {
    n: usize,
    half_width: usize,
    data: Vec<f64>,
}

impl Banded {
    fn from_tridiagonal(m: &TridiagonalMatrix) -> Self {
        let n = m.dim();
        let width = 3;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            data[i * width + 1] = m.diag[i];
            if i + 1 < n {
                data[i * width + 2] = m.offdiag[i];
                data[(i + 1) * width] = m.offdiag[i];
            }
        }
        Self {
            n,
            half_width: 1,
            data,
        }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let w = self.half_width;
        if j + w < i || j > i + w || j >= self.n {
            return 0.0;
        }
        self.data[i * (2 * w + 1) + (j + w - i)]
    }

    fn times_tridiagonal(&self, t: &TridiagonalMatrix) -> Self {
        let n = self.n;
        let w = self.half_width.min(n.saturating_sub(1));
        let nw = (w + 1).min(n.saturating_sub(1)).max(w);
        let width = 2 * nw + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            let jlo = i.saturating_sub(nw);
            let jhi = (i + nw).min(n - 1);
            for j in jlo..=jhi {
                // C(i,j) = B(i,j-1) T(j-1,j) + B(i,j) T(j,j) + B(i,j+1) T(j+1,j)
                let mut acc = self.get(i, j) * t.diag[j];
                if j > 0 {
                    acc += self.get(i, j - 1) * t.offdiag[j - 1];
                }
                if j + 1 < n {
                    acc += self.get(i, j + 1) * t.offdiag[j];
                }
                data[i * width + (j + nw - i)] = acc;
            }
        }
        Self {
            n,
            half_width: nw,
            data,
        }
    }

    fn trace(&self) -> f64 {
        let w = self.half_width;
        (0..self.n).map(|i| self.data[i * (2 * w + 1) + w]).sum()
    }
}

/// Simple model: zero diagonal, i.i.d. couplings drawn in row order.
pub fn sample_simple(n: usize, entry_law: &EntryDistribution, seed: SeedSpec) -> Result<TridiagonalMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
    }
    entry_law.require_l2()?;
    let mut rng = seed.rng();
    let offdiag = entry_law.sample_n(&mut rng, n - 1);
    TridiagonalMatrix::from_offdiag(offdiag)
}

/// Deformed model: `offdiag[i] = sigma[i] * b_i`, diagonal from `diag_law`
/// (drawn after all couplings, from the same stream) or zero.
pub fn sample_deformed(
    n: usize,
    offdiag_law: &EntryDistribution,
    diag_law: Option<&EntryDistribution>,
    sigma: &SigmaSequence,
    seed: SeedSpec,
) -> Result<TridiagonalMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
    }
    if sigma.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            actual: sigma.len(),
        });
    }
    offdiag_law.require_l2()?;
    if let Some(d) = diag_law {
        d.require_l2()?;
    }
    let mut rng = seed.rng();
    let offdiag: Vec<f64> = sigma
        .values()
        .iter()
        .map(|s| s * offdiag_law.sample(&mut rng))
        .collect();
    let diag = match diag_law {
        Some(d) => d.sample_n(&mut rng, n),
        None => vec![0.0; n],
    };
    TridiagonalMatrix::new(diag, offdiag)
}

/// Power-profile model: row coupling `i` carries `((i + 1) / N)^alpha`.
pub fn sample_alpha(
    n: usize,
    alpha: f64,
    entry_law: &EntryDistribution,
    seed: SeedSpec,
) -> Result<TridiagonalMatrix> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if n == 1 {
        return sample_simple(1, entry_law, seed);
    }
    let sigma = power_profile(n, alpha)?;
    sample_deformed(n, entry_law, None, &sigma, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn law(s: &str) -> EntryDistribution {
        s.parse().unwrap()
    }

    #[test]
    fn simple_model_examples() {
        let seed = SeedSpec::new(1, 0);
        let m = sample_simple(1, &law("gaussian:0,1"), seed).unwrap();
        assert_eq!(m.diag(), &[0.0]);
        assert!(m.offdiag().is_empty());
        let m = sample_simple(5, &law("constant:1"), seed).unwrap();
        assert_eq!(m.offdiag(), &[1.0; 4]);
        assert_eq!(m.diag(), &[0.0; 5]);
        assert_eq!(m, TridiagonalMatrix::toeplitz(5, 0.0, 1.0).unwrap());
        let m = sample_simple(4, &law("bernoulli:1"), seed).unwrap();
        assert_eq!(m.offdiag(), &[1.0; 3]);
    }

    #[test]
    fn rejects_heavy_tails_and_bad_shapes() {
        let seed = SeedSpec::default();
        assert!(matches!(
            sample_simple(10, &law("pareto:1,1.5"), seed),
            Err(Error::InfiniteVariance(_))
        ));
        let sigma = SigmaSequence::new(4, vec![1.0; 3]).unwrap();
        assert!(matches!(
            sample_deformed(5, &law("constant:1"), None, &sigma, seed),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(TridiagonalMatrix::new(vec![0.0; 3], vec![1.0; 3]).is_err());
    }

    #[test]
    fn deformation_reductions() {
        let g = law("gaussian:0,1");
        let seed = SeedSpec::new(9, 3);
        let ones = SigmaSequence::new(50, vec![1.0; 49]).unwrap();
        assert_eq!(
            sample_deformed(50, &g, None, &ones, seed).unwrap(),
            sample_simple(50, &g, seed).unwrap()
        );
        assert_eq!(
            sample_alpha(50, 0.0, &g, seed).unwrap(),
            sample_simple(50, &g, seed).unwrap()
        );
        let sigma = SigmaSequence::new(3, vec![0.5, 2.0]).unwrap();
        let m = sample_deformed(3, &law("constant:1"), None, &sigma, seed).unwrap();
        assert_eq!(m.offdiag(), &[0.5, 2.0]);
        let m = sample_alpha(4, 1.0, &law("constant:1"), seed).unwrap();
        assert_eq!(m.offdiag(), &[0.25, 0.5, 0.75]);
    }

    #[test]
    fn diagonal_draws_leave_couplings_untouched() {
        let g = law("gaussian:0,1");
        let seed = SeedSpec::new(5, 0);
        let sigma = SigmaSequence::new(30, vec![1.0; 29]).unwrap();
        let plain = sample_deformed(30, &g, None, &sigma, seed).unwrap();
        let with_diag = sample_deformed(30, &g, Some(&law("gaussian:0,0.1")), &sigma, seed).unwrap();
        assert_eq!(plain.offdiag(), with_diag.offdiag());
        assert!(with_diag.diag().iter().any(|&a| a != 0.0));
    }

    #[test]
    fn seed_replication() {
        let g = law("uniform:-1,2");
        let a = sample_alpha(200, 0.7, &g, SeedSpec::new(77, 4)).unwrap();
        let b = sample_alpha(200, 0.7, &g, SeedSpec::new(77, 4)).unwrap();
        let c = sample_alpha(200, 0.7, &g, SeedSpec::new(77, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn frobenius_identity() {
        let m = TridiagonalMatrix::new(vec![1.0, -2.0, 0.5], vec![3.0, -1.0]).unwrap();
        assert_eq!(m.frobenius_norm_sq(), 1.0 + 4.0 + 0.25 + 2.0 * (9.0 + 1.0));
        // tr X^2 equals the Frobenius norm for symmetric X.
        let t = m.normalized_power_traces(2);
        assert_relative_eq!(t[2] * 3.0, m.frobenius_norm_sq(), epsilon = 1e-12);
    }

    fn dense(m: &TridiagonalMatrix) -> Vec<Vec<f64>> {
        let n = m.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = m.diag()[i];
            if i + 1 < n {
                a[i][i + 1] = m.offdiag()[i];
                a[i + 1][i] = m.offdiag()[i];
            }
        }
        a
    }

    fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut c = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    #[test]
    fn banded_traces_match_dense_products() {
        let x = sample_deformed(
            7,
            &law("gaussian:0.3,1"),
            Some(&law("uniform:-1,1")),
            &SigmaSequence::new(7, vec![1.0; 6]).unwrap(),
            SeedSpec::new(3, 1),
        )
        .unwrap();
        let y = sample_simple(7, &law("gaussian:0,1"), SeedSpec::new(3, 2)).unwrap();
        let (dx, dy) = (dense(&x), dense(&y));
        let traces = x.normalized_power_traces(9);
        let mut p = dx.clone();
        for (k, t) in traces.iter().enumerate().skip(1) {
            let tr: f64 = (0..7).map(|i| p[i][i]).sum();
            assert_relative_eq!(*t, tr / 7.0, epsilon = 1e-9, max_relative = 1e-12);
            if k < 9 {
                p = matmul(&p, &dx);
            }
        }
        let word = [0usize, 1, 1, 0, 1, 0, 0];
        let mats = [&dx, &dy];
        let mut q = mats[word[0]].clone();
        for &c in &word[1..] {
            q = matmul(&q, mats[c]);
        }
        let tr: f64 = (0..7).map(|i| q[i][i]).sum::<f64>() / 7.0;
        assert_relative_eq!(normalized_word_trace(&[&x, &y], &word).unwrap(), tr, max_relative = 1e-12);
    }

    #[test]
    fn power_traces_on_tiny_matrices() {
        let one = TridiagonalMatrix::new(vec![2.0], vec![]).unwrap();
        assert_eq!(one.normalized_power_traces(4), vec![1.0, 2.0, 4.0, 8.0, 16.0]);
        let two = TridiagonalMatrix::toeplitz(2, 0.0, 1.0).unwrap();
        assert_eq!(two.normalized_power_traces(5), vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }
}
