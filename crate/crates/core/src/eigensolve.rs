//! Eigenvalues of symmetric tridiagonal matrices by Sturm-count bisection,
//! the three-term characteristic-polynomial recursion, and the
//! Hoffman-Wielandt comparison.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensembles::TridiagonalMatrix;
use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;

/// Relative size of the pivot that replaces a (near-)zero pivot in the
/// Sturm recursion: `pivmin = 2^-40 * max |entry|`.
pub const ZERO_PIVOT_EPSILON: f64 = 9.094_947_017_729_282e-13; // 2^-40

const LANES: usize = 8;
const MAX_BISECTIONS: usize = 256;

/// Sorted eigenvalues of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSample {
    pub eigenvalues: Vec<f64>,
    pub source_n: usize,
}

impl SpectralSample {
    /// The empirical spectral distribution.
    pub fn to_measure(&self) -> EmpiricalMeasure {
        EmpiricalMeasure::from_samples(&self.eigenvalues).expect("eigenvalues are finite and nonempty")
    }

    /// `(1/N) sum lambda^k`.
    pub fn normalized_power_sum(&self, k: usize) -> f64 {
        let k = k as i32;
        self.eigenvalues.iter().map(|l| l.powi(k)).sum::<f64>() / self.source_n as f64
    }
}

fn pivmin(m: &TridiagonalMatrix) -> f64 {
    let scale = m.max_abs_entry();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    ZERO_PIVOT_EPSILON * scale
}

/// Number of eigenvalues strictly below `x`.
///
/// Counts negative pivots of `d_k = (a_k - x) - c_{k-1}^2 / d_{k-1}`; a pivot
/// with `|d| < pivmin` is replaced by `+-pivmin` (sign kept, zero taken as
/// positive).
pub fn sturm_count(m: &TridiagonalMatrix, x: f64) -> usize {
    let e2: Vec<f64> = m.offdiag().iter().map(|c| c * c).collect();
    count_below(m.diag(), &e2, x, pivmin(m))
}

fn count_below(diag: &[f64], e2: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut d = guard(diag[0] - x, pivmin);
    count += (d < 0.0) as usize;
    for k in 1..diag.len() {
        d = guard((diag[k] - x) - e2[k - 1] / d, pivmin);
        count += (d < 0.0) as usize;
    }
    count
}

#[inline(always)]
fn guard(d: f64, pivmin: f64) -> f64 {
    if d.abs() < pivmin {
        if d < 0.0 {
            -pivmin
        } else {
            pivmin
        }
    } else {
        d
    }
}

/// Sturm counts at `LANES` shifts at once; the independent recursions keep
/// the divider busy.
fn count_below_lanes(diag: &[f64], e2: &[f64], xs: &[f64; LANES], pivmin: f64) -> [usize; LANES] {
    let mut d = [0.0f64; LANES];
    let mut count = [0usize; LANES];
    for l in 0..LANES {
        d[l] = guard(diag[0] - xs[l], pivmin);
        count[l] = (d[l] < 0.0) as usize;
    }
    for k in 1..diag.len() {
        let a = diag[k];
        let e = e2[k - 1];
        for l in 0..LANES {
            let v = guard((a - xs[l]) - e / d[l], pivmin);
            d[l] = v;
            count[l] += (v < 0.0) as usize;
        }
    }
    count
}

/// All eigenvalues, each within `tol` of a true eigenvalue (multiplicities
/// respected), sorted ascending.
///
/// The matrix is split at exactly-zero couplings; each block is solved by
/// bisection on Sturm counts, starting from Gershgorin brackets refined by a
/// grid of counts. Eigenvalue indices are bisected in lockstep batches and
/// merged by index, so the output does not depend on scheduling.
pub fn eigenvalues(m: &TridiagonalMatrix, tol: f64) -> Result<SpectralSample> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    let n = m.dim();
    let piv = pivmin(m);
    let e2: Vec<f64> = m.offdiag().iter().map(|c| c * c).collect();

    let mut blocks = Vec::new();
    let mut start = 0;
    for (i, c) in m.offdiag().iter().enumerate() {
        if *c == 0.0 {
            blocks.push(start..i + 1);
            start = i + 1;
        }
    }
    blocks.push(start..n);

    let mut eigenvalues: Vec<f64> = Vec::with_capacity(n);
    let mut big = Vec::new();
    for r in blocks {
        match r.len() {
            1 => eigenvalues.push(m.diag()[r.start]),
            2 => {
                // Closed form for 2x2 blocks.
                let (a, b) = (m.diag()[r.start], m.diag()[r.start + 1]);
                let c = m.offdiag()[r.start];
                let mean = 0.5 * (a + b);
                let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
                eigenvalues.push(mean - rad);
                eigenvalues.push(mean + rad);
            }
            _ => big.push(r),
        }
    }
    if big.len() == 1 && big[0].len() == n {
        eigenvalues.extend(bisect_block(m.diag(), &e2, tol, piv));
    } else {
        let solved: Vec<Vec<f64>> = big
            .into_par_iter()
            .map(|r| bisect_block(&m.diag()[r.clone()], &e2[r.start..r.end - 1], tol, piv))
            .collect();
        eigenvalues.extend(solved.into_iter().flatten());
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectralSample {
        eigenvalues,
        source_n: n,
    })
}

fn bisect_block(diag: &[f64], e2: &[f64], tol: f64, piv: f64) -> Vec<f64> {
    let n = diag.len();
    // Gershgorin bracket with room for rounding and the pivot guard.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { e2[i - 1].sqrt() } else { 0.0 };
        let right = if i + 1 < n { e2[i].sqrt() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) * n as f64 + 2.0 * piv;
    lo -= pad;
    hi += pad;
    while count_below(diag, e2, lo, piv) > 0 {
        lo -= (hi - lo).max(1.0);
    }
    while count_below(diag, e2, hi, piv) < n {
        hi += (hi - lo).max(1.0);
    }

    // Grid of shifts: index k's bracket is [largest grid point with count <= k,
    // smallest grid point with count > k].
    let grid_len = n.clamp(2, 4096);
    let grid: Vec<f64> = (0..=grid_len)
        .map(|g| lo + (hi - lo) * g as f64 / grid_len as f64)
        .collect();
    let mut counts = vec![0usize; grid.len()];
    counts[grid_len] = n;
    let interior: Vec<usize> = (1..grid_len).collect();
    for chunk in interior.chunks(LANES) {
        let mut xs = [hi; LANES];
        for (l, &g) in chunk.iter().enumerate() {
            xs[l] = grid[g];
        }
        let c = count_below_lanes(diag, e2, &xs, piv);
        for (l, &g) in chunk.iter().enumerate() {
            counts[g] = c[l];
        }
    }
    // Counts are monotone in exact arithmetic; enforce it against rounding.
    for g in 1..counts.len() {
        counts[g] = counts[g].max(counts[g - 1]);
    }

    let mut lower = vec![lo; n];
    let mut upper = vec![hi; n];
    let mut g = 0;
    for k in 0..n {
        while counts[g + 1] <= k {
            g += 1;
        }
        lower[k] = grid[g];
        upper[k] = grid[g + 1];
    }

    let indices: Vec<usize> = (0..n).collect();
    let mut out = vec![0.0; n];
    for chunk in indices.chunks(LANES) {
        let mut a = [0.0; LANES];
        let mut b = [0.0; LANES];
        for (l, &k) in chunk.iter().enumerate() {
            a[l] = lower[k];
            b[l] = upper[k];
        }
        for l in chunk.len()..LANES {
            a[l] = a[0];
            b[l] = a[0];
        }
        for _ in 0..MAX_BISECTIONS {
            let mut active = false;
            let mut mids = [0.0; LANES];
            for l in 0..LANES {
                mids[l] = 0.5 * (a[l] + b[l]);
                if b[l] - a[l] > tol && mids[l] > a[l] && mids[l] < b[l] {
                    active = true;
                }
            }
            if !active {
                break;
            }
            let c = count_below_lanes(diag, e2, &mids, piv);
            for (l, &k) in chunk.iter().enumerate() {
                if b[l] - a[l] <= tol || !(mids[l] > a[l] && mids[l] < b[l]) {
                    continue;
                }
                if c[l] > k {
                    b[l] = mids[l];
                } else {
                    a[l] = mids[l];
                }
            }
        }
        for (l, &k) in chunk.iter().enumerate() {
            out[k] = 0.5 * (a[l] + b[l]);
        }
    }
    out
}

/// `P_N(z)` and `P_{N-1}(z)` scaled by a shared power of two.
///
/// `P_i` is the characteristic polynomial `det(zI - X)` of the trailing
/// `i x i` block (rows `N-i..N`), built bottom-up by
/// `P_{i+1} = (z - a) P_i - c^2 P_{i-1}`, so `P_{N-1}` belongs to the matrix
/// with its first row and column removed and
/// `(zI - X)^{-1}(0, 0) = P_{N-1}(z) / P_N(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharPolyPair {
    pub p_n: Complex64,
    pub p_n_minus_1: Complex64,
    /// True values are `p * 2^log2_scale`.
    pub log2_scale: i64,
}

impl CharPolyPair {
    /// Unscaled values; may overflow to infinity for large `N`.
    pub fn values(&self) -> (Complex64, Complex64) {
        let s = 2f64.powi(self.log2_scale.clamp(i32::MIN as i64, i32::MAX as i64) as i32);
        (self.p_n * s, self.p_n_minus_1 * s)
    }

    /// `P_{N-1}(z) / P_N(z)`, independent of the scale.
    pub fn corner_ratio(&self) -> Complex64 {
        self.p_n_minus_1 / self.p_n
    }
}

const RESCALE_HI: f64 = 1.340_780_792_994_259_7e154; // 2^512
const RESCALE_LO: f64 = 7.458_340_731_200_207e-155; // 2^-512

pub fn char_poly_eval(m: &TridiagonalMatrix, z: Complex64) -> CharPolyPair {
    let n = m.dim();
    let diag = m.diag();
    let off = m.offdiag();
    let mut prev = Complex64::new(1.0, 0.0); // P_0
    let mut cur = z - diag[n - 1]; // P_1
    let mut log2_scale: i64 = 0;
    for i in 1..n {
        let row = n - 1 - i;
        let c = off[row];
        let next = (z - diag[row]) * cur - prev * (c * c);
        prev = cur;
        cur = next;
        let mag = cur.re.abs().max(cur.im.abs());
        if mag > RESCALE_HI || (mag < RESCALE_LO && mag > 0.0) {
            let e = mag.log2().floor() as i32;
            let f = 2f64.powi(-e);
            cur *= f;
            prev *= f;
            log2_scale += e as i64;
        }
    }
    CharPolyPair {
        p_n: cur,
        p_n_minus_1: prev,
        log2_scale,
    }
}

/// Both sides of `sum (lambda_i^A - lambda_i^B)^2 <= ||A - B||_F^2` over
/// sorted spectra.
pub fn hoffman_wielandt_gap(a: &TridiagonalMatrix, b: &TridiagonalMatrix, tol: f64) -> Result<(f64, f64)> {
    let diff = a.difference(b)?;
    let la = eigenvalues(a, tol)?;
    let lb = eigenvalues(b, tol)?;
    let lhs = la
        .eigenvalues
        .iter()
        .zip(&lb.eigenvalues)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((lhs, diff.frobenius_norm_sq()))
}
