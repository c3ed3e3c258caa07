//! Path sums for the limit moments of tridiagonal models.
//!
//! A bridge of length `k` is a `+-1` walk from 0 back to 0. Level `j`
//! (stored by its lower integer endpoint, so level 0 is the half-integer 1/2)
//! is crossed by every step between positions `j` and `j + 1`. The limit
//! moment is the sum over bridges of the product over levels of the entry
//! moment of order "number of crossings".

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::law::MomentSequence;

/// Longest path the enumerators accept; `C(24, 12)` is about 2.7 million.
pub const MAX_PATH_LENGTH: usize = 24;

fn check_length(k: usize) -> Result<()> {
    if k > MAX_PATH_LENGTH {
        Err(Error::PathGuard(k))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePath {
    steps: Vec<i8>,
}

impl LatticePath {
    /// A bridge: every step is `+-1` and the walk returns to 0.
    pub fn new(steps: Vec<i8>) -> Result<Self> {
        if steps.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidPath("steps must be +1 or -1".into()));
        }
        if steps.iter().map(|s| *s as i64).sum::<i64>() != 0 {
            return Err(Error::InvalidPath("path does not return to 0".into()));
        }
        Ok(LatticePath { steps })
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Prefix sums, starting with 0; length `k + 1`.
    pub fn positions(&self) -> Vec<i64> {
        let mut pos = Vec::with_capacity(self.steps.len() + 1);
        let mut p = 0i64;
        pos.push(p);
        for s in &self.steps {
            p += *s as i64;
            pos.push(p);
        }
        pos
    }
}

impl fmt::Display for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            f.write_str(if *s > 0 { "U" } else { "D" })?;
        }
        Ok(())
    }
}

/// Crossing counts keyed by the lower endpoint of each level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossingProfile {
    pub counts: BTreeMap<i64, usize>,
}

impl CrossingProfile {
    /// Counts keyed by the half-integer level itself.
    pub fn by_half_level(&self) -> Vec<(f64, usize)> {
        self.counts.iter().map(|(j, c)| (*j as f64 + 0.5, *c)).collect()
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

pub fn crossing_profile(path: &LatticePath) -> CrossingProfile {
    let mut counts = BTreeMap::new();
    let mut p = 0i64;
    for s in path.steps() {
        let level = if *s > 0 { p } else { p - 1 };
        *counts.entry(level).or_insert(0) += 1;
        p += *s as i64;
    }
    CrossingProfile { counts }
}

/// One color per step, numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColoredWord {
    colors: Vec<usize>,
}

impl ColoredWord {
    pub fn new(colors: Vec<usize>, number_of_models: usize) -> Result<Self> {
        if let Some(c) = colors.iter().find(|c| **c == 0 || **c > number_of_models) {
            return Err(Error::InvalidParameter(format!(
                "color {c} outside 1..={number_of_models}"
            )));
        }
        Ok(ColoredWord { colors })
    }

    /// Parses letters: `X`, `Y`, `Z`, ... map to colors 1, 2, 3, ...
    pub fn from_letters(word: &str) -> Result<Self> {
        let mut colors = Vec::with_capacity(word.len());
        for ch in word.chars() {
            let c = ch.to_ascii_uppercase();
            if !('X'..='Z').contains(&c) && !('A'..='W').contains(&c) {
                return Err(Error::Parse(format!("bad letter {ch:?} in word {word:?}")));
            }
            // X, Y, Z first, then A..W.
            let idx = match c {
                'X' => 1,
                'Y' => 2,
                'Z' => 3,
                _ => 4 + (c as usize - 'A' as usize),
            };
            colors.push(idx);
        }
        let k = colors.iter().copied().max().unwrap_or(0);
        ColoredWord::new(colors, k)
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn number_of_colors(&self) -> usize {
        self.colors.iter().copied().max().unwrap_or(0)
    }
}

/// All bridges of length `k` in lexicographic order with `+1 < -1`.
pub fn enumerate_bridges(k: usize) -> Result<Vec<LatticePath>> {
    check_length(k)?;
    let mut out = Vec::new();
    if k % 2 == 1 {
        return Ok(out);
    }
    let mut steps = Vec::with_capacity(k);
    fn rec(k: usize, pos: i64, steps: &mut Vec<i8>, out: &mut Vec<LatticePath>) {
        let left = (k - steps.len()) as i64;
        if left == 0 {
            out.push(LatticePath { steps: steps.clone() });
            return;
        }
        for s in [1i8, -1] {
            let next = pos + s as i64;
            if next.abs() < left {
                steps.push(s);
                rec(k, next, steps, out);
                steps.pop();
            }
        }
    }
    rec(k, 0, &mut steps, &mut out);
    Ok(out)
}

/// Lazily filled table of moments `m(0..=max)`; errors surface only when a
/// missing order is actually used.
struct Table<T> {
    values: Vec<std::result::Result<T, Error>>,
}

impl<T: Clone> Table<T> {
    fn get(&self, k: usize) -> Result<T> {
        self.values[k].clone()
    }
}

fn float_table(m: &dyn MomentSequence, max: usize, even_only: bool) -> Table<f64> {
    let values = (0..=max)
        .map(|k| {
            if k == 0 {
                Ok(1.0)
            } else if even_only && k % 2 == 1 {
                Ok(0.0)
            } else {
                m.moment(k)
            }
        })
        .collect();
    Table { values }
}

/// Sum over bridges of `prod_levels table[c_j]` for a generic ring.
///
/// The walk is split on its first few steps and the pieces are reduced in
/// index order.
fn bridge_sum<T>(k: usize, table: &Table<T>) -> Result<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + Send + Sync,
{
    check_length(k)?;
    if k % 2 == 1 {
        return Ok(T::zero());
    }
    if k == 0 {
        return Ok(T::one());
    }
    let half = k / 2;
    let width = 2 * half;
    // Level j is stored at j + half.
    let prefix_len = k.min(8);
    let mut prefixes: Vec<Vec<i8>> = vec![vec![]];
    for _ in 0..prefix_len {
        let mut next = Vec::with_capacity(prefixes.len() * 2);
        for p in &prefixes {
            for s in [1i8, -1] {
                let mut q = p.clone();
                q.push(s);
                let pos: i64 = q.iter().map(|x| *x as i64).sum();
                if pos.unsigned_abs() as usize <= k - q.len() {
                    next.push(q);
                }
            }
        }
        prefixes = next;
    }
    let partials: Vec<Result<T>> = prefixes
        .par_iter()
        .map(|prefix| {
            let mut counts = vec![0usize; width];
            let mut pos = 0i64;
            for s in prefix {
                let level = if *s > 0 { pos } else { pos - 1 };
                counts[(level + half as i64) as usize] += 1;
                pos += *s as i64;
            }
            let mut acc = T::zero();
            walk(k, prefix.len(), pos, half, &mut counts, table, &mut acc)?;
            Ok(acc)
        })
        .collect();
    let mut total = T::zero();
    for p in partials {
        total = total + p?;
    }
    Ok(total)
}

fn walk<T>(
    k: usize,
    done: usize,
    pos: i64,
    half: usize,
    counts: &mut [usize],
    table: &Table<T>,
    acc: &mut T,
) -> Result<()>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>,
{
    let left = k - done;
    if left == 0 {
        let mut prod = T::one();
        for &c in counts.iter() {
            if c > 0 {
                prod = prod * table.get(c)?;
            }
        }
        *acc = acc.clone() + prod;
        return Ok(());
    }
    for s in [1i64, -1] {
        let next = pos + s;
        if (next.unsigned_abs() as usize) < left || (next == 0 && left == 1) {
            let level = (if s > 0 { pos } else { pos - 1 } + half as i64) as usize;
            counts[level] += 1;
            walk(k, done + 1, next, half, counts, table, acc)?;
            counts[level] -= 1;
        }
    }
    Ok(())
}

/// `L_k = (1/(alpha k + 1)) sum_bridges prod_levels m(c_j)`; zero for odd `k`.
pub fn limit_moment(k: usize, m: &dyn MomentSequence, alpha: f64) -> Result<f64> {
    check_length(k)?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let table = float_table(m, k, true);
    Ok(bridge_sum(k, &table)? / (alpha * k as f64 + 1.0))
}

/// Exact rational version of [`limit_moment`]; `moments[j]` is `m(j)` and
/// must cover every even order up to `k`.
pub fn limit_moment_exact(k: usize, moments: &[Ratio<i128>], alpha: Ratio<i128>) -> Result<Ratio<i128>> {
    check_length(k)?;
    if alpha < Ratio::zero() {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if k % 2 == 1 {
        return Ok(Ratio::zero());
    }
    let values = (0..=k)
        .map(|j| {
            if j == 0 {
                Ok(Ratio::one())
            } else {
                moments.get(j).copied().ok_or(Error::MissingMoment {
                    law: "exact table".into(),
                    order: j,
                })
            }
        })
        .collect();
    let sum = bridge_sum(k, &Table { values })?;
    Ok(sum / (alpha * Ratio::from_integer(k as i128) + Ratio::one()))
}

/// Even moments of a product `T X` of independent variables.
pub fn mixture_moment(k: usize, m_x: &dyn MomentSequence, m_t: &dyn MomentSequence) -> Result<f64> {
    if k % 2 == 1 {
        return Ok(0.0);
    }
    Ok(m_x.moment(k)? * m_t.moment(k)?)
}

/// Mixed moment for independent models, one moment accessor per color.
///
/// Sums over all sign assignments forming a bridge the product over
/// `(level, color)` pairs of `E b_color^count`, odd counts included.
pub fn joint_moment(word: &ColoredWord, per_color_moments: &[&dyn MomentSequence]) -> Result<f64> {
    let k = word.len();
    check_length(k)?;
    let colors = word.number_of_colors();
    if per_color_moments.len() < colors {
        return Err(Error::DimensionMismatch {
            expected: colors,
            actual: per_color_moments.len(),
        });
    }
    if k % 2 == 1 {
        return Ok(0.0);
    }
    if k == 0 {
        return Ok(1.0);
    }
    let mut steps_per_color = vec![0usize; colors];
    for c in word.colors() {
        steps_per_color[c - 1] += 1;
    }
    let tables: Vec<Table<f64>> = (0..colors)
        .map(|c| float_table(per_color_moments[c], steps_per_color[c], false))
        .collect();
    let half = k / 2;
    let width = 2 * half;
    let mut counts = vec![0usize; width * colors];
    let mut acc = 0.0;
    joint_walk(word.colors(), 0, 0, half, width, &mut counts, &tables, &mut acc)?;
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn joint_walk(
    colors: &[usize],
    done: usize,
    pos: i64,
    half: usize,
    width: usize,
    counts: &mut [usize],
    tables: &[Table<f64>],
    acc: &mut f64,
) -> Result<()> {
    let left = colors.len() - done;
    if left == 0 {
        let mut prod = 1.0;
        for (c, table) in tables.iter().enumerate() {
            for &n in &counts[c * width..(c + 1) * width] {
                if n > 0 {
                    prod *= table.get(n)?;
                }
            }
        }
        *acc += prod;
        return Ok(());
    }
    let color = colors[done] - 1;
    for s in [1i64, -1] {
        let next = pos + s;
        if (next.unsigned_abs() as usize) < left || (next == 0 && left == 1) {
            let level = (if s > 0 { pos } else { pos - 1 } + half as i64) as usize;
            counts[color * width + level] += 1;
            joint_walk(colors, done + 1, next, half, width, counts, tables, acc)?;
            counts[color * width + level] -= 1;
        }
    }
    Ok(())
}

/// Central binomial coefficient `C(2j, j)` as an exact integer.
pub fn central_binomial(j: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..j as u128 {
        c = c * (2 * j as u128 - i) / (i + 1);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::{EntryDistribution, MomentTable};
    use proptest::prelude::*;

    fn path(s: &[i8]) -> LatticePath {
        LatticePath::new(s.to_vec()).unwrap()
    }

    #[test]
    fn bridges_small() {
        assert_eq!(enumerate_bridges(0).unwrap(), vec![path(&[])]);
        assert_eq!(enumerate_bridges(2).unwrap(), vec![path(&[1, -1]), path(&[-1, 1])]);
        assert_eq!(enumerate_bridges(4).unwrap().len(), 6);
        assert!(enumerate_bridges(7).unwrap().is_empty());
        assert!(enumerate_bridges(MAX_PATH_LENGTH + 2).is_err());
        for k in (0..=16).step_by(2) {
            let b = enumerate_bridges(k).unwrap();
            assert_eq!(b.len() as u128, central_binomial(k / 2));
            assert!(b.windows(2).all(|w| w[0].steps().iter().map(|s| -s).lt(w[1].steps().iter().map(|s| -s))));
        }
    }

    #[test]
    fn invalid_paths() {
        assert!(LatticePath::new(vec![1, 1]).is_err());
        assert!(LatticePath::new(vec![2, -2]).is_err());
    }

    #[test]
    fn crossing_examples() {
        let p = |s: &[i8]| crossing_profile(&path(s)).counts.into_iter().collect::<Vec<_>>();
        assert_eq!(p(&[1, -1]), vec![(0, 2)]);
        assert_eq!(p(&[1, 1, -1, -1]), vec![(0, 2), (1, 2)]);
        assert_eq!(p(&[1, -1, 1, -1]), vec![(0, 4)]);
        assert_eq!(p(&[-1, 1]), vec![(-1, 2)]);
        assert_eq!(crossing_profile(&path(&[1, 1, -1, -1])).by_half_level(), vec![(0.5, 2), (1.5, 2)]);
    }

    #[test]
    fn crossing_counts_are_even_and_sum_to_length() {
        for k in (0..=12).step_by(2) {
            for b in enumerate_bridges(k).unwrap() {
                let prof = crossing_profile(&b);
                assert_eq!(prof.total(), k);
                assert!(prof.counts.values().all(|c| c % 2 == 0 && *c > 0));
            }
        }
    }

    #[test]
    fn limit_moment_examples() {
        let m = MomentTable(vec![1.0, 0.0, 1.7, 0.0, 5.3]);
        assert_eq!(limit_moment(2, &m, 0.0).unwrap(), 2.0 * 1.7);
        let want = 4.0 * 1.7 * 1.7 + 2.0 * 5.3;
        assert!((limit_moment(4, &m, 0.0).unwrap() - want).abs() < 1e-12);
        assert_eq!(limit_moment(3, &m, 0.0).unwrap(), 0.0);
        let one = EntryDistribution::constant(1.0).unwrap();
        for j in 0..=6 {
            let got = limit_moment(2 * j, &one, 0.0).unwrap();
            assert_eq!(got, central_binomial(j) as f64);
        }
        // Missing moments are reported.
        assert!(limit_moment(6, &m, 0.0).is_err());
        assert!(limit_moment(2, &m, -1.0).is_err());
    }

    #[test]
    fn limit_moment_matches_enumeration() {
        let g = EntryDistribution::gaussian(0.0, 1.3).unwrap();
        for k in [2usize, 4, 6, 8, 10] {
            let direct: f64 = enumerate_bridges(k)
                .unwrap()
                .iter()
                .map(|b| {
                    crossing_profile(b)
                        .counts
                        .values()
                        .map(|c| g.moment(*c).unwrap())
                        .product::<f64>()
                })
                .sum();
            let fast = limit_moment(k, &g, 0.0).unwrap();
            assert!((fast - direct).abs() <= 1e-12 * direct, "k={k}");
        }
    }

    #[test]
    fn exact_identities() {
        let one = vec![Ratio::from_integer(1i128); 13];
        for j in 0..=6 {
            for a in [0i128, 1, 2, 5] {
                let alpha = Ratio::from_integer(a);
                let got = limit_moment_exact(2 * j, &one, alpha).unwrap();
                let want = Ratio::new(central_binomial(j) as i128, 2 * a * j as i128 + 1);
                assert_eq!(got, want);
            }
        }
        let half = Ratio::new(1i128, 2);
        assert_eq!(
            limit_moment_exact(4, &one, half).unwrap(),
            Ratio::new(6i128, 3)
        );
    }

    #[test]
    fn mixture_examples() {
        let x = |k: usize| Ok(if k.is_multiple_of(2) { central_binomial(k / 2) as f64 } else { 0.0 });
        let t_one = |_k: usize| Ok(1.0);
        let t_unif = |k: usize| Ok(1.0 / (k as f64 + 1.0));
        assert_eq!(mixture_moment(6, &x, &t_one).unwrap(), 20.0);
        assert_eq!(mixture_moment(5, &x, &t_one).unwrap(), 0.0);
        for j in 1..=4 {
            let mix = mixture_moment(2 * j, &x, &t_unif).unwrap();
            let one = EntryDistribution::constant(1.0).unwrap();
            let lim = limit_moment(2 * j, &one, 1.0).unwrap();
            assert!((mix - lim).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_examples() {
        let g1 = EntryDistribution::gaussian(0.0, 1.5).unwrap();
        let g2 = EntryDistribution::gaussian(0.0, 0.5).unwrap();
        let ms: [&dyn MomentSequence; 2] = [&g1, &g2];
        let w = |c: Vec<usize>| ColoredWord::new(c, 2).unwrap();
        assert!((joint_moment(&w(vec![1, 1]), &ms).unwrap() - 2.0 * 2.25).abs() < 1e-12);
        assert_eq!(joint_moment(&w(vec![1, 2]), &ms).unwrap(), 0.0);
        let got = joint_moment(&w(vec![1, 2, 1, 2]), &ms).unwrap();
        assert!((got - 2.0 * 2.25 * 0.25).abs() < 1e-12);
        assert!(ColoredWord::new(vec![0], 2).is_err());
        assert!(ColoredWord::new(vec![3], 2).is_err());
        assert_eq!(ColoredWord::from_letters("XYXY").unwrap().colors(), &[1, 2, 1, 2]);
        assert!(joint_moment(&w(vec![1, 2]), &ms[..1]).is_err());
    }

    #[test]
    fn joint_uses_odd_moments() {
        // Non-centered colors: word (1,2) crosses one level once per color.
        let a = EntryDistribution::constant(2.0).unwrap();
        let b = EntryDistribution::constant(3.0).unwrap();
        let ms: [&dyn MomentSequence; 2] = [&a, &b];
        let got = joint_moment(&ColoredWord::new(vec![1, 2], 2).unwrap(), &ms).unwrap();
        assert_eq!(got, 2.0 * 6.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn single_color_joint_equals_limit(j in 0usize..6, sd in 0.1f64..2.0) {
            let g = EntryDistribution::gaussian(0.0, sd).unwrap();
            let ms: [&dyn MomentSequence; 1] = [&g];
            let word = ColoredWord::new(vec![1; 2 * j], 1).unwrap();
            let a = joint_moment(&word, &ms).unwrap();
            let b = limit_moment(2 * j, &g, 0.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }
}
