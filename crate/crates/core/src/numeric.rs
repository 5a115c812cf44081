//! Small numeric kernels shared by every module: tree summation, binomials,
//! fixed-size subset enumeration, the exact-engine capacity limit and dense
//! eigenvalue helpers.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{Complex, DMatrix, Schur, SymmetricEigen};

use crate::error::{GlabError, Result};

/// Default maximum ground-set size for dense tables (2^22 entries).
pub const DEFAULT_EXACT_LIMIT: usize = 22;

/// Environment variable that overrides [`DEFAULT_EXACT_LIMIT`].
pub const CAPACITY_ENV: &str = "GLAB_CAPACITY";

static LIMIT_OVERRIDE: AtomicUsize = AtomicUsize::new(0);

/// Current exact-engine limit: programmatic override, then `GLAB_CAPACITY`,
/// then the default.
pub fn exact_limit() -> usize {
    let forced = LIMIT_OVERRIDE.load(Ordering::Relaxed);
    if forced > 0 {
        return forced;
    }
    std::env::var(CAPACITY_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&v| v > 0 && v < 40)
        .unwrap_or(DEFAULT_EXACT_LIMIT)
}

/// Sets (or with `None`, clears) a process-wide override of the limit.
pub fn set_exact_limit(limit: Option<usize>) {
    LIMIT_OVERRIDE.store(limit.unwrap_or(0), Ordering::Relaxed);
}

pub(crate) fn check_capacity(n: usize) -> Result<()> {
    let limit = exact_limit();
    if n > limit {
        Err(GlabError::Capacity { n, limit })
    } else {
        Ok(())
    }
}

/// Pairwise (tree) summation. Rounding error grows as O(log N).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `x log x` with the convention `0 log 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Natural log of the binomial coefficient; `-inf` outside `0 <= k <= n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Binomial coefficient as an exact integer when it fits, else saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Iterator over all `n`-bit masks with exactly `k` bits set, in increasing
/// numeric order (Gosper's hack).
pub fn subsets_of_size(n: usize, k: usize) -> SubsetIter {
    let next = if k > n {
        None
    } else if k == 0 {
        Some(0)
    } else {
        Some((1usize << k) - 1)
    };
    SubsetIter { n, next }
}

#[derive(Debug, Clone)]
pub struct SubsetIter {
    n: usize,
    next: Option<usize>,
}

impl Iterator for SubsetIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nxt = (((r ^ cur) >> 2) / c) | r;
            if nxt >> self.n != 0 {
                None
            } else {
                Some(nxt)
            }
        };
        Some(cur)
    }
}

/// Iterator over all submasks of `mask`, including `0` and `mask` itself.
pub fn submasks(mask: usize) -> impl Iterator<Item = usize> {
    let mut cur = Some(mask);
    std::iter::from_fn(move || {
        let s = cur?;
        cur = if s == 0 { None } else { Some((s - 1) & mask) };
        Some(s)
    })
}

/// FNV-1a over the bit patterns of a float table; used as an instance tag.
pub fn fingerprint(values: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// All eigenvalues of a square matrix, sorted by real part descending
/// (ties by imaginary part descending).
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let n = m.nrows();
    if (m - m.transpose()).amax() <= 1e-14 * m.amax() {
        let sym = (m + m.transpose()) * 0.5;
        return sort_desc(SymmetricEigen::new(sym).eigenvalues.iter().map(|&x| Complex::new(x, 0.0)).collect());
    }
    // The Francis iteration can stall on structured inputs; a fixed
    // orthogonal similarity breaks the structure.
    let mut schur = Schur::try_new(m.clone(), f64::EPSILON, 20_000);
    let mut state = 0x2545_F491_4F6C_DD1Du64;
    for _ in 0..16 {
        if schur.is_some() {
            break;
        }
        let r = DMatrix::from_fn(n, n, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        let q = r.qr().q();
        schur = Schur::try_new(q.transpose() * m * &q, f64::EPSILON, 20_000);
    }
    let schur = schur.expect("Schur decomposition did not converge");
    sort_desc(schur.complex_eigenvalues().iter().copied().collect())
}

fn sort_desc(mut eigs: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
    eigs.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    eigs
}

/// Whether an eigenvalue counts as real for `max_real_eig` purposes.
#[inline]
pub fn is_effectively_real(z: &Complex<f64>) -> bool {
    z.im.abs() <= 1e-8 * (1.0 + z.re.abs())
}

/// Largest deviation of a greedy nearest-neighbour matching between two
/// eigenvalue multisets; `None` when the sizes differ.
pub fn multiset_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best?;
        used[j] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gosper_enumerates_binomial_many() {
        for n in 0..8 {
            for k in 0..=n {
                let all: Vec<usize> = subsets_of_size(n, k).collect();
                assert_eq!(all.len() as u128, binomial(n as u64, k as u64));
                assert!(all.iter().all(|m| m.count_ones() as usize == k && m >> n == 0));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert_eq!(subsets_of_size(3, 4).count(), 0);
    }

    #[test]
    fn submasks_cover_powerset() {
        let v: Vec<usize> = submasks(0b1011).collect();
        assert_eq!(v.len(), 8);
        assert_eq!(submasks(0).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn ln_binomial_matches_exact() {
        for n in 0..30u64 {
            for k in 0..=n {
                let exact = binomial(n, k) as f64;
                assert!((ln_binomial(n, k) - exact.ln()).abs() < 1e-12 * (1.0 + exact.ln().abs()));
            }
        }
        assert_eq!(ln_binomial(3, 5), f64::NEG_INFINITY);
    }

    #[test]
    fn pairwise_sum_agrees_with_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
        assert!((compensated_sum(xs.iter().copied()) - naive).abs() < 1e-12);
    }

    #[test]
    fn multiset_distance_ignores_order() {
        let a = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let b = [Complex::new(0.0, 0.0), Complex::new(1.0 + 1e-9, 0.0)];
        assert!(multiset_distance(&a, &b).unwrap() < 2e-9);
        assert!(multiset_distance(&a, &b[..1]).is_none());
    }
}
