//! The k-transformation, the `sigma*` projection, function lifts,
//! homogenization, and entrywise influence bounds for transformed laws.
//!
//! Site `(v, i)` of `V x [k]` has index `v * k + i`. In the homogenization
//! the complement marker of `i` has index `n + i`.

use crate::error::{GlabError, Result};
use crate::exact::{condition, magnetize, DenseDistribution, FieldAssignment, FunctionTable};
use crate::model::{Pinning, SpinConfig};
use crate::numeric::{check_capacity, compensated_sum};
use crate::report::{instance_tag, CheckReport};
use crate::spectral::signed_influence;

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedDistribution {
    base_n: usize,
    k: usize,
    dist: DenseDistribution,
}

impl TransformedDistribution {
    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dist(&self) -> &DenseDistribution {
        &self.dist
    }

    /// Index of site `(v, i)`.
    pub fn site(&self, v: usize, i: usize) -> usize {
        v * self.k + i
    }

    /// `(v, i)` for a site index.
    pub fn bucket_of(&self, site: usize) -> (usize, usize) {
        (site / self.k, site % self.k)
    }

    /// Mask of the bucket `C_v`.
    pub fn bucket_mask(&self, v: usize) -> usize {
        bucket_mask(v, self.k)
    }

    /// The law of `sigma*` under this distribution.
    pub fn pushforward(&self) -> Result<DenseDistribution> {
        let mut w = vec![0.0; 1 << self.base_n];
        for c in self.dist.support() {
            w[star_index(c, self.base_n, self.k)] += self.dist.prob(c);
        }
        DenseDistribution::from_weights(self.base_n, w)
    }
}

fn bucket_mask(v: usize, k: usize) -> usize {
    ((1usize << k) - 1) << (v * k)
}

/// Exact table of `mu_k`.
pub fn k_transform(dist: &DenseDistribution, k: usize) -> Result<TransformedDistribution> {
    if k == 0 {
        return Err(GlabError::Domain("k must be at least 1".into()));
    }
    let n = dist.n();
    check_capacity(n * k)?;
    if k == 1 {
        return Ok(TransformedDistribution { base_n: n, k, dist: dist.clone() });
    }
    let mut w = vec![0.0; 1 << (n * k)];
    for sigma in dist.support() {
        let p = dist.prob(sigma);
        let plus: Vec<usize> = (0..n).filter(|v| sigma >> v & 1 == 1).collect();
        let share = p / (k as f64).powi(plus.len() as i32);
        // odometer over the chosen copy of every plus vertex
        let mut choice = vec![0usize; plus.len()];
        loop {
            let c = plus.iter().zip(&choice).fold(0, |acc, (&v, &i)| acc | 1 << (v * k + i));
            w[c] = share;
            let mut pos = 0;
            while pos < choice.len() {
                choice[pos] += 1;
                if choice[pos] < k {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
            if pos == choice.len() {
                break;
            }
        }
    }
    Ok(TransformedDistribution { base_n: n, k, dist: DenseDistribution::from_weights(n * k, w)? })
}

/// `sigma*` on bit masks: vertex `v` is `+1` iff some site of `C_v` is.
pub fn star_index(config: usize, base_n: usize, k: usize) -> usize {
    (0..base_n).filter(|&v| config & bucket_mask(v, k) != 0).fold(0, |acc, v| acc | 1 << v)
}

/// `sigma*` on spin vectors of length `base_n * k`.
pub fn star_projection(sigma: &SpinConfig, k: usize) -> Result<SpinConfig> {
    if k == 0 || !sigma.len().is_multiple_of(k) {
        return Err(GlabError::Domain(format!("length {} is not a multiple of k = {k}", sigma.len())));
    }
    let spins = sigma.spins().chunks(k).map(|b| if b.contains(&1) { 1 } else { -1 }).collect();
    SpinConfig::new(spins)
}

/// `f^k = f ∘ sigma*`.
pub fn lift_function(f: &FunctionTable, k: usize) -> Result<FunctionTable> {
    let n = f.n();
    check_capacity(n * k)?;
    let values = (0..1usize << (n * k)).map(|c| f.value(star_index(c, n, k))).collect();
    FunctionTable::new(n * k, values)
}

/// `(1/k) sum_h phi_{w_h}` per base vertex, compensated.
pub fn field_average(phi: &FieldAssignment, base_n: usize, k: usize) -> Result<FieldAssignment> {
    if phi.len() != base_n * k {
        return Err(GlabError::LengthMismatch { expected: base_n * k, got: phi.len() });
    }
    let vals = (0..base_n).map(|w| compensated_sum((0..k).map(|h| phi.values()[w * k + h])) / k as f64).collect();
    FieldAssignment::full(vals)
}

/// Pushforward of `mu_k^rho` and the magnetized law `mu^{(phi_rho), 1_F}`
/// predicted for it, for a pinning `rho` of sites.
pub fn pinned_pushforward_pair(
    t: &TransformedDistribution,
    rho: &Pinning,
) -> Result<(DenseDistribution, DenseDistribution)> {
    let (n, k) = (t.base_n, t.k);
    let cond = condition(&t.dist, rho)?;
    let lhs = TransformedDistribution { base_n: n, k, dist: cond }.pushforward()?;
    let forced = star_index(rho.values(), n, k);
    let mut phi = vec![1.0; n];
    for (v, x) in phi.iter_mut().enumerate() {
        if forced >> v & 1 == 0 {
            let free = (bucket_mask(v, k) & !rho.domain()).count_ones();
            *x = free as f64 / k as f64;
        }
    }
    let base = t.pushforward()?;
    let domain = ((1usize << n) - 1) & !forced;
    let rhs = magnetize(&condition(&base, &Pinning::all_plus(forced))?, &FieldAssignment::on_domain(domain, phi)?)?;
    Ok((lhs, rhs))
}

/// Law on size-`n` subsets of `[n] ∪ [n̄]` with `pi(S ∪ S^c) = mu(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogenizedDistribution {
    base_n: usize,
    dist: DenseDistribution,
}

impl HomogenizedDistribution {
    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn dist(&self) -> &DenseDistribution {
        &self.dist
    }

    /// Set `S ∪ S^c` for a base configuration `S`.
    pub fn lift_index(&self, s: usize) -> usize {
        hom_index(s, self.base_n)
    }
}

fn hom_index(s: usize, n: usize) -> usize {
    let full = (1usize << n) - 1;
    s | ((full & !s) << n)
}

pub fn homogenize(dist: &DenseDistribution) -> Result<HomogenizedDistribution> {
    let n = dist.n();
    check_capacity(2 * n)?;
    let mut w = vec![0.0; 1 << (2 * n)];
    for (s, &p) in dist.probs().iter().enumerate() {
        w[hom_index(s, n)] = p;
    }
    Ok(HomogenizedDistribution { base_n: n, dist: DenseDistribution::from_weights(2 * n, w)? })
}

/// Function on the homogenized ground set: `f(S ∪ S^c) = f(S)`, zero off
/// the image.
pub fn homogenize_function(f: &FunctionTable) -> Result<FunctionTable> {
    let n = f.n();
    let mut vals = vec![0.0; 1 << (2 * n)];
    for s in 0..1usize << n {
        vals[hom_index(s, n)] = f.value(s);
    }
    FunctionTable::new(2 * n, vals)
}

/// Per-entry outcome of the transformed influence bounds.
#[derive(Debug, Clone)]
pub struct KtransInfluenceOutcome {
    /// Cross-bucket bound: one report for the entry with the least margin.
    pub cross: CheckReport,
    /// Same-bucket bound.
    pub same: CheckReport,
    pub entries_checked: usize,
}

impl KtransInfluenceOutcome {
    pub fn pass(&self) -> bool {
        self.cross.pass && self.same.pass
    }

    pub fn reports(&self) -> Vec<CheckReport> {
        vec![self.cross.clone(), self.same.clone()]
    }
}

const ENTRY_SLACK: f64 = 1e-9;

fn transformed_pair(
    dist: &DenseDistribution,
    k: usize,
    phi: &FieldAssignment,
) -> Result<(nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>)> {
    if !phi.is_strictly_positive() {
        return Err(GlabError::Domain("fields must be strictly positive".into()));
    }
    let t = k_transform(dist, k)?;
    let pik = magnetize(t.dist(), phi)?;
    let pi = magnetize(dist, &field_average(phi, dist.n(), k)?)?;
    Ok((signed_influence(&pik), signed_influence(&pi)))
}

struct Worst {
    margin: f64,
    lhs: f64,
    rhs: f64,
    what: String,
}

impl Worst {
    fn new() -> Self {
        Self { margin: f64::INFINITY, lhs: 0.0, rhs: 0.0, what: String::new() }
    }

    fn offer(&mut self, lhs: f64, rhs: f64, what: impl FnOnce() -> String) {
        let m = rhs - lhs;
        if m < self.margin {
            *self = Self { margin: m, lhs, rhs, what: what() };
        }
    }

    fn report(self, name: &str, instance: &str) -> CheckReport {
        CheckReport::inequality_with_slack(name, instance, self.lhs, self.rhs, 0.0, ENTRY_SLACK)
            .with_witness(self.what, false)
    }
}

/// Entrywise bounds for `pi_k = mu_k^{(phi)}` against `pi = mu^{(phī)}`:
/// cross-bucket `|Psi_{pi_k}(u_i,v_j)| <= phi_{v_j}/sum_h phi_{v_h} |Psi_pi(u,v)|`
/// and same-bucket `|Psi_{pi_k}(u_i,u_j)| <= phi_{u_j}/sum_{h != i} phi_{u_h}`.
pub fn ktrans_influence_check(
    dist: &DenseDistribution,
    k: usize,
    phi: &FieldAssignment,
) -> Result<KtransInfluenceOutcome> {
    let (big, small) = transformed_pair(dist, k, phi)?;
    let n = dist.n();
    let f = phi.values();
    let instance = instance_tag(&format!("ktrans_n{n}_k{k}"), &[dist.probs(), f].concat());
    let mut cross = Worst::new();
    let mut same = Worst::new();
    let mut count = 0;
    for u in 0..n {
        for i in 0..k {
            let a = u * k + i;
            for v in 0..n {
                let bucket_sum = compensated_sum((0..k).map(|h| f[v * k + h]));
                for j in 0..k {
                    let b = v * k + j;
                    if u != v {
                        let rhs = f[b] / bucket_sum * small[(u, v)].abs();
                        cross.offer(big[(a, b)].abs(), rhs, || format!("entry ({u}_{i}, {v}_{j})"));
                        count += 1;
                    } else if i != j {
                        let rest = compensated_sum((0..k).filter(|&h| h != i).map(|h| f[u * k + h]));
                        same.offer(big[(a, b)].abs(), f[b] / rest, || format!("entry ({u}_{i}, {u}_{j})"));
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(KtransInfluenceOutcome {
        cross: cross.report("ktrans_cross_bucket", &instance),
        same: same.report("ktrans_same_bucket", &instance),
        entries_checked: count,
    })
}

/// Row sums of `|Psi_{pi_k}|` against the base row sums plus one.
pub fn ktrans_rowsum_check(dist: &DenseDistribution, k: usize, phi: &FieldAssignment) -> Result<CheckReport> {
    let (big, small) = transformed_pair(dist, k, phi)?;
    let n = dist.n();
    let instance = instance_tag(&format!("ktrans_n{n}_k{k}"), &[dist.probs(), phi.values()].concat());
    let mut worst = Worst::new();
    for u in 0..n {
        let base: f64 = (0..n).map(|v| small[(u, v)].abs()).sum();
        for i in 0..k {
            let row: f64 = big.row(u * k + i).iter().map(|x| x.abs()).sum();
            worst.offer(row, base + 1.0, || format!("row {u}_{i}"));
        }
    }
    Ok(worst.report("ktrans_rowsum", &instance))
}
