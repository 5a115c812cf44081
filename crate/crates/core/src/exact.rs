//! Dense tables over `{-1,+1}^n`: Gibbs enumeration, conditioning,
//! marginals, generalized magnetization, flips and entropy functionals.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{GlabError, Result};
use crate::model::{FlipDirection, IsingModel, Pinning};
use crate::numeric::{check_capacity, pairwise_sum, submasks, xlogx};
use crate::report::fmt_f64;

/// Explicit probability table indexed by configuration bit mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDistribution {
    n: usize,
    prob: Vec<f64>,
    log_partition: Option<f64>,
}

impl DenseDistribution {
    /// Normalizes nonnegative weights of length `2^n`.
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        check_capacity(n)?;
        if weights.len() != 1usize << n {
            return Err(GlabError::LengthMismatch { expected: 1 << n, got: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(GlabError::Domain(format!("weight {w} is not a finite nonnegative number")));
        }
        let z = pairwise_sum(&weights);
        if z <= 0.0 {
            return Err(GlabError::EmptySupport);
        }
        let prob = weights.into_iter().map(|w| w / z).collect();
        Ok(Self { n, prob, log_partition: None })
    }

    /// Point mass on one configuration.
    pub fn point_mass(n: usize, config: usize) -> Result<Self> {
        check_capacity(n)?;
        let mut prob = vec![0.0; 1 << n];
        prob[config] = 1.0;
        Ok(Self { n, prob, log_partition: None })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(n, vec![1.0; 1 << n])
    }

    /// Product measure with `Pr[sigma_v = +1] = p[v]`.
    pub fn product(p: &[f64]) -> Result<Self> {
        let n = p.len();
        check_capacity(n)?;
        let weights = (0..1usize << n)
            .map(|c| p.iter().enumerate().map(|(v, &q)| if (c >> v) & 1 == 1 { q } else { 1.0 - q }).product())
            .collect();
        Self::from_weights(n, weights)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.prob
    }

    pub fn prob(&self, config: usize) -> f64 {
        self.prob[config]
    }

    /// `log Z` when the table came from [`enumerate_gibbs`].
    pub fn log_partition(&self) -> Option<f64> {
        self.log_partition
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.prob.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(c, _)| c)
    }

    pub fn support_size(&self) -> usize {
        self.prob.iter().filter(|p| **p > 0.0).count()
    }

    pub fn in_support(&self, config: usize) -> bool {
        self.prob[config] > 0.0
    }

    /// Smallest positive probability.
    pub fn mu_min(&self) -> f64 {
        self.prob.iter().copied().filter(|p| *p > 0.0).fold(f64::INFINITY, f64::min)
    }

    /// Probability of the event that the configuration agrees with `pin`.
    pub fn pinning_mass(&self, pin: &Pinning) -> f64 {
        let free = self.full_mask() & !pin.domain();
        pairwise_sum(&submasks(free).map(|s| self.prob[s | pin.values()]).collect::<Vec<_>>())
    }

    /// `Pr[sigma_v = +1]`.
    pub fn plus_marginal(&self, v: usize) -> f64 {
        let terms: Vec<f64> = (0..self.prob.len()).filter(|c| (c >> v) & 1 == 1).map(|c| self.prob[c]).collect();
        pairwise_sum(&terms)
    }

    /// `Pr[sigma_v = +1 | pin]`, or `None` if the pinning is infeasible.
    pub fn conditional_plus(&self, v: usize, pin: &Pinning) -> Option<f64> {
        let free = self.full_mask() & !pin.domain();
        let (mut plus, mut total) = (0.0, 0.0);
        for s in submasks(free) {
            let p = self.prob[s | pin.values()];
            total += p;
            if (s | pin.values()) >> v & 1 == 1 {
                plus += p;
            }
        }
        (total > 0.0).then(|| plus / total)
    }

    pub fn full_mask(&self) -> usize {
        (1usize << self.n) - 1
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.prob)
    }

    /// CSV dump `config_index,probability`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "config_index,probability")?;
        for (c, p) in self.prob.iter().enumerate() {
            writeln!(w, "{c},{}", fmt_f64(*p))?;
        }
        Ok(())
    }
}

/// Nonnegative test function over configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTable {
    n: usize,
    values: Vec<f64>,
}

impl FunctionTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1usize << n {
            return Err(GlabError::LengthMismatch { expected: 1 << n, got: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(GlabError::Domain(format!("function value {v} is not finite and nonnegative")));
        }
        Ok(Self { n, values })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(n, vec![c; 1 << n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, config: usize) -> f64 {
        self.values[config]
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.n, self.values.iter().map(|v| v * c).collect())
    }

    /// `f(sigma ⊙ chi)`, the relabeling matched to [`flip`].
    pub fn flipped(&self, chi: &FlipDirection) -> Self {
        let mask = chi.negative_mask();
        Self { n: self.n, values: (0..self.values.len()).map(|c| self.values[c ^ mask]).collect() }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "config_index,value")?;
        for (c, v) in self.values.iter().enumerate() {
            writeln!(w, "{c},{}", fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Nonnegative local fields on a subset of the vertices; `1` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldAssignment {
    domain: usize,
    values: Vec<f64>,
}

impl FieldAssignment {
    /// Fields on every vertex.
    pub fn full(values: Vec<f64>) -> Result<Self> {
        let domain = (1usize << values.len()) - 1;
        Self::on_domain(domain, values)
    }

    /// `values[v]` is used for `v` in `domain`; other entries are replaced by 1.
    pub fn on_domain(domain: usize, mut values: Vec<f64>) -> Result<Self> {
        if domain >> values.len() != 0 {
            return Err(GlabError::Domain("field domain exceeds the vertex count".into()));
        }
        for (v, x) in values.iter_mut().enumerate() {
            if domain >> v & 1 == 1 {
                if !(x.is_finite() && *x >= 0.0) {
                    return Err(GlabError::Domain(format!("field at {v} is {x}")));
                }
            } else {
                *x = 1.0;
            }
        }
        Ok(Self { domain, values })
    }

    /// The same value `theta` on all `n` vertices.
    pub fn uniform(n: usize, theta: f64) -> Result<Self> {
        Self::full(vec![theta; n])
    }

    pub fn domain(&self) -> usize {
        self.domain
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

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }

    /// Coordinatewise product; the domain is the union.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(GlabError::LengthMismatch { expected: self.len(), got: other.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::on_domain(self.domain | other.domain, values)
    }

    /// `phi^chi`: `phi_v` where `chi_v = +1`, `1/phi_v` where `chi_v = -1`.
    pub fn pow_chi(&self, chi: &FlipDirection) -> Result<Self> {
        let values = self.values.iter().zip(chi.chi()).map(|(&x, &c)| if c == 1 { x } else { 1.0 / x }).collect();
        Self::on_domain(self.domain, values)
    }
}

/// Exact Gibbs table of an Ising model.
pub fn enumerate_gibbs(model: &IsingModel) -> Result<DenseDistribution> {
    let n = model.n();
    check_capacity(n)?;
    let logw: Vec<f64> = (0..1usize << n).map(|c| model.log_gibbs_weight(c)).collect();
    let shift = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - shift).exp()).collect();
    let z = pairwise_sum(&w);
    let prob = w.into_iter().map(|x| x / z).collect();
    Ok(DenseDistribution { n, prob, log_partition: Some(shift + z.ln()) })
}

/// `mu^{Lambda <- sigma}`, still indexed over all `n` vertices.
pub fn condition(dist: &DenseDistribution, pin: &Pinning) -> Result<DenseDistribution> {
    if pin.max_vertex().is_some_and(|v| v >= dist.n) {
        return Err(GlabError::Domain("pinning mentions a vertex outside the distribution".into()));
    }
    if pin.domain() == 0 {
        return Ok(dist.clone());
    }
    let mass = dist.pinning_mass(pin);
    if mass <= 0.0 {
        return Err(GlabError::InfeasiblePinning);
    }
    let prob = dist.prob.iter().enumerate().map(|(c, p)| if pin.agrees(c) { p / mass } else { 0.0 }).collect();
    Ok(DenseDistribution { n: dist.n, prob, log_partition: None })
}

/// Marginal on `subset`, re-indexed so that the `i`-th smallest vertex of
/// `subset` becomes bit `i`.
pub fn marginal(dist: &DenseDistribution, subset: usize) -> Result<DenseDistribution> {
    if subset & !dist.full_mask() != 0 {
        return Err(GlabError::Domain("marginal subset exceeds the vertex set".into()));
    }
    if subset == dist.full_mask() {
        return Ok(DenseDistribution { log_partition: None, ..dist.clone() });
    }
    if subset == 0 {
        return DenseDistribution::point_mass(0, 0);
    }
    let verts: Vec<usize> = (0..dist.n).filter(|v| subset >> v & 1 == 1).collect();
    let m = verts.len();
    let mut prob = vec![0.0; 1 << m];
    for (c, p) in dist.prob.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        prob[compress(c, &verts)] += p;
    }
    Ok(DenseDistribution { n: m, prob, log_partition: None })
}

/// Bits of `config` at `verts`, packed to the low bits in order.
#[inline]
pub fn compress(config: usize, verts: &[usize]) -> usize {
    verts.iter().enumerate().fold(0, |acc, (i, &v)| acc | ((config >> v & 1) << i))
}

/// Inverse of [`compress`]: spreads low bits of `packed` onto `verts`.
#[inline]
pub fn expand(packed: usize, verts: &[usize]) -> usize {
    verts.iter().enumerate().fold(0, |acc, (i, &v)| acc | ((packed >> i & 1) << v))
}

/// `prob'(sigma) ∝ prob(sigma) prod_{v in Lambda, sigma_v = +1} phi_v`.
pub fn magnetize(dist: &DenseDistribution, fields: &FieldAssignment) -> Result<DenseDistribution> {
    if fields.len() != dist.n {
        return Err(GlabError::LengthMismatch { expected: dist.n, got: fields.len() });
    }
    if fields.values().iter().all(|x| *x == 1.0) {
        return Ok(DenseDistribution { log_partition: None, ..dist.clone() });
    }
    let w = magnetized_weights(dist, fields);
    let z = pairwise_sum(&w);
    if z <= 0.0 {
        return Err(GlabError::EmptySupport);
    }
    let prob = w.into_iter().map(|x| x / z).collect();
    Ok(DenseDistribution { n: dist.n, prob, log_partition: None })
}

fn magnetized_weights(dist: &DenseDistribution, fields: &FieldAssignment) -> Vec<f64> {
    let phi = fields.values();
    dist.prob
        .iter()
        .enumerate()
        .map(|(c, &p)| {
            if p == 0.0 {
                return 0.0;
            }
            let mut w = p;
            let mut bits = c & fields.domain();
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                w *= phi[v];
                bits &= bits - 1;
            }
            w
        })
        .collect()
}

/// `mu^{(phi), 1_R}`: pin `R` to `+1` and magnetize the rest.
pub fn magnetize_pinned(
    dist: &DenseDistribution,
    fields: &FieldAssignment,
    plus_pinned: usize,
) -> Result<DenseDistribution> {
    let pinned = condition(dist, &Pinning::all_plus(plus_pinned))?;
    magnetize(&pinned, fields)
}

/// `nu(sigma) = mu(sigma ⊙ chi)`.
pub fn flip(dist: &DenseDistribution, chi: &FlipDirection) -> Result<DenseDistribution> {
    if chi.len() != dist.n {
        return Err(GlabError::LengthMismatch { expected: dist.n, got: chi.len() });
    }
    let mask = chi.negative_mask();
    let prob = (0..dist.prob.len()).map(|c| dist.prob[c ^ mask]).collect();
    Ok(DenseDistribution { n: dist.n, prob, log_partition: dist.log_partition })
}

/// `Ent_p[f]` for parallel slices, with `0 log 0 = 0`.
pub fn entropy_slices(p: &[f64], f: &[f64]) -> f64 {
    let mean = pairwise_sum(&p.iter().zip(f).map(|(p, f)| p * f).collect::<Vec<_>>());
    if mean <= 0.0 {
        return 0.0;
    }
    let terms: Vec<f64> = p.iter().zip(f).filter(|(p, _)| **p > 0.0).map(|(p, f)| p * mean * xlogx(f / mean)).collect();
    pairwise_sum(&terms).max(0.0)
}

/// `Ent_mu[f] = E[f log f] - E[f] log E[f]`.
pub fn entropy_functional(dist: &DenseDistribution, f: &FunctionTable) -> Result<f64> {
    if f.n != dist.n {
        return Err(GlabError::LengthMismatch { expected: dist.n, got: f.n });
    }
    Ok(entropy_slices(&dist.prob, &f.values))
}

/// `KL(nu || mu)` for parallel slices.
pub fn kl_slices(nu: &[f64], mu: &[f64]) -> Result<f64> {
    let mut terms = Vec::with_capacity(nu.len());
    for (&a, &b) in nu.iter().zip(mu) {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(GlabError::NotAbsolutelyContinuous);
            }
            terms.push(a * (a / b).ln());
        }
    }
    Ok(pairwise_sum(&terms).max(0.0))
}

pub fn kl_divergence(nu: &DenseDistribution, mu: &DenseDistribution) -> Result<f64> {
    if nu.n != mu.n {
        return Err(GlabError::LengthMismatch { expected: mu.n, got: nu.n });
    }
    kl_slices(&nu.prob, &mu.prob)
}

/// Covariance of `f` and `log f` for parallel slices, as the symmetric
/// pair sum. Fails if `f` vanishes somewhere on the support.
pub fn covariance_slices(p: &[f64], f: &[f64]) -> Result<f64> {
    let idx: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    if let Some(&i) = idx.iter().find(|&&i| f[i] <= 0.0) {
        return Err(GlabError::ZeroOnSupport(i));
    }
    let mut terms = Vec::with_capacity(idx.len() * idx.len() / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            terms.push(p[i] * p[j] * (f[i] - f[j]) * (f[i].ln() - f[j].ln()));
        }
    }
    Ok(pairwise_sum(&terms))
}

/// `Cov_mu(f, log f)`.
pub fn covariance_f_logf(dist: &DenseDistribution, f: &FunctionTable) -> Result<f64> {
    if f.n != dist.n {
        return Err(GlabError::LengthMismatch { expected: dist.n, got: f.n });
    }
    covariance_slices(&dist.prob, &f.values)
}

/// `Z_pi = sum_sigma mu(sigma) theta^{||sigma||_+}`.
pub fn magnetized_partition(dist: &DenseDistribution, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(GlabError::Domain(format!("theta must lie in (0,1), got {theta}")));
    }
    let terms: Vec<f64> = dist.prob.iter().enumerate().map(|(c, p)| p * theta.powi(c.count_ones() as i32)).collect();
    Ok(pairwise_sum(&terms))
}

/// `mu[Ent_S f] = sum_{sigma on V\S} mu_{V\S}(sigma) Ent_{mu^sigma}[f]` for
/// the free block `S = free`.
pub fn expected_block_entropy(dist: &DenseDistribution, f: &FunctionTable, free: usize) -> Result<f64> {
    if f.n != dist.n {
        return Err(GlabError::LengthMismatch { expected: dist.n, got: f.n });
    }
    let outer = dist.full_mask() & !free;
    let mut per_block = Vec::new();
    let (mut p, mut g) = (Vec::new(), Vec::new());
    for o in submasks(outer) {
        p.clear();
        g.clear();
        for s in submasks(free) {
            p.push(dist.prob[o | s]);
            g.push(f.values[o | s]);
        }
        let mass = pairwise_sum(&p);
        if mass > 0.0 {
            p.iter_mut().for_each(|x| *x /= mass);
            per_block.push(mass * entropy_slices(&p, &g));
        }
    }
    Ok(pairwise_sum(&per_block))
}

/// Expected covariance of `f` and `log f` under the single-site conditionals
/// at `v`: `mu[MEnt_v f]`.
pub fn expected_site_covariance(dist: &DenseDistribution, f: &FunctionTable, v: usize) -> Result<f64> {
    let bit = 1usize << v;
    let mut terms = Vec::new();
    for o in 0..dist.prob.len() {
        if o & bit != 0 {
            continue;
        }
        let (pm, pp) = (dist.prob[o], dist.prob[o | bit]);
        let mass = pm + pp;
        if mass > 0.0 {
            let c = covariance_slices(&[pm / mass, pp / mass], &[f.values[o], f.values[o | bit]])?;
            terms.push(mass * c);
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Random positive test function: `exp(s Z)` per configuration with
/// `Z` standard normal and the scale `s` drawn from `{0.1, 1, 3}`.
pub fn random_positive_function<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FunctionTable {
    let s = [0.1, 1.0, 3.0][rng.random_range(0..3)];
    let values = (0..1usize << n).map(|_| (s * rng.sample::<f64, _>(StandardNormal)).exp()).collect();
    FunctionTable { n, values }
}

/// Random fields, log-uniform on `[1e-2, 1e2]`.
pub fn random_fields<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FieldAssignment {
    let values = (0..n).map(|_| 10f64.powf(rng.random_range(-2.0..=2.0))).collect();
    FieldAssignment::full(values).expect("log-uniform fields are positive")
}

/// Random distribution with full support and log-weights `2 Z`.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DenseDistribution> {
    let weights = (0..1usize << n).map(|_| (2.0 * rng.sample::<f64, _>(StandardNormal)).exp()).collect();
    DenseDistribution::from_weights(n, weights)
}
