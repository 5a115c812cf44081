//! Uniform and magnetized block factorization of entropy, the `H_f` bridge
//! between them, the contraction constant `kappa`, and the multivariate
//! hypergeometric law.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Hypergeometric};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{GlabError, Result};
use crate::exact::{
    condition, entropy_functional, expected_block_entropy, magnetize, magnetize_pinned, magnetized_partition,
    DenseDistribution, FieldAssignment, FunctionTable,
};
use crate::model::Pinning;
use crate::numeric::{binomial, ln_binomial, pairwise_sum, submasks, subsets_of_size};
use crate::report::{instance_tag, CheckReport, Sig17};
use crate::transform::{k_transform, lift_function};

/// Largest subset family enumerated directly.
pub const MAX_SUBSETS: u128 = 1_000_000;

/// `kappa(j,k,c) = (k+1-j-c)^{c-ceil c} prod_{i<ceil c}(k-j-i) / (k+1)^c`.
pub fn kappa(j: usize, k: usize, c: f64) -> Result<f64> {
    if !(c >= 1.0 && c.is_finite()) {
        return Err(GlabError::Domain(format!("kappa needs c >= 1, got {c}")));
    }
    let cc = c.ceil() as usize;
    if j + cc > k {
        return Err(GlabError::Domain(format!("kappa needs j <= k - ceil(c), got j={j}, k={k}, c={c}")));
    }
    let (jf, kf) = (j as f64, k as f64);
    let mut log = (c - cc as f64) * (kf + 1.0 - jf - c).ln();
    for i in 0..cc {
        log += (kf - jf - i as f64).ln();
    }
    log -= c * (kf + 1.0).ln();
    Ok(log.exp())
}

/// The binomial-ratio expression `C(k-j, c) / C(k, c)` (generalized via the
/// gamma function), reported next to [`kappa`] but never used in checks.
pub fn kappa_binomial(j: usize, k: usize, c: f64) -> Result<f64> {
    if !(c >= 1.0 && c.is_finite()) || j + (c.ceil() as usize) > k {
        return Err(GlabError::Domain(format!("binomial kappa undefined at j={j}, k={k}, c={c}")));
    }
    let lnc = |a: f64| ln_gamma(a + 1.0) - ln_gamma(c + 1.0) - ln_gamma(a - c + 1.0);
    Ok((lnc((k - j) as f64) - lnc(k as f64)).exp())
}

/// Both candidate constants, side by side.
#[derive(Debug, Clone, Serialize)]
pub struct KappaPair {
    pub j: usize,
    pub k: usize,
    pub c: Sig17,
    pub kappa: Sig17,
    pub kappa_binomial: Sig17,
}

pub fn kappa_pair(j: usize, k: usize, c: f64) -> Result<KappaPair> {
    Ok(KappaPair { j, k, c: Sig17(c), kappa: Sig17(kappa(j, k, c)?), kappa_binomial: Sig17(kappa_binomial(j, k, c)?) })
}

/// UBF constant `1 / kappa(n - ell, n, eta + 1)`.
pub fn ubf_constant(n: usize, ell: usize, eta: f64) -> Result<f64> {
    if ell > n {
        return Err(GlabError::Domain(format!("ell = {ell} exceeds n = {n}")));
    }
    Ok(1.0 / kappa(n - ell, n, eta + 1.0)?)
}

/// `1/kappa(n-ell, n, eta+1) <= (e/theta)^{eta+2}` for `ell = ceil(theta n)`,
/// when `ceil(eta+1) + 1 < ell`; `None` outside that range.
pub fn ubf_constant_bound_check(n: usize, theta: f64, eta: f64) -> Result<Option<CheckReport>> {
    let ell = ceil_product(theta, n, 1);
    if (eta + 1.0).ceil() as usize + 1 >= ell || ell > n {
        return Ok(None);
    }
    let lhs = ubf_constant(n, ell, eta)?;
    let rhs = (std::f64::consts::E / theta).powf(eta + 2.0);
    Ok(Some(
        CheckReport::inequality("ubf_constant_bound", format!("n{n}_theta{theta}_eta{eta}"), lhs, rhs)
            .with_constant(eta),
    ))
}

/// `ceil(theta * n * k)`, robust to representation error in `theta`.
pub fn ceil_product(theta: f64, n: usize, k: usize) -> usize {
    let x = theta * (n * k) as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Multivariate hypergeometric law: `ell` balls drawn without replacement
/// from `n` buckets of `k` balls each; `a_v` counts draws from bucket `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HyperGeoSpec {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
}

impl HyperGeoSpec {
    pub fn new(n: usize, k: usize, ell: usize) -> Result<Self> {
        if n == 0 || k == 0 || ell > n * k {
            return Err(GlabError::Domain(format!("invalid hypergeometric spec n={n}, k={k}, ell={ell}")));
        }
        Ok(Self { n, k, ell })
    }

    pub fn in_support(&self, a: &[usize]) -> bool {
        a.len() == self.n && a.iter().all(|&x| x <= self.k) && a.iter().sum::<usize>() == self.ell
    }

    /// Exact pmf, evaluated in log domain; 0 off the support.
    pub fn pmf(&self, a: &[usize]) -> f64 {
        if !self.in_support(a) {
            return 0.0;
        }
        let k = self.k as u64;
        let num: f64 = a.iter().map(|&x| ln_binomial(k, x as u64)).sum();
        (num - ln_binomial(k * self.n as u64, self.ell as u64)).exp()
    }

    /// Every support point, in lexicographic order.
    pub fn support(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0; self.n];
        self.fill(0, self.ell, &mut cur, &mut out);
        out
    }

    fn fill(&self, pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == self.n {
            if left <= self.k {
                cur[pos] = left;
                out.push(cur.clone());
            }
            return;
        }
        let rest_cap = (self.n - pos - 1) * self.k;
        let lo = left.saturating_sub(rest_cap);
        for x in lo..=left.min(self.k) {
            cur[pos] = x;
            self.fill(pos + 1, left - x, cur, out);
        }
    }

    /// Number of support points.
    pub fn support_size(&self) -> usize {
        let mut ways = vec![0usize; self.ell + 1];
        ways[0] = 1;
        for _ in 0..self.n {
            let mut next = vec![0usize; self.ell + 1];
            for (s, &w) in ways.iter().enumerate() {
                for x in 0..=self.k.min(self.ell - s) {
                    next[s + x] = next[s + x].saturating_add(w);
                }
            }
            ways = next;
        }
        ways[self.ell]
    }

    /// Exact draw, bucket by bucket from the univariate conditionals.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut left_balls = (self.n * self.k) as u64;
        let mut left_draws = self.ell as u64;
        let mut a = Vec::with_capacity(self.n);
        for v in 0..self.n {
            if v + 1 == self.n {
                a.push(left_draws as usize);
                break;
            }
            let x = if left_draws == 0 {
                0
            } else if left_draws == left_balls {
                self.k as u64
            } else {
                Hypergeometric::new(left_balls, self.k as u64, left_draws)
                    .expect("valid hypergeometric parameters")
                    .sample(rng)
            };
            a.push(x as usize);
            left_balls -= self.k as u64;
            left_draws -= x;
        }
        a
    }

    /// Pmf of one coordinate: univariate hypergeometric.
    pub fn marginal_pmf(&self, x: usize) -> f64 {
        let (k, total, ell) = (self.k as u64, (self.n * self.k) as u64, self.ell as u64);
        if x as u64 > k || x as u64 > ell || ell - x as u64 > total - k {
            return 0.0;
        }
        (ln_binomial(k, x as u64) + ln_binomial(total - k, ell - x as u64) - ln_binomial(total, ell)).exp()
    }

    /// `Pr[|a_v/k - ell/(kn)| >= eps]`, boundary points included within 1e-12.
    pub fn tail(&self, eps: f64) -> f64 {
        let centre = self.ell as f64 / (self.n * self.k) as f64;
        let terms: Vec<f64> = (0..=self.k)
            .filter(|&x| (x as f64 / self.k as f64 - centre).abs() >= eps - 1e-12)
            .map(|x| self.marginal_pmf(x))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Exact tail against `2 exp(-2 eps^2 k)`.
pub fn hypergeo_concentration_check(spec: &HyperGeoSpec, eps: f64) -> Result<CheckReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(GlabError::Domain(format!("epsilon must lie in (0,1), got {eps}")));
    }
    let lhs = spec.tail(eps);
    let rhs = 2.0 * (-2.0 * eps * eps * spec.k as f64).exp();
    Ok(CheckReport::inequality(
        "hypergeo_concentration",
        format!("n{}_k{}_l{}_eps{}", spec.n, spec.k, spec.ell, eps),
        lhs,
        rhs,
    ))
}

fn check_f(dist: &DenseDistribution, f: &FunctionTable) -> Result<()> {
    if f.n() != dist.n() {
        return Err(GlabError::LengthMismatch { expected: dist.n(), got: f.n() });
    }
    Ok(())
}

/// `(1/C(n,ell)) sum_{|S|=ell} mu[Ent_S f]`.
pub fn ubf_average(dist: &DenseDistribution, ell: usize, f: &FunctionTable) -> Result<f64> {
    check_f(dist, f)?;
    let n = dist.n();
    if ell > n {
        return Err(GlabError::Domain(format!("ell = {ell} exceeds n = {n}")));
    }
    let count = binomial(n as u64, ell as u64);
    if count > MAX_SUBSETS {
        return Err(GlabError::Domain(format!("{count} blocks exceed the enumeration cap")));
    }
    let terms = subsets_of_size(n, ell).map(|s| expected_block_entropy(dist, f, s)).collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms) / count as f64)
}

/// `Ent_mu[f] <= C * ubf_average` for each `f`.
pub fn ubf_check(dist: &DenseDistribution, ell: usize, c: f64, fs: &[FunctionTable]) -> Result<Vec<CheckReport>> {
    if ell == 0 {
        return Err(GlabError::Domain("ell must be at least 1".into()));
    }
    fs.iter()
        .enumerate()
        .map(|(i, f)| {
            let lhs = entropy_functional(dist, f)?;
            let rhs = c * ubf_average(dist, ell, f)?;
            Ok(CheckReport::inequality("ubf", instance_tag(&format!("ubf_l{ell}_f{i}"), f.values()), lhs, rhs)
                .with_constant(c)
                .with_witness(format!("function {i}"), false))
        })
        .collect()
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(GlabError::Domain(format!("theta must lie in (0,1), got {theta}")));
    }
    Ok(())
}

/// `(Z_pi/theta^n) sum_R (1-theta)^{|R|} theta^{n-|R|} pi_R(1_R) Ent_{pi^{1_R}}[f]`
/// with `pi = mu^{(theta)}`.
pub fn mbf_rhs(dist: &DenseDistribution, theta: f64, f: &FunctionTable) -> Result<f64> {
    check_theta(theta)?;
    check_f(dist, f)?;
    let n = dist.n();
    let pi = magnetize(dist, &FieldAssignment::uniform(n, theta)?)?;
    let log_z = magnetized_partition(dist, theta)?.ln();
    // (Z/theta^n)(1-theta)^r theta^{n-r} = exp(log Z + r log((1-theta)/theta))
    let tilt = (1.0 - theta).ln() - theta.ln();
    let mut terms = Vec::with_capacity(1 << n);
    for r in 0..1usize << n {
        let pin = Pinning::all_plus(r);
        let mass = pi.pinning_mass(&pin);
        if mass <= 0.0 {
            continue;
        }
        let ent = entropy_functional(&condition(&pi, &pin)?, f)?;
        if ent == 0.0 {
            continue;
        }
        terms.push((log_z + r.count_ones() as f64 * tilt).exp() * mass * ent);
    }
    Ok(pairwise_sum(&terms))
}

/// `Ent_mu[f] <= C * mbf_rhs` for each `f`.
pub fn mbf_check(dist: &DenseDistribution, theta: f64, c: f64, fs: &[FunctionTable]) -> Result<Vec<CheckReport>> {
    fs.iter()
        .enumerate()
        .map(|(i, f)| {
            let lhs = entropy_functional(dist, f)?;
            let rhs = c * mbf_rhs(dist, theta, f)?;
            Ok(CheckReport::inequality("mbf", instance_tag(&format!("mbf_theta{theta}_f{i}"), f.values()), lhs, rhs)
                .with_constant(c)
                .with_witness(format!("function {i}"), false))
        })
        .collect()
}

/// `H_f(ell, k)` evaluated on the transformed law: the average over all
/// `ell`-subsets `S` of `V x [k]` of `mu_k[Ent_S f^k]`.
pub fn hf_direct(dist: &DenseDistribution, k: usize, ell: usize, f: &FunctionTable) -> Result<f64> {
    check_f(dist, f)?;
    let nk = dist.n() * k;
    if ell > nk {
        return Err(GlabError::Domain(format!("ell = {ell} exceeds nk = {nk}")));
    }
    let count = binomial(nk as u64, ell as u64);
    if count > MAX_SUBSETS {
        return Err(GlabError::Domain(format!("{count} blocks exceed the enumeration cap")));
    }
    let t = k_transform(dist, k)?;
    let fk = lift_function(f, k)?;
    let terms =
        subsets_of_size(nk, ell).map(|s| expected_block_entropy(t.dist(), &fk, s)).collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms) / count as f64)
}

/// `H_f(ell, k)` through the hypergeometric representation: a sum over
/// `b = a/k`, base configurations `tau` and subsets `R` of the plus set of
/// `tau`, of entropies of `mu^{(b_{V\R}), 1_R}`.
pub fn hf_formula(dist: &DenseDistribution, k: usize, ell: usize, f: &FunctionTable) -> Result<f64> {
    check_f(dist, f)?;
    let n = dist.n();
    let spec = HyperGeoSpec::new(n, k, ell)?;
    let full = dist.full_mask();
    let mut outer = Vec::new();
    for a in spec.support() {
        let weight = spec.pmf(&a);
        if weight == 0.0 {
            continue;
        }
        let b: Vec<f64> = a.iter().map(|&x| x as f64 / k as f64).collect();
        let mut ent_cache: HashMap<usize, f64> = HashMap::new();
        let mut inner = Vec::new();
        for tau in dist.support() {
            let mu_tau = dist.prob(tau);
            for r in submasks(tau) {
                let rest = tau & !r;
                if (0..n).any(|v| rest >> v & 1 == 1 && b[v] == 0.0) {
                    continue;
                }
                let mut w = mu_tau;
                for (v, bv) in b.iter().enumerate() {
                    if r >> v & 1 == 1 {
                        w *= 1.0 - bv;
                    } else if rest >> v & 1 == 1 {
                        w *= bv;
                    }
                }
                if w == 0.0 {
                    continue;
                }
                let ent = match ent_cache.get(&r) {
                    Some(e) => *e,
                    None => {
                        let fields = FieldAssignment::on_domain(full & !r, b.clone())?;
                        let e = match magnetize_pinned(dist, &fields, r) {
                            Ok(d) => entropy_functional(&d, f)?,
                            Err(GlabError::EmptySupport | GlabError::InfeasiblePinning) => 0.0,
                            Err(e) => return Err(e),
                        };
                        ent_cache.insert(r, e);
                        e
                    }
                };
                inner.push(w * ent);
            }
        }
        outer.push(weight * pairwise_sum(&inner));
    }
    Ok(pairwise_sum(&outer))
}

/// One point of the convergence series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LbfPoint {
    pub k: usize,
    pub ell: usize,
    pub hf: Sig17,
    pub gap: Sig17,
}

#[derive(Debug, Clone, Serialize)]
pub struct LbfSeries {
    pub theta: Sig17,
    pub mbf_rhs: Sig17,
    pub points: Vec<LbfPoint>,
}

impl LbfSeries {
    /// Last gap below the first, and below 5% of `mbf_rhs` when that is positive.
    pub fn trends_to_zero(&self) -> bool {
        let (Some(first), Some(last)) = (self.points.first(), self.points.last()) else {
            return true;
        };
        let rhs = self.mbf_rhs.0;
        let shrinks = last.gap.0 < first.gap.0 || (first.gap.0 == 0.0 && last.gap.0 == 0.0);
        shrinks && (rhs <= 0.0 || last.gap.0 < 0.05 * rhs)
    }

    /// CSV rows `k,gap`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| vec![p.k as f64, p.gap.0]).collect()
    }
}

/// `|H_f(ceil(theta n k), k) - mbf_rhs(theta)|` for each `k`.
pub fn lbf_convergence(dist: &DenseDistribution, theta: f64, f: &FunctionTable, ks: &[usize]) -> Result<LbfSeries> {
    let rhs = mbf_rhs(dist, theta, f)?;
    let points = ks
        .iter()
        .map(|&k| {
            let ell = ceil_product(theta, dist.n(), k);
            let hf = hf_formula(dist, k, ell, f)?;
            Ok(LbfPoint { k, ell, hf: Sig17(hf), gap: Sig17((hf - rhs).abs()) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LbfSeries { theta: Sig17(theta), mbf_rhs: Sig17(rhs), points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_gibbs;
    use crate::model::IsingModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn edge() -> DenseDistribution {
        enumerate_gibbs(&IsingModel::uniform(2, &[(0, 1)], 0.5, 1.0).unwrap()).unwrap()
    }

    fn f2() -> FunctionTable {
        FunctionTable::new(2, vec![0.4, 1.3, 2.1, 0.7]).unwrap()
    }

    #[test]
    fn kappa_examples() {
        assert!((kappa(0, 3, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((kappa(2, 4, 2.0).unwrap() - 2.0 / 25.0).abs() < 1e-15);
        assert!(kappa(3, 4, 2.0).is_err());
        for k in 1..12 {
            for j in 0..k {
                for c in [1.0, 1.5, 2.0, 2.7] {
                    if let Ok(x) = kappa(j, k, c) {
                        assert!(x > 0.0 && x <= 1.0);
                        assert!(x <= kappa_binomial(j, k, c).unwrap() + 1e-12);
                    }
                }
            }
        }
        assert!((kappa_binomial(2, 4, 2.0).unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn hypergeo_examples() {
        let s = HyperGeoSpec::new(2, 2, 2).unwrap();
        assert!((s.pmf(&[1, 1]) - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.pmf(&[2, 0]) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(s.pmf(&[3, 0]), 0.0);
        let z = HyperGeoSpec::new(3, 4, 0).unwrap();
        assert_eq!(z.support(), vec![vec![0, 0, 0]]);
        assert!((z.pmf(&[0, 0, 0]) - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(z.sample(&mut rng), vec![0, 0, 0]);
        let full = HyperGeoSpec::new(3, 4, 12).unwrap();
        assert_eq!(full.sample(&mut rng), vec![4, 4, 4]);
        let spec = HyperGeoSpec::new(3, 5, 7).unwrap();
        assert_eq!(spec.support().len(), spec.support_size());
        let total: f64 = spec.support().iter().map(|a| spec.pmf(a)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concentration_examples() {
        let spec = HyperGeoSpec::new(2, 20, 20).unwrap();
        assert!(hypergeo_concentration_check(&spec, 0.3).unwrap().pass);
        let mut prev = f64::INFINITY;
        for i in 1..20 {
            let t = spec.tail(i as f64 * 0.05);
            assert!(t <= prev + 1e-15);
            prev = t;
        }
        assert_eq!(spec.tail(0.99), 0.0);
    }

    #[test]
    fn ubf_trivial_cases() {
        let d = edge();
        let r = ubf_check(&d, 2, 1.0, &[f2()]).unwrap();
        assert!(r[0].pass && (r[0].lhs - r[0].rhs).abs() < 1e-12);
        let one = DenseDistribution::product(&[0.3]).unwrap();
        let f = FunctionTable::new(1, vec![1.0, 3.0]).unwrap();
        let r = ubf_check(&one, 1, 1.0, &[f]).unwrap();
        assert!(r[0].pass && (r[0].lhs - r[0].rhs).abs() < 1e-14);
        let p = DenseDistribution::product(&[0.3, 0.6, 0.8]).unwrap();
        let g = FunctionTable::new(3, (0..8).map(|i| 0.5 + i as f64 * 0.37).collect()).unwrap();
        assert!(ubf_check(&p, 1, 3.0, &[g]).unwrap()[0].pass);
    }

    #[test]
    fn mbf_rhs_cases() {
        let one = DenseDistribution::product(&[0.4]).unwrap();
        let f = FunctionTable::new(1, vec![0.5, 2.0]).unwrap();
        let theta = 0.3;
        let pi = magnetize(&one, &FieldAssignment::uniform(1, theta).unwrap()).unwrap();
        let want = magnetized_partition(&one, theta).unwrap() * entropy_functional(&pi, &f).unwrap();
        assert!((mbf_rhs(&one, theta, &f).unwrap() - want).abs() < 1e-14);
        assert_eq!(mbf_rhs(&edge(), 0.5, &FunctionTable::constant(2, 3.0).unwrap()).unwrap(), 0.0);
        let near = mbf_rhs(&edge(), 0.999, &f2()).unwrap();
        let ent = entropy_functional(&edge(), &f2()).unwrap();
        assert!((near - ent).abs() < 0.01 * ent);
        let bad = mbf_check(&edge(), 0.5, 1e-6, &[f2()]).unwrap();
        assert!(!bad[0].pass && bad[0].witness.is_some());
    }

    #[test]
    fn hf_direct_matches_formula() {
        let d = edge();
        for (k, ell) in [(2, 2), (2, 1), (2, 3), (1, 1), (3, 3)] {
            let a = hf_direct(&d, k, ell, &f2()).unwrap();
            let b = hf_formula(&d, k, ell, &f2()).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "k={k} ell={ell}: {a} vs {b}");
        }
        let a = hf_direct(&d, 2, 4, &f2()).unwrap();
        assert!((a - entropy_functional(&d, &f2()).unwrap()).abs() < 1e-12);
        assert_eq!(hf_formula(&d, 2, 2, &FunctionTable::constant(2, 1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn lbf_trend() {
        let s = lbf_convergence(&edge(), 0.5, &f2(), &[4, 8, 16, 32]).unwrap();
        let gaps: Vec<f64> = s.points.iter().map(|p| p.gap.0).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(s.trends_to_zero());
    }

    #[test]
    fn ubf_constant_chain() {
        for n in [8usize, 16, 40, 100] {
            for theta in [0.3, 0.5, 0.8] {
                for eta in [0.5, 1.0, 2.0, 4.0] {
                    if let Some(r) = ubf_constant_bound_check(n, theta, eta).unwrap() {
                        assert!(r.pass, "{r:?}");
                    }
                }
            }
        }
    }
}
