use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::chain::{transition_matrix, TransitionMatrix};
use crate::error::{GlabError, Result};
use crate::exact::{condition, expected_site_covariance, marginal, DenseDistribution, FunctionTable};
use crate::model::Pinning;
use crate::numeric::{check_capacity, pairwise_sum, submasks};
use crate::report::Sig17;

fn check_positive(dist: &DenseDistribution, f: &FunctionTable) -> Result<()> {
    if f.n() != dist.n() {
        return Err(GlabError::LengthMismatch { expected: dist.n(), got: f.n() });
    }
    match dist.support().find(|&c| f.value(c) <= 0.0) {
        Some(c) => Err(GlabError::ZeroOnSupport(c)),
        None => Ok(()),
    }
}

fn state_values(p: &TransitionMatrix, f: &FunctionTable) -> Vec<f64> {
    p.states().iter().map(|&c| f.value(c)).collect()
}

/// `E_P(f, log f)` as the reversible pair sum.
pub fn dirichlet_form(dist: &DenseDistribution, f: &FunctionTable) -> Result<f64> {
    check_positive(dist, f)?;
    let p = transition_matrix(dist)?;
    let fv = state_values(&p, f);
    let lv: Vec<f64> = fv.iter().map(|x| x.ln()).collect();
    Ok(p.dirichlet_pairs(&fv, &lv))
}

/// `E_P(f, log f)` as `<f, (I - P) log f>_mu`.
pub fn dirichlet_inner(dist: &DenseDistribution, f: &FunctionTable) -> Result<f64> {
    check_positive(dist, f)?;
    let p = transition_matrix(dist)?;
    let fv = state_values(&p, f);
    let lv: Vec<f64> = fv.iter().map(|x| x.ln()).collect();
    let terms: Vec<f64> = (0..p.len())
        .map(|i| {
            let plog: f64 = p.row(i).iter().map(|&(j, w)| w * lv[j]).sum();
            p.stationary()[i] * fv[i] * (lv[i] - plog)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `(1/n) sum_v mu[MEnt_v f]`.
pub fn dirichlet_mat(dist: &DenseDistribution, f: &FunctionTable) -> Result<f64> {
    check_positive(dist, f)?;
    let n = dist.n();
    let terms = (0..n).map(|v| expected_site_covariance(dist, f, v)).collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms) / n as f64)
}

/// `phi(u) = u log u - u + 1`, accurate near `u = 1`.
fn phi(u: f64) -> f64 {
    let d = u - 1.0;
    if d.abs() < 0.1 {
        let mut acc = 0.0;
        let mut pw = d * d;
        for k in 2..20 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * pw / (k * (k - 1)) as f64;
            pw *= d;
        }
        acc
    } else if u == 0.0 {
        1.0
    } else {
        u * u.ln() - u + 1.0
    }
}

/// `Ent_mu[f] = sum_x mu(x) m phi(f(x)/m)` with `m = mu[f]`; every term is
/// nonnegative, so there is no cancellation near constants.
fn stable_entropy(mu: &[f64], f: &[f64]) -> f64 {
    let m = pairwise_sum(&mu.iter().zip(f).map(|(a, b)| a * b).collect::<Vec<_>>());
    if m <= 0.0 {
        return 0.0;
    }
    pairwise_sum(&mu.iter().zip(f).map(|(a, b)| a * m * phi(b / m)).collect::<Vec<_>>())
}

/// `E_P(f, log f) / Ent_mu[f]`.
pub fn mls_ratio(dist: &DenseDistribution, f: &FunctionTable) -> Result<f64> {
    check_positive(dist, f)?;
    let p = transition_matrix(dist)?;
    let fv = state_values(&p, f);
    let ent = stable_entropy(p.stationary(), &fv);
    if ent <= 0.0 {
        return Err(GlabError::UndefinedRatio);
    }
    let lv: Vec<f64> = fv.iter().map(|x| x.ln()).collect();
    Ok(p.dirichlet_pairs(&fv, &lv) / ent)
}

/// Tuning for [`mls_estimate`].
#[derive(Debug, Clone, Copy)]
pub struct MlsConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    pub polish_iters: usize,
}

impl Default for MlsConfig {
    fn default() -> Self {
        Self { restarts: 32, seed: 0, max_sweeps: 200, polish_iters: 300 }
    }
}

/// Best ratio found. This is an upper bound on the MLS constant, never a
/// lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct MlsEstimate {
    pub value: Sig17,
    pub bound_kind: &'static str,
    pub method: String,
    pub restarts: usize,
    /// Minimizing `f`, normalized to mean one, `0` off the support.
    #[serde(skip)]
    pub minimizer: Vec<f64>,
}

impl MlsEstimate {
    pub fn value(&self) -> f64 {
        self.value.0
    }
}

/// Ratio `E/Ent` over `g = log f` on the support states, with local
/// updates for coordinate moves.
struct Objective<'a> {
    p: &'a TransitionMatrix,
}

struct State {
    g: Vec<f64>,
    f: Vec<f64>,
    e: f64,
    ent: f64,
}

impl State {
    fn ratio(&self) -> f64 {
        if self.ent > 0.0 {
            self.e / self.ent
        } else {
            f64::INFINITY
        }
    }
}

impl Objective<'_> {
    fn mu(&self) -> &[f64] {
        self.p.stationary()
    }

    fn state(&self, mut g: Vec<f64>) -> State {
        let mu = self.mu();
        let top = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let m: f64 = mu.iter().zip(&g).map(|(a, x)| a * (x - top).exp()).sum();
        let shift = top + m.ln();
        g.iter_mut().for_each(|x| *x -= shift);
        let f: Vec<f64> = g.iter().map(|x| x.exp()).collect();
        let e = self.p.dirichlet_pairs(&f, &g);
        let ent = stable_entropy(mu, &f);
        State { g, f, e, ent }
    }

    /// Ratio after setting `g[z] += d`, without committing.
    fn trial(&self, s: &State, m: f64, z: usize, d: f64) -> (f64, f64, f64) {
        let mu = self.mu();
        let (gz, fz) = (s.g[z] + d, (s.g[z] + d).exp());
        let mut de = 0.0;
        for &(y, w) in self.p.row(z) {
            if y != z {
                de += w * ((fz - s.f[y]) * (gz - s.g[y]) - (s.f[z] - s.f[y]) * (s.g[z] - s.g[y]));
            }
        }
        let e = s.e + mu[z] * de;
        let m2 = m + mu[z] * (fz - s.f[z]);
        if m2 <= 0.0 {
            return (f64::INFINITY, e, m2);
        }
        // Ent = sum mu f g - m log m, recomputed from the stable form at sweep ends.
        let a_old = s.ent + m * m.ln();
        let a = a_old + mu[z] * (fz * gz - s.f[z] * s.g[z]);
        let ent = a - m2 * m2.ln();
        let r = if ent > 0.0 { e / ent } else { f64::INFINITY };
        (r, e, m2)
    }

    fn coordinate_descent(&self, s: State, sweeps: usize) -> State {
        let k = s.g.len();
        let mut s = s;
        let mut step = vec![0.5; k];
        for _ in 0..sweeps {
            let mut m: f64 = self.mu().iter().zip(&s.f).map(|(a, b)| a * b).sum();
            let mut moved = false;
            for z in 0..k {
                let cur = s.ratio();
                let mut accepted = false;
                for dir in [1.0, -1.0] {
                    let d = dir * step[z];
                    let (r, e, m2) = self.trial(&s, m, z, d);
                    if r < cur * (1.0 - 1e-13) {
                        let a =
                            s.ent + m * m.ln() + self.mu()[z] * ((s.g[z] + d).exp() * (s.g[z] + d) - s.f[z] * s.g[z]);
                        s.g[z] += d;
                        s.f[z] = s.g[z].exp();
                        s.e = e;
                        s.ent = a - m2 * m2.ln();
                        m = m2;
                        step[z] *= 1.5;
                        accepted = true;
                        moved = true;
                        break;
                    }
                }
                if !accepted {
                    step[z] *= 0.5;
                }
            }
            s = self.state(s.g);
            if !moved && step.iter().all(|&h| h < 1e-7) {
                break;
            }
        }
        s
    }

    fn gradient(&self, s: &State) -> Vec<f64> {
        let mu = self.mu();
        let r = s.ratio();
        (0..s.g.len())
            .map(|z| {
                let de: f64 = self
                    .p
                    .row(z)
                    .iter()
                    .filter(|(y, _)| *y != z)
                    .map(|&(y, w)| w * (s.f[z] * (s.g[z] - s.g[y]) + (s.f[z] - s.f[y])))
                    .sum();
                // g is normalized so that log m = 0.
                let dh = s.f[z] * s.g[z];
                mu[z] * (de - r * dh) / s.ent
            })
            .collect()
    }

    fn polish(&self, mut s: State, iters: usize) -> State {
        let mut t = 1.0;
        for _ in 0..iters {
            let grad = self.gradient(&s);
            let norm2: f64 = grad.iter().map(|x| x * x).sum();
            if !(norm2 > 1e-30) {
                break;
            }
            let cur = s.ratio();
            let mut improved = false;
            for _ in 0..40 {
                let g: Vec<f64> = s.g.iter().zip(&grad).map(|(a, b)| a - t * b).collect();
                let cand = self.state(g);
                if cand.ratio() <= cur - 1e-4 * t * norm2 {
                    s = cand;
                    improved = true;
                    t *= 2.0;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        s
    }

    /// Direction of the spectral gap, for the near-constant candidate.
    fn gap_direction(&self) -> Option<Vec<f64>> {
        let k = self.p.len();
        if !(2..=1024).contains(&k) {
            return None;
        }
        let mu = self.mu();
        let sq: Vec<f64> = mu.iter().map(|x| x.sqrt()).collect();
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k {
            for &(j, w) in self.p.row(i) {
                m[(i, j)] = sq[i] * w / sq[j];
            }
        }
        let m = (&m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let v = eig.eigenvectors.column(order[1]);
        let h: Vec<f64> = (0..k).map(|i| v[i] / sq[i]).collect();
        let scale = h.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        (scale > 0.0).then(|| h.iter().map(|x| x / scale).collect())
    }
}

/// Multi-start search for `inf_f E_P(f, log f)/Ent_mu[f]` over `f = exp(g)`.
pub fn mls_estimate(dist: &DenseDistribution, cfg: &MlsConfig) -> Result<MlsEstimate> {
    let p = transition_matrix(dist)?;
    let k = p.len();
    if k < 2 {
        return Err(GlabError::UndefinedRatio);
    }
    let obj = Objective { p: &p };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<State> = None;
    let consider = |s: State, best: &mut Option<State>| {
        if best.as_ref().is_none_or(|b| s.ratio() < b.ratio()) {
            *best = Some(s);
        }
    };
    if let Some(h) = obj.gap_direction() {
        consider(obj.state(h.iter().map(|x| 1e-3 * x).collect()), &mut best);
        let s = obj.state(h.iter().map(|x| 0.5 * x).collect());
        consider(obj.polish(s, cfg.polish_iters), &mut best);
    }
    let scales = [0.1, 0.5, 1.0, 2.0, 4.0];
    for r in 0..cfg.restarts {
        let scale = scales[r % scales.len()];
        let g: Vec<f64> = (0..k).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        let mut s = obj.state(g);
        if k <= 256 {
            s = obj.coordinate_descent(s, cfg.max_sweeps);
        }
        consider(obj.polish(s, cfg.polish_iters), &mut best);
    }
    let best = best.ok_or(GlabError::UndefinedRatio)?;
    let mut minimizer = vec![0.0; dist.probs().len()];
    for (i, &c) in p.states().iter().enumerate() {
        minimizer[c] = best.f[i];
    }
    let method =
        if k <= 256 { "multistart coordinate descent + gradient polish" } else { "multistart gradient descent" };
    Ok(MlsEstimate {
        value: Sig17(best.ratio()),
        bound_kind: "upper_bound",
        method: method.to_string(),
        restarts: cfg.restarts,
        minimizer,
    })
}

/// One row of the worst-pinning table.
#[derive(Debug, Clone, Serialize)]
pub struct PinnedMls {
    pub domain: usize,
    pub values: usize,
    pub free_vertices: usize,
    pub rho_hat: Sig17,
}

#[derive(Debug, Clone, Serialize)]
pub struct MlsMinEstimate {
    pub value: Sig17,
    pub bound_kind: &'static str,
    pub table: Vec<PinnedMls>,
}

impl MlsMinEstimate {
    pub fn value(&self) -> f64 {
        self.value.0
    }
}

/// Minimum of [`mls_estimate`] over every proper pinned subset `Lambda` and
/// feasible `sigma`, each run as Glauber dynamics on the free vertices.
/// Pinnings leaving a single feasible configuration are skipped.
pub fn mls_min_estimate(dist: &DenseDistribution, cfg: &MlsConfig) -> Result<MlsMinEstimate> {
    let n = dist.n();
    check_capacity(n)?;
    let full = dist.full_mask();
    let mut table = Vec::new();
    let mut index = 0u64;
    for domain in 0..full {
        for values in submasks(domain) {
            let pin = Pinning::from_masks(domain, values);
            if dist.pinning_mass(&pin) <= 0.0 {
                continue;
            }
            let sub = marginal(&condition(dist, &pin)?, full & !domain)?;
            if sub.support_size() < 2 {
                continue;
            }
            let seed = cfg.seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            index += 1;
            let est = mls_estimate(&sub, &MlsConfig { seed, ..*cfg })?;
            table.push(PinnedMls { domain, values, free_vertices: sub.n(), rho_hat: est.value });
        }
    }
    let value = table.iter().map(|r| r.rho_hat.0).fold(f64::INFINITY, f64::min);
    Ok(MlsMinEstimate { value: Sig17(value), bound_kind: "upper_bound", table })
}
