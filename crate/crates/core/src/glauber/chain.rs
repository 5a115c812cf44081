use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GlabError, Result};
use crate::exact::DenseDistribution;
use crate::model::IsingModel;
use crate::numeric::check_capacity;
use crate::report::Sig17;

/// Glauber transition matrix restricted to the support, stored sparsely.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    n: usize,
    states: Vec<usize>,
    position: Vec<u32>,
    stationary: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

const NO_STATE: u32 = u32::MAX;

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Support configurations, increasing.
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Position of a configuration among the states.
    pub fn state_index(&self, config: usize) -> Option<usize> {
        match self.position.get(config) {
            Some(&p) if p != NO_STATE => Some(p as usize),
            _ => None,
        }
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Nonzero entries of row `i`, diagonal included.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|(c, _)| *c == j).map_or(0.0, |(_, p)| *p)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let s = self.len();
        let mut m = DMatrix::zeros(s, s);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                m[(i, j)] = p;
            }
        }
        m
    }

    pub fn row_sum_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `max |mu(x) P(x,y) - mu(y) P(y,x)|`.
    pub fn detailed_balance_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                let back = self.entry(j, i);
                worst = worst.max((self.stationary[i] * p - self.stationary[j] * back).abs());
            }
        }
        worst
    }

    /// `E_P(f, g) = (1/2) sum_{x,y} mu(x) P(x,y) (f(x)-f(y)) (g(x)-g(y))`
    /// over state-indexed vectors.
    pub fn dirichlet_pairs(&self, f: &[f64], g: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let s: f64 = row.iter().map(|&(j, p)| p * (f[i] - f[j]) * (g[i] - g[j])).sum();
                self.stationary[i] * s
            })
            .collect();
        0.5 * crate::numeric::pairwise_sum(&terms)
    }
}

/// Exact Glauber transition matrix of `dist` on its support.
pub fn transition_matrix(dist: &DenseDistribution) -> Result<TransitionMatrix> {
    let n = dist.n();
    check_capacity(n)?;
    let states: Vec<usize> = dist.support().collect();
    let mut position = vec![NO_STATE; 1 << n];
    for (i, &s) in states.iter().enumerate() {
        position[s] = i as u32;
    }
    let p = dist.probs();
    let rows = states
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut row = Vec::with_capacity(n + 1);
            let mut stay = 0.0;
            for v in 0..n {
                let y = x ^ (1 << v);
                let move_p = p[y] / (p[x] + p[y]);
                if p[y] > 0.0 {
                    row.push((position[y] as usize, move_p / n as f64));
                }
                stay += (1.0 - move_p) / n as f64;
            }
            row.push((i, stay));
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    let stationary = states.iter().map(|&s| p[s]).collect();
    Ok(TransitionMatrix { n, states, position, stationary, rows })
}

/// Where the single-site conditionals come from.
#[derive(Debug, Clone, Copy)]
pub enum ChainSource<'a> {
    /// Local conditionals from the neighbourhood; no enumeration.
    Model(&'a IsingModel),
    /// Conditionals read off an explicit table.
    Table(&'a DenseDistribution),
}

impl ChainSource<'_> {
    fn n(&self) -> usize {
        match self {
            ChainSource::Model(m) => m.n(),
            ChainSource::Table(d) => d.n(),
        }
    }

    fn plus_probability(&self, v: usize, x: usize) -> Result<f64> {
        match self {
            ChainSource::Model(m) => Ok(m.local_plus_probability(v, x)),
            ChainSource::Table(d) => {
                let (plus, minus) = (d.prob(x | 1 << v), d.prob(x & !(1 << v)));
                if plus + minus <= 0.0 {
                    return Err(GlabError::InfeasiblePinning);
                }
                Ok(plus / (plus + minus))
            }
        }
    }
}

/// A simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainTrace {
    pub seed: u64,
    pub start: usize,
    pub steps: u64,
    pub thin: u64,
    /// `(step, configuration)` for step 0 and every `thin`-th step.
    pub visited: Vec<(u64, usize)>,
}

impl ChainTrace {
    pub fn last(&self) -> usize {
        self.visited.last().map_or(self.start, |v| v.1)
    }

    /// CSV `step,config_index`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,config_index\n");
        for (t, c) in &self.visited {
            s.push_str(&format!("{t},{c}\n"));
        }
        s
    }
}

/// Per-step generator: stream `step` of the ChaCha8 stream keyed by `seed`.
pub fn step_rng(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step);
    rng
}

/// Runs Glauber dynamics for `steps` steps from `start`; step `t` uses
/// [`step_rng`]`(seed, t)`, so traces are reproducible and splittable.
pub fn run_chain(source: ChainSource<'_>, steps: u64, seed: u64, start: usize, thin: u64) -> Result<ChainTrace> {
    let n = source.n();
    if n >= usize::BITS as usize {
        return Err(GlabError::Capacity { n, limit: usize::BITS as usize - 1 });
    }
    if start >> n != 0 {
        return Err(GlabError::Domain(format!("start configuration {start} has bits beyond n = {n}")));
    }
    let thin = thin.max(1);
    let mut x = start;
    let mut visited = vec![(0, x)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 1..=steps {
        rng.set_stream(t);
        rng.set_word_pos(0);
        let v = rng.random_range(0..n);
        let u: f64 = rng.random();
        let q = source.plus_probability(v, x)?;
        x = if u < q { x | 1 << v } else { x & !(1 << v) };
        if t % thin == 0 {
            visited.push((t, x));
        }
    }
    Ok(ChainTrace { seed, start, steps, thin, visited })
}

/// Upper limit on the number of steps [`mixing_time_exact`] will scan.
pub const MAX_MIXING_STEPS: usize = 1_000_000;
/// Largest support handled by [`mixing_time_exact`].
pub const MAX_MIXING_SUPPORT: usize = 1 << 14;

/// `max_{x0} min{t : d_TV(P^t(x0, .), mu) <= eps}` over the support.
pub fn mixing_time_exact(dist: &DenseDistribution, eps: f64) -> Result<usize> {
    if !(eps >= 0.0) {
        return Err(GlabError::Domain(format!("epsilon must be nonnegative, got {eps}")));
    }
    let p = transition_matrix(dist)?;
    mixing_time_of(&p, eps)
}

/// Same as [`mixing_time_exact`] on a prebuilt matrix. Starts are evolved in
/// blocks; each start's distance to stationarity is nonincreasing, so a start
/// retires at its first hitting time.
pub fn mixing_time_of(p: &TransitionMatrix, eps: f64) -> Result<usize> {
    let s = p.len();
    if s > MAX_MIXING_SUPPORT {
        return Err(GlabError::Capacity { n: p.n(), limit: 14 });
    }
    const B: usize = 32;
    let pi = p.stationary();
    let mut worst = 0usize;
    let mut cur = vec![0.0; s * B];
    let mut next = vec![0.0; s * B];
    for block in (0..s).step_by(B) {
        let width = B.min(s - block);
        cur.iter_mut().for_each(|x| *x = 0.0);
        for b in 0..width {
            cur[(block + b) * B + b] = 1.0;
        }
        let mut hit = [usize::MAX; B];
        let mut t = 0usize;
        loop {
            let mut tv = [0.0f64; B];
            for y in 0..s {
                let row = &cur[y * B..y * B + B];
                for b in 0..width {
                    tv[b] += (row[b] - pi[y]).abs();
                }
            }
            let mut pending = false;
            for b in 0..width {
                if hit[b] == usize::MAX {
                    if 0.5 * tv[b] <= eps {
                        hit[b] = t;
                    } else {
                        pending = true;
                    }
                }
            }
            if !pending {
                break;
            }
            if t >= MAX_MIXING_STEPS {
                return Err(GlabError::Domain(format!("no mixing within {MAX_MIXING_STEPS} steps")));
            }
            next.iter_mut().for_each(|x| *x = 0.0);
            for y in 0..s {
                let src: [f64; B] = cur[y * B..y * B + B].try_into().expect("block width");
                for &(z, w) in p.row(y) {
                    let dst = &mut next[z * B..z * B + B];
                    for b in 0..B {
                        dst[b] += w * src[b];
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
            t += 1;
        }
        worst = worst.max(hit[..width].iter().copied().max().unwrap_or(0));
    }
    Ok(worst)
}

/// `(1/rho)(log log(1/mu_min) + log(1/(2 eps^2)))`.
pub fn mls_mixing_bound(rho: f64, mu_min: f64, eps: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(GlabError::Domain(format!("rho must be positive, got {rho}")));
    }
    if !(mu_min > 0.0 && mu_min <= (-1.0f64).exp()) {
        return Err(GlabError::Domain(format!("mu_min must lie in (0, 1/e], got {mu_min}")));
    }
    if !(eps > 0.0) {
        return Err(GlabError::Domain(format!("epsilon must be positive, got {eps}")));
    }
    Ok(((1.0 / mu_min).ln().ln() + (1.0 / (2.0 * eps * eps)).ln()) / rho)
}

/// Explicit-constant mixing bound for an Ising instance, together with the
/// two asymptotic shapes `r n (log(n/eps) + L)` where `r = lmax/lmin` and
/// `L` is `log log(2r)` or `log(2r)`. Neither shape is asserted.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremShapes {
    pub delta: Sig17,
    /// `log10` of `r 10^{30+12/delta} n (log n + log log(14000 r) + log(1/(2 eps^2)))`.
    pub log10_explicit_bound: Sig17,
    pub shape_loglog: Sig17,
    pub shape_log: Sig17,
}

pub fn theorem_shapes(model: &IsingModel, delta: f64, eps: f64) -> TheoremShapes {
    let r = model.lambda_max() / model.lambda_min();
    let n = model.n() as f64;
    let explicit = n.ln() + (14000.0 * r).ln().ln() + (1.0 / (2.0 * eps * eps)).ln();
    let head = r * n;
    let base = (n / eps).ln();
    TheoremShapes {
        delta: Sig17(delta),
        log10_explicit_bound: Sig17(r.log10() + 30.0 + 12.0 / delta + n.log10() + explicit.log10()),
        shape_loglog: Sig17(head * (base + (2.0 * r).ln().ln())),
        shape_log: Sig17(head * (base + (2.0 * r).ln())),
    }
}

/// Exact mixing time with the optimistic MLS-based bound next to it.
#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub epsilon: Sig17,
    pub t_mix_exact: usize,
    pub rho_hat: Sig17,
    pub rho_hat_method: String,
    /// Computed from an upper bound on rho, so it may undershoot the truth.
    pub mls_bound_optimistic: Sig17,
    pub mu_min: Sig17,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem_shapes: Option<TheoremShapes>,
}

impl MixingReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
