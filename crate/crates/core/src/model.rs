//! Ising instances, uniqueness-regime arithmetic, spin configurations,
//! pinnings and the flip direction.
//!
//! Configurations are encoded as `n`-bit integers: vertex `v` is bit `v`,
//! and a set bit means spin `+1`.

use serde::{Deserialize, Serialize};

use crate::error::{GlabError, Result};

/// An Ising instance `(G, beta, lambda)` on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    beta: f64,
    lambda: Vec<f64>,
    delta: Option<f64>,
}

impl IsingModel {
    /// Builds a validated model. Edges are normalized to `(u, v)` with `u < v`;
    /// self-loops and duplicates are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)], beta: f64, lambda: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(GlabError::InvalidModel("vertex count must be at least 1".into()));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(GlabError::InvalidModel(format!("beta must be positive, got {beta}")));
        }
        if lambda.len() != n {
            return Err(GlabError::InvalidModel(format!("lambda has length {}, expected {n}", lambda.len())));
        }
        if let Some((v, l)) = lambda.iter().enumerate().find(|(_, l)| !(l.is_finite() && **l > 0.0)) {
            return Err(GlabError::InvalidModel(format!("lambda[{v}] = {l} is not positive")));
        }
        let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GlabError::InvalidModel(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(GlabError::InvalidModel(format!("self-loop at vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if normalized.contains(&e) {
                return Err(GlabError::InvalidModel(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            normalized.push(e);
            adjacency[e.0].push(e.1);
            adjacency[e.1].push(e.0);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        Ok(Self { n, edges: normalized, adjacency, beta, lambda, delta: None })
    }

    /// Same as [`IsingModel::new`] with every field equal to `lambda`.
    pub fn uniform(n: usize, edges: &[(usize, usize)], beta: f64, lambda: f64) -> Result<Self> {
        Self::new(n, edges, beta, vec![lambda; n])
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(GlabError::Domain(format!("delta must lie in (0,1), got {delta}")));
        }
        self.delta = Some(delta);
        Ok(self)
    }

    pub fn path(n: usize, beta: f64, lambda: Vec<f64>) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges, beta, lambda)
    }

    /// Cycle on `n >= 3` vertices (a path for smaller `n`).
    pub fn cycle(n: usize, beta: f64, lambda: Vec<f64>) -> Result<Self> {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n >= 3 {
            edges.push((n - 1, 0));
        }
        Self::new(n, &edges, beta, lambda)
    }

    /// Star with centre `0`.
    pub fn star(n: usize, beta: f64, lambda: Vec<f64>) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Self::new(n, &edges, beta, lambda)
    }

    pub fn complete(n: usize, beta: f64, lambda: Vec<f64>) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::new(n, &edges, beta, lambda)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Degree parameter used for regime queries: the maximum degree, raised to
    /// 3 for graphs whose degrees never reach it.
    pub fn regime_degree(&self) -> usize {
        self.max_degree().max(3)
    }

    /// Same graph and `beta`, different fields.
    pub fn with_lambda(&self, lambda: Vec<f64>) -> Result<Self> {
        let mut m = Self::new(self.n, &self.edges, self.beta, lambda)?;
        m.delta = self.delta;
        Ok(m)
    }

    /// Number of monochromatic edges in `config`.
    pub fn monochromatic_edges(&self, config: usize) -> usize {
        self.edges.iter().filter(|&&(u, v)| ((config >> u) & 1) == ((config >> v) & 1)).count()
    }

    /// `beta^{m(sigma)} prod_{sigma_v = +1} lambda_v`.
    pub fn gibbs_weight(&self, config: usize) -> f64 {
        let mut w = self.beta.powi(self.monochromatic_edges(config) as i32);
        for (v, l) in self.lambda.iter().enumerate() {
            if (config >> v) & 1 == 1 {
                w *= l;
            }
        }
        w
    }

    pub fn log_gibbs_weight(&self, config: usize) -> f64 {
        let mut w = self.monochromatic_edges(config) as f64 * self.beta.ln();
        for (v, l) in self.lambda.iter().enumerate() {
            if (config >> v) & 1 == 1 {
                w += l.ln();
            }
        }
        w
    }

    /// Probability that `v` is `+1` given the spins of its neighbours in
    /// `config` (the value of `v` itself is ignored).
    pub fn local_plus_probability(&self, v: usize, config: usize) -> f64 {
        let plus = self.adjacency[v].iter().filter(|&&u| (config >> u) & 1 == 1).count() as i32;
        let minus = self.adjacency[v].len() as i32 - plus;
        let a = self.lambda[v] * self.beta.powi(plus);
        let b = self.beta.powi(minus);
        a / (a + b)
    }
}

/// On-disk model description. `lambda` may be a scalar that broadcasts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub beta: f64,
    pub lambda: LambdaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Scalar(f64),
    PerVertex(Vec<f64>),
}

impl ModelFile {
    pub fn into_model(self) -> Result<IsingModel> {
        let lambda = match self.lambda {
            LambdaSpec::Scalar(l) => vec![l; self.n],
            LambdaSpec::PerVertex(v) => v,
        };
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let model = IsingModel::new(self.n, &edges, self.beta, lambda)?;
        match self.delta {
            Some(d) => model.with_delta(d),
            None => Ok(model),
        }
    }
}

impl From<&IsingModel> for ModelFile {
    fn from(m: &IsingModel) -> Self {
        ModelFile {
            n: m.n,
            edges: m.edges.iter().map(|&(u, v)| [u, v]).collect(),
            beta: m.beta,
            lambda: LambdaSpec::PerVertex(m.lambda.clone()),
            delta: m.delta,
        }
    }
}

impl IsingModel {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        file.into_model()
    }
}

/// A spin vector with entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    spins: Vec<i8>,
}

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(s) = spins.iter().find(|s| **s != 1 && **s != -1) {
            return Err(GlabError::Domain(format!("spin {s} is not +1 or -1")));
        }
        Ok(Self { spins })
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        let spins = (0..n).map(|v| if (index >> v) & 1 == 1 { 1 } else { -1 }).collect();
        Self { spins }
    }

    pub fn index(&self) -> usize {
        self.spins.iter().enumerate().filter(|(_, s)| **s == 1).fold(0, |acc, (v, _)| acc | (1 << v))
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// `||sigma||_+`, the number of `+1` spins.
    pub fn plus_count(&self) -> usize {
        self.spins.iter().filter(|s| **s == 1).count()
    }
}

/// Spins fixed on a subset of vertices, stored as a pair of bit masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Pinning {
    domain: usize,
    values: usize,
}

impl Pinning {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Pins `(vertex, spin)` pairs; spins must be `+1` or `-1`.
    pub fn from_pairs(pairs: &[(usize, i8)]) -> Result<Self> {
        let mut p = Self::default();
        for &(v, s) in pairs {
            if v >= usize::BITS as usize - 1 {
                return Err(GlabError::Domain(format!("vertex {v} out of range")));
            }
            if s != 1 && s != -1 {
                return Err(GlabError::Domain(format!("spin {s} is not +1 or -1")));
            }
            if p.domain & (1 << v) != 0 {
                return Err(GlabError::Domain(format!("vertex {v} pinned twice")));
            }
            p.domain |= 1 << v;
            if s == 1 {
                p.values |= 1 << v;
            }
        }
        Ok(p)
    }

    /// Pins the vertices in `domain` to the corresponding bits of `config`.
    pub fn from_masks(domain: usize, config: usize) -> Self {
        Self { domain, values: config & domain }
    }

    /// All of `mask` pinned to `+1`.
    pub fn all_plus(mask: usize) -> Self {
        Self { domain: mask, values: mask }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn values(&self) -> usize {
        self.values
    }

    #[inline]
    pub fn agrees(&self, config: usize) -> bool {
        config & self.domain == self.values
    }

    pub fn max_vertex(&self) -> Option<usize> {
        if self.domain == 0 {
            None
        } else {
            Some(usize::BITS as usize - 1 - self.domain.leading_zeros() as usize)
        }
    }
}

/// Direction vector `chi` for the flip operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipDirection {
    chi: Vec<i8>,
}

impl FlipDirection {
    pub fn new(chi: Vec<i8>) -> Result<Self> {
        SpinConfig::new(chi.clone())?;
        Ok(Self { chi })
    }

    pub fn all_plus(n: usize) -> Self {
        Self { chi: vec![1; n] }
    }

    pub fn chi(&self) -> &[i8] {
        &self.chi
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    /// Mask of the coordinates with `chi_v = -1`; `sigma ⊙ chi` is `sigma ^ mask`.
    pub fn negative_mask(&self) -> usize {
        self.chi.iter().enumerate().filter(|(_, c)| **c == -1).fold(0, |acc, (v, _)| acc | (1 << v))
    }
}

/// `chi_v = +1` iff `lambda_v >= 1`.
pub fn flip_direction(model: &IsingModel) -> FlipDirection {
    FlipDirection { chi: model.lambda.iter().map(|&l| if l >= 1.0 { 1 } else { -1 }).collect() }
}

/// `((D-2)/D, D/(D-2))` for maximum degree `D >= 3`.
pub fn uniqueness_thresholds(max_degree: usize) -> Result<(f64, f64)> {
    if max_degree < 3 {
        return Err(GlabError::Domain(format!("uniqueness thresholds need max degree >= 3, got {max_degree}")));
    }
    let d = max_degree as f64;
    Ok(((d - 2.0) / d, d / (d - 2.0)))
}

/// Whether `beta` lies in `[(D-2+delta)/(D-delta), (D-delta)/(D-2+delta)]`.
pub fn in_delta_interior(beta: f64, delta: f64, max_degree: usize) -> Result<bool> {
    if max_degree < 3 {
        return Err(GlabError::Domain(format!("max degree must be >= 3, got {max_degree}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(GlabError::Domain(format!("delta must lie in (0,1), got {delta}")));
    }
    let d = max_degree as f64;
    let lo = (d - 2.0 + delta) / (d - delta);
    let hi = (d - delta) / (d - 2.0 + delta);
    // the endpoints are reciprocal; allow one ulp-scale of slack at each
    let tol = 4.0 * f64::EPSILON;
    Ok(beta >= lo * (1.0 - tol) && beta <= hi * (1.0 + tol))
}

/// `sup_y |(1-b^2) e^y / ((b e^y + 1)(b + e^y))| = |1-b|/(1+b)`, attained at `y = 0`.
pub fn potential_sup(beta: f64) -> f64 {
    (1.0 - beta).abs() / (1.0 + beta)
}

/// The one-step potential `h(y)`.
pub fn potential(beta: f64, y: f64) -> f64 {
    // rewritten in terms of e^{-|y|} so large |y| does not overflow
    let t = (-y.abs()).exp();
    ((1.0 - beta * beta) * t / ((beta + t) * (beta * t + 1.0))).abs()
}

/// Grid maximum of [`potential`] over `y in [lo, hi]`.
pub fn potential_sup_grid(beta: f64, lo: f64, hi: f64, points: usize) -> f64 {
    let points = points.max(2);
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).map(|y| potential(beta, y)).fold(0.0, f64::max)
}
