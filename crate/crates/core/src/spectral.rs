//! Signed influence, correlation and Dobrushin matrices with norm and
//! spectrum reports, plus the sampled-field spectral-independence estimator.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GlabError, Result};
use crate::exact::{magnetize, DenseDistribution, FieldAssignment};
use crate::numeric::{check_capacity, eigenvalues, is_effectively_real, multiset_distance};
use crate::report::{CheckReport, Sig17};
use crate::transform::homogenize;

/// A matrix with its norms and spectrum.
#[derive(Debug, Clone)]
pub struct MatrixReport {
    pub matrix: DMatrix<f64>,
    /// Maximum absolute row sum.
    pub inf_norm: f64,
    /// Maximum absolute column sum.
    pub one_norm: f64,
    /// `sqrt(one_norm * inf_norm)`.
    pub two_norm_upper: f64,
    /// Largest real part among effectively real eigenvalues.
    pub max_real_eig: f64,
    /// All eigenvalues, real part descending.
    pub spectrum: Vec<Complex<f64>>,
    /// Eigenvalues excluded from `max_real_eig` for a nonzero imaginary part.
    pub complex_eigs: Vec<Complex<f64>>,
}

impl MatrixReport {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let inf_norm = inf_norm(&matrix);
        let one_norm = one_norm(&matrix);
        let spectrum = eigenvalues(&matrix);
        let (real, complex): (Vec<Complex<f64>>, Vec<Complex<f64>>) =
            spectrum.iter().partition(|z| is_effectively_real(z));
        let max_real_eig = real.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        Self {
            matrix,
            inf_norm,
            one_norm,
            two_norm_upper: (inf_norm * one_norm).sqrt(),
            max_real_eig,
            spectrum,
            complex_eigs: complex,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Row-major CSV, one row per line.
    pub fn matrix_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.matrix.nrows() {
            let row: Vec<String> = self.matrix.row(r).iter().map(|x| crate::report::fmt_f64(*x)).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// CSV `re,im` in the stored order.
    pub fn spectrum_csv(&self) -> String {
        let mut s = String::from("re,im\n");
        for z in &self.spectrum {
            s.push_str(&format!("{},{}\n", crate::report::fmt_f64(z.re), crate::report::fmt_f64(z.im)));
        }
        s
    }
}

pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows()).map(|r| m.row(r).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols()).map(|c| m.column(c).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Pairwise joint plus-probabilities `Pr[sigma_u = +1, sigma_v = +1]`, with
/// single-site plus-probabilities on the diagonal.
fn joint_plus(dist: &DenseDistribution) -> DMatrix<f64> {
    let n = dist.n();
    let mut j = DMatrix::zeros(n, n);
    for (c, &p) in dist.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut bu = c;
        while bu != 0 {
            let u = bu.trailing_zeros() as usize;
            bu &= bu - 1;
            let mut bv = c;
            while bv != 0 {
                let v = bv.trailing_zeros() as usize;
                bv &= bv - 1;
                j[(u, v)] += p;
            }
        }
    }
    j
}

/// `Psi^inf(u,v) = mu_v^{u<-+}(+) - mu_v^{u<--}(+)` when both values of `u`
/// have positive probability, else 0; zero diagonal.
pub fn signed_influence_matrix(dist: &DenseDistribution) -> Result<MatrixReport> {
    check_capacity(dist.n())?;
    Ok(MatrixReport::from_matrix(signed_influence(dist)))
}

pub(crate) fn signed_influence(dist: &DenseDistribution) -> DMatrix<f64> {
    let n = dist.n();
    let j = joint_plus(dist);
    let mut m = DMatrix::zeros(n, n);
    for u in 0..n {
        let pu = j[(u, u)];
        let qu = 1.0 - pu;
        if pu <= 0.0 || qu <= 0.0 {
            continue;
        }
        for v in 0..n {
            if v == u {
                continue;
            }
            let plus = j[(u, v)] / pu;
            let minus = (j[(v, v)] - j[(u, v)]) / qu;
            m[(u, v)] = plus - minus;
        }
    }
    m
}

/// Correlation matrix of the distribution viewed as a law on subsets (the
/// `+1` positions): diagonal `1 - Pr[i]`, off-diagonal `Pr[j|i] - Pr[j]`.
pub fn correlation_matrix(dist: &DenseDistribution) -> Result<MatrixReport> {
    check_capacity(dist.n())?;
    let n = dist.n();
    let j = joint_plus(dist);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let pi = j[(i, i)];
        m[(i, i)] = 1.0 - pi;
        if pi <= 0.0 {
            continue;
        }
        for k in 0..n {
            if k != i {
                m[(i, k)] = j[(i, k)] / pi - j[(k, k)];
            }
        }
    }
    Ok(MatrixReport::from_matrix(m))
}

/// Dobrushin matrix: `A(u,v)` is the largest total-variation distance
/// between the conditionals at `v` under two feasible full boundaries that
/// differ only at `u`.
pub fn dobrushin_matrix(dist: &DenseDistribution) -> Result<MatrixReport> {
    check_capacity(dist.n())?;
    let n = dist.n();
    let p = dist.probs();
    let mut a = DMatrix::zeros(n, n);
    for v in 0..n {
        let bv = 1usize << v;
        for u in 0..n {
            if u == v {
                continue;
            }
            let bu = 1usize << u;
            let mut best = 0.0f64;
            for c in 0..p.len() {
                if c & (bu | bv) != 0 {
                    continue;
                }
                let cond = |o: usize| {
                    let (m, q) = (p[o], p[o | bv]);
                    (m + q > 0.0).then(|| q / (m + q))
                };
                if let (Some(x), Some(y)) = (cond(c), cond(c | bu)) {
                    best = best.max((x - y).abs());
                }
            }
            a[(u, v)] = best;
        }
    }
    Ok(MatrixReport::from_matrix(a))
}

/// Which norm [`si_sup_estimate`] maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SiNorm {
    InfNorm,
    MaxRealEig,
}

/// Field-sampling protocol for "with all fields" suprema.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamplerConfig {
    /// Candidate values per coordinate.
    pub grid: Vec<f64>,
    /// Extra log-uniform draws in `[1e-3, 1e3]^n`.
    pub random_draws: usize,
    pub rng_seed: u64,
    /// Above this many grid points the product grid is subsampled at random.
    pub max_grid_points: usize,
}

impl Default for FieldSamplerConfig {
    fn default() -> Self {
        Self { grid: log_grid(1e-3, 1e3, 7), random_draws: 64, rng_seed: 0, max_grid_points: 20_000 }
    }
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![(lo * hi).sqrt()];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// Lower bound on a field supremum, with the maximizing field.
#[derive(Debug, Clone, Serialize)]
pub struct SiEstimate {
    pub value: Sig17,
    pub norm: SiNorm,
    pub maximizing_field: Vec<Sig17>,
    pub fields_evaluated: usize,
    pub bound_kind: &'static str,
}

/// Maximum of the chosen norm of `Psi^inf` of `dist^{(phi)}` over the sampled
/// field vectors. Always a lower bound on the supremum over all fields.
pub fn si_sup_estimate(dist: &DenseDistribution, cfg: &FieldSamplerConfig, norm: SiNorm) -> Result<SiEstimate> {
    if cfg.grid.iter().any(|g| !(*g > 0.0)) {
        return Err(GlabError::Domain("field grid values must be positive".into()));
    }
    let n = dist.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let g = cfg.grid.len();
    let total = (g as f64).powi(n as i32);
    let mut fields: Vec<Vec<f64>> = Vec::new();
    if g > 0 && total <= cfg.max_grid_points as f64 {
        for idx in 0..g.pow(n as u32) {
            let mut r = idx;
            fields.push(
                (0..n)
                    .map(|_| {
                        let x = cfg.grid[r % g];
                        r /= g;
                        x
                    })
                    .collect(),
            );
        }
    } else if g > 0 {
        for _ in 0..cfg.max_grid_points {
            fields.push((0..n).map(|_| cfg.grid[rng.random_range(0..g)]).collect());
        }
    }
    for _ in 0..cfg.random_draws {
        fields.push((0..n).map(|_| 10f64.powf(rng.random_range(-3.0..=3.0))).collect());
    }
    let mut best = (f64::NEG_INFINITY, vec![1.0; n]);
    for phi in &fields {
        let d = magnetize(dist, &FieldAssignment::full(phi.clone())?)?;
        let m = signed_influence(&d);
        let val = match norm {
            SiNorm::InfNorm => inf_norm(&m),
            SiNorm::MaxRealEig => MatrixReport::from_matrix(m).max_real_eig,
        };
        if val > best.0 {
            best = (val, phi.clone());
        }
    }
    Ok(SiEstimate {
        value: Sig17(best.0),
        norm,
        maximizing_field: best.1.into_iter().map(Sig17).collect(),
        fields_evaluated: fields.len(),
        bound_kind: "lower_bound",
    })
}

/// Spectra of `Psi^cor` of the homogenization and of `Psi^inf`, and the
/// multiset identity between them.
#[derive(Debug, Clone)]
pub struct HomogSpectrumReport {
    pub influence_eigs: Vec<Complex<f64>>,
    pub correlation_eigs: Vec<Complex<f64>>,
    pub expected: Vec<Complex<f64>>,
    pub distance: f64,
    pub pass: bool,
}

impl HomogSpectrumReport {
    pub fn to_check(&self, instance: &str) -> CheckReport {
        CheckReport::inequality_with_slack("homog_spectrum", instance, self.distance, 1e-7, 0.0, 0.0)
    }
}

/// Compares `eigs(Psi^cor(hom(mu^phi)))` with `{eigs(Psi^inf(mu^phi)) + 1} ∪ {0 x n}`.
pub fn homog_spectrum_check(dist: &DenseDistribution, fields: &FieldAssignment) -> Result<HomogSpectrumReport> {
    check_capacity(2 * dist.n())?;
    let tilted = magnetize(dist, fields)?;
    let inf = MatrixReport::from_matrix(signed_influence(&tilted));
    let hom = homogenize(&tilted)?;
    let cor = correlation_matrix(hom.dist())?;
    let mut expected: Vec<Complex<f64>> = inf.spectrum.iter().map(|z| z + Complex::new(1.0, 0.0)).collect();
    expected.extend(std::iter::repeat_n(Complex::new(0.0, 0.0), dist.n()));
    let distance = multiset_distance(&cor.spectrum, &expected).unwrap_or(f64::INFINITY);
    Ok(HomogSpectrumReport {
        influence_eigs: inf.spectrum,
        correlation_eigs: cor.spectrum,
        expected,
        distance,
        pass: distance <= 1e-7,
    })
}
