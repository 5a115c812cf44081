//! Simplicial levels of a homogeneous distribution, down and up walks,
//! entropy contraction checks, and the uniform-block / entropy-difference
//! identity.

use std::cmp::Ordering;
use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{GlabError, Result};
use crate::exact::{entropy_slices, kl_slices, DenseDistribution, FunctionTable};
use crate::factorization::{kappa, ubf_average};
use crate::numeric::binomial;
use crate::report::{fmt_f64, instance_tag, CheckReport};
use crate::transform::{homogenize, homogenize_function};

/// Cap on the total number of faces.
pub const MAX_FACES: usize = 1_000_000;

fn elements(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|i| mask >> i & 1 == 1).collect()
}

fn lex_cmp(a: &usize, b: &usize) -> Ordering {
    elements(*a).cmp(&elements(*b))
}

/// Levels `X(0..=k)` of the downward closure of the support, with level
/// distributions `mu_(j) = mu D_{k->j}`.
#[derive(Debug, Clone)]
pub struct SimplicialLevels {
    ground: usize,
    k: usize,
    faces: Vec<Vec<usize>>,
    index: Vec<HashMap<usize, usize>>,
    level_probs: Vec<Vec<f64>>,
}

impl SimplicialLevels {
    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn top(&self) -> usize {
        self.k
    }

    /// Faces of `X(j)` as bit masks, lexicographic.
    pub fn faces(&self, j: usize) -> &[usize] {
        &self.faces[j]
    }

    pub fn face_index(&self, j: usize, face: usize) -> Option<usize> {
        self.index[j].get(&face).copied()
    }

    /// `mu_(j)` aligned with [`SimplicialLevels::faces`].
    pub fn level_distribution(&self, j: usize) -> &[f64] {
        &self.level_probs[j]
    }

    pub fn top_distribution(&self) -> &[f64] {
        &self.level_probs[self.k]
    }

    /// Pushes a law on `X(k)` down to `X(j)`.
    pub fn push_down(&self, nu: &[f64], j: usize) -> Result<Vec<f64>> {
        self.check_top_len(nu.len())?;
        let d = down_matrix(self, j)?;
        Ok((DVector::from_row_slice(nu).transpose() * d).iter().copied().collect())
    }

    /// `f^(j) = U_{j->k} f^(k)`.
    pub fn lift_to_level(&self, f_top: &[f64], j: usize) -> Result<Vec<f64>> {
        self.check_top_len(f_top.len())?;
        let u = up_matrix(self, j)?;
        Ok((u * DVector::from_row_slice(f_top)).iter().copied().collect())
    }

    fn check_top_len(&self, len: usize) -> Result<()> {
        let want = self.faces[self.k].len();
        if len != want {
            return Err(GlabError::LengthMismatch { expected: want, got: len });
        }
        Ok(())
    }

    /// CSV `level,face,probability` with elements joined by `|`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,face,probability\n");
        for (j, faces) in self.faces.iter().enumerate() {
            for (i, f) in faces.iter().enumerate() {
                let el: Vec<String> = elements(*f).iter().map(|e| e.to_string()).collect();
                s.push_str(&format!("{j},{},{}\n", el.join("|"), fmt_f64(self.level_probs[j][i])));
            }
        }
        s
    }
}

/// Builds the levels of a distribution whose support sets all have the same size.
pub fn build_levels(dist: &DenseDistribution) -> Result<SimplicialLevels> {
    let support: Vec<usize> = dist.support().collect();
    let k = support[0].count_ones() as usize;
    if let Some(s) = support.iter().find(|s| s.count_ones() as usize != k) {
        return Err(GlabError::NotHomogeneous(format!("support contains sets of sizes {k} and {}", s.count_ones())));
    }
    let mut faces: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
    faces[k] = support;
    let mut total = faces[k].len();
    for j in (0..k).rev() {
        let mut next: Vec<usize> = Vec::new();
        for &f in &faces[j + 1] {
            let mut bits = f;
            while bits != 0 {
                let low = bits & bits.wrapping_neg();
                next.push(f & !low);
                bits &= bits - 1;
            }
        }
        next.sort_unstable();
        next.dedup();
        total += next.len();
        if total > MAX_FACES {
            return Err(GlabError::Domain(format!("more than {MAX_FACES} faces")));
        }
        faces[j] = next;
    }
    for level in &mut faces {
        level.sort_by(lex_cmp);
    }
    let index: Vec<HashMap<usize, usize>> =
        faces.iter().map(|l| l.iter().enumerate().map(|(i, &f)| (f, i)).collect()).collect();
    let top: Vec<f64> = faces[k].iter().map(|&f| dist.prob(f)).collect();
    let mut levels = SimplicialLevels { ground: dist.n(), k, faces, index, level_probs: vec![Vec::new(); k + 1] };
    for j in 0..=k {
        levels.level_probs[j] = if j == k {
            top.clone()
        } else {
            let d = down_matrix(&levels, j)?;
            (DVector::from_row_slice(&top).transpose() * d).iter().copied().collect()
        };
    }
    Ok(levels)
}

/// `D_{k->j}(alpha, beta) = 1/C(k,j)` for `beta ⊆ alpha`.
fn down_matrix(levels: &SimplicialLevels, j: usize) -> Result<DMatrix<f64>> {
    let k = levels.k;
    if j > k {
        return Err(GlabError::Domain(format!("level {j} above the top level {k}")));
    }
    let top = &levels.faces[k];
    let w = 1.0 / binomial(k as u64, j as u64) as f64;
    let mut d = DMatrix::zeros(top.len(), levels.faces[j].len());
    for (a, &alpha) in top.iter().enumerate() {
        for beta in crate::numeric::submasks(alpha).filter(|b| b.count_ones() as usize == j) {
            d[(a, levels.index[j][&beta])] = w;
        }
    }
    Ok(d)
}

/// `U_{j->k}(beta, alpha) = mu(alpha) / sum_{gamma ⊇ beta} mu(gamma)`.
fn up_matrix(levels: &SimplicialLevels, j: usize) -> Result<DMatrix<f64>> {
    let k = levels.k;
    let d = down_matrix(levels, j)?;
    let top = &levels.level_probs[k];
    let mut u = DMatrix::zeros(levels.faces[j].len(), top.len());
    for b in 0..levels.faces[j].len() {
        let norm: f64 = (0..top.len()).filter(|&a| d[(a, b)] > 0.0).map(|a| top[a]).sum();
        if norm <= 0.0 {
            continue;
        }
        for a in 0..top.len() {
            if d[(a, b)] > 0.0 {
                u[(b, a)] = top[a] / norm;
            }
        }
    }
    Ok(u)
}

/// Down walk `D_{k->j}` and up walk `U_{j->k}`.
#[derive(Debug, Clone)]
pub struct WalkMatrices {
    pub j: usize,
    pub k: usize,
    pub down: DMatrix<f64>,
    pub up: DMatrix<f64>,
}

pub fn walk_matrices(levels: &SimplicialLevels, j: usize) -> Result<WalkMatrices> {
    if j >= levels.k {
        return Err(GlabError::Domain(format!("need j < k, got j={j}, k={}", levels.k)));
    }
    Ok(WalkMatrices { j, k: levels.k, down: down_matrix(levels, j)?, up: up_matrix(levels, j)? })
}

fn max_row_deviation(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows()).map(|r| (m.row(r).sum() - 1.0).abs()).fold(0.0, f64::max)
}

impl WalkMatrices {
    /// Largest deviation of a row sum from 1 over both matrices.
    pub fn stochasticity_error(&self) -> f64 {
        max_row_deviation(&self.down).max(max_row_deviation(&self.up))
    }
}

/// `KL(nu D || mu D) <= (1 - kappa(j, k, 1/alpha)) KL(nu || mu)`.
pub fn entropy_decay_check(levels: &SimplicialLevels, nu: &[f64], j: usize, alpha: f64) -> Result<CheckReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(GlabError::Domain(format!("alpha must lie in (0,1], got {alpha}")));
    }
    let kap = kappa(j, levels.k, 1.0 / alpha)?;
    let mu = levels.top_distribution();
    let rhs = (1.0 - kap) * kl_slices(nu, mu)?;
    let lhs = kl_slices(&levels.push_down(nu, j)?, levels.level_distribution(j))?;
    Ok(CheckReport::inequality("entropy_decay", instance_tag(&format!("decay_k{}_j{j}", levels.k), nu), lhs, rhs)
        .with_constant(kap))
}

/// `Ent_{mu_(j)}[f^(j)] <= (1 - kappa) Ent_{mu_(k)}[f^(k)]`.
pub fn local_decay_check(levels: &SimplicialLevels, f_top: &[f64], j: usize, kappa_val: f64) -> Result<CheckReport> {
    if !(kappa_val > 0.0 && kappa_val < 1.0) {
        return Err(GlabError::Domain(format!("kappa must lie in (0,1), got {kappa_val}")));
    }
    let fj = levels.lift_to_level(f_top, j)?;
    let lhs = entropy_slices(levels.level_distribution(j), &fj);
    let rhs = (1.0 - kappa_val) * entropy_slices(levels.top_distribution(), f_top);
    Ok(CheckReport::inequality("local_decay", instance_tag(&format!("local_k{}_j{j}", levels.k), f_top), lhs, rhs)
        .with_constant(kappa_val))
}

/// `(1/C(n,j)) sum_{|S|=j} mu[Ent_S f]` against
/// `Ent_{pi_(n)}[f^(n)] - Ent_{pi_(n-j)}[f^(n-j)]` on the homogenization.
pub fn ubf_ed_identity_check(dist: &DenseDistribution, f: &FunctionTable, j: usize) -> Result<CheckReport> {
    let n = dist.n();
    if j > n {
        return Err(GlabError::Domain(format!("j = {j} exceeds n = {n}")));
    }
    let lhs = if j == 0 { 0.0 } else { ubf_average(dist, j, f)? };
    let hom = homogenize(dist)?;
    let levels = build_levels(hom.dist())?;
    let fh = homogenize_function(f)?;
    let f_top: Vec<f64> = levels.faces(n).iter().map(|&s| fh.value(s)).collect();
    let top_ent = entropy_slices(levels.top_distribution(), &f_top);
    let low = n - j;
    let low_ent = entropy_slices(levels.level_distribution(low), &levels.lift_to_level(&f_top, low)?);
    let rhs = top_ent - low_ent;
    Ok(CheckReport::identity(
        "ubf_ed_identity",
        instance_tag(&format!("ubfed_n{n}_j{j}"), f.values()),
        lhs,
        rhs,
        1e-9,
        1e-12,
    ))
}

/// `g_mu(z) = sum_S mu(S) prod_{i in S} z_i`.
pub fn generating_polynomial(dist: &DenseDistribution, z: &[f64]) -> Result<f64> {
    if z.len() != dist.n() {
        return Err(GlabError::LengthMismatch { expected: dist.n(), got: z.len() });
    }
    Ok(dist.support().map(|s| dist.prob(s) * elements(s).iter().map(|&i| z[i]).product::<f64>()).sum())
}

/// Uniform law on the `k`-subsets of `[n]`.
pub fn uniform_set_system(n: usize, k: usize) -> Result<DenseDistribution> {
    let mut w = vec![0.0; 1 << n];
    for s in crate::numeric::subsets_of_size(n, k) {
        w[s] = 1.0;
    }
    DenseDistribution::from_weights(n, w)
}
