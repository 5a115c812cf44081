use crate::error::{GlabError, Result};
use crate::exact::{
    condition, covariance_slices, entropy_functional, expected_site_covariance, magnetize, magnetized_partition,
    DenseDistribution, FieldAssignment, FunctionTable,
};
use crate::model::Pinning;
use crate::numeric::{pairwise_sum, submasks};
use crate::report::CheckReport;
use crate::spectral::{dobrushin_matrix, spectral_norm};

use super::mls::dirichlet_form;

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(GlabError::Domain(format!("theta must lie in (0,1), got {theta}")))
    }
}

fn check_f(dist: &DenseDistribution, f: &FunctionTable) -> Result<()> {
    if f.n() != dist.n() {
        return Err(GlabError::LengthMismatch { expected: dist.n(), got: f.n() });
    }
    Ok(())
}

/// Per boundary `sigma` on `V \ v`: `(mass of sigma, MEnt_{mu^sigma}[f])`,
/// with boundaries of zero mass dropped.
fn site_terms(dist: &DenseDistribution, f: &FunctionTable, v: usize) -> Result<Vec<(usize, f64, f64)>> {
    let bit = 1usize << v;
    let p = dist.probs();
    let mut out = Vec::new();
    for o in (0..p.len()).filter(|o| o & bit == 0) {
        let mass = p[o] + p[o | bit];
        if mass > 0.0 {
            let ment = covariance_slices(&[p[o] / mass, p[o | bit] / mass], &[f.value(o), f.value(o | bit)])?;
            out.push((o, mass, ment));
        }
    }
    Ok(out)
}

/// Checks, for `pi = mu^{(theta)}`,
/// `sum_R (1-theta)^{|R|} theta^{n-|R|} pi_R(1_R) pi^{1_R}[MEnt_v f]
///  = sum_{sigma on V\v} pi_{V\v}(sigma) theta^{n-||sigma||_+} MEnt_{pi^sigma}[f]`.
/// The left side goes through conditioning, the right side through the
/// single-site conditionals of `pi`.
pub fn compare_identity_check(
    dist: &DenseDistribution,
    theta: f64,
    v: usize,
    f: &FunctionTable,
) -> Result<CheckReport> {
    check_theta(theta)?;
    check_f(dist, f)?;
    let n = dist.n();
    if v >= n {
        return Err(GlabError::Domain(format!("vertex {v} out of range for n = {n}")));
    }
    let pi = magnetize(dist, &FieldAssignment::uniform(n, theta)?)?;
    let mut lhs_terms = Vec::new();
    for r in submasks(dist.full_mask()) {
        let pin = Pinning::all_plus(r);
        let mass = pi.pinning_mass(&pin);
        if mass <= 0.0 || r >> v & 1 == 1 {
            continue;
        }
        let k = r.count_ones() as i32;
        let inner = expected_site_covariance(&condition(&pi, &pin)?, f, v)?;
        lhs_terms.push((1.0 - theta).powi(k) * theta.powi(n as i32 - k) * mass * inner);
    }
    let rhs_terms: Vec<f64> = site_terms(&pi, f, v)?
        .into_iter()
        .map(|(o, mass, ment)| mass * theta.powi(n as i32 - o.count_ones() as i32) * ment)
        .collect();
    Ok(CheckReport::identity(
        "compare_identity",
        format!("n={n},v={v},theta={theta}"),
        pairwise_sum(&lhs_terms),
        pairwise_sum(&rhs_terms),
        1e-10,
        1e-15,
    ))
}

/// Checks the two ingredients behind the change of base measure under
/// magnetization with `pi = mu^{(theta)}`:
/// (a) `pi_v^sigma(+) <= mu_v^sigma(+)` for every `v` and boundary, as one
/// report at the worst margin;
/// (b) per vertex, `sum_sigma pi_{V\v}(sigma) theta^{-||sigma||_+} MEnt_{pi^sigma}[f]
///  <= (1/Z_pi) mu[MEnt_v f]`.
pub fn tensorization_chain_check(dist: &DenseDistribution, theta: f64, f: &FunctionTable) -> Result<Vec<CheckReport>> {
    check_theta(theta)?;
    check_f(dist, f)?;
    let n = dist.n();
    let pi = magnetize(dist, &FieldAssignment::uniform(n, theta)?)?;
    let z = magnetized_partition(dist, theta)?;
    let (mu_p, pi_p) = (dist.probs(), pi.probs());
    let mut worst: Option<(f64, f64, usize, usize)> = None;
    for v in 0..n {
        let bit = 1usize << v;
        for o in (0..mu_p.len()).filter(|o| o & bit == 0) {
            let (mm, mp) = (mu_p[o], mu_p[o | bit]);
            let (qm, qp) = (pi_p[o], pi_p[o | bit]);
            if mm + mp <= 0.0 || qm + qp <= 0.0 {
                continue;
            }
            let (a, b) = (qp / (qm + qp), mp / (mm + mp));
            if worst.is_none_or(|w| a - b > w.0 - w.1) {
                worst = Some((a, b, v, o));
            }
        }
    }
    let mut out = Vec::with_capacity(n + 1);
    let instance = format!("n={n},theta={theta}");
    out.push(match worst {
        Some((a, b, v, o)) => CheckReport::inequality_with_slack("margin_monotone", instance.clone(), a, b, 0.0, 1e-12)
            .with_witness(format!("v={v},boundary={o}"), false),
        None => CheckReport::not_applicable("margin_monotone", instance.clone(), "no feasible boundary"),
    });
    for v in 0..n {
        let lhs_terms: Vec<f64> = site_terms(&pi, f, v)?
            .into_iter()
            .map(|(o, mass, ment)| mass * theta.powi(-(o.count_ones() as i32)) * ment)
            .collect();
        let rhs = expected_site_covariance(dist, f, v)? / z;
        out.push(CheckReport::inequality(
            "tensorization_change_base",
            format!("{instance},v={v}"),
            pairwise_sum(&lhs_terms),
            rhs,
        ));
    }
    Ok(out)
}

/// `min_v min_{sigma in support} mu_v^{sigma_{V\v}}(sigma_v)`.
pub fn marginal_lower_bound(dist: &DenseDistribution) -> f64 {
    let p = dist.probs();
    let mut best = f64::INFINITY;
    for v in 0..dist.n() {
        let bit = 1usize << v;
        for c in dist.support() {
            best = best.min(p[c] / (p[c] + p[c ^ bit]));
        }
    }
    best
}

/// Parameters of the Dobrushin-type lower bound on the MLS constant.
#[derive(Debug, Clone, Copy)]
pub struct DobrushinBound {
    pub alpha: f64,
    pub one_norm: f64,
    pub inf_norm: f64,
    pub two_norm: f64,
    pub threshold: f64,
}

/// `alpha (1 - ||A||_2)^2 / (2n)`, with `||A||_2` taken as the smaller of
/// the SVD norm and `sqrt(||A||_1 ||A||_inf)`. The flag is false when that is `>= 1`.
pub fn dobrushin_bound(dist: &DenseDistribution) -> Result<(DobrushinBound, bool)> {
    let a = dobrushin_matrix(dist)?;
    let two = spectral_norm(&a.matrix).min((a.one_norm * a.inf_norm).sqrt());
    let alpha = marginal_lower_bound(dist);
    let threshold = alpha * (1.0 - two).powi(2) / (2.0 * dist.n() as f64);
    Ok((DobrushinBound { alpha, one_norm: a.one_norm, inf_norm: a.inf_norm, two_norm: two, threshold }, two < 1.0))
}

/// For each `f`: `E_P(f, log f) >= threshold * Ent_mu[f] - 1e-9`.
pub fn dobrushin_mls_check(dist: &DenseDistribution, fs: &[FunctionTable]) -> Result<Vec<CheckReport>> {
    let (b, ok) = dobrushin_bound(dist)?;
    let n = dist.n();
    if !ok {
        return Ok(vec![CheckReport::not_applicable(
            "dobrushin_mls",
            format!("n={n}"),
            format!("||A||_2 bound {} >= 1", b.two_norm),
        )]);
    }
    fs.iter()
        .enumerate()
        .map(|(i, f)| {
            check_f(dist, f)?;
            let ent = entropy_functional(dist, f)?;
            let e = dirichlet_form(dist, f)?;
            Ok(CheckReport::inequality_with_slack(
                "dobrushin_mls",
                format!("n={n},f={i}"),
                b.threshold * ent,
                e,
                0.0,
                1e-9,
            )
            .with_constant(b.threshold))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_gibbs;
    use crate::model::IsingModel;

    fn edge() -> DenseDistribution {
        enumerate_gibbs(&IsingModel::uniform(2, &[(0, 1)], 0.5, 1.0).unwrap()).unwrap()
    }

    fn tables(n: usize, count: usize) -> Vec<FunctionTable> {
        (0..count)
            .map(|s| {
                FunctionTable::new(n, (0..1usize << n).map(|i| 0.2 + ((i * 5 + s * 3) % 7) as f64).collect()).unwrap()
            })
            .collect()
    }

    #[test]
    fn identity_constant_and_edge() {
        let d = edge();
        let c = FunctionTable::constant(2, 2.0).unwrap();
        let r = compare_identity_check(&d, 0.3, 0, &c).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (0.0, 0.0, true));
        for f in tables(2, 5) {
            for v in 0..2 {
                assert!(compare_identity_check(&d, 0.37, v, &f).unwrap().pass);
            }
        }
    }

    #[test]
    fn identity_single_vertex_by_hand() {
        let d = DenseDistribution::product(&[0.4]).unwrap();
        let f = FunctionTable::new(1, vec![1.0, 3.0]).unwrap();
        let theta = 0.25;
        let r = compare_identity_check(&d, theta, 0, &f).unwrap();
        let q = 0.4 * theta / (0.6 + 0.4 * theta);
        let expected = theta * q * (1.0 - q) * 2.0 * 3f64.ln();
        assert!((r.lhs - expected).abs() < 1e-15 && (r.rhs - expected).abs() < 1e-15);
    }

    #[test]
    fn tensorization_single_vertex_and_product() {
        let d = DenseDistribution::product(&[0.7]).unwrap();
        let f = FunctionTable::new(1, vec![2.0, 0.5]).unwrap();
        let theta = 0.6;
        let reps = tensorization_chain_check(&d, theta, &f).unwrap();
        assert!(reps.iter().all(|r| r.pass));
        let z = 0.3 + 0.7 * theta;
        let q = 0.7 * theta / z;
        let cov = |p: f64| p * (1.0 - p) * 1.5 * 4f64.ln();
        assert!((reps[1].lhs - cov(q)).abs() < 1e-15);
        assert!((reps[1].rhs - cov(0.7) / z).abs() < 1e-15);
        let prod = DenseDistribution::product(&[0.2, 0.5, 0.9]).unwrap();
        for f in tables(3, 4) {
            assert!(tensorization_chain_check(&prod, 0.3, &f).unwrap().iter().all(|r| r.pass));
        }
    }

    #[test]
    fn margin_near_equality_close_to_one() {
        let d = enumerate_gibbs(&IsingModel::new(3, &[(0, 1), (1, 2)], 0.6, vec![0.5, 2.0, 1.0]).unwrap()).unwrap();
        let r = &tensorization_chain_check(&d, 0.999, &tables(3, 1)[0]).unwrap()[0];
        assert!(r.pass && r.rhs - r.lhs < 1e-3);
    }

    #[test]
    fn dobrushin_single_edge() {
        let (b, ok) = dobrushin_bound(&edge()).unwrap();
        assert!(ok);
        assert!((b.alpha - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.threshold - 1.0 / 27.0).abs() < 1e-12);
        let mut fs = tables(2, 6);
        fs.push(FunctionTable::constant(2, 1.0).unwrap());
        assert!(dobrushin_mls_check(&edge(), &fs).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn dobrushin_product() {
        let d = DenseDistribution::product(&[0.3, 0.6]).unwrap();
        let (b, _) = dobrushin_bound(&d).unwrap();
        assert_eq!(b.two_norm, 0.0);
        assert!((b.threshold - 0.3 / 4.0).abs() < 1e-15);
        assert!(dobrushin_mls_check(&d, &tables(2, 4)).unwrap().iter().all(|r| r.pass));
    }
}
