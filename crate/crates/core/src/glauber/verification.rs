use crate::error::Result;
use crate::exact::{condition, enumerate_gibbs, marginal, DenseDistribution};
use crate::model::{in_delta_interior, IsingModel, Pinning};
use crate::numeric::{check_capacity, submasks};
use crate::report::CheckReport;
use crate::spectral::dobrushin_matrix;

use super::compare::marginal_lower_bound;

/// `500 lambda_v` where `lambda_v >= 1`, else `lambda_v / 500`.
pub fn biased_lambda(model: &IsingModel) -> Vec<f64> {
    model.lambda().iter().map(|&l| if l >= 1.0 { 500.0 * l } else { l / 500.0 }).collect()
}

/// `min_v min(lambda_v, 1/lambda_v)`.
pub fn field_constant(model: &IsingModel) -> f64 {
    model.lambda().iter().map(|&l| l.min(1.0 / l)).fold(f64::INFINITY, f64::min)
}

/// Largest `max(||A||_1, ||A||_inf)` over every pinned marginal
/// `pi^tau_Lambda`, with the maximizing `(Lambda, tau)`.
pub fn worst_pinned_dobrushin(pi: &DenseDistribution) -> Result<(f64, usize, usize)> {
    let full = pi.full_mask();
    let mut worst = (0.0, full, 0);
    for lambda in submasks(full).filter(|&l| l != 0) {
        let outside = full & !lambda;
        for tau in submasks(outside) {
            let pin = Pinning::from_masks(outside, tau);
            if pi.pinning_mass(&pin) <= 0.0 {
                continue;
            }
            let sub = marginal(&condition(pi, &pin)?, lambda)?;
            let a = dobrushin_matrix(&sub)?;
            let norm = a.one_norm.max(a.inf_norm);
            if norm > worst.0 {
                worst = (norm, lambda, tau);
            }
        }
    }
    Ok(worst)
}

/// Exact checks of the three quantitative bounds used to certify the MLS
/// constant of the biased model `pi` (fields `lambda*`), for `beta` in the
/// `delta`-interior of the uniqueness window at degree `max(Delta, 3)`:
/// (i) the marginal lower bound is at least `C / (2 10^4)`;
/// (ii) every pinned Dobrushin matrix has `max(||A||_1, ||A||_inf) <= 3/5`;
/// (iii) `mu_min >= (lambda_min / (14000 lambda_max))^n`.
pub fn verification_bounds_check(model: &IsingModel, delta: f64) -> Result<Vec<CheckReport>> {
    let n = model.n();
    let degree = model.regime_degree();
    let instance = format!("n={n},beta={},delta={delta}", model.beta());
    if !in_delta_interior(model.beta(), delta, degree)? {
        return Ok(vec![CheckReport::not_applicable(
            "verification",
            instance,
            format!("beta outside the delta-interior at degree {degree}"),
        )]);
    }
    check_capacity(n)?;
    let c = field_constant(model);
    let pi = enumerate_gibbs(&model.with_lambda(biased_lambda(model))?)?;
    let alpha = marginal_lower_bound(&pi);
    let (a_norm, lam, tau) = worst_pinned_dobrushin(&pi)?;
    let mu = enumerate_gibbs(model)?;
    let floor = (model.lambda_min() / (14000.0 * model.lambda_max())).powi(n as i32);
    Ok(vec![
        CheckReport::inequality("verification_marginal", instance.clone(), c / 2e4, alpha).with_constant(c),
        CheckReport::inequality("verification_dobrushin", instance.clone(), a_norm, 0.6)
            .with_witness(format!("Lambda={lam},tau={tau}"), true),
        CheckReport::inequality("verification_mu_min", instance, floor, mu.mu_min()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_wide_margins() {
        let m = IsingModel::path(3, 1.0, vec![1.0; 3]).unwrap();
        let reps = verification_bounds_check(&m, 0.5).unwrap();
        assert_eq!(reps.len(), 3);
        assert!(reps.iter().all(|r| r.pass));
        assert!(reps[1].lhs < 1e-15);
        assert!(reps[0].rhs > 10.0 * reps[0].lhs);
    }

    #[test]
    fn mixed_cycle_passes() {
        let m = IsingModel::cycle(4, 0.6, vec![0.5, 2.0, 0.5, 2.0]).unwrap();
        assert!(verification_bounds_check(&m, 0.5).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn outside_regime() {
        let m = IsingModel::path(3, 0.1, vec![1.0; 3]).unwrap();
        let reps = verification_bounds_check(&m, 0.5).unwrap();
        assert_eq!(reps.len(), 1);
        assert!(reps[0].pass && reps[0].witness.as_deref().unwrap().starts_with("not applicable"));
    }
}
