//! Down/up walks on the simplicial complex of a homogeneous distribution,
//! entropy contraction, and the block-factorization/entropy-difference identity.

use glab::exact::{enumerate_gibbs, random_positive_function, DenseDistribution};
use glab::factorization::kappa;
use glab::transform::homogenize;
use glab::walks::{
    build_levels, entropy_decay_check, local_decay_check, ubf_ed_identity_check, uniform_set_system, walk_matrices,
};
use glab::IsingModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> glab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let complexes = [
        ("uniform C([5],3)", uniform_set_system(5, 3)?),
        ("homogenized product", homogenize(&DenseDistribution::product(&[0.2, 0.5, 0.7])?)?.dist().clone()),
    ];
    for (name, dist) in &complexes {
        let levels = build_levels(dist)?;
        let top = levels.top();
        let faces = levels.faces(top).len();
        println!("{name}: rank {top}, {faces} facets");
        let w: Vec<f64> = (0..faces).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        let nu: Vec<f64> = w.iter().map(|x| x / s).collect();
        for j in 0..top {
            let walk = walk_matrices(&levels, j)?;
            let decay = entropy_decay_check(&levels, &nu, j, 1.0)?;
            let local = local_decay_check(&levels, &w, j, kappa(j, top, 1.0)?)?;
            println!(
                "  j={j}: stochasticity error {:.1e}, KL down {:.5} <= {:.5}, local decay {}",
                walk.stochasticity_error(),
                decay.lhs,
                decay.rhs,
                if local.pass { "pass" } else { "FAIL" }
            );
        }
    }

    let mu = enumerate_gibbs(&IsingModel::path(3, 0.7, vec![1.0, 2.0, 0.5])?)?;
    let f = random_positive_function(3, &mut rng);
    for j in 0..=3 {
        let r = ubf_ed_identity_check(&mu, &f, j)?;
        println!("identity at j={j}: {:.10} vs {:.10}", r.lhs, r.rhs);
    }
    Ok(())
}
