//! Dirichlet forms, the MLS ratio, and multi-start upper estimates of the
//! MLS constant, including the worst case over pinnings.

use glab::exact::{enumerate_gibbs, random_positive_function};
use glab::glauber::{
    dirichlet_form, dirichlet_inner, dirichlet_mat, mls_estimate, mls_min_estimate, mls_ratio, MlsConfig,
};
use glab::IsingModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> glab::Result<()> {
    let mu = enumerate_gibbs(&IsingModel::path(3, 1.5, vec![0.5, 2.0, 1.0])?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_positive_function(3, &mut rng);
    println!(
        "E(f, log f): pairs {:.12}, inner product {:.12}, matrix {:.12}",
        dirichlet_form(&mu, &f)?,
        dirichlet_inner(&mu, &f)?,
        dirichlet_mat(&mu, &f)?
    );
    println!("ratio E/Ent for a random f: {:.6}", mls_ratio(&mu, &f)?);

    let cfg = MlsConfig { seed: 5, ..MlsConfig::default() };
    let est = mls_estimate(&mu, &cfg)?;
    println!("estimate {:.6} ({}, {}, {} restarts)", est.value(), est.bound_kind, est.method, est.restarts);

    let worst = mls_min_estimate(&mu, &cfg)?;
    println!("worst pinning: {:.6} over {} pinned sub-instances", worst.value(), worst.table.len());
    Ok(())
}
