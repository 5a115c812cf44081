//! Magnetization comparison: the conditional entropy identity, the
//! tensorization change of base, and the Dobrushin MLS threshold.

use glab::exact::{enumerate_gibbs, random_positive_function};
use glab::glauber::{
    compare_identity_check, dobrushin_bound, dobrushin_mls_check, marginal_lower_bound, tensorization_chain_check,
};
use glab::IsingModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> glab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mu = enumerate_gibbs(&IsingModel::cycle(4, 0.8, vec![0.5, 2.0, 0.5, 2.0])?)?;
    let f = random_positive_function(4, &mut rng);
    let theta = 0.5;

    for v in 0..4 {
        let r = compare_identity_check(&mu, theta, v, &f)?;
        println!("vertex {v}: {:.12} = {:.12}", r.lhs, r.rhs);
    }
    for r in tensorization_chain_check(&mu, theta, &f)? {
        println!("{} [{}]: {:.6e} <= {:.6e}", r.name, r.instance, r.lhs, r.rhs);
    }

    println!("marginal lower bound {:.6}", marginal_lower_bound(&mu));
    let (b, eligible) = dobrushin_bound(&mu)?;
    println!(
        "Dobrushin: |A|_1 = {:.4}, |A|_inf = {:.4}, |A|_2 <= {:.4}, threshold {:.4e}",
        b.one_norm, b.inf_norm, b.two_norm, b.threshold
    );
    if eligible {
        let fs: Vec<_> = (0..5).map(|_| random_positive_function(4, &mut rng)).collect();
        let ok = dobrushin_mls_check(&mu, &fs)?.iter().all(|r| r.pass);
        println!("per-function threshold inequality holds on 5 functions: {ok}");
    }
    Ok(())
}
