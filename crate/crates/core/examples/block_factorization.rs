//! Uniform and magnetized block factorization, the H_f bridge between them
//! and its convergence as the transformation parameter k grows.

use glab::exact::{entropy_functional, enumerate_gibbs, random_positive_function};
use glab::factorization::{
    ceil_product, hf_direct, hf_formula, kappa_pair, lbf_convergence, mbf_check, ubf_check, ubf_constant,
};
use glab::IsingModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> glab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let model = IsingModel::cycle(4, 0.8, vec![0.5, 2.0, 1.0, 1.0])?;
    let mu = enumerate_gibbs(&model)?;
    let fs: Vec<_> = (0..5).map(|_| random_positive_function(4, &mut rng)).collect();

    let theta = 0.5;
    let c = (std::f64::consts::E / theta).powf(2.0 / 0.5 + 3.0);
    for r in mbf_check(&mu, theta, c, &fs)? {
        println!("mbf: Ent = {:.6} <= {:.6} ({})", r.lhs, r.rhs, if r.pass { "pass" } else { "FAIL" });
    }

    let ell = 3;
    let cu = ubf_constant(4, ell, 1.0)?;
    let passed = ubf_check(&mu, ell, cu, &fs)?.iter().filter(|r| r.pass).count();
    println!("ubf with l={ell}, C={cu:.4}: {passed}/{} pass", fs.len());

    let k = kappa_pair(2, 4, 2.0)?;
    println!("kappa(2, 4, 2) = {} by definition, {} by the binomial ratio", k.kappa.0, k.kappa_binomial.0);

    let pair = enumerate_gibbs(&IsingModel::new(2, &[(0, 1)], 0.5, vec![2.0, 0.5])?)?;
    let f = random_positive_function(2, &mut rng);
    let ell = ceil_product(theta, 2, 3);
    println!(
        "H_f(l={ell}, k=3): direct {:.12}, formula {:.12}",
        hf_direct(&pair, 3, ell, &f)?,
        hf_formula(&pair, 3, ell, &f)?
    );

    let series = lbf_convergence(&pair, theta, &f, &[2, 4, 8, 16, 32])?;
    println!("Ent = {:.6}, magnetized rhs = {:.6}", entropy_functional(&pair, &f)?, series.mbf_rhs.0);
    println!("k,H_f,gap");
    for p in &series.points {
        println!("{},{:.8},{:.3e}", p.k, p.hf.0, p.gap.0);
    }
    Ok(())
}
