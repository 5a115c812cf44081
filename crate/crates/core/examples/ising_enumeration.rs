//! Exact Gibbs tables: enumeration, conditioning, marginals and magnetization.

use glab::exact::{condition, enumerate_gibbs, magnetize, marginal};
use glab::model::{in_delta_interior, uniqueness_thresholds};
use glab::{FieldAssignment, IsingModel, Pinning, SpinConfig};

fn main() -> glab::Result<()> {
    let model = IsingModel::cycle(4, 0.6, vec![0.5, 2.0, 0.5, 2.0])?;
    let mu = enumerate_gibbs(&model)?;
    println!("log Z = {:.6}", mu.log_partition().unwrap_or(f64::NAN));
    println!("config,spins,probability");
    for c in mu.support() {
        println!("{c},{:?},{:.6}", SpinConfig::from_index(c, 4).spins(), mu.prob(c));
    }

    let (lo, hi) = uniqueness_thresholds(model.regime_degree())?;
    println!("uniqueness window at degree {}: ({lo:.4}, {hi:.4})", model.regime_degree());
    println!("beta in the 0.5-interior: {}", in_delta_interior(model.beta(), 0.5, model.regime_degree())?);

    let pinned = condition(&mu, &Pinning::from_pairs(&[(0, 1), (2, -1)])?)?;
    let edge = marginal(&pinned, 0b1010)?;
    println!("law of (x1, x3) given x0 = +, x2 = -: {:?}", edge.probs());

    let tilted = magnetize(&mu, &FieldAssignment::uniform(4, 0.5)?)?;
    println!("P[x0 = +]: {:.6} before, {:.6} after halving every field", mu.plus_marginal(0), tilted.plus_marginal(0));
    Ok(())
}
