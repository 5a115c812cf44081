//! Influence, correlation and Dobrushin matrices, and sampled
//! spectral-independence suprema over external fields.

use glab::exact::enumerate_gibbs;
use glab::spectral::{
    correlation_matrix, dobrushin_matrix, si_sup_estimate, signed_influence_matrix, FieldSamplerConfig, SiNorm,
};
use glab::IsingModel;

fn main() -> glab::Result<()> {
    let model = IsingModel::star(4, 1.5, vec![1.0, 0.5, 2.0, 1.0])?;
    let mu = enumerate_gibbs(&model)?;

    for (name, rep) in [
        ("signed influence", signed_influence_matrix(&mu)?),
        ("correlation", correlation_matrix(&mu)?),
        ("Dobrushin", dobrushin_matrix(&mu)?),
    ] {
        println!(
            "{name}: |.|_inf = {:.6}, |.|_1 = {:.6}, max real eig = {:.6}",
            rep.inf_norm, rep.one_norm, rep.max_real_eig
        );
        print!("{}", rep.matrix_csv());
    }

    let cfg = FieldSamplerConfig { rng_seed: 7, ..FieldSamplerConfig::default() };
    for norm in [SiNorm::InfNorm, SiNorm::MaxRealEig] {
        let est = si_sup_estimate(&mu, &cfg, norm)?;
        println!("{norm:?}: {} over {} field vectors ({})", est.value.0, est.fields_evaluated, est.bound_kind);
    }
    Ok(())
}
