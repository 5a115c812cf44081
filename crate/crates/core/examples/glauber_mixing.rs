//! Glauber dynamics: the exact kernel, a seeded trajectory, exact mixing time
//! and the mixing bound implied by an estimated MLS constant.

use glab::exact::enumerate_gibbs;
use glab::glauber::{
    mixing_time_exact, mls_estimate, mls_mixing_bound, run_chain, theorem_shapes, transition_matrix, ChainSource,
    MlsConfig,
};
use glab::IsingModel;

fn main() -> glab::Result<()> {
    let model = IsingModel::cycle(5, 0.6, vec![0.5, 2.0, 1.0, 0.5, 2.0])?;
    let mu = enumerate_gibbs(&model)?;

    let p = transition_matrix(&mu)?;
    println!(
        "{} states, row-sum error {:.1e}, detailed-balance error {:.1e}",
        p.len(),
        p.row_sum_error(),
        p.detailed_balance_error()
    );

    let trace = run_chain(ChainSource::Model(&model), 10_000, 42, 0, 1000)?;
    print!("{}", trace.to_csv());

    let eps = 0.25;
    let t = mixing_time_exact(&mu, eps)?;
    let rho = mls_estimate(&mu, &MlsConfig { seed: 42, ..MlsConfig::default() })?;
    let bound = mls_mixing_bound(rho.value(), mu.mu_min(), eps)?;
    println!("T_mix({eps}) = {t}");
    println!("MLS estimate {:.6} ({}), optimistic bound {bound:.1}", rho.value(), rho.bound_kind);

    let shapes = theorem_shapes(&model, 0.5, eps);
    println!("{}", serde_json::to_string_pretty(&shapes).expect("serializable"));
    Ok(())
}
