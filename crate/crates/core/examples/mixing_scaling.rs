//! Exact T_mix(1/4) of Glauber dynamics on Ising cycles, against n log n.
//! Pass a directory to also write the series as `mixing_scaling.csv`.

use glab::cli::emit_series;
use glab::exact::enumerate_gibbs;
use glab::glauber::mixing_time_exact;
use glab::IsingModel;

fn main() -> glab::Result<()> {
    let mut rows = Vec::new();
    println!("n,t_mix,ratio");
    for n in 4..=12 {
        let model = IsingModel::cycle(n, 0.6, vec![1.0; n])?;
        let t = mixing_time_exact(&enumerate_gibbs(&model)?, 0.25)?;
        let nf = n as f64;
        let ratio = t as f64 / (nf * nf.ln());
        println!("{n},{t},{ratio:.4}");
        rows.push(vec![nf, t as f64, ratio]);
    }
    if let Some(dir) = std::env::args().nth(1) {
        let path = emit_series(dir.as_ref(), "mixing_scaling", &["n", "t_mix", "ratio"], &rows)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
