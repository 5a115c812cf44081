//! The multivariate hypergeometric law of bucket occupancies: exact pmf,
//! sampling, and the tail bound 2 exp(-2 eps^2 k).

use glab::factorization::{hypergeo_concentration_check, HyperGeoSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> glab::Result<()> {
    let spec = HyperGeoSpec::new(3, 4, 6)?;
    println!("support size {}", spec.support_size());
    for a in spec.support().iter().take(6) {
        println!("{a:?}: {:.6}", spec.pmf(a));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws = 100_000;
    let mut hist = [0usize; 5];
    for _ in 0..draws {
        hist[spec.sample(&mut rng)[0]] += 1;
    }
    println!("x,empirical,exact");
    for (x, c) in hist.iter().enumerate() {
        println!("{x},{:.4},{:.4}", *c as f64 / draws as f64, spec.marginal_pmf(x));
    }

    println!("k,eps,tail,bound");
    for k in [5, 10, 20, 40] {
        let s = HyperGeoSpec::new(2, k, k)?;
        for eps in [0.1, 0.2, 0.3] {
            let r = hypergeo_concentration_check(&s, eps)?;
            println!("{k},{eps},{:.3e},{:.3e}", r.lhs, r.rhs);
        }
    }
    Ok(())
}
