//! The k-transformation, its projection back to the base model, and the
//! entrywise influence bounds for transformed distributions.

use glab::exact::{entropy_functional, enumerate_gibbs, random_positive_function};
use glab::spectral::homog_spectrum_check;
use glab::transform::{homogenize, k_transform, ktrans_influence_check, ktrans_rowsum_check, lift_function};
use glab::{FieldAssignment, IsingModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> glab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mu = enumerate_gibbs(&IsingModel::path(3, 0.6, vec![0.5, 2.0, 1.0])?)?;

    for k in 1..=3 {
        let t = k_transform(&mu, k)?;
        let back = t.pushforward()?;
        let err = (0..8).map(|c| (back.prob(c) - mu.prob(c)).abs()).fold(0.0, f64::max);
        let f = random_positive_function(3, &mut rng);
        let lifted = entropy_functional(t.dist(), &lift_function(&f, k)?)?;
        println!(
            "k={k}: {} sites, support {}, pushforward error {err:.1e}, Ent {:.9} vs lifted {:.9}",
            3 * k,
            t.dist().support_size(),
            entropy_functional(&mu, &f)?,
            lifted
        );
    }

    let phi = FieldAssignment::full(vec![0.5, 2.0, 1.5, 0.8, 1.0, 3.0])?;
    let entry = ktrans_influence_check(&mu, 2, &phi)?;
    let row = ktrans_rowsum_check(&mu, 2, &phi)?;
    println!("k=2 entrywise bounds pass: {}, row-sum bound pass: {}", entry.pass(), row.pass);

    let h = homogenize(&mu)?;
    let spec = homog_spectrum_check(&mu, &FieldAssignment::full(vec![2.0, 0.5, 1.0])?)?;
    println!("homogenized ground set {}, spectrum distance {:.2e}", 2 * h.base_n(), spec.distance);
    Ok(())
}
