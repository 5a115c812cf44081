//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use glab::cli::{run_suite, RunConfig, Suite};
use glab::exact::{
    entropy_functional, enumerate_gibbs, random_distribution, random_fields, random_positive_function,
    DenseDistribution,
};
use glab::factorization::{
    ceil_product, hf_direct, hf_formula, hypergeo_concentration_check, kappa, lbf_convergence, mbf_rhs, HyperGeoSpec,
};
use glab::glauber::{
    compare_identity_check, dirichlet_form, dirichlet_inner, dirichlet_mat, dobrushin_bound, dobrushin_mls_check,
    mixing_time_exact, tensorization_chain_check, verification_bounds_check,
};
use glab::model::in_delta_interior;
use glab::numeric::pairwise_sum;
use glab::spectral::{correlation_matrix, dobrushin_matrix, homog_spectrum_check, signed_influence_matrix};
use glab::transform::{homogenize, k_transform, ktrans_influence_check, ktrans_rowsum_check, lift_function};
use glab::walks::{build_levels, entropy_decay_check, local_decay_check, ubf_ed_identity_check, uniform_set_system};
use glab::{IsingModel, Result};

use common::{correlation_oracle, dobrushin_oracle, families, grid, influence_oracle, rel_close};

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn rng(label: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xACCE_0000 + label)
}

fn c01_influence() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut instances = 0;
    for n in 2..=4 {
        for beta in [1.0 / 3.0, 0.5, 1.0, 2.0, 3.0] {
            for lambda in grid(n, &[0.25, 1.0, 4.0]) {
                for (_, m) in families(n, beta, &lambda) {
                    let d = enumerate_gibbs(&m)?;
                    let pairs = [
                        (signed_influence_matrix(&d)?.matrix, influence_oracle(&m)),
                        (correlation_matrix(&d)?.matrix, correlation_oracle(&m)),
                        (dobrushin_matrix(&d)?.matrix, dobrushin_oracle(&m)),
                    ];
                    for (a, b) in pairs {
                        worst = worst.max((a - b).amax());
                    }
                    instances += 1;
                }
            }
        }
    }
    let mut closed = 0.0f64;
    for beta in [1.0 / 3.0, 0.5, 1.0, 2.0, 3.0] {
        let d = enumerate_gibbs(&IsingModel::uniform(2, &[(0, 1)], beta, 1.0)?)?;
        let psi = signed_influence_matrix(&d)?.matrix;
        closed = closed.max((psi[(0, 1)] - (beta - 1.0) / (beta + 1.0)).abs());
    }
    outcome(
        worst <= 1e-10 && closed <= 1e-12,
        format!("{instances} instances, max entry deviation {worst:.2e}, closed form deviation {closed:.2e}"),
    )
}

fn c02_ktransform() -> Result<Outcome> {
    let mut r = rng(2);
    let mut failures = 0;
    for _ in 0..200 {
        let n = r.random_range(1..=3);
        let k = r.random_range(2..=3);
        let d = random_distribution(n, &mut r)?;
        let phi = random_fields(n * k, &mut r);
        let entry = ktrans_influence_check(&d, k, &phi)?;
        let row = ktrans_rowsum_check(&d, k, &phi)?;
        failures += usize::from(!entry.pass()) + usize::from(!row.pass);
    }
    outcome(failures == 0, format!("200 instances, {failures} failures"))
}

fn c03_homog_spectrum() -> Result<Outcome> {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(1..=4);
        let d = random_distribution(n, &mut r)?;
        let phi = random_fields(n, &mut r);
        worst = worst.max(homog_spectrum_check(&d, &phi)?.distance);
    }
    outcome(worst <= 1e-7, format!("100 instances, max multiset distance {worst:.2e}"))
}

fn c04_entropy_lift() -> Result<Outcome> {
    let mut r = rng(4);
    let mut fails = 0;
    for _ in 0..100 {
        let n = r.random_range(1..=3);
        let k = r.random_range(1..=4);
        let d = random_distribution(n, &mut r)?;
        let f = random_positive_function(n, &mut r);
        let t = k_transform(&d, k)?;
        let lifted = entropy_functional(t.dist(), &lift_function(&f, k)?)?;
        fails += usize::from(!rel_close(lifted, entropy_functional(&d, &f)?, 1e-9));
    }
    outcome(fails == 0, format!("100 functions, {fails} outside 1e-9 relative"))
}

fn c05_hf() -> Result<Outcome> {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in [2, 3] {
        let dists = [
            enumerate_gibbs(&IsingModel::path(n, 0.6, (0..n).map(|v| [0.5, 2.0][v % 2]).collect())?)?,
            random_distribution(n, &mut r)?,
        ];
        for d in &dists {
            for k in [2, 3] {
                for theta in [0.3, 0.5] {
                    let ell = ceil_product(theta, n, k);
                    for _ in 0..20 {
                        let f = random_positive_function(n, &mut r);
                        let (a, b) = (hf_direct(d, k, ell, &f)?, hf_formula(d, k, ell, &f)?);
                        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
                        count += 1;
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-10, format!("{count} evaluations, max relative deviation {worst:.2e}"))
}

fn c06_lbf() -> Result<Outcome> {
    let mut r = rng(6);
    let dists = [
        enumerate_gibbs(&IsingModel::uniform(1, &[], 1.0, 2.0)?)?,
        enumerate_gibbs(&IsingModel::new(2, &[(0, 1)], 0.5, vec![2.0, 0.5])?)?,
    ];
    let mut fails = 0;
    let mut ratios = Vec::new();
    for d in &dists {
        for _ in 0..10 {
            let f = random_positive_function(d.n(), &mut r);
            let s = lbf_convergence(d, 0.5, &f, &[4, 32])?;
            let (g4, g32, rhs) = (s.points[0].gap.0, s.points[1].gap.0, s.mbf_rhs.0);
            // both gaps vanish identically at n = 1
            let halves = g32 <= 0.5 * g4 + 1e-12;
            let small = rhs <= 1e-6 || g32 < 0.05 * rhs;
            fails += usize::from(!(halves && small));
            if g4 > 1e-12 {
                ratios.push(g32 / g4);
            }
        }
    }
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    outcome(fails == 0, format!("20 functions, {fails} failures, max gap(32)/gap(4) = {worst:.3}"))
}

fn regime_models(max_n: usize, betas: &[f64], r: &mut ChaCha8Rng) -> Vec<(String, IsingModel)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for &beta in betas {
            let lambda: Vec<f64> = (0..n).map(|_| [0.25, 0.5, 1.0, 2.0, 4.0][r.random_range(0..5)]).collect();
            for (name, m) in families(n, beta, &lambda) {
                if in_delta_interior(beta, 0.5, m.regime_degree()).unwrap_or(false) {
                    out.push((format!("{name}/beta{beta}"), m));
                }
            }
        }
    }
    out
}

fn c07_mbf() -> Result<Outcome> {
    let mut r = rng(7);
    let theta = 0.5;
    let c = (std::f64::consts::E / theta).powf(2.0 / 0.5 + 3.0);
    let models = regime_models(5, &[0.75, 1.0, 1.3], &mut r);
    let mut fails = 0;
    let mut checked = 0;
    let mut tightest = 0.0f64;
    for (_, m) in &models {
        let d = enumerate_gibbs(m)?;
        for _ in 0..1000 {
            let f = random_positive_function(d.n(), &mut r);
            let (lhs, rhs) = (entropy_functional(&d, &f)?, c * mbf_rhs(&d, theta, &f)?);
            fails += usize::from(lhs > rhs + 1e-9 * rhs.abs() + 1e-12);
            if rhs > 0.0 {
                tightest = tightest.max(lhs / rhs);
            }
            checked += 1;
        }
    }
    outcome(
        fails == 0,
        format!("{} instances, {checked} functions, {fails} failures, max Ent/(C rhs) = {tightest:.3e}", models.len()),
    )
}

fn small_instances(r: &mut ChaCha8Rng) -> Result<Vec<DenseDistribution>> {
    Ok(vec![
        enumerate_gibbs(&IsingModel::path(3, 0.5, vec![2.0, 0.5, 1.0])?)?,
        enumerate_gibbs(&IsingModel::cycle(4, 1.5, vec![0.25, 4.0, 1.0, 2.0])?)?,
        enumerate_gibbs(&IsingModel::star(4, 0.7, vec![1.0, 0.5, 2.0, 3.0])?)?,
        enumerate_gibbs(&IsingModel::complete(4, 1.2, vec![0.5; 4])?)?,
        random_distribution(2, r)?,
        random_distribution(3, r)?,
        random_distribution(4, r)?,
    ])
}

fn c08_compare() -> Result<Outcome> {
    let mut r = rng(8);
    let dists = small_instances(&mut r)?;
    let mut fails = 0;
    let mut reports = 0;
    for i in 0..500 {
        let d = &dists[i % dists.len()];
        let theta = [0.2, 0.5, 0.8][i % 3];
        let f = random_positive_function(d.n(), &mut r);
        for v in 0..d.n() {
            let rep = compare_identity_check(d, theta, v, &f)?;
            fails += usize::from(!rep.pass);
            reports += 1;
        }
        for rep in tensorization_chain_check(d, theta, &f)? {
            fails += usize::from(!rep.pass);
            reports += 1;
        }
    }
    outcome(fails == 0, format!("500 functions, {reports} reports, {fails} failures"))
}

fn c09_dirichlet() -> Result<Outcome> {
    let mut r = rng(9);
    let dists = small_instances(&mut r)?;
    let mut worst = 0.0f64;
    for i in 0..500 {
        let d = &dists[i % dists.len()];
        let f = random_positive_function(d.n(), &mut r);
        let a = dirichlet_form(d, &f)?;
        for b in [dirichlet_inner(d, &f)?, dirichlet_mat(d, &f)?] {
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
        }
    }
    outcome(worst <= 1e-10, format!("500 functions, max relative deviation {worst:.2e}"))
}

fn random_simplex(len: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| r.random_range(0.01..1.0f64).powi(3)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn c10_walks() -> Result<Outcome> {
    let mut r = rng(10);
    let mut levels = Vec::new();
    for n in 1..=6 {
        let p: Vec<f64> = (0..n).map(|_| r.random_range(0.1..0.9)).collect();
        levels.push(build_levels(homogenize(&DenseDistribution::product(&p)?)?.dist())?);
        for k in 1..=3.min(n) {
            levels.push(build_levels(&uniform_set_system(n, k)?)?);
        }
    }
    let mut fails = 0;
    let mut reports = 0;
    for l in &levels {
        let top = l.top();
        let faces = l.faces(top).len();
        for _ in 0..100 {
            let nu = random_simplex(faces, &mut r);
            let f: Vec<f64> = (0..faces).map(|_| r.random_range(-2.0..2.0f64).exp()).collect();
            for j in 0..top {
                let a = entropy_decay_check(l, &nu, j, 1.0)?;
                let b = local_decay_check(l, &f, j, kappa(j, top, 1.0)?)?;
                fails += usize::from(!a.pass) + usize::from(!b.pass);
                reports += 2;
            }
        }
    }
    let mut ident_fail = 0;
    let mut idents = 0;
    let dists = small_instances(&mut r)?;
    for d in &dists {
        for _ in 0..10 {
            let f = random_positive_function(d.n(), &mut r);
            for j in 0..=d.n() {
                ident_fail += usize::from(!ubf_ed_identity_check(d, &f, j)?.pass);
                idents += 1;
            }
        }
    }
    outcome(
        fails == 0 && ident_fail == 0,
        format!(
            "{} complexes, {reports} decay reports ({fails} failures), {idents} identities ({ident_fail} failures)",
            levels.len()
        ),
    )
}

fn c11_hypergeometric() -> Result<Outcome> {
    let mut pmf_worst = 0.0f64;
    let mut specs = 0;
    for n in 1..=4 {
        for k in 1..=8 {
            for ell in 0..=n * k {
                let s = HyperGeoSpec::new(n, k, ell)?;
                if s.support_size() > 100_000 {
                    continue;
                }
                let total = pairwise_sum(&s.support().iter().map(|a| s.pmf(a)).collect::<Vec<_>>());
                pmf_worst = pmf_worst.max((total - 1.0).abs());
                specs += 1;
            }
        }
    }
    let s = HyperGeoSpec::new(2, 2, 2)?;
    let mut counts = [0usize; 3];
    let mut r = rng(11);
    let draws = 1_000_000;
    for _ in 0..draws {
        counts[s.sample(&mut r)[0]] += 1;
    }
    let mut z_worst = 0.0f64;
    for (x, &c) in counts.iter().enumerate() {
        let p = s.pmf(&[x, 2 - x]);
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        z_worst = z_worst.max((c as f64 - draws as f64 * p).abs() / sigma);
    }
    let mut tail_fail = 0;
    let mut tails = 0;
    for k in 1..=50 {
        for n in [2, 3] {
            for theta in [0.3, 0.5] {
                let spec = HyperGeoSpec::new(n, k, ceil_product(theta, n, k))?;
                for e in 1..=10 {
                    tail_fail += usize::from(!hypergeo_concentration_check(&spec, e as f64 * 0.05)?.pass);
                    tails += 1;
                }
            }
        }
    }
    outcome(
        pmf_worst <= 1e-10 && z_worst <= 3.0 && tail_fail == 0,
        format!(
            "{specs} specs (max |sum-1| {pmf_worst:.2e}), sampler max |z| {z_worst:.2}, {tails} tails ({tail_fail} failures)"
        ),
    )
}

fn c12_verification() -> Result<Outcome> {
    let mut fails = 0;
    let mut count = 0;
    let mut worst_a = 0.0f64;
    let mixed = [0.5, 2.0, 0.2, 5.0, 0.25];
    for n in 3..=5 {
        for beta in [0.7, 1.0, 1.4] {
            for (_, m) in families(n, beta, &mixed[..n]) {
                if m.max_degree() > 3 {
                    continue;
                }
                let reps = verification_bounds_check(&m, 0.5)?;
                fails += usize::from(reps.len() != 3 || reps.iter().any(|r| !r.pass));
                worst_a = worst_a.max(reps.get(1).map_or(0.0, |r| r.lhs));
                count += 1;
            }
        }
    }
    outcome(fails == 0, format!("{count} instances, {fails} failures, worst pinned max(|A|_1,|A|_inf) = {worst_a:.3e}"))
}

fn c13_dobrushin() -> Result<Outcome> {
    let mut r = rng(13);
    let mut eligible = Vec::new();
    for (i, beta) in [0.6, 0.8, 1.0, 1.25, 1.6].iter().enumerate() {
        let lambda: Vec<f64> = (0..4).map(|v| [0.5, 2.0, 1.0, 3.0][(v + i) % 4]).collect();
        for (_, m) in families(4, *beta, &lambda).into_iter().chain(families(3, *beta, &lambda[..3])) {
            let d = enumerate_gibbs(&m)?;
            if dobrushin_bound(&d)?.1 {
                eligible.push(d);
            }
        }
    }
    eligible.push(DenseDistribution::product(&[0.3, 0.6, 0.5, 0.8])?);
    let mut fails = 0;
    for i in 0..1000 {
        let d = &eligible[i % eligible.len()];
        let f = random_positive_function(d.n(), &mut r);
        fails += dobrushin_mls_check(d, &[f])?.iter().filter(|x| !x.pass).count();
    }
    outcome(fails == 0, format!("{} instances, 1000 functions, {fails} failures", eligible.len()))
}

fn c14_scaling() -> Result<Outcome> {
    let mut ratios = Vec::new();
    let mut series = Vec::new();
    for n in 4..=12 {
        let m = IsingModel::cycle(n, 0.6, vec![1.0; n])?;
        let t = mixing_time_exact(&enumerate_gibbs(&m)?, 0.25)?;
        let nf = n as f64;
        ratios.push(t as f64 / (nf * nf.ln()));
        series.push(format!("{n}:{t}"));
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    outcome(hi / lo <= 2.0, format!("T_mix {}, ratio spread {:.3}", series.join(" "), hi / lo))
}

fn c15_determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let model = dir.path().join("model.json");
    std::fs::write(&model, r#"{"n":4,"edges":[[0,1],[1,2],[2,3],[3,0]],"beta":0.6,"lambda":[0.5,2.0,0.5,2.0]}"#)?;
    let mut differing = Vec::new();
    let suites: Vec<Suite> = Suite::MEMBERS.iter().copied().chain([Suite::All]).collect();
    for s in &suites {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("run{run}"));
            let cfg = RunConfig { out: Some(out.clone()), ..RunConfig::new(*s, &model, 7) };
            run_suite(&cfg)?;
            bytes.push(std::fs::read(out.join(format!("{s}.json")))?);
        }
        if bytes[0] != bytes[1] {
            differing.push(s.name());
        }
    }
    outcome(differing.is_empty(), format!("{} suites rerun, differing: {:?}", suites.len(), differing))
}

fn main() {
    let criteria: [Criterion; 15] = [
        ("influence matrices match brute force", c01_influence),
        ("k-transformation influence bounds", c02_ktransform),
        ("homogenization spectrum identity", c03_homog_spectrum),
        ("entropy preserved by the k-lift", c04_entropy_lift),
        ("H_f direct equals formula", c05_hf),
        ("H_f converges to the magnetized rhs", c06_lbf),
        ("magnetized block factorization", c07_mbf),
        ("comparison identities under magnetization", c08_compare),
        ("Dirichlet form decompositions agree", c09_dirichlet),
        ("down-walk entropy contraction", c10_walks),
        ("multivariate hypergeometric", c11_hypergeometric),
        ("verification bounds for the biased model", c12_verification),
        ("Dobrushin MLS per-function inequality", c13_dobrushin),
        ("mixing time scales like n log n", c14_scaling),
        ("suite reports are deterministic", c15_determinism),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {:2} {} {title}: {detail} [{:.2?}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
