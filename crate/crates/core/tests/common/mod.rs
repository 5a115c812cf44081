//! Brute-force oracles and instance families shared by the integration tests.
#![allow(dead_code)]

use glab::IsingModel;
use nalgebra::DMatrix;

/// Gibbs weight computed straight from the edge list.
pub fn weight(model: &IsingModel, c: usize) -> f64 {
    let mut w = 1.0;
    for &(u, v) in model.edges() {
        if (c >> u & 1) == (c >> v & 1) {
            w *= model.beta();
        }
    }
    for (v, l) in model.lambda().iter().enumerate() {
        if c >> v & 1 == 1 {
            w *= l;
        }
    }
    w
}

pub fn weights(model: &IsingModel) -> Vec<f64> {
    (0..1usize << model.n()).map(|c| weight(model, c)).collect()
}

fn mass(w: &[f64], pred: impl Fn(usize) -> bool) -> f64 {
    w.iter().enumerate().filter(|(c, _)| pred(*c)).map(|(_, x)| x).sum()
}

/// `Pr[v = + | u = s]` by summation.
fn cond_plus(w: &[f64], v: usize, u: usize, s: usize) -> f64 {
    let den = mass(w, |c| c >> u & 1 == s);
    mass(w, |c| c >> u & 1 == s && c >> v & 1 == 1) / den
}

pub fn influence_oracle(model: &IsingModel) -> DMatrix<f64> {
    let w = weights(model);
    let n = model.n();
    DMatrix::from_fn(n, n, |u, v| if u == v { 0.0 } else { cond_plus(&w, v, u, 1) - cond_plus(&w, v, u, 0) })
}

pub fn correlation_oracle(model: &IsingModel) -> DMatrix<f64> {
    let w = weights(model);
    let n = model.n();
    let z: f64 = w.iter().sum();
    let marg = |v: usize| mass(&w, |c| c >> v & 1 == 1) / z;
    DMatrix::from_fn(n, n, |i, k| if i == k { 1.0 - marg(i) } else { cond_plus(&w, k, i, 1) - marg(k) })
}

/// Dobrushin matrix from the closed-form heat-bath probability at `v`.
pub fn dobrushin_oracle(model: &IsingModel) -> DMatrix<f64> {
    let n = model.n();
    let (b, lam) = (model.beta(), model.lambda());
    let heat = |v: usize, c: usize| {
        let nb: Vec<usize> = model
            .edges()
            .iter()
            .filter_map(|&(x, y)| {
                if x == v {
                    Some(y)
                } else if y == v {
                    Some(x)
                } else {
                    None
                }
            })
            .collect();
        let plus = nb.iter().filter(|&&x| c >> x & 1 == 1).count() as i32;
        let minus = nb.len() as i32 - plus;
        let a = lam[v] * b.powi(plus);
        a / (a + b.powi(minus))
    };
    DMatrix::from_fn(n, n, |u, v| {
        if u == v {
            return 0.0;
        }
        (0..1usize << n)
            .filter(|c| c >> u & 1 == 0 && c >> v & 1 == 0)
            .map(|c| (heat(v, c | 1 << u) - heat(v, c)).abs())
            .fold(0.0, f64::max)
    })
}

/// Path, cycle, star and complete graphs on `n` vertices with the given fields.
pub fn families(n: usize, beta: f64, lambda: &[f64]) -> Vec<(String, IsingModel)> {
    let mut out = Vec::new();
    let l = lambda.to_vec();
    if n >= 2 {
        out.push((format!("path{n}"), IsingModel::path(n, beta, l.clone()).unwrap()));
    }
    if n >= 3 {
        out.push((format!("cycle{n}"), IsingModel::cycle(n, beta, l.clone()).unwrap()));
        out.push((format!("star{n}"), IsingModel::star(n, beta, l.clone()).unwrap()));
    }
    if n == 4 {
        out.push(("K4".into(), IsingModel::complete(4, beta, l).unwrap()));
    }
    out
}

/// All vectors of length `n` over `choices`.
pub fn grid(n: usize, choices: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                choices.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-15
}
