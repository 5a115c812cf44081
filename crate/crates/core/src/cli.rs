//! Named check suites over a model file, seeded runs, and JSON/CSV emission.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GlabError, Result};
use crate::exact::{
    entropy_functional, enumerate_gibbs, random_fields, random_positive_function, DenseDistribution, FunctionTable,
};
use crate::factorization::{
    ceil_product, hf_direct, hf_formula, mbf_check, ubf_check, ubf_constant, ubf_constant_bound_check,
};
use crate::glauber::{
    compare_identity_check, dobrushin_mls_check, mixing_time_of, mls_estimate, mls_mixing_bound,
    tensorization_chain_check, theorem_shapes, transition_matrix, verification_bounds_check, MixingReport, MlsConfig,
};
use crate::model::IsingModel;
use crate::numeric::{fingerprint, set_exact_limit};
use crate::report::{fmt_f64, CheckReport, Sig17};
use crate::spectral::homog_spectrum_check;
use crate::transform::{k_transform, ktrans_influence_check, ktrans_rowsum_check, lift_function};
use crate::walks::ubf_ed_identity_check;

pub const VERSION: &str = concat!("glab ", env!("CARGO_PKG_VERSION"));

/// Largest transformed ground set the k-transformation suites enumerate.
const MAX_TRANSFORMED: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Influence,
    Ktransform,
    Ubf,
    Mbf,
    Hf,
    Walks,
    Compare,
    Dobrushin,
    Verification,
    Mixing,
    All,
}

impl Suite {
    pub const MEMBERS: [Suite; 10] = [
        Suite::Influence,
        Suite::Ktransform,
        Suite::Ubf,
        Suite::Mbf,
        Suite::Hf,
        Suite::Walks,
        Suite::Compare,
        Suite::Dobrushin,
        Suite::Verification,
        Suite::Mixing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Influence => "influence",
            Suite::Ktransform => "ktransform",
            Suite::Ubf => "ubf",
            Suite::Mbf => "mbf",
            Suite::Hf => "hf",
            Suite::Walks => "walks",
            Suite::Compare => "compare",
            Suite::Dobrushin => "dobrushin",
            Suite::Verification => "verification",
            Suite::Mixing => "mixing",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = GlabError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::MEMBERS
            .iter()
            .chain([Suite::All].iter())
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| GlabError::Usage(format!("unknown suite '{s}'")))
    }
}

fn default_command() -> String {
    "run".into()
}
fn default_theta() -> f64 {
    0.5
}
fn default_delta() -> f64 {
    0.5
}
fn default_epsilon() -> f64 {
    0.25
}
fn default_batch() -> usize {
    8
}

/// One run of a suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_command")]
    pub command: String,
    pub suite: Suite,
    pub model: PathBuf,
    pub seed: u64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub capacity: Option<usize>,
}

impl RunConfig {
    pub fn new(suite: Suite, model: impl Into<PathBuf>, seed: u64) -> Self {
        Self {
            command: default_command(),
            suite,
            model: model.into(),
            seed,
            theta: default_theta(),
            delta: default_delta(),
            epsilon: default_epsilon(),
            batch: default_batch(),
            out: None,
            capacity: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn params(&self) -> SuiteParams {
        SuiteParams { seed: self.seed, theta: self.theta, delta: self.delta, epsilon: self.epsilon, batch: self.batch }
    }
}

/// The numeric knobs of a suite run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuiteParams {
    pub seed: u64,
    pub theta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub batch: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self { seed: 0, theta: 0.5, delta: 0.5, epsilon: 0.25, batch: 8 }
    }
}

/// Reports of one suite. Wall time is kept out of this record so that
/// reruns serialize byte-identically.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub version: &'static str,
    pub seed: u64,
    pub model: String,
    pub pass: bool,
    pub reports: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingReport>,
}

impl SuiteResult {
    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.reports.iter().filter(|r| r.failed())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Seed for the `counter`-th stream labeled `label`.
pub fn derive_seed(seed: u64, label: &str, counter: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes().chain(counter.to_le_bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    // splitmix64 finalizer
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, label: &str, counter: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label, counter))
}

/// Reads and validates a model file.
pub fn parse_model(path: &Path) -> Result<IsingModel> {
    let text = fs::read_to_string(path)?;
    IsingModel::from_json_str(&text).map_err(|e| match e {
        GlabError::Json(j) => GlabError::InvalidModel(format!("{}:{}:{}: {}", path.display(), j.line(), j.column(), j)),
        GlabError::InvalidModel(m) => GlabError::InvalidModel(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn model_tag(model: &IsingModel) -> String {
    let mut v = vec![model.n() as f64, model.beta()];
    v.extend(model.lambda());
    v.extend(model.edges().iter().flat_map(|&(a, b)| [a as f64, b as f64]));
    format!("{:016x}", fingerprint(&v))
}

fn functions(n: usize, count: usize, seed: u64, label: &str) -> Vec<FunctionTable> {
    let mut rng = rng_for(seed, label, 0);
    (0..count).map(|_| random_positive_function(n, &mut rng)).collect()
}

fn eta_hat(delta: f64) -> f64 {
    2.0 / delta
}

fn influence_suite(dist: &DenseDistribution, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let mut rng = rng_for(p.seed, "influence", 0);
    (0..p.batch)
        .map(|i| {
            let phi = random_fields(dist.n(), &mut rng);
            Ok(homog_spectrum_check(dist, &phi)?.to_check(&format!("fields{i}")))
        })
        .collect()
}

fn ktransform_suite(dist: &DenseDistribution, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let n = dist.n();
    let mut out = Vec::new();
    let mut rng = rng_for(p.seed, "ktransform", 0);
    for k in (2..=3).filter(|k| n * k <= MAX_TRANSFORMED) {
        let t = k_transform(dist, k)?;
        for _ in 0..p.batch {
            let phi = random_fields(n * k, &mut rng);
            out.extend(ktrans_influence_check(dist, k, &phi)?.reports());
            out.push(ktrans_rowsum_check(dist, k, &phi)?);
        }
        for (i, f) in functions(n, p.batch, p.seed, &format!("ktransform-k{k}")).iter().enumerate() {
            let lifted = entropy_functional(t.dist(), &lift_function(f, k)?)?;
            out.push(CheckReport::identity(
                "ktrans_entropy",
                format!("k={k},f={i}"),
                lifted,
                entropy_functional(dist, f)?,
                1e-9,
                1e-12,
            ));
        }
    }
    Ok(out)
}

fn ubf_suite(dist: &DenseDistribution, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let n = dist.n();
    let eta = eta_hat(p.delta);
    let ell = ceil_product(p.theta, n, 1).max(1);
    let mut out = match ubf_constant(n, ell, eta) {
        Ok(c) => ubf_check(dist, ell, c, &functions(n, p.batch, p.seed, "ubf"))?,
        Err(GlabError::Domain(why)) => vec![CheckReport::not_applicable("ubf", format!("n={n},ell={ell}"), why)],
        Err(e) => return Err(e),
    };
    out.extend(ubf_constant_bound_check(n, p.theta, eta)?);
    Ok(out)
}

fn mbf_suite(dist: &DenseDistribution, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let c = (std::f64::consts::E / p.theta).powf(eta_hat(p.delta) + 3.0);
    mbf_check(dist, p.theta, c, &functions(dist.n(), p.batch, p.seed, "mbf"))
}

fn hf_suite(dist: &DenseDistribution, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let n = dist.n();
    let mut out = Vec::new();
    for k in (2..=3).filter(|k| n * k <= MAX_TRANSFORMED) {
        let ell = ceil_product(p.theta, n, k);
        for (i, f) in functions(n, p.batch, p.seed, &format!("hf-k{k}")).iter().enumerate() {
            out.push(CheckReport::identity(
                "hf_direct_formula",
                format!("k={k},ell={ell},f={i}"),
                hf_direct(dist, k, ell, f)?,
                hf_formula(dist, k, ell, f)?,
                1e-10,
                1e-14,
            ));
        }
    }
    Ok(out)
}

fn walks_suite(dist: &DenseDistribution, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let n = dist.n();
    let mut out = Vec::new();
    for f in functions(n, p.batch, p.seed, "walks") {
        for j in 1..=n {
            out.push(ubf_ed_identity_check(dist, &f, j)?);
        }
    }
    Ok(out)
}

fn compare_suite(dist: &DenseDistribution, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for f in functions(dist.n(), p.batch, p.seed, "compare") {
        for v in 0..dist.n() {
            out.push(compare_identity_check(dist, p.theta, v, &f)?);
        }
        out.extend(tensorization_chain_check(dist, p.theta, &f)?);
    }
    Ok(out)
}

fn dobrushin_suite(dist: &DenseDistribution, p: &SuiteParams) -> Result<Vec<CheckReport>> {
    dobrushin_mls_check(dist, &functions(dist.n(), p.batch, p.seed, "dobrushin"))
}

/// Exact mixing time next to the optimistic MLS bound for `model`.
pub fn mixing_report(
    model: &IsingModel,
    dist: &DenseDistribution,
    p: &SuiteParams,
) -> Result<(MixingReport, CheckReport)> {
    let tm = transition_matrix(dist)?;
    let t_mix = mixing_time_of(&tm, p.epsilon)?;
    let cfg = MlsConfig { seed: derive_seed(p.seed, "mixing", 0), ..MlsConfig::default() };
    let (rho, method) = match mls_estimate(dist, &cfg) {
        Ok(est) => (est.value(), format!("{} ({}, {} restarts)", est.bound_kind, est.method, est.restarts)),
        Err(GlabError::UndefinedRatio) => (f64::NAN, "undefined: single-point support".to_string()),
        Err(e) => return Err(e),
    };
    let mu_min = dist.mu_min();
    let bound = mls_mixing_bound(rho, mu_min, p.epsilon).unwrap_or(f64::NAN);
    let shapes = (p.delta > 0.0 && p.epsilon > 0.0).then(|| theorem_shapes(model, p.delta, p.epsilon));
    let report = MixingReport {
        epsilon: Sig17(p.epsilon),
        t_mix_exact: t_mix,
        rho_hat: Sig17(rho),
        rho_hat_method: method,
        mls_bound_optimistic: Sig17(bound),
        mu_min: Sig17(mu_min),
        theorem_shapes: shapes,
    };
    let balance = CheckReport::inequality_with_slack(
        "detailed_balance",
        format!("n={}", dist.n()),
        tm.detailed_balance_error(),
        0.0,
        0.0,
        1e-12,
    );
    Ok((report, balance))
}

/// Runs `suite` on `model` without touching the file system.
pub fn run_suite_on(model: &IsingModel, suite: Suite, p: &SuiteParams) -> Result<SuiteResult> {
    let dist = enumerate_gibbs(model)?;
    let members: Vec<Suite> = if suite == Suite::All { Suite::MEMBERS.to_vec() } else { vec![suite] };
    let mut reports = Vec::new();
    let mut mixing = None;
    for m in members {
        match m {
            Suite::Influence => reports.extend(influence_suite(&dist, p)?),
            Suite::Ktransform => reports.extend(ktransform_suite(&dist, p)?),
            Suite::Ubf => reports.extend(ubf_suite(&dist, p)?),
            Suite::Mbf => reports.extend(mbf_suite(&dist, p)?),
            Suite::Hf => reports.extend(hf_suite(&dist, p)?),
            Suite::Walks => reports.extend(walks_suite(&dist, p)?),
            Suite::Compare => reports.extend(compare_suite(&dist, p)?),
            Suite::Dobrushin => reports.extend(dobrushin_suite(&dist, p)?),
            Suite::Verification => reports.extend(verification_bounds_check(model, p.delta)?),
            Suite::Mixing => {
                let (rep, check) = mixing_report(model, &dist, p)?;
                reports.push(check);
                mixing = Some(rep);
            }
            Suite::All => unreachable!("expanded above"),
        }
    }
    Ok(SuiteResult {
        suite: suite.name().to_string(),
        version: VERSION,
        seed: p.seed,
        model: model_tag(model),
        pass: reports.iter().all(|r| r.pass),
        reports,
        mixing,
    })
}

#[derive(Debug, Serialize)]
struct RunMeta {
    suite: String,
    version: &'static str,
    wall_time_seconds: f64,
}

/// Parses the model, runs the suite and, if an output directory is set,
/// writes `<suite>.json` and `<suite>.meta.json` there.
pub fn run_suite(config: &RunConfig) -> Result<SuiteResult> {
    if let Some(c) = config.capacity {
        set_exact_limit(Some(c));
    }
    let model = parse_model(&config.model)?;
    let start = Instant::now();
    let result = run_suite_on(&model, config.suite, &config.params())?;
    let wall = start.elapsed().as_secs_f64();
    if let Some(dir) = &config.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{}.json", result.suite)), result.to_json()?)?;
        let meta = RunMeta { suite: result.suite.clone(), version: VERSION, wall_time_seconds: wall };
        fs::write(dir.join(format!("{}.meta.json", result.suite)), serde_json::to_string_pretty(&meta)? + "\n")?;
    }
    Ok(result)
}

/// Writes `<dir>/<name>.csv` with a header row and one line per row.
pub fn emit_series(dir: &Path, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
    if let Some(r) = rows.iter().find(|r| r.len() != header.len()) {
        return Err(GlabError::LengthMismatch { expected: header.len(), got: r.len() });
    }
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.csv"));
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        writeln!(w, "{}", r.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","))?;
    }
    w.flush()?;
    Ok(path)
}
