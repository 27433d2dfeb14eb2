//! Batch experiments: configuration, instance generators and reports.
//!
//! A run is fully determined by its [`ExperimentConfig`]. Trial `t` draws
//! from `ChaCha8Rng::seed_from_u64(seed)` switched to stream `t`, trials run
//! in parallel and rows are emitted in trial order, so the rendered report
//! is byte-identical across runs.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::certify::{
    certify_ap_distinguisher, certify_correlation, certify_holder_truncation, certify_inverse_gowers, certify_main,
    certify_roth, BoundCertificate,
};
use crate::correlation::NoiseSetting;
use crate::error::{Error, Result};
use crate::extract::{extract_family, extract_witness, verify_family, verify_witness};
use crate::fourier::{
    inverse_transform, lp_norm, measures_of, standard_fourier_basis, transform, BasisChoice, DenseFunction,
    FourierRepresentation, MultiIndex, DROP_TOLERANCE,
};
use crate::gowers::{
    check_gowers_inequality, gowers_direct, gowers_norm, gowers_recursive, gowers_via_cube_nip, u2_closed_form,
    ENUMERATION_CAP,
};
use crate::spaces::{
    ap_distribution, gowers_cube_distribution, xor_subset_distribution, xor_triple_distribution, JointDistribution,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    CertifyMain,
    CertifyCorrelation,
    CertifyRoth,
    CertifyHolder,
    Gowers,
    GowersInequality,
    InverseGowers,
    ApDistinguish,
    Extract,
    DemoXorNoninvariance,
    DemoQuadraticPhase,
    DemoAllzeros,
}

const EXPERIMENTS: [(Experiment, &str); 12] = [
    (Experiment::CertifyMain, "certify-main"),
    (Experiment::CertifyCorrelation, "certify-correlation"),
    (Experiment::CertifyRoth, "certify-roth"),
    (Experiment::CertifyHolder, "certify-holder"),
    (Experiment::Gowers, "gowers"),
    (Experiment::GowersInequality, "gowers-inequality"),
    (Experiment::InverseGowers, "inverse-gowers"),
    (Experiment::ApDistinguish, "ap-distinguish"),
    (Experiment::Extract, "extract"),
    (Experiment::DemoXorNoninvariance, "demo-xor-noninvariance"),
    (Experiment::DemoQuadraticPhase, "demo-quadratic-phase"),
    (Experiment::DemoAllzeros, "demo-allzeros"),
];

impl Experiment {
    pub fn name(self) -> &'static str {
        EXPERIMENTS.iter().find(|(e, _)| *e == self).map(|(_, s)| *s).unwrap()
    }

    pub fn all() -> impl Iterator<Item = Experiment> {
        EXPERIMENTS.iter().map(|(e, _)| *e)
    }

    fn is_demo(self) -> bool {
        matches!(self, Experiment::DemoXorNoninvariance | Experiment::DemoQuadraticPhase | Experiment::DemoAllzeros)
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EXPERIMENTS
            .iter()
            .find(|(_, name)| *name == s)
            .map(|(e, _)| *e)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s:?}")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which joint law random instances are drawn over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LawChoice {
    /// Cycle through sign triples, progressions and cubes by trial id.
    Mixed,
    Xor,
    Ap,
    Cube,
    File(PathBuf),
}

impl fmt::Display for LawChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawChoice::Mixed => f.write_str("mixed"),
            LawChoice::Xor => f.write_str("xor"),
            LawChoice::Ap => f.write_str("ap"),
            LawChoice::Cube => f.write_str("cube"),
            LawChoice::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Alphabet size or prime modulus.
    pub p: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// Extraction threshold; derived per instance when absent.
    pub delta: Option<f64>,
    pub epsilon: f64,
    pub tolerance: f64,
    pub trials: usize,
    pub seed: u64,
    pub distribution: LawChoice,
    pub basis: BasisChoice,
    /// Declared independence order for family extraction.
    pub r: Option<usize>,
    /// Level used by demo-xor-noninvariance.
    pub threshold: f64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        let (n, d) = match experiment {
            Experiment::DemoXorNoninvariance | Experiment::DemoAllzeros => (4, 2),
            Experiment::DemoQuadraticPhase => (8, 2),
            Experiment::Gowers | Experiment::GowersInequality => (2, 2),
            _ => (3, 2),
        };
        Self {
            experiment,
            p: 3,
            n,
            k: 3,
            d,
            delta: None,
            epsilon: if experiment == Experiment::DemoQuadraticPhase { 0.5 } else { 0.1 },
            tolerance: 1e-9,
            trials: if experiment.is_demo() { 1 } else { 20 },
            seed: 0,
            distribution: LawChoice::Mixed,
            basis: BasisChoice::Auto,
            r: None,
            threshold: 0.5,
            output: None,
        }
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut experiment = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: idx + 1, message: format!("expected key=value, got {line:?}") })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "experiment" {
                experiment = Some(value.parse().map_err(|e: Error| Error::Parse { line: idx + 1, message: e.to_string() })?);
            } else {
                pairs.push((idx + 1, key.to_string(), value.to_string()));
            }
        }
        let experiment =
            experiment.ok_or_else(|| Error::Parse { line: 0, message: "missing experiment".into() })?;
        let mut config = Self::new(experiment);
        for (line, key, value) in pairs {
            config.set(&key, &value).map_err(|e| Error::Parse { line, message: e.to_string() })?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
        }
        match key {
            "experiment" => self.experiment = value.parse()?,
            "p" | "q" => self.p = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "d" => self.d = num(key, value)?,
            "delta" => self.delta = Some(num(key, value)?),
            "epsilon" => self.epsilon = num(key, value)?,
            "tolerance" | "tol" => self.tolerance = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "r" => self.r = Some(num(key, value)?),
            "threshold" => self.threshold = num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "distribution" => {
                self.distribution = match value {
                    "mixed" => LawChoice::Mixed,
                    "xor" => LawChoice::Xor,
                    "ap" => LawChoice::Ap,
                    "cube" => LawChoice::Cube,
                    _ => return Err(Error::InvalidArgument(format!("unknown distribution {value:?}"))),
                }
            }
            "distribution_file" => self.distribution = LawChoice::File(PathBuf::from(value)),
            "basis" => {
                self.basis = match value {
                    "auto" => BasisChoice::Auto,
                    "real" => BasisChoice::Real,
                    _ => return Err(Error::InvalidArgument(format!("unknown basis {value:?}"))),
                }
            }
            _ => return Err(Error::InvalidArgument(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if self.p < 2 {
            return Err(Error::InvalidArgument("p must be at least 2".into()));
        }
        if self.k < 2 {
            return Err(Error::InvalidArgument("k must be at least 2".into()));
        }
        if let Some(delta) = self.delta {
            if !(delta > 0.0) {
                return Err(Error::InvalidArgument("delta must be positive".into()));
            }
        }
        Ok(())
    }

    fn echo(&self) -> Vec<(&'static str, String)> {
        let basis = match self.basis {
            BasisChoice::Auto => "auto",
            BasisChoice::Real => "real",
        };
        vec![
            ("experiment", self.experiment.to_string()),
            ("p", self.p.to_string()),
            ("n", self.n.to_string()),
            ("k", self.k.to_string()),
            ("d", self.d.to_string()),
            ("delta", self.delta.map_or("auto".into(), |v| format!("{v:e}"))),
            ("epsilon", format!("{:e}", self.epsilon)),
            ("tolerance", format!("{:e}", self.tolerance)),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("distribution", self.distribution.to_string()),
            ("basis", basis.into()),
            ("r", self.r.map_or("-".into(), |r| r.to_string())),
            ("threshold", format!("{:e}", self.threshold)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
    /// Free-form detail lines (witnesses, norms, errors).
    pub notes: Vec<String>,
}

impl TrialRecord {
    fn from_certificate(trial_id: usize, cert: &BoundCertificate) -> Self {
        Self { trial_id, lhs: cert.lhs, rhs: cert.rhs, holds: cert.holds, slack: cert.slack, notes: vec![cert.to_string()] }
    }

    fn failed(trial_id: usize, err: &Error) -> Self {
        Self { trial_id, lhs: f64::NAN, rhs: f64::NAN, holds: false, slack: f64::NAN, notes: vec![format!("error: {err}")] }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<String>,
    /// Not rendered, so reports stay reproducible.
    pub elapsed: Duration,
}

impl Report {
    pub fn pass_count(&self) -> usize {
        self.records.iter().filter(|r| r.holds).count()
    }

    pub fn fail_count(&self) -> usize {
        self.records.len() - self.pass_count()
    }

    pub fn all_hold(&self) -> bool {
        self.fail_count() == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.config.echo() {
            let _ = writeln!(out, "# {key}: {value}");
        }
        for line in &self.summary {
            let _ = writeln!(out, "# {line}");
        }
        for r in &self.records {
            for note in &r.notes {
                let _ = writeln!(out, "# trial {}: {note}", r.trial_id);
            }
        }
        out.push_str("trial_id,lhs,rhs,holds,slack\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{:.12e},{:.12e},{},{:.12e}", r.trial_id, r.lhs, r.rhs, r.holds, r.slack);
        }
        let _ = writeln!(out, "# pass: {}", self.pass_count());
        let _ = writeln!(out, "# fail: {}", self.fail_count());
        out
    }
}

/// Per-trial generator: master seed, stream = trial id.
pub fn trial_rng(seed: u64, trial_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_id as u64);
    rng
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// All multi-indices over `sizes` of weight at most `d`, in lexicographic order.
pub fn low_weight_indices(sizes: &[usize], d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut digits = vec![0usize; sizes.len()];
    fn rec(a: usize, weight: usize, d: usize, sizes: &[usize], digits: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if a == sizes.len() {
            out.push(MultiIndex(digits.clone()));
            return;
        }
        for v in 0..sizes[a] {
            let w = weight + usize::from(v > 0);
            if w > d {
                break;
            }
            digits[a] = v;
            rec(a + 1, w, d, sizes, digits, out);
        }
        digits[a] = 0;
    }
    rec(0, 0, d, sizes, &mut digits, &mut out);
    out
}

/// Random expansion with standard complex Gaussian coefficients on every
/// multi-index of weight at most `d`.
pub fn random_low_degree(sizes: &[usize], d: usize, rng: &mut impl Rng, unit_norm: bool) -> FourierRepresentation {
    let mut rep = FourierRepresentation::zero(sizes.to_vec());
    for sigma in low_weight_indices(sizes, d) {
        rep.set(sigma, gaussian(rng));
    }
    let norm = rep.l2_norm();
    if unit_norm && norm > 0.0 {
        rep = rep.scale(Complex64::new(1.0 / norm, 0.0));
    }
    rep
}

/// Random function on `[q]^n` of degree at most `d`, deterministic in `seed`.
pub fn generate_random_lowdeg(q: usize, n: usize, d: usize, seed: u64, unit_norm: bool) -> FourierRepresentation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_low_degree(&vec![q; n], d.min(n), &mut rng, unit_norm)
}

fn random_bounded(sizes: &[usize], rng: &mut impl Rng) -> DenseFunction {
    DenseFunction::from_fn(sizes.to_vec(), |_| {
        let r: f64 = rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
    })
}

fn law_for(config: &ExperimentConfig, trial_id: usize) -> Result<JointDistribution> {
    let cube = |k: usize| {
        if !k.is_power_of_two() || k < 2 {
            return Err(Error::InvalidArgument(format!("cube law needs k a power of two, got {k}")));
        }
        gowers_cube_distribution(2, k.trailing_zeros() as usize)
    };
    match &config.distribution {
        LawChoice::Xor => Ok(xor_triple_distribution()),
        LawChoice::Ap => ap_distribution(config.p, config.k),
        LawChoice::Cube => cube(config.k),
        LawChoice::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
            JointDistribution::from_text(&text)
        }
        LawChoice::Mixed => match trial_id % 3 {
            0 => Ok(xor_triple_distribution()),
            1 => ap_distribution(config.p, config.k.min(config.p).max(3)),
            _ => gowers_cube_distribution(2, 2),
        },
    }
}

fn random_family(setting: &NoiseSetting, n: usize, d: usize, rng: &mut impl Rng) -> Vec<FourierRepresentation> {
    (0..setting.k())
        .map(|i| {
            let di = rng.gen_range(0..=d.min(n));
            random_low_degree(&setting.rep_sizes(i, n), di, rng, true)
        })
        .collect()
}

/// A column pattern with all digits nonzero and nonzero joint moment.
fn correlated_pattern(setting: &NoiseSetting) -> Option<Vec<usize>> {
    let sizes = setting.moments().sizes().to_vec();
    let mut idx = vec![1usize; sizes.len()];
    if sizes.iter().any(|&s| s < 2) {
        return None;
    }
    loop {
        if setting.moments().get(&idx).norm() > 1e-9 {
            return Some(idx);
        }
        let mut a = sizes.len();
        loop {
            if a == 0 {
                return None;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < sizes[a] {
                break;
            }
            idx[a] = 1;
        }
    }
}

/// Planted instance: a correlated character tuple on a random coordinate
/// set, mixed with low-degree noise and normalized.
pub fn planted_instance(
    setting: &NoiseSetting,
    n: usize,
    d: usize,
    rng: &mut impl Rng,
) -> Result<Vec<FourierRepresentation>> {
    let pattern = correlated_pattern(setting)
        .ok_or_else(|| Error::Precondition("law has no fully correlated column pattern".into()))?;
    let weight = rng.gen_range(1..=d.clamp(1, n));
    let mut coords: Vec<usize> = (0..n).collect();
    for a in 0..weight {
        let b = rng.gen_range(a..n);
        coords.swap(a, b);
    }
    let coords = &coords[..weight];
    let eta: f64 = rng.gen_range(0.05..0.3);
    Ok((0..setting.k())
        .map(|i| {
            let mut digits = vec![0; n];
            for &a in coords {
                digits[a] = pattern[i];
            }
            let chi = setting.character(i, &MultiIndex(digits));
            let noise = random_low_degree(&setting.rep_sizes(i, n), d.min(n), rng, true);
            let f = chi.scale(Complex64::new(1.0 - eta, 0.0)).add(&noise.scale(Complex64::new(eta, 0.0))).unwrap();
            let norm = f.l2_norm();
            f.scale(Complex64::new(1.0 / norm, 0.0))
        })
        .collect())
}

fn run_trial(config: &ExperimentConfig, trial_id: usize) -> Result<TrialRecord> {
    let mut rng = trial_rng(config.seed, trial_id);
    let tol = config.tolerance;
    let n = config.n;
    match config.experiment {
        Experiment::CertifyMain | Experiment::CertifyCorrelation => {
            let setting = NoiseSetting::new(law_for(config, trial_id)?, config.basis)?;
            let fs = random_family(&setting, n, config.d, &mut rng);
            let cert = if config.experiment == Experiment::CertifyMain {
                certify_main(&fs, &setting, tol)?
            } else {
                certify_correlation(&fs, &setting, tol)?
            };
            Ok(TrialRecord::from_certificate(trial_id, &cert))
        }
        Experiment::CertifyRoth => {
            let mu = match config.distribution {
                LawChoice::Xor => xor_triple_distribution(),
                LawChoice::Ap | LawChoice::Mixed => ap_distribution(config.p, 3)?,
                _ => return Err(Error::InvalidArgument("certify-roth needs distribution ap or xor".into())),
            };
            let setting = NoiseSetting::new(mu, BasisChoice::Auto)?;
            let fs = random_family(&setting, n, config.d, &mut rng);
            Ok(TrialRecord::from_certificate(trial_id, &certify_roth(&fs, &setting, tol)?))
        }
        Experiment::CertifyHolder => {
            let setting = NoiseSetting::new(law_for(config, trial_id)?, config.basis)?;
            let k = setting.k() as f64;
            let mut fs = Vec::new();
            for i in 0..setting.k() {
                let rep = random_low_degree(&setting.rep_sizes(i, n), n, &mut rng, true);
                // Decay the high levels, then normalize in L^k.
                let mut damped = FourierRepresentation::zero(rep.sizes().to_vec());
                for (sigma, c) in rep.iter() {
                    damped.set(sigma.clone(), c * 0.3f64.powi(sigma.weight() as i32));
                }
                let dense = setting.inverse(i, &damped)?;
                let norm = lp_norm(&dense, k, &measures_of(&setting.coordinate_bases(i, n)))?;
                fs.push(damped.scale(Complex64::new(1.0 / norm, 0.0)));
            }
            let cert = certify_holder_truncation(&fs, &setting, config.d as i64, tol)?;
            Ok(TrialRecord::from_certificate(trial_id, &cert))
        }
        Experiment::Gowers => {
            let f = random_bounded(&vec![config.p; n], &mut rng);
            let mut notes = Vec::new();
            let mut spread = 0.0f64;
            for d in 1..=config.d {
                let direct = gowers_direct(&f, d, ENUMERATION_CAP)?.value;
                let recursive = gowers_recursive(&f, d, ENUMERATION_CAP)?.value;
                let cube = gowers_via_cube_nip(&f, d, ENUMERATION_CAP)?.value;
                spread = spread.max((direct - recursive).abs()).max((direct - cube).abs());
                let mut line = format!("U{d} direct {direct:.12e} recursive {recursive:.12e} cube {cube:.12e}");
                if d == 2 {
                    let bases = vec![standard_fourier_basis(config.p); n];
                    let closed = u2_closed_form(&transform(&f, &bases, DROP_TOLERANCE)?).value;
                    spread = spread.max((direct - closed).abs());
                    let _ = write!(line, " closed {closed:.12e}");
                }
                notes.push(line);
            }
            let cert = BoundCertificate::new("gowers-routes", spread, 0.0, tol, None);
            let mut rec = TrialRecord::from_certificate(trial_id, &cert);
            rec.notes.extend(notes);
            Ok(rec)
        }
        Experiment::GowersInequality => {
            let fs: Vec<DenseFunction> = (0..config.k).map(|_| random_bounded(&vec![config.p; n], &mut rng)).collect();
            Ok(TrialRecord::from_certificate(trial_id, &check_gowers_inequality(&fs, config.p, tol)?))
        }
        Experiment::InverseGowers => {
            let rep = random_low_degree(&vec![config.p; n], config.d.min(n), &mut rng, true);
            let (cert, norm) = certify_inverse_gowers(&rep, config.d, config.k, config.epsilon, tol)?;
            let mut rec = TrialRecord::from_certificate(trial_id, &cert);
            rec.notes.push(format!("gowers_norm {norm:.12e}"));
            Ok(rec)
        }
        Experiment::ApDistinguish => {
            let setting = NoiseSetting::new(ap_distribution(config.p, config.k)?, BasisChoice::Auto)?;
            let fs = if rng.gen::<bool>() {
                planted_instance(&setting, n, config.d, &mut rng)?
            } else {
                random_family(&setting, n, config.d, &mut rng)
            };
            let report = certify_ap_distinguisher(&fs, config.p, config.d, config.epsilon, tol)?;
            let min_coeff = report.non_uniform.iter().map(|c| c.rhs).fold(f64::INFINITY, f64::min);
            let (lhs, rhs) =
                if report.triggered { (report.uniformity_threshold, min_coeff) } else { (report.gap, report.eps) };
            let mut notes = vec![format!(
                "gap {:.12e} triggered {} triple_threshold {:.12e}",
                report.gap, report.triggered, report.triple_threshold
            )];
            if let Some(t) = &report.triple {
                for c in t {
                    notes.push(format!("triple {} {} {:.12e}", c.function, c.sigma, c.magnitude));
                }
            }
            Ok(TrialRecord { trial_id, lhs, rhs, holds: report.holds(), slack: rhs - lhs, notes })
        }
        Experiment::Extract => run_extract_trial(config, trial_id, &mut rng),
        Experiment::DemoXorNoninvariance => demo_xor_noninvariance(n, config.threshold),
        Experiment::DemoQuadraticPhase => demo_quadratic_phase(n, config.epsilon, tol),
        Experiment::DemoAllzeros => demo_allzeros(n, tol),
    }
}

fn run_extract_trial(config: &ExperimentConfig, trial_id: usize, rng: &mut ChaCha8Rng) -> Result<TrialRecord> {
    let setting = NoiseSetting::new(law_for(config, trial_id)?, config.basis)?;
    let fs = planted_instance(&setting, config.n, config.d, rng)?;
    let k = setting.k();
    let nc = setting.noise_correlation(&fs)?.norm();
    let probe = crate::certify::certify_main(&fs, &setting, config.tolerance)?;
    let c = probe.constants.map_or(1.0, |c| c.c);
    let d: usize = fs.iter().filter_map(|f| f.degree().finite()).sum();
    let c_pow_d = c.powi(d as i32);
    let delta = config.delta.unwrap_or(nc / (4.0 * (k - 2) as f64 * c_pow_d));
    let mut notes = vec![format!("noise_correlation {nc:.12e} delta {delta:.12e}")];
    let witness = extract_witness(&fs, &setting, delta)?;
    let family = extract_family(&fs, &setting, delta, config.r)?;
    let mut holds = true;
    let (mut lhs, mut rhs) = (f64::NAN, f64::NAN);
    match &witness {
        Some(w) => {
            notes.push(format!("witness {w}"));
            holds &= verify_witness(&fs, &setting, w)?;
            lhs = w.delta * w.delta * w.c_pow_d();
            rhs = w.corr_mag;
        }
        None => {
            holds &= nc <= 2.0 * delta * (k - 2) as f64 * c_pow_d;
            notes.push("witness none".into());
        }
    }
    match &family {
        Some(fam) => {
            for line in fam.to_string().lines() {
                notes.push(format!("family {line}"));
            }
            holds &= verify_family(&fs, &setting, fam)?;
        }
        None => {
            holds &= nc <= delta * c_pow_d;
            notes.push("family none".into());
        }
    }
    Ok(TrialRecord { trial_id, lhs, rhs, holds, slack: rhs - lhs, notes })
}

/// Sign-valued `f(x) = (x_1 − 1)(x_2 + … + x_n)/√n` vanishes somewhere on
/// every column-tuple in the support of the sign-triple law, while a
/// positive fraction of independent triples keeps all three values large.
pub fn demo_xor_noninvariance(n: usize, threshold: f64) -> Result<TrialRecord> {
    if n < 2 {
        return Err(Error::InvalidArgument("demo needs n ≥ 2".into()));
    }
    let sign = |x: usize| if x == 0 { 1.0 } else { -1.0 };
    let f = DenseFunction::from_fn(vec![2; n], |x| {
        let tail: f64 = x[1..].iter().map(|&v| sign(v)).sum();
        Complex64::new((sign(x[0]) - 1.0) * tail / (n as f64).sqrt(), 0.0)
    });
    let support = xor_triple_distribution();
    let mut worst = 0.0f64;
    let mut idx = vec![0usize; n];
    let mut support_points = 0usize;
    // Each coordinate draws one of the four support columns.
    loop {
        let mut xs = vec![vec![0usize; n]; 3];
        for (a, &c) in idx.iter().enumerate() {
            for (row, x) in xs.iter_mut().enumerate() {
                x[a] = support.support()[c].0[row];
            }
        }
        let m = xs.iter().map(|x| f.at(x).norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(m);
        support_points += 1;
        if !advance(&mut idx, support.support().len()) {
            break;
        }
    }
    // Independent triples: 2^{3n} points, uniform.
    let total = 1usize << (3 * n);
    let mut large = 0usize;
    for bits in 0..total {
        let x = |row: usize| (0..n).map(|a| (bits >> (row * n + a)) & 1).collect::<Vec<_>>();
        if (0..3).all(|row| f.at(&x(row)).norm() >= threshold) {
            large += 1;
        }
    }
    let fraction = large as f64 / total as f64;
    Ok(TrialRecord {
        trial_id: 0,
        lhs: worst,
        rhs: 0.0,
        holds: worst == 0.0 && fraction > 0.0,
        slack: 0.0 - worst,
        notes: vec![
            format!("support_points {support_points} max_min_abs {worst:.12e}"),
            format!("product_fraction_all_at_least {threshold:e} {fraction:.12e}"),
        ],
    })
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for digit in idx.iter_mut().rev() {
        *digit += 1;
        if *digit < base {
            return true;
        }
        *digit = 0;
    }
    false
}

/// `(−1)^{Σ x_i x_{i+1}}` on `Z_2^n`: full `U³` norm, tiny coefficients.
pub fn demo_quadratic_phase(n: usize, eps: f64, tol: f64) -> Result<TrialRecord> {
    if n < 2 {
        return Err(Error::InvalidArgument("demo needs n ≥ 2".into()));
    }
    let f = DenseFunction::from_fn(vec![2; n], |x| {
        let s: usize = (0..n - 1).map(|i| x[i] * x[i + 1]).sum();
        Complex64::new(if s % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    });
    let bases = vec![standard_fourier_basis(2); n];
    let rep = transform(&f, &bases, DROP_TOLERANCE)?;
    let u3 = gowers_norm(&f, 3, ENUMERATION_CAP)?;
    let max_coeff = rep.sup_coefficient(true);
    let degree = rep.degree().finite().unwrap_or(0);
    let (cert, _) = certify_inverse_gowers(&rep, degree, 3, eps, tol)?;
    let mut rec = TrialRecord::from_certificate(0, &cert);
    rec.notes.push(format!("gowers_u3 {:.12e} route {:?}", u3.value, u3.route));
    rec.notes.push(format!("max_coefficient {max_coeff:.12e} degree {degree}"));
    // Round trip as a sanity check on the tabulation.
    let back = inverse_transform(&rep, &bases)?;
    rec.holds &= back.values().iter().zip(f.values()).all(|(a, b)| (a - b).norm() < 1e-9);
    Ok(rec)
}

/// Indicator of the all-zeros point under `(b_0, b_1, b_0 ⊕ b_1)`.
pub fn demo_allzeros(n: usize, tol: f64) -> Result<TrialRecord> {
    let mu = xor_subset_distribution(2, &[vec![0, 1]])?;
    let setting = NoiseSetting::new(mu, BasisChoice::Auto)?;
    let f = DenseFunction::from_fn(vec![2; n], |x| Complex64::new(if x.iter().all(|&v| v == 0) { 1.0 } else { 0.0 }, 0.0));
    let fs: Vec<_> = (0..3).map(|i| setting.transform(i, &f)).collect::<Result<_>>()?;
    let nip = setting.nip(&fs)?.norm();
    let expected = 0.25f64.powi(n as i32);
    let l2 = fs[0].l2_norm();
    let cert = BoundCertificate::new("allzeros", (nip - expected).abs(), 0.0, tol, None);
    let mut rec = TrialRecord::from_certificate(0, &cert);
    rec.lhs = nip;
    rec.rhs = expected;
    rec.slack = expected - nip;
    rec.notes.push(format!("nip {nip:.12e} expected {expected:.12e}"));
    rec.notes.push(format!("l2_norm {l2:.12e} l2_norm_cubed {:.12e} ratio {:.12e}", l2.powi(3), nip / l2.powi(3)));
    Ok(rec)
}

/// Runs every trial of `config`; trial errors become failing rows.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let trials = if config.experiment.is_demo() { 1 } else { config.trials };
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(config, t).unwrap_or_else(|e| TrialRecord::failed(t, &e)))
        .collect();
    let mut config = config.clone();
    config.trials = trials;
    let summary = vec![format!("rng: ChaCha8 seed_from_u64(seed) with stream = trial_id")];
    Ok(Report { config, records, summary, elapsed: start.elapsed() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let text = "# demo\nexperiment = certify-main\np=5\nn = 2 # inline\ndistribution=ap\ntrials=3\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.experiment, Experiment::CertifyMain);
        assert_eq!((c.p, c.n, c.trials), (5, 2, 3));
        assert_eq!(c.distribution, LawChoice::Ap);
        assert!(ExperimentConfig::parse("p=3").is_err());
        assert!(ExperimentConfig::parse("experiment=gowers\nbogus=1").is_err());
        assert!(ExperimentConfig::parse("experiment=gowers\ntrials=0").is_err());
        assert!(ExperimentConfig::parse("experiment=gowers\ntolerance=0").is_err());
    }

    #[test]
    fn generator_is_deterministic_and_low_degree() {
        let a = generate_random_lowdeg(3, 4, 2, 9, true);
        assert_eq!(a, generate_random_lowdeg(3, 4, 2, 9, true));
        assert!(a.degree().finite().unwrap() <= 2);
        assert!((a.l2_norm() - 1.0).abs() < 1e-12);
        let c = generate_random_lowdeg(2, 3, 0, 1, true);
        assert_eq!(c.nnz(), 1);
        assert!((c.mean().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_weight_index_count() {
        // 1 + 3·2 + 3·4 for weight ≤ 2 over three ternary coordinates.
        assert_eq!(low_weight_indices(&[3, 3, 3], 2).len(), 19);
    }

    #[test]
    fn demos() {
        let xor = demo_xor_noninvariance(4, 0.5).unwrap();
        assert!(xor.holds && xor.lhs == 0.0);
        let quad = demo_quadratic_phase(8, 0.5, 1e-9).unwrap();
        assert!(quad.holds);
        let zeros = demo_allzeros(4, 1e-12).unwrap();
        assert!(zeros.holds && (zeros.lhs - 1.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn report_counts_and_determinism() {
        let mut config = ExperimentConfig::new(Experiment::CertifyMain);
        config.trials = 6;
        config.n = 2;
        let a = run(&config).unwrap();
        assert_eq!(a.pass_count() + a.fail_count(), 6);
        assert!(a.all_hold(), "{}", a.render());
        assert_eq!(a.render(), run(&config).unwrap().render());
    }
}
