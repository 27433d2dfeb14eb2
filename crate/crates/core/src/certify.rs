//! Bound constants and numerical certificates for the correlation bounds.
//!
//! Every certificate compares a computed left-hand side against the
//! right-hand side of an inequality that is proven for its inputs; a
//! certificate that fails beyond tolerance signals a bug, not an unlucky
//! instance.

use std::fmt;

use crate::correlation::NoiseSetting;
use crate::error::{Error, Result};
use crate::fourier::{lp_norm, measures_of, Degree, FourierRepresentation, MultiIndex, Truncation};
use crate::gowers::{gowers_norm, ENUMERATION_CAP};

/// Default absolute tolerance for `lhs ≤ rhs` comparisons.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;

/// Slack allowed on norm preconditions such as `‖f‖₂ ≤ 1`.
pub const NORM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub k: usize,
    /// Largest component alphabet.
    pub q: usize,
    /// `min_i α(μ_i)`.
    pub alpha: f64,
    pub balanced: bool,
    pub c: f64,
    pub d: Degree,
    pub delta: f64,
}

impl BoundConstants {
    /// `C^D`, with a bottom degree mapped to 0.
    pub fn c_pow_d(&self) -> f64 {
        match self.d {
            Degree::Bottom => 0.0,
            Degree::Finite(d) => self.c.powi(d as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
    pub constants: Option<BoundConstants>,
    pub tol: f64,
}

impl BoundCertificate {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64, constants: Option<BoundConstants>) -> Self {
        Self { name: name.into(), lhs, rhs, holds: lhs <= rhs + tol, slack: rhs - lhs, constants, tol }
    }
}

/// `name lhs rhs holds slack C D delta tol`, with `-` for absent constants.
impl fmt::Display for BoundCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:.12e} {:.12e} {} {:.12e}", self.name, self.lhs, self.rhs, self.holds, self.slack)?;
        match &self.constants {
            Some(c) => write!(f, " {:.12e} {} {:.12e}", c.c, c.d, c.delta)?,
            None => write!(f, " - - -")?,
        }
        write!(f, " {:.3e}", self.tol)
    }
}

/// Sum of the `k − 2` smallest degrees; any bottom summand makes it bottom.
pub fn deg_minus_2(degrees: &[Degree]) -> Result<Degree> {
    if degrees.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least two degrees, got {}", degrees.len())));
    }
    let mut sorted = degrees.to_vec();
    sorted.sort();
    let mut total = 0;
    for d in &sorted[..sorted.len() - 2] {
        match d {
            Degree::Bottom => return Ok(Degree::Bottom),
            Degree::Finite(v) => total += v,
        }
    }
    Ok(Degree::Finite(total))
}

/// `Σ deg(f_i)` over all functions; bottom if any function is zero.
pub fn degree_sum(degrees: &[Degree]) -> Degree {
    let mut total = 0;
    for d in degrees {
        match d {
            Degree::Bottom => return Degree::Bottom,
            Degree::Finite(v) => total += v,
        }
    }
    Degree::Finite(total)
}

/// `C = (k·√((q−1)/α))³`, or `(k·√(q−1))³` in the balanced case with
/// standard characters.
pub fn theorem_constant(k: usize, q: usize, alpha: f64, balanced: bool) -> f64 {
    let spread = if balanced { (q as f64 - 1.0).sqrt() } else { ((q as f64 - 1.0) / alpha).sqrt() };
    (k as f64 * spread).powi(3)
}

/// Constants for a setting with the given degree parameter and `δ`.
pub fn constants_for(setting: &NoiseSetting, d: Degree, delta: f64) -> BoundConstants {
    let k = setting.k();
    let q = setting.mu().max_alphabet();
    let alpha = setting.mu().alpha();
    let balanced = setting.uses_balanced_constant();
    let c = theorem_constant(k, q, alpha, balanced);
    BoundConstants { k, q, alpha, balanced, c, d, delta }
}

fn require_pairwise(setting: &NoiseSetting) -> Result<()> {
    if setting.is_pairwise_independent() {
        Ok(())
    } else {
        Err(Error::NotPairwiseIndependent)
    }
}

pub(crate) fn check_shapes(setting: &NoiseSetting, fs: &[FourierRepresentation]) -> Result<usize> {
    if fs.len() != setting.k() {
        return Err(Error::DimensionMismatch(format!("{} functions for k = {}", fs.len(), setting.k())));
    }
    let n = fs.first().map_or(0, FourierRepresentation::n);
    for (i, f) in fs.iter().enumerate() {
        if f.sizes() != setting.rep_sizes(i, n).as_slice() {
            return Err(Error::DimensionMismatch(format!("expansion {i} does not match component {i}")));
        }
    }
    Ok(n)
}

pub(crate) fn require_unit_l2(fs: &[FourierRepresentation]) -> Result<()> {
    for (i, f) in fs.iter().enumerate() {
        if f.l2_norm() > 1.0 + NORM_SLACK {
            return Err(Error::Precondition(format!("‖f_{i}‖₂ = {} exceeds 1", f.l2_norm())));
        }
    }
    Ok(())
}

/// `|⟨f_1, …, f_k⟩| ≤ C^D · δ · ∏_{i≥2} ‖f_i‖₂` with `δ = max_σ |f̂_1(σ)|`
/// and `D = deg₋₂`.
pub fn certify_main(fs: &[FourierRepresentation], setting: &NoiseSetting, tol: f64) -> Result<BoundCertificate> {
    require_pairwise(setting)?;
    check_shapes(setting, fs)?;
    let lhs = setting.nip(fs)?.norm();
    let degrees: Vec<Degree> = fs.iter().map(FourierRepresentation::degree).collect();
    let d = deg_minus_2(&degrees)?;
    let delta = fs[0].sup_coefficient(true);
    let constants = constants_for(setting, d, delta);
    let norms: f64 = fs[1..].iter().map(FourierRepresentation::l2_norm).product();
    let rhs = constants.c_pow_d() * delta * norms;
    Ok(BoundCertificate::new("main", lhs, rhs, tol, Some(constants)))
}

/// `|⟨f_1, …, f_k⟩ − ∏ E f_i| ≤ δ (k−2) C^D` with `δ` the largest nonzero
/// coefficient among `f_1, …, f_{k−2}` and every `‖f_i‖₂ ≤ 1`.
pub fn certify_correlation(fs: &[FourierRepresentation], setting: &NoiseSetting, tol: f64) -> Result<BoundCertificate> {
    require_pairwise(setting)?;
    check_shapes(setting, fs)?;
    require_unit_l2(fs)?;
    let k = fs.len();
    let lhs = setting.noise_correlation(fs)?.norm();
    let degrees: Vec<Degree> = fs.iter().map(FourierRepresentation::degree).collect();
    let d = deg_minus_2(&degrees)?;
    let delta = fs[..k - 2].iter().map(|f| f.sup_coefficient(false)).fold(0.0, f64::max);
    let constants = constants_for(setting, d, delta);
    let rhs = delta * (k - 2) as f64 * constants.c_pow_d();
    Ok(BoundCertificate::new("correlation", lhs, rhs, tol, Some(constants)))
}

/// `|E f_1 f_2 f_3| ≤ min_i max_σ |f̂_i(σ)|` for `‖f_i‖₂ ≤ 1` under a
/// three-term linear law (progressions, sign triples) with standard
/// characters.
pub fn certify_roth(fs: &[FourierRepresentation], setting: &NoiseSetting, tol: f64) -> Result<BoundCertificate> {
    require_pairwise(setting)?;
    if fs.len() != 3 {
        return Err(Error::Precondition(format!("needs exactly 3 functions, got {}", fs.len())));
    }
    check_shapes(setting, fs)?;
    require_unit_l2(fs)?;
    let lhs = setting.nip(fs)?.norm();
    let rhs = fs.iter().map(|f| f.sup_coefficient(true)).fold(f64::INFINITY, f64::min);
    Ok(BoundCertificate::new("roth", lhs, rhs, tol, None))
}

/// `|⟨f⟩ − ⟨f^{≤d}⟩| ≤ k ε (1+ε)^{k−1}` where `ε = max_i ‖f_i^{>d}‖_k` and
/// every `‖f_i‖_k ≤ 1`.
pub fn certify_holder_truncation(
    fs: &[FourierRepresentation],
    setting: &NoiseSetting,
    d: i64,
    tol: f64,
) -> Result<BoundCertificate> {
    let n = check_shapes(setting, fs)?;
    let k = fs.len();
    let p = k as f64;
    let mut eps = 0.0f64;
    for (i, f) in fs.iter().enumerate() {
        let measures = measures_of(&setting.coordinate_bases(i, n));
        let dense = setting.inverse(i, f)?;
        let norm = lp_norm(&dense, p, &measures)?;
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::Precondition(format!("‖f_{i}‖_{k} = {norm} exceeds 1")));
        }
        let tail = setting.inverse(i, &f.truncate(Truncation::Above, d))?;
        eps = eps.max(lp_norm(&tail, p, &measures)?);
    }
    let low: Vec<FourierRepresentation> = fs.iter().map(|f| f.truncate(Truncation::AtMost, d)).collect();
    let lhs = (setting.nip(fs)? - setting.nip(&low)?).norm();
    let rhs = p * eps * (1.0 + eps).powi(k as i32 - 1);
    let constants = BoundConstants {
        k,
        q: setting.mu().max_alphabet(),
        alpha: setting.mu().alpha(),
        balanced: setting.uses_balanced_constant(),
        c: 1.0,
        d: Degree::Finite(d.max(0) as usize),
        delta: eps,
    };
    Ok(BoundCertificate::new("holder", lhs, rhs, tol, Some(constants)))
}

/// If `‖f‖_{U^k} > ε` then some `|f̂(σ)| ≥ (ε / (2^k √(q−1))^{3d})^{2^k}`.
///
/// `rep` holds standard-character coefficients of `f : Z_p^n → C`. The
/// certificate compares the threshold (lhs) against the largest coefficient
/// (rhs); when `‖f‖_{U^k} ≤ ε` it is vacuous with lhs 0.
pub fn certify_inverse_gowers(
    rep: &FourierRepresentation,
    d: usize,
    k: usize,
    eps: f64,
    tol: f64,
) -> Result<(BoundCertificate, f64)> {
    if k < 2 {
        return Err(Error::Precondition(format!("Gowers order must be at least 2, got {k}")));
    }
    if let Degree::Finite(deg) = rep.degree() {
        if deg > d {
            return Err(Error::Precondition(format!("degree {deg} exceeds {d}")));
        }
    }
    if (rep.l2_norm() - 1.0).abs() > NORM_SLACK {
        return Err(Error::Precondition(format!("‖f‖₂ = {} is not 1", rep.l2_norm())));
    }
    let p = rep.sizes().first().copied().unwrap_or(2);
    let bases = vec![crate::fourier::standard_fourier_basis(p); rep.n()];
    let f = crate::fourier::inverse_transform(rep, &bases)?;
    let norm = gowers_norm(&f, k, ENUMERATION_CAP)?.value;
    let scale = (2f64.powi(k as i32) * (p as f64 - 1.0).sqrt()).powi(3 * d as i32);
    let threshold = (eps / scale).powi(1 << k);
    let max_coeff = rep.sup_coefficient(true);
    let lhs = if norm > eps { threshold } else { 0.0 };
    let constants = BoundConstants {
        k: 1 << k,
        q: p,
        alpha: 1.0 / p as f64,
        balanced: true,
        c: theorem_constant(1 << k, p, 1.0 / p as f64, true),
        d: Degree::Finite(d),
        delta: max_coeff,
    };
    Ok((BoundCertificate::new("inverse-gowers", lhs, max_coeff, tol, Some(constants)), norm))
}

/// A function index with a multi-index, used for distinguisher triples.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedCoefficient {
    pub function: usize,
    pub sigma: MultiIndex,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApDistinguisherReport {
    /// `|E_AP ∏ f_i − ∏ E f_i|`.
    pub gap: f64,
    pub eps: f64,
    pub triggered: bool,
    /// `ε / (k√(q−1))^{3dk}`.
    pub uniformity_threshold: f64,
    /// `(ε / (k·(k√(q−1))^{3dk}))^{2^k}`.
    pub triple_threshold: f64,
    /// One certificate per function: threshold ≤ largest coefficient.
    pub non_uniform: Vec<BoundCertificate>,
    pub triple: Option<[IndexedCoefficient; 3]>,
}

impl ApDistinguisherReport {
    pub fn holds(&self) -> bool {
        !self.triggered || (self.non_uniform.iter().all(|c| c.holds) && self.triple.is_some())
    }
}

/// Progression distinguisher check for `f_i : Z_p^n → C` of degree at most
/// `d` with `‖f_i‖₂ ≤ 1`, given by standard-character coefficients.
///
/// When the gap exceeds `ε`, every `f_i` must have some coefficient above the
/// uniformity threshold and three functions `i(1) < i(2) < i(3)` must carry
/// coefficients above the triple threshold whose supports share a
/// coordinate. The triple is found by exhaustive search; failing to find one
/// is reported as a theorem violation.
pub fn certify_ap_distinguisher(
    fs: &[FourierRepresentation],
    p: usize,
    d: usize,
    eps: f64,
    tol: f64,
) -> Result<ApDistinguisherReport> {
    let k = fs.len();
    let mu = crate::spaces::ap_distribution(p, k)?;
    let setting = NoiseSetting::new(mu, crate::fourier::BasisChoice::Auto)?;
    check_shapes(&setting, fs)?;
    require_unit_l2(fs)?;
    for (i, f) in fs.iter().enumerate() {
        if let Degree::Finite(deg) = f.degree() {
            if deg > d {
                return Err(Error::Precondition(format!("f_{i} has degree {deg} > {d}")));
            }
        }
    }
    let gap = setting.noise_correlation(fs)?.norm();
    let base = (k as f64 * (p as f64 - 1.0).sqrt()).powi(3 * (d * k) as i32);
    let uniformity_threshold = eps / base;
    let triple_threshold = (eps / (k as f64 * base)).powi(1 << k);
    let triggered = gap > eps;
    let mut report = ApDistinguisherReport {
        gap,
        eps,
        triggered,
        uniformity_threshold,
        triple_threshold,
        non_uniform: Vec::new(),
        triple: None,
    };
    if !triggered {
        return Ok(report);
    }
    report.non_uniform = fs
        .iter()
        .map(|f| {
            let max = f.sup_coefficient(true);
            // Strict: a δ-uniform function has every coefficient at most δ.
            let mut cert = BoundCertificate::new("ap-non-uniform", uniformity_threshold, max, 0.0, None);
            cert.holds = max > uniformity_threshold - tol;
            cert
        })
        .collect();
    report.triple = find_triple(fs, triple_threshold);
    if report.triple.is_none() {
        return Err(Error::TheoremViolation(format!(
            "progression gap {gap} > {eps} but no coefficient triple with a shared coordinate"
        )));
    }
    Ok(report)
}

fn find_triple(fs: &[FourierRepresentation], threshold: f64) -> Option<[IndexedCoefficient; 3]> {
    let large: Vec<Vec<(&MultiIndex, f64)>> = fs
        .iter()
        .map(|f| f.iter().filter(|(s, c)| !s.is_zero() && c.norm() >= threshold).map(|(s, c)| (s, c.norm())).collect())
        .collect();
    let k = fs.len();
    let n = fs.first().map_or(0, FourierRepresentation::n);
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for coord in 0..n {
                    let pick = |i: usize| {
                        large[i]
                            .iter()
                            .filter(|(s, _)| s.digits()[coord] > 0)
                            .max_by(|x, y| x.1.total_cmp(&y.1))
                            .map(|(s, m)| IndexedCoefficient { function: i, sigma: (*s).clone(), magnitude: *m })
                    };
                    if let (Some(x), Some(y), Some(z)) = (pick(a), pick(b), pick(c)) {
                        return Some([x, y, z]);
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{BasisChoice, DenseFunction};
    use crate::spaces::{ap_distribution, xor_triple_distribution};
    use num_complex::Complex64;

    #[test]
    fn deg_minus_2_cases() {
        let f = Degree::Finite;
        assert_eq!(deg_minus_2(&[f(2), f(3), f(4)]).unwrap(), f(2));
        assert_eq!(deg_minus_2(&[f(4), f(2), f(3)]).unwrap(), f(2));
        assert_eq!(deg_minus_2(&[f(7), f(9)]).unwrap(), f(0));
        assert_eq!(deg_minus_2(&[Degree::Bottom, f(1), f(1)]).unwrap(), Degree::Bottom);
        assert_eq!(deg_minus_2(&[f(1), f(5), f(2), f(3)]).unwrap(), f(3));
        assert!(deg_minus_2(&[f(1)]).is_err());
    }

    #[test]
    fn constants() {
        assert_eq!(theorem_constant(3, 2, 0.5, true), 27.0);
        assert!((theorem_constant(3, 2, 0.25, false) - 216.0).abs() < 1e-9);
        assert!((theorem_constant(4, 3, 1.0 / 3.0, false) - 940.604_061_120_017_6).abs() < 1e-6);
    }

    fn sign_character_setting() -> (NoiseSetting, Vec<FourierRepresentation>) {
        let setting = NoiseSetting::new(xor_triple_distribution(), BasisChoice::Auto).unwrap();
        let f = DenseFunction::from_fn(vec![2], |x| Complex64::new(if x[0] == 0 { 1.0 } else { -1.0 }, 0.0));
        let reps = (0..3).map(|i| setting.transform(i, &f).unwrap()).collect();
        (setting, reps)
    }

    #[test]
    fn main_on_sign_characters() {
        let (setting, reps) = sign_character_setting();
        let cert = certify_main(&reps, &setting, CERTIFICATE_TOLERANCE).unwrap();
        let c = cert.constants.unwrap();
        assert!(c.balanced);
        assert_eq!(c.c, 27.0);
        assert_eq!(c.d, Degree::Finite(1));
        assert!((cert.lhs - 1.0).abs() < 1e-12);
        assert!((cert.rhs - 27.0).abs() < 1e-9);
        assert!(cert.holds);
    }

    #[test]
    fn main_with_zero_function() {
        let (setting, mut reps) = sign_character_setting();
        reps[0] = FourierRepresentation::zero(reps[0].sizes().to_vec());
        let cert = certify_main(&reps, &setting, CERTIFICATE_TOLERANCE).unwrap();
        assert_eq!(cert.lhs, 0.0);
        assert_eq!(cert.constants.unwrap().d, Degree::Bottom);
        assert!(cert.holds);
    }

    #[test]
    fn main_requires_pairwise() {
        let mu = crate::spaces::xor_subset_distribution(2, &[vec![0]]).unwrap();
        let setting = NoiseSetting::new(mu, BasisChoice::Auto).unwrap();
        let reps: Vec<_> = (0..3).map(|i| setting.one(i, 1)).collect();
        assert!(matches!(certify_main(&reps, &setting, 1e-9), Err(Error::NotPairwiseIndependent)));
    }

    #[test]
    fn correlation_edge_cases() {
        let setting = NoiseSetting::new(crate::spaces::ap_distribution(3, 3).unwrap(), BasisChoice::Auto).unwrap();
        let reps: Vec<_> = (0..3).map(|i| setting.one(i, 2).scale(Complex64::new(0.5, 0.0))).collect();
        let cert = certify_correlation(&reps, &setting, 1e-9).unwrap();
        assert!(cert.lhs < 1e-12 && cert.holds);

        let too_big: Vec<_> = (0..3).map(|i| setting.one(i, 2).scale(Complex64::new(2.0, 0.0))).collect();
        assert!(matches!(certify_correlation(&too_big, &setting, 1e-9), Err(Error::Precondition(_))));
    }

    #[test]
    fn correlation_k_two_is_zero() {
        let mu = crate::spaces::xor_subset_distribution(2, &[]).unwrap();
        let setting = NoiseSetting::new(mu, BasisChoice::Auto).unwrap();
        let chi = setting.character(0, &MultiIndex(vec![1]));
        let cert = certify_correlation(&[chi.clone(), chi], &setting, 1e-9).unwrap();
        assert_eq!(cert.rhs, 0.0);
        assert!(cert.lhs < 1e-12 && cert.holds);
    }

    #[test]
    fn roth_is_tight_on_sign_characters() {
        let (setting, reps) = sign_character_setting();
        let cert = certify_roth(&reps, &setting, 1e-9).unwrap();
        assert!((cert.lhs - 1.0).abs() < 1e-12 && (cert.rhs - 1.0).abs() < 1e-12 && cert.holds);
    }

    #[test]
    fn holder_on_low_degree_and_on_high_characters() {
        let setting = NoiseSetting::new(ap_distribution(3, 3).unwrap(), BasisChoice::Auto).unwrap();
        let low: Vec<_> = (0..3).map(|i| setting.character(i, &MultiIndex(vec![1, 0]))).collect();
        let cert = certify_holder_truncation(&low, &setting, 1, 1e-9).unwrap();
        assert_eq!(cert.lhs, 0.0);
        assert!(cert.holds);

        let sigmas = [MultiIndex(vec![1, 1]), MultiIndex(vec![1, 1]), MultiIndex(vec![1, 1])];
        let high: Vec<_> = sigmas.iter().enumerate().map(|(i, s)| setting.character(i, s)).collect();
        let cert = certify_holder_truncation(&high, &setting, 1, 1e-9).unwrap();
        assert!((cert.lhs - setting.nip(&high).unwrap().norm()).abs() < 1e-12);
        assert!((cert.rhs - 3.0 * 4.0).abs() < 1e-9);
        assert!(cert.holds);
    }

    #[test]
    fn inverse_gowers_single_character() {
        let rep = FourierRepresentation::character(vec![3, 3], MultiIndex(vec![1, 2]));
        let (cert, norm) = certify_inverse_gowers(&rep, 2, 2, 0.5, 1e-9).unwrap();
        assert!((norm - 1.0).abs() < 1e-9);
        assert!(cert.lhs > 0.0 && cert.holds);
        assert_eq!(cert.rhs, 1.0);
    }

    #[test]
    fn ap_distinguisher_constants_are_vacuous() {
        let fs = vec![FourierRepresentation::constant(vec![3, 3], Complex64::new(1.0, 0.0)); 3];
        let report = certify_ap_distinguisher(&fs, 3, 1, 0.1, 1e-9).unwrap();
        assert!(report.gap < 1e-12 && !report.triggered && report.holds());
    }

    #[test]
    fn ap_distinguisher_phase_cancellation() {
        let sigma = MultiIndex(vec![1, 0]);
        let fs = vec![FourierRepresentation::character(vec![3, 3], sigma.clone()); 3];
        let report = certify_ap_distinguisher(&fs, 3, 1, 0.5, 1e-9).unwrap();
        assert!((report.gap - 1.0).abs() < 1e-12);
        assert!(report.triggered && report.holds());
        let triple = report.triple.unwrap();
        assert!(triple.iter().all(|t| t.sigma == sigma));
        assert_eq!(triple.iter().map(|t| t.function).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn certificate_display() {
        let cert = BoundCertificate::new("x", 1.0, 2.0, 1e-9, None);
        assert_eq!(cert.to_string(), "x 1.000000000000e0 2.000000000000e0 true 1.000000000000e0 - - - 1.000e-9");
    }
}
