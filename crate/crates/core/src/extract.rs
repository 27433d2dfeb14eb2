//! Constructive extraction of correlated Fourier characters.
//!
//! A large noise correlation forces some function to carry a large
//! coefficient whose character still correlates with the remaining
//! functions. [`extract_witness`] finds one such pair; [`extract_family`]
//! iterates the argument until the accumulated characters alone have a
//! nonzero expectation, which pins down a set of coordinates shared by at
//! least three of them.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::certify::{check_shapes, degree_sum, require_unit_l2, theorem_constant};
use crate::correlation::{nip_bruteforce, NoiseSetting};
use crate::error::{Error, Result};
use crate::fourier::{Degree, DenseFunction, FourierRepresentation, MultiIndex};
use crate::spaces::INDEPENDENCE_TOLERANCE;

/// Correlations at or below this level are treated as exact zeros.
pub const NUMERIC_FLOOR: f64 = 1e-12;

/// Relative slack used when re-verifying strict inequalities.
const VERIFY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// 0-based function index, at most `k − 3`.
    pub i: usize,
    pub sigma: MultiIndex,
    /// `|f̂_i(σ)|`.
    pub coeff_mag: f64,
    /// `|E[χ_σ(X_i) f_{i+1}(X_{i+1}) ⋯ f_k(X_k)]|`.
    pub corr_mag: f64,
    pub delta: f64,
    pub c: f64,
    pub d: Degree,
}

impl Witness {
    pub fn c_pow_d(&self) -> f64 {
        c_pow(self.c, self.d)
    }

    /// Both defining inequalities, checked on the stored numbers.
    pub fn satisfies_invariants(&self) -> bool {
        self.coeff_mag > self.delta && self.corr_mag > self.delta * self.delta * self.c_pow_d()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {:.12e} {:.12e} {:.12e} {:.12e} {}",
            self.i, self.sigma, self.coeff_mag, self.corr_mag, self.delta, self.c, self.d
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub i: usize,
    pub sigma: MultiIndex,
    pub coeff_mag: f64,
    /// The threshold this member was extracted under.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessFamily {
    /// Sorted by function index.
    pub members: Vec<FamilyMember>,
    /// `δ₀ = √δ`, then `δ_r = δ_{r−1}² / (2k)` for each round performed.
    pub schedule: Vec<f64>,
    /// Coordinate → number of members whose support contains it.
    pub coverage: BTreeMap<usize, usize>,
    /// `E[∏_{i∈I} χ_{σ(i)}(X_i)]`.
    pub family_nip: Complex64,
    /// `(δ / 2k)^{2^k}`.
    pub coefficient_threshold: f64,
    /// Minimum multiplicity required of each covered coordinate.
    pub required_coverage: usize,
    pub delta: f64,
    pub c: f64,
    pub d: Degree,
}

impl WitnessFamily {
    pub fn indices(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.i).collect()
    }

    pub fn min_coverage(&self) -> usize {
        self.coverage.values().copied().min().unwrap_or(0)
    }

    pub fn satisfies_invariants(&self) -> bool {
        self.members.len() >= 3
            && self.min_coverage() >= self.required_coverage
            && self.members.iter().all(|m| m.coeff_mag > self.coefficient_threshold)
            && self.family_nip.norm() > NUMERIC_FLOOR
    }
}

impl fmt::Display for WitnessFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.members {
            writeln!(f, "{} {} {:.12e} {:.12e} {:.12e} {}", m.i, m.sigma, m.coeff_mag, m.delta, self.c, self.d)?;
        }
        let cov: Vec<String> = self.coverage.iter().map(|(a, c)| format!("{a}:{c}")).collect();
        write!(f, "coverage {} nip {:.12e}", cov.join(","), self.family_nip.norm())
    }
}

fn c_pow(c: f64, d: Degree) -> f64 {
    match d {
        Degree::Bottom => 0.0,
        Degree::Finite(d) => c.powi(d as i32),
    }
}

struct Constants {
    c: f64,
    d: Degree,
    c_pow_d: f64,
}

fn prepare(fs: &[FourierRepresentation], setting: &NoiseSetting) -> Result<Constants> {
    if !setting.is_pairwise_independent() {
        return Err(Error::NotPairwiseIndependent);
    }
    if fs.len() < 3 {
        return Err(Error::Precondition(format!("needs at least 3 functions, got {}", fs.len())));
    }
    check_shapes(setting, fs)?;
    require_unit_l2(fs)?;
    let k = fs.len();
    let c = theorem_constant(k, setting.mu().max_alphabet(), setting.mu().alpha(), setting.uses_balanced_constant());
    let d = degree_sum(&fs.iter().map(FourierRepresentation::degree).collect::<Vec<_>>());
    Ok(Constants { c, d, c_pow_d: c_pow(c, d) })
}

/// `nip` with every empty slot filled by the constant 1.
fn nip_restricted(setting: &NoiseSetting, slots: &[Option<FourierRepresentation>], n: usize) -> Result<Complex64> {
    let fs: Vec<FourierRepresentation> =
        slots.iter().enumerate().map(|(i, s)| s.clone().unwrap_or_else(|| setting.one(i, n))).collect();
    setting.nip(&fs)
}

/// Best character of `g` (placed at component `i`) against the other
/// occupied slots: max `|t(σ)|` over `σ ≠ 0` with `|ĝ(σ)| > δ`, ties broken
/// by the lexicographically first `σ`.
fn best_character(
    setting: &NoiseSetting,
    slots: &[Option<FourierRepresentation>],
    i: usize,
    g: &FourierRepresentation,
    delta: f64,
) -> Result<Option<(MultiIndex, f64, f64)>> {
    let n = g.n();
    let mut best: Option<(MultiIndex, f64, f64)> = None;
    let mut probe = slots.to_vec();
    for (sigma, coeff) in g.iter() {
        if sigma.is_zero() || coeff.norm() <= delta {
            continue;
        }
        probe[i] = Some(setting.character(i, sigma));
        let t = nip_restricted(setting, &probe, n)?.norm();
        if best.as_ref().map_or(true, |b| t > b.2) {
            best = Some((sigma.clone(), coeff.norm(), t));
        }
    }
    Ok(best)
}

/// Scan for a witness under threshold `δ`.
///
/// Returns `None` when `|noise correlation| ≤ 2δ(k−2)C^D`. With
/// `exhaustive` every qualifying index yields a witness; otherwise only the
/// first one is returned.
pub fn extract_witnesses(
    fs: &[FourierRepresentation],
    setting: &NoiseSetting,
    delta: f64,
    exhaustive: bool,
) -> Result<Option<Vec<Witness>>> {
    let consts = prepare(fs, setting)?;
    let k = fs.len();
    let n = fs[0].n();
    if consts.d == Degree::Bottom {
        return Ok(None);
    }
    let nc = setting.noise_correlation(fs)?.norm();
    if nc <= 2.0 * delta * (k - 2) as f64 * consts.c_pow_d {
        return Ok(None);
    }
    let scan_threshold = 2.0 * delta * consts.c_pow_d;
    let mut found = Vec::new();
    for i in 0..k - 2 {
        let g = fs[i].centered();
        let mut slots: Vec<Option<FourierRepresentation>> = vec![None; k];
        slots[i] = Some(g.clone());
        for j in i + 1..k {
            slots[j] = Some(fs[j].clone());
        }
        let term = nip_restricted(setting, &slots, n)?.norm();
        if term <= scan_threshold || term <= NUMERIC_FLOOR {
            continue;
        }
        let (sigma, coeff_mag, corr_mag) = best_character(setting, &slots, i, &g, delta)?.ok_or_else(|| {
            Error::TheoremViolation(format!("term {term} at index {i} exceeds {scan_threshold} but no coefficient exceeds {delta}"))
        })?;
        let w = Witness { i, sigma, coeff_mag, corr_mag, delta, c: consts.c, d: consts.d };
        if !w.satisfies_invariants() {
            return Err(Error::TheoremViolation(format!("witness {w} misses its thresholds")));
        }
        found.push(w);
        if !exhaustive {
            break;
        }
    }
    if found.is_empty() {
        return Err(Error::TheoremViolation(format!(
            "noise correlation {nc} exceeds {} but no index qualifies",
            2.0 * delta * (k - 2) as f64 * consts.c_pow_d
        )));
    }
    Ok(Some(found))
}

/// First witness for threshold `δ`, or `None` below the hypothesis.
pub fn extract_witness(fs: &[FourierRepresentation], setting: &NoiseSetting, delta: f64) -> Result<Option<Witness>> {
    Ok(extract_witnesses(fs, setting, delta, false)?.map(|mut v| v.swap_remove(0)))
}

/// Iterated extraction producing an intersecting character family.
///
/// Returns `None` when `|noise correlation| ≤ C^D·δ`. With `r = Some(r)` the
/// law must be `r`-wise independent and every covered coordinate must be
/// hit at least `r + 1` times; otherwise at least 3 times.
pub fn extract_family(
    fs: &[FourierRepresentation],
    setting: &NoiseSetting,
    delta: f64,
    r: Option<usize>,
) -> Result<Option<WitnessFamily>> {
    let consts = prepare(fs, setting)?;
    let k = fs.len();
    let n = fs[0].n();
    let required_coverage = match r {
        Some(r) => {
            if r < 2 || !setting.mu().is_r_wise_independent(r, INDEPENDENCE_TOLERANCE) {
                return Err(Error::Precondition(format!("law is not {r}-wise independent")));
            }
            r + 1
        }
        None => 3,
    };
    if consts.d == Degree::Bottom {
        return Ok(None);
    }
    let nc = setting.noise_correlation(fs)?.norm();
    if nc <= consts.c_pow_d * delta {
        return Ok(None);
    }

    let mut schedule = vec![delta.sqrt()];
    let mut remaining: Vec<usize> = (0..k).collect();
    let mut members: Vec<FamilyMember> = Vec::new();
    loop {
        if remaining.is_empty() {
            break;
        }
        let prev = *schedule.last().unwrap();
        let delta_r = prev * prev / (2 * k) as f64;
        schedule.push(delta_r);

        // Sequence: remaining functions, then accumulated characters.
        let mut order: Vec<(usize, FourierRepresentation)> = remaining.iter().map(|&j| (j, fs[j].clone())).collect();
        order.extend(members.iter().map(|m| (m.i, setting.character(m.i, &m.sigma))));
        let m = order.len();
        let mut best: Option<(usize, f64)> = None;
        let mut prefix_mean = Complex64::new(1.0, 0.0);
        for p in 0..m.saturating_sub(2) {
            let mut slots: Vec<Option<FourierRepresentation>> = vec![None; k];
            slots[order[p].0] = Some(order[p].1.centered());
            for (j, h) in &order[p + 1..] {
                slots[*j] = Some(h.clone());
            }
            let term = (prefix_mean * nip_restricted(setting, &slots, n)?).norm();
            if term > NUMERIC_FLOOR && best.map_or(true, |b| term > b.1) {
                best = Some((p, term));
            }
            prefix_mean *= order[p].1.mean();
        }
        let threshold = 2.0 * delta_r * consts.c_pow_d;
        let (p, term) = match best {
            Some(b) if b.1 > threshold => b,
            _ => {
                return Err(Error::TheoremViolation(format!(
                    "round {}: no telescoping term exceeds {threshold}",
                    schedule.len() - 1
                )))
            }
        };
        if p >= remaining.len() {
            // The accumulated characters already correlate on their own.
            break;
        }
        let j = order[p].0;
        let g = order[p].1.centered();
        let mut slots: Vec<Option<FourierRepresentation>> = vec![None; k];
        for (jj, h) in &order[p + 1..] {
            slots[*jj] = Some(h.clone());
        }
        slots[j] = Some(g.clone());
        let (sigma, coeff_mag, t) = best_character(setting, &slots, j, &g, delta_r)?.ok_or_else(|| {
            Error::TheoremViolation(format!("term {term} at function {j} but no coefficient exceeds {delta_r}"))
        })?;
        if t <= delta_r * delta_r * consts.c_pow_d {
            return Err(Error::TheoremViolation(format!("character correlation {t} too small at function {j}")));
        }
        remaining = remaining[p + 1..].to_vec();
        members.push(FamilyMember { i: j, sigma, coeff_mag, delta: delta_r });
    }

    members.sort_by_key(|m| m.i);
    let mut slots: Vec<Option<FourierRepresentation>> = vec![None; k];
    for m in &members {
        slots[m.i] = Some(setting.character(m.i, &m.sigma));
    }
    let family_nip = nip_restricted(setting, &slots, n)?;
    let mut coverage = BTreeMap::new();
    for m in &members {
        for a in m.sigma.support() {
            *coverage.entry(a).or_insert(0) += 1;
        }
    }
    let family = WitnessFamily {
        members,
        schedule,
        coverage,
        family_nip,
        coefficient_threshold: (delta / (2 * k) as f64).powi(1 << k),
        required_coverage,
        delta,
        c: consts.c,
        d: consts.d,
    };
    if !family.satisfies_invariants() {
        return Err(Error::TheoremViolation(format!("family misses its invariants:\n{family}")));
    }
    Ok(Some(family))
}

fn dense_slots(setting: &NoiseSetting, slots: &[Option<FourierRepresentation>], n: usize) -> Result<Vec<DenseFunction>> {
    slots
        .iter()
        .enumerate()
        .map(|(i, s)| match s {
            Some(rep) => setting.inverse(i, rep),
            None => Ok(DenseFunction::constant(setting.coordinate_bases(i, n).iter().map(|b| b.atoms()).collect(), Complex64::new(1.0, 0.0))),
        })
        .collect()
}

/// `f̂_i(σ)` recomputed from the tabulated function as `E[f · conj χ_σ]`.
fn coefficient_by_enumeration(setting: &NoiseSetting, i: usize, f: &FourierRepresentation, sigma: &MultiIndex) -> Result<f64> {
    let n = f.n();
    let dense = setting.inverse(i, f)?;
    let chi = setting.inverse(i, &setting.character(i, sigma))?;
    let bases = setting.coordinate_bases(i, n);
    let mut total = Complex64::new(0.0, 0.0);
    let sizes = dense.sizes().to_vec();
    let mut point = vec![0usize; n];
    for idx in 0..dense.len() {
        let mut rem = idx;
        for a in (0..n).rev() {
            point[a] = rem % sizes[a];
            rem /= sizes[a];
        }
        let w: f64 = point.iter().enumerate().map(|(a, &x)| bases[a].measure().mass()[x]).product();
        total += dense.values()[idx] * chi.values()[idx].conj() * w;
    }
    Ok(total.norm())
}

/// Re-checks a witness by direct enumeration over the support of `μ`.
pub fn verify_witness(fs: &[FourierRepresentation], setting: &NoiseSetting, w: &Witness) -> Result<bool> {
    let k = fs.len();
    let n = fs[0].n();
    let mut slots: Vec<Option<FourierRepresentation>> = vec![None; k];
    slots[w.i] = Some(setting.character(w.i, &w.sigma));
    for j in w.i + 1..k {
        slots[j] = Some(fs[j].clone());
    }
    let dense = dense_slots(setting, &slots, n)?;
    let corr = nip_bruteforce(&dense, setting.mu())?.value.norm();
    let coeff = coefficient_by_enumeration(setting, w.i, &fs[w.i], &w.sigma)?;
    let strict = |lhs: f64, bound: f64| lhs > bound * (1.0 + VERIFY_SLACK);
    Ok(!w.sigma.is_zero()
        && w.i + 2 < k
        && strict(coeff, w.delta)
        && strict(corr, w.delta * w.delta * w.c_pow_d())
        && (corr - w.corr_mag).abs() <= VERIFY_SLACK * (1.0 + corr))
}

/// Re-checks a family by direct enumeration over the support of `μ`.
pub fn verify_family(fs: &[FourierRepresentation], setting: &NoiseSetting, family: &WitnessFamily) -> Result<bool> {
    let k = fs.len();
    let n = fs[0].n();
    let mut slots: Vec<Option<FourierRepresentation>> = vec![None; k];
    for m in &family.members {
        if m.sigma.is_zero() || slots[m.i].is_some() {
            return Ok(false);
        }
        if coefficient_by_enumeration(setting, m.i, &fs[m.i], &m.sigma)? <= family.coefficient_threshold {
            return Ok(false);
        }
        slots[m.i] = Some(setting.character(m.i, &m.sigma));
    }
    let dense = dense_slots(setting, &slots, n)?;
    let value = nip_bruteforce(&dense, setting.mu())?.value.norm();
    let mut coverage: BTreeMap<usize, usize> = BTreeMap::new();
    for m in &family.members {
        for a in m.sigma.support() {
            *coverage.entry(a).or_insert(0) += 1;
        }
    }
    Ok(family.members.len() >= 3
        && value > NUMERIC_FLOOR
        && coverage == family.coverage
        && coverage.values().all(|&c| c >= family.required_coverage))
}
