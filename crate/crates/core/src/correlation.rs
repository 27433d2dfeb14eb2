//! Noisy inner products `⟨f_1, …, f_k⟩_μ = E[∏_i f_i(X_i)]`, where the
//! columns of the `k × n` matrix `X` are i.i.d. draws from `μ`.
//!
//! Three routes are provided: exact enumeration over `support(μ)^n`
//! ([`nip_bruteforce`], the oracle for everything else), a sparse expansion
//! through per-column character moments ([`nip_fourier`]), and a seeded
//! Monte-Carlo estimate ([`nip_montecarlo`]).

use num_complex::Complex64;
use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fourier::{
    transform, BasisChoice, BasisKind, DenseFunction, FourierRepresentation, MultiIndex,
    OrthonormalBasis, DROP_TOLERANCE,
};
use crate::spaces::{JointDistribution, INDEPENDENCE_TOLERANCE};

/// Name of the generator behind [`nip_montecarlo`], recorded in reports.
pub const MONTE_CARLO_RNG: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

/// Default cap on the number of moment-tensor entries.
pub const MOMENT_CAP: usize = 1_000_000;

/// Moments of magnitude below this are stored as exact zeros.
pub const MOMENT_ZERO_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NipMethod {
    BruteForce,
    Fourier,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NipResult {
    pub value: Complex64,
    pub method: NipMethod,
    pub stderr: Option<f64>,
}

/// `M[a_1, …, a_k] = E_μ[∏_i χ_{i,a_i}(x_i)]`, dense, component 0 most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMomentTensor {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    table: Vec<Complex64>,
}

impl ColumnMomentTensor {
    pub fn new(mu: &JointDistribution, bases: &[OrthonormalBasis]) -> Result<Self> {
        Self::with_cap(mu, bases, MOMENT_CAP)
    }

    pub fn with_cap(mu: &JointDistribution, bases: &[OrthonormalBasis], cap: usize) -> Result<Self> {
        if bases.len() != mu.k() {
            return Err(Error::DimensionMismatch(format!("{} bases for k = {}", bases.len(), mu.k())));
        }
        for (i, (b, s)) in bases.iter().zip(mu.spaces()).enumerate() {
            if b.atoms() != s.size() {
                return Err(Error::DimensionMismatch(format!(
                    "basis {i} is over {} atoms, component has {}",
                    b.atoms(),
                    s.size()
                )));
            }
        }
        let sizes: Vec<usize> = bases.iter().map(OrthonormalBasis::len).collect();
        let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s)).unwrap_or(usize::MAX);
        if total > cap {
            return Err(Error::CapExceeded { required: total as u128, cap: cap as u128 });
        }
        let strides = strides(&sizes);
        let mut table = vec![ZERO; total];
        // Accumulate component by component: for each support point, expand
        // the product of character values over all index tuples.
        for (tuple, m) in mu.support() {
            let mut partial = vec![Complex64::new(*m, 0.0)];
            for (i, b) in bases.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * b.len());
                for p in &partial {
                    for a in 0..b.len() {
                        next.push(p * b.value(a, tuple[i]));
                    }
                }
                partial = next;
            }
            for (t, v) in table.iter_mut().zip(partial) {
                *t += v;
            }
        }
        for v in &mut table {
            if v.norm() < MOMENT_ZERO_TOLERANCE {
                *v = ZERO;
            }
        }
        Ok(Self { sizes, strides, table })
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn get(&self, index: &[usize]) -> Complex64 {
        self.table[index.iter().zip(&self.strides).map(|(a, s)| a * s).sum::<usize>()]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.table
    }
}

fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    strides
}

/// A column law together with one basis per component and its moment tensor.
#[derive(Debug, Clone)]
pub struct NoiseSetting {
    mu: JointDistribution,
    bases: Vec<OrthonormalBasis>,
    moments: ColumnMomentTensor,
    pairwise: bool,
}

impl NoiseSetting {
    pub fn new(mu: JointDistribution, choice: BasisChoice) -> Result<Self> {
        let bases = mu.marginals().iter().map(|m| OrthonormalBasis::for_measure(m, choice)).collect();
        Self::with_bases(mu, bases)
    }

    pub fn with_bases(mu: JointDistribution, bases: Vec<OrthonormalBasis>) -> Result<Self> {
        let marginals = mu.marginals();
        for (i, (b, m)) in bases.iter().zip(&marginals).enumerate() {
            if b.measure().mass().iter().zip(m.mass()).any(|(a, c)| (a - c).abs() > 1e-12) {
                return Err(Error::InvalidArgument(format!("basis {i} is not orthonormal for marginal {i}")));
            }
        }
        let moments = ColumnMomentTensor::new(&mu, &bases)?;
        let pairwise = mu.is_pairwise_independent();
        Ok(Self { mu, bases, moments, pairwise })
    }

    pub fn mu(&self) -> &JointDistribution {
        &self.mu
    }

    pub fn k(&self) -> usize {
        self.mu.k()
    }

    pub fn bases(&self) -> &[OrthonormalBasis] {
        &self.bases
    }

    pub fn basis(&self, i: usize) -> &OrthonormalBasis {
        &self.bases[i]
    }

    pub fn moments(&self) -> &ColumnMomentTensor {
        &self.moments
    }

    pub fn is_pairwise_independent(&self) -> bool {
        self.pairwise
    }

    /// Balanced marginals with the standard complex basis on every component.
    pub fn uses_balanced_constant(&self) -> bool {
        self.mu.is_balanced(INDEPENDENCE_TOLERANCE)
            && self.bases.iter().all(|b| b.kind() == BasisKind::Standard)
    }

    /// Basis-function counts per coordinate for functions of component `i`.
    pub fn rep_sizes(&self, i: usize, n: usize) -> Vec<usize> {
        vec![self.bases[i].len(); n]
    }

    /// Per-coordinate bases for functions of component `i`.
    pub fn coordinate_bases(&self, i: usize, n: usize) -> Vec<OrthonormalBasis> {
        vec![self.bases[i].clone(); n]
    }

    pub fn transform(&self, i: usize, f: &DenseFunction) -> Result<FourierRepresentation> {
        transform(f, &self.coordinate_bases(i, f.n()), DROP_TOLERANCE)
    }

    pub fn inverse(&self, i: usize, rep: &FourierRepresentation) -> Result<DenseFunction> {
        crate::fourier::inverse_transform(rep, &self.coordinate_bases(i, rep.n()))
    }

    /// Constant function 1 on component `i`.
    pub fn one(&self, i: usize, n: usize) -> FourierRepresentation {
        FourierRepresentation::constant(self.rep_sizes(i, n), ONE)
    }

    /// `χ_σ` on component `i`.
    pub fn character(&self, i: usize, sigma: &MultiIndex) -> FourierRepresentation {
        FourierRepresentation::character(self.rep_sizes(i, sigma.n()), sigma.clone())
    }

    pub fn nip(&self, fs: &[FourierRepresentation]) -> Result<Complex64> {
        Ok(nip_fourier(fs, &self.moments)?.value)
    }

    pub fn noise_correlation(&self, fs: &[FourierRepresentation]) -> Result<Complex64> {
        noise_correlation(fs, &self.moments)
    }
}

fn check_dense(fs: &[DenseFunction], mu: &JointDistribution) -> Result<usize> {
    if fs.is_empty() {
        return Err(Error::InvalidArgument("empty function list".into()));
    }
    if fs.len() != mu.k() {
        return Err(Error::DimensionMismatch(format!("{} functions for k = {}", fs.len(), mu.k())));
    }
    let n = fs[0].n();
    for (i, (f, s)) in fs.iter().zip(mu.spaces()).enumerate() {
        if f.n() != n {
            return Err(Error::DimensionMismatch(format!("function {i} has n = {}, expected {n}", f.n())));
        }
        if f.sizes().iter().any(|&q| q != s.size()) {
            return Err(Error::DimensionMismatch(format!(
                "function {i} alphabet {:?} does not match component size {}",
                f.sizes(),
                s.size()
            )));
        }
    }
    Ok(n)
}

/// Exact noisy inner product by enumerating all `support(μ)^n` column
/// assignments in a fixed order.
pub fn nip_bruteforce(fs: &[DenseFunction], mu: &JointDistribution) -> Result<NipResult> {
    let n = check_dense(fs, mu)?;
    let k = fs.len();
    let support = mu.support();
    let q = mu.sizes();
    // Offset of atom a at coordinate j in function i's table is a * q_i^{n-1-j}.
    let pow: Vec<Vec<usize>> =
        (0..k).map(|i| (0..n).map(|j| q[i].pow((n - 1 - j) as u32)).collect()).collect();

    fn go(
        j: usize,
        n: usize,
        weight: f64,
        offsets: &mut [usize],
        fs: &[DenseFunction],
        support: &[(Vec<usize>, f64)],
        pow: &[Vec<usize>],
    ) -> Complex64 {
        if j == n {
            let mut prod = Complex64::new(weight, 0.0);
            for (f, &o) in fs.iter().zip(offsets.iter()) {
                prod *= f.values()[o];
            }
            return prod;
        }
        let mut acc = ZERO;
        for (tuple, m) in support {
            for i in 0..fs.len() {
                offsets[i] += tuple[i] * pow[i][j];
            }
            acc += go(j + 1, n, weight * m, offsets, fs, support, pow);
            for i in 0..fs.len() {
                offsets[i] -= tuple[i] * pow[i][j];
            }
        }
        acc
    }

    let mut offsets = vec![0usize; k];
    let value = go(0, n, 1.0, &mut offsets, fs, support, &pow);
    Ok(NipResult { value, method: NipMethod::BruteForce, stderr: None })
}

/// `Σ_{σ_1, …, σ_k} ∏_i f̂_i(σ_i) · ∏_j M[σ_{1j}, …, σ_{kj}]` over the sparse
/// cross product of stored coefficients.
///
/// A partial choice `σ_1, …, σ_i` is abandoned as soon as some coordinate's
/// prefix `(σ_{1j}, …, σ_{ij})` admits no completion with a nonzero moment;
/// under pairwise independence this removes every column pattern of weight 1
/// or 2 that cannot be rescued by later functions.
pub fn nip_fourier(fs: &[FourierRepresentation], moments: &ColumnMomentTensor) -> Result<NipResult> {
    if fs.is_empty() {
        return Err(Error::InvalidArgument("empty function list".into()));
    }
    let k = moments.k();
    if fs.len() != k {
        return Err(Error::DimensionMismatch(format!("{} functions for k = {k}", fs.len())));
    }
    let n = fs[0].n();
    for (i, f) in fs.iter().enumerate() {
        if f.n() != n || f.sizes().iter().any(|&s| s != moments.sizes[i]) {
            return Err(Error::DimensionMismatch(format!(
                "expansion {i} has alphabet {:?}, expected {} per coordinate",
                f.sizes(),
                moments.sizes[i]
            )));
        }
    }

    // reachable[i][prefix]: some completion of the first i digits has a
    // nonzero moment. reachable[k] is the nonzero pattern of M itself.
    let mut reachable: Vec<Vec<bool>> = vec![Vec::new(); k + 1];
    reachable[k] = moments.table.iter().map(|v| *v != ZERO).collect();
    for i in (0..k).rev() {
        let q = moments.sizes[i];
        reachable[i] = reachable[i + 1].chunks(q).map(|c| c.iter().any(|&b| b)).collect();
    }

    let coeffs: Vec<Vec<(&MultiIndex, Complex64)>> =
        fs.iter().map(|f| f.iter().map(|(s, c)| (s, *c)).collect()).collect();

    struct Walk<'a> {
        coeffs: &'a [Vec<(&'a MultiIndex, Complex64)>],
        reachable: &'a [Vec<bool>],
        moments: &'a ColumnMomentTensor,
        n: usize,
    }

    impl Walk<'_> {
        fn go(&self, i: usize, prefix: &mut [usize], weight: Complex64) -> Complex64 {
            let k = self.coeffs.len();
            if i == k {
                let mut prod = weight;
                for &p in prefix.iter() {
                    prod *= self.moments.table[p];
                }
                return prod;
            }
            let q = self.moments.sizes[i];
            let mut acc = ZERO;
            for (sigma, c) in &self.coeffs[i] {
                let digits = sigma.digits();
                let ok = (0..self.n).all(|j| self.reachable[i + 1][prefix[j] * q + digits[j]]);
                if !ok {
                    continue;
                }
                for j in 0..self.n {
                    prefix[j] = prefix[j] * q + digits[j];
                }
                acc += self.go(i + 1, prefix, weight * c);
                for p in prefix.iter_mut() {
                    *p /= q;
                }
            }
            acc
        }
    }

    let walk = Walk { coeffs: &coeffs, reachable: &reachable, moments, n };
    let mut prefix = vec![0usize; n];
    let value = if reachable[0].first().copied().unwrap_or(false) {
        walk.go(0, &mut prefix, ONE)
    } else {
        ZERO
    };
    Ok(NipResult { value, method: NipMethod::Fourier, stderr: None })
}

/// `⟨f_1, …, f_k⟩_μ − ∏_i E[f_i]`.
pub fn noise_correlation(fs: &[FourierRepresentation], moments: &ColumnMomentTensor) -> Result<Complex64> {
    let nip = nip_fourier(fs, moments)?.value;
    let means: Complex64 = fs.iter().map(FourierRepresentation::mean).product();
    Ok(nip - means)
}

/// Seeded Monte-Carlo estimate of the noisy inner product from `samples`
/// independent `k × n` matrices.
pub fn nip_montecarlo(
    fs: &[DenseFunction],
    mu: &JointDistribution,
    samples: usize,
    seed: u64,
) -> Result<NipResult> {
    let n = check_dense(fs, mu)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let support = mu.support();
    let sampler = WeightedIndex::new(support.iter().map(|(_, m)| *m))
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = mu.sizes();
    let mut draws = Vec::with_capacity(samples);
    let mut offsets = vec![0usize; fs.len()];
    for _ in 0..samples {
        offsets.iter_mut().for_each(|o| *o = 0);
        for _ in 0..n {
            let (tuple, _) = &support[sampler.sample(&mut rng)];
            for (i, o) in offsets.iter_mut().enumerate() {
                *o = *o * q[i] + tuple[i];
            }
        }
        let v: Complex64 = fs.iter().zip(&offsets).map(|(f, &o)| f.values()[o]).product();
        draws.push(v);
    }
    let mean = draws.iter().sum::<Complex64>() / samples as f64;
    let stderr = if samples > 1 {
        let var = draws.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (samples - 1) as f64;
        (var / samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(NipResult { value: mean, method: NipMethod::MonteCarlo, stderr: Some(stderr) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{character_table, standard_fourier_basis, Degree};
    use crate::spaces::{
        ap_distribution, gowers_cube_distribution, xor_subset_distribution, xor_triple_distribution,
        Distribution, FiniteSpace,
    };
    use rand::Rng;

    fn random_dense(rng: &mut ChaCha8Rng, sizes: Vec<usize>) -> DenseFunction {
        DenseFunction::from_fn(sizes, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn sign_identity(n: usize) -> DenseFunction {
        // x ↦ x_0 in ±1 form: position 0 is +1.
        DenseFunction::from_fn(vec![2; n], |x| Complex64::new(if x[0] == 0 { 1.0 } else { -1.0 }, 0.0))
    }

    #[test]
    fn product_distribution_gives_product_of_means() {
        let a = Distribution::new(FiniteSpace::cyclic(2), vec![0.3, 0.7]).unwrap();
        let b = Distribution::new(FiniteSpace::cyclic(3), vec![0.2, 0.5, 0.3]).unwrap();
        let mu = JointDistribution::product(&[a.clone(), b.clone(), a.clone()]).unwrap();
        let setting = NoiseSetting::new(mu.clone(), BasisChoice::Auto).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fs = vec![random_dense(&mut rng, vec![2, 2]), random_dense(&mut rng, vec![3, 3]), random_dense(&mut rng, vec![2, 2])];
        let reps: Vec<_> = fs.iter().enumerate().map(|(i, f)| setting.transform(i, f).unwrap()).collect();
        let means: Complex64 = reps.iter().map(|r| r.mean()).product();
        let brute = nip_bruteforce(&fs, &mu).unwrap().value;
        assert!((brute - means).norm() < 1e-10);
        assert!(setting.noise_correlation(&reps).unwrap().norm() < 1e-10);
    }

    #[test]
    fn xor_triple_sign_characters() {
        let mu = xor_triple_distribution();
        let f = sign_identity(1);
        let fs = vec![f.clone(), f.clone(), f];
        assert!((nip_bruteforce(&fs, &mu).unwrap().value - 1.0).norm() < 1e-15);
        let setting = NoiseSetting::new(mu, BasisChoice::Auto).unwrap();
        let reps: Vec<_> = fs.iter().enumerate().map(|(i, f)| setting.transform(i, f).unwrap()).collect();
        assert!((setting.nip(&reps).unwrap() - 1.0).norm() < 1e-12);
        assert!((setting.noise_correlation(&reps).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn constants_at_n_zero() {
        let mu = xor_triple_distribution();
        let cs = [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-0.5, 0.5)];
        let fs: Vec<_> = cs.iter().map(|&c| DenseFunction::constant(vec![], c)).collect();
        let expected: Complex64 = cs.iter().product();
        assert!((nip_bruteforce(&fs, &mu).unwrap().value - expected).norm() < 1e-15);
        let setting = NoiseSetting::new(mu, BasisChoice::Auto).unwrap();
        let reps: Vec<_> = cs.iter().map(|&c| FourierRepresentation::constant(vec![], c)).collect();
        assert!((setting.nip(&reps).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn errors_on_bad_shapes() {
        let mu = xor_triple_distribution();
        assert!(nip_bruteforce(&[], &mu).is_err());
        let f = sign_identity(2);
        let g = sign_identity(3);
        assert!(matches!(nip_bruteforce(&[f.clone(), f.clone(), g], &mu), Err(Error::DimensionMismatch(_))));
        assert!(nip_bruteforce(&[f.clone(), f], &mu).is_err());
        let setting = NoiseSetting::new(mu, BasisChoice::Auto).unwrap();
        let bad = FourierRepresentation::zero(vec![3, 3]);
        let ok = setting.one(0, 2);
        assert!(nip_fourier(&[ok.clone(), ok, bad], setting.moments()).is_err());
    }

    #[test]
    fn single_characters_give_moment_product() {
        let setting = NoiseSetting::new(ap_distribution(5, 3).unwrap(), BasisChoice::Auto).unwrap();
        let sigmas = [MultiIndex(vec![1, 2]), MultiIndex(vec![3, 1]), MultiIndex(vec![1, 0])];
        let reps: Vec<_> = sigmas.iter().enumerate().map(|(i, s)| setting.character(i, s)).collect();
        let expected: Complex64 = (0..2)
            .map(|j| setting.moments().get(&[sigmas[0].0[j], sigmas[1].0[j], sigmas[2].0[j]]))
            .product();
        assert!((setting.nip(&reps).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn moment_tensor_vanishes_on_low_weight_patterns() {
        for mu in [ap_distribution(5, 4).unwrap(), gowers_cube_distribution(3, 2).unwrap(), xor_triple_distribution()] {
            let setting = NoiseSetting::new(mu, BasisChoice::Auto).unwrap();
            let m = setting.moments();
            assert!((m.get(&vec![0; m.k()]) - 1.0).norm() < 1e-12);
            let total: usize = m.sizes().iter().product();
            let mut idx = vec![0usize; m.k()];
            for flat in 0..total {
                let mut rest = flat;
                for i in (0..m.k()).rev() {
                    idx[i] = rest % m.sizes()[i];
                    rest /= m.sizes()[i];
                }
                let w = idx.iter().filter(|&&a| a > 0).count();
                if w == 1 || w == 2 {
                    assert_eq!(m.get(&idx), ZERO, "{idx:?}");
                }
            }
        }
    }

    #[test]
    fn fourier_matches_bruteforce_including_real_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let biased = Distribution::new(FiniteSpace::cyclic(2), vec![0.6, 0.4]).unwrap();
        let mus = vec![
            ap_distribution(3, 3).unwrap(),
            xor_subset_distribution(2, &[vec![0, 1]]).unwrap(),
            gowers_cube_distribution(2, 2).unwrap(),
            JointDistribution::product(&[biased.clone(), biased.clone(), biased]).unwrap(),
        ];
        for mu in mus {
            for choice in [BasisChoice::Auto, BasisChoice::Real] {
                let setting = NoiseSetting::new(mu.clone(), choice).unwrap();
                let n = 2;
                let fs: Vec<_> = mu.sizes().iter().map(|&q| random_dense(&mut rng, vec![q; n])).collect();
                let reps: Vec<_> = fs.iter().enumerate().map(|(i, f)| setting.transform(i, f).unwrap()).collect();
                let a = nip_bruteforce(&fs, &mu).unwrap().value;
                let b = setting.nip(&reps).unwrap();
                assert!((a - b).norm() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn real_inputs_real_bases_give_real_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let setting = NoiseSetting::new(ap_distribution(3, 3).unwrap(), BasisChoice::Real).unwrap();
        let fs: Vec<_> = (0..3)
            .map(|_| DenseFunction::from_fn(vec![3; 2], |_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)))
            .collect();
        let reps: Vec<_> = fs.iter().enumerate().map(|(i, f)| setting.transform(i, f).unwrap()).collect();
        assert!(setting.nip(&reps).unwrap().im.abs() < 1e-9);
    }

    #[test]
    fn pairwise_vanishing_for_weight_two_columns() {
        let setting = NoiseSetting::new(ap_distribution(5, 3).unwrap(), BasisChoice::Auto).unwrap();
        // Coordinate 0 carries a nonzero digit in exactly two functions.
        let reps = vec![
            setting.character(0, &MultiIndex(vec![1, 1])),
            setting.character(1, &MultiIndex(vec![2, 1])),
            setting.character(2, &MultiIndex(vec![0, 1])),
        ];
        assert!(setting.nip(&reps).unwrap().norm() < 1e-10);
    }

    #[test]
    fn multilinearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let setting = NoiseSetting::new(gowers_cube_distribution(2, 2).unwrap(), BasisChoice::Auto).unwrap();
        let n = 2;
        let rand_rep = |rng: &mut ChaCha8Rng, i: usize| setting.transform(i, &random_dense(rng, vec![2; n])).unwrap();
        let fs: Vec<_> = (0..4).map(|i| rand_rep(&mut rng, i)).collect();
        let g = rand_rep(&mut rng, 1);
        let c = Complex64::new(0.7, -0.3);
        let mut mixed = fs.clone();
        mixed[1] = fs[1].add(&g.scale(c)).unwrap();
        let mut only_g = fs.clone();
        only_g[1] = g;
        let lhs = setting.nip(&mixed).unwrap();
        let rhs = setting.nip(&fs).unwrap() + c * setting.nip(&only_g).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn montecarlo_point_mass_and_determinism() {
        let mu = JointDistribution::new(
            vec![FiniteSpace::cyclic(2), FiniteSpace::cyclic(2)],
            vec![(vec![1, 0], 1.0)],
        )
        .unwrap();
        let f = DenseFunction::from_fn(vec![2; 3], |x| Complex64::new(x.iter().sum::<usize>() as f64 + 1.0, 0.0));
        let fs = vec![f.clone(), f];
        let exact = nip_bruteforce(&fs, &mu).unwrap().value;
        let mc = nip_montecarlo(&fs, &mu, 100, 9).unwrap();
        assert!((mc.value - exact).norm() < 1e-12);
        assert_eq!(mc.stderr, Some(0.0));
        assert!(nip_montecarlo(&fs, &mu, 0, 9).is_err());

        let mu = ap_distribution(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let fs: Vec<_> = (0..3).map(|_| random_dense(&mut rng, vec![3; 2])).collect();
        let a = nip_montecarlo(&fs, &mu, 1000, 42).unwrap();
        let b = nip_montecarlo(&fs, &mu, 1000, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn montecarlo_within_four_stderr() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for (t, mu) in [ap_distribution(3, 3).unwrap(), xor_triple_distribution(), gowers_cube_distribution(2, 2).unwrap()]
            .into_iter()
            .enumerate()
        {
            let fs: Vec<_> = mu.sizes().iter().map(|&q| random_dense(&mut rng, vec![q; 2])).collect();
            let exact = nip_bruteforce(&fs, &mu).unwrap().value;
            let mc = nip_montecarlo(&fs, &mu, 100_000, 1000 + t as u64).unwrap();
            assert!((mc.value - exact).norm() <= 4.0 * mc.stderr.unwrap(), "{} vs {exact}", mc.value);
        }
    }

    #[test]
    fn character_tables_agree_with_expansions() {
        let setting = NoiseSetting::new(ap_distribution(3, 3).unwrap(), BasisChoice::Auto).unwrap();
        let sigma = MultiIndex(vec![2, 1]);
        let table = character_table(&sigma, &vec![standard_fourier_basis(3); 2]).unwrap();
        assert_eq!(setting.transform(0, &table).unwrap().degree(), Degree::Finite(2));
    }
}
