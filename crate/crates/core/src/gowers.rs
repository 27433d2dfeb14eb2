//! Gowers uniformity norms of functions on `Z_p^n`.
//!
//! Cube vertices are indexed by subsets `S ⊆ [d]` as bit masks; vertex `S` is
//! `X + Σ_{i ∉ S} Y_i` and enters the product conjugated iff `|S|` is even
//! (the `C^{|S|+1}` pattern). Conjugating every factor conjugates the average,
//! which is real, so the opposite parity yields the same value; the routes in
//! this module all use the parity above and are checked against each other.

use num_complex::Complex64;

use crate::certify::BoundCertificate;
use crate::correlation::nip_bruteforce;
use crate::error::{Error, Result};
use crate::fourier::{DenseFunction, FourierRepresentation};
use crate::spaces::{ap_distribution, gowers_cube_distribution, is_prime};

/// Default cap on the number of function evaluations for a single route.
pub const ENUMERATION_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GowersRoute {
    Direct,
    Recursive,
    CubeNip,
    U2ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GowersResult {
    pub d: usize,
    /// `‖f‖_{U^d}`.
    pub value: f64,
    /// `‖f‖_{U^d}^{2^d}` before taking the root.
    pub raw: Complex64,
    pub route: GowersRoute,
}

impl GowersResult {
    fn new(d: usize, raw: Complex64, route: GowersRoute) -> Self {
        let value = raw.norm().powf(1.0 / (1u64 << d) as f64);
        Self { d, value, raw, route }
    }
}

/// Point arithmetic on `Z_p^n` for dense tables in lexicographic order.
struct Group {
    p: usize,
    n: usize,
    digits: Vec<Vec<usize>>,
    pow: Vec<usize>,
}

impl Group {
    fn of(f: &DenseFunction) -> Result<Self> {
        let n = f.n();
        let p = f.sizes().first().copied().unwrap_or(2);
        if f.sizes().iter().any(|&s| s != p) {
            return Err(Error::DimensionMismatch(format!("expected Z_p^n, got alphabet {:?}", f.sizes())));
        }
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        let size = p.pow(n as u32);
        let pow: Vec<usize> = (0..n).map(|j| p.pow((n - 1 - j) as u32)).collect();
        let digits = (0..size).map(|x| pow.iter().map(|&w| (x / w) % p).collect()).collect();
        Ok(Self { p, n, digits, pow })
    }

    fn size(&self) -> usize {
        self.digits.len()
    }

    fn add(&self, a: usize, b: usize) -> usize {
        if self.p == 2 {
            return a ^ b;
        }
        let (da, db) = (&self.digits[a], &self.digits[b]);
        (0..self.n).map(|j| ((da[j] + db[j]) % self.p) * self.pow[j]).sum()
    }
}

fn check_cap(required: u128, cap: u128) -> Result<()> {
    if required > cap {
        Err(Error::CapExceeded { required, cap })
    } else {
        Ok(())
    }
}

fn check_order(d: usize) -> Result<()> {
    if d == 0 || d > 16 {
        Err(Error::InvalidArgument(format!("Gowers order must be in 1..=16, got {d}")))
    } else {
        Ok(())
    }
}

/// Exact average of `∏_S C^{|S|+1} f(X + Σ_{i∉S} Y_i)` over all
/// `(X, Y_1, …, Y_d)`; costs `p^{n(d+1)}·2^d` evaluations.
pub fn gowers_direct(f: &DenseFunction, d: usize, cap: u128) -> Result<GowersResult> {
    check_order(d)?;
    let g = Group::of(f)?;
    let size = g.size() as u128;
    check_cap(size.saturating_pow(d as u32 + 1).saturating_mul(1 << d), cap)?;
    let values = f.values();
    let vertices = 1usize << d;
    let full = vertices - 1;
    let mut ys = vec![0usize; d];
    // point[ω] = X + Σ_{i ∈ ω} Y_i for the added-direction set ω = [d] \ S.
    let mut point = vec![0usize; vertices];
    let mut total = Complex64::new(0.0, 0.0);
    let combos = g.size().pow(d as u32);
    for x in 0..g.size() {
        for _ in 0..combos {
            point[0] = x;
            for omega in 1..vertices {
                let low = omega.trailing_zeros() as usize;
                point[omega] = g.add(point[omega & (omega - 1)], ys[low]);
            }
            let mut prod = Complex64::new(1.0, 0.0);
            for (omega, &pt) in point.iter().enumerate() {
                let s = full ^ omega;
                let v = values[pt];
                prod *= if s.count_ones() % 2 == 0 { v.conj() } else { v };
            }
            total += prod;
            for y in ys.iter_mut() {
                *y += 1;
                if *y < g.size() {
                    break;
                }
                *y = 0;
            }
        }
    }
    let raw = total / (size as f64).powi(d as i32 + 1);
    Ok(GowersResult::new(d, raw, GowersRoute::Direct))
}

fn recursive_cost(size: u128, d: usize) -> u128 {
    if d == 1 {
        size
    } else {
        size.saturating_mul(size.saturating_add(recursive_cost(size, d - 1)))
    }
}

/// `‖f‖_{U^d}^{2^d} = E_Y ‖f_Y‖_{U^{d−1}}^{2^{d−1}}` with
/// `f_Y(x) = f(x+Y)·conj(f(x))`, down to `‖g‖_{U^1}^2 = |E g|²`.
pub fn gowers_recursive(f: &DenseFunction, d: usize, cap: u128) -> Result<GowersResult> {
    check_order(d)?;
    let g = Group::of(f)?;
    check_cap(recursive_cost(g.size() as u128, d), cap)?;

    fn raw_power(g: &Group, values: &[Complex64], d: usize) -> Complex64 {
        let size = values.len() as f64;
        if d == 1 {
            let mean = values.iter().sum::<Complex64>() / size;
            return Complex64::new(mean.norm_sqr(), 0.0);
        }
        let mut derivative = vec![Complex64::new(0.0, 0.0); values.len()];
        let mut total = Complex64::new(0.0, 0.0);
        for y in 0..values.len() {
            for (x, slot) in derivative.iter_mut().enumerate() {
                *slot = values[g.add(x, y)] * values[x].conj();
            }
            total += raw_power(g, &derivative, d - 1);
        }
        total / size
    }

    let raw = raw_power(&g, f.values(), d);
    Ok(GowersResult::new(d, raw, GowersRoute::Recursive))
}

/// `‖f‖_{U^2} = (Σ_σ |f̂(σ)|⁴)^{1/4}`; valid for coefficients in the standard
/// character basis of `Z_p^n`.
pub fn u2_closed_form(rep: &FourierRepresentation) -> GowersResult {
    let raw: f64 = rep.iter().map(|(_, c)| c.norm_sqr().powi(2)).sum();
    GowersResult::new(2, Complex64::new(raw, 0.0), GowersRoute::U2ClosedForm)
}

/// The `2^d` functions `g_S = C^{|S|+1} f`, in cube-vertex order.
pub fn cube_functions(f: &DenseFunction, d: usize) -> Vec<DenseFunction> {
    (0..1usize << d).map(|s| if s.count_ones() % 2 == 0 { f.conj() } else { f.clone() }).collect()
}

/// `‖f‖_{U^d}^{2^d}` as the noisy inner product of the `g_S` under the cube
/// law, evaluated by exhaustive enumeration.
pub fn gowers_via_cube_nip(f: &DenseFunction, d: usize, cap: u128) -> Result<GowersResult> {
    check_order(d)?;
    let g = Group::of(f)?;
    let support = (g.p as u128).pow(d as u32 + 1);
    check_cap(support.saturating_pow(g.n as u32).saturating_mul(1 << d), cap)?;
    let mu = gowers_cube_distribution(g.p, d)?;
    let raw = nip_bruteforce(&cube_functions(f, d), &mu)?.value;
    Ok(GowersResult::new(d, raw, GowersRoute::CubeNip))
}

/// Direct route when it fits under the cap, recursive otherwise.
pub fn gowers_norm(f: &DenseFunction, d: usize, cap: u128) -> Result<GowersResult> {
    match gowers_direct(f, d, cap) {
        Err(Error::CapExceeded { .. }) => gowers_recursive(f, d, cap),
        other => other,
    }
}

/// Checks `|E ∏_i f_i(X_i)| ≤ min_i ‖f_i‖_{U^{k−1}}` for `(X_1, …, X_k)` a
/// uniform `k`-term progression in `Z_p^n` and every `|f_i| ≤ 1`.
pub fn check_gowers_inequality(fs: &[DenseFunction], p: usize, tol: f64) -> Result<BoundCertificate> {
    let k = fs.len();
    if k > p {
        return Err(Error::Precondition(format!("progression length {k} exceeds p = {p}")));
    }
    for (i, f) in fs.iter().enumerate() {
        if f.sup_norm() > 1.0 + 1e-9 {
            return Err(Error::Precondition(format!("function {i} is not bounded by 1")));
        }
    }
    let mu = ap_distribution(p, k)?;
    let lhs = nip_bruteforce(fs, &mu)?.value.norm();
    let mut rhs = f64::INFINITY;
    for f in fs {
        rhs = rhs.min(gowers_norm(f, k - 1, ENUMERATION_CAP)?.value);
    }
    Ok(BoundCertificate::new("gowers-inequality", lhs, rhs, tol, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{standard_fourier_basis, transform, MultiIndex, DROP_TOLERANCE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complex(rng: &mut ChaCha8Rng, p: usize, n: usize) -> DenseFunction {
        DenseFunction::from_fn(vec![p; n], |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn quadratic_phase(n: usize) -> DenseFunction {
        DenseFunction::from_fn(vec![2; n], |x| {
            let s: usize = (0..n - 1).map(|i| x[i] * x[i + 1]).sum();
            Complex64::new(if s % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
    }

    #[test]
    fn constant_one_has_unit_norm() {
        let f = DenseFunction::constant(vec![3, 3], Complex64::new(1.0, 0.0));
        for d in 1..=3 {
            assert!((gowers_direct(&f, d, ENUMERATION_CAP).unwrap().value - 1.0).abs() < 1e-12);
            assert!((gowers_recursive(&f, d, ENUMERATION_CAP).unwrap().value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn additive_character_has_unit_norm() {
        let f = DenseFunction::from_fn(vec![2; 3], |x| Complex64::new(if (x[0] + x[2]) % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
        for d in 1..=3 {
            let expected = if d == 1 { 0.0 } else { 1.0 };
            assert!((gowers_direct(&f, d, ENUMERATION_CAP).unwrap().value - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_phase_u3_and_u2() {
        let f = quadratic_phase(8);
        assert!(matches!(gowers_direct(&f, 3, ENUMERATION_CAP), Err(Error::CapExceeded { .. })));
        let u3 = gowers_recursive(&f, 3, ENUMERATION_CAP).unwrap();
        assert!((u3.value - 1.0).abs() < 1e-9);
        let rep = transform(&f, &vec![standard_fourier_basis(2); 8], DROP_TOLERANCE).unwrap();
        let u2 = gowers_recursive(&f, 2, ENUMERATION_CAP).unwrap();
        assert!((u2.raw.re - u2_closed_form(&rep).raw.re).abs() < 1e-9);
        assert!((rep.sup_coefficient(true) - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn mean_zero_has_zero_u1() {
        let f = DenseFunction::from_fn(vec![3, 3], |x| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x[1] as f64 / 3.0));
        assert!(gowers_recursive(&f, 1, ENUMERATION_CAP).unwrap().value < 1e-9);
    }

    #[test]
    fn closed_form_examples() {
        let unit = FourierRepresentation::character(vec![3, 3], MultiIndex(vec![1, 2]));
        assert!((u2_closed_form(&unit).value - 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let two = FourierRepresentation::from_coefficients(
            vec![2, 2],
            [(MultiIndex(vec![1, 0]), Complex64::new(h, 0.0)), (MultiIndex(vec![0, 1]), Complex64::new(h, 0.0))],
        )
        .unwrap();
        assert!((u2_closed_form(&two).value - 0.840_896_415_253_714_6).abs() < 1e-12);
    }

    #[test]
    fn routes_agree_on_random_complex_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &(p, n, d) in &[(2, 1, 1), (2, 2, 2), (3, 1, 2), (3, 2, 2), (2, 2, 3), (3, 1, 3)] {
            let f = random_complex(&mut rng, p, n);
            let a = gowers_direct(&f, d, ENUMERATION_CAP).unwrap();
            let b = gowers_recursive(&f, d, ENUMERATION_CAP).unwrap();
            let c = gowers_via_cube_nip(&f, d, ENUMERATION_CAP).unwrap();
            assert!(a.raw.im.abs() < 1e-9 && a.raw.re > -1e-9);
            assert!((a.raw - b.raw).norm() < 1e-9, "{:?} {:?}", a, b);
            assert!((a.raw - c.raw).norm() < 1e-9, "{:?} {:?}", a, c);
            if d == 2 {
                let rep = transform(&f, &vec![standard_fourier_basis(p); n], 0.0).unwrap();
                assert!((a.value - u2_closed_form(&rep).value).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn scaling_is_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let f = random_complex(&mut rng, 3, 2);
        let c = Complex64::new(-0.4, 1.3);
        for d in 1..=3 {
            let a = gowers_direct(&f, d, ENUMERATION_CAP).unwrap().value;
            let b = gowers_direct(&f.scale(c), d, ENUMERATION_CAP).unwrap().value;
            assert!((b - c.norm() * a).abs() < 1e-9);
        }
    }

    #[test]
    fn gowers_inequality_cases() {
        let ones = vec![DenseFunction::constant(vec![3, 3], Complex64::new(1.0, 0.0)); 3];
        let cert = check_gowers_inequality(&ones, 3, 1e-9).unwrap();
        assert!(cert.holds && (cert.lhs - 1.0).abs() < 1e-12 && (cert.rhs - 1.0).abs() < 1e-12);

        // The same character at every term: Σ_i i ≡ 0 and k ≡ 0 mod 3, so the
        // phase cancels on every progression.
        let chi = DenseFunction::from_fn(vec![3; 2], |x| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x[0] as f64 / 3.0));
        let cert = check_gowers_inequality(&vec![chi; 3], 3, 1e-9).unwrap();
        assert!((cert.lhs - 1.0).abs() < 1e-12 && (cert.rhs - 1.0).abs() < 1e-9 && cert.holds);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let fs: Vec<_> = (0..3)
                .map(|_| DenseFunction::from_fn(vec![3; 2], |_| Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0)))
                .collect();
            assert!(check_gowers_inequality(&fs, 3, 1e-9).unwrap().holds);
        }
        assert!(check_gowers_inequality(&vec![DenseFunction::constant(vec![3], Complex64::new(1.0, 0.0)); 4], 3, 1e-9).is_err());
        assert!(check_gowers_inequality(&vec![DenseFunction::constant(vec![3], Complex64::new(2.0, 0.0)); 3], 3, 1e-9).is_err());
    }

    #[test]
    fn rejects_non_group_alphabets() {
        let f = DenseFunction::constant(vec![4, 4], Complex64::new(1.0, 0.0));
        assert!(matches!(gowers_direct(&f, 2, ENUMERATION_CAP), Err(Error::NotPrime(4))));
        let g = DenseFunction::constant(vec![2, 3], Complex64::new(1.0, 0.0));
        assert!(gowers_recursive(&g, 2, ENUMERATION_CAP).is_err());
    }
}
