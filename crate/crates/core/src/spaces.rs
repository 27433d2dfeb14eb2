//! Finite probability spaces and joint column distributions.
//!
//! Atoms are addressed by their 0-based position in a [`FiniteSpace`]; the
//! labels are only carried along for display. A [`JointDistribution`] is the
//! law of one column of the `k × n` random matrix whose rows are fed to the
//! `k` functions of a noisy inner product. It is stored sparsely over its
//! support, so the arithmetic-progression law over `Z_p^k` costs `p²` entries
//! rather than `p^k`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Mass sums must be within this of 1 for in-memory constructions.
pub const MASS_TOLERANCE: f64 = 1e-9;
/// Looser mass tolerance applied to parsed distribution files.
pub const FILE_MASS_TOLERANCE: f64 = 1e-6;
/// Default tolerance for independence checks.
pub const INDEPENDENCE_TOLERANCE: f64 = 1e-9;

/// A finite set of atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    atoms: Vec<String>,
}

impl FiniteSpace {
    pub fn new(atoms: Vec<String>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("a finite space needs at least one atom".into()));
        }
        let mut seen = atoms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != atoms.len() {
            return Err(Error::InvalidArgument("atoms must be distinct".into()));
        }
        Ok(Self { atoms })
    }

    /// `Z_q` with atoms labelled `0..q`.
    pub fn cyclic(q: usize) -> Self {
        assert!(q >= 1, "a finite space needs at least one atom");
        Self { atoms: (0..q).map(|a| a.to_string()).collect() }
    }

    /// `{+1, -1}`, with `+1` at position 0 so that the standard character of
    /// `Z_2` is the identity map `x ↦ x`.
    pub fn signs() -> Self {
        Self { atoms: vec!["+1".into(), "-1".into()] }
    }

    pub fn size(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }
}

/// A probability distribution on a [`FiniteSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    space: FiniteSpace,
    mass: Vec<f64>,
}

impl Distribution {
    pub fn new(space: FiniteSpace, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != space.size() {
            return Err(Error::DimensionMismatch(format!(
                "{} masses for a space of {} atoms",
                mass.len(),
                space.size()
            )));
        }
        check_masses(mass.iter().copied(), MASS_TOLERANCE)?;
        Ok(Self { space, mass })
    }

    pub fn uniform(space: FiniteSpace) -> Self {
        let q = space.size();
        Self { space, mass: vec![1.0 / q as f64; q] }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Minimum strictly positive atom probability, `α(ν)`.
    pub fn min_atom_alpha(&self) -> f64 {
        self.mass.iter().copied().filter(|&m| m > 0.0).fold(1.0, f64::min)
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        let u = 1.0 / self.size() as f64;
        self.mass.iter().all(|m| (m - u).abs() <= tol)
    }
}

/// Free-function form of [`Distribution::min_atom_alpha`].
pub fn min_atom_alpha(nu: &Distribution) -> f64 {
    nu.min_atom_alpha()
}

/// A distribution on `Ω_1 × … × Ω_k`, stored over its support.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    spaces: Vec<FiniteSpace>,
    support: Vec<(Vec<usize>, f64)>,
}

impl JointDistribution {
    /// Builds a joint distribution, merging duplicate tuples by adding mass
    /// and dropping zero-mass tuples. Support is kept in lexicographic order.
    pub fn new(spaces: Vec<FiniteSpace>, points: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        Self::with_tolerance(spaces, points, MASS_TOLERANCE)
    }

    pub fn with_tolerance(
        spaces: Vec<FiniteSpace>,
        points: Vec<(Vec<usize>, f64)>,
        tol: f64,
    ) -> Result<Self> {
        if spaces.is_empty() {
            return Err(Error::InvalidDistribution("need at least one component".into()));
        }
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (tuple, m) in points {
            if tuple.len() != spaces.len() {
                return Err(Error::InvalidDistribution(format!(
                    "tuple of length {} for {} components",
                    tuple.len(),
                    spaces.len()
                )));
            }
            for (i, (&a, s)) in tuple.iter().zip(&spaces).enumerate() {
                if a >= s.size() {
                    return Err(Error::InvalidDistribution(format!(
                        "atom {a} not in component {i} of size {}",
                        s.size()
                    )));
                }
            }
            if !(m >= 0.0) {
                return Err(Error::InvalidDistribution(format!("negative or NaN mass {m}")));
            }
            *merged.entry(tuple).or_insert(0.0) += m;
        }
        check_masses(merged.values().copied(), tol)?;
        let support = merged.into_iter().filter(|(_, m)| *m > 0.0).collect();
        Ok(Self { spaces, support })
    }

    /// Product of independent marginals.
    pub fn product(marginals: &[Distribution]) -> Result<Self> {
        let spaces: Vec<FiniteSpace> = marginals.iter().map(|m| m.space().clone()).collect();
        let mut points = vec![(Vec::new(), 1.0)];
        for m in marginals {
            let mut next = Vec::with_capacity(points.len() * m.size());
            for (tuple, w) in &points {
                for (a, &ma) in m.mass().iter().enumerate() {
                    if ma > 0.0 {
                        let mut t: Vec<usize> = tuple.clone();
                        t.push(a);
                        next.push((t, w * ma));
                    }
                }
            }
            points = next;
        }
        Self::new(spaces, points)
    }

    /// Number of components `k`.
    pub fn k(&self) -> usize {
        self.spaces.len()
    }

    pub fn spaces(&self) -> &[FiniteSpace] {
        &self.spaces
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.spaces.iter().map(FiniteSpace::size).collect()
    }

    pub fn support(&self) -> &[(Vec<usize>, f64)] {
        &self.support
    }

    /// Marginal law of component `i` (0-based).
    pub fn marginal(&self, i: usize) -> Result<Distribution> {
        if i >= self.k() {
            return Err(Error::IndexOutOfRange { index: i, len: self.k() });
        }
        let mut mass = vec![0.0; self.spaces[i].size()];
        for (tuple, m) in &self.support {
            mass[tuple[i]] += m;
        }
        Ok(Distribution { space: self.spaces[i].clone(), mass })
    }

    pub fn marginals(&self) -> Vec<Distribution> {
        (0..self.k()).map(|i| self.marginal(i).expect("index in range")).collect()
    }

    /// `min_i α(μ_i)`.
    pub fn alpha(&self) -> f64 {
        self.marginals().iter().map(Distribution::min_atom_alpha).fold(1.0, f64::min)
    }

    /// Largest component alphabet size.
    pub fn max_alphabet(&self) -> usize {
        self.spaces.iter().map(FiniteSpace::size).max().unwrap_or(1)
    }

    pub fn is_balanced(&self, tol: f64) -> bool {
        self.marginals().iter().all(|m| m.is_uniform(tol))
    }

    /// Exhaustively checks that every `r`-subset of components has a joint
    /// marginal equal to the product of its single-coordinate marginals.
    pub fn is_r_wise_independent(&self, r: usize, tol: f64) -> bool {
        if r == 0 || r > self.k() {
            return false;
        }
        let marginals = self.marginals();
        for subset in combinations(self.k(), r) {
            let sizes: Vec<usize> = subset.iter().map(|&i| self.spaces[i].size()).collect();
            let total: usize = sizes.iter().product();
            let mut joint = vec![0.0; total];
            for (tuple, m) in &self.support {
                let idx = subset.iter().zip(&sizes).fold(0, |acc, (&i, &s)| acc * s + tuple[i]);
                joint[idx] += m;
            }
            for (flat, &observed) in joint.iter().enumerate() {
                let mut rest = flat;
                let mut expected = 1.0;
                for (pos, &i) in subset.iter().enumerate().rev() {
                    let a = rest % sizes[pos];
                    rest /= sizes[pos];
                    expected *= marginals[i].mass()[a];
                }
                if (observed - expected).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_pairwise_independent(&self) -> bool {
        self.k() < 2 || self.is_r_wise_independent(2, INDEPENDENCE_TOLERANCE)
    }

    /// Writes the text format: `k`, the alphabet sizes, then one
    /// `a_1 … a_k mass` line per support point.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.k()).unwrap();
        let sizes: Vec<String> = self.sizes().iter().map(usize::to_string).collect();
        writeln!(out, "{}", sizes.join(" ")).unwrap();
        for (tuple, m) in &self.support {
            for a in tuple {
                write!(out, "{a} ").unwrap();
            }
            writeln!(out, "{m:.17e}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, k_text) = lines.next().ok_or(Error::Parse { line: 1, message: "missing k".into() })?;
        let k: usize = parse_token(k_text, line)?;
        let (line, sizes_text) = lines
            .next()
            .ok_or(Error::Parse { line: line + 1, message: "missing alphabet sizes".into() })?;
        let sizes: Vec<usize> =
            sizes_text.split_whitespace().map(|t| parse_token(t, line)).collect::<Result<_>>()?;
        if sizes.len() != k || sizes.contains(&0) {
            return Err(Error::Parse { line, message: format!("expected {k} positive alphabet sizes") });
        }
        let mut points = Vec::new();
        for (line, text) in lines {
            let tokens: Vec<&str> = text.split_whitespace().collect();
            if tokens.len() != k + 1 {
                return Err(Error::Parse { line, message: format!("expected {} fields", k + 1) });
            }
            let tuple: Vec<usize> =
                tokens[..k].iter().map(|t| parse_token(t, line)).collect::<Result<_>>()?;
            let mass: f64 = parse_token(tokens[k], line)?;
            points.push((tuple, mass));
        }
        let spaces = sizes.into_iter().map(FiniteSpace::cyclic).collect();
        Self::with_tolerance(spaces, points, FILE_MASS_TOLERANCE)
    }
}

fn parse_token<T: std::str::FromStr>(token: &str, line: usize) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("cannot parse `{token}`") })
}

fn check_masses(masses: impl Iterator<Item = f64>, tol: f64) -> Result<()> {
    let mut total = 0.0;
    for m in masses {
        if !(m >= 0.0) {
            return Err(Error::InvalidDistribution(format!("negative or NaN mass {m}")));
        }
        total += m;
    }
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
    }
    Ok(())
}

/// All `r`-subsets of `0..k` in lexicographic order.
pub(crate) fn combinations(k: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            if k - i < r - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, k, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, r, &mut Vec::with_capacity(r), &mut out);
    out
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Uniform law of `(1·x + y, 2·x + y, …, k·x + y) mod p` over `x, y ∈ Z_p`.
///
/// Requires `3 ≤ k ≤ p` with `p` prime; the boundary `k = p` is accepted.
pub fn ap_distribution(p: usize, k: usize) -> Result<JointDistribution> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if k < 3 || k > p {
        return Err(Error::Precondition(format!("need 3 <= k <= p, got k = {k}, p = {p}")));
    }
    let w = 1.0 / (p * p) as f64;
    let mut points = Vec::with_capacity(p * p);
    for x in 0..p {
        for y in 0..p {
            let tuple = (1..=k).map(|i| (i * x + y) % p).collect();
            points.push((tuple, w));
        }
    }
    JointDistribution::new(vec![FiniteSpace::cyclic(p); k], points)
}

/// Law of the `2^d` cube vertices `X_S = x + Σ_{i ∉ S} y_i` over
/// `x, y_1, …, y_d ∈ Z_p`.
///
/// Component `S` sits at position `Σ_{i ∈ S} 2^i` (bit `i` set iff direction
/// `i` belongs to `S`), so position 0 is `S = ∅` and position `2^d − 1` is
/// `S = [d]`, the bare base point.
pub fn gowers_cube_distribution(p: usize, d: usize) -> Result<JointDistribution> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if d == 0 {
        return Err(Error::Precondition("cube dimension must be at least 1".into()));
    }
    let k = 1usize << d;
    let seeds = p.pow(d as u32 + 1);
    let w = 1.0 / seeds as f64;
    let mut points = Vec::with_capacity(seeds);
    let mut seed = vec![0usize; d + 1];
    for _ in 0..seeds {
        let tuple = (0..k)
            .map(|s| {
                let mut v = seed[0];
                for i in 0..d {
                    if s & (1 << i) == 0 {
                        v += seed[i + 1];
                    }
                }
                v % p
            })
            .collect();
        points.push((tuple, w));
        for digit in seed.iter_mut() {
            *digit += 1;
            if *digit < p {
                break;
            }
            *digit = 0;
        }
    }
    JointDistribution::new(vec![FiniteSpace::cyclic(p); k], points)
}

/// Uniform law over the four sign triples `(x, y, z) ∈ {±1}³` with `xyz = 1`.
pub fn xor_triple_distribution() -> JointDistribution {
    // Position 0 is +1, position 1 is -1, so xyz = 1 iff the positions xor to 0.
    let points = (0..2usize)
        .flat_map(|a| (0..2usize).map(move |b| (vec![a, b, a ^ b], 0.25)))
        .collect();
    JointDistribution::new(vec![FiniteSpace::signs(); 3], points).expect("valid construction")
}

/// First `m` coordinates are independent uniform bits; one further coordinate
/// per subset holds the mod-2 sum of the listed bits (0-based bit indices).
pub fn xor_subset_distribution(m: usize, subsets: &[Vec<usize>]) -> Result<JointDistribution> {
    for s in subsets {
        if s.is_empty() {
            return Err(Error::InvalidArgument("subsets must be nonempty".into()));
        }
        if let Some(&b) = s.iter().find(|&&b| b >= m) {
            return Err(Error::IndexOutOfRange { index: b, len: m });
        }
    }
    let mut normalized: Vec<Vec<usize>> = subsets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s
        })
        .collect();
    normalized.sort();
    if normalized.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("subsets must be distinct".into()));
    }
    let k = m + subsets.len();
    if k == 0 {
        return Err(Error::InvalidArgument("distribution needs at least one coordinate".into()));
    }
    let w = 1.0 / (1u64 << m) as f64;
    let points = (0..1usize << m)
        .map(|bits| {
            let mut tuple: Vec<usize> = (0..m).map(|b| (bits >> b) & 1).collect();
            for s in subsets {
                tuple.push(s.iter().fold(0, |acc, &b| acc ^ ((bits >> b) & 1)));
            }
            (tuple, w)
        })
        .collect();
    JointDistribution::new(vec![FiniteSpace::cyclic(2); k], points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_uniform(d: &Distribution) {
        assert!(d.is_uniform(1e-12), "{:?}", d.mass());
    }

    #[test]
    fn marginal_of_product_is_factor() {
        let bit = Distribution::uniform(FiniteSpace::cyclic(2));
        let mu = JointDistribution::product(&[bit.clone(), bit]).unwrap();
        assert_uniform(&mu.marginal(0).unwrap());
        assert!(matches!(mu.marginal(2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn marginal_of_point_mass() {
        let mu = JointDistribution::new(
            vec![FiniteSpace::cyclic(3), FiniteSpace::cyclic(4)],
            vec![(vec![2, 1], 1.0)],
        )
        .unwrap();
        assert_eq!(mu.marginal(1).unwrap().mass(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn alpha_ignores_zero_atoms() {
        let q4 = Distribution::uniform(FiniteSpace::cyclic(4));
        assert_eq!(q4.min_atom_alpha(), 0.25);
        let biased = Distribution::new(FiniteSpace::cyclic(2), vec![0.75, 0.25]).unwrap();
        assert_eq!(min_atom_alpha(&biased), 0.25);
        let padded = Distribution::new(FiniteSpace::cyclic(3), vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(padded.min_atom_alpha(), 0.5);
        let point = Distribution::new(FiniteSpace::cyclic(1), vec![1.0]).unwrap();
        assert_eq!(point.min_atom_alpha(), 1.0);
    }

    #[test]
    fn ap_small_cases() {
        let mu = ap_distribution(3, 3).unwrap();
        assert_eq!(mu.support().len(), 9);
        assert!(mu.support().iter().all(|(_, m)| (m - 1.0 / 9.0).abs() < 1e-15));
        assert!(ap_distribution(5, 3).unwrap().is_r_wise_independent(2, 1e-9));
        assert!(ap_distribution(3, 4).is_err());
        assert!(matches!(ap_distribution(4, 3), Err(Error::NotPrime(4))));
    }

    #[test]
    fn ap_pairwise_for_small_primes() {
        for p in [3, 5, 7] {
            for k in 3..=p {
                let mu = ap_distribution(p, k).unwrap();
                assert!(mu.is_r_wise_independent(2, 1e-9), "p={p} k={k}");
                for m in mu.marginals() {
                    assert_uniform(&m);
                }
            }
        }
    }

    #[test]
    fn cube_d1_is_uniform_pair() {
        let mu = gowers_cube_distribution(2, 1).unwrap();
        // Position 0 is S = ∅ (x + y), position 1 is S = {0} (x).
        assert_eq!(mu.support().len(), 4);
        assert!(mu.support().iter().all(|(_, m)| (m - 0.25).abs() < 1e-15));
    }

    #[test]
    fn cube_three_wise_for_d_at_least_two() {
        for p in [2, 3] {
            for d in [2, 3] {
                let mu = gowers_cube_distribution(p, d).unwrap();
                assert!(mu.is_r_wise_independent(3, 1e-9), "p={p} d={d}");
                for m in mu.marginals() {
                    assert_uniform(&m);
                }
            }
        }
        // Four vertices of a 2-cube satisfy a linear relation.
        assert!(!gowers_cube_distribution(2, 2).unwrap().is_r_wise_independent(4, 1e-9));
    }

    #[test]
    fn xor_triple_properties() {
        let mu = xor_triple_distribution();
        assert_eq!(mu.support().len(), 4);
        assert!(mu.support().iter().all(|(t, m)| *m == 0.25 && t[0] ^ t[1] == t[2]));
        assert!(mu.is_r_wise_independent(2, 1e-9));
        assert!(!mu.is_r_wise_independent(3, 1e-9));
        let z = mu.marginal(1).unwrap();
        assert_eq!(z.space().atoms(), &["+1".to_string(), "-1".to_string()]);
        assert_uniform(&z);
    }

    #[test]
    fn xor_subset_cases() {
        let mu = xor_subset_distribution(2, &[vec![0, 1]]).unwrap();
        assert!(mu.support().iter().all(|(t, _)| t[2] == t[0] ^ t[1]));
        assert!(mu.is_pairwise_independent());

        let plain = xor_subset_distribution(2, &[]).unwrap();
        let bit = Distribution::uniform(FiniteSpace::cyclic(2));
        assert_eq!(plain, JointDistribution::product(&[bit.clone(), bit]).unwrap());

        let copy = xor_subset_distribution(2, &[vec![0]]).unwrap();
        assert!(!copy.is_pairwise_independent());

        assert!(xor_subset_distribution(2, &[vec![]]).is_err());
        assert!(xor_subset_distribution(3, &[vec![0, 1], vec![1, 0]]).is_err());
    }

    #[test]
    fn product_is_fully_independent() {
        let a = Distribution::new(FiniteSpace::cyclic(2), vec![0.3, 0.7]).unwrap();
        let b = Distribution::new(FiniteSpace::cyclic(3), vec![0.2, 0.5, 0.3]).unwrap();
        let mu = JointDistribution::product(&[a.clone(), b, a]).unwrap();
        assert!(mu.is_r_wise_independent(3, 1e-12));
        assert!((mu.alpha() - 0.2).abs() < 1e-15);
        assert_eq!(mu.max_alphabet(), 3);
        assert!(!mu.is_balanced(1e-9));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let s = vec![FiniteSpace::cyclic(2)];
        assert!(JointDistribution::new(s.clone(), vec![(vec![0], 0.5)]).is_err());
        assert!(JointDistribution::new(s.clone(), vec![(vec![2], 1.0)]).is_err());
        assert!(JointDistribution::new(s.clone(), vec![(vec![0], -0.5), (vec![1], 1.5)]).is_err());
        // Duplicates merge.
        let mu = JointDistribution::new(s, vec![(vec![0], 0.5), (vec![0], 0.5)]).unwrap();
        assert_eq!(mu.support(), &[(vec![0], 1.0)]);
        assert!(FiniteSpace::new(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn text_format_round_trip_and_tolerance() {
        let mu = ap_distribution(5, 4).unwrap();
        let back = JointDistribution::from_text(&mu.to_text()).unwrap();
        assert_eq!(back.support().len(), mu.support().len());
        for ((a, ma), (b, mb)) in back.support().iter().zip(mu.support()) {
            assert_eq!(a, b);
            assert!((ma - mb).abs() < 1e-15);
        }

        let ok = "2\n2 2\n0 0 0.5\n1 1 0.5000001\n";
        assert!(JointDistribution::from_text(ok).is_ok());
        let bad = "2\n2 2\n0 0 0.5\n1 1 0.51\n";
        assert!(JointDistribution::from_text(bad).is_err());
        let short = "2\n2 2\n0 0.5\n";
        assert!(matches!(JointDistribution::from_text(short), Err(Error::Parse { line: 3, .. })));
    }
}
