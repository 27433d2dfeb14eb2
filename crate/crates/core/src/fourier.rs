//! Orthonormal bases of `L²(Ω, μ)` and sparse Fourier expansions on
//! product spaces `Ω_1 × … × Ω_n`.
//!
//! Dense tables are laid out in lexicographic point order with coordinate 0
//! most significant. Multi-index digits select one basis function per
//! coordinate; digit 0 is always the constant function.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spaces::{Distribution, FiniteSpace};

/// Default magnitude below which coefficients are not stored.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Residuals shorter than this are treated as linearly dependent during
/// Gram–Schmidt.
const DEPENDENCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Characters `x ↦ exp(2πi·xy/q)` of `Z_q` under the uniform measure.
    Standard,
    /// Real basis from Gram–Schmidt on atom indicators.
    GramSchmidt,
}

/// How to pick a basis for a marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisChoice {
    /// Standard characters for uniform marginals, Gram–Schmidt otherwise.
    #[default]
    Auto,
    /// Gram–Schmidt everywhere (real-valued bases).
    Real,
}

/// An orthonormal basis `χ_0 ≡ 1, χ_1, …` of `L²(Ω, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    measure: Distribution,
    /// `functions[a][x] = χ_a(x)`.
    functions: Vec<Vec<Complex64>>,
    kind: BasisKind,
}

impl OrthonormalBasis {
    /// Standard complex characters of `Z_q` under the uniform measure.
    pub fn standard(q: usize) -> Self {
        let measure = Distribution::uniform(FiniteSpace::cyclic(q));
        Self::standard_on(measure)
    }

    fn standard_on(measure: Distribution) -> Self {
        let q = measure.size();
        let functions = (0..q)
            .map(|y| {
                (0..q)
                    .map(|x| {
                        let r = (x * y) % q;
                        if r == 0 {
                            Complex64::new(1.0, 0.0)
                        } else if 2 * r == q {
                            Complex64::new(-1.0, 0.0)
                        } else {
                            Complex64::from_polar(1.0, 2.0 * PI * r as f64 / q as f64)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { measure, functions, kind: BasisKind::Standard }
    }

    /// Real orthonormal basis obtained by orthonormalising the constant
    /// function followed by the atom indicators in atom order. Each `χ_a` is
    /// signed so that its last nonzero value is positive. Atoms of zero mass
    /// carry value 0 in every basis function, and a measure with `m` atoms of
    /// positive mass yields `m` functions.
    pub fn gram_schmidt(measure: &Distribution) -> Self {
        let q = measure.size();
        let w = measure.mass();
        let inner = |f: &[f64], g: &[f64]| -> f64 { (0..q).map(|x| w[x] * f[x] * g[x]).sum() };
        let live: Vec<usize> = (0..q).filter(|&x| w[x] > 0.0).collect();
        let one: Vec<f64> = (0..q).map(|x| if w[x] > 0.0 { 1.0 } else { 0.0 }).collect();
        let mut basis: Vec<Vec<f64>> = vec![one];
        for &atom in &live {
            if basis.len() == live.len() {
                break;
            }
            let mut v: Vec<f64> = (0..q).map(|x| if x == atom { 1.0 } else { 0.0 }).collect();
            // Two passes keep the result orthogonal to rounding.
            for _ in 0..2 {
                for b in &basis {
                    let c = inner(&v, b);
                    for x in 0..q {
                        v[x] -= c * b[x];
                    }
                }
            }
            let norm = inner(&v, &v).sqrt();
            if norm < DEPENDENCE_TOLERANCE {
                continue;
            }
            let last = live.iter().rev().map(|&x| v[x]).find(|c| c.abs() > DEPENDENCE_TOLERANCE);
            let sign = if last.unwrap_or(1.0) < 0.0 { -1.0 } else { 1.0 };
            basis.push(v.iter().map(|c| sign * c / norm).collect());
        }
        let functions =
            basis.into_iter().map(|f| f.into_iter().map(|c| Complex64::new(c, 0.0)).collect()).collect();
        Self { measure: measure.clone(), functions, kind: BasisKind::GramSchmidt }
    }

    /// Basis for a marginal under the given choice.
    pub fn for_measure(measure: &Distribution, choice: BasisChoice) -> Self {
        match choice {
            BasisChoice::Auto if measure.is_uniform(1e-12) => Self::standard_on(measure.clone()),
            _ => Self::gram_schmidt(measure),
        }
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Number of atoms of the underlying space.
    pub fn atoms(&self) -> usize {
        self.measure.size()
    }

    pub fn measure(&self) -> &Distribution {
        &self.measure
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn value(&self, a: usize, x: usize) -> Complex64 {
        self.functions[a][x]
    }

    pub fn function(&self, a: usize) -> &[Complex64] {
        &self.functions[a]
    }

    /// `⟨χ_a, χ_b⟩_ν`.
    pub fn inner(&self, a: usize, b: usize) -> Complex64 {
        let w = self.measure.mass();
        (0..self.atoms()).map(|x| self.functions[a][x] * self.functions[b][x].conj() * w[x]).sum()
    }

    /// `max_a max_x |χ_a(x)|`.
    pub fn sup_norm(&self) -> f64 {
        self.functions.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Free-function forms mirroring the basis constructors.
pub fn standard_fourier_basis(q: usize) -> OrthonormalBasis {
    OrthonormalBasis::standard(q)
}

pub fn gram_schmidt_basis(measure: &Distribution) -> OrthonormalBasis {
    OrthonormalBasis::gram_schmidt(measure)
}

/// A multi-index `σ`: one basis digit per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Unit index with digit `a` at coordinate `j`.
    pub fn unit(n: usize, j: usize, a: usize) -> Self {
        let mut digits = vec![0; n];
        digits[j] = a;
        Self(digits)
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Coordinates with a nonzero digit, `S(σ)`.
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &d)| d > 0).map(|(j, _)| j).collect()
    }

    /// `|σ| = |S(σ)|`.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&d| d > 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Fourier degree; `Bottom` is the degree of the zero function and sorts
/// below every finite degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    Bottom,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::Bottom => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Bottom => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// A function on `Ω_1 × … × Ω_n` as a dense table.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFunction {
    sizes: Vec<usize>,
    values: Vec<Complex64>,
}

impl DenseFunction {
    pub fn new(sizes: Vec<usize>, values: Vec<Complex64>) -> Result<Self> {
        let len: usize = sizes.iter().product();
        if values.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {len} points",
                values.len()
            )));
        }
        Ok(Self { sizes, values })
    }

    pub fn constant(sizes: Vec<usize>, c: Complex64) -> Self {
        let len = sizes.iter().product();
        Self { sizes, values: vec![c; len] }
    }

    /// Tabulates `f` at every point (digits in lexicographic order).
    pub fn from_fn(sizes: Vec<usize>, mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let len: usize = sizes.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut point = vec![0usize; sizes.len()];
        for _ in 0..len {
            values.push(f(&point));
            for j in (0..sizes.len()).rev() {
                point[j] += 1;
                if point[j] < sizes[j] {
                    break;
                }
                point[j] = 0;
            }
        }
        Self { sizes, values }
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at a point given by its digits.
    pub fn at(&self, point: &[usize]) -> Complex64 {
        let idx = point.iter().zip(&self.sizes).fold(0, |acc, (&x, &s)| acc * s + x);
        self.values[idx]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { sizes: self.sizes.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Text format: `n` and the sizes on the first line, then one `re im`
    /// line per point.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write!(out, "{}", self.n()).unwrap();
        for s in &self.sizes {
            write!(out, " {s}").unwrap();
        }
        out.push('\n');
        for v in &self.values {
            writeln!(out, "{:.17e} {:.17e}", v.re, v.im).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(Error::Parse { line: 1, message: "missing header".into() })?;
        let mut tokens = header.split_whitespace();
        let n: usize = parse(tokens.next().unwrap_or(""), line)?;
        let sizes: Vec<usize> = tokens.map(|t| parse(t, line)).collect::<Result<_>>()?;
        if sizes.len() != n || sizes.contains(&0) {
            return Err(Error::Parse { line, message: format!("expected {n} positive alphabet sizes") });
        }
        let mut values = Vec::new();
        for (line, text) in lines {
            let parts: Vec<&str> = text.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse { line, message: "expected `re im`".into() });
            }
            values.push(Complex64::new(parse(parts[0], line)?, parse(parts[1], line)?));
        }
        Self::new(sizes, values)
    }
}

fn parse<T: std::str::FromStr>(token: &str, line: usize) -> Result<T> {
    token.parse().map_err(|_| Error::Parse { line, message: format!("cannot parse `{token}`") })
}

/// Sparse Fourier expansion `σ ↦ f̂(σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierRepresentation {
    /// Number of basis functions per coordinate.
    sizes: Vec<usize>,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl FourierRepresentation {
    pub fn zero(sizes: Vec<usize>) -> Self {
        Self { sizes, coeffs: BTreeMap::new() }
    }

    pub fn constant(sizes: Vec<usize>, c: Complex64) -> Self {
        let mut rep = Self::zero(sizes);
        let n = rep.n();
        rep.set(MultiIndex::zero(n), c);
        rep
    }

    /// The single character `χ_σ` with coefficient 1.
    pub fn character(sizes: Vec<usize>, sigma: MultiIndex) -> Self {
        let mut rep = Self::zero(sizes);
        rep.set(sigma, Complex64::new(1.0, 0.0));
        rep
    }

    pub fn from_coefficients(
        sizes: Vec<usize>,
        coeffs: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut rep = Self::zero(sizes);
        for (sigma, c) in coeffs {
            rep.check_index(&sigma)?;
            if c != Complex64::new(0.0, 0.0) {
                *rep.coeffs.entry(sigma).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        Ok(rep)
    }

    fn check_index(&self, sigma: &MultiIndex) -> Result<()> {
        if sigma.n() != self.n() || sigma.0.iter().zip(&self.sizes).any(|(&d, &s)| d >= s) {
            return Err(Error::DimensionMismatch(format!(
                "multi-index {sigma} outside alphabet {:?}",
                self.sizes
            )));
        }
        Ok(())
    }

    /// Sets a coefficient; zero removes the entry.
    pub fn set(&mut self, sigma: MultiIndex, c: Complex64) {
        self.check_index(&sigma).expect("multi-index within alphabet");
        if c == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&sigma);
        } else {
            self.coeffs.insert(sigma, c);
        }
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn coefficient(&self, sigma: &MultiIndex) -> Complex64 {
        self.coeffs.get(sigma).copied().unwrap_or_default()
    }

    /// `E[f] = f̂(0)`.
    pub fn mean(&self) -> Complex64 {
        self.coefficient(&MultiIndex::zero(self.n()))
    }

    /// Stored coefficients in lexicographic multi-index order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    /// `‖f‖₂` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Var[f] = Σ_{σ≠0} |f̂(σ)|²`.
    pub fn variance(&self) -> f64 {
        self.coeffs.iter().filter(|(s, _)| !s.is_zero()).map(|(_, c)| c.norm_sqr()).sum()
    }

    pub fn degree(&self) -> Degree {
        self.coeffs.keys().map(MultiIndex::weight).max().map_or(Degree::Bottom, Degree::Finite)
    }

    /// Keeps the coefficients whose weight satisfies `weight <mode> d`.
    pub fn truncate(&self, mode: Truncation, d: i64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(s, _)| mode.keeps(s.weight() as i64, d))
            .map(|(s, c)| (s.clone(), *c))
            .collect();
        Self { sizes: self.sizes.clone(), coeffs }
    }

    /// `max |f̂(σ)|` over all stored `σ`, or only nonzero `σ`.
    pub fn sup_coefficient(&self, include_zero: bool) -> f64 {
        self.coeffs
            .iter()
            .filter(|(s, _)| include_zero || !s.is_zero())
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// `f − E[f]`.
    pub fn centered(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.remove(&MultiIndex::zero(self.n()));
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|(s, v)| (s.clone(), v * c)).filter(|(_, v)| v.norm() > 0.0).collect();
        Self { sizes: self.sizes.clone(), coeffs }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.sizes != other.sizes {
            return Err(Error::DimensionMismatch("adding expansions on different alphabets".into()));
        }
        let mut out = self.clone();
        for (s, c) in &other.coeffs {
            let v = out.coefficient(s) + c;
            out.set(s.clone(), v);
        }
        Ok(out)
    }

    /// Dump format: one `σ_1 … σ_n re im` line per stored coefficient.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, c) in &self.coeffs {
            for d in s.digits() {
                write!(out, "{d} ").unwrap();
            }
            writeln!(out, "{:.17e} {:.17e}", c.re, c.im).unwrap();
        }
        out
    }

    pub fn from_text(sizes: Vec<usize>, text: &str) -> Result<Self> {
        let n = sizes.len();
        let mut coeffs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != n + 2 {
                return Err(Error::Parse { line: line_no, message: format!("expected {} fields", n + 2) });
            }
            let digits = parts[..n].iter().map(|t| parse(t, line_no)).collect::<Result<_>>()?;
            let c = Complex64::new(parse(parts[n], line_no)?, parse(parts[n + 1], line_no)?);
            coeffs.push((MultiIndex(digits), c));
        }
        Self::from_coefficients(sizes, coeffs)
    }
}

/// Relation used by [`FourierRepresentation::truncate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    AtMost,
    Below,
    Exactly,
    Above,
    AtLeast,
}

impl Truncation {
    fn keeps(self, weight: i64, d: i64) -> bool {
        match self {
            Truncation::AtMost => weight <= d,
            Truncation::Below => weight < d,
            Truncation::Exactly => weight == d,
            Truncation::Above => weight > d,
            Truncation::AtLeast => weight >= d,
        }
    }
}

fn check_bases(sizes: &[usize], bases: &[OrthonormalBasis], atoms: bool) -> Result<()> {
    if sizes.len() != bases.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coordinates but {} bases",
            sizes.len(),
            bases.len()
        )));
    }
    for (j, (&s, b)) in sizes.iter().zip(bases).enumerate() {
        let expected = if atoms { b.atoms() } else { b.len() };
        if s != expected {
            return Err(Error::DimensionMismatch(format!(
                "coordinate {j} has size {s}, basis expects {expected}"
            )));
        }
    }
    Ok(())
}

/// Applies `out[.., a, ..] = Σ_x kernel(a, x) · in[.., x, ..]` along `axis`.
fn apply_axis(
    values: &[Complex64],
    shape: &[usize],
    axis: usize,
    rows: usize,
    kernel: impl Fn(usize, usize) -> Complex64,
) -> Vec<Complex64> {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let cols = shape[axis];
    let mut out = vec![Complex64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        for a in 0..rows {
            for x in 0..cols {
                let k = kernel(a, x);
                if k == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = &values[(o * cols + x) * inner..(o * cols + x + 1) * inner];
                let dst = &mut out[(o * rows + a) * inner..(o * rows + a + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += k * s;
                }
            }
        }
    }
    out
}

/// `f̂(σ) = E[f · conj(χ_σ)]` under the product of the bases' measures.
pub fn transform(
    f: &DenseFunction,
    bases: &[OrthonormalBasis],
    drop_tol: f64,
) -> Result<FourierRepresentation> {
    check_bases(&f.sizes, bases, true)?;
    let mut shape = f.sizes.clone();
    let mut values = f.values.clone();
    for (axis, b) in bases.iter().enumerate() {
        let w = b.measure().mass();
        values = apply_axis(&values, &shape, axis, b.len(), |a, x| b.value(a, x).conj() * w[x]);
        shape[axis] = b.len();
    }
    let out_sizes: Vec<usize> = bases.iter().map(OrthonormalBasis::len).collect();
    let mut coeffs = BTreeMap::new();
    let mut digits = vec![0usize; shape.len()];
    for v in values {
        if v.norm() > drop_tol {
            coeffs.insert(MultiIndex(digits.clone()), v);
        }
        for j in (0..shape.len()).rev() {
            digits[j] += 1;
            if digits[j] < shape[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    Ok(FourierRepresentation { sizes: out_sizes, coeffs })
}

/// `f(x) = Σ_σ f̂(σ) χ_σ(x)`.
pub fn inverse_transform(
    rep: &FourierRepresentation,
    bases: &[OrthonormalBasis],
) -> Result<DenseFunction> {
    check_bases(&rep.sizes, bases, false)?;
    let mut shape = rep.sizes.clone();
    let len: usize = shape.iter().product();
    let mut values = vec![Complex64::new(0.0, 0.0); len];
    for (s, c) in &rep.coeffs {
        let idx = s.0.iter().zip(&shape).fold(0, |acc, (&d, &q)| acc * q + d);
        values[idx] = *c;
    }
    for (axis, b) in bases.iter().enumerate() {
        values = apply_axis(&values, &shape, axis, b.atoms(), |x, a| b.value(a, x));
        shape[axis] = b.atoms();
    }
    DenseFunction::new(shape, values)
}

/// Table of the product character `χ_σ`.
pub fn character_table(sigma: &MultiIndex, bases: &[OrthonormalBasis]) -> Result<DenseFunction> {
    let sizes = bases.iter().map(OrthonormalBasis::len).collect();
    let rep = FourierRepresentation::from_coefficients(sizes, [(sigma.clone(), Complex64::new(1.0, 0.0))])?;
    inverse_transform(&rep, bases)
}

/// `‖f‖_p = (E|f|^p)^{1/p}` under the product of `measures`; `p = ∞` gives
/// the maximum over points of positive mass.
pub fn lp_norm(f: &DenseFunction, p: f64, measures: &[Distribution]) -> Result<f64> {
    if measures.len() != f.n() || measures.iter().zip(&f.sizes).any(|(m, &s)| m.size() != s) {
        return Err(Error::DimensionMismatch("measures do not match function alphabet".into()));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("norm exponent must be positive, got {p}")));
    }
    let mut acc = 0.0f64;
    let mut point = vec![0usize; f.n()];
    for v in &f.values {
        let w: f64 = point.iter().zip(measures).map(|(&x, m)| m.mass()[x]).product();
        if w > 0.0 {
            if p.is_infinite() {
                acc = acc.max(v.norm());
            } else {
                acc += w * v.norm().powf(p);
            }
        }
        for j in (0..f.n()).rev() {
            point[j] += 1;
            if point[j] < f.sizes[j] {
                break;
            }
            point[j] = 0;
        }
    }
    Ok(if p.is_infinite() { acc } else { acc.powf(1.0 / p) })
}

/// Measures carried by a list of bases.
pub fn measures_of(bases: &[OrthonormalBasis]) -> Vec<Distribution> {
    bases.iter().map(|b| b.measure().clone()).collect()
}
