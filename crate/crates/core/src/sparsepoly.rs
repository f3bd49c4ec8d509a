//! Sparse integer polynomials and stacked integer coordinate changes.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{IMatrix, QVector, Rational};

/// One term `coeff * prod x_i^e_i`; `exps` is sorted by variable index and
/// holds only positive exponents. The constant term has empty `exps`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coeff: BigInt,
    pub exps: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    fn dense(&self, n: usize) -> Vec<u32> {
        let mut d = vec![0; n];
        for &(i, e) in &self.exps {
            d[i] = e;
        }
        d
    }
}

/// Serialized form of one monomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRepr {
    pub coeff: String,
    #[serde(default)]
    pub exps: BTreeMap<String, u32>,
}

/// Integer polynomial in `n_vars` variables, stored as monomials in graded
/// lexicographic order with distinct exponent maps and nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparsePoly {
    n_vars: usize,
    monomials: Vec<Monomial>,
    max_exp: Vec<u32>,
}

fn graded_lex(n: usize, a: &Monomial, b: &Monomial) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| b.dense(n).cmp(&a.dense(n)))
}

impl SparsePoly {
    /// Builds a polynomial from raw terms, merging duplicates and dropping
    /// zero coefficients. Exponent lists may be unsorted; zero exponents are
    /// ignored.
    pub fn new(n_vars: usize, terms: Vec<(BigInt, Vec<(usize, u32)>)>) -> Result<Self> {
        let mut acc: BTreeMap<Vec<(usize, u32)>, BigInt> = BTreeMap::new();
        for (coeff, exps) in terms {
            let mut e: BTreeMap<usize, u32> = BTreeMap::new();
            for (i, k) in exps {
                if i >= n_vars {
                    return Err(Error::InvalidPolynomial(format!(
                        "variable index {i} out of range for {n_vars} variables"
                    )));
                }
                if k > 0 {
                    *e.entry(i).or_insert(0) += k;
                }
            }
            *acc.entry(e.into_iter().collect()).or_insert_with(BigInt::zero) += coeff;
        }
        let monomials = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exps, coeff)| Monomial { coeff, exps })
            .collect();
        Ok(Self::from_monomials(n_vars, monomials))
    }

    fn from_monomials(n_vars: usize, mut monomials: Vec<Monomial>) -> Self {
        monomials.sort_by(|a, b| graded_lex(n_vars, a, b));
        let mut max_exp = vec![0; n_vars];
        for m in &monomials {
            for &(i, e) in &m.exps {
                max_exp[i] = max_exp[i].max(e);
            }
        }
        SparsePoly { n_vars, monomials, max_exp }
    }

    pub fn zero(n_vars: usize) -> Self {
        Self::from_monomials(n_vars, Vec::new())
    }

    pub fn constant(n_vars: usize, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Self::zero(n_vars);
        }
        Self::from_monomials(n_vars, vec![Monomial { coeff: c, exps: vec![] }])
    }

    pub fn var(n_vars: usize, i: usize) -> Self {
        assert!(i < n_vars);
        Self::from_monomials(n_vars, vec![Monomial { coeff: BigInt::one(), exps: vec![(i, 1)] }])
    }

    /// `sum_i coeffs[i] x_i + c`
    pub fn affine(coeffs: &[BigInt], c: &BigInt) -> Self {
        let n = coeffs.len();
        let mut terms: Vec<_> =
            coeffs.iter().enumerate().map(|(i, a)| (a.clone(), vec![(i, 1)])).collect();
        terms.push((c.clone(), vec![]));
        Self::new(n, terms).expect("indices in range")
    }

    /// Convenience constructor from small-integer terms.
    pub fn from_i64(n_vars: usize, terms: &[(i64, &[(usize, u32)])]) -> Result<Self> {
        Self::new(n_vars, terms.iter().map(|(c, e)| (BigInt::from(*c), e.to_vec())).collect())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn num_monomials(&self) -> usize {
        self.monomials.len()
    }

    pub fn degree(&self) -> u32 {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest coefficient bit length.
    pub fn coeff_bits(&self) -> u64 {
        self.monomials.iter().map(|m| m.coeff.bits()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.monomials.iter().map(|m| m.coeff.abs()).max().unwrap_or_default()
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn constant_term(&self) -> BigInt {
        self.monomials
            .iter()
            .find(|m| m.exps.is_empty())
            .map(|m| m.coeff.clone())
            .unwrap_or_default()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, got: len });
        }
        Ok(())
    }

    fn int_powers(&self, x: &[BigInt]) -> Vec<Vec<BigInt>> {
        x.iter()
            .zip(&self.max_exp)
            .map(|(xi, &k)| {
                let mut p = Vec::with_capacity(k as usize + 1);
                p.push(BigInt::one());
                for j in 1..=k as usize {
                    let next = &p[j - 1] * xi;
                    p.push(next);
                }
                p
            })
            .collect()
    }

    /// Exact value at an integer point.
    pub fn eval_int(&self, x: &[BigInt]) -> Result<BigInt> {
        self.check_dim(x.len())?;
        let pw = self.int_powers(x);
        Ok(self.monomials.iter().fold(BigInt::zero(), |acc, m| {
            acc + m.exps.iter().fold(m.coeff.clone(), |t, &(i, e)| t * &pw[i][e as usize])
        }))
    }

    pub fn eval_i64(&self, x: &[i64]) -> Result<BigInt> {
        let xb: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        self.eval_int(&xb)
    }

    /// Rewrites `x` over a common denominator: returns `(nums, den)` with
    /// `x_i = nums_i / den`.
    fn common_denominator(x: &[Rational]) -> (Vec<BigInt>, BigInt) {
        let den = x.iter().fold(BigInt::one(), |l, xi| l.lcm(xi.denom()));
        let nums = x.iter().map(|xi| xi.numer() * (&den / xi.denom())).collect();
        (nums, den)
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x: &[Rational]) -> Result<Rational> {
        self.check_dim(x.len())?;
        let (nums, den) = Self::common_denominator(x);
        if den.is_one() {
            return Ok(Rational::from_integer(self.eval_int(&nums)?));
        }
        // every term is scaled to degree dmax so one division suffices
        let dmax = self.degree();
        let pw = self.int_powers(&nums);
        let dp = powers_of(&den, dmax);
        let total = self.monomials.iter().fold(BigInt::zero(), |acc, m| {
            let t = m.exps.iter().fold(m.coeff.clone(), |t, &(i, e)| t * &pw[i][e as usize]);
            acc + t * &dp[(dmax - m.degree()) as usize]
        });
        Ok(Rational::new(total, dp[dmax as usize].clone()))
    }

    /// Exact gradient at a rational point, by per-monomial differentiation.
    pub fn gradient(&self, x: &[Rational]) -> Result<QVector> {
        self.check_dim(x.len())?;
        let n = self.n_vars;
        let dmax = self.degree();
        if dmax == 0 {
            return Ok(vec![Rational::zero(); n]);
        }
        let (nums, den) = Self::common_denominator(x);
        let pw = self.int_powers(&nums);
        let dp = powers_of(&den, dmax);
        let mut totals = vec![BigInt::zero(); n];
        for m in &self.monomials {
            let deg = m.degree();
            if deg == 0 {
                continue;
            }
            let scale = &dp[(dmax - deg) as usize];
            for (k, &(j, ej)) in m.exps.iter().enumerate() {
                let mut t = &m.coeff * BigInt::from(ej) * &pw[j][(ej - 1) as usize];
                for (l, &(i, e)) in m.exps.iter().enumerate() {
                    if l != k {
                        t *= &pw[i][e as usize];
                    }
                }
                totals[j] += t * scale;
            }
        }
        let d = dp[(dmax - 1) as usize].clone();
        Ok(totals.into_iter().map(|t| Rational::new(t, d.clone())).collect())
    }

    pub fn eval_transformed(&self, s: &TransformStack, xt: &[Rational]) -> Result<Rational> {
        self.eval(&s.lift(xt)?)
    }

    /// Gradient of `x~ -> F(lift(x~))` over the free coordinates (chain rule).
    pub fn grad_transformed(&self, s: &TransformStack, xt: &[Rational]) -> Result<QVector> {
        let g = self.gradient(&s.lift(xt)?)?;
        Ok(s.pull_back(&g))
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        assert_eq!(self.n_vars, other.n_vars);
        let terms = self.monomials.iter().chain(&other.monomials).map(|m| (m.coeff.clone(), m.exps.clone()));
        Self::new(self.n_vars, terms.collect()).expect("indices in range")
    }

    pub fn scale(&self, c: &BigInt) -> SparsePoly {
        let terms = self.monomials.iter().map(|m| (&m.coeff * c, m.exps.clone()));
        Self::new(self.n_vars, terms.collect()).expect("indices in range")
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn add_constant(&self, c: &BigInt) -> SparsePoly {
        self.add(&Self::constant(self.n_vars, c.clone()))
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        assert_eq!(self.n_vars, other.n_vars);
        let mut terms = Vec::with_capacity(self.monomials.len() * other.monomials.len());
        for a in &self.monomials {
            for b in &other.monomials {
                let mut exps = a.exps.clone();
                exps.extend_from_slice(&b.exps);
                terms.push((&a.coeff * &b.coeff, exps));
            }
        }
        Self::new(self.n_vars, terms).expect("indices in range")
    }

    pub fn pow(&self, k: u32) -> SparsePoly {
        (0..k).fold(Self::constant(self.n_vars, 1), |acc, _| acc.mul(self))
    }

    pub fn to_terms(&self) -> Vec<TermRepr> {
        self.monomials
            .iter()
            .map(|m| TermRepr {
                coeff: m.coeff.to_string(),
                exps: m.exps.iter().map(|&(i, e)| (i.to_string(), e)).collect(),
            })
            .collect()
    }

    pub fn from_terms(n_vars: usize, terms: &[TermRepr]) -> Result<Self> {
        let mut raw = Vec::with_capacity(terms.len());
        for (k, t) in terms.iter().enumerate() {
            let coeff: BigInt = t.coeff.trim().parse().map_err(|_| {
                Error::InvalidPolynomial(format!("term {k}: coefficient {:?} is not an integer", t.coeff))
            })?;
            let mut exps = Vec::with_capacity(t.exps.len());
            for (idx, &deg) in &t.exps {
                let i: usize = idx.parse().map_err(|_| {
                    Error::InvalidPolynomial(format!("term {k}: variable index {idx:?} is not a number"))
                })?;
                if deg == 0 {
                    return Err(Error::InvalidPolynomial(format!("term {k}: zero exponent for variable {i}")));
                }
                exps.push((i, deg));
            }
            raw.push((coeff, exps));
        }
        Self::new(n_vars, raw)
    }
}

fn powers_of(b: &BigInt, k: u32) -> Vec<BigInt> {
    let mut p = Vec::with_capacity(k as usize + 1);
    p.push(BigInt::one());
    for j in 1..=k as usize {
        let next = &p[j - 1] * b;
        p.push(next);
    }
    p
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        for (k, m) in self.monomials.iter().enumerate() {
            let neg = m.coeff.is_negative();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let c = m.coeff.abs();
            if m.exps.is_empty() || !c.is_one() {
                write!(f, "{c}")?;
            }
            for (j, &(i, e)) in m.exps.iter().enumerate() {
                if j > 0 || !c.is_one() {
                    f.write_str("*")?;
                }
                write!(f, "x{}", i + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Level {
    b: IMatrix,
    t: BigInt,
    // product of all step matrices up to and including this one, embedded n x n
    c: IMatrix,
}

/// Composition of integer coordinate changes with fixed tail values.
///
/// With free dimension `k`, a point `x~` of `Z^k` (or `Q^k`) maps to the
/// original space as `x = C [x~; t_last; ...; t_first]`, where `C` is the
/// product of the pushed matrices, each embedded into the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformStack {
    n: usize,
    levels: Vec<Arc<Level>>,
}

impl TransformStack {
    pub fn new(n: usize) -> Self {
        TransformStack { n, levels: Vec::new() }
    }

    pub fn original_dim(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn free_dim(&self) -> usize {
        self.n - self.levels.len()
    }

    pub fn cached_product(&self) -> IMatrix {
        self.levels.last().map_or_else(|| IMatrix::identity(self.n), |l| l.c.clone())
    }

    /// Fixed values, newest first (the order they appear after `x~`).
    pub fn tail(&self) -> Vec<BigInt> {
        self.levels.iter().rev().map(|l| l.t.clone()).collect()
    }

    /// Pushes `x_free = B [y; t]`, fixing the last new coordinate to `t`.
    /// `B` is square of the current free dimension.
    pub fn push(&self, b: IMatrix, t: BigInt) -> Result<TransformStack> {
        let k = self.free_dim();
        if k == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if b.rows() != k || b.cols() != k {
            return Err(Error::DimensionMismatch { expected: k, got: b.rows() });
        }
        if b.det().is_zero() {
            return Err(Error::SingularTransform);
        }
        let c = match self.levels.last() {
            Some(l) => l.c.mul(&b.embed(self.n)),
            None => b.embed(self.n),
        };
        let mut levels = self.levels.clone();
        levels.push(Arc::new(Level { b, t, c }));
        Ok(TransformStack { n: self.n, levels })
    }

    pub fn pop(&self) -> Result<TransformStack> {
        if self.levels.is_empty() {
            return Err(Error::EmptyStack);
        }
        let mut levels = self.levels.clone();
        levels.pop();
        Ok(TransformStack { n: self.n, levels })
    }

    /// Maps free coordinates to the original space.
    pub fn lift(&self, xt: &[Rational]) -> Result<QVector> {
        let k = self.free_dim();
        if xt.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: xt.len() });
        }
        let Some(top) = self.levels.last() else {
            return Ok(xt.to_vec());
        };
        let mut full = xt.to_vec();
        full.extend(self.tail().into_iter().map(Rational::from_integer));
        Ok(top.c.mul_qvec(&full))
    }

    pub fn lift_int(&self, xt: &[BigInt]) -> Result<Vec<BigInt>> {
        let k = self.free_dim();
        if xt.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: xt.len() });
        }
        let Some(top) = self.levels.last() else {
            return Ok(xt.to_vec());
        };
        let mut full = xt.to_vec();
        full.extend(self.tail());
        Ok(top.c.mul_ivec(&full))
    }

    /// `C_free^T g`: a gradient in the original space expressed over the free
    /// coordinates.
    pub fn pull_back(&self, g: &[Rational]) -> QVector {
        let k = self.free_dim();
        let Some(top) = self.levels.last() else {
            return g.to_vec();
        };
        (0..k)
            .map(|j| {
                (0..self.n).fold(Rational::zero(), |acc, i| {
                    let c = &top.c[(i, j)];
                    if c.is_zero() {
                        acc
                    } else {
                        acc + &g[i] * Rational::from_integer(c.clone())
                    }
                })
            })
            .collect()
    }

    /// Largest absolute row sum of the free columns of `C` (an infinity-norm
    /// bound for the map from free coordinates to the original space).
    pub fn free_row_norm(&self) -> BigInt {
        let k = self.free_dim();
        let Some(top) = self.levels.last() else {
            return BigInt::one();
        };
        (0..self.n)
            .map(|i| (0..k).fold(BigInt::zero(), |acc, j| acc + top.c[(i, j)].abs()))
            .max()
            .unwrap_or_default()
    }

    /// The matrix pushed at each level, oldest first.
    pub fn step_matrices(&self) -> Vec<&IMatrix> {
        self.levels.iter().map(|l| &l.b).collect()
    }
}
