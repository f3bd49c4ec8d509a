//! Exact rational scalars, vectors and matrices.
//!
//! Everything here is exact: rationals are kept in lowest terms after every
//! operation (that is what [`BigRational`] does), and the only inexact
//! quantities in the crate are square roots, which are produced by
//! [`inv_sqrt_bracket`] / [`sqrt_bracket`] as rational brackets of a
//! requested width.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type QVector = Vec<Rational>;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_bigint(v: BigInt) -> Rational {
    Rational::from_integer(v)
}

pub fn qvec(v: &[i64]) -> QVector {
    v.iter().map(|&x| int(x)).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Encoding size of a rational in bits (numerator + denominator).
pub fn bit_size(q: &Rational) -> u64 {
    q.numer().bits() + q.denom().bits()
}

/// Nearest multiple of `2^-precision` (ties rounded up).
pub fn round_dyadic(x: &Rational, precision: u32) -> Rational {
    dyadic(round_dyadic_numer(x, precision), precision)
}

/// `round(x * 2^p)` with ties rounded up, using integer division only.
pub fn round_dyadic_numer(x: &Rational, precision: u32) -> BigInt {
    let d = x.denom();
    ((x.numer() << (precision + 1)) + d).div_floor(&(d << 1))
}

/// `m / 2^shift` in lowest terms, without a general gcd.
pub fn dyadic(m: BigInt, shift: u32) -> Rational {
    let tz = m.trailing_zeros().map_or(shift as u64, |t| t.min(shift as u64)) as u32;
    Rational::new_raw(m >> tz, BigInt::one() << (shift - tz))
}

/// Nearest integer, ties towards +infinity.
pub fn round_half_up(x: &Rational) -> BigInt {
    (x + ratio(1, 2)).floor().to_integer()
}

/// Floor of the integer square root, by Newton's iteration from above.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of a negative number");
    if n.is_zero() {
        return BigInt::zero();
    }
    let mut x = BigInt::one() << n.bits().div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1u32;
        if y >= x {
            return x;
        }
        x = y;
    }
}

fn precision_for(delta: &Rational) -> u32 {
    // smallest p with 2^-p <= delta
    let mut p = 0u32;
    let mut step = Rational::one();
    while &step > delta {
        step /= int(2);
        p += 1;
    }
    p
}

/// Exact determinant via fraction-free elimination on the matrix scaled to
/// integers.
pub fn det_exact(a: &QMatrix) -> Rational {
    let n = a.rows();
    let l = a.entries().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let m = IMatrix::from_rows(
        (0..n).map(|i| a.row(i).iter().map(|x| x.numer() * (&l / x.denom())).collect()).collect(),
    );
    Rational::new(m.det(), l.pow(n as u32))
}

/// Smallest integer `m >= 0` with `m^2 >= q`.
pub fn ceil_sqrt(q: &Rational) -> BigInt {
    let c = q.ceil().to_integer().max(BigInt::zero());
    let r = isqrt(&c);
    if &r * &r == c {
        r
    } else {
        r + 1u32
    }
}

/// Rational bracket `lo <= 1/sqrt(q) <= hi` with `hi - lo <= delta` and
/// `lo > 0`.
pub fn inv_sqrt_bracket(q: &Rational, delta: &Rational) -> Result<(Rational, Rational)> {
    if !q.is_positive() || !delta.is_positive() {
        return Err(Error::NonPositiveInput);
    }
    let (a, b) = (q.numer(), q.denom());
    let mut p = precision_for(delta);
    // keep the lower end strictly positive: need b * 4^p >= a
    let need = (a.bits() as i64 - b.bits() as i64) / 2 + 1;
    if need > p as i64 {
        p = need as u32;
    }
    loop {
        let scaled: BigInt = (b << (2 * p)) / a;
        let s = isqrt(&scaled);
        if s.is_positive() {
            let den = BigInt::one() << p;
            return Ok((
                Rational::new(s.clone(), den.clone()),
                Rational::new(s + 1, den),
            ));
        }
        p += 1;
    }
}

/// Rational approximation `r > 0` with `|r - 1/sqrt(q)| <= delta`.
///
/// Returns the lower end of [`inv_sqrt_bracket`], so `r <= 1/sqrt(q)` also
/// holds.
pub fn approx_inv_sqrt(q: &Rational, delta: &Rational) -> Result<Rational> {
    inv_sqrt_bracket(q, delta).map(|(lo, _)| lo)
}

/// Rational bracket `lo <= sqrt(q) <= hi` with `hi - lo <= delta`.
pub fn sqrt_bracket(q: &Rational, delta: &Rational) -> Result<(Rational, Rational)> {
    if q.is_negative() || !delta.is_positive() {
        return Err(Error::NonPositiveInput);
    }
    let p = precision_for(delta);
    let scaled: BigInt = (q.numer() << (2 * p)) / q.denom();
    let s = isqrt(&scaled);
    let den = BigInt::one() << p;
    Ok((Rational::new(s.clone(), den.clone()), Rational::new(s + 1, den)))
}

/// Exact radicand `v^T A v` of the norm `||v||_A`.
pub fn quad_form(a: &QMatrix, v: &[Rational]) -> Result<Rational> {
    if a.rows() != v.len() || a.cols() != v.len() {
        return Err(Error::DimensionMismatch { expected: a.rows(), got: v.len() });
    }
    Ok(dot(v, &a.mul_vec(v)))
}

/// Dense rational matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Rational::one())
    }

    pub fn scalar(n: usize, s: Rational) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = s.clone();
        }
        m
    }

    pub fn diagonal(d: &[Rational]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| qvec(r)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> QVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &Rational> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> QVector {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn scale(&self, s: &Rational) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        QMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        QMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// `u v^T`
    pub fn outer(u: &[Rational], v: &[Rational]) -> QMatrix {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, a) in u.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                m[(i, j)] = a * b;
            }
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Largest encoding size of any entry.
    pub fn max_bit_size(&self) -> u64 {
        self.data.iter().map(bit_size).max().unwrap_or(0)
    }

    /// Submatrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> QMatrix {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// Determinant by fraction-producing Gaussian elimination.
    pub fn det(&self) -> Rational {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if p != col {
                for j in 0..n {
                    m.data.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            let pivot = m[(col, col)].clone();
            det *= &pivot;
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let f = &m[(r, col)] / &pivot;
                for j in col..n {
                    let v = &f * &m[(col, j)];
                    m[(r, j)] -= v;
                }
            }
        }
        det
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        IMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn from_columns(cols: &[Vec<BigInt>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged matrix columns");
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IMatrix) -> IMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_qvec(&self, v: &[Rational]) -> QVector {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(Rational::zero(), |acc, (a, x)| acc + x * a)
            })
            .collect()
    }

    pub fn mul_ivec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(BigInt::zero(), |acc, (a, x)| acc + a * x))
            .collect()
    }

    pub fn to_q(&self) -> QMatrix {
        QMatrix::from_rows(
            (0..self.rows)
                .map(|i| self.row(i).iter().cloned().map(Rational::from_integer).collect())
                .collect(),
        )
    }

    pub fn swap_columns(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Embeds `self` as the leading block of an `n x n` identity.
    pub fn embed(&self, n: usize) -> IMatrix {
        assert!(self.rows <= n && self.cols <= n);
        let mut m = IMatrix::identity(n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// Determinant by Bareiss fraction-free elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !m[(r, k)].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
            }
            prev = m[(k, k)].clone();
        }
        let d = m[(n - 1, n - 1)].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }
}

impl Index<(usize, usize)> for IMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// `A = L D L^T` with `L` unit lower triangular and `D` positive diagonal.
#[derive(Clone, Debug)]
pub struct Ldlt {
    pub l: QMatrix,
    pub d: Vec<Rational>,
}

pub fn ldlt(a: &QMatrix) -> Result<Ldlt> {
    if !a.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = a.rows();
    let mut l = QMatrix::identity(n);
    let mut d: Vec<Rational> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = a[(j, j)].clone();
        for k in 0..j {
            dj -= &l[(j, k)] * &l[(j, k)] * &d[k];
        }
        if !dj.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        for i in j + 1..n {
            let mut v = a[(i, j)].clone();
            for k in 0..j {
                v -= &l[(i, k)] * &l[(j, k)] * &d[k];
            }
            l[(i, j)] = v / &dj;
        }
        d.push(dj);
    }
    Ok(Ldlt { l, d })
}

pub fn is_positive_definite(a: &QMatrix) -> bool {
    ldlt(a).is_ok()
}

impl Ldlt {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn d_matrix(&self) -> QMatrix {
        QMatrix::diagonal(&self.d)
    }

    pub fn det(&self) -> Rational {
        self.d.iter().fold(Rational::one(), |acc, x| acc * x)
    }

    /// Solves `L y = b` by forward substitution.
    fn forward(&self, b: &[Rational]) -> QVector {
        let n = self.dim();
        let mut y: QVector = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let t = &self.l[(i, k)] * &y[k];
                y[i] -= t;
            }
        }
        y
    }

    pub fn solve(&self, b: &[Rational]) -> QVector {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = self.forward(b);
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi /= di;
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = &self.l[(k, i)] * &y[k];
                y[i] -= t;
            }
        }
        y
    }

    /// `b^T A^{-1} b` without forming the inverse.
    pub fn inverse_quad_form(&self, b: &[Rational]) -> Rational {
        let y = self.forward(b);
        y.iter().zip(&self.d).fold(Rational::zero(), |acc, (yi, di)| acc + yi * yi / di)
    }

    pub fn inverse(&self) -> QMatrix {
        let n = self.dim();
        let mut inv = QMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[j] = Rational::one();
            let col = self.solve(&e);
            for (i, x) in col.into_iter().enumerate() {
                inv[(i, j)] = x;
            }
        }
        inv
    }
}

/// Gram-Schmidt on the standard basis under `<x, y>_A = x^T A y`, without
/// normalization. The returned vectors satisfy `b_i^T A b_j = 0` for `i != j`.
///
/// With `A = L D L^T` these are the columns of `L^{-T}`.
pub fn a_orthogonal_basis(a: &QMatrix) -> Result<Vec<QVector>> {
    let Ldlt { l, .. } = ldlt(a)?;
    let n = a.rows();
    let mut basis = Vec::with_capacity(n);
    for i in 0..n {
        // solve L^T b = e_i by back substitution
        let mut b = vec![Rational::zero(); n];
        b[i] = Rational::one();
        for r in (0..i).rev() {
            let mut v = Rational::zero();
            for k in r + 1..=i {
                v -= &l[(k, r)] * &b[k];
            }
            b[r] = v;
        }
        basis.push(b);
    }
    Ok(basis)
}

/// Images `A b_i` and norms `b_i^T A b_i` of the basis from
/// [`a_orthogonal_basis`], read off the LDL^T factors.
#[derive(Clone, Debug)]
pub struct AFrame {
    pub images: Vec<QVector>,
    pub norms: Vec<Rational>,
}

pub fn a_orthogonal_frame(a: &QMatrix) -> Result<AFrame> {
    let Ldlt { l, d } = ldlt(a)?;
    let n = a.rows();
    let images = (0..n)
        .map(|i| (0..n).map(|r| if r < i { Rational::zero() } else { &l[(r, i)] * &d[i] }).collect())
        .collect();
    Ok(AFrame { images, norms: d })
}

pub fn bigint_gcd(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

pub fn sign_of(x: &Rational) -> Sign {
    if x.is_zero() {
        Sign::NoSign
    } else if x.is_positive() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}
