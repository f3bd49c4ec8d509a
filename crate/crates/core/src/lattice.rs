//! Exact lattice algorithms on rational Gram forms.
//!
//! A Gram form `G` stands for the lattice whose basis has inner products
//! `G`; the squared length of the integer combination `z` is `z^T G z`. No
//! square root of `G` is ever formed.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{ldlt, round_half_up, IMatrix, QMatrix, QVector, Rational};

/// Symmetric positive definite Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramForm {
    g: QMatrix,
}

impl GramForm {
    pub fn new(g: QMatrix) -> Result<Self> {
        ldlt(&g)?;
        Ok(GramForm { g })
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn norm_sq(&self, z: &[BigInt]) -> Rational {
        let q: QVector = z.iter().cloned().map(Rational::from_integer).collect();
        crate::exactnum::dot(&q, &self.g.mul_vec(&q))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortestVector {
    pub vector: Vec<BigInt>,
    pub squared_length: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hnf {
    pub u: IMatrix,
    pub t: IMatrix,
}

/// Result of [`lll_reduce`]: `reduced = U^T G U`, with `U` unimodular.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub u: IMatrix,
    pub u_inv: IMatrix,
    pub reduced: GramForm,
}

/// LLL reduction with parameter 3/4 on a Gram form, in exact arithmetic.
pub fn lll_reduce(form: &GramForm) -> Result<Reduced> {
    let n = form.dim();
    let mut g = form.g.clone();
    let mut u = IMatrix::identity(n);
    let mut u_inv = IMatrix::identity(n);
    let delta = Rational::new(BigInt::from(3), BigInt::from(4));
    let mut k = 1;
    while k < n {
        let f = ldlt(&g)?;
        // row k of the Gram-Schmidt coefficients, kept current through the
        // size reduction of b_k against b_{k-1}, ..., b_0
        let mut mu: Vec<Rational> = (0..k).map(|j| f.l[(k, j)].clone()).collect();
        for j in (0..k).rev() {
            let q = round_half_up(&mu[j]);
            if q.is_zero() {
                continue;
            }
            let qr = Rational::from_integer(q.clone());
            mu[j] -= &qr;
            for (i, m) in mu.iter_mut().enumerate().take(j) {
                *m -= &qr * &f.l[(j, i)];
            }
            // b_k -= q b_j as a congruence on G
            for i in 0..n {
                let v = &qr * &g[(j, i)];
                g[(k, i)] -= v;
            }
            for i in 0..n {
                let v = &qr * &g[(i, j)];
                g[(i, k)] -= v;
            }
            for i in 0..n {
                let v = &q * &u[(i, j)];
                u[(i, k)] -= v;
            }
            for i in 0..n {
                let v = &q * &u_inv[(k, i)];
                u_inv[(j, i)] += v;
            }
        }
        let mu = &mu[k - 1];
        if f.d[k] >= (&delta - mu * mu) * &f.d[k - 1] {
            k += 1;
        } else {
            for i in 0..n {
                let (a, b) = (g[(i, k)].clone(), g[(i, k - 1)].clone());
                g[(i, k)] = b;
                g[(i, k - 1)] = a;
            }
            for i in 0..n {
                let (a, b) = (g[(k, i)].clone(), g[(k - 1, i)].clone());
                g[(k, i)] = b;
                g[(k - 1, i)] = a;
            }
            u.swap_columns(k, k - 1);
            u_inv.swap_rows(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok(Reduced { u, u_inv, reduced: GramForm { g } })
}

/// Enumerates all integer `w` with `(w - c)^T G (w - c) <= bound` where
/// `G = L D L^T`, calling `visit` on each; `visit` may tighten the bound.
struct Enumerator<'a, F: FnMut(&[BigInt], &Rational) -> Option<Rational>> {
    l: &'a QMatrix,
    d: &'a [Rational],
    center: &'a [Rational],
    bound: Rational,
    w: Vec<BigInt>,
    visit: F,
}

impl<F: FnMut(&[BigInt], &Rational) -> Option<Rational>> Enumerator<'_, F> {
    fn run(&mut self, level: usize, used: Rational) {
        let n = self.d.len();
        // projected center for coordinate `level`
        let mut c = self.center[level].clone();
        for j in level + 1..n {
            let diff = Rational::from_integer(self.w[j].clone()) - &self.center[j];
            c -= &self.l[(j, level)] * diff;
        }
        let first = round_half_up(&c);
        // nearest integer first, then zigzag outward; each side stops once
        // its cost exceeds the (possibly shrinking) bound
        let toward: i64 = if Rational::from_integer(first.clone()) <= c { 1 } else { -1 };
        if !self.step(level, &used, &c, first.clone()) {
            return;
        }
        let mut alive = [true, true];
        let mut k = 1i64;
        while alive[0] || alive[1] {
            for (side, dir) in [(0, toward), (1, -toward)] {
                if alive[side] {
                    alive[side] = self.step(level, &used, &c, &first + BigInt::from(dir * k));
                }
            }
            k += 1;
        }
    }

    fn step(&mut self, level: usize, used: &Rational, c: &Rational, z: BigInt) -> bool {
        let diff = Rational::from_integer(z.clone()) - c;
        let cost = used + &self.d[level] * &diff * &diff;
        if cost > self.bound {
            return false;
        }
        self.w[level] = z;
        if level == 0 {
            if let Some(b) = (self.visit)(&self.w, &cost) {
                self.bound = b;
            }
        } else {
            self.run(level - 1, cost);
        }
        true
    }
}

fn enumerate<F>(g: &QMatrix, center: &[Rational], bound: Rational, visit: F) -> Result<()>
where
    F: FnMut(&[BigInt], &Rational) -> Option<Rational>,
{
    let f = ldlt(g)?;
    let n = f.d.len();
    if n == 0 {
        return Ok(());
    }
    let mut e = Enumerator { l: &f.l, d: &f.d, center, bound, w: vec![BigInt::zero(); n], visit };
    e.run(n - 1, Rational::zero());
    Ok(())
}

fn lex_cmp(a: &[BigInt], b: &[BigInt]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

fn l1(a: &[BigInt]) -> BigInt {
    a.iter().map(Signed::abs).sum()
}

/// Picks the representative of `{v, -v}` whose first nonzero entry is
/// positive.
fn sign_normalize(v: Vec<BigInt>) -> Vec<BigInt> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => v.into_iter().map(|x| -x).collect(),
        _ => v,
    }
}

/// SVP tie order among equally short vectors: smaller 1-norm first, then
/// lexicographically larger (so `e_1` precedes `e_2`).
fn svp_better(a: &[BigInt], b: &[BigInt]) -> bool {
    match l1(a).cmp(&l1(b)) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => lex_cmp(a, b) == Ordering::Greater,
    }
}

/// Exact shortest nonzero vector of the form, sign-normalized.
pub fn svp(form: &GramForm) -> Result<ShortestVector> {
    let n = form.dim();
    if n == 0 {
        return Err(Error::ZeroVector);
    }
    let red = lll_reduce(form)?;
    let gr = red.reduced.matrix();
    let bound = (0..n).map(|i| gr[(i, i)].clone()).min().expect("nonempty");
    let mut best: Option<(Rational, Vec<BigInt>)> = None;
    let center = vec![Rational::zero(); n];
    enumerate(gr, &center, bound, |w, cost| {
        if w.iter().all(Zero::is_zero) {
            return None;
        }
        let v = sign_normalize(red.u.mul_ivec(w));
        let replace = match &best {
            None => true,
            Some((c, b)) => cost < c || (cost == c && svp_better(&v, b)),
        };
        if replace {
            best = Some((cost.clone(), v));
            return Some(cost.clone());
        }
        None
    })?;
    let (squared_length, vector) = best.expect("a basis vector lies within the initial bound");
    Ok(ShortestVector { vector, squared_length })
}

/// Exact closest integer vector to `target` under the form; ties go to the
/// lexicographically smallest.
pub fn cvp(form: &GramForm, target: &[Rational]) -> Result<Vec<BigInt>> {
    let n = form.dim();
    if target.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: target.len() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let red = lll_reduce(form)?;
    let gr = red.reduced.matrix();
    // target in reduced coordinates: w_t = U^{-1} t
    let wt = red.u_inv.mul_qvec(target);
    let f = ldlt(gr)?;
    // nearest-plane point gives the initial bound
    let mut w0 = vec![BigInt::zero(); n];
    for i in (0..n).rev() {
        let mut c = wt[i].clone();
        for j in i + 1..n {
            c -= &f.l[(j, i)] * (Rational::from_integer(w0[j].clone()) - &wt[j]);
        }
        w0[i] = round_half_up(&c);
    }
    let dist = |w: &[BigInt]| -> Rational {
        let diff: QVector = w.iter().zip(&wt).map(|(a, b)| Rational::from_integer(a.clone()) - b).collect();
        crate::exactnum::dot(&diff, &gr.mul_vec(&diff))
    };
    let bound = dist(&w0);
    let mut best: (Rational, Vec<BigInt>) = (bound.clone(), red.u.mul_ivec(&w0));
    enumerate(gr, &wt, bound, |w, cost| {
        let v = red.u.mul_ivec(w);
        if cost < &best.0 || (cost == &best.0 && lex_cmp(&v, &best.1) == Ordering::Less) {
            best = (cost.clone(), v);
            return Some(cost.clone());
        }
        None
    })?;
    Ok(best.1)
}

/// Hermite normal form by unimodular row operations: `A = U T` with `T` upper
/// triangular, positive pivots, and entries above each pivot reduced into
/// `[0, pivot)`.
pub fn hnf(a: &IMatrix) -> Result<Hnf> {
    let m = a.rows();
    let k = a.cols();
    if k > m {
        return Err(Error::RankDeficient);
    }
    let mut t = a.clone();
    let mut u = IMatrix::identity(m);
    for col in 0..k {
        let r = col;
        for i in r + 1..m {
            if t[(i, col)].is_zero() {
                continue;
            }
            let x = t[(r, col)].clone();
            let y = t[(i, col)].clone();
            let eg = x.extended_gcd(&y);
            let (g, s, tt) = (eg.gcd, eg.x, eg.y);
            let (xg, yg) = (&x / &g, &y / &g);
            for j in 0..k {
                let pr = t[(r, j)].clone();
                let pi = t[(i, j)].clone();
                t[(r, j)] = &s * &pr + &tt * &pi;
                t[(i, j)] = -&yg * &pr + &xg * &pi;
            }
            for row in 0..m {
                let cr = u[(row, r)].clone();
                let ci = u[(row, i)].clone();
                u[(row, r)] = &cr * &xg + &ci * &yg;
                u[(row, i)] = -&tt * &cr + &s * &ci;
            }
        }
        if t[(r, col)].is_zero() {
            return Err(Error::RankDeficient);
        }
        if t[(r, col)].is_negative() {
            for j in 0..k {
                t[(r, j)] = -t[(r, j)].clone();
            }
            for row in 0..m {
                u[(row, r)] = -u[(row, r)].clone();
            }
        }
        let pivot = t[(r, col)].clone();
        for above in 0..r {
            let q = t[(above, col)].div_floor(&pivot);
            if q.is_zero() {
                continue;
            }
            for j in 0..k {
                let v = &q * &t[(r, j)];
                t[(above, j)] -= v;
            }
            for row in 0..m {
                let v = &q * &u[(row, above)];
                u[(row, r)] += v;
            }
        }
    }
    Ok(Hnf { u, t })
}

/// Extends a primitive integer vector to a basis of `Z^n`, returned as the
/// columns of a unimodular matrix whose last column is `d`.
pub fn complete_basis(d: &[BigInt]) -> Result<IMatrix> {
    let n = d.len();
    if d.iter().all(Zero::is_zero) {
        return Err(Error::ZeroVector);
    }
    let g = crate::exactnum::bigint_gcd(d);
    if !g.is_one() {
        return Err(Error::NotPrimitive(g.to_string()));
    }
    let col = IMatrix::from_columns(&[d.to_vec()]);
    let h = hnf(&col)?;
    // d = U e_1 since the HNF of a primitive column is e_1
    debug_assert!(h.t[(0, 0)].is_one());
    let mut cols: Vec<Vec<BigInt>> = (1..n).map(|j| h.u.column(j)).collect();
    cols.push(h.u.column(0));
    Ok(IMatrix::from_columns(&cols))
}

/// Inverse of a unimodular matrix, exactly.
pub fn unimodular_inverse(u: &IMatrix) -> Result<IMatrix> {
    let n = u.rows();
    if !u.det().abs().is_one() {
        return Err(Error::SingularTransform);
    }
    // adjugate-free: solve by rational elimination on the augmented matrix
    let q = u.to_q();
    let mut inv_cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[j] = Rational::one();
        inv_cols.push(solve_dense(&q, &e).ok_or(Error::SingularTransform)?);
    }
    let cols: Vec<Vec<BigInt>> = inv_cols
        .into_iter()
        .map(|c| c.into_iter().map(|x| x.to_integer()).collect())
        .collect();
    Ok(IMatrix::from_columns(&cols))
}

/// Gaussian elimination with partial pivoting on exact rationals.
pub fn solve_dense(a: &QMatrix, b: &[Rational]) -> Option<QVector> {
    let n = a.rows();
    let mut m: Vec<Vec<Rational>> =
        (0..n).map(|i| a.row(i).iter().cloned().chain(std::iter::once(b[i].clone())).collect()).collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(p, col);
        let pivot = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = &row[col] / &pivot[col];
                for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some((0..n).map(|i| &m[i][n] / &m[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, ratio};

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn form(rows: &[&[i64]]) -> GramForm {
        GramForm::new(QMatrix::from_i64(rows)).unwrap()
    }

    #[test]
    fn lll_examples() {
        let r = lll_reduce(&form(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(r.u, IMatrix::identity(2));

        // basis (1,0), (100,1)
        let g = form(&[&[1, 100], &[100, 10001]]);
        let r = lll_reduce(&g).unwrap();
        let gr = r.reduced.matrix();
        assert!(gr[(0, 0)] == int(1) || gr[(1, 1)] == int(1));
        assert_eq!(r.u.det().abs(), BigInt::one());
        assert_eq!(r.u.mul(&r.u_inv), IMatrix::identity(2));
        assert_eq!(r.u.to_q().transpose().mul(g.matrix()).mul(&r.u.to_q()), *gr);

        let r = lll_reduce(&form(&[&[4, 0], &[0, 9]])).unwrap();
        let gr = r.reduced.matrix();
        assert_eq!((gr[(0, 0)].clone(), gr[(1, 1)].clone()), (int(4), int(9)));
    }

    #[test]
    fn svp_examples() {
        let s = svp(&form(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!((s.vector, s.squared_length), (bi(&[1, 0]), int(1)));
        let s = svp(&form(&[&[4, 2], &[2, 5]])).unwrap();
        assert_eq!((s.vector, s.squared_length), (bi(&[1, 0]), int(4)));
        let s = svp(&form(&[&[25, 0, 0], &[0, 25, 0], &[0, 0, 25]])).unwrap();
        assert_eq!(s.squared_length, int(25));
    }

    #[test]
    fn cvp_examples() {
        let id = form(&[&[1, 0], &[0, 1]]);
        assert_eq!(cvp(&id, &[ratio(2, 5), ratio(3, 5)]).unwrap(), bi(&[0, 1]));
        assert_eq!(cvp(&id, &[ratio(1, 2), ratio(1, 2)]).unwrap(), bi(&[0, 0]));
        let g = form(&[&[4, 2], &[2, 5]]);
        let t = vec![ratio(11, 10), int(1)];
        let got = cvp(&g, &t).unwrap();
        let dist = |z: &[BigInt]| {
            let d: QVector = z.iter().zip(&t).map(|(a, b)| Rational::from_integer(a.clone()) - b).collect();
            crate::exactnum::dot(&d, &g.matrix().mul_vec(&d))
        };
        let mut best: Option<(Rational, Vec<BigInt>)> = None;
        for a in -2..=4 {
            for b in -2..=4 {
                let z = bi(&[a, b]);
                let c = dist(&z);
                if best.as_ref().is_none_or(|(bc, bz)| c < *bc || (c == *bc && lex_cmp(&z, bz).is_lt())) {
                    best = Some((c, z));
                }
            }
        }
        assert_eq!(got, best.unwrap().1);
    }

    #[test]
    fn hnf_examples() {
        let h = hnf(&IMatrix::identity(3)).unwrap();
        assert_eq!((h.u, h.t), (IMatrix::identity(3), IMatrix::identity(3)));

        let a = IMatrix::from_i64(&[&[2, 1], &[0, 1]]);
        let h = hnf(&a).unwrap();
        assert_eq!(h.u.mul(&h.t), a);
        assert_eq!(h.u.det().abs(), BigInt::one());
        assert!(h.t[(1, 0)].is_zero());

        let z = IMatrix::from_i64(&[&[1, 0], &[2, 0]]);
        assert_eq!(hnf(&z).unwrap_err(), Error::RankDeficient);
    }

    #[test]
    fn complete_basis_examples() {
        let b = complete_basis(&bi(&[1, 0])).unwrap();
        assert_eq!(b, IMatrix::from_i64(&[&[0, 1], &[1, 0]]));
        assert_eq!(b.det(), BigInt::from(-1));

        let b = complete_basis(&bi(&[2, 3])).unwrap();
        assert_eq!(b.det().abs(), BigInt::one());
        assert_eq!(b.column(1), bi(&[2, 3]));

        assert!(matches!(complete_basis(&bi(&[2, 4])), Err(Error::NotPrimitive(_))));
        assert_eq!(complete_basis(&bi(&[0, 0])).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn unimodular_inverse_round_trip() {
        let u = IMatrix::from_i64(&[&[2, 3], &[1, 2]]);
        assert_eq!(u.mul(&unimodular_inverse(&u).unwrap()), IMatrix::identity(2));
    }
}
