//! Exact facet enumeration for small convex hulls.
//!
//! Only meant for low dimensions (n <= 4): every n-subset of the points is
//! tried as a facet candidate.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{dot, QMatrix, QVector, Rational};

/// A facet `w^T x <= c` of a full-dimensional hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: QVector,
    pub offset: Rational,
}

pub const MAX_HULL_DIM: usize = 4;

/// Normal of the hyperplane through `pts` (n points in R^n), by cofactors of
/// the difference vectors. Zero when the points are affinely dependent.
fn hyperplane_normal(pts: &[&QVector]) -> QVector {
    let n = pts[0].len();
    let diffs: Vec<QVector> =
        pts[1..].iter().map(|p| p.iter().zip(pts[0].iter()).map(|(a, b)| a - b).collect()).collect();
    (0..n)
        .map(|i| {
            let cols: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let minor = QMatrix::from_rows(diffs.iter().map(|d| cols.iter().map(|&j| d[j].clone()).collect()).collect());
            let det = if n == 1 { Rational::from_integer(1.into()) } else { minor.det() };
            if i % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect()
}

fn subsets(m: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if k > m {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let Some(i) = (0..k).rev().find(|&i| idx[i] < m - k + i) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All facets of `conv(points)`, requiring the origin in the interior.
pub fn facets(points: &[QVector]) -> Result<Vec<Facet>> {
    let Some(first) = points.first() else {
        return Err(Error::OriginOutsideHull);
    };
    let n = first.len();
    if n > MAX_HULL_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    let mut out: Vec<Facet> = Vec::new();
    subsets(points.len(), n, |idx| {
        let pts: Vec<&QVector> = idx.iter().map(|&i| &points[i]).collect();
        let mut w = hyperplane_normal(&pts);
        if w.iter().all(Zero::is_zero) {
            return Ok(());
        }
        let mut c = dot(&w, pts[0]);
        let (mut above, mut below) = (false, false);
        for p in points {
            let s = dot(&w, p) - &c;
            above |= s.is_positive();
            below |= s.is_negative();
            if above && below {
                return Ok(());
            }
        }
        if !above && !below {
            // every point on one hyperplane: hull is flat
            return Err(Error::OriginOutsideHull);
        }
        if above {
            w = w.into_iter().map(|x| -x).collect();
            c = -c;
        }
        if !c.is_positive() {
            return Err(Error::OriginOutsideHull);
        }
        // normalize so that parallel duplicates compare equal
        let scale = c.clone();
        let facet = Facet { normal: w.into_iter().map(|x| x / &scale).collect(), offset: Rational::from_integer(1.into()) };
        if !out.contains(&facet) {
            out.push(facet);
        }
        Ok(())
    })?;
    if out.len() <= n {
        return Err(Error::OriginOutsideHull);
    }
    Ok(out)
}

/// Squared radius of the largest origin-centered ball inside
/// `conv(points)`, exactly.
pub fn inscribed_radius_sq(points: &[QVector]) -> Result<Rational> {
    let fs = facets(points)?;
    Ok(fs
        .iter()
        .map(|f| &f.offset * &f.offset / dot(&f.normal, &f.normal))
        .min()
        .expect("facets exist"))
}

/// Whether `E(A, a) = {x : (x-a)^T A^{-1} (x-a) <= 1}` lies inside the hull
/// with the given facets: for each facet, `w^T a + sqrt(w^T A w) <= c`.
pub fn contains_ellipsoid(facets: &[Facet], a_mat: &QMatrix, center: &[Rational]) -> bool {
    facets.iter().all(|f| {
        let slack = &f.offset - dot(&f.normal, center);
        !slack.is_negative() && &slack * &slack >= dot(&f.normal, &a_mat.mul_vec(&f.normal))
    })
}
