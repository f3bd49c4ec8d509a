//! Seeded random instances that are quasiconvex by construction.
//!
//! Objectives are convex quadratics `|L(x - p)|^2 + b^T x + c`, optionally
//! plus `(l^T x + e)^4`, or monotone/quasiconvex univariate maps of an affine
//! form (`u^3 + 3u`, `3u^2 - 3u^4 + u^6`). Constraints are convex quadratics,
//! linear forms, or even powers of affine forms minus a constant.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::solver::{Bound, Mode, ProblemSpec, Relation};
use crate::sparsepoly::SparsePoly;

pub const MAX_COEFF: i64 = 256;
const ATTEMPTS: usize = 10_000;

fn affine(rng: &mut ChaCha8Rng, n: usize, spread: i64) -> SparsePoly {
    loop {
        let l: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-2..=2))).collect();
        if l.iter().any(|c| *c != BigInt::from(0)) {
            let e = BigInt::from(rng.gen_range(-spread..=spread));
            return SparsePoly::affine(&l, &e);
        }
    }
}

/// `sum_i (L (x - p))_i^2` with small random integer `L` and center `p`.
fn convex_quadratic(rng: &mut ChaCha8Rng, n: usize, radius: i64) -> SparsePoly {
    let half = (radius / 2).max(1);
    let p: Vec<i64> = (0..n).map(|_| rng.gen_range(-half..=half)).collect();
    let mut acc = SparsePoly::zero(n);
    for _ in 0..n {
        let row: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-1..=1))).collect();
        let shift: BigInt = row.iter().zip(&p).map(|(l, &pi)| l * pi).sum();
        let u = SparsePoly::affine(&row, &-shift);
        acc = acc.add(&u.mul(&u));
    }
    if acc.degree() < 2 {
        // keep the form nondegenerate in at least one direction
        let i = rng.gen_range(0..n);
        let u = SparsePoly::var(n, i).add_constant(&BigInt::from(-p[i]));
        acc = acc.add(&u.mul(&u));
    }
    acc
}

fn univariate(n: usize, u: &SparsePoly, coeffs: &[(i64, u32)]) -> SparsePoly {
    coeffs
        .iter()
        .fold(SparsePoly::zero(n), |acc, &(c, k)| acc.add(&u.pow(k).scale(&BigInt::from(c))))
}

fn objective(rng: &mut ChaCha8Rng, n: usize, d: u32, radius: i64) -> SparsePoly {
    if d >= 6 && rng.gen_bool(0.5) {
        let u = affine(rng, n, 1);
        return univariate(n, &u, &[(3, 2), (-3, 4), (1, 6)]);
    }
    if d == 3 && rng.gen_bool(0.5) {
        let u = affine(rng, n, 2);
        return univariate(n, &u, &[(1, 3), (3, 1)]);
    }
    let mut f = convex_quadratic(rng, n, radius);
    let lin: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-3..=3))).collect();
    f = f.add(&SparsePoly::affine(&lin, &BigInt::from(rng.gen_range(-5..=5))));
    if d >= 4 && rng.gen_bool(0.5) {
        f = f.add(&affine(rng, n, 1).pow(4));
    }
    f
}

fn constraint(rng: &mut ChaCha8Rng, n: usize, d: u32, radius: i64) -> SparsePoly {
    let kinds = if d >= 4 { 3 } else { 2 };
    match rng.gen_range(0..kinds) {
        0 => {
            let r = rng.gen_range(1..=(radius * radius).max(2));
            convex_quadratic(rng, n, radius).add_constant(&BigInt::from(-r))
        }
        1 => affine(rng, n, radius),
        _ => {
            let r = rng.gen_range(1..=16);
            affine(rng, n, 1).pow(4).add_constant(&BigInt::from(-r))
        }
    }
}

fn small(p: &SparsePoly) -> bool {
    p.max_abs_coeff() <= BigInt::from(MAX_COEFF)
}

/// Deterministic instance for `(seed, n, d, s, radius)` with every
/// coefficient at most [`MAX_COEFF`] in absolute value.
pub fn gen_instance(seed: u64, n: usize, d: u32, s: usize, radius: u64) -> Result<ProblemSpec> {
    if n == 0 || d < 2 || radius == 0 {
        return Err(Error::InvalidProblem("need n >= 1, d >= 2, radius >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = radius as i64;
    for _ in 0..ATTEMPTS {
        let f = objective(&mut rng, n, d, r);
        if !small(&f) {
            continue;
        }
        let mut constraints = Vec::with_capacity(s);
        while constraints.len() < s {
            let c = constraint(&mut rng, n, d, r);
            if small(&c) {
                let rel = if rng.gen_bool(0.5) { Relation::Less } else { Relation::LessEq };
                constraints.push((c, rel));
            }
        }
        return Ok(ProblemSpec {
            n,
            objective: Some(f),
            constraints,
            mode: Mode::Minimize,
            bound: Some(Bound::radius(radius)),
        });
    }
    Err(Error::InvalidProblem("could not draw an instance with small coefficients".into()))
}
