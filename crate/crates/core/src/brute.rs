//! Exhaustive enumeration over the bounding box, for cross-checking.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::solver::{Mode, ProblemSpec, Relation, Status};

/// Boxes with more points than this are refused.
pub const BRUTE_FORCE_CAP: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteResult {
    pub status: Status,
    pub point: Option<Vec<BigInt>>,
    pub value: Option<BigInt>,
}

/// Whether integer `x` satisfies the constraints as written, plus the strict
/// bound `x^T A0 x < R^2`.
pub fn is_feasible(spec: &ProblemSpec, x: &[i64]) -> Result<bool> {
    if let Some(b) = &spec.bound {
        let a = b.form_matrix(spec.n);
        let mut q = BigInt::zero();
        for i in 0..spec.n {
            for j in 0..spec.n {
                q += &a.row(i)[j] * x[i] * x[j];
            }
        }
        if q >= &b.radius * &b.radius {
            return Ok(false);
        }
    }
    for (p, rel) in &spec.constraints {
        let v = p.eval_i64(x)?;
        let ok = match rel {
            Relation::Less => v.is_negative(),
            Relation::LessEq => !v.is_positive(),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Scans `[-r, r]^n` in lexicographic order, with `r` the coordinate bound
/// of the problem's ball.
pub fn brute_force(spec: &ProblemSpec) -> Result<BruteResult> {
    spec.validate()?;
    let bound = spec.bound.as_ref().ok_or(Error::MissingBound)?;
    let r = bound.box_radius(spec.n)?.to_i64().ok_or(Error::InvalidProblem("box too large".into()))?;
    let side = (2 * r + 1) as u64;
    if side.checked_pow(spec.n as u32).is_none_or(|c| c > BRUTE_FORCE_CAP) {
        return Err(Error::InvalidProblem(format!("box [-{r}, {r}]^{} is too large to enumerate", spec.n)));
    }
    let mut x = vec![-r; spec.n];
    let mut best: Option<(BigInt, Vec<i64>)> = None;
    loop {
        if is_feasible(spec, &x)? {
            match (spec.mode, &spec.objective) {
                (Mode::Minimize, Some(f)) => {
                    let v = f.eval_i64(&x)?;
                    if best.as_ref().is_none_or(|(b, _)| v < *b) {
                        best = Some((v, x.clone()));
                    }
                }
                _ => {
                    let point = x.iter().map(|&v| BigInt::from(v)).collect();
                    return Ok(BruteResult { status: Status::Feasible, point: Some(point), value: None });
                }
            }
        }
        let Some(i) = (0..spec.n).rev().find(|&i| x[i] < r) else { break };
        x[i] += 1;
        x[i + 1..].iter_mut().for_each(|v| *v = -r);
    }
    Ok(match best {
        Some((v, pt)) => BruteResult {
            status: Status::Optimal,
            point: Some(pt.into_iter().map(BigInt::from).collect()),
            value: Some(v),
        },
        None => BruteResult { status: Status::Infeasible, point: None, value: None },
    })
}
