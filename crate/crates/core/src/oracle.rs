//! Shallow-cut separation for sets given by strict quasiconvex polynomial
//! inequalities `F_i(x) < 0`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    a_orthogonal_frame, approx_inv_sqrt, inv_sqrt_bracket, is_zero_vec, sqrt_bracket, IMatrix, QVector,
    Rational,
};
use crate::rounding::{
    default_point_count, generate_test_points, CutAnswer, Ellipsoid, ShallowCutOracle, TestPointKind, TestPointSet,
};
use crate::sparsepoly::{SparsePoly, TransformStack};

/// A system `F_i(x) < 0` in the original coordinates, viewed through a
/// transform stack. `rbox` bounds every feasible integer point coordinatewise
/// (in the original coordinates).
#[derive(Clone, Debug)]
pub struct Program {
    polys: Arc<Vec<SparsePoly>>,
    stack: TransformStack,
    rbox: BigInt,
}

impl Program {
    pub fn new(n: usize, polys: Vec<SparsePoly>, rbox: BigInt) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::InvalidProblem("a program needs at least one constraint".into()));
        }
        if let Some(p) = polys.iter().find(|p| p.n_vars() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.n_vars() });
        }
        Ok(Program { polys: Arc::new(polys), stack: TransformStack::new(n), rbox })
    }

    pub fn original_dim(&self) -> usize {
        self.stack.original_dim()
    }

    pub fn free_dim(&self) -> usize {
        self.stack.free_dim()
    }

    pub fn polys(&self) -> &[SparsePoly] {
        &self.polys
    }

    pub fn stack(&self) -> &TransformStack {
        &self.stack
    }

    pub fn rbox(&self) -> &BigInt {
        &self.rbox
    }

    pub fn degree(&self) -> u32 {
        self.polys.iter().map(SparsePoly::degree).max().unwrap_or(0)
    }

    pub fn push(&self, b: IMatrix, t: BigInt) -> Result<Program> {
        Ok(Program { polys: Arc::clone(&self.polys), stack: self.stack.push(b, t)?, rbox: self.rbox.clone() })
    }

    pub fn lift(&self, x: &[Rational]) -> Result<QVector> {
        self.stack.lift(x)
    }

    pub fn lift_int(&self, z: &[BigInt]) -> Result<Vec<BigInt>> {
        self.stack.lift_int(z)
    }

    /// Index of the first `F_i` with `F_i(x) >= 0`, for `x` in free
    /// coordinates.
    pub fn first_violated(&self, x: &[Rational]) -> Result<Option<usize>> {
        let full = self.stack.lift(x)?;
        for (i, f) in self.polys.iter().enumerate() {
            if !f.eval(&full)?.is_negative() {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    pub fn is_strictly_feasible(&self, x: &[Rational]) -> Result<bool> {
        Ok(self.first_violated(x)?.is_none())
    }

    pub fn is_feasible_int(&self, z: &[BigInt]) -> Result<bool> {
        let full = self.stack.lift_int(z)?;
        for f in self.polys.iter() {
            if !f.eval_int(&full)?.is_negative() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Upper bound on `sup |grad F_i|_1` over the box `[-rbox-1, rbox+1]^n`,
    /// maximized over the constraints.
    pub fn gradient_bound(&self) -> BigInt {
        let r1: BigInt = &self.rbox + 1u32;
        self.polys
            .iter()
            .map(|p| {
                p.monomials()
                    .iter()
                    .filter(|m| m.degree() > 0)
                    .map(|m| m.coeff.abs() * BigInt::from(m.degree()) * r1.pow(m.degree() - 1))
                    .sum::<BigInt>()
            })
            .max()
            .unwrap_or_default()
    }

    /// A positive `eps` with `vol(Y) > eps` whenever Y (in free coordinates)
    /// contains an integer point.
    ///
    /// Around a feasible integer point every `F_i <= -1`. A free-coordinate
    /// step of sup-norm `r` moves the original point by at most `K r`, with `K`
    /// the largest row sum of the free part of the stack, and changes each
    /// `F_i` by at most `G K r`. With `r0 = min(1/K, 1/(2GK))` the ball of
    /// radius `r0` stays feasible; it contains a cube of volume
    /// `(2 r0/sqrt(k))^k`.
    pub fn epsilon(&self) -> Result<Rational> {
        let k = self.free_dim();
        let kk = Rational::from_integer(self.stack.free_row_norm().max(BigInt::one()));
        let g = Rational::from_integer(self.gradient_bound());
        let mut r0 = Rational::one() / &kk;
        if g.is_positive() {
            let alt = Rational::one() / (Rational::from_integer(2.into()) * &g * &kk);
            if alt < r0 {
                r0 = alt;
            }
        }
        let (_, sqrt_k) = sqrt_bracket(&Rational::from_integer(BigInt::from(k)), &Rational::new(1.into(), 16.into()))?;
        let side = r0 / sqrt_k;
        Ok((0..k).fold(Rational::one(), |acc, _| acc * &side))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutCase {
    /// a test point is infeasible while the center is feasible
    TestPoint,
    /// the center itself is infeasible
    Center,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeparationAnswer {
    /// `E(A/beta^2, a) ⊆ Y`; `test_points` are the feasible points whose hull
    /// certifies it.
    RoundingVerified { beta: Rational, test_points: Vec<QVector> },
    Cut { c: QVector, case: CutCase },
    /// Some constraint is a nonnegative constant on the whole space.
    ConstantInfeasible,
}

/// Test-point sets per free dimension plus the pull-in and depth parameters.
#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub sigma: Rational,
    pub gamma: Option<Rational>,
    sets: Vec<Arc<TestPointSet>>,
}

impl OracleConfig {
    /// `m` applies to the top dimension `n`; lower dimensions use their
    /// default count.
    pub fn new(
        n: usize,
        kind: TestPointKind,
        m: Option<usize>,
        sigma: Rational,
        gamma: Option<Rational>,
    ) -> Result<Self> {
        if sigma <= Rational::one() || sigma > Rational::from_integer(2.into()) {
            return Err(Error::InvalidProblem(format!("sigma must lie in (1, 2], got {sigma}")));
        }
        if let Some(g) = &gamma {
            if !g.is_positive() {
                return Err(Error::InvalidProblem(format!("gamma must be positive, got {g}")));
            }
        }
        let mut sets = Vec::with_capacity(n + 1);
        sets.push(Arc::new(TestPointSet {
            kind,
            n: 0,
            requested: 0,
            reps: vec![],
            points: vec![],
            radius_sq_lo: Rational::one(),
        }));
        for k in 1..=n {
            let count = if k == n { m.unwrap_or_else(|| default_point_count(k)) } else { default_point_count(k) };
            sets.push(cached_points(k, count, kind)?);
        }
        Ok(OracleConfig { sigma, gamma, sets })
    }

    pub fn default_for(n: usize) -> Result<Self> {
        Self::new(n, TestPointKind::SphereNet, None, Rational::new(3.into(), 2.into()), None)
    }

    pub fn points(&self, k: usize) -> &TestPointSet {
        &self.sets[k]
    }

    pub fn max_dim(&self) -> usize {
        self.sets.len() - 1
    }
}

type PointKey = (usize, usize, TestPointKind);

/// Test-point sets are pure functions of their parameters and costly to
/// build (hull enumeration), so they are shared process-wide.
fn cached_points(n: usize, m: usize, kind: TestPointKind) -> Result<Arc<TestPointSet>> {
    static CACHE: OnceLock<Mutex<HashMap<PointKey, Arc<TestPointSet>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(set) = cache.lock().unwrap().get(&(n, m, kind)) {
        return Ok(Arc::clone(set));
    }
    let set = Arc::new(generate_test_points(n, m, kind)?);
    cache.lock().unwrap().insert((n, m, kind), Arc::clone(&set));
    Ok(set)
}

fn axpy(a: &Rational, x: &[Rational], y: &mut [Rational]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi += a * xi;
        }
    }
}

/// The shallow-cut separation oracle.
pub fn separate(p: &Program, e: &Ellipsoid, cfg: &OracleConfig) -> Result<SeparationAnswer> {
    let k = p.free_dim();
    if e.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, got: e.dim() });
    }
    if k > cfg.max_dim() {
        return Err(Error::DimensionMismatch { expected: cfg.max_dim(), got: k });
    }
    let a = &e.center;

    let frame = a_orthogonal_frame(&e.a_mat).map_err(|err| Error::InvalidEllipsoid(err.to_string()))?;
    let (images, norms) = (frame.images, frame.norms);

    if let Some(i) = p.first_violated(a)? {
        return center_cut(p, e, cfg, i, &images, &norms);
    }

    let set = cfg.points(k);
    let kr = Rational::from_integer(BigInt::from(k));
    let one = Rational::one();
    let (rho_lo, _) = sqrt_bracket(&set.radius_sq_lo, &Rational::new(1.into(), BigInt::one() << 16u32))?;
    let mut eta = &rho_lo / Rational::from_integer(8.into());
    let eta2 = (&cfg.sigma - &one) / Rational::from_integer(BigInt::from(4 * (k + 1)));
    if eta2 < eta {
        eta = eta2;
    }
    let vinf = set.points.iter().flatten().map(|x| x.abs()).max().unwrap_or(1);
    let bmax_hi = norms
        .iter()
        .map(|nb| sqrt_bracket(nb, &one).map(|(_, hi)| hi))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .expect("k >= 1");
    let (_, sqrtn_hi) = sqrt_bracket(&kr, &Rational::new(1.into(), 16.into()))?;
    let delta = &eta / (sqrtn_hi * Rational::from_integer(BigInt::from(vinf)) * bmax_hi);
    if !delta.is_positive() {
        return Err(Error::InternalRootBudget);
    }
    let pull = &one / (&kr + &cfg.sigma);

    let mut test_points = Vec::with_capacity(set.points.len());
    let mut rep_index = 0usize;
    let mut scales: Vec<Rational> = Vec::new();
    for (idx, w) in set.points.iter().enumerate() {
        // orbits are stored contiguously, each starting at its representative
        if idx == 0 || set.reps.get(rep_index + 1).is_some_and(|r| r == w) {
            if idx != 0 {
                rep_index += 1;
            }
            let rep = &set.reps[rep_index];
            let vv = Rational::from_integer(BigInt::from(rep.iter().map(|x| x * x).sum::<i64>()));
            scales = rep
                .iter()
                .zip(&norms)
                .map(|(&vi, nb)| {
                    if vi == 0 {
                        Ok(Rational::zero())
                    } else {
                        approx_inv_sqrt(&(&vv * nb), &delta)
                    }
                })
                .collect::<Result<_>>()?;
        }
        // b~ coefficients over the basis: w_i r_i
        let coef: Vec<Rational> =
            w.iter().zip(&scales).map(|(&wi, r)| Rational::from_integer(BigInt::from(wi)) * r).collect();
        let mut x = a.clone();
        for (c, ab) in coef.iter().zip(&images) {
            if !c.is_zero() {
                axpy(&(c * &pull), ab, &mut x);
            }
        }
        if let Some(fi) = p.first_violated(&x)? {
            return test_point_cut(p, e, cfg, fi, &coef, &images, &norms);
        }
        test_points.push(x);
    }
    let beta = (&kr + &cfg.sigma) / (rho_lo - eta);
    Ok(SeparationAnswer::RoundingVerified { beta, test_points })
}

/// Case 2.1: `F(a) < 0 <= F(x~)`. Walks past the infeasible test point along
/// the same ray and returns the first nonzero gradient.
fn test_point_cut(
    p: &Program,
    e: &Ellipsoid,
    cfg: &OracleConfig,
    fi: usize,
    coef: &[Rational],
    images: &[QVector],
    norms: &[Rational],
) -> Result<SeparationAnswer> {
    let k = p.free_dim();
    let f = &p.polys()[fi];
    let one = Rational::one();
    let k1 = Rational::from_integer(BigInt::from(k + 1));
    let lo = &k1 / (Rational::from_integer(BigInt::from(k)) + &cfg.sigma);
    let bt_norm2 = coef.iter().zip(norms).fold(Rational::zero(), |acc, (c, nb)| acc + c * c * nb);
    let width = (&one - &lo) / Rational::from_integer(4.into());
    let (hi, _) = inv_sqrt_bracket(&bt_norm2, &width)?;
    if hi <= lo {
        return Err(Error::InternalRootBudget);
    }
    let mut dir = vec![Rational::zero(); k];
    for (c, ab) in coef.iter().zip(images) {
        axpy(c, ab, &mut dir);
    }
    let d = f.degree().max(1) as i64;
    for j in 1..=d {
        let lambda = &lo + (&hi - &lo) * Rational::new(j.into(), (d + 1).into());
        let mut y = e.center.clone();
        axpy(&(lambda / &k1), &dir, &mut y);
        if f.eval_transformed(p.stack(), &y)?.is_negative() {
            // beyond an infeasible point on a ray from a feasible center
            return Err(Error::NonQuasiconvex);
        }
        let g = f.grad_transformed(p.stack(), &y)?;
        if !is_zero_vec(&g) {
            return Ok(SeparationAnswer::Cut { c: g, case: CutCase::TestPoint });
        }
    }
    Err(Error::NonQuasiconvex)
}

/// Case 2.2: `F(a) >= 0`. Uses the gradient at the center, or scans short
/// steps along the A-orthogonal axes.
fn center_cut(
    p: &Program,
    e: &Ellipsoid,
    cfg: &OracleConfig,
    fi: usize,
    images: &[QVector],
    norms: &[Rational],
) -> Result<SeparationAnswer> {
    let k = p.free_dim();
    let f = &p.polys()[fi];
    let g = f.grad_transformed(p.stack(), &e.center)?;
    if !is_zero_vec(&g) {
        return Ok(SeparationAnswer::Cut { c: g, case: CutCase::Center });
    }
    if f.is_constant() {
        return Ok(SeparationAnswer::ConstantInfeasible);
    }
    let cap = Rational::new(BigInt::one(), BigInt::from(k + 1));
    let gamma = match &cfg.gamma {
        Some(g) if *g < cap => g.clone(),
        _ => cap,
    };
    let d = f.degree() as i64;
    let quarter = Rational::new(1.into(), 4.into());
    for (ab, nb) in images.iter().zip(norms) {
        let (hi, _) = inv_sqrt_bracket(nb, &(approx_inv_sqrt(nb, &quarter)? * &quarter))?;
        for sign in [1i64, -1] {
            for j in 1..=d {
                let lambda = &hi * Rational::new(j.into(), (d + 1).into());
                let step = &gamma * lambda * Rational::from_integer(sign.into());
                let mut y = e.center.clone();
                axpy(&step, ab, &mut y);
                if f.eval_transformed(p.stack(), &y)?.is_negative() {
                    continue;
                }
                let gy = f.grad_transformed(p.stack(), &y)?;
                if !is_zero_vec(&gy) {
                    return Ok(SeparationAnswer::Cut { c: gy, case: CutCase::Center });
                }
            }
        }
    }
    Ok(SeparationAnswer::ConstantInfeasible)
}

/// Adapter exposing [`separate`] to the ellipsoid method.
pub struct ProgramOracle<'a> {
    pub program: &'a Program,
    pub config: &'a OracleConfig,
}

impl ShallowCutOracle for ProgramOracle<'_> {
    fn separate(&self, e: &Ellipsoid) -> Result<CutAnswer> {
        Ok(match separate(self.program, e, self.config)? {
            SeparationAnswer::RoundingVerified { beta, .. } => CutAnswer::Verified { beta },
            SeparationAnswer::Cut { c, .. } => CutAnswer::Cut(c),
            SeparationAnswer::ConstantInfeasible => CutAnswer::Empty,
        })
    }

    fn contains_integer(&self, z: &[BigInt]) -> Option<bool> {
        self.program.is_feasible_int(z).ok()
    }
}
