//! Ellipsoids, test-point sets and the shallow-cut ellipsoid method.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{
    approx_inv_sqrt, bit_size, det_exact, inv_sqrt_bracket, dyadic, ldlt, ratio, round_dyadic, round_dyadic_numer, sqrt_bracket, QMatrix, QVector,
    Rational,
};
use crate::hull;
use crate::lattice::{cvp, GramForm};

/// `E(A, a) = {x : (x - a)^T A^{-1} (x - a) <= 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ellipsoid {
    pub a_mat: QMatrix,
    pub center: QVector,
}

impl Ellipsoid {
    pub fn new(a_mat: QMatrix, center: QVector) -> Result<Self> {
        if a_mat.rows() != center.len() {
            return Err(Error::DimensionMismatch { expected: a_mat.rows(), got: center.len() });
        }
        ldlt(&a_mat).map_err(|e| Error::InvalidEllipsoid(e.to_string()))?;
        Ok(Ellipsoid { a_mat, center })
    }

    /// The ball of radius `r` around the origin.
    pub fn ball(n: usize, r: &BigInt) -> Self {
        Ellipsoid {
            a_mat: QMatrix::scalar(n, Rational::from_integer(r * r)),
            center: vec![Rational::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn det(&self) -> Rational {
        det_exact(&self.a_mat)
    }

    /// `(x - a)^T A^{-1} (x - a)`
    pub fn gauge_sq(&self, x: &[Rational]) -> Result<Rational> {
        let f = ldlt(&self.a_mat)?;
        let diff: QVector = x.iter().zip(&self.center).map(|(p, q)| p - q).collect();
        Ok(f.inverse_quad_form(&diff))
    }

    pub fn contains(&self, x: &[Rational]) -> Result<bool> {
        Ok(self.gauge_sq(x)? <= Rational::one())
    }

    /// `E(A / beta^2, a)`
    pub fn shrink(&self, beta: &Rational) -> Ellipsoid {
        Ellipsoid { a_mat: self.a_mat.scale(&(Rational::one() / (beta * beta))), center: self.center.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestPointKind {
    CrossPolytope,
    SphereNet,
}

/// Largest admissible test-point count.
pub const POINT_CAP: usize = 2048;

/// Default count `min(n 2^n, 2048)`, never below `2n`.
pub fn default_point_count(n: usize) -> usize {
    let m = if n >= 11 { POINT_CAP } else { (n << n).min(POINT_CAP) };
    m.max(2 * n)
}

/// Integer directions, symmetric under every axis sign flip.
#[derive(Clone, Debug)]
pub struct TestPointSet {
    pub kind: TestPointKind,
    pub n: usize,
    pub requested: usize,
    /// first-orthant representatives in selection order
    pub reps: Vec<Vec<i64>>,
    /// sign closure; each representative followed by its flips
    pub points: Vec<Vec<i64>>,
    /// lower bound on the squared inscribed radius of the normalized hull
    pub radius_sq_lo: Rational,
}

fn sign_orbit(v: &[i64]) -> Vec<Vec<i64>> {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0).collect();
    (0u64..1 << nz.len())
        .map(|mask| {
            let mut w = v.to_vec();
            for (b, &i) in nz.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    w[i] = -w[i];
                }
            }
            w
        })
        .collect()
}

fn norm_sq_i(v: &[i64]) -> i64 {
    v.iter().map(|x| x * x).sum()
}

/// Largest squared cosine between the sign orbits of two nonnegative vectors.
fn orbit_cos_sq(u: &[i64], v: &[i64]) -> Rational {
    let d: i64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Rational::new(BigInt::from(d * d), BigInt::from(norm_sq_i(u) * norm_sq_i(v)))
}

fn sphere_net_reps(n: usize, m: usize) -> Vec<Vec<i64>> {
    let mut g = if n <= 4 { 1 } else { num_integer::Roots::sqrt(&(n - 1)) as i64 + 1 };
    // keep the candidate grid enumerable
    while g > 1 && (g as f64 + 1.0).powi(n as i32) > 200_000.0 {
        g -= 1;
    }
    let mut reps: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            e
        })
        .collect();
    let mut total = 2 * n;
    let mut candidates: Vec<Vec<i64>> = Vec::new();
    if (g as f64 + 1.0).powi(n as i32) <= 200_000.0 {
        let mut v = vec![0i64; n];
        'grid: loop {
            // odometer over {0..g}^n, last coordinate fastest
            let mut i = n;
            loop {
                if i == 0 {
                    break 'grid;
                }
                i -= 1;
                if v[i] < g {
                    v[i] += 1;
                    break;
                }
                v[i] = 0;
            }
            let nnz = v.iter().filter(|&&x| x != 0).count();
            let gcd = v.iter().fold(0i64, |a, &b| a.gcd(&b));
            if nnz >= 2 && gcd == 1 {
                candidates.push(v.clone());
            }
        }
    }
    let mut worst: Vec<Rational> = candidates
        .iter()
        .map(|c| reps.iter().map(|r| orbit_cos_sq(c, r)).max().expect("axes present"))
        .collect();
    let mut taken = vec![false; candidates.len()];
    loop {
        let mut pick: Option<usize> = None;
        for (i, c) in candidates.iter().enumerate() {
            let size = 1usize << c.iter().filter(|&&x| x != 0).count();
            if taken[i] || total + size > m {
                continue;
            }
            if pick.is_none_or(|p| worst[i] < worst[p]) {
                pick = Some(i);
            }
        }
        let Some(p) = pick else { break };
        taken[p] = true;
        total += 1 << candidates[p].iter().filter(|&&x| x != 0).count();
        for (i, c) in candidates.iter().enumerate() {
            if !taken[i] {
                let cs = orbit_cos_sq(c, &candidates[p]);
                if cs > worst[i] {
                    worst[i] = cs;
                }
            }
        }
        reps.push(candidates[p].clone());
    }
    reps
}

/// Generates a sign-symmetric set of integer test directions.
pub fn generate_test_points(n: usize, m: usize, kind: TestPointKind) -> Result<TestPointSet> {
    if m < 2 * n {
        return Err(Error::CountTooSmall { requested: m, minimum: 2 * n });
    }
    if m > POINT_CAP {
        return Err(Error::CapExceeded { requested: m, cap: POINT_CAP });
    }
    let reps = match kind {
        TestPointKind::CrossPolytope => sphere_net_reps(n, 2 * n),
        TestPointKind::SphereNet => sphere_net_reps(n, m),
    };
    let points: Vec<Vec<i64>> = reps.iter().flat_map(|r| sign_orbit(r)).collect();
    let cross_bound = Rational::new(BigInt::one(), BigInt::from(n));
    let radius_sq_lo = if kind == TestPointKind::SphereNet && n <= 3 && reps.len() > n {
        inscribed_ball_radius(&points)?.max(cross_bound)
    } else {
        // the signed axes alone give exactly 1/n
        cross_bound
    };
    Ok(TestPointSet { kind, n, requested: m, reps, points, radius_sq_lo })
}

/// Rational lower bound on the squared radius of the largest origin ball in
/// the hull of the normalized directions.
///
/// Each direction is scaled by a lower bound on `1/|v|`, which moves it
/// inward along its ray, so the hull only shrinks.
pub fn inscribed_ball_radius(dirs: &[Vec<i64>]) -> Result<Rational> {
    let n = dirs.first().map_or(0, Vec::len);
    if n > hull::MAX_HULL_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    let delta = Rational::new(BigInt::one(), BigInt::one() << 40u32);
    let mut pts = Vec::with_capacity(dirs.len());
    for v in dirs {
        let nsq = Rational::from_integer(BigInt::from(norm_sq_i(v)));
        if nsq.is_zero() {
            return Err(Error::ZeroVector);
        }
        let r = if nsq.is_one() { Rational::one() } else { inv_sqrt_bracket(&nsq, &delta)?.0 };
        pts.push(v.iter().map(|&x| Rational::from_integer(BigInt::from(x)) * &r).collect::<QVector>());
    }
    hull::inscribed_radius_sq(&pts)
}

/// `(1 + h)^2` with `h = 1/(16 (n+1)^4)`: absorbs the error of the
/// approximate `1/sqrt(c^T A c)` in the center update.
pub fn inflation(n: usize) -> Rational {
    let n1 = BigInt::from(n + 1);
    let h = Rational::new(BigInt::one(), BigInt::from(16) * n1.pow(4));
    let k = Rational::one() + h;
    &k * &k
}

fn shallow_params(n: usize) -> (Rational, Rational, Rational) {
    let nb = BigInt::from(n);
    let n1 = BigInt::from(n + 1);
    let tau = Rational::new(BigInt::one(), &n1 * &n1);
    let sigma = Rational::new(BigInt::from(2), &nb * &n1);
    let zeta = Rational::new(nb.pow(3) * (&nb + 2), n1.pow(3) * (&nb - 1));
    (tau, sigma, zeta)
}

/// Closed-form `det(A') / det(A)` of [`shallow_cut_update`].
pub fn det_shrink_factor(n: usize) -> Rational {
    let kappa = inflation(n);
    if n == 1 {
        return kappa * ratio(9, 16);
    }
    let (_, sigma, zeta) = shallow_params(n);
    let mut r = Rational::one() - sigma;
    for _ in 0..n {
        r *= &kappa * &zeta;
    }
    r
}

/// Positive rescaling of `c` to a primitive integer vector.
pub fn canonical_cut(c: &[Rational]) -> Result<QVector> {
    if c.iter().all(Zero::is_zero) {
        return Err(Error::ZeroCutVector);
    }
    let l = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = c.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    Ok(ints.into_iter().map(|x| Rational::from_integer(x / &g)).collect())
}

#[derive(Clone, Debug)]
pub struct CutUpdate {
    pub ellipsoid: Ellipsoid,
    pub det_ratio: Rational,
}

/// One shallow-cut step: the returned ellipsoid contains
/// `E ∩ {x : c^T x <= c^T a + sqrt(c^T A c)/(n+1)}`.
pub fn shallow_cut_update(e: &Ellipsoid, c: &[Rational]) -> Result<CutUpdate> {
    let n = e.dim();
    if c.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    let c: Vec<BigInt> = canonical_cut(c)?.into_iter().map(|x| x.to_integer()).collect();
    // A = M / D with integer M
    let d = e.a_mat.entries().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let m: Vec<Vec<BigInt>> =
        (0..n).map(|i| e.a_mat.row(i).iter().map(|x| x.numer() * (&d / x.denom())).collect()).collect();
    // g = A c = h / D and q^2 = c^T A c = s / D
    let h: Vec<BigInt> = m.iter().map(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum()).collect();
    let s: BigInt = h.iter().zip(&c).map(|(a, b)| a * b).sum();
    if !s.is_positive() {
        return Err(Error::InvalidEllipsoid("c^T A c is not positive".into()));
    }
    let q2 = Rational::new(s.clone(), d.clone());
    let n1 = BigInt::from(n + 1);
    let (_, q_hi) = sqrt_bracket(&q2, &Rational::one())?;
    let delta = Rational::one() / (Rational::from_integer(BigInt::from(32) * &n1 * &n1) * q_hi);
    let r = approx_inv_sqrt(&q2, &delta)?;
    let kappa = inflation(n);
    let (step, a_mat) = if n == 1 {
        (ratio(1, 4) * &r, e.a_mat.scale(&(&kappa * ratio(9, 16))))
    } else {
        let (tau, sigma, zeta) = shallow_params(n);
        // kappa zeta (A - sigma g g^T / q^2)
        //   = kappa zeta / (D s sd) * (sd s M - sn h h^T), sigma = sn / sd
        let (sn, sd) = (sigma.numer(), sigma.denom());
        let fac = &kappa * &zeta / Rational::from_integer(&d * &s * sd);
        let sds = sd * &s;
        let mut out = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = Rational::from_integer(&sds * &m[i][j] - sn * &h[i] * &h[j]) * &fac;
                out[(j, i)] = v.clone();
                out[(i, j)] = v;
            }
        }
        (tau * &r, out)
    };
    let step = step / Rational::from_integer(d);
    let center: QVector = e.center.iter().zip(&h).map(|(a, hi)| a - &step * Rational::from_integer(hi.clone())).collect();
    Ok(CutUpdate { ellipsoid: Ellipsoid { a_mat, center }, det_ratio: det_shrink_factor(n) })
}

/// Extra slack factor `1 + theta` allowed when rounding an ellipsoid to
/// dyadic entries; a power of two so results stay dyadic.
fn rounding_slack(n: usize) -> Rational {
    let target = BigInt::from(16) * BigInt::from(n + 1).pow(4);
    let k = target.bits();
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// Replaces `E` by a dyadic ellipsoid containing it when its entries carry
/// more than `slack_bits` bits beyond what the shape needs.
///
/// Growth is at most `(1 + theta)^{3n}` in determinant.
pub fn control_size(e: &Ellipsoid, slack_bits: u64) -> Result<Ellipsoid> {
    Ok(maybe_round(e, slack_bits, &e.det())?.unwrap_or_else(|| e.clone()))
}

/// [`control_size`] given `det(A)`; `None` when no rounding was needed.
///
/// With `lambda <= lambda_min(A)` (from `lambda_min >= det / tr^{n-1}`) and
/// entrywise rounding error at most `2^-p`, the choice
/// `(1 + theta) n 2^-p <= theta lambda` makes `(1 + theta) A~ - A` PSD, and
/// `n 2^-2p <= theta^2 lambda` keeps the center shift within `theta` in the
/// norm of `(1 + theta) A~`. The result `(1 + theta)^3 A~` then contains `E`.
fn maybe_round(e: &Ellipsoid, slack_bits: u64, det: &Rational) -> Result<Option<Ellipsoid>> {
    let n = e.dim();
    let max_den = e.a_mat.entries().chain(&e.center).map(|x| x.denom().bits()).max().unwrap_or(0);
    if max_den <= 8 + slack_bits {
        return Ok(None);
    }
    if !det.is_positive() {
        return Err(Error::NotPositiveDefinite);
    }
    let theta = rounding_slack(n);
    let trace = (0..n).fold(Rational::zero(), |acc, i| acc + &e.a_mat[(i, i)]);
    let lambda = (1..n).fold(det.clone(), |acc, _| acc / &trace);
    let nq = Rational::from_integer(BigInt::from(n));
    let one_theta = Rational::one() + &theta;
    let pd_need = &theta * &lambda / (&one_theta * &nq);
    let shift_need = &theta * &theta * &lambda / &nq;
    // first guess from bit lengths, then exact adjustment
    let guess = |q: &Rational, scale: i64| {
        ((q.denom().bits() as i64 - q.numer().bits() as i64 + 1) / scale).max(8) as u32
    };
    let mut p = guess(&pd_need, 1).max(guess(&shift_need, 2));
    let ulp = |p: u32| Rational::new(BigInt::one(), BigInt::one() << p);
    while ulp(p) > pd_need || ulp(2 * p) > shift_need {
        p += 1;
    }
    if max_den <= p as u64 + slack_bits {
        return Ok(None);
    }
    // theta is a power of two, so (1 + theta)^3 = g / 2^gs exactly
    let grow = &one_theta * &one_theta * &one_theta;
    let gs = grow.denom().bits() as u32 - 1;
    let a_mat = QMatrix::from_rows(
        (0..n)
            .map(|i| {
                e.a_mat.row(i).iter().map(|x| dyadic(round_dyadic_numer(x, p) * grow.numer(), p + gs)).collect()
            })
            .collect(),
    );
    let center: QVector = e.center.iter().map(|x| round_dyadic(x, p)).collect();
    Ok(Some(Ellipsoid { a_mat, center }))
}

/// Upper bound on the volume of the unit ball in `R^n`, using `pi < 22/7`.
pub fn unit_ball_volume_upper(n: usize) -> Rational {
    let pi = ratio(22, 7);
    let mut v = Rational::one();
    // V_n = V_{n-2} * 2 pi / n, V_0 = 1, V_1 = 2
    let mut k = n % 2;
    if k == 1 {
        v = Rational::from_integer(BigInt::from(2));
    }
    while k < n {
        k += 2;
        v = v * Rational::from_integer(BigInt::from(2)) * &pi / Rational::from_integer(BigInt::from(k));
    }
    v
}

/// Answer of a shallow-cut separation oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CutAnswer {
    /// `E(A/beta^2, a) ⊆ Y ⊆ E(A, a)`
    Verified { beta: Rational },
    Cut(QVector),
    /// Y is empty.
    Empty,
}

pub trait ShallowCutOracle {
    fn separate(&self, e: &Ellipsoid) -> Result<CutAnswer>;

    /// Membership of an integer point in Y, enabling the lattice shortcuts
    /// of [`run_from`]. `None` disables them.
    fn contains_integer(&self, _z: &[BigInt]) -> Option<bool> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoundingOutcome {
    Rounded { ellipsoid: Ellipsoid, beta: Rational },
    SmallVolume { ellipsoid: Ellipsoid },
    /// The current ellipsoid (which contains Y) has no integer point.
    LatticeFree { ellipsoid: Ellipsoid },
    /// An integer point of Y met while iterating.
    IntegerPoint { point: Vec<BigInt> },
    Empty,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct TraceStep {
    pub step: usize,
    pub case: &'static str,
    pub det_num_bits: u64,
    pub cut_vector: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RoundingRun {
    pub outcome: RoundingOutcome,
    pub iterations: usize,
    pub trace: Vec<TraceStep>,
}

#[derive(Clone, Debug)]
pub struct RoundingConfig {
    pub epsilon: Rational,
    /// run the integer-point shortcuts (needs oracle support)
    pub lattice_checks: bool,
    pub trace: bool,
    /// bits of slack before an ellipsoid is re-rounded to dyadics
    pub slack_bits: u64,
}

impl RoundingConfig {
    pub fn new(epsilon: Rational) -> Self {
        RoundingConfig { epsilon, lattice_checks: true, trace: false, slack_bits: 48 }
    }
}

fn log2_approx(q: &Rational) -> f64 {
    let shift = q.numer().bits() as i64 - q.denom().bits() as i64;
    let scale = |b: &BigInt, bits: u64| -> f64 {
        let drop = bits.saturating_sub(60);
        (b >> drop).to_f64().unwrap_or(f64::MAX).log2() + drop as f64
    };
    let v = scale(q.numer(), q.numer().bits()) - scale(q.denom(), q.denom().bits());
    if v.is_finite() {
        v
    } else {
        shift as f64
    }
}

/// Hard cap on iterations derived from the guaranteed per-step shrink.
pub fn iteration_budget(n: usize, start: &Ellipsoid, threshold: &Rational) -> usize {
    let slack = Rational::one() + rounding_slack(n);
    let mut per_step = det_shrink_factor(n);
    for _ in 0..3 * n {
        per_step *= &slack;
    }
    let shrink = -log2_approx(&per_step);
    let gap = (log2_approx(&start.det()) - log2_approx(threshold)).max(0.0) + 4.0;
    (gap / shrink).ceil() as usize + 16
}

/// Runs the method from `E(R^2 I, 0)`.
pub fn run_shallow_cut_method(
    oracle: &dyn ShallowCutOracle,
    r: &BigInt,
    n: usize,
    cfg: &RoundingConfig,
) -> Result<RoundingRun> {
    run_from(oracle, Ellipsoid::ball(n, r), cfg)
}

fn axis_lattice_free(e: &Ellipsoid) -> bool {
    (0..e.dim()).any(|i| {
        let a = &e.center[i];
        let lo = a.floor();
        let hi = &lo + Rational::one();
        let r2 = &e.a_mat[(i, i)];
        let d0 = a - &lo;
        let d1 = &hi - a;
        &d0 * &d0 > *r2 && &d1 * &d1 > *r2
    })
}

/// The closest-point check runs every `CVP_CHECK_PERIOD * (n + 1)` steps;
/// it costs about as much as a few cuts.
const CVP_CHECK_PERIOD: usize = 4;

enum LatticeCheck {
    Free,
    Point(Vec<BigInt>),
    Undecided,
}

fn cvp_check(oracle: &dyn ShallowCutOracle, e: &Ellipsoid) -> Result<LatticeCheck> {
    let f = ldlt(&e.a_mat)?;
    let form = GramForm::new(f.inverse())?;
    let z = cvp(&form, &e.center)?;
    let zq: QVector = z.iter().cloned().map(Rational::from_integer).collect();
    if !e.contains(&zq)? {
        return Ok(LatticeCheck::Free);
    }
    match oracle.contains_integer(&z) {
        Some(true) => Ok(LatticeCheck::Point(z)),
        _ => Ok(LatticeCheck::Undecided),
    }
}

/// Runs the shallow-cut method from `start`, which must contain Y.
pub fn run_from(oracle: &dyn ShallowCutOracle, start: Ellipsoid, cfg: &RoundingConfig) -> Result<RoundingRun> {
    let n = start.dim();
    if n == 0 {
        return Err(Error::InvalidEllipsoid("zero-dimensional ellipsoid".into()));
    }
    if !cfg.epsilon.is_positive() {
        return Err(Error::NonPositiveInput);
    }
    let vol = unit_ball_volume_upper(n);
    let ratio_eps = &cfg.epsilon / vol;
    let threshold = &ratio_eps * &ratio_eps;
    let budget = iteration_budget(n, &start, &threshold);
    let mut det = start.det();
    let mut e = start;
    let mut trace = Vec::new();
    let lattice = cfg.lattice_checks && oracle.contains_integer(&vec![BigInt::zero(); n]).is_some();
    let done = |outcome, iterations, trace| Ok(RoundingRun { outcome, iterations, trace });
    for step in 0..budget {
        if det <= threshold {
            return done(RoundingOutcome::SmallVolume { ellipsoid: e }, step, trace);
        }
        if lattice {
            if axis_lattice_free(&e) {
                return done(RoundingOutcome::LatticeFree { ellipsoid: e }, step, trace);
            }
            if step % (CVP_CHECK_PERIOD * (n + 1)) == 0 {
                match cvp_check(oracle, &e)? {
                    LatticeCheck::Free => return done(RoundingOutcome::LatticeFree { ellipsoid: e }, step, trace),
                    LatticeCheck::Point(point) => return done(RoundingOutcome::IntegerPoint { point }, step, trace),
                    LatticeCheck::Undecided => {}
                }
            }
        }
        let answer = oracle.separate(&e)?;
        if cfg.trace {
            let (case, cut_vector) = match &answer {
                CutAnswer::Verified { .. } => ("verified", vec![]),
                CutAnswer::Cut(c) => ("cut", c.iter().map(ToString::to_string).collect()),
                CutAnswer::Empty => ("empty", vec![]),
            };
            trace.push(TraceStep { step, case, det_num_bits: bit_size(&det), cut_vector });
        }
        match answer {
            CutAnswer::Verified { beta } => {
                return done(RoundingOutcome::Rounded { ellipsoid: e, beta }, step + 1, trace)
            }
            CutAnswer::Empty => return done(RoundingOutcome::Empty, step + 1, trace),
            CutAnswer::Cut(c) => {
                let update = shallow_cut_update(&e, &c)?;
                det *= update.det_ratio;
                e = match maybe_round(&update.ellipsoid, cfg.slack_bits, &det)? {
                    Some(rounded) => {
                        det = rounded.det();
                        rounded
                    }
                    None => update.ellipsoid,
                };
            }
        }
    }
    Err(Error::IterationBudgetExceeded(budget))
}
