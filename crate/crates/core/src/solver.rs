//! Problem normalization, bounds and objective minimization.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{ceil_sqrt, ldlt, IMatrix, QMatrix, Rational};
use crate::lenstra::{integer_feasible, Feasibility, LenstraConfig, Stats, TraceEvent};
use crate::oracle::{OracleConfig, Program};
use crate::rounding::{Ellipsoid, TestPointKind};
use crate::sparsepoly::SparsePoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `F(x) < 0`
    Less,
    /// `F(x) <= 0`
    LessEq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Feasibility,
    Minimize,
}

/// `x^T A0 x < R^2`, with `A0 = I` when `form` is absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub radius: BigInt,
    pub form: Option<IMatrix>,
}

impl Bound {
    pub fn radius(r: impl Into<BigInt>) -> Self {
        Bound { radius: r.into(), form: None }
    }

    pub fn form_matrix(&self, n: usize) -> IMatrix {
        self.form.clone().unwrap_or_else(|| IMatrix::identity(n))
    }

    /// `x^T A0 x - R^2`.
    pub fn polynomial(&self, n: usize) -> SparsePoly {
        let a = self.form_matrix(n);
        let mut terms = vec![(-(&self.radius * &self.radius), vec![])];
        for i in 0..n {
            for j in 0..n {
                let c = &a.row(i)[j];
                if c.is_zero() {
                    continue;
                }
                let exps = if i == j { vec![(i, 2)] } else { vec![(i.min(j), 1), (i.max(j), 1)] };
                terms.push((c.clone(), exps));
            }
        }
        SparsePoly::new(n, terms).expect("indices in range")
    }

    /// Smallest ellipsoid `E(R^2 A0^{-1}, 0)` holding the bounded region.
    pub fn ellipsoid(&self, n: usize) -> Result<Ellipsoid> {
        let inv = ldlt(&self.form_matrix(n).to_q())?.inverse();
        let r2 = Rational::from_integer(&self.radius * &self.radius);
        Ellipsoid::new(inv.scale(&r2), vec![Rational::zero(); n])
    }

    /// Coordinate bound: `|x_i| <= R sqrt((A0^{-1})_ii)` on the region.
    pub fn box_radius(&self, n: usize) -> Result<BigInt> {
        let inv: QMatrix = ldlt(&self.form_matrix(n).to_q())?.inverse();
        let max_diag = (0..n).map(|i| inv[(i, i)].clone()).max().unwrap_or_else(Rational::one);
        let r2 = Rational::from_integer(&self.radius * &self.radius) * max_diag;
        Ok(ceil_sqrt(&r2))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSpec {
    pub n: usize,
    pub objective: Option<SparsePoly>,
    pub constraints: Vec<(SparsePoly, Relation)>,
    pub mode: Mode,
    pub bound: Option<Bound>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidProblem("dimension must be positive".into()));
        }
        let check = |p: &SparsePoly| {
            if p.n_vars() == self.n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected: self.n, got: p.n_vars() })
            }
        };
        self.constraints.iter().try_for_each(|(p, _)| check(p))?;
        if let Some(f) = &self.objective {
            check(f)?;
        }
        if self.mode == Mode::Minimize && self.objective.is_none() {
            return Err(Error::InvalidProblem("minimize mode needs an objective".into()));
        }
        if let Some(b) = &self.bound {
            if !b.radius.is_positive() {
                return Err(Error::InvalidProblem("bound radius must be positive".into()));
            }
            if let Some(a) = &b.form {
                if a.rows() != self.n || a.cols() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, got: a.rows() });
                }
                if a.transpose() != *a {
                    return Err(Error::NotSymmetric);
                }
                ldlt(&a.to_q())?;
            }
        }
        Ok(())
    }

    pub fn with_bound(&self, bound: Bound) -> ProblemSpec {
        ProblemSpec { bound: Some(bound), ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    BoundExhausted,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: Status,
    pub point: Option<Vec<BigInt>>,
    pub objective_value: Option<BigInt>,
    pub stats: Stats,
    pub bound_used: BigInt,
    pub trace: Vec<TraceEvent>,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub test_points: TestPointKind,
    pub m: Option<usize>,
    pub sigma: Rational,
    pub gamma: Option<Rational>,
    pub parallel: bool,
    pub trace: bool,
    pub lattice_checks: bool,
    /// auto-bound mode stops doubling past `2^max_radius_bits`
    pub max_radius_bits: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            test_points: TestPointKind::SphereNet,
            m: None,
            sigma: Rational::new(3.into(), 2.into()),
            gamma: None,
            parallel: false,
            trace: false,
            lattice_checks: true,
            max_radius_bits: 16,
        }
    }
}

impl SolverOptions {
    pub fn lenstra_config(&self, n: usize) -> Result<LenstraConfig> {
        let oracle = OracleConfig::new(n, self.test_points, self.m, self.sigma.clone(), self.gamma.clone())?;
        Ok(LenstraConfig {
            oracle,
            parallel: self.parallel,
            trace: self.trace,
            lattice_checks: self.lattice_checks,
        })
    }
}

/// The constraints as strict inequalities over the integers: `F <= 0`
/// becomes `F - 1 < 0`, and the bound `x^T A0 x - R^2 < 0` is appended.
pub fn normalized_constraints(spec: &ProblemSpec) -> Result<Vec<SparsePoly>> {
    spec.validate()?;
    let bound = spec.bound.as_ref().ok_or(Error::MissingBound)?;
    let mut out: Vec<SparsePoly> = spec
        .constraints
        .iter()
        .map(|(p, rel)| match rel {
            Relation::Less => p.clone(),
            Relation::LessEq => p.add_constant(&BigInt::from(-1)),
        })
        .collect();
    out.push(bound.polynomial(spec.n));
    Ok(out)
}

pub fn normalize(spec: &ProblemSpec) -> Result<Program> {
    let polys = normalized_constraints(spec)?;
    let bound = spec.bound.as_ref().ok_or(Error::MissingBound)?;
    Program::new(spec.n, polys, bound.box_radius(spec.n)?)
}

/// Volume lower bound for the normalized program: if it has an integer
/// point then its feasible region has volume above this.
pub fn derive_epsilon(p: &Program) -> Result<Rational> {
    p.epsilon()
}

/// `sup |F(x)|` over the coordinate box `[-r, r]^n`.
pub fn objective_bound(f: &SparsePoly, r: &BigInt) -> BigInt {
    f.monomials().iter().map(|m| m.coeff.abs() * r.pow(m.degree())).sum()
}

struct Run {
    stats: Stats,
    trace: Vec<TraceEvent>,
}

impl Run {
    fn feasible(
        &mut self,
        n: usize,
        polys: Vec<SparsePoly>,
        rbox: &BigInt,
        start: &Ellipsoid,
        cfg: &LenstraConfig,
    ) -> Result<Option<Vec<BigInt>>> {
        let p = Program::new(n, polys, rbox.clone())?;
        let r = integer_feasible(&p, start, cfg)?;
        self.stats.merge(&r.stats);
        self.trace.extend(r.trace);
        Ok(match r.outcome {
            Feasibility::Point(x) => Some(x),
            Feasibility::Infeasible => None,
        })
    }
}

/// Solves a bounded problem: feasibility, or exact minimization by search on
/// the objective value.
pub fn solve_bounded(spec: &ProblemSpec, opts: &SolverOptions) -> Result<SolveResult> {
    let n = spec.n;
    let base = normalized_constraints(spec)?;
    let bound = spec.bound.clone().ok_or(Error::MissingBound)?;
    let rbox = bound.box_radius(n)?;
    let start = bound.ellipsoid(n)?;
    let cfg = opts.lenstra_config(n)?;
    let mut run = Run { stats: Stats::default(), trace: Vec::new() };
    let finish = |run: Run, status, point, value| SolveResult {
        status,
        point,
        objective_value: value,
        stats: run.stats,
        bound_used: bound.radius.clone(),
        trace: run.trace,
    };

    let Some(mut best) = run.feasible(n, base.clone(), &rbox, &start, &cfg)? else {
        return Ok(finish(run, Status::Infeasible, None, None));
    };
    let f = match (spec.mode, &spec.objective) {
        (Mode::Minimize, Some(f)) => f,
        _ => return Ok(finish(run, Status::Feasible, Some(best), None)),
    };
    let mut upper = f.eval_int(&best)?;
    let mut lower = -objective_bound(f, &rbox);
    if upper < lower {
        return Err(Error::InvalidProblem("objective bound violated".into()));
    }
    // invariant: the minimum lies in [lower, upper] and `best` attains upper.
    // Proving a sublevel set empty costs far more than finding a point, so
    // every success is followed by a probe at `upper - 1`, which settles the
    // common case where the point found is already optimal. Other queries
    // gallop down from `upper`, then bisect once a query fails.
    let mut gallop = true;
    let (mut probed, mut last_probe) = (false, false);
    let mut step = BigInt::from(2);
    while lower < upper {
        let probe = !probed && !last_probe;
        probed |= probe;
        last_probe = probe;
        let z = if probe {
            &upper - 1u32
        } else if gallop {
            (&upper - &step).max(lower.clone())
        } else {
            (&lower + &upper - 1u32).div_floor(&BigInt::from(2))
        };
        // F(x) <= z  <=>  F(x) - z - 1 < 0
        let mut polys = base.clone();
        polys.insert(0, f.add_constant(&(-&z - 1u32)));
        match run.feasible(n, polys, &rbox, &start, &cfg)? {
            Some(x) => {
                let v = f.eval_int(&x)?;
                if v > z || v < lower {
                    return Err(Error::InvalidProblem(format!(
                        "search lost monotonicity at z = {z}; is the objective quasiconvex?"
                    )));
                }
                upper = v;
                best = x;
                probed = false;
                if !probe && gallop {
                    step *= 2u32;
                }
            }
            None => {
                lower = z + 1u32;
                gallop = false;
            }
        }
    }
    Ok(finish(run, Status::Optimal, Some(best), Some(upper)))
}

/// Solves with the given bound, or by radius doubling when there is none.
pub fn minimize(spec: &ProblemSpec, opts: &SolverOptions) -> Result<SolveResult> {
    spec.validate()?;
    if spec.bound.is_some() {
        solve_bounded(spec, opts)
    } else {
        derive_radius(spec, opts)
    }
}

/// Doubles `R = 2, 4, 8, ...` up to `2^max_radius_bits`. A feasibility
/// problem stops at the first point. A minimization stops when two
/// consecutive radii give the same value and the point lies inside the
/// half-radius ball. Otherwise the status is `BoundExhausted`.
pub fn derive_radius(spec: &ProblemSpec, opts: &SolverOptions) -> Result<SolveResult> {
    let mut stats = Stats::default();
    let mut trace = Vec::new();
    let mut prev: Option<BigInt> = None;
    let mut last: Option<SolveResult> = None;
    for bits in 1..=opts.max_radius_bits.max(1) {
        let r = BigInt::one() << bits;
        let bound = Bound { radius: r.clone(), form: spec.bound.as_ref().and_then(|b| b.form.clone()) };
        let res = solve_bounded(&spec.with_bound(bound.clone()), opts)?;
        stats.merge(&res.stats);
        trace.extend(res.trace.iter().cloned());
        match res.status {
            Status::Feasible => return Ok(SolveResult { stats, trace, ..res }),
            Status::Optimal => {
                let x = res.point.as_ref().expect("optimal has a point");
                let a0 = bound.form_matrix(spec.n);
                let xq: Vec<BigInt> = a0.mul_ivec(x);
                let norm: BigInt = xq.iter().zip(x).map(|(a, b)| a * b).sum();
                let half = &r / 2u32;
                let inside = norm < &half * &half;
                if inside && prev.as_ref() == res.objective_value.as_ref() {
                    return Ok(SolveResult { stats, trace, ..res });
                }
                prev = res.objective_value.clone();
            }
            _ => prev = None,
        }
        last = Some(res);
    }
    let last = last.expect("at least one radius tried");
    Ok(SolveResult {
        status: Status::BoundExhausted,
        point: last.point,
        objective_value: last.objective_value,
        stats,
        bound_used: last.bound_used,
        trace,
    })
}
