//! Integer feasibility by rounding plus flatness branching.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{ceil_sqrt, dot, is_zero_vec, ldlt, QMatrix, QVector, Rational};
use crate::lattice::{complete_basis, cvp, svp, unimodular_inverse, GramForm};
use crate::oracle::{OracleConfig, Program, ProgramOracle};
use crate::rounding::{run_from, Ellipsoid, RoundingConfig, RoundingOutcome, TraceStep};

/// `min { max_{x in E} d^T x - min_{x in E} d^T x } = 2 sqrt(d^T A d)`,
/// returned squared to stay rational.
pub fn width_sq_of_ellipsoid(e: &Ellipsoid, d: &[BigInt]) -> Result<Rational> {
    if d.len() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), got: d.len() });
    }
    let dq: QVector = d.iter().cloned().map(Rational::from_integer).collect();
    if is_zero_vec(&dq) {
        return Err(Error::ZeroDirection);
    }
    Ok(Rational::from_integer(4.into()) * dot(&dq, &e.a_mat.mul_vec(&dq)))
}

#[derive(Clone, Debug)]
pub struct LenstraConfig {
    pub oracle: OracleConfig,
    pub parallel: bool,
    pub trace: bool,
    pub lattice_checks: bool,
}

impl LenstraConfig {
    pub fn new(oracle: OracleConfig) -> Self {
        LenstraConfig { oracle, parallel: false, trace: false, lattice_checks: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DimStats {
    pub nodes: u64,
    pub branch_nodes: u64,
    /// largest certified rounding radius seen at this dimension
    #[serde(serialize_with = "ser_opt_rational")]
    pub max_beta: Option<Rational>,
    pub max_branches: u64,
}

fn ser_opt_rational<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// leaves of the branching tree
    pub subcases_total: u64,
    pub max_depth: usize,
    pub ellipsoid_iterations: u64,
    pub svp_calls: u64,
    pub cvp_calls: u64,
    /// nodes whose branch count exceeded `2 k beta + 3`
    pub branch_bound_violations: u64,
    /// searches whose leaf count exceeded [`Stats::leaf_bound`]
    pub leaf_bound_violations: u64,
    pub per_dim: BTreeMap<usize, DimStats>,
}

impl Stats {
    pub fn merge(&mut self, other: &Stats) {
        self.subcases_total += other.subcases_total;
        self.max_depth = self.max_depth.max(other.max_depth);
        self.ellipsoid_iterations += other.ellipsoid_iterations;
        self.svp_calls += other.svp_calls;
        self.cvp_calls += other.cvp_calls;
        self.branch_bound_violations += other.branch_bound_violations;
        self.leaf_bound_violations += other.leaf_bound_violations;
        for (k, d) in &other.per_dim {
            let mine = self.per_dim.entry(*k).or_default();
            mine.nodes += d.nodes;
            mine.branch_nodes += d.branch_nodes;
            mine.max_branches = mine.max_branches.max(d.max_branches);
            if let Some(b) = &d.max_beta {
                if mine.max_beta.as_ref().is_none_or(|m| b > m) {
                    mine.max_beta = Some(b.clone());
                }
            }
        }
    }

    /// `prod_k (2 k beta_k + 3)` over the dimensions that branched, with
    /// `beta_k` the largest radius seen there. Bounds the number of leaves.
    pub fn leaf_bound(&self) -> Rational {
        self.per_dim
            .iter()
            .filter(|(_, d)| d.branch_nodes > 0)
            .map(|(&k, d)| {
                let beta = d.max_beta.clone().unwrap_or_default();
                Rational::from_integer(BigInt::from(2 * k)) * beta + Rational::from_integer(3.into())
            })
            .fold(Rational::one(), |acc, f| acc * f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    Node { depth: usize, dim: usize, case: &'static str, branch_count: u64 },
    Step { depth: usize, dim: usize, #[serde(flatten)] step: TraceStep },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    /// a feasible integer point in the original coordinates
    Point(Vec<BigInt>),
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct FeasibilityResult {
    pub outcome: Feasibility,
    pub stats: Stats,
    pub trace: Vec<TraceEvent>,
}

struct Search<'a> {
    cfg: &'a LenstraConfig,
    stats: Mutex<Stats>,
    trace: Mutex<Vec<TraceEvent>>,
}

impl Search<'_> {
    fn leaf(&self, depth: usize, dim: usize, case: &'static str) {
        let mut s = self.stats.lock().unwrap();
        s.subcases_total += 1;
        s.max_depth = s.max_depth.max(depth);
        s.per_dim.entry(dim).or_default().nodes += 1;
        drop(s);
        self.event(TraceEvent::Node { depth, dim, case, branch_count: 0 });
    }

    fn event(&self, ev: TraceEvent) {
        if self.cfg.trace {
            self.trace.lock().unwrap().push(ev);
        }
    }

    fn node(&self, p: &Program, start: Option<Ellipsoid>, depth: usize) -> Result<Option<Vec<BigInt>>> {
        let k = p.free_dim();
        let Some(start) = start else {
            // zero free coordinates: the node is a single integer point
            let found = p.is_feasible_int(&[])?;
            self.leaf(depth, 0, if found { "point" } else { "infeasible_point" });
            return if found { Ok(Some(p.lift_int(&[])?)) } else { Ok(None) };
        };
        let oracle = ProgramOracle { program: p, config: &self.cfg.oracle };
        let mut rcfg = RoundingConfig::new(p.epsilon()?);
        rcfg.lattice_checks = self.cfg.lattice_checks;
        rcfg.trace = self.cfg.trace;
        let run = run_from(&oracle, start, &rcfg)?;
        {
            let mut s = self.stats.lock().unwrap();
            s.ellipsoid_iterations += run.iterations as u64;
        }
        for step in run.trace {
            self.event(TraceEvent::Step { depth, dim: k, step });
        }
        let (e, beta) = match run.outcome {
            RoundingOutcome::Empty => {
                self.leaf(depth, k, "empty");
                return Ok(None);
            }
            RoundingOutcome::SmallVolume { .. } => {
                self.leaf(depth, k, "small_volume");
                return Ok(None);
            }
            RoundingOutcome::LatticeFree { .. } => {
                self.leaf(depth, k, "lattice_free");
                return Ok(None);
            }
            RoundingOutcome::IntegerPoint { point } => {
                self.leaf(depth, k, "integer_point");
                return Ok(Some(p.lift_int(&point)?));
            }
            RoundingOutcome::Rounded { ellipsoid, beta } => (ellipsoid, beta),
        };
        {
            let mut s = self.stats.lock().unwrap();
            s.svp_calls += 1;
            let d = s.per_dim.entry(k).or_default();
            if d.max_beta.as_ref().is_none_or(|m| &beta > m) {
                d.max_beta = Some(beta.clone());
            }
        }
        let short = svp(&GramForm::new(e.a_mat.clone())?)?;
        let kr = Rational::from_integer(BigInt::from(k));
        let kbeta = &kr * &beta;
        let four = Rational::from_integer(4.into());
        if &four * &short.squared_length > &kbeta * &kbeta {
            // wide in every lattice direction: the inner ellipsoid holds a
            // lattice point, and the one nearest the center is a candidate
            self.stats.lock().unwrap().cvp_calls += 1;
            let inv = ldlt(&e.a_mat)?.inverse();
            let z = cvp(&GramForm::new(inv)?, &e.center)?;
            let zq: QVector = z.iter().cloned().map(Rational::from_integer).collect();
            let inner = e.shrink(&beta);
            if inner.contains(&zq)? && p.is_feasible_int(&z)? {
                self.leaf(depth, k, "wide");
                return Ok(Some(p.lift_int(&z)?));
            }
        }
        self.branch(p, &e, &beta, &short.vector, depth)
    }

    fn branch(
        &self,
        p: &Program,
        e: &Ellipsoid,
        beta: &Rational,
        d: &[BigInt],
        depth: usize,
    ) -> Result<Option<Vec<BigInt>>> {
        let k = p.free_dim();
        let bc = complete_basis(d)?;
        let u = unimodular_inverse(&bc)?.transpose();
        let bq = bc.to_q();
        let m = bq.transpose().mul(&e.a_mat).mul(&bq);
        let mc = bq.transpose().mul_vec(&e.center);
        let last = k - 1;
        let mkk = m[(last, last)].clone();
        let mk = mc[last].clone();
        let kbeta = Rational::from_integer(BigInt::from(k)) * beta;
        let reach = (kbeta.floor().to_integer() + 1u32).max(ceil_sqrt(&mkk) + 1u32);
        let reach = reach.to_u64().ok_or(Error::InternalRootBudget)?;
        let count = 2 * reach + 1;
        let allowed = Rational::from_integer(2.into()) * &kbeta + Rational::from_integer(3.into());
        {
            let mut s = self.stats.lock().unwrap();
            s.max_depth = s.max_depth.max(depth);
            if Rational::from_integer(BigInt::from(count)) > allowed {
                s.branch_bound_violations += 1;
            }
            let dstat = s.per_dim.entry(k).or_default();
            dstat.nodes += 1;
            dstat.branch_nodes += 1;
            dstat.max_branches = dstat.max_branches.max(count);
        }
        self.event(TraceEvent::Node { depth, dim: k, case: "branch", branch_count: count });

        let base = mk.floor().to_integer();
        let offsets: Vec<i64> =
            std::iter::once(0).chain((1..=reach as i64).flat_map(|z| [z, -z])).collect();
        let child = |z: &i64| -> Result<Option<Vec<BigInt>>> {
            let t = &base + BigInt::from(*z);
            let diff = Rational::from_integer(t.clone()) - &mk;
            let diff2 = &diff * &diff;
            if diff2 >= mkk {
                self.leaf(depth + 1, last, "empty_slice");
                return Ok(None);
            }
            let cp = p.push(u.clone(), t)?;
            if last == 0 {
                return self.node(&cp, None, depth + 1);
            }
            let shrink = Rational::one() - &diff2 / &mkk;
            let center: QVector =
                (0..last).map(|i| &mc[i] + &m[(i, last)] * &diff / &mkk).collect();
            let shape = QMatrix::from_rows(
                (0..last)
                    .map(|i| {
                        (0..last).map(|j| (&m[(i, j)] - &m[(i, last)] * &m[(last, j)] / &mkk) * &shrink).collect()
                    })
                    .collect(),
            );
            self.node(&cp, Some(Ellipsoid::new(shape, center)?), depth + 1)
        };
        if self.cfg.parallel {
            offsets
                .par_iter()
                .find_map_first(|z| child(z).transpose())
                .transpose()
        } else {
            for z in &offsets {
                if let Some(pt) = child(z)? {
                    return Ok(Some(pt));
                }
            }
            Ok(None)
        }
    }
}

/// Decides whether `{x in Z^n : F_i(x) < 0 for all i}` is nonempty, starting
/// from an ellipsoid known to contain the feasible set.
pub fn integer_feasible(p: &Program, start: &Ellipsoid, cfg: &LenstraConfig) -> Result<FeasibilityResult> {
    let n = p.free_dim();
    if start.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: start.dim() });
    }
    let search = Search { cfg, stats: Mutex::new(Stats::default()), trace: Mutex::new(Vec::new()) };
    let found = search.node(p, (n > 0).then(|| start.clone()), 0)?;
    let mut stats = search.stats.into_inner().unwrap();
    if Rational::from_integer(stats.subcases_total.into()) > stats.leaf_bound() {
        stats.leaf_bound_violations += 1;
    }
    let trace = search.trace.into_inner().unwrap();
    let outcome = match found {
        Some(x) => Feasibility::Point(x),
        None => Feasibility::Infeasible,
    };
    Ok(FeasibilityResult { outcome, stats, trace })
}
