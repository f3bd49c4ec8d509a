//! JSON problem and result files.
//!
//! Polynomials are written either as text (`"3*x1^2 - 3*x1^4 + x1^6"`, with
//! 1-based variables) or as a list of terms
//! (`[{"coeff": "-7", "exps": {"0": 2}}]`, with 0-based variable indices).

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::IMatrix;
use crate::solver::{Bound, Mode, ProblemSpec, Relation, SolveResult, Status};
use crate::sparsepoly::{SparsePoly, TermRepr};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolyRepr {
    Text(String),
    Terms(Vec<TermRepr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelRepr {
    #[serde(rename = "<0")]
    Less,
    #[serde(rename = "<=0")]
    LessEq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeRepr {
    Feasibility,
    Minimize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintRepr {
    pub poly: PolyRepr,
    pub rel: RelRepr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRepr {
    pub radius: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<PolyRepr>,
    #[serde(default)]
    pub constraints: Vec<ConstraintRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundRepr>,
    pub mode: ModeRepr,
}

struct Parser<'a> {
    n: usize,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::InvalidPolynomial(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> Result<&str> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    /// factor := integer | x<index>[^<exp>]
    fn factor(&mut self, coeff: &mut BigInt, exps: &mut Vec<(usize, u32)>) -> Result<()> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let idx: usize = self.digits()?.parse().map_err(|_| self.err("bad variable index"))?;
                if idx == 0 || idx > self.n {
                    return Err(self.err(&format!("variable x{idx} outside x1..x{}", self.n)));
                }
                let mut e = 1u32;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    e = self.digits()?.parse().map_err(|_| self.err("bad exponent"))?;
                }
                if e > 0 {
                    exps.push((idx - 1, e));
                }
                Ok(())
            }
            Some(c) if c.is_ascii_digit() => {
                let v: BigInt = self.digits()?.parse().expect("digits");
                *coeff *= v;
                Ok(())
            }
            _ => Err(self.err("expected a number or a variable")),
        }
    }

    fn parse(&mut self) -> Result<SparsePoly> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let mut coeff = BigInt::from(1);
            match self.peek() {
                None if !first => break,
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    self.pos += 1;
                    coeff = BigInt::from(-1);
                }
                _ if first => {}
                _ => return Err(self.err("expected '+' or '-'")),
            }
            first = false;
            let mut exps = Vec::new();
            self.factor(&mut coeff, &mut exps)?;
            while self.peek() == Some(b'*') {
                self.pos += 1;
                self.factor(&mut coeff, &mut exps)?;
            }
            // merge repeated variables within one term
            exps.sort_unstable();
            exps.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            terms.push((coeff, exps));
        }
        SparsePoly::new(self.n, terms)
    }
}

/// Parses text like `"3*x1^2 - 7*x1*x3 + 12"` over `x1..xn`.
pub fn parse_poly(n: usize, text: &str) -> Result<SparsePoly> {
    Parser { n, src: text.as_bytes(), pos: 0 }.parse()
}

impl PolyRepr {
    pub fn to_poly(&self, n: usize) -> Result<SparsePoly> {
        match self {
            PolyRepr::Text(s) => parse_poly(n, s),
            PolyRepr::Terms(t) => SparsePoly::from_terms(n, t),
        }
    }
}

impl ProblemFile {
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let n = self.dimension;
        let ctx = |what: String| move |e: Error| Error::InvalidProblem(format!("{what}: {e}"));
        let objective = self.objective.as_ref().map(|p| p.to_poly(n).map_err(ctx("objective".into()))).transpose()?;
        let constraints = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let p = c.poly.to_poly(n).map_err(ctx(format!("constraints[{i}].poly")))?;
                let rel = match c.rel {
                    RelRepr::Less => Relation::Less,
                    RelRepr::LessEq => Relation::LessEq,
                };
                Ok((p, rel))
            })
            .collect::<Result<Vec<_>>>()?;
        let bound = self.bound.as_ref().map(|b| {
            let form = b.form.as_ref().map(|rows| {
                IMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect())
            });
            Bound { radius: BigInt::from(b.radius), form }
        });
        if let Some(Some(form)) = self.bound.as_ref().map(|b| &b.form) {
            if form.len() != n || form.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidProblem(format!("bound.form must be {n} x {n}")));
            }
        }
        let mode = match self.mode {
            ModeRepr::Feasibility => Mode::Feasibility,
            ModeRepr::Minimize => Mode::Minimize,
        };
        let spec = ProblemSpec { n, objective, constraints, mode, bound };
        spec.validate()?;
        Ok(spec)
    }

    /// Writes polynomials as term lists, the canonical exchange form.
    pub fn from_spec(spec: &ProblemSpec) -> Result<ProblemFile> {
        let terms = |p: &SparsePoly| PolyRepr::Terms(p.to_terms());
        let bound = spec
            .bound
            .as_ref()
            .map(|b| -> Result<BoundRepr> {
                let radius = u64::try_from(&b.radius).map_err(|_| Error::InvalidProblem("radius too large".into()))?;
                let form = b
                    .form
                    .as_ref()
                    .map(|a| {
                        (0..a.rows())
                            .map(|i| {
                                a.row(i)
                                    .iter()
                                    .map(|v| i64::try_from(v).map_err(|_| Error::InvalidProblem("form entry".into())))
                                    .collect()
                            })
                            .collect::<Result<Vec<Vec<i64>>>>()
                    })
                    .transpose()?;
                Ok(BoundRepr { radius, form })
            })
            .transpose()?;
        Ok(ProblemFile {
            dimension: spec.n,
            objective: spec.objective.as_ref().map(terms),
            constraints: spec
                .constraints
                .iter()
                .map(|(p, rel)| ConstraintRepr {
                    poly: terms(p),
                    rel: match rel {
                        Relation::Less => RelRepr::Less,
                        Relation::LessEq => RelRepr::LessEq,
                    },
                })
                .collect(),
            bound,
            mode: match spec.mode {
                Mode::Feasibility => ModeRepr::Feasibility,
                Mode::Minimize => ModeRepr::Minimize,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultStats {
    pub subcases: u64,
    pub depth: usize,
    pub ellipsoid_iters: u64,
    pub svp_calls: u64,
    pub cvp_calls: u64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultFile {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    pub stats: ResultStats,
    pub bound_used: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Feasible => "feasible",
        Status::Infeasible => "infeasible",
        Status::BoundExhausted => "bound_exhausted",
    }
}

impl ResultFile {
    pub fn from_result(r: &SolveResult, wall_ms: u64) -> ResultFile {
        ResultFile {
            status: status_name(r.status).to_string(),
            point: r.point.as_ref().map(|p| p.iter().map(ToString::to_string).collect()),
            objective: r.objective_value.as_ref().map(ToString::to_string),
            stats: ResultStats {
                subcases: r.stats.subcases_total,
                depth: r.stats.max_depth,
                ellipsoid_iters: r.stats.ellipsoid_iterations,
                svp_calls: r.stats.svp_calls,
                cvp_calls: r.stats.cvp_calls,
                wall_ms,
            },
            bound_used: r.bound_used.to_string(),
            verified: None,
        }
    }
}
