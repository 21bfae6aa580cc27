//! Outcome spaces `(O, *)` and their additive utility representations.
//!
//! Six concrete spaces are supported. Each one has a composition operation
//! `*` for combining the outcomes of unrelated actions, an irrelevant outcome
//! `e` with `e * x = x * e = x`, and (where the space allows it) a way to
//! compensate one outcome into another. A [`Utility`] is a real functional
//! that is additive over `*`: `u(x * y) = u(x) + u(y)`.
//!
//! | space                   | `*`                     | utility                         |
//! |-------------------------|-------------------------|---------------------------------|
//! | real scalar             | sum                     | `β·x`                           |
//! | real vector             | componentwise sum       | `w·x`                           |
//! | mean / std. deviation   | `(m1+m2, √(σ1²+σ2²))`   | `γ1·m + γ2·σ²`                  |
//! | discrete distribution   | convolution             | `Σ γ_l κ_l(x)` (cumulants)      |
//! | prize stream            | concatenation           | `Σ_p w(p)·count_p(x)`           |
//! | invertible matrix       | matrix product          | `β·ln|det x|`                   |

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hashing::Digest;

/// Tolerance on the total probability of a user-supplied distribution.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Relative distance under which two support points are merged by convolution.
pub const SUPPORT_MERGE_TOL: f64 = 1e-12;

/// Matrices whose condition number exceeds this are refused by `compensate`.
pub const MAX_CONDITION: f64 = 1e12;

/// Descriptor of an outcome space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeSpace {
    RealScalar,
    /// `d` coordinates, e.g. states of the world or points of a time grid.
    RealVector { d: usize },
    MeanStddev,
    /// Finite-support distributions; utilities use cumulants up to `moment_order`.
    DiscreteDistribution { moment_order: usize },
    PrizeStream { alphabet: Vec<String> },
    /// Invertible `d × d` matrices.
    Matrix { d: usize },
}

impl OutcomeSpace {
    pub fn validate(&self) -> Result<()> {
        match self {
            OutcomeSpace::RealVector { d } | OutcomeSpace::Matrix { d } if *d == 0 => {
                Err(Error::InvalidOutcome(format!("{} requires d >= 1", self.kind_name())))
            }
            OutcomeSpace::PrizeStream { alphabet } => {
                if alphabet.is_empty() {
                    return Err(Error::InvalidOutcome("prize alphabet is empty".into()));
                }
                let mut seen = std::collections::HashSet::new();
                for p in alphabet {
                    if !seen.insert(p) {
                        return Err(Error::InvalidOutcome(format!("duplicate prize {p:?}")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            OutcomeSpace::RealScalar => "real_scalar",
            OutcomeSpace::RealVector { .. } => "real_vector",
            OutcomeSpace::MeanStddev => "mean_stddev",
            OutcomeSpace::DiscreteDistribution { .. } => "discrete_distribution",
            OutcomeSpace::PrizeStream { .. } => "prize_stream",
            OutcomeSpace::Matrix { .. } => "matrix",
        }
    }

    /// Whether `*` is commutative and associative on this space.
    pub fn is_commutative(&self) -> bool {
        !matches!(self, OutcomeSpace::PrizeStream { .. } | OutcomeSpace::Matrix { .. })
    }

    pub(crate) fn digest(&self, h: &mut Digest) {
        h.write_str(self.kind_name());
        match self {
            OutcomeSpace::RealVector { d } | OutcomeSpace::Matrix { d } => {
                h.write(*d as u64);
            }
            OutcomeSpace::DiscreteDistribution { moment_order } => {
                h.write(*moment_order as u64);
            }
            OutcomeSpace::PrizeStream { alphabet } => {
                h.write(alphabet.len() as u64);
                for p in alphabet {
                    h.write_str(p);
                }
            }
            _ => {}
        }
    }
}

impl fmt::Display for OutcomeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeSpace::RealVector { d } => write!(f, "real_vector(d={d})"),
            OutcomeSpace::DiscreteDistribution { moment_order } => {
                write!(f, "discrete_distribution(n={moment_order})")
            }
            OutcomeSpace::PrizeStream { alphabet } => {
                write!(f, "prize_stream({})", alphabet.join(","))
            }
            OutcomeSpace::Matrix { d } => write!(f, "matrix(d={d})"),
            other => f.write_str(other.kind_name()),
        }
    }
}

/// A random reward summarised by its mean and standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStd {
    pub m: f64,
    pub sigma: f64,
}

/// A probability distribution with finite support, kept sorted by support point.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates and sorts a user-supplied distribution.
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::InvalidOutcome(
                "support and probs have different lengths".into(),
            ));
        }
        if support.is_empty() {
            return Err(Error::InvalidOutcome("empty support".into()));
        }
        if support.iter().chain(&probs).any(|v| !v.is_finite()) {
            return Err(Error::InvalidOutcome("non-finite value in distribution".into()));
        }
        if probs.iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidOutcome("probabilities must be strictly positive".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidOutcome(format!("probabilities sum to {total}, not 1")));
        }
        let mut atoms: Vec<(f64, f64)> = support.into_iter().zip(probs).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidOutcome("support points must be distinct".into()));
        }
        let (support, probs) = atoms.into_iter().unzip();
        Ok(Distribution { support, probs })
    }

    pub fn point_mass(c: f64) -> Self {
        Distribution { support: vec![c], probs: vec![1.0] }
    }

    /// Builds a distribution from raw atoms, merging points closer than
    /// [`SUPPORT_MERGE_TOL`] (relative).
    pub(crate) fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match support.last() {
                Some(&last)
                    if (x - last).abs()
                        <= SUPPORT_MERGE_TOL * 1f64.max(x.abs()).max(last.abs()) =>
                {
                    *probs.last_mut().unwrap() += p;
                }
                _ => {
                    support.push(x);
                    probs.push(p);
                }
            }
        }
        Distribution { support, probs }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn raw_moment(&self, k: u32) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| p * x.powi(k as i32))
            .sum()
    }

    /// Distribution of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &Distribution) -> Distribution {
        let mut atoms = Vec::with_capacity(self.support.len() * other.support.len());
        for (x, p) in self.support.iter().zip(&self.probs) {
            for (y, q) in other.support.iter().zip(&other.probs) {
                atoms.push((x + y, p * q));
            }
        }
        Distribution::from_atoms(atoms)
    }

    fn shifted(&self, c: f64) -> Distribution {
        Distribution {
            support: self.support.iter().map(|x| x + c).collect(),
            probs: self.probs.clone(),
        }
    }

    fn point_mass_location(&self) -> Option<f64> {
        (self.support.len() == 1).then(|| self.support[0])
    }
}

/// Cumulants `(κ_1, …, κ_n)` of a finite-support distribution.
///
/// Computed from exact raw moments with the recursion
/// `κ_j = m_j − Σ_{i<j} C(j−1, i−1) κ_i m_{j−i}`.
pub fn cumulants(x: &Distribution, n: usize) -> Vec<f64> {
    let moments: Vec<f64> = (0..=n as u32).map(|k| x.raw_moment(k)).collect();
    let mut kappa = vec![0.0; n + 1];
    for j in 1..=n {
        let mut acc = moments[j];
        let mut binom = 1.0; // C(j-1, i-1) for i = 1
        for i in 1..j {
            acc -= binom * kappa[i] * moments[j - i];
            binom = binom * (j - i) as f64 / i as f64;
        }
        kappa[j] = acc;
    }
    kappa.remove(0);
    kappa
}

/// A single outcome. The owning [`OutcomeSpace`] is carried by the menu.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Scalar(f64),
    Vector(Vec<f64>),
    MeanStd(MeanStd),
    Distribution(Distribution),
    Stream(Vec<String>),
    Matrix(DMatrix<f64>),
}

/// Which side the compensating outcome sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `x2 = s * x`
    Left,
    /// `x = s * x2`
    Right,
}

fn mismatch(x: &Outcome, y: &Outcome) -> Error {
    Error::IncompatibleSpaces(format!("{} vs {}", x.kind_name(), y.kind_name()))
}

impl Outcome {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Outcome::Scalar(_) => "real_scalar",
            Outcome::Vector(_) => "real_vector",
            Outcome::MeanStd(_) => "mean_stddev",
            Outcome::Distribution(_) => "discrete_distribution",
            Outcome::Stream(_) => "prize_stream",
            Outcome::Matrix(_) => "matrix",
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Outcome::Scalar(x) => Some(*x),
            _ => None,
        }
    }

    /// Checks that this outcome is a member of `space`.
    pub fn check_in(&self, space: &OutcomeSpace) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidOutcome(msg));
        match (space, self) {
            (OutcomeSpace::RealScalar, Outcome::Scalar(x)) => {
                if !x.is_finite() {
                    return bad(format!("non-finite scalar {x}"));
                }
            }
            (OutcomeSpace::RealVector { d }, Outcome::Vector(v)) => {
                if v.len() != *d {
                    return bad(format!("vector of length {} in space with d={d}", v.len()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return bad("non-finite vector component".into());
                }
            }
            (OutcomeSpace::MeanStddev, Outcome::MeanStd(ms)) => {
                if !(ms.m.is_finite() && ms.sigma.is_finite()) || ms.sigma < 0.0 {
                    return bad(format!("mean/stddev ({}, {}) needs sigma >= 0", ms.m, ms.sigma));
                }
            }
            (OutcomeSpace::DiscreteDistribution { .. }, Outcome::Distribution(_)) => {}
            (OutcomeSpace::PrizeStream { alphabet }, Outcome::Stream(s)) => {
                if let Some(p) = s.iter().find(|p| !alphabet.contains(p)) {
                    return bad(format!("prize {p:?} not in alphabet"));
                }
            }
            (OutcomeSpace::Matrix { d }, Outcome::Matrix(m)) => {
                if m.nrows() != *d || m.ncols() != *d {
                    return bad(format!("{}x{} matrix in space with d={d}", m.nrows(), m.ncols()));
                }
                if m.iter().any(|x| !x.is_finite()) {
                    return bad("non-finite matrix entry".into());
                }
                if m.clone().determinant().abs() <= 0.0 {
                    return bad("matrix is not invertible".into());
                }
            }
            _ => {
                return Err(Error::IncompatibleSpaces(format!(
                    "{} outcome in {} space",
                    self.kind_name(),
                    space.kind_name()
                )))
            }
        }
        Ok(())
    }

    /// `x * y`.
    pub fn compose(&self, other: &Outcome) -> Result<Outcome> {
        Ok(match (self, other) {
            (Outcome::Scalar(x), Outcome::Scalar(y)) => Outcome::Scalar(x + y),
            (Outcome::Vector(x), Outcome::Vector(y)) => {
                if x.len() != y.len() {
                    return Err(Error::IncompatibleSpaces(format!(
                        "vectors of length {} and {}",
                        x.len(),
                        y.len()
                    )));
                }
                Outcome::Vector(x.iter().zip(y).map(|(a, b)| a + b).collect())
            }
            (Outcome::MeanStd(x), Outcome::MeanStd(y)) => Outcome::MeanStd(MeanStd {
                m: x.m + y.m,
                sigma: x.sigma.hypot(y.sigma),
            }),
            (Outcome::Distribution(x), Outcome::Distribution(y)) => {
                Outcome::Distribution(x.convolve(y))
            }
            (Outcome::Stream(x), Outcome::Stream(y)) => {
                Outcome::Stream(x.iter().chain(y).cloned().collect())
            }
            (Outcome::Matrix(x), Outcome::Matrix(y)) => {
                if x.shape() != y.shape() {
                    return Err(Error::IncompatibleSpaces("matrix dimensions differ".into()));
                }
                Outcome::Matrix(x * y)
            }
            _ => return Err(mismatch(self, other)),
        })
    }

    /// The irrelevant outcome `e` of `space`.
    pub fn identity(space: &OutcomeSpace) -> Outcome {
        match space {
            OutcomeSpace::RealScalar => Outcome::Scalar(0.0),
            OutcomeSpace::RealVector { d } => Outcome::Vector(vec![0.0; *d]),
            OutcomeSpace::MeanStddev => Outcome::MeanStd(MeanStd { m: 0.0, sigma: 0.0 }),
            OutcomeSpace::DiscreteDistribution { .. } => {
                Outcome::Distribution(Distribution::point_mass(0.0))
            }
            OutcomeSpace::PrizeStream { .. } => Outcome::Stream(Vec::new()),
            OutcomeSpace::Matrix { d } => Outcome::Matrix(DMatrix::identity(*d, *d)),
        }
    }

    /// Finds `s` with `target = s * self` ([`Side::Left`]) or `self = s * target`
    /// ([`Side::Right`]).
    ///
    /// Prize streams only compensate along suffixes, and distributions only when
    /// one side is a point mass; other cases return [`Error::NoCompensation`].
    pub fn compensate(&self, target: &Outcome) -> Result<(Side, Outcome)> {
        match (self, target) {
            (Outcome::Scalar(x), Outcome::Scalar(x2)) => Ok((Side::Left, Outcome::Scalar(x2 - x))),
            (Outcome::Vector(x), Outcome::Vector(x2)) => {
                if x.len() != x2.len() {
                    return Err(mismatch(self, target));
                }
                Ok((Side::Left, Outcome::Vector(x2.iter().zip(x).map(|(b, a)| b - a).collect())))
            }
            (Outcome::MeanStd(x), Outcome::MeanStd(x2)) => {
                if x2.sigma >= x.sigma {
                    let sigma = ((x2.sigma - x.sigma) * (x2.sigma + x.sigma)).max(0.0).sqrt();
                    Ok((Side::Left, Outcome::MeanStd(MeanStd { m: x2.m - x.m, sigma })))
                } else {
                    let sigma = ((x.sigma - x2.sigma) * (x.sigma + x2.sigma)).sqrt();
                    Ok((Side::Right, Outcome::MeanStd(MeanStd { m: x.m - x2.m, sigma })))
                }
            }
            (Outcome::Distribution(x), Outcome::Distribution(x2)) => {
                if let Some(c) = x.point_mass_location() {
                    Ok((Side::Left, Outcome::Distribution(x2.shifted(-c))))
                } else if let Some(c) = x2.point_mass_location() {
                    Ok((Side::Right, Outcome::Distribution(x.shifted(-c))))
                } else {
                    Err(Error::NoCompensation)
                }
            }
            (Outcome::Stream(x), Outcome::Stream(x2)) => {
                if x2.ends_with(x) {
                    Ok((Side::Left, Outcome::Stream(x2[..x2.len() - x.len()].to_vec())))
                } else if x.ends_with(x2) {
                    Ok((Side::Right, Outcome::Stream(x[..x.len() - x2.len()].to_vec())))
                } else {
                    Err(Error::NoCompensation)
                }
            }
            (Outcome::Matrix(x), Outcome::Matrix(x2)) => {
                if x.shape() != x2.shape() {
                    return Err(mismatch(self, target));
                }
                let cond = condition_number(x);
                if !(cond <= MAX_CONDITION) {
                    return Err(Error::IllConditioned(cond));
                }
                let inv = x.clone().try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
                Ok((Side::Left, Outcome::Matrix(x2 * inv)))
            }
            _ => Err(mismatch(self, target)),
        }
    }

    /// Component-wise comparison within `tol`; streams compare exactly.
    pub fn approx_eq(&self, other: &Outcome, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol;
        match (self, other) {
            (Outcome::Scalar(a), Outcome::Scalar(b)) => close(*a, *b),
            (Outcome::Vector(a), Outcome::Vector(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y))
            }
            (Outcome::MeanStd(a), Outcome::MeanStd(b)) => close(a.m, b.m) && close(a.sigma, b.sigma),
            (Outcome::Distribution(a), Outcome::Distribution(b)) => {
                a.support.len() == b.support.len()
                    && a.support.iter().zip(&b.support).all(|(x, y)| close(*x, *y))
                    && a.probs.iter().zip(&b.probs).all(|(x, y)| close(*x, *y))
            }
            (Outcome::Stream(a), Outcome::Stream(b)) => a == b,
            (Outcome::Matrix(a), Outcome::Matrix(b)) => {
                a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| close(*x, *y))
            }
            _ => false,
        }
    }

    /// A total order used to sort outcome multisets.
    pub fn total_cmp(&self, other: &Outcome) -> Ordering {
        fn slices(a: &[f64], b: &[f64]) -> Ordering {
            for (x, y) in a.iter().zip(b) {
                match x.total_cmp(y) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            a.len().cmp(&b.len())
        }
        match (self, other) {
            (Outcome::Scalar(a), Outcome::Scalar(b)) => a.total_cmp(b),
            (Outcome::Vector(a), Outcome::Vector(b)) => slices(a, b),
            (Outcome::MeanStd(a), Outcome::MeanStd(b)) => {
                a.m.total_cmp(&b.m).then(a.sigma.total_cmp(&b.sigma))
            }
            (Outcome::Distribution(a), Outcome::Distribution(b)) => {
                slices(&a.support, &b.support).then_with(|| slices(&a.probs, &b.probs))
            }
            (Outcome::Stream(a), Outcome::Stream(b)) => a.cmp(b),
            (Outcome::Matrix(a), Outcome::Matrix(b)) => slices(a.as_slice(), b.as_slice()),
            _ => self.kind_name().cmp(other.kind_name()),
        }
    }

    /// Hash of the outcome with reals rounded to 12 significant digits.
    pub(crate) fn digest(&self, h: &mut Digest) {
        match self {
            Outcome::Scalar(x) => {
                h.write_f64(*x);
            }
            Outcome::Vector(v) => {
                h.write(v.len() as u64);
                v.iter().for_each(|x| {
                    h.write_f64(*x);
                });
            }
            Outcome::MeanStd(ms) => {
                h.write_f64(ms.m).write_f64(ms.sigma);
            }
            Outcome::Distribution(d) => {
                h.write(d.support.len() as u64);
                for (x, p) in d.support.iter().zip(&d.probs) {
                    h.write_f64(*x).write_f64(*p);
                }
            }
            Outcome::Stream(s) => {
                h.write(s.len() as u64);
                s.iter().for_each(|p| {
                    h.write_str(p);
                });
            }
            Outcome::Matrix(m) => {
                h.write(m.nrows() as u64);
                // row-major so the digest matches the JSON encoding order
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        h.write_f64(m[(r, c)]);
                    }
                }
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Outcome::Scalar(x) => json!(x),
            Outcome::Vector(v) => json!(v),
            Outcome::MeanStd(ms) => json!({"m": ms.m, "sigma": ms.sigma}),
            Outcome::Distribution(d) => json!({"support": d.support, "probs": d.probs}),
            Outcome::Stream(s) => json!(s),
            Outcome::Matrix(m) => {
                let rows: Vec<Vec<f64>> =
                    m.row_iter().map(|r| r.iter().copied().collect()).collect();
                json!(rows)
            }
        }
    }

    /// Decodes the JSON encoding of an outcome of `space` and validates it.
    pub fn from_json(space: &OutcomeSpace, value: &Value) -> Result<Outcome> {
        let bad = || Error::InvalidOutcome(format!("cannot read {} outcome from {value}", space.kind_name()));
        let num = |v: &Value| v.as_f64().ok_or_else(bad);
        let nums = |v: &Value| -> Result<Vec<f64>> {
            v.as_array().ok_or_else(bad)?.iter().map(num).collect()
        };
        let outcome = match space {
            OutcomeSpace::RealScalar => Outcome::Scalar(num(value)?),
            OutcomeSpace::RealVector { .. } => Outcome::Vector(nums(value)?),
            OutcomeSpace::MeanStddev => {
                let m = num(value.get("m").ok_or_else(bad)?)?;
                let sigma = num(value.get("sigma").ok_or_else(bad)?)?;
                Outcome::MeanStd(MeanStd { m, sigma })
            }
            OutcomeSpace::DiscreteDistribution { .. } => {
                let support = nums(value.get("support").ok_or_else(bad)?)?;
                let probs = nums(value.get("probs").ok_or_else(bad)?)?;
                Outcome::Distribution(Distribution::new(support, probs)?)
            }
            OutcomeSpace::PrizeStream { .. } => Outcome::Stream(
                value
                    .as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|p| p.as_str().map(str::to_owned).ok_or_else(bad))
                    .collect::<Result<_>>()?,
            ),
            OutcomeSpace::Matrix { d } => {
                let rows = value.as_array().ok_or_else(bad)?;
                let mut entries = Vec::with_capacity(d * d);
                for row in rows {
                    let row = nums(row)?;
                    if row.len() != *d {
                        return Err(bad());
                    }
                    entries.extend(row);
                }
                if rows.len() != *d {
                    return Err(bad());
                }
                Outcome::Matrix(DMatrix::from_row_slice(*d, *d, &entries))
            }
        };
        outcome.check_in(space)?;
        Ok(outcome)
    }
}

/// Ratio of extreme singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// An additive utility representation, one functional form per space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Utility {
    RealScalar { beta: f64 },
    RealVector { weights: Vec<f64> },
    MeanStddev { gamma1: f64, gamma2: f64 },
    /// Coefficients of the cumulants `κ_1 … κ_n`.
    DiscreteDistribution { gammas: Vec<f64> },
    PrizeStream { weights: BTreeMap<String, f64> },
    /// Coefficient of `ln|det x|`.
    Matrix { beta: f64 },
}

impl Utility {
    /// The identically-zero representation on `space`.
    pub fn zero(space: &OutcomeSpace) -> Utility {
        Utility::from_parameters(space, &vec![0.0; Utility::parameter_count(space)])
            .expect("parameter count matches")
    }

    pub fn parameter_count(space: &OutcomeSpace) -> usize {
        match space {
            OutcomeSpace::RealScalar | OutcomeSpace::Matrix { .. } => 1,
            OutcomeSpace::MeanStddev => 2,
            OutcomeSpace::RealVector { d } => *d,
            OutcomeSpace::DiscreteDistribution { moment_order } => *moment_order,
            OutcomeSpace::PrizeStream { alphabet } => alphabet.len(),
        }
    }

    /// Builds a representation from its flat parameter vector. Prize weights
    /// follow the alphabet's sorted order.
    pub fn from_parameters(space: &OutcomeSpace, params: &[f64]) -> Result<Utility> {
        if params.len() != Utility::parameter_count(space) {
            return Err(Error::IncompatibleSpaces(format!(
                "{} parameters for {space}",
                params.len()
            )));
        }
        Ok(match space {
            OutcomeSpace::RealScalar => Utility::RealScalar { beta: params[0] },
            OutcomeSpace::RealVector { .. } => Utility::RealVector { weights: params.to_vec() },
            OutcomeSpace::MeanStddev => Utility::MeanStddev { gamma1: params[0], gamma2: params[1] },
            OutcomeSpace::DiscreteDistribution { .. } => {
                Utility::DiscreteDistribution { gammas: params.to_vec() }
            }
            OutcomeSpace::PrizeStream { alphabet } => {
                let mut labels: Vec<&String> = alphabet.iter().collect();
                labels.sort();
                Utility::PrizeStream {
                    weights: labels.into_iter().cloned().zip(params.iter().copied()).collect(),
                }
            }
            OutcomeSpace::Matrix { .. } => Utility::Matrix { beta: params[0] },
        })
    }

    pub fn parameters(&self) -> Vec<f64> {
        match self {
            Utility::RealScalar { beta } | Utility::Matrix { beta } => vec![*beta],
            Utility::RealVector { weights } => weights.clone(),
            Utility::MeanStddev { gamma1, gamma2 } => vec![*gamma1, *gamma2],
            Utility::DiscreteDistribution { gammas } => gammas.clone(),
            Utility::PrizeStream { weights } => weights.values().copied().collect(),
        }
    }

    /// Whether this representation can evaluate outcomes of `space`.
    pub fn fits(&self, space: &OutcomeSpace) -> bool {
        match (self, space) {
            (Utility::RealScalar { .. }, OutcomeSpace::RealScalar)
            | (Utility::MeanStddev { .. }, OutcomeSpace::MeanStddev)
            | (Utility::Matrix { .. }, OutcomeSpace::Matrix { .. }) => true,
            (Utility::RealVector { weights }, OutcomeSpace::RealVector { d }) => weights.len() == *d,
            (Utility::DiscreteDistribution { gammas }, OutcomeSpace::DiscreteDistribution { moment_order }) => {
                gammas.len() == *moment_order
            }
            (Utility::PrizeStream { weights }, OutcomeSpace::PrizeStream { alphabet }) => {
                alphabet.iter().all(|p| weights.contains_key(p))
            }
            _ => false,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Utility::RealScalar { .. } => "real_scalar",
            Utility::RealVector { .. } => "real_vector",
            Utility::MeanStddev { .. } => "mean_stddev",
            Utility::DiscreteDistribution { .. } => "discrete_distribution",
            Utility::PrizeStream { .. } => "prize_stream",
            Utility::Matrix { .. } => "matrix",
        }
    }

    /// `u(x)`.
    pub fn evaluate(&self, x: &Outcome) -> Result<f64> {
        let mismatch = || {
            Error::IncompatibleSpaces(format!("{} utility on {} outcome", self.kind_name(), x.kind_name()))
        };
        Ok(match (self, x) {
            (Utility::RealScalar { beta }, Outcome::Scalar(v)) => beta * v,
            (Utility::RealVector { weights }, Outcome::Vector(v)) => {
                if weights.len() != v.len() {
                    return Err(mismatch());
                }
                weights.iter().zip(v).map(|(w, v)| w * v).sum()
            }
            (Utility::MeanStddev { gamma1, gamma2 }, Outcome::MeanStd(ms)) => {
                gamma1 * ms.m + gamma2 * ms.sigma * ms.sigma
            }
            (Utility::DiscreteDistribution { gammas }, Outcome::Distribution(d)) => {
                if gammas.is_empty() {
                    return Ok(0.0);
                }
                cumulants(d, gammas.len()).iter().zip(gammas).map(|(k, g)| k * g).sum()
            }
            (Utility::PrizeStream { weights }, Outcome::Stream(s)) => {
                let mut total = 0.0;
                for p in s {
                    total += weights.get(p).ok_or_else(|| {
                        Error::IncompatibleSpaces(format!("no weight for prize {p:?}"))
                    })?;
                }
                total
            }
            (Utility::Matrix { beta }, Outcome::Matrix(m)) => {
                if *beta == 0.0 {
                    0.0
                } else {
                    beta * m.clone().determinant().abs().ln()
                }
            }
            _ => return Err(mismatch()),
        })
    }

    /// The linear features of `x` against which [`Utility::parameters`] act,
    /// so that `evaluate(x) = parameters · features(x)`.
    pub fn features(&self, x: &Outcome) -> Result<Vec<f64>> {
        let mismatch = || {
            Error::IncompatibleSpaces(format!("{} utility on {} outcome", self.kind_name(), x.kind_name()))
        };
        Ok(match (self, x) {
            (Utility::RealScalar { .. }, Outcome::Scalar(v)) => vec![*v],
            (Utility::RealVector { weights }, Outcome::Vector(v)) if weights.len() == v.len() => v.clone(),
            (Utility::MeanStddev { .. }, Outcome::MeanStd(ms)) => vec![ms.m, ms.sigma * ms.sigma],
            (Utility::DiscreteDistribution { gammas }, Outcome::Distribution(d)) => cumulants(d, gammas.len()),
            (Utility::PrizeStream { weights }, Outcome::Stream(s)) => {
                let mut counts = vec![0.0; weights.len()];
                for p in s {
                    let idx = weights.keys().position(|k| k == p).ok_or_else(mismatch)?;
                    counts[idx] += 1.0;
                }
                counts
            }
            (Utility::Matrix { .. }, Outcome::Matrix(m)) => vec![m.clone().determinant().abs().ln()],
            _ => return Err(mismatch()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(m: f64, sigma: f64) -> Outcome {
        Outcome::MeanStd(MeanStd { m, sigma })
    }

    #[test]
    fn compose_scalars() {
        let z = Outcome::Scalar(3.14).compose(&Outcome::Scalar(-17.0)).unwrap();
        assert!((z.as_scalar().unwrap() + 13.86).abs() < 1e-12);
    }

    #[test]
    fn compose_mean_stddev() {
        match ms(5.0, 2.0).compose(&ms(-0.01, 0.05)).unwrap() {
            Outcome::MeanStd(r) => {
                assert!((r.m - 4.99).abs() < 1e-12);
                assert!((r.sigma - 4.0025f64.sqrt()).abs() < 1e-12);
                assert!((r.sigma - 2.000625).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn compose_streams_and_point_masses() {
        let ab = Outcome::Stream(vec!["a".into(), "b".into()]);
        assert_eq!(ab.compose(&Outcome::Stream(vec![])).unwrap(), ab);

        let one = Outcome::Distribution(Distribution::point_mass(1.0));
        let two = Outcome::Distribution(Distribution::point_mass(2.0));
        assert_eq!(
            one.compose(&two).unwrap(),
            Outcome::Distribution(Distribution::point_mass(3.0))
        );
    }

    #[test]
    fn compose_rejects_mixed_spaces() {
        let err = Outcome::Scalar(1.0).compose(&Outcome::Vector(vec![1.0])).unwrap_err();
        assert!(err.to_string().contains("incompatible outcome spaces"));
        let err = Outcome::Vector(vec![1.0]).compose(&Outcome::Vector(vec![1.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::IncompatibleSpaces(_)));
    }

    #[test]
    fn convolution_merges_colliding_points() {
        let coin = Distribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let two = coin.convolve(&coin);
        assert_eq!(two.support(), &[0.0, 1.0, 2.0]);
        assert_eq!(two.probs(), &[0.25, 0.5, 0.25]);

        let thirds = Distribution::new(vec![0.1, 0.2], vec![0.5, 0.5]).unwrap();
        let shifted = Distribution::new(vec![0.2, 0.1 + 1e-15], vec![0.5, 0.5]);
        // 0.1 and 0.1+1e-15 are distinct as user input ...
        assert!(shifted.is_ok());
        // ... but 0.1+0.2 and 0.2+0.1 collide after convolution
        let c = thirds.convolve(&thirds);
        assert_eq!(c.support().len(), 3);
    }

    #[test]
    fn identities() {
        assert_eq!(Outcome::identity(&OutcomeSpace::RealScalar), Outcome::Scalar(0.0));
        assert_eq!(
            Outcome::identity(&OutcomeSpace::Matrix { d: 2 }),
            Outcome::Matrix(DMatrix::identity(2, 2))
        );
        assert_eq!(
            Outcome::identity(&OutcomeSpace::PrizeStream { alphabet: vec!["g".into()] }),
            Outcome::Stream(vec![])
        );
    }

    #[test]
    fn compensation_examples() {
        let (side, s) = Outcome::Scalar(-17.0).compensate(&Outcome::Scalar(42.0)).unwrap();
        assert_eq!((side, s), (Side::Left, Outcome::Scalar(59.0)));

        let target = ms(4.99, 2.000625);
        let (side, s) = ms(0.0, 0.0).compensate(&target).unwrap();
        assert_eq!(side, Side::Left);
        assert!(s.approx_eq(&target, 1e-12));

        let (side, s) = ms(1.0, 3.0).compensate(&ms(0.0, 1.0)).unwrap();
        assert_eq!(side, Side::Right);
        assert!(s.compose(&ms(0.0, 1.0)).unwrap().approx_eq(&ms(1.0, 3.0), 1e-12));

        let i = Outcome::identity(&OutcomeSpace::Matrix { d: 2 });
        let d = Outcome::Matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0])));
        let (side, s) = i.compensate(&d).unwrap();
        assert_eq!(side, Side::Left);
        assert!(s.approx_eq(&d, 1e-12));
    }

    #[test]
    fn stream_compensation_is_partial() {
        let s = |v: &[&str]| Outcome::Stream(v.iter().map(|x| x.to_string()).collect());
        assert_eq!(s(&["b"]).compensate(&s(&["a", "b"])).unwrap(), (Side::Left, s(&["a"])));
        assert_eq!(s(&["a", "b"]).compensate(&s(&["b"])).unwrap(), (Side::Right, s(&["a"])));
        let err = s(&["a"]).compensate(&s(&["b"])).unwrap_err();
        assert_eq!(err.to_string(), "no compensating outcome");
    }

    #[test]
    fn matrix_compensation_refuses_ill_conditioned() {
        let x = Outcome::Matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]));
        let y = Outcome::identity(&OutcomeSpace::Matrix { d: 2 });
        assert!(matches!(x.compensate(&y), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn evaluate_examples() {
        let u = Utility::RealScalar { beta: 2.0 };
        assert_eq!(u.evaluate(&Outcome::Scalar(3.0)).unwrap(), 6.0);

        let u = Utility::Matrix { beta: 1.0 };
        let d = Outcome::Matrix(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
        assert!((u.evaluate(&d).unwrap() - 6f64.ln()).abs() < 1e-12);
        assert!((u.evaluate(&d).unwrap() - 1.7918).abs() < 1e-4);

        assert!(u.evaluate(&Outcome::Scalar(1.0)).is_err());
    }

    #[test]
    fn cumulant_examples() {
        assert_eq!(cumulants(&Distribution::point_mass(2.5), 3), vec![2.5, 0.0, 0.0]);
        let bern = Distribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let k = cumulants(&bern, 2);
        // brute force: m1 = 0.5, m2 = 0.5, κ2 = m2 − m1²
        assert!((k[0] - 0.5).abs() < 1e-15 && (k[1] - 0.25).abs() < 1e-15);
        let sym = Distribution::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(cumulants(&sym, 1), vec![0.0]);
    }

    #[test]
    fn fourth_cumulant_of_bernoulli() {
        // κ4 of Bernoulli(p) is p(1−p)(1−6p+6p²)
        let p = 0.25;
        let d = Distribution::new(vec![0.0, 1.0], vec![1.0 - p, p]).unwrap();
        let k = cumulants(&d, 4);
        assert!((k[2] - p * (1.0 - p) * (1.0 - 2.0 * p)).abs() < 1e-15);
        assert!((k[3] - p * (1.0 - p) * (1.0 - 6.0 * p + 6.0 * p * p)).abs() < 1e-15);
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![0.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(Distribution::new(vec![0.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(Distribution::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(Distribution::new(vec![], vec![]).is_err());
    }

    #[test]
    fn json_roundtrip_each_space() {
        let cases = [
            (OutcomeSpace::RealScalar, json!(1.5)),
            (OutcomeSpace::RealVector { d: 2 }, json!([1.0, -2.0])),
            (OutcomeSpace::MeanStddev, json!({"m": 1.0, "sigma": 0.5})),
            (
                OutcomeSpace::DiscreteDistribution { moment_order: 2 },
                json!({"support": [0.0, 1.0], "probs": [0.25, 0.75]}),
            ),
            (OutcomeSpace::PrizeStream { alphabet: vec!["g".into(), "h".into()] }, json!(["g", "h", "g"])),
            (OutcomeSpace::Matrix { d: 2 }, json!([[1.0, 2.0], [0.0, 1.0]])),
        ];
        for (space, v) in cases {
            let o = Outcome::from_json(&space, &v).unwrap();
            assert_eq!(o.to_json(), v, "{space}");
        }
        assert!(Outcome::from_json(&OutcomeSpace::MeanStddev, &json!({"m": 1.0, "sigma": -1.0})).is_err());
        assert!(Outcome::from_json(&OutcomeSpace::Matrix { d: 2 }, &json!([[1.0, 2.0], [2.0, 4.0]])).is_err());
        assert!(Outcome::from_json(
            &OutcomeSpace::PrizeStream { alphabet: vec!["g".into()] },
            &json!(["x"])
        )
        .is_err());
    }

    #[test]
    fn space_json_uses_kind_tag() {
        let s: OutcomeSpace = serde_json::from_value(json!({"kind": "real_vector", "d": 3})).unwrap();
        assert_eq!(s, OutcomeSpace::RealVector { d: 3 });
        let s: OutcomeSpace = serde_json::from_value(json!({"kind": "mean_stddev"})).unwrap();
        assert_eq!(s, OutcomeSpace::MeanStddev);
        assert!(OutcomeSpace::RealVector { d: 0 }.validate().is_err());
        assert!(OutcomeSpace::PrizeStream { alphabet: vec![] }.validate().is_err());
    }

    #[test]
    fn features_agree_with_evaluate() {
        let u = Utility::PrizeStream {
            weights: [("g".to_string(), 1.5), ("h".to_string(), -0.5)].into_iter().collect(),
        };
        let x = Outcome::Stream(vec!["h".into(), "g".into(), "g".into()]);
        let f = u.features(&x).unwrap();
        let dot: f64 = f.iter().zip(u.parameters()).map(|(a, b)| a * b).sum();
        assert_eq!(dot, u.evaluate(&x).unwrap());
        assert_eq!(dot, 2.5);
    }
}
