//! Exact and approximate checks of the choice axioms.
//!
//! Every checker measures the smallest `ε` for which the approximate
//! (multiplicative) form of its axiom holds on the instances it was given,
//! and compares it with a caller-supplied tolerance. Zero probabilities
//! follow one global convention: `0/0` contributes nothing and `p/0` with
//! `p > 0` contributes `+∞`.

use std::cmp::Ordering;
use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::menu::{default_tolerance, diagonal_index, equivalent, power, product, ActionId, Menu};
use crate::outcome::{Outcome, OutcomeSpace};
use crate::rules::Rule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    Neutrality,
    Decomposability,
    Positivity,
    Continuity,
    StrongNeutrality,
    CrossMenuIdentity,
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::Neutrality => "neutrality",
            Axiom::Decomposability => "decomposability",
            Axiom::Positivity => "positivity",
            Axiom::Continuity => "continuity",
            Axiom::StrongNeutrality => "strong_neutrality",
            Axiom::CrossMenuIdentity => "cross_menu_identity",
        }
    }

    pub fn parse(s: &str) -> Option<Axiom> {
        [
            Axiom::Neutrality,
            Axiom::Decomposability,
            Axiom::Positivity,
            Axiom::Continuity,
            Axiom::StrongNeutrality,
            Axiom::CrossMenuIdentity,
        ]
        .into_iter()
        .find(|a| a.name() == s || (s == "identity" && *a == Axiom::CrossMenuIdentity))
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a violation was observed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub menus: Vec<String>,
    pub actions: Vec<String>,
    #[serde(serialize_with = "ser_real")]
    pub observed: f64,
}

impl Witness {
    fn new(actions: &[&ActionId], observed: f64) -> Witness {
        Witness { menus: Vec::new(), actions: actions.iter().map(|a| a.to_string()).collect(), observed }
    }

    fn key(&self) -> (&[String], &[String]) {
        (&self.menus, &self.actions)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.menus.is_empty() {
            write!(f, "[{}] ", self.menus.join(" ⊗ "))?;
        }
        write!(f, "{} (observed {})", self.actions.join(" vs "), fmt_real(self.observed))
    }
}

/// Result of checking one axiom on one or more instances.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub min_epsilon: f64,
    pub satisfied_at_tol: bool,
    /// Present exactly when `satisfied_at_tol` is false.
    pub witness: Option<Witness>,
    /// Further violations, worst first, when instances were merged.
    pub other_witnesses: Vec<Witness>,
    pub instances_checked: usize,
    /// Theoretical bound the measurement was compared against, if any.
    pub bound: Option<f64>,
}

impl AxiomReport {
    fn measured(axiom: Axiom, min_epsilon: f64, tol: f64, witness: Option<Witness>) -> AxiomReport {
        let satisfied = min_epsilon <= tol;
        AxiomReport {
            axiom,
            min_epsilon,
            satisfied_at_tol: satisfied,
            witness: if satisfied { None } else { witness },
            other_witnesses: Vec::new(),
            instances_checked: 1,
            bound: None,
        }
    }

    /// Tags the witnesses of this report with menu names.
    pub fn with_menus(mut self, menus: &[&str]) -> AxiomReport {
        let names: Vec<String> = menus.iter().map(|s| s.to_string()).collect();
        for w in self.witness.iter_mut().chain(self.other_witnesses.iter_mut()) {
            w.menus = names.clone();
        }
        self
    }

    /// Corpus aggregation: maximum ε, all instances counted, failing witnesses
    /// ordered by ε (descending) then lexicographically.
    pub fn merge(axiom: Axiom, reports: impl IntoIterator<Item = AxiomReport>) -> AxiomReport {
        let mut min_epsilon: f64 = 0.0;
        let mut satisfied = true;
        let mut instances = 0;
        let mut witnesses = Vec::new();
        let mut bound: Option<f64> = None;
        for r in reports {
            debug_assert_eq!(r.axiom, axiom);
            min_epsilon = min_epsilon.max(r.min_epsilon);
            satisfied &= r.satisfied_at_tol;
            instances += r.instances_checked;
            let e = r.min_epsilon;
            witnesses.extend(r.witness.into_iter().chain(r.other_witnesses).map(|w| (e, w)));
            bound = match (bound, r.bound) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
        }
        // worst report first; `observed` is not comparable across axioms' senses
        witnesses.sort_by(|(ea, a), (eb, b)| {
            eb.total_cmp(ea)
                .then_with(|| b.observed.partial_cmp(&a.observed).unwrap_or(Ordering::Equal))
                .then_with(|| a.key().cmp(&b.key()))
        });
        let mut it = witnesses.into_iter().map(|(_, w)| w);
        let witness = if satisfied { None } else { it.next() };
        AxiomReport {
            axiom,
            min_epsilon,
            satisfied_at_tol: satisfied,
            witness,
            other_witnesses: if satisfied { Vec::new() } else { it.collect() },
            instances_checked: instances,
            bound,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

impl Serialize for AxiomReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("axiom", self.axiom.name())?;
        m.serialize_entry("min_epsilon", &RealJson(self.min_epsilon))?;
        m.serialize_entry("satisfied_at_tol", &self.satisfied_at_tol)?;
        m.serialize_entry("witness", &self.witness)?;
        if !self.other_witnesses.is_empty() {
            m.serialize_entry("other_witnesses", &self.other_witnesses)?;
        }
        m.serialize_entry("instances_checked", &self.instances_checked)?;
        if let Some(b) = self.bound {
            m.serialize_entry("bound", &RealJson(b))?;
        }
        if self.axiom == Axiom::Continuity {
            m.serialize_entry("kind", "probe")?;
        }
        m.end()
    }
}

/// Serializes infinities as `"inf"` / `"-inf"`.
pub(crate) struct RealJson(pub f64);

impl Serialize for RealJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str(if self.0 > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(self.0)
        }
    }
}

fn ser_real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    RealJson(*x).serialize(s)
}

pub(crate) fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.6e}")
    }
}

/// `x/y − 1` under the zero conventions (`0/0 → 0`, `x/0 → +∞`), clipped at 0.
pub fn excess_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        (x / y - 1.0).max(0.0)
    }
}

/// Groups entry indices whose outcomes are equal within `tol`. Only groups of
/// two or more are returned.
fn equal_outcome_groups(menu: &Menu, tol: f64) -> Vec<Vec<usize>> {
    let outcomes = menu.outcomes();
    let mut idx: Vec<usize> = (0..outcomes.len()).collect();
    idx.sort_by(|&a, &b| outcomes[a].total_cmp(&outcomes[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for i in idx {
        match current.first() {
            Some(&first) if outcomes[first].approx_eq(&outcomes[i], tol) => current.push(i),
            _ => {
                if current.len() > 1 {
                    groups.push(std::mem::take(&mut current));
                }
                current = vec![i];
            }
        }
    }
    if current.len() > 1 {
        groups.push(current);
    }
    groups
}

/// Approximate neutrality: `max (p_a / p_a' − 1)` over actions with equal outcomes.
pub fn neutrality_epsilon(rule: &Rule, menu: &Menu, tol: f64) -> Result<AxiomReport> {
    let p = rule.choose(menu)?;
    let mut eps: f64 = 0.0;
    let mut witness = None;
    for group in equal_outcome_groups(menu, default_tolerance(menu.space())) {
        let hi = *group.iter().max_by(|&&a, &&b| p.prob(a).total_cmp(&p.prob(b))).unwrap();
        let lo = *group.iter().min_by(|&&a, &&b| p.prob(a).total_cmp(&p.prob(b))).unwrap();
        let e = excess_ratio(p.prob(hi), p.prob(lo));
        if e > eps || witness.is_none() && e > 0.0 {
            eps = e;
            witness = Some(Witness::new(&[&menu.actions()[hi], &menu.actions()[lo]], e + 1.0));
        }
    }
    Ok(AxiomReport::measured(Axiom::Neutrality, eps, tol, witness))
}

/// Approximate decomposability of `rule` on `m1 ⊗ m2`:
/// `max over (a1, a2) of max(joint/(p1·p2), (p1·p2)/joint) − 1`.
pub fn decomposability_epsilon(rule: &Rule, m1: &Menu, m2: &Menu, tol: f64) -> Result<AxiomReport> {
    let joint_menu = product(m1, m2)?;
    let p1 = rule.choose(m1)?;
    let p2 = rule.choose(m2)?;
    let joint = rule.choose(&joint_menu)?;
    let n2 = m2.len();
    let mut eps: f64 = 0.0;
    let mut witness = None;
    for i in 0..m1.len() {
        for j in 0..n2 {
            let k = i * n2 + j;
            let separate = p1.prob(i) * p2.prob(j);
            let together = joint.prob(k);
            let e = excess_ratio(together, separate).max(excess_ratio(separate, together));
            if e > eps {
                eps = e;
                witness = Some(Witness::new(&[&joint_menu.actions()[k]], together / separate));
            }
        }
    }
    Ok(AxiomReport::measured(Axiom::Decomposability, eps, tol, witness))
}

/// Positivity: every action gets positive probability. `min_epsilon` is 0
/// when it holds and `+∞` otherwise.
pub fn positivity_check(rule: &Rule, menu: &Menu) -> Result<AxiomReport> {
    let p = rule.choose(menu)?;
    Ok(match p.probs().iter().position(|&x| x <= 0.0) {
        None => AxiomReport::measured(Axiom::Positivity, 0.0, 0.0, None),
        Some(i) => AxiomReport::measured(
            Axiom::Positivity,
            f64::INFINITY,
            0.0,
            Some(Witness::new(&[&menu.actions()[i]], p.prob(i))),
        ),
    })
}

/// Default perturbation steps for [`continuity_probe`].
pub const DEFAULT_CONTINUITY_STEPS: [f64; 3] = [1e-2, 1e-4, 1e-6];

/// Perturbs the outcome of `action` by `+step` (every coordinate for vectors)
/// and watches how far the choice distribution moves.
///
/// `min_epsilon` is the sup-norm gap at the smallest step. The probe flags a
/// discontinuity when that gap is more than half the gap at the largest step
/// although the steps shrank at least 100-fold. A finite probe can only
/// falsify continuity.
pub fn continuity_probe(rule: &Rule, menu: &Menu, action: &ActionId, steps: &[f64]) -> Result<AxiomReport> {
    if !matches!(menu.space(), OutcomeSpace::RealScalar | OutcomeSpace::RealVector { .. }) {
        return Err(Error::UnsupportedSpace(format!("continuity probe on {}", menu.space())));
    }
    if steps.is_empty()
        || steps.iter().any(|s| !(*s >= 1e-9 && s.is_finite()))
        || steps.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidRule("steps must be strictly decreasing and >= 1e-9".into()));
    }
    let i = menu.index_of(action).ok_or_else(|| Error::UnknownAction(action.to_string()))?;
    let base = rule.choose(menu)?;
    let mut gaps = Vec::with_capacity(steps.len());
    for &step in steps {
        let moved = match &menu.outcomes()[i] {
            Outcome::Scalar(x) => Outcome::Scalar(x + step),
            Outcome::Vector(v) => Outcome::Vector(v.iter().map(|x| x + step).collect()),
            _ => unreachable!(),
        };
        let p = rule.choose(&menu.with_outcome(i, moved)?)?;
        let gap = p
            .probs()
            .iter()
            .zip(base.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    let (first, last) = (gaps[0], *gaps.last().unwrap());
    let shrink = steps[0] / steps[steps.len() - 1];
    let discontinuous = first > 0.0 && shrink >= 100.0 && last / first > 0.5;
    let mut report = AxiomReport::measured(
        Axiom::Continuity,
        last,
        f64::INFINITY,
        Some(Witness::new(&[action], last)),
    );
    if discontinuous {
        report.satisfied_at_tol = false;
        report.witness = Some(Witness::new(&[action], last));
    }
    Ok(report)
}

/// Approximate strong neutrality between two equivalent menus: the largest
/// probability ratio between matched actions, minus one.
///
/// With `estimates = Some((ε_neut, ε_decomp))` the report's `bound` is
/// `(1+ε_neut)(1+ε_decomp)² − 1`.
pub fn strong_neutrality_epsilon(
    rule: &Rule,
    m1: &Menu,
    m2: &Menu,
    tol: f64,
    estimates: Option<(f64, f64)>,
) -> Result<AxiomReport> {
    let bijection = equivalent(m1, m2, None).ok_or(Error::NotEquivalent)?;
    let p1 = rule.choose(m1)?;
    let p2 = rule.choose(m2)?;
    let mut eps: f64 = 0.0;
    let mut witness = None;
    for (i, &j) in bijection.iter().enumerate() {
        let e = excess_ratio(p1.prob(i), p2.prob(j)).max(excess_ratio(p2.prob(j), p1.prob(i)));
        if e > eps {
            eps = e;
            witness = Some(Witness::new(&[&m1.actions()[i], &m2.actions()[j]], p1.prob(i) / p2.prob(j)));
        }
    }
    let mut report = AxiomReport::measured(Axiom::StrongNeutrality, eps, tol, witness);
    report.bound = estimates.map(|(n, d)| strong_neutrality_bound(n, d));
    Ok(report)
}

/// `(1+ε_neut)(1+ε_decomp)² − 1`.
pub fn strong_neutrality_bound(eps_neut: f64, eps_decomp: f64) -> f64 {
    (1.0 + eps_neut) * (1.0 + eps_decomp).powi(2) - 1.0
}

/// Outcome of [`cross_menu_identity_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub holds: bool,
    /// `ln(Φ_a · p0^n)`
    pub lhs_log: f64,
    /// `ln(Φ_a' · p1^n)`
    pub rhs_log: f64,
    pub n: i64,
}

/// Checks `Φ(A,o)_a · p0^n = Φ(A,o)_a' · p1^n` with `n = o(a) − o(a')` and
/// `(p0, p1)` the rule's choice on the unit binary menu.
///
/// Both sides are compared in log space: the identity holds when
/// `|ln lhs − ln rhs| ≤ tol`, or when both sides are zero.
pub fn cross_menu_identity_check(
    rule: &Rule,
    menu: &Menu,
    a: &ActionId,
    a2: &ActionId,
    tol: f64,
) -> Result<IdentityCheck> {
    if !matches!(menu.space(), OutcomeSpace::RealScalar) {
        return Err(Error::UnsupportedSpace(format!("cross-menu identity on {}", menu.space())));
    }
    let i = menu.index_of(a).ok_or_else(|| Error::UnknownAction(a.to_string()))?;
    let j = menu.index_of(a2).ok_or_else(|| Error::UnknownAction(a2.to_string()))?;
    let (x, x2) = (menu.outcomes()[i].as_scalar().unwrap(), menu.outcomes()[j].as_scalar().unwrap());
    if x.fract() != 0.0 || x2.fract() != 0.0 {
        return Err(Error::NonInteger(format!("o({a}) = {x}, o({a2}) = {x2}")));
    }
    if x <= x2 {
        return Err(Error::InvalidMenu(format!("need o({a}) > o({a2}), got {x} <= {x2}")));
    }
    let n = (x - x2) as i64;
    let unit = rule.choose(&Menu::unit_binary())?;
    let (p0, p1) = (unit.prob(0), unit.prob(1));
    let p = rule.choose(menu)?;
    let lhs_log = p.prob(i).ln() + n as f64 * p0.ln();
    let rhs_log = p.prob(j).ln() + n as f64 * p1.ln();
    let holds = if lhs_log == f64::NEG_INFINITY || rhs_log == f64::NEG_INFINITY {
        lhs_log == rhs_log
    } else {
        (lhs_log - rhs_log).abs() <= tol
    };
    Ok(IdentityCheck { holds, lhs_log, rhs_log, n })
}

/// The cross-menu identity over every pair of actions with distinct integer
/// outcomes in `menu`; `min_epsilon` is the largest log gap.
pub fn cross_menu_identity_epsilon(rule: &Rule, menu: &Menu, tol: f64) -> Result<AxiomReport> {
    let xs = menu
        .scalars()
        .ok_or_else(|| Error::UnsupportedSpace(format!("cross-menu identity on {}", menu.space())))?;
    if let Some(x) = xs.iter().find(|x| x.fract() != 0.0) {
        return Err(Error::NonInteger(format!("outcome {x}")));
    }
    let unit = rule.choose(&Menu::unit_binary())?;
    let (l0, l1) = (unit.prob(0).ln(), unit.prob(1).ln());
    let p = rule.choose(menu)?;
    let mut eps: f64 = 0.0;
    let mut witness = None;
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            if xs[i] <= xs[j] {
                continue;
            }
            let n = xs[i] - xs[j];
            let lhs = p.prob(i).ln() + n * l0;
            let rhs = p.prob(j).ln() + n * l1;
            let gap = if lhs == f64::NEG_INFINITY && rhs == f64::NEG_INFINITY {
                0.0
            } else {
                (lhs - rhs).abs()
            };
            if gap > eps || gap.is_nan() {
                eps = if gap.is_nan() { f64::INFINITY } else { gap };
                witness = Some(Witness::new(&[&menu.actions()[i], &menu.actions()[j]], eps));
            }
        }
    }
    Ok(AxiomReport::measured(Axiom::CrossMenuIdentity, eps, tol, witness))
}

/// Neutrality measured on the diagonal actions of `power(menu, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagonalNeutrality {
    pub n: usize,
    /// `max Φ_n(a,…,a) / Φ_n(a',…,a') − 1` over base actions with equal outcomes.
    pub diagonal_epsilon: f64,
    /// The implied per-component excess `(1 + diagonal_epsilon)^{1/n} − 1`.
    pub per_component_epsilon: f64,
}

pub fn diagonal_neutrality_epsilon(rule: &Rule, menu: &Menu, n: usize) -> Result<DiagonalNeutrality> {
    let big = power(menu, n)?;
    let p = rule.choose(&big)?;
    let k = menu.len();
    let mut eps: f64 = 0.0;
    for group in equal_outcome_groups(menu, default_tolerance(menu.space())) {
        for &a in &group {
            for &b in &group {
                let pa = p.prob(diagonal_index(k, n, a));
                let pb = p.prob(diagonal_index(k, n, b));
                eps = eps.max(excess_ratio(pa, pb));
            }
        }
    }
    Ok(DiagonalNeutrality {
        n,
        diagonal_epsilon: eps,
        per_component_epsilon: (1.0 + eps).powf(1.0 / n as f64) - 1.0,
    })
}
