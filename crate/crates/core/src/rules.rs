//! Evaluable stochastic choice rules.
//!
//! A [`Rule`] maps every menu of its outcome space to a [`ChoiceDistribution`].
//! The multinomial logit family (including the `±∞` limits), utility-based
//! logit on any space, independent additive random utility with Gaussian or
//! Gumbel shocks, the uniform rule, lookup tables and deterministic
//! perturbations of any of these are supported.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::hashing::{unit_interval, Digest};
use crate::menu::{ChoiceDistribution, Menu};
use crate::outcome::{Outcome, OutcomeSpace, Utility};
use crate::quadrature::{integrate, Simpson};

/// Largest pre-normalization drift tolerated from IARU quadrature.
pub const IARU_NORMALIZATION_TOL: f64 = 1e-8;

/// Distribution of the additive shocks of an IARU rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shock {
    /// `N(0, σ²)`.
    Gaussian { sigma: f64 },
    /// `F(x) = exp(−exp(−β·x))`.
    Gumbel { beta: f64 },
}

impl Shock {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match self {
            Shock::Gaussian { sigma } => ("gaussian sigma", *sigma),
            Shock::Gumbel { beta } => ("gumbel beta", *beta),
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidRule(format!("{name} must be positive, got {v}")))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Shock::Gaussian { sigma } => 0.5 * erfc(-x / (sigma * std::f64::consts::SQRT_2)),
            Shock::Gumbel { beta } => (-(-beta * x).exp()).exp(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Shock::Gaussian { sigma } => {
                let z = x / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            Shock::Gumbel { beta } => {
                let t = (-beta * x).exp();
                beta * t * (-t).exp()
            }
        }
    }

    /// Interval outside of which the shock density carries negligible mass.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Shock::Gaussian { sigma } => (-12.0 * sigma, 12.0 * sigma),
            // the right tail decays like e^{-βx}: 1 − F(40/β) ≈ 4e-18
            Shock::Gumbel { beta } => (-6.0 / beta, 40.0 / beta),
        }
    }
}

/// A rule given by an explicit table of menus, with a fallback for menus not
/// in the table. Menus are matched by [`Menu::canonical_hash`].
#[derive(Clone, Debug)]
pub struct TabularRule {
    table: HashMap<u64, (Menu, ChoiceDistribution)>,
    fallback: Box<Rule>,
}

impl TabularRule {
    pub fn new(fallback: Rule) -> TabularRule {
        TabularRule { table: HashMap::new(), fallback: Box::new(fallback) }
    }

    /// Adds or replaces the entry for `menu`.
    pub fn insert(&mut self, menu: Menu, dist: ChoiceDistribution) -> Result<()> {
        dist.validate()?;
        if dist.actions() != menu.actions() {
            return Err(Error::InvalidMenu("distribution does not match menu actions".into()));
        }
        self.table.insert(menu.canonical_hash(), (menu, dist));
        Ok(())
    }

    pub fn with(mut self, menu: Menu, probs: Vec<f64>) -> Result<TabularRule> {
        let dist = ChoiceDistribution::new(menu.actions().to_vec(), probs)?;
        self.insert(menu, dist)?;
        Ok(self)
    }

    fn lookup(&self, menu: &Menu) -> Option<ChoiceDistribution> {
        let (stored, dist) = self.table.get(&menu.canonical_hash())?;
        if stored.len() != menu.len() {
            return None;
        }
        let mut probs = Vec::with_capacity(menu.len());
        for a in menu.actions() {
            probs.push(dist.prob(stored.index_of(a)?));
        }
        Some(ChoiceDistribution::for_menu(menu, probs))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// A stochastic choice rule.
#[derive(Clone, Debug)]
pub enum Rule {
    /// Multinomial logit on real scalars; `beta` may be `±∞`.
    Mnl { beta: f64 },
    /// Softmax of an additive utility on any space.
    GeneralMnl { utility: Utility },
    /// Independent additive random utility on real scalars.
    Iaru { shock: Shock, quadrature: Simpson },
    Uniform,
    Tabular(TabularRule),
    /// `base` with a deterministic shock `s(a) ∈ [−δ, δ]` added to each log
    /// probability. The shock depends only on the seed, the canonical menu
    /// hash and the action id.
    Perturbed { base: Box<Rule>, delta: f64, seed: u64 },
    /// `base` applied to the menu with outcomes multiplied by `factor`.
    Rescaled { base: Box<Rule>, factor: f64 },
}

impl Rule {
    pub fn mnl(beta: f64) -> Rule {
        Rule::Mnl { beta }
    }

    pub fn general_mnl(utility: Utility) -> Rule {
        Rule::GeneralMnl { utility }
    }

    pub fn iaru(shock: Shock) -> Rule {
        Rule::Iaru { shock, quadrature: Simpson::default() }
    }

    /// IARU with standard Gaussian shocks.
    pub fn probit() -> Rule {
        Rule::iaru(Shock::Gaussian { sigma: 1.0 })
    }

    pub fn perturbed(base: Rule, delta: f64, seed: u64) -> Rule {
        Rule::Perturbed { base: Box::new(base), delta, seed }
    }

    pub fn rescaled(base: Rule, factor: f64) -> Rule {
        Rule::Rescaled { base: Box::new(base), factor }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Rule::Mnl { beta } if beta.is_nan() => Err(Error::InvalidRule("beta is NaN".into())),
            Rule::Iaru { shock, .. } => shock.validate(),
            Rule::Perturbed { base, delta, .. } => {
                if !(*delta >= 0.0 && delta.is_finite()) {
                    return Err(Error::InvalidRule(format!("delta must be >= 0, got {delta}")));
                }
                base.validate()
            }
            Rule::Rescaled { base, factor } => {
                if !(factor.is_finite() && *factor != 0.0) {
                    return Err(Error::InvalidRule(format!("bad rescaling factor {factor}")));
                }
                base.validate()
            }
            Rule::Tabular(t) => t.fallback.validate(),
            _ => Ok(()),
        }
    }

    /// Errors unless the rule can evaluate menus of `space`.
    pub fn check_space(&self, space: &OutcomeSpace) -> Result<()> {
        let scalar_only = |name: &str| {
            if matches!(space, OutcomeSpace::RealScalar) {
                Ok(())
            } else {
                Err(Error::IncompatibleSpaces(format!("{name} rule on {space} menu")))
            }
        };
        match self {
            Rule::Mnl { .. } => scalar_only("mnl"),
            Rule::Iaru { .. } => scalar_only("iaru"),
            Rule::GeneralMnl { utility } => {
                if utility.fits(space) {
                    Ok(())
                } else {
                    Err(Error::IncompatibleSpaces(format!(
                        "{} utility on {space} menu",
                        utility.kind_name()
                    )))
                }
            }
            Rule::Uniform | Rule::Tabular(_) => Ok(()),
            Rule::Perturbed { base, .. } => base.check_space(space),
            Rule::Rescaled { base, .. } => {
                if !matches!(space, OutcomeSpace::RealScalar | OutcomeSpace::RealVector { .. }) {
                    return Err(Error::UnsupportedSpace(format!("rescaling {space}")));
                }
                base.check_space(space)
            }
        }
    }

    /// `Φ(A, o)`.
    pub fn choose(&self, menu: &Menu) -> Result<ChoiceDistribution> {
        self.check_space(menu.space())?;
        let probs = match self {
            Rule::Mnl { beta } => {
                let xs = menu.scalars().expect("checked scalar space");
                if beta.is_infinite() {
                    extreme_uniform(&xs, *beta > 0.0)
                } else if *beta == 0.0 {
                    vec![1.0 / xs.len() as f64; xs.len()]
                } else {
                    softmax(xs.iter().map(|x| beta * x).collect())
                }
            }
            Rule::GeneralMnl { utility } => softmax(
                menu.outcomes().iter().map(|o| utility.evaluate(o)).collect::<Result<_>>()?,
            ),
            Rule::Iaru { shock, quadrature } => {
                iaru_probabilities(&menu.scalars().expect("checked scalar space"), shock, quadrature)?
            }
            Rule::Uniform => vec![1.0 / menu.len() as f64; menu.len()],
            Rule::Tabular(t) => match t.lookup(menu) {
                Some(d) => return Ok(d),
                None => return t.fallback.choose(menu),
            },
            Rule::Perturbed { base, delta, seed } => {
                let p = base.choose(menu)?;
                let shocks = perturbation_shocks(menu, *delta, *seed);
                let weights: Vec<f64> = p.probs().iter().zip(&shocks).map(|(p, s)| p * s.exp()).collect();
                let total: f64 = weights.iter().sum();
                weights.into_iter().map(|w| w / total).collect()
            }
            Rule::Rescaled { base, factor } => {
                let scaled = menu.map_outcomes(|o| {
                    Ok(match o {
                        Outcome::Scalar(x) => Outcome::Scalar(x * factor),
                        Outcome::Vector(v) => Outcome::Vector(v.iter().map(|x| x * factor).collect()),
                        _ => unreachable!("checked by check_space"),
                    })
                })?;
                base.choose(&scaled)?.probs().to_vec()
            }
        };
        Ok(ChoiceDistribution::for_menu(menu, probs))
    }

    pub fn from_json(value: &Value) -> Result<Rule> {
        let doc: RuleDoc = serde_json::from_value(value.clone())?;
        let rule = doc.into_rule()?;
        rule.validate()?;
        Ok(rule)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Rule> {
        let text = std::fs::read_to_string(path)?;
        Rule::from_json(&serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(RuleDoc::from_rule(self)).expect("rule serializes")
    }
}

/// The deterministic shocks used by [`Rule::Perturbed`] on `menu`.
pub fn perturbation_shocks(menu: &Menu, delta: f64, seed: u64) -> Vec<f64> {
    let menu_hash = menu.canonical_hash();
    menu.actions()
        .iter()
        .map(|a| {
            let mut h = Digest::new(seed);
            h.write(menu_hash).write(a.digest());
            delta * (2.0 * unit_interval(h.finish()) - 1.0)
        })
        .collect()
}

/// Numerically stable softmax.
pub fn softmax(logits: Vec<f64>) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Uniform over the actions with the highest (`top`) or lowest outcome.
fn extreme_uniform(xs: &[f64], top: bool) -> Vec<f64> {
    let target = if top {
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    } else {
        xs.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let integral = xs.iter().all(|x| x.fract() == 0.0);
    let tol = if integral { 0.0 } else { 1e-12 * target.abs().max(1.0) };
    let hits: Vec<bool> = xs.iter().map(|x| (x - target).abs() <= tol).collect();
    let count = hits.iter().filter(|h| **h).count() as f64;
    hits.into_iter().map(|h| if h { 1.0 / count } else { 0.0 }).collect()
}

/// `P_a = ∫ f(x) Π_{b≠a} F(o(a) − o(b) + x) dx`, evaluated once per distinct
/// outcome value and shared by the actions carrying it.
fn iaru_probabilities(xs: &[f64], shock: &Shock, quad: &Simpson) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<i32> = Vec::new();
    let mut group_of = Vec::with_capacity(xs.len());
    let mut seen: HashMap<u64, usize> = HashMap::new();
    for &x in xs {
        let key = if x == 0.0 { 0 } else { x.to_bits() };
        let g = *seen.entry(key).or_insert_with(|| {
            values.push(x);
            counts.push(0);
            values.len() - 1
        });
        counts[g] += 1;
        group_of.push(g);
    }
    let (lo, hi) = shock.support();
    let per_group: Vec<f64> = (0..values.len())
        .map(|i| {
            let vi = values[i];
            // the mass of a low-valued action sits where its shock beats the best gap
            let gap = values.iter().map(|&vj| vj - vi).fold(0.0, f64::max);
            integrate(
                |x| {
                    let mut acc = shock.pdf(x);
                    for (j, (&vj, &mj)) in values.iter().zip(&counts).enumerate() {
                        if acc == 0.0 {
                            break;
                        }
                        let m = if i == j { mj - 1 } else { mj };
                        if m > 0 {
                            acc *= shock.cdf(vi - vj + x).powi(m);
                        }
                    }
                    acc
                },
                lo,
                hi + gap,
                quad,
            )
        })
        .collect();
    let total: f64 = per_group.iter().zip(&counts).map(|(p, &m)| p * m as f64).sum();
    if !((total - 1.0).abs() < IARU_NORMALIZATION_TOL) {
        return Err(Error::Quadrature(format!("probabilities sum to {total} before normalization")));
    }
    Ok(group_of.into_iter().map(|g| per_group[g] / total).collect())
}

/// Outcome of comparing an IARU rule with multinomial logit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub matches: bool,
    pub max_deviation: f64,
}

/// Compares IARU with Gumbel(`shock_beta`) shocks against MNL(`mnl_beta`).
pub fn compare_gumbel_iaru_with_mnl(
    shock_beta: f64,
    mnl_beta: f64,
    menus: &[Menu],
    tol: f64,
) -> Result<ProbeResult> {
    let iaru = Rule::iaru(Shock::Gumbel { beta: shock_beta });
    iaru.validate()?;
    let mnl = Rule::mnl(mnl_beta);
    let mut max_deviation: f64 = 0.0;
    for m in menus {
        let p = iaru.choose(m)?;
        let q = mnl.choose(m)?;
        for (a, b) in p.probs().iter().zip(q.probs()) {
            max_deviation = max_deviation.max((a - b).abs());
        }
    }
    Ok(ProbeResult { matches: max_deviation <= tol, max_deviation })
}

/// Whether IARU with Gumbel(β) shocks reproduces MNL(β) on `menus` within `tol`.
pub fn iaru_equals_mnl_probe(beta: f64, menus: &[Menu], tol: f64) -> Result<ProbeResult> {
    compare_gumbel_iaru_with_mnl(beta, beta, menus, tol)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RuleDoc {
    Mnl {
        beta: BetaDoc,
    },
    GeneralMnl {
        utility: Utility,
    },
    Iaru {
        shock: ShockDoc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    Uniform,
    Perturbed {
        base: Box<RuleDoc>,
        delta: f64,
        seed: u64,
    },
    Tabular {
        entries: Vec<TabularEntryDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fallback: Option<Box<RuleDoc>>,
    },
    Rescaled {
        base: Box<RuleDoc>,
        factor: f64,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BetaDoc {
    Number(f64),
    Text(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShockDoc {
    kind: String,
    param: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabularEntryDoc {
    menu: Value,
    probabilities: Value,
}

impl RuleDoc {
    fn into_rule(self) -> Result<Rule> {
        Ok(match self {
            RuleDoc::Mnl { beta } => Rule::Mnl {
                beta: match beta {
                    BetaDoc::Number(b) => b,
                    BetaDoc::Text(s) => match s.as_str() {
                        "+inf" | "inf" => f64::INFINITY,
                        "-inf" => f64::NEG_INFINITY,
                        other => return Err(Error::InvalidRule(format!("bad beta {other:?}"))),
                    },
                },
            },
            RuleDoc::GeneralMnl { utility } => Rule::GeneralMnl { utility },
            RuleDoc::Iaru { shock, tol } => {
                let shock = match shock.kind.as_str() {
                    "gaussian" => Shock::Gaussian { sigma: shock.param },
                    "gumbel" => Shock::Gumbel { beta: shock.param },
                    other => return Err(Error::InvalidRule(format!("unknown shock kind {other:?}"))),
                };
                let mut quadrature = Simpson::default();
                if let Some(tol) = tol {
                    quadrature.tol = tol;
                }
                Rule::Iaru { shock, quadrature }
            }
            RuleDoc::Uniform => Rule::Uniform,
            RuleDoc::Perturbed { base, delta, seed } => Rule::perturbed(base.into_rule()?, delta, seed),
            RuleDoc::Tabular { entries, fallback } => {
                let fallback = match fallback {
                    Some(f) => f.into_rule()?,
                    None => Rule::Uniform,
                };
                let mut table = TabularRule::new(fallback);
                for e in entries {
                    let menu = Menu::from_json(&e.menu)?;
                    let dist = ChoiceDistribution::from_json(&menu, &e.probabilities)?;
                    table.insert(menu, dist)?;
                }
                Rule::Tabular(table)
            }
            RuleDoc::Rescaled { base, factor } => Rule::rescaled(base.into_rule()?, factor),
        })
    }

    fn from_rule(rule: &Rule) -> RuleDoc {
        match rule {
            Rule::Mnl { beta } => RuleDoc::Mnl {
                beta: if beta.is_infinite() {
                    BetaDoc::Text(if *beta > 0.0 { "+inf" } else { "-inf" }.into())
                } else {
                    BetaDoc::Number(*beta)
                },
            },
            Rule::GeneralMnl { utility } => RuleDoc::GeneralMnl { utility: utility.clone() },
            Rule::Iaru { shock, quadrature } => RuleDoc::Iaru {
                shock: match shock {
                    Shock::Gaussian { sigma } => ShockDoc { kind: "gaussian".into(), param: *sigma },
                    Shock::Gumbel { beta } => ShockDoc { kind: "gumbel".into(), param: *beta },
                },
                tol: (quadrature.tol != Simpson::default().tol).then_some(quadrature.tol),
            },
            Rule::Uniform => RuleDoc::Uniform,
            Rule::Perturbed { base, delta, seed } => RuleDoc::Perturbed {
                base: Box::new(RuleDoc::from_rule(base)),
                delta: *delta,
                seed: *seed,
            },
            Rule::Tabular(t) => {
                let mut entries: Vec<(u64, TabularEntryDoc)> = t
                    .table
                    .iter()
                    .map(|(h, (m, d))| {
                        (*h, TabularEntryDoc { menu: m.to_json(), probabilities: d.to_json() })
                    })
                    .collect();
                entries.sort_by_key(|(h, _)| *h);
                RuleDoc::Tabular {
                    entries: entries.into_iter().map(|(_, e)| e).collect(),
                    fallback: Some(Box::new(RuleDoc::from_rule(&t.fallback))),
                }
            }
            Rule::Rescaled { base, factor } => RuleDoc::Rescaled {
                base: Box::new(RuleDoc::from_rule(base)),
                factor: *factor,
            },
        }
    }
}
