//! Constructive procedures: reading a logit parameter or a utility off a
//! rule, the diagonal-root limit rule `Υ`, certificates of closeness to
//! multinomial logit, and stability bound arithmetic.

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::axioms::RealJson;
use crate::error::{Error, Result};
use crate::menu::{diagonal_index, power, product, ActionId, ChoiceDistribution, Menu};
use crate::outcome::{condition_number, Distribution, MeanStd, Outcome, OutcomeSpace, Utility};
use crate::rules::Rule;

/// Reconstruction accuracy required of every certificate.
pub const CERTIFICATE_TOL: f64 = 1e-10;

/// Size guard for `Υ`: `|menu|^n` may not exceed this.
pub const UPSILON_MAX_ACTIONS: u128 = 1_000_000;

/// Probe systems with a larger condition number are reported as singular.
pub const MAX_PROBE_CONDITION: f64 = 1e12;

/// `ln(p1/p0)` on the unit binary menu `{b0: 0, b1: 1}`; `±∞` when one side
/// has zero probability.
pub fn extract_beta(rule: &Rule) -> Result<f64> {
    let p = rule.choose(&Menu::unit_binary())?;
    let (p0, p1) = (p.prob(0), p.prob(1));
    Ok(if p0 == 0.0 {
        f64::INFINITY
    } else if p1 == 0.0 {
        f64::NEG_INFINITY
    } else {
        p1.ln() - p0.ln()
    })
}

/// `ln(p_x / (1 − p_x))` on the probe menu `{a_e: e, a_x: x}`.
pub fn extract_utility(rule: &Rule, space: &OutcomeSpace, x: &Outcome) -> Result<f64> {
    let menu = Menu::new(
        space.clone(),
        vec![
            (ActionId::atom("a_e")?, Outcome::identity(space)),
            (ActionId::atom("a_x")?, x.clone()),
        ],
    )?;
    let p = rule.choose(&menu)?;
    let (pe, px) = (p.prob(0), p.prob(1));
    if pe <= 0.0 || px <= 0.0 {
        return Err(Error::NotPositiveAtProbe);
    }
    Ok(px.ln() - pe.ln())
}

/// A fitted representation plus the conditioning of the probe system.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub utility: Utility,
    pub condition_number: f64,
}

/// Probe distributions for cumulant order `n`: the point mass at 1, the
/// symmetric coin on `±1/2`, then Bernoulli(1/4) scaled by `1, 2, 4, …`.
pub fn cumulant_probes(n: usize) -> Vec<Distribution> {
    (0..n)
        .map(|j| match j {
            0 => Distribution::point_mass(1.0),
            1 => Distribution::new(vec![-0.5, 0.5], vec![0.5, 0.5]).unwrap(),
            _ => {
                let scale = (1u64 << (j - 2)) as f64;
                Distribution::new(vec![0.0, scale], vec![0.75, 0.25]).unwrap()
            }
        })
        .collect()
}

/// Recovers the additive utility behind `rule` on `space` by probing the
/// canonical basis of the space.
pub fn fit_utility_representation(rule: &Rule, space: &OutcomeSpace) -> Result<Fit> {
    space.validate()?;
    let u = |x: Outcome| extract_utility(rule, space, &x);
    let simple = |utility| Ok(Fit { utility, condition_number: 1.0 });
    match space {
        OutcomeSpace::RealScalar => simple(Utility::RealScalar { beta: u(Outcome::Scalar(1.0))? }),
        OutcomeSpace::RealVector { d } => {
            let weights = (0..*d)
                .map(|i| {
                    let mut e = vec![0.0; *d];
                    e[i] = 1.0;
                    u(Outcome::Vector(e))
                })
                .collect::<Result<_>>()?;
            simple(Utility::RealVector { weights })
        }
        OutcomeSpace::MeanStddev => simple(Utility::MeanStddev {
            gamma1: u(Outcome::MeanStd(MeanStd { m: 1.0, sigma: 0.0 }))?,
            gamma2: u(Outcome::MeanStd(MeanStd { m: 0.0, sigma: 1.0 }))?,
        }),
        OutcomeSpace::DiscreteDistribution { moment_order: n } => {
            let n = *n;
            if n == 0 {
                return simple(Utility::DiscreteDistribution { gammas: vec![] });
            }
            let probes = cumulant_probes(n);
            let mut k = DMatrix::zeros(n, n);
            let mut values = DVector::zeros(n);
            for (row, probe) in probes.iter().enumerate() {
                for (col, c) in crate::outcome::cumulants(probe, n).into_iter().enumerate() {
                    k[(row, col)] = c;
                }
                values[row] = u(Outcome::Distribution(probe.clone()))?;
            }
            let cond = condition_number(&k);
            if !(cond <= MAX_PROBE_CONDITION) {
                return Err(Error::SingularProbe(cond));
            }
            let gammas = k.lu().solve(&values).ok_or(Error::SingularProbe(cond))?;
            Ok(Fit {
                utility: Utility::DiscreteDistribution { gammas: gammas.iter().copied().collect() },
                condition_number: cond,
            })
        }
        OutcomeSpace::PrizeStream { alphabet } => {
            let weights = alphabet
                .iter()
                .map(|p| Ok((p.clone(), u(Outcome::Stream(vec![p.clone()]))?)))
                .collect::<Result<_>>()?;
            simple(Utility::PrizeStream { weights })
        }
        OutcomeSpace::Matrix { d } => {
            let mut probe = DMatrix::identity(*d, *d);
            probe[(0, 0)] = std::f64::consts::E;
            simple(Utility::Matrix { beta: u(Outcome::Matrix(probe))? })
        }
    }
}

/// Estimate of `Υ(A,o)_a = lim (Φ((A,o)^{⊗n})_{(a,…,a)})^{1/n}` at one `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonEstimate {
    /// The roots renormalized to sum to one.
    pub distribution: ChoiceDistribution,
    /// The roots before renormalization.
    pub roots: Vec<f64>,
    pub n_used: usize,
    /// `(1+ε_decomp)^{1/n} − 1` when an `ε_decomp` estimate was supplied.
    pub bound: Option<f64>,
}

fn check_power_size(menu: &Menu, n: usize) -> Result<()> {
    let actions = (menu.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if actions > UPSILON_MAX_ACTIONS {
        return Err(Error::SizeGuard { actions, limit: UPSILON_MAX_ACTIONS });
    }
    Ok(())
}

fn upsilon_from_power(
    rule: &Rule,
    menu: &Menu,
    big: &Menu,
    n: usize,
    eps_decomp: Option<f64>,
) -> Result<UpsilonEstimate> {
    let p = rule.choose(big)?;
    let k = menu.len();
    let roots: Vec<f64> = (0..k)
        .map(|i| {
            let q = p.prob(diagonal_index(k, n, i));
            if q == 0.0 {
                0.0
            } else {
                (q.ln() / n as f64).exp()
            }
        })
        .collect();
    let total: f64 = roots.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidRule("every diagonal probability vanishes".into()));
    }
    let distribution = ChoiceDistribution::new(
        menu.actions().to_vec(),
        roots.iter().map(|r| r / total).collect(),
    )?;
    Ok(UpsilonEstimate {
        distribution,
        roots,
        n_used: n,
        bound: eps_decomp.map(|e| (1.0 + e).powf(1.0 / n as f64) - 1.0),
    })
}

/// `Υ` evaluated at `n = n_max`.
pub fn upsilon(rule: &Rule, menu: &Menu, n_max: usize, eps_decomp: Option<f64>) -> Result<UpsilonEstimate> {
    if n_max == 0 {
        return Err(Error::EmptyPower);
    }
    check_power_size(menu, n_max)?;
    upsilon_from_power(rule, menu, &power(menu, n_max)?, n_max, eps_decomp)
}

/// `Υ` estimates for every `n = 1, …, n_max`.
pub fn upsilon_sequence(
    rule: &Rule,
    menu: &Menu,
    n_max: usize,
    eps_decomp: Option<f64>,
) -> Result<Vec<UpsilonEstimate>> {
    if n_max == 0 {
        return Err(Error::EmptyPower);
    }
    check_power_size(menu, n_max)?;
    let mut out = Vec::with_capacity(n_max);
    let mut big = menu.clone();
    for n in 1..=n_max {
        if n > 1 {
            big = product(&big, menu)?;
        }
        out.push(upsilon_from_power(rule, menu, &big, n, eps_decomp)?);
    }
    Ok(out)
}

/// Shocks certified for one menu.
#[derive(Clone, Debug, PartialEq)]
pub struct MenuShocks {
    pub menu_id: String,
    /// Half the spread of the residuals on this menu.
    pub delta: f64,
    pub shocks: Vec<(ActionId, f64)>,
}

/// Evidence that a rule is `δ`-close to softmax of `utility`:
/// `Φ(A,o)_a ∝ exp(u(o(a)) + s(a))` with `|s(a)| ≤ δ` on every certified menu.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosenessCertificate {
    pub utility: Utility,
    pub delta: f64,
    pub menus: Vec<MenuShocks>,
    pub corpus_size: usize,
}

impl ClosenessCertificate {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("certificate serializes")
    }

    /// Renames the certified menus, in order.
    pub fn with_menu_ids<S: AsRef<str>>(mut self, ids: &[S]) -> Self {
        for (m, id) in self.menus.iter_mut().zip(ids) {
            m.menu_id = id.as_ref().to_string();
        }
        self
    }
}

impl Serialize for MenuShocks {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Shocks<'a>(&'a [(ActionId, f64)]);
        impl Serialize for Shocks<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (a, v) in self.0 {
                    m.serialize_entry(&a.to_string(), v)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("menu_id", &self.menu_id)?;
        m.serialize_entry("delta", &self.delta)?;
        m.serialize_entry("shocks", &Shocks(&self.shocks))?;
        m.end()
    }
}

impl Serialize for ClosenessCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("utility", &self.utility)?;
        m.serialize_entry("delta", &RealJson(self.delta))?;
        m.serialize_entry("menus", &self.menus)?;
        m.serialize_entry("corpus_size", &self.corpus_size)?;
        m.end()
    }
}

/// Default menu id for entry `i` of a corpus.
pub fn corpus_menu_id(i: usize) -> String {
    format!("menu_{:04}", i + 1)
}

/// Log-probabilities and utility features of one menu.
struct Residuals {
    log_probs: Vec<f64>,
    features: Vec<Vec<f64>>,
}

fn residuals(rule: &Rule, menu: &Menu, menu_id: &str, utility: &Utility) -> Result<Residuals> {
    let p = rule.choose(menu)?;
    let mut log_probs = Vec::with_capacity(menu.len());
    let mut features = Vec::with_capacity(menu.len());
    for (i, (a, o)) in menu.iter().enumerate() {
        let q = p.prob(i);
        if !(q > 0.0) {
            return Err(Error::NonPositiveProbability { menu: menu_id.to_string(), action: a.to_string() });
        }
        log_probs.push(q.ln());
        features.push(utility.features(o)?);
    }
    Ok(Residuals { log_probs, features })
}

/// Half-spread of `ln p − θ·φ` on one menu.
fn spread(r: &Residuals, theta: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (lp, f) in r.log_probs.iter().zip(&r.features) {
        let v = lp - f.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    0.5 * (hi - lo)
}

/// Builds the certificate for `utility` on `corpus`: per-menu residuals
/// `r(a) = ln Φ_a − u(o(a))`, shocks centred on the midpoint of the residual
/// range, and `δ` the largest half-range.
pub fn certify_closeness(rule: &Rule, corpus: &[Menu], utility: &Utility) -> Result<ClosenessCertificate> {
    let mut menus = Vec::with_capacity(corpus.len());
    let mut delta: f64 = 0.0;
    for (i, menu) in corpus.iter().enumerate() {
        if !utility.fits(menu.space()) {
            return Err(Error::IncompatibleSpaces(format!(
                "{} utility on {} menu",
                utility.kind_name(),
                menu.space()
            )));
        }
        let id = corpus_menu_id(i);
        let p = rule.choose(menu)?;
        let mut r = Vec::with_capacity(menu.len());
        for (j, (a, o)) in menu.iter().enumerate() {
            let q = p.prob(j);
            if !(q > 0.0) {
                return Err(Error::NonPositiveProbability { menu: id, action: a.to_string() });
            }
            r.push(q.ln() - utility.evaluate(o)?);
        }
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (lo + hi);
        let menu_delta = 0.5 * (hi - lo);
        delta = delta.max(menu_delta);
        let shocks: Vec<(ActionId, f64)> =
            menu.actions().iter().cloned().zip(r.iter().map(|x| x - mid)).collect();
        let entry = MenuShocks { menu_id: id, delta: menu_delta, shocks };
        let err = reconstruction_error(menu, utility, &entry, p.probs())?;
        if !(err <= CERTIFICATE_TOL) {
            return Err(Error::InvalidRule(format!(
                "certificate reconstruction off by {err:e} on {}",
                entry.menu_id
            )));
        }
        menus.push(entry);
    }
    Ok(ClosenessCertificate { utility: utility.clone(), delta, menus, corpus_size: corpus.len() })
}

fn reconstruction_error(menu: &Menu, utility: &Utility, shocks: &MenuShocks, observed: &[f64]) -> Result<f64> {
    let logits = menu
        .outcomes()
        .iter()
        .zip(&shocks.shocks)
        .map(|(o, (_, s))| Ok(utility.evaluate(o)? + s))
        .collect::<Result<Vec<f64>>>()?;
    let q = crate::rules::softmax(logits);
    Ok(q.iter().zip(observed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Largest gap between `rule` on the corpus and the distributions rebuilt
/// from the certificate.
pub fn verify_certificate(cert: &ClosenessCertificate, rule: &Rule, corpus: &[Menu]) -> Result<f64> {
    if cert.menus.len() != corpus.len() {
        return Err(Error::InvalidMenu("certificate and corpus differ in size".into()));
    }
    let mut worst: f64 = 0.0;
    for (menu, shocks) in corpus.iter().zip(&cert.menus) {
        let limit = cert.delta * (1.0 + 1e-12) + 1e-15;
        if shocks.shocks.iter().any(|(_, s)| s.abs() > limit) {
            return Ok(f64::INFINITY);
        }
        let p = rule.choose(menu)?;
        worst = worst.max(reconstruction_error(menu, &cert.utility, shocks, p.probs())?);
    }
    Ok(worst)
}

/// The utility used by "auto" certification: the probe fit on `space`,
/// refined by coordinate-wise golden-section search to minimize the
/// certificate's `δ` on `corpus`.
///
/// `δ(θ)` is a maximum of convex piecewise-linear functions of the
/// parameters, so each one-dimensional search is exact up to its bracket
/// tolerance; the refinement never increases `δ` over the plain fit.
pub fn fit_closeness_utility(rule: &Rule, corpus: &[Menu], space: &OutcomeSpace) -> Result<Fit> {
    let fit = fit_utility_representation(rule, space)?;
    let data = corpus
        .iter()
        .enumerate()
        .map(|(i, m)| residuals(rule, m, &corpus_menu_id(i), &fit.utility))
        .collect::<Result<Vec<_>>>()?;
    let objective = |theta: &[f64]| data.iter().map(|r| spread(r, theta)).fold(0.0, f64::max);
    let mut theta = fit.utility.parameters();
    let mut best = objective(&theta);
    for _sweep in 0..100 {
        let before = best;
        for k in 0..theta.len() {
            let mut line = |t: f64| {
                let mut th = theta.clone();
                th[k] = t;
                objective(&th)
            };
            let (t, v) = minimize_convex(&mut line, theta[k], best);
            if v < best {
                theta[k] = t;
                best = v;
            }
        }
        if !(best < before - 1e-15 * before.max(1.0)) {
            break;
        }
    }
    Ok(Fit { utility: Utility::from_parameters(space, &theta)?, condition_number: fit.condition_number })
}

/// Minimizes a convex function of one variable starting from `x0` (where it
/// takes the value `f0`).
fn minimize_convex(f: &mut impl FnMut(f64) -> f64, x0: f64, f0: f64) -> (f64, f64) {
    let mut h = 1e-3 * x0.abs().max(1.0);
    let (fl, fr) = (f(x0 - h), f(x0 + h));
    if fl >= f0 && fr >= f0 {
        // minimum is within [x0 − h, x0 + h]
        return golden(f, x0 - h, x0 + h, (x0, f0));
    }
    let dir = if fl < fr { -1.0 } else { 1.0 };
    let mut prev = x0;
    let mut cur = x0 + dir * h;
    let mut fcur = if dir < 0.0 { fl } else { fr };
    loop {
        h *= 2.0;
        let next = cur + dir * h;
        let fnext = f(next);
        if fnext >= fcur || !next.is_finite() || h > 1e12 {
            let (a, b) = if dir < 0.0 { (next, prev) } else { (prev, next) };
            return golden(f, a, b, (cur, fcur));
        }
        prev = cur;
        cur = next;
        fcur = fnext;
    }
}

fn golden(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, best: (f64, f64)) -> (f64, f64) {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = best;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v < best.1 {
                best = (x, v);
            }
        }
    }
    best
}

/// `min{ε_neut, 2ε_decomp + ε_decomp²}`: the neutrality parameter implied by
/// approximate decomposability alone.
pub fn reduced_neutrality(eps_neut: f64, eps_decomp: f64) -> f64 {
    eps_neut.min(2.0 * eps_decomp + eps_decomp * eps_decomp)
}

/// Closeness-to-logit bounds from approximate neutrality and decomposability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UlamBound {
    /// `min{ε_neut, 2ε_d + ε_d²}`
    pub eps_neut_reduced: f64,
    /// `2ε_d + ε'_n + d(4ε_d + ε'_n)` for the supplied stability function `d`.
    pub delta_ulam: f64,
    /// The same with `d(ε) = ε`.
    pub delta_banach: f64,
}

/// Bounds for an outcome space whose Cauchy equation is stable with
/// closeness function `stability` (nondecreasing, `d(0) = 0`).
pub fn ulam_bound(eps_neut: f64, eps_decomp: f64, stability: impl Fn(f64) -> f64) -> Result<UlamBound> {
    for (name, v) in [("eps_neut", eps_neut), ("eps_decomp", eps_decomp)] {
        if !(v >= 0.0) {
            return Err(Error::NegativeInput(format!("{name} = {v}")));
        }
    }
    let reduced = reduced_neutrality(eps_neut, eps_decomp);
    let base = 2.0 * eps_decomp + reduced;
    let inner = 4.0 * eps_decomp + reduced;
    Ok(UlamBound {
        eps_neut_reduced: reduced,
        delta_ulam: base + stability(inner),
        delta_banach: base + inner,
    })
}

/// `10ε_d + 2ε_d²`, the Banach-space bound once neutrality is reduced.
pub fn banach_bound(eps_decomp: f64) -> f64 {
    10.0 * eps_decomp + 2.0 * eps_decomp * eps_decomp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_examples() {
        assert!((extract_beta(&Rule::mnl(2.0)).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(extract_beta(&Rule::Uniform).unwrap(), 0.0);
        assert_eq!(extract_beta(&Rule::mnl(f64::INFINITY)).unwrap(), f64::INFINITY);
        assert_eq!(extract_beta(&Rule::mnl(f64::NEG_INFINITY)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn utility_examples() {
        let rule = Rule::general_mnl(Utility::MeanStddev { gamma1: 1.0, gamma2: -0.5 });
        let x = Outcome::MeanStd(MeanStd { m: 2.0, sigma: 1.0 });
        assert!((extract_utility(&rule, &OutcomeSpace::MeanStddev, &x).unwrap() - 1.5).abs() < 1e-10);

        let e = Outcome::identity(&OutcomeSpace::MeanStddev);
        assert_eq!(extract_utility(&rule, &OutcomeSpace::MeanStddev, &e).unwrap(), 0.0);

        let s = OutcomeSpace::RealScalar;
        assert!((extract_utility(&Rule::mnl(1.0), &s, &Outcome::Scalar(3.0)).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(
            extract_utility(&Rule::mnl(f64::INFINITY), &s, &Outcome::Scalar(3.0)),
            Err(Error::NotPositiveAtProbe)
        ));
    }

    #[test]
    fn fit_examples() {
        let v = OutcomeSpace::RealVector { d: 2 };
        let fit = fit_utility_representation(&Rule::general_mnl(Utility::RealVector { weights: vec![1.0, -2.0] }), &v)
            .unwrap();
        match fit.utility {
            Utility::RealVector { weights } => {
                assert!((weights[0] - 1.0).abs() < 1e-9 && (weights[1] + 2.0).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }

        let s = OutcomeSpace::PrizeStream { alphabet: vec!["g".into(), "h".into()] };
        let w = Utility::PrizeStream { weights: [("g".into(), 1.5), ("h".into(), -0.5)].into_iter().collect() };
        let fit = fit_utility_representation(&Rule::general_mnl(w.clone()), &s).unwrap();
        for (a, b) in fit.utility.parameters().iter().zip(w.parameters()) {
            assert!((a - b).abs() < 1e-9);
        }

        for space in [OutcomeSpace::MeanStddev, OutcomeSpace::Matrix { d: 3 }, v] {
            let fit = fit_utility_representation(&Rule::Uniform, &space).unwrap();
            assert_eq!(fit.utility, Utility::zero(&space));
        }
    }

    #[test]
    fn cumulant_probe_conditioning() {
        let probes = cumulant_probes(4);
        let mut k = DMatrix::zeros(4, 4);
        for (r, p) in probes.iter().enumerate() {
            for (c, v) in crate::outcome::cumulants(p, 4).into_iter().enumerate() {
                k[(r, c)] = v;
            }
        }
        // numpy.linalg.cond on the same 4x4 matrix: 23.530198147261025
        assert!((condition_number(&k) - 23.530198147261025).abs() < 1e-9);
    }

    #[test]
    fn upsilon_of_logit_is_logit() {
        let m = Menu::scalar(&[("a", 0.0), ("b", 1.3), ("c", -0.4)]).unwrap();
        let est = upsilon(&Rule::mnl(1.0), &m, 5, None).unwrap();
        let p = Rule::mnl(1.0).choose(&m).unwrap();
        for (a, b) in est.distribution.probs().iter().zip(p.probs()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn upsilon_zero_propagates() {
        let m = Menu::scalar(&[("a", 0.0), ("b", 1.0)]).unwrap();
        let est = upsilon(&Rule::mnl(f64::INFINITY), &m, 6, None).unwrap();
        assert_eq!(est.distribution.probs(), &[0.0, 1.0]);
    }

    #[test]
    fn upsilon_size_guard() {
        let m = Menu::scalar(&[("a", 0.0), ("b", 1.0), ("c", 2.0)]).unwrap();
        assert!(matches!(upsilon(&Rule::Uniform, &m, 13, None), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn certificate_for_exact_logit() {
        let corpus = vec![
            Menu::unit_binary(),
            Menu::scalar(&[("x", 3.0), ("y", -2.5), ("z", 0.1)]).unwrap(),
        ];
        let cert = certify_closeness(&Rule::mnl(2.0), &corpus, &Utility::RealScalar { beta: 2.0 }).unwrap();
        assert!(cert.delta <= 1e-10);
        assert_eq!(cert.corpus_size, 2);
        assert!(verify_certificate(&cert, &Rule::mnl(2.0), &corpus).unwrap() <= 1e-12);
        let j = cert.to_json();
        assert_eq!(j["menus"][1]["menu_id"], "menu_0002");
        assert!(j["menus"][1]["shocks"]["y"].is_number());
    }

    #[test]
    fn certificate_rejects_zero_probabilities() {
        let err = certify_closeness(
            &Rule::mnl(f64::INFINITY),
            &[Menu::unit_binary()],
            &Utility::RealScalar { beta: 1.0 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonPositiveProbability { .. }));
    }

    #[test]
    fn auto_fit_never_worse_than_probe_fit() {
        let rule = Rule::perturbed(Rule::mnl(1.5), 0.05, 3);
        let corpus = vec![
            Menu::scalar(&[("a", 0.0), ("b", 4.0), ("c", -3.0)]).unwrap(),
            Menu::scalar(&[("p", 10.0), ("q", -10.0)]).unwrap(),
        ];
        let plain = fit_utility_representation(&rule, &OutcomeSpace::RealScalar).unwrap();
        let auto = fit_closeness_utility(&rule, &corpus, &OutcomeSpace::RealScalar).unwrap();
        let d_plain = certify_closeness(&rule, &corpus, &plain.utility).unwrap().delta;
        let d_auto = certify_closeness(&rule, &corpus, &auto.utility).unwrap().delta;
        assert!(d_auto <= d_plain + 1e-15);
        assert!(d_auto <= 0.05 + 1e-8);
    }

    #[test]
    fn ulam_examples() {
        let b = ulam_bound(0.0, 0.0, |e| e).unwrap();
        assert_eq!((b.delta_ulam, b.delta_banach), (0.0, 0.0));

        let b = ulam_bound(1.0, 0.1, |e| e).unwrap();
        assert!((b.eps_neut_reduced - 0.21).abs() < 1e-15);
        assert!((b.delta_ulam - 1.02).abs() < 1e-14);
        assert!((banach_bound(0.1) - 1.02).abs() < 1e-14);

        let b = ulam_bound(0.05, 0.1, |e| e).unwrap();
        assert_eq!(b.eps_neut_reduced, 0.05);
        assert!((b.delta_ulam - 0.70).abs() < 1e-14);

        assert!(matches!(ulam_bound(-1.0, 0.0, |e| e), Err(Error::NegativeInput(_))));
        assert!(ulam_bound(0.0, f64::NAN, |e| e).is_err());
    }
}
