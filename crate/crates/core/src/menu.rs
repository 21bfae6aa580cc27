//! Menus `(A, o)`, their product `⊗`, n-fold powers and equivalence up to
//! relabeling.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hashing::Digest;
use crate::outcome::{Outcome, OutcomeSpace};

/// Default outcome-equality tolerance used by [`equivalent`] and the
/// neutrality checks: exact for prize streams, `1e-9` otherwise.
pub fn default_tolerance(space: &OutcomeSpace) -> f64 {
    match space {
        OutcomeSpace::PrizeStream { .. } => 0.0,
        _ => 1e-9,
    }
}

const ROLL: u64 = 0x0000_0100_0000_01B3;

/// An action label: either atomic or an ordered pair of labels.
///
/// Serializes as the label itself, or `(left,right)` for pairs. Atomic labels
/// may not contain `(`, `)` or `,`, which keeps the serialization injective.
#[derive(Clone)]
pub struct ActionId(Arc<Node>);

struct Node {
    kind: NodeKind,
    // polynomial hash of the serialization, and ROLL^len
    roll: u64,
    pow: u64,
}

enum NodeKind {
    Atom(String),
    Pair(ActionId, ActionId),
}

fn roll_bytes(bytes: &[u8]) -> (u64, u64) {
    bytes.iter().fold((0u64, 1u64), |(h, p), &b| {
        (h.wrapping_mul(ROLL).wrapping_add(b as u64), p.wrapping_mul(ROLL))
    })
}

fn roll_concat(parts: &[(u64, u64)]) -> (u64, u64) {
    parts.iter().fold((0u64, 1u64), |(h, p), &(h2, p2)| {
        (h.wrapping_mul(p2).wrapping_add(h2), p.wrapping_mul(p2))
    })
}

impl ActionId {
    pub fn atom(label: impl Into<String>) -> Result<ActionId> {
        let label = label.into();
        if label.is_empty() || label.contains(['(', ')', ',']) {
            return Err(Error::InvalidActionId(label));
        }
        let (roll, pow) = roll_bytes(label.as_bytes());
        Ok(ActionId(Arc::new(Node { kind: NodeKind::Atom(label), roll, pow })))
    }

    pub fn pair(left: &ActionId, right: &ActionId) -> ActionId {
        let open = roll_bytes(b"(");
        let comma = roll_bytes(b",");
        let close = roll_bytes(b")");
        let (roll, pow) = roll_concat(&[
            open,
            (left.0.roll, left.0.pow),
            comma,
            (right.0.roll, right.0.pow),
            close,
        ]);
        ActionId(Arc::new(Node {
            kind: NodeKind::Pair(left.clone(), right.clone()),
            roll,
            pow,
        }))
    }

    /// Parses the serialized form.
    pub fn parse(s: &str) -> Result<ActionId> {
        fn parse_at(s: &str, pos: &mut usize) -> Option<ActionId> {
            let bytes = s.as_bytes();
            if bytes.get(*pos) == Some(&b'(') {
                *pos += 1;
                let left = parse_at(s, pos)?;
                (bytes.get(*pos) == Some(&b',')).then_some(())?;
                *pos += 1;
                let right = parse_at(s, pos)?;
                (bytes.get(*pos) == Some(&b')')).then_some(())?;
                *pos += 1;
                Some(ActionId::pair(&left, &right))
            } else {
                let start = *pos;
                while *pos < bytes.len() && !matches!(bytes[*pos], b'(' | b')' | b',') {
                    *pos += 1;
                }
                ActionId::atom(&s[start..*pos]).ok()
            }
        }
        let mut pos = 0;
        match parse_at(s, &mut pos) {
            Some(id) if pos == s.len() => Ok(id),
            _ => Err(Error::InvalidActionId(s.to_string())),
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match &self.0.kind {
            NodeKind::Atom(s) => Some(s),
            NodeKind::Pair(..) => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&ActionId, &ActionId)> {
        match &self.0.kind {
            NodeKind::Pair(l, r) => Some((l, r)),
            NodeKind::Atom(_) => None,
        }
    }

    /// Stable 64-bit digest of the serialization.
    pub fn digest(&self) -> u64 {
        crate::hashing::splitmix64(self.0.roll ^ self.0.pow.rotate_left(17))
    }
}

impl PartialEq for ActionId {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.roll != other.0.roll || self.0.pow != other.0.pow {
            return false;
        }
        match (&self.0.kind, &other.0.kind) {
            (NodeKind::Atom(a), NodeKind::Atom(b)) => a == b,
            (NodeKind::Pair(a1, a2), NodeKind::Pair(b1, b2)) => a1 == b1 && a2 == b2,
            _ => false,
        }
    }
}

impl Eq for ActionId {}

impl Hash for ActionId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.roll);
    }
}

impl PartialOrd for ActionId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ActionId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            NodeKind::Atom(s) => f.write_str(s),
            NodeKind::Pair(l, r) => write!(f, "({l},{r})"),
        }
    }
}

impl fmt::Debug for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActionId({self})")
    }
}

/// A finite menu of labeled actions, all with outcomes in one space.
///
/// Entries keep insertion order.
#[derive(Clone)]
pub struct Menu {
    space: OutcomeSpace,
    actions: Vec<ActionId>,
    outcomes: Vec<Outcome>,
    canonical: OnceLock<u64>,
    index: OnceLock<HashMap<ActionId, usize>>,
}

impl fmt::Debug for Menu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (a, o) in self.iter() {
            m.entry(&a.to_string(), o);
        }
        m.finish()
    }
}

impl Menu {
    pub fn new(space: OutcomeSpace, entries: Vec<(ActionId, Outcome)>) -> Result<Menu> {
        space.validate()?;
        if entries.is_empty() {
            return Err(Error::InvalidMenu("a menu needs at least one action".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(entries.len());
        for (a, o) in &entries {
            if !seen.insert(a.clone()) {
                return Err(Error::InvalidMenu(format!("duplicate action id {a}")));
            }
            o.check_in(&space)?;
        }
        let (actions, outcomes) = entries.into_iter().unzip();
        Ok(Menu::from_parts(space, actions, outcomes))
    }

    fn from_parts(space: OutcomeSpace, actions: Vec<ActionId>, outcomes: Vec<Outcome>) -> Menu {
        Menu { space, actions, outcomes, canonical: OnceLock::new(), index: OnceLock::new() }
    }

    /// Menu over real scalars from `(label, outcome)` pairs.
    pub fn scalar<S: AsRef<str>>(entries: &[(S, f64)]) -> Result<Menu> {
        let entries = entries
            .iter()
            .map(|(l, x)| Ok((ActionId::atom(l.as_ref())?, Outcome::Scalar(*x))))
            .collect::<Result<Vec<_>>>()?;
        Menu::new(OutcomeSpace::RealScalar, entries)
    }

    /// The unit binary menu `{b0: 0, b1: 1}`.
    pub fn unit_binary() -> Menu {
        Menu::scalar(&[("b0", 0.0), ("b1", 1.0)]).expect("valid menu")
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&ActionId, &Outcome)> + ExactSizeIterator {
        self.actions.iter().zip(&self.outcomes)
    }

    pub fn index_of(&self, action: &ActionId) -> Option<usize> {
        self.index
            .get_or_init(|| self.actions.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect())
            .get(action)
            .copied()
    }

    pub fn outcome(&self, action: &ActionId) -> Option<&Outcome> {
        self.index_of(action).map(|i| &self.outcomes[i])
    }

    /// Scalar outcomes, if this is a real-scalar menu.
    pub fn scalars(&self) -> Option<Vec<f64>> {
        self.outcomes.iter().map(Outcome::as_scalar).collect()
    }

    /// Returns a copy with every outcome passed through `f`. Ids are kept.
    pub fn map_outcomes(&self, mut f: impl FnMut(&Outcome) -> Result<Outcome>) -> Result<Menu> {
        let outcomes = self.outcomes.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        for o in &outcomes {
            o.check_in(&self.space)?;
        }
        Ok(Menu::from_parts(self.space.clone(), self.actions.clone(), outcomes))
    }

    /// Returns a copy with the outcome of entry `i` replaced.
    pub fn with_outcome(&self, i: usize, outcome: Outcome) -> Result<Menu> {
        outcome.check_in(&self.space)?;
        let mut outcomes = self.outcomes.clone();
        outcomes[i] = outcome;
        Ok(Menu::from_parts(self.space.clone(), self.actions.clone(), outcomes))
    }

    /// Returns a copy with actions renamed by `f`.
    pub fn relabel(&self, mut f: impl FnMut(&ActionId) -> ActionId) -> Result<Menu> {
        Menu::new(
            self.space.clone(),
            self.actions.iter().map(&mut f).zip(self.outcomes.iter().cloned()).collect(),
        )
    }

    /// Hash of the space and the sorted `(action, outcome)` entries, with
    /// outcomes rounded to 12 significant digits. Independent of entry order.
    pub fn canonical_hash(&self) -> u64 {
        *self.canonical.get_or_init(|| {
            let mut entries: Vec<u64> = self
                .iter()
                .map(|(a, o)| {
                    let mut h = Digest::new(0xE);
                    h.write(a.digest());
                    o.digest(&mut h);
                    h.finish()
                })
                .collect();
            entries.sort_unstable();
            let mut h = Digest::new(0x3);
            self.space.digest(&mut h);
            h.write(entries.len() as u64);
            for e in entries {
                h.write(e);
            }
            h.finish()
        })
    }

    pub fn to_json(&self) -> Value {
        let doc = MenuDoc {
            probabilities: None,
            space: self.space.clone(),
            actions: self
                .iter()
                .map(|(a, o)| ActionDoc { id: a.to_string(), outcome: o.to_json() })
                .collect(),
        };
        serde_json::to_value(doc).expect("menu serializes")
    }

    /// Reads a menu document; an observed `probabilities` block, if present,
    /// is validated and dropped.
    pub fn from_json(value: &Value) -> Result<Menu> {
        Ok(MenuFile::from_json(value)?.menu)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Menu> {
        Ok(MenuFile::from_path(path)?.menu)
    }
}

/// A menu document together with the choice probabilities observed on it.
#[derive(Clone, Debug)]
pub struct MenuFile {
    pub menu: Menu,
    pub observed: Option<ChoiceDistribution>,
}

impl MenuFile {
    pub fn from_json(value: &Value) -> Result<MenuFile> {
        let doc: MenuDoc = serde_json::from_value(value.clone())?;
        doc.space.validate()?;
        let entries = doc
            .actions
            .iter()
            .map(|a| Ok((ActionId::parse(&a.id)?, Outcome::from_json(&doc.space, &a.outcome)?)))
            .collect::<Result<Vec<_>>>()?;
        let menu = Menu::new(doc.space, entries)?;
        let observed = match &doc.probabilities {
            Some(p) => Some(ChoiceDistribution::from_json(&menu, p)?),
            None => None,
        };
        Ok(MenuFile { menu, observed })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<MenuFile> {
        let text = std::fs::read_to_string(path)?;
        MenuFile::from_json(&serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.menu.to_json();
        if let Some(p) = &self.observed {
            v["probabilities"] = p.to_json();
        }
        v
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MenuDoc {
    space: OutcomeSpace,
    actions: Vec<ActionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probabilities: Option<Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    id: String,
    outcome: Value,
}

/// `m1 ⊗ m2`: actions `(a1, a2)` in lexicographic index order, outcomes
/// `o1(a1) * o2(a2)`.
pub fn product(m1: &Menu, m2: &Menu) -> Result<Menu> {
    if m1.space != m2.space {
        return Err(Error::IncompatibleSpaces(format!("{} vs {}", m1.space, m2.space)));
    }
    let n = m1.len() * m2.len();
    let mut actions = Vec::with_capacity(n);
    let mut outcomes = Vec::with_capacity(n);
    for (a1, o1) in m1.iter() {
        for (a2, o2) in m2.iter() {
            actions.push(ActionId::pair(a1, a2));
            outcomes.push(o1.compose(o2)?);
        }
    }
    Ok(Menu::from_parts(m1.space.clone(), actions, outcomes))
}

/// The left-associated n-fold product `((m ⊗ m) ⊗ m) …`.
pub fn power(m: &Menu, n: usize) -> Result<Menu> {
    if n == 0 {
        return Err(Error::EmptyPower);
    }
    let mut acc = m.clone();
    for _ in 1..n {
        acc = product(&acc, m)?;
    }
    Ok(acc)
}

/// Index of the diagonal action `(a_i, …, a_i)` in `power(m, n)` where `m`
/// has `k` actions.
pub fn diagonal_index(k: usize, n: usize, i: usize) -> usize {
    (0..n).fold(0, |acc, _| acc * k + i)
}

/// Searches for a bijection between the actions of `m1` and `m2` that matches
/// outcomes within `tol` (the space default when `None`).
///
/// Returns `v` with `v[i]` the index in `m2` matched to entry `i` of `m1`.
pub fn equivalent(m1: &Menu, m2: &Menu, tol: Option<f64>) -> Option<Vec<usize>> {
    if m1.space != m2.space || m1.len() != m2.len() {
        return None;
    }
    let tol = tol.unwrap_or_else(|| default_tolerance(&m1.space));
    let sorted = |m: &Menu| {
        let mut idx: Vec<usize> = (0..m.len()).collect();
        idx.sort_by(|&a, &b| m.outcomes[a].total_cmp(&m.outcomes[b]));
        idx
    };
    let (s1, s2) = (sorted(m1), sorted(m2));
    let mut forward = vec![0; m1.len()];
    if s1
        .iter()
        .zip(&s2)
        .all(|(&i, &j)| m1.outcomes[i].approx_eq(&m2.outcomes[j], tol))
    {
        for (&i, &j) in s1.iter().zip(&s2) {
            forward[i] = j;
        }
        return Some(forward);
    }
    // sorted pairing can misalign near-ties under a positive tolerance
    if tol > 0.0 && m1.len() <= 2048 {
        let mut used = vec![false; m2.len()];
        for &i in &s1 {
            let j = s2
                .iter()
                .copied()
                .find(|&j| !used[j] && m1.outcomes[i].approx_eq(&m2.outcomes[j], tol))?;
            used[j] = true;
            forward[i] = j;
        }
        return Some(forward);
    }
    None
}

/// A probability distribution over the actions of one menu, aligned with the
/// menu's entry order.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiceDistribution {
    actions: Vec<ActionId>,
    probs: Vec<f64>,
}

/// Tolerance on `Σ p = 1` for a choice distribution.
pub const CHOICE_SUM_TOL: f64 = 1e-12;

impl ChoiceDistribution {
    pub fn new(actions: Vec<ActionId>, probs: Vec<f64>) -> Result<ChoiceDistribution> {
        let d = ChoiceDistribution { actions, probs };
        d.validate()?;
        Ok(d)
    }

    pub(crate) fn for_menu(menu: &Menu, probs: Vec<f64>) -> ChoiceDistribution {
        ChoiceDistribution { actions: menu.actions.clone(), probs }
    }

    pub fn validate(&self) -> Result<()> {
        if self.actions.len() != self.probs.len() {
            return Err(Error::InvalidMenu("probability vector length mismatch".into()));
        }
        if let Some(p) = self.probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidMenu(format!("invalid probability {p}")));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > CHOICE_SUM_TOL {
            return Err(Error::InvalidMenu(format!("probabilities sum to {total}")));
        }
        Ok(())
    }

    /// Reads `{"action": p, ...}` for `menu`; the key set must equal the menu's
    /// action set.
    pub fn from_json(menu: &Menu, value: &Value) -> Result<ChoiceDistribution> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidMenu("probabilities must be an object".into()))?;
        let mut probs = vec![f64::NAN; menu.len()];
        for (k, v) in obj {
            let id = ActionId::parse(k)?;
            let i = menu.index_of(&id).ok_or_else(|| Error::UnknownAction(k.clone()))?;
            probs[i] = v
                .as_f64()
                .ok_or_else(|| Error::InvalidMenu(format!("probability for {k} is not a number")))?;
        }
        if let Some(i) = probs.iter().position(|p| p.is_nan()) {
            return Err(Error::InvalidMenu(format!(
                "probabilities omit action {}",
                menu.actions[i]
            )));
        }
        ChoiceDistribution::new(menu.actions.clone(), probs)
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn get(&self, action: &ActionId) -> Option<f64> {
        self.actions.iter().position(|a| a == action).map(|i| self.probs[i])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn to_json(&self) -> Value {
        Value::Object(
            self.actions
                .iter()
                .zip(&self.probs)
                .map(|(a, p)| (a.to_string(), Value::from(*p)))
                .collect(),
        )
    }
}
