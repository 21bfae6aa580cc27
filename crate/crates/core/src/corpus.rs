//! Seeded random menu corpora.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::menu::{ActionId, Menu};
use crate::outcome::{condition_number, Distribution, MeanStd, Outcome, OutcomeSpace};

/// Matrices sampled for a corpus are redrawn until their condition number
/// is below this.
const SAMPLE_MAX_CONDITION: f64 = 1e6;

/// Parameter ranges for drawing outcomes. Fields that do not apply to the
/// corpus space are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutcomeSampler {
    /// Range of scalars, vector components, means, support points and
    /// matrix entries.
    pub range: [f64; 2],
    /// Draw integers from `range` instead of reals.
    pub integer: bool,
    /// Draw multiples of `1/denominator` from `range`.
    pub denominator: Option<u64>,
    pub sigma_range: [f64; 2],
    pub support_size: [usize; 2],
    pub stream_length: [usize; 2],
    /// Chance that an action repeats the outcome of an earlier action.
    pub duplicate_prob: f64,
}

impl Default for OutcomeSampler {
    fn default() -> Self {
        OutcomeSampler {
            range: [-5.0, 5.0],
            integer: false,
            denominator: None,
            sigma_range: [0.0, 3.0],
            support_size: [1, 4],
            stream_length: [0, 4],
            duplicate_prob: 0.0,
        }
    }
}

/// Description of a random corpus. Generation is a pure function of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub space: OutcomeSpace,
    pub menu_count: usize,
    /// Inclusive bounds on the number of actions per menu.
    pub actions_per_menu: [usize; 2],
    #[serde(default)]
    pub outcome_sampler: OutcomeSampler,
    #[serde(default)]
    pub seed: u64,
}

impl CorpusSpec {
    pub fn new(space: OutcomeSpace, menu_count: usize, actions_per_menu: [usize; 2], seed: u64) -> CorpusSpec {
        CorpusSpec { space, menu_count, actions_per_menu, outcome_sampler: OutcomeSampler::default(), seed }
    }

    pub fn with_sampler(mut self, sampler: OutcomeSampler) -> CorpusSpec {
        self.outcome_sampler = sampler;
        self
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<CorpusSpec> {
        let spec: CorpusSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        let bad = |m: &str| Err(Error::InvalidCorpus(m.into()));
        let s = &self.outcome_sampler;
        if self.menu_count == 0 {
            return bad("menu_count must be positive");
        }
        if self.actions_per_menu[0] == 0 || self.actions_per_menu[0] > self.actions_per_menu[1] {
            return bad("actions_per_menu must be a nonempty range of positive sizes");
        }
        if !(s.range[0] <= s.range[1]) || !s.range.iter().all(|x| x.is_finite()) {
            return bad("range must be finite and nonempty");
        }
        if !(0.0 <= s.sigma_range[0] && s.sigma_range[0] <= s.sigma_range[1] && s.sigma_range[1].is_finite()) {
            return bad("sigma_range must be a nonempty range of nonnegative reals");
        }
        if s.support_size[0] == 0 || s.support_size[0] > s.support_size[1] {
            return bad("support_size must be a nonempty range of positive sizes");
        }
        if s.stream_length[0] > s.stream_length[1] {
            return bad("stream_length must be nonempty");
        }
        if s.denominator == Some(0) {
            return bad("denominator must be positive");
        }
        if !(0.0..=1.0).contains(&s.duplicate_prob) {
            return bad("duplicate_prob must lie in [0, 1]");
        }
        if (s.integer || s.denominator.is_some()) && self.lattice_points().is_empty() {
            return bad("range contains no lattice points");
        }
        if let OutcomeSpace::DiscreteDistribution { .. } = self.space {
            if (s.integer || s.denominator.is_some()) && self.lattice_points().len() < s.support_size[0] {
                return bad("range has fewer lattice points than support_size requires");
            }
        }
        Ok(())
    }

    fn lattice_points(&self) -> Vec<f64> {
        let s = &self.outcome_sampler;
        let q = s.denominator.unwrap_or(1) as f64;
        let lo = (s.range[0] * q).ceil() as i64;
        let hi = (s.range[1] * q).floor() as i64;
        (lo..=hi).map(|k| k as f64 / q).collect()
    }

    /// The corpus described by this spec.
    pub fn generate(&self) -> Result<Vec<Menu>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let lattice = if self.outcome_sampler.integer || self.outcome_sampler.denominator.is_some() {
            Some(self.lattice_points())
        } else {
            None
        };
        let mut gen = Sampler { spec: self, lattice, rng: &mut rng };
        (0..self.menu_count).map(|_| gen.menu()).collect()
    }
}

struct Sampler<'a> {
    spec: &'a CorpusSpec,
    lattice: Option<Vec<f64>>,
    rng: &'a mut ChaCha8Rng,
}

impl Sampler<'_> {
    fn real(&mut self) -> f64 {
        match &self.lattice {
            Some(pts) => *pts.choose(self.rng).unwrap(),
            None => {
                let [lo, hi] = self.spec.outcome_sampler.range;
                if lo == hi {
                    lo
                } else {
                    self.rng.gen_range(lo..hi)
                }
            }
        }
    }

    fn size(&mut self, [lo, hi]: [usize; 2]) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    fn outcome(&mut self) -> Result<Outcome> {
        let s = &self.spec.outcome_sampler;
        Ok(match &self.spec.space {
            OutcomeSpace::RealScalar => Outcome::Scalar(self.real()),
            OutcomeSpace::RealVector { d } => Outcome::Vector((0..*d).map(|_| self.real()).collect()),
            OutcomeSpace::MeanStddev => {
                let [lo, hi] = s.sigma_range;
                let m = self.real();
                let sigma = if lo == hi { lo } else { self.rng.gen_range(lo..hi) };
                Outcome::MeanStd(MeanStd { m, sigma })
            }
            OutcomeSpace::DiscreteDistribution { .. } => {
                let k = self.size(s.support_size);
                let mut support: Vec<f64> = Vec::with_capacity(k);
                for _ in 0..64 * k {
                    if support.len() == k {
                        break;
                    }
                    let x = self.real();
                    if !support.contains(&x) {
                        support.push(x);
                    }
                }
                let weights: Vec<f64> = support.iter().map(|_| self.rng.gen_range(0.05..1.0)).collect();
                let total: f64 = weights.iter().sum();
                let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
                let rest: f64 = probs[1..].iter().sum();
                probs[0] = 1.0 - rest;
                Outcome::Distribution(Distribution::new(support, probs)?)
            }
            OutcomeSpace::PrizeStream { alphabet } => {
                let len = self.size(s.stream_length);
                Outcome::Stream((0..len).map(|_| alphabet.choose(self.rng).unwrap().clone()).collect())
            }
            OutcomeSpace::Matrix { d } => {
                for _ in 0..1000 {
                    let m = DMatrix::from_fn(*d, *d, |_, _| self.real());
                    if condition_number(&m) <= SAMPLE_MAX_CONDITION {
                        return Ok(Outcome::Matrix(m));
                    }
                }
                return Err(Error::InvalidCorpus("could not draw a well-conditioned matrix".into()));
            }
        })
    }

    fn menu(&mut self) -> Result<Menu> {
        let k = self.size(self.spec.actions_per_menu);
        let mut entries: Vec<(ActionId, Outcome)> = Vec::with_capacity(k);
        for i in 0..k {
            let dup = i > 0 && self.rng.gen_bool(self.spec.outcome_sampler.duplicate_prob);
            let o = if dup {
                let j = self.rng.gen_range(0..i);
                entries[j].1.clone()
            } else {
                self.outcome()?
            };
            entries.push((ActionId::atom(format!("a{}", i + 1))?, o));
        }
        Menu::new(self.spec.space.clone(), entries)
    }
}

/// Writes `menus` to `dir` as `menu_0001.json`, `menu_0002.json`, … and
/// returns the paths.
pub fn write_corpus(menus: &[Menu], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    menus
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let path = dir.join(format!("{}.json", crate::extract::corpus_menu_id(i)));
            let mut text = serde_json::to_string_pretty(&m.to_json())?;
            text.push('\n');
            std::fs::write(&path, text)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_spaces() -> Vec<OutcomeSpace> {
        vec![
            OutcomeSpace::RealScalar,
            OutcomeSpace::RealVector { d: 3 },
            OutcomeSpace::MeanStddev,
            OutcomeSpace::DiscreteDistribution { moment_order: 4 },
            OutcomeSpace::PrizeStream { alphabet: vec!["x".into(), "y".into()] },
            OutcomeSpace::Matrix { d: 2 },
        ]
    }

    #[test]
    fn deterministic_and_in_range() {
        for space in all_spaces() {
            let spec = CorpusSpec::new(space, 30, [2, 5], 1);
            let a = spec.generate().unwrap();
            let b = spec.generate().unwrap();
            assert_eq!(a.len(), 30);
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.to_json(), y.to_json());
                assert!((2..=5).contains(&x.len()));
            }
        }
    }

    #[test]
    fn seeds_differ() {
        let a = CorpusSpec::new(OutcomeSpace::RealScalar, 5, [3, 3], 1).generate().unwrap();
        let b = CorpusSpec::new(OutcomeSpace::RealScalar, 5, [3, 3], 2).generate().unwrap();
        assert_ne!(a[0].to_json(), b[0].to_json());
    }

    #[test]
    fn lattice_sampling() {
        let sampler = OutcomeSampler { denominator: Some(4), range: [-1.0, 1.0], ..Default::default() };
        let menus = CorpusSpec::new(OutcomeSpace::RealScalar, 20, [2, 4], 9).with_sampler(sampler).generate().unwrap();
        for m in &menus {
            for x in m.scalars().unwrap() {
                assert_eq!((x * 4.0).fract(), 0.0);
                assert!((-1.0..=1.0).contains(&x));
            }
        }
    }

    #[test]
    fn duplicates_are_drawn() {
        let sampler = OutcomeSampler { duplicate_prob: 1.0, ..Default::default() };
        let m = &CorpusSpec::new(OutcomeSpace::RealScalar, 1, [4, 4], 3).with_sampler(sampler).generate().unwrap()[0];
        let xs = m.scalars().unwrap();
        assert!(xs.iter().all(|&x| x == xs[0]));
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            CorpusSpec::new(OutcomeSpace::RealScalar, 0, [2, 3], 0),
            CorpusSpec::new(OutcomeSpace::RealScalar, 3, [4, 3], 0),
            CorpusSpec::new(OutcomeSpace::RealScalar, 3, [0, 3], 0),
            CorpusSpec::new(OutcomeSpace::RealScalar, 3, [2, 3], 0)
                .with_sampler(OutcomeSampler { integer: true, range: [0.2, 0.8], ..Default::default() }),
        ];
        for spec in bad {
            assert!(matches!(spec.generate(), Err(Error::InvalidCorpus(_))), "{spec:?}");
        }
    }

    #[test]
    fn spec_json_defaults() {
        let spec: CorpusSpec = serde_json::from_str(
            r#"{"space": {"kind": "real_scalar"}, "menu_count": 2, "actions_per_menu": [2, 5], "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(spec.outcome_sampler, OutcomeSampler::default());
        assert_eq!(spec.seed, 7);
    }
}
