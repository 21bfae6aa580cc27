//! Algebraic laws of outcome spaces, menus and logit rules.

use choicekit::axioms::{decomposability_epsilon, neutrality_epsilon};
use choicekit::menu::diagonal_index;
use choicekit::{
    cumulants, equivalent, power, product, ActionId, Distribution, MeanStd, Menu, Outcome, OutcomeSpace, Rule, Side,
    Utility,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn real() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn mean_std() -> impl Strategy<Value = Outcome> {
    (real(), 0.0..5.0f64).prop_map(|(m, sigma)| Outcome::MeanStd(MeanStd { m, sigma }))
}

fn distribution() -> impl Strategy<Value = Distribution> {
    prop::collection::btree_map(-40i32..40, 0.1..1.0f64, 1..5).prop_map(|atoms| {
        let total: f64 = atoms.values().sum();
        let support: Vec<f64> = atoms.keys().map(|&k| k as f64 / 8.0).collect();
        let mut probs: Vec<f64> = atoms.values().map(|w| w / total).collect();
        let rest: f64 = probs[1..].iter().sum();
        probs[0] = 1.0 - rest;
        Distribution::new(support, probs).unwrap()
    })
}

fn stream() -> impl Strategy<Value = Outcome> {
    prop::collection::vec(prop::sample::select(vec!["x", "y", "z"]), 0..5)
        .prop_map(|v| Outcome::Stream(v.into_iter().map(String::from).collect()))
}

fn matrix() -> impl Strategy<Value = Outcome> {
    prop::collection::vec(-3.0..3.0f64, 4).prop_filter_map("well conditioned", |v| {
        let m = DMatrix::from_row_slice(2, 2, &v);
        (choicekit::outcome::condition_number(&m) < 1e3).then_some(Outcome::Matrix(m))
    })
}

fn scalar_menu() -> impl Strategy<Value = Menu> {
    prop::collection::vec(real(), 1..6).prop_map(|xs| {
        let entries: Vec<(String, f64)> = xs.iter().enumerate().map(|(i, &x)| (format!("a{i}"), x)).collect();
        Menu::scalar(&entries).unwrap()
    })
}

proptest! {
    #[test]
    fn scalar_utility_is_additive(x in real(), y in real(), beta in real()) {
        let u = Utility::RealScalar { beta };
        let xy = Outcome::Scalar(x).compose(&Outcome::Scalar(y)).unwrap();
        prop_assert!(close(u.evaluate(&xy).unwrap(), beta * x + beta * y, 1e-12));
    }

    #[test]
    fn mean_std_composition(a in mean_std(), b in mean_std(), c in mean_std(), g1 in real(), g2 in real()) {
        let ab_c = a.compose(&b).unwrap().compose(&c).unwrap();
        let a_bc = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(ab_c.approx_eq(&a_bc, 1e-9));
        let e = Outcome::identity(&OutcomeSpace::MeanStddev);
        prop_assert!(a.compose(&e).unwrap().approx_eq(&a, 1e-12));
        let u = Utility::MeanStddev { gamma1: g1, gamma2: g2 };
        let lhs = u.evaluate(&a.compose(&b).unwrap()).unwrap();
        let rhs = u.evaluate(&a).unwrap() + u.evaluate(&b).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn mean_std_compensation(a in mean_std(), b in mean_std()) {
        let (side, s) = a.compensate(&b).unwrap();
        let rebuilt = match side {
            Side::Left => (s.compose(&a).unwrap(), b.clone()),
            Side::Right => (s.compose(&b).unwrap(), a.clone()),
        };
        prop_assert!(rebuilt.0.approx_eq(&rebuilt.1, 1e-8), "{:?} vs {:?}", rebuilt.0, rebuilt.1);
    }

    #[test]
    fn cumulants_add_under_convolution(x in distribution(), y in distribution()) {
        let z = x.convolve(&y);
        let (kx, ky, kz) = (cumulants(&x, 4), cumulants(&y, 4), cumulants(&z, 4));
        for l in 0..4 {
            prop_assert!((kz[l] - kx[l] - ky[l]).abs() <= 1e-9, "order {}: {} vs {}", l + 1, kz[l], kx[l] + ky[l]);
        }
    }

    #[test]
    fn distribution_identity_and_point_mass_compensation(x in distribution(), c in -5i32..5) {
        let space = OutcomeSpace::DiscreteDistribution { moment_order: 3 };
        let ox = Outcome::Distribution(x.clone());
        prop_assert!(ox.compose(&Outcome::identity(&space)).unwrap().approx_eq(&ox, 1e-12));
        let point = Outcome::Distribution(Distribution::point_mass(c as f64));
        let (side, s) = point.compensate(&ox).unwrap();
        prop_assert_eq!(side, Side::Left);
        prop_assert!(s.compose(&point).unwrap().approx_eq(&ox, 1e-9));
    }

    #[test]
    fn stream_laws(a in stream(), b in stream(), c in stream()) {
        let ab_c = a.compose(&b).unwrap().compose(&c).unwrap();
        let a_bc = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(&ab_c, &a_bc);
        let e = Outcome::identity(&OutcomeSpace::PrizeStream { alphabet: vec!["x".into(), "y".into(), "z".into()] });
        prop_assert_eq!(&a.compose(&e).unwrap(), &a);
        // a suffix of a stream is always compensable
        let ab = a.compose(&b).unwrap();
        if let Ok((side, s)) = b.compensate(&ab) {
            prop_assert_eq!(side, Side::Left);
            prop_assert_eq!(s.compose(&b).unwrap(), ab);
        } else {
            prop_assert!(false, "suffix not compensable");
        }
    }

    #[test]
    fn matrix_laws(a in matrix(), b in matrix(), beta in real()) {
        let u = Utility::Matrix { beta };
        let lhs = u.evaluate(&a.compose(&b).unwrap()).unwrap();
        let rhs = u.evaluate(&a).unwrap() + u.evaluate(&b).unwrap();
        prop_assert!(close(lhs, rhs, 1e-9));
        let (side, s) = a.compensate(&b).unwrap();
        prop_assert_eq!(side, Side::Left);
        prop_assert!(s.compose(&a).unwrap().approx_eq(&b, 1e-8));
    }

    #[test]
    fn mnl_translation_invariance(m in scalar_menu(), c in real(), beta in -3.0..3.0f64) {
        let shifted = m.map_outcomes(|o| Ok(Outcome::Scalar(o.as_scalar().unwrap() + c))).unwrap();
        let p = Rule::mnl(beta).choose(&m).unwrap();
        let q = Rule::mnl(beta).choose(&shifted).unwrap();
        for (a, b) in p.probs().iter().zip(q.probs()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn mnl_iia(m in scalar_menu(), beta in -3.0..3.0f64) {
        prop_assume!(m.len() >= 3);
        let sub = Menu::new(m.space().clone(), m.iter().take(2).map(|(a, o)| (a.clone(), o.clone())).collect()).unwrap();
        let p = Rule::mnl(beta).choose(&m).unwrap();
        let q = Rule::mnl(beta).choose(&sub).unwrap();
        prop_assert!(close(p.prob(0) / p.prob(1), q.prob(0) / q.prob(1), 1e-10));
    }

    #[test]
    fn mnl_decomposable_and_neutral(m1 in scalar_menu(), m2 in scalar_menu(), beta in -3.0..3.0f64) {
        let rule = Rule::mnl(beta);
        prop_assert!(decomposability_epsilon(&rule, &m1, &m2, 1e-10).unwrap().satisfied_at_tol);
        let doubled = product(&m1, &Menu::scalar(&[("l", 0.0), ("r", 0.0)]).unwrap()).unwrap();
        prop_assert!(neutrality_epsilon(&rule, &doubled, 1e-10).unwrap().satisfied_at_tol);
    }

    #[test]
    fn product_shape(m1 in scalar_menu(), m2 in scalar_menu()) {
        let p = product(&m1, &m2).unwrap();
        prop_assert_eq!(p.len(), m1.len() * m2.len());
        for (i, (a, o)) in p.iter().enumerate() {
            let (l, r) = a.as_pair().unwrap();
            prop_assert_eq!(l, &m1.actions()[i / m2.len()]);
            prop_assert_eq!(r, &m2.actions()[i % m2.len()]);
            let expected = m1.outcomes()[i / m2.len()].as_scalar().unwrap() + m2.outcomes()[i % m2.len()].as_scalar().unwrap();
            prop_assert_eq!(o.as_scalar().unwrap(), expected);
        }
    }

    #[test]
    fn menu_json_round_trip(m in scalar_menu()) {
        let back = Menu::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(back.canonical_hash(), m.canonical_hash());
        prop_assert_eq!(back.actions(), m.actions());
    }

    #[test]
    fn canonical_hash_ignores_order(m in scalar_menu()) {
        let reversed = Menu::new(m.space().clone(), m.iter().rev().map(|(a, o)| (a.clone(), o.clone())).collect()).unwrap();
        prop_assert_eq!(reversed.canonical_hash(), m.canonical_hash());
        prop_assert!(equivalent(&m, &reversed, None).is_some());
    }
}

#[test]
fn streams_and_matrices_do_not_commute() {
    let (x, y) = (Outcome::Stream(vec!["x".into()]), Outcome::Stream(vec!["y".into()]));
    assert_ne!(x.compose(&y).unwrap(), y.compose(&x).unwrap());
    let a = Outcome::Matrix(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
    let b = Outcome::Matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));
    assert!(!a.compose(&b).unwrap().approx_eq(&b.compose(&a).unwrap(), 1e-9));
    assert!(!OutcomeSpace::PrizeStream { alphabet: vec!["x".into()] }.is_commutative());
    assert!(OutcomeSpace::MeanStddev.is_commutative());
}

#[test]
fn power_diagonal_and_ids() {
    let m = Menu::scalar(&[("a", 0.0), ("b", 1.0), ("c", 5.0)]).unwrap();
    let p = power(&m, 4).unwrap();
    assert_eq!(p.len(), 81);
    for i in 0..3 {
        let d = &p.outcomes()[diagonal_index(3, 4, i)];
        assert_eq!(d.as_scalar().unwrap(), 4.0 * m.outcomes()[i].as_scalar().unwrap());
    }
    let id = &p.actions()[diagonal_index(3, 4, 1)];
    assert_eq!(id.to_string(), "(((b,b),b),b)");
    assert_eq!(&ActionId::parse(&id.to_string()).unwrap(), id);
    assert!(power(&m, 0).is_err());
}

#[test]
fn rule_json_round_trip() {
    for text in [
        r#"{"type": "mnl", "beta": 1.5}"#,
        r#"{"type": "mnl", "beta": "-inf"}"#,
        r#"{"type": "iaru", "shock": {"kind": "gumbel", "param": 2.0}}"#,
        r#"{"type": "perturbed", "base": {"type": "mnl", "beta": 1.0}, "delta": 0.1, "seed": 3}"#,
        r#"{"type": "general_mnl", "utility": {"kind": "mean_stddev", "gamma1": 1.0, "gamma2": -0.5}}"#,
        r#"{"type": "uniform"}"#,
    ] {
        let rule = Rule::from_json(&serde_json::from_str(text).unwrap()).unwrap();
        let again = Rule::from_json(&rule.to_json()).unwrap();
        assert_eq!(again.to_json(), rule.to_json(), "{text}");
    }
}
