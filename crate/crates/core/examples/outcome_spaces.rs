//! The six outcome spaces: composition, identity, compensation, and the
//! additive utility on each.

use choicekit::{Distribution, MeanStd, Outcome, OutcomeSpace, Utility};
use nalgebra::DMatrix;

fn show(space: &OutcomeSpace, x: Outcome, y: Outcome, u: Utility) -> choicekit::Result<()> {
    let xy = x.compose(&y)?;
    println!("{space}");
    println!("  x * y      = {}", xy.to_json());
    println!("  identity   = {}", Outcome::identity(space).to_json());
    let (side, s) = x.compensate(&y)?;
    println!("  compensate = {:?} {}", side, s.to_json());
    let (ux, uy, uxy) = (u.evaluate(&x)?, u.evaluate(&y)?, u.evaluate(&xy)?);
    println!("  u(x) + u(y) = {:.12}  u(x*y) = {:.12}", ux + uy, uxy);
    Ok(())
}

fn main() -> choicekit::Result<()> {
    show(&OutcomeSpace::RealScalar, Outcome::Scalar(1.5), Outcome::Scalar(-4.0), Utility::RealScalar { beta: 0.7 })?;
    show(
        &OutcomeSpace::RealVector { d: 2 },
        Outcome::Vector(vec![1.0, 2.0]),
        Outcome::Vector(vec![0.5, -1.0]),
        Utility::RealVector { weights: vec![1.0, -0.3] },
    )?;
    show(
        &OutcomeSpace::MeanStddev,
        Outcome::MeanStd(MeanStd { m: 1.0, sigma: 3.0 }),
        Outcome::MeanStd(MeanStd { m: 2.0, sigma: 4.0 }),
        Utility::MeanStddev { gamma1: 1.0, gamma2: -0.1 },
    )?;
    show(
        &OutcomeSpace::DiscreteDistribution { moment_order: 3 },
        Outcome::Distribution(Distribution::new(vec![0.0, 1.0], vec![0.5, 0.5])?),
        Outcome::Distribution(Distribution::point_mass(2.0)),
        Utility::DiscreteDistribution { gammas: vec![1.0, -0.5, 0.1] },
    )?;
    let stream = OutcomeSpace::PrizeStream { alphabet: vec!["apple".into(), "pear".into()] };
    show(
        &stream,
        Outcome::Stream(vec!["apple".into(), "pear".into(), "apple".into()]),
        Outcome::Stream(vec!["apple".into()]),
        Utility::PrizeStream { weights: [("apple".into(), 1.0), ("pear".into(), 0.25)].into_iter().collect() },
    )?;
    show(
        &OutcomeSpace::Matrix { d: 2 },
        Outcome::Matrix(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0])),
        Outcome::Matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 3.0, 2.0])),
        Utility::Matrix { beta: 0.5 },
    )?;
    Ok(())
}
