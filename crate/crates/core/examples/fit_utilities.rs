//! Reading a logit parameter and full utility representations back off
//! rules on every outcome space.

use choicekit::extract::{extract_beta, fit_utility_representation};
use choicekit::{OutcomeSpace, Rule, Utility};

fn main() -> choicekit::Result<()> {
    for beta in [-2.0, 0.0, 0.5, f64::INFINITY] {
        println!("extract_beta(mnl({beta})) = {}", extract_beta(&Rule::mnl(beta))?);
    }
    println!("extract_beta(probit) = {:.6}", extract_beta(&Rule::probit())?);

    let cases = [
        (OutcomeSpace::RealVector { d: 3 }, Utility::RealVector { weights: vec![0.5, -1.0, 2.0] }),
        (OutcomeSpace::MeanStddev, Utility::MeanStddev { gamma1: 1.0, gamma2: -0.5 }),
        (
            OutcomeSpace::DiscreteDistribution { moment_order: 4 },
            Utility::DiscreteDistribution { gammas: vec![1.0, -0.5, 0.2, -0.05] },
        ),
        (
            OutcomeSpace::PrizeStream { alphabet: vec!["a".into(), "b".into(), "c".into()] },
            Utility::PrizeStream { weights: [("a".into(), 1.0), ("b".into(), -1.0), ("c".into(), 0.3)].into_iter().collect() },
        ),
        (OutcomeSpace::Matrix { d: 3 }, Utility::Matrix { beta: 1.7 }),
    ];
    for (space, truth) in cases {
        let fit = fit_utility_representation(&Rule::general_mnl(truth.clone()), &space)?;
        let err = fit
            .utility
            .parameters()
            .iter()
            .zip(truth.parameters())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("{space}: recovered {:?}, max error {err:.1e}, condition {:.2}", fit.utility.parameters(), fit.condition_number);
    }

    match fit_utility_representation(&Rule::mnl(f64::INFINITY), &OutcomeSpace::RealScalar) {
        Err(e) => println!("mnl(+inf): {e}"),
        Ok(f) => println!("mnl(+inf): unexpected fit {:?}", f.utility),
    }
    Ok(())
}
