//! Certifying that a perturbed logit rule is delta-close to logit, and that
//! the wrong logit parameter certifies a larger delta.

use choicekit::corpus::CorpusSpec;
use choicekit::extract::{certify_closeness, fit_closeness_utility, verify_certificate};
use choicekit::{power, Menu, OutcomeSpace, Rule, Utility};

fn main() -> choicekit::Result<()> {
    let mut corpus = CorpusSpec::new(OutcomeSpace::RealScalar, 10, [2, 5], 3).generate()?;
    corpus.push(power(&Menu::unit_binary(), 10)?);
    for delta0 in [0.01, 0.05, 0.2] {
        let rule = Rule::perturbed(Rule::mnl(1.5), delta0, 1);
        let fit = fit_closeness_utility(&rule, &corpus, &OutcomeSpace::RealScalar)?;
        let cert = certify_closeness(&rule, &corpus, &fit.utility)?;
        let err = verify_certificate(&cert, &rule, &corpus)?;
        println!(
            "delta0 {delta0}: fitted {:?}, certified delta {:.6}, reconstruction error {err:.1e}",
            fit.utility.parameters(),
            cert.delta
        );
    }

    let rule = Rule::perturbed(Rule::mnl(1.5), 0.05, 1);
    for beta in [1.5, 1.6] {
        let cert = certify_closeness(&rule, &corpus, &Utility::RealScalar { beta })?;
        println!("against beta = {beta}: delta {:.6}", cert.delta);
    }

    let probit = certify_closeness(&Rule::probit(), &corpus[..1], &Utility::RealScalar { beta: 1.6 })?;
    println!("probit against beta 1.6 on one menu: delta {:.6}", probit.delta);
    Ok(())
}
