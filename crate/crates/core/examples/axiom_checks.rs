//! Measuring approximate neutrality, decomposability, positivity and
//! continuity for several rules on a random corpus.

use choicekit::axioms::{self, AxiomReport, Axiom};
use choicekit::corpus::{CorpusSpec, OutcomeSampler};
use choicekit::{OutcomeSpace, Rule};

fn main() -> choicekit::Result<()> {
    let sampler = OutcomeSampler { integer: true, duplicate_prob: 0.3, ..Default::default() };
    let menus = CorpusSpec::new(OutcomeSpace::RealScalar, 12, [2, 4], 5).with_sampler(sampler).generate()?;
    let rules = [
        ("mnl(1)", Rule::mnl(1.0)),
        ("mnl(+inf)", Rule::mnl(f64::INFINITY)),
        ("probit", Rule::probit()),
        ("perturbed(mnl(1), 0.1)", Rule::perturbed(Rule::mnl(1.0), 0.1, 2)),
    ];
    for (name, rule) in &rules {
        let neut = AxiomReport::merge(
            Axiom::Neutrality,
            menus.iter().map(|m| axioms::neutrality_epsilon(rule, m, 1e-9)).collect::<Result<Vec<_>, _>>()?,
        );
        let decomp = AxiomReport::merge(
            Axiom::Decomposability,
            menus
                .windows(2)
                .map(|w| axioms::decomposability_epsilon(rule, &w[0], &w[1], 1e-9))
                .collect::<Result<Vec<_>, _>>()?,
        );
        let pos = AxiomReport::merge(
            Axiom::Positivity,
            menus.iter().map(|m| axioms::positivity_check(rule, m)).collect::<Result<Vec<_>, _>>()?,
        );
        let cont = AxiomReport::merge(
            Axiom::Continuity,
            menus
                .iter()
                .map(|m| axioms::continuity_probe(rule, m, &m.actions()[0], &axioms::DEFAULT_CONTINUITY_STEPS))
                .collect::<Result<Vec<_>, _>>()?,
        );
        println!("{name}");
        for r in [neut, decomp, pos, cont] {
            println!(
                "  {:<16} eps {:<12.4e} {}",
                r.axiom.name(),
                r.min_epsilon,
                if r.satisfied_at_tol { "ok" } else { "violated" }
            );
        }
    }
    Ok(())
}
