//! Additive Gumbel shocks reproduce multinomial logit exactly; Gaussian
//! shocks do not.

use choicekit::corpus::CorpusSpec;
use choicekit::rules::compare_gumbel_iaru_with_mnl;
use choicekit::{OutcomeSpace, Rule};

fn main() -> choicekit::Result<()> {
    let menus = CorpusSpec::new(OutcomeSpace::RealScalar, 20, [2, 6], 11).generate()?;
    for beta in [0.5, 1.0, 2.0] {
        let r = compare_gumbel_iaru_with_mnl(beta, beta, &menus, 1e-6)?;
        println!("gumbel({beta}) vs mnl({beta}): matches={} max gap {:.2e}", r.matches, r.max_deviation);
    }
    let r = compare_gumbel_iaru_with_mnl(1.0, 1.5, &menus, 1e-6)?;
    println!("gumbel(1) vs mnl(1.5): matches={} max gap {:.2e}", r.matches, r.max_deviation);

    let mut gap: f64 = 0.0;
    for m in &menus {
        let (p, q) = (Rule::probit().choose(m)?, Rule::mnl(1.6).choose(m)?);
        gap = p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).fold(gap, f64::max);
    }
    println!("probit vs mnl(1.6): max gap {gap:.2e}");
    Ok(())
}
