//! The diagonal-root limit rule: exact for logit, drifting toward the
//! argmax for probit, and inside the error envelope for perturbed logit.

use choicekit::axioms::decomposability_epsilon;
use choicekit::extract::{upsilon, upsilon_sequence};
use choicekit::{power, Menu, Rule};

fn main() -> choicekit::Result<()> {
    let menu = Menu::scalar(&[("a", 0.0), ("b", 0.7), ("c", -0.4)])?;
    let u = upsilon(&Rule::mnl(1.0), &menu, 8, None)?;
    println!("mnl(1): rule {:?}", Rule::mnl(1.0).choose(&menu)?.probs());
    println!("        Y(8) {:?}", u.distribution.probs());

    println!("\nprobit on the unit binary menu:");
    for e in upsilon_sequence(&Rule::probit(), &Menu::unit_binary(), 12, None)? {
        println!("  n={:<2} p(b1) = {:.6}", e.n_used, e.distribution.prob(1));
    }

    let rule = Rule::perturbed(Rule::mnl(1.0), 0.05, 4);
    let n = 8;
    let mut eps: f64 = 0.0;
    for i in 1..=4 {
        for j in 1..=4 {
            if i + j <= n {
                let r = decomposability_epsilon(&rule, &power(&Menu::unit_binary(), i)?, &power(&Menu::unit_binary(), j)?, 0.0)?;
                eps = eps.max(r.min_epsilon);
            }
        }
    }
    let e = upsilon(&rule, &Menu::unit_binary(), n, Some(eps))?;
    let mnl = Rule::mnl(1.0).choose(&Menu::unit_binary())?;
    let gap = (e.distribution.prob(1) / mnl.prob(1)).ln().abs();
    println!("\nperturbed: measured eps_decomp {eps:.4}, |log gap| {gap:.2e}, envelope {:.4}", e.bound.unwrap());
    Ok(())
}
