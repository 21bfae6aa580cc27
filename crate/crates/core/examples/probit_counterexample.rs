//! Probit violates decomposability: the square of the unit binary menu puts
//! more mass on (b1,b1) than the product of the component probabilities.

use choicekit::cli::probit_demo;
use choicekit::{axioms, product, Menu, Rule, Shock};

fn main() -> choicekit::Result<()> {
    for (label, shock) in [
        ("gaussian sigma=1", Shock::Gaussian { sigma: 1.0 }),
        ("gaussian sigma=10", Shock::Gaussian { sigma: 10.0 }),
        ("gumbel beta=1", Shock::Gumbel { beta: 1.0 }),
    ] {
        let d = probit_demo(shock)?;
        println!(
            "{label:<18} p(b1) {:.6}  p((b1,b1)) {:.6}  p(b1)^2 {:.6}  margin {:+.3e}",
            d.binary, d.square, d.product, d.margin
        );
    }

    let unit = Menu::unit_binary();
    let report = axioms::decomposability_epsilon(&Rule::probit(), &unit, &unit, 1e-9)?;
    println!("\nfull decomposability report on the square:");
    println!("{}", serde_json::to_string_pretty(&report.to_json()).unwrap());

    let square = product(&unit, &unit)?;
    let p = Rule::probit().choose(&square)?;
    for (a, q) in p.actions().iter().zip(p.probs()) {
        println!("{a:<8} {q:.6}");
    }
    Ok(())
}
