//! The identity tying any integer menu to the unit binary menu:
//! p_a * p0^n = p_a' * p1^n with n = o(a) - o(a').

use choicekit::axioms::cross_menu_identity_check;
use choicekit::{ActionId, Menu, Rule};

fn main() -> choicekit::Result<()> {
    let menu = Menu::scalar(&[("a1", -17.0), ("a2", -17.0), ("a3", 42.0)])?;
    let (a3, a2) = (ActionId::atom("a3")?, ActionId::atom("a2")?);
    for beta in [0.1, 1.0, -0.5] {
        let c = cross_menu_identity_check(&Rule::mnl(beta), &menu, &a3, &a2, 1e-9)?;
        println!("mnl({beta}): n = {}, log gap {:.2e}, holds {}", c.n, (c.lhs_log - c.rhs_log).abs(), c.holds);
    }

    let pair = Menu::scalar(&[("a", 0.0), ("b", 2.0)])?;
    let (a, b) = (ActionId::atom("a")?, ActionId::atom("b")?);
    let c = cross_menu_identity_check(&Rule::probit(), &pair, &b, &a, 1e-9)?;
    println!(
        "probit on {{0, 2}}: lhs {:.7} rhs {:.7}, holds {}",
        c.lhs_log.exp(),
        c.rhs_log.exp(),
        c.holds
    );
    Ok(())
}
