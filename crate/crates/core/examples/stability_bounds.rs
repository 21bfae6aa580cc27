//! Closeness bounds from approximate neutrality and decomposability.

use choicekit::extract::{banach_bound, ulam_bound};

fn main() -> choicekit::Result<()> {
    println!("{:>8} {:>10} {:>12} {:>12}", "eps_d", "eps_n'", "delta", "10e+2e^2");
    for i in 0..=10 {
        let eps_d = i as f64 * 0.05;
        let b = ulam_bound(1.0, eps_d, |e| e)?;
        println!("{eps_d:>8.2} {:>10.4} {:>12.6} {:>12.6}", b.eps_neut_reduced, b.delta_ulam, banach_bound(eps_d));
    }
    let b = ulam_bound(0.01, 0.1, |e| 2.0 * e)?;
    println!("\nd(e) = 2e, eps_n 0.01, eps_d 0.1: delta {:.4} (banach {:.4})", b.delta_ulam, b.delta_banach);
    println!("negative input: {}", ulam_bound(-0.1, 0.0, |e| e).unwrap_err());
    Ok(())
}
