//! Seeded corpora on every outcome space, written to a temporary directory.

use choicekit::corpus::{write_corpus, CorpusSpec, OutcomeSampler};
use choicekit::OutcomeSpace;

fn main() -> choicekit::Result<()> {
    let spaces = [
        OutcomeSpace::RealScalar,
        OutcomeSpace::RealVector { d: 2 },
        OutcomeSpace::MeanStddev,
        OutcomeSpace::DiscreteDistribution { moment_order: 3 },
        OutcomeSpace::PrizeStream { alphabet: vec!["x".into(), "y".into()] },
        OutcomeSpace::Matrix { d: 2 },
    ];
    for space in spaces {
        let menus = CorpusSpec::new(space.clone(), 3, [2, 3], 42).generate()?;
        println!("{space}: first menu {}", menus[0].to_json());
    }

    let spec = CorpusSpec::new(OutcomeSpace::RealScalar, 5, [2, 4], 7)
        .with_sampler(OutcomeSampler { denominator: Some(3), range: [-2.0, 2.0], ..Default::default() });
    let dir = std::env::temp_dir().join("choicekit-corpus-example");
    for p in write_corpus(&spec.generate()?, &dir)? {
        println!("wrote {}", p.display());
    }
    println!("spec: {}", serde_json::to_string(&spec).unwrap());
    Ok(())
}
