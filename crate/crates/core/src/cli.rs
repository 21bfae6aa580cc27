//! Command-line front end. [`run`] takes the argument list and returns the
//! exit code with everything that would be printed, so it can be driven from
//! tests without spawning a process.
//!
//! Exit codes: 0 pass, 1 axiom or threshold failure, 2 usage or input error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_integer::Integer;
use serde_json::{json, Value};

use crate::axioms::{self, fmt_real, Axiom, AxiomReport};
use crate::corpus::{write_corpus, CorpusSpec};
use crate::error::{Error, Result};
use crate::extract::{self, corpus_menu_id};
use crate::menu::{product, ActionId, Menu, MenuFile};
use crate::outcome::{Outcome, OutcomeSpace, Utility};
use crate::rules::{Rule, Shock, TabularRule};

/// Witnesses shown per axiom in text reports; JSON reports include all.
pub const TEXT_WITNESS_CAP: usize = 5;

/// Largest denominator tried when scaling rational outcomes to integers.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Parser, Debug)]
#[command(name = "choicekit", version, about = "Axiom checks and logit extraction for stochastic choice rules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check axioms of a rule over menu files or a generated corpus.
    Check(CheckArgs),
    /// Recover the additive utility behind a rule.
    Fit(FitArgs),
    /// Certify closeness of a rule to logit over a corpus.
    Certify(CertifyArgs),
    /// Reproduce the probit decomposability counterexample.
    DemoProbit(DemoArgs),
    /// Write a seeded random corpus to a directory.
    Gen(GenArgs),
    /// Estimate the diagonal-root limit rule on each menu.
    Upsilon(UpsilonArgs),
}

#[derive(Args, Debug)]
pub struct Source {
    /// Rule JSON file. Without it, menu files must carry observed probabilities.
    #[arg(long)]
    pub rule: Option<PathBuf>,
    /// Glob of menu JSON files.
    #[arg(long, conflicts_with = "corpus")]
    pub menus: Option<String>,
    /// Corpus definition JSON file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Overrides the corpus seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: Source,
    /// Comma-separated axioms: neutrality, decomposability, positivity,
    /// continuity, strong_neutrality, identity. Defaults to the first four.
    #[arg(long, value_delimiter = ',')]
    pub axioms: Option<Vec<String>>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub rule: PathBuf,
    /// Outcome space as JSON, a JSON file, or a bare kind such as `mean_stddev`.
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub source: Source,
    /// Utility JSON file, or `auto` to fit one.
    #[arg(long, default_value = "auto")]
    pub utility: String,
    /// Write the certificate JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit 1 when the certified delta exceeds this.
    #[arg(long)]
    pub max_delta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    /// `gaussian` or `gumbel`.
    #[arg(long, default_value = "gaussian")]
    pub shock: String,
    /// Shock scale: sigma for gaussian, beta for gumbel.
    #[arg(long, default_value_t = 1.0)]
    pub param: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct UpsilonArgs {
    #[command(flatten)]
    pub source: Source,
    /// Power used for the estimate. Defaults to the largest n <= 12 within
    /// the size guard.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Measured decomposability epsilon, used to report the error envelope.
    #[arg(long)]
    pub eps_decomp: Option<f64>,
    /// Report every n up to n_max.
    #[arg(long)]
    pub sequence: bool,
}

/// What a command printed and how it exited.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn ok(code: i32, stdout: String) -> CliOutput {
        CliOutput { code, stdout, stderr: String::new() }
    }
}

/// Exit code for an error: 2 for bad input, 1 for a rule that fails a
/// precondition of the requested computation.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotPositiveAtProbe
        | Error::NonPositiveProbability { .. }
        | Error::SingularProbe(_)
        | Error::NoCompensation
        | Error::IllConditioned(_)
        | Error::Quadrature(_)
        | Error::NotEquivalent => 1,
        _ => 2,
    }
}

pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                CliOutput::ok(0, text)
            } else {
                CliOutput { code: 2, stdout: String::new(), stderr: text }
            };
        }
    };
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Certify(a) => cmd_certify(a),
        Command::DemoProbit(a) => cmd_demo_probit(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Upsilon(a) => cmd_upsilon(a),
    };
    result.unwrap_or_else(|e| CliOutput { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") })
}

struct Named {
    name: String,
    file: MenuFile,
}

fn load_menus(src: &Source) -> Result<Vec<Named>> {
    match (&src.menus, &src.corpus) {
        (Some(pattern), None) => {
            let mut paths: Vec<PathBuf> = glob::glob(pattern)
                .map_err(|e| Error::InvalidCorpus(format!("bad glob {pattern:?}: {e}")))?
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Io(e.into()))?;
            paths.sort();
            if paths.is_empty() {
                return Err(Error::InvalidCorpus(format!("no menu files match {pattern:?}")));
            }
            paths
                .iter()
                .map(|p| {
                    let file = MenuFile::from_path(p)
                        .map_err(|e| Error::InvalidCorpus(format!("{}: {e}", p.display())))?;
                    let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    Ok(Named { name, file })
                })
                .collect()
        }
        (None, Some(path)) => {
            let mut spec = CorpusSpec::from_path(path)?;
            if let Some(seed) = src.seed {
                spec.seed = seed;
            }
            Ok(spec
                .generate()?
                .into_iter()
                .enumerate()
                .map(|(i, menu)| Named { name: corpus_menu_id(i), file: MenuFile { menu, observed: None } })
                .collect())
        }
        _ => Err(Error::InvalidCorpus("give exactly one of --menus or --corpus".into())),
    }
}

fn load_rule(src: &Source, menus: &[Named]) -> Result<Rule> {
    let rule = match &src.rule {
        Some(path) => Rule::from_path(path)?,
        None => {
            let mut table = TabularRule::new(Rule::Uniform);
            for m in menus {
                let observed = m.file.observed.clone().ok_or_else(|| {
                    Error::InvalidRule(format!("no --rule given and {} has no probabilities", m.name))
                })?;
                table.insert(m.file.menu.clone(), observed)?;
            }
            Rule::Tabular(table)
        }
    };
    for m in menus {
        rule.check_space(m.file.menu.space())?;
    }
    Ok(rule)
}

fn rule_label(src: &Source) -> String {
    match &src.rule {
        Some(p) => p.display().to_string(),
        None => "observed probabilities".into(),
    }
}

/// Smallest `q <= MAX_DENOMINATOR` with `x·q` integral, by continued fractions.
pub fn rational_denominator(x: f64) -> Option<u64> {
    if !x.is_finite() {
        return None;
    }
    let tol = 8.0 * f64::EPSILON * x.abs().max(1.0);
    let (mut h0, mut h1) = (0.0f64, 1.0f64);
    let (mut k0, mut k1) = (1.0f64, 0.0f64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > MAX_DENOMINATOR as f64 {
            return None;
        }
        if (x - h2 / k2).abs() <= tol {
            return Some(k2 as u64);
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// lcm of the denominators of every scalar outcome in `menus`.
pub fn common_denominator<'a>(menus: impl IntoIterator<Item = &'a Menu>) -> Result<u64> {
    let mut k: u64 = 1;
    for m in menus {
        let xs = m
            .scalars()
            .ok_or_else(|| Error::UnsupportedSpace(format!("integer scaling on {}", m.space())))?;
        for x in xs {
            let q = rational_denominator(x)
                .ok_or_else(|| Error::NonInteger(format!("{x} has no denominator <= {MAX_DENOMINATOR}")))?;
            k = k.lcm(&q);
            if k > MAX_DENOMINATOR {
                return Err(Error::NonInteger(format!("common denominator exceeds {MAX_DENOMINATOR}")));
            }
        }
    }
    Ok(k)
}

fn scale_menu(m: &Menu, k: u64) -> Result<Menu> {
    m.map_outcomes(|o| match o {
        Outcome::Scalar(x) => Ok(Outcome::Scalar((x * k as f64).round())),
        _ => Err(Error::UnsupportedSpace("integer scaling".into())),
    })
}

fn primed(a: &ActionId) -> ActionId {
    match a.as_pair() {
        Some((l, r)) => ActionId::pair(&primed(l), &primed(r)),
        None => ActionId::atom(format!("{}'", a.as_atom().unwrap())).unwrap(),
    }
}

const DEFAULT_AXIOMS: [Axiom; 4] = [Axiom::Neutrality, Axiom::Decomposability, Axiom::Positivity, Axiom::Continuity];

fn continuity_applies(space: &OutcomeSpace) -> bool {
    matches!(space, OutcomeSpace::RealScalar | OutcomeSpace::RealVector { .. })
}

fn cmd_check(args: &CheckArgs) -> Result<CliOutput> {
    if !(args.tol >= 0.0) {
        return Err(Error::NegativeInput(format!("tol = {}", args.tol)));
    }
    let menus = load_menus(&args.source)?;
    let rule = load_rule(&args.source, &menus)?;
    let explicit = args.axioms.is_some();
    let requested: Vec<Axiom> = match &args.axioms {
        Some(list) => list
            .iter()
            .map(|s| Axiom::parse(s.trim()).ok_or_else(|| Error::InvalidRule(format!("unknown axiom {s:?}"))))
            .collect::<Result<_>>()?,
        None => DEFAULT_AXIOMS.to_vec(),
    };
    let tol = args.tol;
    let mut reports = Vec::new();
    let mut notes = Vec::new();
    let mut scaling = None;
    for &axiom in &requested {
        let mut parts = Vec::new();
        match axiom {
            Axiom::Neutrality => {
                for m in &menus {
                    parts.push(axioms::neutrality_epsilon(&rule, &m.file.menu, tol)?.with_menus(&[&m.name]));
                }
            }
            Axiom::Positivity => {
                for m in &menus {
                    parts.push(axioms::positivity_check(&rule, &m.file.menu)?.with_menus(&[&m.name]));
                }
            }
            Axiom::Decomposability => {
                let n = menus.len();
                for i in 0..n {
                    let mut partners = vec![i];
                    if n > 1 {
                        partners.push((i + 1) % n);
                    }
                    for j in partners {
                        let (a, b) = (&menus[i], &menus[j]);
                        let r = axioms::decomposability_epsilon(&rule, &a.file.menu, &b.file.menu, tol)?;
                        parts.push(r.with_menus(&[&a.name, &b.name]));
                    }
                }
            }
            Axiom::Continuity => {
                for m in &menus {
                    let menu = &m.file.menu;
                    if !continuity_applies(menu.space()) {
                        if explicit {
                            return Err(Error::UnsupportedSpace(format!("continuity probe on {}", menu.space())));
                        }
                        continue;
                    }
                    for a in menu.actions() {
                        let r = axioms::continuity_probe(&rule, menu, a, &axioms::DEFAULT_CONTINUITY_STEPS)?;
                        parts.push(r.with_menus(&[&m.name]));
                    }
                }
                if parts.is_empty() {
                    notes.push("continuity: not probed on this outcome space".to_string());
                    continue;
                }
            }
            Axiom::StrongNeutrality => {
                for m in &menus {
                    let twin = m.file.menu.relabel(primed)?;
                    let r = axioms::strong_neutrality_epsilon(&rule, &m.file.menu, &twin, tol, None)?;
                    parts.push(r.with_menus(&[&m.name, &format!("{}'", m.name)]));
                }
            }
            Axiom::CrossMenuIdentity => {
                let k = common_denominator(menus.iter().map(|m| &m.file.menu))?;
                let scaled_rule = if k == 1 { rule.clone() } else { Rule::rescaled(rule.clone(), 1.0 / k as f64) };
                for m in &menus {
                    let scaled = scale_menu(&m.file.menu, k)?;
                    parts.push(axioms::cross_menu_identity_epsilon(&scaled_rule, &scaled, tol)?.with_menus(&[&m.name]));
                }
                scaling = Some(k);
            }
        }
        reports.push(AxiomReport::merge(axiom, parts));
    }
    let passed = reports.iter().all(|r| r.satisfied_at_tol);
    let code = if passed { 0 } else { 1 };
    let text = if args.source.json {
        let mut doc = json!({
            "rule": rule_label(&args.source),
            "menus": menus.len(),
            "tol": tol,
            "passed": passed,
            "axioms": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        });
        if let Some(k) = scaling {
            doc["integer_scaling"] = json!(k);
        }
        if !notes.is_empty() {
            doc["notes"] = json!(notes);
        }
        pretty(&doc)
    } else {
        let mut s = String::new();
        writeln!(s, "rule: {}", rule_label(&args.source)).unwrap();
        writeln!(s, "menus: {}  tol: {tol:e}", menus.len()).unwrap();
        if let Some(k) = scaling {
            writeln!(s, "integer scaling: k = {k}").unwrap();
        }
        for r in &reports {
            writeln!(
                s,
                "{:<20} {}  epsilon {}  ({} instances)",
                r.axiom.name(),
                if r.satisfied_at_tol { "PASS" } else { "FAIL" },
                fmt_real(r.min_epsilon),
                r.instances_checked
            )
            .unwrap();
            let all: Vec<_> = r.witness.iter().chain(&r.other_witnesses).collect();
            for w in all.iter().take(TEXT_WITNESS_CAP) {
                writeln!(s, "    witness {w}").unwrap();
            }
            if all.len() > TEXT_WITNESS_CAP {
                writeln!(s, "    ... {} more", all.len() - TEXT_WITNESS_CAP).unwrap();
            }
        }
        for n in &notes {
            writeln!(s, "note: {n}").unwrap();
        }
        writeln!(s, "{}", if passed { "all axioms hold" } else { "axiom violations found" }).unwrap();
        s
    };
    Ok(CliOutput::ok(code, text))
}

fn parse_space(s: &str) -> Result<OutcomeSpace> {
    let value: Value = match serde_json::from_str(s) {
        Ok(v) => v,
        Err(_) if Path::new(s).is_file() => serde_json::from_str(&std::fs::read_to_string(s)?)?,
        Err(_) => json!({ "kind": s }),
    };
    let space: OutcomeSpace = serde_json::from_value(value)?;
    space.validate()?;
    Ok(space)
}

/// Outcome space a rule is naturally read on, when it determines one.
pub fn default_space(rule: &Rule) -> Option<OutcomeSpace> {
    match rule {
        Rule::GeneralMnl { utility } => match utility {
            Utility::RealScalar { .. } => Some(OutcomeSpace::RealScalar),
            Utility::RealVector { weights } => Some(OutcomeSpace::RealVector { d: weights.len() }),
            Utility::MeanStddev { .. } => Some(OutcomeSpace::MeanStddev),
            Utility::DiscreteDistribution { gammas } => {
                Some(OutcomeSpace::DiscreteDistribution { moment_order: gammas.len() })
            }
            Utility::PrizeStream { weights } => {
                Some(OutcomeSpace::PrizeStream { alphabet: weights.keys().cloned().collect() })
            }
            Utility::Matrix { .. } => None,
        },
        Rule::Perturbed { base, .. } | Rule::Rescaled { base, .. } => default_space(base),
        _ => Some(OutcomeSpace::RealScalar),
    }
}

/// `(name, value)` for each parameter of a utility.
pub fn named_parameters(u: &Utility) -> Vec<(String, f64)> {
    match u {
        Utility::RealScalar { beta } | Utility::Matrix { beta } => vec![("beta".into(), *beta)],
        Utility::RealVector { weights } => {
            weights.iter().enumerate().map(|(i, w)| (format!("w{}", i + 1), *w)).collect()
        }
        Utility::MeanStddev { gamma1, gamma2 } => vec![("gamma1".into(), *gamma1), ("gamma2".into(), *gamma2)],
        Utility::DiscreteDistribution { gammas } => {
            gammas.iter().enumerate().map(|(i, g)| (format!("gamma{}", i + 1), *g)).collect()
        }
        Utility::PrizeStream { weights } => weights.iter().map(|(p, w)| (format!("w({p})"), *w)).collect(),
    }
}

/// Rounds away float noise for display: values within 1e-9 of a
/// 9-significant-digit decimal print as that decimal.
fn display_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let short: f64 = format!("{x:.8e}").parse().unwrap();
    if (short - x).abs() <= 1e-9 * x.abs().max(1.0) {
        format!("{short}")
    } else {
        format!("{x}")
    }
}

fn cmd_fit(args: &FitArgs) -> Result<CliOutput> {
    let rule = Rule::from_path(&args.rule)?;
    let space = match &args.space {
        Some(s) => parse_space(s)?,
        None => default_space(&rule)
            .ok_or_else(|| Error::InvalidRule("cannot infer the outcome space; pass --space".into()))?,
    };
    rule.check_space(&space)?;
    let fit = extract::fit_utility_representation(&rule, &space)?;
    let text = if args.json {
        pretty(&json!({
            "space": space,
            "utility": fit.utility,
            "condition_number": fit.condition_number,
        }))
    } else {
        let mut s = format!("space: {space}\n");
        for (name, v) in named_parameters(&fit.utility) {
            writeln!(s, "{name} = {}", display_number(v)).unwrap();
        }
        writeln!(s, "probe condition number: {}", display_number(fit.condition_number)).unwrap();
        s
    };
    Ok(CliOutput::ok(0, text))
}

fn cmd_certify(args: &CertifyArgs) -> Result<CliOutput> {
    let menus = load_menus(&args.source)?;
    let rule = load_rule(&args.source, &menus)?;
    let corpus: Vec<Menu> = menus.iter().map(|m| m.file.menu.clone()).collect();
    let space = corpus[0].space().clone();
    if let Some(m) = corpus.iter().find(|m| m.space() != &space) {
        return Err(Error::IncompatibleSpaces(format!("{} and {} menus in one corpus", space, m.space())));
    }
    let utility = if args.utility == "auto" {
        extract::fit_closeness_utility(&rule, &corpus, &space)?.utility
    } else {
        let u: Utility = serde_json::from_str(&std::fs::read_to_string(&args.utility)?)?;
        if !u.fits(&space) {
            return Err(Error::IncompatibleSpaces(format!("{} utility on {space} menus", u.kind_name())));
        }
        u
    };
    let names: Vec<&str> = menus.iter().map(|m| m.name.as_str()).collect();
    let cert = extract::certify_closeness(&rule, &corpus, &utility)?.with_menu_ids(&names);
    let doc = cert.to_json();
    if let Some(out) = &args.out {
        std::fs::write(out, pretty(&doc))?;
    }
    let failed = args.max_delta.is_some_and(|m| !(cert.delta <= m));
    let text = if args.source.json {
        pretty(&doc)
    } else {
        let mut s = String::new();
        writeln!(s, "rule: {}", rule_label(&args.source)).unwrap();
        write!(s, "utility ({}):", utility.kind_name()).unwrap();
        for (name, v) in named_parameters(&utility) {
            write!(s, " {name} = {v}").unwrap();
        }
        writeln!(s).unwrap();
        writeln!(s, "menus: {}", cert.corpus_size).unwrap();
        writeln!(s, "delta: {}", fmt_real(cert.delta)).unwrap();
        let mut worst: Vec<_> = cert.menus.iter().collect();
        worst.sort_by(|a, b| b.delta.total_cmp(&a.delta).then_with(|| a.menu_id.cmp(&b.menu_id)));
        for m in worst.iter().take(TEXT_WITNESS_CAP) {
            writeln!(s, "    {}  delta {}", m.menu_id, fmt_real(m.delta)).unwrap();
        }
        if let Some(out) = &args.out {
            writeln!(s, "certificate written to {}", out.display()).unwrap();
        }
        if let Some(m) = args.max_delta {
            writeln!(s, "{} max delta {m}", if failed { "exceeds" } else { "within" }).unwrap();
        }
        s
    };
    Ok(CliOutput::ok(if failed { 1 } else { 0 }, text))
}

/// The three probabilities behind the probit counterexample.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ProbitDemo {
    /// `p(b1)` on the unit binary menu.
    pub binary: f64,
    /// `p((b1,b1))` on its square.
    pub square: f64,
    /// `p(b1)²`, the value decomposability would force.
    pub product: f64,
    /// `square − product`.
    pub margin: f64,
}

/// Evaluates the counterexample for the IARU rule with `shock`.
pub fn probit_demo(shock: Shock) -> Result<ProbitDemo> {
    let rule = Rule::iaru(shock);
    let unit = Menu::unit_binary();
    let square = product(&unit, &unit)?;
    let binary = rule.choose(&unit)?.prob(1);
    let sq = rule.choose(&square)?.prob(3);
    let prod = binary * binary;
    Ok(ProbitDemo { binary, square: sq, product: prod, margin: sq - prod })
}

fn cmd_demo_probit(args: &DemoArgs) -> Result<CliOutput> {
    let shock = match args.shock.as_str() {
        "gaussian" => Shock::Gaussian { sigma: args.param },
        "gumbel" => Shock::Gumbel { beta: args.param },
        other => return Err(Error::InvalidRule(format!("unknown shock {other:?}"))),
    };
    shock.validate()?;
    let demo = probit_demo(shock)?;
    let text = if args.json {
        pretty(&json!({ "shock": args.shock, "param": args.param, "result": demo }))
    } else {
        format!(
            "shock: {} ({})\n\
             p(b1) on the unit binary menu      {:.6}\n\
             p((b1,b1)) on its square           {:.6}\n\
             p(b1)^2                            {:.6}\n\
             violation margin                   {:.6}\n",
            args.shock, args.param, demo.binary, demo.square, demo.product, demo.margin
        )
    };
    Ok(CliOutput::ok(0, text))
}

fn cmd_gen(args: &GenArgs) -> Result<CliOutput> {
    let mut spec = CorpusSpec::from_path(&args.corpus)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let menus = spec.generate()?;
    let paths = write_corpus(&menus, &args.out)?;
    Ok(CliOutput::ok(0, format!("wrote {} menus to {}\n", paths.len(), args.out.display())))
}

/// Largest `n <= 12` with `k^n` inside the size guard.
pub fn default_n_max(k: usize) -> usize {
    (1..=12)
        .take_while(|&n| (k as u128).checked_pow(n as u32).is_some_and(|s| s <= extract::UPSILON_MAX_ACTIONS))
        .last()
        .unwrap_or(1)
}

fn cmd_upsilon(args: &UpsilonArgs) -> Result<CliOutput> {
    let menus = load_menus(&args.source)?;
    let rule = load_rule(&args.source, &menus)?;
    let mut docs = Vec::new();
    let mut s = String::new();
    for m in &menus {
        let menu = &m.file.menu;
        let n = args.n_max.unwrap_or_else(|| default_n_max(menu.len()));
        let estimates = if args.sequence {
            extract::upsilon_sequence(&rule, menu, n, args.eps_decomp)?
        } else {
            vec![extract::upsilon(&rule, menu, n, args.eps_decomp)?]
        };
        let base = rule.choose(menu)?;
        writeln!(s, "{}:", m.name).unwrap();
        writeln!(s, "    rule   n=1   {}", fmt_probs(base.probs())).unwrap();
        let mut seq = Vec::new();
        for e in &estimates {
            write!(s, "    upsilon n={:<3} {}", e.n_used, fmt_probs(e.distribution.probs())).unwrap();
            if let Some(b) = e.bound {
                write!(s, "  envelope {}", fmt_real(b)).unwrap();
            }
            writeln!(s).unwrap();
            seq.push(json!({
                "n": e.n_used,
                "probabilities": e.distribution.to_json(),
                "bound": e.bound,
            }));
        }
        docs.push(json!({ "menu_id": m.name, "rule": base.to_json(), "upsilon": seq }));
    }
    let text = if args.source.json { pretty(&json!({ "menus": docs })) } else { s };
    Ok(CliOutput::ok(0, text))
}

fn fmt_probs(p: &[f64]) -> String {
    p.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}
