//! The `sheaf` command-line front end.
//!
//! Every subcommand builds a [`Report`] and an outcome. Exit status is 0
//! when the run succeeded (and any verification passed), 1 when a
//! verification failed, and 2 on bad input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use thiserror::Error;

use crate::fixtures;
use crate::forcing::{forces_at, truth_value, truth_value_pointwise, Environment, ForcingError};
use crate::gen;
use crate::generic::{check_generic, collapse, fundamental_check, subformula_closure, OpenFilter};
use crate::logic::{goedel, parse_formula, parse_formula_infer, Formula, LogicError, Signature};
use crate::sheaf::{load_sheaf, SheafError, SheafOfStructures};
use crate::site::{Site, SiteError};
use crate::vsets::{
    axiom_check, build_hierarchy, chi_check, extends, no_surjection_check, omega_classifier,
    separating_extension, Axiom, Condition, Universe, VSetError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
    #[error(transparent)]
    VSet(#[from] VSetError),
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human-readable text.
    #[default]
    Plain,
    /// One `key<TAB>value` pair per line.
    Lines,
}

#[derive(Debug, Parser)]
#[command(
    name = "sheaf",
    version,
    about = "Forcing over sheaves of structures on finite sites"
)]
pub struct Cli {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
    /// Seed for randomized formula and condition generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Input {
    /// Sheaf file.
    #[arg(long, global = true, conflicts_with_all = ["site", "fixture"])]
    pub sheaf: Option<PathBuf>,
    /// Site file, for the commands that need only a site.
    #[arg(long, global = true, conflicts_with = "fixture")]
    pub site: Option<PathBuf>,
    /// Built-in example: p1, p2, pv, cycle, s1, s2, sv, sv_glue, se, sf, sc.
    #[arg(long, global = true)]
    pub fixture: Option<String>,
}

#[derive(Debug, Args)]
pub struct Bindings {
    /// Extra variable bound to a principal section, as `x=node:element`.
    #[arg(long = "section", value_name = "VAR=NODE:ELEM")]
    pub sections: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the sheaf invariants.
    Validate,
    /// Point forcing at one node.
    Force {
        #[arg(long)]
        at: String,
        formula: String,
        #[command(flatten)]
        bind: Bindings,
    },
    /// Set of nodes forcing the formula.
    Truthset {
        formula: String,
        #[command(flatten)]
        bind: Bindings,
    },
    /// Truth value computed with the Heyting operations.
    Truthval {
        formula: String,
        #[command(flatten)]
        bind: Bindings,
    },
    /// Goedel-Gentzen translation.
    Goedel { formula: String },
    /// Collapse along the point filter of a node.
    Collapse {
        #[arg(long)]
        point: String,
        /// Check genericity and the collapse/forcing correspondence.
        #[arg(long)]
        check_fundamental: bool,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Random formulas with one free variable added to the exhaustive closed ones.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Cumulative hierarchy of variable sets.
    Hierarchy {
        #[arg(long)]
        alpha: usize,
        /// Print only the size at each node.
        #[arg(long)]
        counts: bool,
    },
    /// Truth values at a node.
    Classifier {
        #[arg(long)]
        node: String,
    },
    /// Characteristic functions and the no-surjection count.
    ChiCheck {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        node: String,
    },
    /// Separate random pairs of rows one step at a time.
    CohenDemo {
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        rows: usize,
    },
    /// Set-theoretic axioms over a level of the hierarchy.
    Axioms {
        #[arg(long)]
        alpha: usize,
        /// One axiom by name; all of them when omitted.
        #[arg(long)]
        axiom: Option<String>,
    },
}

/// Text written for one run in both output formats.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub plain: String,
    pub lines: Vec<(String, String)>,
}

impl Report {
    fn say(&mut self, line: impl AsRef<str>) {
        self.plain.push_str(line.as_ref());
        self.plain.push('\n');
    }

    fn kv(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Plain => self.plain.clone(),
            Format::Lines => self.lines.iter().fold(String::new(), |mut out, (k, v)| {
                let _ = writeln!(out, "{k}\t{v}");
                out
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub report: Report,
    pub verified: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.verified {
            0
        } else {
            1
        }
    }
}

fn sheaf_fixture(name: &str) -> Option<SheafOfStructures> {
    Some(match name {
        "s1" => fixtures::s1(),
        "s2" => fixtures::s2(),
        "sv" => fixtures::sv(),
        "sv_glue" => fixtures::sv_glue(),
        "se" => fixtures::se(),
        "sf" => fixtures::sf(),
        "sc" => fixtures::sc(),
        _ => return None,
    })
}

fn site_fixture(name: &str) -> Option<Site> {
    Some(match name {
        "p1" => fixtures::p1(),
        "p2" => fixtures::p2(),
        "pv" => fixtures::pv(),
        "cycle" => fixtures::cycle(),
        _ => return None,
    })
}

impl Input {
    /// The sheaf named by the input flags; fixture `s2` when none is given.
    pub fn load_sheaf(&self) -> Result<SheafOfStructures, CliError> {
        if let Some(path) = &self.sheaf {
            return Ok(load_sheaf(path)?);
        }
        if self.site.is_some() {
            return Err(CliError::Usage(
                "this command needs a sheaf, not a site".into(),
            ));
        }
        let name = self.fixture.as_deref().unwrap_or("s2");
        sheaf_fixture(name)
            .ok_or_else(|| CliError::Usage(format!("no sheaf fixture named `{name}`")))
    }

    /// The site named by the input flags; fixture `p2` when none is given.
    pub fn load_site(&self) -> Result<Site, CliError> {
        if let Some(path) = &self.site {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            return Ok(Site::parse(&text)?);
        }
        if self.sheaf.is_some() {
            return Ok(self.load_sheaf()?.site().clone());
        }
        let name = self.fixture.as_deref().unwrap_or("p2");
        if let Some(site) = site_fixture(name) {
            return Ok(site);
        }
        sheaf_fixture(name)
            .map(|s| s.site().clone())
            .ok_or_else(|| CliError::Usage(format!("no fixture named `{name}`")))
    }
}

/// Parses the formula against the sheaf and binds its free variables:
/// section names from the sheaf first, then `--section` flags.
fn prepare(
    s: &SheafOfStructures,
    text: &str,
    bind: &Bindings,
) -> Result<(Formula, Environment), CliError> {
    let phi = parse_formula(text, &s.signature())?;
    let mut env = Environment::named(s, phi.free_vars());
    for binding in &bind.sections {
        let (var, rest) = binding
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("`{binding}` is not VAR=NODE:ELEM")))?;
        let (node, elem) = rest
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("`{binding}` is not VAR=NODE:ELEM")))?;
        let x = s.site().node(node)?;
        let a = s.element(x, elem)?;
        env.bind(var, s.principal_section(x, a)?);
    }
    Ok((phi, env))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut r = Report::default();
    let mut verified = true;
    match &cli.command {
        Command::Validate => {
            let s = cli.input.load_sheaf()?;
            let violations = s.validate();
            if violations.is_empty() {
                r.say("valid");
            }
            for v in &violations {
                r.say(v.to_string());
                r.kv("violation", v);
            }
            r.kv("valid", violations.is_empty());
            verified = violations.is_empty();
        }
        Command::Force { at, formula, bind } => {
            let s = cli.input.load_sheaf()?;
            let (phi, env) = prepare(&s, formula, bind)?;
            let x = s.site().node(at)?;
            let forced = forces_at(&s, x, &phi, &env)?;
            r.say(if forced { "forced" } else { "not forced" });
            r.kv("node", at);
            r.kv("formula", &phi);
            r.kv("forced", forced);
        }
        Command::Truthset { formula, bind } | Command::Truthval { formula, bind } => {
            let s = cli.input.load_sheaf()?;
            let (phi, env) = prepare(&s, formula, bind)?;
            let u = env.domain();
            let v = if matches!(cli.command, Command::Truthset { .. }) {
                truth_value_pointwise(&s, u, &phi, &env)?
            } else {
                truth_value(&s, u, &phi, &env)?
            };
            let shown = s.site().show(v);
            r.say(&shown);
            r.kv("domain", s.site().show(u));
            r.kv("formula", &phi);
            r.kv("value", shown);
        }
        Command::Goedel { formula } => {
            let phi = match &cli
                .input
                .sheaf
                .is_some()
                .then(|| cli.input.load_sheaf())
                .transpose()?
            {
                Some(s) => parse_formula(formula, &s.signature())?,
                None => parse_formula_infer(formula, &mut Signature::new())?,
            };
            let g = goedel(&phi);
            r.say(g.to_string());
            r.kv("formula", &phi);
            r.kv("goedel", g);
        }
        Command::Collapse {
            point,
            check_fundamental,
            depth,
            samples,
        } => {
            let s = cli.input.load_sheaf()?;
            let site = s.site();
            let x = site.node(point)?;
            let filter = OpenFilter::point_filter(site, x)?;
            let model = collapse(&s, &filter)?;
            r.say(format!("minimum: {}", site.show(model.minimum)));
            r.plain.push_str(&model.structure.to_string());
            r.kv("minimum", site.show(model.minimum));
            r.kv("carrier", model.structure.len());
            for (i, sec) in model.carrier.iter().enumerate() {
                r.kv(
                    format!("element.{}", model.structure.label(i)),
                    s.show_section(sec),
                );
            }
            if *check_fundamental {
                let sig = s.signature();
                let mut formulas = gen::all_formulas(&sig, *depth, &[]);
                let mut rng = gen::rng(cli.seed);
                let free = ["x".to_string()];
                for _ in 0..*samples {
                    let d = rng.gen_range(0..=*depth);
                    formulas.push(gen::random_formula(&mut rng, &sig, d, &free));
                }
                let formulas = subformula_closure(&formulas);
                let generic = check_generic(&s, &filter, &formulas)?;
                let fundamental = fundamental_check(&s, &filter, &formulas)?;
                r.say(format!("formulas: {}", formulas.len()));
                r.say(format!(
                    "generic: {} ({} checked, {} failures)",
                    generic.is_generic(),
                    generic.checked,
                    generic.failures.len()
                ));
                for f in &generic.failures {
                    r.say(format!("  {f}"));
                }
                r.say(format!(
                    "fundamental: {} ({} checked, {} discrepancies)",
                    fundamental.holds(),
                    fundamental.checked,
                    fundamental.discrepancies.len()
                ));
                for d in &fundamental.discrepancies {
                    r.say(format!("  {d}"));
                }
                r.kv("formulas", formulas.len());
                r.kv("generic", generic.is_generic());
                r.kv("generic.failures", generic.failures.len());
                r.kv("fundamental", fundamental.holds());
                r.kv("fundamental.discrepancies", fundamental.discrepancies.len());
                verified = generic.is_generic() && fundamental.holds();
            }
        }
        Command::Hierarchy { alpha, counts } => {
            let site = cli.input.load_site()?;
            let mut u = Universe::new(site.clone())?;
            let level = build_hierarchy(&mut u, *alpha)?;
            for q in site.nodes() {
                let name = site.name(q);
                let members = level.at(q);
                r.kv(format!("count.{name}"), members.len());
                if *counts {
                    r.say(format!("{name}: {}", members.len()));
                    continue;
                }
                r.say(format!("{name}: {} sets", members.len()));
                for &f in members {
                    r.say(format!("  {}", u.show(f)));
                    r.kv(format!("set.{name}"), u.show(f));
                }
            }
        }
        Command::Classifier { node } => {
            let site = cli.input.load_site()?;
            let p = site.node(node)?;
            let mut u = Universe::new(site.clone())?;
            let omega = omega_classifier(&mut u, p)?;
            let opens = site.opens_within(site.up(p))?;
            let size = u.graph(omega, p).map_or(0, <[_]>::len);
            r.say(format!("{node}: {size} truth values"));
            r.kv("node", node);
            r.kv("size", size);
            for k in opens {
                r.say(format!("  {}", site.show(k)));
                r.kv("value", site.show(k));
            }
        }
        Command::ChiCheck { k, node } => {
            let site = cli.input.load_site()?;
            let p = site.node(node)?;
            let mut u = Universe::new(site)?;
            let chi = chi_check(&mut u, p, *k)?;
            let none = no_surjection_check(&mut u, p, *k)?;
            r.say(format!("subobjects: {}", chi.subobjects));
            r.say(format!("characteristic functions: {}", chi.characteristic));
            r.say(format!("functions: {}", chi.functions));
            r.say(format!("injective: {}", chi.injective));
            r.say(format!("surjective: {}", chi.surjective));
            r.say(format!("maps into the power object: {}", none.functions));
            r.say(format!("onto: {} (forced {})", none.onto, none.forced_onto));
            r.say(if chi.holds() && none.holds() {
                "verified"
            } else {
                "FAILED"
            });
            r.kv("k", k);
            r.kv("subobjects", chi.subobjects);
            r.kv("characteristic", chi.characteristic);
            r.kv("functions", chi.functions);
            r.kv("injective", chi.injective);
            r.kv("surjective", chi.surjective);
            r.kv("power.functions", none.functions);
            r.kv("power.onto", none.onto);
            r.kv("power.forced_onto", none.forced_onto);
            verified = chi.holds() && none.holds();
            r.kv("verified", verified);
        }
        Command::CohenDemo { steps, rows } => {
            if *rows < 2 {
                return Err(CliError::Usage("need at least two rows".into()));
            }
            let mut rng = gen::rng(cli.seed);
            let mut t = Condition::new();
            for step in 1..=*steps {
                let h = rng.gen_range(0..*rows);
                let m = (h + rng.gen_range(1..*rows)) % rows;
                let (h, m) = (format!("H{h}"), format!("H{m}"));
                let s = separating_extension(&t, &h, &m)?;
                let ok = extends(&s, &t) && s.len() == t.len() + 2;
                let column = s
                    .keys()
                    .find(|k| !t.contains_key(*k))
                    .map_or(0, |(_, n)| *n);
                r.say(format!(
                    "step {step}: {h} != {m} at column {column}, {} entries",
                    s.len()
                ));
                r.kv(format!("step.{step}"), format!("{h} {m} {column}"));
                verified &= ok;
                t = s;
            }
            for ((label, n), bit) in &t {
                r.kv(format!("{label}.{n}"), u8::from(*bit));
            }
            r.kv("entries", t.len());
            r.kv("verified", verified);
        }
        Command::Axioms { alpha, axiom } => {
            let site = cli.input.load_site()?;
            let mut u = Universe::new(site)?;
            let which: Vec<Axiom> = match axiom {
                Some(name) => vec![name.parse()?],
                None => Axiom::ALL.to_vec(),
            };
            for a in which {
                let rep = axiom_check(&mut u, *alpha, a)?;
                r.say(format!(
                    "{a}: {} ({} checked)",
                    if rep.holds() { "holds" } else { "FAILS" },
                    rep.checked
                ));
                for f in &rep.failures {
                    r.say(format!("  {f}"));
                }
                r.kv(a.name(), rep.holds());
                verified &= rep.holds();
            }
        }
    }
    Ok(Outcome {
        report: r,
        verified,
    })
}

/// Parses `args`, runs, prints, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.report.render(cli.format));
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Result<Outcome, CliError> {
        let cli =
            Cli::try_parse_from(std::iter::once("sheaf").chain(args.iter().copied())).unwrap();
        run(&cli)
    }

    #[test]
    fn spec_examples() {
        let o = go(&["truthval", "~R(s)"]).unwrap();
        assert_eq!(o.report.plain, "{}\n");
        let o = go(&["hierarchy", "--alpha", "2", "--counts"]).unwrap();
        assert_eq!(o.report.plain, "p: 3\nq: 2\n");
        let o = go(&["force", "--at", "p", "R(s) | ~R(s)"]).unwrap();
        assert_eq!(o.report.plain, "not forced\n");
        assert_eq!(o.exit_code(), 0);
    }

    #[test]
    fn line_protocol() {
        let o = go(&["truthset", "R(s)"]).unwrap();
        assert_eq!(
            o.report.render(Format::Lines),
            "domain\t{p,q}\nformula\tR(s)\nvalue\t{q}\n"
        );
    }

    #[test]
    fn section_flag() {
        let o = go(&["force", "--at", "q", "R(x)", "--section", "x=q:0"]).unwrap();
        assert_eq!(o.report.plain, "forced\n");
        assert!(matches!(
            go(&["force", "--at", "q", "R(x)", "--section", "x"]),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn input_errors() {
        assert!(go(&["truthval", "R("]).is_err());
        assert!(go(&["force", "--at", "z", "R(s)"]).is_err());
        assert!(go(&["hierarchy", "--alpha", "9"]).is_err());
        assert!(go(&["--fixture", "nope", "validate"]).is_err());
    }
}
