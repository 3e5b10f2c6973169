//! `tfag`: build the group constructions, verify decompositions and
//! indecomposability certificates, and run bounded decomposition searches.
//!
//! Exit codes: 0 pass (or a decomposition was found), 1 fail or bounded
//! refutation, 2 usage or input error.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use report::{Outcome, Report};
use tfag_core::{CeSetSpec, Element, Error, PathSpec, StagedPresentation, SummandPair, TreeSpec, TruncationParams};

#[derive(Parser, Debug)]
#[command(name = "tfag", version, about = "Staged torsion-free abelian group constructions and certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a construction and summarize its generators and prime table.
    Build(Args),
    /// Verify a decomposition or an indecomposability certificate.
    Verify(Args),
    /// Bounded search for a decomposition.
    Search(Args),
    /// Characteristics, maximality evidence and links for every basis element.
    Report(Args),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args, Debug, Clone)]
struct Args {
    /// fuchs | cof | base | tree | free<n>
    construction: String,
    /// Largest stage to build.
    #[arg(long)]
    stages: Option<usize>,
    /// Stage to query; defaults to the largest built stage.
    #[arg(long)]
    stage: Option<usize>,
    /// Longest x_sigma word.
    #[arg(long)]
    depth: Option<u32>,
    /// Entries of x_sigma words are below this.
    #[arg(long)]
    branch: Option<u32>,
    /// Largest i for x_i, y_i.
    #[arg(long = "n-max")]
    n_max: Option<u32>,
    /// Coefficient bound for searches.
    #[arg(long, default_value_t = 3)]
    bound: u32,
    /// Coefficient bound for maximality witnesses.
    #[arg(long = "witness-bound", default_value_t = 3)]
    witness_bound: u32,
    /// Height cap for reported stage characteristics; defaults to the stage.
    #[arg(long)]
    cap: Option<u32>,
    /// c.e. set descriptor for cof, e.g. '{"cofinite_complement":[0]}'.
    #[arg(long)]
    w: Option<String>,
    /// Descriptor file: a tree for tree, a c.e. set for cof.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Path through the tree, e.g. '[0,0,0]'.
    #[arg(long)]
    path: Option<String>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// verify: certify indecomposability through links.
    #[arg(long)]
    indecomposable: bool,
    /// verify (cof): check the cofinite-case summands.
    #[arg(long = "lemma53")]
    cofinite_split: bool,
    /// verify: a summand pair, '{"a":["x1"],"b":["x2"]}'.
    #[arg(long)]
    pair: Option<String>,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(msg.into())
}

fn core(e: Error) -> anyhow::Error {
    usage(e.to_string())
}

pub enum Kind {
    Fuchs,
    Cof(CeSetSpec),
    Base(TruncationParams),
    Tree(TreeSpec, TruncationParams),
    Free(u32),
}

pub struct Built {
    pub kind: Kind,
    pub group: StagedPresentation,
    pub stage: usize,
}

fn read_file(path: &PathBuf) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn with_source(source: &str, e: Error) -> anyhow::Error {
    match e {
        Error::Descriptor { line, message } => usage(format!("{source}:{line}: {message}")),
        other => core(other),
    }
}

fn build(args: &Args) -> anyhow::Result<Built> {
    let name = args.construction.as_str();
    let stages = args.stages.or(args.stage);
    let (kind, stages) = match name {
        "fuchs" => (Kind::Fuchs, stages.unwrap_or(6)),
        "cof" => {
            let w = match (&args.w, &args.file) {
                (Some(text), None) => CeSetSpec::parse(text).map_err(|e| with_source("--w", e))?,
                (None, Some(path)) => {
                    CeSetSpec::parse(&read_file(path)?).map_err(|e| with_source(&path.display().to_string(), e))?
                }
                (None, None) => return Err(usage("cof needs --w or --file")),
                (Some(_), Some(_)) => return Err(usage("give only one of --w and --file")),
            };
            (Kind::Cof(w), stages.unwrap_or(10))
        }
        "base" => {
            let depth = args.depth.unwrap_or(2);
            let stages = stages.unwrap_or(depth as usize);
            let t = TruncationParams::new(args.n_max.unwrap_or(depth), depth, args.branch.unwrap_or(2), stages)
                .map_err(core)?;
            (Kind::Base(t), stages)
        }
        "tree" => {
            let path = args.file.as_ref().ok_or_else(|| usage("tree needs --file"))?;
            let tree = TreeSpec::parse(&read_file(path)?).map_err(|e| with_source(&path.display().to_string(), e))?;
            let depth = args.depth.unwrap_or(tree.height().max(1) as u32);
            let branch = args.branch.unwrap_or_else(|| {
                tree.nodes().flat_map(|w| w.0.iter().copied()).max().map_or(1, |m| m + 1)
            });
            let stages = stages.unwrap_or(depth as usize);
            let t = TruncationParams::new(args.n_max.unwrap_or(depth), depth, branch, stages).map_err(core)?;
            (Kind::Tree(tree, t), stages)
        }
        other => match other.strip_prefix("free").and_then(|n| n.parse::<u32>().ok()) {
            Some(n) => (Kind::Free(n), stages.unwrap_or(1)),
            None => return Err(usage(format!("unknown construction '{other}'"))),
        },
    };
    let group = match &kind {
        Kind::Fuchs => tfag_core::fuchs_group(stages),
        Kind::Cof(w) => tfag_core::cof_group(w, stages),
        Kind::Base(t) => tfag_core::infinite_base_group(t),
        Kind::Tree(tree, t) => tfag_core::tree_group(tree, t),
        Kind::Free(n) => tfag_core::free_group(*n, stages),
    }
    .map_err(core)?;
    let stage = args.stage.unwrap_or(stages);
    if stage > group.max_stage() {
        return Err(usage(format!("stage {stage} exceeds built stages {}", group.max_stage())));
    }
    Ok(Built { kind, group, stage })
}

#[derive(Deserialize)]
struct PairSpec {
    a: Vec<String>,
    b: Vec<String>,
}

fn parse_pair(text: &str) -> anyhow::Result<SummandPair> {
    let spec: PairSpec =
        serde_json::from_str(text).map_err(|e| usage(format!("--pair:{}: {e}", e.line())))?;
    let parse = |v: &[String]| -> anyhow::Result<Vec<Element>> {
        v.iter().map(|s| s.parse::<Element>().map_err(core)).collect()
    };
    SummandPair::new(parse(&spec.a)?, parse(&spec.b)?).map_err(core)
}

fn run(cli: &Cli) -> anyhow::Result<(Report, Outcome)> {
    let (args, command) = match &cli.command {
        Command::Build(a) => (a, "build"),
        Command::Verify(a) => (a, "verify"),
        Command::Search(a) => (a, "search"),
        Command::Report(a) => (a, "report"),
    };
    let built = build(args)?;
    let mut report = Report::new(command, &built, args);
    let outcome = match &cli.command {
        Command::Build(_) => report.build_summary(&built).map_err(core)?,
        Command::Report(_) => report.characteristics(&built, args).map_err(core)?,
        Command::Search(_) => report.search(&built, args.bound).map_err(core)?,
        Command::Verify(_) => {
            let modes = [args.indecomposable, args.cofinite_split, args.pair.is_some(), args.path.is_some()];
            match modes.iter().filter(|&&m| m).count() {
                0 => bail!("verify needs one of --indecomposable, --lemma53, --pair, --path"),
                1 => {}
                _ => bail!("give exactly one verification mode"),
            }
            if args.indecomposable {
                report.indecomposable(&built, args.witness_bound).map_err(core)?
            } else if args.cofinite_split {
                let Kind::Cof(w) = &built.kind else {
                    bail!("--lemma53 applies to cof")
                };
                report.cofinite_split(&built, w).map_err(core)?
            } else if let Some(pair) = &args.pair {
                report.pair(&built, &parse_pair(pair)?).map_err(core)?
            } else {
                let Kind::Tree(tree, t) = &built.kind else {
                    bail!("--path applies to tree")
                };
                let text = args.path.as_deref().unwrap_or_default();
                let path = PathSpec::parse(text).map_err(|e| with_source("--path", e))?;
                report.path(&built, tree, &path, t).map_err(core)?
            }
        }
    };
    Ok((report, outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli).and_then(|(report, outcome)| {
        let args = match &cli.command {
            Command::Build(a) | Command::Verify(a) | Command::Search(a) | Command::Report(a) => a,
        };
        let text = match args.format {
            Format::Json => report.to_json(),
            Format::Text => report.to_text(start.elapsed()),
        };
        match &args.out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(outcome)
    });
    match result {
        Ok(Outcome::Pass) => ExitCode::from(0),
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
