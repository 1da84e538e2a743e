//! `locinv`: correlation strengths and the separability criterion from the
//! command line.
//!
//! Exit codes: 0 when separability is not excluded, 10 when entanglement is
//! detected, 2 on invalid input.

mod family;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use locinv_core::invariants::{
    entanglement_verdict, simulate_tomography, strength_from_coeffs, StreamEvent, StreamOrder,
    StreamingBound, SweepOptions,
};
use locinv_core::io::{read_graph, read_state, read_weights};
use locinv_core::report::{render, Format};
use locinv_core::structured::{graph_diagonal_dense, graph_state_dense};
use locinv_core::{DensityMatrix, InvariantReport, PartySet};
use serde_json::json;

use family::{Family, FamilyInput, FamilyName, Params};

const EXIT_ENTANGLED: u8 = 10;
const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "locinv",
    version,
    about = "Local-unitary invariant correlation strengths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep L_S over subsets of a state given by a file or a family.
    Analyze {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form report for a named family, e.g. `family noisy-ghz n=3 p=0.6`.
    Family {
        #[arg(value_enum)]
        name: FamilyName,
        /// Parameters as key=value.
        params: Vec<String>,
        #[arg(long = "param", value_name = "K=V")]
        extra: Vec<String>,
        #[arg(long, value_name = "FILE")]
        graph: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        weights: Option<PathBuf>,
        /// Build the dense state and sweep it instead of using closed forms.
        #[arg(long)]
        dense: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate coefficient-by-coefficient tomography of B_S.
    TomoSim {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Order::SupportFirst)]
        order: Order,
        /// Comma-separated 1-based parties; defaults to all.
        #[arg(long, value_name = "LIST")]
        subset: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Source {
    #[arg(long, value_name = "FILE")]
    state: Option<PathBuf>,
    /// Graph file; with --weights a graph-diagonal state, else the graph state.
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    weights: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
}

#[derive(Args, Debug)]
struct Common {
    /// Largest subset size swept (the full set is always included).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    subset_cap: Option<u64>,
    #[arg(long, value_enum, default_value_t = OutFormat::Table)]
    format: OutFormat,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Slack above the pure-product bound before a strength counts as exceeded.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Table,
    JsonLines,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Table => Format::Table,
            OutFormat::JsonLines => Format::JsonLines,
            OutFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    Random,
    SupportFirst,
}

impl Common {
    fn sweep(&self, n: usize) -> Result<SweepOptions> {
        let mut opts = SweepOptions::for_parties(n);
        if let Some(cap) = self.subset_cap {
            opts.max_size = Some(cap as usize);
        }
        if let Some(tol) = self.tol {
            if tol.is_nan() || tol < 0.0 {
                bail!("--tol must be non-negative");
            }
            opts.slack = tol;
        }
        Ok(opts)
    }
}

enum Input {
    Dense(DensityMatrix),
    Closed(Family),
}

impl Source {
    fn load(self, seed: u64) -> Result<Input> {
        let given = [
            self.state.is_some(),
            self.graph.is_some(),
            self.family.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            bail!("give exactly one of --state, --graph or --family");
        }
        if self.family.is_none() && !self.params.is_empty() {
            bail!("--param needs --family");
        }
        if let Some(name) = self.family {
            let params = Params::parse(&self.params)?;
            return Ok(Input::Closed(Family::build(FamilyInput {
                name,
                params,
                graph: None,
                weights: self.weights,
                seed,
            })?));
        }
        if let Some(path) = self.state {
            if self.weights.is_some() {
                bail!("--weights needs --graph");
            }
            let rho =
                read_state(&path).with_context(|| format!("reading state {}", path.display()))?;
            return Ok(Input::Dense(rho));
        }
        let path = self.graph.expect("one source is set");
        let g = read_graph(&path).with_context(|| format!("reading graph {}", path.display()))?;
        let rho = match self.weights {
            Some(w) => {
                let w =
                    read_weights(&w).with_context(|| format!("reading weights {}", w.display()))?;
                if w.n() != g.n() {
                    bail!(
                        "{} weights do not match a {}-vertex graph",
                        w.weights().len(),
                        g.n()
                    );
                }
                graph_diagonal_dense(&g, &w)?
            }
            None => graph_state_dense(&g)?,
        };
        Ok(Input::Dense(rho))
    }
}

impl Input {
    fn dense(self) -> Result<DensityMatrix> {
        match self {
            Input::Dense(rho) => Ok(rho),
            Input::Closed(f) => f.dense(),
        }
    }
}

fn analyze(input: Input, common: &Common) -> Result<InvariantReport> {
    match input {
        Input::Dense(rho) => {
            rho.validate().check().context("state failed validation")?;
            Ok(entanglement_verdict(&rho, &common.sweep(rho.parties())?)?)
        }
        Input::Closed(f) => f.report(&common.sweep(f.parties())?),
    }
}

fn emit(report: &InvariantReport, common: &Common) -> u8 {
    print!("{}", render(report, common.format.into()));
    if report.entangled() {
        EXIT_ENTANGLED
    } else {
        0
    }
}

fn parse_subset(text: Option<&str>, n: usize) -> Result<PartySet> {
    let Some(text) = text else {
        return Ok(PartySet::full(n));
    };
    let labels = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad party label {t:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let set = PartySet::from_one_based(&labels, n)?;
    if set.is_empty() {
        bail!("subset must be nonempty");
    }
    Ok(set)
}

fn print_stream(
    log: &[StreamEvent],
    sb: &StreamingBound,
    set: PartySet,
    batch: f64,
    format: OutFormat,
) -> Result<()> {
    match format {
        OutFormat::Table => {
            println!(
                "{:>5}  {:<14}  {:>20}  {:>20}  detected",
                "step", "index", "value", "running"
            );
            for e in log {
                println!(
                    "{:>5}  {:<14}  {:>20.15}  {:>20.15}  {}",
                    e.step,
                    e.index.to_string(),
                    e.value,
                    e.running,
                    if e.detected_now { "yes" } else { "" }
                );
            }
            match sb.detected_at() {
                Some(k) => println!("detected at step {k} of {}", sb.steps()),
                None => println!("no detection after {} steps", sb.steps()),
            }
            println!(
                "subset {set} bound {} streamed {} batch {batch}",
                sb.bound(),
                sb.running()
            );
        }
        OutFormat::JsonLines => {
            for e in log {
                let line = json!({
                    "kind": "event",
                    "step": e.step,
                    "index": e.index.as_slice(),
                    "value": e.value,
                    "counted": e.counted,
                    "running": e.running,
                    "detected_now": e.detected_now,
                });
                println!("{line}");
            }
            let summary = json!({
                "kind": "summary",
                "subset": set,
                "steps": sb.steps(),
                "detected_at": sb.detected_at(),
                "bound": sb.bound(),
                "streamed": sb.running(),
                "batch": batch,
            });
            println!("{summary}");
        }
        OutFormat::Csv => {
            println!("step,index,value,running,detected_now");
            for e in log {
                let idx: Vec<String> = e.index.as_slice().iter().map(usize::to_string).collect();
                println!(
                    "{},{},{:?},{:?},{}",
                    e.step,
                    idx.join(" "),
                    e.value,
                    e.running,
                    e.detected_now
                );
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { source, common } => {
            let input = source.load(common.seed)?;
            Ok(emit(&analyze(input, &common)?, &common))
        }
        Command::Family {
            name,
            params,
            extra,
            graph,
            weights,
            dense,
            common,
        } => {
            let params = Params::parse(params.iter().chain(&extra))?;
            let fam = Family::build(FamilyInput {
                name,
                params,
                graph,
                weights,
                seed: common.seed,
            })?;
            let input = if dense {
                Input::Dense(fam.dense()?)
            } else {
                Input::Closed(fam)
            };
            Ok(emit(&analyze(input, &common)?, &common))
        }
        Command::TomoSim {
            source,
            order,
            subset,
            common,
        } => {
            let rho = source.load(common.seed)?.dense()?;
            rho.validate().check().context("state failed validation")?;
            let set = parse_subset(subset.as_deref(), rho.parties())?;
            let order = match order {
                Order::Random => StreamOrder::Random(common.seed),
                Order::SupportFirst => StreamOrder::SupportFirst,
            };
            let (log, sb) = simulate_tomography(&rho, set, order)?;
            let batch = strength_from_coeffs(&rho.expand()?, set)?;
            print_stream(&log, &sb, set, batch, common.format)?;
            Ok(if sb.detected_at().is_some() {
                EXIT_ENTANGLED
            } else {
                0
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
