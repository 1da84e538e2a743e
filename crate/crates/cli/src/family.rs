//! Named state families and their parameters.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use locinv_core::invariants::{InvariantReport, SweepOptions};
use locinv_core::io::{read_graph, read_weights};
use locinv_core::structured::{
    dicke_state, ghz_diagonal_strength, ghz_state, ghz_strength, graph_diagonal_dense,
    graph_diagonal_strength, graph_diagonal_strengths, graph_state_dense, graph_strength_schmidt,
    noisy_ghz_dense, noisy_ghz_thresholds, noisy_ghz_weights, stabilizer_support_counts,
    w_detection_threshold, DiagonalWeights, DickeState, Graph, WernerClassState, DENSE_MAX_QUBITS,
};
use locinv_core::{DensityMatrix, PartySet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Families whose full stabilizer or weight transform is enumerated.
const ENUMERATE_MAX_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyName {
    Ghz,
    W,
    Dicke,
    NoisyGhz,
    Werner,
    Graph,
    GraphDiag,
}

/// `key=value` parameters; every key must be consumed.
#[derive(Debug, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn parse<'a, I: IntoIterator<Item = &'a String>>(items: I) -> Result<Self> {
        let mut values = BTreeMap::new();
        for item in items {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("parameter {item:?} is not of the form key=value"))?;
            if values
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                bail!("parameter {k} given twice");
            }
        }
        Ok(Params { values })
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| anyhow!("parameter {key}={v} is not valid")),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        self.take(key)?
            .ok_or_else(|| anyhow!("missing parameter {key}"))
    }

    fn finish(self) -> Result<()> {
        if let Some(k) = self.values.keys().next() {
            bail!("unknown parameter {k}");
        }
        Ok(())
    }
}

pub struct FamilyInput {
    pub name: FamilyName,
    pub params: Params,
    pub graph: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub seed: u64,
}

/// A family instance: closed-form strengths plus a dense constructor.
pub enum Family {
    Ghz(usize),
    Dicke(DickeState),
    NoisyGhz {
        n: usize,
        p: f64,
        weights: DiagonalWeights,
    },
    Werner(WernerClassState),
    Graph(Graph),
    GraphDiag(Graph, DiagonalWeights),
}

fn graph_from(input: &mut FamilyInput) -> Result<Graph> {
    if let Some(path) = &input.graph {
        return read_graph(path).with_context(|| format!("reading graph {}", path.display()));
    }
    let n: usize = input.params.require("n")?;
    let shape: String = input.params.take("shape")?.unwrap_or_else(|| "star".into());
    Ok(match shape.as_str() {
        "star" => Graph::star(n)?,
        "ring" => Graph::ring(n)?,
        "path" => Graph::path(n)?,
        "complete" => Graph::complete(n)?,
        "random" => {
            let q: f64 = input.params.take("edge_p")?.unwrap_or(0.5);
            if !(0.0..=1.0).contains(&q) {
                bail!("edge_p={q} outside [0, 1]");
            }
            Graph::random(n, q, &mut ChaCha8Rng::seed_from_u64(input.seed))?
        }
        other => bail!("unknown graph shape {other}"),
    })
}

fn check_n(n: usize, max: usize) -> Result<()> {
    if !(2..=max).contains(&n) {
        bail!("n={n} outside 2..={max}");
    }
    Ok(())
}

impl Family {
    pub fn build(mut input: FamilyInput) -> Result<Family> {
        let fam = match input.name {
            FamilyName::Ghz => {
                let n = input.params.require("n")?;
                check_n(n, 62)?;
                Family::Ghz(n)
            }
            FamilyName::W => {
                let n = input.params.require("n")?;
                check_n(n, 62)?;
                Family::Dicke(DickeState::new(n, 1)?)
            }
            FamilyName::Dicke => {
                let n = input.params.require("n")?;
                check_n(n, 62)?;
                Family::Dicke(DickeState::new(n, input.params.require("m")?)?)
            }
            FamilyName::NoisyGhz => {
                let n = input.params.require("n")?;
                check_n(n, 40)?;
                let p = input.params.require("p")?;
                Family::NoisyGhz {
                    n,
                    p,
                    weights: noisy_ghz_weights(n, p)?,
                }
            }
            FamilyName::Werner => {
                let n = input.params.require("n")?;
                check_n(n, 40)?;
                Family::Werner(WernerClassState::uniform(
                    n,
                    input.params.require("delta")?,
                )?)
            }
            FamilyName::Graph => Family::Graph(graph_from(&mut input)?),
            FamilyName::GraphDiag => {
                let g = graph_from(&mut input)?;
                let w = match (&input.weights, input.params.take::<f64>("p")?) {
                    (Some(path), None) => read_weights(path)
                        .with_context(|| format!("reading weights {}", path.display()))?,
                    (None, Some(p)) => noisy_ghz_weights(g.n(), p)?,
                    _ => bail!("graph-diag needs exactly one of --weights FILE or p=..."),
                };
                if w.n() != g.n() {
                    bail!(
                        "{} weights do not match a {}-vertex graph",
                        w.weights().len(),
                        g.n()
                    );
                }
                Family::GraphDiag(g, w)
            }
        };
        if input.weights.is_some() && !matches!(fam, Family::GraphDiag(..)) {
            bail!("--weights only applies to graph-diag");
        }
        if input.graph.is_some() && !matches!(fam, Family::Graph(_) | Family::GraphDiag(..)) {
            bail!("--graph only applies to graph and graph-diag");
        }
        input.params.finish()?;
        Ok(fam)
    }

    pub fn parties(&self) -> usize {
        match self {
            Family::Ghz(n) => *n,
            Family::Dicke(d) => d.n(),
            Family::NoisyGhz { n, .. } => *n,
            Family::Werner(w) => w.n(),
            Family::Graph(g) | Family::GraphDiag(g, _) => g.n(),
        }
    }

    pub fn dense(&self) -> Result<DensityMatrix> {
        if self.parties() > DENSE_MAX_QUBITS {
            bail!("dense construction limited to {DENSE_MAX_QUBITS} qubits");
        }
        Ok(match self {
            Family::Ghz(n) => ghz_state(*n)?,
            Family::Dicke(d) => dicke_state(d.n(), d.m())?,
            Family::NoisyGhz { n, p, .. } => noisy_ghz_dense(*n, *p)?,
            Family::Werner(w) => graph_diagonal_dense(&Graph::star(w.n())?, &w.weights()?)?,
            Family::Graph(g) => graph_state_dense(g)?,
            Family::GraphDiag(g, w) => graph_diagonal_dense(g, w)?,
        })
    }

    fn purity(&self) -> Result<f64> {
        Ok(match self {
            Family::Ghz(_) | Family::Dicke(_) | Family::Graph(_) => 1.0,
            Family::NoisyGhz { weights, .. } => weights.purity(),
            Family::Werner(w) => w.weights()?.purity(),
            Family::GraphDiag(_, w) => w.purity(),
        })
    }

    fn strengths(&self, subsets: &[PartySet]) -> Result<Vec<(PartySet, f64)>> {
        let n = self.parties();
        let small = n <= ENUMERATE_MAX_QUBITS;
        let mut out = Vec::with_capacity(subsets.len());
        match self {
            Family::Ghz(n) => {
                for &s in subsets {
                    out.push((s, ghz_strength(*n, s)?));
                }
            }
            Family::Dicke(d) => {
                for &s in subsets {
                    out.push((s, d.strength(s.len())?));
                }
            }
            Family::NoisyGhz { weights, .. } => {
                for &s in subsets {
                    out.push((s, ghz_diagonal_strength(weights, s)?));
                }
            }
            Family::Werner(w) => {
                let weights = w.weights()?;
                for &s in subsets {
                    let l = if s == PartySet::full(n) {
                        w.strength()
                    } else {
                        ghz_diagonal_strength(&weights, s)?
                    };
                    out.push((s, l));
                }
            }
            Family::Graph(g) if small => {
                let counts = stabilizer_support_counts(g);
                out.extend(
                    subsets
                        .iter()
                        .map(|&s| (s, counts[s.bits() as usize] as f64)),
                );
            }
            Family::Graph(g) => {
                for &s in subsets {
                    out.push((s, graph_strength_schmidt(g, s)? as f64));
                }
            }
            Family::GraphDiag(g, w) if small => {
                let all = graph_diagonal_strengths(g, w)?;
                out.extend(subsets.iter().map(|&s| (s, all[s.bits() as usize])));
            }
            Family::GraphDiag(g, w) => {
                for &s in subsets {
                    out.push((s, graph_diagonal_strength(g, w, s)?));
                }
            }
        }
        Ok(out)
    }

    fn extras(&self) -> Result<BTreeMap<String, f64>> {
        let mut e = BTreeMap::new();
        match self {
            Family::NoisyGhz { n, .. } => {
                let (crit, nppt) = noisy_ghz_thresholds(*n)?;
                e.insert("threshold_criterion".into(), crit);
                e.insert("threshold_nppt".into(), nppt);
            }
            Family::Dicke(d) if d.m() == 1 || d.m() + 1 == d.n() => {
                if let Some(s) = w_detection_threshold(d.n())? {
                    e.insert("detection_size".into(), s as f64);
                }
            }
            Family::Werner(w) if w.n() <= 20 => {
                let n = w.n();
                // sides without party 1 cover every bipartition once
                let mut ppt = 0;
                for m in 1u64..1 << (n - 1) {
                    if w.ppt(PartySet::from_bits(m << 1))? {
                        ppt += 1;
                    }
                }
                e.insert("ppt_cuts".into(), ppt as f64);
                e.insert("cuts".into(), ((1u64 << (n - 1)) - 1) as f64);
            }
            _ => {}
        }
        Ok(e)
    }

    /// Report from closed forms, without building the dense state.
    pub fn report(&self, opts: &SweepOptions) -> Result<InvariantReport> {
        let n = self.parties();
        let subsets = opts.subsets(n);
        let strengths = self.strengths(&subsets)?;
        let mut r = InvariantReport::from_strengths(
            &vec![2; n],
            strengths,
            self.purity()?,
            opts.is_complete(n),
            opts.slack,
        );
        r.extras = self.extras()?;
        Ok(r)
    }
}
