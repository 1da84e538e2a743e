//! Correlation strengths `L_S`, the separability bound and everything built
//! on them.
//!
//! `L_S(ρ) = Σ_{σ ∈ B_S} ⟨σ⟩²` is computed either from the expansion
//! coefficients or from the purities of the reductions,
//! `L_S = Σ_{S' ⊆ S} (-1)^{|S|-|S'|} d_{S'} tr(ρ_{S'}²)`. Both routes are
//! public so they can be cross-checked.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{enumerate_b_s, MultiIndex, PartySet};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::{CorrelationTensor, DensityMatrix};

/// Slack above the pure-product bound before a strength counts as exceeded.
pub const EXCEED_SLACK: f64 = 1e-9;

/// `Π_{a∈S} (d_a - 1)`; `1` for the empty set and for qubits.
pub fn pure_product_bound(set: PartySet, dims: &[usize]) -> f64 {
    set.iter().map(|a| (dims[a] - 1) as f64).product()
}

pub fn strength_from_coeffs(t: &CorrelationTensor, set: PartySet) -> Result<f64> {
    set.check(t.dims().len())?;
    Ok(enumerate_b_s(set, t.dims())
        .map(|idx| {
            let v = t.get_linear(idx.linear(t.dims()));
            v * v
        })
        .sum())
}

/// `L_S` for every subset at once, indexed by bitmask. Entry `0` is the
/// identity term `c_{0…0}² = 1`.
pub fn all_strengths_from_coeffs(t: &CorrelationTensor) -> Vec<f64> {
    let n = t.dims().len();
    let mut out = vec![0.0; 1 << n];
    for (v, s) in t.values().iter().zip(t.supports()) {
        out[s.bits() as usize] += v * v;
    }
    out
}

/// Alternating sum over subsets of `set` given the reduced purities.
///
/// `purity(S')` must return `tr(ρ_{S'}²)` for nonempty `S'`; the empty
/// subset contributes `(-1)^{|S|}`.
pub fn strength_from_reduced_purities<F>(
    set: PartySet,
    dims: &[usize],
    mut purity: F,
) -> Result<f64>
where
    F: FnMut(PartySet) -> Result<f64>,
{
    let mut acc = 0.0;
    for sub in set.subsets() {
        let sign = if (set.len() - sub.len()).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let term = if sub.is_empty() {
            1.0
        } else {
            let d_sub: f64 = sub.iter().map(|a| dims[a] as f64).product();
            d_sub * purity(sub)?
        };
        acc += sign * term;
    }
    Ok(acc)
}

pub fn strength_from_purities(rho: &DensityMatrix, set: PartySet) -> Result<f64> {
    set.check(rho.parties())?;
    if set.is_empty() {
        return Ok(1.0);
    }
    strength_from_reduced_purities(set, rho.dims(), |sub| Ok(rho.partial_trace(sub)?.purity()))
}

/// Projection `ξ_S = (1/d) Σ_{σ∈B_S} ⟨σ⟩ σ`.
pub fn xi_projection(rho: &DensityMatrix, set: PartySet) -> Result<CMatrix> {
    set.check(rho.parties())?;
    let full = rho.expand()?;
    let mut t = CorrelationTensor::zeros(rho.dims().to_vec())?;
    for idx in enumerate_b_s(set, rho.dims()) {
        let v = full.get_linear(idx.linear(rho.dims()));
        t.set(&idx, v)?;
    }
    t.synthesize()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Route {
    /// Coefficients for a complete sweep, purities for a capped one.
    #[default]
    Auto,
    Coefficients,
    Purities,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    /// Largest subset size swept; the full party set is always included.
    pub max_size: Option<usize>,
    pub route: Route,
    pub slack: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            max_size: None,
            route: Route::Auto,
            slack: EXCEED_SLACK,
        }
    }
}

impl SweepOptions {
    /// All subsets up to 12 parties, otherwise sizes up to 4 plus the full set.
    pub fn for_parties(n: usize) -> Self {
        SweepOptions {
            max_size: if n <= 12 { None } else { Some(4) },
            ..Default::default()
        }
    }

    pub fn is_complete(&self, n: usize) -> bool {
        self.max_size.is_none_or(|m| m + 1 >= n)
    }

    /// Nonempty subsets in the sweep, ordered by size then members.
    pub fn subsets(&self, n: usize) -> Vec<PartySet> {
        let cap = self.max_size.unwrap_or(n).min(n);
        let mut out = Vec::new();
        for size in 1..=cap {
            push_subsets_of_size(n, size, &mut out);
        }
        if cap < n {
            out.push(PartySet::full(n));
        }
        out
    }
}

fn push_subsets_of_size(n: usize, size: usize, out: &mut Vec<PartySet>) {
    fn rec(start: usize, n: usize, left: usize, cur: PartySet, out: &mut Vec<PartySet>) {
        if left == 0 {
            out.push(cur);
            return;
        }
        for a in start..=(n - left) {
            rec(a + 1, n, left - 1, cur.with(a), out);
        }
    }
    rec(0, n, size, PartySet::EMPTY, out);
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    pub subset: PartySet,
    pub strength: f64,
    pub bound: f64,
    pub exceeded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub dims: Vec<usize>,
    pub records: Vec<SubsetRecord>,
    pub purity: f64,
    /// `|Σ_{S≠{}} L_S - (d tr ρ² - 1)|`, present when every subset was swept.
    pub sum_residual: Option<f64>,
    /// Family-specific numbers such as detection thresholds.
    pub extras: BTreeMap<String, f64>,
}

impl InvariantReport {
    /// Builds records against the pure-product bounds of `dims`.
    pub fn from_strengths<I>(
        dims: &[usize],
        strengths: I,
        purity: f64,
        complete: bool,
        slack: f64,
    ) -> Self
    where
        I: IntoIterator<Item = (PartySet, f64)>,
    {
        let records: Vec<SubsetRecord> = strengths
            .into_iter()
            .map(|(subset, strength)| {
                let bound = pure_product_bound(subset, dims);
                SubsetRecord {
                    subset,
                    strength,
                    bound,
                    exceeded: strength > bound + slack,
                }
            })
            .collect();
        let sum_residual = complete.then(|| {
            let d: f64 = dims.iter().map(|&x| x as f64).product();
            let total: f64 = records.iter().map(|r| r.strength).sum();
            (total - (d * purity - 1.0)).abs()
        });
        InvariantReport {
            dims: dims.to_vec(),
            records,
            purity,
            sum_residual,
            extras: BTreeMap::new(),
        }
    }

    pub fn entangled(&self) -> bool {
        self.records.iter().any(|r| r.exceeded)
    }

    pub fn record(&self, subset: PartySet) -> Option<&SubsetRecord> {
        self.records.iter().find(|r| r.subset == subset)
    }

    pub fn strength(&self, subset: PartySet) -> Option<f64> {
        self.record(subset).map(|r| r.strength)
    }

    pub fn exceeded(&self) -> impl Iterator<Item = &SubsetRecord> {
        self.records.iter().filter(|r| r.exceeded)
    }
}

/// Applies the criterion to every subset selected by `opts`.
pub fn entanglement_verdict(rho: &DensityMatrix, opts: &SweepOptions) -> Result<InvariantReport> {
    rho.validate().check()?;
    let n = rho.parties();
    let subsets = opts.subsets(n);
    let complete = opts.is_complete(n);
    let route = match opts.route {
        Route::Auto if complete => Route::Coefficients,
        Route::Auto => Route::Purities,
        r => r,
    };
    let strengths: Vec<(PartySet, f64)> = match route {
        Route::Coefficients => {
            let all = all_strengths_from_coeffs(&rho.expand()?);
            subsets
                .iter()
                .map(|&s| (s, all[s.bits() as usize]))
                .collect()
        }
        _ => {
            let mut cache: HashMap<PartySet, f64> = HashMap::new();
            let mut out = Vec::with_capacity(subsets.len());
            for &s in &subsets {
                let l = strength_from_reduced_purities(s, rho.dims(), |sub| {
                    if let Some(&p) = cache.get(&sub) {
                        return Ok(p);
                    }
                    let p = rho.partial_trace(sub)?.purity();
                    cache.insert(sub, p);
                    Ok(p)
                })?;
                out.push((s, l));
            }
            out
        }
    };
    Ok(InvariantReport::from_strengths(
        rho.dims(),
        strengths,
        rho.purity(),
        complete,
        opts.slack,
    ))
}

/// Disjoint nonempty blocks covering all parties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<PartySet>,
}

impl Partition {
    pub fn new(blocks: Vec<PartySet>, n: usize) -> Result<Self> {
        let mut seen = PartySet::EMPTY;
        for &b in &blocks {
            b.check(n)?;
            if b.is_empty() {
                return Err(Error::InvalidParameter("empty block in partition".into()));
            }
            if !b.intersection(seen).is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "block {b} overlaps another block"
                )));
            }
            seen = seen.union(b);
        }
        if seen != PartySet::full(n) {
            return Err(Error::InvalidParameter(format!(
                "blocks cover {seen}, not all {n} parties"
            )));
        }
        Ok(Partition { blocks })
    }

    pub fn blocks(&self) -> &[PartySet] {
        &self.blocks
    }
}

/// Strengths and bounds for every subset of a (possibly coarse-grained) set
/// of parties. Each coarse party records which fine parties it contains.
#[derive(Clone, Debug, PartialEq)]
pub struct StrengthMap {
    parties: Vec<PartySet>,
    strengths: Vec<f64>,
    bounds: Vec<f64>,
}

impl StrengthMap {
    /// Fine-grained map from a complete list of strengths indexed by bitmask.
    pub fn new(dims: &[usize], mut strengths: Vec<f64>) -> Result<Self> {
        let n = dims.len();
        if strengths.len() != 1 << n {
            return Err(Error::Shape(format!(
                "{} strengths for {n} parties, need {}",
                strengths.len(),
                1usize << n
            )));
        }
        strengths[0] = 1.0;
        let bounds = (0..1u64 << n)
            .map(|m| pure_product_bound(PartySet::from_bits(m), dims))
            .collect();
        Ok(StrengthMap {
            parties: (0..n).map(|a| PartySet::from_parties([a])).collect(),
            strengths,
            bounds,
        })
    }

    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        StrengthMap::new(rho.dims(), all_strengths_from_coeffs(&rho.expand()?))
    }

    /// Fine parties grouped in each current party.
    pub fn parties(&self) -> &[PartySet] {
        &self.parties
    }

    pub fn strength(&self, set: PartySet) -> f64 {
        self.strengths[set.bits() as usize]
    }

    pub fn bound(&self, set: PartySet) -> f64 {
        self.bounds[set.bits() as usize]
    }

    /// Nonempty subsets whose strength exceeds the bound by more than `slack`.
    pub fn exceeded(&self, slack: f64) -> Vec<PartySet> {
        (1..self.strengths.len())
            .filter(|&m| self.strengths[m] > self.bounds[m] + slack)
            .map(|m| PartySet::from_bits(m as u64))
            .collect()
    }

    /// Merges current parties `a1` and `a2` (0-based) into one super-party
    /// placed at the lower of the two positions.
    pub fn coarsen(&self, a1: usize, a2: usize) -> Result<Self> {
        let n = self.parties.len();
        for a in [a1, a2] {
            if a >= n {
                return Err(Error::PartyOutOfRange { party: a + 1, n });
            }
        }
        if a1 == a2 {
            return Err(Error::InvalidParameter(
                "cannot merge a party with itself".into(),
            ));
        }
        let (lo, hi) = (a1.min(a2), a1.max(a2));
        // new position k maps to old party old_of[k]; position lo is the merged party
        let old_of: Vec<usize> = (0..n).filter(|&a| a != hi).collect();
        let m = n - 1;
        let mut strengths = vec![0.0; 1 << m];
        let mut bounds = vec![0.0; 1 << m];
        for t in 0..(1u64 << m) {
            let mut rest = 0u64;
            for (k, &old) in old_of.iter().enumerate() {
                if k != lo && t & (1 << k) != 0 {
                    rest |= 1 << old;
                }
            }
            let idx = t as usize;
            if t & (1 << lo) == 0 {
                strengths[idx] = self.strengths[rest as usize];
                bounds[idx] = self.bounds[rest as usize];
            } else {
                let parts = [1u64 << lo, 1u64 << hi, (1u64 << lo) | (1u64 << hi)];
                strengths[idx] = parts
                    .iter()
                    .map(|p| self.strengths[(rest | p) as usize])
                    .sum();
                bounds[idx] = parts.iter().map(|p| self.bounds[(rest | p) as usize]).sum();
            }
        }
        let mut parties: Vec<PartySet> = old_of.iter().map(|&a| self.parties[a]).collect();
        parties[lo] = self.parties[lo].union(self.parties[hi]);
        Ok(StrengthMap {
            parties,
            strengths,
            bounds,
        })
    }

    /// Coarsens until the current parties are exactly the partition's blocks.
    pub fn coarsen_to(&self, partition: &Partition) -> Result<Self> {
        let mut cur = self.clone();
        for &block in partition.blocks() {
            loop {
                let holders: Vec<usize> = cur
                    .parties
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| !p.intersection(block).is_empty())
                    .map(|(k, _)| k)
                    .collect();
                if holders.iter().any(|&k| !cur.parties[k].is_subset_of(block)) {
                    return Err(Error::InvalidParameter(format!(
                        "block {block} splits an already merged party"
                    )));
                }
                if holders.len() <= 1 {
                    break;
                }
                cur = cur.coarsen(holders[0], holders[1])?;
            }
        }
        Ok(cur)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamEvent {
    pub step: usize,
    pub index: MultiIndex,
    pub value: f64,
    /// Whether the index has support equal to the target set.
    pub counted: bool,
    pub running: f64,
    pub detected_now: bool,
}

/// Running lower bound on `L_S` from coefficients as they are measured.
#[derive(Clone, Debug)]
pub struct StreamingBound {
    target: PartySet,
    dims: Vec<usize>,
    bound: f64,
    slack: f64,
    running: f64,
    seen: HashSet<MultiIndex>,
    counted: BTreeMap<MultiIndex, f64>,
    steps: usize,
    detected_at: Option<usize>,
}

impl StreamingBound {
    pub fn new(target: PartySet, dims: &[usize]) -> Result<Self> {
        target.check(dims.len())?;
        Ok(StreamingBound {
            target,
            dims: dims.to_vec(),
            bound: pure_product_bound(target, dims),
            slack: EXCEED_SLACK,
            running: 0.0,
            seen: HashSet::new(),
            counted: BTreeMap::new(),
            steps: 0,
            detected_at: None,
        })
    }

    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self
    }

    pub fn push(&mut self, index: MultiIndex, value: f64) -> Result<StreamEvent> {
        index.validate(&self.dims)?;
        if self.seen.contains(&index) {
            return Err(Error::DuplicateMeasurement(index.to_string()));
        }
        self.seen.insert(index.clone());
        self.steps += 1;
        let counted = index.support() == self.target;
        if counted {
            self.counted.insert(index.clone(), value);
            // summed in index order so the final value matches the batch sum bit for bit
            self.running = self.counted.values().map(|v| v * v).sum();
        }
        let detected_now = self.detected_at.is_none() && self.running > self.bound + self.slack;
        if detected_now {
            self.detected_at = Some(self.steps);
        }
        Ok(StreamEvent {
            step: self.steps,
            index,
            value,
            counted,
            running: self.running,
            detected_now,
        })
    }

    pub fn running(&self) -> f64 {
        self.running
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// 1-based step at which the running value first exceeded the bound.
    pub fn detected_at(&self) -> Option<usize> {
        self.detected_at
    }
}

/// Feeds a whole stream and returns the event log.
pub fn streaming_lower_bound<I>(
    stream: I,
    target: PartySet,
    dims: &[usize],
) -> Result<(Vec<StreamEvent>, StreamingBound)>
where
    I: IntoIterator<Item = (MultiIndex, f64)>,
{
    let mut sb = StreamingBound::new(target, dims)?;
    let mut log = Vec::new();
    for (idx, v) in stream {
        log.push(sb.push(idx, v)?);
    }
    Ok((log, sb))
}

/// Order in which a simulated tomography acquires the coefficients of `B_S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamOrder {
    /// Uniformly shuffled with a seeded generator.
    Random(u64),
    /// Largest `|c|` first, ties in index order. Models an experimenter who
    /// measures the expected strong correlations first.
    SupportFirst,
}

/// Indices of `B_S` in acquisition order.
pub fn measurement_order(
    t: &CorrelationTensor,
    set: PartySet,
    order: StreamOrder,
) -> Result<Vec<MultiIndex>> {
    set.check(t.dims().len())?;
    let mut idx: Vec<MultiIndex> = enumerate_b_s(set, t.dims()).collect();
    match order {
        StreamOrder::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            idx.shuffle(&mut rng);
        }
        StreamOrder::SupportFirst => {
            let key = |i: &MultiIndex| t.get_linear(i.linear(t.dims())).abs();
            // stable sort keeps index order among ties
            idx.sort_by(|a, b| key(b).total_cmp(&key(a)));
        }
    }
    Ok(idx)
}

/// Exact-coefficient tomography of `B_S` in the given order.
pub fn simulate_tomography(
    rho: &DensityMatrix,
    set: PartySet,
    order: StreamOrder,
) -> Result<(Vec<StreamEvent>, StreamingBound)> {
    rho.validate().check()?;
    let t = rho.expand()?;
    let order = measurement_order(&t, set, order)?;
    let stream = order.into_iter().map(|i| {
        let v = t.get_linear(i.linear(t.dims()));
        (i, v)
    });
    streaming_lower_bound(stream, set, rho.dims())
}
