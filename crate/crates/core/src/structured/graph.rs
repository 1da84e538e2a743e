//! Graph states, their stabilizers in binary-symplectic form, and
//! graph-diagonal mixtures.

use std::fmt;

use rand::Rng;

use super::{reverse_bits, wht::fwht, DENSE_MAX_QUBITS};
use crate::basis::PartySet;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::state::DensityMatrix;

/// Simple undirected graph on `n ≤ 63` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn edgeless(n: usize) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::InvalidParameter(format!(
                "graph size {n} outside 1..=63"
            )));
        }
        Ok(Graph { n, adj: vec![0; n] })
    }

    /// Edges are 0-based vertex pairs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::edgeless(n)?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn from_adjacency(matrix: &[Vec<bool>]) -> Result<Self> {
        let n = matrix.len();
        let mut g = Graph::edgeless(n)?;
        for (a, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "adjacency row {} has length {}",
                    a + 1,
                    row.len()
                )));
            }
            if row[a] {
                return Err(Error::InvalidParameter(format!(
                    "self-loop at vertex {}",
                    a + 1
                )));
            }
            for (b, &e) in row.iter().enumerate() {
                if e != matrix[b][a] {
                    return Err(Error::InvalidParameter(
                        "adjacency matrix is not symmetric".into(),
                    ));
                }
                if e {
                    g.adj[a] |= 1 << b;
                }
            }
        }
        Ok(g)
    }

    /// Star with vertex 1 as the center; locally equivalent to GHZ.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|b| (0, b)).collect();
        Graph::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Graph::from_edges(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|b| (b - 1, b)).collect();
        Graph::from_edges(n, &edges)
    }

    pub fn ring(n: usize) -> Result<Self> {
        let mut edges: Vec<_> = (1..n).map(|b| (b - 1, b)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Graph::from_edges(n, &edges)
    }

    /// Erdős–Rényi graph with edge probability `p`.
    pub fn random<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        let mut g = Graph::edgeless(n)?;
        for a in 0..n {
            for b in a + 1..n {
                if rng.random::<f64>() < p {
                    g.add_edge(a, b)?;
                }
            }
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        for v in [a, b] {
            if v >= self.n {
                return Err(Error::PartyOutOfRange {
                    party: v + 1,
                    n: self.n,
                });
            }
        }
        if a == b {
            return Err(Error::InvalidParameter(format!(
                "self-loop at vertex {}",
                a + 1
            )));
        }
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, a: usize) -> PartySet {
        PartySet::from_bits(self.adj[a])
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in PartySet::from_bits(self.adj[a]).iter().filter(|&b| b > a) {
                out.push((a, b));
            }
        }
        out
    }

    /// `K^a = X_a Π_{b∈N_a} Z_b`.
    pub fn generator(&self, a: usize) -> PauliProduct {
        PauliProduct {
            n: self.n,
            x: 1 << a,
            z: self.adj[a],
            phase: 0,
        }
    }

    pub fn generators(&self) -> Vec<PauliProduct> {
        (0..self.n).map(|a| self.generator(a)).collect()
    }

    /// `σ_ν = Π_a (K^a)^{ν_a}` with its sign.
    pub fn stabilizer_element(&self, nu: u64) -> PauliProduct {
        let mut acc = PauliProduct::identity(self.n);
        for a in PartySet::from_bits(nu).iter() {
            acc = acc.mul(&self.generator(a));
        }
        acc
    }

    /// Support of `σ_ν` without tracking the sign.
    pub fn stabilizer_support(&self, nu: u64) -> PartySet {
        let z = PartySet::from_bits(nu)
            .iter()
            .fold(0u64, |acc, a| acc ^ self.adj[a]);
        PartySet::from_bits(nu | z)
    }

    /// Calls `f(ν, support(σ_ν))` for all `2^n` stabilizer elements in
    /// Gray-code order.
    pub fn for_each_stabilizer_support<F: FnMut(u64, PartySet)>(&self, mut f: F) {
        let (mut nu, mut z) = (0u64, 0u64);
        f(0, PartySet::EMPTY);
        for i in 1..(1u64 << self.n) {
            let bit = i.trailing_zeros() as usize;
            nu ^= 1 << bit;
            z ^= self.adj[bit];
            f(nu, PartySet::from_bits(nu | z));
        }
    }

    /// `log2` of the Schmidt rank of `|G⟩` across `(cut, complement)`: the
    /// GF(2) rank of the adjacency block between the two sides.
    pub fn schmidt_measure(&self, cut: PartySet) -> u32 {
        let other = cut.complement(self.n).bits();
        let mut rows: Vec<u64> = cut.iter().map(|a| self.adj[a] & other).collect();
        gf2_rank(&mut rows)
    }

    /// Amplitudes `(-1)^{#edges inside r} / √(2^n)` of `|G⟩`.
    pub fn state_vector(&self) -> Result<Vec<C64>> {
        if self.n > DENSE_MAX_QUBITS {
            return Err(Error::ResourceCap(format!(
                "dense graph state on {} qubits exceeds {DENSE_MAX_QUBITS}",
                self.n
            )));
        }
        let d = 1usize << self.n;
        let amp = 1.0 / (d as f64).sqrt();
        Ok((0..d as u64)
            .map(|r| {
                let m = reverse_bits(r, self.n);
                let twice_edges: u32 = PartySet::from_bits(m)
                    .iter()
                    .map(|a| (self.adj[a] & m).count_ones())
                    .sum();
                if (twice_edges / 2).is_multiple_of(2) {
                    C64::new(amp, 0.0)
                } else {
                    C64::new(-amp, 0.0)
                }
            })
            .collect())
    }
}

fn gf2_rank(rows: &mut [u64]) -> u32 {
    let mut rank = 0;
    let mut next = 0;
    while next < rows.len() {
        let pivot_row = rows[next..].iter().position(|&r| r != 0);
        let Some(off) = pivot_row else { break };
        rows.swap(next, next + off);
        let pivot = rows[next];
        let low = pivot & pivot.wrapping_neg();
        for r in rows.iter_mut().skip(next + 1) {
            if *r & low != 0 {
                *r ^= pivot;
            }
        }
        rank += 1;
        next += 1;
    }
    rank
}

/// `i^phase Π_a X_a^{x_a} Z_a^{z_a}` on `n` qubits, `X` to the left of `Z`
/// on each qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliProduct {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliProduct {
    pub fn identity(n: usize) -> Self {
        PauliProduct {
            n,
            x: 0,
            z: 0,
            phase: 0,
        }
    }

    pub fn from_bits(n: usize, x: u64, z: u64, phase: u8) -> Self {
        PauliProduct {
            n,
            x,
            z,
            phase: phase % 4,
        }
    }

    pub fn xbits(&self) -> u64 {
        self.x
    }

    pub fn zbits(&self) -> u64 {
        self.z
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> PartySet {
        PartySet::from_bits(self.x | self.z)
    }

    pub fn mul(&self, other: &PauliProduct) -> PauliProduct {
        // Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
        let swaps = (self.z & other.x).count_ones() as u8;
        PauliProduct {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + 2 * (swaps % 2)) % 4,
        }
    }

    pub fn commutes_with(&self, other: &PauliProduct) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// `±1` when the operator is `±` a hermitian Pauli string (`XZ = -iY`).
    pub fn sign(&self) -> Option<i8> {
        let y = (self.x & self.z).count_ones() % 4;
        match (self.phase as u32 + 4 - y) % 4 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// Column `r` holds a single entry, at row `r ⊕ x`.
    fn column(&self, r: u64) -> (u64, C64) {
        let xm = reverse_bits(self.x, self.n);
        let zm = reverse_bits(self.z, self.n);
        let mut v = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ][self.phase as usize];
        if (zm & r).count_ones() % 2 == 1 {
            v = -v;
        }
        (r ^ xm, v)
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.n > DENSE_MAX_QUBITS {
            return Err(Error::ResourceCap(format!(
                "{} qubits exceed {DENSE_MAX_QUBITS}",
                self.n
            )));
        }
        let d = 1usize << self.n;
        let mut m = CMatrix::zeros(d, d);
        for r in 0..d as u64 {
            let (row, v) = self.column(r);
            m[(row as usize, r as usize)] = v;
        }
        Ok(m)
    }

    /// `P m P†`, using that `P` is monomial.
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        let d = m.nrows();
        let cols: Vec<(u64, C64)> = (0..d as u64).map(|r| self.column(r)).collect();
        let mut out = CMatrix::zeros(d, d);
        for r in 0..d {
            let (r2, vr) = cols[r];
            for c in 0..d {
                let (c2, vc) = cols[c];
                out[(r2 as usize, c2 as usize)] = vr * m[(r, c)] * vc.conj();
            }
        }
        out
    }
}

impl fmt::Display for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign() {
            Some(1) => write!(f, "+")?,
            Some(_) => write!(f, "-")?,
            None => write!(f, "i^{}·", self.phase)?,
        }
        for a in 0..self.n {
            let c = match (self.x >> a & 1, self.z >> a & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `|S_G ∩ B_S|` for every `S`, indexed by bitmask.
pub fn stabilizer_support_counts(g: &Graph) -> Vec<u64> {
    let mut out = vec![0u64; 1 << g.n];
    g.for_each_stabilizer_support(|_, s| out[s.bits() as usize] += 1);
    out
}

/// `L_S(|G⟩⟨G|) = |S_G ∩ B_S|`, counted by enumerating the stabilizer.
pub fn graph_strength(g: &Graph, set: PartySet) -> Result<u64> {
    set.check(g.n)?;
    let mut count = 0;
    g.for_each_stabilizer_support(|_, s| {
        if s == set {
            count += 1
        }
    });
    Ok(count)
}

/// The same strength from Schmidt measures of all cuts inside `S`:
/// `Σ_{S'⊆S} (-1)^{|S|-|S'|} 2^{|S'| - E^{S'}}`.
pub fn graph_strength_schmidt(g: &Graph, set: PartySet) -> Result<i64> {
    set.check(g.n)?;
    let mut acc = 0i64;
    for sub in set.subsets() {
        let e = if sub.is_empty() {
            0
        } else {
            g.schmidt_measure(sub)
        };
        let term = 1i64 << (sub.len() as u32 - e);
        if (set.len() - sub.len()).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// `ρ = |G⟩⟨G|`.
pub fn graph_state_dense(g: &Graph) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(&g.state_vector()?, vec![2; g.n])
}

/// `(1/d) Σ_ν σ_ν`, the stabilizer form of `|G⟩⟨G|`.
pub fn stabilizer_sum_dense(g: &Graph) -> Result<CMatrix> {
    if g.n > DENSE_MAX_QUBITS {
        return Err(Error::ResourceCap(format!(
            "{} qubits exceed {DENSE_MAX_QUBITS}",
            g.n
        )));
    }
    let d = 1usize << g.n;
    let mut out = CMatrix::zeros(d, d);
    for nu in 0..(1u64 << g.n) {
        let p = g.stabilizer_element(nu);
        for r in 0..d as u64 {
            let (row, v) = p.column(r);
            out[(row as usize, r as usize)] += v;
        }
    }
    Ok(out / C64::new(d as f64, 0.0))
}

/// Probability weights over the `2^n` graph-basis states, indexed by `μ`
/// with party 1 as the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalWeights {
    n: usize,
    p: Vec<f64>,
}

/// Weights in the basis of the star graph (GHZ basis up to local unitaries).
pub type GhzDiagonalWeights = DiagonalWeights;

impl DiagonalWeights {
    pub fn new(n: usize, p: Vec<f64>) -> Result<Self> {
        if n == 0 || n > 40 {
            return Err(Error::InvalidParameter(format!(
                "qubit count {n} outside 1..=40"
            )));
        }
        if p.len() != 1 << n {
            return Err(Error::Shape(format!(
                "{} weights for {n} qubits, need {}",
                p.len(),
                1u64 << n
            )));
        }
        if let Some((k, w)) = p
            .iter()
            .enumerate()
            .find(|(_, &w)| w.is_nan() || w < -1e-12)
        {
            return Err(Error::InvalidParameter(format!(
                "weight p_{k} = {w} is negative"
            )));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(DiagonalWeights { n, p })
    }

    /// All weight on `μ = 0`, the graph state itself.
    pub fn pure(n: usize) -> Result<Self> {
        let mut p = vec![0.0; 1 << n];
        p[0] = 1.0;
        DiagonalWeights::new(n, p)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        let len = 1usize << n;
        DiagonalWeights::new(n, vec![1.0 / len as f64; len])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.p
    }

    /// `tr(ρ²) = Σ p_μ²`.
    pub fn purity(&self) -> f64 {
        self.p.iter().map(|w| w * w).sum()
    }

    /// `Σ_μ (-1)^{μ·k} p_μ` for every `k`.
    pub fn transform(&self) -> Vec<f64> {
        let mut t = self.p.clone();
        fwht(&mut t);
        t
    }
}

fn check_sizes(g: &Graph, w: &DiagonalWeights) -> Result<()> {
    if g.n != w.n {
        return Err(Error::Shape(format!(
            "graph on {} vertices, weights for {} qubits",
            g.n, w.n
        )));
    }
    Ok(())
}

/// `L_S(ρ_G) = Σ_{σ_ν ∈ S_G ∩ B_S} (Σ_μ (-1)^{ν·μ} p_μ)²`.
pub fn graph_diagonal_strength(g: &Graph, w: &DiagonalWeights, set: PartySet) -> Result<f64> {
    check_sizes(g, w)?;
    set.check(g.n)?;
    let t = w.transform();
    let mut acc = 0.0;
    g.for_each_stabilizer_support(|nu, s| {
        if s == set {
            let v = t[reverse_bits(nu, g.n) as usize];
            acc += v * v;
        }
    });
    Ok(acc)
}

/// [`graph_diagonal_strength`] for every subset, indexed by bitmask.
pub fn graph_diagonal_strengths(g: &Graph, w: &DiagonalWeights) -> Result<Vec<f64>> {
    check_sizes(g, w)?;
    let t = w.transform();
    let mut out = vec![0.0; 1 << g.n];
    g.for_each_stabilizer_support(|nu, s| {
        let v = t[reverse_bits(nu, g.n) as usize];
        out[s.bits() as usize] += v * v;
    });
    Ok(out)
}

/// `Σ_μ p_μ |ψ_μ⟩⟨ψ_μ|` with `|ψ_μ⟩ = Z^μ |G⟩`.
pub fn graph_diagonal_dense(g: &Graph, w: &DiagonalWeights) -> Result<DensityMatrix> {
    check_sizes(g, w)?;
    let psi = g.state_vector()?;
    let t = w.transform();
    let d = psi.len();
    let data = CMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj() * t[r ^ c]);
    DensityMatrix::new(data, vec![2; g.n])
}

/// Columns are the graph-basis states `|ψ_μ⟩` in `μ` order.
pub fn graph_basis(g: &Graph) -> Result<CMatrix> {
    let psi = g.state_vector()?;
    let d = psi.len();
    Ok(CMatrix::from_fn(d, d, |r, mu| {
        if (r & mu).count_ones() % 2 == 0 {
            psi[r]
        } else {
            -psi[r]
        }
    }))
}

/// `⟨ψ_μ|ρ|ψ_μ⟩` for every `μ`.
pub fn graph_basis_weights(rho: &DensityMatrix, g: &Graph) -> Result<Vec<f64>> {
    if rho.dims() != vec![2; g.n].as_slice() {
        return Err(Error::Shape("state is not on the graph's qubits".into()));
    }
    let b = graph_basis(g)?;
    let m = b.adjoint() * rho.data() * &b;
    Ok(m.diagonal().iter().map(|z| z.re).collect())
}

/// Applies `D_i(ρ) = (ρ + K^i ρ K^i)/2` for every vertex in turn.
pub fn graph_depolarize(rho: &DensityMatrix, g: &Graph) -> Result<DensityMatrix> {
    if rho.dims() != vec![2; g.n].as_slice() {
        return Err(Error::Shape("state is not on the graph's qubits".into()));
    }
    if g.n > DENSE_MAX_QUBITS {
        return Err(Error::ResourceCap(format!(
            "{} qubits exceed {DENSE_MAX_QUBITS}",
            g.n
        )));
    }
    let half = C64::new(0.5, 0.0);
    let mut m = rho.data().clone();
    for k in g.generators() {
        m = (&m + k.conjugate(&m)) * half;
    }
    DensityMatrix::new(m, rho.dims().to_vec())
}
