//! GHZ, GHZ-diagonal and Werner-class states.
//!
//! GHZ-diagonal weights live in the basis of the star graph centered on
//! party 1. The leading bit of `μ` is the phase, the remaining `n-1` bits
//! are the flip pattern of parties `2..n`.

use std::f64::consts::FRAC_1_SQRT_2;

use super::graph::{graph_diagonal_strength, DiagonalWeights, Graph};
use super::DENSE_MAX_QUBITS;
use crate::basis::PartySet;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::state::DensityMatrix;

fn even(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        0.0
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "GHZ needs n >= 2, got {n}"
        )));
    }
    Ok(())
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_state(n: usize) -> Result<DensityMatrix> {
    check_n(n)?;
    if n > DENSE_MAX_QUBITS {
        return Err(Error::ResourceCap(format!(
            "{n} qubits exceed {DENSE_MAX_QUBITS}"
        )));
    }
    let mut v = vec![ZERO; 1 << n];
    v[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    v[(1 << n) - 1] = C64::new(FRAC_1_SQRT_2, 0.0);
    DensityMatrix::from_pure(&v, vec![2; n])
}

/// `L_P = 2^{n-1} + δ_{n even}`, `L_S = δ_{|S| even}` for `S ⊊ P`.
pub fn ghz_strength(n: usize, set: PartySet) -> Result<f64> {
    check_n(n)?;
    set.check(n)?;
    Ok(if set == PartySet::full(n) {
        2f64.powi(n as i32 - 1) + even(n)
    } else {
        even(set.len())
    })
}

/// Full-party strength of a GHZ-diagonal state:
/// `2^{n-1} Σ (p_μ - p_{μ+h})² + δ_{n even} (Σ (p_μ + p_{μ+h}) (-1)^{|μ|})²`
/// with `h = 2^{n-1}` and `μ < h`.
pub fn ghz_diagonal_full_strength(w: &DiagonalWeights) -> f64 {
    let n = w.n();
    let h = 1usize << (n - 1);
    let p = w.weights();
    let diff: f64 = (0..h).map(|mu| (p[mu] - p[mu + h]).powi(2)).sum();
    let mut out = h as f64 * diff;
    if n.is_multiple_of(2) {
        let alt: f64 = (0..h)
            .map(|mu| {
                let s = p[mu] + p[mu + h];
                if mu.count_ones() % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .sum();
        out += alt * alt;
    }
    out
}

pub fn ghz_diagonal_strength(w: &DiagonalWeights, set: PartySet) -> Result<f64> {
    check_n(w.n())?;
    set.check(w.n())?;
    if set == PartySet::full(w.n()) {
        return Ok(ghz_diagonal_full_strength(w));
    }
    let l = graph_diagonal_strength(&Graph::star(w.n())?, w, set)?;
    debug_assert!(
        set.is_empty() || l <= 1.0 + 1e-9,
        "GHZ-diagonal reduction with L_S = {l}"
    );
    Ok(l)
}

/// `p |GHZ⟩⟨GHZ| + (1-p) 1/d` as GHZ-diagonal weights.
pub fn noisy_ghz_weights(n: usize, p: f64) -> Result<DiagonalWeights> {
    check_n(n)?;
    check_probability(p)?;
    let len = 1usize << n;
    let mut w = vec![(1.0 - p) / len as f64; len];
    w[0] += p;
    DiagonalWeights::new(n, w)
}

pub fn noisy_ghz_dense(n: usize, p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    let g = ghz_state(n)?;
    let mm = DensityMatrix::maximally_mixed(vec![2; n])?;
    DensityMatrix::mixture(&[(p, &g), (1.0 - p, &mm)])
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "mixing probability {p} outside [0, 1]"
        )));
    }
    Ok(())
}

/// `(criterion, NPPT)` thresholds on `p` for noisy GHZ:
/// `(2^{n-1} + δ_{n even})^{-1/2}` and `(2^{n-1} + 1)^{-1}`.
pub fn noisy_ghz_thresholds(n: usize) -> Result<(f64, f64)> {
    check_n(n)?;
    let h = 2f64.powi(n as i32 - 1);
    Ok(((h + even(n)).powf(-0.5), 1.0 / (h + 1.0)))
}

/// Upper bound `2^{n-2k+1}` on `L_P` for k-separable Werner-class states
/// with `n` odd.
///
/// A k-separable state has at least `m = 2^{k-1} - 1` positive partial
/// transposes, so this is [`m_ppt_strength_bound`] at that `m`. It does not
/// extend to arbitrary GHZ-diagonal states: `(1 + X⊗Z⊗Z)/8` is fully
/// separable with `L_P = 1 > 2^{-2}`.
pub fn k_separability_bound(n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={n}")));
    }
    Ok(2f64.powi(n as i32 - 2 * k as i32 + 1))
}

/// Whether `l_p` is compatible with k-separability of a Werner-class state.
pub fn k_separability_compatible(n: usize, k: usize, l_p: f64, slack: f64) -> Result<bool> {
    Ok(l_p <= k_separability_bound(n, k)? + slack)
}

/// `Δ_c = 1/(m+1)` for states with at least `m` positive partial transposes.
pub fn m_ppt_delta(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    Ok(1.0 / (m as f64 + 1.0))
}

/// `2^{n-1} Δ_c²`, the bound on the `Δ` part of `L_P` for Werner-class
/// states with at least `m` PPT cuts. For odd `n` this bounds `L_P` itself.
pub fn m_ppt_strength_bound(n: usize, m: usize) -> Result<f64> {
    check_n(n)?;
    Ok(2f64.powi(n as i32 - 1) * m_ppt_delta(m)?.powi(2))
}

/// Werner-class GHZ-diagonal state: `p_i = p_{i+h}` for `i ≥ 1` and
/// `p_0 = p_h + Δ`, with `h = 2^{n-1}`.
///
/// `base[i]` holds `p_i` for `i ≥ 1` and `base[0]` holds `p_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct WernerClassState {
    n: usize,
    delta: f64,
    base: Vec<f64>,
}

impl WernerClassState {
    pub fn new(n: usize, delta: f64, base: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        let h = 1usize << (n - 1);
        if base.len() != h {
            return Err(Error::Shape(format!(
                "{} base weights, need {h}",
                base.len()
            )));
        }
        if base.iter().any(|&b| b.is_nan() || b < 0.0) || base[0] + delta < 0.0 {
            return Err(Error::InvalidParameter(
                "negative weight in Werner-class state".into(),
            ));
        }
        let total = 2.0 * base.iter().sum::<f64>() + delta;
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(WernerClassState { n, delta, base })
    }

    /// Spreads `1 - Δ` evenly over all `2^n` labels and adds `Δ` to `p_0`.
    pub fn uniform(n: usize, delta: f64) -> Result<Self> {
        check_n(n)?;
        let len = (1usize << n) as f64;
        WernerClassState::new(n, delta, vec![(1.0 - delta) / len; 1 << (n - 1)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn weights(&self) -> Result<DiagonalWeights> {
        let h = self.base.len();
        let mut p = Vec::with_capacity(2 * h);
        p.extend_from_slice(&self.base);
        p[0] += self.delta;
        p.extend_from_slice(&self.base);
        DiagonalWeights::new(self.n, p)
    }

    /// `L_P = 2^{n-1} Δ² + δ_{n even} (2 Σ_i (-1)^{|i|} p_i + Δ)²`.
    pub fn strength(&self) -> f64 {
        let h = self.base.len();
        let mut out = h as f64 * self.delta * self.delta;
        if self.n.is_multiple_of(2) {
            let alt: f64 = self
                .base
                .iter()
                .enumerate()
                .map(|(i, &p)| if i.count_ones() % 2 == 0 { p } else { -p })
                .sum();
            out += (2.0 * alt + self.delta).powi(2);
        }
        out
    }

    /// `ρ^{T_A} ≥ 0 ⇔ |Δ| ≤ 2 p_k`, where `k` is the flip pattern of the side
    /// of the cut that does not contain party 1.
    pub fn ppt(&self, cut: PartySet) -> Result<bool> {
        cut.check(self.n)?;
        if cut.is_empty() || cut == PartySet::full(self.n) {
            return Err(Error::InvalidCut(cut.to_string()));
        }
        let side = if cut.contains(0) {
            cut.complement(self.n)
        } else {
            cut
        };
        let k = side
            .iter()
            .fold(0usize, |acc, a| acc | 1 << (self.n - 1 - a));
        Ok(self.delta.abs() <= 2.0 * self.base[k] + 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{all_strengths_from_coeffs, strength_from_purities};
    use crate::linalg::{min_eigenvalue, CMatrix};
    use crate::structured::graph::graph_diagonal_dense;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ghz_values() {
        let s: f64 = PartySet::full(3)
            .subsets()
            .skip(1)
            .map(|s| ghz_strength(3, s).unwrap())
            .sum();
        assert_eq!(ghz_strength(3, PartySet::full(3)).unwrap(), 4.0);
        assert_eq!(s, 7.0);
        assert_eq!(ghz_strength(4, PartySet::full(4)).unwrap(), 9.0);
        assert_eq!(ghz_strength(2, PartySet::full(2)).unwrap(), 3.0);
        let dense = all_strengths_from_coeffs(&ghz_state(2).unwrap().expand().unwrap());
        assert!((dense[3] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_diagonal_examples() {
        for n in 2..=6 {
            let pure = DiagonalWeights::pure(n).unwrap();
            assert!(
                (ghz_diagonal_strength(&pure, PartySet::full(n)).unwrap()
                    - ghz_strength(n, PartySet::full(n)).unwrap())
                .abs()
                    < 1e-12
            );
            let uni = DiagonalWeights::uniform(n).unwrap();
            assert!(
                ghz_diagonal_strength(&uni, PartySet::full(n))
                    .unwrap()
                    .abs()
                    < 1e-15
            );
        }
        let mut p = vec![0.0; 8];
        p[0] = 0.7;
        p[4] = 0.3;
        let w = DiagonalWeights::new(3, p).unwrap();
        let l = ghz_diagonal_strength(&w, PartySet::full(3)).unwrap();
        assert!((l - 0.64).abs() < 1e-12);
        let dense = graph_diagonal_dense(&Graph::star(3).unwrap(), &w).unwrap();
        assert!((strength_from_purities(&dense, PartySet::full(3)).unwrap() - 0.64).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_wht_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2..=7 {
            let mut p: Vec<f64> = (0..1 << n).map(|_| rng.random::<f64>()).collect();
            let t: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= t);
            let w = DiagonalWeights::new(n, p).unwrap();
            let star = Graph::star(n).unwrap();
            let a = ghz_diagonal_full_strength(&w);
            let b = graph_diagonal_strength(&star, &w, PartySet::full(n)).unwrap();
            assert!((a - b).abs() < 1e-12, "n={n}");
            for s in PartySet::full(n).subsets().skip(1) {
                if s != PartySet::full(n) {
                    assert!(ghz_diagonal_strength(&w, s).unwrap() <= 1.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn noisy_ghz_examples() {
        let (c, p) = noisy_ghz_thresholds(3).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        assert!((p - 0.2).abs() < 1e-15);
        let (c4, _) = noisy_ghz_thresholds(4).unwrap();
        assert!((c4 - 1.0 / 3.0).abs() < 1e-15);
        let w = noisy_ghz_weights(3, 0.6).unwrap();
        assert!((ghz_diagonal_strength(&w, PartySet::full(3)).unwrap() - 1.44).abs() < 1e-12);
        let dense = noisy_ghz_dense(3, 0.6).unwrap();
        assert!((strength_from_purities(&dense, PartySet::full(3)).unwrap() - 1.44).abs() < 1e-12);
        assert!(noisy_ghz_weights(3, 1.5).is_err());
    }

    #[test]
    fn separability_bounds() {
        assert_eq!(k_separability_bound(4, 2).unwrap(), 2.0);
        for n in 2..8 {
            assert_eq!(k_separability_bound(n, 1).unwrap(), 2f64.powi(n as i32 - 1));
        }
        assert_eq!(m_ppt_delta(1).unwrap(), 0.5);
        assert!(k_separability_compatible(4, 2, 2.0, 1e-9).unwrap());
        assert!(!k_separability_compatible(4, 2, 2.1, 1e-9).unwrap());
        assert!(m_ppt_delta(0).is_err());
    }

    #[test]
    fn k_separability_scope() {
        for n in [3, 5, 7] {
            for k in 2..=n {
                let m = (1usize << (k - 1)) - 1;
                let a = k_separability_bound(n, k).unwrap();
                assert!((a - m_ppt_strength_bound(n, m).unwrap()).abs() < 1e-15);
            }
        }
        // fully separable, GHZ-diagonal, yet above the 3-separable bound
        let mut p = vec![0.0; 8];
        p[..4].fill(0.25);
        let w = DiagonalWeights::new(3, p).unwrap();
        let l = ghz_diagonal_full_strength(&w);
        assert!((l - 1.0).abs() < 1e-15);
        assert!(!k_separability_compatible(3, 3, l, 1e-9).unwrap());
        let rho = graph_diagonal_dense(&Graph::star(3).unwrap(), &w).unwrap();
        let x = crate::basis::local_basis(2).unwrap()[1].clone();
        let z = crate::basis::local_basis(2).unwrap()[3].clone();
        let id = CMatrix::identity(2, 2);
        let expect = (crate::linalg::kron_all([&id, &id, &id])
            + crate::linalg::kron_all([&x, &z, &z]))
            / C64::new(8.0, 0.0);
        assert!(crate::linalg::max_abs_diff(rho.data(), &expect) < 1e-14);
    }

    #[test]
    fn werner_strength_examples() {
        let w = WernerClassState::uniform(3, 0.0).unwrap();
        assert_eq!(w.strength(), 0.0);
        let w = WernerClassState::uniform(3, 0.5).unwrap();
        assert!((w.strength() - 1.0).abs() < 1e-15);
        let dense = graph_diagonal_dense(&Graph::star(3).unwrap(), &w.weights().unwrap()).unwrap();
        assert!((strength_from_purities(&dense, PartySet::full(3)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn werner_closed_form_matches_ghz_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 2..=6 {
            for _ in 0..5 {
                let h = 1usize << (n - 1);
                let mut raw: Vec<f64> = (0..=h).map(|_| rng.random::<f64>()).collect();
                let total = 2.0 * raw[..h].iter().sum::<f64>() + raw[h];
                raw.iter_mut().for_each(|x| *x /= total);
                let delta = raw.pop().unwrap();
                let w = WernerClassState::new(n, delta, raw).unwrap();
                let via = ghz_diagonal_full_strength(&w.weights().unwrap());
                assert!((w.strength() - via).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn werner_ppt_matches_eigenvalues_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 3;
        let star = Graph::star(n).unwrap();
        for _ in 0..30 {
            let h = 1usize << (n - 1);
            let mut raw: Vec<f64> = (0..=h).map(|_| rng.random::<f64>()).collect();
            raw[h] *= 3.0;
            let total = 2.0 * raw[..h].iter().sum::<f64>() + raw[h];
            raw.iter_mut().for_each(|x| *x /= total);
            let delta = raw.pop().unwrap();
            let w = WernerClassState::new(n, delta, raw).unwrap();
            let dense = graph_diagonal_dense(&star, &w.weights().unwrap()).unwrap();
            for m in 1..(1u64 << n) - 1 {
                let cut = PartySet::from_bits(m);
                let ev = min_eigenvalue(&dense.partial_transpose(cut).unwrap());
                assert_eq!(
                    w.ppt(cut).unwrap(),
                    ev >= -1e-10,
                    "cut {cut}, Δ={delta}, λ={ev}"
                );
            }
        }
    }
}
