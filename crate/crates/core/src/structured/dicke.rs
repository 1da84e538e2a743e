//! Dicke states `|n,m⟩`: symmetric superpositions with `m` qubits in `|0⟩`.
//!
//! The reduction of `|n,m⟩` to any `k` qubits is diagonal in the `k`-qubit
//! Dicke basis with hypergeometric weights
//! `w_j = C(k,j) C(n-k,m-j) / C(n,m)`, so `tr(ρ_k²) = Σ_j w_j²` and `L_S`
//! depends only on `|S|`.

use super::DENSE_MAX_QUBITS;
use crate::error::{Error, Result};
use crate::invariants::EXCEED_SLACK;
use crate::linalg::{C64, ZERO};
use crate::state::DensityMatrix;

fn binom(n: u64, k: u64) -> Option<i128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as i128)? / (i as i128 + 1);
    }
    Some(acc)
}

fn binom_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DickeState {
    n: usize,
    m: usize,
}

impl DickeState {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Dicke state needs n >= 1".into()));
        }
        if m > n {
            return Err(Error::InvalidParameter(format!(
                "excitations m = {m} exceed n = {n}"
            )));
        }
        Ok(DickeState { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `Σ_j (C(k,j) C(n-k,m-j))²`, exact when it fits.
    fn purity_numerator(&self, k: usize) -> Option<i128> {
        let (n, m, k) = (self.n as u64, self.m as u64, k as u64);
        let mut acc: i128 = 0;
        for j in 0..=k.min(m) {
            let t = binom(k, j)?.checked_mul(binom(n - k, m - j)?)?;
            acc = acc.checked_add(t.checked_mul(t)?)?;
        }
        Some(acc)
    }

    /// `tr(ρ_k²)` of the reduction to any `k` qubits.
    pub fn reduced_purity(&self, k: usize) -> f64 {
        let (n, m) = (self.n as u64, self.m as u64);
        let total = binom_f64(n, m);
        (0..=k.min(self.m) as u64)
            .map(|j| {
                let w = binom_f64(k as u64, j) * binom_f64(n - k as u64, m - j) / total;
                w * w
            })
            .sum()
    }

    /// `L_S` for any `S` with `|S| = s`.
    pub fn strength(&self, s: usize) -> Result<f64> {
        if s > self.n {
            return Err(Error::InvalidParameter(format!(
                "subset size {s} exceeds n = {}",
                self.n
            )));
        }
        if let Some(v) = self.strength_exact(s) {
            return Ok(v);
        }
        Ok((0..=s)
            .map(|k| {
                let sign = if (s - k).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * binom_f64(s as u64, k as u64) * 2f64.powi(k as i32) * self.reduced_purity(k)
            })
            .sum())
    }

    fn strength_exact(&self, s: usize) -> Option<f64> {
        let denom = binom(self.n as u64, self.m as u64)?;
        let denom = denom.checked_mul(denom)?;
        let mut num: i128 = 0;
        for k in 0..=s {
            let t = binom(s as u64, k as u64)?
                .checked_mul(1i128.checked_shl(k as u32)?)?
                .checked_mul(self.purity_numerator(k)?)?;
            num = if (s - k).is_multiple_of(2) {
                num.checked_add(t)?
            } else {
                num.checked_sub(t)?
            };
        }
        // exact integer part, then the remainder, keeps full f64 precision
        let q = num / denom;
        let r = num % denom;
        Some(q as f64 + r as f64 / denom as f64)
    }

    pub fn state_vector(&self) -> Result<Vec<C64>> {
        if self.n > DENSE_MAX_QUBITS {
            return Err(Error::ResourceCap(format!(
                "{} qubits exceed {DENSE_MAX_QUBITS}",
                self.n
            )));
        }
        let ones = (self.n - self.m) as u32;
        let amp = C64::new(1.0 / binom_f64(self.n as u64, self.m as u64).sqrt(), 0.0);
        Ok((0..1u64 << self.n)
            .map(|r| if r.count_ones() == ones { amp } else { ZERO })
            .collect())
    }
}

pub fn dicke_state(n: usize, m: usize) -> Result<DensityMatrix> {
    let d = DickeState::new(n, m)?;
    DensityMatrix::from_pure(&d.state_vector()?, vec![2; n])
}

pub fn dicke_strength(n: usize, m: usize, s: usize) -> Result<f64> {
    DickeState::new(n, m)?.strength(s)
}

/// Smallest subset size at which the W state (`m = 1`) exceeds the
/// pure-product bound, or `None` if no size does.
pub fn w_detection_threshold(n: usize) -> Result<Option<usize>> {
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    let w = DickeState::new(n, 1)?;
    for s in 1..=n {
        if w.strength(s)? > 1.0 + EXCEED_SLACK {
            return Ok(Some(s));
        }
    }
    Ok(None)
}
