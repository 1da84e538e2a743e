//! Polynomial invariants: complete contractions of correlation tensors and
//! expectation values of observables on `k` copies of a state.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{basis_element, enumerate_b_s, PartySet};
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, kron, kron_all, max_abs_diff, CMatrix, I, ONE, ZERO};
use crate::state::{random_local_unitary_with, CorrelationTensor, DensityMatrix, HERMITICITY_TOL};

/// Largest total dimension `D^k` a dense k-copy operator may have.
pub const KCOPY_MAX_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Slot {
    Zero,
    Var(String),
}

/// Product of tensor factors where every summation variable occurs twice,
/// both times at the same party position. Variables at party `a` run over
/// `1..d_a²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionPattern {
    factors: Vec<Vec<Slot>>,
    // compiled form: per factor, per position, variable id or None
    slots: Vec<Vec<Option<usize>>>,
    var_party: Vec<usize>,
    var_names: Vec<String>,
}

impl ContractionPattern {
    pub fn new(factors: Vec<Vec<Slot>>) -> Result<Self> {
        let n = factors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Pattern("pattern has no factors".into()))?;
        if n == 0 {
            return Err(Error::Pattern("factors have no slots".into()));
        }
        let mut seen: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for (f, factor) in factors.iter().enumerate() {
            if factor.len() != n {
                return Err(Error::Pattern(format!(
                    "factor {} has {} slots, expected {n}",
                    f + 1,
                    factor.len()
                )));
            }
            for (pos, slot) in factor.iter().enumerate() {
                let Slot::Var(name) = slot else { continue };
                let e = seen.entry(name.as_str()).or_insert((pos, 0));
                if e.0 != pos {
                    return Err(Error::Pattern(format!(
                        "variable {name} used at party {} and party {}",
                        e.0 + 1,
                        pos + 1
                    )));
                }
                e.1 += 1;
            }
        }
        let mut ordered: Vec<(usize, &str)> = Vec::new();
        for (name, (pos, count)) in &seen {
            if *count != 2 {
                return Err(Error::Pattern(format!(
                    "variable {name} occurs {count} times, expected 2"
                )));
            }
            ordered.push((*pos, *name));
        }
        // sorted by party so the summation runs in tensor order
        ordered.sort();
        let mut ids = BTreeMap::new();
        let mut var_party = Vec::new();
        let mut var_names = Vec::new();
        for (pos, name) in ordered {
            ids.insert(name, var_party.len());
            var_party.push(pos);
            var_names.push(name.to_string());
        }
        let slots = factors
            .iter()
            .map(|factor| {
                factor
                    .iter()
                    .map(|s| match s {
                        Slot::Zero => None,
                        Slot::Var(name) => Some(ids[name.as_str()]),
                    })
                    .collect()
            })
            .collect();
        Ok(ContractionPattern {
            factors,
            slots,
            var_party,
            var_names,
        })
    }

    /// Parses `0,j,k; i,j,0; i,0,k`.
    pub fn parse(text: &str) -> Result<Self> {
        let factors = text
            .split(';')
            .map(|factor| {
                factor
                    .split(',')
                    .map(|tok| {
                        let tok = tok.trim();
                        if tok == "0" {
                            Ok(Slot::Zero)
                        } else if !tok.is_empty()
                            && tok.chars().all(|c| c.is_alphanumeric() || c == '_')
                        {
                            Ok(Slot::Var(tok.to_string()))
                        } else {
                            Err(Error::Pattern(format!("bad slot {tok:?} in {text:?}")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ContractionPattern::new(factors)
    }

    /// `Σ c_σ²` over the indices supported exactly on `set`.
    pub fn strength(set: PartySet, n: usize) -> Result<Self> {
        set.check(n)?;
        let factor: Vec<Slot> = (0..n)
            .map(|a| {
                if set.contains(a) {
                    Slot::Var(format!("v{}", a + 1))
                } else {
                    Slot::Zero
                }
            })
            .collect();
        ContractionPattern::new(vec![factor.clone(), factor])
    }

    /// Random valid pattern on `n` parties with `degree` factors: at each
    /// position a random set of disjoint factor pairs is linked.
    pub fn random<R: Rng + ?Sized>(n: usize, degree: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || degree == 0 {
            return Err(Error::Pattern(
                "need at least one party and one factor".into(),
            ));
        }
        let mut factors = vec![Vec::with_capacity(n); degree];
        let mut next = 0;
        for _ in 0..n {
            let mut order: Vec<usize> = (0..degree).collect();
            order.shuffle(rng);
            let pairs = rng.random_range(0..=degree / 2);
            let mut column = vec![Slot::Zero; degree];
            for pair in order.chunks(2).take(pairs) {
                let name = format!("x{next}");
                next += 1;
                column[pair[0]] = Slot::Var(name.clone());
                column[pair[1]] = Slot::Var(name);
            }
            for (factor, slot) in factors.iter_mut().zip(column) {
                factor.push(slot);
            }
        }
        ContractionPattern::new(factors)
    }

    pub fn parties(&self) -> usize {
        self.factors[0].len()
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Vec<Slot>] {
        &self.factors
    }

    pub fn variables(&self) -> &[String] {
        &self.var_names
    }

    pub fn check(&self, dims: &[usize]) -> Result<()> {
        if dims.len() != self.parties() {
            return Err(Error::Pattern(format!(
                "pattern has {} slots per factor, tensor has {} parties",
                self.parties(),
                dims.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ContractionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, factor) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            for (p, slot) in factor.iter().enumerate() {
                if p > 0 {
                    write!(f, ",")?;
                }
                match slot {
                    Slot::Zero => write!(f, "0")?,
                    Slot::Var(name) => write!(f, "{name}")?,
                }
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for ContractionPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ContractionPattern::parse(s)
    }
}

/// Full sum over all variable assignments of the product of the factors.
pub fn contract(t: &CorrelationTensor, pattern: &ContractionPattern) -> Result<f64> {
    let dims = t.dims();
    pattern.check(dims)?;
    let n = dims.len();
    let ranges: Vec<usize> = pattern
        .var_party
        .iter()
        .map(|&a| dims[a] * dims[a] - 1)
        .collect();
    // radix of each position in the linear index
    let mut stride = vec![1usize; n];
    for a in (0..n.saturating_sub(1)).rev() {
        stride[a] = stride[a + 1] * dims[a + 1] * dims[a + 1];
    }
    let mut assign = vec![1usize; ranges.len()];
    let mut total = 0.0;
    loop {
        let mut prod = 1.0;
        for factor in &pattern.slots {
            let lin: usize = factor
                .iter()
                .enumerate()
                .map(|(a, s)| s.map_or(0, |v| assign[v] * stride[a]))
                .sum();
            prod *= t.get_linear(lin);
            if prod == 0.0 {
                break;
            }
        }
        total += prod;
        let mut v = assign.len();
        loop {
            if v == 0 {
                return Ok(total);
            }
            v -= 1;
            assign[v] += 1;
            if assign[v] <= ranges[v] {
                break;
            }
            assign[v] = 1;
        }
    }
}

/// `Σ_{i,j,k>0} c_{i00} c_{0j0} c_{00k} c_{ijk}`.
pub fn x_abc(t: &CorrelationTensor) -> Result<f64> {
    if t.dims().len() != 3 {
        return Err(Error::Shape(format!(
            "x_abc needs 3 parties, got {}",
            t.dims().len()
        )));
    }
    contract(t, &ContractionPattern::parse("i,0,0; 0,j,0; 0,0,k; i,j,k")?)
}

/// Hermitian operator on `k` copies of a state space with local dimensions `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct KCopyObservable {
    k: usize,
    dims: Vec<usize>,
    matrix: CMatrix,
}

fn copy_dim(dims: &[usize], k: usize) -> Result<usize> {
    let d = dims.iter().try_fold(1usize, |acc, &x| acc.checked_mul(x));
    let total = d.and_then(|d| (0..k).try_fold(1usize, |acc, _| acc.checked_mul(d)));
    match total {
        Some(t) if t <= KCOPY_MAX_DIM => Ok(t),
        _ => Err(Error::ResourceCap(format!(
            "{k} copies of dims {dims:?} exceed the dense limit {KCOPY_MAX_DIM}"
        ))),
    }
}

impl KCopyObservable {
    pub fn new(k: usize, dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let total = copy_dim(&dims, k)?;
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::Shape(format!(
                "operator is {}x{}, {k} copies need {total}x{total}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let h = hermiticity_defect(&matrix);
        if h > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "observable hermiticity defect {h:e}"
            )));
        }
        Ok(KCopyObservable { k, dims, matrix })
    }

    pub fn identity(k: usize, dims: Vec<usize>) -> Result<Self> {
        let total = copy_dim(&dims, k)?;
        KCopyObservable::new(k, dims, CMatrix::identity(total, total))
    }

    /// Swap of two copies.
    pub fn swap(dims: Vec<usize>) -> Result<Self> {
        let total = copy_dim(&dims, 2)?;
        let d = dims.iter().product::<usize>();
        let mut m = CMatrix::zeros(total, total);
        for a in 0..d {
            for b in 0..d {
                m[(a * d + b, b * d + a)] = ONE;
            }
        }
        KCopyObservable::new(2, dims, m)
    }

    pub fn copies(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// `tr(M ρ^{⊗k})`, summing `M[r,c] Π_j ρ[c_j, r_j]` without forming `ρ^{⊗k}`.
pub fn evaluate_k_copy(m: &KCopyObservable, rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != m.dims() {
        return Err(Error::Shape(format!(
            "observable acts on dims {:?}, state has {:?}",
            m.dims(),
            rho.dims()
        )));
    }
    let d = rho.dim();
    let total = m.matrix.nrows();
    let data = rho.data();
    let digits = |mut x: usize| {
        let mut out = vec![0usize; m.k];
        for j in (0..m.k).rev() {
            out[j] = x % d;
            x /= d;
        }
        out
    };
    let all: Vec<Vec<usize>> = (0..total).map(digits).collect();
    let mut acc = ZERO;
    for (r, rd) in all.iter().enumerate() {
        for (c, cd) in all.iter().enumerate() {
            let entry = m.matrix[(r, c)];
            if entry == ZERO {
                continue;
            }
            let mut p = entry;
            for j in 0..m.k {
                p *= data[(cd[j], rd[j])];
            }
            acc += p;
        }
    }
    if acc.im.abs() > 1e-10 {
        return Err(Error::NumericalConsistency {
            index: "tr(M rho^k)".into(),
            residue: acc.im,
        });
    }
    Ok(acc.re)
}

/// `M_S = Σ_{σ∈B_S} σ⊗σ`, whose two-copy expectation is `L_S`.
pub fn m_s_observable(set: PartySet, dims: &[usize]) -> Result<KCopyObservable> {
    set.check(dims.len())?;
    let total = copy_dim(dims, 2)?;
    let mut m = CMatrix::zeros(total, total);
    for idx in enumerate_b_s(set, dims) {
        let s = basis_element(&idx, dims)?;
        m += kron(&s, &s);
    }
    KCopyObservable::new(2, dims.to_vec(), m)
}

/// Samples local unitaries `U = ⊗U_a` and checks `[M, U^{⊗k}] = 0` to 1e-9.
/// A pass is evidence, not proof.
pub fn commutant_check(m: &KCopyObservable, trials: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let locals = random_local_unitary_with(m.dims(), &mut rng);
        let u = kron_all(locals.iter());
        let w = kron_all(std::iter::repeat_n(&u, m.k));
        let lhs = &m.matrix * &w;
        let rhs = &w * &m.matrix;
        if max_abs_diff(&lhs, &rhs) >= 1e-9 {
            return false;
        }
    }
    true
}

/// Hermitian parts `((F+F†)/2, (F−F†)/(2i))` of an arbitrary operator.
pub fn symmetrize(f: &CMatrix) -> (CMatrix, CMatrix) {
    let fa = f.adjoint();
    let m1 = (f + &fa).map(|z| z * 0.5);
    let m2 = (f - &fa).map(|z| z / (I * 2.0));
    (m1, m2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{strength_from_coeffs, strength_from_purities};
    use crate::linalg::trace_of_product;
    use crate::state::random_state;
    use crate::structured::{ghz_state, graph_strength, Graph};

    fn ghz3() -> CorrelationTensor {
        ghz_state(3).unwrap().expand().unwrap()
    }

    #[test]
    fn parse_and_display() {
        let p = ContractionPattern::parse("0,j,k; i,j,0; i,0,k").unwrap();
        assert_eq!(p.degree(), 3);
        assert_eq!(p.parties(), 3);
        assert_eq!(p.to_string(), "0,j,k; i,j,0; i,0,k");
        assert_eq!(p.variables(), ["i", "j", "k"]);
    }

    #[test]
    fn malformed_patterns() {
        for bad in ["i,0; 0,0", "i,0; 0,i", "i,0; i,0; i,0", "0,0; 0", "", "0,*"] {
            assert!(
                matches!(ContractionPattern::parse(bad), Err(Error::Pattern(_))),
                "{bad:?}"
            );
        }
        let p = ContractionPattern::parse("i,0; i,0").unwrap();
        assert!(contract(&ghz3(), &p).is_err());
    }

    #[test]
    fn triple_contraction_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = crate::state::random_state_with(&[2, 3, 2], 2, &mut rng).unwrap();
        for t in [ghz3(), rho.expand().unwrap()] {
            let dims = t.dims().to_vec();
            let p = ContractionPattern::parse("0,j,k; i,j,0; i,0,k").unwrap();
            let c = |a: usize, b: usize, e: usize| {
                t.get(&crate::MultiIndex::new(vec![a, b, e])).unwrap()
            };
            let mut brute = 0.0;
            for i in 1..dims[0] * dims[0] {
                for j in 1..dims[1] * dims[1] {
                    for k in 1..dims[2] * dims[2] {
                        brute += c(0, j, k) * c(i, j, 0) * c(i, 0, k);
                    }
                }
            }
            assert!((contract(&t, &p).unwrap() - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_contractions() {
        let t = ghz3();
        let one = ContractionPattern::parse("0,0,0").unwrap();
        assert!((contract(&t, &one).unwrap() - 1.0).abs() < 1e-14);
        let rho = random_state(&[2, 2, 3], 3, 5).unwrap();
        let t = rho.expand().unwrap();
        let single = ContractionPattern::parse("i,0,0; i,0,0").unwrap();
        let l1 = strength_from_coeffs(&t, PartySet::from_parties([0])).unwrap();
        assert!((contract(&t, &single).unwrap() - l1).abs() < 1e-12);
        for m in 1..8u64 {
            let s = PartySet::from_bits(m);
            let p = ContractionPattern::strength(s, 3).unwrap();
            assert_eq!(
                contract(&t, &p).unwrap(),
                strength_from_coeffs(&t, s).unwrap()
            );
        }
    }

    #[test]
    fn homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let t = random_state(&[2, 2, 2], 2, 6).unwrap().expand().unwrap();
        for degree in 1..=4 {
            let p = ContractionPattern::random(3, degree, &mut rng).unwrap();
            let lambda: f64 = 1.7;
            let a = contract(&t.scaled(lambda), &p).unwrap();
            let b = contract(&t, &p).unwrap() * lambda.powi(degree as i32);
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let dims = [2, 3, 2];
        for _ in 0..10 {
            let rho = crate::state::random_state_with(&dims, 2, &mut rng).unwrap();
            let u = random_local_unitary_with(&dims, &mut rng);
            let t0 = rho.expand().unwrap();
            let t1 = rho.apply_local(&u).unwrap().expand().unwrap();
            let degree = rng.random_range(2..=4);
            let p = ContractionPattern::random(3, degree, &mut rng).unwrap();
            let diff = (contract(&t0, &p).unwrap() - contract(&t1, &p).unwrap()).abs();
            assert!(diff < 1e-9, "{p}: {diff}");
        }
    }

    fn x_abc_direct(rho: &DensityMatrix) -> f64 {
        let r: Vec<_> = (0..3)
            .map(|a| {
                rho.partial_trace(PartySet::from_parties([a]))
                    .unwrap()
                    .into_data()
            })
            .collect();
        let prod = kron_all(r.iter());
        let xi = crate::invariants::xi_projection(rho, PartySet::full(3)).unwrap();
        rho.dim() as f64 * trace_of_product(&prod, &xi).re
    }

    #[test]
    fn x_abc_examples() {
        assert!(x_abc(&ghz3()).unwrap().abs() < 1e-14);
        let mm = DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap();
        assert_eq!(x_abc(&mm.expand().unwrap()).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let parts: Vec<_> = [2, 3, 2]
            .iter()
            .map(|&d| crate::state::random_state_with(&[d], 2, &mut rng).unwrap())
            .collect();
        let prod = parts[0].tensor(&parts[1]).tensor(&parts[2]);
        let t = prod.expand().unwrap();
        let expect: f64 = parts
            .iter()
            .map(|p| strength_from_purities(p, PartySet::full(1)).unwrap())
            .product();
        assert!((x_abc(&t).unwrap() - expect).abs() < 1e-12);
        for seed in 0..5 {
            let rho = random_state(&[2, 2, 3], 2, seed).unwrap();
            assert!((x_abc(&rho.expand().unwrap()).unwrap() - x_abc_direct(&rho)).abs() < 1e-12);
        }
        assert!(x_abc(&random_state(&[2, 2], 1, 0).unwrap().expand().unwrap()).is_err());
    }

    #[test]
    fn k_copy_examples() {
        let rho = random_state(&[2, 3], 2, 1).unwrap();
        for k in 1..=3 {
            let id = KCopyObservable::identity(k, vec![2, 3]).unwrap();
            assert!((evaluate_k_copy(&id, &rho).unwrap() - 1.0).abs() < 1e-12);
        }
        let q = random_state(&[2], 2, 9).unwrap();
        let swap = KCopyObservable::swap(vec![2]).unwrap();
        assert!((evaluate_k_copy(&swap, &q).unwrap() - q.purity()).abs() < 1e-12);
        let swap = KCopyObservable::swap(vec![2, 3]).unwrap();
        assert!((evaluate_k_copy(&swap, &rho).unwrap() - rho.purity()).abs() < 1e-12);
        assert!(matches!(
            KCopyObservable::identity(3, vec![2, 2, 2, 2, 2]),
            Err(Error::ResourceCap(_))
        ));
        assert!(evaluate_k_copy(&swap, &q).is_err());
    }

    #[test]
    fn m_s_examples() {
        let m = m_s_observable(PartySet::full(1), &[2]).unwrap();
        let lb = crate::basis::local_basis(2).unwrap();
        let expect = (1..4).fold(CMatrix::zeros(4, 4), |acc, i| acc + kron(&lb[i], &lb[i]));
        assert!(max_abs_diff(m.matrix(), &expect) < 1e-15);

        let bell = crate::structured::dicke_state(2, 1).unwrap();
        let m = m_s_observable(PartySet::full(2), &[2, 2]).unwrap();
        assert!((evaluate_k_copy(&m, &bell).unwrap() - 3.0).abs() < 1e-12);

        let m = m_s_observable(PartySet::full(3), &[2, 2, 2]).unwrap();
        let g = graph_strength(&Graph::star(3).unwrap(), PartySet::full(3)).unwrap() as f64;
        assert!((evaluate_k_copy(&m, &ghz_state(3).unwrap()).unwrap() - g).abs() < 1e-12);

        let mm = DensityMatrix::maximally_mixed(vec![2, 3]).unwrap();
        for b in 1..4u64 {
            let m = m_s_observable(PartySet::from_bits(b), &[2, 3]).unwrap();
            assert!(evaluate_k_copy(&m, &mm).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn m_s_reproduces_strengths() {
        for seed in 0..5 {
            let rho = random_state(&[2, 3], 1 + seed as usize % 3, seed).unwrap();
            for b in 1..4u64 {
                let s = PartySet::from_bits(b);
                let m = m_s_observable(s, &[2, 3]).unwrap();
                let l = strength_from_purities(&rho, s).unwrap();
                assert!((evaluate_k_copy(&m, &rho).unwrap() - l).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn commutant_examples() {
        for b in 1..4u64 {
            let m = m_s_observable(PartySet::from_bits(b), &[2, 2]).unwrap();
            assert!(commutant_check(&m, 5, b));
        }
        let id = KCopyObservable::identity(2, vec![2, 2]).unwrap();
        assert!(commutant_check(&id, 3, 0));
        let z = crate::basis::local_basis(2).unwrap()[3].clone();
        let zm = KCopyObservable::new(1, vec![2], z).unwrap();
        assert!(!commutant_check(&zm, 3, 0));
    }

    #[test]
    fn symmetrize_recovers_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = crate::linalg::ginibre(4, 4, &mut rng);
        let (m1, m2) = symmetrize(&f);
        assert!(hermiticity_defect(&m1) < 1e-15 && hermiticity_defect(&m2) < 1e-15);
        let back = &m1 + m2.map(|z| z * I);
        assert!(max_abs_diff(&back, &f) < 1e-14);
    }
}
