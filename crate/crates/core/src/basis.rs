//! Hermitian operator bases.
//!
//! For each local dimension `d` the basis is `{σ_0 = 1, σ_1, …, σ_{d²-1}}`
//! with `tr(σ_i σ_j) = d δ_ij`. The traceless generators are the generalized
//! Gell-Mann matrices scaled by `√(d/2)`, ordered as: symmetric pairs
//! `(j,k)`, `j<k`, in lexicographic order; antisymmetric pairs in the same
//! order; then the `d-1` diagonal matrices. For `d = 2` this is exactly
//! `1, σ_x, σ_y, σ_z`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I, ONE};

/// A set of parties, stored as a bitmask with bit `a` for (0-based) party `a`.
///
/// Parties are 0-based in the API and 1-based in every textual form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartySet(u64);

impl PartySet {
    pub const EMPTY: PartySet = PartySet(0);

    pub const fn from_bits(bits: u64) -> Self {
        PartySet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{0, …, n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= 64, "at most 64 parties");
        if n == 64 {
            PartySet(u64::MAX)
        } else {
            PartySet((1u64 << n) - 1)
        }
    }

    pub fn from_parties<I: IntoIterator<Item = usize>>(parties: I) -> Self {
        let mut bits = 0u64;
        for a in parties {
            assert!(a < 64, "party index {a} exceeds 63");
            bits |= 1 << a;
        }
        PartySet(bits)
    }

    /// Builds a set from 1-based party labels, checking them against `n`.
    pub fn from_one_based(labels: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &l in labels {
            if l == 0 || l > n {
                return Err(Error::PartyOutOfRange { party: l, n });
            }
            bits |= 1 << (l - 1);
        }
        Ok(PartySet(bits))
    }

    pub fn contains(self, a: usize) -> bool {
        a < 64 && self.0 & (1 << a) != 0
    }

    pub fn with(self, a: usize) -> Self {
        PartySet(self.0 | (1 << a))
    }

    pub fn without(self, a: usize) -> Self {
        PartySet(self.0 & !(1 << a))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: PartySet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: PartySet) -> Self {
        PartySet(self.0 | other.0)
    }

    pub fn intersection(self, other: PartySet) -> Self {
        PartySet(self.0 & other.0)
    }

    pub fn difference(self, other: PartySet) -> Self {
        PartySet(self.0 & !other.0)
    }

    pub fn complement(self, n: usize) -> Self {
        PartySet(!self.0 & PartySet::full(n).0)
    }

    /// Checks that every member is below `n`.
    pub fn check(self, n: usize) -> Result<()> {
        if self.is_subset_of(PartySet::full(n)) {
            Ok(())
        } else {
            let party = 64 - self.0.leading_zeros() as usize;
            Err(Error::PartyOutOfRange { party, n })
        }
    }

    /// Members in increasing order (0-based).
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let a = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(a)
            }
        })
    }

    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|a| a + 1).collect()
    }

    /// All subsets of `self` (including `{}` and `self`) in increasing
    /// bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = PartySet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur | !mask).wrapping_add(1) & mask)
            };
            Some(PartySet(cur))
        })
    }
}

impl Serialize for PartySet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PartySet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<usize>::deserialize(deserializer)?;
        if let Some(&bad) = labels.iter().find(|&&l| l == 0 || l > 64) {
            return Err(serde::de::Error::custom(format!(
                "party label {bad} out of range"
            )));
        }
        Ok(PartySet::from_parties(labels.into_iter().map(|l| l - 1)))
    }
}

impl fmt::Display for PartySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, a) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a + 1)?;
        }
        write!(f, "}}")
    }
}

/// One index per party; index `0` is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>) -> Self {
        MultiIndex(indices)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        if self.0.len() != dims.len() {
            return Err(Error::InvalidIndex(format!(
                "{self} has {} entries for {} parties",
                self.0.len(),
                dims.len()
            )));
        }
        for (a, (&i, &d)) in self.0.iter().zip(dims).enumerate() {
            if i >= d * d {
                return Err(Error::InvalidIndex(format!(
                    "{self}: entry {i} at party {} exceeds {}",
                    a + 1,
                    d * d - 1
                )));
            }
        }
        Ok(())
    }

    /// Parties on which the basis element acts non-trivially.
    pub fn support(&self) -> PartySet {
        PartySet::from_parties(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, &i)| i != 0)
                .map(|(a, _)| a),
        )
    }

    /// Row-major position with party 1 most significant and radix `d_a²`.
    pub fn linear(&self, dims: &[usize]) -> usize {
        self.0
            .iter()
            .zip(dims)
            .fold(0, |acc, (&i, &d)| acc * d * d + i)
    }

    pub fn from_linear(mut lin: usize, dims: &[usize]) -> Self {
        let mut out = vec![0; dims.len()];
        for (slot, &d) in out.iter_mut().zip(dims).rev() {
            *slot = lin % (d * d);
            lin /= d * d;
        }
        MultiIndex(out)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

#[derive(Clone, Debug)]
pub struct LocalBasis {
    dim: usize,
    generators: Vec<CMatrix>,
}

impl LocalBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn get(&self, i: usize) -> Option<&CMatrix> {
        self.generators.get(i)
    }
}

impl std::ops::Index<usize> for LocalBasis {
    type Output = CMatrix;

    fn index(&self, i: usize) -> &CMatrix {
        &self.generators[i]
    }
}

pub fn local_basis(d: usize) -> Result<LocalBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let scale = (d as f64 / 2.0).sqrt();
    let s = C64::new(scale, 0.0);
    let mut generators = Vec::with_capacity(d * d);
    generators.push(CMatrix::identity(d, d));
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = s;
            m[(k, j)] = s;
            generators.push(m);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = -I * s;
            m[(k, j)] = I * s;
            generators.push(m);
        }
    }
    for l in 1..d {
        let lf = l as f64;
        let norm = (2.0 / (lf * (lf + 1.0))).sqrt() * scale;
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-lf * norm, 0.0);
        generators.push(m);
    }
    debug_assert_eq!(generators.len(), d * d);
    Ok(LocalBasis { dim: d, generators })
}

/// Local bases for every party of a composite system.
#[derive(Clone, Debug)]
pub struct ProductBasis {
    dims: Vec<usize>,
    locals: Vec<LocalBasis>,
}

impl ProductBasis {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Shape("no parties".into()));
        }
        let mut cache: Vec<LocalBasis> = Vec::new();
        let mut locals = Vec::with_capacity(dims.len());
        for &d in dims {
            let b = match cache.iter().find(|b| b.dim == d) {
                Some(b) => b.clone(),
                None => {
                    let b = local_basis(d)?;
                    cache.push(b.clone());
                    b
                }
            };
            locals.push(b);
        }
        Ok(ProductBasis {
            dims: dims.to_vec(),
            locals,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn local(&self, party: usize) -> &LocalBasis {
        &self.locals[party]
    }

    /// Number of product basis elements, `Π d_a²`.
    pub fn len(&self) -> usize {
        self.dims.iter().map(|d| d * d).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `σ_{i_1} ⊗ … ⊗ σ_{i_n}`.
    pub fn element(&self, idx: &MultiIndex) -> Result<CMatrix> {
        idx.validate(&self.dims)?;
        let mut acc = CMatrix::from_element(1, 1, ONE);
        for (b, &i) in self.locals.iter().zip(idx.as_slice()) {
            acc = acc.kronecker(&b[i]);
        }
        Ok(acc)
    }
}

/// `σ_{i_1} ⊗ … ⊗ σ_{i_n}` for the given dimensions.
pub fn basis_element(idx: &MultiIndex, dims: &[usize]) -> Result<CMatrix> {
    ProductBasis::new(dims)?.element(idx)
}

/// Multi-indices whose support is exactly `set`, in lexicographic order.
///
/// Yields `Π_{a∈S}(d_a² - 1)` items.
pub fn enumerate_b_s(set: PartySet, dims: &[usize]) -> BsIter {
    let n = dims.len();
    let mut current = vec![0usize; n];
    let mut done = false;
    if !set.is_subset_of(PartySet::full(n)) {
        done = true;
    }
    for a in set.iter().filter(|&a| a < n) {
        current[a] = 1;
    }
    BsIter {
        upper: dims.iter().map(|d| d * d).collect(),
        members: set.iter().filter(|&a| a < n).collect(),
        current,
        done,
    }
}

pub struct BsIter {
    upper: Vec<usize>,
    members: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl Iterator for BsIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        if self.done {
            return None;
        }
        let out = MultiIndex(self.current.clone());
        // odometer over the members, last party fastest
        let mut carried = true;
        for &a in self.members.iter().rev() {
            if self.current[a] + 1 < self.upper[a] {
                self.current[a] += 1;
                carried = false;
                break;
            }
            self.current[a] = 1;
        }
        if carried {
            self.done = true;
        }
        Some(out)
    }
}

/// Number of multi-indices with support exactly `set`.
pub fn b_s_count(set: PartySet, dims: &[usize]) -> usize {
    set.iter().map(|a| dims[a] * dims[a] - 1).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_defect, max_abs_diff, trace, trace_of_product, ZERO};

    fn gram_ok(b: &LocalBasis) {
        let d = b.dim() as f64;
        for (i, si) in b.generators().iter().enumerate() {
            assert!(hermiticity_defect(si) < 1e-12);
            if i > 0 {
                assert!(trace(si).norm() < 1e-12);
            }
            for (j, sj) in b.generators().iter().enumerate() {
                let t = trace_of_product(si, sj);
                let expect = if i == j { d } else { 0.0 };
                assert!(
                    (t - C64::new(expect, 0.0)).norm() < 1e-12,
                    "d={d} i={i} j={j}"
                );
            }
        }
    }

    #[test]
    fn qubit_basis_is_pauli() {
        let b = local_basis(2).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let y = CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        assert_eq!(b[0], CMatrix::identity(2, 2));
        assert_eq!(b[1], x);
        assert_eq!(b[2], y);
        assert_eq!(b[3], z);
        assert_eq!(trace_of_product(&b[1], &b[1]), C64::new(2.0, 0.0));
        assert_eq!(trace_of_product(&b[1], &b[2]), ZERO);
    }

    #[test]
    fn gram_matrix_for_small_dims() {
        for d in 2..=5 {
            let b = local_basis(d).unwrap();
            assert_eq!(b.len(), d * d);
            gram_ok(&b);
        }
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(matches!(local_basis(1), Err(Error::InvalidDimension(1))));
        assert!(matches!(local_basis(0), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn basis_elements() {
        let dims = [2, 2];
        let id = basis_element(&MultiIndex::new(vec![0, 0]), &dims).unwrap();
        assert_eq!(id, CMatrix::identity(4, 4));
        let zz = basis_element(&MultiIndex::new(vec![3, 3]), &dims).unwrap();
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, -ONE, -ONE, ONE]));
        assert_eq!(zz, diag);

        let m = basis_element(&MultiIndex::new(vec![1, 0, 2]), &[2, 2, 2]).unwrap();
        assert!(trace(&m).norm() < 1e-14);
        assert!(max_abs_diff(&(&m * &m), &CMatrix::identity(8, 8)) < 1e-14);

        assert!(matches!(
            basis_element(&MultiIndex::new(vec![4, 0]), &dims),
            Err(Error::InvalidIndex(_))
        ));
        assert!(basis_element(&MultiIndex::new(vec![1]), &dims).is_err());
    }

    #[test]
    fn supports() {
        assert_eq!(MultiIndex::new(vec![0, 0, 0]).support(), PartySet::EMPTY);
        assert_eq!(
            MultiIndex::new(vec![1, 0, 2]).support().to_one_based(),
            vec![1, 3]
        );
        assert_eq!(
            MultiIndex::new(vec![3, 3]).support().to_one_based(),
            vec![1, 2]
        );
    }

    #[test]
    fn b_s_enumeration() {
        let dims = [2, 2, 2];
        let empty: Vec<_> = enumerate_b_s(PartySet::EMPTY, &dims).collect();
        assert_eq!(empty, vec![MultiIndex::zeros(3)]);
        let first: Vec<_> = enumerate_b_s(PartySet::from_parties([0]), &dims).collect();
        assert_eq!(
            first,
            vec![
                MultiIndex::new(vec![1, 0, 0]),
                MultiIndex::new(vec![2, 0, 0]),
                MultiIndex::new(vec![3, 0, 0])
            ]
        );
        assert_eq!(enumerate_b_s(PartySet::full(3), &dims).count(), 27);
        assert_eq!(
            enumerate_b_s(PartySet::from_parties([0, 1]), &[3, 2]).count(),
            24
        );
    }

    #[test]
    fn b_s_partition_is_complete() {
        for dims in [vec![2, 2, 2], vec![2, 3], vec![3, 2, 2]] {
            let n = dims.len();
            let total: usize = dims.iter().map(|d| d * d).product();
            let mut seen = vec![false; total];
            for s in PartySet::full(n).subsets() {
                for idx in enumerate_b_s(s, &dims) {
                    assert_eq!(idx.support(), s);
                    let lin = idx.linear(&dims);
                    assert!(!seen[lin]);
                    seen[lin] = true;
                }
                assert_eq!(enumerate_b_s(s, &dims).count(), b_s_count(s, &dims));
            }
            assert!(seen.iter().all(|&x| x));
        }
    }

    #[test]
    fn product_basis_orthogonality() {
        for dims in [vec![2, 2, 2], vec![3, 2], vec![3, 3], vec![2, 3, 2]] {
            let pb = ProductBasis::new(&dims).unwrap();
            let d: usize = dims.iter().product();
            let elems: Vec<CMatrix> = (0..pb.len())
                .map(|l| pb.element(&MultiIndex::from_linear(l, &dims)).unwrap())
                .collect();
            for (i, a) in elems.iter().enumerate() {
                for (j, b) in elems.iter().enumerate().skip(i) {
                    let t = trace_of_product(a, b);
                    let expect = if i == j { d as f64 } else { 0.0 };
                    assert!((t - C64::new(expect, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn subsets_enumeration() {
        let s = PartySet::from_parties([0, 2, 3]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset_of(s)));
        assert_eq!(PartySet::EMPTY.subsets().count(), 1);
        assert_eq!(format!("{s}"), "{1,3,4}");
    }

    #[test]
    fn linear_round_trip() {
        let dims = [2, 3, 2];
        for l in 0..(4 * 9 * 4) {
            assert_eq!(MultiIndex::from_linear(l, &dims).linear(&dims), l);
        }
    }
}
