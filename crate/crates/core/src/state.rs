//! Dense density matrices and their expansion in the product operator basis.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{MultiIndex, PartySet, ProductBasis};
use crate::error::{Error, Result};
use crate::linalg::{
    ginibre, haar_unitary, hermiticity_defect, kron_all, min_eigenvalue, trace, CMatrix, C64, ZERO,
};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const IMAG_TOL: f64 = 1e-10;

/// A density operator on `Π d_a` dimensions, party 1 outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
    dims: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.hermiticity_defect <= HERMITICITY_TOL
            && self.trace_defect <= TRACE_TOL
            && self.min_eigenvalue >= -PSD_TOL
    }

    /// Names the first failed invariant.
    pub fn check(&self) -> Result<()> {
        if self.hermiticity_defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "hermiticity defect {:e} exceeds {HERMITICITY_TOL:e}",
                self.hermiticity_defect
            )));
        }
        if self.trace_defect > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace defect {:e} exceeds {TRACE_TOL:e}",
                self.trace_defect
            )));
        }
        if self.min_eigenvalue < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e} (not positive semidefinite)",
                self.min_eigenvalue
            )));
        }
        Ok(())
    }
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::Shape("no parties".into()));
    }
    if dims.len() > 64 {
        return Err(Error::Shape(format!("{} parties exceed 64", dims.len())));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDimension(d));
    }
    Ok(dims.iter().product())
}

/// Per basis row, the digit of each party (party 1 most significant).
fn digits_table(dims: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = dims.iter().product();
    (0..total)
        .map(|mut r| {
            let mut out = vec![0; dims.len()];
            for (slot, &d) in out.iter_mut().zip(dims).rev() {
                *slot = r % d;
                r /= d;
            }
            out
        })
        .collect()
}

impl DensityMatrix {
    /// Wraps a matrix after checking only its shape. Use [`validate`] for the
    /// physical invariants.
    ///
    /// [`validate`]: DensityMatrix::validate
    pub fn new(data: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let d = check_dims(&dims)?;
        if data.nrows() != data.ncols() {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, not square",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.nrows() != d {
            return Err(Error::Shape(format!(
                "matrix dimension {} does not match product of dims {d}",
                data.nrows()
            )));
        }
        Ok(DensityMatrix { data, dims })
    }

    /// `|ψ⟩⟨ψ|` for the normalized amplitude vector.
    pub fn from_pure(amplitudes: &[C64], dims: Vec<usize>) -> Result<Self> {
        let d = check_dims(&dims)?;
        if amplitudes.len() != d {
            return Err(Error::Shape(format!(
                "{} amplitudes for dimension {d}",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let data = CMatrix::from_fn(d, d, |r, c| {
            amplitudes[r] * amplitudes[c].conj() / (norm * norm)
        });
        Ok(DensityMatrix { data, dims })
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d = check_dims(&dims)?;
        let data = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        Ok(DensityMatrix { data, dims })
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    /// Total dimension `d = Π d_a`.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            hermiticity_defect: hermiticity_defect(&self.data),
            trace_defect: (trace(&self.data) - C64::new(1.0, 0.0)).norm(),
            min_eigenvalue: min_eigenvalue(&self.data),
        }
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `tr(ρ σ_{i_1} ⊗ … ⊗ σ_{i_n})`, computed without forming the basis
    /// element.
    pub fn coefficient(&self, basis: &ProductBasis, idx: &MultiIndex) -> Result<f64> {
        idx.validate(&self.dims)?;
        if basis.dims() != self.dims.as_slice() {
            return Err(Error::Shape("basis dims differ from state dims".into()));
        }
        let digits = digits_table(&self.dims);
        let locals: Vec<&CMatrix> = idx
            .as_slice()
            .iter()
            .enumerate()
            .map(|(a, &i)| &basis.local(a)[i])
            .collect();
        let d = self.dim();
        let mut acc = ZERO;
        for r in 0..d {
            for c in 0..d {
                let rho = self.data[(r, c)];
                if rho == ZERO {
                    continue;
                }
                let mut w = C64::new(1.0, 0.0);
                for (a, m) in locals.iter().enumerate() {
                    w *= m[(digits[c][a], digits[r][a])];
                    if w == ZERO {
                        break;
                    }
                }
                acc += rho * w;
            }
        }
        if acc.im.abs() > IMAG_TOL {
            return Err(Error::NumericalConsistency {
                index: idx.to_string(),
                residue: acc.im.abs(),
            });
        }
        Ok(acc.re)
    }

    /// All expansion coefficients `c_{i_1…i_n}`.
    pub fn expand(&self) -> Result<CorrelationTensor> {
        let basis = ProductBasis::new(&self.dims)?;
        self.expand_with(&basis)
    }

    pub fn expand_with(&self, basis: &ProductBasis) -> Result<CorrelationTensor> {
        if basis.dims() != self.dims.as_slice() {
            return Err(Error::Shape("basis dims differ from state dims".into()));
        }
        let pairs = self.pair_tensor();
        // c_i = Σ_{r,c} ρ[r,c] σ_i[c,r] per party
        let mats: Vec<Vec<C64>> = (0..self.parties())
            .map(|a| {
                let d = self.dims[a];
                let lb = basis.local(a);
                let mut m = Vec::with_capacity(d * d * d * d);
                for i in 0..d * d {
                    for r in 0..d {
                        for c in 0..d {
                            m.push(lb[i][(c, r)]);
                        }
                    }
                }
                m
            })
            .collect();
        let sizes: Vec<usize> = self.dims.iter().map(|d| d * d).collect();
        let out = mode_products(pairs, &sizes, &mats);
        let mut values = Vec::with_capacity(out.len());
        for (lin, z) in out.iter().enumerate() {
            if z.im.abs() > IMAG_TOL {
                return Err(Error::NumericalConsistency {
                    index: MultiIndex::from_linear(lin, &self.dims).to_string(),
                    residue: z.im.abs(),
                });
            }
            values.push(z.re);
        }
        Ok(CorrelationTensor {
            dims: self.dims.clone(),
            values,
        })
    }

    /// Entries regrouped so that party `a` owns the mode `(r_a, c_a)`.
    fn pair_tensor(&self) -> Vec<C64> {
        let digits = digits_table(&self.dims);
        let d = self.dim();
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                let mut lin = 0;
                for (a, &da) in self.dims.iter().enumerate() {
                    lin = lin * da * da + digits[r][a] * da + digits[c][a];
                }
                out[lin] = self.data[(r, c)];
            }
        }
        out
    }

    /// Reduced state on the parties in `keep`, in their original order.
    pub fn partial_trace(&self, keep: PartySet) -> Result<DensityMatrix> {
        let n = self.parties();
        keep.check(n)?;
        if keep.is_empty() {
            return Err(Error::EmptyReduction);
        }
        if keep == PartySet::full(n) {
            return Ok(self.clone());
        }
        let digits = digits_table(&self.dims);
        let kept_dims: Vec<usize> = keep.iter().map(|a| self.dims[a]).collect();
        let d = self.dim();
        let (mut kept_idx, mut traced_idx) = (vec![0usize; d], vec![0usize; d]);
        for r in 0..d {
            let (mut k, mut t) = (0, 0);
            for (a, (&da, &x)) in self.dims.iter().zip(&digits[r]).enumerate() {
                if keep.contains(a) {
                    k = k * da + x;
                } else {
                    t = t * da + x;
                }
            }
            kept_idx[r] = k;
            traced_idx[r] = t;
        }
        let dk: usize = kept_dims.iter().product();
        let mut out = CMatrix::zeros(dk, dk);
        for r in 0..d {
            for c in 0..d {
                if traced_idx[r] == traced_idx[c] {
                    out[(kept_idx[r], kept_idx[c])] += self.data[(r, c)];
                }
            }
        }
        Ok(DensityMatrix {
            data: out,
            dims: kept_dims,
        })
    }

    /// Partial transpose on the parties in `cut`.
    pub fn partial_transpose(&self, cut: PartySet) -> Result<CMatrix> {
        let n = self.parties();
        cut.check(n)?;
        if cut.is_empty() || cut == PartySet::full(n) {
            return Err(Error::InvalidCut(cut.to_string()));
        }
        Ok(partial_transpose_raw(&self.data, &self.dims, cut))
    }

    /// Kronecker product with concatenated party lists.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            data: self.data.kronecker(&other.data),
            dims,
        }
    }

    /// `U ρ U†` with `U = U_1 ⊗ … ⊗ U_n`.
    pub fn apply_local(&self, unitaries: &[CMatrix]) -> Result<DensityMatrix> {
        if unitaries.len() != self.parties() {
            return Err(Error::Shape(format!(
                "{} unitaries for {} parties",
                unitaries.len(),
                self.parties()
            )));
        }
        for (u, &d) in unitaries.iter().zip(&self.dims) {
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::Shape(format!(
                    "local operator is {}x{}, party dimension {d}",
                    u.nrows(),
                    u.ncols()
                )));
            }
        }
        let u = kron_all(unitaries);
        Ok(DensityMatrix {
            data: &u * &self.data * u.adjoint(),
            dims: self.dims.clone(),
        })
    }

    /// Convex combination `Σ w_k ρ_k`; all states must share dims.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?
            .1;
        let mut data = CMatrix::zeros(first.dim(), first.dim());
        for (w, s) in parts {
            if s.dims != first.dims {
                return Err(Error::Shape("mixture of states with different dims".into()));
            }
            data += &s.data * C64::new(*w, 0.0);
        }
        Ok(DensityMatrix {
            data,
            dims: first.dims.clone(),
        })
    }
}

pub(crate) fn partial_transpose_raw(data: &CMatrix, dims: &[usize], cut: PartySet) -> CMatrix {
    let digits = digits_table(dims);
    let d = data.nrows();
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for a in (0..n.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * dims[a + 1];
    }
    let cut_part: Vec<usize> = (0..d)
        .map(|r| cut.iter().map(|a| digits[r][a] * strides[a]).sum())
        .collect();
    let mut out = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let r2 = r - cut_part[r] + cut_part[c];
            let c2 = c - cut_part[c] + cut_part[r];
            out[(r2, c2)] = data[(r, c)];
        }
    }
    out
}

/// Applies one square matrix per mode to a row-major tensor.
///
/// `mats[a]` is `sizes[a] x sizes[a]`, row-major, acting as
/// `out[.., i, ..] = Σ_p mats[a][i, p] in[.., p, ..]`.
fn mode_products(mut data: Vec<C64>, sizes: &[usize], mats: &[Vec<C64>]) -> Vec<C64> {
    let total: usize = sizes.iter().product();
    debug_assert_eq!(data.len(), total);
    let mut scratch = vec![ZERO; total];
    for (a, m) in mats.iter().enumerate() {
        let size = sizes[a];
        let inner: usize = sizes[a + 1..].iter().product();
        let outer = total / (size * inner);
        for o in 0..outer {
            let base = o * size * inner;
            for i in 0..size {
                let row = &m[i * size..(i + 1) * size];
                for k in 0..inner {
                    let mut acc = ZERO;
                    for (p, &w) in row.iter().enumerate() {
                        if w != ZERO {
                            acc += w * data[base + p * inner + k];
                        }
                    }
                    scratch[base + i * inner + k] = acc;
                }
            }
        }
        std::mem::swap(&mut data, &mut scratch);
    }
    data
}

/// Real expansion coefficients `c_{i_1…i_n} = ⟨σ_{i_1} ⊗ … ⊗ σ_{i_n}⟩`,
/// stored densely in [`MultiIndex::linear`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl CorrelationTensor {
    /// All-zero tensor. Not a state until `c_{0…0} = 1` is set.
    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let len = dims.iter().map(|d| d * d).product();
        Ok(CorrelationTensor {
            dims,
            values: vec![0.0; len],
        })
    }

    pub fn from_entries<I>(dims: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut t = CorrelationTensor::zeros(dims)?;
        for (idx, v) in entries {
            t.set(&idx, v)?;
        }
        Ok(t)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: &MultiIndex) -> Result<f64> {
        idx.validate(&self.dims)?;
        Ok(self.values[idx.linear(&self.dims)])
    }

    pub fn get_linear(&self, lin: usize) -> f64 {
        self.values[lin]
    }

    pub fn set(&mut self, idx: &MultiIndex, value: f64) -> Result<()> {
        idx.validate(&self.dims)?;
        let lin = idx.linear(&self.dims);
        self.values[lin] = value;
        Ok(())
    }

    /// `(index, value)` pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(l, &v)| (MultiIndex::from_linear(l, &self.dims), v))
    }

    pub fn nonzero(&self, tol: f64) -> BTreeMap<MultiIndex, f64> {
        self.iter().filter(|(_, v)| v.abs() > tol).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CorrelationTensor {
            dims: self.dims.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Support bitmask of every linear position.
    pub fn supports(&self) -> Vec<PartySet> {
        let n = self.dims.len();
        let mut out = Vec::with_capacity(self.values.len());
        let mut digits = vec![0usize; n];
        let mut mask = 0u64;
        for _ in 0..self.values.len() {
            out.push(PartySet::from_bits(mask));
            for a in (0..n).rev() {
                digits[a] += 1;
                if digits[a] < self.dims[a] * self.dims[a] {
                    mask |= 1 << a;
                    break;
                }
                digits[a] = 0;
                mask &= !(1 << a);
            }
        }
        out
    }

    /// `(1/d) Σ c σ` without any validity check on `c_{0…0}`.
    pub fn synthesize(&self) -> Result<CMatrix> {
        let basis = ProductBasis::new(&self.dims)?;
        let mats: Vec<Vec<C64>> = (0..self.dims.len())
            .map(|a| {
                let d = self.dims[a];
                let lb = basis.local(a);
                let mut m = Vec::with_capacity(d * d * d * d);
                for r in 0..d {
                    for c in 0..d {
                        for i in 0..d * d {
                            m.push(lb[i][(r, c)]);
                        }
                    }
                }
                m
            })
            .collect();
        let sizes: Vec<usize> = self.dims.iter().map(|d| d * d).collect();
        let input: Vec<C64> = self.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        let pairs = mode_products(input, &sizes, &mats);
        let digits = digits_table(&self.dims);
        let d: usize = self.dims.iter().product();
        let scale = C64::new(1.0 / d as f64, 0.0);
        let mut out = CMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                let mut lin = 0;
                for (a, &da) in self.dims.iter().enumerate() {
                    lin = lin * da * da + digits[r][a] * da + digits[c][a];
                }
                out[(r, c)] = pairs[lin] * scale;
            }
        }
        Ok(out)
    }

    /// `ρ = (1/d) Σ c σ`. The result is not validated; a tensor that is not
    /// a state shows up in [`DensityMatrix::validate`].
    pub fn reconstruct(&self) -> Result<DensityMatrix> {
        let c0 = self.values[0];
        if (c0 - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "identity coefficient is {c0}, expected 1"
            )));
        }
        DensityMatrix::new(self.synthesize()?, self.dims.clone())
    }
}

pub fn random_state_with<R: Rng + ?Sized>(
    dims: &[usize],
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let d = check_dims(dims)?;
    if rank == 0 {
        return Err(Error::InvalidParameter("rank must be at least 1".into()));
    }
    let g = ginibre(d, rank, rng);
    let mut data = &g * g.adjoint();
    let tr = trace(&data).re;
    data /= C64::new(tr, 0.0);
    Ok(DensityMatrix {
        data,
        dims: dims.to_vec(),
    })
}

/// Wishart-style random state `G G† / tr(G G†)` with `G` of shape `d x rank`.
pub fn random_state(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_with(dims, rank, &mut rng)
}

pub fn random_local_unitary_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Vec<CMatrix> {
    dims.iter().map(|&d| haar_unitary(d, rng)).collect()
}

/// One Haar-random unitary per party.
pub fn random_local_unitary(dims: &[usize], seed: u64) -> Vec<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_local_unitary_with(dims, &mut rng)
}

pub fn apply_local(rho: &DensityMatrix, unitaries: &[CMatrix]) -> Result<DensityMatrix> {
    rho.apply_local(unitaries)
}

/// Pure product state with independently Haar-random local vectors.
pub fn random_pure_product_with<R: Rng + ?Sized>(
    dims: &[usize],
    rng: &mut R,
) -> Result<DensityMatrix> {
    let mut acc: Option<DensityMatrix> = None;
    for &d in dims {
        let local = random_state_with(&[d], 1, rng)?;
        acc = Some(match acc {
            None => local,
            Some(prev) => prev.tensor(&local),
        });
    }
    acc.ok_or_else(|| Error::Shape("no parties".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, ONE};
    use std::f64::consts::FRAC_1_SQRT_2;

    pub(crate) fn bell() -> DensityMatrix {
        let a = C64::new(FRAC_1_SQRT_2, 0.0);
        DensityMatrix::from_pure(&[a, ZERO, ZERO, a], vec![2, 2]).unwrap()
    }

    fn ghz3() -> DensityMatrix {
        let a = C64::new(FRAC_1_SQRT_2, 0.0);
        let mut v = vec![ZERO; 8];
        v[0] = a;
        v[7] = a;
        DensityMatrix::from_pure(&v, vec![2, 2, 2]).unwrap()
    }

    /// Brute-force coefficient via the explicit basis element.
    fn coeff_oracle(rho: &DensityMatrix, idx: &[usize]) -> f64 {
        let b = crate::basis::basis_element(&MultiIndex::new(idx.to_vec()), rho.dims()).unwrap();
        crate::linalg::trace_of_product(rho.data(), &b).re
    }

    #[test]
    fn validation_examples() {
        let mm = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert!(mm.validate().passed());

        let bad_trace =
            DensityMatrix::new(CMatrix::identity(2, 2) * C64::new(0.45, 0.0), vec![2]).unwrap();
        let rep = bad_trace.validate();
        assert!(!rep.passed());
        assert!((rep.trace_defect - 0.1).abs() < 1e-12);
        assert!(rep
            .check()
            .unwrap_err()
            .to_string()
            .contains("trace defect"));

        let neg = DensityMatrix::new(
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(1.1, 0.0),
                C64::new(-0.1, 0.0),
            ])),
            vec![2],
        )
        .unwrap();
        let rep = neg.validate();
        assert!(!rep.passed());
        assert!((rep.min_eigenvalue + 0.1).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            DensityMatrix::new(CMatrix::identity(3, 3), vec![2, 2]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            DensityMatrix::new(CMatrix::zeros(2, 3), vec![2]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn bell_coefficients() {
        let rho = bell();
        let t = rho.expand().unwrap();
        let nz = t.nonzero(1e-12);
        assert_eq!(nz.len(), 4);
        for (idx, expect) in [([0, 0], 1.0), ([1, 1], 1.0), ([2, 2], -1.0), ([3, 3], 1.0)] {
            let got = t.get(&MultiIndex::new(idx.to_vec())).unwrap();
            assert!((got - expect).abs() < 1e-12);
            assert!((coeff_oracle(&rho, &idx) - expect).abs() < 1e-12);
        }
        let basis = ProductBasis::new(&[2, 2]).unwrap();
        for i in 1..4 {
            assert!(
                rho.coefficient(&basis, &MultiIndex::new(vec![i, 0]))
                    .unwrap()
                    .abs()
                    < 1e-12
            );
            assert!(
                rho.coefficient(&basis, &MultiIndex::new(vec![0, i]))
                    .unwrap()
                    .abs()
                    < 1e-12
            );
        }
        assert!(
            (rho.coefficient(&basis, &MultiIndex::new(vec![2, 2]))
                .unwrap()
                + 1.0)
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn expand_matches_oracle_on_qutrit_qubit() {
        let rho = random_state(&[3, 2], 3, 5).unwrap();
        let t = rho.expand().unwrap();
        for (idx, v) in t.iter() {
            assert!((coeff_oracle(&rho, idx.as_slice()) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_ground_state() {
        let rho = DensityMatrix::from_pure(&[ONE, ZERO], vec![2]).unwrap();
        let t = rho.expand().unwrap();
        assert_eq!(t.values(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn product_coefficients_factorize() {
        let a = random_state(&[2], 1, 1).unwrap();
        let b = random_state(&[2], 1, 2).unwrap();
        let (ta, tb) = (a.expand().unwrap(), b.expand().unwrap());
        let tab = a.tensor(&b).expand().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let got = tab.get(&MultiIndex::new(vec![i, j])).unwrap();
                assert!((got - ta.get_linear(i) * tb.get_linear(j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn maximally_mixed_has_only_identity() {
        let t = DensityMatrix::maximally_mixed(vec![2, 3])
            .unwrap()
            .expand()
            .unwrap();
        assert!((t.get_linear(0) - 1.0).abs() < 1e-14);
        assert!(t.values()[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn reconstruct_examples() {
        let mut t = CorrelationTensor::zeros(vec![2, 2]).unwrap();
        t.set(&MultiIndex::zeros(2), 1.0).unwrap();
        let mm = t.reconstruct().unwrap();
        assert!(
            max_abs_diff(
                mm.data(),
                DensityMatrix::maximally_mixed(vec![2, 2]).unwrap().data()
            ) < 1e-15
        );

        let rho = bell();
        let back = rho.expand().unwrap().reconstruct().unwrap();
        assert!(max_abs_diff(back.data(), rho.data()) < 1e-12);

        let bad = CorrelationTensor::from_entries(
            vec![2],
            [
                (MultiIndex::new(vec![0]), 1.0),
                (MultiIndex::new(vec![3]), 2.0),
            ],
        )
        .unwrap();
        let r = bad.reconstruct().unwrap();
        let rep = r.validate();
        assert!(!rep.passed());
        assert!((rep.min_eigenvalue + 0.5).abs() < 1e-12);

        let no_trace = CorrelationTensor::zeros(vec![2]).unwrap();
        assert!(no_trace.reconstruct().is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let red = bell().partial_trace(PartySet::from_parties([0])).unwrap();
        assert!(max_abs_diff(red.data(), &(CMatrix::identity(2, 2) * C64::new(0.5, 0.0))) < 1e-14);

        let a = random_state(&[2], 2, 7).unwrap();
        let b = random_state(&[3], 2, 8).unwrap();
        let ab = a.tensor(&b);
        assert!(
            max_abs_diff(
                ab.partial_trace(PartySet::from_parties([0]))
                    .unwrap()
                    .data(),
                a.data()
            ) < 1e-14
        );
        assert!(
            max_abs_diff(
                ab.partial_trace(PartySet::from_parties([1]))
                    .unwrap()
                    .data(),
                b.data()
            ) < 1e-14
        );

        let red = ghz3()
            .partial_trace(PartySet::from_parties([0, 1]))
            .unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        expect[(0, 0)] = C64::new(0.5, 0.0);
        expect[(3, 3)] = C64::new(0.5, 0.0);
        assert!(max_abs_diff(red.data(), &expect) < 1e-14);
        assert_eq!(red.dims(), &[2, 2]);

        assert!(matches!(
            bell().partial_trace(PartySet::EMPTY),
            Err(Error::EmptyReduction)
        ));
    }

    #[test]
    fn reduced_coefficients_are_restrictions() {
        let dims = [2, 3, 2];
        let rho = random_state(&dims, 2, 21).unwrap();
        let t = rho.expand().unwrap();
        for keep in PartySet::full(3).subsets().skip(1) {
            let red = rho.partial_trace(keep).unwrap();
            let tr = red.expand().unwrap();
            for (idx, v) in tr.iter() {
                let mut full = vec![0; 3];
                for (k, a) in keep.iter().enumerate() {
                    full[a] = idx.as_slice()[k];
                }
                assert!((t.get(&MultiIndex::new(full)).unwrap() - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_identities() {
        let one = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        let oo = one.tensor(&one);
        assert_eq!(oo.dims(), &[2, 2]);
        assert!(
            max_abs_diff(
                oo.data(),
                DensityMatrix::maximally_mixed(vec![2, 2]).unwrap().data()
            ) < 1e-15
        );
        let a = random_state(&[3], 2, 1).unwrap();
        let b = random_state(&[2, 2], 2, 2).unwrap();
        let ab = a.tensor(&b);
        assert_eq!(ab.dims(), &[3, 2, 2]);
        assert!((trace(ab.data()).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purity_and_partial_transpose() {
        let mm = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert!((mm.purity() - 0.25).abs() < 1e-15);
        let pt = bell()
            .partial_transpose(PartySet::from_parties([0]))
            .unwrap();
        assert!((min_eigenvalue(&pt) + 0.5).abs() < 1e-12);
        let ptm = mm.partial_transpose(PartySet::from_parties([0])).unwrap();
        assert!(min_eigenvalue(&ptm) >= 0.0);
        assert!(matches!(
            mm.partial_transpose(PartySet::EMPTY),
            Err(Error::InvalidCut(_))
        ));
        assert!(matches!(
            mm.partial_transpose(PartySet::full(2)),
            Err(Error::InvalidCut(_))
        ));
    }

    #[test]
    fn partial_transpose_is_involution() {
        let rho = random_state(&[2, 3, 2], 3, 4).unwrap();
        for cut in [
            PartySet::from_parties([0]),
            PartySet::from_parties([1]),
            PartySet::from_parties([0, 2]),
        ] {
            let once = rho.partial_transpose(cut).unwrap();
            assert!(hermiticity_defect(&once) < 1e-14);
            assert!((trace(&once) - ONE).norm() < 1e-12);
            let twice = partial_transpose_raw(&once, rho.dims(), cut);
            assert!(max_abs_diff(&twice, rho.data()) < 1e-15);
        }
    }

    #[test]
    fn local_unitaries() {
        let rho = bell();
        let ids = vec![CMatrix::identity(2, 2), CMatrix::identity(2, 2)];
        assert_eq!(rho.apply_local(&ids).unwrap(), rho);
        let us = random_local_unitary(&[2, 2], 9);
        for u in &us {
            assert!(crate::linalg::unitarity_defect(u) < 1e-12);
        }
        let rotated = apply_local(&rho, &us).unwrap();
        assert!((rotated.purity() - rho.purity()).abs() < 1e-12);
        assert!(rho.apply_local(&us[..1]).is_err());
    }

    #[test]
    fn seeded_states_are_reproducible() {
        let a = random_state(&[2, 2], 2, 42).unwrap();
        let b = random_state(&[2, 2], 2, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.validate().passed());
        assert_eq!(random_local_unitary(&[3], 5), random_local_unitary(&[3], 5));
    }

    #[test]
    fn supports_table() {
        let t = CorrelationTensor::zeros(vec![2, 3]).unwrap();
        let sup = t.supports();
        for (l, s) in sup.iter().enumerate() {
            assert_eq!(*s, MultiIndex::from_linear(l, &[2, 3]).support());
        }
    }
}
