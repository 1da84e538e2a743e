//! Small dense complex linear-algebra helpers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a non-empty list of factors, first factor outermost.
pub fn kron_all<'a, I>(factors: I) -> CMatrix
where
    I: IntoIterator<Item = &'a CMatrix>,
{
    let mut acc = CMatrix::from_element(1, 1, ONE);
    for f in factors {
        acc = acc.kronecker(f);
    }
    acc
}

/// Largest entrywise modulus of `h - h†`.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((h[(r, c)] - h[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a hermitian matrix in ascending order.
///
/// Only the lower triangle is trusted; callers pass matrices that are
/// hermitian to within round-off.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

pub fn min_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h)
        .first()
        .copied()
        .unwrap_or(f64::NAN)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for r in 0..n {
        for c in 0..n {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix, with
/// the phases of `R`'s diagonal folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            ONE
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Unitarity defect `max |U U† - 1|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u * u.adjoint();
    max_abs_diff(&prod, &CMatrix::identity(u.nrows(), u.ncols()))
}
