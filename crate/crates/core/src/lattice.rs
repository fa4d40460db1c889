//! Centered modular labels and the small dense complex linear algebra shared by
//! every other module.
//!
//! Operators on the `N`-dimensional space are stored row-major with storage
//! index `label + ell`, so row 0 is the label `-ell` and row `N-1` is `+ell`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// exp(2πi k / n) for integer `k`, reduced first so large arguments keep full
/// precision.
pub fn root_of_unity(k: i64, n: usize) -> C64 {
    let r = k.rem_euclid(n as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / n as f64)
}

/// Odd Hilbert-space dimension `N` together with `ell = (N-1)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dim(usize);

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n % 2 == 0 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self(n))
    }

    #[inline]
    pub fn n(self) -> usize {
        self.0
    }

    #[inline]
    pub fn ell(self) -> i64 {
        (self.0 as i64 - 1) / 2
    }

    /// All centered labels `-ell..=ell` in storage order.
    pub fn labels(self) -> std::ops::RangeInclusive<i64> {
        -self.ell()..=self.ell()
    }

    /// Reduce any integer to its representative in `[-ell, ell]`.
    #[inline]
    pub fn center(self, x: i64) -> i64 {
        let n = self.0 as i64;
        let ell = self.ell();
        (x + ell).rem_euclid(n) - ell
    }

    /// Storage index of a label; the label is reduced mod `N` first.
    #[inline]
    pub fn index(self, label: i64) -> usize {
        (self.center(label) + self.ell()) as usize
    }

    #[inline]
    pub fn label(self, index: usize) -> i64 {
        index as i64 - self.ell()
    }

    #[inline]
    pub fn contains(self, label: i64) -> bool {
        label.abs() <= self.ell()
    }

    pub fn is_prime(self) -> bool {
        let n = self.0;
        if n < 2 {
            return false;
        }
        (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A label already reduced into `[-ell, ell]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CenteredLabel(i64);

impl CenteredLabel {
    pub fn value(self) -> i64 {
        self.0
    }
}

impl From<CenteredLabel> for i64 {
    fn from(l: CenteredLabel) -> i64 {
        l.0
    }
}

impl fmt::Display for CenteredLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn center_mod(x: i64, dim: Dim) -> CenteredLabel {
    CenteredLabel(dim.center(x))
}

/// Dense complex square matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix rows must form a square".into()));
        }
        Ok(Self { n, data: rows.into_iter().flatten().collect() })
    }

    /// `|psi><phi|`
    pub fn outer(psi: &[C64], phi: &[C64]) -> Self {
        assert_eq!(psi.len(), phi.len());
        Self::from_fn(psi.len(), |i, j| psi[i] * phi[j].conj())
    }

    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&v| v * z).collect() }
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Self {
        assert_eq!(self.n, rhs.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &rhs.data[k * n..(k + 1) * n];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Self { n, data: out }
    }

    /// `U A U^dagger`
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, rhs: &CMatrix) -> C64 {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * rhs.data[k * n + i];
            }
        }
        acc
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `<u|A|v>`
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let av = self.apply(v);
        u.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(C64::new(0.5, 0.0))
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.n);
        for _ in 0..k {
            acc = acc.matmul(self);
        }
        acc
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(-ONE)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.n, rhs.n);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl CMatrix {
    /// `self += z * rhs`
    pub fn axpy(&mut self, z: C64, rhs: &CMatrix) {
        assert_eq!(self.n, rhs.n);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += z * b;
        }
    }
}

/// Kronecker product, `(A⊗B)[(i,k),(j,l)] = A[i,j] B[k,l]`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.n, b.n);
    CMatrix::from_fn(na * nb, |r, c| a[(r / nb, c / nb)] * b[(r % nb, c % nb)])
}

pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Reduced operator on the subsystems listed in `keep`, tracing out the rest.
/// Subsystem 0 is the most significant factor of the storage index.
pub fn partial_trace(a: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || total != a.n() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} do not factor a {}x{} operator",
            a.n(),
            a.n()
        )));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("invalid kept subsystems {keep:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();

    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let n_kept: usize = kept_dims.iter().product();
    let n_traced: usize = traced_dims.iter().product();

    // Offsets into the full index contributed by each kept / traced multi-index.
    let offsets = |subs: &[usize], sub_dims: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut flat| {
                let mut off = 0;
                for (pos, &d) in sub_dims.iter().enumerate().rev() {
                    off += (flat % d) * strides[subs[pos]];
                    flat /= d;
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&keep, &kept_dims, n_kept);
    let traced_off = offsets(&traced, &traced_dims, n_traced);

    Ok(CMatrix::from_fn(n_kept, |i, j| {
        traced_off.iter().map(|&t| a[(kept_off[i] + t, kept_off[j] + t)]).sum()
    }))
}

/// Unitary DFT over centered labels, `F[mu,nu] = N^{-1/2} exp(2πi mu nu / N)`.
pub fn dft_matrix(dim: Dim) -> CMatrix {
    let n = dim.n();
    let norm = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, |i, j| root_of_unity(dim.label(i) * dim.label(j), n) * norm)
}

/// Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, Vec<Vec<C64>>) {
    let eig = SymmetricEigen::new(a.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..a.n()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    hermitian_eigen(a).0
}

fn hermitian_sqrt(a: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(a);
    let mut out = CMatrix::zeros(a.n());
    for (lam, v) in vals.iter().zip(&vecs) {
        out.axpy(C64::new(lam.max(0.0).sqrt(), 0.0), &CMatrix::projector(v));
    }
    out
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    // for a pure argument this is just Tr(rho sigma); the square roots of
    // near-zero eigenvalues would otherwise cost half the digits
    for (a, b) in [(rho, sigma), (sigma, rho)] {
        if (a.trace_product(a).re - 1.0).abs() < 1e-12 {
            return a.trace_product(b).re;
        }
    }
    let sr = hermitian_sqrt(rho);
    let inner = sr.matmul(sigma).matmul(&sr);
    let vals = hermitian_eigenvalues(&inner);
    let t: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    t * t
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Complex table over two centered labels, e.g. `(mu, nu)` or `(eta, xi)`.
/// Lookups wrap modulo `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFn {
    dim: Dim,
    values: Vec<C64>,
}

impl GridFn {
    pub fn zeros(dim: Dim) -> Self {
        Self { dim, values: vec![ZERO; dim.n() * dim.n()] }
    }

    pub fn from_fn(dim: Dim, mut f: impl FnMut(i64, i64) -> C64) -> Self {
        let mut values = Vec::with_capacity(dim.n() * dim.n());
        for a in dim.labels() {
            for b in dim.labels() {
                values.push(f(a, b));
            }
        }
        Self { dim, values }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: i64, b: i64) -> C64 {
        self.values[self.dim.index(a) * self.dim.n() + self.dim.index(b)]
    }

    pub fn set(&mut self, a: i64, b: i64, v: C64) {
        let n = self.dim.n();
        let k = self.dim.index(a) * n + self.dim.index(b);
        self.values[k] = v;
    }

    /// `(a, b, value)` in row-major centered-label order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, C64)> + '_ {
        let n = self.dim.n();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.dim.label(k / n), self.dim.label(k % n), v))
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn sum(&self) -> C64 {
        self.values.iter().sum()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { dim: self.dim, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn max_abs_diff(&self, other: &GridFn) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}
