//! Jacobi theta series with imaginary lattice parameter, the kernel `K`, the
//! phase `Phi`, the 1-D smoothing function and the finite number basis.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{inner, norm, root_of_unity, CMatrix, Dim, GridFn, ZERO};

/// Relative truncation threshold for every theta series.
pub const THETA_TOL: f64 = 1e-16;

const MAX_TERMS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaKind {
    Two,
    Three,
    Four,
}

impl TryFrom<u8> for ThetaKind {
    type Error = Error;
    fn try_from(k: u8) -> Result<Self> {
        match k {
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            4 => Ok(Self::Four),
            _ => Err(Error::Parse(format!("no theta function of kind {k}"))),
        }
    }
}

/// `theta_k(z | i a)` with nome `q = exp(-pi a)`. Terms are dropped once the
/// nome power falls below `tol` times the leading one.
pub fn theta(kind: ThetaKind, z: f64, a: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::ThetaDomain(a));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Parse(format!("theta tolerance must be positive, got {tol}")));
    }
    Ok(theta_series(kind, z, a, tol))
}

fn theta_series(kind: ThetaKind, z: f64, a: f64, tol: f64) -> f64 {
    let lnq = -PI * a;
    match kind {
        ThetaKind::Three | ThetaKind::Four => {
            let mut acc = 0.0;
            for n in 1..MAX_TERMS {
                let w = (lnq * (n * n) as f64).exp();
                if w < tol {
                    break;
                }
                let sign = if kind == ThetaKind::Four && n % 2 == 1 { -1.0 } else { 1.0 };
                acc += sign * w * (2.0 * n as f64 * z).cos();
            }
            1.0 + 2.0 * acc
        }
        ThetaKind::Two => {
            let lead = (lnq * 0.25).exp();
            let mut acc = 0.0;
            for n in 0..MAX_TERMS {
                let h = n as f64 + 0.5;
                let w = (lnq * h * h).exp();
                if w < tol * lead {
                    break;
                }
                acc += w * ((2 * n + 1) as f64 * z).cos();
            }
            2.0 * acc
        }
    }
}

fn th(kind: ThetaKind, z: f64, a: f64) -> f64 {
    theta_series(kind, z, a, THETA_TOL)
}

#[inline]
fn parity_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Integer part of `sigma / N` counted in whole periods away from the
/// centered cell `[-ell, ell]`, i.e. `floor((sigma + ell) / N)`. It is zero for
/// every in-range label.
#[inline]
pub fn integer_part(sigma: i64, dim: Dim) -> i64 {
    (sigma + dim.ell()).div_euclid(dim.n() as i64)
}

/// `Phi(eta, xi; N) = N I_eta I_xi - eta I_xi - xi I_eta`.
pub fn phase_phi(eta: i64, xi: i64, dim: Dim) -> i64 {
    let ie = integer_part(eta, dim);
    let ix = integer_part(xi, dim);
    dim.n() as i64 * ie * ix - eta * ix - xi * ie
}

/// Principal complex power `k^(-s)` of a real kernel value.
pub fn kernel_power(k: f64, s: C64) -> C64 {
    if s == ZERO {
        return C64::new(1.0, 0.0);
    }
    (-s * C64::new(k, 0.0).ln()).exp()
}

/// Kernel `K(eta, xi)` for one dimension. In-range values are tabulated once;
/// other integer arguments go through the same theta formula unreduced.
#[derive(Clone, Debug)]
pub struct KernelTable {
    dim: Dim,
    a: f64,
    norm: f64,
    table: GridFn,
}

pub fn kernel_k(dim: Dim) -> Result<KernelTable> {
    KernelTable::new(dim)
}

impl KernelTable {
    pub fn new(dim: Dim) -> Result<Self> {
        let a = 1.0 / (2.0 * dim.n() as f64);
        // validates the lattice parameter once for all later evaluations
        theta(ThetaKind::Three, 0.0, a, THETA_TOL)?;
        let norm = 2.0
            * (th(ThetaKind::Three, 0.0, a) * th(ThetaKind::Three, 0.0, 4.0 * a)
                + th(ThetaKind::Four, 0.0, a) * th(ThetaKind::Two, 0.0, 4.0 * a));
        let mut k = Self { dim, a, norm, table: GridFn::zeros(dim) };
        let table = GridFn::from_fn(dim, |e, x| C64::new(k.eval(e, x), 0.0));
        k.table = table;
        Ok(k)
    }

    fn eval(&self, eta: i64, xi: i64) -> f64 {
        let pa = PI * self.a;
        let (ze, zx) = (pa * eta as f64, pa * xi as f64);
        let t3e = th(ThetaKind::Three, ze, self.a);
        let t4e = th(ThetaKind::Four, ze, self.a);
        let t3x = th(ThetaKind::Three, zx, self.a);
        let t4x = th(ThetaKind::Four, zx, self.a);
        let n = self.dim.n() as i64;
        let v = t3e * t3x
            + t3e * t4x * parity_sign(eta)
            + t4e * t3x * parity_sign(xi)
            + t4e * t4x * parity_sign(eta + xi + n);
        v / self.norm
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Lattice parameter `a = 1/(2N)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn table(&self) -> &GridFn {
        &self.table
    }

    /// `K` at any integer arguments; out-of-range points are not wrapped.
    pub fn value(&self, eta: i64, xi: i64) -> f64 {
        if self.dim.contains(eta) && self.dim.contains(xi) {
            self.table.get(eta, xi).re
        } else {
            self.eval(eta, xi)
        }
    }

    /// `K(eta, xi)^(-s)`.
    pub fn weight(&self, eta: i64, xi: i64, s: C64) -> C64 {
        kernel_power(self.value(eta, xi), s)
    }

    /// Grid of `K^(-s)` over in-range labels.
    pub fn weight_grid(&self, s: C64) -> GridFn {
        GridFn::from_fn(self.dim, |e, x| self.weight(e, x, s))
    }

    /// 1-D smoothing function `E(chi)` of the marginal hierarchy.
    pub fn smoothing_1d(&self, chi: i64) -> f64 {
        let a = self.a;
        let z = 2.0 * PI * a * chi as f64;
        let num = th(ThetaKind::Three, 0.0, a) * th(ThetaKind::Three, z, a)
            + th(ThetaKind::Four, 0.0, a) * th(ThetaKind::Four, z, a);
        let den = self.norm / 2.0;
        num / den / (2.0 * self.dim.n() as f64).sqrt()
    }
}

pub fn smoothing_1d(chi: i64, dim: Dim) -> Result<f64> {
    Ok(KernelTable::new(dim)?.smoothing_1d(chi))
}

fn hermite(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Coefficients `F_{kappa,n}` of the finite number states in the coordinate
/// basis.
///
/// `raw` holds the Hermite-Gaussian sums normalized column by column. Those
/// columns are orthogonal across different `n mod 4` classes but not within
/// one class once `N >= 5`, so `basis` carries the sequentially
/// orthonormalized set (Gram-Schmidt in increasing `n`), which is what the
/// rest of the crate uses as the number basis. Column 0 is identical in both.
#[derive(Clone, Debug)]
pub struct FockCoefficients {
    dim: Dim,
    raw: Vec<Vec<C64>>,
    norms: Vec<f64>,
    basis: Vec<Vec<C64>>,
}

pub fn fock_coefficients(dim: Dim) -> FockCoefficients {
    FockCoefficients::new(dim)
}

impl FockCoefficients {
    pub fn new(dim: Dim) -> Self {
        let n = dim.n();
        let nf = n as f64;
        let scale = (2.0 * PI / nf).sqrt();
        let mut raw: Vec<Vec<C64>> = Vec::with_capacity(n);
        let mut norms = Vec::with_capacity(n);
        for order in 0..n {
            // g(beta) = exp(-pi beta^2 / N) H_n(sqrt(2 pi / N) beta), even or odd in beta
            let turning = ((2 * order + 1) as f64 * nf / (2.0 * PI)).sqrt();
            let mut terms = vec![hermite(order, 0.0)];
            let mut peak = terms[0].abs();
            for beta in 1.. {
                let b = beta as f64;
                let g = (-PI * b * b / nf).exp() * hermite(order, scale * b);
                peak = peak.max(g.abs());
                terms.push(g);
                if b > turning && g.abs() < THETA_TOL * peak {
                    break;
                }
            }
            let odd = order % 2 == 1;
            let phase = C64::new(0.0, -1.0).powu(order as u32) / nf.sqrt();
            let col: Vec<C64> = dim
                .labels()
                .map(|kappa| {
                    let mut acc = C64::new(terms[0], 0.0);
                    for (beta, &g) in terms.iter().enumerate().skip(1) {
                        let w = root_of_unity(beta as i64 * kappa, n);
                        // g(-beta) e^{-i theta} pairs with g(beta) e^{i theta}
                        acc += if odd { w - w.conj() } else { w + w.conj() } * g;
                    }
                    acc * phase
                })
                .collect();
            let c = norm(&col);
            norms.push(1.0 / c);
            raw.push(col.iter().map(|z| z / c).collect());
        }

        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
        for col in &raw {
            let mut v = col.clone();
            for _ in 0..2 {
                for b in &basis {
                    let p = inner(b, &v);
                    for (x, y) in v.iter_mut().zip(b) {
                        *x -= p * y;
                    }
                }
            }
            let c = norm(&v);
            basis.push(v.into_iter().map(|z| z / c).collect());
        }
        Self { dim, raw, norms, basis }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Raw normalized coefficient, periodic in `kappa`.
    pub fn raw(&self, kappa: i64, n: usize) -> C64 {
        self.raw[n][self.dim.index(kappa)]
    }

    pub fn raw_column(&self, n: usize) -> &[C64] {
        &self.raw[n]
    }

    /// Normalization constant `N_n` of the raw column.
    pub fn norm_constant(&self, n: usize) -> f64 {
        self.norms[n]
    }

    /// Orthonormal number-basis coefficient, periodic in `kappa`.
    pub fn coeff(&self, kappa: i64, n: usize) -> C64 {
        self.basis[n][self.dim.index(kappa)]
    }

    /// Number state `|n>` in the coordinate basis.
    pub fn number_state(&self, n: usize) -> Result<&[C64]> {
        self.basis
            .get(n)
            .map(|v| v.as_slice())
            .ok_or(Error::IndexOutOfRange { index: n, dim: self.dim.n() })
    }

    pub fn vacuum(&self) -> &[C64] {
        &self.basis[0]
    }

    /// Gram matrix of the raw columns.
    pub fn raw_gram(&self) -> CMatrix {
        CMatrix::from_fn(self.dim.n(), |m, n| inner(&self.raw[m], &self.raw[n]))
    }

    pub fn gram(&self) -> CMatrix {
        CMatrix::from_fn(self.dim.n(), |m, n| inner(&self.basis[m], &self.basis[n]))
    }

    /// Largest off-diagonal modulus of the raw Gram matrix.
    pub fn raw_orthogonality_residual(&self) -> f64 {
        let g = self.raw_gram();
        let n = self.dim.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(g[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// `Gamma_mn(eta, xi)` over in-range labels.
    pub fn gamma(&self, m: usize, n: usize) -> Result<GridFn> {
        let dim = self.dim;
        let nn = dim.n();
        for idx in [m, n] {
            if idx >= nn {
                return Err(Error::IndexOutOfRange { index: idx, dim: nn });
            }
        }
        Ok(GridFn::from_fn(dim, |eta, xi| {
            let mut acc = ZERO;
            for sigma in dim.labels() {
                acc += root_of_unity(sigma * eta, nn) * self.coeff(sigma, n) * self.coeff(sigma - xi, m).conj();
            }
            acc * C64::from_polar(1.0, -PI * (eta * xi) as f64 / nn as f64)
        }))
    }
}

/// `Gamma_mn` for all `m, n`.
#[derive(Clone, Debug)]
pub struct GammaTable {
    dim: Dim,
    values: Vec<GridFn>,
}

pub fn gamma_mn(fock: &FockCoefficients) -> GammaTable {
    GammaTable::new(fock)
}

impl GammaTable {
    pub fn new(fock: &FockCoefficients) -> Self {
        let n = fock.dim().n();
        let values = (0..n * n)
            .map(|k| fock.gamma(k / n, k % n).expect("indices in range"))
            .collect();
        Self { dim: fock.dim(), values }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn get(&self, m: usize, n: usize) -> &GridFn {
        &self.values[m * self.dim.n() + n]
    }
}
