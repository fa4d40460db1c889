//! Clock and shift operators, the symmetrized Schwinger basis, the s-ordered
//! kernel `T^(s)(mu, nu)` and operator expansions in both bases.
//!
//! Conventions: `U|k> = exp(2πik/N)|k>` and `V|k> = |k-1>` on centered labels,
//! so that `V U = exp(2πi/N) U V`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{root_of_unity, CMatrix, Dim, GridFn, ONE, ZERO};
use crate::theta::{phase_phi, FockCoefficients, KernelTable};

/// exp(iπ m / N) for integer `m`, reduced modulo `2N` first.
#[inline]
pub(crate) fn half_root(m: i64, n: usize) -> C64 {
    let r = m.rem_euclid(2 * n as i64) as f64;
    C64::from_polar(1.0, PI * r / n as f64)
}

/// Complex ordering parameter with `|s| <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderParam(C64);

impl OrderParam {
    /// Glauber-Sudarshan ordering.
    pub const P: OrderParam = OrderParam(C64::new(1.0, 0.0));
    /// Symmetric (Wigner) ordering.
    pub const W: OrderParam = OrderParam(C64::new(0.0, 0.0));
    /// Antinormal (Husimi) ordering.
    pub const H: OrderParam = OrderParam(C64::new(-1.0, 0.0));

    pub fn new(s: C64) -> Result<Self> {
        if !(s.re.is_finite() && s.im.is_finite()) || s.norm() > 1.0 + 1e-12 {
            return Err(Error::OrderParamOutOfRange(s.norm()));
        }
        Ok(Self(s))
    }

    pub fn real(s: f64) -> Result<Self> {
        Self::new(C64::new(s, 0.0))
    }

    pub fn imag(omega: f64) -> Result<Self> {
        Self::new(C64::new(0.0, omega))
    }

    #[inline]
    pub fn value(self) -> C64 {
        self.0
    }

    pub fn conj(self) -> Self {
        Self(self.0.conj())
    }

    pub fn is_real(self) -> bool {
        self.0.im == 0.0
    }

    fn key(self) -> (u64, u64) {
        // +0.0 and -0.0 describe the same ordering
        let norm = |x: f64| if x == 0.0 { 0u64 } else { x.to_bits() };
        (norm(self.0.re), norm(self.0.im))
    }
}

impl std::ops::Neg for OrderParam {
    type Output = Self;

    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Display for OrderParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0.re, self.0.im)
    }
}

impl FromStr for OrderParam {
    type Err = Error;

    /// Accepts `"re"` or `"re,im"`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid ordering parameter '{s}'")))
        };
        let mut parts = s.split(',');
        let re = parse(parts.next().unwrap_or(""))?;
        let im = match parts.next() {
            Some(t) => parse(t)?,
            None => 0.0,
        };
        if parts.next().is_some() {
            return Err(Error::Parse(format!("invalid ordering parameter '{s}'")));
        }
        Self::new(C64::new(re, im))
    }
}

pub fn u_matrix(dim: Dim) -> CMatrix {
    let diag: Vec<C64> = dim.labels().map(|k| root_of_unity(k, dim.n())).collect();
    CMatrix::from_diag(&diag)
}

pub fn v_matrix(dim: Dim) -> CMatrix {
    let mut v = CMatrix::zeros(dim.n());
    for k in dim.labels() {
        v[(dim.index(k - 1), dim.index(k))] = ONE;
    }
    v
}

/// Nonzero entries `(row, col, value)` of `S(eta, xi)`, one per column.
pub fn s_entries(eta: i64, xi: i64, dim: Dim) -> impl Iterator<Item = (usize, usize, C64)> {
    let n = dim.n();
    let pref = half_root(eta * xi, n) / (n as f64).sqrt();
    (0..n).map(move |col| {
        let row = dim.index(dim.label(col) - xi);
        (row, col, pref * root_of_unity(eta * dim.label(row), n))
    })
}

/// `S(eta, xi) = N^(-1/2) exp(iπ eta xi / N) U^eta V^xi` for any integers.
pub fn s_op(eta: i64, xi: i64, dim: Dim) -> CMatrix {
    let mut m = CMatrix::zeros(dim.n());
    for (r, c, v) in s_entries(eta, xi, dim) {
        m[(r, c)] = v;
    }
    m
}

/// `Tr[S(eta, xi) A]`
pub fn s_trace(eta: i64, xi: i64, a: &CMatrix) -> C64 {
    let dim = Dim::new(a.n()).expect("odd dimension");
    s_entries(eta, xi, dim).map(|(r, c, v)| v * a[(c, r)]).sum()
}

/// The N² matrices `T^(s)(mu, nu)` over in-range labels.
#[derive(Debug)]
pub struct TBasis {
    dim: Dim,
    s: OrderParam,
    mats: Vec<CMatrix>,
}

impl TBasis {
    pub fn s(&self) -> OrderParam {
        self.s
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Labels wrap modulo N.
    pub fn get(&self, mu: i64, nu: i64) -> &CMatrix {
        &self.mats[self.dim.index(mu) * self.dim.n() + self.dim.index(nu)]
    }

    /// `(mu, nu, T)` in row-major centered order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, &CMatrix)> + '_ {
        let n = self.dim.n();
        self.mats
            .iter()
            .enumerate()
            .map(move |(k, m)| (self.dim.label(k / n), self.dim.label(k % n), m))
    }
}

/// Per-dimension context holding the kernel, the number basis and a cache of
/// `T^(s)` families.
pub struct PhaseSpace {
    dim: Dim,
    kernel: KernelTable,
    fock: FockCoefficients,
    cache: Mutex<HashMap<(u64, u64), Arc<TBasis>>>,
}

impl fmt::Debug for PhaseSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseSpace").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl PhaseSpace {
    pub fn new(dim: Dim) -> Result<Self> {
        Ok(Self {
            dim,
            kernel: KernelTable::new(dim)?,
            fock: FockCoefficients::new(dim),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_n(n: usize) -> Result<Self> {
        Self::new(Dim::new(n)?)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.dim.n()
    }

    pub fn kernel(&self) -> &KernelTable {
        &self.kernel
    }

    pub fn fock(&self) -> &FockCoefficients {
        &self.fock
    }

    pub(crate) fn check(&self, a: &CMatrix) -> Result<()> {
        if a.n() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, phase space has N = {}",
                a.n(),
                a.n(),
                self.n()
            )));
        }
        Ok(())
    }

    pub fn u_matrix(&self) -> CMatrix {
        u_matrix(self.dim)
    }

    pub fn v_matrix(&self) -> CMatrix {
        v_matrix(self.dim)
    }

    pub fn s_op(&self, eta: i64, xi: i64) -> CMatrix {
        s_op(eta, xi, self.dim)
    }

    /// `K(eta, xi)^(-s) S(eta, xi)`.
    pub fn s_op_ordered(&self, eta: i64, xi: i64, s: OrderParam) -> CMatrix {
        s_op(eta, xi, self.dim).scale(self.kernel.weight(eta, xi, s.value()))
    }

    /// `T^(s)(mu, nu)` for any integer labels.
    pub fn t_op(&self, mu: i64, nu: i64, s: OrderParam) -> CMatrix {
        let dim = self.dim;
        let n = dim.n();
        let labels: Vec<i64> = dim.labels().collect();
        // coefficient of S(eta, xi) in the sum, indexed [xi][eta]
        let coef: Vec<Vec<C64>> = labels
            .iter()
            .map(|&xi| {
                labels
                    .iter()
                    .map(|&eta| {
                        half_root(phase_phi(eta, xi, dim), 1)
                            * root_of_unity(-(eta * mu + xi * nu), n)
                            * self.kernel.weight(eta, xi, s.value())
                            * half_root(eta * xi, n)
                    })
                    .collect()
            })
            .collect();
        let inv_n = 1.0 / n as f64;
        CMatrix::from_fn(n, |r, c| {
            let row = dim.label(r);
            let xi = dim.center(dim.label(c) - row);
            let cx = &coef[dim.index(xi)];
            labels
                .iter()
                .zip(cx)
                .map(|(&eta, &w)| w * root_of_unity(eta * row, n))
                .sum::<C64>()
                * inv_n
        })
    }

    /// Cached family of `T^(s)` over all in-range points.
    pub fn t_basis(&self, s: OrderParam) -> Arc<TBasis> {
        if let Some(b) = self.cache.lock().expect("cache lock").get(&s.key()) {
            return Arc::clone(b);
        }
        let mats = self
            .dim
            .labels()
            .flat_map(|mu| self.dim.labels().map(move |nu| (mu, nu)))
            .map(|(mu, nu)| self.t_op(mu, nu, s))
            .collect();
        let basis = Arc::new(TBasis { dim: self.dim, s, mats });
        let mut cache = self.cache.lock().expect("cache lock");
        Arc::clone(cache.entry(s.key()).or_insert(basis))
    }

    /// `Tr[T^(t)(mu, nu) T^(s)(mu', nu')]` as a function of the offset
    /// `(mu' - mu, nu' - nu)`.
    pub fn t_overlap(&self, t: OrderParam, s: OrderParam, dmu: i64, dnu: i64) -> C64 {
        let n = self.n();
        let w = t.value() + s.value();
        let mut acc = ZERO;
        for eta in self.dim.labels() {
            for xi in self.dim.labels() {
                acc += root_of_unity(eta * dmu + xi * dnu, n) * self.kernel.weight(eta, xi, w);
            }
        }
        acc / n as f64
    }

    /// Coefficients `Tr[S†(eta, xi) O]`.
    pub fn decompose_schwinger(&self, o: &CMatrix) -> Result<GridFn> {
        self.check(o)?;
        Ok(GridFn::from_fn(self.dim, |eta, xi| s_trace(-eta, -xi, o)))
    }

    /// `Σ O(eta, xi) S(eta, xi)`.
    pub fn reconstruct_schwinger(&self, coeffs: &GridFn) -> Result<CMatrix> {
        self.check_grid(coeffs)?;
        let mut out = CMatrix::zeros(self.n());
        for (eta, xi, c) in coeffs.iter() {
            for (r, col, v) in s_entries(eta, xi, self.dim) {
                out[(r, col)] += c * v;
            }
        }
        Ok(out)
    }

    pub(crate) fn check_grid(&self, g: &GridFn) -> Result<()> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "grid has N = {}, phase space has N = {}",
                g.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Coefficients `O^(-s)(mu, nu) = Tr[T^(-s)(mu, nu) O]`.
    pub fn decompose_t(&self, o: &CMatrix, s: OrderParam) -> Result<GridFn> {
        self.check(o)?;
        let basis = self.t_basis(-s);
        Ok(GridFn::from_fn(self.dim, |mu, nu| basis.get(mu, nu).trace_product(o)))
    }

    /// `(1/N) Σ O^(-s)(mu, nu) T^(s)(mu, nu)`.
    pub fn reconstruct_t(&self, coeffs: &GridFn, s: OrderParam) -> Result<CMatrix> {
        self.check_grid(coeffs)?;
        let basis = self.t_basis(s);
        let mut out = CMatrix::zeros(self.n());
        let inv_n = C64::new(1.0 / self.n() as f64, 0.0);
        for (mu, nu, c) in coeffs.iter() {
            out.axpy(c * inv_n, basis.get(mu, nu));
        }
        Ok(out)
    }

    /// `(1/N) Σ [√N S(eta, xi)] O [√N S(eta, xi)]†`.
    pub fn depolarize(&self, o: &CMatrix) -> Result<CMatrix> {
        self.depolarize_ordered(o, OrderParam::W)
    }

    /// Same average over `√N S^(s)`; unitary families need `s = iω`.
    pub fn depolarize_ordered(&self, o: &CMatrix, s: OrderParam) -> Result<CMatrix> {
        self.check(o)?;
        let n = self.n();
        let mut out = CMatrix::zeros(n);
        let root_n = (n as f64).sqrt();
        for eta in self.dim.labels() {
            for xi in self.dim.labels() {
                let u = self.s_op_ordered(eta, xi, s).scale(C64::new(root_n, 0.0));
                out += &o.conjugate_by(&u);
            }
        }
        Ok(out.scale(C64::new(1.0 / n as f64, 0.0)))
    }
}

pub fn t_op(mu: i64, nu: i64, s: OrderParam, dim: Dim) -> Result<CMatrix> {
    Ok(PhaseSpace::new(dim)?.t_op(mu, nu, s))
}
