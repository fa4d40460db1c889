//! Generalized Bell states, bipartite phase-space functions and the
//! three-party teleportation protocol.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{dft_matrix, root_of_unity, tensor, tensor_vec, CMatrix, Dim, GridFn, ZERO};
use crate::quasiprob::{phase_fn, DensityOperator, PhaseSpaceFunction};
use crate::schwinger::{OrderParam, PhaseSpace};

/// Largest dimension for the `N^4 x N^4` coefficient tables.
pub const COEFF_TABLE_LIMIT: usize = 5;
/// Largest dimension for the three-party simulation.
pub const TELEPORT_LIMIT: usize = 7;

/// Bell-state label `(omega1, omega2)`, stored centered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BellLabel {
    pub omega1: i64,
    pub omega2: i64,
}

impl BellLabel {
    pub fn new(omega1: i64, omega2: i64, dim: Dim) -> Self {
        Self { omega1: dim.center(omega1), omega2: dim.center(omega2) }
    }

    pub fn all(dim: Dim) -> impl Iterator<Item = BellLabel> {
        dim.labels().flat_map(move |a| dim.labels().map(move |b| BellLabel { omega1: a, omega2: b }))
    }
}

/// `|Psi_{ω1,ω2}> = (V^ω1 ⊗ U^-ω2) N^(-1/2) Σ_ε |v_ε>|v_ε>`, with `|v_ε>` the
/// DFT columns.
pub fn bell_state(omega: BellLabel, dim: Dim) -> Vec<C64> {
    let n = dim.n();
    let f = dft_matrix(dim);
    let mut psi = vec![ZERO; n * n];
    let norm = 1.0 / (n as f64).sqrt();
    for e in 0..n {
        let col: Vec<C64> = (0..n).map(|k| f[(k, e)]).collect();
        for (p, v) in psi.iter_mut().zip(tensor_vec(&col, &col)) {
            *p += v * norm;
        }
    }
    // V^ω1 sends |k> to |k - ω1>, U^-ω2 multiplies |k> by exp(-2πi ω2 k / N)
    let mut out = vec![ZERO; n * n];
    for a in 0..n {
        for b in 0..n {
            let ka = dim.label(a);
            let kb = dim.label(b);
            let target = dim.index(ka - omega.omega1) * n + b;
            out[target] = psi[a * n + b] * root_of_unity(-omega.omega2 * kb, n);
        }
    }
    out
}

/// Table over four centered labels, first label most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid4 {
    dim: Dim,
    data: Vec<C64>,
}

impl Grid4 {
    pub fn zeros(dim: Dim) -> Self {
        Self { dim, data: vec![ZERO; dim.n().pow(4)] }
    }

    fn offset(&self, a: i64, b: i64, c: i64, d: i64) -> usize {
        let n = self.dim.n();
        let i = |x| self.dim.index(x);
        ((i(a) * n + i(b)) * n + i(c)) * n + i(d)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn get(&self, a: i64, b: i64, c: i64, d: i64) -> C64 {
        self.data[self.offset(a, b, c, d)]
    }

    pub fn set(&mut self, a: i64, b: i64, c: i64, d: i64, v: C64) {
        let o = self.offset(a, b, c, d);
        self.data[o] = v;
    }

    pub fn values(&self) -> &[C64] {
        &self.data
    }

    pub fn sum(&self) -> C64 {
        self.data.iter().sum()
    }

    /// `(a, b, c, d, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, i64, i64, C64)> + '_ {
        let d = self.dim;
        let n = d.n();
        self.data.iter().enumerate().map(move |(k, &v)| {
            (d.label(k / (n * n * n)), d.label(k / (n * n) % n), d.label(k / n % n), d.label(k % n), v)
        })
    }

    pub fn max_abs_diff(&self, other: &Grid4) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `F^(s1,s2)(mu1, nu1, mu2, nu2) = Tr[T1^(s1) ⊗ T2^(s2) rho]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartitePhaseFn {
    pub s1: OrderParam,
    pub s2: OrderParam,
    pub grid: Grid4,
}

impl BipartitePhaseFn {
    pub fn get(&self, mu1: i64, nu1: i64, mu2: i64, nu2: i64) -> C64 {
        self.grid.get(mu1, nu1, mu2, nu2)
    }

    /// `(1/N^2) Σ F`, equal to 1 for states.
    pub fn normalization(&self) -> C64 {
        self.grid.sum() / (self.grid.dim().n().pow(2) as f64)
    }
}

fn check_bipartite(ps: &PhaseSpace, a: &CMatrix) -> Result<()> {
    let n = ps.n();
    if a.n() != n * n {
        return Err(Error::DimensionMismatch(format!("expected a {}-dimensional bipartite operator, got {}", n * n, a.n())));
    }
    Ok(())
}

/// `X = Tr_2[(1 ⊗ B) A]` for `A` on `N^2` dimensions.
fn contract_second(a: &CMatrix, b: &CMatrix, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, ip| {
        let mut acc = ZERO;
        for j in 0..n {
            for jp in 0..n {
                acc += b[(jp, j)] * a[(i * n + j, ip * n + jp)];
            }
        }
        acc
    })
}

/// Table of `Tr[T1^(s1)(mu1,nu1) ⊗ T2^(s2)(mu2,nu2) A]` for any `N^2`-dimensional `A`.
pub fn bipartite_traces(ps: &PhaseSpace, a: &CMatrix, s1: OrderParam, s2: OrderParam) -> Result<Grid4> {
    check_bipartite(ps, a)?;
    let dim = ps.dim();
    let n = dim.n();
    let (b1, b2) = (ps.t_basis(s1), ps.t_basis(s2));
    let mut grid = Grid4::zeros(dim);
    for (mu2, nu2, t2) in b2.iter() {
        let x = contract_second(a, t2, n);
        for (mu1, nu1, t1) in b1.iter() {
            grid.set(mu1, nu1, mu2, nu2, t1.trace_product(&x));
        }
    }
    Ok(grid)
}

pub fn bipartite_phase_fn(ps: &PhaseSpace, rho: &CMatrix, s1: OrderParam, s2: OrderParam) -> Result<BipartitePhaseFn> {
    Ok(BipartitePhaseFn { s1, s2, grid: bipartite_traces(ps, rho, s1, s2)? })
}

/// Closed form of the Bell-state function:
/// `(1/N^2) Σ exp{2πi[η(mu1+mu2+ω1) + ξ(nu1-nu2-ω2)]/N} K(η,ξ)^-(s1+s2)`.
pub fn bell_phase_fn_closed(ps: &PhaseSpace, omega: BellLabel, s1: OrderParam, s2: OrderParam) -> BipartitePhaseFn {
    let dim = ps.dim();
    let n = dim.n();
    let s = s1.value() + s2.value();
    let k = ps.kernel();
    let reduced = GridFn::from_fn(dim, |a, b| {
        let mut acc = ZERO;
        for eta in dim.labels() {
            for xi in dim.labels() {
                acc += root_of_unity(eta * a + xi * b, n) * k.weight(eta, xi, s);
            }
        }
        acc / (n * n) as f64
    });
    let mut grid = Grid4::zeros(dim);
    for m1 in dim.labels() {
        for n1 in dim.labels() {
            for m2 in dim.labels() {
                for n2 in dim.labels() {
                    grid.set(m1, n1, m2, n2, reduced.get(m1 + m2 + omega.omega1, n1 - n2 - omega.omega2));
                }
            }
        }
    }
    BipartitePhaseFn { s1, s2, grid }
}

fn guard(dim: Dim, what: &'static str, limit: usize) -> Result<()> {
    if dim.n() > limit {
        return Err(Error::TooLarge { what, dim: dim.n(), limit });
    }
    Ok(())
}

/// `Υ^(-s1,-s2)(ω, ω' | mu1, nu1, mu2, nu2) = Tr[T1^(-s1) ⊗ T2^(-s2) |Ψ_ω><Ψ_ω'|]`,
/// the coefficients of `|Ψ_ω><Ψ_ω'|` in the `T^(s1) ⊗ T^(s2)` basis.
pub fn upsilon_coeffs(ps: &PhaseSpace, omega: BellLabel, omega_p: BellLabel, s1: OrderParam, s2: OrderParam) -> Result<Grid4> {
    guard(ps.dim(), "Bell coefficient table", COEFF_TABLE_LIMIT)?;
    let d = ps.dim();
    let op = CMatrix::outer(&bell_state(omega, d), &bell_state(omega_p, d));
    bipartite_traces(ps, &op, -s1, -s2)
}

/// `Θ^(s1,s2)(mu1, nu1, mu2, nu2 | ω1, ω2, ω1', ω2') = <Ψ_ω| T1^(s1) ⊗ T2^(s2) |Ψ_ω'>`,
/// indexed `(ω1, ω2, ω1', ω2')`.
pub fn theta_coeffs(ps: &PhaseSpace, point: (i64, i64, i64, i64), s1: OrderParam, s2: OrderParam) -> Result<Grid4> {
    let d = ps.dim();
    guard(d, "Bell coefficient table", COEFF_TABLE_LIMIT)?;
    let op = tensor(ps.t_basis(s1).get(point.0, point.1), ps.t_basis(s2).get(point.2, point.3));
    let states: Vec<(BellLabel, Vec<C64>)> = BellLabel::all(d).map(|w| (w, bell_state(w, d))).collect();
    let mut grid = Grid4::zeros(d);
    for (wp, psi_p) in &states {
        let image = op.apply(psi_p);
        for (w, psi) in &states {
            let v: C64 = psi.iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
            grid.set(w.omega1, w.omega2, wp.omega1, wp.omega2, v);
        }
    }
    Ok(grid)
}

/// Outcome of the projective Bell measurement on subsystems 1 and 2.
#[derive(Clone, Debug)]
pub struct Teleported {
    pub outcome: BellLabel,
    /// Normalized state of subsystem 3.
    pub rho3: DensityOperator,
    pub probability: f64,
    /// `Λ^(-s1,-s3)` obtained from the input's `F^(-s1)`.
    pub lambda: GridFn,
    /// `F^(-s3)` of the received state.
    pub received: PhaseSpaceFunction,
}

/// Run the protocol on `rho1 ⊗ |Ψ_00><Ψ_00|` and condition on `outcome`.
pub fn teleport(ps: &PhaseSpace, rho1: &DensityOperator, outcome: BellLabel, s1: OrderParam, s3: OrderParam) -> Result<Teleported> {
    let dim = ps.dim();
    guard(dim, "three-party simulation", TELEPORT_LIMIT)?;
    ps.check(rho1.matrix())?;
    let n = dim.n();
    let resource = CMatrix::projector(&bell_state(BellLabel::new(0, 0, dim), dim));
    let full = tensor(rho1.matrix(), &resource);
    let probe = bell_state(outcome, dim);
    // <Ψ_ab|_12 rho |Ψ_ab>_12, leaving subsystem 3
    let mut entries = vec![ZERO; n * n];
    for (ab, pa) in probe.iter().enumerate().filter(|(_, p)| p.norm() > 0.0) {
        for (abp, pb) in probe.iter().enumerate().filter(|(_, p)| p.norm() > 0.0) {
            let w = pa.conj() * pb;
            for c in 0..n {
                for cp in 0..n {
                    entries[c * n + cp] += w * full[(ab * n + c, abp * n + cp)];
                }
            }
        }
    }
    let cond = CMatrix::from_fn(n, |c, cp| entries[c * n + cp]);
    let probability = cond.trace().re;
    let rho3 = DensityOperator::from_computed(cond.scale(C64::new(1.0 / probability, 0.0)))?;
    let f1 = phase_fn(ps, rho1, -s1)?;
    let lambda = lambda_coeffs(ps, &f1, outcome, s3)?;
    let received = phase_fn(ps, &rho3, -s3)?;
    Ok(Teleported { outcome, rho3, probability, lambda, received })
}

/// `Λ(mu3, nu3) = Σ ℜ(mu1, nu1, mu3, nu3) F1^(-s1)(mu1, nu1)` with
/// `ℜ = (1/N^2) Σ exp{2πi[η(mu1-mu3+α) - ξ(nu1-nu3-β)]/N} K(η,ξ)^(s3-s1)`.
pub fn lambda_coeffs(ps: &PhaseSpace, f1: &PhaseSpaceFunction, outcome: BellLabel, s3: OrderParam) -> Result<GridFn> {
    ps.check_grid(f1.grid())?;
    let dim = ps.dim();
    let n = dim.n();
    let s1 = -f1.s();
    let k = ps.kernel();
    let expo = s1.value() - s3.value();
    let r = GridFn::from_fn(dim, |a, b| {
        let mut acc = ZERO;
        for eta in dim.labels() {
            for xi in dim.labels() {
                acc += root_of_unity(eta * a - xi * b, n) * k.weight(eta, xi, expo);
            }
        }
        acc / (n * n) as f64
    });
    let (alpha, beta) = (outcome.omega1, outcome.omega2);
    Ok(GridFn::from_fn(dim, |m3, n3| {
        f1.grid().iter().map(|(m1, n1, f)| r.get(m1 - m3 + alpha, n1 - n3 - beta) * f).sum()
    }))
}

/// `(1/N) Σ Λ(mu3, nu3) T^(s3)(mu3, nu3)`.
pub fn rho_from_lambda(ps: &PhaseSpace, lambda: &GridFn, s3: OrderParam) -> Result<CMatrix> {
    ps.reconstruct_t(lambda, s3)
}

/// Conditional state of subsystem 3 assembled term by term from the
/// three-party expansion: `F1^(-s1)`, the resource's `F23^(-s2,-s3)` and the
/// Bell-diagonal `Θ^(s1,s2)` coefficients, summed against `T3^(s3)`. The
/// result carries the factor `1/N^2` of the outcome probability.
pub fn teleport_expansion(
    ps: &PhaseSpace,
    rho1: &DensityOperator,
    outcome: BellLabel,
    s1: OrderParam,
    s2: OrderParam,
    s3: OrderParam,
) -> Result<CMatrix> {
    let dim = ps.dim();
    guard(dim, "three-party expansion", TELEPORT_LIMIT)?;
    let n = dim.n();
    let f1 = phase_fn(ps, rho1, -s1)?;
    let resource = CMatrix::projector(&bell_state(BellLabel::new(0, 0, dim), dim));
    let f23 = bipartite_traces(ps, &resource, -s2, -s3)?;
    // Θ(.|αβ, αβ) is the Bell-state function itself
    let theta = bipartite_traces(ps, &CMatrix::projector(&bell_state(outcome, dim)), s1, s2)?;
    let mut coeff = GridFn::zeros(dim);
    for (m1, n1, f) in f1.grid().iter() {
        for m2 in dim.labels() {
            for n2 in dim.labels() {
                let w = f * theta.get(m1, n1, m2, n2);
                for m3 in dim.labels() {
                    for n3 in dim.labels() {
                        let v = coeff.get(m3, n3) + w * f23.get(m2, n2, m3, n3);
                        coeff.set(m3, n3, v);
                    }
                }
            }
        }
    }
    let scale = 1.0 / (n as f64).powi(3);
    let coeff = coeff.map(|v| v * scale);
    let basis = ps.t_basis(s3);
    let mut out = CMatrix::zeros(n);
    for (m3, n3, t) in basis.iter() {
        out.axpy(coeff.get(m3, n3), t);
    }
    Ok(out)
}
