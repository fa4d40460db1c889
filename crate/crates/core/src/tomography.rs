//! Marginals, symplectic transformations, discrete Radon transforms, Wigner
//! reconstruction from line sums and the ancilla scattering circuit.

use num_complex::Complex64 as C64;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;

use crate::error::{Error, Result};
use crate::lattice::{root_of_unity, tensor, CMatrix, Dim, GridFn, ONE, ZERO};
use crate::quasiprob::{char_fn, char_to_phase_grid, phase_fn, CharacteristicFunction, DensityOperator, PhaseSpaceFunction};
use crate::schwinger::{half_root, s_op, OrderParam, PhaseSpace};
use crate::theta::KernelTable;

/// Inverse of `a` modulo `N`, as a centered label.
pub fn mod_inverse(a: i64, dim: Dim) -> Result<i64> {
    let n = dim.n() as i64;
    let (mut r0, mut r1) = (a.rem_euclid(n), n);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::NoModularInverse(a, dim.n()));
    }
    Ok(dim.center(s0))
}

/// Centered representative of `x` shifted by `N` if needed to get the
/// requested parity.
fn with_parity(x: i64, odd: bool, dim: Dim) -> i64 {
    let c = dim.center(x);
    if (c.rem_euclid(2) == 1) == odd {
        c
    } else if c < 0 {
        c + dim.n() as i64
    } else {
        c - dim.n() as i64
    }
}

/// Integer quadruple with `z1 z4 - z2 z3 = 1 (mod N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticParams {
    dim: Dim,
    z: [i64; 4],
}

impl SymplecticParams {
    pub fn new(z1: i64, z2: i64, z3: i64, z4: i64, dim: Dim) -> Result<Self> {
        let z = [z1, z2, z3, z4].map(|v| dim.center(v));
        if dim.center(z[0] * z[3] - z[1] * z[2]) != dim.center(1) {
            return Err(Error::NotSymplectic(dim.n()));
        }
        mod_inverse(z[3], dim)?;
        mod_inverse(1 + z[1] * z[2], dim)?;
        Ok(Self { dim, z })
    }

    pub fn identity(dim: Dim) -> Self {
        Self { dim, z: [1, 0, 0, 1].map(|v| dim.center(v)) }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn zeta(&self) -> [i64; 4] {
        self.z
    }

    /// Image of `(eta, xi)`, reduced into range.
    pub fn apply(&self, eta: i64, xi: i64) -> (i64, i64) {
        let [z1, z2, z3, z4] = self.z;
        (self.dim.center(z1 * eta + z2 * xi), self.dim.center(z3 * eta + z4 * xi))
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &SymplecticParams) -> Result<Self> {
        let [a1, a2, a3, a4] = self.z;
        let [b1, b2, b3, b4] = other.z;
        Self::new(a1 * b1 + a2 * b3, a1 * b2 + a2 * b4, a3 * b1 + a4 * b3, a3 * b2 + a4 * b4, self.dim)
    }

    /// `(Omega1, Omega2, Omega3)` entering `C`, `N` and `M`.
    ///
    /// The generator sums realize the label map with off-diagonal entries of
    /// the opposite sign, so they are fed `(z1, -z2, -z3, z4)`. `Omega1` is
    /// taken odd and `Omega2`, `Omega3` even so that the half-integer phases
    /// in the sums stay consistent.
    pub fn omegas(&self) -> (i64, i64, i64) {
        let d = self.dim;
        let [_, z2, z3, z4] = self.z;
        let (y2, y3) = (-z2, -z3);
        let c = mod_inverse(1 + y2 * y3, d).expect("checked at construction");
        let z4inv = mod_inverse(z4, d).expect("checked at construction");
        let o1 = with_parity(z4 * c, true, d);
        let o2 = with_parity(y2 * z4inv * (1 + y2 * y3), false, d);
        let o3 = with_parity(y3 * z4 * c, false, d);
        (o1, o2, o3)
    }
}

fn sum_of_s(dim: Dim, f: impl Fn(i64, i64) -> (C64, i64, i64)) -> CMatrix {
    let n = dim.n();
    let mut out = CMatrix::zeros(n);
    for eta in dim.labels() {
        for xi in dim.labels() {
            let (c, a, b) = f(eta, xi);
            out.axpy(c, &s_op(a, b, dim));
        }
    }
    out.scale(C64::new(1.0 / (n as f64).sqrt(), 0.0))
}

pub fn symplectic_c(zeta: &SymplecticParams) -> CMatrix {
    let d = zeta.dim;
    let (o1, _, _) = zeta.omegas();
    sum_of_s(d, |e, x| (half_root(-(1 + o1) * e * x, d.n()), e, (1 - o1) * x))
}

pub fn symplectic_n(zeta: &SymplecticParams) -> CMatrix {
    let d = zeta.dim;
    let (_, o2, _) = zeta.omegas();
    sum_of_s(d, |e, x| (half_root((o2 * x - 2 * e) * x, d.n()), e, 0))
}

pub fn symplectic_m(zeta: &SymplecticParams) -> CMatrix {
    let d = zeta.dim;
    let (_, _, o3) = zeta.omegas();
    sum_of_s(d, |e, x| (half_root(-(o3 * e + 2 * x) * e, d.n()), 0, x))
}

/// `J = M N C`.
pub fn symplectic_j(zeta: &SymplecticParams) -> CMatrix {
    symplectic_m(zeta).matmul(&symplectic_n(zeta)).matmul(&symplectic_c(zeta))
}

/// Sign in `J S(eta, xi) J† = sign · S(eta', xi')` with the reduced image.
pub fn conjugation_sign(zeta: &SymplecticParams, eta: i64, xi: i64) -> f64 {
    let (a, b) = zeta.apply(eta, xi);
    if (eta * xi + a * b).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Transformed kernel in the relabeled form: the sum over `S^(s)(eta, xi)` with
/// kernel ratio `[K(eta, xi) / K(z4 eta - z2 xi, z1 xi - z3 eta)]^s` at
/// `(mu', nu')`.
pub fn transformed_t_op(ps: &PhaseSpace, zeta: &SymplecticParams, mu: i64, nu: i64, s: OrderParam) -> CMatrix {
    let d = ps.dim();
    let [z1, z2, z3, z4] = zeta.zeta();
    let k = ps.kernel();
    let mut out = CMatrix::zeros(d.n());
    for eta in d.labels() {
        for xi in d.labels() {
            let ratio = k.weight(eta, xi, -s.value()) * k.weight(z4 * eta - z2 * xi, z1 * xi - z3 * eta, s.value());
            let c = root_of_unity(-(eta * mu + xi * nu), d.n()) * ratio;
            out.axpy(c, &ps.s_op_ordered(eta, xi, s));
        }
    }
    out.scale(C64::new(1.0 / (d.n() as f64).sqrt(), 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Q,
    R,
}

/// Line marginal over centered labels.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalDistribution {
    pub s: OrderParam,
    pub axis: Axis,
    /// Line coefficients `(z1, z3)` for `Q` or `(z2, z4)` for `R`.
    pub line: (i64, i64),
    pub values: Vec<C64>,
    dim: Dim,
}

impl MarginalDistribution {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn get(&self, label: i64) -> C64 {
        self.values[self.dim.index(label)]
    }

    pub fn sum(&self) -> C64 {
        self.values.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &MarginalDistribution) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn check_line(a: i64, b: i64, dim: Dim) -> Result<(i64, i64)> {
    let (a, b) = (dim.center(a), dim.center(b));
    if a == 0 && b == 0 {
        return Err(Error::DegenerateLine(dim.n()));
    }
    Ok((a, b))
}

fn line_sum(f: &PhaseSpaceFunction, a: i64, b: i64, axis: Axis) -> Result<MarginalDistribution> {
    let dim = f.dim();
    let (a, b) = check_line(a, b, dim)?;
    let mut values = vec![ZERO; dim.n()];
    for (mu, nu, v) in f.grid().iter() {
        values[dim.index(a * mu + b * nu)] += v;
    }
    let inv = 1.0 / (dim.n() as f64).sqrt();
    values.iter_mut().for_each(|v| *v *= inv);
    Ok(MarginalDistribution { s: f.s(), axis, line: (a, b), values, dim })
}

/// `Q^(s)(mu) = N^(-1/2) Σ_nu F^(s)(mu, nu)`.
pub fn marginal_q(f: &PhaseSpaceFunction) -> MarginalDistribution {
    line_sum(f, 1, 0, Axis::Q).expect("axis line")
}

/// `R^(s)(nu) = N^(-1/2) Σ_mu F^(s)(mu, nu)`.
pub fn marginal_r(f: &PhaseSpaceFunction) -> MarginalDistribution {
    line_sum(f, 0, 1, Axis::R).expect("axis line")
}

/// `Q^(s)(mu) = Σ_eta exp(-2πi eta mu / N) Xi^(s)(eta, 0)`.
pub fn marginal_q_from_char(c: &CharacteristicFunction) -> MarginalDistribution {
    axis_from_char(c, Axis::Q)
}

/// `R^(s)(nu) = Σ_xi exp(-2πi xi nu / N) Xi^(s)(0, xi)`.
pub fn marginal_r_from_char(c: &CharacteristicFunction) -> MarginalDistribution {
    axis_from_char(c, Axis::R)
}

fn axis_from_char(c: &CharacteristicFunction, axis: Axis) -> MarginalDistribution {
    let dim = c.grid().dim();
    let n = dim.n();
    let values = dim
        .labels()
        .map(|mu| {
            dim.labels()
                .map(|t| {
                    let x = if axis == Axis::Q { c.get(t, 0) } else { c.get(0, t) };
                    root_of_unity(-t * mu, n) * x
                })
                .sum()
        })
        .collect();
    let line = if axis == Axis::Q { (1, 0) } else { (0, 1) };
    MarginalDistribution { s: c.s(), axis, line, values, dim }
}

/// Line sums `Q^(s)(mu; z1, z3) = N^(-1/2) Σ F^(s)(mu', nu') δ[mu = z1 mu' + z3 nu']`.
pub fn radon_q(f: &PhaseSpaceFunction, z1: i64, z3: i64) -> Result<MarginalDistribution> {
    line_sum(f, z1, z3, Axis::Q)
}

/// Line sums `R^(s)(nu; z2, z4) = N^(-1/2) Σ F^(s)(mu', nu') δ[nu = z2 mu' + z4 nu']`.
pub fn radon_r(f: &PhaseSpaceFunction, z2: i64, z4: i64) -> Result<MarginalDistribution> {
    line_sum(f, z2, z4, Axis::R)
}

fn ray_from_char(
    k: &KernelTable,
    c: &CharacteristicFunction,
    a: i64,
    b: i64,
    axis: Axis,
) -> Result<MarginalDistribution> {
    let dim = c.grid().dim();
    let (a, b) = check_line(a, b, dim)?;
    let n = dim.n();
    let s = c.s().value();
    let values = dim
        .labels()
        .map(|mu| {
            dim.labels()
                .map(|t| {
                    let base = if axis == Axis::Q { k.weight(t, 0, s) } else { k.weight(0, t, s) };
                    // [K(a t, b t) / K(t, 0)]^s with raw arguments
                    let ratio = k.weight(a * t, b * t, -s) * base;
                    root_of_unity(-t * mu, n) * ratio * c.get(a * t, b * t)
                })
                .sum()
        })
        .collect();
    Ok(MarginalDistribution { s: c.s(), axis, line: (a, b), values, dim })
}

/// Characteristic-function form of the `Q` line marginal:
/// `Σ_eta exp(-2πi eta mu/N) [K(z1 eta, z3 eta)/K(eta, 0)]^s Xi^(s)(z1 eta, z3 eta)`.
pub fn radon_q_from_char(k: &KernelTable, c: &CharacteristicFunction, z1: i64, z3: i64) -> Result<MarginalDistribution> {
    ray_from_char(k, c, z1, z3, Axis::Q)
}

/// `R` counterpart of [`radon_q_from_char`] with ratio `K(z2 xi, z4 xi)/K(0, xi)`.
pub fn radon_r_from_char(k: &KernelTable, c: &CharacteristicFunction, z2: i64, z4: i64) -> Result<MarginalDistribution> {
    ray_from_char(k, c, z2, z4, Axis::R)
}

/// One point of `Xi^(s)` recovered on a ray through the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayValue {
    pub eta: i64,
    pub xi: i64,
    pub value: C64,
}

fn invert_ray(k: &KernelTable, m: &MarginalDistribution, a: i64, b: i64) -> Result<Vec<RayValue>> {
    let dim = m.dim();
    let (a, b) = check_line(a, b, dim)?;
    let n = dim.n();
    let s = m.s.value();
    Ok(dim
        .labels()
        .map(|t| {
            let base = if m.axis == Axis::Q { k.weight(t, 0, -s) } else { k.weight(0, t, -s) };
            let ratio = base * k.weight(a * t, b * t, s);
            let dft: C64 = dim.labels().map(|mu| root_of_unity(mu * t, n) * m.get(mu)).sum();
            RayValue { eta: dim.center(a * t), xi: dim.center(b * t), value: ratio * dft / n as f64 }
        })
        .collect())
}

/// `Xi^(s)(z1 eta, z3 eta) = (1/N) [K(eta, 0)/K(z1 eta, z3 eta)]^s Σ_mu exp(2πi mu eta/N) Q^(s)(mu; z1, z3)`.
pub fn char_from_radon_q(k: &KernelTable, q: &MarginalDistribution, z1: i64, z3: i64) -> Result<Vec<RayValue>> {
    if q.axis != Axis::Q {
        return Err(Error::Formalism("expected a Q-type line marginal".into()));
    }
    invert_ray(k, q, z1, z3)
}

/// `Xi^(s)(z2 xi, z4 xi) = (1/N) [K(0, xi)/K(z2 xi, z4 xi)]^s Σ_nu exp(2πi nu xi/N) R^(s)(nu; z2, z4)`.
pub fn char_from_radon_r(k: &KernelTable, r: &MarginalDistribution, z2: i64, z4: i64) -> Result<Vec<RayValue>> {
    if r.axis != Axis::R {
        return Err(Error::Formalism("expected an R-type line marginal".into()));
    }
    invert_ray(k, r, z2, z4)
}

/// Finite-statistics model: every `Xi^(0)` value on a ray is estimated from
/// `shots` ancilla outcomes per polarization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotNoise {
    pub shots: u64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct RayResidual {
    pub axis: Axis,
    pub line: (i64, i64),
    /// Largest deviation of the recovered ray from the directly computed `Xi^(0)`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct TomographyReport {
    pub wigner: PhaseSpaceFunction,
    pub direct: PhaseSpaceFunction,
    pub rays: Vec<RayResidual>,
    pub max_error: f64,
}

/// Replace a ray marginal by one rebuilt from scattering-circuit estimates of
/// `Xi^(0)` on that ray, each polarization drawn from `shots` ancilla outcomes.
fn sample_ray(
    ps: &PhaseSpace,
    rho: &DensityOperator,
    m: &mut MarginalDistribution,
    rng: &mut ChaCha8Rng,
    shots: u64,
) -> Result<()> {
    let dim = m.dim();
    let n = dim.n();
    let root_n = (n as f64).sqrt();
    let (a, b) = m.line;
    let mut estimate = |p: f64| -> Result<f64> {
        let p = ((1.0 + p) / 2.0).clamp(0.0, 1.0);
        let bin = Binomial::new(shots, p).map_err(|e| Error::Formalism(e.to_string()))?;
        Ok(2.0 * bin.sample(rng) as f64 / shots as f64 - 1.0)
    };
    let mut ray = Vec::with_capacity(n);
    for t in dim.labels() {
        let est = if t == 0 {
            ONE
        } else {
            let (z, y) = scattering_circuit(ps, rho, dim.center(a * t), dim.center(b * t))?;
            C64::new(estimate(z)?, estimate(y)?)
        };
        ray.push((t, est / root_n));
    }
    for (mu, v) in dim.labels().zip(m.values.iter_mut()) {
        *v = ray.iter().map(|&(t, x)| root_of_unity(-t * mu, n) * x).sum();
    }
    Ok(())
}

/// Reconstruct `W` of `rho` from the `s = 0` line marginals of the `N + 1`
/// rays `(1, k)` and `(0, 1)`; needs prime `N`.
pub fn reconstruct_wigner(ps: &PhaseSpace, rho: &DensityOperator, noise: Option<ShotNoise>) -> Result<TomographyReport> {
    let dim = ps.dim();
    if !dim.is_prime() {
        return Err(Error::Coverage(dim.n()));
    }
    ps.check(rho.matrix())?;
    let direct = phase_fn(ps, rho, OrderParam::W)?;
    let exact_char = char_fn(ps, rho, OrderParam::W)?;
    let k = ps.kernel();
    let mut rng = noise.map(|s| ChaCha8Rng::seed_from_u64(s.seed));

    let mut xi_grid = GridFn::zeros(dim);
    let mut seen = vec![false; dim.n() * dim.n()];
    let mut rays = Vec::with_capacity(dim.n() + 1);
    let mut lines: Vec<(Axis, i64, i64)> = dim.labels().map(|k| (Axis::Q, 1, k)).collect();
    lines.push((Axis::R, 0, 1));

    for (axis, a, b) in lines {
        let mut m = match axis {
            Axis::Q => radon_q(&direct, a, b)?,
            Axis::R => radon_r(&direct, a, b)?,
        };
        if let (Some(rng), Some(cfg)) = (rng.as_mut(), noise) {
            sample_ray(ps, rho, &mut m, rng, cfg.shots)?;
        }
        let values = match axis {
            Axis::Q => char_from_radon_q(k, &m, a, b)?,
            Axis::R => char_from_radon_r(k, &m, a, b)?,
        };
        let mut residual: f64 = 0.0;
        for rv in values {
            residual = residual.max((rv.value - exact_char.get(rv.eta, rv.xi)).norm());
            let idx = dim.index(rv.eta) * dim.n() + dim.index(rv.xi);
            if (rv.eta, rv.xi) == (0, 0) || !seen[idx] {
                xi_grid.set(rv.eta, rv.xi, rv.value);
                seen[idx] = true;
            } else {
                return Err(Error::Coverage(dim.n()));
            }
        }
        rays.push(RayResidual { axis, line: (a, b), residual });
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Coverage(dim.n()));
    }
    let wigner = PhaseSpaceFunction::new(OrderParam::W, char_to_phase_grid(dim, &xi_grid, false));
    let max_error = wigner.grid().max_abs_diff(direct.grid());
    Ok(TomographyReport { wigner, direct, rays, max_error })
}

const SIGMA_Z: [[C64; 2]; 2] = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];
const SIGMA_Y: [[C64; 2]; 2] = [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]];

fn qubit(m: [[C64; 2]; 2]) -> CMatrix {
    CMatrix::from_rows(vec![m[0].to_vec(), m[1].to_vec()]).expect("square")
}

/// Hadamard test on `ancilla ⊗ system` with the ancilla ordered first: H,
/// then `U` applied when the ancilla is `|0>`, then H. Returns the ancilla
/// `(<σ_z>, <σ_y>) = (Re Tr(U rho), Im Tr(U rho))` with the standard Pauli
/// matrices.
pub fn hadamard_test(rho: &CMatrix, u: &CMatrix) -> Result<(f64, f64)> {
    if rho.n() != u.n() {
        return Err(Error::DimensionMismatch(format!("state is {}-dimensional, unitary {}", rho.n(), u.n())));
    }
    let n = rho.n();
    let h = 1.0 / 2f64.sqrt();
    let had = CMatrix::from_fn(2, |i, j| C64::new(if i == 1 && j == 1 { -h } else { h }, 0.0));
    let had = tensor(&had, &CMatrix::identity(n));
    let p0 = CMatrix::from_diag(&[ONE, ZERO]);
    let p1 = CMatrix::from_diag(&[ZERO, ONE]);
    let cu = &tensor(&p0, u) + &tensor(&p1, &CMatrix::identity(n));
    let circuit = had.matmul(&cu).matmul(&had);
    let state = tensor(&p0, rho).conjugate_by(&circuit);
    let z = tensor(&qubit(SIGMA_Z), &CMatrix::identity(n)).trace_product(&state);
    let y = tensor(&qubit(SIGMA_Y), &CMatrix::identity(n)).trace_product(&state);
    Ok((z.re, y.re))
}

/// Ancilla polarizations for `U = √N S(eta, xi)`; `σ_z + iσ_y = √N Xi^(0)(eta, xi)`.
pub fn scattering_circuit(ps: &PhaseSpace, rho: &DensityOperator, eta: i64, xi: i64) -> Result<(f64, f64)> {
    ps.check(rho.matrix())?;
    let u = ps.s_op(eta, xi).scale(C64::new((ps.n() as f64).sqrt(), 0.0));
    hadamard_test(rho.matrix(), &u)
}

/// Two-system variant with `U = [√N S(eta1, xi1)] ⊗ [√N S(eta2, xi2)]`.
pub fn scattering_circuit_bipartite(ps: &PhaseSpace, rho: &CMatrix, first: (i64, i64), second: (i64, i64)) -> Result<(f64, f64)> {
    let n = ps.n();
    if rho.n() != n * n {
        return Err(Error::DimensionMismatch(format!("expected a {}-dimensional state", n * n)));
    }
    let root_n = C64::new((n as f64).sqrt(), 0.0);
    let u = tensor(&ps.s_op(first.0, first.1).scale(root_n), &ps.s_op(second.0, second.1).scale(root_n));
    hadamard_test(rho, &u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasiprob::coherent_state;
    use proptest::prelude::*;

    fn ps(n: usize) -> PhaseSpace {
        PhaseSpace::with_n(n).unwrap()
    }

    fn dim(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    fn valid_params(d: Dim) -> Vec<SymplecticParams> {
        let mut out = vec![];
        for z1 in d.labels() {
            for z2 in d.labels() {
                for z3 in d.labels() {
                    for z4 in d.labels() {
                        if let Ok(p) = SymplecticParams::new(z1, z2, z3, z4, d) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn modular_inverse() {
        let d = dim(7);
        for a in 1..7 {
            let inv = mod_inverse(a, d).unwrap();
            assert_eq!((a * inv).rem_euclid(7), 1);
        }
        assert!(matches!(mod_inverse(3, dim(9)), Err(Error::NoModularInverse(3, 9))));
        assert!(mod_inverse(0, d).is_err());
    }

    #[test]
    fn symplectic_params_validation() {
        let d = dim(5);
        assert!(SymplecticParams::new(1, 0, 0, 1, d).is_ok());
        assert!(matches!(SymplecticParams::new(1, 1, 0, 2, d), Err(Error::NotSymplectic(5))));
        // det = 1 but z4 = 0 has no inverse
        assert!(matches!(SymplecticParams::new(0, 1, -1, 0, d), Err(Error::NoModularInverse(..))));
    }

    #[test]
    fn generators_are_unitary() {
        let d = dim(5);
        for p in valid_params(d).iter().step_by(7) {
            for m in [symplectic_c(p), symplectic_n(p), symplectic_m(p), symplectic_j(p)] {
                assert!(m.matmul(&m.adjoint()).max_abs_diff(&CMatrix::identity(5)) < 1e-10);
            }
        }
    }

    #[test]
    fn identity_parameters_fix_labels() {
        let d = dim(5);
        let j = symplectic_j(&SymplecticParams::identity(d));
        for e in d.labels() {
            for x in d.labels() {
                let s = s_op(e, x, d);
                assert!(s.conjugate_by(&j).max_abs_diff(&s) < 1e-10);
            }
        }
    }

    #[test]
    fn conjugation_law_with_sign() {
        for n in [3, 5, 7] {
            let d = dim(n);
            for p in valid_params(d) {
                let j = symplectic_j(&p);
                for e in d.labels() {
                    for x in d.labels() {
                        let (a, b) = p.apply(e, x);
                        let lhs = s_op(e, x, d).conjugate_by(&j);
                        let rhs = s_op(a, b, d).scale(C64::new(conjugation_sign(&p, e, x), 0.0));
                        assert!(lhs.max_abs_diff(&rhs) < 1e-10, "N={n} {:?} ({e},{x})", p.zeta());
                    }
                }
            }
        }
    }

    #[test]
    fn ordered_conjugation_law_for_in_range_images() {
        let p = ps(5);
        let d = p.dim();
        let s = OrderParam::real(0.5).unwrap();
        for z in valid_params(d).iter().step_by(5) {
            let j = symplectic_j(z);
            let [z1, z2, z3, z4] = z.zeta();
            for e in d.labels() {
                for x in d.labels() {
                    let (ra, rb) = (z1 * e + z2 * x, z3 * e + z4 * x);
                    if !(d.contains(ra) && d.contains(rb)) {
                        continue;
                    }
                    let lhs = p.s_op_ordered(e, x, s).conjugate_by(&j);
                    let ratio = (p.kernel().value(ra, rb) / p.kernel().value(e, x)).powf(0.5);
                    let rhs = p.s_op_ordered(ra, rb, s).scale(C64::new(ratio * conjugation_sign(z, e, x), 0.0));
                    assert!(lhs.max_abs_diff(&rhs) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn relabeled_kernel_for_sign_free_parameters() {
        let p = ps(5);
        let d = p.dim();
        for z in [SymplecticParams::identity(d), SymplecticParams::new(-1, 0, 0, -1, d).unwrap()] {
            let j = symplectic_j(&z);
            let [z1, z2, z3, z4] = z.zeta();
            for s in [OrderParam::W, OrderParam::real(0.5).unwrap()] {
                for mu in d.labels() {
                    for nu in d.labels() {
                        let lhs = p.t_op(mu, nu, s).conjugate_by(&j);
                        let rhs = transformed_t_op(&p, &z, z4 * mu - z3 * nu, z1 * nu - z2 * mu, s);
                        assert!(lhs.max_abs_diff(&rhs) < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn group_action_composes() {
        let d = dim(5);
        let params = valid_params(d);
        for (i, a) in params.iter().enumerate().step_by(11) {
            let b = &params[(i * 7 + 3) % params.len()];
            let Ok(ab) = a.compose(b) else { continue };
            let jab = symplectic_j(&ab);
            let jj = symplectic_j(a).matmul(&symplectic_j(b));
            for e in d.labels() {
                for x in d.labels() {
                    let s = s_op(e, x, d);
                    assert!(s.conjugate_by(&jj).max_abs_diff(&s.conjugate_by(&jab)) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn axis_marginals() {
        let p = ps(5);
        let d = p.dim();
        let mixed = DensityOperator::maximally_mixed(d);
        let w = phase_fn(&p, &mixed, OrderParam::W).unwrap();
        let q = marginal_q(&w);
        assert!(q.values.iter().all(|v| (v - 1.0 / 5f64.sqrt()).norm() < 1e-12));
        let vac = DensityOperator::fock(&p, 0).unwrap();
        for s in [OrderParam::H, OrderParam::W, OrderParam::P] {
            let f = phase_fn(&p, &vac, s).unwrap();
            let c = char_fn(&p, &vac, s).unwrap();
            assert!(marginal_q(&f).max_abs_diff(&marginal_q_from_char(&c)) < 1e-10);
            assert!(marginal_r(&f).max_abs_diff(&marginal_r_from_char(&c)) < 1e-10);
        }
        let q0 = marginal_q(&phase_fn(&p, &vac, OrderParam::W).unwrap());
        assert!(q0.values.iter().all(|v| v.re > -1e-12));
        assert!((q0.sum() - 5f64.sqrt()).norm() < 1e-10);
    }

    #[test]
    fn marginal_smoothing_chain() {
        let p = ps(7);
        let d = p.dim();
        let rho = DensityOperator::random_mixed(d, 3, 4);
        let k = p.kernel();
        let margs: Vec<(MarginalDistribution, MarginalDistribution)> = [OrderParam::P, OrderParam::W, OrderParam::H]
            .iter()
            .map(|&s| {
                let f = phase_fn(&p, &rho, s).unwrap();
                (marginal_q(&f), marginal_r(&f))
            })
            .collect();
        for step in 0..2 {
            for axis in 0..2 {
                let pick = |m: &(MarginalDistribution, MarginalDistribution)| if axis == 0 { m.0.clone() } else { m.1.clone() };
                let (from, to) = (pick(&margs[step]), pick(&margs[step + 1]));
                for mu in d.labels() {
                    let smoothed: C64 = d.labels().map(|m2| from.get(m2) * k.smoothing_1d(m2 - mu)).sum();
                    assert!((smoothed - to.get(mu)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn radon_axis_lines_reduce_to_marginals() {
        let p = ps(5);
        let rho = DensityOperator::random_mixed(p.dim(), 2, 6);
        let f = phase_fn(&p, &rho, OrderParam::real(0.4).unwrap()).unwrap();
        assert_eq!(radon_q(&f, 1, 0).unwrap().values, marginal_q(&f).values);
        assert_eq!(radon_r(&f, 0, 1).unwrap().values, marginal_r(&f).values);
        assert!(matches!(radon_q(&f, 0, 5), Err(Error::DegenerateLine(5))));
    }

    #[test]
    fn radon_dual_paths() {
        for n in [3, 5, 7] {
            let p = ps(n);
            let d = p.dim();
            let rho = DensityOperator::random_mixed(d, 2, n as u64 + 10);
            let w = phase_fn(&p, &rho, OrderParam::W).unwrap();
            let c = char_fn(&p, &rho, OrderParam::W).unwrap();
            for a in d.labels() {
                for b in d.labels() {
                    if (a, b) == (0, 0) {
                        continue;
                    }
                    let delta = radon_q(&w, a, b).unwrap();
                    let ray = radon_q_from_char(p.kernel(), &c, a, b).unwrap();
                    assert!(delta.max_abs_diff(&ray) < 1e-10);
                    let delta = radon_r(&w, a, b).unwrap();
                    let ray = radon_r_from_char(p.kernel(), &c, a, b).unwrap();
                    assert!(delta.max_abs_diff(&ray) < 1e-10);
                }
            }
            // away from s = 0 the two forms coincide on the axis lines
            for s in [OrderParam::H, OrderParam::P, OrderParam::real(0.3).unwrap()] {
                let f = phase_fn(&p, &rho, s).unwrap();
                let c = char_fn(&p, &rho, s).unwrap();
                let q = radon_q_from_char(p.kernel(), &c, 1, 0).unwrap();
                assert!(radon_q(&f, 1, 0).unwrap().max_abs_diff(&q) < 1e-10);
                let r = radon_r_from_char(p.kernel(), &c, 0, 1).unwrap();
                assert!(radon_r(&f, 0, 1).unwrap().max_abs_diff(&r) < 1e-10);
            }
        }
    }

    #[test]
    fn axis_marginals_are_probabilities() {
        let p = ps(5);
        let d = p.dim();
        for seed in 0..10 {
            let rho = DensityOperator::random_pure(d, seed);
            let w = phase_fn(&p, &rho, OrderParam::W).unwrap();
            for q in [marginal_q(&w), marginal_r(&w)] {
                assert!(q.values.iter().all(|v| v.re > -1e-12 && v.im.abs() < 1e-12));
                assert!((q.sum() - 5f64.sqrt()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn radon_bins_partition_the_grid() {
        let d = dim(7);
        for a in d.labels() {
            for b in d.labels() {
                if (a, b) == (0, 0) {
                    continue;
                }
                let mut counts = [0; 7];
                for mu in d.labels() {
                    for nu in d.labels() {
                        counts[d.index(a * mu + b * nu)] += 1;
                    }
                }
                assert!(counts.iter().all(|&c| c == 7));
            }
        }
    }

    #[test]
    fn char_from_radon_round_trip() {
        let p = ps(7);
        let d = p.dim();
        let rho = DensityOperator::random_mixed(d, 3, 33);
        let w = phase_fn(&p, &rho, OrderParam::W).unwrap();
        let c = char_fn(&p, &rho, OrderParam::W).unwrap();
        for (a, b) in [(1, 0), (1, 1), (2, -3), (0, 1)] {
            let q = radon_q(&w, a, b).unwrap();
            for rv in char_from_radon_q(p.kernel(), &q, a, b).unwrap() {
                assert!((rv.value - c.get(rv.eta, rv.xi)).norm() < 1e-10);
            }
            let r = radon_r(&w, a, b).unwrap();
            for rv in char_from_radon_r(p.kernel(), &r, a, b).unwrap() {
                assert!((rv.value - c.get(rv.eta, rv.xi)).norm() < 1e-10);
            }
            let ray = char_from_radon_q(p.kernel(), &q, a, b).unwrap();
            let dc = ray.iter().find(|rv| (rv.eta, rv.xi) == (0, 0)).unwrap();
            assert!((dc.value - 1.0 / 7f64.sqrt()).norm() < 1e-12);
        }
        // the ratio-weighted ray form inverts exactly at any s
        let s = OrderParam::real(-0.6).unwrap();
        let c = char_fn(&p, &rho, s).unwrap();
        let q = radon_q_from_char(p.kernel(), &c, 2, 3).unwrap();
        for rv in char_from_radon_q(p.kernel(), &q, 2, 3).unwrap() {
            assert!((rv.value - c.get(rv.eta, rv.xi)).norm() < 1e-10);
        }
    }

    #[test]
    fn wigner_reconstruction() {
        for n in [3, 5, 7] {
            let p = ps(n);
            let d = p.dim();
            let states = [
                DensityOperator::maximally_mixed(d),
                DensityOperator::random_pure(d, 5),
                DensityOperator::pure(&coherent_state(&p, 1, -1).unwrap()).unwrap(),
                DensityOperator::random_mixed(d, 2, 8),
            ];
            for rho in &states {
                let rep = reconstruct_wigner(&p, rho, None).unwrap();
                assert!(rep.max_error < 1e-9, "N={n}: {}", rep.max_error);
                assert_eq!(rep.rays.len(), n + 1);
                assert!(rep.rays.iter().all(|r| r.residual < 1e-9));
            }
            let rep = reconstruct_wigner(&p, &states[0], None).unwrap();
            assert!(rep.wigner.grid().values().iter().all(|v| (v - 1.0 / n as f64).norm() < 1e-12));
        }
        let p = ps(9);
        let rho = DensityOperator::maximally_mixed(p.dim());
        assert!(matches!(reconstruct_wigner(&p, &rho, None), Err(Error::Coverage(9))));
    }

    #[test]
    fn shot_noise_is_seeded() {
        let p = ps(3);
        let rho = DensityOperator::random_pure(p.dim(), 1);
        let noise = Some(ShotNoise { shots: 20_000, seed: 7 });
        let a = reconstruct_wigner(&p, &rho, noise).unwrap();
        let b = reconstruct_wigner(&p, &rho, noise).unwrap();
        assert_eq!(a.wigner, b.wigner);
        assert!(a.max_error > 0.0 && a.max_error < 0.05, "{} {:?}", a.max_error, a.rays);
    }

    #[test]
    fn scattering_matches_characteristic_function() {
        for n in [3, 5] {
            let p = ps(n);
            let d = p.dim();
            let states = [
                DensityOperator::random_mixed(d, 2, 3),
                DensityOperator::fock(&p, 1).unwrap(),
                DensityOperator::coherent(&p, 1, 0).unwrap(),
            ];
            for rho in &states {
                let c = char_fn(&p, rho, OrderParam::W).unwrap();
                for e in d.labels() {
                    for x in d.labels() {
                        let (z, y) = scattering_circuit(&p, rho, e, x).unwrap();
                        let expected = c.get(e, x) * (n as f64).sqrt();
                        assert!((C64::new(z, y) - expected).norm() < 1e-10);
                    }
                }
                let (z, y) = scattering_circuit(&p, rho, 0, 0).unwrap();
                assert!((z - 1.0).abs() < 1e-12 && y.abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn scattering_is_affine(w in 0.0f64..1.0, s1 in 0u64..1000, e in -2i64..=2, x in -2i64..=2) {
            let p = ps(5);
            let a = DensityOperator::random_mixed(p.dim(), 2, s1);
            let b = DensityOperator::random_pure(p.dim(), s1 + 1);
            let mix = &a.matrix().scale(C64::new(w, 0.0)) + &b.matrix().scale(C64::new(1.0 - w, 0.0));
            let mix = DensityOperator::new(mix).unwrap();
            let (za, ya) = scattering_circuit(&p, &a, e, x).unwrap();
            let (zb, yb) = scattering_circuit(&p, &b, e, x).unwrap();
            let (zm, ym) = scattering_circuit(&p, &mix, e, x).unwrap();
            prop_assert!((zm - (w * za + (1.0 - w) * zb)).abs() < 1e-12);
            prop_assert!((ym - (w * ya + (1.0 - w) * yb)).abs() < 1e-12);
        }
    }
}
