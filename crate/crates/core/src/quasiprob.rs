//! s-ordered characteristic and phase-space functions, coherent states and the
//! P → W → H smoothing hierarchy.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lattice::{hermitian_eigen, norm, root_of_unity, CMatrix, Dim, GridFn, ONE, ZERO};
use crate::schwinger::{half_root, s_trace, OrderParam, PhaseSpace};
use crate::theta::phase_phi;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-10;
/// Second-largest eigenvalue bound for a rank-1 projector.
pub const RANK_ONE_TOL: f64 = 1e-8;

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    rho: CMatrix,
}

impl DensityOperator {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if Dim::new(rho.n()).is_err() {
            return Err(Error::InvalidDimension(rho.n()));
        }
        let herm = rho.max_abs_diff(&rho.adjoint());
        if herm > HERMITIAN_TOL {
            return Err(Error::NotPhysical(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::NotPhysical(format!("trace is {:.15} + {:.3e}i", tr.re, tr.im)));
        }
        let min = hermitian_eigen(&rho).0[0];
        if min < -EIGEN_TOL {
            return Err(Error::NotPhysical(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { rho })
    }

    /// Validates after removing round-off anti-Hermitian residue.
    pub(crate) fn from_computed(rho: CMatrix) -> Result<Self> {
        Self::new(rho.hermitian_part())
    }

    pub fn maximally_mixed(dim: Dim) -> Self {
        let n = dim.n();
        Self { rho: CMatrix::identity(n).scale(C64::new(1.0 / n as f64, 0.0)) }
    }

    /// `|psi><psi|` after normalizing `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let c = norm(psi);
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::NotPhysical("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / c).collect();
        Self::from_computed(CMatrix::projector(&v))
    }

    /// Number state `|n><n|`.
    pub fn fock(ps: &PhaseSpace, n: usize) -> Result<Self> {
        Self::pure(ps.fock().number_state(n)?)
    }

    /// Discrete coherent state `|mu, nu><mu, nu|`.
    pub fn coherent(ps: &PhaseSpace, mu: i64, nu: i64) -> Result<Self> {
        Self::from_computed(coherent_projector(ps, mu, nu)?)
    }

    pub fn random_pure(dim: Dim, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi: Vec<C64> = (0..dim.n())
            .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        Self::pure(&psi).expect("gaussian vector is nonzero")
    }

    /// `A A† / Tr(A A†)` with a complex Gaussian `N x rank` matrix `A`.
    pub fn random_mixed(dim: Dim, rank: usize, seed: u64) -> Self {
        let n = dim.n();
        let rank = rank.clamp(1, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<Vec<C64>> = (0..n)
            .map(|_| {
                (0..rank)
                    .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                    .collect()
            })
            .collect();
        let m = CMatrix::from_fn(n, |i, j| (0..rank).map(|k| a[i][k] * a[j][k].conj()).sum());
        let m = m.scale(ONE / m.trace());
        Self::from_computed(m).expect("Gram matrix is a state")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.rho.n()
    }

    pub fn purity(&self) -> f64 {
        self.rho.trace_product(&self.rho).re
    }
}

/// `F^(s)(mu, nu)` over in-range points.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceFunction {
    s: OrderParam,
    grid: GridFn,
}

impl PhaseSpaceFunction {
    pub fn new(s: OrderParam, grid: GridFn) -> Self {
        Self { s, grid }
    }

    pub fn s(&self) -> OrderParam {
        self.s
    }

    pub fn grid(&self) -> &GridFn {
        &self.grid
    }

    pub fn dim(&self) -> Dim {
        self.grid.dim()
    }

    pub fn get(&self, mu: i64, nu: i64) -> C64 {
        self.grid.get(mu, nu)
    }

    /// `(1/N) Σ F`, which is 1 for any density operator.
    pub fn normalization(&self) -> C64 {
        self.grid.sum() / self.dim().n() as f64
    }

    fn expect_order(&self, s: OrderParam) -> Result<()> {
        if self.s != s {
            return Err(Error::OrderMismatch { expected: s.to_string(), found: self.s.to_string() });
        }
        Ok(())
    }
}

/// `Xi^(s)(eta, xi)` over in-range points.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicFunction {
    s: OrderParam,
    grid: GridFn,
}

impl CharacteristicFunction {
    pub fn new(s: OrderParam, grid: GridFn) -> Self {
        Self { s, grid }
    }

    pub fn s(&self) -> OrderParam {
        self.s
    }

    pub fn grid(&self) -> &GridFn {
        &self.grid
    }

    pub fn get(&self, eta: i64, xi: i64) -> C64 {
        self.grid.get(eta, xi)
    }
}

/// `Xi^(s)(eta, xi) = Tr[S^(s)(eta, xi) rho]`.
pub fn char_fn(ps: &PhaseSpace, rho: &DensityOperator, s: OrderParam) -> Result<CharacteristicFunction> {
    ps.check(rho.matrix())?;
    let k = ps.kernel();
    let grid = GridFn::from_fn(ps.dim(), |eta, xi| k.weight(eta, xi, s.value()) * s_trace(eta, xi, rho.matrix()));
    Ok(CharacteristicFunction::new(s, grid))
}

/// `F^(s)(mu, nu) = Tr[T^(s)(mu, nu) rho]` by direct traces.
pub fn phase_fn(ps: &PhaseSpace, rho: &DensityOperator, s: OrderParam) -> Result<PhaseSpaceFunction> {
    ps.check(rho.matrix())?;
    let basis = ps.t_basis(s);
    let grid = GridFn::from_fn(ps.dim(), |mu, nu| basis.get(mu, nu).trace_product(rho.matrix()));
    Ok(PhaseSpaceFunction::new(s, grid))
}

/// `F^(s)(mu, nu) = N^(-1/2) Σ exp[-2πi(eta mu + xi nu)/N] Xi^(s)(eta, xi)`.
pub fn phase_fn_from_char(ps: &PhaseSpace, xi_fn: &CharacteristicFunction) -> Result<PhaseSpaceFunction> {
    ps.check_grid(xi_fn.grid())?;
    Ok(PhaseSpaceFunction::new(xi_fn.s(), char_to_phase_grid(ps.dim(), xi_fn.grid(), false)))
}

/// Same transform keeping the `exp(iπ Phi)` factor, which is 1 on in-range sums.
pub fn phase_fn_from_char_with_phi(ps: &PhaseSpace, xi_fn: &CharacteristicFunction) -> Result<PhaseSpaceFunction> {
    ps.check_grid(xi_fn.grid())?;
    Ok(PhaseSpaceFunction::new(xi_fn.s(), char_to_phase_grid(ps.dim(), xi_fn.grid(), true)))
}

pub(crate) fn char_to_phase_grid(dim: Dim, xi_grid: &GridFn, with_phi: bool) -> GridFn {
    let n = dim.n();
    let inv = 1.0 / (n as f64).sqrt();
    GridFn::from_fn(dim, |mu, nu| {
        let mut acc = ZERO;
        for (eta, xi, v) in xi_grid.iter() {
            let mut w = root_of_unity(-(eta * mu + xi * nu), n);
            if with_phi {
                w *= half_root(phase_phi(eta, xi, dim), 1);
            }
            acc += w * v;
        }
        acc * inv
    })
}

/// `T^(-1)(mu, nu)`, checked to be a rank-1 projector.
pub fn coherent_projector(ps: &PhaseSpace, mu: i64, nu: i64) -> Result<CMatrix> {
    let t = ps.t_basis(OrderParam::H).get(mu, nu).clone();
    let herm = t.max_abs_diff(&t.adjoint());
    let (vals, _) = hermitian_eigen(&t);
    let n = vals.len();
    let top = vals[n - 1];
    let second = if n > 1 { vals[n - 2] } else { 0.0 };
    if herm > RANK_ONE_TOL || (top - 1.0).abs() > RANK_ONE_TOL || second.abs() > RANK_ONE_TOL || vals[0] < -RANK_ONE_TOL {
        return Err(Error::Formalism(format!(
            "T^(-1)({mu},{nu}) is not a rank-1 projector (eigenvalues {top:.3e}, {second:.3e})"
        )));
    }
    Ok(t)
}

/// `|mu, nu>` as the dominant eigenvector of `T^(-1)(mu, nu)`, phased so that its
/// largest component is real and positive.
pub fn coherent_state(ps: &PhaseSpace, mu: i64, nu: i64) -> Result<Vec<C64>> {
    let t = coherent_projector(ps, mu, nu)?;
    let (_, vecs) = hermitian_eigen(&t);
    let v = vecs.last().expect("nonempty spectrum").clone();
    let (mut best, mut idx) = (0.0, 0);
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best + 1e-12 {
            best = z.norm();
            idx = i;
        }
    }
    let phase = v[idx].conj() / v[idx].norm();
    Ok(v.into_iter().map(|z| z * phase).collect())
}

/// `E(dmu, dnu) = Tr[T^(0)(mu, nu) T^(-1)(mu + dmu, nu + dnu)]` over in-range offsets.
pub fn smoothing_2d(ps: &PhaseSpace) -> GridFn {
    GridFn::from_fn(ps.dim(), |a, b| ps.t_overlap(OrderParam::W, OrderParam::H, a, b))
}

fn convolve(input: &GridFn, kernel: &GridFn) -> GridFn {
    let n = input.dim().n() as f64;
    GridFn::from_fn(input.dim(), |mu, nu| {
        input.iter().map(|(m2, n2, v)| kernel.get(m2 - mu, n2 - nu) * v).sum::<C64>() / n
    })
}

/// `W(mu, nu) = (1/N) Σ E(mu' - mu, nu' - nu) P(mu', nu')`.
pub fn smooth_p_to_w(ps: &PhaseSpace, p: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
    p.expect_order(OrderParam::P)?;
    ps.check_grid(p.grid())?;
    Ok(PhaseSpaceFunction::new(OrderParam::W, convolve(p.grid(), &smoothing_2d(ps))))
}

/// `H(mu, nu) = (1/N) Σ E(mu' - mu, nu' - nu) W(mu', nu')`.
pub fn smooth_w_to_h(ps: &PhaseSpace, w: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
    w.expect_order(OrderParam::W)?;
    ps.check_grid(w.grid())?;
    Ok(PhaseSpaceFunction::new(OrderParam::H, convolve(w.grid(), &smoothing_2d(ps))))
}

/// `H(mu, nu) = (1/N) Σ |K(mu' - mu, nu' - nu)|² P(mu', nu')`.
pub fn smooth_p_to_h(ps: &PhaseSpace, p: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
    p.expect_order(OrderParam::P)?;
    ps.check_grid(p.grid())?;
    let k = ps.kernel();
    let kernel = GridFn::from_fn(ps.dim(), |a, b| C64::new(k.value(a, b).powi(2), 0.0));
    Ok(PhaseSpaceFunction::new(OrderParam::H, convolve(p.grid(), &kernel)))
}

/// `(1/N) Σ O^(-s)(mu, nu) F^(s)(mu, nu)`.
pub fn expectation(ps: &PhaseSpace, o: &CMatrix, rho: &DensityOperator, s: OrderParam) -> Result<C64> {
    let coeffs = ps.decompose_t(o, s)?;
    let f = phase_fn(ps, rho, s)?;
    let total: C64 = coeffs.values().iter().zip(f.grid().values()).map(|(a, b)| a * b).sum();
    Ok(total / ps.n() as f64)
}

/// `<m|T^(s)(mu, nu)|n>` from the `Gamma_mn` table.
pub fn t_matrix_element(ps: &PhaseSpace, m: usize, n: usize, mu: i64, nu: i64, s: OrderParam) -> Result<C64> {
    let gamma = ps.fock().gamma(m, n)?;
    let dim = ps.dim();
    let nn = dim.n();
    let mut acc = ZERO;
    for (eta, xi, g) in gamma.iter() {
        acc += half_root(phase_phi(eta, xi, dim), 1)
            * root_of_unity(-(eta * mu + xi * nu), nn)
            * ps.kernel().weight(eta, xi, s.value())
            * g;
    }
    Ok(acc / nn as f64)
}

/// `rho = (1/N) Σ F^(s)(mu, nu) T^(-s)(mu, nu)` for an input computed at `s`.
pub fn reconstruct_rho(ps: &PhaseSpace, f: &PhaseSpaceFunction) -> Result<DensityOperator> {
    let rho = ps.reconstruct_t(f.grid(), -f.s())?;
    let tr = rho.trace();
    if (tr - ONE).norm() > 1e-10 {
        return Err(Error::NotPhysical(format!("reconstructed trace {:.12}", tr)));
    }
    DensityOperator::from_computed(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(n: usize) -> PhaseSpace {
        PhaseSpace::with_n(n).unwrap()
    }

    fn op(s: f64) -> OrderParam {
        OrderParam::real(s).unwrap()
    }

    #[test]
    fn density_operator_validation() {
        let d = Dim::new(3).unwrap();
        assert!(DensityOperator::new(CMatrix::identity(3)).is_err());
        let mut bad = DensityOperator::maximally_mixed(d).into_matrix();
        bad[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(DensityOperator::new(bad), Err(Error::NotPhysical(_))));
        let neg = CMatrix::from_diag(&[C64::new(1.5, 0.0), C64::new(-0.5, 0.0), ZERO]);
        assert!(DensityOperator::new(neg).is_err());
        assert!(DensityOperator::new(CMatrix::identity(2).scale(C64::new(0.5, 0.0))).is_err());
        let r = DensityOperator::random_mixed(d, 2, 1);
        assert!((r.matrix().trace() - ONE).norm() < 1e-12);
        assert_eq!(DensityOperator::random_pure(d, 4), DensityOperator::random_pure(d, 4));
    }

    #[test]
    fn characteristic_function_examples() {
        let p = ps(5);
        let d = p.dim();
        let mixed = DensityOperator::maximally_mixed(d);
        let c = char_fn(&p, &mixed, OrderParam::W).unwrap();
        for (e, x, v) in c.grid().iter() {
            let expected = if (e, x) == (0, 0) { 1.0 / 5f64.sqrt() } else { 0.0 };
            assert!((v - expected).norm() < 1e-12);
        }
        let vac = DensityOperator::fock(&p, 0).unwrap();
        let c = char_fn(&p, &vac, OrderParam::W).unwrap();
        for (e, x, v) in c.grid().iter() {
            assert!((v - p.kernel().value(e, x) / 5f64.sqrt()).norm() < 1e-12);
        }
        let c = char_fn(&p, &vac, op(0.6)).unwrap();
        assert!((c.get(0, 0) - 1.0 / 5f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn phase_function_paths_agree() {
        for n in [3, 5, 7] {
            let p = ps(n);
            let rho = DensityOperator::random_mixed(p.dim(), 3, n as u64);
            for s in [op(-1.0), op(0.0), op(0.5), op(1.0), OrderParam::imag(0.5).unwrap()] {
                let direct = phase_fn(&p, &rho, s).unwrap();
                let c = char_fn(&p, &rho, s).unwrap();
                let via = phase_fn_from_char(&p, &c).unwrap();
                let via_phi = phase_fn_from_char_with_phi(&p, &c).unwrap();
                assert!(direct.grid().max_abs_diff(via.grid()) < 1e-10);
                assert!(via.grid().max_abs_diff(via_phi.grid()) < 1e-14);
                assert!((direct.normalization() - ONE).norm() < 1e-10);
                if s.is_real() {
                    assert!(direct.grid().max_imag() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn uniform_state_has_flat_functions() {
        // (1/N) Σ F = 1 over N² points forces F = 1/N
        let p = ps(5);
        let mixed = DensityOperator::maximally_mixed(p.dim());
        for s in [op(-1.0), op(0.0), op(1.0)] {
            let f = phase_fn(&p, &mixed, s).unwrap();
            assert!(f.grid().values().iter().all(|v| (v - 0.2).norm() < 1e-12));
        }
    }

    #[test]
    fn wigner_purity_and_husimi_range() {
        let p = ps(7);
        let rho = DensityOperator::random_pure(p.dim(), 11);
        let w = phase_fn(&p, &rho, OrderParam::W).unwrap();
        let purity: f64 = w.grid().values().iter().map(|v| v.re * v.re).sum::<f64>() / 7.0;
        assert!((purity - 1.0).abs() < 1e-10);
        let h = phase_fn(&p, &rho, OrderParam::H).unwrap();
        for v in h.grid().values() {
            assert!(v.re > -1e-12 && v.re < 1.0 + 1e-12);
        }
        assert!((h.normalization() - ONE).norm() < 1e-10);
    }

    #[test]
    fn coherent_projectors() {
        for n in [3, 5, 7] {
            let p = ps(n);
            let d = p.dim();
            let mut sum = CMatrix::zeros(n);
            let states: Vec<(i64, i64, Vec<C64>)> = d
                .labels()
                .flat_map(|mu| d.labels().map(move |nu| (mu, nu)))
                .map(|(mu, nu)| (mu, nu, coherent_state(&p, mu, nu).unwrap()))
                .collect();
            for (mu, nu, _) in &states {
                sum += &coherent_projector(&p, *mu, *nu).unwrap();
            }
            let sum = sum.scale(C64::new(1.0 / n as f64, 0.0));
            assert!(sum.max_abs_diff(&CMatrix::identity(n)) < 1e-10);
            for (m1, n1, a) in &states {
                for (m2, n2, b) in &states {
                    let ov = crate::lattice::inner(a, b).norm_sqr();
                    let k = p.kernel().value(d.center(m2 - m1), d.center(n2 - n1));
                    assert!((ov - k * k).abs() < 1e-8);
                }
            }
        }
        let p = ps(5);
        let vac = p.fock().vacuum().to_vec();
        let t = coherent_projector(&p, 0, 0).unwrap();
        assert!((t.sandwich(&vac, &vac) - ONE).norm() < 1e-8);
    }

    #[test]
    fn smoothing_kernel_is_wigner_of_coherent_state() {
        let p = ps(3);
        let e = smoothing_2d(&p);
        let d = p.dim();
        for m2 in d.labels() {
            for n2 in d.labels() {
                let coh = DensityOperator::coherent(&p, m2, n2).unwrap();
                let w = phase_fn(&p, &coh, OrderParam::W).unwrap();
                for (mu, nu, v) in w.grid().iter() {
                    assert!((v - e.get(m2 - mu, n2 - nu)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn hierarchy_chain() {
        for n in [3, 5, 7] {
            let p = ps(n);
            let d = p.dim();
            let states = [
                DensityOperator::maximally_mixed(d),
                DensityOperator::random_mixed(d, 2, 3),
                DensityOperator::fock(&p, 1).unwrap(),
                DensityOperator::coherent(&p, 1, -1).unwrap(),
            ];
            for rho in &states {
                let pf = phase_fn(&p, rho, OrderParam::P).unwrap();
                let w = phase_fn(&p, rho, OrderParam::W).unwrap();
                let h = phase_fn(&p, rho, OrderParam::H).unwrap();
                let w2 = smooth_p_to_w(&p, &pf).unwrap();
                let h2 = smooth_w_to_h(&p, &w).unwrap();
                let h3 = smooth_p_to_h(&p, &pf).unwrap();
                let chain = smooth_w_to_h(&p, &w2).unwrap();
                assert!(w2.grid().max_abs_diff(w.grid()) < 1e-10);
                assert!(h2.grid().max_abs_diff(h.grid()) < 1e-10);
                assert!(h3.grid().max_abs_diff(chain.grid()) < 1e-10);
            }
        }
    }

    #[test]
    fn smoothing_rejects_wrong_order() {
        let p = ps(3);
        let w = phase_fn(&p, &DensityOperator::maximally_mixed(p.dim()), OrderParam::W).unwrap();
        assert!(matches!(smooth_p_to_w(&p, &w), Err(Error::OrderMismatch { .. })));
        assert!(smooth_p_to_h(&p, &w).is_err());
        let h = phase_fn(&p, &DensityOperator::maximally_mixed(p.dim()), OrderParam::H).unwrap();
        assert!(smooth_w_to_h(&p, &h).is_err());
    }

    #[test]
    fn expectation_values() {
        let p = ps(5);
        let rho = DensityOperator::random_mixed(p.dim(), 5, 8);
        let u = p.u_matrix();
        for s in [op(-1.0), op(0.0), op(1.0)] {
            let e = expectation(&p, &u, &rho, s).unwrap();
            assert!((e - u.trace_product(rho.matrix())).norm() < 1e-10);
            let one = expectation(&p, &CMatrix::identity(5), &rho, s).unwrap();
            assert!((one - ONE).norm() < 1e-10);
        }
        let pure = DensityOperator::random_pure(p.dim(), 2);
        let e = expectation(&p, pure.matrix(), &pure, OrderParam::W).unwrap();
        assert!((e - ONE).norm() < 1e-10);
    }

    #[test]
    fn matrix_elements_match_sandwich() {
        for n in [3, 5, 7] {
            let p = ps(n);
            let f = p.fock();
            for s in [op(0.0), op(-0.5), OrderParam::new(C64::new(0.3, 0.4)).unwrap()] {
                for (mu, nu) in [(0, 0), (1, -1)] {
                    let t = p.t_op(mu, nu, s);
                    let mut tr = ZERO;
                    for m in 0..n {
                        for k in 0..n {
                            let a = t_matrix_element(&p, m, k, mu, nu, s).unwrap();
                            let b = t.sandwich(f.number_state(m).unwrap(), f.number_state(k).unwrap());
                            assert!((a - b).norm() < 1e-9, "N={n} m={m} n={k}");
                        }
                        tr += t_matrix_element(&p, m, m, mu, nu, s).unwrap();
                    }
                    assert!((tr - ONE).norm() < 1e-10);
                }
            }
        }
        let p = ps(7);
        let a = t_matrix_element(&p, 0, 1, 1, -2, OrderParam::W).unwrap();
        let b = p.t_op(1, -2, OrderParam::W).sandwich(p.fock().vacuum(), p.fock().number_state(1).unwrap());
        assert!((a - b).norm() < 1e-9);
        assert!(matches!(
            t_matrix_element(&p, 7, 0, 0, 0, OrderParam::W),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn density_reconstruction() {
        let p = ps(5);
        let d = p.dim();
        let flat = PhaseSpaceFunction::new(OrderParam::W, GridFn::from_fn(d, |_, _| C64::new(0.2, 0.0)));
        let r = reconstruct_rho(&p, &flat).unwrap();
        assert!(r.matrix().max_abs_diff(DensityOperator::maximally_mixed(d).matrix()) < 1e-12);
        let rho = DensityOperator::random_mixed(d, 3, 21);
        let via_w = reconstruct_rho(&p, &phase_fn(&p, &rho, OrderParam::W).unwrap()).unwrap();
        let via_p = reconstruct_rho(&p, &phase_fn(&p, &rho, OrderParam::P).unwrap()).unwrap();
        let via_h = reconstruct_rho(&p, &phase_fn(&p, &rho, OrderParam::H).unwrap()).unwrap();
        assert!(via_w.matrix().max_abs_diff(rho.matrix()) < 1e-10);
        assert!(via_p.matrix().max_abs_diff(via_w.matrix()) < 1e-10);
        assert!(via_h.matrix().max_abs_diff(rho.matrix()) < 1e-10);
        let bad = PhaseSpaceFunction::new(OrderParam::W, GridFn::from_fn(d, |_, _| ONE));
        assert!(matches!(reconstruct_rho(&p, &bad), Err(Error::NotPhysical(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn overlap_property(seed in 0u64..10_000, k in 0usize..3, si in 0usize..5) {
            let n = [3, 5, 7][k];
            let s = op([-1.0, -0.5, 0.0, 0.5, 1.0][si]);
            let p = ps(n);
            let a = DensityOperator::random_mixed(p.dim(), n, seed).into_matrix();
            let b = DensityOperator::random_mixed(p.dim(), 2, seed + 1).into_matrix();
            let am = p.decompose_t(&a, s).unwrap();
            let bs = p.decompose_t(&b, -s).unwrap();
            let sum: C64 = am.values().iter().zip(bs.values()).map(|(x, y)| x * y).sum::<C64>() / n as f64;
            prop_assert!((sum - a.trace_product(&b)).norm() < 1e-10);
        }

        #[test]
        fn normalization_and_husimi_positivity(seed in 0u64..10_000, k in 0usize..3) {
            let n = [3, 5, 7][k];
            let p = ps(n);
            let rho = DensityOperator::random_mixed(p.dim(), 2, seed);
            for s in [op(-1.0), op(0.0), op(1.0), op(0.3)] {
                let f = phase_fn(&p, &rho, s).unwrap();
                prop_assert!((f.normalization() - ONE).norm() < 1e-10);
            }
            let h = phase_fn(&p, &rho, OrderParam::H).unwrap();
            prop_assert!(h.grid().values().iter().all(|v| v.re >= -1e-12));
        }
    }
}
