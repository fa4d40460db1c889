//! Shared fixtures for the criterion benches.

use qps_core::{DensityOperator, PhaseSpace};

pub const DIMS: [usize; 3] = [5, 11, 21];

/// Phase space plus a fixed pseudo-random mixed state.
pub fn fixture(n: usize) -> (PhaseSpace, DensityOperator) {
    let ps = PhaseSpace::with_n(n).expect("odd dimension");
    let rho = DensityOperator::random_mixed(ps.dim(), 2, 17);
    (ps, rho)
}
