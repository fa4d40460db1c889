//! s-parametrized phase-space functions on odd-dimensional Hilbert spaces.
//!
//! The operator basis `T^(s)(mu, nu)` is built from Schwinger operators
//! weighted by a Jacobi-theta kernel. On top of it sit the quasiprobability
//! functions and their smoothing hierarchy, discrete Radon tomography, the
//! ancilla scattering circuit and a qudit teleportation simulation.
//!
//! ```
//! use qps_core::{phase_fn, DensityOperator, OrderParam, PhaseSpace};
//!
//! let ps = PhaseSpace::with_n(5).unwrap();
//! let vacuum = DensityOperator::fock(&ps, 0).unwrap();
//! let w = phase_fn(&ps, &vacuum, OrderParam::W).unwrap();
//! assert!((w.normalization().re - 1.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod io;
pub mod lattice;
pub mod quasiprob;
pub mod schwinger;
pub mod teleport;
pub mod theta;
pub mod tomography;
pub mod validate;

pub use error::{Error, Result};
pub use io::{GridExport, GridKind, StateSpec};
pub use lattice::{center_mod, dft_matrix, fidelity, partial_trace, tensor, CMatrix, CenteredLabel, Dim, GridFn};
pub use quasiprob::{
    char_fn, coherent_projector, coherent_state, expectation, phase_fn, phase_fn_from_char, reconstruct_rho,
    smooth_p_to_h, smooth_p_to_w, smooth_w_to_h, smoothing_2d, t_matrix_element, CharacteristicFunction,
    DensityOperator, PhaseSpaceFunction,
};
pub use schwinger::{s_op, t_op, u_matrix, v_matrix, OrderParam, PhaseSpace, TBasis};
pub use teleport::{
    bell_state, bipartite_phase_fn, lambda_coeffs, rho_from_lambda, teleport, theta_coeffs, upsilon_coeffs, BellLabel,
    BipartitePhaseFn, Grid4, Teleported,
};
pub use theta::{fock_coefficients, gamma_mn, kernel_k, phase_phi, smoothing_1d, theta, FockCoefficients, KernelTable, ThetaKind};
pub use tomography::{
    char_from_radon_q, char_from_radon_r, marginal_q, marginal_r, radon_q, radon_r, reconstruct_wigner,
    scattering_circuit, symplectic_c, symplectic_j, symplectic_m, symplectic_n, Axis, MarginalDistribution,
    SymplecticParams, TomographyReport,
};
