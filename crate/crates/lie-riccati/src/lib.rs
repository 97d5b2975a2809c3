//! Riccati equations through the group SL(2,R).
//!
//! The scalar Riccati equation dx/dt = a0(t) + a1(t) x + a2(t) x^2 is the
//! projection to the line of a left-invariant flow on SL(2,R).  This crate
//! builds that correspondence out explicitly and uses it in four ways:
//!
//! * integrate the flow as a product of one-parameter subgroups, in every
//!   one of the six factorization orderings ([`wei_norman`]);
//! * evaluate and verify the nonlinear superposition principle: any fourth
//!   solution is a cross-ratio-preserving combination of three, the group
//!   curve can be reconstructed from three solutions, and one known solution
//!   reduces the equation to quadratures ([`superposition`]);
//! * move between second-order linear equations and Riccati equations via
//!   the logarithmic derivative ([`reduction`]);
//! * apply all of it to the harmonic-oscillator spectral problem, with
//!   Hermite closed forms, a shooting spectrum, and a confluent
//!   hypergeometric cross-check ([`oscillator`]).
//!
//! [`coeff`] supplies time-dependent coefficients, [`projective`] the group
//! and its action on the projective line, and [`integrate`] the adaptive
//! integrator everything rests on.

pub mod coeff;
pub mod error;
pub mod integrate;
pub mod oscillator;
pub mod projective;
pub mod reduction;
pub mod superposition;
pub mod wei_norman;

pub use coeff::{CoefficientFn, Interpolation, RiccatiSystem};
pub use error::{Error, Result};
pub use integrate::{
    cumulative_quadrature, derivative_samples, integrate_ivp, integrate_riccati_projective,
    integrate_riccati_projective_detailed, max_riccati_residual, riccati_residual, ProjectiveRun,
    TimeGrid, Trajectory, DEFAULT_NODES, DEFAULT_TOL,
};
pub use oscillator::{
    eigenfunction, eigenfunction_derivative, g0_closed_form, g1_g2_closed_form, hermite,
    hermite_at_zero, hermite_zeros, k1_even, k1_odd, kummer_map_check, odd_case_coords,
    oscillator_riccati, spectrum_scan, ClosedFormCoords, HermiteEval, SpectralResult,
};
pub use projective::{
    cross_ratio, cross_ratio_first_integral, det2, moebius_apply, sl2_exp_generator, Generator,
    ProjectivePoint, Sl2Element,
};
pub use reduction::{
    integrate_linear, log_derivative, projection_equivalence, reconstruct_u, riccati_from_linear,
    LinearSecondOrder, LinearSolution,
};
pub use superposition::{
    annihilation_check, bernoulli_reduce, canonicalize_triple, coords_from_solutions,
    cross_ratio_real, first_integral, group_curve_from_solutions, mat2_apply, mat2_det,
    riccati_from_group_curve, superpose, AnnihilationResidual, FundamentalTriple, Mat2,
};
pub use wei_norman::{
    evolution_operator, general_solution, reduced_riccati, solve_wn, verify_wn_relation,
    wn_relation_residual, wn_rhs, wn_vector_field, FactorizationOrdering, WnCoordinates,
};
