//! Simulation and stability-analysis toolkit for a hierarchical
//! size-structured population model with distributed delay in the birth
//! process.
//!
//! The model tracks a density `p(s, t)` over individual size `s` in
//! `[0, m]`. Growth `gamma(s, P)` and mortality `mu(s, P)` respond to the
//! total population `P(t)` (scramble competition); fertility
//! `beta(s, tau, Q)` responds to a size-ranked interaction variable `Q`
//! (contest competition) and integrates over past times `tau` in
//! `[-theta, 0]` (distributed delay).
//!
//! The crate provides:
//!
//! * [`ratedsl`] — parse, evaluate, and symbolically differentiate the rate
//!   expressions used everywhere else;
//! * [`numerics`] — grids, trapezoid quadrature with prefix integrals, and
//!   bracketed root finding;
//! * [`equilibrium`] — survivorship, the basic reproduction function, the
//!   hierarchy profile, and positive steady states;
//! * [`spectrum`] — the characteristic matrix/determinant of the linearised
//!   system, the positivity condition, real-root location, and the
//!   stability classifier;
//! * [`simulator`] — nonlinear transient dynamics via a first-order upwind
//!   scheme with a delay-history ring buffer, used to cross-validate the
//!   spectral predictions.

// validations use the `!(x > 0.0)` form so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod numerics;
pub mod ratedsl;
pub mod rates;
pub mod simulator;
pub mod spectrum;

pub use equilibrium::{
    default_p_max, equilibrium_density, hierarchy_weight, reproduction_number, solve_equilibrium,
    survivorship_profile, trivial_state, EquilibriumError, EquilibriumOutcome, EquilibriumSolution,
};
pub use numerics::{
    bracket_scan, cumulative_trapezoid, find_root_bracketed, trapezoid, Bracket, DelayGrid,
    NumericsError, SizeGrid,
};
pub use ratedsl::{
    diff_expr, eval_expr, parse_expr, Bindings, Compiled, EvalError, Expr, ParseError, Var,
};
pub use rates::{Rate, RateError, RateSet};
pub use simulator::{
    growth_rate_fit, init_state, recruitment, run, step, HistoryInit, Record, RunResult, SimConfig,
    SimError, SimState, TimeSeries,
};
pub use spectrum::{
    char_det, char_matrix, classify, classify_trivial, leading_root, linear_coefficients, pi_star,
    positivity_check, BetaQSign, CharMatrix, CharProblem, LinearCoefficients, PositivityCheck,
    RealRootScan, SpectrumError, StabilityVerdict, Target, Verdict, VerdictBasis,
    VerdictDiagnostics,
};
