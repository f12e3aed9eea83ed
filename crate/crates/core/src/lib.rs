//! Exact Kantorovich-Rubinstein transport on finite spaces.
//!
//! The crate covers four layers, each built on the previous one:
//!
//! - [`measures`]: finite spaces, probability vectors, cost matrices and the
//!   tightness test `c = sup_{u in Lip_c} |u(x) - u(y)|` (on a finite space:
//!   `c` equals its shortest-path closure).
//! - [`transport`]: the exact primal/dual solver. The primal is a min-cost
//!   flow by successive shortest paths; the dual potential falls out of the
//!   final node potentials. Also the explicit maximal coupling for the
//!   discrete metric.
//! - [`param`]: random margins indexed by a finite parameter space. Per-atom
//!   optimal plans are glued into one joint law on `Omega x S x S`.
//! - [`dependence`], [`reconstruct`], [`chain`]: the `tau_c` and `beta`
//!   dependence coefficients, couplings realizing them, an inverse-CDF sampler
//!   for those couplings, and a Markov-chain decay demo.
//!
//! All operations are pure. Solvers are deterministic: identical inputs give
//! bit-identical outputs.

pub mod chain;
pub mod dependence;
mod error;
mod flow;
pub mod measures;
pub mod param;
pub mod reconstruct;
pub mod tol;
pub mod transport;

pub use chain::{dobrushin_contraction, markov_tau_decay, ChainDecay};
pub use dependence::{
    beta, conditionals, mp_bound, mp_bound_best, tail_quantile, tau_c, tau_c_dual,
    ConditionalSystem, JointLaw, MpBound, TailQuantile,
};
pub use error::{Error, Result};
pub use measures::{
    check_cost_tight, hahn_decompose, lipschitz_check, path_closure, validate_prob,
    variation_norm, CostMatrix, DualPotential, FiniteSpace, ProbVec, SignedDecomposition,
    Tightness,
};
pub use param::{
    glue, param_dual, param_primal, validate_family, FamilySummary, ParamIntegrand, ParamPlan,
    RandomMeasureFamily,
};
pub use reconstruct::{
    couple_against, disintegrate_kernel, inverse_cdf_sample, reconstruct_law,
    verify_independence, ConditionalKernel, SampleBatch, SampleRecord, TripleLaw,
};
pub use transport::{
    dobrushin_plan, solve, solve_dual, solve_primal, CouplingPlan, KrSolver, TransportResult,
};
