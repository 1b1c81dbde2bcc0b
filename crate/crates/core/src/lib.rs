//! Upper bounds on the optimal value of maximization weighted CSPs by
//! iteratively improving super-reparametrizations.
//!
//! A weighted CSP assigns a weight to every tuple (scope, value assignment);
//! the objective of an assignment is the sum of the weights it uses, and
//! `B(f)` (the sum of per-scope maxima) bounds the optimum from above. The
//! solver repeatedly proves the CSP of (almost) maximal tuples unsatisfiable
//! by constraint propagation, turns the propagation history into a
//! certificate of unsatisfiability, and steps along that certificate: the
//! objective of no assignment ever decreases while the bound strictly drops.
//! Arc consistency alone recovers the virtual-arc-consistency algorithm;
//! singleton arc consistency and cycle consistency give strictly stronger
//! bounds on many instances.
//!
//! The crate is desk-scale by intent: an exhaustive oracle
//! ([`oracle`]) cross-checks every construction on small instances, and the
//! propagation disciplines are deterministic so traces can be tested
//! verbatim.
//!
//! ```
//! use wcsp_bound::{samples, solve, SolverConfig, SolverMode};
//!
//! let (structure, weights) = samples::walkthrough_initial();
//! let report = solve(&structure, &weights, &SolverConfig::new(SolverMode::VsacSr)).unwrap();
//! assert!((report.final_bound - 43.0).abs() < 1e-9);
//! ```

pub mod csp;
pub mod direction;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod propagate;
pub mod samples;
pub mod solver;

pub use csp::{
    is_satisfiable, minimal_csp, positive_consistency_closure, restrict_csp, solutions,
    CspInstance, SolutionSet,
};
pub use direction::{
    ac_support_direction, chosen_indices, compose_pair, compose_trace, generic_direction,
    verify_certificate, DeactivatingCertificate, Direction, PropagationTrace,
};
pub use error::{Error, Result};
pub use model::{
    active_set, evaluate, indicator, theta_active_set, upper_bound, Assignment, Scope,
    WcspStructure, WeightVector,
};
pub use oracle::{
    brute_force_optimum, check_optimality, in_dual_cone, in_orthogonal_space,
    is_reparametrization, is_superreparametrization, optimal_superrepar_from_csp,
};
pub use propagate::{
    ac_step, cc_step, edac_check, propagate, sac_step, select_cycles, EdacViolation, Mode,
    PropagatorConfig,
};
pub use solver::{
    apply_step, improve_once, line_search, solve, vac_prepass, SolverConfig, SolverMode,
    SolverReport, Termination,
};
