//! The outer iterative method: propagate on the almost-active CSP, compose
//! the recorded deactivating directions into a certificate of
//! unsatisfiability, take a first-hit line-search step, and scale the
//! activity threshold down until it is negligible.

use std::time::{Duration, Instant};

use crate::direction::{chosen_indices, compose_trace, DeactivatingCertificate, Direction};
use crate::error::{Error, Result};
use crate::model::{
    active_set, scope_max, theta_active_set, upper_bound, WcspStructure, WeightVector,
};
use crate::propagate::{propagate, select_cycles, Mode, PropagatorConfig};

/// Consistency level of the outer solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    /// Arc consistency only; every step is a reparametrization.
    Vac,
    /// Singleton arc consistency via super-reparametrizations.
    VsacSr,
    /// Cycle consistency via super-reparametrizations.
    VccSr,
}

impl SolverMode {
    fn propagator_mode(self) -> Mode {
        match self {
            SolverMode::Vac => Mode::Ac,
            SolverMode::VsacSr => Mode::SacOverAc,
            SolverMode::VccSr => Mode::CcOverAc,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Initial activity threshold; `None` derives it from the weight ranges
    /// of the lowest-index edge and variable.
    pub theta_init: Option<f64>,
    pub theta_factor: f64,
    pub theta_min: f64,
    pub stall_window: usize,
    pub stall_epsilon: f64,
    pub max_iterations: usize,
    pub time_limit: Option<Duration>,
    /// Record every iterate's weight vector in the report (test support).
    pub record_iterates: bool,
}

impl SolverConfig {
    pub fn new(mode: SolverMode) -> Self {
        SolverConfig {
            mode,
            theta_init: None,
            theta_factor: 10.0,
            theta_min: 1e-6,
            stall_window: 20,
            stall_epsilon: 1e-15,
            max_iterations: 100_000,
            time_limit: None,
            record_iterates: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.theta_factor <= 1.0 || !self.theta_factor.is_finite() {
            return Err(Error::Invalid("theta_factor must exceed 1".into()));
        }
        if self.theta_min <= 0.0 || !self.theta_min.is_finite() {
            return Err(Error::Invalid("theta_min must be positive".into()));
        }
        if self.stall_window == 0 {
            return Err(Error::Invalid("stall_window must be at least 1".into()));
        }
        Ok(())
    }
}

/// One accepted improving step.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub bound: f64,
    pub theta: f64,
    pub step_size: f64,
    pub certificate_nnz: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Theta reached its floor and the instance is consistent there.
    Converged,
    /// The step size was unbounded: the hard-constrained instance is
    /// infeasible and the bound is minus infinity.
    Infeasible,
    IterationLimit,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct SolverReport {
    pub final_bound: f64,
    pub final_weights: WeightVector,
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
    /// Present when `record_iterates` was set: every accepted iterate.
    pub iterates: Vec<WeightVector>,
}

/// First-hit line search of Theorem-15 shape. `beta` caps the step so that no
/// non-wiped scope maximum increases; `gamma` caps it so the wiped-scope drop
/// is not overshot. Either is `+inf` when its constraint set is empty.
pub fn line_search(
    structure: &WcspStructure,
    f: &WeightVector,
    cert: &DeactivatingCertificate,
) -> (f64, f64) {
    let maxima: Vec<f64> = (0..structure.scope_count())
        .map(|si| scope_max(structure, f, si))
        .collect();

    let mut beta = f64::INFINITY;
    for (t, d) in cert.direction.iter() {
        if d > 0.0 {
            let si = structure.scope_of_tuple(t);
            beta = beta.min((maxima[si] - f.get(t)) / d);
        }
    }

    let active = active_set(structure, f);
    let mut gamma = f64::INFINITY;
    for si in 0..structure.scope_count() {
        let wiped = active
            .allowed_in_block(structure, si)
            .all(|t| cert.removed.is_allowed(t));
        if !wiped {
            continue;
        }
        for t in structure.block(si) {
            if !cert.removed.is_allowed(t) {
                continue;
            }
            let dt = cert.direction.get(t);
            for t2 in structure.block(si) {
                if cert.removed.is_allowed(t2) {
                    continue;
                }
                let dt2 = cert.direction.get(t2);
                // pairs without a clear weight gap cannot dominate the falling
                // scope maximum; they arise only when the removal set extends
                // past the true active tuples under threshold scaling
                if dt2 > dt && f.get(t) - f.get(t2) > crate::model::EPS_ACTIVE {
                    gamma = gamma.min((f.get(t) - f.get(t2)) / (dt2 - dt));
                }
            }
        }
    }
    (beta, gamma)
}

/// `f + alpha * d` with extended arithmetic; hard tuples stay hard.
pub fn apply_step(f: &WeightVector, d: &Direction, alpha: f64) -> WeightVector {
    assert!(alpha > 0.0 && alpha.is_finite(), "step size must be positive and finite");
    let mut out = f.0.clone();
    for (t, v) in d.iter() {
        if out[t].is_finite() {
            out[t] += alpha * v;
        }
    }
    WeightVector(out)
}

/// Outcome of one inner iteration.
pub enum StepOutcome {
    /// The almost-active CSP is consistent at this threshold.
    Fixpoint,
    /// An improving step was taken.
    Improved { weights: WeightVector, step_size: f64, certificate_nnz: usize },
}

/// One iteration of the outer loop at threshold `theta`: propagate on the
/// almost-active CSP and, on a wipe-out, step along the composed certificate.
/// Fails with `UnboundedStep` when beta and gamma are both infinite, which
/// proves infeasibility of a hard-constrained instance.
pub fn improve_once(
    structure: &WcspStructure,
    f: &WeightVector,
    cfg: &PropagatorConfig,
    theta: f64,
) -> Result<StepOutcome> {
    let a = theta_active_set(structure, f, theta);
    let (wiped, trace) = propagate(structure, &a, cfg)?;
    let wiped = match wiped {
        None => return Ok(StepOutcome::Fixpoint),
        Some(s) => s,
    };
    if trace.is_empty() {
        return Err(Error::Invalid(
            "almost-active CSP has an empty scope block before propagation".into(),
        ));
    }
    let chosen = chosen_indices(structure, &trace, wiped)?;
    let cert = compose_trace(&trace, &chosen)?;
    let (beta, gamma) = line_search(structure, f, &cert);
    let alpha = beta.min(gamma);
    if alpha.is_infinite() {
        return Err(Error::UnboundedStep);
    }
    let nnz = cert.direction.nnz();
    Ok(StepOutcome::Improved {
        weights: apply_step(f, &cert.direction, alpha),
        step_size: alpha,
        certificate_nnz: nnz,
    })
}

/// Range of the finite weights within one scope block.
fn finite_range(structure: &WcspStructure, f: &WeightVector, scope_idx: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in structure.block(scope_idx) {
        let w = f.get(t);
        if w.is_finite() {
            lo = lo.min(w);
            hi = hi.max(w);
        }
    }
    if hi > lo {
        hi - lo
    } else {
        0.0
    }
}

/// Default initial threshold: weight range of the lowest-index edge plus the
/// weight range of the lowest-index variable. Falls back to the threshold
/// floor when both ranges vanish.
pub fn auto_theta_init(structure: &WcspStructure, g: &WeightVector, theta_min: f64) -> f64 {
    let edge = structure
        .scopes()
        .iter()
        .position(|s| s.arity() >= 2)
        .map(|si| finite_range(structure, g, si))
        .unwrap_or(0.0);
    let var = structure
        .unary_scope(0)
        .ok()
        .map(|si| finite_range(structure, g, si))
        .unwrap_or(0.0);
    let theta = edge + var;
    if theta > 0.0 {
        theta
    } else {
        theta_min
    }
}

/// Iteratively improves the bound on the optimal value of `g` by
/// super-reparametrizations. The returned weights always satisfy
/// `B(f) >= max_x <g, phi(x)>`; the bound is minus infinity exactly when a
/// hard-constrained instance was proved infeasible.
pub fn solve(structure: &WcspStructure, g: &WeightVector, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    if !g.has_finite_per_scope(structure) {
        return Err(Error::Invalid(
            "every scope needs at least one finite weight".into(),
        ));
    }
    let prop_cfg = match cfg.mode {
        SolverMode::VccSr => PropagatorConfig::cc_over_ac(select_cycles(structure)?),
        mode => PropagatorConfig { mode: mode.propagator_mode(), cycles: Vec::new() },
    };

    let start = Instant::now();
    let mut f = g.clone();
    let mut theta = cfg.theta_init.unwrap_or_else(|| auto_theta_init(structure, g, cfg.theta_min));
    if theta <= 0.0 {
        theta = cfg.theta_min;
    }
    let mut iterations = Vec::new();
    let mut iterates = Vec::new();
    let mut iteration = 0usize;
    let mut final_phase = false;
    let termination;

    'outer: loop {
        let mut stall = 0usize;
        let mut bound = upper_bound(structure, &f);
        // inner loop: improve at fixed theta until consistent or stalled
        loop {
            if iteration >= cfg.max_iterations {
                termination = Termination::IterationLimit;
                break 'outer;
            }
            if let Some(limit) = cfg.time_limit {
                if start.elapsed() >= limit {
                    termination = Termination::TimeLimit;
                    break 'outer;
                }
            }
            match improve_once(structure, &f, &prop_cfg, theta) {
                Err(Error::UnboundedStep) => {
                    termination = Termination::Infeasible;
                    break 'outer;
                }
                Err(e) => return Err(e),
                Ok(StepOutcome::Fixpoint) => break,
                Ok(StepOutcome::Improved { weights, step_size, certificate_nnz }) => {
                    let new_bound = upper_bound(structure, &weights);
                    if new_bound >= bound {
                        // the drop is below float resolution; keep the current
                        // iterate and move to the next threshold
                        break;
                    }
                    iteration += 1;
                    f = weights;
                    iterations.push(IterationRecord {
                        iteration,
                        bound: new_bound,
                        theta,
                        step_size,
                        certificate_nnz,
                        elapsed: start.elapsed(),
                    });
                    if cfg.record_iterates {
                        iterates.push(f.clone());
                    }
                    if bound - new_bound < cfg.stall_epsilon {
                        stall += 1;
                        if stall >= cfg.stall_window {
                            break;
                        }
                    } else {
                        stall = 0;
                    }
                    bound = new_bound;
                }
            }
        }
        if final_phase {
            termination = Termination::Converged;
            break;
        }
        if theta <= cfg.theta_min {
            // one last round on the exact active set
            final_phase = true;
            theta = 0.0;
        } else {
            theta /= cfg.theta_factor;
        }
    }

    let final_bound = if termination == Termination::Infeasible {
        f64::NEG_INFINITY
    } else {
        upper_bound(structure, &f)
    };
    Ok(SolverReport { final_bound, final_weights: f, iterations, termination, iterates })
}

/// Arc-consistency-only pre-pass: the returned weights are a
/// reparametrization of `g` since every AC direction lies in the orthogonal
/// space.
pub fn vac_prepass(structure: &WcspStructure, g: &WeightVector) -> Result<WeightVector> {
    let report = solve(structure, g, &SolverConfig::new(SolverMode::Vac))?;
    Ok(report.final_weights)
}
