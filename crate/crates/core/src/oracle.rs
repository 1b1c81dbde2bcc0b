//! Exact desk-scale ground truth by exhaustive enumeration: optima,
//! reparametrization and cone membership checks, and the flat optimal
//! super-reparametrization construction.

use crate::csp::{solutions, CspInstance, SolutionSet};
use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::model::{active_set, evaluate, Assignment, WcspStructure, WeightVector};

/// Tolerance for equality comparisons in oracle checks.
pub const EPS_ORACLE: f64 = 1e-9;

fn guard(structure: &WcspStructure) -> Result<()> {
    let n = structure.assignment_count();
    let cap = crate::csp::DEFAULT_ENUMERATION_CAP;
    if n > cap as u128 {
        return Err(Error::ScaleExceeded { assignments: n, cap });
    }
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    if a == b {
        return true; // covers equal infinities
    }
    (a - b).abs() <= EPS_ORACLE
}

/// Exact optimum and the full set of optimal assignments.
pub fn brute_force_optimum(
    structure: &WcspStructure,
    g: &WeightVector,
) -> Result<(f64, SolutionSet)> {
    guard(structure)?;
    let mut best = f64::NEG_INFINITY;
    for x in structure.assignments() {
        best = best.max(evaluate(structure, g, &x));
    }
    let assignments: Vec<Assignment> = structure
        .assignments()
        .filter(|x| close(evaluate(structure, g, x), best))
        .collect();
    Ok((best, SolutionSet { assignments }))
}

/// Do `f` and `g` agree on every assignment?
pub fn is_reparametrization(structure: &WcspStructure, f: &WeightVector, g: &WeightVector) -> Result<bool> {
    guard(structure)?;
    Ok(structure
        .assignments()
        .all(|x| close(evaluate(structure, f, &x), evaluate(structure, g, &x))))
}

/// Is `f` at least `g` on every assignment?
pub fn is_superreparametrization(
    structure: &WcspStructure,
    f: &WeightVector,
    g: &WeightVector,
) -> Result<bool> {
    guard(structure)?;
    Ok(structure.assignments().all(|x| {
        let vf = evaluate(structure, f, &x);
        let vg = evaluate(structure, g, &x);
        vf >= vg || close(vf, vg)
    }))
}

/// Membership in the dual cone: nonnegative objective on every assignment.
pub fn in_dual_cone(structure: &WcspStructure, d: &Direction) -> Result<bool> {
    guard(structure)?;
    Ok(structure
        .assignments()
        .all(|x| d.evaluate(structure, &x) >= -EPS_ORACLE))
}

/// Membership in the orthogonal space: zero objective on every assignment.
pub fn in_orthogonal_space(structure: &WcspStructure, d: &Direction) -> Result<bool> {
    guard(structure)?;
    Ok(structure
        .assignments()
        .all(|x| d.evaluate(structure, &x).abs() <= EPS_ORACLE))
}

/// Is the super-reparametrization `f` of `g` optimal, i.e. does some solution
/// of the active CSP of `f` attain the objective of `g`?
pub fn check_optimality(structure: &WcspStructure, f: &WeightVector, g: &WeightVector) -> Result<bool> {
    guard(structure)?;
    let a = active_set(structure, f);
    Ok(structure.assignments().any(|x| {
        a.admits(structure, &x) && close(evaluate(structure, f, &x), evaluate(structure, g, &x))
    }))
}

/// Builds the flat optimal super-reparametrization whose active CSP is
/// exactly `a`: best objective value over `a`, second-best off it. Requires
/// every optimal assignment of `g` to solve `a`.
pub fn optimal_superrepar_from_csp(
    structure: &WcspStructure,
    g: &WeightVector,
    a: &CspInstance,
) -> Result<WeightVector> {
    let (best, opt) = brute_force_optimum(structure, g)?;
    let sols = solutions(structure, a)?;
    if !opt.assignments.iter().all(|x| sols.contains(x)) {
        return Err(Error::OptimaNotCovered);
    }
    let second = structure
        .assignments()
        .map(|x| evaluate(structure, g, &x))
        .filter(|&v| v < best - EPS_ORACLE)
        .fold(f64::NEG_INFINITY, f64::max);
    let second = if second.is_finite() { second } else { best };
    let c = structure.scope_count() as f64;
    let weights = (0..structure.tuple_count())
        .map(|t| if a.is_allowed(t) { best / c } else { second / c })
        .collect();
    WeightVector::from_vec(structure, weights)
}
