//! Deactivating directions: construction, composition and desk-scale
//! verification.
//!
//! An `R`-deactivating direction for a CSP `A` is a vector `d` in the dual
//! cone `M*` (nonnegative objective on every assignment) with `d < 0` on `R`
//! and `d = 0` on `A - R`. Such a direction certifies that the tuples `R` can
//! be forbidden without losing solutions; when the removals empty a scope
//! block, the composed direction is a certificate of unsatisfiability and an
//! improving direction for the bound.

use std::collections::BTreeMap;

use crate::csp::{CspInstance, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::model::{Assignment, TupleIdx, Value, Var, WcspStructure};

/// Sparse direction: tuple index to nonzero finite delta.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Direction {
    entries: BTreeMap<TupleIdx, f64>,
}

impl Direction {
    pub fn new() -> Self {
        Direction::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (TupleIdx, f64)>) -> Self {
        let mut d = Direction::new();
        for (t, v) in entries {
            d.set(t, v);
        }
        d
    }

    pub fn get(&self, t: TupleIdx) -> f64 {
        self.entries.get(&t).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, t: TupleIdx, v: f64) {
        if v == 0.0 {
            self.entries.remove(&t);
        } else {
            self.entries.insert(t, v);
        }
    }

    pub fn add(&mut self, t: TupleIdx, v: f64) {
        self.set(t, self.get(t) + v);
    }

    /// `self += delta * other`.
    pub fn add_scaled(&mut self, delta: f64, other: &Direction) {
        if delta == 0.0 {
            return;
        }
        for (&t, &v) in &other.entries {
            self.add(t, delta * v);
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TupleIdx, f64)> + '_ {
        self.entries.iter().map(|(&t, &v)| (t, v))
    }

    /// Objective value `<d, phi(x)>` of the direction seen as a WCSP.
    pub fn evaluate(&self, structure: &WcspStructure, x: &Assignment) -> f64 {
        (0..structure.scope_count())
            .map(|si| self.get(structure.assignment_tuple(si, x)))
            .sum()
    }

    /// Dense copy, for apply-step time.
    pub fn to_dense(&self, structure: &WcspStructure) -> Vec<f64> {
        let mut dense = vec![0.0; structure.tuple_count()];
        for (&t, &v) in &self.entries {
            dense[t] = v;
        }
        dense
    }
}

/// A pair `(R, d)` with `d` an `R`-deactivating direction for the instance it
/// was built against.
#[derive(Debug, Clone, PartialEq)]
pub struct DeactivatingCertificate {
    pub removed: CspInstance,
    pub direction: Direction,
}

/// One propagation step: the tuples forbidden and the direction certifying it.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub removed: CspInstance,
    pub direction: Direction,
}

/// Ordered record of a `propagate` run. The removal sets are pairwise
/// disjoint; step `i` is deactivating for `A - R_0 - ... - R_{i-1}`.
#[derive(Debug, Clone, Default)]
pub struct PropagationTrace {
    pub steps: Vec<TraceStep>,
    pub wiped_scope: Option<usize>,
}

impl PropagationTrace {
    pub fn new() -> Self {
        PropagationTrace::default()
    }

    /// Appends a step, checking disjointness with all earlier removals.
    pub fn push(&mut self, removed: CspInstance, direction: Direction) -> Result<()> {
        for earlier in &self.steps {
            if !earlier.removed.is_disjoint(&removed) {
                return Err(Error::OverlappingRemovals { step: self.steps.len() });
            }
        }
        self.steps.push(TraceStep { removed, direction });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Union of all removal sets.
    pub fn all_removed(&self, structure: &WcspStructure) -> CspInstance {
        let mut u = CspInstance::empty(structure);
        for step in &self.steps {
            u = u.union(&step.removed);
        }
        u
    }
}

/// The generic construction: `d = -1` on `R`, `delta` on `T - A`, `0` on
/// `A - R`, with `delta` the number of scopes touched by `R`. Valid whenever
/// the caller guarantees `SOL(A) = SOL(A - R)`.
pub fn generic_direction(
    structure: &WcspStructure,
    a: &CspInstance,
    r: &CspInstance,
) -> Result<DeactivatingCertificate> {
    if r.is_empty() {
        return Err(Error::EmptyRemoval);
    }
    if !a.contains_all(r) {
        return Err(Error::RemovalNotAllowed);
    }
    let delta = (0..structure.scope_count())
        .filter(|&si| !r.block_is_empty(structure, si))
        .count() as f64;
    let mut d = Direction::new();
    for t in 0..structure.tuple_count() {
        if r.is_allowed(t) {
            d.set(t, -1.0);
        } else if !a.is_allowed(t) {
            d.set(t, delta);
        }
    }
    Ok(DeactivatingCertificate { removed: r.clone(), direction: d })
}

/// The arc-consistency pair-prune direction: `-1` on every tuple of the block
/// `T_S` whose component at `var` equals `value`, `+1` on the forbidden unary
/// tuple `({var}, value)`. Lies in the orthogonal space (zero objective for
/// every assignment). The removal set is the allowed part of the `-1` support
/// in `a`.
pub fn ac_support_direction(
    structure: &WcspStructure,
    a: &CspInstance,
    scope_idx: usize,
    var: Var,
    value: Value,
) -> Result<DeactivatingCertificate> {
    let unary = structure.unary_tuple(var, value)?;
    let scope = structure.scope(scope_idx);
    let slot = scope
        .vars()
        .iter()
        .position(|&v| v == var)
        .ok_or_else(|| Error::Invalid(format!("variable {var} not in scope {scope}")))?;
    let mut d = Direction::new();
    let mut removed = CspInstance::empty(structure);
    for t in structure.block(scope_idx) {
        let (_, vals) = structure.tuple_values(t);
        if vals[slot] == value {
            d.set(t, -1.0);
            if a.is_allowed(t) {
                removed.allow(t);
            }
        }
    }
    d.add(unary, 1.0);
    Ok(DeactivatingCertificate { removed, direction: d })
}

/// Composition rule: given `dA` `R`-deactivating for some `A` and `dB`
/// `R'`-deactivating for `A - R`, returns `dB + delta * dA`, which is
/// `(R u R')`-deactivating for `A`. The threshold comparison is exact; the
/// `-1` values arise from the constructions, not from measurements.
pub fn compose_pair(d_a: &Direction, r: &CspInstance, d_b: &Direction) -> Direction {
    let mut delta = 0.0f64;
    for t in r.iter() {
        let b = d_b.get(t);
        if b > -1.0 {
            let a = d_a.get(t);
            debug_assert!(a < 0.0, "dA must be negative on R");
            delta = delta.max((-1.0 - b) / a);
        }
    }
    let mut out = d_b.clone();
    out.add_scaled(delta, d_a);
    out
}

/// `I = {i : R_i` touches the block of `scope_idx}`.
pub fn chosen_indices(
    structure: &WcspStructure,
    trace: &PropagationTrace,
    scope_idx: usize,
) -> Result<Vec<usize>> {
    let indices: Vec<usize> = trace
        .steps
        .iter()
        .enumerate()
        .filter(|(_, step)| !step.removed.block_is_empty(structure, scope_idx))
        .map(|(i, _)| i)
        .collect();
    if indices.is_empty() {
        return Err(Error::ScopeNotInTrace {
            scope: structure.scope(scope_idx).vars().to_vec(),
        });
    }
    Ok(indices)
}

/// Composes a subsequence of trace steps into a single deactivating
/// certificate for the initial instance: walk from `max I` down to step 0,
/// folding in step `i` whenever `i` is chosen or the running direction is
/// nonzero somewhere on `R_i`.
pub fn compose_trace(
    trace: &PropagationTrace,
    chosen: &[usize],
) -> Result<DeactivatingCertificate> {
    if chosen.is_empty() || chosen.iter().any(|&i| i >= trace.len()) {
        return Err(Error::BadIndexSet);
    }
    let top = *chosen.iter().max().unwrap();
    let mut d = trace.steps[top].direction.clone();
    let mut q = trace.steps[top].removed.clone();
    for i in (0..top).rev() {
        let step = &trace.steps[i];
        let touched = step.removed.iter().any(|t| d.get(t) != 0.0);
        if chosen.contains(&i) || touched {
            d = compose_pair(&step.direction, &step.removed, &d);
            q = q.union(&step.removed);
        }
    }
    Ok(DeactivatingCertificate { removed: q, direction: d })
}

/// Desk-scale check of the deactivating conditions: `d < 0` on `R`, `d = 0`
/// on `A - R`, and `<d, phi(x)> >= 0` for every assignment by enumeration.
pub fn verify_certificate(
    structure: &WcspStructure,
    a: &CspInstance,
    cert: &DeactivatingCertificate,
) -> Result<bool> {
    if cert.removed.is_empty() || !a.contains_all(&cert.removed) {
        return Ok(false);
    }
    for t in cert.removed.iter() {
        if cert.direction.get(t) >= 0.0 {
            return Ok(false);
        }
    }
    for t in a.iter() {
        if !cert.removed.is_allowed(t) && cert.direction.get(t) != 0.0 {
            return Ok(false);
        }
    }
    // membership in the dual cone, by enumeration
    let count = structure.assignment_count();
    if count > DEFAULT_ENUMERATION_CAP as u128 {
        return Err(Error::ScaleExceeded { assignments: count, cap: DEFAULT_ENUMERATION_CAP });
    }
    for x in structure.assignments() {
        if cert.direction.evaluate(structure, &x) < -crate::model::EPS_ACTIVE {
            return Ok(false);
        }
    }
    Ok(true)
}
