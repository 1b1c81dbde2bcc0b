//! Crisp CSP instances over the shared structure: exhaustive solution
//! enumeration, restrictions, the minimal CSP and the positive-consistency
//! closure. Everything here is desk-scale by design and guarded by an
//! assignment-count cap.

use crate::error::{Error, Result};
use crate::model::{Assignment, TupleIdx, Value, Var, WcspStructure};

/// Default cap on `|D|^|V|` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 22;

/// A subset of the tuple set `T`, identified with a CSP instance
/// (allowed tuples). Also used for plain tuple subsets such as removal sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspInstance {
    allowed: Vec<bool>,
}

impl CspInstance {
    pub fn from_allowed(allowed: Vec<bool>) -> Self {
        CspInstance { allowed }
    }

    /// The full instance `A = T`.
    pub fn full(structure: &WcspStructure) -> Self {
        CspInstance { allowed: vec![true; structure.tuple_count()] }
    }

    pub fn empty(structure: &WcspStructure) -> Self {
        CspInstance { allowed: vec![false; structure.tuple_count()] }
    }

    pub fn from_tuples(structure: &WcspStructure, tuples: &[TupleIdx]) -> Self {
        let mut a = Self::empty(structure);
        for &t in tuples {
            a.allowed[t] = true;
        }
        a
    }

    pub fn len(&self) -> usize {
        self.allowed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.iter().all(|&b| !b)
    }

    pub fn is_allowed(&self, t: TupleIdx) -> bool {
        self.allowed[t]
    }

    pub fn allow(&mut self, t: TupleIdx) {
        self.allowed[t] = true;
    }

    pub fn forbid(&mut self, t: TupleIdx) {
        self.allowed[t] = false;
    }

    pub fn count(&self) -> usize {
        self.allowed.iter().filter(|&&b| b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = TupleIdx> + '_ {
        self.allowed.iter().enumerate().filter(|(_, &b)| b).map(|(t, _)| t)
    }

    pub fn contains_all(&self, other: &CspInstance) -> bool {
        other.iter().all(|t| self.allowed[t])
    }

    pub fn is_disjoint(&self, other: &CspInstance) -> bool {
        !self.iter().any(|t| other.allowed[t])
    }

    pub fn intersection(&self, other: &CspInstance) -> CspInstance {
        let allowed = self
            .allowed
            .iter()
            .zip(&other.allowed)
            .map(|(&a, &b)| a && b)
            .collect();
        CspInstance { allowed }
    }

    pub fn union(&self, other: &CspInstance) -> CspInstance {
        let allowed = self
            .allowed
            .iter()
            .zip(&other.allowed)
            .map(|(&a, &b)| a || b)
            .collect();
        CspInstance { allowed }
    }

    pub fn minus(&self, other: &CspInstance) -> CspInstance {
        let allowed = self
            .allowed
            .iter()
            .zip(&other.allowed)
            .map(|(&a, &b)| a && !b)
            .collect();
        CspInstance { allowed }
    }

    /// Allowed tuples within the block of `scope_idx`.
    pub fn allowed_in_block<'a>(
        &'a self,
        structure: &'a WcspStructure,
        scope_idx: usize,
    ) -> impl Iterator<Item = TupleIdx> + 'a {
        structure.block(scope_idx).filter(move |&t| self.allowed[t])
    }

    pub fn block_is_empty(&self, structure: &WcspStructure, scope_idx: usize) -> bool {
        !structure.block(scope_idx).any(|t| self.allowed[t])
    }

    /// First scope (in declaration order) whose block has no allowed tuple.
    pub fn first_wiped_scope(&self, structure: &WcspStructure) -> Option<usize> {
        (0..structure.scope_count()).find(|&si| self.block_is_empty(structure, si))
    }

    /// Does `x` use only allowed tuples?
    pub fn admits(&self, structure: &WcspStructure, x: &Assignment) -> bool {
        (0..structure.scope_count()).all(|si| self.allowed[x.tuple_in(structure, si)])
    }
}

/// Explicit collection of assignments, in enumeration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub assignments: Vec<Assignment>,
}

impl SolutionSet {
    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn contains(&self, x: &Assignment) -> bool {
        self.assignments.contains(x)
    }
}

fn guard_scale(structure: &WcspStructure, cap: u64) -> Result<()> {
    let n = structure.assignment_count();
    if n > cap as u128 {
        return Err(Error::ScaleExceeded { assignments: n, cap });
    }
    Ok(())
}

/// Exact solution set of `A` by exhaustive enumeration, in lexicographic
/// order. Refuses when `|D|^|V|` exceeds `cap`.
pub fn solutions_capped(structure: &WcspStructure, a: &CspInstance, cap: u64) -> Result<SolutionSet> {
    guard_scale(structure, cap)?;
    let assignments = structure
        .assignments()
        .filter(|x| a.admits(structure, x))
        .collect();
    Ok(SolutionSet { assignments })
}

pub fn solutions(structure: &WcspStructure, a: &CspInstance) -> Result<SolutionSet> {
    solutions_capped(structure, a, DEFAULT_ENUMERATION_CAP)
}

/// Short-circuiting satisfiability test, same scale guard as `solutions`.
pub fn is_satisfiable(structure: &WcspStructure, a: &CspInstance) -> Result<bool> {
    guard_scale(structure, DEFAULT_ENUMERATION_CAP)?;
    Ok(structure.assignments().any(|x| a.admits(structure, &x)))
}

/// The restriction `A|_{x_i = k}`: forbids every unary tuple `({i}, k')` with
/// `k' != k`. Requires the unary scope `{i}` to be declared.
pub fn restrict_csp(structure: &WcspStructure, a: &CspInstance, var: Var, value: Value) -> Result<CspInstance> {
    let si = structure.unary_scope(var)?;
    let mut out = a.clone();
    for k in 0..structure.domain_size(var) {
        if k != value {
            out.forbid(structure.tuple_index(si, &[k]));
        }
    }
    Ok(out)
}

/// The minimal CSP for `X`: all tuples used by at least one member of `X`.
pub fn minimal_csp(structure: &WcspStructure, x: &SolutionSet) -> CspInstance {
    let mut a = CspInstance::empty(structure);
    for asg in &x.assignments {
        for si in 0..structure.scope_count() {
            a.allow(asg.tuple_in(structure, si));
        }
    }
    a
}

/// Positive-consistency closure: the smallest instance with the same solution
/// set as `A`. Scale-guarded like `solutions`.
pub fn positive_consistency_closure(structure: &WcspStructure, a: &CspInstance) -> Result<CspInstance> {
    let sols = solutions(structure, a)?;
    Ok(minimal_csp(structure, &sols))
}
