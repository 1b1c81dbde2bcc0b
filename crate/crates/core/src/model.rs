//! WCSP structure, weight vectors and the upper bound `B`.
//!
//! A structure fixes the variables, their domain sizes and an ordered list of
//! scopes. Weight vectors, CSP instances and directions are all indexed by the
//! same dense tuple table: scope blocks are laid out in declaration order and,
//! within a block, value tuples are ordered lexicographically with the first
//! (lowest) variable of the scope most significant. Assignment enumeration is
//! lexicographic over variables in ascending order.

use crate::error::{Error, Result};

pub type Var = usize;
pub type Value = usize;
/// Dense index into the tuple table.
pub type TupleIdx = usize;

/// Absolute tolerance for activity tests (`f_t >= max - EPS_ACTIVE`). Kept
/// well below the oracle tolerance so the threshold-scaled solver can
/// converge past it.
pub const EPS_ACTIVE: f64 = 1e-12;

/// A non-empty set of variables in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scope(Vec<Var>);

impl Scope {
    pub fn new(mut vars: Vec<Var>) -> Result<Self> {
        vars.sort_unstable();
        vars.dedup();
        if vars.is_empty() {
            return Err(Error::Invalid("empty scope".into()));
        }
        Ok(Scope(vars))
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, var: Var) -> bool {
        self.0.binary_search(&var).is_ok()
    }
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Fixed triple (domain sizes, variables, scopes) plus the tuple table that
/// bijects structured tuples `(scope, values)` with dense indices `0..|T|`.
#[derive(Debug, Clone, PartialEq)]
pub struct WcspStructure {
    domain_sizes: Vec<usize>,
    scopes: Vec<Scope>,
    /// Start of each scope block in the dense table; last entry is `|T|`.
    offsets: Vec<usize>,
    /// Scope index of every tuple.
    scope_of: Vec<usize>,
    /// Indices of scopes containing each variable.
    scopes_of_var: Vec<Vec<usize>>,
    /// Scope index of the unary scope `{i}`, if declared.
    unary_scope: Vec<Option<usize>>,
}

impl WcspStructure {
    /// Builds a structure. Scopes must be distinct and non-empty; every
    /// variable referenced must exist and every domain size must be positive.
    pub fn new(domain_sizes: Vec<usize>, scopes: Vec<Scope>) -> Result<Self> {
        let n = domain_sizes.len();
        if n == 0 {
            return Err(Error::Invalid("structure needs at least one variable".into()));
        }
        if domain_sizes.contains(&0) {
            return Err(Error::Invalid("domain sizes must be positive".into()));
        }
        if scopes.is_empty() {
            return Err(Error::Invalid("structure needs at least one scope".into()));
        }
        for (i, s) in scopes.iter().enumerate() {
            if s.vars().iter().any(|&v| v >= n) {
                return Err(Error::Invalid(format!("scope {s} references an unknown variable")));
            }
            if scopes[..i].contains(s) {
                return Err(Error::Invalid(format!("scope {s} is declared twice")));
            }
        }

        let mut offsets = Vec::with_capacity(scopes.len() + 1);
        let mut scope_of = Vec::new();
        let mut off = 0usize;
        for (si, s) in scopes.iter().enumerate() {
            offsets.push(off);
            let block: usize = s.vars().iter().map(|&v| domain_sizes[v]).product();
            scope_of.extend(std::iter::repeat_n(si, block));
            off += block;
        }
        offsets.push(off);

        let mut scopes_of_var = vec![Vec::new(); n];
        let mut unary_scope = vec![None; n];
        for (si, s) in scopes.iter().enumerate() {
            for &v in s.vars() {
                scopes_of_var[v].push(si);
            }
            if s.arity() == 1 {
                unary_scope[s.vars()[0]] = Some(si);
            }
        }

        Ok(WcspStructure {
            domain_sizes,
            scopes,
            offsets,
            scope_of,
            scopes_of_var,
            unary_scope,
        })
    }

    pub fn variable_count(&self) -> usize {
        self.domain_sizes.len()
    }

    pub fn domain_size(&self, var: Var) -> usize {
        self.domain_sizes[var]
    }

    pub fn scopes(&self) -> &[Scope] {
        &self.scopes
    }

    pub fn scope(&self, idx: usize) -> &Scope {
        &self.scopes[idx]
    }

    pub fn scope_count(&self) -> usize {
        self.scopes.len()
    }

    /// Total number of tuples `|T|`.
    pub fn tuple_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Dense index range of the block `T_S` for scope `idx`.
    pub fn block(&self, idx: usize) -> std::ops::Range<usize> {
        self.offsets[idx]..self.offsets[idx + 1]
    }

    pub fn scope_of_tuple(&self, t: TupleIdx) -> usize {
        self.scope_of[t]
    }

    pub fn scopes_of_var(&self, var: Var) -> &[usize] {
        &self.scopes_of_var[var]
    }

    pub fn unary_scope(&self, var: Var) -> Result<usize> {
        self.unary_scope[var].ok_or(Error::MissingUnaryScope { var })
    }

    pub fn has_all_unary_scopes(&self) -> bool {
        self.unary_scope.iter().all(|u| u.is_some())
    }

    pub fn is_binary(&self) -> bool {
        self.scopes.iter().all(|s| s.arity() <= 2)
    }

    /// Encodes `(scope, values)` into the dense tuple index. Values are given
    /// in the scope's ascending variable order.
    pub fn tuple_index(&self, scope_idx: usize, values: &[Value]) -> TupleIdx {
        let s = &self.scopes[scope_idx];
        debug_assert_eq!(values.len(), s.arity());
        let mut local = 0usize;
        for (&v, &val) in s.vars().iter().zip(values) {
            debug_assert!(val < self.domain_sizes[v]);
            local = local * self.domain_sizes[v] + val;
        }
        self.offsets[scope_idx] + local
    }

    /// Convenience for unary tuples `({var}, value)`.
    pub fn unary_tuple(&self, var: Var, value: Value) -> Result<TupleIdx> {
        let si = self.unary_scope(var)?;
        Ok(self.tuple_index(si, &[value]))
    }

    /// Decodes a dense index into `(scope index, values)`.
    pub fn tuple_values(&self, t: TupleIdx) -> (usize, Vec<Value>) {
        let si = self.scope_of[t];
        let s = &self.scopes[si];
        let mut local = t - self.offsets[si];
        let mut values = vec![0; s.arity()];
        for (slot, &v) in s.vars().iter().enumerate().rev() {
            let d = self.domain_sizes[v];
            values[slot] = local % d;
            local /= d;
        }
        (si, values)
    }

    /// Dense index of the tuple `(S, x[S])` without materializing the
    /// restriction.
    pub fn assignment_tuple(&self, scope_idx: usize, x: &Assignment) -> TupleIdx {
        let s = &self.scopes[scope_idx];
        let mut local = 0usize;
        for &v in s.vars() {
            local = local * self.domain_sizes[v] + x.0[v];
        }
        self.offsets[scope_idx] + local
    }

    /// Number of assignments `|D^V|` (may overflow usize, hence u128).
    pub fn assignment_count(&self) -> u128 {
        self.domain_sizes.iter().map(|&d| d as u128).product()
    }

    /// Iterates all assignments in lexicographic order (last variable fastest).
    pub fn assignments(&self) -> AssignmentIter<'_> {
        AssignmentIter { structure: self, next: Some(Assignment(vec![0; self.variable_count()])), started: false }
    }

    /// Human-readable tuple, e.g. `({0,1},(1,0))`.
    pub fn describe_tuple(&self, t: TupleIdx) -> String {
        let (si, vals) = self.tuple_values(t);
        let vals: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
        format!("({},({}))", self.scopes[si], vals.join(","))
    }
}

/// A full assignment of values to all variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<Value>);

impl Assignment {
    pub fn values(&self) -> &[Value] {
        &self.0
    }

    /// Restriction `x[S]`: components at the variables of `scope`, ascending.
    pub fn restrict(&self, scope: &Scope) -> Vec<Value> {
        scope.vars().iter().map(|&v| self.0[v]).collect()
    }

    /// Dense index of the tuple `(S, x[S])` that this assignment uses.
    pub fn tuple_in(&self, structure: &WcspStructure, scope_idx: usize) -> TupleIdx {
        structure.assignment_tuple(scope_idx, self)
    }

    pub fn is_valid_for(&self, structure: &WcspStructure) -> bool {
        self.0.len() == structure.variable_count()
            && self.0.iter().enumerate().all(|(v, &val)| val < structure.domain_size(v))
    }
}

pub struct AssignmentIter<'a> {
    structure: &'a WcspStructure,
    next: Option<Assignment>,
    started: bool,
}

impl Iterator for AssignmentIter<'_> {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        if !self.started {
            self.started = true;
            return self.next.clone();
        }
        let cur = self.next.as_mut()?;
        // odometer increment, last variable fastest
        let mut i = cur.0.len();
        loop {
            if i == 0 {
                self.next = None;
                return None;
            }
            i -= 1;
            cur.0[i] += 1;
            if cur.0[i] < self.structure.domain_size(i) {
                break;
            }
            cur.0[i] = 0;
        }
        self.next.clone()
    }
}

/// Extended-real weight per tuple. `f64::NEG_INFINITY` is the hard-constraint
/// sentinel; arithmetic with it follows the usual extended rules.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn zeros(structure: &WcspStructure) -> Self {
        WeightVector(vec![0.0; structure.tuple_count()])
    }

    pub fn from_vec(structure: &WcspStructure, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != structure.tuple_count() {
            return Err(Error::Invalid(format!(
                "weight vector has {} entries, structure has {} tuples",
                weights.len(),
                structure.tuple_count()
            )));
        }
        if weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::Invalid("weights must be finite or -inf".into()));
        }
        Ok(WeightVector(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, t: TupleIdx) -> f64 {
        self.0[t]
    }

    /// Checks the hard-constraint assumption: at least one finite weight in
    /// every scope block.
    pub fn has_finite_per_scope(&self, structure: &WcspStructure) -> bool {
        (0..structure.scope_count())
            .all(|si| structure.block(si).any(|t| self.0[t].is_finite()))
    }
}

/// Indicator vector of `x`: 1 at the tuple `(S, x[S])` of each scope block.
pub fn indicator(structure: &WcspStructure, x: &Assignment) -> Vec<u8> {
    let mut phi = vec![0u8; structure.tuple_count()];
    for si in 0..structure.scope_count() {
        phi[x.tuple_in(structure, si)] = 1;
    }
    phi
}

/// Objective value `<f, phi(x)>`, with extended arithmetic for hard tuples.
pub fn evaluate(structure: &WcspStructure, f: &WeightVector, x: &Assignment) -> f64 {
    (0..structure.scope_count())
        .map(|si| f.get(x.tuple_in(structure, si)))
        .sum()
}

/// Per-scope maximum of a block; `-inf` if the whole block is hard.
pub fn scope_max(structure: &WcspStructure, f: &WeightVector, scope_idx: usize) -> f64 {
    structure
        .block(scope_idx)
        .map(|t| f.get(t))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The bound `B(f)`: sum over scopes of the per-scope maximum weight.
pub fn upper_bound(structure: &WcspStructure, f: &WeightVector) -> f64 {
    (0..structure.scope_count())
        .map(|si| scope_max(structure, f, si))
        .sum()
}

/// Tuples within `theta` of their scope maximum (with the activity tolerance).
/// Hard tuples are never included.
pub fn theta_active_set(structure: &WcspStructure, f: &WeightVector, theta: f64) -> crate::csp::CspInstance {
    assert!(theta >= 0.0, "theta must be nonnegative");
    let mut allowed = vec![false; structure.tuple_count()];
    for si in 0..structure.scope_count() {
        let m = scope_max(structure, f, si);
        for t in structure.block(si) {
            let w = f.get(t);
            if w.is_finite() && w >= m - theta - EPS_ACTIVE {
                allowed[t] = true;
            }
        }
    }
    crate::csp::CspInstance::from_allowed(allowed)
}

/// The active-tuple CSP `A*(f)`.
pub fn active_set(structure: &WcspStructure, f: &WeightVector) -> crate::csp::CspInstance {
    theta_active_set(structure, f, 0.0)
}
