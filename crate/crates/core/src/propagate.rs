//! Constraint propagation over active-tuple CSPs: arc consistency, singleton
//! arc consistency, cycle consistency, the trace-producing driver, and the
//! EDAC property checker.
//!
//! The arc-consistency discipline is deterministic: each step scans for a
//! violated support condition, scopes in declaration order, variables within
//! a scope ascending, values ascending. Unary removals (an allowed unary
//! tuple with no allowed tuple above it in some scope) are scanned before
//! pair prunes (a forbidden unary tuple with allowed tuples above it), and
//! the scan restarts after every removal. The golden trace tests depend on
//! this order.

use std::collections::HashMap;

use crate::csp::CspInstance;
use crate::direction::{Direction, PropagationTrace};
use crate::error::{Error, Result};
use crate::model::{TupleIdx, Value, Var, WcspStructure};

/// Local consistency driving `propagate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ac,
    SacOverAc,
    CcOverAc,
}

/// Propagator configuration. The cycle list is only consulted in
/// `CcOverAc` mode; an empty list degenerates to plain AC.
#[derive(Debug, Clone)]
pub struct PropagatorConfig {
    pub mode: Mode,
    pub cycles: Vec<Vec<Var>>,
}

impl PropagatorConfig {
    pub fn ac() -> Self {
        PropagatorConfig { mode: Mode::Ac, cycles: Vec::new() }
    }

    pub fn sac_over_ac() -> Self {
        PropagatorConfig { mode: Mode::SacOverAc, cycles: Vec::new() }
    }

    pub fn cc_over_ac(cycles: Vec<Vec<Var>>) -> Self {
        PropagatorConfig { mode: Mode::CcOverAc, cycles }
    }
}

/// One AC violation found by the scan.
struct AcViolation {
    /// Tuples to forbid.
    removed: Vec<TupleIdx>,
    /// Certifying direction.
    direction: Direction,
    /// Forbidden tuples whose status justified the removal (the witness set).
    witnesses: Vec<TupleIdx>,
}

/// Support scan for one scope/variable/value triple: does some allowed tuple
/// of the block project to `value` at `var`?
fn has_support(
    structure: &WcspStructure,
    a: &CspInstance,
    scope_idx: usize,
    slot: usize,
    value: Value,
) -> bool {
    structure
        .block(scope_idx)
        .any(|t| a.is_allowed(t) && structure.tuple_values(t).1[slot] == value)
}

fn tuples_projecting(
    structure: &WcspStructure,
    scope_idx: usize,
    slot: usize,
    value: Value,
) -> Vec<TupleIdx> {
    structure
        .block(scope_idx)
        .filter(|&t| structure.tuple_values(t).1[slot] == value)
        .collect()
}

/// Finds one violated arc-consistency condition and returns the removal, its
/// direction and the witness set; `None` at the AC fixpoint.
///
/// Unary removals use the generic construction restricted to the witness
/// block (delta = 1); pair prunes use the support-shift direction. Both lie
/// in the orthogonal space, so AC steps are reparametrization-quality.
pub fn ac_step(structure: &WcspStructure, a: &CspInstance) -> Result<Option<(CspInstance, Direction, CspInstance)>> {
    if let Some(v) = find_ac_violation(structure, a)? {
        Ok(Some((
            CspInstance::from_tuples(structure, &v.removed),
            v.direction,
            CspInstance::from_tuples(structure, &v.witnesses),
        )))
    } else {
        Ok(None)
    }
}

fn find_ac_violation(structure: &WcspStructure, a: &CspInstance) -> Result<Option<AcViolation>> {
    // pass 1: unary tuples that lost all support in some scope
    for scope_idx in 0..structure.scope_count() {
        let scope = structure.scope(scope_idx);
        if scope.arity() < 2 {
            continue;
        }
        for (slot, &var) in scope.vars().iter().enumerate() {
            let unary_scope = structure.unary_scope(var)?;
            for value in 0..structure.domain_size(var) {
                let unary = structure.tuple_index(unary_scope, &[value]);
                if a.is_allowed(unary) && !has_support(structure, a, scope_idx, slot, value) {
                    let above = tuples_projecting(structure, scope_idx, slot, value);
                    let mut d = Direction::from_entries([(unary, -1.0)]);
                    for &t in &above {
                        d.add(t, 1.0);
                    }
                    return Ok(Some(AcViolation {
                        removed: vec![unary],
                        direction: d,
                        witnesses: above,
                    }));
                }
            }
        }
    }
    // pass 2: allowed tuples sitting above a forbidden unary tuple
    for scope_idx in 0..structure.scope_count() {
        let scope = structure.scope(scope_idx);
        if scope.arity() < 2 {
            continue;
        }
        for (slot, &var) in scope.vars().iter().enumerate() {
            let unary_scope = structure.unary_scope(var)?;
            for value in 0..structure.domain_size(var) {
                let unary = structure.tuple_index(unary_scope, &[value]);
                if a.is_allowed(unary) {
                    continue;
                }
                let above = tuples_projecting(structure, scope_idx, slot, value);
                let removed: Vec<TupleIdx> =
                    above.iter().copied().filter(|&t| a.is_allowed(t)).collect();
                if removed.is_empty() {
                    continue;
                }
                let mut d = Direction::from_entries([(unary, 1.0)]);
                for &t in &above {
                    d.add(t, -1.0);
                }
                return Ok(Some(AcViolation {
                    removed,
                    direction: d,
                    witnesses: vec![unary],
                }));
            }
        }
    }
    Ok(None)
}

/// Why a tuple disappeared during an instrumented arc-consistency run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Removal {
    /// Forbidden before the run started (in the outer instance).
    Initial,
    /// Removed by the singleton hypothesis itself.
    Hypothesis,
    /// Removed by propagation; causes recorded.
    Propagated,
}

/// Arc consistency with cause recording, as needed by the singleton test:
/// runs AC on `base - hypothesis` and, on wipe-out, backtracks the causes to
/// the set of initially-forbidden tuples that were necessary. Tuples removed
/// by the hypothesis contribute nothing.
fn ac_closure_witnesses(
    structure: &WcspStructure,
    base: &CspInstance,
    hypothesis: &CspInstance,
) -> Result<Option<CspInstance>> {
    let mut live = base.minus(hypothesis);
    let mut status: HashMap<TupleIdx, Removal> = HashMap::new();
    let mut causes: HashMap<TupleIdx, Vec<TupleIdx>> = HashMap::new();
    for t in 0..structure.tuple_count() {
        if !base.is_allowed(t) {
            status.insert(t, Removal::Initial);
        } else if hypothesis.is_allowed(t) {
            status.insert(t, Removal::Hypothesis);
        }
    }

    let wiped = loop {
        if let Some(s) = live.first_wiped_scope(structure) {
            break s;
        }
        match find_ac_violation(structure, &live)? {
            None => return Ok(None),
            Some(v) => {
                for &t in &v.removed {
                    live.forbid(t);
                    status.insert(t, Removal::Propagated);
                    causes.insert(t, v.witnesses.clone());
                }
            }
        }
    };

    // reverse reachability from the wiped block to the necessary initials
    let mut necessary = CspInstance::empty(structure);
    let mut stack: Vec<TupleIdx> = structure
        .block(wiped)
        .filter(|t| status.get(t) == Some(&Removal::Propagated))
        .collect();
    let mut seen = vec![false; structure.tuple_count()];
    for &t in &stack {
        seen[t] = true;
    }
    while let Some(t) = stack.pop() {
        for &c in causes.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
            match status.get(&c) {
                Some(Removal::Initial) => necessary.allow(c),
                Some(Removal::Propagated) if !seen[c] => {
                    seen[c] = true;
                    stack.push(c);
                }
                _ => {}
            }
        }
    }
    // tuples of the wiped block that were forbidden from the start are part
    // of the proof as well
    for t in structure.block(wiped) {
        if status.get(&t) == Some(&Removal::Initial) {
            necessary.allow(t);
        }
    }
    Ok(Some(necessary))
}

/// Singleton arc consistency step: finds an allowed unary tuple whose
/// restriction has an empty AC closure, reconstructs the minimal witness set
/// by backtracking, and certifies the removal with the generic construction
/// over `T - P` (delta = 1). `None` when the instance is SAC.
pub fn sac_step(structure: &WcspStructure, a: &CspInstance) -> Result<Option<(CspInstance, Direction)>> {
    for var in 0..structure.variable_count() {
        let unary_scope = structure.unary_scope(var)?;
        for value in 0..structure.domain_size(var) {
            let unary = structure.tuple_index(unary_scope, &[value]);
            if !a.is_allowed(unary) {
                continue;
            }
            let mut hypothesis = CspInstance::empty(structure);
            for k in 0..structure.domain_size(var) {
                if k != value {
                    let t = structure.tuple_index(unary_scope, &[k]);
                    if a.is_allowed(t) {
                        hypothesis.allow(t);
                    }
                }
            }
            if let Some(witnesses) = ac_closure_witnesses(structure, a, &hypothesis)? {
                let mut d = Direction::from_entries([(unary, -1.0)]);
                for t in witnesses.iter() {
                    d.add(t, 1.0);
                }
                return Ok(Some((CspInstance::from_tuples(structure, &[unary]), d)));
            }
        }
    }
    Ok(None)
}

/// Cycle consistency step over the given cycle list (binary structures only):
/// finds an allowed unary tuple `({i},k)` and a cycle through `i` that admits
/// no assignment with `x_i = k` over allowed tuples, collecting one blocking
/// forbidden tuple per candidate assignment as the witness set.
pub fn cc_step(
    structure: &WcspStructure,
    a: &CspInstance,
    cycles: &[Vec<Var>],
) -> Result<Option<(CspInstance, Direction)>> {
    for (si, s) in structure.scopes().iter().enumerate() {
        if s.arity() > 2 {
            return Err(Error::NonBinaryStructure { index: si, arity: s.arity() });
        }
    }
    for var in 0..structure.variable_count() {
        let unary_scope = structure.unary_scope(var)?;
        for value in 0..structure.domain_size(var) {
            let unary = structure.tuple_index(unary_scope, &[value]);
            if !a.is_allowed(unary) {
                continue;
            }
            for cycle in cycles.iter().filter(|c| c.contains(&var)) {
                if let Some(witnesses) = cycle_blockers(structure, a, cycle, var, value)? {
                    let mut d = Direction::from_entries([(unary, -1.0)]);
                    for t in witnesses.iter() {
                        d.add(t, 1.0);
                    }
                    return Ok(Some((CspInstance::from_tuples(structure, &[unary]), d)));
                }
            }
        }
    }
    Ok(None)
}

/// If no assignment around `cycle` with `x_var = value` uses only allowed
/// tuples, returns one blocking forbidden tuple per candidate assignment;
/// `None` if some assignment goes through.
fn cycle_blockers(
    structure: &WcspStructure,
    a: &CspInstance,
    cycle: &[Var],
    var: Var,
    value: Value,
) -> Result<Option<CspInstance>> {
    let m = cycle.len();
    let edge_scope = |u: Var, v: Var| -> Option<usize> {
        let key = if u < v { vec![u, v] } else { vec![v, u] };
        structure
            .scopes()
            .iter()
            .position(|s| s.vars() == key.as_slice())
    };
    // every consecutive pair must be an edge of the structure
    let mut edges = Vec::with_capacity(m);
    for i in 0..m {
        let (u, v) = (cycle[i], cycle[(i + 1) % m]);
        match edge_scope(u, v) {
            Some(si) => edges.push(si),
            None => return Err(Error::Invalid(format!("cycle edge {{{u},{v}}} is not a scope"))),
        }
    }

    let pos = cycle.iter().position(|&v| v == var).unwrap();
    let mut blockers = CspInstance::empty(structure);
    let mut values = vec![0usize; m];
    'outer: loop {
        values[pos] = value;
        // first blocking tuple along the cycle: unary tuples, then edges
        let mut blocker = None;
        for (i, &cv) in cycle.iter().enumerate() {
            let t = structure.tuple_index(structure.unary_scope(cv)?, &[values[i]]);
            if !a.is_allowed(t) {
                blocker = Some(t);
                break;
            }
        }
        if blocker.is_none() {
            for (i, &si) in edges.iter().enumerate() {
                let (u, v) = (cycle[i], cycle[(i + 1) % m]);
                let (ku, kv) = (values[i], values[(i + 1) % m]);
                let t = if u < v {
                    structure.tuple_index(si, &[ku, kv])
                } else {
                    structure.tuple_index(si, &[kv, ku])
                };
                if !a.is_allowed(t) {
                    blocker = Some(t);
                    break;
                }
            }
        }
        match blocker {
            None => return Ok(None), // the cycle supports (var, value)
            Some(t) => blockers.allow(t),
        }
        // odometer over the cycle variables, skipping the fixed position
        let mut i = m;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if i == pos {
                continue;
            }
            values[i] += 1;
            if values[i] < structure.domain_size(cycle[i]) {
                continue 'outer;
            }
            values[i] = 0;
        }
    }
    Ok(Some(blockers))
}

/// Applies the configured propagation to `a`, recording every step. Returns
/// the first wiped scope (in declaration order) with the trace, or `None` at
/// the consistency fixpoint.
pub fn propagate(
    structure: &WcspStructure,
    a: &CspInstance,
    cfg: &PropagatorConfig,
) -> Result<(Option<usize>, PropagationTrace)> {
    let mut live = a.clone();
    let mut trace = PropagationTrace::new();
    if let Some(s) = live.first_wiped_scope(structure) {
        trace.wiped_scope = Some(s);
        return Ok((Some(s), trace));
    }
    loop {
        let step = match ac_step(structure, &live)? {
            Some((r, d, _)) => Some((r, d)),
            None => match cfg.mode {
                Mode::Ac => None,
                Mode::SacOverAc => sac_step(structure, &live)?,
                Mode::CcOverAc => cc_step(structure, &live, &cfg.cycles)?,
            },
        };
        match step {
            None => return Ok((None, trace)),
            Some((removed, direction)) => {
                live = live.minus(&removed);
                trace.push(removed, direction)?;
                if let Some(s) = live.first_wiped_scope(structure) {
                    trace.wiped_scope = Some(s);
                    return Ok((Some(s), trace));
                }
            }
        }
    }
}

/// Cycle selection for cycle consistency, driven by the average degree of
/// the constraint graph: all 3- and 4-cycles when sparse, all triangles when
/// denser, and the fundamental cycles of a spanning forest otherwise (or when
/// the dense rules find nothing).
pub fn select_cycles(structure: &WcspStructure) -> Result<Vec<Vec<Var>>> {
    let n = structure.variable_count();
    let mut adj = vec![vec![false; n]; n];
    let mut edges: Vec<(Var, Var)> = Vec::new();
    for (si, s) in structure.scopes().iter().enumerate() {
        match s.arity() {
            1 => {}
            2 => {
                let (u, v) = (s.vars()[0], s.vars()[1]);
                if !adj[u][v] {
                    adj[u][v] = true;
                    adj[v][u] = true;
                    edges.push((u, v));
                }
            }
            arity => return Err(Error::NonBinaryStructure { index: si, arity }),
        }
    }
    if edges.is_empty() {
        return Ok(Vec::new());
    }
    let avg_degree = 2.0 * edges.len() as f64 / n as f64;

    let triangles = |adj: &Vec<Vec<bool>>| -> Vec<Vec<Var>> {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !adj[i][j] {
                    continue;
                }
                for k in j + 1..n {
                    if adj[i][k] && adj[j][k] {
                        out.push(vec![i, j, k]);
                    }
                }
            }
        }
        out
    };

    let mut cycles = Vec::new();
    if avg_degree <= 5.0 {
        cycles = triangles(&adj);
        // all 4-cycles, canonical form: starts at the least vertex, second
        // element smaller than the last
        for i in 0..n {
            for j in i + 1..n {
                if !adj[i][j] {
                    continue;
                }
                for k in i + 1..n {
                    if k == j || !adj[j][k] {
                        continue;
                    }
                    for l in j + 1..n {
                        if l == k || !adj[k][l] || !adj[l][i] {
                            continue;
                        }
                        cycles.push(vec![i, j, k, l]);
                    }
                }
            }
        }
    } else if avg_degree <= 10.0 {
        cycles = triangles(&adj);
    }
    if !cycles.is_empty() {
        return Ok(cycles);
    }

    // fundamental cycles w.r.t. a BFS spanning forest
    let mut parent: Vec<Option<Var>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut tree = vec![vec![false; n]; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if adj[u][v] && !visited[v] {
                    visited[v] = true;
                    parent[v] = Some(u);
                    depth[v] = depth[u] + 1;
                    tree[u][v] = true;
                    tree[v][u] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    for &(u, v) in &edges {
        if tree[u][v] {
            continue;
        }
        // path u..v through the tree
        let (mut x, mut y) = (u, v);
        let mut left = vec![x];
        let mut right = vec![y];
        while depth[x] > depth[y] {
            x = parent[x].unwrap();
            left.push(x);
        }
        while depth[y] > depth[x] {
            y = parent[y].unwrap();
            right.push(y);
        }
        while x != y {
            x = parent[x].unwrap();
            left.push(x);
            y = parent[y].unwrap();
            right.push(y);
        }
        right.pop();
        right.reverse();
        left.extend(right);
        cycles.push(left);
    }
    Ok(cycles)
}

/// An EDAC condition violated by a weight vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdacViolation {
    /// Active unary tuple `({var},value)` has no full support in `supporter`.
    FullSupport { var: Var, value: Value, supporter: Var },
    /// Active unary tuple `({var},value)` has no simple support in `supporter`.
    SimpleSupport { var: Var, value: Value, supporter: Var },
    /// No active value of `var` is fully supported by all neighbours.
    Existential { var: Var },
}

impl std::fmt::Display for EdacViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EdacViolation::FullSupport { var, value, supporter } => write!(
                f,
                "({{{var}}},{value}) is not fully supported by variable {supporter}"
            ),
            EdacViolation::SimpleSupport { var, value, supporter } => write!(
                f,
                "({{{var}}},{value}) is not simply supported by variable {supporter}"
            ),
            EdacViolation::Existential { var } => {
                write!(f, "variable {var} has no fully supported active value")
            }
        }
    }
}

/// Checks existential directional arc consistency of the active-tuple CSP
/// w.r.t. a total order on the variables (`order[r]` is the variable of rank
/// `r`). Binary structures with unary scopes only. Returns all violations in
/// scan order.
pub fn edac_check(
    structure: &WcspStructure,
    f: &crate::model::WeightVector,
    order: &[Var],
) -> Result<(bool, Vec<EdacViolation>)> {
    for (si, s) in structure.scopes().iter().enumerate() {
        if s.arity() > 2 {
            return Err(Error::NonBinaryStructure { index: si, arity: s.arity() });
        }
    }
    let n = structure.variable_count();
    if order.len() != n {
        return Err(Error::Invalid("order must be a permutation of the variables".into()));
    }
    let mut rank = vec![usize::MAX; n];
    for (r, &v) in order.iter().enumerate() {
        if v >= n || rank[v] != usize::MAX {
            return Err(Error::Invalid("order must be a permutation of the variables".into()));
        }
        rank[v] = r;
    }

    let active = crate::model::active_set(structure, f);
    let pair_scope = |u: Var, v: Var| -> Option<usize> {
        let key = if u < v { vec![u, v] } else { vec![v, u] };
        structure.scopes().iter().position(|s| s.vars() == key.as_slice())
    };
    let neighbours = |i: Var| -> Vec<Var> {
        (0..n).filter(|&j| j != i && pair_scope(i, j).is_some()).collect()
    };

    // support of ({i},k) by j: some pair tuple over (k, kj) active, and for a
    // full support the unary end ({j},kj) active as well
    let supported = |i: Var, k: Value, j: Var, full: bool| -> Result<bool> {
        let si = pair_scope(i, j).unwrap();
        let slot_i = structure.scope(si).vars().iter().position(|&v| v == i).unwrap();
        let slot_j = 1 - slot_i;
        let unary_j = structure.unary_scope(j)?;
        for t in structure.block(si) {
            if !active.is_allowed(t) {
                continue;
            }
            let (_, vals) = structure.tuple_values(t);
            if vals[slot_i] != k {
                continue;
            }
            if !full || active.is_allowed(structure.tuple_index(unary_j, &[vals[slot_j]])) {
                return Ok(true);
            }
        }
        Ok(false)
    };

    let mut violations = Vec::new();
    for i in 0..n {
        let unary_i = structure.unary_scope(i)?;
        for k in 0..structure.domain_size(i) {
            if !active.is_allowed(structure.tuple_index(unary_i, &[k])) {
                continue;
            }
            for j in neighbours(i) {
                if rank[i] <= rank[j] {
                    if !supported(i, k, j, true)? {
                        violations.push(EdacViolation::FullSupport { var: i, value: k, supporter: j });
                    }
                } else if !supported(i, k, j, false)? {
                    violations.push(EdacViolation::SimpleSupport { var: i, value: k, supporter: j });
                }
            }
        }
    }
    for i in 0..n {
        let unary_i = structure.unary_scope(i)?;
        let ok = (0..structure.domain_size(i)).any(|k| {
            active.is_allowed(structure.tuple_index(unary_i, &[k]))
                && neighbours(i)
                    .into_iter()
                    .all(|j| supported(i, k, j, true).unwrap_or(false))
        });
        if !ok {
            violations.push(EdacViolation::Existential { var: i });
        }
    }
    Ok((violations.is_empty(), violations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::verify_certificate;
    use crate::model::{active_set, WeightVector};
    use crate::samples;

    /// Active CSP of the walkthrough instance after the EDAC shift; its AC
    /// closure is empty.
    fn edac_point_active_csp() -> (WcspStructure, CspInstance) {
        let (s, f2) = samples::walkthrough_edac();
        let a = active_set(&s, &f2);
        (s, a)
    }

    #[test]
    fn ac_run_on_edac_point_reproduces_the_six_removals() {
        let (s, a) = edac_point_active_csp();
        let (wiped, trace) = propagate(&s, &a, &PropagatorConfig::ac()).unwrap();
        // wipe-out at variable 3 (unary scope index 2)
        assert_eq!(wiped, Some(2));
        let expected: Vec<Vec<usize>> = vec![
            vec![s.tuple_index(3, &[0, 0])], // ({1,2},(a,a))
            vec![s.tuple_index(1, &[0])],    // ({2},a)
            vec![s.tuple_index(4, &[0, 0])], // ({2,3},(a,a))
            vec![s.tuple_index(2, &[0])],    // ({3},a)
            vec![s.tuple_index(5, &[0, 1])], // ({1,3},(a,b))
            vec![s.tuple_index(2, &[1])],    // ({3},b)
        ];
        let got: Vec<Vec<usize>> = trace.steps.iter().map(|st| st.removed.iter().collect()).collect();
        assert_eq!(got, expected);
        // every step certificate lies in the orthogonal space
        for step in &trace.steps {
            for x in s.assignments() {
                assert_eq!(step.direction.evaluate(&s, &x), 0.0);
            }
        }
    }

    #[test]
    fn ac_steps_verify_against_the_live_instance() {
        let (s, a) = edac_point_active_csp();
        let mut live = a.clone();
        while let Some((removed, direction, _)) = ac_step(&s, &live).unwrap() {
            let cert = crate::direction::DeactivatingCertificate {
                removed: removed.clone(),
                direction,
            };
            assert!(verify_certificate(&s, &live, &cert).unwrap());
            live = live.minus(&removed);
            if live.first_wiped_scope(&s).is_some() {
                break;
            }
        }
    }

    #[test]
    fn ac_fixpoint_on_consistent_instance() {
        let s = samples::triangle_structure();
        let a = samples::triangle_active_csp(&s);
        assert!(ac_step(&s, &a).unwrap().is_none());
        let (wiped, trace) = propagate(&s, &a, &PropagatorConfig::ac()).unwrap();
        assert_eq!(wiped, None);
        assert!(trace.is_empty());
    }

    #[test]
    fn sac_step_on_triangle_finds_the_witness_set() {
        let s = samples::triangle_structure();
        let a = samples::triangle_active_csp(&s);
        let (removed, direction) = sac_step(&s, &a).unwrap().expect("triangle is not SAC");
        assert_eq!(removed.iter().collect::<Vec<_>>(), vec![s.tuple_index(0, &[0])]);
        // witness set: ({1,3},(a,a)), ({2,3},(a,b)), ({1,2},(a,b))
        assert_eq!(direction.get(s.tuple_index(0, &[0])), -1.0);
        assert_eq!(direction.get(s.tuple_index(5, &[0, 0])), 1.0);
        assert_eq!(direction.get(s.tuple_index(4, &[0, 1])), 1.0);
        assert_eq!(direction.get(s.tuple_index(3, &[0, 1])), 1.0);
        assert_eq!(direction.nnz(), 4);
        let cert = crate::direction::DeactivatingCertificate { removed, direction };
        assert!(verify_certificate(&s, &a, &cert).unwrap());
    }

    #[test]
    fn sac_absent_on_sac_consistent_instance() {
        let (s, _) = samples::example_two();
        let a = CspInstance::full(&s);
        assert!(sac_step(&s, &a).unwrap().is_none());
    }

    #[test]
    fn sac_over_ac_propagation_wipes_the_triangle() {
        let s = samples::triangle_structure();
        let a = samples::triangle_active_csp(&s);
        let (wiped, trace) = propagate(&s, &a, &PropagatorConfig::sac_over_ac()).unwrap();
        assert!(wiped.is_some());
        assert!(!trace.is_empty());
        // first step is the singleton removal; the AC chain follows
        assert_eq!(
            trace.steps[0].removed.iter().collect::<Vec<_>>(),
            vec![s.tuple_index(0, &[0])]
        );
    }

    #[test]
    fn cc_step_requires_binary_structure() {
        let s = WcspStructure::new(
            vec![2, 2, 2],
            vec![
                crate::model::Scope::new(vec![0]).unwrap(),
                crate::model::Scope::new(vec![1]).unwrap(),
                crate::model::Scope::new(vec![2]).unwrap(),
                crate::model::Scope::new(vec![0, 1, 2]).unwrap(),
            ],
        )
        .unwrap();
        let a = CspInstance::full(&s);
        assert!(matches!(
            cc_step(&s, &a, &[vec![0, 1, 2]]),
            Err(Error::NonBinaryStructure { .. })
        ));
    }

    #[test]
    fn cc_step_detects_the_frustrated_four_cycle() {
        let (s, f) = samples::four_cycle();
        let a = active_set(&s, &f);
        // arc consistency alone cannot tell the cycle is infeasible
        assert!(ac_step(&s, &a).unwrap().is_none());
        let cycles = vec![vec![0, 1, 2, 3]];
        let (removed, direction) = cc_step(&s, &a, &cycles).unwrap().expect("cycle violation");
        assert_eq!(removed.iter().collect::<Vec<_>>(), vec![s.tuple_index(0, &[0])]);
        let cert = crate::direction::DeactivatingCertificate { removed, direction };
        assert!(verify_certificate(&s, &a, &cert).unwrap());
    }

    #[test]
    fn cc_absent_on_supported_triangle() {
        let s = samples::triangle_structure();
        let a = CspInstance::full(&s);
        assert!(cc_step(&s, &a, &[vec![0, 1, 2]]).unwrap().is_none());
    }

    #[test]
    fn select_cycles_sparse_graph_lists_the_four_cycle() {
        let (s, _) = samples::four_cycle();
        let cycles = select_cycles(&s).unwrap();
        assert_eq!(cycles, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn select_cycles_on_complete_graph_of_five() {
        let mut scopes: Vec<crate::model::Scope> =
            (0..5).map(|v| crate::model::Scope::new(vec![v]).unwrap()).collect();
        for i in 0..5 {
            for j in i + 1..5 {
                scopes.push(crate::model::Scope::new(vec![i, j]).unwrap());
            }
        }
        let s = WcspStructure::new(vec![2; 5], scopes).unwrap();
        let cycles = select_cycles(&s).unwrap();
        let triangles = cycles.iter().filter(|c| c.len() == 3).count();
        let quads = cycles.iter().filter(|c| c.len() == 4).count();
        assert_eq!(triangles, 10); // C(5,3)
        assert_eq!(quads, 15); // C(5,4) * 3
    }

    #[test]
    fn select_cycles_dense_graph_falls_back_to_fundamental_cycles() {
        // complete graph on 12 nodes: average degree 11 > 10
        let n = 12;
        let mut scopes: Vec<crate::model::Scope> =
            (0..n).map(|v| crate::model::Scope::new(vec![v]).unwrap()).collect();
        let mut edge_count = 0;
        for i in 0..n {
            for j in i + 1..n {
                scopes.push(crate::model::Scope::new(vec![i, j]).unwrap());
                edge_count += 1;
            }
        }
        let s = WcspStructure::new(vec![2; n], scopes).unwrap();
        let cycles = select_cycles(&s).unwrap();
        assert_eq!(cycles.len(), edge_count - (n - 1));
    }

    #[test]
    fn select_cycles_empty_graph() {
        let s = WcspStructure::new(vec![2], vec![crate::model::Scope::new(vec![0]).unwrap()]).unwrap();
        assert!(select_cycles(&s).unwrap().is_empty());
    }

    #[test]
    fn edac_walkthrough_violation_and_fix() {
        let (s, f1) = samples::walkthrough_initial();
        let order: Vec<usize> = (0..3).collect();
        let (ok, violations) = edac_check(&s, &f1, &order).unwrap();
        assert!(!ok);
        // the first reported violation: ({1},b) has no full support in variable 2
        assert_eq!(
            violations[0],
            EdacViolation::FullSupport { var: 0, value: 1, supporter: 1 }
        );
        assert_eq!(
            violations[0].to_string(),
            "({0},1) is not fully supported by variable 1"
        );

        let (s2, f2) = samples::walkthrough_edac();
        let (ok, violations) = edac_check(&s2, &f2, &order).unwrap();
        assert!(ok, "unexpected violations: {violations:?}");
    }

    #[test]
    fn edac_depends_on_the_variable_order() {
        let (s, f2) = samples::walkthrough_edac();
        // EDAC under the natural order, but reversing it breaks the full
        // support of ({2},a): variable 1 now ranks above it and offers no
        // active unary end
        let (ok, _) = edac_check(&s, &f2, &[0, 1, 2]).unwrap();
        assert!(ok);
        let (ok, violations) = edac_check(&s, &f2, &[2, 1, 0]).unwrap();
        assert!(!ok);
        assert_eq!(
            violations[0],
            EdacViolation::FullSupport { var: 1, value: 0, supporter: 0 }
        );
    }

    #[test]
    fn edac_constant_weights_hold() {
        let s = samples::triangle_structure();
        let f = WeightVector::from_vec(&s, vec![1.0; s.tuple_count()]).unwrap();
        let order: Vec<usize> = (0..3).collect();
        let (ok, _) = edac_check(&s, &f, &order).unwrap();
        assert!(ok);
    }

    #[test]
    fn edac_rejects_non_binary_and_bad_orders() {
        let s = WcspStructure::new(
            vec![2, 2, 2],
            vec![
                crate::model::Scope::new(vec![0]).unwrap(),
                crate::model::Scope::new(vec![1]).unwrap(),
                crate::model::Scope::new(vec![2]).unwrap(),
                crate::model::Scope::new(vec![0, 1, 2]).unwrap(),
            ],
        )
        .unwrap();
        let f = WeightVector::zeros(&s);
        assert!(matches!(
            edac_check(&s, &f, &[0, 1, 2]),
            Err(Error::NonBinaryStructure { .. })
        ));
        let (s2, f2) = samples::example_two();
        assert!(edac_check(&s2, &f2, &[0, 0]).is_err());
        assert!(edac_check(&s2, &f2, &[0]).is_err());
    }

    #[test]
    fn propagate_reports_born_wiped_instances() {
        let (s, _) = samples::example_two();
        let mut a = CspInstance::full(&s);
        for t in s.block(1) {
            a.forbid(t);
        }
        let (wiped, trace) = propagate(&s, &a, &PropagatorConfig::ac()).unwrap();
        assert_eq!(wiped, Some(1));
        assert!(trace.is_empty());
    }
}
