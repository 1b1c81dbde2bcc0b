//! Small built-in instances used by the tests, docs and CLI demos.
//!
//! Values are indices into each variable's domain; for two-valued domains the
//! comments call them `a` (0) and `b` (1).

use crate::csp::CspInstance;
use crate::model::{Scope, WcspStructure, WeightVector};

fn structure(doms: Vec<usize>, scopes: Vec<Vec<usize>>) -> WcspStructure {
    let scopes = scopes.into_iter().map(|v| Scope::new(v).unwrap()).collect();
    WcspStructure::new(doms, scopes).unwrap()
}

/// Two variables, domains {a,b}, scopes {1},{2},{1,2}; weights
/// (3,4,6,2,-2,-4,1,1) in table order. `B = 11`, optimum 11 at (b,a).
pub fn example_two() -> (WcspStructure, WeightVector) {
    let s = structure(vec![2, 2], vec![vec![0], vec![1], vec![0, 1]]);
    let f = WeightVector::from_vec(&s, vec![3.0, 4.0, 6.0, 2.0, -2.0, -4.0, 1.0, 1.0]).unwrap();
    (s, f)
}

/// A pair `(g, f)` on the two-variable structure where `f` is a
/// super-reparametrization of `g` with `B(f) = 11 < B(g) = 12` while the
/// optima are 8 (at (a,a)) and 11 (at (b,b)): bounds may improve even though
/// objective values grow.
pub fn dominated_pair() -> (WcspStructure, WeightVector, WeightVector) {
    let s = structure(vec![2, 2], vec![vec![0], vec![1], vec![0, 1]]);
    let g = WeightVector::from_vec(&s, vec![3.0, 0.0, 4.0, 1.0, 1.0, 2.0, 0.0, 5.0]).unwrap();
    let f = WeightVector::from_vec(&s, vec![3.0, 4.0, 2.0, 2.0, 4.0, 2.0, 0.0, 5.0]).unwrap();
    (s, g, f)
}

/// The three-variable structure with all unary scopes and all three pair
/// scopes, domains {a,b}: scopes {1},{2},{3},{1,2},{2,3},{1,3}.
pub fn triangle_structure() -> WcspStructure {
    structure(
        vec![2, 2, 2],
        vec![vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2], vec![0, 2]],
    )
}

/// The frustrated-triangle CSP: equality on {1,2} and {2,3}, inequality on
/// {1,3}, all unary tuples allowed. Arc consistent but unsatisfiable.
pub fn triangle_active_csp(s: &WcspStructure) -> CspInstance {
    CspInstance::from_tuples(
        s,
        &[
            s.tuple_index(0, &[0]),
            s.tuple_index(0, &[1]),
            s.tuple_index(1, &[0]),
            s.tuple_index(1, &[1]),
            s.tuple_index(2, &[0]),
            s.tuple_index(2, &[1]),
            s.tuple_index(3, &[0, 0]),
            s.tuple_index(3, &[1, 1]),
            s.tuple_index(4, &[0, 0]),
            s.tuple_index(4, &[1, 1]),
            s.tuple_index(5, &[0, 1]),
            s.tuple_index(5, &[1, 0]),
        ],
    )
}

/// The walkthrough instance: a triangle WCSP with `B = 49` and optimum 43 at
/// (a,a,a). Not EDAC under the natural order: ({1},b) lacks a full support in
/// variable 2.
pub fn walkthrough_initial() -> (WcspStructure, WeightVector) {
    let s = triangle_structure();
    let f = WeightVector::from_vec(
        &s,
        vec![
            3.0, 5.0, // {1}
            7.0, 6.0, // {2}
            2.0, 2.0, // {3}
            11.0, 8.0, 5.0, 12.0, // {1,2}: aa ab ba bb
            13.0, 9.0, 7.0, 13.0, // {2,3}
            7.0, 10.0, 10.0, 4.0, // {1,3}
        ],
    )
    .unwrap();
    (s, f)
}

/// The walkthrough instance after the one-unit shift from ({2},a) into the
/// {1,2} weight function: EDAC but not virtually arc consistent, `B = 48`.
pub fn walkthrough_edac() -> (WcspStructure, WeightVector) {
    let (s, f1) = walkthrough_initial();
    let mut w = f1.0;
    w[s.tuple_index(1, &[0])] -= 1.0;
    w[s.tuple_index(3, &[0, 0])] += 1.0;
    w[s.tuple_index(3, &[1, 0])] += 1.0;
    (s, WeightVector(w))
}

/// A reparametrization of the walkthrough instance that is virtually arc
/// consistent with `B = 47`; its active CSP is the frustrated triangle.
pub fn walkthrough_vac() -> (WcspStructure, WeightVector) {
    let s = triangle_structure();
    let f = WeightVector::from_vec(
        &s,
        vec![
            4.0, 4.0, // {1}
            5.0, 5.0, // {2}
            6.0, 6.0, // {3}
            10.0, 5.0, 5.0, 10.0, // {1,2}
            11.0, 6.0, 6.0, 11.0, // {2,3}
            7.0, 11.0, 11.0, 6.0, // {1,3}
        ],
    )
    .unwrap();
    (s, f)
}

/// A frustrated four-cycle: equality pulls on three edges, inequality on the
/// closing edge. `B = 4`, optimum 3; the active CSP is unsatisfiable but arc
/// and singleton-arc consistent, so only cycle consistency improves it.
pub fn four_cycle() -> (WcspStructure, WeightVector) {
    let s = structure(
        vec![2, 2, 2, 2],
        vec![
            vec![0],
            vec![1],
            vec![2],
            vec![3],
            vec![0, 1],
            vec![1, 2],
            vec![2, 3],
            vec![0, 3],
        ],
    );
    let eq = [1.0, 0.0, 0.0, 1.0];
    let ne = [0.0, 1.0, 1.0, 0.0];
    let mut w = vec![0.0; s.tuple_count()];
    for (si, pat) in [(4, eq), (5, eq), (6, eq), (7, ne)] {
        for (off, t) in s.block(si).enumerate() {
            w[t] = pat[off];
        }
    }
    let f = WeightVector::from_vec(&s, w).unwrap();
    (s, f)
}

/// A triangle WCSP whose optimal assignments are the three one-`b`
/// rotations; that set is not the solution set of any CSP over the
/// structure, so every optimal super-reparametrization strictly enlarges it.
pub fn rotation_triangle() -> (WcspStructure, WeightVector) {
    let s = triangle_structure();
    let pair = [1.0, 2.0, 2.0, 0.0]; // aa ab ba bb
    let mut w = vec![0.0; s.tuple_count()];
    for si in 3..6 {
        for (off, t) in s.block(si).enumerate() {
            w[t] = pair[off];
        }
    }
    let f = WeightVector::from_vec(&s, w).unwrap();
    (s, f)
}

/// An infeasible hard-constrained instance: each scope keeps one finite
/// weight, yet every assignment evaluates to minus infinity.
pub fn infeasible_hard() -> (WcspStructure, WeightVector) {
    let s = structure(vec![2, 2], vec![vec![0], vec![1], vec![0, 1]]);
    let ninf = f64::NEG_INFINITY;
    let f = WeightVector::from_vec(&s, vec![0.0, ninf, 0.0, ninf, ninf, ninf, ninf, 0.0]).unwrap();
    (s, f)
}

/// A feasible hard-constrained instance with optimum 0 at (a,a).
pub fn feasible_hard() -> (WcspStructure, WeightVector) {
    let s = structure(vec![2, 2], vec![vec![0], vec![1], vec![0, 1]]);
    let ninf = f64::NEG_INFINITY;
    let f = WeightVector::from_vec(&s, vec![0.0, -1.0, 0.0, -2.0, 0.0, ninf, ninf, ninf]).unwrap();
    (s, f)
}
