//! Property-based checks of the structural invariants, backed by the
//! exhaustive oracle at desk scale.

mod common;

use proptest::prelude::*;

use wcsp_bound::propagate::PropagatorConfig;
use wcsp_bound::solver::{SolverConfig, SolverMode};
use wcsp_bound::{
    ac_step, active_set, compose_pair, compose_trace, evaluate, generic_direction, indicator,
    in_orthogonal_space, minimal_csp, positive_consistency_closure, propagate, solutions, solve,
    theta_active_set, upper_bound, verify_certificate, CspInstance, WeightVector,
};

/// Seed-driven scenario: structure plus integer weights.
fn weighted_instance(seed: u64) -> (wcsp_bound::WcspStructure, WeightVector) {
    let mut rng = common::rng(seed);
    let s = common::random_structure(&mut rng, 5, 3, true);
    let w = common::random_weights(&mut rng, &s, -5, 7);
    (s, w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bound_dominates_every_assignment(seed in any::<u64>()) {
        let (s, f) = weighted_instance(seed);
        let b = upper_bound(&s, &f);
        for x in s.assignments() {
            prop_assert!(b >= evaluate(&s, &f, &x));
        }
    }

    #[test]
    fn bound_is_tight_exactly_on_active_solutions(seed in any::<u64>()) {
        let (s, f) = weighted_instance(seed);
        let b = upper_bound(&s, &f);
        let a = active_set(&s, &f);
        for x in s.assignments() {
            let tight = (b - evaluate(&s, &f, &x)).abs() <= 1e-9;
            prop_assert_eq!(tight, a.admits(&s, &x));
        }
    }

    #[test]
    fn theta_active_sets_grow_with_theta(seed in any::<u64>(), t1 in 0.0f64..5.0, t2 in 0.0f64..5.0) {
        let (s, f) = weighted_instance(seed);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let small = theta_active_set(&s, &f, lo);
        let large = theta_active_set(&s, &f, hi);
        prop_assert!(large.contains_all(&small));
    }

    #[test]
    fn indicator_uses_one_tuple_per_scope(seed in any::<u64>()) {
        let (s, _) = weighted_instance(seed);
        for x in s.assignments() {
            let phi = indicator(&s, &x);
            for si in 0..s.scope_count() {
                prop_assert_eq!(s.block(si).map(|t| phi[t] as u32).sum::<u32>(), 1);
            }
        }
    }

    #[test]
    fn evaluation_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        let (s, f) = weighted_instance(seed);
        let mut rng = common::rng(seed ^ 0xabcd);
        let d = common::random_weights(&mut rng, &s, -3, 3);
        let mixed: Vec<f64> = f.0.iter().zip(&d.0).map(|(a, b)| a + alpha * b).collect();
        let mixed = WeightVector::from_vec(&s, mixed).unwrap();
        for x in s.assignments() {
            let lhs = evaluate(&s, &mixed, &x);
            let rhs = evaluate(&s, &f, &x) + alpha * evaluate(&s, &d, &x);
            prop_assert!((lhs - rhs).abs() <= 1e-9);
        }
    }

    #[test]
    fn solutions_preserve_intersections_and_isotony(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::random_structure(&mut rng, 4, 3, true);
        let a1 = common::random_csp(&mut rng, &s, 0.7);
        let a2 = common::random_csp(&mut rng, &s, 0.7);
        let sol1 = solutions(&s, &a1).unwrap();
        let sol2 = solutions(&s, &a2).unwrap();
        let sol_cap = solutions(&s, &a1.intersection(&a2)).unwrap();
        for x in s.assignments() {
            prop_assert_eq!(sol_cap.contains(&x), sol1.contains(&x) && sol2.contains(&x));
        }
        let sol_union_sup = solutions(&s, &a1.union(&a2)).unwrap();
        for x in &sol1.assignments {
            prop_assert!(sol_union_sup.contains(x));
        }
    }

    #[test]
    fn galois_connection_on_random_instances(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::random_structure(&mut rng, 4, 2, false);
        let a = common::random_csp(&mut rng, &s, 0.65);
        let sol_a = solutions(&s, &a).unwrap();
        // X drawn from the solutions of another random instance
        let x_src = common::random_csp(&mut rng, &s, 0.75);
        let x = solutions(&s, &x_src).unwrap();
        let lhs = a.contains_all(&minimal_csp(&s, &x));
        let rhs = x.assignments.iter().all(|xx| sol_a.contains(xx));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn closure_laws(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::random_structure(&mut rng, 4, 3, false);
        let a = common::random_csp(&mut rng, &s, 0.7);
        let c = positive_consistency_closure(&s, &a).unwrap();
        prop_assert!(a.contains_all(&c));
        prop_assert_eq!(positive_consistency_closure(&s, &c).unwrap(), c.clone());
        prop_assert_eq!(solutions(&s, &a).unwrap(), solutions(&s, &c).unwrap());
        // minimal o solutions o minimal = minimal on representable sets
        let x = solutions(&s, &a).unwrap();
        let m = minimal_csp(&s, &x);
        let m2 = minimal_csp(&s, &solutions(&s, &m).unwrap());
        prop_assert_eq!(m, m2);
    }

    #[test]
    fn deactivating_roundtrip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::random_structure(&mut rng, 4, 3, false);
        let a = common::random_csp(&mut rng, &s, 0.8);
        let sols = solutions(&s, &a).unwrap();
        let removable = a.minus(&minimal_csp(&s, &sols));
        prop_assume!(!removable.is_empty());
        // soundness of the construction
        let cert = generic_direction(&s, &a, &removable).unwrap();
        prop_assert!(verify_certificate(&s, &a, &cert).unwrap());
        // and any verified certificate preserves the solution set
        prop_assert_eq!(sols, solutions(&s, &a.minus(&removable)).unwrap());
    }

    #[test]
    fn composing_a_full_trace_matches_pairwise_folding(seed in any::<u64>()) {
        let (s, f) = weighted_instance(seed);
        let a = active_set(&s, &f);
        let (_, trace) = propagate(&s, &a, &PropagatorConfig::sac_over_ac()).unwrap();
        prop_assume!(trace.len() >= 2);
        let all: Vec<usize> = (0..trace.len()).collect();
        let composed = compose_trace(&trace, &all).unwrap();
        let mut folded = trace.steps.last().unwrap().direction.clone();
        for step in trace.steps.iter().rev().skip(1) {
            folded = compose_pair(&step.direction, &step.removed, &folded);
        }
        prop_assert_eq!(composed.direction, folded);
        prop_assert_eq!(composed.removed, trace.all_removed(&s));
    }

    #[test]
    fn chosen_steps_suffice_to_empty_the_wiped_scope(seed in any::<u64>()) {
        let (s, f) = weighted_instance(seed);
        let a = active_set(&s, &f);
        let (wiped, trace) = propagate(&s, &a, &PropagatorConfig::sac_over_ac()).unwrap();
        prop_assume!(wiped.is_some());
        let scope = wiped.unwrap();
        let chosen = wcsp_bound::chosen_indices(&s, &trace, scope).unwrap();
        let mut removed = CspInstance::empty(&s);
        for &i in &chosen {
            removed = removed.union(&trace.steps[i].removed);
        }
        prop_assert!(a.minus(&removed).block_is_empty(&s, scope));
    }

    #[test]
    fn propagation_preserves_solutions(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::random_structure(&mut rng, 4, 3, true);
        let a = common::random_csp(&mut rng, &s, 0.75);
        prop_assume!(a.first_wiped_scope(&s).is_none());
        let (_, trace) = propagate(&s, &a, &PropagatorConfig::sac_over_ac()).unwrap();
        let after = a.minus(&trace.all_removed(&s));
        prop_assert_eq!(solutions(&s, &a).unwrap(), solutions(&s, &after).unwrap());
    }

    #[test]
    fn ac_steps_have_zero_objective(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::random_structure(&mut rng, 4, 3, true);
        let mut live = common::random_csp(&mut rng, &s, 0.7);
        prop_assume!(live.first_wiped_scope(&s).is_none());
        while let Some((removed, direction, _)) = ac_step(&s, &live).unwrap() {
            prop_assert!(in_orthogonal_space(&s, &direction).unwrap());
            live = live.minus(&removed);
            if live.first_wiped_scope(&s).is_some() {
                break;
            }
        }
    }

    #[test]
    fn sac_fires_only_at_ac_fixpoints(seed in any::<u64>()) {
        let (s, f) = weighted_instance(seed);
        let a = active_set(&s, &f);
        let (_, trace) = propagate(&s, &a, &PropagatorConfig::sac_over_ac()).unwrap();
        let mut live = a.clone();
        for step in &trace.steps {
            let orthogonal = in_orthogonal_space(&s, &step.direction).unwrap();
            if !orthogonal {
                // singleton step: arc consistency must have been exhausted
                prop_assert!(ac_step(&s, &live).unwrap().is_none());
            }
            live = live.minus(&step.removed);
        }
    }

    #[test]
    fn iterates_are_sandwiched(seed in any::<u64>()) {
        let (s, g) = weighted_instance(seed);
        let mut cfg = SolverConfig::new(SolverMode::VsacSr);
        cfg.record_iterates = true;
        let report = solve(&s, &g, &cfg).unwrap();
        let optimum = s
            .assignments()
            .map(|x| evaluate(&s, &g, &x))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut prev_max = optimum;
        for f in &report.iterates {
            let cur_max = s
                .assignments()
                .map(|x| evaluate(&s, f, &x))
                .fold(f64::NEG_INFINITY, f64::max);
            // objective maxima never decrease along the run and stay
            // bracketed by the bound
            prop_assert!(cur_max >= prev_max - 1e-9);
            prop_assert!(upper_bound(&s, f) >= cur_max - 1e-9);
            prop_assert!(cur_max >= optimum - 1e-9);
            prev_max = cur_max;
        }
        prop_assert!(report.final_bound >= optimum - 1e-9);
    }

    #[test]
    fn native_parser_never_panics(doc in "\\PC*") {
        let _ = wcsp_bound::io::parse_native(&doc);
    }

    #[test]
    fn cfn_parser_never_panics(doc in "\\PC*") {
        let _ = wcsp_bound::io::parse_wcsp_file(&doc);
    }

    #[test]
    fn native_roundtrip_is_lossless(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::random_structure(&mut rng, 5, 3, true);
        let f = common::random_hard_weights(&mut rng, &s);
        let text = wcsp_bound::io::emit_native(&s, &f);
        let (s2, f2) = wcsp_bound::io::parse_native(&text).unwrap();
        prop_assert_eq!(s, s2);
        prop_assert_eq!(f, f2);
    }
}

/// Random benchmark-format documents agree with the minimization convention:
/// the maximization optimum is the negated minimal cost.
#[test]
fn cfn_convention_matches_min_cost() {
    let mut rng = common::rng(0xc0de);
    for _ in 0..50 {
        use rand::Rng;
        let n = rng.gen_range(2..=4usize);
        let doms: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
        let mut body = String::new();
        let mut fns = 0;
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.7) {
                    body.push_str(&format!("2 {i} {j} {} 0\n", rng.gen_range(0..=4)));
                    fns += 1;
                }
            }
        }
        for i in 0..n {
            body.push_str(&format!("1 {i} 0 1\n0 {}\n", rng.gen_range(0..=3)));
            fns += 1;
        }
        let text = format!(
            "rand {n} {} {fns} 1000\n{}\n{body}",
            doms.iter().max().unwrap(),
            doms.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
        );
        let (s, f) = wcsp_bound::io::parse_wcsp_file(&text).unwrap();
        let max_weight = s
            .assignments()
            .map(|x| evaluate(&s, &f, &x))
            .fold(f64::NEG_INFINITY, f64::max);
        // recompute the minimal cost directly from the negated weights
        let min_cost = s
            .assignments()
            .map(|x| -evaluate(&s, &f, &x))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(max_weight, -min_cost);
    }
}

/// Restricting the frustrated triangle to either value of its first variable
/// leaves an instance whose arc-consistency closure is empty.
#[test]
fn triangle_restrictions_have_empty_ac_closure() {
    let s = wcsp_bound::samples::triangle_structure();
    let a = wcsp_bound::samples::triangle_active_csp(&s);
    for value in 0..2 {
        let restricted = wcsp_bound::restrict_csp(&s, &a, 0, value).unwrap();
        let (wiped, _) = propagate(&s, &restricted, &PropagatorConfig::ac()).unwrap();
        assert!(wiped.is_some(), "restriction x0={value} should wipe out");
    }
}

/// An empty tuple set admits no certificate; full instances with no removable
/// tuples are handled by the propagators without emitting anything.
#[test]
fn propagation_on_full_instances_is_a_fixpoint() {
    let mut rng = common::rng(0xf00d);
    for _ in 0..20 {
        let s = common::random_structure(&mut rng, 4, 3, true);
        let full = CspInstance::full(&s);
        let (wiped, trace) = propagate(&s, &full, &PropagatorConfig::sac_over_ac()).unwrap();
        assert_eq!(wiped, None);
        assert!(trace.is_empty());
    }
}

/// A mid-scale instance (16 two-valued variables) still at oracle scale:
/// the bound dominates the exact optimum in every mode.
#[test]
fn midscale_bound_dominates_the_exact_optimum() {
    use rand::Rng;
    let mut rng = common::rng(0x1d16);
    let n = 16;
    let mut scopes: Vec<wcsp_bound::Scope> =
        (0..n).map(|v| wcsp_bound::Scope::new(vec![v]).unwrap()).collect();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.25) {
                scopes.push(wcsp_bound::Scope::new(vec![i, j]).unwrap());
            }
        }
    }
    let s = wcsp_bound::WcspStructure::new(vec![2; n], scopes).unwrap();
    let weights: Vec<f64> = (0..s.tuple_count()).map(|_| rng.gen_range(-3..=5) as f64).collect();
    let g = WeightVector::from_vec(&s, weights).unwrap();
    let (opt, _) = wcsp_bound::brute_force_optimum(&s, &g).unwrap();
    for mode in [SolverMode::Vac, SolverMode::VsacSr, SolverMode::VccSr] {
        let report = solve(&s, &g, &SolverConfig::new(mode)).unwrap();
        assert!(report.final_bound >= opt - 1e-9, "{mode:?} undercut the optimum");
        assert!(report.final_bound <= upper_bound(&s, &g) + 1e-9);
    }
}
