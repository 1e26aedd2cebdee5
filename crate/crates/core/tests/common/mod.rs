//! Brute-force oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use coopdesign::cli::reference::reference_environment;
use coopdesign::equilibrium::CooperationOutcome;
use coopdesign::reactive_design::design::chain_model;
use coopdesign::reactive_design::{cycle_chain, full_cooperation_feasible, steady_state, Task};
use coopdesign::scalar::{Rational, Scalar, Tolerance};
use coopdesign::stage_games::GamePrimitives;
use coopdesign::static_assignment::TaskEnvironment;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

pub fn reference<S: Scalar>() -> TaskEnvironment<S> {
    reference_environment().to_env().unwrap()
}

/// Enumerates every set of cooperated games, keeps those in which each
/// member's temptation is covered by the discounted stream of the whole set,
/// and returns the feasible set with the largest per-period benefit.
pub fn outcome_oracle(
    delta: &Rational,
    p_good: &Rational,
    p_bad: &Rational,
    good: &GamePrimitives<Rational>,
    bad: &GamePrimitives<Rational>,
) -> CooperationOutcome {
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    let mut best: Option<((bool, bool), Rational, usize)> = None;
    for set in [(false, false), (true, false), (false, true), (true, true)] {
        // Games that never arrive cannot be cooperated in.
        if (set.0 && *p_good == zero) || (set.1 && *p_bad == zero) {
            continue;
        }
        let mut flow = zero.clone();
        if set.0 {
            flow += p_good * &good.c;
        }
        if set.1 {
            flow += p_bad * &bad.c;
        }
        // Value of staying on path relative to permanent non-cooperation.
        let value = &flow / (&one - delta);
        let ok = |member: bool, d: &Rational| !member || *d <= delta * &value;
        if !(ok(set.0, &good.d) && ok(set.1, &bad.d)) {
            continue;
        }
        let size = set.0 as usize + set.1 as usize;
        let better = match &best {
            None => true,
            Some((_, f, s)) => flow > *f || (flow == *f && size > *s),
        };
        if better {
            best = Some((set, flow, size));
        }
    }
    let ((g, b), _, _) = best.expect("the empty set is always feasible");
    CooperationOutcome::from_flags(g, b)
}

/// Cooperation pattern of a constant assignment, from the oracle.
fn arm_outcome(env: &TaskEnvironment<Rational>, nu: &Rational, r: &Rational) -> CooperationOutcome {
    let one = rat(1, 1);
    let delta = (&one - r) * &env.delta;
    let pg = nu * &env.a_good;
    let pb = (&one - nu) * &env.a_bad;
    outcome_oracle(&delta, &pg, &pb, &env.good, &env.bad)
}

fn arm_value(env: &TaskEnvironment<Rational>, nu: &Rational, outcome: CooperationOutcome) -> Rational {
    let one = rat(1, 1);
    let mut v = rat(0, 1);
    if outcome.cooperates_good() {
        v += nu * &env.a_good * &env.v_good;
    }
    if outcome.cooperates_bad() {
        v += (&one - nu) * &env.a_bad * &env.v_bad;
    }
    v
}

/// Best balanced structure with at most two constant assignments on the
/// grid `ν ∈ {0, 1/steps, …, 1}`, `r ∈ {0, 1}`.
pub fn static_grid_best(env: &TaskEnvironment<Rational>, steps: i64) -> (Rational, String) {
    let mut arms = Vec::new();
    for i in 0..=steps {
        let nu = rat(i, steps);
        for r in [rat(0, 1), rat(1, 1)] {
            let o = arm_outcome(env, &nu, &r);
            arms.push((nu.clone(), r, arm_value(env, &nu, o)));
        }
    }
    let mut best = (rat(0, 1), String::from("none"));
    let mut first = true;
    for a in &arms {
        for b in &arms {
            let value = if a.0 == b.0 {
                if a.0 != env.q_good {
                    continue;
                }
                a.2.clone()
            } else {
                // mass·ν_a + (1 − mass)·ν_b = q_G
                let mass = (&env.q_good - &b.0) / (&a.0 - &b.0);
                if mass < rat(0, 1) || mass > rat(1, 1) {
                    continue;
                }
                &mass * &a.2 + (rat(1, 1) - &mass) * &b.2
            };
            if first || value > best.0 {
                best = (value, format!("nu {} r {} / nu {} r {}", a.0, a.1, b.0, b.1));
                first = false;
            }
        }
    }
    best
}

/// Lowest bad-task share over fully cooperative cycle chains with
/// `N_B ≤ max_nb` and `x` on a grid of `1/x_steps`.
pub fn reactive_grid_min(
    env: &TaskEnvironment<f64>,
    observe_good: bool,
    max_nb: u64,
    x_steps: u32,
    tol: Tolerance,
) -> Option<(u64, f64, f64)> {
    let model = chain_model(env);
    let mut best: Option<(u64, f64, f64)> = None;
    for nb in 0..=max_nb {
        for i in 0..x_steps {
            let x = i as f64 / x_steps as f64;
            let Ok(chain) = cycle_chain(observe_good, nb, x) else { continue };
            let feasible = full_cooperation_feasible(&chain, &model, tol).unwrap().feasible;
            if !feasible {
                continue;
            }
            let steady = steady_state(&chain, &model.arrivals).unwrap();
            let share: f64 = chain
                .states
                .iter()
                .zip(&steady)
                .filter(|(s, _)| s.task == Task::Bad)
                .map(|(_, p)| p)
                .sum();
            if best.is_none_or(|b| share < b.2) {
                best = Some((nb, x, share));
            }
        }
    }
    best
}

/// Oracle grid for the `(p_G, p_B, δ)` sweep: 20 levels of `p_G`, 20 levels
/// of the share of the remaining probability given to `p_B`, five discount
/// factors.
pub fn lemma_grid() -> Vec<(Rational, Rational, Rational)> {
    let deltas = [rat(3, 10), rat(1, 2), rat(3, 5), rat(4, 5), rat(9, 10)];
    let mut cells = Vec::new();
    for i in 0..20 {
        let pg = rat(2 * i + 1, 40);
        for j in 0..20 {
            let pb = (rat(1, 1) - &pg) * rat(2 * j + 1, 40);
            for d in &deltas {
                cells.push((pg.clone(), pb.clone(), d.clone()));
            }
        }
    }
    cells
}
