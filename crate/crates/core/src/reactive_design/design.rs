//! Designer-optimal reactive assignments.
//!
//! A team sits on `t_G` until a trigger, then serves `N_B` bad-task periods
//! and one more with probability `x`. With observable good games the trigger
//! is a good game; otherwise it is simply one period on `t_G`. The bad dwell
//! is the shortest that keeps players exactly indifferent in the good game.

use serde::{Deserialize, Serialize};

use super::chain::{
    full_cooperation_feasible, solve_values, Arrivals, AssignmentChain, ChainModel, ChainSolution, ChainState,
    Task,
};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerance};
use crate::stage_games::GameLabel;
use crate::static_assignment::TaskEnvironment;

const MAX_DWELL: u64 = 1_000_000;

/// Rejects environments outside the regime the designers characterise.
pub fn check_premises<S: Scalar>(env: &TaskEnvironment<S>, tol: Tolerance) -> Result<()> {
    env.validate()?;
    let w = env.weight();
    let good_stream = w.clone() * env.a_good.clone() * env.good.c.clone();
    let bad_stream = w * env.a_bad.clone() * env.bad.c.clone();
    if !tol.lt(&good_stream, &env.good.d) {
        return Err(Error::premise(
            "d_G > δ/(1−δ)·a_G·c_G",
            env.good.d.to_f64(),
            good_stream.to_f64(),
        ));
    }
    let max_d = env.max_temptation();
    if !tol.lt(&max_d, &bad_stream) {
        return Err(Error::premise(
            "max(d_G, d_B) < δ/(1−δ)·a_B·c_B",
            max_d.to_f64(),
            bad_stream.to_f64(),
        ));
    }
    if !tol.lt(&env.bad.d, &good_stream) {
        return Err(Error::premise(
            "d_B < δ/(1−δ)·a_G·c_G",
            env.bad.d.to_f64(),
            good_stream.to_f64(),
        ));
    }
    Ok(())
}

/// Trigger, `nb` bad phases, then an extra bad phase with probability `x`.
pub fn cycle_chain<S: Scalar>(observe_good: bool, nb: u64, x: S) -> Result<AssignmentChain<S>> {
    if x < S::zero() || x >= S::one() {
        return Err(Error::invalid(format!("extra-period probability {x} outside [0, 1)")));
    }
    let nb = usize::try_from(nb).map_err(|_| Error::invalid("bad dwell too long"))?;
    let extra = nb + 1;
    let has_extra = !x.is_zero();
    let tail = |x: &S| -> Vec<(usize, S)> {
        if has_extra {
            vec![(extra, x.clone()), (0, S::one() - x.clone())]
        } else {
            vec![(0, S::one())]
        }
    };
    let after_trigger = if nb > 0 { vec![(1, S::one())] } else { tail(&x) };
    let good = if observe_good {
        ChainState {
            task: Task::Good,
            name: "G".into(),
            on_good: Some(after_trigger),
            otherwise: vec![(0, S::one())],
        }
    } else {
        ChainState::unconditional(Task::Good, "G", after_trigger)
    };
    let mut states = vec![good];
    for k in 1..=nb {
        let row = if k < nb { vec![(k + 1, S::one())] } else { tail(&x) };
        states.push(ChainState::unconditional(Task::Bad, format!("B{k}"), row));
    }
    if has_extra {
        states.push(ChainState::unconditional(Task::Bad, "Bx", vec![(0, S::one())]));
    }
    AssignmentChain::new(states, observe_good, 0)
}

/// How the whole population of teams is deployed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactiveStructure<S = f64> {
    /// Mass of teams following the cooperating chain (with `r = 0`).
    pub coop_mass: S,
    /// Non-cooperating constant assignments (with `r = 1`).
    pub noncooperating: Vec<(Task, S)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReactiveKind {
    Cooperating,
    NoCooperation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalReactive<S = f64> {
    pub observe_good: bool,
    pub nb: u64,
    pub x: S,
    pub chain: AssignmentChain<S>,
    pub solution: ChainSolution<S>,
    /// Share of periods the cooperating chain spends on `t_B`.
    pub bad_share: S,
    pub kind: ReactiveKind,
    pub structure: ReactiveStructure<S>,
    pub social_value: S,
}

pub fn chain_model<S: Scalar>(env: &TaskEnvironment<S>) -> ChainModel<S> {
    ChainModel {
        arrivals: Arrivals::tasks(env.a_good.clone(), env.a_bad.clone()),
        good: env.good.clone(),
        bad: env.bad.clone(),
        delta: env.delta.clone(),
        v_good: env.v_good.clone(),
        v_bad: env.v_bad.clone(),
    }
}

/// Smallest `(N_B, x)` making the good game exactly self-enforcing.
pub fn minimal_dwell<S: Scalar>(env: &TaskEnvironment<S>, observe_good: bool, tol: Tolerance) -> Result<(u64, S)> {
    check_premises(env, tol)?;
    let delta = env.delta.clone();
    let d_good = env.good.d.clone();
    let good_flow = env.a_good.clone() * env.good.c.clone();
    let bad_flow = env.a_bad.clone() * env.bad.c.clone();
    // Value on t_G when the good game binds: δ·(continuation) = d_G.
    let v_good_task = if observe_good {
        env.a_good.clone() * (env.good.c.clone() + d_good.clone())
            / (S::one() - delta.clone() + delta.clone() * env.a_good.clone())
    } else {
        good_flow + d_good.clone()
    };
    let target = d_good / delta.clone();
    let slope = bad_flow.clone() - (S::one() - delta.clone()) * v_good_task.clone();
    if !(slope > S::zero()) {
        return Err(Error::internal("continuation is not increasing in the bad dwell"));
    }

    // Continuation after the trigger with n bad phases and no extra period.
    let mut current = v_good_task;
    if !tol.le(&current, &target) {
        return Err(Error::internal("good game is self-enforcing without any bad dwell"));
    }
    for n in 0..MAX_DWELL {
        let next = bad_flow.clone() + delta.clone() * current.clone();
        if tol.lt(&target, &next) {
            let x = (target - current.clone()) / (next - current);
            let x = S::max_of(x, S::zero());
            return Ok((n, x));
        }
        current = next;
    }
    Err(Error::internal("bad dwell did not converge"))
}

fn design<S: Scalar>(env: &TaskEnvironment<S>, observe_good: bool, tol: Tolerance) -> Result<OptimalReactive<S>> {
    let (nb, x) = minimal_dwell(env, observe_good, tol)?;
    let chain = cycle_chain(observe_good, nb, x.clone())?;
    let model = chain_model(env);
    let solution = solve_values(&chain, &model)?;

    let good_slack = solution
        .slack(0, GameLabel::Good)
        .ok_or_else(|| Error::internal("good task state has no good game"))?;
    if !tol.is_zero(&good_slack.value) {
        return Err(Error::internal(format!("good-game slack {} is not zero", good_slack.value)));
    }
    let feasibility = full_cooperation_feasible(&chain, &model, tol)?;
    if !feasibility.feasible {
        return Err(Error::internal(format!(
            "designed chain is not self-enforcing: {:?}",
            feasibility.binding
        )));
    }

    let bad_share = solution.bad_share.clone();
    let per_team = solution.social_value.clone();
    let one = S::one();
    let (coop_mass, rest_task) = if bad_share > env.q_bad {
        (env.q_bad.clone() / bad_share.clone(), Task::Good)
    } else if bad_share < env.q_bad {
        (env.q_good.clone() / (one.clone() - bad_share.clone()), Task::Bad)
    } else {
        (one.clone(), Task::Bad)
    };
    let value = coop_mass.clone() * per_team;

    let (kind, structure, social_value) = if value < S::zero() {
        (
            ReactiveKind::NoCooperation,
            ReactiveStructure {
                coop_mass: S::zero(),
                noncooperating: vec![(Task::Good, env.q_good.clone()), (Task::Bad, env.q_bad.clone())],
            },
            S::zero(),
        )
    } else {
        let rest = one - coop_mass.clone();
        let noncooperating = if rest > S::zero() { vec![(rest_task, rest)] } else { Vec::new() };
        (
            ReactiveKind::Cooperating,
            ReactiveStructure {
                coop_mass,
                noncooperating,
            },
            value,
        )
    };

    Ok(OptimalReactive {
        observe_good,
        nb,
        x,
        chain,
        solution,
        bad_share,
        kind,
        structure,
        social_value,
    })
}

/// Optimal assignment when the designer sees good games arrive.
pub fn design_observable<S: Scalar>(env: &TaskEnvironment<S>, tol: Tolerance) -> Result<OptimalReactive<S>> {
    design(env, true, tol)
}

/// Optimal assignment when only tasks, not games, are observed.
pub fn design_unobservable<S: Scalar>(env: &TaskEnvironment<S>, tol: Tolerance) -> Result<OptimalReactive<S>> {
    design(env, false, tol)
}

/// Whether some reactive assignment strictly beats every static structure.
pub fn strict_improvement_check<S: Scalar>(env: &TaskEnvironment<S>, tol: Tolerance) -> Result<bool> {
    env.validate()?;
    Ok(!tol.eq(&env.good.d, &env.bad.d))
}
