//! Random team reshuffling as a commitment to impatience.
//!
//! Dissolving a team with probability `r` each period scales the discount
//! factor to `(1−r)δ`. Raising `r` shrinks every continuation stream at the
//! same rate, so when the good game is easier to sustain alone than total
//! cooperation, some rate keeps cooperation in the good game only.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{classify, classify_reshuffled, effective_delta, CooperationOutcome, Environment};
use crate::error::{Error, Result};
use crate::scalar::{continuation_weight, Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    /// `d_G < d_B`
    pub temptation_order: bool,
    /// Good-game cooperation is sustainable by itself at `r = 0`.
    pub good_sustainable: bool,
    /// Good games are frequent or valuable enough relative to bad ones.
    pub relative_frequency: bool,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.temptation_order && self.good_sustainable && self.relative_frequency
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fallback {
    KeepTogetherTotal,
    ReshuffleNone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReshuffleDesign<S = f64> {
    pub conditions: Conditions,
    pub feasible_optimal: bool,
    /// Rate that isolates good-game cooperation, when one exists.
    pub r_star: Option<S>,
    /// Rate actually prescribed.
    pub r: S,
    pub delta_effective: S,
    pub outcome: CooperationOutcome,
    pub fallback: Option<Fallback>,
    pub social_value: S,
}

/// Reshuffling rates that yield cooperation in the good game only.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlyGoodInterval<S = f64> {
    pub lower: S,
    /// `false` when total cooperation still holds at `lower`.
    pub lower_inclusive: bool,
    pub upper: S,
}

impl<S: Scalar> OnlyGoodInterval<S> {
    pub fn contains(&self, r: &S, tol: Tolerance) -> bool {
        let above = if self.lower_inclusive {
            tol.le(&self.lower, r)
        } else {
            tol.lt(&self.lower, r)
        };
        above && tol.le(r, &self.upper)
    }
}

pub fn check_conditions<S: Scalar>(env: &Environment<S>, tol: Tolerance) -> Result<Conditions> {
    env.validate()?;
    let w = continuation_weight(&env.delta);
    let good_flow = env.p_good.clone() * env.good.c.clone();
    let bad_flow = env.p_bad.clone() * env.bad.c.clone();
    let temptation_order = tol.lt(&env.good.d, &env.bad.d);
    let good_sustainable = tol.le(&env.good.d, &(w * good_flow.clone()));
    // p_G c_G / (p_B c_B) > d_G / (d_B − d_G), cross-multiplied.
    let relative_frequency = temptation_order
        && tol.lt(
            &(env.good.d.clone() * bad_flow),
            &(good_flow * (env.bad.d.clone() - env.good.d.clone())),
        );
    Ok(Conditions {
        temptation_order,
        good_sustainable,
        relative_frequency,
    })
}

/// Effective discount at which the good game is exactly self-enforcing.
fn binding_delta<S: Scalar>(env: &Environment<S>) -> S {
    let z = env.good.d.clone() / (env.p_good.clone() * env.good.c.clone());
    z.clone() / (S::one() + z)
}

fn rate_for<S: Scalar>(delta: &S, delta_e: &S) -> S {
    S::one() - delta_e.clone() / delta.clone()
}

pub fn design<S: Scalar>(env: &Environment<S>, tol: Tolerance) -> Result<ReshuffleDesign<S>> {
    let conditions = check_conditions(env, tol)?;
    if conditions.all() {
        let delta_e = binding_delta(env);
        let mut r = rate_for(&env.delta, &delta_e);
        if r < S::zero() {
            if !tol.is_zero(&r) {
                return Err(Error::internal(format!("negative reshuffle rate {r}")));
            }
            r = S::zero();
        }
        let delta_effective = effective_delta(&env.delta, &r)?;
        let outcome = classify_reshuffled(env, &r, tol)?;
        if outcome != CooperationOutcome::OnlyGood {
            return Err(Error::internal(format!(
                "reshuffling at r = {r} yields {outcome}, expected OnlyGood"
            )));
        }
        return Ok(ReshuffleDesign {
            conditions,
            feasible_optimal: true,
            r_star: Some(r.clone()),
            r,
            delta_effective,
            outcome,
            fallback: None,
            social_value: env.social_value(outcome),
        });
    }

    let unconstrained = classify(env, tol)?;
    let total_value = env.social_value(CooperationOutcome::Total);
    if unconstrained == CooperationOutcome::Total && total_value > S::zero() {
        Ok(ReshuffleDesign {
            conditions,
            feasible_optimal: false,
            r_star: None,
            r: S::zero(),
            delta_effective: env.delta.clone(),
            outcome: CooperationOutcome::Total,
            fallback: Some(Fallback::KeepTogetherTotal),
            social_value: total_value,
        })
    } else {
        Ok(ReshuffleDesign {
            conditions,
            feasible_optimal: false,
            r_star: None,
            r: S::one(),
            delta_effective: S::zero(),
            outcome: CooperationOutcome::None,
            fallback: Some(Fallback::ReshuffleNone),
            social_value: S::zero(),
        })
    }
}

/// The full set of rates giving `OnlyGood`, or `None` when the conditions fail.
pub fn only_good_interval<S: Scalar>(
    env: &Environment<S>,
    tol: Tolerance,
) -> Result<Option<OnlyGoodInterval<S>>> {
    let conditions = check_conditions(env, tol)?;
    if !conditions.all() {
        return Ok(None);
    }
    let upper = S::max_of(rate_for(&env.delta, &binding_delta(env)), S::zero());
    let flow = env.p_good.clone() * env.good.c.clone() + env.p_bad.clone() * env.bad.c.clone();
    let w_total = env.bad.d.clone() / flow;
    let delta_total = w_total.clone() / (S::one() + w_total);
    let lower = rate_for(&env.delta, &delta_total);
    Ok(Some(if lower < S::zero() {
        OnlyGoodInterval {
            lower: S::zero(),
            lower_inclusive: true,
            upper,
        }
    } else {
        OnlyGoodInterval {
            lower,
            lower_inclusive: false,
            upper,
        }
    }))
}
