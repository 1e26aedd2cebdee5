//! Static task assignment across two tasks.
//!
//! Task `t_G` only ever produces good games (with probability `a_G`), task
//! `t_B` only bad ones (with probability `a_B`). A team assigned to `t_G` with
//! probability `ν` therefore faces `(p_G, p_B) = (ν a_G, (1−ν) a_B)`. The
//! organisation must cover each task with a fixed share `q_t` of its teams.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{classify_at, effective_delta, CooperationOutcome};
use crate::error::{Error, Result};
use crate::scalar::{continuation_weight, Quantity, Scalar, Tolerance};
use crate::stage_games::GamePrimitives;

#[derive(Debug, Clone, PartialEq)]
pub struct TaskEnvironment<S = f64> {
    pub delta: S,
    pub a_good: S,
    pub a_bad: S,
    pub q_good: S,
    pub q_bad: S,
    pub good: GamePrimitives<S>,
    pub bad: GamePrimitives<S>,
    pub v_good: S,
    pub v_bad: S,
}

impl<S: Scalar> TaskEnvironment<S> {
    pub fn validate(&self) -> Result<()> {
        let zero = S::zero();
        let one = S::one();
        if !(self.delta > zero && self.delta < one) {
            return Err(Error::invalid(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        for (name, a) in [("a_G", &self.a_good), ("a_B", &self.a_bad)] {
            if !(*a > zero && *a <= one) {
                return Err(Error::invalid(format!("{name} = {a} must lie in (0, 1]")));
            }
        }
        if !(self.q_good > zero && self.q_bad > zero) {
            return Err(Error::invalid("task shares must be positive"));
        }
        let total = self.q_good.clone() + self.q_bad.clone();
        let sum_ok = if S::EXACT {
            total == one
        } else {
            (total.to_f64() - 1.0).abs() <= 1e-9
        };
        if !sum_ok {
            return Err(Error::invalid(format!("q_G + q_B = {total}, expected 1")));
        }
        for (name, g) in [("good", &self.good), ("bad", &self.bad)] {
            if !(g.c > zero && g.d > zero) {
                return Err(Error::invalid(format!("{name} game needs positive c and d")));
            }
        }
        if !(self.v_good > zero) {
            return Err(Error::invalid("V_G must be positive"));
        }
        if !(self.v_bad < zero) {
            return Err(Error::invalid("V_B must be negative"));
        }
        Ok(())
    }

    pub fn weight(&self) -> S {
        continuation_weight(&self.delta)
    }

    pub fn max_temptation(&self) -> S {
        S::max_of(self.good.d.clone(), self.bad.d.clone())
    }

    /// Game arrival probabilities of a team on `t_G` with probability `nu`.
    pub fn arrivals(&self, nu: &S) -> (S, S) {
        (
            nu.clone() * self.a_good.clone(),
            (S::one() - nu.clone()) * self.a_bad.clone(),
        )
    }

    /// Classification of a static assignment under reshuffling rate `r`.
    pub fn outcome(&self, nu: &S, r: &S, tol: Tolerance) -> Result<CooperationOutcome> {
        let delta_e = effective_delta(&self.delta, r)?;
        let (pg, pb) = self.arrivals(nu);
        Ok(classify_at(&delta_e, &pg, &pb, &self.good, &self.bad, tol))
    }

    /// Per-period social value of one team at `nu` playing `outcome`.
    pub fn flow_value(&self, nu: &S, outcome: CooperationOutcome) -> S {
        let (pg, pb) = self.arrivals(nu);
        let mut v = S::zero();
        if outcome.cooperates_good() {
            v = v + pg * self.v_good.clone();
        }
        if outcome.cooperates_bad() {
            v = v + pb * self.v_bad.clone();
        }
        v
    }
}

/// Hybrid assignment at which total cooperation binds exactly.
pub fn nu_coop<S: Scalar>(env: &TaskEnvironment<S>) -> Result<Option<S>> {
    env.validate()?;
    let needed = env.max_temptation() / env.weight();
    let good_flow = env.a_good.clone() * env.good.c.clone();
    let bad_flow = env.a_bad.clone() * env.bad.c.clone();
    if good_flow == bad_flow {
        // Every mix sustains the same stream.
        return Ok((needed == bad_flow).then(S::one));
    }
    let nu = (needed - bad_flow.clone()) / (good_flow - bad_flow);
    Ok((nu >= S::zero() && nu <= S::one()).then_some(nu))
}

/// Good-task teams cooperate on their own, without any bad-task exposure.
pub fn full_specialization_check<S: Scalar>(env: &TaskEnvironment<S>, tol: Tolerance) -> Result<bool> {
    env.validate()?;
    let stream = env.weight() * env.a_good.clone() * env.good.c.clone();
    Ok(tol.le(&env.good.d, &stream))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticEntry<S = f64> {
    /// Probability of `t_G`.
    pub nu: S,
    pub mass: S,
    pub r: S,
    pub outcome: CooperationOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureKind {
    FullSpecialization,
    Hybrid,
    NoCooperation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticTeamStructure<S = f64> {
    pub kind: StructureKind,
    pub entries: Vec<StaticEntry<S>>,
    pub nu_coop: Option<S>,
    pub social_value: S,
}

impl<S: Scalar> StaticTeamStructure<S> {
    /// `(Σ λ − 1, Σ λ ν − q_G)`.
    pub fn balance_residual(&self, env: &TaskEnvironment<S>) -> (S, S) {
        let mut mass = S::zero();
        let mut good = S::zero();
        for e in &self.entries {
            mass = mass + e.mass.clone();
            good = good + e.mass.clone() * e.nu.clone();
        }
        (mass - S::one(), good - env.q_good.clone())
    }
}

fn entry<S: Scalar>(env: &TaskEnvironment<S>, nu: S, mass: S, r: S, tol: Tolerance) -> Result<StaticEntry<S>> {
    let outcome = env.outcome(&nu, &r, tol)?;
    Ok(StaticEntry { nu, mass, r, outcome })
}

fn no_cooperation<S: Scalar>(
    env: &TaskEnvironment<S>,
    nu_coop: Option<S>,
    tol: Tolerance,
) -> Result<StaticTeamStructure<S>> {
    Ok(StaticTeamStructure {
        kind: StructureKind::NoCooperation,
        entries: vec![
            entry(env, S::one(), env.q_good.clone(), S::one(), tol)?,
            entry(env, S::zero(), env.q_bad.clone(), S::one(), tol)?,
        ],
        nu_coop,
        social_value: S::zero(),
    })
}

pub fn optimal_static<S: Scalar>(env: &TaskEnvironment<S>, tol: Tolerance) -> Result<StaticTeamStructure<S>> {
    env.validate()?;
    if full_specialization_check(env, tol)? {
        let value = env.q_good.clone() * env.a_good.clone() * env.v_good.clone();
        return Ok(StaticTeamStructure {
            kind: StructureKind::FullSpecialization,
            entries: vec![
                entry(env, S::one(), env.q_good.clone(), S::zero(), tol)?,
                entry(env, S::zero(), env.q_bad.clone(), S::one(), tol)?,
            ],
            nu_coop: nu_coop(env)?,
            social_value: value,
        });
    }

    let Some(nu) = nu_coop(env)? else {
        return no_cooperation(env, None, tol);
    };

    // The cooperating teams carry the whole coverage of one task; the
    // specialised rest fills the other.
    let (mass, specialised_nu) = if env.q_good <= nu {
        (env.q_good.clone() / nu.clone(), S::zero())
    } else {
        (env.q_bad.clone() / (S::one() - nu.clone()), S::one())
    };
    let per_team = env.flow_value(&nu, CooperationOutcome::Total);
    let value = mass.clone() * per_team;
    if value < S::zero() {
        return no_cooperation(env, Some(nu), tol);
    }

    let coop = entry(env, nu.clone(), mass.clone(), S::zero(), tol)?;
    if coop.outcome != CooperationOutcome::Total {
        return Err(Error::internal(format!(
            "hybrid assignment {nu} classifies as {}",
            coop.outcome
        )));
    }
    let mut entries = vec![coop];
    let rest = S::one() - mass;
    if rest > S::zero() {
        entries.push(entry(env, specialised_nu, rest, S::one(), tol)?);
    }
    Ok(StaticTeamStructure {
        kind: StructureKind::Hybrid,
        entries,
        nu_coop: Some(nu),
        social_value: value,
    })
}

/// A structure with at most two assignments, as enumerated for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Candidate {
    pub nu1: f64,
    pub r1: f64,
    pub mass1: f64,
    pub outcome1: CooperationOutcome,
    pub nu2: f64,
    pub r2: f64,
    pub mass2: f64,
    pub outcome2: CooperationOutcome,
    pub value: f64,
}

/// Every balanced structure on the grid `ν ∈ {0, 1/steps, …, 1}`, `r ∈ {0, 1}`.
pub fn candidate_grid(env: &TaskEnvironment<f64>, steps: usize, tol: Tolerance) -> Result<Vec<Candidate>> {
    env.validate()?;
    if steps == 0 {
        return Err(Error::invalid("grid needs at least one step"));
    }
    let nus: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let mut arms = Vec::with_capacity(nus.len() * 2);
    for &nu in &nus {
        for r in [0.0, 1.0] {
            let outcome = env.outcome(&nu, &r, tol)?;
            arms.push((nu, r, outcome, env.flow_value(&nu, outcome)));
        }
    }
    let q = env.q_good;
    let mut out = Vec::new();
    for (i, a) in arms.iter().enumerate() {
        for b in &arms[i..] {
            let (mass1, mass2) = if (a.0 - b.0).abs() < f64::EPSILON {
                if (a.0 - q).abs() > 1e-12 {
                    continue;
                }
                (1.0, 0.0)
            } else {
                let m = (q - b.0) / (a.0 - b.0);
                if !(-1e-12..=1.0 + 1e-12).contains(&m) {
                    continue;
                }
                let m = m.clamp(0.0, 1.0) + 0.0;
                (m, 1.0 - m)
            };
            out.push(Candidate {
                nu1: a.0,
                r1: a.1,
                mass1,
                outcome1: a.2,
                nu2: b.0,
                r2: b.1,
                mass2,
                outcome2: b.2,
                value: mass1 * a.3 + mass2 * b.3,
            });
        }
    }
    Ok(out)
}

/// JSON form of a [`TaskEnvironment`]; `qB` defaults to `1 − qG`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEnvironmentSpec {
    pub delta: Quantity,
    #[serde(rename = "aG")]
    pub a_good: Quantity,
    #[serde(rename = "aB")]
    pub a_bad: Quantity,
    #[serde(rename = "qG")]
    pub q_good: Quantity,
    #[serde(rename = "qB", default, skip_serializing_if = "Option::is_none")]
    pub q_bad: Option<Quantity>,
    #[serde(rename = "cG")]
    pub c_good: Quantity,
    #[serde(rename = "cB")]
    pub c_bad: Quantity,
    #[serde(rename = "dG")]
    pub d_good: Quantity,
    #[serde(rename = "dB")]
    pub d_bad: Quantity,
    #[serde(rename = "VG")]
    pub v_good: Quantity,
    #[serde(rename = "VB")]
    pub v_bad: Quantity,
}

impl TaskEnvironmentSpec {
    pub fn to_env<S: Scalar>(&self) -> Result<TaskEnvironment<S>> {
        let q_good: S = self.q_good.get();
        let q_bad = match &self.q_bad {
            Some(q) => q.get(),
            None => S::one() - q_good.clone(),
        };
        let env = TaskEnvironment {
            delta: self.delta.get(),
            a_good: self.a_good.get(),
            a_bad: self.a_bad.get(),
            q_good,
            q_bad,
            good: GamePrimitives {
                c: self.c_good.get(),
                d: self.d_good.get(),
            },
            bad: GamePrimitives {
                c: self.c_bad.get(),
                d: self.d_bad.get(),
            },
            v_good: self.v_good.get(),
            v_bad: self.v_bad.get(),
        };
        env.validate()?;
        Ok(env)
    }
}
