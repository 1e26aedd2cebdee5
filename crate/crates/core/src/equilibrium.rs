//! Player-optimal cooperation in a two-game stochastic team game.
//!
//! Each period at most one stage game arrives: the good game with
//! probability `p_good`, the bad game with probability `p_bad`. Under grim
//! trigger a player facing game `g` compares the one-shot temptation `d_g`
//! against the discounted stream of cooperation benefits they would forfeit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{continuation_weight, Quantity, Scalar, Tolerance};
use crate::stage_games::GamePrimitives;

#[derive(Debug, Clone, PartialEq)]
pub struct Environment<S = f64> {
    pub delta: S,
    pub p_good: S,
    pub p_bad: S,
    pub good: GamePrimitives<S>,
    pub bad: GamePrimitives<S>,
    pub v_good: S,
    pub v_bad: S,
}

impl<S: Scalar> Environment<S> {
    pub fn validate(&self) -> Result<()> {
        let zero = S::zero();
        let one = S::one();
        if !(self.delta > zero && self.delta < one) {
            return Err(Error::invalid(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.p_good > zero && self.p_bad > zero) {
            return Err(Error::invalid("arrival probabilities must be positive"));
        }
        if self.p_good.clone() + self.p_bad.clone() > one {
            return Err(Error::invalid("arrival probabilities must sum to at most 1"));
        }
        for (name, g) in [("good", &self.good), ("bad", &self.bad)] {
            if !(g.c > zero && g.d > zero) {
                return Err(Error::invalid(format!(
                    "{name} game needs positive c and d (c = {}, d = {})",
                    g.c, g.d
                )));
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

    pub fn max_temptation(&self) -> S {
        S::max_of(self.good.d.clone(), self.bad.d.clone())
    }

    /// Per-period social value of an outcome.
    pub fn social_value(&self, outcome: CooperationOutcome) -> S {
        let mut v = S::zero();
        if outcome.cooperates_good() {
            v = v + self.p_good.clone() * self.v_good.clone();
        }
        if outcome.cooperates_bad() {
            v = v + self.p_bad.clone() * self.v_bad.clone();
        }
        v
    }

    pub fn with_delta(&self, delta: S) -> Self {
        Environment {
            delta,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CooperationOutcome {
    Total,
    OnlyGood,
    OnlyBad,
    None,
}

impl CooperationOutcome {
    pub const ALL: [Self; 4] = [Self::Total, Self::OnlyGood, Self::OnlyBad, Self::None];

    pub fn cooperates_good(self) -> bool {
        matches!(self, Self::Total | Self::OnlyGood)
    }

    pub fn cooperates_bad(self) -> bool {
        matches!(self, Self::Total | Self::OnlyBad)
    }

    pub fn from_flags(good: bool, bad: bool) -> Self {
        match (good, bad) {
            (true, true) => Self::Total,
            (true, false) => Self::OnlyGood,
            (false, true) => Self::OnlyBad,
            (false, false) => Self::None,
        }
    }
}

impl fmt::Display for CooperationOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Total => "Total",
            Self::OnlyGood => "OnlyGood",
            Self::OnlyBad => "OnlyBad",
            Self::None => "None",
        };
        f.write_str(s)
    }
}

/// Classifies player-optimal play from raw rates.
///
/// `delta` may be 0 (one-shot play) and either arrival probability may be 0,
/// which is what task-specialised assignments induce. A game with zero
/// arrival probability is never reported as cooperated.
pub fn classify_at<S: Scalar>(
    delta: &S,
    p_good: &S,
    p_bad: &S,
    good: &GamePrimitives<S>,
    bad: &GamePrimitives<S>,
    tol: Tolerance,
) -> CooperationOutcome {
    // A game that never arrives is never played, so it is not labelled.
    let good_arrives = *p_good > S::zero();
    let bad_arrives = *p_bad > S::zero();
    let w = continuation_weight(delta);
    let good_stream = w.clone() * p_good.clone() * good.c.clone();
    let bad_stream = w * p_bad.clone() * bad.c.clone();
    let max_d = S::max_of(good.d.clone(), bad.d.clone());

    let (good_coop, bad_coop) = if tol.le(&max_d, &(good_stream.clone() + bad_stream.clone())) {
        (true, true)
    } else {
        // Each solo condition implies the total one, so at most one holds.
        (tol.le(&good.d, &good_stream), tol.le(&bad.d, &bad_stream))
    };
    CooperationOutcome::from_flags(good_coop && good_arrives, bad_coop && bad_arrives)
}

pub fn classify<S: Scalar>(env: &Environment<S>, tol: Tolerance) -> Result<CooperationOutcome> {
    env.validate()?;
    Ok(classify_at(
        &env.delta,
        &env.p_good,
        &env.p_bad,
        &env.good,
        &env.bad,
        tol,
    ))
}

/// Classification under reshuffling probability `r`.
pub fn classify_reshuffled<S: Scalar>(
    env: &Environment<S>,
    r: &S,
    tol: Tolerance,
) -> Result<CooperationOutcome> {
    env.validate()?;
    let delta_e = effective_delta(&env.delta, r)?;
    Ok(classify_at(
        &delta_e,
        &env.p_good,
        &env.p_bad,
        &env.good,
        &env.bad,
        tol,
    ))
}

/// Discount factor of a team dissolved with probability `r` each period.
pub fn effective_delta<S: Scalar>(delta: &S, r: &S) -> Result<S> {
    if !(*delta > S::zero() && *delta < S::one()) {
        return Err(Error::invalid(format!("delta = {delta} must lie in (0, 1)")));
    }
    if !(*r >= S::zero() && *r <= S::one()) {
        return Err(Error::invalid(format!("reshuffle probability {r} must lie in [0, 1]")));
    }
    Ok((S::one() - r.clone()) * delta.clone())
}

/// A point in the `(x, y) = (δ/(1−δ)·p_B, δ/(1−δ)·p_G)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub from: Point,
    pub to: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: u8,
    pub outcome: CooperationOutcome,
}

/// Boundaries between cooperation regimes in the continuation-weighted
/// arrival plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGeometry {
    /// `x·c_B + y·c_G = max_g d_g`; on or above it there is total cooperation.
    pub total_line: Segment,
    /// Edge of the single partial-cooperation region, if any.
    pub partial_segment: Option<Segment>,
    pub regions: Vec<Region>,
    pub good: GamePrimitives<f64>,
    pub bad: GamePrimitives<f64>,
}

impl RegionGeometry {
    /// Region label assigned by the geometry alone.
    pub fn region_at(&self, p: Point, tol: Tolerance) -> u8 {
        let max_d = self.good.d.max(self.bad.d);
        if tol.le(&max_d, &(p.x * self.bad.c + p.y * self.good.c)) {
            return 2;
        }
        if self.good.d > self.bad.d && tol.le(&(self.bad.d / self.bad.c), &p.x) {
            return 3;
        }
        if self.good.d < self.bad.d && tol.le(&(self.good.d / self.good.c), &p.y) {
            return 4;
        }
        1
    }

    pub fn outcome_of(&self, id: u8) -> Option<CooperationOutcome> {
        self.regions.iter().find(|r| r.id == id).map(|r| r.outcome)
    }
}

pub fn region_boundaries(good: &GamePrimitives<f64>, bad: &GamePrimitives<f64>) -> RegionGeometry {
    let max_d = good.d.max(bad.d);
    let total_line = Segment {
        from: Point { x: 0.0, y: max_d / good.c },
        to: Point { x: max_d / bad.c, y: 0.0 },
    };
    let mut regions = vec![
        Region { id: 1, outcome: CooperationOutcome::None },
        Region { id: 2, outcome: CooperationOutcome::Total },
    ];
    let partial_segment = if good.d > bad.d {
        regions.push(Region { id: 3, outcome: CooperationOutcome::OnlyBad });
        let x = bad.d / bad.c;
        Some(Segment {
            from: Point { x, y: 0.0 },
            to: Point { x, y: (max_d - bad.d) / good.c },
        })
    } else if good.d < bad.d {
        regions.push(Region { id: 4, outcome: CooperationOutcome::OnlyGood });
        let y = good.d / good.c;
        Some(Segment {
            from: Point { x: 0.0, y },
            to: Point { x: (max_d - good.d) / bad.c, y },
        })
    } else {
        None
    };
    RegionGeometry {
        total_line,
        partial_segment,
        regions,
        good: good.clone(),
        bad: bad.clone(),
    }
}

/// Location of an environment in the region plane.
pub fn environment_point(env: &Environment<f64>) -> Point {
    let w = continuation_weight(&env.delta);
    Point {
        x: w * env.p_bad,
        y: w * env.p_good,
    }
}

/// Smallest good-game benefit that makes cooperation only in the good game
/// reachable by reshuffling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum BenefitThreshold<S = f64> {
    /// No benefit level works: `d_G ≥ d_B`.
    Infeasible,
    /// Any `c_G' ≥ value` works.
    AtLeast(S),
    /// Any `c_G' > value` works; the bound itself does not.
    Above(S),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds<S = f64> {
    pub min_c_good_for_optimal: BenefitThreshold<S>,
    /// Good-game temptations strictly below this admit optimal cooperation.
    pub max_d_good_for_optimal: S,
    /// Bad-game temptations strictly above this rule out total cooperation
    /// at every reshuffling rate.
    pub whistleblower_d_bad: S,
    p_good: S,
    p_bad: S,
    c_good: S,
    v_bad: S,
}

impl<S: Scalar> Thresholds<S> {
    /// Net organisational gain of paying a raised good-game benefit `c_good_new`
    /// out of pocket to escape bad cooperation; positive means worthwhile.
    pub fn bonus_tradeoff(&self, c_good_new: &S) -> S {
        self.p_bad.clone() * self.v_bad.clone()
            + self.p_good.clone() * (c_good_new.clone() - self.c_good.clone())
    }
}

pub fn compstat_thresholds<S: Scalar>(env: &Environment<S>) -> Result<Thresholds<S>> {
    env.validate()?;
    let w = continuation_weight(&env.delta);
    let good_flow = env.p_good.clone() * env.good.c.clone();
    let bad_flow = env.p_bad.clone() * env.bad.c.clone();
    let whistleblower_d_bad = w.clone() * (good_flow.clone() + bad_flow.clone());
    let max_d_good_for_optimal =
        env.bad.d.clone() * good_flow.clone() / (good_flow.clone() + bad_flow.clone());

    let min_c_good_for_optimal = if env.good.d >= env.bad.d {
        BenefitThreshold::Infeasible
    } else {
        // Sustainable alone: c' ≥ d_G / (w p_G). Relative frequency:
        // c' > d_G p_B c_B / (p_G (d_B − d_G)).
        let absolute = env.good.d.clone() / (w * env.p_good.clone());
        let relative = env.good.d.clone() * bad_flow
            / (env.p_good.clone() * (env.bad.d.clone() - env.good.d.clone()));
        if relative >= absolute {
            BenefitThreshold::Above(relative)
        } else {
            BenefitThreshold::AtLeast(absolute)
        }
    };

    Ok(Thresholds {
        min_c_good_for_optimal,
        max_d_good_for_optimal,
        whistleblower_d_bad,
        p_good: env.p_good.clone(),
        p_bad: env.p_bad.clone(),
        c_good: env.good.c.clone(),
        v_bad: env.v_bad.clone(),
    })
}

/// JSON form: `{delta, pG, pB, cG, cB, dG, dB, VG, VB}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub delta: Quantity,
    #[serde(rename = "pG")]
    pub p_good: Quantity,
    #[serde(rename = "pB")]
    pub p_bad: Quantity,
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

impl EnvironmentSpec {
    pub fn to_env<S: Scalar>(&self) -> Result<Environment<S>> {
        let env = Environment {
            delta: self.delta.get(),
            p_good: self.p_good.get(),
            p_bad: self.p_bad.get(),
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

    pub fn from_env(env: &Environment<f64>) -> Result<Self> {
        let q = Quantity::from_f64;
        Ok(EnvironmentSpec {
            delta: q(env.delta)?,
            p_good: q(env.p_good)?,
            p_bad: q(env.p_bad)?,
            c_good: q(env.good.c)?,
            c_bad: q(env.bad.c)?,
            d_good: q(env.good.d)?,
            d_bad: q(env.bad.d)?,
            v_good: q(env.v_good)?,
            v_bad: q(env.v_bad)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn env_exact(delta: Rational, pg: Rational, pb: Rational, dg: Rational, db: Rational) -> Environment<Rational> {
        Environment {
            delta,
            p_good: pg,
            p_bad: pb,
            good: GamePrimitives { c: r(1, 1), d: dg },
            bad: GamePrimitives { c: r(1, 1), d: db },
            v_good: r(1, 1),
            v_bad: r(-1, 10),
        }
    }

    #[test]
    fn single_task_example_is_total_on_the_boundary() {
        let env = env_exact(r(3, 5), r(1, 6), r(1, 2), r(1, 1), r(1, 2));
        assert_eq!(classify(&env, Tolerance(0.0)).unwrap(), CooperationOutcome::Total);
        // Any strictly larger good temptation leaves only bad cooperation.
        let mut worse = env.clone();
        worse.good.d = r(1001, 1000);
        assert_eq!(classify(&worse, Tolerance(0.0)).unwrap(), CooperationOutcome::OnlyBad);
    }

    #[test]
    fn rare_bad_games_and_high_temptation_give_none() {
        // (3/2)(0.5 + 0.0001) = 0.75015 < 1 and (3/2)(0.5) = 0.75 < 1.
        let env = env_exact(r(3, 5), r(1, 2), r(1, 10000), r(1, 1), r(1, 1));
        assert_eq!(classify(&env, Tolerance::default()).unwrap(), CooperationOutcome::None);
    }

    #[test]
    fn huge_temptations_give_none() {
        let env = Environment {
            delta: 0.1,
            p_good: 0.1,
            p_bad: 0.1,
            good: GamePrimitives { c: 1.0, d: 100.0 },
            bad: GamePrimitives { c: 1.0, d: 100.0 },
            v_good: 1.0,
            v_bad: -1.0,
        };
        assert_eq!(classify(&env, Tolerance::default()).unwrap(), CooperationOutcome::None);
    }

    #[test]
    fn only_one_partial_outcome_is_possible() {
        let env = env_exact(r(3, 5), r(2, 5), r(2, 5), r(1, 5), r(1, 1));
        assert_eq!(classify(&env, Tolerance(0.0)).unwrap(), CooperationOutcome::Total);
        let reshuffled = classify_reshuffled(&env, &r(4, 9), Tolerance(0.0)).unwrap();
        assert_eq!(reshuffled, CooperationOutcome::OnlyGood);
        let env_b = env_exact(r(3, 5), r(1, 10), r(4, 5), r(1, 1), r(1, 5));
        assert_eq!(
            classify_reshuffled(&env_b, &r(1, 3), Tolerance(0.0)).unwrap(),
            CooperationOutcome::OnlyBad
        );
    }

    #[test]
    fn effective_delta_cases() {
        assert_eq!(effective_delta(&r(3, 5), &r(0, 1)).unwrap(), r(3, 5));
        assert_eq!(effective_delta(&r(3, 5), &r(1, 1)).unwrap(), r(0, 1));
        assert_eq!(effective_delta(&r(3, 5), &r(4, 9)).unwrap(), r(1, 3));
        assert!(effective_delta(&0.6, &1.2).is_err());
        assert!(effective_delta(&1.0, &0.2).is_err());
        let env = env_exact(r(3, 5), r(1, 6), r(1, 2), r(1, 1), r(1, 2));
        assert_eq!(
            classify_reshuffled(&env, &r(1, 1), Tolerance(0.0)).unwrap(),
            CooperationOutcome::None
        );
    }

    #[test]
    fn invalid_environments_are_rejected() {
        let base = env_exact(r(3, 5), r(1, 6), r(1, 2), r(1, 1), r(1, 2));
        let mut e = base.clone();
        e.delta = r(1, 1);
        assert!(classify(&e, Tolerance(0.0)).is_err());
        let mut e = base.clone();
        e.p_good = r(3, 4);
        assert!(classify(&e, Tolerance(0.0)).is_err());
        let mut e = base.clone();
        e.v_bad = r(1, 10);
        assert!(classify(&e, Tolerance(0.0)).is_err());
        let mut e = base;
        e.good.d = r(0, 1);
        assert!(classify(&e, Tolerance(0.0)).is_err());
    }

    #[test]
    fn region_layout_depends_on_temptation_order() {
        let g = |c, d| GamePrimitives { c, d };
        let bad_easier = region_boundaries(&g(1.0, 2.0), &g(1.0, 1.0));
        let ids: Vec<u8> = bad_easier.regions.iter().map(|r| r.id).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        assert_eq!(bad_easier.outcome_of(3), Some(CooperationOutcome::OnlyBad));
        let seg = bad_easier.partial_segment.unwrap();
        assert_eq!(seg.from, Point { x: 1.0, y: 0.0 });
        assert_eq!(seg.to, Point { x: 1.0, y: 1.0 });

        let good_easier = region_boundaries(&g(1.0, 1.0), &g(2.0, 3.0));
        let ids: Vec<u8> = good_easier.regions.iter().map(|r| r.id).collect();
        assert_eq!(ids, vec![1, 2, 4]);
        assert_eq!(good_easier.outcome_of(4), Some(CooperationOutcome::OnlyGood));
        assert_eq!(good_easier.total_line.from, Point { x: 0.0, y: 3.0 });
        assert_eq!(good_easier.total_line.to, Point { x: 1.5, y: 0.0 });

        let tied = region_boundaries(&g(1.0, 1.0), &g(1.0, 1.0));
        assert!(tied.partial_segment.is_none());
        assert_eq!(tied.regions.len(), 2);
    }

    #[test]
    fn thresholds_match_hand_values() {
        let env = env_exact(r(3, 5), r(2, 5), r(2, 5), r(1, 5), r(1, 1));
        let t = compstat_thresholds(&env).unwrap();
        assert_eq!(t.max_d_good_for_optimal, r(1, 2));
        // Alone: 0.2/((3/2)(2/5)) = 1/3. Relative: 0.2·0.4/(0.4·0.8) = 1/4.
        assert_eq!(t.min_c_good_for_optimal, BenefitThreshold::AtLeast(r(1, 3)));

        let fn9 = env_exact(r(3, 5), r(1, 6), r(1, 2), r(1, 1), r(1, 2));
        let t = compstat_thresholds(&fn9).unwrap();
        assert_eq!(t.whistleblower_d_bad, r(1, 1));
        assert_eq!(t.min_c_good_for_optimal, BenefitThreshold::Infeasible);
        // p_B V_B + p_G (c' − c) = (1/2)(−1/10) + (1/6)(1/2)
        assert_eq!(t.bonus_tradeoff(&r(3, 2)), r(1, 30));
    }

    #[test]
    fn relative_threshold_is_strict() {
        let env = env_exact(r(9, 10), r(1, 10), r(4, 5), r(1, 2), r(1, 1));
        let t = compstat_thresholds(&env).unwrap();
        // absolute: 0.5/(9·0.1) = 5/9; relative: 0.5·0.8/(0.1·0.5) = 8.
        assert_eq!(t.min_c_good_for_optimal, BenefitThreshold::Above(r(8, 1)));
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"delta":0.6,"pG":"1/6","pB":0.5,"cG":1,"cB":1,"dG":1,"dB":0.5,"VG":1,"VB":-0.1}"#;
        let spec: EnvironmentSpec = serde_json::from_str(json).unwrap();
        let exact = spec.to_env::<Rational>().unwrap();
        assert_eq!(exact.delta, r(3, 5));
        assert_eq!(exact.p_good, r(1, 6));
        assert_eq!(exact.v_bad, r(-1, 10));
        let approx = spec.to_env::<f64>().unwrap();
        let again = EnvironmentSpec::from_env(&approx).unwrap();
        assert_eq!(again.to_env::<f64>().unwrap(), approx);
        assert!(serde_json::from_str::<EnvironmentSpec>(&json.replace("\"VB\"", "\"Vb\"")).is_err());
    }
}
