//! One-dimensional comparative statics over payoff and arrival parameters.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{classify, CooperationOutcome, Environment};
use crate::error::{Error, Result};
use crate::reshuffle_design::design;
use crate::scalar::{continuation_weight, Tolerance};
use crate::stage_games::GameLabel;

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "cG")]
    CGood,
    #[serde(rename = "cB")]
    CBad,
    #[serde(rename = "dG")]
    DGood,
    #[serde(rename = "dB")]
    DBad,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "pG")]
    PGood,
    #[serde(rename = "pB")]
    PBad,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::CGood => "cG",
            Axis::CBad => "cB",
            Axis::DGood => "dG",
            Axis::DBad => "dB",
            Axis::Delta => "delta",
            Axis::PGood => "pG",
            Axis::PBad => "pB",
        }
    }

    pub fn apply(self, base: &Environment<f64>, value: f64) -> Environment<f64> {
        let mut env = base.clone();
        match self {
            Axis::CGood => env.good.c = value,
            Axis::CBad => env.bad.c = value,
            Axis::DGood => env.good.d = value,
            Axis::DBad => env.bad.d = value,
            Axis::Delta => env.delta = value,
            Axis::PGood => env.p_good = value,
            Axis::PBad => env.p_bad = value,
        }
        env
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::invalid(format!("unknown sweep axis {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: Environment<f64>,
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub with_optimal_reshuffle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Option<CooperationOutcome>,
    pub feasible_optimal: Option<bool>,
    pub r_star: Option<f64>,
    /// Outcome under the designer's chosen reshuffling rate.
    pub designed_outcome: Option<CooperationOutcome>,
    pub social_value: Option<f64>,
    pub note: Option<String>,
}

/// A regime change located between two grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Boundary {
    pub value: f64,
    pub from: CooperationOutcome,
    pub to: CooperationOutcome,
    /// Defining inequality that changes truth value here.
    pub condition: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTable {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
    pub boundaries: Vec<Boundary>,
}

/// Signed slack of each defining condition; non-negative means it holds.
fn conditions(env: &Environment<f64>, reshuffle: bool) -> Vec<(&'static str, f64)> {
    let w = continuation_weight(&env.delta);
    let good = env.p_good * env.good.c;
    let bad = env.p_bad * env.bad.c;
    let mut out = vec![
        ("total", w * (good + bad) - env.max_temptation()),
        ("good alone", w * good - env.good.d),
        ("bad alone", w * bad - env.bad.d),
    ];
    if reshuffle {
        out.push(("temptation order", env.bad.d - env.good.d));
        out.push(("relative frequency", good * (env.bad.d - env.good.d) - env.good.d * bad));
    }
    out
}

type Regime = (CooperationOutcome, Option<bool>);

fn regime(env: &Environment<f64>, reshuffle: bool, tol: Tolerance) -> Result<Regime> {
    let outcome = classify(env, tol)?;
    let feasible = if reshuffle {
        Some(design(env, tol)?.feasible_optimal)
    } else {
        None
    };
    Ok((outcome, feasible))
}

fn row(spec: &SweepSpec, value: f64, tol: Tolerance) -> SweepRow {
    let env = spec.axis.apply(&spec.base, value);
    let mut row = SweepRow {
        value,
        outcome: None,
        feasible_optimal: None,
        r_star: None,
        designed_outcome: None,
        social_value: None,
        note: None,
    };
    match classify(&env, tol) {
        Ok(o) => {
            row.outcome = Some(o);
            row.social_value = Some(env.social_value(o));
        }
        Err(e) => {
            row.note = Some(e.to_string());
            return row;
        }
    }
    if spec.with_optimal_reshuffle {
        match design(&env, tol) {
            Ok(d) => {
                row.feasible_optimal = Some(d.feasible_optimal);
                row.r_star = d.r_star;
                row.designed_outcome = Some(d.outcome);
                row.social_value = Some(d.social_value);
            }
            Err(e) => row.note = Some(e.to_string()),
        }
    }
    row
}

fn locate(spec: &SweepSpec, lo: f64, hi: f64, tol: Tolerance) -> Option<Boundary> {
    let at = |v: f64| {
        let env = spec.axis.apply(&spec.base, v);
        regime(&env, spec.with_optimal_reshuffle, tol).ok()
    };
    let start = at(lo)?;
    let end = at(hi)?;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if at(mid)? == start {
            a = mid;
        } else {
            b = mid;
        }
    }
    let before = conditions(&spec.axis.apply(&spec.base, a), spec.with_optimal_reshuffle);
    let after = conditions(&spec.axis.apply(&spec.base, b), spec.with_optimal_reshuffle);
    let value = 0.5 * (a + b);
    let at_value = conditions(&spec.axis.apply(&spec.base, value), spec.with_optimal_reshuffle);
    let (idx, _) = before
        .iter()
        .zip(&after)
        .enumerate()
        .filter(|(_, (x, y))| tol.le(&0.0, &x.1) != tol.le(&0.0, &y.1))
        .min_by(|(i, _), (j, _)| at_value[*i].1.abs().total_cmp(&at_value[*j].1.abs()))?;
    Some(Boundary {
        value,
        from: start.0,
        to: at(b).map(|r| r.0).unwrap_or(end.0),
        condition: at_value[idx].0.to_string(),
        residual: at_value[idx].1,
    })
}

pub fn sweep(spec: &SweepSpec, tol: Tolerance) -> Result<SweepTable> {
    spec.base.validate()?;
    if spec.grid.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    if spec.grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("sweep grid contains non-finite values"));
    }
    let rows: Vec<SweepRow> = spec.grid.par_iter().map(|&v| row(spec, v, tol)).collect();
    let boundaries = rows
        .par_windows(2)
        .filter_map(|w| {
            let key = |r: &SweepRow| r.outcome.map(|o| (o, r.feasible_optimal));
            let (a, b) = (key(&w[0])?, key(&w[1])?);
            (a != b).then(|| locate(spec, w[0].value, w[1].value, tol)).flatten()
        })
        .collect();
    Ok(SweepTable {
        axis: spec.axis,
        rows,
        boundaries,
    })
}

impl SweepTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::internal(format!("csv: {e}"));
        w.write_record([
            self.axis.name(),
            "outcome",
            "feasible_optimal",
            "r_star",
            "designed_outcome",
            "social_value",
            "note",
        ])
        .map_err(err)?;
        let s = |x: Option<String>| x.unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.value.to_string(),
                s(r.outcome.map(|o| o.to_string())),
                s(r.feasible_optimal.map(|b| b.to_string())),
                s(r.r_star.map(|x| x.to_string())),
                s(r.designed_outcome.map(|o| o.to_string())),
                s(r.social_value.map(|x| x.to_string())),
                s(r.note.clone()),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::internal(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionFlags {
    pub total: bool,
    pub good_alone: bool,
    pub bad_alone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioReport {
    pub game: GameLabel,
    pub scale: f64,
    pub before: ConditionFlags,
    pub after: ConditionFlags,
}

fn flags(env: &Environment<f64>, tol: Tolerance) -> ConditionFlags {
    let w = continuation_weight(&env.delta);
    let good = env.p_good * env.good.c;
    let bad = env.p_bad * env.bad.c;
    ConditionFlags {
        total: tol.le(&env.max_temptation(), &(w * (good + bad))),
        good_alone: tol.le(&env.good.d, &(w * good)),
        bad_alone: tol.le(&env.bad.d, &(w * bad)),
    }
}

/// Scales `(c_g, d_g)` of one game jointly. Only the ratio matters for that
/// game alone, but levels matter once both games share a continuation.
pub fn ratio_vs_level_demo(env: &Environment<f64>, game: GameLabel, scale: f64, tol: Tolerance) -> Result<RatioReport> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("scale {scale} must be positive")));
    }
    // Zero arrival probabilities are allowed here to cover single-game play.
    let mut scaled = env.clone();
    match game {
        GameLabel::Good => {
            scaled.good.c *= scale;
            scaled.good.d *= scale;
        }
        GameLabel::Bad => {
            scaled.bad.c *= scale;
            scaled.bad.d *= scale;
        }
    }
    Ok(RatioReport {
        game,
        scale,
        before: flags(env, tol),
        after: flags(&scaled, tol),
    })
}
