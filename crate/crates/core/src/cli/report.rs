//! JSON reports emitted by the subcommands.
//!
//! Every report re-parses under the same strict schema it was written with.
//! Numbers computed by a generic backend are carried as [`Quantity`], so exact
//! runs print fractions such as `"5/9"` and float runs print plain numbers.

use serde::{Deserialize, Serialize};

use super::scenario::Policy;
use crate::compstat::{RatioReport, SweepTable};
use crate::equilibrium::{
    classify, compstat_thresholds, environment_point, region_boundaries, BenefitThreshold, CooperationOutcome,
    EnvironmentSpec, Point, RegionGeometry,
};
use crate::error::{Error, Result};
use crate::reactive_design::{OptimalReactive, PeriodReport, ReactiveKind, Task};
use crate::reshuffle_design::{design, only_good_interval, Conditions, Fallback};
use crate::scalar::{exact_string, continuation_weight, Quantity, Scalar, Tolerance};
use crate::simulator::{GainEstimate, SimReport};
use crate::stage_games::{check_properties, Action, GameLabel, StageGameSpec};
use crate::static_assignment::{full_specialization_check, optimal_static, StructureKind, TaskEnvironmentSpec};

pub fn num<S: Scalar>(x: &S) -> Result<Quantity> {
    if S::EXACT {
        exact_string(x).parse()
    } else {
        Quantity::from_f64(x.to_f64()).map_err(|_| Error::internal(format!("non-finite result {x}")))
    }
}

fn opt_num<S: Scalar>(x: Option<&S>) -> Result<Option<Quantity>> {
    x.map(num).transpose()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Primitives {
    pub c: Quantity,
    pub d: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyRow {
    pub property: u8,
    pub holds: bool,
    pub description: String,
    pub witness: Option<Vec<Action>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckGameReport {
    pub label: GameLabel,
    pub players: usize,
    pub all_hold: bool,
    pub properties: Vec<PropertyRow>,
    /// Present only when every property holds.
    pub primitives: Option<Primitives>,
    pub raw_primitives: Primitives,
}

impl CheckGameReport {
    pub fn build<S: Scalar>(spec: &StageGameSpec, tol: Tolerance) -> Result<Self> {
        let game = spec.to_game::<S>()?;
        let report = check_properties(&game, tol);
        let prim = |c: &S, d: &S| -> Result<Primitives> { Ok(Primitives { c: num(c)?, d: num(d)? }) };
        let raw = game.raw_primitives();
        let primitives = match game.primitives(tol) {
            Ok(p) => Some(prim(&p.c, &p.d)?),
            Err(_) => None,
        };
        Ok(CheckGameReport {
            label: game.label(),
            players: game.players(),
            all_hold: report.all_hold(),
            properties: report
                .checks
                .iter()
                .map(|c| PropertyRow {
                    property: c.property,
                    holds: c.holds,
                    description: c.description().to_string(),
                    witness: c.witness.clone(),
                })
                .collect(),
            primitives,
            raw_primitives: prim(&raw.c, &raw.d)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsReport {
    pub min_c_good_for_optimal: BenefitThreshold<Quantity>,
    pub max_d_good_for_optimal: Quantity,
    pub whistleblower_d_bad: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyReport {
    pub outcome: CooperationOutcome,
    pub exact: bool,
    /// `δ/(1−δ)`.
    pub continuation_weight: Quantity,
    pub point: Point,
    pub region: u8,
    pub thresholds: ThresholdsReport,
}

impl ClassifyReport {
    pub fn build<S: Scalar>(spec: &EnvironmentSpec, tol: Tolerance) -> Result<Self> {
        let env = spec.to_env::<S>()?;
        let outcome = classify(&env, tol)?;
        let t = compstat_thresholds(&env)?;
        let float_env = spec.to_env::<f64>()?;
        let point = environment_point(&float_env);
        let geometry = region_boundaries(&float_env.good, &float_env.bad);
        Ok(ClassifyReport {
            outcome,
            exact: S::EXACT,
            continuation_weight: num(&continuation_weight(&env.delta))?,
            point,
            region: geometry.region_at(point, tol),
            thresholds: ThresholdsReport {
                min_c_good_for_optimal: match &t.min_c_good_for_optimal {
                    BenefitThreshold::Infeasible => BenefitThreshold::Infeasible,
                    BenefitThreshold::AtLeast(v) => BenefitThreshold::AtLeast(num(v)?),
                    BenefitThreshold::Above(v) => BenefitThreshold::Above(num(v)?),
                },
                max_d_good_for_optimal: num(&t.max_d_good_for_optimal)?,
                whistleblower_d_bad: num(&t.whistleblower_d_bad)?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalReport {
    pub lower: Quantity,
    pub lower_inclusive: bool,
    pub upper: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReshuffleReport {
    pub feasible: bool,
    pub conditions: Conditions,
    pub r_star: Option<Quantity>,
    pub r: Quantity,
    pub delta_effective: Quantity,
    pub outcome: CooperationOutcome,
    pub fallback: Option<Fallback>,
    pub social_value: Quantity,
    /// All rates giving cooperation in the good game only.
    pub only_good_interval: Option<IntervalReport>,
}

impl ReshuffleReport {
    pub fn build<S: Scalar>(spec: &EnvironmentSpec, tol: Tolerance) -> Result<Self> {
        let env = spec.to_env::<S>()?;
        let d = design(&env, tol)?;
        let interval = only_good_interval(&env, tol)?
            .map(|i| -> Result<IntervalReport> {
                Ok(IntervalReport {
                    lower: num(&i.lower)?,
                    lower_inclusive: i.lower_inclusive,
                    upper: num(&i.upper)?,
                })
            })
            .transpose()?;
        Ok(ReshuffleReport {
            feasible: d.feasible_optimal,
            conditions: d.conditions,
            r_star: opt_num(d.r_star.as_ref())?,
            r: num(&d.r)?,
            delta_effective: num(&d.delta_effective)?,
            outcome: d.outcome,
            fallback: d.fallback,
            social_value: num(&d.social_value)?,
            only_good_interval: interval,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryReport {
    pub nu: Quantity,
    pub mass: Quantity,
    pub r: Quantity,
    pub outcome: CooperationOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticReport {
    pub kind: StructureKind,
    pub full_specialization: bool,
    pub nu_coop: Option<Quantity>,
    pub entries: Vec<EntryReport>,
    pub social_value: Quantity,
}

impl StaticReport {
    pub fn build<S: Scalar>(spec: &TaskEnvironmentSpec, tol: Tolerance) -> Result<Self> {
        let env = spec.to_env::<S>()?;
        let s = optimal_static(&env, tol)?;
        Ok(StaticReport {
            kind: s.kind,
            full_specialization: full_specialization_check(&env, tol)?,
            nu_coop: opt_num(s.nu_coop.as_ref())?,
            entries: s
                .entries
                .iter()
                .map(|e| -> Result<EntryReport> {
                    Ok(EntryReport {
                        nu: num(&e.nu)?,
                        mass: num(&e.mass)?,
                        r: num(&e.r)?,
                        outcome: e.outcome,
                    })
                })
                .collect::<Result<_>>()?,
            social_value: num(&s.social_value)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateReport {
    pub name: String,
    pub task: Task,
    pub steady: Quantity,
    pub value: Quantity,
    pub cooperate_good: bool,
    pub cooperate_bad: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlackReport {
    pub state: String,
    pub game: GameLabel,
    pub value: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskMass {
    pub task: Task,
    pub mass: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Masses {
    /// Teams following the cooperating chain.
    pub cooperating: Quantity,
    pub noncooperating: Vec<TaskMass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactiveReport {
    pub observe_good: bool,
    #[serde(rename = "NB")]
    pub nb: u64,
    pub x: Quantity,
    pub bad_share: Quantity,
    pub kind: ReactiveKind,
    pub states: Vec<StateReport>,
    pub slacks: Vec<SlackReport>,
    pub masses: Masses,
    pub social_value: Quantity,
    pub periods: Option<Vec<PeriodReport>>,
}

impl ReactiveReport {
    pub fn build<S: Scalar>(design: &OptimalReactive<S>) -> Result<Self> {
        let chain = &design.chain;
        let sol = &design.solution;
        let states = chain
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| -> Result<StateReport> {
                Ok(StateReport {
                    name: s.name.clone(),
                    task: s.task,
                    steady: num(&sol.steady[i])?,
                    value: num(&sol.values[i])?,
                    cooperate_good: sol.labels[i].good,
                    cooperate_bad: sol.labels[i].bad,
                })
            })
            .collect::<Result<_>>()?;
        let slacks = sol
            .slacks
            .iter()
            .map(|s| -> Result<SlackReport> {
                Ok(SlackReport {
                    state: chain.states[s.state].name.clone(),
                    game: s.game,
                    value: num(&s.value)?,
                })
            })
            .collect::<Result<_>>()?;
        let noncooperating = design
            .structure
            .noncooperating
            .iter()
            .map(|(task, mass)| -> Result<TaskMass> { Ok(TaskMass { task: *task, mass: num(mass)? }) })
            .collect::<Result<_>>()?;
        Ok(ReactiveReport {
            observe_good: design.observe_good,
            nb: design.nb,
            x: num(&design.x)?,
            bad_share: num(&design.bad_share)?,
            kind: design.kind,
            states,
            slacks,
            masses: Masses {
                cooperating: num(&design.structure.coop_mass)?,
                noncooperating,
            },
            social_value: num(&design.social_value)?,
            periods: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateReport {
    pub policy: Policy,
    /// Steady-state bad-task share of the simulated chain.
    pub analytic_bad_share: f64,
    pub summary: SimReport,
    pub deviation_gains: Option<Vec<GainEstimate>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompstatReport {
    pub table: SweepTable,
    pub ratio: Option<RatioReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotReport {
    pub geometry: RegionGeometry,
    pub point: Point,
    pub region: u8,
    pub outcome: CooperationOutcome,
    pub svg: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleRow {
    pub name: String,
    pub expected: String,
    pub exact: String,
    pub float: f64,
    pub float_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamplesReport {
    pub passed: bool,
    pub rows: Vec<ExampleRow>,
}

impl ExamplesReport {
    pub fn to_text(&self) -> String {
        let mut lines = vec![format!(
            "{:<32} {:>10} {:>10} {:>22} {:>10}  {}",
            "quantity", "expected", "exact", "float", "error", "result"
        )];
        for r in &self.rows {
            lines.push(format!(
                "{:<32} {:>10} {:>10} {:>22} {:>10.1e}  {}",
                r.name,
                r.expected,
                r.exact,
                r.float,
                r.float_error,
                if r.pass { "pass" } else { "FAIL" }
            ));
        }
        lines.push(if self.passed { "all examples pass".into() } else { "some examples FAIL".into() });
        lines.join("\n") + "\n"
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::internal(format!("csv: {e}"));
        w.write_record(["quantity", "expected", "exact", "float", "float_error", "pass"])
            .map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.name.clone(),
                r.expected.clone(),
                r.exact.clone(),
                r.float.to_string(),
                r.float_error.to_string(),
                r.pass.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::internal(e.to_string()))
    }
}
