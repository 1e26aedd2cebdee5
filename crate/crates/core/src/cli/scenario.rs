//! Scenario files: the versioned JSON input of every subcommand.

use serde::{Deserialize, Serialize};

use crate::compstat::Axis;
use crate::equilibrium::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::scalar::{Quantity, Rational, Scalar};
use crate::stage_games::{GameLabel, StageGameSpec};
use crate::static_assignment::TaskEnvironmentSpec;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_environment: Option<TaskEnvironmentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<StageGameSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationOptions>,
    /// Period lengths for the reactive period sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<Quantity>>,
    /// Resolution of the audit grid written by `design-static`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOptions {
    pub axis: Axis,
    /// Explicit grid; alternatively `from`, `to` and `steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default)]
    pub with_optimal_reshuffle: bool,
}

impl SweepOptions {
    pub fn grid(&self) -> Result<Vec<f64>> {
        match (&self.values, self.from, self.to, self.steps) {
            (Some(v), None, None, None) => Ok(v.clone()),
            (None, Some(a), Some(b), Some(n)) if n >= 1 => {
                // Interpolate the decimal endpoints exactly.
                let a = Quantity::from_f64(a)?.exact;
                let b = Quantity::from_f64(b)?.exact;
                let n_r = Rational::from_integer(n.into());
                Ok((0..=n)
                    .map(|i| {
                        let t = Rational::from_integer(i.into()) / n_r.clone();
                        (a.clone() + (b.clone() - a.clone()) * t).to_f64()
                    })
                    .collect())
            }
            _ => Err(Error::invalid(
                "sweep needs either `values` or all of `from`, `to` and `steps` (steps ≥ 1)",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioOptions {
    pub game: GameLabel,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationOptions {
    pub teams: usize,
    pub horizon: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<Policy>,
    /// Monte-Carlo samples per `(state, game)` for deviation gains; 0 skips them.
    #[serde(default)]
    pub deviation_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Policy {
    /// Designed reactive chain (task environments).
    Reactive { observe_good: bool },
    /// Constant assignment to `t_G` with probability `nu`.
    Static { nu: f64, reshuffle: f64 },
    /// One team facing both games (plain environments).
    Team { reshuffle: f64 },
}

/// Which model a scenario describes.
pub enum Subject<'a> {
    Environment(&'a EnvironmentSpec),
    Tasks(&'a TaskEnvironmentSpec),
    Game(&'a StageGameSpec),
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| {
            Error::invalid(format!(
                "scenario JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema_version {:?}, expected {SCHEMA_VERSION:?}",
                self.schema_version
            )));
        }
        let present = [
            self.environment.is_some(),
            self.task_environment.is_some(),
            self.game.is_some(),
        ];
        if present.iter().filter(|&&p| p).count() != 1 {
            return Err(Error::invalid(
                "exactly one of `environment`, `task_environment` or `game` must be present",
            ));
        }
        Ok(())
    }

    pub fn subject(&self) -> Subject<'_> {
        if let Some(e) = &self.environment {
            Subject::Environment(e)
        } else if let Some(t) = &self.task_environment {
            Subject::Tasks(t)
        } else {
            Subject::Game(self.game.as_ref().expect("validated scenario"))
        }
    }

    pub fn environment(&self) -> Result<&EnvironmentSpec> {
        self.environment
            .as_ref()
            .ok_or_else(|| Error::invalid("this command needs an `environment`"))
    }

    pub fn task_environment(&self) -> Result<&TaskEnvironmentSpec> {
        self.task_environment
            .as_ref()
            .ok_or_else(|| Error::invalid("this command needs a `task_environment`"))
    }

    pub fn game(&self) -> Result<&StageGameSpec> {
        self.game
            .as_ref()
            .ok_or_else(|| Error::invalid("this command needs a `game`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENV: &str = r#"{"delta":0.6,"pG":0.5,"pB":0.5,"cG":1,"cB":1,"dG":0.2,"dB":1,"VG":1,"VB":-0.1}"#;

    #[test]
    fn accepts_one_subject() {
        let s = Scenario::parse(&format!(r#"{{"schema_version":"1","environment":{ENV}}}"#)).unwrap();
        assert!(matches!(s.subject(), Subject::Environment(_)));
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let unknown = format!(r#"{{"schema_version":"1","environment":{ENV},"extra":1}}"#);
        assert!(Scenario::parse(&unknown).is_err());
        let version = format!(r#"{{"schema_version":"2","environment":{ENV}}}"#);
        assert!(Scenario::parse(&version).is_err());
        assert!(Scenario::parse(r#"{"schema_version":"1"}"#).is_err());
    }

    #[test]
    fn reports_position_of_syntax_errors() {
        let err = Scenario::parse("{\n  \"schema_version\": \"1\",\n  oops\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn sweep_grid_forms() {
        let s = SweepOptions {
            axis: Axis::DGood,
            values: None,
            from: Some(0.0),
            to: Some(1.0),
            steps: Some(4),
            with_optimal_reshuffle: false,
        };
        assert_eq!(s.grid().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let both = SweepOptions {
            values: Some(vec![0.1]),
            ..s
        };
        assert!(both.grid().is_err());
    }
}
