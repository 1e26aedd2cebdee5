//! Shorter periods: discount `δ^T`, arrivals `a·T` (capped at 1).
//!
//! Values are reported per unit of time so different period lengths compare
//! directly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::{design_observable, design_unobservable};
use crate::error::{Error, Result};
use crate::scalar::Tolerance;
use crate::static_assignment::{optimal_static, TaskEnvironment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodReport {
    pub period: f64,
    pub static_value: Option<f64>,
    pub observable_value: Option<f64>,
    pub unobservable_value: Option<f64>,
    pub observable_bad_share: Option<f64>,
    pub unobservable_bad_share: Option<f64>,
    pub observable_gap: Option<f64>,
    pub unobservable_gap: Option<f64>,
    /// Why an entry is missing, when one is.
    pub note: Option<String>,
}

pub fn period_environment(env: &TaskEnvironment<f64>, period: f64) -> Result<TaskEnvironment<f64>> {
    if !(period > 0.0 && period <= 1.0) {
        return Err(Error::invalid(format!("period length {period} outside (0, 1]")));
    }
    let scaled = TaskEnvironment {
        delta: env.delta.powf(period),
        a_good: (env.a_good * period).min(1.0),
        a_bad: (env.a_bad * period).min(1.0),
        ..env.clone()
    };
    scaled.validate()?;
    Ok(scaled)
}

fn entry(env: &TaskEnvironment<f64>, period: f64, tol: Tolerance) -> PeriodReport {
    let mut report = PeriodReport {
        period,
        static_value: None,
        observable_value: None,
        unobservable_value: None,
        observable_bad_share: None,
        unobservable_bad_share: None,
        observable_gap: None,
        unobservable_gap: None,
        note: None,
    };
    let scaled = match period_environment(env, period) {
        Ok(e) => e,
        Err(e) => {
            report.note = Some(e.to_string());
            return report;
        }
    };
    let mut notes = Vec::new();
    match optimal_static(&scaled, tol) {
        Ok(s) => report.static_value = Some(s.social_value / period),
        Err(e) => notes.push(format!("static: {e}")),
    }
    match design_observable(&scaled, tol) {
        Ok(d) => {
            report.observable_value = Some(d.social_value / period);
            report.observable_bad_share = Some(d.bad_share);
        }
        Err(e) => notes.push(format!("observable: {e}")),
    }
    match design_unobservable(&scaled, tol) {
        Ok(d) => {
            report.unobservable_value = Some(d.social_value / period);
            report.unobservable_bad_share = Some(d.bad_share);
        }
        Err(e) => notes.push(format!("unobservable: {e}")),
    }
    if let Some(s) = report.static_value {
        report.observable_gap = report.observable_value.map(|v| v - s);
        report.unobservable_gap = report.unobservable_value.map(|v| v - s);
    }
    if !notes.is_empty() {
        report.note = Some(notes.join("; "));
    }
    report
}

/// Runs all three designers at each period length, in input order.
pub fn period_sweep(env: &TaskEnvironment<f64>, periods: &[f64], tol: Tolerance) -> Result<Vec<PeriodReport>> {
    env.validate()?;
    Ok(periods.par_iter().map(|&t| entry(env, t, tol)).collect())
}
