//! Built-in worked example: the reference two-task environment and the
//! values its designers must reproduce.

use super::report::{ExampleRow, ExamplesReport};
use crate::error::{Error, Result};
use crate::reactive_design::{design_observable, design_unobservable};
use crate::scalar::{Quantity, Rational, Scalar, Tolerance};
use crate::static_assignment::{nu_coop, TaskEnvironmentSpec};

const FLOAT_AGREEMENT: f64 = 1e-12;

fn q(s: &str) -> Quantity {
    s.parse().expect("literal quantity")
}

/// δ = 3/5, c = 1, a_G = 1/2, a_B = 3/4, d_G = 1, d_B = 1/2, q_G = 3/10,
/// V_G = 1, V_B = −1/10.
pub fn reference_environment() -> TaskEnvironmentSpec {
    TaskEnvironmentSpec {
        delta: q("3/5"),
        a_good: q("1/2"),
        a_bad: q("3/4"),
        q_good: q("3/10"),
        q_bad: None,
        c_good: q("1"),
        c_bad: q("1"),
        d_good: q("1"),
        d_bad: q("1/2"),
        v_good: q("1"),
        v_bad: q("-1/10"),
    }
}

struct Values<S> {
    nu: S,
    observable: (u64, S, S),
    unobservable: (u64, S, S),
}

fn compute<S: Scalar>(spec: &TaskEnvironmentSpec, tol: Tolerance) -> Result<Values<S>> {
    let env = spec.to_env::<S>()?;
    let nu = nu_coop(&env)?.ok_or_else(|| Error::internal("no cooperating assignment weight"))?;
    let o = design_observable(&env, tol)?;
    let u = design_unobservable(&env, tol)?;
    Ok(Values {
        nu,
        observable: (o.nb, o.x, o.bad_share),
        unobservable: (u.nb, u.x, u.bad_share),
    })
}

/// One comparison; `dwell` carries the exact and float `N_B` for chain rows,
/// which must both equal 1.
fn row(name: &str, expected: Rational, exact: &Rational, float: f64, dwell: Option<(u64, u64)>) -> ExampleRow {
    let error = (float - expected.to_f64()).abs();
    let (expected_text, exact_text, dwell_ok) = match dwell {
        Some((e, f)) => (format!("(1, {expected})"), format!("({e}, {exact})"), e == 1 && f == 1),
        None => (expected.to_string(), exact.to_string(), true),
    };
    ExampleRow {
        name: name.to_string(),
        expected: expected_text,
        exact: exact_text,
        float,
        float_error: error,
        pass: dwell_ok && *exact == expected && error <= FLOAT_AGREEMENT,
    }
}

/// Runs the reference environment through the static and both reactive
/// designers, exactly and in floating point.
pub fn run_examples(tol: Tolerance) -> Result<ExamplesReport> {
    let spec = reference_environment();
    let exact = compute::<Rational>(&spec, tol)?;
    let float = compute::<f64>(&spec, tol)?;
    let r = Rational::from_ratio;

    let rows = vec![
        row("static nu_coop(tG)", r(1, 3), &exact.nu, float.nu, None),
        row(
            "observable (NB, x)",
            r(5, 9),
            &exact.observable.1,
            float.observable.1,
            Some((exact.observable.0, float.observable.0)),
        ),
        row(
            "unobservable (NB, x)",
            r(5, 27),
            &exact.unobservable.1,
            float.unobservable.1,
            Some((exact.unobservable.0, float.unobservable.0)),
        ),
        row("observable bad-task share", r(7, 16), &exact.observable.2, float.observable.2, None),
        row("unobservable bad-task share", r(32, 59), &exact.unobservable.2, float.unobservable.2, None),
    ];
    Ok(ExamplesReport {
        passed: rows.iter().all(|r| r.pass),
        rows,
    })
}
