//! Acceptance suite: one line per criterion.
//!
//! Criteria listed in `KNOWN_FAILING` are reported as failures but do not
//! fail the run; any other failure exits non-zero.

mod common;

use std::time::{Duration, Instant};

use common::{lemma_grid, outcome_oracle, rat, reactive_grid_min, reference, static_grid_best};
use coopdesign::equilibrium::{classify_at, classify_reshuffled, CooperationOutcome, Environment};
use coopdesign::reactive_design::{
    design_observable, design_unobservable, period_sweep, strict_improvement_check,
};
use coopdesign::reshuffle_design::{design, only_good_interval};
use coopdesign::scalar::{Rational, Scalar, Tolerance};
use coopdesign::simulator::{estimate_deviation_gains, run, SimConfig};
use coopdesign::stage_games::GamePrimitives;
use coopdesign::static_assignment::{nu_coop, optimal_static, TaskEnvironment};

/// Criterion 10 does not hold on the reference environment; see the README.
const KNOWN_FAILING: &[u32] = &[10];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Median wall time of `runs` calls.
fn median_time<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut times = Vec::with_capacity(runs);
    let mut last = None;
    for _ in 0..runs {
        let start = Instant::now();
        last = Some(f());
        times.push(start.elapsed());
    }
    times.sort();
    (last.unwrap(), times[runs / 2])
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn hybrid_weight() -> Outcome {
    let env = reference::<Rational>();
    let (nu, t) = median_time(5, || nu_coop(&env).unwrap());
    let ok = nu == Some(rat(1, 3)) && t < Duration::from_millis(1);
    outcome(ok, format!("nu_coop = {} in {t:?}", nu.map_or("none".into(), |v| v.to_string())))
}

fn reactive_case(observe: bool, x: Rational, share: Rational) -> Outcome {
    let env = reference::<Rational>();
    let (d, t) = median_time(5, || {
        if observe {
            design_observable(&env, tol()).unwrap()
        } else {
            design_unobservable(&env, tol()).unwrap()
        }
    });
    let ok = d.nb == 1 && d.x == x && d.bad_share == share && t < Duration::from_millis(10);
    outcome(ok, format!("(NB, x) = ({}, {}), bad share {} in {t:?}", d.nb, d.x, d.bad_share))
}

fn value_ordering() -> Outcome {
    let env = reference::<f64>();
    let s = optimal_static(&env, tol()).unwrap().social_value;
    let u = design_unobservable(&env, tol()).unwrap().social_value;
    let o = design_observable(&env, tol()).unwrap().social_value;
    let eps = 1e-9;
    let weak = s <= u + eps && u <= o + eps;
    let strict = !strict_improvement_check(&env, tol()).unwrap() || (u > s + eps && o > s + eps);
    outcome(weak && strict, format!("static {s:.6} <= unobservable {u:.6} <= observable {o:.6}"))
}

fn lemma_oracle() -> Outcome {
    let payoffs = [
        (rat(1, 1), rat(2, 5), rat(3, 2), rat(6, 5)),
        (rat(1, 1), rat(6, 5), rat(3, 2), rat(2, 5)),
        (rat(2, 1), rat(1, 1), rat(1, 1), rat(1, 1)),
    ];
    let mut cells = 0;
    let mut mismatches = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (cg, dg, cb, db) in payoffs {
        let good = GamePrimitives { c: cg, d: dg };
        let bad = GamePrimitives { c: cb, d: db };
        let good_f = GamePrimitives { c: good.c.to_f64(), d: good.d.to_f64() };
        let bad_f = GamePrimitives { c: bad.c.to_f64(), d: bad.d.to_f64() };
        for (pg, pb, delta) in lemma_grid() {
            cells += 1;
            let expected = outcome_oracle(&delta, &pg, &pb, &good, &bad);
            let exact = classify_at(&delta, &pg, &pb, &good, &bad, tol());
            let float = classify_at(&delta.to_f64(), &pg.to_f64(), &pb.to_f64(), &good_f, &bad_f, tol());
            seen.insert(expected.to_string());
            if exact != expected || float != expected {
                mismatches.push(format!("pG {pg} pB {pb} delta {delta}"));
            }
        }
    }
    outcome(
        mismatches.is_empty() && seen.len() == 4,
        format!(
            "{} of {cells} cells match, outcomes seen: {}{}",
            cells - mismatches.len(),
            seen.into_iter().collect::<Vec<_>>().join(", "),
            mismatches.first().map_or(String::new(), |m| format!("; first mismatch at {m}"))
        ),
    )
}

fn interval_env() -> Environment<Rational> {
    Environment {
        delta: rat(3, 5),
        p_good: rat(2, 5),
        p_bad: rat(2, 5),
        good: GamePrimitives { c: rat(1, 1), d: rat(1, 5) },
        bad: GamePrimitives { c: rat(1, 1), d: rat(1, 1) },
        v_good: rat(1, 1),
        v_bad: rat(-1, 10),
    }
}

fn reshuffle_grid() -> Outcome {
    let env = interval_env();
    let d = design(&env, tol()).unwrap();
    let r_star = d.r_star.clone().map_or(f64::NAN, |r| r.to_f64());
    let interval = only_good_interval(&env, tol()).unwrap().unwrap();
    let (lo, hi) = (rat(2, 27), rat(4, 9));
    let mut wrong = Vec::new();
    for i in 0..=1000 {
        let r = rat(i, 1000);
        let predicted = r > lo && r <= hi;
        let delta_e = (rat(1, 1) - &r) * &env.delta;
        let oracle = outcome_oracle(&delta_e, &env.p_good, &env.p_bad, &env.good, &env.bad);
        let lib = classify_reshuffled(&env, &r, tol()).unwrap();
        let float_env = Environment {
            delta: 0.6,
            p_good: 0.4,
            p_bad: 0.4,
            good: GamePrimitives { c: 1.0, d: 0.2 },
            bad: GamePrimitives { c: 1.0, d: 1.0 },
            v_good: 1.0,
            v_bad: -0.1,
        };
        let lib_f = classify_reshuffled(&float_env, &(i as f64 / 1000.0), tol()).unwrap();
        let only_good = |o: CooperationOutcome| o == CooperationOutcome::OnlyGood;
        if only_good(oracle) != predicted
            || only_good(lib) != predicted
            || only_good(lib_f) != predicted
            || interval.contains(&r, tol()) != predicted
        {
            wrong.push(i);
        }
    }
    let ok = (r_star - 4.0 / 9.0).abs() < 1e-9 && wrong.is_empty();
    outcome(
        ok,
        format!(
            "r_star = {r_star:.12}, OnlyGood on ({}, {}], {} grid points disagree",
            interval.lower,
            interval.upper,
            wrong.len()
        ),
    )
}

fn static_envs() -> Vec<(&'static str, TaskEnvironment<Rational>)> {
    let base = reference::<Rational>();
    let mut good_specialists = base.clone();
    good_specialists.q_good = rat(3, 5);
    good_specialists.q_bad = rat(2, 5);
    let mut full = base.clone();
    full.delta = rat(4, 5);
    let mut none = base.clone();
    none.v_bad = rat(-2, 1);
    vec![
        ("reference", base),
        ("good specialists", good_specialists),
        ("full specialisation", full),
        ("no cooperation", none),
    ]
}

fn static_optimality() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, env) in static_envs() {
        let opt = optimal_static(&env, tol()).unwrap();
        let (grid, _) = static_grid_best(&env, 20);
        let excess = (grid.clone() - opt.social_value.clone()).to_f64();
        ok &= excess <= 1e-9;
        details.push(format!("{name}: optimum {} vs grid {}", opt.social_value, grid));
    }
    outcome(ok, details.join("; "))
}

fn reactive_minimality() -> Outcome {
    let env = reference::<f64>();
    let mut ok = true;
    let mut details = Vec::new();
    for observe in [true, false] {
        let designed = if observe {
            design_observable(&env, tol()).unwrap()
        } else {
            design_unobservable(&env, tol()).unwrap()
        };
        let best = reactive_grid_min(&env, observe, 5, 100, Tolerance(1e-12));
        let grid_share = best.map_or(f64::INFINITY, |b| b.2);
        ok &= grid_share >= designed.bad_share - 1e-9;
        details.push(format!(
            "{}: designed {:.6}, grid minimum {:.6}",
            if observe { "observable" } else { "unobservable" },
            designed.bad_share,
            grid_share
        ));
    }
    outcome(ok, details.join("; "))
}

fn simulation_agreement() -> Outcome {
    let env = reference::<f64>();
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for (observe, expected, seed) in [(true, 7.0 / 16.0, 11), (false, 32.0 / 59.0, 12)] {
        let d = if observe {
            design_observable(&env, tol()).unwrap()
        } else {
            design_unobservable(&env, tol()).unwrap()
        };
        let config = SimConfig::for_reactive(&env, &d, 10_000, 10_000, seed).unwrap();
        let report = run(&config).unwrap();
        let z = (report.bad_share - expected) / report.bad_share_std_error;
        ok &= z.abs() <= 3.0;
        let gains = estimate_deviation_gains(&config, 20_000).unwrap();
        let mut worst_z = f64::NEG_INFINITY;
        let mut binding_z = 0.0_f64;
        for g in gains.iter().filter(|g| g.prescribed_coop) {
            let zg = g.mean / g.std_error;
            if g.analytic.abs() < 1e-9 {
                binding_z = binding_z.max(zg.abs());
                ok &= zg.abs() <= 3.0;
            } else {
                ok &= g.mean - 3.0 * g.std_error <= 0.0;
            }
            worst_z = worst_z.max(zg);
        }
        details.push(format!(
            "{}: bad share {:.5} ({z:+.2} SE), binding gain {binding_z:.2} SE from 0",
            if observe { "observable" } else { "unobservable" },
            report.bad_share
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    outcome(ok, format!("{} in {elapsed:.1?}", details.join("; ")))
}

fn period_limit() -> Outcome {
    let env = reference::<f64>();
    let periods = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let rows = period_sweep(&env, &periods, tol()).unwrap();
    let unobs: Vec<f64> = rows.iter().map(|r| r.unobservable_gap.unwrap_or(f64::NAN)).collect();
    let obs: Vec<f64> = rows.iter().map(|r| r.observable_gap.unwrap_or(f64::NAN)).collect();
    let monotone = unobs.windows(2).all(|w| w[1] < w[0]);
    let unobs_ratio = unobs[4] / unobs[0];
    let obs_ratio = obs.iter().map(|g| g / obs[0]).fold(f64::INFINITY, f64::min);
    let unobs_ok = monotone && unobs_ratio < 0.1;
    let obs_ok = obs_ratio > 0.5;
    outcome(
        unobs_ok && obs_ok,
        format!(
            "unobservable gap {} ({}), observable gap {} (min {:.1}% of T = 1, needs > 50%)",
            if unobs_ok { "ok" } else { "fails" },
            format_args!("{:.1}% of T = 1 at T = 1/16", 100.0 * unobs_ratio),
            if obs_ok { "ok" } else { "fails" },
            100.0 * obs_ratio
        ),
    )
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "hybrid assignment weight is 1/3", hybrid_weight),
        (2, "observable reactive optimum", || reactive_case(true, rat(5, 9), rat(7, 16))),
        (3, "unobservable reactive optimum", || reactive_case(false, rat(5, 27), rat(32, 59))),
        (4, "value ordering static <= unobservable <= observable", value_ordering),
        (5, "classification matches the brute-force oracle", lemma_oracle),
        (6, "reshuffling interval on the r grid", reshuffle_grid),
        (7, "static optimum beats every grid structure", static_optimality),
        (8, "designed chains have minimal bad occupancy", reactive_minimality),
        (9, "simulation agrees with the analytic chain", simulation_agreement),
        (10, "period-length limit of the reactive gaps", period_limit),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let known = KNOWN_FAILING.contains(&id);
        let status = match (result.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        if result.pass {
            passed += 1;
        } else if !known {
            unexpected += 1;
        }
        println!(
            "criterion {id:>2}: {status}: {name}: {} [{:.2?}]",
            result.detail,
            start.elapsed()
        );
    }
    println!("{passed}/10 criteria pass");
    if unexpected > 0 {
        std::process::exit(1);
    }
}

