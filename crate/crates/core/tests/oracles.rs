mod common;

use common::{outcome_oracle, rat, reactive_grid_min, reference, static_grid_best};
use coopdesign::equilibrium::{classify_at, CooperationOutcome, Environment};
use coopdesign::reactive_design::{design_observable, design_unobservable, steady_state};
use coopdesign::reshuffle_design::{design, only_good_interval};
use coopdesign::scalar::{Quantity, Rational, Scalar, Tolerance};
use coopdesign::stage_games::GamePrimitives;
use coopdesign::static_assignment::{optimal_static, StructureKind, TaskEnvironment};
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn ratio(max: i64) -> impl Strategy<Value = Rational> {
    (1..max).prop_map(move |n| rat(n, max))
}

fn primitives() -> impl Strategy<Value = GamePrimitives<Rational>> {
    (1..40i64, 1..40i64).prop_map(|(c, d)| GamePrimitives { c: rat(c, 10), d: rat(d, 10) })
}

fn task_env() -> impl Strategy<Value = TaskEnvironment<Rational>> {
    (ratio(20), ratio(20), ratio(20), ratio(20), 1..30i64, 1..30i64, 1..30i64, 1..30i64, 1..20i64).prop_map(
        |(delta, a_good, a_bad, q_good, cg, dg, cb, db, vb)| TaskEnvironment {
            delta,
            a_good,
            a_bad,
            q_bad: rat(1, 1) - &q_good,
            q_good,
            good: GamePrimitives { c: rat(cg, 10), d: rat(dg, 10) },
            bad: GamePrimitives { c: rat(cb, 10), d: rat(db, 10) },
            v_good: rat(1, 1),
            v_bad: rat(-vb, 20),
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn classification_matches_enumeration(
        delta in ratio(50),
        pg in 0..=20i64,
        share in 0..=20i64,
        good in primitives(),
        bad in primitives(),
    ) {
        let pg = rat(pg, 20);
        let pb = (rat(1, 1) - &pg) * rat(share, 20);
        let expected = outcome_oracle(&delta, &pg, &pb, &good, &bad);
        prop_assert_eq!(classify_at(&delta, &pg, &pb, &good, &bad, tol()), expected);
    }

    #[test]
    fn static_optimum_dominates_grid(env in task_env()) {
        let opt = optimal_static(&env, tol()).unwrap();
        let (grid, structure) = static_grid_best(&env, 10);
        prop_assert!(grid <= opt.social_value, "grid {} via {} beats {}", grid, structure, opt.social_value);
        let (mass, good) = opt.balance_residual(&env);
        prop_assert_eq!(mass, rat(0, 1));
        prop_assert_eq!(good, rat(0, 1));
    }

    #[test]
    fn float_and_exact_static_agree(env in task_env()) {
        let exact = optimal_static(&env, tol()).unwrap();
        let float_env = TaskEnvironment {
            delta: env.delta.to_f64(),
            a_good: env.a_good.to_f64(),
            a_bad: env.a_bad.to_f64(),
            q_good: env.q_good.to_f64(),
            q_bad: env.q_bad.to_f64(),
            good: GamePrimitives { c: env.good.c.to_f64(), d: env.good.d.to_f64() },
            bad: GamePrimitives { c: env.bad.c.to_f64(), d: env.bad.d.to_f64() },
            v_good: env.v_good.to_f64(),
            v_bad: env.v_bad.to_f64(),
        };
        let float = optimal_static(&float_env, tol()).unwrap();
        prop_assert!((float.social_value - exact.social_value.to_f64()).abs() < 1e-9);
    }

    #[test]
    fn decimal_quantities_round_trip(n in -100_000i64..100_000, scale in 0u32..5) {
        let text = format!("{}", n as f64 / 10f64.powi(scale as i32));
        let q: Quantity = text.parse().unwrap();
        let json = serde_json::to_string(&q).unwrap();
        let back: Quantity = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, q);
    }
}

#[test]
fn zero_arrival_games_are_not_cooperated() {
    let g = GamePrimitives { c: rat(1, 1), d: rat(1, 100) };
    let o = classify_at(&rat(9, 10), &rat(1, 2), &rat(0, 1), &g, &g, tol());
    assert_eq!(o, CooperationOutcome::OnlyGood);
    let o = classify_at(&rat(9, 10), &rat(0, 1), &rat(0, 1), &g, &g, tol());
    assert_eq!(o, CooperationOutcome::None);
}

#[test]
fn ties_favour_cooperation() {
    // δ/(1−δ) = 1, so p·c = d exactly binds.
    let g = GamePrimitives { c: rat(1, 1), d: rat(1, 2) };
    let b = GamePrimitives { c: rat(1, 1), d: rat(1, 1) };
    let o = classify_at(&rat(1, 2), &rat(1, 2), &rat(1, 2), &g, &b, tol());
    assert_eq!(o, CooperationOutcome::Total);
    assert_eq!(o, outcome_oracle(&rat(1, 2), &rat(1, 2), &rat(1, 2), &g, &b));
}

#[test]
fn reshuffle_rate_isolates_good_games() {
    let env = Environment {
        delta: rat(3, 5),
        p_good: rat(1, 2),
        p_bad: rat(1, 2),
        good: GamePrimitives { c: rat(1, 1), d: rat(1, 5) },
        bad: GamePrimitives { c: rat(1, 1), d: rat(1, 1) },
        v_good: rat(1, 1),
        v_bad: rat(-1, 10),
    };
    let d = design(&env, tol()).unwrap();
    assert_eq!(d.r_star, Some(rat(11, 21)));
    assert_eq!(d.outcome, CooperationOutcome::OnlyGood);
    let interval = only_good_interval(&env, tol()).unwrap().unwrap();
    assert!(interval.contains(&rat(11, 21), tol()));
    assert!(!interval.contains(&rat(12, 21), tol()));
}

#[test]
fn static_regimes() {
    let base = reference::<Rational>();
    assert_eq!(optimal_static(&base, tol()).unwrap().kind, StructureKind::Hybrid);
    let mut full = base.clone();
    full.delta = rat(4, 5);
    assert_eq!(optimal_static(&full, tol()).unwrap().kind, StructureKind::FullSpecialization);
    let mut none = base.clone();
    none.v_bad = rat(-2, 1);
    let opt = optimal_static(&none, tol()).unwrap();
    assert_eq!(opt.social_value, rat(0, 1));
}

#[test]
fn designed_chains_are_minimal_on_a_grid() {
    let env = reference::<f64>();
    for (observe, designed) in [
        (true, design_observable(&env, tol()).unwrap()),
        (false, design_unobservable(&env, tol()).unwrap()),
    ] {
        let (_, _, share) = reactive_grid_min(&env, observe, 4, 60, Tolerance(1e-12)).unwrap();
        assert!(share >= designed.bad_share - 1e-9, "{observe}: {share} < {}", designed.bad_share);
    }
}

#[test]
fn steady_states_are_distributions() {
    let env = reference::<Rational>();
    for d in [design_observable(&env, tol()).unwrap(), design_unobservable(&env, tol()).unwrap()] {
        let model = coopdesign::reactive_design::design::chain_model(&env);
        let pi = steady_state(&d.chain, &model.arrivals).unwrap();
        let total = pi.iter().fold(rat(0, 1), |acc, p| acc + p);
        assert_eq!(total, rat(1, 1));
        assert!(pi.iter().all(|p| *p >= rat(0, 1)));
    }
}
