//! Finite symmetric stage games.
//!
//! A game is stored in symmetric form: the payoff of a player depends on their
//! own action and on how many *other* players cooperate. The six structural
//! properties the rest of the crate relies on are checked by enumerating
//! cooperator counts, which covers every joint profile up to relabelling.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Quantity, Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    C,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameLabel {
    Good,
    Bad,
}

impl fmt::Display for GameLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameLabel::Good => write!(f, "Good"),
            GameLabel::Bad => write!(f, "Bad"),
        }
    }
}

/// Payoff table `π(own action, #other cooperators)` for `n` players.
#[derive(Debug, Clone, PartialEq)]
pub struct StageGame<S = f64> {
    n: usize,
    label: GameLabel,
    /// `cooperate[k] = π(C, k)` for `k = 0..n`.
    cooperate: Vec<S>,
    /// `defect[k] = π(N, k)`.
    defect: Vec<S>,
}

/// Cooperation benefit `c` and deviation temptation `d` of a stage game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamePrimitives<S = f64> {
    pub c: S,
    pub d: S,
}

impl<S: Scalar> GamePrimitives<S> {
    pub fn new(c: S, d: S) -> Result<Self> {
        if !(c > S::zero() && d > S::zero()) {
            return Err(Error::invalid(format!(
                "cooperation benefit and deviation temptation must be positive (c = {c}, d = {d})"
            )));
        }
        Ok(GamePrimitives { c, d })
    }

    /// Multiplies both primitives by `factor`.
    pub fn scaled(&self, factor: &S) -> Self {
        GamePrimitives {
            c: self.c.clone() * factor.clone(),
            d: self.d.clone() * factor.clone(),
        }
    }
}

impl<S: Scalar> StageGame<S> {
    /// Builds a game from its two payoff rows, `π(C, 0..n)` and `π(N, 0..n)`.
    pub fn new(label: GameLabel, cooperate: Vec<S>, defect: Vec<S>) -> Result<Self> {
        let n = cooperate.len();
        if n < 2 {
            return Err(Error::invalid("a stage game needs at least two players"));
        }
        if defect.len() != n {
            return Err(Error::invalid(format!(
                "payoff rows differ in length ({} vs {})",
                n,
                defect.len()
            )));
        }
        Ok(StageGame {
            n,
            label,
            cooperate,
            defect,
        })
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> GameLabel {
        self.label
    }

    /// `π(action, others)` where `others` counts cooperating opponents.
    pub fn payoff(&self, action: Action, others: usize) -> &S {
        match action {
            Action::C => &self.cooperate[others],
            Action::N => &self.defect[others],
        }
    }

    /// Sum of payoffs when exactly `k` of the `n` players cooperate.
    pub fn aggregate(&self, k: usize) -> S {
        let mut total = S::zero();
        if k > 0 {
            total = total + S::from_usize(k) * self.cooperate[k - 1].clone();
        }
        if k < self.n {
            total = total + S::from_usize(self.n - k) * self.defect[k].clone();
        }
        total
    }

    /// Table differences, without checking the structural properties.
    pub fn raw_primitives(&self) -> GamePrimitives<S> {
        let last = self.n - 1;
        GamePrimitives {
            c: self.cooperate[last].clone() - self.defect[0].clone(),
            d: self.defect[last].clone() - self.cooperate[last].clone(),
        }
    }

    /// `(c, d)` for a game satisfying every structural property.
    pub fn primitives(&self, tol: Tolerance) -> Result<GamePrimitives<S>> {
        let report = check_properties(self, tol);
        if let Some(failed) = report.first_failure() {
            return Err(Error::invalid(format!(
                "stage game violates property {}: {}",
                failed.property,
                failed.description()
            )));
        }
        let p = self.raw_primitives();
        GamePrimitives::new(p.c, p.d)
    }
}

/// The two-player prisoner's dilemma with mutual-cooperation payoff `c`,
/// temptation bonus `d` and sucker loss `a`.
pub fn make_pd<S: Scalar>(c: S, d: S, a: S, label: GameLabel) -> Result<StageGame<S>> {
    if !(c > S::zero() && d > S::zero()) {
        return Err(Error::invalid("prisoner's dilemma needs c > 0 and d > 0"));
    }
    // Row index = number of cooperating opponents.
    let cooperate = vec![-a, c.clone()];
    let defect = vec![S::zero(), c + d];
    StageGame::new(label, cooperate, defect)
}

/// Outcome of checking one structural property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property: u8,
    pub holds: bool,
    /// Violating joint profile; player 0 is the focal player where relevant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Action>>,
}

impl PropertyCheck {
    pub fn description(&self) -> &'static str {
        match self.property {
            1 => "payoffs depend only on own action and the count of cooperators",
            2 => "full cooperation uniquely maximises aggregate payoff",
            3 => "not cooperating is strictly dominant",
            4 => "full non-cooperation of others minimises a player's best-response payoff",
            5 => "full non-cooperation uniquely maximises aggregate payoff among non-full profiles",
            6 => "the gain from not cooperating is smallest when all others cooperate",
            _ => "unknown property",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn holds(&self, property: u8) -> bool {
        self.checks
            .iter()
            .find(|c| c.property == property)
            .is_some_and(|c| c.holds)
    }

    pub fn first_failure(&self) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| !c.holds)
    }
}

/// Profile in which the focal player 0 plays `own` and the first `others`
/// opponents cooperate.
fn focal_profile(n: usize, own: Action, others: usize) -> Vec<Action> {
    let mut p = vec![own];
    p.extend((0..n - 1).map(|i| if i < others { Action::C } else { Action::N }));
    p
}

/// Profile with the first `k` players cooperating.
fn count_profile(n: usize, k: usize) -> Vec<Action> {
    (0..n).map(|i| if i < k { Action::C } else { Action::N }).collect()
}

fn check(property: u8, witness: Option<Vec<Action>>) -> PropertyCheck {
    PropertyCheck {
        property,
        holds: witness.is_none(),
        witness,
    }
}

/// Checks all six structural properties.
///
/// Strict inequalities must hold by more than `tol`; the weak inequality of
/// property 6 and the argmin of property 4 allow ties within `tol`.
pub fn check_properties<S: Scalar>(game: &StageGame<S>, tol: Tolerance) -> PropertyReport {
    let n = game.n;
    let full = game.aggregate(n);
    let none = game.aggregate(0);

    let p2 = (0..n)
        .find(|&k| !tol.lt(&game.aggregate(k), &full))
        .map(|k| count_profile(n, k));

    let p3 = (0..n)
        .find(|&j| !tol.lt(game.payoff(Action::C, j), game.payoff(Action::N, j)))
        .map(|j| focal_profile(n, Action::C, j));

    let best_response = |j: usize| {
        S::max_of(
            game.payoff(Action::C, j).clone(),
            game.payoff(Action::N, j).clone(),
        )
    };
    let floor = best_response(0);
    let p4 = (1..n)
        .find(|&j| !tol.le(&floor, &best_response(j)))
        .map(|j| focal_profile(n, Action::N, j));

    let p5 = (1..n)
        .find(|&k| !tol.lt(&game.aggregate(k), &none))
        .map(|k| count_profile(n, k));

    let gain = |j: usize| game.payoff(Action::N, j).clone() - game.payoff(Action::C, j).clone();
    let top_gain = gain(n - 1);
    let p6 = (0..n - 1)
        .find(|&j| !tol.le(&top_gain, &gain(j)))
        .map(|j| focal_profile(n, Action::N, j));

    PropertyReport {
        checks: vec![
            check(1, None),
            check(2, p2),
            check(3, p3),
            check(4, p4),
            check(5, p5),
            check(6, p6),
        ],
    }
}

/// JSON form: `{n, label, payoff: [[π(C,0..n)], [π(N,0..n)]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageGameSpec {
    pub n: usize,
    pub label: GameLabel,
    pub payoff: [Vec<Quantity>; 2],
}

impl StageGameSpec {
    pub fn to_game<S: Scalar>(&self) -> Result<StageGame<S>> {
        if self.payoff[0].len() != self.n || self.payoff[1].len() != self.n {
            return Err(Error::invalid(format!(
                "payoff rows must have n = {} entries each",
                self.n
            )));
        }
        StageGame::new(
            self.label,
            self.payoff[0].iter().map(Quantity::get).collect(),
            self.payoff[1].iter().map(Quantity::get).collect(),
        )
    }
}

impl StageGame<f64> {
    pub fn to_spec(&self) -> Result<StageGameSpec> {
        let row = |v: &[f64]| v.iter().map(|&x| Quantity::from_f64(x)).collect::<Result<Vec<_>>>();
        Ok(StageGameSpec {
            n: self.n,
            label: self.label,
            payoff: [row(&self.cooperate)?, row(&self.defect)?],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn pd_table_layout() {
        let g = make_pd(1.0, 1.0, 3.0, GameLabel::Good).unwrap();
        // (C,C) = (1,1), (C,N) = (-3, 2), (N,C) = (2,-3), (N,N) = (0,0)
        assert_eq!(*g.payoff(Action::C, 1), 1.0);
        assert_eq!(*g.payoff(Action::C, 0), -3.0);
        assert_eq!(*g.payoff(Action::N, 1), 2.0);
        assert_eq!(*g.payoff(Action::N, 0), 0.0);
        assert!(check_properties(&g, tol()).all_hold());
        assert_eq!(g.primitives(tol()).unwrap(), GamePrimitives { c: 1.0, d: 1.0 });
    }

    #[test]
    fn pd_with_small_sucker_loss_fails_with_witness() {
        let g = make_pd(1.0, 1.0, 1.5, GameLabel::Bad).unwrap();
        let report = check_properties(&g, tol());
        assert!(!report.holds(5));
        let failure = report.first_failure().unwrap();
        assert_eq!(failure.property, 5);
        assert_eq!(failure.witness.as_deref(), Some(&[Action::C, Action::N][..]));
        assert!(g.primitives(tol()).is_err());
    }

    #[test]
    fn pd_boundary_a_equals_c_plus_d() {
        let exact = make_pd(
            Rational::from_ratio(1, 1),
            Rational::from_ratio(1, 1),
            Rational::from_ratio(2, 1),
            GameLabel::Good,
        )
        .unwrap();
        let report = check_properties(&exact, tol());
        assert!(report.holds(6), "weak inequality holds with equality");
        assert!(!report.holds(5), "argmax over non-full profiles is tied");

        let above = make_pd(1.0, 1.0, 2.0001, GameLabel::Good).unwrap();
        assert!(check_properties(&above, tol()).all_hold());
    }

    #[test]
    fn equal_payoffs_break_strict_dominance() {
        let g = StageGame::new(GameLabel::Good, vec![-3.0, 1.0], vec![-3.0, 2.0]).unwrap();
        let report = check_properties(&g, tol());
        assert!(!report.holds(3));
        assert_eq!(
            report.checks[2].witness.as_deref(),
            Some(&[Action::C, Action::N][..])
        );
    }

    #[test]
    fn pd_primitives_follow_parameters() {
        let g = make_pd(2.0, 0.5, 3.0, GameLabel::Good).unwrap();
        assert_eq!(g.primitives(tol()).unwrap(), GamePrimitives { c: 2.0, d: 0.5 });
    }

    #[test]
    fn make_pd_rejects_nonpositive_primitives() {
        assert!(make_pd(0.0, 1.0, 3.0, GameLabel::Good).is_err());
        assert!(make_pd(1.0, -1.0, 3.0, GameLabel::Good).is_err());
    }

    #[test]
    fn public_goods_table_fails_non_cooperation_property() {
        // Each cooperator gives 1 to every other player at a private cost of 1.5.
        let coop: Vec<f64> = (0..3).map(|k| k as f64 - 1.5).collect();
        let defect: Vec<f64> = (0..3).map(|k| k as f64).collect();
        let g = StageGame::new(GameLabel::Good, coop, defect).unwrap();
        // Direct table differences: c = π(C,2) − π(N,0), d = π(N,2) − π(C,2).
        assert_eq!(g.raw_primitives(), GamePrimitives { c: 0.5, d: 1.5 });
        let report = check_properties(&g, tol());
        assert!(report.holds(2) && report.holds(3) && report.holds(6));
        assert!(!report.holds(5), "one lone cooperator beats universal defection");
        assert!(g.primitives(tol()).is_err());
    }

    #[test]
    fn three_player_game_with_all_properties() {
        let g = StageGame::new(
            GameLabel::Bad,
            vec![-6.0, -5.0, 2.0],
            vec![0.0, 1.0, 3.0],
        )
        .unwrap();
        assert!(check_properties(&g, tol()).all_hold());
        assert_eq!(g.primitives(tol()).unwrap(), GamePrimitives { c: 2.0, d: 1.0 });
    }

    #[test]
    fn spec_round_trips_through_json() {
        let g = make_pd(1.0, 1.0, 3.0, GameLabel::Good).unwrap();
        let json = serde_json::to_string(&g.to_spec().unwrap()).unwrap();
        assert_eq!(json, r#"{"n":2,"label":"Good","payoff":[[-3.0,1.0],[0.0,2.0]]}"#);
        let back: StageGameSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_game::<f64>().unwrap(), g);
        assert!(serde_json::from_str::<StageGameSpec>(
            r#"{"n":2,"label":"Good","payoff":[[-3,1],[0,2]],"extra":1}"#
        )
        .is_err());
    }
}
