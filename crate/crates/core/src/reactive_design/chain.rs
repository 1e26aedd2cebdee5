//! Reactive assignments as finite Markov chains over assignment phases.
//!
//! Each state fixes the team's task for the period. The successor is drawn
//! from `on_good` when the designer sees a good game arrive and from
//! `otherwise` in every other case. Bad games are never conditioned on.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::linalg;
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerance};
use crate::stage_games::{GameLabel, GamePrimitives};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "tG")]
    Good,
    #[serde(rename = "tB")]
    Bad,
}

/// Sparse successor distribution.
pub type Row<S> = Vec<(usize, S)>;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState<S = f64> {
    pub task: Task,
    pub name: String,
    /// Successors after an observed good game; `None` when unconditional.
    pub on_good: Option<Row<S>>,
    pub otherwise: Row<S>,
}

impl<S: Scalar> ChainState<S> {
    pub fn unconditional(task: Task, name: impl Into<String>, row: Row<S>) -> Self {
        ChainState {
            task,
            name: name.into(),
            on_good: None,
            otherwise: row,
        }
    }

    /// Successor distribution, given whether a good game was observed.
    pub fn row_after(&self, good_game: bool) -> &Row<S> {
        match (&self.on_good, good_game) {
            (Some(row), true) => row,
            _ => &self.otherwise,
        }
    }
}

/// Game arrival probabilities `(p_G, p_B)` for each task.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrivals<S = f64> {
    pub on_good_task: (S, S),
    pub on_bad_task: (S, S),
}

impl<S: Scalar> Arrivals<S> {
    /// Good games only on `t_G`, bad games only on `t_B`.
    pub fn tasks(a_good: S, a_bad: S) -> Self {
        Arrivals {
            on_good_task: (a_good, S::zero()),
            on_bad_task: (S::zero(), a_bad),
        }
    }

    /// Both games arrive irrespective of the task.
    pub fn uniform(p_good: S, p_bad: S) -> Self {
        Arrivals {
            on_good_task: (p_good.clone(), p_bad.clone()),
            on_bad_task: (p_good, p_bad),
        }
    }

    pub fn of(&self, task: Task) -> &(S, S) {
        match task {
            Task::Good => &self.on_good_task,
            Task::Bad => &self.on_bad_task,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (pg, pb) in [&self.on_good_task, &self.on_bad_task] {
            if *pg < S::zero() || *pb < S::zero() || pg.clone() + pb.clone() > S::one() {
                return Err(Error::invalid(format!(
                    "arrival probabilities ({pg}, {pb}) must be non-negative and sum to at most 1"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentChain<S = f64> {
    pub states: Vec<ChainState<S>>,
    pub observe_good: bool,
    pub start: usize,
}

impl<S: Scalar> AssignmentChain<S> {
    pub fn new(states: Vec<ChainState<S>>, observe_good: bool, start: usize) -> Result<Self> {
        let chain = AssignmentChain {
            states,
            observe_good,
            start,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.states.len();
        if self.start >= n {
            return Err(Error::invalid("start state out of range"));
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.on_good.is_some() && !self.observe_good {
                return Err(Error::invalid(format!(
                    "state {i} conditions on good games the designer cannot observe"
                )));
            }
            for row in s.on_good.iter().chain(std::iter::once(&s.otherwise)) {
                let mut total = S::zero();
                for (j, p) in row {
                    if *j >= n {
                        return Err(Error::invalid(format!("state {i} points at missing state {j}")));
                    }
                    if *p < S::zero() {
                        return Err(Error::invalid(format!("negative transition probability in state {i}")));
                    }
                    total = total + p.clone();
                }
                let ok = if S::EXACT {
                    total == S::one()
                } else {
                    (total.to_f64() - 1.0).abs() <= 1e-9
                };
                if !ok {
                    return Err(Error::invalid(format!("row of state {i} sums to {total}")));
                }
            }
        }
        let reachable = self.reachable();
        if let Some(i) = reachable.iter().position(|r| !r) {
            return Err(Error::invalid(format!("state {i} is unreachable from the start")));
        }
        Ok(())
    }

    /// States reachable from the start under some outcome sequence.
    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([self.start]);
        seen[self.start] = true;
        while let Some(s) = queue.pop_front() {
            let st = &self.states[s];
            for row in st.on_good.iter().chain(std::iter::once(&st.otherwise)) {
                for (j, p) in row {
                    if !p.is_zero() && !seen[*j] {
                        seen[*j] = true;
                        queue.push_back(*j);
                    }
                }
            }
        }
        seen
    }

    /// Period-to-period transition matrix under the given arrivals.
    pub fn transition_matrix(&self, arrivals: &Arrivals<S>) -> Vec<Vec<S>> {
        let n = self.len();
        let mut p = vec![vec![S::zero(); n]; n];
        for (i, st) in self.states.iter().enumerate() {
            let pg = arrivals.of(st.task).0.clone();
            match &st.on_good {
                Some(row) if self.observe_good => {
                    for (j, q) in row {
                        p[i][*j] = p[i][*j].clone() + pg.clone() * q.clone();
                    }
                    for (j, q) in &st.otherwise {
                        p[i][*j] = p[i][*j].clone() + (S::one() - pg.clone()) * q.clone();
                    }
                }
                _ => {
                    for (j, q) in &st.otherwise {
                        p[i][*j] = p[i][*j].clone() + q.clone();
                    }
                }
            }
        }
        p
    }

    /// Graphviz rendering for documentation.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{name}\" {{");
        let _ = writeln!(out, "  rankdir=LR;");
        for (i, s) in self.states.iter().enumerate() {
            let shape = match s.task {
                Task::Good => "circle",
                Task::Bad => "box",
            };
            let _ = writeln!(out, "  s{i} [label=\"{}\", shape={shape}];", s.name);
        }
        for (i, s) in self.states.iter().enumerate() {
            if let Some(row) = &s.on_good {
                for (j, p) in row {
                    let _ = writeln!(out, "  s{i} -> s{j} [label=\"G: {p}\"];");
                }
            }
            let tag = if s.on_good.is_some() { "else: " } else { "" };
            for (j, p) in &s.otherwise {
                let _ = writeln!(out, "  s{i} -> s{j} [label=\"{tag}{p}\"];");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Constant assignment with `t_G` drawn with probability `nu` every period.
pub fn constant_mix<S: Scalar>(nu: S) -> Result<AssignmentChain<S>> {
    if nu < S::zero() || nu > S::one() {
        return Err(Error::invalid(format!("assignment weight {nu} outside [0, 1]")));
    }
    if nu == S::one() {
        return AssignmentChain::new(vec![ChainState::unconditional(Task::Good, "tG", vec![(0, S::one())])], false, 0);
    }
    if nu.is_zero() {
        return AssignmentChain::new(vec![ChainState::unconditional(Task::Bad, "tB", vec![(0, S::one())])], false, 0);
    }
    let row = vec![(0, nu.clone()), (1, S::one() - nu)];
    AssignmentChain::new(
        vec![
            ChainState::unconditional(Task::Good, "tG", row.clone()),
            ChainState::unconditional(Task::Bad, "tB", row),
        ],
        false,
        0,
    )
}

/// Which games are played cooperatively in each state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub good: bool,
    pub bad: bool,
}

impl Labels {
    pub const ALL: Labels = Labels { good: true, bad: true };

    pub fn get(&self, game: GameLabel) -> bool {
        match game {
            GameLabel::Good => self.good,
            GameLabel::Bad => self.bad,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slack<S = f64> {
    pub state: usize,
    pub game: GameLabel,
    /// `δ·E[V(next) | state, game] − d_game`.
    pub value: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution<S = f64> {
    /// Stationary distribution over states.
    pub steady: Vec<S>,
    /// Steady-state probability of each `(state, outcome)` pair.
    pub outcome_mass: Vec<OutcomeMass<S>>,
    pub values: Vec<S>,
    /// Slacks at on-path `(state, game)` pairs.
    pub slacks: Vec<Slack<S>>,
    pub labels: Vec<Labels>,
    pub good_share: S,
    pub bad_share: S,
    pub social_value: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeMass<S = f64> {
    pub good: S,
    pub bad: S,
    pub none: S,
}

impl<S: Scalar> ChainSolution<S> {
    pub fn slack(&self, state: usize, game: GameLabel) -> Option<&Slack<S>> {
        self.slacks.iter().find(|s| s.state == state && s.game == game)
    }

    pub fn min_slack(&self) -> Option<&Slack<S>> {
        self.slacks.iter().fold(None, |best: Option<&Slack<S>>, s| match best {
            Some(b) if b.value <= s.value => Some(b),
            _ => Some(s),
        })
    }
}

/// Model inputs shared by the chain solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel<S = f64> {
    pub arrivals: Arrivals<S>,
    pub good: GamePrimitives<S>,
    pub bad: GamePrimitives<S>,
    pub delta: S,
    pub v_good: S,
    pub v_bad: S,
}

impl<S: Scalar> ChainModel<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= S::zero() && self.delta < S::one()) {
            return Err(Error::invalid(format!("delta = {} must lie in [0, 1)", self.delta)));
        }
        self.arrivals.validate()
    }

    fn primitives(&self, game: GameLabel) -> &GamePrimitives<S> {
        match game {
            GameLabel::Good => &self.good,
            GameLabel::Bad => &self.bad,
        }
    }
}

/// Stationary distribution on the recurrent class reached from the start.
pub fn steady_state<S: Scalar>(chain: &AssignmentChain<S>, arrivals: &Arrivals<S>) -> Result<Vec<S>> {
    chain.validate()?;
    arrivals.validate()?;
    let p = chain.transition_matrix(arrivals);
    let n = chain.len();
    let class = recurrent_class(&p, chain.start)
        .ok_or_else(|| Error::internal("no recurrent class reachable from the start"))?;
    let m = class.len();
    // Balance equations π = πP on the class, the last replaced by Σπ = 1.
    let mut a = vec![vec![S::zero(); m]; m];
    let mut b = vec![S::zero(); m];
    for (row, &j) in class.iter().enumerate().take(m - 1) {
        for (col, &i) in class.iter().enumerate() {
            let mut v = -p[i][j].clone();
            if i == j {
                v = v + S::one();
            }
            a[row][col] = v;
        }
    }
    for col in 0..m {
        a[m - 1][col] = S::one();
    }
    b[m - 1] = S::one();
    let sol = linalg::solve(a, b)?;
    let mut pi = vec![S::zero(); n];
    for (k, &i) in class.iter().enumerate() {
        pi[i] = sol[k].clone();
    }
    Ok(pi)
}

/// First closed communicating class met in breadth-first order from `start`.
fn recurrent_class<S: Scalar>(p: &[Vec<S>], start: usize) -> Option<Vec<usize>> {
    let n = p.len();
    let reach_from = |s: usize| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !p[i][j].is_zero() && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    };
    let mut order = Vec::new();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for j in 0..n {
            if !p[i][j].is_zero() && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    let reach: Vec<Vec<bool>> = (0..n).map(reach_from).collect();
    order.into_iter().find_map(|s| {
        let class: Vec<usize> = (0..n).filter(|&j| reach[s][j]).collect();
        class.iter().all(|&j| reach[j][s]).then_some(class)
    })
}

/// Solves values and slacks given cooperation labels for every state.
pub fn solve_with_labels<S: Scalar>(
    chain: &AssignmentChain<S>,
    model: &ChainModel<S>,
    labels: &[Labels],
) -> Result<ChainSolution<S>> {
    model.validate()?;
    if labels.len() != chain.len() {
        return Err(Error::invalid("one label per state required"));
    }
    let steady = steady_state(chain, &model.arrivals)?;
    let p = chain.transition_matrix(&model.arrivals);
    let n = chain.len();

    let benefit: Vec<S> = chain
        .states
        .iter()
        .zip(labels)
        .map(|(st, l)| {
            let (pg, pb) = model.arrivals.of(st.task);
            let mut b = S::zero();
            if l.good {
                b = b + pg.clone() * model.good.c.clone();
            }
            if l.bad {
                b = b + pb.clone() * model.bad.c.clone();
            }
            b
        })
        .collect();
    let mut a = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut v = -(model.delta.clone() * p[i][j].clone());
            if i == j {
                v = v + S::one();
            }
            a[i][j] = v;
        }
    }
    let values = linalg::solve(a, benefit)?;

    let on_path = chain.reachable();
    let mut slacks = Vec::new();
    for (i, st) in chain.states.iter().enumerate() {
        if !on_path[i] {
            continue;
        }
        let (pg, pb) = model.arrivals.of(st.task);
        for (game, prob) in [(GameLabel::Good, pg), (GameLabel::Bad, pb)] {
            if prob.is_zero() {
                continue;
            }
            let row = st.row_after(game == GameLabel::Good && chain.observe_good);
            let mut cont = S::zero();
            for (j, q) in row {
                cont = cont + q.clone() * values[*j].clone();
            }
            let value = model.delta.clone() * cont - model.primitives(game).d.clone();
            slacks.push(Slack { state: i, game, value });
        }
    }

    let mut good_share = S::zero();
    let mut bad_share = S::zero();
    let mut social_value = S::zero();
    let mut outcome_mass = Vec::with_capacity(n);
    for ((st, pi), l) in chain.states.iter().zip(&steady).zip(labels) {
        let (pg, pb) = model.arrivals.of(st.task);
        match st.task {
            Task::Good => good_share = good_share + pi.clone(),
            Task::Bad => bad_share = bad_share + pi.clone(),
        }
        if l.good {
            social_value = social_value + pi.clone() * pg.clone() * model.v_good.clone();
        }
        if l.bad {
            social_value = social_value + pi.clone() * pb.clone() * model.v_bad.clone();
        }
        outcome_mass.push(OutcomeMass {
            good: pi.clone() * pg.clone(),
            bad: pi.clone() * pb.clone(),
            none: pi.clone() * (S::one() - pg.clone() - pb.clone()),
        });
    }

    Ok(ChainSolution {
        steady,
        outcome_mass,
        values,
        slacks,
        labels: labels.to_vec(),
        good_share,
        bad_share,
        social_value,
    })
}

/// Values and slacks with cooperation at every on-path game.
pub fn solve_values<S: Scalar>(chain: &AssignmentChain<S>, model: &ChainModel<S>) -> Result<ChainSolution<S>> {
    solve_with_labels(chain, model, &vec![Labels::ALL; chain.len()])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility<S = f64> {
    pub feasible: bool,
    /// The smallest on-path slack.
    pub binding: Option<Slack<S>>,
}

pub fn full_cooperation_feasible<S: Scalar>(
    chain: &AssignmentChain<S>,
    model: &ChainModel<S>,
    tol: Tolerance,
) -> Result<Feasibility<S>> {
    let sol = solve_values(chain, model)?;
    let binding = sol.min_slack().cloned();
    let feasible = binding
        .as_ref()
        .is_none_or(|s| tol.le(&S::zero(), &s.value));
    Ok(Feasibility { feasible, binding })
}

/// Player-optimal grim-trigger labels: the largest self-enforcing set.
///
/// Starts from cooperation everywhere and drops every pair whose slack is
/// negative until none remains. Values only fall as labels are dropped, so
/// the result is the largest set where every kept pair is self-enforcing.
pub fn cooperation_labels<S: Scalar>(
    chain: &AssignmentChain<S>,
    model: &ChainModel<S>,
    tol: Tolerance,
) -> Result<ChainSolution<S>> {
    let mut labels = vec![Labels::ALL; chain.len()];
    loop {
        let sol = solve_with_labels(chain, model, &labels)?;
        let mut changed = false;
        for s in &sol.slacks {
            if labels[s.state].get(s.game) && !tol.le(&S::zero(), &s.value) {
                match s.game {
                    GameLabel::Good => labels[s.state].good = false,
                    GameLabel::Bad => labels[s.state].bad = false,
                }
                changed = true;
            }
        }
        if !changed {
            return Ok(sol);
        }
    }
}
