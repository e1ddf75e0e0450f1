//! Finite-horizon tabular MDPs.
//!
//! Transition tensors are stored flat in `(s, a, s')` row-major order, so the
//! row `P(.|s, a)` is the contiguous slice starting at `(s * A + a) * S`.
//! Rewards are a flat `(s, a)` table. Steps are 0-based throughout the API:
//! step `0` is the first decision of an episode and `values.get(0, s)` is the
//! value of the whole episode started in `s`.

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance used when validating that a transition row lies on the simplex.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Raw tables for [`FiniteHorizonMdp::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct MdpSpec {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    /// Flat `(s, a, s')` tensor.
    pub transitions: Vec<f64>,
    /// Flat `(s, a)` table.
    pub rewards: Vec<f64>,
    pub discount: f64,
    pub start_state: usize,
    pub terminal_states: Vec<usize>,
}

/// What an agent is told about the environment: everything except the
/// transition kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelShape {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub rewards: Vec<f64>,
    pub discount: f64,
}

impl ModelShape {
    #[inline]
    pub fn reward(&self, state: usize, action: usize) -> f64 {
        self.rewards[state * self.num_actions + action]
    }

    /// Number of entries in a full transition tensor for this shape.
    pub fn tensor_len(&self) -> usize {
        self.num_states * self.num_actions * self.num_states
    }
}

/// A validated finite-horizon MDP with known deterministic rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHorizonMdp {
    shape: ModelShape,
    transitions: Vec<f64>,
    start_state: usize,
    terminal_states: Vec<usize>,
}

/// Deterministic nonstationary policy, `(step, state) -> action`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    num_states: usize,
    horizon: usize,
    actions: Vec<usize>,
}

/// State values for steps `0..=H`; the row for step `H` is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    num_states: usize,
    horizon: usize,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// One episode: exactly `H` chained transitions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    steps: Vec<Transition>,
}

/// Validate raw tables into a model. Rows within [`ROW_SUM_TOLERANCE`] of 1
/// are renormalized; anything further off is rejected.
pub fn build_mdp(spec: MdpSpec) -> Result<FiniteHorizonMdp> {
    FiniteHorizonMdp::build(spec)
}

impl FiniteHorizonMdp {
    pub fn build(spec: MdpSpec) -> Result<Self> {
        let MdpSpec {
            num_states,
            num_actions,
            horizon,
            mut transitions,
            rewards,
            discount,
            start_state,
            mut terminal_states,
        } = spec;

        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(Error::InvalidParameter(format!(
                "states, actions and horizon must be positive (got S={num_states}, A={num_actions}, H={horizon})"
            )));
        }
        if !(discount > 0.0 && discount <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "discount must lie in (0, 1], got {discount}"
            )));
        }
        let expected = num_states * num_actions * num_states;
        if transitions.len() != expected {
            return Err(Error::Dimension {
                table: "transitions",
                expected,
                actual: transitions.len(),
            });
        }
        if rewards.len() != num_states * num_actions {
            return Err(Error::Dimension {
                table: "rewards",
                expected: num_states * num_actions,
                actual: rewards.len(),
            });
        }
        if let Some((i, _)) = rewards.iter().enumerate().find(|(_, r)| !r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "reward for (s={}, a={}) is not finite",
                i / num_actions,
                i % num_actions
            )));
        }
        if start_state >= num_states {
            return Err(Error::IndexOutOfRange {
                what: "start state",
                index: start_state,
                bound: num_states,
            });
        }

        for (row_index, row) in transitions.chunks_mut(num_states).enumerate() {
            let (state, action) = (row_index / num_actions, row_index % num_actions);
            if let Some(next) = row.iter().position(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidProbability {
                    state,
                    action,
                    next,
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSum { state, action, sum });
            }
            if sum != 1.0 {
                row.iter_mut().for_each(|p| *p /= sum);
            }
        }

        terminal_states.sort_unstable();
        terminal_states.dedup();
        for &state in &terminal_states {
            if state >= num_states {
                return Err(Error::IndexOutOfRange {
                    what: "terminal state",
                    index: state,
                    bound: num_states,
                });
            }
            for action in 0..num_actions {
                let base = (state * num_actions + action) * num_states;
                let row = &transitions[base..base + num_states];
                let absorbing = row
                    .iter()
                    .enumerate()
                    .all(|(next, &p)| if next == state { p == 1.0 } else { p == 0.0 });
                if !absorbing || rewards[state * num_actions + action] != 0.0 {
                    return Err(Error::NonAbsorbingTerminal { state });
                }
            }
        }

        Ok(Self {
            shape: ModelShape {
                num_states,
                num_actions,
                horizon,
                rewards,
                discount,
            },
            transitions,
            start_state,
            terminal_states,
        })
    }

    pub fn num_states(&self) -> usize {
        self.shape.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.shape.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.shape.horizon
    }

    pub fn discount(&self) -> f64 {
        self.shape.discount
    }

    pub fn start_state(&self) -> usize {
        self.start_state
    }

    pub fn terminal_states(&self) -> &[usize] {
        &self.terminal_states
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.terminal_states.binary_search(&state).is_ok()
    }

    /// The agent-visible part of the model.
    pub fn shape(&self) -> &ModelShape {
        &self.shape
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn transition_row(&self, state: usize, action: usize) -> &[f64] {
        let s = self.shape.num_states;
        let base = (state * self.shape.num_actions + action) * s;
        &self.transitions[base..base + s]
    }

    pub fn reward(&self, state: usize, action: usize) -> f64 {
        self.shape.reward(state, action)
    }

    /// Optimal values `V*` and a greedy optimal policy (ties to the lowest
    /// action index).
    pub fn optimal_values(&self) -> (ValueTable, Policy) {
        solve_backward(&self.shape, &self.transitions)
    }

    /// Exact value of `policy` by backward induction.
    pub fn evaluate_policy(&self, policy: &Policy) -> ValueTable {
        evaluate_backward(&self.shape, &self.transitions, policy)
    }

    /// Sample one transition. The next state is drawn by inverse-CDF over
    /// `P(.|s, a)` in ascending state order using a single uniform draw.
    pub fn step<R: Rng + ?Sized>(&self, state: usize, action: usize, rng: &mut R) -> (usize, f64) {
        let row = self.transition_row(state, action);
        (sample_row(row, rng), self.reward(state, action))
    }

    /// Roll out `policy` for exactly `H` steps from the start state.
    pub fn run_episode<R: Rng + ?Sized>(&self, policy: &Policy, rng: &mut R) -> Trajectory {
        assert_eq!(policy.num_states(), self.num_states(), "policy state count");
        assert_eq!(policy.horizon(), self.horizon(), "policy horizon");
        let mut steps = Vec::with_capacity(self.horizon());
        let mut state = self.start_state;
        for h in 0..self.horizon() {
            let action = policy.action(h, state);
            let (next_state, reward) = self.step(state, action, rng);
            steps.push(Transition {
                state,
                action,
                reward,
                next_state,
            });
            state = next_state;
        }
        Trajectory { steps }
    }
}

/// Inverse-CDF sample from a probability row.
pub fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (next, &p) in row.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return next;
        }
    }
    // Rounding left `u` above the final cumulative sum.
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

/// Backward induction on an arbitrary transition tensor for `shape`:
/// `Q_h = r + γ Σ P V_{h+1}`, `V_h = max_a Q_h`.
pub fn solve_backward(shape: &ModelShape, transitions: &[f64]) -> (ValueTable, Policy) {
    let (s_count, a_count, horizon) = (shape.num_states, shape.num_actions, shape.horizon);
    debug_assert_eq!(transitions.len(), shape.tensor_len());
    let mut values = ValueTable::zeros(s_count, horizon);
    let mut policy = Policy::constant(s_count, horizon, 0);
    for h in (0..horizon).rev() {
        let (current, next) = values.split_step(h);
        for s in 0..s_count {
            let mut best = f64::NEG_INFINITY;
            let mut best_action = 0;
            for a in 0..a_count {
                let base = (s * a_count + a) * s_count;
                let row = &transitions[base..base + s_count];
                let q = shape.rewards[s * a_count + a] + shape.discount * dot(row, next);
                if q > best {
                    best = q;
                    best_action = a;
                }
            }
            current[s] = best;
            policy.actions[h * s_count + s] = best_action;
        }
    }
    (values, policy)
}

fn evaluate_backward(shape: &ModelShape, transitions: &[f64], policy: &Policy) -> ValueTable {
    let (s_count, a_count, horizon) = (shape.num_states, shape.num_actions, shape.horizon);
    assert_eq!(policy.num_states, s_count, "policy state count");
    assert_eq!(policy.horizon, horizon, "policy horizon");
    let mut values = ValueTable::zeros(s_count, horizon);
    for h in (0..horizon).rev() {
        let (current, next) = values.split_step(h);
        for s in 0..s_count {
            let a = policy.action(h, s);
            assert!(a < a_count, "policy action {a} out of range");
            let base = (s * a_count + a) * s_count;
            let row = &transitions[base..base + s_count];
            current[s] = shape.rewards[s * a_count + a] + shape.discount * dot(row, next);
        }
    }
    values
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Policy {
    /// Build from a flat `(step, state)` table; every entry must be `< num_actions`.
    pub fn new(num_states: usize, horizon: usize, num_actions: usize, actions: Vec<usize>) -> Result<Self> {
        if actions.len() != num_states * horizon {
            return Err(Error::Dimension {
                table: "policy",
                expected: num_states * horizon,
                actual: actions.len(),
            });
        }
        if let Some(&bad) = actions.iter().find(|&&a| a >= num_actions) {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: bad,
                bound: num_actions,
            });
        }
        Ok(Self {
            num_states,
            horizon,
            actions,
        })
    }

    pub(crate) fn from_raw(num_states: usize, horizon: usize, actions: Vec<usize>) -> Self {
        debug_assert_eq!(actions.len(), num_states * horizon);
        Self {
            num_states,
            horizon,
            actions,
        }
    }

    pub fn constant(num_states: usize, horizon: usize, action: usize) -> Self {
        Self {
            num_states,
            horizon,
            actions: vec![action; num_states * horizon],
        }
    }

    pub fn from_fn(num_states: usize, horizon: usize, mut f: impl FnMut(usize, usize) -> usize) -> Self {
        let mut actions = Vec::with_capacity(num_states * horizon);
        for h in 0..horizon {
            for s in 0..num_states {
                actions.push(f(h, s));
            }
        }
        Self {
            num_states,
            horizon,
            actions,
        }
    }

    #[inline]
    pub fn action(&self, step: usize, state: usize) -> usize {
        self.actions[step * self.num_states + state]
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.actions
    }
}

impl ValueTable {
    pub fn zeros(num_states: usize, horizon: usize) -> Self {
        Self {
            num_states,
            horizon,
            values: vec![0.0; num_states * (horizon + 1)],
        }
    }

    #[inline]
    pub fn get(&self, step: usize, state: usize) -> f64 {
        self.values[step * self.num_states + state]
    }

    /// Values at a given step, indexed by state.
    pub fn step(&self, step: usize) -> &[f64] {
        &self.values[step * self.num_states..(step + 1) * self.num_states]
    }

    /// Value of a full episode started in `state`.
    pub fn initial(&self, state: usize) -> f64 {
        self.get(0, state)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Mutable row for step `h` together with the finished row for `h + 1`.
    pub(crate) fn split_step(&mut self, h: usize) -> (&mut [f64], &[f64]) {
        let n = self.num_states;
        let (head, tail) = self.values.split_at_mut((h + 1) * n);
        (&mut head[h * n..], &tail[..n])
    }
}

impl Trajectory {
    pub fn new(steps: Vec<Transition>) -> Self {
        Self { steps }
    }

    pub fn steps(&self) -> &[Transition] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|t| t.reward).sum()
    }

    pub fn discounted_return(&self, discount: f64) -> f64 {
        self.steps
            .iter()
            .rev()
            .fold(0.0, |acc, t| t.reward + discount * acc)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Transition> {
        self.steps.iter()
    }
}

impl<'a> IntoIterator for &'a Trajectory {
    type Item = &'a Transition;
    type IntoIter = std::slice::Iter<'a, Transition>;

    fn into_iter(self) -> Self::IntoIter {
        self.steps.iter()
    }
}
