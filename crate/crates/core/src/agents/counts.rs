use crate::mdp::Trajectory;

/// Visit counts `N(s, a)` and `N(s, a, s')`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCounts {
    num_states: usize,
    num_actions: usize,
    pair: Vec<u64>,
    triple: Vec<u64>,
}

impl TransitionCounts {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            pair: vec![0; num_states * num_actions],
            triple: vec![0; num_states * num_actions * num_states],
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn pair(&self, state: usize, action: usize) -> u64 {
        self.pair[state * self.num_actions + action]
    }

    #[inline]
    pub fn triple(&self, state: usize, action: usize, next: usize) -> u64 {
        self.triple[(state * self.num_actions + action) * self.num_states + next]
    }

    pub fn record(&mut self, state: usize, action: usize, next: usize) {
        self.pair[state * self.num_actions + action] += 1;
        self.triple[(state * self.num_actions + action) * self.num_states + next] += 1;
    }

    pub fn record_trajectory(&mut self, trajectory: &Trajectory) {
        for t in trajectory {
            self.record(t.state, t.action, t.next_state);
        }
    }

    /// Total number of recorded transitions.
    pub fn total(&self) -> u64 {
        self.pair.iter().sum()
    }

    /// Empirical kernel `N(s,a,s') / N(s,a)`; unvisited pairs get the uniform row.
    pub fn empirical_transitions(&self) -> Vec<f64> {
        let s_count = self.num_states;
        let uniform = 1.0 / s_count as f64;
        let mut p_hat = Vec::with_capacity(self.triple.len());
        for (row, &n) in self.triple.chunks(s_count).zip(&self.pair) {
            if n == 0 {
                p_hat.extend(std::iter::repeat_n(uniform, s_count));
            } else {
                let n = n as f64;
                p_hat.extend(row.iter().map(|&c| c as f64 / n));
            }
        }
        p_hat
    }
}

pub fn empirical_transitions(counts: &TransitionCounts) -> Vec<f64> {
    counts.empirical_transitions()
}

pub fn record_trajectory(counts: &mut TransitionCounts, trajectory: &Trajectory) {
    counts.record_trajectory(trajectory)
}
