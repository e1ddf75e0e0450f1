//! Finite-horizon extended value iteration over L1 confidence sets.
//!
//! Each backup maximizes `p · V_{h+1}` over the rows `p` of the simplex within
//! L1 distance `d(s, a)` of the empirical row. The maximizer moves up to
//! `d / 2` of probability onto the state with the highest next-step value and
//! takes the same amount away from the lowest-valued states.

use crate::mdp::{dot, ModelShape, Policy, ValueTable};

/// Confidence radius for a pair visited `visits` times before an episode
/// starting at time `t_k`:
///
/// `scale * sqrt(2 S (1 - L̃) ln(2 S A max(t_k, 1) / delta) / max(1, visits))`
pub fn confidence_width(
    visits: u64,
    num_states: usize,
    num_actions: usize,
    t_k: u64,
    delta: f64,
    normalized_variation: f64,
    scale: f64,
) -> f64 {
    let s = num_states as f64;
    let log_term = (2.0 * s * num_actions as f64 * t_k.max(1) as f64 / delta).ln();
    let n = visits.max(1) as f64;
    let exploration = (1.0 - normalized_variation).max(0.0);
    scale * (2.0 * s * exploration * log_term / n).sqrt()
}

/// Most optimistic row within `d` of `p_hat` given states sorted by
/// descending value. Writes the result into `out`.
pub fn inner_max_probability_into(p_hat: &[f64], width: f64, descending: &[usize], out: &mut [f64]) {
    out.copy_from_slice(p_hat);
    if width <= 0.0 {
        return;
    }
    let best = descending[0];
    out[best] = (p_hat[best] + width / 2.0).min(1.0);
    let mut total: f64 = out.iter().sum();
    // Drain the lowest-valued states until the row is back on the simplex.
    for &state in descending[1..].iter().rev() {
        if total <= 1.0 {
            break;
        }
        let others = total - out[state];
        let reduced = (1.0 - others).max(0.0);
        total = others + reduced;
        out[state] = reduced;
    }
}

pub fn inner_max_probability(p_hat: &[f64], width: f64, descending: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; p_hat.len()];
    inner_max_probability_into(p_hat, width, descending, &mut out);
    out
}

/// States ordered by descending value; equal values keep ascending index order.
pub fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

#[derive(Debug, Clone)]
pub struct EviOutput {
    /// Optimistic kernel chosen during the first-step backup.
    pub optimistic: Vec<f64>,
    pub policy: Policy,
    pub values: ValueTable,
}

/// Backward induction where every backup uses the optimistic row for the
/// current ordering of next-step values.
pub fn extended_value_iteration(p_hat: &[f64], widths: &[f64], shape: &ModelShape) -> EviOutput {
    let (s_count, a_count, horizon) = (shape.num_states, shape.num_actions, shape.horizon);
    debug_assert_eq!(p_hat.len(), shape.tensor_len());
    debug_assert_eq!(widths.len(), s_count * a_count);

    let mut values = ValueTable::zeros(s_count, horizon);
    let mut actions = vec![0usize; s_count * horizon];
    let mut optimistic = vec![0.0; p_hat.len()];
    let mut row = vec![0.0; s_count];

    for h in (0..horizon).rev() {
        let (current, next) = values.split_step(h);
        let order = descending_order(next);
        for s in 0..s_count {
            let mut best = f64::NEG_INFINITY;
            let mut best_action = 0;
            for a in 0..a_count {
                let pair = s * a_count + a;
                let base = pair * s_count;
                inner_max_probability_into(&p_hat[base..base + s_count], widths[pair], &order, &mut row);
                let q = shape.rewards[pair] + shape.discount * dot(&row, next);
                if h == 0 {
                    optimistic[base..base + s_count].copy_from_slice(&row);
                }
                if q > best {
                    best = q;
                    best_action = a;
                }
            }
            current[s] = best;
            actions[h * s_count + s] = best_action;
        }
    }
    EviOutput {
        optimistic,
        policy: Policy::from_raw(s_count, horizon, actions),
        values,
    }
}
