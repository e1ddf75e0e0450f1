//! Slow, independent reference computations shared by integration and
//! acceptance tests. Nothing here calls the planners under test.
#![allow(dead_code)]

use opprl_core::{build_mdp, FiniteHorizonMdp, MdpSpec, Policy};
use rand::Rng;

/// Random row on the simplex; some entries are zeroed so that rows have
/// gaps the way sparse empirical estimates do.
pub fn random_row<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len)
        .map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() })
        .collect();
    if row.iter().all(|&x| x == 0.0) {
        row[rng.random_range(0..len)] = 1.0;
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= total);
    row
}

pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, max_states: usize, max_actions: usize, max_horizon: usize) -> FiniteHorizonMdp {
    let s = rng.random_range(1..=max_states);
    let a = rng.random_range(1..=max_actions);
    let h = rng.random_range(1..=max_horizon);
    let transitions = (0..s * a).flat_map(|_| random_row(rng, s)).collect();
    let rewards = (0..s * a).map(|_| rng.random_range(-1.0..1.0)).collect();
    let discount = if rng.random::<bool>() { 1.0 } else { rng.random_range(0.5..1.0) };
    build_mdp(MdpSpec {
        num_states: s,
        num_actions: a,
        horizon: h,
        transitions,
        rewards,
        discount,
        start_state: rng.random_range(0..s),
        terminal_states: vec![],
    })
    .expect("generated model is valid")
}

/// Expected discounted return of `policy` from `start`, by pushing the state
/// distribution forward step by step.
pub fn forward_value(mdp: &FiniteHorizonMdp, policy: &Policy, start: usize) -> f64 {
    let s_count = mdp.num_states();
    let mut dist = vec![0.0; s_count];
    dist[start] = 1.0;
    let mut total = 0.0;
    let mut weight = 1.0;
    for h in 0..mdp.horizon() {
        let mut next = vec![0.0; s_count];
        for s in 0..s_count {
            if dist[s] == 0.0 {
                continue;
            }
            let a = policy.action(h, s);
            total += weight * dist[s] * mdp.reward(s, a);
            for (s2, p) in mdp.transition_row(s, a).iter().enumerate() {
                next[s2] += dist[s] * p;
            }
        }
        dist = next;
        weight *= mdp.discount();
    }
    total
}

/// Best return from `start` over every deterministic step-dependent policy.
pub fn brute_force_optimum(mdp: &FiniteHorizonMdp, start: usize) -> f64 {
    let (s, a, h) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let cells = s * h;
    let count = a.pow(cells as u32);
    let mut best = f64::NEG_INFINITY;
    for code in 0..count {
        let mut rest = code;
        let actions: Vec<usize> = (0..cells)
            .map(|_| {
                let digit = rest % a;
                rest /= a;
                digit
            })
            .collect();
        let policy = Policy::new(s, h, a, actions).expect("valid digits");
        best = best.max(forward_value(mdp, &policy, start));
    }
    best
}

/// `max v·p` over `{p in simplex : |p - p_hat|_1 <= d}` by enumerating the
/// vertices of the lifted polytope in `(p, t)` with `|p_i - p_hat_i| <= t_i`.
pub fn l1_ball_lp_max(p_hat: &[f64], d: f64, v: &[f64]) -> f64 {
    let n = p_hat.len();
    let dim = 2 * n;
    // Inequalities `g · x >= c`, x = (p, t).
    let mut ineq: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..n {
        let mut g = vec![0.0; dim];
        g[i] = 1.0;
        ineq.push((g, 0.0));
        let mut g = vec![0.0; dim];
        g[n + i] = 1.0;
        g[i] = -1.0;
        ineq.push((g, -p_hat[i]));
        let mut g = vec![0.0; dim];
        g[n + i] = 1.0;
        g[i] = 1.0;
        ineq.push((g, p_hat[i]));
    }
    let mut g = vec![0.0; dim];
    g[n..].iter_mut().for_each(|x| *x = -1.0);
    ineq.push((g, -d));
    let mut simplex = vec![0.0; dim];
    simplex[..n].iter_mut().for_each(|x| *x = 1.0);

    let mut best = f64::NEG_INFINITY;
    for chosen in combinations(ineq.len(), dim - 1) {
        let mut rows: Vec<Vec<f64>> = chosen.iter().map(|&k| ineq[k].0.clone()).collect();
        let mut rhs: Vec<f64> = chosen.iter().map(|&k| ineq[k].1).collect();
        rows.push(simplex.clone());
        rhs.push(1.0);
        let Some(x) = solve_linear(rows, rhs) else { continue };
        let feasible = ineq
            .iter()
            .all(|(g, c)| g.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() >= c - 1e-10);
        if feasible {
            best = best.max(x[..n].iter().zip(v).map(|(p, w)| p * w).sum());
        }
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `P(X <= successes)` for `X ~ Binomial(trials, p)`.
pub fn binomial_lower_tail(successes: u64, trials: u64, p: f64) -> f64 {
    (0..=successes)
        .map(|k| {
            let log_choose = ln_factorial(trials) - ln_factorial(k) - ln_factorial(trials - k);
            (log_choose + k as f64 * p.ln() + (trials - k) as f64 * (1.0 - p).ln()).exp()
        })
        .sum()
}

fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}
