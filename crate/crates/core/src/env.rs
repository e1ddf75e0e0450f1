//! The three benchmark environments: River Swim, Cliff Walking and a
//! deterministic Frozen Lake.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mdp::{build_mdp, FiniteHorizonMdp, MdpSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentId {
    RiverSwim,
    CliffWalking,
    FrozenLake,
}

impl EnvironmentId {
    pub const ALL: [EnvironmentId; 3] = [
        EnvironmentId::RiverSwim,
        EnvironmentId::CliffWalking,
        EnvironmentId::FrozenLake,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvironmentId::RiverSwim => "river_swim",
            EnvironmentId::CliffWalking => "cliff_walking",
            EnvironmentId::FrozenLake => "frozen_lake",
        }
    }

    pub fn build(self) -> FiniteHorizonMdp {
        match self {
            EnvironmentId::RiverSwim => river_swim(),
            EnvironmentId::CliffWalking => cliff_walking(),
            EnvironmentId::FrozenLake => frozen_lake(),
        }
    }
}

impl fmt::Display for EnvironmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvironmentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EnvironmentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "environment",
                    format!("unknown environment `{s}` (expected river_swim, cliff_walking or frozen_lake)"),
                )
            })
    }
}

/// River Swim parameters. RIGHT succeeds, stalls or slips back with these
/// probabilities; the chain ends are special-cased as in [`river_swim`].
pub mod river {
    pub const NUM_STATES: usize = 6;
    pub const HORIZON: usize = 15;
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;
    pub const RIGHT_SUCCESS: f64 = 0.35;
    pub const RIGHT_STAY: f64 = 0.60;
    pub const RIGHT_SLIP: f64 = 0.05;
    /// Leftmost state: the slip mass has nowhere to go.
    pub const LEFT_END_SUCCESS: f64 = 0.40;
    /// Rightmost state: success mass folds into slipping back.
    pub const RIGHT_END_SLIP: f64 = 0.40;
    pub const SMALL_REWARD: f64 = 0.005;
    pub const LARGE_REWARD: f64 = 1.0;
}

/// Grid action indices shared by Cliff Walking and Frozen Lake.
pub mod grid {
    pub const UP: usize = 0;
    pub const DOWN: usize = 1;
    pub const RIGHT: usize = 2;
    pub const LEFT: usize = 3;
    pub const NUM_ACTIONS: usize = 4;
}

pub fn river_swim() -> FiniteHorizonMdp {
    use river::*;
    let s_count = NUM_STATES;
    let mut transitions = vec![0.0; s_count * 2 * s_count];
    let mut rewards = vec![0.0; s_count * 2];
    let mut set = |s: usize, a: usize, next: usize, p: f64| {
        transitions[(s * 2 + a) * s_count + next] += p;
    };
    for s in 0..s_count {
        set(s, LEFT, s.saturating_sub(1), 1.0);
        if s == 0 {
            set(s, RIGHT, s + 1, LEFT_END_SUCCESS);
            set(s, RIGHT, s, RIGHT_STAY);
        } else if s == s_count - 1 {
            set(s, RIGHT, s, RIGHT_STAY);
            set(s, RIGHT, s - 1, RIGHT_END_SLIP);
        } else {
            set(s, RIGHT, s + 1, RIGHT_SUCCESS);
            set(s, RIGHT, s, RIGHT_STAY);
            set(s, RIGHT, s - 1, RIGHT_SLIP);
        }
    }
    rewards[LEFT] = SMALL_REWARD;
    rewards[(s_count - 1) * 2 + RIGHT] = LARGE_REWARD;
    build_mdp(MdpSpec {
        num_states: s_count,
        num_actions: 2,
        horizon: HORIZON,
        transitions,
        rewards,
        discount: 1.0,
        start_state: 0,
        terminal_states: vec![],
    })
    .expect("river swim tables are valid")
}

#[derive(Clone, Copy)]
struct Grid {
    rows: usize,
    cols: usize,
}

impl Grid {
    fn cell(self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Deterministic move; walking off the grid leaves the agent in place.
    fn moved(self, cell: usize, action: usize) -> usize {
        let (row, col) = (cell / self.cols, cell % self.cols);
        let (row, col) = match action {
            grid::UP => (row.saturating_sub(1), col),
            grid::DOWN => ((row + 1).min(self.rows - 1), col),
            grid::RIGHT => (row, (col + 1).min(self.cols - 1)),
            grid::LEFT => (row, col.saturating_sub(1)),
            _ => unreachable!("grid action {action}"),
        };
        self.cell(row, col)
    }
}

/// Builds a deterministic grid MDP. `outcome(landing_cell)` gives the reward
/// of a move and where the agent actually ends up.
fn grid_mdp(
    grid: Grid,
    horizon: usize,
    discount: f64,
    start: usize,
    terminals: &[usize],
    outcome: impl Fn(usize) -> (f64, usize),
) -> FiniteHorizonMdp {
    let s_count = grid.rows * grid.cols;
    let a_count = grid::NUM_ACTIONS;
    let mut transitions = vec![0.0; s_count * a_count * s_count];
    let mut rewards = vec![0.0; s_count * a_count];
    for s in 0..s_count {
        for a in 0..a_count {
            let (reward, next) = if terminals.contains(&s) {
                (0.0, s)
            } else {
                outcome(grid.moved(s, a))
            };
            transitions[(s * a_count + a) * s_count + next] = 1.0;
            rewards[s * a_count + a] = reward;
        }
    }
    build_mdp(MdpSpec {
        num_states: s_count,
        num_actions: a_count,
        horizon,
        transitions,
        rewards,
        discount,
        start_state: start,
        terminal_states: terminals.to_vec(),
    })
    .expect("grid tables are valid")
}

pub const CLIFF_ROWS: usize = 4;
pub const CLIFF_COLS: usize = 12;
pub const CLIFF_HORIZON: usize = 50;
pub const CLIFF_STEP_REWARD: f64 = -1.0;
pub const CLIFF_FALL_REWARD: f64 = -100.0;

/// Cells of the cliff: bottom row, columns 1 through 10.
pub fn cliff_cells() -> impl Iterator<Item = usize> {
    (1..CLIFF_COLS - 1).map(|col| (CLIFF_ROWS - 1) * CLIFF_COLS + col)
}

pub fn cliff_walking() -> FiniteHorizonMdp {
    let grid = Grid {
        rows: CLIFF_ROWS,
        cols: CLIFF_COLS,
    };
    let start = grid.cell(CLIFF_ROWS - 1, 0);
    let goal = grid.cell(CLIFF_ROWS - 1, CLIFF_COLS - 1);
    let cliff: Vec<usize> = cliff_cells().collect();
    grid_mdp(grid, CLIFF_HORIZON, 1.0, start, &[goal], |landing| {
        if cliff.contains(&landing) {
            (CLIFF_FALL_REWARD, start)
        } else {
            (CLIFF_STEP_REWARD, landing)
        }
    })
}

/// Standard 4x4 map, row-major.
pub const FROZEN_LAKE_MAP: [&str; 4] = ["SFFF", "FHFH", "FFFH", "HFFG"];
pub const FROZEN_LAKE_HORIZON: usize = 20;
pub const FROZEN_LAKE_DISCOUNT: f64 = 0.95;

pub fn frozen_lake() -> FiniteHorizonMdp {
    let cells: Vec<u8> = FROZEN_LAKE_MAP.iter().flat_map(|row| row.bytes()).collect();
    let grid = Grid {
        rows: FROZEN_LAKE_MAP.len(),
        cols: FROZEN_LAKE_MAP[0].len(),
    };
    let find = |tile: u8| cells.iter().position(|&c| c == tile).expect("tile present");
    let terminals: Vec<usize> = cells
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == b'H' || c == b'G')
        .map(|(i, _)| i)
        .collect();
    grid_mdp(
        grid,
        FROZEN_LAKE_HORIZON,
        FROZEN_LAKE_DISCOUNT,
        find(b'S'),
        &terminals,
        |landing| match cells[landing] {
            b'G' => (1.0, landing),
            b'H' => (-1.0, landing),
            _ => (0.0, landing),
        },
    )
}
