use serde::{Deserialize, Serialize};

use super::model::{ActionId, Mdp, MdpError, StateId};
use super::policy::Policy;

pub const TARGET_LABEL: &str = "target";
pub const UNSAFE_LABEL: &str = "unsafe";

/// A grid cell as `(row, col)`, row 0 at the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell(pub usize, pub usize);

impl Cell {
    pub fn row(self) -> usize {
        self.0
    }

    pub fn col(self) -> usize {
        self.1
    }
}

/// Grid moves in their fixed order; the order doubles as action index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Up,
    Down,
    Left,
    Right,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Up, Move::Down, Move::Left, Move::Right];

    pub fn action(self) -> ActionId {
        ActionId(self as usize)
    }

    pub fn name(self) -> &'static str {
        match self {
            Move::Up => "Up",
            Move::Down => "Down",
            Move::Left => "Left",
            Move::Right => "Right",
        }
    }

    fn from_arrow(c: char) -> Option<Move> {
        match c {
            'U' => Some(Move::Up),
            'D' | '*' => Some(Move::Down),
            'L' => Some(Move::Left),
            'R' => Some(Move::Right),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    pub start: Cell,
    #[serde(rename = "unsafe")]
    pub unsafe_cells: Vec<Cell>,
    pub target: Cell,
    pub slip: f64,
}

impl GridConfig {
    /// The 4×4 benchmark: start top-left, fire at (1,2), flag bottom-right,
    /// slip probability 0.1.
    pub fn benchmark() -> Self {
        Self {
            rows: 4,
            cols: 4,
            start: Cell(0, 0),
            unsafe_cells: vec![Cell(1, 2)],
            target: Cell(3, 3),
            slip: 0.1,
        }
    }

    pub fn validate(&self) -> Result<(), MdpError> {
        let bad = |msg: String| Err(MdpError::InvalidGrid(msg));
        if self.rows == 0 || self.cols == 0 {
            return bad("rows and cols must be positive".into());
        }
        let inside = |c: Cell| c.0 < self.rows && c.1 < self.cols;
        if !inside(self.start) {
            return bad(format!("start {:?} outside the grid", self.start));
        }
        if !inside(self.target) {
            return bad(format!("target {:?} outside the grid", self.target));
        }
        if let Some(c) = self.unsafe_cells.iter().find(|c| !inside(**c)) {
            return bad(format!("unsafe cell {c:?} outside the grid"));
        }
        if self.unsafe_cells.contains(&self.target) {
            return bad("target cell is marked unsafe".into());
        }
        if !(0.0..=1.0).contains(&self.slip) {
            return bad(format!("slip {} not in [0,1]", self.slip));
        }
        Ok(())
    }

    pub fn is_benchmark_layout(&self) -> bool {
        let b = Self::benchmark();
        self.rows == b.rows
            && self.cols == b.cols
            && self.start == b.start
            && self.target == b.target
            && self.unsafe_cells == b.unsafe_cells
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::benchmark()
    }
}

/// A grid-world MDP together with its layout.
#[derive(Debug, Clone)]
pub struct GridWorld {
    pub config: GridConfig,
    pub mdp: Mdp,
}

impl GridWorld {
    pub fn state_of(&self, cell: Cell) -> StateId {
        StateId(cell.0 * self.config.cols + cell.1)
    }

    pub fn cell_of(&self, s: StateId) -> Cell {
        Cell(s.0 / self.config.cols, s.0 % self.config.cols)
    }

    pub fn start_state(&self) -> StateId {
        self.state_of(self.config.start)
    }

    pub fn target_state(&self) -> StateId {
        self.state_of(self.config.target)
    }

    /// Builds a policy from one string of arrows per row (`U`, `D`, `L`,
    /// `R`; `*` marks an absorbing cell and maps to Down).
    pub fn policy_from_arrows(&self, rows: &[&str]) -> Result<Policy, MdpError> {
        let cfg = &self.config;
        if rows.len() != cfg.rows || rows.iter().any(|r| r.chars().count() != cfg.cols) {
            return Err(MdpError::InvalidGrid(format!(
                "arrow map must be {}x{}",
                cfg.rows, cfg.cols
            )));
        }
        let mut table = Vec::with_capacity(cfg.rows * cfg.cols);
        for row in rows {
            for c in row.chars() {
                let m = Move::from_arrow(c)
                    .ok_or_else(|| MdpError::InvalidGrid(format!("bad arrow `{c}`")))?;
                table.push(m.action());
            }
        }
        Ok(Policy::new(table))
    }

    /// The safe reference policy: down the left column, then right along
    /// the bottom row.
    pub fn optimal_policy(&self) -> Result<Policy, MdpError> {
        self.require_benchmark()?;
        self.policy_from_arrows(&["DDRD", "DD*D", "DDDD", "RRR*"])
    }

    /// The riskier behaviour policy: along the top row past the fire, then
    /// down the right column.
    pub fn random_policy(&self) -> Result<Policy, MdpError> {
        self.require_benchmark()?;
        self.policy_from_arrows(&["RRRD", "RD*D", "RRDD", "RRR*"])
    }

    fn require_benchmark(&self) -> Result<(), MdpError> {
        if self.config.is_benchmark_layout() {
            Ok(())
        } else {
            Err(MdpError::InvalidGrid(
                "fixture policies exist only for the 4x4 benchmark layout".into(),
            ))
        }
    }
}

fn step(cfg: &GridConfig, cell: Cell, m: Move) -> Cell {
    let Cell(r, c) = cell;
    match m {
        Move::Up if r > 0 => Cell(r - 1, c),
        Move::Down if r + 1 < cfg.rows => Cell(r + 1, c),
        Move::Left if c > 0 => Cell(r, c - 1),
        Move::Right if c + 1 < cfg.cols => Cell(r, c + 1),
        _ => cell,
    }
}

/// Builds the slippery grid world.
///
/// The intended move happens with probability `1 - slip`; each of the other
/// three moves with `slip / 3`. Moves off the grid leave the agent in place.
/// Target and unsafe cells are absorbing. Any action in the target cell
/// earns reward 1.
pub fn build_gridworld(cfg: &GridConfig) -> Result<GridWorld, MdpError> {
    cfg.validate()?;
    let states: Vec<String> = (0..cfg.rows)
        .flat_map(|r| (0..cfg.cols).map(move |c| format!("r{r}c{c}")))
        .collect();
    let actions = Move::ALL.iter().map(|m| m.name().to_string()).collect();
    let mut mdp = Mdp::new(states, actions)?;
    mdp.declare_proposition(TARGET_LABEL);
    mdp.declare_proposition(UNSAFE_LABEL);

    let id = |c: Cell| StateId(c.0 * cfg.cols + c.1);
    for r in 0..cfg.rows {
        for c in 0..cfg.cols {
            let cell = Cell(r, c);
            let s = id(cell);
            let absorbing = cell == cfg.target || cfg.unsafe_cells.contains(&cell);
            for intended in Move::ALL {
                let a = intended.action();
                if absorbing {
                    mdp.set_transition_sparse(s, a, &[(s, 1.0)])?;
                } else {
                    let entries: Vec<(StateId, f64)> = Move::ALL
                        .iter()
                        .map(|&m| {
                            let p = if m == intended { 1.0 - cfg.slip } else { cfg.slip / 3.0 };
                            (id(step(cfg, cell, m)), p)
                        })
                        .collect();
                    mdp.set_transition_sparse(s, a, &entries)?;
                }
                if cell == cfg.target {
                    mdp.set_reward(s, a, 1.0)?;
                }
            }
        }
    }
    mdp.add_label(id(cfg.target), TARGET_LABEL)?;
    for &u in &cfg.unsafe_cells {
        mdp.add_label(id(u), UNSAFE_LABEL)?;
    }
    mdp.set_init_point(id(cfg.start))?;
    Ok(GridWorld {
        config: cfg.clone(),
        mdp,
    })
}
