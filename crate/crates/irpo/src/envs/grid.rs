//! Gridworld MDP: ASCII map loading, state layout, and the step function.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    /// Map validation collects every violation before reporting.
    #[error("invalid map: {}", .0.join("; "))]
    InvalidMap(Vec<String>),
    #[error("invalid environment parameters: {0}")]
    BadParams(String),
    #[error("step called on a terminal state (t={t}, at_goal={at_goal})")]
    StepAfterTerminal { t: usize, at_goal: bool },
}

/// The four-action move set. Indices are the policy's output slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Left = 0,
    Up = 1,
    Right = 2,
    Down = 3,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Left, Action::Up, Action::Right, Action::Down];

    pub fn from_index(i: usize) -> Action {
        Self::ALL[i]
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Left => (-1, 0),
            Action::Up => (0, -1),
            Action::Right => (1, 0),
            Action::Down => (0, 1),
        }
    }
}

/// Optional per-step reward shaping. `NegativeDistance` exists for sanity
/// tests with dense rewards; every shipped environment uses `None`, keeping
/// extrinsic rewards in {0, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shaping {
    #[default]
    None,
    NegativeDistance,
}

/// Immutable description of a gridworld: layout, start/goal, horizon, discount.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    /// Row-major; `true` = free cell.
    cells: Vec<bool>,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub horizon: usize,
    pub gamma: f64,
    pub shaping: Shaping,
}

/// Mutable episode state: agent position, goal position, step counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridState {
    pub agent: (usize, usize),
    pub goal: (usize, usize),
    pub t: usize,
}

impl GridSpec {
    pub fn is_free(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.cells[y * self.width + x]
    }

    /// All free cells in row-major order.
    pub fn free_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.cells[y * self.width + x] {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn initial_state(&self) -> GridState {
        GridState {
            agent: self.start,
            goal: self.goal,
            t: 0,
        }
    }

    /// 4-dimensional observation `(agent x, agent y, goal x, goal y)`,
    /// normalized to `[0, 1]` by the grid extent.
    pub fn observe(&self, state: &GridState) -> Vec<f64> {
        let nx = (self.width - 1).max(1) as f64;
        let ny = (self.height - 1).max(1) as f64;
        vec![
            state.agent.0 as f64 / nx,
            state.agent.1 as f64 / ny,
            state.goal.0 as f64 / nx,
            state.goal.1 as f64 / ny,
        ]
    }

    /// Maps an observation back to the agent's grid cell.
    pub fn cell_of_obs(&self, obs: &[f64]) -> (usize, usize) {
        let nx = (self.width - 1).max(1) as f64;
        let ny = (self.height - 1).max(1) as f64;
        (
            (obs[0] * nx).round() as usize,
            (obs[1] * ny).round() as usize,
        )
    }

    pub fn with_shaping(mut self, shaping: Shaping) -> Self {
        self.shaping = shaping;
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// One environment transition. Moves are blocked by walls and the boundary;
/// the reward is `+1` exactly when the next cell is the goal; episodes also
/// end when the horizon is reached.
pub fn step(
    spec: &GridSpec,
    state: &GridState,
    action: Action,
) -> Result<(GridState, f64, bool), GridError> {
    let at_goal = state.agent == state.goal;
    if at_goal || state.t >= spec.horizon {
        return Err(GridError::StepAfterTerminal {
            t: state.t,
            at_goal,
        });
    }
    let (dx, dy) = action.delta();
    let nx = state.agent.0 as isize + dx;
    let ny = state.agent.1 as isize + dy;
    let next_cell = if nx >= 0 && ny >= 0 && spec.is_free(nx as usize, ny as usize) {
        (nx as usize, ny as usize)
    } else {
        state.agent
    };
    let next = GridState {
        agent: next_cell,
        goal: state.goal,
        t: state.t + 1,
    };
    let reached = next_cell == spec.goal;
    let mut reward = if reached { 1.0 } else { 0.0 };
    if let Shaping::NegativeDistance = spec.shaping {
        let dist = next_cell.0.abs_diff(spec.goal.0) + next_cell.1.abs_diff(spec.goal.1);
        reward += -(dist as f64) / (spec.width + spec.height) as f64;
    }
    let terminal = reached || next.t >= spec.horizon;
    Ok((next, reward, terminal))
}

/// Parses an ASCII map (`#` wall, `.` free, one `S`, one `G`) into a spec.
///
/// All violations found are reported together: ragged rows, unknown
/// characters, missing or duplicate start/goal markers, and an unreachable
/// goal (checked by flood fill).
pub fn load_grid(map_text: &str, horizon: usize, gamma: f64) -> Result<GridSpec, GridError> {
    if horizon < 1 {
        return Err(GridError::BadParams("horizon must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(GridError::BadParams(format!(
            "gamma must be in [0, 1), got {gamma}"
        )));
    }

    let lines: Vec<&str> = map_text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.is_empty())
        .collect();
    let mut violations = Vec::new();
    if lines.is_empty() {
        return Err(GridError::InvalidMap(vec!["map is empty".into()]));
    }
    let width = lines[0].len();
    let height = lines.len();
    for (y, line) in lines.iter().enumerate() {
        if line.len() != width {
            violations.push(format!(
                "ragged row {y}: length {} != {width}",
                line.len()
            ));
        }
    }

    let mut cells = vec![false; width * height];
    let mut start = None;
    let mut goal = None;
    for (y, line) in lines.iter().enumerate() {
        for (x, ch) in line.chars().enumerate() {
            if x >= width {
                continue;
            }
            match ch {
                '#' => {}
                '.' | 'S' | 'G' => {
                    cells[y * width + x] = true;
                    if ch == 'S' {
                        if start.replace((x, y)).is_some() {
                            violations.push(format!("duplicate start marker at ({x}, {y})"));
                        }
                    } else if ch == 'G' {
                        if goal.replace((x, y)).is_some() {
                            violations.push(format!("duplicate goal marker at ({x}, {y})"));
                        }
                    }
                }
                other => violations.push(format!("unknown character '{other}' at ({x}, {y})")),
            }
        }
    }
    if start.is_none() {
        violations.push("missing start marker 'S'".into());
    }
    if goal.is_none() {
        violations.push("missing goal marker 'G'".into());
    }

    if let (Some(s), Some(g)) = (start, goal) {
        if !flood_reaches(&cells, width, height, s, g) {
            violations.push(format!(
                "goal at ({}, {}) is unreachable from start at ({}, {})",
                g.0, g.1, s.0, s.1
            ));
        }
    }

    if !violations.is_empty() {
        return Err(GridError::InvalidMap(violations));
    }
    Ok(GridSpec {
        width,
        height,
        cells,
        start: start.unwrap(),
        goal: goal.unwrap(),
        horizon,
        gamma,
        shaping: Shaping::None,
    })
}

fn flood_reaches(
    cells: &[bool],
    width: usize,
    height: usize,
    from: (usize, usize),
    to: (usize, usize),
) -> bool {
    let mut seen = vec![false; cells.len()];
    let mut stack = vec![from];
    seen[from.1 * width + from.0] = true;
    while let Some((x, y)) = stack.pop() {
        if (x, y) == to {
            return true;
        }
        for action in Action::ALL {
            let (dx, dy) = action.delta();
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx < 0 || ny < 0 || nx as usize >= width || ny as usize >= height {
                continue;
            }
            let idx = ny as usize * width + nx as usize;
            if cells[idx] && !seen[idx] {
                seen[idx] = true;
                stack.push((nx as usize, ny as usize));
            }
        }
    }
    false
}
