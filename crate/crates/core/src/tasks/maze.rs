//! Maze Navigation: reach the finish cell while the L/R and U/D buttons may
//! be secretly swapped.

use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::Rng;

use super::{join, neighbours, rng_for};
use crate::protocol::{CommandGrammar, CommandKind, ParsedCommand, PayloadShape};
use crate::task::{
    Category, Difficulty, Game, Generated, Params, Reply, Setup, TaskError, Verdict,
    MAX_GENERATION_RETRIES,
};

pub const ID: &str = "maze_navigation";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Normal,
    Finish,
    Dangerous,
}

impl Cell {
    pub fn symbol(self) -> char {
        match self {
            Cell::Normal => '.',
            Cell::Finish => 'F',
            Cell::Dangerous => '*',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '.' => Some(Cell::Normal),
            'F' => Some(Cell::Finish),
            '*' => Some(Cell::Dangerous),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    U,
    D,
    L,
    R,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::U, Direction::D, Direction::L, Direction::R];

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "U" => Some(Direction::U),
            "D" => Some(Direction::D),
            "L" => Some(Direction::L),
            "R" => Some(Direction::R),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::U => "U",
            Direction::D => "D",
            Direction::L => "L",
            Direction::R => "R",
        }
    }

    /// The button's effect under the given swaps.
    pub fn effective(self, swap_lr: bool, swap_ud: bool) -> Direction {
        match self {
            Direction::U if swap_ud => Direction::D,
            Direction::D if swap_ud => Direction::U,
            Direction::L if swap_lr => Direction::R,
            Direction::R if swap_lr => Direction::L,
            d => d,
        }
    }
}

/// Square grid of cells, addressed 1-based as `(row, col)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeGrid {
    pub n: usize,
    pub cells: Vec<Cell>,
}

impl MazeGrid {
    pub fn get(&self, (row, col): (usize, usize)) -> Cell {
        self.cells[(row - 1) * self.n + (col - 1)]
    }

    /// Where a move in `dir` lands; off-grid moves stay put.
    pub fn step(&self, (row, col): (usize, usize), dir: Direction) -> (usize, usize) {
        let (r, c) = match dir {
            Direction::U => (row.wrapping_sub(1), col),
            Direction::D => (row + 1, col),
            Direction::L => (row, col.wrapping_sub(1)),
            Direction::R => (row, col + 1),
        };
        if (1..=self.n).contains(&r) && (1..=self.n).contains(&c) {
            (r, c)
        } else {
            (row, col)
        }
    }

    pub fn finish(&self) -> Option<(usize, usize)> {
        let i = self.cells.iter().position(|&c| c == Cell::Finish)?;
        Some((i / self.n + 1, i % self.n + 1))
    }

    pub fn dangerous(&self) -> Vec<(usize, usize)> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i] == Cell::Dangerous)
            .map(|i| (i / self.n + 1, i % self.n + 1))
            .collect()
    }

    /// Shortest safe path length from `from` to the finish, ignoring controls.
    pub fn bfs_distance(&self, from: (usize, usize)) -> Option<usize> {
        let target = self.finish()?;
        let mut dist = vec![usize::MAX; self.cells.len()];
        let idx = |(r, c): (usize, usize)| (r - 1) * self.n + (c - 1);
        let mut queue = VecDeque::from([from]);
        dist[idx(from)] = 0;
        while let Some(p) = queue.pop_front() {
            if p == target {
                return Some(dist[idx(p)]);
            }
            for q in neighbours(p.0, p.1, self.n, self.n) {
                if self.get(q) != Cell::Dangerous && dist[idx(q)] == usize::MAX {
                    dist[idx(q)] = dist[idx(p)] + 1;
                    queue.push_back(q);
                }
            }
        }
        None
    }

    /// One row per line, cells separated by spaces.
    pub fn render(&self) -> String {
        self.cells
            .chunks(self.n)
            .map(|row| join(row.iter().map(|c| c.symbol()), " "))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn parse(text: &str) -> Option<Self> {
        let rows: Vec<Vec<Cell>> = text
            .lines()
            .map(|l| l.split_whitespace().map(|t| t.chars().next().and_then(Cell::from_symbol)).collect())
            .collect::<Option<_>>()?;
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self {
            n,
            cells: rows.into_iter().flatten().collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeState {
    pub grid: MazeGrid,
    pub position: (usize, usize),
    pub swap_lr: bool,
    pub swap_ud: bool,
}

pub struct MazeNavigation {
    grammar: CommandGrammar,
}

impl MazeNavigation {
    pub fn new() -> Self {
        Self {
            grammar: CommandGrammar::new(&[("My Move", CommandKind::Move, PayloadShape::Direction)]),
        }
    }
}

impl Default for MazeNavigation {
    fn default() -> Self {
        Self::new()
    }
}

pub(crate) fn pos_str((r, c): (usize, usize)) -> String {
    format!("({r}, {c})")
}

fn problem_text(grid: &MazeGrid) -> String {
    let n = grid.n;
    let start = pos_str((1, 1));
    let finish = pos_str(grid.finish().expect("one finish cell"));
    let dangerous = join(grid.dangerous().into_iter().map(pos_str), ", ");
    let layout = grid.render();
    format!(
        "Let's play Maze Navigation Game! Your task is to navigate through a maze with potentially swapped controls to reach the finish point.

Rules:
1. Game Field:
   - A {n} * {n} grid with three types of cells:
     * \".\" - normal cell you can visit
     * \"F\" - finish cell (exactly one)
     * \"*\" - dangerous cell (avoid these)
   - Coordinates are 1-based indexing: (row, column)
   - Current cell positions:
     * Start: {start} (top-left corner)
     * Finish: {finish}
     * Dangerous cells:
     {dangerous}

2. Movement Controls:
   - Four direction buttons: U(up), D(down), L(left), R(right)
   - Button Functions may be swapped:
     * L and R might be swapped with each other
     * U and D might be swapped with each other
   - Swaps (if any) are set at game start and remain fixed
   - Effects of each button when NOT swapped:
     * U: moves to (current_row - 1, current_col)
     * D: moves to (current_row + 1, current_col)
     * L: moves to (current_row, current_col - 1)
     * R: moves to (current_row, current_col + 1)

3. Movement Rules:
   - Each move returns your new position (x, y)
   - If move is invalid (out of grid), position stays same
   - Grid boundaries: 1 <= row <= {n}, 1 <= column <= {n}
   - If you hit dangerous cell, returns (-1, -1) and game ends
   - When you reach finish cell {finish}, game ends successfully

Move Types:
1. To make a move:
   Format: \"My Move: X\"
   where X is one of: U, D, L, R
   Example: \"My Move: R\"

2. System Response:
   Format: \"x y\"
   where:
   - (x, y) is your new position
   - (-1, -1) if you hit dangerous cell
   Example: After \"My Move: R\" at (1, 1), response might be \"1 2\"

Instructions:
1. Make moves based on previous responses
2. Use exactly the format shown above
3. Explain your reasoning before each move

Remember:
- Start position is {start}
- Controls might be swapped
- Avoid dangerous cells at: {dangerous}
- Target is to reach {finish}
- Watch for grid boundaries: 1 <= row <= {n}, 1 <= column <= {n}

Current Grid Layout:
{layout}

Ready to start? Make your first query!"
    )
}

/// Recovers the grid from a rendered prompt.
pub fn parse_layout(problem_text: &str) -> Option<MazeGrid> {
    let after = problem_text.split("Current Grid Layout:\n").nth(1)?;
    let block: Vec<&str> = after.lines().take_while(|l| !l.trim().is_empty()).collect();
    MazeGrid::parse(&block.join("\n"))
}

fn try_generate(n: usize, rng: &mut impl Rng) -> MazeGrid {
    let total = n * n;
    let density = rng.random_range(0.10..=0.25);
    let hazards = ((density * total as f64).round() as usize).max(1);
    let finish = rng.random_range(1..total);
    let mut cells = vec![Cell::Normal; total];
    cells[finish] = Cell::Finish;
    let free: Vec<usize> = (1..total).filter(|&i| i != finish).collect();
    for i in sample(rng, free.len(), hazards.min(free.len())) {
        cells[free[i]] = Cell::Dangerous;
    }
    MazeGrid { n, cells }
}

impl Game for MazeNavigation {
    type State = MazeState;

    fn id(&self) -> &'static str {
        ID
    }

    fn category(&self) -> Category {
        Category::SO
    }

    fn level_size(&self, difficulty: Difficulty) -> u32 {
        difficulty.pick([4, 5, 6])
    }

    fn grammar(&self) -> &CommandGrammar {
        &self.grammar
    }

    fn generate(&self, setup: &Setup) -> Result<Generated<MazeState>, TaskError> {
        let n = setup.size as usize;
        let mut rng = rng_for(setup.seed);
        if n < 2 {
            return Err(TaskError::GenerationFailure { task: ID.into(), attempts: 0 });
        }
        let grid = (0..MAX_GENERATION_RETRIES)
            .map(|_| try_generate(n, &mut rng))
            .find(|g| g.bfs_distance((1, 1)).is_some())
            .ok_or(TaskError::GenerationFailure {
                task: ID.into(),
                attempts: MAX_GENERATION_RETRIES,
            })?;
        let swap_lr = rng.random_bool(0.5);
        let swap_ud = rng.random_bool(0.5);
        let mut params = Params::new();
        params.insert("n".into(), n as i64);
        params.insert("dangerous".into(), grid.dangerous().len() as i64);
        let objective = format!(
            "reach {} (swap_lr={swap_lr}, swap_ud={swap_ud})",
            pos_str(grid.finish().expect("finish placed"))
        );
        Ok(Generated {
            problem_text: problem_text(&grid),
            objective,
            params,
            state: MazeState {
                grid,
                position: (1, 1),
                swap_lr,
                swap_ud,
            },
        })
    }

    fn respond(&self, state: &mut MazeState, command: &ParsedCommand) -> Reply {
        let dir = match (command.kind, Direction::parse(&command.payload)) {
            (CommandKind::Move, Some(d)) => d,
            _ => return Reply::new("Invalid", Verdict::Invalid),
        };
        let next = state.grid.step(state.position, dir.effective(state.swap_lr, state.swap_ud));
        state.position = next;
        match state.grid.get(next) {
            Cell::Dangerous => Reply::new("-1 -1", Verdict::Fatal),
            Cell::Finish => Reply::new(format!("{} {} (finish reached)", next.0, next.1), Verdict::Solved),
            Cell::Normal => Reply::new(format!("{} {}", next.0, next.1), Verdict::Continue),
        }
    }

    fn check(&self, state: &MazeState) -> Result<(), String> {
        let g = &state.grid;
        if g.cells.iter().filter(|&&c| c == Cell::Finish).count() != 1 {
            return Err("need exactly one finish cell".into());
        }
        if g.get((1, 1)) != Cell::Normal {
            return Err("start must be a normal cell".into());
        }
        g.bfs_distance((1, 1)).map(|_| ()).ok_or_else(|| "no safe path to finish".to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(layout: &str, swap_lr: bool, swap_ud: bool, position: (usize, usize)) -> MazeState {
        MazeState { grid: MazeGrid::parse(layout).unwrap(), position, swap_lr, swap_ud }
    }

    fn mv(d: &str) -> ParsedCommand {
        ParsedCommand::new(CommandKind::Move, d)
    }

    const LAYOUT: &str = ". . . .\n. . . *\n. * . .\n. . . F";

    #[test]
    fn boundary_keeps_position() {
        let game = MazeNavigation::new();
        let mut s = state(LAYOUT, false, false, (1, 1));
        assert_eq!(game.respond(&mut s, &mv("U")), Reply::new("1 1", Verdict::Continue));
    }

    #[test]
    fn swapped_left_moves_right() {
        let game = MazeNavigation::new();
        let mut s = state(LAYOUT, true, false, (2, 2));
        assert_eq!(game.respond(&mut s, &mv("L")).feedback, "2 3");
    }

    #[test]
    fn danger_and_finish() {
        let game = MazeNavigation::new();
        let mut s = state(LAYOUT, false, false, (2, 3));
        assert_eq!(game.respond(&mut s, &mv("R")), Reply::new("-1 -1", Verdict::Fatal));
        let mut s = state(LAYOUT, false, true, (3, 4));
        assert_eq!(game.respond(&mut s, &mv("U")).verdict, Verdict::Solved);
    }

    #[test]
    fn non_direction_is_invalid() {
        let game = MazeNavigation::new();
        let mut s = state(LAYOUT, false, false, (1, 1));
        assert_eq!(game.respond(&mut s, &mv("X")).verdict, Verdict::Invalid);
        assert_eq!(s.position, (1, 1));
    }

    #[test]
    fn generated_instances_have_paths() {
        let game = MazeNavigation::new();
        for level in Difficulty::ALL {
            for seed in 0..100 {
                let g = game.generate(&Setup { difficulty: level, size: game.level_size(level), seed }).unwrap();
                game.check(&g.state).unwrap();
                assert_eq!(g.state.grid.n as u32, game.level_size(level));
                assert_eq!(parse_layout(&g.problem_text).unwrap(), g.state.grid);
            }
        }
    }

    #[test]
    fn feedback_never_names_directions() {
        let game = MazeNavigation::new();
        for seed in 0..20 {
            let mut s = game.generate(&Setup { difficulty: Difficulty::Hard, size: 6, seed }).unwrap().state;
            for d in ["U", "D", "L", "R", "R", "D"] {
                let r = game.respond(&mut s, &mv(d));
                assert!(!r.feedback.contains(['U', 'D', 'L', 'R']), "{}", r.feedback);
                if r.verdict != Verdict::Continue {
                    break;
                }
            }
        }
    }
}
