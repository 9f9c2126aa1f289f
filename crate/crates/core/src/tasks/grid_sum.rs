//! Grid Sum Game: players alternately claim cells adjacent to the selected
//! region; the lower total wins.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{join, neighbours, rng_for};
use crate::dataset::mix;
use crate::protocol::{CommandGrammar, CommandKind, ParsedCommand, PayloadShape};
use crate::task::{
    Category, Difficulty, Game, Generated, InvalidPolicy, Params, Reply, Setup, TaskError, Verdict,
};

pub const ID: &str = "grid_sum_game";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Player,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSumState {
    pub n: usize,
    /// Row-major values, a permutation of `1..=n*n`.
    pub values: Vec<u32>,
    pub owner: Vec<Option<Owner>>,
    pub player_sum: u32,
    pub system_sum: u32,
    pub opponent: ChaCha8Rng,
}

impl GridSumState {
    pub fn new(n: usize, values: Vec<u32>, opponent: ChaCha8Rng) -> Self {
        Self {
            n,
            owner: vec![None; values.len()],
            values,
            player_sum: 0,
            system_sum: 0,
            opponent,
        }
    }

    pub fn value(&self, (r, c): (usize, usize)) -> u32 {
        self.values[(r - 1) * self.n + (c - 1)]
    }

    fn index(&self, (r, c): (usize, usize)) -> usize {
        (r - 1) * self.n + (c - 1)
    }

    pub fn selected_sum(&self) -> u32 {
        self.owner
            .iter()
            .zip(&self.values)
            .filter(|(o, _)| o.is_some())
            .map(|(_, v)| v)
            .sum()
    }

    pub fn is_full(&self) -> bool {
        self.owner.iter().all(Option::is_some)
    }

    /// Cells a side may claim now: any cell on an empty board, otherwise
    /// unselected cells sharing an edge with a selected one.
    pub fn legal_cells(&self) -> Vec<(usize, usize)> {
        let empty = self.owner.iter().all(Option::is_none);
        let mut out = Vec::new();
        for r in 1..=self.n {
            for c in 1..=self.n {
                if self.owner[self.index((r, c))].is_some() {
                    continue;
                }
                let touching = neighbours(r, c, self.n, self.n)
                    .into_iter()
                    .any(|q| self.owner[self.index(q)].is_some());
                if empty || touching {
                    out.push((r, c));
                }
            }
        }
        out
    }

    pub fn is_legal(&self, cell: (usize, usize)) -> bool {
        self.legal_cells().contains(&cell)
    }

    fn claim(&mut self, cell: (usize, usize), who: Owner) {
        let i = self.index(cell);
        self.owner[i] = Some(who);
        match who {
            Owner::Player => self.player_sum += self.values[i],
            Owner::System => self.system_sum += self.values[i],
        }
    }

    fn final_reply(&self, prefix: String) -> Reply {
        let (p, s) = (self.player_sum, self.system_sum);
        if p < s {
            Reply::new(format!("{prefix}Game over. Your sum: {p}, my sum: {s}. You win!"), Verdict::Solved)
        } else {
            Reply::new(format!("{prefix}Game over. Your sum: {p}, my sum: {s}. You lose."), Verdict::Fatal)
        }
    }
}

pub fn render(values: &[u32], n: usize) -> String {
    values
        .chunks(n)
        .map(|row| join(row, " "))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Recovers the grid values from a rendered prompt.
pub fn parse_grid(problem_text: &str) -> Option<(Vec<u32>, usize)> {
    let after = problem_text.split("Each number appears exactly once\n").nth(1)?;
    let rows: Vec<Vec<u32>> = after
        .lines()
        .take_while(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|t| t.parse().ok()).collect::<Option<Vec<u32>>>())
        .collect::<Option<_>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return None;
    }
    Some((rows.concat(), n))
}

pub struct GridSumGame {
    grammar: CommandGrammar,
}

impl GridSumGame {
    pub fn new() -> Self {
        Self {
            grammar: CommandGrammar::new(&[("My Choice", CommandKind::Choice, PayloadShape::Integers)]),
        }
    }
}

impl Default for GridSumGame {
    fn default() -> Self {
        Self::new()
    }
}

fn problem_text(values: &[u32], n: usize) -> String {
    let total = n * n;
    let grid = render(values, n);
    format!(
        "Let's play the Grid Sum Game! Your task is to choose cells strategically to win.

Rules:
1. Game Setup:
   - Grid size: {n}*{n}
   - Grid already filled with numbers 1 to {total}
   - Each number appears exactly once
{grid}

2. Game Mechanics:
   - Players take turns selecting unselected cells
   - You move first
   - Any cell chosen after first turn must be adjacent to a previously selected cell
   - Cells are adjacent if they share an edge (up/down/left/right)
   - Game ends when all cells are selected
   - You win if your selected numbers sum < my sum

3. Adjacency Example:
   For cell (2,2):
   - Adjacent cells: (1,2), (2,1), (2,3), (3,2)
   - Diagonal cells like (1,1) are not adjacent
   - Must choose a cell adjacent to any previously selected cell

Query Type:
Format: \"My Choice: x y\"
where x is row (1 to {n}) and y is column (1 to {n})

Example Interaction:
You: \"My Choice: 2 2\"
- Selecting cell at row 2, column 2
Me: \"My Choice: 2 3\"
- Cell is adjacent to (2,2)
You: \"My Choice: 1 2\"
- Cell is adjacent to (2,2)

Instructions:
1. Make choices based on grid values
2. Use exactly the format shown above
3. Explain your reasoning before each choice

Remember:
- Use exact format: \"My Choice: x y\"
- Choose only adjacent cells after first turn
- First move can be any cell
- Keep track of both sums
- Plan moves to keep your sum smaller
- Invalid move = automatic loss

Ready to start? Make your first choice!"
    )
}

impl Game for GridSumGame {
    type State = GridSumState;

    fn id(&self) -> &'static str {
        ID
    }

    fn category(&self) -> Category {
        Category::SG
    }

    fn level_size(&self, difficulty: Difficulty) -> u32 {
        difficulty.pick([3, 5, 8])
    }

    fn grammar(&self) -> &CommandGrammar {
        &self.grammar
    }

    fn invalid_policy(&self) -> InvalidPolicy {
        InvalidPolicy::ImmediateLoss
    }

    fn generate(&self, setup: &Setup) -> Result<Generated<GridSumState>, TaskError> {
        let n = setup.size as usize;
        if n == 0 {
            return Err(TaskError::GenerationFailure { task: ID.into(), attempts: 0 });
        }
        let mut rng = rng_for(setup.seed);
        let mut values: Vec<u32> = (1..=(n * n) as u32).collect();
        values.shuffle(&mut rng);
        let opponent = rng_for(mix(setup.seed, rng.random()));
        let state = GridSumState::new(n, values, opponent);
        let mut params = Params::new();
        params.insert("n".into(), n as i64);
        Ok(Generated {
            objective: format!("keep the player's sum below the system's on grid {}", join(&state.values, ",")),
            problem_text: problem_text(&state.values, n),
            params,
            state,
        })
    }

    fn respond(&self, state: &mut GridSumState, command: &ParsedCommand) -> Reply {
        let cell = match (command.kind, command.integers().as_deref()) {
            (CommandKind::Choice, Some(&[r, c]))
                if (1..=state.n as i64).contains(&r) && (1..=state.n as i64).contains(&c) =>
            {
                (r as usize, c as usize)
            }
            _ => return Reply::new("Invalid move", Verdict::Invalid),
        };
        if !state.is_legal(cell) {
            return Reply::new("Invalid move", Verdict::Invalid);
        }
        state.claim(cell, Owner::Player);
        if state.is_full() {
            return state.final_reply(String::new());
        }
        let options = state.legal_cells();
        let &reply = options.choose(&mut state.opponent).expect("a region always has a free neighbour");
        state.claim(reply, Owner::System);
        let choice = format!("My Choice: {} {}", reply.0, reply.1);
        if state.is_full() {
            return state.final_reply(format!("{choice}\n"));
        }
        Reply::new(choice, Verdict::Continue)
    }

    fn check(&self, state: &GridSumState) -> Result<(), String> {
        let mut sorted = state.values.clone();
        sorted.sort_unstable();
        if sorted != (1..=(state.n * state.n) as u32).collect::<Vec<_>>() {
            return Err("grid must hold a permutation of 1..n*n".into());
        }
        Ok(())
    }

    fn reseed_opponent(&self, state: &mut GridSumState, seed: u64) {
        state.opponent = rng_for(seed);
    }
}
