//! Knight Battle: White (the player) races a randomly moving Black knight to
//! a capture or to a safe target square.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::rng_for;
use crate::dataset::mix;
use crate::protocol::{CommandGrammar, CommandKind, ParsedCommand, PayloadShape};
use crate::task::{
    Category, Difficulty, Game, Generated, InvalidPolicy, Params, Reply, Setup, TaskError,
    Verdict, MAX_GENERATION_RETRIES,
};

pub const ID: &str = "knight_battle";

pub type Square = (i64, i64);

const OFFSETS: [Square; 8] = [(1, 2), (-1, 2), (1, -2), (-1, -2), (2, 1), (2, -1), (-2, 1), (-2, -1)];

/// On-board knight moves from `pos` on an `n`×`m` board (1-based `x`, `y`).
pub fn knight_moves(pos: Square, n: i64, m: i64) -> Vec<Square> {
    OFFSETS
        .iter()
        .map(|&(dx, dy)| (pos.0 + dx, pos.1 + dy))
        .filter(|&(x, y)| (1..=n).contains(&x) && (1..=m).contains(&y))
        .collect()
}

/// Whether a knight on `attacker` could move to `square` next turn.
pub fn attacks(attacker: Square, square: Square) -> bool {
    let (dx, dy) = ((attacker.0 - square.0).abs(), (attacker.1 - square.1).abs());
    (dx == 1 && dy == 2) || (dx == 2 && dy == 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnightBattleState {
    pub n: i64,
    pub white: Square,
    pub black: Square,
    pub white_target: Square,
    pub black_target: Square,
    pub opponent: ChaCha8Rng,
}

impl KnightBattleState {
    pub fn on_board(&self, (x, y): Square) -> bool {
        (1..=self.n).contains(&x) && (1..=self.n).contains(&y)
    }
}

pub struct KnightBattle {
    grammar: CommandGrammar,
}

impl KnightBattle {
    pub fn new() -> Self {
        Self {
            grammar: CommandGrammar::new(&[("My Move", CommandKind::Move, PayloadShape::Integers)]),
        }
    }
}

impl Default for KnightBattle {
    fn default() -> Self {
        Self::new()
    }
}

fn problem_text(s: &KnightBattleState) -> String {
    let n = s.n;
    let (x1, y1) = s.white;
    let (x2, y2) = s.black;
    let (twx, twy) = s.white_target;
    let (tbx, tby) = s.black_target;
    format!(
        "Let's play the Knight Battle Game! You are the White Knight and will move first. Your task is to win by either capturing the Black Knight or reaching your target position safely.

Rules:
1. Game Setup:
   - Chessboard size: {n}*{n}
   - You (White Knight) start at: ({x1},{y1})
   - Opponent (Black Knight) starts at: ({x2},{y2})
   - Your target: ({twx},{twy})
   - Opponent's target: ({tbx},{tby})

2. Knight's Movement Rules:
   From your current position (x,y), you can move to:
   1. Up 2, Right 1:    (x+1, y+2)
   2. Up 2, Left 1:     (x-1, y+2)
   3. Down 2, Right 1:  (x+1, y-2)
   4. Down 2, Left 1:   (x-1, y-2)
   5. Right 2, Up 1:    (x+2, y+1)
   6. Right 2, Down 1:  (x+2, y-1)
   7. Left 2, Up 1:     (x-2, y+1)
   8. Left 2, Down 1:   (x-2, y-1)
   * All moves must stay within board boundaries (1 to {n}, 1 to {n})

3. Victory Conditions:
   You win if either:
   - You move to Black Knight's position (capture)
   - You reach ({twx},{twy}) and Black Knight cannot attack this position
   * A position is under attack if opponent's knight can move there next turn

Query Type:
Format: \"My Move: x y\"
where x,y are your new coordinates
Example: \"My Move: 4 4\"

Example Interaction:
You (at {x1},{y1}): \"My Move: 4 4\"
- Moving to position (4,4)
Me: \"6 3\"
- Black Knight moves to (6,3)
You: \"My Move: 5 6\"
- Moving to position (5,6)
Me: \"5 1\"
- Black Knight moves to (5,1)

Instructions:
1. Make moves based on board state
2. Use exactly the format shown above
3. Explain your reasoning before each move

Remember:
- You are White Knight and move first
- Use L-shaped movements only
- Use exact format: \"My Move: X Y\"
- Stay within board boundaries
- Plan moves to either:
  * Capture Black Knight
  * Reach ({twx},{twy}) safely
- Invalid move = immediate loss
- You have at most 15 rounds to defeat the Black Knight

Ready to start? Make your first move!"
    )
}

/// Starting squares read back from a rendered prompt:
/// `(n, white, black, white_target, black_target)`.
pub fn parse_setup(problem_text: &str) -> Option<(i64, Square, Square, Square, Square)> {
    let grab = |label: &str| -> Option<Square> {
        let rest = problem_text.split(label).nth(1)?;
        let inner = rest.trim_start().strip_prefix('(')?.split(')').next()?;
        let (x, y) = inner.split_once(',')?;
        Some((x.trim().parse().ok()?, y.trim().parse().ok()?))
    };
    let n = problem_text
        .split("Chessboard size: ")
        .nth(1)?
        .split('*')
        .next()?
        .trim()
        .parse()
        .ok()?;
    Some((
        n,
        grab("You (White Knight) start at:")?,
        grab("Opponent (Black Knight) starts at:")?,
        grab("Your target:")?,
        grab("Opponent's target:")?,
    ))
}

impl Game for KnightBattle {
    type State = KnightBattleState;

    fn id(&self) -> &'static str {
        ID
    }

    fn category(&self) -> Category {
        Category::SG
    }

    fn level_size(&self, difficulty: Difficulty) -> u32 {
        difficulty.pick([6, 8, 16])
    }

    fn grammar(&self) -> &CommandGrammar {
        &self.grammar
    }

    fn invalid_policy(&self) -> InvalidPolicy {
        InvalidPolicy::ImmediateLoss
    }

    fn generate(&self, setup: &Setup) -> Result<Generated<KnightBattleState>, TaskError> {
        let n = i64::from(setup.size);
        let mut rng = rng_for(setup.seed);
        let failure = TaskError::GenerationFailure {
            task: ID.into(),
            attempts: MAX_GENERATION_RETRIES,
        };
        if n < 3 {
            return Err(failure);
        }
        let squares: Vec<Square> = (1..=n).flat_map(|x| (1..=n).map(move |y| (x, y))).collect();
        let picked = (0..MAX_GENERATION_RETRIES).find_map(|_| {
            let four: Vec<Square> = squares.choose_multiple(&mut rng, 4).copied().collect();
            (!knight_moves(four[0], n, n).is_empty()).then_some(four)
        });
        let four = picked.ok_or(failure)?;
        let opponent = rng_for(mix(setup.seed, rng.random()));
        let state = KnightBattleState {
            n,
            white: four[0],
            black: four[1],
            white_target: four[2],
            black_target: four[3],
            opponent,
        };
        let mut params = Params::new();
        params.insert("n".into(), n);
        Ok(Generated {
            objective: format!(
                "capture black at {:?} or reach {:?} unattacked",
                state.black, state.white_target
            ),
            problem_text: problem_text(&state),
            params,
            state,
        })
    }

    fn respond(&self, state: &mut KnightBattleState, command: &ParsedCommand) -> Reply {
        let target = match (command.kind, command.integers().as_deref()) {
            (CommandKind::Move, Some(&[x, y])) => (x, y),
            _ => return Reply::new("Invalid", Verdict::Invalid),
        };
        if !state.on_board(target) || !attacks(state.white, target) {
            return Reply::new("Invalid move", Verdict::Invalid);
        }
        state.white = target;
        if state.white == state.black {
            return Reply::new("You captured the Black Knight. You win!", Verdict::Solved);
        }
        if state.white == state.white_target && !attacks(state.black, state.white) {
            return Reply::new("You reached your target safely. You win!", Verdict::Solved);
        }
        let options = knight_moves(state.black, state.n, state.n);
        let Some(&next) = options.choose(&mut state.opponent) else {
            return Reply::new("Black Knight cannot move", Verdict::Continue);
        };
        state.black = next;
        let (bx, by) = next;
        if state.black == state.white {
            return Reply::new(format!("{bx} {by}\nBlack Knight captured you. You lose."), Verdict::Fatal);
        }
        if state.black == state.black_target && !attacks(state.white, state.black) {
            return Reply::new(
                format!("{bx} {by}\nBlack Knight reached its target safely. You lose."),
                Verdict::Fatal,
            );
        }
        Reply::new(format!("{bx} {by}"), Verdict::Continue)
    }

    fn check(&self, s: &KnightBattleState) -> Result<(), String> {
        let all = [s.white, s.black, s.white_target, s.black_target];
        if !all.iter().all(|&p| s.on_board(p)) {
            return Err("square off the board".into());
        }
        if s.white == s.black || all[2..].iter().any(|&t| t == s.white || t == s.black) {
            return Err("start squares and targets must be distinct".into());
        }
        if knight_moves(s.white, s.n, s.n).is_empty() {
            return Err("white has no legal first move".into());
        }
        Ok(())
    }

    fn reseed_opponent(&self, state: &mut KnightBattleState, seed: u64) {
        state.opponent = rng_for(seed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(white: Square, black: Square, wt: Square, bt: Square) -> KnightBattleState {
        KnightBattleState { n: 6, white, black, white_target: wt, black_target: bt, opponent: rng_for(1) }
    }

    fn mv(p: &str) -> ParsedCommand {
        ParsedCommand::new(CommandKind::Move, p)
    }

    #[test]
    fn move_enumeration() {
        let mut corner = knight_moves((1, 1), 6, 6);
        corner.sort();
        assert_eq!(corner, vec![(2, 3), (3, 2)]);
        assert_eq!(knight_moves((8, 8), 16, 16).len(), 8);
        assert!(knight_moves((1, 1), 2, 2).is_empty());
    }

    #[test]
    fn attack_matches_enumeration_on_6x6() {
        for a in (1..=6).flat_map(|x| (1..=6).map(move |y| (x, y))) {
            let moves = knight_moves(a, 6, 6);
            for s in (1..=6).flat_map(|x| (1..=6).map(move |y| (x, y))) {
                assert_eq!(attacks(a, s), moves.contains(&s), "{a:?} -> {s:?}");
            }
        }
    }

    #[test]
    fn legal_and_illegal_moves() {
        let game = KnightBattle::new();
        let mut s = fixed((2, 1), (6, 6), (5, 5), (1, 6));
        assert_eq!(game.respond(&mut s.clone(), &mv("4 2")).verdict, Verdict::Continue);
        assert_eq!(game.respond(&mut s, &mv("2 2")).verdict, Verdict::Invalid);
        assert_eq!(s.white, (2, 1));
        assert_eq!(game.respond(&mut s, &mv("0 3")).verdict, Verdict::Invalid);
    }

    #[test]
    fn capture_and_safe_target() {
        let game = KnightBattle::new();
        let mut s = fixed((2, 1), (4, 2), (6, 6), (1, 6));
        assert_eq!(game.respond(&mut s, &mv("4 2")).verdict, Verdict::Solved);
        let mut s = fixed((2, 1), (6, 6), (3, 3), (1, 6));
        assert_eq!(game.respond(&mut s, &mv("3 3")).verdict, Verdict::Solved);
    }

    #[test]
    fn attacked_target_continues() {
        let game = KnightBattle::new();
        // Black on (5,4) attacks (3,3).
        let mut s = fixed((2, 1), (5, 4), (3, 3), (1, 6));
        let r = game.respond(&mut s, &mv("3 3"));
        assert_ne!(r.verdict, Verdict::Solved);
        assert!(s.on_board(s.black));
    }

    #[test]
    fn opponent_is_deterministic() {
        let game = KnightBattle::new();
        let g = game.generate(&Setup { difficulty: Difficulty::Medium, size: 8, seed: 3 }).unwrap();
        let run = || {
            let mut s = g.state.clone();
            let mut out = Vec::new();
            for _ in 0..5 {
                let m = knight_moves(s.white, s.n, s.n)[0];
                let r = game.respond(&mut s, &mv(&format!("{} {}", m.0, m.1)));
                out.push(r.feedback);
                if r.verdict != Verdict::Continue {
                    break;
                }
            }
            out
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn generation_and_prompt_round_trip() {
        let game = KnightBattle::new();
        for level in Difficulty::ALL {
            for seed in 0..50 {
                let g = game.generate(&Setup { difficulty: level, size: game.level_size(level), seed }).unwrap();
                game.check(&g.state).unwrap();
                let s = &g.state;
                assert_eq!(
                    parse_setup(&g.problem_text),
                    Some((s.n, s.white, s.black, s.white_target, s.black_target))
                );
            }
        }
    }
}
