//! Color magic. The white-box oracle replays the generation certificate.
//! The black-box oracle probes numbers 1 and 2 on cell 1 to find the one
//! magic that leaves the selected cell alone, then runs a bounded search.
//! Magics at different cells commute and each has order three, so the
//! search enumerates multisets with multiplicity below three.

use super::{unreadable, Flow, Io, OracleError, Pending, Strategy};
use crate::task::{InstanceRecord, TaskInstance};
use crate::tasks::color_magic::{apply, is_uniform, parse_grid, parse_initial_grid, ColorMagicState, Magic};

/// Search budget in visited nodes.
const NODE_BUDGET: usize = 2_000_000;

pub fn certificate_strategy(instance: &TaskInstance) -> Option<Strategy> {
    let state = instance.hidden.downcast_ref::<ColorMagicState>()?;
    let moves = state.certificate.clone();
    Some(Box::new(move |io: &mut Io| {
        for &(op, pos) in &moves {
            let f = io.ask(format!("My Move: {op} {pos}"))?;
            if f.contains("WIN") {
                break;
            }
        }
        Ok(())
    }))
}

fn send(io: &mut Io, n: usize, op: usize, pos: usize) -> Result<Option<Vec<u8>>, Pending> {
    let f = io.ask(format!("Trying operation {op} on cell {pos}.\nMy Move: {op} {pos}"))?;
    if f.contains("WIN") {
        return Ok(None);
    }
    Ok(parse_grid(f.trim()).filter(|(_, m)| *m == n).map(|(g, _)| g))
}

struct Search<'a> {
    n: usize,
    moves: &'a [(usize, usize)],
    ops: [Magic; 3],
    nodes: usize,
}

impl Search<'_> {
    fn dfs(&mut self, grid: &mut Vec<u8>, from: usize, depth: usize, path: &mut Vec<usize>) -> bool {
        if is_uniform(grid) {
            return true;
        }
        if depth == 0 || self.nodes >= NODE_BUDGET {
            return false;
        }
        for i in from..self.moves.len() {
            let repeats = path.iter().rev().take_while(|&&j| j == i).count();
            if repeats >= 2 {
                continue;
            }
            self.nodes += 1;
            let (op, pos) = self.moves[i];
            let before = grid.clone();
            apply(grid, self.n, self.ops[op - 1], pos);
            path.push(i);
            if self.dfs(grid, i, depth - 1, path) {
                return true;
            }
            path.pop();
            *grid = before;
        }
        false
    }
}

/// Shortest multiset of `(operation, position)` moves making `grid` uniform,
/// by iterative deepening up to `max_depth`.
pub fn shortest_fix(grid: &[u8], n: usize, ops: [Magic; 3], moves: &[(usize, usize)], max_depth: usize) -> Option<Vec<(usize, usize)>> {
    let mut search = Search { n, moves, ops, nodes: 0 };
    for depth in 0..=max_depth {
        let mut g = grid.to_vec();
        let mut path = Vec::new();
        if search.dfs(&mut g, 0, depth, &mut path) {
            return Some(path.into_iter().map(|i| moves[i]).collect());
        }
        if search.nodes >= NODE_BUDGET {
            return None;
        }
    }
    None
}

fn run(io: &mut Io, mut grid: Vec<u8>, n: usize, budget: usize) -> Flow {
    let mut used = 0;
    let mut recolour = None;
    let mut fixed = None;
    for op in 1..=2 {
        let before = grid[0];
        used += 1;
        let Some(g) = send(io, n, op, 1)? else {
            return Ok(());
        };
        if g[0] == before {
            fixed = Some(op);
        } else {
            recolour.get_or_insert(op);
        }
        grid = g;
    }
    // Exactly one number leaves the selected cell alone.
    let c = fixed.unwrap_or(3);
    let a = recolour.unwrap_or(3);
    let mut ops = [Magic::Alpha; 3];
    ops[c - 1] = Magic::Gamma;
    let cells = n * n;
    let moves: Vec<(usize, usize)> = (1..=cells).flat_map(|p| [(a, p), (c, p)]).collect();
    let Some(plan) = shortest_fix(&grid, n, ops, &moves, budget.saturating_sub(used)) else {
        return Ok(());
    };
    for (op, pos) in plan {
        if send(io, n, op, pos)?.is_none() {
            return Ok(());
        }
    }
    Ok(())
}

pub fn search_strategy(record: &InstanceRecord) -> Result<Strategy, OracleError> {
    let (grid, n) = parse_initial_grid(&record.problem_text).ok_or_else(|| unreadable(record, "initial grid"))?;
    let budget = crate::protocol::DEFAULT_MAX_TURNS as usize;
    Ok(Box::new(move |io: &mut Io| run(io, grid.clone(), n, budget)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undoes_a_two_move_scramble() {
        let ops = [Magic::Alpha, Magic::Beta, Magic::Gamma];
        let (grid, _) = crate::tasks::color_magic::scramble(3, 0, &[(Magic::Alpha, 2), (Magic::Gamma, 9)]);
        let moves: Vec<(usize, usize)> = (1..=9).flat_map(|p| [(1, p), (3, p)]).collect();
        let fix = shortest_fix(&grid, 3, ops, &moves, 4).unwrap();
        assert!(fix.len() <= 2);
        let mut g = grid.clone();
        for (op, pos) in fix {
            apply(&mut g, 3, ops[op - 1], pos);
        }
        assert!(is_uniform(&g));
    }
}
