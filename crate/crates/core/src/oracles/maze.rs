//! Maze planning over (position, set of swap hypotheses still possible).
//! Only moves that are safe under every remaining hypothesis are taken, and
//! the plan minimises the worst-case number of moves to the finish.

use super::{integers, unreadable, Flow, Io, OracleError, Strategy};
use crate::task::InstanceRecord;
use crate::tasks::maze::{parse_layout, Cell, Direction, MazeGrid};

/// Hypothesis `h`: bit 0 = L/R swapped, bit 1 = U/D swapped.
const ALL_HYPOTHESES: u8 = 0b1111;
const UNREACHABLE: u32 = u32::MAX;

fn effective(d: Direction, h: u8) -> Direction {
    d.effective(h & 1 != 0, h & 2 != 0)
}

fn index(grid: &MazeGrid, (r, c): (usize, usize)) -> usize {
    (r - 1) * grid.n + (c - 1)
}

/// Outcome classes of pressing `d` at `pos` under the hypotheses in `mask`,
/// or `None` if some hypothesis steps onto a dangerous cell.
fn outcomes(grid: &MazeGrid, pos: (usize, usize), mask: u8, d: Direction) -> Option<Vec<((usize, usize), u8)>> {
    let mut classes: Vec<((usize, usize), u8)> = Vec::new();
    for h in (0..4).filter(|h| mask & (1 << h) != 0) {
        let next = grid.step(pos, effective(d, h));
        if grid.get(next) == Cell::Dangerous {
            return None;
        }
        match classes.iter_mut().find(|(p, _)| *p == next) {
            Some((_, m)) => *m |= 1 << h,
            None => classes.push((next, 1 << h)),
        }
    }
    Some(classes)
}

/// Worst-case moves-to-finish for every (cell, hypothesis mask).
fn values(grid: &MazeGrid) -> Vec<[u32; 16]> {
    let cells = grid.n * grid.n;
    let mut v = vec![[UNREACHABLE; 16]; cells];
    let finish = grid.finish().expect("finish cell");
    v[index(grid, finish)] = [0; 16];
    let all: Vec<(usize, usize)> = (1..=grid.n).flat_map(|r| (1..=grid.n).map(move |c| (r, c))).collect();
    loop {
        let mut changed = false;
        for &pos in &all {
            if pos == finish || grid.get(pos) == Cell::Dangerous {
                continue;
            }
            for mask in 1..16u8 {
                let best = Direction::ALL
                    .iter()
                    .filter_map(|&d| {
                        let classes = outcomes(grid, pos, mask, d)?;
                        let worst = classes.iter().map(|&(p, m)| v[index(grid, p)][m as usize]).max()?;
                        (worst != UNREACHABLE).then(|| worst + 1)
                    })
                    .min()
                    .unwrap_or(UNREACHABLE);
                let slot = &mut v[index(grid, pos)][mask as usize];
                if best < *slot {
                    *slot = best;
                    changed = true;
                }
            }
        }
        if !changed {
            return v;
        }
    }
}

/// Best button to press now, with its worst-case remaining move count.
pub fn plan_moves(grid: &MazeGrid, pos: (usize, usize), mask: u8) -> Option<(Direction, u32)> {
    let v = values(grid);
    best_move(grid, &v, pos, mask)
}

fn best_move(grid: &MazeGrid, v: &[[u32; 16]], pos: (usize, usize), mask: u8) -> Option<(Direction, u32)> {
    Direction::ALL
        .iter()
        .filter_map(|&d| {
            let classes = outcomes(grid, pos, mask, d)?;
            let worst = classes.iter().map(|&(p, m)| v[index(grid, p)][m as usize]).max()?;
            (worst != UNREACHABLE).then(|| (d, worst + 1))
        })
        .min_by_key(|&(_, cost)| cost)
}

fn run(io: &mut Io, grid: &MazeGrid) -> Flow {
    let v = values(grid);
    let (mut pos, mut mask) = ((1usize, 1usize), ALL_HYPOTHESES);
    loop {
        let Some((d, _)) = best_move(grid, &v, pos, mask) else {
            return Ok(());
        };
        let f = io.ask(format!("Pressing {} is safe under every remaining control layout.\nMy Move: {}", d.as_str(), d.as_str()))?;
        let seen = match integers(f)[..] {
            [r, c, ..] if r > 0 && c > 0 => (r as usize, c as usize),
            _ => return Ok(()),
        };
        let classes = outcomes(grid, pos, mask, d).expect("chosen move is safe");
        let Some(&(p, m)) = classes.iter().find(|(p, _)| *p == seen) else {
            return Ok(());
        };
        if grid.get(p) == Cell::Finish {
            return Ok(());
        }
        pos = p;
        mask = m;
    }
}

pub(super) fn strategy(record: &InstanceRecord) -> Result<Strategy, OracleError> {
    let grid = parse_layout(&record.problem_text).ok_or_else(|| unreadable(record, "grid layout"))?;
    Ok(Box::new(move |io: &mut Io| run(io, &grid)))
}
