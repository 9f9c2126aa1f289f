//! Knight pursuit: capture when possible, step onto a safe target, otherwise
//! take the unattacked move closest to the target by knight distance.

use std::collections::VecDeque;

use super::{integers, unreadable, Flow, Io, OracleError, Strategy};
use crate::task::InstanceRecord;
use crate::tasks::knight_battle::{attacks, knight_moves, parse_setup, Square};

/// Knight-move distances from `target` to every square.
fn distances(target: Square, n: i64) -> Vec<u32> {
    let idx = |(x, y): Square| ((x - 1) * n + (y - 1)) as usize;
    let mut dist = vec![u32::MAX; (n * n) as usize];
    dist[idx(target)] = 0;
    let mut queue = VecDeque::from([target]);
    while let Some(p) = queue.pop_front() {
        for q in knight_moves(p, n, n) {
            if dist[idx(q)] == u32::MAX {
                dist[idx(q)] = dist[idx(p)] + 1;
                queue.push_back(q);
            }
        }
    }
    dist
}

fn choose(white: Square, black: Square, target: Square, black_target: Square, n: i64, dist: &[u32]) -> Square {
    let moves = knight_moves(white, n, n);
    if moves.contains(&black) {
        return black;
    }
    if moves.contains(&target) && !attacks(black, target) {
        return target;
    }
    let idx = |(x, y): Square| ((x - 1) * n + (y - 1)) as usize;
    let threat = attacks(black, black_target);
    *moves
        .iter()
        .min_by_key(|&&m| {
            let exposed = attacks(black, m);
            let unguarded = threat && !attacks(m, black_target);
            (exposed, unguarded, dist[idx(m)], m)
        })
        .expect("knights on boards of side three or more always have a move")
}

fn run(io: &mut Io, setup: (i64, Square, Square, Square, Square)) -> Flow {
    let (n, mut white, mut black, target, black_target) = setup;
    let dist = distances(target, n);
    loop {
        let m = choose(white, black, target, black_target, n, &dist);
        let f = io.ask(format!("Moving toward the target while staying out of reach.\nMy Move: {} {}", m.0, m.1))?;
        white = m;
        match integers(f)[..] {
            [x, y, ..] => black = (x, y),
            _ => return Ok(()),
        }
    }
}

pub(super) fn strategy(record: &InstanceRecord) -> Result<Strategy, OracleError> {
    let setup = parse_setup(&record.problem_text).ok_or_else(|| unreadable(record, "board setup"))?;
    Ok(Box::new(move |io: &mut Io| run(io, setup)))
}
