//! Greedy grid-sum play: always take the smallest legal value.

use super::{integers, unreadable, Flow, Io, OracleError, Strategy};
use crate::task::InstanceRecord;
use crate::tasks::grid_sum::parse_grid;
use crate::tasks::neighbours;

fn run(io: &mut Io, values: &[u32], n: usize) -> Flow {
    let mut taken = vec![false; n * n];
    let idx = |(r, c): (usize, usize)| (r - 1) * n + (c - 1);
    loop {
        let any = taken.iter().any(|&t| t);
        let best = (1..=n)
            .flat_map(|r| (1..=n).map(move |c| (r, c)))
            .filter(|&p| !taken[idx(p)])
            .filter(|&p| !any || neighbours(p.0, p.1, n, n).into_iter().any(|q| taken[idx(q)]))
            .min_by_key(|&p| values[idx(p)]);
        let Some(cell) = best else {
            return Ok(());
        };
        let f = io.ask(format!(
            "The smallest reachable value is {}.\nMy Choice: {} {}",
            values[idx(cell)],
            cell.0,
            cell.1
        ))?;
        taken[idx(cell)] = true;
        match integers(f)[..] {
            [r, c, ..] if (1..=n as i64).contains(&r) && (1..=n as i64).contains(&c) && f.starts_with("My Choice") => {
                taken[idx((r as usize, c as usize))] = true;
            }
            _ => return Ok(()),
        }
        if f.contains("Game over") {
            return Ok(());
        }
    }
}

pub(super) fn strategy(record: &InstanceRecord) -> Result<Strategy, OracleError> {
    let (values, n) = parse_grid(&record.problem_text).ok_or_else(|| unreadable(record, "grid values"))?;
    Ok(Box::new(move |io: &mut Io| run(io, &values, n)))
}
