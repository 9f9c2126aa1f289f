//! Bisection on prefix zero counts.

use super::{integers, param, Flow, Io, OracleError, Strategy};
use crate::task::InstanceRecord;

fn run(io: &mut Io, n: usize, k: usize) -> Flow {
    let (mut lo, mut hi) = (1usize, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let f = io.ask(format!("Counting zeros in 1..{mid}.\nMy Query: 1 {mid}"))?;
        let Some(&sum) = integers(f).first() else {
            return Ok(());
        };
        if mid as i64 - sum >= k as i64 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    io.ask(format!("My Final Answer: {lo}"))?;
    Ok(())
}

pub(super) fn strategy(record: &InstanceRecord) -> Result<Strategy, OracleError> {
    let n = param(record, "n")? as usize;
    let k = param(record, "k")? as usize;
    Ok(Box::new(move |io: &mut Io| run(io, n, k)))
}
