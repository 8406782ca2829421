//! Box-bounded branch and bound over the integer points of the equality
//! system. The initial box already contains every pointwise-minimal
//! solution, so exhausting it decides feasibility and the optimal total
//! exactly. Each node is bounded by the exact LP relaxation.

use crate::encoding::IlpRow;

use super::simplex::{solve_lp, LpOutcome};
use super::{propagate_box, INF_BOUND};

pub(crate) enum BbResult {
    Optimal(u64),
    Infeasible,
}

pub(crate) struct BbCapExceeded;

pub(crate) fn branch_and_bound(
    vars: usize,
    rows: &[IlpRow],
    lo0: Vec<i64>,
    hi0: Vec<i64>,
    node_cap: u64,
) -> Result<(BbResult, u64), BbCapExceeded> {
    let mut stack = vec![(lo0, hi0)];
    let mut incumbent: Option<u64> = None;
    let mut nodes: u64 = 0;

    while let Some((mut lo, mut hi)) = stack.pop() {
        nodes += 1;
        if nodes > node_cap {
            return Err(BbCapExceeded);
        }
        if !propagate_box(vars, rows, &mut lo, &mut hi) {
            continue;
        }
        let lo_sum: i64 = lo.iter().sum();

        if lo == hi {
            if rows.iter().all(|r| r.satisfied_by(&lo)) {
                let total = lo_sum as u64;
                incumbent = Some(incumbent.map_or(total, |v| v.min(total)));
            }
            continue;
        }

        // LP on the shifted system y = lo + y'. Upper bounds are not part of
        // the relaxation; they only act through propagation and branching,
        // which keeps the bound valid.
        let shifted: Vec<IlpRow> = rows
            .iter()
            .map(|r| IlpRow {
                coeffs: r.coeffs.clone(),
                rhs: r.rhs - r.evaluate(&lo),
            })
            .collect();
        let branch_var;
        match solve_lp(vars, &shifted) {
            LpOutcome::Infeasible => continue,
            LpOutcome::Unknown => {
                // No bound available; split the widest interval.
                branch_var = widest_open_var(&lo, &hi);
            }
            LpOutcome::Optimal(opt) => {
                let node_bound = lo_sum as u64 + opt.bound_ceil;
                if incumbent.is_some_and(|v| node_bound >= v) {
                    continue;
                }
                let fractional = (0..vars).find(|&i| !opt.integral[i]);
                match fractional {
                    None => {
                        let candidate: Vec<i64> =
                            (0..vars).map(|i| lo[i] + opt.floors[i]).collect();
                        if candidate.iter().zip(&hi).all(|(&y, &h)| y <= h)
                            && rows.iter().all(|r| r.satisfied_by(&candidate))
                        {
                            let total: i64 = candidate.iter().sum();
                            let total = total as u64;
                            incumbent = Some(incumbent.map_or(total, |v| v.min(total)));
                            // The LP optimum bounds the node from below, so
                            // nothing better hides in it.
                            continue;
                        }
                        // Integral LP point violating an upper bound.
                        branch_var = (0..vars)
                            .find(|&i| lo[i] + opt.floors[i] > hi[i])
                            .unwrap_or_else(|| widest_open_var(&lo, &hi));
                    }
                    Some(i) => {
                        let split = lo[i] + opt.floors[i];
                        if split >= lo[i] && split < hi[i] {
                            push_split(&mut stack, &lo, &hi, i, split);
                            continue;
                        }
                        branch_var = i;
                    }
                }
            }
        }

        // Fallback: bisect an open interval. The LP ignores upper bounds,
        // so its preferred variable can already be pinned by the box; pick
        // the widest open one instead in that case. Both children are
        // strictly smaller, so the search stays finite.
        let i = if lo[branch_var] < hi[branch_var] {
            branch_var
        } else {
            widest_open_var(&lo, &hi)
        };
        debug_assert!(lo[i] < hi[i]);
        let mid = lo[i] + (hi[i] - lo[i]) / 2;
        push_split(&mut stack, &lo, &hi, i, mid);
    }

    Ok((
        incumbent.map_or(BbResult::Infeasible, BbResult::Optimal),
        nodes,
    ))
}

fn push_split(
    stack: &mut Vec<(Vec<i64>, Vec<i64>)>,
    lo: &[i64],
    hi: &[i64],
    var: usize,
    split: i64,
) {
    let mut hi_child_lo = lo.to_vec();
    hi_child_lo[var] = split + 1;
    stack.push((hi_child_lo, hi.to_vec()));
    let mut lo_child_hi = hi.to_vec();
    lo_child_hi[var] = split;
    stack.push((lo.to_vec(), lo_child_hi));
}

fn widest_open_var(lo: &[i64], hi: &[i64]) -> usize {
    let mut best = 0;
    let mut width = -1i64;
    for i in 0..lo.len() {
        let w = (hi[i].min(INF_BOUND)) - lo[i];
        if w > width && lo[i] < hi[i] {
            best = i;
            width = w;
        }
    }
    best
}
