//! Exact minimizer for the insertion program: minimize the number of
//! inserted clubs subject to the equality system of an instance, over
//! nonnegative integers.
//!
//! The decision is layered. Cheap sound filters run first, the expensive
//! complete machinery only on what survives:
//!
//! 1. interval propagation over the integers,
//! 2. exact rational LP relaxation (infeasibility is Farkas-verified and
//!    implies integer infeasibility; the optimum is a lower bound),
//! 3. integer solvability of the equalities by lattice diagonalization,
//!    which also decides instances whose solution set is a point or a line,
//! 4. iterative deepening over the total insertion count within a small
//!    window above the LP bound,
//! 5. branch and bound inside an a-priori box that provably contains every
//!    minimal solution, making the bounded search a complete decision
//!    procedure.
//!
//! Every layer is exact; floating point never touches the decision path. A
//! resource cap can only surface as an explicit [`SolveError::Indeterminate`],
//! never as a silent "infeasible".

mod branch;
mod lattice;
mod simplex;

use thiserror::Error;

use crate::encoding::{IlpInstance, IlpRow};
use crate::words::InsertionVector;

use branch::{branch_and_bound, BbResult};
use lattice::{solve_lattice, LatticeOutcome};
use simplex::{solve_lp, LpOutcome};

/// Stand-in for "unbounded" in integer boxes. Any feasible system has a
/// minimal solution far below this, so clamping here never loses solutions
/// that matter.
pub(crate) const INF_BOUND: i64 = i64::MAX / 4;

/// Which layer settled an instance; recorded for audit traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecidingLayer {
    EmptySystem,
    ZeroRhs,
    Propagation,
    LpRelaxation,
    Lattice,
    Deepening { total: u32 },
    BranchAndBound { nodes: u64 },
}

impl std::fmt::Display for DecidingLayer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecidingLayer::EmptySystem => write!(f, "empty-system"),
            DecidingLayer::ZeroRhs => write!(f, "zero-rhs"),
            DecidingLayer::Propagation => write!(f, "propagation"),
            DecidingLayer::LpRelaxation => write!(f, "lp-relaxation"),
            DecidingLayer::Lattice => write!(f, "lattice"),
            DecidingLayer::Deepening { total } => write!(f, "deepening(t={total})"),
            DecidingLayer::BranchAndBound { nodes } => write!(f, "branch-bound({nodes} nodes)"),
        }
    }
}

/// Result of one exact solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// No nonnegative integer insertion satisfies the system, for any total.
    Infeasible { layer: DecidingLayer },
    /// The minimal total and the complete set of insertions achieving it,
    /// sorted lexicographically.
    Optimal {
        total: u32,
        solutions: Vec<InsertionVector>,
        layer: DecidingLayer,
    },
}

impl SolveOutcome {
    pub fn layer(&self) -> &DecidingLayer {
        match self {
            SolveOutcome::Infeasible { layer } => layer,
            SolveOutcome::Optimal { layer, .. } => layer,
        }
    }
}

/// Resource limits. Exceeding one is an explicit error so that it can never
/// masquerade as an impossibility proof.
#[derive(Clone, Debug)]
pub struct SolveLimits {
    /// Totals tried above the LP bound before branch and bound takes over.
    pub deepening_window: u32,
    /// Branch-and-bound node budget per instance.
    pub node_cap: u64,
    /// Upper bound on the number of optimal solutions enumerated.
    pub solution_cap: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            deepening_window: 64,
            node_cap: 1_000_000,
            solution_cap: 1_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("resource cap exceeded while solving ({detail}); result is indeterminate")]
    Indeterminate { detail: String },
}

/// Exact minimization over an instance. See the module docs for the layer
/// order.
pub fn solve_min_insertion(
    inst: &IlpInstance,
    limits: &SolveLimits,
) -> Result<SolveOutcome, SolveError> {
    solve_min_sum(inst.positions, &inst.rows, limits)
}

/// Core solver over a bare equality system.
pub fn solve_min_sum(
    vars: usize,
    rows: &[IlpRow],
    limits: &SolveLimits,
) -> Result<SolveOutcome, SolveError> {
    if rows.is_empty() {
        return Ok(optimal_zero(vars, DecidingLayer::EmptySystem));
    }
    if rows.iter().all(|r| r.rhs == 0) {
        return Ok(optimal_zero(vars, DecidingLayer::ZeroRhs));
    }

    let mut lo = vec![0i64; vars];
    let mut hi = vec![INF_BOUND; vars];
    if !propagate_box(vars, rows, &mut lo, &mut hi) {
        return Ok(SolveOutcome::Infeasible {
            layer: DecidingLayer::Propagation,
        });
    }

    let lo_sum: i64 = lo.iter().sum();
    let mut lower_bound = (lo_sum.max(1)) as u64;
    match solve_lp(vars, rows) {
        LpOutcome::Infeasible => {
            return Ok(SolveOutcome::Infeasible {
                layer: DecidingLayer::LpRelaxation,
            });
        }
        LpOutcome::Optimal(opt) => lower_bound = lower_bound.max(opt.bound_ceil),
        LpOutcome::Unknown => {}
    }

    match solve_lattice(vars, rows) {
        LatticeOutcome::Unsolvable => {
            return Ok(SolveOutcome::Infeasible {
                layer: DecidingLayer::Lattice,
            });
        }
        LatticeOutcome::Solvable { particular, kernel } if kernel.len() <= 1 => {
            return low_rank_coset(vars, rows, particular, kernel, limits);
        }
        _ => {}
    }

    for offset in 0..=limits.deepening_window {
        let total = lower_bound + offset as u64;
        let sols = enumerate_with_box(vars, rows, total, &lo, &hi, limits.solution_cap);
        match sols {
            Some(found) if !found.is_empty() => {
                let total = u32::try_from(total).expect("window-bounded total");
                return Ok(SolveOutcome::Optimal {
                    solutions: to_insertions(found),
                    total,
                    layer: DecidingLayer::Deepening { total },
                });
            }
            Some(_) => {}
            None => {
                return Err(SolveError::Indeterminate {
                    detail: format!("solution cap hit while enumerating at total {total}"),
                })
            }
        }
    }

    let box_hi = minimal_solution_bound(vars, rows);
    let hi_bb: Vec<i64> = hi.iter().map(|&h| h.min(box_hi)).collect();
    match branch_and_bound(vars, rows, lo.clone(), hi_bb, limits.node_cap) {
        Err(_) => Err(SolveError::Indeterminate {
            detail: format!("branch-and-bound node cap {} exceeded", limits.node_cap),
        }),
        Ok((BbResult::Infeasible, nodes)) => Ok(SolveOutcome::Infeasible {
            layer: DecidingLayer::BranchAndBound { nodes },
        }),
        Ok((BbResult::Optimal(total), nodes)) => {
            let sols = enumerate_with_box(vars, rows, total, &lo, &hi, limits.solution_cap)
                .ok_or_else(|| SolveError::Indeterminate {
                    detail: "solution cap hit while collecting optima".to_string(),
                })?;
            assert!(
                !sols.is_empty(),
                "branch-and-bound certified total {total} but enumeration found nothing"
            );
            let total = u32::try_from(total).map_err(|_| SolveError::Indeterminate {
                detail: "optimal total exceeds u32".to_string(),
            })?;
            Ok(SolveOutcome::Optimal {
                solutions: to_insertions(sols),
                total,
                layer: DecidingLayer::BranchAndBound { nodes },
            })
        }
    }
}

/// Cheap sound feasibility filter over a subsystem: interval propagation
/// plus the exact LP relaxation. `false` means proven infeasible, so every
/// superset of the rows is infeasible too.
pub fn may_be_feasible(vars: usize, rows: &[IlpRow]) -> bool {
    if rows.is_empty() {
        return true;
    }
    let mut lo = vec![0i64; vars];
    let mut hi = vec![INF_BOUND; vars];
    if !propagate_box(vars, rows, &mut lo, &mut hi) {
        return false;
    }
    !matches!(solve_lp(vars, rows), LpOutcome::Infeasible)
}

/// Every nonnegative integer insertion with the given total that satisfies
/// the instance, sorted lexicographically.
pub fn enumerate_solutions_at(inst: &IlpInstance, total: u32) -> Vec<InsertionVector> {
    enumerate_at(inst.positions, &inst.rows, total)
}

/// Core enumeration over a bare system.
pub fn enumerate_at(vars: usize, rows: &[IlpRow], total: u32) -> Vec<InsertionVector> {
    let mut lo = vec![0i64; vars];
    let mut hi = vec![INF_BOUND; vars];
    if !propagate_box(vars, rows, &mut lo, &mut hi) {
        return Vec::new();
    }
    let found = enumerate_with_box(vars, rows, total as u64, &lo, &hi, usize::MAX)
        .expect("no cap in direct enumeration");
    to_insertions(found)
}

fn optimal_zero(vars: usize, layer: DecidingLayer) -> SolveOutcome {
    SolveOutcome::Optimal {
        total: 0,
        solutions: vec![InsertionVector::zero(vars)],
        layer,
    }
}

fn to_insertions(found: Vec<Vec<i64>>) -> Vec<InsertionVector> {
    let mut out: Vec<InsertionVector> = found
        .into_iter()
        .map(|y| {
            InsertionVector::new(
                y.into_iter()
                    .map(|v| u32::try_from(v).expect("nonnegative entry"))
                    .collect(),
            )
        })
        .collect();
    out.sort();
    out
}

/// Decides instances whose integer solution set is a point or a line.
fn low_rank_coset(
    vars: usize,
    rows: &[IlpRow],
    particular: Vec<i128>,
    kernel: Vec<Vec<i128>>,
    limits: &SolveLimits,
) -> Result<SolveOutcome, SolveError> {
    let layer = DecidingLayer::Lattice;
    if kernel.is_empty() {
        if particular.iter().all(|&v| v >= 0) {
            let total: i128 = particular.iter().sum();
            let y: Vec<i64> = particular.iter().map(|&v| v as i64).collect();
            debug_assert!(rows.iter().all(|r| r.satisfied_by(&y)));
            return Ok(SolveOutcome::Optimal {
                total: u32::try_from(total).map_err(|_| SolveError::Indeterminate {
                    detail: "unique solution total exceeds u32".to_string(),
                })?,
                solutions: to_insertions(vec![y]),
                layer,
            });
        }
        return Ok(SolveOutcome::Infeasible { layer });
    }

    // One free direction: solutions are particular + k * b for integer k;
    // nonnegativity cuts an interval of k.
    let b = &kernel[0];
    debug_assert_eq!(b.len(), vars);
    let mut k_lo: Option<i128> = None;
    let mut k_hi: Option<i128> = None;
    for i in 0..vars {
        match b[i].signum() {
            0 => {
                if particular[i] < 0 {
                    return Ok(SolveOutcome::Infeasible { layer });
                }
            }
            1 => {
                let bound = ceil_div(-particular[i], b[i]);
                k_lo = Some(k_lo.map_or(bound, |v| v.max(bound)));
            }
            _ => {
                let bound = floor_div(-particular[i], b[i]);
                k_hi = Some(k_hi.map_or(bound, |v| v.min(bound)));
            }
        }
    }
    if let (Some(lo), Some(hi)) = (k_lo, k_hi) {
        if lo > hi {
            return Ok(SolveOutcome::Infeasible { layer });
        }
    }
    let sigma: i128 = b.iter().sum();
    let point = |k: i128| -> Vec<i64> {
        (0..vars)
            .map(|i| i64::try_from(particular[i] + k * b[i]).expect("windowed entry"))
            .collect()
    };
    let chosen: Vec<i128> = match sigma.signum() {
        1 => {
            let k = k_lo.expect("positive direction entries bound k from below");
            vec![k]
        }
        -1 => {
            let k = k_hi.expect("negative direction entries bound k from above");
            vec![k]
        }
        _ => {
            // Mixed-sign direction with zero total: the whole window is
            // optimal.
            let (lo, hi) = (
                k_lo.expect("mixed signs bound below"),
                k_hi.expect("mixed signs bound above"),
            );
            if (hi - lo) as u128 >= limits.solution_cap as u128 {
                return Err(SolveError::Indeterminate {
                    detail: "optimal line segment longer than the solution cap".to_string(),
                });
            }
            (lo..=hi).collect()
        }
    };
    let solutions: Vec<Vec<i64>> = chosen.iter().map(|&k| point(k)).collect();
    let total: i64 = solutions[0].iter().sum();
    debug_assert!(solutions
        .iter()
        .all(|y| rows.iter().all(|r| r.satisfied_by(y))));
    debug_assert!(solutions.iter().all(|y| y.iter().sum::<i64>() == total));
    Ok(SolveOutcome::Optimal {
        total: u32::try_from(total).map_err(|_| SolveError::Indeterminate {
            detail: "optimal total exceeds u32".to_string(),
        })?,
        solutions: to_insertions(solutions),
        layer,
    })
}

pub(crate) fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

pub(crate) fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

/// Interval propagation to a fixpoint (sweep-capped). Returns false only
/// when the box is proven empty, which implies the system itself has no
/// nonnegative solution because every feasible system has a minimal solution
/// far inside the clamp.
pub(crate) fn propagate_box(
    vars: usize,
    rows: &[IlpRow],
    lo: &mut [i64],
    hi: &mut [i64],
) -> bool {
    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for row in rows {
            let d = row.rhs as i128;
            let mut min_sum: i128 = 0;
            let mut max_sum: i128 = 0;
            for i in 0..vars {
                let c = row.coeffs[i] as i128;
                if c > 0 {
                    min_sum += c * lo[i] as i128;
                    max_sum += c * hi[i] as i128;
                } else if c < 0 {
                    min_sum += c * hi[i] as i128;
                    max_sum += c * lo[i] as i128;
                }
            }
            if min_sum > d || max_sum < d {
                return false;
            }
            for i in 0..vars {
                let c = row.coeffs[i] as i128;
                if c == 0 {
                    continue;
                }
                let (term_min, term_max) = if c > 0 {
                    (c * lo[i] as i128, c * hi[i] as i128)
                } else {
                    (c * hi[i] as i128, c * lo[i] as i128)
                };
                let rest_min = min_sum - term_min;
                let rest_max = max_sum - term_max;
                // c * y_i must lie in [d - rest_max, d - rest_min].
                let (mut new_lo, mut new_hi) = if c > 0 {
                    (ceil_div(d - rest_max, c), floor_div(d - rest_min, c))
                } else {
                    (ceil_div(d - rest_min, c), floor_div(d - rest_max, c))
                };
                new_lo = new_lo.max(lo[i] as i128);
                new_hi = new_hi.min(hi[i] as i128);
                if new_lo > new_hi {
                    return false;
                }
                let new_lo = new_lo.clamp(0, INF_BOUND as i128) as i64;
                let new_hi = new_hi.clamp(0, INF_BOUND as i128) as i64;
                if new_lo > lo[i] {
                    lo[i] = new_lo;
                    changed = true;
                }
                if new_hi < hi[i] {
                    hi[i] = new_hi;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    true
}

/// Per-variable bound that contains every pointwise-minimal nonnegative
/// solution: a Hadamard-style bound on the minors of the augmented system,
/// scaled by the dimension (Borosh-Treybig). Deliberately loose; the branch
/// and bound prunes with LP bounds, the box only forces termination.
fn minimal_solution_bound(vars: usize, rows: &[IlpRow]) -> i64 {
    let mut a: i128 = 1;
    for row in rows {
        a = a.max(row.rhs.unsigned_abs() as i128);
        for &c in &row.coeffs {
            a = a.max(c.unsigned_abs() as i128);
        }
    }
    let k = rows.len().min(vars + 1) as u32;
    let mut bound: i128 = (vars as i128) + 1;
    for _ in 0..k.div_ceil(2) {
        bound = bound.saturating_mul(k as i128);
    }
    for _ in 0..k {
        bound = bound.saturating_mul(a);
    }
    i64::try_from(bound).unwrap_or(INF_BOUND).min(INF_BOUND)
}

/// Depth-first enumeration of all solutions with the exact given total,
/// inside a propagated box. Returns `None` when the cap is hit.
fn enumerate_with_box(
    vars: usize,
    rows: &[IlpRow],
    total: u64,
    lo: &[i64],
    hi: &[i64],
    cap: usize,
) -> Option<Vec<Vec<i64>>> {
    let total = i64::try_from(total).ok()?;
    // Suffix extremes of the coefficients, for pruning partial sums.
    let m = rows.len();
    let mut suffix_min = vec![vec![0i64; vars + 1]; m];
    let mut suffix_max = vec![vec![0i64; vars + 1]; m];
    let mut suffix_lo = vec![0i128; vars + 1];
    let mut suffix_hi = vec![0i128; vars + 1];
    for i in (0..vars).rev() {
        suffix_lo[i] = suffix_lo[i + 1] + lo[i] as i128;
        suffix_hi[i] = suffix_hi[i + 1] + hi[i] as i128;
        for r in 0..m {
            suffix_min[r][i] = suffix_min[r][i + 1].min(rows[r].coeffs[i]);
            suffix_max[r][i] = suffix_max[r][i + 1].max(rows[r].coeffs[i]);
        }
    }

    struct Dfs<'a> {
        vars: usize,
        rows: &'a [IlpRow],
        lo: &'a [i64],
        hi: &'a [i64],
        suffix_min: Vec<Vec<i64>>,
        suffix_max: Vec<Vec<i64>>,
        suffix_lo: Vec<i128>,
        suffix_hi: Vec<i128>,
        current: Vec<i64>,
        out: Vec<Vec<i64>>,
        cap: usize,
        partial: Vec<i64>,
    }

    impl Dfs<'_> {
        fn feasible_here(&self, depth: usize, remaining: i64) -> bool {
            for (r, row) in self.rows.iter().enumerate() {
                let base = self.partial[r];
                let add_min = remaining.saturating_mul(self.suffix_min[r][depth].min(0));
                let add_max = remaining.saturating_mul(self.suffix_max[r][depth].max(0));
                if base + add_max < row.rhs || base + add_min > row.rhs {
                    return false;
                }
            }
            true
        }

        fn walk(&mut self, depth: usize, remaining: i64) -> bool {
            if depth == self.vars {
                if remaining == 0
                    && self
                        .rows
                        .iter()
                        .enumerate()
                        .all(|(r, row)| self.partial[r] == row.rhs)
                {
                    if self.out.len() >= self.cap {
                        return false;
                    }
                    self.out.push(self.current.clone());
                }
                return true;
            }
            if !self.feasible_here(depth, remaining) {
                return true;
            }
            // Budget window for this variable given the others' bounds.
            let rest_lo = self.suffix_lo[depth + 1];
            let rest_hi = self.suffix_hi[depth + 1];
            let v_lo_wide = (remaining as i128 - rest_hi).max(self.lo[depth] as i128);
            let v_hi_wide = (remaining as i128 - rest_lo).min(self.hi[depth] as i128);
            let v_lo = v_lo_wide.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
            let v_hi = v_hi_wide.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
            let mut v = v_lo;
            while v <= v_hi {
                self.current[depth] = v;
                for (r, row) in self.rows.iter().enumerate() {
                    self.partial[r] += row.coeffs[depth] * v;
                }
                let keep_going = self.walk(depth + 1, remaining - v);
                for (r, row) in self.rows.iter().enumerate() {
                    self.partial[r] -= row.coeffs[depth] * v;
                }
                if !keep_going {
                    return false;
                }
                v += 1;
            }
            self.current[depth] = 0;
            true
        }
    }

    let mut dfs = Dfs {
        vars,
        rows,
        lo,
        hi,
        suffix_min,
        suffix_max,
        suffix_lo,
        suffix_hi,
        current: vec![0; vars],
        out: Vec::new(),
        cap,
        partial: vec![0; m],
    };
    if dfs.walk(0, total) {
        Some(dfs.out)
    } else {
        None
    }
}
