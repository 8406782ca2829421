//! Exact two-phase simplex for `min sum(y)` subject to `A y = d`, `y >= 0`.
//!
//! All arithmetic is rational and exact. The fast path works in
//! `Ratio<i128>` with checked operations; any overflow falls back to
//! `BigRational`, which cannot fail. Bland's rule keeps the iteration
//! finite. Both verdicts are self-checked before they are returned: an
//! optimum is substituted back into the system, and an infeasibility verdict
//! is only accepted together with a verified Farkas certificate
//! (`u^T A <= 0`, `u^T d > 0`).

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

use crate::encoding::IlpRow;

/// Minimal rational interface the tableau needs.
pub(crate) trait Rat: Clone + PartialOrd {
    fn from_i64(v: i64) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    fn c_add(&self, o: &Self) -> Option<Self>;
    fn c_sub(&self, o: &Self) -> Option<Self>;
    fn c_mul(&self, o: &Self) -> Option<Self>;
    fn c_div(&self, o: &Self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn is_positive(&self) -> bool;
    /// Ceiling as u64; the value must be nonnegative.
    fn ceil_u64(&self) -> u64;
    /// Floor as i64.
    fn floor_i64(&self) -> i64;
    fn is_integer(&self) -> bool;
}

impl Rat for Ratio<i128> {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
    fn zero() -> Self {
        Ratio::from_integer(0)
    }
    fn one() -> Self {
        Ratio::from_integer(1)
    }
    fn c_add(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn c_sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn c_mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn c_div(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(o) {
            return None;
        }
        self.checked_div(o)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn ceil_u64(&self) -> u64 {
        self.ceil().to_integer().try_into().unwrap_or(0)
    }
    fn floor_i64(&self) -> i64 {
        self.floor().to_integer().try_into().unwrap_or(i64::MAX)
    }
    fn is_integer(&self) -> bool {
        *self.denom() == 1
    }
}

impl Rat for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn zero() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
    fn one() -> Self {
        BigRational::from_integer(BigInt::from(1))
    }
    fn c_add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn c_sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn c_mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn c_div(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(o) {
            return None;
        }
        Some(self / o)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn ceil_u64(&self) -> u64 {
        self.ceil().to_integer().to_u64().unwrap_or(0)
    }
    fn floor_i64(&self) -> i64 {
        self.floor().to_integer().to_i64().unwrap_or(i64::MAX)
    }
    fn is_integer(&self) -> bool {
        self.denom() == &BigInt::from(1)
    }
}

/// Exact LP outcome visible to the rest of the solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    /// No rational solution; verified by a Farkas certificate.
    Infeasible,
    Optimal(LpOptimal),
    /// Arithmetic or iteration trouble even after the big-integer retry.
    /// Callers must treat this as "no information".
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct LpOptimal {
    /// Ceiling of the exact optimal objective.
    pub bound_ceil: u64,
    /// Floor of each primal coordinate.
    pub floors: Vec<i64>,
    /// Whether each primal coordinate is an integer.
    pub integral: Vec<bool>,
}

const MAX_PIVOTS: usize = 50_000;

/// Solves the LP exactly, retrying in big integers on overflow.
pub(crate) fn solve_lp(vars: usize, rows: &[IlpRow]) -> LpOutcome {
    if rows.is_empty() {
        return LpOutcome::Optimal(LpOptimal {
            bound_ceil: 0,
            floors: vec![0; vars],
            integral: vec![true; vars],
        });
    }
    if let Some(res) = simplex_min_sum::<Ratio<i128>>(vars, rows) {
        return res;
    }
    simplex_min_sum::<BigRational>(vars, rows).unwrap_or(LpOutcome::Unknown)
}

/// One exact simplex run. `None` signals arithmetic overflow or a failed
/// self-check; the caller retries with a wider type.
fn simplex_min_sum<R: Rat>(vars: usize, rows: &[IlpRow]) -> Option<LpOutcome> {
    let m = rows.len();

    // Sign-normalized copies so the artificial basis starts feasible.
    let mut coef: Vec<Vec<i64>> = Vec::with_capacity(m);
    let mut rhs_int: Vec<i64> = Vec::with_capacity(m);
    for row in rows {
        if row.rhs < 0 {
            coef.push(row.coeffs.iter().map(|&c| -c).collect());
            rhs_int.push(-row.rhs);
        } else {
            coef.push(row.coeffs.clone());
            rhs_int.push(row.rhs);
        }
    }

    // Tableau: columns 0..vars are the real variables, vars..vars+m the
    // artificials, rhs kept separately.
    let width = vars + m;
    let mut tab: Vec<Vec<R>> = (0..m)
        .map(|r| {
            (0..width)
                .map(|c| {
                    if c < vars {
                        R::from_i64(coef[r][c])
                    } else if c - vars == r {
                        R::one()
                    } else {
                        R::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut rhs: Vec<R> = rhs_int.iter().map(|&d| R::from_i64(d)).collect();
    let mut basis: Vec<usize> = (vars..vars + m).collect();

    // Phase 1 cost row: minimize the artificial sum.
    let mut cost: Vec<R> = vec![R::zero(); width];
    for (j, slot) in cost.iter_mut().enumerate().take(vars) {
        let mut s = R::zero();
        for r in 0..m {
            s = s.c_add(&tab[r][j])?;
        }
        *slot = R::zero().c_sub(&s)?;
    }

    run_phase(&mut tab, &mut rhs, &mut cost, &mut basis)?;

    let phase1_obj = basis
        .iter()
        .zip(rhs.iter())
        .filter(|(&b, _)| b >= vars)
        .try_fold(R::zero(), |acc, (_, v)| acc.c_add(v))?;

    if phase1_obj.is_positive() {
        // Farkas multipliers from the artificial columns of the cost row.
        let mut u: Vec<R> = Vec::with_capacity(m);
        for r in 0..m {
            u.push(R::one().c_sub(&cost[vars + r])?);
        }
        for i in 0..vars {
            let mut s = R::zero();
            for r in 0..m {
                s = s.c_add(&u[r].c_mul(&R::from_i64(coef[r][i]))?)?;
            }
            if s.is_positive() {
                return None;
            }
        }
        let mut s = R::zero();
        for r in 0..m {
            s = s.c_add(&u[r].c_mul(&R::from_i64(rhs_int[r]))?)?;
        }
        if !s.is_positive() {
            return None;
        }
        return Some(LpOutcome::Infeasible);
    }

    // Drive remaining artificials out of the basis; rows that cannot be
    // pivoted are redundant and get dropped.
    let mut r = 0;
    while r < tab.len() {
        if basis[r] >= vars {
            if let Some(j) = (0..vars).find(|&j| !tab[r][j].is_zero()) {
                pivot(&mut tab, &mut rhs, &mut cost, &mut basis, r, j)?;
            } else {
                if !rhs[r].is_zero() {
                    return None;
                }
                tab.remove(r);
                rhs.remove(r);
                basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    // Phase 2: drop artificial columns, minimize the real sum.
    for row in tab.iter_mut() {
        row.truncate(vars);
    }
    let m2 = tab.len();
    cost.truncate(vars);
    for (j, slot) in cost.iter_mut().enumerate() {
        let mut s = R::zero();
        for r in 0..m2 {
            s = s.c_add(&tab[r][j])?;
        }
        *slot = R::one().c_sub(&s)?;
    }

    run_phase(&mut tab, &mut rhs, &mut cost, &mut basis)?;

    // Read the primal solution and self-check it.
    let mut primal: Vec<R> = vec![R::zero(); vars];
    for (r, &b) in basis.iter().enumerate() {
        if b < vars {
            primal[b] = rhs[r].clone();
        }
    }
    let mut objective = R::zero();
    for v in &primal {
        if v.is_negative() {
            return None;
        }
        objective = objective.c_add(v)?;
    }
    for (r, row) in rows.iter().enumerate() {
        let mut s = R::zero();
        for i in 0..vars {
            s = s.c_add(&primal[i].c_mul(&R::from_i64(row.coeffs[i]))?)?;
        }
        if s != R::from_i64(row.rhs) {
            let _ = r;
            return None;
        }
    }

    Some(LpOutcome::Optimal(LpOptimal {
        bound_ceil: objective.ceil_u64(),
        floors: primal.iter().map(|v| v.floor_i64()).collect(),
        integral: primal.iter().map(|v| v.is_integer()).collect(),
    }))
}

/// Bland-rule simplex iterations until the cost row has no negative entry.
fn run_phase<R: Rat>(
    tab: &mut [Vec<R>],
    rhs: &mut [R],
    cost: &mut [R],
    basis: &mut [usize],
) -> Option<()> {
    for _ in 0..MAX_PIVOTS {
        let entering = match (0..cost.len()).find(|&j| cost[j].is_negative()) {
            Some(j) => j,
            None => return Some(()),
        };
        let mut leave: Option<(usize, R)> = None;
        for r in 0..tab.len() {
            if !tab[r][entering].is_positive() {
                continue;
            }
            let ratio = rhs[r].c_div(&tab[r][entering])?;
            match &leave {
                None => leave = Some((r, ratio)),
                Some((lr, lratio)) => {
                    if ratio < *lratio || (ratio == *lratio && basis[r] < basis[*lr]) {
                        leave = Some((r, ratio));
                    }
                }
            }
        }
        let (leaving, _) = leave?;
        pivot(tab, rhs, cost, basis, leaving, entering)?;
    }
    None
}

fn pivot<R: Rat>(
    tab: &mut [Vec<R>],
    rhs: &mut [R],
    cost: &mut [R],
    basis: &mut [usize],
    r: usize,
    j: usize,
) -> Option<()> {
    let p = tab[r][j].clone();
    if p.is_zero() {
        return None;
    }
    for c in 0..tab[r].len() {
        tab[r][c] = tab[r][c].c_div(&p)?;
    }
    rhs[r] = rhs[r].c_div(&p)?;
    for r2 in 0..tab.len() {
        if r2 == r || tab[r2][j].is_zero() {
            continue;
        }
        let f = tab[r2][j].clone();
        for c in 0..tab[r2].len() {
            let delta = f.c_mul(&tab[r][c])?;
            tab[r2][c] = tab[r2][c].c_sub(&delta)?;
        }
        let delta = f.c_mul(&rhs[r])?;
        rhs[r2] = rhs[r2].c_sub(&delta)?;
    }
    if !cost[j].is_zero() {
        let f = cost[j].clone();
        for c in 0..cost.len() {
            let delta = f.c_mul(&tab[r][c])?;
            cost[c] = cost[c].c_sub(&delta)?;
        }
    }
    basis[r] = j;
    Some(())
}
