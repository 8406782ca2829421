//! Integer solvability of `A y = d` with the sign constraint dropped.
//!
//! Unimodular row and column operations bring the coefficient matrix to
//! diagonal form. From the diagonal the system is either unsolvable over the
//! integers, or it yields a particular solution together with a basis of the
//! kernel lattice. All arithmetic is checked `i128`; overflow reports an
//! inconclusive outcome instead of a wrong one.

use crate::encoding::IlpRow;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum LatticeOutcome {
    /// No integer vector satisfies the equalities, signs aside.
    Unsolvable,
    Solvable {
        particular: Vec<i128>,
        kernel: Vec<Vec<i128>>,
    },
    /// Arithmetic left `i128`; no conclusion.
    Overflow,
}

pub(crate) fn solve_lattice(vars: usize, rows: &[IlpRow]) -> LatticeOutcome {
    match diagonalize_and_solve(vars, rows) {
        Some(out) => out,
        None => LatticeOutcome::Overflow,
    }
}

fn diagonalize_and_solve(vars: usize, rows: &[IlpRow]) -> Option<LatticeOutcome> {
    let m = rows.len();
    let n = vars;
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.coeffs.iter().map(|&c| c as i128).collect())
        .collect();
    let mut d: Vec<i128> = rows.iter().map(|r| r.rhs as i128).collect();
    // Column transform accumulator, starts as the identity.
    let mut t: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();

    let dim = m.min(n);
    for i in 0..dim {
        loop {
            // Clear column i below the pivot.
            let col_pivot = (i..m)
                .filter(|&r| a[r][i] != 0)
                .min_by_key(|&r| a[r][i].unsigned_abs());
            if let Some(p) = col_pivot {
                a.swap(i, p);
                d.swap(i, p);
                let mut dirty = false;
                for r in i + 1..m {
                    if a[r][i] == 0 {
                        continue;
                    }
                    let q = a[r][i].checked_div(a[i][i])?;
                    if q != 0 {
                        for c in i..n {
                            a[r][c] = a[r][c].checked_sub(q.checked_mul(a[i][c])?)?;
                        }
                        d[r] = d[r].checked_sub(q.checked_mul(d[i])?)?;
                    }
                    if a[r][i] != 0 {
                        dirty = true;
                    }
                }
                if dirty {
                    continue;
                }
            } else {
                // Whole column is zero from row i on; nothing to clear.
            }

            // Clear row i right of the pivot.
            let row_pivot = (i..n)
                .filter(|&c| a[i][c] != 0)
                .min_by_key(|&c| a[i][c].unsigned_abs());
            match row_pivot {
                None => break,
                Some(p) => {
                    swap_columns(&mut a, &mut t, i, p);
                    let mut dirty = false;
                    for c in i + 1..n {
                        if a[i][c] == 0 {
                            continue;
                        }
                        let q = a[i][c].checked_div(a[i][i])?;
                        if q != 0 {
                            for row in a.iter_mut() {
                                row[c] = row[c].checked_sub(q.checked_mul(row[i])?)?;
                            }
                            for row in t.iter_mut() {
                                row[c] = row[c].checked_sub(q.checked_mul(row[i])?)?;
                            }
                        }
                        if a[i][c] != 0 {
                            dirty = true;
                        }
                    }
                    if !dirty && (i + 1..m).all(|r| a[r][i] == 0) {
                        break;
                    }
                }
            }
        }
    }

    // Diagonal reached: solvability and a particular solution in the
    // transformed coordinates.
    let mut z = vec![0i128; n];
    for r in 0..m {
        let pivot = if r < dim { a[r][r] } else { 0 };
        if pivot == 0 {
            if d[r] != 0 {
                return Some(LatticeOutcome::Unsolvable);
            }
        } else {
            if d[r] % pivot != 0 {
                return Some(LatticeOutcome::Unsolvable);
            }
            z[r] = d[r] / pivot;
        }
    }

    let particular: Vec<i128> = (0..n)
        .map(|i| {
            (0..n).try_fold(0i128, |acc, j| {
                acc.checked_add(t[i][j].checked_mul(z[j])?)
            })
        })
        .collect::<Option<_>>()?;

    // Kernel basis: the transform columns matching zero diagonal entries.
    let mut kernel = Vec::new();
    for j in 0..n {
        let diag = if j < dim { a[j][j] } else { 0 };
        if diag == 0 {
            kernel.push((0..n).map(|i| t[i][j]).collect::<Vec<i128>>());
        }
    }

    // Self-check the particular solution against the original rows.
    for row in rows {
        let mut s = 0i128;
        for (i, &c) in row.coeffs.iter().enumerate() {
            s = s.checked_add((c as i128).checked_mul(particular[i])?)?;
        }
        if s != row.rhs as i128 {
            return None;
        }
    }
    // And every kernel vector against the homogeneous system.
    for k in &kernel {
        for row in rows {
            let mut s = 0i128;
            for (i, &c) in row.coeffs.iter().enumerate() {
                s = s.checked_add((c as i128).checked_mul(k[i])?)?;
            }
            if s != 0 {
                return None;
            }
        }
    }

    Some(LatticeOutcome::Solvable { particular, kernel })
}

fn swap_columns(a: &mut [Vec<i128>], t: &mut [Vec<i128>], x: usize, y: usize) {
    if x == y {
        return;
    }
    for row in a.iter_mut() {
        row.swap(x, y);
    }
    for row in t.iter_mut() {
        row.swap(x, y);
    }
}
