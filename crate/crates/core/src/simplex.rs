//! Dense phase-1 simplex for linear feasibility, generic over the
//! numeric track. Bland's rule makes it terminate and, with a fixed
//! variable order, deterministic; the exact-rational instantiation gives
//! genuine infeasibility certificates at desk scale.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpResult<T> {
    pub status: LpStatus,
    /// structural variable values when feasible
    pub solution: Vec<T>,
    /// phase-1 objective at termination (infeasibility measure)
    pub artificial_mass: T,
}

/// Find x ≥ 0 with A x = b, by minimizing the sum of artificial
/// variables.
pub fn solve_feasibility<T: Scalar>(a: &[Vec<T>], b: &[T]) -> LpResult<T> {
    let m = a.len();
    let n = if m > 0 { a[0].len() } else { 0 };
    let tol = T::pivot_tol();

    // tableau rows: [structural | artificial | rhs], rhs made nonnegative
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i] < T::zero();
        let mut row: Vec<T> = Vec::with_capacity(n + m + 1);
        for j in 0..n {
            let v = a[i][j].clone();
            row.push(if flip { -v } else { v });
        }
        for k in 0..m {
            row.push(if k == i { T::one() } else { T::zero() });
        }
        let rhs = b[i].clone();
        row.push(if flip { -rhs } else { rhs });
        tab.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase-1 objective row: minimize sum of artificials; reduced costs
    // start as -(column sums over structural), 0 on artificials
    let mut obj: Vec<T> = vec![T::zero(); n + m + 1];
    for row in &tab {
        for (j, cell) in obj.iter_mut().enumerate() {
            *cell = cell.clone() - row[j].clone();
        }
    }
    for j in n..n + m {
        obj[j] = T::zero();
    }

    loop {
        // Bland: entering = lowest-index column with negative reduced cost
        let entering = (0..n + m).find(|&j| obj[j] < -tol.clone());
        let Some(e) = entering else { break };
        // ratio test, ties broken by lowest basis index
        let mut leave: Option<usize> = None;
        let mut best: Option<T> = None;
        for i in 0..m {
            if tab[i][e] > tol {
                let ratio = tab[i][n + m].clone() / tab[i][e].clone();
                let better = match &best {
                    None => true,
                    Some(r) => {
                        ratio < *r || (ratio == *r && basis[i] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else {
            // unbounded phase-1 cannot happen with artificials; defensive
            break;
        };
        pivot(&mut tab, &mut obj, l, e);
        basis[l] = e;
    }

    let artificial_mass = {
        let mut s = T::zero();
        for (i, &bv) in basis.iter().enumerate() {
            if bv >= n {
                s = s + tab[i][n + m].clone();
            }
        }
        s
    };
    let feasible = Scalar::abs(&artificial_mass) <= tol;
    let mut solution = vec![T::zero(); n];
    if feasible {
        for (i, &bv) in basis.iter().enumerate() {
            if bv < n {
                solution[bv] = tab[i][n + m].clone();
            }
        }
    }
    LpResult {
        status: if feasible {
            LpStatus::Feasible
        } else {
            LpStatus::Infeasible
        },
        solution,
        artificial_mass,
    }
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], obj: &mut [T], row: usize, col: usize) {
    let pv = tab[row][col].clone();
    for cell in tab[row].iter_mut() {
        *cell = cell.clone() / pv.clone();
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i != row {
            let factor = r[col].clone();
            if factor != T::zero() {
                for (j, cell) in r.iter_mut().enumerate() {
                    *cell = cell.clone() - factor.clone() * pivot_row[j].clone();
                }
            }
        }
    }
    let factor = obj[col].clone();
    if factor != T::zero() {
        for (j, cell) in obj.iter_mut().enumerate() {
            *cell = cell.clone() - factor.clone() * pivot_row[j].clone();
        }
    }
}
