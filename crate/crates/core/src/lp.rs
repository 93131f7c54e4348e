//! Exact linear feasibility over Q.
//!
//! `feasible_ge` decides `A x >= b` for free `x` and returns either a point or a
//! Farkas certificate `y >= 0, y^T A = 0, y^T b > 0`. Both sides are found with
//! a phase-one simplex on a standard-form system, pivoting by Bland's rule, so
//! results are deterministic and replay bit-exactly.

use crate::linalg::{dot, QMatrix, QVec};
use crate::rational::{one, zero, Q};
use num_traits::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(QVec),
    Infeasible(QVec),
}

/// Find `z >= 0` with `m z = c`, or `None` if no such `z` exists.
pub fn standard_form_point(m: &QMatrix, c: &[Q]) -> Option<QVec> {
    let rows = m.nrows();
    let n = m.ncols();
    assert_eq!(c.len(), rows);
    // Tableau columns: n originals, rows artificials, then rhs.
    let width = n + rows + 1;
    let mut t: Vec<QVec> = Vec::with_capacity(rows + 1);
    for i in 0..rows {
        let neg = c[i].is_negative();
        let mut row = vec![zero(); width];
        for j in 0..n {
            row[j] = if neg { -m[(i, j)].clone() } else { m[(i, j)].clone() };
        }
        row[n + i] = one();
        row[width - 1] = if neg { -c[i].clone() } else { c[i].clone() };
        t.push(row);
    }
    // Objective: minimize sum of artificials, stored as reduced costs.
    let mut obj = vec![zero(); width];
    for row in &t {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();
    loop {
        // Bland: smallest index with negative reduced cost.
        let Some(enter) = (0..n + rows).find(|&j| obj[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..rows {
            let a = &t[i][enter];
            if a.is_positive() {
                let ratio = &t[i][width - 1] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else {
            // Unbounded direction cannot occur for a bounded-below phase one.
            unreachable!("phase-one objective is bounded below by zero");
        };
        pivot(&mut t, &mut obj, pr, enter);
        basis[pr] = enter;
    }
    if !obj[width - 1].is_zero() {
        return None;
    }
    let mut z = vec![zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            z[b] = t[i][width - 1].clone();
        }
    }
    Some(z)
}

fn pivot(t: &mut [QVec], obj: &mut QVec, pr: usize, pc: usize) {
    let pv = t[pr][pc].clone();
    for x in t[pr].iter_mut() {
        *x = &*x / &pv;
    }
    let prow = t[pr].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == pr || row[pc].is_zero() {
            continue;
        }
        let f = row[pc].clone();
        for (x, p) in row.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *x -= &f * p;
            }
        }
    }
    if !obj[pc].is_zero() {
        let f = obj[pc].clone();
        for (x, p) in obj.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *x -= &f * p;
            }
        }
    }
}

/// Decide `a x >= b` with `x` unrestricted in sign.
pub fn feasible_ge(a: &QMatrix, b: &[Q]) -> Feasibility {
    let rows = a.nrows();
    let d = a.ncols();
    // x = x+ - x-, slack s >= 0: [A, -A, -I] (x+, x-, s) = b
    let neg_a = a.scale(&-one());
    let neg_i = QMatrix::identity(rows).scale(&-one());
    let m = a.hstack(&neg_a).hstack(&neg_i);
    if let Some(z) = standard_form_point(&m, b) {
        let x = (0..d).map(|j| &z[j] - &z[d + j]).collect();
        return Feasibility::Feasible(x);
    }
    // Farkas: [A^T; b^T] y = [0; 1], y >= 0
    let mut rhs = vec![zero(); d];
    rhs.push(one());
    let bt = QMatrix::from_rows(&[b.to_vec()]);
    let m = a.transpose().vstack(&bt);
    let y = standard_form_point(&m, &rhs)
        .expect("Farkas alternative must hold when the primal is infeasible");
    Feasibility::Infeasible(y)
}

/// Re-check a claimed point of `a x >= b`.
pub fn verify_point(a: &QMatrix, b: &[Q], x: &[Q]) -> bool {
    a.mul_vec(x).iter().zip(b).all(|(l, r)| l >= r)
}

/// Re-check a claimed Farkas certificate for infeasibility of `a x >= b`.
pub fn verify_farkas(a: &QMatrix, b: &[Q], y: &[Q]) -> bool {
    y.len() == a.nrows()
        && y.iter().all(|v| !v.is_negative())
        && a.transpose().mul_vec(y).iter().all(|v| v.is_zero())
        && dot(y, b).is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    #[test]
    fn simple_feasible() {
        // x <= -1 and 2x <= -1  <=>  -x >= 1, -2x >= 1
        let a = QMatrix::from_i64(&[&[-1], &[-2]]);
        let b = vec![q(1), q(1)];
        match feasible_ge(&a, &b) {
            Feasibility::Feasible(x) => {
                assert!(verify_point(&a, &b, &x));
                assert_eq!(x, vec![q(-1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn opposite_signs_infeasible() {
        let a = QMatrix::from_i64(&[&[-1], &[1]]);
        let b = vec![q(1), q(1)];
        match feasible_ge(&a, &b) {
            Feasibility::Infeasible(y) => assert!(verify_farkas(&a, &b, &y)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn triangle_weights_infeasible() {
        let a = QMatrix::from_i64(&[&[-1, 0], &[0, -1], &[1, 1]]);
        let b = vec![q(1), q(1), q(1)];
        match feasible_ge(&a, &b) {
            Feasibility::Infeasible(y) => {
                assert!(verify_farkas(&a, &b, &y));
                assert_eq!(y[0], y[1]);
                assert_eq!(y[1], y[2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_system() {
        let m = QMatrix::from_i64(&[&[1, 1, 0], &[0, 1, 1]]);
        let z = standard_form_point(&m, &[q(1), qr(1, 2)]).unwrap();
        assert_eq!(m.mul_vec(&z), vec![q(1), qr(1, 2)]);
        assert!(z.iter().all(|v| !v.is_negative()));
        assert!(standard_form_point(&m, &[q(-1), q(0)]).is_none());
    }
}
