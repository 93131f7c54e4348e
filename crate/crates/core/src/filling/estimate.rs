//! Grid estimates of Lipschitz constants.
//!
//! On an `n × n` grid the estimate is the largest `dist(f(p), f(q)) / |p − q|`
//! over horizontal and vertical edges, where `dist` is the norm of the
//! `(a, u)`-coordinates of `f(p)⁻¹ f(q)`. Axis-parallel edges measure the
//! Lipschitz constant for the ℓ¹ metric on the square.

use super::map::SquareMap;
use crate::algebra::{GroupF, SolvableGroup};
use crate::rational::{from_f64, Q};
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How grid bands are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Rayon when the `parallel` feature is on, sequential otherwise.
    #[default]
    Auto,
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdgeMax {
    pub ratio: f64,
    /// Grid indices of the edge start.
    pub i: usize,
    pub j: usize,
    pub horizontal: bool,
}

impl EdgeMax {
    fn none() -> Self {
        EdgeMax {
            ratio: 0.0,
            i: 0,
            j: 0,
            horizontal: true,
        }
    }

    fn better(self, o: EdgeMax) -> EdgeMax {
        // deterministic under any reduction order
        let key = |e: &EdgeMax| (e.j, e.i, !e.horizontal);
        if o.ratio > self.ratio || (o.ratio == self.ratio && key(&o) < key(&self)) {
            o
        } else {
            self
        }
    }
}

/// Estimate with the refinement interval `[raw, raw·(1 + slack)]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipEstimate {
    pub grid: usize,
    pub raw: f64,
    pub upper: f64,
    /// Relative change from the grid of half the size.
    pub slack: f64,
    pub argmax: EdgeMax,
    /// Grids evaluated, coarsest first.
    pub history: Vec<(usize, f64)>,
}

impl LipEstimate {
    /// The interval as rationals (exact images of the floats).
    pub fn to_rational(&self) -> (Q, Q) {
        (
            from_f64(self.raw).unwrap_or_default(),
            from_f64(self.upper).unwrap_or_default(),
        )
    }
}

fn dist(group: &SolvableGroup, x: &GroupF, y: &GroupF) -> f64 {
    group.left_quotient_f64(x, y).coord_norm()
}

fn row(group: &SolvableGroup, f: &SquareMap, n: usize, j: usize) -> Vec<GroupF> {
    let s = j as f64 / n as f64;
    (0..=n).map(|i| f.eval(group, i as f64 / n as f64, s)).collect()
}

/// Rows `j0..=j1`: horizontal edges on rows `j0..j1` (and `j1` when it is
/// the last row), vertical edges between consecutive rows.
fn band(group: &SolvableGroup, f: &SquareMap, n: usize, j0: usize, j1: usize) -> EdgeMax {
    let inv_h = n as f64;
    let mut best = EdgeMax::none();
    let mut prev = row(group, f, n, j0);
    for j in j0..=j1 {
        if j < j1 || j1 == n {
            for i in 0..n {
                let r = dist(group, &prev[i], &prev[i + 1]) * inv_h;
                best = best.better(EdgeMax {
                    ratio: r,
                    i,
                    j,
                    horizontal: true,
                });
            }
        }
        if j == j1 {
            break;
        }
        let next = row(group, f, n, j + 1);
        for i in 0..=n {
            let r = dist(group, &prev[i], &next[i]) * inv_h;
            best = best.better(EdgeMax {
                ratio: r,
                i,
                j,
                horizontal: false,
            });
        }
        prev = next;
    }
    best
}

const BAND_ROWS: usize = 16;

/// Largest edge ratio on the `n × n` grid.
pub fn grid_max(group: &SolvableGroup, f: &SquareMap, n: usize, schedule: Schedule) -> EdgeMax {
    assert!(n >= 2, "grid needs at least 2 cells per side");
    let bands: Vec<(usize, usize)> = (0..n)
        .step_by(BAND_ROWS)
        .map(|j0| (j0, (j0 + BAND_ROWS).min(n)))
        .collect();
    let run = |&(j0, j1): &(usize, usize)| band(group, f, n, j0, j1);
    match schedule {
        #[cfg(feature = "parallel")]
        Schedule::Auto => bands.par_iter().map(run).reduce(EdgeMax::none, EdgeMax::better),
        _ => bands.iter().map(run).fold(EdgeMax::none(), EdgeMax::better),
    }
}

/// Estimate at grid `n`; the slack is the relative change from `n/2`.
pub fn lipschitz_estimate(group: &SolvableGroup, f: &SquareMap, n: usize) -> LipEstimate {
    let cur = grid_max(group, f, n, Schedule::Auto);
    let mut history = Vec::new();
    let slack = if n / 2 >= 2 {
        let half = grid_max(group, f, n / 2, Schedule::Auto);
        history.push((n / 2, half.ratio));
        relative_change(half.ratio, cur.ratio)
    } else {
        0.0
    };
    history.push((n, cur.ratio));
    LipEstimate {
        grid: n,
        raw: cur.ratio,
        upper: cur.ratio * (1.0 + slack),
        slack,
        argmax: cur,
        history,
    }
}

fn relative_change(old: f64, new: f64) -> f64 {
    if new == 0.0 {
        0.0
    } else {
        ((new - old) / new).abs()
    }
}

pub const DEFAULT_GRID: usize = 128;
pub const DEFAULT_TOLERANCE: f64 = 0.02;
pub const DEFAULT_MAX_GRID: usize = 8192;

/// Double the grid from `n0` until the estimate moves by less than `tol`
/// or the grid reaches `max_grid`.
pub fn lipschitz_refined(group: &SolvableGroup, f: &SquareMap, n0: usize, tol: f64, max_grid: usize) -> LipEstimate {
    let mut est = lipschitz_estimate(group, f, n0);
    while est.slack >= tol && est.grid * 2 <= max_grid {
        let n = est.grid * 2;
        let cur = grid_max(group, f, n, Schedule::Auto);
        let slack = relative_change(est.raw, cur.ratio);
        est.history.push((n, cur.ratio));
        est = LipEstimate {
            grid: n,
            raw: cur.ratio,
            upper: cur.ratio * (1.0 + slack),
            slack,
            argmax: cur,
            history: est.history,
        };
    }
    est
}
