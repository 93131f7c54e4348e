//! Maps from the unit square `[0,1]²` (coordinates `(t, s)`, `t` along the
//! boundary word, `s` the homotopy parameter) into the group.
//!
//! Maps are combinator trees evaluated lazily. Bottom edge `s = 0` is the
//! source path, top edge `s = 1` the target.

use super::path::{Path1D, SlotPath};
use crate::algebra::{GroupF, SolvableGroup};
use crate::error::{Error, Result};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub enum MoveKind {
    /// Straight-line homotopy in `(a, u)`-coordinates based at `base`.
    Straight { base: GroupF, base_inv: GroupF },
    /// Bottom carries `v v⁻¹` on the range, top is idle there.
    Delete,
    /// Bottom is idle on the range, top carries `v v⁻¹`.
    Insert,
    /// Same letters, different idle slots: `Γ((1−s)τ_b(t) + sτ_t(t))`.
    Reparam,
    /// `base · inner(τ, s)` on the range, `τ` the local coordinate.
    Patch { base: GroupF, inner: Box<SquareMap> },
}

/// A homotopy between two slot paths that only differs on the slot range
/// `[lo, hi)`. Both paths have the same slot count, except for `Reparam`,
/// which may change it.
#[derive(Clone, Debug)]
pub struct Move {
    pub bottom: Arc<SlotPath>,
    pub top: Arc<SlotPath>,
    pub lo: usize,
    pub hi: usize,
    pub kind: MoveKind,
}

#[derive(Clone, Debug)]
pub enum SquareMap {
    Const(GroupF),
    /// Constant in `s`.
    Path(Path1D),
    /// `base · ψ⁻¹((1−s)ψ(base⁻¹ bottom(t)) + sψ(base⁻¹ top(t)))`.
    Straight {
        base: GroupF,
        base_inv: GroupF,
        bottom: Path1D,
        top: Path1D,
    },
    Move(Box<Move>),
    /// `s ↦ 1 − s`.
    Reverse(Box<SquareMap>),
    /// Left translate.
    Translate(GroupF, Box<SquareMap>),
    /// Side-by-side parts; `ends[i]` is the right edge of part `i`.
    HConcat { ends: Vec<f64>, parts: Vec<SquareMap> },
    /// Stacked parts; `ends[i]` is the top edge of part `i`.
    VConcat { ends: Vec<f64>, parts: Vec<SquareMap> },
}

fn lerp_coords(x: &GroupF, y: &GroupF, s: f64) -> GroupF {
    GroupF {
        a: x.a.iter().zip(&y.a).map(|(p, q)| p + s * (q - p)).collect(),
        u: x.u.iter().zip(&y.u).map(|(p, q)| p + s * (q - p)).collect(),
    }
}

fn locate(ends: &[f64], x: f64) -> (usize, f64) {
    let i = ends.partition_point(|e| *e < x).min(ends.len() - 1);
    let lo = if i == 0 { 0.0 } else { ends[i - 1] };
    let w = ends[i] - lo;
    let local = if w > 0.0 { ((x - lo) / w).clamp(0.0, 1.0) } else { 0.0 };
    (i, local)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut ends: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect();
    *ends.last_mut().unwrap() = 1.0;
    ends
}

impl Move {
    pub fn eval(&self, group: &SolvableGroup, t: f64, s: f64) -> GroupF {
        let n = self.bottom.slot_count();
        let x = t * n as f64;
        if !matches!(self.kind, MoveKind::Reparam) && (x < self.lo as f64 || x > self.hi as f64) {
            return self.bottom.at_slot_time(group, x);
        }
        let width = (self.hi - self.lo) as f64;
        match &self.kind {
            MoveKind::Straight { base, base_inv } => {
                let b = self.bottom.at_slot_time(group, x);
                let c = self.top.at_slot_time(group, x);
                let mixed = lerp_coords(&group.mul_f64(base_inv, &b), &group.mul_f64(base_inv, &c), s);
                group.mul_f64(base, &mixed)
            }
            MoveKind::Delete | MoveKind::Insert => {
                let (path, s) = match self.kind {
                    MoveKind::Delete => (&self.bottom, s),
                    _ => (&self.top, 1.0 - s),
                };
                let tau = (x - self.lo as f64) / width;
                let y = (tau - s).min(1.0 - tau - s).max(0.0);
                path.at_slot_time(group, self.lo as f64 + y * width)
            }
            MoveKind::Reparam => {
                let tb = self.bottom.compressed_time(x);
                let tt = self.top.compressed_time(t * self.top.slot_count() as f64);
                self.bottom.at_compressed(group, tb + s * (tt - tb))
            }
            MoveKind::Patch { base, inner } => {
                let tau = (x - self.lo as f64) / width;
                group.mul_f64(base, &inner.eval(group, tau, s))
            }
        }
    }

    /// Largest length of a vertical segment `s ↦ f(t, s)`.
    pub fn vertical_cost(&self, group: &SolvableGroup) -> f64 {
        match &self.kind {
            MoveKind::Delete => half_length(&self.bottom, self.lo, self.hi),
            MoveKind::Insert => half_length(&self.top, self.lo, self.hi),
            MoveKind::Reparam => {
                let (nb, nt) = (self.bottom.slot_count(), self.top.slot_count());
                let ts = (0..=nb).map(|i| i as f64 / nb as f64).chain((0..=nt).map(|i| i as f64 / nt as f64));
                ts.map(|t| {
                    let tb = self.bottom.compressed_time(t * nb as f64);
                    let tt = self.top.compressed_time(t * nt as f64);
                    (self.bottom.arc_at(tb) - self.bottom.arc_at(tt)).abs()
                })
                .fold(0.0, f64::max)
            }
            _ => {
                let n = self.bottom.slot_count() as f64;
                let samples = 2 * (self.hi - self.lo) + 1;
                (0..samples)
                    .map(|k| {
                        let t = (self.lo as f64 + k as f64 / 2.0) / n;
                        vertical_length(group, |s| self.eval(group, t, s), 8)
                    })
                    .fold(0.0, f64::max)
            }
        }
    }
}

fn half_length(p: &SlotPath, lo: usize, hi: usize) -> f64 {
    let mid = (lo + hi) / 2;
    let x = p.compressed_time(lo as f64);
    let y = p.compressed_time(mid as f64);
    p.arc_at(y) - p.arc_at(x)
}

/// Polygonal length of `s ↦ g(s)` with `k` steps.
pub fn vertical_length(group: &SolvableGroup, g: impl Fn(f64) -> GroupF, k: usize) -> f64 {
    let mut prev = g(0.0);
    let mut total = 0.0;
    for i in 1..=k {
        let cur = g(i as f64 / k as f64);
        total += group.left_quotient_f64(&prev, &cur).coord_norm();
        prev = cur;
    }
    total
}

impl SquareMap {
    pub fn eval(&self, group: &SolvableGroup, t: f64, s: f64) -> GroupF {
        match self {
            SquareMap::Const(g) => g.clone(),
            SquareMap::Path(p) => p.eval(group, t),
            SquareMap::Straight {
                base,
                base_inv,
                bottom,
                top,
            } => {
                let b = group.mul_f64(base_inv, &bottom.eval(group, t));
                let c = group.mul_f64(base_inv, &top.eval(group, t));
                group.mul_f64(base, &lerp_coords(&b, &c, s))
            }
            SquareMap::Move(m) => m.eval(group, t, s),
            SquareMap::Reverse(m) => m.eval(group, t, 1.0 - s),
            SquareMap::Translate(g, m) => group.mul_f64(g, &m.eval(group, t, s)),
            SquareMap::HConcat { ends, parts } => {
                let (i, local) = locate(ends, t);
                parts[i].eval(group, local, s)
            }
            SquareMap::VConcat { ends, parts } => {
                let (i, local) = locate(ends, s);
                parts[i].eval(group, t, local)
            }
        }
    }

    pub fn straight(group: &SolvableGroup, base: GroupF, bottom: Path1D, top: Path1D) -> Self {
        let base_inv = group.inverse_f64(&base);
        SquareMap::Straight {
            base,
            base_inv,
            bottom,
            top,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            SquareMap::Reverse(inner) => *inner,
            SquareMap::Const(_) | SquareMap::Path(_) => self,
            other => SquareMap::Reverse(Box::new(other)),
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, SquareMap::Const(_))
    }

    /// Number of combinator nodes.
    pub fn node_count(&self) -> usize {
        match self {
            SquareMap::Move(m) => match &m.kind {
                MoveKind::Patch { inner, .. } => 1 + inner.node_count(),
                _ => 1,
            },
            SquareMap::Reverse(m) | SquareMap::Translate(_, m) => 1 + m.node_count(),
            SquareMap::HConcat { parts, .. } | SquareMap::VConcat { parts, .. } => {
                1 + parts.iter().map(|p| p.node_count()).sum::<usize>()
            }
            _ => 1,
        }
    }

    pub fn bottom(&self, group: &SolvableGroup, t: f64) -> GroupF {
        self.eval(group, t, 0.0)
    }

    pub fn top(&self, group: &SolvableGroup, t: f64) -> GroupF {
        self.eval(group, t, 1.0)
    }
}

/// Parameters at which traces are compared: a uniform sample plus the
/// given breakpoints.
fn trace_samples(extra: usize) -> Vec<f64> {
    let k = 64 + extra;
    (0..=k).map(|i| i as f64 / k as f64).collect()
}

/// Tolerance for comparing two floating evaluations of the same point.
pub fn trace_tolerance(x: &GroupF) -> f64 {
    1e-7 * (1.0 + x.coord_norm())
}

fn close(group: &SolvableGroup, x: &GroupF, y: &GroupF) -> bool {
    group.left_quotient_f64(x, y).coord_norm() <= trace_tolerance(x).max(trace_tolerance(y))
}

/// Stack maps bottom to top with the given relative heights, after checking
/// that each top trace matches the next bottom trace.
pub fn vconcat(group: &SolvableGroup, parts: Vec<(f64, SquareMap)>) -> Result<SquareMap> {
    if parts.is_empty() {
        return Err(Error::Assembly {
            location: "vconcat".into(),
            msg: "no parts".into(),
        });
    }
    for (i, w) in parts.windows(2).enumerate() {
        for t in trace_samples(0) {
            let a = w[0].1.top(group, t);
            let b = w[1].1.bottom(group, t);
            if !close(group, &a, &b) {
                return Err(Error::Assembly {
                    location: format!("vconcat seam {} at t={t}", i + 1),
                    msg: format!("top {:?} differs from bottom {:?}", a, b),
                });
            }
        }
    }
    Ok(vconcat_unchecked(parts))
}

pub(crate) fn vconcat_unchecked(parts: Vec<(f64, SquareMap)>) -> SquareMap {
    let parts: Vec<(f64, SquareMap)> = parts.into_iter().filter(|(h, _)| *h > 0.0).collect();
    if parts.len() == 1 {
        return parts.into_iter().next().unwrap().1;
    }
    let weights: Vec<f64> = parts.iter().map(|p| p.0).collect();
    SquareMap::VConcat {
        ends: cumulative(&weights),
        parts: parts.into_iter().map(|p| p.1).collect(),
    }
}

/// Place maps left to right with the given relative widths, after checking
/// that neighbouring sides agree.
pub fn hconcat(group: &SolvableGroup, parts: Vec<(f64, SquareMap)>) -> Result<SquareMap> {
    if parts.is_empty() {
        return Err(Error::Assembly {
            location: "hconcat".into(),
            msg: "no parts".into(),
        });
    }
    for (i, w) in parts.windows(2).enumerate() {
        for s in trace_samples(0) {
            let a = w[0].1.eval(group, 1.0, s);
            let b = w[1].1.eval(group, 0.0, s);
            if !close(group, &a, &b) {
                return Err(Error::Assembly {
                    location: format!("hconcat seam {} at s={s}", i + 1),
                    msg: format!("right side {:?} differs from left side {:?}", a, b),
                });
            }
        }
    }
    Ok(hconcat_unchecked(parts))
}

pub(crate) fn hconcat_unchecked(parts: Vec<(f64, SquareMap)>) -> SquareMap {
    let parts: Vec<(f64, SquareMap)> = parts.into_iter().filter(|(w, _)| *w > 0.0).collect();
    if parts.len() == 1 {
        return parts.into_iter().next().unwrap().1;
    }
    let weights: Vec<f64> = parts.iter().map(|p| p.0).collect();
    SquareMap::HConcat {
        ends: cumulative(&weights),
        parts: parts.into_iter().map(|p| p.1).collect(),
    }
}

/// Which edge a boundary check looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    Bottom,
    Top,
    Left,
    Right,
}

/// Largest deviation between an edge of `f` and a reference path.
pub fn edge_deviation(group: &SolvableGroup, f: &SquareMap, edge: Edge, reference: &dyn Fn(f64) -> GroupF, samples: usize) -> f64 {
    (0..=samples)
        .map(|i| {
            let x = i as f64 / samples as f64;
            let v = match edge {
                Edge::Bottom => f.eval(group, x, 0.0),
                Edge::Top => f.eval(group, x, 1.0),
                Edge::Left => f.eval(group, 0.0, x),
                Edge::Right => f.eval(group, 1.0, x),
            };
            group.left_quotient_f64(&reference(x), &v).coord_norm()
        })
        .fold(0.0, f64::max)
}
