//! Piecewise one-parameter paths.
//!
//! A `SlotPath` divides `[0,1]` into `N` equal slots. A slot either carries a
//! letter `s` (the path runs `P·exp(τ log s)` across it, `P` the value at the
//! slot start) or is idle (constant). With no idle slots this is the word
//! path `γ_w` with uniform speed.

use crate::algebra::{GroupF, SolvableGroup};
use crate::words::{Letter, Word};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct SlotPath {
    slots: Vec<Option<GroupF>>,
    prefix: Vec<GroupF>,
    /// letters strictly before slot `i`; length `N + 1`
    cum: Vec<usize>,
    letter_slot: Vec<usize>,
    /// arc length before letter `j` (compressed time); length `L + 1`
    arc: Vec<f64>,
}

/// `exp(τ log s)` for a letter stored as `(a, u)` coordinates.
fn segment(s: &GroupF, tau: f64) -> GroupF {
    GroupF {
        a: s.a.iter().map(|x| x * tau).collect(),
        u: s.u.iter().map(|x| x * tau).collect(),
    }
}

impl SlotPath {
    pub fn new(group: &SolvableGroup, start: GroupF, slots: Vec<Option<GroupF>>) -> Self {
        let slots: Vec<Option<GroupF>> = slots
            .into_iter()
            .map(|s| s.filter(|g| g.coord_norm() != 0.0))
            .collect();
        let mut prefix = Vec::with_capacity(slots.len() + 1);
        let mut cum = Vec::with_capacity(slots.len() + 1);
        let mut letter_slot = Vec::new();
        let mut arc = vec![0.0];
        let mut cur = start;
        for (i, s) in slots.iter().enumerate() {
            prefix.push(cur.clone());
            cum.push(letter_slot.len());
            if let Some(s) = s {
                letter_slot.push(i);
                arc.push(arc.last().unwrap() + s.coord_norm());
                cur = group.mul_f64(&cur, s);
            }
        }
        prefix.push(cur);
        cum.push(letter_slot.len());
        SlotPath {
            slots,
            prefix,
            cum,
            letter_slot,
            arc,
        }
    }

    pub fn from_letters(group: &SolvableGroup, start: GroupF, slots: &[Option<Letter>]) -> Self {
        Self::new(
            group,
            start,
            slots.iter().map(|s| s.as_ref().map(|l| l.elem.to_f64())).collect(),
        )
    }

    /// Constant path with `n` idle slots.
    pub fn constant(group: &SolvableGroup, at: GroupF, n: usize) -> Self {
        Self::new(group, at, vec![None; n.max(1)])
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn letter_count(&self) -> usize {
        self.letter_slot.len()
    }

    pub fn start(&self) -> &GroupF {
        &self.prefix[0]
    }

    pub fn end(&self) -> &GroupF {
        self.prefix.last().unwrap()
    }

    pub fn prefix(&self, slot: usize) -> &GroupF {
        &self.prefix[slot]
    }

    pub fn slot(&self, i: usize) -> Option<&GroupF> {
        self.slots[i].as_ref()
    }

    pub fn max_letter_norm(&self) -> f64 {
        self.slots
            .iter()
            .flatten()
            .map(|s| s.coord_norm())
            .fold(0.0, f64::max)
    }

    /// Exact Lipschitz constant in the chosen metric: `N · max ‖log s‖`.
    pub fn lipschitz(&self) -> f64 {
        self.slot_count() as f64 * self.max_letter_norm()
    }

    pub fn length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    /// Value at slot time `x ∈ [0, N]`.
    pub fn at_slot_time(&self, group: &SolvableGroup, x: f64) -> GroupF {
        let n = self.slots.len();
        if x <= 0.0 {
            return self.prefix[0].clone();
        }
        let i = (x.floor() as usize).min(n - 1);
        let tau = (x - i as f64).clamp(0.0, 1.0);
        match &self.slots[i] {
            None => self.prefix[i].clone(),
            Some(_) if tau == 0.0 => self.prefix[i].clone(),
            Some(_) if tau == 1.0 => self.prefix[i + 1].clone(),
            Some(s) => group.mul_f64(&self.prefix[i], &segment(s, tau)),
        }
    }

    pub fn eval(&self, group: &SolvableGroup, t: f64) -> GroupF {
        self.at_slot_time(group, t * self.slots.len() as f64)
    }

    /// Number of letters traversed by slot time `x` (piecewise linear).
    pub fn compressed_time(&self, x: f64) -> f64 {
        let n = self.slots.len();
        if x <= 0.0 {
            return 0.0;
        }
        if x >= n as f64 {
            return self.letter_count() as f64;
        }
        let i = x.floor() as usize;
        let base = self.cum[i] as f64;
        if self.slots[i].is_some() {
            base + (x - i as f64)
        } else {
            base
        }
    }

    /// Value after `tau` letters (compressed parametrization).
    pub fn at_compressed(&self, group: &SolvableGroup, tau: f64) -> GroupF {
        let l = self.letter_count();
        if l == 0 || tau <= 0.0 {
            return self.prefix[0].clone();
        }
        if tau >= l as f64 {
            return self.end().clone();
        }
        let j = tau.floor() as usize;
        let slot = self.letter_slot[j];
        self.at_slot_time(group, slot as f64 + (tau - j as f64))
    }

    /// Arc length along the compressed path up to `tau` letters.
    pub fn arc_at(&self, tau: f64) -> f64 {
        let l = self.letter_count();
        if tau <= 0.0 || l == 0 {
            return 0.0;
        }
        if tau >= l as f64 {
            return self.arc[l];
        }
        let j = tau.floor() as usize;
        self.arc[j] + (tau - j as f64) * (self.arc[j + 1] - self.arc[j])
    }
}

/// Loop or path parametrized on `[0,1]`.
#[derive(Clone, Debug)]
pub enum Path1D {
    Slots(Arc<SlotPath>),
    /// `base · exp(r(cos 2πt − 1) e_i + r sin 2πt e_j)` in 𝔲.
    Circle {
        base: GroupF,
        radius: f64,
        plane: (usize, usize),
    },
}

impl Path1D {
    pub fn eval(&self, group: &SolvableGroup, t: f64) -> GroupF {
        match self {
            Path1D::Slots(p) => p.eval(group, t),
            Path1D::Circle { base, radius, plane } => {
                let th = std::f64::consts::TAU * t;
                let mut off = GroupF::identity(base.a.len(), base.u.len());
                off.u[plane.0] = radius * (th.cos() - 1.0);
                off.u[plane.1] = radius * th.sin();
                group.mul_f64(base, &off)
            }
        }
    }

    /// Parameter values where the path may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Path1D::Slots(p) => {
                let n = p.slot_count();
                (0..=n).map(|i| i as f64 / n as f64).collect()
            }
            Path1D::Circle { .. } => (0..=64).map(|i| i as f64 / 64.0).collect(),
        }
    }

    /// Lipschitz constant of the parametrization (exact for slot paths,
    /// speed `2πr` in the Euclidean 𝔲-coordinates for circles).
    pub fn lipschitz(&self, group: &SolvableGroup) -> f64 {
        match self {
            Path1D::Slots(p) => p.lipschitz(),
            Path1D::Circle { radius, .. } => {
                if group.spec().is_abelian() {
                    std::f64::consts::TAU * radius
                } else {
                    sampled_speed(group, self, 4096)
                }
            }
        }
    }
}

fn sampled_speed(group: &SolvableGroup, p: &Path1D, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut prev = p.eval(group, 0.0);
    let mut best: f64 = 0.0;
    for i in 1..=n {
        let cur = p.eval(group, i as f64 * h);
        best = best.max(group.left_quotient_f64(&prev, &cur).coord_norm() / h);
        prev = cur;
    }
    best
}

/// `γ_w` based at `start`, one slot per letter.
pub fn word_path(group: &SolvableGroup, start: GroupF, w: &Word) -> SlotPath {
    let slots: Vec<Option<Letter>> = w.letters.iter().cloned().map(Some).collect();
    SlotPath::from_letters(group, start, &slots)
}
