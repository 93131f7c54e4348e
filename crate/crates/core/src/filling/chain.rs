//! Homotopies assembled from a sequence of exact slot words.
//!
//! A `Chain` holds a word laid out on a fixed number of slots (idle slots are
//! identity letters). Each operation replaces the word by an equal word that
//! differs on a slot range and records the homotopy between the two paths.
//! Equality is checked in exact arithmetic, so consecutive traces agree up to
//! floating rounding only.

use super::map::{vconcat, Move, MoveKind, SquareMap};
use super::path::{Path1D, SlotPath};
use crate::algebra::{GroupElement, GroupF, SolvableGroup};
use crate::error::{Error, Result};
use crate::linalg::{vec_is_zero, vec_neg};
use crate::rational::Q;
use crate::words::{inf_norm, tame_normal_form, ContractionData, Factor, Letter, NormalForms, Word};
use std::sync::Arc;

/// Tame normal forms for one conic factor `G_C = U_C ⋊ A`.
#[derive(Clone, Debug)]
pub struct TameCtx {
    pub cd: ContractionData,
    /// Tag carried by the U-letters and contraction letters.
    pub factor: Factor,
    pub a_radius: Q,
}

impl TameCtx {
    pub fn from_normal_forms(nf: &NormalForms, subset: usize) -> Self {
        TameCtx {
            cd: nf.contraction[subset].clone(),
            factor: Factor::Conic(subset),
            a_radius: nf.descriptor.a_radius.clone(),
        }
    }

    /// Normal form for a tame group (exactly one maximal conic subset).
    pub fn for_tame_group(nf: &NormalForms) -> Result<Self> {
        if nf.contraction.len() != 1 {
            return Err(Error::Precondition(format!(
                "the triangle filler needs a tame group; found {} maximal conic subsets",
                nf.contraction.len()
            )));
        }
        Ok(Self::from_normal_forms(nf, 0))
    }

    pub fn radius(&self) -> &Q {
        &self.cd.u_radius
    }

    pub fn in_ball(&self, u: &[Q]) -> bool {
        &inf_norm(u) <= self.radius()
    }

    /// Smallest `k` with `adjoint(a)^k u` in the ball.
    pub fn depth(&self, group: &SolvableGroup, u: &[Q]) -> Result<usize> {
        let mut x = u.to_vec();
        let mut k = 0;
        while !self.in_ball(&x) {
            x = group.adjoint(&self.cd.a, &x)?;
            k += 1;
            if k > 1 << 16 {
                return Err(Error::Internal("contraction did not terminate".into()));
            }
        }
        Ok(k)
    }

    pub fn a_word(&self, group: &SolvableGroup, a: &[Q]) -> Word {
        let steps = crate::words::box_steps(a, &self.a_radius);
        Word::new(steps.into_iter().map(|x| Letter::new(group.from_a(x), Factor::A)).collect())
    }

    /// `ω(g)`: box word for the A-part, then `b^k s a^k` for the U-part.
    pub fn omega(&self, group: &SolvableGroup, g: &GroupElement) -> Result<Word> {
        let mut w = self.a_word(group, &g.a);
        if !g.in_a() {
            let part = tame_normal_form(group, &self.cd, &group.from_u(g.u.clone()), self.factor)?;
            w = w.concat(&part);
        }
        Ok(w)
    }

    fn a_letter(&self, group: &SolvableGroup) -> Letter {
        Letter::new(group.from_a(self.cd.a.clone()), self.factor)
    }

    fn b_letter(&self, group: &SolvableGroup) -> Letter {
        Letter::new(group.from_a(self.cd.b()), self.factor)
    }
}

fn room_error(needed: usize, have: usize) -> Error {
    Error::Guard {
        what: ROOM.into(),
        value: needed,
        limit: have,
    }
}

pub(crate) const ROOM: &str = "slots needed by a chain";

pub(crate) fn is_room_error(e: &Error) -> bool {
    matches!(e, Error::Guard { what, .. } if what == ROOM)
}

pub struct Chain<'g> {
    group: &'g SolvableGroup,
    slots: Vec<Option<Letter>>,
    path: Arc<SlotPath>,
    bottom: Arc<SlotPath>,
    moves: Vec<Move>,
}

/// Result of running a chain: the map, its total vertical cost and the final
/// layout.
pub struct ChainMap {
    pub map: SquareMap,
    pub cost: f64,
    pub top: Vec<Option<Letter>>,
    pub top_path: Arc<SlotPath>,
    pub moves: usize,
}

fn normalize(slots: Vec<Option<Letter>>) -> Vec<Option<Letter>> {
    slots
        .into_iter()
        .map(|s| s.filter(|l| !l.elem.is_identity()))
        .collect()
}

impl<'g> Chain<'g> {
    pub fn new(group: &'g SolvableGroup, start: GroupF, slots: Vec<Option<Letter>>) -> Self {
        let slots = normalize(slots);
        let path = Arc::new(SlotPath::from_letters(group, start, &slots));
        Chain {
            group,
            slots,
            bottom: path.clone(),
            path,
            moves: Vec::new(),
        }
    }

    /// Word packed to the left of `n` slots.
    pub fn packed(group: &'g SolvableGroup, start: GroupF, w: &Word, n: usize) -> Result<Self> {
        if w.len() > n {
            return Err(room_error(w.len(), n));
        }
        let mut slots: Vec<Option<Letter>> = w.letters.iter().cloned().map(Some).collect();
        slots.resize(n, None);
        Ok(Self::new(group, start, slots))
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Option<Letter>] {
        &self.slots
    }

    pub fn word(&self) -> Word {
        Word::new(self.slots.iter().flatten().cloned().collect())
    }

    fn positions(&self) -> Vec<usize> {
        (0..self.slots.len()).filter(|&i| self.slots[i].is_some()).collect()
    }

    fn letter_at(&self, slot: usize) -> &Letter {
        self.slots[slot].as_ref().expect("slot holds a letter")
    }

    /// Idle counts before each letter and after the last one.
    pub fn gaps(&self) -> Vec<usize> {
        let mut gaps = vec![0];
        for s in &self.slots {
            match s {
                None => *gaps.last_mut().unwrap() += 1,
                Some(_) => gaps.push(0),
            }
        }
        gaps
    }

    fn product(&self, slots: &[Option<Letter>]) -> Result<GroupElement> {
        slots
            .iter()
            .flatten()
            .try_fold(self.group.identity(), |acc, l| self.group.mul(&acc, &l.elem))
    }

    fn push(&mut self, new_slots: Vec<Option<Letter>>, lo: usize, hi: usize, kind: MoveKind) {
        let top = Arc::new(SlotPath::from_letters(self.group, self.path.start().clone(), &new_slots));
        self.moves.push(Move {
            bottom: self.path.clone(),
            top: top.clone(),
            lo,
            hi,
            kind,
        });
        self.slots = new_slots;
        self.path = top;
    }

    /// Replace slots `[lo, hi)` by an equal word; straight-line homotopy
    /// based at the value at slot `lo`.
    pub fn local(&mut self, lo: usize, hi: usize, new: Vec<Option<Letter>>) -> Result<()> {
        let new = normalize(new);
        assert_eq!(new.len(), hi - lo);
        if self.slots[lo..hi] == new[..] {
            return Ok(());
        }
        if self.product(&self.slots[lo..hi])? != self.product(&new)? {
            return Err(Error::Internal(format!("local move on slots {lo}..{hi} changes the product")));
        }
        let base = self.path.prefix(lo).clone();
        let base_inv = self.group.inverse_f64(&base);
        let mut slots = self.slots.clone();
        slots.splice(lo..hi, new);
        self.push(slots, lo, hi, MoveKind::Straight { base, base_inv });
        Ok(())
    }

    /// Move letters to a new idle pattern.
    pub fn relayout(&mut self, gaps: &[usize]) -> Result<()> {
        let letters: Vec<Letter> = self.slots.iter().flatten().cloned().collect();
        assert_eq!(gaps.len(), letters.len() + 1);
        let need = letters.len() + gaps.iter().sum::<usize>();
        if need != self.slots.len() {
            return Err(room_error(need, self.slots.len()));
        }
        let mut slots = Vec::with_capacity(need);
        for (g, l) in gaps.iter().zip(letters.into_iter().map(Some).chain([None])) {
            slots.extend(std::iter::repeat_n(None, *g));
            if l.is_some() {
                slots.push(l);
            }
        }
        if slots == self.slots {
            return Ok(());
        }
        let n = slots.len();
        self.push(slots, 0, n, MoveKind::Reparam);
        Ok(())
    }

    /// Ensure idles before letters: each `(j, c)` asks for `c` more idles
    /// before letter `j` (index `L` is the tail); requests on the same gap
    /// add up. Surplus is borrowed from the tail first, then the widest gaps.
    pub fn reserve(&mut self, want: &[(usize, usize)]) -> Result<()> {
        let mut gaps = self.gaps();
        let mut floor = vec![0; gaps.len()];
        let mut deficit = 0usize;
        for &(j, c) in want {
            floor[j] += c;
        }
        for (g, f) in gaps.iter_mut().zip(&floor) {
            if *g < *f {
                deficit += *f - *g;
                *g = *f;
            }
        }
        let tail = gaps.len() - 1;
        let mut order: Vec<usize> = (0..gaps.len()).collect();
        order.sort_by_key(|&j| (j != tail, std::cmp::Reverse(gaps[j] - floor[j])));
        for j in order {
            if deficit == 0 {
                break;
            }
            let take = (gaps[j] - floor[j]).min(deficit);
            gaps[j] -= take;
            deficit -= take;
        }
        if deficit > 0 {
            return Err(room_error(self.slots.len() + deficit, self.slots.len()));
        }
        self.relayout(&gaps)
    }

    /// Remove idles between letters `j0..=j1`, parking them after `j1`.
    pub fn close_up(&mut self, j0: usize, j1: usize) -> Result<()> {
        let mut gaps = self.gaps();
        let mut freed = 0;
        for g in gaps.iter_mut().take(j1 + 1).skip(j0 + 1) {
            freed += *g;
            *g = 0;
        }
        gaps[j1 + 1] += freed;
        self.relayout(&gaps)
    }

    /// Write `v v⁻¹` into the idle slots starting at `lo`.
    pub fn insert(&mut self, lo: usize, v: &[Letter]) -> Result<()> {
        let m = v.len();
        if m == 0 {
            return Ok(());
        }
        let hi = lo + 2 * m;
        if hi > self.slots.len() || self.slots[lo..hi].iter().any(|s| s.is_some()) {
            return Err(Error::Internal(format!("backtrack insertion needs idle slots {lo}..{hi}")));
        }
        let inv = Word::new(v.to_vec()).inverse(self.group)?;
        let mut slots = self.slots.clone();
        for (k, l) in v.iter().chain(&inv.letters).enumerate() {
            slots[lo + k] = Some(l.clone());
        }
        self.push(normalize(slots), lo, hi, MoveKind::Insert);
        Ok(())
    }

    /// Erase a block of `2m` consecutive letter slots holding `v v⁻¹`.
    pub fn delete(&mut self, lo: usize, hi: usize) -> Result<()> {
        if lo == hi {
            return Ok(());
        }
        let w = &self.slots[lo..hi];
        let len = w.len();
        for k in 0..len / 2 {
            let ok = match (&w[k], &w[len - 1 - k]) {
                (None, None) => true,
                (Some(x), Some(y)) => self.group.inverse(&x.elem)? == y.elem,
                _ => false,
            };
            if !ok || len % 2 == 1 && w[len / 2].is_some() {
                return Err(Error::Internal(format!("slots {lo}..{hi} are not a backtrack")));
            }
        }
        let mut slots = self.slots.clone();
        for s in &mut slots[lo..hi] {
            *s = None;
        }
        self.push(slots, lo, hi, MoveKind::Delete);
        Ok(())
    }

    fn nearest_left(&self, slot: usize) -> Option<usize> {
        (0..slot).rev().find(|&i| self.slots[i].is_some())
    }

    fn nearest_right(&self, slot: usize) -> Option<usize> {
        (slot + 1..self.slots.len()).find(|&i| self.slots[i].is_some())
    }

    /// Replace the nearest letters on both sides of the U-letter at `slot`
    /// and the letter itself by their product, `times` times (innermost
    /// first). Every intermediate must stay in the ball of `ctx`.
    pub fn absorb(&mut self, ctx: &TameCtx, slot: usize, times: usize) -> Result<()> {
        for _ in 0..times {
            let l = self.nearest_left(slot).ok_or_else(|| Error::Internal("nothing to absorb on the left".into()))?;
            let r = self.nearest_right(slot).ok_or_else(|| Error::Internal("nothing to absorb on the right".into()))?;
            let p = self.product(&self.slots[l..=r])?;
            if !p.in_u() || !ctx.in_ball(&p.u) {
                return Err(Error::Internal(format!("absorbing around slot {slot} leaves the ball")));
            }
            let mut new = vec![None; r - l + 1];
            new[slot - l] = Some(Letter::new(p, ctx.factor));
            self.local(l, r + 1, new)?;
        }
        Ok(())
    }

    /// `s → b · adjoint(a)s · a`, `times` times, using the idles around `slot`
    /// from the outside in.
    pub fn split(&mut self, ctx: &TameCtx, slot: usize, times: usize) -> Result<()> {
        for i in 0..times {
            let d = times - i;
            if slot < d || slot + d >= self.slots.len() {
                return Err(room_error(self.slots.len() + 2 * d, self.slots.len()));
            }
            let (lo, hi) = (slot - d, slot + d + 1);
            if self.slots[lo..slot].iter().chain(&self.slots[slot + 1..hi]).any(|s| s.is_some()) {
                return Err(Error::Internal(format!("split around slot {slot} needs {d} idles per side")));
            }
            let s = self.letter_at(slot).clone();
            let inner = self.group.adjoint(&ctx.cd.a, &s.elem.u)?;
            let mut new = vec![None; hi - lo];
            new[0] = Some(ctx.b_letter(self.group));
            new[d] = Some(Letter::new(self.group.from_u(inner), s.factor));
            new[2 * d] = Some(ctx.a_letter(self.group));
            self.local(lo, hi, new)?;
        }
        Ok(())
    }

    /// Rewrite letters `j0..j1` (letter indices) as `new`, keeping the
    /// letter slots in order and idling the rest.
    pub fn rewrite(&mut self, j0: usize, j1: usize, new: &[Letter]) -> Result<()> {
        if j0 == j1 {
            if new.is_empty() {
                return Ok(());
            }
            return Err(Error::Internal("rewrite of an empty range".into()));
        }
        let pos = self.positions();
        let (lo, hi) = (pos[j0], pos[j1 - 1] + 1);
        if new.len() > j1 - j0 {
            return Err(Error::Internal("rewrite needs more letter slots than available".into()));
        }
        let mut out = vec![None; hi - lo];
        for (l, p) in new.iter().zip(&pos[j0..j1]) {
            out[p - lo] = Some(l.clone());
        }
        self.local(lo, hi, out)
    }

    pub fn slot_of(&self, j: usize) -> usize {
        self.positions()[j]
    }

    pub fn finish(self) -> Result<ChainMap> {
        let costs: Vec<f64> = self.moves.iter().map(|m| m.vertical_cost(self.group)).collect();
        let total: f64 = costs.iter().sum();
        let count = self.moves.len();
        let map = if count == 0 || total <= 0.0 {
            SquareMap::Path(Path1D::Slots(self.bottom.clone()))
        } else {
            let parts: Vec<(f64, SquareMap)> = self
                .moves
                .into_iter()
                .zip(&costs)
                .filter(|(_, c)| **c > 0.0)
                .map(|(m, c)| (*c, SquareMap::Move(Box::new(m))))
                .collect();
            vconcat(self.group, parts)?
        };
        Ok(ChainMap {
            map,
            cost: total,
            top: self.slots,
            top_path: self.path,
            moves: count,
        })
    }
}

struct Shape {
    /// A-box letters
    m: usize,
    /// depth of the U-part, if nonzero
    k: Option<usize>,
}

impl Shape {
    fn len(&self) -> usize {
        self.m + self.k.map_or(0, |k| 2 * k + 1)
    }
}

fn shape(group: &SolvableGroup, ctx: &TameCtx, g: &GroupElement) -> Result<Shape> {
    Ok(Shape {
        m: ctx.a_word(group, &g.a).len(),
        k: if g.in_a() { None } else { Some(ctx.depth(group, &g.u)?) },
    })
}

/// Smallest `K ≥ floor` such that conjugating `adjoint(a)^K u` through the
/// A-letters `steps` one at a time stays in the ball.
fn conjugation_depth(group: &SolvableGroup, ctx: &TameCtx, u: &[Q], steps: &[Letter], floor: usize) -> Result<usize> {
    let mut x = u.to_vec();
    for _ in 0..floor {
        x = group.adjoint(&ctx.cd.a, &x)?;
    }
    for k in floor..floor + 4096 {
        let mut y = x.clone();
        let mut ok = ctx.in_ball(&y);
        for st in steps {
            if !ok {
                break;
            }
            y = group.adjoint(&vec_neg(&st.elem.a), &y)?;
            ok = ctx.in_ball(&y);
        }
        if ok {
            return Ok(k);
        }
        x = group.adjoint(&ctx.cd.a, &x)?;
    }
    Err(Error::Internal("no conjugation depth found".into()))
}

/// Extend the chain, whose word is `ω(g1) ω(g2)` for `ctx`, by moves ending
/// in `ω(g1 g2)` packed to the left. Returns `g1 g2`.
pub fn merge(ch: &mut Chain, ctx: &TameCtx, g1: &GroupElement, g2: &GroupElement) -> Result<GroupElement> {
    let group = ch.group;
    let expected = ctx.omega(group, g1)?.concat(&ctx.omega(group, g2)?);
    if ch.word() != expected {
        return Err(Error::Internal("merge input is not ω(g1) ω(g2)".into()));
    }
    let s1 = shape(group, ctx, g1)?;
    let s2 = shape(group, ctx, g2)?;
    let mut u1 = g1.u.clone();

    // move the A-part of g2 to the left of the U-part of g1
    if let (Some(k1), true) = (s1.k, s2.m > 0) {
        let a2 = ctx.a_word(group, &g2.a).letters;
        let u1c = group.adjoint(&vec_neg(&g2.a), &u1)?;
        let k1c = ctx.depth(group, &u1c)?;
        let big_k = conjugation_depth(group, ctx, &u1, &a2, k1.max(k1c))?;
        let m2 = a2.len();
        let sj = s1.m + k1;
        let grow = big_k - k1;
        ch.reserve(&[(sj, grow), (sj + 1, grow)])?;
        let s_slot = ch.slot_of(sj);
        ch.split(ctx, s_slot, grow)?;
        // A1 b^K s a^K A2 U2: commute a^K past A2
        let a_start = s1.m + big_k + 1;
        let mut swapped = a2.clone();
        swapped.extend(std::iter::repeat_n(ctx.a_letter(group), big_k));
        ch.rewrite(a_start, a_start + big_k + m2, &swapped)?;
        // A1 b^K s A2 a^K U2: insert A2 A2⁻¹ before s, conjugate s through A2
        let sj = s1.m + big_k;
        ch.reserve(&[(sj, 2 * m2)])?;
        let s_slot = ch.slot_of(sj);
        ch.insert(s_slot - 2 * m2, &a2)?;
        ch.absorb(ctx, s_slot, m2)?;
        // A1 b^K A2 s' a^K U2: commute A2 past b^K
        let mut swapped = a2.clone();
        swapped.extend(std::iter::repeat_n(ctx.b_letter(group), big_k));
        ch.rewrite(s1.m, s1.m + big_k + m2, &swapped)?;
        ch.absorb(ctx, s_slot, big_k - k1c)?;
        u1 = u1c;
    }
    // A1 A2 → box word of the sum
    let a12 = crate::linalg::vec_add(&g1.a, &g2.a);
    if s1.m > 0 && s2.m > 0 {
        let w = ctx.a_word(group, &a12);
        ch.rewrite(0, s1.m + s2.m, &w.letters)?;
    }
    let m12 = ctx.a_word(group, &a12).len();
    let u2 = g2.u.clone();
    if !vec_is_zero(&u1) && !vec_is_zero(&u2) {
        let k1 = ctx.depth(group, &u1)?;
        let k2 = ctx.depth(group, &u2)?;
        let u3 = group.bch(&u1, &u2);
        let k3 = if vec_is_zero(&u3) { 0 } else { ctx.depth(group, &u3)? };
        let big_k = k1.max(k2).max(k3);
        let j1 = m12 + k1;
        let j2 = m12 + 2 * k1 + 1 + k2;
        let (d1, d2) = (big_k - k1, big_k - k2);
        ch.reserve(&[(j1, d1), (j1 + 1, d1), (j2, d2), (j2 + 1, d2)])?;
        let slot1 = ch.slot_of(j1);
        ch.split(ctx, slot1, big_k - k1)?;
        let j2 = m12 + 2 * big_k + 1 + k2;
        let slot2 = ch.slot_of(j2);
        ch.split(ctx, slot2, big_k - k2)?;
        // b^K s1 a^K b^K s2 a^K: cancel the middle
        if big_k > 0 {
            let j = m12 + big_k + 1;
            ch.close_up(j, j + 2 * big_k - 1)?;
            let lo = ch.slot_of(j);
            ch.delete(lo, lo + 2 * big_k)?;
        }
        let slot1 = ch.slot_of(m12 + big_k);
        let slot2 = ch.slot_of(m12 + big_k + 1);
        let s3 = group.mul(&ch.letter_at(slot1).elem, &ch.letter_at(slot2).elem)?;
        if !ctx.in_ball(&s3.u) {
            return Err(Error::Internal("product of the contracted parts leaves the ball".into()));
        }
        let mut new = vec![None; slot2 - slot1 + 1];
        new[0] = Some(Letter::new(s3, ctx.factor));
        ch.local(slot1, slot2 + 1, new)?;
        if vec_is_zero(&u3) {
            if big_k > 0 {
                ch.close_up(m12, m12 + 2 * big_k - 1)?;
                let lo = ch.slot_of(m12);
                ch.delete(lo, lo + 2 * big_k)?;
            }
        } else {
            ch.absorb(ctx, slot1, big_k - k3)?;
        }
    }
    let g12 = group.mul(g1, g2)?;
    let target = ctx.omega(group, &g12)?;
    let mut gaps = vec![0; target.len() + 1];
    if ch.word() != target {
        return Err(Error::Internal("merge did not reach ω(g1 g2)".into()));
    }
    gaps[target.len()] = ch.slot_count() - target.len();
    ch.relayout(&gaps)?;
    Ok(g12)
}

/// Slots needed to lay out `ω(g)` for every input, with no room to spare.
pub fn omega_len(group: &SolvableGroup, ctx: &TameCtx, g: &GroupElement) -> Result<usize> {
    Ok(shape(group, ctx, g)?.len())
}
