//! Words over ball-shaped generating sets, normal forms and free reduction.
//!
//! Generators come in classes: the A-box `‖a‖∞ ≤ a_radius`, the U-ball
//! `‖log s‖∞ ≤ u_radius`, and for each conic subset `C_i` the letters of
//! `G_{C_i} = U_{C_i} ⋊ A` (a pure A-letter or a U-letter with logarithm in
//! `⊕_{α∈C_i} 𝔲_α`). Every class is symmetric and contains the identity.

use crate::algebra::group::{GroupElement, SolvableGroup};
use crate::error::{Error, Result};
use crate::linalg::{in_span, vec_add, vec_is_zero, vec_neg, vec_scale, vec_zero, QMatrix, QVec};
use crate::rational::{fmt_rational, lcm_denominators, max_abs, one, pow2_exact, q, zero, Q};
use crate::weights::{enumerate_conic_subsets, maximal_conic_subsets, tame_witness, ConicSubset, TameOutcome, DEFAULT_CONIC_GUARD};
use num_bigint::BigInt;
use num_traits::Signed;
use serde::ser::SerializeStruct;
use serde::Serialize;

pub fn inf_norm(v: &[Q]) -> Q {
    max_abs(v)
}

fn matrix_inf_norm(m: &QMatrix) -> Q {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).fold(zero(), |a, b| a + b))
        .max()
        .unwrap_or_else(zero)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    A,
    U,
    /// Letter of `G_{C_i}` for the i-th conic subset of the descriptor.
    Conic(usize),
}

impl std::fmt::Display for Factor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Factor::A => f.write_str("A"),
            Factor::U => f.write_str("U"),
            Factor::Conic(i) => write!(f, "G_C{}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub elem: GroupElement,
    pub factor: Factor,
}

impl Letter {
    pub fn new(elem: GroupElement, factor: Factor) -> Self {
        Letter { elem, factor }
    }
}

impl Serialize for Letter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Letter", 3)?;
        st.serialize_field("factor_tag", &self.factor.to_string())?;
        st.serialize_field("a_part", &self.elem.a.iter().map(fmt_rational).collect::<Vec<_>>())?;
        st.serialize_field("u_part", &self.elem.u.iter().map(fmt_rational).collect::<Vec<_>>())?;
        st.end()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn empty() -> Self {
        Word::default()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut l = self.letters.clone();
        l.extend(other.letters.iter().cloned());
        Word { letters: l }
    }

    pub fn inverse(&self, g: &SolvableGroup) -> Result<Word> {
        self.letters
            .iter()
            .rev()
            .map(|l| Ok(Letter::new(g.inverse(&l.elem)?, l.factor)))
            .collect::<Result<Vec<_>>>()
            .map(Word::new)
    }
}

/// Ball descriptors with exact membership.
#[derive(Clone, Debug)]
pub struct GenSetDescriptor {
    pub u_radius: Q,
    pub a_radius: Q,
    pub conic: Vec<ConicSubset>,
    /// Basis of `⊕_{α∈C_i} 𝔲_α` for each conic subset.
    pub conic_spans: Vec<Vec<QVec>>,
}

impl GenSetDescriptor {
    pub fn new(group: &SolvableGroup, u_radius: Q, a_radius: Q, conic: Vec<ConicSubset>) -> Result<Self> {
        if !u_radius.is_positive() || !a_radius.is_positive() {
            return Err(Error::Precondition("generating set radii must be positive".into()));
        }
        let dec = group.decomposition();
        let mut spans = Vec::new();
        for c in &conic {
            let mut span = Vec::new();
            for m in &c.members {
                let i = dec.index_of(m).ok_or_else(|| {
                    Error::Precondition("conic subset member is not a weight".into())
                })?;
                span.extend(dec.spaces[i].iter().cloned());
            }
            spans.push(span);
        }
        Ok(GenSetDescriptor {
            u_radius,
            a_radius,
            conic,
            conic_spans: spans,
        })
    }

    pub fn check_letter(&self, index: usize, l: &Letter) -> Result<()> {
        let fail = |reason: String| Err(Error::Membership { index, reason });
        let in_a_box = |e: &GroupElement| e.in_u() || inf_norm(&e.a) <= self.a_radius;
        let in_u_ball = |e: &GroupElement| inf_norm(&e.u) <= self.u_radius;
        let e = &l.elem;
        match l.factor {
            Factor::A => {
                if !e.in_a() {
                    return fail("A-letter has a nonzero U-part".into());
                }
                if !in_a_box(e) {
                    return fail(format!("‖a‖∞ exceeds {}", fmt_rational(&self.a_radius)));
                }
            }
            Factor::U => {
                if !e.in_u() {
                    return fail("U-letter has a nonzero A-part".into());
                }
                if !in_u_ball(e) {
                    return fail(format!("‖log s‖∞ exceeds {}", fmt_rational(&self.u_radius)));
                }
            }
            Factor::Conic(i) => {
                let Some(span) = self.conic_spans.get(i) else {
                    return fail(format!("no conic subset with index {}", i + 1));
                };
                match (e.in_a(), e.in_u()) {
                    (true, _) => {
                        if !in_a_box(e) {
                            return fail(format!("‖a‖∞ exceeds {}", fmt_rational(&self.a_radius)));
                        }
                    }
                    (false, true) => {
                        if !in_u_ball(e) {
                            return fail(format!("‖log s‖∞ exceeds {}", fmt_rational(&self.u_radius)));
                        }
                        if !in_span(span, &e.u) {
                            return fail(format!("U-part is not in the subalgebra of conic subset {}", i + 1));
                        }
                    }
                    (false, false) => {
                        return fail("letter mixes A and U parts".into());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        for (i, l) in w.letters.iter().enumerate() {
            self.check_letter(i, l)?;
        }
        Ok(())
    }
}

/// Product of the letters, after checking membership.
pub fn eval_word(group: &SolvableGroup, desc: &GenSetDescriptor, w: &Word) -> Result<GroupElement> {
    desc.check_word(w)?;
    eval_unchecked(group, w)
}

pub fn eval_unchecked(group: &SolvableGroup, w: &Word) -> Result<GroupElement> {
    w.letters
        .iter()
        .try_fold(group.identity(), |acc, l| group.mul(&acc, &l.elem))
}

/// Upper bound `B(R)` on `‖log(exp x exp y)‖∞` for `‖x‖∞, ‖y‖∞ ≤ R`.
pub fn bch_norm_bound(group: &SolvableGroup, r: &Q) -> Q {
    let cb = bracket_bound(group);
    let mut total = zero();
    for t in group.bch_table().terms() {
        let len = t.word.len() as i32;
        let term = t.coeff.abs() * pow_q(&cb, len - 1) * pow_q(r, len);
        total += term;
    }
    total
}

/// `max_k Σ_{i,j} |c_ij^k|`, so `‖[x,y]‖∞ ≤ Cb ‖x‖∞ ‖y‖∞`.
pub fn bracket_bound(group: &SolvableGroup) -> Q {
    let s = group.spec();
    let n = s.dim();
    (0..n)
        .map(|k| {
            let mut acc = zero();
            for i in 0..n {
                for j in 0..n {
                    acc += s.structure_constant(i, j, k).abs();
                }
            }
            acc
        })
        .max()
        .unwrap_or_else(zero)
}

fn pow_q(x: &Q, e: i32) -> Q {
    let mut out = one();
    for _ in 0..e {
        out *= x;
    }
    out
}

/// Certificate that `adjoint(a)` maps the product of two `R`-balls (within
/// the chosen weight spaces) into the `R`-ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContractionData {
    #[serde(serialize_with = "crate::rational::ser::vec")]
    pub a: QVec,
    pub multiplier: u64,
    #[serde(serialize_with = "crate::rational::ser::one")]
    pub u_radius: Q,
    /// Bound on `‖adjoint(a, x)‖∞ / ‖x‖∞` over the chosen weight spaces.
    #[serde(serialize_with = "crate::rational::ser::one")]
    pub op_norm_bound: Q,
    #[serde(serialize_with = "crate::rational::ser::one")]
    pub bch_bound: Q,
    #[serde(serialize_with = "crate::rational::ser::vecs")]
    pub weights: Vec<QVec>,
}

/// `‖E(a)‖∞ · Σ_{α∈weights} 2^{α(a)} ‖Π_α‖∞`, exact when every `α(a)` is integral.
pub fn adjoint_norm_bound(group: &SolvableGroup, a: &[Q], weights: &[QVec]) -> Option<Q> {
    let dec = group.decomposition();
    let e = matrix_inf_norm(&group.unipotent_factor(a));
    let mut sum = zero();
    for w in weights {
        let i = dec.index_of(w)?;
        let f = pow2_exact(&crate::linalg::dot(w, a))?;
        sum += f * matrix_inf_norm(&group.projectors()[i]);
    }
    Some(e * sum)
}

impl ContractionData {
    pub fn verify(&self, group: &SolvableGroup) -> std::result::Result<(), String> {
        let dec = group.decomposition();
        for w in &self.weights {
            if dec.index_of(w).is_none() {
                return Err("weight not present in the algebra".into());
            }
            if !crate::linalg::dot(w, &self.a).is_negative() {
                return Err("a does not contract every chosen weight".into());
            }
        }
        let n = adjoint_norm_bound(group, &self.a, &self.weights)
            .ok_or("non-integral weight value on a")?;
        let b = bch_norm_bound(group, &self.u_radius);
        if n != self.op_norm_bound || b != self.bch_bound {
            return Err("recorded bounds do not reproduce".into());
        }
        if &n * &b > self.u_radius {
            return Err("norm bound times BCH bound exceeds the radius".into());
        }
        Ok(())
    }

    pub fn b(&self) -> QVec {
        vec_neg(&self.a)
    }
}

pub const DEFAULT_CONTRACTION_GUARD: u64 = 64;

/// Search `a = t·a0` (t = 1, 2, ...) and a dyadic radius `R ≤ 8` with
/// `‖adjoint(a)‖ · B(R) ≤ R`.
pub fn contraction_data(
    group: &SolvableGroup,
    weights: &[QVec],
    a0: &[Q],
    guard: u64,
) -> Result<ContractionData> {
    if weights.is_empty() {
        return Err(Error::Precondition("no weights to contract".into()));
    }
    for w in weights {
        if !crate::linalg::dot(w, a0).is_negative() {
            return Err(Error::Precondition(
                "the given element does not contract every weight; the group or subgroup is not tame along it".into(),
            ));
        }
    }
    for t in 1..=guard {
        let a = vec_scale(a0, &q(t as i64));
        let Some(n) = adjoint_norm_bound(group, &a, weights) else {
            continue;
        };
        if &n * q(2) > one() {
            continue;
        }
        for j in (-30i32..=3).rev() {
            let r = if j >= 0 {
                q(1 << j)
            } else {
                Q::new(1.into(), BigInt::from(1) << (-j) as usize)
            };
            let b = bch_norm_bound(group, &r);
            if &n * &b <= r {
                return Ok(ContractionData {
                    a,
                    multiplier: t,
                    u_radius: r,
                    op_norm_bound: n,
                    bch_bound: b,
                    weights: weights.to_vec(),
                });
            }
        }
    }
    Err(Error::Guard {
        what: "contraction multiplier".into(),
        value: guard as usize + 1,
        limit: guard as usize,
    })
}

/// Same `a`, smaller radius; valid because `B(R)/R` is nondecreasing.
fn shrink(group: &SolvableGroup, cd: &ContractionData, r: &Q) -> ContractionData {
    let mut out = cd.clone();
    out.u_radius = r.clone();
    out.bch_bound = bch_norm_bound(group, r);
    out
}

/// `u = b^k · s · b^{-k}` with `b = a⁻¹`, `s = a^k u a^{-k}` in the ball and
/// `k` minimal. The A-letters carry `factor`, as does `s`.
pub fn tame_normal_form(
    group: &SolvableGroup,
    cd: &ContractionData,
    u: &GroupElement,
    factor: Factor,
) -> Result<Word> {
    if !u.in_u() {
        return Err(Error::Precondition("tame normal form needs an element of U".into()));
    }
    let mut x = u.u.clone();
    let mut k = 0usize;
    while inf_norm(&x) > cd.u_radius {
        x = group.adjoint(&cd.a, &x)?;
        k += 1;
        if k > 1 << 20 {
            return Err(Error::Internal("contraction did not terminate".into()));
        }
    }
    let a_factor = if factor == Factor::U { Factor::A } else { factor };
    let mut letters = Vec::with_capacity(2 * k + 1);
    letters.extend(std::iter::repeat_n(Letter::new(group.from_a(cd.b()), a_factor), k));
    letters.push(Letter::new(group.from_u(x), factor));
    letters.extend(std::iter::repeat_n(Letter::new(group.from_a(cd.a.clone()), a_factor), k));
    Ok(Word::new(letters))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MalcevFactor {
    /// Index into the descriptor's conic list.
    pub subset: usize,
    pub log: QVec,
}

/// Factor `u` as `x_1 ⋯ x_K` with `log x_i ∈ 𝔲_{C_{order[i]}}`.
///
/// Within one pass over the order, each factor takes the components of the
/// current remainder in the weights of its subset not already claimed in this
/// pass; the remainder then lies one step lower in the lower central series.
/// `class` passes exhaust it.
pub fn malcev_decompose(
    group: &SolvableGroup,
    conic: &[ConicSubset],
    order: &[usize],
    u: &GroupElement,
) -> Result<Vec<MalcevFactor>> {
    if !u.in_u() {
        return Err(Error::Precondition("decomposition needs an element of U".into()));
    }
    let dec = group.decomposition();
    let uncovered: Vec<String> = dec
        .weights
        .iter()
        .filter(|w| !order.iter().any(|&i| conic.get(i).is_some_and(|c| c.contains(w))))
        .map(|w| format!("({})", w.iter().map(fmt_rational).collect::<Vec<_>>().join(",")))
        .collect();
    if !uncovered.is_empty() {
        return Err(Error::Precondition(format!(
            "conic order does not cover weights {}",
            uncovered.join(" ")
        )));
    }
    let n = group.dim();
    let mut rest = u.u.clone();
    let mut out = Vec::new();
    let mut pos = 0;
    for _pass in 0..group.class() {
        if vec_is_zero(&rest) {
            break;
        }
        let mut claimed: Vec<usize> = Vec::new();
        // one pass = one sweep through the order until all weights are claimed
        let start = pos;
        loop {
            let ci = order[pos % order.len()];
            pos += 1;
            let mut x = vec_zero(n);
            for m in &conic[ci].members {
                let wi = dec.index_of(m).expect("covered weights exist");
                if claimed.contains(&wi) {
                    continue;
                }
                claimed.push(wi);
                x = vec_add(&x, &group.projectors()[wi].mul_vec(&rest));
            }
            if !vec_is_zero(&x) {
                rest = group.bch(&vec_neg(&x), &rest);
                out.push(MalcevFactor { subset: ci, log: x });
            }
            if claimed.len() == dec.weights.len() || pos - start >= order.len() {
                break;
            }
        }
    }
    if !vec_is_zero(&rest) {
        return Err(Error::Internal("remainder did not vanish after all passes".into()));
    }
    let prod = out.iter().try_fold(group.identity(), |acc, f| group.mul(&acc, &group.from_u(f.log.clone())))?;
    if prod != *u {
        return Err(Error::Internal("factors do not multiply back to the input".into()));
    }
    Ok(out)
}

/// Split `a` into `k = ⌈‖a‖∞ / r⌉` steps in the box of radius `r`. With
/// integral coordinates and radius the steps are integral (sizes differ by
/// at most one, larger first); otherwise they are equal.
pub fn box_steps(a: &[Q], r: &Q) -> Vec<QVec> {
    if vec_is_zero(a) {
        return Vec::new();
    }
    let k = (inf_norm(a) / r).ceil().to_integer();
    let count: usize = (&k).try_into().expect("A-part too long for a word");
    let kq = Q::from_integer(k.clone());
    let integral = a.iter().all(crate::rational::is_integer) && crate::rational::is_integer(r);
    if !integral {
        return vec![vec_scale(a, &(one() / kq)); count];
    }
    let mut steps = vec![Vec::with_capacity(a.len()); count];
    for x in a {
        let n = x.to_integer();
        let (quot, rem) = num_integer::Integer::div_mod_floor(&n, &k);
        let rem: usize = rem.try_into().expect("remainder below the count");
        for (i, st) in steps.iter_mut().enumerate() {
            let extra = if i < rem { 1 } else { 0 };
            st.push(Q::from_integer(&quot + extra));
        }
    }
    steps
}

/// Conic subsets, contraction data and generating set for `ω`.
#[derive(Clone, Debug)]
pub struct NormalForms {
    pub descriptor: GenSetDescriptor,
    pub order: Vec<usize>,
    pub contraction: Vec<ContractionData>,
}

impl NormalForms {
    /// Maximal conic subsets sorted by direction, one contraction element per
    /// subset, common radius the smallest certified one.
    pub fn new(group: &SolvableGroup) -> Result<Self> {
        let dec = group.decomposition();
        let all = enumerate_conic_subsets(&dec.weights, guard_from_env("conic_weights", DEFAULT_CONIC_GUARD))?;
        let maximal = maximal_conic_subsets(&all);
        if maximal.is_empty() {
            return Err(Error::Precondition("no conic subsets: every weight is zero".into()));
        }
        Self::with_subsets(group, maximal)
    }

    pub fn with_subsets(group: &SolvableGroup, conic: Vec<ConicSubset>) -> Result<Self> {
        let d = group.rank();
        let guard = guard_from_env("contraction", DEFAULT_CONTRACTION_GUARD as usize) as u64;
        let mut cds = Vec::new();
        for c in &conic {
            let a0 = match tame_witness(&c.members, d) {
                TameOutcome::Witness(a) => a,
                TameOutcome::Farkas(_) => {
                    return Err(Error::Internal("conic subset is not tame".into()));
                }
            };
            // make every weight value integral so the action stays exact
            let scale = dec_scale(group, &a0, &c.members);
            cds.push(contraction_data(group, &c.members, &vec_scale(&a0, &scale), guard)?);
        }
        let r = cds.iter().map(|c| c.u_radius.clone()).min().unwrap();
        let cds: Vec<ContractionData> = cds.iter().map(|c| shrink(group, c, &r)).collect();
        let a_radius = cds.iter().map(|c| inf_norm(&c.a)).max().unwrap();
        let order: Vec<usize> = (0..conic.len()).collect();
        Ok(NormalForms {
            descriptor: GenSetDescriptor::new(group, r, a_radius, conic)?,
            order,
            contraction: cds,
        })
    }

    /// Box word for an A-element, see [`box_steps`].
    pub fn a_word(&self, group: &SolvableGroup, a: &[Q]) -> Word {
        let steps = box_steps(a, &self.descriptor.a_radius);
        Word::new(steps.into_iter().map(|x| Letter::new(group.from_a(x), Factor::A)).collect())
    }

    /// `ω(g) = ω(a) · ω_{C_1}(x_1) ⋯ ω_{C_K}(x_K)` for `g = a·u`, `u = x_1 ⋯ x_K`.
    pub fn omega(&self, group: &SolvableGroup, g: &GroupElement) -> Result<Word> {
        let mut w = self.a_word(group, &g.a);
        if g.in_a() {
            return Ok(w);
        }
        let u = group.from_u(g.u.clone());
        for f in malcev_decompose(group, &self.descriptor.conic, &self.order, &u)? {
            let part = tame_normal_form(
                group,
                &self.contraction[f.subset],
                &group.from_u(f.log),
                Factor::Conic(f.subset),
            )?;
            w = w.concat(&part);
        }
        Ok(w)
    }
}

fn dec_scale(_group: &SolvableGroup, a0: &[Q], weights: &[QVec]) -> Q {
    let vals: Vec<Q> = weights.iter().map(|w| crate::linalg::dot(w, a0)).collect();
    Q::from_integer(lcm_denominators(vals.iter()))
}

/// `SOLVFILL_GUARDS="name=value,..."` overrides named size guards.
pub fn guard_from_env(name: &str, default: usize) -> usize {
    std::env::var("SOLVFILL_GUARDS")
        .ok()
        .and_then(|s| {
            s.split(',').find_map(|kv| {
                let (k, v) = kv.split_once('=')?;
                (k.trim() == name).then(|| v.trim().parse().ok()).flatten()
            })
        })
        .unwrap_or(default)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionStep {
    pub prefix: Word,
    pub block: Word,
    pub suffix: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub steps: Vec<ReductionStep>,
    pub residue: Word,
}

impl Reduction {
    pub fn freely_trivial(&self) -> bool {
        self.residue.is_empty()
    }
}

/// Maximal runs of equal factor tag, as `(start, end)` half-open ranges.
pub fn blocks(w: &Word) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let f = w.letters[i].factor;
        let mut j = i + 1;
        while j < w.len() && w.letters[j].factor == f {
            j += 1;
        }
        out.push((i, j));
        i = j;
    }
    out
}

/// Repeatedly delete the leftmost maximal single-factor block that is trivial
/// in its factor group. Ends with the empty word iff `w` is trivial in the
/// free product of the factors.
pub fn free_reduce(group: &SolvableGroup, w: &Word) -> Result<Reduction> {
    for (i, l) in w.letters.iter().enumerate() {
        if !matches!(l.factor, Factor::Conic(_)) {
            return Err(Error::Membership {
                index: i,
                reason: "free reduction needs letters tagged with a conic factor".into(),
            });
        }
    }
    let mut cur = w.clone();
    let mut steps = Vec::new();
    'outer: loop {
        for (s, e) in blocks(&cur) {
            let block = Word::new(cur.letters[s..e].to_vec());
            if eval_unchecked(group, &block)?.is_identity() {
                let prefix = Word::new(cur.letters[..s].to_vec());
                let suffix = Word::new(cur.letters[e..].to_vec());
                cur = prefix.concat(&suffix);
                steps.push(ReductionStep { prefix, block, suffix });
                continue 'outer;
            }
        }
        break;
    }
    Ok(Reduction { steps, residue: cur })
}

/// Check that each step deletes its block and the next step starts from the
/// result: `prefix_j · suffix_j = prefix_{j+1} · block_{j+1} · suffix_{j+1}`.
pub fn verify_reduction(group: &SolvableGroup, w: &Word, r: &Reduction) -> std::result::Result<(), String> {
    let mut cur = w.clone();
    for (j, st) in r.steps.iter().enumerate() {
        let whole = st.prefix.concat(&st.block).concat(&st.suffix);
        if whole != cur {
            return Err(format!("step {j} does not start from the previous result"));
        }
        let f = st.block.letters.first().map(|l| l.factor);
        if f.is_none() || st.block.letters.iter().any(|l| Some(l.factor) != f) {
            return Err(format!("step {j} block is empty or mixes factors"));
        }
        if !eval_unchecked(group, &st.block).map_err(|e| e.to_string())?.is_identity() {
            return Err(format!("step {j} block is not trivial"));
        }
        cur = st.prefix.concat(&st.suffix);
    }
    if cur != r.residue {
        return Err("residue differs from the last step".into());
    }
    if blocks(&cur).iter().any(|&(s, e)| {
        eval_unchecked(group, &Word::new(cur.letters[s..e].to_vec()))
            .map(|g| g.is_identity())
            .unwrap_or(true)
    }) {
        return Err("residue still has a trivial block".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::load_preset;
    use crate::rational::qr;

    fn group(name: &str) -> SolvableGroup {
        SolvableGroup::new(load_preset(name).unwrap()).unwrap()
    }

    #[test]
    fn heisenberg_contraction() {
        let g = group("heisenberg-tame");
        let nf = NormalForms::new(&g).unwrap();
        assert_eq!(nf.contraction.len(), 1);
        let cd = &nf.contraction[0];
        cd.verify(&g).unwrap();
        assert!(cd.a[0].is_negative());
    }

    #[test]
    fn non_tame_precondition() {
        let g = group("sol");
        let all = g.decomposition().weights.clone();
        assert!(matches!(
            contraction_data(&g, &all, &[q(-1)], 8),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn tame_normal_form_round_trip() {
        let g = group("heisenberg-tame");
        let nf = NormalForms::new(&g).unwrap();
        for m in [0, 3, 8] {
            let u = g.from_u(vec![q(1 << m), qr(-3, 2), q(5)]);
            let w = nf.omega(&g, &u).unwrap();
            assert_eq!(eval_word(&g, &nf.descriptor, &w).unwrap(), u);
        }
        assert!(nf.omega(&g, &g.identity()).unwrap().is_empty());
    }

    #[test]
    fn malcev_abelian_components() {
        let g = group("abelian3-rank2");
        let nf = NormalForms::new(&g).unwrap();
        let u = g.from_u(vec![q(3), q(-2), q(7)]);
        let f = malcev_decompose(&g, &nf.descriptor.conic, &nf.order, &u).unwrap();
        let total = f.iter().fold(vec_zero(3), |acc, x| vec_add(&acc, &x.log));
        assert_eq!(total, u.u);
        let w = nf.omega(&g, &u).unwrap();
        assert_eq!(eval_word(&g, &nf.descriptor, &w).unwrap(), u);
    }

    #[test]
    fn coverage_error_lists_zero_weight() {
        let g = group("heisenberg-mixed");
        let nf = NormalForms::new(&g).unwrap();
        let err = malcev_decompose(&g, &nf.descriptor.conic, &nf.order, &g.from_u(vec![q(0), q(0), q(1)]));
        match err {
            Err(Error::Precondition(m)) => assert!(m.contains("(0)")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_reduce_basic() {
        let g = group("abelian3-rank2");
        let nf = NormalForms::new(&g).unwrap();
        let x = Letter::new(g.from_u(vec![q(1), q(0), q(0)]), Factor::Conic(0));
        let xi = Letter::new(g.from_u(vec![q(-1), q(0), q(0)]), Factor::Conic(0));
        let r = free_reduce(&g, &Word::new(vec![x.clone(), xi.clone()])).unwrap();
        assert!(r.freely_trivial());
        assert_eq!(r.steps.len(), 1);
        // letters from two different factors never cancel
        let c1 = nf.descriptor.conic.iter().position(|c| c.contains(&[q(0), q(1)])).unwrap();
        let c0 = nf.descriptor.conic.iter().position(|c| c.contains(&[q(1), q(0)]) && !c.contains(&[q(0), q(1)])).unwrap();
        let x = Letter::new(g.from_u(vec![q(1), q(0), q(0)]), Factor::Conic(c0));
        let xi = Letter::new(g.from_u(vec![q(-1), q(0), q(0)]), Factor::Conic(c0));
        let y = Letter::new(g.from_u(vec![q(0), q(1), q(0)]), Factor::Conic(c1));
        let yi = Letter::new(g.from_u(vec![q(0), q(-1), q(0)]), Factor::Conic(c1));
        let w = Word::new(vec![x, y, xi, yi]);
        let r = free_reduce(&g, &w).unwrap();
        assert!(!r.freely_trivial());
        verify_reduction(&g, &w, &r).unwrap();
    }
}
