//! Span probes: fill each loop of a family with one pipeline and tabulate
//! `Lip(fill)` against `Lip(loop)` and against the word length.

use super::assemble::{backtrack_fill, cone_fill, free_fill, gromov_fill, tame_triangle_fill};
use super::chain::TameCtx;
use super::estimate::{lipschitz_refined, LipEstimate, DEFAULT_GRID, DEFAULT_MAX_GRID, DEFAULT_TOLERANCE};
use super::map::SquareMap;
use super::path::{word_path, Path1D};
use crate::algebra::{GroupElement, SolvableGroup};
use crate::error::{Error, Result};
use crate::rational::{q, zero};
use crate::words::{eval_unchecked, guard_from_env, Factor, Letter, NormalForms, Word};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Backtrack,
    Cone,
    Tame,
    Free,
    Gromov,
}

impl std::str::FromStr for Pipeline {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "backtrack" => Pipeline::Backtrack,
            "cone" => Pipeline::Cone,
            "tame" => Pipeline::Tame,
            "free" => Pipeline::Free,
            "gromov" => Pipeline::Gromov,
            _ => return Err(Error::Invalid(format!("unknown pipeline {s:?}"))),
        })
    }
}

impl std::fmt::Display for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pipeline::Backtrack => "backtrack",
            Pipeline::Cone => "cone",
            Pipeline::Tame => "tame",
            Pipeline::Free => "free",
            Pipeline::Gromov => "gromov",
        })
    }
}

/// A loop at the identity.
#[derive(Clone, Debug)]
pub enum Loop {
    Word(Word),
    /// Circle of the given radius in the `(i, j)` coordinate plane of 𝔲.
    Circle { radius: f64, plane: (usize, usize) },
    /// `ω(g₁) ω(g₂) ω(g₃)` with `g₁ g₂ g₃ = 1`.
    Triple([GroupElement; 3]),
}

pub struct FillOutcome {
    pub map: SquareMap,
    pub loop_lip: f64,
    pub letters: usize,
    pub pipeline: Pipeline,
    pub detail: Value,
}

/// Stage at which a pipeline gave up.
fn stage(name: &str, e: Error) -> Error {
    match e {
        Error::Precondition(m) => Error::Precondition(format!("{name}: {m}")),
        Error::Membership { index, reason } => Error::Precondition(format!("{name}: letter {index}: {reason}")),
        other => other,
    }
}

fn tame_ctx(group: &SolvableGroup) -> Result<(NormalForms, TameCtx)> {
    let nf = NormalForms::new(group).map_err(|e| stage("normal forms", e))?;
    let ctx = TameCtx::for_tame_group(&nf).map_err(|e| stage("tame witness", e))?;
    Ok((nf, ctx))
}

/// `Some(v)` when `w = v v⁻¹` letter by letter.
pub fn split_backtrack(group: &SolvableGroup, w: &Word) -> Option<Word> {
    let n = w.len();
    if n == 0 || n % 2 == 1 {
        return None;
    }
    let v = Word::new(w.letters[..n / 2].to_vec());
    let inv = v.inverse(group).ok()?;
    (inv.letters[..] == w.letters[n / 2..]).then_some(v)
}

/// Pick a pipeline: backtracking for `v v⁻¹`, the tame filler for triples,
/// cones for circles, the dyadic template in tame groups, free reduction
/// otherwise.
pub fn auto_pipeline(group: &SolvableGroup, lp: &Loop) -> Pipeline {
    match lp {
        Loop::Circle { .. } => Pipeline::Cone,
        Loop::Triple(_) => Pipeline::Tame,
        Loop::Word(w) if split_backtrack(group, w).is_some() => Pipeline::Backtrack,
        Loop::Word(_) => {
            if tame_ctx(group).is_ok() {
                Pipeline::Gromov
            } else {
                Pipeline::Free
            }
        }
    }
}

pub fn loop_word(group: &SolvableGroup, lp: &Loop) -> Result<Option<Word>> {
    Ok(match lp {
        Loop::Word(w) => Some(w.clone()),
        Loop::Triple(g) => {
            let (_, ctx) = tame_ctx(group)?;
            let mut w = Word::empty();
            for x in g {
                w = w.concat(&ctx.omega(group, x)?);
            }
            Some(w)
        }
        Loop::Circle { .. } => None,
    })
}

pub fn loop_path(group: &SolvableGroup, lp: &Loop) -> Result<Path1D> {
    let start = group.identity_f64();
    Ok(match lp {
        Loop::Circle { radius, plane } => Path1D::Circle {
            base: start,
            radius: *radius,
            plane: *plane,
        },
        _ => Path1D::Slots(Arc::new(word_path(group, start, &loop_word(group, lp)?.unwrap()))),
    })
}

pub const DEFAULT_CONE_GUARD: usize = 1 << 20;

/// Build a filling of `lp` with `pipeline`.
pub fn fill_loop(group: &SolvableGroup, lp: &Loop, pipeline: Pipeline) -> Result<FillOutcome> {
    let start = group.identity_f64();
    let path = loop_path(group, lp)?;
    let loop_lip = path.lipschitz(group);
    let word = loop_word(group, lp)?;
    let letters = word.as_ref().map_or(0, |w| w.len());
    if let Some(w) = &word {
        if !eval_unchecked(group, w)?.is_identity() {
            return Err(Error::Precondition("loop: the word does not evaluate to the identity".into()));
        }
    }
    let need_word = || {
        word.clone()
            .ok_or_else(|| Error::Precondition(format!("{pipeline}: needs a word, not a circle")))
    };
    let (map, detail) = match pipeline {
        Pipeline::Backtrack => {
            let w = need_word()?;
            let v = split_backtrack(group, &w)
                .ok_or_else(|| Error::Precondition("backtrack: the word is not of the form v v⁻¹".into()))?;
            (backtrack_fill(group, start, &v)?, json!({ "half_length": v.len() }))
        }
        Pipeline::Cone => {
            let guard = guard_from_env("cone_radius", DEFAULT_CONE_GUARD) as f64;
            let c = cone_fill(group, path, start, guard).map_err(|e| stage("cone", e))?;
            (c.map, json!({ "radius": c.radius, "kappa": c.kappa }))
        }
        Pipeline::Gromov => {
            let (_, ctx) = tame_ctx(group)?;
            let f = gromov_fill(group, &ctx, start, &need_word()?).map_err(|e| stage("gromov", e))?;
            (f.map, serde_json::to_value(&f.stats).unwrap())
        }
        Pipeline::Tame => {
            let Loop::Triple(g) = lp else {
                return Err(Error::Precondition("tame: needs a triple g1 g2 g3 = 1".into()));
            };
            let (_, ctx) = tame_ctx(group)?;
            let f = tame_triangle_fill(group, &ctx, start, [&g[0], &g[1], &g[2]]).map_err(|e| stage("tame", e))?;
            (f.map, serde_json::to_value(&f.stats).unwrap())
        }
        Pipeline::Free => {
            let nf = NormalForms::new(group).map_err(|e| stage("normal forms", e))?;
            let f = free_fill(group, &nf, start, &need_word()?).map_err(|e| stage("free", e))?;
            let blocks: Vec<Value> = f.blocks.iter().map(|(t, n)| json!([t.to_string(), n])).collect();
            (f.map, json!({ "bands": f.band_words.len(), "blocks": blocks }))
        }
    };
    Ok(FillOutcome {
        map,
        loop_lip,
        letters,
        pipeline,
        detail,
    })
}

/// Commutator `[xⁿ, yⁿ]` of two basis elements of 𝔲 in the contraction
/// ball, closed up by `ω` of the inverse commutator and padded with identity
/// letters to exactly `len` letters. `n` is the largest that fits.
pub fn relation_word(group: &SolvableGroup, ctx: &TameCtx, len: usize) -> Result<Word> {
    let n_u = group.dim();
    if n_u < 2 {
        return Err(Error::Precondition("relation family needs dim 𝔲 ≥ 2".into()));
    }
    let (i, j) = (0..n_u)
        .flat_map(|i| (i + 1..n_u).map(move |j| (i, j)))
        .find(|&(i, j)| group.spec().basis_bracket(i, j).iter().any(|c| c != &zero()))
        .unwrap_or((0, 1));
    let r = ctx.radius().clone();
    let basis = |k: usize| {
        let mut v = vec![zero(); n_u];
        v[k] = r.clone();
        Letter::new(group.from_u(v), ctx.factor)
    };
    let (x, y) = (basis(i), basis(j));
    let inv = |l: &Letter| -> Result<Letter> { Ok(Letter::new(group.inverse(&l.elem)?, l.factor)) };
    let gens = [x.clone(), y.clone(), inv(&x)?, inv(&y)?];
    let mut best = None;
    for n in 1..=len / 4 {
        let body = Word::new(gens.iter().flat_map(|l| std::iter::repeat_n(l.clone(), n)).collect());
        let z = group.inverse(&eval_unchecked(group, &body)?)?;
        let tail = ctx.omega(group, &z)?;
        if body.len() + tail.len() > len {
            break;
        }
        best = Some(body.concat(&tail));
    }
    let mut w = best.ok_or_else(|| Error::Precondition(format!("no relation of the family fits in {len} letters")))?;
    let pad = Letter::new(group.identity(), ctx.factor);
    w.letters.resize(len, pad);
    Ok(w)
}

/// `[aⁿ x a⁻ⁿ, bⁿ y b⁻ⁿ]` with `a`, `b` unit steps along the first
/// A-direction chosen so that both conjugations expand, and `x`, `y` the
/// first two basis elements of 𝔲. A relation when the two conjugates
/// commute, as in Sol.
pub fn commutator_word(group: &SolvableGroup, n: usize) -> Result<Word> {
    let (d, n_u) = (group.rank(), group.dim());
    if d == 0 || n_u < 2 {
        return Err(Error::Precondition("commutator family needs rank ≥ 1 and dim 𝔲 ≥ 2".into()));
    }
    let unit_a = |sign: i64| {
        let mut v = vec![zero(); d];
        v[0] = q(sign);
        Letter::new(group.from_a(v), Factor::A)
    };
    let unit_u = |k: usize, sign: i64| {
        let mut v = vec![zero(); n_u];
        v[k] = q(sign);
        Letter::new(group.from_u(v), Factor::U)
    };
    // the sign whose conjugation stretches e_k the most
    let expanding = |k: usize| -> Result<i64> {
        let size = |sign: i64| -> Result<crate::rational::Q> {
            let c = group.product(&[unit_a(sign).elem, unit_u(k, 1).elem, unit_a(-sign).elem])?;
            Ok(crate::words::inf_norm(&c.u))
        };
        Ok(if size(1)? >= size(-1)? { 1 } else { -1 })
    };
    let conj = |sign: i64, s: Letter| -> Vec<Letter> {
        let mut out = vec![unit_a(sign); n];
        out.push(s);
        out.extend(std::iter::repeat_n(unit_a(-sign), n));
        out
    };
    let (sx, sy) = (expanding(0)?, expanding(1)?);
    let mut letters = conj(sx, unit_u(0, 1));
    letters.extend(conj(sy, unit_u(1, 1)));
    letters.extend(conj(sx, unit_u(0, -1)));
    letters.extend(conj(sy, unit_u(1, -1)));
    Ok(Word::new(letters))
}

/// Random `g₁`, `g₂` with integer 𝔲-coordinates in `[−2^m, 2^m]` and
/// A-coordinates in `[−2, 2]`; `g₃ = (g₁ g₂)⁻¹`.
pub fn random_triple(group: &SolvableGroup, m: u32, rng: &mut impl Rng) -> Result<[GroupElement; 3]> {
    let bound = 1i64 << m;
    let mut draw = || {
        let a = (0..group.rank()).map(|_| q(rng.random_range(-2i64..=2))).collect();
        let u = (0..group.dim()).map(|_| q(rng.random_range(-bound..=bound))).collect();
        GroupElement::new(a, u)
    };
    let (g1, g2) = (draw(), draw());
    let g3 = group.inverse(&group.mul(&g1, &g2)?)?;
    Ok([g1, g2, g3])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Family {
    /// Relation words of the given lengths.
    Relations { lengths: Vec<usize> },
    /// Circles of radius `2^m` in the first coordinate plane of 𝔲.
    Circles { exponents: Vec<i32> },
    /// Conjugate commutators with conjugation depth `n`.
    Commutators { depths: Vec<usize> },
    /// Random triples at coordinate scale `2^m`.
    Triangles { exponents: Vec<u32>, seed: u64 },
}

impl Family {
    /// `relations:16,32`, `circles:0,1`, `commutators:1,2`, `triangles:2,4`.
    pub fn parse(s: &str, seed: u64) -> Result<Self> {
        let (kind, list) = s
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("family {s:?}: expected kind:values")))?;
        fn nums<T: std::str::FromStr>(list: &str, s: &str) -> Result<Vec<T>> {
            list.split(',')
                .map(|x| x.trim().parse().map_err(|_| Error::Invalid(format!("family {s:?}: bad value {x:?}"))))
                .collect()
        }
        Ok(match kind {
            "relations" => Family::Relations { lengths: nums(list, s)? },
            "circles" => Family::Circles { exponents: nums(list, s)? },
            "commutators" => Family::Commutators { depths: nums(list, s)? },
            "triangles" => Family::Triangles {
                exponents: nums(list, s)?,
                seed,
            },
            _ => return Err(Error::Invalid(format!("unknown family kind {kind:?}"))),
        })
    }

    pub fn default_pipeline(&self) -> Pipeline {
        match self {
            Family::Relations { .. } => Pipeline::Gromov,
            Family::Circles { .. } | Family::Commutators { .. } => Pipeline::Cone,
            Family::Triangles { .. } => Pipeline::Tame,
        }
    }

    /// Members as `(label, loop or the reason it could not be built)`.
    pub fn members(&self, group: &SolvableGroup) -> Vec<(String, Result<Loop>)> {
        match self {
            Family::Relations { lengths } => {
                let ctx = tame_ctx(group).map(|(_, c)| c);
                lengths
                    .iter()
                    .map(|&l| {
                        let lp = match &ctx {
                            Ok(c) => relation_word(group, c, l).map(Loop::Word),
                            Err(e) => Err(e.clone()),
                        };
                        (format!("length {l}"), lp)
                    })
                    .collect()
            }
            Family::Circles { exponents } => exponents
                .iter()
                .map(|&m| {
                    let lp = if group.dim() < 2 {
                        Err(Error::Precondition("circles need dim 𝔲 ≥ 2".into()))
                    } else {
                        Ok(Loop::Circle {
                            radius: 2f64.powi(m),
                            plane: (0, 1),
                        })
                    };
                    (format!("radius 2^{m}"), lp)
                })
                .collect(),
            Family::Commutators { depths } => depths
                .iter()
                .map(|&n| (format!("depth {n}"), commutator_word(group, n).map(Loop::Word)))
                .collect(),
            Family::Triangles { exponents, seed } => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                exponents
                    .iter()
                    .map(|&m| (format!("scale 2^{m}"), random_triple(group, m, &mut rng).map(Loop::Triple)))
                    .collect()
            }
        }
    }
}

/// Refinement settings for the estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub grid: usize,
    pub tolerance: f64,
    pub max_grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            grid: DEFAULT_GRID,
            tolerance: DEFAULT_TOLERANCE,
            max_grid: DEFAULT_MAX_GRID,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub label: String,
    pub letters: usize,
    pub loop_lip: Option<f64>,
    pub fill: Option<LipEstimate>,
    /// `Lip(fill) / Lip(loop)`.
    pub ratio: Option<f64>,
    /// `Lip(fill) / ℓ(w)` for words.
    pub ratio_per_letter: Option<f64>,
    pub detail: Value,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub family: Family,
    pub pipeline: Pipeline,
    pub tolerances: Tolerances,
    pub drift_factor: f64,
    pub rows: Vec<ProbeRow>,
    /// `max/min` of the ratio column over rows that filled.
    pub band: Option<f64>,
    pub band_per_letter: Option<f64>,
    /// The band exceeds the drift factor.
    pub drift: bool,
}

fn band(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    if v.is_empty() {
        return None;
    }
    let hi = v.iter().cloned().fold(f64::MIN, f64::max);
    let lo = v.iter().cloned().fold(f64::MAX, f64::min);
    Some(if lo > 0.0 { hi / lo } else { f64::INFINITY })
}

pub const DEFAULT_DRIFT_FACTOR: f64 = 1.25;

/// Fill and estimate one loop; failures become the row's error.
pub fn probe_row(group: &SolvableGroup, label: String, lp: Result<Loop>, pipeline: Pipeline, tol: Tolerances) -> ProbeRow {
    let built = lp.and_then(|lp| fill_loop(group, &lp, pipeline));
    match built {
        Ok(out) => {
            let est = lipschitz_refined(group, &out.map, tol.grid, tol.tolerance, tol.max_grid);
            ProbeRow {
                label,
                letters: out.letters,
                loop_lip: Some(out.loop_lip),
                ratio: (out.loop_lip > 0.0).then(|| est.raw / out.loop_lip),
                ratio_per_letter: (out.letters > 0).then(|| est.raw / out.letters as f64),
                fill: Some(est),
                detail: out.detail,
                error: None,
            }
        }
        Err(e) => ProbeRow {
            label,
            letters: 0,
            loop_lip: None,
            fill: None,
            ratio: None,
            ratio_per_letter: None,
            detail: Value::Null,
            error: Some(e.to_string()),
        },
    }
}

pub fn span_probe(
    group: &SolvableGroup,
    family: &Family,
    pipeline: Option<Pipeline>,
    tol: Tolerances,
    drift_factor: f64,
) -> ProbeReport {
    let pipeline = pipeline.unwrap_or_else(|| family.default_pipeline());
    let rows: Vec<ProbeRow> = family
        .members(group)
        .into_iter()
        .map(|(label, lp)| probe_row(group, label, lp, pipeline, tol))
        .collect();
    let b = band(rows.iter().map(|r| r.ratio));
    let bl = band(rows.iter().map(|r| r.ratio_per_letter));
    ProbeReport {
        family: family.clone(),
        pipeline,
        tolerances: tol,
        drift_factor,
        drift: b.is_some_and(|x| x > drift_factor),
        band: b,
        band_per_letter: bl,
        rows,
    }
}

