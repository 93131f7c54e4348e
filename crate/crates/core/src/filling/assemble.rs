//! Fillings built from the primitives: backtracking, shears, cones, bounded
//! words, tame triangles, the dyadic template and free reductions.

use super::chain::{is_room_error, merge, Chain, TameCtx};
use super::map::{hconcat, vconcat, vertical_length, Move, MoveKind, SquareMap};
use super::path::{word_path, Path1D, SlotPath};
use crate::algebra::{GroupElement, GroupF, SolvableGroup};
use crate::error::{Error, Result};
use crate::words::{eval_unchecked, free_reduce, guard_from_env, Factor, Letter, NormalForms, Word};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::sync::Arc;

/// `v v⁻¹ ⤳ ε` by retracting along the path: the value at `(t, s)` is
/// `γ_{vv⁻¹}(max(0, min(t − s, 1 − t − s)))`.
pub fn backtrack_fill(group: &SolvableGroup, start: GroupF, v: &Word) -> Result<SquareMap> {
    if v.is_empty() {
        return Ok(SquareMap::Const(start));
    }
    let full = v.concat(&v.inverse(group)?);
    let bottom = Arc::new(word_path(group, start.clone(), &full));
    let top = Arc::new(SlotPath::constant(group, start, full.len()));
    let n = full.len();
    Ok(SquareMap::Move(Box::new(Move {
        bottom,
        top,
        lo: 0,
        hi: n,
        kind: MoveKind::Delete,
    })))
}

/// `1^k v ⤳ v 1^k`: slide the word along its own path.
pub fn shear_fill(group: &SolvableGroup, start: GroupF, v: &Word, k: usize) -> SquareMap {
    let letters: Vec<Option<Letter>> = v.letters.iter().cloned().map(Some).collect();
    let mut bottom = vec![None; k];
    bottom.extend(letters.iter().cloned());
    let mut top = letters;
    top.extend(std::iter::repeat_n(None, k));
    if v.is_empty() || k == 0 {
        let p = SlotPath::from_letters(group, start, &top);
        return SquareMap::Path(Path1D::Slots(Arc::new(p)));
    }
    let n = top.len();
    SquareMap::Move(Box::new(Move {
        bottom: Arc::new(SlotPath::from_letters(group, start.clone(), &bottom)),
        top: Arc::new(SlotPath::from_letters(group, start, &top)),
        lo: 0,
        hi: n,
        kind: MoveKind::Reparam,
    }))
}

/// Cone with its distortion bound.
#[derive(Clone, Debug)]
pub struct ConeFill {
    pub map: SquareMap,
    /// Largest `(a, u)`-norm of `base⁻¹ γ(t)` over the samples.
    pub radius: f64,
    /// Recorded bound on `Lip(fill) / Lip(loop)`.
    pub kappa: f64,
}

fn max_offset(group: &SolvableGroup, base_inv: &GroupF, p: &Path1D, samples: usize) -> f64 {
    let mut ts = p.breakpoints();
    ts.extend((0..=samples).map(|i| i as f64 / samples as f64));
    ts.iter()
        .map(|t| group.mul_f64(base_inv, &p.eval(group, *t)).coord_norm())
        .fold(0.0, f64::max)
}

fn bump(g: &GroupF, i: usize, h: f64) -> GroupF {
    let mut y = g.clone();
    if i < y.a.len() {
        y.a[i] += h;
    } else {
        y.u[i - g.a.len()] += h;
    }
    y
}

fn coord_dist(x: &GroupF, y: &GroupF) -> f64 {
    x.a.iter()
        .zip(&y.a)
        .chain(x.u.iter().zip(&y.u))
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Frobenius bounds on the differential of `ψ⁻¹` at `x0` (measured in the
/// left-invariant metric) and of `ψ` (measured in coordinates).
fn chart_distortion(group: &SolvableGroup, x0: &GroupF) -> (f64, f64) {
    let h = 1e-6;
    let zero = GroupF::identity(x0.a.len(), x0.u.len());
    let mut fwd = 0.0;
    let mut back = 0.0;
    for i in 0..x0.a.len() + x0.u.len() {
        let col = group.left_quotient_f64(x0, &bump(x0, i, h)).coord_norm() / h;
        fwd += col * col;
        let diff = coord_dist(&group.mul_f64(x0, &bump(&zero, i, h)), x0) / h;
        back += diff * diff;
    }
    (fwd.sqrt(), back.sqrt())
}

/// Bound on the metric distortion of `(a, u)`-coordinates on the ball of
/// the given radius: `sup ‖Dψ⁻¹‖ · sup ‖Dψ‖` over seeded samples.
/// Abelian 𝔲 and loops inside `U` give exactly 1.
pub fn cone_kappa(group: &SolvableGroup, radius: f64, only_u: bool, seed: u64) -> f64 {
    if only_u && group.spec().is_abelian() {
        return 1.0;
    }
    let (d, n) = (group.rank(), group.dim());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut fwd: f64 = 1.0;
    let mut back: f64 = 1.0;
    for k in 0..256 {
        let mut x = GroupF::identity(d, n);
        if k > 0 {
            let mut norm = 0.0;
            for v in x.u.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
                norm += *v * *v;
            }
            if !only_u {
                for v in x.a.iter_mut() {
                    *v = rng.random_range(-1.0..1.0);
                    norm += *v * *v;
                }
            }
            let scale = radius * rng.random_range(0.0f64..1.0).sqrt() / norm.sqrt().max(1e-12);
            x.u.iter_mut().chain(x.a.iter_mut()).for_each(|v| *v *= scale);
        }
        let (f, b) = chart_distortion(group, &x);
        fwd = fwd.max(f);
        back = back.max(b);
    }
    fwd * back
}

/// Cone off a loop to `base` in `(a, u)`-coordinates based at `base`.
pub fn cone_fill(group: &SolvableGroup, lp: Path1D, base: GroupF, guard_radius: f64) -> Result<ConeFill> {
    let base_inv = group.inverse_f64(&base);
    let radius = max_offset(group, &base_inv, &lp, 256);
    if radius > guard_radius {
        return Err(Error::Guard {
            what: "cone radius (in 1e-3 units)".into(),
            value: (radius * 1e3).ceil() as usize,
            limit: (guard_radius * 1e3).floor() as usize,
        });
    }
    // circle offsets from their own base lie in U
    let only_u = matches!(&lp, Path1D::Circle { base: b, .. } if b == &base);
    let kappa = cone_kappa(group, radius, only_u, 0);
    let top = Path1D::Slots(Arc::new(SlotPath::constant(group, base.clone(), 1)));
    Ok(ConeFill {
        map: SquareMap::straight(group, base, lp, top),
        radius,
        kappa,
    })
}

pub const DEFAULT_BOUNDED_RADIUS: f64 = 16.0;

/// Fill a relation whose prefixes stay near the start: a cone over a band
/// whose height makes the vertical speed match `Lip(γ_w)`, constant above.
pub fn bounded_fill(group: &SolvableGroup, start: GroupF, w: &Word, guard_radius: f64) -> Result<SquareMap> {
    if w.is_empty() {
        return Ok(SquareMap::Const(start));
    }
    if !eval_unchecked(group, w)?.is_identity() {
        return Err(Error::Precondition("bounded filling needs a relation".into()));
    }
    let mut prefix = group.identity();
    for (i, l) in w.letters.iter().enumerate() {
        prefix = group.mul(&prefix, &l.elem)?;
        let norm = prefix.to_f64().coord_norm();
        if norm > guard_radius {
            return Err(Error::Precondition(format!(
                "prefix of length {} leaves the ball of radius {guard_radius} (norm {norm:.3})",
                i + 1
            )));
        }
    }
    let path = Arc::new(word_path(group, start.clone(), w));
    let lip = path.lipschitz();
    let cone = cone_fill(group, Path1D::Slots(path), start.clone(), guard_radius)?;
    let h = (cone.radius / lip).clamp(1.0 / 1024.0, 1.0);
    vconcat(group, vec![(h, cone.map), (1.0 - h, SquareMap::Const(start))])
}

#[derive(Clone, Debug)]
struct Node {
    lo: usize,
    weight: usize,
    elem: GroupElement,
    level: usize,
    children: Option<(usize, usize)>,
}

fn build_tree(group: &SolvableGroup, leaves: &[GroupElement], weights: &[usize]) -> Result<(Vec<Node>, usize)> {
    fn rec(
        group: &SolvableGroup,
        leaves: &[GroupElement],
        weights: &[usize],
        lo: usize,
        hi: usize,
        out: &mut Vec<Node>,
    ) -> Result<usize> {
        let node = if hi - lo == 1 {
            Node {
                lo,
                weight: weights[lo],
                elem: leaves[lo].clone(),
                level: 0,
                children: None,
            }
        } else {
            let mid = lo + (hi - lo).div_ceil(2);
            let l = rec(group, leaves, weights, lo, mid, out)?;
            let r = rec(group, leaves, weights, mid, hi, out)?;
            Node {
                lo,
                weight: out[l].weight + out[r].weight,
                elem: group.mul(&out[l].elem, &out[r].elem)?,
                level: 1 + out[l].level.max(out[r].level),
                children: Some((l, r)),
            }
        };
        out.push(node);
        Ok(out.len() - 1)
    }
    let mut nodes = Vec::new();
    let root = rec(group, leaves, weights, 0, leaves.len(), &mut nodes)?;
    Ok((nodes, root))
}

/// Rows of merge rectangles above a row of `ω`-words.
struct TreeRows {
    quantum: usize,
    /// `ω(leaf_i)` packed into `quantum · weight_i` slots, concatenated.
    leaf_layout: Vec<Option<Letter>>,
    rows: Vec<(f64, SquareMap)>,
    chain_moves: usize,
}

pub const DEFAULT_QUANTUM_GUARD: usize = 64;

/// Merge neighbouring `ω`-words pairwise up a balanced tree. Each leaf gets
/// `quantum · weight` slots; the quantum is the least one for which every
/// chain fits.
fn tree_rows(
    group: &SolvableGroup,
    ctx: &TameCtx,
    start: &GroupF,
    leaves: &[GroupElement],
    weights: &[usize],
    min_quantum: usize,
) -> Result<TreeRows> {
    let (nodes, root) = build_tree(group, leaves, weights)?;
    // exact prefix values at each leaf boundary
    let mut prefixes = vec![group.identity()];
    for l in leaves {
        prefixes.push(group.mul(prefixes.last().unwrap(), l)?);
    }
    let guard = guard_from_env("quantum", DEFAULT_QUANTUM_GUARD);
    let mut quantum = min_quantum.max(1);
    'attempt: loop {
        if quantum > guard {
            return Err(Error::Guard {
                what: "slot quantum".into(),
                value: quantum,
                limit: guard,
            });
        }
        let mut tops: Vec<Option<(Vec<Option<Letter>>, Arc<SlotPath>)>> = vec![None; nodes.len()];
        let mut maps: Vec<Option<(f64, SquareMap)>> = vec![None; nodes.len()];
        let mut moves = 0;
        for (id, node) in nodes.iter().enumerate() {
            let n = quantum * node.weight;
            let base = group.mul_f64(start, &prefixes[node.lo].to_f64());
            match node.children {
                None => {
                    let w = ctx.omega(group, &node.elem)?;
                    let ch = match Chain::packed(group, base, &w, n) {
                        Ok(c) => c,
                        Err(e) if is_room_error(&e) => {
                            quantum += 1;
                            continue 'attempt;
                        }
                        Err(e) => return Err(e),
                    };
                    let slots = ch.slots().to_vec();
                    let fin = ch.finish()?;
                    tops[id] = Some((slots, fin.top_path));
                }
                Some((l, r)) => {
                    let mut slots = tops[l].as_ref().unwrap().0.clone();
                    slots.extend(tops[r].as_ref().unwrap().0.iter().cloned());
                    let mut ch = Chain::new(group, base, slots);
                    match merge(&mut ch, ctx, &nodes[l].elem, &nodes[r].elem) {
                        Ok(_) => {}
                        Err(e) if is_room_error(&e) => {
                            quantum += 1;
                            continue 'attempt;
                        }
                        Err(e) => return Err(e),
                    }
                    let fin = ch.finish()?;
                    moves += fin.moves;
                    tops[id] = Some((fin.top.clone(), fin.top_path.clone()));
                    maps[id] = Some((fin.cost, fin.map));
                }
            }
        }
        let leaf_layout: Vec<Option<Letter>> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.children.is_none())
            .flat_map(|(id, _)| tops[id].as_ref().unwrap().0.clone())
            .collect();
        let top_level = nodes[root].level;
        let mut rows = Vec::new();
        for level in 1..=top_level {
            let mut cells: Vec<(f64, SquareMap)> = Vec::new();
            let mut cost: f64 = 0.0;
            collect_row(&nodes, root, level, &mut |id| {
                let w = nodes[id].weight as f64;
                if nodes[id].level == level {
                    let (c, m) = maps[id].clone().unwrap();
                    cost = cost.max(c);
                    cells.push((w, m));
                } else {
                    let p = tops[id].as_ref().unwrap().1.clone();
                    cells.push((w, SquareMap::Path(Path1D::Slots(p))));
                }
            });
            let row = hconcat(group, cells)?;
            rows.push((cost, row));
        }
        return Ok(TreeRows {
            quantum,
            leaf_layout,
            rows,
            chain_moves: moves,
        });
    }
}

fn collect_row(nodes: &[Node], id: usize, level: usize, f: &mut dyn FnMut(usize)) {
    match nodes[id].children {
        Some((l, r)) if nodes[id].level > level => {
            collect_row(nodes, l, level, f);
            collect_row(nodes, r, level, f);
        }
        _ => f(id),
    }
}

/// Summary of a template filling.
#[derive(Clone, Debug, Serialize)]
pub struct FillStats {
    pub letters: usize,
    pub quantum: usize,
    pub rows: usize,
    pub chain_moves: usize,
    pub row_costs: Vec<f64>,
}

pub struct Filled {
    pub map: SquareMap,
    pub stats: FillStats,
}

/// Stack rows with heights proportional to their vertical cost.
fn stack(group: &SolvableGroup, rows: Vec<(f64, SquareMap)>) -> Result<(SquareMap, Vec<f64>)> {
    let costs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rows: Vec<(f64, SquareMap)> = rows.into_iter().filter(|r| r.0 > 0.0).collect();
    if rows.is_empty() {
        return Err(Error::Internal("no row with positive cost".into()));
    }
    Ok((vconcat(group, rows)?, costs))
}

/// Dyadic template: a row of straight homotopies from each letter to its
/// normal form, then rows of merge rectangles up a balanced tree.
pub fn gromov_fill(group: &SolvableGroup, ctx: &TameCtx, start: GroupF, w: &Word) -> Result<Filled> {
    gromov_fill_with(group, ctx, start, w, 1)
}

pub fn gromov_fill_with(group: &SolvableGroup, ctx: &TameCtx, start: GroupF, w: &Word, min_quantum: usize) -> Result<Filled> {
    if !eval_unchecked(group, w)?.is_identity() {
        return Err(Error::Precondition("the word does not evaluate to the identity".into()));
    }
    if w.is_empty() {
        return Ok(Filled {
            map: SquareMap::Const(start),
            stats: FillStats {
                letters: 0,
                quantum: 0,
                rows: 0,
                chain_moves: 0,
                row_costs: vec![],
            },
        });
    }
    let leaves: Vec<GroupElement> = w.letters.iter().map(|l| l.elem.clone()).collect();
    let weights = vec![1; leaves.len()];
    let tree = tree_rows(group, ctx, &start, &leaves, &weights, min_quantum)?;
    let q = tree.quantum;
    // bottom row: letter i ⤳ ω(letter i)
    let mut cells = Vec::new();
    let mut cost: f64 = 0.0;
    let mut prefix = start.clone();
    for (i, l) in w.letters.iter().enumerate() {
        let bottom = Arc::new(SlotPath::from_letters(group, prefix.clone(), &[Some(l.clone())]));
        let top = Arc::new(SlotPath::from_letters(group, prefix.clone(), &tree.leaf_layout[i * q..(i + 1) * q]));
        let next = bottom.end().clone();
        let cell = SquareMap::straight(group, prefix.clone(), Path1D::Slots(bottom), Path1D::Slots(top));
        let c = (0..=2 * q)
            .map(|k| {
                let t = k as f64 / (2 * q) as f64;
                vertical_length(group, |s| cell.eval(group, t, s), 8)
            })
            .fold(0.0, f64::max);
        cost = cost.max(c);
        cells.push((1.0, cell));
        prefix = next;
    }
    let mut rows = vec![(cost, hconcat(group, cells)?)];
    rows.extend(tree.rows);
    let nrows = rows.len();
    let (map, row_costs) = stack(group, rows)?;
    Ok(Filled {
        map,
        stats: FillStats {
            letters: w.len(),
            quantum: q,
            rows: nrows,
            chain_moves: tree.chain_moves,
            row_costs,
        },
    })
}

/// `ω(g₁) ω(g₂) ω(g₃) ⤳ ε` for `g₁ g₂ g₃ = 1`: spread the word onto the
/// slot layout, merge `ω(g₁) ω(g₂)` into `ω(g₁g₂)`, then merge with `ω(g₃)`.
pub fn tame_triangle_fill(
    group: &SolvableGroup,
    ctx: &TameCtx,
    start: GroupF,
    g: [&GroupElement; 3],
) -> Result<Filled> {
    let total = group.product(&[g[0].clone(), g[1].clone(), g[2].clone()])?;
    if !total.is_identity() {
        return Err(Error::Precondition("g1 g2 g3 is not the identity".into()));
    }
    let words: Vec<Word> = g.iter().map(|x| ctx.omega(group, x)).collect::<Result<_>>()?;
    let full = words[0].concat(&words[1]).concat(&words[2]);
    if full.is_empty() {
        return gromov_fill(group, ctx, start, &full);
    }
    let leaves: Vec<GroupElement> = g.iter().map(|x| (*x).clone()).collect();
    let weights: Vec<usize> = words.iter().map(|w| w.len().max(1)).collect();
    let tree = tree_rows_triangle(group, ctx, &start, &leaves, &weights)?;
    let bottom = Arc::new(word_path(group, start.clone(), &full));
    let top = Arc::new(SlotPath::from_letters(group, start.clone(), &tree.leaf_layout));
    let spread = Move {
        hi: bottom.slot_count(),
        bottom,
        top,
        lo: 0,
        kind: MoveKind::Reparam,
    };
    let c = spread.vertical_cost(group);
    let mut rows = vec![(c, SquareMap::Move(Box::new(spread)))];
    rows.extend(tree.rows);
    let nrows = rows.len();
    let (map, row_costs) = stack(group, rows)?;
    Ok(Filled {
        map,
        stats: FillStats {
            letters: full.len(),
            quantum: tree.quantum,
            rows: nrows,
            chain_moves: tree.chain_moves,
            row_costs,
        },
    })
}

/// Tree `((g₁, g₂), g₃)` for the triangle.
fn tree_rows_triangle(
    group: &SolvableGroup,
    ctx: &TameCtx,
    start: &GroupF,
    leaves: &[GroupElement],
    weights: &[usize],
) -> Result<TreeRows> {
    // build_tree splits [0,3) as [0,2) + [2,3), which is the required shape
    tree_rows(group, ctx, start, leaves, weights, 1)
}

/// Homotopy from `a r b 1^k` to `a b 1^{k+ℓ(r)}`: the lower half fills `r`
/// in place with `fill_r`, the upper half slides `b` left.
pub fn rectangle_fill(
    group: &SolvableGroup,
    start: GroupF,
    a: &Word,
    r: &Word,
    b: &Word,
    k: usize,
    fill_r: SquareMap,
) -> Result<SquareMap> {
    let lr = r.len();
    let some = |w: &Word| w.letters.iter().cloned().map(Some).collect::<Vec<_>>();
    let mut bottom = some(a);
    bottom.extend(some(r));
    bottom.extend(some(b));
    bottom.extend(std::iter::repeat_n(None, k));
    let mut middle = some(a);
    middle.extend(std::iter::repeat_n(None, lr));
    middle.extend(some(b));
    middle.extend(std::iter::repeat_n(None, k));
    let mut top = some(a);
    top.extend(some(b));
    top.extend(std::iter::repeat_n(None, k + lr));
    let pb = Arc::new(SlotPath::from_letters(group, start.clone(), &bottom));
    let n = pb.slot_count();
    if lr == 0 {
        return Ok(SquareMap::Path(Path1D::Slots(pb)));
    }
    let pm = Arc::new(SlotPath::from_letters(group, start.clone(), &middle));
    let pt = Arc::new(SlotPath::from_letters(group, start, &top));
    let lo = a.len();
    let base = pb.prefix(lo).clone();
    let lower = SquareMap::Move(Box::new(Move {
        bottom: pb,
        top: pm.clone(),
        lo,
        hi: lo + lr,
        kind: MoveKind::Patch {
            base,
            inner: Box::new(fill_r),
        },
    }));
    let upper = if b.is_empty() {
        SquareMap::Path(Path1D::Slots(pm))
    } else {
        SquareMap::Move(Box::new(Move {
            bottom: pm,
            top: pt,
            lo: 0,
            hi: n,
            kind: MoveKind::Reparam,
        }))
    };
    vconcat(group, vec![(0.5, lower), (0.5, upper)])
}

/// One band per reduction step; band `j` has height `ℓ(r_j)/ℓ(w)`.
pub struct FreeFill {
    pub map: SquareMap,
    /// Bottom word of each band, as slots (idle = trailing identity letters).
    pub band_words: Vec<Vec<Option<Letter>>>,
    pub blocks: Vec<(Factor, usize)>,
}

fn block_factor(block: &Word) -> Result<usize> {
    block
        .letters
        .iter()
        .find_map(|l| match l.factor {
            Factor::Conic(i) => Some(i),
            _ => None,
        })
        .ok_or_else(|| Error::Precondition("reduction block carries no conic tag".into()))
}

/// Fill a word that is trivial in the free product of the tame factors.
pub fn free_fill(group: &SolvableGroup, nf: &NormalForms, start: GroupF, w: &Word) -> Result<FreeFill> {
    let red = free_reduce(group, w)?;
    if !red.freely_trivial() {
        return Err(Error::Precondition(format!(
            "word is not freely trivial; {} letters remain after reduction",
            red.residue.len()
        )));
    }
    if w.is_empty() {
        return Ok(FreeFill {
            map: SquareMap::Const(start),
            band_words: vec![],
            blocks: vec![],
        });
    }
    let mut bands = Vec::new();
    let mut band_words = Vec::new();
    let mut blocks = Vec::new();
    let mut pad = 0;
    for step in &red.steps {
        let i = block_factor(&step.block)?;
        let ctx = TameCtx::from_normal_forms(nf, i);
        let inner = gromov_fill(group, &ctx, group.identity_f64(), &step.block)?.map;
        let band = rectangle_fill(group, start.clone(), &step.prefix, &step.block, &step.suffix, pad, inner)?;
        let mut bw: Vec<Option<Letter>> = step
            .prefix
            .letters
            .iter()
            .chain(&step.block.letters)
            .chain(&step.suffix.letters)
            .cloned()
            .map(Some)
            .collect();
        bw.extend(std::iter::repeat_n(None, pad));
        band_words.push(bw);
        blocks.push((Factor::Conic(i), step.block.len()));
        bands.push((step.block.len() as f64, band));
        pad += step.block.len();
    }
    Ok(FreeFill {
        map: vconcat(group, bands)?,
        band_words,
        blocks,
    })
}
