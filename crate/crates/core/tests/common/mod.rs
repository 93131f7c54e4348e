//! Independent oracles shared by the integration tests and the acceptance
//! target. Nothing here calls the library routine it is used to check.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use solvfill_core::linalg::QMatrix;
use solvfill_core::rational::{q, qr, zero};
use solvfill_core::words::{eval_unchecked, Factor, Letter, Word};
use solvfill_core::{GroupElement, LieAlgebraSpec, SolvableGroup, Q};

pub type M3 = [[Q; 3]; 3];

pub fn pow2(k: i64) -> Q {
    if k >= 0 {
        Q::from_integer(BigInt::one() << k as usize)
    } else {
        Q::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

pub fn m3_mul(x: &M3, y: &M3) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| &x[i][k] * &y[k][j]).sum()))
}

/// Sol element `a · exp(x e₁ + y e₂)` with `e₁, e₂` of weights −1, +1 as
/// the affine map `v ↦ S(v + (x, y))`, `S = diag(2^{-a}, 2^{a})`.
pub fn sol_matrix(g: &GroupElement) -> M3 {
    let a: i64 = g.a[0].to_integer().try_into().expect("integral a");
    let (s1, s2) = (pow2(-a), pow2(a));
    [
        [s1.clone(), zero(), &s1 * &g.u[0]],
        [zero(), s2.clone(), &s2 * &g.u[1]],
        [zero(), zero(), q(1)],
    ]
}

/// `exp(xX + yY + zZ)` for `[X, Y] = Z` as a unitriangular matrix.
pub fn heis_matrix(u: &[Q]) -> M3 {
    [
        [q(1), u[0].clone(), &u[2] + &u[0] * &u[1] / q(2)],
        [zero(), q(1), u[1].clone()],
        [zero(), zero(), q(1)],
    ]
}

pub fn heis_log(m: &M3) -> Vec<Q> {
    vec![m[0][1].clone(), m[1][2].clone(), &m[0][2] - &m[0][1] * &m[1][2] / q(2)]
}

/// Rank by fraction-free (Bareiss) elimination after clearing denominators
/// row by row.
pub fn bareiss_rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            r.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            for j in c + 1..ncols {
                let v = (&m[rank][c] * &m[i][j] - &m[i][c] * &m[rank][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

fn bracket(spec: &LieAlgebraSpec, i: usize, j: usize) -> Vec<Q> {
    spec.basis_bracket(i, j).clone()
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Coordinates of `v ∧ e_k` in the basis `e_i ∧ e_j`, `i < j`.
fn wedge_with(v: &[Q], k: usize, n: usize) -> Vec<Q> {
    let idx = pairs(n);
    let mut out = vec![zero(); idx.len()];
    for (i, c) in v.iter().enumerate() {
        if c.is_zero() || i == k {
            continue;
        }
        let (p, s) = if i < k { ((i, k), q(1)) } else { ((k, i), q(-1)) };
        let pos = idx.iter().position(|x| *x == p).unwrap();
        out[pos] += c * s;
    }
    out
}

/// `dim ker ∂₂ − rank ∂₃` with both boundaries rebuilt from the brackets.
pub fn h2_dim_oracle(spec: &LieAlgebraSpec) -> usize {
    let n = spec.dim();
    let d2_cols: Vec<Vec<Q>> = pairs(n).iter().map(|&(i, j)| bracket(spec, i, j)).collect();
    let rank_d2 = bareiss_rank(&d2_cols);
    let mut d3_cols = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                // ∂(x∧y∧z) = −[x,y]∧z + [x,z]∧y − [y,z]∧x
                let mut v = wedge_with(&bracket(spec, i, j), k, n);
                let b = wedge_with(&bracket(spec, i, k), j, n);
                let c = wedge_with(&bracket(spec, j, k), i, n);
                for t in 0..v.len() {
                    v[t] = -&v[t] + &b[t] - &c[t];
                }
                d3_cols.push(v);
            }
        }
    }
    pairs(n).len() - rank_d2 - bareiss_rank(&d3_cols)
}

fn sym_index(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

/// `v ⊙ e_k` in the basis `e_i ⊙ e_j`, `i ≤ j`.
fn sym_with(v: &[Q], k: usize, n: usize) -> Vec<Q> {
    let idx = sym_index(n);
    let mut out = vec![zero(); idx.len()];
    for (i, c) in v.iter().enumerate() {
        let p = (i.min(k), i.max(k));
        let pos = idx.iter().position(|x| *x == p).unwrap();
        out[pos] += c;
    }
    out
}

/// `dim S²𝔲 − rank{[x,y]⊙z − y⊙[x,z]}` over all basis triples.
pub fn kill_dim_oracle(spec: &LieAlgebraSpec) -> usize {
    let n = spec.dim();
    let mut rel = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let l = sym_with(&bracket(spec, x, y), z, n);
                let r = sym_with(&bracket(spec, x, z), y, n);
                rel.push(l.iter().zip(&r).map(|(a, b)| a - b).collect());
            }
        }
    }
    sym_index(n).len() - bareiss_rank(&rel)
}

fn cross(o: &[Q], a: &[Q], b: &[Q]) -> Q {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Is the origin in the convex hull of planar points? Carathéodory: a
/// point, a segment or a triangle of the input must contain it.
pub fn zero_in_hull_2d(pts: &[Vec<Q>]) -> bool {
    let o = [zero(), zero()];
    if pts.iter().any(|p| p[0].is_zero() && p[1].is_zero()) {
        return true;
    }
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            // opposite and collinear through the origin
            let c = cross(&o, &pts[i], &pts[j]);
            let dotp = &pts[i][0] * &pts[j][0] + &pts[i][1] * &pts[j][1];
            if c.is_zero() && dotp.is_negative() {
                return true;
            }
            for k in j + 1..n {
                let s1 = cross(&pts[i], &pts[j], &o);
                let s2 = cross(&pts[j], &pts[k], &o);
                let s3 = cross(&pts[k], &pts[i], &o);
                let pos = [&s1, &s2, &s3].iter().all(|s| !s.is_negative());
                let neg = [&s1, &s2, &s3].iter().all(|s| !s.is_positive());
                if (pos || neg) && !cross(&pts[i], &pts[j], &pts[k]).is_zero() {
                    return true;
                }
            }
        }
    }
    false
}

/// Free-product reduction with a stack of `(factor, running product)`.
pub fn stack_reduce(group: &SolvableGroup, w: &Word) -> Vec<(Factor, GroupElement)> {
    let mut st: Vec<(Factor, GroupElement)> = Vec::new();
    for l in &w.letters {
        match st.last_mut() {
            Some((f, g)) if *f == l.factor => {
                *g = group.mul(g, &l.elem).unwrap();
                if g.is_identity() {
                    st.pop();
                }
            }
            _ if l.elem.is_identity() => {}
            _ => st.push((l.factor, l.elem.clone())),
        }
    }
    st
}

/// Blocks of a residue word, each multiplied out.
pub fn block_products(group: &SolvableGroup, w: &Word) -> Vec<(Factor, GroupElement)> {
    solvfill_core::words::blocks(w)
        .into_iter()
        .map(|(s, e)| {
            let b = Word::new(w.letters[s..e].to_vec());
            (w.letters[s].factor, eval_unchecked(group, &b).unwrap())
        })
        .collect()
}

pub fn small_rational(rng: &mut impl Rng, num: i64, den: i64) -> Q {
    qr(rng.random_range(-num..=num), rng.random_range(1..=den))
}

pub fn random_u(group: &SolvableGroup, rng: &mut impl Rng) -> GroupElement {
    group.from_u((0..group.dim()).map(|_| small_rational(rng, 4, 4)).collect())
}

/// Freely trivial word over `tags` factors: nested `x₁ T x₂ T ⋯ x_k` with
/// `x₁⋯x_k = 1` in one factor and each `T` freely trivial.
pub fn trivial_word(group: &SolvableGroup, tags: usize, depth: usize, rng: &mut impl Rng) -> Word {
    let f = Factor::Conic(rng.random_range(0..tags));
    let k = rng.random_range(2..=3);
    let mut xs: Vec<GroupElement> = (0..k - 1).map(|_| random_u(group, rng)).collect();
    let p = group.product(&xs).unwrap();
    xs.push(group.inverse(&p).unwrap());
    let mut out = Vec::new();
    for (i, x) in xs.into_iter().enumerate() {
        if i > 0 && depth > 0 && rng.random_bool(0.6) {
            out.extend(trivial_word(group, tags, depth - 1, rng).letters);
        }
        out.push(Letter::new(x, f));
    }
    Word::new(out)
}

/// Trivial word with one non-identity letter spliced in: `w₁ x w₂` is
/// conjugate to `x` in the free product, hence non-trivial.
pub fn nontrivial_word(group: &SolvableGroup, tags: usize, depth: usize, rng: &mut impl Rng) -> Word {
    let mut w = trivial_word(group, tags, depth, rng);
    let x = loop {
        let x = random_u(group, rng);
        if !x.is_identity() {
            break x;
        }
    };
    let at = rng.random_range(0..=w.len());
    w.letters.insert(at, Letter::new(x, Factor::Conic(rng.random_range(0..tags))));
    w
}

/// Random valid spec: a nilpotent model with diagonal action in a random
/// rational basis.
pub fn random_spec(rng: &mut impl Rng) -> LieAlgebraSpec {
    let kind = rng.random_range(0..4);
    let c = |rng: &mut dyn rand::RngCore| q(rng.random_range(1..=3i64));
    // (dim, brackets (i, j, k, coef) with i < j, weights of the basis)
    let (n, br, w): (usize, Vec<(usize, usize, usize, Q)>, Vec<Q>) = match kind {
        0 => {
            let (a, b) = (c(rng), c(rng));
            (3, vec![(0, 1, 2, c(rng))], vec![a.clone(), b.clone(), a + b])
        }
        1 => {
            let (a, b) = (c(rng), c(rng));
            let w = vec![a.clone(), b.clone(), &a + &b, &a + &a + &b];
            (4, vec![(0, 1, 2, c(rng)), (0, 2, 3, c(rng))], w)
        }
        2 => {
            // free 2-step nilpotent on three generators
            let g: Vec<Q> = (0..3).map(|_| c(rng)).collect();
            let w = vec![g[0].clone(), g[1].clone(), g[2].clone(), &g[0] + &g[1], &g[0] + &g[2], &g[1] + &g[2]];
            (6, vec![(0, 1, 3, c(rng)), (0, 2, 4, c(rng)), (1, 2, 5, c(rng))], w)
        }
        _ => (3, vec![], (0..3).map(|_| c(rng)).collect()),
    };
    let base = LieAlgebraSpec::from_brackets_antisymmetric(
        (0..n).map(|i| format!("e{}", i + 1)).collect(),
        &br,
        vec![QMatrix::diagonal(&w)],
    )
    .unwrap();
    // random unipotent change of basis keeps P invertible
    let mut p = QMatrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            p[(i, j)] = small_rational(rng, 2, 2);
        }
    }
    let pinv = p.inverse().unwrap();
    let cols = p.cols_vec();
    let structure: Vec<Vec<Vec<Q>>> = (0..n)
        .map(|i| (0..n).map(|j| pinv.mul_vec(&base.bracket(&cols[i], &cols[j]))).collect())
        .collect();
    let d = pinv.mul(&base.derivations()[0]).mul(&p);
    LieAlgebraSpec::new(base.labels().to_vec(), structure, vec![d]).unwrap()
}
