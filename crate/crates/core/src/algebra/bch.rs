//! Baker-Campbell-Hausdorff product via Dynkin's formula.
//!
//! Every term of Dynkin's series is a rational multiple of a right-nested
//! bracket `[w_1,[w_2,[...,w_N]]]` of a word `w` in the letters X, Y. The
//! table stores, for each word of length at most the nilpotency class, the
//! summed coefficient over all block decompositions of the word.

use crate::rational::{factorial, one, to_f64, zero, Q};
use num_traits::Zero;

/// Letter `false` is X, `true` is Y.
#[derive(Clone, Debug)]
pub struct BchTerm {
    pub word: Vec<bool>,
    pub coeff: Q,
    pub coeff_f64: f64,
}

#[derive(Clone, Debug)]
pub struct BchTable {
    class: usize,
    terms: Vec<BchTerm>,
}

impl BchTable {
    pub fn new(class: usize) -> Self {
        let mut terms = Vec::new();
        for len in 1..=class.max(1) {
            for bits in 0..(1u64 << len) {
                let word: Vec<bool> = (0..len).map(|i| bits >> (len - 1 - i) & 1 == 1).collect();
                // [.., a, a] vanishes
                if len >= 2 && word[len - 1] == word[len - 2] {
                    continue;
                }
                let c = dynkin_coefficient(&word);
                if !c.is_zero() {
                    terms.push(BchTerm {
                        coeff_f64: to_f64(&c),
                        word,
                        coeff: c,
                    });
                }
            }
        }
        BchTable { class, terms }
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn terms(&self) -> &[BchTerm] {
        &self.terms
    }

    /// `log(exp x exp y)` given a bracket on some vector type.
    pub fn apply<V: Clone>(
        &self,
        x: &V,
        y: &V,
        bracket: impl Fn(&V, &V) -> V,
        add_scaled: impl Fn(&mut V, &V, &BchTerm),
        zero_vec: V,
    ) -> V {
        let mut out = zero_vec;
        for t in &self.terms {
            let pick = |b: bool| if b { y } else { x };
            let mut v = pick(*t.word.last().unwrap()).clone();
            for &l in t.word[..t.word.len() - 1].iter().rev() {
                v = bracket(pick(l), &v);
            }
            add_scaled(&mut out, &v, t);
        }
        out
    }
}

/// Sum over decompositions of `word` into blocks `X^r Y^s` (r+s > 0) of
/// `(-1)^(k-1) / (k * N * prod r_i! s_i!)`, k the number of blocks.
fn dynkin_coefficient(word: &[bool]) -> Q {
    let n = word.len();
    // by_k[p][k]: sum of prod 1/(r!s!) over decompositions of word[..p] into k blocks
    let mut by_k = vec![vec![zero(); n + 1]; n + 1];
    by_k[0][0] = one();
    for start in 0..n {
        for k in 0..=start {
            if by_k[start][k].is_zero() {
                continue;
            }
            let base = by_k[start][k].clone();
            let mut r = 0;
            let mut s = 0;
            for end in start + 1..=n {
                if word[end - 1] {
                    s += 1;
                } else if s > 0 {
                    break; // X after Y: not of the form X^r Y^s
                } else {
                    r += 1;
                }
                let w = Q::new(1.into(), factorial(r) * factorial(s));
                by_k[end][k + 1] += &base * &w;
            }
        }
    }
    let mut total = zero();
    for k in 1..=n {
        let sign = if k % 2 == 1 { one() } else { -one() };
        total += sign * &by_k[n][k] / Q::from_integer(((k * n) as i64).into());
    }
    total
}
