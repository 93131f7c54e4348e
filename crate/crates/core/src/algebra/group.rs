//! The group U ⋊ A in exponential coordinates.
//!
//! An element is stored as `g = a · exp(u)` with `a ∈ A ≅ R^d` on the left.
//! Conjugation by `a` acts on 𝔲 as
//! `adjoint(a, X) = Σ_α 2^{α(a)} · exp(Σ_m a_m N_m) · Π_α X`,
//! where `Π_α` projects onto the generalized weight space and `N_m` is the
//! nilpotent part of `D_m`. A-coordinates are in log2 units, so the action is
//! exact whenever every `α(a)` is an integer.

use super::bch::BchTable;
use super::spec::LieAlgebraSpec;
use crate::error::{Error, Result};
use crate::interval::{pow2_enclosure, RatInterval};
use crate::linalg::{dot, vec_add, vec_neg, vec_zero, QMatrix, QVec};
use crate::rational::{fmt_rational, one, pow2_exact, to_f64, zero, Q};
use crate::weights::{weight_decomposition, WeightDecomposition};
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub a: QVec,
    pub u: QVec,
}

impl GroupElement {
    pub fn new(a: QVec, u: QVec) -> Self {
        GroupElement { a, u }
    }

    pub fn is_identity(&self) -> bool {
        self.a.iter().all(|x| x.is_zero()) && self.u.iter().all(|x| x.is_zero())
    }

    pub fn in_a(&self) -> bool {
        self.u.iter().all(|x| x.is_zero())
    }

    pub fn in_u(&self) -> bool {
        self.a.iter().all(|x| x.is_zero())
    }

    pub fn to_f64(&self) -> GroupF {
        GroupF {
            a: self.a.iter().map(to_f64).collect(),
            u: self.u.iter().map(to_f64).collect(),
        }
    }
}

/// Floating-point counterpart used by the filling engine.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupF {
    pub a: Vec<f64>,
    pub u: Vec<f64>,
}

impl GroupF {
    pub fn identity(d: usize, n: usize) -> Self {
        GroupF {
            a: vec![0.0; d],
            u: vec![0.0; n],
        }
    }

    /// Euclidean norm of the concatenated coordinates (a, u).
    pub fn coord_norm(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.u)
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}

/// Precomputed arithmetic context for one spec.
#[derive(Clone, Debug)]
pub struct SolvableGroup {
    spec: LieAlgebraSpec,
    class: usize,
    bch: BchTable,
    dec: WeightDecomposition,
    projectors: Vec<QMatrix>,
    nilpotent: Vec<QMatrix>,
    structure_f64: Vec<Vec<Vec<f64>>>,
    projectors_f64: Vec<Vec<Vec<f64>>>,
    nilpotent_f64: Vec<Vec<Vec<f64>>>,
    weights_f64: Vec<Vec<f64>>,
}

fn to_f64_matrix(m: &QMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(to_f64).collect())
        .collect()
}

impl SolvableGroup {
    pub fn new(spec: LieAlgebraSpec) -> Result<Self> {
        spec.require_valid()?;
        let class = spec.nilpotency_class().expect("validated spec is nilpotent");
        let dec = weight_decomposition(&spec)?;
        let n = spec.dim();
        let basis = dec.adapted_basis();
        let p = QMatrix::from_cols(&basis, n);
        let p_inv = p.inverse().ok_or_else(|| {
            Error::Internal("weight spaces do not form a basis".into())
        })?;
        let mut projectors = Vec::new();
        let mut offset = 0;
        for space in &dec.spaces {
            let mut e = QMatrix::zeros(n, n);
            for k in offset..offset + space.len() {
                e[(k, k)] = one();
            }
            offset += space.len();
            projectors.push(p.mul(&e).mul(&p_inv));
        }
        let mut nilpotent = Vec::new();
        for (m, d) in spec.derivations().iter().enumerate() {
            let mut s = QMatrix::zeros(n, n);
            for (w, pr) in dec.weights.iter().zip(&projectors) {
                s = s.add(&pr.scale(&w[m]));
            }
            let nm = d.sub(&s);
            if !nm.is_nilpotent() {
                return Err(Error::Internal(format!(
                    "derivation {} minus its semisimple part is not nilpotent",
                    m + 1
                )));
            }
            nilpotent.push(nm);
        }
        let structure_f64 = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| spec.basis_bracket(i, j).iter().map(to_f64).collect())
                    .collect()
            })
            .collect();
        Ok(SolvableGroup {
            class,
            bch: BchTable::new(class),
            projectors_f64: projectors.iter().map(to_f64_matrix).collect(),
            nilpotent_f64: nilpotent.iter().map(to_f64_matrix).collect(),
            weights_f64: dec.weights.iter().map(|w| w.iter().map(to_f64).collect()).collect(),
            structure_f64,
            dec,
            projectors,
            nilpotent,
            spec,
        })
    }

    pub fn spec(&self) -> &LieAlgebraSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn rank(&self) -> usize {
        self.spec.rank()
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn decomposition(&self) -> &WeightDecomposition {
        &self.dec
    }

    pub fn bch_table(&self) -> &BchTable {
        &self.bch
    }

    pub fn projectors(&self) -> &[QMatrix] {
        &self.projectors
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::new(vec_zero(self.rank()), vec_zero(self.dim()))
    }

    pub fn from_u(&self, u: QVec) -> GroupElement {
        GroupElement::new(vec_zero(self.rank()), u)
    }

    pub fn from_a(&self, a: QVec) -> GroupElement {
        GroupElement::new(a, vec_zero(self.dim()))
    }

    /// `log(exp x · exp y)`, exact.
    pub fn bch(&self, x: &[Q], y: &[Q]) -> QVec {
        let spec = &self.spec;
        self.bch.apply(
            &x.to_vec(),
            &y.to_vec(),
            |p, q| spec.bracket(p, q),
            |acc, v, t| {
                for (o, x) in acc.iter_mut().zip(v) {
                    if !x.is_zero() {
                        *o += &t.coeff * x;
                    }
                }
            },
            vec_zero(self.dim()),
        )
    }

    /// `exp(Σ a_m N_m)` as a matrix.
    pub fn unipotent_factor(&self, a: &[Q]) -> QMatrix {
        let n = self.dim();
        let mut m = QMatrix::zeros(n, n);
        for (am, nm) in a.iter().zip(&self.nilpotent) {
            if !am.is_zero() {
                m = m.add(&nm.scale(am));
            }
        }
        let mut out = QMatrix::identity(n);
        let mut term = QMatrix::identity(n);
        for k in 1..n {
            term = term.mul(&m).scale(&Q::new(1.into(), (k as i64).into()));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
        }
        out
    }

    /// Exact weight values α(a), failing unless all are integers.
    fn integral_scalings(&self, a: &[Q]) -> Result<Vec<Q>> {
        self.dec
            .weights
            .iter()
            .map(|w| {
                let e = dot(w, a);
                pow2_exact(&e).ok_or_else(|| Error::NonIntegralExponent {
                    weight: w.iter().map(fmt_rational).collect::<Vec<_>>().join(","),
                    exponent: fmt_rational(&e),
                })
            })
            .collect()
    }

    /// Matrix of `adjoint(a, ·) = log(a exp(·) a⁻¹)`.
    pub fn adjoint_matrix(&self, a: &[Q]) -> Result<QMatrix> {
        let scal = self.integral_scalings(a)?;
        let n = self.dim();
        let mut s = QMatrix::zeros(n, n);
        for (c, pr) in scal.iter().zip(&self.projectors) {
            s = s.add(&pr.scale(c));
        }
        Ok(self.unipotent_factor(a).mul(&s))
    }

    pub fn adjoint(&self, a: &[Q], x: &[Q]) -> Result<QVec> {
        if a.iter().all(|v| v.is_zero()) {
            return Ok(x.to_vec());
        }
        Ok(self.adjoint_matrix(a)?.mul_vec(x))
    }

    /// Rational enclosure of `adjoint(a, x)` for arbitrary rational `a`.
    pub fn adjoint_interval(&self, a: &[Q], x: &[Q], bits: u32) -> Vec<RatInterval> {
        let n = self.dim();
        let e = self.unipotent_factor(a);
        let mut acc: Vec<RatInterval> = vec![RatInterval::point(zero()); n];
        for (w, pr) in self.dec.weights.iter().zip(&self.projectors) {
            let factor = pow2_enclosure(&dot(w, a), bits);
            let v = e.mul_vec(&pr.mul_vec(x));
            for (slot, c) in acc.iter_mut().zip(&v) {
                *slot = slot.add(&factor.scale(c));
            }
        }
        acc
    }

    /// `g · h` for `g = a1 exp(x1)`, `h = a2 exp(x2)`:
    /// `(a1 + a2) · exp(bch(adjoint(-a2, x1), x2))`.
    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        let neg_a2 = vec_neg(&h.a);
        let twisted = self.adjoint(&neg_a2, &g.u)?;
        Ok(GroupElement::new(vec_add(&g.a, &h.a), self.bch(&twisted, &h.u)))
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        let u = self.adjoint(&g.a, &vec_neg(&g.u))?;
        Ok(GroupElement::new(vec_neg(&g.a), u))
    }

    pub fn product(&self, elems: &[GroupElement]) -> Result<GroupElement> {
        elems
            .iter()
            .try_fold(self.identity(), |acc, e| self.mul(&acc, e))
    }

    /// `g h g⁻¹`
    pub fn conjugate(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        let gh = self.mul(g, h)?;
        self.mul(&gh, &self.inverse(g)?)
    }

    // ----- floating point -----

    pub fn bracket_f64(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                let xy = x[i] * y[j];
                for (o, c) in out.iter_mut().zip(&self.structure_f64[i][j]) {
                    *o += xy * c;
                }
            }
        }
        out
    }

    pub fn bch_f64(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        if self.spec.is_abelian() {
            return x.iter().zip(y).map(|(a, b)| a + b).collect();
        }
        self.bch.apply(
            &x.to_vec(),
            &y.to_vec(),
            |p, q| self.bracket_f64(p, q),
            |acc, v, t| {
                for (o, x) in acc.iter_mut().zip(v) {
                    *o += t.coeff_f64 * x;
                }
            },
            vec![0.0; self.dim()],
        )
    }

    pub fn adjoint_f64(&self, a: &[f64], x: &[f64]) -> Vec<f64> {
        if a.iter().all(|v| *v == 0.0) {
            return x.to_vec();
        }
        let n = self.dim();
        let mut s = vec![0.0; n];
        for (w, pr) in self.weights_f64.iter().zip(&self.projectors_f64) {
            let c = 2f64.powf(w.iter().zip(a).map(|(p, q)| p * q).sum());
            for i in 0..n {
                let mut v = 0.0;
                for j in 0..n {
                    v += pr[i][j] * x[j];
                }
                s[i] += c * v;
            }
        }
        // unipotent factor
        let mut m = vec![vec![0.0; n]; n];
        let mut any = false;
        for (am, nm) in a.iter().zip(&self.nilpotent_f64) {
            if *am != 0.0 && nm.iter().flatten().any(|v| *v != 0.0) {
                any = true;
                for i in 0..n {
                    for j in 0..n {
                        m[i][j] += am * nm[i][j];
                    }
                }
            }
        }
        if !any {
            return s;
        }
        let mut out = s.clone();
        let mut term = s;
        for k in 1..n {
            let mut next = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    next[i] += m[i][j] * term[j];
                }
                next[i] /= k as f64;
            }
            term = next;
            for i in 0..n {
                out[i] += term[i];
            }
        }
        out
    }

    pub fn mul_f64(&self, g: &GroupF, h: &GroupF) -> GroupF {
        let neg: Vec<f64> = h.a.iter().map(|x| -x).collect();
        let twisted = self.adjoint_f64(&neg, &g.u);
        GroupF {
            a: g.a.iter().zip(&h.a).map(|(x, y)| x + y).collect(),
            u: self.bch_f64(&twisted, &h.u),
        }
    }

    pub fn inverse_f64(&self, g: &GroupF) -> GroupF {
        let negu: Vec<f64> = g.u.iter().map(|x| -x).collect();
        GroupF {
            a: g.a.iter().map(|x| -x).collect(),
            u: self.adjoint_f64(&g.a, &negu),
        }
    }

    /// `g⁻¹ h` without forming the inverse separately.
    pub fn left_quotient_f64(&self, g: &GroupF, h: &GroupF) -> GroupF {
        self.mul_f64(&self.inverse_f64(g), h)
    }

    pub fn identity_f64(&self) -> GroupF {
        GroupF::identity(self.rank(), self.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::rational::{q, qr};

    #[test]
    fn heisenberg_bch_example() {
        let g = SolvableGroup::new(presets::heisenberg(vec![])).unwrap();
        let z = g.bch(&[q(1), q(0), q(0)], &[q(0), q(1), q(0)]);
        assert_eq!(z, vec![q(1), q(1), qr(1, 2)]);
        let x = vec![q(3), qr(-1, 2), q(7)];
        assert!(g.bch(&x, &vec_neg(&x)).iter().all(|v| v.is_zero()));
    }

    #[test]
    fn adjoint_diagonal_scaling() {
        let g = SolvableGroup::new(presets::heisenberg(vec![QMatrix::diagonal(&[
            q(1),
            q(-1),
            q(0),
        ])]))
        .unwrap();
        assert_eq!(g.adjoint(&[q(3)], &[q(1), q(1), q(1)]).unwrap(), vec![q(8), qr(1, 8), q(1)]);
        assert!(matches!(
            g.adjoint(&[qr(1, 2)], &[q(1), q(0), q(0)]),
            Err(Error::NonIntegralExponent { .. })
        ));
        let enc = g.adjoint_interval(&[qr(1, 2)], &[q(1), q(0), q(0)], 30);
        assert!(enc[0].contains(&qr(1414213, 1000000)) || to_f64(&enc[0].lo) > 1.414);
    }

    #[test]
    fn nilpotent_part_enters_adjoint() {
        // D = [[1,1],[0,1]] on abelian R^2: adjoint(a) = 2^a (I + a N)
        let d = QMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let s = LieAlgebraSpec::from_sparse(LieAlgebraSpec::default_labels(2), &[], vec![d]).unwrap();
        let g = SolvableGroup::new(s).unwrap();
        assert_eq!(g.adjoint(&[q(2)], &[q(0), q(1)]).unwrap(), vec![q(8), q(4)]);
    }

    #[test]
    fn inverse_and_identity() {
        let g = SolvableGroup::new(presets::heisenberg(vec![QMatrix::diagonal(&[
            q(1),
            q(1),
            q(2),
        ])]))
        .unwrap();
        let x = GroupElement::new(vec![q(2)], vec![qr(1, 3), q(-2), qr(5, 7)]);
        let inv = g.inverse(&x).unwrap();
        assert!(g.mul(&x, &inv).unwrap().is_identity());
        assert!(g.mul(&inv, &x).unwrap().is_identity());
        assert_eq!(g.mul(&x, &g.identity()).unwrap(), x);
    }

    #[test]
    fn float_matches_exact() {
        let g = SolvableGroup::new(presets::heisenberg(vec![QMatrix::diagonal(&[
            q(1),
            q(1),
            q(2),
        ])]))
        .unwrap();
        let x = GroupElement::new(vec![q(2)], vec![qr(1, 3), q(-2), qr(5, 7)]);
        let y = GroupElement::new(vec![q(-1)], vec![q(4), qr(1, 9), q(-3)]);
        let e = g.mul(&x, &y).unwrap().to_f64();
        let f = g.mul_f64(&x.to_f64(), &y.to_f64());
        for (a, b) in e.u.iter().zip(&f.u) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
