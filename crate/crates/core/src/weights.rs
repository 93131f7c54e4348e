//! Weight decompositions under the A-action, conic subsets and tameness.

use crate::algebra::spec::LieAlgebraSpec;
use crate::error::{Error, Result};
use crate::linalg::{dot, intersect, rank_of, unit, vec_is_zero, QMatrix, QVec};
use crate::lp::{feasible_ge, verify_farkas, verify_point, Feasibility};
use crate::rational::{fmt_rational, lcm_denominators, one, q, zero, Q};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Characteristic polynomial `det(x I - m)`, coefficients from degree 0 up.
pub fn char_poly(m: &QMatrix) -> Vec<Q> {
    let n = m.nrows();
    let mut c = vec![zero(); n + 1];
    c[n] = one();
    let mut mk = QMatrix::zeros(n, n);
    for k in 1..=n {
        mk = m.mul(&mk).add(&QMatrix::identity(n).scale(&c[n - k + 1]));
        let am = m.mul(&mk);
        let tr = (0..n).fold(zero(), |acc, i| acc + &am[(i, i)]);
        c[n - k] = -tr / q(k as i64);
    }
    c
}

pub fn format_poly(c: &[Q]) -> String {
    let mut parts = Vec::new();
    for (i, a) in c.iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let coeff = fmt_rational(a);
        parts.push(match i {
            0 => coeff,
            1 => format!("({coeff})x"),
            _ => format!("({coeff})x^{i}"),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn eval_poly(c: &[Q], x: &Q) -> Q {
    c.iter().rev().fold(zero(), |acc, a| acc * x + a)
}

/// Divide by (x - r); assumes r is a root.
fn deflate(c: &[Q], r: &Q) -> Vec<Q> {
    let n = c.len() - 1;
    let mut out = vec![zero(); n];
    let mut carry = zero();
    for i in (1..=n).rev() {
        carry = &carry * r + &c[i];
        out[i - 1] = carry.clone();
    }
    out
}

const DIVISOR_SEARCH_LIMIT: u64 = 1 << 40;

fn positive_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n == 0 {
        return Some(vec![]);
    }
    if n > DIVISOR_SEARCH_LIMIT {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(BigInt::from(d));
            if d * d != n {
                large.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    Some(small)
}

/// Rational roots with multiplicity; `Err(residual)` if some root is not
/// rational (or the search space is too large to certify).
pub fn rational_roots(poly: &[Q]) -> std::result::Result<Vec<(Q, usize)>, Vec<Q>> {
    let mut p = poly.to_vec();
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    let mut roots: Vec<(Q, usize)> = Vec::new();
    let push = |roots: &mut Vec<(Q, usize)>, r: Q| {
        if let Some(e) = roots.iter_mut().find(|(x, _)| *x == r) {
            e.1 += 1;
        } else {
            roots.push((r, 1));
        }
    };
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
        push(&mut roots, zero());
    }
    while p.len() > 1 {
        let l = lcm_denominators(p.iter());
        let ints: Vec<BigInt> = p.iter().map(|a| (a * Q::from_integer(l.clone())).to_integer()).collect();
        let (Some(num_divs), Some(den_divs)) = (
            positive_divisors(&ints[0]),
            positive_divisors(ints.last().unwrap()),
        ) else {
            return Err(p);
        };
        let mut found = None;
        'search: for a in &num_divs {
            for b in &den_divs {
                for sign in [1, -1] {
                    let cand = Q::new(a * BigInt::from(sign), b.clone());
                    if eval_poly(&p, &cand).is_zero() {
                        found = Some(cand);
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(r) => {
                p = deflate(&p, &r);
                push(&mut roots, r);
            }
            None => return Err(p),
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(roots)
}

/// Commuting operators on a finite-dimensional rational vector space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AModule {
    pub dim: usize,
    pub action: Vec<QMatrix>,
    pub labels: Vec<String>,
}

impl AModule {
    pub fn new(dim: usize, action: Vec<QMatrix>, labels: Vec<String>) -> Result<Self> {
        for m in &action {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Structural("action matrix has wrong shape".into()));
            }
        }
        for (i, a) in action.iter().enumerate() {
            for b in &action[i + 1..] {
                if !a.commutator(b).is_zero() {
                    return Err(Error::Invalid("module action matrices do not commute".into()));
                }
            }
        }
        Ok(AModule { dim, action, labels })
    }

    pub fn of_spec(spec: &LieAlgebraSpec) -> Self {
        AModule {
            dim: spec.dim(),
            action: spec.derivations().to_vec(),
            labels: spec.labels().to_vec(),
        }
    }

    pub fn rank(&self) -> usize {
        self.action.len()
    }

    /// Joint generalized eigenspaces, sorted by weight.
    pub fn weight_spaces(&self) -> Result<Vec<(QVec, Vec<QVec>)>> {
        let n = self.dim;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut root_lists = Vec::new();
        for (m, a) in self.action.iter().enumerate() {
            let cp = char_poly(a);
            match rational_roots(&cp) {
                Ok(r) => root_lists.push(r.into_iter().map(|(x, _)| x).collect::<Vec<_>>()),
                Err(_) => {
                    return Err(Error::UnsupportedAction(format!(
                        "derivation {} has an irrational eigenvalue; characteristic polynomial {}",
                        m + 1,
                        format_poly(&cp)
                    )))
                }
            }
        }
        let whole: Vec<QVec> = (0..n).map(|i| unit(n, i)).collect();
        let mut pieces: Vec<(QVec, Vec<QVec>)> = vec![(Vec::new(), whole)];
        for (m, a) in self.action.iter().enumerate() {
            let mut next = Vec::new();
            for (w, space) in &pieces {
                for r in &root_lists[m] {
                    let ker = a.shift(r).pow(n).kernel();
                    let inter = intersect(space, &ker, n);
                    if !inter.is_empty() {
                        let mut w2 = w.clone();
                        w2.push(r.clone());
                        next.push((w2, inter));
                    }
                }
            }
            pieces = next;
        }
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        let total: usize = pieces.iter().map(|p| p.1.len()).sum();
        if total != n {
            return Err(Error::Internal(format!(
                "weight spaces have total dimension {total}, expected {n}"
            )));
        }
        Ok(pieces)
    }

    /// Basis of the generalized joint 0-eigenspace.
    pub fn zero_component(&self) -> Vec<QVec> {
        let n = self.dim;
        let mut space: Vec<QVec> = (0..n).map(|i| unit(n, i)).collect();
        for a in &self.action {
            if space.is_empty() {
                break;
            }
            let ker = a.pow(n).kernel();
            space = intersect(&space, &ker, n);
        }
        space
    }
}

/// `𝔲 = ⊕ 𝔲_α` with α ranging over rational weight vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightDecomposition {
    pub weights: Vec<QVec>,
    pub spaces: Vec<Vec<QVec>>,
    /// Positive integer L such that L·α is integral for every weight.
    pub scale: BigInt,
}

impl WeightDecomposition {
    pub fn dim(&self) -> usize {
        self.spaces.iter().map(|s| s.len()).sum()
    }

    pub fn index_of(&self, w: &[Q]) -> Option<usize> {
        self.weights.iter().position(|x| x.as_slice() == w)
    }

    /// Weights multiplied by `scale` (integral).
    pub fn integer_weights(&self) -> Vec<Vec<BigInt>> {
        let s = Q::from_integer(self.scale.clone());
        self.weights
            .iter()
            .map(|w| w.iter().map(|x| (x * &s).to_integer()).collect())
            .collect()
    }

    pub fn nonzero_weights(&self) -> Vec<QVec> {
        self.weights.iter().filter(|w| !vec_is_zero(w)).cloned().collect()
    }

    /// All basis vectors of the spaces, concatenated in weight order.
    pub fn adapted_basis(&self) -> Vec<QVec> {
        self.spaces.iter().flatten().cloned().collect()
    }

    /// First pair (α, β) whose bracket escapes 𝔲_{α+β}, if any.
    pub fn grading_violation(&self, spec: &LieAlgebraSpec) -> Option<(QVec, QVec)> {
        for (ia, a) in self.weights.iter().enumerate() {
            for (ib, b) in self.weights.iter().enumerate() {
                let sum: QVec = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let target = self.index_of(&sum).map(|i| &self.spaces[i]);
                for x in &self.spaces[ia] {
                    for y in &self.spaces[ib] {
                        let br = spec.bracket(x, y);
                        if vec_is_zero(&br) {
                            continue;
                        }
                        let ok = match target {
                            Some(t) => crate::linalg::in_span(t, &br),
                            None => false,
                        };
                        if !ok {
                            return Some((a.clone(), b.clone()));
                        }
                    }
                }
            }
        }
        None
    }
}

pub fn weight_decomposition(spec: &LieAlgebraSpec) -> Result<WeightDecomposition> {
    let pieces = AModule::of_spec(spec).weight_spaces()?;
    let (weights, spaces): (Vec<_>, Vec<_>) = pieces.into_iter().unzip();
    let scale = lcm_denominators(weights.iter().flatten());
    Ok(WeightDecomposition {
        weights,
        spaces,
        scale,
    })
}

/// A subset of the weights cut out by an open convex cone avoiding 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConicSubset {
    pub members: Vec<QVec>,
    /// The cone is `{x : f(x) > 0 for all f}`.
    pub functionals: Vec<QVec>,
}

impl ConicSubset {
    pub fn contains(&self, w: &[Q]) -> bool {
        self.members.iter().any(|m| m.as_slice() == w)
    }

    /// Re-check the witness against the full weight set.
    pub fn verify(&self, all_weights: &[QVec]) -> bool {
        if self.members.is_empty() || self.functionals.is_empty() {
            return false;
        }
        let in_cone = |w: &QVec| self.functionals.iter().all(|f| dot(f, w).is_positive());
        all_weights.iter().all(|w| in_cone(w) == self.contains(w))
            && self.members.iter().all(|m| all_weights.contains(m))
    }

    /// Sum of the functionals: strictly positive on every member.
    pub fn direction(&self) -> QVec {
        let d = self.functionals[0].len();
        self.functionals.iter().fold(vec![zero(); d], |acc, f| {
            acc.iter().zip(f).map(|(a, b)| a + b).collect()
        })
    }
}

pub const DEFAULT_CONIC_GUARD: usize = 20;

/// For `c` (all nonzero) and `others`, find functionals proving `c` is conic.
fn conic_witness(c: &[QVec], others: &[QVec], d: usize) -> Option<Vec<QVec>> {
    let rows_c: Vec<QVec> = c.to_vec();
    let mut fs = Vec::new();
    let targets: Vec<Option<&QVec>> = if others.is_empty() {
        vec![None]
    } else {
        others.iter().map(Some).collect()
    };
    for beta in targets {
        let mut rows = rows_c.clone();
        let mut rhs = vec![one(); c.len()];
        if let Some(b) = beta {
            rows.push(b.iter().map(|x| -x).collect());
            rhs.push(zero());
        }
        let a = QMatrix::from_rows_with_cols(&rows, d).unwrap();
        match feasible_ge(&a, &rhs) {
            Feasibility::Feasible(f) => {
                if !fs.contains(&f) {
                    fs.push(f);
                }
            }
            Feasibility::Infeasible(_) => return None,
        }
    }
    Some(fs)
}

/// All conic subsets of `weights`, ordered by size then lexicographically.
pub fn enumerate_conic_subsets(weights: &[QVec], guard: usize) -> Result<Vec<ConicSubset>> {
    if weights.len() > guard {
        return Err(Error::Guard {
            what: "weight count".into(),
            value: weights.len(),
            limit: guard,
        });
    }
    let Some(d) = weights.first().map(|w| w.len()) else {
        return Ok(Vec::new());
    };
    let nonzero: Vec<QVec> = weights.iter().filter(|w| !vec_is_zero(w)).cloned().collect();
    let k = nonzero.len();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << k) {
        let c: Vec<QVec> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| nonzero[i].clone()).collect();
        let others: Vec<QVec> = (0..k).filter(|i| mask >> i & 1 == 0).map(|i| nonzero[i].clone()).collect();
        if let Some(functionals) = conic_witness(&c, &others, d) {
            out.push(ConicSubset {
                members: c,
                functionals,
            });
        }
    }
    out.sort_by(|a, b| a.members.len().cmp(&b.members.len()).then(a.members.cmp(&b.members)));
    Ok(out)
}

/// Conic subsets not strictly contained in another, sorted by their
/// direction functional.
pub fn maximal_conic_subsets(all: &[ConicSubset]) -> Vec<ConicSubset> {
    let mut out: Vec<ConicSubset> = all
        .iter()
        .filter(|c| {
            !all.iter().any(|o| {
                o.members.len() > c.members.len() && c.members.iter().all(|m| o.contains(m))
            })
        })
        .cloned()
        .collect();
    out.sort_by(|a, b| a.direction().cmp(&b.direction()).then(a.members.cmp(&b.members)));
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TameOutcome {
    /// α(a) ≤ −1 for every weight α.
    Witness(QVec),
    /// y ≥ 0 with Σ y_α α = 0 and Σ y_α > 0: 0 lies in the convex hull.
    Farkas(QVec),
}

fn tame_system(weights: &[QVec], d: usize) -> (QMatrix, QVec) {
    let rows: Vec<QVec> = weights.iter().map(|w| w.iter().map(|x| -x).collect()).collect();
    (QMatrix::from_rows_with_cols(&rows, d).unwrap(), vec![one(); weights.len()])
}

/// Find `a` with `α(a) ≤ −1` for all weights, scaled to be integral.
pub fn tame_witness(weights: &[QVec], d: usize) -> TameOutcome {
    let (a, b) = tame_system(weights, d);
    match feasible_ge(&a, &b) {
        Feasibility::Feasible(x) => {
            let l = Q::from_integer(lcm_denominators(x.iter()));
            TameOutcome::Witness(x.iter().map(|v| v * &l).collect())
        }
        Feasibility::Infeasible(y) => TameOutcome::Farkas(y),
    }
}

pub fn verify_tame_outcome(weights: &[QVec], d: usize, outcome: &TameOutcome) -> bool {
    let (a, b) = tame_system(weights, d);
    match outcome {
        TameOutcome::Witness(x) => x.len() == d && verify_point(&a, &b, x),
        TameOutcome::Farkas(y) => verify_farkas(&a, &b, y),
    }
}

/// Restriction of `spec` to ⊕_{α∈C} 𝔲_α, with basis taken from the
/// decomposition in weight order.
pub fn tame_subalgebra(
    spec: &LieAlgebraSpec,
    dec: &WeightDecomposition,
    c: &ConicSubset,
) -> Result<(LieAlgebraSpec, Vec<QVec>)> {
    let mut basis = Vec::new();
    for m in &c.members {
        let i = dec.index_of(m).ok_or_else(|| {
            Error::Internal("conic subset member is not a weight of the algebra".into())
        })?;
        basis.extend(dec.spaces[i].iter().cloned());
    }
    let labels = (1..=basis.len()).map(|i| format!("f{i}")).collect();
    let sub = spec.restrict(&basis, labels)?;
    Ok((sub, basis))
}

/// Weights of the induced action on 𝔲/[𝔲,𝔲].
pub fn abelianization_module(spec: &LieAlgebraSpec) -> Result<AModule> {
    let n = spec.dim();
    let derived = spec.derived_algebra();
    let all: Vec<QVec> = (0..n).map(|i| unit(n, i)).collect();
    let reps = crate::linalg::quotient_representatives(&all, &derived, n);
    induced_quotient_action(spec.derivations(), &reps, &derived, n).map(|action| AModule {
        dim: reps.len(),
        action,
        labels: (1..=reps.len()).map(|i| format!("q{i}")).collect(),
    })
}

/// Matrices of operators on `reps` modulo `small` (in ambient dimension `dim`).
pub fn induced_quotient_action(
    ops: &[QMatrix],
    reps: &[QVec],
    small: &[QVec],
    dim: usize,
) -> Result<Vec<QMatrix>> {
    let small_rref = QMatrix::from_rows_with_cols(small, dim).unwrap().rref();
    let reduced_reps: Vec<QVec> = reps.iter().map(|r| crate::linalg::reduce_mod(r, &small_rref)).collect();
    let basis_mat = QMatrix::from_cols(&reduced_reps, dim);
    let mut out = Vec::new();
    for op in ops {
        let mut cols = Vec::new();
        for r in reps {
            let img = crate::linalg::reduce_mod(&op.mul_vec(r), &small_rref);
            let c = basis_mat.solve(&img).ok_or_else(|| {
                Error::Internal("operator does not preserve the quotient".into())
            })?;
            cols.push(c);
        }
        out.push(QMatrix::from_cols(&cols, reps.len()));
    }
    Ok(out)
}

/// Independence check used by callers that assemble bases by hand.
pub fn is_basis(vectors: &[QVec], dim: usize) -> bool {
    vectors.len() == dim && rank_of(vectors, dim) == dim
}

/// Whether every weight lies strictly on one side of a hyperplane.
pub fn in_open_half_space(weights: &[QVec], d: usize) -> bool {
    matches!(tame_witness(weights, d), TameOutcome::Witness(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::rational::{q, qr};

    fn w1(xs: &[i64]) -> Vec<QVec> {
        xs.iter().map(|&x| vec![q(x)]).collect()
    }

    #[test]
    fn char_poly_and_roots() {
        let m = QMatrix::from_i64(&[&[2, 1], &[0, 2]]);
        let cp = char_poly(&m);
        assert_eq!(cp, vec![q(4), q(-4), q(1)]);
        assert_eq!(rational_roots(&cp).unwrap(), vec![(q(2), 2)]);
        let rot = QMatrix::from_i64(&[&[0, -1], &[1, 0]]);
        assert!(rational_roots(&char_poly(&rot)).is_err());
        let half = QMatrix::diagonal(&[qr(1, 2), qr(-3, 4)]);
        let r = rational_roots(&char_poly(&half)).unwrap();
        assert_eq!(r, vec![(qr(-3, 4), 1), (qr(1, 2), 1)]);
    }

    #[test]
    fn heisenberg_tame_weights() {
        let s = presets::heisenberg(vec![QMatrix::diagonal(&[q(1), q(1), q(2)])]);
        let d = weight_decomposition(&s).unwrap();
        assert_eq!(d.weights, w1(&[1, 2]));
        assert_eq!(d.spaces[0].len(), 2);
        assert_eq!(d.spaces[1].len(), 1);
        assert!(d.grading_violation(&s).is_none());
    }

    #[test]
    fn zero_derivation_single_weight() {
        let s = presets::heisenberg(vec![QMatrix::zeros(3, 3)]);
        let d = weight_decomposition(&s).unwrap();
        assert_eq!(d.weights, w1(&[0]));
        assert_eq!(d.spaces[0].len(), 3);
    }

    #[test]
    fn irrational_eigenvalue_reported() {
        let rot = QMatrix::from_i64(&[&[0, -2], &[1, 0]]);
        let s = LieAlgebraSpec::from_sparse(LieAlgebraSpec::default_labels(2), &[], vec![rot]).unwrap();
        let e = weight_decomposition(&s).unwrap_err();
        match e {
            Error::UnsupportedAction(msg) => {
                assert!(msg.contains("derivation 1"));
                assert!(msg.contains("x^2"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_components() {
        let mixed = presets::heisenberg(vec![QMatrix::diagonal(&[q(1), q(-1), q(0)])]);
        let z = AModule::of_spec(&mixed).zero_component();
        assert_eq!(z, vec![unit(3, 2)]);
        let tame = presets::heisenberg(vec![QMatrix::diagonal(&[q(1), q(1), q(2)])]);
        let ab = abelianization_module(&tame).unwrap();
        assert!(ab.zero_component().is_empty());
        let trivial = presets::heisenberg(vec![QMatrix::zeros(3, 3)]);
        assert_eq!(AModule::of_spec(&trivial).zero_component().len(), 3);
    }

    #[test]
    fn conic_subsets_one_dimensional() {
        let c = enumerate_conic_subsets(&w1(&[-1, 1]), 20).unwrap();
        let members: Vec<_> = c.iter().map(|x| x.members.clone()).collect();
        assert_eq!(members, vec![w1(&[-1]), w1(&[1])]);
        for x in &c {
            assert!(x.verify(&w1(&[-1, 1])));
        }
        // an open half-line containing 1 also contains 2
        let c = enumerate_conic_subsets(&w1(&[1, 2]), 20).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].members, w1(&[1, 2]));
        assert!(enumerate_conic_subsets(&w1(&[0]), 20).unwrap().is_empty());
        let many: Vec<QVec> = (1..=21).map(|i| vec![q(i)]).collect();
        assert!(matches!(enumerate_conic_subsets(&many, 20), Err(Error::Guard { .. })));
    }

    #[test]
    fn conic_subsets_rank_two() {
        let w = vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(-1), q(-1)]];
        let c = enumerate_conic_subsets(&w, 20).unwrap();
        assert_eq!(c.len(), 6);
        assert!(c.iter().all(|x| x.verify(&w)));
        assert_eq!(maximal_conic_subsets(&c).len(), 3);
    }

    #[test]
    fn tame_witness_examples() {
        match tame_witness(&w1(&[1, 2]), 1) {
            TameOutcome::Witness(a) => assert_eq!(a, vec![q(-1)]),
            other => panic!("{other:?}"),
        }
        let o = tame_witness(&w1(&[1, -1]), 1);
        assert!(matches!(o, TameOutcome::Farkas(_)));
        assert!(verify_tame_outcome(&w1(&[1, -1]), 1, &o));
        let w = vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(-1), q(-1)]];
        let o = tame_witness(&w, 2);
        assert!(matches!(o, TameOutcome::Farkas(_)));
        assert!(verify_tame_outcome(&w, 2, &o));
    }

    #[test]
    fn tame_subalgebras() {
        let tame = presets::heisenberg(vec![QMatrix::diagonal(&[q(1), q(1), q(2)])]);
        let dec = weight_decomposition(&tame).unwrap();
        let c = enumerate_conic_subsets(&dec.weights, 20).unwrap();
        let (sub, _) = tame_subalgebra(&tame, &dec, &c[0]).unwrap();
        assert_eq!(sub.dim(), 3);
        assert!(sub.validate().is_valid());

        let mixed = presets::heisenberg(vec![QMatrix::diagonal(&[q(1), q(-1), q(0)])]);
        let dec = weight_decomposition(&mixed).unwrap();
        let c = enumerate_conic_subsets(&dec.weights, 20).unwrap();
        let plus = c.iter().find(|x| x.members == w1(&[1])).unwrap();
        let (sub, basis) = tame_subalgebra(&mixed, &dec, plus).unwrap();
        assert_eq!(sub.dim(), 1);
        assert!(sub.is_abelian());
        assert_eq!(basis, vec![unit(3, 0)]);
    }
}
