//! Nilpotent Lie algebras by structure constants, with a derivation action.

use crate::error::{Error, Result};
use crate::linalg::{in_span, rank_of, vec_is_zero, vec_sub, vec_zero, QMatrix, QVec};
use crate::rational::{zero, Q};
use num_traits::Zero;
use serde::Serialize;
use std::fmt;

/// `[e_i, e_j] = sum_k c[i][j][k] e_k`, plus commuting derivations `D_m`
/// acting on column vectors (`D e_j` is column `j`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebraSpec {
    dim: usize,
    labels: Vec<String>,
    structure: Vec<Vec<QVec>>,
    derivations: Vec<QMatrix>,
}

/// One violated invariant. Indices are 1-based to match basis labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Antisymmetry { i: usize, j: usize, k: usize },
    Jacobi { i: usize, j: usize, k: usize },
    Nilpotency { series_dims: Vec<usize> },
    Derivation { m: usize, i: usize, j: usize },
    Commutation { m: usize, l: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Antisymmetry { i, j, k } => write!(f, "antisymmetry fails at ({i},{j},{k})"),
            Violation::Jacobi { i, j, k } => write!(f, "Jacobi identity fails on (e{i},e{j},e{k})"),
            Violation::Nilpotency { series_dims } => {
                write!(f, "lower central series stalls at dimensions {series_dims:?}")
            }
            Violation::Derivation { m, i, j } => {
                write!(f, "D{m} is not a derivation on (e{i},e{j})")
            }
            Violation::Commutation { m, l } => write!(f, "D{m} and D{l} do not commute"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl LieAlgebraSpec {
    /// Build from a dense structure tensor. Only shapes are checked here;
    /// call [`validate`](Self::validate) for the algebraic invariants.
    pub fn new(
        labels: Vec<String>,
        structure: Vec<Vec<QVec>>,
        derivations: Vec<QMatrix>,
    ) -> Result<Self> {
        let dim = labels.len();
        if dim == 0 {
            return Err(Error::Structural("dimension must be positive".into()));
        }
        if structure.len() != dim {
            return Err(Error::Structural(format!(
                "structure tensor has {} slices, expected {dim}",
                structure.len()
            )));
        }
        for (i, slice) in structure.iter().enumerate() {
            if slice.len() != dim || slice.iter().any(|v| v.len() != dim) {
                return Err(Error::Structural(format!(
                    "structure slice {} is not {dim}x{dim}",
                    i + 1
                )));
            }
        }
        for (m, d) in derivations.iter().enumerate() {
            if d.nrows() != dim || d.ncols() != dim {
                return Err(Error::Structural(format!(
                    "derivation {} is {}x{}, expected {dim}x{dim}",
                    m + 1,
                    d.nrows(),
                    d.ncols()
                )));
            }
        }
        Ok(LieAlgebraSpec {
            dim,
            labels,
            structure,
            derivations,
        })
    }

    /// Build from sparse 0-based bracket entries `(i, j, k, c)` meaning
    /// `c[i][j][k] = c`. Entries are taken literally (no implied antisymmetry).
    pub fn from_sparse(
        labels: Vec<String>,
        brackets: &[(usize, usize, usize, Q)],
        derivations: Vec<QMatrix>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut c = vec![vec![vec_zero(n); n]; n];
        for (i, j, k, v) in brackets {
            if *i >= n || *j >= n || *k >= n {
                return Err(Error::Structural(format!(
                    "bracket index ({},{},{}) out of range for dimension {n}",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            c[*i][*j][*k] = v.clone();
        }
        Self::new(labels, c, derivations)
    }

    /// Like `from_sparse`, but each entry `(i,j,k,c)` with `i != j` also sets
    /// `c[j][i][k] = -c`.
    pub fn from_brackets_antisymmetric(
        labels: Vec<String>,
        brackets: &[(usize, usize, usize, Q)],
        derivations: Vec<QMatrix>,
    ) -> Result<Self> {
        let mut all = Vec::with_capacity(brackets.len() * 2);
        for (i, j, k, v) in brackets {
            all.push((*i, *j, *k, v.clone()));
            if i != j {
                all.push((*j, *i, *k, -v.clone()));
            }
        }
        Self::from_sparse(labels, &all, derivations)
    }

    pub fn default_labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("e{i}")).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Q {
        &self.structure[i][j][k]
    }

    pub fn basis_bracket(&self, i: usize, j: usize) -> &QVec {
        &self.structure[i][j]
    }

    pub fn derivations(&self) -> &[QMatrix] {
        &self.derivations
    }

    /// Rank d of the acting abelian group A.
    pub fn rank(&self) -> usize {
        self.derivations.len()
    }

    pub fn with_derivations(&self, derivations: Vec<QMatrix>) -> Result<Self> {
        Self::new(self.labels.clone(), self.structure.clone(), derivations)
    }

    /// Sparse 0-based nonzero entries, in lexicographic order.
    pub fn sparse_brackets(&self) -> Vec<(usize, usize, usize, Q)> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = &self.structure[i][j][k];
                    if !c.is_zero() {
                        out.push((i, j, k, c.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn bracket(&self, x: &[Q], y: &[Q]) -> QVec {
        let n = self.dim;
        let mut out = vec_zero(n);
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for k in 0..n {
                    let c = &self.structure[i][j][k];
                    if !c.is_zero() {
                        out[k] += &xy * c;
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad(x) = [x, .]`.
    pub fn ad(&self, x: &[Q]) -> QMatrix {
        let n = self.dim;
        let cols: Vec<QVec> = (0..n)
            .map(|j| self.bracket(x, &crate::linalg::unit(n, j)))
            .collect();
        QMatrix::from_cols(&cols, n)
    }

    pub fn is_abelian(&self) -> bool {
        self.structure
            .iter()
            .all(|s| s.iter().all(|v| vec_is_zero(v)))
    }

    /// Dimensions of g = g^1, g^2 = [g,g], g^3 = [g,g^2], ... up to n+1 terms
    /// or until zero.
    pub fn lower_central_series(&self) -> Vec<Vec<QVec>> {
        let n = self.dim;
        let mut series = vec![(0..n).map(|i| crate::linalg::unit(n, i)).collect::<Vec<_>>()];
        for _ in 0..n {
            let last = series.last().unwrap();
            if last.is_empty() {
                break;
            }
            let mut gens = Vec::new();
            for i in 0..n {
                for v in last {
                    let b = self.bracket(&crate::linalg::unit(n, i), v);
                    if !vec_is_zero(&b) {
                        gens.push(b);
                    }
                }
            }
            let basis = if gens.is_empty() {
                Vec::new()
            } else {
                QMatrix::from_rows_with_cols(&gens, n).unwrap().row_space()
            };
            let stalled = basis.len() == last.len();
            series.push(basis);
            if stalled {
                break;
            }
        }
        series
    }

    /// Smallest c with g^{c+1} = 0, or `None` if not nilpotent.
    pub fn nilpotency_class(&self) -> Option<usize> {
        let series = self.lower_central_series();
        series.iter().position(|s| s.is_empty()).map(|p| p.max(1))
    }

    /// Basis of the derived algebra [g, g].
    pub fn derived_algebra(&self) -> Vec<QVec> {
        self.lower_central_series()
            .get(1)
            .cloned()
            .unwrap_or_default()
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.dim;
        let mut v = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    let a = &self.structure[i][j][k];
                    let b = &self.structure[j][i][k];
                    if *a != -b.clone() {
                        v.push(Violation::Antisymmetry {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }
        let e = |i: usize| crate::linalg::unit(n, i);
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let t1 = self.bracket(&e(i), &self.bracket(&e(j), &e(k)));
                    let t2 = self.bracket(&e(j), &self.bracket(&e(k), &e(i)));
                    let t3 = self.bracket(&e(k), &self.bracket(&e(i), &e(j)));
                    let s = crate::linalg::vec_add(&crate::linalg::vec_add(&t1, &t2), &t3);
                    if !vec_is_zero(&s) {
                        v.push(Violation::Jacobi {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }
        let series = self.lower_central_series();
        if !series.last().map_or(true, |s| s.is_empty()) {
            v.push(Violation::Nilpotency {
                series_dims: series.iter().map(|s| s.len()).collect(),
            });
        }
        for (m, d) in self.derivations.iter().enumerate() {
            'pairs: for i in 0..n {
                for j in i + 1..n {
                    let lhs = d.mul_vec(self.basis_bracket(i, j));
                    let rhs = crate::linalg::vec_add(
                        &self.bracket(&d.col(i), &e(j)),
                        &self.bracket(&e(i), &d.col(j)),
                    );
                    if !vec_is_zero(&vec_sub(&lhs, &rhs)) {
                        v.push(Violation::Derivation {
                            m: m + 1,
                            i: i + 1,
                            j: j + 1,
                        });
                        continue 'pairs;
                    }
                }
            }
        }
        for m in 0..self.derivations.len() {
            for l in m + 1..self.derivations.len() {
                if !self.derivations[m]
                    .commutator(&self.derivations[l])
                    .is_zero()
                {
                    v.push(Violation::Commutation { m: m + 1, l: l + 1 });
                }
            }
        }
        ValidationReport { violations: v }
    }

    /// Validate and turn violations into an error.
    pub fn require_valid(&self) -> Result<()> {
        let r = self.validate();
        if r.is_valid() {
            Ok(())
        } else {
            let msgs: Vec<String> = r.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::Invalid(msgs.join("; ")))
        }
    }

    /// Restriction to the subalgebra spanned by the columns of `basis`.
    /// Fails if the span is not closed under the bracket or a derivation.
    pub fn restrict(&self, basis: &[QVec], labels: Vec<String>) -> Result<Self> {
        let n = self.dim;
        let k = basis.len();
        if rank_of(basis, n) != k {
            return Err(Error::Internal("restriction basis is dependent".into()));
        }
        let coords = |v: &QVec| -> Result<QVec> {
            crate::linalg::coordinates(basis, v).ok_or_else(|| {
                Error::Internal("vector escapes the subalgebra being restricted to".into())
            })
        };
        let mut structure = vec![vec![vec_zero(k); k]; k];
        for a in 0..k {
            for b in 0..k {
                let br = self.bracket(&basis[a], &basis[b]);
                if !in_span(basis, &br) {
                    return Err(Error::Internal(format!(
                        "bracket of subalgebra basis vectors {} and {} leaves the span",
                        a + 1,
                        b + 1
                    )));
                }
                structure[a][b] = coords(&br)?;
            }
        }
        let mut ders = Vec::new();
        for d in &self.derivations {
            let cols: Vec<QVec> = basis
                .iter()
                .map(|x| coords(&d.mul_vec(x)))
                .collect::<Result<_>>()?;
            ders.push(QMatrix::from_cols(&cols, k));
        }
        Self::new(labels, structure, ders)
    }

    pub fn zero_vector(&self) -> QVec {
        vec![zero(); self.dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::rational::q;

    fn heis() -> LieAlgebraSpec {
        presets::heisenberg(vec![])
    }

    #[test]
    fn heisenberg_is_valid() {
        assert!(heis().validate().is_valid());
        assert_eq!(heis().nilpotency_class(), Some(2));
    }

    #[test]
    fn asymmetric_entry_reported() {
        let s = LieAlgebraSpec::from_sparse(
            LieAlgebraSpec::default_labels(3),
            &[(0, 1, 2, q(1)), (1, 0, 2, q(1))],
            vec![],
        )
        .unwrap();
        let r = s.validate();
        assert_eq!(r.violations, vec![Violation::Antisymmetry { i: 1, j: 2, k: 3 }]);
    }

    #[test]
    fn sl2_not_nilpotent() {
        // [h,e]=2e, [h,f]=-2f, [e,f]=h with basis (h,e,f)
        let s = LieAlgebraSpec::from_brackets_antisymmetric(
            LieAlgebraSpec::default_labels(3),
            &[(0, 1, 1, q(2)), (0, 2, 2, q(-2)), (1, 2, 0, q(1))],
            vec![],
        )
        .unwrap();
        let r = s.validate();
        assert_eq!(
            r.violations,
            vec![Violation::Nilpotency {
                series_dims: vec![3, 3]
            }]
        );
    }

    #[test]
    fn non_derivation_reported() {
        let s = presets::heisenberg(vec![QMatrix::diagonal(&[q(1), q(1), q(1)])]);
        let r = s.validate();
        assert_eq!(r.violations, vec![Violation::Derivation { m: 1, i: 1, j: 2 }]);
    }

    #[test]
    fn structural_error_on_bad_shape() {
        let e = LieAlgebraSpec::new(
            LieAlgebraSpec::default_labels(2),
            vec![vec![vec_zero(2); 2]; 2],
            vec![QMatrix::zeros(3, 3)],
        );
        assert!(matches!(e, Err(Error::Structural(_))));
    }

    #[test]
    fn restriction_to_center() {
        let h = heis();
        let c = h
            .restrict(&[crate::linalg::unit(3, 2)], vec!["e3".into()])
            .unwrap();
        assert!(c.is_abelian());
        assert!(h
            .restrict(&[crate::linalg::unit(3, 0), crate::linalg::unit(3, 1)], vec!["a".into(), "b".into()])
            .is_err());
    }
}
