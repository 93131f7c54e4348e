//! `H₂(𝔲) = ker d₂ / im d₃` and the Killing module `Sym²𝔲 / ⟨[x,y]⊙z − y⊙[x,z]⟩`,
//! both with the induced A-action.

use crate::algebra::spec::LieAlgebraSpec;
use crate::error::{Error, Result};
use crate::linalg::{quotient_representatives, rank_of, unit, vec_zero, QMatrix, QVec};
use crate::rational::Q;
use crate::weights::{induced_quotient_action, AModule};
use num_traits::Zero;

/// Lexicographic index pairs `(i, j)`, `i < j` (strict) or `i <= j`.
pub fn pair_basis(n: usize, strict: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if j > i || !strict {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn triple_basis(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                out.push((i, j, k));
            }
        }
    }
    out
}

fn wedge_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    // pairs (a, b) with a < i come first: Σ_{a<i} (n-1-a)
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn sym_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    i * (2 * n - i + 1) / 2 + (j - i)
}

/// `acc += c · (x ∧ y)` in ∧² coordinates.
fn add_wedge(acc: &mut [Q], n: usize, x: &[Q], y: &[Q], c: &Q) {
    for (a, xa) in x.iter().enumerate() {
        if xa.is_zero() {
            continue;
        }
        for (b, yb) in y.iter().enumerate() {
            if a == b || yb.is_zero() {
                continue;
            }
            let v = c * xa * yb;
            if a < b {
                acc[wedge_index(n, a, b)] += v;
            } else {
                acc[wedge_index(n, b, a)] -= v;
            }
        }
    }
}

/// `acc += c · (x ⊙ y)` in Sym² coordinates (`e_i ⊙ e_j = e_j ⊙ e_i`).
fn add_sym(acc: &mut [Q], n: usize, x: &[Q], y: &[Q], c: &Q) {
    for (a, xa) in x.iter().enumerate() {
        if xa.is_zero() {
            continue;
        }
        for (b, yb) in y.iter().enumerate() {
            if yb.is_zero() {
                continue;
            }
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            acc[sym_index(n, lo, hi)] += c * xa * yb;
        }
    }
}

/// Matrix of `d₂(e_i ∧ e_j) = -[e_i, e_j]`, shape `n × C(n,2)`.
pub fn boundary_d2(spec: &LieAlgebraSpec) -> QMatrix {
    let n = spec.dim();
    let cols: Vec<QVec> = pair_basis(n, true)
        .into_iter()
        .map(|(i, j)| spec.basis_bracket(i, j).iter().map(|x| -x.clone()).collect())
        .collect();
    QMatrix::from_cols(&cols, n)
}

/// Matrix of `d₃(x∧y∧z) = [x,y]∧z + [y,z]∧x + [z,x]∧y`, shape `C(n,2) × C(n,3)`.
/// Fails if `d₂ ∘ d₃ ≠ 0`.
pub fn boundary_d3(spec: &LieAlgebraSpec) -> Result<QMatrix> {
    let n = spec.dim();
    let m2 = n * (n - 1) / 2;
    let one = Q::from_integer(1.into());
    let cols: Vec<QVec> = triple_basis(n)
        .into_iter()
        .map(|(i, j, k)| {
            let mut v = vec_zero(m2);
            let (ei, ej, ek) = (unit(n, i), unit(n, j), unit(n, k));
            add_wedge(&mut v, n, spec.basis_bracket(i, j), &ek, &one);
            add_wedge(&mut v, n, spec.basis_bracket(j, k), &ei, &one);
            add_wedge(&mut v, n, spec.basis_bracket(k, i), &ej, &one);
            v
        })
        .collect();
    let d3 = QMatrix::from_cols(&cols, m2);
    if d3.ncols() > 0 && m2 > 0 && !boundary_d2(spec).mul(&d3).is_zero() {
        return Err(Error::Internal(
            "d2 . d3 is nonzero; the structure constants are not a Lie bracket".into(),
        ));
    }
    Ok(d3)
}

/// Leibniz extension of `d` to ∧²: `d(x∧y) = dx∧y + x∧dy`.
pub fn wedge_action(d: &QMatrix) -> QMatrix {
    let n = d.nrows();
    let one = Q::from_integer(1.into());
    let cols: Vec<QVec> = pair_basis(n, true)
        .into_iter()
        .map(|(i, j)| {
            let mut v = vec_zero(n * (n - 1) / 2);
            add_wedge(&mut v, n, &d.col(i), &unit(n, j), &one);
            add_wedge(&mut v, n, &unit(n, i), &d.col(j), &one);
            v
        })
        .collect();
    QMatrix::from_cols(&cols, n * (n - 1) / 2)
}

/// Leibniz extension of `d` to Sym²: `d(x⊙y) = dx⊙y + x⊙dy`.
pub fn sym_action(d: &QMatrix) -> QMatrix {
    let n = d.nrows();
    let one = Q::from_integer(1.into());
    let m = n * (n + 1) / 2;
    let cols: Vec<QVec> = pair_basis(n, false)
        .into_iter()
        .map(|(i, j)| {
            let mut v = vec_zero(m);
            add_sym(&mut v, n, &d.col(i), &unit(n, j), &one);
            add_sym(&mut v, n, &unit(n, i), &d.col(j), &one);
            v
        })
        .collect();
    QMatrix::from_cols(&cols, m)
}

/// Subquotient `kernel / image` of a rational space with induced action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientModule {
    pub ambient_dim: usize,
    pub kernel_basis: Vec<QVec>,
    pub image_basis: Vec<QVec>,
    pub quotient_basis: Vec<QVec>,
    pub action: Vec<QMatrix>,
    /// Names of the quotient representatives, e.g. `x∧z + y∧z`.
    pub labels: Vec<String>,
}

impl QuotientModule {
    fn build(
        ambient_dim: usize,
        kernel_basis: Vec<QVec>,
        image_basis: Vec<QVec>,
        ambient_action: &[QMatrix],
        basis_names: &[String],
    ) -> Result<Self> {
        let k = rank_of(&kernel_basis, ambient_dim);
        let mut joint = kernel_basis.clone();
        joint.extend(image_basis.iter().cloned());
        if rank_of(&joint, ambient_dim) != k {
            return Err(Error::Internal("image is not contained in the kernel".into()));
        }
        for (m, op) in ambient_action.iter().enumerate() {
            for (sub, name) in [(&kernel_basis, "kernel"), (&image_basis, "image")] {
                let r = rank_of(sub, ambient_dim);
                let mut ext = sub.clone();
                ext.extend(sub.iter().map(|v| op.mul_vec(v)));
                if rank_of(&ext, ambient_dim) != r {
                    return Err(Error::Internal(format!(
                        "derivation {} does not preserve the {name}",
                        m + 1
                    )));
                }
            }
        }
        let quotient_basis = quotient_representatives(&kernel_basis, &image_basis, ambient_dim);
        let action = induced_quotient_action(ambient_action, &quotient_basis, &image_basis, ambient_dim)?;
        let labels = quotient_basis
            .iter()
            .map(|v| describe(v, basis_names))
            .collect();
        Ok(QuotientModule {
            ambient_dim,
            kernel_basis,
            image_basis,
            quotient_basis,
            action,
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.quotient_basis.len()
    }

    pub fn module(&self) -> AModule {
        AModule {
            dim: self.dim(),
            action: self.action.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Representatives (in ambient coordinates) of the zero-weight part.
    pub fn zero_part(&self) -> Vec<QVec> {
        self.module()
            .zero_component()
            .iter()
            .map(|c| {
                let mut v = vec_zero(self.ambient_dim);
                for (ci, b) in c.iter().zip(&self.quotient_basis) {
                    if !ci.is_zero() {
                        for (o, x) in v.iter_mut().zip(b) {
                            *o += ci * x;
                        }
                    }
                }
                v
            })
            .collect()
    }
}

fn describe(v: &[Q], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (c, name) in v.iter().zip(names) {
        if c.is_zero() {
            continue;
        }
        let coeff = crate::rational::fmt_rational(c);
        parts.push(match coeff.as_str() {
            "1" => name.clone(),
            "-1" => format!("-{name}"),
            _ => format!("{coeff}*{name}"),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ").replace("+ -", "- ")
    }
}

pub fn wedge_names(spec: &LieAlgebraSpec) -> Vec<String> {
    let l = spec.labels();
    pair_basis(spec.dim(), true)
        .into_iter()
        .map(|(i, j)| format!("{}∧{}", l[i], l[j]))
        .collect()
}

pub fn sym_names(spec: &LieAlgebraSpec) -> Vec<String> {
    let l = spec.labels();
    pair_basis(spec.dim(), false)
        .into_iter()
        .map(|(i, j)| format!("{}⊙{}", l[i], l[j]))
        .collect()
}

pub fn h2(spec: &LieAlgebraSpec) -> Result<QuotientModule> {
    let n = spec.dim();
    let m2 = n * (n - 1) / 2;
    let d2 = boundary_d2(spec);
    let kernel = if m2 == 0 { Vec::new() } else { d2.kernel() };
    let image = if n < 3 { Vec::new() } else { boundary_d3(spec)?.transpose().row_space() };
    let action: Vec<QMatrix> = spec.derivations().iter().map(wedge_action).collect();
    QuotientModule::build(m2, kernel, image, &action, &wedge_names(spec))
}

/// The relation vectors `[e_i,e_j]⊙e_k − e_j⊙[e_i,e_k]` for all index triples.
pub fn killing_relations(spec: &LieAlgebraSpec) -> Vec<QVec> {
    let n = spec.dim();
    let m = n * (n + 1) / 2;
    let one = Q::from_integer(1.into());
    let minus = -one.clone();
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = vec_zero(m);
                add_sym(&mut v, n, spec.basis_bracket(i, j), &unit(n, k), &one);
                add_sym(&mut v, n, &unit(n, j), spec.basis_bracket(i, k), &minus);
                out.push(v);
            }
        }
    }
    out
}

pub fn killing_module(spec: &LieAlgebraSpec) -> Result<QuotientModule> {
    let n = spec.dim();
    let m = n * (n + 1) / 2;
    let whole: Vec<QVec> = (0..m).map(|i| unit(m, i)).collect();
    let image = QMatrix::from_rows_with_cols(&killing_relations(spec), m)
        .expect("uniform length")
        .row_space();
    let action: Vec<QMatrix> = spec.derivations().iter().map(sym_action).collect();
    QuotientModule::build(m, whole, image, &action, &sym_names(spec))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroParts {
    pub h2: QuotientModule,
    pub kill: QuotientModule,
    pub h2_zero: Vec<QVec>,
    pub kill_zero: Vec<QVec>,
}

impl ZeroParts {
    pub fn h2_zero_dim(&self) -> usize {
        self.h2_zero.len()
    }

    pub fn kill_zero_dim(&self) -> usize {
        self.kill_zero.len()
    }
}

/// Zero-weight parts of `H₂(𝔲)` and `Kill(𝔲)`. Fails if the induced action
/// has irrational eigenvalues.
pub fn zero_parts(spec: &LieAlgebraSpec) -> Result<ZeroParts> {
    let h = h2(spec)?;
    let k = killing_module(spec)?;
    // the decomposition must exist for the zero part to be meaningful
    h.module().weight_spaces()?;
    k.module().weight_spaces()?;
    Ok(ZeroParts {
        h2_zero: h.zero_part(),
        kill_zero: k.zero_part(),
        h2: h,
        kill: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{heisenberg, load_preset};
    use crate::rational::q;

    #[test]
    fn index_helpers_match_enumeration() {
        for n in 1..6 {
            for (t, (i, j)) in pair_basis(n, true).into_iter().enumerate() {
                assert_eq!(wedge_index(n, i, j), t);
            }
            for (t, (i, j)) in pair_basis(n, false).into_iter().enumerate() {
                assert_eq!(sym_index(n, i, j), t);
            }
        }
    }

    #[test]
    fn heisenberg_boundaries() {
        let s = heisenberg(vec![]);
        let d2 = boundary_d2(&s);
        assert_eq!((d2.nrows(), d2.ncols()), (3, 3));
        assert_eq!(d2.col(0), vec![q(0), q(0), q(-1)]);
        assert!(d2.col(1).iter().all(|x| x.is_zero()));
        assert!(boundary_d3(&s).unwrap().is_zero());
    }

    #[test]
    fn heisenberg_h2_and_kill() {
        let s = heisenberg(vec![QMatrix::diagonal(&[q(1), q(1), q(2)])]);
        let h = h2(&s).unwrap();
        assert_eq!(h.labels, vec!["x∧z", "y∧z"]);
        let k = killing_module(&s).unwrap();
        assert_eq!(k.labels, vec!["x⊙x", "x⊙y", "y⊙y"]);
        let z = zero_parts(&s).unwrap();
        assert_eq!((z.h2_zero_dim(), z.kill_zero_dim()), (0, 0));
    }

    #[test]
    fn mixed_heisenberg_kill_zero() {
        let z = zero_parts(&load_preset("heisenberg-mixed").unwrap()).unwrap();
        assert_eq!(z.kill_zero_dim(), 1);
        assert_eq!(z.kill_zero, vec![vec![q(0), q(1), q(0), q(0), q(0), q(0)]]);
    }

    #[test]
    fn abelian_rank_two() {
        let z = zero_parts(&load_preset("abelian3-rank2").unwrap()).unwrap();
        assert_eq!(z.h2.dim(), 3);
        assert_eq!(z.kill.dim(), 6);
        assert_eq!((z.h2_zero_dim(), z.kill_zero_dim()), (0, 0));
    }

    #[test]
    fn trivial_action_keeps_everything() {
        let s = heisenberg(vec![QMatrix::zeros(3, 3)]);
        let z = zero_parts(&s).unwrap();
        assert_eq!(z.h2_zero_dim(), 2);
        assert_eq!(z.kill_zero_dim(), 3);
    }
}
