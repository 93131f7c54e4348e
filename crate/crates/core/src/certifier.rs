//! Verdicts on Lipschitz 1-connectedness with replayable witnesses.
//!
//! Precedence: a Sol-type quotient, then tameness, then the homological
//! criterion (standard solvable, `H₂(𝔲)₀ = 0`, `Kill(𝔲)₀ = 0`, no Sol pair),
//! otherwise inconclusive.

use crate::algebra::spec::LieAlgebraSpec;
use crate::error::Result;
use crate::homology::zero_parts;
use crate::linalg::{dot, rank_of, vec_is_zero, QMatrix, QVec};
use crate::rational::{fmt_rational, ser, Q};
use crate::weights::{
    abelianization_module, tame_witness, verify_tame_outcome, weight_decomposition, TameOutcome,
};
use num_traits::{Signed, Zero};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "NotL1C-Sol")]
    NotL1CSol,
    #[serde(rename = "L1C-Tame")]
    L1CTame,
    #[serde(rename = "L1C-Theorem")]
    L1CTheorem,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::NotL1CSol => "NotL1C-Sol",
            Verdict::L1CTame => "L1C-Tame",
            Verdict::L1CTheorem => "L1C-Theorem",
            Verdict::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Weights of `𝔲/[𝔲,𝔲]` and its zero-weight dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StandardWitness {
    #[serde(serialize_with = "ser::vecs")]
    pub abelianization_weights: Vec<QVec>,
    pub zero_component_dim: usize,
}

impl StandardWitness {
    pub fn holds(&self) -> bool {
        self.zero_component_dim == 0
    }
}

/// A surjection `𝔲 → R²` given by two functionals that kill `[𝔲,𝔲]` and are
/// A-eigenvectors with weights α and β, where 0 lies strictly between α and β.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolQuotient {
    #[serde(serialize_with = "ser::vec")]
    pub alpha: QVec,
    #[serde(serialize_with = "ser::vec")]
    pub beta: QVec,
    /// Rows in dual coordinates of the basis of 𝔲.
    #[serde(serialize_with = "ser::vecs")]
    pub functionals: Vec<QVec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoSolPair {
    #[serde(serialize_with = "ser::vecs")]
    pub principal_weights: Vec<QVec>,
    pub pairs_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroPartWitness {
    pub module_dim: usize,
    pub zero_dim: usize,
    pub representatives: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub value: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Witness {
    SolPair {
        quotient: SolQuotient,
    },
    Tame {
        #[serde(serialize_with = "ser::vec")]
        a: QVec,
    },
    Theorem {
        standard_solvable: StandardWitness,
        h2_zero: ZeroPartWitness,
        kill_zero: ZeroPartWitness,
        no_sol_pair: NoSolPair,
        /// Convex weights `y` with `Σ y_α α = 0`: the group is not tame.
        #[serde(serialize_with = "ser::vec")]
        not_tame: QVec,
    },
    Checks {
        checks: Vec<Check>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub witness: Witness,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CertifyOptions {
    /// Skip the Sol-pair branch so the remaining hypotheses are reported.
    pub disable_sol_branch: bool,
}

pub fn principal_weights(spec: &LieAlgebraSpec) -> Result<Vec<QVec>> {
    Ok(abelianization_module(spec)?
        .weight_spaces()?
        .into_iter()
        .map(|(w, _)| w)
        .collect())
}

pub fn standard_solvable(spec: &LieAlgebraSpec) -> Result<(bool, StandardWitness)> {
    let m = abelianization_module(spec)?;
    let weights = m.weight_spaces()?.into_iter().map(|(w, _)| w).collect();
    let w = StandardWitness {
        abelianization_weights: weights,
        zero_component_dim: m.zero_component().len(),
    };
    Ok((w.holds(), w))
}

/// Whether 0 lies in the open segment between `a` and `b`, i.e. `b = -λa`
/// for some `λ > 0` with `a ≠ 0`.
pub fn zero_in_open_segment(a: &[Q], b: &[Q]) -> bool {
    if a.len() != b.len() || vec_is_zero(a) {
        return false;
    }
    let i = a.iter().position(|x| !x.is_zero()).unwrap();
    let lambda = -(&b[i] / &a[i]);
    lambda.is_positive() && a.iter().zip(b).all(|(x, y)| *y == -(&lambda * x))
}

fn first_opposite_pair(weights: &[QVec]) -> Option<(QVec, QVec)> {
    for (i, a) in weights.iter().enumerate() {
        for b in &weights[i + 1..] {
            if zero_in_open_segment(a, b) {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

/// Common eigenfunctional with weight `w` of the dual action that kills `[𝔲,𝔲]`.
fn eigen_functional(spec: &LieAlgebraSpec, w: &[Q]) -> Option<QVec> {
    let n = spec.dim();
    let mut rows: Vec<QVec> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let b = spec.basis_bracket(i, j);
            if !vec_is_zero(b) {
                rows.push(b.clone());
            }
        }
    }
    for (d, wm) in spec.derivations().iter().zip(w) {
        let t = d.transpose().shift(wm);
        rows.extend(t.rows_vec());
    }
    let m = QMatrix::from_rows_with_cols(&rows, n)?;
    m.kernel().into_iter().next()
}

/// A Sol-type quotient built from a pair of opposite principal weights.
pub fn sol_obstruction(spec: &LieAlgebraSpec) -> Result<Option<SolQuotient>> {
    let pw = principal_weights(spec)?;
    let Some((alpha, beta)) = first_opposite_pair(&pw) else {
        return Ok(None);
    };
    let fa = eigen_functional(spec, &alpha);
    let fb = eigen_functional(spec, &beta);
    match (fa, fb) {
        (Some(fa), Some(fb)) => Ok(Some(SolQuotient {
            alpha,
            beta,
            functionals: vec![fa, fb],
        })),
        _ => Err(crate::error::Error::Internal(
            "principal weight without a dual eigenvector".into(),
        )),
    }
}

pub fn verify_sol_quotient(spec: &LieAlgebraSpec, q: &SolQuotient) -> std::result::Result<(), String> {
    let n = spec.dim();
    if q.functionals.len() != 2 || q.functionals.iter().any(|f| f.len() != n) {
        return Err("expected two functionals on 𝔲".into());
    }
    if rank_of(&q.functionals, n) != 2 {
        return Err("functionals are dependent; the quotient is not 2-dimensional".into());
    }
    if !zero_in_open_segment(&q.alpha, &q.beta) {
        return Err("0 is not in the open segment between the weights".into());
    }
    for f in &q.functionals {
        for i in 0..n {
            for j in 0..n {
                if !dot(f, spec.basis_bracket(i, j)).is_zero() {
                    return Err(format!("functional does not kill [e{},e{}]", i + 1, j + 1));
                }
            }
        }
    }
    for (f, w) in q.functionals.iter().zip([&q.alpha, &q.beta]) {
        if w.len() != spec.rank() {
            return Err("weight has wrong length".into());
        }
        for (m, d) in spec.derivations().iter().enumerate() {
            let lhs = d.transpose().mul_vec(f);
            if lhs.iter().zip(f).any(|(x, y)| *x != &w[m] * y) {
                return Err(format!("functional is not an eigenvector of derivation {}", m + 1));
            }
        }
    }
    Ok(())
}

pub fn zero_witness(m: &crate::homology::QuotientModule, zero: &[QVec], names: &[String]) -> ZeroPartWitness {
    ZeroPartWitness {
        module_dim: m.dim(),
        zero_dim: zero.len(),
        representatives: zero
            .iter()
            .map(|v| {
                v.iter()
                    .zip(names)
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(c, n)| format!("{}*{}", fmt_rational(c), n))
                    .collect::<Vec<_>>()
                    .join(" + ")
            })
            .collect(),
    }
}

fn check(name: &str, ok: bool, value: Option<usize>, detail: String) -> Check {
    Check {
        name: name.into(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        value,
        detail,
    }
}

fn unknown(name: &str, reason: String) -> Check {
    Check {
        name: name.into(),
        status: CheckStatus::Unknown,
        value: None,
        detail: reason,
    }
}

pub fn certify(spec: &LieAlgebraSpec) -> Certificate {
    certify_with(spec, CertifyOptions::default())
}

pub fn certify_with(spec: &LieAlgebraSpec, opts: CertifyOptions) -> Certificate {
    let mut notes = Vec::new();
    if let Err(e) = spec.require_valid() {
        return Certificate {
            verdict: Verdict::Inconclusive,
            witness: Witness::Checks {
                checks: vec![unknown("valid_spec", e.to_string())],
            },
            notes,
        };
    }
    if opts.disable_sol_branch {
        notes.push("Sol branch disabled by option".into());
    }
    let sol = sol_obstruction(spec);
    if !opts.disable_sol_branch {
        if let Ok(Some(q)) = &sol {
            notes.push("Sol pair found; Sol-type quotient constructed".into());
            return Certificate {
                verdict: Verdict::NotL1CSol,
                witness: Witness::SolPair { quotient: q.clone() },
                notes,
            };
        }
    }
    let dec = weight_decomposition(spec);
    let tame = dec.as_ref().map(|d| tame_witness(&d.weights, spec.rank()));
    if let Ok(TameOutcome::Witness(a)) = &tame {
        return Certificate {
            verdict: Verdict::L1CTame,
            witness: Witness::Tame { a: a.clone() },
            notes,
        };
    }

    let mut checks = Vec::new();
    let standard = standard_solvable(spec);
    match &standard {
        Ok((ok, w)) => checks.push(check(
            "standard_solvable",
            *ok,
            Some(w.zero_component_dim),
            format!("zero part of 𝔲/[𝔲,𝔲] has dimension {}", w.zero_component_dim),
        )),
        Err(e) => checks.push(unknown("standard_solvable", e.to_string())),
    }
    let zp = zero_parts(spec);
    match &zp {
        Ok(z) => {
            checks.push(check(
                "h2_zero",
                z.h2_zero.is_empty(),
                Some(z.h2_zero.len()),
                format!("H2 has dimension {}, zero part {}", z.h2.dim(), z.h2_zero.len()),
            ));
            checks.push(check(
                "kill_zero",
                z.kill_zero.is_empty(),
                Some(z.kill_zero.len()),
                format!("Kill has dimension {}, zero part {}", z.kill.dim(), z.kill_zero.len()),
            ));
        }
        Err(e) => {
            checks.push(unknown("h2_zero", e.to_string()));
            checks.push(unknown("kill_zero", e.to_string()));
        }
    }
    match &sol {
        Ok(found) => checks.push(check(
            "no_sol_pair",
            found.is_none(),
            None,
            match found {
                Some(q) => format!(
                    "opposite principal weights ({}) and ({})",
                    fmt_vec(&q.alpha),
                    fmt_vec(&q.beta)
                ),
                None => "no pair of principal weights has 0 between them".into(),
            },
        )),
        Err(e) => checks.push(unknown("no_sol_pair", e.to_string())),
    }
    let all_pass = checks.iter().all(|c| c.status == CheckStatus::Pass);
    if let (true, Ok((_, sw)), Ok(z), Ok(TameOutcome::Farkas(y)), Ok(None)) =
        (all_pass, &standard, &zp, &tame, &sol)
    {
        let pw = sw.abelianization_weights.clone();
        let k = pw.len();
        return Certificate {
            verdict: Verdict::L1CTheorem,
            witness: Witness::Theorem {
                standard_solvable: sw.clone(),
                h2_zero: zero_witness(&z.h2, &z.h2_zero, &crate::homology::wedge_names(spec)),
                kill_zero: zero_witness(&z.kill, &z.kill_zero, &crate::homology::sym_names(spec)),
                no_sol_pair: NoSolPair {
                    principal_weights: pw,
                    pairs_checked: k * k.saturating_sub(1) / 2,
                },
                not_tame: y.clone(),
            },
            notes,
        };
    }
    match &tame {
        Ok(TameOutcome::Farkas(_)) => checks.push(check(
            "tame",
            false,
            None,
            "0 lies in the convex hull of the weights".into(),
        )),
        Ok(TameOutcome::Witness(_)) => {}
        Err(e) => checks.push(unknown("tame", e.to_string())),
    }
    Certificate {
        verdict: Verdict::Inconclusive,
        witness: Witness::Checks { checks },
        notes,
    }
}

fn fmt_vec(v: &[Q]) -> String {
    v.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
}

/// Re-verify a certificate against `spec` by repeating the checks its
/// witness names.
pub fn replay(spec: &LieAlgebraSpec, cert: &Certificate, opts: CertifyOptions) -> std::result::Result<(), String> {
    let err = |e: crate::error::Error| e.to_string();
    match (&cert.verdict, &cert.witness) {
        (Verdict::NotL1CSol, Witness::SolPair { quotient }) => verify_sol_quotient(spec, quotient),
        (Verdict::L1CTame, Witness::Tame { a }) => {
            let dec = weight_decomposition(spec).map_err(err)?;
            if !verify_tame_outcome(&dec.weights, spec.rank(), &TameOutcome::Witness(a.clone())) {
                return Err("some weight is not ≤ -1 on the witness".into());
            }
            if !opts.disable_sol_branch && sol_obstruction(spec).map_err(err)?.is_some() {
                return Err("a Sol pair exists, which takes precedence".into());
            }
            Ok(())
        }
        (
            Verdict::L1CTheorem,
            Witness::Theorem {
                standard_solvable: sw,
                h2_zero,
                kill_zero,
                no_sol_pair,
                not_tame,
            },
        ) => {
            let (ok, fresh) = standard_solvable(spec).map_err(err)?;
            if !ok || &fresh != sw {
                return Err("standard solvable witness does not reproduce".into());
            }
            let z = zero_parts(spec).map_err(err)?;
            if z.h2_zero_dim() != 0 || h2_zero.zero_dim != 0 {
                return Err("H2 zero part is nonzero".into());
            }
            if z.kill_zero_dim() != 0 || kill_zero.zero_dim != 0 {
                return Err("Kill zero part is nonzero".into());
            }
            let pw = principal_weights(spec).map_err(err)?;
            if pw != no_sol_pair.principal_weights || first_opposite_pair(&pw).is_some() {
                return Err("principal weights admit a Sol pair".into());
            }
            let dec = weight_decomposition(spec).map_err(err)?;
            if !verify_tame_outcome(&dec.weights, spec.rank(), &TameOutcome::Farkas(not_tame.clone())) {
                return Err("non-tameness certificate does not verify".into());
            }
            Ok(())
        }
        (Verdict::Inconclusive, Witness::Checks { .. }) => {
            if &certify_with(spec, opts) == cert {
                Ok(())
            } else {
                Err("recomputed checks differ".into())
            }
        }
        _ => Err("verdict and witness kind disagree".into()),
    }
}
