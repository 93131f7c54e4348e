//! Versioned JSON reports. A report holds no clocks and no paths beyond
//! what the caller passes in, so identical inputs give identical bytes.

use crate::algebra::spec::LieAlgebraSpec;
use crate::certifier::{certify_with, replay, zero_witness, CertifyOptions};
use crate::error::Result;
use crate::homology::{sym_names, wedge_names, zero_parts};
use crate::io::spec_file::spec_to_string;
use crate::rational::fmt_rational;
use crate::weights::{
    enumerate_conic_subsets, maximal_conic_subsets, tame_witness, weight_decomposition, TameOutcome, DEFAULT_CONIC_GUARD,
};
use crate::words::guard_from_env;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: &str = "solvfill-report/1";

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Inputs {
    /// File path or `preset:<name>` as given.
    pub source: String,
    /// SHA-256 of the canonical spec serialization.
    pub spec_digest: String,
    pub flags: BTreeMap<String, String>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool: Tool,
    pub command: String,
    pub inputs: Inputs,
    pub tolerances: Value,
    pub result: Value,
    pub notes: Vec<String>,
}

pub fn spec_digest(spec: &LieAlgebraSpec) -> String {
    let d = Sha256::digest(spec_to_string(spec).as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(command: &str, source: &str, spec: &LieAlgebraSpec, flags: BTreeMap<String, String>, seed: u64) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            tool: Tool {
                name: "solvfill",
                version: env!("CARGO_PKG_VERSION"),
            },
            command: command.to_string(),
            inputs: Inputs {
                source: source.to_string(),
                spec_digest: spec_digest(spec),
                flags,
                seed,
            },
            tolerances: Value::Null,
            result: Value::Null,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn fmt_vec(v: &[crate::Q]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

/// Weights, conic subsets, tameness, `H₂` and `Kill` with their zero parts,
/// and the grading check.
pub fn analyze(spec: &LieAlgebraSpec) -> Result<Value> {
    spec.require_valid()?;
    let dec = weight_decomposition(spec)?;
    let weights: Vec<Value> = dec
        .weights
        .iter()
        .zip(&dec.spaces)
        .map(|(w, sp)| json!({ "weight": fmt_vec(w), "multiplicity": sp.len() }))
        .collect();
    let conic = enumerate_conic_subsets(&dec.weights, guard_from_env("conic_weights", DEFAULT_CONIC_GUARD))?;
    let maximal = maximal_conic_subsets(&conic);
    let subset = |c: &crate::weights::ConicSubset| {
        json!({
            "members": c.members.iter().map(|m| fmt_vec(m)).collect::<Vec<_>>(),
            "functionals": c.functionals.iter().map(|f| fmt_vec(f)).collect::<Vec<_>>(),
        })
    };
    let tame = match tame_witness(&dec.weights, spec.rank()) {
        TameOutcome::Witness(a) => json!({ "tame": true, "witness": fmt_vec(&a) }),
        TameOutcome::Farkas(y) => json!({ "tame": false, "convex_combination": fmt_vec(&y) }),
    };
    let zp = zero_parts(spec)?;
    let h2 = zero_witness(&zp.h2, &zp.h2_zero, &wedge_names(spec));
    let kill = zero_witness(&zp.kill, &zp.kill_zero, &sym_names(spec));
    let grading = match dec.grading_violation(spec) {
        None => json!({ "ok": true }),
        Some((a, b)) => json!({ "ok": false, "alpha": fmt_vec(&a), "beta": fmt_vec(&b) }),
    };
    Ok(json!({
        "dim": spec.dim(),
        "rank": spec.rank(),
        "nilpotency_class": spec.nilpotency_class(),
        "weights": weights,
        "conic_subsets": conic.iter().map(subset).collect::<Vec<_>>(),
        "maximal_conic_subsets": maximal.iter().map(subset).collect::<Vec<_>>(),
        "tameness": tame,
        "h2": { "dim": zp.h2.dim(), "representatives": zp.h2.labels, "zero_part": h2 },
        "kill": { "dim": zp.kill.dim(), "representatives": zp.kill.labels, "zero_part": kill },
        "grading": grading,
    }))
}

/// Certificate plus the outcome of replaying its witness.
pub fn certify_value(spec: &LieAlgebraSpec, opts: CertifyOptions) -> Value {
    let cert = certify_with(spec, opts);
    let replayed = match replay(spec, &cert, opts) {
        Ok(()) => json!("ok"),
        Err(e) => json!({ "failed": e }),
    };
    json!({
        "verdict": cert.verdict.to_string(),
        "certificate": cert,
        "sol_branch": !opts.disable_sol_branch,
        "replay": replayed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::load_preset;

    #[test]
    fn digest_is_stable_and_spec_sensitive() {
        let a = load_preset("sol").unwrap();
        let b = load_preset("heisenberg-tame").unwrap();
        assert_eq!(spec_digest(&a), spec_digest(&a.clone()));
        assert_ne!(spec_digest(&a), spec_digest(&b));
        assert_eq!(spec_digest(&a).len(), 64);
    }

    #[test]
    fn analyze_heisenberg_tame() {
        let v = analyze(&load_preset("heisenberg-tame").unwrap()).unwrap();
        assert_eq!(v["h2"]["zero_part"]["zero_dim"], 0);
        assert_eq!(v["kill"]["zero_part"]["zero_dim"], 0);
        assert_eq!(v["tameness"]["tame"], true);
        assert_eq!(v["grading"]["ok"], true);
    }

    #[test]
    fn analyze_sol_weights() {
        let v = analyze(&load_preset("sol").unwrap()).unwrap();
        let w: Vec<String> = v["weights"].as_array().unwrap().iter().map(|x| x["weight"][0].as_str().unwrap().to_string()).collect();
        assert!(w.contains(&"-1".to_string()) && w.contains(&"1".to_string()));
    }

    #[test]
    fn certify_replays() {
        for name in crate::presets::PRESET_NAMES {
            let v = certify_value(&load_preset(name).unwrap(), CertifyOptions::default());
            assert_eq!(v["replay"], "ok", "{name}");
        }
    }

    #[test]
    fn report_bytes_are_reproducible() {
        let s = load_preset("sol").unwrap();
        let mk = || {
            let mut r = Report::new("analyze", "preset:sol", &s, BTreeMap::new(), 0);
            r.result = analyze(&s).unwrap();
            r.to_json()
        };
        assert_eq!(mk(), mk());
    }
}
