//! Named example groups shipped as JSON data files.

use crate::algebra::spec::LieAlgebraSpec;
use crate::error::{Error, Result};
use crate::io::spec_file::parse_spec_str;
use crate::linalg::QMatrix;
use crate::rational::one;

pub const PRESET_NAMES: [&str; 4] = ["sol", "heisenberg-tame", "heisenberg-mixed", "abelian3-rank2"];

pub fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "sol" => include_str!("../presets/sol.json"),
        "heisenberg-tame" => include_str!("../presets/heisenberg-tame.json"),
        "heisenberg-mixed" => include_str!("../presets/heisenberg-mixed.json"),
        "abelian3-rank2" => include_str!("../presets/abelian3-rank2.json"),
        _ => return None,
    })
}

pub fn load_preset(name: &str) -> Result<LieAlgebraSpec> {
    let text = preset_text(name).ok_or_else(|| {
        Error::Parse {
            field: "preset".into(),
            msg: format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", ")),
        }
    })?;
    parse_spec_str(text)
}

/// The 3-dimensional Heisenberg algebra `[x, y] = z` with the given action.
pub fn heisenberg(derivations: Vec<QMatrix>) -> LieAlgebraSpec {
    LieAlgebraSpec::from_brackets_antisymmetric(
        vec!["x".into(), "y".into(), "z".into()],
        &[(0, 1, 2, one())],
        derivations,
    )
    .expect("static shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_load_and_validate() {
        for name in PRESET_NAMES {
            let s = load_preset(name).unwrap();
            assert!(s.validate().is_valid(), "{name}");
        }
        assert!(load_preset("nope").is_err());
    }
}
