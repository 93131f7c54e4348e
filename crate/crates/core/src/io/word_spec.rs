//! Loop specifications on the command line.
//!
//! ```text
//! u:1,0,0^3 a:1 u:0,1,0@1^-2   letters: u- or a-coordinates, optional conic
//!                              tag @k (1-based) and integer power ^p
//! backtrack:<letters>          v v⁻¹ for the given v
//! relation:32                  relation family word of that length
//! commutator:3                 [aⁿ x a⁻ⁿ, bⁿ y b⁻ⁿ] with n = 3
//! circle:2                     circle of radius 2 in the first plane of 𝔲
//! triple:1|3,0,5;-1|1,2,0      g₁ = (a|u), g₂, and g₃ = (g₁g₂)⁻¹ if omitted
//! ```

use crate::algebra::{GroupElement, SolvableGroup};
use crate::error::{Error, Result};
use crate::filling::probe::{commutator_word, relation_word, Loop};
use crate::filling::TameCtx;
use crate::rational::{parse_rational, Q};
use crate::words::{Factor, Letter, NormalForms, Word};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse {
        field: "word".into(),
        msg: msg.into(),
    }
}

fn rationals(s: &str, want: usize, what: &str) -> Result<Vec<Q>> {
    let v: Vec<Q> = s
        .split(',')
        .map(|x| parse_rational(x.trim()).map_err(|e| perr(format!("{what} {x:?}: {e}"))))
        .collect::<Result<_>>()?;
    if v.len() != want {
        return Err(perr(format!("{what} needs {want} coordinates, found {}", v.len())));
    }
    Ok(v)
}

fn letter_token(group: &SolvableGroup, tok: &str) -> Result<Vec<Letter>> {
    let (body, power) = match tok.rsplit_once('^') {
        Some((b, p)) => (b, p.parse::<i64>().map_err(|_| perr(format!("bad power in {tok:?}")))?),
        None => (tok, 1),
    };
    let (body, tag) = match body.rsplit_once('@') {
        Some((b, t)) => {
            let k: usize = t.parse().map_err(|_| perr(format!("bad conic tag in {tok:?}")))?;
            if k == 0 {
                return Err(perr(format!("conic tags are 1-based in {tok:?}")));
            }
            (b, Some(Factor::Conic(k - 1)))
        }
        None => (body, None),
    };
    let (kind, coords) = body
        .split_once(':')
        .ok_or_else(|| perr(format!("letter {tok:?}: expected a:<coords> or u:<coords>")))?;
    let (elem, default_tag) = match kind {
        "a" => (group.from_a(rationals(coords, group.rank(), "a-part")?), Factor::A),
        "u" => (group.from_u(rationals(coords, group.dim(), "u-part")?), Factor::U),
        _ => return Err(perr(format!("letter {tok:?}: unknown kind {kind:?}"))),
    };
    let l = Letter::new(elem, tag.unwrap_or(default_tag));
    let l = if power < 0 {
        Letter::new(group.inverse(&l.elem)?, l.factor)
    } else {
        l
    };
    Ok(vec![l; power.unsigned_abs() as usize])
}

pub fn parse_letters(group: &SolvableGroup, s: &str) -> Result<Word> {
    let mut letters = Vec::new();
    for tok in s.split_whitespace() {
        letters.extend(letter_token(group, tok)?);
    }
    Ok(Word::new(letters))
}

fn element(group: &SolvableGroup, s: &str) -> Result<GroupElement> {
    let (a, u) = s
        .split_once('|')
        .ok_or_else(|| perr(format!("element {s:?}: expected a-part|u-part")))?;
    Ok(GroupElement::new(
        rationals(a, group.rank(), "a-part")?,
        rationals(u, group.dim(), "u-part")?,
    ))
}

fn count(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| perr(format!("expected a count, found {s:?}")))
}

pub fn parse_loop(group: &SolvableGroup, s: &str) -> Result<Loop> {
    let s = s.trim();
    let (head, rest) = s.split_once(':').unwrap_or(("", s));
    match head {
        "backtrack" => {
            let v = parse_letters(group, rest)?;
            Ok(Loop::Word(v.concat(&v.inverse(group)?)))
        }
        "relation" => {
            let nf = NormalForms::new(group)?;
            let ctx = TameCtx::for_tame_group(&nf)?;
            Ok(Loop::Word(relation_word(group, &ctx, count(rest)?)?))
        }
        "commutator" => Ok(Loop::Word(commutator_word(group, count(rest)?)?)),
        "circle" => {
            let r: f64 = rest.trim().parse().map_err(|_| perr(format!("bad radius {rest:?}")))?;
            if !(r > 0.0) || group.dim() < 2 {
                return Err(perr("circles need a positive radius and dim 𝔲 ≥ 2"));
            }
            Ok(Loop::Circle {
                radius: r,
                plane: (0, 1),
            })
        }
        "triple" => {
            let parts: Vec<GroupElement> = rest.split(';').map(|p| element(group, p.trim())).collect::<Result<_>>()?;
            let g = match parts.len() {
                2 => {
                    let g3 = group.inverse(&group.mul(&parts[0], &parts[1])?)?;
                    [parts[0].clone(), parts[1].clone(), g3]
                }
                3 => [parts[0].clone(), parts[1].clone(), parts[2].clone()],
                n => return Err(perr(format!("triple needs 2 or 3 elements, found {n}"))),
            };
            Ok(Loop::Triple(g))
        }
        _ => Ok(Loop::Word(parse_letters(group, s)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::load_preset;
    use crate::rational::q;
    use crate::words::eval_unchecked;

    fn heis() -> SolvableGroup {
        SolvableGroup::new(load_preset("heisenberg-tame").unwrap()).unwrap()
    }

    #[test]
    fn letters_with_powers_and_tags() {
        let g = heis();
        let w = parse_letters(&g, "u:1,0,0^2 a:1 u:0,1/2,0@1^-1").unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w.letters[2].factor, Factor::A);
        assert_eq!(w.letters[3].factor, Factor::Conic(0));
        assert_eq!(w.letters[3].elem.u, vec![q(0), crate::rational::qr(-1, 2), q(0)]);
    }

    #[test]
    fn backtrack_is_trivial() {
        let g = heis();
        let Loop::Word(w) = parse_loop(&g, "backtrack:u:1,0,0 a:1 u:0,1,0").unwrap() else {
            panic!()
        };
        assert_eq!(w.len(), 6);
        assert!(eval_unchecked(&g, &w).unwrap().is_identity());
    }

    #[test]
    fn triple_closes_up() {
        let g = heis();
        let Loop::Triple(t) = parse_loop(&g, "triple:1|3,0,5;-1|1,2,0").unwrap() else {
            panic!()
        };
        assert!(g.product(&t).unwrap().is_identity());
    }

    #[test]
    fn errors_name_the_field() {
        let g = heis();
        for bad in ["u:1,0", "x:1", "u:1,0,0^z", "a:1/0", "triple:1|0,0,0", "circle:-1"] {
            assert!(matches!(parse_loop(&g, bad), Err(Error::Parse { .. })), "{bad}");
        }
    }
}
