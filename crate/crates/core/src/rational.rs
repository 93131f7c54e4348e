//! Rational scalars, parsing and formatting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational")]
    Empty,
    #[error("zero denominator in \"{0}\"")]
    ZeroDenominator(String),
    #[error("not a rational: \"{0}\"")]
    Invalid(String),
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Q, ParseRationalError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
        if d.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ip_digits = ip.trim_start_matches(['-', '+']);
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(ParseRationalError::Invalid(s.to_string()));
        }
        let whole: BigInt = if ip_digits.is_empty() {
            BigInt::zero()
        } else {
            ip_digits
                .parse()
                .map_err(|_| ParseRationalError::Invalid(s.to_string()))?
        };
        let frac: BigInt = fp.parse().unwrap();
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = Q::new(whole * &scale + frac, scale);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t
        .parse()
        .map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
    Ok(Q::from_integer(n))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn fmt_rational(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator or denominator overflow f64; divide in integer land first
        let n = x.numer();
        let d = x.denom();
        let shift = (n.bits().max(d.bits()) as i64 - 1000).max(0) as usize;
        let nf = (n >> shift).to_f64().unwrap_or(f64::NAN);
        let df = (d >> shift).to_f64().unwrap_or(f64::NAN);
        nf / df
    })
}

/// Exact conversion of a finite f64 to a rational.
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Nearest rational with denominator `2^bits`.
pub fn dyadic_approx(x: f64, bits: u32) -> Q {
    let scale = (2f64).powi(bits as i32);
    let n = (x * scale).round();
    Q::new(
        BigInt::from(n as i128),
        num_traits::pow(BigInt::from(2), bits as usize),
    )
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// `2^e` for integer `e`, `None` otherwise.
pub fn pow2_exact(e: &Q) -> Option<Q> {
    if !is_integer(e) {
        return None;
    }
    let k = e.numer().to_i64()?;
    let p = num_traits::pow(BigInt::from(2), k.unsigned_abs() as usize);
    Some(if k >= 0 {
        Q::from_integer(p)
    } else {
        Q::new(BigInt::one(), p)
    })
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn max_abs<'a>(xs: impl IntoIterator<Item = &'a Q>) -> Q {
    xs.into_iter().map(|x| x.abs()).max().unwrap_or_else(zero)
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `serialize_with` helpers writing rationals as "p/q" strings.
pub mod ser {
    use super::{fmt_rational, Q};
    use serde::Serializer;

    pub fn one<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(x))
    }

    pub fn vec<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_rational))
    }

    pub fn vecs<S: Serializer>(v: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|w| w.iter().map(fmt_rational).collect::<Vec<_>>()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), qr(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), q(-7));
        assert_eq!(parse_rational("0.25").unwrap(), qr(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), qr(-1, 2));
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn format_round_trip() {
        for s in ["0", "5", "-3/4", "22/7"] {
            assert_eq!(fmt_rational(&parse_rational(s).unwrap()), s);
        }
    }

    #[test]
    fn powers_of_two() {
        assert_eq!(pow2_exact(&q(3)), Some(q(8)));
        assert_eq!(pow2_exact(&q(-2)), Some(qr(1, 4)));
        assert_eq!(pow2_exact(&qr(1, 2)), None);
    }
}
