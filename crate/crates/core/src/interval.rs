//! Closed rational intervals, used where an exact power of two is irrational.

use crate::rational::{one, q, Q};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: Q,
    pub hi: Q,
}

impl RatInterval {
    pub fn point(x: Q) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn add(&self, o: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn mul(&self, o: &RatInterval) -> RatInterval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        RatInterval {
            lo: c.iter().min().unwrap().clone(),
            hi: c.iter().max().unwrap().clone(),
        }
    }

    pub fn scale(&self, s: &Q) -> RatInterval {
        if s.is_negative() {
            RatInterval {
                lo: &self.hi * s,
                hi: &self.lo * s,
            }
        } else {
            RatInterval {
                lo: &self.lo * s,
                hi: &self.hi * s,
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct IntervalText {
    pub lo: String,
    pub hi: String,
}

impl From<&RatInterval> for IntervalText {
    fn from(i: &RatInterval) -> Self {
        IntervalText {
            lo: crate::rational::fmt_rational(&i.lo),
            hi: crate::rational::fmt_rational(&i.hi),
        }
    }
}

/// Enclosure of `2^e` of width at most `2^-bits` times the value, by bisection
/// on `y^den = 2^num`.
pub fn pow2_enclosure(e: &Q, bits: u32) -> RatInterval {
    if let Some(x) = crate::rational::pow2_exact(e) {
        return RatInterval::point(x);
    }
    let floor = e.floor();
    let base = crate::rational::pow2_exact(&floor).expect("integer exponent");
    let frac = e - &floor; // in (0,1)
    let num = frac.numer().to_u64().expect("exponent numerator too large") as usize;
    let den = frac.denom().to_u64().expect("exponent denominator too large") as usize;
    let target = Q::from_integer(num_traits::pow(BigInt::from(2), num));
    // 2^frac lies in (1, 2)
    let mut lo = one();
    let mut hi = q(2);
    let tol = Q::new(BigInt::from(1), num_traits::pow(BigInt::from(2), bits as usize));
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / q(2);
        if num_traits::pow(mid.clone(), den) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!(!lo.is_zero());
    RatInterval {
        lo: &lo * &base,
        hi: &hi * &base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qr, to_f64};

    #[test]
    fn sqrt_two_enclosed() {
        let i = pow2_enclosure(&qr(1, 2), 40);
        assert!(to_f64(&i.lo) <= std::f64::consts::SQRT_2);
        assert!(to_f64(&i.hi) >= std::f64::consts::SQRT_2);
        assert!(to_f64(&i.width()) < 1e-11);
    }

    #[test]
    fn negative_exponent() {
        let i = pow2_enclosure(&qr(-3, 2), 30);
        let v = 2f64.powf(-1.5);
        assert!(to_f64(&i.lo) <= v && v <= to_f64(&i.hi));
    }

    #[test]
    fn integer_exponent_is_exact() {
        let i = pow2_enclosure(&q(5), 10);
        assert_eq!(i, RatInterval::point(q(32)));
    }
}
