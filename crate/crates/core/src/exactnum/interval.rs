use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{ceil_int, exact_sqrt, floor_int, serde_rational, to_f64, Rational};

/// Closed rational interval `[lo, hi]` enclosing a real value.
///
/// Every operation rounds outward, so the true value of an expression is
/// always inside the interval computed for it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalValue {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalVerdict {
    DefinitelyLe,
    DefinitelyGt,
    Inconclusive,
}

/// `DefinitelyLe` iff `a.hi ≤ b.lo`, `DefinitelyGt` iff `a.lo > b.hi`.
pub fn interval_cmp(a: &IntervalValue, b: &IntervalValue) -> IntervalVerdict {
    if a.hi <= b.lo {
        IntervalVerdict::DefinitelyLe
    } else if a.lo > b.hi {
        IntervalVerdict::DefinitelyGt
    } else {
        IntervalVerdict::Inconclusive
    }
}

fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

fn grid_floor(r: &Rational, k: u64) -> Rational {
    let scale = pow2(k);
    Rational::new(floor_int(&(r * Rational::from_integer(scale.clone()))), scale)
}

fn grid_ceil(r: &Rational, k: u64) -> Rational {
    let scale = pow2(k);
    Rational::new(ceil_int(&(r * Rational::from_integer(scale.clone()))), scale)
}

impl IntervalValue {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval with lo > hi");
        IntervalValue { lo, hi }
    }

    pub fn point(r: Rational) -> Self {
        IntervalValue { lo: r.clone(), hi: r }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, r: &Rational) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    pub fn contains_interval(&self, other: &IntervalValue) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn add(&self, o: &IntervalValue) -> IntervalValue {
        IntervalValue::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &IntervalValue) -> IntervalValue {
        IntervalValue::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn mul(&self, o: &IntervalValue) -> IntervalValue {
        if !self.lo.is_negative() && !o.lo.is_negative() {
            return IntervalValue::new(&self.lo * &o.lo, &self.hi * &o.hi);
        }
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        IntervalValue::new(lo, hi)
    }

    pub fn scale(&self, t: &Rational) -> IntervalValue {
        self.mul(&IntervalValue::point(t.clone()))
    }

    /// Quotient; `None` when the divisor contains zero.
    pub fn div(&self, o: &IntervalValue) -> Option<IntervalValue> {
        if o.contains(&Rational::zero()) {
            return None;
        }
        let inv = IntervalValue::new(o.hi.recip(), o.lo.recip());
        Some(self.mul(&inv))
    }

    pub fn powi(&self, e: i32) -> Option<IntervalValue> {
        let mut acc = IntervalValue::point(Rational::one());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(self);
        }
        if e < 0 {
            IntervalValue::point(Rational::one()).div(&acc)
        } else {
            Some(acc)
        }
    }

    /// Outward rounding onto the dyadic grid `2^-k`.
    pub fn round_outward(&self, k: u64) -> IntervalValue {
        IntervalValue::new(grid_floor(&self.lo, k), grid_ceil(&self.hi, k))
    }

    /// Enclosure of `√s`, `s ≥ 0`, with width at most `2^(1-bits)·hi`.
    ///
    /// Bounds sit on the dyadic grid `2^-k` with `k` increasing in `bits`, so
    /// raising the precision yields nested enclosures.
    pub fn sqrt(s: &Rational, precision_bits: u32) -> IntervalValue {
        assert!(!s.is_negative(), "square root of a negative rational");
        if let Some(r) = exact_sqrt(s) {
            return IntervalValue::point(r);
        }
        let nb = s.numer().bits() as i64;
        let db = s.denom().bits() as i64;
        let e = Integer::div_floor(&(nb - 1 - db), &2);
        let k = (precision_bits as i64 - e).max(0) as u64;
        let scaled = s * Rational::from_integer(pow2(2 * k));
        let m = floor_int(&scaled).sqrt();
        let lo = Rational::new(m.clone(), pow2(k));
        let hi = Rational::new(m + 1, pow2(k));
        IntervalValue::new(lo, hi)
    }

    /// Enclosure of π with width below `2^-(bits+8)`.
    pub fn pi(precision_bits: u32) -> IntervalValue {
        static CACHE: OnceLock<Mutex<BTreeMap<u32, IntervalValue>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
        if let Some(v) = cache.lock().unwrap().get(&precision_bits) {
            return v.clone();
        }
        let v = pi_enclosure(precision_bits as u64 + 8);
        cache.lock().unwrap().insert(precision_bits, v.clone());
        v
    }

    pub fn midpoint_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }
}

/// Brackets `atan(1/m)` between consecutive partial sums of its alternating
/// series, with bracket width below `2^-k`.
fn atan_inv(m: u64, k: u64) -> (Rational, Rational) {
    let m = BigInt::from(m);
    let m2 = &m * &m;
    let limit = pow2(k);
    let mut sum = Rational::zero();
    let mut power = m.clone();
    let mut j: u64 = 0;
    loop {
        let term = Rational::new(BigInt::one(), BigInt::from(2 * j + 1) * &power);
        let next = if j % 2 == 0 { &sum + &term } else { &sum - &term };
        // after an even number of terms the partial sum is a lower bound
        if j % 2 == 0 && term.numer() * &limit < *term.denom() {
            return (sum, next);
        }
        sum = next;
        power *= &m2;
        j += 1;
    }
}

fn pi_enclosure(k: u64) -> IntervalValue {
    let (a_lo, a_hi) = atan_inv(5, k + 6);
    let (b_lo, b_hi) = atan_inv(239, k + 6);
    let sixteen = Rational::from_integer(16.into());
    let four = Rational::from_integer(4.into());
    let lo = &sixteen * a_lo - &four * b_hi;
    let hi = &sixteen * a_hi - &four * b_lo;
    IntervalValue::new(lo, hi).round_outward(k)
}

impl fmt::Display for IntervalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", to_f64(&self.lo), to_f64(&self.hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::{int, parse_rational, rat};
    use proptest::prelude::*;

    #[test]
    fn verdicts() {
        let one = IntervalValue::point(int(1));
        let two = IntervalValue::point(int(2));
        assert_eq!(interval_cmp(&one, &two), IntervalVerdict::DefinitelyLe);
        assert_eq!(interval_cmp(&two, &one), IntervalVerdict::DefinitelyGt);
        let wide = IntervalValue::new(int(0), int(3));
        let mid = IntervalValue::new(int(1), int(2));
        assert_eq!(interval_cmp(&wide, &mid), IntervalVerdict::Inconclusive);
    }

    #[test]
    fn pi_below_22_over_7() {
        let pi = IntervalValue::pi(128);
        let ten_digits = IntervalValue::new(
            parse_rational("3.1415926535").unwrap(),
            parse_rational("3.1415926536").unwrap(),
        );
        assert!(ten_digits.contains_interval(&pi));
        assert_eq!(
            interval_cmp(&pi, &IntervalValue::point(rat(22, 7))),
            IntervalVerdict::DefinitelyLe
        );
        assert!(pi.width() < parse_rational("1e-40").unwrap());
    }

    #[test]
    fn sqrt_two_against_long_division() {
        // 1.414213562373095048801688724209698... by long division
        let iv = IntervalValue::sqrt(&int(2), 64);
        assert!(iv.contains(&parse_rational("1.41421356237309504880").unwrap()));
        assert!(iv.width() < parse_rational("1e-18").unwrap());
        assert!(&iv.lo * &iv.lo < int(2));
        assert!(&iv.hi * &iv.hi > int(2));
        assert_eq!(IntervalValue::sqrt(&int(0), 64), IntervalValue::point(int(0)));
        assert_eq!(IntervalValue::sqrt(&rat(9, 4), 64), IntervalValue::point(rat(3, 2)));
    }

    #[test]
    fn division_rejects_zero_divisor() {
        let a = IntervalValue::point(int(1));
        assert!(a.div(&IntervalValue::new(int(-1), int(1))).is_none());
        assert_eq!(
            a.div(&IntervalValue::point(int(4))).unwrap(),
            IntervalValue::point(rat(1, 4))
        );
    }

    #[test]
    fn json_shape() {
        let iv = IntervalValue::new(rat(1, 3), rat(1, 2));
        assert_eq!(
            serde_json::to_string(&iv).unwrap(),
            r#"{"lo":"1/3","hi":"1/2"}"#
        );
    }

    proptest! {
        #[test]
        fn sqrt_width_bound_and_nesting(p in 1i64..100_000, q in 1i64..100_000, bits in 8u32..200) {
            let s = rat(p, q);
            let coarse = IntervalValue::sqrt(&s, bits);
            let fine = IntervalValue::sqrt(&s, bits * 2);
            prop_assert!(&coarse.lo * &coarse.lo <= s && s <= &coarse.hi * &coarse.hi);
            let bound = &coarse.hi * Rational::new(BigInt::one(), pow2(bits as u64 - 1));
            prop_assert!(coarse.width() <= bound);
            prop_assert!(coarse.contains_interval(&fine));
        }

        #[test]
        fn pi_enclosures_nest(bits in 8u32..160) {
            let a = IntervalValue::pi(bits);
            let b = IntervalValue::pi(bits + 17);
            prop_assert!(a.contains_interval(&b));
            prop_assert!(b.width() <= a.width());
        }

        #[test]
        fn products_enclose(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50) {
            let x = IntervalValue::new(int(a.min(b)), int(a.max(b)));
            let y = IntervalValue::new(int(c.min(d)), int(c.max(d)));
            let p = x.mul(&y);
            for u in [a, b] {
                for v in [c, d] {
                    prop_assert!(p.contains(&int(u * v)));
                }
            }
        }
    }
}
