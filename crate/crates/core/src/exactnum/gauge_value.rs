use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::interval::IntervalValue;
use super::rational::{exact_sqrt, serde_rational, to_f64, Rational};

/// A nonnegative real of the form `r` or `√s` with `r, s` rational.
///
/// Gauges of polyhedral bodies are `Plain`, Euclidean norms are `SqrtOf`.
/// Equality and ordering compare the represented reals, so
/// `Plain(1) == SqrtOf(1)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeValue {
    Plain(#[serde(with = "serde_rational")] Rational),
    SqrtOf(#[serde(with = "serde_rational")] Rational),
}

impl GaugeValue {
    pub fn zero() -> Self {
        GaugeValue::Plain(Rational::zero())
    }

    pub fn plain(r: Rational) -> Self {
        assert!(!r.is_negative(), "gauge values are nonnegative");
        GaugeValue::Plain(r)
    }

    /// `√s`, collapsed to `Plain` when `s` is a rational square.
    pub fn sqrt_of(s: Rational) -> Self {
        assert!(!s.is_negative(), "gauge values are nonnegative");
        match exact_sqrt(&s) {
            Some(r) => GaugeValue::Plain(r),
            None => GaugeValue::SqrtOf(s),
        }
    }

    /// Rewrites `SqrtOf` of a perfect square as `Plain`.
    pub fn canonical(&self) -> Self {
        match self {
            GaugeValue::Plain(_) => self.clone(),
            GaugeValue::SqrtOf(s) => GaugeValue::sqrt_of(s.clone()),
        }
    }

    /// The exact square of the represented value.
    pub fn square(&self) -> Rational {
        match self {
            GaugeValue::Plain(r) => r * r,
            GaugeValue::SqrtOf(s) => s.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            GaugeValue::Plain(r) | GaugeValue::SqrtOf(r) => r.is_zero(),
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.canonical() {
            GaugeValue::Plain(r) => Some(r),
            GaugeValue::SqrtOf(_) => None,
        }
    }

    pub fn mul(&self, other: &GaugeValue) -> GaugeValue {
        match (self, other) {
            (GaugeValue::Plain(a), GaugeValue::Plain(b)) => GaugeValue::Plain(a * b),
            _ => GaugeValue::sqrt_of(self.square() * other.square()),
        }
    }

    /// Quotient; panics on division by zero.
    pub fn div(&self, other: &GaugeValue) -> GaugeValue {
        assert!(!other.is_zero(), "division by a zero gauge value");
        match (self, other) {
            (GaugeValue::Plain(a), GaugeValue::Plain(b)) => GaugeValue::Plain(a / b),
            _ => GaugeValue::sqrt_of(self.square() / other.square()),
        }
    }

    /// Multiplies by `|t|`.
    pub fn scale(&self, t: &Rational) -> GaugeValue {
        self.mul(&GaugeValue::Plain(t.abs()))
    }

    pub fn pow(&self, e: u32) -> GaugeValue {
        let mut acc = GaugeValue::Plain(Rational::from_integer(1.into()));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn product<'a>(values: impl IntoIterator<Item = &'a GaugeValue>) -> GaugeValue {
        values
            .into_iter()
            .fold(GaugeValue::Plain(Rational::from_integer(1.into())), |acc, v| {
                acc.mul(v)
            })
    }

    pub fn to_interval(&self, precision_bits: u32) -> IntervalValue {
        match self {
            GaugeValue::Plain(r) => IntervalValue::point(r.clone()),
            GaugeValue::SqrtOf(s) => IntervalValue::sqrt(s, precision_bits),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            GaugeValue::Plain(r) => to_f64(r),
            GaugeValue::SqrtOf(s) => to_f64(s).sqrt(),
        }
    }
}

/// Exact order of two gauge values, by comparing squares.
pub fn cmp_gauge(a: &GaugeValue, b: &GaugeValue) -> Ordering {
    match (a, b) {
        (GaugeValue::Plain(x), GaugeValue::Plain(y)) => x.cmp(y),
        _ => a.square().cmp(&b.square()),
    }
}

impl PartialEq for GaugeValue {
    fn eq(&self, other: &Self) -> bool {
        cmp_gauge(self, other) == Ordering::Equal
    }
}

impl Eq for GaugeValue {}

impl PartialOrd for GaugeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GaugeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_gauge(self, other)
    }
}

impl fmt::Display for GaugeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeValue::Plain(r) => write!(f, "{r}"),
            GaugeValue::SqrtOf(s) => write!(f, "sqrt({s})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::rat;
    use proptest::prelude::*;

    #[test]
    fn cross_squaring_order() {
        let a = GaugeValue::Plain(rat(2, 7));
        let b = GaugeValue::SqrtOf(rat(5, 49));
        assert_eq!(cmp_gauge(&a, &b), Ordering::Less);
        assert_eq!(
            cmp_gauge(&GaugeValue::Plain(rat(1, 1)), &GaugeValue::SqrtOf(rat(1, 1))),
            Ordering::Equal
        );
        assert_eq!(
            cmp_gauge(&GaugeValue::SqrtOf(rat(2, 1)), &GaugeValue::Plain(rat(3, 2))),
            Ordering::Less
        );
    }

    #[test]
    fn products_stay_in_form() {
        let s2 = GaugeValue::sqrt_of(rat(2, 1));
        let s3 = GaugeValue::sqrt_of(rat(3, 1));
        assert_eq!(s2.mul(&s2), GaugeValue::Plain(rat(2, 1)));
        assert!(matches!(s2.mul(&s2).canonical(), GaugeValue::Plain(_)));
        assert!(matches!(s2.mul(&s3), GaugeValue::SqrtOf(_)));
        assert_eq!(s2.mul(&s3).square(), rat(6, 1));
        let half = GaugeValue::Plain(rat(1, 2));
        assert_eq!(half.mul(&s2).square(), rat(1, 2));
        assert_eq!(s3.div(&s3), GaugeValue::Plain(rat(1, 1)));
        assert_eq!(GaugeValue::sqrt_of(rat(4, 9)), GaugeValue::Plain(rat(2, 3)));
    }

    #[test]
    fn json_shape() {
        let v = GaugeValue::Plain(rat(2, 7));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"plain":"2/7"}"#);
        let w: GaugeValue = serde_json::from_str(r#"{"sqrt_of":"5/49"}"#).unwrap();
        assert!(matches!(w, GaugeValue::SqrtOf(_)));
    }

    proptest! {
        #[test]
        fn plain_equals_sqrt_of_square(p in -1000i64..1000, q in 1i64..1000) {
            let r = rat(p, q);
            let a = GaugeValue::Plain(r.abs());
            let b = GaugeValue::SqrtOf(&r * &r);
            prop_assert_eq!(cmp_gauge(&a, &b), Ordering::Equal);
        }

        #[test]
        fn exact_order_agrees_with_intervals(
            a in (0i64..500, 1i64..300, any::<bool>()),
            b in (0i64..500, 1i64..300, any::<bool>()),
        ) {
            let mk = |(p, q, s): (i64, i64, bool)| if s {
                GaugeValue::SqrtOf(rat(p, q))
            } else {
                GaugeValue::Plain(rat(p, q))
            };
            let (x, y) = (mk(a), mk(b));
            let (ix, iy) = (x.to_interval(128), y.to_interval(128));
            match crate::exactnum::interval_cmp(&ix, &iy) {
                crate::exactnum::IntervalVerdict::DefinitelyLe => {
                    prop_assert_ne!(cmp_gauge(&x, &y), Ordering::Greater)
                }
                crate::exactnum::IntervalVerdict::DefinitelyGt => {
                    prop_assert_eq!(cmp_gauge(&x, &y), Ordering::Greater)
                }
                crate::exactnum::IntervalVerdict::Inconclusive => {}
            }
        }
    }
}
