use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::gauge_value::GaugeValue;
use super::interval::IntervalValue;
use super::rational::Rational;

/// A positive real appearing on one side of an inequality.
///
/// Exact quantities are `coeff · π^pi_pow` where `coeff` is a `GaugeValue`.
/// Ball volumes and packing constants all have this shape, so two exact
/// quantities with the same power of π compare without rounding.
/// `Estimate` carries a fixed enclosure, e.g. a sampled polytope volume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Exact { coeff: GaugeValue, pi_pow: i32 },
    Estimate { enclosure: IntervalValue, certified: bool },
}

impl Quantity {
    pub fn rational(r: Rational) -> Self {
        Quantity::Exact { coeff: GaugeValue::plain(r), pi_pow: 0 }
    }

    pub fn gauge(v: GaugeValue) -> Self {
        Quantity::Exact { coeff: v, pi_pow: 0 }
    }

    pub fn with_pi(coeff: GaugeValue, pi_pow: i32) -> Self {
        Quantity::Exact { coeff, pi_pow }
    }

    pub fn one() -> Self {
        Quantity::rational(Rational::from_integer(1.into()))
    }

    pub fn is_certified(&self) -> bool {
        match self {
            Quantity::Exact { .. } => true,
            Quantity::Estimate { certified, .. } => *certified,
        }
    }

    pub fn enclosure(&self, precision_bits: u32) -> IntervalValue {
        match self {
            Quantity::Exact { coeff, pi_pow } => {
                let c = coeff.to_interval(precision_bits);
                if *pi_pow == 0 {
                    c
                } else {
                    let p = IntervalValue::pi(precision_bits)
                        .powi(*pi_pow)
                        .expect("π is positive");
                    c.mul(&p)
                }
            }
            Quantity::Estimate { enclosure, .. } => enclosure.clone(),
        }
    }

    pub fn mul(&self, other: &Quantity) -> Quantity {
        match (self, other) {
            (
                Quantity::Exact { coeff: a, pi_pow: p },
                Quantity::Exact { coeff: b, pi_pow: q },
            ) => Quantity::Exact { coeff: a.mul(b), pi_pow: p + q },
            _ => {
                // mixed forms: fall back to enclosures at a generous precision
                let bits = 256;
                Quantity::Estimate {
                    enclosure: self.enclosure(bits).mul(&other.enclosure(bits)),
                    certified: self.is_certified() && other.is_certified(),
                }
            }
        }
    }

    pub fn div(&self, other: &Quantity) -> Quantity {
        match (self, other) {
            (
                Quantity::Exact { coeff: a, pi_pow: p },
                Quantity::Exact { coeff: b, pi_pow: q },
            ) => Quantity::Exact { coeff: a.div(b), pi_pow: p - q },
            _ => {
                let bits = 256;
                Quantity::Estimate {
                    enclosure: self
                        .enclosure(bits)
                        .div(&other.enclosure(bits))
                        .expect("divisor enclosure excludes zero"),
                    certified: self.is_certified() && other.is_certified(),
                }
            }
        }
    }

    pub fn scale(&self, t: &Rational) -> Quantity {
        self.mul(&Quantity::rational(t.clone()))
    }

    /// Exact order, available when both sides share the same power of π.
    pub fn exact_cmp(&self, other: &Quantity) -> Option<Ordering> {
        match (self, other) {
            (
                Quantity::Exact { coeff: a, pi_pow: p },
                Quantity::Exact { coeff: b, pi_pow: q },
            ) if p == q => Some(a.cmp(b)),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact { coeff, pi_pow } => {
                coeff.to_f64() * std::f64::consts::PI.powi(*pi_pow)
            }
            Quantity::Estimate { enclosure, .. } => enclosure.midpoint_f64(),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact { coeff, pi_pow: 0 } => write!(f, "{coeff}"),
            Quantity::Exact { coeff, pi_pow: 1 } => write!(f, "{coeff}*pi"),
            Quantity::Exact { coeff, pi_pow } => write!(f, "{coeff}*pi^{pi_pow}"),
            Quantity::Estimate { enclosure, .. } => write!(f, "~{enclosure}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::rat;

    #[test]
    fn pi_cancels_exactly() {
        let a = Quantity::with_pi(GaugeValue::plain(rat(1, 3)), 1);
        let b = Quantity::with_pi(GaugeValue::sqrt_of(rat(1, 12)), 1);
        // 1/3 > 1/√12
        assert_eq!(a.exact_cmp(&b), Some(Ordering::Greater));
        let ratio = a.div(&b);
        assert!(matches!(ratio, Quantity::Exact { pi_pow: 0, .. }));
        assert_eq!(a.exact_cmp(&Quantity::rational(rat(1, 3))), None);
    }

    #[test]
    fn enclosure_contains_value() {
        let q = Quantity::with_pi(GaugeValue::plain(rat(4, 3)), 1);
        let iv = q.enclosure(128);
        assert!((iv.midpoint_f64() - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }
}
