//! Exact scalars: rationals, square roots of rationals, and outward-rounded
//! rational intervals for the few transcendental constants that appear.

mod gauge_value;
mod interval;
mod quantity;
pub mod rational;

pub use gauge_value::{cmp_gauge, GaugeValue};
pub use interval::{interval_cmp, IntervalValue, IntervalVerdict};
pub use quantity::Quantity;
pub use rational::{int, parse_rational, rat, Rational};

/// Default working precision for enclosures.
pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Converts a gauge value to an enclosure of at least the requested precision.
pub fn to_interval(v: &GaugeValue, precision_bits: u32) -> IntervalValue {
    v.to_interval(precision_bits.max(8))
}

/// Volume of the Euclidean unit ball `π^{n/2}/Γ(n/2+1)` as `c·π^⌊n/2⌋`.
pub fn ball_volume(n: usize) -> Quantity {
    use num_bigint::BigInt;
    let m = n / 2;
    let fact = |k: usize| (1..=k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i));
    let coeff = if n % 2 == 0 {
        Rational::new(BigInt::from(1), fact(m))
    } else {
        // 2^{2m+1} m! / (2m+1)!
        Rational::new((BigInt::from(1) << (2 * m + 1)) * fact(m), fact(n))
    };
    Quantity::with_pi(GaugeValue::plain(coeff), m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes_match_closed_forms() {
        assert_eq!(ball_volume(1), Quantity::rational(int(2)));
        assert_eq!(ball_volume(2), Quantity::with_pi(GaugeValue::plain(int(1)), 1));
        assert_eq!(ball_volume(3), Quantity::with_pi(GaugeValue::plain(rat(4, 3)), 1));
        assert_eq!(ball_volume(4), Quantity::with_pi(GaugeValue::plain(rat(1, 2)), 2));
        assert_eq!(ball_volume(5), Quantity::with_pi(GaugeValue::plain(rat(8, 15)), 2));
        let v2 = ball_volume(2).enclosure(DEFAULT_PRECISION_BITS);
        assert!(v2.width() < parse_rational("1e-40").unwrap());
    }
}
